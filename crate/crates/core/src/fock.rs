//! Truncated Fock-space states over the register layout
//! Alice ancilla ⊗ Bob channel ⊗ Eve probe.
//!
//! Each two-mode register holds photon counts `(m1, m0)`: `m1` photons in the
//! |1⟩ mode and `m0` in the |0⟩ mode. When Bob's register is expressed in the
//! Hadamard mode basis the same two slots hold `(m-, m+)`, and the state
//! carries [`BobFrame::Hadamard`] so the two readings are never mixed up.
//! Eve's probe is a qutrit with levels 0, 1 and 2.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Amplitudes whose squared magnitude falls below this are dropped when a
/// state is canonicalized, and branches below it are not reported.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

pub const DEFAULT_CAP: u8 = 2;

/// Dimension of Eve's probe space.
pub const PROBE_LEVELS: u8 = 3;

/// One basis ket `|a1,a0⟩_A |b1,b0⟩_B |e⟩_E`.
///
/// The derived ordering is lexicographic over `(a1, a0, b1, b0, e)`, which
/// fixes the canonical order of serialized states.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisLabel {
    pub a1: u8,
    pub a0: u8,
    pub b1: u8,
    pub b0: u8,
    pub e: u8,
}

impl BasisLabel {
    pub const VACUUM: BasisLabel = BasisLabel {
        a1: 0,
        a0: 0,
        b1: 0,
        b0: 0,
        e: 0,
    };

    pub const fn new(a1: u8, a0: u8, b1: u8, b0: u8, e: u8) -> Self {
        BasisLabel { a1, a0, b1, b0, e }
    }

    /// Label with Alice's ancilla in vacuum.
    pub const fn bob_eve(b1: u8, b0: u8, e: u8) -> Self {
        BasisLabel {
            a1: 0,
            a0: 0,
            b1,
            b0,
            e,
        }
    }

    pub fn within_cap(&self, cap: u8) -> bool {
        self.a1 <= cap
            && self.a0 <= cap
            && self.b1 <= cap
            && self.b0 <= cap
            && self.e < PROBE_LEVELS
    }

    pub fn alice(&self) -> ModeCounts {
        ModeCounts {
            one: self.a1,
            zero: self.a0,
        }
    }

    pub fn bob(&self) -> ModeCounts {
        ModeCounts {
            one: self.b1,
            zero: self.b0,
        }
    }

    pub fn with_alice(self, counts: ModeCounts) -> Self {
        BasisLabel {
            a1: counts.one,
            a0: counts.zero,
            ..self
        }
    }

    pub fn with_bob(self, counts: ModeCounts) -> Self {
        BasisLabel {
            b1: counts.one,
            b0: counts.zero,
            ..self
        }
    }

    pub fn with_probe(self, e: u8) -> Self {
        BasisLabel { e, ..self }
    }

    fn fmt_in_frame(&self, f: &mut fmt::Formatter<'_>, frame: BobFrame) -> fmt::Result {
        let bob = match frame {
            BobFrame::Computational => "B",
            BobFrame::Hadamard => "Bx",
        };
        write!(
            f,
            "|{},{}>A |{},{}>{} |{}>E",
            self.a1, self.a0, self.b1, self.b0, bob, self.e
        )
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_in_frame(f, BobFrame::Computational)
    }
}

/// Number-resolved occupation of a two-mode register.
///
/// In the computational basis `one`/`zero` count photons in the |1⟩/|0⟩
/// modes; in the Hadamard basis they count photons in the |−⟩/|+⟩ modes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeCounts {
    pub one: u8,
    pub zero: u8,
}

impl ModeCounts {
    pub const EMPTY: ModeCounts = ModeCounts { one: 0, zero: 0 };

    pub fn new(one: u8, zero: u8) -> Self {
        ModeCounts { one, zero }
    }

    pub fn total(&self) -> u8 {
        self.one + self.zero
    }
}

/// Threshold-detector readout of a two-mode register: one flag per mode,
/// photon numbers discarded.
#[derive(
    Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct ClickPattern {
    pub one: bool,
    pub zero: bool,
}

impl ClickPattern {
    pub const NONE: ClickPattern = ClickPattern {
        one: false,
        zero: false,
    };

    pub fn new(one: bool, zero: bool) -> Self {
        ClickPattern { one, zero }
    }

    pub fn any(&self) -> bool {
        self.one || self.zero
    }

    /// Hadamard-basis reading of the `one` detector.
    pub fn minus(&self) -> bool {
        self.one
    }

    /// Hadamard-basis reading of the `zero` detector.
    pub fn plus(&self) -> bool {
        self.zero
    }
}

pub fn to_click_pattern(counts: ModeCounts) -> ClickPattern {
    ClickPattern {
        one: counts.one >= 1,
        zero: counts.zero >= 1,
    }
}

/// Mode basis in which Bob's register amplitudes are currently expressed.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BobFrame {
    Computational,
    Hadamard,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    Alice,
    Bob,
    Eve,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementBasis {
    Computational,
    Hadamard,
}

impl MeasurementBasis {
    pub fn frame(self) -> BobFrame {
        match self {
            MeasurementBasis::Computational => BobFrame::Computational,
            MeasurementBasis::Hadamard => BobFrame::Hadamard,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Modes(ModeCounts),
    Probe(u8),
}

impl Outcome {
    pub fn modes(&self) -> Option<ModeCounts> {
        match self {
            Outcome::Modes(m) => Some(*m),
            Outcome::Probe(_) => None,
        }
    }

    pub fn probe(&self) -> Option<u8> {
        match self {
            Outcome::Probe(level) => Some(*level),
            Outcome::Modes(_) => None,
        }
    }
}

/// One outcome of a projective measurement together with the collapsed state.
#[derive(Clone, Debug)]
pub struct Branch {
    pub outcome: Outcome,
    pub probability: f64,
    pub post_state: StateVector,
}

/// A pure state over the truncated register layout.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: BTreeMap<BasisLabel, Complex64>,
    cap: u8,
    frame: BobFrame,
}

/// Builds a superposition from explicit terms. Duplicate labels are summed;
/// the result is not renormalized.
pub fn build_state<I>(terms: I, cap: u8) -> Result<StateVector>
where
    I: IntoIterator<Item = (Complex64, BasisLabel)>,
{
    let mut amps = BTreeMap::new();
    for (amp, label) in terms {
        if !label.within_cap(cap) {
            return Err(Error::Truncation { label, cap });
        }
        *amps.entry(label).or_insert(Complex64::new(0.0, 0.0)) += amp;
    }
    if amps.is_empty() {
        return Err(Error::EmptyState);
    }
    Ok(StateVector {
        amps,
        cap,
        frame: BobFrame::Computational,
    })
}

/// Real-amplitude convenience wrapper around [`build_state`].
pub fn build_real_state<I>(terms: I, cap: u8) -> Result<StateVector>
where
    I: IntoIterator<Item = (f64, BasisLabel)>,
{
    build_state(
        terms.into_iter().map(|(a, l)| (Complex64::new(a, 0.0), l)),
        cap,
    )
}

impl StateVector {
    pub fn basis_state(label: BasisLabel, cap: u8) -> Result<Self> {
        build_state([(Complex64::new(1.0, 0.0), label)], cap)
    }

    pub(crate) fn from_parts(
        amps: BTreeMap<BasisLabel, Complex64>,
        cap: u8,
        frame: BobFrame,
    ) -> Self {
        StateVector { amps, cap, frame }
    }

    pub fn cap(&self) -> u8 {
        self.cap
    }

    pub fn frame(&self) -> BobFrame {
        self.frame
    }

    /// Marks the Bob slots as Hadamard-mode occupations without transforming.
    pub fn with_frame(mut self, frame: BobFrame) -> Self {
        self.frame = frame;
        self
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Complex64 {
        self.amps.get(label).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &Complex64)> {
        self.amps.iter()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::EmptyState);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let amps = self.amps.iter().map(|(l, a)| (*l, a * factor)).collect();
        StateVector {
            amps,
            cap: self.cap,
            frame: self.frame,
        }
    }

    /// Applies a bijection of basis labels. Every permutation of the basis is
    /// unitary, so norms are preserved exactly.
    pub fn permute_labels<F>(&self, f: F) -> Self
    where
        F: Fn(BasisLabel) -> BasisLabel,
    {
        let mut amps = BTreeMap::new();
        for (label, amp) in &self.amps {
            *amps.entry(f(*label)).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        StateVector {
            amps,
            cap: self.cap,
            frame: self.frame,
        }
    }

    /// Drops negligible amplitudes so that equal states compare equal.
    pub fn canonical(&self) -> Self {
        let amps = self
            .amps
            .iter()
            .filter(|(_, a)| a.norm_sqr() >= PRUNE_THRESHOLD)
            .map(|(l, a)| (*l, *a))
            .collect();
        StateVector {
            amps,
            cap: self.cap,
            frame: self.frame,
        }
    }

    /// Largest per-label amplitude difference. States in different frames
    /// are compared after moving `other` into this state's frame.
    pub fn max_amplitude_diff(&self, other: &StateVector) -> Result<f64> {
        let other = other.in_frame(self.frame)?;
        let mut worst: f64 = 0.0;
        for (label, amp) in &self.amps {
            worst = worst.max((amp - other.amplitude(label)).norm());
        }
        for (label, amp) in &other.amps {
            if !self.amps.contains_key(label) {
                worst = worst.max(amp.norm());
            }
        }
        Ok(worst)
    }

    /// Returns the state re-expressed with Bob's register in `frame`.
    pub fn in_frame(&self, frame: BobFrame) -> Result<Self> {
        if self.frame == frame {
            Ok(self.clone())
        } else {
            hadamard_transform(self)
        }
    }

    /// Reduced Bob⊗Eve state, available when Alice's register holds a
    /// definite occupation (e.g. right after she measured it). Alice's slots
    /// are reset to vacuum in the returned state.
    pub fn discard_alice(&self) -> Option<Self> {
        let mut alice = self.amps.keys().map(|l| l.alice());
        let first = alice.next()?;
        if alice.any(|a| a != first) {
            return None;
        }
        Some(self.permute_labels(|l| l.with_alice(ModeCounts::EMPTY)))
    }

    /// Weight carried by labels satisfying `pred`.
    pub fn weight_where<F>(&self, pred: F) -> f64
    where
        F: Fn(&BasisLabel) -> bool,
    {
        self.amps
            .iter()
            .filter(|(l, _)| pred(l))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Canonical text form: one `label re im` line per stored amplitude in
    /// label order, negligible amplitudes pruned and tiny components printed
    /// as zero.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        for (label, amp) in self.canonical().iter() {
            out.push_str(&format!(
                "{} {} {}\n",
                LabelInFrame(label, self.frame),
                fmt_component(amp.re),
                fmt_component(amp.im)
            ));
        }
        out
    }
}

struct LabelInFrame<'a>(&'a BasisLabel, BobFrame);

impl fmt::Display for LabelInFrame<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_in_frame(f, self.1)
    }
}

fn fmt_component(x: f64) -> String {
    let x = if x.abs() < 5e-13 { 0.0 } else { x };
    format!("{:+.12}", x)
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            label: String,
            re: f64,
            im: f64,
        }
        let terms: Vec<Term> = self
            .canonical()
            .iter()
            .map(|(l, a)| Term {
                label: LabelInFrame(l, self.frame).to_string(),
                re: a.re,
                im: a.im,
            })
            .collect();
        let mut s = serializer.serialize_struct("StateVector", 3)?;
        s.serialize_field("cap", &self.cap)?;
        s.serialize_field("frame", &self.frame)?;
        s.serialize_field("terms", &terms)?;
        s.end()
    }
}

/// ⟨s1|s2⟩, conjugate-linear in the first argument.
pub fn inner_product(s1: &StateVector, s2: &StateVector) -> Result<Complex64> {
    if s1.cap != s2.cap {
        return Err(Error::CapMismatch(s1.cap, s2.cap));
    }
    if s1.frame != s2.frame {
        return Err(Error::FrameMismatch);
    }
    let (small, large, conj_small) = if s1.len() <= s2.len() {
        (s1, s2, true)
    } else {
        (s2, s1, false)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (label, a) in &small.amps {
        if let Some(b) = large.amps.get(label) {
            acc += if conj_small {
                a.conj() * b
            } else {
                b.conj() * a
            };
        }
    }
    Ok(acc)
}

fn factorial(n: u8) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

fn binomial(n: u8, k: u8) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Changes Bob's register between the computational modes and the Hadamard
/// modes.
///
/// Uses the creation-operator substitution a0† = (a+† + a−†)/√2,
/// a1† = (a+† − a−†)/√2. The inverse substitution has the same form, so the
/// map is an involution and the state's frame tag simply flips. Photon
/// number is conserved, but an occupation that fits the cap per mode can
/// spill over it once concentrated in one mode; that case is a truncation
/// error.
pub fn hadamard_transform(state: &StateVector) -> Result<StateVector> {
    let cap = state.cap;
    let mut amps: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
    for (label, amp) in &state.amps {
        let (n1, n0) = (label.b1, label.b0);
        let total = n1 + n0;
        let prefactor = 2f64.powf(-(total as f64) / 2.0) / (factorial(n1) * factorial(n0)).sqrt();
        for i in 0..=n1 {
            for j in 0..=n0 {
                let minus = i + j;
                let plus = total - minus;
                let out = label.with_bob(ModeCounts::new(minus, plus));
                if minus > cap || plus > cap {
                    return Err(Error::Truncation { label: out, cap });
                }
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let coeff = sign
                    * binomial(n1, i)
                    * binomial(n0, j)
                    * (factorial(plus) * factorial(minus)).sqrt()
                    * prefactor;
                *amps.entry(out).or_insert(Complex64::new(0.0, 0.0)) += amp * coeff;
            }
        }
    }
    let frame = match state.frame {
        BobFrame::Computational => BobFrame::Hadamard,
        BobFrame::Hadamard => BobFrame::Computational,
    };
    Ok(StateVector { amps, cap, frame })
}

/// Enumerates every number-resolved outcome of measuring one subsystem.
///
/// Probabilities are relative to the input norm, so they sum to one even for
/// an unnormalized input. Outcomes with probability below
/// [`PRUNE_THRESHOLD`] are omitted.
pub fn measure_enumerate(
    state: &StateVector,
    subsystem: Subsystem,
    basis: MeasurementBasis,
) -> Result<Vec<Branch>> {
    if state.is_empty() {
        return Err(Error::EmptyState);
    }
    let state = match (subsystem, basis) {
        (Subsystem::Bob, basis) => state.in_frame(basis.frame())?,
        (_, MeasurementBasis::Computational) => state.clone(),
        (_, MeasurementBasis::Hadamard) => return Err(Error::InvalidBasis),
    };
    let total = state.norm_sqr();
    if total == 0.0 {
        return Err(Error::EmptyState);
    }

    let mut groups: BTreeMap<Outcome, BTreeMap<BasisLabel, Complex64>> = BTreeMap::new();
    for (label, amp) in &state.amps {
        let outcome = match subsystem {
            Subsystem::Alice => Outcome::Modes(label.alice()),
            Subsystem::Bob => Outcome::Modes(label.bob()),
            Subsystem::Eve => Outcome::Probe(label.e),
        };
        groups.entry(outcome).or_default().insert(*label, *amp);
    }

    let mut branches = Vec::with_capacity(groups.len());
    for (outcome, amps) in groups {
        let weight: f64 = amps.values().map(|a| a.norm_sqr()).sum();
        let probability = weight / total;
        if probability < PRUNE_THRESHOLD {
            continue;
        }
        let post = StateVector {
            amps,
            cap: state.cap,
            frame: state.frame,
        };
        let post_state = post.scaled(Complex64::new(1.0 / weight.sqrt(), 0.0));
        branches.push(Branch {
            outcome,
            probability,
            post_state,
        });
    }
    Ok(branches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bob(b1: u8, b0: u8) -> BasisLabel {
        BasisLabel::bob_eve(b1, b0, 0)
    }

    // Amplitude of |in⟩ → |out⟩ for the 2x2 mode unitary `u`, computed as a
    // permanent of the row/column-repeated submatrix. Independent of the
    // operator-expansion route used by `hadamard_transform`.
    fn permanent_amplitude(u: [[f64; 2]; 2], input: [u8; 2], output: [u8; 2]) -> f64 {
        let rows: Vec<usize> = (0..2)
            .flat_map(|m| std::iter::repeat_n(m, input[m] as usize))
            .collect();
        let cols: Vec<usize> = (0..2)
            .flat_map(|m| std::iter::repeat_n(m, output[m] as usize))
            .collect();
        let n = rows.len();
        if n != cols.len() {
            return 0.0;
        }
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let perm: f64 = perms(n)
            .iter()
            .map(|p| (0..n).map(|k| u[rows[k]][cols[p[k]]]).product::<f64>())
            .sum();
        let norm: f64 = input
            .iter()
            .chain(output.iter())
            .map(|&m| factorial(m))
            .product();
        perm / norm.sqrt()
    }

    #[test]
    fn hadamard_matches_permanent_oracle() {
        // Mode order [zero, one] in, [plus, minus] out.
        let s = FRAC_1_SQRT_2;
        let u = [[s, s], [s, -s]];
        for n1 in 0..=2u8 {
            for n0 in 0..=2u8 {
                if n1 + n0 > 2 {
                    continue;
                }
                let input = StateVector::basis_state(bob(n1, n0), 2).unwrap();
                let out = hadamard_transform(&input).unwrap();
                for minus in 0..=2u8 {
                    for plus in 0..=2u8 {
                        let expected = permanent_amplitude(u, [n0, n1], [plus, minus]);
                        let got = out.amplitude(&bob(minus, plus));
                        assert_abs_diff_eq!(got.re, expected, epsilon = 1e-12);
                        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn single_zero_mode_photon_splits_evenly() {
        let out = hadamard_transform(&StateVector::basis_state(bob(0, 1), 2).unwrap()).unwrap();
        assert_eq!(out.frame(), BobFrame::Hadamard);
        assert_abs_diff_eq!(out.amplitude(&bob(0, 1)).re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitude(&bob(1, 0)).re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn plus_state_is_single_plus_photon() {
        let plus =
            build_real_state([(FRAC_1_SQRT_2, bob(0, 1)), (FRAC_1_SQRT_2, bob(1, 0))], 2).unwrap();
        let out = hadamard_transform(&plus).unwrap().canonical();
        assert_eq!(out.len(), 1);
        assert_abs_diff_eq!(out.amplitude(&bob(0, 1)).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn one_photon_per_mode_bunches() {
        let out = hadamard_transform(&StateVector::basis_state(bob(1, 1), 2).unwrap())
            .unwrap()
            .canonical();
        assert_eq!(out.len(), 2);
        assert_abs_diff_eq!(out.amplitude(&bob(0, 2)).re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            out.amplitude(&bob(2, 0)).re,
            -FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn minus_mode_sign_convention() {
        let minus = StateVector::basis_state(bob(1, 0), 2)
            .unwrap()
            .with_frame(BobFrame::Hadamard);
        let comp = hadamard_transform(&minus).unwrap();
        assert_eq!(comp.frame(), BobFrame::Computational);
        assert_abs_diff_eq!(
            comp.amplitude(&bob(0, 1)).re,
            FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            comp.amplitude(&bob(1, 0)).re,
            -FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn hadamard_overflow_is_truncation() {
        let s = StateVector::basis_state(bob(2, 1), 2).unwrap();
        assert!(matches!(
            hadamard_transform(&s),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn build_state_rules() {
        let vac = StateVector::basis_state(BasisLabel::VACUUM, 2).unwrap();
        assert_eq!(vac.len(), 1);
        assert_eq!(vac.amplitude(&BasisLabel::VACUUM), c(1.0));

        let summed = build_real_state([(0.5, bob(0, 1)), (0.25, bob(0, 1))], 2).unwrap();
        assert_eq!(summed.amplitude(&bob(0, 1)), c(0.75));

        let over = build_real_state([(1.0, bob(3, 0))], 2);
        assert!(matches!(over, Err(Error::Truncation { .. })));
        let bad_probe = build_real_state([(1.0, BasisLabel::bob_eve(0, 0, 3))], 2);
        assert!(matches!(bad_probe, Err(Error::Truncation { .. })));

        assert_eq!(build_real_state(Vec::new(), 2), Err(Error::EmptyState));
    }

    #[test]
    fn click_patterns_are_threshold() {
        assert_eq!(
            to_click_pattern(ModeCounts::new(0, 1)),
            ClickPattern::new(false, true)
        );
        assert_eq!(
            to_click_pattern(ModeCounts::new(2, 0)),
            ClickPattern::new(true, false)
        );
        assert_eq!(
            to_click_pattern(ModeCounts::new(1, 0)),
            to_click_pattern(ModeCounts::new(2, 0))
        );
        assert_eq!(to_click_pattern(ModeCounts::EMPTY), ClickPattern::NONE);
    }

    #[test]
    fn measure_plus_in_computational_basis() {
        let plus =
            build_real_state([(FRAC_1_SQRT_2, bob(0, 1)), (FRAC_1_SQRT_2, bob(1, 0))], 2).unwrap();
        let branches =
            measure_enumerate(&plus, Subsystem::Bob, MeasurementBasis::Computational).unwrap();
        assert_eq!(branches.len(), 2);
        for b in &branches {
            assert_abs_diff_eq!(b.probability, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(b.post_state.norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn vacuum_in_hadamard_basis() {
        let probe_plus = build_real_state(
            [
                (FRAC_1_SQRT_2, BasisLabel::bob_eve(0, 0, 0)),
                (FRAC_1_SQRT_2, BasisLabel::bob_eve(0, 0, 1)),
            ],
            2,
        )
        .unwrap();
        let branches =
            measure_enumerate(&probe_plus, Subsystem::Bob, MeasurementBasis::Hadamard).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].outcome, Outcome::Modes(ModeCounts::EMPTY));
        assert_abs_diff_eq!(branches[0].probability, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn probe_measurement_probability() {
        let (eps, kappa) = (0.3f64, 0.5f64);
        let norm = (eps * eps + kappa * kappa).sqrt();
        let probe = build_real_state(
            [
                (eps / norm, BasisLabel::bob_eve(0, 0, 2)),
                (kappa / norm, BasisLabel::bob_eve(0, 0, 1)),
            ],
            2,
        )
        .unwrap();
        let branches =
            measure_enumerate(&probe, Subsystem::Eve, MeasurementBasis::Computational).unwrap();
        let hit = branches
            .iter()
            .find(|b| b.outcome == Outcome::Probe(1))
            .unwrap();
        assert_abs_diff_eq!(
            hit.probability,
            kappa * kappa / (eps * eps + kappa * kappa),
            epsilon = 1e-15
        );
    }

    #[test]
    fn measurement_errors() {
        let vac = StateVector::basis_state(BasisLabel::VACUUM, 2).unwrap();
        assert_eq!(
            measure_enumerate(&vac, Subsystem::Eve, MeasurementBasis::Hadamard).unwrap_err(),
            Error::InvalidBasis
        );
        let zero = vac.scaled(c(0.0));
        assert_eq!(
            measure_enumerate(&zero, Subsystem::Alice, MeasurementBasis::Computational)
                .unwrap_err(),
            Error::EmptyState
        );
    }

    #[test]
    fn inner_product_of_probe_states() {
        let zero = StateVector::basis_state(BasisLabel::bob_eve(0, 0, 0), 2).unwrap();
        let plus = build_real_state(
            [
                (FRAC_1_SQRT_2, BasisLabel::bob_eve(0, 0, 0)),
                (FRAC_1_SQRT_2, BasisLabel::bob_eve(0, 0, 1)),
            ],
            2,
        )
        .unwrap();
        assert_abs_diff_eq!(
            inner_product(&zero, &plus).unwrap().re,
            FRAC_1_SQRT_2,
            epsilon = 1e-15
        );

        let phased = zero.scaled(Complex64::new(0.0, 1.0));
        assert_eq!(
            inner_product(&phased, &zero).unwrap(),
            Complex64::new(0.0, -1.0)
        );
        assert_eq!(
            inner_product(&zero, &phased).unwrap(),
            Complex64::new(0.0, 1.0)
        );
    }

    #[test]
    fn discard_alice_requires_definite_register() {
        let definite = build_real_state(
            [
                (0.6, BasisLabel::new(1, 0, 0, 0, 1)),
                (0.8, BasisLabel::new(1, 0, 0, 1, 0)),
            ],
            2,
        )
        .unwrap();
        let reduced = definite.discard_alice().unwrap();
        assert_eq!(reduced.amplitude(&BasisLabel::bob_eve(0, 0, 1)), c(0.6));

        let entangled = build_real_state(
            [
                (0.6, BasisLabel::new(1, 0, 0, 0, 1)),
                (0.8, BasisLabel::new(0, 0, 0, 1, 0)),
            ],
            2,
        )
        .unwrap();
        assert!(entangled.discard_alice().is_none());
    }

    #[test]
    fn canonical_serialization_is_ordered() {
        let s = build_real_state(
            [
                (0.8, BasisLabel::bob_eve(1, 0, 1)),
                (0.6, BasisLabel::bob_eve(0, 1, 0)),
                (1e-9, BasisLabel::VACUUM),
            ],
            2,
        )
        .unwrap();
        assert_eq!(
            s.to_canonical_string(),
            "|0,0>A |0,1>B |0>E +0.600000000000 +0.000000000000\n\
             |0,0>A |1,0>B |1>E +0.800000000000 +0.000000000000\n"
        );
    }
}
