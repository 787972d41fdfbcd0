//! Eve's two-stage intercept-resend attacks on the simplified protocol.
//!
//! Stage 1 replaces Bob's pulse with a state entangled with Eve's qutrit
//! probe. Stage 2 applies a unitary `V` on Bob⊗Eve to the pulse Alice sends
//! back. `V` is only pinned down on the four basis kets the protocol can
//! reach; [`UnitarySpec`] stores it as that partial isometry plus an
//! orthonormal completion, and refuses inputs that would exercise the
//! completion.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{build_real_state, BasisLabel, BobFrame, ModeCounts, StateVector, PROBE_LEVELS};

/// Largest weight an input may carry outside the specified domain of `V`.
pub const SPAN_TOLERANCE: f64 = 1e-9;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `κ(ε) = √((1 − ε²)/(3 − 2ε²))`.
pub fn kappa(epsilon: f64) -> f64 {
    let e2 = epsilon * epsilon;
    ((1.0 - e2).max(0.0) / (3.0 - 2.0 * e2)).sqrt()
}

/// The unique ε at which the CTRL and SWAP-x loss rates coincide,
/// `√((3 − √3)/2)`.
pub fn epsilon_star() -> f64 {
    ((3.0 - 3f64.sqrt()) / 2.0).sqrt()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfRange(epsilon))
    }
}

/// Parameters of the weaker attack.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct WeakerParams {
    pub epsilon: f64,
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
}

impl WeakerParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let k = kappa(epsilon);
        let b = (1.0 - 2.0 * k * k).sqrt() / std::f64::consts::SQRT_2;
        let a = self_overlap(epsilon, k) + b;
        Ok(WeakerParams {
            epsilon,
            kappa: k,
            a,
            b,
        })
    }
}

/// `√(1 − κ² − ε²)`, clamped at zero against rounding at ε = 1.
fn self_overlap(epsilon: f64, kappa: f64) -> f64 {
    (1.0 - kappa * kappa - epsilon * epsilon).max(0.0).sqrt()
}

/// Closed-form information probability and loss rates of the weaker attack.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    pub p: f64,
    pub r_ctrl: f64,
    pub r_swap: f64,
}

pub fn closed_form_rates(epsilon: f64) -> Result<ClosedForm> {
    check_epsilon(epsilon)?;
    let e2 = epsilon * epsilon;
    let k2 = kappa(epsilon).powi(2);
    Ok(ClosedForm {
        p: k2 / (e2 + k2),
        r_ctrl: 1.0 - 2.0 * e2 / 3.0,
        r_swap: 1.0 - (e2 + k2) / 2.0,
    })
}

/// Basis of Bob⊗Eve at a given cap, Alice's slots held at vacuum.
fn bob_eve_space(cap: u8) -> Vec<BasisLabel> {
    let mut labels = Vec::new();
    for b1 in 0..=cap {
        for b0 in 0..=cap {
            for e in 0..PROBE_LEVELS {
                labels.push(BasisLabel::bob_eve(b1, b0, e));
            }
        }
    }
    labels
}

type Dense = Vec<Complex64>;

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn to_dense(state: &StateVector, index: &BTreeMap<BasisLabel, usize>) -> Dense {
    let mut v = vec![ZERO; index.len()];
    for (label, amp) in state.iter() {
        v[index[label]] = *amp;
    }
    v
}

fn from_dense(v: &[Complex64], space: &[BasisLabel], cap: u8) -> StateVector {
    let amps = space
        .iter()
        .zip(v)
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(l, a)| (*l, *a))
        .collect();
    StateVector::from_parts(amps, cap, BobFrame::Computational)
}

/// Removes from `v` its components along the orthonormal `basis`, twice for
/// numerical stability.
fn project_out(v: &mut Dense, basis: &[Dense]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

fn normalize(v: &mut Dense) -> f64 {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// A unitary on Bob⊗Eve given by its action on a few basis kets.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitarySpec {
    cap: u8,
    columns: BTreeMap<BasisLabel, StateVector>,
    completion: BTreeMap<BasisLabel, StateVector>,
}

impl UnitarySpec {
    /// Builds the operator from its specified columns and fills the
    /// complement by Gram-Schmidt on the standard basis. Domain labels and
    /// outputs must live on Bob⊗Eve (Alice in vacuum).
    pub fn new(columns: Vec<(BasisLabel, StateVector)>, cap: u8) -> Result<Self> {
        let space = bob_eve_space(cap);
        let index: BTreeMap<BasisLabel, usize> =
            space.iter().enumerate().map(|(i, l)| (*l, i)).collect();

        let mut specified = BTreeMap::new();
        for (label, column) in columns {
            if !index.contains_key(&label) {
                return Err(Error::Truncation { label, cap });
            }
            if column.cap() != cap {
                return Err(Error::CapMismatch(column.cap(), cap));
            }
            if column.frame() != BobFrame::Computational {
                return Err(Error::FrameMismatch);
            }
            if let Some((bad, _)) = column.iter().find(|(l, _)| !index.contains_key(l)) {
                return Err(Error::Truncation { label: *bad, cap });
            }
            specified.insert(label, column);
        }

        let mut range: Vec<Dense> = Vec::new();
        for column in specified.values() {
            let mut v = to_dense(column, &index);
            project_out(&mut v, &range);
            if normalize(&mut v) > 1e-10 {
                range.push(v);
            }
        }
        let free: Vec<BasisLabel> = space
            .iter()
            .filter(|l| !specified.contains_key(l))
            .copied()
            .collect();
        let mut complement: Vec<Dense> = Vec::new();
        for k in 0..space.len() {
            if complement.len() == free.len() {
                break;
            }
            let mut v = vec![ZERO; space.len()];
            v[k] = ONE;
            project_out(&mut v, &range);
            project_out(&mut v, &complement);
            if normalize(&mut v) > 1e-6 {
                complement.push(v);
            }
        }
        let completion = free
            .into_iter()
            .zip(complement)
            .map(|(label, v)| (label, from_dense(&v, &space, cap)))
            .collect();

        Ok(UnitarySpec {
            cap,
            columns: specified,
            completion,
        })
    }

    pub fn cap(&self) -> u8 {
        self.cap
    }

    pub fn domain(&self) -> impl Iterator<Item = &BasisLabel> {
        self.columns.keys()
    }

    pub fn column(&self, label: &BasisLabel) -> Option<&StateVector> {
        self.columns.get(label)
    }

    /// Specified columns as canonical text, one block per domain ket.
    pub fn action_table(&self) -> String {
        let mut out = String::new();
        for (label, column) in &self.columns {
            out.push_str(&format!("V {}\n", label));
            for line in column.to_canonical_string().lines() {
                out.push_str("  ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }

    /// Applies the operator to Bob⊗Eve, with Alice's register as spectator.
    ///
    /// Fails if more than [`SPAN_TOLERANCE`] of the input's weight lies
    /// outside the specified domain.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.cap() != self.cap {
            return Err(Error::CapMismatch(state.cap(), self.cap));
        }
        let state = state.in_frame(BobFrame::Computational)?;
        let total = state.norm_sqr();
        let mut outside = 0.0;
        let mut amps: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        for (label, amp) in state.iter() {
            let alice = label.alice();
            let key = label.with_alice(ModeCounts::EMPTY);
            let column = match self.columns.get(&key) {
                Some(c) => c,
                None => {
                    outside += amp.norm_sqr();
                    &self.completion[&key]
                }
            };
            for (out, c) in column.iter() {
                *amps.entry(out.with_alice(alice)).or_insert(ZERO) += amp * c;
            }
        }
        if total > 0.0 && outside / total > SPAN_TOLERANCE {
            return Err(Error::OutsideSpecifiedSpan {
                weight: outside / total,
            });
        }
        Ok(StateVector::from_parts(
            amps,
            self.cap,
            BobFrame::Computational,
        ))
    }
}

/// Result of checking that an attack's stage-2 operator is unitary.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct UnitarityReport {
    pub max_norm_deviation: f64,
    pub max_column_overlap: f64,
    pub unitarity_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl UnitarityReport {
    pub fn max_defect(&self) -> f64 {
        self.max_norm_deviation
            .max(self.max_column_overlap)
            .max(self.unitarity_defect)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Bob → Alice: Eve discards Bob's pulse and sends her own state.
    Intercept,
    /// Alice → Bob: Eve applies `V`.
    Return,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Attack {
    name: String,
    stage1: StateVector,
    stage2: UnitarySpec,
    params: Option<WeakerParams>,
}

impl Attack {
    pub fn from_parts(
        name: impl Into<String>,
        stage1: StateVector,
        stage2: UnitarySpec,
        params: Option<WeakerParams>,
    ) -> Self {
        Attack {
            name: name.into(),
            stage1,
            stage2,
            params,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cap(&self) -> u8 {
        self.stage2.cap()
    }

    pub fn stage1(&self) -> &StateVector {
        &self.stage1
    }

    pub fn stage2(&self) -> &UnitarySpec {
        &self.stage2
    }

    pub fn params(&self) -> Option<&WeakerParams> {
        self.params.as_ref()
    }

    /// Replaces the intercepted pulse with the stage-1 state. Alice's
    /// ancilla must still be in vacuum.
    pub fn intercept(&self, incoming: &StateVector) -> Result<StateVector> {
        if incoming.weight_where(|l| l.alice() != ModeCounts::EMPTY) > 0.0 {
            return Err(Error::AncillaNotVacuum);
        }
        Ok(self.stage1.clone())
    }

    pub fn apply_stage(&self, stage: Stage, state: &StateVector) -> Result<StateVector> {
        match stage {
            Stage::Intercept => self.intercept(state),
            Stage::Return => self.stage2.apply(state),
        }
    }
}

pub fn apply_attack_stage(
    attack: &Attack,
    stage: Stage,
    state: &StateVector,
) -> Result<StateVector> {
    attack.apply_stage(stage, state)
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "attack {}", self.name)?;
        if let Some(p) = &self.params {
            writeln!(
                f,
                "epsilon {} kappa {} a {} b {}",
                p.epsilon, p.kappa, p.a, p.b
            )?;
        }
        writeln!(f, "stage 1")?;
        f.write_str(&self.stage1.to_canonical_string())?;
        writeln!(f, "stage 2")?;
        f.write_str(&self.stage2.action_table())
    }
}

/// `(|0,1⟩|1⟩ + |1,0⟩|1⟩ + |0,0⟩|0⟩)/√3`, shared by both attacks.
pub fn stage1_state(cap: u8) -> StateVector {
    let s = 1.0 / 3f64.sqrt();
    build_real_state(
        [
            (s, BasisLabel::bob_eve(0, 1, 1)),
            (s, BasisLabel::bob_eve(1, 0, 1)),
            (s, BasisLabel::bob_eve(0, 0, 0)),
        ],
        cap,
    )
    .expect("single-photon labels fit every cap")
}

/// Specified columns of `V` for parameter ε; ε = 0 is the full attack.
fn v_columns(epsilon: f64, cap: u8) -> Vec<(BasisLabel, StateVector)> {
    let k = kappa(epsilon);
    let direct = self_overlap(epsilon, k);
    let vac_plus = (1.0 - 2.0 * k * k).sqrt() / std::f64::consts::SQRT_2;
    let l = BasisLabel::bob_eve;
    let col = |terms: Vec<(f64, BasisLabel)>| {
        build_real_state(terms.into_iter().filter(|(a, _)| *a != 0.0), cap)
            .expect("labels fit every cap")
    };
    vec![
        (
            l(0, 1, 1),
            col(vec![
                (epsilon, l(0, 1, 2)),
                (-k, l(1, 0, 1)),
                (direct, l(0, 0, 0)),
            ]),
        ),
        (
            l(1, 0, 1),
            col(vec![
                (-k, l(0, 1, 0)),
                (epsilon, l(1, 0, 2)),
                (direct, l(0, 0, 1)),
            ]),
        ),
        (
            l(0, 0, 0),
            col(vec![
                (k, l(0, 1, 0)),
                (k, l(1, 0, 1)),
                (vac_plus, l(0, 0, 0)),
                (vac_plus, l(0, 0, 1)),
            ]),
        ),
        (l(0, 0, 1), col(vec![(1.0, l(0, 0, 2))])),
    ]
}

/// Full-information attack: every CTRL bit is lost, Eve learns every key bit.
pub fn build_full_attack(cap: u8) -> Attack {
    let third = (1.0f64 / 3.0).sqrt();
    let two_thirds = (2.0f64 / 3.0).sqrt();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let l = BasisLabel::bob_eve;
    let col =
        |terms: Vec<(f64, BasisLabel)>| build_real_state(terms, cap).expect("labels fit every cap");
    let columns = vec![
        (
            l(0, 1, 1),
            col(vec![(-third, l(1, 0, 1)), (two_thirds, l(0, 0, 0))]),
        ),
        (
            l(1, 0, 1),
            col(vec![(-third, l(0, 1, 0)), (two_thirds, l(0, 0, 1))]),
        ),
        (
            l(0, 0, 0),
            col(vec![
                (third, l(0, 1, 0)),
                (third, l(1, 0, 1)),
                (third * half, l(0, 0, 0)),
                (third * half, l(0, 0, 1)),
            ]),
        ),
        (l(0, 0, 1), col(vec![(1.0, l(0, 0, 2))])),
    ];
    let stage2 = UnitarySpec::new(columns, cap).expect("full-attack columns lie in Bob⊗Eve");
    Attack::from_parts("full", stage1_state(cap), stage2, None)
}

/// Attack trading information for fewer CTRL losses, parameterized by ε.
pub fn build_weaker_attack(epsilon: f64, cap: u8) -> Result<Attack> {
    let params = WeakerParams::new(epsilon)?;
    let stage2 = UnitarySpec::new(v_columns(epsilon, cap), cap)?;
    Ok(Attack::from_parts(
        format!("weaker({epsilon})"),
        stage1_state(cap),
        stage2,
        Some(params),
    ))
}

/// Checks norms and pairwise overlaps of the specified columns and the
/// unitarity of the completed operator, `max |U†U − I|`.
pub fn verify_unitary(attack: &Attack, tol: f64) -> UnitarityReport {
    let spec = attack.stage2();
    let space = bob_eve_space(spec.cap);
    let index: BTreeMap<BasisLabel, usize> =
        space.iter().enumerate().map(|(i, l)| (*l, i)).collect();

    let specified: Vec<Dense> = spec.columns.values().map(|c| to_dense(c, &index)).collect();
    let mut max_norm_deviation: f64 = 0.0;
    let mut max_column_overlap: f64 = 0.0;
    for (i, u) in specified.iter().enumerate() {
        max_norm_deviation = max_norm_deviation.max((dot(u, u).re - 1.0).abs());
        for v in &specified[i + 1..] {
            max_column_overlap = max_column_overlap.max(dot(u, v).norm());
        }
    }

    let full: Vec<Dense> = space
        .iter()
        .map(|l| {
            let column = spec.columns.get(l).or_else(|| spec.completion.get(l));
            column
                .map(|c| to_dense(c, &index))
                .unwrap_or_else(|| vec![ZERO; space.len()])
        })
        .collect();
    let mut unitarity_defect: f64 = 0.0;
    for (i, u) in full.iter().enumerate() {
        for (j, v) in full.iter().enumerate() {
            let target = if i == j { ONE } else { ZERO };
            unitarity_defect = unitarity_defect.max((dot(u, v) - target).norm());
        }
    }

    let passed = max_norm_deviation <= tol && max_column_overlap <= tol && unitarity_defect <= tol;
    UnitarityReport {
        max_norm_deviation,
        max_column_overlap,
        unitarity_defect,
        tolerance: tol,
        passed,
    }
}

/// Attack selection as named on the command line.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "epsilon", rename_all = "lowercase")]
pub enum AttackChoice {
    None,
    Full,
    Weaker(f64),
}

impl AttackChoice {
    pub fn build(&self, cap: u8) -> Result<Option<Attack>> {
        match *self {
            AttackChoice::None => Ok(None),
            AttackChoice::Full => Ok(Some(build_full_attack(cap))),
            AttackChoice::Weaker(eps) => build_weaker_attack(eps, cap).map(Some),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AttackChoice::Weaker(eps) => check_epsilon(eps),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AttackChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackChoice::None => f.write_str("none"),
            AttackChoice::Full => f.write_str("full"),
            AttackChoice::Weaker(eps) => write!(f, "weaker({eps})"),
        }
    }
}

/// Labels in the support of `state` that `spec` leaves unspecified.
pub fn unspecified_support(spec: &UnitarySpec, state: &StateVector) -> BTreeSet<BasisLabel> {
    state
        .iter()
        .map(|(l, _)| l.with_alice(ModeCounts::EMPTY))
        .filter(|l| spec.column(l).is_none())
        .collect()
}
