//! Round structure of the Mirror protocol and its simplified three-operation
//! variant: Bob's preparation, Alice's classical operations, sifting and
//! rate accounting.

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{build_real_state, BasisLabel, ClickPattern, MeasurementBasis, StateVector};
use crate::stats::wilson_interval;

/// Confidence level of the Wilson intervals attached to sampled rates.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AliceOp {
    #[serde(rename = "CTRL")]
    Ctrl,
    #[serde(rename = "SWAP-10")]
    Swap10,
    #[serde(rename = "SWAP-01")]
    Swap01,
    #[serde(rename = "SWAP-ALL")]
    SwapAll,
}

impl AliceOp {
    pub const ALL: [AliceOp; 4] = [
        AliceOp::Ctrl,
        AliceOp::Swap10,
        AliceOp::Swap01,
        AliceOp::SwapAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AliceOp::Ctrl => "CTRL",
            AliceOp::Swap10 => "SWAP-10",
            AliceOp::Swap01 => "SWAP-01",
            AliceOp::SwapAll => "SWAP-ALL",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Key bit carried by a SWAP-x round.
    pub fn key_bit(self) -> Option<u8> {
        match self {
            AliceOp::Swap10 => Some(0),
            AliceOp::Swap01 => Some(1),
            _ => None,
        }
    }

    pub fn is_swap_x(self) -> bool {
        self.key_bit().is_some()
    }
}

impl fmt::Display for AliceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AliceOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('_', "-").as_str() {
            "CTRL" => Ok(AliceOp::Ctrl),
            "SWAP-10" | "SWAP10" => Ok(AliceOp::Swap10),
            "SWAP-01" | "SWAP01" => Ok(AliceOp::Swap01),
            "SWAP-ALL" | "SWAPALL" => Ok(AliceOp::SwapAll),
            _ => Err(Error::Usage(format!("unknown operation `{s}`"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Mirror,
    Simplified,
}

impl Variant {
    pub fn admits(self, op: AliceOp) -> bool {
        op != AliceOp::SwapAll || self == Variant::Mirror
    }

    pub fn admissible_ops(self) -> &'static [AliceOp] {
        match self {
            Variant::Mirror => &AliceOp::ALL,
            Variant::Simplified => &AliceOp::ALL[..3],
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mirror" => Ok(Variant::Mirror),
            "simplified" => Ok(Variant::Simplified),
            _ => Err(Error::Usage(format!(
                "unknown variant `{s}` (expected mirror|simplified)"
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Mirror => "mirror",
            Variant::Simplified => "simplified",
        })
    }
}

/// A protocol variant together with Alice's and Bob's choice distributions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolVariant {
    pub variant: Variant,
    op_probabilities: [f64; 4],
    hadamard_probability: f64,
}

impl ProtocolVariant {
    /// Uniform over admissible operations, fair basis coin.
    pub fn uniform(variant: Variant) -> Self {
        let ops = variant.admissible_ops();
        let mut op_probabilities = [0.0; 4];
        for op in ops {
            op_probabilities[op.index()] = 1.0 / ops.len() as f64;
        }
        ProtocolVariant {
            variant,
            op_probabilities,
            hadamard_probability: 0.5,
        }
    }

    pub fn new(
        variant: Variant,
        ops: &[(AliceOp, f64)],
        hadamard_probability: f64,
    ) -> Result<Self> {
        let mut op_probabilities = [0.0; 4];
        for &(op, p) in ops {
            if !variant.admits(op) && p != 0.0 {
                return Err(Error::InvalidProbabilities(format!(
                    "{op} is not admissible in the {variant} protocol"
                )));
            }
            op_probabilities[op.index()] += p;
        }
        if op_probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidProbabilities(
                "operation probabilities must be nonnegative".into(),
            ));
        }
        let sum: f64 = op_probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbabilities(format!(
                "operation probabilities sum to {sum}"
            )));
        }
        if !(0.0..=1.0).contains(&hadamard_probability) {
            return Err(Error::InvalidProbabilities(format!(
                "hadamard probability {hadamard_probability} outside [0, 1]"
            )));
        }
        Ok(ProtocolVariant {
            variant,
            op_probabilities,
            hadamard_probability,
        })
    }

    pub fn op_probability(&self, op: AliceOp) -> f64 {
        self.op_probabilities[op.index()]
    }

    pub fn basis_probability(&self, basis: MeasurementBasis) -> f64 {
        match basis {
            MeasurementBasis::Computational => 1.0 - self.hadamard_probability,
            MeasurementBasis::Hadamard => self.hadamard_probability,
        }
    }
}

/// Bob's outbound pulse: one photon in the |+⟩ mode, Alice and Eve idle.
pub fn bob_prepare(cap: u8) -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    build_real_state(
        [
            (s, BasisLabel::bob_eve(0, 1, 0)),
            (s, BasisLabel::bob_eve(1, 0, 0)),
        ],
        cap,
    )
    .expect("single-photon labels fit every cap")
}

/// Applies one of Alice's classical operations as a permutation of basis
/// labels. SWAP operations exchange the contents of Alice's ancilla mode
/// with Bob's channel mode, which reduces to the one-way move whenever the
/// ancilla starts in vacuum.
pub fn alice_apply(op: AliceOp, state: &StateVector) -> StateVector {
    match op {
        AliceOp::Ctrl => state.clone(),
        AliceOp::Swap10 => state.permute_labels(|l| BasisLabel {
            a1: l.b1,
            b1: l.a1,
            ..l
        }),
        AliceOp::Swap01 => state.permute_labels(|l| BasisLabel {
            a0: l.b0,
            b0: l.a0,
            ..l
        }),
        AliceOp::SwapAll => state.permute_labels(|l| BasisLabel {
            a1: l.b1,
            a0: l.b0,
            b1: l.a1,
            b0: l.a0,
            e: l.e,
        }),
    }
}

/// Classical record of one round.
///
/// `bob_clicks` follows `bob_basis`: for a Hadamard-basis measurement the
/// `one`/`zero` detectors are the |−⟩/|+⟩ modes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "RecordRow", from = "RecordRow")]
pub struct RoundRecord {
    pub op: AliceOp,
    pub alice_clicks: ClickPattern,
    pub bob_basis: MeasurementBasis,
    pub bob_clicks: ClickPattern,
    pub eve_outcome: Option<u8>,
}

/// Flat serialized form of [`RoundRecord`]. Under the Hadamard basis
/// `bob_click_1` is the |−⟩ detector and `bob_click_0` the |+⟩ detector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecordRow {
    pub op: AliceOp,
    pub alice_click_1: bool,
    pub alice_click_0: bool,
    pub bob_basis: MeasurementBasis,
    pub bob_click_1: bool,
    pub bob_click_0: bool,
    pub eve_outcome: Option<u8>,
}

impl From<RoundRecord> for RecordRow {
    fn from(r: RoundRecord) -> Self {
        RecordRow {
            op: r.op,
            alice_click_1: r.alice_clicks.one,
            alice_click_0: r.alice_clicks.zero,
            bob_basis: r.bob_basis,
            bob_click_1: r.bob_clicks.one,
            bob_click_0: r.bob_clicks.zero,
            eve_outcome: r.eve_outcome,
        }
    }
}

impl From<RecordRow> for RoundRecord {
    fn from(r: RecordRow) -> Self {
        RoundRecord {
            op: r.op,
            alice_clicks: ClickPattern::new(r.alice_click_1, r.alice_click_0),
            bob_basis: r.bob_basis,
            bob_clicks: ClickPattern::new(r.bob_click_1, r.bob_click_0),
            eve_outcome: r.eve_outcome,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardReason {
    /// Operation and basis do not pair into a key or test bit.
    Mismatched,
    /// SWAP-x round in which Alice detected a photon and Bob did not.
    AliceDetected,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestResult {
    Pass,
    Error,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ForbiddenKind {
    BothDetect,
    SwapAllClick,
}

/// Public classification of a round after sifting.
///
/// A SWAP-x round with the correct single-mode click is a [`SiftOutcome::KeyBit`];
/// such bits double as the passing population of the SWAP error test, so
/// `SwapTest` is only produced for errors.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SiftOutcome {
    Discard(DiscardReason),
    KeyBit(u8),
    CtrlTest(TestResult),
    SwapTest(TestResult),
    /// SWAP-ALL round with no Bob detection, the expected outcome.
    SwapAllClear,
    Forbidden(ForbiddenKind),
    Loss,
}

pub fn sift_round(record: &RoundRecord, variant: Variant) -> Result<SiftOutcome> {
    use SiftOutcome::*;

    if !variant.admits(record.op) {
        return Err(Error::InadmissibleOp(record.op.name()));
    }
    let alice_click = record.alice_clicks.any();
    let bob_click = record.bob_clicks.any();

    if record.op == AliceOp::SwapAll {
        return Ok(if bob_click {
            Forbidden(ForbiddenKind::SwapAllClick)
        } else {
            SwapAllClear
        });
    }
    if alice_click && bob_click {
        return Ok(Forbidden(ForbiddenKind::BothDetect));
    }

    let outcome = match (record.op, record.bob_basis) {
        (AliceOp::Ctrl, MeasurementBasis::Computational) => Discard(DiscardReason::Mismatched),
        (AliceOp::Ctrl, MeasurementBasis::Hadamard) => {
            if !bob_click {
                Loss
            } else if record.bob_clicks.minus() {
                CtrlTest(TestResult::Error)
            } else {
                CtrlTest(TestResult::Pass)
            }
        }
        (_, MeasurementBasis::Hadamard) => Discard(DiscardReason::Mismatched),
        (op, MeasurementBasis::Computational) => {
            let bit = op.key_bit().expect("SWAP-ALL handled above");
            if alice_click {
                Discard(DiscardReason::AliceDetected)
            } else if !bob_click {
                Loss
            } else {
                let (right, wrong) = match bit {
                    0 => (record.bob_clicks.zero, record.bob_clicks.one),
                    _ => (record.bob_clicks.one, record.bob_clicks.zero),
                };
                if right && !wrong {
                    KeyBit(bit)
                } else {
                    SwapTest(TestResult::Error)
                }
            }
        }
    };
    Ok(outcome)
}

/// Weighted tallies of the populations the rates are conditioned on.
/// `T` is `u64` for sampled rounds and `f64` for exact probabilities.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize)]
pub struct Populations<T> {
    pub total: T,
    pub ctrl_rounds: T,
    pub ctrl_lost: T,
    pub ctrl_tests: T,
    pub ctrl_errors: T,
    /// SWAP-x rounds in which Alice detected nothing.
    pub swap_quiet: T,
    pub swap_lost: T,
    pub swap_tests: T,
    pub swap_errors: T,
    pub key_bits: T,
    pub key_bits_probed: T,
    pub key_bits_eve_correct: T,
    pub forbidden: T,
    pub swap_all_rounds: T,
    pub swap_all_bob_click: T,
}

impl<T: Copy + AddAssign> Populations<T> {
    pub fn add(&mut self, record: &RoundRecord, outcome: SiftOutcome, weight: T) {
        let bob_click = record.bob_clicks.any();
        self.total += weight;
        match record.op {
            AliceOp::Ctrl => {
                self.ctrl_rounds += weight;
                if !bob_click {
                    self.ctrl_lost += weight;
                }
            }
            AliceOp::SwapAll => {
                self.swap_all_rounds += weight;
                if bob_click {
                    self.swap_all_bob_click += weight;
                }
            }
            _ => {
                if !record.alice_clicks.any() {
                    self.swap_quiet += weight;
                    if !bob_click {
                        self.swap_lost += weight;
                    }
                }
            }
        }
        match outcome {
            SiftOutcome::CtrlTest(result) => {
                self.ctrl_tests += weight;
                if result == TestResult::Error {
                    self.ctrl_errors += weight;
                }
            }
            SiftOutcome::SwapTest(result) => {
                self.swap_tests += weight;
                if result == TestResult::Error {
                    self.swap_errors += weight;
                }
            }
            SiftOutcome::KeyBit(bit) => {
                self.key_bits += weight;
                self.swap_tests += weight;
                if let Some(level) = record.eve_outcome {
                    self.key_bits_probed += weight;
                    if level == bit {
                        self.key_bits_eve_correct += weight;
                    }
                }
            }
            SiftOutcome::Forbidden(_) => self.forbidden += weight,
            _ => {}
        }
    }
}

/// A conditional rate. `value` is `None` when the conditioning population
/// is empty.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Rate {
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub successes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_high: Option<f64>,
}

impl Rate {
    pub fn exact(numerator: f64, denominator: f64) -> Self {
        let value = (denominator > 0.0).then(|| (numerator / denominator).clamp(0.0, 1.0));
        Rate {
            value,
            successes: None,
            trials: None,
            ci_low: None,
            ci_high: None,
        }
    }

    pub fn sampled(successes: u64, trials: u64, level: f64) -> Self {
        let value = (trials > 0).then(|| successes as f64 / trials as f64);
        let interval = wilson_interval(successes, trials, level);
        Rate {
            value,
            successes: Some(successes),
            trials: Some(trials),
            ci_low: interval.map(|i| i.0),
            ci_high: interval.map(|i| i.1),
        }
    }

    pub fn get(&self) -> Option<f64> {
        self.value
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub error_rate_swap: Rate,
    pub error_rate_ctrl: Rate,
    pub loss_rate_ctrl: Rate,
    pub loss_rate_swap: Rate,
    pub key_rate: Rate,
    pub eve_info_probability: Rate,
    pub forbidden_event_rate: Rate,
    pub swap_all_click_rate: Rate,
}

impl RateReport {
    pub fn from_probabilities(p: &Populations<f64>) -> Self {
        RateReport {
            error_rate_swap: Rate::exact(p.swap_errors, p.swap_tests),
            error_rate_ctrl: Rate::exact(p.ctrl_errors, p.ctrl_tests),
            loss_rate_ctrl: Rate::exact(p.ctrl_lost, p.ctrl_rounds),
            loss_rate_swap: Rate::exact(p.swap_lost, p.swap_quiet),
            key_rate: Rate::exact(p.key_bits, p.total),
            eve_info_probability: Rate::exact(p.key_bits_eve_correct, p.key_bits_probed),
            forbidden_event_rate: Rate::exact(p.forbidden, p.total),
            swap_all_click_rate: Rate::exact(p.swap_all_bob_click, p.swap_all_rounds),
        }
    }

    pub fn from_counts(c: &Populations<u64>, level: f64) -> Self {
        RateReport {
            error_rate_swap: Rate::sampled(c.swap_errors, c.swap_tests, level),
            error_rate_ctrl: Rate::sampled(c.ctrl_errors, c.ctrl_tests, level),
            loss_rate_ctrl: Rate::sampled(c.ctrl_lost, c.ctrl_rounds, level),
            loss_rate_swap: Rate::sampled(c.swap_lost, c.swap_quiet, level),
            key_rate: Rate::sampled(c.key_bits, c.total, level),
            eve_info_probability: Rate::sampled(c.key_bits_eve_correct, c.key_bits_probed, level),
            forbidden_event_rate: Rate::sampled(c.forbidden, c.total, level),
            swap_all_click_rate: Rate::sampled(c.swap_all_bob_click, c.swap_all_rounds, level),
        }
    }
}

/// Sifts and tallies a list of sampled rounds.
pub fn aggregate_rates(records: &[RoundRecord], variant: Variant) -> Result<RateReport> {
    if records.is_empty() {
        return Err(Error::DegeneratePopulation("no rounds to aggregate"));
    }
    let mut counts = Populations::<u64>::default();
    for record in records {
        counts.add(record, sift_round(record, variant)?, 1);
    }
    Ok(RateReport::from_counts(&counts, DEFAULT_CONFIDENCE))
}
