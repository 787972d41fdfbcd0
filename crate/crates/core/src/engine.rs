//! Scenario execution: exact branch enumeration, seeded Monte Carlo, ε
//! sweeps and the statistical detectability checks.
//!
//! A round is the branch tree
//! prep → stage 1 → Alice op → Alice measurement → stage 2 → Bob basis →
//! Bob measurement → Eve probe measurement.
//! [`exact_distribution`] walks every branch; [`simulate`] samples the same
//! tree one choice point at a time, with conditional probabilities taken from
//! the exact distribution.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adversary::{closed_form_rates, Attack, AttackChoice, ClosedForm, Stage};
use crate::error::{Error, Result};
use crate::fock::{
    measure_enumerate, to_click_pattern, ClickPattern, MeasurementBasis, ModeCounts, StateVector,
    Subsystem, DEFAULT_CAP,
};
use crate::protocol::{
    alice_apply, bob_prepare, sift_round, AliceOp, Populations, ProtocolVariant, Rate, RateReport,
    RecordRow, RoundRecord, Variant, DEFAULT_CONFIDENCE,
};
use crate::stats::two_proportion_z_test;

/// Rounds per work item. Batch boundaries depend only on the round count, so
/// the merged tally is the same for any number of workers.
pub const BATCH_SIZE: u64 = 8192;

pub const DEFAULT_SIGNIFICANCE: f64 = 0.01;

const BASES: [MeasurementBasis; 2] = [MeasurementBasis::Computational, MeasurementBasis::Hadamard];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub protocol: ProtocolVariant,
    pub attack: AttackChoice,
    pub rounds: u64,
    pub master_seed: u64,
    pub cap: u8,
}

impl ScenarioConfig {
    pub fn new(variant: Variant, attack: AttackChoice) -> Self {
        ScenarioConfig {
            protocol: ProtocolVariant::uniform(variant),
            attack,
            rounds: 100_000,
            master_seed: 0,
            cap: DEFAULT_CAP,
        }
    }

    pub fn with_rounds(mut self, rounds: u64) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.attack.validate()?;
        if self.rounds == 0 {
            return Err(Error::Usage("rounds must be positive".into()));
        }
        if self.cap == 0 {
            return Err(Error::Usage("photon cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// One outcome of Alice's measurement, with the state Bob will receive.
#[derive(Clone, Debug)]
pub struct AliceBranch {
    pub op: AliceOp,
    pub alice_counts: ModeCounts,
    pub alice_clicks: ClickPattern,
    /// Probability of this outcome given `op`.
    pub probability: f64,
    /// Full state right after Alice's measurement collapsed her ancilla.
    pub after_alice: StateVector,
    /// Full state after Eve's stage 2 (equal to `after_alice` without attack).
    pub to_bob: StateVector,
}

/// Enumerates Alice's branches for every admissible operation of the variant.
pub fn alice_branches(
    variant: Variant,
    attack: Option<&Attack>,
    cap: u8,
) -> Result<Vec<AliceBranch>> {
    let prepared = bob_prepare(cap);
    let incoming = match attack {
        Some(a) => a.apply_stage(Stage::Intercept, &prepared)?,
        None => prepared,
    };
    let mut out = Vec::new();
    for &op in variant.admissible_ops() {
        let state = alice_apply(op, &incoming);
        for branch in measure_enumerate(&state, Subsystem::Alice, MeasurementBasis::Computational)?
        {
            let counts = branch
                .outcome
                .modes()
                .expect("Alice outcomes are mode counts");
            let to_bob = match attack {
                Some(a) => a.apply_stage(Stage::Return, &branch.post_state)?,
                None => branch.post_state.clone(),
            };
            out.push(AliceBranch {
                op,
                alice_counts: counts,
                alice_clicks: to_click_pattern(counts),
                probability: branch.probability,
                after_alice: branch.post_state,
                to_bob,
            });
        }
    }
    Ok(out)
}

/// Exact probability of every classical round record.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    variant: Variant,
    entries: BTreeMap<RoundRecord, f64>,
}

impl JointDistribution {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RoundRecord, &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, record: &RoundRecord) -> f64 {
        self.entries.get(record).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn probability_where<F>(&self, pred: F) -> f64
    where
        F: Fn(&RoundRecord) -> bool,
    {
        self.entries
            .iter()
            .filter(|(r, _)| pred(r))
            .map(|(_, p)| p)
            .sum()
    }

    /// P(event | given), `None` when `given` has zero probability.
    pub fn conditional<E, G>(&self, event: E, given: G) -> Option<f64>
    where
        E: Fn(&RoundRecord) -> bool,
        G: Fn(&RoundRecord) -> bool,
    {
        let denom = self.probability_where(&given);
        (denom > 0.0).then(|| self.probability_where(|r| given(r) && event(r)) / denom)
    }
}

impl Serialize for JointDistribution {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            #[serde(flatten)]
            record: RecordRow,
            probability: f64,
        }
        #[derive(Serialize)]
        struct Dist {
            variant: Variant,
            entries: Vec<Entry>,
        }
        Dist {
            variant: self.variant,
            entries: self
                .entries
                .iter()
                .map(|(r, p)| Entry {
                    record: (*r).into(),
                    probability: *p,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

pub fn exact_distribution(config: &ScenarioConfig) -> Result<JointDistribution> {
    config.attack.validate()?;
    let attack = config.attack.build(config.cap)?;
    exact_distribution_for(&config.protocol, attack.as_ref(), config.cap)
}

pub fn exact_distribution_for(
    protocol: &ProtocolVariant,
    attack: Option<&Attack>,
    cap: u8,
) -> Result<JointDistribution> {
    if let Some(a) = attack {
        if a.cap() != cap {
            return Err(Error::CapMismatch(a.cap(), cap));
        }
    }
    let mut entries: BTreeMap<RoundRecord, f64> = BTreeMap::new();
    for branch in alice_branches(protocol.variant, attack, cap)? {
        let op_weight = protocol.op_probability(branch.op) * branch.probability;
        if op_weight == 0.0 {
            continue;
        }
        for basis in BASES {
            let basis_weight = protocol.basis_probability(basis);
            if basis_weight == 0.0 {
                continue;
            }
            for bob in measure_enumerate(&branch.to_bob, Subsystem::Bob, basis)? {
                let bob_clicks =
                    to_click_pattern(bob.outcome.modes().expect("Bob outcomes are mode counts"));
                let eve: Vec<(Option<u8>, f64)> = if attack.is_some() {
                    measure_enumerate(
                        &bob.post_state,
                        Subsystem::Eve,
                        MeasurementBasis::Computational,
                    )?
                    .into_iter()
                    .map(|b| (b.outcome.probe(), b.probability))
                    .collect()
                } else {
                    vec![(None, 1.0)]
                };
                for (eve_outcome, eve_p) in eve {
                    let record = RoundRecord {
                        op: branch.op,
                        alice_clicks: branch.alice_clicks,
                        bob_basis: basis,
                        bob_clicks,
                        eve_outcome,
                    };
                    *entries.entry(record).or_insert(0.0) +=
                        op_weight * basis_weight * bob.probability * eve_p;
                }
            }
        }
    }
    Ok(JointDistribution {
        variant: protocol.variant,
        entries,
    })
}

pub fn exact_populations(dist: &JointDistribution) -> Result<Populations<f64>> {
    let mut pop = Populations::<f64>::default();
    for (record, p) in dist.iter() {
        pop.add(record, sift_round(record, dist.variant)?, *p);
    }
    Ok(pop)
}

/// Conditional rates computed from exact probabilities (no intervals).
pub fn derive_rates(dist: &JointDistribution) -> Result<RateReport> {
    Ok(RateReport::from_probabilities(&exact_populations(dist)?))
}

/// `(p, R_CTRL, R_SWAPx)` read off an exact distribution.
pub fn engine_rates(dist: &JointDistribution) -> Result<ClosedForm> {
    let report = derive_rates(dist)?;
    let need = |r: Rate, what: &'static str| r.get().ok_or(Error::DegeneratePopulation(what));
    Ok(ClosedForm {
        p: need(
            report.eve_info_probability,
            "key rounds with a probe outcome",
        )?,
        r_ctrl: need(report.loss_rate_ctrl, "CTRL rounds")?,
        r_swap: need(
            report.loss_rate_swap,
            "SWAP-x rounds without Alice detection",
        )?,
    })
}

enum Child {
    Node(ChoiceNode),
    Leaf(usize),
}

/// One discrete choice point: children with cumulative conditional
/// probabilities.
struct ChoiceNode {
    cumulative: Vec<f64>,
    children: Vec<Child>,
}

/// Samples round records by walking op → Alice clicks → basis → Bob clicks →
/// Eve outcome, one uniform draw per level.
pub struct RoundSampler {
    root: ChoiceNode,
    leaves: Vec<RoundRecord>,
}

fn level_key(record: &RoundRecord, depth: usize) -> (u8, u8) {
    let clicks = |c: ClickPattern| (c.one as u8) << 1 | c.zero as u8;
    match depth {
        0 => (record.op as u8, 0),
        1 => (clicks(record.alice_clicks), 0),
        2 => (record.bob_basis as u8, 0),
        3 => (clicks(record.bob_clicks), 0),
        _ => (
            record.eve_outcome.is_some() as u8,
            record.eve_outcome.unwrap_or(0),
        ),
    }
}

const DEPTH: usize = 5;

impl RoundSampler {
    pub fn new(dist: &JointDistribution) -> Result<Self> {
        let leaves: Vec<RoundRecord> = dist.entries.keys().copied().collect();
        let weighted: Vec<(usize, f64)> = dist.entries.values().copied().enumerate().collect();
        if weighted.is_empty() {
            return Err(Error::EmptyState);
        }
        let root = Self::build(&leaves, &weighted, 0);
        Ok(RoundSampler { root, leaves })
    }

    fn build(leaves: &[RoundRecord], entries: &[(usize, f64)], depth: usize) -> ChoiceNode {
        let mut groups: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
        let mut last_key = None;
        for &(idx, p) in entries {
            let key = level_key(&leaves[idx], depth);
            if last_key != Some(key) {
                groups.push((0.0, Vec::new()));
                last_key = Some(key);
            }
            let g = groups.last_mut().expect("pushed above");
            g.0 += p;
            g.1.push((idx, p));
        }
        let total: f64 = groups.iter().map(|g| g.0).sum();
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(groups.len());
        let mut children = Vec::with_capacity(groups.len());
        for (weight, members) in groups {
            acc += weight / total;
            cumulative.push(acc);
            children.push(if depth + 1 == DEPTH {
                Child::Leaf(members[0].0)
            } else {
                Child::Node(Self::build(leaves, &members, depth + 1))
            });
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        ChoiceNode {
            cumulative,
            children,
        }
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.leaves
    }

    /// Index into [`Self::records`] of one sampled round.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let mut node = &self.root;
        loop {
            let u: f64 = rng.random();
            let k = node
                .cumulative
                .partition_point(|&c| c <= u)
                .min(node.children.len() - 1);
            match &node.children[k] {
                Child::Node(next) => node = next,
                Child::Leaf(idx) => return *idx,
            }
        }
    }

    /// Tallies rounds `[start, end)`. Round `i` draws from the ChaCha stream
    /// `i` keyed by `master_seed`.
    pub fn run_rounds(&self, master_seed: u64, start: u64, end: u64) -> Vec<u64> {
        let base = ChaCha8Rng::seed_from_u64(master_seed);
        let mut counts = vec![0u64; self.leaves.len()];
        for round in start..end {
            let mut rng = base.clone();
            rng.set_stream(round);
            counts[self.sample(&mut rng)] += 1;
        }
        counts
    }
}

/// Integer outcome counts of a Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tally {
    pub rounds: u64,
    counts: BTreeMap<RoundRecord, u64>,
}

impl Tally {
    pub fn from_counts(counts: BTreeMap<RoundRecord, u64>) -> Self {
        Tally {
            rounds: counts.values().sum(),
            counts,
        }
    }

    pub fn get(&self, record: &RoundRecord) -> u64 {
        self.counts.get(record).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RoundRecord, &u64)> {
        self.counts.iter()
    }

    pub fn count_where<F>(&self, pred: F) -> u64
    where
        F: Fn(&RoundRecord) -> bool,
    {
        self.counts
            .iter()
            .filter(|(r, _)| pred(r))
            .map(|(_, c)| c)
            .sum()
    }

    pub fn populations(&self, variant: Variant) -> Result<Populations<u64>> {
        let mut pop = Populations::<u64>::default();
        for (record, n) in &self.counts {
            pop.add(record, sift_round(record, variant)?, *n);
        }
        Ok(pop)
    }
}

impl Serialize for Tally {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            #[serde(flatten)]
            record: RecordRow,
            count: u64,
        }
        #[derive(Serialize)]
        struct Out {
            rounds: u64,
            entries: Vec<Entry>,
        }
        Out {
            rounds: self.rounds,
            entries: self
                .counts
                .iter()
                .map(|(r, c)| Entry {
                    record: (*r).into(),
                    count: *c,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

/// How [`simulate_with`] spreads batches over threads.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel {
        workers: usize,
    },
}

impl Execution {
    /// `workers` threads when the `parallel` feature is enabled, otherwise
    /// sequential.
    pub fn with_workers(workers: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            if workers > 1 {
                return Execution::Parallel { workers };
            }
        }
        let _ = workers;
        Execution::Sequential
    }
}

impl Default for Execution {
    fn default() -> Self {
        let workers = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1);
        Execution::with_workers(workers)
    }
}

fn merge(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

fn batch_bounds(rounds: u64, batch: u64) -> (u64, u64) {
    let start = batch * BATCH_SIZE;
    (start, (start + BATCH_SIZE).min(rounds))
}

fn run_sequential(sampler: &RoundSampler, seed: u64, rounds: u64) -> Vec<u64> {
    let batches = rounds.div_ceil(BATCH_SIZE);
    (0..batches)
        .map(|b| {
            let (start, end) = batch_bounds(rounds, b);
            sampler.run_rounds(seed, start, end)
        })
        .fold(vec![0; sampler.leaves.len()], merge)
}

#[cfg(feature = "parallel")]
fn run_parallel(
    sampler: &RoundSampler,
    seed: u64,
    rounds: u64,
    workers: usize,
) -> Result<Vec<u64>> {
    use rayon::prelude::*;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    let batches = rounds.div_ceil(BATCH_SIZE);
    let n = sampler.leaves.len();
    Ok(pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let (start, end) = batch_bounds(rounds, b);
                sampler.run_rounds(seed, start, end)
            })
            .reduce(|| vec![0; n], merge)
    }))
}

/// Samples `config.rounds` rounds. The tally depends only on the config and
/// seed, never on `execution`.
pub fn simulate_with(config: &ScenarioConfig, execution: Execution) -> Result<(Tally, RateReport)> {
    config.validate()?;
    let dist = exact_distribution(config)?;
    let sampler = RoundSampler::new(&dist)?;
    let counts = match execution {
        Execution::Sequential => run_sequential(&sampler, config.master_seed, config.rounds),
        #[cfg(feature = "parallel")]
        Execution::Parallel { workers } => {
            run_parallel(&sampler, config.master_seed, config.rounds, workers)?
        }
    };
    let tally = Tally::from_counts(sampler.leaves.iter().copied().zip(counts).collect());
    let report = RateReport::from_counts(
        &tally.populations(config.protocol.variant)?,
        DEFAULT_CONFIDENCE,
    );
    Ok((tally, report))
}

pub fn simulate(config: &ScenarioConfig) -> Result<(Tally, RateReport)> {
    simulate_with(config, Execution::default())
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub closed_form: ClosedForm,
    pub engine: ClosedForm,
}

fn sweep_row(epsilon: f64, cap: u8) -> Result<SweepRow> {
    let closed_form = closed_form_rates(epsilon)?;
    let config = ScenarioConfig {
        cap,
        ..ScenarioConfig::new(Variant::Simplified, AttackChoice::Weaker(epsilon))
    };
    let engine = engine_rates(&exact_distribution(&config)?)?;
    Ok(SweepRow {
        epsilon,
        closed_form,
        engine,
    })
}

/// Weaker-attack rates over a grid of ε, from the closed forms and from
/// exact enumeration of the simplified protocol, in grid order.
pub fn sweep_epsilon(grid: &[f64], cap: u8) -> Result<Vec<SweepRow>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.par_iter().map(|&e| sweep_row(e, cap)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().map(|&e| sweep_row(e, cap)).collect()
    }
}

/// Rounds a value for comparison against two-decimal published figures.
/// Exact ties (e.g. 0.725) round up; the offset absorbs the binary
/// representation error that would otherwise push them down.
pub fn round_2dp(x: f64) -> f64 {
    ((x * 100.0) + 1e-9).round() / 100.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionReport {
    pub loss_rate_ctrl: Rate,
    pub loss_rate_swap: Rate,
    pub z: f64,
    pub p_value: f64,
    pub significance: f64,
    pub detected: bool,
}

/// Two-proportion z-test of the CTRL loss rate against the SWAP-x loss
/// rate. The attack is flagged when the two-sided p-value is below
/// `significance`.
pub fn detection_test(
    tally: &Tally,
    variant: Variant,
    significance: f64,
) -> Result<DetectionReport> {
    let pop = tally.populations(variant)?;
    if pop.ctrl_rounds == 0 {
        return Err(Error::DegeneratePopulation("no CTRL rounds"));
    }
    if pop.swap_quiet == 0 {
        return Err(Error::DegeneratePopulation(
            "no SWAP-x rounds without Alice detection",
        ));
    }
    let test = two_proportion_z_test(
        pop.ctrl_lost,
        pop.ctrl_rounds,
        pop.swap_lost,
        pop.swap_quiet,
    )
    .expect("populations checked nonempty");
    Ok(DetectionReport {
        loss_rate_ctrl: Rate::sampled(pop.ctrl_lost, pop.ctrl_rounds, DEFAULT_CONFIDENCE),
        loss_rate_swap: Rate::sampled(pop.swap_lost, pop.swap_quiet, DEFAULT_CONFIDENCE),
        z: test.z,
        p_value: test.p_value,
        significance,
        detected: test.p_value < significance,
    })
}

/// Exact probability that Bob detects a photon in a SWAP-ALL round of the
/// Mirror protocol, an event that never happens without an attack.
pub fn mirror_detectability(attack: Option<&Attack>) -> Result<f64> {
    let cap = attack.map(Attack::cap).unwrap_or(DEFAULT_CAP);
    let dist = exact_distribution_for(&ProtocolVariant::uniform(Variant::Mirror), attack, cap)?;
    dist.conditional(|r| r.bob_clicks.any(), |r| r.op == AliceOp::SwapAll)
        .ok_or(Error::DegeneratePopulation("no SWAP-ALL rounds"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{build_full_attack, build_weaker_attack, epsilon_star};
    use approx::assert_abs_diff_eq;

    fn simplified(attack: AttackChoice) -> ScenarioConfig {
        ScenarioConfig::new(Variant::Simplified, attack)
    }

    #[test]
    fn distributions_are_normalized() {
        for variant in [Variant::Mirror, Variant::Simplified] {
            for attack in [
                AttackChoice::None,
                AttackChoice::Full,
                AttackChoice::Weaker(0.37),
            ] {
                let dist = exact_distribution(&ScenarioConfig::new(variant, attack)).unwrap();
                assert_abs_diff_eq!(dist.total(), 1.0, epsilon = 1e-12);
                assert!(dist.iter().all(|(_, p)| *p > 0.0));
            }
        }
    }

    #[test]
    fn no_attack_simplified() {
        let dist = exact_distribution(&simplified(AttackChoice::None)).unwrap();
        let pop = exact_populations(&dist).unwrap();
        assert_eq!(pop.ctrl_errors + pop.swap_errors + pop.forbidden, 0.0);
        let alice_click = dist
            .conditional(|r| r.alice_clicks.any(), |r| r.op == AliceOp::Swap10)
            .unwrap();
        assert_abs_diff_eq!(alice_click, 0.5, epsilon = 1e-12);
        let report = derive_rates(&dist).unwrap();
        // 2/3 SWAP op × 1/2 Alice quiet × 1/2 computational basis.
        assert_abs_diff_eq!(report.key_rate.value.unwrap(), 1.0 / 6.0, epsilon = 1e-12);
        assert_eq!(report.eve_info_probability.value, None);
    }

    #[test]
    fn full_attack_simplified() {
        let dist = exact_distribution(&simplified(AttackChoice::Full)).unwrap();
        let bob_click_ctrl = dist
            .conditional(|r| r.bob_clicks.any(), |r| r.op == AliceOp::Ctrl)
            .unwrap();
        assert_eq!(bob_click_ctrl, 0.0);
        let report = derive_rates(&dist).unwrap();
        assert_abs_diff_eq!(
            report.eve_info_probability.value.unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn engine_matches_table_values() {
        let rates =
            engine_rates(&exact_distribution(&simplified(AttackChoice::Weaker(0.8))).unwrap())
                .unwrap();
        assert_eq!(round_2dp(rates.r_ctrl), 0.57);
        assert_eq!(round_2dp(rates.r_swap), 0.58);
        assert_eq!(round_2dp(rates.p), 0.25);

        let rates = engine_rates(
            &exact_distribution(&simplified(AttackChoice::Weaker(epsilon_star()))).unwrap(),
        )
        .unwrap();
        assert!((rates.r_ctrl - rates.r_swap).abs() < 1e-9);
    }

    #[test]
    fn rounding_breaks_ties_upward() {
        assert_eq!(round_2dp(1.0 - 0.275), 0.73);
        assert_eq!(round_2dp(0.8333333), 0.83);
        assert_eq!(round_2dp(0.5), 0.5);
        assert_eq!(round_2dp(0.0), 0.0);
    }

    #[test]
    fn sampler_reproduces_seed() {
        let config = simplified(AttackChoice::Weaker(0.5))
            .with_rounds(20_000)
            .with_seed(7);
        let (a, _) = simulate_with(&config, Execution::Sequential).unwrap();
        let (b, _) = simulate_with(&config, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rounds, 20_000);
        let (c, _) = simulate_with(&config.clone().with_seed(8), Execution::Sequential).unwrap();
        assert_ne!(a, c);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn worker_count_does_not_change_tally() {
        let config = simplified(AttackChoice::Full)
            .with_rounds(50_001)
            .with_seed(3);
        let (seq, _) = simulate_with(&config, Execution::Sequential).unwrap();
        for workers in [2, 3, 8] {
            let (par, _) = simulate_with(&config, Execution::Parallel { workers }).unwrap();
            assert_eq!(seq, par, "workers = {workers}");
        }
    }

    #[test]
    fn sampler_frequencies_follow_distribution() {
        let config = simplified(AttackChoice::Weaker(0.25))
            .with_rounds(100_000)
            .with_seed(11);
        let dist = exact_distribution(&config).unwrap();
        let (tally, _) = simulate_with(&config, Execution::Sequential).unwrap();
        let n = tally.rounds as f64;
        for (record, p) in dist.iter() {
            let sigma = (p * (1.0 - p) / n).sqrt();
            let observed = tally.get(record) as f64 / n;
            assert!(
                (observed - p).abs() <= 4.0 * sigma + 1e-12,
                "{record:?}: {observed} vs {p}"
            );
        }
    }

    #[test]
    fn detection_on_equal_zero_rates() {
        let config = simplified(AttackChoice::None).with_rounds(10_000);
        let (tally, _) = simulate_with(&config, Execution::Sequential).unwrap();
        let report = detection_test(&tally, Variant::Simplified, DEFAULT_SIGNIFICANCE).unwrap();
        assert!(!report.detected);
        assert_eq!(report.p_value, 1.0);
    }

    #[test]
    fn detection_requires_populations() {
        let only_ctrl =
            ProtocolVariant::new(Variant::Simplified, &[(AliceOp::Ctrl, 1.0)], 0.5).unwrap();
        let config = ScenarioConfig {
            protocol: only_ctrl,
            ..simplified(AttackChoice::Full).with_rounds(1000)
        };
        let (tally, _) = simulate_with(&config, Execution::Sequential).unwrap();
        assert!(matches!(
            detection_test(&tally, Variant::Simplified, 0.01),
            Err(Error::DegeneratePopulation(_))
        ));
    }

    #[test]
    fn mirror_detectability_values() {
        assert_eq!(mirror_detectability(None).unwrap(), 0.0);
        assert_abs_diff_eq!(
            mirror_detectability(Some(&build_full_attack(2))).unwrap(),
            2.0 / 9.0,
            epsilon = 1e-12
        );
        let e0 = epsilon_star();
        let k2 = (3.0 - 3f64.sqrt()) / 6.0;
        assert_abs_diff_eq!(
            mirror_detectability(Some(&build_weaker_attack(e0, 2).unwrap())).unwrap(),
            2.0 * k2 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn sweep_keeps_grid_order() {
        let grid = [0.9, 0.0, 0.5];
        let rows = sweep_epsilon(&grid, 2).unwrap();
        assert_eq!(rows.iter().map(|r| r.epsilon).collect::<Vec<_>>(), grid);
        assert_eq!(round_2dp(rows[0].engine.p), 0.15);
        assert_eq!(round_2dp(rows[0].engine.r_ctrl), 0.46);
        assert_eq!(round_2dp(rows[0].engine.r_swap), 0.53);
        assert!(sweep_epsilon(&[1.5], 2).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(simplified(AttackChoice::Weaker(1.2)).validate().is_err());
        assert!(simplified(AttackChoice::None)
            .with_rounds(0)
            .validate()
            .is_err());
    }
}
