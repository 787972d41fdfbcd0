//! Plain-text scenario files.
//!
//! One `key = value` pair per line; blank lines and `#` comments are
//! ignored. Recognized keys:
//!
//! ```text
//! variant              = mirror | simplified          (default simplified)
//! attack               = none | full | weaker         (default none)
//! epsilon              = <real in [0,1]>              (weaker only, required)
//! rounds               = <positive integer>           (default 100000)
//! seed                 = <u64>                        (default 0)
//! cap                  = <photon cap >= 1>            (default 2)
//! hadamard_probability = <real in [0,1]>              (default 0.5)
//! op_probabilities     = <comma list, CTRL,SWAP-10,SWAP-01[,SWAP-ALL]>
//! ```
//!
//! Values given on the command line override the file.

use std::path::Path;
use std::str::FromStr;

use crate::adversary::AttackChoice;
use crate::engine::ScenarioConfig;
use crate::error::{Error, Result};
use crate::fock::DEFAULT_CAP;
use crate::protocol::{ProtocolVariant, Variant};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AttackKind {
    None,
    Full,
    Weaker,
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(AttackKind::None),
            "full" => Ok(AttackKind::Full),
            "weaker" => Ok(AttackKind::Weaker),
            _ => Err(Error::Usage(format!(
                "unknown attack `{s}` (expected none|full|weaker)"
            ))),
        }
    }
}

/// A value with the config-file line it came from (`None` for flags).
#[derive(Clone, Debug, PartialEq)]
pub struct Sourced<T> {
    pub value: T,
    pub line: Option<usize>,
}

impl<T> Sourced<T> {
    pub fn flag(value: T) -> Self {
        Sourced { value, line: None }
    }
}

fn invalid(key: &str, line: Option<usize>, message: impl Into<String>) -> Error {
    let message = message.into();
    match line {
        Some(line) => Error::Config {
            line,
            key: key.to_string(),
            message,
        },
        None => Error::Usage(format!("--{}: {message}", key.replace('_', "-"))),
    }
}

/// Scenario settings before defaults and consistency rules are applied.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartialConfig {
    pub variant: Option<Sourced<Variant>>,
    pub attack: Option<Sourced<AttackKind>>,
    pub epsilon: Option<Sourced<f64>>,
    pub rounds: Option<Sourced<u64>>,
    pub seed: Option<Sourced<u64>>,
    pub cap: Option<Sourced<u8>>,
    pub hadamard_probability: Option<Sourced<f64>>,
    pub op_probabilities: Option<Sourced<Vec<f64>>>,
}

fn parse_value<T: FromStr>(key: &str, line: usize, raw: &str) -> Result<T> {
    raw.parse::<T>()
        .map_err(|_| invalid(key, Some(line), format!("cannot parse `{raw}`")))
}

fn at<T>(line: usize, value: T) -> Option<Sourced<T>> {
    Some(Sourced {
        value,
        line: Some(line),
    })
}

impl PartialConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PartialConfig::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(invalid(content, Some(line), "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "variant" => {
                    cfg.variant = at(
                        line,
                        value
                            .parse()
                            .map_err(|e: Error| invalid(key, Some(line), e.to_string()))?,
                    )
                }
                "attack" => {
                    cfg.attack = at(
                        line,
                        value
                            .parse()
                            .map_err(|e: Error| invalid(key, Some(line), e.to_string()))?,
                    )
                }
                "epsilon" => cfg.epsilon = at(line, parse_value(key, line, value)?),
                "rounds" => cfg.rounds = at(line, parse_value(key, line, value)?),
                "seed" => cfg.seed = at(line, parse_value(key, line, value)?),
                "cap" => cfg.cap = at(line, parse_value(key, line, value)?),
                "hadamard_probability" => {
                    cfg.hadamard_probability = at(line, parse_value(key, line, value)?)
                }
                "op_probabilities" => {
                    let values = value
                        .split(',')
                        .map(|v| parse_value::<f64>(key, line, v.trim()))
                        .collect::<Result<Vec<_>>>()?;
                    cfg.op_probabilities = at(line, values);
                }
                other => return Err(invalid(other, Some(line), "unknown key")),
            }
        }
        Ok(cfg)
    }

    /// Fields set in `overrides` replace those in `self`.
    pub fn merged(self, overrides: PartialConfig) -> Self {
        PartialConfig {
            variant: overrides.variant.or(self.variant),
            attack: overrides.attack.or(self.attack),
            epsilon: overrides.epsilon.or(self.epsilon),
            rounds: overrides.rounds.or(self.rounds),
            seed: overrides.seed.or(self.seed),
            cap: overrides.cap.or(self.cap),
            hadamard_probability: overrides.hadamard_probability.or(self.hadamard_probability),
            op_probabilities: overrides.op_probabilities.or(self.op_probabilities),
        }
    }

    /// Applies defaults and validates every invariant.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let variant = self
            .variant
            .as_ref()
            .map(|s| s.value)
            .unwrap_or(Variant::Simplified);
        let attack_kind = self
            .attack
            .as_ref()
            .map(|s| s.value)
            .unwrap_or(AttackKind::None);

        let attack = match (attack_kind, &self.epsilon) {
            (AttackKind::Weaker, Some(eps)) => {
                if !(0.0..=1.0).contains(&eps.value) {
                    return Err(invalid(
                        "epsilon",
                        eps.line,
                        format!("{} outside [0, 1]", eps.value),
                    ));
                }
                AttackChoice::Weaker(eps.value)
            }
            (AttackKind::Weaker, None) => {
                let line = self.attack.as_ref().and_then(|s| s.line);
                return Err(invalid("attack", line, "weaker attack requires epsilon"));
            }
            (_, Some(eps)) => {
                return Err(invalid(
                    "epsilon",
                    eps.line,
                    "epsilon is only meaningful for the weaker attack",
                ));
            }
            (AttackKind::None, None) => AttackChoice::None,
            (AttackKind::Full, None) => AttackChoice::Full,
        };

        let rounds = self
            .rounds
            .as_ref()
            .map(|s| (s.value, s.line))
            .unwrap_or((100_000, None));
        if rounds.0 == 0 {
            return Err(invalid("rounds", rounds.1, "must be positive"));
        }
        let cap = self
            .cap
            .as_ref()
            .map(|s| (s.value, s.line))
            .unwrap_or((DEFAULT_CAP, None));
        if cap.0 == 0 {
            return Err(invalid("cap", cap.1, "must be at least 1"));
        }

        let hadamard = self
            .hadamard_probability
            .as_ref()
            .map(|s| (s.value, s.line))
            .unwrap_or((0.5, None));
        let protocol = match &self.op_probabilities {
            None => ProtocolVariant::new(variant, &uniform_pairs(variant), hadamard.0)
                .map_err(|e| invalid("hadamard_probability", hadamard.1, e.to_string()))?,
            Some(ops) => {
                let admissible = variant.admissible_ops();
                if ops.value.len() != admissible.len() {
                    return Err(invalid(
                        "op_probabilities",
                        ops.line,
                        format!(
                            "expected {} values for the {variant} protocol",
                            admissible.len()
                        ),
                    ));
                }
                let pairs: Vec<_> = admissible
                    .iter()
                    .copied()
                    .zip(ops.value.iter().copied())
                    .collect();
                ProtocolVariant::new(variant, &pairs, hadamard.0)
                    .map_err(|e| invalid("op_probabilities", ops.line, e.to_string()))?
            }
        };

        Ok(ScenarioConfig {
            protocol,
            attack,
            rounds: rounds.0,
            master_seed: self.seed.as_ref().map(|s| s.value).unwrap_or(0),
            cap: cap.0,
        })
    }
}

fn uniform_pairs(variant: Variant) -> Vec<(crate::protocol::AliceOp, f64)> {
    let ops = variant.admissible_ops();
    ops.iter().map(|&op| (op, 1.0 / ops.len() as f64)).collect()
}

pub fn read_partial_config(path: &Path) -> Result<PartialConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    PartialConfig::parse(&text)
}

/// Reads, defaults and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    read_partial_config(path)?.resolve()
}
