//! Experiment configuration: JSON-loadable, with the dummy-fraction relation
//! enforced (and p′ solved when omitted).

use crate::adversary::{AdversaryStrategy, Stage};
use crate::css::{parse_code_text, CssCode};
use crate::error::{Error, Result};
use crate::fkproto::solve_p_prime;
use crate::qsim::PauliLetter;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Gadget,
    Css,
    Fk,
    Compose,
    Verify,
    Blindness,
    Teleport,
    Loss,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeChoice {
    #[default]
    Steane,
    File(String),
}

impl CodeChoice {
    pub fn load(&self) -> Result<CssCode> {
        match self {
            CodeChoice::Steane => Ok(CssCode::steane()),
            CodeChoice::File(path) => parse_code_text(&std::fs::read_to_string(path)?),
        }
    }
}

/// Adversary selection: either a named family or an inline strategy.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AdversarySpec {
    Named(String),
    Inline(AdversaryStrategy),
}

impl Default for AdversarySpec {
    fn default() -> Self {
        AdversarySpec::Named("honest".into())
    }
}

impl AdversarySpec {
    /// Resolve to a concrete strategy. Named families:
    /// `honest`, `single_x`, `single_z`, `single_y`,
    /// `x@3` / `z@0,2` (letters at fixed vertices, post-entangle),
    /// `xz_noise:0.02`, `depolarizing:0.05`.
    pub fn resolve(&self, n_vertices: usize, trial_rng: &mut impl rand::Rng) -> Result<AdversaryStrategy> {
        match self {
            AdversarySpec::Inline(strategy) => Ok(strategy.clone()),
            AdversarySpec::Named(name) => {
                let name = name.trim();
                if name.eq_ignore_ascii_case("honest") {
                    return Ok(AdversaryStrategy::Honest);
                }
                if let Some(rate) = name.strip_prefix("xz_noise:") {
                    return Ok(AdversaryStrategy::IidXZNoise {
                        p: rate.parse().map_err(|e| {
                            Error::InvalidConfig(format!("bad noise rate: {e}"))
                        })?,
                    });
                }
                if let Some(rate) = name.strip_prefix("depolarizing:") {
                    return Ok(AdversaryStrategy::IidDepolarizing {
                        stage: Stage::FkPreEntangle,
                        eps: rate.parse().map_err(|e| {
                            Error::InvalidConfig(format!("bad depolarizing rate: {e}"))
                        })?,
                    });
                }
                if let Some(letter) = name.strip_prefix("single_") {
                    let letter = parse_letter(letter)?;
                    let v = trial_rng.gen_range(0..n_vertices);
                    return Ok(AdversaryStrategy::Pauli {
                        stage: Stage::FkPostEntangle,
                        positions: vec![v],
                        letters: vec![letter],
                    });
                }
                if let Some((letters_part, at)) = name.split_once('@') {
                    let letter = parse_letter(letters_part)?;
                    let positions: Vec<usize> = at
                        .split(',')
                        .map(|tok| {
                            tok.trim().parse::<usize>().map_err(|e| {
                                Error::InvalidConfig(format!("bad vertex {tok:?}: {e}"))
                            })
                        })
                        .collect::<Result<_>>()?;
                    let letters = vec![letter; positions.len()];
                    return Ok(AdversaryStrategy::Pauli {
                        stage: Stage::FkPostEntangle,
                        positions,
                        letters,
                    });
                }
                Err(Error::InvalidConfig(format!("unknown adversary {name:?}")))
            }
        }
    }
}

fn parse_letter(token: &str) -> Result<PauliLetter> {
    PauliLetter::parse(&token.trim().to_ascii_uppercase())
}

/// Full experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_nd")]
    pub n_d: usize,
    #[serde(default = "default_nt")]
    pub n_t: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Solved from (n, n_d, p) when omitted.
    #[serde(default)]
    pub p_prime: Option<f64>,
    #[serde(default)]
    pub code: CodeChoice,
    #[serde(default)]
    pub adversary: AdversarySpec,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Per-transmission physical flip rate for encoded-vs-unencoded runs.
    #[serde(default)]
    pub noise_p: Option<f64>,
    /// Loss probability for the loss experiment.
    #[serde(default)]
    pub p_loss: Option<f64>,
}

fn default_n() -> usize {
    6
}
fn default_nd() -> usize {
    3
}
fn default_nt() -> usize {
    2
}
fn default_p() -> f64 {
    0.25
}
fn default_trials() -> u64 {
    100_000
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validated()
    }

    /// Enforce the dummy-fraction relation, solving p′ when absent. The
    /// relation binds the graph-level experiments; gadget-only runs just
    /// need (p, p′) in range.
    pub fn validated(mut self) -> Result<RunConfig> {
        if self.n == 0 || self.n_d > self.n {
            return Err(Error::InvalidConfig(format!(
                "need 0 < n and n_d ≤ n (n = {}, n_d = {})",
                self.n, self.n_d
            )));
        }
        let graph_level = matches!(
            self.experiment,
            ExperimentKind::Fk | ExperimentKind::Compose | ExperimentKind::Verify
        );
        match self.p_prime {
            None => {
                self.p_prime = Some(solve_p_prime(self.n, self.n_d, self.p)?);
            }
            Some(pp) => {
                if !(0.0..1.0).contains(&pp) || pp == 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "p_prime",
                        value: pp,
                    });
                }
                let relation = 1.0 - 4.0 * self.p * self.p * (1.0 - pp);
                if graph_level && (self.n_d as f64 / self.n as f64 - relation).abs() > 1e-9 {
                    return Err(Error::InvalidConfig(format!(
                        "N_D/N = {} violates 1 − 4p²(1−p′) = {relation}",
                        self.n_d as f64 / self.n as f64
                    )));
                }
            }
        }
        Ok(self)
    }

    pub fn p_prime(&self) -> f64 {
        self.p_prime.expect("validated config carries p_prime")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn solves_p_prime_when_missing() {
        let config = RunConfig::from_json(
            r#"{"experiment":"compose","n":6,"n_d":3,"p":0.45,"trials":10,"seed":1}"#,
        )
        .unwrap();
        let pp = config.p_prime();
        let relation = 1.0 - 4.0 * 0.45 * 0.45 * (1.0 - pp);
        assert!((relation - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_violated_relation() {
        let bad = RunConfig::from_json(
            r#"{"experiment":"compose","n":6,"n_d":3,"p":0.25,"p_prime":0.5,"trials":10,"seed":1}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn named_adversaries_resolve() {
        let mut rng = RandomStream::from_seed(1);
        for name in ["honest", "single_x", "single_z", "z@0,2", "xz_noise:0.02"] {
            let spec = AdversarySpec::Named(name.into());
            spec.resolve(6, &mut rng).unwrap();
        }
        assert!(AdversarySpec::Named("nope".into()).resolve(6, &mut rng).is_err());
    }
}
