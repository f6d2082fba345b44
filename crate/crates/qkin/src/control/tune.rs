//! Deterministic constant-gain search.
//!
//! Candidates come from an explicit grid or a seeded random draw; the caller
//! supplies the loss. Candidates whose loss lands within `tie_tol` of the
//! best are considered tied and the tie breaks to the lowest `κP`, then `κD`,
//! then `κA` — prefer the least aggressive controller among equals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One constant-gain candidate (shared across joints).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub kappa_p: f64,
    pub kappa_d: f64,
    pub kappa_a: f64,
}

/// Candidate enumeration strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SearchSpec {
    Grid {
        kappa_p: Vec<f64>,
        kappa_d: Vec<f64>,
        kappa_a: Vec<f64>,
    },
    Random {
        samples: usize,
        seed: u64,
        max_kappa_p: f64,
        max_kappa_d: f64,
        max_kappa_a: f64,
    },
}

impl SearchSpec {
    pub fn candidates(&self) -> Vec<Candidate> {
        match self {
            SearchSpec::Grid {
                kappa_p,
                kappa_d,
                kappa_a,
            } => {
                let mut out = Vec::new();
                for &p in kappa_p {
                    for &d in kappa_d {
                        for &a in kappa_a {
                            out.push(Candidate {
                                kappa_p: p,
                                kappa_d: d,
                                kappa_a: a,
                            });
                        }
                    }
                }
                out
            }
            SearchSpec::Random {
                samples,
                seed,
                max_kappa_p,
                max_kappa_d,
                max_kappa_a,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*samples)
                    .map(|_| Candidate {
                        kappa_p: rng.random_range(0.0..*max_kappa_p),
                        kappa_d: rng.random_range(0.0..*max_kappa_d),
                        kappa_a: rng.random_range(0.0..*max_kappa_a),
                    })
                    .collect()
            }
        }
    }
}

/// Evaluate every candidate and return the winner with its loss.
///
/// Non-finite losses disqualify a candidate (a diverged run is not a
/// minimum). Errors from the evaluator propagate.
pub fn search_minimum(
    spec: &SearchSpec,
    tie_tol: f64,
    mut eval: impl FnMut(&Candidate) -> Result<f64>,
) -> Result<(Candidate, f64)> {
    let candidates = spec.candidates();
    if candidates.is_empty() {
        return Err(Error::Config("gain search has no candidates".into()));
    }
    let mut scored = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let loss = eval(c)?;
        if loss.is_finite() {
            scored.push((*c, loss));
        }
    }
    if scored.is_empty() {
        return Err(Error::Config(
            "every gain candidate produced a non-finite loss".into(),
        ));
    }
    let best_loss = scored.iter().map(|(_, l)| *l).fold(f64::INFINITY, f64::min);
    let winner = scored
        .iter()
        .filter(|(_, l)| *l <= best_loss + tie_tol)
        .min_by(|(a, _), (b, _)| {
            (a.kappa_p, a.kappa_d, a.kappa_a)
                .partial_cmp(&(b.kappa_p, b.kappa_d, b.kappa_a))
                .expect("finite gains")
        })
        .expect("non-empty tie set");
    Ok(*winner)
}
