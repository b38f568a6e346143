//! Classical information measures: Hartley, Shannon and Rényi entropies,
//! the multiplicative α*-entropy, Daróczy entropies, and the Kolmogorov–Nagumo
//! gain and loss of information under a Bayesian update.
//!
//! Conventions used throughout: `0·log(1/0) = 0` and `0^α = 0` for every
//! exponent, so zero-probability outcomes never contribute to a sum.

use crate::rng::SeededRng;
use thiserror::Error;

/// Sum-to-one tolerance for complete distributions.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("probability distribution is empty")]
    Empty,
    #[error("probability p[{index}] = {value} is negative or not finite")]
    InvalidEntry { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1 within {SUM_TOLERANCE:e}")]
    BadSum { sum: f64 },
    #[error("logarithm base must be finite and > 1, got {0}")]
    InvalidBase(f64),
    #[error("Hartley information needs at least one outcome")]
    NoOutcomes,
    #[error("alpha = 1 is the Shannon limit; call the Shannon formula instead")]
    UseShannon,
    #[error("alpha = {0} is outside the admissible range")]
    AlphaOutOfRange(f64),
    #[error("prior has {prior} outcomes but posterior has {posterior}")]
    LengthMismatch { prior: usize, posterior: usize },
    #[error("posterior p[{index}] > 0 where the prior vanishes")]
    SupportMismatch { index: usize },
    #[error("gain diverges: posterior vanishes at p[{index}] while alpha < 1")]
    DivergentGain { index: usize },
    #[error("scan needs at least one trial")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, InfoError>;

/// Finite probability distribution `{p_1, ..., p_n}`, stored exactly as given.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    probs: Vec<f64>,
}

impl ProbDist {
    /// Complete distribution: entries non-negative and summing to one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let dist = Self::incomplete(probs)?;
        let sum = dist.total();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(InfoError::BadSum { sum });
        }
        Ok(dist)
    }

    /// Incomplete distribution: entries non-negative, total at most one.
    pub fn incomplete(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(InfoError::Empty);
        }
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(InfoError::InvalidEntry { index, value });
        }
        let sum: f64 = probs.iter().sum();
        if sum > 1.0 + SUM_TOLERANCE {
            return Err(InfoError::BadSum { sum });
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(InfoError::Empty);
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    /// Random point on the flat simplex.
    pub fn random(n: usize, rng: &mut SeededRng) -> Result<Self> {
        if n == 0 {
            return Err(InfoError::Empty);
        }
        Ok(Self {
            probs: rng.simplex(n),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `Σ_k p_k^α` over the support.
    fn power_sum(&self, alpha: f64) -> f64 {
        self.probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p.powf(alpha))
            .sum()
    }
}

/// Unit of information `a > 1` (2 for bits, e for nats).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBase(f64);

impl LogBase {
    pub const BITS: LogBase = LogBase(2.0);
    pub const NATS: LogBase = LogBase(std::f64::consts::E);

    pub fn new(a: f64) -> Result<Self> {
        if !a.is_finite() || a <= 1.0 {
            return Err(InfoError::InvalidBase(a));
        }
        Ok(Self(a))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn log(self, x: f64) -> f64 {
        x.ln() / self.0.ln()
    }
}

/// Replacement of a prior `{p_k}` by a posterior `{p_kl}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalUpdate {
    prior: ProbDist,
    posterior: ProbDist,
}

impl ConditionalUpdate {
    pub fn new(prior: ProbDist, posterior: ProbDist) -> Result<Self> {
        if prior.len() != posterior.len() {
            return Err(InfoError::LengthMismatch {
                prior: prior.len(),
                posterior: posterior.len(),
            });
        }
        if let Some(index) = prior
            .probs
            .iter()
            .zip(&posterior.probs)
            .position(|(&p, &q)| q > 0.0 && p == 0.0)
        {
            return Err(InfoError::SupportMismatch { index });
        }
        Ok(Self { prior, posterior })
    }

    pub fn prior(&self) -> &ProbDist {
        &self.prior
    }

    pub fn posterior(&self) -> &ProbDist {
        &self.posterior
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.prior
            .probs
            .iter()
            .zip(&self.posterior.probs)
            .enumerate()
            .map(|(i, (&p, &q))| (i, p, q))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(InfoError::AlphaOutOfRange(alpha));
    }
    if alpha == 1.0 {
        return Err(InfoError::UseShannon);
    }
    Ok(())
}

/// Hartley information `log_a n` of `n` equally likely outcomes.
pub fn hartley(n: u64, base: LogBase) -> Result<f64> {
    if n == 0 {
        return Err(InfoError::NoOutcomes);
    }
    Ok(base.log(n as f64))
}

/// Shannon entropy `Σ p_k log_a(1/p_k)`.
pub fn shannon(p: &ProbDist, base: LogBase) -> f64 {
    p.probs
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * base.log(x))
        .sum()
}

/// Rényi α-entropy `(1/(1-α)) log_a Σ p_k^α`, for `α >= 0`, `α != 1`.
pub fn renyi(p: &ProbDist, alpha: f64, base: LogBase) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(base.log(p.power_sum(alpha)) / (1.0 - alpha))
}

/// Base-free α*-entropy `(Σ p_k^α)^{1/(1-α)}`.
pub fn renyi_star(p: &ProbDist, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(p.power_sum(alpha).powf(1.0 / (1.0 - alpha)))
}

/// Daróczy entropy of order α, `(2^{1-α} - 1)^{-1} (Σ p_k^α - 1)`, for `α > 0`.
pub fn daroczy(p: &ProbDist, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(InfoError::AlphaOutOfRange(alpha));
    }
    if alpha == 1.0 {
        return Err(InfoError::AlphaOutOfRange(alpha));
    }
    Ok((p.power_sum(alpha) - 1.0) / (2f64.powf(1.0 - alpha) - 1.0))
}

/// Gain of information together with a flag for the `α > 2` regime, where
/// the measure loses its usual interpretation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoGain {
    pub value: f64,
    pub pathological: bool,
}

/// Gain of information about `A` when the prior is replaced by the posterior.
///
/// For `α != 1` this is `(1/(1-α)) log_a Σ_k p_k^{2-α} / p_kl^{1-α}`; at
/// `α = 1` it is `-Σ_k p_kl log_a(p_kl / p_k)` (a non-positive quantity).
pub fn info_gain(u: &ConditionalUpdate, alpha: f64, base: LogBase) -> Result<InfoGain> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(InfoError::AlphaOutOfRange(alpha));
    }
    let pathological = alpha > 2.0;
    if alpha == 1.0 {
        let value = -kullback_leibler(u, base);
        return Ok(InfoGain {
            value,
            pathological,
        });
    }
    let mut sum = 0.0;
    for (index, p, q) in u.pairs() {
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            if alpha < 1.0 {
                return Err(InfoError::DivergentGain { index });
            }
            continue;
        }
        sum += p.powf(2.0 - alpha) * q.powf(alpha - 1.0);
    }
    Ok(InfoGain {
        value: base.log(sum) / (1.0 - alpha),
        pathological,
    })
}

/// Loss of information, the Rényi divergence of the posterior from the prior:
/// `(1/(α-1)) log_a Σ_k p_kl^α / p_k^{α-1}`, and the Kullback–Leibler form
/// `Σ_k p_kl log_a(p_kl / p_k)` at `α = 1`. At `α = 1` it is exactly minus
/// the gain.
pub fn info_loss(u: &ConditionalUpdate, alpha: f64, base: LogBase) -> Result<f64> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(InfoError::AlphaOutOfRange(alpha));
    }
    if alpha == 1.0 {
        return Ok(kullback_leibler(u, base));
    }
    let sum: f64 = u
        .pairs()
        .filter(|&(_, p, q)| p > 0.0 && q > 0.0)
        .map(|(_, p, q)| q.powf(alpha) * p.powf(1.0 - alpha))
        .sum();
    Ok(base.log(sum) / (alpha - 1.0))
}

fn kullback_leibler(u: &ConditionalUpdate, base: LogBase) -> f64 {
    u.pairs()
        .filter(|&(_, _, q)| q > 0.0)
        .map(|(_, p, q)| q * base.log(q / p))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainScanRow {
    pub alpha: f64,
    pub max_abs_gain: f64,
    pub pathological: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainScanReport {
    pub trials: usize,
    pub rows: Vec<GainScanRow>,
}

impl GainScanReport {
    pub fn row(&self, alpha: f64) -> Option<&GainScanRow> {
        self.rows.iter().find(|r| r.alpha == alpha)
    }
}

/// Largest `|gain|` per α over `trials` random prior/posterior pairs.
///
/// Each trial draws an outcome count in `2..=8` and two independent points
/// of the flat simplex; every α sees the same pairs. Gains are in nats.
pub fn gain_vanishing_scan(trials: usize, alphas: &[f64], seed: u64) -> Result<GainScanReport> {
    if trials == 0 {
        return Err(InfoError::NoTrials);
    }
    let mut rng = SeededRng::new(seed);
    let mut rows: Vec<GainScanRow> = alphas
        .iter()
        .map(|&alpha| GainScanRow {
            alpha,
            max_abs_gain: 0.0,
            pathological: alpha > 2.0,
        })
        .collect();
    for _ in 0..trials {
        let n = 2 + (rng.next_u64() % 7) as usize;
        let prior = ProbDist::random(n, &mut rng)?;
        let posterior = ProbDist::random(n, &mut rng)?;
        let update = ConditionalUpdate::new(prior, posterior)?;
        for row in &mut rows {
            let gain = info_gain(&update, row.alpha, LogBase::NATS)?;
            row.max_abs_gain = row.max_abs_gain.max(gain.value.abs());
        }
    }
    Ok(GainScanReport { trials, rows })
}
