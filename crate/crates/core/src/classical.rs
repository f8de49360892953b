//! Birth–death chains: embedded jump chain, non-explosion and recurrence series, stationary
//! measure, and the comparison with the diagonal generic QMS.
//!
//! Infinite series are only ever summed to a horizon. Their behaviour is reported as a trend
//! (log-log slope of the partial sums over the last decade), which is evidence and not proof.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::Picture;
use crate::models::{build_generic_qms, Boundary, GenericQMSParams};
use crate::numerics::Tolerances;
use crate::semigroup::invariant_states;
use crate::spectral::is_irreducible;

pub const DEFAULT_HORIZON: usize = 10_000;

/// Birth rate b_i = γ_{i,i+1} and death rate d_i = γ_{i,i−1} (d_0 = 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RateFamily {
    /// Rates listed per level; levels beyond the lists have no transitions.
    Explicit { birth: Vec<f64>, death: Vec<f64> },
    Constant { birth: f64, death: f64 },
    /// b_i = birth·(i+1), d_i = death·i.
    Linear { birth: f64, death: f64 },
    /// b_i = birth·(i+1)^power, d_i = death·i^power.
    Polynomial { birth: f64, death: f64, power: f64 },
    /// b_i = birth·ratio^i, d_i = death·ratio^i.
    Geometric { birth: f64, death: f64, ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BirthDeathChain {
    pub rates: RateFamily,
    /// Number of levels 0..horizon used for series and truncations.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

impl BirthDeathChain {
    pub fn new(rates: RateFamily, horizon: usize) -> Result<Self> {
        let c = Self { rates, horizon };
        c.validate()?;
        Ok(c)
    }

    pub fn constant(birth: f64, death: f64, horizon: usize) -> Result<Self> {
        Self::new(RateFamily::Constant { birth, death }, horizon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        let params: Vec<f64> = match &self.rates {
            RateFamily::Explicit { birth, death } => birth.iter().chain(death).copied().collect(),
            RateFamily::Constant { birth, death } | RateFamily::Linear { birth, death } => {
                vec![*birth, *death]
            }
            RateFamily::Polynomial { birth, death, power } => {
                if !power.is_finite() {
                    return Err(Error::invalid("power", "must be finite"));
                }
                vec![*birth, *death]
            }
            RateFamily::Geometric { birth, death, ratio } => {
                if !(ratio.is_finite() && *ratio > 0.0) {
                    return Err(Error::invalid("ratio", "must be finite and positive"));
                }
                vec![*birth, *death]
            }
        };
        if let Some(x) = params.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::invalid("rates", format!("rates must be finite and non-negative, got {x}")));
        }
        Ok(())
    }

    pub fn birth(&self, i: usize) -> f64 {
        let x = i as f64;
        match &self.rates {
            RateFamily::Explicit { birth, .. } => birth.get(i).copied().unwrap_or(0.0),
            RateFamily::Constant { birth, .. } => *birth,
            RateFamily::Linear { birth, .. } => birth * (x + 1.0),
            RateFamily::Polynomial { birth, power, .. } => birth * (x + 1.0).powf(*power),
            RateFamily::Geometric { birth, ratio, .. } => birth * ratio.powf(x),
        }
    }

    pub fn death(&self, i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let x = i as f64;
        match &self.rates {
            RateFamily::Explicit { death, .. } => death.get(i).copied().unwrap_or(0.0),
            RateFamily::Constant { death, .. } => *death,
            RateFamily::Linear { death, .. } => death * x,
            RateFamily::Polynomial { death, power, .. } => death * x.powf(*power),
            RateFamily::Geometric { death, ratio, .. } => death * ratio.powf(x),
        }
    }

    /// Rate matrix for the generic QMS on levels 0..dim with a reflecting upper boundary.
    pub fn to_generic_params(&self, dim: usize) -> GenericQMSParams {
        let mut gamma = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            if i + 1 < dim {
                gamma[i][i + 1] = self.birth(i);
            }
            if i > 0 {
                gamma[i][i - 1] = self.death(i);
            }
        }
        GenericQMSParams { gamma, kappa: Vec::new(), dim, boundary: Boundary::Reflecting }
    }
}

/// Tridiagonal embedded jump chain of the chain truncated to `horizon` levels; the birth
/// rate of the last level is dropped so that rows stay stochastic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    pub down: Vec<f64>,
    pub stay: Vec<f64>,
    pub up: Vec<f64>,
}

impl TransitionMatrix {
    pub fn len(&self) -> usize {
        self.stay.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stay.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.stay[i]
        } else if j + 1 == i {
            self.down[i]
        } else if j == i + 1 {
            self.up[i]
        } else {
            0.0
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.down[i] + self.stay[i] + self.up[i]
    }
}

pub fn transition_matrix(chain: &BirthDeathChain) -> Result<TransitionMatrix> {
    chain.validate()?;
    let n = chain.horizon;
    let mut t = TransitionMatrix { down: vec![0.0; n], stay: vec![0.0; n], up: vec![0.0; n] };
    for i in 0..n {
        let b = if i + 1 < n { chain.birth(i) } else { 0.0 };
        let d = chain.death(i);
        let total = b + d;
        if total == 0.0 {
            t.stay[i] = 1.0;
        } else {
            t.up[i] = b / total;
            t.down[i] = d / total;
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Diverging,
    Converging,
    Flat,
}

/// Partial sums of a positive series given by the logs of its terms.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesSummary {
    /// Partial sum to the horizon; +∞ if it overflows.
    pub partial_sum: f64,
    pub ln_partial_sum: f64,
    /// d ln S_n / d ln n over the last decade of the horizon.
    pub slope: f64,
    pub trend: Trend,
    pub terms: usize,
}

const DIVERGING_SLOPE: f64 = 0.05;
const CONVERGING_SLOPE: f64 = 1e-3;

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn summarize(ln_terms: impl Iterator<Item = f64>) -> SeriesSummary {
    let ln_partials: Vec<f64> = ln_terms
        .scan(f64::NEG_INFINITY, |acc, t| {
            *acc = log_add(*acc, t);
            Some(*acc)
        })
        .collect();
    let n = ln_partials.len();
    let last = ln_partials.last().copied().unwrap_or(f64::NEG_INFINITY);
    let slope = if n < 2 || last.is_nan() || last == f64::INFINITY {
        f64::INFINITY
    } else {
        let lo = (n / 10).max(1);
        (last - ln_partials[lo - 1]) / ((n as f64) / (lo as f64)).ln()
    };
    let trend = if !slope.is_finite() || slope >= DIVERGING_SLOPE {
        Trend::Diverging
    } else if slope <= CONVERGING_SLOPE {
        Trend::Converging
    } else {
        Trend::Flat
    };
    SeriesSummary { partial_sum: last.exp(), ln_partial_sum: last, slope, trend, terms: n }
}

/// Σ_i T_i with T_i = 1/b_i + (d_i/b_i) T_{i−1}, the expanded non-explosion series.
/// Divergence is evidence of a non-explosive chain.
pub fn reuter_nonexplosion(chain: &BirthDeathChain, horizon: usize) -> Result<SeriesSummary> {
    chain.validate()?;
    if horizon < 2 {
        return Ok(SeriesSummary {
            partial_sum: f64::INFINITY,
            ln_partial_sum: f64::INFINITY,
            slope: f64::INFINITY,
            trend: Trend::Diverging,
            terms: horizon,
        });
    }
    let mut ln_t = f64::NEG_INFINITY;
    let ln_terms = (0..horizon).map(move |i| {
        let b = chain.birth(i);
        let d = chain.death(i);
        ln_t = if b == 0.0 {
            f64::INFINITY
        } else if d == 0.0 || ln_t == f64::NEG_INFINITY {
            -b.ln()
        } else {
            log_add(-b.ln(), (d / b).ln() + ln_t)
        };
        ln_t
    });
    Ok(summarize(ln_terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    PositiveRecurrent,
    NotPositiveRecurrent,
    InconclusiveAtHorizon,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceVerdict {
    pub classification: Classification,
    /// Σ_n Π_{i=1}^n d_i/b_i.
    pub sum_a: SeriesSummary,
    /// Σ_n Π_{i=1}^n b_{i−1}/d_i, the normalisation of the stationary measure.
    pub sum_b: SeriesSummary,
    /// Same series with embedded-chain probabilities p_{i−1,i}/p_{i,i−1}.
    pub sum_b_embedded: SeriesSummary,
    /// Exact verdict from a user-supplied limit of d_i/b_i, when given.
    pub ratio_test: Option<Classification>,
}

/// Classification of a chain whose ratio d_i/b_i tends to `limit`.
pub fn ratio_test(limit: f64) -> Result<Classification> {
    if !(limit.is_finite() && limit >= 0.0) {
        return Err(Error::invalid("ratio_limit", "must be finite and non-negative"));
    }
    Ok(if limit > 1.0 {
        Classification::PositiveRecurrent
    } else if limit < 1.0 {
        Classification::NotPositiveRecurrent
    } else {
        Classification::InconclusiveAtHorizon
    })
}

fn check_irreducible(chain: &BirthDeathChain, levels: usize) -> Result<()> {
    for i in 0..levels.saturating_sub(1) {
        if !(chain.birth(i) > 0.0 && chain.death(i + 1) > 0.0) {
            return Err(Error::ReducibleChain { level: i });
        }
    }
    Ok(())
}

/// Σ_{n=1}^{horizon−1} Π_{i=1}^n r_i from the logs of the factors.
fn product_series(horizon: usize, ln_factor: impl Fn(usize) -> f64) -> SeriesSummary {
    summarize((1..horizon).scan(0.0, |acc, i| {
        *acc += ln_factor(i);
        Some(*acc)
    }))
}

pub fn positive_recurrence(
    chain: &BirthDeathChain,
    horizon: usize,
    ratio_limit: Option<f64>,
) -> Result<RecurrenceVerdict> {
    chain.validate()?;
    check_irreducible(chain, horizon)?;
    let total = |i: usize| chain.birth(i) + chain.death(i);
    let sum_a = product_series(horizon, |i| (chain.death(i) / chain.birth(i)).ln());
    let sum_b = product_series(horizon, |i| (chain.birth(i - 1) / chain.death(i)).ln());
    let sum_b_embedded = product_series(horizon, |i| {
        (chain.birth(i - 1) / total(i - 1)).ln() - (chain.death(i) / total(i)).ln()
    });
    let classification = match (sum_a.trend, sum_b.trend) {
        (Trend::Diverging, Trend::Converging) => Classification::PositiveRecurrent,
        (Trend::Converging, _) => Classification::NotPositiveRecurrent,
        _ => Classification::InconclusiveAtHorizon,
    };
    let ratio_test = ratio_limit.map(ratio_test).transpose()?;
    Ok(RecurrenceVerdict { classification, sum_a, sum_b, sum_b_embedded, ratio_test })
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryMeasure {
    /// π(n) ∝ Π_{k=1}^n b_{k−1}/d_k on the truncated levels, normalised.
    pub pi: Vec<f64>,
    /// Stationary law of the embedded jump chain, π(n)(b_n + d_n) normalised.
    pub pi_embedded: Vec<f64>,
    /// S = 1 + Σ_n Π_{k=1}^n b_{k−1}/d_k to the horizon.
    pub s_partial: f64,
    /// Relative change of S over the last decade of the horizon.
    pub s_relative_change: f64,
    /// max_n |π(n) b_n − π(n+1) d_{n+1}|.
    pub detailed_balance_residual: f64,
    /// Set when the measure was computed without a positive-recurrent classification.
    pub forced: bool,
}

pub fn stationary_measure(
    chain: &BirthDeathChain,
    horizon: usize,
    force: bool,
) -> Result<StationaryMeasure> {
    let verdict = positive_recurrence(chain, horizon, None)?;
    let forced = verdict.classification != Classification::PositiveRecurrent;
    if forced && !force {
        return Err(Error::DivergentSeries { horizon });
    }
    let mut ln_w = Vec::with_capacity(horizon);
    ln_w.push(0.0);
    for k in 1..horizon {
        ln_w.push(ln_w[k - 1] + (chain.birth(k - 1) / chain.death(k)).ln());
    }
    let ln_s = ln_w.iter().fold(f64::NEG_INFINITY, |a, &b| log_add(a, b));
    let pi: Vec<f64> = ln_w.iter().map(|w| (w - ln_s).exp()).collect();
    let lo = (horizon / 10).max(1);
    let ln_s_lo = ln_w[..lo].iter().fold(f64::NEG_INFINITY, |a, &b| log_add(a, b));
    let s_relative_change = (ln_s - ln_s_lo).exp_m1();

    let top = horizon - 1;
    let q = |i: usize| if i < top { chain.birth(i) } else { 0.0 } + chain.death(i);
    let raw: Vec<f64> = pi.iter().enumerate().map(|(i, p)| p * q(i)).collect();
    let norm: f64 = raw.iter().sum();
    let pi_embedded = if norm > 0.0 { raw.iter().map(|x| x / norm).collect() } else { pi.clone() };

    let detailed_balance_residual = (0..top)
        .map(|n| (pi[n] * chain.birth(n) - pi[n + 1] * chain.death(n + 1)).abs())
        .fold(0.0, f64::max);
    Ok(StationaryMeasure {
        pi,
        pi_embedded,
        s_partial: ln_s.exp(),
        s_relative_change,
        detailed_balance_residual,
        forced,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub dim: usize,
    pub classification: Classification,
    pub irreducible: bool,
    /// Off-diagonal Frobenius mass of the invariant state.
    pub off_diagonal: f64,
    pub max_deviation: f64,
    pub diagonal: Vec<f64>,
    pub pi: Vec<f64>,
}

/// Invariant state of the reflecting generic QMS on `dim` levels against the truncated
/// stationary measure.
pub fn quantum_classical_consistency(
    chain: &BirthDeathChain,
    dim: usize,
    tol: &Tolerances,
) -> Result<ConsistencyReport> {
    chain.validate()?;
    if dim == 0 || dim > chain.horizon {
        return Err(Error::invalid("dim", format!("must be in 1..={}", chain.horizon)));
    }
    let verdict = positive_recurrence(chain, chain.horizon, None)?;
    if verdict.classification == Classification::NotPositiveRecurrent {
        return Err(Error::invalid("chain", "chain is not positive recurrent"));
    }
    let qms = build_generic_qms(&chain.to_generic_params(dim))?;
    let gen = crate::lindblad::build_schrodinger_generator(&qms.spec)?;
    let irreducible = is_irreducible(&gen, tol)?;
    let inv = invariant_states(&gen.in_picture(Picture::Schrodinger), tol)?;
    let rho = inv.canonical_state.matrix();
    let diagonal: Vec<f64> = (0..dim).map(|i| rho[(i, i)].re).collect();
    let mut off = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                off += rho[(i, j)].norm_sqr();
            }
        }
    }
    let off_diagonal = f64::sqrt(off);
    let pi = stationary_measure(chain, dim, true)?.pi;
    let max_deviation = diagonal
        .iter()
        .zip(&pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if off_diagonal > 1e-9 || max_deviation > 1e-8 {
        return Err(Error::ConsistencyMismatch { max_deviation, off_diagonal });
    }
    Ok(ConsistencyReport {
        dim,
        classification: verdict.classification,
        irreducible,
        off_diagonal,
        max_deviation,
        diagonal,
        pi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_rates_transition_matrix() {
        let c = BirthDeathChain::constant(1.0, 2.0, 10).unwrap();
        let t = transition_matrix(&c).unwrap();
        assert_relative_eq!(t.get(3, 4), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(t.get(3, 2), 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(t.get(0, 1), 1.0);
        assert_eq!(t.get(9, 8), 1.0);
        assert!((0..10).all(|i| (t.row_sum(i) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn absorbing_level_stays() {
        let c = BirthDeathChain::new(
            RateFamily::Explicit { birth: vec![1.0, 0.0, 1.0], death: vec![0.0, 0.0, 1.0] },
            3,
        )
        .unwrap();
        let t = transition_matrix(&c).unwrap();
        assert_eq!(t.get(1, 1), 1.0);
    }

    #[test]
    fn reuter_trends() {
        let constant = BirthDeathChain::constant(1.0, 0.0, 1000).unwrap();
        let r = reuter_nonexplosion(&constant, 1000).unwrap();
        assert_eq!(r.trend, Trend::Diverging);
        assert_relative_eq!(r.partial_sum, 1000.0, max_relative = 1e-12);

        let cubic = BirthDeathChain::new(RateFamily::Polynomial { birth: 1.0, death: 0.0, power: 3.0 }, 1000).unwrap();
        let r = reuter_nonexplosion(&cubic, 1000).unwrap();
        assert_eq!(r.trend, Trend::Converging);
        let zeta3 = 1.202_056_903_159_594;
        assert!((r.partial_sum - zeta3).abs() < 1e-5);

        let single = BirthDeathChain::constant(1.0, 1.0, 1).unwrap();
        assert_eq!(reuter_nonexplosion(&single, 1).unwrap().trend, Trend::Diverging);
    }

    #[test]
    fn recurrence_classes() {
        let h = 2000;
        let down = BirthDeathChain::constant(1.0, 2.0, h).unwrap();
        let v = positive_recurrence(&down, h, Some(2.0)).unwrap();
        assert_eq!(v.classification, Classification::PositiveRecurrent);
        assert_eq!(v.ratio_test, Some(Classification::PositiveRecurrent));
        let sym = BirthDeathChain::constant(1.0, 1.0, h).unwrap();
        assert_eq!(
            positive_recurrence(&sym, h, None).unwrap().classification,
            Classification::InconclusiveAtHorizon
        );
        let up = BirthDeathChain::constant(2.0, 1.0, h).unwrap();
        assert_eq!(
            positive_recurrence(&up, h, None).unwrap().classification,
            Classification::NotPositiveRecurrent
        );
        let broken = BirthDeathChain::new(RateFamily::Explicit { birth: vec![1.0, 0.0, 1.0], death: vec![0.0, 1.0, 1.0] }, 3).unwrap();
        assert!(matches!(positive_recurrence(&broken, 3, None), Err(Error::ReducibleChain { level: 1 })));
    }

    #[test]
    fn mm1_queue_is_geometric() {
        let (lam, mu) = (0.3, 0.5);
        let r = lam / mu;
        let h = 1000;
        let s = stationary_measure(&BirthDeathChain::constant(lam, mu, h).unwrap(), h, false).unwrap();
        for n in 0..50 {
            assert_relative_eq!(s.pi[n], (1.0 - r) * r.powi(n as i32), max_relative = 1e-10);
        }
        assert!(s.detailed_balance_residual <= 1e-12);
        assert!(s.s_relative_change < 1e-9);
        assert!(!s.forced);
    }

    #[test]
    fn single_state_measure() {
        let c = BirthDeathChain::constant(1.0, 1.0, 1).unwrap();
        let s = stationary_measure(&c, 1, true).unwrap();
        assert_eq!(s.pi, vec![1.0]);
    }

    #[test]
    fn null_recurrent_needs_force() {
        let c = BirthDeathChain::constant(1.0, 1.0, 500).unwrap();
        assert!(matches!(stationary_measure(&c, 500, false), Err(Error::DivergentSeries { .. })));
        assert!(stationary_measure(&c, 500, true).unwrap().forced);
    }

    #[test]
    fn two_level_consistency() {
        let (p, q) = (0.7, 1.9);
        let c = BirthDeathChain::new(RateFamily::Explicit { birth: vec![p, 0.0], death: vec![0.0, q] }, 2).unwrap();
        let rep = quantum_classical_consistency(&c, 2, &Tolerances::default()).unwrap();
        assert_relative_eq!(rep.diagonal[0], q / (p + q), epsilon = 1e-10);
        assert_relative_eq!(rep.diagonal[1], p / (p + q), epsilon = 1e-10);
        assert!(rep.irreducible);
    }
}
