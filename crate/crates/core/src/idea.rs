//! The IDEA incidence model, its Brownlee Gaussian form, fitting, and
//! projection.
//!
//! IDEA describes incident infections in generation t as
//! `I(t) = (r0 / (1+d)^t)^t`: exponential growth at basic reproduction
//! number `r0`, discounted per generation by the control parameter `d`.
//! Taking logs gives the quadratic `log I(t) = t·log r0 − t²·log(1+d)`,
//! which is Brownlee's Gaussian curve `exp(−a·t² + b·t + c)` with
//! `a = log(1+d)`, `b = log r0`, `c = 0`. That equivalence makes the
//! log-space fitting problem exactly linear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::GenerationSeries;

/// Largest |c| for which a Brownlee curve still counts as an IDEA curve.
pub const BROWNLEE_C_TOLERANCE: f64 = 1e-12;

/// IDEA model parameters.
///
/// `d` may be negative (growth accelerating faster than exponential); the
/// model only requires `1 + d > 0`. Negative `d` is reported via
/// [`IdeaParams::is_accelerating`] rather than rejected, because abrupt
/// shifts to an accelerating regime are themselves an epidemic-wave signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdeaParams {
    r0: f64,
    d: f64,
}

impl IdeaParams {
    /// Validates `r0 > 0` and `1 + d > 0`.
    pub fn new(r0: f64, d: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::validation(format!(
                "basic reproduction number must be positive and finite, got {r0}"
            )));
        }
        if !(d > -1.0 && d.is_finite()) {
            return Err(Error::validation(format!(
                "control parameter must satisfy 1 + d > 0, got {d}"
            )));
        }
        Ok(IdeaParams { r0, d })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// True when `d < 0`, i.e. growth is accelerating beyond exponential.
    pub fn is_accelerating(&self) -> bool {
        self.d < 0.0
    }

    /// `log I(t)` as a function of continuous `t`; no domain check.
    pub fn log_incidence(&self, t: f64) -> f64 {
        t * self.r0.ln() - t * t * self.d.ln_1p()
    }

    /// Incident infections in generation `t ≥ 1`.
    ///
    /// Evaluated in log space as `exp(t·log r0 − t²·log(1+d))` so large `t`
    /// underflows to 0 instead of overflowing intermediate powers.
    pub fn incidence(&self, t: u32) -> Result<f64> {
        if t < 1 {
            return Err(Error::domain("IDEA incidence is defined for t >= 1"));
        }
        Ok(self.log_incidence(t as f64).exp())
    }

    /// Continuous maximizer `t* = log r0 / (2 log(1+d))` of the incidence
    /// curve, defined only when `d > 0`; the integer argmax lies in
    /// `{floor(t*), ceil(t*)}`.
    pub fn continuous_peak(&self) -> Option<f64> {
        let a = self.d.ln_1p();
        (a > 0.0).then(|| self.r0.ln() / (2.0 * a))
    }

    /// The equivalent Brownlee curve: `a = log(1+d)`, `b = log r0`, `c = 0`.
    pub fn to_brownlee(&self) -> BrownleeParams {
        BrownleeParams {
            a: self.d.ln_1p(),
            b: self.r0.ln(),
            c: 0.0,
        }
    }

    /// Projects incidence for generations `from_t + 1 ..= from_t + horizon`.
    ///
    /// The result uses a unit generation interval; re-attach a calendar
    /// interval with [`GenerationSeries::with_interval`].
    pub fn project(&self, from_t: u32, horizon: u32) -> Result<GenerationSeries> {
        if horizon < 1 {
            return Err(Error::domain("projection horizon must be at least 1"));
        }
        let values = (1..=horizon)
            .map(|h| self.incidence(from_t + h))
            .collect::<Result<Vec<f64>>>()?;
        GenerationSeries::new(i64::from(from_t) + 1, 1.0, values)
    }
}

/// Brownlee's Gaussian curve `exp(−a·t² + b·t + c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownleeParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BrownleeParams {
    pub fn evaluate(&self, t: f64) -> f64 {
        (-self.a * t * t + self.b * t + self.c).exp()
    }

    /// Inverts the Brownlee correspondence: `r0 = exp(b)`, `d = exp(a) − 1`.
    ///
    /// Only curves with `|c| ≤ 1e-12` are IDEA curves; anything else is a
    /// scaled Gaussian outside the model family.
    pub fn to_idea(&self) -> Result<IdeaParams> {
        // The negation-free form would let NaN slip through.
        if self.c.is_nan() || self.c.abs() > BROWNLEE_C_TOLERANCE {
            return Err(Error::domain(format!(
                "Brownlee constant c = {} is not 0; the curve is not an IDEA curve",
                self.c
            )));
        }
        IdeaParams::new(self.b.exp(), self.a.exp_m1())
    }
}

/// Scale on which the fit objective compares model to data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitTarget {
    /// Compare incidence per generation.
    Incidence,
    /// Compare running sums of incidence, anchored at the first generation
    /// with `t ≥ 1` in the series.
    Cumulative,
}

/// Fitting algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// Closed-form zero-intercept least squares on `log I(t) = b·t − a·t²`,
    /// over generations with positive incidence. Deterministic; the target
    /// scale does not enter.
    LogLinear,
    /// Starts from the log-linear solution and refines `(b, a)` by
    /// Nelder-Mead descent on the squared error of the chosen target scale,
    /// with zero-incidence generations retained.
    NonlinearRefine,
}

/// Fit output.
///
/// `sse` is the final value of the method's own objective: the log-space
/// squared error for [`FitMethod::LogLinear`], the target-scale squared
/// error for [`FitMethod::NonlinearRefine`]. `n_used` counts the
/// generations the objective saw, and `excluded_generations` lists the
/// ones it did not (non-positive incidence in log space, plus any
/// generation with `t < 1`, outside the model domain).
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: IdeaParams,
    pub method: FitMethod,
    pub target: FitTarget,
    pub sse: f64,
    pub n_used: usize,
    pub excluded_generations: Vec<i64>,
}

impl FitResult {
    /// Serializes to `{r0, d, method, sse, n_used, excluded_generations}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "r0": self.params.r0(),
            "d": self.params.d(),
            "method": self.method,
            "sse": self.sse,
            "n_used": self.n_used,
            "excluded_generations": self.excluded_generations,
        })
    }
}

/// Fits IDEA parameters to a generation series.
///
/// The log-linear problem needs at least 2 generations with `t ≥ 1` and
/// strictly positive incidence; refinement always starts from the
/// log-linear solution, so the same requirement applies to both methods.
pub fn fit_idea(
    series: &GenerationSeries,
    target: FitTarget,
    method: FitMethod,
) -> Result<FitResult> {
    // Generations inside the model domain, and the positive subset the
    // log-space problem can see.
    let domain: Vec<(f64, f64)> = series
        .generations()
        .filter(|&(t, _)| t >= 1)
        .map(|(t, v)| (t as f64, v))
        .collect();
    let log_points: Vec<(f64, f64)> = domain
        .iter()
        .filter(|&&(_, v)| v > 0.0)
        .map(|&(t, v)| (t, v.ln()))
        .collect();
    if log_points.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 generations with positive incidence, found {}",
            log_points.len()
        )));
    }

    let (b0, a0, sse_log) = solve_log_linear(&log_points)?;

    let (excluded, n_used, params, sse) = match method {
        FitMethod::LogLinear => {
            let excluded: Vec<i64> = series
                .generations()
                .filter(|&(t, v)| t < 1 || v <= 0.0)
                .map(|(t, _)| t)
                .collect();
            let params = params_from_log(b0, a0)?;
            (excluded, log_points.len(), params, sse_log)
        }
        FitMethod::NonlinearRefine => {
            let excluded: Vec<i64> = series
                .generations()
                .filter(|&(t, _)| t < 1)
                .map(|(t, _)| t)
                .collect();
            let objective = |x: [f64; 2]| target_sse(&domain, target, x[0], x[1]);
            let start = [b0, a0];
            if !objective(start).is_finite() {
                return Err(Error::Fit(
                    "objective is not finite at the log-linear starting point".to_string(),
                ));
            }
            let (best, value) = nelder_mead(objective, start, 1e-10, 500);
            if !value.is_finite() {
                return Err(Error::Fit("refined objective is not finite".to_string()));
            }
            let params = params_from_log(best[0], best[1])?;
            (excluded, domain.len(), params, value)
        }
    };

    Ok(FitResult {
        params,
        method,
        target,
        sse,
        n_used,
        excluded_generations: excluded,
    })
}

fn params_from_log(b: f64, a: f64) -> Result<IdeaParams> {
    IdeaParams::new(b.exp(), a.exp_m1()).map_err(|e| Error::Fit(e.to_string()))
}

/// Solves min Σ (y − b·t + a·t²)² in closed form via the normal equations.
fn solve_log_linear(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let (mut s2, mut s3, mut s4, mut sty, mut st2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, y) in points {
        let t2 = t * t;
        s2 += t2;
        s3 += t2 * t;
        s4 += t2 * t2;
        sty += t * y;
        st2y += t2 * y;
    }
    let det = -s2 * s4 + s3 * s3;
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Fit(
            "degenerate design: generations do not determine the fit".to_string(),
        ));
    }
    let b = (-s4 * sty + s3 * st2y) / det;
    let a = (s2 * st2y - s3 * sty) / det;
    let sse: f64 = points
        .iter()
        .map(|&(t, y)| {
            let r = y - (b * t - a * t * t);
            r * r
        })
        .sum();
    Ok((b, a, sse))
}

/// Squared error of the model against `domain` on the chosen target scale.
fn target_sse(domain: &[(f64, f64)], target: FitTarget, b: f64, a: f64) -> f64 {
    let model = domain.iter().map(|&(t, _)| (b * t - a * t * t).exp());
    match target {
        FitTarget::Incidence => domain
            .iter()
            .zip(model)
            .map(|(&(_, v), m)| {
                let r = v - m;
                r * r
            })
            .sum(),
        FitTarget::Cumulative => {
            let (mut cum_obs, mut cum_model, mut sse) = (0.0, 0.0, 0.0);
            for (&(_, v), m) in domain.iter().zip(model) {
                cum_obs += v;
                cum_model += m;
                let r = cum_obs - cum_model;
                sse += r * r;
            }
            sse
        }
    }
}

/// Derivative-free Nelder-Mead descent in two dimensions.
///
/// Stops once no relative objective improvement above `tol` remains
/// available: most iterations replace only the worst vertex, so the
/// per-iteration gain of the best value is measured the standard simplex
/// way, as the relative spread between the worst and best vertex values.
/// Caps at `max_iter` iterations. Non-finite objective values are treated
/// as +inf so the simplex walks away from them.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(
    f: F,
    start: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64) {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let eval = |x: [f64; 2]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let step = |x: f64| {
        if x == 0.0 {
            0.00025
        } else {
            0.05 * x.abs()
        }
    };

    let mut simplex = vec![
        start,
        [start[0] + step(start[0]), start[1]],
        [start[0], start[1] + step(start[1])],
    ];
    let mut values: Vec<f64> = simplex.iter().map(|&x| eval(x)).collect();

    for _ in 0..max_iter {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]).to_vec();
        values = order.map(|i| values[i]).to_vec();

        let spread = 2.0 * (values[2] - values[0])
            / (values[2].abs() + values[0].abs() + f64::MIN_POSITIVE);
        if spread < tol {
            break;
        }

        let centroid = [
            (simplex[0][0] + simplex[1][0]) / 2.0,
            (simplex[0][1] + simplex[1][1]) / 2.0,
        ];
        let shifted = |coef: f64| {
            [
                centroid[0] + coef * (centroid[0] - simplex[2][0]),
                centroid[1] + coef * (centroid[1] - simplex[2][1]),
            ]
        };

        let reflected = shifted(REFLECT);
        let fr = eval(reflected);
        if fr < values[0] {
            let expanded = shifted(EXPAND);
            let fe = eval(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] {
                shifted(CONTRACT)
            } else {
                shifted(-CONTRACT)
            };
            let fc = eval(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        simplex[0][0] + SHRINK * (simplex[i][0] - simplex[0][0]),
                        simplex[0][1] + SHRINK * (simplex[i][1] - simplex[0][1]),
                    ];
                    values[i] = eval(simplex[i]);
                }
            }
        }
    }

    let mut best_idx = 0;
    for i in 1..3 {
        if values[i] < values[best_idx] {
            best_idx = i;
        }
    }
    (simplex[best_idx], values[best_idx])
}
