//! Floating-point checks of the symbolic results.
//!
//! The global arrival time at `x` of a particle at `(q, p)` is
//!
//! ```text
//! T_x(q, p) = sgn(p) sqrt(mu/2) integral_q^x dq' / sqrt(H(q, p) - V(q'))
//! ```
//!
//! evaluated here by adaptive quadrature after the substitution
//! `q' = q + (x - q) t (2 - t)`, which removes the inverse square root at a
//! turning point located at `x`. `H - V` equals `p^2/2mu > 0` at `q`, so `x`
//! is the only endpoint where it can vanish.

mod quadrature;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::potential::PolynomialPotential;
use crate::ratseries::{Assignment, EvalPoint, Series};
use crate::toa_local::{local_toa_series, Arrival};

pub use quadrature::{integrate, Estimate};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericConfig {
    pub abs_tol: f64,
    pub max_subdiv: usize,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            abs_tol: 1e-10,
            max_subdiv: 60,
            fd_step: 1e-6,
        }
    }
}

impl NumericConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.fd_step > 0.0) || self.max_subdiv == 0 {
            return Err(Error::Argument(format!(
                "invalid numeric configuration {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
    /// Arrival point.
    pub x: f64,
    pub params: BTreeMap<String, f64>,
    pub mu: f64,
    pub hbar: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        PhasePoint {
            q,
            p,
            x: 0.0,
            params: BTreeMap::new(),
            mu: 1.0,
            hbar: 1.0,
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn at(&self, q: f64, p: f64) -> Self {
        PhasePoint {
            q,
            p,
            ..self.clone()
        }
    }

    pub fn assignment(&self) -> Assignment {
        Assignment {
            mu: self.mu,
            hbar: self.hbar,
            symbols: self.params.clone(),
        }
    }

    fn param(&self, name: &str) -> Result<f64> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnboundSymbol(name.to_string()))
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::Argument(format!(
                "mass must be positive, got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

/// Global arrival time with its quadrature error estimate.
pub fn global_toa_estimate(
    v: &PolynomialPotential,
    pt: &PhasePoint,
    cfg: &NumericConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    pt.validate()?;
    if pt.p == 0.0 {
        return Err(Error::SingularEvaluation("p = 0".into()));
    }
    let (q, x) = (pt.q, pt.x);
    if q == x {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let a = pt.assignment();
    let vq = v.value(q, &a)?;
    let kinetic = pt.p * pt.p / (2.0 * pt.mu);
    // H - V(q') written so that it is exact at q' = q
    let gap = |y: f64| -> Result<f64> { Ok(kinetic + vq - v.value(y, &a)?) };

    let scale = kinetic + vq.abs();
    let at_x = gap(x)?;
    if at_x < -1e-12 * scale {
        return Err(Error::Unreachable { q, x });
    }
    const SCAN: usize = 2000;
    for i in 1..SCAN {
        let y = q + (x - q) * i as f64 / SCAN as f64;
        if gap(y)? <= 0.0 {
            return Err(Error::Unreachable { q, x });
        }
    }
    let turning = at_x <= 1e-12 * scale;
    let slope = v.derivative_value(x, &a)?;

    let integrand = |t: f64| -> Result<f64> {
        let s = 1.0 - t;
        let y = x - (x - q) * s * s;
        let mut w = gap(y)?;
        if w <= 0.0 {
            if turning && s < 1e-4 {
                // first-order expansion about the turning point
                w = at_x.max(0.0) + slope * (x - y);
            }
            if w <= 0.0 {
                return Err(Error::Unreachable { q, x });
            }
        }
        Ok(2.0 * (x - q) * s / w.sqrt())
    };
    let mut est = integrate(integrand, 0.0, 1.0, cfg.abs_tol, cfg.max_subdiv)?;
    let factor = pt.p.signum() * (pt.mu / 2.0).sqrt();
    est.value *= factor;
    est.error *= factor.abs();
    Ok(est)
}

pub fn global_toa_quadrature(
    v: &PolynomialPotential,
    pt: &PhasePoint,
    cfg: &NumericConfig,
) -> Result<f64> {
    global_toa_estimate(v, pt, cfg).map(|e| e.value)
}

/// Systems with an elementary global arrival time at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedSystem {
    Free,
    Linear,
    Harmonic,
}

impl fmt::Display for ClosedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Free => "free",
            Self::Linear => "linear",
            Self::Harmonic => "harmonic",
        })
    }
}

impl FromStr for ClosedSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Self::Free),
            "linear" => Ok(Self::Linear),
            "harmonic" => Ok(Self::Harmonic),
            _ => Err(Error::Argument(format!("unknown system `{s}`"))),
        }
    }
}

impl ClosedSystem {
    pub fn potential(self) -> PolynomialPotential {
        match self {
            Self::Free => PolynomialPotential::free(),
            Self::Linear => PolynomialPotential::linear(),
            Self::Harmonic => PolynomialPotential::harmonic(),
        }
    }
}

/// Closed-form arrival time at the origin, in the sign convention of `t_0`:
/// free `-mu q/p`, linear `-(p/lambda)(sqrt(1 + 2 mu lambda q/p^2) - 1)`,
/// harmonic `-(1/omega) arctan(mu omega q/p)`.
pub fn closed_form_global(system: ClosedSystem, pt: &PhasePoint) -> Result<f64> {
    pt.validate()?;
    if pt.x != 0.0 {
        return Err(Error::Argument(
            "closed forms are for arrival at the origin".into(),
        ));
    }
    if pt.p == 0.0 {
        return Err(Error::SingularEvaluation("p = 0".into()));
    }
    let (q, p, mu) = (pt.q, pt.p, pt.mu);
    match system {
        ClosedSystem::Free => Ok(-mu * q / p),
        ClosedSystem::Linear => {
            let lambda = pt.param("lambda")?;
            if lambda == 0.0 {
                return Ok(-mu * q / p);
            }
            let arg = 1.0 + 2.0 * mu * lambda * q / (p * p);
            if arg < 0.0 {
                return Err(Error::MathDomain(format!(
                    "1 + 2 mu lambda q / p^2 = {arg} is negative"
                )));
            }
            Ok(-(p / lambda) * (arg.sqrt() - 1.0))
        }
        ClosedSystem::Harmonic => {
            let omega = pt.param("omega")?;
            if omega == 0.0 {
                return Ok(-mu * q / p);
            }
            Ok(-(mu * omega * q / p).atan() / omega)
        }
    }
}

/// True when `|V(q) - V(q')| < p^2 / 2mu` along the whole path `[x, q]`.
pub fn convergence_region_check(v: &PolynomialPotential, pt: &PhasePoint) -> Result<bool> {
    pt.validate()?;
    if pt.q == pt.x {
        return Ok(true);
    }
    let a = pt.assignment();
    let vq = v.value(pt.q, &a)?;
    let bound = pt.p * pt.p / (2.0 * pt.mu);
    // V is a polynomial: sample the path densely, then refine at the
    // derivative's sign changes where interior extrema live.
    const SAMPLES: usize = 4000;
    let at = |i: usize| pt.q + (pt.x - pt.q) * i as f64 / SAMPLES as f64;
    let mut worst = 0.0f64;
    let mut prev_slope = v.derivative_value(at(0), &a)?;
    for i in 1..=SAMPLES {
        let y = at(i);
        worst = worst.max((vq - v.value(y, &a)?).abs());
        let slope = v.derivative_value(y, &a)?;
        if slope == 0.0 || slope.signum() != prev_slope.signum() {
            let root = bisect_root(|z| v.derivative_value(z, &a), at(i - 1), y)?;
            worst = worst.max((vq - v.value(root, &a)?).abs());
        }
        prev_slope = slope;
    }
    Ok(worst < bound)
}

fn bisect_root(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let flo = f(lo)?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesComparison {
    pub series_value: f64,
    pub quadrature_value: f64,
    pub abs_error: f64,
    /// Whether the point lies in the region where the series is known to converge.
    pub in_region: bool,
}

/// Evaluates a phase-space series at a point.
pub fn evaluate_phase(s: &Series, pt: &PhasePoint) -> Result<f64> {
    s.evaluate(
        &pt.assignment(),
        &EvalPoint::Phase {
            q: pt.q,
            x: pt.x,
            p: pt.p,
        },
    )
}

/// Local arrival-time series through depth `depth` against quadrature.
pub fn series_vs_quadrature(
    v: &PolynomialPotential,
    pt: &PhasePoint,
    depth: u32,
    cfg: &NumericConfig,
) -> Result<SeriesComparison> {
    let series = local_toa_series(v, depth, &Arrival::Symbolic)?.series;
    let series_value = evaluate_phase(&series, pt)?;
    let quadrature_value = global_toa_quadrature(v, pt, cfg)?;
    Ok(SeriesComparison {
        series_value,
        quadrature_value,
        abs_error: (series_value - quadrature_value).abs(),
        in_region: convergence_region_check(v, pt)?,
    })
}

/// `|{H, T} - 1|` with the bracket taken by central differences.
pub fn poisson_bracket_check<F>(
    t: F,
    v: &PolynomialPotential,
    pt: &PhasePoint,
    cfg: &NumericConfig,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    cfg.validate()?;
    pt.validate()?;
    let hq = cfg.fd_step * pt.q.abs().max(1.0);
    let hp = cfg.fd_step * pt.p.abs().max(1.0);
    let dt_dq = (t(pt.q + hq, pt.p)? - t(pt.q - hq, pt.p)?) / (2.0 * hq);
    let dt_dp = (t(pt.q, pt.p + hp)? - t(pt.q, pt.p - hp)?) / (2.0 * hp);
    let dh_dq = v.derivative_value(pt.q, &pt.assignment())?;
    let dh_dp = pt.p / pt.mu;
    let bracket = dh_dq * dt_dp - dh_dp * dt_dq;
    if !bracket.is_finite() {
        return Err(Error::SingularEvaluation(format!(
            "bracket is not finite at q={}, p={}",
            pt.q, pt.p
        )));
    }
    Ok((bracket - 1.0).abs())
}
