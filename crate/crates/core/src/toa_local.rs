//! Classical local time of arrival as a series in `1/p`.
//!
//! The local arrival time at `x` is `t_x = sum_k (-1)^k T_k` with
//! `T_0 = mu (x - q) / p` and
//!
//! ```text
//! T_k(q, p; x) = (mu / p) * integral_q^x V'(q') dT_{k-1}(q', p; x)/dp dq'
//! ```
//!
//! Every term of `T_k` carries exactly `p^-(2k+1)`, so truncating at depth
//! `K` is exact through that power of the momentum.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::potential::PolynomialPotential;
use crate::ratseries::{int, pow, rat, Monomial, Rational, Series, Space};

/// Where the particle is required to arrive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arrival {
    /// Keep `x` as a phase-space variable.
    Symbolic,
    At(Rational),
}

impl Arrival {
    pub fn origin() -> Self {
        Arrival::At(Rational::zero())
    }
}

impl Default for Arrival {
    fn default() -> Self {
        Self::origin()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalToaResult {
    /// `sum_{k <= depth} (-1)^k T_k`
    pub series: Series,
    /// `T_0 ..= T_depth`
    pub per_order: Vec<Series>,
    pub depth: u32,
}

/// Replaces `x^w` by `x0^w` in every term.
fn substitute_arrival(s: &Series, arrival: &Arrival) -> Result<Series> {
    let Arrival::At(x0) = arrival else {
        return Ok(s.clone());
    };
    s.map_terms(Space::Phase, |m, c| {
        let w = m.x();
        if w == 0 {
            return Ok(Some((m.clone(), c.clone())));
        }
        let value = c * pow(x0, w);
        Ok(Some((m.mul(&Monomial::phase(0, -w, 0))?, value)))
    })
}

/// `T_0 = mu (x - q) / p`
pub fn initial_term(arrival: &Arrival) -> Result<Series> {
    let mut t0 = Series::zero(Space::Phase);
    t0.add_term(Monomial::phase(1, 0, 1).with_mu(1), int(-1))?;
    t0.add_term(Monomial::phase(0, 1, 1).with_mu(1), int(1))?;
    substitute_arrival(&t0, arrival)
}

/// Computes `T_k` from `T_{k-1}`.
///
/// `prev` must be homogeneous of degree `2k - 1` in `1/p`.
pub fn recurrence_step(
    v: &PolynomialPotential,
    prev: &Series,
    k: u32,
    arrival: &Arrival,
) -> Result<Series> {
    if k == 0 {
        return Err(Error::Argument("recurrence starts at k = 1".into()));
    }
    if prev.space() != Space::Phase {
        return Err(Error::SpaceMismatch {
            expected: Space::Phase,
            found: prev.space(),
        });
    }
    let expected = 2 * k as i32 - 1;
    if let Some((m, _)) = prev.iter().find(|(m, _)| m.pinv() != expected) {
        return Err(Error::Argument(format!(
            "T_{} term {m} does not carry p^-{expected}",
            k - 1
        )));
    }

    let dv = v.derivative();
    let mu_over_p = Monomial::phase(0, 0, 1).with_mu(1);
    let mut out = Series::zero(Space::Phase);
    for (m, c) in prev.iter() {
        // d/dp p^-s = -s p^-(s+1)
        let s = m.pinv();
        let dp_coeff = c * int(-(s as i64));
        for term in &dv {
            // integral_q^x q'^r dq' = (x^(r+1) - q^(r+1)) / (r+1)
            let r = m.q() + term.degree as i32;
            let base = m
                .scalar_part()
                .mul(&term.factor)?
                .mul(&mu_over_p)?
                .mul(&Monomial::phase(0, m.x(), s + 1))?;
            let coeff = &dp_coeff * &term.coeff / int(r as i64 + 1);
            out.add_term(base.mul(&Monomial::phase(0, r + 1, 0))?, coeff.clone())?;
            out.add_term(base.mul(&Monomial::phase(r + 1, 0, 0))?, -coeff)?;
        }
    }
    substitute_arrival(&out, arrival)
}

/// `t_x = sum_{k=0}^{depth} (-1)^k T_k`.
pub fn local_toa_series(
    v: &PolynomialPotential,
    depth: u32,
    arrival: &Arrival,
) -> Result<LocalToaResult> {
    let mut per_order = vec![initial_term(arrival)?];
    for k in 1..=depth {
        let next = recurrence_step(v, &per_order[k as usize - 1], k, arrival)?;
        per_order.push(next);
    }
    let mut series = Series::zero(Space::Phase);
    for (k, t) in per_order.iter().enumerate() {
        let signed = if k % 2 == 0 { t.clone() } else { t.neg() };
        series = series.add(&signed)?;
    }
    Ok(LocalToaResult {
        series,
        per_order,
        depth,
    })
}

/// The three systems with printed closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableSystem {
    Linear,
    Harmonic,
    Quartic,
}

impl TableSystem {
    pub const ALL: [TableSystem; 3] = [Self::Linear, Self::Harmonic, Self::Quartic];

    pub fn potential(self) -> PolynomialPotential {
        match self {
            Self::Linear => PolynomialPotential::linear(),
            Self::Harmonic => PolynomialPotential::harmonic(),
            Self::Quartic => PolynomialPotential::quartic(),
        }
    }

    /// Spatial and scalar part of the order-`k` term of `-t_0`.
    pub fn order_monomial(self, k: u32) -> Monomial {
        let k = k as i32;
        match self {
            Self::Linear => Monomial::phase(k + 1, 0, 2 * k + 1)
                .with_mu(k + 1)
                .with_sym("lambda", k),
            Self::Harmonic => Monomial::phase(2 * k + 1, 0, 2 * k + 1)
                .with_mu(2 * k + 1)
                .with_sym("omega", 2 * k),
            Self::Quartic => Monomial::phase(4 * k + 1, 0, 2 * k + 1)
                .with_mu(k + 1)
                .with_sym("lambda", k),
        }
    }
}

impl fmt::Display for TableSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Harmonic => "harmonic",
            Self::Quartic => "quartic",
        })
    }
}

impl FromStr for TableSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "harmonic" => Ok(Self::Harmonic),
            "quartic" => Ok(Self::Quartic),
            other => Err(Error::Argument(format!("unknown system `{other}`"))),
        }
    }
}

/// One coefficient of the `-t_0` column of the arrival-time table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableCoefficient {
    /// Rational coefficient of `monomial` in `-t_0`.
    pub value: Rational,
    pub monomial: Monomial,
    /// Quartic only: the printed closed form reduced to `r * Gamma(3/4)^2`.
    pub printed_over_gamma_sq: Option<Rational>,
}

/// Closed-form (linear, harmonic) or recurrence-derived (quartic) coefficient.
pub fn closed_form_coefficient(system: TableSystem, k: u32) -> Result<TableCoefficient> {
    let monomial = system.order_monomial(k);
    let sign = if k % 2 == 0 { int(1) } else { int(-1) };
    let (value, printed) = match system {
        TableSystem::Linear => {
            let v = sign * crate::ratseries::factorial(2 * k)
                / (pow(&int(2), k as i32)
                    * crate::ratseries::factorial(k + 1)
                    * crate::ratseries::factorial(k));
            (v, None)
        }
        TableSystem::Harmonic => (sign * rat(1, 2 * k as i64 + 1), None),
        TableSystem::Quartic => {
            let local = local_toa_series(&system.potential(), k, &Arrival::origin())?;
            let derived = -local.series.coeff(&monomial);
            (derived, Some(quartic_printed_over_gamma_sq(k)))
        }
    };
    Ok(TableCoefficient {
        value,
        monomial,
        printed_over_gamma_sq: printed,
    })
}

/// Printed quartic coefficient
/// `Gamma(3/4) sqrt(pi) / 8 * (-2)^(k+1) Gamma(-k-1/4) / Gamma(1/2-k)`
/// reduced exactly with `Gamma(-1/4-k) = -4 Gamma(3/4) / prod_{j<=k}(-1/4-j)` and
/// `Gamma(1/2-k) = sqrt(pi) / prod_{j<=k}(1/2-j)`. Returns `r` where the printed
/// value equals `r * Gamma(3/4)^2`.
pub fn quartic_printed_over_gamma_sq(k: u32) -> Rational {
    let mut r = rat(1, 8) * pow(&int(-2), k as i32 + 1) * int(-4);
    for j in 1..=k as i64 {
        r = r * (rat(1, 2) - int(j)) / (rat(-1, 4) - int(j));
    }
    r
}

/// The printed quartic coefficient evaluated directly in floating point.
pub fn quartic_printed_numeric(k: u32) -> f64 {
    let k = k as f64;
    gamma(0.75) * std::f64::consts::PI.sqrt() / 8.0 * (-2.0f64).powf(k + 1.0) * gamma(-k - 0.25)
        / gamma(0.5 - k)
}
