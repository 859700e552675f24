//! Bridges between kernel and phase-space series.
//!
//! The stored kernel `T(u, v)` is the real factor of the operator kernel
//! `(mu / i hbar) T(u, v) sgn(v)`. Its phase-space image at `u = 2q` follows
//! term by term:
//!
//! ```text
//! a u^m v^n  ->  2 mu a n! i^-(n+2) (2q)^m hbar^n p^-(n+1)      (n even)
//! ```
//!
//! Weyl quantization of a series in odd inverse powers of `p` is the exact
//! inverse of that rule:
//!
//! ```text
//! c q^a p^-s  ->  c i^(s+1) / (2 mu (s-1)!) 2^-a hbar^-(s-1) u^a v^(s-1)   (s odd)
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{solve_time_kernel, TimeKernel};
use crate::potential::PolynomialPotential;
use crate::ratseries::{factorial, int, pow, Monomial, Rational, Series, Space, TermJson};
use crate::toa_local::{local_toa_series, Arrival};

/// `i^(2j)` for even exponents.
fn i_even(e: i32) -> Rational {
    debug_assert!(e % 2 == 0);
    if (e / 2).rem_euclid(2) == 0 {
        int(1)
    } else {
        int(-1)
    }
}

fn expect_space(s: &Series, space: Space) -> Result<()> {
    if s.space() != space {
        return Err(Error::SpaceMismatch {
            expected: space,
            found: s.space(),
        });
    }
    Ok(())
}

fn kernel_series_to_phase(s: &Series) -> Result<Series> {
    expect_space(s, Space::Kernel)?;
    s.map_terms(Space::Phase, |m, a| {
        let (u, v) = (m.u(), m.v());
        if v % 2 != 0 {
            return Err(Error::Convention(format!(
                "kernel term {m} has odd v power; the stored kernel must be even in v"
            )));
        }
        let c = int(2) * a * factorial(v as u32) * i_even(-(v + 2)) * pow(&int(2), u);
        let mono = m
            .scalar_part()
            .mul(&Monomial::one().with_mu(1).with_hbar(v))?
            .mul(&Monomial::phase(u, 0, v + 1))?;
        Ok(Some((mono, c)))
    })
}

/// Phase-space image of the kernel.
pub fn t_hbar_transform(t: &TimeKernel) -> Result<Series> {
    kernel_series_to_phase(&t.series)
}

/// Weyl kernel of a phase-space series in odd inverse powers of `p`.
pub fn weyl_kernel(t: &Series) -> Result<Series> {
    expect_space(t, Space::Phase)?;
    t.map_terms(Space::Kernel, |m, c| {
        let (a, s) = (m.q(), m.pinv());
        if m.x() != 0 {
            return Err(Error::Unsupported(format!(
                "term {m} depends on the arrival point; substitute it first"
            )));
        }
        if s < 1 || s % 2 == 0 {
            return Err(Error::Unsupported(format!(
                "term {m} is not an odd inverse power of p"
            )));
        }
        if m.hbar() != 0 {
            return Err(Error::Argument(format!("term {m} already carries hbar")));
        }
        let coeff = c * i_even(s + 1) / (int(2) * factorial(s as u32 - 1)) * pow(&int(2), -a);
        let mono = m
            .scalar_part()
            .mul(&Monomial::one().with_mu(-1).with_hbar(-(s - 1)))?
            .mul(&Monomial::kernel(a, s - 1))?;
        Ok(Some((mono, coeff)))
    })
}

/// Inverse of [`weyl_kernel`].
pub fn weyl_inverse(k: &Series) -> Result<Series> {
    kernel_series_to_phase(k)
}

/// The `hbar^0` part; any negative `hbar` power is an error.
pub fn classical_limit(t: &Series) -> Result<Series> {
    if let Some(h) = t.min_hbar().filter(|&h| h < 0) {
        return Err(Error::GradingViolation(h));
    }
    Ok(t.filter_hbar(|h| h == 0))
}

/// Phase-space image of the free-particle ambiguity kernel
/// `c mu hbar^-1 |q - q'|`: `-2 c mu hbar / p^2`.
pub fn ambiguity_transform(c: &Rational) -> Series {
    let mono = Monomial::phase(0, 0, 2).with_mu(1).with_hbar(1);
    Series::term(Space::Phase, c * int(-2), mono).expect("admissible")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemClass {
    Exact,
    HbarCorrected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonReport {
    pub system_class: SystemClass,
    /// `hbar^0` part of the transformed kernel equals `t_0`.
    pub classical_match: bool,
    /// Positive `hbar` powers present in the transformed kernel.
    pub correction_orders: BTreeSet<i32>,
    /// The Weyl kernel of `t_0` equals the whole solved kernel.
    pub weyl_equals_kernel: bool,
    /// The Weyl kernel equals the `hbar + v = 0` part of the solved kernel.
    pub weyl_matches_leading_family: bool,
    /// Solved kernel minus Weyl kernel.
    pub delta_series: Series,
}

impl ComparisonReport {
    /// Internal consistency of the two pipelines.
    pub fn consistent(&self) -> bool {
        let exact = self.system_class == SystemClass::Exact;
        self.classical_match
            && self.weyl_matches_leading_family
            && self.correction_orders.iter().all(|&h| h >= 2 && h % 2 == 0)
            && self.delta_series.iter().all(|(m, _)| m.hbar() + m.v() >= 2)
            && exact == self.delta_series.is_empty()
            && exact == self.correction_orders.is_empty()
            && exact == self.weyl_equals_kernel
    }

    pub fn to_json(&self) -> ComparisonJson {
        ComparisonJson {
            system_class: self.system_class,
            classical_match: self.classical_match,
            correction_orders: self.correction_orders.iter().copied().collect(),
            weyl_equals_kernel: self.weyl_equals_kernel,
            weyl_matches_leading_family: self.weyl_matches_leading_family,
            delta_terms: self.delta_series.to_json_terms(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonJson {
    pub system_class: SystemClass,
    pub classical_match: bool,
    pub correction_orders: Vec<i32>,
    pub weyl_equals_kernel: bool,
    pub weyl_matches_leading_family: bool,
    pub delta_terms: Vec<TermJson>,
}

/// Runs both pipelines at kernel order `order` (local depth `order / 2`).
pub fn verify_correspondence(v: &PolynomialPotential, order: u32) -> Result<ComparisonReport> {
    if order % 2 == 1 {
        return Err(Error::Argument(format!(
            "kernel order must be even, got {order}"
        )));
    }
    let kernel = solve_time_kernel(v, order)?;
    let t0 = local_toa_series(v, order / 2, &Arrival::origin())?.series;
    let transformed = t_hbar_transform(&kernel)?;
    let weyl = weyl_kernel(&t0)?;

    let classical_match = classical_limit(&transformed)? == t0;
    let correction_orders: BTreeSet<i32> = transformed
        .iter()
        .map(|(m, _)| m.hbar())
        .filter(|&h| h != 0)
        .collect();
    let leading = kernel.series.filter(|m, _| m.hbar() + m.v() == 0);
    let delta_series = kernel.series.sub(&weyl)?;
    let system_class = if delta_series.is_empty() {
        SystemClass::Exact
    } else {
        SystemClass::HbarCorrected
    };
    Ok(ComparisonReport {
        system_class,
        classical_match,
        correction_orders,
        weyl_equals_kernel: weyl == kernel.series,
        weyl_matches_leading_family: weyl == leading,
        delta_series,
    })
}
