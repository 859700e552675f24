//! Power-series solution of the time kernel equation.
//!
//! In the coordinates `u = q + q'`, `v = q - q'` the kernel satisfies
//!
//! ```text
//! -(2 hbar^2 / mu) T_uv + D(u, v) T = 0,   D = V((u+v)/2) - V((u-v)/2)
//! T(u, 0) = u / 4,   T(0, v) = 0
//! ```
//!
//! With `T = sum a_{m,n} u^m v^n` this is a Goursat problem: the boundary
//! fixes `a_{m,0}` and `a_{0,n}`, and every interior coefficient follows from
//!
//! ```text
//! a_{m+1,n+1} = mu / (2 hbar^2) / ((m+1)(n+1)) * sum_{(a,b) in D} d_{a,b} a_{m-a,n-b}
//! ```
//!
//! Since every `b` is odd and at least one, each column depends only on
//! columns of strictly lower `v` degree, and the solution is built column by
//! column by pushing terms forward from the seed `u/4`.

use std::collections::BTreeMap;

use num_traits::Zero;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::potential::PolynomialPotential;
use crate::ratseries::{
    binomial, factorial, int, pow, rat, Monomial, Rational, Series, Space, Var,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeKernel {
    /// `T(u, v)` truncated to `v` degree at most `v_order`.
    pub series: Series,
    pub v_order: u32,
    pub potential: PolynomialPotential,
}

impl TimeKernel {
    /// Wraps an arbitrary kernel series, e.g. a hand-built or perturbed one.
    pub fn from_series(
        series: Series,
        v_order: u32,
        potential: PolynomialPotential,
    ) -> Result<Self> {
        if series.space() != Space::Kernel {
            return Err(Error::SpaceMismatch {
                expected: Space::Kernel,
                found: series.space(),
            });
        }
        Ok(TimeKernel {
            series,
            v_order,
            potential,
        })
    }

    /// The free-particle kernel `u/4`.
    pub fn free() -> Self {
        TimeKernel {
            series: seed(),
            v_order: 0,
            potential: PolynomialPotential::free(),
        }
    }
}

fn seed() -> Series {
    Series::term(Space::Kernel, rat(1, 4), Monomial::kernel(1, 0)).expect("admissible")
}

/// Solves the kernel equation through `v^order`; `order` must be even.
pub fn solve_time_kernel(v: &PolynomialPotential, order: u32) -> Result<TimeKernel> {
    if order % 2 == 1 {
        return Err(Error::Argument(format!(
            "kernel order must be even, got {order}"
        )));
    }
    let diff = v.difference_poly();
    let step = Monomial::one().with_mu(1).with_hbar(-2);
    let mut columns: Vec<Series> = vec![seed()];
    for target in 1..=order {
        let mut col = Series::zero(Space::Kernel);
        for (&(a, b), (d, factor)) in &diff.coeffs {
            let Some(source) = (target as i64 - 1 - b as i64).try_into().ok() else {
                continue;
            };
            let source: usize = source;
            for (m, alpha) in columns[source].iter() {
                let new_u = m.u() + a as i32 + 1;
                let denom = int(new_u as i64) * int(target as i64);
                let coeff = rat(1, 2) * d * alpha / denom;
                let mono = m
                    .scalar_part()
                    .mul(factor)?
                    .mul(&step)?
                    .mul(&Monomial::kernel(new_u, target as i32))?;
                col.add_term(mono, coeff)?;
            }
        }
        columns.push(col);
    }
    let mut series = Series::zero(Space::Kernel);
    for col in &columns {
        series = series.add(col)?;
    }
    Ok(TimeKernel {
        series,
        v_order: order,
        potential: v.clone(),
    })
}

/// `mu` times the left side of the kernel equation,
/// `-2 hbar^2 T_uv + mu D T`, truncated to `v^order`.
///
/// Scaling by `mu` keeps every coefficient polynomial in `mu`; the residual
/// vanishes iff the unscaled one does.
pub fn pde_residual(t: &TimeKernel) -> Result<Series> {
    let tuv = t.series.derivative(Var::U)?.derivative(Var::V)?;
    let kinetic = tuv.scale_mono(&int(-2), &Monomial::one().with_hbar(2))?;
    let d = t.potential.difference_poly().to_series();
    let potential = d
        .mul(&t.series)?
        .scale_mono(&int(1), &Monomial::one().with_mu(1))?;
    Ok(kinetic.add(&potential)?.truncate_v(t.v_order as i32))
}

/// Outcome of the three boundary conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryReport {
    /// `T(u, 0) = u/4`, i.e. `T(q, q) = q/2`.
    pub diagonal: bool,
    /// `T(0, v) = 0`, i.e. `T(q, -q) = 0`.
    pub antidiagonal: bool,
    /// `d/dq T(q,q) + d1 T(q,q) + d2 T(q,q) = 1`, evaluated in `(q, q')` form.
    pub composite: bool,
}

impl BoundaryReport {
    pub fn passed(&self) -> bool {
        self.diagonal && self.antidiagonal && self.composite
    }
}

pub fn boundary_report(t: &TimeKernel) -> Result<BoundaryReport> {
    let row = t.series.filter(|m, _| m.v() == 0);
    let diagonal = row == seed();
    let antidiagonal = t.series.iter().all(|(m, _)| m.u() > 0);

    // Restrict the (q, q') polynomial and its partials to the diagonal q' = q.
    let mut total: BTreeMap<(i32, Monomial), Rational> = BTreeMap::new();
    let mut push = |deg: i32, factor: &Monomial, c: Rational| {
        if deg >= 0 && !c.is_zero() {
            *total
                .entry((deg, factor.clone()))
                .or_insert_with(Rational::zero) += c;
        }
    };
    for term in kernel_to_qq(t) {
        let (i, j) = (term.q as i32, term.qp as i32);
        // d/dq of T(q, q)
        push(i + j - 1, &term.factor, &term.coeff * int((i + j) as i64));
        // first-slot partial on the diagonal
        push(i + j - 1, &term.factor, &term.coeff * int(i as i64));
        // second-slot partial on the diagonal
        push(i + j - 1, &term.factor, &term.coeff * int(j as i64));
    }
    total.retain(|_, c| !c.is_zero());
    let composite = total.len() == 1 && total.get(&(0, Monomial::one())) == Some(&int(1));
    Ok(BoundaryReport {
        diagonal,
        antidiagonal,
        composite,
    })
}

pub fn check_boundary(t: &TimeKernel) -> bool {
    boundary_report(t).map(|r| r.passed()).unwrap_or(false)
}

/// Coefficient of `q^q q'^qp` with its scalar factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QqTerm {
    pub q: u32,
    pub qp: u32,
    pub coeff: Rational,
    pub factor: Monomial,
}

/// Expands `u^m v^n = (q+q')^m (q-q')^n`.
pub fn kernel_to_qq(t: &TimeKernel) -> Vec<QqTerm> {
    series_to_qq(&t.series)
}

pub fn series_to_qq(s: &Series) -> Vec<QqTerm> {
    let mut acc: BTreeMap<(u32, u32, Monomial), Rational> = BTreeMap::new();
    for (mono, c) in s.iter() {
        let (m, n) = (mono.u() as u32, mono.v() as u32);
        let factor = mono.scalar_part();
        for i in 0..=m {
            let ci = binomial(m, i);
            for j in 0..=n {
                // (q - q')^n = sum_j C(n,j) q^j (-q')^(n-j)
                let sign = if (n - j) % 2 == 0 { int(1) } else { int(-1) };
                let key = (i + j, m - i + n - j, factor.clone());
                *acc.entry(key).or_insert_with(Rational::zero) += c * &ci * binomial(n, j) * sign;
            }
        }
    }
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((q, qp, factor), coeff)| QqTerm {
            q,
            qp,
            coeff,
            factor,
        })
        .collect()
}

/// Inverse of [`series_to_qq`] via `q = (u+v)/2`, `q' = (u-v)/2`.
pub fn qq_to_series(terms: &[QqTerm]) -> Result<Series> {
    let mut out = Series::zero(Space::Kernel);
    for t in terms {
        let scale = pow(&rat(1, 2), (t.q + t.qp) as i32);
        for a in 0..=t.q {
            for b in 0..=t.qp {
                // (u+v)^q (u-v)^qp
                let sign = if b % 2 == 0 { int(1) } else { int(-1) };
                let c = &t.coeff * &scale * binomial(t.q, a) * binomial(t.qp, b) * sign;
                let u = (t.q - a) + (t.qp - b);
                let v = a + b;
                out.add_term(t.factor.mul(&Monomial::kernel(u as i32, v as i32))?, c)?;
            }
        }
    }
    Ok(out)
}

/// Rational constants of the quartic kernel, defined for `n >= 2m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaTable {
    values: BTreeMap<(u32, u32), Rational>,
    order: u32,
}

impl DeltaTable {
    /// Zero outside `n >= 2m`; panics past the computed order.
    pub fn get(&self, m: u32, n: u32) -> Rational {
        assert!(
            n <= self.order,
            "Delta table only computed to n = {}",
            self.order
        );
        self.values
            .get(&(m, n))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.values.iter()
    }
}

/// `(4n+1-6m) n D_{m,n} = D_{m,n-1} + D_{m-1,n-2}`, `D_{0,0} = 1`.
pub fn delta_table(order: u32) -> Result<DeltaTable> {
    let mut values: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
    let get = |values: &BTreeMap<(u32, u32), Rational>, m: i64, n: i64| -> Rational {
        if m < 0 || n < 0 {
            return Rational::zero();
        }
        values
            .get(&(m as u32, n as u32))
            .cloned()
            .unwrap_or_else(Rational::zero)
    };
    values.insert((0, 0), int(1));
    for n in 1..=order {
        for m in 0..=n / 2 {
            let factor = (4 * n as i64 + 1 - 6 * m as i64) * n as i64;
            if factor == 0 {
                return Err(Error::Degenerate { m, n });
            }
            let rhs =
                get(&values, m as i64, n as i64 - 1) + get(&values, m as i64 - 1, n as i64 - 2);
            let value = rhs / int(factor);
            if !value.is_zero() {
                values.insert((m, n), value);
            }
        }
    }
    Ok(DeltaTable { values, order })
}

/// Closed-form linear kernel coefficient of `u^(k+1) v^(2k)`:
/// `(1/4) / (k! (k+1)!) (mu lambda / 4)^k hbar^(-2k)`.
pub fn linear_kernel_coefficient(k: u32) -> (Rational, Monomial) {
    let ki = k as i32;
    let c = rat(1, 4) / (factorial(k) * factorial(k + 1)) * pow(&rat(1, 4), ki);
    let m = Monomial::kernel(ki + 1, 2 * ki)
        .with_mu(ki)
        .with_sym("lambda", ki)
        .with_hbar(-2 * ki);
    (c, m)
}

/// Closed-form harmonic kernel coefficient of `u^(2k+1) v^(2k)`:
/// `(1/4) / (2k+1)! (mu omega / 2)^(2k) hbar^(-2k)`.
pub fn harmonic_kernel_coefficient(k: u32) -> (Rational, Monomial) {
    let ki = k as i32;
    let c = rat(1, 4) / factorial(2 * k + 1) * pow(&rat(1, 2), 2 * ki);
    let m = Monomial::kernel(2 * ki + 1, 2 * ki)
        .with_mu(2 * ki)
        .with_sym("omega", 2 * ki)
        .with_hbar(-2 * ki);
    (c, m)
}

/// Quartic kernel coefficient of `u^(4n+1-6m) v^(2n)` from the Delta table:
/// `(1/4) D_{m,n} (mu lambda / 8)^(n-m) hbar^(-2(n-m))`.
pub fn quartic_kernel_coefficient(delta: &DeltaTable, m: u32, n: u32) -> (Rational, Monomial) {
    let r = n as i32 - m as i32;
    let c = rat(1, 4) * delta.get(m, n) * pow(&rat(1, 8), r);
    let mono = Monomial::kernel(4 * n as i32 + 1 - 6 * m as i32, 2 * n as i32)
        .with_mu(r)
        .with_sym("lambda", r)
        .with_hbar(-2 * r);
    (c, mono)
}

/// Printed `D_{0,n} = (4^(n+2) n! Gamma(3/4))^-1 (-1)^n Gamma(-1/4-n)`, reduced
/// exactly through `Gamma(-1/4-n) = -4 Gamma(3/4) / prod_{j<=n}(-1/4-j)`.
pub fn printed_delta0_exact(n: u32) -> Rational {
    let mut prod = int(1);
    for j in 1..=n as i64 {
        prod *= rat(-1, 4) - int(j);
    }
    let sign = if n % 2 == 0 { int(1) } else { int(-1) };
    sign * int(-4) / (pow(&int(4), n as i32 + 2) * factorial(n) * prod)
}

/// The printed `D_{0,n}` evaluated in floating point.
pub fn printed_delta0_numeric(n: u32) -> f64 {
    let nf = n as f64;
    let fact: f64 = (1..=n).map(f64::from).product();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * gamma(-0.25 - nf) / (4f64.powi(n as i32 + 2) * fact * gamma(0.75))
}
