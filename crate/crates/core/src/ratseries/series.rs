use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::monomial::{Monomial, Var, Vars};
use super::{to_f64, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Phase,
    Kernel,
}

/// Sparse exact series: canonical map from monomial to nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    space: Space,
    terms: BTreeMap<Monomial, Rational>,
}

/// Numeric values for the scalar symbols of a series.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub mu: f64,
    pub hbar: f64,
    pub symbols: BTreeMap<String, f64>,
}

impl Assignment {
    pub fn new(mu: f64, hbar: f64) -> Self {
        Assignment {
            mu,
            hbar,
            symbols: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.symbols.insert(name.to_string(), value);
        self
    }

    /// Value of `mu^d hbar^b prod(sym^e)`.
    pub fn scalar_value(&self, m: &Monomial) -> Result<f64> {
        let mut acc = checked_powi(self.mu, m.mu(), "mu")?;
        acc *= checked_powi(self.hbar, m.hbar(), "hbar")?;
        for (name, &e) in m.sym() {
            let value = self
                .symbols
                .get(name)
                .ok_or_else(|| Error::UnboundSymbol(name.clone()))?;
            acc *= checked_powi(*value, e, name)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EvalPoint {
    Phase { q: f64, x: f64, p: f64 },
    Kernel { u: f64, v: f64 },
}

fn checked_powi(base: f64, e: i32, name: &str) -> Result<f64> {
    if e < 0 && base == 0.0 {
        return Err(Error::SingularEvaluation(format!(
            "{name} = 0 raised to negative power {e}"
        )));
    }
    Ok(base.powi(e))
}

impl Series {
    pub fn zero(space: Space) -> Self {
        Series {
            space,
            terms: BTreeMap::new(),
        }
    }

    pub fn term(space: Space, coeff: Rational, mono: Monomial) -> Result<Self> {
        let mut s = Series::zero(space);
        s.add_term(mono, coeff)?;
        Ok(s)
    }

    pub fn from_terms<I>(space: Space, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut s = Series::zero(space);
        for (m, c) in terms {
            s.add_term(m, c)?;
        }
        Ok(s)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &Monomial) -> Rational {
        self.normalize(mono)
            .ok()
            .and_then(|m| self.terms.get(&m).cloned())
            .unwrap_or_else(Rational::zero)
    }

    fn normalize(&self, mono: &Monomial) -> Result<Monomial> {
        let mono = match (mono.vars(), self.space) {
            (Vars::Scalar, Space::Phase) => mono.with_vars(Vars::Phase {
                pinv: 0,
                q: 0,
                x: 0,
            }),
            (Vars::Scalar, Space::Kernel) => mono.with_vars(Vars::Kernel { v: 0, u: 0 }),
            _ => mono.clone(),
        };
        match mono.space() {
            Some(s) if s != self.space => Err(Error::SpaceMismatch {
                expected: self.space,
                found: s,
            }),
            _ if !mono.is_admissible() => {
                Err(Error::Domain(format!("negative exponent in term {mono}")))
            }
            _ => Ok(mono),
        }
    }

    /// Accumulates `coeff * mono`, dropping the entry if it cancels.
    pub fn add_term(&mut self, mono: Monomial, coeff: Rational) -> Result<()> {
        let mono = self.normalize(&mono)?;
        if coeff.is_zero() {
            return Ok(());
        }
        match self.terms.get_mut(&mono) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, coeff);
            }
        }
        Ok(())
    }

    fn check_space(&self, other: &Series) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                expected: self.space,
                found: other.space,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_space(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        Series {
            space: self.space,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Series {
        if c.is_zero() {
            return Series::zero(self.space);
        }
        Series {
            space: self.space,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Multiplies every term by `c * m`; fails if an exponent goes negative.
    pub fn scale_mono(&self, c: &Rational, m: &Monomial) -> Result<Series> {
        let mut out = Series::zero(self.space);
        if c.is_zero() {
            return Ok(out);
        }
        for (mono, v) in &self.terms {
            out.add_term(mono.mul(m)?, v * c)?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check_space(other)?;
        let mut out = Series::zero(self.space);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb)?, ca * cb)?;
            }
        }
        Ok(out)
    }

    /// Keeps the terms whose `hbar` exponent satisfies `pred`.
    pub fn filter_hbar(&self, pred: impl Fn(i32) -> bool) -> Series {
        self.filter(|m, _| pred(m.hbar()))
    }

    pub fn filter(&self, pred: impl Fn(&Monomial, &Rational) -> bool) -> Series {
        Series {
            space: self.space,
            terms: self
                .terms
                .iter()
                .filter(|(m, c)| pred(m, c))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Maps each term through `f`, summing the results into `space`.
    pub fn map_terms<F>(&self, space: Space, mut f: F) -> Result<Series>
    where
        F: FnMut(&Monomial, &Rational) -> Result<Option<(Monomial, Rational)>>,
    {
        let mut out = Series::zero(space);
        for (m, c) in &self.terms {
            if let Some((m2, c2)) = f(m, c)? {
                out.add_term(m2, c2)?;
            }
        }
        Ok(out)
    }

    /// Partial derivative; `Var::P` acts on `p` (so `p^-s -> -s p^-(s+1)`).
    pub fn derivative(&self, var: Var) -> Result<Series> {
        let ok = matches!(
            (self.space, var),
            (Space::Phase, Var::Q | Var::X | Var::P) | (Space::Kernel, Var::U | Var::V)
        );
        if !ok {
            return Err(Error::Argument(format!(
                "cannot differentiate a {:?} series by {var:?}",
                self.space
            )));
        }
        self.map_terms(self.space, |m, c| {
            let e = m.exponent(var);
            if e == 0 {
                return Ok(None);
            }
            Ok(Some((
                m.shift(var, -1),
                c * Rational::from_integer(e.into()),
            )))
        })
    }

    /// Drops kernel terms with `v` exponent above `n`.
    pub fn truncate_v(&self, n: i32) -> Series {
        self.filter(|m, _| m.v() <= n)
    }

    pub fn max_hbar(&self) -> Option<i32> {
        self.terms.keys().map(Monomial::hbar).max()
    }

    pub fn min_hbar(&self) -> Option<i32> {
        self.terms.keys().map(Monomial::hbar).min()
    }

    /// Floating evaluation; the only lossy operation on a series.
    pub fn evaluate(&self, assignment: &Assignment, point: &EvalPoint) -> Result<f64> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let spatial = match (m.vars(), point) {
                (Vars::Phase { pinv, q, x }, EvalPoint::Phase { q: qv, x: xv, p }) => {
                    if *pinv > 0 && *p == 0.0 {
                        return Err(Error::SingularEvaluation("p = 0".into()));
                    }
                    qv.powi(*q) * xv.powi(*x) * p.powi(-pinv)
                }
                (Vars::Kernel { v, u }, EvalPoint::Kernel { u: uv, v: vv }) => {
                    uv.powi(*u) * vv.powi(*v)
                }
                _ => {
                    return Err(Error::Argument(format!(
                        "evaluation point does not match {:?} series",
                        self.space
                    )))
                }
            };
            acc += to_f64(c) * assignment.scalar_value(m)? * spatial;
        }
        Ok(acc)
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            let abs = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let body = m.to_string();
            if abs.is_one() {
                write!(f, "{body}")?;
            } else if body == "1" {
                write!(f, "{abs}")?;
            } else {
                write!(f, "{abs}*{body}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratseries::{int, rat};

    fn q_over_p() -> Series {
        Series::term(Space::Phase, int(1), Monomial::phase(1, 0, 1)).unwrap()
    }

    #[test]
    fn additive_inverse_is_empty() {
        let s = q_over_p();
        assert!(s.add(&s.neg()).unwrap().is_empty());
    }

    #[test]
    fn doubling() {
        let s = Series::term(Space::Phase, int(1), Monomial::phase(1, 0, 1).with_mu(1)).unwrap();
        let d = s.add(&s).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.coeff(&Monomial::phase(1, 0, 1).with_mu(1)), int(2));
    }

    #[test]
    fn linear_table_truncation_sum() {
        let a = Series::term(Space::Kernel, rat(1, 4), Monomial::kernel(1, 0)).unwrap();
        let b = Series::term(
            Space::Kernel,
            rat(1, 32),
            Monomial::kernel(2, 2)
                .with_mu(1)
                .with_hbar(-2)
                .with_sym("lambda", 1),
        )
        .unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_string(), "1/4*u + 1/32*mu*lambda*u^2*v^2/hbar^2");
    }

    #[test]
    fn space_mismatch() {
        let k = Series::term(Space::Kernel, rat(1, 4), Monomial::kernel(1, 0)).unwrap();
        assert!(matches!(
            q_over_p().add(&k),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn scale_mono_examples() {
        let s = q_over_p()
            .scale_mono(&int(1), &Monomial::phase(0, 0, 2).with_mu(1))
            .unwrap();
        assert_eq!(s.coeff(&Monomial::phase(1, 0, 3).with_mu(1)), int(1));
        assert_eq!(s.len(), 1);

        let k = Series::term(Space::Kernel, rat(1, 4), Monomial::kernel(1, 0)).unwrap();
        let f = Monomial::kernel(4, 0)
            .with_mu(1)
            .with_sym("lambda", 1)
            .with_hbar(-2);
        let k = k.scale_mono(&rat(1, 8), &f).unwrap();
        assert_eq!(
            k.coeff(
                &Monomial::kernel(5, 0)
                    .with_mu(1)
                    .with_sym("lambda", 1)
                    .with_hbar(-2)
            ),
            rat(1, 32)
        );

        assert!(q_over_p()
            .scale_mono(&int(0), &Monomial::one())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn scale_mono_rejects_negative_exponents() {
        let err = q_over_p().scale_mono(&int(1), &Monomial::phase(-2, 0, 0));
        assert!(matches!(err, Err(Error::Domain(_))));
        let err = q_over_p().scale_mono(&int(1), &Monomial::one().with_mu(-1));
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn equality_is_canonical() {
        assert_eq!(q_over_p(), q_over_p());
        let extra = Series::term(Space::Phase, int(1), Monomial::phase(3, 0, 5).with_hbar(2))
            .unwrap()
            .add(&q_over_p())
            .unwrap();
        assert_ne!(q_over_p(), extra);
    }

    #[test]
    fn filter_hbar_keeps_matching_terms() {
        let s = Series::from_terms(
            Space::Phase,
            [
                (Monomial::phase(1, 0, 1).with_mu(1), int(-1)),
                (
                    Monomial::phase(3, 0, 5)
                        .with_mu(2)
                        .with_sym("lambda", 1)
                        .with_hbar(2),
                    int(8),
                ),
            ],
        )
        .unwrap();
        let classical = s.filter_hbar(|b| b == 0);
        assert_eq!(classical.len(), 1);
        assert_eq!(
            classical.coeff(&Monomial::phase(1, 0, 1).with_mu(1)),
            int(-1)
        );
        assert!(classical.filter_hbar(|b| b >= 1).is_empty());
    }

    #[test]
    fn evaluate_examples() {
        let t = Series::term(Space::Phase, int(-1), Monomial::phase(1, 0, 1).with_mu(1)).unwrap();
        let a = Assignment::new(1.0, 1.0);
        let v = t
            .evaluate(
                &a,
                &EvalPoint::Phase {
                    q: -1.0,
                    x: 0.0,
                    p: 2.0,
                },
            )
            .unwrap();
        assert_eq!(v, 0.5);
        let e = t.evaluate(
            &a,
            &EvalPoint::Phase {
                q: -1.0,
                x: 0.0,
                p: 0.0,
            },
        );
        assert!(matches!(e, Err(Error::SingularEvaluation(_))));

        let k = Series::term(Space::Kernel, rat(1, 4), Monomial::kernel(1, 0)).unwrap();
        assert_eq!(
            k.evaluate(&a, &EvalPoint::Kernel { u: 2.0, v: 0.0 })
                .unwrap(),
            0.5
        );
    }

    #[test]
    fn evaluate_reports_unbound_symbols() {
        let t = Series::term(
            Space::Phase,
            int(1),
            Monomial::phase(1, 0, 1).with_sym("lambda", 1),
        )
        .unwrap();
        let e = t.evaluate(
            &Assignment::new(1.0, 1.0),
            &EvalPoint::Phase {
                q: 1.0,
                x: 0.0,
                p: 1.0,
            },
        );
        assert_eq!(e, Err(Error::UnboundSymbol("lambda".into())));
    }

    #[test]
    fn derivative_in_p() {
        let t = Series::term(Space::Phase, int(-1), Monomial::phase(1, 0, 1).with_mu(1)).unwrap();
        let d = t.derivative(Var::P).unwrap();
        assert_eq!(d.coeff(&Monomial::phase(1, 0, 2).with_mu(1)), int(1));
        assert!(t.derivative(Var::U).is_err());
    }
}
