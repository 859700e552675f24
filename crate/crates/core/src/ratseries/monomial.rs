use std::collections::BTreeMap;
use std::fmt;

use super::series::Space;
use crate::error::{Error, Result};

/// Spatial part of a monomial.
///
/// Variant field order fixes the canonical term order: phase terms sort by
/// `1/p` power first, kernel terms by `v` power first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vars {
    /// No spatial variables; compatible with either space as a factor.
    Scalar,
    Phase {
        pinv: i32,
        q: i32,
        x: i32,
    },
    Kernel {
        v: i32,
        u: i32,
    },
}

/// A single variable with respect to which a series can be differentiated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Q,
    X,
    P,
    U,
    V,
}

/// `mu^mu * hbar^hbar * prod(sym^e) * (spatial part)`.
///
/// Exponents are signed so that a monomial can act as a multiplier that
/// lowers a power (for example `mu^-1`). Terms stored in a [`Series`] are
/// always admissible: every exponent other than `hbar` is non-negative.
///
/// [`Series`]: super::Series
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    vars: Vars,
    hbar: i32,
    mu: i32,
    sym: BTreeMap<String, i32>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial {
            vars: Vars::Scalar,
            hbar: 0,
            mu: 0,
            sym: BTreeMap::new(),
        }
    }

    /// `q^q x^x p^-pinv`
    pub fn phase(q: i32, x: i32, pinv: i32) -> Self {
        Monomial {
            vars: Vars::Phase { pinv, q, x },
            ..Self::one()
        }
    }

    /// `u^u v^v`
    pub fn kernel(u: i32, v: i32) -> Self {
        Monomial {
            vars: Vars::Kernel { v, u },
            ..Self::one()
        }
    }

    pub fn with_mu(mut self, e: i32) -> Self {
        self.mu = e;
        self
    }

    pub fn with_hbar(mut self, e: i32) -> Self {
        self.hbar = e;
        self
    }

    pub fn with_sym(mut self, name: &str, e: i32) -> Self {
        if e == 0 {
            self.sym.remove(name);
        } else {
            self.sym.insert(name.to_string(), e);
        }
        self
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn mu(&self) -> i32 {
        self.mu
    }

    pub fn hbar(&self) -> i32 {
        self.hbar
    }

    pub fn sym(&self) -> &BTreeMap<String, i32> {
        &self.sym
    }

    pub fn space(&self) -> Option<Space> {
        match self.vars {
            Vars::Scalar => None,
            Vars::Phase { .. } => Some(Space::Phase),
            Vars::Kernel { .. } => Some(Space::Kernel),
        }
    }

    pub fn q(&self) -> i32 {
        match self.vars {
            Vars::Phase { q, .. } => q,
            _ => 0,
        }
    }

    pub fn x(&self) -> i32 {
        match self.vars {
            Vars::Phase { x, .. } => x,
            _ => 0,
        }
    }

    pub fn pinv(&self) -> i32 {
        match self.vars {
            Vars::Phase { pinv, .. } => pinv,
            _ => 0,
        }
    }

    pub fn u(&self) -> i32 {
        match self.vars {
            Vars::Kernel { u, .. } => u,
            _ => 0,
        }
    }

    pub fn v(&self) -> i32 {
        match self.vars {
            Vars::Kernel { v, .. } => v,
            _ => 0,
        }
    }

    /// The same monomial with the spatial part dropped.
    pub fn scalar_part(&self) -> Monomial {
        Monomial {
            vars: Vars::Scalar,
            ..self.clone()
        }
    }

    /// True when the monomial carries only `mu` and named symbols.
    pub fn is_symbolic_only(&self) -> bool {
        self.vars == Vars::Scalar && self.hbar == 0
    }

    /// Every exponent except `hbar` is non-negative.
    pub fn is_admissible(&self) -> bool {
        let vars_ok = match self.vars {
            Vars::Scalar => true,
            Vars::Phase { pinv, q, x } => pinv >= 0 && q >= 0 && x >= 0,
            Vars::Kernel { v, u } => v >= 0 && u >= 0,
        };
        vars_ok && self.mu >= 0 && self.sym.values().all(|&e| e >= 0)
    }

    /// Product of two monomials; mixing phase and kernel variables fails.
    pub fn mul(&self, other: &Monomial) -> Result<Monomial> {
        let vars = match (&self.vars, &other.vars) {
            (Vars::Scalar, v) | (v, Vars::Scalar) => v.clone(),
            (
                Vars::Phase { pinv, q, x },
                Vars::Phase {
                    pinv: p2,
                    q: q2,
                    x: x2,
                },
            ) => Vars::Phase {
                pinv: pinv + p2,
                q: q + q2,
                x: x + x2,
            },
            (Vars::Kernel { v, u }, Vars::Kernel { v: v2, u: u2 }) => Vars::Kernel {
                v: v + v2,
                u: u + u2,
            },
            (a, _) => {
                let (expected, found) = if matches!(a, Vars::Phase { .. }) {
                    (Space::Phase, Space::Kernel)
                } else {
                    (Space::Kernel, Space::Phase)
                };
                return Err(Error::SpaceMismatch { expected, found });
            }
        };
        let mut sym = self.sym.clone();
        for (name, e) in &other.sym {
            let entry = sym.entry(name.clone()).or_insert(0);
            *entry += e;
            if *entry == 0 {
                sym.remove(name);
            }
        }
        Ok(Monomial {
            vars,
            hbar: self.hbar + other.hbar,
            mu: self.mu + other.mu,
            sym,
        })
    }

    /// Integer power of the monomial.
    pub fn powi(&self, n: i32) -> Monomial {
        let vars = match self.vars {
            Vars::Scalar => Vars::Scalar,
            Vars::Phase { pinv, q, x } => Vars::Phase {
                pinv: pinv * n,
                q: q * n,
                x: x * n,
            },
            Vars::Kernel { v, u } => Vars::Kernel { v: v * n, u: u * n },
        };
        let sym = if n == 0 {
            BTreeMap::new()
        } else {
            self.sym.iter().map(|(k, e)| (k.clone(), e * n)).collect()
        };
        Monomial {
            vars,
            hbar: self.hbar * n,
            mu: self.mu * n,
            sym,
        }
    }

    pub(crate) fn with_vars(&self, vars: Vars) -> Monomial {
        Monomial {
            vars,
            ..self.clone()
        }
    }

    /// Exponent of a spatial variable, zero when absent.
    pub fn exponent(&self, var: Var) -> i32 {
        match var {
            Var::Q => self.q(),
            Var::X => self.x(),
            Var::P => -self.pinv(),
            Var::U => self.u(),
            Var::V => self.v(),
        }
    }

    /// Adds `delta` to the exponent of `var`; `P` moves `p`, not `1/p`.
    pub(crate) fn shift(&self, var: Var, delta: i32) -> Monomial {
        let vars = match (self.vars.clone(), var) {
            (Vars::Phase { pinv, q, x }, Var::Q) => Vars::Phase {
                pinv,
                q: q + delta,
                x,
            },
            (Vars::Phase { pinv, q, x }, Var::X) => Vars::Phase {
                pinv,
                q,
                x: x + delta,
            },
            (Vars::Phase { pinv, q, x }, Var::P) => Vars::Phase {
                pinv: pinv - delta,
                q,
                x,
            },
            (Vars::Kernel { v, u }, Var::U) => Vars::Kernel { v, u: u + delta },
            (Vars::Kernel { v, u }, Var::V) => Vars::Kernel { v: v + delta, u },
            (other, _) => other,
        };
        self.with_vars(vars)
    }
}

impl Default for Monomial {
    fn default() -> Self {
        Self::one()
    }
}

fn push_factor(num: &mut Vec<String>, den: &mut Vec<String>, name: &str, e: i32) {
    match e {
        0 => {}
        1 => num.push(name.to_string()),
        -1 => den.push(name.to_string()),
        e if e > 0 => num.push(format!("{name}^{e}")),
        e => den.push(format!("{name}^{}", -e)),
    }
}

/// Renders as `mu^2*lambda*q^2/p^3`; the unit monomial renders as `1`.
impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut num = Vec::new();
        let mut den = Vec::new();
        push_factor(&mut num, &mut den, "mu", self.mu);
        push_factor(&mut num, &mut den, "hbar", self.hbar);
        for (name, &e) in &self.sym {
            push_factor(&mut num, &mut den, name, e);
        }
        match self.vars {
            Vars::Scalar => {}
            Vars::Phase { pinv, q, x } => {
                push_factor(&mut num, &mut den, "q", q);
                push_factor(&mut num, &mut den, "x", x);
                push_factor(&mut num, &mut den, "p", -pinv);
            }
            Vars::Kernel { v, u } => {
                push_factor(&mut num, &mut den, "u", u);
                push_factor(&mut num, &mut den, "v", v);
            }
        }
        let numer = if num.is_empty() {
            "1".to_string()
        } else {
            num.join("*")
        };
        match den.len() {
            0 => write!(f, "{numer}"),
            1 => write!(f, "{numer}/{}", den[0]),
            _ => write!(f, "{numer}/({})", den.join("*")),
        }
    }
}
