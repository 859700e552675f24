//! Polynomial potentials with symbolic coefficients.
//!
//! A potential is a sum `sum_j c_j * m_j * q^j` with exact rational `c_j` and
//! a monomial `m_j` in the mass `mu` and named parameters (`lambda`, `omega`,
//! ...). Constant terms are rejected: they drop out of both the local arrival
//! recurrence (through `V'`) and the kernel equation (through the potential
//! difference).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratseries::{
    binomial, format_rational, int, parse_rational, pow, rat, to_f64, Assignment, Monomial,
    Rational, Series, Space,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PotentialTerm {
    pub degree: u32,
    pub coeff: Rational,
    /// Scalar monomial in `mu` and named symbols; never carries `hbar`.
    pub factor: Monomial,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PolynomialPotential {
    terms: Vec<PotentialTerm>,
}

/// `V((u+v)/2) - V((u-v)/2)` keyed by `(u degree, v degree)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DifferencePoly {
    pub coeffs: BTreeMap<(u32, u32), (Rational, Monomial)>,
}

impl PolynomialPotential {
    pub fn new(mut terms: Vec<PotentialTerm>) -> Result<Self> {
        terms.retain(|t| !t.coeff.is_zero());
        terms.sort_by_key(|t| t.degree);
        for t in &terms {
            if t.degree == 0 {
                return Err(Error::Argument("constant term in potential".into()));
            }
            if !t.factor.is_symbolic_only() || !t.factor.is_admissible() {
                return Err(Error::Argument(format!(
                    "potential coefficient `{}` must be a monomial in mu and named symbols",
                    t.factor
                )));
            }
        }
        if let Some(w) = terms.windows(2).find(|w| w[0].degree == w[1].degree) {
            return Err(Error::Argument(format!("duplicate degree {}", w[0].degree)));
        }
        Ok(PolynomialPotential { terms })
    }

    /// Zero potential.
    pub fn free() -> Self {
        Self::default()
    }

    /// `lambda*q`
    pub fn linear() -> Self {
        Self::single(1, int(1), Monomial::one().with_sym("lambda", 1))
    }

    /// `1/2*mu*omega^2*q^2`
    pub fn harmonic() -> Self {
        Self::single(
            2,
            rat(1, 2),
            Monomial::one().with_mu(1).with_sym("omega", 2),
        )
    }

    /// `lambda*q^4`
    pub fn quartic() -> Self {
        Self::single(4, int(1), Monomial::one().with_sym("lambda", 1))
    }

    fn single(degree: u32, coeff: Rational, factor: Monomial) -> Self {
        PolynomialPotential {
            terms: vec![PotentialTerm {
                degree,
                coeff,
                factor,
            }],
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).parse()
    }

    pub fn terms(&self) -> &[PotentialTerm] {
        &self.terms
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.last().map_or(0, |t| t.degree)
    }

    pub fn is_even(&self) -> bool {
        self.terms.iter().all(|t| t.degree % 2 == 0)
    }

    /// Names of the symbolic parameters, sorted.
    pub fn symbols(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .terms
            .iter()
            .flat_map(|t| t.factor.sym().keys().cloned())
            .collect();
        names.sort();
        names.dedup();
        names
    }

    /// Termwise `j * c_j * q^(j-1)`; degree-0 terms are allowed in the result.
    pub fn derivative(&self) -> Vec<PotentialTerm> {
        self.terms
            .iter()
            .map(|t| PotentialTerm {
                degree: t.degree - 1,
                coeff: &t.coeff * int(t.degree as i64),
                factor: t.factor.clone(),
            })
            .collect()
    }

    /// Exact expansion of `V((u+v)/2) - V((u-v)/2)`.
    ///
    /// Degree `j` contributes `c_j 2^(1-j) C(j,b) u^(j-b) v^b` for each odd `b <= j`.
    pub fn difference_poly(&self) -> DifferencePoly {
        let mut coeffs = BTreeMap::new();
        for t in &self.terms {
            let j = t.degree;
            let scale = pow(&int(2), 1 - j as i32);
            for b in (1..=j).step_by(2) {
                let c = &t.coeff * &scale * binomial(j, b);
                coeffs.insert((j - b, b), (c, t.factor.clone()));
            }
        }
        DifferencePoly { coeffs }
    }

    pub fn value(&self, q: f64, a: &Assignment) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            acc += to_f64(&t.coeff) * a.scalar_value(&t.factor)? * q.powi(t.degree as i32);
        }
        Ok(acc)
    }

    pub fn derivative_value(&self, q: f64, a: &Assignment) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            let j = t.degree as i32;
            acc += j as f64 * to_f64(&t.coeff) * a.scalar_value(&t.factor)? * q.powi(j - 1);
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> PotentialJson {
        PotentialJson {
            terms: self
                .terms
                .iter()
                .map(|t| PotentialTermJson {
                    degree: t.degree,
                    coeff: format_rational(&t.coeff),
                    mu: t.factor.mu(),
                    sym: t.factor.sym().clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PotentialJson) -> Result<Self> {
        let mut terms = Vec::new();
        for t in &json.terms {
            let mut factor = Monomial::one().with_mu(t.mu);
            for (name, &e) in &t.sym {
                factor = factor.with_sym(name, e);
            }
            terms.push(PotentialTerm {
                degree: t.degree,
                coeff: parse_rational(&t.coeff)?,
                factor,
            });
        }
        Self::new(terms)
    }
}

impl DifferencePoly {
    /// The difference as a kernel-space series.
    pub fn to_series(&self) -> Series {
        let mut s = Series::zero(Space::Kernel);
        for (&(a, b), (c, m)) in &self.coeffs {
            let mono = m
                .mul(&Monomial::kernel(a as i32, b as i32))
                .expect("scalar factor");
            s.add_term(mono, c.clone()).expect("admissible term");
        }
        s
    }
}

/// Reparsable form, e.g. `1/2*mu*omega^2*q^2 + lambda*q^4`.
impl fmt::Display for PolynomialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let abs = t.coeff.abs();
            let mut parts = Vec::new();
            if !abs.is_one() {
                parts.push(abs.to_string());
            }
            if t.factor != Monomial::one() {
                parts.push(t.factor.to_string());
            }
            parts.push(if t.degree == 1 {
                "q".to_string()
            } else {
                format!("q^{}", t.degree)
            });
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialTermJson {
    pub degree: u32,
    pub coeff: String,
    pub mu: i32,
    pub sym: BTreeMap<String, i32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialJson {
    pub terms: Vec<PotentialTermJson>,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        self.src[start..self.pos]
            .parse()
            .or_else(|_| self.err("integer out of range"))
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let first = rest.chars().next()?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        self.pos += len;
        Some(&rest[..len])
    }

    fn parse(mut self) -> Result<PolynomialPotential> {
        if self.src.trim() == "0" {
            return Ok(PolynomialPotential::free());
        }
        let mut terms: Vec<PotentialTerm> = Vec::new();
        let mut negative = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        loop {
            let start = self.pos;
            let mut term = self.term()?;
            if negative {
                term.coeff = -term.coeff;
            }
            if terms.iter().any(|t| t.degree == term.degree) {
                self.pos = start;
                return self.err(format!("duplicate degree {}", term.degree));
            }
            terms.push(term);
            self.skip_ws();
            if self.pos == self.src.len() {
                break;
            }
            negative = if self.eat('+') {
                false
            } else if self.eat('-') {
                true
            } else {
                return self.err("expected `+` or `-`");
            };
        }
        PolynomialPotential::new(terms).map_err(|e| match e {
            Error::Argument(msg) => Error::Parse { pos: 0, msg },
            e => e,
        })
    }

    fn term(&mut self) -> Result<PotentialTerm> {
        let start = self.pos;
        let mut coeff = Rational::one();
        let mut factor = Monomial::one();
        let mut degree: Option<u32> = None;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let num = self.integer()?;
                    let value = if self.eat('/') {
                        let den = self.integer()?;
                        if den == 0 {
                            return self.err("zero denominator");
                        }
                        parse_rational(&format!("{num}/{den}"))?
                    } else {
                        parse_rational(&num.to_string())?
                    };
                    coeff *= value;
                }
                _ => {
                    let name_pos = self.pos;
                    let Some(name) = self.ident() else {
                        return self.err("expected a number or a symbol");
                    };
                    let exp = if self.eat('^') {
                        self.integer()? as i32
                    } else {
                        1
                    };
                    match name {
                        "q" => *degree.get_or_insert(0) += exp as u32,
                        "mu" => {
                            let e = factor.mu() + exp;
                            factor = factor.with_mu(e);
                        }
                        "hbar" => {
                            self.pos = name_pos;
                            return self.err("hbar may not appear in a potential");
                        }
                        "x" | "p" | "u" | "v" => {
                            self.pos = name_pos;
                            return self.err(format!("reserved variable `{name}`"));
                        }
                        _ => {
                            let e = factor.sym().get(name).copied().unwrap_or(0) + exp;
                            factor = factor.with_sym(name, e);
                        }
                    }
                }
            }
            if !self.eat('*') {
                break;
            }
        }
        match degree {
            Some(d) if d >= 1 => Ok(PotentialTerm {
                degree: d,
                coeff,
                factor,
            }),
            _ => {
                self.pos = start;
                self.err("every term needs q with degree >= 1")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_table_potentials() {
        assert_eq!(
            PolynomialPotential::parse("lambda*q").unwrap(),
            PolynomialPotential::linear()
        );
        assert_eq!(
            PolynomialPotential::parse("1/2*mu*omega^2*q^2").unwrap(),
            PolynomialPotential::harmonic()
        );
        assert_eq!(
            PolynomialPotential::parse("lambda*q^4").unwrap(),
            PolynomialPotential::quartic()
        );
    }

    #[test]
    fn parse_mixed_and_signed() {
        let v = PolynomialPotential::parse(" -q^3 + 3/4*g*q - 2*q^2").unwrap();
        let degs: Vec<_> = v
            .terms()
            .iter()
            .map(|t| (t.degree, t.coeff.clone()))
            .collect();
        assert_eq!(degs, vec![(1, rat(3, 4)), (2, int(-2)), (3, int(-1))]);
        let bare = PolynomialPotential::parse("q^6").unwrap();
        assert_eq!(bare.terms()[0].coeff, int(1));
        assert_eq!(bare.terms()[0].factor, Monomial::one());
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "q^0",
            "lambda",
            "lambda*q + q",
            "hbar*q^2",
            "2*x*q",
            "q +",
            "",
            "1/0*q",
        ] {
            assert!(
                matches!(PolynomialPotential::parse(bad), Err(Error::Parse { .. })),
                "{bad} should fail"
            );
        }
    }

    #[test]
    fn derivative_examples() {
        let d = PolynomialPotential::linear().derivative();
        assert_eq!((d[0].degree, d[0].coeff.clone()), (0, int(1)));
        let d = PolynomialPotential::harmonic().derivative();
        assert_eq!((d[0].degree, d[0].coeff.clone()), (1, int(1)));
        assert_eq!(d[0].factor, Monomial::one().with_mu(1).with_sym("omega", 2));
        let d = PolynomialPotential::quartic().derivative();
        assert_eq!((d[0].degree, d[0].coeff.clone()), (3, int(4)));
    }

    /// Expands `c[(u+v)/2]^j - c[(u-v)/2]^j` by multiplying out binomials
    /// one factor at a time.
    fn brute_difference(j: u32) -> BTreeMap<(u32, u32), Rational> {
        let half = rat(1, 2);
        let mut plus: BTreeMap<(u32, u32), Rational> = BTreeMap::from([((0, 0), int(1))]);
        let mut minus = plus.clone();
        for _ in 0..j {
            let mut np = BTreeMap::new();
            let mut nm = BTreeMap::new();
            for ((a, b), c) in &plus {
                *np.entry((a + 1, *b)).or_insert_with(Rational::zero) += c * &half;
                *np.entry((*a, b + 1)).or_insert_with(Rational::zero) += c * &half;
            }
            for ((a, b), c) in &minus {
                *nm.entry((a + 1, *b)).or_insert_with(Rational::zero) += c * &half;
                *nm.entry((*a, b + 1)).or_insert_with(Rational::zero) -= c * &half;
            }
            plus = np;
            minus = nm;
        }
        let mut out = BTreeMap::new();
        for (k, c) in plus {
            let d = c - minus.get(&k).cloned().unwrap_or_else(Rational::zero);
            if !d.is_zero() {
                out.insert(k, d);
            }
        }
        out
    }

    fn plain(d: &DifferencePoly) -> BTreeMap<(u32, u32), Rational> {
        d.coeffs.iter().map(|(k, (c, _))| (*k, c.clone())).collect()
    }

    #[test]
    fn difference_poly_examples() {
        let lin = PolynomialPotential::linear().difference_poly();
        assert_eq!(plain(&lin), BTreeMap::from([((0, 1), int(1))]));
        assert_eq!(plain(&lin), brute_difference(1));

        let harm = PolynomialPotential::harmonic().difference_poly();
        assert_eq!(plain(&harm), BTreeMap::from([((1, 1), rat(1, 2))]));
        assert_eq!(
            harm.coeffs[&(1, 1)].1,
            Monomial::one().with_mu(1).with_sym("omega", 2)
        );
        // 1/2 * mu omega^2 * (uv) from the brute expansion of q^2
        let brute: BTreeMap<_, _> = brute_difference(2)
            .into_iter()
            .map(|(k, c)| (k, c * rat(1, 2)))
            .collect();
        assert_eq!(brute, BTreeMap::from([((1, 1), rat(1, 2))]));

        let quart = PolynomialPotential::quartic().difference_poly();
        assert_eq!(
            plain(&quart),
            BTreeMap::from([((3, 1), rat(1, 2)), ((1, 3), rat(1, 2))])
        );
        assert_eq!(plain(&quart), brute_difference(4));
    }

    #[test]
    fn json_echo_roundtrip() {
        let v = PolynomialPotential::parse("1/2*mu*omega^2*q^2 - 3*g*q^5").unwrap();
        let text = serde_json::to_string(&v.to_json()).unwrap();
        let back: PotentialJson = serde_json::from_str(&text).unwrap();
        assert_eq!(PolynomialPotential::from_json(&back).unwrap(), v);
    }

    fn arb_potential() -> impl Strategy<Value = PolynomialPotential> {
        prop::collection::btree_map(1u32..=6, (-9i64..=9, 1i64..=5, 0i32..=2), 1..4).prop_map(|m| {
            let terms = m
                .into_iter()
                .filter(|(_, (n, _, _))| *n != 0)
                .map(|(degree, (n, d, e))| PotentialTerm {
                    degree,
                    coeff: rat(n, d),
                    factor: Monomial::one().with_sym("g", e),
                })
                .collect();
            PolynomialPotential::new(terms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn difference_has_only_odd_v(v in arb_potential()) {
            let d = v.difference_poly();
            prop_assert!(d.coeffs.keys().all(|(a, b)| b % 2 == 1 && a + b <= v.max_degree()));
        }

        #[test]
        fn difference_matches_direct_evaluation(
            v in arb_potential(), u in -2.0f64..2.0, w in -2.0f64..2.0, g in 0.5f64..1.5
        ) {
            let a = Assignment::new(1.0, 1.0).with("g", g);
            let direct = v.value((u + w) / 2.0, &a).unwrap() - v.value((u - w) / 2.0, &a).unwrap();
            let series = v.difference_poly().to_series();
            let got = series.evaluate(&a, &crate::ratseries::EvalPoint::Kernel { u, v: w }).unwrap();
            let scale = 1.0 + direct.abs();
            prop_assert!((direct - got).abs() <= 1e-12 * scale);
        }

        #[test]
        fn integrating_the_derivative_recovers_v(v in arb_potential()) {
            let back: Vec<PotentialTerm> = v
                .derivative()
                .into_iter()
                .map(|t| PotentialTerm {
                    degree: t.degree + 1,
                    coeff: t.coeff / int(t.degree as i64 + 1),
                    factor: t.factor,
                })
                .collect();
            prop_assert_eq!(PolynomialPotential::new(back).unwrap(), v);
        }

        #[test]
        fn display_reparses(v in arb_potential()) {
            prop_assert_eq!(PolynomialPotential::parse(&v.to_string()).unwrap(), v);
        }
    }
}
