//! Canonical JSON term encoding.
//!
//! A phase term is `{"coeff":"n/d","mu":d,"hbar":b,"sym":{..},"q":a,"x":w,"pinv":s}`
//! and a kernel term swaps the last three keys for `"u"` and `"v"`. Arrays of
//! terms are always emitted in canonical monomial order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::monomial::{Monomial, Vars};
use super::series::{Series, Space};
use super::{format_rational, parse_rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub mu: i32,
    pub hbar: i32,
    pub sym: BTreeMap<String, i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinv: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<i32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub space: Space,
    pub terms: Vec<TermJson>,
}

impl TermJson {
    fn monomial(&self) -> Result<Monomial> {
        let phase = self.q.is_some() || self.x.is_some() || self.pinv.is_some();
        let kernel = self.u.is_some() || self.v.is_some();
        let base = match (phase, kernel) {
            (true, true) => {
                return Err(Error::Argument(
                    "term mixes phase and kernel exponents".into(),
                ))
            }
            (false, true) => Monomial::kernel(self.u.unwrap_or(0), self.v.unwrap_or(0)),
            _ => Monomial::phase(
                self.q.unwrap_or(0),
                self.x.unwrap_or(0),
                self.pinv.unwrap_or(0),
            ),
        };
        let mut m = base.with_mu(self.mu).with_hbar(self.hbar);
        for (name, &e) in &self.sym {
            m = m.with_sym(name, e);
        }
        Ok(m)
    }
}

impl Series {
    pub fn to_json_terms(&self) -> Vec<TermJson> {
        self.iter()
            .map(|(m, c)| {
                let (q, x, pinv, u, v) = match *m.vars() {
                    Vars::Phase { pinv, q, x } => (Some(q), Some(x), Some(pinv), None, None),
                    Vars::Kernel { v, u } => (None, None, None, Some(u), Some(v)),
                    Vars::Scalar => (None, None, None, None, None),
                };
                TermJson {
                    coeff: format_rational(c),
                    mu: m.mu(),
                    hbar: m.hbar(),
                    sym: m.sym().clone(),
                    q,
                    x,
                    pinv,
                    u,
                    v,
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            space: self.space(),
            terms: self.to_json_terms(),
        }
    }

    pub fn from_json(json: &SeriesJson) -> Result<Series> {
        let mut s = Series::zero(json.space);
        for t in &json.terms {
            s.add_term(t.monomial()?, parse_rational(&t.coeff)?)?;
        }
        Ok(s)
    }
}
