//! JSON instance files.
//!
//! ```json
//! {"p":3,"s":4,"modulus":[2,1,0,0,1],"n":3,
//!  "f":[{"coeffs":[1,0,1,1]}, ...],
//!  "P":[{"n":3,"terms":[{"c":1,"e":[1,0,0]}, ...]}],
//!  "I":[1,2,3]}
//! ```
//!
//! Field elements are integers `sum a_i p^i` in the polynomial basis of the
//! echoed modulus. `modulus`, `P[j].n` and `I` may be omitted on input.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::counting::SystemInstance;
use crate::error::{Error, Result};
use crate::gf::{FieldCtx, FqElem};
use crate::multipoly::{IndexSet, MultiPoly};
use crate::unipoly::UniPoly;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub p: u64,
    pub s: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
    pub n: usize,
    pub f: Vec<UniPolyRecord>,
    #[serde(rename = "P")]
    pub polys: Vec<MultiPolyRecord>,
    #[serde(rename = "I", default, skip_serializing_if = "Option::is_none")]
    pub index_set: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniPolyRecord {
    pub coeffs: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiPolyRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub c: u64,
    pub e: Vec<u32>,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::InvalidInstance { field: field.into(), message: message.into() }
}

fn element(ctx: &FieldCtx, field: String, v: u64) -> Result<FqElem> {
    ctx.elem(v).map_err(|_| invalid(field, format!("{v} is not below q = {}", ctx.q())))
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            let message = match full.rfind(" at line ") {
                Some(at) => full[..at].to_string(),
                None => full,
            };
            Error::Parse { line: e.line(), column: e.column(), message }
        })
    }

    /// Pretty-printed canonical form with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("instance serializes");
        out.push('\n');
        out
    }

    pub fn to_system(&self) -> Result<SystemInstance> {
        let ctx = FieldCtx::new(self.p, self.s, self.modulus.as_deref()).map_err(|e| match e {
            Error::NonPrime(_) => invalid("p", e.to_string()),
            Error::FieldTooLarge(_) => invalid("s", e.to_string()),
            other => invalid("modulus", other.to_string()),
        })?;
        if self.n == 0 {
            return Err(invalid("n", "must be positive"));
        }
        if self.f.len() != self.n {
            return Err(invalid("f", format!("expected {} polynomials, found {}", self.n, self.f.len())));
        }
        if self.polys.is_empty() {
            return Err(invalid("P", "at least one equation is required"));
        }
        let mut f_list = Vec::with_capacity(self.n);
        for (i, rec) in self.f.iter().enumerate() {
            let coeffs = rec
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| element(&ctx, format!("f[{i}].coeffs[{k}]"), c))
                .collect::<Result<Vec<_>>>()?;
            f_list.push(UniPoly::new(coeffs));
        }
        let mut p_list = Vec::with_capacity(self.polys.len());
        for (j, rec) in self.polys.iter().enumerate() {
            if let Some(m) = rec.n {
                if m != self.n {
                    return Err(invalid(format!("P[{j}].n"), format!("expected {}, found {m}", self.n)));
                }
            }
            let mut terms = Vec::with_capacity(rec.terms.len());
            for (k, t) in rec.terms.iter().enumerate() {
                if t.e.len() != self.n {
                    return Err(invalid(
                        format!("P[{j}].terms[{k}].e"),
                        format!("expected {} exponents, found {}", self.n, t.e.len()),
                    ));
                }
                terms.push((element(&ctx, format!("P[{j}].terms[{k}].c"), t.c)?, t.e.clone()));
            }
            p_list.push(MultiPoly::new(&ctx, self.n, terms)?);
        }
        let index_set = match &self.index_set {
            Some(members) => Some(
                IndexSet::new(members, self.n).map_err(|e| invalid("I", e.to_string()))?,
            ),
            None => None,
        };
        SystemInstance::new(Arc::new(ctx), f_list, p_list, index_set)
    }
}

impl SystemInstance {
    /// Canonical file form: modulus and arities echoed, terms normalized.
    pub fn to_file(&self) -> InstanceFile {
        let ctx = self.ctx();
        InstanceFile {
            p: ctx.p(),
            s: ctx.s(),
            modulus: Some(ctx.modulus().to_vec()),
            n: self.n(),
            f: self.f_list().iter().map(|f| UniPolyRecord { coeffs: f.reps() }).collect(),
            polys: self
                .p_list()
                .iter()
                .map(|p| MultiPolyRecord {
                    n: Some(p.n_vars()),
                    terms: p
                        .terms()
                        .iter()
                        .map(|t| TermRecord { c: t.coeff.0 as u64, e: t.exps.clone() })
                        .collect(),
                })
                .collect(),
            index_set: self.index_set().map(IndexSet::one_based),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<SystemInstance> {
    InstanceFile::parse(text)?.to_system()
}
