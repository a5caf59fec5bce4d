//! Finite presentation of an extriangulated length category.
//!
//! A presentation lists the (finitely many) indecomposables with their length
//! values, the Hom dimensions between them, the pairs with nonvanishing
//! stable extensions, and a finite set of conflations that generate every
//! closure computed downstream. Split conflations are implicit: for any pair
//! of objects a, c the conflation (a, a⊕c, c) exists and is stable.

use std::collections::HashMap;
use std::fmt;

use serde::Deserialize;

/// Hard ceiling imposed by the bitset subcategory representation.
pub const MAX_INDECS: usize = 32;

/// Default ceiling for the exhaustive subset enumerations.
pub const DEFAULT_ENUM_BOUND: usize = 22;

/// Default per-indecomposable multiplicity cap for filtration searches.
pub const DEFAULT_MULT_CAP: u32 = 3;

/// Default subset-size bound for the semidistributivity spot checks.
pub const DEFAULT_SD_BOUND: usize = 4;

#[derive(Debug, Clone)]
pub struct Indec {
    pub id: String,
    /// Length value; must be >= 1 for a valid presentation.
    pub theta: u32,
}

/// Finite-support multiset of indecomposables: an object up to isomorphism.
///
/// Stored as (index, multiplicity) pairs sorted by index with all
/// multiplicities nonzero, so equal objects compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjClass {
    mult: Vec<(u32, u32)>,
}

impl ObjClass {
    pub fn zero() -> Self {
        ObjClass { mult: Vec::new() }
    }

    pub fn single(idx: usize) -> Self {
        ObjClass { mult: vec![(idx as u32, 1)] }
    }

    pub fn from_mults(pairs: &[(usize, u32)]) -> Self {
        let mut mult: Vec<(u32, u32)> = pairs
            .iter()
            .filter(|&&(_, m)| m > 0)
            .map(|&(i, m)| (i as u32, m))
            .collect();
        mult.sort_unstable();
        let mut merged: Vec<(u32, u32)> = Vec::with_capacity(mult.len());
        for (i, m) in mult {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += m,
                _ => merged.push((i, m)),
            }
        }
        ObjClass { mult: merged }
    }

    pub fn is_zero(&self) -> bool {
        self.mult.is_empty()
    }

    pub fn total_mult(&self) -> u32 {
        self.mult.iter().map(|&(_, m)| m).sum()
    }

    pub fn mult_of(&self, idx: usize) -> u32 {
        self.mult
            .iter()
            .find(|&&(i, _)| i as usize == idx)
            .map_or(0, |&(_, m)| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.mult.iter().map(|&(i, m)| (i as usize, m))
    }

    /// Support as a bitmask over indec indices.
    pub fn support(&self) -> u32 {
        self.mult.iter().fold(0, |acc, &(i, _)| acc | (1 << i))
    }

    pub fn direct_sum(&self, other: &ObjClass) -> ObjClass {
        let mut pairs: Vec<(usize, u32)> = self.iter().collect();
        pairs.extend(other.iter());
        ObjClass::from_mults(&pairs)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &ObjClass) -> bool {
        self.iter().all(|(i, m)| other.mult_of(i) >= m)
    }

    /// Componentwise difference; caller guarantees `other.le(self)`.
    pub fn minus(&self, other: &ObjClass) -> ObjClass {
        let pairs: Vec<(usize, u32)> = self
            .iter()
            .map(|(i, m)| (i, m - other.mult_of(i)))
            .collect();
        ObjClass::from_mults(&pairs)
    }

    pub fn max_mult(&self) -> u32 {
        self.mult.iter().map(|&(_, m)| m).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct Conflation {
    pub a: ObjClass,
    pub b: ObjClass,
    pub c: ObjClass,
    pub stable: bool,
    pub split: bool,
}

#[derive(Debug, Clone)]
pub struct CategoryPresentation {
    pub name: String,
    indecs: Vec<Indec>,
    /// Row-major `dim Hom(X_i, X_j)` at `i * n + j`.
    hom: Vec<u32>,
    /// `ext[i * n + j]` records whether the stable extensions E_Θ(X_i, X_j)
    /// are nonzero (first argument = third conflation term, second = first).
    ext: Vec<bool>,
    conflations: Vec<Conflation>,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate indec id `{0}`")]
    DuplicateId(String),
    #[error("unknown indec id `{id}` in {context}")]
    UnknownId { id: String, context: String },
    #[error("presentation has {0} indecs; at most {MAX_INDECS} are supported")]
    TooManyIndecs(usize),
}

fn class_theta(indecs: &[Indec], m: &ObjClass) -> u32 {
    m.iter().map(|(i, mult)| indecs[i].theta * mult).sum()
}

/// One violated presentation law, with enough context to locate it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "violation[{}]: {}", self.rule, self.detail)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPresentation {
    name: String,
    #[serde(default)]
    indecs: Vec<RawIndec>,
    #[serde(default)]
    hom: Vec<RawHom>,
    #[serde(default)]
    ext: Vec<RawExt>,
    #[serde(default)]
    conflations: Vec<RawConflation>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIndec {
    id: String,
    theta: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHom {
    from: String,
    to: String,
    dim: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExt {
    from: String,
    to: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConflation {
    a: Vec<String>,
    b: Vec<String>,
    c: Vec<String>,
    stable: bool,
    #[serde(default)]
    split: bool,
}

impl CategoryPresentation {
    /// Parses a corpus document. Structural problems (bad syntax, unknown or
    /// duplicate ids) are hard errors here; semantic laws are left to
    /// [`validate`](Self::validate).
    pub fn load(text: &str) -> Result<Self, LoadError> {
        let raw: RawPresentation =
            toml::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))?;
        if raw.indecs.len() > MAX_INDECS {
            return Err(LoadError::TooManyIndecs(raw.indecs.len()));
        }

        let mut index: HashMap<String, usize> = HashMap::new();
        let mut indecs = Vec::with_capacity(raw.indecs.len());
        for (i, ri) in raw.indecs.into_iter().enumerate() {
            if index.insert(ri.id.clone(), i).is_some() {
                return Err(LoadError::DuplicateId(ri.id));
            }
            indecs.push(Indec { id: ri.id, theta: ri.theta });
        }
        let n = indecs.len();
        let resolve = |id: &str, context: String| {
            index.get(id).copied().ok_or_else(|| LoadError::UnknownId {
                id: id.to_string(),
                context,
            })
        };

        // Hom defaults: 1 on the diagonal, 0 elsewhere; entries override.
        let mut hom = vec![0u32; n * n];
        for i in 0..n {
            hom[i * n + i] = 1;
        }
        for h in &raw.hom {
            let i = resolve(&h.from, format!("hom entry {} -> {}", h.from, h.to))?;
            let j = resolve(&h.to, format!("hom entry {} -> {}", h.from, h.to))?;
            hom[i * n + j] = h.dim;
        }

        let mut ext = vec![false; n * n];
        for e in &raw.ext {
            let i = resolve(&e.from, format!("ext entry {} -> {}", e.from, e.to))?;
            let j = resolve(&e.to, format!("ext entry {} -> {}", e.from, e.to))?;
            ext[i * n + j] = true;
        }

        let mut conflations = Vec::with_capacity(raw.conflations.len());
        for (k, rc) in raw.conflations.iter().enumerate() {
            let ctx = |part: &str| format!("conflation #{} term {}", k + 1, part);
            let class = |ids: &[String], part: &str| -> Result<ObjClass, LoadError> {
                let mut pairs = Vec::with_capacity(ids.len());
                for id in ids {
                    pairs.push((resolve(id, ctx(part))?, 1));
                }
                Ok(ObjClass::from_mults(&pairs))
            };
            conflations.push(Conflation {
                a: class(&rc.a, "a")?,
                b: class(&rc.b, "b")?,
                c: class(&rc.c, "c")?,
                stable: rc.stable,
                split: rc.split,
            });
        }

        Ok(CategoryPresentation { name: raw.name, indecs, hom, ext, conflations })
    }

    pub fn num_indecs(&self) -> usize {
        self.indecs.len()
    }

    pub fn indecs(&self) -> &[Indec] {
        &self.indecs
    }

    pub fn id_of(&self, idx: usize) -> &str {
        &self.indecs[idx].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.indecs.iter().position(|i| i.id == id)
    }

    pub fn conflations(&self) -> &[Conflation] {
        &self.conflations
    }

    /// Additive length value of an object class.
    pub fn theta(&self, m: &ObjClass) -> u32 {
        m.iter().map(|(i, mult)| self.indecs[i].theta * mult).sum()
    }

    pub fn theta_of(&self, idx: usize) -> u32 {
        self.indecs[idx].theta
    }

    pub fn hom_dim_indec(&self, i: usize, j: usize) -> u32 {
        self.hom[i * self.indecs.len() + j]
    }

    /// Hom dimension between object classes, bi-additive in both arguments.
    pub fn hom_dim(&self, m: &ObjClass, n: &ObjClass) -> u32 {
        let mut total = 0;
        for (i, mi) in m.iter() {
            for (j, mj) in n.iter() {
                total += mi * mj * self.hom_dim_indec(i, j);
            }
        }
        total
    }

    /// Whether the stable extensions E_Θ(X_from, X_to) are nonzero.
    pub fn ext_nonzero(&self, from: usize, to: usize) -> bool {
        self.ext[from * self.indecs.len() + to]
    }

    /// An indecomposable is a brick when its endomorphism space is one
    /// dimensional.
    pub fn is_brick(&self, idx: usize) -> bool {
        self.hom_dim_indec(idx, idx) == 1
    }

    fn describe(&self, m: &ObjClass) -> String {
        if m.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = m
            .iter()
            .map(|(i, mult)| {
                if mult == 1 {
                    self.indecs[i].id.clone()
                } else {
                    format!("{}^{}", self.indecs[i].id, mult)
                }
            })
            .collect();
        parts.join("+")
    }

    /// Copy of this presentation with new per-indec lengths. Stability of
    /// every conflation is re-decided against the new lengths (additivity on
    /// the middle term); split flags are kept as declared.
    pub fn with_theta(&self, new_theta: &[u32]) -> CategoryPresentation {
        assert_eq!(new_theta.len(), self.indecs.len(), "one length per indec");
        let mut out = self.clone();
        for (ind, &t) in out.indecs.iter_mut().zip(new_theta) {
            ind.theta = t;
        }
        for cf in out.conflations.iter_mut() {
            cf.stable = class_theta(&out.indecs, &cf.b)
                == class_theta(&out.indecs, &cf.a) + class_theta(&out.indecs, &cf.c);
        }
        out
    }

    /// Checks every presentation law and returns the violations found.
    ///
    /// Laws: theta >= 1 per indec; Hom(X,X) >= 1 per indec; every conflation
    /// term is nonzero; for every conflation Θ(b) <= Θ(a) + Θ(c), with
    /// equality when stable; split implies stable and b = a ⊕ c; every
    /// nonsplit stable conflation whose end terms are single indecomposables
    /// must be backed by an ext entry.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for ind in &self.indecs {
            if ind.theta == 0 {
                out.push(Violation {
                    rule: "theta-positive",
                    detail: format!("indec {} has theta = 0; lengths must be >= 1", ind.id),
                });
            }
        }
        for (i, ind) in self.indecs.iter().enumerate() {
            if self.hom_dim_indec(i, i) == 0 {
                out.push(Violation {
                    rule: "hom-diagonal",
                    detail: format!("indec {} has Hom({0},{0}) = 0; identity is missing", ind.id),
                });
            }
        }
        for (k, cf) in self.conflations.iter().enumerate() {
            let (ta, tb, tc) = (self.theta(&cf.a), self.theta(&cf.b), self.theta(&cf.c));
            let shape = format!(
                "conflation #{} ({} ; {} ; {})",
                k + 1,
                self.describe(&cf.a),
                self.describe(&cf.b),
                self.describe(&cf.c)
            );
            if cf.a.is_zero() || cf.b.is_zero() || cf.c.is_zero() {
                out.push(Violation {
                    rule: "conflation-degenerate",
                    detail: format!("{shape}: every term must be nonzero"),
                });
            }
            if tb > ta + tc {
                out.push(Violation {
                    rule: "subadditivity",
                    detail: format!("{shape}: Θ(b) = {tb} exceeds Θ(a) + Θ(c) = {}", ta + tc),
                });
            }
            if cf.stable && tb != ta + tc {
                out.push(Violation {
                    rule: "stability-equality",
                    detail: format!(
                        "{shape}: marked stable but Θ(b) = {tb} != Θ(a) + Θ(c) = {}",
                        ta + tc
                    ),
                });
            }
            if cf.split {
                if !cf.stable {
                    out.push(Violation {
                        rule: "split-implies-stable",
                        detail: format!("{shape}: marked split but not stable"),
                    });
                }
                if cf.b != cf.a.direct_sum(&cf.c) {
                    out.push(Violation {
                        rule: "split-shape",
                        detail: format!("{shape}: marked split but b != a ⊕ c"),
                    });
                }
            }
            if cf.stable && !cf.split && cf.a.total_mult() == 1 && cf.c.total_mult() == 1 {
                let a_idx = cf.a.iter().next().unwrap().0;
                let c_idx = cf.c.iter().next().unwrap().0;
                if !self.ext_nonzero(c_idx, a_idx) {
                    out.push(Violation {
                        rule: "ext-consistency",
                        detail: format!(
                            "{shape}: nonsplit stable, so ext must list {} -> {}",
                            self.indecs[c_idx].id, self.indecs[a_idx].id
                        ),
                    });
                }
            }
        }
        out
    }
}
