//! JSON problem files and CSV traces.
//!
//! ```json
//! {
//!   "order": 2, "dim": 2,
//!   "A": {"dense": [1, 3, 4, 1]},
//!   "B": {"coo": [{"idx": [0, 0], "val": 1}, {"idx": [1, 1], "val": -1}]},
//!   "cone": {"type": "orthant"},
//!   "symmetrize": false,
//!   "allow_asymmetric": true
//! }
//! ```
//!
//! A payload is a bare array, `{"dense": [...]}` (row-major, last index fastest) or
//! `{"coo": [...]}` with zero-based indices. A missing `B` means the unit tensor.
//! The cone defaults to the orthant; `polyhedral` takes `generators` (p rows of length n).

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::spa::SolveTrace;
use crate::tensor::{Tensor, TensorPair};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CooEntry {
    pub idx: Vec<usize>,
    pub val: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Bare(Vec<f64>),
    Dense { dense: Vec<f64> },
    Coo { coo: Vec<CooEntry> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConeSpec {
    #[default]
    Orthant,
    Polyhedral {
        generators: Vec<Vec<f64>>,
    },
    SecondOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub order: usize,
    pub dim: usize,
    #[serde(rename = "A")]
    pub a: Payload,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Payload>,
    #[serde(default)]
    pub cone: ConeSpec,
    #[serde(default)]
    pub symmetrize: bool,
    /// Keep non-symmetric tensors as given instead of rejecting them.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_asymmetric: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub pair: TensorPair,
    pub cone: Cone,
}

fn build_tensor(payload: &Payload, order: usize, dim: usize, name: &str) -> Result<Tensor> {
    let t = match payload {
        Payload::Bare(v) | Payload::Dense { dense: v } => Tensor::new(order, dim, v.clone())?,
        Payload::Coo { coo } => {
            let mut t = Tensor::zeros(order, dim)?.into_entries();
            let shape = Tensor::zeros(order, dim)?;
            for (k, e) in coo.iter().enumerate() {
                if e.idx.len() != order || e.idx.iter().any(|&i| i >= dim) {
                    return Err(Error::Schema(format!(
                        "{name}.coo[{k}]: index {:?} is not a valid {order}-tuple below {dim}",
                        e.idx
                    )));
                }
                t[shape.flat_index(&e.idx)] += e.val;
            }
            Tensor::new(order, dim, t)?
        }
    };
    if let Some(bad) = t.entries().iter().find(|v| !v.is_finite()) {
        return Err(Error::Schema(format!("{name}: non-finite entry {bad}")));
    }
    Ok(t)
}

fn build_cone(spec: &ConeSpec, dim: usize) -> Result<Cone> {
    match spec {
        ConeSpec::Orthant => Cone::orthant(dim),
        ConeSpec::SecondOrder => Cone::second_order(dim),
        ConeSpec::Polyhedral { generators } => {
            let cone = Cone::polyhedral(generators.clone())?;
            if cone.ambient_dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "cone generators",
                    expected: dim,
                    found: cone.ambient_dim(),
                });
            }
            Ok(cone)
        }
    }
}

impl ProblemFile {
    /// Builds tensors and cone, applying the symmetry policy.
    pub fn to_problem(&self) -> Result<Problem> {
        let a = build_tensor(&self.a, self.order, self.dim, "A")?;
        let b = match &self.b {
            Some(p) => build_tensor(p, self.order, self.dim, "B")?,
            None => Tensor::unit(self.order, self.dim)?,
        };
        let mut pair = TensorPair::new(a, b)?;
        if self.symmetrize {
            pair = pair.symmetrize();
        } else if !pair.is_symmetric() && !self.allow_asymmetric {
            let dev = pair.a.symmetry_deviation().max(pair.b.symmetry_deviation());
            return Err(Error::NotSymmetric { max_deviation: dev });
        }
        Ok(Problem {
            pair,
            cone: build_cone(&self.cone, self.dim)?,
        })
    }

    /// Dense description of a pair and cone. Non-symmetric data is marked `allow_asymmetric`.
    pub fn from_problem(pair: &TensorPair, cone: &Cone) -> Self {
        let cone = match cone {
            Cone::Orthant { .. } => ConeSpec::Orthant,
            Cone::SecondOrder { .. } => ConeSpec::SecondOrder,
            Cone::Polyhedral(g) => ConeSpec::Polyhedral {
                generators: g.to_rows(),
            },
        };
        ProblemFile {
            order: pair.order(),
            dim: pair.dim(),
            a: Payload::Dense {
                dense: pair.a.entries().to_vec(),
            },
            b: (!pair.b.is_unit()).then(|| Payload::Dense {
                dense: pair.b.entries().to_vec(),
            }),
            cone,
            symmetrize: false,
            allow_asymmetric: !pair.is_symmetric(),
        }
    }
}

/// Parses a problem file, reporting the failing field path and position on schema errors.
pub fn parse_problem_file(text: &str) -> Result<ProblemFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema(format!("at `{path}`: {}", e.into_inner()))
    })
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    parse_problem_file(text)?.to_problem()
}

pub fn load(path: &Path) -> Result<Problem> {
    parse_problem(&fs::read_to_string(path)?)
}

pub fn load_file(path: &Path) -> Result<ProblemFile> {
    parse_problem_file(&fs::read_to_string(path)?)
}

/// Writes any serializable value as pretty JSON followed by a newline.
pub fn save<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = to_json(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Schema(e.to_string()))
}

/// Writes the trace as CSV with header `k,lambda,s_k,rel_err`.
pub fn write_trace<W: Write>(trace: &SolveTrace, mut out: W) -> Result<()> {
    if trace.rows.is_empty() {
        return Err(Error::InvalidParameter("trace is empty".into()));
    }
    writeln!(out, "k,lambda,s_k,rel_err")?;
    for r in &trace.rows {
        writeln!(out, "{},{:.16e},{:.16e},{:.16e}", r.k, r.lambda, r.s_k, r.rel_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_trace(trace: &SolveTrace, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    write_trace(trace, std::io::BufWriter::new(file))
}
