//! Reference problems with published or closed-form answers, and a runner that
//! checks the library against them.

use serde::Serialize;

use crate::cone::Cone;
use crate::error::Result;
use crate::io::{parse_problem_file, ConeSpec, Payload, ProblemFile};
use crate::spa::{solve, SolveParams, SolveStatus, Start};
use crate::spectrum::{enumerate_pareto_spectrum, SpectrumParams};
use crate::tensor::{IndexSubset, Tensor};

pub const LAMBDA_TOL: f64 = 1e-3;
pub const VECTOR_TOL: f64 = 5e-3;
pub const SPECTRUM_REL_TOL: f64 = 1e-8;
pub const NO_SOLUTION_MAX_ITER: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// SPA from the all-ones start reaches `lambda` and `x` (normalized so `B x^m = 1`).
    SpaRun {
        tol: f64,
        alpha: f64,
        lambda: f64,
        x: Vec<f64>,
        source: &'static str,
    },
    /// The enumerated Pareto spectrum equals `eigenvalues` (ascending) to relative `rel_tol`.
    Spectrum {
        eigenvalues: Vec<f64>,
        rel_tol: f64,
        source: &'static str,
    },
    /// No Pareto eigenpair exists: empty enumeration and no SPA convergence.
    NoSolution { source: &'static str },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub problem: ProblemFile,
    pub expectations: Vec<Expectation>,
}

const EXAMPLE_5_1: &str = include_str!("../fixtures/example5.1.json");
const EXAMPLE_5_2: &str = include_str!("../fixtures/example5.2.json");
const EXAMPLE_5_3: &str = include_str!("../fixtures/example5.3.json");

const ONES_RUNS: &str = "published SPA run, all-ones start";
const RELAXED_RUNS: &str = "published SPA run, all-ones start, relaxation 5";

fn spa(tol: f64, alpha: f64, lambda: f64, x: &[f64]) -> Expectation {
    Expectation::SpaRun {
        tol,
        alpha,
        lambda,
        x: x.to_vec(),
        source: if alpha == 1.0 { ONES_RUNS } else { RELAXED_RUNS },
    }
}

/// `a_{ijk} = -a^{i+j+k}` with one-based indices.
pub fn negative_power_tensor(n: usize, a: f64) -> Tensor {
    Tensor::from_fn(3, n, |idx| -a.powi(idx.iter().map(|&i| i as i32 + 1).sum())).expect("valid shape")
}

/// `-(sum_{j in J} a^{3j/2})^2` for every nonempty J, ascending.
pub fn negative_power_spectrum(n: usize, a: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (1..1u64 << n)
        .map(|mask| {
            let j = IndexSubset::from_mask(n, mask).expect("mask in range");
            -j.members().iter().map(|&i| a.powf(1.5 * (i as f64 + 1.0))).sum::<f64>().powi(2)
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

fn negative_power_fixture(name: &'static str, n: usize) -> Fixture {
    Fixture {
        name,
        description: "order 3, a_ijk = -2^(i+j+k), unit B: every subset contributes one eigenvalue",
        problem: ProblemFile {
            order: 3,
            dim: n,
            a: Payload::Dense {
                dense: negative_power_tensor(n, 2.0).into_entries(),
            },
            b: None,
            cone: ConeSpec::Orthant,
            symmetrize: false,
            allow_asymmetric: false,
        },
        expectations: vec![Expectation::Spectrum {
            eigenvalues: negative_power_spectrum(n, 2.0),
            rel_tol: SPECTRUM_REL_TOL,
            source: "closed form -(sum_J a^(3j/2))^2",
        }],
    }
}

fn embedded(name: &'static str, description: &'static str, text: &str, expectations: Vec<Expectation>) -> Fixture {
    Fixture {
        name,
        description,
        problem: parse_problem_file(text).expect("embedded fixture parses"),
        expectations,
    }
}

pub fn all() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "example3.1",
            description: "2x2 matrices A = [[1,3],[4,1]], B = diag(1,-1): no Pareto eigenpair",
            problem: ProblemFile {
                order: 2,
                dim: 2,
                a: Payload::Dense {
                    dense: vec![1.0, 3.0, 4.0, 1.0],
                },
                b: Some(Payload::Dense {
                    dense: vec![1.0, 0.0, 0.0, -1.0],
                }),
                cone: ConeSpec::Orthant,
                symmetrize: false,
                allow_asymmetric: true,
            },
            expectations: vec![Expectation::NoSolution {
                source: "B is not copositive and no solution exists",
            }],
        },
        negative_power_fixture("example4.1_n2_a2", 2),
        negative_power_fixture("example4.1_n3_a2", 3),
        embedded(
            "example5.1",
            "order 4, dimension 2, four-decimal data",
            EXAMPLE_5_1,
            vec![
                spa(5e-3, 1.0, 0.4859, &[0.2697, 0.6407]),
                spa(1e-3, 1.0, 0.4850, &[0.2601, 0.6512]),
                spa(5e-4, 1.0, 0.4849, &[0.2589, 0.6525]),
                spa(5e-3, 5.0, 0.4859, &[0.2696, 0.6407]),
                spa(1e-3, 5.0, 0.4850, &[0.2601, 0.6512]),
                spa(5e-4, 5.0, 0.4849, &[0.2589, 0.6525]),
                spa(1e-4, 5.0, 0.4848, &[0.2579, 0.6536]),
            ],
        ),
        embedded(
            "example5.2",
            "order 4, dimension 3, four-decimal data",
            EXAMPLE_5_2,
            vec![
                spa(5e-3, 1.0, 1.5609, &[0.2168, 0.1532, 0.8774]),
                spa(1e-3, 1.0, 1.5512, &[0.2194, 0.1576, 0.8683]),
                spa(5e-4, 1.0, 1.5514, &[0.2199, 0.1575, 0.8678]),
                spa(5e-3, 5.0, 1.5472, &[0.2168, 0.1597, 0.8682]),
                spa(1e-3, 5.0, 1.5501, &[0.2204, 0.1580, 0.8664]),
                spa(5e-4, 5.0, 1.5513, &[0.2207, 0.1574, 0.8669]),
                spa(1e-4, 5.0, 1.5520, &[0.2203, 0.1571, 0.8679]),
            ],
        ),
        embedded(
            "example5.3",
            "order 4, dimension 3, four-decimal data with entries of B at least 2.1",
            EXAMPLE_5_3,
            vec![
                spa(5e-3, 1.0, 0.2189, &[0.0630, 0.0000, 0.7236]),
                spa(1e-3, 1.0, 0.2173, &[0.0542, 0.0000, 0.7319]),
                spa(5e-4, 1.0, 0.2171, &[0.0530, 0.0000, 0.7330]),
                spa(5e-3, 5.0, 0.2189, &[0.0629, 0.0000, 0.7236]),
                spa(1e-3, 5.0, 0.2173, &[0.0542, 0.0000, 0.7319]),
                spa(5e-4, 5.0, 0.2171, &[0.0530, 0.0000, 0.7330]),
                spa(1e-4, 5.0, 0.2170, &[0.0518, 0.0005, 0.7337]),
            ],
        ),
    ]
}

pub fn get(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureOutcome {
    pub fixture: &'static str,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

pub fn run_fixture(fixture: &Fixture) -> Result<Vec<FixtureOutcome>> {
    let problem = fixture.problem.to_problem()?;
    let pair = &problem.pair;
    let mut out = Vec::new();
    let mut record = |check: String, passed: bool, detail: String| {
        out.push(FixtureOutcome {
            fixture: fixture.name,
            check,
            passed,
            detail,
        })
    };
    for e in &fixture.expectations {
        match e {
            Expectation::SpaRun { tol, alpha, lambda, x, .. } => {
                let params = SolveParams {
                    tol: *tol,
                    alpha: *alpha,
                    start: Start::Ones,
                    ..Default::default()
                };
                let r = solve(pair, &problem.cone, &params)?;
                let dx = r.x.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let dl = (r.lambda - lambda).abs();
                record(
                    format!("spa tol={tol:e} alpha={alpha}"),
                    r.status == SolveStatus::Converged && dl <= LAMBDA_TOL && dx <= VECTOR_TOL,
                    format!(
                        "{} after {} steps, lambda={:.6} (want {lambda}), max |dx|={dx:.2e}",
                        r.status.as_str(),
                        r.iterations,
                        r.lambda
                    ),
                );
            }
            Expectation::Spectrum { eigenvalues, rel_tol, .. } => {
                let report = enumerate_pareto_spectrum(pair, &SpectrumParams::default())?;
                let matched = report.len() == eigenvalues.len()
                    && report
                        .eigenvalues
                        .iter()
                        .zip(eigenvalues)
                        .all(|(g, w)| (g - w).abs() <= rel_tol * w.abs().max(1.0));
                record(
                    "pareto spectrum".into(),
                    matched,
                    format!("{} eigenvalues found, {} expected", report.len(), eigenvalues.len()),
                );
            }
            Expectation::NoSolution { .. } => {
                let report = enumerate_pareto_spectrum(pair, &SpectrumParams::default())?;
                record(
                    "empty pareto spectrum".into(),
                    report.is_empty(),
                    format!("{} eigenvalues found", report.len()),
                );
                let params = SolveParams {
                    max_iter: NO_SOLUTION_MAX_ITER,
                    ..Default::default()
                };
                let r = solve(pair, &Cone::orthant(pair.dim())?, &params)?;
                record(
                    "spa finds no eigenpair".into(),
                    r.status != SolveStatus::Converged,
                    format!("{} after {} steps", r.status.as_str(), r.iterations),
                );
            }
        }
    }
    Ok(out)
}

pub fn run_all() -> Result<Vec<FixtureOutcome>> {
    let mut out = Vec::new();
    for f in all() {
        out.extend(run_fixture(&f)?);
    }
    Ok(out)
}
