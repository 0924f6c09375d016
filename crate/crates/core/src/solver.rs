//! Kelley cutting planes for the envelope relaxation.
//!
//! The master LP starts from the variable boxes and `z_{L,1} - t <= 0`. Each
//! round linearizes every violated envelope constraint `g <= 0` at the master
//! point, using envelope slopes as (sub)gradients. The cuts are globally valid
//! because every `g` is convex, so the master objective is a lower bound on the
//! relaxation at every round, not only at convergence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::lp::DualMaster;
use crate::pkan::RelaxedProblem;

pub const DEFAULT_FEAS_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 2000;
/// Cut pool cap, per variable.
pub const CUTS_PER_VAR: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    IterationLimit,
    InfeasibleMaster,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::InfeasibleMaster => "infeasible_master",
        })
    }
}

/// A cut `coeffs'v <= rhs` added by the solver, kept for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Cut {
    /// `coeffs'v - rhs`; nonpositive when `v` satisfies the cut.
    pub fn slack_violation(&self, point: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * point[j]).sum::<f64>() - self.rhs
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Optimal value of the last master LP.
    pub lower_bound: f64,
    pub point: Vec<f64>,
    pub iterations: usize,
    pub max_violation: f64,
    pub status: SolveStatus,
    /// Master objective after each round.
    pub history: Vec<f64>,
    pub cuts: Vec<Cut>,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    lower_bound: f64,
    iterations: usize,
    max_violation: f64,
    status: SolveStatus,
    point: &'a BTreeMap<String, f64>,
}

impl SolveReport {
    /// `{ "lower_bound", "iterations", "max_violation", "status", "point": {var: value} }`
    pub fn to_json(&self, problem: &RelaxedProblem) -> Result<String> {
        let point: BTreeMap<String, f64> = self
            .point
            .iter()
            .enumerate()
            .map(|(i, &v)| (problem.var_name(i), v))
            .collect();
        io::to_json(&ReportFile {
            lower_bound: self.lower_bound,
            iterations: self.iterations,
            max_violation: self.max_violation,
            status: self.status,
            point: &point,
        })
    }
}

/// Lower-bounds the relaxation optimum by Kelley's cutting-plane method.
pub fn solve_relaxation(problem: &RelaxedProblem, feas_tol: f64, max_iters: usize) -> Result<SolveReport> {
    if !(feas_tol > 0.0) || max_iters == 0 {
        return Err(Error::Internal(format!(
            "need feas_tol > 0 and max_iters >= 1, got {feas_tol} and {max_iters}"
        )));
    }
    let n = problem.var_count();
    let lower: Vec<f64> = problem.bounds().iter().map(|b| b.lo).collect();
    let upper: Vec<f64> = problem.bounds().iter().map(|b| b.hi).collect();
    let mut objective = vec![0.0; n];
    objective[RelaxedProblem::T] = 1.0;

    let mut master = DualMaster::new(&objective, &lower, &upper);
    let mut epigraph = vec![0.0; n];
    epigraph[problem.output_var()] = 1.0;
    epigraph[RelaxedProblem::T] = -1.0;
    master.add_row(&epigraph, 0.0, true);

    let mut point: Vec<f64> = problem.bounds().iter().map(|b| b.midpoint()).collect();
    let mut report = SolveReport {
        lower_bound: f64::NEG_INFINITY,
        point: point.clone(),
        iterations: 0,
        max_violation: f64::INFINITY,
        status: SolveStatus::IterationLimit,
        history: Vec::new(),
        cuts: Vec::new(),
    };
    let cap = CUTS_PER_VAR * n;

    for round in 0..max_iters {
        let mut max_violation = point[problem.output_var()] - point[RelaxedProblem::T];
        let mut new_cuts = Vec::new();
        for c in problem.constraints() {
            let (g, grad) = c.linearize(&point);
            max_violation = max_violation.max(g);
            if g > feas_tol {
                // g(p) + grad'(v - p) <= 0
                let rhs = grad.iter().map(|&(j, a)| a * point[j]).sum::<f64>() - g;
                new_cuts.push(Cut { coeffs: grad, rhs });
            }
        }
        report.max_violation = max_violation;
        if round > 0 && max_violation <= feas_tol {
            report.status = SolveStatus::Optimal;
            return Ok(report);
        }
        for cut in new_cuts {
            let mut dense = vec![0.0; n];
            for &(j, a) in &cut.coeffs {
                dense[j] += a;
            }
            master.add_row(&dense, cut.rhs, false);
            report.cuts.push(cut);
        }
        master.prune(cap);

        match master.solve() {
            Ok(sol) => {
                point = sol.point;
                report.lower_bound = sol.value;
                report.point = point.clone();
                report.history.push(sol.value);
                report.iterations = round + 1;
            }
            Err(Error::Infeasible) => {
                report.status = SolveStatus::InfeasibleMaster;
                return Ok(report);
            }
            Err(e) => return Err(e),
        }
    }
    report.max_violation = problem.max_violation(&point);
    if report.max_violation <= feas_tol {
        report.status = SolveStatus::Optimal;
    }
    Ok(report)
}

/// `|f_relax - f_star| / (|f_star| + 1e-12) * 100`.
pub fn relative_gap(f_relax: f64, f_star: f64) -> f64 {
    (f_relax - f_star).abs() / (f_star.abs() + 1e-12) * 100.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pkan::{build_relaxation, Pkan};
    use crate::poly::{Interval, Polynomial};

    #[test]
    fn gap_examples() {
        assert_eq!(relative_gap(5.0, 5.0), 0.0);
        assert!((relative_gap(0.0, 1.0) - 100.0 / (1.0 + 1e-12)).abs() < 1e-12);
        assert!((relative_gap(-1.1, -1.0) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn convex_chain_reaches_minimum() {
        let net = Pkan::new(
            vec![1, 1],
            vec![vec![vec![Polynomial::new(vec![0.0, 0.0, 1.0])]]],
            vec![Interval { lo: -1.0, hi: 1.0 }],
        )
        .unwrap();
        let rp = build_relaxation(&net, 1e-12).unwrap();
        let rep = solve_relaxation(&rp, 1e-6, 2000).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert!(rep.lower_bound.abs() <= 1e-5, "{}", rep.lower_bound);
        assert!(rep.lower_bound <= 1e-12);
        for w in rep.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        let json = rep.to_json(&rp).unwrap();
        assert!(json.contains("\"status\": \"optimal\""));
        assert!(json.contains("\"z_1_0\""));
    }

    #[test]
    fn rejects_bad_parameters() {
        let net = Pkan::generate_random(1, 1, 1, 2, 0);
        let rp = build_relaxation(&net, 1e-12).unwrap();
        assert!(solve_relaxation(&rp, 0.0, 10).is_err());
        assert!(solve_relaxation(&rp, 1e-6, 0).is_err());
    }
}
