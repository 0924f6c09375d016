//! Dense simplex for bounded-variable linear programs
//!
//! ```text
//! min c'x  s.t.  A x <= b,  l <= x <= u   (l, u finite)
//! ```
//!
//! After shifting `y = x - l` the problem is solved through its dual,
//!
//! ```text
//! min (b - A l)'λ + (u - l)'μ   s.t.  A'λ + μ - σ = -c,   λ, μ, σ >= 0,
//! ```
//!
//! with a revised simplex that keeps an explicit basis inverse. The dual has
//! one row per primal variable, so the basis stays small no matter how many
//! inequality rows are added, and a starting basis made of `μ_j` / `σ_j`
//! columns is always feasible. The primal optimum is read off the simplex
//! multipliers. Adding primal rows only appends dual columns, so a solved
//! master stays dual feasible and the next solve warm-starts from the
//! previous basis; this is what the cutting-plane loop relies on.
//!
//! An unbounded dual certifies an infeasible primal. A primal unbounded ray
//! cannot occur because every variable is boxed.

use crate::error::{Error, Result};

/// Reduced-cost tolerance for optimality.
pub const OPTIMALITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// `min objective'x` subject to `rows` (each `coeffs'x <= rhs`) and the box.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            lower,
            upper,
            rows: Vec::new(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.objective.len()
    }

    /// Adds `coeffs'x <= rhs`.
    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.rows.push(LpRow { coeffs, rhs });
    }

    /// Adds `coeffs'x >= rhs`.
    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.rows.push(LpRow {
            coeffs: coeffs.into_iter().map(|c| -c).collect(),
            rhs: -rhs,
        });
    }

    fn validate(&self) -> Result<()> {
        let n = self.var_count();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.lower.len().min(self.upper.len()),
            });
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !(l.is_finite() && u.is_finite()) {
                return Err(Error::Internal(format!("variable {j} has a non-finite bound")));
            }
            if l > u {
                return Err(Error::Infeasible);
            }
        }
        if let Some(row) = self.rows.iter().find(|r| r.coeffs.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.coeffs.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub point: Vec<f64>,
    pub pivots: usize,
}

/// Solves `lp` to optimality, or reports [`Error::Infeasible`].
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let mut master = DualMaster::new(&lp.objective, &lp.lower, &lp.upper);
    for row in &lp.rows {
        master.add_row(&row.coeffs, row.rhs, true);
    }
    master.solve()
}

/// A primal inequality row, stored as a dual column.
#[derive(Debug, Clone)]
struct DualColumn {
    coeffs: Vec<f64>,
    /// `b_i - a_i'l`
    cost: f64,
    rhs: f64,
    /// never dropped by [`DualMaster::prune`]
    pinned: bool,
    id: u64,
}

/// Incrementally extendable LP, solved through its dual.
///
/// Column indices: `0..n` are `μ_j` (upper bounds), `n..2n` are `σ_j`
/// (surplus), `2n + r` is primal row `r`.
#[derive(Debug, Clone)]
pub struct DualMaster {
    n: usize,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    width: Vec<f64>,
    rows: Vec<DualColumn>,
    next_id: u64,
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    since_refactor: usize,
    total_pivots: usize,
}

impl DualMaster {
    pub fn new(objective: &[f64], lower: &[f64], upper: &[f64]) -> Self {
        let n = objective.len();
        let width: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| (u - l).max(0.0)).collect();
        let mut master = DualMaster {
            n,
            objective: objective.to_vec(),
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            width,
            rows: Vec::new(),
            next_id: 0,
            basis: vec![0; n],
            binv: vec![0.0; n * n],
            xb: vec![0.0; n],
            since_refactor: 0,
            total_pivots: 0,
        };
        for j in 0..n {
            // rhs of dual row j is -c_j
            if -objective[j] >= 0.0 {
                master.basis[j] = j;
                master.binv[j * n + j] = 1.0;
                master.xb[j] = -objective[j];
            } else {
                master.basis[j] = n + j;
                master.binv[j * n + j] = -1.0;
                master.xb[j] = objective[j];
            }
        }
        master
    }

    pub fn var_count(&self) -> usize {
        self.n
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Adds `coeffs'x <= rhs`; returns the row's stable id.
    pub fn add_row(&mut self, coeffs: &[f64], rhs: f64, pinned: bool) -> u64 {
        let shift: f64 = coeffs.iter().zip(&self.lower).map(|(a, l)| a * l).sum();
        let id = self.next_id;
        self.next_id += 1;
        self.rows.push(DualColumn {
            coeffs: coeffs.to_vec(),
            cost: rhs - shift,
            rhs,
            pinned,
            id,
        });
        id
    }

    /// Drops the oldest unpinned rows that are not in the basis until at most
    /// `max_rows` remain (or none can be dropped). Dropping a nonbasic dual
    /// column leaves the current basis optimal.
    pub fn prune(&mut self, max_rows: usize) {
        if self.rows.len() <= max_rows {
            return;
        }
        let n = self.n;
        let basic: std::collections::HashSet<usize> =
            self.basis.iter().filter(|&&c| c >= 2 * n).map(|&c| c - 2 * n).collect();
        let mut excess = self.rows.len() - max_rows;
        let mut keep = Vec::with_capacity(self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            let drop = excess > 0 && !row.pinned && !basic.contains(&r);
            if drop {
                excess -= 1;
            }
            keep.push(!drop);
        }
        let mut remap = vec![usize::MAX; self.rows.len()];
        let mut next = 0;
        for (r, &k) in keep.iter().enumerate() {
            if k {
                remap[r] = next;
                next += 1;
            }
        }
        let mut it = keep.iter();
        self.rows.retain(|_| *it.next().unwrap());
        for c in &mut self.basis {
            if *c >= 2 * n {
                *c = 2 * n + remap[*c - 2 * n];
            }
        }
    }

    /// Row ids currently in the master, oldest first.
    pub fn row_ids(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.id).collect()
    }

    fn column_cost(&self, col: usize) -> f64 {
        let n = self.n;
        if col < n {
            self.width[col]
        } else if col < 2 * n {
            0.0
        } else {
            self.rows[col - 2 * n].cost
        }
    }

    /// Writes `B^{-1} E_col` into `out`.
    fn ftran(&self, col: usize, out: &mut [f64]) {
        let n = self.n;
        if col < 2 * n {
            let (j, sign) = if col < n { (col, 1.0) } else { (col - n, -1.0) };
            for (r, o) in out.iter_mut().enumerate() {
                *o = sign * self.binv[r * n + j];
            }
        } else {
            let a = &self.rows[col - 2 * n].coeffs;
            for (r, o) in out.iter_mut().enumerate() {
                let row = &self.binv[r * n..(r + 1) * n];
                *o = row.iter().zip(a).map(|(b, x)| b * x).sum();
            }
        }
    }

    fn reduced_cost(&self, col: usize, pi: &[f64]) -> f64 {
        let n = self.n;
        if col < n {
            self.width[col] - pi[col]
        } else if col < 2 * n {
            pi[col - n]
        } else {
            let row = &self.rows[col - 2 * n];
            row.cost - row.coeffs.iter().zip(pi).map(|(a, p)| a * p).sum::<f64>()
        }
    }

    fn multipliers(&self) -> Vec<f64> {
        let n = self.n;
        let mut pi = vec![0.0; n];
        for (r, &col) in self.basis.iter().enumerate() {
            let d = self.column_cost(col);
            if d != 0.0 {
                let row = &self.binv[r * n..(r + 1) * n];
                for (p, b) in pi.iter_mut().zip(row) {
                    *p += d * b;
                }
            }
        }
        pi
    }

    fn column_dense(&self, col: usize) -> Vec<f64> {
        let n = self.n;
        let mut v = vec![0.0; n];
        if col < n {
            v[col] = 1.0;
        } else if col < 2 * n {
            v[col - n] = -1.0;
        } else {
            v.copy_from_slice(&self.rows[col - 2 * n].coeffs);
        }
        v
    }

    /// Recomputes `B^{-1}` and the basic values from scratch.
    fn refactor(&mut self) -> Result<()> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for (r, &col) in self.basis.iter().enumerate() {
            let v = self.column_dense(col);
            for i in 0..n {
                a[i * n + r] = v[i];
            }
        }
        let inv = invert(&a, n).ok_or_else(|| Error::Internal("singular simplex basis".to_string()))?;
        self.binv = inv;
        for r in 0..n {
            let row = &self.binv[r * n..(r + 1) * n];
            self.xb[r] = row.iter().zip(&self.objective).map(|(b, c)| -b * c).sum::<f64>().max(0.0);
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// Runs the simplex from the current basis to optimality.
    pub fn solve(&mut self) -> Result<LpSolution> {
        let n = self.n;
        let mut alpha = vec![0.0; n];
        let mut degenerate_run = 0usize;
        let mut pivots = 0usize;
        loop {
            let pi = self.multipliers();
            let ncols = 2 * n + self.rows.len();
            let bland = degenerate_run > 10 * (n + ncols);

            let mut entering = None;
            let mut best = -OPTIMALITY_TOL;
            for col in 0..ncols {
                let rc = self.reduced_cost(col, &pi);
                if rc < best {
                    entering = Some(col);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(q) = entering else {
                return Ok(self.primal_solution(&pi, pivots));
            };

            self.ftran(q, &mut alpha);
            let mut leave: Option<usize> = None;
            let mut theta = f64::INFINITY;
            for r in 0..n {
                if alpha[r] > PIVOT_TOL {
                    let ratio = self.xb[r].max(0.0) / alpha[r];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            if ratio < theta - 1e-12 {
                                true
                            } else if ratio <= theta + 1e-12 {
                                if bland {
                                    self.basis[r] < self.basis[l]
                                } else {
                                    alpha[r] > alpha[l]
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some(r);
                        theta = theta.min(ratio);
                    }
                }
            }
            let Some(lr) = leave else {
                // dual unbounded: primal infeasible
                return Err(Error::Infeasible);
            };
            let theta = self.xb[lr].max(0.0) / alpha[lr];

            for r in 0..n {
                if r != lr {
                    self.xb[r] = (self.xb[r] - theta * alpha[r]).max(0.0);
                }
            }
            self.xb[lr] = theta;
            let piv = alpha[lr];
            let pivot_row: Vec<f64> = self.binv[lr * n..(lr + 1) * n].iter().map(|v| v / piv).collect();
            for r in 0..n {
                let f = alpha[r];
                if r == lr || f == 0.0 {
                    continue;
                }
                let row = &mut self.binv[r * n..(r + 1) * n];
                for (b, p) in row.iter_mut().zip(&pivot_row) {
                    *b -= f * p;
                }
            }
            self.binv[lr * n..(lr + 1) * n].copy_from_slice(&pivot_row);
            self.basis[lr] = q;

            pivots += 1;
            self.total_pivots += 1;
            self.since_refactor += 1;
            if theta <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            if pivots > MAX_PIVOTS {
                return Err(Error::Internal(format!("simplex exceeded {MAX_PIVOTS} pivots")));
            }
        }
    }

    fn primal_solution(&self, pi: &[f64], pivots: usize) -> LpSolution {
        let point: Vec<f64> = (0..self.n)
            .map(|j| (self.lower[j] + pi[j]).clamp(self.lower[j], self.upper[j]))
            .collect();
        let value = point.iter().zip(&self.objective).map(|(x, c)| x * c).sum();
        LpSolution { value, point, pivots }
    }

    /// Largest violation of the stored rows at `point`.
    pub fn row_violation(&self, point: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| r.coeffs.iter().zip(point).map(|(a, x)| a * x).sum::<f64>() - r.rhs)
            .fold(0.0, f64::max)
    }
}

/// Gauss–Jordan inverse with partial pivoting; `None` if singular.
fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x * n + col].abs().total_cmp(&m[y * n + col].abs()))?;
        if m[piv * n + col].abs() < 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
        }
        let d = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                m[r * n + k] -= f * m[col * n + k];
                inv[r * n + k] -= f * inv[col * n + k];
            }
        }
    }
    Some(inv)
}
