//! Brute-force references for testing: the discrete Graham scan lower hull,
//! seeded multistart search on PKANs, a grid oracle for GAM minima and
//! vertex enumeration for small LPs. None of these share code with the
//! envelope or simplex machinery they check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gam::{Direction, Mpgam};
use crate::lp::LinearProgram;
use crate::pkan::Pkan;
use crate::poly::{Interval, Polynomial};

/// Points with strictly ascending, finite abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<(f64, f64)>,
}

impl PointSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        for (k, &(x, y)) in points.iter().enumerate() {
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::parse(format!("points[{k}]"), "non-finite coordinate"));
            }
            if k > 0 && x <= points[k - 1].0 {
                return Err(Error::parse(format!("points[{k}]"), "abscissae must be strictly ascending"));
            }
        }
        Ok(PointSet { points })
    }

    /// `n` equispaced samples of `p` over `interval`, endpoints included.
    pub fn sample(p: &Polynomial, interval: Interval, n: usize) -> Result<Self> {
        if n < 2 || interval.is_degenerate() {
            return Err(Error::InvalidInterval {
                lo: interval.lo,
                hi: interval.hi,
            });
        }
        let h = interval.width() / (n - 1) as f64;
        let points = (0..n)
            .map(|k| {
                let x = if k == n - 1 { interval.hi } else { interval.lo + h * k as f64 };
                (x, p.eval(x))
            })
            .collect();
        PointSet::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Lower half of the classical Graham scan: consecutive hull slopes strictly
/// increase, so collinear interior points are dropped.
pub fn discrete_lower_hull(pts: &PointSet) -> PointSet {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts.points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross > 0.0 {
                break;
            }
            hull.pop();
        }
        hull.push(p);
    }
    PointSet { points: hull }
}

/// Piecewise-linear interpolation through the hull points.
pub fn hull_interpolate(hull: &PointSet, x: f64) -> Result<f64> {
    let pts = &hull.points;
    let (lo, hi) = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::Internal("empty hull".into())),
    };
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfDomain { x, lo, hi });
    }
    let k = pts.partition_point(|p| p.0 < x);
    if k == 0 {
        return Ok(pts[0].1);
    }
    let (a, b) = (pts[k - 1], pts[k]);
    if b.0 == x {
        return Ok(b.1);
    }
    let t = (x - a.0) / (b.0 - a.0);
    Ok(a.1 + t * (b.1 - a.1))
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a local minimum of `f` on `[a, b]`.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Global minimum of `f` over `[lo, hi]` by an `n`-point grid followed by
/// golden-section refinement around every discrete local minimum.
fn grid_refine_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let n = n.max(3);
    let h = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|k| if k == n - 1 { hi } else { lo + h * k as f64 }).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (xs[0], vs[0]);
    for k in 0..n {
        if vs[k] < best.1 {
            best = (xs[k], vs[k]);
        }
        let left_ok = k == 0 || vs[k] <= vs[k - 1];
        let right_ok = k == n - 1 || vs[k] <= vs[k + 1];
        if left_ok && right_ok {
            let a = xs[k.saturating_sub(1)];
            let b = xs[(k + 1).min(n - 1)];
            let cand = golden_section(&f, a, b, 200);
            if cand.1 < best.1 {
                best = cand;
            }
        }
    }
    best
}

/// Minimum of a GAM over its box from a 1-D grid of `per_axis` points per
/// component with local refinement. The link's monotonicity is checked by
/// sampling `Φ'` on its own range estimate, which reduces the box search to
/// per-component extremes.
pub fn gam_grid_min(g: &Mpgam, per_axis: usize) -> Result<(f64, Vec<f64>)> {
    let mut mins = Vec::with_capacity(g.dim());
    let mut maxs = Vec::with_capacity(g.dim());
    for (p, b) in g.components().iter().zip(g.input_box()) {
        mins.push(grid_refine_min(|x| p.eval(x), b.lo, b.hi, per_axis));
        let (x, v) = grid_refine_min(|x| -p.eval(x), b.lo, b.hi, per_axis);
        maxs.push((x, -v));
    }
    let s_lo: f64 = mins.iter().map(|m| m.1).sum();
    let s_hi: f64 = maxs.iter().map(|m| m.1).sum();

    let d = g.link().derivative();
    let samples = per_axis.max(2);
    let (mut pos, mut neg) = (false, false);
    for k in 0..samples {
        let s = s_lo + (s_hi - s_lo) * k as f64 / (samples - 1) as f64;
        let v = d.eval(s);
        pos |= v > 0.0;
        neg |= v < 0.0;
    }
    let direction = match (pos, neg) {
        (true, false) => Direction::Increasing,
        (false, true) => Direction::Decreasing,
        _ => {
            return Err(Error::NotMonotone {
                lo: s_lo,
                hi: s_hi,
                at: 0.5 * (s_lo + s_hi),
            })
        }
    };
    let picks = match direction {
        Direction::Increasing => mins,
        Direction::Decreasing => maxs,
    };
    let x: Vec<f64> = picks.iter().map(|m| m.0).collect();
    let value = g.eval(&x)?;
    Ok((value, x))
}

fn primes(count: usize) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(count);
    let mut c = 2u32;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Best value of `forward_eval` over `samples` points of a Halton sequence
/// shifted by a seeded random offset (Cranley–Patterson rotation), followed
/// by 3 sweeps of coordinate descent from the best 10 points. Each
/// coordinate step scans 21 points and refines with golden-section search.
/// An upper bound on the true minimum; identical for identical inputs.
pub fn multistart_min(net: &Pkan, samples: usize, seed: u64) -> (f64, Vec<f64>) {
    let dim = net.input_dim();
    let bx = net.input_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let bases = primes(dim);
    let eval = |x: &[f64]| net.forward_eval(x).expect("point has the input dimension");

    let mut scored: Vec<(f64, Vec<f64>)> = (1..=samples.max(1) as u64)
        .map(|i| {
            let x: Vec<f64> = (0..dim)
                .map(|j| {
                    let u = (radical_inverse(i, bases[j]) + shift[j]).fract();
                    bx[j].lo + u * bx[j].width()
                })
                .collect();
            (eval(&x), x)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored.truncate(10);

    let mut best = scored[0].clone();
    for (mut v, mut x) in scored {
        for _ in 0..3 {
            for j in 0..dim {
                let f = |t: f64| {
                    let mut y = x.clone();
                    y[j] = t;
                    eval(&y)
                };
                let (t, ft) = grid_refine_min(f, bx[j].lo, bx[j].hi, 21);
                if ft < v {
                    v = ft;
                    x[j] = t;
                }
            }
        }
        if v < best.0 {
            best = (v, x);
        }
    }
    best
}

/// Minimum of a bounded LP by enumerating basic solutions: every variable is
/// at a bound or free, and as many rows as free variables are tight. `None`
/// when no basic solution is feasible.
pub fn lp_vertex_min(lp: &LinearProgram) -> Option<(f64, Vec<f64>)> {
    const FEAS: f64 = 1e-9;
    let n = lp.var_count();
    let m = lp.rows.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    // state per variable: 0 lower, 1 upper, 2 free
    let mut state = vec![0u8; n];
    loop {
        let free: Vec<usize> = (0..n).filter(|&j| state[j] == 2).collect();
        if free.len() <= m {
            for rows in combinations(m, free.len()) {
                let mut x: Vec<f64> = (0..n)
                    .map(|j| match state[j] {
                        0 => lp.lower[j],
                        1 => lp.upper[j],
                        _ => 0.0,
                    })
                    .collect();
                if !free.is_empty() {
                    let k = free.len();
                    let mut a = vec![0.0; k * k];
                    let mut rhs = vec![0.0; k];
                    for (r, &i) in rows.iter().enumerate() {
                        let row = &lp.rows[i];
                        rhs[r] = row.rhs - (0..n).filter(|&j| state[j] != 2).map(|j| row.coeffs[j] * x[j]).sum::<f64>();
                        for (c, &j) in free.iter().enumerate() {
                            a[r * k + c] = row.coeffs[j];
                        }
                    }
                    let Some(sol) = gauss_solve(a, rhs, k) else { continue };
                    for (c, &j) in free.iter().enumerate() {
                        x[j] = sol[c];
                    }
                }
                let feasible = (0..n).all(|j| x[j] >= lp.lower[j] - FEAS && x[j] <= lp.upper[j] + FEAS)
                    && lp
                        .rows
                        .iter()
                        .all(|r| r.coeffs.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() <= r.rhs + FEAS);
                if feasible {
                    let v: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                    if best.as_ref().is_none_or(|b| v < b.0) {
                        best = Some((v, x));
                    }
                }
            }
        }
        // next state in base 3
        let mut j = 0;
        while j < n && state[j] == 2 {
            state[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
        state[j] += 1;
    }
    best
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` if (nearly) singular.
fn gauss_solve(mut a: Vec<f64>, mut b: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| a[x * k + col].abs().total_cmp(&a[y * k + col].abs()))?;
        if a[piv * k + col].abs() < 1e-10 {
            return None;
        }
        if piv != col {
            for c in 0..k {
                a.swap(piv * k + c, col * k + c);
            }
            b.swap(piv, col);
        }
        for r in col + 1..k {
            let f = a[r * k + col] / a[col * k + col];
            for c in col..k {
                a[r * k + c] -= f * a[col * k + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r * k + c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r * k + r];
    }
    Some(x)
}
