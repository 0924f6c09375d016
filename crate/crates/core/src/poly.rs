//! Dense univariate polynomials over `f64`.
//!
//! Coefficients are stored in ascending power order. Real roots restricted to
//! an interval are isolated recursively: the real roots of `p'` split the
//! interval into pieces on which `p` is monotone, and each piece holds at most
//! one sign change, which is then bisected to full precision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative magnitude below which trailing coefficients are trimmed.
pub const ZERO_THRESHOLD: f64 = 1e-14;

/// A closed interval `[lo, hi]`; `lo == hi` is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Polynomial `c_0 + c_1 x + ... + c_n x^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial, trimming trailing coefficients whose magnitude is
    /// below `ZERO_THRESHOLD * max|c_i|`.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        while coeffs.len() > 1 {
            let last = *coeffs.last().unwrap();
            if last == 0.0 || last.abs() < ZERO_THRESHOLD * scale {
                coeffs.pop();
            } else {
                break;
            }
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn identity() -> Self {
        Polynomial::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = *self.coeffs.last().unwrap();
        for &c in self.coeffs.iter().rev().skip(1) {
            acc = acc * x + c;
        }
        acc
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = *self.coeffs.last().unwrap();
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev().skip(1) {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, factor: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).copied().unwrap_or(0.0) + other.coeffs.get(i).copied().unwrap_or(0.0))
            .collect();
        Polynomial::new(coeffs)
    }

    /// Upper bound on `sum |c_i| |x|^i`, the scale of rounding error in `eval(x)`.
    pub fn magnitude_at(&self, x: f64) -> f64 {
        let ax = x.abs();
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * ax + c.abs();
        }
        acc
    }

    /// All real roots in the open interval `(interval.lo, interval.hi)`,
    /// strictly ascending. Roots closer than `2 * tol` are merged.
    pub fn real_roots(&self, interval: Interval, tol: f64) -> Result<Vec<f64>> {
        if self.is_zero() {
            return Err(Error::IdenticallyZero);
        }
        if !(tol > 0.0) {
            return Err(Error::RootFailure(format!("tolerance must be positive, got {tol}")));
        }
        if interval.is_degenerate() {
            return Ok(Vec::new());
        }
        let mut roots = roots_in(self, interval.lo, interval.hi, tol);
        roots.retain(|&r| r > interval.lo && r < interval.hi);
        Ok(merge_close(roots, 2.0 * tol))
    }

    /// Bounds `(m, M)` with `m <= min p'` and `M >= max p'` over `interval`,
    /// widened by `tol`.
    pub fn derivative_range(&self, interval: Interval, tol: f64) -> Result<(f64, f64)> {
        let d1 = self.derivative();
        let (lo, hi) = extreme_values(&d1, interval, tol)?;
        Ok((lo - tol, hi + tol))
    }

    /// Exact minimum and maximum of `p` over `interval`, from the endpoints and
    /// the critical points inside.
    pub fn range(&self, interval: Interval, tol: f64) -> Result<(f64, f64)> {
        extreme_values(self, interval, tol)
    }

    /// Leftmost minimizer of `p` over `interval` and the minimum value.
    pub fn argmin(&self, interval: Interval, tol: f64) -> Result<(f64, f64)> {
        let mut best = (interval.lo, self.eval(interval.lo));
        for x in candidate_points(self, interval, tol)? {
            let v = self.eval(x);
            if v < best.1 {
                best = (x, v);
            }
        }
        Ok(best)
    }

    /// Leftmost maximizer of `p` over `interval` and the maximum value.
    pub fn argmax(&self, interval: Interval, tol: f64) -> Result<(f64, f64)> {
        let (x, v) = self.scale(-1.0).argmin(interval, tol)?;
        Ok((x, -v))
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl From<Vec<f64>> for Polynomial {
    fn from(coeffs: Vec<f64>) -> Self {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

/// Parses the comma-separated ascending coefficient form, e.g. `"0,1.5,1.3"`.
impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        for (i, tok) in s.split(',').enumerate() {
            let tok = tok.trim();
            let c: f64 = tok
                .parse()
                .map_err(|_| Error::parse(format!("coefficient {i}"), format!("cannot parse {tok:?} as a number")))?;
            if !c.is_finite() {
                return Err(Error::parse(format!("coefficient {i}"), "coefficient is not finite"));
            }
            coeffs.push(c);
        }
        Ok(Polynomial::new(coeffs))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

fn candidate_points(p: &Polynomial, interval: Interval, tol: f64) -> Result<Vec<f64>> {
    let mut pts = vec![interval.lo];
    let d = p.derivative();
    if !d.is_zero() {
        pts.extend(d.real_roots(interval, tol)?);
    }
    pts.push(interval.hi);
    Ok(pts)
}

fn extreme_values(p: &Polynomial, interval: Interval, tol: f64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in candidate_points(p, interval, tol)? {
        let v = p.eval(x);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Sign of `p(x)` where values within the rounding-error envelope count as zero.
fn numeric_sign(p: &Polynomial, x: f64) -> i8 {
    let v = p.eval(x);
    let noise = 8.0 * (p.degree() as f64 + 1.0) * f64::EPSILON * p.magnitude_at(x);
    if v.abs() <= noise {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

fn roots_in(p: &Polynomial, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    match p.degree() {
        0 => Vec::new(),
        1 => {
            let r = -p.coeffs[0] / p.coeffs[1];
            if r > lo && r < hi {
                vec![r]
            } else {
                Vec::new()
            }
        }
        _ => {
            let critical = roots_in(&p.derivative(), lo, hi, tol);
            let mut knots = Vec::with_capacity(critical.len() + 2);
            knots.push(lo);
            knots.extend(critical.iter().copied());
            knots.push(hi);
            let signs: Vec<i8> = knots.iter().map(|&x| numeric_sign(p, x)).collect();

            let mut roots = Vec::new();
            for k in 0..knots.len() - 1 {
                if k > 0 && signs[k] == 0 {
                    // critical point touching zero: even-multiplicity root
                    roots.push(knots[k]);
                }
                if signs[k] * signs[k + 1] < 0 {
                    roots.push(bisect_sign_change(p, knots[k], knots[k + 1], signs[k]));
                }
            }
            roots
        }
    }
}

fn bisect_sign_change(p: &Polynomial, mut a: f64, mut b: f64, sign_a: i8) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = p.eval(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == (sign_a > 0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

fn merge_close(roots: Vec<f64>, radius: f64) -> Vec<f64> {
    let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
    let mut group: Vec<f64> = Vec::new();
    for r in roots {
        if let Some(&last) = group.last() {
            if r - last >= radius {
                merged.push(group.iter().sum::<f64>() / group.len() as f64);
                group.clear();
            }
        }
        group.push(r);
    }
    if !group.is_empty() {
        merged.push(group.iter().sum::<f64>() / group.len() as f64);
    }
    merged
}
