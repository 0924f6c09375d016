//! Exact convex and concave envelopes of a univariate polynomial on a compact
//! interval.
//!
//! The pipeline has three stages:
//!
//! 1. [`convex_intervals`] splits the domain at the real roots of `p''` and
//!    keeps the closed pieces on which `p'' >= 0`. The first piece always
//!    contains the left endpoint and the last one the right endpoint; either
//!    may be a single point.
//! 2. [`bitangent`] finds the unique affine minorant touching `p` on two such
//!    pieces. Its slope is the crossing point of the two restricted convex
//!    conjugates `s -> sup_{x in I} (s x - p(x))`, which is located by
//!    bisection: the difference of the two conjugates is monotone in `s`.
//! 3. [`graham_scan`] walks the pieces left to right, keeping a stack of
//!    bitangents with strictly increasing slopes. A new bitangent whose slope
//!    does not exceed the top of the stack pops it and is recomputed from the
//!    popped bitangent's left piece.
//!
//! [`build_envelope`] then glues `p` and the surviving bitangents into a
//! [`PiecewiseEnvelope`]: affine strictly between each bitangent's touch
//! points, `p` everywhere else.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::poly::{Interval, Polynomial};

/// Segments narrower than this are fused into their neighbours.
pub const MIN_SEGMENT_WIDTH: f64 = 1e-10;

/// Relative slack used when clamping evaluation points into the domain.
pub const DOMAIN_SLACK: f64 = 1e-9;

/// Convex pieces `I_0 <= I_1 <= ... <= I_k` of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexIntervals {
    intervals: Vec<Interval>,
}

impl ConvexIntervals {
    pub fn as_slice(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Number of gaps between consecutive pieces (`k`).
    pub fn gap_count(&self) -> usize {
        self.intervals.len().saturating_sub(1)
    }

    pub fn get(&self, i: usize) -> Option<&Interval> {
        self.intervals.get(i)
    }
}

impl std::ops::Index<usize> for ConvexIntervals {
    type Output = Interval;

    fn index(&self, i: usize) -> &Interval {
        &self.intervals[i]
    }
}

/// Affine minorant `slope * x + intercept` touching `p` once in each of two
/// convex pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bitangent {
    pub slope: f64,
    pub intercept: f64,
    pub left_touch: f64,
    pub right_touch: f64,
    pub left_index: usize,
    pub right_index: usize,
}

impl Bitangent {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Output of [`graham_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Stack contents, bottom to top; slopes strictly increase.
    pub bitangents: Vec<Bitangent>,
    /// Number of [`bitangent`] evaluations performed.
    pub bitangent_calls: usize,
    /// Number of stack pops.
    pub pops: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    Convex,
    Concave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Segment {
    /// The envelope follows the polynomial itself on `[from, to]`.
    Poly { from: f64, to: f64 },
    Affine { from: f64, to: f64, slope: f64, intercept: f64 },
}

impl Segment {
    pub fn from(&self) -> f64 {
        match *self {
            Segment::Poly { from, .. } | Segment::Affine { from, .. } => from,
        }
    }

    pub fn to(&self) -> f64 {
        match *self {
            Segment::Poly { to, .. } | Segment::Affine { to, .. } => to,
        }
    }

    pub fn width(&self) -> f64 {
        self.to() - self.from()
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, Segment::Affine { .. })
    }

    fn set_from(&mut self, x: f64) {
        match self {
            Segment::Poly { from, .. } | Segment::Affine { from, .. } => *from = x,
        }
    }

    fn set_to(&mut self, x: f64) {
        match self {
            Segment::Poly { to, .. } | Segment::Affine { to, .. } => *to = x,
        }
    }
}

/// Piecewise envelope over `domain`: alternating stretches of `p` and affine
/// bitangent pieces. Segments are stored in their final sign, so a concave
/// envelope evaluates exactly like a convex one.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseEnvelope {
    poly: Polynomial,
    derivative: Polynomial,
    domain: Interval,
    curvature: Curvature,
    segments: Vec<Segment>,
    bitangents: Vec<Bitangent>,
}

impl PiecewiseEnvelope {
    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Bitangents that produced the affine segments, in the envelope's sign.
    pub fn bitangents(&self) -> &[Bitangent] {
        &self.bitangents
    }

    /// `b_0 < b_1 < ... < b_m`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push(self.domain.lo);
        out.extend(self.segments.iter().map(Segment::to));
        out
    }

    /// True when the envelope is `p` itself on the whole domain.
    pub fn is_exact(&self) -> bool {
        self.segments.iter().all(|s| !s.is_affine())
    }

    fn slack(&self) -> f64 {
        DOMAIN_SLACK * (1.0 + self.domain.lo.abs().max(self.domain.hi.abs()))
    }

    fn locate(&self, x: f64) -> &Segment {
        // at an interior breakpoint the right-hand segment wins
        let idx = self.segments.partition_point(|s| s.to() <= x);
        &self.segments[idx.min(self.segments.len() - 1)]
    }

    fn checked(&self, x: f64) -> Result<f64> {
        let slack = self.slack();
        if x.is_nan() || x < self.domain.lo - slack || x > self.domain.hi + slack {
            return Err(Error::OutOfDomain {
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        Ok(x.clamp(self.domain.lo, self.domain.hi))
    }

    /// Envelope value; `x` may lie outside the domain by a tiny relative slack.
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval_clamped(self.checked(x)?))
    }

    /// Envelope derivative (right-hand at breakpoints).
    pub fn slope(&self, x: f64) -> Result<f64> {
        Ok(self.slope_clamped(self.checked(x)?))
    }

    /// Value at `x` clamped into the domain, without the domain check.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let x = x.clamp(self.domain.lo, self.domain.hi);
        match *self.locate(x) {
            Segment::Poly { .. } => self.poly.eval(x),
            Segment::Affine { slope, intercept, .. } => slope * x + intercept,
        }
    }

    /// Derivative at `x` clamped into the domain, without the domain check.
    pub fn slope_clamped(&self, x: f64) -> f64 {
        let x = x.clamp(self.domain.lo, self.domain.hi);
        match *self.locate(x) {
            Segment::Poly { .. } => self.derivative.eval(x),
            Segment::Affine { slope, .. } => slope,
        }
    }

    /// Minimum and maximum of the envelope over its domain.
    pub fn range(&self, tol: f64) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for seg in &self.segments {
            let (a, b) = match *seg {
                Segment::Poly { from, to } => self.poly.range(Interval { lo: from, hi: to }, tol)?,
                Segment::Affine { from, to, slope, intercept } => {
                    let (u, v) = (slope * from + intercept, slope * to + intercept);
                    (u.min(v), u.max(v))
                }
            };
            lo = lo.min(a);
            hi = hi.max(b);
        }
        Ok((lo, hi))
    }

    /// `{ "poly", "domain", "curvature", "bitangents", "segments" }`
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct EnvelopeFile<'a> {
            poly: &'a [f64],
            domain: Interval,
            curvature: Curvature,
            bitangents: &'a [Bitangent],
            segments: &'a [Segment],
        }
        io::to_json(&EnvelopeFile {
            poly: self.poly.coeffs(),
            domain: self.domain,
            curvature: self.curvature,
            bitangents: &self.bitangents,
            segments: &self.segments,
        })
    }

    fn negated(mut self) -> Self {
        self.poly = -&self.poly;
        self.derivative = -&self.derivative;
        for seg in &mut self.segments {
            if let Segment::Affine { slope, intercept, .. } = seg {
                *slope = -*slope;
                *intercept = -*intercept;
            }
        }
        for b in &mut self.bitangents {
            b.slope = -b.slope;
            b.intercept = -b.intercept;
        }
        self.curvature = match self.curvature {
            Curvature::Convex => Curvature::Concave,
            Curvature::Concave => Curvature::Convex,
        };
        self
    }
}

/// Closed pieces of `interval` where `p'' >= 0`.
pub fn convex_intervals(p: &Polynomial, interval: Interval, tol: f64) -> Result<ConvexIntervals> {
    if interval.is_degenerate() {
        return Ok(ConvexIntervals { intervals: vec![interval] });
    }
    let p2 = p.derivative().derivative();
    if p2.is_zero() {
        return Ok(ConvexIntervals { intervals: vec![interval] });
    }
    let mut knots = vec![interval.lo];
    knots.extend(p2.real_roots(interval, tol)?);
    knots.push(interval.hi);

    // indices j of the concave gaps (r_j, r_{j+1})
    let concave: Vec<usize> = (0..knots.len() - 1)
        .filter(|&j| p2.eval(0.5 * (knots[j] + knots[j + 1])) < 0.0)
        .collect();

    let mut intervals = Vec::with_capacity(concave.len() + 1);
    let mut start = knots[0];
    for &j in &concave {
        intervals.push(Interval { lo: start, hi: knots[j] });
        start = knots[j + 1];
    }
    intervals.push(Interval {
        lo: start,
        hi: *knots.last().unwrap(),
    });
    Ok(ConvexIntervals { intervals })
}

/// Restricted convex conjugate `sup_{x in I} (s x - p(x))` and its maximizer,
/// for `p` convex on `I`.
pub fn conjugate_eval(p: &Polynomial, interval: Interval, s: f64, tol: f64) -> Result<(f64, f64)> {
    conjugate_with(p, &p.derivative(), interval, s, tol)
}

fn conjugate_with(p: &Polynomial, dp: &Polynomial, interval: Interval, s: f64, tol: f64) -> Result<(f64, f64)> {
    let Interval { lo, hi } = interval;
    if interval.is_degenerate() {
        return Ok((s * lo - p.eval(lo), lo));
    }
    let (d_lo, d_hi) = (dp.eval(lo), dp.eval(hi));
    if d_lo > d_hi + tol * (1.0 + d_lo.abs() + d_hi.abs()) {
        return Err(Error::NotConvexOnInterval { lo, hi, d_lo, d_hi });
    }
    let x0 = if s <= d_lo {
        lo
    } else if s >= d_hi {
        hi
    } else {
        // p' is nondecreasing on I: bisect p'(x) = s
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let d = dp.eval(mid);
            if d == s {
                a = mid;
                b = mid;
                break;
            }
            if d < s {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    Ok((s * x0 - p.eval(x0), x0))
}

/// Bitangent of `p` through `intervals[left]` and `intervals[right]`.
pub fn bitangent(p: &Polynomial, intervals: &ConvexIntervals, left: usize, right: usize, tol: f64) -> Result<Bitangent> {
    bitangent_with(p, &p.derivative(), intervals, left, right, tol)
}

fn bitangent_with(
    p: &Polynomial,
    dp: &Polynomial,
    intervals: &ConvexIntervals,
    left: usize,
    right: usize,
    tol: f64,
) -> Result<Bitangent> {
    let (il, ir) = match (intervals.get(left), intervals.get(right)) {
        (Some(&il), Some(&ir)) if left < right => (il, ir),
        _ => {
            return Err(Error::Internal(format!(
                "bitangent needs left < right < {}, got ({left}, {right})",
                intervals.len()
            )))
        }
    };
    let hull = il.hull(&ir);
    let (m, big_m) = p.derivative_range(hull, tol)?;
    let gap = |s: f64| -> Result<(f64, f64, f64, f64)> {
        let (vl, xl) = conjugate_with(p, dp, il, s, tol)?;
        let (vr, xr) = conjugate_with(p, dp, ir, s, tol)?;
        Ok((vl - vr, vl, xl, xr))
    };

    let bracket_err = |reason: String| Error::BracketFailure {
        left,
        right,
        lo: m,
        hi: big_m,
        reason,
    };
    let scale = 1.0 + p.magnitude_at(hull.lo).max(p.magnitude_at(hull.hi)) + m.abs().max(big_m.abs()) * (1.0 + hull.lo.abs().max(hull.hi.abs()));
    let slack = 1e-9 * scale;
    let (g_lo, ..) = gap(m)?;
    let (g_hi, ..) = gap(big_m)?;
    if !(g_lo >= -slack) || !(g_hi <= slack) {
        return Err(bracket_err(format!("conjugate differences {g_lo} at m, {g_hi} at M")));
    }

    let target = tol.max(f64::EPSILON * m.abs().max(big_m.abs()));
    let cap = ((big_m - m) / target).log2().ceil().max(0.0) as usize + 4;
    let (mut s_min, mut s_max) = (m, big_m);
    let mut iterations = 0;
    while s_max - s_min > target {
        if iterations == cap {
            return Err(bracket_err(format!("bisection did not converge within {cap} steps")));
        }
        iterations += 1;
        let mid = 0.5 * (s_min + s_max);
        if mid <= s_min || mid >= s_max {
            break;
        }
        let (g, ..) = gap(mid)?;
        if g <= 0.0 {
            s_max = mid;
        } else {
            s_min = mid;
        }
    }
    let slope = 0.5 * (s_min + s_max);
    let (_, vl, xl, xr) = gap(slope)?;
    Ok(Bitangent {
        slope,
        intercept: -vl,
        left_touch: xl,
        right_touch: xr,
        left_index: left,
        right_index: right,
    })
}

/// Continuous Graham scan over the convex pieces of `p`.
pub fn graham_scan(p: &Polynomial, intervals: &ConvexIntervals, tol: f64) -> Result<ScanResult> {
    let mut result = ScanResult {
        bitangents: Vec::new(),
        bitangent_calls: 0,
        pops: 0,
    };
    let k = intervals.gap_count();
    if k == 0 {
        return Ok(result);
    }
    let dp = p.derivative();
    let whole = intervals[0].hull(&intervals[k]);
    let (m, big_m) = p.derivative_range(whole, tol)?;
    let tol_slope = 1e-9 * (1.0 + (big_m - m).abs());

    let stack = &mut result.bitangents;
    for i in 0..k {
        let mut line = bitangent_with(p, &dp, intervals, i, i + 1, tol)?;
        result.bitangent_calls += 1;
        while let Some(top) = stack.last() {
            if top.slope < line.slope - tol_slope {
                break;
            }
            let bad = stack.pop().unwrap();
            result.pops += 1;
            line = bitangent_with(p, &dp, intervals, bad.left_index, i + 1, tol)?;
            result.bitangent_calls += 1;
        }
        stack.push(line);
    }
    Ok(result)
}

/// Convex envelope of `p` over `interval`.
pub fn build_envelope(p: &Polynomial, interval: Interval, tol: f64) -> Result<PiecewiseEnvelope> {
    let dp = p.derivative();
    if interval.is_degenerate() {
        return Ok(PiecewiseEnvelope {
            poly: p.clone(),
            derivative: dp,
            domain: interval,
            curvature: Curvature::Convex,
            segments: vec![Segment::Poly {
                from: interval.lo,
                to: interval.hi,
            }],
            bitangents: Vec::new(),
        });
    }
    let intervals = convex_intervals(p, interval, tol)?;
    let scan = graham_scan(p, &intervals, tol)?;
    let segments = assemble(interval, &scan.bitangents);
    Ok(PiecewiseEnvelope {
        poly: p.clone(),
        derivative: dp,
        domain: interval,
        curvature: Curvature::Convex,
        segments,
        bitangents: scan.bitangents,
    })
}

/// Concave envelope of `p` over `interval`, computed as `-e(-p)`.
pub fn concave_envelope(p: &Polynomial, interval: Interval, tol: f64) -> Result<PiecewiseEnvelope> {
    Ok(build_envelope(&-p, interval, tol)?.negated())
}

/// Exact minimum and maximum of `p` over `interval`.
pub fn poly_range(p: &Polynomial, interval: Interval, tol: f64) -> Result<(f64, f64)> {
    p.range(interval, tol)
}

fn assemble(domain: Interval, bitangents: &[Bitangent]) -> Vec<Segment> {
    let mut raw = Vec::with_capacity(2 * bitangents.len() + 1);
    let mut cursor = domain.lo;
    for b in bitangents {
        let from = b.left_touch.clamp(cursor, domain.hi);
        let to = b.right_touch.clamp(from, domain.hi);
        raw.push(Segment::Poly { from: cursor, to: from });
        raw.push(Segment::Affine {
            from,
            to,
            slope: b.slope,
            intercept: b.intercept,
        });
        cursor = to;
    }
    raw.push(Segment::Poly {
        from: cursor,
        to: domain.hi,
    });

    let mut segments: Vec<Segment> = Vec::with_capacity(raw.len());
    for seg in raw {
        if seg.width() >= MIN_SEGMENT_WIDTH {
            if let Some(last) = segments.last_mut() {
                // absorb any dropped sliver before this segment
                let joint = last.to();
                let mut seg = seg;
                seg.set_from(joint);
                segments.push(seg);
            } else {
                let mut seg = seg;
                seg.set_from(domain.lo);
                segments.push(seg);
            }
        }
    }
    match segments.last_mut() {
        Some(last) => last.set_to(domain.hi),
        None => segments.push(Segment::Poly {
            from: domain.lo,
            to: domain.hi,
        }),
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn quartic() -> Polynomial {
        Polynomial::new(vec![9.0, -24.5, 22.0, -8.0, 1.0])
    }

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn convex_intervals_of_quadratics() {
        let up = Polynomial::new(vec![0.0, 0.0, 1.0]);
        assert_eq!(convex_intervals(&up, iv(-1.0, 1.0), TOL).unwrap().as_slice(), &[iv(-1.0, 1.0)]);
        let down = Polynomial::new(vec![0.0, 0.0, -1.0]);
        let ci = convex_intervals(&down, iv(-1.0, 1.0), TOL).unwrap();
        assert_eq!(ci.as_slice(), &[Interval::point(-1.0), Interval::point(1.0)]);
    }

    #[test]
    fn convex_intervals_of_quartic() {
        let ci = convex_intervals(&quartic(), iv(0.25, 3.75), TOL).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_eq!(ci.len(), 2);
        assert_eq!(ci[0].lo, 0.25);
        assert!((ci[0].hi - (2.0 - s)).abs() < 1e-10);
        assert!((ci[1].lo - (2.0 + s)).abs() < 1e-10);
        assert_eq!(ci[1].hi, 3.75);
    }

    #[test]
    fn conjugate_casework() {
        let sq = Polynomial::new(vec![0.0, 0.0, 1.0]);
        let (v, x) = conjugate_eval(&sq, iv(-1.0, 1.0), 0.0, TOL).unwrap();
        assert!(v.abs() < 1e-15 && x.abs() < 1e-15);
        assert_eq!(conjugate_eval(&sq, iv(-1.0, 1.0), 4.0, TOL).unwrap(), (3.0, 1.0));
        assert_eq!(conjugate_eval(&sq, Interval::point(2.0), 1.0, TOL).unwrap(), (-2.0, 2.0));
        let down = Polynomial::new(vec![0.0, 0.0, -1.0]);
        assert!(matches!(
            conjugate_eval(&down, iv(-1.0, 1.0), 0.0, TOL),
            Err(Error::NotConvexOnInterval { .. })
        ));
    }

    #[test]
    fn chord_between_singletons() {
        let down = Polynomial::new(vec![0.0, 0.0, -1.0]);
        let ci = convex_intervals(&down, iv(-1.0, 1.0), TOL).unwrap();
        let b = bitangent(&down, &ci, 0, 1, TOL).unwrap();
        assert!(b.slope.abs() < 1e-9);
        assert!((b.intercept + 1.0).abs() < 1e-9);
        assert_eq!((b.left_touch, b.right_touch), (-1.0, 1.0));
    }

    #[test]
    fn bitangent_rejects_bad_indices() {
        let ci = convex_intervals(&quartic(), iv(0.25, 3.75), TOL).unwrap();
        assert!(bitangent(&quartic(), &ci, 1, 1, TOL).is_err());
        assert!(bitangent(&quartic(), &ci, 0, 5, TOL).is_err());
    }

    #[test]
    fn convex_input_is_returned_unchanged() {
        let sq = Polynomial::new(vec![0.0, 0.0, 1.0]);
        let env = build_envelope(&sq, iv(-1.0, 1.0), TOL).unwrap();
        assert!(env.is_exact());
        assert_eq!(env.segments().len(), 1);
        let ci = convex_intervals(&sq, iv(-1.0, 1.0), TOL).unwrap();
        assert!(graham_scan(&sq, &ci, TOL).unwrap().bitangents.is_empty());
    }

    #[test]
    fn concave_input_gives_secant() {
        let down = Polynomial::new(vec![0.0, 0.0, -1.0]);
        let env = build_envelope(&down, iv(-1.0, 1.0), TOL).unwrap();
        assert_eq!(env.segments().len(), 1);
        match env.segments()[0] {
            Segment::Affine { slope, intercept, .. } => {
                assert!(slope.abs() < 1e-9 && (intercept + 1.0).abs() < 1e-9)
            }
            other => panic!("expected affine segment, got {other:?}"),
        }
        let cav = concave_envelope(&down, iv(-1.0, 1.0), TOL).unwrap();
        assert!(cav.is_exact());
        assert_eq!(cav.curvature(), Curvature::Concave);
        let up = Polynomial::new(vec![0.0, 0.0, 1.0]);
        let cav = concave_envelope(&up, iv(-1.0, 1.0), TOL).unwrap();
        assert!((cav.eval(0.3).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quartic_envelope_shape() {
        let env = build_envelope(&quartic(), iv(0.25, 3.75), TOL).unwrap();
        let segs = env.segments();
        assert_eq!(segs.len(), 3);
        assert!(!segs[0].is_affine() && segs[1].is_affine() && !segs[2].is_affine());
        assert!((segs[1].from() - 1.0).abs() < 1e-6);
        assert!((segs[1].to() - 3.0).abs() < 1e-6);
        assert!((env.eval(2.0).unwrap() + 1.0).abs() < 1e-9);
        assert_eq!(env.eval(0.25).unwrap(), quartic().eval(0.25));
    }

    #[test]
    fn out_of_domain_is_reported() {
        let env = build_envelope(&quartic(), iv(0.25, 3.75), TOL).unwrap();
        assert!(matches!(env.eval(4.0), Err(Error::OutOfDomain { .. })));
        assert!(env.eval(3.75 + 1e-12).is_ok());
    }

    #[test]
    fn degenerate_domain_is_constant() {
        let env = build_envelope(&quartic(), Interval::point(1.0), TOL).unwrap();
        assert_eq!(env.eval(1.0).unwrap(), quartic().eval(1.0));
    }

    #[test]
    fn slivers_are_fused() {
        let b = Bitangent {
            slope: 0.0,
            intercept: 0.0,
            left_touch: 1e-12,
            right_touch: 1.0,
            left_index: 0,
            right_index: 1,
        };
        let segs = assemble(iv(0.0, 2.0), &[b]);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].from(), 0.0);
        assert!(segs[0].is_affine());
        assert_eq!(segs[1].to(), 2.0);
    }
}
