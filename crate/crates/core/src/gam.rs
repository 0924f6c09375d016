//! Monotone polynomial GAMs `M(x) = Φ(Σ_i p_i(x_i))` over a box and their
//! convex relaxation `M'`, which composes the link envelope `e_I Φ` with the
//! sum of component envelopes. For a monotone link the relaxation is exact:
//! `min M' = min M`, attained at a product of per-component extremizers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::envelope::{build_envelope, concave_envelope, PiecewiseEnvelope};
use crate::error::{Error, Result};
use crate::io;
use crate::pkan::Pkan;
use crate::poly::{Interval, Polynomial};

/// Tolerance used when validating a model at construction.
pub const CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mpgam {
    components: Vec<Polynomial>,
    link: Polynomial,
    input_box: Vec<Interval>,
}

impl Mpgam {
    /// Validates shapes and checks the link for monotonicity over the range
    /// of `Σ p_i` on the box.
    pub fn new(components: Vec<Polynomial>, link: Polynomial, input_box: Vec<Interval>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::parse("components", "need at least one component"));
        }
        if input_box.len() != components.len() {
            return Err(Error::parse(
                "box",
                format!("expected {} intervals, found {}", components.len(), input_box.len()),
            ));
        }
        let g = Mpgam {
            components,
            link,
            input_box,
        };
        check_monotone(&g.link, g.sum_range(CHECK_TOL)?, CHECK_TOL)?;
        Ok(g)
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn link(&self) -> &Polynomial {
        &self.link
    }

    pub fn input_box(&self) -> &[Interval] {
        &self.input_box
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `M(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let s: f64 = self.components.iter().zip(x).map(|(p, &v)| p.eval(v)).sum();
        Ok(self.link.eval(s))
    }

    /// Exact range of `Σ p_i` over the box.
    pub fn sum_range(&self, tol: f64) -> Result<Interval> {
        let (mut lo, mut hi) = (0.0, 0.0);
        for (p, &b) in self.components.iter().zip(&self.input_box) {
            let (a, c) = p.range(b, tol)?;
            lo += a;
            hi += c;
        }
        Ok(Interval { lo, hi })
    }

    /// The same model as a two-layer PKAN with dims `[d, 1, 1]`.
    pub fn to_pkan(&self) -> Result<Pkan> {
        Pkan::new(
            vec![self.dim(), 1, 1],
            vec![vec![self.components.clone()], vec![vec![self.link.clone()]]],
            self.input_box.clone(),
        )
    }

    /// Random model with `dim` components of degree 2 to `degree`, coefficients
    /// uniform in `[-1, 1]`, boxes inside `[-2, 2]` and a strictly monotone
    /// cubic link `±(a s + b s^2 + c s^3)` with `b^2 < 3ac`.
    pub fn generate_random(dim: usize, degree: usize, seed: u64) -> Mpgam {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let components = (0..dim)
            .map(|_| {
                let n = rng.random_range(2..=degree.max(2));
                Polynomial::new((0..=n).map(|_| rng.random_range(-1.0..=1.0)).collect())
            })
            .collect();
        let input_box = (0..dim)
            .map(|_| {
                let a: f64 = rng.random_range(-2.0..2.0);
                let b: f64 = rng.random_range(-2.0..2.0);
                let (lo, hi) = (a.min(b), a.max(b));
                if hi - lo < 0.1 {
                    Interval { lo: -1.0, hi: 1.0 }
                } else {
                    Interval { lo, hi }
                }
            })
            .collect();
        let a: f64 = rng.random_range(0.1..1.0);
        let c: f64 = rng.random_range(0.05..0.5);
        let bound = (3.0 * a * c).sqrt();
        let b = rng.random_range(-0.9..0.9) * bound;
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let link = Polynomial::new(vec![0.0, sign * a, sign * b, sign * c]);
        Mpgam {
            components,
            link,
            input_box,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        io::to_json(&GamFile {
            components: self.components.iter().map(|p| p.coeffs().to_vec()).collect(),
            link: self.link.coeffs().to_vec(),
            input_box: self.input_box.iter().map(|&b| b.into()).collect(),
        })
    }

    pub fn from_json(text: &str) -> Result<Mpgam> {
        let file: GamFile = io::from_json(text)?;
        let components = file
            .components
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                if c.is_empty() {
                    Err(Error::parse(format!("components[{i}]"), "empty coefficient list"))
                } else {
                    Ok(Polynomial::new(c))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if file.link.is_empty() {
            return Err(Error::parse("link", "empty coefficient list"));
        }
        let input_box = file
            .input_box
            .iter()
            .enumerate()
            .map(|(i, &[lo, hi])| {
                Interval::new(lo, hi).map_err(|_| Error::parse(format!("box[{i}]"), format!("invalid interval [{lo}, {hi}]")))
            })
            .collect::<Result<Vec<_>>>()?;
        Mpgam::new(components, Polynomial::new(file.link), input_box)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct GamFile {
    components: Vec<Vec<f64>>,
    link: Vec<f64>,
    #[serde(rename = "box")]
    input_box: Vec<[f64; 2]>,
}

/// Per-component envelopes `P^-`, `P^+` and the interval `I` they span.
#[derive(Debug, Clone)]
pub struct ComponentEnvelopes {
    pub lower: Vec<PiecewiseEnvelope>,
    pub upper: Vec<PiecewiseEnvelope>,
    pub range: Interval,
}

pub fn component_envelopes(g: &Mpgam, tol: f64) -> Result<ComponentEnvelopes> {
    let mut lower = Vec::with_capacity(g.dim());
    let mut upper = Vec::with_capacity(g.dim());
    for (p, &b) in g.components.iter().zip(&g.input_box) {
        lower.push(build_envelope(p, b, tol)?);
        upper.push(concave_envelope(p, b, tol)?);
    }
    Ok(ComponentEnvelopes {
        lower,
        upper,
        range: g.sum_range(tol)?,
    })
}

/// Direction of a link that is monotone on `interval`. Isolated zeros of `Φ'`
/// without a sign change are allowed.
pub fn check_monotone(link: &Polynomial, interval: Interval, tol: f64) -> Result<Direction> {
    let d = link.derivative();
    let not_monotone = |at: f64| Error::NotMonotone {
        lo: interval.lo,
        hi: interval.hi,
        at,
    };
    if d.is_zero() {
        return Err(not_monotone(interval.midpoint()));
    }
    let mut knots = vec![interval.lo];
    knots.extend(d.real_roots(interval, tol)?);
    knots.push(interval.hi);
    let mut direction = None;
    for (j, w) in knots.windows(2).enumerate() {
        let v = d.eval(0.5 * (w[0] + w[1]));
        let here = if v > 0.0 {
            Direction::Increasing
        } else if v < 0.0 {
            Direction::Decreasing
        } else {
            continue;
        };
        match direction {
            None => direction = Some(here),
            Some(prev) if prev != here => return Err(not_monotone(knots[j] + 0.0)),
            Some(_) => {}
        }
    }
    direction.ok_or_else(|| not_monotone(interval.midpoint()))
}

/// The convex relaxation `M'` built once and reused for evaluation.
#[derive(Debug, Clone)]
pub struct GamRelaxation {
    envelopes: ComponentEnvelopes,
    link_envelope: PiecewiseEnvelope,
    direction: Direction,
}

impl GamRelaxation {
    pub fn new(g: &Mpgam, tol: f64) -> Result<Self> {
        let envelopes = component_envelopes(g, tol)?;
        let direction = check_monotone(&g.link, envelopes.range, tol)?;
        let link_envelope = build_envelope(&g.link, envelopes.range, tol)?;
        Ok(GamRelaxation {
            envelopes,
            link_envelope,
            direction,
        })
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn envelopes(&self) -> &ComponentEnvelopes {
        &self.envelopes
    }

    pub fn link_envelope(&self) -> &PiecewiseEnvelope {
        &self.link_envelope
    }

    /// `M'(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let parts = match self.direction {
            Direction::Increasing => &self.envelopes.lower,
            Direction::Decreasing => &self.envelopes.upper,
        };
        if x.len() != parts.len() {
            return Err(Error::DimensionMismatch {
                expected: parts.len(),
                found: x.len(),
            });
        }
        let mut s = 0.0;
        for (e, &v) in parts.iter().zip(x) {
            s += e.eval(v)?;
        }
        Ok(self.link_envelope.eval_clamped(s))
    }
}

/// `min_B M'` and a minimizer; equal to `min_B M` for monotone links.
/// Ties within a component resolve to the leftmost point.
pub fn gam_relaxation_min(g: &Mpgam, tol: f64) -> Result<(f64, Vec<f64>)> {
    let relax = GamRelaxation::new(g, tol)?;
    let mut s = 0.0;
    let mut argmin = Vec::with_capacity(g.dim());
    for (p, &b) in g.components.iter().zip(&g.input_box) {
        let (x, v) = match relax.direction {
            Direction::Increasing => p.argmin(b, tol)?,
            Direction::Decreasing => p.argmax(b, tol)?,
        };
        s += v;
        // + 0.0 turns a -0.0 root into 0.0
        argmin.push(x + 0.0);
    }
    Ok((relax.link_envelope.eval_clamped(s), argmin))
}

pub fn gam_relaxation_eval(g: &Mpgam, x: &[f64], tol: f64) -> Result<f64> {
    GamRelaxation::new(g, tol)?.eval(x)
}
