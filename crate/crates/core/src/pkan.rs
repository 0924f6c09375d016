//! Polynomial Kolmogorov–Arnold networks: model, forward pass, interval bound
//! propagation and the envelope-based convex relaxation of the epigraph
//! problem `min t s.t. t >= z_{L,1}, z_{K,i} = sum_j phi_{K,i,j}(z_{K-1,j})`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelope::{build_envelope, concave_envelope, PiecewiseEnvelope};
use crate::error::{Error, Result};
use crate::io;
use crate::poly::{Interval, Polynomial};

/// Half-width of the input hypercube used for generated instances.
pub const RANDOM_BOX_HALF_WIDTH: f64 = 1.5;

/// A PKAN with layer sizes `d_0, ..., d_L` (`d_L = 1`). `layers[k]` holds the
/// `d_{k+1} x d_k` grid of edge polynomials of layer `K = k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pkan {
    dims: Vec<usize>,
    layers: Vec<Vec<Vec<Polynomial>>>,
    input_box: Vec<Interval>,
}

impl Pkan {
    pub fn new(dims: Vec<usize>, layers: Vec<Vec<Vec<Polynomial>>>, input_box: Vec<Interval>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::parse("dims", "need at least an input and an output layer"));
        }
        if let Some(k) = dims.iter().position(|&d| d == 0) {
            return Err(Error::parse(format!("dims[{k}]"), "layer sizes must be positive"));
        }
        if *dims.last().unwrap() != 1 {
            return Err(Error::parse(format!("dims[{}]", dims.len() - 1), "output layer must have size 1"));
        }
        if layers.len() != dims.len() - 1 {
            return Err(Error::parse(
                "layers",
                format!("expected {} layers for dims {:?}, found {}", dims.len() - 1, dims, layers.len()),
            ));
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.len() != dims[k + 1] {
                return Err(Error::parse(
                    format!("layers[{k}]"),
                    format!("expected {} rows, found {}", dims[k + 1], layer.len()),
                ));
            }
            for (i, row) in layer.iter().enumerate() {
                if row.len() != dims[k] {
                    return Err(Error::parse(
                        format!("layers[{k}][{i}]"),
                        format!("expected {} polynomials, found {}", dims[k], row.len()),
                    ));
                }
                for (j, p) in row.iter().enumerate() {
                    if p.coeffs().iter().any(|c| !c.is_finite()) {
                        return Err(Error::parse(format!("layers[{k}][{i}][{j}]"), "non-finite coefficient"));
                    }
                }
            }
        }
        if input_box.len() != dims[0] {
            return Err(Error::parse(
                "box",
                format!("expected {} intervals, found {}", dims[0], input_box.len()),
            ));
        }
        Ok(Pkan { dims, layers, input_box })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of polynomial layers `L`.
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn input_box(&self) -> &[Interval] {
        &self.input_box
    }

    /// `phi_{K,i,j}` with `K` in `1..=L`.
    pub fn edge(&self, layer: usize, i: usize, j: usize) -> &Polynomial {
        &self.layers[layer - 1][i][j]
    }

    pub fn layers(&self) -> &[Vec<Vec<Polynomial>>] {
        &self.layers
    }

    pub fn max_degree(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .flatten()
            .map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    /// Activations `z_{K,i}` for `K = 0..=L`.
    pub fn activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.dims[0] {
            return Err(Error::DimensionMismatch {
                expected: self.dims[0],
                found: x.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.dims.len());
        acts.push(x.to_vec());
        for layer in &self.layers {
            let prev = acts.last().unwrap();
            let next = layer
                .iter()
                .map(|row| row.iter().zip(prev).map(|(p, &v)| p.eval(v)).sum())
                .collect();
            acts.push(next);
        }
        Ok(acts)
    }

    pub fn forward_eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.activations(x)?.last().unwrap()[0])
    }

    /// Interval bounds on every activation, layer by layer: each unit's
    /// interval is the sum of the exact ranges of its incoming polynomials
    /// over the parents' intervals.
    pub fn propagate_bounds(&self, tol: f64) -> Result<LayerBounds> {
        let mut bounds = vec![self.input_box.clone()];
        for layer in &self.layers {
            let prev = bounds.last().unwrap();
            let mut next = Vec::with_capacity(layer.len());
            for row in layer {
                let (mut lo, mut hi) = (0.0, 0.0);
                for (p, &iv) in row.iter().zip(prev) {
                    let (a, b) = p.range(iv, tol)?;
                    lo += a;
                    hi += b;
                }
                next.push(Interval { lo, hi });
            }
            bounds.push(next);
        }
        Ok(LayerBounds { bounds })
    }

    /// Random instance with `layer_count` hidden layers of `width` units.
    ///
    /// Coefficients are i.i.d. standard normal scaled by
    /// `1 / (d_{K-1} sqrt(degree + 1))`; the input box is `[-1.5, 1.5]^d_0`.
    /// Layers are drawn in order, and a unit whose propagated interval would
    /// leave `[-1.5, 1.5]` has all its incoming polynomials scaled down by a
    /// common factor until it fits. Without that step interval bounds grow
    /// doubly exponentially with depth.
    pub fn generate_random(layer_count: usize, width: usize, input_dim: usize, degree: usize, seed: u64) -> Pkan {
        let mut dims = vec![input_dim];
        dims.extend(std::iter::repeat(width).take(layer_count));
        dims.push(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input_box = vec![
            Interval {
                lo: -RANDOM_BOX_HALF_WIDTH,
                hi: RANDOM_BOX_HALF_WIDTH,
            };
            input_dim
        ];
        let mut parent_bounds = input_box.clone();
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let scale = 1.0 / (fan_in as f64 * ((degree + 1) as f64).sqrt());
            let mut layer = Vec::with_capacity(fan_out);
            let mut bounds = Vec::with_capacity(fan_out);
            for _ in 0..fan_out {
                let row: Vec<Polynomial> = (0..fan_in)
                    .map(|_| {
                        let coeffs = (0..=degree)
                            .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                            .collect();
                        Polynomial::new(coeffs)
                    })
                    .collect();
                let (lo, hi) = row_range(&row, &parent_bounds);
                let magnitude = lo.abs().max(hi.abs());
                let (row, lo, hi) = if magnitude > RANDOM_BOX_HALF_WIDTH {
                    let f = RANDOM_BOX_HALF_WIDTH / magnitude;
                    let row: Vec<Polynomial> = row.iter().map(|p| p.scale(f)).collect();
                    let (lo, hi) = row_range(&row, &parent_bounds);
                    (row, lo, hi)
                } else {
                    (row, lo, hi)
                };
                layer.push(row);
                bounds.push(Interval { lo, hi });
            }
            layers.push(layer);
            parent_bounds = bounds;
        }
        Pkan { dims, layers, input_box }
    }

    pub fn to_json(&self) -> Result<String> {
        io::to_json(&PkanFile::from(self))
    }

    pub fn from_json(text: &str) -> Result<Pkan> {
        let file: PkanFile = io::from_json(text)?;
        file.into_pkan()
    }
}

fn row_range(row: &[Polynomial], parents: &[Interval]) -> (f64, f64) {
    row.iter().zip(parents).fold((0.0, 0.0), |(lo, hi), (p, &iv)| {
        // generation-time tolerance; ranges only steer the rescaling
        let (a, b) = p.range(iv, 1e-12).unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        (lo + a, hi + b)
    })
}

/// On-disk form: `{ "dims": [...], "box": [[lo, hi], ...], "layers": [...] }`.
#[derive(Debug, Serialize, Deserialize)]
struct PkanFile {
    dims: Vec<usize>,
    #[serde(rename = "box")]
    input_box: Vec<[f64; 2]>,
    layers: Vec<Vec<Vec<Vec<f64>>>>,
}

impl From<&Pkan> for PkanFile {
    fn from(net: &Pkan) -> Self {
        PkanFile {
            dims: net.dims.clone(),
            input_box: net.input_box.iter().map(|&iv| iv.into()).collect(),
            layers: net
                .layers
                .iter()
                .map(|l| l.iter().map(|r| r.iter().map(|p| p.coeffs().to_vec()).collect()).collect())
                .collect(),
        }
    }
}

impl PkanFile {
    fn into_pkan(self) -> Result<Pkan> {
        let input_box = self
            .input_box
            .iter()
            .enumerate()
            .map(|(i, &[lo, hi])| {
                Interval::new(lo, hi).map_err(|_| Error::parse(format!("box[{i}]"), format!("invalid interval [{lo}, {hi}]")))
            })
            .collect::<Result<Vec<_>>>()?;
        let layers = self
            .layers
            .into_iter()
            .enumerate()
            .map(|(k, l)| {
                l.into_iter()
                    .enumerate()
                    .map(|(i, r)| {
                        r.into_iter()
                            .enumerate()
                            .map(|(j, c)| {
                                if c.is_empty() {
                                    Err(Error::parse(format!("layers[{k}][{i}][{j}]"), "empty coefficient list"))
                                } else {
                                    Ok(Polynomial::new(c))
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect::<Result<Vec<Vec<Vec<Polynomial>>>>>()?;
        Pkan::new(self.dims, layers, input_box)
    }
}

/// Activation intervals `[l_K^(i), u_K^(i)]` for `K = 0..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerBounds {
    bounds: Vec<Vec<Interval>>,
}

impl LayerBounds {
    pub fn layer(&self, k: usize) -> &[Interval] {
        &self.bounds[k]
    }

    pub fn layers(&self) -> &[Vec<Interval>] {
        &self.bounds
    }

    pub fn output(&self) -> Interval {
        self.bounds.last().unwrap()[0]
    }

    /// True when every activation lies in its interval, up to `slack`
    /// relative to the interval magnitude.
    pub fn contains(&self, activations: &[Vec<f64>], slack: f64) -> bool {
        self.bounds.iter().zip(activations).all(|(bs, zs)| {
            bs.iter().zip(zs).all(|(iv, &z)| {
                let s = slack * (1.0 + iv.lo.abs().max(iv.hi.abs()));
                z >= iv.lo - s && z <= iv.hi + s
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    /// `z_{K,i} >= sum_j e(z_{K-1,j})`
    Lower,
    /// `z_{K,i} <= sum_j E(z_{K-1,j})`
    Upper,
}

#[derive(Debug, Clone)]
pub struct EnvelopeTerm {
    pub var: usize,
    pub envelope: PiecewiseEnvelope,
}

/// One relaxed layer equation, written as the convex constraint `g(v) <= 0`.
#[derive(Debug, Clone)]
pub struct EnvelopeConstraint {
    pub layer: usize,
    pub unit: usize,
    pub target: usize,
    pub sense: Sense,
    pub terms: Vec<EnvelopeTerm>,
}

impl EnvelopeConstraint {
    /// `g(v)`: `sum e - z` for lower constraints, `z - sum E` for upper ones.
    pub fn value(&self, point: &[f64]) -> f64 {
        let sum: f64 = self.terms.iter().map(|t| t.envelope.eval_clamped(point[t.var])).sum();
        match self.sense {
            Sense::Lower => sum - point[self.target],
            Sense::Upper => point[self.target] - sum,
        }
    }

    /// Value and a subgradient of `g` at `point`, as sparse `(var, coeff)` pairs.
    pub fn linearize(&self, point: &[f64]) -> (f64, Vec<(usize, f64)>) {
        let sign = match self.sense {
            Sense::Lower => 1.0,
            Sense::Upper => -1.0,
        };
        let mut grad = Vec::with_capacity(self.terms.len() + 1);
        let mut sum = 0.0;
        for t in &self.terms {
            let x = point[t.var];
            sum += t.envelope.eval_clamped(x);
            grad.push((t.var, sign * t.envelope.slope_clamped(x)));
        }
        grad.push((self.target, -sign));
        (sign * sum - sign * point[self.target], grad)
    }
}

/// The convex relaxation: variables `t` (index 0) and `z_{K,i}`, their boxes,
/// and two envelope constraints per non-input unit. The objective is
/// `min t` subject to `t >= z_{L,1}`.
#[derive(Debug, Clone)]
pub struct RelaxedProblem {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    bounds: Vec<Interval>,
    constraints: Vec<EnvelopeConstraint>,
    layer_bounds: LayerBounds,
}

impl RelaxedProblem {
    pub const T: usize = 0;

    pub fn var_count(&self) -> usize {
        self.bounds.len()
    }

    /// Index of `z_{K,i}`.
    pub fn z(&self, layer: usize, unit: usize) -> usize {
        self.offsets[layer] + unit
    }

    pub fn output_var(&self) -> usize {
        self.z(self.dims.len() - 1, 0)
    }

    pub fn var_name(&self, var: usize) -> String {
        if var == Self::T {
            return "t".to_string();
        }
        let k = self.offsets.partition_point(|&o| o <= var) - 1;
        format!("z_{}_{}", k, var - self.offsets[k])
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn constraints(&self) -> &[EnvelopeConstraint] {
        &self.constraints
    }

    pub fn layer_bounds(&self) -> &LayerBounds {
        &self.layer_bounds
    }

    /// Full variable assignment induced by a network input: `z` from the
    /// forward pass and `t = z_{L,1}`.
    pub fn assignment(&self, activations: &[Vec<f64>]) -> Vec<f64> {
        let mut v = vec![0.0; self.var_count()];
        for (k, zs) in activations.iter().enumerate() {
            for (i, &z) in zs.iter().enumerate() {
                v[self.z(k, i)] = z;
            }
        }
        v[Self::T] = v[self.output_var()];
        v
    }

    /// Largest constraint value over all envelope constraints and `z_L - t`.
    pub fn max_violation(&self, point: &[f64]) -> f64 {
        let epi = point[self.output_var()] - point[Self::T];
        self.constraints.iter().map(|c| c.value(point)).fold(epi, f64::max)
    }
}

/// Builds the envelope relaxation of `net` over its propagated bounds.
pub fn build_relaxation(net: &Pkan, tol: f64) -> Result<RelaxedProblem> {
    let layer_bounds = net.propagate_bounds(tol)?;
    let mut offsets = Vec::with_capacity(net.dims.len());
    let mut next = 1;
    for &d in &net.dims {
        offsets.push(next);
        next += d;
    }
    let mut bounds = vec![layer_bounds.output()];
    for layer in layer_bounds.layers() {
        bounds.extend(layer.iter().copied());
    }

    let rows: Vec<(usize, usize)> = (1..net.dims.len())
        .flat_map(|k| (0..net.dims[k]).map(move |i| (k, i)))
        .collect();
    let built: Vec<(EnvelopeConstraint, EnvelopeConstraint)> = rows
        .par_iter()
        .map(|&(k, i)| -> Result<_> {
            let parents = layer_bounds.layer(k - 1);
            let mut lower = Vec::with_capacity(parents.len());
            let mut upper = Vec::with_capacity(parents.len());
            for (j, &iv) in parents.iter().enumerate() {
                let p = net.edge(k, i, j);
                let var = offsets[k - 1] + j;
                lower.push(EnvelopeTerm {
                    var,
                    envelope: build_envelope(p, iv, tol)?,
                });
                upper.push(EnvelopeTerm {
                    var,
                    envelope: concave_envelope(p, iv, tol)?,
                });
            }
            let target = offsets[k] + i;
            Ok((
                EnvelopeConstraint {
                    layer: k,
                    unit: i,
                    target,
                    sense: Sense::Lower,
                    terms: lower,
                },
                EnvelopeConstraint {
                    layer: k,
                    unit: i,
                    target,
                    sense: Sense::Upper,
                    terms: upper,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let constraints = built.into_iter().flat_map(|(a, b)| [a, b]).collect();

    Ok(RelaxedProblem {
        dims: net.dims.clone(),
        offsets,
        bounds,
        constraints,
        layer_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> Polynomial {
        Polynomial::new(vec![0.0, 0.0, 1.0])
    }

    fn unit_box(n: usize) -> Vec<Interval> {
        vec![Interval { lo: -1.0, hi: 1.0 }; n]
    }

    #[test]
    fn forward_examples() {
        let id = Pkan::new(vec![1, 1], vec![vec![vec![Polynomial::identity()]]], unit_box(1)).unwrap();
        assert_eq!(id.forward_eval(&[3.0]).unwrap(), 3.0);
        let net = Pkan::new(vec![2, 1], vec![vec![vec![sq(), sq()]]], unit_box(2)).unwrap();
        assert_eq!(net.forward_eval(&[1.0, 2.0]).unwrap(), 5.0);
        assert_eq!(
            net.forward_eval(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn bound_examples() {
        let net = Pkan::new(vec![1, 1], vec![vec![vec![sq()]]], unit_box(1)).unwrap();
        assert_eq!(net.propagate_bounds(1e-12).unwrap().output(), Interval { lo: 0.0, hi: 1.0 });
        let chain = Pkan::new(vec![1, 1, 1], vec![vec![vec![sq()]], vec![vec![sq()]]], unit_box(1)).unwrap();
        let b = chain.propagate_bounds(1e-12).unwrap();
        assert_eq!(b.layer(0), &unit_box(1)[..]);
        assert_eq!(b.output(), Interval { lo: 0.0, hi: 1.0 });
    }

    #[test]
    fn validation_errors() {
        assert!(Pkan::new(vec![1], vec![], unit_box(1)).is_err());
        assert!(Pkan::new(vec![1, 2], vec![vec![vec![sq()], vec![sq()]]], unit_box(1)).is_err());
        assert!(Pkan::new(vec![2, 1], vec![vec![vec![sq()]]], unit_box(2)).is_err());
        assert!(Pkan::new(vec![1, 1], vec![vec![vec![sq()]]], unit_box(2)).is_err());
    }

    #[test]
    fn concave_edge_relaxation() {
        let neg = Polynomial::new(vec![0.0, 0.0, -1.0]);
        let net = Pkan::new(vec![1, 1], vec![vec![vec![neg]]], unit_box(1)).unwrap();
        let rp = build_relaxation(&net, 1e-12).unwrap();
        assert_eq!(rp.var_count(), 3);
        assert_eq!(rp.constraints().len(), 2);
        let lower = &rp.constraints()[0].terms[0].envelope;
        assert!((lower.eval(0.3).unwrap() + 1.0).abs() < 1e-9);
        let upper = &rp.constraints()[1].terms[0].envelope;
        assert!(upper.is_exact());
        assert_eq!(rp.var_name(0), "t");
        assert_eq!(rp.var_name(rp.z(1, 0)), "z_1_0");
    }

    #[test]
    fn generation_is_deterministic() {
        let a = Pkan::generate_random(4, 4, 4, 4, 7);
        assert_eq!(a, Pkan::generate_random(4, 4, 4, 4, 7));
        assert_ne!(a, Pkan::generate_random(4, 4, 4, 4, 8));
        assert_eq!(a.dims(), &[4, 4, 4, 4, 4, 1]);
        assert_eq!(a.max_degree(), 4);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let net = Pkan::generate_random(2, 3, 2, 4, 1);
        let back = Pkan::from_json(&net.to_json().unwrap()).unwrap();
        assert_eq!(net, back);
        assert!(matches!(
            Pkan::from_json(r#"{"dims":[1,1],"box":[[-1,1]],"layers":[]}"#),
            Err(Error::Parse { .. })
        ));
        let minimal = Pkan::from_json(r#"{"dims":[1,1],"box":[[-5,5]],"layers":[[[[0,1]]]]}"#).unwrap();
        assert_eq!(minimal.forward_eval(&[2.0]).unwrap(), 2.0);
        let err = Pkan::from_json(r#"{"dims":[2,1],"box":[[-1,1],[-1,1]],"layers":[[[[0,1]]]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location == "layers[0][0]"), "{err}");
    }
}
