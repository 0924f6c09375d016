//! Exact convex envelopes of univariate polynomials via a continuous Graham
//! scan, and the convex relaxations they induce for polynomial
//! Kolmogorov–Arnold networks (PKANs) and monotone polynomial GAMs.

pub mod cli;
pub mod envelope;
pub mod error;
pub mod gam;
pub mod io;
pub mod lp;
pub mod oracles;
pub mod pkan;
pub mod poly;
pub mod solver;

pub use envelope::{
    bitangent, build_envelope, concave_envelope, conjugate_eval, convex_intervals, graham_scan, poly_range, Bitangent,
    ConvexIntervals, Curvature, PiecewiseEnvelope, ScanResult, Segment,
};
pub use error::{Error, Result};
pub use poly::{Interval, Polynomial};
