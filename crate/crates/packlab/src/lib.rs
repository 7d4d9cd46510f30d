//! packlab: a computational laboratory for circle packings and Kleinian
//! orbits.
//!
//! The crate generates bounded tangent-circle packings with exact integer
//! arithmetic, enumerates orbits of finitely generated Moebius groups in
//! hyperbolic 3-space, estimates growth exponents and box-counting
//! dimensions, runs cross-ratio rigidity diagnostics on pairs of
//! representations, and emits deterministic CSV/JSON/SVG artifacts.
//!
//! Modules:
//! * [`moebius`] - sphere points, generalized circles, Moebius maps, the
//!   upper half-space model, distances, Busemann values, cross-ratios.
//! * [`descartes`] - exact quadruple reflections and bounded packing
//!   generation up to a curvature threshold.
//! * [`orbits`] - word enumeration, growth-exponent estimation, limit-set
//!   sampling, box dimension, and the empirical conformal-measure check.
//! * [`stats`] - count series, power-law fits, region counts, sieve counts.
//! * [`joinings`] - representation pairs, boundary-map sampling, cross-ratio
//!   conformality statistics, joint exponents, torus counting.
//! * [`render`] - deterministic SVG/CSV/JSON emitters.
//!
//! All core types are immutable values and every estimator is a pure
//! function, so everything here is safe to use from parallel callers.
//! Where the crate itself parallelizes (packing generation, enumeration,
//! region counts) the observable output is canonicalized first, so results
//! do not depend on thread count.

pub mod descartes;
pub mod exact;
pub mod joinings;
pub mod moebius;
pub mod orbits;
pub mod render;
pub mod stats;
