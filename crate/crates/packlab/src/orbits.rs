//! Finitely generated Moebius-group machinery: orbit enumeration in
//! hyperbolic 3-space, shell-count growth estimation, limit-set sampling,
//! box-counting dimension, and an empirical conformal-measure diagnostic.
//!
//! Enumeration is by reduced word length with a distance filter, never by
//! assuming distance grows monotonically along words (it does not in
//! general). Truncation is kept honest through an explicit completeness
//! flag: the distance ball up to `T` is certified fully explored only when
//! every frontier word already sits beyond `T` plus a safety margin.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moebius::{busemann, h3_distance, H3Point, MoebiusMap, SpherePoint};
use crate::stats::least_squares_slope;

#[derive(Debug, Error, PartialEq)]
pub enum OrbitError {
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error(
        "frontier exceeded the configured cap of {cap} words (length {at_len}); lower T or L_max"
    )]
    FrontierOverflow { cap: usize, at_len: usize },
    #[error("insufficient data: need at least {need} shells in the window, found {found}")]
    InsufficientData { need: usize, found: usize },
    #[error("no loxodromic words found up to the requested depth")]
    NoLoxodromics,
    #[error("box counts saturate at the smallest scale; sample too sparse for this grid")]
    InsufficientResolution,
    #[error("epsilon grid must span at least 3 halvings")]
    InvalidEpsRange,
}

/// Threshold below which loxodromic trace tests reject borderline
/// (parabolic) elements.
pub const LOXODROMIC_TRACE_MARGIN: f64 = 1e-9;

const DEFAULT_WORD_CAP: usize = 8_000_000;

/// A finite set of orientation-preserving Moebius generators with names;
/// formal inverses are derived, giving a reduced-word alphabet of twice the
/// generator count.
#[derive(Debug, Clone)]
pub struct GroupPresentation {
    names: Vec<String>,
    maps: Vec<MoebiusMap>,
}

#[derive(Serialize, Deserialize)]
struct PresentationFile {
    generators: Vec<GeneratorEntry>,
}

#[derive(Serialize, Deserialize)]
struct GeneratorEntry {
    name: String,
    /// Row-major (a, b, c, d), each entry as [re, im].
    matrix: [[f64; 2]; 4],
}

impl GroupPresentation {
    pub fn new(named: Vec<(String, MoebiusMap)>) -> Result<Self, OrbitError> {
        if named.is_empty() {
            return Err(OrbitError::InvalidPresentation("no generators".into()));
        }
        let mut names = Vec::new();
        let mut maps = Vec::new();
        for (name, m) in named {
            if name.is_empty() {
                return Err(OrbitError::InvalidPresentation(
                    "empty generator name".into(),
                ));
            }
            if names.contains(&name) {
                return Err(OrbitError::InvalidPresentation(format!(
                    "duplicate generator name '{name}'"
                )));
            }
            if m.projectively_eq(&MoebiusMap::identity(), 1e-12) {
                return Err(OrbitError::InvalidPresentation(format!(
                    "generator '{name}' is the identity"
                )));
            }
            for (other, om) in names.iter().zip(&maps) {
                if m.projectively_eq(om, 1e-12) {
                    return Err(OrbitError::InvalidPresentation(format!(
                        "generators '{other}' and '{name}' coincide projectively"
                    )));
                }
            }
            names.push(name);
            maps.push(m);
        }
        Ok(GroupPresentation { names, maps })
    }

    /// Parses the presentation file format, rejecting matrices whose
    /// determinant strays from 1 by more than 1e-9 unless `normalize` opts
    /// into silent renormalization.
    pub fn from_json_str(s: &str, normalize: bool) -> Result<Self, OrbitError> {
        let file: PresentationFile = serde_json::from_str(s)
            .map_err(|e| OrbitError::InvalidPresentation(format!("bad JSON: {e}")))?;
        let mut named = Vec::new();
        for entry in file.generators {
            let e = |i: usize| Complex64::new(entry.matrix[i][0], entry.matrix[i][1]);
            let (a, b, c, d) = (e(0), e(1), e(2), e(3));
            let det = a * d - b * c;
            if !normalize && (det - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
                return Err(OrbitError::InvalidPresentation(format!(
                    "generator '{}' has determinant {det} (pass normalize to accept)",
                    entry.name
                )));
            }
            let m = MoebiusMap::new(a, b, c, d).map_err(|e| {
                OrbitError::InvalidPresentation(format!("generator '{}': {e}", entry.name))
            })?;
            named.push((entry.name, m));
        }
        Self::new(named)
    }

    pub fn to_json_string(&self) -> String {
        let file = PresentationFile {
            generators: self
                .names
                .iter()
                .zip(&self.maps)
                .map(|(name, m)| GeneratorEntry {
                    name: name.clone(),
                    matrix: [
                        [m.a.re, m.a.im],
                        [m.b.re, m.b.im],
                        [m.c.re, m.c.im],
                        [m.d.re, m.d.im],
                    ],
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("presentation serializes")
    }

    pub fn generator_count(&self) -> usize {
        self.maps.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn generators(&self) -> &[MoebiusMap] {
        &self.maps
    }

    /// The conjugated presentation `g -> m g m^-1` with the same names.
    pub fn conjugated(&self, m: &MoebiusMap) -> GroupPresentation {
        let inv = m.inverse();
        GroupPresentation {
            names: self.names.clone(),
            maps: self
                .maps
                .iter()
                .map(|g| m.compose(g).compose(&inv))
                .collect(),
        }
    }

    /// Letter `2i` is generator `i`, letter `2i + 1` its inverse.
    pub(crate) fn letter(&self, l: u8) -> MoebiusMap {
        let m = &self.maps[(l / 2) as usize];
        if l % 2 == 0 {
            *m
        } else {
            m.inverse()
        }
    }

    pub(crate) fn alphabet_len(&self) -> u8 {
        (self.maps.len() * 2) as u8
    }

    /// Renders a reduced word; an apostrophe marks an inverse letter.
    pub fn word_string(&self, word: &[u8]) -> String {
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        let mut out = String::new();
        for (i, &l) in word.iter().enumerate() {
            if !single && i > 0 {
                out.push('.');
            }
            out.push_str(&self.names[(l / 2) as usize]);
            if l % 2 == 1 {
                out.push('\'');
            }
        }
        out
    }
}

/// Convenience constructor for Schottky-type groups from disk pairings:
/// each `(name, c_inv, r_inv, c, r)` contributes the map sending the
/// exterior of the disk `(c_inv, r_inv)` onto the interior of `(c, r)`.
pub fn schottky_presentation(
    specs: &[(&str, Complex64, f64, Complex64, f64)],
) -> Result<GroupPresentation, OrbitError> {
    let named = specs
        .iter()
        .map(|(name, c1, r1, c2, r2)| {
            MoebiusMap::pairing(*c1, *r1, *c2, *r2)
                .map(|m| (name.to_string(), m))
                .map_err(|e| OrbitError::InvalidPresentation(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    GroupPresentation::new(named)
}

/// One enumerated orbit point.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub word: String,
    pub point: H3Point,
    pub dist: f64,
}

/// The result of an orbit enumeration: records sorted by distance, plus the
/// completeness certificate and a matrix-collision count (nonzero only when
/// distinct reduced words act identically, i.e. for non-free input).
#[derive(Debug, Clone)]
pub struct OrbitSet {
    pub records: Vec<OrbitRecord>,
    pub complete: bool,
    pub threshold: f64,
    pub max_word_len: usize,
    pub words_visited: usize,
    pub matrix_collisions: usize,
    /// Smallest distance among the words of length exactly `max_word_len`.
    pub frontier_min_dist: f64,
}

impl OrbitSet {
    /// Number of records with distance at most `t`.
    pub fn count_within(&self, t: f64) -> usize {
        self.records.partition_point(|r| r.dist <= t)
    }
}

struct Node {
    m: MoebiusMap,
    word: Vec<u8>,
}

fn compose_normalized(m: &MoebiusMap, g: &MoebiusMap) -> MoebiusMap {
    let raw = m.compose(g);
    // Products drift off det = 1 slowly; one cheap renormalization per
    // letter keeps distances honest at any depth.
    MoebiusMap::new(raw.a, raw.b, raw.c, raw.d).unwrap_or(raw)
}

/// Enumerates all orbit points of reduced word length at most `l_max` and
/// distance at most `t` from `o`, in parallel over first letters.
pub fn enumerate(
    pres: &GroupPresentation,
    o: &H3Point,
    t: f64,
    l_max: usize,
) -> Result<OrbitSet, OrbitError> {
    enumerate_with_cap(pres, o, t, l_max, DEFAULT_WORD_CAP)
}

/// The safety margin used by the completeness certificate: twice the
/// largest generator displacement from `o`.
pub fn completeness_margin(pres: &GroupPresentation, o: &H3Point) -> f64 {
    2.0 * pres
        .maps
        .iter()
        .map(|g| h3_distance(o, &g.apply_h3(o)))
        .fold(0.0f64, f64::max)
}

pub fn enumerate_with_cap(
    pres: &GroupPresentation,
    o: &H3Point,
    t: f64,
    l_max: usize,
    cap: usize,
) -> Result<OrbitSet, OrbitError> {
    let margin = completeness_margin(pres, o);

    let alphabet = pres.alphabet_len();
    let subtree_cap = cap / (alphabet as usize).max(1);
    let roots: Vec<u8> = (0..alphabet).collect();
    let results: Vec<Result<SubtreeOut, OrbitError>> = roots
        .into_par_iter()
        .map(|first| expand_orbit_subtree(pres, o, t, l_max, subtree_cap, first))
        .collect();

    let mut records = Vec::new();
    let mut keys: HashMap<[i64; 8], usize> = HashMap::new();
    if t >= 0.0 {
        records.push(OrbitRecord {
            word: String::new(),
            point: *o,
            dist: 0.0,
        });
        keys.insert(quantized_projective_key(&MoebiusMap::identity()), 1);
    }
    let mut frontier_min = f64::INFINITY;
    let mut words_visited = 1usize;
    for r in results {
        let out = r?;
        records.extend(out.records);
        frontier_min = frontier_min.min(out.frontier_min);
        words_visited += out.words;
        for (k, n) in out.keys {
            *keys.entry(k).or_insert(0) += n;
        }
    }
    records.sort_by(|a, b| a.dist.total_cmp(&b.dist).then_with(|| a.word.cmp(&b.word)));
    let matrix_collisions = keys.values().map(|n| n - 1).sum();

    let complete = if l_max == 0 {
        true
    } else {
        frontier_min > t + margin
    };
    Ok(OrbitSet {
        records,
        complete,
        threshold: t,
        max_word_len: l_max,
        words_visited,
        matrix_collisions,
        frontier_min_dist: frontier_min,
    })
}

/// The largest distance threshold whose ball is certified fully explored at
/// word length `l_max`: the frontier minimum minus the safety margin.
pub fn certified_threshold(
    pres: &GroupPresentation,
    o: &H3Point,
    l_max: usize,
) -> Result<f64, OrbitError> {
    let probe = enumerate(pres, o, -1.0, l_max)?;
    Ok(probe.frontier_min_dist - completeness_margin(pres, o) - 1e-9)
}

struct SubtreeOut {
    records: Vec<OrbitRecord>,
    keys: Vec<([i64; 8], usize)>,
    frontier_min: f64,
    words: usize,
}

fn expand_orbit_subtree(
    pres: &GroupPresentation,
    o: &H3Point,
    t: f64,
    l_max: usize,
    cap: usize,
    first: u8,
) -> Result<SubtreeOut, OrbitError> {
    let mut records = Vec::new();
    let mut keys: HashMap<[i64; 8], usize> = HashMap::new();
    let mut frontier_min = f64::INFINITY;
    let mut words = 0usize;
    if l_max == 0 {
        return Ok(SubtreeOut {
            records,
            keys: vec![],
            frontier_min,
            words,
        });
    }

    let alphabet = pres.alphabet_len();
    let mut frontier = vec![Node {
        m: pres.letter(first),
        word: vec![first],
    }];
    let mut level = 1usize;
    loop {
        for node in &frontier {
            words += 1;
            let point = node.m.apply_h3(o);
            let dist = h3_distance(o, &point);
            if level == l_max {
                frontier_min = frontier_min.min(dist);
            }
            if dist <= t {
                *keys.entry(quantized_projective_key(&node.m)).or_insert(0) += 1;
                records.push(OrbitRecord {
                    word: pres.word_string(&node.word),
                    point,
                    dist,
                });
            }
        }
        if level == l_max {
            break;
        }
        let mut next = Vec::with_capacity(frontier.len() * (alphabet as usize - 1));
        for node in &frontier {
            let last = *node.word.last().unwrap();
            for l in 0..alphabet {
                if l == last ^ 1 {
                    continue; // reduced words only
                }
                let mut word = node.word.clone();
                word.push(l);
                next.push(Node {
                    m: compose_normalized(&node.m, &pres.letter(l)),
                    word,
                });
            }
            if next.len() > cap {
                return Err(OrbitError::FrontierOverflow {
                    cap,
                    at_len: level + 1,
                });
            }
        }
        frontier = next;
        level += 1;
    }
    Ok(SubtreeOut {
        records,
        keys: keys.into_iter().collect(),
        frontier_min,
        words,
    })
}

/// Sign-fixed, rounded matrix key: words whose maps agree projectively to
/// within the rounding scale collide on this key.
fn quantized_projective_key(m: &MoebiusMap) -> [i64; 8] {
    let entries = [m.a, m.b, m.c, m.d];
    let mut sign = 1.0;
    for e in entries {
        if e.norm() > 1e-9 {
            if e.re < 0.0 || (e.re == 0.0 && e.im < 0.0) {
                sign = -1.0;
            }
            break;
        }
    }
    let mut key = [0i64; 8];
    for (i, e) in entries.iter().enumerate() {
        key[2 * i] = (sign * e.re / 1e-9).round() as i64;
        key[2 * i + 1] = (sign * e.im / 1e-9).round() as i64;
    }
    key
}

/// A growth-exponent estimate with its regression window and standard error.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentEstimate {
    pub value: f64,
    pub window: (f64, f64),
    pub stderr: f64,
    pub sample_count: usize,
}

/// Least-squares slope of `log #{dist <= T}` against `T` over the shells in
/// the window: the growth-rate estimator of the orbit counting function.
/// The records should be complete up to the top of the window for the value
/// to be meaningful (check `OrbitSet::complete`).
pub fn critical_exponent(
    orbit: &OrbitSet,
    window: (f64, f64),
) -> Result<ExponentEstimate, OrbitError> {
    let dists: Vec<f64> = orbit.records.iter().map(|r| r.dist).collect();
    shell_estimate(&dists, window)
}

/// Shell regression over a sorted list of distances: distinct distance
/// values (grouped at 1e-9) become shells, and the slope of log(cumulative
/// count) against distance is fitted over the window.
pub(crate) fn shell_estimate(
    sorted_dists: &[f64],
    window: (f64, f64),
) -> Result<ExponentEstimate, OrbitError> {
    let mut shells: Vec<(f64, usize)> = Vec::new();
    for (i, d) in sorted_dists.iter().enumerate() {
        match shells.last_mut() {
            Some((prev, n)) if (d - *prev).abs() < 1e-9 => *n = i + 1,
            _ => shells.push((*d, i + 1)),
        }
    }
    let points: Vec<(f64, f64)> = shells
        .iter()
        .filter(|(d, _)| *d >= window.0 && *d <= window.1)
        .map(|(d, n)| (*d, (*n as f64).ln()))
        .collect();
    if points.len() < 10 {
        return Err(OrbitError::InsufficientData {
            need: 10,
            found: points.len(),
        });
    }
    let (value, stderr) = least_squares_slope(&points);
    let sample_count = sorted_dists.partition_point(|d| *d <= window.1);
    Ok(ExponentEstimate {
        value,
        window,
        stderr,
        sample_count,
    })
}

/// Attracting fixed point of a loxodromic map, or None when the trace test
/// `|tr| > 2 + margin` fails. Fixed points solve `c z^2 + (d - a) z - b = 0`;
/// the attracting root is the one where the derivative has modulus < 1.
pub fn attracting_fixed_point(m: &MoebiusMap) -> Option<SpherePoint> {
    if m.trace().norm() <= 2.0 + LOXODROMIC_TRACE_MARGIN {
        return None;
    }
    if m.c.norm() == 0.0 {
        // Fixed points are infinity and b/(d - a); derivative at the finite
        // one is 1/d^2.
        if m.d.norm() > 1.0 {
            return Some(SpherePoint::from_complex(m.b / (m.d - m.a)));
        }
        return Some(SpherePoint::Infinity);
    }
    let disc = (m.trace() * m.trace() - Complex64::new(4.0, 0.0)).sqrt();
    let z1 = (m.a - m.d + disc) / (2.0 * m.c);
    let z2 = (m.a - m.d - disc) / (2.0 * m.c);
    // |m'(z)| = 1/|cz + d|^2, so the attracting root maximizes |cz + d|.
    if (m.c * z1 + m.d).norm() > (m.c * z2 + m.d).norm() {
        Some(SpherePoint::from_complex(z1))
    } else {
        Some(SpherePoint::from_complex(z2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SampleMethod {
    OrbitAccumulation,
    LoxodromicFixedPoints,
}

/// A finite sample of the limit set, stored both on the sphere and in a
/// chart where every sampled point is finite.
#[derive(Debug, Clone)]
pub struct LimitSample {
    pub raw: Vec<SpherePoint>,
    pub charted: Vec<Complex64>,
    pub chart: MoebiusMap,
    pub chart_name: &'static str,
    pub method: SampleMethod,
    pub depth: usize,
}

/// Samples the limit set to the given word depth.
///
/// The orbit-accumulation method takes boundary shadows of the orbit points
/// in the top distance decile; the loxodromic method takes the attracting
/// fixed point of every enumerated word passing the trace test.
pub fn limit_sample(
    pres: &GroupPresentation,
    depth: usize,
    method: SampleMethod,
) -> Result<LimitSample, OrbitError> {
    let o = H3Point::base();
    let raw: Vec<SpherePoint> = match method {
        SampleMethod::LoxodromicFixedPoints => {
            let out = visit_words(pres, depth, DEFAULT_WORD_CAP, attracting_fixed_point)?;
            if out.is_empty() {
                return Err(OrbitError::NoLoxodromics);
            }
            out
        }
        SampleMethod::OrbitAccumulation => {
            let orbit = enumerate(pres, &o, f64::INFINITY, depth)?;
            let mut dists: Vec<f64> = orbit.records.iter().map(|r| r.dist).collect();
            dists.sort_by(f64::total_cmp);
            let cutoff = dists[(dists.len() * 9) / 10];
            orbit
                .records
                .iter()
                .filter(|r| r.dist >= cutoff && r.dist > 0.0)
                .filter_map(|r| boundary_shadow(&o, &r.point))
                .collect()
        }
    };
    let (chart, chart_name) = pick_chart(&raw);
    // The chart choice certifies boundedness for the identity and Cayley
    // cases; under the last-resort chart a point sitting at its pole would
    // come out non-finite and is dropped rather than poisoning the sample.
    let charted: Vec<Complex64> = raw
        .iter()
        .filter_map(|&p| chart.apply(p).as_complex())
        .collect();
    Ok(LimitSample {
        raw,
        charted,
        chart,
        chart_name,
        method,
        depth,
    })
}

/// Applies `f` to every reduced word's matrix up to the given length,
/// collecting the non-None values. Parallel over first letters.
fn visit_words<R: Send>(
    pres: &GroupPresentation,
    l_max: usize,
    cap: usize,
    f: impl Fn(&MoebiusMap) -> Option<R> + Sync,
) -> Result<Vec<R>, OrbitError> {
    let alphabet = pres.alphabet_len();
    let subtree_cap = cap / (alphabet as usize).max(1);
    let firsts: Vec<u8> = (0..alphabet).collect();
    let results: Vec<Result<Vec<R>, OrbitError>> = firsts
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            if l_max == 0 {
                return Ok(out);
            }
            let mut frontier = vec![(pres.letter(first), first)];
            for level in 1..=l_max {
                for (m, _) in &frontier {
                    if let Some(r) = f(m) {
                        out.push(r);
                    }
                }
                if level == l_max {
                    break;
                }
                let mut next = Vec::with_capacity(frontier.len() * (alphabet as usize - 1));
                for (m, last) in &frontier {
                    for l in 0..alphabet {
                        if l == last ^ 1 {
                            continue;
                        }
                        next.push((compose_normalized(m, &pres.letter(l)), l));
                    }
                    if next.len() > subtree_cap {
                        return Err(OrbitError::FrontierOverflow {
                            cap: subtree_cap,
                            at_len: level + 1,
                        });
                    }
                }
                frontier = next;
            }
            Ok(out)
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Endpoint on the sphere of the geodesic ray from `o` through `p`.
/// None when the two points coincide.
pub fn boundary_shadow(o: &H3Point, p: &H3Point) -> Option<SpherePoint> {
    let delta = p.z - o.z;
    let horiz = delta.norm();
    if horiz < 1e-15 {
        if p.t > o.t {
            return Some(SpherePoint::Infinity);
        }
        if p.t < o.t {
            return Some(SpherePoint::Finite(p.z));
        }
        return None;
    }
    let u = delta / horiz;
    // In the vertical half-plane through o and p, the geodesic is the
    // semicircle centered at (c, 0) with radius rho; the ray toward p exits
    // at offset c + rho.
    let c = (horiz * horiz + p.t * p.t - o.t * o.t) / (2.0 * horiz);
    let rho = (c * c + o.t * o.t).sqrt();
    Some(SpherePoint::Finite(o.z + (c + rho) * u))
}

/// Deterministic chart choice: identity when the sample sits in a small
/// bounded window, otherwise a Cayley-type map moving infinity away from
/// the sample (a rotated variant as fallback). Samples spilling toward
/// infinity must be compactified or box counting starves at large radii.
fn pick_chart(points: &[SpherePoint]) -> (MoebiusMap, &'static str) {
    const IDENTITY_BOUND: f64 = 10.0;
    const CHART_BOUND: f64 = 1e6;
    let bounded = |m: &MoebiusMap, bound: f64| {
        points.iter().all(|&p| match m.apply(p) {
            SpherePoint::Finite(z) => z.norm() <= bound,
            SpherePoint::Infinity => false,
        })
    };
    let identity = MoebiusMap::identity();
    if bounded(&identity, IDENTITY_BOUND) {
        return (identity, "identity");
    }
    let cayley = MoebiusMap::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
    )
    .unwrap();
    if bounded(&cayley, CHART_BOUND) {
        return (cayley, "cayley");
    }
    let eighth_turn = std::f64::consts::FRAC_PI_8;
    let rot = MoebiusMap::new(
        Complex64::from_polar(1.0, eighth_turn),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, -eighth_turn),
    )
    .unwrap();
    (cayley.compose(&rot), "cayley-rotated")
}

/// Box-counting dimension of a planar sample over a dyadic epsilon grid
/// anchored at the origin: the slope of `log(occupied boxes)` against
/// `log(1/eps)`.
pub fn box_dimension(
    points: &[Complex64],
    eps_max: f64,
    octaves: usize,
) -> Result<ExponentEstimate, OrbitError> {
    if octaves < 3 {
        return Err(OrbitError::InvalidEpsRange);
    }
    if points.is_empty() {
        return Err(OrbitError::InsufficientData { need: 1, found: 0 });
    }
    let mut counts = Vec::with_capacity(octaves + 1);
    for j in 0..=octaves {
        let eps = eps_max / (1u64 << j) as f64;
        let mut boxes: std::collections::HashSet<(i64, i64)> =
            std::collections::HashSet::with_capacity(points.len() / 4);
        for p in points {
            boxes.insert(((p.re / eps).floor() as i64, (p.im / eps).floor() as i64));
        }
        counts.push((eps, boxes.len()));
    }
    let n = points.len();
    let first = counts.first().unwrap().1;
    let last = counts.last().unwrap().1;
    if last == n && first != last && n > 1 {
        // Every point is isolated at the smallest scale while coarser
        // scales still aggregate: the grid has outrun the sample.
        return Err(OrbitError::InsufficientResolution);
    }
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .map(|(eps, c)| ((1.0 / eps).ln(), (*c as f64).ln()))
        .collect();
    let (value, stderr) = least_squares_slope(&pts);
    Ok(ExponentEstimate {
        value,
        window: (counts.last().unwrap().0, eps_max),
        stderr,
        sample_count: n,
    })
}

/// Empirical conformal-measure diagnostic at dimension `s`.
#[derive(Debug, Clone)]
pub struct PsEmpirical {
    /// Charted atom positions with normalized weights.
    pub atoms: Vec<(Complex64, f64)>,
    /// Partial orbital sum `sum exp(-s * dist)` before normalization.
    pub unnormalized_mass: f64,
    /// Max over generators and partition cells of the transport defect; a
    /// trend statistic, not a certified measure of anything.
    pub conformality_discrepancy: f64,
    pub chart: MoebiusMap,
}

/// Partial orbital series `sum_{dist <= t} exp(-s * dist)`.
pub fn poincare_partial_mass(orbit: &OrbitSet, s: f64, t: f64) -> f64 {
    orbit
        .records
        .iter()
        .take_while(|r| r.dist <= t)
        .map(|r| (-s * r.dist).exp())
        .sum()
}

/// Builds the empirical boundary measure with weights `exp(-s * dist)` at
/// the shadows of the orbit points, and reports how far it is from
/// satisfying the conformal transport identity against each generator over
/// an `n x n` cell partition (one global cell when `n = 1`).
///
/// Both sides of the identity are normalized to probability measures, so a
/// single atom is transported exactly and reports zero.
pub fn ps_empirical(
    pres: &GroupPresentation,
    orbit: &OrbitSet,
    s: f64,
    partition: usize,
) -> PsEmpirical {
    let o = H3Point::base();
    let mut raw: Vec<(SpherePoint, f64)> = Vec::new();
    let mut mass = 0.0;
    for r in &orbit.records {
        let w = (-s * r.dist).exp();
        mass += w;
        if r.dist > 0.0 {
            if let Some(shadow) = boundary_shadow(&o, &r.point) {
                raw.push((shadow, w));
            }
        }
    }
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    for rw in &mut raw {
        rw.1 /= total;
    }

    let sphere_points: Vec<SpherePoint> = raw.iter().map(|(p, _)| *p).collect();
    let (chart, _) = pick_chart(&sphere_points);
    let atoms: Vec<(Complex64, f64)> = raw
        .iter()
        .filter_map(|(p, w)| {
            // A pole hit under the last-resort chart has no planar
            // position; its mass still participates through raw_cell.
            chart.apply(*p).as_complex().map(|z| (z, *w))
        })
        .collect();

    // Cell layout over the charted bounding box.
    let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for (z, _) in &atoms {
        lo_x = lo_x.min(z.re);
        hi_x = hi_x.max(z.re);
        lo_y = lo_y.min(z.im);
        hi_y = hi_y.max(z.im);
    }
    let n = partition.max(1);
    // Cell index of a raw sphere point: grid cells over the charted
    // bounding box, plus one overflow cell so the partition covers the
    // whole sphere. A single-cell partition is the whole sphere.
    let raw_cell = |p: SpherePoint| -> usize {
        if n == 1 {
            return 0;
        }
        match chart.apply(p) {
            SpherePoint::Infinity => n * n,
            SpherePoint::Finite(z) => {
                if z.re < lo_x || z.re > hi_x || z.im < lo_y || z.im > hi_y {
                    return n * n;
                }
                let fx = ((z.re - lo_x) / (hi_x - lo_x).max(1e-300) * n as f64) as usize;
                let fy = ((z.im - lo_y) / (hi_y - lo_y).max(1e-300) * n as f64) as usize;
                fx.min(n - 1) * n + fy.min(n - 1)
            }
        }
    };

    let cells = if n == 1 { 1 } else { n * n + 1 };
    let mut discrepancy = 0.0f64;
    for g in pres.generators() {
        let ginv = g.inverse();
        let ginv_o = ginv.apply_h3(&o);
        let mut pushed = vec![0.0f64; cells];
        let mut transported = vec![0.0f64; cells];
        let mut z_norm = 0.0f64;
        let mut weights: Vec<(usize, f64)> = Vec::with_capacity(raw.len());
        for (xi, w) in &raw {
            // nu(g E) accumulates atoms with g^-1 xi in E.
            pushed[raw_cell(ginv.apply(*xi))] += w;
            // The transport side integrates exp(s * beta_xi(o, g^-1 o)).
            let factor = (s * busemann(*xi, &o, &ginv_o)).exp();
            z_norm += w * factor;
            weights.push((raw_cell(*xi), w * factor));
        }
        for (cell, w) in weights {
            transported[cell] += w / z_norm;
        }
        for j in 0..cells {
            discrepancy = discrepancy.max((pushed[j] - transported[j]).abs());
        }
    }

    PsEmpirical {
        atoms,
        unnormalized_mass: mass,
        conformality_discrepancy: discrepancy,
        chart,
    }
}
