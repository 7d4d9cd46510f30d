//! Pairs of representations: matched-word boundary sampling, cross-ratio
//! conformality statistics, joint growth exponents, and torus-volume
//! counting.
//!
//! The conformality statistic tests the contrapositive of circle-slice
//! rigidity on finite samples: a fraction bounded away from zero certifies
//! non-Moebius behavior of the boundary map on the tested set, while a
//! fraction of zero is evidence (never proof) of a Moebius extension. The
//! reporting language keeps that asymmetry.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descartes::PackingRun;
use crate::moebius::{
    cross_ratio, h3_distance, GeneralizedCircle, H3Point, MoebiusMap, SpherePoint,
};
use crate::orbits::{
    attracting_fixed_point, shell_estimate, ExponentEstimate, GroupPresentation, OrbitError,
};
use crate::stats::CountSeries;

#[derive(Debug, Error)]
pub enum JoiningError {
    #[error("invalid pair config: {0}")]
    InvalidPair(String),
    #[error("ping-pong verification failed: {0}")]
    NotSchottky(String),
    #[error("insufficient near-concyclic source quadruples: accepted {accepted}, needed at least {needed}")]
    InsufficientConcyclic { accepted: usize, needed: usize },
    #[error("paired runs have mismatched lengths: {0} vs {1}")]
    MismatchedPairing(usize, usize),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// Ping-pong data for one generator: the disk its words land in and the
/// disk its inverse's words land in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PingPongDisk {
    pub name: String,
    /// (center_x, center_y, radius)
    pub disk: [f64; 3],
    pub disk_inv: [f64; 3],
}

impl PingPongDisk {
    fn disk_center(&self) -> Complex64 {
        Complex64::new(self.disk[0], self.disk[1])
    }
    fn inv_center(&self) -> Complex64 {
        Complex64::new(self.disk_inv[0], self.disk_inv[1])
    }
}

/// Two presentations with matched generator names, plus verified ping-pong
/// disks for the first one.
#[derive(Debug, Clone)]
pub struct RepresentationPair {
    pub rho1: GroupPresentation,
    pub rho2: GroupPresentation,
    pub pingpong: Vec<PingPongDisk>,
}

#[derive(Serialize, Deserialize)]
struct PairFile {
    rho1: serde_json::Value,
    rho2: serde_json::Value,
    pingpong: Vec<PingPongDisk>,
}

impl RepresentationPair {
    pub fn new(
        rho1: GroupPresentation,
        rho2: GroupPresentation,
        pingpong: Vec<PingPongDisk>,
    ) -> Result<Self, JoiningError> {
        if rho1.names() != rho2.names() {
            return Err(JoiningError::InvalidPair(format!(
                "generator names differ: {:?} vs {:?}",
                rho1.names(),
                rho2.names()
            )));
        }
        if pingpong.len() != rho1.generator_count() {
            return Err(JoiningError::InvalidPair(format!(
                "expected {} ping-pong entries, found {}",
                rho1.generator_count(),
                pingpong.len()
            )));
        }
        let pair = RepresentationPair {
            rho1,
            rho2,
            pingpong,
        };
        pair.verify_pingpong()?;
        Ok(pair)
    }

    pub fn from_json_str(s: &str, normalize: bool) -> Result<Self, JoiningError> {
        let file: PairFile = serde_json::from_str(s)
            .map_err(|e| JoiningError::InvalidPair(format!("bad JSON: {e}")))?;
        let rho1 = GroupPresentation::from_json_str(&file.rho1.to_string(), normalize)?;
        let rho2 = GroupPresentation::from_json_str(&file.rho2.to_string(), normalize)?;
        Self::new(rho1, rho2, file.pingpong)
    }

    /// Checks the Schottky certificate for the first presentation: the 2n
    /// disks are pairwise disjoint and each generator maps the complement
    /// of its inverse disk into its forward disk.
    fn verify_pingpong(&self) -> Result<(), JoiningError> {
        for (i, di) in self.pingpong.iter().enumerate() {
            let gen_name = &self.rho1.names()[i];
            if &di.name != gen_name {
                return Err(JoiningError::InvalidPair(format!(
                    "ping-pong entry {i} is '{}', expected generator '{gen_name}'",
                    di.name
                )));
            }
            if di.disk[2] <= 0.0 || di.disk_inv[2] <= 0.0 {
                return Err(JoiningError::InvalidPair("non-positive disk radius".into()));
            }
        }
        let mut all_disks: Vec<(Complex64, f64, String)> = Vec::new();
        for d in &self.pingpong {
            all_disks.push((d.disk_center(), d.disk[2], d.name.clone()));
            all_disks.push((d.inv_center(), d.disk_inv[2], format!("{}'", d.name)));
        }
        for i in 0..all_disks.len() {
            for j in (i + 1)..all_disks.len() {
                let (ci, ri, ref ni) = all_disks[i];
                let (cj, rj, ref nj) = all_disks[j];
                if (ci - cj).norm() <= ri + rj {
                    return Err(JoiningError::NotSchottky(format!(
                        "disks {ni} and {nj} are not disjoint"
                    )));
                }
            }
        }
        for (i, d) in self.pingpong.iter().enumerate() {
            let g = &self.rho1.generators()[i];
            let source = GeneralizedCircle::from_center_radius(d.inv_center(), d.disk_inv[2]);
            let image = g.apply_circle(&source);
            let inside = !image.is_line()
                && (image.center().unwrap() - d.disk_center()).norm() + image.radius().unwrap()
                    <= d.disk[2] + 1e-9;
            // One exterior witness: the far side of the inverse disk must
            // land inside the forward disk as well.
            let witness =
                SpherePoint::Finite(d.inv_center() + Complex64::new(3.0 * d.disk_inv[2], 0.0));
            let witness_in = match g.apply(witness) {
                SpherePoint::Finite(z) => (z - d.disk_center()).norm() <= d.disk[2] + 1e-9,
                SpherePoint::Infinity => false,
            };
            if !inside || !witness_in {
                return Err(JoiningError::NotSchottky(format!(
                    "generator '{}' does not pair its disks",
                    d.name
                )));
            }
        }
        Ok(())
    }
}

/// Matched boundary points: for each reduced word, the attracting fixed
/// points of the word under both representations.
#[derive(Debug, Clone)]
pub struct BoundaryPairSample {
    pub pairs: Vec<(SpherePoint, SpherePoint)>,
    pub words: Vec<String>,
    pub depth: usize,
    /// Words loxodromic in one representation but not the other.
    pub rejected_mismatched: usize,
}

/// Samples the graph of the boundary map over all reduced words of length
/// exactly `depth`: pair = (fixed point under rho1, fixed point under rho2).
/// Equivariance holds by construction for sampled pairs.
pub fn boundary_pairs(
    pair: &RepresentationPair,
    depth: usize,
) -> Result<BoundaryPairSample, JoiningError> {
    assert!(depth >= 1);
    let alphabet = pair.rho1.alphabet_len();
    let firsts: Vec<u8> = (0..alphabet).collect();
    let per_subtree: Vec<(Vec<(SpherePoint, SpherePoint)>, Vec<String>, usize)> = firsts
        .into_par_iter()
        .map(|first| {
            let mut pairs = Vec::new();
            let mut words = Vec::new();
            let mut rejected = 0usize;
            let mut frontier = vec![(
                pair.rho1.letter(first),
                pair.rho2.letter(first),
                vec![first],
            )];
            for level in 1..=depth {
                if level == depth {
                    for (m1, m2, word) in &frontier {
                        match (attracting_fixed_point(m1), attracting_fixed_point(m2)) {
                            (Some(xi), Some(eta)) => {
                                pairs.push((xi, eta));
                                words.push(pair.rho1.word_string(word));
                            }
                            (None, None) => {}
                            _ => rejected += 1,
                        }
                    }
                    break;
                }
                let mut next = Vec::with_capacity(frontier.len() * (alphabet as usize - 1));
                for (m1, m2, word) in &frontier {
                    let last = *word.last().unwrap();
                    for l in 0..alphabet {
                        if l == (last ^ 1) {
                            continue;
                        }
                        let mut w = word.clone();
                        w.push(l);
                        next.push((
                            m1.compose(&pair.rho1.letter(l)),
                            m2.compose(&pair.rho2.letter(l)),
                            w,
                        ));
                    }
                }
                frontier = next;
            }
            (pairs, words, rejected)
        })
        .collect();

    let mut pairs = Vec::new();
    let mut words = Vec::new();
    let mut rejected_mismatched = 0;
    for (p, w, r) in per_subtree {
        pairs.extend(p);
        words.extend(w);
        rejected_mismatched += r;
    }
    Ok(BoundaryPairSample {
        pairs,
        words,
        depth,
        rejected_mismatched,
    })
}

/// Cross-ratio conformality statistics over a boundary-pair sample.
#[derive(Debug, Clone, Serialize)]
pub struct ConformalityReport {
    pub quadruples_tested: usize,
    pub max_imag_in: f64,
    pub max_imag_out: f64,
    /// Fraction of near-concyclic source quadruples whose image cross-ratio
    /// leaves the 10x tolerance band.
    pub violating_fraction: f64,
    pub tol_in: f64,
    pub seed: u64,
    /// "non-moebius-on-tested-set" when the fraction is positive, otherwise
    /// "consistent-with-moebius" (evidence, not proof).
    pub interpretation: &'static str,
}

/// Chordal separation floor for sampled quadruples: closer points make the
/// cross-ratio ill-conditioned and carry no concyclicity information.
pub const CR_SEPARATION_FLOOR: f64 = 1e-4;
/// Magnitude cap on the source cross-ratio, for the same reason.
pub const CR_MAGNITUDE_CAP: f64 = 100.0;

/// Draws random 4-subsets whose source cross-ratio is near-real (|Im| <
/// `tol_in`), and reports how often the image cross-ratio leaves the band
/// 10 * `tol_in`. Deterministic for a fixed seed.
///
/// Quadruples failing the conditioning guards ([`CR_SEPARATION_FLOOR`],
/// [`CR_MAGNITUDE_CAP`]) are skipped, so the 10x band sits well above
/// floating-point noise for any boundary map with bounded distortion.
pub fn conformality_stat(
    sample: &BoundaryPairSample,
    n_quadruples: usize,
    tol_in: f64,
    seed: u64,
) -> Result<ConformalityReport, JoiningError> {
    assert!(tol_in > 0.0 && n_quadruples > 0);
    if sample.pairs.len() < 4 {
        return Err(JoiningError::InsufficientConcyclic {
            accepted: 0,
            needed: 1,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attempts = 50 * n_quadruples;
    let mut accepted = 0usize;
    let mut violating = 0usize;
    let mut max_imag_in = 0.0f64;
    let mut max_imag_out = 0.0f64;
    for _ in 0..attempts {
        if accepted == n_quadruples {
            break;
        }
        let mut idx = [0usize; 4];
        let mut k = 0;
        while k < 4 {
            let i = rng.gen_range(0..sample.pairs.len());
            if !idx[..k].contains(&i) {
                idx[k] = i;
                k += 1;
            }
        }
        let xi: Vec<SpherePoint> = idx.iter().map(|&i| sample.pairs[i].0).collect();
        let eta: Vec<SpherePoint> = idx.iter().map(|&i| sample.pairs[i].1).collect();
        let separated = (0..4)
            .all(|a| ((a + 1)..4).all(|b| xi[a].chordal_distance(&xi[b]) >= CR_SEPARATION_FLOOR));
        if !separated {
            continue;
        }
        let cr_in = match cross_ratio(xi[0], xi[1], xi[2], xi[3]) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if cr_in.norm() > CR_MAGNITUDE_CAP || cr_in.im.abs() >= tol_in {
            continue;
        }
        let cr_out = match cross_ratio(eta[0], eta[1], eta[2], eta[3]) {
            Ok(v) => v,
            Err(_) => continue,
        };
        accepted += 1;
        max_imag_in = max_imag_in.max(cr_in.im.abs());
        max_imag_out = max_imag_out.max(cr_out.im.abs());
        if cr_out.im.abs() > 10.0 * tol_in {
            violating += 1;
        }
    }
    let needed = (n_quadruples / 10).max(1);
    if accepted < needed {
        return Err(JoiningError::InsufficientConcyclic { accepted, needed });
    }
    let violating_fraction = violating as f64 / accepted as f64;
    Ok(ConformalityReport {
        quadruples_tested: accepted,
        max_imag_in,
        max_imag_out,
        violating_fraction,
        tol_in,
        seed,
        interpretation: if violating_fraction > 0.0 {
            "non-moebius-on-tested-set"
        } else {
            "consistent-with-moebius"
        },
    })
}

/// Matched-word enumeration in the summed metric
/// `D(w) = d(rho1(w) o, o) + d(rho2(w) o, o)`.
#[derive(Debug, Clone)]
pub struct JointOrbit {
    /// Sorted joint distances of all matched words with `D <= t`.
    pub dists: Vec<f64>,
    pub complete: bool,
    pub threshold: f64,
    pub words_visited: usize,
    pub max_word_len: usize,
}

/// Enumerates matched words until the whole frontier lies beyond
/// `t + margin` in the summed metric (margin = twice the largest summed
/// generator displacement), or until the word cap trips.
pub fn joint_enumerate(
    pair: &RepresentationPair,
    o: &H3Point,
    t: f64,
    word_cap: usize,
) -> Result<JointOrbit, JoiningError> {
    let joint_disp = |m1: &MoebiusMap, m2: &MoebiusMap| {
        h3_distance(o, &m1.apply_h3(o)) + h3_distance(o, &m2.apply_h3(o))
    };
    let margin = 2.0
        * pair
            .rho1
            .generators()
            .iter()
            .zip(pair.rho2.generators())
            .map(|(m1, m2)| joint_disp(m1, m2))
            .fold(0.0f64, f64::max);

    let alphabet = pair.rho1.alphabet_len();
    let subtree_cap = word_cap / (alphabet as usize).max(1);
    let firsts: Vec<u8> = (0..alphabet).collect();
    let results: Vec<Result<(Vec<f64>, bool, usize, usize), JoiningError>> = firsts
        .into_par_iter()
        .map(|first| {
            let mut dists = Vec::new();
            let mut words = 0usize;
            let mut frontier = vec![(pair.rho1.letter(first), pair.rho2.letter(first), first)];
            let mut level = 1usize;
            loop {
                let mut level_min = f64::INFINITY;
                for (m1, m2, _) in &frontier {
                    words += 1;
                    let d = joint_disp(m1, m2);
                    level_min = level_min.min(d);
                    if d <= t {
                        dists.push(d);
                    }
                }
                if level_min > t + margin {
                    return Ok((dists, true, words, level));
                }
                if level >= 64 {
                    return Ok((dists, false, words, level));
                }
                let mut next = Vec::with_capacity(frontier.len() * (alphabet as usize - 1));
                for (m1, m2, last) in &frontier {
                    for l in 0..alphabet {
                        if l == (last ^ 1) {
                            continue;
                        }
                        next.push((
                            m1.compose(&pair.rho1.letter(l)),
                            m2.compose(&pair.rho2.letter(l)),
                            l,
                        ));
                    }
                    if next.len() > subtree_cap {
                        return Err(JoiningError::Orbit(OrbitError::FrontierOverflow {
                            cap: subtree_cap,
                            at_len: level + 1,
                        }));
                    }
                }
                frontier = next;
                level += 1;
            }
        })
        .collect();

    let mut dists = vec![0.0f64]; // identity word
    let mut complete = true;
    let mut words_visited = 1usize;
    let mut max_word_len = 0usize;
    for r in results {
        let (d, c, w, l) = r?;
        dists.extend(d);
        complete &= c;
        words_visited += w;
        max_word_len = max_word_len.max(l);
    }
    dists.sort_by(f64::total_cmp);
    Ok(JointOrbit {
        dists,
        complete,
        threshold: t,
        words_visited,
        max_word_len,
    })
}

/// Shell-slope estimate of the joint exponent over the window; the theorem
/// bound for Zariski-dense pairs of two factors is `2 / sqrt(2)`.
pub fn joint_exponent(
    joint: &JointOrbit,
    window: (f64, f64),
) -> Result<ExponentEstimate, JoiningError> {
    Ok(shell_estimate(&joint.dists, window)?)
}

/// A pair of circles counted by the product of their radii.
#[derive(Debug, Clone)]
pub struct TorusRecord {
    pub c1: GeneralizedCircle,
    pub c2: GeneralizedCircle,
    pub vol: f64,
}

/// How the second coordinate of each torus is produced.
pub enum MapRule<'a> {
    /// Pair every circle `C` with its Moebius image `m(C)`.
    Moebius(MoebiusMap),
    /// Pair circle `i` of the base run with circle `i` of this run.
    PairedRun(&'a PackingRun),
}

/// The torus records of a packing run under a pairing rule. Circles whose
/// image degenerates to a line carry no volume and are skipped (counted).
pub struct TorusCollection {
    pub records: Vec<TorusRecord>,
    pub skipped_lines: usize,
}

pub fn torus_records(run: &PackingRun, rule: &MapRule) -> Result<TorusCollection, JoiningError> {
    let mut records = Vec::with_capacity(run.len());
    let mut skipped = 0usize;
    match rule {
        MapRule::Moebius(m) => {
            for c in &run.circles {
                let r1 = run.radius_of(c);
                let c1 = GeneralizedCircle::from_center_radius(run.center_of(c), r1);
                let c2 = m.apply_circle(&c1);
                match c2.radius() {
                    Some(r2) => records.push(TorusRecord {
                        c1,
                        c2,
                        vol: r1 * r2,
                    }),
                    None => skipped += 1,
                }
            }
        }
        MapRule::PairedRun(other) => {
            if other.len() != run.len() {
                return Err(JoiningError::MismatchedPairing(run.len(), other.len()));
            }
            for (a, b) in run.circles.iter().zip(&other.circles) {
                let r1 = run.radius_of(a);
                let r2 = other.radius_of(b);
                let c1 = GeneralizedCircle::from_center_radius(run.center_of(a), r1);
                let c2 = GeneralizedCircle::from_center_radius(other.center_of(b), r2);
                records.push(TorusRecord {
                    c1,
                    c2,
                    vol: r1 * r2,
                });
            }
        }
    }
    Ok(TorusCollection {
        records,
        skipped_lines: skipped,
    })
}

/// Counts `#{T : vol(T) >= 1/t}` at each threshold.
pub fn torus_count(records: &[TorusRecord], thresholds: &[f64]) -> CountSeries {
    let mut vols: Vec<f64> = records.iter().map(|r| r.vol).collect();
    vols.sort_by(f64::total_cmp);
    let pairs = thresholds
        .iter()
        .map(|&t| {
            let cut = 1.0 / t;
            let n = vols.len() - vols.partition_point(|v| *v < cut);
            (t, n as u64)
        })
        .collect();
    CountSeries::new(pairs)
}
