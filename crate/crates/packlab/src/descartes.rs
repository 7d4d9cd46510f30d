//! Exact-integer engine for bounded tangent-circle packings.
//!
//! A quadruple of mutually tangent circles is stored as four integer
//! curvatures plus four curvature-centers (curvature times center), kept as
//! Gaussian integers over one fixed denominator. The four reflections
//! `k_i -> 2 sum_{j != i} k_j - k_i` (and the same linear rule on the
//! curvature-centers) generate the whole packing; both quadratic relations
//! are preserved exactly, so deduplication is exact equality.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::exact::{perfect_sqrt, ComplexRational, GaussInt, Overflow};
use crate::moebius::GeneralizedCircle;
use num_complex::Complex64;

#[derive(Debug, Error, PartialEq)]
pub enum DescartesError {
    #[error("curvatures do not satisfy the quadratic relation 2*sum(k^2) = (sum k)^2")]
    RelationViolated,
    #[error("curvature-centers do not satisfy the extended quadratic relation")]
    ExtendedRelationViolated,
    #[error("zero curvature: quadruple contains a line, not realizable in a bounded packing")]
    ZeroCurvature,
    #[error("root is not bounded: expected exactly one negative curvature, found {0}")]
    UnboundedRoot(usize),
    #[error("curvatures admit no rational realization in the standard frame")]
    NotRealizable,
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

/// Four mutually tangent circles: integer curvatures `k` (negative marks the
/// bounding circle) and scaled curvature-centers `v` with `w_i = v_i / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DescartesQuadruple {
    k: [i128; 4],
    v: [GaussInt; 4],
    den: i128,
}

impl DescartesQuadruple {
    /// Builds a quadruple from curvatures and exact curvature-centers,
    /// verifying both quadratic relations exactly.
    pub fn new(k: [i128; 4], w: [ComplexRational; 4]) -> Result<Self, DescartesError> {
        let mut den: i128 = 1;
        for wi in &w {
            den = den.lcm(wi.re.denom()).lcm(wi.im.denom());
        }
        let v = [
            scale_to(w[0], den),
            scale_to(w[1], den),
            scale_to(w[2], den),
            scale_to(w[3], den),
        ];
        Self::from_scaled(k, v, den)
    }

    pub fn from_scaled(k: [i128; 4], v: [GaussInt; 4], den: i128) -> Result<Self, DescartesError> {
        assert!(den >= 1);
        let q = DescartesQuadruple { k, v, den }.reduced();
        if !q.curvature_relation_holds()? {
            return Err(DescartesError::RelationViolated);
        }
        if !q.center_relation_holds()? {
            return Err(DescartesError::ExtendedRelationViolated);
        }
        Ok(q)
    }

    /// The standard bounded root: curvatures (-1, 2, 2, 3), bounding circle
    /// centered at the origin, the curvature-2 circles on the imaginary axis.
    pub fn root_bounded() -> Self {
        DescartesQuadruple {
            k: [-1, 2, 2, 3],
            v: [
                GaussInt::ZERO,
                GaussInt::new(0, 1),
                GaussInt::new(0, -1),
                GaussInt::new(2, 0),
            ],
            den: 1,
        }
    }

    pub fn curvatures(&self) -> [i128; 4] {
        self.k
    }

    pub fn curvature_centers(&self) -> [ComplexRational; 4] {
        [
            ComplexRational::from_scaled(self.v[0], self.den),
            ComplexRational::from_scaled(self.v[1], self.den),
            ComplexRational::from_scaled(self.v[2], self.den),
            ComplexRational::from_scaled(self.v[3], self.den),
        ]
    }

    /// Curvature-centers as scaled Gaussian integers over the common
    /// denominator: `w_i = v_i / den` exactly.
    pub fn scaled_centers(&self) -> ([GaussInt; 4], i128) {
        (self.v, self.den)
    }

    fn reduced(self) -> Self {
        let mut g = self.den;
        for vi in &self.v {
            g = g.gcd(&vi.re).gcd(&vi.im);
        }
        if g <= 1 {
            return self;
        }
        DescartesQuadruple {
            k: self.k,
            v: self.v.map(|vi| GaussInt::new(vi.re / g, vi.im / g)),
            den: self.den / g,
        }
    }

    fn curvature_relation_holds(&self) -> Result<bool, Overflow> {
        let mut sum: i128 = 0;
        let mut sum_sq: i128 = 0;
        for &ki in &self.k {
            sum = sum.checked_add(ki).ok_or(Overflow)?;
            sum_sq = sum_sq
                .checked_add(ki.checked_mul(ki).ok_or(Overflow)?)
                .ok_or(Overflow)?;
        }
        let lhs = sum_sq.checked_mul(2).ok_or(Overflow)?;
        let rhs = sum.checked_mul(sum).ok_or(Overflow)?;
        Ok(lhs == rhs)
    }

    fn center_relation_holds(&self) -> Result<bool, Overflow> {
        let mut sum = GaussInt::ZERO;
        let mut sum_sq = GaussInt::ZERO;
        for &vi in &self.v {
            sum = sum.checked_add(vi)?;
            sum_sq = sum_sq.checked_add(vi.checked_sq()?)?;
        }
        Ok(sum_sq.checked_mul_scalar(2)? == sum.checked_sq()?)
    }

    /// Reflects the quadruple in the dual circle opposite slot `i`,
    /// replacing that circle with the other tangent completion:
    /// `k_i' = 2 sum_{j != i} k_j - k_i`, same rule on curvature-centers.
    pub fn reflect(&self, i: usize) -> Result<Self, Overflow> {
        assert!(i < 4);
        let mut k_sum: i128 = 0;
        let mut v_sum = GaussInt::ZERO;
        for j in 0..4 {
            if j != i {
                k_sum = k_sum.checked_add(self.k[j]).ok_or(Overflow)?;
                v_sum = v_sum.checked_add(self.v[j])?;
            }
        }
        let mut k = self.k;
        let mut v = self.v;
        k[i] = k_sum
            .checked_mul(2)
            .ok_or(Overflow)?
            .checked_sub(self.k[i])
            .ok_or(Overflow)?;
        v[i] = v_sum.checked_mul_scalar(2)?.checked_sub(self.v[i])?;
        Ok(DescartesQuadruple {
            k,
            v,
            den: self.den,
        })
    }

    /// Realizes the four circles: circle `i` has center `w_i / k_i` and
    /// radius `1 / |k_i|`. The circle of negative curvature is the bounding
    /// circle (its interior is the complement of the disk).
    pub fn realize(&self) -> Result<[GeneralizedCircle; 4], DescartesError> {
        if self.k.iter().any(|&ki| ki == 0) {
            return Err(DescartesError::ZeroCurvature);
        }
        let mut out = [GeneralizedCircle::unit_circle(); 4];
        for i in 0..4 {
            out[i] = circle_from_scaled(self.k[i], self.v[i], self.den);
        }
        Ok(out)
    }

    /// Realizes a bounded root from curvatures alone, in the standard frame:
    /// bounding circle at the origin, the first inner circle on the positive
    /// imaginary axis, remaining centers fixed by exact tangency.
    pub fn realize_root(k: [i128; 4]) -> Result<Self, DescartesError> {
        let q0 = DescartesQuadruple {
            k,
            v: [GaussInt::ZERO; 4],
            den: 1,
        };
        if !q0.curvature_relation_holds()? {
            return Err(DescartesError::RelationViolated);
        }
        if k.iter().any(|&ki| ki == 0) {
            return Err(DescartesError::ZeroCurvature);
        }
        let negatives = k.iter().filter(|&&ki| ki < 0).count();
        if negatives != 1 {
            return Err(DescartesError::UnboundedRoot(negatives));
        }
        let n = k.iter().position(|&ki| ki < 0).unwrap();
        let kn = k[n].checked_abs().ok_or(Overflow)?;
        if k.iter().enumerate().any(|(i, &ki)| i != n && ki <= kn) {
            // An inner circle must be strictly smaller than the bounding one.
            return Err(DescartesError::NotRealizable);
        }

        let inner: Vec<usize> = (0..4).filter(|&i| i != n).collect();
        let (p, q, m) = (inner[0], inner[1], inner[2]);
        let big_r = Ratio::new(1, kn);
        let r = |i: usize| Ratio::new(1, k[i]);
        let axis = big_r - r(p); // distance from origin to the first center

        // Center of circle j tangent to the bounding circle and to circle p;
        // the horizontal offset is 2 sqrt(D_j) / (k_j (k_p - |k_n|)) with
        // D_j = k_n k_p + k_p k_j + k_j k_n, a perfect square whenever the
        // curvature relation has integer solutions.
        let center_xy = |j: usize| -> Result<(Ratio<i128>, Ratio<i128>), DescartesError> {
            let y = ((big_r - r(j)) * (big_r - r(j)) - (r(p) + r(j)) * (r(p) + r(j)) + axis * axis)
                / (axis * 2);
            let d = k[n]
                .checked_mul(k[p])
                .ok_or(Overflow)?
                .checked_add(k[p].checked_mul(k[j]).ok_or(Overflow)?)
                .ok_or(Overflow)?
                .checked_add(k[j].checked_mul(k[n]).ok_or(Overflow)?)
                .ok_or(Overflow)?;
            let s = perfect_sqrt(d).ok_or(DescartesError::NotRealizable)?;
            let x = Ratio::new(2 * s, k[j] * (k[p] - kn));
            Ok((x, y))
        };

        let (xq, yq) = center_xy(q)?;
        let (xm_abs, ym) = center_xy(m)?;
        // The last center sits on either side of the imaginary axis; exact
        // tangency against circle q picks the sign. Positive wins ties.
        let tangent = |xm: Ratio<i128>| -> bool {
            let dx = xm - xq;
            let dy = ym - yq;
            let rad_sum = r(m) + r(q);
            dx * dx + dy * dy == rad_sum * rad_sum
        };
        let xm = if tangent(xm_abs) {
            xm_abs
        } else if tangent(-xm_abs) {
            -xm_abs
        } else {
            return Err(DescartesError::NotRealizable);
        };

        let zero = Ratio::new(0, 1);
        let mut centers = [(zero, zero); 4];
        centers[n] = (zero, zero);
        centers[p] = (zero, axis);
        centers[q] = (xq, yq);
        centers[m] = (xm, ym);

        let mut w = [ComplexRational::new(zero, zero); 4];
        for i in 0..4 {
            let ki = Ratio::new(k[i], 1);
            w[i] = ComplexRational::new(centers[i].0 * ki, centers[i].1 * ki);
        }
        Self::new(k, w)
    }
}

fn scale_to(w: ComplexRational, den: i128) -> GaussInt {
    let re = w.re * Ratio::new(den, 1);
    let im = w.im * Ratio::new(den, 1);
    debug_assert!(re.is_integer() && im.is_integer());
    GaussInt::new(re.to_integer(), im.to_integer())
}

fn circle_from_scaled(k: i128, v: GaussInt, den: i128) -> GeneralizedCircle {
    let scale = (den as f64) * (k as f64);
    let center = Complex64::new(v.re as f64 / scale, v.im as f64 / scale);
    GeneralizedCircle::from_center_radius(center, 1.0 / (k.unsigned_abs() as f64))
}

/// One circle of a packing run: exact curvature and scaled curvature-center,
/// plus the length of the reflection word that created it (0 for the root).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PackedCircle {
    pub curvature: i128,
    pub center_scaled: GaussInt,
    pub word_len: u32,
}

/// A completed bounded-packing generation up to a curvature threshold.
///
/// Circles are stored in canonical order (curvature, then lexicographic
/// curvature-center), so runs are byte-stable regardless of thread count.
#[derive(Debug, Clone)]
pub struct PackingRun {
    pub root: DescartesQuadruple,
    pub max_curvature: i128,
    pub den: i128,
    pub circles: Vec<PackedCircle>,
    pub dedup_policy: &'static str,
}

impl PackingRun {
    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }

    pub fn center_of(&self, c: &PackedCircle) -> Complex64 {
        let scale = (self.den as f64) * (c.curvature as f64);
        Complex64::new(
            c.center_scaled.re as f64 / scale,
            c.center_scaled.im as f64 / scale,
        )
    }

    pub fn radius_of(&self, c: &PackedCircle) -> f64 {
        1.0 / (c.curvature.unsigned_abs() as f64)
    }
}

/// Generates every distinct circle of the packing with curvature at most
/// `t`, breadth-first over reduced reflection words (no immediate repeat of
/// the same slot). The four root circles are emitted first; each reflection
/// emits only its newly created circle. A branch is pruned as soon as its
/// new curvature exceeds `t`.
pub fn generate(root: &DescartesQuadruple, t: i128) -> Result<PackingRun, DescartesError> {
    let negatives = root.k.iter().filter(|&&ki| ki < 0).count();
    if negatives != 1 {
        return Err(DescartesError::UnboundedRoot(negatives));
    }
    if root.k.iter().any(|&ki| ki == 0) {
        return Err(DescartesError::ZeroCurvature);
    }

    let mut circles: Vec<PackedCircle> = Vec::new();
    for i in 0..4 {
        if root.k[i] <= t {
            circles.push(PackedCircle {
                curvature: root.k[i],
                center_scaled: root.v[i],
                word_len: 0,
            });
        }
    }

    // Depth-1 frontier partition: each first reflection owns a disjoint
    // subtree of reduced words, so the union needs no cross-talk.
    let seeds: Vec<(DescartesQuadruple, usize)> = (0..4)
        .map(|i| root.reflect(i).map(|q| (q, i)))
        .collect::<Result<_, _>>()?;
    let subtree_results: Vec<Result<Vec<PackedCircle>, DescartesError>> = seeds
        .into_par_iter()
        .map(|(quad, first)| expand_subtree(root, quad, first, t))
        .collect();
    for r in subtree_results {
        circles.extend(r?);
    }

    circles.sort_unstable_by_key(|c| (c.curvature, c.center_scaled, c.word_len));
    circles.dedup_by_key(|c| (c.curvature, c.center_scaled));

    Ok(PackingRun {
        root: *root,
        max_curvature: t,
        den: root.den,
        circles,
        dedup_policy: "exact-curvature-center",
    })
}

fn expand_subtree(
    root: &DescartesQuadruple,
    seed: DescartesQuadruple,
    first: usize,
    t: i128,
) -> Result<Vec<PackedCircle>, DescartesError> {
    let mut out = Vec::new();
    let mut frontier: Vec<(DescartesQuadruple, usize, u32)> = Vec::new();
    if seed.k[first] <= t {
        out.push(PackedCircle {
            curvature: seed.k[first],
            center_scaled: seed.v[first],
            word_len: 1,
        });
        // Degenerate guard: if the reflection reproduced the same circle the
        // subtree is a fixed point and must not recurse.
        if seed.k[first] != root.k[first] || seed.v[first] != root.v[first] {
            frontier.push((seed, first, 1));
        }
    }
    let mut next: Vec<(DescartesQuadruple, usize, u32)> = Vec::new();
    while !frontier.is_empty() {
        for (quad, last, depth) in frontier.drain(..) {
            for i in 0..4 {
                if i == last {
                    continue;
                }
                let child = quad.reflect(i)?;
                if child.k[i] > t {
                    continue;
                }
                out.push(PackedCircle {
                    curvature: child.k[i],
                    center_scaled: child.v[i],
                    word_len: depth + 1,
                });
                if child.k[i] != quad.k[i] || child.v[i] != quad.v[i] {
                    next.push((child, i, depth + 1));
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
    }
    Ok(out)
}

/// Exact multiplicity of every curvature value in a completed run.
pub fn curvature_census(run: &PackingRun) -> BTreeMap<i128, u64> {
    let mut census = BTreeMap::new();
    for c in &run.circles {
        *census.entry(c.curvature).or_insert(0u64) += 1;
    }
    census
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    /// Tangency oracle on realized circles: adjacent circles of a quadruple
    /// touch externally, or internally against the bounding circle.
    fn assert_tangent(q: &DescartesQuadruple, tol: f64) {
        let circles = q.realize().unwrap();
        let k = q.curvatures();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let ci = circles[i].center().unwrap();
                let cj = circles[j].center().unwrap();
                let ri = circles[i].radius().unwrap();
                let rj = circles[j].radius().unwrap();
                let dist = (ci - cj).norm();
                let expected = if k[i] < 0 || k[j] < 0 {
                    (ri - rj).abs()
                } else {
                    ri + rj
                };
                assert!(
                    (dist - expected).abs() < tol,
                    "circles {i},{j} of {:?} not tangent: dist={dist}, expected={expected}",
                    k
                );
            }
        }
    }

    /// The new curvature after a reflection must be the second root of the
    /// slot's quadratic x^2 - 2 P x + (2 Q - P^2), with P and Q the sum and
    /// sum of squares of the other three curvatures.
    fn assert_second_root(parent: &DescartesQuadruple, child: &DescartesQuadruple, slot: usize) {
        let k = parent.curvatures();
        let p: i128 = (0..4).filter(|&j| j != slot).map(|j| k[j]).sum();
        let q: i128 = (0..4).filter(|&j| j != slot).map(|j| k[j] * k[j]).sum();
        let x = child.curvatures()[slot];
        assert_eq!(x * x - 2 * p * x + (2 * q - p * p), 0);
    }

    #[test]
    fn root_satisfies_relations_and_forced_curvature() {
        let root = DescartesQuadruple::root_bounded();
        let k = root.curvatures();
        assert_eq!(k, [-1, 2, 2, 3]);
        // 2(1 + 4 + 4 + 9) - 36 = 0
        assert_eq!(
            2 * k.iter().map(|x| x * x).sum::<i128>(),
            k.iter().sum::<i128>().pow(2)
        );
        // Discriminant of the slot-4 quadratic is zero, so k4 = 3 is forced.
        let d = k[0] * k[1] + k[1] * k[2] + k[2] * k[0];
        assert_eq!(d, 0);
        assert_tangent(&root, 1e-12);
        // As a constructed quadruple it passes full validation.
        DescartesQuadruple::new(k, root.curvature_centers()).unwrap();
    }

    #[test]
    fn reflect_is_involution_and_matches_root_oracle() {
        let root = DescartesQuadruple::root_bounded();
        for i in 0..4 {
            let once = root.reflect(i).unwrap();
            assert_second_root(&root, &once, i);
            assert_eq!(once.reflect(i).unwrap(), root);
        }
        // Spec'd slot values from the quadratic-root oracle.
        assert_eq!(root.reflect(0).unwrap().curvatures()[0], 15);
        assert_eq!(root.reflect(2).unwrap().curvatures()[2], 6);
    }

    #[test]
    fn random_reflection_words_preserve_relations_and_tangency() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let root = DescartesQuadruple::root_bounded();
        for _ in 0..300 {
            let mut quad = root;
            let mut last = usize::MAX;
            let len = rng.gen_range(1..=20);
            for _ in 0..len {
                let mut i = rng.gen_range(0..4);
                while i == last {
                    i = rng.gen_range(0..4);
                }
                let next = quad.reflect(i).unwrap();
                assert_second_root(&quad, &next, i);
                quad = next;
                last = i;
            }
            assert!(quad.curvature_relation_holds().unwrap());
            assert!(quad.center_relation_holds().unwrap());
            assert_tangent(&quad, 1e-9);
        }
    }

    #[test]
    fn realize_uses_curvature_center_convention() {
        // k = 2, w = 2i -> center i, radius 1/2.
        let c = circle_from_scaled(2, GaussInt::new(0, 2), 1);
        assert!((c.center().unwrap() - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((c.radius().unwrap() - 0.5).abs() < 1e-15);

        let circles = DescartesQuadruple::root_bounded().realize().unwrap();
        assert!(circles[0].center().unwrap().norm() < 1e-15);
        assert!((circles[0].radius().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn realize_rejects_zero_curvature() {
        // (0, 0, 1, 1) is a valid strip quadruple arithmetically.
        let q = DescartesQuadruple {
            k: [0, 0, 1, 1],
            v: [GaussInt::ZERO; 4],
            den: 1,
        };
        assert_eq!(q.realize().unwrap_err(), DescartesError::ZeroCurvature);
    }

    #[test]
    fn realize_root_reproduces_standard_frame() {
        let built = DescartesQuadruple::realize_root([-1, 2, 2, 3]).unwrap();
        assert_eq!(built, DescartesQuadruple::root_bounded());
    }

    #[test]
    fn realize_root_handles_other_integral_roots() {
        for k in [
            [-3, 5, 8, 8],
            [-11, 21, 24, 28],
            [-2, 3, 6, 7],
            [-6, 10, 15, 19],
            // The bounding slot need not come first.
            [2, -1, 2, 3],
            [5, 8, -3, 8],
        ] {
            let q = DescartesQuadruple::realize_root(k).unwrap();
            assert_eq!(q.curvatures(), k);
            assert_tangent(&q, 1e-12);
        }
    }

    #[test]
    fn realize_root_rejects_bad_input() {
        assert_eq!(
            DescartesQuadruple::realize_root([1, 1, 1, 1]).unwrap_err(),
            DescartesError::RelationViolated
        );
        assert_eq!(
            DescartesQuadruple::realize_root([0, 0, 1, 1]).unwrap_err(),
            DescartesError::ZeroCurvature
        );
        // (2, 2, 3, 15) solves the relation but is unbounded.
        assert_eq!(
            DescartesQuadruple::realize_root([2, 2, 3, 15]).unwrap_err(),
            DescartesError::UnboundedRoot(0)
        );
    }

    /// Independent brute-force enumerator: the full (unreduced) word tree
    /// with hash dedup of visited quadruples and collected circles. Slower
    /// but free of any traversal or pruning assumptions.
    fn brute_force_circles(root: &DescartesQuadruple, t: i128) -> HashSet<(i128, GaussInt)> {
        let mut seen_quads = HashSet::new();
        let mut circles = HashSet::new();
        let mut stack = vec![*root];
        seen_quads.insert(*root);
        while let Some(quad) = stack.pop() {
            for i in 0..4 {
                if quad.k[i] <= t {
                    circles.insert((quad.k[i], quad.v[i]));
                }
            }
            for i in 0..4 {
                let child = quad.reflect(i).unwrap();
                if child.k[i] > t {
                    continue;
                }
                if seen_quads.insert(child) {
                    stack.push(child);
                }
            }
        }
        circles
    }

    #[test]
    fn generate_small_thresholds_match_oracle() {
        let root = DescartesQuadruple::root_bounded();
        for t in [2, 3, 6, 15] {
            let run = generate(&root, t).unwrap();
            let oracle = brute_force_circles(&root, t);
            let got: HashSet<(i128, GaussInt)> = run
                .circles
                .iter()
                .map(|c| (c.curvature, c.center_scaled))
                .collect();
            assert_eq!(got.len(), run.circles.len(), "duplicate emission at t={t}");
            assert_eq!(got, oracle, "mismatch against brute force at t={t}");
        }
        // Known small counts: t=3 has the roots plus the mirror circle.
        assert_eq!(generate(&root, 3).unwrap().len(), 5);
        assert_eq!(generate(&root, 2).unwrap().len(), 3);
    }

    #[test]
    fn census_matches_spec_examples() {
        let root = DescartesQuadruple::root_bounded();
        let run = generate(&root, 3).unwrap();
        let census = curvature_census(&run);
        let expected: BTreeMap<i128, u64> = [(-1, 1), (2, 2), (3, 2)].into_iter().collect();
        assert_eq!(census, expected);
        assert_eq!(census.values().sum::<u64>() as usize, run.len());
    }

    #[test]
    fn generate_prefix_is_stable_under_larger_threshold() {
        let root = DescartesQuadruple::root_bounded();
        let small = generate(&root, 60).unwrap();
        let large = generate(&root, 200).unwrap();
        let prefix: Vec<&PackedCircle> =
            large.circles.iter().filter(|c| c.curvature <= 60).collect();
        assert_eq!(small.circles.len(), prefix.len());
        for (a, b) in small.circles.iter().zip(prefix) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn counting_is_monotone_and_grows() {
        let root = DescartesQuadruple::root_bounded();
        let mut prev = 0;
        for t in [4, 8, 16, 32, 64, 128] {
            let n = generate(&root, t).unwrap().len();
            assert!(n >= prev);
            prev = n;
        }
        let n64 = generate(&root, 64).unwrap().len();
        let n128 = generate(&root, 128).unwrap().len();
        assert!(n128 > n64);
    }

    #[test]
    fn generate_rejects_unbounded_roots() {
        let strip = DescartesQuadruple {
            k: [0, 0, 1, 1],
            v: [GaussInt::ZERO; 4],
            den: 1,
        };
        assert!(matches!(
            generate(&strip, 10).unwrap_err(),
            DescartesError::ZeroCurvature | DescartesError::UnboundedRoot(_)
        ));
    }
}
