//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values. Run with `cargo test -p packlab-cli --test
//! acceptance -- --nocapture` to see the numbers.

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use packlab::descartes::{curvature_census, generate, DescartesQuadruple};
use packlab::joinings::{
    boundary_pairs, conformality_stat, joint_enumerate, joint_exponent, torus_count, torus_records,
    MapRule, RepresentationPair, TorusRecord,
};
use packlab::moebius::{GeneralizedCircle, H3Point};
use packlab::orbits::{
    box_dimension, certified_threshold, critical_exponent, enumerate, limit_sample,
    GroupPresentation, SampleMethod,
};
use packlab::stats::{
    equidistribution_ratio, fit_power_law, mirror_region, sieve, CountSeries, Region,
};

const DELTA_APOLLONIAN: f64 = 1.3057;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn load_group(name: &str) -> GroupPresentation {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    GroupPresentation::from_json_str(&text, false).unwrap()
}

fn load_pair(name: &str) -> RepresentationPair {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    RepresentationPair::from_json_str(&text, false).unwrap()
}

#[test]
fn acceptance_01_apollonian_exponent() {
    let start = Instant::now();
    let run = generate(&DescartesQuadruple::root_bounded(), 1 << 16).unwrap();
    let series = CountSeries::from_run(&run);
    let (exponent, stderr) = fit_power_law(&series, (256.0, 65536.0)).unwrap();
    let elapsed = start.elapsed();
    assert!(
        (exponent - DELTA_APOLLONIAN).abs() <= 0.05,
        "fitted exponent {exponent} outside 1.3057 +- 0.05"
    );
    assert!(
        elapsed.as_secs() < 60,
        "generation and fit took {elapsed:?}"
    );
    println!(
        "ACCEPTANCE 1: PASS - exponent {exponent:.5} +- {stderr:.5} over [2^8, 2^16] \
         ({} circles in {elapsed:?})",
        run.len()
    );
}

#[test]
fn acceptance_02_descartes_invariants() {
    use rand::Rng;
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let root = DescartesQuadruple::root_bounded();
    let mut checked = 0usize;
    for _ in 0..10_000 {
        let mut quad = root;
        let mut last = usize::MAX;
        let len = rng.gen_range(1..=20);
        for _ in 0..len {
            let mut i = rng.gen_range(0..4);
            while i == last {
                i = rng.gen_range(0..4);
            }
            quad = quad.reflect(i).unwrap();
            last = i;
        }
        // Both quadratic relations, recomputed here in exact integer
        // arithmetic (the common denominator of the curvature-centers
        // cancels out of the homogeneous relation).
        let k = quad.curvatures();
        let sum: i128 = k.iter().sum();
        let sum_sq: i128 = k.iter().map(|x| x * x).sum();
        assert_eq!(2 * sum_sq, sum * sum, "curvature relation failed for {k:?}");
        let (v, _den) = quad.scaled_centers();
        let csq = |re: i128, im: i128| (re * re - im * im, 2 * re * im);
        let (mut sre, mut sim) = (0i128, 0i128);
        let (mut qre, mut qim) = (0i128, 0i128);
        for vi in &v {
            sre += vi.re;
            sim += vi.im;
            let (a, b) = csq(vi.re, vi.im);
            qre += a;
            qim += b;
        }
        let (s2re, s2im) = csq(sre, sim);
        assert_eq!(
            2 * qre,
            s2re,
            "extended relation (re) failed after length {len}"
        );
        assert_eq!(
            2 * qim,
            s2im,
            "extended relation (im) failed after length {len}"
        );

        // Realized tangency within 1e-9.
        let circles = quad.realize().unwrap();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let (ci, ri) = (circles[i].center().unwrap(), circles[i].radius().unwrap());
                let (cj, rj) = (circles[j].center().unwrap(), circles[j].radius().unwrap());
                let expected = if k[i] < 0 || k[j] < 0 {
                    (ri - rj).abs()
                } else {
                    ri + rj
                };
                let err = ((ci - cj).norm() - expected).abs();
                assert!(
                    err < 1e-9,
                    "tangency error {err:.2e} after word of length {len}"
                );
            }
        }
        checked += 1;
    }
    println!("ACCEPTANCE 2: PASS - {checked} random reflection words of length <= 20");
}

/// Fully independent enumerator: raw integer arrays, the full (unreduced)
/// word tree, hash dedup of states and circles.
mod oracle {
    use std::collections::HashSet;

    type Quad = ([i128; 4], [(i128, i128); 4]);

    fn reflect(q: &Quad, i: usize) -> Quad {
        let (k, v) = *q;
        let ks: i128 = k.iter().sum::<i128>() - k[i];
        let vs = (
            v.iter().map(|p| p.0).sum::<i128>() - v[i].0,
            v.iter().map(|p| p.1).sum::<i128>() - v[i].1,
        );
        let mut k2 = k;
        let mut v2 = v;
        k2[i] = 2 * ks - k[i];
        v2[i] = (2 * vs.0 - v[i].0, 2 * vs.1 - v[i].1);
        (k2, v2)
    }

    pub fn circles(root: Quad, t: i128) -> HashSet<(i128, (i128, i128))> {
        let mut seen = HashSet::new();
        let mut out = HashSet::new();
        let mut stack = vec![root];
        seen.insert(root);
        while let Some(q) = stack.pop() {
            for i in 0..4 {
                if q.0[i] <= t {
                    out.insert((q.0[i], q.1[i]));
                }
            }
            for i in 0..4 {
                let child = reflect(&q, i);
                if child.0[i] > t {
                    continue;
                }
                if seen.insert(child) {
                    stack.push(child);
                }
            }
        }
        out
    }
}

#[test]
fn acceptance_03_counting_oracle_equivalence() {
    let root = DescartesQuadruple::root_bounded();
    let w = root.curvature_centers();
    let root_plain = (
        root.curvatures(),
        [0, 1, 2, 3].map(|i| {
            let (re, im) = (w[i].re, w[i].im);
            assert!(re.is_integer() && im.is_integer());
            (re.to_integer(), im.to_integer())
        }),
    );
    for t in [3i128, 6, 15, 100] {
        let run = generate(&root, t).unwrap();
        let got: HashSet<(i128, (i128, i128))> = run
            .circles
            .iter()
            .map(|c| (c.curvature, (c.center_scaled.re, c.center_scaled.im)))
            .collect();
        assert_eq!(got.len(), run.len(), "duplicate circle at t={t}");
        let expected = oracle::circles(root_plain, t);
        assert_eq!(got, expected, "circle sets differ at t={t}");
        println!(
            "ACCEPTANCE 3: PASS at t={t} - {} circles match the brute-force oracle",
            run.len()
        );
    }
}

#[test]
fn acceptance_04_sullivan_identity() {
    for name in ["schottky_axes4.json", "schottky_axes6_r2.json"] {
        let start = Instant::now();
        let pres = load_group(name);
        let o = H3Point::base();
        let depth = 11;

        let t = certified_threshold(&pres, &o, depth).unwrap();
        let orbit = enumerate(&pres, &o, t, depth).unwrap();
        assert!(
            orbit.complete,
            "{name}: ball at T={t} not certified complete"
        );
        let delta = critical_exponent(&orbit, (0.4 * t, t)).unwrap();

        let sample = limit_sample(&pres, depth, SampleMethod::LoxodromicFixedPoints).unwrap();
        assert!(
            sample.charted.len() >= 100_000,
            "{name}: only {} limit points",
            sample.charted.len()
        );
        let dim = box_dimension(&sample.charted, 2.0, 16).unwrap();

        let gap = (delta.value - dim.value).abs();
        let elapsed = start.elapsed();
        assert!(gap <= 0.05, "{name}: |delta - dim| = {gap} > 0.05");
        assert!(elapsed.as_secs() < 120, "{name}: took {elapsed:?}");
        println!(
            "ACCEPTANCE 4: PASS for {name} - growth {:.4}, box dimension {:.4}, gap {gap:.4} \
             ({} limit points, {elapsed:?})",
            delta.value,
            dim.value,
            sample.charted.len()
        );
    }
}

#[test]
fn acceptance_05_equidistribution_stabilization() {
    let run = generate(&DescartesQuadruple::root_bounded(), 1 << 14).unwrap();
    let r1 = Region::disk(0.2, 0.1, 0.35);
    let r2 = Region::rectangle(-0.8, -0.1, -0.5, 0.4);
    let mut drifts = Vec::new();
    for exp in [12u32, 13] {
        let t = 1i128 << exp;
        let ratio_t = equidistribution_ratio(&run, &r1, &r2, t).unwrap();
        let ratio_2t = equidistribution_ratio(&run, &r1, &r2, 2 * t).unwrap();
        let rel = (ratio_t - ratio_2t).abs() / ratio_2t;
        assert!(rel < 0.1, "ratio drift {rel} >= 0.1 at t = 2^{exp}");
        drifts.push(rel);
    }

    let right = Region::rectangle(0.1, 0.5, -0.3, 0.2);
    let left = mirror_region(&right);
    let mut t = 3i128;
    while t <= (1 << 14) {
        let ratio = equidistribution_ratio(&run, &right, &left, t).unwrap();
        assert_eq!(ratio, 1.0, "mirror ratio not exactly 1 at t={t}");
        t = t * 4 / 3 + 1;
    }
    println!(
        "ACCEPTANCE 5: PASS - drifts {drifts:?} at t = 2^12, 2^13 (< 0.1), \
         mirror ratio exactly 1 at every sampled t"
    );
}

#[test]
fn acceptance_06_sieve_shape() {
    let run = generate(&DescartesQuadruple::root_bounded(), 100_000).unwrap();
    let census = curvature_census(&run);
    let mut shapes = Vec::new();
    let mut prev_primes = 0u64;
    for t in [1_000u64, 10_000, 100_000] {
        let report = sieve(&census, t, 3, DELTA_APOLLONIAN);
        assert!(
            report.prime_count >= prev_primes,
            "prime counts not monotone in T"
        );
        prev_primes = report.prime_count;
        let mut prev = report.prime_count;
        for r in 1..=3 {
            assert!(
                report.almost_prime_counts[&r] >= prev,
                "almost-prime counts not monotone in r at T={t}"
            );
            prev = report.almost_prime_counts[&r];
        }
        shapes
            .push(report.prime_count as f64 * (t as f64).ln() / (t as f64).powf(DELTA_APOLLONIAN));
    }
    let spread = shapes.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        / shapes.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    assert!(spread < 3.0, "sieve shape varies by factor {spread}");
    println!("ACCEPTANCE 6: PASS - shape values {shapes:?} (spread factor {spread:.3})");
}

#[test]
fn acceptance_07_rigidity_discrimination() {
    let tol = 1e-6;
    for name in ["pair_identical.json", "pair_conjugated.json"] {
        let pair = load_pair(name);
        let sample = boundary_pairs(&pair, 6).unwrap();
        let report = conformality_stat(&sample, 400, tol, 1).unwrap();
        assert_eq!(report.violating_fraction, 0.0, "{name}: fraction not zero");
        assert!(
            report.max_imag_out < 10.0 * tol,
            "{name}: max |Im| {}",
            report.max_imag_out
        );
    }

    let pair = load_pair("pair_skew.json");
    let sample = boundary_pairs(&pair, 6).unwrap();
    let report = conformality_stat(&sample, 400, tol, 1).unwrap();
    assert!(report.violating_fraction > 0.0, "skew pair not flagged");
    let again = conformality_stat(&sample, 400, tol, 1).unwrap();
    assert_eq!(
        report.violating_fraction, again.violating_fraction,
        "seeded run not deterministic"
    );
    assert_eq!(report.max_imag_out, again.max_imag_out);
    println!(
        "ACCEPTANCE 7: PASS - conjugated pairs clean, skew pair flagged \
         (violating fraction {:.3}, deterministic under seed 1)",
        report.violating_fraction
    );
}

#[test]
fn acceptance_08_joint_exponent_contracts() {
    let o = H3Point::base();
    let bound = 2.0 / 2.0f64.sqrt();
    let mut values = Vec::new();

    let dup = load_pair("pair_identical.json");
    let joint = joint_enumerate(&dup, &o, 26.0, 6_000_000).unwrap();
    assert!(joint.complete);
    let est = joint_exponent(&joint, (13.0, 26.0)).unwrap();
    values.push(("identical", est.value));

    let single = enumerate(&dup.rho1, &o, 13.0, joint.max_word_len).unwrap();
    let est_single = critical_exponent(&single, (6.5, 13.0)).unwrap();
    let diff = (est.value - est_single.value / 2.0).abs();
    assert!(
        diff < 0.05,
        "duplicated-pair joint {} vs half single {}",
        est.value,
        est_single.value
    );

    for name in ["pair_conjugated.json", "pair_skew.json"] {
        let pair = load_pair(name);
        let joint = joint_enumerate(&pair, &o, 26.0, 6_000_000).unwrap();
        let est = joint_exponent(&joint, (13.0, 26.0)).unwrap();
        values.push((name, est.value));
    }
    for (name, v) in &values {
        assert!(
            *v > 0.0 && *v < bound,
            "{name}: joint exponent {v} outside (0, 2/sqrt(2))"
        );
    }
    println!(
        "ACCEPTANCE 8: PASS - duplicated pair {:.4} vs half single {:.4} (diff {diff:.4}); \
         all values {:?} below {bound:.4}",
        values[0].1,
        est_single.value / 2.0,
        values
    );
}

#[test]
fn acceptance_09_torus_change_of_variables() {
    let run = generate(&DescartesQuadruple::root_bounded(), 1 << 10).unwrap();
    // Identity pairing: every circle with itself.
    let tori = torus_records(&run, &MapRule::PairedRun(&run)).unwrap();
    assert_eq!(tori.skipped_lines, 0);

    // N_torus(t) = N_circle(sqrt t), exactly, on a dyadic grid where both
    // predicates are exact.
    for j in 1..=10 {
        let sqrt_t = 2f64.powi(j);
        let t = sqrt_t * sqrt_t;
        let n_torus = torus_count(&tori.records, &[t]).pairs[0].1;
        let n_circle = run
            .circles
            .iter()
            .filter(|c| run.radius_of(c) >= 1.0 / sqrt_t)
            .count() as u64;
        assert_eq!(n_torus, n_circle, "change of variables fails at t={t}");
    }

    // Scaling the fixed circle list by z -> 2z doubles each radius exactly,
    // so every volume picks up a factor of exactly 4 and counts shift
    // accordingly at arbitrary thresholds.
    let scaled: Vec<TorusRecord> = run
        .circles
        .iter()
        .map(|c| {
            let r2 = 2.0 * run.radius_of(c);
            let circle = GeneralizedCircle::from_center_radius(2.0 * run.center_of(c), r2);
            TorusRecord {
                c1: circle,
                c2: circle,
                vol: r2 * r2,
            }
        })
        .collect();
    for (a, b) in tori.records.iter().zip(&scaled) {
        assert_eq!(b.vol, 4.0 * a.vol, "volume not scaled by exactly 4");
    }
    for j in -3..12 {
        let t = 2f64.powi(j) * 1.37;
        assert_eq!(
            torus_count(&scaled, &[t]).pairs[0].1,
            torus_count(&tori.records, &[4.0 * t]).pairs[0].1,
            "scaled counts disagree at t={t}"
        );
    }
    println!("ACCEPTANCE 9: PASS - identity pairing and exact-4 scaling identities hold");
}

#[test]
fn acceptance_10_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_packlab");
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();

    let gen_csv = path("packing.csv");
    let mut runs: Vec<(&str, Vec<String>)> = vec![(
        "gen",
        vec![
            "gen".into(),
            "--root-default".into(),
            "--max-curv".into(),
            "1024".into(),
            "--out".into(),
            String::new(), // placeholder, filled per run
        ],
    )];
    // First produce the CSV both downstream commands read.
    let status = Command::new(bin)
        .args([
            "gen",
            "--root-default",
            "--max-curv",
            "1024",
            "--out",
            &gen_csv,
        ])
        .status()
        .unwrap();
    assert!(status.success());

    runs.extend([
        (
            "fit",
            vec![
                "fit".into(),
                "--in".into(),
                gen_csv.clone(),
                "--tmin".into(),
                "16".into(),
                "--tmax".into(),
                "1024".into(),
                "--out".into(),
                String::new(),
            ],
        ),
        (
            "sieve",
            vec![
                "sieve".into(),
                "--in".into(),
                gen_csv.clone(),
                "--max".into(),
                "1024".into(),
                "--factors".into(),
                "3".into(),
                "--out".into(),
                String::new(),
            ],
        ),
        (
            "render",
            vec![
                "render".into(),
                "--in".into(),
                gen_csv.clone(),
                "--out".into(),
                String::new(),
            ],
        ),
        (
            "dim",
            vec![
                "dim".into(),
                "--group".into(),
                fixture("schottky_axes4.json").display().to_string(),
                "--depth".into(),
                "7".into(),
                "--out".into(),
                String::new(),
            ],
        ),
        (
            "crtest",
            vec![
                "crtest".into(),
                "--pair".into(),
                fixture("pair_skew.json").display().to_string(),
                "--depth".into(),
                "6".into(),
                "--samples".into(),
                "200".into(),
                "--seed".into(),
                "1".into(),
                "--out".into(),
                String::new(),
            ],
        ),
        (
            "joint",
            vec![
                "joint".into(),
                "--pair".into(),
                fixture("pair_identical.json").display().to_string(),
                "--T".into(),
                "24".into(),
                "--out".into(),
                String::new(),
            ],
        ),
    ]);

    for (name, args) in &runs {
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let out = path(&format!("{name}-{threads}.out"));
            let mut args = args.clone();
            let n = args.len();
            args[n - 1] = out.clone();
            let status = Command::new(bin)
                .args(&args)
                .args(["--threads", threads])
                .status()
                .unwrap();
            assert!(status.success(), "{name} failed with --threads {threads}");
            outputs.push(std::fs::read(&out).unwrap());
        }
        assert_eq!(
            outputs[0], outputs[1],
            "{name}: outputs differ across thread counts"
        );
        println!("ACCEPTANCE 10: PASS for {name} - byte-identical across --threads 1 and 4");
    }
}
