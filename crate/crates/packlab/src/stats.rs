//! Counting statistics over packing runs: threshold series, log-log
//! power-law fits, region-restricted counts, and prime/almost-prime
//! curvature sieve reports.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::descartes::PackingRun;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("insufficient data: need at least {need} points in the window, found {found}")]
    InsufficientData { need: usize, found: usize },
    #[error("denominator region contains no circles at this threshold")]
    EmptyDenominator,
    #[error("count series must have positive counts inside the fit window")]
    NonPositiveCount,
}

/// A monotone threshold-to-count table: thresholds strictly increasing,
/// counts nondecreasing.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CountSeries {
    pub pairs: Vec<(f64, u64)>,
}

impl CountSeries {
    pub fn new(mut pairs: Vec<(f64, u64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 = b.1.max(a.1);
                true
            } else {
                false
            }
        });
        let series = CountSeries { pairs };
        debug_assert!(series.pairs.windows(2).all(|w| w[0].1 <= w[1].1));
        series
    }

    /// Cumulative counts at every distinct curvature of a run: the series
    /// n(t) = #{circles with curvature <= t}.
    pub fn from_run(run: &PackingRun) -> Self {
        let mut census: BTreeMap<i128, u64> = BTreeMap::new();
        for c in &run.circles {
            *census.entry(c.curvature).or_insert(0) += 1;
        }
        let mut pairs = Vec::with_capacity(census.len());
        let mut cum = 0u64;
        for (k, mult) in census {
            cum += mult;
            pairs.push((k as f64, cum));
        }
        CountSeries { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Default fit window: the top three dyadic decades of the data range,
    /// excluding the top half-decade against truncation bias.
    pub fn default_window(&self) -> (f64, f64) {
        let t_max = self.pairs.last().map(|p| p.0).unwrap_or(1.0);
        let hi = t_max / 2.0f64.sqrt();
        let lo = t_max / 8.0;
        (lo, hi)
    }
}

/// Least-squares slope of log(count) against log(threshold) over the given
/// window. Returns the exponent and its regression standard error.
pub fn fit_power_law(series: &CountSeries, window: (f64, f64)) -> Result<(f64, f64), StatsError> {
    let points: Vec<(f64, f64)> = series
        .pairs
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1 && *t > 0.0)
        .map(|(t, n)| {
            if *n == 0 {
                Err(StatsError::NonPositiveCount)
            } else {
                Ok((t.ln(), (*n as f64).ln()))
            }
        })
        .collect::<Result<_, _>>()?;
    if points.len() < 10 {
        return Err(StatsError::InsufficientData {
            need: 10,
            found: points.len(),
        });
    }
    Ok(least_squares_slope(&points))
}

/// Slope and its standard error for a simple linear regression.
pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    if points.len() == 2 {
        return (slope, 0.0);
    }
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let stderr = (ss_res / ((n - 2.0) * sxx)).sqrt();
    (slope, stderr)
}

/// A counting region: a disk or an axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk { center: Complex64, radius: f64 },
    Rectangle { x: (f64, f64), y: (f64, f64) },
}

impl Region {
    pub fn disk(cx: f64, cy: f64, radius: f64) -> Self {
        assert!(radius > 0.0);
        Region::Disk {
            center: Complex64::new(cx, cy),
            radius,
        }
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        assert!(x1 > x0 && y1 > y0);
        Region::Rectangle {
            x: (x0, x1),
            y: (y0, y1),
        }
    }

    /// Exact predicate: does the circle *curve* with the given center and
    /// radius meet this region?
    fn meets_circle(&self, c: Complex64, r: f64) -> bool {
        match self {
            Region::Disk { center, radius } => {
                // Distance from the region center to the curve.
                ((c - center).norm() - r).abs() <= *radius
            }
            Region::Rectangle { x, y } => {
                // The curve meets the filled rectangle iff the rectangle's
                // nearest point is within r and its farthest point at least r.
                let nearest_dx = (x.0 - c.re).max(0.0).max(c.re - x.1);
                let nearest_dy = (y.0 - c.im).max(0.0).max(c.im - y.1);
                let nearest = (nearest_dx * nearest_dx + nearest_dy * nearest_dy).sqrt();
                let far_dx = (c.re - x.0).abs().max((c.re - x.1).abs());
                let far_dy = (c.im - y.0).abs().max((c.im - y.1).abs());
                let farthest = (far_dx * far_dx + far_dy * far_dy).sqrt();
                nearest <= r && r <= farthest
            }
        }
    }
}

/// Number of circles with curvature at most `t` whose locus meets `region`.
pub fn region_count(run: &PackingRun, region: &Region, t: i128) -> u64 {
    run.circles
        .par_iter()
        .with_min_len(4096)
        .filter(|c| c.curvature <= t)
        .filter(|c| region.meets_circle(run.center_of(c), run.radius_of(c)))
        .count() as u64
}

/// Ratio of two region counts at the same threshold; stabilization of this
/// ratio in `t` is the observable equidistribution statement.
pub fn equidistribution_ratio(
    run: &PackingRun,
    r1: &Region,
    r2: &Region,
    t: i128,
) -> Result<f64, StatsError> {
    let denom = region_count(run, r2, t);
    if denom == 0 {
        return Err(StatsError::EmptyDenominator);
    }
    Ok(region_count(run, r1, t) as f64 / denom as f64)
}

/// Prime and almost-prime curvature counts up to a threshold.
#[derive(Debug, Clone, Serialize)]
pub struct SieveReport {
    pub max_curvature: u64,
    pub prime_count: u64,
    /// `almost_prime_counts[r]` counts curvatures with at most `r` prime
    /// factors (with multiplicity), keyed by `r = 1..=r_max`.
    pub almost_prime_counts: BTreeMap<u32, u64>,
    pub delta_used: f64,
}

/// Sieves a curvature census: multiplicity-weighted counts of prime and
/// almost-prime curvatures up to `t`. Only positive curvatures participate.
pub fn sieve(census: &BTreeMap<i128, u64>, t: u64, r_max: u32, delta: f64) -> SieveReport {
    let mut prime_count = 0u64;
    let mut almost: BTreeMap<u32, u64> = (1..=r_max).map(|r| (r, 0)).collect();
    for (&k, &mult) in census.range(1..=(t as i128)) {
        let k = k as u64;
        let omega = prime_factor_count(k);
        if omega == 1 {
            prime_count += mult;
        }
        for r in omega.max(1)..=r_max {
            *almost.get_mut(&r).unwrap() += mult;
        }
    }
    SieveReport {
        max_curvature: t,
        prime_count,
        almost_prime_counts: almost,
        delta_used: delta,
    }
}

/// Number of prime factors counted with multiplicity; 0 for n <= 1.
pub fn prime_factor_count(n: u64) -> u32 {
    if n <= 1 {
        return 0;
    }
    let mut n = n;
    let mut count = 0;
    for p in [2u64, 3, 5] {
        while n % p == 0 {
            n /= p;
            count += 1;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            count += 1;
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    count
}

/// Deterministic Miller-Rabin, valid for all 64-bit inputs with the fixed
/// base set below.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Brent-cycle Pollard rho; the caller guarantees `n` is odd, composite,
/// and free of the small factors stripped beforehand.
fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Mirror of a region across the imaginary axis (x -> -x); handy for the
/// exact-symmetry counting checks.
pub fn mirror_region(region: &Region) -> Region {
    match region {
        Region::Disk { center, radius } => Region::Disk {
            center: Complex64::new(-center.re, center.im),
            radius: *radius,
        },
        Region::Rectangle { x, y } => Region::Rectangle {
            x: (-x.1, -x.0),
            y: *y,
        },
    }
}
