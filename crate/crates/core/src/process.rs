//! The limiting point process: i.i.d. samples from the normalized counting
//! measure on orbit tangencies, one-sided nearest-neighbor statistics at
//! the `N^{−1/δ}` scale, shadow ratios, the avoidance-function comparison,
//! and combinatorial (Bonferroni) bracket checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaps::Ecdf;
use crate::geom::{PI, TAU};
use crate::orbit::OrbitPoint;

/// Two sampled angles closer than this are treated as the same atom and
/// one of them is redrawn.
const TIE_TOL: f64 = 1e-14;
/// Rounds of tie redraws before giving up.
const TIE_ROUNDS: usize = 1000;
/// The sample size may not exceed this fraction of the atom count.
const MAX_SAMPLE_FRACTION: f64 = 0.2;
/// The nearest-neighbor scale `N^{−1/δ}` must exceed the atom resolution
/// `2π/T²` by at least this factor.
const MIN_SCALE_HEADROOM: f64 = 50.0;

/// The atoms of the sampling measure: orbit tangency angles at threshold
/// `t`, equally weighted.
#[derive(Debug, Clone, Serialize)]
pub struct TangencySource {
    /// Sorted tangency angles.
    pub angles: Vec<f64>,
    /// The enumeration threshold that produced them.
    pub t: f64,
}

impl TangencySource {
    pub fn from_orbit(points: &[OrbitPoint], t: f64) -> Result<Self> {
        if points.len() < 10 {
            return Err(Error::Domain(format!(
                "tangency source needs at least 10 atoms, got {}",
                points.len()
            )));
        }
        let mut angles: Vec<f64> = points.iter().map(|p| p.circle.theta).collect();
        angles.sort_by(f64::total_cmp);
        if angles.windows(2).any(|w| w[1] - w[0] < TIE_TOL) {
            return Err(Error::Numeric("coincident atoms in tangency source".into()));
        }
        Ok(Self { angles, t })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Number of atoms in the one-sided CCW window `[x, x+η]` (inclusive;
    /// `x` itself counts when it is an atom).
    pub fn window_count(&self, x: f64, eta: f64) -> usize {
        window_count(&self.angles, x, eta)
    }

    /// Shadow ratio `p(x, η) = μ̂(window)/η^δ`, the local scaling exponent
    /// probe. Requires `2π/T² < η ≤ π` so the window is resolved by the
    /// atoms without covering half the circle.
    pub fn shadow_ratio(&self, x: f64, eta: f64, delta: f64) -> Result<f64> {
        let resolution = TAU / (self.t * self.t);
        if !(eta > resolution && eta <= PI) {
            return Err(Error::Domain(format!(
                "shadow window {eta:.3e} outside the resolved range ({resolution:.3e}, π]"
            )));
        }
        let mass = self.window_count(x, eta) as f64 / self.len() as f64;
        Ok(mass / eta.powf(delta))
    }
}

/// Count of sorted angles in the CCW window `[x, x+η]`, wrapping past 2π.
fn window_count(sorted: &[f64], x: f64, eta: f64) -> usize {
    if eta >= TAU {
        return sorted.len();
    }
    let lo = sorted.partition_point(|&v| v < x);
    let hi = x + eta;
    if hi <= TAU {
        sorted.partition_point(|&v| v <= hi) - lo
    } else {
        (sorted.len() - lo) + sorted.partition_point(|&v| v <= hi - TAU)
    }
}

/// Draw `n` i.i.d. samples from the atom measure, sorted, with coincident
/// draws redrawn until all samples are distinct. The RNG is keyed by
/// `(seed, stream)` so batches are reproducible and independent.
pub fn sample_mu(
    src: &TangencySource,
    n: usize,
    delta: f64,
    seed: u64,
    stream: u64,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Domain("need at least 2 samples".into()));
    }
    let m = src.len();
    if (n as f64) > MAX_SAMPLE_FRACTION * m as f64 {
        return Err(Error::Domain(format!(
            "sample size {n} too close to the atom count {m}; enumerate deeper"
        )));
    }
    let scale = (n as f64).powf(-1.0 / delta);
    let resolution = TAU / (src.t * src.t);
    if scale < MIN_SCALE_HEADROOM * resolution {
        return Err(Error::Domain(format!(
            "nearest-neighbor scale N^(-1/δ) = {scale:.3e} is not resolved by the \
             atom spacing 2π/T² = {resolution:.3e}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut xs: Vec<f64> = (0..n).map(|_| src.angles[rng.gen_range(0..m)]).collect();
    for _ in 0..TIE_ROUNDS {
        xs.sort_by(f64::total_cmp);
        let dups: Vec<usize> = (1..n).filter(|&i| xs[i] - xs[i - 1] < TIE_TOL).collect();
        if dups.is_empty() {
            return Ok(xs);
        }
        for i in dups {
            xs[i] = src.angles[rng.gen_range(0..m)];
        }
    }
    Err(Error::Numeric(
        "could not draw distinct samples; atom count too small for this N".into(),
    ))
}

/// Raw i.i.d. draws from the atom measure (ties allowed) — the honest
/// estimator for expectations `E_x[f(x)]` under μ̂, where the distinctness
/// and resolution guards of [`sample_mu`] are irrelevant.
fn raw_draws(src: &TangencySource, n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n)
        .map(|_| src.angles[rng.gen_range(0..src.len())])
        .collect()
}

/// One-sided CCW nearest-neighbor distances of sorted samples (the last
/// one wraps around the circle).
pub fn ccw_nearest(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    let mut d = Vec::with_capacity(n);
    for w in sorted.windows(2) {
        d.push(w[1] - w[0]);
    }
    d.push(sorted[0] + TAU - sorted[n - 1]);
    d
}

/// ECDF of the scaled nearest-neighbor distances `N^{1/δ}·dᵢ`.
pub fn nearest_gap_ecdf(sorted: &[f64], delta: f64) -> Result<Ecdf> {
    let n = sorted.len() as f64;
    let scale = n.powf(1.0 / delta);
    Ecdf::new(ccw_nearest(sorted).iter().map(|d| d * scale).collect(), None)
}

/// Comparison of the empirical scaled nearest-neighbor law ν against the
/// avoidance prediction `1 − Z(s)`, `Z(s) = E_x exp(−s^δ·p(x, sN^{−1/δ}))`.
#[derive(Debug, Clone, Serialize)]
pub struct ZnReport {
    pub n: usize,
    pub trials: usize,
    pub s_grid: Vec<f64>,
    /// Trial-averaged ν(\[0, s\]).
    pub nu_mean: Vec<f64>,
    /// `1 − Z(s)` from the shadow side.
    pub one_minus_z: Vec<f64>,
    pub sup_discrepancy: f64,
}

/// Build the ν-vs-Z comparison: `trials` sample batches of size `n` for
/// the ν side (streams `0..trials`), one batch of 2000 evaluation points
/// for the Z side (stream `trials`).
pub fn zn_compare(
    src: &TangencySource,
    n: usize,
    delta: f64,
    s_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<ZnReport> {
    if s_grid.is_empty() || trials == 0 {
        return Err(Error::Config("empty grid or zero trials".into()));
    }
    if s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Config("s grid must be positive".into()));
    }
    let mut nu_mean = vec![0.0f64; s_grid.len()];
    for tr in 0..trials {
        let xs = sample_mu(src, n, delta, seed, tr as u64)?;
        let ecdf = nearest_gap_ecdf(&xs, delta)?;
        for (acc, &s) in nu_mean.iter_mut().zip(s_grid) {
            *acc += ecdf.eval(s);
        }
    }
    for acc in &mut nu_mean {
        *acc /= trials as f64;
    }

    let eval_points = raw_draws(src, 2000, seed, trials as u64);
    let m = src.len() as f64;
    let scale = (n as f64).powf(-1.0 / delta);
    let mut one_minus_z = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let eta = s * scale;
        let mean_exp: f64 = eval_points
            .iter()
            .map(|&x| {
                let mass = window_count(&src.angles, x, eta) as f64 / m;
                (-s.powf(delta) * mass / eta.powf(delta)).exp()
            })
            .sum::<f64>()
            / eval_points.len() as f64;
        one_minus_z.push(1.0 - mean_exp);
    }

    let sup = nu_mean
        .iter()
        .zip(&one_minus_z)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(ZnReport {
        n,
        trials,
        s_grid: s_grid.to_vec(),
        nu_mean,
        one_minus_z,
        sup_discrepancy: sup,
    })
}

/// Fit the exponential tail bound `ν([s, ∞)) ≤ e^{−c·s^δ}`: the reported
/// `c` is the infimum of `−ln(tail)/s^δ` over the grid; positive means a
/// genuinely exponential tail in `s^δ`.
pub fn tail_exponent(
    src: &TangencySource,
    n: usize,
    delta: f64,
    s_grid: &[f64],
    seed: u64,
    stream: u64,
) -> Result<f64> {
    let xs = sample_mu(src, n, delta, seed, stream)?;
    let mut scaled: Vec<f64> = {
        let scale = (n as f64).powf(1.0 / delta);
        ccw_nearest(&xs).iter().map(|d| d * scale).collect()
    };
    scaled.sort_by(f64::total_cmp);
    let mut c = f64::INFINITY;
    let mut any = false;
    for &s in s_grid {
        let tail = 1.0 - scaled.partition_point(|&v| v < s) as f64 / n as f64;
        if tail > 0.0 {
            c = c.min(-tail.ln() / s.powf(delta));
            any = true;
        }
    }
    if !any {
        return Err(Error::Domain("no mass beyond the grid; extend it".into()));
    }
    Ok(c)
}

/// Result of the Bonferroni bracket check at one window scale.
#[derive(Debug, Clone, Serialize)]
pub struct BonferroniReport {
    pub n: usize,
    pub s: f64,
    pub trials: usize,
    pub order: usize,
    /// Trials where some bracket `B_{2m} ≤ ν ≤ B_{2m+1}` failed (exact
    /// integer arithmetic, so any violation is a logic error).
    pub violations: usize,
    pub a1_mean: f64,
    pub a1_closed_form: f64,
    pub a1_se: f64,
    /// Whether the sampled mean of A₁ sits within 3 standard errors of the
    /// closed form.
    pub a1_consistent: bool,
}

impl BonferroniReport {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.a1_consistent
    }
}

fn binomial(m: u64, k: u64) -> u128 {
    if k > m {
        return 0;
    }
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (m - i) as u128 / (i + 1) as u128;
    }
    out
}

/// Check the inclusion–exclusion brackets for the count of samples with an
/// `η`-close CCW neighbor, `η = s·N^{−1/δ}`: for each `m ≤ order`,
/// `B_{2m} ≤ ν ≤ B_{2m+1}` where `B_K = Σ_{k≤K} (−1)^{k+1} A_k` and
/// `A_k = N^{−1} Σᵢ C(mᵢ, k)`. The comparison is done on integer-weighted
/// sums, so it is exact. Also compares the sampled mean of `A₁` with its
/// closed form under the atom measure.
pub fn bonferroni_check(
    src: &TangencySource,
    n: usize,
    s: f64,
    order: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<BonferroniReport> {
    if n > 400 {
        return Err(Error::Config(format!(
            "bracket check is meant for small samples (≤ 400), got {n}"
        )));
    }
    if order == 0 || order > 3 {
        return Err(Error::Config(format!("bracket order must be in 1..=3, got {order}")));
    }
    if trials < 2 {
        return Err(Error::Config("need at least 2 trials".into()));
    }
    let eta = s * (n as f64).powf(-1.0 / delta);
    let mut violations = 0usize;
    let mut a1s: Vec<f64> = Vec::with_capacity(trials);
    for tr in 0..trials {
        let xs = sample_mu(src, n, delta, seed, tr as u64)?;
        let counts: Vec<u64> = xs
            .iter()
            .map(|&x| (window_count(&xs, x, eta) - 1) as u64)
            .collect();
        let occupied: u128 = counts.iter().filter(|&&m| m >= 1).count() as u128;
        // alternating partial sums of Σᵢ C(mᵢ, k), exactly
        let sums: Vec<u128> = (1..=2 * order + 1)
            .map(|k| counts.iter().map(|&m| binomial(m, k as u64)).sum())
            .collect();
        let mut partial: i128 = 0;
        for (k, &sk) in sums.iter().enumerate() {
            // k is 0-based: term k+1 has sign (−1)^k
            partial += if k % 2 == 0 { sk as i128 } else { -(sk as i128) };
            let term = k + 1;
            if term >= 2 {
                let ok = if term % 2 == 0 {
                    partial <= occupied as i128 // even truncation: lower bound
                } else {
                    occupied as i128 <= partial // odd truncation: upper bound
                };
                if !ok {
                    violations += 1;
                    break;
                }
            } else if (occupied as i128) > partial {
                violations += 1; // B₁ upper bound
                break;
            }
        }
        a1s.push(sums[0] as f64 / n as f64);
    }

    // closed form for E A₁: each of the other N−1 samples lands in the CCW
    // window of a μ̂-distributed point with probability
    // E_x[μ̂(window(x, η)) − 1/M] (the atom at x itself is not another
    // sample).
    let m = src.len();
    let mean_excess: f64 = src
        .angles
        .iter()
        .map(|&x| (window_count(&src.angles, x, eta) - 1) as f64 / m as f64)
        .sum::<f64>()
        / m as f64;
    let closed = (n as f64 - 1.0) * mean_excess;

    let a1_mean = a1s.iter().sum::<f64>() / trials as f64;
    let var = a1s.iter().map(|a| (a - a1_mean) * (a - a1_mean)).sum::<f64>()
        / (trials as f64 - 1.0);
    let se = (var / trials as f64).sqrt();
    let a1_consistent = (a1_mean - closed).abs() <= 3.0 * se + 1e-12;
    Ok(BonferroniReport {
        n,
        s,
        trials,
        order,
        violations,
        a1_mean,
        a1_closed_form: closed,
        a1_se: se,
        a1_consistent,
    })
}

/// Empirical-vs-source sup discrepancy of the sampler on a uniform angular
/// grid (law of large numbers check). Draws are raw i.i.d. (ties allowed).
pub fn sampler_lln_discrepancy(
    src: &TangencySource,
    draws: usize,
    grid_points: usize,
    seed: u64,
) -> f64 {
    let m = src.len();
    let mut xs = raw_draws(src, draws, seed, 9);
    xs.sort_by(f64::total_cmp);
    let mut sup = 0.0f64;
    for k in 0..=grid_points {
        let g = TAU * k as f64 / grid_points as f64;
        let emp = xs.partition_point(|&v| v < g) as f64 / draws as f64;
        let srcf = src.angles.partition_point(|&v| v < g) as f64 / m as f64;
        sup = sup.max((emp - srcf).abs());
    }
    sup
}
