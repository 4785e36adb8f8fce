//! Orbit enumeration: all images of the base tangent circle under reduced
//! words in the three reflections, pruned exactly by a curvature threshold.
//!
//! Words are stored leading-letter-first: the word `s₁s₂…sₗ` denotes the
//! isometry `ρ_{s₁}∘ρ_{s₂}∘…∘ρ_{sₗ}` (rightmost letter applied first), and
//! its orbit circle is `ρ_{s₁}(…ρ_{sₗ}(base)…)`. Letters are `0, 1, 2`
//! internally and rendered as `1, 2, 3`.
//!
//! The tree has the base circle at the root; the children of a node with
//! word `w` prepend a letter `j ≠ Int(w)`. Each step multiplies curvature
//! by a factor in the configuration's growth band `[a, b]` with `a > 1`,
//! so pruning a subtree as soon as its root curvature reaches `T²` is
//! exact: no pruned descendant can ever re-enter the threshold.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::GroupConfig;
use crate::error::{Error, Result};
use crate::geom::{
    normalize_angle, reflect_tangent_circle, DiskMap, TangentCircle, TAU,
};

/// Subtrees rooted at this depth are expanded in parallel; the tree above
/// it is walked serially so the fan-out is deterministic.
const SPLIT_DEPTH: usize = 4;
/// Angular separation below which two enumerated tangencies are treated as
/// a collision (an internal error: distinct words must give distinct
/// tangencies well above rounding noise).
const COLLISION_TOL: f64 = 1e-12;
/// Upper bound on the unfiltered-depth enumeration (3·2^{d−1} circles).
const MAX_UNFILTERED_DEPTH: usize = 20;

/// One enumerated orbit element: a reduced word and the image of the base
/// circle under it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitPoint {
    /// Reduced word, leading letter first; empty for the identity.
    pub word: Vec<u8>,
    pub circle: TangentCircle,
}

impl OrbitPoint {
    /// Squared curvature norm of the word, `‖γ‖² = κ(γ(base))`.
    pub fn norm_sq(&self) -> f64 {
        self.circle.kappa
    }

    pub fn norm(&self) -> f64 {
        self.circle.kappa.sqrt()
    }
}

/// Render a word as digits `1..3`, with `e` for the identity.
pub fn word_string(word: &[u8]) -> String {
    if word.is_empty() {
        "e".to_string()
    } else {
        word.iter().map(|&l| char::from(b'1' + l)).collect()
    }
}

/// A word is reduced when no two adjacent letters are equal (and all
/// letters are valid).
pub fn is_reduced(word: &[u8]) -> bool {
    word.iter().all(|&l| l < 3) && word.windows(2).all(|w| w[0] != w[1])
}

/// The isometry of a reduced word (identity for the empty word).
pub fn word_to_map(cfg: &GroupConfig, word: &[u8]) -> Result<DiskMap> {
    if !is_reduced(word) {
        return Err(Error::Domain(format!(
            "word {} is not reduced",
            word_string(word)
        )));
    }
    let mut g = DiskMap::identity();
    for &s in word {
        g = g.compose(&cfg.circles[s as usize].as_map());
    }
    Ok(g)
}

/// The orbit circle of a reduced word, built by the step recursion
/// (rightmost letter applied to the base circle first).
pub fn word_circle(cfg: &GroupConfig, word: &[u8]) -> Result<TangentCircle> {
    if !is_reduced(word) {
        return Err(Error::Domain(format!(
            "word {} is not reduced",
            word_string(word)
        )));
    }
    let mut c = cfg.base_circle();
    for &s in word.iter().rev() {
        c = reflect_tangent_circle(&cfg.circles[s as usize], &c)?;
    }
    Ok(c)
}

/// A half-open angular interval `[start, end)` on the circle; `start > end`
/// denotes the interval wrapping through angle 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularInterval {
    pub start: f64,
    pub end: f64,
}

impl AngularInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::Config("interval endpoints must be finite".into()));
        }
        let (s, e) = (normalize_angle(start), normalize_angle(end));
        if s == e {
            return Err(Error::Config(
                "interval endpoints coincide after normalization".into(),
            ));
        }
        Ok(Self { start: s, end: e })
    }

    pub fn contains(&self, theta: f64) -> bool {
        let th = normalize_angle(theta);
        if self.start < self.end {
            self.start <= th && th < self.end
        } else {
            th >= self.start || th < self.end
        }
    }

    pub fn width(&self) -> f64 {
        if self.start < self.end {
            self.end - self.start
        } else {
            TAU - self.start + self.end
        }
    }
}

struct EnumCtx<'a> {
    cfg: &'a GroupConfig,
    t2: f64,
    interval: Option<AngularInterval>,
    depth_cap: usize,
}

impl EnumCtx<'_> {
    fn emit(&self, out: &mut Vec<OrbitPoint>, word: Vec<u8>, circle: TangentCircle) {
        if self
            .interval
            .is_none_or(|iv| iv.contains(circle.theta))
        {
            out.push(OrbitPoint { word, circle });
        }
    }

    /// Expand all descendants of the node given by `path` (letters in
    /// generation order: `path[0]` was prepended first, so the node's word
    /// is the reverse of `path`).
    fn expand(
        &self,
        path: &mut Vec<u8>,
        circle: TangentCircle,
        out: &mut Vec<OrbitPoint>,
    ) -> Result<()> {
        if path.len() >= self.depth_cap {
            return Err(Error::Numeric(format!(
                "enumeration exceeded the depth cap {} — growth invariant violated",
                self.depth_cap
            )));
        }
        let last = *path.last().expect("expand is called below the root");
        for j in 0..3u8 {
            if j == last {
                continue;
            }
            let child = reflect_tangent_circle(&self.cfg.circles[j as usize], &circle)?;
            if child.kappa < self.t2 {
                path.push(j);
                self.emit(out, path.iter().rev().copied().collect(), child);
                self.expand(path, child, out)?;
                path.pop();
            }
        }
        Ok(())
    }
}

fn enumerate_impl(
    cfg: &GroupConfig,
    t: f64,
    interval: Option<AngularInterval>,
    parallel: bool,
) -> Result<Vec<OrbitPoint>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Config(format!("threshold must be positive, got {t}")));
    }
    let t2 = t * t;
    let kappa0 = cfg.kappa0();
    if t2 <= kappa0 {
        return Ok(Vec::new());
    }
    // κ grows by at least `a` per step, so κ ≥ κ₀·a^depth; any word kept by
    // the pruner has depth ≤ log_a(T²·r₀). The +2 is headroom, not slack
    // that ever gets used: exceeding the cap is reported as an error.
    let depth_cap = ((t2 * cfg.r0).ln() / cfg.growth_lo.ln()).ceil() as usize + 2;
    let ctx = EnumCtx {
        cfg,
        t2,
        interval,
        depth_cap,
    };

    let mut out = Vec::new();
    ctx.emit(&mut out, Vec::new(), cfg.base_circle());

    // Serial expansion of the shallow tree; nodes at SPLIT_DEPTH become
    // roots of independent subtrees.
    let mut roots: Vec<(Vec<u8>, TangentCircle)> = Vec::new();
    let mut frontier: Vec<(Vec<u8>, TangentCircle)> = vec![(Vec::new(), cfg.base_circle())];
    for depth in 1..=SPLIT_DEPTH {
        let mut next = Vec::new();
        for (path, circle) in &frontier {
            for j in 0..3u8 {
                if path.last() == Some(&j) {
                    continue;
                }
                let child = reflect_tangent_circle(&cfg.circles[j as usize], circle)?;
                if child.kappa < t2 {
                    let mut p = path.clone();
                    p.push(j);
                    ctx.emit(&mut out, p.iter().rev().copied().collect(), child);
                    if depth == SPLIT_DEPTH {
                        roots.push((p, child));
                    } else {
                        next.push((p, child));
                    }
                }
            }
        }
        frontier = next;
    }

    let expand_root = |root: &(Vec<u8>, TangentCircle)| -> Result<Vec<OrbitPoint>> {
        let mut local = Vec::new();
        let mut path = root.0.clone();
        ctx.expand(&mut path, root.1, &mut local)?;
        Ok(local)
    };
    let chunks: Vec<Vec<OrbitPoint>> = if parallel {
        roots
            .par_iter()
            .map(expand_root)
            .collect::<Result<Vec<_>>>()?
    } else {
        roots
            .iter()
            .map(expand_root)
            .collect::<Result<Vec<_>>>()?
    };
    for c in chunks {
        out.extend(c);
    }

    sort_and_check(&mut out)?;
    Ok(out)
}

/// Sort orbit points CCW by tangency angle (ties broken by word) and
/// reject angular collisions between distinct words.
fn sort_and_check(points: &mut [OrbitPoint]) -> Result<()> {
    points.sort_unstable_by(|p, q| {
        p.circle
            .theta
            .total_cmp(&q.circle.theta)
            .then_with(|| p.word.cmp(&q.word))
    });
    let n = points.len();
    if n < 2 {
        return Ok(());
    }
    for i in 0..n {
        let j = (i + 1) % n;
        let gap = if j == 0 {
            points[0].circle.theta + TAU - points[i].circle.theta
        } else {
            points[j].circle.theta - points[i].circle.theta
        };
        if gap < COLLISION_TOL {
            return Err(Error::Numeric(format!(
                "tangency collision between words {} and {} (gap {gap:.3e})",
                word_string(&points[i].word),
                word_string(&points[j].word)
            )));
        }
    }
    Ok(())
}

/// Enumerate all orbit points with `κ < T²`, sorted CCW by tangency angle.
/// The identity (base circle) is included when `κ₀ < T²`; an interval
/// filters points at emission only — the tree walk itself is never cut by
/// angle. Subtrees are expanded on the rayon pool; output is identical to
/// the serial variant.
pub fn enumerate_orbit(
    cfg: &GroupConfig,
    t: f64,
    interval: Option<AngularInterval>,
) -> Result<Vec<OrbitPoint>> {
    enumerate_impl(cfg, t, interval, true)
}

/// Single-threaded variant of [`enumerate_orbit`] with byte-identical
/// output.
pub fn enumerate_orbit_serial(
    cfg: &GroupConfig,
    t: f64,
    interval: Option<AngularInterval>,
) -> Result<Vec<OrbitPoint>> {
    enumerate_impl(cfg, t, interval, false)
}

/// Enumerate every reduced word of length ≤ `depth` with no curvature
/// filter (including the identity), sorted like [`enumerate_orbit`].
pub fn enumerate_to_depth(cfg: &GroupConfig, depth: usize) -> Result<Vec<OrbitPoint>> {
    if depth > MAX_UNFILTERED_DEPTH {
        return Err(Error::Config(format!(
            "unfiltered depth {depth} exceeds the cap {MAX_UNFILTERED_DEPTH}"
        )));
    }
    let mut out = vec![OrbitPoint {
        word: Vec::new(),
        circle: cfg.base_circle(),
    }];
    let mut frontier: Vec<(Vec<u8>, TangentCircle)> = vec![(Vec::new(), cfg.base_circle())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (path, circle) in &frontier {
            for j in 0..3u8 {
                if path.last() == Some(&j) {
                    continue;
                }
                let child = reflect_tangent_circle(&cfg.circles[j as usize], circle)?;
                let mut p = path.clone();
                p.push(j);
                out.push(OrbitPoint {
                    word: p.iter().rev().copied().collect(),
                    circle: child,
                });
                next.push((p, child));
            }
        }
        frontier = next;
    }
    sort_and_check(&mut out)?;
    Ok(out)
}

/// Reduced words of lengths `1..=depth`, in breadth-first order.
pub fn words_to_depth(depth: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = Vec::new();
    let mut frontier: Vec<Vec<u8>> = (0..3u8).map(|i| vec![i]).collect();
    for _ in 0..depth {
        out.extend(frontier.iter().cloned());
        let mut next = Vec::new();
        for w in &frontier {
            for j in 0..3u8 {
                if *w.last().unwrap() != j {
                    let mut v = w.clone();
                    v.push(j);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Orbit counts under a grid of curvature thresholds, from one enumeration
/// at the largest threshold.
#[derive(Debug, Clone, Serialize)]
pub struct CountProfile {
    pub thresholds: Vec<f64>,
    /// Full-circle counts `#{γ: ‖γ‖² < T²}` per threshold.
    pub counts: Vec<usize>,
    /// Counts restricted to the interval, when one was given.
    pub interval_counts: Option<Vec<usize>>,
    pub interval: Option<AngularInterval>,
}

pub fn count_profile(
    cfg: &GroupConfig,
    thresholds: &[f64],
    interval: Option<AngularInterval>,
) -> Result<CountProfile> {
    if thresholds.is_empty() {
        return Err(Error::Config("empty threshold grid".into()));
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("thresholds must be strictly increasing".into()));
    }
    let t_max = *thresholds.last().unwrap();
    let points = enumerate_orbit(cfg, t_max, None)?;
    let counts = thresholds
        .iter()
        .map(|&t| points.iter().filter(|p| p.circle.kappa < t * t).count())
        .collect();
    let interval_counts = interval.map(|iv| {
        thresholds
            .iter()
            .map(|&t| {
                points
                    .iter()
                    .filter(|p| p.circle.kappa < t * t && iv.contains(p.circle.theta))
                    .count()
            })
            .collect()
    });
    Ok(CountProfile {
        thresholds: thresholds.to_vec(),
        counts,
        interval_counts,
        interval,
    })
}
