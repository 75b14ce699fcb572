//! Pressure upper bounds from volume growth over the Grassmann bundle.
//!
//! For each horizon `n` the quantity
//! `s_n(k) = sup over k-frames E of (1/n)(log |Jac(f^n, E)| + S_n phi)`
//! is approximated by a two-stage search: a coarse basepoint-by-angle grid,
//! then golden-section refinement in the angle and compass refinement in the
//! basepoint for the best cells. The sequence `n * s_n` is subadditive, so
//! every `s_n` bounds the limit from above and the headline takes the
//! minimum over the computed horizons.
//!
//! Systems with spatially constant derivative split the supremum exactly
//! into an angle part and a Birkhoff part, which is both faster and exact up
//! to the one-dimensional search tolerance; the generic path walks every
//! sampled frame through the full horizon once, reading off intermediate
//! values.

use crate::linalg::Vec2;
use crate::sample;
use crate::systems::{Potential, SystemDef, TangentFrame};
use crate::torus;

use super::{BoundKind, Method, PressureEstimate, PressureError, SeriesPoint};

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Search budget for the Grassmann suprema.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaBudget {
    /// Horizons 1..=n_max are evaluated by [`grassmann_pressure`].
    pub n_max: u32,
    /// Basepoints per axis.
    pub base_grid: u32,
    /// Angle samples on `[0, pi)` for line frames.
    pub angle_grid: u32,
    /// How many top grid cells receive local refinement, per horizon.
    pub refine_top: usize,
    /// Golden-section iterations per refined angle.
    pub refine_steps: u32,
    /// Jitter seed for the basepoint grid on systems with varying derivative.
    pub seed: u64,
}

impl Default for SigmaBudget {
    fn default() -> Self {
        SigmaBudget {
            n_max: 8,
            base_grid: 64,
            angle_grid: 256,
            refine_top: 8,
            refine_steps: 20,
            seed: 0,
        }
    }
}

impl SigmaBudget {
    fn validate(&self, n_list: &[u32]) -> Result<(), PressureError> {
        if n_list.is_empty() {
            return Err(PressureError::InvalidBudget("horizon list must be nonempty"));
        }
        if n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PressureError::InvalidBudget("horizon list must be strictly ascending"));
        }
        if n_list[0] < 1 || *n_list.last().unwrap() > 32 {
            return Err(PressureError::InvalidBudget("horizons must lie in 1..=32"));
        }
        if !(4..=256).contains(&self.base_grid) {
            return Err(PressureError::InvalidBudget("base_grid must be in 4..=256"));
        }
        if !(8..=4096).contains(&self.angle_grid) {
            return Err(PressureError::InvalidBudget("angle_grid must be in 8..=4096"));
        }
        if self.refine_top == 0 || self.refine_top > 64 {
            return Err(PressureError::InvalidBudget("refine_top must be in 1..=64"));
        }
        if self.refine_steps > 64 {
            return Err(PressureError::InvalidBudget("refine_steps must be at most 64"));
        }
        Ok(())
    }
}

/// A sampled frame with its contribution record at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannSample {
    pub frame: TangentFrame,
    pub n: u32,
    pub log_jacobian: f64,
    pub birkhoff: f64,
    /// `(log_jacobian + birkhoff) / n`.
    pub value: f64,
}

/// Walk one line frame through `n_max` steps, returning
/// `(log growth, Birkhoff sum)` at every requested horizon.
fn line_walk(
    sys: &SystemDef,
    pot: &Potential,
    x: Vec2,
    theta: f64,
    n_list: &[u32],
) -> Vec<(f64, f64)> {
    let n_max = *n_list.last().unwrap();
    let mut v = Vec2::new(theta.cos(), theta.sin());
    let mut xi = x;
    let mut growth = 0.0;
    let mut birk = 0.0;
    let mut out = Vec::with_capacity(n_list.len());
    let mut li = 0;
    for step in 1..=n_max {
        birk += pot.eval(sys, xi);
        let w = sys.jacobian(xi).mul_vec(v);
        let norm = w.norm();
        growth += norm.ln();
        v = w.scale(1.0 / norm);
        xi = sys.eval(xi);
        if li < n_list.len() && n_list[li] == step {
            out.push((growth, birk));
            li += 1;
        }
    }
    out
}

/// As [`line_walk`] for the full tangent plane (`with_area = true`) or for
/// the pure Birkhoff sum (`with_area = false`). The area growth uses
/// stepwise orthonormalization with log accumulation.
fn plane_walk(
    sys: &SystemDef,
    pot: &Potential,
    x: Vec2,
    with_area: bool,
    n_list: &[u32],
) -> Vec<(f64, f64)> {
    let n_max = *n_list.last().unwrap();
    let mut e1 = Vec2::new(1.0, 0.0);
    let mut e2 = Vec2::new(0.0, 1.0);
    let mut xi = x;
    let mut growth = 0.0;
    let mut birk = 0.0;
    let mut out = Vec::with_capacity(n_list.len());
    let mut li = 0;
    for step in 1..=n_max {
        birk += pot.eval(sys, xi);
        if with_area {
            let j = sys.jacobian(xi);
            let u = j.mul_vec(e1);
            let w = j.mul_vec(e2);
            let r11 = u.norm();
            e1 = u.scale(1.0 / r11);
            let r12 = e1.dot(w);
            let w_perp = w - e1.scale(r12);
            let r22 = w_perp.norm();
            e2 = w_perp.scale(1.0 / r22);
            growth += r11.ln() + r22.ln();
        }
        xi = sys.eval(xi);
        if li < n_list.len() && n_list[li] == step {
            out.push((growth, birk));
            li += 1;
        }
    }
    out
}

fn golden_max(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, steps: u32) -> (f64, f64) {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_GOLDEN * (hi - lo);
    let mut x2 = lo + INV_GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..steps {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 { (x1, f1) } else { (x2, f2) }
}

pub(crate) fn compass_max(
    mut f: impl FnMut(Vec2) -> f64,
    start: Vec2,
    period: f64,
    step0: f64,
    min_step: f64,
) -> (Vec2, f64) {
    let mut x = start;
    let mut best = f(x);
    let mut h = step0;
    let mut guard = 0;
    while h > min_step && guard < 400 {
        guard += 1;
        let mut moved = false;
        for d in [
            Vec2::new(h, 0.0),
            Vec2::new(-h, 0.0),
            Vec2::new(0.0, h),
            Vec2::new(0.0, -h),
        ] {
            let cand = torus::wrap_point(x + d, period);
            let v = f(cand);
            if v > best {
                best = v;
                x = cand;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    (x, best)
}

/// Fixed-capacity tracker for the best cells, ordered by value then by the
/// deterministic grid indices.
struct TopCells {
    cap: usize,
    items: Vec<(f64, u32, u32)>,
}

impl TopCells {
    fn new(cap: usize) -> Self {
        TopCells { cap, items: Vec::with_capacity(cap + 1) }
    }

    fn push(&mut self, value: f64, i: u32, j: u32) {
        let pos = self
            .items
            .partition_point(|&(v, a, b)| v > value || (v == value && (a, b) < (i, j)));
        self.items.insert(pos, (value, i, j));
        if self.items.len() > self.cap {
            self.items.pop();
        }
    }
}

struct SweepOutcome {
    /// Per requested horizon: best value found and its refined witness.
    best: Vec<(f64, Vec2, Option<f64>)>,
}

/// Supremum search for line frames over a joint (basepoint, angle) grid.
fn sweep_lines(
    sys: &SystemDef,
    pot: &Potential,
    n_list: &[u32],
    budget: &SigmaBudget,
) -> SweepOutcome {
    let period = sys.domain_period();
    let angle_step = std::f64::consts::PI / budget.angle_grid as f64;
    let angles: Vec<f64> = (0..budget.angle_grid).map(|i| i as f64 * angle_step).collect();

    if sys.as_linear().is_some() {
        // Spatially constant derivative: the angle and basepoint suprema
        // decouple exactly.
        let anchor = Vec2::ZERO;
        let mut growth_top: Vec<TopCells> =
            n_list.iter().map(|_| TopCells::new(budget.refine_top)).collect();
        for (ai, &theta) in angles.iter().enumerate() {
            let walk = line_walk(sys, pot, anchor, theta, n_list);
            for (ni, &(g, _)) in walk.iter().enumerate() {
                growth_top[ni].push(g, ai as u32, 0);
            }
        }
        let birk_best = sweep_birkhoff(sys, pot, n_list, budget);
        let mut best = Vec::with_capacity(n_list.len());
        for (ni, &n) in n_list.iter().enumerate() {
            let mut g_best = f64::NEG_INFINITY;
            let mut theta_best = 0.0;
            for &(_, ai, _) in &growth_top[ni].items {
                let center = angles[ai as usize];
                let g = |theta: f64| line_walk(sys, pot, anchor, theta, &[n])[0].0;
                let (theta, val) =
                    golden_max(g, center - angle_step, center + angle_step, budget.refine_steps);
                if val > g_best {
                    g_best = val;
                    theta_best = theta;
                }
            }
            let (s_best, x_best) = birk_best[ni];
            best.push(((g_best + s_best) / n as f64, x_best, Some(theta_best)));
        }
        return SweepOutcome { best };
    }

    let points = sample::jittered_grid(budget.base_grid, period, 0.25, budget.seed);
    let mut top: Vec<TopCells> =
        n_list.iter().map(|_| TopCells::new(budget.refine_top)).collect();
    for (pi, &x) in points.iter().enumerate() {
        for (ai, &theta) in angles.iter().enumerate() {
            let walk = line_walk(sys, pot, x, theta, n_list);
            for (ni, &(g, s)) in walk.iter().enumerate() {
                top[ni].push(g + s, pi as u32, ai as u32);
            }
        }
    }
    let cell = period / budget.base_grid as f64;
    let mut best = Vec::with_capacity(n_list.len());
    for (ni, &n) in n_list.iter().enumerate() {
        let single = [n];
        let mut v_best = f64::NEG_INFINITY;
        let mut x_best = Vec2::ZERO;
        let mut theta_best = 0.0;
        for &(_, pi, ai) in &top[ni].items {
            let x0 = points[pi as usize];
            let t0 = angles[ai as usize];
            let obj_theta = |x: Vec2| {
                move |theta: f64| {
                    let (g, s) = line_walk(sys, pot, x, theta, &single)[0];
                    g + s
                }
            };
            let (t1, _) =
                golden_max(obj_theta(x0), t0 - angle_step, t0 + angle_step, budget.refine_steps);
            let (x1, _) = compass_max(
                |x| {
                    let (g, s) = line_walk(sys, pot, x, t1, &single)[0];
                    g + s
                },
                x0,
                period,
                cell * 0.5,
                period * 1e-10,
            );
            let (t2, val) =
                golden_max(obj_theta(x1), t1 - angle_step, t1 + angle_step, budget.refine_steps);
            if val > v_best {
                v_best = val;
                x_best = x1;
                theta_best = t2;
            }
        }
        best.push((v_best / n as f64, x_best, Some(theta_best)));
    }
    SweepOutcome { best }
}

/// Per-horizon supremum of the Birkhoff sum over basepoints, with compass
/// refinement; returns `(sum, arg-max point)` per horizon.
fn sweep_birkhoff(
    sys: &SystemDef,
    pot: &Potential,
    n_list: &[u32],
    budget: &SigmaBudget,
) -> Vec<(f64, Vec2)> {
    if let Some(c) = pot.spatially_constant_value(sys) {
        return n_list.iter().map(|&n| (c * n as f64, Vec2::ZERO)).collect();
    }
    let period = sys.domain_period();
    let points = if sys.as_linear().is_some() {
        sample::corner_grid(budget.base_grid, period)
    } else {
        sample::jittered_grid(budget.base_grid, period, 0.25, budget.seed)
    };
    let mut top: Vec<TopCells> =
        n_list.iter().map(|_| TopCells::new(budget.refine_top)).collect();
    for (pi, &x) in points.iter().enumerate() {
        let walk = plane_walk(sys, pot, x, false, n_list);
        for (ni, &(_, s)) in walk.iter().enumerate() {
            top[ni].push(s, pi as u32, 0);
        }
    }
    let cell = period / budget.base_grid as f64;
    n_list
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let single = [n];
            let mut s_best = f64::NEG_INFINITY;
            let mut x_best = Vec2::ZERO;
            for &(_, pi, _) in &top[ni].items {
                let (x, s) = compass_max(
                    |x| plane_walk(sys, pot, x, false, &single)[0].1,
                    points[pi as usize],
                    period,
                    cell * 0.5,
                    period * 1e-10,
                );
                if s > s_best {
                    s_best = s;
                    x_best = x;
                }
            }
            (s_best, x_best)
        })
        .collect()
}

/// Per-horizon supremum of `(area growth log + Birkhoff)` over basepoints.
fn sweep_planes(
    sys: &SystemDef,
    pot: &Potential,
    n_list: &[u32],
    budget: &SigmaBudget,
) -> Vec<(f64, Vec2)> {
    if sys.as_linear().is_some() {
        // Unimodular constant derivative: area growth is identically zero.
        return sweep_birkhoff(sys, pot, n_list, budget);
    }
    let period = sys.domain_period();
    let points = sample::jittered_grid(budget.base_grid, period, 0.25, budget.seed);
    let mut top: Vec<TopCells> =
        n_list.iter().map(|_| TopCells::new(budget.refine_top)).collect();
    for (pi, &x) in points.iter().enumerate() {
        let walk = plane_walk(sys, pot, x, true, n_list);
        for (ni, &(g, s)) in walk.iter().enumerate() {
            top[ni].push(g + s, pi as u32, 0);
        }
    }
    let cell = period / budget.base_grid as f64;
    n_list
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let single = [n];
            let mut v_best = f64::NEG_INFINITY;
            let mut x_best = Vec2::ZERO;
            for &(_, pi, _) in &top[ni].items {
                let (x, v) = compass_max(
                    |x| {
                        let (g, s) = plane_walk(sys, pot, x, true, &single)[0];
                        g + s
                    },
                    points[pi as usize],
                    period,
                    cell * 0.5,
                    period * 1e-10,
                );
                if v > v_best {
                    v_best = v;
                    x_best = x;
                }
            }
            (v_best, x_best)
        })
        .collect()
}

const SAMPLING_NOTE: &str =
    "suprema sampled on finite grids with local refinement; the upper-bound property holds up to search error";

/// Per-horizon Grassmann supremum for `k`-frames with its witnesses.
///
/// The headline is the minimum over the requested horizons (each per-horizon
/// supremum bounds the limit from above); the series records every horizon.
pub fn sigma_k_samples(
    sys: &SystemDef,
    pot: &Potential,
    k: u32,
    n_list: &[u32],
    budget: &SigmaBudget,
) -> Result<(PressureEstimate, Vec<GrassmannSample>), PressureError> {
    if !(1..=2).contains(&k) {
        return Err(PressureError::InvalidBudget("k must be 1 or 2 on a surface"));
    }
    budget.validate(n_list)?;

    let per_n: Vec<(f64, Vec2, Option<f64>)> = match k {
        1 => sweep_lines(sys, pot, n_list, budget).best,
        _ => sweep_planes(sys, pot, n_list, budget)
            .into_iter()
            .zip(n_list)
            .map(|((v, x), &n)| (v / n as f64, x, None))
            .collect(),
    };

    let mut samples = Vec::with_capacity(n_list.len());
    let mut series = Vec::with_capacity(n_list.len());
    for (&n, &(value, x, theta)) in n_list.iter().zip(&per_n) {
        let frame = match theta {
            Some(t) => TangentFrame::line(x, t),
            None => TangentFrame::plane(x),
        };
        let log_jacobian = sys.log_jacobian_on_frame(&frame, n);
        let birkhoff = sys.birkhoff_sum(pot, x, n);
        samples.push(GrassmannSample { frame, n, log_jacobian, birkhoff, value });
        series.push(SeriesPoint { n, value });
    }
    let value = series
        .iter()
        .map(|p| p.value)
        .fold(f64::INFINITY, f64::min);

    Ok((
        PressureEstimate {
            value,
            method: Method::Grassmann,
            bound: BoundKind::Upper,
            series,
            params: format!(
                "k={} n_max={} base_grid={} angle_grid={} refine_top={} refine_steps={} seed={}",
                k,
                n_list.last().unwrap(),
                budget.base_grid,
                budget.angle_grid,
                budget.refine_top,
                budget.refine_steps,
                budget.seed
            ),
            flags: vec![SAMPLING_NOTE.to_string()],
            witness: None,
        },
        samples,
    ))
}

/// Headline-only variant of [`sigma_k_samples`].
pub fn sigma_k(
    sys: &SystemDef,
    pot: &Potential,
    k: u32,
    n_list: &[u32],
    budget: &SigmaBudget,
) -> Result<PressureEstimate, PressureError> {
    sigma_k_samples(sys, pot, k, n_list, budget).map(|(est, _)| est)
}

/// Diagnostic `k = 0` channel: the pure Birkhoff supremum with no expansion
/// term. Not part of the pressure maximum; useful as a floor for sanity
/// checks.
pub fn birkhoff_sup(
    sys: &SystemDef,
    pot: &Potential,
    n_list: &[u32],
    budget: &SigmaBudget,
) -> Result<PressureEstimate, PressureError> {
    budget.validate(n_list)?;
    let per_n = sweep_birkhoff(sys, pot, n_list, budget);
    let series: Vec<SeriesPoint> = n_list
        .iter()
        .zip(&per_n)
        .map(|(&n, &(s, _))| SeriesPoint { n, value: s / n as f64 })
        .collect();
    let value = series.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    Ok(PressureEstimate {
        value,
        method: Method::Grassmann,
        bound: BoundKind::Lower,
        series,
        params: format!(
            "k=0 (orbit-average diagnostic) n_max={} base_grid={} seed={}",
            n_list.last().unwrap(),
            budget.base_grid,
            budget.seed
        ),
        flags: vec![SAMPLING_NOTE.to_string()],
        witness: None,
    })
}

/// Pressure upper bound: the maximum of the per-`k` headlines over `k = 1`
/// and `k = 2`, with the arg-max `k` and the `k = 0` diagnostic recorded in
/// the parameter string.
pub fn grassmann_pressure(
    sys: &SystemDef,
    pot: &Potential,
    budget: &SigmaBudget,
) -> Result<PressureEstimate, PressureError> {
    let n_list: Vec<u32> = (1..=budget.n_max.max(1)).collect();
    let s1 = sigma_k(sys, pot, 1, &n_list, budget)?;
    let s2 = sigma_k(sys, pot, 2, &n_list, budget)?;
    let s0 = birkhoff_sup(sys, pot, &n_list, budget)?;
    let (best, other, arg_k) = if s1.value >= s2.value { (&s1, &s2, 1) } else { (&s2, &s1, 2) };
    let series: Vec<SeriesPoint> = s1
        .series
        .iter()
        .zip(&s2.series)
        .map(|(a, b)| SeriesPoint { n: a.n, value: a.value.max(b.value) })
        .collect();
    Ok(PressureEstimate {
        value: best.value,
        method: Method::Grassmann,
        bound: BoundKind::Upper,
        series,
        params: format!(
            "argmax_k={} sigma1={:.12} sigma2={:.12} k0_diagnostic={:.12} n_max={} base_grid={} angle_grid={} seed={}",
            arg_k, s1.value, s2.value, s0.value, budget.n_max, budget.base_grid, budget.angle_grid, budget.seed
        ),
        flags: {
            let mut f = vec![SAMPLING_NOTE.to_string()];
            if (best.value - other.value).abs() < 1e-9 {
                f.push("sigma_1 and sigma_2 are equal at this budget".to_string());
            }
            f
        },
        witness: None,
    })
}
