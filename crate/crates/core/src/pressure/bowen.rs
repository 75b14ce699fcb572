//! Spanning-set pressure estimation on a grid discretization.
//!
//! For each horizon `n` the grid points are covered greedily by dynamical
//! balls of radius `epsilon`: repeatedly pick the point covering the most
//! uncovered grid points, breaking ties toward the smallest Birkhoff weight.
//! The weighted count `Q_n = sum over picked centers of exp(S_n phi)` bounds
//! the true spanning-set infimum from above on the grid. The raw
//! `(1/n) log Q_n` carries an `epsilon`-dependent offset, so the headline is
//! the median of successive differences `log Q_{n+1} - log Q_n`, which
//! cancels the offset for uniformly expanding oracles. The whole route is a
//! heuristic and is tagged as such.
//!
//! Systems with spatially constant derivative get an exact lattice path:
//! ball membership depends only on the integer coordinate difference, so one
//! offset stencil per horizon replaces all pairwise distance work and grids
//! in the thousands stay affordable. Other systems use a position hash on
//! the first iterate.

use crate::linalg::Vec2;
use crate::sample;
use crate::systems::{Potential, SystemDef};
use crate::torus;

use super::{BoundKind, Method, PressureEstimate, PressureError, SeriesPoint};

/// Horizon cap; past this the grid cannot resolve the balls anyway.
const MAX_HORIZON: u32 = 24;
/// A level's differences enter the headline only when the smaller ball
/// still holds at least this many grid offsets.
const MIN_RESOLVED_BALL: f64 = 4.0;
/// Grid cap for the lattice path with spatially constant weights.
const LATTICE_GRID_CAP: u32 = 4096;
/// Grid cap whenever per-point weights or distances must be handled.
const POINTWISE_GRID_CAP: u32 = 512;
/// Cap on stored orbit entries (grid points times horizon) for the metric path.
const ORBIT_ENTRY_CAP: u64 = 4_000_000;

/// Budget for [`bowen_pressure`]: horizon range, ball radius, grid, and the
/// spanning-set cap that turns runaway levels into a flagged partial result.
#[derive(Debug, Clone, PartialEq)]
pub struct BowenBudget {
    pub n_lo: u32,
    pub n_hi: u32,
    pub epsilon: f64,
    pub grid_density: u32,
    pub max_cover: usize,
}

impl BowenBudget {
    pub fn new(n_lo: u32, n_hi: u32, epsilon: f64, grid_density: u32) -> Self {
        BowenBudget { n_lo, n_hi, epsilon, grid_density, max_cover: 4_000_000 }
    }
}

/// Per-horizon record of one greedy cover.
#[derive(Debug, Clone, PartialEq)]
pub struct BowenLevel {
    pub n: u32,
    /// `log Q_n` of the greedy spanning set.
    pub log_q: f64,
    pub cover_size: usize,
    /// Mean number of grid points per dynamical ball; resolution proxy.
    pub ball_average: f64,
}

trait Cover {
    fn len(&self) -> usize;
    /// Indices whose orbit stays `epsilon`-close to `idx` for the level's
    /// horizon; `out` is cleared first. Contains `idx` itself.
    fn ball(&self, idx: u32, out: &mut Vec<u32>);
    /// Ball cardinality when it is the same for every point.
    fn uniform_count(&self) -> Option<u32>;

    fn init_counts(&self) -> Vec<u32> {
        if let Some(u) = self.uniform_count() {
            return vec![u; self.len()];
        }
        let mut counts = vec![0u32; self.len()];
        let mut ball = Vec::new();
        for (i, count) in counts.iter_mut().enumerate() {
            self.ball(i as u32, &mut ball);
            *count = ball.len() as u32;
        }
        counts
    }
}

/// Order-preserving bit image of a finite float, for exact weight ties.
fn key_bits(x: f64) -> u64 {
    let b = x.to_bits();
    if x.is_sign_negative() {
        !b
    } else {
        b ^ (1u64 << 63)
    }
}

/// Greedy cover with uniform weights: maximize the number of newly covered
/// points, break ties toward the smallest index. A forward cursor sweep per
/// count level reproduces that order because counts only ever decrease.
fn greedy_uniform(cov: &impl Cover, mut counts: Vec<u32>, max_cover: usize) -> (Vec<u32>, bool) {
    let len = cov.len();
    let mut covered = vec![false; len];
    let mut uncovered = len;
    let mut picks = Vec::new();
    let mut ball_i = Vec::new();
    let mut ball_y = Vec::new();
    let mut level = *counts.iter().max().expect("grid is nonempty");
    while uncovered > 0 {
        debug_assert!(level > 0, "uncovered points keep positive counts");
        let mut next_level = 0u32;
        for idx in 0..len as u32 {
            let c = counts[idx as usize];
            if c == level {
                cov.ball(idx, &mut ball_i);
                for &y in &ball_i {
                    if !covered[y as usize] {
                        covered[y as usize] = true;
                        uncovered -= 1;
                        cov.ball(y, &mut ball_y);
                        for &w in &ball_y {
                            counts[w as usize] -= 1;
                        }
                    }
                }
                picks.push(idx);
                if picks.len() >= max_cover && uncovered > 0 {
                    return (picks, true);
                }
            } else if c > next_level && c < level {
                next_level = c;
            }
        }
        level = next_level;
    }
    (picks, false)
}

/// Greedy cover with per-point weights: maximize newly covered points, then
/// minimize the Birkhoff weight, then the index. Count-indexed ordered sets
/// keep the exact priority while counts decay.
fn greedy_weighted(
    cov: &impl Cover,
    mut counts: Vec<u32>,
    weights: &[f64],
    max_cover: usize,
) -> (Vec<u32>, bool) {
    use std::collections::BTreeSet;
    let len = cov.len();
    let max_count = *counts.iter().max().expect("grid is nonempty") as usize;
    let mut levels: Vec<BTreeSet<(u64, u32)>> = vec![BTreeSet::new(); max_count + 1];
    for i in 0..len {
        levels[counts[i] as usize].insert((key_bits(weights[i]), i as u32));
    }
    let mut covered = vec![false; len];
    let mut uncovered = len;
    let mut picks = Vec::new();
    let mut ball_i = Vec::new();
    let mut ball_y = Vec::new();
    let mut cur = max_count;
    while uncovered > 0 {
        while levels[cur].is_empty() {
            cur -= 1;
        }
        debug_assert!(cur > 0, "uncovered points keep positive counts");
        let &(_, idx) = levels[cur].iter().next().expect("level set is nonempty");
        // The decrement pass below relocates every touched entry, including
        // the picked center itself, which ends at count zero.
        cov.ball(idx, &mut ball_i);
        for &y in &ball_i {
            if !covered[y as usize] {
                covered[y as usize] = true;
                uncovered -= 1;
                cov.ball(y, &mut ball_y);
                for &w in &ball_y {
                    let c = counts[w as usize] as usize;
                    let key = (key_bits(weights[w as usize]), w);
                    levels[c].remove(&key);
                    counts[w as usize] -= 1;
                    levels[c - 1].insert(key);
                }
            }
        }
        picks.push(idx);
        if picks.len() >= max_cover && uncovered > 0 {
            return (picks, true);
        }
    }
    (picks, false)
}

/// Integer-lattice cover: ball membership is a fixed offset stencil.
struct LatticeCover {
    g: i32,
    offsets: Vec<(i32, i32)>,
}

impl Cover for LatticeCover {
    fn len(&self) -> usize {
        (self.g as usize) * (self.g as usize)
    }

    fn ball(&self, idx: u32, out: &mut Vec<u32>) {
        out.clear();
        let g = self.g;
        let i = idx as i32 / g;
        let j = idx as i32 % g;
        for &(di, dj) in &self.offsets {
            let mut ii = i + di;
            if ii < 0 {
                ii += g;
            } else if ii >= g {
                ii -= g;
            }
            let mut jj = j + dj;
            if jj < 0 {
                jj += g;
            } else if jj >= g {
                jj -= g;
            }
            out.push((ii * g + jj) as u32);
        }
    }

    fn uniform_count(&self) -> Option<u32> {
        Some(self.offsets.len() as u32)
    }
}

/// Metric cover: orbits stored per iterate, candidates pruned by a position
/// hash on the zeroth iterate.
struct MetricCover<'a> {
    orbits: &'a [Vec<Vec2>],
    n: u32,
    epsilon: f64,
    period: f64,
    cells: u32,
    cell_width: f64,
    buckets: &'a [Vec<u32>],
}

impl MetricCover<'_> {
    fn cell_of(&self, p: Vec2) -> (u32, u32) {
        let cx = ((p.x / self.cell_width) as u32).min(self.cells - 1);
        let cy = ((p.y / self.cell_width) as u32).min(self.cells - 1);
        (cx, cy)
    }
}

impl Cover for MetricCover<'_> {
    fn len(&self) -> usize {
        self.orbits[0].len()
    }

    fn ball(&self, idx: u32, out: &mut Vec<u32>) {
        out.clear();
        let p0 = self.orbits[0][idx as usize];
        let (cx, cy) = self.cell_of(p0);
        let m = self.cells as i64;
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                let bx = (cx as i64 + dx).rem_euclid(m) as u32;
                let by = (cy as i64 + dy).rem_euclid(m) as u32;
                for &cand in &self.buckets[(bx * self.cells + by) as usize] {
                    let within = (0..self.n).all(|t| {
                        torus::distance(
                            self.orbits[t as usize][idx as usize],
                            self.orbits[t as usize][cand as usize],
                            self.period,
                        ) <= self.epsilon
                    });
                    if within {
                        out.push(cand);
                    }
                }
            }
        }
        out.sort_unstable();
    }

    fn uniform_count(&self) -> Option<u32> {
        None
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.map(|v| (v - m).exp()).sum();
    m + sum.ln()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("differences are finite"));
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

struct LevelOutcome {
    levels: Vec<BowenLevel>,
    truncated_at: Option<u32>,
}

/// Lattice path: evolve the offset stencil through the horizons with exact
/// integer arithmetic; ball tests never touch floating point.
fn lattice_levels(
    sys: &SystemDef,
    pot: &Potential,
    a: [[i64; 2]; 2],
    constant_weight: Option<f64>,
    budget: &BowenBudget,
) -> LevelOutcome {
    let g = budget.grid_density as i64;
    let period = sys.domain_period();
    let radius = budget.epsilon / period * g as f64;
    let r2_max = radius * radius;
    let reach = radius.ceil() as i64;

    // Stencil entries carry the original offset and its current iterate.
    let mut stencil: Vec<((i64, i64), (i64, i64))> = Vec::new();
    for di in -reach..=reach {
        for dj in -reach..=reach {
            if (di * di + dj * dj) as f64 <= r2_max {
                stencil.push(((di, dj), (di, dj)));
            }
        }
    }
    let wrap_signed = |v: i64| -> i64 {
        let m = v.rem_euclid(g);
        if 2 * m >= g {
            m - g
        } else {
            m
        }
    };

    // Per-point Birkhoff state, maintained only when weights vary.
    let mut positions: Vec<Vec2> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    if constant_weight.is_none() {
        positions = sample::corner_grid(budget.grid_density, period);
        sums = vec![0.0; positions.len()];
    }

    let mut levels = Vec::new();
    let mut truncated_at = None;
    for n in 1..=budget.n_hi {
        if n > 1 {
            stencil.retain_mut(|(_, cur)| {
                let ni = wrap_signed(a[0][0] * cur.0 + a[0][1] * cur.1);
                let nj = wrap_signed(a[1][0] * cur.0 + a[1][1] * cur.1);
                *cur = (ni, nj);
                (ni * ni + nj * nj) as f64 <= r2_max
            });
        }
        if constant_weight.is_none() {
            // Advance S_{n-1} -> S_n: add the weight at iterate n-1.
            for (s, p) in sums.iter_mut().zip(positions.iter()) {
                *s += pot.eval(sys, *p);
            }
            for p in positions.iter_mut() {
                *p = sys.eval(*p);
            }
        }
        if n < budget.n_lo {
            continue;
        }
        let cover = LatticeCover {
            g: g as i32,
            offsets: stencil.iter().map(|&((di, dj), _)| (di as i32, dj as i32)).collect(),
        };
        let counts = cover.init_counts();
        let (picks, truncated) = match constant_weight {
            Some(_) => greedy_uniform(&cover, counts, budget.max_cover),
            None => greedy_weighted(&cover, counts, &sums, budget.max_cover),
        };
        if truncated {
            truncated_at = Some(n);
            break;
        }
        let log_q = match constant_weight {
            Some(c) => (picks.len() as f64).ln() + n as f64 * c,
            None => log_sum_exp(picks.iter().map(|&i| sums[i as usize])),
        };
        levels.push(BowenLevel {
            n,
            log_q,
            cover_size: picks.len(),
            ball_average: stencil.len() as f64,
        });
    }
    LevelOutcome { levels, truncated_at }
}

/// Metric path: precompute every orbit through the top horizon, hash the
/// zeroth iterate for candidate pruning, and measure distances directly.
fn metric_levels(
    sys: &SystemDef,
    pot: &Potential,
    constant_weight: Option<f64>,
    budget: &BowenBudget,
) -> LevelOutcome {
    let period = sys.domain_period();
    let points = sample::corner_grid(budget.grid_density, period);
    let len = points.len();
    let mut orbits: Vec<Vec<Vec2>> = Vec::with_capacity(budget.n_hi as usize);
    orbits.push(points);
    for t in 1..budget.n_hi {
        let prev = &orbits[(t - 1) as usize];
        orbits.push(prev.iter().map(|&p| sys.eval(p)).collect());
    }

    let cells = ((period / budget.epsilon).floor() as u32).max(1);
    let cell_width = period / cells as f64;
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); (cells * cells) as usize];
    for (i, &p) in orbits[0].iter().enumerate() {
        let cx = ((p.x / cell_width) as u32).min(cells - 1);
        let cy = ((p.y / cell_width) as u32).min(cells - 1);
        buckets[(cx * cells + cy) as usize].push(i as u32);
    }

    let mut sums: Vec<f64> = vec![0.0; len];
    let mut accumulated = 0u32;

    let mut levels = Vec::new();
    let mut truncated_at = None;
    for n in budget.n_lo..=budget.n_hi {
        if constant_weight.is_none() {
            while accumulated < n {
                let layer = &orbits[accumulated as usize];
                for (s, &p) in sums.iter_mut().zip(layer.iter()) {
                    *s += pot.eval(sys, p);
                }
                accumulated += 1;
            }
        }
        let cover = MetricCover {
            orbits: &orbits,
            n,
            epsilon: budget.epsilon,
            period,
            cells,
            cell_width,
            buckets: &buckets,
        };
        let counts = cover.init_counts();
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        let ball_average = total as f64 / len as f64;
        let (picks, truncated) = match constant_weight {
            Some(_) => greedy_uniform(&cover, counts, budget.max_cover),
            None => greedy_weighted(&cover, counts, &sums, budget.max_cover),
        };
        if truncated {
            truncated_at = Some(n);
            break;
        }
        let log_q = match constant_weight {
            Some(c) => (picks.len() as f64).ln() + n as f64 * c,
            None => log_sum_exp(picks.iter().map(|&i| sums[i as usize])),
        };
        levels.push(BowenLevel { n, log_q, cover_size: picks.len(), ball_average });
    }
    LevelOutcome { levels, truncated_at }
}

/// Greedy spanning-set pressure estimate with per-level diagnostics.
pub fn bowen_levels(
    sys: &SystemDef,
    pot: &Potential,
    budget: &BowenBudget,
) -> Result<(PressureEstimate, Vec<BowenLevel>), PressureError> {
    let period = sys.domain_period();
    if budget.n_lo < 1 || budget.n_lo >= budget.n_hi || budget.n_hi > MAX_HORIZON {
        return Err(PressureError::InvalidBudget(
            "horizon range must satisfy 1 <= n_lo < n_hi <= 24",
        ));
    }
    if !budget.epsilon.is_finite() || budget.epsilon <= 0.0 || budget.epsilon > 0.25 * period {
        return Err(PressureError::InvalidBudget(
            "epsilon must lie in (0, period/4]",
        ));
    }
    let g = budget.grid_density;
    if (g as f64) <= 2.0 * period / budget.epsilon {
        return Err(PressureError::InvalidBudget(
            "grid spacing must be finer than half of epsilon",
        ));
    }
    if budget.max_cover < 16 {
        return Err(PressureError::InvalidBudget("max_cover must be at least 16"));
    }
    let linear = sys.as_linear();
    let constant_weight = pot.spatially_constant_value(sys);
    let grid_cap = if linear.is_some() && constant_weight.is_some() {
        LATTICE_GRID_CAP
    } else {
        POINTWISE_GRID_CAP
    };
    if g > grid_cap {
        return Err(PressureError::InvalidBudget(
            "grid_density exceeds the cap for this system/potential combination",
        ));
    }
    if linear.is_none() && (g as u64 * g as u64 * budget.n_hi as u64) > ORBIT_ENTRY_CAP {
        return Err(PressureError::InvalidBudget(
            "grid_density^2 * n_hi exceeds the stored-orbit budget",
        ));
    }

    let outcome = match linear {
        Some(a) => lattice_levels(sys, pot, a, constant_weight, budget),
        None => metric_levels(sys, pot, constant_weight, budget),
    };

    let mut flags = Vec::new();
    if let Some(n) = outcome.truncated_at {
        flags.push(format!(
            "spanning set exceeded max_cover={} at n={}; later levels omitted",
            budget.max_cover, n
        ));
    }
    if outcome.levels.len() < 2 {
        return Err(PressureError::NoUsableData(
            "fewer than two spanning levels fit the cover cap",
        ));
    }

    let mut diffs = Vec::new();
    let mut usable = Vec::new();
    let mut first_unresolved: Option<u32> = None;
    for pair in outcome.levels.windows(2) {
        let d = pair[1].log_q - pair[0].log_q;
        diffs.push(SeriesPoint { n: pair[0].n, value: d });
        if pair[1].ball_average >= MIN_RESOLVED_BALL {
            usable.push(d);
        } else if first_unresolved.is_none() {
            first_unresolved = Some(pair[1].n);
        }
    }
    if let Some(n) = first_unresolved {
        flags.push(format!(
            "dynamical balls at n>={n} average fewer than {MIN_RESOLVED_BALL} grid offsets; \
             the affected differences are excluded from the headline"
        ));
    }
    let value = if usable.is_empty() {
        flags.push(
            "every difference lies beyond the grid's resolution; the headline uses them all \
             and is biased low"
                .to_string(),
        );
        median(diffs.iter().map(|p| p.value).collect())
    } else {
        median(usable)
    };

    let log_q_record: Vec<String> = outcome
        .levels
        .iter()
        .map(|l| format!("{}:{:.6}", l.n, l.log_q))
        .collect();
    let estimate = PressureEstimate {
        value,
        method: Method::Bowen,
        bound: BoundKind::Heuristic,
        series: diffs,
        params: format!(
            "n_lo={} n_hi={} epsilon={} grid_density={} max_cover={} path={} log_q=[{}]",
            budget.n_lo,
            budget.n_hi,
            budget.epsilon,
            budget.grid_density,
            budget.max_cover,
            if linear.is_some() { "lattice" } else { "metric" },
            log_q_record.join(" ")
        ),
        flags,
        witness: None,
    };
    Ok((estimate, outcome.levels))
}

/// Headline-only variant of [`bowen_levels`].
pub fn bowen_pressure(
    sys: &SystemDef,
    pot: &Potential,
    budget: &BowenBudget,
) -> Result<PressureEstimate, PressureError> {
    bowen_levels(sys, pot, budget).map(|(est, _)| est)
}
