//! p-variation functionals over partitions drawn from a finite grid.
//!
//! The supremum over all partitions is not computable exactly once level-2
//! information enters, so these functionals maximize over partitions whose
//! points come from a configurable refinement of the breakpoints; the DP
//! optimum is monotone under grid refinement, which the tests document as
//! the accuracy statement.

use crate::error::{Error, Result};
use crate::path::SignaturePath;
use crate::tensor::TruncatedTensor;

/// A finite, strictly increasing set of candidate partition points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    times: Vec<f64>,
}

impl Grid {
    pub fn from_times(mut times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::domain("grid must contain at least one time"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("grid times must be finite"));
        }
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        times.dedup();
        Ok(Grid { times })
    }

    /// Breakpoints of the path with every segment split into `r` equal parts.
    pub fn refine(path: &crate::path::PiecewiseLinearPath, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::domain("refinement factor must be at least 1"));
        }
        let t = path.times();
        let mut times = Vec::with_capacity(path.num_segments() * r + 1);
        if path.num_segments() == 0 {
            times.push(t[0]);
        }
        for i in 0..path.num_segments() {
            let (a, b) = (t[i], t[i + 1]);
            for j in 0..r {
                times.push(a + (b - a) * j as f64 / r as f64);
            }
        }
        times.push(path.end_time());
        Grid::from_times(times)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut times = self.times.clone();
        times.extend_from_slice(&other.times);
        Grid::from_times(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn contains(&self, t: f64) -> bool {
        self.times
            .binary_search_by(|u| u.partial_cmp(&t).expect("finite"))
            .is_ok()
    }

    fn check_covers(&self, sp: &SignaturePath) -> Result<()> {
        for &t in sp.path().times() {
            if !self.contains(t) {
                return Err(Error::domain(format!(
                    "grid must be a superset of the path breakpoints; missing t={t}"
                )));
            }
        }
        let first = self.times[0];
        let last = *self.times.last().expect("non-empty");
        if first < sp.path().start_time() || last > sp.path().end_time() {
            return Err(Error::domain(
                "grid extends beyond the path domain".to_string(),
            ));
        }
        Ok(())
    }
}

/// DP over chains 0 = k_0 < … < k_r = m−1 maximizing Σ w(k_l, k_{l+1}).
fn max_partition_sum<W: Fn(usize, usize) -> f64>(m: usize, w: W) -> f64 {
    if m <= 1 {
        return 0.0;
    }
    let mut cum = vec![0.0; m];
    for j in 1..m {
        let mut best = f64::NEG_INFINITY;
        for (i, &c) in cum.iter().enumerate().take(j) {
            let v = c + w(i, j);
            if v > best {
                best = v;
            }
        }
        cum[j] = best;
    }
    cum[m - 1]
}

/// Per-level Euclidean norms of the group increments of one or two signature
/// paths over all grid pairs, shared by the functionals below.
struct IncrementTable {
    m: usize,
    level: usize,
    /// norms[i-1][a*m+b] = ‖π_i(increment over [g_a, g_b])‖
    norms: Vec<Vec<f64>>,
}

impl IncrementTable {
    fn build(sp: &SignaturePath, grid: &Grid) -> Result<Self> {
        let m = grid.len();
        let level = sp.level();
        let points: Vec<TruncatedTensor> = grid
            .times()
            .iter()
            .map(|&t| sp.at(t))
            .collect::<Result<Vec<_>>>()?;
        let inverses: Vec<TruncatedTensor> = points
            .iter()
            .map(|g| g.inverse())
            .collect::<Result<Vec<_>>>()?;
        let mut norms = vec![vec![0.0; m * m]; level];
        for a in 0..m {
            for b in (a + 1)..m {
                let inc = inverses[a].mul(&points[b])?;
                for (i, row) in norms.iter_mut().enumerate() {
                    row[a * m + b] = inc.level_norm(i + 1)?;
                }
            }
        }
        Ok(IncrementTable { m, level, norms })
    }

    /// Same, but for the difference of two paths' increments; also returns
    /// the sup over grid pairs of the homogeneous norm of the difference.
    fn build_diff(x: &SignaturePath, y: &SignaturePath, grid: &Grid) -> Result<(Self, f64)> {
        let m = grid.len();
        let level = x.level();
        let eval = |sp: &SignaturePath| -> Result<(Vec<TruncatedTensor>, Vec<TruncatedTensor>)> {
            let pts: Vec<TruncatedTensor> = grid
                .times()
                .iter()
                .map(|&t| sp.at(t))
                .collect::<Result<Vec<_>>>()?;
            let invs = pts
                .iter()
                .map(|g| g.inverse())
                .collect::<Result<Vec<_>>>()?;
            Ok((pts, invs))
        };
        let (xp, xi) = eval(x)?;
        let (yp, yi) = eval(y)?;
        let mut norms = vec![vec![0.0; m * m]; level];
        let mut sup = 0.0f64;
        for a in 0..m {
            for b in (a + 1)..m {
                let diff = xi[a].mul(&xp[b])?.sub(&yi[a].mul(&yp[b])?)?;
                let mut h = 0.0f64;
                for (i, row) in norms.iter_mut().enumerate() {
                    let n = diff.level_norm(i + 1)?;
                    row[a * m + b] = n;
                    h = h.max(n.powf(1.0 / (i + 1) as f64));
                }
                sup = sup.max(h);
            }
        }
        Ok((IncrementTable { m, level, norms }, sup))
    }

    /// Homogeneous norm of the increment over (a, b).
    fn homogeneous(&self, a: usize, b: usize) -> f64 {
        let mut h = 0.0f64;
        for i in 1..=self.level {
            h = h.max(self.norms[i - 1][a * self.m + b].powf(1.0 / i as f64));
        }
        h
    }

    /// max_i (max over grid partitions of Σ_j ‖π_i‖^{inner/i})^{i/outer},
    /// the mixed-exponent variation functional of the interpolation bound.
    fn level_variation(&self, inner: f64, outer: f64, max_level: usize) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..=max_level.min(self.level) {
            let row = &self.norms[i - 1];
            let m = self.m;
            let best = max_partition_sum(m, |a, b| row[a * m + b].powf(inner / i as f64));
            worst = worst.max(best.powf(i as f64 / outer));
        }
        worst
    }
}

/// The grid p-variation of a signature path: the maximum over partitions
/// drawn from the grid of (Σ_j ‖S_{t_j,t_{j+1}}‖^p)^{1/p} with the
/// homogeneous norm.
pub fn p_variation(sp: &SignaturePath, p: f64, grid: &Grid) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::domain(format!("p must be ≥ 1, got {p}")));
    }
    grid.check_covers(sp)?;
    let table = IncrementTable::build(sp, grid)?;
    let m = grid.len();
    let best = max_partition_sum(m, |a, b| table.homogeneous(a, b).powf(p));
    Ok(best.powf(1.0 / p))
}

/// The p′-variation distance between two signature paths on a shared grid:
/// max over levels i of the DP-maximized (Σ_j ‖π_i(x_inc − y_inc)‖^{p′/i})^{i/p′}.
pub fn p_var_distance(
    x: &SignaturePath,
    y: &SignaturePath,
    p_prime: f64,
    grid: &Grid,
) -> Result<f64> {
    check_pair(x, y, p_prime)?;
    grid.check_covers(x)?;
    grid.check_covers(y)?;
    let (diff, _) = IncrementTable::build_diff(x, y, grid)?;
    Ok(diff.level_variation(p_prime, p_prime, p_prime.floor() as usize))
}

fn check_pair(x: &SignaturePath, y: &SignaturePath, p_prime: f64) -> Result<()> {
    if p_prime < 1.0 {
        return Err(Error::domain(format!("p′ must be ≥ 1, got {p_prime}")));
    }
    if x.dim() != y.dim() || x.level() != y.level() {
        return Err(Error::shape(format!(
            "paths live in T^({})(R^{}) and T^({})(R^{})",
            x.level(),
            x.dim(),
            y.level(),
            y.dim()
        )));
    }
    if x.path().start_time() != y.path().start_time() || x.path().end_time() != y.path().end_time()
    {
        return Err(Error::domain(
            "paths must share the same time interval".to_string(),
        ));
    }
    Ok(())
}

/// Both sides of the p′-variation interpolation inequality
///   d_{p′-var}(x,y) ≤ (sup_{s≤t} ‖x_{s,t} − y_{s,t}‖)^{(p′−p)/p′}
///                     · 2^{p−1} · (V_p(x) + V_p(y)),
/// where V_p(·) is the mixed-exponent variation term with ‖π_i‖^{p/i}
/// inside and i/p′ outside, everything maximized over grid partitions.
#[derive(Debug, Clone)]
pub struct InterpolationBound {
    pub lhs: f64,
    pub sup_dist: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub rhs: f64,
}

impl InterpolationBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12) + 1e-300
    }
}

pub fn interpolation_bound(
    x: &SignaturePath,
    y: &SignaturePath,
    p: f64,
    p_prime: f64,
    grid: &Grid,
) -> Result<InterpolationBound> {
    if p < 1.0 || p_prime < p {
        return Err(Error::domain(format!(
            "need 1 ≤ p ≤ p′, got p={p}, p′={p_prime}"
        )));
    }
    if p_prime.floor() != p.floor() {
        return Err(Error::domain(format!(
            "need ⌊p⌋ = ⌊p′⌋ for the interpolation bound, got {p} and {p_prime}"
        )));
    }
    check_pair(x, y, p_prime)?;
    grid.check_covers(x)?;
    grid.check_covers(y)?;

    let max_level = p_prime.floor() as usize;
    let (diff, sup_dist) = IncrementTable::build_diff(x, y, grid)?;
    let lhs = diff.level_variation(p_prime, p_prime, max_level);
    let var_x = IncrementTable::build(x, grid)?.level_variation(p, p_prime, max_level);
    let var_y = IncrementTable::build(y, grid)?.level_variation(p, p_prime, max_level);
    let rhs = sup_dist.powf((p_prime - p) / p_prime) * 2f64.powf(p - 1.0) * (var_x + var_y);
    Ok(InterpolationBound {
        lhs,
        sup_dist,
        var_x,
        var_y,
        rhs,
    })
}
