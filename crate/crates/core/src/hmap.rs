//! Iterated integrals of a signature path, reconstructed algebraically.
//!
//! The level-n data of the signature of t ↦ S_N(x)_{0,t} (a path in
//! W = ⊕_{i=1}^N V^{⊗i}) is the family, over profiles (i_1,…,i_n) ∈ {1..N}^n,
//! of iterated integrals ∫_{s<s_1<…<s_n<t} dS^{i_1}_{0,s_1}⊗…⊗dS^{i_n}_{0,s_n}.
//! Each of these equals the bilinear expression
//!
//!   H_{i_1,…,i_n}(X, Y) = Σ_{j_k=1}^{i_k} F_{j_1,…,j_n}(X^{i_1−j_1},…,X^{i_n−j_n})
//!                          [ Σ_{π ∈ OS(j_1,…,j_n)} π(Y^{j_1+…+j_n}) ]
//!
//! with X = S_{0,s} and Y = S_{s,t}. The enumeration of the ordered
//! shuffles OS lives in `words`; an independent simplex-quadrature oracle
//! here pins it down numerically.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::path::{PiecewiseLinearPath, SignaturePath};
use crate::tensor::TruncatedTensor;
use crate::words::{self, BlockProfile, ShuffleReport};

/// Row-major flattened outer product of two dense blocks.
pub fn outer_block(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() * b.len()];
    for (ia, &av) in a.iter().enumerate() {
        if av == 0.0 {
            continue;
        }
        let base = ia * b.len();
        for (ib, &bv) in b.iter().enumerate() {
            out[base + ib] = av * bv;
        }
    }
    out
}

/// A point of W = ⊕_{i=1}^N V^{⊗i}: one dense block per inner level.
#[derive(Debug, Clone, PartialEq)]
pub struct WSpacePoint {
    dim: usize,
    inner_level: usize,
    blocks: Vec<Vec<f64>>,
}

impl WSpacePoint {
    /// Projects the levels 1..=N of a truncated tensor into W.
    pub fn from_tensor(g: &TruncatedTensor, inner_level: usize) -> Result<Self> {
        if inner_level == 0 || inner_level > g.level() {
            return Err(Error::domain(format!(
                "inner level {inner_level} outside 1..={}",
                g.level()
            )));
        }
        let blocks = (1..=inner_level)
            .map(|i| g.block(i).map(|b| b.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(WSpacePoint {
            dim: g.dim(),
            inner_level,
            blocks,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inner_level(&self) -> usize {
        self.inner_level
    }

    /// Block i (1-based), of size d^i.
    pub fn block(&self, i: usize) -> Result<&[f64]> {
        if i == 0 || i > self.inner_level {
            return Err(Error::domain(format!(
                "inner level {i} outside 1..={}",
                self.inner_level
            )));
        }
        Ok(&self.blocks[i - 1])
    }

    /// ‖ξ‖_W = Σ_i ‖ξ^i‖.
    pub fn w_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|x| x * x).sum::<f64>().sqrt())
            .sum()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.inner_level != other.inner_level {
            return Err(Error::shape("W-points of different shape".to_string()));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(WSpacePoint {
            dim: self.dim,
            inner_level: self.inner_level,
            blocks,
        })
    }
}

/// One profile's worth of level data: a dense block in V^{⊗(i_1+…+i_n)}.
#[derive(Debug, Clone, PartialEq)]
pub struct HLevel {
    dim: usize,
    profile: Vec<usize>,
    block: Vec<f64>,
}

impl HLevel {
    pub fn new(dim: usize, profile: Vec<usize>, block: Vec<f64>) -> Result<Self> {
        let total: usize = profile.iter().sum();
        let want = dim.pow(total as u32);
        if block.len() != want {
            return Err(Error::shape(format!(
                "profile {profile:?} over R^{dim} needs {want} entries, got {}",
                block.len()
            )));
        }
        Ok(HLevel {
            dim,
            profile,
            block,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &[usize] {
        &self.profile
    }

    pub fn block(&self) -> &[f64] {
        &self.block
    }

    pub fn norm(&self) -> f64 {
        self.block.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim || self.profile != other.profile {
            return Err(Error::shape("H levels of different shape".to_string()));
        }
        Ok(self
            .block
            .iter()
            .zip(&other.block)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// F_{j_1,…,j_n}(v_1,…,v_n) applied to a dense y-block: interleaves each
/// x-block before the corresponding y-slot group,
/// x_1⊗w_1⊗x_2⊗w_2⊗…⊗x_n⊗w_n, extended linearly over the y-block.
///
/// `xblocks[k] = (level, data)` is the dense block of X at level i_k − j_k.
pub fn f_apply(
    dim: usize,
    j_profile: &BlockProfile,
    xblocks: &[(usize, &[f64])],
    yblock: &[f64],
) -> Result<Vec<f64>> {
    let n = j_profile.parts().len();
    if xblocks.len() != n {
        return Err(Error::shape(format!(
            "{} x-blocks for {} y-slot groups",
            xblocks.len(),
            n
        )));
    }
    for (k, &(lvl, data)) in xblocks.iter().enumerate() {
        if data.len() != dim.pow(lvl as u32) {
            return Err(Error::shape(format!(
                "x-block {k} has {} entries, expected dim^{lvl}",
                data.len()
            )));
        }
    }
    let m: usize = j_profile.total();
    if yblock.len() != dim.pow(m as u32) {
        return Err(Error::shape(format!(
            "y-block has {} entries, expected dim^{m}",
            yblock.len()
        )));
    }

    // Digit strides in the output: groups in slot order x_1 y_1 x_2 y_2 …
    let xlens: Vec<usize> = xblocks.iter().map(|&(l, _)| l).collect();
    let jlens = j_profile.parts();
    let total: usize = xlens.iter().sum::<usize>() + m;
    let mut x_stride = vec![0usize; n];
    let mut y_stride = vec![0usize; n];
    let mut tail = 0usize; // letters after the current group
    for k in (0..n).rev() {
        y_stride[k] = dim.pow(tail as u32);
        tail += jlens[k];
        x_stride[k] = dim.pow(tail as u32);
        tail += xlens[k];
    }
    debug_assert_eq!(tail, total);

    // Map a row-major y offset to its contribution in the output offset.
    let mut y_suffix = vec![0usize; n]; // letters of y after group k
    let mut acc = 0usize;
    for k in (0..n).rev() {
        y_suffix[k] = acc;
        acc += jlens[k];
    }
    let mut ymap = vec![0usize; yblock.len()];
    for (y_off, slot) in ymap.iter_mut().enumerate() {
        let mut s = 0usize;
        for k in 0..n {
            let group = (y_off / dim.pow(y_suffix[k] as u32)) % dim.pow(jlens[k] as u32);
            s += group * y_stride[k];
        }
        *slot = s;
    }

    let mut out = vec![0.0; dim.pow(total as u32)];
    // Odometer over x-offset tuples.
    let sizes: Vec<usize> = xlens.iter().map(|&l| dim.pow(l as u32)).collect();
    let mut a = vec![0usize; n];
    loop {
        let mut px = 1.0;
        let mut base = 0usize;
        for k in 0..n {
            px *= xblocks[k].1[a[k]];
            base += a[k] * x_stride[k];
        }
        if px != 0.0 {
            for (y_off, &yv) in yblock.iter().enumerate() {
                if yv != 0.0 {
                    out[base + ymap[y_off]] += px * yv;
                }
            }
        }
        // advance odometer
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            a[k] += 1;
            if a[k] < sizes[k] {
                break;
            }
            a[k] = 0;
        }
    }
}

/// H_{i_1,…,i_n}(X, Y): the ordered-shuffle reconstruction of the iterated
/// integral of the signature path over [s, t] from X = S_{0,s} and
/// Y = S_{s,t}. The empty profile gives the scalar 1.
pub fn h_map(profile: &[usize], x: &TruncatedTensor, y: &TruncatedTensor) -> Result<HLevel> {
    if x.dim() != y.dim() || x.level() != y.level() {
        return Err(Error::shape(format!(
            "H arguments live in T^({})(R^{}) and T^({})(R^{})",
            x.level(),
            x.dim(),
            y.level(),
            y.dim()
        )));
    }
    let dim = x.dim();
    let n = profile.len();
    if n == 0 {
        return HLevel::new(dim, Vec::new(), vec![1.0]);
    }
    if profile.contains(&0) {
        return Err(Error::domain("profile entries must be at least 1"));
    }
    let total: usize = profile.iter().sum();
    if total > x.level() {
        return Err(Error::capacity(format!(
            "profile {profile:?} needs truncation level {total}, arguments have {}",
            x.level()
        )));
    }

    let mut result = vec![0.0; dim.pow(total as u32)];
    // Odometer over inner profiles j with 1 ≤ j_k ≤ i_k.
    let mut j = vec![1usize; n];
    loop {
        let m: usize = j.iter().sum();
        let jp = BlockProfile::new(j.clone())?;
        let ysrc = y.block(m)?;
        let mut os_sum = vec![0.0; ysrc.len()];
        for pi in words::ordered_shuffles(&jp) {
            words::add_permuted(&mut os_sum, ysrc, dim, &pi);
        }
        let xblocks: Vec<(usize, &[f64])> = profile
            .iter()
            .zip(&j)
            .map(|(&i, &jk)| x.block(i - jk).map(|b| (i - jk, b)))
            .collect::<Result<Vec<_>>>()?;
        let term = f_apply(dim, &jp, &xblocks, &os_sum)?;
        for (r, t) in result.iter_mut().zip(term) {
            *r += t;
        }

        // advance odometer
        let mut k = n;
        loop {
            if k == 0 {
                return HLevel::new(dim, profile.to_vec(), result);
            }
            k -= 1;
            j[k] += 1;
            if j[k] <= profile[k] {
                break;
            }
            j[k] = 1;
        }
    }
}

/// Brute-force numerical iterated integral
/// ∫_{s<s_1<…<s_n<t} dS^{i_1}_{0,s_1}⊗…⊗dS^{i_n}_{0,s_n}
/// by a cumulative iterated one-dimensional product-Simpson rule with `q`
/// double panels per path segment per axis, panels aligned to breakpoints.
/// Ground truth for `h_map` and for the ordered-shuffle enumeration.
///
/// Each Stieltjes step ∫ f dg fits both f and g quadratically on a double
/// panel and integrates f·ĝ′ exactly, so the rule is fourth order on the
/// piecewise-polynomial signature coordinates (and exact through quadratics).
pub fn iterated_integral_oracle(
    x: &PiecewiseLinearPath,
    profile: &[usize],
    s: f64,
    t: f64,
    q: usize,
) -> Result<HLevel> {
    let n = profile.len();
    if n == 0 || n > 3 {
        return Err(Error::capacity(format!(
            "simplex dimension {n} outside the supported range 1..=3"
        )));
    }
    if profile.contains(&0) {
        return Err(Error::domain("profile entries must be at least 1"));
    }
    if q == 0 {
        return Err(Error::domain("need at least one quadrature panel"));
    }
    if s > t {
        return Err(Error::domain(format!("need s ≤ t, got s={s}, t={t}")));
    }
    let dim = x.dim();
    let total: usize = profile.iter().sum();
    if s == t {
        return HLevel::new(dim, profile.to_vec(), vec![0.0; dim.pow(total as u32)]);
    }
    let max_level = *profile.iter().max().expect("non-empty");
    let sp = SignaturePath::new(x.clone(), max_level)?;

    // Node grid: breakpoints inside (s, t) plus endpoints, each interval
    // split into q double panels (2q sub-intervals), so panel midpoints are
    // grid nodes and no panel straddles a breakpoint.
    let mut anchors = vec![s];
    for &bp in x.times() {
        if bp > s && bp < t {
            anchors.push(bp);
        }
    }
    anchors.push(t);
    let mut grid = Vec::with_capacity((anchors.len() - 1) * 2 * q + 1);
    for w in anchors.windows(2) {
        for k in 0..2 * q {
            grid.push(w[0] + (w[1] - w[0]) * k as f64 / (2 * q) as f64);
        }
    }
    grid.push(t);

    let values: Vec<TruncatedTensor> =
        grid.iter().map(|&u| sp.at(u)).collect::<Result<Vec<_>>>()?;

    // Depth-r cumulative integrals at every grid node; depth 0 is the
    // constant 1. On the double panel (a, m, b):
    //   ∫_a^b f dĝ = f_a⊗(−3g_a+4g_m−g_b)/6 + f_m⊗(4g_b−4g_a)/6
    //              + f_b⊗(g_a−4g_m+3g_b)/6,
    // and the half-panel value at m uses the same quadratic fits
    // integrated over [a, m].
    let npts = grid.len();
    let mut prev: Vec<Vec<f64>> = vec![vec![1.0]; npts];
    for &level in profile {
        let blocks: Vec<&[f64]> = values
            .iter()
            .map(|g| g.block(level))
            .collect::<Result<Vec<_>>>()?;
        let width = dim.pow(level as u32);
        let size = prev[0].len() * width;
        let mut cur: Vec<Vec<f64>> = vec![vec![0.0; size]; npts];
        let mut combo = vec![0.0; width];
        for base in (0..npts - 1).step_by(2) {
            let (ga, gm, gb) = (blocks[base], blocks[base + 1], blocks[base + 2]);
            let fs = [&prev[base], &prev[base + 1], &prev[base + 2]];
            // half panel [a, m]
            let half = cur[base].clone();
            let half_w = [
                [-1.0 / 2.0, 7.0 / 12.0, -1.0 / 12.0],
                [-7.0 / 12.0, 1.0 / 2.0, 1.0 / 12.0],
                [1.0 / 12.0, -1.0 / 12.0, 0.0],
            ];
            let mut acc = half;
            for (f, w) in fs.iter().zip(half_w) {
                for (c, ((&a, &m), &b)) in combo.iter_mut().zip(ga.iter().zip(gm).zip(gb.iter())) {
                    *c = w[0] * a + w[1] * m + w[2] * b;
                }
                accumulate_outer(&mut acc, f, &combo, width);
            }
            cur[base + 1] = acc;
            // full panel [a, b]
            let full_w = [
                [-3.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0],
                [-4.0 / 6.0, 0.0, 4.0 / 6.0],
                [1.0 / 6.0, -4.0 / 6.0, 3.0 / 6.0],
            ];
            let mut acc = cur[base].clone();
            for (f, w) in fs.iter().zip(full_w) {
                for (c, ((&a, &m), &b)) in combo.iter_mut().zip(ga.iter().zip(gm).zip(gb.iter())) {
                    *c = w[0] * a + w[1] * m + w[2] * b;
                }
                accumulate_outer(&mut acc, f, &combo, width);
            }
            cur[base + 2] = acc;
        }
        prev = cur;
    }
    HLevel::new(dim, profile.to_vec(), prev.pop().expect("non-empty"))
}

/// acc += f ⊗ combo, with acc viewed as chunks of `width`.
fn accumulate_outer(acc: &mut [f64], f: &[f64], combo: &[f64], width: usize) {
    for (slot, &fv) in acc.chunks_mut(width).zip(f) {
        if fv == 0.0 {
            continue;
        }
        for (out, &cv) in slot.iter_mut().zip(combo) {
            *out += fv * cv;
        }
    }
}

/// All profiles (i_1,…,i_n) ∈ {1..N}^n in lexicographic order.
pub fn profiles(inner_level: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::with_capacity(inner_level.pow(n as u32));
    let mut cur = vec![1usize; n];
    loop {
        out.push(cur.clone());
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] <= inner_level {
                break;
            }
            cur[k] = 1;
        }
    }
}

/// The level-n family {H_{i_1,…,i_n}(S_{0,s}, S_{s,t})} over all profiles in
/// {1..N}^n, in lexicographic profile order.
pub fn assemble_j_level(
    x: &PiecewiseLinearPath,
    n: usize,
    inner_level: usize,
    s: f64,
    t: f64,
) -> Result<Vec<HLevel>> {
    if inner_level == 0 {
        return Err(Error::domain("inner level must be at least 1"));
    }
    let trunc = n.max(1) * inner_level;
    let sp = SignaturePath::new(x.clone(), trunc)?;
    let xs = sp.at(s)?;
    let ys = sp.increment(s, t)?;
    profiles(inner_level, n)
        .into_iter()
        .map(|p| h_map(&p, &xs, &ys))
        .collect()
}

fn w_dim(dim: usize, inner_level: usize) -> usize {
    (1..=inner_level).map(|i| dim.pow(i as u32)).sum()
}

fn w_letter_base(dim: usize, i: usize) -> usize {
    (1..i).map(|k| dim.pow(k as u32)).sum()
}

/// Packs a level's per-profile blocks into one dense block over the
/// W alphabet (letters enumerated by inner level, then row-major inside).
pub fn pack_w_level(
    dim: usize,
    inner_level: usize,
    n: usize,
    levels: &[HLevel],
) -> Result<Vec<f64>> {
    let d_w = w_dim(dim, inner_level);
    let size = (d_w as u128).pow(n as u32);
    if size > crate::tensor::MAX_TOP_BLOCK {
        return Err(Error::capacity(format!(
            "packed W level has {size} coefficients"
        )));
    }
    let expected = profiles(inner_level, n);
    if levels.len() != expected.len() {
        return Err(Error::shape(format!(
            "expected {} profiles, got {}",
            expected.len(),
            levels.len()
        )));
    }
    let mut out = vec![0.0; size as usize];
    for (hl, want) in levels.iter().zip(&expected) {
        if hl.profile() != want.as_slice() {
            return Err(Error::shape(format!(
                "profile order mismatch: expected {:?}, got {:?}",
                want,
                hl.profile()
            )));
        }
        let profile = hl.profile();
        // suffix letter counts inside V-multi-indices
        let mut v_suffix = vec![0usize; profile.len()];
        let mut acc = 0usize;
        for k in (0..profile.len()).rev() {
            v_suffix[k] = acc;
            acc += profile[k];
        }
        for (v_off, &val) in hl.block().iter().enumerate() {
            let mut w_off = 0usize;
            for k in 0..profile.len() {
                let alpha = (v_off / dim.pow(v_suffix[k] as u32)) % dim.pow(profile[k] as u32);
                let letter = w_letter_base(dim, profile[k]) + alpha;
                w_off = w_off * d_w + letter;
            }
            out[w_off] = val;
        }
    }
    Ok(out)
}

/// A truncated tensor over the W alphabet, packed level by level, with the
/// inner structure remembered for profile-wise norms and serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct WTensor {
    dim: usize,
    inner_level: usize,
    level: usize,
    blocks: Vec<Vec<f64>>,
}

impl WTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inner_level(&self) -> usize {
        self.inner_level
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn w_dim(&self) -> usize {
        w_dim(self.dim, self.inner_level)
    }

    pub fn block(&self, k: usize) -> Result<&[f64]> {
        self.blocks
            .get(k)
            .map(|b| b.as_slice())
            .ok_or_else(|| Error::domain(format!("level {k} out of range 0..={}", self.level)))
    }

    /// Reinterprets the packed stack as an ordinary truncated tensor over
    /// the W alphabet, e.g. to run the shuffle criterion.
    pub fn as_truncated(&self) -> Result<TruncatedTensor> {
        TruncatedTensor::from_levels(self.w_dim(), self.level, self.blocks.clone())
    }

    /// ‖·‖_{W^{⊗k}} = Σ over profiles of the Euclidean norm of the profile's
    /// sub-block.
    pub fn w_norm(&self, k: usize) -> Result<f64> {
        w_level_norm(self.dim, self.inner_level, k, self.block(k)?)
    }
}

/// The W-space norm of one packed level block: the sum over profiles of the
/// Euclidean norms of the profile sub-blocks. Admissible for the packed
/// tensor product (the norm of an outer product is bounded by the product
/// of the norms).
pub fn w_level_norm(dim: usize, inner_level: usize, n: usize, block: &[f64]) -> Result<f64> {
    let d_w = w_dim(dim, inner_level);
    if block.len() != d_w.pow(n as u32) {
        return Err(Error::shape(format!(
            "packed level-{n} block must have {} entries, got {}",
            d_w.pow(n as u32),
            block.len()
        )));
    }
    if n == 0 {
        return Ok(block[0].abs());
    }
    let mut per_profile = std::collections::BTreeMap::<Vec<usize>, f64>::new();
    let mut letters = vec![0usize; n];
    for (off, &val) in block.iter().enumerate() {
        let mut rem = off;
        for slot in (0..n).rev() {
            letters[slot] = rem % d_w;
            rem /= d_w;
        }
        let profile: Vec<usize> = letters
            .iter()
            .map(|&l| {
                let mut i = 1;
                while i < inner_level && w_letter_base(dim, i + 1) <= l {
                    i += 1;
                }
                i
            })
            .collect();
        *per_profile.entry(profile).or_insert(0.0) += val * val;
    }
    Ok(per_profile.values().map(|s| s.sqrt()).sum())
}

impl Serialize for WTensor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct WSpaceMeta {
            dim: usize,
            inner_level: usize,
            outer_level: usize,
            profiles: Vec<Vec<usize>>,
        }
        let tensor = self.as_truncated().map_err(serde::ser::Error::custom)?;
        let mut st = serializer.serialize_struct("WTensor", 2)?;
        st.serialize_field(
            "wspace",
            &WSpaceMeta {
                dim: self.dim,
                inner_level: self.inner_level,
                outer_level: self.level,
                profiles: profiles(self.inner_level, self.level),
            },
        )?;
        st.serialize_field("tensor", &tensor)?;
        st.end()
    }
}

/// S(J(x))_{s,t} truncated at outer level n, packed over the W alphabet.
pub fn j_signature(
    x: &PiecewiseLinearPath,
    n: usize,
    inner_level: usize,
    s: f64,
    t: f64,
) -> Result<WTensor> {
    let mut blocks = vec![vec![1.0]];
    for k in 1..=n {
        let levels = assemble_j_level(x, k, inner_level, s, t)?;
        blocks.push(pack_w_level(x.dim(), inner_level, k, &levels)?);
    }
    Ok(WTensor {
        dim: x.dim(),
        inner_level,
        level: n,
        blocks,
    })
}

/// Packs Σ over profiles of H_{i_1,…,i_n}(1, S_{0,t}) for all outer levels
/// up to n and runs the shuffle criterion in the W alphabet.
pub fn check_j_group_like(
    x: &PiecewiseLinearPath,
    n: usize,
    inner_level: usize,
    t: f64,
    tol: f64,
) -> Result<(bool, ShuffleReport)> {
    let w = j_signature(x, n, inner_level, x.start_time(), t)?;
    let g = w.as_truncated()?;
    let report = words::group_like_report(&g);
    Ok((report.worst_residual <= tol, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::signature;

    fn l_path() -> PiecewiseLinearPath {
        PiecewiseLinearPath::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]])
            .unwrap()
    }

    #[test]
    fn f_apply_identity_and_scaling() {
        // n = 1, j = i: the x part is the scalar 1 and F is the identity.
        let jp = BlockProfile::new(vec![2]).unwrap();
        let y = vec![1.0, 2.0, 3.0, 4.0];
        let out = f_apply(2, &jp, &[(0, &[1.0])], &y).unwrap();
        assert_eq!(out, y);

        // d = 1: F_1((2))(w) = 2w, shifted to level 2.
        let jp = BlockProfile::new(vec![1]).unwrap();
        let out = f_apply(1, &jp, &[(1, &[2.0])], &[3.0]).unwrap();
        assert_eq!(out, vec![6.0]);
    }

    #[test]
    fn f_apply_interleaves_slots() {
        // F_{1,1}(a, b)(u⊗v) = a⊗u⊗b⊗v for letters in R².
        let a = [1.0, 0.0]; // e1
        let b = [0.0, 1.0]; // e2
        let mut y = vec![0.0; 4]; // u⊗v = e2⊗e1
        y[2] = 1.0;
        let jp = BlockProfile::new(vec![1, 1]).unwrap();
        let out = f_apply(2, &jp, &[(1, &a), (1, &b)], &y).unwrap();
        // expect e1⊗e2⊗e2⊗e1 at offset 0*8+1*4+1*2+0 = 6
        let mut want = vec![0.0; 16];
        want[6] = 1.0;
        assert_eq!(out, want);
    }

    #[test]
    fn h_with_unit_arguments() {
        let g = signature(&l_path(), 4).unwrap().into_tensor();
        let unit = TruncatedTensor::unit(2, 4).unwrap();
        // H_{(i)}(1, Y) = π_i(Y)
        for i in 1..=4 {
            let h = h_map(&[i], &unit, &g).unwrap();
            assert_eq!(h.block(), g.block(i).unwrap());
        }
        // H(X, 1) = 0 for n ≥ 1: every term needs a positive level of Y.
        let h = h_map(&[2], &g, &unit).unwrap();
        assert!(h.norm() == 0.0);
        let h = h_map(&[1, 2], &g, &unit).unwrap();
        assert!(h.norm() == 0.0);
    }

    #[test]
    fn h_single_profile_closed_form() {
        // H_i(X, Y) = π_i(X⊗Y) − π_i(X), exactly.
        let x = signature(&l_path(), 4).unwrap().into_tensor();
        let y = signature(
            &PiecewiseLinearPath::from_points(vec![vec![0.0, 0.0], vec![-0.5, 0.75]]).unwrap(),
            4,
        )
        .unwrap()
        .into_tensor();
        let xy = x.mul(&y).unwrap();
        for i in 1..=4 {
            let h = h_map(&[i], &x, &y).unwrap();
            let want: Vec<f64> = xy
                .block(i)
                .unwrap()
                .iter()
                .zip(x.block(i).unwrap())
                .map(|(a, b)| a - b)
                .collect();
            let err = h
                .block()
                .iter()
                .zip(&want)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-14, "profile ({i}): err {err}");
        }
    }

    #[test]
    fn h_rejects_overflowing_profile() {
        let g = signature(&l_path(), 3).unwrap().into_tensor();
        assert!(matches!(h_map(&[2, 2], &g, &g), Err(Error::Capacity(_))));
        assert!(h_map(&[0], &g, &g).is_err());
    }

    #[test]
    fn oracle_depth_one_is_exact() {
        let x = l_path();
        let sp = SignaturePath::new(x.clone(), 3).unwrap();
        for i in 1..=3 {
            let o = iterated_integral_oracle(&x, &[i], 0.3, 1.7, 8).unwrap();
            let want: Vec<f64> = sp
                .at(1.7)
                .unwrap()
                .block(i)
                .unwrap()
                .iter()
                .zip(sp.at(0.3).unwrap().block(i).unwrap())
                .map(|(a, b)| a - b)
                .collect();
            let err = o
                .block()
                .iter()
                .zip(&want)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-13, "depth-1 profile ({i}) err {err}");
        }
    }

    #[test]
    fn oracle_constant_path_vanishes() {
        let x = PiecewiseLinearPath::from_points(vec![vec![1.0, -1.0]; 3]).unwrap();
        for profile in [vec![1], vec![2, 1], vec![1, 1, 2]] {
            let o = iterated_integral_oracle(&x, &profile, 0.0, 2.0, 4).unwrap();
            assert_eq!(o.norm(), 0.0);
        }
        assert!(matches!(
            iterated_integral_oracle(&x, &[1, 1, 1, 1], 0.0, 2.0, 4),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn profile_enumeration_is_lexicographic() {
        assert_eq!(
            profiles(2, 2),
            vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]
        );
        assert_eq!(profiles(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn j_level_zero_and_one() {
        let x = l_path();
        let w = j_signature(&x, 1, 2, 0.0, 2.0).unwrap();
        assert_eq!(w.block(0).unwrap(), &[1.0]);
        // level 1 over W is the increment of the signature path: here s = 0,
        // so blocks 1, 2 of the signature packed in order.
        let g = signature(&x, 2).unwrap();
        let packed = w.block(1).unwrap();
        assert_eq!(&packed[0..2], g.tensor().block(1).unwrap());
        assert_eq!(&packed[2..6], g.tensor().block(2).unwrap());
    }

    #[test]
    fn w_norm_packs_profiles() {
        let x = l_path();
        let w = j_signature(&x, 2, 2, 0.0, 2.0).unwrap();
        // level-1 W-norm is ‖π_1‖ + ‖π_2‖ of the signature
        let g = signature(&x, 2).unwrap();
        let want = g.tensor().level_norm(1).unwrap() + g.tensor().level_norm(2).unwrap();
        assert!((w.w_norm(1).unwrap() - want).abs() < 1e-14);
        assert_eq!(w.w_dim(), 6);
    }

    #[test]
    fn w_space_points() {
        let g = signature(&l_path(), 3).unwrap();
        let p = WSpacePoint::from_tensor(g.tensor(), 2).unwrap();
        assert_eq!(p.block(1).unwrap(), g.tensor().block(1).unwrap());
        let want = g.tensor().level_norm(1).unwrap() + g.tensor().level_norm(2).unwrap();
        assert!((p.w_norm() - want).abs() < 1e-14);
        assert_eq!(p.sub(&p).unwrap().w_norm(), 0.0);
        assert!(p.block(3).is_err());
        assert!(WSpacePoint::from_tensor(g.tensor(), 4).is_err());
    }

    #[test]
    fn wtensor_serializes_with_wrapper() {
        let w = j_signature(&l_path(), 1, 2, 0.0, 2.0).unwrap();
        let v = serde_json::to_value(&w).unwrap();
        assert_eq!(v["wspace"]["inner_level"], 2);
        assert_eq!(v["wspace"]["outer_level"], 1);
        assert_eq!(v["tensor"]["dim"], 6);
    }
}
