//! Dense arithmetic in the truncated tensor algebra T^(N)(R^d).
//!
//! An element is stored as one coefficient block per level, block `k`
//! holding the d^k coefficients of V^{⊗k} in row-major multi-index order
//! (block 0 is the scalar part). The product is the graded Cauchy product
//! `(a⊗b)_k = Σ_j a_j ⊗ b_{k−j}`, and the per-level norm is Euclidean,
//! which is a cross norm (`‖a⊗b‖ = ‖a‖·‖b‖`) and permutation invariant on
//! elementary tensors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words;

/// Dense coefficients above this count are rejected; the representation is
/// deliberately desk-scale.
pub const MAX_TOP_BLOCK: u128 = 10_000_000;

/// Default tolerance for certification and identity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

fn block_len(dim: usize, k: usize) -> usize {
    dim.pow(k as u32)
}

fn check_capacity(dim: usize, level: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let top = (dim as u128).pow(level as u32);
    if top > MAX_TOP_BLOCK {
        return Err(Error::capacity(format!(
            "top block of T^({level})(R^{dim}) has {top} coefficients (limit {MAX_TOP_BLOCK})"
        )));
    }
    Ok(())
}

/// An element of the truncated tensor algebra T^(N)(R^d).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(try_from = "RawTensor")]
pub struct TruncatedTensor {
    dim: usize,
    level: usize,
    levels: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawTensor {
    dim: usize,
    level: usize,
    levels: Vec<Vec<f64>>,
}

impl TryFrom<RawTensor> for TruncatedTensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        TruncatedTensor::from_levels(raw.dim, raw.level, raw.levels)
    }
}

impl<'de> Deserialize<'de> for TruncatedTensor {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = RawTensor::deserialize(deserializer)?;
        TruncatedTensor::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl TruncatedTensor {
    /// The zero element of T^(N)(R^d).
    pub fn zeros(dim: usize, level: usize) -> Result<Self> {
        check_capacity(dim, level)?;
        let levels = (0..=level).map(|k| vec![0.0; block_len(dim, k)]).collect();
        Ok(TruncatedTensor { dim, level, levels })
    }

    /// The multiplicative unit (1, 0, …, 0).
    pub fn unit(dim: usize, level: usize) -> Result<Self> {
        let mut t = Self::zeros(dim, level)?;
        t.levels[0][0] = 1.0;
        Ok(t)
    }

    /// Builds a tensor from explicit per-level blocks, validating sizes.
    pub fn from_levels(dim: usize, level: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        check_capacity(dim, level)?;
        if levels.len() != level + 1 {
            return Err(Error::shape(format!(
                "expected {} blocks for level {level}, got {}",
                level + 1,
                levels.len()
            )));
        }
        for (k, block) in levels.iter().enumerate() {
            let want = block_len(dim, k);
            if block.len() != want {
                return Err(Error::shape(format!(
                    "block {k} must have {want} entries, got {}",
                    block.len()
                )));
            }
        }
        Ok(TruncatedTensor { dim, level, levels })
    }

    /// The basis letter e_i (1-based) embedded at level 1.
    pub fn basis_letter(dim: usize, level: usize, letter: usize) -> Result<Self> {
        if letter == 0 || letter > dim {
            return Err(Error::domain(format!(
                "letter {letter} out of range 1..={dim}"
            )));
        }
        if level < 1 {
            return Err(Error::domain("level must be at least 1 for a letter"));
        }
        let mut t = Self::zeros(dim, level)?;
        t.levels[1][letter - 1] = 1.0;
        Ok(t)
    }

    /// Embeds a vector of R^d at level 1 (scalar part 0).
    pub fn from_vector(v: &[f64], level: usize) -> Result<Self> {
        let mut t = Self::zeros(v.len(), level)?;
        if level >= 1 {
            t.levels[1].copy_from_slice(v);
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn scalar(&self) -> f64 {
        self.levels[0][0]
    }

    pub fn block(&self, k: usize) -> Result<&[f64]> {
        self.levels
            .get(k)
            .map(|b| b.as_slice())
            .ok_or_else(|| Error::domain(format!("level {k} out of range 0..={}", self.level)))
    }

    pub fn block_mut(&mut self, k: usize) -> Result<&mut [f64]> {
        let level = self.level;
        self.levels
            .get_mut(k)
            .map(|b| b.as_mut_slice())
            .ok_or_else(|| Error::domain(format!("level {k} out of range 0..={level}")))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.level != other.level {
            return Err(Error::shape(format!(
                "operands are T^({})(R^{}) and T^({})(R^{})",
                self.level, self.dim, other.level, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (ob, rb) in out.levels.iter_mut().zip(&other.levels) {
            for (o, r) in ob.iter_mut().zip(rb) {
                *o += r;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (ob, rb) in out.levels.iter_mut().zip(&other.levels) {
            for (o, r) in ob.iter_mut().zip(rb) {
                *o -= r;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for block in &mut out.levels {
            for x in block.iter_mut() {
                *x *= c;
            }
        }
        out
    }

    /// Dilation δ_λ: block k scaled by λ^k. Maps group-like elements to
    /// group-like elements (the signature of the spatially scaled path).
    pub fn dilate(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        let mut pow = 1.0;
        for block in out.levels.iter_mut().skip(1) {
            pow *= lambda;
            for x in block.iter_mut() {
                *x *= pow;
            }
        }
        out
    }

    /// Projection π^(n), re-truncating at `new_level`. Extends with zero
    /// blocks when `new_level` exceeds the current level.
    pub fn truncate(&self, new_level: usize) -> Result<Self> {
        check_capacity(self.dim, new_level)?;
        let mut levels = Vec::with_capacity(new_level + 1);
        for k in 0..=new_level {
            if k <= self.level {
                levels.push(self.levels[k].clone());
            } else {
                levels.push(vec![0.0; block_len(self.dim, k)]);
            }
        }
        Ok(TruncatedTensor {
            dim: self.dim,
            level: new_level,
            levels,
        })
    }

    /// Graded Cauchy product: result block k = Σ_{j=0}^{k} a_j ⊗ b_{k−j},
    /// each term the row-major flattened outer product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = Self::zeros(self.dim, self.level)?;
        for k in 0..=self.level {
            let dst = &mut out.levels[k];
            for j in 0..=k {
                let a = &self.levels[j];
                let b = &other.levels[k - j];
                let bn = b.len();
                for (ia, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    let base = ia * bn;
                    for (ib, &bv) in b.iter().enumerate() {
                        dst[base + ib] += av * bv;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Neumann-series inverse of an element with scalar part 1:
    /// g^{-1} = Σ_{j=0}^{N} (−1)^j (g−1)^{⊗j}.
    pub fn inverse(&self) -> Result<Self> {
        if self.scalar() != 1.0 {
            return Err(Error::domain(format!(
                "not invertible in the group: scalar part is {}, expected 1",
                self.scalar()
            )));
        }
        let mut r = self.clone();
        r.levels[0][0] = 0.0;
        let mut inv = Self::unit(self.dim, self.level)?;
        let mut pow = Self::unit(self.dim, self.level)?;
        let mut sign = 1.0;
        for _ in 1..=self.level {
            pow = pow.mul(&r)?;
            sign = -sign;
            inv = inv.add(&pow.scale(sign))?;
        }
        Ok(inv)
    }

    /// exp(l) = π^(N)(Σ_{j=0}^{N} l^{⊗j}/j!) for l with scalar part 0,
    /// evaluated in Horner form.
    pub fn exp(&self) -> Result<Self> {
        if self.scalar() != 0.0 {
            return Err(Error::domain(format!(
                "exp requires scalar part 0, got {}",
                self.scalar()
            )));
        }
        let mut acc = Self::unit(self.dim, self.level)?;
        for j in (1..=self.level).rev() {
            acc = self.scale(1.0 / j as f64).mul(&acc)?;
            acc.levels[0][0] += 1.0;
        }
        Ok(acc)
    }

    /// log(1+g) = π^(N)(Σ_{k=1}^{N} (−1)^{k+1} g^{⊗k}/k) for elements with
    /// scalar part 1.
    pub fn log(&self) -> Result<Self> {
        if self.scalar() != 1.0 {
            return Err(Error::domain(format!(
                "log requires scalar part 1, got {}",
                self.scalar()
            )));
        }
        let mut r = self.clone();
        r.levels[0][0] = 0.0;
        let mut acc = Self::zeros(self.dim, self.level)?;
        let mut pow = Self::unit(self.dim, self.level)?;
        let mut sign = -1.0;
        for k in 1..=self.level {
            pow = pow.mul(&r)?;
            sign = -sign;
            acc = acc.add(&pow.scale(sign / k as f64))?;
        }
        Ok(acc)
    }

    /// Antipode: block k maps to (−1)^k times the block with every
    /// multi-index reversed. Inverts group-like elements level by level.
    pub fn antipode(&self) -> Self {
        let mut out = self.clone();
        for k in 2..=self.level {
            let src = &self.levels[k];
            let dst = &mut out.levels[k];
            for (off, &v) in src.iter().enumerate() {
                dst[reverse_index(off, self.dim, k)] = v;
            }
        }
        for k in (1..=self.level).step_by(2) {
            for x in out.levels[k].iter_mut() {
                *x = -*x;
            }
        }
        out
    }

    /// Euclidean norm of the level-k block.
    pub fn level_norm(&self, k: usize) -> Result<f64> {
        let block = self.block(k)?;
        Ok(block.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    /// max_{1≤k≤N} ‖π_k(·)‖^{1/k}; zero when N = 0 or all levels vanish.
    pub fn homogeneous_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for k in 1..=self.level {
            let n = self.levels[k].iter().map(|x| x * x).sum::<f64>().sqrt();
            best = best.max(n.powf(1.0 / k as f64));
        }
        best
    }

    /// Largest absolute coefficient across all levels.
    pub fn max_abs(&self) -> f64 {
        self.levels
            .iter()
            .flat_map(|b| b.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Reverses the digits of a row-major multi-index of length `k` over `dim`.
fn reverse_index(offset: usize, dim: usize, k: usize) -> usize {
    let mut rem = offset;
    let mut rev = 0;
    for _ in 0..k {
        rev = rev * dim + rem % dim;
        rem /= dim;
    }
    rev
}

/// d(a,b) = ‖a^{-1} ⊗ b‖ with the homogeneous norm; symmetric on group-like
/// elements because the norm is antipode-invariant.
pub fn group_distance(a: &TruncatedTensor, b: &TruncatedTensor) -> Result<f64> {
    a.check_same_shape(b)?;
    Ok(a.inverse()?.mul(b)?.homogeneous_norm())
}

/// Per-level relative residual max_k ‖π_k(a−b)‖ / (1 + ‖π_k(b)‖).
pub fn rel_residual(a: &TruncatedTensor, b: &TruncatedTensor) -> Result<f64> {
    a.check_same_shape(b)?;
    let mut worst = 0.0f64;
    for k in 0..=a.level() {
        let diff: f64 = a.levels[k]
            .iter()
            .zip(&b.levels[k])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let scale = 1.0 + b.level_norm(k)?;
        worst = worst.max(diff / scale);
    }
    Ok(worst)
}

/// A truncated tensor certified (or trusted) to be group-like: scalar part 1
/// and the shuffle identity ⟨g,u⟩⟨g,v⟩ = ⟨g, u ш v⟩ within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    tensor: TruncatedTensor,
    certified: bool,
}

impl GroupElement {
    /// Runs the shuffle criterion at `tol` and wraps the tensor on success.
    pub fn certify(tensor: TruncatedTensor, tol: f64) -> Result<Self> {
        if tensor.scalar() != 1.0 {
            return Err(Error::domain(format!(
                "group element must have scalar part 1, got {}",
                tensor.scalar()
            )));
        }
        let report = words::group_like_report(&tensor);
        if report.worst_residual > tol {
            return Err(Error::domain(format!(
                "shuffle identity violated: residual {:.3e} exceeds tolerance {:.1e}{}",
                report.worst_residual,
                tol,
                report
                    .witness
                    .as_ref()
                    .map(|(u, v)| format!(" (witness u={u}, v={v})"))
                    .unwrap_or_default()
            )));
        }
        Ok(GroupElement {
            tensor,
            certified: true,
        })
    }

    /// Wraps an element that is group-like by construction (e.g. a Chen
    /// product of segment exponentials) without running the shuffle check.
    pub fn trusted(tensor: TruncatedTensor) -> Result<Self> {
        if tensor.scalar() != 1.0 {
            return Err(Error::domain(format!(
                "group element must have scalar part 1, got {}",
                tensor.scalar()
            )));
        }
        Ok(GroupElement {
            tensor,
            certified: false,
        })
    }

    pub fn tensor(&self) -> &TruncatedTensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> TruncatedTensor {
        self.tensor
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn level(&self) -> usize {
        self.tensor.level()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        GroupElement::trusted(self.tensor.mul(&other.tensor)?)
    }

    pub fn inverse(&self) -> Self {
        GroupElement {
            tensor: self.tensor.inverse().expect("scalar part is 1"),
            certified: self.certified,
        }
    }

    pub fn homogeneous_norm(&self) -> f64 {
        self.tensor.homogeneous_norm()
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        group_distance(&self.tensor, &other.tensor)
    }
}

/// A truncated tensor with scalar part 0 passing Ree's criterion:
/// ⟨l, u ш v⟩ = 0 for all non-empty words u, v.
#[derive(Debug, Clone, PartialEq)]
pub struct LieElement {
    tensor: TruncatedTensor,
}

impl LieElement {
    pub fn certify(tensor: TruncatedTensor, tol: f64) -> Result<Self> {
        if tensor.scalar() != 0.0 {
            return Err(Error::domain(format!(
                "Lie element must have scalar part 0, got {}",
                tensor.scalar()
            )));
        }
        let report = words::lie_shuffle_report(&tensor);
        if report.worst_residual > tol {
            return Err(Error::domain(format!(
                "shuffle components do not vanish: residual {:.3e} exceeds tolerance {:.1e}",
                report.worst_residual, tol
            )));
        }
        Ok(LieElement { tensor })
    }

    pub fn tensor(&self) -> &TruncatedTensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> TruncatedTensor {
        self.tensor
    }

    pub fn exp(&self) -> GroupElement {
        GroupElement {
            tensor: self.tensor.exp().expect("scalar part is 0"),
            certified: false,
        }
    }
}
