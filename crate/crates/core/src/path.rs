//! Piecewise-linear paths and their truncated signatures.
//!
//! The signature of a path is the Chen product of its segment exponentials:
//! S(x) = exp(Δx_1) ⊗ … ⊗ exp(Δx_m). Everything else here — reversal,
//! reparametrization, linear pushforward, subsignatures — is the machinery
//! whose interaction with that product the test suites certify.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::tensor::{GroupElement, TruncatedTensor};

/// A path given by breakpoints (t_i, x_i), linear in between. Duplicate
/// timestamps are accepted on input and collapsed to the last point during
/// normalization; afterwards times are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearPath {
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl PiecewiseLinearPath {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != points.len() {
            return Err(Error::domain(format!(
                "need equally many times and points, got {} and {}",
                times.len(),
                points.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::domain("points must have positive dimension"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::domain(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
        }
        if times.iter().any(|t| !t.is_finite()) || points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::domain("times and points must be finite"));
        }
        for w in times.windows(2) {
            if w[1] < w[0] {
                return Err(Error::domain(format!(
                    "times must be non-decreasing, got {} after {}",
                    w[1], w[0]
                )));
            }
        }
        // Collapse duplicate timestamps, keeping the last point.
        let mut nt: Vec<f64> = Vec::with_capacity(times.len());
        let mut np: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for (t, p) in times.into_iter().zip(points) {
            if let Some(&last) = nt.last() {
                if t == last {
                    *np.last_mut().expect("non-empty") = p;
                    continue;
                }
            }
            nt.push(t);
            np.push(p);
        }
        Ok(PiecewiseLinearPath {
            times: nt,
            points: np,
        })
    }

    /// Path with breakpoints at 0, 1, 2, … through the given points.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let times = (0..points.len()).map(|i| i as f64).collect();
        Self::new(times, points)
    }

    /// The single segment a → b on [0, 1].
    pub fn segment(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![a, b])
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn num_segments(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn segment_increment(&self, i: usize) -> Vec<f64> {
        self.points[i + 1]
            .iter()
            .zip(&self.points[i])
            .map(|(b, a)| b - a)
            .collect()
    }

    pub fn total_increment(&self) -> Vec<f64> {
        self.points
            .last()
            .expect("non-empty")
            .iter()
            .zip(&self.points[0])
            .map(|(b, a)| b - a)
            .collect()
    }

    /// Linear interpolation at time t.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let i = self.locate(t)?;
        if t == self.times[i] {
            return Ok(self.points[i].clone());
        }
        let lambda = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        Ok(self.points[i]
            .iter()
            .zip(&self.points[i + 1])
            .map(|(a, b)| a + lambda * (b - a))
            .collect())
    }

    /// Index i with t_i ≤ t ≤ t_{i+1} (clamped to the last segment at t_m).
    fn locate(&self, t: f64) -> Result<usize> {
        if t < self.start_time() || t > self.end_time() {
            return Err(Error::domain(format!(
                "time {t} outside [{}, {}]",
                self.start_time(),
                self.end_time()
            )));
        }
        if self.times.len() == 1 {
            return Ok(0);
        }
        let i = match self.times.partition_point(|&u| u <= t) {
            0 => 0,
            p => p - 1,
        };
        Ok(i.min(self.times.len().saturating_sub(2)))
    }

    /// Time reversal on the same interval: x ↦ (t ↦ x_{t0 + T − t}).
    pub fn reverse(&self) -> Self {
        let t0 = self.start_time();
        let tm = self.end_time();
        let times = self.times.iter().rev().map(|&t| t0 + tm - t).collect();
        let points = self.points.iter().rev().cloned().collect();
        PiecewiseLinearPath { times, points }
    }

    /// Concatenation: runs `self`, then `other`'s increments starting from
    /// `self`'s endpoint, with `other`'s clock shifted to follow.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::shape(format!(
                "cannot concatenate paths of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let shift_t = self.end_time() - other.start_time();
        let base = self.points.last().expect("non-empty");
        let mut times = self.times.clone();
        let mut points = self.points.clone();
        for (t, p) in other.times.iter().zip(&other.points).skip(1) {
            times.push(t + shift_t);
            points.push(
                base.iter()
                    .zip(p.iter().zip(&other.points[0]))
                    .map(|(b, (q, q0))| b + (q - q0))
                    .collect(),
            );
        }
        PiecewiseLinearPath::new(times, points)
    }

    /// Drops interior breakpoints with exactly zero spatial increment; the
    /// signature is unchanged. Constant runs keep their final time.
    pub fn without_zero_segments(&self) -> Self {
        let mut times: Vec<f64> = vec![self.times[0]];
        let mut points: Vec<Vec<f64>> = vec![self.points[0].clone()];
        for (t, p) in self.times.iter().zip(&self.points).skip(1) {
            if p == points.last().expect("non-empty") {
                *times.last_mut().expect("non-empty") = *t;
            } else {
                times.push(*t);
                points.push(p.clone());
            }
        }
        PiecewiseLinearPath { times, points }
    }

    /// Composes with a non-decreasing piecewise-linear time change and
    /// re-normalizes; flat stretches of σ collapse to zero increments which
    /// are then removed.
    pub fn reparametrize(&self, sigma: &TimeMap) -> Result<Self> {
        let (lo, hi) = sigma.value_range();
        if lo < self.start_time() || hi > self.end_time() {
            return Err(Error::domain(format!(
                "time map range [{lo}, {hi}] outside path domain [{}, {}]",
                self.start_time(),
                self.end_time()
            )));
        }
        let mut s_times: Vec<f64> = Vec::new();
        let mut t_times: Vec<f64> = Vec::new();
        for seg in 0..sigma.times.len() - 1 {
            let (s0, s1) = (sigma.times[seg], sigma.times[seg + 1]);
            let (a, b) = (sigma.values[seg], sigma.values[seg + 1]);
            s_times.push(s0);
            t_times.push(a);
            if b > a {
                // preimages of path breakpoints strictly inside (a, b)
                for &tau in &self.times {
                    if tau > a && tau < b {
                        s_times.push(s0 + (tau - a) / (b - a) * (s1 - s0));
                        t_times.push(tau);
                    }
                }
            }
        }
        s_times.push(*sigma.times.last().expect("non-empty"));
        t_times.push(*sigma.values.last().expect("non-empty"));

        let points = t_times
            .iter()
            .map(|&t| self.eval(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(PiecewiseLinearPath::new(s_times, points)?.without_zero_segments())
    }

    /// Applies a linear map to every breakpoint; times are kept.
    pub fn pushforward(&self, phi: &LinearMap) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| phi.apply(p))
            .collect::<Result<Vec<_>>>()?;
        PiecewiseLinearPath::new(self.times.clone(), points)
    }

    /// Total 1-variation Σ ‖Δx_i‖ over [s, t] (Euclidean segment lengths,
    /// partial segments clipped).
    pub fn one_variation(&self, s: f64, t: f64) -> Result<f64> {
        if s > t {
            return Err(Error::domain(format!("need s ≤ t, got s={s}, t={t}")));
        }
        self.locate(s)?;
        self.locate(t)?;
        let mut total = 0.0;
        for i in 0..self.num_segments() {
            let a = self.times[i].max(s);
            let b = self.times[i + 1].min(t);
            if b <= a {
                continue;
            }
            let frac = (b - a) / (self.times[i + 1] - self.times[i]);
            let len: f64 = self
                .segment_increment(i)
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            total += frac * len;
        }
        Ok(total)
    }

    /// Reads the CSV path format: header `t,x1,...,xd`, one row per
    /// breakpoint.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::input(format!("cannot read CSV header: {e}")))?
            .clone();
        if headers.is_empty() || headers[0] != *"t" {
            return Err(Error::Csv {
                row: 1,
                col: 1,
                msg: "header must start with 't'".to_string(),
            });
        }
        let dim = headers.len() - 1;
        if dim == 0 {
            return Err(Error::Csv {
                row: 1,
                col: 2,
                msg: "header must declare at least one coordinate column".to_string(),
            });
        }
        let mut times = Vec::new();
        let mut points = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let row = idx + 2; // header is row 1
            let record = record.map_err(|e| Error::Csv {
                row,
                col: 1,
                msg: e.to_string(),
            })?;
            if record.len() != dim + 1 {
                return Err(Error::Csv {
                    row,
                    col: record.len().min(dim + 1),
                    msg: format!("expected {} fields, got {}", dim + 1, record.len()),
                });
            }
            let parse = |col: usize| -> Result<f64> {
                record[col].parse::<f64>().map_err(|_| Error::Csv {
                    row,
                    col: col + 1,
                    msg: format!("cannot parse {:?} as a number", &record[col]),
                })
            };
            times.push(parse(0)?);
            let mut p = Vec::with_capacity(dim);
            for c in 1..=dim {
                p.push(parse(c)?);
            }
            points.push(p);
        }
        if times.is_empty() {
            return Err(Error::input("path file has no data rows"));
        }
        PiecewiseLinearPath::new(times, points)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<W> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        for i in 1..=self.dim() {
            header.push(format!("x{i}"));
        }
        let io_err = |e: csv::Error| Error::input(format!("cannot write CSV: {e}"));
        wtr.write_record(&header).map_err(io_err)?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let mut row = vec![t.to_string()];
            row.extend(p.iter().map(|x| x.to_string()));
            wtr.write_record(&row).map_err(io_err)?;
        }
        wtr.into_inner()
            .map_err(|e| Error::input(format!("cannot flush CSV: {e}")))
    }
}

/// S_N(x): the Chen product of segment exponentials, a group-like element
/// whose level-1 block is the total increment.
pub fn signature(x: &PiecewiseLinearPath, level: usize) -> Result<GroupElement> {
    if level < 1 {
        return Err(Error::domain("signature level must be at least 1"));
    }
    let mut acc = TruncatedTensor::unit(x.dim(), level)?;
    for i in 0..x.num_segments() {
        let inc = TruncatedTensor::from_vector(&x.segment_increment(i), level)?;
        acc = acc.mul(&inc.exp()?)?;
    }
    GroupElement::trusted(acc)
}

/// The running signature t ↦ S_N(x)_{0,t}, with checkpoints at breakpoints
/// and an evaluator for arbitrary times.
#[derive(Debug, Clone)]
pub struct SignaturePath {
    path: PiecewiseLinearPath,
    level: usize,
    checkpoints: Vec<TruncatedTensor>,
}

impl SignaturePath {
    pub fn new(path: PiecewiseLinearPath, level: usize) -> Result<Self> {
        if level < 1 {
            return Err(Error::domain("signature level must be at least 1"));
        }
        let mut checkpoints = Vec::with_capacity(path.times.len());
        let mut acc = TruncatedTensor::unit(path.dim(), level)?;
        checkpoints.push(acc.clone());
        for i in 0..path.num_segments() {
            let inc = TruncatedTensor::from_vector(&path.segment_increment(i), level)?;
            acc = acc.mul(&inc.exp()?)?;
            checkpoints.push(acc.clone());
        }
        Ok(SignaturePath {
            path,
            level,
            checkpoints,
        })
    }

    pub fn path(&self) -> &PiecewiseLinearPath {
        &self.path
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    /// S_{0,t} at an arbitrary time.
    pub fn at(&self, t: f64) -> Result<TruncatedTensor> {
        let i = self.path.locate(t)?;
        if t == self.path.times[i] {
            return Ok(self.checkpoints[i].clone());
        }
        let lambda = (t - self.path.times[i]) / (self.path.times[i + 1] - self.path.times[i]);
        let inc: Vec<f64> = self
            .path
            .segment_increment(i)
            .iter()
            .map(|x| lambda * x)
            .collect();
        let step = TruncatedTensor::from_vector(&inc, self.level)?.exp()?;
        self.checkpoints[i].mul(&step)
    }

    /// The full signature S_{0,T}.
    pub fn endpoint(&self) -> &TruncatedTensor {
        self.checkpoints.last().expect("non-empty")
    }

    /// The group increment S_{s,t} = S_{0,s}^{-1} ⊗ S_{0,t}; equals the
    /// signature of the path restricted to [s, t].
    pub fn increment(&self, s: f64, t: f64) -> Result<TruncatedTensor> {
        if s > t {
            return Err(Error::domain(format!("need s ≤ t, got s={s}, t={t}")));
        }
        self.at(s)?.inverse()?.mul(&self.at(t)?)
    }

    /// `increment` wrapped as a group element.
    pub fn subsignature(&self, s: f64, t: f64) -> Result<GroupElement> {
        GroupElement::trusted(self.increment(s, t)?)
    }
}

/// A continuous non-decreasing piecewise-linear time change σ, given by its
/// own breakpoints. Flat stretches (plateaus) are allowed; decreasing values
/// are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMap {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeMap {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::domain(
                "time map needs at least two matching breakpoints",
            ));
        }
        if times.iter().chain(values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::domain("time map entries must be finite"));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::domain("time map domain must be strictly increasing"));
            }
        }
        for w in values.windows(2) {
            if w[1] < w[0] {
                return Err(Error::domain(format!(
                    "time map must be non-decreasing, got {} after {}",
                    w[1], w[0]
                )));
            }
        }
        Ok(TimeMap { times, values })
    }

    pub fn identity(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![a, b])
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("non-empty"))
    }

    pub fn value_range(&self) -> (f64, f64) {
        (self.values[0], *self.values.last().expect("non-empty"))
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        let (a, b) = self.domain();
        if s < a || s > b {
            return Err(Error::domain(format!("time {s} outside [{a}, {b}]")));
        }
        let i = match self.times.partition_point(|&u| u <= s) {
            0 => 0,
            p => (p - 1).min(self.times.len() - 2),
        };
        if s == self.times[i] {
            return Ok(self.values[i]);
        }
        let lambda = (s - self.times[i]) / (self.times[i + 1] - self.times[i]);
        Ok(self.values[i] + lambda * (self.values[i + 1] - self.values[i]))
    }
}

/// A linear map R^in → R^out, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    out_dim: usize,
    in_dim: usize,
    data: Vec<f64>,
}

impl LinearMap {
    pub fn new(out_dim: usize, in_dim: usize, data: Vec<f64>) -> Result<Self> {
        if out_dim == 0 || in_dim == 0 {
            return Err(Error::domain("linear map dimensions must be positive"));
        }
        if data.len() != out_dim * in_dim {
            return Err(Error::shape(format!(
                "expected {} entries for a {out_dim}×{in_dim} map, got {}",
                out_dim * in_dim,
                data.len()
            )));
        }
        Ok(LinearMap {
            out_dim,
            in_dim,
            data,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        LinearMap {
            out_dim: dim,
            in_dim: dim,
            data,
        }
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.in_dim + col]
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.in_dim {
            return Err(Error::shape(format!(
                "vector of length {} fed to a {}×{} map",
                v.len(),
                self.out_dim,
                self.in_dim
            )));
        }
        Ok((0..self.out_dim)
            .map(|r| {
                v.iter()
                    .enumerate()
                    .map(|(c, x)| self.entry(r, c) * x)
                    .sum()
            })
            .collect())
    }
}

/// Extends Φ to the algebra homomorphism acting on each tensor slot:
/// Φ(w_1⊗…⊗w_k) = Φ(w_1)⊗…⊗Φ(w_k). Commutes with the product and with
/// taking signatures of pushed-forward paths.
pub fn tensor_pushforward(g: &TruncatedTensor, phi: &LinearMap) -> Result<TruncatedTensor> {
    if phi.in_dim != g.dim() {
        return Err(Error::shape(format!(
            "map expects dimension {}, tensor has {}",
            phi.in_dim,
            g.dim()
        )));
    }
    let d_in = phi.in_dim;
    let d_out = phi.out_dim;
    let mut out = TruncatedTensor::zeros(d_out, g.level())?;
    out.block_mut(0)?[0] = g.scalar();
    for k in 1..=g.level() {
        let mut cur = g.block(k)?.to_vec();
        for mode in 0..k {
            // current shape: d_out^mode × d_in × d_in^(k−mode−1)
            let pre = d_out.pow(mode as u32);
            let post = d_in.pow((k - mode - 1) as u32);
            let mut next = vec![0.0; pre * d_out * post];
            for p in 0..pre {
                for b in 0..d_out {
                    for a in 0..d_in {
                        let w = phi.entry(b, a);
                        if w == 0.0 {
                            continue;
                        }
                        let src = (p * d_in + a) * post;
                        let dst = (p * d_out + b) * post;
                        for q in 0..post {
                            next[dst + q] += w * cur[src + q];
                        }
                    }
                }
            }
            cur = next;
        }
        out.block_mut(k)?.copy_from_slice(&cur);
    }
    Ok(out)
}

/// A control in the rough-path sense: ω(s,t) = ‖x‖_{1-var;[s,t]}^p, which is
/// super-additive (ω(s,u) + ω(u,t) ≤ ω(s,t)), vanishes on the diagonal, and
/// is monotone under interval inclusion.
#[derive(Debug, Clone)]
pub struct Control {
    path: PiecewiseLinearPath,
    p: f64,
}

impl Control {
    pub fn one_variation(path: &PiecewiseLinearPath, p: f64) -> Result<Self> {
        if p < 1.0 {
            return Err(Error::domain(format!("exponent must be ≥ 1, got {p}")));
        }
        Ok(Control {
            path: path.clone(),
            p,
        })
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.path.one_variation(s, t)?.powf(self.p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rel_residual;
    use crate::words::{coeff, Word};

    fn l_path() -> PiecewiseLinearPath {
        PiecewiseLinearPath::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]])
            .unwrap()
    }

    #[test]
    fn constant_path_has_unit_signature() {
        let x = PiecewiseLinearPath::from_points(vec![vec![1.0, 2.0]; 4]).unwrap();
        let g = signature(&x, 3).unwrap();
        assert_eq!(g.tensor(), &TruncatedTensor::unit(2, 3).unwrap());
    }

    #[test]
    fn single_segment_signature_is_exponential() {
        let x = PiecewiseLinearPath::segment(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let g = signature(&x, 2).unwrap();
        assert_eq!(g.tensor().block(1).unwrap(), &[1.0, 2.0]);
        assert_eq!(g.tensor().block(2).unwrap(), &[0.5, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn l_path_level_two() {
        let g = signature(&l_path(), 2).unwrap();
        assert_eq!(g.tensor().block(2).unwrap(), &[0.5, 1.0, 0.0, 0.5]);
        assert_eq!(
            coeff(g.tensor(), &Word::parse("12", 2).unwrap()).unwrap(),
            1.0
        );
        assert_eq!(
            coeff(g.tensor(), &Word::parse("21", 2).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn shuffle_scaling_closed_form() {
        // For a single linear segment with increment a, ⟨S, w⟩ = Π a_{w_i}/|w|!.
        let a = [0.7, -1.3, 0.4];
        let x = PiecewiseLinearPath::segment(vec![0.0; 3], a.to_vec()).unwrap();
        let g = signature(&x, 4).unwrap();
        let w = Word::parse("3121", 3).unwrap();
        let expect = a[2] * a[0] * a[1] * a[0] / 24.0;
        assert!((coeff(g.tensor(), &w).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn normalization_collapses_duplicate_times() {
        let x = PiecewiseLinearPath::new(
            vec![0.0, 1.0, 1.0, 2.0],
            vec![vec![0.0], vec![0.5], vec![1.0], vec![2.0]],
        )
        .unwrap();
        assert_eq!(x.times(), &[0.0, 1.0, 2.0]);
        assert_eq!(x.points()[1], vec![1.0]); // last point wins
        assert!(PiecewiseLinearPath::new(vec![0.0, -1.0], vec![vec![0.0], vec![1.0]]).is_err());
    }

    #[test]
    fn reversal_round_trip_and_inverse() {
        let x = PiecewiseLinearPath::from_points(vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, -0.5, 0.25],
            vec![0.5, 1.0, -1.0],
            vec![2.0, 0.0, 0.5],
        ])
        .unwrap();
        assert_eq!(x.reverse().reverse(), x);

        let g = signature(&x, 4).unwrap();
        let h = signature(&x.reverse(), 4).unwrap();
        let prod = g.mul(&h).unwrap();
        let unit = TruncatedTensor::unit(3, 4).unwrap();
        assert!(rel_residual(prod.tensor(), &unit).unwrap() < 1e-13);
    }

    #[test]
    fn chen_identity_small() {
        let x = l_path();
        let y =
            PiecewiseLinearPath::from_points(vec![vec![0.0, 0.0], vec![-1.0, 0.5], vec![0.5, 0.5]])
                .unwrap();
        let xy = x.concat(&y).unwrap();
        let lhs = signature(&xy, 4).unwrap();
        let rhs = signature(&x, 4)
            .unwrap()
            .mul(&signature(&y, 4).unwrap())
            .unwrap();
        assert!(rel_residual(lhs.tensor(), rhs.tensor()).unwrap() < 1e-14);
    }

    #[test]
    fn signature_path_checkpoints_and_chen() {
        let sp = SignaturePath::new(l_path(), 3).unwrap();
        assert_eq!(sp.at(0.0).unwrap(), TruncatedTensor::unit(2, 3).unwrap());
        assert_eq!(sp.subsignature(0.0, 2.0).unwrap().tensor(), sp.endpoint());
        assert_eq!(
            sp.subsignature(0.7, 0.7).unwrap().tensor(),
            &TruncatedTensor::unit(2, 3).unwrap()
        );
        // multiplicativity over an interior point
        let a = sp.subsignature(0.2, 1.1).unwrap();
        let b = sp.subsignature(1.1, 1.9).unwrap();
        let c = sp.subsignature(0.2, 1.9).unwrap();
        assert!(rel_residual(a.mul(&b).unwrap().tensor(), c.tensor()).unwrap() < 1e-14);
        assert!(sp.at(-0.5).is_err());
        assert!(sp.increment(1.5, 0.5).is_err());
    }

    #[test]
    fn reparametrize_identity_and_speed() {
        let x = l_path();
        let id = TimeMap::identity(0.0, 2.0).unwrap();
        assert_eq!(x.reparametrize(&id).unwrap(), x);

        // doubling speed keeps the image and the signature
        let fast = TimeMap::new(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        let y = x.reparametrize(&fast).unwrap();
        assert_eq!(y.end_time(), 1.0);
        let d = signature(&y, 3)
            .unwrap()
            .distance(&signature(&x, 3).unwrap())
            .unwrap();
        assert!(d < 1e-14);
    }

    #[test]
    fn reparametrize_plateau_keeps_signature() {
        let x = PiecewiseLinearPath::from_points(vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.5, 2.0],
            vec![1.5, 1.0],
        ])
        .unwrap();
        let sigma = TimeMap::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.4, 1.4, 3.0]).unwrap();
        let y = x.reparametrize(&sigma).unwrap();
        let d = rel_residual(
            signature(&y, 4).unwrap().tensor(),
            signature(&x, 4).unwrap().tensor(),
        )
        .unwrap();
        assert!(d < 1e-13, "residual {d}");

        // decreasing σ is rejected
        assert!(TimeMap::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn pushforward_identity_zero_and_projection() {
        let x = l_path();
        let id = LinearMap::identity(2);
        assert_eq!(x.pushforward(&id).unwrap(), x);

        let zero = LinearMap::new(2, 2, vec![0.0; 4]).unwrap();
        let z = x.pushforward(&zero).unwrap();
        let g = signature(&z, 3).unwrap();
        assert_eq!(g.tensor(), &TruncatedTensor::unit(2, 3).unwrap());

        // projection onto the first coordinate
        let proj = LinearMap::new(1, 2, vec![1.0, 0.0]).unwrap();
        let g2 = signature(&x, 3).unwrap();
        let pushed = tensor_pushforward(g2.tensor(), &proj).unwrap();
        let w = Word::parse("111", 1).unwrap();
        assert_eq!(
            coeff(&pushed, &w).unwrap(),
            coeff(g2.tensor(), &Word::parse("111", 2).unwrap()).unwrap()
        );
    }

    #[test]
    fn tensor_pushforward_is_homomorphism() {
        let phi = LinearMap::new(2, 3, vec![0.5, -1.0, 0.25, 1.5, 0.0, -0.5]).unwrap();
        let a = signature(
            &PiecewiseLinearPath::from_points(vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.5, -0.5],
                vec![0.0, 1.0, 0.25],
            ])
            .unwrap(),
            3,
        )
        .unwrap();
        let b = signature(
            &PiecewiseLinearPath::from_points(vec![vec![0.0, 0.0, 0.0], vec![-0.5, 0.25, 1.0]])
                .unwrap(),
            3,
        )
        .unwrap();
        let lhs = tensor_pushforward(&a.tensor().mul(b.tensor()).unwrap(), &phi).unwrap();
        let rhs = tensor_pushforward(a.tensor(), &phi)
            .unwrap()
            .mul(&tensor_pushforward(b.tensor(), &phi).unwrap())
            .unwrap();
        assert!(rel_residual(&lhs, &rhs).unwrap() < 1e-14);
        assert!(x_shape_err(&phi));
    }

    fn x_shape_err(phi: &LinearMap) -> bool {
        let x = l_path(); // dimension 2, map expects 3
        x.pushforward(phi).is_err()
    }

    #[test]
    fn csv_round_trip_and_diagnostics() {
        let text = "t,x1,x2\n0,0,0\n1,1,0\n2,1,1\n";
        let x = PiecewiseLinearPath::read_csv(text.as_bytes()).unwrap();
        assert_eq!(x, l_path());

        let out = x.write_csv(Vec::new()).unwrap();
        let back = PiecewiseLinearPath::read_csv(out.as_slice()).unwrap();
        assert_eq!(back, x);

        let bad = "t,x1\n0,zero\n";
        match PiecewiseLinearPath::read_csv(bad.as_bytes()) {
            Err(Error::Csv { row, col, .. }) => {
                assert_eq!((row, col), (2, 2));
            }
            other => panic!("expected CSV error, got {other:?}"),
        }

        let empty = "t,x1\n";
        assert!(matches!(
            PiecewiseLinearPath::read_csv(empty.as_bytes()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn one_variation_control() {
        let x = l_path();
        let c = Control::one_variation(&x, 2.0).unwrap();
        assert_eq!(c.eval(1.0, 1.0).unwrap(), 0.0);
        // superadditive, additive at p = 1
        let c1 = Control::one_variation(&x, 1.0).unwrap();
        let whole = c1.eval(0.0, 2.0).unwrap();
        let split = c1.eval(0.0, 0.6).unwrap() + c1.eval(0.6, 2.0).unwrap();
        assert!((whole - split).abs() < 1e-12);
        assert!(
            c.eval(0.0, 0.6).unwrap() + c.eval(0.6, 2.0).unwrap()
                <= c.eval(0.0, 2.0).unwrap() + 1e-12
        );
        assert!(Control::one_variation(&x, 0.5).is_err());
    }
}
