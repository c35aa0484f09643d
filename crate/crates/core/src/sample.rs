//! Seeded random inputs. The fuzz command and the property/acceptance test
//! suites draw from the same generators, so a seed pins the whole corpus.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::path::{LinearMap, PiecewiseLinearPath, TimeMap};
use crate::rtree::{HeightInput, HeightedPoset};
use crate::tensor::{GroupElement, LieElement, TruncatedTensor};

/// A reproducible generator for the given seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random path with 1..=max_segments segments, breakpoints at 0, 1, 2, …
/// and coordinates uniform in [−1, 1].
pub fn random_path<R: Rng>(rng: &mut R, dim: usize, max_segments: usize) -> PiecewiseLinearPath {
    let segments = rng.random_range(1..=max_segments.max(1));
    let points = (0..=segments)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    PiecewiseLinearPath::from_points(points).expect("generated breakpoints are valid")
}

/// A non-decreasing piecewise-linear time change from [0, 1] onto
/// [t0, t1], with speed changes and (with probability ~1/2) a plateau.
pub fn random_time_map<R: Rng>(rng: &mut R, t0: f64, t1: f64) -> TimeMap {
    let interior = rng.random_range(1..=4usize);
    let mut times = vec![0.0];
    for _ in 0..interior {
        times.push(rng.random_range(0.05..0.95));
    }
    times.push(1.0);
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    times.dedup();

    let k = times.len();
    let mut values: Vec<f64> = (0..k - 2).map(|_| rng.random_range(0.0..=1.0)).collect();
    values.push(0.0);
    values.push(1.0);
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    if k >= 4 && rng.random_bool(0.5) {
        // flatten one interior step into a plateau
        let i = rng.random_range(1..k - 2);
        values[i + 1] = values[i];
    }
    let values = values.into_iter().map(|v| t0 + v * (t1 - t0)).collect();
    TimeMap::new(times, values).expect("generated map is non-decreasing")
}

/// A random linear map with entries uniform in [−1, 1].
pub fn random_linear_map<R: Rng>(rng: &mut R, out_dim: usize, in_dim: usize) -> LinearMap {
    let data = (0..out_dim * in_dim)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    LinearMap::new(out_dim, in_dim, data).expect("generated shape is valid")
}

/// A dense tensor with every coefficient uniform in [−scale, scale].
pub fn random_tensor<R: Rng>(rng: &mut R, dim: usize, level: usize, scale: f64) -> TruncatedTensor {
    let mut t = TruncatedTensor::zeros(dim, level).expect("desk-scale shape");
    for k in 0..=level {
        for x in t.block_mut(k).expect("level in range") {
            *x = rng.random_range(-scale..=scale);
        }
    }
    t
}

/// The signature of a random path: a group-like element by construction.
pub fn random_group_element<R: Rng>(
    rng: &mut R,
    dim: usize,
    level: usize,
    max_segments: usize,
) -> GroupElement {
    let path = random_path(rng, dim, max_segments);
    crate::path::signature(&path, level).expect("valid path")
}

/// log of a random signature: a Lie element (certified at 1e−9).
pub fn random_lie_element<R: Rng>(
    rng: &mut R,
    dim: usize,
    level: usize,
    max_segments: usize,
) -> LieElement {
    let g = random_group_element(rng, dim, level, max_segments);
    let l = g.tensor().log().expect("scalar part 1");
    LieElement::certify(l, 1e-9).expect("log of a signature is Lie")
}

/// The chordal (piecewise-linear interpolation) approximation of a curve,
/// sampled at `segments + 1` uniform parameter values over [t0, t1].
pub fn chordal<F: Fn(f64) -> Vec<f64>>(
    curve: F,
    t0: f64,
    t1: f64,
    segments: usize,
) -> PiecewiseLinearPath {
    let times: Vec<f64> = (0..=segments)
        .map(|i| t0 + (t1 - t0) * i as f64 / segments as f64)
        .collect();
    let points = times.iter().map(|&t| curve(t)).collect();
    PiecewiseLinearPath::new(times, points).expect("sampled curve is a valid path")
}

/// A random rooted tree with 2..=max_nodes nodes and strictly increasing
/// integer heights (exact in floating point).
pub fn random_tree<R: Rng>(rng: &mut R, max_nodes: usize) -> HeightedPoset {
    let n = rng.random_range(2..=max_nodes.max(2));
    let ids: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut parent = BTreeMap::new();
    let mut alpha = BTreeMap::new();
    let mut heights = vec![0u64; n];
    alpha.insert("n0".to_string(), HeightInput::Float(0.0));
    for i in 1..n {
        let p = rng.random_range(0..i);
        parent.insert(ids[i].clone(), ids[p].clone());
        heights[i] = heights[p] + rng.random_range(1..=10u64);
        alpha.insert(ids[i].clone(), HeightInput::Float(heights[i] as f64));
    }
    HeightedPoset::from_parent_map(ids, "n0", &parent, &alpha)
        .expect("generated tree is a valid poset")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_reproducible() {
        let mut a = seeded(7);
        let mut b = seeded(7);
        assert_eq!(random_path(&mut a, 3, 5), random_path(&mut b, 3, 5));
        assert_eq!(
            random_linear_map(&mut a, 2, 3),
            random_linear_map(&mut b, 2, 3)
        );
        let ta = random_tree(&mut a, 20);
        let tb = random_tree(&mut b, 20);
        assert_eq!(ta.ids(), tb.ids());
    }

    #[test]
    fn random_trees_validate() {
        let mut rng = seeded(11);
        for _ in 0..20 {
            let t = random_tree(&mut rng, 30);
            assert!(t.validate().ok);
        }
    }

    #[test]
    fn time_maps_are_onto() {
        let mut rng = seeded(3);
        for _ in 0..20 {
            let tm = random_time_map(&mut rng, 0.0, 2.0);
            assert_eq!(tm.value_range(), (0.0, 2.0));
        }
    }
}
