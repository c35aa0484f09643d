//! Heighted partially ordered sets and the tree metric they induce.
//!
//! A finite poset with a least element, chain down-sets, unique maximal
//! common lower bounds (meets), and a strictly increasing height α carries
//! the metric d(τ1,τ2) = α(τ1) + α(τ2) − 2α(τ1∧τ2). This module validates
//! the four conditions with witnesses, and certifies the metric: triangle
//! inequality, the zero-hyperbolicity inequality
//! α(τ1∧τ2) ≥ min(α(τ1∧τ3), α(τ2∧τ3)), the Gromov-product reformulation,
//! and the four-point condition, all by exhaustive scan.
//!
//! Heights are kept as exact rationals (every finite float converts
//! exactly); bulk scans run on float mirrors with a 1e−12 relative
//! tolerance, so integer heights certify with zero slack.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Height {
    exact: BigRational,
    approx: f64,
}

impl Height {
    fn from_f64(x: f64) -> Result<Self> {
        let exact = BigRational::from_float(x)
            .ok_or_else(|| Error::input(format!("height {x} is not finite")))?;
        Ok(Height { exact, approx: x })
    }

    fn from_str(s: &str) -> Result<Self> {
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("bad rational numerator in {s:?}")))?;
            let q: BigInt = q
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("bad rational denominator in {s:?}")))?;
            if q.is_zero() {
                return Err(Error::input(format!("zero denominator in {s:?}")));
            }
            let exact = BigRational::new(p, q);
            let approx = exact.to_f64().unwrap_or(f64::NAN);
            Ok(Height { exact, approx })
        } else {
            let x: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("cannot parse height {s:?}")))?;
            Height::from_f64(x)
        }
    }

    fn lt(&self, other: &Self) -> bool {
        let gap = other.approx - self.approx;
        let eps = 1e-9 * (1.0 + self.approx.abs() + other.approx.abs());
        if gap.abs() > eps {
            gap > 0.0
        } else {
            self.exact < other.exact
        }
    }

    fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }
}

type Bitset = Vec<u64>;

fn bit_get(b: &Bitset, i: usize) -> bool {
    b[i / 64] & (1 << (i % 64)) != 0
}

fn bit_set(b: &mut Bitset, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

/// A finite heighted poset with a declared root, the order stored as its
/// reflexive-transitive closure.
#[derive(Debug, Clone)]
pub struct HeightedPoset {
    ids: Vec<String>,
    root: usize,
    /// below[i]: bitset of {k : k ⪯ i}, reflexive.
    below: Vec<Bitset>,
    /// above[i]: bitset of {k : i ⪯ k}, the transpose of `below`.
    above: Vec<Bitset>,
    alpha: Vec<Height>,
}

/// Height input: a float (converted exactly) or a "p/q" string.
#[derive(Debug, Clone)]
pub enum HeightInput {
    Float(f64),
    Rational(String),
}

impl HeightedPoset {
    /// Builds from the canonical parent-map form: `parent[child] = parent`,
    /// meaning parent ⪯ child; the root has no entry.
    pub fn from_parent_map(
        nodes: Vec<String>,
        root: &str,
        parent: &BTreeMap<String, String>,
        alpha: &BTreeMap<String, HeightInput>,
    ) -> Result<Self> {
        let (ids, index) = index_nodes(nodes)?;
        let mut pairs = Vec::with_capacity(parent.len());
        for (child, par) in parent {
            let c = lookup(&index, child)?;
            let p = lookup(&index, par)?;
            pairs.push((p, c));
        }
        Self::build(ids, &index, root, pairs, alpha)
    }

    /// Builds from explicit relation pairs (a ⪯ b); the reflexive-transitive
    /// closure is taken and antisymmetry of the closure is required.
    pub fn from_relation(
        nodes: Vec<String>,
        root: &str,
        relation: &[(String, String)],
        alpha: &BTreeMap<String, HeightInput>,
    ) -> Result<Self> {
        let (ids, index) = index_nodes(nodes)?;
        let mut pairs = Vec::with_capacity(relation.len());
        for (a, b) in relation {
            pairs.push((lookup(&index, a)?, lookup(&index, b)?));
        }
        Self::build(ids, &index, root, pairs, alpha)
    }

    fn build(
        ids: Vec<String>,
        index: &BTreeMap<String, usize>,
        root: &str,
        pairs: Vec<(usize, usize)>,
        alpha: &BTreeMap<String, HeightInput>,
    ) -> Result<Self> {
        let n = ids.len();
        let words = n.div_ceil(64);
        let root = lookup(index, root)?;

        // closure: below[i] as bitset, seeded reflexive plus the given pairs
        let mut below: Vec<Bitset> = (0..n)
            .map(|i| {
                let mut b = vec![0u64; words];
                bit_set(&mut b, i);
                b
            })
            .collect();
        for &(lo, hi) in &pairs {
            bit_set(&mut below[hi], lo);
        }
        // Warshall over the "below" rows
        for k in 0..n {
            for i in 0..n {
                if i != k && bit_get(&below[i], k) {
                    let (head, tail) = if k < i {
                        let (a, b) = below.split_at_mut(i);
                        (&a[k], &mut b[0])
                    } else {
                        let (a, b) = below.split_at_mut(k);
                        (&b[0], &mut a[i])
                    };
                    for (dst, src) in tail.iter_mut().zip(head) {
                        *dst |= src;
                    }
                }
            }
        }
        // antisymmetry of the closure
        for i in 0..n {
            for j in 0..n {
                if i != j && bit_get(&below[i], j) && bit_get(&below[j], i) {
                    return Err(Error::input(format!(
                        "order relation has a cycle through {:?} and {:?}",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        let mut above: Vec<Bitset> = vec![vec![0u64; words]; n];
        for (i, row) in below.iter().enumerate() {
            for (k, up) in above.iter_mut().enumerate() {
                if bit_get(row, k) {
                    bit_set(up, i);
                }
            }
        }

        let mut heights = Vec::with_capacity(n);
        for id in &ids {
            let h = alpha
                .get(id)
                .ok_or_else(|| Error::input(format!("missing height for node {id:?}")))?;
            heights.push(match h {
                HeightInput::Float(x) => Height::from_f64(*x)?,
                HeightInput::Rational(s) => Height::from_str(s)?,
            });
        }

        Ok(HeightedPoset {
            ids,
            root,
            below,
            above,
            alpha: heights,
        })
    }

    /// Parses the JSON poset format:
    /// `{"nodes": [...], "root": id, "parent": {id: id}, "alpha": {id: num}}`,
    /// with an optional `"relation": [[lo, hi], ...]` in place of (or in
    /// addition to) the parent map; when both are present they must agree.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::input(format!("bad poset JSON: {e}")))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::input("poset JSON must be an object"))?;
        let nodes: Vec<String> = obj
            .get("nodes")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::input("poset JSON needs a \"nodes\" array"))?
            .iter()
            .map(id_string)
            .collect::<Result<_>>()?;
        let root = id_string(
            obj.get("root")
                .ok_or_else(|| Error::input("poset JSON needs a \"root\""))?,
        )?;
        let alpha_obj = obj
            .get("alpha")
            .and_then(|x| x.as_object())
            .ok_or_else(|| Error::input("poset JSON needs an \"alpha\" object"))?;
        let mut alpha = BTreeMap::new();
        for (k, val) in alpha_obj {
            let h = match val {
                serde_json::Value::Number(x) => HeightInput::Float(
                    x.as_f64()
                        .ok_or_else(|| Error::input(format!("bad height for {k:?}")))?,
                ),
                serde_json::Value::String(s) => HeightInput::Rational(s.clone()),
                _ => return Err(Error::input(format!("bad height for {k:?}"))),
            };
            alpha.insert(k.clone(), h);
        }

        let parent_map = match obj.get("parent") {
            None => None,
            Some(p) => {
                let p = p
                    .as_object()
                    .ok_or_else(|| Error::input("\"parent\" must be an object"))?;
                let mut m = BTreeMap::new();
                for (child, par) in p {
                    m.insert(child.clone(), id_string(par)?);
                }
                Some(m)
            }
        };
        let relation = match obj.get("relation") {
            None => None,
            Some(r) => {
                let r = r
                    .as_array()
                    .ok_or_else(|| Error::input("\"relation\" must be an array of pairs"))?;
                let mut pairs = Vec::with_capacity(r.len());
                for entry in r {
                    let pair = entry
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| Error::input("relation entries must be [lo, hi] pairs"))?;
                    pairs.push((id_string(&pair[0])?, id_string(&pair[1])?));
                }
                Some(pairs)
            }
        };

        match (parent_map, relation) {
            (Some(p), None) => Self::from_parent_map(nodes, &root, &p, &alpha),
            (None, Some(r)) => Self::from_relation(nodes, &root, &r, &alpha),
            (Some(p), Some(r)) => {
                let a = Self::from_parent_map(nodes.clone(), &root, &p, &alpha)?;
                let b = Self::from_relation(nodes, &root, &r, &alpha)?;
                if a.below != b.below {
                    return Err(Error::input(
                        "parent map and relation describe different orders",
                    ));
                }
                Ok(a)
            }
            (None, None) => Err(Error::input(
                "poset JSON needs a \"parent\" map or a \"relation\" list",
            )),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn alpha_f64(&self, i: usize) -> f64 {
        self.alpha[i].approx
    }

    fn is_le(&self, a: usize, b: usize) -> bool {
        bit_get(&self.below[b], a)
    }

    /// Checks the four conditions exhaustively and reports every violation
    /// with a witness; the report's first entry is the lowest-numbered
    /// violated condition.
    pub fn validate(&self) -> ValidationReport {
        let n = self.len();
        let mut violations = Vec::new();

        // 1: the declared root is a least element.
        for i in 0..n {
            if !self.is_le(self.root, i) {
                violations.push(Violation {
                    condition: 1,
                    witness: vec![self.ids[self.root].clone(), self.ids[i].clone()],
                    detail: format!(
                        "root {:?} is not below {:?}",
                        self.ids[self.root], self.ids[i]
                    ),
                });
                break;
            }
        }

        // 2: every down-set is totally ordered.
        'cond2: for i in 0..n {
            let down = &self.below[i];
            for a in 0..n {
                if !bit_get(down, a) {
                    continue;
                }
                // elements of the down-set incomparable to a
                for (w, &dw) in down.iter().enumerate() {
                    let x = dw & !self.above[a][w] & !self.below[a][w];
                    if x != 0 {
                        let b = w * 64 + x.trailing_zeros() as usize;
                        violations.push(Violation {
                            condition: 2,
                            witness: vec![
                                self.ids[i].clone(),
                                self.ids[a].clone(),
                                self.ids[b].clone(),
                            ],
                            detail: format!(
                                "down-set of {:?} contains the incomparable pair {:?}, {:?}",
                                self.ids[i], self.ids[a], self.ids[b]
                            ),
                        });
                        break 'cond2;
                    }
                }
            }
        }

        // 3: every pair has a unique maximal common lower bound.
        'cond3: for i in 0..n {
            for j in i..n {
                let maximal = self.maximal_common_lower_bounds(i, j);
                if maximal.len() != 1 {
                    let mut witness = vec![self.ids[i].clone(), self.ids[j].clone()];
                    witness.extend(maximal.iter().map(|&k| self.ids[k].clone()));
                    violations.push(Violation {
                        condition: 3,
                        detail: format!(
                            "pair {:?}, {:?} has {} maximal common lower bounds",
                            self.ids[i],
                            self.ids[j],
                            maximal.len()
                        ),
                        witness,
                    });
                    break 'cond3;
                }
            }
        }

        // 4: α(root) = 0 and α strictly increasing along the order.
        if !self.alpha[self.root].is_zero() {
            violations.push(Violation {
                condition: 4,
                witness: vec![self.ids[self.root].clone()],
                detail: format!("α(root) = {} instead of 0", self.alpha[self.root].approx),
            });
        } else {
            'cond4: for a in 0..n {
                for b in 0..n {
                    if a != b && self.is_le(a, b) && !self.alpha[a].lt(&self.alpha[b]) {
                        violations.push(Violation {
                            condition: 4,
                            witness: vec![self.ids[a].clone(), self.ids[b].clone()],
                            detail: format!(
                                "α is not strictly increasing: α({:?}) = {}, α({:?}) = {}",
                                self.ids[a],
                                self.alpha[a].approx,
                                self.ids[b],
                                self.alpha[b].approx
                            ),
                        });
                        break 'cond4;
                    }
                }
            }
        }

        violations.sort_by_key(|v| v.condition);
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    fn maximal_common_lower_bounds(&self, i: usize, j: usize) -> Vec<usize> {
        let words = self.below[0].len();
        let common: Bitset = (0..words)
            .map(|w| self.below[i][w] & self.below[j][w])
            .collect();
        let mut maximal = Vec::new();
        for k in 0..self.len() {
            if !bit_get(&common, k) {
                continue;
            }
            // maximal iff nothing else in the common set lies above k
            let alone = (0..words).all(|w| {
                let mut x = common[w] & self.above[k][w];
                if w == k / 64 {
                    x &= !(1u64 << (k % 64));
                }
                x == 0
            });
            if alone {
                maximal.push(k);
            }
        }
        maximal
    }

    /// Validates and precomputes meet and distance tables.
    pub fn certify(&self) -> Result<CertifiedPoset> {
        if self.len() > MAX_TRIPLE_SCAN_NODES {
            return Err(Error::capacity(format!(
                "poset has {} nodes; exhaustive certification is capped at {MAX_TRIPLE_SCAN_NODES}",
                self.len()
            )));
        }
        let report = self.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::domain(format!(
                "poset fails condition {}: {}",
                v.condition, v.detail
            )));
        }
        let n = self.len();
        let mut meet = vec![0usize; n * n];
        for i in 0..n {
            for j in 0..n {
                let m = self.maximal_common_lower_bounds(i, j);
                debug_assert_eq!(m.len(), 1);
                meet[i * n + j] = m[0];
            }
        }
        let mut dist = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                let m = meet[i * n + j];
                dist[i * n + j] =
                    self.alpha[i].approx + self.alpha[j].approx - 2.0 * self.alpha[m].approx;
            }
        }
        Ok(CertifiedPoset {
            poset: self.clone(),
            meet,
            dist,
        })
    }
}

fn index_nodes(nodes: Vec<String>) -> Result<(Vec<String>, BTreeMap<String, usize>)> {
    if nodes.is_empty() {
        return Err(Error::input("poset must have at least one node"));
    }
    let mut index = BTreeMap::new();
    for (i, id) in nodes.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::input(format!("duplicate node id {id:?}")));
        }
    }
    Ok((nodes, index))
}

fn lookup(index: &BTreeMap<String, usize>, id: &str) -> Result<usize> {
    index
        .get(id)
        .copied()
        .ok_or_else(|| Error::input(format!("unknown node id {id:?}")))
}

fn id_string(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        _ => Err(Error::input(format!(
            "node ids must be strings or numbers, got {v}"
        ))),
    }
}

/// One violated condition with a witness (node ids).
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub condition: u8,
    pub witness: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn first_violated_condition(&self) -> Option<u8> {
        self.violations.first().map(|v| v.condition)
    }

    pub fn violates(&self, condition: u8) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

/// Result of an exhaustive metric scan: `worst` is the largest violation
/// amount found (≤ 0 means the inequality held everywhere).
#[derive(Debug, Clone, Serialize)]
pub struct MetricScan {
    pub ok: bool,
    pub worst: f64,
    pub witness: Option<Vec<String>>,
}

/// Exhaustive scans are cubic or quartic in the node count; beyond these
/// sizes they are rejected with a capacity error.
pub const MAX_TRIPLE_SCAN_NODES: usize = 1000;
pub const MAX_QUAD_SCAN_NODES: usize = 400;

/// A validated poset with meet and distance tables.
#[derive(Debug, Clone)]
pub struct CertifiedPoset {
    poset: HeightedPoset,
    meet: Vec<usize>,
    dist: Vec<f64>,
}

impl CertifiedPoset {
    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poset.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        self.poset.ids()
    }

    pub fn poset(&self) -> &HeightedPoset {
        &self.poset
    }

    fn idx(&self, id: &str) -> Result<usize> {
        self.poset
            .ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::input(format!("unknown node id {id:?}")))
    }

    pub fn meet_idx(&self, i: usize, j: usize) -> usize {
        self.meet[i * self.len() + j]
    }

    pub fn meet(&self, a: &str, b: &str) -> Result<&str> {
        let m = self.meet_idx(self.idx(a)?, self.idx(b)?);
        Ok(&self.poset.ids[m])
    }

    pub fn distance_idx(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn distance(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.distance_idx(self.idx(a)?, self.idx(b)?))
    }

    /// d(τ1,τ2) = α(τ1) + α(τ2) − 2α(τ1∧τ2) in exact rational arithmetic.
    pub fn distance_exact(&self, i: usize, j: usize) -> BigRational {
        let m = self.meet_idx(i, j);
        let two = BigRational::from_integer(BigInt::from(2));
        &self.poset.alpha[i].exact + &self.poset.alpha[j].exact - two * &self.poset.alpha[m].exact
    }

    fn tol(&self, tol: f64) -> f64 {
        let scale = self.dist.iter().fold(0.0f64, |m, &d| m.max(d.abs()));
        tol * (1.0 + scale)
    }

    /// d(x,z) ≤ d(x,y) + d(y,z) over all triples.
    pub fn check_triangle(&self, tol: f64) -> MetricScan {
        let n = self.len();
        let eps = self.tol(tol);
        let mut worst = f64::NEG_INFINITY;
        let mut witness = None;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let slack =
                        self.distance_idx(x, z) - self.distance_idx(x, y) - self.distance_idx(y, z);
                    if slack > worst {
                        worst = slack;
                        witness = Some(vec![
                            self.poset.ids[x].clone(),
                            self.poset.ids[y].clone(),
                            self.poset.ids[z].clone(),
                        ]);
                    }
                }
            }
        }
        MetricScan {
            ok: worst <= eps,
            worst,
            witness,
        }
    }

    /// α(τ1∧τ2) ≥ min(α(τ1∧τ3), α(τ2∧τ3)) over all triples, plus the
    /// Gromov-product identity (τ1·τ2)_v = α(τ1∧τ2) over all pairs.
    pub fn check_zero_hyperbolic(&self, tol: f64) -> (MetricScan, MetricScan) {
        let n = self.len();
        let a: Vec<f64> = (0..n).map(|i| self.poset.alpha_f64(i)).collect();
        let eps = self.tol(tol);
        let mut worst = f64::NEG_INFINITY;
        let mut witness = None;
        for t1 in 0..n {
            for t2 in 0..n {
                let a12 = a[self.meet_idx(t1, t2)];
                for t3 in 0..n {
                    let a13 = a[self.meet_idx(t1, t3)];
                    let a23 = a[self.meet_idx(t2, t3)];
                    let slack = a13.min(a23) - a12;
                    if slack > worst {
                        worst = slack;
                        witness = Some(vec![
                            self.poset.ids[t1].clone(),
                            self.poset.ids[t2].clone(),
                            self.poset.ids[t3].clone(),
                        ]);
                    }
                }
            }
        }
        let hyperbolic = MetricScan {
            ok: worst <= eps,
            worst,
            witness,
        };

        let root = self.poset.root;
        let mut gworst = f64::NEG_INFINITY;
        let mut gwitness = None;
        for x in 0..n {
            for y in 0..n {
                let product = 0.5
                    * (self.distance_idx(root, x) + self.distance_idx(root, y)
                        - self.distance_idx(x, y));
                let slack = (product - a[self.meet_idx(x, y)]).abs();
                if slack > gworst {
                    gworst = slack;
                    gwitness = Some(vec![self.poset.ids[x].clone(), self.poset.ids[y].clone()]);
                }
            }
        }
        let gromov = MetricScan {
            ok: gworst <= eps,
            worst: gworst,
            witness: gwitness,
        };
        (hyperbolic, gromov)
    }

    /// Four-point condition over all quadruples of distinct nodes: of the
    /// three pairing sums, the largest may not exceed the second largest.
    /// Quadruples with repeats reduce to the triangle inequality.
    pub fn check_four_point(&self, tol: f64) -> Result<MetricScan> {
        let n = self.len();
        if n > MAX_QUAD_SCAN_NODES {
            return Err(Error::capacity(format!(
                "poset has {n} nodes; the quadruple scan is capped at {MAX_QUAD_SCAN_NODES}"
            )));
        }
        let eps = self.tol(tol);
        let mut worst = f64::NEG_INFINITY;
        let mut witness = None;
        for x in 0..n {
            for y in (x + 1)..n {
                let dxy = self.distance_idx(x, y);
                for z in (y + 1)..n {
                    let dxz = self.distance_idx(x, z);
                    let dyz = self.distance_idx(y, z);
                    for w in (z + 1)..n {
                        let s1 = dxy + self.distance_idx(z, w);
                        let s2 = dxz + self.distance_idx(y, w);
                        let s3 = self.distance_idx(x, w) + dyz;
                        let (mut top, mut second) = if s1 >= s2 { (s1, s2) } else { (s2, s1) };
                        if s3 >= top {
                            second = top;
                            top = s3;
                        } else if s3 > second {
                            second = s3;
                        }
                        let slack = top - second;
                        if slack > worst {
                            worst = slack;
                            witness = Some(vec![
                                self.poset.ids[x].clone(),
                                self.poset.ids[y].clone(),
                                self.poset.ids[z].clone(),
                                self.poset.ids[w].clone(),
                            ]);
                        }
                    }
                }
            }
        }
        if witness.is_none() {
            worst = 0.0;
        }
        Ok(MetricScan {
            ok: worst <= eps,
            worst,
            witness,
        })
    }
}
