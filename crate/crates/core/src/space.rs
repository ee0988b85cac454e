//! Finite metric spaces.
//!
//! A space is a dense distance table, a set of points on the real line, a
//! subset of a product `X × Y`, or a cone `T × {1..N}`. Only the dense form
//! stores a table; the others compute distances on demand, which keeps
//! products over cones small enough to hold in memory.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoarseError, Result};

/// Absolute tolerance for every floating-point comparison.
pub const TOL: f64 = 1e-9;

/// How the two factor distances of a product are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combiner {
    #[default]
    Max,
    Sum,
}

impl Combiner {
    #[inline]
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Combiner::Max => a.max(b),
            Combiner::Sum => a + b,
        }
    }
}

impl FromStr for Combiner {
    type Err = CoarseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Combiner::Max),
            "sum" => Ok(Combiner::Sum),
            other => Err(CoarseError::Parse(format!("unknown combiner `{other}`"))),
        }
    }
}

pub struct FiniteMetricSpace {
    repr: Repr,
    index: OnceLock<HashMap<String, usize>>,
}

enum Repr {
    Dense {
        labels: Vec<String>,
        dist: Vec<f64>,
    },
    /// Points of the real line, `d(a, b) = |a − b|`.
    Line {
        labels: Vec<String>,
        coords: Vec<f64>,
    },
    Pairs(PairData),
    Cone(ConeData),
}

struct PairData {
    left: Arc<FiniteMetricSpace>,
    right: Arc<FiniteMetricSpace>,
    /// Sorted lexicographically.
    pairs: Vec<(u32, u32)>,
    /// Range of `pairs` whose left component is the given left point.
    fibers: Vec<(u32, u32)>,
    combiner: Combiner,
}

struct ConeData {
    base: Arc<FiniteMetricSpace>,
    /// (base point, level), sorted by level then base point.
    points: Vec<(u32, u32)>,
    /// `level_start[l]..level_start[l + 1]` are the points on level `l`.
    level_start: Vec<u32>,
}

impl fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Dense { .. } => "dense",
            Repr::Line { .. } => "line",
            Repr::Pairs(_) => "pairs",
            Repr::Cone(_) => "cone",
        };
        f.debug_struct("FiniteMetricSpace")
            .field("kind", &kind)
            .field("len", &self.len())
            .finish()
    }
}

impl FiniteMetricSpace {
    /// Builds a dense space from labels and a row-major table. Only the shape
    /// is checked here; metric axioms are checked by
    /// [`crate::metric::validate_metric`].
    pub fn from_matrix(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n {
            return Err(CoarseError::DimensionMismatch {
                points: n,
                rows: rows.len(),
                bad_row: rows.len().min(n),
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        if let Some((bad_row, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(CoarseError::DimensionMismatch {
                points: n,
                rows: n,
                bad_row,
                cols: row.len(),
            });
        }
        check_unique(&labels)?;
        let dist = rows.into_iter().flatten().collect();
        Ok(Self::dense(labels, dist))
    }

    /// Dense space from a distance function. Labels must be unique.
    pub fn from_fn(labels: Vec<String>, f: impl Fn(usize, usize) -> f64) -> Self {
        let n = labels.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = f(i, j);
            }
        }
        Self::dense(labels, dist)
    }

    fn dense(labels: Vec<String>, dist: Vec<f64>) -> Self {
        Self {
            repr: Repr::Dense { labels, dist },
            index: OnceLock::new(),
        }
    }

    /// Points on the real line with `d(a, b) = |a − b|`. Labels must be unique.
    pub fn from_line(labels: Vec<String>, coords: Vec<f64>) -> Result<Self> {
        if labels.len() != coords.len() {
            return Err(CoarseError::DimensionMismatch {
                points: labels.len(),
                rows: coords.len(),
                bad_row: 0,
                cols: 1,
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CoarseError::InvalidParameter("non-finite coordinate".into()));
        }
        check_unique(&labels)?;
        Ok(Self {
            repr: Repr::Line { labels, coords },
            index: OnceLock::new(),
        })
    }

    /// Subset of `left × right` given by `pairs`, which are sorted and deduplicated here.
    pub fn from_pairs(
        left: Arc<FiniteMetricSpace>,
        right: Arc<FiniteMetricSpace>,
        mut pairs: Vec<(u32, u32)>,
        combiner: Combiner,
    ) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut fibers = vec![(0u32, 0u32); left.len()];
        let mut start = 0usize;
        while start < pairs.len() {
            let x = pairs[start].0;
            let mut end = start;
            while end < pairs.len() && pairs[end].0 == x {
                end += 1;
            }
            fibers[x as usize] = (start as u32, end as u32);
            start = end;
        }
        Self {
            repr: Repr::Pairs(PairData {
                left,
                right,
                pairs,
                fibers,
                combiner,
            }),
            index: OnceLock::new(),
        }
    }

    /// Cone points `(base point, level)` with levels ≥ 1.
    pub fn from_cone(base: Arc<FiniteMetricSpace>, mut points: Vec<(u32, u32)>) -> Result<Self> {
        if points.iter().any(|&(_, l)| l == 0) {
            return Err(CoarseError::ZeroLevel);
        }
        points.sort_unstable_by_key(|&(b, l)| (l, b));
        points.dedup();
        let max_level = points.iter().map(|&(_, l)| l).max().unwrap_or(0) as usize;
        let mut level_start = vec![0u32; max_level + 2];
        for &(_, l) in &points {
            level_start[l as usize + 1] += 1;
        }
        for l in 1..level_start.len() {
            level_start[l] += level_start[l - 1];
        }
        Ok(Self {
            repr: Repr::Cone(ConeData {
                base,
                points,
                level_start,
            }),
            index: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Dense { labels, .. } | Repr::Line { labels, .. } => labels.len(),
            Repr::Pairs(p) => p.pairs.len(),
            Repr::Cone(c) => c.points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, i: usize) -> Cow<'_, str> {
        match &self.repr {
            Repr::Dense { labels, .. } | Repr::Line { labels, .. } => Cow::Borrowed(labels[i].as_str()),
            Repr::Pairs(p) => {
                let (x, y) = p.pairs[i];
                let l = p.left.label(x as usize);
                let r = p.right.label(y as usize);
                let l = if l.contains('|') {
                    format!("({l})")
                } else {
                    l.into_owned()
                };
                let r = if r.contains('|') {
                    format!("({r})")
                } else {
                    r.into_owned()
                };
                Cow::Owned(format!("{l}|{r}"))
            }
            Repr::Cone(c) => {
                let (b, l) = c.points[i];
                Cow::Owned(format!("{}@{}", c.base.label(b as usize), l))
            }
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.label(i).into_owned()).collect()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        let index = self
            .index
            .get_or_init(|| (0..self.len()).map(|i| (self.label(i).into_owned(), i)).collect());
        index
            .get(label)
            .copied()
            .ok_or_else(|| CoarseError::UnknownPoint(label.to_owned()))
    }

    pub fn check_index(&self, i: usize) -> Result<usize> {
        if i < self.len() {
            Ok(i)
        } else {
            Err(CoarseError::IndexOutOfRange(i))
        }
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.repr {
            Repr::Dense { labels, dist } => dist[i * labels.len() + j],
            Repr::Line { coords, .. } => (coords[i] - coords[j]).abs(),
            Repr::Pairs(p) => {
                let (x1, y1) = p.pairs[i];
                let (x2, y2) = p.pairs[j];
                p.combiner.combine(
                    p.left.dist(x1 as usize, x2 as usize),
                    p.right.dist(y1 as usize, y2 as usize),
                )
            }
            Repr::Cone(c) => {
                let (x, i) = c.points[i];
                let (y, j) = c.points[j];
                cone_formula(c.base.dist(x as usize, y as usize), i, j)
            }
        }
    }

    pub fn eccentricity(&self, p: usize) -> f64 {
        (0..self.len()).map(|x| self.dist(p, x)).fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        self.fold_pairs_within(f64::INFINITY, || 0.0f64, |acc, _, _, d| *acc = acc.max(d), f64::max)
    }

    /// Row-major copy of the full distance table.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.len();
        if let Repr::Dense { dist, .. } = &self.repr {
            return dist.clone();
        }
        let mut out = vec![0.0; n * n];
        out.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.dist(i, j);
            }
        });
        out
    }

    /// Dense copy with every distance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut dist = self.to_dense();
        dist.iter_mut().for_each(|d| *d *= factor);
        Self::dense(self.labels(), dist)
    }

    /// Dense copy of the subspace on `points` (in the given order).
    pub fn restrict(&self, points: &[usize]) -> Self {
        let labels = points.iter().map(|&i| self.label(i).into_owned()).collect();
        Self::from_fn(labels, |a, b| self.dist(points[a], points[b]))
    }

    /// Structural equality: same labels in the same order and same distances.
    pub fn same_as(&self, other: &FiniteMetricSpace) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        let n = self.len();
        n == other.len()
            && (0..n).all(|i| self.label(i) == other.label(i))
            && (0..n).all(|i| (0..n).all(|j| (self.dist(i, j) - other.dist(i, j)).abs() <= TOL))
    }

    /// The pair behind point `i` of a product space.
    pub fn pair(&self, i: usize) -> Option<(usize, usize)> {
        match &self.repr {
            Repr::Pairs(p) => p.pairs.get(i).map(|&(x, y)| (x as usize, y as usize)),
            _ => None,
        }
    }

    /// Index of the pair `(x, y)` in a product space.
    pub fn pair_index(&self, x: usize, y: usize) -> Option<usize> {
        match &self.repr {
            Repr::Pairs(p) => {
                let &(s, e) = p.fibers.get(x)?;
                let fiber = &p.pairs[s as usize..e as usize];
                fiber
                    .binary_search_by_key(&(y as u32), |&(_, b)| b)
                    .ok()
                    .map(|k| s as usize + k)
            }
            _ => None,
        }
    }

    pub fn factors(&self) -> Option<(&Arc<FiniteMetricSpace>, &Arc<FiniteMetricSpace>, Combiner)> {
        match &self.repr {
            Repr::Pairs(p) => Some((&p.left, &p.right, p.combiner)),
            _ => None,
        }
    }

    /// Product points whose left component is `x`.
    pub fn fiber(&self, x: usize) -> std::ops::Range<usize> {
        match &self.repr {
            Repr::Pairs(p) => p.fibers.get(x).map_or(0..0, |&(s, e)| s as usize..e as usize),
            _ => 0..0,
        }
    }

    /// The `(base point, level)` behind point `i` of a cone space.
    pub fn cone_point(&self, i: usize) -> Option<(usize, u32)> {
        match &self.repr {
            Repr::Cone(c) => c.points.get(i).map(|&(b, l)| (b as usize, l)),
            _ => None,
        }
    }

    pub fn cone_base(&self) -> Option<&Arc<FiniteMetricSpace>> {
        match &self.repr {
            Repr::Cone(c) => Some(&c.base),
            _ => None,
        }
    }

    pub fn cone_index(&self, base: usize, level: u32) -> Option<usize> {
        match &self.repr {
            Repr::Cone(c) => {
                let l = level as usize;
                if l + 1 >= c.level_start.len() {
                    return None;
                }
                let (s, e) = (c.level_start[l] as usize, c.level_start[l + 1] as usize);
                c.points[s..e]
                    .binary_search_by_key(&(base as u32), |&(b, _)| b)
                    .ok()
                    .map(|k| s + k)
            }
            _ => None,
        }
    }

    /// Cone points on `level`.
    pub fn cone_level(&self, level: u32) -> std::ops::Range<usize> {
        match &self.repr {
            Repr::Cone(c) => {
                let l = level as usize;
                if l + 1 >= c.level_start.len() {
                    0..0
                } else {
                    c.level_start[l] as usize..c.level_start[l + 1] as usize
                }
            }
            _ => 0..0,
        }
    }

    /// Enumerates unordered pairs `i < j` with `d(i, j) ≤ kmax`, using the
    /// structure of product and cone spaces to skip far pairs.
    pub fn scanner(&self, kmax: f64) -> PairScanner<'_> {
        let aux = match &self.repr {
            Repr::Pairs(p) => {
                let mut up: Vec<Vec<u32>> = (0..p.left.len()).map(|x| vec![x as u32]).collect();
                let inner = p.left.scanner(kmax);
                for (x, row) in up.iter_mut().enumerate() {
                    inner.row(x, |j, _| row.push(j as u32));
                    row.sort_unstable();
                }
                Aux::Pairs(up)
            }
            _ => Aux::None,
        };
        PairScanner { space: self, kmax, aux }
    }

    /// Parallel fold over unordered pairs `i < j` at distance ≤ `kmax`.
    pub fn fold_pairs_within<T, I, F, R>(&self, kmax: f64, init: I, fold: F, reduce: R) -> T
    where
        T: Send,
        I: Fn() -> T + Sync + Send,
        F: Fn(&mut T, usize, usize, f64) + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        let scanner = self.scanner(kmax);
        (0..self.len())
            .into_par_iter()
            .fold(&init, |mut acc, i| {
                scanner.row(i, |j, d| fold(&mut acc, i, j, d));
                acc
            })
            .reduce(&init, reduce)
    }

    /// Symmetric neighbor lists at scale `kmax`, self excluded, ascending.
    pub fn neighbors_within(&self, kmax: f64) -> Vec<Vec<u32>> {
        let scanner = self.scanner(kmax);
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); self.len()];
        for i in 0..self.len() {
            scanner.row(i, |j, _| {
                adj[i].push(j as u32);
                adj[j].push(i as u32);
            });
        }
        adj.par_iter_mut().for_each(|row| row.sort_unstable());
        adj
    }
}

/// `sqrt(i² + j² − (2 − d²)·i·j)`, evaluated as `sqrt((i − j)² + d²·i·j)`.
#[inline]
pub fn cone_formula(d_base: f64, i: u32, j: u32) -> f64 {
    let (a, b) = (i as f64, j as f64);
    ((a - b) * (a - b) + d_base * d_base * a * b).sqrt()
}

fn check_unique(labels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(CoarseError::InvalidParameter(format!("duplicate point label `{l}`")));
        }
    }
    Ok(())
}

enum Aux {
    None,
    /// For each left point `x`, the left points `x' ≥ x` within `kmax`.
    Pairs(Vec<Vec<u32>>),
}

pub struct PairScanner<'a> {
    space: &'a FiniteMetricSpace,
    kmax: f64,
    aux: Aux,
}

impl PairScanner<'_> {
    /// Calls `f(j, d)` for every `j > i` with `d(i, j) ≤ kmax`.
    pub fn row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        let limit = self.kmax + TOL;
        match (&self.space.repr, &self.aux) {
            (Repr::Dense { labels, dist }, _) => {
                let n = labels.len();
                let row = &dist[i * n..(i + 1) * n];
                for (j, &d) in row.iter().enumerate().skip(i + 1) {
                    if d <= limit {
                        f(j, d);
                    }
                }
            }
            (Repr::Line { coords, .. }, _) => {
                let a = coords[i];
                for (j, &b) in coords.iter().enumerate().skip(i + 1) {
                    let d = (a - b).abs();
                    if d <= limit {
                        f(j, d);
                    }
                }
            }
            (Repr::Pairs(p), Aux::Pairs(up)) => {
                let (x, y) = p.pairs[i];
                for &x2 in &up[x as usize] {
                    let dl = p.left.dist(x as usize, x2 as usize);
                    let (s, e) = p.fibers[x2 as usize];
                    let start = if x2 == x { i + 1 } else { s as usize };
                    for b in start..e as usize {
                        let y2 = p.pairs[b].1;
                        let d = p.combiner.combine(dl, p.right.dist(y as usize, y2 as usize));
                        if d <= limit {
                            f(b, d);
                        }
                    }
                }
            }
            (Repr::Cone(c), _) => {
                let (x, li) = c.points[i];
                let top = c.level_start.len() - 1;
                let reach = if self.kmax.is_finite() {
                    (li as usize + (self.kmax + TOL).floor() as usize + 1).min(top)
                } else {
                    top
                };
                let end = c.level_start[reach] as usize;
                for b in i + 1..end {
                    let (y, lj) = c.points[b];
                    let d = cone_formula(c.base.dist(x as usize, y as usize), li, lj);
                    if d <= limit {
                        f(b, d);
                    }
                }
            }
            (Repr::Pairs(_), Aux::None) => unreachable!("pair scanner built without fibers"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> FiniteMetricSpace {
        let labels = (0..n).map(|i| i.to_string()).collect();
        FiniteMetricSpace::from_fn(labels, |i, j| (i as f64 - j as f64).abs())
    }

    #[test]
    fn matrix_shape_is_checked() {
        let err =
            FiniteMetricSpace::from_matrix(vec!["a".into(), "b".into()], vec![vec![0.0, 1.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, CoarseError::DimensionMismatch { bad_row: 1, .. }));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let err = FiniteMetricSpace::from_matrix(vec!["a".into(), "a".into()], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(err.is_err());
    }

    #[test]
    fn pruned_product_scan_matches_full_scan() {
        let x = Arc::new(line(12));
        let y = Arc::new(line(9));
        let pairs: Vec<(u32, u32)> = (0..12u32)
            .flat_map(|a| (0..9u32).map(move |b| (a, b)))
            .filter(|&(a, b)| (a as i64 - b as i64).abs() <= 2)
            .collect();
        let prod = FiniteMetricSpace::from_pairs(x, y, pairs, Combiner::Max);
        for kmax in [0.0, 1.0, 2.5, 4.0] {
            let mut fast = Vec::new();
            let scanner = prod.scanner(kmax);
            for i in 0..prod.len() {
                scanner.row(i, |j, _| fast.push((i, j)));
            }
            let mut slow = Vec::new();
            for i in 0..prod.len() {
                for j in i + 1..prod.len() {
                    if prod.dist(i, j) <= kmax + TOL {
                        slow.push((i, j));
                    }
                }
            }
            fast.sort_unstable();
            assert_eq!(fast, slow, "kmax={kmax}");
        }
    }

    #[test]
    fn pruned_cone_scan_matches_full_scan() {
        let base = Arc::new(line(3));
        let pts = (1..=6u32).flat_map(|l| (0..3u32).map(move |b| (b, l))).collect();
        let cone = FiniteMetricSpace::from_cone(base, pts).unwrap();
        for kmax in [0.5, 1.0, 2.0] {
            let mut fast = Vec::new();
            let scanner = cone.scanner(kmax);
            for i in 0..cone.len() {
                scanner.row(i, |j, _| fast.push((i, j)));
            }
            let slow: Vec<_> = (0..cone.len())
                .flat_map(|i| (i + 1..cone.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| cone.dist(i, j) <= kmax + TOL)
                .collect();
            fast.sort_unstable();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn labels_round_trip_through_index() {
        let x = Arc::new(line(3));
        let prod = FiniteMetricSpace::from_pairs(x.clone(), x, vec![(0, 1), (2, 2)], Combiner::Max);
        assert_eq!(prod.label(0), "0|1");
        assert_eq!(prod.index_of("2|2").unwrap(), 1);
        assert_eq!(prod.pair_index(2, 2), Some(1));
        assert_eq!(prod.pair_index(1, 1), None);
    }
}
