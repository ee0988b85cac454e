//! Metric axioms, graph metrics, balls, entourages, nets and covers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{CoarseError, Result};
use crate::space::{FiniteMetricSpace, TOL};

/// Violations beyond this many are counted but not listed.
const WITNESS_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    NonFinite {
        i: usize,
        j: usize,
    },
    Negative {
        i: usize,
        j: usize,
    },
    NonzeroDiagonal {
        i: usize,
    },
    Asymmetric {
        i: usize,
        j: usize,
    },
    /// `d(x, z) > d(x, via) + d(via, z)`.
    Triangle {
        x: usize,
        z: usize,
        via: usize,
    },
}

impl Violation {
    pub fn describe(&self, space: &FiniteMetricSpace) -> String {
        let l = |i: usize| space.label(i).into_owned();
        match *self {
            Violation::NonFinite { i, j } => format!("non-finite distance at ({}, {})", l(i), l(j)),
            Violation::Negative { i, j } => format!("negative distance at ({}, {})", l(i), l(j)),
            Violation::NonzeroDiagonal { i } => format!("nonzero self-distance at {}", l(i)),
            Violation::Asymmetric { i, j } => format!("asymmetry at ({}, {})", l(i), l(j)),
            Violation::Triangle { x, z, via } => {
                format!("triangle violation at ({}, {}, {})", l(x), l(z), l(via))
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    /// The first violations found, at most 64.
    pub violations: Vec<Violation>,
    /// Total number of violations.
    pub total: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.total == 0
    }

    fn push(&mut self, v: Violation) {
        self.total += 1;
        if self.violations.len() < WITNESS_CAP {
            self.violations.push(v);
        }
    }

    fn merge(mut self, other: ValidationReport) -> ValidationReport {
        self.total += other.total;
        for v in other.violations {
            if self.violations.len() >= WITNESS_CAP {
                break;
            }
            self.violations.push(v);
        }
        self
    }
}

/// Exhaustive check of finiteness, nonnegativity, zero diagonal, symmetry
/// and the triangle inequality, each at absolute tolerance [`TOL`].
pub fn validate_metric(space: &FiniteMetricSpace) -> ValidationReport {
    let n = space.len();
    let d = space.to_dense();
    let mut report = ValidationReport::default();
    for i in 0..n {
        for j in 0..n {
            let v = d[i * n + j];
            if !v.is_finite() {
                report.push(Violation::NonFinite { i, j });
            } else if v < -TOL {
                report.push(Violation::Negative { i, j });
            }
        }
        if d[i * n + i].abs() > TOL {
            report.push(Violation::NonzeroDiagonal { i });
        }
    }
    let mut symmetric = true;
    for i in 0..n {
        for j in i + 1..n {
            if (d[i * n + j] - d[j * n + i]).abs() > TOL {
                symmetric = false;
                report.push(Violation::Asymmetric { i, j });
            }
        }
    }
    let triangles = (0..n)
        .into_par_iter()
        .fold(ValidationReport::default, |mut acc, x| {
            let row_x = &d[x * n..(x + 1) * n];
            let z_from = if symmetric { x + 1 } else { 0 };
            for z in z_from..n {
                if z == x {
                    continue;
                }
                let dxz = row_x[z];
                for via in 0..n {
                    if dxz > row_x[via] + d[via * n + z] + TOL {
                        acc.push(Violation::Triangle { x, z, via });
                    }
                }
            }
            acc
        })
        .reduce(ValidationReport::default, ValidationReport::merge);
    let mut report = report.merge(triangles);
    report.violations.sort_by_key(|v| match *v {
        Violation::NonFinite { i, j } | Violation::Negative { i, j } => (0, i, j, 0),
        Violation::NonzeroDiagonal { i } => (1, i, i, 0),
        Violation::Asymmetric { i, j } => (2, i, j, 0),
        Violation::Triangle { x, z, via } => (3, x, z, via),
    });
    report
}

#[derive(Debug, Clone)]
pub struct WeightedGraph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let n = vertices.len();
        let mut seen = std::collections::HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(CoarseError::InvalidGraph(format!("duplicate vertex `{v}`")));
            }
        }
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(CoarseError::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(CoarseError::InvalidGraph(format!("self-loop at `{}`", vertices[u])));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(CoarseError::InvalidGraph(format!(
                    "edge ({}, {}) has non-positive weight {w}",
                    vertices[u], vertices[v]
                )));
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn from_labeled(vertices: Vec<String>, edges: &[(String, String, f64)]) -> Result<Self> {
        let pos = |l: &str| {
            vertices
                .iter()
                .position(|v| v == l)
                .ok_or_else(|| CoarseError::UnknownPoint(l.to_owned()))
        };
        let edges = edges
            .iter()
            .map(|(u, v, w)| Ok((pos(u)?, pos(v)?, *w)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vertices, edges)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }
}

#[derive(PartialEq)]
struct HeapEntry(f64, usize);

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All-pairs shortest-path lengths (Dijkstra from every vertex).
pub fn shortest_path_metric(g: &WeightedGraph) -> Result<FiniteMetricSpace> {
    let n = g.vertices.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(u, v, w) in &g.edges {
        adj[u].push((v, w));
        adj[v].push((u, w));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut dist = vec![f64::INFINITY; n];
            let mut heap = BinaryHeap::new();
            dist[s] = 0.0;
            heap.push(HeapEntry(0.0, s));
            while let Some(HeapEntry(d, u)) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &(v, w) in &adj[u] {
                    let nd = d + w;
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(HeapEntry(nd, v));
                    }
                }
            }
            dist
        })
        .collect();
    for (s, row) in rows.iter().enumerate() {
        if let Some(t) = row.iter().position(|d| !d.is_finite()) {
            return Err(CoarseError::Disconnected(g.vertices[s].clone(), g.vertices[t].clone()));
        }
    }
    FiniteMetricSpace::from_matrix(g.vertices.clone(), rows)
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && !r.is_nan() {
        Ok(())
    } else {
        Err(CoarseError::InvalidParameter(format!("radius must be ≥ 0, got {r}")))
    }
}

/// Closed ball `B(p, r)`, ascending.
pub fn ball(space: &FiniteMetricSpace, p: usize, r: f64) -> Result<Vec<usize>> {
    space.check_index(p)?;
    check_radius(r)?;
    Ok((0..space.len()).filter(|&x| space.dist(p, x) <= r + TOL).collect())
}

/// All ordered pairs at distance ≤ r, diagonal included.
pub fn entourage_pairs(space: &FiniteMetricSpace, r: f64) -> Result<Vec<(usize, usize)>> {
    check_radius(r)?;
    let mut pairs: Vec<(usize, usize)> = (0..space.len()).map(|i| (i, i)).collect();
    let scanner = space.scanner(r);
    for i in 0..space.len() {
        scanner.row(i, |j, _| {
            pairs.push((i, j));
            pairs.push((j, i));
        });
    }
    pairs.sort_unstable();
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub points: Vec<usize>,
    /// Largest distance from a point of the space to the net.
    pub constant: f64,
}

/// Greedy ε-net: scan points in index order and keep a point when it is at
/// distance ≥ ε from everything kept so far.
pub fn greedy_net(space: &FiniteMetricSpace, epsilon: f64) -> Result<Net> {
    check_radius(epsilon)?;
    let mut points: Vec<usize> = Vec::new();
    for x in 0..space.len() {
        if points.iter().all(|&s| space.dist(x, s) >= epsilon - TOL) {
            points.push(x);
        }
    }
    let constant = (0..space.len())
        .map(|x| points.iter().map(|&s| space.dist(x, s)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(Net { points, constant })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    pub centers: Vec<usize>,
}

impl Cover {
    pub fn count(&self) -> usize {
        self.centers.len()
    }
}

/// Greedy cover of `subset` by `r0`-balls centered in `subset`.
///
/// Repeatedly takes the first uncovered point `u` (index order) and, among
/// the subset points within `r0` of `u`, picks the center covering the most
/// uncovered points; ties go to the smaller index.
pub fn covering_number(space: &FiniteMetricSpace, subset: &[usize], r0: f64) -> Result<Cover> {
    check_radius(r0)?;
    let mut members: Vec<usize> = subset.to_vec();
    members.sort_unstable();
    members.dedup();
    for &m in &members {
        space.check_index(m)?;
    }
    let mut covered = vec![false; members.len()];
    let mut centers = Vec::new();
    let near = |a: usize, b: usize| space.dist(a, b) <= r0 + TOL;
    while let Some(u) = covered.iter().position(|c| !c) {
        let pu = members[u];
        let mut best = (0usize, pu);
        for &cand in members.iter().filter(|&&c| near(c, pu)) {
            let gain = members
                .iter()
                .zip(&covered)
                .filter(|&(&m, &c)| !c && near(cand, m))
                .count();
            if gain > best.0 {
                best = (gain, cand);
            }
        }
        let center = best.1;
        for (k, &m) in members.iter().enumerate() {
            if near(center, m) {
                covered[k] = true;
            }
        }
        centers.push(center);
    }
    Ok(Cover { centers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grid2_l1, zplus};

    fn table(rows: Vec<Vec<f64>>) -> FiniteMetricSpace {
        let labels = (0..rows.len()).map(|i| i.to_string()).collect();
        FiniteMetricSpace::from_matrix(labels, rows).unwrap()
    }

    #[test]
    fn zplus_truncation_is_valid() {
        assert!(validate_metric(&zplus(4)).is_valid());
    }

    #[test]
    fn triangle_violation_is_witnessed() {
        let s = table(vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]]);
        let r = validate_metric(&s);
        assert_eq!(r.total, 1);
        assert_eq!(r.violations[0], Violation::Triangle { x: 0, z: 2, via: 1 });
        assert_eq!(r.violations[0].describe(&s), "triangle violation at (0, 2, 1)");
    }

    #[test]
    fn asymmetry_is_witnessed() {
        let s = table(vec![vec![0.0, 1.0], vec![2.0, 0.0]]);
        let r = validate_metric(&s);
        assert!(r.violations.contains(&Violation::Asymmetric { i: 0, j: 1 }));
    }

    #[test]
    fn non_finite_and_diagonal_are_reported() {
        let s = table(vec![vec![0.5, f64::INFINITY], vec![f64::INFINITY, 0.0]]);
        let r = validate_metric(&s);
        assert!(r.violations.contains(&Violation::NonzeroDiagonal { i: 0 }));
        assert!(r.violations.contains(&Violation::NonFinite { i: 0, j: 1 }));
    }

    #[test]
    fn path_graph_metric() {
        let g = WeightedGraph::new(vec!["0".into(), "1".into(), "2".into()], vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = shortest_path_metric(&g).unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
    }

    #[test]
    fn two_edge_path_beats_heavy_edge() {
        let g = WeightedGraph::new(
            vec!["0".into(), "1".into(), "2".into()],
            vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)],
        )
        .unwrap();
        let s = shortest_path_metric(&g).unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
        assert!(validate_metric(&s).is_valid());
    }

    #[test]
    fn isolated_vertices_are_an_error() {
        let g = WeightedGraph::new(vec!["a".into(), "b".into()], vec![]).unwrap();
        match shortest_path_metric(&g) {
            Err(CoarseError::Disconnected(a, b)) => assert_eq!((a.as_str(), b.as_str()), ("a", "b")),
            other => panic!("expected disconnection, got {other:?}"),
        }
    }

    #[test]
    fn bad_graphs_rejected() {
        assert!(WeightedGraph::new(vec!["a".into()], vec![(0, 0, 1.0)]).is_err());
        assert!(WeightedGraph::new(vec!["a".into(), "b".into()], vec![(0, 1, 0.0)]).is_err());
    }

    #[test]
    fn balls() {
        let s = zplus(10);
        assert_eq!(ball(&s, 0, 2.0).unwrap(), vec![0, 1, 2]);
        assert_eq!(ball(&s, 7, 0.0).unwrap(), vec![7]);
        assert!(ball(&s, 11, 1.0).is_err());
        // |i| + |j| ≤ 2 on the 11×11 grid
        let g = grid2_l1(5);
        let origin = g.index_of("0,0").unwrap();
        let brute = (-5i64..=5)
            .flat_map(|i| (-5i64..=5).map(move |j| (i, j)))
            .filter(|(i, j)| i.abs() + j.abs() <= 2)
            .count();
        assert_eq!(brute, 13);
        assert_eq!(ball(&g, origin, 2.0).unwrap().len(), brute);
    }

    #[test]
    fn entourages() {
        let s = zplus(3);
        let diag = entourage_pairs(&s, 0.0).unwrap();
        assert_eq!(diag, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        let brute = (0..4i64)
            .flat_map(|i| (0..4i64).map(move |j| (i, j)))
            .filter(|(i, j)| (i - j).abs() <= 1)
            .count();
        assert_eq!(brute, 10);
        assert_eq!(entourage_pairs(&s, 1.0).unwrap().len(), brute);
        assert_eq!(entourage_pairs(&s, 3.0).unwrap().len(), 16);
    }

    #[test]
    fn nets() {
        let s = zplus(10);
        let net = greedy_net(&s, 2.0).unwrap();
        assert_eq!(net.points, vec![0, 2, 4, 6, 8, 10]);
        assert!(net.constant <= 2.0);
        let all = greedy_net(&s, 0.0).unwrap();
        assert_eq!(all.points.len(), 11);
        assert_eq!(all.constant, 0.0);
        let single = greedy_net(&zplus(0), 5.0).unwrap();
        assert_eq!(single.points, vec![0]);
        assert_eq!(single.constant, 0.0);
    }

    #[test]
    fn covers() {
        let s = zplus(10);
        let all: Vec<usize> = (0..=10).collect();
        assert_eq!(covering_number(&s, &all, 10.0).unwrap().count(), 1);
        // Each radius-1 ball holds at most 3 of the 11 points, so 4 is optimal.
        let c = covering_number(&s, &all, 1.0).unwrap();
        assert_eq!(c.count(), 4);
        assert_eq!(c.centers, vec![1, 4, 7, 9]);
        assert_eq!(covering_number(&s, &[3], 1.0).unwrap().count(), 1);
        assert_eq!(covering_number(&s, &[], 1.0).unwrap().count(), 0);
    }
}
