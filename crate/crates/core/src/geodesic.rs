//! c-paths, coarse connectivity, upper controls and the c-geodesification.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;

use crate::control::ControlTable;
use crate::error::{CoarseError, Result};
use crate::maps::{injectivity_control, quasi_inverse, surjectivity_constant, uniformity_control, MapWitness};
use crate::space::{FiniteMetricSpace, TOL};

const UNREACHED: u32 = u32::MAX;

/// Threshold graph at scale `c`: `x ~ y` iff `x ≠ y` and `d(x, y) ≤ c`.
/// Neighbor lists are ascending.
#[derive(Debug, Clone)]
pub struct ThresholdGraph {
    pub c: f64,
    adj: Vec<Vec<u32>>,
}

impl ThresholdGraph {
    pub fn new(space: &FiniteMetricSpace, c: f64) -> Self {
        Self {
            c,
            adj: space.neighbors_within(c),
        }
    }

    pub fn neighbors(&self, x: usize) -> &[u32] {
        &self.adj[x]
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Hop counts from `source` (`u32::MAX` if unreachable) and BFS parents.
    /// Neighbors are visited in ascending order, so the first discoverer wins.
    pub fn bfs(&self, source: usize) -> (Vec<u32>, Vec<u32>) {
        let n = self.adj.len();
        let mut hops = vec![UNREACHED; n];
        let mut parent = vec![UNREACHED; n];
        let mut queue = VecDeque::new();
        hops[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                let v = v as usize;
                if hops[v] == UNREACHED {
                    hops[v] = hops[u] + 1;
                    parent[v] = u as u32;
                    queue.push_back(v);
                }
            }
        }
        (hops, parent)
    }

    /// Hop counts only.
    pub fn hops_from(&self, source: usize) -> Vec<u32> {
        self.bfs(source).0
    }
}

/// A sequence `a₀, …, aₙ` with consecutive distances ≤ `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct CPath {
    pub points: Vec<usize>,
    pub step: f64,
}

impl CPath {
    /// Number of steps `n`.
    pub fn steps(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn is_valid(&self, space: &FiniteMetricSpace) -> bool {
        self.points
            .windows(2)
            .all(|w| space.dist(w[0], w[1]) <= self.step + TOL)
    }

    /// Largest consecutive distance.
    pub fn max_step(&self, space: &FiniteMetricSpace) -> f64 {
        self.points
            .windows(2)
            .map(|w| space.dist(w[0], w[1]))
            .fold(0.0, f64::max)
    }
}

fn walk_back(parent: &[u32], source: usize, target: usize) -> Vec<usize> {
    let mut path = vec![target];
    let mut v = target;
    while v != source {
        v = parent[v] as usize;
        path.push(v);
    }
    path.reverse();
    path
}

/// A shortest c-path from `x` to `y`, or `None` if none exists.
pub fn min_cpath(space: &FiniteMetricSpace, c: f64, x: usize, y: usize) -> Result<Option<CPath>> {
    space.check_index(x)?;
    space.check_index(y)?;
    let g = ThresholdGraph::new(space, c);
    Ok(path_in(&g, x, y))
}

pub(crate) fn path_in(g: &ThresholdGraph, x: usize, y: usize) -> Option<CPath> {
    let (hops, parent) = g.bfs(x);
    (hops[y] != UNREACHED).then(|| CPath {
        points: walk_back(&parent, x, y),
        step: g.c,
    })
}

/// Least pairwise distance `c` at which the space is c-coarsely connected:
/// the bottleneck of a minimum spanning tree.
pub fn connectivity_threshold(space: &FiniteMetricSpace) -> f64 {
    let n = space.len();
    if n <= 1 {
        return 0.0;
    }
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut bottleneck = 0.0f64;
    let mut u = 0;
    for _ in 1..n {
        done[u] = true;
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for v in 0..n {
            if done[v] {
                continue;
            }
            let d = space.dist(u, v);
            if d < best[v] {
                best[v] = d;
            }
            if best[v] < next_d {
                next_d = best[v];
                next = v;
            }
        }
        bottleneck = bottleneck.max(next_d);
        u = next;
    }
    bottleneck
}

/// The least admissible upper control: `Φ(r)` is the largest point count of
/// a minimal c-path over pairs at distance ≤ `r`.
pub fn upper_control(space: &FiniteMetricSpace, c: f64, scales: &[f64]) -> Result<ControlTable> {
    crate::control::check_scales(scales)?;
    let g = ThresholdGraph::new(space, c);
    upper_control_in(space, &g, scales)
}

pub(crate) fn upper_control_in(space: &FiniteMetricSpace, g: &ThresholdGraph, scales: &[f64]) -> Result<ControlTable> {
    let n = space.len();
    let rmax = scales.last().copied().unwrap_or(0.0);
    let rows: Vec<std::result::Result<Vec<f64>, (usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let hops = g.hops_from(x);
            let mut acc = vec![1.0f64; scales.len()];
            for (y, &h) in hops.iter().enumerate().skip(x + 1) {
                if h == UNREACHED {
                    return Err((x, y));
                }
                let d = space.dist(x, y);
                if d > rmax + TOL {
                    continue;
                }
                let b = scales.partition_point(|&s| s < d - TOL);
                let count = h as f64 + 1.0;
                if count > acc[b] {
                    acc[b] = count;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut bounds = vec![1.0f64; scales.len()];
    for row in rows {
        match row {
            Ok(acc) => bounds.iter_mut().zip(acc).for_each(|(b, a)| *b = b.max(a)),
            Err((x, y)) => {
                return Err(CoarseError::NotConnected {
                    c: g.c,
                    from: space.label(x).into_owned(),
                    to: space.label(y).into_owned(),
                })
            }
        }
    }
    for k in 1..bounds.len() {
        bounds[k] = bounds[k].max(bounds[k - 1]);
    }
    Ok(ControlTable::from_parts(scales.to_vec(), bounds))
}

/// Whether `phi` is an admissible upper control for `(space, c)` on its grid.
pub fn is_admissible(space: &FiniteMetricSpace, c: f64, phi: &ControlTable) -> Result<bool> {
    let least = upper_control(space, c, phi.scales())?;
    Ok(least.dominated_by(phi, 0.0))
}

/// Where a realized point sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Vertex(usize),
    /// Sample `k/m` along the edge `x → y` (`x < y`), `0 < k < m`.
    Interior {
        x: usize,
        y: usize,
        k: u32,
    },
}

/// The c-geodesification sampled with `m` points per edge.
#[derive(Debug, Clone)]
pub struct Realization {
    pub base: Arc<FiniteMetricSpace>,
    pub c: f64,
    pub m: u32,
    pub edges: Vec<(usize, usize)>,
    pub space: Arc<FiniteMetricSpace>,
    pub positions: Vec<Position>,
}

/// Builds the 1-skeleton of the c-Rips complex with unit edges, each edge
/// subdivided into `m` segments of length `1/m`.
pub fn geodesify(base: Arc<FiniteMetricSpace>, c: f64, m: u32) -> Result<Realization> {
    if m == 0 {
        return Err(CoarseError::InvalidParameter("subdivision m must be ≥ 1".into()));
    }
    if c.is_nan() || c < 0.0 {
        return Err(CoarseError::InvalidParameter("c must be ≥ 0".into()));
    }
    let n = base.len();
    let g = ThresholdGraph::new(&base, c);
    if n > 0 {
        let hops = g.hops_from(0);
        if let Some(y) = hops.iter().position(|&h| h == UNREACHED) {
            return Err(CoarseError::NotConnected {
                c,
                from: base.label(0).into_owned(),
                to: base.label(y).into_owned(),
            });
        }
    }
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|x| {
            g.neighbors(x)
                .iter()
                .filter(move |&&y| y as usize > x)
                .map(move |&y| (x, y as usize))
        })
        .collect();
    let mut positions: Vec<Position> = (0..n).map(Position::Vertex).collect();
    let mut labels: Vec<String> = base.labels();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(x, y) in &edges {
        let mut prev = x;
        for k in 1..m {
            let id = positions.len();
            positions.push(Position::Interior { x, y, k });
            labels.push(format!("e:{}:{}:{k}/{m}", base.label(x), base.label(y)));
            adj.push(Vec::new());
            adj[prev].push(id as u32);
            adj[id].push(prev as u32);
            prev = id;
        }
        adj[prev].push(y as u32);
        adj[y].push(prev as u32);
    }
    let total = positions.len();
    let scale = 1.0 / m as f64;
    let rows: Vec<Vec<f64>> = (0..total)
        .into_par_iter()
        .map(|s| {
            let mut hops = vec![UNREACHED; total];
            let mut queue = VecDeque::new();
            hops[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if hops[v as usize] == UNREACHED {
                        hops[v as usize] = hops[u] + 1;
                        queue.push_back(v as usize);
                    }
                }
            }
            hops.into_iter().map(|h| h as f64 * scale).collect()
        })
        .collect();
    let space = Arc::new(FiniteMetricSpace::from_matrix(labels, rows)?);
    Ok(Realization {
        base,
        c,
        m,
        edges,
        space,
        positions,
    })
}

/// Sends a realized point to the nearer endpoint of its edge, preferring `x`
/// on ties.
pub fn phi_c(real: &Realization, t: usize) -> Result<usize> {
    real.space.check_index(t)?;
    Ok(match real.positions[t] {
        Position::Vertex(x) => x,
        Position::Interior { x, y, .. } => {
            if real.space.dist(t, x) <= real.space.dist(t, y) + TOL {
                x
            } else {
                y
            }
        }
    })
}

impl Realization {
    /// `φ_c` as a map witness realized → base.
    pub fn phi_map(&self) -> Result<MapWitness> {
        let map = (0..self.space.len())
            .map(|t| phi_c(self, t))
            .collect::<Result<Vec<_>>>()?;
        MapWitness::new(self.space.clone(), self.base.clone(), map)
    }

    pub fn vertex_count(&self) -> usize {
        self.base.len()
    }
}

/// Measured constants of `φ_c` against the two bounds it must satisfy.
#[derive(Debug, Clone)]
pub struct GeodesificationReport {
    /// `n ↦ max d(φ t, φ s)` over realized `d(t, s) ≤ n`.
    pub uniformity: ControlTable,
    /// `n ↦ (n + 1)·c`.
    pub uniformity_bound: ControlTable,
    /// `k ↦ max realized d(s, t)` over base `d(φ s, φ t) ≤ k`.
    pub spread: ControlTable,
    /// `k ↦ Φ(X, c)(k) + 1`.
    pub spread_bound: ControlTable,
    pub surjectivity: f64,
    /// `closeness(φ ∘ ψ, id)` and `closeness(ψ ∘ φ, id)` for the quasi-inverse `ψ`.
    pub forward: f64,
    pub backward: f64,
}

impl GeodesificationReport {
    pub fn passes(&self) -> bool {
        self.uniformity.dominated_by(&self.uniformity_bound, 0.0) && self.spread.dominated_by(&self.spread_bound, 0.0)
    }
}

/// Checks the comparison map on integer scales `0..=n_max`.
pub fn check_geodesification(real: &Realization, n_max: usize) -> Result<GeodesificationReport> {
    let phi = real.phi_map()?;
    let scales = crate::control::integer_scales(n_max);
    let uniformity = uniformity_control(&phi, &scales)?;
    let uniformity_bound = ControlTable::from_fn(&scales, |n| (n + 1.0) * real.c)?;
    let spread = injectivity_control(&phi, &scales)?;
    let upper = upper_control(&real.base, real.c, &scales)?;
    let spread_bound = ControlTable::from_fn(&scales, |k| upper.at(k).unwrap_or(f64::INFINITY) + 1.0)?;
    let q = quasi_inverse(&phi)?;
    Ok(GeodesificationReport {
        uniformity,
        uniformity_bound,
        spread,
        spread_bound,
        surjectivity: surjectivity_constant(&phi),
        forward: q.forward,
        backward: q.backward,
    })
}

/// Literal replay of the connectivity argument for a coarsely surjective map.
#[derive(Debug, Clone)]
pub struct ConnectivityReplay {
    /// Surjectivity constant of `f`.
    pub k: f64,
    /// `Φ_f(c)`.
    pub d: f64,
    /// `max(K, d)`.
    pub e: f64,
    /// Connectivity threshold of the target.
    pub threshold: f64,
    /// Largest step over all replayed paths.
    pub max_step: f64,
    pub paths: usize,
}

impl ConnectivityReplay {
    pub fn passes(&self) -> bool {
        self.threshold <= self.e + TOL && self.max_step <= self.e + TOL
    }
}

/// For `f: X → Y` with `X` c-coarsely connected, replays the path
/// `y, f(a₀), …, f(aₙ), y′` from a fixed `y₀` to every `y′ ∈ Y` and checks
/// each is a `max(K, d)`-path.
pub fn replay_connectivity(f: &MapWitness, c: f64) -> Result<ConnectivityReplay> {
    let x = f.source();
    let y = f.target();
    if x.is_empty() || y.is_empty() {
        return Err(CoarseError::EmptySpace);
    }
    let k = surjectivity_constant(f);
    let d = uniformity_control(f, &[c])?.bounds()[0];
    let e = k.max(d);
    let pre = quasi_inverse(f)?.inverse;
    let g = ThresholdGraph::new(x, c);
    let y0 = 0;
    let x0 = pre.apply(y0);
    let (hops, parent) = g.bfs(x0);
    let steps: Vec<std::result::Result<f64, usize>> = (0..y.len())
        .into_par_iter()
        .map(|y1| {
            let x1 = pre.apply(y1);
            if hops[x1] == UNREACHED {
                return Err(x1);
            }
            let mut seq = vec![y0];
            seq.extend(walk_back(&parent, x0, x1).into_iter().map(|a| f.apply(a)));
            seq.push(y1);
            Ok(seq.windows(2).map(|w| y.dist(w[0], w[1])).fold(0.0, f64::max))
        })
        .collect();
    let mut max_step = 0.0f64;
    for s in &steps {
        match s {
            Ok(v) => max_step = max_step.max(*v),
            Err(x1) => {
                return Err(CoarseError::NotConnected {
                    c,
                    from: x.label(x0).into_owned(),
                    to: x.label(*x1).into_owned(),
                })
            }
        }
    }
    Ok(ConnectivityReplay {
        k,
        d,
        e,
        threshold: connectivity_threshold(y),
        max_step,
        paths: steps.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::integer_scales;
    use crate::generators::{grid2_l1, zplus};
    use crate::metric::validate_metric;

    fn powers() -> FiniteMetricSpace {
        let v = [1.0f64, 2.0, 4.0, 8.0];
        FiniteMetricSpace::from_fn(v.iter().map(|x| x.to_string()).collect(), |i, j| (v[i] - v[j]).abs())
    }

    #[test]
    fn min_paths() {
        let z = zplus(10);
        let p = min_cpath(&z, 1.0, 0, 5).unwrap().unwrap();
        assert_eq!(p.points, vec![0, 1, 2, 3, 4, 5]);
        let p = min_cpath(&z, 2.0, 0, 5).unwrap().unwrap();
        assert_eq!(p.steps(), 3);
        assert!(p.is_valid(&z));
        assert!(min_cpath(&powers(), 1.0, 1, 2).unwrap().is_none());
    }

    #[test]
    fn thresholds() {
        assert_eq!(connectivity_threshold(&zplus(9)), 1.0);
        assert_eq!(connectivity_threshold(&powers()), 4.0);
        assert_eq!(connectivity_threshold(&zplus(0)), 0.0);
    }

    #[test]
    fn upper_controls() {
        let s = integer_scales(6);
        let u = upper_control(&zplus(12), 1.0, &s).unwrap();
        assert!(u.entries().all(|(r, b)| b == r + 1.0));
        let u = upper_control(&grid2_l1(3), 1.0, &s).unwrap();
        assert!(u.entries().all(|(r, b)| b == r + 1.0));
        let err = upper_control(&powers(), 1.0, &s).unwrap_err();
        assert!(matches!(err, CoarseError::NotConnected { .. }));
    }

    #[test]
    fn realization_shapes() {
        let r = geodesify(Arc::new(zplus(4)), 1.0, 2).unwrap();
        assert_eq!(r.edges.len(), 4);
        assert_eq!(r.space.len(), 9);
        assert_eq!(r.space.dist(0, 4), 4.0);
        assert!(validate_metric(&r.space).is_valid());
        let r = geodesify(Arc::new(zplus(4)), 2.0, 1).unwrap();
        assert_eq!(r.edges, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4)]);
        let r = geodesify(Arc::new(zplus(0)), 1.0, 3).unwrap();
        assert_eq!((r.space.len(), r.edges.len()), (1, 0));
        assert!(geodesify(Arc::new(powers()), 1.0, 2).is_err());
    }

    #[test]
    fn phi_branches() {
        let r = geodesify(Arc::new(zplus(2)), 1.0, 4).unwrap();
        let at = |l: &str| r.space.index_of(l).unwrap();
        assert_eq!(phi_c(&r, at("1")).unwrap(), 1);
        assert_eq!(phi_c(&r, at("e:0:1:2/4")).unwrap(), 0);
        assert_eq!(phi_c(&r, at("e:0:1:3/4")).unwrap(), 1);
        assert_eq!(phi_c(&r, at("e:0:1:1/4")).unwrap(), 0);
    }

    #[test]
    fn geodesification_bounds_hold() {
        for c in [1.0, 2.0] {
            let r = geodesify(Arc::new(zplus(12)), c, 2).unwrap();
            let rep = check_geodesification(&r, 4).unwrap();
            assert!(rep.passes());
            assert_eq!(rep.surjectivity, 0.0);
        }
    }

    #[test]
    fn connectivity_replay_doubling() {
        let f = MapWitness::from_fn(Arc::new(zplus(10)), Arc::new(zplus(20)), |x| 2 * x).unwrap();
        let rep = replay_connectivity(&f, 1.0).unwrap();
        assert_eq!((rep.k, rep.d, rep.e), (1.0, 2.0, 2.0));
        assert!(rep.passes());
    }
}
