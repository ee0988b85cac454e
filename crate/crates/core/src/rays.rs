//! Coarse rays: the ray criterion and extraction of a ray shadowing an
//! unbounded sequence.

use std::collections::VecDeque;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::control::{integer_scales, ControlTable};
use crate::error::{CoarseError, Result};
use crate::geodesic::{upper_control_in, ThresholdGraph};
use crate::metric::covering_number;
use crate::space::{FiniteMetricSpace, TOL};

/// Outcome of the ray criterion on a finite sequence.
#[derive(Debug, Clone, Serialize)]
pub struct RayCriterion {
    /// Consecutive points form a c-path.
    pub is_cpath: bool,
    pub max_step: f64,
    /// `Φ(d(x_i, x_j)) ≥ |i − j| + 1` for all `i < j`.
    pub criterion_holds: bool,
    /// First `(i, j)` violating the inequality.
    pub violation: Option<(usize, usize)>,
    /// `d(x_i, x_j) ≤ c·|i − j|` for all `i < j`.
    pub uniform: bool,
}

impl RayCriterion {
    pub fn passes(&self) -> bool {
        self.is_cpath && self.criterion_holds && self.uniform
    }
}

pub fn check_ray_criterion(
    seq: &[usize],
    space: &FiniteMetricSpace,
    c: f64,
    phi: &ControlTable,
) -> Result<RayCriterion> {
    for &x in seq {
        space.check_index(x)?;
    }
    let max_step = seq.windows(2).map(|w| space.dist(w[0], w[1])).fold(0.0, f64::max);
    let mut violation = None;
    let mut uniform = true;
    'outer: for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            let d = space.dist(seq[i], seq[j]);
            let gap = (j - i) as f64;
            if d > c * gap + TOL {
                uniform = false;
            }
            if phi.at(d)? < gap + 1.0 - TOL && violation.is_none() {
                violation = Some((i, j));
                if !uniform {
                    break 'outer;
                }
            }
        }
    }
    Ok(RayCriterion {
        is_cpath: max_step <= c + TOL,
        max_step,
        criterion_holds: violation.is_none(),
        violation,
        uniform,
    })
}

/// Minimal c-path step counts `d₀` from `base`.
pub fn step_counts(space: &FiniteMetricSpace, base: usize, c: f64) -> Result<Vec<u32>> {
    space.check_index(base)?;
    let g = ThresholdGraph::new(space, c);
    reachable_hops(space, &g, base)
}

fn reachable_hops(space: &FiniteMetricSpace, g: &ThresholdGraph, base: usize) -> Result<Vec<u32>> {
    let hops = g.hops_from(base);
    let lost: Vec<String> = hops
        .iter()
        .enumerate()
        .filter(|(_, &h)| h == u32::MAX)
        .map(|(x, _)| space.label(x).into_owned())
        .collect();
    if lost.is_empty() {
        Ok(hops)
    } else {
        Err(CoarseError::Unreachable {
            base: space.label(base).into_owned(),
            c: g.c,
            points: lost,
        })
    }
}

/// `C_i = { x : d₀(x) = i }` for `i = 0, 1, …`.
pub fn level_sets(space: &FiniteMetricSpace, base: usize, c: f64) -> Result<Vec<Vec<usize>>> {
    let hops = step_counts(space, base, c)?;
    Ok(group_levels(&hops))
}

fn group_levels(hops: &[u32]) -> Vec<Vec<usize>> {
    let depth = hops.iter().copied().max().unwrap_or(0) as usize;
    let mut levels = vec![Vec::new(); depth + 1];
    for (x, &h) in hops.iter().enumerate() {
        levels[h as usize].push(x);
    }
    levels
}

/// How the branch is chosen among the cover balls at each level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchRule {
    /// Most members of the sequence tail among the descendants.
    #[default]
    TailCount,
    /// Deepest tail member among the descendants.
    MaxDepth,
}

impl FromStr for BranchRule {
    type Err = CoarseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tail-count" => Ok(Self::TailCount),
            "max-depth" => Ok(Self::MaxDepth),
            other => Err(CoarseError::Parse(format!("unknown branch rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RayExtraction {
    /// `r₀, r₁, …`; `r_i` lies on level `C_i`.
    pub ray: Vec<usize>,
    /// The entourage constant `R₀`.
    pub constant: f64,
    pub step: f64,
    /// Indices into the input sequence of members within `R₀` of the ray.
    pub covered_indices: Vec<usize>,
    /// `witnesses[i]` is within `R₀` of `r_i`, on level `C_i`, and one c-step
    /// below `r_{i+1}`.
    pub witnesses: Vec<usize>,
    /// `|V_i|` for each level.
    pub branch_sizes: Vec<usize>,
}

/// Extracts a coarse ray from an unbounded sequence.
///
/// The basepoint is `seq[0]`. At level `i`, the points of `C_i ∩ V_{i−1}`
/// are covered greedily by `r0`-balls; each ball's seeds are its points in
/// `C_i ∩ V_{i−1}` and `V_i` is the set of their descendants under "lies on
/// a minimal c-path toward". The ball scoring best on the tail (second half)
/// of `seq` wins; ties go to the smaller center. The ray stops once no tail
/// member of `V_{i−1}` lies at level `i` or beyond.
pub fn extract_ray(
    space: &FiniteMetricSpace,
    seq: &[usize],
    r0: f64,
    c: f64,
    rule: BranchRule,
) -> Result<RayExtraction> {
    if seq.is_empty() {
        return Err(CoarseError::InvalidParameter("empty sequence".into()));
    }
    for &x in seq {
        space.check_index(x)?;
    }
    let base = seq[0];
    let required = space.diameter() / 2.0;
    let reach = seq.iter().map(|&x| space.dist(base, x)).fold(0.0, f64::max);
    if reach < required - TOL || reach == 0.0 {
        return Err(CoarseError::SequenceBounded { reach, required });
    }
    let g = ThresholdGraph::new(space, c);
    let hops = reachable_hops(space, &g, base)?;
    let levels = group_levels(&hops);
    let n = space.len();
    let tail: Vec<usize> = seq[seq.len() / 2..].to_vec();

    let mut in_v = vec![true; n];
    let mut ray = vec![base];
    let mut seeds_per_level: Vec<Vec<usize>> = vec![vec![base]];
    let mut branch_sizes = vec![n];
    for (i, level) in levels.iter().enumerate().skip(1) {
        let deepest = tail.iter().filter(|&&t| in_v[t]).map(|&t| hops[t] as usize).max();
        if deepest.is_none_or(|d| d < i) {
            break;
        }
        let cand: Vec<usize> = level.iter().copied().filter(|&x| in_v[x]).collect();
        let cover = covering_number(space, &cand, r0)?;
        let mut centers = cover.centers;
        centers.sort_unstable();
        let mut best: Option<(usize, usize, Vec<usize>, Vec<bool>)> = None;
        for &y in &centers {
            let seeds: Vec<usize> = cand.iter().copied().filter(|&s| space.dist(s, y) <= r0 + TOL).collect();
            let desc = descendants(&g, &hops, &seeds, &in_v);
            let score = match rule {
                BranchRule::TailCount => tail.iter().filter(|&&t| desc[t]).count(),
                BranchRule::MaxDepth => tail
                    .iter()
                    .filter(|&&t| desc[t])
                    .map(|&t| hops[t] as usize + 1)
                    .max()
                    .unwrap_or(0),
            };
            if best.as_ref().is_none_or(|b| score > b.0) {
                best = Some((score, y, seeds, desc));
            }
        }
        let Some((score, y, seeds, desc)) = best else {
            return Err(CoarseError::BranchLost { depth: i });
        };
        if score == 0 {
            return Err(CoarseError::BranchLost { depth: i });
        }
        in_v = desc;
        ray.push(y);
        seeds_per_level.push(seeds);
        branch_sizes.push(in_v.iter().filter(|&&b| b).count());
    }

    let witnesses = (0..ray.len())
        .map(|i| match ray.get(i + 1) {
            Some(&next) => seeds_per_level[i]
                .iter()
                .copied()
                .find(|&s| space.dist(s, next) <= c + TOL)
                .unwrap_or(ray[i]),
            None => ray[i],
        })
        .collect();
    let covered_indices = seq
        .iter()
        .enumerate()
        .filter(|&(_, &x)| ray.iter().any(|&r| space.dist(x, r) <= r0 + TOL))
        .map(|(k, _)| k)
        .collect();
    Ok(RayExtraction {
        ray,
        constant: r0,
        step: c,
        covered_indices,
        witnesses,
        branch_sizes,
    })
}

/// Points `z` in `within` reachable from `seeds` along edges `y → z` with
/// `d(y, z) ≤ c` and `d₀(z) = d₀(y) + 1`.
fn descendants(g: &ThresholdGraph, hops: &[u32], seeds: &[usize], within: &[bool]) -> Vec<bool> {
    let mut mark = vec![false; hops.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in seeds {
        if !mark[s] {
            mark[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            let v = v as usize;
            if !mark[v] && within[v] && hops[v] == hops[u] + 1 {
                mark[v] = true;
                queue.push_back(v);
            }
        }
    }
    mark
}

impl RayExtraction {
    /// Ray criterion at step `c + 2R₀` against the least upper control at
    /// step `c`, evaluated at `d + 2R₀`.
    pub fn verify(&self, space: &FiniteMetricSpace) -> Result<RayCriterion> {
        let pad = 2.0 * self.constant;
        let top = (space.diameter() + 2.0 * pad).ceil() as usize;
        let g = ThresholdGraph::new(space, self.step);
        let phi = upper_control_in(space, &g, &integer_scales(top))?;
        check_ray_criterion(&self.ray, space, self.step + pad, &phi.padded(pad))
    }

    /// Fraction of the sequence tail within `radius` of the ray.
    pub fn tail_coverage(&self, space: &FiniteMetricSpace, seq: &[usize], radius: f64) -> f64 {
        let tail = &seq[seq.len() / 2..];
        if tail.is_empty() {
            return 1.0;
        }
        let hit = tail
            .iter()
            .filter(|&&x| self.ray.iter().any(|&r| space.dist(x, r) <= radius + TOL))
            .count();
        hit as f64 / tail.len() as f64
    }

    /// Witness chain check: each witness is on the right level, within `R₀`
    /// of its ray point, and one c-step below the next ray point.
    pub fn witnesses_hold(&self, space: &FiniteMetricSpace) -> Result<bool> {
        let hops = step_counts(space, self.ray[0], self.step)?;
        Ok(self.witnesses.iter().enumerate().all(|(i, &w)| {
            hops[w] as usize == i
                && hops[self.ray[i]] as usize == i
                && space.dist(w, self.ray[i]) <= self.constant + TOL
                && self
                    .ray
                    .get(i + 1)
                    .is_none_or(|&next| space.dist(w, next) <= self.step + TOL)
        }))
    }
}
