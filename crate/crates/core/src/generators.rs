//! Model spaces and truncation towers.
//!
//! Labels are stable across sizes, so the truncation of a model at size `n`
//! embeds into the truncation at size `m > n` by label.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{CoarseError, Result};
use crate::space::{FiniteMetricSpace, TOL};

/// `{0..n}` with `|i − j|`.
pub fn zplus(n: usize) -> FiniteMetricSpace {
    let labels = (0..=n).map(|i| i.to_string()).collect();
    let coords = (0..=n).map(|i| i as f64).collect();
    FiniteMetricSpace::from_line(labels, coords).expect("labels are distinct")
}

/// `{−n..n}²` with the ℓ¹ metric, row-major, labels `"i,j"`.
pub fn grid2_l1(n: usize) -> FiniteMetricSpace {
    let n = n as i64;
    let coords: Vec<(i64, i64)> = (-n..=n).flat_map(|i| (-n..=n).map(move |j| (i, j))).collect();
    let labels = coords.iter().map(|(i, j)| format!("{i},{j}")).collect();
    FiniteMetricSpace::from_fn(labels, |a, b| {
        let (p, q) = (coords[a], coords[b]);
        ((p.0 - q.0).abs() + (p.1 - q.1).abs()) as f64
    })
}

/// Full binary tree of the given depth with unit edges, breadth-first.
/// The root is `"b"`; children append `0` and `1`.
pub fn binary_tree(depth: usize) -> FiniteMetricSpace {
    let mut nodes: Vec<String> = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for w in &frontier {
            for bit in ['0', '1'] {
                let mut c = w.clone();
                c.push(bit);
                next.push(c);
            }
        }
        nodes.extend(next.iter().cloned());
        frontier = next;
    }
    let labels = nodes.iter().map(|w| format!("b{w}")).collect();
    FiniteMetricSpace::from_fn(labels, |a, b| word_distance(nodes[a].as_bytes(), nodes[b].as_bytes()))
}

fn word_distance(a: &[u8], b: &[u8]) -> f64 {
    let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    (a.len() + b.len() - 2 * common) as f64
}

/// Groups whose word metric is computed in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// Free group on `k` generators.
    Free(usize),
    /// ℤᵏ with the standard generators.
    Abelian(usize),
}

impl FromStr for Group {
    type Err = CoarseError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CoarseError::UnknownFamily(format!("cayley_ball({s})"));
        if let Some(k) = s.strip_prefix("free") {
            let k: usize = k.parse().map_err(|_| bad())?;
            if (1..=13).contains(&k) {
                return Ok(Group::Free(k));
            }
        } else if let Some(k) = s.strip_prefix('z') {
            let k: usize = k.parse().map_err(|_| bad())?;
            if k >= 1 {
                return Ok(Group::Abelian(k));
            }
        }
        Err(bad())
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Free(k) => write!(f, "free{k}"),
            Group::Abelian(k) => write!(f, "z{k}"),
        }
    }
}

/// Ball of the given radius around the identity in the Cayley graph,
/// with the word metric of the whole group.
pub fn cayley_ball(group: Group, radius: usize) -> FiniteMetricSpace {
    match group {
        Group::Free(k) => {
            // Generator g is letter 2g, its inverse 2g + 1.
            let mut words: Vec<Vec<u8>> = vec![Vec::new()];
            let mut frontier: Vec<Vec<u8>> = vec![Vec::new()];
            for _ in 0..radius {
                let mut next = Vec::new();
                for w in &frontier {
                    for letter in 0..(2 * k) as u8 {
                        if w.last().is_some_and(|&l| l ^ 1 == letter) {
                            continue;
                        }
                        let mut c = w.clone();
                        c.push(letter);
                        next.push(c);
                    }
                }
                words.extend(next.iter().cloned());
                frontier = next;
            }
            let labels = words
                .iter()
                .map(|w| {
                    if w.is_empty() {
                        "1".to_owned()
                    } else {
                        w.iter()
                            .map(|&l| {
                                let c = (b'a' + l / 2) as char;
                                if l % 2 == 0 {
                                    c
                                } else {
                                    c.to_ascii_uppercase()
                                }
                            })
                            .collect()
                    }
                })
                .collect();
            FiniteMetricSpace::from_fn(labels, |a, b| word_distance(&words[a], &words[b]))
        }
        Group::Abelian(k) => {
            let mut vecs: Vec<Vec<i64>> = Vec::new();
            for norm in 0..=radius as i64 {
                let mut layer = Vec::new();
                lattice_sphere(k, norm, &mut Vec::new(), &mut layer);
                layer.sort();
                vecs.extend(layer);
            }
            let labels = vecs
                .iter()
                .map(|v| v.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
                .collect();
            FiniteMetricSpace::from_fn(labels, |a, b| {
                vecs[a].iter().zip(&vecs[b]).map(|(x, y)| (x - y).abs()).sum::<i64>() as f64
            })
        }
    }
}

fn lattice_sphere(k: usize, norm: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    let used: i64 = prefix.iter().map(|x| x.abs()).sum();
    let left = norm - used;
    if prefix.len() + 1 == k {
        prefix.push(left);
        out.push(prefix.clone());
        prefix.pop();
        if left != 0 {
            prefix.push(-left);
            out.push(prefix.clone());
            prefix.pop();
        }
        return;
    }
    for v in -left..=left {
        prefix.push(v);
        lattice_sphere(k, norm, prefix, out);
        prefix.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Zplus,
    Grid2L1,
    BinaryTree,
    CayleyBall(Group),
}

impl Family {
    pub fn generate(self, size: usize) -> FiniteMetricSpace {
        match self {
            Family::Zplus => zplus(size),
            Family::Grid2L1 => grid2_l1(size),
            Family::BinaryTree => binary_tree(size),
            Family::CayleyBall(g) => cayley_ball(g, size),
        }
    }
}

impl FromStr for Family {
    type Err = CoarseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zplus" => Ok(Family::Zplus),
            "grid2_l1" | "grid2" => Ok(Family::Grid2L1),
            "binary_tree" => Ok(Family::BinaryTree),
            _ => match s.strip_prefix("cayley_ball(").and_then(|r| r.strip_suffix(')')) {
                Some(g) => Ok(Family::CayleyBall(g.parse()?)),
                None => Err(CoarseError::UnknownFamily(s.to_owned())),
            },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Zplus => write!(f, "zplus"),
            Family::Grid2L1 => write!(f, "grid2_l1"),
            Family::BinaryTree => write!(f, "binary_tree"),
            Family::CayleyBall(g) => write!(f, "cayley_ball({g})"),
        }
    }
}

/// Nested truncations of one model space.
#[derive(Debug, Clone)]
pub struct Tower {
    levels: Vec<Arc<FiniteMetricSpace>>,
    /// `embeddings[k][i]` is the image in level `k + 1` of point `i` of level `k`.
    embeddings: Vec<Vec<usize>>,
}

impl Tower {
    /// Matches points of consecutive levels by label and checks that every
    /// embedding is injective and preserves all distances.
    pub fn new(levels: Vec<Arc<FiniteMetricSpace>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(CoarseError::InvalidTower("no levels".into()));
        }
        let mut embeddings = Vec::with_capacity(levels.len() - 1);
        for (k, pair) in levels.windows(2).enumerate() {
            let (small, big) = (&pair[0], &pair[1]);
            if small.len() >= big.len() {
                return Err(CoarseError::InvalidTower(format!(
                    "level {} has {} points, level {} has {}",
                    k,
                    small.len(),
                    k + 1,
                    big.len()
                )));
            }
            let emb = (0..small.len())
                .map(|i| {
                    big.index_of(&small.label(i)).map_err(|_| {
                        CoarseError::InvalidTower(format!(
                            "point `{}` of level {k} missing from level {}",
                            small.label(i),
                            k + 1
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            for i in 0..small.len() {
                for j in i + 1..small.len() {
                    if (small.dist(i, j) - big.dist(emb[i], emb[j])).abs() > TOL {
                        return Err(CoarseError::InvalidTower(format!(
                            "embedding of level {k} is not isometric at ({}, {})",
                            small.label(i),
                            small.label(j)
                        )));
                    }
                }
            }
            embeddings.push(emb);
        }
        Ok(Self { levels, embeddings })
    }

    pub fn levels(&self) -> &[Arc<FiniteMetricSpace>] {
        &self.levels
    }

    pub fn embeddings(&self) -> &[Vec<usize>] {
        &self.embeddings
    }

    pub fn top(&self) -> &Arc<FiniteMetricSpace> {
        self.levels.last().expect("towers are nonempty")
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

pub fn make_tower(family: Family, sizes: &[usize]) -> Result<Tower> {
    if sizes.is_empty() {
        return Err(CoarseError::InvalidTower("empty size list".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoarseError::InvalidTower(format!(
            "sizes must be strictly increasing, got {sizes:?}"
        )));
    }
    Tower::new(sizes.iter().map(|&n| Arc::new(family.generate(n))).collect())
}

/// `family:size,size,...`, e.g. `zplus:64,128,256`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerSpec {
    pub family: Family,
    pub sizes: Vec<usize>,
}

impl FromStr for TowerSpec {
    type Err = CoarseError;

    fn from_str(s: &str) -> Result<Self> {
        let (fam, sizes) = s
            .rsplit_once(':')
            .ok_or_else(|| CoarseError::Parse(format!("tower spec `{s}` needs family:sizes")))?;
        let sizes = sizes
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| CoarseError::Parse(format!("bad size `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            family: fam.parse()?,
            sizes,
        })
    }
}

impl TowerSpec {
    pub fn build(&self) -> Result<Tower> {
        make_tower(self.family, &self.sizes)
    }
}
