//! Point maps between finite spaces and their measured coarse controls.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::control::ControlTable;
use crate::error::{CoarseError, Result};
use crate::metric::covering_number;
use crate::space::{FiniteMetricSpace, TOL};

/// A total point map `source → target`, stored by index.
#[derive(Debug, Clone)]
pub struct MapWitness {
    source: Arc<FiniteMetricSpace>,
    target: Arc<FiniteMetricSpace>,
    map: Vec<usize>,
}

impl MapWitness {
    pub fn new(source: Arc<FiniteMetricSpace>, target: Arc<FiniteMetricSpace>, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.len() {
            return Err(CoarseError::SpaceMismatch(format!(
                "map has {} entries for {} source points",
                map.len(),
                source.len()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&y| y >= target.len()) {
            return Err(CoarseError::IndexOutOfRange(bad));
        }
        Ok(Self { source, target, map })
    }

    pub fn identity(space: Arc<FiniteMetricSpace>) -> Self {
        let map = (0..space.len()).collect();
        Self {
            source: space.clone(),
            target: space,
            map,
        }
    }

    pub fn from_fn(
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        f: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let map = (0..source.len()).map(f).collect();
        Self::new(source, target, map)
    }

    /// Builds a map from a label table; every source label must be present.
    pub fn from_labels(
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        table: &HashMap<String, String>,
    ) -> Result<Self> {
        let map = (0..source.len())
            .map(|i| {
                let label = source.label(i);
                let image = table
                    .get(label.as_ref())
                    .ok_or_else(|| CoarseError::UnknownPoint(label.into_owned()))?;
                target.index_of(image)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, map)
    }

    pub fn source(&self) -> &Arc<FiniteMetricSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteMetricSpace> {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// Label table `source label → target label`.
    pub fn label_table(&self) -> Vec<(String, String)> {
        (0..self.source.len())
            .map(|x| {
                (
                    self.source.label(x).into_owned(),
                    self.target.label(self.map[x]).into_owned(),
                )
            })
            .collect()
    }

    /// Distinct image points, ascending.
    pub fn image(&self) -> Vec<usize> {
        let mut img = self.map.clone();
        img.sort_unstable();
        img.dedup();
        img
    }
}

/// Cheap structural check: same object, or same point labels in order.
pub fn same_space(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> bool {
    std::ptr::eq(a, b) || (a.len() == b.len() && (0..a.len()).all(|i| a.label(i) == b.label(i)))
}

/// Index of the least scale `s` with `d ≤ s` (within tolerance).
fn bucket(scales: &[f64], d: f64) -> usize {
    scales.partition_point(|&s| s < d - TOL)
}

fn prefix_max(mut v: Vec<f64>) -> Vec<f64> {
    for k in 1..v.len() {
        v[k] = v[k].max(v[k - 1]);
    }
    v
}

fn checked_scales(scales: &[f64]) -> Result<()> {
    crate::control::check_scales(scales)
}

/// `Φ(k) = max{ d(f x, f y) : d(x, y) ≤ k }`.
pub fn uniformity_control(w: &MapWitness, scales: &[f64]) -> Result<ControlTable> {
    checked_scales(scales)?;
    if w.source.is_empty() {
        return Err(CoarseError::EmptySpace);
    }
    let kmax = scales.last().copied().unwrap_or(0.0);
    let n = scales.len();
    let buckets = w.source.fold_pairs_within(
        kmax,
        || vec![0.0f64; n],
        |acc, x, y, d| {
            let b = bucket(scales, d);
            if b < n {
                let img = w.target.dist(w.map[x], w.map[y]);
                if img > acc[b] {
                    acc[b] = img;
                }
            }
        },
        merge_max,
    );
    Ok(ControlTable::from_parts(scales.to_vec(), prefix_max(buckets)))
}

fn merge_max(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x = x.max(y));
    a
}

/// Diameter of the preimage of `B(center, l)` for each radius `l`; 0 for an
/// empty preimage.
pub fn properness_profile(w: &MapWitness, radii: &[f64], center: usize) -> Result<ControlTable> {
    checked_scales(radii)?;
    w.target.check_index(center)?;
    let rmax = radii.last().copied().unwrap_or(0.0);
    let mut order: Vec<(f64, usize)> = (0..w.source.len())
        .map(|x| (w.target.dist(w.map[x], center), x))
        .filter(|&(d, _)| d <= rmax + TOL)
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut bounds = Vec::with_capacity(radii.len());
    let mut seen: Vec<usize> = Vec::new();
    let mut diam = 0.0f64;
    let mut k = 0;
    for &l in radii {
        while k < order.len() && order[k].0 <= l + TOL {
            let x = order[k].1;
            let far = seen.par_iter().map(|&y| w.source.dist(x, y)).reduce(|| 0.0, f64::max);
            diam = diam.max(far);
            seen.push(x);
            k += 1;
        }
        bounds.push(diam);
    }
    Ok(ControlTable::from_parts(radii.to_vec(), bounds))
}

/// `entry(r) = max{ d(x, x′) : d(f x, f x′) ≤ r }`.
pub fn injectivity_control(w: &MapWitness, scales: &[f64]) -> Result<ControlTable> {
    checked_scales(scales)?;
    let n = scales.len();
    let buckets = w.source.fold_pairs_within(
        f64::INFINITY,
        || vec![0.0f64; n],
        |acc, x, y, d| {
            let b = bucket(scales, w.target.dist(w.map[x], w.map[y]));
            if b < n && d > acc[b] {
                acc[b] = d;
            }
        },
        merge_max,
    );
    Ok(ControlTable::from_parts(scales.to_vec(), prefix_max(buckets)))
}

fn check_parallel(f: &MapWitness, g: &MapWitness) -> Result<()> {
    if !same_space(&f.source, &g.source) || !same_space(&f.target, &g.target) {
        return Err(CoarseError::SpaceMismatch("maps do not share source and target".into()));
    }
    Ok(())
}

/// `max_x d(f x, g x)`.
pub fn closeness_constant(f: &MapWitness, g: &MapWitness) -> Result<f64> {
    check_parallel(f, g)?;
    Ok(f.map
        .par_iter()
        .zip(&g.map)
        .map(|(&a, &b)| f.target.dist(a, b))
        .reduce(|| 0.0, f64::max))
}

/// Distance from each target point to the image, maximized.
pub fn surjectivity_constant(w: &MapWitness) -> f64 {
    let img = w.image();
    (0..w.target.len())
        .into_par_iter()
        .map(|y| img.iter().map(|&z| w.target.dist(y, z)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct QuasiInverse {
    pub inverse: MapWitness,
    /// `closeness(f ∘ g, id_target)`.
    pub forward: f64,
    /// `closeness(g ∘ f, id_source)`.
    pub backward: f64,
}

/// `g(y)` = the first source point (in canonical order) minimizing `d(f x, y)`.
pub fn quasi_inverse(w: &MapWitness) -> Result<QuasiInverse> {
    if w.source.is_empty() {
        return Err(CoarseError::EmptySpace);
    }
    let img = w.image();
    let first_pre: HashMap<usize, usize> = w.map.iter().enumerate().rev().map(|(x, &y)| (y, x)).collect();
    let inv: Vec<usize> = (0..w.target.len())
        .into_par_iter()
        .map(|y| {
            let mut best = (f64::INFINITY, usize::MAX);
            for &z in &img {
                let d = w.target.dist(y, z);
                let x = first_pre[&z];
                if d < best.0 - TOL || (d <= best.0 + TOL && x < best.1) {
                    best = (d.min(best.0), x);
                }
            }
            best.1
        })
        .collect();
    let inverse = MapWitness::new(w.target.clone(), w.source.clone(), inv)?;
    let fg = compose(&inverse, w)?;
    let gf = compose(w, &inverse)?;
    Ok(QuasiInverse {
        forward: closeness_constant(&fg, &MapWitness::identity(w.target.clone()))?,
        backward: closeness_constant(&gf, &MapWitness::identity(w.source.clone()))?,
        inverse,
    })
}

/// `g ∘ f`.
pub fn compose(f: &MapWitness, g: &MapWitness) -> Result<MapWitness> {
    if !same_space(&f.target, &g.source) {
        return Err(CoarseError::SpaceMismatch(
            "target of the first map is not the source of the second".into(),
        ));
    }
    Ok(MapWitness {
        source: f.source.clone(),
        target: g.target.clone(),
        map: f.map.iter().map(|&y| g.map[y]).collect(),
    })
}

/// `r ↦ Φ_X(φ(r + 2K)) + 2` on `scales`, each lookup snapping upward.
pub fn transport_upper_control(
    phi_x: &ControlTable,
    k: f64,
    varphi: &ControlTable,
    scales: &[f64],
) -> Result<ControlTable> {
    checked_scales(scales)?;
    let bounds = scales
        .iter()
        .map(|&r| Ok(phi_x.at(varphi.at(r + 2.0 * k)?)? + 2.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(ControlTable::from_parts(scales.to_vec(), bounds))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageCover {
    /// `S₀ = Φ_f(R₀)`.
    pub s0: f64,
    /// Greedy cover size of `B` at `R₀`.
    pub source_count: usize,
    /// Distinct images of the source centers.
    pub pushed_count: usize,
    /// Whether the pushed centers cover `f(B)` at `S₀`.
    pub pushed_covers: bool,
    /// Greedy cover size of `f(B)` at `S₀`, for reference.
    pub greedy_image_count: usize,
}

impl ImageCover {
    pub fn holds(&self) -> bool {
        self.pushed_covers && self.pushed_count <= self.source_count
    }
}

/// Covers `B` by `R₀`-balls, pushes the centers forward, and checks that the
/// result covers `f(B)` by `S₀`-balls with `S₀ = Φ_f(R₀)`.
pub fn image_cover(w: &MapWitness, subset: &[usize], r0: f64) -> Result<ImageCover> {
    let s0 = uniformity_control(w, &[r0])?.bounds()[0];
    let source = covering_number(&w.source, subset, r0)?;
    let mut img: Vec<usize> = subset.iter().map(|&x| w.map[x]).collect();
    img.sort_unstable();
    img.dedup();
    let mut pushed: Vec<usize> = source.centers.iter().map(|&x| w.map[x]).collect();
    pushed.sort_unstable();
    pushed.dedup();
    let pushed_covers = img
        .iter()
        .all(|&y| pushed.iter().any(|&z| w.target.dist(y, z) <= s0 + TOL));
    let greedy = covering_number(&w.target, &img, s0)?;
    Ok(ImageCover {
        s0,
        source_count: source.count(),
        pushed_count: pushed.len(),
        pushed_covers,
        greedy_image_count: greedy.count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::integer_scales;
    use crate::generators::zplus;

    fn z(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(zplus(n))
    }

    #[test]
    fn identity_controls() {
        let x = z(20);
        let id = MapWitness::identity(x.clone());
        let s = integer_scales(6);
        let u = uniformity_control(&id, &s).unwrap();
        assert_eq!(u.bounds(), &s[..]);
        let inj = injectivity_control(&id, &s).unwrap();
        assert_eq!(inj.bounds(), &s[..]);
        let p = properness_profile(&id, &s, 10).unwrap();
        assert!(p.entries().all(|(l, b)| b <= 2.0 * l));
        assert_eq!(surjectivity_constant(&id), 0.0);
    }

    #[test]
    fn doubling_and_composition() {
        let d1 = MapWitness::from_fn(z(10), z(20), |x| 2 * x).unwrap();
        let d2 = MapWitness::from_fn(z(20), z(40), |x| 2 * x).unwrap();
        let s = integer_scales(5);
        let u = uniformity_control(&d1, &s).unwrap();
        assert!(u.entries().all(|(k, b)| b == 2.0 * k));
        let dd = compose(&d1, &d2).unwrap();
        let u = uniformity_control(&dd, &s).unwrap();
        assert!(u.entries().all(|(k, b)| b == 4.0 * k));
    }

    #[test]
    fn constant_map_is_neither_proper_nor_injective() {
        let c = MapWitness::from_fn(z(12), z(12), |_| 0).unwrap();
        let p = properness_profile(&c, &[0.0, 1.0, 3.0], 0).unwrap();
        assert!(p.bounds().iter().all(|&b| b == 12.0));
        let inj = injectivity_control(&c, &[0.0]).unwrap();
        assert_eq!(inj.bounds(), &[12.0]);
        let q = quasi_inverse(&c).unwrap();
        assert_eq!(q.backward, 12.0);
    }

    #[test]
    fn halving_controls() {
        let h = MapWitness::from_fn(z(30), z(15), |x| x / 2).unwrap();
        let s = integer_scales(5);
        let inj = injectivity_control(&h, &s).unwrap();
        assert!(inj.entries().all(|(r, b)| b == 2.0 * r + 1.0));
        let p = properness_profile(&h, &s, 7).unwrap();
        assert!(p.entries().all(|(l, b)| b <= 2.0 * (2.0 * l + 1.0)));
        let p0 = properness_profile(&h, &s, 0).unwrap();
        assert!(p0.entries().all(|(l, b)| b <= 2.0 * l + 1.0));
    }

    #[test]
    fn closeness_and_surjectivity() {
        let x = z(20);
        let id = MapWitness::identity(x.clone());
        let sh = MapWitness::from_fn(x.clone(), x.clone(), |i| (i + 3).min(20)).unwrap();
        assert_eq!(closeness_constant(&id, &sh).unwrap(), 3.0);
        assert_eq!(closeness_constant(&sh, &id).unwrap(), 3.0);
        assert_eq!(closeness_constant(&id, &id).unwrap(), 0.0);
        let evens = Arc::new(x.restrict(&(0..=20).step_by(2).collect::<Vec<_>>()));
        let inc = MapWitness::from_fn(evens, x, |i| 2 * i).unwrap();
        assert_eq!(surjectivity_constant(&inc), 1.0);
    }

    #[test]
    fn net_inclusion_quasi_inverse() {
        let x = z(10);
        let net = crate::metric::greedy_net(&x, 2.0).unwrap();
        let sub = Arc::new(x.restrict(&net.points));
        let pts = net.points.clone();
        let inc = MapWitness::from_fn(sub, x, |i| pts[i]).unwrap();
        let q = quasi_inverse(&inc).unwrap();
        assert!(q.forward <= 2.0);
        assert_eq!(q.backward, 0.0);
        assert!(surjectivity_constant(&inc) <= 2.0);
    }

    #[test]
    fn transport_examples() {
        let s = integer_scales(40);
        let id = ControlTable::from_fn(&s, |r| r).unwrap();
        let succ = ControlTable::from_fn(&s, |r| r + 1.0).unwrap();
        let dbl = ControlTable::from_fn(&s, |r| 2.0 * r).unwrap();
        let one = ControlTable::from_fn(&s, |_| 1.0).unwrap();
        let q = integer_scales(10);
        let t = transport_upper_control(&succ, 0.0, &id, &q).unwrap();
        assert!(t.entries().all(|(r, b)| b == r + 3.0));
        let t = transport_upper_control(&one, 0.0, &id, &q).unwrap();
        assert!(t.bounds().iter().all(|&b| b == 3.0));
        let t = transport_upper_control(&succ, 2.0, &dbl, &q).unwrap();
        assert!(t.entries().all(|(r, b)| b == 2.0 * r + 11.0));
        assert!(transport_upper_control(&succ, 2.0, &dbl, &[30.0]).is_err());
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let a = MapWitness::identity(z(3));
        let b = MapWitness::identity(z(4));
        assert!(closeness_constant(&a, &b).is_err());
        assert!(compose(&a, &b).is_err());
        assert!(MapWitness::new(z(2), z(2), vec![0, 5, 1]).is_err());
    }

    #[test]
    fn image_cover_of_contraction() {
        let h = MapWitness::from_fn(z(30), z(15), |x| x / 2).unwrap();
        let all: Vec<usize> = (0..=30).collect();
        let c = image_cover(&h, &all, 2.0).unwrap();
        assert!(c.holds());
    }
}
