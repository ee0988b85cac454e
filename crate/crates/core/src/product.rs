//! The asymptotic product `X ∗ Y`, its projections, and the pullback
//! mediating map.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CoarseError, Result};
use crate::generators::zplus;
use crate::geodesic::connectivity_threshold;
use crate::maps::{closeness_constant, compose, same_space, MapWitness};
use crate::space::{Combiner, FiniteMetricSpace, TOL};

/// `⌊d + tol⌋`, so that distances that are integers up to rounding floor to
/// themselves.
#[inline]
pub fn floor_radius(d: f64) -> usize {
    (d + TOL).floor() as usize
}

/// `r_p : x ↦ ⌊d(x, p)⌋` into `zplus(⌈diameter⌉)`.
pub fn floor_distance_map(space: Arc<FiniteMetricSpace>, p: usize) -> Result<MapWitness> {
    space.check_index(p)?;
    let top = (space.diameter() - TOL).ceil().max(0.0) as usize;
    let target = Arc::new(zplus(top));
    let map = (0..space.len()).map(|x| floor_radius(space.dist(x, p))).collect();
    MapWitness::new(space, target, map)
}

/// The full product `X × Y` with the given combiner.
pub fn cartesian_product(
    left: Arc<FiniteMetricSpace>,
    right: Arc<FiniteMetricSpace>,
    combiner: Combiner,
) -> FiniteMetricSpace {
    let (a, b) = (left.len() as u32, right.len() as u32);
    let pairs = (0..a).flat_map(|x| (0..b).map(move |y| (x, y))).collect();
    FiniteMetricSpace::from_pairs(left, right, pairs, combiner)
}

/// `X ∗ Y`: pairs with `|d(x, p) − d(y, q)| ≤ R`.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    pub space: Arc<FiniteMetricSpace>,
    pub left: Arc<FiniteMetricSpace>,
    pub right: Arc<FiniteMetricSpace>,
    pub p: usize,
    pub q: usize,
    pub r: f64,
    pub combiner: Combiner,
}

/// `connectivity_threshold(Y) + 1`.
pub fn default_tolerance(right: &FiniteMetricSpace) -> f64 {
    connectivity_threshold(right) + 1.0
}

/// Right points sorted by distance to `q`, with those distances.
fn sorted_radii(right: &FiniteMetricSpace, q: usize) -> Vec<(f64, u32)> {
    let mut v: Vec<(f64, u32)> = (0..right.len()).map(|y| (right.dist(y, q), y as u32)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    v
}

/// Entries of `sorted` with radius in `[lo − tol, hi + tol]`.
fn radius_window(sorted: &[(f64, u32)], lo: f64, hi: f64) -> &[(f64, u32)] {
    let a = sorted.partition_point(|e| e.0 < lo - TOL);
    let b = sorted.partition_point(|e| e.0 <= hi + TOL);
    &sorted[a..b.max(a)]
}

pub fn build_product(
    left: Arc<FiniteMetricSpace>,
    p: usize,
    right: Arc<FiniteMetricSpace>,
    q: usize,
    r: f64,
    combiner: Combiner,
) -> Result<ProductSpace> {
    left.check_index(p)?;
    right.check_index(q)?;
    if r.is_nan() || r < 0.0 {
        return Err(CoarseError::InvalidParameter("tolerance R must be ≥ 0".into()));
    }
    let radii = sorted_radii(&right, q);
    let pairs: Vec<(u32, u32)> = (0..left.len())
        .into_par_iter()
        .flat_map_iter(|x| {
            let dx = left.dist(x, p);
            radius_window(&radii, dx - r, dx + r)
                .iter()
                .map(move |&(_, y)| (x as u32, y))
                .collect::<Vec<_>>()
        })
        .collect();
    if pairs.is_empty() {
        return Err(CoarseError::EmptyProduct(r));
    }
    let space = Arc::new(FiniteMetricSpace::from_pairs(
        left.clone(),
        right.clone(),
        pairs,
        combiner,
    ));
    Ok(ProductSpace {
        space,
        left,
        right,
        p,
        q,
        r,
        combiner,
    })
}

impl ProductSpace {
    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// `|d(x, p) − d(y, q)|`.
    pub fn radius_gap(&self, x: usize, y: usize) -> f64 {
        (self.left.dist(x, self.p) - self.right.dist(y, self.q)).abs()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.space.pair_index(x, y).is_some()
    }

    pub fn index(&self, x: usize, y: usize) -> Option<usize> {
        self.space.pair_index(x, y)
    }

    pub fn project_left(&self) -> MapWitness {
        let map = (0..self.len()).map(|i| self.space.pair(i).unwrap().0).collect();
        MapWitness::new(self.space.clone(), self.left.clone(), map).expect("pairs index the left factor")
    }

    pub fn project_right(&self) -> MapWitness {
        let map = (0..self.len()).map(|i| self.space.pair(i).unwrap().1).collect();
        MapWitness::new(self.space.clone(), self.right.clone(), map).expect("pairs index the right factor")
    }

    fn same_factors(&self, other: &ProductSpace) -> Result<()> {
        if !same_space(&self.left, &other.left)
            || !same_space(&self.right, &other.right)
            || self.combiner != other.combiner
        {
            return Err(CoarseError::SpaceMismatch(
                "products have different factors or combiners".into(),
            ));
        }
        Ok(())
    }

    /// `max_{(x, y)} |⌊d(x, p)⌋ − ⌊d(y, q)⌋|`: how far the square
    /// `r_p ∘ p_X`, `r_q ∘ p_Y` is from commuting.
    pub fn commute_closeness(&self) -> f64 {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let (x, y) = self.space.pair(i).unwrap();
                let a = floor_radius(self.left.dist(x, self.p)) as f64;
                let b = floor_radius(self.right.dist(y, self.q)) as f64;
                (a - b).abs()
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Max over points of `from` of the distance to the nearest point of `to`,
/// measured in the ambient `X × Y`.
fn nearest_gap(from: &ProductSpace, to: &ProductSpace) -> f64 {
    let comb = from.combiner;
    (0..from.len())
        .into_par_iter()
        .map(|i| {
            let (x, y) = from.space.pair(i).unwrap();
            if to.contains(x, y) {
                return 0.0;
            }
            (0..to.len())
                .map(|j| {
                    let (a, b) = to.space.pair(j).unwrap();
                    comb.combine(from.left.dist(x, a), from.right.dist(y, b))
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct InclusionReport {
    /// Surjectivity constant of the inclusion.
    pub constant: f64,
    /// Whether `R ≤ 2R′ − c − 2` holds for `R′` = small, `R` = big.
    pub hypothesis_holds: bool,
}

/// Distance from any pair of `big` to the pair set of `small`, for the
/// inclusion `small ⊆ big` with equal basepoints.
pub fn inclusion_constant(small: &ProductSpace, big: &ProductSpace, c: f64) -> Result<InclusionReport> {
    small.same_factors(big)?;
    if small.p != big.p || small.q != big.q {
        return Err(CoarseError::SpaceMismatch("products use different basepoints".into()));
    }
    if small.r > big.r + TOL {
        return Err(CoarseError::InvalidParameter(format!(
            "inclusion needs R′ = {} ≤ R = {}",
            small.r, big.r
        )));
    }
    Ok(InclusionReport {
        constant: nearest_gap(big, small),
        hypothesis_holds: big.r <= 2.0 * small.r - c - 2.0 + TOL,
    })
}

/// Max over pairs of `a` of the distance to the pair set of `b`; zero iff
/// `a ⊆ b`. Basepoints may differ.
pub fn containment_defect(a: &ProductSpace, b: &ProductSpace) -> Result<f64> {
    a.same_factors(b)?;
    Ok(nearest_gap(a, b))
}

/// The mediating map `⟨f, g⟩ : Z → X ∗ Y` with its constants.
#[derive(Debug, Clone)]
pub struct Mediation {
    pub map: MapWitness,
    /// `ḡ`, the radius-corrected second component.
    pub g_bar: MapWitness,
    /// `max_z d(ḡ z, g z)`.
    pub k: f64,
    /// `max_z |d(f z, p) − d(g z, q)|`.
    pub r_comp: f64,
}

/// Builds `⟨f, g⟩(z) = (f z, ḡ z)` with `ḡ(z)` the point nearest to `g z`
/// among `{ y : |d(f z, p) − d(y, q)| ≤ c }` (smallest index on ties).
///
/// `slack` bounds the measured compatibility gap; `c` must not exceed the
/// product tolerance so that every `(f z, ḡ z)` is a product point.
pub fn mediate(f: &MapWitness, g: &MapWitness, prod: &ProductSpace, c: f64, slack: f64) -> Result<Mediation> {
    if !same_space(f.source(), g.source()) {
        return Err(CoarseError::SpaceMismatch("f and g have different sources".into()));
    }
    if !same_space(f.target(), &prod.left) || !same_space(g.target(), &prod.right) {
        return Err(CoarseError::SpaceMismatch(
            "f and g must land in the product factors".into(),
        ));
    }
    if c > prod.r + TOL {
        return Err(CoarseError::InvalidParameter(format!(
            "slack c = {c} exceeds the product tolerance {}",
            prod.r
        )));
    }
    let z = f.source();
    let gaps: Vec<f64> = (0..z.len()).map(|i| prod.radius_gap(f.apply(i), g.apply(i))).collect();
    if let Some(i) = gaps.iter().position(|&gap| gap > slack + TOL) {
        return Err(CoarseError::Incompatible {
            point: z.label(i).into_owned(),
            gap: gaps[i],
            slack,
        });
    }
    let r_comp = gaps.iter().copied().fold(0.0, f64::max);
    let radii = sorted_radii(&prod.right, prod.q);
    let bar: Vec<Result<usize>> = (0..z.len())
        .into_par_iter()
        .map(|i| {
            let rx = prod.left.dist(f.apply(i), prod.p);
            let target = g.apply(i);
            radius_window(&radii, rx - c, rx + c)
                .iter()
                .map(|&(_, y)| (prod.right.dist(y as usize, target), y as usize))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, y)| y)
                .ok_or_else(|| CoarseError::NoCandidate {
                    point: z.label(i).into_owned(),
                    c,
                })
        })
        .collect();
    let bar = bar.into_iter().collect::<Result<Vec<_>>>()?;
    let g_bar = MapWitness::new(z.clone(), prod.right.clone(), bar)?;
    let map = (0..z.len())
        .map(|i| {
            prod.index(f.apply(i), g_bar.apply(i)).ok_or_else(|| {
                CoarseError::SpaceMismatch(format!("mediated pair for `{}` is not in the product", z.label(i)))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k = closeness_constant(&g_bar, g)?;
    Ok(Mediation {
        map: MapWitness::new(z.clone(), prod.space.clone(), map)?,
        g_bar,
        k,
        r_comp,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Uniqueness {
    /// `closeness(h, ⟨f, g⟩)`.
    pub constant: f64,
    /// `closeness(p_X h, f) + closeness(p_Y h, g) + K`.
    pub bound: f64,
}

impl Uniqueness {
    pub fn holds(&self) -> bool {
        self.constant <= self.bound + TOL
    }
}

pub fn mediator_uniqueness(
    h: &MapWitness,
    f: &MapWitness,
    g: &MapWitness,
    prod: &ProductSpace,
    med: &Mediation,
) -> Result<Uniqueness> {
    let hx = compose(h, &prod.project_left())?;
    let hy = compose(h, &prod.project_right())?;
    Ok(Uniqueness {
        constant: closeness_constant(h, &med.map)?,
        bound: closeness_constant(&hx, f)? + closeness_constant(&hy, g)? + med.k,
    })
}

/// `x ↦ (x, ⌊d(x, p)⌋)` into `X ∗ Y` where the right factor has a point at
/// each integer radius from `q` (a truncated half-line based at `q`).
pub fn canonical_embed(prod: &ProductSpace) -> Result<MapWitness> {
    let radii = sorted_radii(&prod.right, prod.q);
    let map = (0..prod.left.len())
        .map(|x| {
            let n = floor_radius(prod.left.dist(x, prod.p)) as f64;
            let y = radius_window(&radii, n, n)
                .first()
                .map(|&(_, y)| y as usize)
                .ok_or_else(|| CoarseError::SpaceMismatch(format!("right factor has no point at radius {n}")))?;
            prod.index(x, y).ok_or_else(|| {
                CoarseError::SpaceMismatch(format!(
                    "`{}` and its radius do not form a product pair",
                    prod.left.label(x)
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MapWitness::new(prod.left.clone(), prod.space.clone(), map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::integer_scales;
    use crate::generators::grid2_l1;
    use crate::maps::{surjectivity_constant, uniformity_control};

    fn z(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(zplus(n))
    }

    #[test]
    fn floor_map_examples() {
        let r = floor_distance_map(z(9), 0).unwrap();
        assert_eq!(r.map(), &(0..=9).collect::<Vec<_>>()[..]);
        assert_eq!(r.target().len(), 10);
        let g = Arc::new(grid2_l1(4));
        let p = g.index_of("0,0").unwrap();
        let r = floor_distance_map(g.clone(), p).unwrap();
        assert_eq!(r.apply(g.index_of("2,3").unwrap()), 5);
    }

    #[test]
    fn diagonal_product() {
        let prod = build_product(z(10), 0, z(10), 0, 0.0, Combiner::Max).unwrap();
        assert_eq!(prod.len(), 11);
        let prod = build_product(z(10), 0, z(10), 0, 1.0, Combiner::Max).unwrap();
        assert!(prod.contains(3, 4));
        assert!(!prod.contains(3, 10));
    }

    #[test]
    fn basepoint_pair_always_present() {
        let far = Arc::new(FiniteMetricSpace::from_fn(vec!["a".into(), "b".into()], |i, j| {
            if i == j {
                0.0
            } else {
                50.0
            }
        }));
        let prod = build_product(far, 0, z(3), 3, 0.0, Combiner::Max).unwrap();
        assert_eq!(prod.len(), 1);
        assert!(prod.contains(0, 3));
        assert!(build_product(z(3), 0, z(3), 0, -1.0, Combiner::Max).is_err());
    }

    #[test]
    fn projections_are_one_lipschitz() {
        let g = Arc::new(grid2_l1(3));
        let p = g.index_of("0,0").unwrap();
        let prod = build_product(g, p, z(8), 0, 1.0, Combiner::Max).unwrap();
        let s = integer_scales(4);
        for proj in [prod.project_left(), prod.project_right()] {
            let u = uniformity_control(&proj, &s).unwrap();
            assert!(u.entries().all(|(k, b)| b <= k));
        }
    }

    #[test]
    fn inclusion_examples() {
        let a = build_product(z(20), 0, z(20), 0, 3.0, Combiner::Max).unwrap();
        let same = inclusion_constant(&a, &a, 1.0).unwrap();
        assert_eq!(same.constant, 0.0);
        let b = build_product(z(20), 0, z(20), 0, 4.0, Combiner::Max).unwrap();
        let rep = inclusion_constant(&a, &b, 1.0).unwrap();
        assert_eq!(rep.constant, 1.0);
        assert!(!rep.hypothesis_holds);
        assert!(inclusion_constant(&b, &a, 1.0).is_err());
    }

    #[test]
    fn basepoint_change_is_contained() {
        let a = build_product(z(20), 0, z(20), 0, 2.0, Combiner::Max).unwrap();
        let b = build_product(z(20), 3, z(20), 1, 3.0 + 1.0 + 2.0, Combiner::Max).unwrap();
        assert_eq!(containment_defect(&a, &b).unwrap(), 0.0);
        assert!(containment_defect(&b, &a).unwrap() > 0.0);
    }

    #[test]
    fn mediate_identity() {
        let x = z(12);
        let prod = build_product(x.clone(), 0, x.clone(), 0, 0.0, Combiner::Max).unwrap();
        let id = MapWitness::identity(x.clone());
        let m = mediate(&id, &id, &prod, 0.0, 0.0).unwrap();
        assert_eq!(m.k, 0.0);
        for i in 0..=12 {
            assert_eq!(prod.space.pair(m.map.apply(i)), Some((i, i)));
        }
    }

    #[test]
    fn mediate_shift() {
        let x = z(30);
        let prod = build_product(x.clone(), 0, x.clone(), 0, 1.0, Combiner::Max).unwrap();
        let id = MapWitness::identity(x.clone());
        let g = MapWitness::from_fn(x.clone(), x.clone(), |i| (i + 3).min(30)).unwrap();
        let m = mediate(&id, &g, &prod, 1.0, 3.0).unwrap();
        assert!(m.k <= 4.0);
        assert_eq!(m.r_comp, 3.0);
        let px = compose(&m.map, &prod.project_left()).unwrap();
        assert_eq!(px.map(), id.map());
        let u = mediator_uniqueness(&m.map, &id, &g, &prod, &m).unwrap();
        assert_eq!(u.constant, 0.0);
    }

    #[test]
    fn mediate_rejects_incompatible_maps() {
        let x = z(10);
        let prod = build_product(x.clone(), 0, x.clone(), 0, 1.0, Combiner::Max).unwrap();
        let id = MapWitness::identity(x.clone());
        let zero = MapWitness::from_fn(x.clone(), x.clone(), |_| 0).unwrap();
        let err = mediate(&id, &zero, &prod, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, CoarseError::Incompatible { ref point, .. } if point == "2"));
    }

    #[test]
    fn embed_into_half_line_product() {
        let x = z(16);
        let prod = build_product(x.clone(), 0, z(16), 0, 2.0, Combiner::Max).unwrap();
        let e = canonical_embed(&prod).unwrap();
        for i in 0..=16 {
            assert_eq!(prod.space.pair(e.apply(i)), Some((i, i)));
        }
        assert!(surjectivity_constant(&e) <= 2.0);
        assert!(prod.commute_closeness() <= 3.0);
    }
}
