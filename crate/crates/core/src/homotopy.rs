//! Coarse homotopies in both forms: maps on `X ∗ ⅁([0,1])` and parameter
//! families `(h_t)_t`, with conversions between them.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{param_f64, param_label, ConeSpace, Param};
use crate::control::ControlTable;
use crate::error::{CoarseError, Result};
use crate::maps::{closeness_constant, properness_profile, same_space, uniformity_control, MapWitness};
use crate::product::{build_product, floor_radius, ProductSpace};
use crate::space::{Combiner, FiniteMetricSpace, TOL};

/// `X ∗ ⅁([0,1])` with the cone based at `(0, 1)`.
#[derive(Debug, Clone)]
pub struct HomotopyDomain {
    pub prod: ProductSpace,
    pub cone: ConeSpace,
}

impl HomotopyDomain {
    pub fn new(x: Arc<FiniteMetricSpace>, p: usize, cone: ConeSpace, r: f64) -> Result<Self> {
        if cone.params.is_none() {
            return Err(CoarseError::InvalidParameter(
                "homotopy domains need an interval cone".into(),
            ));
        }
        let q = cone
            .apex_point()
            .ok_or_else(|| CoarseError::InvalidParameter("cone lacks the point 0@1".into()))?;
        let prod = build_product(x, p, cone.space.clone(), q, r, Combiner::Max)?;
        Ok(Self { prod, cone })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.prod.space
    }

    pub fn x(&self) -> &Arc<FiniteMetricSpace> {
        &self.prod.left
    }

    pub fn len(&self) -> usize {
        self.prod.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prod.is_empty()
    }

    /// `(x, t, level)` of domain point `k`.
    pub fn point(&self, k: usize) -> (usize, Param, u32) {
        let (x, c) = self.prod.space.pair(k).expect("product point");
        let (_, level) = self.cone.point(c);
        (x, self.cone.param(c).expect("interval cone"), level)
    }

    /// Domain index of `(x, (t, level))`, if present.
    pub fn index(&self, x: usize, t: &Param, level: u32) -> Option<usize> {
        self.prod.index(x, self.cone.index(t, level)?)
    }

    /// Largest cone level.
    pub fn levels(&self) -> u32 {
        self.cone.levels
    }
}

/// `h(x, (0, i)) = f(x)` and `h(x, (t, i)) = g(x)` for `t > 0`.
pub fn homotopy_from_close(f: &MapWitness, g: &MapWitness, dom: &HomotopyDomain) -> Result<MapWitness> {
    closeness_constant(f, g)?;
    if !same_space(f.source(), dom.x()) {
        return Err(CoarseError::SpaceMismatch(
            "maps are not defined on the domain's X".into(),
        ));
    }
    let zero = Param::from_integer(0);
    let map = (0..dom.len())
        .map(|k| {
            let (x, t, _) = dom.point(k);
            if t == zero {
                f.apply(x)
            } else {
                g.apply(x)
            }
        })
        .collect();
    MapWitness::new(dom.space().clone(), f.target().clone(), map)
}

/// Whether `h(x, (t, i)) = f(x)` at every domain point with parameter `t`.
pub fn restricts_to(h: &MapWitness, dom: &HomotopyDomain, t: &Param, f: &MapWitness) -> bool {
    (0..dom.len()).all(|k| {
        let (x, s, _) = dom.point(k);
        s != *t || h.apply(k) == f.apply(x)
    })
}

#[derive(Debug, Clone)]
pub struct HomotopyMapReport {
    /// Uniformity control of `h` on the product metric.
    pub uniformity: ControlTable,
    /// Diameter of `h⁻¹(B(center, l))` in the product.
    pub properness: ControlTable,
    /// Diameter of `p_X(h⁻¹(B(center, l)))` in `X`.
    pub left_properness: ControlTable,
}

pub fn check_homotopy_map(
    h: &MapWitness,
    dom: &HomotopyDomain,
    scales: &[f64],
    radii: &[f64],
    center: usize,
) -> Result<HomotopyMapReport> {
    if !same_space(h.source(), dom.space()) {
        return Err(CoarseError::SpaceMismatch("map is not defined on the domain".into()));
    }
    let uniformity = uniformity_control(h, scales)?;
    let properness = properness_profile(h, radii, center)?;
    let x = dom.x();
    let mut bounds = Vec::with_capacity(radii.len());
    for &l in radii {
        let mut pre: Vec<usize> = (0..dom.len())
            .filter(|&k| h.target().dist(h.apply(k), center) <= l + TOL)
            .map(|k| dom.point(k).0)
            .collect();
        pre.sort_unstable();
        pre.dedup();
        let diam = pre
            .par_iter()
            .map(|&a| pre.iter().map(|&b| x.dist(a, b)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max);
        bounds.push(diam);
    }
    Ok(HomotopyMapReport {
        uniformity,
        properness,
        left_properness: ControlTable::from_parts(radii.to_vec(), bounds),
    })
}

/// Tower verdict: the reports at the two largest levels agree.
pub fn tower_stable(reports: &[HomotopyMapReport]) -> bool {
    match reports {
        [.., a, b] => a.uniformity.agrees_with(&b.uniformity, 0.0) && a.properness.agrees_with(&b.properness, 0.0),
        _ => true,
    }
}

/// A family `(h_t)` on a finite sorted parameter grid.
#[derive(Debug, Clone)]
pub struct HomotopyFamily {
    grid: Vec<Param>,
    maps: Vec<MapWitness>,
    /// Convergence budget `c` in `|t − t_i| < c/i`.
    pub c: f64,
}

impl HomotopyFamily {
    /// The grid must be strictly increasing and contain 0 and 1.
    pub fn new(grid: Vec<Param>, maps: Vec<MapWitness>, c: f64) -> Result<Self> {
        if grid.first() != Some(&Param::from_integer(0)) || grid.last() != Some(&Param::from_integer(1)) {
            return Err(CoarseError::GridEndpoints);
        }
        Self::on_grid(grid, maps, c)
    }

    fn on_grid(grid: Vec<Param>, maps: Vec<MapWitness>, c: f64) -> Result<Self> {
        if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoarseError::InvalidParameter(
                "parameter grid must be nonempty and strictly increasing".into(),
            ));
        }
        if grid.len() != maps.len() {
            return Err(CoarseError::InvalidParameter(format!(
                "{} parameters but {} maps",
                grid.len(),
                maps.len()
            )));
        }
        if maps
            .windows(2)
            .any(|w| !same_space(w[0].source(), w[1].source()) || !same_space(w[0].target(), w[1].target()))
        {
            return Err(CoarseError::SpaceMismatch(
                "family maps differ in source or target".into(),
            ));
        }
        if c.is_nan() || c <= 0.0 {
            return Err(CoarseError::InvalidParameter("budget c must be > 0".into()));
        }
        Ok(Self { grid, maps, c })
    }

    pub fn from_fn(
        grid: Vec<Param>,
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        c: f64,
        f: impl Fn(&Param, usize) -> usize,
    ) -> Result<Self> {
        let maps = grid
            .iter()
            .map(|t| MapWitness::from_fn(source.clone(), target.clone(), |x| f(t, x)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, maps, c)
    }

    pub fn grid(&self) -> &[Param] {
        &self.grid
    }

    pub fn maps(&self) -> &[MapWitness] {
        &self.maps
    }

    pub fn at(&self, t: &Param) -> Option<&MapWitness> {
        self.grid.binary_search(t).ok().map(|k| &self.maps[k])
    }

    pub fn source(&self) -> &Arc<FiniteMetricSpace> {
        self.maps[0].source()
    }

    pub fn target(&self) -> &Arc<FiniteMetricSpace> {
        self.maps[0].target()
    }

    /// The subfamily on `[lo, hi]` (grid points only).
    pub fn restrict(&self, lo: &Param, hi: &Param) -> Result<Self> {
        let (grid, maps): (Vec<Param>, Vec<MapWitness>) = self
            .grid
            .iter()
            .zip(&self.maps)
            .filter(|(t, _)| *t >= lo && *t <= hi)
            .map(|(t, m)| (*t, m.clone()))
            .unzip();
        Self::on_grid(grid, maps, self.c)
    }

    /// Pointwise equality with another family on the same grid.
    pub fn same_maps(&self, other: &HomotopyFamily) -> bool {
        self.grid == other.grid && self.maps.iter().zip(&other.maps).all(|(a, b)| a.map() == b.map())
    }
}

/// `h(x, (t, i)) = h_t(x)`.
pub fn family_to_map(fam: &HomotopyFamily, dom: &HomotopyDomain) -> Result<MapWitness> {
    if !same_space(fam.source(), dom.x()) {
        return Err(CoarseError::SpaceMismatch(
            "family is not defined on the domain's X".into(),
        ));
    }
    let map = (0..dom.len())
        .map(|k| {
            let (x, t, _) = dom.point(k);
            fam.at(&t)
                .map(|m| m.apply(x))
                .ok_or_else(|| CoarseError::ParamNotOnGrid(param_label(&t)))
        })
        .collect::<Result<Vec<_>>>()?;
    MapWitness::new(dom.space().clone(), fam.target().clone(), map)
}

/// `i_x = ⌊d(x, p)⌋` clamped to `[1, N]`.
pub fn default_selector(dom: &HomotopyDomain) -> Vec<u32> {
    let x = dom.x();
    (0..x.len())
        .map(|a| (floor_radius(x.dist(a, dom.prod.p)) as u32).clamp(1, dom.levels()))
        .collect()
}

/// `h_t(x) = h(x, (t, i_x))` for every cone parameter `t`.
pub fn map_to_family(h: &MapWitness, dom: &HomotopyDomain, selector: Option<&[u32]>, c: f64) -> Result<HomotopyFamily> {
    if !same_space(h.source(), dom.space()) {
        return Err(CoarseError::SpaceMismatch("map is not defined on the domain".into()));
    }
    let default;
    let sel = match selector {
        Some(s) => s,
        None => {
            default = default_selector(dom);
            &default
        }
    };
    let x = dom.x();
    if sel.len() != x.len() {
        return Err(CoarseError::InvalidParameter("selector length differs from |X|".into()));
    }
    let grid = dom.cone.params.clone().expect("interval cone");
    let maps = grid
        .iter()
        .map(|t| {
            let map = (0..x.len())
                .map(|a| {
                    dom.index(a, t, sel[a])
                        .map(|k| h.apply(k))
                        .ok_or_else(|| CoarseError::SelectorOutside {
                            point: format!("{}|{}@{}", x.label(a), param_label(t), sel[a]),
                            level: sel[a],
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            MapWitness::new(x.clone(), h.target().clone(), map)
        })
        .collect::<Result<Vec<_>>>()?;
    HomotopyFamily::new(grid, maps, c)
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundTrip {
    /// `closeness(h, family_to_map(map_to_family(h)))`.
    pub closeness: f64,
    /// `max |i − i_x|` over domain points.
    pub level_spread: f64,
    /// `Φ_h(level_spread)`.
    pub seam_bound: f64,
}

impl RoundTrip {
    pub fn holds(&self) -> bool {
        self.closeness <= self.seam_bound + TOL
    }
}

/// Map → family → map, with the closeness constant and its seam bound.
pub fn map_round_trip(h: &MapWitness, dom: &HomotopyDomain, c: f64) -> Result<RoundTrip> {
    let sel = default_selector(dom);
    let fam = map_to_family(h, dom, Some(&sel), c)?;
    let back = family_to_map(&fam, dom)?;
    let level_spread = (0..dom.len())
        .map(|k| {
            let (x, _, level) = dom.point(k);
            (level as f64 - sel[x] as f64).abs()
        })
        .fold(0.0, f64::max);
    Ok(RoundTrip {
        closeness: closeness_constant(h, &back)?,
        level_spread,
        seam_bound: uniformity_control(h, &[level_spread])?.bounds()[0],
    })
}

/// Family → map → family is the identity on the grid.
pub fn family_round_trip(fam: &HomotopyFamily, dom: &HomotopyDomain) -> Result<bool> {
    let h = family_to_map(fam, dom)?;
    let back = map_to_family(&h, dom, None, fam.c)?;
    let restricted = back.restrict(&fam.grid[0], fam.grid.last().unwrap())?;
    Ok(restricted.same_maps(fam))
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyCondition {
    pub passes: bool,
    /// Largest `d(h_{t'}(ρ(i)), h_t(ρ(i)))` seen.
    pub bound: f64,
    /// `(t, ray index)` pairs whose distances grow along the ray.
    pub failures: Vec<(String, usize)>,
}

/// For each tested `t` and ray `ρ`, takes at every index `i ≥ 1` the worst
/// grid parameter `t′ ≠ t` with `|t′ − t| < c/i` and records
/// `D(i) = d(h_{t′}(ρ(i)), h_t(ρ(i)))`. The pair passes when `D` on the
/// upper half of the indices stays below its maximum on the lower half.
pub fn check_family_condition(
    fam: &HomotopyFamily,
    rays: &[Vec<usize>],
    ts: Option<&[Param]>,
) -> Result<FamilyCondition> {
    let ts = ts.unwrap_or(&fam.grid);
    let y = fam.target();
    let mut bound = 0.0f64;
    let mut failures = Vec::new();
    for t in ts {
        let ht = fam.at(t).ok_or_else(|| CoarseError::ParamNotOnGrid(param_label(t)))?;
        for (r, ray) in rays.iter().enumerate() {
            for &x in ray {
                fam.source().check_index(x)?;
            }
            let mut d = Vec::with_capacity(ray.len());
            for (i, &x) in ray.iter().enumerate().skip(1) {
                let reach = fam.c / i as f64;
                let worst = fam
                    .grid
                    .iter()
                    .zip(&fam.maps)
                    .filter(|(s, _)| *s != t && (param_f64(s) - param_f64(t)).abs() < reach)
                    .map(|(_, m)| y.dist(m.apply(x), ht.apply(x)))
                    .reduce(f64::max)
                    .ok_or_else(|| CoarseError::GridTooCoarse {
                        t: param_label(t),
                        c: fam.c,
                        level: i,
                    })?;
                d.push((i, worst));
            }
            let mid = ray.len() / 2;
            let lower = d.iter().filter(|e| e.0 <= mid).map(|e| e.1).fold(0.0, f64::max);
            let upper = d.iter().filter(|e| e.0 > mid).map(|e| e.1).fold(0.0, f64::max);
            bound = bound.max(lower).max(upper);
            if upper > lower + TOL {
                failures.push((param_label(t), r));
            }
        }
    }
    Ok(FamilyCondition {
        passes: failures.is_empty(),
        bound,
        failures,
    })
}

/// `{0, 1/m, …, 1}`.
pub fn uniform_grid(m: u64) -> Vec<Param> {
    (0..=m).map(|k| Param::new(k, m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{interval_cone, Resolution};
    use crate::control::integer_scales;
    use crate::generators::zplus;

    fn z(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(zplus(n))
    }

    fn domain(n: usize, res: Resolution) -> HomotopyDomain {
        let cone = interval_cone(n as u32 + 2, res).unwrap();
        HomotopyDomain::new(z(n), 0, cone, 1.0).unwrap()
    }

    #[test]
    fn close_maps_give_endpoint_restrictions() {
        let dom = domain(16, Resolution::Refined);
        let x = dom.x().clone();
        let f = MapWitness::identity(x.clone());
        let g = MapWitness::from_fn(x.clone(), x.clone(), |i| (i + 3).min(16)).unwrap();
        let h = homotopy_from_close(&f, &g, &dom).unwrap();
        assert!(restricts_to(&h, &dom, &Param::from_integer(0), &f));
        assert!(restricts_to(&h, &dom, &Param::from_integer(1), &g));
        let same = homotopy_from_close(&f, &f, &dom).unwrap();
        let s = integer_scales(3);
        let rep = check_homotopy_map(&same, &dom, &s, &s, 0).unwrap();
        assert_eq!(rep.uniformity.bounds(), &s[..]);
    }

    #[test]
    fn grid_must_hold_endpoints() {
        let x = z(4);
        let maps = vec![MapWitness::identity(x.clone()); 2];
        let err = HomotopyFamily::new(vec![Param::new(1, 2), Param::from_integer(1)], maps, 1.0);
        assert!(matches!(err, Err(CoarseError::GridEndpoints)));
    }

    #[test]
    fn constant_family_round_trips() {
        let dom = domain(20, Resolution::Fixed(16));
        let x = dom.x().clone();
        let fam = HomotopyFamily::from_fn(uniform_grid(16), x.clone(), x.clone(), 4.0, |_, a| a).unwrap();
        assert!(family_round_trip(&fam, &dom).unwrap());
        let h = family_to_map(&fam, &dom).unwrap();
        let rt = map_round_trip(&h, &dom, 4.0).unwrap();
        assert_eq!(rt.closeness, 0.0);
        let rays = vec![(0..=20).collect::<Vec<_>>()];
        let cond = check_family_condition(&fam, &rays, None).unwrap();
        assert!(cond.passes);
        assert_eq!(cond.bound, 0.0);
    }

    #[test]
    fn sliding_family_round_trip() {
        let n = 24;
        let dom = domain(n, Resolution::Fixed(16));
        let x = dom.x().clone();
        let y = z(2 * n);
        let fam = HomotopyFamily::from_fn(uniform_grid(16), x, y, 4.0, |t, a| {
            (a + (t * Param::from_integer(a as u64)).to_integer() as usize).min(2 * n)
        })
        .unwrap();
        assert!(family_round_trip(&fam, &dom).unwrap());
        let h = family_to_map(&fam, &dom).unwrap();
        let rt = map_round_trip(&h, &dom, 4.0).unwrap();
        assert!(rt.holds());
        assert!(rt.closeness <= 1.0);
    }

    #[test]
    fn coarse_grid_is_reported() {
        let x = z(40);
        let fam = HomotopyFamily::from_fn(uniform_grid(4), x.clone(), x, 1.0, |_, a| a).unwrap();
        let rays = vec![(0..=40).collect::<Vec<_>>()];
        let err = check_family_condition(&fam, &rays, None).unwrap_err();
        assert!(matches!(err, CoarseError::GridTooCoarse { level: 4, .. }));
    }

    #[test]
    fn jump_family_fails_but_halves_pass() {
        let n = 64;
        let x = z(n);
        let y = z(2 * n);
        let half = Param::new(1, 2);
        let fam =
            HomotopyFamily::from_fn(uniform_grid(16), x, y, 6.0, |t, a| if *t < half { a } else { 2 * a }).unwrap();
        let rays = vec![(0..=n).collect::<Vec<_>>()];
        let cond = check_family_condition(&fam, &rays, Some(&[half])).unwrap();
        assert!(!cond.passes);
        let lower = fam.restrict(&Param::from_integer(0), &Param::new(7, 16)).unwrap();
        let upper = fam.restrict(&half, &Param::from_integer(1)).unwrap();
        assert!(check_family_condition(&lower, &rays, None).unwrap().passes);
        assert!(check_family_condition(&upper, &rays, None).unwrap().passes);
    }
}
