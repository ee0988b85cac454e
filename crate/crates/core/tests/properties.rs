use std::sync::Arc;

use proptest::prelude::*;

use coarse_lab::cone::{cone_metric, interval_cone, Param, Resolution};
use coarse_lab::control::integer_scales;
use coarse_lab::flasque::{flasque_domain, flasque_homotopy, zplus_shift};
use coarse_lab::generators::{binary_tree, grid2_l1, zplus};
use coarse_lab::geodesic::{connectivity_threshold, is_admissible, upper_control};
use coarse_lab::homotopy::{family_round_trip, uniform_grid, HomotopyDomain, HomotopyFamily};
use coarse_lab::maps::{closeness_constant, quasi_inverse, surjectivity_constant, uniformity_control};
use coarse_lab::metric::{shortest_path_metric, validate_metric, WeightedGraph};
use coarse_lab::product::{build_product, floor_distance_map};
use coarse_lab::{Combiner, ControlTable, FiniteMetricSpace, MapWitness, TOL};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn line_space(coords: Vec<f64>) -> Arc<FiniteMetricSpace> {
    Arc::new(FiniteMetricSpace::from_line(labels(coords.len()), coords).unwrap())
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..400).prop_map(|v| v as f64 / 8.0), 2..24)
}

/// A connected graph: a random spanning tree plus extra edges.
fn graph() -> impl Strategy<Value = WeightedGraph> {
    (3usize..14)
        .prop_flat_map(|n| {
            let parents = (1..n).map(|i| 0..i).collect::<Vec<_>>();
            let extra = prop::collection::vec((0..n, 0..n, 1u32..6), 0..n);
            let weights = prop::collection::vec(1u32..6, n - 1);
            (Just(n), parents, weights, extra)
        })
        .prop_map(|(n, parents, weights, extra)| {
            let mut edges: Vec<_> = parents
                .into_iter()
                .zip(weights)
                .enumerate()
                .map(|(i, (p, w))| (i + 1, p, w as f64))
                .collect();
            edges.extend(
                extra
                    .into_iter()
                    .filter(|e| e.0 != e.1)
                    .map(|(a, b, w)| (a, b, w as f64)),
            );
            WeightedGraph::new(labels(n), edges).unwrap()
        })
}

fn self_map(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..n, n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generators_are_metrics(n in 0usize..6) {
        for s in [zplus(4 * n), grid2_l1(n), binary_tree(n)] {
            prop_assert!(validate_metric(&s).is_valid());
        }
    }

    #[test]
    fn graph_metrics_are_metrics(g in graph()) {
        let s = shortest_path_metric(&g).unwrap();
        prop_assert!(validate_metric(&s).is_valid());
        for &(a, b, w) in g.edges() {
            prop_assert!(s.dist(a, b) <= w + TOL);
        }
    }

    #[test]
    fn floor_map_is_coarse_lipschitz(c in coords(), p in 0usize..24) {
        let x = line_space(c);
        let p = p % x.len();
        let f = floor_distance_map(x, p).unwrap();
        let scales = integer_scales(6);
        let t = uniformity_control(&f, &scales).unwrap();
        for (r, b) in t.entries() {
            prop_assert!(b <= r + 1.0 + TOL);
        }
    }

    #[test]
    fn projections_are_one_lipschitz(a in coords(), b in coords(), r in 0u32..4) {
        let prod = build_product(line_space(a), 0, line_space(b), 0, r as f64, Combiner::Max).unwrap();
        let scales = [0.5, 1.0, 2.0, 5.0];
        for proj in [prod.project_left(), prod.project_right()] {
            let t = uniformity_control(&proj, &scales).unwrap();
            prop_assert!(t.entries().all(|(s, b)| b <= s + TOL));
        }
        prop_assert!(!prod.space.is_empty());
        for k in 0..prod.space.len() {
            let (x, y) = prod.space.pair(k).unwrap();
            prop_assert!(prod.radius_gap(x, y) <= r as f64 + TOL);
        }
    }

    #[test]
    fn closeness_is_a_pseudometric(f in self_map(12), g in self_map(12), h in self_map(12)) {
        let x = Arc::new(zplus(11));
        let w = |m: Vec<usize>| MapWitness::new(x.clone(), x.clone(), m).unwrap();
        let (f, g, h) = (w(f), w(g), w(h));
        let fg = closeness_constant(&f, &g).unwrap();
        prop_assert_eq!(fg, closeness_constant(&g, &f).unwrap());
        prop_assert_eq!(closeness_constant(&f, &f).unwrap(), 0.0);
        let fh = closeness_constant(&f, &h).unwrap();
        prop_assert!(fh <= fg + closeness_constant(&g, &h).unwrap() + TOL);
    }

    #[test]
    fn quasi_inverse_forward_is_surjectivity(m in self_map(16)) {
        let x = Arc::new(zplus(15));
        let f = MapWitness::new(x.clone(), x, m).unwrap();
        let q = quasi_inverse(&f).unwrap();
        prop_assert!((q.forward - surjectivity_constant(&f)).abs() <= TOL);
    }

    #[test]
    fn least_upper_control_is_admissible(c in coords(), step in 1u32..6) {
        let x = line_space(c);
        let step = connectivity_threshold(&x) + step as f64 - 1.0;
        let t = upper_control(&x, step, &integer_scales(8)).unwrap();
        prop_assert!(t.is_monotone());
        prop_assert!(is_admissible(&x, step, &t).unwrap());
    }

    #[test]
    fn cone_distances_along_rays(d in 0u32..=8, i in 1u32..30, j in 1u32..30) {
        let base = FiniteMetricSpace::from_line(labels(2), vec![0.0, d as f64 / 4.0]).unwrap();
        let along = cone_metric(&base, (0, i), (0, j)).unwrap();
        prop_assert!((along - (i as f64 - j as f64).abs()).abs() <= 1e-9);
        let ab = cone_metric(&base, (0, i), (1, j)).unwrap();
        prop_assert!((ab - cone_metric(&base, (1, j), (0, i)).unwrap()).abs() <= 1e-9);
        let same = cone_metric(&base, (0, i), (1, i)).unwrap();
        prop_assert!((same - i as f64 * d as f64 / 4.0).abs() <= 1e-9);
    }

    #[test]
    fn control_max_dominates(a in prop::collection::vec(0u32..20, 4), b in prop::collection::vec(0u32..20, 4)) {
        let mono = |v: Vec<u32>| {
            let mut acc = 0.0;
            let e = v.into_iter().enumerate().map(|(k, x)| { acc += x as f64; (k as f64, acc) }).collect();
            ControlTable::new(e).unwrap()
        };
        let (a, b) = (mono(a), mono(b));
        let m = a.pointwise_max(&b).unwrap();
        prop_assert!(a.dominated_by(&m, 0.0) && b.dominated_by(&m, 0.0));
        prop_assert!(m.is_monotone());
        for q in [0.0, 0.5, 1.2, 3.0] {
            prop_assert!(m.at(q).unwrap() >= a.at(q).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn family_round_trip_is_exact(offsets in prop::collection::vec(0u32..6, 13)) {
        let n = 12usize;
        let x = Arc::new(zplus(n));
        let y = Arc::new(zplus(2 * n));
        let cone = interval_cone(n as u32 + 2, Resolution::Fixed(16)).unwrap();
        let dom = HomotopyDomain::new(x.clone(), 0, cone, 1.0).unwrap();
        let grid = uniform_grid(16);
        let fam = HomotopyFamily::from_fn(grid, x, y, 4.0, |t: &Param, a| {
            a + (t * Param::from_integer(offsets[a] as u64)).to_integer() as usize
        })
        .unwrap();
        prop_assert!(family_round_trip(&fam, &dom).unwrap());
    }

    #[test]
    fn flasque_homotopy_ray_gap(n in 4usize..10) {
        let w = zplus_shift(n).unwrap();
        let dom = flasque_domain(&w, 0, n, n as u32 + 2, 1.0).unwrap();
        let (_, rep) = flasque_homotopy(&w, &dom, &[0.0, 1.0, 2.0], &integer_scales(2)).unwrap();
        prop_assert!(rep.endpoints_hold());
        prop_assert!(rep.ray_gap_holds());
        prop_assert!(rep.properness_holds());
    }
}
