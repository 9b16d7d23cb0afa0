use flamelets_core::fixtures::breathing_circle;
use flamelets_core::{
    compute_persistence, hausdorff, integrated_hausdorff, pairwise_distances, rips_filtration,
    sublevel_grid_filtration, superlevel_grid_filtration, Convention, DynamicPointCloud,
    FilteredComplex, GridFunction, PointCloud,
};
use proptest::prelude::*;

fn cloud(max_points: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec([-2.0f64..2.0, -2.0f64..2.0], 1..=max_points)
        .prop_map(|rows| PointCloud::from_rows(rows).unwrap())
}

fn grid_2d() -> impl Strategy<Value = GridFunction> {
    (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
        prop::collection::vec(-3.0f64..3.0, r * c).prop_map(move |v| {
            GridFunction::new(vec![r, c], vec![1.0, 1.0], vec![0.0, 0.0], v).unwrap()
        })
    })
}

fn assert_monotone(complex: &FilteredComplex) {
    let mut seen = std::collections::HashMap::new();
    for s in complex.simplices() {
        for facet in s.facets() {
            let fv = seen.get(&facet).expect("facet precedes coface");
            assert!(*fv <= s.value());
        }
        seen.insert(s.vertices().to_vec(), s.value());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hausdorff_is_a_metric(a in cloud(10), b in cloud(10), c in cloud(10)) {
        let ab = hausdorff(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, hausdorff(&b, &a).unwrap());
        prop_assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        let (ac, cb) = (hausdorff(&a, &c).unwrap(), hausdorff(&c, &b).unwrap());
        prop_assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn hausdorff_zero_only_for_equal_sets(a in cloud(8), extra in [-2.0f64..2.0, -2.0f64..2.0]) {
        let mut rows: Vec<[f64; 2]> = a.iter().map(|p| [p[0], p[1]]).collect();
        let is_new = !rows.contains(&extra);
        rows.push(extra);
        let b = PointCloud::from_rows(&rows).unwrap();
        prop_assert_eq!(hausdorff(&a, &b).unwrap() > 0.0, is_new);
        rows.reverse();
        prop_assert_eq!(hausdorff(&b, &PointCloud::from_rows(rows).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn rips_edges_match_distances(c in cloud(12), radius in 0.1f64..3.0) {
        let complex = rips_filtration(&c, 2, radius).unwrap();
        let dist = pairwise_distances(&c);
        let within = (0..c.len())
            .flat_map(|i| (i + 1..c.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| dist.get(i, j) <= radius)
            .count();
        prop_assert_eq!(complex.count_dim(1), within);
        assert_monotone(&complex);
    }

    #[test]
    fn h0_has_one_pair_per_vertex(c in cloud(12)) {
        let complex = rips_filtration(&c, 1, f64::INFINITY).unwrap();
        let diagrams = compute_persistence(&complex, &[0]).unwrap();
        prop_assert_eq!(diagrams[&0].len(), c.len());
        prop_assert_eq!(diagrams[&0].pairs().iter().filter(|p| p.essential).count(), 1);
    }

    #[test]
    fn grid_filtrations_are_monotone_and_mirror(f in grid_2d()) {
        let sub = sublevel_grid_filtration(&f.map(|v| -v), 2).unwrap();
        let sup = superlevel_grid_filtration(&f, 2).unwrap();
        assert_monotone(&sub);
        prop_assert_eq!(sup.convention(), Convention::Superlevel);
        prop_assert_eq!(sub.len(), sup.len());
        for (a, b) in sub.simplices().iter().zip(sup.simplices()) {
            prop_assert_eq!(a.vertices(), b.vertices());
            prop_assert_eq!(a.value(), b.value());
        }

        let down = compute_persistence(&sub, &[0, 1]).unwrap();
        let up = compute_persistence(&sup, &[0, 1]).unwrap();
        for d in [0, 1] {
            prop_assert_eq!(down[&d].len(), up[&d].len());
            for (p, q) in down[&d].pairs().iter().zip(up[&d].pairs()) {
                prop_assert_eq!((-p.birth, -p.death, p.essential), (q.birth, q.death, q.essential));
            }
        }
    }
}

#[test]
fn integrated_hausdorff_of_a_trajectory_with_itself_vanishes() {
    let d: DynamicPointCloud = breathing_circle(6, 15, (1.0, 1.5), 0.05, 9).unwrap();
    assert_eq!(integrated_hausdorff(&d, &d).unwrap(), 0.0);
    let e: DynamicPointCloud = breathing_circle(4, 15, (1.0, 2.0), 0.05, 10).unwrap();
    let (de, ed) = (
        integrated_hausdorff(&d, &e).unwrap(),
        integrated_hausdorff(&e, &d).unwrap(),
    );
    assert!(de > 0.0);
    assert!((de - ed).abs() < 1e-12);
}
