use attractor_core::domain::io::{read_field, write_field};
use attractor_core::domain::{assemble_operator, Profile, ProfileTerm};
use attractor_core::linalg::dense_symmetric_eigenvalues;
use attractor_core::spectral::{
    count_below, hausdorff_bound, lieb_thirring_residual_with, lowest_eigs_k, BoundInputs, ConstantsTable,
    EigenMethod, SpectralConfig,
};
use attractor_core::tangent::{gram_volume, orthonormality_defect, TangentBundle};
use attractor_core::{Field, Grid};
use proptest::prelude::*;

fn grid() -> impl Strategy<Value = Grid> {
    (2usize..6, 2usize..6, 2usize..6, 0.5f64..2.0, 0.5f64..2.0, 0.5f64..2.0)
        .prop_map(|(nx, ny, nz, lx, ly, lz)| Grid::new([(0.0, lx), (0.0, ly), (-1.0, lz - 1.0)], [nx, ny, nz]).unwrap())
}

fn field_on(g: Grid) -> impl Strategy<Value = Field> {
    prop::collection::vec(-5.0f64..5.0, g.dof()).prop_map(move |v| Field::new(g, v).unwrap())
}

fn grid_and_field() -> impl Strategy<Value = (Grid, Field)> {
    grid().prop_flat_map(|g| (Just(g), field_on(g)))
}

fn inputs() -> impl Strategy<Value = BoundInputs> {
    (
        2.0f64..2.6,
        0.3f64..1.0,
        1.0f64..80.0,
        0.05f64..0.95,
        0.0f64..3.0,
        (0.0f64..2.0, 0.0f64..2.0, 0.0f64..2.0),
        (0.1f64..0.5, 0.1f64..0.5),
        0.0f64..1.0,
        0usize..8,
    )
        .prop_map(|(gamma, lambda0, lambda1, delta, c, (h1, l52, l6), (k52, kg), mu, n)| BoundInputs {
            gamma,
            lambda0,
            lambda1,
            delta,
            growth_c: c,
            i_h1: h1,
            i_l52: l52,
            i_l6: l6,
            k_52: k52,
            k_gamma: kg,
            mu1: 0.5 * (1.0 - delta) * lambda1 * mu,
            n_count: n,
        })
}

fn term() -> impl Strategy<Value = ProfileTerm> {
    prop_oneof![
        (-10.0f64..10.0).prop_map(ProfileTerm::Const),
        (-10.0f64..10.0, [0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0], 0.05f64..2.0)
            .prop_map(|(amp, center, width)| ProfileTerm::Gauss { amp, center, width }),
        (-10.0f64..10.0, [1usize..5, 1usize..5, 1usize..5]).prop_map(|(amp, modes)| ProfileTerm::Sine { amp, modes }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn field_file_round_trip_is_exact_for_dyadic_extents(
        n in [2usize..6, 2usize..6, 2usize..6],
        ends in [(-16i32..0, 1i32..16), (-16i32..0, 1i32..16), (-16i32..0, 1i32..16)],
        seed in prop::collection::vec(-5.0f64..5.0, 125),
    ) {
        let e = ends.map(|(a, b)| (a as f64 / 8.0, b as f64 / 8.0));
        let g = Grid::new(e, n).unwrap();
        let u = Field::new(g, seed[..g.dof()].to_vec()).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let back = read_field(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(back, u);
    }

    #[test]
    fn field_file_round_trip_keeps_values((_g, u) in grid_and_field()) {
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let back = read_field(&mut buf.as_slice()).unwrap();
        prop_assert!(back.grid().compatible(u.grid(), 1e-8));
        prop_assert_eq!(back.values(), u.values());
    }

    #[test]
    fn profile_text_round_trip(terms in prop::collection::vec(term(), 1..4)) {
        let p = Profile::from_terms(terms);
        let back: Profile = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn inertia_count_matches_dense_and_is_monotone(
        (g, beta) in grid_and_field(),
        a in -20.0f64..400.0,
        b in -20.0f64..400.0,
    ) {
        let op = assemble_operator(&g, &beta).unwrap();
        let full = dense_symmetric_eigenvalues(op.matrix().to_dense());
        let cfg = SpectralConfig { method: EigenMethod::DenseOracle, ..Default::default() };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let clo = count_below(&op, lo, &cfg).unwrap().count;
        let chi = count_below(&op, hi, &cfg).unwrap().count;
        prop_assert!(clo <= chi);
        // away from eigenvalues the inertia count is exact
        if full.iter().all(|v| (v - lo).abs() > 1e-8 * (1.0 + lo.abs())) {
            prop_assert_eq!(clo, full.iter().filter(|&&v| v < lo).count());
        }
    }

    #[test]
    fn iterative_eigenvalues_match_dense((g, beta) in grid_and_field()) {
        let op = assemble_operator(&g, &beta).unwrap();
        let k = 3.min(g.dof());
        let d = lowest_eigs_k(&op, k, &SpectralConfig { method: EigenMethod::DenseOracle, ..Default::default() }).unwrap();
        let i = lowest_eigs_k(&op, k, &SpectralConfig::default()).unwrap();
        for (x, y) in d.values.iter().zip(&i.values) {
            prop_assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()));
        }
        prop_assert!(orthonormality_defect(&i.vectors) < 1e-8);
    }

    #[test]
    fn bound_monotone(inp in inputs(), s in 1.0f64..1.5, dn in 0usize..3) {
        // extreme corners overflow; those are refused, not ordered
        let base = hausdorff_bound(&inp);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        let bigger = hausdorff_bound(&BoundInputs {
            growth_c: inp.growth_c * s,
            i_l52: inp.i_l52 * s,
            i_l6: inp.i_l6 * s,
            k_52: inp.k_52 * s,
            k_gamma: inp.k_gamma * s,
            ..inp
        });
        prop_assume!(bigger.is_ok());
        let bigger = bigger.unwrap();
        prop_assert!(bigger.d_const >= base.d_const);
        prop_assert!(bigger.d2 >= base.d2);
        let more = hausdorff_bound(&BoundInputs { n_count: inp.n_count + dn, ..inp }).unwrap();
        prop_assert!(more.d2 >= base.d2 - 1e-12 * base.d2.abs());
        prop_assert!(base.d_final as f64 > base.d1.max(base.d2));
        prop_assert!(base.d_const >= 0.0);
    }

    #[test]
    fn embedding_constants_decrease(q1 in 2.0f64..6.0, q2 in 2.0f64..6.0) {
        let t = ConstantsTable::defaults();
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(t.m_q(hi).unwrap() <= t.m_q(lo).unwrap() + 1e-15);
    }

    #[test]
    fn lieb_thirring_residual_increases_with_constant(k1 in 0.05f64..2.0, k2 in 0.05f64..2.0, p in 1.5f64..2.5) {
        let g = Grid::unit_cube(5).unwrap();
        let v = Field::sine_mode(g, [1, 2, 1]);
        let v = v.scaled(1.0 / v.dot(&v).sqrt());
        let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
        let a = lieb_thirring_residual_with(&[v.clone()], p, lo).unwrap();
        let b = lieb_thirring_residual_with(&[v], p, hi).unwrap();
        prop_assert!(b >= a);
    }

    #[test]
    fn random_bundle_is_orthonormal(seed in 0u64..1000, d in 1usize..5) {
        let g = Grid::unit_cube(4).unwrap();
        let b = TangentBundle::random(&g, d, seed, 1).unwrap();
        prop_assert!(orthonormality_defect(b.vectors()) < 1e-12);
        prop_assert!((gram_volume(b.vectors()) - 1.0).abs() < 1e-10);
    }
}
