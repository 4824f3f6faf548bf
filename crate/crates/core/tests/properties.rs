//! Property tests for the structural invariants of every module.

mod common;

use calkin_core::boundary::{angular_derivative, find_contact_points, rho_boundary_limit, RhoCase};
use calkin_core::calkin::{
    build_relation_space, compact_difference_check, connectedness_check, decide_compact, first_order_lower_bound,
    kernel_sum_lower_bound, Combination, RelationEngine,
};
use calkin_core::clark::{clark_radial_probe, essential_norm_composition, singular_clark, weighted_essential_bounds};
use calkin_core::numerics::{
    curve_points, finite_section, gram_eigenvalues, halfplane_kernel_diff_norm_beta1, halfplane_kernel_diff_norm_expanded,
    halfplane_kernel_gram, kernel_lowerbound_estimate, operator_norm_estimate, CurveDepth, HalfPlaneKernel,
};
use calkin_core::selfmap::{
    pseudo_hyperbolic_disk, pseudo_hyperbolic_halfplane, validate_self_map, CayleyMap, Lft, Verdict,
};
use calkin_core::{Number, SelfMap, SpaceSpec};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family(seed: u64) -> (Vec<LftParams>, Vec<SelfMap>) {
    let f = random_lft_family(&mut ChaCha8Rng::seed_from_u64(seed));
    let maps = f.iter().map(LftParams::map).collect();
    (f, maps)
}

/// A few maps with two contact points or higher-order contact alongside the
/// linear-fractional palette.
fn special_maps() -> Vec<SelfMap> {
    let (a, b) = equal_d1_pair();
    vec![phi2(), phi3(), z2(), a, b, SelfMap::rational_ints(&[1, 0, 1], &[2])]
}

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0f64..0.95, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn unimodular_index() -> impl Strategy<Value = usize> {
    0..circle_points().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cayley_round_trip(z in disk_point(), t in 0.0f64..std::f64::consts::TAU) {
        let alpha = Number::float(t.cos(), t.sin());
        let tau = CayleyMap::new(alpha).unwrap();
        let back = tau.inverse(&tau.apply(&Number::from(z)).unwrap()).unwrap().to_c64();
        prop_assert!((back - z).norm() < 1e-12);
    }

    #[test]
    fn disk_distance_is_automorphism_invariant(p in disk_point(), q in disk_point(), a in disk_point(), t in 0.0f64..6.28) {
        let lam = Complex64::from_polar(1.0, t);
        let auto = |z: Complex64| lam * (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z);
        let before = pseudo_hyperbolic_disk(p, q).unwrap();
        let after = pseudo_hyperbolic_disk(auto(p), auto(q)).unwrap();
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn halfplane_distance_is_affine_invariant(
        p in (-5.0f64..5.0, 0.01f64..5.0), q in (-5.0f64..5.0, 0.01f64..5.0), a in 0.1f64..10.0, b in -10.0f64..10.0,
    ) {
        let (p, q) = (Complex64::new(p.0, p.1), Complex64::new(q.0, q.1));
        let before = pseudo_hyperbolic_halfplane(p, q).unwrap();
        let after = pseudo_hyperbolic_halfplane(p * a + b, q * a + b).unwrap();
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn validated_lft_stays_in_closed_disk(coeffs in proptest::array::uniform4((-6i64..=6, -6i64..=6)), seed in any::<u64>()) {
        let g = |(re, im): (i64, i64)| gauss(re, 1, im, 1);
        let candidates = [
            SelfMap::lft(g(coeffs[0]), g(coeffs[1]), g(coeffs[2]), g(coeffs[3])),
            Ok(family(seed).1[0].clone()),
        ];
        for m in candidates.into_iter().flatten() {
            if matches!(validate_self_map(&m), Ok(r) if r.verdict == Verdict::Pass) {
                let f = m.fast().unwrap();
                let sup = (0..10_000)
                    .map(|i| f.eval(Complex64::from_polar(1.0, i as f64 * std::f64::consts::TAU / 1e4)).norm())
                    .fold(0.0, f64::max);
                prop_assert!(sup <= 1.0 + 1e-12, "{sup}");
            }
        }
    }

    #[test]
    fn exact_evaluation_is_exact_and_associative(seed in any::<u64>(), re in -5i64..5, im in -5i64..5, k in 0usize..6) {
        let (_, maps) = family(seed);
        let phi = &maps[0];
        let psi = &special_maps()[k];
        let z = gauss(re, 7, im, 7);
        let composite = SelfMap::compose(phi.clone(), psi.clone()).unwrap();
        let direct = phi.eval(&psi.eval(&z).unwrap()).unwrap();
        let via = composite.eval(&z).unwrap();
        prop_assert!(direct.is_exact() && via.is_exact());
        prop_assert_eq!(direct, via);
        let d = composite.derivative(&z, 1).unwrap();
        let chain = &phi.derivative(&psi.eval(&z).unwrap(), 1).unwrap() * &psi.derivative(&z, 1).unwrap();
        prop_assert_eq!(d, chain);
    }

    #[test]
    fn contact_point_data_is_consistent(seed in any::<u64>(), k in 0usize..6) {
        let maps = [family(seed).1[0].clone(), special_maps()[k].clone()];
        for m in &maps {
            for p in find_contact_points(m).unwrap().points {
                let ad = angular_derivative(m, &p.zeta).unwrap();
                let exact = p.derivative_modulus().re_f64();
                prop_assert!((ad.radial_quotient - exact).abs() <= 1e-6 * exact);
                let prod = &(&p.zeta * &p.boundary_value().conj()) * &p.data.entries[1];
                prop_assert!(prod.is_real() && prod.re_f64() > 0.0);
                prop_assert_eq!(&prod, p.derivative_modulus());
                let u = &p.halfplane.u_derivs;
                prop_assert!(u[..u.len() - 1].iter().all(Number::is_real));
                prop_assert!(u[u.len() - 1].im_f64() > 0.0);
            }
        }
    }

    #[test]
    fn rho_limit_is_symmetric_and_detects_agreement(seed in any::<u64>()) {
        let (params, maps) = family(seed);
        for i in 0..maps.len() {
            for j in 0..maps.len() {
                let zeta = &params[i].zeta;
                let ab = rho_boundary_limit(&maps[i], &maps[j], zeta).unwrap();
                let ba = rho_boundary_limit(&maps[j], &maps[i], zeta).unwrap();
                prop_assert_eq!(&ab.rho_sq, &ba.rho_sq);
                let same = params[j].zeta == *zeta && lft_d2(&params[i].lft(), zeta) == lft_d2(&params[j].lft(), zeta);
                prop_assert_eq!(ab.rho_sq.is_zero(), same);
                prop_assert_eq!(ab.case == RhoCase::Agree, same);
            }
        }
    }

    #[test]
    fn rotation_moves_contact_points(seed in any::<u64>(), k in 0usize..6, l in unimodular_index()) {
        let lambda = circle_points()[l].clone();
        for m in [family(seed).1[0].clone(), special_maps()[k].clone()] {
            let before = find_contact_points(&m).unwrap();
            let after = find_contact_points(&m.precompose_rotation(lambda.clone()).unwrap()).unwrap();
            prop_assert_eq!(before.points.len(), after.points.len());
            for p in &before.points {
                let moved = &lambda.conj() * &p.zeta;
                let q = after.find(&moved).unwrap();
                prop_assert!(q.is_some());
                prop_assert_eq!(q.unwrap().derivative_modulus(), p.derivative_modulus());
            }
        }
    }

    #[test]
    fn clark_singular_part_lives_on_boundary_values(seed in any::<u64>(), k in 0usize..6, l in unimodular_index()) {
        for m in [family(seed).1[0].clone(), special_maps()[k].clone()] {
            let cs = find_contact_points(&m).unwrap();
            let values: Vec<Number> = cs.points.iter().map(|p| p.boundary_value().clone()).collect();
            let alpha = circle_points()[l].clone();
            let mass = singular_clark(&m, &alpha).unwrap().total_mass();
            if !values.contains(&alpha) {
                prop_assert!(mass.is_zero());
            }
            let best = values.iter().map(|a| singular_clark(&m, a).unwrap().total_mass()).fold(Number::zero(), |x, y| {
                if y.cmp_real(&x).is_gt() { y } else { x }
            });
            prop_assert!(mass.cmp_real(&best).is_le());
            let e = essential_norm_composition(&m, SpaceSpec::hardy()).unwrap();
            prop_assert_eq!(e.squared_exact.as_ref(), Some(&best));
            prop_assert!(best.cmp_real(&e.squared_lower_bound).is_ge());
            let ones: Vec<(Number, Number)> = cs.points.iter().map(|p| (p.zeta.clone(), Number::one())).collect();
            let w = weighted_essential_bounds(&m, &ones).unwrap();
            prop_assert_eq!(&w.lower, &best);
            prop_assert_eq!(w.upper, best.scale_int(4));
        }
    }

    #[test]
    fn verdicts_are_homogeneous_and_rotation_covariant(
        seed in any::<u64>(), re in -3i64..=3, im in -3i64..=3, l in unimodular_index(),
    ) {
        prop_assume!(re != 0 || im != 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let (params, maps) = family(seed);
        let groups = oracle_groups(&params);
        let lambda = gauss(re, 2, im, 3);
        let rotated: Vec<SelfMap> = maps.iter().map(|m| m.precompose_rotation(circle_points()[l].clone()).unwrap()).collect();
        let engine = RelationEngine::new(&maps).unwrap();
        let rot_engine = RelationEngine::new(&rotated).unwrap();
        for v in 0..20 {
            let c = random_coeffs(&mut rng, &groups, maps.len(), v % 2 == 0);
            let scaled: Vec<Number> = c.iter().map(|x| x * &lambda).collect();
            let base = engine.decide(&c).unwrap();
            prop_assert_eq!(base.compact, engine.decide(&scaled).unwrap().compact);
            let rot = rot_engine.decide(&c).unwrap();
            prop_assert_eq!(base.compact, rot.compact);
            prop_assert_eq!(base.violated_groups.len(), rot.violated_groups.len());
        }
    }

    #[test]
    fn relation_space_dimensions(seed in any::<u64>()) {
        let (_, maps) = family(seed);
        let rs = build_relation_space(&maps).unwrap();
        prop_assert_eq!(rs.dim_m() + rs.dim_kernel(), maps.len());
        for g in &rs.generators {
            for b in &rs.basis_of_kernel {
                let dot: Number = g.iter().zip(b).map(|(&gi, bi)| bi.scale_int(gi as i64)).sum();
                prop_assert!(dot.is_zero() && dot.is_exact());
            }
        }
    }

    #[test]
    fn difference_checks_are_consistent(seed in any::<u64>()) {
        let (_, maps) = family(seed);
        let (phi, psi) = (&maps[0], &maps[maps.len() - 1]);
        let comb = Combination::new(vec![phi.clone(), psi.clone()], vec![Number::one(), Number::int(-1)], SpaceSpec::hardy()).unwrap();
        let compact = compact_difference_check(phi, psi).unwrap();
        prop_assert_eq!(compact, decide_compact(&comb).unwrap().compact);
        if compact {
            prop_assert!(connectedness_check(phi, psi).unwrap());
        }
    }

    #[test]
    fn halfplane_kernel_identity(z in (0.05f64..5.0, -5.0f64..5.0), w in (0.05f64..5.0, -5.0f64..5.0)) {
        let (z, w) = (Complex64::new(z.0, z.1), Complex64::new(w.0, w.1));
        let closed = halfplane_kernel_diff_norm_beta1(z, w).unwrap();
        prop_assert!((closed - halfplane_kernel_diff_norm_expanded(z, w)).abs() <= 1e-12);
    }

    #[test]
    fn kernel_grams_are_positive_definite(
        pts in proptest::collection::vec((0.2f64..3.0, -3.0f64..3.0), 2..=8), beta in prop_oneof![Just(1.0), Just(1.5), Just(2.0)],
    ) {
        let ks: Vec<HalfPlaneKernel> = pts.iter().map(|&(x, y)| HalfPlaneKernel::new(Complex64::new(x, y), beta).unwrap()).collect();
        let eig = gram_eigenvalues(&halfplane_kernel_gram(&ks).unwrap()).unwrap();
        prop_assert!(eig[0] > 0.0, "{eig:?}");
    }

    #[test]
    fn curves_solve_their_defining_equations(
        l in unimodular_index(), k in 1u32..=3, m in prop_oneof![Just(1e2), Just(1e3), Just(1e4)],
    ) {
        let curve = curve_points(&circle_points()[l], k, m, 25, (1e-2, 1e-8), CurveDepth::Chord).unwrap();
        prop_assert!(curve.max_residual() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn clark_probe_residuals_are_small(seed in any::<u64>(), k in 0usize..6, z in disk_point()) {
        let z = z * (0.9 / 0.95);
        for m in [family(seed).1[0].clone(), special_maps()[k].clone()] {
            let cs = find_contact_points(&m).unwrap();
            for p in &cs.points {
                let probe = clark_radial_probe(&m, p.boundary_value(), z).unwrap();
                prop_assert!(probe.residual < 1e-6, "{probe:?}");
            }
        }
    }

    #[test]
    fn norm_bound_holds_for_lfts(seed in any::<u64>(), shrink in 0.3f64..1.0) {
        let (_, maps) = family(seed);
        let base = match &maps[0] { SelfMap::Lft(l) => l.clone(), _ => unreachable!() };
        let s = Number::frac((shrink * 1000.0) as i64, 1000);
        let scaled = Lft::new(&base.a * &s, &base.b * &s, base.c.clone(), base.d.clone()).unwrap();
        for m in [maps[0].clone(), SelfMap::Lft(scaled)] {
            let bound = (2.0 / (1.0 - m.eval(&Number::zero()).unwrap().abs_f64())).sqrt();
            let fs = finite_section(&Combination::new(vec![m], vec![Number::one()], SpaceSpec::hardy()).unwrap(), 256).unwrap();
            prop_assert!(operator_norm_estimate(&fs) <= bound + 1e-9);
        }
    }

    #[test]
    fn first_order_bound_is_reached_by_kernels(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (params, maps) = family(seed);
        let groups = oracle_groups(&params);
        let coeffs = random_coeffs(&mut rng, &groups, maps.len(), false);
        // both sides scale like |c|^2; compare at unit scale
        let scale = coeffs.iter().map(Number::abs_f64).fold(1.0, f64::max).ceil() as i64;
        let coeffs: Vec<Number> = coeffs.iter().map(|c| c / &Number::int(scale)).collect();
        let comb = Combination::new(maps, coeffs, SpaceSpec::hardy()).unwrap();
        let zeta = params[0].zeta.clone();
        let bound = first_order_lower_bound(&comb, &zeta).unwrap().re_f64();
        let curve = curve_points(&zeta, 1, 1e4, 31, (1e-3, 1e-8), CurveDepth::Chord).unwrap();
        let est = kernel_lowerbound_estimate(&comb, &curve).unwrap().estimate;
        prop_assert!(bound <= est + 1e-3, "{bound} vs {est}");
        // the kernel sum tends to the first-order bound as the scale A shrinks
        let limit = kernel_sum_lower_bound(&comb, &zeta, 2, 1e-9).unwrap();
        prop_assert!((limit - bound).abs() <= 0.01 * bound.max(1e-12), "{limit} vs {bound}");
    }
}
