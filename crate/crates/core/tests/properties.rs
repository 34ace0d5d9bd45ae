use helmfield_core::field::Field;
use helmfield_core::generate::gen_random_smooth;
use helmfield_core::greens::propagate_mode;
use helmfield_core::helmholtz::decompose;
use helmfield_core::sources::{continuity_residual, sample_sources, SourceModel, Trajectory};
use helmfield_core::vec3::CZERO;
use helmfield_core::{io, spectral, Complex64, Grid, GridSpec, RealScalarField, RealVectorField};
use proptest::prelude::*;

fn even() -> impl Strategy<Value = usize> {
    (2usize..7).prop_map(|h| 2 * h)
}

fn any_grid() -> impl Strategy<Value = Grid> {
    (even(), even(), even(), 1.0..20.0f64)
        .prop_map(|(nx, ny, nz, box_len)| Grid::new(GridSpec { nx, ny, nz, box_len, dt: 1e-3, nt: 1 }).unwrap())
}

fn scale_of(g: &Grid) -> f64 {
    (0..3).map(|a| g.wavenumbers(a).iter().fold(0.0f64, |m, v| m.max(v.abs()))).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projectors_are_complementary_orthogonal_idempotent(g in any_grid(), seed in any::<u64>(), cutoff in 0.2..1.0f64) {
        let a = gen_random_smooth(&g, seed, cutoff);
        let norm = a.l2_norm().max(1e-300);
        let s = spectral::forward(&a);
        let par = spectral::project_longitudinal(&s);
        let perp = spectral::project_transverse(&s);
        prop_assert!((&spectral::project_longitudinal(&par) - &par).l2_norm() <= 1e-13 * norm);
        prop_assert!((&spectral::project_transverse(&perp) - &perp).l2_norm() <= 1e-13 * norm);
        prop_assert!(spectral::project_longitudinal(&perp).l2_norm() <= 1e-13 * norm);
        prop_assert!(spectral::project_transverse(&par).l2_norm() <= 1e-13 * norm);
        prop_assert!((&(&par + &perp) - &s).l2_norm() <= 1e-13 * norm);
        let k = scale_of(&g);
        prop_assert!(spectral::curl(&par).l2_norm() <= 1e-13 * k * norm);
        prop_assert!(spectral::divergence(&perp).l2_norm() <= 1e-13 * k * norm);
    }

    #[test]
    fn decomposition_reconstructs_and_is_linear(g in any_grid(), s1 in any::<u64>(), s2 in any::<u64>(), alpha in -3.0..3.0f64) {
        let a = gen_random_smooth(&g, s1, 0.8);
        let b = gen_random_smooth(&g, s2, 0.5);
        let mix = &a.scaled(alpha) + &b;
        let (da, db, dm) = (decompose(&a), decompose(&b), decompose(&mix));
        prop_assert!(da.residual <= 1e-13);
        let scale = a.l2_norm() * alpha.abs() + b.l2_norm() + 1e-300;
        let expect_par = &da.a_par.scaled(alpha) + &db.a_par;
        let expect_perp = &da.a_perp.scaled(alpha) + &db.a_perp;
        prop_assert!((&dm.a_par - &expect_par).l2_norm() <= 1e-13 * scale);
        prop_assert!((&dm.a_perp - &expect_perp).l2_norm() <= 1e-13 * scale);
    }

    #[test]
    fn vector_files_round_trip_bit_exactly(g in any_grid(), values in prop::collection::vec(-1e300..1e300f64, 1..64)) {
        let f = RealVectorField::from_fn(&g, |i| [0, 1, 2].map(|c| values[(3 * i + c) % values.len()])).unwrap();
        let back = io::decode(&io::encode_vector(&f), Some(&g)).unwrap().into_vector().unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn scalar_files_round_trip_without_a_grid(g in any_grid(), seed in any::<u64>()) {
        let v = gen_random_smooth(&g, seed, 0.9);
        let f = RealScalarField::from_vec(&g, v.component(1).to_vec()).unwrap();
        let back = io::decode(&io::encode_scalar(&f), None).unwrap().into_scalar().unwrap();
        prop_assert_eq!(back.data(), f.data());
        prop_assert_eq!(back.grid().dims(), g.dims());
        prop_assert_eq!(back.grid().box_len(), g.box_len());
    }

    #[test]
    fn truncated_files_are_rejected(g in any_grid(), cut in 1usize..200) {
        let bytes = io::encode_vector(&RealVectorField::zeros(&g));
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(io::decode(&bytes[..keep], None).is_err());
    }

    #[test]
    fn propagator_is_silent_before_the_source(omega in 0.0..20.0f64, dt in 0.001..0.2f64, onset in 1usize..40, amp in -5.0..5.0f64) {
        let src: Vec<_> = (0..onset + 20)
            .map(|n| if n < onset { CZERO } else { [Complex64::new(amp, 0.3), CZERO[1], Complex64::new(0.0, amp)] })
            .collect();
        let (u, du) = propagate_mode(omega, dt, &src);
        for n in 0..onset {
            prop_assert!(u[n] == CZERO && du[n] == CZERO);
        }
    }

    #[test]
    fn propagator_is_linear(omega in 0.0..10.0f64, a in prop::collection::vec(-1.0..1.0f64, 30), b in prop::collection::vec(-1.0..1.0f64, 30), k in -2.0..2.0f64) {
        let lift = |v: &[f64]| v.iter().map(|&x| [Complex64::new(x, 0.0), CZERO[1], CZERO[2]]).collect::<Vec<_>>();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| k * x + y).collect();
        let (ua, _) = propagate_mode(omega, 0.05, &lift(&a));
        let (ub, _) = propagate_mode(omega, 0.05, &lift(&b));
        let (us, _) = propagate_mode(omega, 0.05, &lift(&sum));
        for n in 0..30 {
            let expect = k * ua[n][0].re + ub[n][0].re;
            prop_assert!((us[n][0].re - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn switch_on_sources_satisfy_discrete_continuity(
        axis in prop::array::uniform3(-1.0..1.0f64),
        t_on in 0.2..0.6f64,
        ramp in 0.4..2.0f64,
        current in -2.0..2.0f64,
        separation in 1.0..3.0f64,
    ) {
        prop_assume!(axis.iter().map(|v| v * v).sum::<f64>() > 1e-2);
        let g = Grid::new(GridSpec::cubic(32, 16.0, 0.1, 24)).unwrap();
        let model = SourceModel {
            q: 1.0,
            sigma: 1.0,
            center: [8.0; 3],
            trajectory: Trajectory::SwitchOnCurrent { direction: axis, t_on, ramp, current, separation },
        };
        let (rho, j) = sample_sources(&model, &g, 24, 0.1).unwrap();
        prop_assert!(continuity_residual(&rho, &j) <= 1e-12);
    }

    #[test]
    fn oscillating_sources_satisfy_discrete_continuity(
        axis in prop::array::uniform3(-1.0..1.0f64),
        amplitude in -0.8..0.8f64,
        omega in 0.1..3.0f64,
    ) {
        prop_assume!(axis.iter().map(|v| v * v).sum::<f64>() > 1e-2);
        let g = Grid::new(GridSpec::cubic(32, 16.0, 0.1, 16)).unwrap();
        let model = SourceModel { q: 0.7, sigma: 1.0, center: [8.0; 3], trajectory: Trajectory::Oscillating { direction: axis, amplitude, omega } };
        let (rho, j) = sample_sources(&model, &g, 16, 0.1).unwrap();
        prop_assert!(continuity_residual(&rho, &j) <= 1e-12);
    }
}
