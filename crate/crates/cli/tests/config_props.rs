use helmfield_cli::{RunConfig, SourceKind};
use proptest::prelude::*;

fn source() -> impl Strategy<Value = SourceKind> {
    prop_oneof![Just(SourceKind::Static), Just(SourceKind::SwitchOn), Just(SourceKind::Oscillating)]
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3..1e3f64, 1e-12..1e-3f64, Just(0.0)]
}

proptest! {
    #[test]
    fn text_round_trip_is_exact_and_idempotent(
        n in 2usize..64,
        nt in 1usize..5000,
        source in source(),
        reals in prop::collection::vec(finite(), 22),
        every in 0usize..100,
        out in "[a-z][a-z0-9_/]{0,12}",
    ) {
        let cfg = RunConfig {
            n: 2 * n,
            box_len: reals[0].abs() + 1.0,
            dt: reals[1].abs() + 1e-3,
            nt,
            source,
            q: reals[2],
            sigma: reals[3],
            center: [reals[4], reals[5], reals[6]],
            direction: [reals[7], reals[8], reals[9]],
            t_on: reals[10],
            ramp: reals[11],
            current: reals[12],
            separation: reals[13],
            amplitude: reals[14],
            omega: reals[15],
            threshold: reals[16],
            instant_threshold: reals[17],
            margin_cells: reals[18],
            speed_band: reals[19],
            ratio_bound: reals[20],
            tol_rohrlich: reals[21],
            tol_split: 1e-6,
            tol_identity: 1e-8,
            tol_equations: 1e-5,
            snapshot_every: every,
            out_dir: out,
        };
        let text = cfg.to_text();
        let back = RunConfig::parse_unchecked(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_text(), text);
    }
}
