use proptest::prelude::*;

use gkp_osc::codes::CodeSpec;
use gkp_osc::modular::{reduce, reduce_gkp, GKP_PERIOD};
use gkp_osc::noise::{reshape_noise, NoiseVector};
use gkp_osc::symplectic::SymplecticTransform;

#[derive(Clone, Debug)]
enum Gate {
    Sum(usize, usize),
    Squeeze(f64, usize),
    TwoMode(f64, usize, usize),
    Splitter(f64, usize, usize),
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let pair = (0..n, 0..n).prop_filter("distinct modes", |(a, b)| a != b);
    prop_oneof![
        pair.clone().prop_map(|(j, k)| Gate::Sum(j, k)),
        (-3.0f64..3.0, 0..n).prop_map(|(l, j)| Gate::Squeeze(l.exp(), j)),
        (1.0f64..40.0, pair.clone()).prop_map(|(g, (j, k))| Gate::TwoMode(g, j, k)),
        (0.0f64..=1.0, pair).prop_map(|(e, (j, k))| Gate::Splitter(e, j, k)),
    ]
}

fn build(g: &Gate, n: usize) -> SymplecticTransform {
    match *g {
        Gate::Sum(j, k) => SymplecticTransform::sum_gate(j, k, n),
        Gate::Squeeze(l, j) => SymplecticTransform::single_mode_squeeze(l, j, n),
        Gate::TwoMode(g, j, k) => SymplecticTransform::two_mode_squeeze(g, j, k, n),
        Gate::Splitter(e, j, k) => SymplecticTransform::beam_splitter(e, j, k, n),
    }
    .unwrap()
}

fn circuit() -> impl Strategy<Value = (usize, Vec<Gate>)> {
    (2usize..6).prop_flat_map(|n| (Just(n), prop::collection::vec(gate(n), 1..6)))
}

fn compose_all(n: usize, gates: &[Gate]) -> SymplecticTransform {
    gates.iter().fold(SymplecticTransform::identity(n), |acc, g| build(g, n).compose(&acc).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn circuits_are_symplectic((n, gates) in circuit()) {
        let s = compose_all(n, &gates);
        prop_assert!(s.is_symplectic(), "deviation {}", s.symplectic_deviation());
        prop_assert!((s.determinant() - 1.0).abs() < 1e-6 * s.matrix().amax().powi(2 * n as i32).max(1.0));
    }

    #[test]
    fn inverse_undoes_circuit((n, gates) in circuit()) {
        let s = compose_all(n, &gates);
        let id = s.compose(&s.inverse()).unwrap();
        prop_assert!(id.max_abs_diff(&SymplecticTransform::identity(n)) < 1e-9 * s.matrix().amax().powi(2).max(1.0));
    }

    #[test]
    fn application_is_linear((n, gates) in circuit(), a in -2.0f64..2.0, seed in 0u64..1000) {
        let s = compose_all(n, &gates);
        let x: Vec<f64> = (0..2 * n).map(|i| ((seed + i as u64) as f64 * 0.731).sin()).collect();
        let y: Vec<f64> = (0..2 * n).map(|i| ((seed * 3 + i as u64) as f64 * 1.37).cos()).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + v).collect();
        let sx = s.apply(&NoiseVector::from_vec(x).unwrap()).unwrap();
        let sy = s.apply(&NoiseVector::from_vec(y).unwrap()).unwrap();
        let sxy = s.apply(&NoiseVector::from_vec(xy).unwrap()).unwrap();
        let scale = s.matrix().amax().max(1.0) * 10.0;
        for i in 0..2 * n {
            prop_assert!((sxy.as_slice()[i] - (a * sx.as_slice()[i] + sy.as_slice()[i])).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn reduction_is_periodic_and_centred(z in -50.0f64..50.0, k in -20i32..20) {
        let r = reduce_gkp(z);
        prop_assert!(r.abs() <= 0.5 * GKP_PERIOD);
        let shifted = reduce_gkp(z + k as f64 * GKP_PERIOD);
        // away from the cell boundary the shift is invisible
        if (r.abs() - 0.5 * GKP_PERIOD).abs() > 1e-9 {
            prop_assert!((shifted - r).abs() < 1e-12 * (1.0 + z.abs() + (k as f64 * GKP_PERIOD).abs()));
        }
        let m = ((z - r) / GKP_PERIOD).round();
        prop_assert!((z - r - m * GKP_PERIOD).abs() < 1e-12 * (1.0 + z.abs()));
    }

    #[test]
    fn reduction_with_general_modulus(z in -10.0f64..10.0, s in 0.1f64..5.0) {
        let r = reduce(z, s).unwrap();
        prop_assert!(r.abs() <= 0.5 * s + 1e-15);
        prop_assert!(((z - r) / s - ((z - r) / s).round()).abs() < 1e-9);
    }

    #[test]
    fn beam_splitters_are_transversal(g in 1.0f64..30.0, eta in 0.0f64..=1.0) {
        let pair = CodeSpec::gkp_tms(g).unwrap().parallel(2).unwrap();
        let bs = SymplecticTransform::beam_splitter(eta, 0, 1, 2).unwrap();
        let physical = pair.logical_gate(&bs, &bs).unwrap();
        let direct = SymplecticTransform::beam_splitter(eta, 0, 1, 4).unwrap()
            .compose(&SymplecticTransform::beam_splitter(eta, 2, 3, 4).unwrap()).unwrap();
        prop_assert!(physical.max_abs_diff(&direct) < 1e-10);
    }

    #[test]
    fn two_mode_squeezer_decomposes(g in 1.0f64..200.0) {
        let lam = g.sqrt() + (g - 1.0).sqrt();
        let bs = SymplecticTransform::beam_splitter(0.5, 0, 1, 2).unwrap();
        let sq = SymplecticTransform::single_mode_squeeze(1.0 / lam, 0, 2).unwrap()
            .compose(&SymplecticTransform::single_mode_squeeze(lam, 1, 2).unwrap()).unwrap();
        let lhs = bs.compose(&sq).unwrap().compose(&bs.inverse()).unwrap();
        let ts = SymplecticTransform::two_mode_squeeze(g, 0, 1, 2).unwrap();
        prop_assert!(lhs.max_abs_diff(&ts) < 1e-12 * g);
    }

    #[test]
    fn tms_reshaping_formula(g in 1.0f64..50.0, x in prop::array::uniform4(-1.0f64..1.0)) {
        let code = CodeSpec::gkp_tms(g).unwrap();
        let z = reshape_noise(code.encoder(), &NoiseVector::from_vec(x.to_vec()).unwrap()).unwrap();
        let (a, b) = (g.sqrt(), (g - 1.0).sqrt());
        let expected = [a * x[0] - b * x[2], a * x[1] + b * x[3], a * x[2] - b * x[0], a * x[3] + b * x[1]];
        for i in 0..4 {
            prop_assert!((z.as_slice()[i] - expected[i]).abs() < 1e-12 * (1.0 + a));
        }
    }
}
