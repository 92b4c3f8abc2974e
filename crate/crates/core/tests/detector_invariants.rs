use gbcd_core::baselines::{Lmmse, Ocd};
use gbcd_core::detector::{
    gbcd_equalize, gbcd_equalize_with, matched_filter, residual_gap, DenoiserSchedule, EqualizerState, FloatPath,
};
use gbcd_core::mimo::{complex_gaussian_matrix, transmit, Constellation};
use gbcd_core::rng::stream;
use gbcd_core::{CMatrix, Complex64, GbcdConfig, NoTally, Preprocessed};
use proptest::prelude::*;

struct Instance {
    h: CMatrix,
    y: gbcd_core::CVector,
    c: Constellation,
}

fn instance(seed: u64, b: usize, u: usize, q: usize, snr: f64) -> Instance {
    let mut rng = stream(seed, &[0xD7]);
    let c = Constellation::new(q).unwrap();
    let h = complex_gaussian_matrix(b, u, 1.0, &mut rng);
    let y = transmit(&h, &c, 1, snr, &mut rng).unwrap().y.column(0).into_owned();
    Instance { h, y, c }
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=2).prop_flat_map(|l| (1usize..=4).prop_flat_map(move |blocks| ((l * blocks)..=16).prop_map(move |b| (b, l * blocks, l))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residual_identity_after_every_step(
        seed in any::<u64>(),
        (b, u, l) in dims(),
        k in 1usize..=4,
        sort in any::<bool>(),
        pme in any::<bool>(),
    ) {
        let inst = instance(seed, b, u, 16, 8.0);
        let cfg = GbcdConfig { block_size: l, sort, iterations: k };
        let pre = Preprocessed::new(&inst.h, 0.1, 1.0, &cfg).unwrap();
        let sched = if pme {
            DenoiserSchedule::pme(&vec![4.0; k], &vec![inst.c.scale(); k], &inst.c).unwrap()
        } else {
            DenoiserSchedule::boxed(&inst.c)
        };
        let y_mf = matched_filter(&inst.h, &inst.y, &mut NoTally);
        let mut worst = 0.0f64;
        let mut steps = Vec::new();
        let mut hook = |it: usize, m: usize, st: &EqualizerState| {
            worst = worst.max(residual_gap(&pre, &y_mf, st));
            steps.push((it, m));
        };
        gbcd_equalize_with(&pre, &y_mf, &sched, k, &FloatPath, &mut NoTally, Some(&mut hook)).unwrap();
        prop_assert!(worst < 1e-10, "gap {}", worst);
        prop_assert_eq!(steps.len(), k * u / l);
    }

    #[test]
    fn every_ue_updated_once_per_iteration(seed in any::<u64>(), (b, u, l) in dims(), sort in any::<bool>()) {
        let inst = instance(seed, b, u, 4, 5.0);
        let cfg = GbcdConfig { block_size: l, sort, iterations: 1 };
        let pre = Preprocessed::new(&inst.h, 0.1, 1.0, &cfg).unwrap();
        let mut seen: Vec<usize> = pre.blocks.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..u).collect::<Vec<_>>());
        prop_assert!(pre.blocks.iter().all(|blk| blk.len() == l));
    }

    #[test]
    fn unit_blocks_match_ocd(seed in any::<u64>(), u in 1usize..=8, extra in 0usize..8, k in 1usize..=4) {
        let inst = instance(seed, u + extra, u, 16, 10.0);
        let cfg = GbcdConfig { block_size: 1, sort: false, iterations: k };
        let pre = Preprocessed::new(&inst.h, 0.1, 1.0, &cfg).unwrap();
        let st = gbcd_equalize(&pre, &matched_filter(&inst.h, &inst.y, &mut NoTally), &DenoiserSchedule::boxed(&inst.c), k).unwrap();
        let ocd = Ocd::new(&inst.h, &mut NoTally).unwrap();
        let (z, v) = ocd.equalize(&inst.h, &inst.y, k, inst.c.max_amplitude(), &mut NoTally).unwrap();
        prop_assert!((&st.z - &z).norm() <= 1e-8 * z.norm().max(1.0));
        prop_assert!((&st.v_last - &v).norm() <= 1e-8 * v.norm().max(1.0));
    }

    #[test]
    fn lmmse_residual_orthogonality(seed in any::<u64>(), u in 1usize..=8, extra in 0usize..8, n0 in 0.01f64..1.0) {
        let inst = instance(seed, u + extra, u, 16, 10.0);
        let lmmse = Lmmse::new(&inst.h, n0, 1.0, &mut NoTally).unwrap();
        let s = lmmse.equalize(&inst.h, &inst.y, &mut NoTally);
        let a = inst.h.adjoint() * &inst.h + CMatrix::identity(u, u) * Complex64::new(n0, 0.0);
        let y_mf = inst.h.adjoint() * &inst.y;
        prop_assert!((&y_mf - a * s).norm() <= 1e-8 * y_mf.norm().max(1.0));
    }

    #[test]
    fn ocd_sweeps_never_increase_objective(seed in any::<u64>(), u in 1usize..=8, extra in 0usize..8) {
        let inst = instance(seed, u + extra, u, 16, 6.0);
        let ocd = Ocd::new(&inst.h, &mut NoTally).unwrap();
        let mut prev = inst.y.norm_squared();
        for k in 1..=5 {
            let (z, _) = ocd.equalize(&inst.h, &inst.y, k, inst.c.max_amplitude(), &mut NoTally).unwrap();
            let obj = (&inst.y - &inst.h * z).norm_squared();
            prop_assert!(obj <= prev * (1.0 + 1e-12) + 1e-12);
            prev = obj;
        }
    }
}

#[test]
fn noiseless_orthogonal_error_nonincreasing() {
    let c = Constellation::new(64).unwrap();
    for seed in 0..50u64 {
        let mut rng = stream(seed, &[0x0F]);
        // Columns of a unitary matrix, scaled per UE.
        let q = complex_gaussian_matrix(12, 6, 1.0, &mut rng).qr().q();
        let h = CMatrix::from_fn(12, 6, |r, col| q[(r, col)] * (1.0 + col as f64 * 0.3));
        let s = gbcd_core::CVector::from_fn(6, |i, _| c.point((seed as usize * 7 + i * 13) % 64));
        let y_mf = matched_filter(&h, &(&h * &s), &mut NoTally);
        let pre = Preprocessed::new(&h, 1e-6, 1.0, &GbcdConfig::default()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=4 {
            let st = gbcd_equalize(&pre, &y_mf, &DenoiserSchedule::boxed(&c), k).unwrap();
            let err = (&st.z - &s).norm();
            assert!(err <= prev + 1e-12, "seed {seed}, k {k}");
            prev = err;
        }
        assert!(prev < 1e-10);
    }
}
