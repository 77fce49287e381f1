use std::sync::OnceLock;

use proptest::prelude::*;

use vplab::dynamics::{read_snapshot_from, write_snapshot_to, Direct, ForceSolver, Shell, Tree};
use vplab::ensemble::{ParticleEnsemble, Vec3};
use vplab::functionals::{Evaluation, PairOptions, SteadyConstants};
use vplab::stability::{
    concentration_profile, optimal_shift, Amplitude, Boost, Mode, Perturbation, ShiftOptions, SplitBulk,
};
use vplab::steady::{build_steady, sampler, BuildOptions, CasimirFunction, SteadyState};

fn k1() -> &'static SteadyState {
    static S: OnceLock<SteadyState> = OnceLock::new();
    S.get_or_init(|| build_steady(&CasimirFunction::polytropic(1.0).unwrap(), 1.0, &BuildOptions::default()).unwrap())
}

fn base(n: usize, seed: u64) -> ParticleEnsemble {
    sampler("quasi-random").unwrap().sample(k1(), n, seed).unwrap()
}

fn vec3() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn cloud() -> impl Strategy<Value = ParticleEnsemble> {
    prop::collection::vec((vec3(), vec3(), 0.1..2.0f64), 2..40).prop_map(|parts| {
        let mut e = ParticleEnsemble::empty();
        for (x, v, w) in parts {
            e.pos.push(x);
            e.vel.push(v);
            e.weight.push(w);
            e.f_init.push(1.0);
        }
        e
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn polytropes_have_negative_h_m_and_satisfy_virial(k in 0.2..1.45f64, mass in 0.1..10.0f64) {
        let s = build_steady(&CasimirFunction::polytropic(k).unwrap(), mass, &BuildOptions::default()).unwrap();
        prop_assert!(s.h_m < 0.0);
        prop_assert!(s.virial_residual() <= 1e-6, "virial {}", s.virial_residual());
        prop_assert!((s.enclosed_mass(2.0 * s.radius) - mass).abs() <= 1e-8 * mass);
    }

    #[test]
    fn perturbations_preserve_mass(
        v in vec3(),
        eps in -0.9..0.9f64,
        dir in vec3(),
        fraction in 0.05..0.6f64,
        seed in 0u64..1000,
    ) {
        let s = k1();
        let e = base(2000, seed);
        let m = e.total_mass();
        let dipole = if dir.norm() > 1e-3 { Mode::Dipole(dir.normalize()) } else { Mode::Radial };
        let perts: Vec<Box<dyn Perturbation>> = vec![
            Box::new(Boost { velocity: v }),
            Box::new(Amplitude { epsilon: eps, mode: Mode::Radial }),
            Box::new(Amplitude { epsilon: eps, mode: dipole }),
            Box::new(SplitBulk { fraction, velocity: v }),
        ];
        for p in perts {
            let out = p.apply(s, e.clone(), seed).unwrap();
            prop_assert!((out.total_mass() - m).abs() <= 1e-12 * m, "{}", p.kind());
            prop_assert!(out.weight.iter().all(|w| *w >= 0.0));
        }
    }

    #[test]
    fn boost_adds_uniform_momentum(v in vec3(), seed in 0u64..1000) {
        let e = base(1000, seed);
        let out = Boost { velocity: v }.apply(k1(), e.clone(), 0).unwrap();
        let dp = out.momentum() - e.momentum() - v * e.total_mass();
        prop_assert!(dp.norm() <= 1e-12);
    }

    #[test]
    fn direct_forces_conserve_momentum_and_energy_is_translation_invariant(e in cloud(), b in vec3()) {
        let solvers: Vec<Box<dyn ForceSolver>> = vec![
            Box::new(Direct { softening: 0.05 }),
            Box::new(Tree { softening: 0.05, theta: 0.5 }),
            Box::new(Shell { softening: 0.0 }),
        ];
        let moved = e.translated(&(b * 10.0));
        for f in &solvers {
            let (w0, w1) = (f.potential_energy(&e), f.potential_energy(&moved));
            prop_assert!((w0 - w1).abs() <= 1e-9 * w0.abs(), "{}: {w0} vs {w1}", f.name());
        }
        let acc = solvers[0].accelerations(&e);
        let total: Vec3 = acc.iter().zip(&e.weight).map(|(a, w)| a * *w).sum();
        let scale: f64 = acc.iter().zip(&e.weight).map(|(a, w)| a.norm() * w).sum();
        prop_assert!(total.norm() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn concentration_profile_is_monotone_and_bounded(e in cloud(), mut radii in prop::collection::vec(0.01..3.0f64, 1..8)) {
        radii.sort_by(f64::total_cmp);
        let prof = concentration_profile(&e, &radii, &Default::default()).unwrap();
        let m = e.total_mass();
        prop_assert!(prof.windows(2).all(|w| w[1].mass >= w[0].mass));
        prop_assert!(prof.iter().all(|p| p.mass > 0.0 && p.mass <= m * (1.0 + 1e-12)));
    }

    #[test]
    fn snapshots_round_trip_exactly(e in cloud()) {
        let mut buf = Vec::new();
        write_snapshot_to(&mut buf, &e).unwrap();
        let back = read_snapshot_from(buf.as_slice()).unwrap();
        prop_assert_eq!(&back.pos, &e.pos);
        prop_assert_eq!(&back.vel, &e.vel);
        prop_assert_eq!(&back.weight, &e.weight);
        prop_assert_eq!(&back.f_init, &e.f_init);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn optimal_shift_tracks_translations_and_dominates(b in vec3(), seed in 0u64..100) {
        let s = k1();
        let consts = SteadyConstants::new(s).unwrap();
        let b = b * 2.0 * s.radius;
        let e = base(2000, seed).translated(&b);
        let eval = Evaluation::new(&e, s, &consts, &PairOptions::default()).unwrap();
        let res = optimal_shift(&e, &eval, s.radius, consts.i00, None, &ShiftOptions::default()).unwrap();
        prop_assert!((res.vector() - b).norm() <= 1e-2 * s.radius, "b={:?} a={:?}", b, res.shift);
        for a in [Vec3::zeros(), b] {
            prop_assert!(res.field_distance <= eval.field_distance(&a) + 1e-12 * consts.i00.abs());
        }
    }
}
