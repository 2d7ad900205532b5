use adaptid::evolution::{fitness, perturb};
use adaptid::*;
use proptest::prelude::*;

fn eq31_record(n: usize, seed: u64) -> (Signal64, Signal64) {
    let x = gen_four_level(n, &mut RngStream::new(seed));
    let d = plant_response(&Plant::eq31(), &x).unwrap();
    (x, d)
}

#[test]
fn ga_baseline_finds_fir_plant() {
    let (x, d) = eq31_record(2_000, 21);
    let cfg = GaConfig64 {
        population_size: 40,
        generations: 200,
        ..GaConfig64::default()
    };
    let rep = ga_baseline_run(
        &x,
        &d,
        Structure::Fir { order: 4 },
        &cfg,
        &[],
        &mut RngStream::new(5),
    )
    .unwrap();
    let err: f64 = rep
        .final_weights
        .b
        .iter()
        .zip([0.03, 0.24, 0.54, 0.8])
        .map(|(w, p)| (w - p).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(err < 0.05, "{:?}", rep.final_weights.b);

    // Independent random-search oracle: nothing sampled beats the plant on the same block.
    let block_mse = |w: &[f64]| {
        let f = FirFilter64::with_weights(w.to_vec()).unwrap();
        f.frozen_mse(&x.as_slice()[..256], &d.as_slice()[..256])
            .unwrap()
    };
    let mut rng = RngStream::new(77);
    let plant_mse = block_mse(&[0.03, 0.24, 0.54, 0.8]);
    for _ in 0..2_000 {
        let w: Vec<f64> = (0..4).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        assert!(block_mse(&w) >= plant_mse);
    }
}

#[test]
fn fir_hybrid_is_slower_but_still_converges() {
    let (x, d) = eq31_record(10_000, 31);
    let run = LmsRunConfig64::new(0.02);
    let pure = run_fir_lms(&x, &d, 4, &run, None).unwrap();
    let cfg = LmsGaConfig64 {
        m: 5,
        offset_d: 0.02,
        gamma: 8,
        gradient_threshold: 1.0,
        t_e: 8,
    };
    let hy = lms_ga_run(
        &x,
        &d,
        Structure::Fir { order: 4 },
        None,
        &cfg,
        &run,
        &mut RngStream::new(1),
    )
    .unwrap();
    assert!(hy.trigger_count() > 0);
    for (w, p) in hy.final_weights.b.iter().zip([0.03, 0.24, 0.54, 0.8]) {
        assert!((w - p).abs() < 1e-5);
    }
    assert!(hy.converged_at.unwrap() >= pure.converged_at.unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn offsprings_stay_within_offset(
        genes in prop::collection::vec(-2.0f64..2.0, 1..8),
        d in 0.0f64..1.0,
        m in 1usize..10,
        seed in any::<u64>(),
    ) {
        let parent = Chromosome::new(genes);
        let kids = spawn_offsprings(&parent, m, d, &mut RngStream::new(seed));
        prop_assert_eq!(kids.len(), m);
        for k in &kids {
            for (g, p) in k.genes.iter().zip(&parent.genes) {
                prop_assert!((g - p).abs() <= d * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn perturb_is_linear_in_sigma(genes in prop::collection::vec(-2.0f64..2.0, 1..6), d in 0.0f64..1.0) {
        let parent = Chromosome::new(genes.clone());
        let ones = vec![1.0; genes.len()];
        let up = perturb(&parent, &ones, d);
        for (u, g) in up.genes.iter().zip(&genes) {
            prop_assert!((u - (g + d)).abs() < 1e-12);
        }
    }

    #[test]
    fn fitness_is_strictly_decreasing_in_cost(a in 0.0f64..1e3, delta in 1e-3f64..1e3) {
        let fa = fitness(a).unwrap();
        let fb = fitness(a + delta).unwrap();
        prop_assert!(fa > fb);
        prop_assert!(fa <= 1.0 && fb > 0.0);
    }

    #[test]
    fn hybrid_with_zero_threshold_matches_lms(seed in any::<u64>(), mu in 0.01f64..0.04) {
        let (x, d) = eq31_record(1_500, seed);
        let mut run = LmsRunConfig64::new(mu);
        run.stop_on_convergence = false;
        let pure = run_fir_lms(&x, &d, 4, &run, None).unwrap();
        let cfg = LmsGaConfig64 { m: 5, offset_d: 0.02, gamma: 8, gradient_threshold: 0.0, t_e: 8 };
        let hy = lms_ga_run(&x, &d, Structure::Fir { order: 4 }, None, &cfg, &run, &mut RngStream::new(seed)).unwrap();
        prop_assert_eq!(hy.trigger_count(), 0);
        prop_assert_eq!(hy.curve, pure.curve);
        prop_assert_eq!(hy.final_weights, pure.final_weights);
    }
}
