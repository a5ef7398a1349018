use dit_core::space::{sample_informed, sample_uniform, InformedSet, StateVec};
use dit_core::world::{
    default_rectangle_count, is_motion_valid, make_narrow_passage, make_random_rectangles,
    Environment, MotionCheckConfig, DEFAULT_RECTANGLE_WIDTHS,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state(v: Vec<f64>) -> StateVec {
    StateVec::new(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn same_seed_same_samples(seed in any::<u64>(), dim in 2usize..10) {
        let mut a = ChaCha8Rng::seed_from_u64(seed);
        let mut b = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            prop_assert_eq!(sample_uniform(dim, &mut a), sample_uniform(dim, &mut b));
        }
        let set = InformedSet::new(StateVec::with_prefix(dim, 0.2, 0.5, 0.5), StateVec::with_prefix(dim, 0.8, 0.5, 0.5), 0.9).unwrap();
        for _ in 0..20 {
            prop_assert_eq!(sample_informed(&set, &mut a).unwrap(), sample_informed(&set, &mut b).unwrap());
        }
    }

    #[test]
    fn informed_samples_lie_in_the_set(
        seed in any::<u64>(),
        s in prop::collection::vec(0.0f64..1.0, 4),
        g in prop::collection::vec(0.0f64..1.0, 4),
        ratio in 1.0f64..3.0,
    ) {
        let start = state(s);
        let goal = state(g);
        let c_min = InformedSet::new(start.clone(), goal.clone(), f64::INFINITY).unwrap().c_min();
        let set = InformedSet::new(start, goal, c_min * ratio).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            match sample_informed(&set, &mut rng) {
                Ok(x) => {
                    prop_assert!(set.contains(x.coords()));
                    prop_assert!(x.coords().iter().all(|c| (0.0..=1.0).contains(c)));
                }
                // a near-degenerate spheroid can exhaust the rejection budget
                Err(_) => prop_assert!(ratio < 1.0 + 1e-6),
            }
        }
    }

    #[test]
    fn motion_validity_is_symmetric(
        seed in 0u64..1000,
        dim in 2usize..6,
        a in prop::collection::vec(0.0f64..1.0, 6),
        b in prop::collection::vec(0.0f64..1.0, 6),
        resolution in 0.001f64..0.05,
    ) {
        let env = make_random_rectangles(dim, default_rectangle_count(dim), seed, DEFAULT_RECTANGLE_WIDTHS).unwrap();
        let a = state(a[..dim].to_vec());
        let b = state(b[..dim].to_vec());
        prop_assume!(env.is_valid(a.coords()) && env.is_valid(b.coords()));
        let cfg = MotionCheckConfig { resolution, ..MotionCheckConfig::default() };
        prop_assert_eq!(is_motion_valid(&env, &a, &b, &cfg), is_motion_valid(&env, &b, &a, &cfg));
    }

    #[test]
    fn free_segments_stay_valid_when_coarsened(
        a in prop::collection::vec(0.0f64..1.0, 3),
        b in prop::collection::vec(0.0f64..1.0, 3),
        resolution in 0.001f64..0.02,
        k in 1.0f64..2.5,
    ) {
        let env = Environment::new(3, vec![], state(vec![0.0; 3]), state(vec![1.0; 3])).unwrap();
        let (a, b) = (state(a), state(b));
        let fine = MotionCheckConfig { resolution, ..MotionCheckConfig::default() };
        let coarse = MotionCheckConfig { resolution: resolution * k, ..fine };
        prop_assert!(is_motion_valid(&env, &a, &b, &fine));
        prop_assert!(is_motion_valid(&env, &a, &b, &coarse));
    }

    #[test]
    fn generated_environments_are_well_formed(seed in any::<u64>(), dim in 2usize..17) {
        for env in [
            make_random_rectangles(dim, default_rectangle_count(dim), seed, DEFAULT_RECTANGLE_WIDTHS).unwrap(),
            make_narrow_passage(dim).unwrap(),
        ] {
            prop_assert!(env.is_valid(env.start().coords()));
            prop_assert!(env.is_valid(env.goal().coords()));
            for o in env.obstacles() {
                prop_assert!(o.lower.iter().zip(&o.upper).all(|(l, u)| 0.0 <= *l && l <= u && *u <= 1.0));
            }
            let back = Environment::from_json(&env.to_json()).unwrap();
            prop_assert_eq!(back, env);
        }
    }
}
