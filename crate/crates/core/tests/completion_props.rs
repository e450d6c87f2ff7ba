use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tnnr::*;

fn gaussian(dims: Dims, rng: &mut ChaCha8Rng) -> Tensor {
    let data = (0..dims.0 * dims.1 * dims.2).map(|_| rng.sample(StandardNormal)).collect();
    Tensor::new(dims, data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn projection_is_idempotent_and_self_adjoint(
        n1 in 1usize..8, n2 in 1usize..8, n3 in 1usize..5, sr in 0.05..1.0f64, seed in any::<u64>()
    ) {
        let dims = (n1, n2, n3);
        let mask = ObservationMask::uniform(dims, sr, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let (x, y) = (gaussian(dims, &mut rng), gaussian(dims, &mut rng));
        let px = project(&mask, &x).unwrap();
        prop_assert_eq!(project(&mask, &px).unwrap(), px.clone());
        let lhs = px.inner_product(&y).unwrap();
        let rhs = x.inner_product(&project(&mask, &y).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn gradient_is_two_lipschitz(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = (5, 4, 3);
        let m = gaussian(dims, &mut rng);
        let loss = CompletionLoss::new(ObservationMask::uniform(dims, 0.6, seed).unwrap(), &m).unwrap();
        let (a, b) = (gaussian(dims, &mut rng), gaussian(dims, &mut rng));
        let gd = loss.grad(&a).unwrap().distance(&loss.grad(&b).unwrap()).unwrap();
        prop_assert!(gd <= loss.lipschitz() * a.distance(&b).unwrap() + 1e-12);
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-6;
    for trial in 0..20 {
        let dims = (6, 5, 4);
        let m = gaussian(dims, &mut rng);
        let loss = CompletionLoss::new(ObservationMask::uniform(dims, 0.5, trial).unwrap(), &m).unwrap();
        let x = gaussian(dims, &mut rng);
        let d = gaussian(dims, &mut rng);
        let fd = (loss.value(&x.axpy(h, &d).unwrap()).unwrap() - loss.value(&x.axpy(-h, &d).unwrap()).unwrap()) / (2.0 * h);
        let exact = loss.grad(&x).unwrap().inner_product(&d).unwrap();
        assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
    }
}

#[test]
fn synthetic_instances_are_reproducible() {
    let a = synth_instance::<f64>(9, 7, 5, 3, 0.45, 77).unwrap();
    let b = synth_instance::<f64>(9, 7, 5, 3, 0.45, 77).unwrap();
    let c = synth_instance::<f64>(9, 7, 5, 3, 0.45, 78).unwrap();
    assert_eq!(a.m_true.as_slice(), b.m_true.as_slice());
    assert_eq!(a.mask, b.mask);
    assert_ne!(a.m_true.as_slice(), c.m_true.as_slice());
    assert_eq!(a.mask.observed_count(), (0.45f64 * 315.0).round() as usize);
}

#[test]
fn single_precision_instance() {
    let inst = synth_instance::<f32>(8, 8, 3, 2, 0.7, 1).unwrap();
    let loss = CompletionLoss::new(inst.mask.clone(), &inst.m_true).unwrap();
    assert_eq!(loss.value(&inst.m_true).unwrap(), 0.0);
    assert_eq!(multi_rank(&inst.m_true, 1e-4).unwrap().tubal_rank, 2);
}
