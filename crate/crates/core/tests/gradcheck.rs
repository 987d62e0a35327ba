//! Central-difference gradient checks for both architectures in 64-bit mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tduofc::train::{
    build_xor_dataset, evaluate_dataset, forward_backward, Architecture, Example,
    ModAddTransformer, XorMlp,
};

const FD_STEP: f64 = 1e-3;
const REL_TOL: f64 = 1e-4;

fn central_difference(arch: &dyn Architecture, params: &[f64], batch: &[Example], idx: usize) -> f64 {
    let mut plus = params.to_vec();
    plus[idx] += FD_STEP;
    let mut minus = params.to_vec();
    minus[idx] -= FD_STEP;
    let (loss_plus, _) = evaluate_dataset(arch, &plus, batch);
    let (loss_minus, _) = evaluate_dataset(arch, &minus, batch);
    (loss_plus - loss_minus) / (2.0 * FD_STEP)
}

fn check_random_coordinates(
    arch: &dyn Architecture,
    batch: &[Example],
    seed: u64,
    n_coords: usize,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // random parameters away from init symmetry
    let params: Vec<f64> = (0..arch.n_params()).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let (_loss, _acc, grad) = forward_backward(arch, &params, batch).unwrap();

    for _ in 0..n_coords {
        let idx = rng.gen_range(0..arch.n_params());
        let numeric = central_difference(arch, &params, batch, idx);
        let analytic = grad[idx];
        let rel = (analytic - numeric).abs() / analytic.abs().max(1.0);
        assert!(
            rel <= REL_TOL,
            "coordinate {idx}: analytic {analytic}, numeric {numeric}, rel err {rel}"
        );
    }
}

#[test]
fn xor_mlp_gradients_match_central_differences() {
    let mlp = XorMlp::new(7).unwrap();
    check_random_coordinates(&mlp, &build_xor_dataset(), 0xf00d, 20);
}

#[test]
fn transformer_gradients_match_central_differences() {
    let tf = ModAddTransformer::new(7, 8, 2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let batch: Vec<Example> = (0..6)
        .map(|_| {
            let a = rng.gen_range(0..7u32);
            let b = rng.gen_range(0..7u32);
            Example { a, b, label: (a + b) % 7 }
        })
        .collect();
    check_random_coordinates(&tf, &batch, 0xbeef, 20);
}

#[test]
fn transformer_gradients_match_at_canonical_width() {
    // the d_model=24, 4-head shape used by the real sweeps
    let tf = ModAddTransformer::new(59, 24, 4, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let batch: Vec<Example> = (0..4)
        .map(|_| {
            let a = rng.gen_range(0..59u32);
            let b = rng.gen_range(0..59u32);
            Example { a, b, label: (a + b) % 59 }
        })
        .collect();
    check_random_coordinates(&tf, &batch, 0xcafe, 20);
}

#[test]
fn duplicated_batch_leaves_gradient_unchanged() {
    let tf = ModAddTransformer::new(7, 8, 2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let params: Vec<f64> = (0..tf.n_params()).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let ex = Example { a: 2, b: 6, label: 1 };
    let (l1, _, g1) = forward_backward(&tf, &params, &[ex]).unwrap();
    let (l5, _, g5) = forward_backward(&tf, &params, &vec![ex; 5]).unwrap();
    assert!((l1 - l5).abs() < 1e-12);
    for (a, b) in g1.iter().zip(g5.iter()) {
        assert!((a - b).abs() < 1e-12);
    }
}
