use vqaudit_core::nn::Matrix;
use vqaudit_core::vqvae::Codebook;

mod common;

#[test]
fn quantize_matches_exhaustive_search() {
    let r = common::check_quantization_oracle();
    assert!(r.is_ok(), "{r:?}");
}

#[test]
fn equidistant_embeddings_resolve_to_lowest_index() {
    let emb = Matrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
    let cb = Codebook::new(emb, 0.95).unwrap();
    assert_eq!(cb.quantize(&[0.0, 0.0]).unwrap().0, 0);
    assert_eq!(cb.quantize(&[-0.5, 0.5]).unwrap().0, 1);
    assert_eq!(cb.quantize(&[0.0, -3.0]).unwrap().0, 3);
}

#[test]
fn ema_converges_to_cluster_means() {
    let r = common::check_ema_fixed_point();
    assert!(r.is_ok(), "{r:?}");
}

#[test]
fn ema_from_zero_state_hits_the_mean_at_once() {
    let z = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![10.0, -10.0]]).unwrap();
    let mut cb = Codebook::new(Matrix::zeros(2, 2), 0.95).unwrap();
    cb.ema_update(&z, &[1, 1, 0]).unwrap();
    // (1 - η)·sum / ((1 - η)·count): the ratio is the batch mean
    let e1 = cb.embedding(1);
    assert!((e1[0] - 2.0).abs() < 1e-12 && (e1[1] - 3.0).abs() < 1e-12, "{e1:?}");
    assert_eq!(cb.embedding(0), [10.0, -10.0]);
}

#[test]
fn perplexity_and_purity_cases() {
    let r = common::check_perplexity_purity();
    assert!(r.is_ok(), "{r:?}");
}
