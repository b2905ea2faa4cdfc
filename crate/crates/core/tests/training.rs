use vqaudit_core::trainer::{TrainConfig, Trainer};

mod common;

#[test]
fn same_seed_same_model_and_log() {
    let s = common::synthetic();
    let config = TrainConfig {
        codebook_size: 8,
        max_epochs: 3,
        seed: 4,
        ..TrainConfig::default()
    };
    let a = Trainer::new(config.clone()).run(&s.data).unwrap();
    let b = Trainer::new(config).run(&s.data).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.log, b.log);
}

#[test]
fn one_epoch_budget_logs_one_epoch() {
    let s = common::synthetic();
    let config = TrainConfig {
        max_epochs: 1,
        ..TrainConfig::default()
    };
    let t = Trainer::new(config).run(&s.data).unwrap();
    assert_eq!(t.log.epochs(), 1);
    assert_eq!(t.log.records[0].epoch, 0);
}

#[test]
fn synthetic_benchmark_trains_and_loss_settles() {
    let s = common::synthetic();
    let run = common::train_synthetic(&s, 8, 0);
    let e2e = common::check_end_to_end(&s, &run);
    assert!(e2e.is_ok(), "{e2e:?}");
    let smooth = common::check_smoothed_loss(&run.log);
    assert!(smooth.is_ok(), "{smooth:?}");
    for r in &run.log.records {
        assert!((1.0..=8.0).contains(&r.perplexity), "epoch {}: {}", r.epoch, r.perplexity);
    }
}
