use std::collections::HashSet;

use hypercore::data::{inject_label_noise, synth_gaussian_mixture, NoiseSpec};
use hypercore::hypersphere::TrainConfig;
use hypercore::pipeline::{build_coreset_run, enforce_global_budget, PruneMode};

fn small_config(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 4,
        batch_size: 16,
        lr: 1e-3,
        seed,
        hidden: 16,
        hidden_layers: 2,
        emb_dim: 6,
    }
}

#[test]
fn coreset_is_disjoint_union_of_class_keeps() {
    let clean = synth_gaussian_mixture(5, 40, 6, 4.0, 21).unwrap();
    let (ds, _) = inject_label_noise(&clean, NoiseSpec::new(0.15, 2).unwrap()).unwrap();
    for mode in [PruneMode::Adaptive, PruneMode::Fixed { alpha: 0.25 }] {
        let run = build_coreset_run(&ds, mode, &small_config(3), 2).unwrap();
        let coreset = &run.coreset;
        coreset.validate_against(&ds).unwrap();

        let all = coreset.kept_indices();
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), all.len());
        for c in &coreset.classes {
            let id = c.threshold.class_id;
            let regrouped: Vec<usize> = all.iter().copied().filter(|&i| ds.label(i) == id).collect();
            assert_eq!(regrouped, c.kept);
            assert_eq!(c.kept.len(), c.threshold.kept_count);
        }
    }
}

#[test]
fn worker_count_does_not_change_the_result() {
    let ds = synth_gaussian_mixture(6, 30, 5, 3.0, 4).unwrap();
    let cfg = small_config(9);
    let one = build_coreset_run(&ds, PruneMode::Adaptive, &cfg, 1).unwrap();
    for workers in [2, 3, 8] {
        let many = build_coreset_run(&ds, PruneMode::Adaptive, &cfg, workers).unwrap();
        assert_eq!(many.coreset, one.coreset);
        assert_eq!(many.distances, one.distances);
        assert_eq!(many.coreset.to_json().unwrap(), one.coreset.to_json().unwrap());
    }
}

#[test]
fn budget_caps_size_and_keeps_every_class() {
    let ds = synth_gaussian_mixture(4, 50, 5, 4.0, 8).unwrap();
    let run = build_coreset_run(&ds, PruneMode::Fixed { alpha: 0.1 }, &small_config(1), 1).unwrap();
    let capped = enforce_global_budget(&run.coreset, &run.distances, 0.5).unwrap();
    assert!(capped.total_kept() <= 100);
    assert!(capped.classes.iter().all(|c| !c.kept.is_empty()));
    capped.validate_against(&ds).unwrap();
    for (before, after) in run.coreset.classes.iter().zip(&capped.classes) {
        let kept: HashSet<_> = before.kept.iter().collect();
        assert!(after.kept.iter().all(|i| kept.contains(i)));
    }
    assert!(capped.budget.is_some());
}
