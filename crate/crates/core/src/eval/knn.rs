use rayon::prelude::*;

use crate::data::FeatureDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Neighbor {
    dist2: f64,
    label: usize,
}

fn by_distance_then_label(a: &Neighbor, b: &Neighbor) -> std::cmp::Ordering {
    a.dist2.total_cmp(&b.dist2).then(a.label.cmp(&b.label))
}

/// Plurality vote among the `k` nearest training points.
///
/// Neighbours are ordered by distance and then label, so the vote does not
/// depend on the order of the training set. Equal vote counts go to the
/// label with the smaller summed distance, then the lower class id.
fn predict_one(train: &FeatureDataset, x: &[f32], k: usize, scratch: &mut Vec<Neighbor>) -> usize {
    scratch.clear();
    scratch.extend((0..train.len()).map(|i| {
        let dist2 = train
            .sample(i)
            .iter()
            .zip(x)
            .map(|(&a, &b)| {
                let d = f64::from(a) - f64::from(b);
                d * d
            })
            .sum();
        Neighbor {
            dist2,
            label: train.label(i),
        }
    }));
    if k < scratch.len() {
        scratch.select_nth_unstable_by(k - 1, by_distance_then_label);
        scratch.truncate(k);
    }
    scratch.sort_unstable_by(by_distance_then_label);

    let mut votes = vec![(0usize, 0.0f64); train.num_classes()];
    for n in scratch.iter() {
        votes[n.label].0 += 1;
        votes[n.label].1 += n.dist2.sqrt();
    }
    let mut best = 0;
    for (label, &(count, dist)) in votes.iter().enumerate().skip(1) {
        let (best_count, best_dist) = votes[best];
        if count > best_count || (count == best_count && count > 0 && dist < best_dist) {
            best = label;
        }
    }
    best
}

pub fn knn_predict(train: &FeatureDataset, test: &FeatureDataset, k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::Argument("k must be >= 1".into()));
    }
    if k > train.len() {
        return Err(Error::Argument(format!("k = {k} exceeds {} training samples", train.len())));
    }
    if train.dim() != test.dim() {
        return Err(Error::shape("k-NN test features", train.dim(), test.dim()));
    }
    Ok((0..test.len())
        .into_par_iter()
        .map_init(Vec::new, |scratch, i| predict_one(train, test.sample(i), k, scratch))
        .collect())
}

/// Fraction of `test` samples whose label the k-NN vote over `train` recovers.
pub fn knn_probe(train: &FeatureDataset, test: &FeatureDataset, k: usize) -> Result<f64> {
    let pred = knn_predict(train, test, k)?;
    let correct = pred.iter().enumerate().filter(|&(i, &p)| p == test.label(i)).count();
    Ok(correct as f64 / test.len() as f64)
}
