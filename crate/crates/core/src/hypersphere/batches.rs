use rand::seq::SliceRandom;
use rand::Rng;

use super::loss::BinaryLabel;
use crate::data::FeatureDataset;
use crate::error::{Error, Result};

pub type Batch = Vec<(usize, BinaryLabel)>;

/// One-vs-rest sampler for a single class.
///
/// Each epoch visits every in-class sample once in shuffled order and pairs
/// it with an out-of-class sample drawn uniformly with replacement, so every
/// batch holds equally many of each.
#[derive(Debug, Clone)]
pub struct BalancedSampler {
    in_class: Vec<usize>,
    out_class: Vec<usize>,
    half: usize,
}

impl BalancedSampler {
    pub fn new(ds: &FeatureDataset, class_id: usize, batch_size: usize) -> Result<Self> {
        if batch_size < 2 || !batch_size.is_multiple_of(2) {
            return Err(Error::Config(format!("batch size {batch_size} must be even and >= 2")));
        }
        let (in_class, out_class): (Vec<usize>, Vec<usize>) =
            (0..ds.len()).partition(|&i| ds.label(i) == class_id);
        if in_class.is_empty() {
            return Err(Error::Config(format!("class {class_id} has no samples")));
        }
        if out_class.is_empty() {
            return Err(Error::Config(format!(
                "class {class_id} has no out-of-class samples to contrast against"
            )));
        }
        Ok(Self {
            in_class,
            out_class,
            half: batch_size / 2,
        })
    }

    pub fn in_class(&self) -> &[usize] {
        &self.in_class
    }

    pub fn out_class(&self) -> &[usize] {
        &self.out_class
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.in_class.len().div_ceil(self.half)
    }

    pub fn epoch<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Batch> {
        let mut order = self.in_class.clone();
        order.shuffle(rng);
        order
            .chunks(self.half)
            .map(|chunk| {
                let mut batch = Vec::with_capacity(2 * chunk.len());
                batch.extend(chunk.iter().map(|&i| (i, BinaryLabel::InClass)));
                for _ in 0..chunk.len() {
                    let j = self.out_class[rng.random_range(0..self.out_class.len())];
                    batch.push((j, BinaryLabel::OutOfClass));
                }
                batch
            })
            .collect()
    }
}

/// One epoch of balanced batches for `class_id`.
pub fn make_balanced_batches<R: Rng + ?Sized>(
    ds: &FeatureDataset,
    class_id: usize,
    batch_size: usize,
    rng: &mut R,
) -> Result<Vec<Batch>> {
    Ok(BalancedSampler::new(ds, class_id, batch_size)?.epoch(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn labelled(labels: Vec<u32>, classes: usize) -> FeatureDataset {
        let n = labels.len();
        FeatureDataset::new(1, classes, (0..n).map(|i| i as f32).collect(), labels).unwrap()
    }

    fn counts(b: &Batch) -> (usize, usize) {
        let ins = b.iter().filter(|(_, y)| *y == BinaryLabel::InClass).count();
        (ins, b.len() - ins)
    }

    #[test]
    fn ten_in_ninety_out() {
        let mut labels = vec![0u32; 10];
        labels.extend(vec![1u32; 90]);
        let ds = labelled(labels, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batches = make_balanced_batches(&ds, 0, 4, &mut rng).unwrap();
        assert_eq!(batches.len(), 5);
        for b in &batches {
            assert_eq!(counts(b), (2, 2));
            for &(i, y) in b {
                assert_eq!(ds.label(i) == 0, y == BinaryLabel::InClass);
            }
        }
    }

    #[test]
    fn partial_batch_keeps_pairs() {
        let ds = labelled(vec![0, 1, 0, 1, 0, 1, 1], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batches = make_balanced_batches(&ds, 0, 4, &mut rng).unwrap();
        let shape: Vec<_> = batches.iter().map(counts).collect();
        assert_eq!(shape, vec![(2, 2), (1, 1)]);
    }

    #[test]
    fn every_in_class_sample_once_per_epoch() {
        let ds = labelled((0..57).map(|i| (i % 3) as u32).collect(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sampler = BalancedSampler::new(&ds, 1, 6).unwrap();
        for _ in 0..3 {
            let mut seen: Vec<usize> = sampler
                .epoch(&mut rng)
                .into_iter()
                .flatten()
                .filter(|(_, y)| *y == BinaryLabel::InClass)
                .map(|(i, _)| i)
                .collect();
            seen.sort_unstable();
            assert_eq!(seen, ds.class_indices(1));
        }
    }

    #[test]
    fn configuration_errors() {
        let ds = labelled(vec![0, 0, 0], 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(make_balanced_batches(&ds, 0, 4, &mut rng), Err(Error::Config(_))));
        let ds = labelled(vec![0, 1], 2);
        assert!(make_balanced_batches(&ds, 0, 3, &mut rng).is_err());
        assert!(make_balanced_batches(&ds, 0, 0, &mut rng).is_err());
    }
}
