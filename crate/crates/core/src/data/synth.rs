use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dataset::FeatureDataset;
use crate::error::{Error, Result};
use crate::rng::mix_seed;

/// Class centers with pairwise distance exactly `separation`.
///
/// With `dim >= classes` the centers sit on scaled coordinate axes. With
/// `dim == classes - 1` the same configuration is expressed in a Helmert basis
/// of the sum-zero subspace, which is a regular simplex.
pub fn mixture_centers(classes: usize, dim: usize, separation: f64) -> Result<Vec<Vec<f64>>> {
    if classes == 0 || dim == 0 {
        return Err(Error::Config("classes and dim must be >= 1".into()));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::Config(format!("separation {separation} must be finite and >= 0")));
    }
    let scale = separation / std::f64::consts::SQRT_2;
    if dim >= classes {
        return Ok((0..classes)
            .map(|k| {
                let mut c = vec![0.0; dim];
                if classes > 1 {
                    c[k] = scale;
                }
                c
            })
            .collect());
    }
    if dim + 1 == classes {
        return Ok((0..classes)
            .map(|k| {
                (1..classes)
                    .map(|j| {
                        let norm = ((j * (j + 1)) as f64).sqrt();
                        let comp = match k.cmp(&j) {
                            std::cmp::Ordering::Less => 1.0,
                            std::cmp::Ordering::Equal => -(j as f64),
                            std::cmp::Ordering::Greater => 0.0,
                        };
                        scale * comp / norm
                    })
                    .collect()
            })
            .collect());
    }
    Err(Error::Config(format!(
        "cannot place {classes} equidistant centers in {dim} dimensions (need dim >= {})",
        classes - 1
    )))
}

/// Isotropic unit-variance Gaussian mixture, `per_class` samples per class, class-major order.
pub fn synth_gaussian_mixture(
    classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<FeatureDataset> {
    if per_class == 0 {
        return Err(Error::Config("per_class must be >= 1".into()));
    }
    let centers = mixture_centers(classes, dim, separation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(classes * per_class * dim);
    let mut labels = Vec::with_capacity(classes * per_class);
    for (k, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            for &c in center {
                let z: f64 = StandardNormal.sample(&mut rng);
                features.push((c + z) as f32);
            }
            labels.push(k as u32);
        }
    }
    FeatureDataset::new(dim, classes, features, labels)
}

/// A clean held-out split from the same mixture under an independent seed.
pub fn synth_test_split(
    classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<FeatureDataset> {
    synth_gaussian_mixture(classes, per_class, dim, separation, mix_seed(seed, 0x7E57))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn centers_are_equidistant() {
        for (c, d) in [(10, 16), (4, 3), (2, 1), (3, 3)] {
            let centers = mixture_centers(c, d, 6.0).unwrap();
            for i in 0..c {
                assert_eq!(centers[i].len(), d);
                for j in 0..i {
                    assert!((dist(&centers[i], &centers[j]) - 6.0).abs() < 1e-12);
                }
            }
        }
        assert!(mixture_centers(5, 3, 1.0).is_err());
    }

    #[test]
    fn zero_separation_shares_one_center() {
        let centers = mixture_centers(3, 4, 0.0).unwrap();
        assert!(centers.iter().all(|c| c.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn nearest_centroid_separates_wide_mixture() {
        let ds = synth_gaussian_mixture(2, 200, 2, 8.0, 11).unwrap();
        let centers = mixture_centers(2, 2, 8.0).unwrap();
        let correct = (0..ds.len())
            .filter(|&i| {
                let x: Vec<f64> = ds.sample(i).iter().map(|&v| v as f64).collect();
                let pred = if dist(&x, &centers[0]) <= dist(&x, &centers[1]) { 0 } else { 1 };
                pred == ds.label(i)
            })
            .count();
        assert!(correct as f64 / ds.len() as f64 >= 0.99);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synth_gaussian_mixture(3, 20, 4, 5.0, 9).unwrap();
        let b = synth_gaussian_mixture(3, 20, 4, 5.0, 9).unwrap();
        let c = synth_gaussian_mixture(3, 20, 4, 5.0, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let t = synth_test_split(3, 20, 4, 5.0, 9).unwrap();
        assert_ne!(a.features(), t.features());
    }
}
