use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{seeded_rng, Dataset, LabelKind};

const LABEL_FLIP_PROB: f64 = 0.1;

fn gaussian_rows<R: Rng>(rng: &mut R, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(rng)).collect())
        .collect()
}

/// Gaussian features with labels from a random planted separator, 10% of
/// which are flipped. Deterministic in `seed`.
pub fn synthesize_classification(n: usize, d: usize, seed: u64) -> Dataset {
    assert!(n >= 1 && d >= 1, "synthetic datasets need n, d >= 1");
    let mut rng = seeded_rng(seed, 0);
    let separator: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let rows = gaussian_rows(&mut rng, n, d);
    let labels = rows
        .iter()
        .map(|x| {
            let margin: f64 = x.iter().zip(&separator).map(|(a, b)| a * b).sum();
            let clean = margin > 0.0;
            let flip = rng.random::<f64>() < LABEL_FLIP_PROB;
            if clean != flip {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Dataset::from_dense(&rows, labels, LabelKind::Binary01).expect("dense rows are well formed")
}

/// Gaussian features with targets `w*^T x + noise`, where a tenth of the
/// targets carry heavy-tailed (Cauchy) outliers.
pub fn synthesize_regression(n: usize, d: usize, seed: u64) -> Dataset {
    assert!(n >= 1 && d >= 1, "synthetic datasets need n, d >= 1");
    let mut rng = seeded_rng(seed, 1);
    let truth: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let rows = gaussian_rows(&mut rng, n, d);
    let labels = rows
        .iter()
        .map(|x| {
            let clean: f64 = x.iter().zip(&truth).map(|(a, b)| a * b).sum();
            let noise: f64 = StandardNormal.sample(&mut rng);
            let mut y = clean + 0.1 * noise;
            if rng.random::<f64>() < 0.1 {
                let u: f64 = rng.random::<f64>() - 0.5;
                y += (std::f64::consts::PI * u).tan();
            }
            y
        })
        .collect();
    Dataset::from_dense(&rows, labels, LabelKind::Real).expect("dense rows are well formed")
}
