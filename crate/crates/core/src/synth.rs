//! Seeded synthetic datasets for benchmarks and smoke tests.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Synthetic {
    /// Isotropic Gaussian clusters, one per class, in `dim` dimensions.
    Blobs { dim: usize, classes: usize },
    /// Two interleaved half circles.
    Moons,
    /// Two concentric rings.
    Rings,
    /// Alternating 4x4 grid of two classes.
    Checkerboard,
}

impl FromStr for Synthetic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blobs" => Ok(Synthetic::Blobs { dim: 4, classes: 3 }),
            "moons" => Ok(Synthetic::Moons),
            "rings" => Ok(Synthetic::Rings),
            "checkerboard" => Ok(Synthetic::Checkerboard),
            other => Err(Error::config(format!(
                "unknown synthetic dataset {other:?}"
            ))),
        }
    }
}

impl Synthetic {
    pub fn name(&self) -> &'static str {
        match self {
            Synthetic::Blobs { .. } => "blobs",
            Synthetic::Moons => "moons",
            Synthetic::Rings => "rings",
            Synthetic::Checkerboard => "checkerboard",
        }
    }

    /// Draws `n` samples. `noise` is the standard deviation of the
    /// Gaussian jitter added to every coordinate.
    pub fn generate(&self, n: usize, noise: f64, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(Error::config("noise must be a finite non-negative number"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jitter = Normal::new(0.0, noise).map_err(|e| Error::config(e.to_string()))?;
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let class_count = match *self {
            Synthetic::Blobs { dim, classes } => {
                if dim == 0 || classes < 2 {
                    return Err(Error::config(
                        "blobs need dim >= 1 and at least two classes",
                    ));
                }
                let centers: Vec<Vec<f64>> = (0..classes)
                    .map(|_| (0..dim).map(|_| rng.random_range(0.0..10.0)).collect())
                    .collect();
                for i in 0..n {
                    let c = i % classes;
                    rows.push(
                        centers[c]
                            .iter()
                            .map(|&m| m + jitter.sample(&mut rng))
                            .collect(),
                    );
                    labels.push(c);
                }
                classes
            }
            Synthetic::Moons => {
                for i in 0..n {
                    let c = i % 2;
                    let t = rng.random_range(0.0..PI);
                    let (x, y) = if c == 0 {
                        (t.cos(), t.sin())
                    } else {
                        (1.0 - t.cos(), 0.5 - t.sin())
                    };
                    rows.push(vec![
                        x + jitter.sample(&mut rng),
                        y + jitter.sample(&mut rng),
                    ]);
                    labels.push(c);
                }
                2
            }
            Synthetic::Rings => {
                for i in 0..n {
                    let c = i % 2;
                    let t = rng.random_range(0.0..2.0 * PI);
                    let r = if c == 0 { 1.0 } else { 2.0 };
                    rows.push(vec![
                        r * t.cos() + jitter.sample(&mut rng),
                        r * t.sin() + jitter.sample(&mut rng),
                    ]);
                    labels.push(c);
                }
                2
            }
            Synthetic::Checkerboard => {
                for _ in 0..n {
                    let x: f64 = rng.random_range(0.0..4.0);
                    let y: f64 = rng.random_range(0.0..4.0);
                    let c = (x.floor() as usize + y.floor() as usize) % 2;
                    rows.push(vec![
                        x + jitter.sample(&mut rng),
                        y + jitter.sample(&mut rng),
                    ]);
                    labels.push(c);
                }
                2
            }
        };
        Dataset::new(rows, labels, class_count)
    }
}
