//! Seeded synthetic datasets: noisy circles, two-component Gaussian
//! mixtures and slowly deforming circles for time-indexed flamelets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::geometry::{DynamicPointCloud, Frame, PointCloud};
use crate::scalar::Scalar;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("finite nonnegative standard deviation")
}

/// `n` points drawn uniformly in angle on a circle of `radius`, each
/// coordinate perturbed by Gaussian noise with standard deviation `noise_sd`.
pub fn noisy_circle<T: Scalar>(
    n: usize,
    radius: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<PointCloud<T>> {
    let mut rng = rng(seed);
    circle_points(&mut rng, n, radius, noise_sd)
}

fn circle_points<T: Scalar>(
    rng: &mut ChaCha8Rng,
    n: usize,
    radius: f64,
    noise_sd: f64,
) -> Result<PointCloud<T>> {
    let noise = normal(noise_sd);
    let mut coords = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        coords.push(T::lit(radius * theta.cos() + noise.sample(rng)));
        coords.push(T::lit(radius * theta.sin() + noise.sample(rng)));
    }
    PointCloud::new(coords, 2)
}

/// `n` draws from `0.5 N(-2, 0.5^2) + 0.5 N(2, 0.5^2)` on the line.
pub fn bimodal_mixture<T: Scalar>(n: usize, seed: u64) -> Result<PointCloud<T>> {
    gaussian_mixture(n, &[(-2.0, 0.5), (2.0, 0.5)], seed)
}

/// `n` draws from an equal-weight mixture of 1D normals `(mean, sd)`.
pub fn gaussian_mixture<T: Scalar>(
    n: usize,
    components: &[(f64, f64)],
    seed: u64,
) -> Result<PointCloud<T>> {
    let mut rng = rng(seed);
    let coords = (0..n)
        .map(|_| {
            let (mean, sd) = components[rng.random_range(0..components.len())];
            T::lit(mean + normal(sd).sample(&mut rng))
        })
        .collect();
    PointCloud::new(coords, 1)
}

/// Circle whose radius grows linearly from `r0` at `t = 0` to `r1` at `t = 1`,
/// observed at `frames` equally spaced times with fresh samples per frame.
pub fn breathing_circle<T: Scalar>(
    frames: usize,
    n: usize,
    (r0, r1): (f64, f64),
    noise_sd: f64,
    seed: u64,
) -> Result<DynamicPointCloud<T>> {
    let mut rng = rng(seed);
    let last = (frames.max(2) - 1) as f64;
    let frames = (0..frames.max(2))
        .map(|i| {
            let t = i as f64 / last;
            Ok(Frame {
                t: T::lit(t),
                cloud: circle_points(&mut rng, n, r0 + (r1 - r0) * t, noise_sd)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DynamicPointCloud::new(frames)
}
