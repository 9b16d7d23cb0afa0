//! Gaussian kernel density estimates on regular grids, normal-reference
//! bandwidth rules and the bandwidth sweep that feeds flamelet construction.

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram_metrics::Vineyard;
use crate::error::{invalid, Result, TopoError};
use crate::filtration::{superlevel_grid_filtration, GridFunction};
use crate::flamelets::{build_flamelet, Flamelet, SigmaGrid};
use crate::geometry::PointCloud;
use crate::landscape::{YGrid, DEFAULT_GRID_STEPS, DEFAULT_LEVELS};
use crate::persistence::{compute_persistence, PersistenceDiagram};
use crate::scalar::Scalar;

pub const DEFAULT_KDE_STEPS_1D: usize = 512;
pub const DEFAULT_KDE_STEPS_2D: usize = 128;

/// Isotropic Gaussian KDE of a 1D or 2D sample.
///
/// The sample is stored in lexicographic order so that density sums, and
/// hence every evaluated grid, do not depend on the input order.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel<T: Scalar> {
    sample: PointCloud<T>,
    bandwidth: T,
}

impl<T: Scalar> KdeModel<T> {
    pub fn new(sample: PointCloud<T>, bandwidth: T) -> Result<Self> {
        if !(bandwidth > T::zero() && bandwidth.is_finite()) {
            return Err(invalid(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        if sample.dim() > 2 {
            return Err(TopoError::UnsupportedDimension(sample.dim()));
        }
        Ok(Self {
            sample: canonical_order(&sample)?,
            bandwidth,
        })
    }

    pub fn sample(&self) -> &PointCloud<T> {
        &self.sample
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    /// Density at a single location.
    pub fn density_at(&self, x: &[T]) -> T {
        let h = self.bandwidth;
        let norm = match self.sample.dim() {
            1 => T::one() / ((T::TAU()).sqrt() * h),
            _ => T::one() / (T::TAU() * h * h),
        };
        let scale = -T::one() / (T::lit(2.0) * h * h);
        let sum = self.sample.iter().fold(T::zero(), |acc, p| {
            let sq = p
                .iter()
                .zip(x)
                .fold(T::zero(), |a, (&pi, &xi)| a + (xi - pi) * (xi - pi));
            acc + (scale * sq).exp()
        });
        norm * sum / T::from_usize_lossy(self.sample.len())
    }
}

fn canonical_order<T: Scalar>(sample: &PointCloud<T>) -> Result<PointCloud<T>> {
    let mut rows: Vec<&[T]> = sample.iter().collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    PointCloud::new(rows.concat(), sample.dim())
}

/// Placement of a regular evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GridSpec<T: Scalar> {
    pub shape: Vec<usize>,
    pub spacing: Vec<T>,
    pub origin: Vec<T>,
}

impl<T: Scalar> GridSpec<T> {
    /// Grid with `steps` nodes per axis spanning the sample's bounding box
    /// padded by `pad` on every side.
    pub fn covering(sample: &PointCloud<T>, pad: T, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(invalid("grid needs at least two nodes per axis"));
        }
        let mut spec = GridSpec {
            shape: Vec::new(),
            spacing: Vec::new(),
            origin: Vec::new(),
        };
        for (lo, hi) in sample.bounds() {
            let (lo, mut hi) = (lo - pad, hi + pad);
            if !(hi > lo) {
                hi = lo + T::one();
            }
            spec.shape.push(steps);
            spec.spacing
                .push((hi - lo) / T::from_usize_lossy(steps - 1));
            spec.origin.push(lo);
        }
        Ok(spec)
    }

    /// Axis-aligned extent `(min, max)` of each axis.
    pub fn extent(&self) -> Vec<(T, T)> {
        self.shape
            .iter()
            .zip(&self.spacing)
            .zip(&self.origin)
            .map(|((&n, &dx), &o)| (o, o + dx * T::from_usize_lossy(n - 1)))
            .collect()
    }
}

/// Density evaluated at every node of `grid`.
pub fn kde_evaluate<T: Scalar>(model: &KdeModel<T>, grid: &GridSpec<T>) -> Result<GridFunction<T>> {
    if grid.shape.len() != model.sample.dim() {
        return Err(TopoError::DimensionMismatch {
            expected: model.sample.dim(),
            found: grid.shape.len(),
        });
    }
    let template = GridFunction::new(
        grid.shape.clone(),
        grid.spacing.clone(),
        grid.origin.clone(),
        vec![T::zero(); grid.shape.iter().product()],
    )?;
    let covered = model
        .sample
        .bounds()
        .iter()
        .zip(grid.extent())
        .all(|(&(lo, hi), (glo, ghi))| glo <= lo && hi <= ghi);
    if !covered {
        warn!("KDE grid does not cover the sample range");
    }
    let values = (0..template.values().len())
        .map(|i| model.density_at(&template.node_coords(i)))
        .collect();
    GridFunction::new(
        grid.shape.clone(),
        grid.spacing.clone(),
        grid.origin.clone(),
        values,
    )
}

/// Normal-reference bandwidth for recovering `d`-dimensional features:
/// `(4 / (n (d + 2)))^(2 / (4 + d)) * s`, where `s` is the mean of the
/// per-coordinate sample variances.
pub fn silverman_extended<T: Scalar>(sample: &PointCloud<T>, d: usize) -> Result<T> {
    let s = mean_variance(sample)?;
    Ok(silverman_extended_from_stats(sample.len(), d, s))
}

pub fn silverman_extended_from_stats<T: Scalar>(n: usize, d: usize, s: T) -> T {
    let (n, d) = (T::from_usize_lossy(n), T::from_usize_lossy(d));
    let four = T::lit(4.0);
    (four / (n * (d + T::lit(2.0)))).powf(T::lit(2.0) / (four + d)) * s
}

/// Conventional normal-reference rule `(4 / (n (d + 2)))^(1 / (4 + d)) * sqrt(s)`,
/// with `s` the mean per-coordinate variance.
pub fn silverman_classic<T: Scalar>(sample: &PointCloud<T>, d: usize) -> Result<T> {
    let s = mean_variance(sample)?;
    let (n, d) = (T::from_usize_lossy(sample.len()), T::from_usize_lossy(d));
    let four = T::lit(4.0);
    Ok((four / (n * (d + T::lit(2.0)))).powf(T::one() / (four + d)) * s.sqrt())
}

fn mean_variance<T: Scalar>(sample: &PointCloud<T>) -> Result<T> {
    let vars = sample.coordinate_variances()?;
    let s = vars.iter().fold(T::zero(), |a, &v| a + v) / T::from_usize_lossy(vars.len());
    if !(s > T::zero()) {
        return Err(TopoError::Degenerate("sample has zero variance".into()));
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[serde(alias = "lin")]
    Linear,
    #[default]
    #[serde(alias = "log")]
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BandwidthRange<T: Scalar> {
    pub h_min: T,
    pub h_max: T,
    pub steps: usize,
    pub spacing: Spacing,
}

impl<T: Scalar> BandwidthRange<T> {
    pub fn new(h_min: T, h_max: T, steps: usize, spacing: Spacing) -> Result<Self> {
        let r = Self {
            h_min,
            h_max,
            steps,
            spacing,
        };
        r.grid()?;
        Ok(r)
    }

    pub fn grid(&self) -> Result<SigmaGrid<T>> {
        if !(self.h_min > T::zero()) {
            return Err(invalid("bandwidths must be positive"));
        }
        match self.spacing {
            Spacing::Linear => SigmaGrid::linear(self.h_min, self.h_max, self.steps),
            Spacing::Logarithmic => SigmaGrid::logarithmic(self.h_min, self.h_max, self.steps),
        }
    }
}

/// Everything a bandwidth sweep needs besides the sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig<T: Scalar> {
    pub range: BandwidthRange<T>,
    /// Evaluation grid; defaults to the sample range padded by `3 * h_max`.
    pub grid: Option<GridSpec<T>>,
    /// Nodes per axis of the default grid.
    pub grid_steps: Option<usize>,
    pub dims: Vec<usize>,
    pub k: usize,
    pub y_steps: usize,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl<T: Scalar> SweepConfig<T> {
    pub fn new(range: BandwidthRange<T>, dims: Vec<usize>) -> Self {
        Self {
            range,
            grid: None,
            grid_steps: None,
            dims,
            k: DEFAULT_LEVELS,
            y_steps: DEFAULT_GRID_STEPS,
            jobs: None,
        }
    }

    pub fn resolve_grid(&self, sample: &PointCloud<T>) -> Result<GridSpec<T>> {
        match &self.grid {
            Some(g) => Ok(g.clone()),
            None => {
                let steps = self.grid_steps.unwrap_or(match sample.dim() {
                    1 => DEFAULT_KDE_STEPS_1D,
                    _ => DEFAULT_KDE_STEPS_2D,
                });
                GridSpec::covering(sample, T::lit(3.0) * self.range.h_max, steps)
            }
        }
    }
}

/// Superlevel persistence diagrams of the KDE at every bandwidth, one
/// vineyard per requested homology dimension, scale = bandwidth.
pub fn bandwidth_vineyards<T: Scalar>(
    sample: &PointCloud<T>,
    config: &SweepConfig<T>,
) -> Result<BTreeMap<usize, Vineyard<T>>> {
    if sample.dim() > 2 {
        return Err(TopoError::UnsupportedDimension(sample.dim()));
    }
    if config.dims.is_empty() {
        return Err(invalid("no homology dimensions requested"));
    }
    let sigma = config.range.grid()?;
    let grid = config.resolve_grid(sample)?;
    let min_spacing = grid.spacing.iter().fold(T::infinity(), |m, &s| m.min(s));
    if min_spacing > config.range.h_min / T::lit(2.0) {
        warn!(
            "grid spacing {min_spacing} exceeds half the smallest bandwidth {}",
            config.range.h_min
        );
    }
    let max_dim = match sample.dim() {
        1 => 1,
        _ => config.dims.iter().map(|&d| d + 1).max().unwrap_or(1).min(2),
    };

    let slice = |h: T| -> Result<BTreeMap<usize, PersistenceDiagram<T>>> {
        let density = kde_evaluate(&KdeModel::new(sample.clone(), h)?, &grid)?;
        let complex = superlevel_grid_filtration(&density, max_dim)?;
        compute_persistence(&complex, &config.dims)
    };
    let run = || -> Result<Vec<_>> { sigma.values().par_iter().map(|&h| slice(h)).collect() };
    let slices = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let mut by_dim: BTreeMap<usize, Vec<(T, PersistenceDiagram<T>)>> = BTreeMap::new();
    for (&h, mut diagrams) in sigma.values().iter().zip(slices) {
        for &d in &config.dims {
            let diagram = diagrams.remove(&d).expect("requested dimension computed");
            by_dim.entry(d).or_default().push((h, diagram));
        }
    }
    by_dim
        .into_iter()
        .map(|(d, slices)| Ok((d, Vineyard::new(slices)?)))
        .collect()
}

/// Flamelet of the KDE superlevel persistence along the bandwidth range.
/// Each dimension gets a y-grid covering all of its diagrams.
pub fn bandwidth_sweep<T: Scalar>(
    sample: &PointCloud<T>,
    config: &SweepConfig<T>,
) -> Result<BTreeMap<usize, Flamelet<T>>> {
    bandwidth_vineyards(sample, config)?
        .into_iter()
        .map(|(d, vineyard)| {
            let ygrid = YGrid::covering(vineyard.diagrams(), config.y_steps)?;
            Ok((d, build_flamelet(&vineyard, &ygrid, config.k)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> PointCloud<f64> {
        PointCloud::new(points.to_vec(), 1).unwrap()
    }

    #[test]
    fn density_examples() {
        let m = KdeModel::new(line(&[0.0]), 1.0).unwrap();
        assert!((m.density_at(&[0.0]) - 0.398942280401433).abs() < 1e-12);
        let m2 = KdeModel::new(PointCloud::<f64>::new(vec![0.3, -0.2], 2).unwrap(), 1.0).unwrap();
        assert!((m2.density_at(&[0.3, -0.2]) - 0.159154943091895).abs() < 1e-12);
    }

    #[test]
    fn symmetric_sample_gives_symmetric_density() {
        let m = KdeModel::new(line(&[-1.3, 1.3]), 0.4).unwrap();
        let spec = GridSpec {
            shape: vec![41],
            spacing: vec![0.1],
            origin: vec![-2.0],
        };
        let f = kde_evaluate(&m, &spec).unwrap();
        let v = f.values();
        for i in 0..v.len() {
            assert!((v[i] - v[v.len() - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn model_validation() {
        assert!(KdeModel::new(line(&[0.0]), 0.0).is_err());
        assert!(KdeModel::new(line(&[0.0]), -1.0).is_err());
        let three = PointCloud::new(vec![0.0; 3], 3).unwrap();
        assert_eq!(
            KdeModel::new(three, 1.0).unwrap_err(),
            TopoError::UnsupportedDimension(3)
        );
        let m = KdeModel::new(line(&[0.0]), 1.0).unwrap();
        let spec2 = GridSpec {
            shape: vec![2, 2],
            spacing: vec![1.0; 2],
            origin: vec![0.0; 2],
        };
        assert!(kde_evaluate(&m, &spec2).is_err());
    }

    #[test]
    fn silverman_examples() {
        let h = silverman_extended_from_stats(100, 1, 1.0f64);
        assert!((h - (4.0f64 / 300.0).powf(0.4)).abs() < 1e-15);
        assert!((h - 0.177817907226440).abs() < 1e-12);
        let h0 = silverman_extended_from_stats(50, 0, 2.0f64);
        assert!((h0 - (4.0f64 / 100.0).sqrt() * 2.0).abs() < 1e-15);

        let sample = line(&[0.0, 1.0, 3.0, 4.5, 2.0]);
        let base = silverman_extended(&sample, 1).unwrap();
        let scaled = silverman_extended(&sample.scaled(3.0).unwrap(), 1).unwrap();
        assert!((scaled / base - 9.0).abs() < 1e-12);
        let classic = silverman_classic(&sample, 1).unwrap();
        let classic_scaled = silverman_classic(&sample.scaled(3.0).unwrap(), 1).unwrap();
        assert!((classic_scaled / classic - 3.0).abs() < 1e-12);

        assert!(matches!(
            silverman_extended(&line(&[1.0, 1.0, 1.0]), 1),
            Err(TopoError::Degenerate(_))
        ));
        assert!(silverman_extended(&line(&[1.0]), 1).is_err());
    }

    #[test]
    fn range_validation() {
        assert!(BandwidthRange::new(0.1, 1.0, 1, Spacing::Logarithmic).is_err());
        assert!(BandwidthRange::new(1.0, 0.1, 4, Spacing::Linear).is_err());
        assert!(BandwidthRange::new(0.0, 1.0, 4, Spacing::Linear).is_err());
        let r = BandwidthRange::new(0.1, 1.0, 3, Spacing::Linear).unwrap();
        assert_eq!(r.grid().unwrap().values(), &[0.1, 0.55, 1.0]);
    }

    #[test]
    fn small_sweep_two_clusters() {
        let sample = line(&[-2.1, -2.0, -1.9, 1.9, 2.0, 2.1]);
        let mut config = SweepConfig::new(
            BandwidthRange::new(0.2, 6.0, 6, Spacing::Logarithmic).unwrap(),
            vec![0],
        );
        config.grid_steps = Some(200);
        config.y_steps = 64;
        config.k = 2;
        let flamelets = bandwidth_sweep(&sample, &config).unwrap();
        let f = &flamelets[&0];
        assert_eq!(f.sigma().len(), 6);
        let second = |s: usize| f.level_at(2, s).iter().copied().fold(0.0, f64::max);
        assert!(second(0) > 0.0);
        assert_eq!(second(5), 0.0);
    }

    #[test]
    fn jobs_do_not_change_results() {
        let sample = line(&[-1.0, -0.2, 0.4, 2.0]);
        let mut config = SweepConfig::new(
            BandwidthRange::new(0.1, 1.0, 5, Spacing::Linear).unwrap(),
            vec![0],
        );
        config.grid_steps = Some(64);
        config.y_steps = 32;
        let a = bandwidth_sweep(&sample, &config).unwrap();
        config.jobs = Some(1);
        let b = bandwidth_sweep(&sample, &config).unwrap();
        assert_eq!(a, b);
    }
}
