//! Persistence flamelets: landscapes stacked along a scale parameter
//! (bandwidth, time, ...), with the integrated distance, norm, pointwise
//! mean/variance, matrix projection and the topologically-aware selector.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagram_metrics::Vineyard;
use crate::error::{invalid, Result, TopoError};
use crate::filtration::Convention;
use crate::landscape::{landscape, landscape_distance, landscape_power_sum, Landscape, YGrid};
use crate::scalar::{unit_integral, unit_rescale, Scalar};

/// Values laid out as `[level][sigma][y]`.
pub type Surface<T> = Vec<Vec<Vec<T>>>;

/// Strictly increasing scale values in their native units.
///
/// Integrals over the scale axis use the affine rescaling of the grid onto
/// `[0, 1]` (see [`SigmaGrid::unit`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound = "")]
pub struct SigmaGrid<T: Scalar> {
    values: Vec<T>,
}

impl<T: Scalar> TryFrom<Vec<T>> for SigmaGrid<T> {
    type Error = TopoError;

    fn try_from(values: Vec<T>) -> Result<Self> {
        SigmaGrid::new(values)
    }
}

impl<T: Scalar> From<SigmaGrid<T>> for Vec<T> {
    fn from(g: SigmaGrid<T>) -> Self {
        g.values
    }
}

impl<T: Scalar> SigmaGrid<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("scale grid needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("scale values must be finite"));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("scale values must be strictly increasing"));
        }
        Ok(Self { values })
    }

    /// `steps` values from `lo` to `hi`, evenly spaced.
    pub fn linear(lo: T, hi: T, steps: usize) -> Result<Self> {
        Self::spaced(lo, hi, steps, |t| lo + (hi - lo) * t)
    }

    /// `steps` values from `lo` to `hi`, evenly spaced in `ln`.
    pub fn logarithmic(lo: T, hi: T, steps: usize) -> Result<Self> {
        if !(lo > T::zero()) {
            return Err(invalid("logarithmic spacing needs a positive lower bound"));
        }
        let (a, b) = (lo.ln(), hi.ln());
        Self::spaced(lo, hi, steps, |t| (a + (b - a) * t).exp())
    }

    fn spaced(lo: T, hi: T, steps: usize, at: impl Fn(T) -> T) -> Result<Self> {
        if steps < 2 {
            return Err(invalid("a scale range needs at least two steps"));
        }
        if !(lo < hi) {
            return Err(invalid(format!(
                "scale range needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        let last = T::from_usize_lossy(steps - 1);
        let mut values: Vec<T> = (0..steps)
            .map(|i| at(T::from_usize_lossy(i) / last))
            .collect();
        values[0] = lo;
        values[steps - 1] = hi;
        Self::new(values)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The grid mapped affinely onto `[0, 1]`.
    pub fn unit(&self) -> Vec<T> {
        unit_rescale(&self.values)
    }

    /// Integral over the unit-rescaled grid of per-slice samples.
    pub fn integrate(&self, samples: &[T]) -> T {
        unit_integral(&self.values, samples)
    }
}

/// `surface[k][s][y]` holds the `(k+1)`-th landscape of the diagram at scale
/// `sigma[s]`, sampled at node `y` of the shared level grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FlameletRepr<T>", into = "FlameletRepr<T>")]
#[serde(bound = "")]
pub struct Flamelet<T: Scalar> {
    sigma: SigmaGrid<T>,
    ygrid: YGrid<T>,
    dim: usize,
    convention: Convention,
    surface: Surface<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct FlameletRepr<T: Scalar> {
    sigma: SigmaGrid<T>,
    ygrid: YGrid<T>,
    #[serde(rename = "K")]
    k: usize,
    dim: usize,
    convention: Convention,
    surface: Surface<T>,
}

impl<T: Scalar> From<Flamelet<T>> for FlameletRepr<T> {
    fn from(f: Flamelet<T>) -> Self {
        FlameletRepr {
            k: f.k(),
            sigma: f.sigma,
            ygrid: f.ygrid,
            dim: f.dim,
            convention: f.convention,
            surface: f.surface,
        }
    }
}

impl<T: Scalar> TryFrom<FlameletRepr<T>> for Flamelet<T> {
    type Error = TopoError;

    fn try_from(r: FlameletRepr<T>) -> Result<Self> {
        if r.k != r.surface.len() {
            return Err(invalid(format!(
                "K = {} but {} levels stored",
                r.k,
                r.surface.len()
            )));
        }
        Flamelet::from_surface(r.sigma, r.ygrid, r.dim, r.convention, r.surface)
    }
}

impl<T: Scalar> Flamelet<T> {
    /// Wraps a precomputed surface after checking every slice is a valid landscape.
    pub fn from_surface(
        sigma: SigmaGrid<T>,
        ygrid: YGrid<T>,
        dim: usize,
        convention: Convention,
        surface: Surface<T>,
    ) -> Result<Self> {
        if surface.is_empty() {
            return Err(invalid("a flamelet needs at least one level"));
        }
        if surface.iter().any(|level| level.len() != sigma.len()) {
            return Err(TopoError::GridMismatch(
                "surface rows differ from the scale grid".into(),
            ));
        }
        let f = Self {
            sigma,
            ygrid,
            dim,
            convention,
            surface,
        };
        for s in 0..f.sigma.len() {
            Landscape::from_levels(f.ygrid, f.surface.iter().map(|l| l[s].clone()).collect())?;
        }
        Ok(f)
    }

    /// Stacks landscapes computed on a shared grid, one per scale value.
    pub fn from_landscapes(
        sigma: SigmaGrid<T>,
        dim: usize,
        convention: Convention,
        slices: Vec<Landscape<T>>,
    ) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| invalid("a flamelet needs at least one slice"))?;
        if slices.len() != sigma.len() {
            return Err(TopoError::GridMismatch(format!(
                "{} slices for {} scale values",
                slices.len(),
                sigma.len()
            )));
        }
        let (ygrid, k) = (*first.grid(), first.k());
        if slices.iter().any(|l| *l.grid() != ygrid || l.k() != k) {
            return Err(TopoError::GridMismatch(
                "slices use different grids or K".into(),
            ));
        }
        let mut surface = vec![Vec::with_capacity(sigma.len()); k];
        for slice in slices {
            for (level, values) in surface.iter_mut().zip(slice.into_levels()) {
                level.push(values);
            }
        }
        Ok(Self {
            sigma,
            ygrid,
            dim,
            convention,
            surface,
        })
    }

    pub fn sigma(&self) -> &SigmaGrid<T> {
        &self.sigma
    }

    pub fn ygrid(&self) -> &YGrid<T> {
        &self.ygrid
    }

    pub fn k(&self) -> usize {
        self.surface.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn surface(&self) -> &Surface<T> {
        &self.surface
    }

    /// Landscape at scale index `s`.
    pub fn slice(&self, s: usize) -> Landscape<T> {
        Landscape::from_levels(
            self.ygrid,
            self.surface.iter().map(|l| l[s].clone()).collect(),
        )
        .expect("slices validated on construction")
    }

    /// Level `k` (one-based) at scale index `s`.
    pub fn level_at(&self, k: usize, s: usize) -> &[T] {
        &self.surface[k - 1][s]
    }

    /// Every surface value multiplied by `c >= 0`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        if !(c >= T::zero() && c.is_finite()) {
            return Err(invalid("scale factor must be finite and nonnegative"));
        }
        Ok(self.map_values(|v| v * c))
    }

    fn map_values(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            surface: self
                .surface
                .iter()
                .map(|level| {
                    level
                        .iter()
                        .map(|row| row.iter().map(|&v| f(v)).collect())
                        .collect()
                })
                .collect(),
            ..self.clone()
        }
    }

    fn check_same_lattice(&self, other: &Self) -> Result<()> {
        if self.sigma != other.sigma {
            return Err(TopoError::GridMismatch(
                "flamelets use different scale grids".into(),
            ));
        }
        if self.ygrid != other.ygrid {
            return Err(TopoError::GridMismatch(
                "flamelets use different y-grids".into(),
            ));
        }
        if self.k() != other.k() {
            return Err(TopoError::GridMismatch(format!(
                "flamelets have K = {} and K = {}",
                self.k(),
                other.k()
            )));
        }
        Ok(())
    }

    fn check_level(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.k() {
            Err(invalid(format!("level {k} outside 1..={}", self.k())))
        } else {
            Ok(())
        }
    }
}

/// Landscapes of every diagram in the vineyard on a shared grid.
pub fn build_flamelet<T: Scalar>(
    vineyard: &Vineyard<T>,
    ygrid: &YGrid<T>,
    k: usize,
) -> Result<Flamelet<T>> {
    let slices = vineyard
        .diagrams()
        .iter()
        .map(|d| landscape(d, ygrid, k))
        .collect::<Result<Vec<_>>>()?;
    Flamelet::from_landscapes(
        SigmaGrid::new(vineyard.sigma().to_vec())?,
        vineyard.dim(),
        vineyard.convention(),
        slices,
    )
}

/// Scale integral of the per-slice sup-norm landscape distance.
pub fn integrated_landscape_distance<T: Scalar>(a: &Flamelet<T>, b: &Flamelet<T>) -> Result<T> {
    a.check_same_lattice(b)?;
    let per_slice = (0..a.sigma.len())
        .map(|s| landscape_distance(&a.slice(s), &b.slice(s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(a.sigma.integrate(&per_slice))
}

/// `(int_0^1 sum_k ||lambda_k(sigma)||_p^p dsigma)^(1/p)`, trapezoid rule in
/// both directions.
pub fn flamelet_norm<T: Scalar>(f: &Flamelet<T>, p: T) -> Result<T> {
    if p.is_nan() || p < T::one() || p.is_infinite() {
        return Err(invalid(format!(
            "flamelet norm needs finite p >= 1, got {p}"
        )));
    }
    let per_slice: Vec<T> = (0..f.sigma.len())
        .map(|s| landscape_power_sum(&f.slice(s), p))
        .collect();
    Ok(f.sigma.integrate(&per_slice).powf(p.recip()))
}

fn check_samples<T: Scalar>(samples: &[Flamelet<T>]) -> Result<&Flamelet<T>> {
    let first = samples
        .first()
        .ok_or_else(|| invalid("need at least one flamelet"))?;
    for s in &samples[1..] {
        first.check_same_lattice(s)?;
    }
    Ok(first)
}

fn nodewise<T: Scalar>(samples: &[Flamelet<T>], f: impl Fn(&[T]) -> T) -> Surface<T> {
    let first = &samples[0];
    let mut column = Vec::with_capacity(samples.len());
    (0..first.k())
        .map(|k| {
            (0..first.sigma.len())
                .map(|s| {
                    (0..first.ygrid.steps())
                        .map(|y| {
                            column.clear();
                            column.extend(samples.iter().map(|f| f.surface[k][s][y]));
                            f(&column)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn mean<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |a, &v| a + v) / T::from_usize_lossy(values.len())
}

/// Pointwise average of flamelets on a common lattice.
pub fn mean_flamelet<T: Scalar>(samples: &[Flamelet<T>]) -> Result<Flamelet<T>> {
    let first = check_samples(samples)?;
    // Rounded sums are monotone, so averaged levels keep their ordering.
    Ok(Flamelet {
        surface: nodewise(samples, mean),
        ..first.clone()
    })
}

/// Unbiased pointwise sample variance over two or more flamelets.
pub fn variance_flamelet<T: Scalar>(samples: &[Flamelet<T>]) -> Result<Surface<T>> {
    if samples.len() < 2 {
        return Err(invalid("variance needs at least two samples"));
    }
    check_samples(samples)?;
    Ok(nodewise(samples, |values| {
        let m = mean(values);
        values.iter().fold(T::zero(), |a, &v| a + (v - m) * (v - m))
            / T::from_usize_lossy(values.len() - 1)
    }))
}

/// Level `k` of a flamelet as a dense matrix with one row per scale value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProjectionMatrix<T: Scalar> {
    pub k: usize,
    pub sigma: Vec<T>,
    pub y: Vec<T>,
    pub rows: Vec<Vec<T>>,
}

impl<T: Scalar> ProjectionMatrix<T> {
    pub fn shape(&self) -> (usize, usize) {
        (self.sigma.len(), self.y.len())
    }

    /// CSV with a `sigma` label column and a header row of y-grid nodes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma");
        for y in &self.y {
            write!(out, ",{y}").expect("write to string");
        }
        out.push('\n');
        for (s, row) in self.sigma.iter().zip(&self.rows) {
            write!(out, "{s}").expect("write to string");
            for v in row {
                write!(out, ",{v}").expect("write to string");
            }
            out.push('\n');
        }
        out
    }
}

pub fn projection_matrix<T: Scalar>(f: &Flamelet<T>, k: usize) -> Result<ProjectionMatrix<T>> {
    f.check_level(k)?;
    Ok(ProjectionMatrix {
        k,
        sigma: f.sigma.values.clone(),
        y: f.ygrid.nodes().collect(),
        rows: f.surface[k - 1].clone(),
    })
}

/// How a scale slice is scored when picking the topologically-aware bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionCriterion {
    /// Highest value of the level anywhere on the slice.
    #[default]
    Sup,
    /// Largest integral of the level over y.
    Mass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BandwidthSelection<T: Scalar> {
    /// Selected scale in native units.
    pub sigma: T,
    pub index: usize,
    /// Score of the selected slice under `criterion`.
    pub peak: T,
    pub k: usize,
    pub criterion: SelectionCriterion,
}

/// Scale at which level `k` of the flamelet peaks; ties go to the smallest scale.
pub fn select_bandwidth_ta<T: Scalar>(f: &Flamelet<T>, k: usize) -> Result<BandwidthSelection<T>> {
    select_bandwidth_ta_with(f, k, SelectionCriterion::Sup)
}

pub fn select_bandwidth_ta_with<T: Scalar>(
    f: &Flamelet<T>,
    k: usize,
    criterion: SelectionCriterion,
) -> Result<BandwidthSelection<T>> {
    f.check_level(k)?;
    let h = f.ygrid.spacing();
    let score = |row: &[T]| match criterion {
        SelectionCriterion::Sup => row.iter().fold(T::zero(), |m, &v| m.max(v)),
        SelectionCriterion::Mass => crate::scalar::trapezoid_uniform(h, row),
    };
    let (index, peak) = f.surface[k - 1]
        .iter()
        .map(|row| score(row))
        .enumerate()
        .fold(
            (0, T::zero()),
            |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) },
        );
    if !(peak > T::zero()) {
        return Err(TopoError::Degenerate(format!(
            "level {k} of the flamelet is identically zero"
        )));
    }
    Ok(BandwidthSelection {
        sigma: f.sigma.values[index],
        index,
        peak,
        k,
        criterion,
    })
}
