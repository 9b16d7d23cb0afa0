//! Persistence landscapes and power-weighted silhouettes sampled on a
//! uniform grid of filtration levels.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TopoError};
use crate::persistence::{PersistenceDiagram, PersistencePair};
use crate::scalar::{trapezoid_uniform, Scalar};

pub const DEFAULT_LEVELS: usize = 5;
pub const DEFAULT_GRID_STEPS: usize = 512;

/// Uniform grid of `steps` nodes from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "YGridRepr<T>")]
#[serde(bound = "")]
pub struct YGrid<T: Scalar> {
    min: T,
    max: T,
    steps: usize,
}

#[derive(Deserialize)]
struct YGridRepr<T> {
    min: T,
    max: T,
    steps: usize,
}

impl<T: Scalar> TryFrom<YGridRepr<T>> for YGrid<T> {
    type Error = TopoError;

    fn try_from(r: YGridRepr<T>) -> Result<Self> {
        YGrid::new(r.min, r.max, r.steps)
    }
}

impl<T: Scalar> YGrid<T> {
    pub fn new(min: T, max: T, steps: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(invalid(format!(
                "grid bounds need min < max, got [{min}, {max}]"
            )));
        }
        if steps < 2 {
            return Err(invalid("grid needs at least two nodes"));
        }
        Ok(Self { min, max, steps })
    }

    /// Grid spanning every birth and death in `diagrams`, padded by 5% of
    /// the span on each side.
    pub fn covering<'a>(
        diagrams: impl IntoIterator<Item = &'a PersistenceDiagram<T>>,
        steps: usize,
    ) -> Result<Self> {
        let (lo, hi) = diagrams
            .into_iter()
            .flat_map(|d| d.pairs().iter())
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| {
                (lo.min(p.birth.min(p.death)), hi.max(p.birth.max(p.death)))
            });
        if lo > hi {
            return Self::new(T::zero(), T::one(), steps);
        }
        let pad = if hi > lo {
            (hi - lo) * T::lit(0.05)
        } else {
            T::lit(0.5)
        };
        Self::new(lo - pad, hi + pad, steps)
    }

    pub fn min(&self) -> T {
        self.min
    }

    pub fn max(&self) -> T {
        self.max
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn spacing(&self) -> T {
        (self.max - self.min) / T::from_usize_lossy(self.steps - 1)
    }

    pub fn node(&self, i: usize) -> T {
        if i + 1 == self.steps {
            self.max
        } else {
            self.min + T::from_usize_lossy(i) * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.steps).map(|i| self.node(i))
    }
}

/// Tent of a diagram point: peak `|b - d| / 2` at the midpoint `(b + d) / 2`,
/// falling with slope one to zero at `b` and `d`.
pub fn triangle<T: Scalar>(pair: &PersistencePair<T>, y: T) -> T {
    let half = T::lit(0.5);
    let mid = (pair.birth + pair.death) * half;
    let height = (pair.birth - pair.death).abs() * half;
    (height - (y - mid).abs()).max(T::zero())
}

/// `levels[k][i]` is the `(k+1)`-th largest tent value at grid node `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LandscapeRepr<T>", into = "LandscapeRepr<T>")]
#[serde(bound = "")]
pub struct Landscape<T: Scalar> {
    grid: YGrid<T>,
    levels: Vec<Vec<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct LandscapeRepr<T: Scalar> {
    grid: YGrid<T>,
    #[serde(rename = "K")]
    k: usize,
    levels: Vec<Vec<T>>,
}

impl<T: Scalar> From<Landscape<T>> for LandscapeRepr<T> {
    fn from(l: Landscape<T>) -> Self {
        LandscapeRepr {
            grid: l.grid,
            k: l.levels.len(),
            levels: l.levels,
        }
    }
}

impl<T: Scalar> TryFrom<LandscapeRepr<T>> for Landscape<T> {
    type Error = TopoError;

    fn try_from(r: LandscapeRepr<T>) -> Result<Self> {
        if r.k != r.levels.len() {
            return Err(invalid(format!(
                "K = {} but {} levels stored",
                r.k,
                r.levels.len()
            )));
        }
        Landscape::from_levels(r.grid, r.levels)
    }
}

impl<T: Scalar> Landscape<T> {
    /// Wraps precomputed levels, checking shape and the ordering
    /// `levels[0] >= levels[1] >= ... >= 0` at every node.
    pub fn from_levels(grid: YGrid<T>, levels: Vec<Vec<T>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(invalid("a landscape needs at least one level"));
        }
        if levels.iter().any(|l| l.len() != grid.steps()) {
            return Err(TopoError::GridMismatch(
                "level length differs from grid size".into(),
            ));
        }
        for i in 0..grid.steps() {
            let mut prev = T::infinity();
            for level in &levels {
                let v = level[i];
                if !(v.is_finite() && v >= T::zero() && v <= prev) {
                    return Err(invalid(format!(
                        "landscape levels out of order at node {i}"
                    )));
                }
                prev = v;
            }
        }
        Ok(Self { grid, levels })
    }

    pub fn zeros(grid: YGrid<T>, k: usize) -> Self {
        Self {
            grid,
            levels: vec![vec![T::zero(); grid.steps()]; k.max(1)],
        }
    }

    pub fn grid(&self) -> &YGrid<T> {
        &self.grid
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<T>] {
        &self.levels
    }

    /// Level `k`, one-based.
    pub fn level(&self, k: usize) -> Option<&[T]> {
        k.checked_sub(1)
            .and_then(|i| self.levels.get(i))
            .map(Vec::as_slice)
    }

    pub fn sup(&self) -> T {
        self.levels
            .iter()
            .flatten()
            .fold(T::zero(), |m, &v| m.max(v))
    }

    pub(crate) fn into_levels(self) -> Vec<Vec<T>> {
        self.levels
    }
}

/// k-max landscape of `diagram` with `k` levels on `grid`.
pub fn landscape<T: Scalar>(
    diagram: &PersistenceDiagram<T>,
    grid: &YGrid<T>,
    k: usize,
) -> Result<Landscape<T>> {
    if k == 0 {
        return Err(invalid("landscape needs K >= 1"));
    }
    let pairs: Vec<&PersistencePair<T>> = diagram.significant().collect();
    let mut levels = vec![vec![T::zero(); grid.steps()]; k];
    let mut top = Vec::with_capacity(k + 1);
    for (i, y) in grid.nodes().enumerate() {
        top.clear();
        for p in &pairs {
            let v = triangle(p, y);
            if v <= T::zero() || (top.len() == k && v <= top[k - 1]) {
                continue;
            }
            let pos = top.partition_point(|&t| t >= v);
            top.insert(pos, v);
            top.truncate(k);
        }
        for (level, &v) in levels.iter_mut().zip(&top) {
            level[i] = v;
        }
    }
    Ok(Landscape {
        grid: *grid,
        levels,
    })
}

/// Power-weighted silhouette: tents averaged with weights `|b - d|^p`.
pub fn silhouette<T: Scalar>(
    diagram: &PersistenceDiagram<T>,
    grid: &YGrid<T>,
    p: T,
) -> Result<Vec<T>> {
    if !(p > T::zero() && p.is_finite()) {
        return Err(invalid("silhouette power must be a positive real"));
    }
    let pairs: Vec<&PersistencePair<T>> = diagram.significant().collect();
    let heaviest = pairs
        .iter()
        .map(|z| z.persistence())
        .fold(T::zero(), T::max);
    if heaviest <= T::zero() {
        return Err(TopoError::Degenerate(
            "silhouette weights are all zero".into(),
        ));
    }
    // weights relative to the heaviest point keep large powers finite
    let weights: Vec<T> = pairs
        .iter()
        .map(|z| (z.persistence() / heaviest).powf(p))
        .collect();
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    Ok(grid
        .nodes()
        .map(|y| {
            pairs
                .iter()
                .zip(&weights)
                .fold(T::zero(), |acc, (z, &w)| acc + w * triangle(z, y))
                / total
        })
        .collect())
}

fn check_norm_power<T: Scalar>(p: T) -> Result<()> {
    if p.is_nan() || p < T::one() {
        Err(invalid(format!("norm power must be >= 1, got {p}")))
    } else {
        Ok(())
    }
}

/// `sum_k ||lambda_k||_p^p` with each level integrated by the trapezoid rule.
pub(crate) fn landscape_power_sum<T: Scalar>(l: &Landscape<T>, p: T) -> T {
    let h = l.grid.spacing();
    l.levels
        .iter()
        .map(|level| {
            let powered: Vec<T> = level.iter().map(|&v| v.powf(p)).collect();
            trapezoid_uniform(h, &powered)
        })
        .fold(T::zero(), |a, b| a + b)
}

/// `(sum_k ||lambda_k||_p^p)^(1/p)`; `p = infinity` gives the maximum value.
pub fn landscape_norm<T: Scalar>(l: &Landscape<T>, p: T) -> Result<T> {
    check_norm_power(p)?;
    if p.is_infinite() {
        return Ok(l.sup());
    }
    Ok(landscape_power_sum(l, p).powf(p.recip()))
}

/// Sup-norm distance between two landscapes on the same grid with equal K.
pub fn landscape_distance<T: Scalar>(a: &Landscape<T>, b: &Landscape<T>) -> Result<T> {
    if a.grid != b.grid {
        return Err(TopoError::GridMismatch(
            "landscapes use different y-grids".into(),
        ));
    }
    if a.k() != b.k() {
        return Err(TopoError::GridMismatch(format!(
            "landscapes have K = {} and K = {}",
            a.k(),
            b.k()
        )));
    }
    Ok(a.levels
        .iter()
        .flatten()
        .zip(b.levels.iter().flatten())
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())))
}
