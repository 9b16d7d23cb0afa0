//! Filtered simplicial complexes built from point clouds (Vietoris–Rips) and
//! from functions sampled on 1D/2D grids (lower-star filtrations).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TopoError};
use crate::geometry::{pairwise_distances, PointCloud};
use crate::scalar::Scalar;

/// Highest simplex dimension any builder in this module produces.
pub const MAX_SUPPORTED_DIM: usize = 2;

/// Direction of a filtration in the scale of the original function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Sets `{f <= t}` growing with `t`; births precede deaths.
    #[default]
    Sublevel,
    /// Sets `{f >= t}` growing as `t` decreases; births are above deaths.
    Superlevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex<T: Scalar> {
    vertices: Vec<usize>,
    value: T,
}

impl<T: Scalar> Simplex<T> {
    pub fn new(mut vertices: Vec<usize>, value: T) -> Result<Self> {
        if vertices.is_empty() {
            return Err(invalid("a simplex needs at least one vertex"));
        }
        if !value.is_finite() {
            return Err(invalid("filtration values must be finite"));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("simplex vertices must be distinct"));
        }
        Ok(Self { vertices, value })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Codimension-one faces, each given by its vertex list.
    pub fn facets(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let n = if self.vertices.len() > 1 {
            self.vertices.len()
        } else {
            0
        };
        (0..n).map(move |skip| {
            self.vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect()
        })
    }

    fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .partial_cmp(&other.value)
            .expect("finite filtration values")
            .then(self.dim().cmp(&other.dim()))
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

/// Simplices in filtration order `(value, dimension, vertex list)`.
///
/// Values are always stored in ascending (sublevel) coordinates. A
/// superlevel filtration of `f` is stored as the sublevel filtration of `-f`
/// and tagged with [`Convention::Superlevel`], so diagram extraction can map
/// values back to the scale of `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex<T: Scalar> {
    simplices: Vec<Simplex<T>>,
    max_dim: usize,
    convention: Convention,
}

impl<T: Scalar> FilteredComplex<T> {
    /// Sorts the simplices into filtration order. Monotonicity is not checked
    /// here; see [`FilteredComplex::validate`].
    pub fn new(mut simplices: Vec<Simplex<T>>, convention: Convention) -> Self {
        simplices.sort_by(Simplex::filtration_cmp);
        let max_dim = simplices.iter().map(Simplex::dim).max().unwrap_or(0);
        Self {
            simplices,
            max_dim,
            convention,
        }
    }

    pub fn simplices(&self) -> &[Simplex<T>] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }

    /// Largest stored filtration value.
    pub fn max_value(&self) -> Option<T> {
        self.simplices.last().map(Simplex::value)
    }

    /// Index of every simplex keyed by vertex list.
    pub(crate) fn index(&self) -> std::collections::HashMap<&[usize], usize> {
        self.simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.vertices(), i))
            .collect()
    }

    /// Boundary of every simplex as sorted facet positions, checking that each
    /// facet is present, precedes its coface, and has a value no larger.
    pub fn boundary_columns(&self) -> Result<Vec<Vec<usize>>> {
        let index = self.index();
        if index.len() != self.simplices.len() {
            return Err(invalid("complex contains duplicate simplices"));
        }
        self.simplices
            .iter()
            .enumerate()
            .map(|(pos, s)| {
                let mut column = Vec::with_capacity(s.vertices.len());
                for facet in s.facets() {
                    let &face = index.get(facet.as_slice()).ok_or_else(|| {
                        invalid(format!("facet {facet:?} of {:?} is missing", s.vertices))
                    })?;
                    if face > pos || self.simplices[face].value > s.value {
                        return Err(TopoError::NonMonotone(format!(
                            "facet {facet:?} enters after {:?}",
                            s.vertices
                        )));
                    }
                    column.push(face);
                }
                column.sort_unstable();
                Ok(column)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.boundary_columns().map(|_| ())
    }
}

fn check_max_dim(max_dim: usize) -> Result<()> {
    if max_dim > MAX_SUPPORTED_DIM {
        Err(TopoError::UnsupportedDimension(max_dim))
    } else {
        Ok(())
    }
}

/// Vietoris–Rips filtration with the diameter convention: an edge enters at
/// the distance between its endpoints, a triangle at its longest edge.
/// Edges longer than `max_radius` are omitted (pass infinity for no cut-off).
pub fn rips_filtration<T: Scalar>(
    cloud: &PointCloud<T>,
    max_dim: usize,
    max_radius: T,
) -> Result<FilteredComplex<T>> {
    check_max_dim(max_dim)?;
    if !(max_radius > T::zero()) {
        return Err(invalid("max_radius must be positive"));
    }
    let n = cloud.len();
    let dist = pairwise_distances(cloud);
    let mut simplices: Vec<Simplex<T>> = (0..n)
        .map(|v| Simplex {
            vertices: vec![v],
            value: T::zero(),
        })
        .collect();
    if max_dim == 0 {
        return Ok(FilteredComplex::new(simplices, Convention::Sublevel));
    }

    let mut neighbors = vec![Vec::new(); n];
    for (i, row) in neighbors.iter_mut().enumerate() {
        for j in i + 1..n {
            let d = dist.get(i, j);
            if d <= max_radius {
                row.push(j);
                simplices.push(Simplex {
                    vertices: vec![i, j],
                    value: d,
                });
            }
        }
    }
    if max_dim >= 2 {
        for (i, row) in neighbors.iter().enumerate() {
            for (a, &j) in row.iter().enumerate() {
                for &k in &row[a + 1..] {
                    let djk = dist.get(j, k);
                    if djk <= max_radius {
                        let value = dist.get(i, j).max(dist.get(i, k)).max(djk);
                        simplices.push(Simplex {
                            vertices: vec![i, j, k],
                            value,
                        });
                    }
                }
            }
        }
    }
    Ok(FilteredComplex::new(simplices, Convention::Sublevel))
}

/// A real function sampled on a regular 1D or 2D grid.
///
/// 2D values are row-major with `shape = [rows, cols]`; axis 0 runs along rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFunctionRepr<T>")]
#[serde(bound = "")]
pub struct GridFunction<T: Scalar> {
    shape: Vec<usize>,
    spacing: Vec<T>,
    origin: Vec<T>,
    values: Vec<T>,
}

#[derive(Deserialize)]
struct GridFunctionRepr<T> {
    shape: Vec<usize>,
    spacing: Vec<T>,
    origin: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> TryFrom<GridFunctionRepr<T>> for GridFunction<T> {
    type Error = TopoError;

    fn try_from(r: GridFunctionRepr<T>) -> Result<Self> {
        GridFunction::new(r.shape, r.spacing, r.origin, r.values)
    }
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(shape: Vec<usize>, spacing: Vec<T>, origin: Vec<T>, values: Vec<T>) -> Result<Self> {
        if shape.is_empty() || shape.len() > 2 {
            return Err(TopoError::UnsupportedDimension(shape.len()));
        }
        if spacing.len() != shape.len() || origin.len() != shape.len() {
            return Err(invalid("spacing and origin need one entry per grid axis"));
        }
        if shape.contains(&0) {
            return Err(invalid("grid axes must have at least one node"));
        }
        let count: usize = shape.iter().product();
        if count != values.len() {
            return Err(invalid(format!(
                "grid of shape {shape:?} needs {count} values, got {}",
                values.len()
            )));
        }
        if values
            .iter()
            .chain(&spacing)
            .chain(&origin)
            .any(|v| !v.is_finite())
        {
            return Err(invalid("grid values, spacing and origin must be finite"));
        }
        if spacing.iter().any(|&s| !(s > T::zero())) {
            return Err(invalid("grid spacing must be positive"));
        }
        Ok(Self {
            shape,
            spacing,
            origin,
            values,
        })
    }

    /// Unit-spaced 1D grid starting at zero.
    pub fn from_values_1d(values: Vec<T>) -> Result<Self> {
        Self::new(vec![values.len()], vec![T::one()], vec![T::zero()], values)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[T] {
        &self.spacing
    }

    pub fn origin(&self) -> &[T] {
        &self.origin
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    /// Coordinates of grid node `idx` (row-major), one per axis.
    pub fn node_coords(&self, idx: usize) -> Vec<T> {
        match *self.shape.as_slice() {
            [_] => vec![self.origin[0] + T::from_usize_lossy(idx) * self.spacing[0]],
            [_, cols] => {
                let (r, c) = (idx / cols, idx % cols);
                vec![
                    self.origin[0] + T::from_usize_lossy(r) * self.spacing[0],
                    self.origin[1] + T::from_usize_lossy(c) * self.spacing[1],
                ]
            }
            _ => unreachable!("grid shape validated on construction"),
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// `sup |f - g|` over a shared grid.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if self.shape != other.shape {
            return Err(TopoError::GridMismatch(format!(
                "shapes {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())))
    }

    /// Triangulation of the grid: vertices, axis-aligned edges, the
    /// lower-left to upper-right diagonal of each square, and the two
    /// triangles on either side of it.
    fn cells(&self, max_dim: usize) -> Vec<Vec<usize>> {
        let n = self.values.len();
        let mut cells: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        match *self.shape.as_slice() {
            [len] => {
                if max_dim >= 1 {
                    cells.extend((1..len).map(|i| vec![i - 1, i]));
                }
            }
            [rows, cols] => {
                let at = |r: usize, c: usize| r * cols + c;
                if max_dim >= 1 {
                    for r in 0..rows {
                        for c in 0..cols {
                            if c + 1 < cols {
                                cells.push(vec![at(r, c), at(r, c + 1)]);
                            }
                            if r + 1 < rows {
                                cells.push(vec![at(r, c), at(r + 1, c)]);
                            }
                            if r + 1 < rows && c + 1 < cols {
                                cells.push(vec![at(r, c), at(r + 1, c + 1)]);
                            }
                        }
                    }
                }
                if max_dim >= 2 {
                    for r in 0..rows.saturating_sub(1) {
                        for c in 0..cols.saturating_sub(1) {
                            cells.push(vec![at(r, c), at(r, c + 1), at(r + 1, c + 1)]);
                            cells.push(vec![at(r, c), at(r + 1, c), at(r + 1, c + 1)]);
                        }
                    }
                }
            }
            _ => unreachable!("grid shape validated on construction"),
        }
        cells
    }
}

/// Lower-star filtration of the triangulated grid: each cell enters at the
/// maximum of its vertex values.
pub fn sublevel_grid_filtration<T: Scalar>(
    f: &GridFunction<T>,
    max_dim: usize,
) -> Result<FilteredComplex<T>> {
    lower_star(f, max_dim, Convention::Sublevel, |v| v)
}

/// Superlevel filtration of `f`, stored as the sublevel filtration of `-f`.
pub fn superlevel_grid_filtration<T: Scalar>(
    f: &GridFunction<T>,
    max_dim: usize,
) -> Result<FilteredComplex<T>> {
    lower_star(f, max_dim, Convention::Superlevel, |v| -v)
}

fn lower_star<T: Scalar>(
    f: &GridFunction<T>,
    max_dim: usize,
    convention: Convention,
    transform: impl Fn(T) -> T,
) -> Result<FilteredComplex<T>> {
    check_max_dim(max_dim)?;
    if f.ndim() > 2 {
        return Err(TopoError::UnsupportedDimension(f.ndim()));
    }
    let values: Vec<T> = f.values.iter().map(|&v| transform(v)).collect();
    let simplices = f
        .cells(max_dim)
        .into_iter()
        .map(|vertices| {
            let value = vertices
                .iter()
                .map(|&v| values[v])
                .fold(T::neg_infinity(), T::max);
            Simplex { vertices, value }
        })
        .collect();
    Ok(FilteredComplex::new(simplices, convention))
}
