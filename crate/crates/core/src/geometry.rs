//! Point clouds, Euclidean distances and Hausdorff-type set distances.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TopoError};
use crate::scalar::{trapezoid, Scalar};

/// Metric used between points. Only Euclidean is available for now.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
}

impl Metric {
    pub fn distance<T: Scalar>(self, a: &[T], b: &[T]) -> T {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
                .sqrt(),
        }
    }
}

/// A finite, nonempty set of points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointCloudRepr<T>", into = "PointCloudRepr<T>")]
#[serde(bound = "")]
pub struct PointCloud<T: Scalar> {
    coords: Vec<T>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct PointCloudRepr<T> {
    dim: usize,
    points: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<PointCloudRepr<T>> for PointCloud<T> {
    type Error = TopoError;

    fn try_from(repr: PointCloudRepr<T>) -> Result<Self> {
        let cloud = PointCloud::from_rows(repr.points)?;
        if cloud.dim != repr.dim {
            return Err(TopoError::DimensionMismatch {
                expected: repr.dim,
                found: cloud.dim,
            });
        }
        Ok(cloud)
    }
}

impl<T: Scalar> From<PointCloud<T>> for PointCloudRepr<T> {
    fn from(cloud: PointCloud<T>) -> Self {
        PointCloudRepr {
            dim: cloud.dim,
            points: cloud.iter().map(<[T]>::to_vec).collect(),
        }
    }
}

impl<T: Scalar> PointCloud<T> {
    /// Builds a cloud from row-major coordinates.
    pub fn new(coords: Vec<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("point dimension must be at least 1"));
        }
        if coords.is_empty() {
            return Err(invalid("point cloud must contain at least one point"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "{} coordinates cannot be split into points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point coordinates must be finite"));
        }
        Ok(Self { coords, dim })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: impl IntoIterator<Item = R>) -> Result<Self> {
        let mut coords = Vec::new();
        let mut dim = None;
        for (i, row) in rows.into_iter().enumerate() {
            let row = row.as_ref();
            match dim {
                None => dim = Some(row.len()),
                Some(d) if d != row.len() => {
                    return Err(invalid(format!(
                        "point {i} has dimension {}, expected {d}",
                        row.len()
                    )))
                }
                Some(_) => {}
            }
            coords.extend_from_slice(row);
        }
        let dim = dim.ok_or_else(|| invalid("point cloud must contain at least one point"))?;
        Self::new(coords, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false: clouds hold at least one point.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Values of one coordinate across all points.
    pub fn column(&self, axis: usize) -> impl Iterator<Item = T> + '_ {
        self.iter().map(move |p| p[axis])
    }

    /// Unbiased sample variance of each coordinate. Requires two or more points.
    pub fn coordinate_variances(&self) -> Result<Vec<T>> {
        let n = self.len();
        if n < 2 {
            return Err(invalid("variance needs at least two points"));
        }
        let nf = T::from_usize_lossy(n);
        Ok((0..self.dim)
            .map(|axis| {
                let mean = self.column(axis).fold(T::zero(), |a, v| a + v) / nf;
                self.column(axis)
                    .fold(T::zero(), |a, v| a + (v - mean) * (v - mean))
                    / (nf - T::one())
            })
            .collect())
    }

    /// Per-axis (min, max) bounds.
    pub fn bounds(&self) -> Vec<(T, T)> {
        (0..self.dim)
            .map(|axis| {
                self.column(axis)
                    .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .collect()
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.coords.iter().map(|&c| c * factor).collect(), self.dim)
    }
}

/// Dense symmetric distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T: Scalar> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.values
            .chunks(self.n.max(1))
            .map(<[T]>::to_vec)
            .collect()
    }
}

pub fn pairwise_distances<T: Scalar>(cloud: &PointCloud<T>) -> DistanceMatrix<T> {
    pairwise_distances_with(cloud, Metric::Euclidean)
}

pub fn pairwise_distances_with<T: Scalar>(
    cloud: &PointCloud<T>,
    metric: Metric,
) -> DistanceMatrix<T> {
    let n = cloud.len();
    let mut values = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = metric.distance(cloud.point(i), cloud.point(j));
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix { n, values }
}

fn directed_hausdorff<T: Scalar>(from: &PointCloud<T>, to: &PointCloud<T>) -> T {
    from.iter()
        .map(|p| {
            to.iter()
                .map(|q| Metric::Euclidean.distance(p, q))
                .fold(T::infinity(), T::min)
        })
        .fold(T::zero(), T::max)
}

/// Symmetric Hausdorff distance between two clouds of the same dimension.
pub fn hausdorff<T: Scalar>(a: &PointCloud<T>, b: &PointCloud<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(TopoError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

/// A single time-stamped snapshot of a dynamic point cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Frame<T: Scalar> {
    pub t: T,
    pub cloud: PointCloud<T>,
}

/// Point cloud evolving over `t in [0, 1]`, observed at two or more frames.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicPointCloud<T: Scalar> {
    frames: Vec<Frame<T>>,
}

impl<T: Scalar> DynamicPointCloud<T> {
    pub fn new(frames: Vec<Frame<T>>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(invalid("a dynamic point cloud needs at least two frames"));
        }
        let dim = frames[0].cloud.dim();
        for pair in frames.windows(2) {
            if !(pair[0].t < pair[1].t) {
                return Err(invalid("frame times must be strictly increasing"));
            }
        }
        for f in &frames {
            if !(f.t >= T::zero() && f.t <= T::one()) {
                return Err(invalid(format!("frame time {} outside [0, 1]", f.t)));
            }
            if f.cloud.dim() != dim {
                return Err(TopoError::DimensionMismatch {
                    expected: dim,
                    found: f.cloud.dim(),
                });
            }
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[Frame<T>] {
        &self.frames
    }

    pub fn times(&self) -> Vec<T> {
        self.frames.iter().map(|f| f.t).collect()
    }

    pub fn dim(&self) -> usize {
        self.frames[0].cloud.dim()
    }

    /// Frame indices and linear weights bracketing `t` (which must lie in range).
    fn bracket(&self, t: T) -> [(usize, T); 2] {
        let idx = self.frames.partition_point(|f| f.t < t);
        if idx < self.frames.len() && self.frames[idx].t == t {
            return [(idx, T::one()), (idx, T::zero())];
        }
        let (lo, hi) = (idx - 1, idx);
        let w = (t - self.frames[lo].t) / (self.frames[hi].t - self.frames[lo].t);
        [(lo, T::one() - w), (hi, w)]
    }
}

/// Trapezoid approximation of the time integral of the Hausdorff distance.
///
/// Both trajectories are evaluated on the union of their frame times within the
/// overlap of their time ranges. Where a trajectory has no frame at a time, the
/// per-frame distances to its two bracketing frames are blended linearly.
pub fn integrated_hausdorff<T: Scalar>(
    a: &DynamicPointCloud<T>,
    b: &DynamicPointCloud<T>,
) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(TopoError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (ta, tb) = (a.times(), b.times());
    let start = ta[0].max(tb[0]);
    let end = ta[ta.len() - 1].min(tb[tb.len() - 1]);
    if !(start < end) {
        return Err(invalid(
            "dynamic point clouds have no overlapping time range",
        ));
    }
    let mut grid: Vec<T> = ta
        .iter()
        .chain(&tb)
        .copied()
        .chain([start, end])
        .filter(|&t| t >= start && t <= end)
        .collect();
    grid.sort_by(|x, y| x.partial_cmp(y).expect("finite times"));
    grid.dedup();

    let mut cache = std::collections::HashMap::new();
    let mut frame_distance = |i: usize, j: usize| -> Result<T> {
        if let Some(&d) = cache.get(&(i, j)) {
            return Ok(d);
        }
        let d = hausdorff(&a.frames[i].cloud, &b.frames[j].cloud)?;
        cache.insert((i, j), d);
        Ok(d)
    };

    let mut values = Vec::with_capacity(grid.len());
    for &t in &grid {
        let mut d = T::zero();
        for (i, wi) in a.bracket(t) {
            for (j, wj) in b.bracket(t) {
                let w = wi * wj;
                if w > T::zero() {
                    d = d + w * frame_distance(i, j)?;
                }
            }
        }
        values.push(d);
    }
    Ok(trapezoid(&grid, &values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(rows: &[&[f64]]) -> PointCloud<f64> {
        PointCloud::from_rows(rows.iter().copied()).unwrap()
    }

    #[test]
    fn pairwise_examples() {
        assert_eq!(
            pairwise_distances(&cloud(&[&[1.0]])).rows(),
            vec![vec![0.0]]
        );
        assert_eq!(
            pairwise_distances(&cloud(&[&[0.0], &[3.0]])).rows(),
            vec![vec![0.0, 3.0], vec![3.0, 0.0]]
        );
        let m = pairwise_distances(&cloud(&[&[0.0, 0.0], &[3.0, 4.0]]));
        assert_eq!(m.get(0, 1), 5.0);
        assert_eq!(m.get(1, 0), 5.0);
    }

    #[test]
    fn cloud_invariants() {
        assert!(PointCloud::<f64>::new(vec![], 2).is_err());
        assert!(PointCloud::new(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(PointCloud::new(vec![f64::NAN], 1).is_err());
        assert!(PointCloud::<f64>::from_rows(Vec::<Vec<f64>>::new()).is_err());
        assert!(PointCloud::from_rows([vec![0.0, 1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let a = cloud(&[&[0.0], &[2.0]]);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(
            hausdorff(&cloud(&[&[0.0]]), &cloud(&[&[1.0]])).unwrap(),
            1.0
        );
        // brute force: d(0,1) = d(2,1) = 1, directed both ways = 1
        assert_eq!(hausdorff(&a, &cloud(&[&[1.0]])).unwrap(), 1.0);
        assert!(hausdorff(&a, &cloud(&[&[0.0, 1.0]])).is_err());
    }

    fn frames(ts: &[f64], offsets: &[f64]) -> DynamicPointCloud<f64> {
        DynamicPointCloud::new(
            ts.iter()
                .zip(offsets)
                .map(|(&t, &o)| Frame {
                    t,
                    cloud: cloud(&[&[o]]),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn integrated_hausdorff_examples() {
        let a = frames(&[0.0, 0.5, 1.0], &[0.0, 0.0, 0.0]);
        assert_eq!(integrated_hausdorff(&a, &a).unwrap(), 0.0);

        let b = frames(&[0.0, 0.5, 1.0], &[2.5, 2.5, 2.5]);
        assert!((integrated_hausdorff(&a, &b).unwrap() - 2.5).abs() < 1e-12);

        let c = frames(&[0.0, 0.5, 1.0], &[0.0, 1.0, 0.0]);
        assert!((integrated_hausdorff(&a, &c).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn integrated_hausdorff_interpolates_between_grids() {
        // a is static at 0; b is observed only at the ends, at distance 1.
        // a's midpoint frame sees the blend 0.5 * 1 + 0.5 * 1 = 1.
        let a = frames(&[0.0, 0.5, 1.0], &[0.0, 0.0, 0.0]);
        let b = frames(&[0.0, 1.0], &[1.0, 1.0]);
        assert!((integrated_hausdorff(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrated_hausdorff_requires_overlap() {
        let a = frames(&[0.0, 0.4], &[0.0, 0.0]);
        let b = frames(&[0.6, 1.0], &[0.0, 0.0]);
        assert!(integrated_hausdorff(&a, &b).is_err());
    }

    #[test]
    fn dynamic_invariants() {
        assert!(DynamicPointCloud::new(vec![Frame {
            t: 0.0,
            cloud: cloud(&[&[0.0]])
        }])
        .is_err());
        let bad = vec![
            Frame {
                t: 0.5,
                cloud: cloud(&[&[0.0]]),
            },
            Frame {
                t: 0.5,
                cloud: cloud(&[&[0.0]]),
            },
        ];
        assert!(DynamicPointCloud::new(bad).is_err());
        let out = vec![
            Frame {
                t: 0.0,
                cloud: cloud(&[&[0.0]]),
            },
            Frame {
                t: 1.5,
                cloud: cloud(&[&[0.0]]),
            },
        ];
        assert!(DynamicPointCloud::new(out).is_err());
    }
}
