//! Flamelets of dynamic point clouds: one Rips persistence diagram per
//! frame, indexed by time.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::diagram_metrics::Vineyard;
use crate::error::Result;
use crate::filtration::rips_filtration;
use crate::flamelets::{build_flamelet, Flamelet};
use crate::geometry::DynamicPointCloud;
use crate::landscape::YGrid;
use crate::persistence::{compute_persistence, PersistenceDiagram};
use crate::scalar::Scalar;

/// Rips persistence of every frame, grouped into one vineyard per dimension.
pub fn rips_vineyards<T: Scalar>(
    cloud: &DynamicPointCloud<T>,
    dims: &[usize],
    max_radius: T,
) -> Result<BTreeMap<usize, Vineyard<T>>> {
    let max_dim = dims.iter().map(|&d| d + 1).max().unwrap_or(1).min(2);
    let per_frame: Vec<BTreeMap<usize, PersistenceDiagram<T>>> = cloud
        .frames()
        .par_iter()
        .map(|frame| {
            compute_persistence(&rips_filtration(&frame.cloud, max_dim, max_radius)?, dims)
        })
        .collect::<Result<_>>()?;

    let mut by_dim: BTreeMap<usize, Vec<(T, PersistenceDiagram<T>)>> = BTreeMap::new();
    for (frame, mut diagrams) in cloud.frames().iter().zip(per_frame) {
        for &d in dims {
            let diagram = diagrams.remove(&d).expect("requested dimension computed");
            by_dim.entry(d).or_default().push((frame.t, diagram));
        }
    }
    by_dim
        .into_iter()
        .map(|(d, slices)| Ok((d, Vineyard::new(slices)?)))
        .collect()
}

/// Time-indexed flamelets; `ygrid` defaults to one covering every diagram
/// of the dimension.
pub fn time_flamelets<T: Scalar>(
    cloud: &DynamicPointCloud<T>,
    dims: &[usize],
    max_radius: T,
    k: usize,
    y_steps: usize,
    ygrid: Option<YGrid<T>>,
) -> Result<BTreeMap<usize, Flamelet<T>>> {
    rips_vineyards(cloud, dims, max_radius)?
        .into_iter()
        .map(|(d, vineyard)| {
            let grid = match ygrid {
                Some(g) => g,
                None => YGrid::covering(vineyard.diagrams(), y_steps)?,
            };
            Ok((d, build_flamelet(&vineyard, &grid, k)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::breathing_circle;

    #[test]
    fn frames_become_slices() {
        let cloud: DynamicPointCloud<f64> = breathing_circle(4, 12, (1.0, 2.0), 0.0, 11).unwrap();
        let fl = time_flamelets(&cloud, &[0, 1], f64::INFINITY, 2, 64, None).unwrap();
        assert_eq!(fl.len(), 2);
        assert_eq!(fl[&0].sigma().values(), cloud.times().as_slice());
        assert_eq!(fl[&1].dim(), 1);
    }
}
