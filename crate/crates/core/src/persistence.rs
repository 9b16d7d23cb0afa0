//! Persistence diagrams by column reduction of the GF(2) boundary matrix.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TopoError};
use crate::filtration::{Convention, FilteredComplex, MAX_SUPPORTED_DIM};
use crate::scalar::Scalar;

/// Simplex budget of [`betti_oracle`]; dense ranks beyond this are refused.
pub const ORACLE_MAX_SIMPLICES: usize = 300;

/// One homology class: where it is born, where it dies, and in which degree.
///
/// Essential classes never die inside the filtration; their `death` is clamped
/// to the last filtration value (sublevel) or the lowest one (superlevel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair<T: Scalar> {
    pub birth: T,
    pub death: T,
    pub dim: usize,
    pub essential: bool,
}

impl<T: Scalar> PersistencePair<T> {
    pub fn persistence(&self) -> T {
        (self.birth - self.death).abs()
    }

    /// Zero-persistence pairs carry no topological information.
    pub fn is_removable(&self) -> bool {
        self.birth == self.death
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiagramRepr<T>", into = "DiagramRepr<T>")]
#[serde(bound = "")]
pub struct PersistenceDiagram<T: Scalar> {
    dim: usize,
    convention: Convention,
    pairs: Vec<PersistencePair<T>>,
}

#[derive(Serialize, Deserialize)]
struct PairRepr<T> {
    birth: T,
    death: T,
    essential: bool,
}

#[derive(Serialize, Deserialize)]
struct DiagramRepr<T> {
    dim: usize,
    convention: Convention,
    pairs: Vec<PairRepr<T>>,
}

impl<T: Scalar> From<PersistenceDiagram<T>> for DiagramRepr<T> {
    fn from(d: PersistenceDiagram<T>) -> Self {
        DiagramRepr {
            dim: d.dim,
            convention: d.convention,
            pairs: d
                .pairs
                .into_iter()
                .map(|p| PairRepr {
                    birth: p.birth,
                    death: p.death,
                    essential: p.essential,
                })
                .collect(),
        }
    }
}

impl<T: Scalar> TryFrom<DiagramRepr<T>> for PersistenceDiagram<T> {
    type Error = TopoError;

    fn try_from(r: DiagramRepr<T>) -> Result<Self> {
        let dim = r.dim;
        PersistenceDiagram::new(
            dim,
            r.convention,
            r.pairs
                .into_iter()
                .map(|p| PersistencePair {
                    birth: p.birth,
                    death: p.death,
                    dim,
                    essential: p.essential,
                })
                .collect(),
        )
    }
}

impl<T: Scalar> PersistenceDiagram<T> {
    pub fn new(dim: usize, convention: Convention, pairs: Vec<PersistencePair<T>>) -> Result<Self> {
        for p in &pairs {
            if p.dim != dim {
                return Err(invalid(format!(
                    "pair of dimension {} in a dimension-{dim} diagram",
                    p.dim
                )));
            }
            if !p.birth.is_finite() || !p.death.is_finite() {
                return Err(invalid("diagram points must be finite"));
            }
            let ordered = match convention {
                Convention::Sublevel => p.birth <= p.death,
                Convention::Superlevel => p.birth >= p.death,
            };
            if !ordered {
                return Err(invalid(format!(
                    "pair ({}, {}) violates the {convention:?} ordering",
                    p.birth, p.death
                )));
            }
        }
        Ok(Self {
            dim,
            convention,
            pairs,
        })
    }

    /// Builds a diagram from plain `(birth, death)` points, none essential.
    pub fn from_points(dim: usize, convention: Convention, points: &[(T, T)]) -> Result<Self> {
        Self::new(
            dim,
            convention,
            points
                .iter()
                .map(|&(birth, death)| PersistencePair {
                    birth,
                    death,
                    dim,
                    essential: false,
                })
                .collect(),
        )
    }

    pub fn empty(dim: usize, convention: Convention) -> Self {
        Self {
            dim,
            convention,
            pairs: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn pairs(&self) -> &[PersistencePair<T>] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs with positive persistence.
    pub fn significant(&self) -> impl Iterator<Item = &PersistencePair<T>> + '_ {
        self.pairs.iter().filter(|p| !p.is_removable())
    }

    /// Persistence values sorted from largest to smallest.
    pub fn persistences_desc(&self) -> Vec<T> {
        let mut ps: Vec<T> = self
            .pairs
            .iter()
            .map(PersistencePair::persistence)
            .collect();
        ps.sort_by(|a, b| b.partial_cmp(a).expect("finite persistence"));
        ps
    }

    /// Number of classes alive at filtration level `t`, counted in the
    /// direction of the diagram's convention.
    pub fn rank_at(&self, t: T) -> usize {
        self.pairs
            .iter()
            .filter(|p| match (self.convention, p.essential) {
                (Convention::Sublevel, true) => p.birth <= t,
                (Convention::Sublevel, false) => p.birth <= t && t < p.death,
                (Convention::Superlevel, true) => p.birth >= t,
                (Convention::Superlevel, false) => p.birth >= t && t > p.death,
            })
            .count()
    }

    /// Points in sublevel coordinates (superlevel diagrams are negated).
    pub fn sublevel_points(&self) -> Vec<(T, T)> {
        self.pairs
            .iter()
            .map(|p| match self.convention {
                Convention::Sublevel => (p.birth, p.death),
                Convention::Superlevel => (-p.birth, -p.death),
            })
            .collect()
    }
}

fn add_columns(target: &[usize], source: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            std::cmp::Ordering::Less => {
                out.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(source[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&target[i..]);
    out.extend_from_slice(&source[j..]);
    out
}

/// Persistence diagrams of `complex` in each requested homology dimension.
///
/// Standard left-to-right column reduction over GF(2) in filtration order,
/// processed from the highest needed dimension downwards so that columns of
/// simplices already known to be paired creators are cleared without work.
pub fn compute_persistence<T: Scalar>(
    complex: &FilteredComplex<T>,
    dims: &[usize],
) -> Result<BTreeMap<usize, PersistenceDiagram<T>>> {
    if let Some(&bad) = dims.iter().find(|&&d| d > MAX_SUPPORTED_DIM) {
        return Err(TopoError::UnsupportedDimension(bad));
    }
    let convention = complex.convention();
    let mut diagrams: BTreeMap<usize, PersistenceDiagram<T>> = dims
        .iter()
        .map(|&d| (d, PersistenceDiagram::empty(d, convention)))
        .collect();
    if complex.is_empty() || dims.is_empty() {
        return Ok(diagrams);
    }

    let simplices = complex.simplices();
    let mut columns = complex.boundary_columns()?;
    let n = simplices.len();
    let top = dims
        .iter()
        .map(|&d| d + 1)
        .max()
        .unwrap_or(0)
        .min(complex.max_dim());

    const NONE: usize = usize::MAX;
    let mut pivot_col = vec![NONE; n];
    let mut cleared = vec![false; n];

    for d in (1..=top).rev() {
        for j in (0..n).filter(|&j| simplices[j].dim() == d) {
            if cleared[j] {
                columns[j].clear();
                continue;
            }
            let mut col = std::mem::take(&mut columns[j]);
            while let Some(&low) = col.last() {
                match pivot_col[low] {
                    NONE => break,
                    k => col = add_columns(&col, &columns[k]),
                }
            }
            if let Some(&low) = col.last() {
                pivot_col[low] = j;
                cleared[low] = true;
            }
            columns[j] = col;
        }
    }

    let to_user = |v: T| match convention {
        Convention::Sublevel => v,
        Convention::Superlevel => T::zero() - v,
    };
    let clamp = to_user(complex.max_value().expect("nonempty complex"));

    for (i, simplex) in simplices.iter().enumerate() {
        let d = simplex.dim();
        let Some(diagram) = diagrams.get_mut(&d) else {
            continue;
        };
        let positive = d == 0 || columns[i].is_empty();
        if !positive {
            continue;
        }
        let pair = match pivot_col[i] {
            NONE => PersistencePair {
                birth: to_user(simplex.value()),
                death: clamp,
                dim: d,
                essential: true,
            },
            j => PersistencePair {
                birth: to_user(simplex.value()),
                death: to_user(simplices[j].value()),
                dim: d,
                essential: false,
            },
        };
        diagram.pairs.push(pair);
    }
    Ok(diagrams)
}

/// Rank over GF(2) of a dense matrix given as bit-packed columns.
fn gf2_rank(mut cols: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let words = cols.first().map_or(0, Vec::len);
    for bit in 0..words * 64 {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..cols.len()).find(|&c| cols[c][w] & mask != 0) else {
            continue;
        };
        cols.swap(rank, p);
        let pivot = cols[rank].clone();
        for c in cols.iter_mut().skip(rank + 1) {
            if c[w] & mask != 0 {
                c.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
            }
        }
        rank += 1;
    }
    rank
}

/// Betti number of the subcomplex `{value <= threshold}` from dense boundary
/// ranks: `b_d = #d-simplices - rank(del_d) - rank(del_{d+1})`.
///
/// Test oracle for [`compute_persistence`]; shares none of its machinery.
/// Thresholds are in the complex's stored (ascending) coordinates.
pub fn betti_oracle<T: Scalar>(
    complex: &FilteredComplex<T>,
    threshold: T,
    dim: usize,
) -> Result<usize> {
    if complex.len() > ORACLE_MAX_SIMPLICES {
        return Err(TopoError::OracleTooLarge {
            size: complex.len(),
            limit: ORACLE_MAX_SIMPLICES,
        });
    }
    let alive: Vec<&[usize]> = complex
        .simplices()
        .iter()
        .filter(|s| s.value() <= threshold)
        .map(|s| s.vertices())
        .collect();
    let of_dim = |d: usize| -> Vec<&[usize]> {
        alive.iter().copied().filter(|v| v.len() == d + 1).collect()
    };
    let boundary_rank = |d: usize| -> Result<usize> {
        if d == 0 {
            return Ok(0);
        }
        let rows: HashMap<&[usize], usize> = of_dim(d - 1)
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let words = rows.len().div_ceil(64).max(1);
        let mut cols = Vec::new();
        for s in of_dim(d) {
            let mut col = vec![0u64; words];
            for skip in 0..s.len() {
                let face: Vec<usize> = [&s[..skip], &s[skip + 1..]].concat();
                let &r = rows
                    .get(face.as_slice())
                    .ok_or_else(|| invalid(format!("face {face:?} missing below threshold")))?;
                col[r / 64] |= 1 << (r % 64);
            }
            cols.push(col);
        }
        Ok(gf2_rank(cols))
    };
    let count = of_dim(dim).len();
    Ok(count - boundary_rank(dim)? - boundary_rank(dim + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{
        rips_filtration, sublevel_grid_filtration, superlevel_grid_filtration, GridFunction,
    };
    use crate::geometry::PointCloud;

    fn equilateral() -> PointCloud<f64> {
        let h = 3f64.sqrt() / 2.0;
        PointCloud::from_rows([[0.0, 0.0], [1.0, 0.0], [0.5, h]]).unwrap()
    }

    fn square() -> PointCloud<f64> {
        PointCloud::from_rows([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn triangle_reduction_by_hand() {
        let c = rips_filtration(&equilateral(), 2, 2.0).unwrap();
        let dgms = compute_persistence(&c, &[0, 1]).unwrap();
        let h0 = &dgms[&0];
        assert_eq!(h0.len(), 3);
        let finite: Vec<_> = h0.pairs().iter().filter(|p| !p.essential).collect();
        assert_eq!(finite.len(), 2);
        for p in finite {
            assert_eq!(p.birth, 0.0);
            assert!((p.death - 1.0).abs() < 1e-12);
        }
        assert_eq!(
            h0.pairs()
                .iter()
                .filter(|p| p.essential && p.birth == 0.0)
                .count(),
            1
        );
        let h1 = &dgms[&1];
        assert_eq!(h1.len(), 1);
        assert!(h1.pairs()[0].is_removable());
        assert!(!h1.pairs()[0].essential);
    }

    #[test]
    fn single_vertex() {
        let c = rips_filtration(&PointCloud::new(vec![0.0], 1).unwrap(), 2, 1.0).unwrap();
        let dgms = compute_persistence(&c, &[0, 1]).unwrap();
        assert_eq!(
            dgms[&0].pairs(),
            &[PersistencePair {
                birth: 0.0,
                death: 0.0,
                dim: 0,
                essential: true
            }]
        );
        assert!(dgms[&1].is_empty());
    }

    #[test]
    fn square_loop() {
        let c = rips_filtration(&square(), 2, 2.0).unwrap();
        let h1 = &compute_persistence(&c, &[1]).unwrap()[&1];
        let live: Vec<_> = h1.significant().collect();
        assert_eq!(live.len(), 1);
        assert_eq!(live[0].birth, 1.0);
        assert!((live[0].death - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn essential_clamped_to_extremes() {
        let f = GridFunction::from_values_1d(vec![1.0, 0.0, 1.0]).unwrap();
        let sub = compute_persistence(&sublevel_grid_filtration(&f, 1).unwrap(), &[0]).unwrap();
        let ess: Vec<_> = sub[&0].pairs().iter().filter(|p| p.essential).collect();
        assert_eq!(ess.len(), 1);
        assert_eq!((ess[0].birth, ess[0].death), (0.0, 1.0));

        let sup = compute_persistence(&superlevel_grid_filtration(&f, 1).unwrap(), &[0]).unwrap();
        let d = &sup[&0];
        assert_eq!(d.convention(), Convention::Superlevel);
        // the later peak merges into the earlier one when the valley at 0 enters
        let finite: Vec<_> = d.significant().filter(|p| !p.essential).collect();
        assert_eq!(finite.len(), 1);
        assert_eq!(d.len(), 3);
        assert_eq!((finite[0].birth, finite[0].death), (1.0, 0.0));
        let ess: Vec<_> = d.pairs().iter().filter(|p| p.essential).collect();
        assert_eq!((ess[0].birth, ess[0].death), (1.0, 0.0));
    }

    #[test]
    fn constant_superlevel_single_essential() {
        let f = GridFunction::from_values_1d(vec![2.0; 5]).unwrap();
        let d =
            &compute_persistence(&superlevel_grid_filtration(&f, 1).unwrap(), &[0]).unwrap()[&0];
        assert_eq!(d.pairs().iter().filter(|p| p.essential).count(), 1);
        assert_eq!(d.significant().filter(|p| !p.essential).count(), 0);

        let one = GridFunction::from_values_1d(vec![0.0]).unwrap();
        let d =
            &compute_persistence(&superlevel_grid_filtration(&one, 1).unwrap(), &[0]).unwrap()[&0];
        assert_eq!(d.len(), 1);
        assert!(d.pairs()[0].essential);
    }

    #[test]
    fn oracle_examples() {
        let sq = rips_filtration(&square(), 2, 2.0).unwrap();
        assert_eq!(betti_oracle(&sq, 0.5, 0).unwrap(), 4);
        assert_eq!(betti_oracle(&sq, 1.2, 1).unwrap(), 1);
        assert_eq!(betti_oracle(&sq, 1.2, 0).unwrap(), 1);
        assert_eq!(betti_oracle(&sq, 2.0, 1).unwrap(), 0);

        let tri = rips_filtration(&equilateral(), 2, 2.0).unwrap();
        assert_eq!(betti_oracle(&tri, 0.5, 0).unwrap(), 3);
        assert_eq!(betti_oracle(&tri, 1.5, 0).unwrap(), 1);
        assert_eq!(betti_oracle(&tri, 1.5, 1).unwrap(), 0);
    }

    #[test]
    fn oracle_refuses_large_complex() {
        let pts: Vec<[f64; 1]> = (0..400).map(|i| [i as f64]).collect();
        let c = rips_filtration(&PointCloud::from_rows(pts).unwrap(), 0, 1.0).unwrap();
        assert!(matches!(
            betti_oracle(&c, 0.0, 0),
            Err(TopoError::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn diagram_validation_and_json() {
        assert!(PersistenceDiagram::from_points(0, Convention::Sublevel, &[(2.0, 1.0)]).is_err());
        assert!(PersistenceDiagram::from_points(0, Convention::Superlevel, &[(2.0, 1.0)]).is_ok());
        let d = PersistenceDiagram::from_points(1, Convention::Sublevel, &[(0.0, 2.5), (0.1, 0.3)])
            .unwrap();
        let json = serde_json::to_value(&d).unwrap();
        assert_eq!(
            json["pairs"][0],
            serde_json::json!({"birth": 0.0, "death": 2.5, "essential": false})
        );
        let back: PersistenceDiagram<f64> = serde_json::from_value(json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_unsupported_dims() {
        let c = rips_filtration(&square(), 1, 2.0).unwrap();
        assert!(compute_persistence(&c, &[3]).is_err());
    }
}
