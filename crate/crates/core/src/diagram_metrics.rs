//! Bottleneck distance between persistence diagrams and its integral over
//! scale-indexed families of diagrams (vineyards).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TopoError};
use crate::filtration::Convention;
use crate::persistence::PersistenceDiagram;
use crate::scalar::{unit_integral, Scalar};

/// Combined point budget of [`bottleneck_bruteforce`].
pub const BRUTEFORCE_MAX_POINTS: usize = 6;

fn linf<T: Scalar>(a: (T, T), b: (T, T)) -> T {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// L-infinity distance from a point to the diagonal.
fn to_diagonal<T: Scalar>(p: (T, T)) -> T {
    (p.1 - p.0).abs() / T::lit(2.0)
}

fn check_compatible<T: Scalar>(a: &PersistenceDiagram<T>, b: &PersistenceDiagram<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(TopoError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.convention() != b.convention() {
        return Err(invalid(format!(
            "cannot compare {:?} and {:?} diagrams",
            a.convention(),
            b.convention()
        )));
    }
    Ok(())
}

/// Points of both diagrams in sublevel coordinates with zero-persistence
/// points dropped (they sit on the diagonal and match it at no cost).
fn offdiagonal<T: Scalar>(d: &PersistenceDiagram<T>) -> Vec<(T, T)> {
    d.sublevel_points()
        .into_iter()
        .filter(|p| p.0 != p.1)
        .collect()
}

/// Bipartite graph of the augmented problem: left = A + diagonal copies of B,
/// right = B + diagonal copies of A.
struct Augmented<T> {
    a: Vec<(T, T)>,
    b: Vec<(T, T)>,
}

impl<T: Scalar> Augmented<T> {
    fn size(&self) -> usize {
        self.a.len() + self.b.len()
    }

    /// Cost of matching left vertex `l` to right vertex `r`, if allowed.
    fn cost(&self, l: usize, r: usize) -> Option<T> {
        let (n, m) = (self.a.len(), self.b.len());
        match (l < n, r < m) {
            (true, true) => Some(linf(self.a[l], self.b[r])),
            (true, false) => (r - m == l).then(|| to_diagonal(self.a[l])),
            (false, true) => (l - n == r).then(|| to_diagonal(self.b[r])),
            (false, false) => Some(T::zero()),
        }
    }

    fn candidates(&self) -> Vec<T> {
        let mut c: Vec<T> = self
            .a
            .iter()
            .flat_map(|&p| self.b.iter().map(move |&q| linf(p, q)))
            .chain(self.a.iter().chain(&self.b).map(|&p| to_diagonal(p)))
            .chain([T::zero()])
            .collect();
        c.sort_by(|x, y| x.partial_cmp(y).expect("finite costs"));
        c.dedup();
        c
    }

    fn has_perfect_matching(&self, threshold: T) -> bool {
        let size = self.size();
        let adjacency: Vec<Vec<usize>> = (0..size)
            .map(|l| {
                (0..size)
                    .filter(|&r| self.cost(l, r).is_some_and(|c| c <= threshold))
                    .collect()
            })
            .collect();
        hopcroft_karp(&adjacency, size) == size
    }
}

/// Maximum matching size in a bipartite graph given by left adjacency lists.
fn hopcroft_karp(adjacency: &[Vec<usize>], right_size: usize) -> usize {
    const FREE: usize = usize::MAX;
    let left_size = adjacency.len();
    let mut match_left = vec![FREE; left_size];
    let mut match_right = vec![FREE; right_size];
    let mut layer = vec![0usize; left_size];
    let mut matched = 0;

    loop {
        // BFS layering from free left vertices.
        let mut queue = VecDeque::new();
        for l in 0..left_size {
            if match_left[l] == FREE {
                layer[l] = 0;
                queue.push_back(l);
            } else {
                layer[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adjacency[l] {
                match match_right[r] {
                    FREE => found = true,
                    next if layer[next] == usize::MAX => {
                        layer[next] = layer[l] + 1;
                        queue.push_back(next);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return matched;
        }
        for l in 0..left_size {
            if match_left[l] == FREE
                && augment(l, adjacency, &mut match_left, &mut match_right, &mut layer)
            {
                matched += 1;
            }
        }
    }
}

fn augment(
    l: usize,
    adjacency: &[Vec<usize>],
    match_left: &mut [usize],
    match_right: &mut [usize],
    layer: &mut [usize],
) -> bool {
    for &r in &adjacency[l] {
        let next = match_right[r];
        let ok = next == usize::MAX
            || (layer[next] == layer[l] + 1
                && augment(next, adjacency, match_left, match_right, layer));
        if ok {
            match_left[l] = r;
            match_right[r] = l;
            return true;
        }
    }
    layer[l] = usize::MAX;
    false
}

/// Exact bottleneck distance.
///
/// Binary search over every cost that can occur in an optimal bijection,
/// testing each threshold for a perfect matching with Hopcroft–Karp.
/// Superlevel diagrams are negated into sublevel coordinates first.
pub fn bottleneck<T: Scalar>(a: &PersistenceDiagram<T>, b: &PersistenceDiagram<T>) -> Result<T> {
    check_compatible(a, b)?;
    let problem = Augmented {
        a: offdiagonal(a),
        b: offdiagonal(b),
    };
    let candidates = problem.candidates();
    // The largest candidate always admits a perfect matching (everything to the diagonal).
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if problem.has_perfect_matching(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidates[lo])
}

/// Bottleneck distance by exhaustive enumeration of partial matchings: each
/// point of `a` goes either to an unused point of `b` or to the diagonal, and
/// every leftover point of `b` goes to the diagonal.
///
/// Test oracle; refuses inputs with more than [`BRUTEFORCE_MAX_POINTS`] points.
pub fn bottleneck_bruteforce<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
) -> Result<T> {
    check_compatible(a, b)?;
    let size = a.len() + b.len();
    if size > BRUTEFORCE_MAX_POINTS {
        return Err(TopoError::OracleTooLarge {
            size,
            limit: BRUTEFORCE_MAX_POINTS,
        });
    }
    let (pa, pb) = (a.sublevel_points(), b.sublevel_points());
    let mut used = vec![false; pb.len()];
    Ok(enumerate(&pa, &pb, 0, &mut used, T::zero()))
}

fn enumerate<T: Scalar>(a: &[(T, T)], b: &[(T, T)], i: usize, used: &mut [bool], acc: T) -> T {
    if i == a.len() {
        return b
            .iter()
            .zip(used.iter())
            .filter(|(_, &u)| !u)
            .fold(acc, |m, (&q, _)| m.max(to_diagonal(q)));
    }
    let mut best = enumerate(a, b, i + 1, used, acc.max(to_diagonal(a[i])));
    for j in 0..b.len() {
        if !used[j] {
            used[j] = true;
            best = best.min(enumerate(a, b, i + 1, used, acc.max(linf(a[i], b[j]))));
            used[j] = false;
        }
    }
    best
}

/// Diagrams indexed by an increasing scale parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VineyardRepr<T>", into = "VineyardRepr<T>")]
#[serde(bound = "")]
pub struct Vineyard<T: Scalar> {
    sigma: Vec<T>,
    diagrams: Vec<PersistenceDiagram<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct VineyardRepr<T: Scalar> {
    dim: usize,
    convention: Convention,
    sigma: Vec<T>,
    diagrams: Vec<PersistenceDiagram<T>>,
}

impl<T: Scalar> From<Vineyard<T>> for VineyardRepr<T> {
    fn from(v: Vineyard<T>) -> Self {
        VineyardRepr {
            dim: v.dim(),
            convention: v.convention(),
            sigma: v.sigma,
            diagrams: v.diagrams,
        }
    }
}

impl<T: Scalar> TryFrom<VineyardRepr<T>> for Vineyard<T> {
    type Error = TopoError;

    fn try_from(r: VineyardRepr<T>) -> Result<Self> {
        let v = Vineyard::new(r.sigma.into_iter().zip(r.diagrams).collect())?;
        if v.dim() != r.dim || v.convention() != r.convention {
            return Err(invalid("vineyard header disagrees with its diagrams"));
        }
        Ok(v)
    }
}

impl<T: Scalar> Vineyard<T> {
    pub fn new(slices: Vec<(T, PersistenceDiagram<T>)>) -> Result<Self> {
        if slices.is_empty() {
            return Err(invalid("a vineyard needs at least one slice"));
        }
        if slices.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(invalid("vineyard scales must be strictly increasing"));
        }
        if slices.iter().any(|(s, _)| !s.is_finite()) {
            return Err(invalid("vineyard scales must be finite"));
        }
        let (dim, convention) = (slices[0].1.dim(), slices[0].1.convention());
        if let Some((_, d)) = slices
            .iter()
            .find(|(_, d)| d.dim() != dim || d.convention() != convention)
        {
            return Err(invalid(format!(
                "vineyard mixes diagrams (dim {dim}, {convention:?}) and (dim {}, {:?})",
                d.dim(),
                d.convention()
            )));
        }
        let (sigma, diagrams) = slices.into_iter().unzip();
        Ok(Self { sigma, diagrams })
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn diagrams(&self) -> &[PersistenceDiagram<T>] {
        &self.diagrams
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.diagrams[0].dim()
    }

    pub fn convention(&self) -> Convention {
        self.diagrams[0].convention()
    }

    pub fn slices(&self) -> impl Iterator<Item = (T, &PersistenceDiagram<T>)> + '_ {
        self.sigma.iter().copied().zip(&self.diagrams)
    }
}

/// Trapezoid approximation of the scale integral of the bottleneck distance.
///
/// Both vineyards are restricted to the scale values they share; the shared
/// grid is rescaled onto `[0, 1]` before integrating.
pub fn integrated_bottleneck<T: Scalar>(a: &Vineyard<T>, b: &Vineyard<T>) -> Result<T> {
    let mut sigma = Vec::new();
    let mut distances = Vec::new();
    for (s, da) in a.slices() {
        if let Some(pos) = b.sigma.iter().position(|&t| t == s) {
            sigma.push(s);
            distances.push(bottleneck(da, &b.diagrams[pos])?);
        }
    }
    if sigma.is_empty() {
        return Err(TopoError::GridMismatch(
            "vineyards share no scale values".into(),
        ));
    }
    Ok(unit_integral(&sigma, &distances))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dgm(points: &[(f64, f64)]) -> PersistenceDiagram<f64> {
        PersistenceDiagram::from_points(0, Convention::Sublevel, points).unwrap()
    }

    #[test]
    fn bottleneck_examples() {
        let d = dgm(&[(0.0, 2.0), (1.0, 1.5)]);
        assert_eq!(bottleneck(&d, &d).unwrap(), 0.0);
        assert_eq!(bottleneck(&dgm(&[(0.0, 2.0)]), &dgm(&[])).unwrap(), 1.0);
        assert_eq!(
            bottleneck(&dgm(&[(0.0, 2.0)]), &dgm(&[(0.0, 2.5)])).unwrap(),
            0.5
        );
        assert_eq!(bottleneck(&dgm(&[]), &dgm(&[])).unwrap(), 0.0);
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(bottleneck_bruteforce(&dgm(&[]), &dgm(&[])).unwrap(), 0.0);
        assert_eq!(
            bottleneck_bruteforce(&dgm(&[(0.0, 1.0)]), &dgm(&[(0.0, 1.0), (0.0, 1.0)])).unwrap(),
            0.5
        );
        assert_eq!(
            bottleneck_bruteforce(&dgm(&[(0.0, 2.0)]), &dgm(&[(0.0, 2.5)])).unwrap(),
            0.5
        );
        let big = dgm(&[(0.0, 1.0); 4]);
        assert!(matches!(
            bottleneck_bruteforce(&big, &big),
            Err(TopoError::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn duplicate_goes_to_diagonal() {
        assert_eq!(
            bottleneck(&dgm(&[(0.0, 1.0)]), &dgm(&[(0.0, 1.0), (0.0, 1.0)])).unwrap(),
            0.5
        );
    }

    #[test]
    fn superlevel_matches_negated_sublevel() {
        let sup =
            PersistenceDiagram::from_points(0, Convention::Superlevel, &[(3.0, 1.0), (2.0, 1.5)])
                .unwrap();
        let sup2 =
            PersistenceDiagram::from_points(0, Convention::Superlevel, &[(2.5, 1.0)]).unwrap();
        let sub = dgm(&[(-3.0, -1.0), (-2.0, -1.5)]);
        let sub2 = dgm(&[(-2.5, -1.0)]);
        assert_eq!(
            bottleneck(&sup, &sup2).unwrap(),
            bottleneck(&sub, &sub2).unwrap()
        );
        assert!(bottleneck(&sup, &sub).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let a = dgm(&[]);
        let b = PersistenceDiagram::<f64>::empty(1, Convention::Sublevel);
        assert!(matches!(
            bottleneck(&a, &b),
            Err(TopoError::DimensionMismatch { .. })
        ));
    }

    fn vineyard(sigma: &[f64], deaths: &[f64]) -> Vineyard<f64> {
        Vineyard::new(
            sigma
                .iter()
                .zip(deaths)
                .map(|(&s, &d)| (s, dgm(&[(0.0, d)])))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn integrated_examples() {
        let s = [0.0, 0.5, 1.0];
        let a = vineyard(&s, &[2.0, 2.0, 2.0]);
        assert_eq!(integrated_bottleneck(&a, &a).unwrap(), 0.0);
        // constant slice distance 0.7
        let b = vineyard(&s, &[2.7, 2.7, 2.7]);
        assert!((integrated_bottleneck(&a, &b).unwrap() - 0.7).abs() < 1e-12);
        // slice distances (0, 1, 0)
        let c = vineyard(&s, &[2.0, 3.0, 2.0]);
        assert!((integrated_bottleneck(&a, &c).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn integrated_restricts_to_shared_grid() {
        let a = vineyard(&[0.0, 0.25, 0.5, 1.0], &[2.0, 9.0, 2.0, 2.0]);
        let b = vineyard(&[0.0, 0.5, 1.0], &[2.0, 3.0, 2.0]);
        assert!((integrated_bottleneck(&a, &b).unwrap() - 0.5).abs() < 1e-12);
        let c = vineyard(&[0.1, 0.2], &[2.0, 2.0]);
        assert!(matches!(
            integrated_bottleneck(&a, &c),
            Err(TopoError::GridMismatch(_))
        ));
    }

    #[test]
    fn vineyard_invariants() {
        assert!(Vineyard::<f64>::new(vec![]).is_err());
        assert!(Vineyard::new(vec![(0.5, dgm(&[])), (0.5, dgm(&[]))]).is_err());
        let mixed = vec![
            (0.0, dgm(&[])),
            (
                1.0,
                PersistenceDiagram::<f64>::empty(1, Convention::Sublevel),
            ),
        ];
        assert!(Vineyard::new(mixed).is_err());
    }
}
