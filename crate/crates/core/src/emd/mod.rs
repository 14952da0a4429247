//! Earth Mover's distance between bags of vectors.
//!
//! For two bags of the same size `N` the transport polytope is the set of
//! doubly stochastic matrices scaled by `1/N`, whose vertices are
//! permutation matrices. The optimum is therefore attained by a
//! permutation and [`emd_equal`] solves it exactly as an assignment
//! problem. Unequal sizes are reduced to that case by replicating every
//! element of each bag up to `lcm(|X|, |Y|)`.

mod assignment;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::vecspace::{MetricKind, Vector};

pub(crate) use assignment::min_cost_assignment;

/// Largest bag accepted by [`emd_bruteforce`].
pub const BRUTE_FORCE_MAX: usize = 8;

/// Default cap on the lcm expansion in [`emd_general`].
pub const DEFAULT_EXPANSION_CAP: usize = 10_000;

/// A nonempty multiset of same-dimension vectors. Each stored element
/// carries multiplicity one; repeated elements are stored repeatedly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VecBag {
    elements: Vec<Vector>,
}

impl VecBag {
    pub fn new(elements: Vec<Vector>) -> Result<Self> {
        let first = elements.first().ok_or(Error::EmptyBag)?;
        let dim = first.dim();
        if let Some(bad) = elements.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.dim(),
            });
        }
        Ok(Self { elements })
    }

    /// Convenience constructor from raw rows.
    pub fn from_rows<I, R>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: Into<Vec<f64>>,
    {
        let elements = rows
            .into_iter()
            .map(|r| Vector::new(r.into()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn elements(&self) -> &[Vector] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<Vector> {
        self.elements
    }
}

/// Flow matrix `F` (rows index the first bag, columns the second) and its cost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportPlan {
    pub flows: Vec<Vec<f64>>,
    pub cost: f64,
}

impl TransportPlan {
    /// Checks the marginal constraints (every row sums to `1/|X|`, every
    /// column to `1/|Y|`), nonnegativity, and that `cost` equals the
    /// plan's objective under `distances`.
    pub fn validate(&self, distances: &[Vec<f64>], tol: f64) -> std::result::Result<(), String> {
        let rows = self.flows.len();
        let cols = self.flows.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err("empty plan".into());
        }
        for (i, row) in self.flows.iter().enumerate() {
            if row.len() != cols {
                return Err(format!("row {i} has {} columns, expected {cols}", row.len()));
            }
            if let Some(f) = row.iter().find(|f| **f < -tol) {
                return Err(format!("negative flow {f} in row {i}"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0 / rows as f64).abs() > tol {
                return Err(format!("row {i} sums to {sum}, expected {}", 1.0 / rows as f64));
            }
        }
        for j in 0..cols {
            let sum: f64 = self.flows.iter().map(|r| r[j]).sum();
            if (sum - 1.0 / cols as f64).abs() > tol {
                return Err(format!("column {j} sums to {sum}, expected {}", 1.0 / cols as f64));
            }
        }
        let objective: f64 = self
            .flows
            .iter()
            .zip(distances)
            .flat_map(|(fr, dr)| fr.iter().zip(dr).map(|(f, d)| f * d))
            .sum();
        if (objective - self.cost).abs() > tol * (1.0 + objective.abs()) {
            return Err(format!("cost {} differs from objective {objective}", self.cost));
        }
        Ok(())
    }
}

fn check_same_dim(a: &VecBag, b: &VecBag) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(())
}

/// Dense pairwise ground-distance matrix, rows parallelized.
pub fn distance_matrix(a: &VecBag, b: &VecBag, metric: MetricKind) -> Result<Vec<Vec<f64>>> {
    check_same_dim(a, b)?;
    Ok(a.elements
        .par_iter()
        .map(|x| {
            b.elements
                .iter()
                .map(|y| metric.distance_slices(x.as_slice(), y.as_slice()))
                .collect()
        })
        .collect())
}

/// Exact EMD between bags of equal size `N`, with a permutation-form plan
/// whose entries are all `0` or `1/N`.
pub fn emd_equal(b1: &VecBag, b2: &VecBag, metric: MetricKind) -> Result<(f64, TransportPlan)> {
    if b1.size() != b2.size() {
        return Err(Error::SizeMismatch {
            left: b1.size(),
            right: b2.size(),
        });
    }
    let distances = distance_matrix(b1, b2, metric)?;
    let n = b1.size();
    let flat: Vec<f64> = distances.iter().flatten().copied().collect();
    let assignment = min_cost_assignment(&flat, n);

    let share = 1.0 / n as f64;
    let mut flows = vec![vec![0.0; n]; n];
    let mut total = 0.0;
    for (i, &j) in assignment.iter().enumerate() {
        flows[i][j] = share;
        total += distances[i][j];
    }
    let cost = total / n as f64;
    let plan = TransportPlan { flows, cost };
    debug_assert_eq!(plan.validate(&distances, 1e-9), Ok(()));
    Ok((cost, plan))
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact EMD for bags of any sizes, with the default expansion cap.
pub fn emd_general(b1: &VecBag, b2: &VecBag, metric: MetricKind) -> Result<(f64, TransportPlan)> {
    emd_general_capped(b1, b2, metric, DEFAULT_EXPANSION_CAP)
}

/// Exact EMD for bags of any sizes. Both bags are replicated to
/// `lcm(|X|, |Y|)` elements, solved as an assignment, and the flows are
/// folded back onto the original `|X| × |Y|` plan.
pub fn emd_general_capped(b1: &VecBag, b2: &VecBag, metric: MetricKind, cap: usize) -> Result<(f64, TransportPlan)> {
    check_same_dim(b1, b2)?;
    let (k, l) = (b1.size(), b2.size());
    let lcm = (k / gcd(k, l)).checked_mul(l).ok_or(Error::ExpansionTooLarge {
        required: usize::MAX,
        cap,
    })?;
    if lcm > cap {
        return Err(Error::ExpansionTooLarge { required: lcm, cap });
    }
    let distances = distance_matrix(b1, b2, metric)?;
    let (rep1, rep2) = (lcm / k, lcm / l);
    // expanded index e corresponds to original element e / rep
    let flat: Vec<f64> = (0..lcm)
        .flat_map(|r| {
            let row = &distances[r / rep1];
            (0..lcm).map(move |c| row[c / rep2])
        })
        .collect();
    let assignment = min_cost_assignment(&flat, lcm);

    let share = 1.0 / lcm as f64;
    let mut flows = vec![vec![0.0; l]; k];
    let mut total = 0.0;
    for (r, &c) in assignment.iter().enumerate() {
        flows[r / rep1][c / rep2] += share;
        total += distances[r / rep1][c / rep2];
    }
    let cost = total / lcm as f64;
    let plan = TransportPlan { flows, cost };
    debug_assert_eq!(plan.validate(&distances, 1e-9), Ok(()));
    Ok((cost, plan))
}

/// Minimum over all `N!` matchings of the mean matched distance.
/// Exists as an independent check on [`emd_equal`].
pub fn emd_bruteforce(b1: &VecBag, b2: &VecBag, metric: MetricKind) -> Result<f64> {
    if b1.size() != b2.size() {
        return Err(Error::SizeMismatch {
            left: b1.size(),
            right: b2.size(),
        });
    }
    let n = b1.size();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::BruteForceTooLarge {
            size: n,
            max: BRUTE_FORCE_MAX,
        });
    }
    let d = distance_matrix(b1, b2, metric)?;
    let score = |perm: &[usize]| perm.iter().enumerate().map(|(i, &j)| d[i][j]).sum::<f64>();

    // Heap's algorithm, iterative form.
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = score(&perm);
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            best = best.min(score(&perm));
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(best / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bag1d(xs: &[f64]) -> VecBag {
        VecBag::from_rows(xs.iter().map(|&x| vec![x])).unwrap()
    }

    #[test]
    fn vecbag_validation() {
        assert!(matches!(VecBag::new(vec![]), Err(Error::EmptyBag)));
        assert!(matches!(
            VecBag::from_rows([vec![1.0], vec![1.0, 2.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn self_distance_is_zero_with_identity_plan() {
        let b = VecBag::from_rows([vec![0.0, 1.0], vec![3.0, -2.0], vec![5.0, 5.0]]).unwrap();
        let (d, plan) = emd_equal(&b, &b, MetricKind::Euclidean).unwrap();
        assert_eq!(d, 0.0);
        for (i, row) in plan.flows.iter().enumerate() {
            assert!((row[i] - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(emd_bruteforce(&b, &b, MetricKind::Euclidean).unwrap(), 0.0);
    }

    #[test]
    fn one_dimensional_examples() {
        let (d, plan) = emd_equal(&bag1d(&[0.0, 1.0]), &bag1d(&[2.0, 3.0]), MetricKind::Euclidean).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
        assert_eq!(plan.flows, vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
        let bf = emd_bruteforce(&bag1d(&[0.0, 1.0]), &bag1d(&[2.0, 3.0]), MetricKind::Euclidean).unwrap();
        assert!((bf - 2.0).abs() < 1e-12);

        let (d, plan) = emd_general(&bag1d(&[0.0]), &bag1d(&[1.0, 3.0]), MetricKind::Euclidean).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
        assert_eq!(plan.flows, vec![vec![0.5, 0.5]]);
        let (d, _) = emd_general(&bag1d(&[0.0, 0.0]), &bag1d(&[4.0]), MetricKind::Euclidean).unwrap();
        assert!((d - 4.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let e = emd_equal(&bag1d(&[0.0]), &bag1d(&[1.0, 2.0]), MetricKind::Euclidean).unwrap_err();
        assert!(e.to_string().contains("emd_general"));
        let wide = VecBag::from_rows([vec![0.0, 0.0]]).unwrap();
        assert!(emd_general(&bag1d(&[0.0]), &wide, MetricKind::Euclidean).is_err());
        let nine: Vec<f64> = (0..9).map(f64::from).collect();
        assert!(matches!(
            emd_bruteforce(&bag1d(&nine), &bag1d(&nine), MetricKind::Euclidean),
            Err(Error::BruteForceTooLarge { size: 9, .. })
        ));
        // lcm(101, 103) = 10403 > default cap
        let a: Vec<f64> = (0..101).map(f64::from).collect();
        let b: Vec<f64> = (0..103).map(f64::from).collect();
        assert!(matches!(
            emd_general(&bag1d(&a), &bag1d(&b), MetricKind::Euclidean),
            Err(Error::ExpansionTooLarge {
                required: 10403,
                cap: 10_000
            })
        ));
        assert!(emd_general_capped(&bag1d(&[0.0, 1.0]), &bag1d(&[0.0, 1.0, 2.0]), MetricKind::Euclidean, 5).is_err());
    }

    #[test]
    fn general_plan_satisfies_marginals() {
        let a = VecBag::from_rows([vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let b = VecBag::from_rows([
            vec![0.5, 0.5],
            vec![2.0, 0.0],
            vec![-1.0, 1.0],
            vec![0.0, 0.0],
            vec![3.0, 3.0],
            vec![1.0, -1.0],
        ])
        .unwrap();
        let (d, plan) = emd_general(&a, &b, MetricKind::Euclidean).unwrap();
        assert_eq!(plan.flows.len(), 4);
        assert_eq!(plan.flows[0].len(), 6);
        let dm = distance_matrix(&a, &b, MetricKind::Euclidean).unwrap();
        plan.validate(&dm, 1e-9).unwrap();
        assert!((plan.cost - d).abs() < 1e-12);
    }

    fn bag_pair(max_n: usize, max_dim: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        (1..=max_n, 1..=max_dim).prop_flat_map(|(n, dim)| {
            let rows = proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, dim), n);
            (rows.clone(), rows)
        })
    }

    proptest! {
        #[test]
        fn assignment_matches_bruteforce((a, b) in bag_pair(6, 3)) {
            let (a, b) = (VecBag::from_rows(a).unwrap(), VecBag::from_rows(b).unwrap());
            for metric in [MetricKind::Euclidean, MetricKind::Manhattan] {
                let (fast, plan) = emd_equal(&a, &b, metric).unwrap();
                let slow = emd_bruteforce(&a, &b, metric).unwrap();
                prop_assert!((fast - slow).abs() < 1e-9);
                let dm = distance_matrix(&a, &b, metric).unwrap();
                prop_assert_eq!(plan.validate(&dm, 1e-9), Ok(()));
            }
        }

        #[test]
        fn general_agrees_with_equal_on_equal_sizes((a, b) in bag_pair(7, 3)) {
            let (a, b) = (VecBag::from_rows(a).unwrap(), VecBag::from_rows(b).unwrap());
            let (e, _) = emd_equal(&a, &b, MetricKind::Euclidean).unwrap();
            let (g, _) = emd_general(&a, &b, MetricKind::Euclidean).unwrap();
            prop_assert!((e - g).abs() < 1e-9);
        }

        #[test]
        fn manhattan_emd_dominates_euclidean_emd((a, b) in bag_pair(6, 3)) {
            let (a, b) = (VecBag::from_rows(a).unwrap(), VecBag::from_rows(b).unwrap());
            let (eu, _) = emd_equal(&a, &b, MetricKind::Euclidean).unwrap();
            let (mh, _) = emd_equal(&a, &b, MetricKind::Manhattan).unwrap();
            prop_assert!(mh + 1e-9 >= eu);
        }

        #[test]
        fn pseudometric_on_equal_size_bags(
            (n, dim) in (1usize..6, 1usize..4),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut bag = || VecBag::from_rows(
                (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>())
            ).unwrap();
            let (x, y, z) = (bag(), bag(), bag());
            let e = |p: &VecBag, q: &VecBag| emd_equal(p, q, MetricKind::Euclidean).unwrap().0;
            prop_assert!((e(&x, &y) - e(&y, &x)).abs() < 1e-9);
            prop_assert!(e(&x, &y) <= e(&x, &z) + e(&z, &y) + 1e-9);
        }
    }
}
