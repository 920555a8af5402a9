//! Classical bounds for correlation functionals: the local bound by
//! exhaustive deterministic-strategy enumeration, and the relation-
//! constrained bound obtained by slicing the strategy hypercube with the
//! declared functional relations and maximizing over the resulting polytope's
//! vertices.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::combinations;
use crate::scenario::FunctionalRelation;

/// Largest setting count accepted by the exhaustive enumerations.
pub const MAX_SETTINGS: usize = 16;

const PIVOT_TOL: f64 = 1e-12;
const DEDUPE_TOL: f64 = 1e-12;

/// Which strategy set a bound was computed over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundModel {
    /// Deterministic ±1 assignments on both sides.
    Local,
    /// First-party expectations in [−1,1] constrained by every relation;
    /// second party deterministic.
    Pnc,
}

/// A bound value together with the extremal strategy attaining it.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCertificate {
    pub bound: f64,
    pub model: BoundModel,
    /// First-party assignment: entries in {±1} for `Local`, in [−1,1] for
    /// `Pnc`.
    pub alice_assignment: Vec<f64>,
    /// Second-party deterministic assignment.
    pub bob_assignment: Vec<i8>,
    /// Indices of the relations the assignment was constrained by.
    pub active_relations: Vec<usize>,
}

impl BoundCertificate {
    /// Plugs the stored assignments back into a coefficient matrix; equals
    /// `bound` (within 1e-9) when evaluated on the matrix the certificate was
    /// computed from.
    pub fn re_evaluate(&self, coeffs: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for (x, row) in coeffs.iter().enumerate() {
            for (y, &cxy) in row.iter().enumerate() {
                total += cxy * self.alice_assignment[x] * f64::from(self.bob_assignment[y]);
            }
        }
        total
    }
}

pub(crate) fn validate_coeffs(coeffs: &[Vec<f64>]) -> Result<(usize, usize)> {
    let m = coeffs.len();
    if m == 0 {
        return Err(Error::Validation("coefficient matrix is empty".into()));
    }
    let n = coeffs[0].len();
    if n == 0 {
        return Err(Error::Validation("coefficient matrix has empty rows".into()));
    }
    for (x, row) in coeffs.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Validation(format!(
                "coefficient row {x} has {} entries, expected {n}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "coefficient row {x} contains a non-finite entry"
            )));
        }
    }
    if m > MAX_SETTINGS || n > MAX_SETTINGS {
        return Err(Error::Resource(format!(
            "enumeration supports at most {MAX_SETTINGS} settings per side, got {m}x{n}"
        )));
    }
    Ok((m, n))
}

/// For a fixed first-party assignment, the optimal second party responds
/// deterministically with the sign of each column sum (ties to +1); returns
/// the responses and the achieved value.
fn best_bob(coeffs: &[Vec<f64>], n: usize, alice: &[f64]) -> (Vec<i8>, f64) {
    let mut bob = Vec::with_capacity(n);
    let mut value = 0.0;
    for y in 0..n {
        let col: f64 = coeffs
            .iter()
            .zip(alice)
            .map(|(row, &ax)| row[y] * ax)
            .sum();
        let b: i8 = if col >= 0.0 { 1 } else { -1 };
        bob.push(b);
        value += col * f64::from(b);
    }
    (bob, value)
}

/// Exact maximum of Σ coeffs[x][y]·a_x·b_y over deterministic assignments
/// a ∈ {±1}^m, b ∈ {±1}^n. The first party is enumerated exhaustively; the
/// second party's optimal response is taken in closed form. The certificate
/// is the first maximizer in enumeration order (all-+1 first).
pub fn local_bound(coeffs: &[Vec<f64>]) -> Result<BoundCertificate> {
    let (m, n) = validate_coeffs(coeffs)?;
    let mut best: Option<(f64, Vec<f64>, Vec<i8>)> = None;
    for mask in 0u32..(1u32 << m) {
        let alice: Vec<f64> = (0..m)
            .map(|x| if mask & (1 << x) == 0 { 1.0 } else { -1.0 })
            .collect();
        let (bob, value) = best_bob(coeffs, n, &alice);
        if best.as_ref().is_none_or(|(bv, _, _)| value > *bv) {
            best = Some((value, alice, bob));
        }
    }
    let (bound, alice_assignment, bob_assignment) = best.expect("at least one strategy");
    Ok(BoundCertificate {
        bound,
        model: BoundModel::Local,
        alice_assignment,
        bob_assignment,
        active_relations: vec![],
    })
}

/// Vertices of [−1,1]^m sliced by the relation hyperplanes: every point where
/// at least m−r coordinates sit at ±1 and the remaining coordinates solve the
/// relation system, kept iff inside the cube, deduplicated within 1e-12.
///
/// Candidate sub-systems whose chosen free columns are singular are skipped
/// (they do not define a vertex); in particular the relations should be
/// linearly independent. An empty result (no candidate lands inside the
/// cube) is returned as an empty list for the caller to interpret.
pub fn enumerate_vertices(m: usize, relations: &[FunctionalRelation]) -> Result<Vec<Vec<f64>>> {
    if relations.is_empty() {
        return Err(Error::Validation(
            "vertex enumeration needs at least one relation (use the local bound otherwise)"
                .into(),
        ));
    }
    if m > MAX_SETTINGS {
        return Err(Error::Resource(format!(
            "vertex enumeration supports at most {MAX_SETTINGS} coordinates, got {m}"
        )));
    }
    let r = relations.len();
    if r > m {
        return Err(Error::Validation(format!(
            "{r} relations over {m} coordinates leave no free strategy"
        )));
    }
    for (i, rel) in relations.iter().enumerate() {
        if rel.len() != m {
            return Err(Error::Validation(format!(
                "relation {i} has {} coefficients, expected {m}",
                rel.len()
            )));
        }
    }

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for free in combinations(m, r) {
        let fixed: Vec<usize> = (0..m).filter(|j| !free.contains(j)).collect();
        for mask in 0u32..(1u32 << fixed.len()) {
            let mut point = vec![0.0f64; m];
            for (bit, &j) in fixed.iter().enumerate() {
                point[j] = if mask & (1 << bit) == 0 { 1.0 } else { -1.0 };
            }
            // Solve the r×r system over the free coordinates.
            let mut aug: Vec<Vec<f64>> = relations
                .iter()
                .map(|rel| {
                    let c = rel.coeffs();
                    let mut row: Vec<f64> = free.iter().map(|&j| c[j]).collect();
                    row.push(-fixed.iter().map(|&j| c[j] * point[j]).sum::<f64>());
                    row
                })
                .collect();
            let Some(solution) = solve_square(&mut aug, r) else {
                continue;
            };
            let mut inside = true;
            for (&j, &v) in free.iter().zip(&solution) {
                if v.abs() > 1.0 + DEDUPE_TOL {
                    inside = false;
                    break;
                }
                point[j] = v.clamp(-1.0, 1.0);
            }
            if !inside {
                continue;
            }
            let duplicate = vertices.iter().any(|u| {
                u.iter()
                    .zip(&point)
                    .all(|(a, b)| (a - b).abs() <= DEDUPE_TOL)
            });
            if !duplicate {
                vertices.push(point);
            }
        }
    }
    Ok(vertices)
}

/// Gaussian elimination with partial pivoting on an r×(r+1) augmented system;
/// `None` when a pivot is (numerically) zero.
fn solve_square(aug: &mut [Vec<f64>], r: usize) -> Option<Vec<f64>> {
    let scale = aug
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for col in 0..r {
        let best = (col..r).max_by(|&i, &j| {
            aug[i][col]
                .abs()
                .partial_cmp(&aug[j][col].abs())
                .expect("finite entries")
        })?;
        if aug[best][col].abs() <= PIVOT_TOL * scale {
            return None;
        }
        aug.swap(col, best);
        let inv = 1.0 / aug[col][col];
        for v in &mut aug[col][col..=r] {
            *v *= inv;
        }
        let pivot = aug[col].clone();
        for (row, entries) in aug.iter_mut().enumerate() {
            if row != col {
                let f = entries[col];
                if f != 0.0 {
                    for (v, p) in entries[col..=r].iter_mut().zip(&pivot[col..=r]) {
                        *v -= f * p;
                    }
                }
            }
        }
    }
    Some((0..r).map(|i| aug[i][r]).collect())
}

/// Exact maximum of Σ coeffs[x][y]·ā_x·b_y over first-party expectations
/// ā ∈ [−1,1]^m satisfying every relation and deterministic second-party
/// assignments. The maximum over the sliced cube is attained at one of its
/// vertices, and the optimal second party responds with column-sum signs, so
/// both enumerations together are exact.
pub fn pnc_bound(
    coeffs: &[Vec<f64>],
    relations: &[FunctionalRelation],
) -> Result<BoundCertificate> {
    let (m, n) = validate_coeffs(coeffs)?;
    if relations.is_empty() {
        return Err(Error::Validation(
            "the relation-constrained bound needs at least one relation".into(),
        ));
    }
    let vertices = enumerate_vertices(m, relations)?;
    if vertices.is_empty() {
        return Err(Error::Model(
            "the relation system admits no strategy inside the cube".into(),
        ));
    }
    let mut best: Option<(f64, Vec<f64>, Vec<i8>)> = None;
    for vertex in vertices {
        let (bob, value) = best_bob(coeffs, n, &vertex);
        if best.as_ref().is_none_or(|(bv, _, _)| value > *bv) {
            best = Some((value, vertex, bob));
        }
    }
    let (bound, alice_assignment, bob_assignment) = best.expect("nonempty vertex list");
    Ok(BoundCertificate {
        bound,
        model: BoundModel::Pnc,
        alice_assignment,
        bob_assignment,
        active_relations: (0..relations.len()).collect(),
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin_scenario;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(coeffs: &[f64]) -> FunctionalRelation {
        FunctionalRelation::new(coeffs.to_vec()).unwrap()
    }

    /// Brute-force oracle enumerating both parties' strategies.
    fn local_oracle(coeffs: &[Vec<f64>]) -> f64 {
        let m = coeffs.len();
        let n = coeffs[0].len();
        let mut best = f64::NEG_INFINITY;
        for am in 0u32..(1 << m) {
            for bm in 0u32..(1 << n) {
                let mut v = 0.0;
                for (x, row) in coeffs.iter().enumerate() {
                    for (y, &c) in row.iter().enumerate() {
                        let a = if am & (1 << x) == 0 { 1.0 } else { -1.0 };
                        let b = if bm & (1 << y) == 0 { 1.0 } else { -1.0 };
                        v += c * a * b;
                    }
                }
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn chsh_pattern_local_bound_is_two() {
        let coeffs = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let cert = local_bound(&coeffs).unwrap();
        assert_eq!(cert.bound, 2.0);
        assert_eq!(cert.bound, local_oracle(&coeffs));
        assert!((cert.re_evaluate(&coeffs) - cert.bound).abs() <= 1e-12);
        assert!(cert.alice_assignment.iter().all(|a| a.abs() == 1.0));
    }

    #[test]
    fn builtin_local_bounds_match_known_values() {
        let trine = builtin_scenario("trine_delta3").unwrap();
        assert_eq!(local_bound(trine.coeffs()).unwrap().bound, 5.0);
        let elegant = builtin_scenario("elegant_b3").unwrap();
        assert_eq!(local_bound(elegant.coeffs()).unwrap().bound, 6.0);
    }

    #[test]
    fn builtin_pnc_bounds_match_known_values() {
        let trine = builtin_scenario("trine_delta3").unwrap();
        let cert = pnc_bound(trine.coeffs(), trine.relations()).unwrap();
        assert!((cert.bound - 4.0).abs() <= 1e-9, "got {}", cert.bound);
        // The maximizer satisfies the relation.
        let dot: f64 = cert.alice_assignment.iter().sum();
        assert!(dot.abs() <= 1e-9);

        let elegant = builtin_scenario("elegant_b3").unwrap();
        let cert = pnc_bound(elegant.coeffs(), elegant.relations()).unwrap();
        assert!((cert.bound - 4.0).abs() <= 1e-9, "got {}", cert.bound);
        assert!((cert.re_evaluate(elegant.coeffs()) - cert.bound).abs() <= 1e-9);
    }

    #[test]
    fn zero_sum_slice_of_cube_has_six_mixed_vertices() {
        let vertices = enumerate_vertices(3, &[rel(&[1.0, 1.0, 1.0])]).unwrap();
        assert_eq!(vertices.len(), 6);
        for v in &vertices {
            let sum: f64 = v.iter().sum();
            assert!(sum.abs() <= 1e-12);
            // Each vertex is a coordinate permutation of (1, -1, 0).
            let mut sorted = v.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(sorted, vec![-1.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn diagonal_slice_of_square_has_two_vertices() {
        let mut vertices = enumerate_vertices(2, &[rel(&[1.0, -1.0])]).unwrap();
        vertices.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert_eq!(vertices, vec![vec![-1.0, -1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn sum_rule_slice_keeps_only_balanced_corners() {
        // a1 = a2 + a3 + a4 admits exactly the ±1 corners with one opposing
        // coordinate.
        let vertices = enumerate_vertices(4, &[rel(&[1.0, -1.0, -1.0, -1.0])]).unwrap();
        assert_eq!(vertices.len(), 6);
        for v in &vertices {
            assert!(v.iter().all(|x| x.abs() == 1.0), "non-corner vertex {v:?}");
            assert!((v[0] - v[1] - v[2] - v[3]).abs() <= 1e-12);
        }
    }

    #[test]
    fn empty_relation_list_is_a_contract_violation() {
        assert!(matches!(
            enumerate_vertices(3, &[]),
            Err(Error::Validation(_))
        ));
        let coeffs = vec![vec![1.0]];
        assert!(matches!(pnc_bound(&coeffs, &[]), Err(Error::Validation(_))));
    }

    #[test]
    fn dummy_observable_relation_leaves_local_bound() {
        // Trine coefficients padded with a zero-coefficient fourth observable
        // tied to the third: the constrained bound equals the local bound 5.
        let trine = builtin_scenario("trine_delta3").unwrap();
        let mut coeffs = trine.coeffs().to_vec();
        coeffs.push(vec![0.0, 0.0, 0.0]);
        let cert = pnc_bound(&coeffs, &[rel(&[0.0, 0.0, 1.0, -1.0])]).unwrap();
        assert!((cert.bound - 5.0).abs() <= 1e-9, "got {}", cert.bound);
    }

    #[test]
    fn constrained_bound_never_exceeds_local_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let m = rng.gen_range(3..=4);
            let n = rng.gen_range(2..=3);
            let coeffs: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let mut c: Vec<f64> = (0..m).map(|_| [-1.0, 1.0][rng.gen_range(0..2)]).collect();
            c[0] = 1.0;
            let local = local_bound(&coeffs).unwrap().bound;
            let pnc = pnc_bound(&coeffs, &[rel(&c)]).unwrap().bound;
            assert!(
                pnc <= local + 1e-9,
                "constrained {pnc} exceeded local {local}"
            );
        }
    }

    #[test]
    fn local_bound_invariant_under_row_and_column_negation() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let coeffs: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let base = local_bound(&coeffs).unwrap().bound;
        let mut row_neg = coeffs.clone();
        for v in &mut row_neg[1] {
            *v = -*v;
        }
        assert!((local_bound(&row_neg).unwrap().bound - base).abs() <= 1e-12);
        let mut col_neg = coeffs.clone();
        for row in &mut col_neg {
            row[2] = -row[2];
        }
        assert!((local_bound(&col_neg).unwrap().bound - base).abs() <= 1e-12);
    }

    #[test]
    fn size_limits_are_resource_errors() {
        let coeffs = vec![vec![1.0; 17]; 2];
        assert!(matches!(local_bound(&coeffs), Err(Error::Resource(_))));
        let big = vec![vec![1.0; 2]; 17];
        assert!(matches!(local_bound(&big), Err(Error::Resource(_))));
        assert!(matches!(
            enumerate_vertices(17, &[rel(&[1.0; 17])]),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn more_relations_than_coordinates_is_rejected() {
        let rels = vec![rel(&[1.0, 1.0]), rel(&[1.0, -1.0]), rel(&[1.0, 0.5])];
        assert!(matches!(
            enumerate_vertices(2, &rels),
            Err(Error::Validation(_))
        ));
    }
}
