//! Correlation functionals on two-qubit states: exact evaluation for fixed
//! measurements, the operator spectral maximum over states, and a see-saw
//! ascent that also optimizes the measurement axes.

use serde::Serialize;

use crate::algebra::{
    bloch_of, herm_eigen, partial_trace_a, partial_trace_b, tensor, BlochVec, CMat,
};
use crate::bounds::validate_coeffs;
use crate::error::{Error, Result};
use crate::scenario::{Observable, Scenario};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Signed change between consecutive sweep values below which the see-saw
/// stops.
const SEESAW_CONVERGENCE: f64 = 1e-10;
/// Hard cap on see-saw sweeps per restart.
const SEESAW_MAX_SWEEPS: usize = 10_000;
/// Bloch vectors shorter than this give no update direction; the previous
/// axis is kept.
const DIRECTION_TOL: f64 = 1e-14;

/// Value of a correlation functional together with each correlator.
#[derive(Clone, Debug, Serialize)]
pub struct BellValue {
    /// Σ coeffs[x][y] · per_term[x][y].
    pub value: f64,
    /// per_term[x][y] = ⟨A_x ⊗ B_y⟩ on the scenario state.
    pub per_term: Vec<Vec<f64>>,
}

/// Evaluates the scenario's functional on its state: every pairwise
/// correlator is computed as Re tr(ρ·A_x⊗B_y) and contracted with the
/// coefficient matrix.
pub fn evaluate(scenario: &Scenario) -> Result<BellValue> {
    let mut per_term = Vec::with_capacity(scenario.m());
    let mut value = 0.0;
    for (x, alice) in scenario.alice().iter().enumerate() {
        let a = alice.matrix();
        let mut row = Vec::with_capacity(scenario.n());
        for (y, bob) in scenario.bob().iter().enumerate() {
            let ab = tensor(&a, &bob.matrix())?;
            let mut t = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    t += (scenario.state().get(k, l) * ab.get(l, k)).re;
                }
            }
            if t.abs() > 1.0 + 1e-9 {
                return Err(Error::Internal(format!(
                    "correlator ({x},{y}) = {t} left [-1, 1]"
                )));
            }
            value += scenario.coeffs()[x][y] * t;
            row.push(t);
        }
        per_term.push(row);
    }
    Ok(BellValue { value, per_term })
}

/// The functional as a 4x4 operator: Σ coeffs[x][y] · A_x ⊗ B_y.
pub fn bell_operator(scenario: &Scenario) -> Result<CMat> {
    let mut op = CMat::zero(4)?;
    for (x, alice) in scenario.alice().iter().enumerate() {
        let a = alice.matrix();
        for (y, bob) in scenario.bob().iter().enumerate() {
            let term = tensor(&a, &bob.matrix())?;
            op = op.add(&term.scale_re(scenario.coeffs()[x][y]));
        }
    }
    Ok(op)
}

/// Largest functional value over all two-qubit states at the scenario's
/// fixed measurements: the top eigenvalue of the functional operator.
pub fn quantum_max_fixed_measurements(scenario: &Scenario) -> Result<f64> {
    let op = bell_operator(scenario)?;
    let eig = herm_eigen(&op)?;
    Ok(eig.values[3])
}

/// Outcome of a see-saw ascent over measurement axes and the shared state.
#[derive(Clone, Debug, Serialize)]
pub struct SeesawResult {
    /// Best functional value found across all restarts.
    pub value: f64,
    pub alice_axes: Vec<BlochVec>,
    pub bob_axes: Vec<BlochVec>,
    /// The optimizing state (a pure-state projector).
    pub state: CMat,
    /// Sweeps performed in the best restart.
    pub iterations: usize,
    /// Whether the best restart stopped by convergence rather than the sweep
    /// cap.
    pub converged: bool,
    /// Value after the initial eigen-step and after each sweep of the best
    /// restart; non-decreasing up to the convergence tolerance.
    pub history: Vec<f64>,
}

fn random_unit_axis<R: Rng>(rng: &mut R) -> BlochVec {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    BlochVec::new(r * phi.cos(), r * phi.sin(), z)
}

fn sharp_observables(axes: &[BlochVec], prefix: &str) -> Result<Vec<Observable>> {
    axes.iter()
        .enumerate()
        .map(|(i, &ax)| Observable::sharp(ax, format!("{prefix}{}", i + 1)))
        .collect()
}

/// One eigen-step: build the operator for the current axes, take its top
/// eigenpair, and return (value, projector onto the top eigenvector).
fn eigen_step(
    coeffs: &[Vec<f64>],
    alice: &[BlochVec],
    bob: &[BlochVec],
) -> Result<(f64, CMat)> {
    let scenario = Scenario::new(
        sharp_observables(alice, "A")?,
        sharp_observables(bob, "B")?,
        crate::scenario::named_state("maximally_mixed")?,
        coeffs.to_vec(),
        vec![],
    )?;
    let op = bell_operator(&scenario)?;
    let eig = herm_eigen(&op)?;
    Ok((eig.values[3], CMat::outer(&eig.vector(3))?))
}

/// Heuristic global maximum of the functional over two-qubit states and sharp
/// measurement axes on both sides, by alternating closed-form updates:
/// optimal second-party axes for fixed state and first party, then optimal
/// first-party axes, then the top eigenstate of the resulting operator.
/// Deterministic in (`restarts`, `seed`); every update is non-decreasing, so
/// the reported value is a valid lower bound on the true maximum.
pub fn seesaw_max(coeffs: &[Vec<f64>], restarts: usize, seed: u64) -> Result<SeesawResult> {
    let (m, n) = validate_coeffs(coeffs)?;
    if restarts == 0 {
        return Err(Error::Validation("restarts must be at least 1".into()));
    }

    const GOLDEN: u64 = 0x9E3779B97F4A7C15;
    let mut best: Option<SeesawResult> = None;

    for restart in 0..restarts {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ ((restart as u64 + 1).wrapping_mul(GOLDEN)));
        let mut alice: Vec<BlochVec> = (0..m).map(|_| random_unit_axis(&mut rng)).collect();
        let mut bob: Vec<BlochVec> = (0..n).map(|_| random_unit_axis(&mut rng)).collect();

        let (v0, mut state) = eigen_step(coeffs, &alice, &bob)?;
        let mut history = vec![v0];
        let mut converged = false;

        for _sweep in 0..SEESAW_MAX_SWEEPS {
            // Second-party axes: for each y the functional is
            // tr(ρ (K_y ⊗ B_y)) with K_y = Σ_x c_xy A_x, maximized by the
            // Bloch direction of Tr_A[ρ (K_y ⊗ I)].
            for y in 0..n {
                let mut k = CMat::zero(2)?;
                for (x, &ax) in alice.iter().enumerate() {
                    if coeffs[x][y] != 0.0 {
                        k = k.add(
                            &crate::algebra::pauli_from_bloch(&ax, 1.0)?.scale_re(coeffs[x][y]),
                        );
                    }
                }
                let w = partial_trace_a(&state.mul(&tensor(&k, &crate::algebra::identity2())?))?;
                let (_, dir) = bloch_of(&w.hermitized());
                let len = dir.norm();
                if len > DIRECTION_TOL {
                    bob[y] = dir.scale(1.0 / len);
                }
            }
            // First-party axes, symmetrically.
            for x in 0..m {
                let mut l = CMat::zero(2)?;
                for (y, &bx) in bob.iter().enumerate() {
                    if coeffs[x][y] != 0.0 {
                        l = l.add(
                            &crate::algebra::pauli_from_bloch(&bx, 1.0)?.scale_re(coeffs[x][y]),
                        );
                    }
                }
                let w = partial_trace_b(&state.mul(&tensor(&crate::algebra::identity2(), &l)?))?;
                let (_, dir) = bloch_of(&w.hermitized());
                let len = dir.norm();
                if len > DIRECTION_TOL {
                    alice[x] = dir.scale(1.0 / len);
                }
            }
            // State: top eigenstate of the operator at the new axes.
            let (v, new_state) = eigen_step(coeffs, &alice, &bob)?;
            state = new_state;
            let prev = *history.last().expect("seeded history");
            history.push(v);
            if v - prev < SEESAW_CONVERGENCE {
                converged = true;
                break;
            }
        }

        let value = *history.last().expect("seeded history");
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(SeesawResult {
                value,
                alice_axes: alice,
                bob_axes: bob,
                state,
                iterations: history.len() - 1,
                converged,
                history,
            });
        }
    }
    Ok(best.expect("restarts >= 1"))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{builtin_scenario, named_state, smear, Side};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn c(re: f64, im: f64) -> num_complex::Complex64 {
        num_complex::Complex64::new(re, im)
    }

    #[test]
    fn trine_functional_reaches_six_on_its_state() {
        let s = builtin_scenario("trine_delta3").unwrap();
        let bv = evaluate(&s).unwrap();
        assert!((bv.value - 6.0).abs() <= 1e-9, "got {}", bv.value);
        // Correlators: +1 on the diagonal, -1/2 off it.
        for x in 0..3 {
            for y in 0..3 {
                let want = if x == y { 1.0 } else { -0.5 };
                assert!(
                    (bv.per_term[x][y] - want).abs() <= 1e-9,
                    "term ({x},{y}) = {}",
                    bv.per_term[x][y]
                );
            }
        }
        assert!((quantum_max_fixed_measurements(&s).unwrap() - 6.0).abs() <= 1e-9);
    }

    #[test]
    fn elegant_functional_reaches_four_root_three() {
        let s = builtin_scenario("elegant_b3").unwrap();
        let want = 4.0 * SQRT3;
        assert!((evaluate(&s).unwrap().value - want).abs() <= 1e-9);
        assert!((quantum_max_fixed_measurements(&s).unwrap() - want).abs() <= 1e-9);
    }

    #[test]
    fn product_state_with_aligned_axes_gives_coefficient_sum() {
        // |00><00| with every axis σ_z: each correlator is +1, so the value
        // is the plain sum of the trine coefficients.
        let z = crate::algebra::BlochVec::new(0.0, 0.0, 1.0);
        let obs = |p: &str| -> Vec<Observable> {
            (0..3)
                .map(|i| Observable::sharp(z, format!("{p}{}", i + 1)).unwrap())
                .collect()
        };
        let v = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let trine = builtin_scenario("trine_delta3").unwrap();
        let s = Scenario::new(
            obs("A"),
            obs("B"),
            CMat::outer(&v).unwrap(),
            trine.coeffs().to_vec(),
            vec![],
        )
        .unwrap();
        let bv = evaluate(&s).unwrap();
        assert!((bv.value - (-3.0)).abs() <= 1e-9, "got {}", bv.value);
    }

    #[test]
    fn operator_expectation_agrees_with_direct_evaluation() {
        for name in ["trine_delta3", "elegant_b3", "orthogonal_steering"] {
            let s = builtin_scenario(name).unwrap();
            let op = bell_operator(&s).unwrap();
            let mut tr = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    tr += (s.state().get(k, l) * op.get(l, k)).re;
                }
            }
            let direct = evaluate(&s).unwrap().value;
            assert!((tr - direct).abs() <= 1e-9, "{name}: {tr} vs {direct}");
        }
    }

    #[test]
    fn smearing_one_side_scales_the_value_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let axes: Vec<BlochVec> = (0..3).map(|_| random_unit_axis(&mut rng)).collect();
            let baxes: Vec<BlochVec> = (0..3).map(|_| random_unit_axis(&mut rng)).collect();
            let coeffs: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let s = Scenario::new(
                sharp_observables(&axes, "A").unwrap(),
                sharp_observables(&baxes, "B").unwrap(),
                named_state("phi_plus").unwrap(),
                coeffs,
                vec![],
            )
            .unwrap();
            let full = evaluate(&s).unwrap().value;
            let eta = rng.gen_range(0.0..1.0);
            let smeared = smear(&s, Side::Alice, eta).unwrap();
            let v = evaluate(&smeared).unwrap().value;
            assert!(
                (v - eta * full).abs() <= 1e-9,
                "eta {eta}: {v} vs {}",
                eta * full
            );
        }
    }

    #[test]
    fn no_state_beats_the_spectral_maximum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = builtin_scenario("elegant_b3").unwrap();
        let top = quantum_max_fixed_measurements(&s).unwrap();
        for _ in 0..25 {
            let v: Vec<num_complex::Complex64> = (0..4)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let pure = CMat::outer(&v).unwrap();
            let value = evaluate(&s.with_state(pure).unwrap()).unwrap().value;
            assert!(value <= top + 1e-9, "state value {value} beat max {top}");
        }
    }

    #[test]
    fn zero_coefficients_give_the_zero_operator() {
        let trine = builtin_scenario("trine_delta3").unwrap();
        let coeffs = vec![vec![0.0; 3]; 3];
        let s = Scenario::new(
            trine.alice().to_vec(),
            trine.bob().to_vec(),
            trine.state().clone(),
            coeffs,
            vec![],
        )
        .unwrap();
        assert!(bell_operator(&s).unwrap().max_abs() <= 1e-15);
        assert_eq!(evaluate(&s).unwrap().value, 0.0);
    }

    #[test]
    fn seesaw_on_a_single_coefficient_reaches_one() {
        let res = seesaw_max(&[vec![1.0]], 2, 1).unwrap();
        assert!((res.value - 1.0).abs() <= 1e-9, "got {}", res.value);
        assert!(res.converged);
    }

    #[test]
    fn seesaw_recovers_the_trine_maximum() {
        let trine = builtin_scenario("trine_delta3").unwrap();
        let res = seesaw_max(trine.coeffs(), 4, 42).unwrap();
        assert!((res.value - 6.0).abs() <= 1e-6, "got {}", res.value);
        assert!(res.converged);
        assert_eq!(res.alice_axes.len(), 3);
        assert_eq!(res.bob_axes.len(), 3);
        // Each update is an exact maximization, so the recorded history must
        // ascend (up to roundoff).
        for w in res.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "history decreased: {:?}", res.history);
        }
        // Identical call is bit-identical.
        let again = seesaw_max(trine.coeffs(), 4, 42).unwrap();
        assert_eq!(res.value, again.value);
        assert_eq!(res.history, again.history);
    }

    #[test]
    fn seesaw_rejects_zero_restarts() {
        assert!(matches!(
            seesaw_max(&[vec![1.0]], 0, 1),
            Err(Error::Validation(_))
        ));
    }
}
