//! Measurement scenarios: dichotomic qubit observables with a sharpness
//! parameter, linear functional relations among one party's observables,
//! two-party scenarios with a shared state and Bell coefficient matrix, and
//! the built-in families used throughout the reports.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::algebra::{
    herm_eigen, identity2, pauli_from_bloch, BlochVec, CMat, ALGEBRA_TOL, SYM_TOL,
};
use crate::error::{Error, Result};

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    Complex64::new(re, im)
}

/// Which party a smearing operation targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// A dichotomic qubit measurement: outcomes ±1, Bloch axis `n`, sharpness
/// `eta`. The observable operator is η·(n·σ); its two POVM elements are
/// (I ± η n·σ)/2. η = 1 is the sharp (projective) case.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    axis: BlochVec,
    eta: f64,
    label: String,
}

impl Observable {
    pub fn new(axis: BlochVec, eta: f64, label: impl Into<String>) -> Result<Self> {
        let axis = BlochVec::unit(axis.x, axis.y, axis.z)?;
        if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
            return Err(Error::Validation(format!(
                "sharpness eta must lie in [0, 1], got {eta}"
            )));
        }
        Ok(Observable {
            axis,
            eta,
            label: label.into(),
        })
    }

    /// Sharp observable (η = 1).
    pub fn sharp(axis: BlochVec, label: impl Into<String>) -> Result<Self> {
        Observable::new(axis, 1.0, label)
    }

    pub fn axis(&self) -> BlochVec {
        self.axis
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_sharp(&self) -> bool {
        (self.eta - 1.0).abs() <= SYM_TOL
    }

    /// Copy with the sharpness replaced. Keeps the stored axis bit-for-bit
    /// (no renormalization), so setting eta to its current value is the
    /// identity.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
            return Err(Error::Validation(format!(
                "sharpness eta must lie in [0, 1], got {eta}"
            )));
        }
        Ok(Observable {
            axis: self.axis,
            eta,
            label: self.label.clone(),
        })
    }

    /// The observable operator η·(n·σ).
    pub fn matrix(&self) -> CMat {
        pauli_from_bloch(&self.axis, self.eta).expect("validated at construction")
    }

    /// POVM element (I + a·η n·σ)/2 for outcome a ∈ {+1, −1}.
    pub fn povm_element(&self, outcome: i8) -> Result<CMat> {
        if outcome != 1 && outcome != -1 {
            return Err(Error::Validation(format!(
                "outcome must be +1 or -1, got {outcome}"
            )));
        }
        let signed = self.matrix().scale_re(f64::from(outcome));
        Ok(identity2().add(&signed).scale_re(0.5))
    }
}

// ---------------------------------------------------------------------------
// Functional relations
// ---------------------------------------------------------------------------

/// A homogeneous linear identity Σ_x c_x A_x = 0 among one party's sharp
/// observables. Stored normalized: the first nonzero coefficient is +1.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalRelation {
    coeffs: Vec<f64>,
}

impl FunctionalRelation {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("relation coefficients must be finite".into()));
        }
        let nonzero: Vec<f64> = coeffs.iter().copied().filter(|v| v.abs() > SYM_TOL).collect();
        if nonzero.len() < 2 {
            return Err(Error::Validation(
                "a relation needs at least two nonzero coefficients".into(),
            ));
        }
        let lead = nonzero[0];
        let coeffs = coeffs
            .into_iter()
            .map(|v| if v.abs() > SYM_TOL { v / lead } else { 0.0 })
            .collect();
        Ok(FunctionalRelation { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Residual ‖Σ_x c_x n_x‖ of a relation over sharp observables' axes; zero
/// (within 1e-9) iff the operator identity Σ c_x A_x = 0 holds, since
/// traceless qubit observables are faithfully represented by their Bloch
/// vectors.
pub fn check_relation(obs: &[Observable], rel: &FunctionalRelation) -> Result<f64> {
    if rel.len() != obs.len() {
        return Err(Error::Validation(format!(
            "relation has {} coefficients for {} observables",
            rel.len(),
            obs.len()
        )));
    }
    for o in obs {
        if !o.is_sharp() {
            return Err(Error::Validation(format!(
                "relations are defined between sharp observables; `{}` has eta = {}",
                o.label(),
                o.eta()
            )));
        }
    }
    let mut sum = BlochVec::zero();
    for (o, &cx) in obs.iter().zip(rel.coeffs()) {
        sum = sum.add(&o.axis().scale(cx));
    }
    Ok(sum.norm())
}

/// Whether the signed projector mixture (1/m) Σ_x (I + s_x A_x)/2 equals the
/// maximally mixed state I/2 within 1e-9. Computed through the projector
/// matrices, deliberately not through Bloch arithmetic, so it provides an
/// independent route to the same identity `check_relation` tests.
pub fn verify_mixture_identity(obs: &[Observable], signs: &[i8]) -> Result<bool> {
    if signs.len() != obs.len() {
        return Err(Error::Validation(format!(
            "{} signs for {} observables",
            signs.len(),
            obs.len()
        )));
    }
    if obs.is_empty() {
        return Err(Error::Validation("observable list is empty".into()));
    }
    let mut sum = CMat::zero(2)?;
    for (o, &s) in obs.iter().zip(signs) {
        if !o.is_sharp() {
            return Err(Error::Validation(format!(
                "mixture identities are defined for sharp observables; `{}` has eta = {}",
                o.label(),
                o.eta()
            )));
        }
        sum = sum.add(&o.povm_element(s)?);
    }
    let mix = sum.scale_re(1.0 / obs.len() as f64);
    let half = identity2().scale_re(0.5);
    Ok(mix.max_abs_diff(&half) <= ALGEBRA_TOL)
}

// ---------------------------------------------------------------------------
// Named states
// ---------------------------------------------------------------------------

/// Density matrix of a named two-qubit state. Known names: `phi_plus`,
/// `phi_minus`, `psi_plus`, `psi_minus`, `singlet` (alias of `psi_minus`),
/// `maximally_mixed`.
pub fn named_state(name: &str) -> Result<CMat> {
    let s = FRAC_1_SQRT_2;
    let vec = |v: [f64; 4]| {
        CMat::outer(&[c(v[0], 0.0), c(v[1], 0.0), c(v[2], 0.0), c(v[3], 0.0)])
            .expect("nonzero named-state vector")
    };
    match name {
        "phi_plus" => Ok(vec([s, 0.0, 0.0, s])),
        "phi_minus" => Ok(vec([s, 0.0, 0.0, -s])),
        "psi_plus" => Ok(vec([0.0, s, s, 0.0])),
        "psi_minus" | "singlet" => Ok(vec([0.0, s, -s, 0.0])),
        "maximally_mixed" => Ok(CMat::identity(4)?.scale_re(0.25)),
        other => Err(Error::Lookup(other.into())),
    }
}

/// Validates a 4×4 density matrix: Hermitian, unit trace, positive
/// semidefinite, all within 1e-9.
pub fn validate_state(state: &CMat) -> Result<()> {
    if state.dim() != 4 {
        return Err(Error::Validation(format!(
            "shared state must be 4x4, got {0}x{0}",
            state.dim()
        )));
    }
    let herm_dev = state.max_abs_diff(&state.dagger()) / 2.0;
    if herm_dev > ALGEBRA_TOL {
        return Err(Error::Validation(format!(
            "state is not Hermitian (max deviation {herm_dev:.3e})"
        )));
    }
    let tr = state.trace();
    if (tr.re - 1.0).abs() > ALGEBRA_TOL || tr.im.abs() > ALGEBRA_TOL {
        return Err(Error::Validation(format!(
            "state trace must be 1, got {} + {}i",
            tr.re, tr.im
        )));
    }
    let eig = herm_eigen(&state.hermitized())?;
    if eig.values[0] < -ALGEBRA_TOL {
        return Err(Error::Validation(format!(
            "state is not positive semidefinite (min eigenvalue {:.3e})",
            eig.values[0]
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

/// A two-party correlation scenario: Alice's and Bob's observable lists, the
/// shared two-qubit state, an m×n Bell coefficient matrix, and any functional
/// relations declared on Alice's observables.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    alice: Vec<Observable>,
    bob: Vec<Observable>,
    state: CMat,
    coeffs: Vec<Vec<f64>>,
    relations: Vec<FunctionalRelation>,
}

impl Scenario {
    pub fn new(
        alice: Vec<Observable>,
        bob: Vec<Observable>,
        state: CMat,
        coeffs: Vec<Vec<f64>>,
        relations: Vec<FunctionalRelation>,
    ) -> Result<Self> {
        if alice.is_empty() || bob.is_empty() {
            return Err(Error::Validation(
                "both parties need at least one observable".into(),
            ));
        }
        validate_state(&state)?;
        if coeffs.len() != alice.len() {
            return Err(Error::Validation(format!(
                "coefficient matrix has {} rows for {} first-party observables",
                coeffs.len(),
                alice.len()
            )));
        }
        for (x, row) in coeffs.iter().enumerate() {
            if row.len() != bob.len() {
                return Err(Error::Validation(format!(
                    "coefficient row {x} has {} entries for {} second-party observables",
                    row.len(),
                    bob.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "coefficient row {x} contains a non-finite entry"
                )));
            }
        }
        for (i, rel) in relations.iter().enumerate() {
            if rel.len() != alice.len() {
                return Err(Error::Validation(format!(
                    "relation {i} has {} coefficients for {} first-party observables",
                    rel.len(),
                    alice.len()
                )));
            }
        }
        Ok(Scenario {
            alice,
            bob,
            state,
            coeffs,
            relations,
        })
    }

    pub fn alice(&self) -> &[Observable] {
        &self.alice
    }

    pub fn bob(&self) -> &[Observable] {
        &self.bob
    }

    pub fn state(&self) -> &CMat {
        &self.state
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn relations(&self) -> &[FunctionalRelation] {
        &self.relations
    }

    /// Number of Alice-side settings.
    pub fn m(&self) -> usize {
        self.alice.len()
    }

    /// Number of Bob-side settings.
    pub fn n(&self) -> usize {
        self.bob.len()
    }

    /// Copy with the shared state replaced (re-validated).
    pub fn with_state(&self, state: CMat) -> Result<Scenario> {
        validate_state(&state)?;
        let mut s = self.clone();
        s.state = state;
        Ok(s)
    }
}

/// Copy of the scenario with every observable on the chosen side set to
/// sharpness `eta`. The coefficient matrix, relations, and state are kept.
pub fn smear(s: &Scenario, side: Side, eta: f64) -> Result<Scenario> {
    let mut out = s.clone();
    let list = match side {
        Side::Alice => &mut out.alice,
        Side::Bob => &mut out.bob,
    };
    for o in list.iter_mut() {
        *o = o.with_eta(eta)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

/// Names accepted by [`builtin_scenario`].
pub fn builtin_names() -> &'static [&'static str] {
    &["trine_delta3", "elegant_b3", "orthogonal_steering"]
}

/// Built-in scenario families.
///
/// * `trine_delta3` — three coplanar axes at 120° (summing to zero) on the
///   first side, the negated axes on the second, the singlet state, and the
///   ±1 coefficient matrix with +1 on the diagonal; relation (1,1,1).
/// * `elegant_b3` — four axes along alternating cube diagonals on the first
///   side (the first equals the sum of the other three), axes {−x̂, ŷ, ẑ} on
///   the second, the `phi_minus` state, and the ±1 coefficient matrix whose
///   three columns single out x, y, z; relation (1,−1,−1,−1).
/// * `orthogonal_steering` — axes {−x̂, ŷ, ẑ} vs {x̂, ŷ, ẑ} on the
///   `phi_minus` state with the identity coefficient matrix and no relation;
///   each paired correlator equals +1.
pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    let s3 = 3.0_f64.sqrt();
    match name {
        "trine_delta3" => {
            let axes = [
                BlochVec::new(0.0, 0.0, 1.0),
                BlochVec::new(s3 / 2.0, 0.0, -0.5),
                BlochVec::new(-s3 / 2.0, 0.0, -0.5),
            ];
            let alice = axes
                .iter()
                .enumerate()
                .map(|(i, a)| Observable::sharp(*a, format!("A{}", i + 1)))
                .collect::<Result<Vec<_>>>()?;
            let bob = axes
                .iter()
                .enumerate()
                .map(|(i, a)| Observable::sharp(a.neg(), format!("B{}", i + 1)))
                .collect::<Result<Vec<_>>>()?;
            let coeffs = vec![
                vec![1.0, -1.0, -1.0],
                vec![-1.0, 1.0, -1.0],
                vec![-1.0, -1.0, 1.0],
            ];
            let relations = vec![FunctionalRelation::new(vec![1.0, 1.0, 1.0])?];
            Scenario::new(alice, bob, named_state("singlet")?, coeffs, relations)
        }
        "elegant_b3" => {
            let q = 1.0 / s3;
            let a_axes = [
                BlochVec::new(q, q, q),
                BlochVec::new(q, q, -q),
                BlochVec::new(q, -q, q),
                BlochVec::new(-q, q, q),
            ];
            let b_axes = [
                BlochVec::new(-1.0, 0.0, 0.0),
                BlochVec::new(0.0, 1.0, 0.0),
                BlochVec::new(0.0, 0.0, 1.0),
            ];
            let alice = a_axes
                .iter()
                .enumerate()
                .map(|(i, a)| Observable::sharp(*a, format!("A{}", i + 1)))
                .collect::<Result<Vec<_>>>()?;
            let bob = b_axes
                .iter()
                .enumerate()
                .map(|(i, a)| Observable::sharp(*a, format!("B{}", i + 1)))
                .collect::<Result<Vec<_>>>()?;
            let coeffs = vec![
                vec![1.0, 1.0, 1.0],
                vec![1.0, 1.0, -1.0],
                vec![1.0, -1.0, 1.0],
                vec![-1.0, 1.0, 1.0],
            ];
            let relations = vec![FunctionalRelation::new(vec![1.0, -1.0, -1.0, -1.0])?];
            Scenario::new(alice, bob, named_state("phi_minus")?, coeffs, relations)
        }
        "orthogonal_steering" => {
            let a_axes = [
                BlochVec::new(-1.0, 0.0, 0.0),
                BlochVec::new(0.0, 1.0, 0.0),
                BlochVec::new(0.0, 0.0, 1.0),
            ];
            let b_axes = [
                BlochVec::new(1.0, 0.0, 0.0),
                BlochVec::new(0.0, 1.0, 0.0),
                BlochVec::new(0.0, 0.0, 1.0),
            ];
            let alice = a_axes
                .iter()
                .enumerate()
                .map(|(i, a)| Observable::sharp(*a, format!("A{}", i + 1)))
                .collect::<Result<Vec<_>>>()?;
            let bob = b_axes
                .iter()
                .enumerate()
                .map(|(i, a)| Observable::sharp(*a, format!("B{}", i + 1)))
                .collect::<Result<Vec<_>>>()?;
            let coeffs = vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ];
            Scenario::new(alice, bob, named_state("phi_minus")?, coeffs, vec![])
        }
        other => Err(Error::Lookup(other.into())),
    }
}

// ---------------------------------------------------------------------------
