//! Steering analysis: the assemblage a first party's measurements leave on
//! the second party's side, local-hidden-state decompositions certifying the
//! absence of steering, and the linear steering functionals with their
//! hidden-state bounds.

use serde::Serialize;

use crate::algebra::{
    bloch_of, herm_eigen, identity2, partial_trace_a, tensor, BlochVec, CMat, ALGEBRA_TOL,
};
use crate::error::{Error, Result};
use crate::scenario::{validate_state, Observable, Scenario};

/// Largest observable count accepted by the sign-vector enumerations.
pub const MAX_SETTINGS: usize = 16;

const PSD_FLOOR: f64 = -1e-9;
const DEGENERATE_TRACE: f64 = 1e-12;

/// The family of unnormalized conditional states left on the second party by
/// the first party's two-outcome measurements.
#[derive(Clone, Debug)]
pub struct Assemblage {
    m: usize,
    /// elements[x] = [state for outcome +1, state for outcome −1].
    elements: Vec<[CMat; 2]>,
}

impl Assemblage {
    /// Validates the defining invariants: every element is a 2×2 PSD
    /// operator (eigenvalue floor −1e-9), the outcome sums are identical
    /// across settings within 1e-9 (no-signaling), and each setting's total
    /// trace is 1 within 1e-9.
    pub fn new(elements: Vec<[CMat; 2]>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Validation("assemblage has no settings".into()));
        }
        for (x, pair) in elements.iter().enumerate() {
            for (k, el) in pair.iter().enumerate() {
                let a = if k == 0 { 1 } else { -1 };
                if el.dim() != 2 {
                    return Err(Error::Validation(format!(
                        "assemblage element ({a},{x}) is not 2x2"
                    )));
                }
                let dev = el.max_abs_diff(&el.dagger()) / 2.0;
                if dev > 1e-9 {
                    return Err(Error::Validation(format!(
                        "assemblage element ({a},{x}) is not Hermitian (deviation {dev:.3e})"
                    )));
                }
                let eig = herm_eigen(&el.hermitized())?;
                if eig.values[0] < PSD_FLOOR {
                    return Err(Error::Validation(format!(
                        "assemblage element ({a},{x}) has negative eigenvalue {:.3e}",
                        eig.values[0]
                    )));
                }
            }
            let total = pair[0].add(&pair[1]);
            let tr = total.trace().re;
            if (tr - 1.0).abs() > 1e-9 {
                return Err(Error::Validation(format!(
                    "setting {x} has total trace {tr}, expected 1"
                )));
            }
            let dev = total.max_abs_diff(&elements[0][0].add(&elements[0][1]));
            if dev > 1e-9 {
                return Err(Error::Validation(format!(
                    "no-signaling violated between settings 0 and {x} (deviation {dev:.3e})"
                )));
            }
        }
        Ok(Assemblage {
            m: elements.len(),
            elements,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The unnormalized conditional state for outcome `a` of setting `x`.
    pub fn element(&self, a: i8, x: usize) -> Result<&CMat> {
        if x >= self.m {
            return Err(Error::Validation(format!(
                "setting index {x} out of range (m = {})",
                self.m
            )));
        }
        match a {
            1 => Ok(&self.elements[x][0]),
            -1 => Ok(&self.elements[x][1]),
            other => Err(Error::Validation(format!(
                "outcome must be +1 or -1, got {other}"
            ))),
        }
    }

    /// The second party's reduced state Σ_a element(a, 0); by no-signaling
    /// this is setting-independent.
    pub fn marginal(&self) -> CMat {
        self.elements[0][0].add(&self.elements[0][1])
    }
}

/// Computes the assemblage element(a,x) = Tr_A[ρ (M_{a|x} ⊗ I)] for every
/// outcome and setting. Input validity is checked up front, so a failure of
/// the output invariants is reported as an internal error.
pub fn assemblage_of(state: &CMat, alice: &[Observable]) -> Result<Assemblage> {
    validate_state(state)?;
    if alice.is_empty() {
        return Err(Error::Validation("no observables given".into()));
    }
    let id = identity2();
    let mut elements = Vec::with_capacity(alice.len());
    for obs in alice {
        let mut pair = Vec::with_capacity(2);
        for a in [1i8, -1i8] {
            let effect = obs.povm_element(a)?;
            let sigma = partial_trace_a(&state.mul(&tensor(&effect, &id)?))?;
            pair.push(sigma.hermitized());
        }
        let minus = pair.pop().expect("two outcomes");
        let plus = pair.pop().expect("two outcomes");
        elements.push([plus, minus]);
    }
    Assemblage::new(elements).map_err(|e| Error::Internal(format!("assemblage invariant: {e}")))
}

/// A finite local-hidden-state decomposition: weights π(λ), response
/// probabilities p(+1 | x, λ), and hidden states σ_λ.
#[derive(Clone, Debug, Serialize)]
pub struct LHSModel {
    weights: Vec<f64>,
    /// responses[λ][x] = probability of announcing +1 for setting x.
    responses: Vec<Vec<f64>>,
    hidden_states: Vec<CMat>,
}

impl LHSModel {
    /// Validates normalization: weights nonnegative summing to 1 (within
    /// 1e-9), responses in [0,1], hidden states valid density matrices.
    pub fn new(
        weights: Vec<f64>,
        responses: Vec<Vec<f64>>,
        hidden_states: Vec<CMat>,
    ) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return Err(Error::Validation("hidden-state model is empty".into()));
        }
        if responses.len() != k || hidden_states.len() != k {
            return Err(Error::Validation(format!(
                "model shape mismatch: {k} weights, {} response rows, {} states",
                responses.len(),
                hidden_states.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < -1e-9) {
            return Err(Error::Validation("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let width = responses[0].len();
        for row in &responses {
            if row.len() != width {
                return Err(Error::Validation("ragged response table".into()));
            }
            if row
                .iter()
                .any(|p| !p.is_finite() || *p < -1e-9 || *p > 1.0 + 1e-9)
            {
                return Err(Error::Validation(
                    "response probabilities must lie in [0, 1]".into(),
                ));
            }
        }
        for (i, st) in hidden_states.iter().enumerate() {
            if st.dim() != 2 {
                return Err(Error::Validation(format!("hidden state {i} is not 2x2")));
            }
            if st.max_abs_diff(&st.dagger()) / 2.0 > 1e-9 {
                return Err(Error::Validation(format!(
                    "hidden state {i} is not Hermitian"
                )));
            }
            if (st.trace().re - 1.0).abs() > 1e-9 {
                return Err(Error::Validation(format!(
                    "hidden state {i} has trace {}, expected 1",
                    st.trace().re
                )));
            }
            if herm_eigen(&st.hermitized())?.values[0] < PSD_FLOOR {
                return Err(Error::Validation(format!(
                    "hidden state {i} is not positive semidefinite"
                )));
            }
        }
        Ok(LHSModel {
            weights,
            responses,
            hidden_states,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn responses(&self) -> &[Vec<f64>] {
        &self.responses
    }

    pub fn hidden_states(&self) -> &[CMat] {
        &self.hidden_states
    }

    /// Number of hidden variables.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Attempts the uniform hidden-state model with one λ per (outcome, setting)
/// pair and π(λ) = 1/(2m): hidden states are the normalized conditional
/// states, and each λ responds deterministically with the outcome whose
/// conditional state is closest in Bloch direction. Returns `None` when the
/// axes admit no signed zero-sum combination (the construction requires the
/// uniform mixture of the observables' eigenprojectors to be maximally
/// mixed).
///
/// The reconstruction this model certifies is the one of the observables
/// smeared to sharpness 2/m; for a maximally entangled state `verify_lhs`
/// confirms it exactly.
pub fn build_uniform_lhs(alice: &[Observable], state: &CMat) -> Result<Option<LHSModel>> {
    let m = alice.len();
    if m == 0 {
        return Err(Error::Validation("no observables given".into()));
    }
    if m > MAX_SETTINGS {
        return Err(Error::Resource(format!(
            "uniform model supports at most {MAX_SETTINGS} observables, got {m}"
        )));
    }
    for obs in alice {
        if !obs.is_sharp() {
            return Err(Error::Validation(format!(
                "uniform model requires sharp observables; `{}` has eta {}",
                obs.label(),
                obs.eta()
            )));
        }
    }
    validate_state(state)?;

    // Gate: some sign choice s (s_0 = +1) must make Σ s_x axis_x vanish.
    let axes: Vec<BlochVec> = alice.iter().map(|o| o.axis()).collect();
    let found = (0u32..(1u32 << (m - 1))).any(|mask| {
        let mut sum = axes[0];
        for (bit, ax) in axes.iter().enumerate().skip(1) {
            let s = if mask & (1 << (bit - 1)) == 0 { 1.0 } else { -1.0 };
            sum = sum.add(&ax.scale(s));
        }
        sum.norm() <= ALGEBRA_TOL
    });
    if !found {
        return Ok(None);
    }

    let asm = assemblage_of(state, alice)?;
    let count = 2 * m;
    let mut hidden_states = Vec::with_capacity(count);
    let mut dirs: Vec<BlochVec> = Vec::with_capacity(count);
    for x in 0..m {
        for a in [1i8, -1i8] {
            let sigma = asm.element(a, x)?;
            let tr = sigma.trace().re;
            let omega = if tr > DEGENERATE_TRACE {
                sigma.scale_re(1.0 / tr)
            } else {
                identity2().scale_re(0.5)
            };
            let (_, w) = bloch_of(&omega);
            dirs.push(w.normalized().unwrap_or(BlochVec::zero()));
            hidden_states.push(omega);
        }
    }
    // λ = 2x + (0 for outcome +1, 1 for outcome −1); dirs[2x'] is the
    // direction announced "+1 on setting x'" steers towards.
    let responses: Vec<Vec<f64>> = (0..count)
        .map(|lambda| {
            (0..m)
                .map(|xp| {
                    let plus = dirs[lambda].dot(&dirs[2 * xp]);
                    let minus = dirs[lambda].dot(&dirs[2 * xp + 1]);
                    if plus >= minus {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let weights = vec![1.0 / count as f64; count];
    LHSModel::new(weights, responses, hidden_states).map(Some)
}

/// Largest entrywise deviation between the assemblage and the model's
/// reconstruction Σ_λ π(λ) p(a|x,λ) σ_λ, over all outcomes and settings.
pub fn verify_lhs(asm: &Assemblage, model: &LHSModel) -> Result<f64> {
    if model.responses.is_empty() || model.responses[0].len() != asm.m() {
        return Err(Error::Validation(format!(
            "model covers {} settings, assemblage has {}",
            model.responses.first().map_or(0, Vec::len),
            asm.m()
        )));
    }
    let mut worst = 0.0f64;
    for x in 0..asm.m() {
        for a in [1i8, -1i8] {
            let mut recon = CMat::zero(2)?;
            for lambda in 0..model.len() {
                let p_plus = model.responses[lambda][x];
                let p = if a == 1 { p_plus } else { 1.0 - p_plus };
                let w = model.weights[lambda] * p;
                if w != 0.0 {
                    recon = recon.add(&model.hidden_states[lambda].scale_re(w));
                }
            }
            worst = worst.max(recon.max_abs_diff(asm.element(a, x)?));
        }
    }
    Ok(worst)
}

/// The hidden-state ceiling of the averaged correlator functional: the
/// maximum over sign vectors s ∈ {±1}^n of the largest eigenvalue of
/// (1/n) Σ_y s_y B_y. Exact by enumeration.
pub fn linear_steering_bound(bob: &[Observable]) -> Result<f64> {
    let n = bob.len();
    if n == 0 {
        return Err(Error::Validation("no observables given".into()));
    }
    if n > MAX_SETTINGS {
        return Err(Error::Resource(format!(
            "sign enumeration supports at most {MAX_SETTINGS} observables, got {n}"
        )));
    }
    for obs in bob {
        if !obs.is_sharp() {
            return Err(Error::Validation(format!(
                "the hidden-state bound is defined for sharp observables; `{}` has eta {}",
                obs.label(),
                obs.eta()
            )));
        }
    }
    let mats: Vec<CMat> = bob.iter().map(Observable::matrix).collect();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << n) {
        let mut sum = CMat::zero(2)?;
        for (y, mat) in mats.iter().enumerate() {
            let s = if mask & (1 << y) == 0 { 1.0 } else { -1.0 };
            sum = sum.add(&mat.scale_re(s));
        }
        let top = herm_eigen(&sum.scale_re(1.0 / n as f64))?.values[1];
        best = best.max(top);
    }
    Ok(best)
}

/// Which steering functional to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringForm {
    /// (1/2) Σ_x ⟨A_x ⊗ B_x⟩ — pairs settings, so m must equal n.
    TrineForm,
    /// (1/√3) Σ_y ⟨v̂_y·σ ⊗ B_y⟩ with v_y = Σ_x coeffs[x][y]·η_x·axis_x:
    /// the first-party direction is read off the functional's columns.
    LinearForm,
}

/// Evaluates the chosen steering functional on the scenario's state; a
/// hidden-state model caps both forms at 1, so values above 1 witness
/// steering.
pub fn steering_value(s: &Scenario, form: SteeringForm) -> Result<f64> {
    match form {
        SteeringForm::TrineForm => {
            if s.m() != s.n() {
                return Err(Error::Validation(format!(
                    "paired form needs equal setting counts, got {}x{}",
                    s.m(),
                    s.n()
                )));
            }
            let mut total = 0.0;
            for (alice, bob) in s.alice().iter().zip(s.bob()) {
                let op = tensor(&alice.matrix(), &bob.matrix())?;
                total += trace_product(s.state(), &op);
            }
            Ok(total / 2.0)
        }
        SteeringForm::LinearForm => {
            let mut total = 0.0;
            for (y, bob) in s.bob().iter().enumerate() {
                let mut v = BlochVec::zero();
                for (x, alice) in s.alice().iter().enumerate() {
                    v = v.add(&alice.axis().scale(s.coeffs()[x][y] * alice.eta()));
                }
                let Some(dir) = v.normalized() else {
                    return Err(Error::Validation(format!(
                        "column {y} gives a vanishing first-party direction"
                    )));
                };
                let a = crate::algebra::pauli_from_bloch(&dir, 1.0)?;
                let op = tensor(&a, &bob.matrix())?;
                total += trace_product(s.state(), &op);
            }
            Ok(total / 3.0f64.sqrt())
        }
    }
}

fn trace_product(rho: &CMat, op: &CMat) -> f64 {
    let d = rho.dim();
    let mut acc = 0.0;
    for k in 0..d {
        for l in 0..d {
            acc += (rho.get(k, l) * op.get(l, k)).re;
        }
    }
    acc
}

// ---------------------------------------------------------------------------
