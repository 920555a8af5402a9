//! Critical-sharpness thresholds: ratio thresholds from classical bounds
//! (below which smeared measurements can no longer violate them) and
//! joint-measurability thresholds from an explicit symmetric parent
//! measurement found by exact linear feasibility.

use serde::Serialize;

use crate::algebra::{herm_eigen, BlochVec, CMat, SYM_TOL};
use crate::bounds::{local_bound, pnc_bound, BoundCertificate, BoundModel};
use crate::error::{Error, Result};
use crate::feasibility::solve_nonneg;
use crate::scenario::{smear, Scenario, Side};

/// Largest axis-family size for parent-measurement searches (2^m outcomes).
pub const MAX_PARENT_AXES: usize = 4;

const FEAS_TOL: f64 = 1e-9;

/// One outcome of a parent measurement: the deterministic outcome assignment
/// it post-processes to, its weight g_d, and its Bloch part γ_d. The matrix
/// realization is (g_d·I + γ_d·σ)/2.
#[derive(Clone, Debug, Serialize)]
pub struct ParentOutcome {
    /// d ∈ {±1}^m: outcome announced for each setting.
    pub assignment: Vec<i8>,
    pub weight: f64,
    pub bloch: BlochVec,
}

/// A parent measurement for a family of equally-smeared two-outcome qubit
/// measurements: relabeling outcome d to d_x reproduces measurement x
/// exactly.
#[derive(Clone, Debug, Serialize)]
pub struct ParentPovm {
    /// Sharpness of the reproduced measurement family.
    pub eta: f64,
    pub outcomes: Vec<ParentOutcome>,
}

impl ParentPovm {
    /// Matrix realization (g_d·I + γ_d·σ)/2 of every outcome.
    pub fn matrices(&self) -> Result<Vec<CMat>> {
        self.outcomes
            .iter()
            .map(|o| {
                let g = o.weight;
                let b = o.bloch;
                CMat::from_rows(&[
                    vec![
                        num_complex::Complex64::new((g + b.z) / 2.0, 0.0),
                        num_complex::Complex64::new(b.x / 2.0, -b.y / 2.0),
                    ],
                    vec![
                        num_complex::Complex64::new(b.x / 2.0, b.y / 2.0),
                        num_complex::Complex64::new((g - b.z) / 2.0, 0.0),
                    ],
                ])
            })
            .collect()
    }

    /// Largest violation of the defining constraints against the given axes:
    /// total weight 2, vanishing total Bloch part, the positivity cone
    /// ‖γ_d‖ ≤ g_d, and the marginal sums Σ_{d: d_x = +} (g_d, γ_d) =
    /// (1, η·axis_x) for every setting. A return value ≤ 1e-9 certifies the
    /// parent reproduces the smeared family exactly.
    pub fn validate(&self, axes: &[BlochVec]) -> Result<f64> {
        let m = axes.len();
        if m == 0 {
            return Err(Error::Validation("no axes given".into()));
        }
        for o in &self.outcomes {
            if o.assignment.len() != m {
                return Err(Error::Validation(format!(
                    "outcome assignment has {} entries, expected {m}",
                    o.assignment.len()
                )));
            }
            if o.assignment.iter().any(|a| *a != 1 && *a != -1) {
                return Err(Error::Validation(
                    "outcome assignments must be ±1".into(),
                ));
            }
        }
        let mut worst = 0.0f64;
        let total_g: f64 = self.outcomes.iter().map(|o| o.weight).sum();
        worst = worst.max((total_g - 2.0).abs());
        let total_b = self
            .outcomes
            .iter()
            .fold(BlochVec::zero(), |acc, o| acc.add(&o.bloch));
        worst = worst.max(total_b.norm());
        for o in &self.outcomes {
            worst = worst.max(o.bloch.norm() - o.weight);
        }
        for (x, axis) in axes.iter().enumerate() {
            let mut g_sum = 0.0;
            let mut b_sum = BlochVec::zero();
            for o in &self.outcomes {
                if o.assignment[x] == 1 {
                    g_sum += o.weight;
                    b_sum = b_sum.add(&o.bloch);
                }
            }
            worst = worst.max((g_sum - 1.0).abs());
            worst = worst.max(b_sum.add(&axis.scale(-self.eta)).norm());
        }
        Ok(worst)
    }
}

/// What a critical sharpness is a threshold for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    Nonlocality,
    PncViolation,
    JointMeasurability,
}

/// How a threshold was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    /// Closed-form bound/quantum-maximum ratio.
    Ratio,
    /// Bisection over parent-measurement feasibility; within the symmetric
    /// construction this is a lower bound on the true threshold for
    /// asymmetric families.
    Bisection,
}

/// Evidence attached to a threshold.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Feasible parent measurement just below the threshold.
    Parent(ParentPovm),
    /// Extremal classical strategy attaining the bound in the ratio.
    Bound(BoundCertificate),
}

/// A critical sharpness with its provenance and evidence.
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdReport {
    pub kind: ThresholdKind,
    pub critical_eta: f64,
    pub method: ThresholdMethod,
    pub witness: Option<Witness>,
    /// Bisection probes as (eta, feasible) pairs, in probe order; empty for
    /// ratio thresholds.
    pub trace: Vec<(f64, bool)>,
}

/// Critical sharpness below which the scenario's functional can no longer
/// beat the chosen classical bound: since every correlator scales linearly
/// in one side's smearing, the threshold is bound / (sharp quantum maximum).
/// The quantum maximum is taken at the scenario's settings sharpened on both
/// sides; the result is clamped to [0, 1].
pub fn critical_eta_from_bounds(s: &Scenario, model: BoundModel) -> Result<ThresholdReport> {
    let sharp = smear(&smear(s, Side::Alice, 1.0)?, Side::Bob, 1.0)?;
    let q = crate::bell::quantum_max_fixed_measurements(&sharp)?;
    if q.abs() <= SYM_TOL {
        return Err(Error::Model(
            "the sharp quantum maximum vanishes; no threshold exists".into(),
        ));
    }
    let (kind, cert) = match model {
        BoundModel::Local => (ThresholdKind::Nonlocality, local_bound(s.coeffs())?),
        BoundModel::Pnc => (
            ThresholdKind::PncViolation,
            pnc_bound(s.coeffs(), s.relations())?,
        ),
    };
    Ok(ThresholdReport {
        kind,
        critical_eta: (cert.bound / q).clamp(0.0, 1.0),
        method: ThresholdMethod::Ratio,
        witness: Some(Witness::Bound(cert)),
        trace: vec![],
    })
}

/// Searches the symmetric parent construction at sharpness `eta`: outcome d
/// carries Bloch part γ_d = t·Σ_x d_x·axis_x with t = η/2^{m−1} (which
/// solves the Bloch marginal system exactly for any axes), leaving a linear
/// feasibility problem in the weights — equalities Σ_{d: d_x=+} g_d = 1 and
/// Σ_d g_d = 2 under the cone g_d ≥ ‖γ_d‖. Exact basic-solution enumeration
/// decides it; `None` means this construction admits no parent at `eta`
/// (for the symmetric families considered here the construction is tight).
pub fn parent_feasible_at(axes: &[BlochVec], eta: f64) -> Result<Option<ParentPovm>> {
    let m = axes.len();
    if m == 0 {
        return Err(Error::Validation("no axes given".into()));
    }
    if m > MAX_PARENT_AXES {
        return Err(Error::Resource(format!(
            "parent search supports at most {MAX_PARENT_AXES} axes, got {m}"
        )));
    }
    let axes: Vec<BlochVec> = axes
        .iter()
        .map(|a| BlochVec::unit(a.x, a.y, a.z))
        .collect::<Result<_>>()?;
    if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
        return Err(Error::Validation(format!(
            "sharpness eta must lie in [0, 1], got {eta}"
        )));
    }

    let count = 1usize << m;
    let t = eta / (count as f64 / 2.0);
    let assignments: Vec<Vec<i8>> = (0..count)
        .map(|mask| {
            (0..m)
                .map(|x| if mask & (1 << x) == 0 { 1 } else { -1 })
                .collect()
        })
        .collect();
    let blochs: Vec<BlochVec> = assignments
        .iter()
        .map(|d| {
            d.iter()
                .zip(&axes)
                .fold(BlochVec::zero(), |acc, (&dx, ax)| {
                    acc.add(&ax.scale(t * f64::from(dx)))
                })
        })
        .collect();
    let floors: Vec<f64> = blochs.iter().map(BlochVec::norm).collect();

    // Equalities on s = g − floor ≥ 0: one row per setting plus the total.
    let mut a = vec![vec![0.0f64; count]; m + 1];
    let mut b = vec![0.0f64; m + 1];
    for x in 0..m {
        let mut floor_sum = 0.0;
        for (d, assignment) in assignments.iter().enumerate() {
            if assignment[x] == 1 {
                a[x][d] = 1.0;
                floor_sum += floors[d];
            }
        }
        b[x] = 1.0 - floor_sum;
    }
    a[m].fill(1.0);
    b[m] = 2.0 - floors.iter().sum::<f64>();
    // All coefficients are 0/1 and s ≥ 0, so a clearly negative right-hand
    // side is already infeasible.
    if b.iter().any(|v| *v < -FEAS_TOL) {
        return Ok(None);
    }
    let Some(s) = solve_nonneg(&a, &b) else {
        return Ok(None);
    };

    let outcomes = assignments
        .into_iter()
        .zip(blochs)
        .zip(floors.iter().zip(&s))
        .map(|((assignment, bloch), (floor, slack))| ParentOutcome {
            assignment,
            weight: floor + slack,
            bloch,
        })
        .collect();
    Ok(Some(ParentPovm { eta, outcomes }))
}

/// Critical sharpness below which the axis family is jointly measurable by
/// the symmetric parent construction: bisection on [0, 1] to the requested
/// precision (at least 1e-6). Feasibility is monotone decreasing in η (a
/// parent at η scales down to any η′ < η), so the bisection invariant is
/// sound; the attached witness is re-derived at critical_eta − precision.
pub fn jm_threshold(axes: &[BlochVec], precision: f64) -> Result<ThresholdReport> {
    if !precision.is_finite() || precision < 1e-6 {
        return Err(Error::Validation(format!(
            "precision must be at least 1e-6, got {precision}"
        )));
    }
    let mut trace = Vec::new();
    let at_zero = parent_feasible_at(axes, 0.0)?.is_some();
    trace.push((0.0, at_zero));
    if !at_zero {
        return Err(Error::Model(
            "the symmetric construction is infeasible even at eta = 0".into(),
        ));
    }
    let at_one = parent_feasible_at(axes, 1.0)?.is_some();
    trace.push((1.0, at_one));

    let critical = if at_one {
        1.0
    } else {
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        while hi - lo > precision {
            let mid = (lo + hi) / 2.0;
            let ok = parent_feasible_at(axes, mid)?.is_some();
            trace.push((mid, ok));
            if ok {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    let witness_eta = (critical - precision).max(0.0);
    let witness = parent_feasible_at(axes, witness_eta)?.ok_or_else(|| {
        Error::Internal(format!(
            "no parent at eta = {witness_eta} below the found threshold"
        ))
    })?;
    Ok(ThresholdReport {
        kind: ThresholdKind::JointMeasurability,
        critical_eta: critical,
        method: ThresholdMethod::Bisection,
        witness: Some(Witness::Parent(witness)),
        trace,
    })
}

/// Convenience check used by tests and the CLI: top eigenvalue of the
/// difference from the identity of the summed parent outcomes.
pub fn povm_completeness_defect(matrices: &[CMat]) -> Result<f64> {
    if matrices.is_empty() {
        return Err(Error::Validation("no outcomes given".into()));
    }
    let mut sum = CMat::zero(matrices[0].dim())?;
    for m in matrices {
        sum = sum.add(m);
    }
    let diff = sum.sub(&CMat::identity(sum.dim())?);
    let eig = herm_eigen(&diff.hermitized())?;
    Ok(eig
        .values
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs())))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::is_valid_povm;
    use crate::scenario::builtin_scenario;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn trine_axes() -> Vec<BlochVec> {
        builtin_scenario("trine_delta3")
            .unwrap()
            .alice()
            .iter()
            .map(|o| o.axis())
            .collect()
    }

    fn ortho_axes() -> Vec<BlochVec> {
        vec![
            BlochVec::new(1.0, 0.0, 0.0),
            BlochVec::new(0.0, 1.0, 0.0),
            BlochVec::new(0.0, 0.0, 1.0),
        ]
    }

    #[test]
    fn trine_threshold_is_two_thirds() {
        let axes = trine_axes();
        let report = jm_threshold(&axes, 1e-4).unwrap();
        assert!(
            (report.critical_eta - 2.0 / 3.0).abs() <= 1e-4,
            "got {}",
            report.critical_eta
        );
        assert_eq!(report.kind, ThresholdKind::JointMeasurability);
        assert_eq!(report.method, ThresholdMethod::Bisection);
        let Some(Witness::Parent(parent)) = &report.witness else {
            panic!("expected a parent witness");
        };
        assert!((parent.eta - (report.critical_eta - 1e-4)).abs() <= 1e-15);
        assert!(parent.validate(&axes).unwrap() <= 1e-9);
        let mats = parent.matrices().unwrap();
        let check = is_valid_povm(&mats).unwrap();
        assert!(check.valid, "violation {}", check.max_violation);
    }

    #[test]
    fn orthogonal_threshold_is_inverse_root_three() {
        let report = jm_threshold(&ortho_axes(), 1e-4).unwrap();
        assert!(
            (report.critical_eta - 1.0 / SQRT3).abs() <= 1e-4,
            "got {}",
            report.critical_eta
        );
    }

    #[test]
    fn two_orthogonal_axes_threshold_is_inverse_root_two() {
        let axes = vec![BlochVec::new(1.0, 0.0, 0.0), BlochVec::new(0.0, 0.0, 1.0)];
        let report = jm_threshold(&axes, 1e-4).unwrap();
        assert!(
            (report.critical_eta - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-4,
            "got {}",
            report.critical_eta
        );
    }

    #[test]
    fn single_axis_is_jointly_measurable_sharp() {
        let report = jm_threshold(&[BlochVec::new(0.0, 0.0, 1.0)], 1e-4).unwrap();
        assert_eq!(report.critical_eta, 1.0);
        let Some(Witness::Parent(parent)) = &report.witness else {
            panic!("expected a parent witness");
        };
        assert!(parent.validate(&[BlochVec::new(0.0, 0.0, 1.0)]).unwrap() <= 1e-9);
    }

    #[test]
    fn trine_parent_at_exact_threshold_uses_mixed_sign_outcomes() {
        let axes = trine_axes();
        let parent = parent_feasible_at(&axes, 2.0 / 3.0).unwrap().unwrap();
        assert_eq!(parent.outcomes.len(), 8);
        for o in &parent.outcomes {
            let all_same = o.assignment.iter().all(|a| *a == 1)
                || o.assignment.iter().all(|a| *a == -1);
            if all_same {
                assert!(o.weight.abs() <= 1e-9, "all-same weight {}", o.weight);
            } else {
                assert!(
                    (o.weight - 1.0 / 3.0).abs() <= 1e-9,
                    "mixed weight {}",
                    o.weight
                );
            }
        }
        assert!(parent.validate(&axes).unwrap() <= 1e-9);
        assert!(povm_completeness_defect(&parent.matrices().unwrap()).unwrap() <= 1e-9);
    }

    #[test]
    fn feasibility_is_monotone_on_a_grid() {
        let axes = trine_axes();
        let mut last = true;
        for k in 0..=20 {
            let eta = k as f64 / 20.0;
            let ok = parent_feasible_at(&axes, eta).unwrap().is_some();
            assert!(
                ok <= last,
                "feasibility regained at eta = {eta} after being lost"
            );
            last = ok;
        }
        assert!(!last, "trine must be infeasible at eta = 1");
    }

    #[test]
    fn bisection_trace_separates_feasible_from_infeasible() {
        let report = jm_threshold(&ortho_axes(), 1e-4).unwrap();
        let max_feasible = report
            .trace
            .iter()
            .filter(|(_, ok)| *ok)
            .map(|(e, _)| *e)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_infeasible = report
            .trace
            .iter()
            .filter(|(_, ok)| !*ok)
            .map(|(e, _)| *e)
            .fold(f64::INFINITY, f64::min);
        assert!(max_feasible < min_infeasible);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(matches!(
            jm_threshold(&trine_axes(), 1e-7),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parent_feasible_at(&trine_axes(), 1.5),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parent_feasible_at(&[BlochVec::new(0.0, 0.0, 0.3)], 0.5),
            Err(Error::Validation(_))
        ));
        let five = vec![BlochVec::new(0.0, 0.0, 1.0); 5];
        assert!(matches!(
            parent_feasible_at(&five, 0.5),
            Err(Error::Resource(_))
        ));
        assert!(matches!(jm_threshold(&[], 1e-4), Err(Error::Validation(_))));
    }

    #[test]
    fn ratio_thresholds_match_known_values() {
        let trine = builtin_scenario("trine_delta3").unwrap();
        let local = critical_eta_from_bounds(&trine, BoundModel::Local).unwrap();
        assert!((local.critical_eta - 5.0 / 6.0).abs() <= 1e-12);
        assert_eq!(local.kind, ThresholdKind::Nonlocality);
        assert_eq!(local.method, ThresholdMethod::Ratio);
        let Some(Witness::Bound(cert)) = &local.witness else {
            panic!("expected a bound witness");
        };
        assert_eq!(cert.bound, 5.0);

        let pnc = critical_eta_from_bounds(&trine, BoundModel::Pnc).unwrap();
        assert!((pnc.critical_eta - 2.0 / 3.0).abs() <= 1e-12);
        assert_eq!(pnc.kind, ThresholdKind::PncViolation);

        let elegant = builtin_scenario("elegant_b3").unwrap();
        let local = critical_eta_from_bounds(&elegant, BoundModel::Local).unwrap();
        assert!((local.critical_eta - SQRT3 / 2.0).abs() <= 1e-12);
        let pnc = critical_eta_from_bounds(&elegant, BoundModel::Pnc).unwrap();
        assert!((pnc.critical_eta - 1.0 / SQRT3).abs() <= 1e-12);
    }

    #[test]
    fn ratio_threshold_ignores_existing_smearing() {
        let trine = builtin_scenario("trine_delta3").unwrap();
        let blurred = crate::scenario::smear(&trine, Side::Alice, 0.5).unwrap();
        let report = critical_eta_from_bounds(&blurred, BoundModel::Local).unwrap();
        assert!((report.critical_eta - 5.0 / 6.0).abs() <= 1e-12);
    }

    #[test]
    fn vanishing_functional_has_no_threshold() {
        let trine = builtin_scenario("trine_delta3").unwrap();
        let zero = Scenario::new(
            trine.alice().to_vec(),
            trine.bob().to_vec(),
            trine.state().clone(),
            vec![vec![0.0; 3]; 3],
            trine.relations().to_vec(),
        )
        .unwrap();
        assert!(matches!(
            critical_eta_from_bounds(&zero, BoundModel::Local),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn jm_and_pnc_thresholds_coincide_for_the_trine() {
        let trine = builtin_scenario("trine_delta3").unwrap();
        let ratio = critical_eta_from_bounds(&trine, BoundModel::Pnc).unwrap();
        let jm = jm_threshold(&trine_axes(), 1e-4).unwrap();
        assert!(
            (ratio.critical_eta - jm.critical_eta).abs() <= 2e-4,
            "ratio {} vs parent-search {}",
            ratio.critical_eta,
            jm.critical_eta
        );
    }
}
