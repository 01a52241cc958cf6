use serde::Serialize;

use crate::analysis::{invariance_residual, invariant_flux_bound, is_stochastically_closed};
use crate::kernel::TransitionKernel;
use crate::measure::{is_singular, AtomicMeasure, MeasurableSet, Point, PROBABILITY_TOLERANCE};

use super::{candidate_witnesses, verify_z_witness, CertifyError};

const WITNESS_DEPTH: u32 = 20;
const WITNESS_PROBES: usize = 16;

/// The hypotheses of the finite-basis theorem, checked for a proposed basis
/// of invariant measures and their carriers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub chain: String,
    /// `‖Aμᵢ − μᵢ‖` per basis measure.
    pub residuals: Vec<f64>,
    pub invariant: bool,
    /// Basis measures pairwise singular.
    pub singular: bool,
    pub carriers_disjoint: bool,
    /// `μᵢ(Kᵢ) = 1`.
    pub carriers_carry_basis: bool,
    /// `max_x (1 − p(x, Kᵢ))` per carrier over the probes inside it.
    pub carrier_leaks: Vec<f64>,
    pub carriers_closed: bool,
    /// Candidate Z witnesses that pass. Any entry means invariant purely
    /// finitely additive measures exist, so no finite countably additive
    /// basis can be complete.
    pub passing_z_witnesses: Vec<String>,
    pub passed: bool,
    pub verdict: String,
}

impl Theorem1Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn theorem1_hypotheses<K: TransitionKernel + ?Sized>(
    k: &K,
    basis: &[AtomicMeasure],
    carriers: &[MeasurableSet],
    probes: &[Point],
) -> Result<Theorem1Report, CertifyError> {
    if basis.len() != carriers.len() {
        return Err(CertifyError::SizeMismatch {
            basis: basis.len(),
            carriers: carriers.len(),
        });
    }
    let mut residuals = Vec::with_capacity(basis.len());
    for mu in basis {
        residuals.push(invariance_residual(k, mu)?);
    }
    let invariant = residuals.iter().all(|r| *r <= PROBABILITY_TOLERANCE);

    let mut singular = true;
    let mut carriers_disjoint = true;
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            singular &= is_singular(&basis[i], &basis[j]);
            carriers_disjoint &= carriers[i].is_disjoint(&carriers[j]);
        }
    }
    let carriers_carry_basis = basis
        .iter()
        .zip(carriers)
        .all(|(mu, c)| mu.log_mass(c).ln() >= -PROBABILITY_TOLERANCE);

    let mut carrier_leaks = Vec::with_capacity(carriers.len());
    for c in carriers {
        let mut inside: Vec<Point> = probes.iter().copied().filter(|&x| c.contains(x)).collect();
        inside.extend(c.points());
        inside.sort();
        inside.dedup();
        carrier_leaks.push(is_stochastically_closed(k, c, &inside)?.max_leak);
    }
    let carriers_closed = carrier_leaks.iter().all(|l| *l <= PROBABILITY_TOLERANCE);

    let mut passing_z_witnesses = Vec::new();
    for w in candidate_witnesses(WITNESS_DEPTH) {
        if verify_z_witness(k, &w, WITNESS_PROBES)?.passed() {
            passing_z_witnesses.push(w.description.clone());
        }
    }

    let hypotheses =
        invariant && singular && carriers_disjoint && carriers_carry_basis && carriers_closed;
    let passed = hypotheses && passing_z_witnesses.is_empty();
    let verdict = if passed {
        "finite pairwise-singular basis with closed carriers; quasicompact behaviour expected"
            .to_string()
    } else if hypotheses {
        format!(
            "infinite-dimensional Δ_ba indicated: {} candidate Z witness(es) pass",
            passing_z_witnesses.len()
        )
    } else {
        "hypotheses not met".to_string()
    };
    Ok(Theorem1Report {
        chain: k.label().to_string(),
        residuals,
        invariant,
        singular,
        carriers_disjoint,
        carriers_carry_basis,
        carrier_leaks,
        carriers_closed,
        passing_z_witnesses,
        passed,
        verdict,
    })
}

/// `c = inf_{x ∈ grid ∩ region} p(x, {0})`. When `c > 0` no invariant
/// probability can charge the region: its flux into 0, at least
/// `c · μ(region)`, must vanish.
pub fn invariant_flux_test<K: TransitionKernel + ?Sized>(
    k: &K,
    region: &MeasurableSet,
    atom_grid: &[Point],
) -> Result<f64, CertifyError> {
    Ok(invariant_flux_bound(k, region, atom_grid)?)
}
