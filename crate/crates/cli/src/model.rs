use qms_core::lindblad::{build_schrodinger_generator, GKLSSpec, Superoperator};
use qms_core::models::{
    build_generic_qms, build_k_photon, build_two_photon, two_photon_generator_pair,
    two_photon_reference_states,
};
use qms_core::numerics::ComplexMatrix;
use qms_core::operators::{HilbertSpace, Operator};

use crate::config::{MatrixSpec, ModelConfig};
use crate::report::Warning;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    TwoPhoton,
    Generic,
    KPhoton,
    Custom,
}

pub struct BuiltModel {
    pub kind: ModelKind,
    pub spec: GKLSSpec,
    /// Schrödinger generator.
    pub gen: Superoperator,
    pub warnings: Vec<Warning>,
}

fn matrix(space: &HilbertSpace, m: &MatrixSpec) -> qms_core::Result<Operator> {
    let d = space.dim;
    Operator::new(space.clone(), ComplexMatrix::from_fn(d, d, |i, j| m[i][j].value()))
}

pub fn build(model: &ModelConfig) -> qms_core::Result<BuiltModel> {
    let mut warnings = Vec::new();
    let (kind, spec) = match model {
        ModelConfig::TwoPhoton(p) => {
            if p.lambda > 0.0 {
                let (rho_e, _) = two_photon_reference_states(p)?;
                warnings.push(Warning::new(
                    "truncation",
                    format!(
                        "Fock space cut at {} levels; reference invariant states lose mass {:.3e}",
                        p.dim,
                        rho_e.leakage()
                    ),
                ));
            }
            let violations = two_photon_generator_pair(p)?.dissipativity_violations();
            if let Some(worst) = violations.first() {
                warnings.push(Warning::new(
                    "dissipativity",
                    format!(
                        "truncated corner of G is not dissipative on {} basis vectors (worst {:.3e} at index {})",
                        violations.len(),
                        worst.value,
                        worst.basis_index
                    ),
                ));
            }
            (ModelKind::TwoPhoton, build_two_photon(p)?)
        }
        ModelConfig::KPhoton(p) => {
            warnings.push(Warning::new(
                "truncation",
                format!(
                    "Fock space cut at {} levels; coherent-state tail beyond the cut {:.3e}",
                    p.dim,
                    p.truncated_tail()
                ),
            ));
            (ModelKind::KPhoton, build_k_photon(p)?.spec)
        }
        ModelConfig::GenericQms(g) => {
            let params = g.params().map_err(|e| qms_core::Error::InvalidParameter {
                name: "model",
                reason: e.to_string(),
            })?;
            let extends = params
                .gamma
                .iter()
                .take(params.dim)
                .any(|row| row.iter().skip(params.dim).any(|&x| x > 0.0));
            let chain_cut = g.chain.as_ref().is_some_and(|c| c.birth(params.dim - 1) > 0.0);
            if extends || chain_cut {
                warnings.push(Warning::new(
                    "truncation",
                    format!("transitions leaving the {} retained levels are folded by the boundary rule", params.dim),
                ));
            }
            let qms = build_generic_qms(&params)?;
            let violations = qms.pair.dissipativity_violations();
            if !violations.is_empty() {
                warnings.push(Warning::new(
                    "dissipativity",
                    format!("generator pair violates dissipativity on {} basis vectors", violations.len()),
                ));
            }
            (ModelKind::Generic, qms.spec)
        }
        ModelConfig::CustomGkls(c) => {
            let space = HilbertSpace::abstract_space(c.dim)?;
            let h = matrix(&space, &c.hamiltonian)?;
            let jumps = c.jumps.iter().map(|j| matrix(&space, j)).collect::<qms_core::Result<Vec<_>>>()?;
            (ModelKind::Custom, GKLSSpec::new(h, jumps)?)
        }
    };
    let gen = build_schrodinger_generator(&spec)?;
    Ok(BuiltModel { kind, spec, gen, warnings })
}
