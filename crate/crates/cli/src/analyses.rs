use serde_json::{json, Value};

use qms_core::classical::{
    positive_recurrence, quantum_classical_consistency, reuter_nonexplosion, stationary_measure,
    transition_matrix,
};
use qms_core::lindblad::Superoperator;
use qms_core::numerics::Tolerances;
use qms_core::operators::{support_projection, Subspace};
use qms_core::semigroup::{channel, invariant_states};
use qms_core::spectral::{convergence_bound, spectral_gap};
use qms_core::structure::{
    check_ergodic, is_gas, minimal_enclosures, nfd, rate_certificate, transient_split, TimeMode,
};
use qms_core::{Error, Result};

use crate::config::{Analysis, AnalysisConfig, ModeSpec, StateSpec, SubspaceOptions, SubspaceSpec};
use crate::evolve::{initial_operator, time_series};
use crate::model::{BuiltModel, ModelKind};
use crate::report::{complex, complex_list, num, subspace, to_value, Warning};

const HEAD: usize = 32;

pub struct Context<'a> {
    pub cfg: &'a AnalysisConfig,
    pub model: &'a BuiltModel,
    pub warnings: Vec<Warning>,
}

impl Context<'_> {
    fn tol(&self) -> &Tolerances {
        &self.cfg.tolerances
    }

    fn gen(&self) -> &Superoperator {
        &self.model.gen
    }

    fn warn(&mut self, kind: &'static str, message: impl Into<String>) {
        let w = Warning::new(kind, message);
        if !self.warnings.iter().any(|x| x.kind == w.kind && x.message == w.message) {
            self.warnings.push(w);
        }
    }

    fn r_plus(&self) -> Result<Subspace> {
        let inv = invariant_states(self.gen(), self.tol())?;
        support_projection(&inv.canonical_state.as_operator(), self.tol())
    }

    fn resolve(&self, spec: &SubspaceSpec) -> Result<Subspace> {
        match spec {
            SubspaceSpec::RPlus => self.r_plus(),
            SubspaceSpec::Full => Ok(Subspace::full(self.gen().space())),
            SubspaceSpec::Indices(idx) => Subspace::coordinate(self.gen().space(), idx),
        }
    }

    pub fn run(&mut self, analysis: Analysis) -> Result<Value> {
        match analysis {
            Analysis::Spectrum => self.spectrum(),
            Analysis::RPlus => self.r_plus_report(),
            Analysis::ErgodicCheck => Ok(to_value(&check_ergodic(self.gen(), self.tol())?)),
            Analysis::Rate => self.rate(),
            Analysis::Decompose => self.decompose(),
            Analysis::Nfd => self.nfd(),
            Analysis::Gas => self.gas(),
            Analysis::Evolve => self.evolve(),
            Analysis::Classical => self.classical(),
            Analysis::Consistency => self.consistency(),
        }
    }

    fn spectrum(&mut self) -> Result<Value> {
        let rep = spectral_gap(self.gen(), self.tol())?;
        if rep.zero_multiplicity > 1 {
            self.warn(
                "non-uniqueness",
                format!("eigenvalue 0 has multiplicity {}; invariant states are not unique", rep.zero_multiplicity),
            );
        }
        // ‖Φ*_t(ρ) − ρ_∞‖₁ ≤ C e^{−ct} needs a single invariant state.
        let bound = match rep.gap {
            Some(gap) if gap > 0.0 && rep.zero_multiplicity == 1 => {
                let b = convergence_bound(self.gen(), gap / 2.0, self.cfg.seed, self.tol())?;
                json!({
                    "c": num(b.c),
                    "C": num(b.big_c),
                    "grid_max_t": num(b.grid_max_t),
                    "grid_points": b.grid.len(),
                    "states_checked": b.states_checked,
                    "worst_ratio": num(b.worst_ratio),
                    "verified": b.verified,
                })
            }
            _ => Value::Null,
        };
        Ok(json!({
            "eigenvalues": complex_list(&rep.eigenvalues),
            "zero_multiplicity": rep.zero_multiplicity,
            "lambda2": rep.lambda2.map(complex),
            "gap": rep.gap.map(num),
            "irreducible": rep.irreducible,
            "primitive": rep.primitive,
            "max_real_part": num(rep.max_real_part),
            "convergence_bound": bound,
        }))
    }

    fn r_plus_report(&mut self) -> Result<Value> {
        let inv = invariant_states(self.gen(), self.tol())?;
        if inv.kernel_dim() > 1 {
            self.warn(
                "non-uniqueness",
                format!("invariant-state kernel has dimension {}; the canonical state is E*(I/d)", inv.kernel_dim()),
            );
        }
        let split = transient_split(self.gen(), self.tol())?;
        let diag: Vec<f64> = (0..self.gen().dim())
            .map(|i| inv.canonical_state.matrix()[(i, i)].re)
            .collect();
        Ok(json!({
            "r_plus": subspace(&split.r_plus),
            "transient": subspace(&split.transient),
            "null_recurrent_dim": split.null_recurrent.dim(),
            "kernel_dim": inv.kernel_dim(),
            "canonical_state_diagonal": to_value(&diag),
            "canonical_state_leakage": num(inv.canonical_state.leakage()),
            "transient_mass": to_value(&split.transient_mass),
            "transient_decay_ok": split.transient_decay_ok,
        }))
    }

    fn rate(&mut self) -> Result<Value> {
        let candidates = &self.cfg.rate.t0_candidates;
        let cert = rate_certificate(
            self.gen(),
            (!candidates.is_empty()).then_some(candidates.as_slice()),
            self.tol(),
        )?;
        let value = to_value(&cert);
        if !cert.valid {
            return Err(Error::Certification {
                block: 0,
                reason: format!(
                    "no valid rate certificate (kappa {:.6e} at t0 {:.6e}, max excess {:.3e})",
                    cert.kappa, cert.t0, cert.max_excess
                ),
            });
        }
        Ok(value)
    }

    fn decompose(&mut self) -> Result<Value> {
        let dec = minimal_enclosures(self.gen(), self.cfg.seed, self.tol())?;
        if dec.non_canonical {
            self.warn(
                "non-uniqueness",
                format!("beta-block factors are one of infinitely many choices (seed {})", dec.seed),
            );
        }
        let alpha: Vec<Value> = dec.alpha_blocks.iter().map(subspace).collect();
        let beta: Vec<Value> = dec
            .beta_blocks
            .iter()
            .map(|b| {
                json!({
                    "subspace": subspace(&b.subspace),
                    "chosen_factors": b.chosen_factors.iter().map(subspace).collect::<Vec<_>>(),
                    "non_canonical": true,
                })
            })
            .collect();
        Ok(json!({
            "alpha_blocks": alpha,
            "beta_blocks": beta,
            "residual": num(dec.residual),
            "seed": dec.seed,
            "non_canonical": dec.non_canonical,
        }))
    }

    fn mode(opts: &SubspaceOptions) -> TimeMode {
        match opts.mode {
            ModeSpec::Discrete => TimeMode::Discrete { t0: opts.t0 },
            ModeSpec::Continuous => TimeMode::Continuous,
        }
    }

    fn nfd(&mut self) -> Result<Value> {
        let opts = &self.cfg.nfd;
        let seed = self.resolve(&opts.subspace)?;
        let mode = Self::mode(opts);
        let map = match mode {
            TimeMode::Discrete { t0 } => channel(self.gen(), t0)?,
            TimeMode::Continuous => self.gen().clone(),
        };
        let res = nfd(&map, &seed, self.tol())?;
        let stages: Vec<Value> = res
            .stages
            .iter()
            .map(|s| {
                json!({
                    "sigma": num(s.sigma),
                    "subspace_t": subspace(&s.subspace_t),
                    "cumulative_s": subspace(&s.cumulative_s),
                })
            })
            .collect();
        let mut gas = Vec::new();
        for i in 0..=res.stages.len() {
            let v = is_gas(self.gen(), res.entering(i), mode, self.tol())?;
            gas.push(json!({
                "stage": i,
                "is_gas": v.is_gas,
                "contains_r_plus": v.contains_r_plus,
                "spectral_below": v.spectral_below,
                "sigma_r1": num(v.sigma_r1),
            }));
        }
        Ok(json!({
            "mode": to_value(&mode),
            "seed": subspace(&seed),
            "stages": stages,
            "gas_stage": res.gas_stage,
            "stage_gas": gas,
        }))
    }

    fn gas(&mut self) -> Result<Value> {
        let opts = &self.cfg.gas;
        let v = self.resolve(&opts.subspace)?;
        let verdict = is_gas(self.gen(), &v, Self::mode(opts), self.tol())?;
        Ok(json!({
            "subspace": subspace(&v),
            "mode": to_value(&Self::mode(opts)),
            "verdict": to_value(&verdict),
        }))
    }

    fn evolve(&mut self) -> Result<Value> {
        let state = StateSpec::parse(&self.cfg.state, self.gen().dim())
            .map_err(|e| Error::InvalidParameter { name: "state", reason: e.message })?;
        let x0 = initial_operator(self.model, state, self.cfg.seed)?;
        let series = time_series(self.model, &x0, &self.cfg.time_grid.times(), self.tol())?;
        Ok(json!({
            "state": self.cfg.state,
            "columns": series.columns,
            "rows": to_value(&series.rows),
        }))
    }

    fn chain(&self) -> Result<&qms_core::classical::BirthDeathChain> {
        self.cfg
            .birth_death_chain()
            .ok_or_else(|| Error::InvalidParameter { name: "chain", reason: "no birth-death chain configured".into() })
    }

    fn classical(&mut self) -> Result<Value> {
        let chain = self.chain()?;
        let h = chain.horizon;
        let t = transition_matrix(chain)?;
        let head: Vec<[f64; 3]> = (0..t.len().min(HEAD)).map(|i| [t.down[i], t.stay[i], t.up[i]]).collect();
        let reuter = reuter_nonexplosion(chain, h)?;
        let verdict = positive_recurrence(chain, h, None)?;
        let measure = stationary_measure(chain, h, true)?;
        if measure.forced {
            self.warn(
                "classical",
                "stationary measure computed without a positive-recurrent classification at the horizon",
            );
        }
        Ok(json!({
            "horizon": h,
            "transition_head": to_value(&head),
            "reuter_nonexplosion": to_value(&reuter),
            "recurrence": to_value(&verdict),
            "stationary": {
                "pi_head": to_value(&measure.pi[..measure.pi.len().min(HEAD)]),
                "pi_embedded_head": to_value(&measure.pi_embedded[..measure.pi_embedded.len().min(HEAD)]),
                "s_partial": num(measure.s_partial),
                "s_relative_change": num(measure.s_relative_change),
                "detailed_balance_residual": num(measure.detailed_balance_residual),
                "forced": measure.forced,
            },
        }))
    }

    fn consistency(&mut self) -> Result<Value> {
        let chain = self.chain()?;
        let dim = if self.model.kind == ModelKind::Generic { self.gen().dim() } else { chain.horizon.min(15) };
        Ok(to_value(&quantum_classical_consistency(chain, dim, self.tol())?))
    }
}
