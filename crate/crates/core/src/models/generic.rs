//! Generic QMS: H = diag(κ), jumps √γ_mj |e_j⟩⟨e_m| for each transition m → j.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{GKLSSpec, GeneratorPair, Superoperator};
use crate::numerics::{cx, ComplexMatrix};
use crate::operators::{HilbertSpace, Operator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Transitions leaving the window land on the last level, which becomes absorbing.
    AbsorbingTruncate,
    /// Transitions leaving the window are folded back onto the last level.
    #[default]
    Reflecting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericQMSParams {
    /// Rate matrix; entry [m][j] is the rate of m → j. May extend beyond `dim`;
    /// diagonal entries are ignored and recomputed.
    pub gamma: Vec<Vec<f64>>,
    /// Level energies; missing entries are zero.
    #[serde(default)]
    pub kappa: Vec<f64>,
    pub dim: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

impl GenericQMSParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        if self.gamma.len() < self.dim {
            return Err(Error::invalid(
                "gamma",
                format!("needs at least dim = {} rows, got {}", self.dim, self.gamma.len()),
            ));
        }
        for (m, row) in self.gamma.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                if !g.is_finite() {
                    return Err(Error::invalid("gamma", format!("entry [{m}][{j}] is not finite")));
                }
                if m != j && g < 0.0 {
                    return Err(Error::invalid("gamma", format!("negative rate {g} at [{m}][{j}]")));
                }
            }
        }
        if let Some(k) = self.kappa.iter().find(|k| !k.is_finite()) {
            return Err(Error::invalid("kappa", format!("non-finite entry {k}")));
        }
        Ok(())
    }

    /// Rate matrix on the window after the boundary rule, with γ_mm = −Σ_{j≠m} γ_mj.
    pub fn adjusted_rates(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let d = self.dim;
        let last = d - 1;
        let mut q = vec![vec![0.0; d]; d];
        for m in 0..d {
            for (j, &g) in self.gamma[m].iter().enumerate() {
                if j == m || g == 0.0 {
                    continue;
                }
                let target = j.min(last);
                if target != m {
                    q[m][target] += g;
                }
            }
        }
        if self.boundary == Boundary::AbsorbingTruncate {
            q[last].iter_mut().for_each(|g| *g = 0.0);
        }
        for (m, row) in q.iter_mut().enumerate() {
            row[m] = 0.0;
            row[m] = -row.iter().sum::<f64>();
        }
        Ok(q)
    }
}

#[derive(Debug, Clone)]
pub struct GenericQMS {
    pub pair: GeneratorPair,
    pub spec: GKLSSpec,
    /// Adjusted rate matrix Γ on the window.
    pub rates: Vec<Vec<f64>>,
}

pub fn build_generic_qms(p: &GenericQMSParams) -> Result<GenericQMS> {
    let rates = p.adjusted_rates()?;
    let d = p.dim;
    let space = HilbertSpace::abstract_space(d)?;
    let kappa = |m: usize| p.kappa.get(m).copied().unwrap_or(0.0);

    let mut jumps = Vec::new();
    for (m, row) in rates.iter().enumerate() {
        for (j, &g) in row.iter().enumerate() {
            if j != m && g > 0.0 {
                let mut l = ComplexMatrix::zeros(d, d);
                l[(j, m)] = cx(g.sqrt(), 0.0);
                jumps.push(Operator::new(space.clone(), l)?);
            }
        }
    }
    let h = ComplexMatrix::from_real_diag(&(0..d).map(kappa).collect::<Vec<_>>());
    let spec = GKLSSpec::new(Operator::new(space.clone(), h)?, jumps.clone())?;
    let g = ComplexMatrix::from_diag(
        &(0..d)
            .map(|m| cx(rates[m][m] / 2.0, -kappa(m)))
            .collect::<Vec<_>>(),
    );
    let pair = GeneratorPair::new(Operator::new(space, g)?, jumps)?;
    Ok(GenericQMS { pair, spec, rates })
}

/// Largest entry of the superoperator coupling diagonal and off-diagonal matrix units.
pub fn diagonal_block_defect(gen: &Superoperator) -> f64 {
    let d = gen.dim();
    let is_diag = |idx: usize| idx % d == idx / d;
    let m = gen.matrix();
    let mut worst = 0.0_f64;
    for r in 0..d * d {
        for c in 0..d * d {
            if is_diag(r) != is_diag(c) {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    worst
}
