//! Seeded random states and models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::lindblad::GKLSSpec;
use crate::numerics::{c64, ComplexMatrix, Tolerances};
use crate::operators::{DensityMatrix, HilbertSpace, Operator};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex normal: E|z|² = 1.
pub fn complex_normal(rng: &mut impl Rng) -> c64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// n×m matrix of independent standard complex normals.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// (G + G†)/√2 for a Ginibre G.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    (&g + &g.adjoint()).scale_real(std::f64::consts::FRAC_1_SQRT_2)
}

/// G G† / tr for a square Ginibre G (full rank almost surely).
pub fn random_state(space: &HilbertSpace, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let g = ginibre(space.dim, space.dim, rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(space.clone(), m.scale_real(1.0 / tr).hermitian_part(), &Tolerances::default())
}

/// Random GKLS data: Hermitian H from `random_hermitian`, Ginibre jumps.
pub fn random_gkls(d: usize, n_jumps: usize, rng: &mut impl Rng) -> Result<GKLSSpec> {
    let space = HilbertSpace::abstract_space(d)?;
    let h = Operator::new(space.clone(), random_hermitian(d, rng).hermitian_part())?;
    let jumps = (0..n_jumps)
        .map(|_| Operator::new(space.clone(), ginibre(d, d, rng)))
        .collect::<Result<Vec<_>>>()?;
    GKLSSpec::new(h, jumps)
}
