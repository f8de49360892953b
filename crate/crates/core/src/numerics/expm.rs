//! Scaling-and-squaring Padé exponential (Higham 2005 degree selection).

use super::decomp::solve;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120., 60., 12., 1.],
        5 => &[30240., 15120., 3360., 420., 30., 1.],
        7 => &[17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.],
        9 => &[
            17643225600.,
            8821612800.,
            2075673600.,
            302702400.,
            30270240.,
            2162160.,
            110880.,
            3960.,
            90.,
            1.,
        ],
        13 => &[
            64764752532480000.,
            32382376266240000.,
            7771770303897600.,
            1187353796428800.,
            129060195264000.,
            10559470521600.,
            670442572800.,
            33522128640.,
            1323241920.,
            40840800.,
            960960.,
            16380.,
            182.,
            1.,
        ],
        _ => unreachable!("unsupported Padé degree {m}"),
    }
}

/// exp(t·M).
pub fn matrix_exponential(m: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let n = m.ensure_square()?;
    m.ensure_finite()?;
    if !t.is_finite() {
        return Err(Error::invalid("t", "must be finite"));
    }
    if t == 0.0 || n == 0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let a = m.scale_real(t);
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    for &(deg, theta) in &THETA[..4] {
        if norm <= theta {
            return pade(&a, deg);
        }
    }
    let (_, theta13) = THETA[4];
    let s = ((norm / theta13).log2().ceil()).max(0.0) as i32;
    let scaled = a.scale_real(2f64.powi(-s));
    let mut x = pade(&scaled, 13)?;
    for _ in 0..s {
        x = x.matmul(&x);
    }
    x.ensure_finite()?;
    Ok(x)
}

fn pade(a: &ComplexMatrix, deg: usize) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let b = pade_coefficients(deg);
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(a);

    let (u, v) = if deg < 13 {
        // Even powers A^0, A^2, ..., A^(deg-1).
        let mut powers = vec![id.clone(), a2.clone()];
        while powers.len() < deg.div_ceil(2) {
            let next = powers.last().unwrap().matmul(&a2);
            powers.push(next);
        }
        let mut odd = ComplexMatrix::zeros(n, n);
        let mut even = ComplexMatrix::zeros(n, n);
        for (k, p) in powers.iter().enumerate() {
            odd += &p.scale_real(b[2 * k + 1]);
            even += &p.scale_real(b[2 * k]);
        }
        (a.matmul(&odd), even)
    } else {
        let a4 = a2.matmul(&a2);
        let a6 = a4.matmul(&a2);
        let lin = |c6: f64, c4: f64, c2: f64, c0: f64| {
            let mut s = a6.scale_real(c6);
            s += &a4.scale_real(c4);
            s += &a2.scale_real(c2);
            if c0 != 0.0 {
                s += &id.scale_real(c0);
            }
            s
        };
        let mut inner_u = a6.matmul(&lin(b[13], b[11], b[9], 0.0));
        inner_u += &lin(b[7], b[5], b[3], b[1]);
        let u = a.matmul(&inner_u);
        let mut v = a6.matmul(&lin(b[12], b[10], b[8], 0.0));
        v += &lin(b[6], b[4], b[2], b[0]);
        (u, v)
    };

    let p = &v + &u;
    let q = &v - &u;
    solve(&q, &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cx;

    #[test]
    fn zero_time_is_identity() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| cx(i as f64 - 1.0, j as f64));
        assert_eq!(matrix_exponential(&m, 0.0).unwrap(), ComplexMatrix::identity(3));
    }

    #[test]
    fn diagonal_matches_scalar_exponentials() {
        let d = [cx(-1.0, 0.5), cx(2.0, 0.0), cx(-30.0, -4.0)];
        let e = matrix_exponential(&ComplexMatrix::from_diag(&d), 0.7).unwrap();
        for (i, z) in d.iter().enumerate() {
            let want = (*z * 0.7).exp();
            assert!((e[(i, i)] - want).norm() <= 1e-13 * want.norm().max(1.0));
        }
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn nilpotent_series_truncates() {
        let mut n = ComplexMatrix::zeros(2, 2);
        n[(0, 1)] = cx(3.0, -1.0);
        let e = matrix_exponential(&n, 1.0).unwrap();
        let want = &ComplexMatrix::identity(2) + &n;
        assert!((&e - &want).norm_max() < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        // exp(t [[0,-1],[1,0]]) is rotation by t.
        let mut g = ComplexMatrix::zeros(2, 2);
        g[(0, 1)] = cx(-1.0, 0.0);
        g[(1, 0)] = cx(1.0, 0.0);
        for &t in &[0.01, 1.0, 25.0] {
            let e = matrix_exponential(&g, t).unwrap();
            assert!((e[(0, 0)].re - t.cos()).abs() < 1e-12);
            assert!((e[(1, 0)].re - t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_square_and_nan() {
        assert!(matrix_exponential(&ComplexMatrix::zeros(2, 3), 1.0).is_err());
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = cx(f64::NAN, 0.0);
        assert!(matches!(matrix_exponential(&m, 1.0), Err(Error::NonFinite)));
    }
}
