use qms_core::models::lyapunov_value;
use qms_core::numerics::{matrix_exponential, ComplexMatrix, Tolerances};
use qms_core::operators::{support_projection, DensityMatrix};
use qms_core::random::{random_state, seeded};
use qms_core::semigroup::{channel, invariant_states};

use crate::config::StateSpec;
use crate::model::{BuiltModel, ModelKind};

pub struct Series {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

pub fn initial_operator(model: &BuiltModel, spec: StateSpec, seed: u64) -> qms_core::Result<ComplexMatrix> {
    let space = model.gen.space();
    let d = space.dim;
    Ok(match spec {
        StateSpec::MaximallyMixed => DensityMatrix::maximally_mixed(space).matrix().clone(),
        StateSpec::Fock(n) => DensityMatrix::basis_state(space, n)?.matrix().clone(),
        StateSpec::Unit(i, j) => ComplexMatrix::unit(d, i, j),
        StateSpec::Random => random_state(space, &mut seeded(seed))?.matrix().clone(),
    })
}

fn trace_norm(m: &ComplexMatrix) -> qms_core::Result<f64> {
    let s = m
        .as_faer()
        .singular_values()
        .map_err(|_| qms_core::Error::SvdFailure)?;
    Ok(s.iter().sum())
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let d = m.nrows();
    let mut acc = 0.0;
    for j in 0..d {
        for i in 0..d {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn uniform(times: &[f64]) -> bool {
    times.len() > 2 && {
        let h = times[1] - times[0];
        times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.max(1.0))
    }
}

/// Φ*_t(X) on `times` with the diagnostics of the model.
pub fn time_series(
    model: &BuiltModel,
    x0: &ComplexMatrix,
    times: &[f64],
    tol: &Tolerances,
) -> qms_core::Result<Series> {
    let gen = &model.gen;
    let d = gen.dim();
    let inv = invariant_states(gen, tol)?;
    let r_plus = support_projection(&inv.canonical_state.as_operator(), tol)?;
    let q = r_plus.complement_projector();
    let limit = inv.projection.apply(x0);

    let mut columns = vec!["t", "trace_outside_r_plus"];
    if model.kind == ModelKind::KPhoton {
        columns.push("lyapunov_value");
    }
    columns.push("distance_to_invariant");
    if model.kind == ModelKind::Generic {
        columns.push("off_diagonal_norm");
    }

    let states: Vec<ComplexMatrix> = if uniform(times) {
        let step = matrix_exponential(gen.matrix(), times[1] - times[0])?;
        let first = channel(gen, times[0])?.apply(x0).vectorize();
        let mut out = Vec::with_capacity(times.len());
        let mut v = first;
        for k in 0..times.len() {
            if k > 0 {
                v = step.mul_vec(&v);
            }
            out.push(ComplexMatrix::unvectorize(&v, d));
        }
        out
    } else {
        times
            .iter()
            .map(|&t| Ok(channel(gen, t)?.apply(x0)))
            .collect::<qms_core::Result<_>>()?
    };

    let mut rows = Vec::with_capacity(times.len());
    for (&t, x) in times.iter().zip(&states) {
        let mut row = vec![t, q.matmul(x).matmul(&q).trace().re];
        if model.kind == ModelKind::KPhoton {
            row.push(lyapunov_value(&model.spec, x));
        }
        row.push(trace_norm(&(x - &limit))?);
        if model.kind == ModelKind::Generic {
            row.push(off_diagonal_norm(x));
        }
        rows.push(row);
    }
    Ok(Series { columns, rows })
}

pub fn write_csv(series: &Series, out: impl std::io::Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&series.columns)?;
    for row in &series.rows {
        w.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
    }
    w.flush()
}
