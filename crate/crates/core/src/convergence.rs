//! Step-refinement studies: residual per step size and the observed order
//! between successive levels.

use std::io::Write;

use serde::Serialize;

use crate::numeric::observed_order;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub residual: f64,
    /// `None` on the first (coarsest) level.
    pub observed_order: Option<f64>,
}

/// Evaluates `residual_at` on `h0, h0/r, h0/r², ...` (`levels` values).
pub fn refinement_study<F>(h0: f64, refinement: f64, levels: usize, mut residual_at: F) -> Vec<ConvergenceRow>
where
    F: FnMut(f64) -> f64,
{
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    let mut h = h0;
    for _ in 0..levels {
        let residual = residual_at(h);
        let observed_order = rows
            .last()
            .map(|prev| observed_order(prev.residual, residual, prev.h / h));
        rows.push(ConvergenceRow {
            h,
            residual,
            observed_order,
        });
        h /= refinement;
    }
    rows
}

/// Ratio `residual(h) / residual(h/r)` between consecutive levels.
pub fn reduction_factors(rows: &[ConvergenceRow]) -> Vec<f64> {
    rows.windows(2).map(|w| w[0].residual / w[1].residual).collect()
}

pub fn write_csv<W: Write>(mut out: W, rows: &[ConvergenceRow]) -> std::io::Result<()> {
    writeln!(out, "h,residual,observed_order")?;
    for row in rows {
        match row.observed_order {
            Some(p) => writeln!(out, "{:e},{:e},{:.6}", row.h, row.residual, p)?,
            None => writeln!(out, "{:e},{:e},", row.h, row.residual)?,
        }
    }
    Ok(())
}
