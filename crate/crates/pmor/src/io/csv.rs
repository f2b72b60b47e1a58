//! CSV export of greedy traces and validation tables. Floats are printed
//! with Rust's shortest round-trip formatting so the files reload exactly.

use crate::error::{Error, Result};
use crate::greedy::{GreedyTrace, ValidationTable};
use crate::system::{ParamSpec, ParameterPoint};
use std::fmt::Write as _;
use std::path::Path;

pub const TRACE_HEADER: &str =
    "iter,mu_point,mu_alpha_point,epsilon,r,ell,est_evals,surrogate_evals,wall_ms";

/// Points are written as semicolon-joined coordinates `[im_s; mu_1; ...]`
/// so the field stays a single CSV cell.
fn point_cell(pt: &ParameterPoint) -> String {
    let mut parts = vec![format!("{}", pt.s.im)];
    parts.extend(pt.mu.iter().map(|v| format!("{v}")));
    parts.join(";")
}

pub fn write_trace_csv(path: &Path, trace: &GreedyTrace) -> Result<()> {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for rec in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            rec.iteration,
            point_cell(&rec.mu),
            point_cell(&rec.mu_alpha),
            rec.epsilon,
            rec.r,
            rec.ell,
            rec.est_evals,
            rec.surrogate_evals,
            rec.wall_ms
        )
        .expect("write to String cannot fail");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display(), e))
}

pub fn write_validation_csv(
    path: &Path,
    table: &ValidationTable,
    params: &[ParamSpec],
) -> Result<()> {
    let mut out = String::from("im_s");
    for p in params {
        out.push(',');
        out.push_str(&p.name);
    }
    out.push_str(",abs_H,abs_Hhat,abs_error,delta\n");
    for row in &table.rows {
        if row.point.mu.len() != params.len() {
            return Err(Error::dim(
                "validation row parameter count",
                params.len(),
                row.point.mu.len(),
            ));
        }
        write!(out, "{}", row.point.s.im).expect("write to String cannot fail");
        for v in &row.point.mu {
            write!(out, ",{v}").expect("write to String cannot fail");
        }
        writeln!(
            out,
            ",{},{},{},{}",
            row.abs_h, row.abs_h_hat, row.abs_error, row.delta
        )
        .expect("write to String cannot fail");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display(), e))
}
