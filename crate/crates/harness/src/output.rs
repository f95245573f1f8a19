//! CSV tables, debug dumps and the terminal summary.

use std::fs;
use std::path::{Path, PathBuf};

use ebm_core::assembly::OperatorSystem;
use ebm_core::interpolation::Method;
use ebm_core::{Axis, GridContext};
use serde::Serialize;

use crate::error::Result;
use crate::runs::ResultRow;

/// Writes `rows` with a header to `dir/name`, creating `dir`.
pub fn write_csv<R: Serialize>(dir: &Path, name: &str, rows: &[R]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(path)
}

/// Zeroes the wall-time columns so reruns produce identical files.
pub fn strip_timings(rows: &mut [ResultRow]) {
    for r in rows {
        r.t_setup_s = 0.0;
        r.t_solve_s = 0.0;
    }
}

/// ASCII picture of the classification, top row first.
pub fn dump_mask(dir: &Path, stem: &str, ctx: &GridContext<f64>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}_mask.txt"));
    fs::write(&path, ctx.class.to_ascii())?;
    Ok(path)
}

/// Matrix Market export of `A`.
pub fn dump_matrix(dir: &Path, stem: &str, sys: &OperatorSystem<f64>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}_matrix.mtx"));
    fs::write(&path, sys.a.csr().to_matrix_market())?;
    Ok(path)
}

#[derive(Serialize)]
struct CorrectionRow {
    bp_i: usize,
    bp_j: usize,
    comp_i: usize,
    comp_j: usize,
    axis: &'static str,
    method: &'static str,
    w_c: f64,
    nodes: usize,
    beta_face: f64,
}

/// One line per boundary correction.
pub fn dump_corrections(dir: &Path, stem: &str, sys: &OperatorSystem<f64>) -> Result<PathBuf> {
    let rows: Vec<_> = sys
        .corrections
        .iter()
        .map(|c| CorrectionRow {
            bp_i: c.bp.0,
            bp_j: c.bp.1,
            comp_i: c.comp.0,
            comp_j: c.comp.1,
            axis: match c.axis {
                Axis::X => "x",
                Axis::Y => "y",
            },
            method: match c.method {
                Method::Line => "line",
                Method::Rbf => "rbf",
            },
            w_c: c.w_c,
            nodes: c.nodes.len(),
            beta_face: c.beta_face,
        })
        .collect();
    write_csv(dir, &format!("{stem}_corrections.csv"), &rows)
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.prec$e}"))
}

fn opt_fixed(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.2}"))
}

/// Fixed-width convergence table for the terminal.
pub fn summary(rows: &[ResultRow]) -> String {
    let mut s = format!(
        "{:>6} {:>10} {:>10} {:>10} {:>6} {:>6} {:>10} {:>10} {:>6} {}\n",
        "N", "h", "E_l2", "E_linf", "r_l2", "r_linf", "grad_l2", "grad_linf", "iters", "certified"
    );
    for r in rows {
        s += &format!(
            "{:>6} {:>10.3e} {:>10} {:>10} {:>6} {:>6} {:>10} {:>10} {:>6} {}\n",
            r.n,
            r.h,
            opt(r.e_l2, 3),
            opt(r.e_linf, 3),
            opt_fixed(r.rate_l2),
            opt_fixed(r.rate_linf),
            opt(r.grad_l2, 3),
            opt(r.grad_linf, 3),
            r.iters.map_or_else(|| "-".into(), |i| format!("{i:.1}")),
            r.certified
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize) -> ResultRow {
        ResultRow {
            n,
            h: 1.0 / n as f64,
            e_l2: Some(1e-3),
            e_linf: None,
            rate_l2: None,
            rate_linf: None,
            grad_l2: None,
            grad_linf: None,
            iters: Some(8.0),
            certified: "certified".into(),
            t_setup_s: 0.5,
            t_solve_s: 0.25,
        }
    }

    #[test]
    fn csv_header_has_fixed_column_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(dir.path(), "t.csv", &[row(50)]).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "N,h,E_l2,E_linf,rate_l2,rate_linf,grad_l2,grad_linf,iters,certified,t_setup_s,t_solve_s"
        );
        assert!(text.lines().nth(1).unwrap().starts_with("50,0.02,0.001,,"));
    }

    #[test]
    fn stripped_rows_are_identical() {
        let mut a = vec![row(50)];
        let mut b = vec![ResultRow { t_solve_s: 9.0, ..row(50) }];
        strip_timings(&mut a);
        strip_timings(&mut b);
        assert_eq!(a, b);
    }

    #[test]
    fn summary_marks_missing_values() {
        let s = summary(&[row(50)]);
        assert_eq!(s.lines().count(), 2);
        assert!(s.contains(" - "));
    }
}
