//! Plain-text renderings of solver and sweep results (CSV, JSON, table).
//!
//! All output is a pure function of its inputs so repeated runs are
//! byte-identical.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ground_state::{GroundState, IdentityReport};
use crate::grid::GridFunction;
use crate::operators::Benchmark;
use crate::oracle::OracleEntry;
use crate::verifier::{SpectralReport, SweepEntry};

/// Twelve significant digits.
pub fn sig12(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

fn header(echo: &[String]) -> String {
    let mut s = String::new();
    for line in echo {
        let _ = writeln!(s, "# {line}");
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, sig12)
}

fn csv_escape(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn sweep_csv(entries: &[SweepEntry], echo: &[String]) -> String {
    let mut s = header(echo);
    s.push_str("p,lambda1,lambda2,detM,cos_angle,verdict,error\n");
    for e in entries {
        match &e.outcome {
            Ok(r) => {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},",
                    e.p,
                    sig12(r.b.eigenvalues.0),
                    sig12(r.b.eigenvalues.1),
                    sig12(r.m.det),
                    opt(r.cos_angle),
                    r.verdict
                );
            }
            Err(err) => {
                let _ = writeln!(s, "{},,,,,error,{}", e.p, csv_escape(&err.to_string()));
            }
        }
    }
    s
}

fn report_value(r: &SpectralReport) -> Result<Value> {
    Ok(serde_json::to_value(r)?)
}

pub fn sweep_json(entries: &[SweepEntry], oracle: Option<&[OracleEntry]>, echo: &[String]) -> Result<String> {
    let rows = entries
        .iter()
        .map(|e| match &e.outcome {
            Ok(r) => report_value(r),
            Err(err) => Ok(json!({ "p": e.p, "error": err.to_string() })),
        })
        .collect::<Result<Vec<_>>>()?;
    let oracle_rows = match oracle {
        None => Value::Null,
        Some(list) => Value::Array(
            list.iter()
                .map(|o| match &o.outcome {
                    Ok(r) => {
                        let mut v = serde_json::to_value(r)?;
                        v["positive_on_complement"] = json!(r.positive_on_complement());
                        v["u_spectrum_consistent"] = json!(r.u_spectrum_consistent());
                        Ok(v)
                    }
                    Err(err) => Ok(json!({ "p": o.p, "error": err.to_string() })),
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let doc = json!({
        "config": echo,
        "rows": rows,
        "oracle": oracle_rows,
    });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn oracle_csv(entries: &[SweepEntry], oracle: &[OracleEntry], echo: &[String]) -> String {
    let mut s = header(echo);
    s.push_str("p,n,u_lowest,t_lowest,t_negative_count,t_constrained_min,fstar_cos,identity_error,agrees,error\n");
    for (e, o) in entries.iter().zip(oracle) {
        match &o.outcome {
            Ok(r) => {
                let agrees = e.outcome.as_ref().is_ok_and(|rep| r.agrees_with(rep));
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},",
                    o.p,
                    r.n,
                    opt(r.u.lowest_eigenvalues.first().copied()),
                    opt(r.t.lowest_eigenvalues.first().copied()),
                    r.t.negative_count,
                    opt(r.t.constrained_minimum),
                    opt(r.fstar_cos),
                    opt(r.identity_error),
                    agrees
                );
            }
            Err(err) => {
                let _ = writeln!(s, "{},,,,,,,,false,{}", o.p, csv_escape(&err.to_string()));
            }
        }
    }
    s
}

/// Compact rounding: three decimals for large entries, three significant
/// digits for small ones.
pub fn table_number(x: f64) -> String {
    let a = x.abs();
    if a >= 0.1 {
        format!("{x:.3}")
    } else if a >= 1e-4 {
        let decimals = (2.0 - a.log10().floor()) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.2e}")
    }
}

/// Enough decimals to show two significant digits of `1 − |cos|`.
pub fn table_cos(c: f64) -> String {
    let gap = 1.0 - c.abs();
    let decimals = if gap > 0.0 {
        ((-gap.log10()).floor() as usize + 2).clamp(4, 12)
    } else {
        12
    };
    format!("{c:.decimals$}")
}

pub fn sweep_text(entries: &[SweepEntry], oracle: Option<&[OracleEntry]>) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{:>5}  {:>11}  {:>11}  {:>11}  {:>12}  {:>7}",
        "p", "lambda1", "lambda2", "det M", "cos(f,f*)", "verdict"
    );
    if oracle.is_some() {
        s.push_str("  oracle");
    }
    s.push('\n');
    for (i, e) in entries.iter().enumerate() {
        match &e.outcome {
            Ok(r) => {
                let _ = write!(
                    s,
                    "{:>5.2}  {:>11}  {:>11}  {:>11}  {:>12}  {:>7}",
                    e.p,
                    table_number(r.b.eigenvalues.0),
                    table_number(r.b.eigenvalues.1),
                    table_number(r.m.det),
                    r.cos_angle.map_or_else(|| "-".to_string(), table_cos),
                    if r.verdict { "pass" } else { "FAIL" }
                );
                if r.untested_regime {
                    s.push_str("  untested regime");
                }
                if let Some(o) = oracle.and_then(|o| o.get(i)) {
                    let tag = match &o.outcome {
                        Ok(or) if or.agrees_with(r) => "agree",
                        Ok(_) => "DISAGREE",
                        Err(_) => "error",
                    };
                    let _ = write!(s, "  {tag}");
                }
            }
            Err(err) => {
                let _ = write!(s, "{:>5.2}  error: {err}", e.p);
            }
        }
        s.push('\n');
    }
    s
}

/// `r, Q, Q_r` on the solver grid.
pub fn profile_csv(gs: &GroundState, echo: &[String]) -> String {
    let mut s = header(echo);
    let meta = gs.meta();
    let _ = writeln!(s, "# p = {}", gs.p());
    let _ = writeln!(s, "# amplitude = {}", sig12(gs.amplitude()));
    let _ = writeln!(s, "# resolved_r_max = {}", sig12(meta.r_max));
    if meta.untested_regime {
        s.push_str("# warning = untested regime (p < 1.1)\n");
    }
    s.push_str("r,Q,Q_r\n");
    let (q, qr) = (gs.q().values(), gs.qr().values());
    for (i, r) in gs.grid().radii().enumerate() {
        let _ = writeln!(s, "{},{},{}", sig12(r), sig12(q[i]), sig12(qr[i]));
    }
    s
}

pub fn curve_csv(computed: &GridFunction, exact: &GridFunction, echo: &[String]) -> Result<String> {
    if !computed.grid().same_as(exact.grid()) {
        return Err(Error::InvalidArgument("curves live on different grids".into()));
    }
    let mut s = header(echo);
    s.push_str("r,computed,exact\n");
    for (i, r) in computed.grid().radii().enumerate() {
        let _ = writeln!(s, "{},{},{}", sig12(r), sig12(computed[i]), sig12(exact[i]));
    }
    Ok(s)
}

/// Named benchmark curves, one CSV each.
pub fn benchmark_csvs(bm: &Benchmark, echo: &[String]) -> Result<Vec<(&'static str, String)>> {
    Ok(vec![
        ("u_h1", curve_csv(&bm.u_h1, &bm.w1, echo)?),
        ("u_h2", curve_csv(&bm.u_h2, &bm.w2, echo)?),
        ("inv_w1", curve_csv(&bm.inv_w1, &bm.h1_tilde, echo)?),
        ("inv_w2", curve_csv(&bm.inv_w2, &bm.h2_tilde, echo)?),
    ])
}

pub fn benchmark_text(p: f64, bm: &Benchmark) -> String {
    let d = &bm.deviations;
    let mut s = String::new();
    let _ = writeln!(s, "p = {p}");
    let _ = writeln!(s, "  |U h1 - w1| / |w1|            = {:.3e}", d.direct_h1);
    let _ = writeln!(s, "  |U h2 - w2| / |w2|            = {:.3e}", d.direct_h2);
    let _ = writeln!(s, "  |U^-1 w1 - h1~| / |h1~|       = {:.3e}", d.inverse_h1);
    let _ = writeln!(s, "  |U^-1 w2 - h2~| / |h2~|       = {:.3e}", d.inverse_h2);
    let _ = writeln!(s, "  |U f| / |f|                   = {:.3e}", d.kernel_residual);
    s
}

pub fn identity_text(id: &IdentityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "p = {}", id.p);
    let _ = writeln!(s, "  |Q|_2^2                  = {}", sig12(id.mass));
    let _ = writeln!(s, "  |grad Q|_2^2             = {}", sig12(id.grad_norm_sq));
    let _ = writeln!(s, "  |Q|_{{p+1}}^{{p+1}}          = {}", sig12(id.lp_norm));
    let _ = writeln!(s, "  <Lambda Q, Q>            = {}", sig12(id.lambda_pair));
    let _ = writeln!(s, "  residuals                = {:.3e} {:.3e} {:.3e}", id.residual_p1, id.residual_p2, id.residual_lambda);
    s
}

/// `r, f, f*` for one verified `p`.
pub fn fstar_csv(report: &SpectralReport, f: &GridFunction, echo: &[String]) -> Result<Option<String>> {
    let Some(fs) = &report.fstar else { return Ok(None) };
    curve_csv(fs, f, echo).map(|body| {
        Some(body.replacen("r,computed,exact", "r,fstar,f", 1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_has_twelve_digits() {
        assert_eq!(sig12(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(sig12(-17.884651), "-1.78846510000e1");
    }

    #[test]
    fn table_rounding() {
        assert_eq!(table_number(-17.88465), "-17.885");
        assert_eq!(table_number(0.3274806), "0.327");
        assert_eq!(table_number(-6.12551e-4), "-0.000613");
        assert_eq!(table_number(-0.0157), "-0.0157");
        assert_eq!(table_number(5.646146e-10), "5.65e-10");
        assert_eq!(table_cos(-0.98928668), "-0.9893");
        assert_eq!(table_cos(-0.99999233), "-0.9999923");
    }
}
