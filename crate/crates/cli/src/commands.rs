use matchstat::asympt::{
    covariance_poissonized, exponential_regime_check, prop62_check, prop63_check, thm11_expansion, thm13_residuals,
    thm15_residuals, ResidualSeries,
};
use matchstat::bigreal::{round_trip_digits, to_decimal};
use matchstat::combinat::{cov_cor, gkj_table, joint_histogram, mc_scaled_covariance, SummaryRow};
use matchstat::detkernel::{toeplitz_det, toeplitz_hankel_det, Certified, DetOptions};
use matchstat::moments::{MomentKind, MomentSequence};
use matchstat::opflow::{
    joint_cdf, joint_cdf_poisson, lt_cdf, lt_prop1_quadrature, nes_marginal_cdf, nes_prop1_quadrature,
    ode_identity_checks, prop1_quadrature, DistributionPoint, QuadratureResult,
};
use matchstat::painleve::{default_solution, perfect_derivative_check, TwDistribution, TwKind};
use matchstat::walks::{conditional_kj, conditional_kj_exact, karlin_mcgregor_prob, simulate_event_prob};
use matchstat::{Error, Exec, Result};
use rug::Float;
use serde_json::{json, Value};

use crate::report::{certified_digits, to_value, Output, Table};
use crate::{CdfCmd, Command, DetCmd, Kind, Prec, RouteArg, VerifyCmd, Weight};

/// Slope window for the O(1/t) expansions.
const THM_SLOPE: (f64, f64) = (-1.4, -0.7);
/// Slope window for the t^{−4/3} envelopes.
const PROP_SLOPE: (f64, f64) = (-1.8, -0.9);
/// Largest n for which the Poisson route enumerates exact tables.
const POISSON_NMAX: usize = 9;

fn det_opts(p: &Prec) -> DetOptions {
    let o = DetOptions::default().with_tol_bits(p.tol_bits);
    match p.prec_bits {
        Some(b) => o.with_start_prec(b),
        None => o,
    }
}

fn moment_kind(w: Weight, m: Option<u32>) -> Result<MomentKind> {
    match (w, m) {
        (Weight::Continuous, None) => Ok(MomentKind::Continuous),
        (Weight::Continuous, Some(_)) => Err(Error::Validation("--m applies only to the discrete weight".into())),
        (Weight::Discrete, Some(m)) => Ok(MomentKind::Discrete { m }),
        (Weight::Discrete, None) => Err(Error::Validation("the discrete weight needs --m".into())),
    }
}

fn tw_kind(k: Kind) -> TwKind {
    match k {
        Kind::Goe => TwKind::Goe,
        Kind::Gue => TwKind::Gue,
    }
}

fn certified(c: &Certified) -> Value {
    let digits = certified_digits(c.agreed_bits, c.prec_bits);
    json!({
        "value": to_decimal(&c.value, digits),
        "prec_bits": c.prec_bits,
        "agreed_bits": c.agreed_bits,
    })
}

fn point(p: &DistributionPoint) -> Value {
    let digits = certified_digits(p.certificate_bits, p.prec_bits);
    let mut v = to_value(p);
    v["value"] = json!(to_decimal(&p.value, digits));
    v["value_f64"] = json!(p.value_f64());
    if p.certificate_bits == u32::MAX {
        // Closed-form value, no precision ladder behind it.
        v["certificate_bits"] = Value::Null;
        v["exact"] = json!(true);
    }
    v
}

fn quadrature(q: &QuadratureResult, route_point: Value) -> Value {
    // The flow returns log P; report P and the log with the stability
    // that bounds both.
    let prob = Float::with_val(q.value.prec(), q.value.exp_ref());
    let digits = if q.stability > 0.0 {
        (-q.stability.log10()).floor().clamp(1.0, 30.0) as usize
    } else {
        30
    };
    let mut v = route_point;
    v["route"] = json!("prop1_quadrature");
    v["value"] = json!(to_decimal(&prob, digits));
    v["value_f64"] = json!(prob.to_f64());
    v["log_value"] = json!(to_decimal(&q.value, digits));
    v["nodes"] = json!(q.nodes);
    v["stability"] = json!(q.stability);
    v
}

fn series(label: &str, points: Vec<(f64, f64)>, window: (f64, f64)) -> Result<Value> {
    let s = ResidualSeries::new(label, points)?;
    let mut v = to_value(&s);
    v["slope_window"] = json!([window.0, window.1]);
    v["slope_within"] = json!(s.slope_within(window.0, window.1));
    Ok(v)
}

fn single_row(v: &Value, cols: &[&str]) -> Table {
    let mut t = Table::new(cols);
    t.push(cols.iter().map(|c| cell(&v[*c])).collect());
    t
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub fn run(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Enumerate { n } => {
            let hist = joint_histogram(*n, Exec::default())?;
            let mut table = Table::new(&["cro", "nes", "count"]);
            for (c, row) in hist.iter().enumerate() {
                for (e, &w) in row.iter().enumerate().filter(|(_, &w)| w > 0) {
                    table.push(vec![c.to_string(), e.to_string(), w.to_string()]);
                }
            }
            let total: u64 = hist.iter().flatten().sum();
            Ok(Output::with_table(json!({ "n": n, "total": total, "histogram": hist }), table))
        }
        Command::Table { n } => {
            let t = gkj_table(*n)?;
            let mut table = Table::new(&["k", "j", "g"]);
            for (k, row) in t.g.iter().enumerate() {
                for (j, g) in row.iter().enumerate() {
                    table.push(vec![k.to_string(), j.to_string(), g.to_string()]);
                }
            }
            Ok(Output::with_table(to_value(&t), table))
        }
        Command::Cov { n } => {
            let c = cov_cor(*n)?;
            let v = json!({
                "n": c.n,
                "count": c.count,
                "covariance": c.covariance.to_string(),
                "covariance_f64": c.covariance_f64(),
                "correlation": c.correlation,
                "summary": to_value(&SummaryRow::from(&c)),
            });
            let table = single_row(&v, &["n", "count", "covariance", "covariance_f64", "correlation"]);
            Ok(Output::with_table(v, table))
        }
        Command::Sample { n, reps, seed } => {
            let e = mc_scaled_covariance(*n, *reps, *seed)?;
            let v = json!({ "n": n, "seed": seed, "estimate": e.estimate, "stderr": e.stderr, "reps": e.reps });
            let table = single_row(&v, &["n", "reps", "seed", "estimate", "stderr"]);
            Ok(Output::with_table(v, table))
        }
        Command::Moments { weight, m, t, lmax, prec_bits } => {
            let kind = moment_kind(*weight, *m)?;
            let h = MomentSequence::new(kind, *t, *lmax, *prec_bits)?;
            let digits = round_trip_digits(*prec_bits);
            let top = (*lmax).min(h.max_l());
            let mut table = Table::new(&["l", "h"]);
            let mut values = Vec::new();
            for l in 0..=top {
                let s = to_decimal(h.get(l as i64), digits);
                table.push(vec![l.to_string(), s.clone()]);
                values.push(json!({ "l": l, "value": s }));
            }
            Ok(Output::with_table(
                json!({ "kind": kind, "t": t, "prec_bits": prec_bits, "moments": values }),
                table,
            ))
        }
        Command::Det { which } => {
            let (c, size) = match which {
                DetCmd::Toeplitz { weight, m, t, n, prec } => {
                    (toeplitz_det(moment_kind(*weight, *m)?, *t, *n, &det_opts(prec))?, *n)
                }
                DetCmd::Th { weight, m, t, j, prec } => {
                    (toeplitz_hankel_det(moment_kind(*weight, *m)?, *t, *j, &det_opts(prec))?, *j)
                }
            };
            let mut v = certified(&c);
            v["size"] = json!(size);
            Ok(Output::json(v))
        }
        Command::Cdf { which } => cdf(which).map(|v| {
            let table = single_row(&v, &["t", "k", "j", "l", "route", "value", "prec_bits", "certificate_bits"]);
            Output::with_table(v, table)
        }),
        Command::Tw { kind, x } => {
            let d = TwDistribution::new(tw_kind(*kind), default_solution()?);
            let v = to_value(&d.eval(*x)?);
            let table = single_row(&v, &["x", "cdf", "pdf", "pdf_prime"]);
            Ok(Output::with_table(v, table))
        }
        Command::TwTable { kind, from, to, step } => {
            if !(step > &0.0) || !(from <= to) {
                return Err(Error::Validation(format!("need step > 0 and from ≤ to, got {from}..{to} by {step}")));
            }
            let d = TwDistribution::new(tw_kind(*kind), default_solution()?);
            let count = ((to - from) / step + 1e-9).floor() as usize + 1;
            let mut rows = Vec::with_capacity(count);
            let mut table = Table::new(&["x", "cdf", "pdf", "pdf_prime"]);
            for i in 0..count {
                let tv = d.eval(from + i as f64 * step)?;
                table.push(vec![tv.x, tv.cdf, tv.pdf, tv.pdf_prime].iter().map(f64::to_string).collect());
                rows.push(tv);
            }
            let (mean, variance) = d.mean_variance()?;
            Ok(Output::with_table(
                json!({ "kind": tw_kind(*kind), "mean": mean, "variance": variance, "rows": rows }),
                table,
            ))
        }
        Command::Verify { which } => verify(which).map(Output::json),
        Command::Walks { t, walkers, reps, seed } => walks(*t, *walkers, *reps, *seed),
    }
}

fn cdf(which: &CdfCmd) -> Result<Value> {
    match which {
        CdfCmd::Joint { t, k, j, route, nmax, prec } => {
            let o = det_opts(prec);
            match route {
                RouteArg::Det => Ok(point(&joint_cdf(*t, *k, *j, &o)?)),
                RouteArg::Prop1 => {
                    let q = prop1_quadrature(*t, *k, *j, &o)?;
                    Ok(quadrature(&q, json!({ "t": t, "k": k, "j": j, "l": null })))
                }
                RouteArg::Poisson => {
                    if *nmax == 0 || *nmax > POISSON_NMAX {
                        return Err(Error::Capacity(format!("--nmax must lie in 1..={POISSON_NMAX}, got {nmax}")));
                    }
                    let tables = (1..=*nmax).map(gkj_table).collect::<Result<Vec<_>>>()?;
                    let prec = prec.prec_bits.unwrap_or(256);
                    Ok(point(&joint_cdf_poisson(*t, *k, *j, &tables, prec)?))
                }
            }
        }
        CdfCmd::Nes { t, j, route, prec } => {
            let o = det_opts(prec);
            match route {
                RouteArg::Det => Ok(point(&nes_marginal_cdf(*t, *j, &o)?)),
                RouteArg::Prop1 => {
                    let q = nes_prop1_quadrature(*t, *j, &o)?;
                    Ok(quadrature(&q, json!({ "t": t, "k": null, "j": j, "l": null })))
                }
                RouteArg::Poisson => Err(Error::Validation("the Poisson route is available for the joint law only".into())),
            }
        }
        CdfCmd::Lt { t, l, route, prec } => {
            let o = det_opts(prec);
            match route {
                RouteArg::Det => Ok(point(&lt_cdf(*t, *l, &o)?)),
                RouteArg::Prop1 => {
                    let q = lt_prop1_quadrature(*t, *l, &o)?;
                    Ok(quadrature(&q, json!({ "t": t, "k": null, "j": null, "l": l })))
                }
                RouteArg::Poisson => Err(Error::Validation("the Poisson route is available for the joint law only".into())),
            }
        }
    }
}

fn verify(which: &VerifyCmd) -> Result<Value> {
    match which {
        VerifyCmd::Thm13 { x, tgrid, prec } | VerifyCmd::Thm15 { x, tgrid, prec } => {
            let o = det_opts(prec);
            let goe = matches!(which, VerifyCmd::Thm13 { .. });
            let mut points = Vec::new();
            for &t in tgrid {
                let p = if goe { thm13_residuals(t, &[*x], &o)? } else { thm15_residuals(t, &[*x], &o)? };
                points.extend(p);
            }
            let fit = series(if goe { "nes" } else { "lt" }, points.iter().map(|p| (p.t, p.residual)).collect(), THM_SLOPE)?;
            Ok(json!({ "x": x, "points": points, "fit": fit }))
        }
        VerifyCmd::Thm11 { x, x_prime, tgrid, prec } => {
            let o = det_opts(prec);
            let points = tgrid.iter().map(|&t| thm11_expansion(t, *x, *x_prime, &o)).collect::<Result<Vec<_>>>()?;
            let fit = series("joint", points.iter().map(|p| (p.t, p.residual)).collect(), (f64::NEG_INFINITY, -0.7))?;
            let last = points.last().expect("nonempty grid after fit");
            Ok(json!({
                "points": points,
                "fit": fit,
                "correction_ratio_at_largest_t": last.correction / last.measured(),
            }))
        }
        VerifyCmd::Prop62 { tgrid, prec } | VerifyCmd::Prop63 { tgrid, prec } => {
            let o = det_opts(prec);
            let discrete = matches!(which, VerifyCmd::Prop62 { .. });
            let mut points = Vec::new();
            for &t in tgrid {
                let n = (2.0 * t).round() as usize;
                points.push(if discrete { prop62_check(t, n, n + 1, &o)? } else { prop63_check(t, n, &o)? });
            }
            let fit = series("verblunsky", points.iter().map(|p| (p.t, p.residual)).collect(), PROP_SLOPE)?;
            Ok(json!({ "points": points, "fit": fit }))
        }
        VerifyCmd::Exponential { t, delta, prec } => Ok(to_value(&exponential_regime_check(*t, *delta, &det_opts(prec))?)),
        VerifyCmd::Cov { tgrid, prec } => {
            let o = det_opts(prec);
            let points = tgrid.iter().map(|&t| covariance_poissonized(t, &o)).collect::<Result<Vec<_>>>()?;
            let gaps: Vec<f64> = points.iter().map(|p| (p.covariance - 0.25).abs()).collect();
            let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
            Ok(json!({ "points": points, "distance_to_quarter": gaps, "decreasing": decreasing }))
        }
        VerifyCmd::Identities { t, nmax, weight, m, step, prec } => {
            let kind = moment_kind(*weight, *m)?;
            Ok(to_value(&ode_identity_checks(*t, *nmax, kind, *step, &det_opts(prec))?))
        }
        VerifyCmd::Hm => {
            let sol = default_solution()?;
            let at0 = sol.at(0.0)?;
            let (goe_mean, goe_var) = TwDistribution::new(TwKind::Goe, sol).mean_variance()?;
            let (gue_mean, gue_var) = TwDistribution::new(TwKind::Gue, sol).mean_variance()?;
            Ok(json!({
                "solution": to_value(sol),
                "q0": at0.q,
                "qp0": at0.qp,
                "goe": { "mean": goe_mean, "variance": goe_var },
                "gue": { "mean": gue_mean, "variance": gue_var },
            }))
        }
        VerifyCmd::Perfect { eta, x } => {
            let c = perfect_derivative_check(default_solution()?, *eta, *x)?;
            let mut v = to_value(&c);
            v["max_residual"] = json!(c.max_residual());
            Ok(v)
        }
    }
}

fn walks(t: f64, walkers: usize, reps: usize, seed: u64) -> Result<Output> {
    let o = DetOptions::default();
    let event = simulate_event_prob(t, walkers, reps, seed)?;
    let event_exact = karlin_mcgregor_prob(t, walkers, &o)?;
    let law = conditional_kj(t, walkers, reps, seed)?;
    let mut cells = Vec::new();
    let mut table = Table::new(&["k", "j", "count", "cdf", "stderr", "exact", "z"]);
    for (k, row) in law.counts.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            let emp = law.cdf(k, j);
            let exact = if j >= 1 && j <= walkers && k + 1 < law.counts.len() {
                Some(conditional_kj_exact(t, walkers, k, j, &o)?)
            } else {
                None
            };
            let z = exact.map(|e| emp.z_score(e));
            table.push(vec![
                k.to_string(),
                j.to_string(),
                count.to_string(),
                emp.mean.to_string(),
                emp.stderr.to_string(),
                exact.map_or(String::new(), |e| e.to_string()),
                z.map_or(String::new(), |z| z.to_string()),
            ]);
            cells.push(json!({ "k": k, "j": j, "count": count, "cdf": emp, "exact": exact, "z": z }));
        }
    }
    let body = json!({
        "t": t,
        "walkers": walkers,
        "seed": seed,
        "event": { "estimate": event, "exact": event_exact, "z": event.z_score(event_exact) },
        "max_depth": law.max_depth(),
        "cells": cells,
    });
    Ok(Output::with_table(body, table))
}
