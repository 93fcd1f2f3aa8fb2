//! Text, JSON and CSV renderings of an analysis report.
//!
//! Text output shows two decimals in the `"X.XX (L.LL,U.UU)"` layout of
//! published interaction tables; JSON keeps full precision.

use crate::analysis::{Report, TermEstimate};
use addodds::CiMethod;
use std::fmt::Write as _;
use std::io::{self, Write};

/// Two decimals, rounding the exact binary value half-to-even, with `-0.00` shown as `0.00`.
pub fn fmt2(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// `"3.60 (3.34,3.87)"`.
pub fn render_estimate(point: f64, low: f64, high: f64) -> String {
    format!("{} ({},{})", fmt2(point), fmt2(low), fmt2(high))
}

pub fn method_name(m: CiMethod) -> &'static str {
    match m {
        CiMethod::Delta => "delta",
        CiMethod::BootstrapPercentile => "bootstrap",
    }
}

fn percent(confidence: f64) -> String {
    let p = confidence * 100.0;
    if (p - p.round()).abs() < 1e-9 {
        format!("{}%", p.round())
    } else {
        format!("{p:.1}%")
    }
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let f = &report.fit;
    let _ = writeln!(
        out,
        "Fit ({} model): {} records ({} cases, {} controls); converged in {} iterations; \
         log-likelihood {:.4}; score max-norm {:.2e}",
        f.strategy, f.records, f.cases, f.controls, f.iterations, f.loglik, f.gradient_norm
    );
    let _ = writeln!(out);
    let width = f
        .psi
        .iter()
        .chain(&f.covariates)
        .map(|t| t.term.chars().count())
        .max()
        .unwrap_or(0)
        .max("intercept".len());
    let _ = writeln!(out, "{:<width$}  {:>10}  {:>9}  {:>9}", "term", "log OR", "SE", "OR");
    for t in &f.psi {
        let _ = writeln!(out, "{:<width$}  {:>10.4}  {:>9.4}  {:>9.4}", t.term, t.estimate, t.se, t.estimate.exp());
    }
    let coef = |out: &mut String, t: &TermEstimate, tail: &str| {
        let _ = writeln!(out, "{:<width$}  {:>10.4}  {:>9.4}  {tail}", t.term, t.estimate, t.se);
    };
    for t in &f.covariates {
        coef(&mut out, t, "");
    }
    coef(&mut out, &f.intercept, "(not interpretable)");
    let _ = writeln!(out);

    let header = format!("Estimate ({} CI)", percent(report.confidence));
    let label_w = report.measures.iter().map(|m| m.label.chars().count()).max().unwrap_or(0).max("Measure".len());
    let effect_w = report.measures.iter().map(|m| m.effect.chars().count()).max().unwrap_or(0).max("Effect".len());
    let _ = writeln!(out, "{:<label_w$}  {:<effect_w$}  {:<22}  Method", "Measure", "Effect", header);
    for m in &report.measures {
        for e in &m.estimates {
            let cell = render_estimate(e.point, e.ci_low, e.ci_high);
            let _ = writeln!(out, "{:<label_w$}  {:<effect_w$}  {:<22}  {}", m.label, m.effect, cell, method_name(e.method));
            for note in &e.notes {
                let _ = writeln!(out, "{:<label_w$}  note: {note}", "");
            }
        }
        for err in &m.errors {
            let cell = m.point.map_or_else(|| "undefined".to_string(), fmt2);
            let _ = writeln!(out, "{:<label_w$}  {:<effect_w$}  {:<22}  error: {err}", m.label, m.effect, cell);
        }
    }
    if !report.notes.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "Notes:");
        for n in &report.notes {
            let _ = writeln!(out, "  - {n}");
        }
    }
    out
}

pub fn render_json(report: &Report) -> serde_json::Result<String> {
    serde_json::to_string_pretty(report)
}

pub fn write_csv<W: Write>(out: W, report: &Report) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "effect", "kind", "order", "method", "point", "ci_low", "ci_high", "se_transformed", "alpha", "error"])?;
    for m in &report.measures {
        let order = m.order.to_string();
        for e in &m.estimates {
            w.write_record([
                m.label.as_str(),
                &m.effect,
                m.kind.name(),
                &order,
                method_name(e.method),
                &e.point.to_string(),
                &e.ci_low.to_string(),
                &e.ci_high.to_string(),
                &e.se_transformed.to_string(),
                &e.alpha.to_string(),
                "",
            ])?;
        }
        for err in &m.errors {
            let point = m.point.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([m.label.as_str(), &m.effect, m.kind.name(), &order, "", &point, "", "", "", "", err])?;
        }
    }
    w.flush()
}
