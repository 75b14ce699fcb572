//! Deterministic text artifacts: CSV tables and plain-text summaries.
//!
//! Every float prints with 17 significant digits (`{:.16e}`), enough for
//! f64 round-trips to reproduce the exact bit pattern. Writers are pure
//! functions of their inputs, so byte-identical files mean bit-identical
//! numbers; reproducibility checks compare artifacts directly.
//!
//! Layout conventions: comma separator, one header line, `\n` endings, a
//! trailing newline, and empty inputs produce a header-only file.

use crate::domination::DominationReport;
use crate::orbits::OrbitCatalog;
use crate::pressure::bowen::BowenLevel;
use crate::pressure::{PressureEstimate, SeriesPoint};
use crate::systems::{Potential, SystemDef};
use crate::transition::{PressureCurve, TransitionReport};

/// Canonical float rendering: 17 significant digits, scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Minimal CSV quoting: fields with commas, quotes or newlines get wrapped
/// and their quotes doubled; everything else passes through untouched.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Orbit table: one row per orbit, exponents descending-first.
pub fn catalog_csv(catalog: &OrbitCatalog) -> String {
    let mut out = String::from(
        "index,period,rep_x,rep_y,class,lambda_plus,lambda_minus,delta,residual\n",
    );
    for (i, o) in catalog.orbits().iter().enumerate() {
        let rep = o.representative();
        let [lo, hi] = o.exponents();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            i,
            o.period(),
            fmt_f64(rep.x),
            fmt_f64(rep.y),
            o.classification().as_str(),
            fmt_f64(hi),
            fmt_f64(lo),
            fmt_f64(o.delta()),
            fmt_f64(o.residual()),
        ));
    }
    out
}

/// Generic two-column numeric series.
pub fn series_csv(x_name: &str, y_name: &str, pts: &[SeriesPoint]) -> String {
    let mut out = format!("{},{}\n", csv_field(x_name), csv_field(y_name));
    for p in pts {
        out.push_str(&format!("{},{}\n", p.n, fmt_f64(p.value)));
    }
    out
}

/// Headline block for one estimate: stable key-value lines.
pub fn estimate_summary(est: &PressureEstimate) -> String {
    let mut out = String::new();
    out.push_str(&format!("method: {}\n", est.method.as_str()));
    out.push_str(&format!("bound: {}\n", est.bound.as_str()));
    out.push_str(&format!("value: {}\n", fmt_f64(est.value)));
    out.push_str(&format!("params: {}\n", est.params));
    if est.flags.is_empty() {
        out.push_str("flags: none\n");
    } else {
        out.push_str(&format!("flags: {}\n", est.flags.join("; ")));
    }
    if let Some(w) = &est.witness {
        let rep = w.representative();
        out.push_str(&format!(
            "witness: period={} rep=({}, {}) class={}\n",
            w.period(),
            fmt_f64(rep.x),
            fmt_f64(rep.y),
            w.classification().as_str(),
        ));
    }
    out
}

/// Verdict table: one row per tested N per report. Segment reports carry
/// no verdicts and contribute no rows; their ratio sequences go through
/// [`gap_csv`].
pub fn domination_csv(reports: &[DominationReport]) -> String {
    let mut out = String::from("rep_x,rep_y,period,source,horizon,n,verdict,reason\n");
    for r in reports {
        let period = r.period.map_or(String::new(), |p| p.to_string());
        let reason = r.reason.as_deref().unwrap_or("");
        for &(n, verdict) in &r.tested {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt_f64(r.representative.x),
                fmt_f64(r.representative.y),
                period,
                r.source.as_str(),
                r.horizon,
                n,
                verdict.as_str(),
                csv_field(reason),
            ));
        }
    }
    out
}

/// Per-horizon spanning-set record: size and resolution of each level.
pub fn bowen_levels_csv(levels: &[BowenLevel]) -> String {
    let mut out = String::from("n,log_q,cover_size,ball_average\n");
    for l in levels {
        out.push_str(&format!(
            "{},{},{},{}\n",
            l.n,
            fmt_f64(l.log_q),
            l.cover_size,
            fmt_f64(l.ball_average),
        ));
    }
    out
}

/// Singular-value gap sequence `g_n` along one segment.
pub fn gap_csv(gaps: &[f64]) -> String {
    let mut out = String::from("n,gap\n");
    for (i, g) in gaps.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, fmt_f64(*g)));
    }
    out
}

/// Sampled pressure curve rows.
pub fn curve_csv(curve: &PressureCurve) -> String {
    let mut out = String::from("t,value,orbit_index\n");
    for p in &curve.points {
        out.push_str(&format!("{},{},{}\n", fmt_f64(p.t), fmt_f64(p.value), p.orbit_index));
    }
    out
}

/// Text block with the transition headline: crossing, kinks, candidates.
pub fn transition_summary(report: &TransitionReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("m: {}\n", report.m));
    out.push_str(&format!("t0: {}\n", fmt_f64(report.transition.t0)));
    out.push_str(&format!("t0_orbit_index: {}\n", report.transition.orbit_index));
    let kinks: Vec<String> = report.curve.kinks.iter().map(|k| fmt_f64(*k)).collect();
    out.push_str(&format!("kinks: [{}]\n", kinks.join(" ")));
    out.push_str(&format!(
        "pressure_at_unit: {}\n",
        fmt_f64(report.pressure_at_unit.value)
    ));
    let ids: Vec<String> = report.candidates.iter().map(|i| i.to_string()).collect();
    out.push_str(&format!("candidates: [{}]\n", ids.join(" ")));
    out.push_str(&format!("candidate_tol: {}\n", fmt_f64(report.candidate_tol)));
    out
}

/// Candidate table resolved against the catalog: exponents and averages of
/// the orbits the screen retained.
pub fn candidates_csv(
    catalog: &OrbitCatalog,
    sys: &SystemDef,
    pot: &Potential,
    indices: &[usize],
) -> String {
    let mut out =
        String::from("index,period,rep_x,rep_y,class,lambda_plus,potential_average\n");
    for &i in indices {
        let o = &catalog.orbits()[i];
        let rep = o.representative();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            i,
            o.period(),
            fmt_f64(rep.x),
            fmt_f64(rep.y),
            o.classification().as_str(),
            fmt_f64(o.exponents()[1]),
            fmt_f64(o.potential_average(sys, pot)),
        ));
    }
    out
}
