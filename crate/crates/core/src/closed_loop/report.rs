//! Text outputs: episode traces as CSV, planning cycles as a readable table, and
//! experiment statistics as JSON.

use std::fmt::Write as _;
use std::io::Write;

use crate::closed_loop::episode::EpisodeTrace;
use crate::closed_loop::experiment::ExperimentReport;
use crate::closed_loop::planner::{analyze, CyclePlan};
use crate::error::Result;

pub const TRACE_HEADER: [&str; 16] = [
    "record",
    "cycle",
    "t",
    "vehicle_id",
    "x",
    "y",
    "theta",
    "v",
    "a",
    "delta",
    "belief_assert",
    "belief_yield",
    "row",
    "column",
    "equilibrium",
    "note",
];

fn num(x: f64) -> String {
    format!("{x}")
}

/// One `state` row per vehicle per truth step, a `belief` row per tracked vehicle and a
/// `selection` row per cycle, and a final `outcome` row.
pub fn write_trace_csv<W: Write>(trace: &EpisodeTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    let empty = String::new;
    let state_rows = |w: &mut csv::Writer<W>, step: &crate::closed_loop::episode::StepRecord| -> Result<()> {
        for (k, (s, u)) in step.states.iter().zip(&step.inputs).enumerate() {
            w.write_record([
                "state".into(),
                step.cycle.to_string(),
                num(step.t),
                trace.vehicle_ids[k].to_string(),
                num(s.x),
                num(s.y),
                num(s.theta),
                num(s.v),
                num(u.a),
                num(u.delta),
                empty(),
                empty(),
                empty(),
                empty(),
                empty(),
                empty(),
            ])?;
        }
        Ok(())
    };

    let (initial, rest) = trace.steps.split_first().expect("trace has an initial state");
    state_rows(&mut w, initial)?;
    for c in &trace.cycles {
        for (id, b) in &c.beliefs {
            w.write_record([
                "belief".into(),
                c.cycle.to_string(),
                num(c.t),
                id.to_string(),
                empty(),
                empty(),
                empty(),
                empty(),
                empty(),
                empty(),
                num(b.probs[0]),
                num(b.probs[1]),
                empty(),
                empty(),
                empty(),
                empty(),
            ])?;
        }
        w.write_record([
            "selection".into(),
            c.cycle.to_string(),
            num(c.t),
            c.partner.map(|p| p.to_string()).unwrap_or_default(),
            empty(),
            empty(),
            empty(),
            empty(),
            empty(),
            empty(),
            empty(),
            empty(),
            c.row.to_string(),
            c.col.to_string(),
            c.kind.name().into(),
            c.sequence.to_string(),
        ])?;
        for step in rest.iter().filter(|s| s.cycle == c.cycle) {
            state_rows(&mut w, step)?;
        }
    }
    let last = trace.steps.last().map_or(0.0, |s| s.t);
    w.write_record([
        "outcome".into(),
        trace.cycles.len().to_string(),
        num(trace.time_to_merge.unwrap_or(last)),
        empty(),
        empty(),
        empty(),
        empty(),
        empty(),
        empty(),
        empty(),
        empty(),
        empty(),
        empty(),
        empty(),
        empty(),
        trace.outcome.name().into(),
    ])?;
    w.flush()?;
    Ok(())
}

/// Human-readable cost matrix with every solution concept marked.
pub fn render_plan(plan: &CyclePlan) -> String {
    let g = &plan.game;
    let a = analyze(g);
    let mut s = String::new();
    let _ = writeln!(s, "rows: {}  columns: {}", g.rows.len(), g.columns.len());
    let _ = writeln!(
        s,
        "marks: N = pure Nash, E = Stackelberg (EV leads), S = Stackelberg (SV leads), * = executed"
    );
    let _ = writeln!(
        s,
        "{:>4}  {:<7} {:>7} {:>7}  {:>12} {:>12} {:<5}  sequence",
        "col", "row", "partner", "b(A)", "J_SV", "J_EV", "marks"
    );
    for j in 0..g.columns.len() {
        for (i, row) in g.rows.iter().enumerate() {
            let mut marks = String::new();
            if a.nash.iter().any(|e| e.cell() == (i, j)) {
                marks.push('N');
            }
            if a.se_ev.cell() == (i, j) {
                marks.push('E');
            }
            if a.se_sv.cell() == (i, j) {
                marks.push('S');
            }
            if (plan.choice.row, plan.choice.col) == (i, j) {
                marks.push('*');
            }
            let _ = writeln!(
                s,
                "{:>4}  {:<7} {:>7} {:>7.3}  {:>12.3} {:>12.3} {:<5}  {}",
                j,
                format!("{row:?}"),
                g.partners[j].map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
                g.beliefs[j].assert(),
                g.costs.sv(i, j),
                g.costs.ev(i, j),
                marks,
                g.columns[j]
            );
        }
    }
    let _ = writeln!(s, "pure Nash equilibria: {}", a.nash.len());
    let _ = writeln!(
        s,
        "selected: row {} column {} ({}) first decision {}",
        plan.choice.row,
        plan.choice.col,
        plan.choice.kind.name(),
        plan.sequence().first()
    );
    s
}

pub fn write_report_json<W: Write>(report: &ExperimentReport, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    Ok(())
}
