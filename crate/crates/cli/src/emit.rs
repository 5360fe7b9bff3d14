//! Ledger and sweep serialization.
//!
//! JSON objects have a fixed top-level key order (`params`, `steps`,
//! `totals`, `closed_form`, `residuals`); the two map-valued members are
//! alphabetically ordered. Floating-point values are rendered as shortest
//! round-trip decimals, so identical runs emit identical bytes.

use crate::runner::SweepTable;
use serde::Serialize;
use spindemon::{CycleOutcome, SpinParams};

/// Folds negative zero into plain zero so output bytes do not depend on the
/// sign of a vanished sum.
fn z(v: f64) -> f64 {
    v + 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn from_name(name: &str) -> Option<Format> {
        match name.to_ascii_lowercase().as_str() {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

#[derive(Serialize)]
struct JsonParams {
    mu1: f64,
    mu2: f64,
    #[serde(rename = "B")]
    b: f64,
    gamma: f64,
    #[serde(rename = "T1")]
    t1: f64,
    #[serde(rename = "T2")]
    t2: f64,
}

impl From<&SpinParams> for JsonParams {
    fn from(p: &SpinParams) -> JsonParams {
        JsonParams {
            mu1: p.mu1,
            mu2: p.mu2,
            b: p.b,
            gamma: p.gamma,
            t1: p.t1,
            t2: p.t2,
        }
    }
}

#[derive(Serialize)]
struct JsonStep<'a> {
    step: usize,
    label: &'a str,
    work_on_field: f64,
    heat_res1: f64,
    heat_res2: f64,
    entropy_res1: f64,
    entropy_res2: f64,
}

#[derive(Serialize)]
struct JsonTotals {
    #[serde(rename = "W_out")]
    w_out: f64,
    #[serde(rename = "Q_in")]
    q_in: f64,
    #[serde(rename = "Q_out")]
    q_out: f64,
    #[serde(rename = "dS_total")]
    ds_total: f64,
}

#[derive(Serialize)]
struct JsonOutcome<'a> {
    params: JsonParams,
    steps: Vec<JsonStep<'a>>,
    totals: JsonTotals,
    closed_form: std::collections::BTreeMap<String, serde_json::Value>,
    residuals: &'a std::collections::BTreeMap<String, f64>,
}

/// Serialize one protocol outcome as JSON.
pub fn outcome_json(params: &SpinParams, outcome: &CycleOutcome) -> String {
    let steps = outcome
        .ledger
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| JsonStep {
            step: i,
            label: &s.label,
            work_on_field: z(s.work_on_field),
            heat_res1: z(s.heat_from_res1),
            heat_res2: z(s.heat_from_res2),
            entropy_res1: z(s.entropy_to_res1),
            entropy_res2: z(s.entropy_to_res2),
        })
        .collect();
    let totals = outcome.ledger.totals();
    let mut closed_form: std::collections::BTreeMap<String, serde_json::Value> = outcome
        .closed_form
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::json!(v)))
        .collect();
    closed_form.insert(
        "W".into(),
        match outcome.closed_form_w {
            Some(w) => serde_json::json!(w),
            None => serde_json::Value::Null,
        },
    );
    closed_form.insert(
        "efficiency_bound".into(),
        serde_json::json!(outcome.efficiency_bound),
    );
    let doc = JsonOutcome {
        params: params.into(),
        steps,
        totals: JsonTotals {
            w_out: z(totals.w_out),
            q_in: z(totals.q_in),
            q_out: z(totals.q_out),
            ds_total: z(totals.ds_total),
        },
        closed_form,
        residuals: &outcome.residuals,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("ledger values are finite");
    text.push('\n');
    text
}

/// Serialize one protocol outcome as CSV, one row per ledger step.
pub fn outcome_csv(outcome: &CycleOutcome) -> String {
    let mut out =
        String::from("step,label,work_on_field,heat_res1,heat_res2,entropy_res1,entropy_res2\n");
    for (i, s) in outcome.ledger.steps.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            i,
            s.label,
            z(s.work_on_field),
            z(s.heat_from_res1),
            z(s.heat_from_res2),
            z(s.entropy_to_res1),
            z(s.entropy_to_res2)
        ));
    }
    out
}

#[derive(Serialize)]
struct JsonSweepRow {
    value: f64,
    #[serde(rename = "W_out")]
    w_out: f64,
    #[serde(rename = "Q_in")]
    q_in: f64,
    #[serde(rename = "Q_out")]
    q_out: f64,
    #[serde(rename = "dS_total")]
    ds_total: f64,
    efficiency: Option<f64>,
    efficiency_bound: f64,
    #[serde(rename = "closed_form_W")]
    closed_form_w: Option<f64>,
}

#[derive(Serialize)]
struct JsonSweep<'a> {
    param: &'a str,
    rows: Vec<JsonSweepRow>,
}

/// Serialize a sweep as JSON, rows in grid order.
pub fn sweep_json(table: &SweepTable) -> String {
    let rows = table
        .rows
        .iter()
        .map(|r| JsonSweepRow {
            value: z(r.value),
            w_out: z(r.w_out),
            q_in: z(r.q_in),
            q_out: z(r.q_out),
            ds_total: z(r.ds_total),
            efficiency: r.efficiency.map(z),
            efficiency_bound: z(r.efficiency_bound),
            closed_form_w: r.closed_form_w.map(z),
        })
        .collect();
    let doc = JsonSweep {
        param: table.param,
        rows,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("sweep values are finite");
    text.push('\n');
    text
}

/// Serialize a sweep as CSV, one row per grid point; optional columns are
/// left empty when absent.
pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from(
        "param,value,W_out,Q_in,Q_out,dS_total,efficiency,efficiency_bound,closed_form_W\n",
    );
    let opt = |v: Option<f64>| v.map(|x| z(x).to_string()).unwrap_or_default();
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            table.param,
            z(r.value),
            z(r.w_out),
            z(r.q_in),
            z(r.q_out),
            z(r.ds_total),
            opt(r.efficiency),
            z(r.efficiency_bound),
            opt(r.closed_form_w)
        ));
    }
    out
}
