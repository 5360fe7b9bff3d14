//! Text format, runner and serialization behavior.

use spindemon::engine::run_swap_stage;
use spindemon_cli::emit::{outcome_csv, outcome_json, sweep_csv, sweep_json};
use spindemon_cli::program::{parse_program, serialize_program};
use spindemon_cli::runner::{run_program, run_sweep, SweepParam, SweepSpec};
use spindemon_cli::templates::Template;

const SWAP_PROGRAM: &str = "\
PARAM mu1 2
PARAM mu2 1
PARAM B 1
PARAM T1 8
PARAM T2 1
PARAM gamma 1
INIT THERMAL
CNOT 1 2 IDEAL
CNOT 2 1 IDEAL
CNOT 1 2 IDEAL
";

#[test]
fn swap_program_reproduces_the_protocol_run() {
    let program = parse_program(SWAP_PROGRAM).unwrap().program;
    let outcome = run_program(&program).unwrap();
    let reference = run_swap_stage(&program.params).unwrap();
    assert_eq!(outcome.ledger.steps.len(), reference.ledger.steps.len());
    for (a, b) in outcome.ledger.steps.iter().zip(&reference.ledger.steps) {
        assert_eq!(a.work_on_field, b.work_on_field);
    }
    assert!((outcome.simulated_w - 0.5166754935520557).abs() <= 1e-12);
}

#[test]
fn empty_instruction_list_gives_empty_ledger() {
    let text = SWAP_PROGRAM.lines().take(7).collect::<Vec<_>>().join("\n");
    let program = parse_program(&text).unwrap().program;
    let outcome = run_program(&program).unwrap();
    assert!(outcome.ledger.steps.is_empty());
    assert_eq!(outcome.simulated_w, 0.0);
    let totals = outcome.ledger.totals();
    assert_eq!(totals.q_in, 0.0);
    assert_eq!(totals.q_out, 0.0);
    assert_eq!(totals.ds_total, 0.0);

    // The JSON form carries an empty steps array and all-zero totals.
    let doc: serde_json::Value =
        serde_json::from_str(&outcome_json(&program.params, &outcome)).unwrap();
    assert_eq!(doc["steps"].as_array().unwrap().len(), 0);
    for key in ["W_out", "Q_in", "Q_out", "dS_total"] {
        assert_eq!(doc["totals"][key], 0.0, "totals.{key}");
    }
}

#[test]
fn contact_gating_is_enforced() {
    let text = format!("{SWAP_PROGRAM}CONTACT 1 OFF\nTHERMALIZE 1\n");
    let program = parse_program(&text).unwrap().program;
    let err = run_program(&program).unwrap_err();
    assert_eq!(err.instruction_index(), Some(4));

    let text = format!("{SWAP_PROGRAM}RAMP 1 2 10 ADIABATIC\n");
    let program = parse_program(&text).unwrap().program;
    let err = run_program(&program).unwrap_err();
    assert_eq!(err.instruction_index(), Some(3));
}

#[test]
fn carnot_template_hits_carnot_efficiency() {
    let template = Template::Carnot;
    let mut cfg = template.default_config();
    cfg.n_steps = 10_000;
    let outcome = template.run(&cfg).unwrap();
    let eff = outcome.efficiency.unwrap();
    assert!((eff - 0.5).abs() <= 1e-3, "efficiency {eff}");
    assert!(outcome.residuals["carnot_work"] / outcome.closed_form_w.unwrap() <= 1e-3);
}

#[test]
fn erase_template_reaches_ground_state() {
    let template = Template::Erase;
    let cfg = template.default_config();
    let outcome = template.run(&cfg).unwrap();
    assert!(outcome.residuals["final_p_up"] <= 1e-15);
    assert!(outcome.residuals["erasure_heat"] <= 1e-3);
}

#[test]
fn sweep_produces_one_row_per_grid_point() {
    let program = parse_program(SWAP_PROGRAM).unwrap().program;
    let spec = SweepSpec::new(SweepParam::B, 0.5, 1.5, 2, false).unwrap();
    let table = run_sweep(&program, &spec).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.rows[0].value, 0.5);
    assert_eq!(table.rows[1].value, 1.5);

    // Log grids need positive endpoints.
    assert!(SweepSpec::new(SweepParam::B, 0.0, 1.0, 3, true).is_err());
    assert!(SweepSpec::new(SweepParam::B, 0.1, 1.0, 1, false).is_err());
}

#[test]
fn carnot_temperature_sweep_tracks_the_bound() {
    let spec = SweepSpec::new(SweepParam::T2, 0.4, 1.8, 5, false).unwrap();
    let mut template_cfg = Template::Carnot.default_config();
    template_cfg.n_steps = 2000;
    // Sweep through the template machinery at a reduced step count.
    let table = {
        let mut rows = Vec::new();
        for value in spec.values() {
            let mut cfg = template_cfg;
            cfg.params = spindemon::SpinParams::new(
                cfg.params.mu1,
                cfg.params.mu2,
                cfg.params.b,
                cfg.params.gamma,
                cfg.params.t1,
                value,
            )
            .unwrap();
            let outcome = Template::Carnot.run(&cfg).unwrap();
            rows.push((value, outcome));
        }
        rows
    };
    for (t2, outcome) in table {
        let bound = 1.0 - t2 / 2.0;
        let eff = outcome.efficiency.unwrap();
        assert!(
            (eff - bound).abs() <= 1e-3,
            "eff {eff} vs {bound} at T2={t2}"
        );
    }
}

#[test]
fn tipped_theta_sweep_is_bounded_by_carnot() {
    let spec = SweepSpec::new(
        SweepParam::Theta,
        0.0,
        std::f64::consts::FRAC_PI_2,
        7,
        false,
    )
    .unwrap();
    let template = Template::Tipped;
    // Use fewer ramp steps than the default to keep the sweep quick.
    let table = {
        let mut rows = Vec::new();
        for value in spec.values() {
            let mut cfg = template.default_config();
            cfg.n_steps = 1500;
            cfg.theta = value;
            rows.push(template.run(&cfg).unwrap());
        }
        rows
    };
    for outcome in table {
        let eps_c = outcome.closed_form["eps_c"];
        assert!(outcome.closed_form["eps_q"] <= eps_c + 1e-12);
        assert!(outcome.efficiency.unwrap() <= eps_c + 1e-12);
    }
}

#[test]
fn json_output_is_stable_and_has_the_pinned_schema() {
    let program = parse_program(SWAP_PROGRAM).unwrap().program;
    let a = outcome_json(&program.params, &run_program(&program).unwrap());
    let b = outcome_json(&program.params, &run_program(&program).unwrap());
    assert_eq!(a, b, "two runs must serialize to identical bytes");
    let doc: serde_json::Value = serde_json::from_str(&a).unwrap();
    for key in ["params", "steps", "totals", "closed_form", "residuals"] {
        assert!(doc.get(key).is_some(), "missing key {key}");
    }
    for key in ["W_out", "Q_in", "Q_out", "dS_total"] {
        assert!(doc["totals"].get(key).is_some(), "missing totals key {key}");
    }
    // Generic program runs have no closed-form work.
    assert!(doc["closed_form"]["W"].is_null());
}

#[test]
fn swap_template_outcome_carries_the_swap_residual() {
    let template = Template::Swap;
    let cfg = template.default_config();
    let outcome = template.run(&cfg).unwrap();
    assert!(outcome.residuals["eq6"] <= 1e-10);
    let text = outcome_json(&cfg.params, &outcome);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(doc["residuals"]["eq6"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn csv_outputs_use_the_pinned_headers() {
    let program = parse_program(SWAP_PROGRAM).unwrap().program;
    let outcome = run_program(&program).unwrap();
    let csv = outcome_csv(&outcome);
    assert!(
        csv.starts_with("step,label,work_on_field,heat_res1,heat_res2,entropy_res1,entropy_res2\n")
    );
    assert_eq!(csv.lines().count(), 4);

    let spec = SweepSpec::new(SweepParam::B, 0.5, 1.5, 3, false).unwrap();
    let table = run_sweep(&program, &spec).unwrap();
    let csv = sweep_csv(&table);
    assert!(csv.starts_with(
        "param,value,W_out,Q_in,Q_out,dS_total,efficiency,efficiency_bound,closed_form_W\n"
    ));
    assert_eq!(csv.lines().count(), 4);
    let json = sweep_json(&table);
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(doc["param"], "B");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn canonical_form_fixpoint_over_template_texts() {
    for template in [Template::Swap, Template::Carnot, Template::Erase] {
        let text = template.program_text(&template.default_config()).unwrap();
        let first = parse_program(&text).unwrap().program;
        let canon = serialize_program(&first);
        let second = parse_program(&canon).unwrap().program;
        assert_eq!(first, second, "template {}", template.name());
        assert_eq!(canon, serialize_program(&second));
    }
}

#[test]
fn valid_programs_are_never_rejected() {
    // Round-trip a corpus of randomly generated well-formed programs: the
    // canonical text must parse back to the same value.
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(88);
    for k in 0..50 {
        let program = spindemon_cli::check::random_program(&mut rng);
        let text = serialize_program(&program);
        let reparsed = parse_program(&text)
            .unwrap_or_else(|e| panic!("valid program {k} rejected: {e}\n{text}"))
            .program;
        assert_eq!(
            program, reparsed,
            "program {k} changed across the round trip"
        );
    }
}

#[test]
fn theta_sweep_on_a_program_needs_a_tipped_ket() {
    let program = parse_program(SWAP_PROGRAM).unwrap().program;
    let spec = SweepSpec::new(SweepParam::Theta, 0.0, 1.0, 3, false).unwrap();
    assert!(run_sweep(&program, &spec).is_err());

    let text = SWAP_PROGRAM.replace("INIT THERMAL", "INIT STATE TIPPED 0.3 DOWN");
    let program = parse_program(&text).unwrap().program;
    let table = run_sweep(&program, &spec).unwrap();
    assert_eq!(table.rows.len(), 3);
}
