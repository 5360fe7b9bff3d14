//! The `check` subcommand: a self-contained invariant suite over the core
//! physics and the text format, printed one pass/fail line per property.

use crate::program::{
    parse_program, serialize_program, InitState, Instruction, KetSpec, PulseProgram,
};
use crate::runner::{run_program, run_program_with_state};
use crate::templates::Template;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use spindemon::engine::{run_basic_cycle, run_swap_stage, swap_work_closed, work_positive_region};
use spindemon::spins::{cnot_phase_insensitive_fidelity, cnot_pulse_sequence};
use spindemon::thermo::{delta_s_q, MeasurementChannel};
use spindemon::{CMatrix, CnotKind, Complex, DensityMatrix, RampMode, Spin, SpinParams};
use std::f64::consts::LN_2;

pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn pass(name: &'static str) -> PropertyResult {
    PropertyResult {
        name,
        passed: true,
        detail: String::new(),
    }
}

fn fail(name: &'static str, detail: String) -> PropertyResult {
    PropertyResult {
        name,
        passed: false,
        detail,
    }
}

/// Run every property; order is fixed so the output is stable.
pub fn run_all() -> Vec<PropertyResult> {
    vec![
        swap_work_property(),
        basic_efficiency_property(),
        equilibrium_null_property(),
        sign_predicate_property(),
        cnot_fidelity_property(),
        measurement_cost_property(),
        conservation_property(),
        parser_roundtrip_property(),
    ]
}

fn grid_params() -> Vec<SpinParams> {
    let mut out = Vec::new();
    let ratios = [0.1, 0.5, 0.9444, 1.1556, 1.5, 2.0];
    let x1s = [0.05, 0.3, 1.0, 2.5, 5.0];
    for &rm in &ratios {
        for &rt in &ratios {
            for &x1 in &x1s {
                // mu1 = T1 = 1, so B = x1.
                if let Ok(p) = SpinParams::new(1.0, rm, x1, 1.0, 1.0, rt) {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn swap_work_property() -> PropertyResult {
    const NAME: &str = "swap_work_closed_form";
    for p in grid_params() {
        let out = match run_swap_stage(&p) {
            Ok(o) => o,
            Err(e) => return fail(NAME, format!("{e}")),
        };
        let resid = out.residuals["eq6"];
        if resid > 1e-10 {
            return fail(NAME, format!("residual {resid:e} at {p:?}"));
        }
    }
    pass(NAME)
}

fn basic_efficiency_property() -> PropertyResult {
    const NAME: &str = "basic_cycle_efficiency";
    for p in grid_params() {
        if !work_positive_region(&p) {
            continue;
        }
        let out = match run_basic_cycle(&p) {
            Ok(o) => o,
            Err(e) => return fail(NAME, format!("{e}")),
        };
        let expect = 1.0 - p.mu2 / p.mu1;
        match out.efficiency {
            Some(eff) if (eff - expect).abs() <= 1e-10 => {}
            other => return fail(NAME, format!("efficiency {other:?} vs {expect} at {p:?}")),
        }
    }
    pass(NAME)
}

fn equilibrium_null_property() -> PropertyResult {
    const NAME: &str = "equilibrium_null";
    let mut rng = StdRng::seed_from_u64(2024);
    for _ in 0..200 {
        let t = rng.gen_range(0.3..4.0);
        let p = SpinParams::new(
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.0..2.0),
            1.0,
            t,
            t,
        )
        .expect("valid draw");
        let w = match run_swap_stage(&p) {
            Ok(o) => o.simulated_w,
            Err(e) => return fail(NAME, format!("{e}")),
        };
        if w > 1e-12 {
            return fail(NAME, format!("W = {w:e} > 0 at equilibrium, {p:?}"));
        }
    }
    pass(NAME)
}

fn sign_predicate_property() -> PropertyResult {
    const NAME: &str = "work_sign_predicate";
    let mut rng = StdRng::seed_from_u64(2025);
    for _ in 0..200 {
        let p = SpinParams::new(
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.05..2.0),
            1.0,
            rng.gen_range(0.3..5.0),
            rng.gen_range(0.3..5.0),
        )
        .expect("valid draw");
        let w = swap_work_closed(&p);
        if w.abs() > 1e-12 && work_positive_region(&p) != (w > 0.0) {
            return fail(NAME, format!("predicate mismatch at {p:?} (W={w:e})"));
        }
    }
    pass(NAME)
}

fn cnot_fidelity_property() -> PropertyResult {
    const NAME: &str = "pulse_cnot_fidelity";
    for gamma in [0.1, 1.0, 10.0] {
        let p = SpinParams::new(2.0, 1.0, 1.0, gamma, 8.0, 1.0).expect("valid");
        let u = match cnot_pulse_sequence(&p) {
            Ok(u) => u,
            Err(e) => return fail(NAME, format!("{e}")),
        };
        let f = cnot_phase_insensitive_fidelity(&u, Spin::One);
        if f < 1.0 - 1e-9 {
            return fail(NAME, format!("fidelity {f} at gamma={gamma}"));
        }
    }
    pass(NAME)
}

fn measurement_cost_property() -> PropertyResult {
    const NAME: &str = "measurement_entropy_cost";
    let ch = MeasurementChannel::single_spin_z();
    let plus = DensityMatrix::pure(&[Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)])
        .expect("valid state");
    match delta_s_q(&plus, &ch) {
        Ok(d) if (d - LN_2).abs() <= 1e-12 => {}
        Ok(d) => return fail(NAME, format!("transverse state cost {d} != ln 2")),
        Err(e) => return fail(NAME, format!("{e}")),
    }
    let mut rng = StdRng::seed_from_u64(2026);
    for _ in 0..200 {
        let rho = random_density(&mut rng, 2);
        match delta_s_q(&rho, &ch) {
            Ok(d) if d >= -1e-12 => {}
            Ok(d) => return fail(NAME, format!("entropy decreased by {d:e}")),
            Err(e) => return fail(NAME, format!("{e}")),
        }
    }
    pass(NAME)
}

fn conservation_property() -> PropertyResult {
    const NAME: &str = "conservation_laws";
    // All templates at a reduced step count, then random programs.
    for t in [
        Template::Swap,
        Template::Carnot,
        Template::Erase,
        Template::Tipped,
    ] {
        let mut cfg = t.default_config();
        cfg.n_steps = cfg.n_steps.min(500);
        let out = match t.run(&cfg) {
            Ok(o) => o,
            Err(e) => return fail(NAME, format!("template {}: {e}", t.name())),
        };
        let first = out.residuals.get("first_law").copied().unwrap_or(0.0);
        if first > 1e-10 {
            return fail(NAME, format!("template {} first law {first:e}", t.name()));
        }
    }
    let mut rng = StdRng::seed_from_u64(2027);
    for k in 0..25 {
        let program = random_program(&mut rng);
        let out = match run_program(&program) {
            Ok(o) => o,
            Err(e) => return fail(NAME, format!("random program {k}: {e}")),
        };
        let first = out.residuals["first_law"];
        let second = out.residuals["second_law_margin"];
        if first > 1e-10 {
            return fail(NAME, format!("random program {k}: first law {first:e}"));
        }
        if second < -1e-10 {
            return fail(NAME, format!("random program {k}: entropy {second:e}"));
        }
    }
    pass(NAME)
}

fn parser_roundtrip_property() -> PropertyResult {
    const NAME: &str = "parser_roundtrip";
    for t in [Template::Swap, Template::Carnot, Template::Erase] {
        let cfg = t.default_config();
        let text = t.program_text(&cfg).expect("text-backed");
        let first = match parse_program(&text) {
            Ok(p) => p,
            Err(e) => return fail(NAME, format!("template {}: {e}", t.name())),
        };
        let canon = serialize_program(&first.program);
        match parse_program(&canon) {
            Ok(second) if second.program == first.program => {}
            Ok(_) => return fail(NAME, format!("template {} not a fixpoint", t.name())),
            Err(e) => return fail(NAME, format!("template {} reparse: {e}", t.name())),
        }
    }
    // A few corrupted programs must fail with a line number.
    let base = Template::Swap
        .program_text(&Template::Swap.default_config())
        .expect("text-backed");
    for bad in mutate_program_texts(&base, 10, 77) {
        match parse_program(&bad) {
            Err(e) if e.line >= 1 => {}
            Err(e) => return fail(NAME, format!("error without a line: {e}")),
            Ok(_) => return fail(NAME, "mutated program accepted".into()),
        }
    }
    pass(NAME)
}

/// Deterministically corrupt a valid program `count` ways; every output is
/// invalid and must be rejected with a located error.
pub fn mutate_program_texts(base: &str, count: usize, seed: u64) -> Vec<String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let lines: Vec<&str> = base.lines().collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut mutated: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
        match rng.gen_range(0..6) {
            // Unknown keyword somewhere after INIT.
            0 => mutated.push("FROBNICATE 1".into()),
            // Corrupt a number.
            1 => {
                let i = rng.gen_range(0..mutated.len());
                mutated[i] = mutated[i].replace(|c: char| c.is_ascii_digit(), "x");
                if mutated[i] == lines[i] {
                    mutated.push("PARAM B not-a-number".into());
                }
            }
            // Out-of-range spin index.
            2 => mutated.push(format!("MEASURE {}", rng.gen_range(3..9))),
            // Instruction before the parameter block.
            3 => mutated.insert(0, "CNOT 1 2 IDEAL".into()),
            // Remove a required parameter.
            4 => {
                mutated.retain(|l| !l.to_ascii_lowercase().contains("param t2"));
                if mutated.len() == lines.len() {
                    mutated.insert(0, "WAIT 1".into());
                }
            }
            // Truncated instruction.
            _ => mutated.push("RAMP 2 3".into()),
        }
        out.push(mutated.join("\n") + "\n");
    }
    out
}

/// A random but well-formed program: valid parameters and an instruction
/// stream that respects the contact gating.
pub fn random_program(rng: &mut StdRng) -> PulseProgram {
    let params = SpinParams::new(
        rng.gen_range(0.3..2.5),
        rng.gen_range(0.3..2.5),
        rng.gen_range(0.1..2.0),
        rng.gen_range(0.1..3.0),
        rng.gen_range(0.4..4.0),
        rng.gen_range(0.4..4.0),
    )
    .expect("valid draw");
    let init = match rng.gen_range(0..4) {
        0 => InitState::Thermal,
        1 => InitState::Product(KetSpec::Down, KetSpec::Plus),
        2 => InitState::Product(
            KetSpec::Tipped(rng.gen_range(0.0..std::f64::consts::PI)),
            KetSpec::Down,
        ),
        _ => InitState::Product(KetSpec::Up, KetSpec::Up),
    };
    let mut contact = [true, true];
    let mut field: [f64; 2] = [params.b, params.b];
    let mut instructions = Vec::new();
    let spin_of = |b: bool| if b { Spin::One } else { Spin::Two };
    for _ in 0..rng.gen_range(3..10) {
        let spin = spin_of(rng.gen_bool(0.5));
        let si = match spin {
            Spin::One => 0,
            Spin::Two => 1,
        };
        match rng.gen_range(0..7) {
            0 => instructions.push(Instruction::Pulse {
                spin,
                angle: rng.gen_range(0.0..std::f64::consts::TAU),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            }),
            1 => instructions.push(Instruction::Wait {
                duration: rng.gen_range(0.0..3.0),
            }),
            2 => instructions.push(Instruction::Cnot {
                control: spin,
                target: spin.other(),
                kind: if params.gamma > 0.0 && rng.gen_bool(0.3) {
                    CnotKind::Pulsed
                } else {
                    CnotKind::Ideal
                },
            }),
            3 => instructions.push(Instruction::Measure { spin }),
            4 => instructions.push(Instruction::Dephase { spin }),
            5 => {
                if !contact[si] {
                    instructions.push(Instruction::Contact { spin, on: true });
                    contact[si] = true;
                }
                instructions.push(Instruction::Thermalize { spin });
            }
            _ => {
                let target = rng.gen_range(0.0..2.5);
                let adiabatic = rng.gen_bool(0.5);
                let want_contact = !adiabatic;
                if contact[si] != want_contact {
                    instructions.push(Instruction::Contact {
                        spin,
                        on: want_contact,
                    });
                    contact[si] = want_contact;
                }
                instructions.push(Instruction::Ramp {
                    spin,
                    b_target: target,
                    n_steps: rng.gen_range(1..50),
                    mode: if adiabatic {
                        RampMode::Adiabatic
                    } else {
                        RampMode::Isothermal
                    },
                });
                field[si] = target;
            }
        }
    }
    let _ = field;
    PulseProgram {
        params,
        init,
        instructions,
    }
}

fn random_density(rng: &mut StdRng, dim: usize) -> DensityMatrix {
    let mut m = CMatrix::zeros(dim).expect("dim ok");
    for i in 0..dim {
        for j in 0..dim {
            m.set(
                i,
                j,
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
        }
    }
    let mm = m.mul(&m.adjoint()).expect("same dim");
    let tr = mm.trace().re;
    DensityMatrix::new(mm.scale(Complex::new(1.0 / tr, 0.0))).expect("normalized Gram matrix")
}

/// Exercised by `check` for a final smoke test of the full pipeline.
pub fn pipeline_smoke() -> Result<(), String> {
    let cfg = Template::Swap.default_config();
    let program = Template::Swap.program(&cfg).expect("text-backed");
    let (outcome, _) = run_program_with_state(&program).map_err(|e| e.to_string())?;
    if outcome.ledger.steps.len() != 3 {
        return Err("swap template should have three steps".into());
    }
    Ok(())
}
