//! Execute parsed pulse programs against the engine and sweep parameters.

use crate::program::{InitState, Instruction, KetSpec, PulseProgram};
use spindemon::engine::{carnot_efficiency, EngineError, EngineState, RampMode, RampSchedule};
use spindemon::thermo::two_spin_thermal;
use spindemon::{Complex, CycleOutcome, DensityMatrix, PulseSpec, Spin, SpinParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("instruction {index}: {source}")]
    Engine {
        index: usize,
        #[source]
        source: EngineError,
    },
    #[error("instruction {index}: {message}")]
    Precondition { index: usize, message: String },
    #[error(transparent)]
    Protocol(#[from] EngineError),
    #[error("{0}")]
    Setup(String),
}

impl RunError {
    /// Index of the offending instruction, if the failure happened mid-run.
    pub fn instruction_index(&self) -> Option<usize> {
        match self {
            RunError::Engine { index, .. } | RunError::Precondition { index, .. } => Some(*index),
            RunError::Protocol(_) | RunError::Setup(_) => None,
        }
    }
}

fn ket_amplitudes(k: KetSpec) -> [Complex; 2] {
    let c = |re: f64| Complex::new(re, 0.0);
    match k {
        KetSpec::Down => [c(1.0), c(0.0)],
        KetSpec::Up => [c(0.0), c(1.0)],
        KetSpec::Plus => [
            c(std::f64::consts::FRAC_1_SQRT_2),
            c(std::f64::consts::FRAC_1_SQRT_2),
        ],
        KetSpec::Tipped(theta) => [c(theta.cos()), c(theta.sin())],
    }
}

/// Build the initial density matrix of a program.
pub fn initial_state(program: &PulseProgram) -> Result<DensityMatrix, RunError> {
    match program.init {
        InitState::Thermal => Ok(two_spin_thermal(&program.params)),
        InitState::Product(k1, k2) => {
            let a1 = ket_amplitudes(k1);
            let a2 = ket_amplitudes(k2);
            let mut joint = [Complex::new(0.0, 0.0); 4];
            for (i, a) in a1.iter().enumerate() {
                for (j, b) in a2.iter().enumerate() {
                    joint[2 * i + j] = a * b;
                }
            }
            DensityMatrix::pure(&joint).map_err(|e| RunError::Setup(format!("initial state: {e}")))
        }
    }
}

/// Run a program and also hand back the final state.
pub fn run_program_with_state(
    program: &PulseProgram,
) -> Result<(CycleOutcome, DensityMatrix), RunError> {
    let params = program.params;
    let rho = initial_state(program)?;
    let mut state =
        EngineState::new(params, rho).map_err(|e| RunError::Setup(format!("engine setup: {e}")))?;
    // Spins start in contact with their reservoirs; CONTACT toggles.
    let mut contact = [true, true];

    for (index, instr) in program.instructions.iter().enumerate() {
        let fail = |source: EngineError| RunError::Engine { index, source };
        let gate = |ok: bool, message: &str| {
            if ok {
                Ok(())
            } else {
                Err(RunError::Precondition {
                    index,
                    message: message.into(),
                })
            }
        };
        match *instr {
            Instruction::Pulse { spin, angle, phase } => {
                state
                    .pulse(&PulseSpec::new(spin, angle, phase))
                    .map_err(fail)?;
            }
            Instruction::Wait { duration } => state.wait(duration).map_err(fail)?,
            Instruction::Cnot {
                control,
                target,
                kind,
            } => state.cnot(kind, control, target).map_err(fail)?,
            Instruction::Measure { spin } => state.measure_z(spin).map_err(fail)?,
            Instruction::Dephase { spin } => state.dephase(spin).map_err(fail)?,
            Instruction::Contact { spin, on } => {
                contact[contact_idx(spin)] = on;
            }
            Instruction::Thermalize { spin } => {
                gate(
                    contact[contact_idx(spin)],
                    &format!("THERMALIZE {spin} needs CONTACT {spin} ON"),
                )?;
                state.thermalize(spin).map_err(fail)?;
            }
            Instruction::Ramp {
                spin,
                b_target,
                n_steps,
                mode,
            } => {
                match mode {
                    RampMode::Adiabatic => gate(
                        !contact[contact_idx(spin)],
                        &format!("adiabatic RAMP {spin} needs CONTACT {spin} OFF"),
                    )?,
                    RampMode::Isothermal => gate(
                        contact[contact_idx(spin)],
                        &format!("isothermal RAMP {spin} needs CONTACT {spin} ON"),
                    )?,
                }
                let sched = RampSchedule::new(state.b_eff(spin), b_target, n_steps, mode, spin)
                    .map_err(fail)?;
                state.ramp(spin, &sched).map_err(fail)?;
            }
        }
    }

    let totals = state.ledger().totals();
    let efficiency = if totals.q_in.abs() > 1e-300 {
        Some(totals.w_out / totals.q_in)
    } else {
        None
    };
    let mut residuals = std::collections::BTreeMap::new();
    residuals.insert("first_law".into(), state.first_law_residual());
    residuals.insert("second_law_margin".into(), state.entropy_generated());

    let rho = state.rho().clone();
    let outcome = CycleOutcome {
        simulated_w: totals.w_out,
        efficiency,
        efficiency_bound: carnot_efficiency(&params),
        closed_form_w: None,
        closed_form: std::collections::BTreeMap::new(),
        residuals,
        ledger: state.into_ledger(),
    };
    Ok((outcome, rho))
}

/// Run a program; deterministic ledger, engine errors tagged with the
/// offending instruction index.
pub fn run_program(program: &PulseProgram) -> Result<CycleOutcome, RunError> {
    run_program_with_state(program).map(|(outcome, _)| outcome)
}

fn contact_idx(spin: Spin) -> usize {
    match spin {
        Spin::One => 0,
        Spin::Two => 1,
    }
}

/// Which knob a sweep turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Mu1,
    Mu2,
    B,
    T1,
    T2,
    Gamma,
    Theta,
    NSteps,
}

impl SweepParam {
    pub fn from_name(name: &str) -> Option<SweepParam> {
        match name.to_ascii_lowercase().as_str() {
            "mu1" => Some(SweepParam::Mu1),
            "mu2" => Some(SweepParam::Mu2),
            "b" => Some(SweepParam::B),
            "t1" => Some(SweepParam::T1),
            "t2" => Some(SweepParam::T2),
            "gamma" => Some(SweepParam::Gamma),
            "theta" => Some(SweepParam::Theta),
            "n_steps" | "nsteps" => Some(SweepParam::NSteps),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Mu1 => "mu1",
            SweepParam::Mu2 => "mu2",
            SweepParam::B => "B",
            SweepParam::T1 => "T1",
            SweepParam::T2 => "T2",
            SweepParam::Gamma => "gamma",
            SweepParam::Theta => "theta",
            SweepParam::NSteps => "n_steps",
        }
    }
}

/// A one-dimensional parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub end: f64,
    pub count: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn new(
        param: SweepParam,
        start: f64,
        end: f64,
        count: usize,
        log: bool,
    ) -> Result<SweepSpec, RunError> {
        if count < 2 {
            return Err(RunError::Setup(format!(
                "sweep needs at least 2 points (count={count})"
            )));
        }
        if !(start.is_finite() && end.is_finite()) {
            return Err(RunError::Setup("sweep endpoints must be finite".into()));
        }
        if log && (start <= 0.0 || end <= 0.0) {
            return Err(RunError::Setup(format!(
                "log sweeps need positive endpoints (start={start}, end={end})"
            )));
        }
        Ok(SweepSpec {
            param,
            start,
            end,
            count,
            log,
        })
    }

    /// Grid values, ascending in index order.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                if self.log {
                    (self.start.ln() + f * (self.end.ln() - self.start.ln())).exp()
                } else {
                    self.start + f * (self.end - self.start)
                }
            })
            .collect()
    }
}

/// Summary row of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub w_out: f64,
    pub q_in: f64,
    pub q_out: f64,
    pub ds_total: f64,
    pub efficiency: Option<f64>,
    pub efficiency_bound: f64,
    pub closed_form_w: Option<f64>,
}

impl SweepRow {
    pub fn from_outcome(value: f64, outcome: &CycleOutcome) -> SweepRow {
        let totals = outcome.ledger.totals();
        SweepRow {
            value,
            w_out: totals.w_out,
            q_in: totals.q_in,
            q_out: totals.q_out,
            ds_total: totals.ds_total,
            efficiency: outcome.efficiency,
            efficiency_bound: outcome.efficiency_bound,
            closed_form_w: outcome.closed_form_w,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub param: &'static str,
    pub rows: Vec<SweepRow>,
}

/// Rebuild a program with one knob changed.
pub fn apply_sweep_value(
    program: &PulseProgram,
    param: SweepParam,
    value: f64,
) -> Result<PulseProgram, RunError> {
    let mut out = program.clone();
    let p = &program.params;
    let rebuilt = |mu1, mu2, b, gamma, t1, t2| {
        SpinParams::new(mu1, mu2, b, gamma, t1, t2)
            .map_err(|e| RunError::Setup(format!("swept parameters invalid at {value}: {e}")))
    };
    match param {
        SweepParam::Mu1 => out.params = rebuilt(value, p.mu2, p.b, p.gamma, p.t1, p.t2)?,
        SweepParam::Mu2 => out.params = rebuilt(p.mu1, value, p.b, p.gamma, p.t1, p.t2)?,
        SweepParam::B => out.params = rebuilt(p.mu1, p.mu2, value, p.gamma, p.t1, p.t2)?,
        SweepParam::Gamma => out.params = rebuilt(p.mu1, p.mu2, p.b, value, p.t1, p.t2)?,
        SweepParam::T1 => out.params = rebuilt(p.mu1, p.mu2, p.b, p.gamma, value, p.t2)?,
        SweepParam::T2 => out.params = rebuilt(p.mu1, p.mu2, p.b, p.gamma, p.t1, value)?,
        SweepParam::Theta => {
            let mut replaced = false;
            if let InitState::Product(ref mut k1, ref mut k2) = out.init {
                for k in [k1, k2] {
                    if let KetSpec::Tipped(ref mut theta) = k {
                        *theta = value;
                        replaced = true;
                        break;
                    }
                }
            }
            if !replaced {
                return Err(RunError::Setup(
                    "theta sweep needs a TIPPED ket in the initial state".into(),
                ));
            }
        }
        SweepParam::NSteps => {
            if value < 1.0 || !value.is_finite() {
                return Err(RunError::Setup(format!(
                    "n_steps must be >= 1 (got {value})"
                )));
            }
            let n = value.round() as usize;
            let mut replaced = false;
            for instr in &mut out.instructions {
                if let Instruction::Ramp {
                    ref mut n_steps, ..
                } = instr
                {
                    *n_steps = n;
                    replaced = true;
                }
            }
            if !replaced {
                return Err(RunError::Setup(
                    "n_steps sweep needs at least one RAMP instruction".into(),
                ));
            }
        }
    }
    Ok(out)
}

/// Evaluate a program over a parameter grid; rows come back in grid order.
pub fn run_sweep(program: &PulseProgram, spec: &SweepSpec) -> Result<SweepTable, RunError> {
    let mut rows = Vec::with_capacity(spec.count);
    for value in spec.values() {
        let modified = apply_sweep_value(program, spec.param, value)?;
        let outcome = run_program(&modified)?;
        rows.push(SweepRow::from_outcome(value, &outcome));
    }
    Ok(SweepTable {
        param: spec.param.name(),
        rows,
    })
}
