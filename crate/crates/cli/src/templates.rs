//! Built-in named protocols.
//!
//! `swap`, `carnot` and `erase` ship as pulse-program text generated from
//! their parameters and run through the ordinary parser, then annotated with
//! the protocol's closed forms. `tipped` needs a mixed initial state that the
//! text format cannot express, so it drives the engine directly.

use crate::program::{parse_program, PulseProgram};
use crate::runner::{
    run_program, run_program_with_state, RunError, SweepParam, SweepRow, SweepSpec, SweepTable,
};
use spindemon::engine::{
    carnot_efficiency, carnot_return_field, erasure_ramp_plan, erasure_residual_p_up,
    swap_work_closed, tipped_measured_route, RampMode, TippedSpec,
};
use spindemon::thermo::{gibbs_entropy, GibbsSpec};
use spindemon::{CycleOutcome, Spin, SpinParams};
use std::f64::consts::FRAC_PI_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    Swap,
    Carnot,
    Erase,
    Tipped,
}

/// Knobs of a template run; unused fields are ignored by templates that do
/// not have the knob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateConfig {
    pub params: SpinParams,
    pub n_steps: usize,
    pub theta: f64,
    pub b_prime: f64,
}

impl Template {
    pub fn from_name(name: &str) -> Option<Template> {
        match name.to_ascii_lowercase().as_str() {
            "swap" => Some(Template::Swap),
            "carnot" => Some(Template::Carnot),
            "erase" => Some(Template::Erase),
            "tipped" => Some(Template::Tipped),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Template::Swap => "swap",
            Template::Carnot => "carnot",
            Template::Erase => "erase",
            Template::Tipped => "tipped",
        }
    }

    pub fn default_config(&self) -> TemplateConfig {
        let p = |mu1, mu2, b, t1, t2| {
            SpinParams::new(mu1, mu2, b, 1.0, t1, t2).expect("template defaults are valid")
        };
        match self {
            Template::Swap => TemplateConfig {
                params: p(2.0, 1.0, 1.0, 8.0, 1.0),
                n_steps: 1,
                theta: 0.0,
                b_prime: 0.0,
            },
            Template::Carnot => TemplateConfig {
                params: p(1.0, 1.5, 1.0, 2.0, 1.0),
                n_steps: 10_000,
                theta: 0.0,
                b_prime: 0.0,
            },
            Template::Erase => TemplateConfig {
                params: p(1.0, 1.0, 0.0, 1.0, 1.0),
                n_steps: 10_000,
                theta: 0.0,
                b_prime: 20.0,
            },
            Template::Tipped => TemplateConfig {
                params: p(1.0, 0.8, 0.1, 2.0, 1.0),
                n_steps: 10_000,
                theta: FRAC_PI_8,
                b_prime: 0.0,
            },
        }
    }

    /// Program text for the text-backed templates; `None` for `tipped`.
    pub fn program_text(&self, cfg: &TemplateConfig) -> Option<String> {
        let p = cfg.params;
        let mut text = format!(
            "PARAM mu1 {}\nPARAM mu2 {}\nPARAM B {}\nPARAM gamma {}\nPARAM T1 {}\nPARAM T2 {}\nINIT THERMAL\n",
            p.mu1, p.mu2, p.b, p.gamma, p.t1, p.t2
        );
        match self {
            Template::Swap => {
                text.push_str("CNOT 1 2 IDEAL\nCNOT 2 1 IDEAL\nCNOT 1 2 IDEAL\n");
                Some(text)
            }
            Template::Carnot => {
                text.push_str("CNOT 1 2 IDEAL\nCNOT 2 1 IDEAL\nCNOT 1 2 IDEAL\n");
                for spin in [Spin::One, Spin::Two] {
                    let b_match = carnot_return_field(&p, spin);
                    text.push_str(&format!("CONTACT {spin} OFF\n"));
                    text.push_str(&format!("RAMP {spin} {b_match} 1 ADIABATIC\n"));
                    text.push_str(&format!("CONTACT {spin} ON\n"));
                    text.push_str(&format!("RAMP {spin} {} {} ISOTHERMAL\n", p.b, cfg.n_steps));
                }
                Some(text)
            }
            Template::Erase => {
                let plan = erasure_ramp_plan(&p, cfg.b_prime, cfg.n_steps).ok()?;
                text.push_str("CONTACT 1 OFF\n");
                for sched in plan {
                    match sched.mode {
                        RampMode::Isothermal => text.push_str(&format!(
                            "RAMP 2 {} {} ISOTHERMAL\n",
                            sched.b_end, sched.n_steps
                        )),
                        RampMode::Adiabatic => {
                            text.push_str("CONTACT 2 OFF\n");
                            text.push_str(&format!(
                                "RAMP 2 {} {} ADIABATIC\n",
                                sched.b_end, sched.n_steps
                            ));
                        }
                    }
                }
                Some(text)
            }
            Template::Tipped => None,
        }
    }

    /// Parsed form of a text-backed template.
    pub fn program(&self, cfg: &TemplateConfig) -> Option<PulseProgram> {
        let text = self.program_text(cfg)?;
        Some(
            parse_program(&text)
                .expect("template text is well-formed")
                .program,
        )
    }

    /// Run the template and annotate the outcome with its closed forms.
    pub fn run(&self, cfg: &TemplateConfig) -> Result<CycleOutcome, RunError> {
        let p = cfg.params;
        match self {
            Template::Swap => {
                let program = self.program(cfg).expect("text-backed");
                let mut outcome = run_program(&program)?;
                let closed = swap_work_closed(&p);
                outcome.closed_form_w = Some(closed);
                outcome
                    .residuals
                    .insert("eq6".into(), (outcome.simulated_w - closed).abs());
                Ok(outcome)
            }
            Template::Carnot => {
                let program = self.program(cfg).expect("text-backed");
                let mut outcome = run_program(&program)?;
                let s1 = gibbs_entropy(&GibbsSpec::for_spin(&p, Spin::One));
                let s2 = gibbs_entropy(&GibbsSpec::for_spin(&p, Spin::Two));
                let closed = (p.t1 - p.t2) * (s1 - s2);
                outcome.closed_form_w = Some(closed);
                outcome.efficiency_bound = carnot_efficiency(&p);
                outcome.closed_form.insert("q_in".into(), p.t1 * (s1 - s2));
                outcome.closed_form.insert("q_out".into(), p.t2 * (s1 - s2));
                outcome
                    .closed_form
                    .insert("efficiency".into(), carnot_efficiency(&p));
                outcome
                    .residuals
                    .insert("carnot_work".into(), (outcome.simulated_w - closed).abs());
                if let Some(eff) = outcome.efficiency {
                    outcome
                        .residuals
                        .insert("efficiency".into(), (eff - carnot_efficiency(&p)).abs());
                }
                Ok(outcome)
            }
            Template::Erase => {
                let program = self.program(cfg).ok_or_else(|| {
                    RunError::Setup(format!(
                        "invalid erasure configuration (B'={}, n={})",
                        cfg.b_prime, cfg.n_steps
                    ))
                })?;
                let (mut outcome, rho) = run_program_with_state(&program)?;
                let s_start = gibbs_entropy(&GibbsSpec::for_spin(&p, Spin::Two));
                let s_end = gibbs_entropy(
                    &GibbsSpec::new(p.mu2, cfg.b_prime, p.t2)
                        .map_err(|e| RunError::Setup(format!("erasure target: {e}")))?,
                );
                outcome
                    .closed_form
                    .insert("heat_dumped".into(), p.t2 * (s_start - s_end));
                outcome.closed_form.insert(
                    "p_up_residual".into(),
                    erasure_residual_p_up(&p, cfg.b_prime),
                );
                let heat_out = outcome.ledger.q_out();
                outcome.residuals.insert(
                    "erasure_heat".into(),
                    (heat_out - p.t2 * (s_start - s_end)).abs(),
                );
                let p_up = rho
                    .partial_trace(Spin::Two)
                    .map_err(|e| RunError::Setup(format!("final state: {e}")))?;
                outcome
                    .residuals
                    .insert("final_p_up".into(), p_up.populations()[1]);
                Ok(outcome)
            }
            Template::Tipped => {
                let spec = TippedSpec::new(cfg.theta).map_err(RunError::Protocol)?;
                tipped_measured_route(&p, &spec, cfg.n_steps).map_err(RunError::Protocol)
            }
        }
    }

    /// Evaluate the template over a parameter grid.
    pub fn sweep(&self, spec: &SweepSpec) -> Result<SweepTable, RunError> {
        let base = self.default_config();
        let mut rows = Vec::with_capacity(spec.count);
        for value in spec.values() {
            let cfg = apply_to_config(self, &base, spec.param, value)?;
            let outcome = self.run(&cfg)?;
            rows.push(SweepRow::from_outcome(value, &outcome));
        }
        Ok(SweepTable {
            param: spec.param.name(),
            rows,
        })
    }
}

fn apply_to_config(
    template: &Template,
    base: &TemplateConfig,
    param: SweepParam,
    value: f64,
) -> Result<TemplateConfig, RunError> {
    let mut cfg = *base;
    let p = base.params;
    let rebuilt = |mu1, mu2, b, gamma, t1, t2| {
        SpinParams::new(mu1, mu2, b, gamma, t1, t2)
            .map_err(|e| RunError::Setup(format!("swept parameters invalid at {value}: {e}")))
    };
    match param {
        SweepParam::Mu1 => cfg.params = rebuilt(value, p.mu2, p.b, p.gamma, p.t1, p.t2)?,
        SweepParam::Mu2 => cfg.params = rebuilt(p.mu1, value, p.b, p.gamma, p.t1, p.t2)?,
        SweepParam::B => cfg.params = rebuilt(p.mu1, p.mu2, value, p.gamma, p.t1, p.t2)?,
        SweepParam::Gamma => cfg.params = rebuilt(p.mu1, p.mu2, p.b, value, p.t1, p.t2)?,
        SweepParam::T1 => cfg.params = rebuilt(p.mu1, p.mu2, p.b, p.gamma, value, p.t2)?,
        SweepParam::T2 => cfg.params = rebuilt(p.mu1, p.mu2, p.b, p.gamma, p.t1, value)?,
        SweepParam::Theta => {
            if *template != Template::Tipped {
                return Err(RunError::Setup(format!(
                    "template `{}` has no tipping angle",
                    template.name()
                )));
            }
            cfg.theta = value;
        }
        SweepParam::NSteps => {
            if *template == Template::Swap {
                return Err(RunError::Setup("template `swap` has no ramps".into()));
            }
            if value < 1.0 || !value.is_finite() {
                return Err(RunError::Setup(format!(
                    "n_steps must be >= 1 (got {value})"
                )));
            }
            cfg.n_steps = value.round() as usize;
        }
    }
    Ok(cfg)
}
