//! Thermodynamic primitives for a two-level spin.
//!
//! Gibbs populations, closed-form energy and entropy, von Neumann entropy,
//! projective measurement and dephasing channels, the entropy created by
//! measurement, the Landauer erasure cost, and the Carnot/quantum efficiency
//! bounds. Entropies are stored in nats (k_B = 1); divide by ln 2 for bits.

use crate::qmatrix::{CMatrix, Complex, DensityMatrix, MatrixError, Spin};
use crate::spins::SpinParams;
use std::f64::consts::LN_2;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ThermoError {
    #[error("temperature must be positive (T={0})")]
    NonPositiveTemperature(f64),
    #[error("projectors do not resolve the identity (deviation {0:.3e})")]
    NotAResolution(f64),
    #[error("projector {0} is not an orthogonal projection (deviation {1:.3e})")]
    NotAProjector(usize, f64),
    #[error("entropy inflow must be positive (S_in={0})")]
    NonPositiveEntropyIn(f64),
    #[error("need T1 > T2 > 0 (T1={0}, T2={1})")]
    BadTemperatureOrder(f64, f64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// One spin in contact with one reservoir: dipole moment, field, temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsSpec {
    pub mu: f64,
    pub b: f64,
    pub t: f64,
}

impl GibbsSpec {
    pub fn new(mu: f64, b: f64, t: f64) -> Result<GibbsSpec, ThermoError> {
        if t <= 0.0 || !t.is_finite() {
            return Err(ThermoError::NonPositiveTemperature(t));
        }
        Ok(GibbsSpec { mu, b, t })
    }

    pub fn for_spin(params: &SpinParams, spin: Spin) -> GibbsSpec {
        GibbsSpec {
            mu: params.mu(spin),
            b: params.b,
            t: params.temperature(spin),
        }
    }

    /// Dimensionless Zeeman-to-thermal ratio mu B / T.
    pub fn x(&self) -> f64 {
        self.mu * self.b / self.t
    }
}

/// Up/down occupation probabilities of one spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinDistribution {
    pub p_up: f64,
    pub p_down: f64,
}

impl SpinDistribution {
    pub fn new(p_up: f64, p_down: f64) -> SpinDistribution {
        debug_assert!((p_up + p_down - 1.0).abs() <= 1e-12);
        debug_assert!((0.0..=1.0).contains(&p_up));
        SpinDistribution { p_up, p_down }
    }

    /// <sigma_z> = p_up - p_down.
    pub fn polarization(&self) -> f64 {
        self.p_up - self.p_down
    }

    /// Shannon entropy in nats, with 0 ln 0 = 0.
    pub fn entropy(&self) -> f64 {
        let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
        term(self.p_up) + term(self.p_down)
    }
}

/// Equilibrium occupations p(up) = e^{-mu B / T} / Z, Z = 2 cosh(mu B / T).
pub fn gibbs_distribution(g: &GibbsSpec) -> SpinDistribution {
    let x = g.x();
    // Normalized form avoids overflow at large |x|.
    let p_up = 1.0 / (1.0 + (2.0 * x).exp());
    SpinDistribution {
        p_up,
        p_down: 1.0 - p_up,
    }
}

/// Partition function Z = 2 cosh(mu B / T).
pub fn partition_function(g: &GibbsSpec) -> f64 {
    2.0 * g.x().cosh()
}

/// Equilibrium energy E = -mu B tanh(mu B / T).
pub fn gibbs_energy(g: &GibbsSpec) -> f64 {
    -g.mu * g.b * g.x().tanh()
}

/// Equilibrium entropy S = E/T + ln Z, in nats.
pub fn gibbs_entropy(g: &GibbsSpec) -> f64 {
    let x = g.x();
    // ln(2 cosh x) - x tanh x, written to stay finite at large x.
    ln_two_cosh(x) - x * x.tanh()
}

/// ln(2 cosh x) without overflow.
pub(crate) fn ln_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (1.0 + (-2.0 * a).exp()).ln()
}

/// Diagonal equilibrium state diag(p_down, p_up) in the (dn, up) basis.
pub fn thermal_state(g: &GibbsSpec) -> DensityMatrix {
    let d = gibbs_distribution(g);
    DensityMatrix::from_populations(&[d.p_down, d.p_up]).expect("valid Gibbs populations")
}

/// Product of the two single-spin equilibrium states.
pub fn two_spin_thermal(params: &SpinParams) -> DensityMatrix {
    let r1 = thermal_state(&GibbsSpec::for_spin(params, Spin::One));
    let r2 = thermal_state(&GibbsSpec::for_spin(params, Spin::Two));
    DensityMatrix::new(r1.mat().tensor(r2.mat()).expect("2x2 factors"))
        .expect("product of states is a state")
}

/// Von Neumann entropy -tr rho ln rho in nats. Eigenvalues within the
/// positivity slack below zero are clipped to zero.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    let eigs = rho.eigenvalues().expect("density matrices are Hermitian");
    eigs.iter()
        .map(|&l| {
            let l = if l < 0.0 { 0.0 } else { l };
            if l > 0.0 {
                -l * l.ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// Entropy expressed in bits.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / LN_2
}

/// An orthogonal projective measurement: a set of projectors resolving the
/// identity.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementChannel {
    projectors: Vec<CMatrix>,
}

impl MeasurementChannel {
    pub fn new(projectors: Vec<CMatrix>) -> Result<MeasurementChannel, ThermoError> {
        let dim = projectors
            .first()
            .map(CMatrix::dim)
            .ok_or(ThermoError::NotAResolution(1.0))?;
        let mut sum = CMatrix::zeros(dim)?;
        for (i, p) in projectors.iter().enumerate() {
            let idem = p.mul(p)?.max_abs_diff(p);
            let herm = p.hermiticity_deviation();
            if idem > 1e-10 || herm > 1e-10 {
                return Err(ThermoError::NotAProjector(i, idem.max(herm)));
            }
            sum = sum.add(p)?;
        }
        let dev = sum.max_abs_diff(&CMatrix::identity(dim)?);
        if dev > 1e-10 {
            return Err(ThermoError::NotAResolution(dev));
        }
        // Mutual orthogonality follows from idempotence plus completeness for
        // positive terms, but check it anyway.
        for i in 0..projectors.len() {
            for j in i + 1..projectors.len() {
                let cross = projectors[i].mul(&projectors[j])?.max_abs();
                if cross > 1e-10 {
                    return Err(ThermoError::NotAProjector(j, cross));
                }
            }
        }
        Ok(MeasurementChannel { projectors })
    }

    /// z-basis measurement of a single spin.
    pub fn single_spin_z() -> MeasurementChannel {
        let down = projector_1q(0);
        let up = projector_1q(1);
        MeasurementChannel {
            projectors: vec![down, up],
        }
    }

    /// z-basis measurement of one spin of the pair.
    pub fn spin_z(spin: Spin) -> MeasurementChannel {
        let id = CMatrix::identity(2).expect("dim 2");
        let embed = |p: &CMatrix| match spin {
            Spin::One => p.tensor(&id).expect("4x4"),
            Spin::Two => id.tensor(p).expect("4x4"),
        };
        MeasurementChannel {
            projectors: vec![embed(&projector_1q(0)), embed(&projector_1q(1))],
        }
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }
}

fn projector_1q(level: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2).expect("dim 2");
    m.set(level, level, Complex::new(1.0, 0.0));
    m
}

/// Projective measurement channel rho -> sum_i P_i rho P_i.
pub fn measure(rho: &DensityMatrix, ch: &MeasurementChannel) -> Result<DensityMatrix, ThermoError> {
    let mut out = CMatrix::zeros(rho.dim())?;
    for p in ch.projectors() {
        if p.dim() != rho.dim() {
            return Err(ThermoError::Matrix(MatrixError::DimensionMismatch(
                p.dim(),
                rho.dim(),
            )));
        }
        out = out.add(&p.mul(rho.mat())?.mul(p)?)?;
    }
    Ok(DensityMatrix::new(out)?)
}

/// Complete z-dephasing of one spin: identical to measuring that spin in the
/// z basis and discarding the record. Single-spin states dephase in their own
/// z basis regardless of the index.
pub fn dephase(rho: &DensityMatrix, spin: Spin) -> Result<DensityMatrix, ThermoError> {
    let ch = if rho.dim() == 2 {
        MeasurementChannel::single_spin_z()
    } else {
        MeasurementChannel::spin_z(spin)
    };
    measure(rho, &ch)
}

/// Entropy created by a projective measurement,
/// S(sum_i P_i rho P_i) - S(rho) >= 0, in nats.
pub fn delta_s_q(rho: &DensityMatrix, ch: &MeasurementChannel) -> Result<f64, ThermoError> {
    let measured = measure(rho, ch)?;
    let d = vn_entropy(&measured) - vn_entropy(rho);
    debug_assert!(d >= -1e-12, "measurement decreased entropy by {d:e}");
    Ok(d)
}

/// Minimal heat price of erasing `bits` bits into a reservoir at temperature
/// `t`: bits * T * ln 2.
pub fn landauer_cost(bits: f64, t: f64) -> f64 {
    bits * t * LN_2
}

/// Efficiency bounds for an information engine working between T1 and T2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyReport {
    /// Carnot bound 1 - T2/T1.
    pub carnot: f64,
    /// Carnot bound degraded by measurement entropy: carnot - T2 dSq / (T1 S_in).
    pub quantum: f64,
    /// Generic single-cycle efficiency 1 - T2 S_out / (T1 S_in).
    pub generic: f64,
    pub delta_s_q: f64,
    pub s_in: f64,
    pub s_out: f64,
}

/// Assemble the efficiency bounds from entropy flows.
pub fn efficiencies(
    s_in: f64,
    s_out: f64,
    delta_s_q: f64,
    t1: f64,
    t2: f64,
) -> Result<EfficiencyReport, ThermoError> {
    if s_in <= 0.0 {
        return Err(ThermoError::NonPositiveEntropyIn(s_in));
    }
    if !(t1 > t2 && t2 > 0.0) {
        return Err(ThermoError::BadTemperatureOrder(t1, t2));
    }
    let carnot = 1.0 - t2 / t1;
    let quantum = carnot - t2 * delta_s_q / (t1 * s_in);
    let generic = 1.0 - t2 * s_out / (t1 * s_in);
    Ok(EfficiencyReport {
        carnot,
        quantum,
        generic,
        delta_s_q,
        s_in,
        s_out,
    })
}
