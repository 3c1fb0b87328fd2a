//! Dressed jump operators and the three-part Liouvillian of the driven system.
//!
//! Every operator here lives in the energy eigenbasis of the full
//! (time-independent) Hamiltonian. A channel's down operator collects all
//! energy-lowering transitions `|j⟩⟨k|`, `k > j`, into a single global
//! operator; at finite temperature the matching up operator carries the
//! adjoint structure.

use log::warn;

use crate::error::{Error, Result};
use crate::model::{drive_operator, sensor_sigma_x, tls_sigma_x, EigenSystem, Layout, ModelParams};
use crate::operators::{hamiltonian_generator, hermiticity_defect, lindblad_dissipator, Operator, SuperOperator, C64, I, ONE};

/// Transitions closer than this are treated as degenerate at finite temperature.
pub const DEGENERATE_TRANSITION: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Cavity,
    Tls,
    Sensor,
}

impl Channel {
    // The TLS and sensor operators carry an overall factor i.
    fn prefactor(self) -> C64 {
        match self {
            Channel::Cavity => ONE,
            Channel::Tls | Channel::Sensor => I,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
}

/// Per-transition weight applied to the bare matrix element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightRule {
    Plain,
    /// `ω_{kj} / ω_ref`
    FreqRatio(f64),
}

impl WeightRule {
    fn weight(self, omega_kj: f64) -> f64 {
        match self {
            WeightRule::Plain => 1.0,
            WeightRule::FreqRatio(reference) => omega_kj / reference,
        }
    }
}

#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub matrix: Operator,
    pub rate: f64,
    pub channel: Channel,
    pub direction: Direction,
}

/// Zero-temperature dressed lowering operator of one channel:
/// `M_{jk} = c · w_{jk} · ⟨j|coupling|k⟩` for `k > j`, zero elsewhere.
pub fn dressed_jump(
    eig: &EigenSystem,
    coupling: &Operator,
    weight: WeightRule,
    channel: Channel,
    rate: f64,
) -> Result<JumpOperator> {
    let mut ops = thermal_channels(eig, coupling, weight, channel, 0.0, rate)?;
    Ok(ops.remove(0))
}

/// Mean thermal occupation `1 / (e^{ω/T} − 1)`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        0.0
    } else {
        1.0 / (omega / temperature).exp_m1()
    }
}

/// Down (and, for `T > 0`, up) operators of one channel with thermal weights
/// `√(n̄ + 1)` and `√n̄` folded into each transition.
pub fn thermal_channels(
    eig: &EigenSystem,
    coupling: &Operator,
    weight: WeightRule,
    channel: Channel,
    temperature: f64,
    rate: f64,
) -> Result<Vec<JumpOperator>> {
    if !(temperature >= 0.0) {
        return Err(Error::config("T", "must be non-negative"));
    }
    if !(rate >= 0.0) {
        return Err(Error::config("rate", "decay rates must be non-negative"));
    }
    if coupling.nrows() != eig.dim() || coupling.ncols() != eig.dim() {
        return Err(Error::Assembly(format!(
            "coupling operator is {}x{}, eigenbasis lives in dimension {}",
            coupling.nrows(),
            coupling.ncols(),
            eig.dim()
        )));
    }
    let defect = hermiticity_defect(coupling);
    if defect > 1e-10 {
        return Err(Error::NotHermitian { deviation: defect });
    }

    let m = eig.len();
    let elements = eig.to_eigenbasis(coupling);
    let pref = channel.prefactor();
    let mut down = Operator::zeros(m, m);
    let mut up = Operator::zeros(m, m);
    let mut clamped = 0usize;
    for k in 0..m {
        for j in 0..k {
            let omega_kj = eig.transition(k, j);
            let bare = pref * elements[(j, k)] * weight.weight(omega_kj);
            if temperature > 0.0 {
                if omega_kj < DEGENERATE_TRANSITION {
                    clamped += 1;
                    down[(j, k)] = bare;
                    continue;
                }
                let n = bose_occupation(omega_kj, temperature);
                down[(j, k)] = bare * (n + 1.0).sqrt();
                up[(k, j)] = bare.conj() * n.sqrt();
            } else {
                down[(j, k)] = bare;
            }
        }
    }
    if clamped > 0 {
        warn!(
            "{clamped} near-degenerate transition(s) in the {channel:?} channel excluded from thermal excitation"
        );
    }

    let mut out = vec![JumpOperator {
        matrix: down,
        rate,
        channel,
        direction: Direction::Down,
    }];
    if temperature > 0.0 {
        out.push(JumpOperator {
            matrix: up,
            rate,
            channel,
            direction: Direction::Up,
        });
    }
    Ok(out)
}

/// Cavity and TLS channels at the model temperature, plus the sensor channel
/// (when present) at zero temperature: the sensor is a passive detector and
/// must not fluoresce thermally on its own.
pub fn standard_channels(p: &ModelParams, eig: &EigenSystem, layout: Layout) -> Result<Vec<JumpOperator>> {
    let t = p.temperature;
    let mut jumps = thermal_channels(eig, &drive_operator(p, layout), WeightRule::Plain, Channel::Cavity, t, p.kappa)?;
    jumps.extend(thermal_channels(
        eig,
        &tls_sigma_x(layout),
        WeightRule::FreqRatio(p.omega_q),
        Channel::Tls,
        t,
        p.gamma,
    )?);
    if layout.sensor {
        jumps.extend(thermal_channels(
            eig,
            &sensor_sigma_x(layout),
            WeightRule::FreqRatio(p.omega_s),
            Channel::Sensor,
            0.0,
            p.sensor_decay,
        )?);
    }
    Ok(jumps)
}

/// `L(t) = L0 + L₊ e^{iω_L t} + L₋ e^{−iω_L t}` in the eigenbasis.
#[derive(Clone, Debug)]
pub struct LiouvillianParts {
    pub l0: SuperOperator,
    pub lplus: SuperOperator,
    pub lminus: SuperOperator,
    pub omega_l: f64,
}

impl LiouvillianParts {
    pub fn dim(&self) -> usize {
        self.l0.dim()
    }

    /// Generator at time `t`.
    pub fn at(&self, t: f64) -> SuperOperator {
        let phase = C64::new(0.0, self.omega_l * t).exp();
        self.l0
            .add(&self.lplus.scale(phase))
            .add(&self.lminus.scale(phase.conj()))
    }
}

/// Assembles `L0 = −i[H, ·] + Σ rate·D[O]` and `L₊ = L₋ = −i(Ω/2)[D, ·]`.
///
/// `drive` is the bare-basis drive operator; it is rotated into the eigenbasis here.
pub fn build_liouvillian(
    p: &ModelParams,
    eig: &EigenSystem,
    drive: &Operator,
    jumps: &[JumpOperator],
) -> Result<LiouvillianParts> {
    let m = eig.len();
    if drive.nrows() != eig.dim() {
        return Err(Error::Assembly(format!(
            "drive operator has dimension {}, eigenbasis expects {}",
            drive.nrows(),
            eig.dim()
        )));
    }
    for j in jumps {
        if j.matrix.nrows() != m || j.matrix.ncols() != m {
            return Err(Error::Assembly(format!(
                "{:?} jump operator is {}x{}, expected {m}x{m}",
                j.channel,
                j.matrix.nrows(),
                j.matrix.ncols()
            )));
        }
        if !(j.rate >= 0.0) {
            return Err(Error::Assembly(format!("{:?} channel has negative rate", j.channel)));
        }
    }

    let shifted = eig.shifted_energies();
    let h = Operator::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        shifted.iter().map(|e| C64::new(*e, 0.0)),
    ));
    let mut l0 = hamiltonian_generator(&h);
    for j in jumps.iter().filter(|j| j.rate > 0.0) {
        l0 = l0.add(&lindblad_dissipator(&j.matrix).scale(C64::new(j.rate, 0.0)));
    }
    let d_eig = eig.to_eigenbasis(drive);
    let half = C64::new(p.drive_amplitude / 2.0, 0.0);
    let lplus = hamiltonian_generator(&d_eig).scale(half);
    Ok(LiouvillianParts {
        l0,
        lminus: lplus.clone(),
        lplus,
        omega_l: p.omega_l,
    })
}
