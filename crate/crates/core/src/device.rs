//! Device dynamics: the 3rd-order synchronous generator (swing equation
//! plus first-order governor) and the 2nd-order multi-loop-droop
//! grid-forming inverter (angle plus low-pass power filter).
//!
//! Per-unit convention: powers are per unit on the device MVA base,
//! frequency deviations per unit on the nominal frequency, and droops are
//! pure per-unit ratios, so a power deviation `dp` settles the frequency at
//! `f0 * droop * dp` hertz away from nominal.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("{device}: {field} must be positive, got {value}")]
    NonPositive {
        device: String,
        field: &'static str,
        value: f64,
    },
}

/// Multi-loop-droop grid-forming inverter parameters.
#[derive(Debug, Clone, Copy)]
pub struct GfmParams<S> {
    /// Droop gain, pu frequency per pu power.
    pub droop_m_p: S,
    /// Low-pass power filter time constant, seconds (cutoff `2*pi/tau_i`).
    pub tau_i: S,
    pub rating_mva: S,
    /// Pre-converter power set point, pu on device base.
    pub p_set: S,
    /// Optional pre-converter power clamp (disabled by default).
    pub p_m_limits: Option<(S, S)>,
}

impl<S: Scalar> GfmParams<S> {
    pub fn new(droop_m_p: S, tau_i: S, rating_mva: S) -> Self {
        Self {
            droop_m_p,
            tau_i,
            rating_mva,
            p_set: S::zero(),
            p_m_limits: None,
        }
    }
}

impl<S: Scalar> Default for GfmParams<S> {
    fn default() -> Self {
        Self::new(S::c(0.05), S::c(0.05), S::c(200.0))
    }
}

/// Grid-forming inverter state: bus angle and filtered pre-converter power.
/// The inverter frequency is an output, not a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfmState<S> {
    pub delta: S,
    pub p_m: S,
}

/// Synchronous generator parameters.
#[derive(Debug, Clone, Copy)]
pub struct SgParams<S> {
    /// Inertia constant, seconds.
    pub inertia_h: S,
    /// Damper coefficient, pu torque per pu speed deviation.
    pub damping_d: S,
    /// Governor droop, pu frequency per pu power.
    pub droop_r_d: S,
    /// Governor time constant, seconds.
    pub tau_g: S,
    pub rating_mva: S,
    pub p_set: S,
    pub p_m_limits: Option<(S, S)>,
}

impl<S: Scalar> SgParams<S> {
    pub fn new(inertia_h: S, droop_r_d: S, tau_g: S, rating_mva: S) -> Self {
        Self {
            inertia_h,
            damping_d: S::zero(),
            droop_r_d,
            tau_g,
            rating_mva,
            p_set: S::zero(),
            p_m_limits: None,
        }
    }
}

impl<S: Scalar> Default for SgParams<S> {
    fn default() -> Self {
        Self::new(S::c(4.0), S::c(0.05), S::c(0.5), S::c(200.0))
    }
}

/// Synchronous generator state: rotor angle, rotor speed (rad/s), and
/// mechanical power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgState<S> {
    pub delta: S,
    pub omega: S,
    pub p_m: S,
}

impl<S: Scalar> GfmParams<S> {
    /// Time derivatives given the electric power drawn at the terminals,
    /// pu on device base. The returned struct holds `d/dt` of each state.
    pub fn derivatives(&self, state: &GfmState<S>, p_e: S, f0: S) -> GfmState<S> {
        let mut d_p_m = S::TAU() * (p_e - state.p_m) / self.tau_i;
        if let Some((lo, hi)) = self.p_m_limits {
            if (state.p_m >= hi && d_p_m > S::zero()) || (state.p_m <= lo && d_p_m < S::zero()) {
                d_p_m = S::zero();
            }
        }
        let d_delta = S::TAU() * f0 * self.droop_m_p * (self.p_set - state.p_m);
        GfmState {
            delta: d_delta,
            p_m: d_p_m,
        }
    }

    /// Inverter frequency in hertz; equals `f0` when `p_m` sits at the set point.
    pub fn frequency(&self, state: &GfmState<S>, f0: S) -> S {
        f0 + f0 * self.droop_m_p * (self.p_set - state.p_m)
    }

    /// Equilibrium state for a given terminal power; forces the set point to
    /// `p_e0` so every derivative vanishes exactly.
    pub fn steady_state(&mut self, delta: S, p_e0: S) -> GfmState<S> {
        self.p_set = p_e0;
        GfmState { delta, p_m: p_e0 }
    }

    pub fn validate(&self, name: &str) -> Result<Vec<String>, DeviceError> {
        let pos = |field: &'static str, value: S| {
            if value <= S::zero() {
                Err(DeviceError::NonPositive {
                    device: name.to_string(),
                    field,
                    value: value.as_f64(),
                })
            } else {
                Ok(())
            }
        };
        pos("droop_m_p", self.droop_m_p)?;
        pos("tau_i", self.tau_i)?;
        pos("rating_mva", self.rating_mva)?;
        let mut warnings = Vec::new();
        if self.tau_i > S::c(0.08) {
            warnings.push(format!(
                "{name}: tau_i = {} s exceeds the 0.08 s filter bound",
                self.tau_i
            ));
        }
        Ok(warnings)
    }
}

impl<S: Scalar> SgParams<S> {
    fn omega_s(f0: S) -> S {
        S::TAU() * f0
    }

    /// Swing equation plus first-order governor. `p_e` is pu on device base.
    pub fn derivatives(&self, state: &SgState<S>, p_e: S, f0: S) -> SgState<S> {
        let omega_s = Self::omega_s(f0);
        let m = S::c(2.0) * self.inertia_h / omega_s;
        let speed_dev = (state.omega - omega_s) / omega_s;
        let d_delta = state.omega - omega_s;
        let d_omega = (state.p_m - p_e - self.damping_d * speed_dev) / m;
        // Governor drive on per-unit frequency deviation; (f0 - f)/f0 and
        // (omega_s - omega)/omega_s are the same quantity.
        let mut d_p_m = (-speed_dev / self.droop_r_d - (state.p_m - self.p_set)) / self.tau_g;
        if let Some((lo, hi)) = self.p_m_limits {
            if (state.p_m >= hi && d_p_m > S::zero()) || (state.p_m <= lo && d_p_m < S::zero()) {
                d_p_m = S::zero();
            }
        }
        SgState {
            delta: d_delta,
            omega: d_omega,
            p_m: d_p_m,
        }
    }

    /// Rotor frequency in hertz.
    pub fn frequency(&self, state: &SgState<S>) -> S {
        state.omega / S::TAU()
    }

    pub fn steady_state(&mut self, delta: S, p_e0: S, f0: S) -> SgState<S> {
        self.p_set = p_e0;
        SgState {
            delta,
            omega: Self::omega_s(f0),
            p_m: p_e0,
        }
    }

    pub fn validate(&self, name: &str) -> Result<Vec<String>, DeviceError> {
        let pos = |field: &'static str, value: S| {
            if value <= S::zero() {
                Err(DeviceError::NonPositive {
                    device: name.to_string(),
                    field,
                    value: value.as_f64(),
                })
            } else {
                Ok(())
            }
        };
        pos("inertia_h", self.inertia_h)?;
        pos("droop_r_d", self.droop_r_d)?;
        pos("tau_g", self.tau_g)?;
        pos("rating_mva", self.rating_mva)?;
        if self.damping_d < S::zero() {
            return Err(DeviceError::NonPositive {
                device: name.to_string(),
                field: "damping_d",
                value: self.damping_d.as_f64(),
            });
        }
        let mut warnings = Vec::new();
        if self.tau_g < S::c(0.5) {
            warnings.push(format!(
                "{name}: tau_g = {} s is below the 0.5 s governor floor",
                self.tau_g
            ));
        }
        Ok(warnings)
    }
}

/// Parameter block of either device kind.
#[derive(Debug, Clone, Copy)]
pub enum DeviceParams<S> {
    Sg(SgParams<S>),
    Gfm(GfmParams<S>),
}

/// State of either device kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeviceState<S> {
    Sg(SgState<S>),
    Gfm(GfmState<S>),
}

impl<S: Scalar> DeviceParams<S> {
    pub fn rating_mva(&self) -> S {
        match self {
            DeviceParams::Sg(p) => p.rating_mva,
            DeviceParams::Gfm(p) => p.rating_mva,
        }
    }

    pub fn p_set(&self) -> S {
        match self {
            DeviceParams::Sg(p) => p.p_set,
            DeviceParams::Gfm(p) => p.p_set,
        }
    }

    /// Inertia contribution for aggregate metrics; grid-forming inverters
    /// count as zero.
    pub fn inertia_h(&self) -> S {
        match self {
            DeviceParams::Sg(p) => p.inertia_h,
            DeviceParams::Gfm(_) => S::zero(),
        }
    }

    pub fn derivatives(&self, state: &DeviceState<S>, p_e: S, f0: S) -> DeviceState<S> {
        match (self, state) {
            (DeviceParams::Sg(p), DeviceState::Sg(s)) => DeviceState::Sg(p.derivatives(s, p_e, f0)),
            (DeviceParams::Gfm(p), DeviceState::Gfm(s)) => {
                DeviceState::Gfm(p.derivatives(s, p_e, f0))
            }
            _ => panic!("device state kind does not match parameter kind"),
        }
    }

    pub fn frequency(&self, state: &DeviceState<S>, f0: S) -> S {
        match (self, state) {
            (DeviceParams::Sg(p), DeviceState::Sg(s)) => p.frequency(s),
            (DeviceParams::Gfm(p), DeviceState::Gfm(s)) => p.frequency(s, f0),
            _ => panic!("device state kind does not match parameter kind"),
        }
    }

    /// Equilibrium initialization; rewrites the set point to `p_e0`.
    pub fn steady_state(&mut self, delta: S, p_e0: S, f0: S) -> DeviceState<S> {
        match self {
            DeviceParams::Sg(p) => DeviceState::Sg(p.steady_state(delta, p_e0, f0)),
            DeviceParams::Gfm(p) => DeviceState::Gfm(p.steady_state(delta, p_e0)),
        }
    }

    pub fn validate(&self, name: &str) -> Result<Vec<String>, DeviceError> {
        match self {
            DeviceParams::Sg(p) => p.validate(name),
            DeviceParams::Gfm(p) => p.validate(name),
        }
    }

    pub fn is_sg(&self) -> bool {
        matches!(self, DeviceParams::Sg(_))
    }
}

impl<S: Scalar> DeviceState<S> {
    /// Bus voltage angle imposed on the network.
    pub fn delta(&self) -> S {
        match self {
            DeviceState::Sg(s) => s.delta,
            DeviceState::Gfm(s) => s.delta,
        }
    }

    pub fn p_m(&self) -> S {
        match self {
            DeviceState::Sg(s) => s.p_m,
            DeviceState::Gfm(s) => s.p_m,
        }
    }

    /// `self + h * d`, treating `d` as a derivative of matching kind.
    pub fn axpy(&self, h: S, d: &DeviceState<S>) -> DeviceState<S> {
        match (self, d) {
            (DeviceState::Sg(a), DeviceState::Sg(b)) => DeviceState::Sg(SgState {
                delta: a.delta + h * b.delta,
                omega: a.omega + h * b.omega,
                p_m: a.p_m + h * b.p_m,
            }),
            (DeviceState::Gfm(a), DeviceState::Gfm(b)) => DeviceState::Gfm(GfmState {
                delta: a.delta + h * b.delta,
                p_m: a.p_m + h * b.p_m,
            }),
            _ => panic!("cannot combine states of different device kinds"),
        }
    }
}
