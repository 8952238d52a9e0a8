//! Singular-perturbation reduced models and the second-order consistency
//! residual used to cross-check the full simulator.
//!
//! On the time scale of governor action the inverter's power filter is
//! quasi-steady, so its frequency becomes a memoryless function of the
//! electric power. Conversely, before the governor acts the generator's
//! mechanical power is pinned at its set point and the rotor decelerates
//! on a straight inertial line.

use thiserror::Error;

use crate::device::{GfmParams, SgParams};
use crate::engine::TimeSeries;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ReducedError {
    #[error("at least 3 samples are needed for second differences, got {0}")]
    TooShort(usize),
    #[error("device index {0} out of range")]
    BadDevice(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedSource {
    GfmAlgebraic,
    SgFirstOrder,
}

/// A reduced-model frequency trace on the same grid as its full-model pair.
#[derive(Debug, Clone)]
pub struct ReducedTrace<S> {
    pub t: Vec<S>,
    pub f: Vec<S>,
    pub source: ReducedSource,
}

/// Quasi-steady inverter frequency: with the power filter collapsed,
/// `p_m ~ p_e` and the droop maps electric power straight to frequency.
pub fn gfm_reduced_frequency<S: Scalar>(p_e: &[S], params: &GfmParams<S>, f0: S) -> Vec<S> {
    p_e.iter()
        .map(|&pe| f0 + f0 * params.droop_m_p * (params.p_set - pe))
        .collect()
}

/// Inertial decline of a generator holding its pre-event mechanical power:
/// a straight line of slope `-delta_p * f0 / (2 H)` hertz per second,
/// sampled on a `dt` grid out to `horizon`.
pub fn sg_reduced_trajectory<S: Scalar>(
    params: &SgParams<S>,
    delta_p: S,
    f0: S,
    dt: S,
    horizon: S,
) -> ReducedTrace<S> {
    let n = (horizon / dt).round().as_f64() as usize;
    let slope = -delta_p * f0 / (S::c(2.0) * params.inertia_h);
    let t: Vec<S> = (0..=n).map(|i| dt * S::c(i as f64)).collect();
    let f = t.iter().map(|&x| f0 + slope * x).collect();
    ReducedTrace {
        t,
        f,
        source: ReducedSource::SgFirstOrder,
    }
}

/// Residual of the generator's second-order pre-converter power relation,
/// evaluated per interior sample with central differences:
/// `r = d2(p_m)/dt2 + [ (p_m - p_e) / (2 H R_D) + d(p_m)/dt ] / tau_G`.
///
/// Near zero on any trace the full model produced with zero damping; large
/// when fed a trace from a different device kind. Samples whose stencil
/// straddles a load step see the genuine jump in the second derivative, so
/// callers should evaluate smooth segments.
pub fn sg_second_order_residual<S: Scalar>(
    t: &[S],
    p_m: &[S],
    p_e: &[S],
    params: &SgParams<S>,
) -> Result<Vec<(S, S)>, ReducedError> {
    let n = p_m.len();
    if n < 3 || t.len() != n || p_e.len() != n {
        return Err(ReducedError::TooShort(n));
    }
    let dt = t[1] - t[0];
    let two = S::c(2.0);
    let gain = S::one() / (two * params.inertia_h * params.droop_r_d);
    let mut out = Vec::with_capacity(n - 2);
    for k in 1..n - 1 {
        let dot = (p_m[k + 1] - p_m[k - 1]) / (two * dt);
        let ddot = (p_m[k + 1] - two * p_m[k] + p_m[k - 1]) / (dt * dt);
        let r = ddot - (-gain * (p_m[k] - p_e[k]) - dot) / params.tau_g;
        out.push((t[k], r));
    }
    Ok(out)
}

/// Convenience wrapper evaluating the residual on one device of a run.
pub fn sg_second_order_residual_of<S: Scalar>(
    series: &TimeSeries<S>,
    device: usize,
    params: &SgParams<S>,
) -> Result<Vec<(S, S)>, ReducedError> {
    if device >= series.device_names.len() {
        return Err(ReducedError::BadDevice(device));
    }
    sg_second_order_residual(&series.t, &series.p_m[device], &series.p_e[device], params)
}
