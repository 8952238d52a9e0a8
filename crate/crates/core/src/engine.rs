//! Time-domain integration of the coupled device ODEs with the algebraic
//! network re-solved at every Runge-Kutta stage, plus exact-grid event
//! application and CSV export of the sampled trajectories.

use std::io::{self, Write};

use thiserror::Error;

use crate::device::{DeviceParams, DeviceState};
use crate::net::{NetError, Network, NetworkSolution, SolveOpts};
use crate::scalar::Scalar;
use crate::scenario::{initialize_dispatch, Scenario, ScenarioError};

/// Integration settings. Events must land exactly on the `dt` grid.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig<S> {
    pub dt: S,
    pub duration: S,
    /// Record every n-th step (1 = every step).
    pub record_stride: usize,
    pub newton_tol: S,
    pub newton_max_iter: usize,
}

impl<S: Scalar> Default for SimConfig<S> {
    fn default() -> Self {
        Self {
            dt: S::c(1e-3),
            duration: S::c(15.0),
            record_stride: 1,
            newton_tol: S::c(1e-10),
            newton_max_iter: 50,
        }
    }
}

impl<S: Scalar> SimConfig<S> {
    pub fn solve_opts(&self) -> SolveOpts<S> {
        SolveOpts {
            tol: self.newton_tol,
            max_iter: self.newton_max_iter,
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).round().as_f64() as usize
    }
}

/// A scheduled disturbance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<S> {
    pub time: S,
    pub kind: EventKind<S>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind<S> {
    /// Add `delta_p` (pu, system base) to the load at a bus.
    LoadStep { bus: usize, delta_p: S },
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario initialization failed: {0}")]
    Init(#[from] ScenarioError),
    #[error("network solve failed at t = {t} s: {source}")]
    Network { t: f64, source: NetError },
    #[error("instability at t = {t} s: device {device} at {f} Hz is more than 5 Hz from nominal")]
    Instability { t: f64, device: String, f: f64 },
    #[error("event targets unknown bus {bus}")]
    UnknownEventBus { bus: usize },
}

/// Sampled trajectories of one run. Device columns are per unit on the
/// device base; bus angles are radians relative to the first device bus.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<S> {
    pub t: Vec<S>,
    pub device_names: Vec<String>,
    /// `f[device][sample]`, hertz.
    pub f: Vec<Vec<S>>,
    /// `p_m[device][sample]`.
    pub p_m: Vec<Vec<S>>,
    /// `p_e[device][sample]`.
    pub p_e: Vec<Vec<S>>,
    pub bus_ids: Vec<usize>,
    /// `angle[bus][sample]`.
    pub angle: Vec<Vec<S>>,
    /// Rating-weighted average frequency per sample, hertz.
    pub avg_f: Vec<S>,
}

impl<S: Scalar> TimeSeries<S> {
    /// Sample spacing; the grid is uniform by construction.
    pub fn dt(&self) -> S {
        self.t[1] - self.t[0]
    }

    pub fn device_index(&self, name: &str) -> Option<usize> {
        self.device_names.iter().position(|n| n == name)
    }

    /// CSV export with 9 significant digits.
    pub fn to_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write!(w, "t")?;
        for name in &self.device_names {
            write!(w, ",dev:{name}:f,dev:{name}:pm,dev:{name}:pe")?;
        }
        for id in &self.bus_ids {
            write!(w, ",bus:{id}:angle")?;
        }
        writeln!(w, ",avg_f")?;
        for n in 0..self.t.len() {
            write!(w, "{:.8e}", self.t[n])?;
            for k in 0..self.device_names.len() {
                write!(
                    w,
                    ",{:.8e},{:.8e},{:.8e}",
                    self.f[k][n], self.p_m[k][n], self.p_e[k][n]
                )?;
            }
            for b in 0..self.bus_ids.len() {
                write!(w, ",{:.8e}", self.angle[b][n])?;
            }
            writeln!(w, ",{:.8e}", self.avg_f[n])?;
        }
        Ok(())
    }
}

/// Apply an event to the live load vector. `loads` is indexed in bus order.
pub fn apply_event<S: Scalar>(
    loads: &mut [S],
    event: &Event<S>,
    net: &Network<S>,
) -> Result<(), SimError> {
    match event.kind {
        EventKind::LoadStep { bus, delta_p } => {
            let i = net
                .bus_index(bus)
                .ok_or(SimError::UnknownEventBus { bus })?;
            loads[i] = loads[i] + delta_p;
        }
    }
    Ok(())
}

/// The coupled device/network right-hand side: evaluating a derivative
/// means imposing the current device angles on the network, solving the
/// algebraic layer, and feeding the resulting electric powers back into the
/// device ODEs.
pub struct CoupledSystem<'a, S> {
    pub net: &'a Network<S>,
    pub devices: &'a [DeviceParams<S>],
    /// Device k's position within `net.device_buses()`.
    device_pos: Vec<usize>,
    pub f0: S,
    pub system_base: S,
    pub opts: SolveOpts<S>,
}

impl<'a, S: Scalar> CoupledSystem<'a, S> {
    /// `device_bus_ids` gives each device's bus id in device order.
    pub fn new(
        net: &'a Network<S>,
        devices: &'a [DeviceParams<S>],
        device_bus_ids: &[usize],
        f0: S,
        system_base: S,
        opts: SolveOpts<S>,
    ) -> Result<Self, SimError> {
        let device_pos = device_bus_ids
            .iter()
            .map(|&id| {
                let idx = net
                    .bus_index(id)
                    .ok_or(SimError::UnknownEventBus { bus: id })?;
                net.device_buses()
                    .iter()
                    .position(|&b| b == idx)
                    .ok_or(SimError::UnknownEventBus { bus: id })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            net,
            devices,
            device_pos,
            f0,
            system_base,
            opts,
        })
    }

    /// Electric power of each device in device-base per unit, extracted from
    /// a network solution.
    pub fn device_p_e(&self, sol: &NetworkSolution<S>) -> Vec<S> {
        self.devices
            .iter()
            .zip(&self.device_pos)
            .map(|(d, &pos)| sol.device_p_e[pos] * self.system_base / d.rating_mva())
            .collect()
    }

    fn solve_at(
        &self,
        states: &[DeviceState<S>],
        loads: &[S],
        guess: &[S],
    ) -> Result<NetworkSolution<S>, NetError> {
        let mut angles = vec![S::zero(); self.net.device_buses().len()];
        for (k, state) in states.iter().enumerate() {
            angles[self.device_pos[k]] = state.delta();
        }
        self.net.solve(&angles, loads, guess, &self.opts)
    }

    /// Derivatives of every device state at the given point, along with the
    /// network solution used to produce them.
    pub fn derivatives(
        &self,
        states: &[DeviceState<S>],
        loads: &[S],
        guess: &[S],
    ) -> Result<(Vec<DeviceState<S>>, NetworkSolution<S>), NetError> {
        let sol = self.solve_at(states, loads, guess)?;
        let p_e = self.device_p_e(&sol);
        let derivs = self
            .devices
            .iter()
            .zip(states)
            .zip(&p_e)
            .map(|((d, s), &pe)| d.derivatives(s, pe, self.f0))
            .collect();
        Ok((derivs, sol))
    }

    /// One classical 4-stage Runge-Kutta step. Each stage re-solves the
    /// network; `guess` is updated to the last stage solution as a warm
    /// start for the caller. `k1` may be supplied when the derivative at the
    /// entry state is already known.
    pub fn rk4_step(
        &self,
        states: &[DeviceState<S>],
        loads: &[S],
        guess: &mut Vec<S>,
        dt: S,
        k1: Option<&[DeviceState<S>]>,
    ) -> Result<Vec<DeviceState<S>>, NetError> {
        let half = S::c(0.5) * dt;
        let k1_owned;
        let k1 = match k1 {
            Some(k) => k,
            None => {
                let (d, sol) = self.derivatives(states, loads, guess)?;
                *guess = sol.angles;
                k1_owned = d;
                &k1_owned
            }
        };
        let s1: Vec<_> = states
            .iter()
            .zip(k1)
            .map(|(s, k)| s.axpy(half, k))
            .collect();
        let (k2, sol) = self.derivatives(&s1, loads, guess)?;
        *guess = sol.angles;
        let s2: Vec<_> = states
            .iter()
            .zip(&k2)
            .map(|(s, k)| s.axpy(half, k))
            .collect();
        let (k3, sol) = self.derivatives(&s2, loads, guess)?;
        *guess = sol.angles;
        let s3: Vec<_> = states
            .iter()
            .zip(&k3)
            .map(|(s, k)| s.axpy(dt, k))
            .collect();
        let (k4, sol) = self.derivatives(&s3, loads, guess)?;
        *guess = sol.angles;
        let sixth = dt / S::c(6.0);
        let two = S::c(2.0);
        Ok(states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let sum = k1[i]
                    .axpy(two, &k2[i])
                    .axpy(two, &k3[i])
                    .axpy(S::one(), &k4[i]);
                s.axpy(sixth, &sum)
            })
            .collect())
    }
}

/// Run a scenario end to end: equilibrium initialization, event-driven
/// fixed-step integration, and trajectory recording.
pub fn simulate<S: Scalar>(scenario: &Scenario<S>) -> Result<TimeSeries<S>, SimError> {
    let init = initialize_dispatch(scenario)?;
    let sim = &scenario.sim;
    let device_bus_ids: Vec<usize> = scenario.devices.iter().map(|d| d.bus).collect();
    let system = CoupledSystem::new(
        &scenario.net,
        &init.devices,
        &device_bus_ids,
        scenario.f0,
        scenario.system_base,
        sim.solve_opts(),
    )?;

    let n_steps = sim.n_steps();
    let stride = sim.record_stride.max(1);
    let n_dev = scenario.devices.len();
    let n_bus = scenario.net.n_bus();
    let n_samples = n_steps / stride + 1;

    let mut series = TimeSeries {
        t: Vec::with_capacity(n_samples),
        device_names: scenario.devices.iter().map(|d| d.name.clone()).collect(),
        f: vec![Vec::with_capacity(n_samples); n_dev],
        p_m: vec![Vec::with_capacity(n_samples); n_dev],
        p_e: vec![Vec::with_capacity(n_samples); n_dev],
        bus_ids: scenario.net.buses().iter().map(|b| b.id).collect(),
        angle: vec![Vec::with_capacity(n_samples); n_bus],
        avg_f: Vec::with_capacity(n_samples),
    };

    // Events are validated to sit on the grid; match them by step index so
    // no floating-point time comparison is needed in the loop.
    let mut events: Vec<(usize, Event<S>)> = scenario
        .events
        .iter()
        .map(|e| ((e.time / sim.dt).round().as_f64() as usize, *e))
        .collect();
    events.sort_by_key(|(step, _)| *step);
    let mut next_event = 0;

    let ratings: Vec<S> = init.devices.iter().map(|d| d.rating_mva()).collect();
    let total_rating: S = ratings.iter().copied().sum();
    let ref_bus = scenario
        .net
        .bus_index(scenario.devices[0].bus)
        .expect("validated");

    let mut states = init.states;
    let mut loads = scenario.net.base_loads();
    let mut guess = init.angles;

    for n in 0..=n_steps {
        let t = sim.dt * S::c(n as f64);
        while next_event < events.len() && events[next_event].0 == n {
            apply_event(&mut loads, &events[next_event].1, &scenario.net)?;
            next_event += 1;
        }
        let (derivs, sol) = system
            .derivatives(&states, &loads, &guess)
            .map_err(|source| SimError::Network {
                t: t.as_f64(),
                source,
            })?;
        guess = sol.angles.clone();

        let p_e_dev = system.device_p_e(&sol);
        let mut avg = S::zero();
        for k in 0..n_dev {
            let f = init.devices[k].frequency(&states[k], scenario.f0);
            if (f - scenario.f0).abs() > S::c(5.0) {
                return Err(SimError::Instability {
                    t: t.as_f64(),
                    device: scenario.devices[k].name.clone(),
                    f: f.as_f64(),
                });
            }
            avg = avg + ratings[k] * f;
            if n % stride == 0 {
                series.f[k].push(f);
                series.p_m[k].push(states[k].p_m());
                series.p_e[k].push(p_e_dev[k]);
            }
        }
        if n % stride == 0 {
            series.t.push(t);
            series.avg_f.push(avg / total_rating);
            let ref_angle = sol.angles[ref_bus];
            for b in 0..n_bus {
                series.angle[b].push(sol.angles[b] - ref_angle);
            }
        }
        if n == n_steps {
            break;
        }
        states = system
            .rk4_step(&states, &loads, &mut guess, sim.dt, Some(&derivs))
            .map_err(|source| SimError::Network {
                t: t.as_f64(),
                source,
            })?;
    }
    Ok(series)
}
