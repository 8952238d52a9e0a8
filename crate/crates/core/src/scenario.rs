//! Scenario schema and loader: structured-text (TOML) files describing a
//! network, device fleet, dispatch, events, and solver settings, plus the
//! equilibrium initializer and the SG-to-GFM substitution-series generator.
//!
//! The file grammar is documented in the repository README. Quantities may
//! be given in per unit or in engineering units (`*_mw`); the loader
//! normalizes everything onto the system MVA base (network, loads, events)
//! or the device base (dispatch).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{DeviceError, DeviceParams, DeviceState, GfmParams, SgParams};
use crate::engine::{Event, EventKind, SimConfig};
use crate::net::{Branch, Bus, BusKind, NetError, Network};
use crate::scalar::Scalar;

pub const DEFAULT_F0_HZ: f64 = 60.0;
pub const DEFAULT_DROOP: f64 = 0.05;
pub const DEFAULT_TAU_I_S: f64 = 0.05;
pub const DEFAULT_INERTIA_H_S: f64 = 4.0;
pub const DEFAULT_TAU_G_S: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("dispatch initialization failed: {0}")]
    Init(NetError),
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub system: SystemSection,
    pub buses: Vec<BusEntry>,
    pub branches: Vec<BranchEntry>,
    pub devices: Vec<DeviceEntry>,
    #[serde(default)]
    pub loads: Vec<LoadEntry>,
    #[serde(default)]
    pub events: Vec<EventEntry>,
    #[serde(default)]
    pub sim: SimSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub name: String,
    /// System MVA base all network quantities are normalized onto.
    pub base_mva: f64,
    #[serde(default = "default_f0")]
    pub f0: f64,
    /// MVA base branch reactances are tabulated on when a branch does not
    /// carry its own `base_mva`; defaults to `base_mva`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_base_mva: Option<f64>,
}

fn default_f0() -> f64 {
    DEFAULT_F0_HZ
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusEntry {
    pub id: usize,
    pub kind: BusKind,
    /// Voltage magnitude set point, pu.
    #[serde(default = "default_vm")]
    pub vm: f64,
}

fn default_vm() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchEntry {
    pub from: usize,
    pub to: usize,
    /// Series reactance, pu on the branch base. Exactly one of `x`/`b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Series susceptance, pu on the branch base.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_mva: Option<f64>,
    #[serde(default = "default_true")]
    pub in_service: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKindTag {
    Sg,
    Gfm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub name: String,
    pub bus: usize,
    pub kind: DeviceKindTag,
    pub rating_mva: f64,
    /// Dispatch, pu on the device base. Exactly one of `dispatch`/`dispatch_mw`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispatch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispatch_mw: Option<f64>,
    // Synchronous generator block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub droop_r_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_g: Option<f64>,
    // Grid-forming inverter block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub droop_m_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_i: Option<f64>,
    // Optional pre-converter power clamp, either kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_m_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_m_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadEntry {
    pub bus: usize,
    /// Active load, pu on system base. Exactly one of `p`/`p_mw`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_mw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventEntry {
    LoadStep {
        t: f64,
        bus: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta_p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta_p_mw: Option<f64>,
    },
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }
}

impl EventEntry {
    pub fn time(&self) -> f64 {
        match self {
            EventEntry::LoadStep { t, .. } => *t,
        }
    }

    pub fn set_time(&mut self, new_t: f64) {
        match self {
            EventEntry::LoadStep { t, .. } => *t = new_t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub duration: f64,
    pub record_stride: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// ROCOF sliding window used by the metric suite, seconds.
    pub rocof_window: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            duration: 15.0,
            record_stride: 1,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            rocof_window: 0.1,
        }
    }
}

// ---------------------------------------------------------------------------
// Runtime scenario
// ---------------------------------------------------------------------------

/// One device placement within a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioDevice<S> {
    pub name: String,
    /// Bus id (not index).
    pub bus: usize,
    pub params: DeviceParams<S>,
    /// Scheduled output, pu on the device base.
    pub dispatch: S,
}

/// A validated scenario: the unit of simulation.
#[derive(Debug, Clone)]
pub struct Scenario<S> {
    pub name: String,
    pub system_base: S,
    pub f0: S,
    pub net: Network<S>,
    pub devices: Vec<ScenarioDevice<S>>,
    pub events: Vec<Event<S>>,
    pub sim: SimConfig<S>,
    pub rocof_window: S,
    source: ScenarioFile,
}

/// Loader result: the scenario plus non-fatal diagnostics.
#[derive(Debug, Clone)]
pub struct Loaded<S> {
    pub scenario: Scenario<S>,
    pub warnings: Vec<String>,
}

impl<S: Scalar> Scenario<S> {
    pub fn from_toml_str(text: &str) -> Result<Loaded<S>, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text)?;
        Self::from_file(file)
    }

    /// Validate a parsed file and build the runtime scenario.
    pub fn from_file(file: ScenarioFile) -> Result<Loaded<S>, ScenarioError> {
        let mut warnings = Vec::new();
        let sys = &file.system;
        if sys.base_mva <= 0.0 {
            return Err(invalid("system.base_mva", "must be positive"));
        }
        if sys.f0 <= 0.0 {
            return Err(invalid("system.f0", "must be positive"));
        }
        let branch_base_default = sys.branch_base_mva.unwrap_or(sys.base_mva);
        if branch_base_default <= 0.0 {
            return Err(invalid("system.branch_base_mva", "must be positive"));
        }

        // Buses.
        if file.buses.is_empty() {
            return Err(invalid("buses", "at least one bus is required"));
        }
        for (i, b) in file.buses.iter().enumerate() {
            if file.buses[..i].iter().any(|o| o.id == b.id) {
                return Err(invalid(
                    format!("buses[{i}]"),
                    format!("duplicate bus id {}", b.id),
                ));
            }
            if b.vm <= 0.0 {
                return Err(invalid(format!("buses[{i}].vm"), "must be positive"));
            }
        }
        let bus_kind = |id: usize| file.buses.iter().find(|b| b.id == id).map(|b| b.kind);

        // Sim settings (validated early; event checks need dt/duration).
        let simsec = &file.sim;
        if simsec.dt <= 0.0 {
            return Err(invalid("sim.dt", "must be positive"));
        }
        if simsec.duration < 0.0 {
            return Err(invalid("sim.duration", "must be non-negative"));
        }
        if simsec.record_stride == 0 {
            return Err(invalid("sim.record_stride", "must be at least 1"));
        }
        let n_steps = (simsec.duration / simsec.dt).round() as usize;
        if !n_steps.is_multiple_of(simsec.record_stride) {
            return Err(invalid(
                "sim.record_stride",
                format!("must divide the {n_steps} integration steps"),
            ));
        }
        if simsec.newton_tol <= 0.0 {
            return Err(invalid("sim.newton_tol", "must be positive"));
        }
        if simsec.newton_max_iter == 0 {
            return Err(invalid("sim.newton_max_iter", "must be at least 1"));
        }
        if simsec.rocof_window <= 0.0 {
            return Err(invalid("sim.rocof_window", "must be positive"));
        }

        // Branches.
        let mut branches = Vec::with_capacity(file.branches.len());
        for (i, br) in file.branches.iter().enumerate() {
            let path = format!("branches[{i}]");
            if bus_kind(br.from).is_none() {
                return Err(invalid(
                    format!("{path}.from"),
                    format!("bus {} not defined", br.from),
                ));
            }
            if bus_kind(br.to).is_none() {
                return Err(invalid(
                    format!("{path}.to"),
                    format!("bus {} not defined", br.to),
                ));
            }
            let base = br.base_mva.unwrap_or(branch_base_default);
            if base <= 0.0 {
                return Err(invalid(format!("{path}.base_mva"), "must be positive"));
            }
            let b_local = match (br.x, br.b) {
                (Some(x), None) => {
                    if x <= 0.0 {
                        return Err(invalid(format!("{path}.x"), "must be positive"));
                    }
                    1.0 / x
                }
                (None, Some(b)) => {
                    if b <= 0.0 {
                        return Err(invalid(format!("{path}.b"), "must be positive"));
                    }
                    b
                }
                _ => {
                    return Err(invalid(path, "exactly one of `x` or `b` is required"));
                }
            };
            branches.push(Branch {
                from_bus: br.from,
                to_bus: br.to,
                susceptance: S::c(b_local * base / sys.base_mva),
                in_service: br.in_service,
            });
        }

        // Loads onto buses.
        let mut p_load = vec![0.0f64; file.buses.len()];
        for (i, l) in file.loads.iter().enumerate() {
            let path = format!("loads[{i}]");
            let Some(pos) = file.buses.iter().position(|b| b.id == l.bus) else {
                return Err(invalid(
                    format!("{path}.bus"),
                    format!("bus {} not defined", l.bus),
                ));
            };
            if file.buses[pos].kind == BusKind::Passthrough {
                return Err(invalid(
                    format!("{path}.bus"),
                    format!("bus {} is a passthrough bus and cannot carry load", l.bus),
                ));
            }
            if file.loads[..i].iter().any(|o| o.bus == l.bus) {
                return Err(invalid(
                    format!("{path}.bus"),
                    format!("duplicate load entry for bus {}", l.bus),
                ));
            }
            let p = match (l.p, l.p_mw) {
                (Some(p), None) => p,
                (None, Some(mw)) => mw / sys.base_mva,
                _ => {
                    return Err(invalid(path, "exactly one of `p` or `p_mw` is required"));
                }
            };
            p_load[pos] = p;
        }

        let buses: Vec<Bus<S>> = file
            .buses
            .iter()
            .zip(&p_load)
            .map(|(b, &p)| Bus {
                id: b.id,
                kind: b.kind,
                voltage_mag: S::c(b.vm),
                p_load: S::c(p),
            })
            .collect();
        let net = Network::new(buses, branches)?;

        // Devices.
        if file.devices.is_empty() {
            return Err(invalid("devices", "at least one device is required"));
        }
        let mut devices = Vec::with_capacity(file.devices.len());
        for (i, d) in file.devices.iter().enumerate() {
            let path = format!("devices[{i}] ({})", d.name);
            if file.devices[..i].iter().any(|o| o.name == d.name) {
                return Err(invalid(path, "duplicate device name"));
            }
            match bus_kind(d.bus) {
                None => {
                    return Err(invalid(
                        format!("{path}.bus"),
                        format!("bus {} not defined", d.bus),
                    ));
                }
                Some(BusKind::Device) => {}
                Some(_) => {
                    return Err(invalid(
                        format!("{path}.bus"),
                        format!("bus {} is not a device bus", d.bus),
                    ));
                }
            }
            if file.devices[..i].iter().any(|o| o.bus == d.bus) {
                return Err(invalid(
                    format!("{path}.bus"),
                    format!("bus {} already carries a device", d.bus),
                ));
            }
            if d.rating_mva <= 0.0 {
                return Err(invalid(format!("{path}.rating_mva"), "must be positive"));
            }
            let dispatch = match (d.dispatch, d.dispatch_mw) {
                (Some(p), None) => p,
                (None, Some(mw)) => mw / d.rating_mva,
                (None, None) => 0.0,
                _ => {
                    return Err(invalid(
                        path,
                        "give at most one of `dispatch` or `dispatch_mw`",
                    ));
                }
            };
            let p_m_limits = match (d.p_m_min, d.p_m_max) {
                (None, None) => None,
                (lo, hi) => Some((
                    S::c(lo.unwrap_or(f64::NEG_INFINITY)),
                    S::c(hi.unwrap_or(f64::INFINITY)),
                )),
            };
            let params = match d.kind {
                DeviceKindTag::Sg => {
                    for (field, present) in [("droop_m_p", d.droop_m_p), ("tau_i", d.tau_i)] {
                        if present.is_some() {
                            return Err(invalid(
                                format!("{path}.{field}"),
                                "not a synchronous-generator parameter",
                            ));
                        }
                    }
                    DeviceParams::Sg(SgParams {
                        inertia_h: S::c(d.inertia_h.unwrap_or(DEFAULT_INERTIA_H_S)),
                        damping_d: S::c(d.damping_d.unwrap_or(0.0)),
                        droop_r_d: S::c(d.droop_r_d.unwrap_or(DEFAULT_DROOP)),
                        tau_g: S::c(d.tau_g.unwrap_or(DEFAULT_TAU_G_S)),
                        rating_mva: S::c(d.rating_mva),
                        p_set: S::c(dispatch),
                        p_m_limits,
                    })
                }
                DeviceKindTag::Gfm => {
                    for (field, present) in [
                        ("inertia_h", d.inertia_h),
                        ("damping_d", d.damping_d),
                        ("droop_r_d", d.droop_r_d),
                        ("tau_g", d.tau_g),
                    ] {
                        if present.is_some() {
                            return Err(invalid(
                                format!("{path}.{field}"),
                                "not a grid-forming-inverter parameter",
                            ));
                        }
                    }
                    DeviceParams::Gfm(GfmParams {
                        droop_m_p: S::c(d.droop_m_p.unwrap_or(DEFAULT_DROOP)),
                        tau_i: S::c(d.tau_i.unwrap_or(DEFAULT_TAU_I_S)),
                        rating_mva: S::c(d.rating_mva),
                        p_set: S::c(dispatch),
                        p_m_limits,
                    })
                }
            };
            warnings.extend(params.validate(&d.name)?);
            devices.push(ScenarioDevice {
                name: d.name.clone(),
                bus: d.bus,
                params,
                dispatch: S::c(dispatch),
            });
        }
        // Every device-kind bus must carry exactly one device.
        for b in file.buses.iter().filter(|b| b.kind == BusKind::Device) {
            if !file.devices.iter().any(|d| d.bus == b.id) {
                return Err(invalid(
                    "devices",
                    format!("device bus {} has no device attached", b.id),
                ));
            }
        }

        // Events.
        let mut events = Vec::with_capacity(file.events.len());
        for (i, e) in file.events.iter().enumerate() {
            let path = format!("events[{i}]");
            let EventEntry::LoadStep {
                t,
                bus,
                delta_p,
                delta_p_mw,
            } = *e;
            if !(0.0..=simsec.duration).contains(&t) {
                return Err(invalid(
                    format!("{path}.t"),
                    format!("{t} s is outside [0, {}]", simsec.duration),
                ));
            }
            let steps = (t / simsec.dt).round();
            if (t - steps * simsec.dt).abs() > 1e-12 {
                return Err(invalid(
                    format!("{path}.t"),
                    format!("{t} s does not sit on the {} s grid", simsec.dt),
                ));
            }
            match bus_kind(bus) {
                None => {
                    return Err(invalid(
                        format!("{path}.bus"),
                        format!("bus {bus} not defined"),
                    ));
                }
                Some(BusKind::Passthrough) => {
                    return Err(invalid(
                        format!("{path}.bus"),
                        format!("bus {bus} is a passthrough bus and cannot carry load"),
                    ));
                }
                Some(_) => {}
            }
            let dp = match (delta_p, delta_p_mw) {
                (Some(p), None) => p,
                (None, Some(mw)) => mw / sys.base_mva,
                _ => {
                    return Err(invalid(
                        path,
                        "exactly one of `delta_p` or `delta_p_mw` is required",
                    ));
                }
            };
            events.push(Event {
                time: S::c(t),
                kind: EventKind::LoadStep {
                    bus,
                    delta_p: S::c(dp),
                },
            });
        }
        events.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite event times"));

        // Dispatch/load balance diagnostic; the reference device absorbs any
        // imbalance at initialization.
        let total_dispatch_mw: f64 = file
            .devices
            .iter()
            .zip(&devices)
            .map(|(entry, d)| d.dispatch.as_f64() * entry.rating_mva)
            .sum();
        let total_load_mw: f64 = p_load.iter().sum::<f64>() * sys.base_mva;
        if (total_dispatch_mw - total_load_mw).abs() > 1e-6 * sys.base_mva.max(1.0) {
            warnings.push(format!(
                "dispatch ({total_dispatch_mw:.3} MW) does not balance load ({total_load_mw:.3} MW); \
                 the reference device absorbs the difference at initialization"
            ));
        }

        let sim = SimConfig {
            dt: S::c(simsec.dt),
            duration: S::c(simsec.duration),
            record_stride: simsec.record_stride,
            newton_tol: S::c(simsec.newton_tol),
            newton_max_iter: simsec.newton_max_iter,
        };
        let scenario = Scenario {
            name: sys.name.clone(),
            system_base: S::c(sys.base_mva),
            f0: S::c(sys.f0),
            net,
            devices,
            events,
            sim,
            rocof_window: S::c(simsec.rocof_window),
            source: file,
        };
        Ok(Loaded { scenario, warnings })
    }

    /// The normalized file representation this scenario was built from.
    pub fn source(&self) -> &ScenarioFile {
        &self.source
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(&self.source).expect("scenario serializes")
    }

    /// Total scheduled generation, pu on system base.
    pub fn total_dispatch(&self) -> S {
        self.devices
            .iter()
            .map(|d| d.dispatch * d.params.rating_mva() / self.system_base)
            .sum()
    }

    pub fn total_rating(&self) -> S {
        self.devices.iter().map(|d| d.params.rating_mva()).sum()
    }
}

/// Equilibrium initialization of a scenario.
#[derive(Debug, Clone)]
pub struct Initialized<S> {
    /// Device parameters with set points rewritten to the solved dispatch.
    pub devices: Vec<DeviceParams<S>>,
    pub states: Vec<DeviceState<S>>,
    /// Angles of every bus from the dispatch power flow, radians; the first
    /// device bus is the reference at zero.
    pub angles: Vec<S>,
    /// Solved electric power of each device, pu on the device base.
    pub device_p_e: Vec<S>,
}

/// Solve the dispatch power flow and place every device at an exact
/// equilibrium. The first device bus is the angle reference; its device
/// absorbs any dispatch/load imbalance, and every set point is taken from
/// the solved flows so that a zero-event simulation stays flat.
pub fn initialize_dispatch<S: Scalar>(
    scenario: &Scenario<S>,
) -> Result<Initialized<S>, ScenarioError> {
    let net = &scenario.net;
    let loads = net.base_loads();
    let mut targets: Vec<S> = loads.iter().map(|&l| -l).collect();
    for d in &scenario.devices {
        let idx = net.bus_index(d.bus).expect("validated bus");
        targets[idx] = targets[idx] + d.dispatch * d.params.rating_mva() / scenario.system_base;
    }
    let ref_idx = net.bus_index(scenario.devices[0].bus).expect("validated");
    let guess = vec![S::zero(); net.n_bus()];
    let (angles, _, _) = net
        .newton_angles(
            &[(ref_idx, S::zero())],
            &targets,
            &guess,
            &scenario.sim.solve_opts(),
        )
        .map_err(ScenarioError::Init)?;
    let inj = net.injections(&angles);
    let mut devices = Vec::with_capacity(scenario.devices.len());
    let mut states = Vec::with_capacity(scenario.devices.len());
    let mut device_p_e = Vec::with_capacity(scenario.devices.len());
    for d in &scenario.devices {
        let idx = net.bus_index(d.bus).expect("validated bus");
        let p_e_sys = inj[idx] + loads[idx];
        let p_e_dev = p_e_sys * scenario.system_base / d.params.rating_mva();
        let mut params = d.params;
        let state = params.steady_state(angles[idx], p_e_dev, scenario.f0);
        devices.push(params);
        states.push(state);
        device_p_e.push(p_e_dev);
    }
    Ok(Initialized {
        devices,
        states,
        angles,
        device_p_e,
    })
}

/// Generate the substitution ladder: step `k` replaces the first `k` names
/// in `order` with grid-forming inverters of equal rating and dispatch whose
/// droop equals the replaced governor droop. Step 0 is the base scenario.
pub fn make_substitution_series<S: Scalar>(
    scenario: &Scenario<S>,
    order: &[&str],
) -> Result<Vec<Scenario<S>>, ScenarioError> {
    let file = scenario.source();
    for (i, name) in order.iter().enumerate() {
        let path = format!("order[{i}]");
        let Some(entry) = file.devices.iter().find(|d| &d.name == name) else {
            return Err(invalid(path, format!("no device named {name}")));
        };
        if entry.kind != DeviceKindTag::Sg {
            return Err(invalid(path, format!("device {name} is not an SG")));
        }
        if order[..i].contains(name) {
            return Err(invalid(path, format!("device {name} listed twice")));
        }
    }
    if order.is_empty() {
        return Ok(vec![scenario.clone()]);
    }
    let base_name = file.system.name.clone();
    let mut out = Vec::with_capacity(order.len() + 1);
    for k in 0..=order.len() {
        let mut f = file.clone();
        f.system.name = format!("{base_name}_s{k}");
        for name in &order[..k] {
            let entry = f
                .devices
                .iter_mut()
                .find(|d| &d.name == name)
                .expect("checked above");
            entry.kind = DeviceKindTag::Gfm;
            entry.droop_m_p = Some(entry.droop_r_d.unwrap_or(DEFAULT_DROOP));
            entry.tau_i = Some(DEFAULT_TAU_I_S);
            entry.inertia_h = None;
            entry.damping_d = None;
            entry.droop_r_d = None;
            entry.tau_g = None;
        }
        out.push(Scenario::from_file(f)?.scenario);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Bundled test systems
// ---------------------------------------------------------------------------

/// Scenario files shipped with the crate.
pub mod bundled {
    pub const SINGLE_GFM: &str = include_str!("../../../data/single_gfm/scenario.toml");
    pub const SINGLE_SG_H4: &str = include_str!("../../../data/single_sg/scenario.toml");
    pub const SINGLE_SG_H3: &str = include_str!("../../../data/single_sg/scenario_h3.toml");
    pub const SINGLE_SG_H2: &str = include_str!("../../../data/single_sg/scenario_h2.toml");
    pub const SINGLE_SG_H1: &str = include_str!("../../../data/single_sg/scenario_h1.toml");
    pub const IEEE9_A: &str = include_str!("../../../data/ieee9/scenario_a.toml");
    pub const IEEE39_0: &str = include_str!("../../../data/ieee39/scenario_0.toml");

    /// Every bundled scenario as `(label, toml text)`.
    pub fn all() -> Vec<(&'static str, &'static str)> {
        vec![
            ("single_gfm", SINGLE_GFM),
            ("single_sg_h4", SINGLE_SG_H4),
            ("single_sg_h3", SINGLE_SG_H3),
            ("single_sg_h2", SINGLE_SG_H2),
            ("single_sg_h1", SINGLE_SG_H1),
            ("ieee9_a", IEEE9_A),
            ("ieee39_0", IEEE39_0),
        ]
    }
}
