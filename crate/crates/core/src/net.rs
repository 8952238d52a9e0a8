//! Algebraic transmission-network model.
//!
//! Voltage magnitudes are held at their set points and losses are neglected,
//! so active power transfer over a branch follows the sine law
//! `p = B * Vi * Vj * sin(theta_i - theta_j)`. Device buses impose their
//! angle as a boundary condition; the remaining bus angles are found by
//! Newton iteration on the active-power balance.

use thiserror::Error;

use crate::scalar::Scalar;

/// Role of a bus in the algebraic layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    /// Carries exactly one generating device; its angle is a boundary condition.
    Device,
    /// May carry a constant-power load.
    Load,
    /// Pure junction; always zero load.
    Passthrough,
}

/// A network bus. Voltage magnitude is per unit and fixed for the whole run.
#[derive(Debug, Clone)]
pub struct Bus<S> {
    pub id: usize,
    pub kind: BusKind,
    pub voltage_mag: S,
    /// Base active load, per unit on system base, positive = consumption.
    pub p_load: S,
}

/// A lossless branch described by its series susceptance `B = 1/X`
/// on system base.
#[derive(Debug, Clone)]
pub struct Branch<S> {
    pub from_bus: usize,
    pub to_bus: usize,
    pub susceptance: S,
    pub in_service: bool,
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("bus {bus} referenced by branch {branch} is not defined")]
    UnknownBus { branch: usize, bus: usize },
    #[error("branch {0} connects bus {1} to itself")]
    SelfLoop(usize, usize),
    #[error("branch {0} has non-positive susceptance {1}")]
    BadSusceptance(usize, f64),
    #[error("bus {0} has non-positive voltage magnitude {1}")]
    BadVoltage(usize, f64),
    #[error("passthrough bus {0} carries load {1}")]
    LoadOnPassthrough(usize, f64),
    #[error("network is disconnected; buses {isolated:?} are isolated from bus {root}")]
    Disconnected { root: usize, isolated: Vec<usize> },
    #[error("no device bus present; the network has no angle reference")]
    NoDevice,
    #[error("load {load} pu at bus {bus} exceeds total incident transfer capacity {capacity} pu")]
    Infeasible { bus: usize, load: f64, capacity: f64 },
    #[error("Newton iteration did not converge after {iterations} iterations; last mismatch {mismatch} pu")]
    NotConverged { iterations: usize, mismatch: f64 },
    #[error("Newton Jacobian is singular at iteration {0}")]
    SingularJacobian(usize),
    #[error("expected {expected} {what}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Newton solver settings.
#[derive(Debug, Clone, Copy)]
pub struct SolveOpts<S> {
    /// Convergence threshold on the infinity norm of the power mismatch, pu.
    pub tol: S,
    pub max_iter: usize,
}

impl<S: Scalar> Default for SolveOpts<S> {
    fn default() -> Self {
        Self {
            tol: S::c(1e-10),
            max_iter: 50,
        }
    }
}

/// Result of a converged network solve.
#[derive(Debug, Clone)]
pub struct NetworkSolution<S> {
    /// One angle per bus, radians, in bus order.
    pub angles: Vec<S>,
    /// Electrical power exported by each device, per unit on system base,
    /// in `Network::device_buses` order. Includes any local load at the
    /// device bus.
    pub device_p_e: Vec<S>,
    /// Infinity norm of the final power mismatch, pu.
    pub max_mismatch: S,
    pub iterations: usize,
    /// Mismatch infinity norm before each Newton update, then the final one.
    pub mismatch_history: Vec<S>,
}

/// Branch compiled to bus indices for the solver loops.
#[derive(Debug, Clone, Copy)]
struct Edge<S> {
    i: usize,
    j: usize,
    /// susceptance scaled by both voltage magnitudes
    bvv: S,
}

/// Immutable network: buses, in-service branches, and the index maps the
/// solver needs. Construction validates every structural invariant.
#[derive(Debug, Clone)]
pub struct Network<S> {
    buses: Vec<Bus<S>>,
    branches: Vec<Branch<S>>,
    edges: Vec<Edge<S>>,
    device_buses: Vec<usize>,
}

impl<S: Scalar> Network<S> {
    pub fn new(buses: Vec<Bus<S>>, branches: Vec<Branch<S>>) -> Result<Self, NetError> {
        for bus in &buses {
            if bus.voltage_mag <= S::zero() {
                return Err(NetError::BadVoltage(bus.id, bus.voltage_mag.as_f64()));
            }
            if bus.kind == BusKind::Passthrough && bus.p_load != S::zero() {
                return Err(NetError::LoadOnPassthrough(bus.id, bus.p_load.as_f64()));
            }
        }
        let index_of = |id: usize| buses.iter().position(|b| b.id == id);
        let mut edges = Vec::new();
        for (k, br) in branches.iter().enumerate() {
            let i = index_of(br.from_bus).ok_or(NetError::UnknownBus {
                branch: k,
                bus: br.from_bus,
            })?;
            let j = index_of(br.to_bus).ok_or(NetError::UnknownBus {
                branch: k,
                bus: br.to_bus,
            })?;
            if i == j {
                return Err(NetError::SelfLoop(k, br.from_bus));
            }
            if br.susceptance <= S::zero() {
                return Err(NetError::BadSusceptance(k, br.susceptance.as_f64()));
            }
            if br.in_service {
                edges.push(Edge {
                    i,
                    j,
                    bvv: br.susceptance * buses[i].voltage_mag * buses[j].voltage_mag,
                });
            }
        }
        check_connected(buses.len(), &edges).map_err(|isolated| NetError::Disconnected {
            root: buses.first().map(|b| b.id).unwrap_or(0),
            isolated: isolated.into_iter().map(|i| buses[i].id).collect(),
        })?;
        let device_buses: Vec<usize> = buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.kind == BusKind::Device)
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            buses,
            branches,
            edges,
            device_buses,
        })
    }

    pub fn n_bus(&self) -> usize {
        self.buses.len()
    }

    pub fn buses(&self) -> &[Bus<S>] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch<S>] {
        &self.branches
    }

    /// Bus indices (not ids) of device buses, in bus order.
    pub fn device_buses(&self) -> &[usize] {
        &self.device_buses
    }

    pub fn bus_index(&self, id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    /// Base loads in bus order, pu on system base.
    pub fn base_loads(&self) -> Vec<S> {
        self.buses.iter().map(|b| b.p_load).collect()
    }

    /// Active power injected into the network at every bus for the given
    /// angle vector (sine law, lossless).
    pub fn injections(&self, angles: &[S]) -> Vec<S> {
        let mut inj = vec![S::zero(); self.buses.len()];
        for e in &self.edges {
            let flow = e.bvv * (angles[e.i] - angles[e.j]).sin();
            inj[e.i] = inj[e.i] + flow;
            inj[e.j] = inj[e.j] - flow;
        }
        inj
    }

    /// Newton solve for the angles of buses not listed in `fixed`.
    ///
    /// `fixed` pins (bus index, angle) pairs; every free bus `i` is driven to
    /// `injection(i) == targets[i]`. Returns the full angle vector and the
    /// mismatch history. The guess is returned untouched when it already
    /// satisfies the tolerance.
    pub fn newton_angles(
        &self,
        fixed: &[(usize, S)],
        targets: &[S],
        guess: &[S],
        opts: &SolveOpts<S>,
    ) -> Result<(Vec<S>, Vec<S>, usize), NetError> {
        let n = self.buses.len();
        if targets.len() != n {
            return Err(NetError::DimensionMismatch {
                what: "injection targets",
                expected: n,
                got: targets.len(),
            });
        }
        if guess.len() != n {
            return Err(NetError::DimensionMismatch {
                what: "guess angles",
                expected: n,
                got: guess.len(),
            });
        }
        let mut is_fixed = vec![false; n];
        let mut theta = guess.to_vec();
        for &(i, a) in fixed {
            is_fixed[i] = true;
            theta[i] = a;
        }
        let free: Vec<usize> = (0..n).filter(|&i| !is_fixed[i]).collect();

        // Necessary feasibility condition: a free bus cannot demand more
        // power than its incident branches can carry.
        for &i in &free {
            let capacity: S = self
                .edges
                .iter()
                .filter(|e| e.i == i || e.j == i)
                .map(|e| e.bvv)
                .sum();
            if targets[i].abs() > capacity {
                return Err(NetError::Infeasible {
                    bus: self.buses[i].id,
                    load: targets[i].abs().as_f64(),
                    capacity: capacity.as_f64(),
                });
            }
        }

        let nf = free.len();
        let mut pos = vec![usize::MAX; n];
        for (k, &i) in free.iter().enumerate() {
            pos[i] = k;
        }

        let mut history = Vec::new();
        let mut mism = vec![S::zero(); nf];
        let mut jac = vec![S::zero(); nf * nf];
        for it in 0..=opts.max_iter {
            let inj = self.injections(&theta);
            let mut max_mism = S::zero();
            for (k, &i) in free.iter().enumerate() {
                mism[k] = inj[i] - targets[i];
                max_mism = max_mism.max(mism[k].abs());
            }
            if !max_mism.is_finite() {
                return Err(NetError::NotConverged {
                    iterations: it,
                    mismatch: f64::NAN,
                });
            }
            history.push(max_mism);
            if max_mism < opts.tol {
                return Ok((theta, history, it));
            }
            if it == opts.max_iter {
                break;
            }
            // Assemble the Jacobian d(injection)/d(theta) over free buses.
            jac.iter_mut().for_each(|x| *x = S::zero());
            for e in &self.edges {
                let c = e.bvv * (theta[e.i] - theta[e.j]).cos();
                let (pi, pj) = (pos[e.i], pos[e.j]);
                if pi != usize::MAX {
                    jac[pi * nf + pi] = jac[pi * nf + pi] + c;
                    if pj != usize::MAX {
                        jac[pi * nf + pj] = jac[pi * nf + pj] - c;
                    }
                }
                if pj != usize::MAX {
                    jac[pj * nf + pj] = jac[pj * nf + pj] + c;
                    if pi != usize::MAX {
                        jac[pj * nf + pi] = jac[pj * nf + pi] - c;
                    }
                }
            }
            let mut rhs: Vec<S> = mism.iter().map(|&m| -m).collect();
            solve_dense(&mut jac, &mut rhs).map_err(|_| NetError::SingularJacobian(it))?;
            for (k, &i) in free.iter().enumerate() {
                theta[i] = theta[i] + rhs[k];
            }
        }
        Err(NetError::NotConverged {
            iterations: opts.max_iter,
            mismatch: history.last().map(|m| m.as_f64()).unwrap_or(f64::NAN),
        })
    }

    /// Solve the network with device angles imposed as boundary conditions.
    ///
    /// `device_angles` follows `device_buses` order; `loads` is per bus on
    /// system base. Every non-device bus is driven to
    /// `injection + load == 0`; the electric power of each device is the
    /// network injection at its bus plus any local load there.
    pub fn solve(
        &self,
        device_angles: &[S],
        loads: &[S],
        guess: &[S],
        opts: &SolveOpts<S>,
    ) -> Result<NetworkSolution<S>, NetError> {
        if self.device_buses.is_empty() {
            return Err(NetError::NoDevice);
        }
        if device_angles.len() != self.device_buses.len() {
            return Err(NetError::DimensionMismatch {
                what: "device angles",
                expected: self.device_buses.len(),
                got: device_angles.len(),
            });
        }
        if loads.len() != self.buses.len() {
            return Err(NetError::DimensionMismatch {
                what: "bus loads",
                expected: self.buses.len(),
                got: loads.len(),
            });
        }
        let fixed: Vec<(usize, S)> = self
            .device_buses
            .iter()
            .copied()
            .zip(device_angles.iter().copied())
            .collect();
        let targets: Vec<S> = loads.iter().map(|&l| -l).collect();
        let (angles, history, iterations) = self.newton_angles(&fixed, &targets, guess, opts)?;
        let inj = self.injections(&angles);
        let device_p_e: Vec<S> = self
            .device_buses
            .iter()
            .map(|&i| inj[i] + loads[i])
            .collect();
        let max_mismatch = *history.last().expect("history is never empty");
        Ok(NetworkSolution {
            angles,
            device_p_e,
            max_mismatch,
            iterations,
            mismatch_history: history,
        })
    }
}

/// Build the symmetric susceptance matrix of the in-service branches:
/// off-diagonal `(i, j)` is minus the summed susceptance of parallel
/// branches between buses `i` and `j`; the diagonal negates the row sum.
/// Indices are positions in `0..n_bus`; branch endpoints must already be
/// bus indices here.
pub fn build_susceptance<S: Scalar>(
    branches: &[Branch<S>],
    n_bus: usize,
) -> Result<Vec<Vec<S>>, NetError> {
    let mut m = vec![vec![S::zero(); n_bus]; n_bus];
    let mut edges = Vec::new();
    for (k, br) in branches.iter().enumerate() {
        if br.from_bus >= n_bus || br.to_bus >= n_bus {
            return Err(NetError::UnknownBus {
                branch: k,
                bus: br.from_bus.max(br.to_bus),
            });
        }
        if br.from_bus == br.to_bus {
            return Err(NetError::SelfLoop(k, br.from_bus));
        }
        if br.susceptance <= S::zero() {
            return Err(NetError::BadSusceptance(k, br.susceptance.as_f64()));
        }
        if !br.in_service {
            continue;
        }
        let (i, j) = (br.from_bus, br.to_bus);
        m[i][j] = m[i][j] - br.susceptance;
        m[j][i] = m[j][i] - br.susceptance;
        m[i][i] = m[i][i] + br.susceptance;
        m[j][j] = m[j][j] + br.susceptance;
        edges.push(Edge {
            i,
            j,
            bvv: br.susceptance,
        });
    }
    check_connected(n_bus, &edges).map_err(|isolated| NetError::Disconnected {
        root: 0,
        isolated,
    })?;
    Ok(m)
}

/// BFS reachability from bus 0; Err carries the unreached bus indices.
fn check_connected<S>(n_bus: usize, edges: &[Edge<S>]) -> Result<(), Vec<usize>> {
    if n_bus == 0 {
        return Ok(());
    }
    let mut adj = vec![Vec::new(); n_bus];
    for e in edges {
        adj[e.i].push(e.j);
        adj[e.j].push(e.i);
    }
    let mut seen = vec![false; n_bus];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    let isolated: Vec<usize> = (0..n_bus).filter(|&i| !seen[i]).collect();
    if isolated.is_empty() {
        Ok(())
    } else {
        Err(isolated)
    }
}

/// In-place dense linear solve with partial pivoting. `a` is row-major
/// `n x n` where `n = b.len()`; the solution lands in `b`.
fn solve_dense<S: Scalar>(a: &mut [S], b: &mut [S]) -> Result<(), ()> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == S::zero() || !best.is_finite() {
            return Err(());
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = S::one() / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == S::zero() {
                continue;
            }
            for k in col..n {
                a[row * n + k] = a[row * n + k] - factor * a[col * n + k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in col + 1..n {
            sum = sum - a[col * n + k] * b[k];
        }
        b[col] = sum / a[col * n + col];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bus(id: usize, kind: BusKind, p_load: f64) -> Bus<f64> {
        Bus {
            id,
            kind,
            voltage_mag: 1.0,
            p_load,
        }
    }

    fn branch(from: usize, to: usize, b: f64) -> Branch<f64> {
        Branch {
            from_bus: from,
            to_bus: to,
            susceptance: b,
            in_service: true,
        }
    }

    fn two_bus(load: f64) -> Network<f64> {
        Network::new(
            vec![bus(0, BusKind::Device, 0.0), bus(1, BusKind::Load, load)],
            vec![branch(0, 1, 2.0)],
        )
        .unwrap()
    }

    #[test]
    fn susceptance_single_branch() {
        let m = build_susceptance(&[branch(0, 1, 2.0)], 2).unwrap();
        assert_eq!(m, vec![vec![2.0, -2.0], vec![-2.0, 2.0]]);
    }

    #[test]
    fn susceptance_rejects_disconnected() {
        let br = branch(0, 1, 2.0);
        let out = Branch {
            in_service: false,
            ..br.clone()
        };
        let err = build_susceptance(&[out], 2).unwrap_err();
        match err {
            NetError::Disconnected { isolated, .. } => assert_eq!(isolated, vec![1]),
            other => panic!("expected Disconnected, got {other}"),
        }
    }

    #[test]
    fn susceptance_parallel_branches_sum() {
        let m = build_susceptance(&[branch(0, 1, 2.0), branch(1, 0, 3.0)], 2).unwrap();
        assert_eq!(m[0][1], -5.0);
        assert_eq!(m[0][0], 5.0);
    }

    /// Independent scalar oracle for the 2-bus case: bisection on
    /// `2 sin(0.1 - theta) = load`.
    fn two_bus_oracle(load: f64) -> f64 {
        let f = |theta: f64| 2.0 * (0.1 - theta).sin() - load;
        let (mut lo, mut hi) = (-1.0, 1.0);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn two_bus_hand_solved() {
        let net = two_bus(0.19867);
        let sol = net
            .solve(&[0.1], &net.base_loads(), &[0.1, 0.1], &SolveOpts::default())
            .unwrap();
        let expected = two_bus_oracle(0.19867);
        assert!((sol.angles[1] - expected).abs() < 1e-9);
        assert!(sol.angles[1].abs() < 1e-3, "bus-1 angle near zero");
        assert!((sol.device_p_e[0] - 0.19867).abs() < 1e-9);
    }

    #[test]
    fn zero_load_symmetry() {
        let net = Network::new(
            vec![
                bus(0, BusKind::Device, 0.0),
                bus(1, BusKind::Passthrough, 0.0),
                bus(2, BusKind::Device, 0.0),
            ],
            vec![branch(0, 1, 1.5), branch(1, 2, 2.5)],
        )
        .unwrap();
        let sol = net
            .solve(
                &[0.3, 0.3],
                &net.base_loads(),
                &[0.0, 0.0, 0.0],
                &SolveOpts::default(),
            )
            .unwrap();
        for a in &sol.angles {
            assert!((a - 0.3).abs() < 1e-9);
        }
        for p in &sol.device_p_e {
            assert!(p.abs() < 1e-9);
        }
    }

    #[test]
    fn lossless_balance() {
        let net = Network::new(
            vec![
                bus(0, BusKind::Device, 0.0),
                bus(1, BusKind::Load, 0.2),
                bus(2, BusKind::Load, 0.1),
            ],
            vec![branch(0, 1, 2.0), branch(1, 2, 3.0), branch(0, 2, 1.0)],
        )
        .unwrap();
        let loads = net.base_loads();
        let sol = net
            .solve(&[0.05], &loads, &[0.0; 3], &SolveOpts::default())
            .unwrap();
        let total_pe: f64 = sol.device_p_e.iter().sum();
        let total_load: f64 = loads.iter().sum();
        assert!((total_pe - total_load).abs() < 1e-9);
    }

    #[test]
    fn infeasible_load_detected() {
        let net = two_bus(1.5); // branch capacity is B*V*V = 2, but require sin > 1 elsewhere
        let err = net
            .solve(&[0.0], &[0.0, 2.5], &[0.0, 0.0], &SolveOpts::default())
            .unwrap_err();
        match err {
            NetError::Infeasible { bus, .. } => assert_eq!(bus, 1),
            other => panic!("expected Infeasible, got {other}"),
        }
    }

    #[test]
    fn nonconvergence_reports_mismatch() {
        // Feasible by the capacity precheck but outside the sine law's range
        // when approached from this side: load close to capacity with a tight
        // iteration budget.
        let net = two_bus(0.19867);
        let err = net
            .solve(
                &[0.1],
                &net.base_loads(),
                &[0.1, 0.1],
                &SolveOpts {
                    tol: 1e-30,
                    max_iter: 2,
                },
            )
            .unwrap_err();
        match err {
            NetError::NotConverged { mismatch, .. } => assert!(mismatch.is_finite()),
            other => panic!("expected NotConverged, got {other}"),
        }
    }

    #[test]
    fn warm_start_skips_iterations() {
        let net = two_bus(0.19867);
        let opts = SolveOpts::default();
        let first = net
            .solve(&[0.1], &net.base_loads(), &[0.1, 0.1], &opts)
            .unwrap();
        let second = net
            .solve(&[0.1], &net.base_loads(), &first.angles, &opts)
            .unwrap();
        assert_eq!(second.iterations, 0);
        assert_eq!(second.angles, first.angles);
    }
}
