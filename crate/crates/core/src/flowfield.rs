//! Pointwise fluid state, analytic exact solutions and Euler residuals.
//!
//! Points and velocities are stored as 3-vectors in every dimension; in
//! two dimensions the third component is identically zero, which keeps dot
//! products, norms and the angular-momentum components uniform.

use nalgebra::Vector3;

use crate::solver::{GridFlow, GridState};
use crate::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Builds a point from a 2- or 3-component slice.
pub fn point(coords: &[f64]) -> Result<Vec3> {
    match *coords {
        [x, y] => Ok(Vec3::new(x, y, 0.0)),
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(Error::invalid(format!(
            "expected 2 or 3 coordinates, got {}",
            coords.len()
        ))),
    }
}

/// Density, velocity, entropy and pressure at one point of space-time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidState {
    pub rho: f64,
    pub vel: Vec3,
    pub entropy: f64,
    pub pressure: f64,
}

impl FluidState {
    /// State with pressure from `P = rho^gamma e^S`.
    pub fn from_entropy(rho: f64, vel: Vec3, entropy: f64, gamma: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::invalid(format!("density must be positive, got {rho}")));
        }
        let pressure = rho.powf(gamma) * entropy.exp();
        if !(pressure > 0.0 && pressure.is_finite()) {
            return Err(Error::NotFinite("pressure"));
        }
        Ok(Self {
            rho,
            vel,
            entropy,
            pressure,
        })
    }

    /// State with entropy `S = ln(P / rho^gamma)`.
    pub fn from_pressure(rho: f64, vel: Vec3, pressure: f64, gamma: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::invalid(format!("density must be positive, got {rho}")));
        }
        if !(pressure > 0.0) {
            return Err(Error::invalid(format!(
                "pressure must be positive, got {pressure}"
            )));
        }
        Ok(Self {
            rho,
            vel,
            entropy: (pressure / rho.powf(gamma)).ln(),
            pressure,
        })
    }

    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.pressure / self.rho).sqrt()
    }
}

/// A queryable smooth flow over space-time.
pub trait Flow: Sync {
    fn dimension(&self) -> usize;

    fn gamma(&self) -> f64;

    /// Minimum of the initial entropy over the whole space. Supplied by the
    /// scenario; a volume cannot observe it.
    fn entropy_floor(&self) -> f64;

    fn state(&self, t: f64, x: &Vec3) -> Result<FluidState>;

    /// Makes the flow queryable up to time `t`. Analytic flows are always
    /// ready.
    fn advance_to(&mut self, _t: f64) -> Result<()> {
        Ok(())
    }

    /// Most recent grid snapshot for grid-backed flows.
    fn latest_grid(&self) -> Option<&GridState> {
        None
    }
}

/// Parameters of the analytic catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticSpec {
    /// Uniform state at rest or in uniform translation.
    Constant {
        rho: f64,
        velocity: Vec<f64>,
        pressure: f64,
    },
    /// Homogeneous expansion `V = x / (t + t_c)`, `rho = rho0 (t_c/(t+t_c))^n`,
    /// uniform entropy. A negative `t_c` gives the collapsing branch, defined
    /// for `t < -t_c`, whose initial velocity is `-x / |t_c|`.
    Expansion { rho0: f64, entropy: f64, t_c: f64 },
}

#[derive(Debug, Clone)]
pub enum FlowKind {
    Constant { state: FluidState },
    Expansion { rho0: f64, entropy: f64, t_c: f64 },
    Grid(Box<GridFlow>),
}

#[derive(Debug, Clone)]
pub struct FlowField {
    dimension: usize,
    gamma: f64,
    kind: FlowKind,
    entropy_floor: f64,
}

fn check_dimension(dimension: usize) -> Result<()> {
    if dimension == 2 || dimension == 3 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "dimension must be 2 or 3, got {dimension}"
        )))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 1.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("gamma must exceed 1, got {gamma}")))
    }
}

/// Builds a flow from the analytic catalog.
///
/// The entropy floor defaults to the (uniform) entropy of the solution;
/// override it with [`FlowField::with_entropy_floor`].
pub fn make_analytic_flow(dimension: usize, gamma: f64, spec: &AnalyticSpec) -> Result<FlowField> {
    check_dimension(dimension)?;
    check_gamma(gamma)?;
    let (kind, floor) = match spec {
        AnalyticSpec::Constant {
            rho,
            velocity,
            pressure,
        } => {
            if velocity.len() != dimension {
                return Err(Error::invalid(format!(
                    "velocity has {} components, dimension is {dimension}",
                    velocity.len()
                )));
            }
            let state = FluidState::from_pressure(*rho, point(velocity)?, *pressure, gamma)?;
            (FlowKind::Constant { state }, state.entropy)
        }
        &AnalyticSpec::Expansion { rho0, entropy, t_c } => {
            if !(rho0 > 0.0) {
                return Err(Error::invalid(format!("rho0 must be positive, got {rho0}")));
            }
            if t_c == 0.0 || !t_c.is_finite() {
                return Err(Error::invalid("t_c must be finite and non-zero"));
            }
            if !entropy.is_finite() {
                return Err(Error::invalid("entropy must be finite"));
            }
            (FlowKind::Expansion { rho0, entropy, t_c }, entropy)
        }
    };
    Ok(FlowField {
        dimension,
        gamma,
        kind,
        entropy_floor: floor,
    })
}

impl FlowField {
    pub fn from_grid(grid: GridFlow, entropy_floor: f64) -> Self {
        Self {
            dimension: 2,
            gamma: grid.gamma(),
            kind: FlowKind::Grid(Box::new(grid)),
            entropy_floor,
        }
    }

    pub fn with_entropy_floor(mut self, s0: f64) -> Self {
        self.entropy_floor = s0;
        self
    }

    pub fn kind(&self) -> &FlowKind {
        &self.kind
    }

    /// Time interval `(start, end)` on which the flow is defined.
    pub fn time_window(&self) -> (f64, f64) {
        match &self.kind {
            FlowKind::Constant { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            FlowKind::Expansion { t_c, .. } if *t_c > 0.0 => (-t_c, f64::INFINITY),
            FlowKind::Expansion { t_c, .. } => (f64::NEG_INFINITY, -t_c),
            FlowKind::Grid(g) => g.time_window(),
        }
    }
}

/// Short alias for [`Flow::state`], matching the operation name.
pub fn eval_state(flow: &impl Flow, t: f64, x: &Vec3) -> Result<FluidState> {
    flow.state(t, x)
}

impl Flow for FlowField {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn entropy_floor(&self) -> f64 {
        self.entropy_floor
    }

    fn state(&self, t: f64, x: &Vec3) -> Result<FluidState> {
        match &self.kind {
            FlowKind::Constant { state } => Ok(*state),
            &FlowKind::Expansion { rho0, entropy, t_c } => {
                let shifted = t + t_c;
                if !(shifted / t_c > 0.0) {
                    return Err(Error::OutOfDomain {
                        t,
                        reason: format!("expansion flow is singular at t = {}", -t_c),
                    });
                }
                let rho = rho0 * (t_c / shifted).powi(self.dimension as i32);
                FluidState::from_entropy(rho, x / shifted, entropy, self.gamma)
            }
            FlowKind::Grid(g) => g.state(t, x),
        }
    }

    fn advance_to(&mut self, t: f64) -> Result<()> {
        match &mut self.kind {
            FlowKind::Grid(g) => g.advance_to(t),
            _ => Ok(()),
        }
    }

    fn latest_grid(&self) -> Option<&GridState> {
        match &self.kind {
            FlowKind::Grid(g) => Some(g.latest()),
            _ => None,
        }
    }
}

/// A flow defined by an arbitrary closure.
///
/// Useful for kinematic checks (Hölder-type inequalities hold for any
/// velocity field) and for deliberately inconsistent fields in residual
/// tests. Nothing guarantees that it solves the Euler equations.
pub struct SyntheticFlow<F> {
    pub dimension: usize,
    pub gamma: f64,
    pub entropy_floor: f64,
    pub field: F,
}

impl<F> Flow for SyntheticFlow<F>
where
    F: Fn(f64, &Vec3) -> FluidState + Sync,
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn entropy_floor(&self) -> f64 {
        self.entropy_floor
    }

    fn state(&self, t: f64, x: &Vec3) -> Result<FluidState> {
        let s = (self.field)(t, x);
        if !(s.rho > 0.0) {
            return Err(Error::invalid(format!("synthetic density {} at {x:?}", s.rho)));
        }
        Ok(s)
    }
}

/// Finite-difference residuals of the momentum, continuity and pressure
/// transport equations at `(t, x)`.
///
/// Returns `n + 2` components: momentum `rho (dV/dt + (V.grad)V) + grad P`
/// per axis, then continuity `drho/dt + div(rho V)`, then
/// `dP/dt + V.grad P + gamma P div V`. Every derivative is a centred
/// difference with step `h`.
pub fn euler_residual(flow: &impl Flow, t: f64, x: &Vec3, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    let n = flow.dimension();
    let gamma = flow.gamma();
    let center = flow.state(t, x)?;
    let plus_t = flow.state(t + h, x)?;
    let minus_t = flow.state(t - h, x)?;

    let dt_rho = (plus_t.rho - minus_t.rho) / (2.0 * h);
    let dt_vel = (plus_t.vel - minus_t.vel) / (2.0 * h);
    let dt_p = (plus_t.pressure - minus_t.pressure) / (2.0 * h);

    let mut grad_rho = Vec3::zeros();
    let mut grad_p = Vec3::zeros();
    // jac.column(j) = dV/dx_j
    let mut jac = nalgebra::Matrix3::<f64>::zeros();
    for axis in 0..n {
        let mut e = Vec3::zeros();
        e[axis] = h;
        let plus = flow.state(t, &(x + e))?;
        let minus = flow.state(t, &(x - e))?;
        grad_rho[axis] = (plus.rho - minus.rho) / (2.0 * h);
        grad_p[axis] = (plus.pressure - minus.pressure) / (2.0 * h);
        jac.set_column(axis, &((plus.vel - minus.vel) / (2.0 * h)));
    }

    let v = center.vel;
    let div_v = jac.trace();
    let convective = jac * v;

    let mut out = Vec::with_capacity(n + 2);
    for axis in 0..n {
        out.push(center.rho * (dt_vel[axis] + convective[axis]) + grad_p[axis]);
    }
    out.push(dt_rho + v.dot(&grad_rho) + center.rho * div_v);
    out.push(dt_p + v.dot(&grad_p) + gamma * center.pressure * div_v);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_flow() -> FlowField {
        make_analytic_flow(
            2,
            1.4,
            &AnalyticSpec::Constant {
                rho: 1.0,
                velocity: vec![-1.0, 0.0],
                pressure: 1.0,
            },
        )
        .unwrap()
    }

    fn expansion(t_c: f64, gamma: f64) -> FlowField {
        make_analytic_flow(
            2,
            gamma,
            &AnalyticSpec::Expansion {
                rho0: 1.0,
                entropy: 0.0,
                t_c,
            },
        )
        .unwrap()
    }

    #[test]
    fn constant_flow_state_everywhere() {
        let f = constant_flow();
        for (t, x) in [(0.0, [0.0, 0.0]), (3.5, [10.0, -2.0]), (-7.0, [1e3, 1e-3])] {
            let s = eval_state(&f, t, &point(&x).unwrap()).unwrap();
            assert_eq!(s.rho, 1.0);
            assert_eq!(s.vel, Vec3::new(-1.0, 0.0, 0.0));
            assert_eq!(s.entropy, 0.0);
            assert_eq!(s.pressure, 1.0);
        }
    }

    #[test]
    fn constant_flow_is_time_translation_invariant() {
        let f = constant_flow();
        let x = Vec3::new(0.3, -0.7, 0.0);
        let a = f.state(1.25, &x).unwrap();
        let b = f.state(1.25 + 17.0, &x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_entropy_satisfies_state_equation() {
        let f = make_analytic_flow(
            3,
            5.0 / 3.0,
            &AnalyticSpec::Constant {
                rho: 2.5,
                velocity: vec![0.1, 0.2, 0.3],
                pressure: 0.7,
            },
        )
        .unwrap();
        let s = f.state(0.0, &Vec3::zeros()).unwrap();
        let p = s.rho.powf(5.0 / 3.0) * s.entropy.exp();
        assert!((p - s.pressure).abs() / s.pressure < 1e-12);
    }

    #[test]
    fn expansion_density_and_pressure() {
        let f = expansion(1.0, 1.4);
        let s = f.state(1.0, &Vec3::new(0.4, 2.0, 0.0)).unwrap();
        assert!((s.rho - 0.25).abs() < 1e-15);
        assert!((s.pressure - 0.25f64.powf(1.4)).abs() < 1e-15);
        assert_eq!(s.vel, Vec3::new(0.2, 1.0, 0.0));
    }

    #[test]
    fn collapse_branch_domain() {
        let f = expansion(-1.0, 1.4);
        let s = f.state(0.0, &Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(s.vel, Vec3::new(-1.0, 0.0, 0.0));
        assert!(f.state(1.0, &Vec3::zeros()).is_err());
        assert_eq!(f.time_window(), (f64::NEG_INFINITY, 1.0));
    }

    #[test]
    fn rejects_invalid_parameters() {
        let bad = [
            (
                2,
                1.0,
                AnalyticSpec::Expansion {
                    rho0: 1.0,
                    entropy: 0.0,
                    t_c: 1.0,
                },
            ),
            (
                2,
                1.4,
                AnalyticSpec::Expansion {
                    rho0: 0.0,
                    entropy: 0.0,
                    t_c: 1.0,
                },
            ),
            (
                2,
                1.4,
                AnalyticSpec::Expansion {
                    rho0: 1.0,
                    entropy: 0.0,
                    t_c: 0.0,
                },
            ),
            (
                2,
                1.4,
                AnalyticSpec::Constant {
                    rho: 1.0,
                    velocity: vec![0.0, 0.0],
                    pressure: -1.0,
                },
            ),
            (
                2,
                1.4,
                AnalyticSpec::Constant {
                    rho: -1.0,
                    velocity: vec![0.0, 0.0],
                    pressure: 1.0,
                },
            ),
            (
                3,
                1.4,
                AnalyticSpec::Constant {
                    rho: 1.0,
                    velocity: vec![0.0, 0.0],
                    pressure: 1.0,
                },
            ),
            (
                4,
                1.4,
                AnalyticSpec::Constant {
                    rho: 1.0,
                    velocity: vec![0.0; 4],
                    pressure: 1.0,
                },
            ),
        ];
        for (n, g, spec) in bad {
            assert!(make_analytic_flow(n, g, &spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn constant_residual_vanishes() {
        let f = constant_flow();
        let r = euler_residual(&f, 0.3, &Vec3::new(1.0, 2.0, 0.0), 1e-3).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|c| c.abs() <= 1e-12));
    }

    #[test]
    fn expansion_residual_small() {
        let f = expansion(1.0, 1.4);
        let r = euler_residual(&f, 0.5, &Vec3::new(0.7, -1.3, 0.0), 1e-4).unwrap();
        assert!(r.iter().all(|c| c.abs() <= 1e-7), "{r:?}");
    }

    #[test]
    fn perturbed_density_exponent_breaks_continuity() {
        // density decays as (t_c/(t+t_c))^(1.1 n) while V = x/(t+t_c):
        // continuity residual is -0.1 n rho / (t + t_c).
        let (t_c, n) = (1.0, 2.0);
        let flow = SyntheticFlow {
            dimension: 2,
            gamma: 1.4,
            entropy_floor: 0.0,
            field: move |t: f64, x: &Vec3| {
                let rho = (t_c / (t + t_c)).powf(1.1 * n);
                FluidState::from_entropy(rho, x / (t + t_c), 0.0, 1.4).unwrap()
            },
        };
        let t = 0.5;
        let r = euler_residual(&flow, t, &Vec3::new(0.2, 0.1, 0.0), 1e-4).unwrap();
        let rho = (t_c / (t + t_c)).powf(1.1 * n);
        let expected = -n * 0.1 * rho / (t + t_c);
        assert!((r[2] - expected).abs() < 1e-6, "{} vs {expected}", r[2]);
        assert!(r[2].abs() > 1e-2);
    }

    #[test]
    fn residual_stencil_outside_domain() {
        let f = expansion(1.0, 1.4);
        assert!(euler_residual(&f, -0.99995, &Vec3::zeros(), 1e-4).is_err());
    }
}
