//! Finite-difference compressible Euler stepper on a periodic 2-D box.
//!
//! Fourth-order centred differences in space, classical RK4 in time.
//! Continuity is differenced in divergence form so the discrete mass over
//! the box telescopes to zero; momentum and entropy use the advective form.
//! Smooth solutions only: there is no shock capturing.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::flowfield::{FluidState, Vec3};
use crate::numerics::pairwise_sum;
use crate::{Error, Result};

/// Advisory CFL number used by [`GridState::max_stable_dt`].
pub const CFL: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Cells per axis, at least 16. Nodes sit at `lo + i * extent / cells`.
    pub cells: [usize; 2],
    pub lo: [f64; 2],
    pub extent: [f64; 2],
}

impl GridSpec {
    pub fn new(cells: [usize; 2], lo: [f64; 2], extent: [f64; 2]) -> Result<Self> {
        if cells.iter().any(|&c| c < 16) {
            return Err(Error::invalid(format!(
                "need at least 16 cells per axis, got {cells:?}"
            )));
        }
        if extent.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::invalid(format!(
                "box extent must be positive, got {extent:?}"
            )));
        }
        Ok(Self { cells, lo, extent })
    }

    pub fn spacing(&self) -> [f64; 2] {
        [
            self.extent[0] / self.cells[0] as f64,
            self.extent[1] / self.cells[1] as f64,
        ]
    }

    pub fn node_count(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let [dx, dy] = self.spacing();
        [self.lo[0] + i as f64 * dx, self.lo[1] + j as f64 * dy]
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.cells[0] + i
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.lo[0]
            && x <= self.lo[0] + self.extent[0]
            && y >= self.lo[1]
            && y <= self.lo[1] + self.extent[1]
    }
}

/// Nodal primitive fields.
#[derive(Debug, Clone, PartialEq)]
struct Fields {
    rho: Vec<f64>,
    vx: Vec<f64>,
    vy: Vec<f64>,
    entropy: Vec<f64>,
}

impl Fields {
    fn zeros(n: usize) -> Self {
        Self {
            rho: vec![0.0; n],
            vx: vec![0.0; n],
            vy: vec![0.0; n],
            entropy: vec![0.0; n],
        }
    }

    fn arrays(&self) -> [&Vec<f64>; 4] {
        [&self.rho, &self.vx, &self.vy, &self.entropy]
    }

    fn arrays_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.rho, &mut self.vx, &mut self.vy, &mut self.entropy]
    }

    /// `self + scale * rate`
    fn offset(&self, rate: &Fields, scale: f64) -> Fields {
        let mut out = self.clone();
        for (dst, src) in out.arrays_mut().into_iter().zip(rate.arrays()) {
            dst.iter_mut().zip(src).for_each(|(a, b)| *a += scale * b);
        }
        out
    }
}

/// Solution snapshot on the periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub grid: GridSpec,
    pub time: f64,
    pub gamma: f64,
    fields: Fields,
    pressure: Vec<f64>,
}

fn pressure_of(fields: &Fields, gamma: f64) -> Vec<f64> {
    fields
        .rho
        .iter()
        .zip(&fields.entropy)
        .map(|(r, s)| r.powf(gamma) * s.exp())
        .collect()
}

impl GridState {
    /// Samples `(rho, vx, vy, entropy)` at every node.
    pub fn from_fn(
        grid: GridSpec,
        gamma: f64,
        time: f64,
        init: impl Fn(f64, f64) -> (f64, f64, f64, f64),
    ) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::invalid(format!("gamma must exceed 1, got {gamma}")));
        }
        let mut fields = Fields::zeros(grid.node_count());
        for j in 0..grid.cells[1] {
            for i in 0..grid.cells[0] {
                let [x, y] = grid.node(i, j);
                let (r, u, v, s) = init(x, y);
                let k = grid.idx(i, j);
                if !(r > 0.0) {
                    return Err(Error::NonPositiveDensity { rho: r, i, j });
                }
                fields.rho[k] = r;
                fields.vx[k] = u;
                fields.vy[k] = v;
                fields.entropy[k] = s;
            }
        }
        Self::from_fields(grid, gamma, time, fields)
    }

    /// Samples `(rho, vx, vy, pressure)` at every node; entropy follows from
    /// the state equation.
    pub fn from_pressure_fn(
        grid: GridSpec,
        gamma: f64,
        time: f64,
        init: impl Fn(f64, f64) -> (f64, f64, f64, f64),
    ) -> Result<Self> {
        Self::from_fn(grid, gamma, time, |x, y| {
            let (r, u, v, p) = init(x, y);
            (r, u, v, (p / r.powf(gamma)).ln())
        })
    }

    fn from_fields(grid: GridSpec, gamma: f64, time: f64, fields: Fields) -> Result<Self> {
        let pressure = pressure_of(&fields, gamma);
        if fields.arrays().iter().any(|a| a.iter().any(|v| !v.is_finite()))
            || pressure.iter().any(|p| !p.is_finite())
        {
            return Err(Error::NotFinite("grid state"));
        }
        Ok(Self {
            grid,
            time,
            gamma,
            fields,
            pressure,
        })
    }

    pub fn rho(&self) -> &[f64] {
        &self.fields.rho
    }

    pub fn vx(&self) -> &[f64] {
        &self.fields.vx
    }

    pub fn vy(&self) -> &[f64] {
        &self.fields.vy
    }

    pub fn entropy(&self) -> &[f64] {
        &self.fields.entropy
    }

    /// Pressure cache, consistent with the state equation.
    pub fn pressure(&self) -> &[f64] {
        &self.pressure
    }

    pub fn node_state(&self, i: usize, j: usize) -> FluidState {
        let k = self.grid.idx(i, j);
        FluidState {
            rho: self.fields.rho[k],
            vel: Vec3::new(self.fields.vx[k], self.fields.vy[k], 0.0),
            entropy: self.fields.entropy[k],
            pressure: self.pressure[k],
        }
    }

    /// `sum(rho) * cell area`, pairwise-reduced.
    pub fn total_mass(&self) -> f64 {
        let [dx, dy] = self.grid.spacing();
        pairwise_sum(&self.fields.rho) * dx * dy
    }

    /// `0.4 * min(dx, dy) / max(|V| + c)`.
    pub fn max_stable_dt(&self) -> f64 {
        let [dx, dy] = self.grid.spacing();
        let mut speed: f64 = 0.0;
        for k in 0..self.grid.node_count() {
            let v = self.fields.vx[k].hypot(self.fields.vy[k]);
            let c = (self.gamma * self.pressure[k] / self.fields.rho[k]).sqrt();
            speed = speed.max(v + c);
        }
        if speed == 0.0 {
            return f64::INFINITY;
        }
        CFL * dx.min(dy) / speed
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverOptions {
    /// Strength in `(0, 1]` of a sixth-order explicit filter applied after
    /// each step. `None` disables it.
    pub filter: Option<f64>,
}

/// Fourth-order periodic centred difference along one axis.
struct Stencil {
    nx: usize,
    ny: usize,
    inv_x: f64,
    inv_y: f64,
}

impl Stencil {
    fn new(grid: &GridSpec) -> Self {
        let [dx, dy] = grid.spacing();
        Self {
            nx: grid.cells[0],
            ny: grid.cells[1],
            inv_x: 1.0 / (12.0 * dx),
            inv_y: 1.0 / (12.0 * dy),
        }
    }

    #[inline]
    fn dx(&self, f: &[f64], i: usize, j: usize) -> f64 {
        let nx = self.nx;
        let row = j * nx;
        let at = |o: usize| f[row + (i + o) % nx];
        // written as differences so a constant field gives exactly zero
        (8.0 * (at(1) - at(nx - 1)) - (at(2) - at(nx - 2))) * self.inv_x
    }

    #[inline]
    fn dy(&self, f: &[f64], i: usize, j: usize) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let at = |o: usize| f[((j + o) % ny) * nx + i];
        (8.0 * (at(1) - at(ny - 1)) - (at(2) - at(ny - 2))) * self.inv_y
    }
}

fn rates(grid: &GridSpec, gamma: f64, u: &Fields) -> Fields {
    let st = Stencil::new(grid);
    let nx = grid.cells[0];
    let p = pressure_of(u, gamma);
    let mx: Vec<f64> = u.rho.iter().zip(&u.vx).map(|(r, v)| r * v).collect();
    let my: Vec<f64> = u.rho.iter().zip(&u.vy).map(|(r, v)| r * v).collect();

    let mut out = Fields::zeros(grid.node_count());
    let Fields {
        rho: drho,
        vx: dvx,
        vy: dvy,
        entropy: ds,
    } = &mut out;
    drho.par_chunks_mut(nx)
        .zip(dvx.par_chunks_mut(nx))
        .zip(dvy.par_chunks_mut(nx))
        .zip(ds.par_chunks_mut(nx))
        .enumerate()
        .for_each(|(j, (((r_row, u_row), v_row), s_row))| {
            for i in 0..nx {
                let k = j * nx + i;
                let (vx, vy, rho) = (u.vx[k], u.vy[k], u.rho[k]);
                r_row[i] = -(st.dx(&mx, i, j) + st.dy(&my, i, j));
                u_row[i] = -(vx * st.dx(&u.vx, i, j) + vy * st.dy(&u.vx, i, j)) - st.dx(&p, i, j) / rho;
                v_row[i] = -(vx * st.dx(&u.vy, i, j) + vy * st.dy(&u.vy, i, j)) - st.dy(&p, i, j) / rho;
                s_row[i] = -(vx * st.dx(&u.entropy, i, j) + vy * st.dy(&u.entropy, i, j));
            }
        });
    out
}

fn apply_filter(grid: &GridSpec, f: &mut [f64], strength: f64) {
    const C: [f64; 7] = [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0];
    let (nx, ny) = (grid.cells[0], grid.cells[1]);
    let scale = strength / 64.0;
    for axis in 0..2 {
        let src = f.to_vec();
        for j in 0..ny {
            for i in 0..nx {
                let mut acc = 0.0;
                for (o, c) in C.iter().enumerate() {
                    let k = if axis == 0 {
                        j * nx + (i + nx + o - 3) % nx
                    } else {
                        ((j + ny + o - 3) % ny) * nx + i
                    };
                    acc += c * src[k];
                }
                f[j * nx + i] = src[j * nx + i] + scale * acc;
            }
        }
    }
}

/// One RK4 step with default options.
pub fn step(state: &GridState, dt: f64) -> Result<GridState> {
    step_with(state, dt, &SolverOptions::default())
}

pub fn step_with(state: &GridState, dt: f64, options: &SolverOptions) -> Result<GridState> {
    let limit = state.max_stable_dt();
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    let grid = &state.grid;
    let g = state.gamma;
    let u0 = &state.fields;
    let k1 = rates(grid, g, u0);
    let k2 = rates(grid, g, &u0.offset(&k1, 0.5 * dt));
    let k3 = rates(grid, g, &u0.offset(&k2, 0.5 * dt));
    let k4 = rates(grid, g, &u0.offset(&k3, dt));

    let mut next = u0.clone();
    let sixth = dt / 6.0;
    for (f, (((a, b), c), d)) in next.arrays_mut().into_iter().zip(
        k1.arrays()
            .into_iter()
            .zip(k2.arrays())
            .zip(k3.arrays())
            .zip(k4.arrays()),
    ) {
        for (idx, v) in f.iter_mut().enumerate() {
            *v += sixth * (a[idx] + 2.0 * b[idx] + 2.0 * c[idx] + d[idx]);
        }
    }
    if let Some(strength) = options.filter {
        for f in next.arrays_mut() {
            apply_filter(grid, f, strength);
        }
    }

    if next.arrays().iter().any(|a| a.iter().any(|v| v.is_nan())) {
        return Err(Error::NotFinite("solver step"));
    }
    for j in 0..grid.cells[1] {
        for i in 0..grid.cells[0] {
            let r = next.rho[grid.idx(i, j)];
            if !(r > 0.0) {
                return Err(Error::NonPositiveDensity { rho: r, i, j });
            }
        }
    }
    GridState::from_fields(*grid, g, state.time + dt, next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothness {
    pub max_grad: f64,
    pub ok: bool,
}

/// Largest discrete gradient norm of density, velocity (Frobenius) and
/// pressure over all nodes, compared against `threshold`.
pub fn smoothness_guard(state: &GridState, threshold: f64) -> Smoothness {
    let st = Stencil::new(&state.grid);
    let f = &state.fields;
    let mut max_grad: f64 = 0.0;
    for j in 0..state.grid.cells[1] {
        for i in 0..state.grid.cells[0] {
            let g_rho = st.dx(&f.rho, i, j).hypot(st.dy(&f.rho, i, j));
            let g_p = st.dx(&state.pressure, i, j).hypot(st.dy(&state.pressure, i, j));
            let g_v = (st.dx(&f.vx, i, j).powi(2)
                + st.dy(&f.vx, i, j).powi(2)
                + st.dx(&f.vy, i, j).powi(2)
                + st.dy(&f.vy, i, j).powi(2))
            .sqrt();
            max_grad = max_grad.max(g_rho).max(g_p).max(g_v);
        }
    }
    Smoothness {
        max_grad,
        ok: max_grad <= threshold,
    }
}

#[derive(Debug, Clone)]
struct Snapshot {
    state: GridState,
    rates: Fields,
}

impl Snapshot {
    fn new(state: GridState) -> Self {
        let rates = rates(&state.grid, state.gamma, &state.fields);
        Self { state, rates }
    }
}

/// Grid-backed flow: advances the solver on demand and interpolates
/// snapshots (bicubic in space, cubic Hermite in time using the
/// semi-discrete time derivatives).
#[derive(Debug, Clone)]
pub struct GridFlow {
    snapshots: VecDeque<Snapshot>,
    max_dt: f64,
    options: SolverOptions,
    retain: usize,
}

impl GridFlow {
    /// `max_dt` caps the solver step; steps are also kept within the CFL
    /// bound and land exactly on requested times.
    pub fn new(initial: GridState, max_dt: f64, options: SolverOptions) -> Result<Self> {
        if !(max_dt > 0.0) {
            return Err(Error::invalid("solver dt must be positive"));
        }
        let mut snapshots = VecDeque::new();
        snapshots.push_back(Snapshot::new(initial));
        Ok(Self {
            snapshots,
            max_dt,
            options,
            retain: 16,
        })
    }

    /// Number of snapshots kept for interpolation (at least 2).
    pub fn with_retain(mut self, retain: usize) -> Self {
        self.retain = retain.max(2);
        self
    }

    pub fn gamma(&self) -> f64 {
        self.latest().gamma
    }

    pub fn latest(&self) -> &GridState {
        &self.snapshots.back().expect("at least one snapshot").state
    }

    pub fn time_window(&self) -> (f64, f64) {
        (self.snapshots.front().unwrap().state.time, self.latest().time)
    }

    /// Snapshots older than the time at the start of the call are dropped
    /// once more than `retain` are held, so the window always covers the
    /// span just advanced over.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let t_start = self.latest().time;
        while self.latest().time < t {
            let current = self.latest();
            let remaining = t - current.time;
            let cap = self.max_dt.min(current.max_stable_dt() * 0.999);
            let substeps = (remaining / cap).ceil().max(1.0);
            let dt = remaining / substeps;
            let next = step_with(current, dt, &self.options)?;
            self.snapshots.push_back(Snapshot::new(next));
            while self.snapshots.len() > self.retain && self.snapshots[1].state.time <= t_start {
                self.snapshots.pop_front();
            }
        }
        Ok(())
    }

    pub fn state(&self, t: f64, x: &Vec3) -> Result<FluidState> {
        let (start, end) = self.time_window();
        // substep times accumulate rounding; accept a few ulps past the ends
        let slack = 1e-12 * (1.0 + end.abs());
        if t > end + slack {
            return Err(Error::NotAdvanced {
                requested: t,
                available: end,
            });
        }
        if t < start - slack {
            return Err(Error::OutOfDomain {
                t,
                reason: format!("grid history starts at t={start}"),
            });
        }
        let t = t.clamp(start, end);
        let grid = &self.latest().grid;
        if !grid.contains(x[0], x[1]) {
            return Err(Error::OutOfDomain {
                t,
                reason: format!("point ({}, {}) outside grid box", x[0], x[1]),
            });
        }
        let stencil = InterpStencil::new(grid, x[0], x[1]);

        let k = self
            .snapshots
            .iter()
            .position(|s| s.state.time >= t)
            .expect("t within window");
        let hi = &self.snapshots[k];
        let values = |s: &Snapshot| {
            let f = &s.state.fields;
            [
                stencil.eval(&f.rho),
                stencil.eval(&f.vx),
                stencil.eval(&f.vy),
                stencil.eval(&f.entropy),
            ]
        };
        let [rho, u, v, s] = if hi.state.time == t {
            values(hi)
        } else {
            let lo = &self.snapshots[k - 1];
            let tau = hi.state.time - lo.state.time;
            let a = (t - lo.state.time) / tau;
            let (h00, h10, h01, h11) = (
                2.0 * a * a * a - 3.0 * a * a + 1.0,
                a * a * a - 2.0 * a * a + a,
                -2.0 * a * a * a + 3.0 * a * a,
                a * a * a - a * a,
            );
            let f0 = values(lo);
            let f1 = values(hi);
            let r0 = &lo.rates;
            let r1 = &hi.rates;
            let d0 = [
                stencil.eval(&r0.rho),
                stencil.eval(&r0.vx),
                stencil.eval(&r0.vy),
                stencil.eval(&r0.entropy),
            ];
            let d1 = [
                stencil.eval(&r1.rho),
                stencil.eval(&r1.vx),
                stencil.eval(&r1.vy),
                stencil.eval(&r1.entropy),
            ];
            std::array::from_fn(|c| h00 * f0[c] + h10 * tau * d0[c] + h01 * f1[c] + h11 * tau * d1[c])
        };
        FluidState::from_entropy(rho, Vec3::new(u, v, 0.0), s, self.gamma())
    }
}

/// 4x4 periodic Lagrange stencil (bicubic).
struct InterpStencil {
    nx: usize,
    ix: [usize; 4],
    iy: [usize; 4],
    wx: [f64; 4],
    wy: [f64; 4],
}

fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

impl InterpStencil {
    fn new(grid: &GridSpec, x: f64, y: f64) -> Self {
        let [dx, dy] = grid.spacing();
        let (nx, ny) = (grid.cells[0], grid.cells[1]);
        let locate = |c: f64, lo: f64, h: f64, n: usize| {
            let u = (c - lo) / h;
            let mut base = u.floor();
            let mut s = u - base;
            // snap to a node when within rounding of it
            if s > 1.0 - 1e-12 {
                base += 1.0;
                s = 0.0;
            } else if s < 1e-12 {
                s = 0.0;
            }
            let b = base as i64;
            let idx = std::array::from_fn(|o| (b - 1 + o as i64).rem_euclid(n as i64) as usize);
            (idx, cubic_weights(s))
        };
        let (ix, wx) = locate(x, grid.lo[0], dx, nx);
        let (iy, wy) = locate(y, grid.lo[1], dy, ny);
        Self { nx, ix, iy, wx, wy }
    }

    fn eval(&self, f: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (b, &j) in self.iy.iter().enumerate() {
            if self.wy[b] == 0.0 {
                continue;
            }
            let row = j * self.nx;
            let mut line = 0.0;
            for (a, &i) in self.ix.iter().enumerate() {
                if self.wx[a] != 0.0 {
                    line += self.wx[a] * f[row + i];
                }
            }
            acc += self.wy[b] * line;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn box_grid(n: usize) -> GridSpec {
        GridSpec::new([n, n], [-5.0, -5.0], [10.0, 10.0]).unwrap()
    }

    fn gaussian_bump(n: usize, a: f64, w: f64) -> GridState {
        GridState::from_pressure_fn(box_grid(n), 1.4, 0.0, |x, y| {
            (1.0 + a * (-(x * x + y * y) / (2.0 * w * w)).exp(), 1.0, 0.0, 1.0)
        })
        .unwrap()
    }

    #[test]
    fn constant_state_is_fixed_point() {
        let s0 = GridState::from_pressure_fn(box_grid(16), 1.4, 0.0, |_, _| (1.3, 0.4, -0.2, 2.1)).unwrap();
        let dt = 0.9 * s0.max_stable_dt();
        let mut s = s0.clone();
        for _ in 0..5 {
            s = step(&s, dt).unwrap();
        }
        assert_eq!(s.rho(), s0.rho());
        assert_eq!(s.vx(), s0.vx());
        assert_eq!(s.vy(), s0.vy());
        assert_eq!(s.entropy(), s0.entropy());
    }

    #[test]
    fn pressure_cache_matches_state_equation() {
        let s = gaussian_bump(32, 0.3, 1.0);
        let s = step(&s, 0.5 * s.max_stable_dt()).unwrap();
        for k in 0..s.grid.node_count() {
            let p = s.rho()[k].powf(1.4) * s.entropy()[k].exp();
            assert!((p - s.pressure()[k]).abs() <= 1e-12 * p);
        }
    }

    #[test]
    fn cfl_violation_rejected() {
        let s = gaussian_bump(16, 0.1, 1.0);
        let limit = s.max_stable_dt();
        assert!(matches!(step(&s, 1.01 * limit), Err(Error::Cfl { .. })));
        assert!(step(&s, limit).is_ok());
    }

    #[test]
    fn grid_must_have_sixteen_cells() {
        assert!(GridSpec::new([15, 32], [0.0; 2], [1.0; 2]).is_err());
    }

    #[test]
    fn mass_conserved_per_step_on_nonlinear_flow() {
        let s0 = GridState::from_fn(box_grid(32), 1.4, 0.0, |x, y| {
            (
                1.0 + 0.2 * (PI * x / 5.0).sin() * (PI * y / 5.0).cos(),
                0.3 * (PI * y / 5.0).sin(),
                0.1 * (PI * x / 5.0).cos(),
                0.05 * (PI * x / 5.0).cos(),
            )
        })
        .unwrap();
        let mut s = s0;
        for _ in 0..10 {
            let dt = 0.5 * s.max_stable_dt();
            let next = step(&s, dt).unwrap();
            let drift = (next.total_mass() - s.total_mass()).abs() / s.total_mass();
            assert!(drift <= 1e-10, "{drift}");
            s = next;
        }
    }

    #[test]
    fn step_is_deterministic() {
        let s = gaussian_bump(32, 0.3, 1.0);
        let dt = 0.5 * s.max_stable_dt();
        assert_eq!(step(&s, dt).unwrap(), step(&s, dt).unwrap());
    }

    #[test]
    fn smoothness_guard_cases() {
        let flat = GridState::from_pressure_fn(box_grid(16), 1.4, 0.0, |_, _| (1.0, 0.0, 0.0, 1.0)).unwrap();
        let g = smoothness_guard(&flat, 1.0);
        assert_eq!(g.max_grad, 0.0);
        assert!(g.ok);

        let (a, w) = (0.5, 0.8);
        let bump = gaussian_bump(256, a, w);
        let g = smoothness_guard(&bump, 1e9);
        let analytic = a * (-0.5f64).exp() / w;
        assert!((g.max_grad - analytic).abs() / analytic < 0.1, "{}", g.max_grad);
        assert!(!smoothness_guard(&bump, 0.0).ok);
    }

    #[test]
    fn filter_keeps_mass_and_constants() {
        let s = gaussian_bump(32, 0.3, 1.0);
        let opts = SolverOptions { filter: Some(0.2) };
        let next = step_with(&s, 0.5 * s.max_stable_dt(), &opts).unwrap();
        assert!((next.total_mass() - s.total_mass()).abs() / s.total_mass() < 1e-12);
    }

    #[test]
    fn grid_flow_reproduces_nodes_and_errors() {
        let s = gaussian_bump(32, 0.3, 1.0);
        let mut flow = GridFlow::new(s.clone(), 0.05, SolverOptions::default()).unwrap();
        let [x, y] = s.grid.node(7, 11);
        let at = flow.state(0.0, &Vec3::new(x, y, 0.0)).unwrap();
        let node = s.node_state(7, 11);
        assert!((at.rho - node.rho).abs() <= 1e-14 * node.rho);
        assert!((at.vel - node.vel).norm() <= 1e-14);

        assert!(matches!(
            flow.state(0.1, &Vec3::zeros()),
            Err(Error::NotAdvanced { .. })
        ));
        assert!(flow.state(0.0, &Vec3::new(6.0, 0.0, 0.0)).is_err());
        flow.advance_to(0.1).unwrap();
        assert_eq!(flow.latest().time, 0.1);
        assert!(flow.state(0.05, &Vec3::new(0.1, 0.2, 0.0)).is_ok());
    }

    #[test]
    fn grid_flow_interpolation_tracks_translation() {
        // uniform V and P: the density bump is translated exactly
        let (a, w) = (0.3, 1.0);
        let s = gaussian_bump(128, a, w);
        let mut flow = GridFlow::new(s, 0.02, SolverOptions::default()).unwrap();
        flow.advance_to(0.5).unwrap();
        for &t in &[0.13, 0.37, 0.5] {
            for &(x, y) in &[(0.21, -0.4), (1.05, 0.33)] {
                let st = flow.state(t, &Vec3::new(x, y, 0.0)).unwrap();
                let xs: f64 = x - t;
                let exact = 1.0 + a * (-(xs * xs + y * y) / (2.0 * w * w)).exp();
                assert!((st.rho - exact).abs() < 1e-5, "t={t}: {} vs {exact}", st.rho);
            }
        }
    }
}
