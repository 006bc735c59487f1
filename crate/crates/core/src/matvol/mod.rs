//! The moving (material) volume.
//!
//! A volume carries boundary markers and interior quadrature nodes. Both
//! are advected with the flow. Each interior node carries a fixed mass
//! weight `rho0(y) * w(y)`, so density-weighted integrals are plain sums
//! over the current node positions; unweighted integrals recover the
//! Jacobian from the density ratio `rho0 / rho`.

pub(crate) mod geometry;
mod shapes;

use rayon::prelude::*;

use crate::flowfield::{Flow, FluidState, Vec3};
use crate::numerics::pairwise_sum;
use crate::{Error, Result};
use geometry::{find_intersection, point_segment_distance, point_triangle_distance, LoopSegment};

pub use shapes::{QuadratureRule, Shape, VolumeShapeSpec};

/// One closed boundary loop (2-D) or closed triangulated surface (3-D).
///
/// Curves run counter-clockwise around material and clockwise around
/// holes, so the outward normal of edge `p -> q` is `(dy, -dx) / |q - p|`.
/// Surface triangles are wound so that `(b - a) x (c - a)` points out of
/// the material.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Curve(Vec<Vec3>),
    Surface {
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
    },
}

impl Boundary {
    fn points(&self) -> &[Vec3] {
        match self {
            Boundary::Curve(p) => p,
            Boundary::Surface { vertices, .. } => vertices,
        }
    }

    fn points_mut(&mut self) -> &mut Vec<Vec3> {
        match self {
            Boundary::Curve(p) => p,
            Boundary::Surface { vertices, .. } => vertices,
        }
    }
}

/// Flat boundary element: segment or triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub midpoint: Vec3,
    /// Outward unit normal.
    pub normal: Vec3,
    /// Length (2-D) or area (3-D).
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialVolume {
    dimension: usize,
    boundary: Vec<Boundary>,
    nodes: Vec<Vec3>,
    mass_weights: Vec<f64>,
    initial_density: Vec<f64>,
    x0: Vec3,
    time: f64,
}

/// Builds the volume at `t = 0` from a shape description and the initial
/// density of `flow`.
///
/// Fails when `x0` lies in the volume or the boundary is within `epsilon`
/// of it.
pub fn init_volume(
    spec: &VolumeShapeSpec,
    flow: &impl Flow,
    x0: Vec3,
    epsilon: f64,
) -> Result<MaterialVolume> {
    let dimension = flow.dimension();
    shapes::validate(spec, dimension)?;
    if !(epsilon >= 0.0) {
        return Err(Error::invalid(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    if dimension == 2 && x0[2] != 0.0 {
        return Err(Error::invalid("x0 must be planar in two dimensions"));
    }

    let mut boundary = Vec::new();
    let mut nodes = Vec::new();
    let mut plain_weights = Vec::new();
    for shape in &spec.shapes {
        if shapes::contains(shape, &x0)? {
            return Err(Error::TargetInside);
        }
        let d = shapes::discretize(shape, dimension, spec.markers, spec.quadrature)?;
        boundary.extend(d.boundary);
        nodes.extend(d.nodes);
        plain_weights.extend(d.weights);
    }

    let initial_density = nodes
        .par_iter()
        .map(|x| flow.state(0.0, x).map(|s| s.rho))
        .collect::<Result<Vec<f64>>>()?;
    let mass_weights = initial_density
        .iter()
        .zip(&plain_weights)
        .map(|(r, w)| r * w)
        .collect();

    let vol = MaterialVolume {
        dimension,
        boundary,
        nodes,
        mass_weights,
        initial_density,
        x0,
        time: 0.0,
    };
    vol.check_boundary()?;
    let distance = vol.boundary_distance();
    if distance <= epsilon {
        return Err(Error::TooClose { distance, epsilon });
    }
    Ok(vol)
}

/// Moves every marker and node along `dX/dt = V(t, X)` with classical RK4
/// to `t_to`, using equal substeps no longer than `dt`.
pub fn advect(vol: &MaterialVolume, flow: &impl Flow, t_to: f64, dt: f64) -> Result<MaterialVolume> {
    if !(t_to > vol.time) {
        return Err(Error::invalid(format!(
            "advection target {t_to} must be after the volume time {}",
            vol.time
        )));
    }
    vol.trace(flow, t_to, dt)
}

impl MaterialVolume {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn x0(&self) -> &Vec3 {
        &self.x0
    }

    pub fn boundary(&self) -> &[Boundary] {
        &self.boundary
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn mass_weights(&self) -> &[f64] {
        &self.mass_weights
    }

    pub fn initial_density(&self) -> &[f64] {
        &self.initial_density
    }

    /// Sum of the mass weights.
    pub fn mass(&self) -> f64 {
        pairwise_sum(&self.mass_weights)
    }

    /// Number of boundary markers over all loops/surfaces.
    pub fn marker_count(&self) -> usize {
        self.boundary.iter().map(|b| b.points().len()).sum()
    }

    /// Integrates forward or backward in time. Used directly by the
    /// derivative checks, which need the volume on both sides of `t`.
    pub(crate) fn trace(&self, flow: &impl Flow, t_to: f64, dt: f64) -> Result<MaterialVolume> {
        if !(dt > 0.0) {
            return Err(Error::invalid(format!(
                "advection step must be positive, got {dt}"
            )));
        }
        let span = t_to - self.time;
        let steps = (span.abs() / dt).ceil().max(1.0) as usize;
        let t0 = self.time;
        let h = span / steps as f64;
        let move_point = |x: &Vec3| -> Result<Vec3> {
            let mut x = *x;
            for s in 0..steps {
                let t = t0 + s as f64 * h;
                let k1 = flow.state(t, &x)?.vel;
                let k2 = flow.state(t + 0.5 * h, &(x + 0.5 * h * k1))?.vel;
                let k3 = flow.state(t + 0.5 * h, &(x + 0.5 * h * k2))?.vel;
                let k4 = flow.state(t + h, &(x + h * k3))?.vel;
                x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            Ok(x)
        };

        let mut next = self.clone();
        next.time = t_to;
        next.nodes = self.nodes.par_iter().map(move_point).collect::<Result<_>>()?;
        for b in &mut next.boundary {
            let moved = b
                .points()
                .par_iter()
                .map(move_point)
                .collect::<Result<Vec<_>>>()?;
            *b.points_mut() = moved;
        }
        next.check_boundary()?;
        Ok(next)
    }

    /// Same as [`advect`] restricted to the boundary markers; interior nodes
    /// are left untouched. Used for hit-time refinement.
    pub(crate) fn trace_boundary(&self, flow: &impl Flow, t_to: f64) -> Result<Vec<Boundary>> {
        let h = t_to - self.time;
        let t = self.time;
        let mut out = self.boundary.clone();
        for b in &mut out {
            let moved = b
                .points()
                .par_iter()
                .map(|x| -> Result<Vec3> {
                    let k1 = flow.state(t, x)?.vel;
                    let k2 = flow.state(t + 0.5 * h, &(x + 0.5 * h * k1))?.vel;
                    let k3 = flow.state(t + 0.5 * h, &(x + 0.5 * h * k2))?.vel;
                    let k4 = flow.state(t + h, &(x + h * k3))?.vel;
                    Ok(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
                })
                .collect::<Result<Vec<_>>>()?;
            *b.points_mut() = moved;
        }
        Ok(out)
    }

    /// Fails when a planar boundary self-intersects (any pair of
    /// non-adjacent segments, across all loops).
    pub fn check_boundary(&self) -> Result<()> {
        if self.dimension != 2 {
            return Ok(());
        }
        let mut segments = Vec::new();
        for (loop_id, b) in self.boundary.iter().enumerate() {
            let pts = b.points();
            let n = pts.len();
            for i in 0..n {
                segments.push(LoopSegment {
                    loop_id,
                    index: i,
                    loop_len: n,
                    a: pts[i],
                    b: pts[(i + 1) % n],
                });
            }
        }
        match find_intersection(&segments) {
            Some((component, a, b)) => Err(Error::SelfIntersection { component, a, b }),
            None => Ok(()),
        }
    }

    /// Redistributes the markers of every planar loop uniformly in arc
    /// length, keeping their count. Interior mass nodes are never touched.
    pub fn resample_arclength(&self) -> MaterialVolume {
        let mut out = self.clone();
        for b in &mut out.boundary {
            if let Boundary::Curve(pts) = b {
                let n = pts.len();
                let mut cum = Vec::with_capacity(n + 1);
                cum.push(0.0);
                for i in 0..n {
                    let l = (pts[(i + 1) % n] - pts[i]).norm();
                    cum.push(cum[i] + l);
                }
                let total = cum[n];
                let mut seg = 0;
                let resampled = (0..n)
                    .map(|k| {
                        let s = total * k as f64 / n as f64;
                        while cum[seg + 1] < s {
                            seg += 1;
                        }
                        let len = cum[seg + 1] - cum[seg];
                        let a = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
                        pts[seg] + a * (pts[(seg + 1) % n] - pts[seg])
                    })
                    .collect();
                *pts = resampled;
            }
        }
        out
    }

    /// `sum_i f(X_i) m_i`, an exact transport of the mass measure.
    pub fn volume_integral_mass(&self, f: impl Fn(&Vec3) -> f64 + Sync) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(&self.mass_weights)
            .map(|(x, m)| f(x) * m)
            .collect();
        pairwise_sum(&terms)
    }

    /// Flow states at the current node positions.
    pub fn node_states(&self, flow: &impl Flow) -> Result<Vec<FluidState>> {
        self.nodes.par_iter().map(|x| flow.state(self.time, x)).collect()
    }

    /// `sum_i f(X_i, state_i) m_i` with precomputed node states.
    pub fn mass_sum_with(&self, states: &[FluidState], f: impl Fn(&Vec3, &FluidState) -> f64 + Sync) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(states)
            .zip(&self.mass_weights)
            .map(|((x, s), m)| f(x, s) * m)
            .collect();
        pairwise_sum(&terms)
    }

    /// `sum_i g(X_i, state_i) m_i / rho(t, X_i)` with precomputed states.
    pub fn plain_sum_with(&self, states: &[FluidState], g: impl Fn(&Vec3, &FluidState) -> f64 + Sync) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(states)
            .zip(&self.mass_weights)
            .map(|((x, s), m)| g(x, s) * m / s.rho)
            .collect();
        pairwise_sum(&terms)
    }

    /// Unweighted volume integral; the Jacobian of the flow map is
    /// recovered as `rho0 / rho`.
    pub fn volume_integral_plain(
        &self,
        flow: &impl Flow,
        g: impl Fn(&Vec3, &FluidState) -> f64 + Sync,
    ) -> Result<f64> {
        let states = self.node_states(flow)?;
        Ok(self.plain_sum_with(&states, g))
    }

    /// Segments (2-D) or triangles (3-D) with outward unit normals.
    pub fn elements(&self) -> Result<Vec<Element>> {
        let mut out = Vec::new();
        for b in &self.boundary {
            match b {
                Boundary::Curve(pts) => {
                    let n = pts.len();
                    for i in 0..n {
                        let (p, q) = (pts[i], pts[(i + 1) % n]);
                        let d = q - p;
                        let measure = d.norm();
                        if !(measure > 0.0) {
                            return Err(Error::DegenerateElement(out.len()));
                        }
                        out.push(Element {
                            midpoint: (p + q) * 0.5,
                            normal: Vec3::new(d[1], -d[0], 0.0) / measure,
                            measure,
                        });
                    }
                }
                Boundary::Surface { vertices, triangles } => {
                    for &[a, b, c] in triangles {
                        let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
                        let cross = (pb - pa).cross(&(pc - pa));
                        let norm = cross.norm();
                        if !(norm > 0.0) {
                            return Err(Error::DegenerateElement(out.len()));
                        }
                        out.push(Element {
                            midpoint: (pa + pb + pc) / 3.0,
                            normal: cross / norm,
                            measure: 0.5 * norm,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Midpoint rule `sum_e h(midpoint_e, N_e) |e|` over the boundary.
    pub fn surface_integral(&self, h: impl Fn(&Vec3, &Vec3) -> f64 + Sync) -> Result<f64> {
        let elements = self.elements()?;
        let terms: Vec<f64> = elements
            .par_iter()
            .map(|e| h(&e.midpoint, &e.normal) * e.measure)
            .collect();
        Ok(pairwise_sum(&terms))
    }

    /// Midpoint rule with the flow state evaluated at each element midpoint.
    pub fn surface_integral_with_state(
        &self,
        flow: &impl Flow,
        h: impl Fn(&Vec3, &Vec3, &FluidState) -> f64 + Sync,
    ) -> Result<f64> {
        let elements = self.elements()?;
        let terms = elements
            .par_iter()
            .map(|e| {
                let s = flow.state(self.time, &e.midpoint)?;
                Ok(h(&e.midpoint, &e.normal, &s) * e.measure)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(pairwise_sum(&terms))
    }

    /// Distance from `x0` to the discrete boundary.
    pub fn boundary_distance(&self) -> f64 {
        boundary_distance_of(&self.boundary, &self.x0)
    }

    /// Smallest `|X_i - x0|` over interior nodes.
    pub fn min_node_radius(&self) -> f64 {
        self.nodes
            .iter()
            .map(|x| (x - self.x0).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn boundary_distance_of(boundary: &[Boundary], x0: &Vec3) -> f64 {
    let mut best = f64::INFINITY;
    for b in boundary {
        match b {
            Boundary::Curve(pts) => {
                let n = pts.len();
                for i in 0..n {
                    best = best.min(point_segment_distance(x0, &pts[i], &pts[(i + 1) % n]));
                }
            }
            Boundary::Surface { vertices, triangles } => {
                for &[a, b, c] in triangles {
                    best = best.min(point_triangle_distance(
                        x0,
                        &vertices[a],
                        &vertices[b],
                        &vertices[c],
                    ));
                }
            }
        }
    }
    best
}

/// Free-function form of [`MaterialVolume::boundary_distance`].
pub fn boundary_distance(vol: &MaterialVolume) -> f64 {
    vol.boundary_distance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::{make_analytic_flow, AnalyticSpec};
    use std::f64::consts::PI;

    fn constant(rho: f64, v: [f64; 2]) -> crate::FlowField {
        make_analytic_flow(
            2,
            1.4,
            &AnalyticSpec::Constant {
                rho,
                velocity: v.to_vec(),
                pressure: 1.0,
            },
        )
        .unwrap()
    }

    fn expansion() -> crate::FlowField {
        make_analytic_flow(
            2,
            1.4,
            &AnalyticSpec::Expansion {
                rho0: 1.0,
                entropy: 0.0,
                t_c: 1.0,
            },
        )
        .unwrap()
    }

    fn disk(cx: f64, cy: f64, r: f64) -> VolumeShapeSpec {
        VolumeShapeSpec::single(
            Shape::Disk {
                center: vec![cx, cy],
                radius: r,
            },
            1024,
            QuadratureRule::TensorGauss { order: 16 },
        )
    }

    fn annulus(markers: usize) -> VolumeShapeSpec {
        VolumeShapeSpec::single(
            Shape::Annulus {
                center: vec![0.0, 0.0],
                inner: 1.0,
                outer: 2.0,
            },
            markers,
            QuadratureRule::TensorGauss { order: 40 },
        )
    }

    #[test]
    fn disk_mass_weight() {
        let v = init_volume(
            &disk(3.0, 0.0, 1.0),
            &constant(2.0, [0.0, 0.0]),
            Vec3::zeros(),
            0.5,
        )
        .unwrap();
        assert!((v.mass() - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn annulus_epsilon_gate() {
        let f = constant(1.0, [0.0, 0.0]);
        assert!(matches!(
            init_volume(&annulus(256), &f, Vec3::zeros(), 1.0),
            Err(Error::TooClose { .. })
        ));
        assert!(init_volume(&annulus(256), &f, Vec3::zeros(), 0.99).is_ok());
    }

    #[test]
    fn target_inside_rejected() {
        let f = constant(1.0, [0.0, 0.0]);
        assert!(matches!(
            init_volume(&disk(0.5, 0.0, 1.0), &f, Vec3::zeros(), 0.1),
            Err(Error::TargetInside)
        ));
    }

    #[test]
    fn square_mass_weight() {
        let spec = VolumeShapeSpec::single(
            Shape::Polygon {
                vertices: vec![[5.0, 5.0], [6.0, 5.0], [6.0, 6.0], [5.0, 6.0]],
            },
            64,
            QuadratureRule::Triangulation { refinement: 2 },
        );
        let v = init_volume(&spec, &constant(1.0, [0.0, 0.0]), Vec3::zeros(), 1.0).unwrap();
        assert!((v.mass() - 1.0).abs() < 1e-10);
        assert_eq!(v.marker_count(), 64);
    }

    #[test]
    fn marker_and_order_validation() {
        let f = constant(1.0, [0.0, 0.0]);
        let mut spec = disk(3.0, 0.0, 1.0);
        spec.markers = 63;
        assert!(init_volume(&spec, &f, Vec3::zeros(), 0.5).is_err());
        let mut spec = disk(3.0, 0.0, 1.0);
        spec.quadrature = QuadratureRule::Triangulation { refinement: 1 };
        assert!(init_volume(&spec, &f, Vec3::zeros(), 0.5).is_err());
    }

    #[test]
    fn constant_flow_translation() {
        let f = constant(1.0, [-1.0, 0.0]);
        let v = init_volume(&disk(3.0, 0.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        assert!((v.boundary_distance() - 2.0).abs() < 1e-12);
        let moved = advect(&v, &f, 2.0, 0.1).unwrap();
        for (a, b) in v.nodes().iter().zip(moved.nodes()) {
            assert!((b - a - Vec3::new(-2.0, 0.0, 0.0)).norm() < 1e-12);
        }
        let one = advect(&v, &f, 1.0, 0.1).unwrap();
        assert!((one.boundary_distance() - 1.0).abs() < 1e-12);
        assert_eq!(one.mass_weights(), v.mass_weights());
    }

    #[test]
    fn expansion_doubles_positions() {
        let f = expansion();
        let v = init_volume(&disk(3.0, 0.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        let moved = advect(&v, &f, 1.0, 0.01).unwrap();
        for (a, b) in v.nodes().iter().zip(moved.nodes()) {
            assert!((b - 2.0 * a).norm() < 1e-9);
        }
    }

    #[test]
    fn advect_requires_future_time() {
        let f = expansion();
        let v = init_volume(&disk(3.0, 0.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        assert!(advect(&v, &f, 0.0, 0.1).is_err());
    }

    fn rotation() -> crate::flowfield::SyntheticFlow<impl Fn(f64, &Vec3) -> FluidState + Sync> {
        crate::flowfield::SyntheticFlow {
            dimension: 2,
            gamma: 1.4,
            entropy_floor: 0.0,
            field: |_t: f64, x: &Vec3| FluidState {
                rho: 1.0,
                vel: Vec3::new(-x[1], x[0], 0.0),
                entropy: 0.0,
                pressure: 1.0,
            },
        }
    }

    #[test]
    fn rk4_self_convergence() {
        let f = rotation();
        let v = init_volume(&disk(3.0, 0.0, 1.0), &f, Vec3::new(0.0, 5.0, 0.0), 0.5).unwrap();
        let (c, s) = (2f64.cos(), 2f64.sin());
        let err = |dt: f64| {
            let m = advect(&v, &f, 2.0, dt).unwrap();
            v.nodes()
                .iter()
                .zip(m.nodes())
                .map(|(a, b)| (b - Vec3::new(c * a[0] - s * a[1], s * a[0] + c * a[1], 0.0)).norm())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.2) / err(0.1);
        assert!(ratio > 13.0 && ratio < 19.0, "{ratio}");
    }

    #[test]
    fn radial_moments() {
        let f = constant(1.0, [0.0, 0.0]);
        let v = init_volume(&annulus(256), &f, Vec3::zeros(), 0.5).unwrap();
        let got = v.volume_integral_mass(|x| x.norm().powf(-8.0));
        let exact = 2.0 * PI * (1.0 - 2f64.powi(-6)) / 6.0;
        assert!((got - exact).abs() < 1e-10, "{got} vs {exact}");

        let d = init_volume(&disk(0.0, 0.0, 1.0), &f, Vec3::new(5.0, 0.0, 0.0), 0.5).unwrap();
        let got = d.volume_integral_mass(|x| x.norm_squared());
        assert!((got - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn plain_integral_area() {
        let f = expansion();
        let v = init_volume(&disk(3.0, 0.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        let a0 = v.volume_integral_plain(&f, |_, _| 1.0).unwrap();
        assert!((a0 - PI).abs() < 1e-8);
        let moved = advect(&v, &f, 1.0, 0.01).unwrap();
        let a1 = moved.volume_integral_plain(&f, |_, _| 1.0).unwrap();
        assert!((a1 - 4.0 * PI).abs() / (4.0 * PI) < 1e-6);
    }

    #[test]
    fn surface_integrals_divergence_theorem() {
        let f = constant(1.0, [0.0, 0.0]);
        let v = init_volume(&annulus(4096), &f, Vec3::new(0.0, 0.0, 0.0), 0.5).unwrap();
        let a = Vec3::new(0.3, -1.7, 0.0);
        assert!(v.surface_integral(|_, n| a.dot(n)).unwrap().abs() < 1e-8);
        let radial = v.surface_integral(|x, n| x.dot(n) / x.norm()).unwrap();
        assert!((radial - 2.0 * PI).abs() < 1e-6, "{radial}");

        let unit = init_volume(&disk(0.0, 0.0, 1.0), &f, Vec3::new(3.0, 0.0, 0.0), 0.5).unwrap();
        let flux = unit.surface_integral(|x, n| x.dot(n)).unwrap();
        // inscribed polygon: 2 * area = M sin(2 pi / M)
        let m = unit.marker_count() as f64;
        assert!((flux - m * (2.0 * PI / m).sin()).abs() < 1e-10, "{flux}");
    }

    #[test]
    fn self_intersection_detected() {
        let f = constant(1.0, [0.0, 0.0]);
        let v = init_volume(&disk(3.0, 0.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        assert!(v.check_boundary().is_ok());
        let mut bad = v.clone();
        if let Boundary::Curve(pts) = &mut bad.boundary[0] {
            // pull one marker across the disk
            pts[0] = Vec3::new(1.5, 0.0, 0.0);
        }
        assert!(matches!(
            bad.check_boundary(),
            Err(Error::SelfIntersection { .. })
        ));
    }

    #[test]
    fn smooth_shear_never_folds() {
        let spec = VolumeShapeSpec::single(
            Shape::Polygon {
                vertices: vec![[2.0, -1.0], [2.2, -1.0], [2.2, 1.0], [2.0, 1.0]],
            },
            64,
            QuadratureRule::TensorGauss { order: 3 },
        );
        let f = crate::flowfield::SyntheticFlow {
            dimension: 2,
            gamma: 1.4,
            entropy_floor: 0.0,
            field: |_t: f64, x: &Vec3| FluidState {
                rho: 1.0,
                vel: Vec3::new(-5.0 * x[1] * x[1], 0.0, 0.0),
                entropy: 0.0,
                pressure: 1.0,
            },
        };
        let v = init_volume(&spec, &f, Vec3::new(10.0, 0.0, 0.0), 0.5).unwrap();
        let moved = advect(&v, &f, 1.0, 0.01).unwrap();
        assert!((moved.mass() - v.mass()).abs() < 1e-14);
        let area = moved.volume_integral_plain(&f, |_, _| 1.0).unwrap();
        assert!((area - 0.4).abs() < 1e-12);
    }

    #[test]
    fn resampling_keeps_count_and_mass() {
        let f = constant(1.0, [0.0, 0.0]);
        let v = init_volume(&disk(3.0, 0.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        let r = v.resample_arclength();
        assert_eq!(r.marker_count(), v.marker_count());
        assert_eq!(r.mass(), v.mass());
        assert!((r.boundary_distance() - v.boundary_distance()).abs() < 1e-3);
    }

    #[test]
    fn ball_in_three_dimensions() {
        let f = make_analytic_flow(
            3,
            1.4,
            &AnalyticSpec::Constant {
                rho: 1.0,
                velocity: vec![0.0, 0.0, 0.0],
                pressure: 1.0,
            },
        )
        .unwrap();
        let spec = VolumeShapeSpec::single(
            Shape::Disk {
                center: vec![3.0, 0.0, 0.0],
                radius: 1.0,
            },
            2000,
            QuadratureRule::TensorGauss { order: 8 },
        );
        let v = init_volume(&spec, &f, Vec3::zeros(), 0.5).unwrap();
        assert!((v.mass() - 4.0 / 3.0 * PI).abs() < 1e-12);
        let flux = v
            .surface_integral(|x, n| (x - Vec3::new(3.0, 0.0, 0.0)).dot(n))
            .unwrap();
        assert!((flux - 4.0 * PI).abs() / (4.0 * PI) < 5e-3, "{flux}");
        assert!((v.boundary_distance() - 2.0).abs() < 1e-2);
    }
}
