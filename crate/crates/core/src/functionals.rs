//! Scalar functionals of a (flow, volume, time) triple.
//!
//! Coordinates are always translated by `-x0` before any weight is
//! evaluated. Density-weighted terms use the transported mass weights;
//! pressure terms use the unweighted volume sum or the boundary quadrature.

use std::fmt;
use std::sync::Arc;

use crate::flowfield::{Flow, FluidState};
use crate::matvol::MaterialVolume;
use crate::{Error, Result};

/// Default lower bound on `|x - x0|` at quadrature points.
pub const SINGULARITY_FLOOR: f64 = 1e-9;

type Profile = dyn Fn(f64) -> (f64, f64, f64) + Send + Sync;

/// Radial weight `phi(|x|)`.
#[derive(Clone)]
pub enum PhiSpec {
    /// `phi = r^q` with `q < 0`.
    Power { q: f64 },
    /// Returns `(phi, phi', phi'')` at `r`.
    Radial(Arc<Profile>),
}

impl fmt::Debug for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiSpec::Power { q } => f.debug_struct("Power").field("q", q).finish(),
            PhiSpec::Radial(_) => f.write_str("Radial(..)"),
        }
    }
}

impl PhiSpec {
    pub fn power(q: f64) -> Result<Self> {
        if !(q < 0.0) || !q.is_finite() {
            return Err(Error::invalid(format!(
                "power-law exponent must be negative, got {q}"
            )));
        }
        Ok(PhiSpec::Power { q })
    }

    pub fn radial(profile: impl Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static) -> Self {
        PhiSpec::Radial(Arc::new(profile))
    }

    /// `(phi, phi', phi'')` at radius `r`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        match self {
            PhiSpec::Power { q } => {
                let p = r.powf(*q);
                (p, q * p / r, q * (q - 1.0) * p / (r * r))
            }
            PhiSpec::Radial(f) => f(r),
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            PhiSpec::Power { q } => Some(*q),
            PhiSpec::Radial(_) => None,
        }
    }
}

/// One time slice of every functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalSample {
    pub t: f64,
    pub m: f64,
    pub energy: f64,
    pub g: f64,
    pub f: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    /// Signed pressure flux `oint (x/|x|, N) P`.
    pub reg: f64,
    /// Boundary distance to `x0`.
    pub dist: f64,
    /// NaN for a generic profile.
    pub q: f64,
    pub epsilon: f64,
}

impl FunctionalSample {
    /// Second derivative of `G` from the four-term decomposition.
    pub fn second_derivative(&self) -> f64 {
        self.i1 + self.i2 + self.i3 + self.i4
    }
}

/// Squared norm of the angular-momentum components
/// `sigma_k = V_i x_j - V_j x_i`, `i > j`.
pub fn sigma_norm2(vel: &[f64], x: &[f64]) -> Result<f64> {
    let n = vel.len();
    if n != x.len() || !(n == 2 || n == 3) {
        return Err(Error::invalid(format!(
            "sigma needs two vectors of dimension 2 or 3, got {} and {}",
            vel.len(),
            x.len()
        )));
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..i {
            let c = vel[i] * x[j] - vel[j] * x[i];
            s += c * c;
        }
    }
    Ok(s)
}

/// All functionals at the volume's current time with the default floor.
pub fn sample(
    flow: &impl Flow,
    vol: &MaterialVolume,
    phi: &PhiSpec,
    epsilon: f64,
) -> Result<FunctionalSample> {
    sample_with_floor(flow, vol, phi, epsilon, SINGULARITY_FLOOR)
}

/// As [`sample`]; a quadrature point closer than `floor` to `x0` yields
/// [`Error::AttainedTarget`].
pub fn sample_with_floor(
    flow: &impl Flow,
    vol: &MaterialVolume,
    phi: &PhiSpec,
    epsilon: f64,
    floor: f64,
) -> Result<FunctionalSample> {
    let t = vol.time();
    let x0 = *vol.x0();
    let dist = vol.boundary_distance();
    let radius = vol.min_node_radius().min(dist);
    if radius < floor {
        return Err(Error::AttainedTarget { t, radius });
    }
    let n = vol.dimension() as f64;
    let gamma = flow.gamma();
    let states = vol.node_states(flow)?;

    let m = vol.mass_sum_with(&states, |_, _| 1.0);
    let kinetic = vol.mass_sum_with(&states, |_, s| 0.5 * s.vel.norm_squared());
    let internal = vol.plain_sum_with(&states, |_, s| s.pressure / (gamma - 1.0));
    let g = vol.mass_sum_with(&states, |x, _| phi.eval((x - x0).norm()).0);
    let f = vol.mass_sum_with(&states, |x, s| {
        let y = x - x0;
        let r = y.norm();
        phi.eval(r).1 / r * s.vel.dot(&y)
    });
    let i1 = vol.mass_sum_with(&states, |x, s| {
        let y = x - x0;
        let r = y.norm();
        let vy = s.vel.dot(&y);
        phi.eval(r).2 / (r * r) * vy * vy
    });
    let i2 = vol.mass_sum_with(&states, |x, s| {
        let y = x - x0;
        let r = y.norm();
        phi.eval(r).1 / (r * r * r) * s.vel.cross(&y).norm_squared()
    });
    let i3 = vol.plain_sum_with(&states, |x, s| {
        let r = (x - x0).norm();
        let (_, d1, d2) = phi.eval(r);
        (d2 + (n - 1.0) * d1 / r) * s.pressure
    });
    let i4 = -vol.surface_integral_with_state(flow, |x, nrm, s: &FluidState| {
        let y = x - x0;
        let r = y.norm();
        phi.eval(r).1 / r * y.dot(nrm) * s.pressure
    })?;
    let reg = vol.surface_integral_with_state(flow, |x, nrm, s: &FluidState| {
        let y = x - x0;
        y.dot(nrm) / y.norm() * s.pressure
    })?;

    let out = FunctionalSample {
        t,
        m,
        energy: kinetic + internal,
        g,
        f,
        i1,
        i2,
        i3,
        i4,
        reg,
        dist,
        q: phi.exponent().unwrap_or(f64::NAN),
        epsilon,
    };
    for (name, v) in [
        ("m", m),
        ("E", out.energy),
        ("G", g),
        ("F", f),
        ("I1", i1),
        ("I2", i2),
        ("I3", i3),
        ("I4", i4),
        ("reg", reg),
    ] {
        if !v.is_finite() {
            return Err(Error::NotFinite(name));
        }
    }
    Ok(out)
}

/// First-derivative integral and the four-term second derivative.
pub fn generic_lemma1_rhs(flow: &impl Flow, vol: &MaterialVolume, phi: &PhiSpec) -> Result<(f64, f64)> {
    let s = sample(flow, vol, phi, 0.0)?;
    Ok((s.f, s.second_derivative()))
}

/// `sup phi'^2 / (phi'' phi)` over the current nodes; the constant of the
/// Cauchy-Schwarz bound `F^2 <= sup(..) G I1`.
pub fn lemma2_sup_ratio(vol: &MaterialVolume, phi: &PhiSpec) -> Result<f64> {
    let x0 = vol.x0();
    let mut sup = f64::NEG_INFINITY;
    for x in vol.nodes() {
        let (p, d1, d2) = phi.eval((x - x0).norm());
        if !(d2 > 0.0) {
            return Err(Error::invalid("profile must have positive second derivative"));
        }
        sup = sup.max(d1 * d1 / (d2 * p));
    }
    Ok(sup)
}

/// Sharp power-law constant `|q| / (|q| + 1)`.
pub fn sharp_constant(q: f64) -> f64 {
    q.abs() / (q.abs() + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::{make_analytic_flow, AnalyticSpec, SyntheticFlow, Vec3};
    use crate::matvol::{init_volume, QuadratureRule, Shape, VolumeShapeSpec};
    use std::f64::consts::PI;

    fn disk(cx: f64, r: f64) -> VolumeShapeSpec {
        VolumeShapeSpec::single(
            Shape::Disk {
                center: vec![cx, 0.0],
                radius: r,
            },
            1024,
            QuadratureRule::TensorGauss { order: 24 },
        )
    }

    fn radial_field() -> SyntheticFlow<impl Fn(f64, &Vec3) -> FluidState + Sync> {
        SyntheticFlow {
            dimension: 2,
            gamma: 1.4,
            entropy_floor: 0.0,
            field: |_t: f64, x: &Vec3| FluidState {
                rho: 1.0 + 0.1 * x[0],
                vel: *x,
                entropy: 0.0,
                pressure: 1.0,
            },
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_norm2(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(sigma_norm2(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(sigma_norm2(&[2.0, -4.0, 6.0], &[1.0, -2.0, 3.0]).unwrap(), 0.0);
        assert!(sigma_norm2(&[1.0, 0.0], &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn radial_velocity_identities() {
        let f = radial_field();
        let v = init_volume(&disk(3.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        let q = -8.0;
        let s = sample(&f, &v, &PhiSpec::power(q).unwrap(), 0.5).unwrap();
        assert!((s.f - q * s.g).abs() <= 1e-8 * s.f.abs());
        assert!((s.i1 - q * (q - 1.0) * s.g).abs() <= 1e-8 * s.i1.abs());
        assert!(s.i2.abs() < 1e-12 * s.i1);
    }

    #[test]
    fn mass_and_energy_of_resting_gas() {
        let f = make_analytic_flow(
            2,
            1.4,
            &AnalyticSpec::Constant {
                rho: 2.0,
                velocity: vec![0.0, 0.0],
                pressure: 1.0,
            },
        )
        .unwrap();
        let v = init_volume(&disk(3.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        let s = sample(&f, &v, &PhiSpec::power(-8.0).unwrap(), 0.5).unwrap();
        assert!((s.m - 2.0 * PI).abs() < 1e-12);
        assert!((s.energy - PI / 0.4).abs() < 1e-11);
        assert!((s.dist - 2.0).abs() < 1e-12);
        assert!(s.g > 0.0 && s.i1 == 0.0 && s.f == 0.0);
        assert!(s.i3 > 0.0);
    }

    #[test]
    fn pressure_flux_on_annulus() {
        let f = make_analytic_flow(
            2,
            1.4,
            &AnalyticSpec::Constant {
                rho: 1.0,
                velocity: vec![0.0, 0.0],
                pressure: 1.0,
            },
        )
        .unwrap();
        let spec = VolumeShapeSpec::single(
            Shape::Annulus {
                center: vec![0.0, 0.0],
                inner: 1.0,
                outer: 2.0,
            },
            4096,
            QuadratureRule::TensorGauss { order: 24 },
        );
        let v = init_volume(&spec, &f, Vec3::zeros(), 0.5).unwrap();
        let s = sample(&f, &v, &PhiSpec::power(-8.0).unwrap(), 0.5).unwrap();
        assert!((s.reg - 2.0 * PI).abs() < 1e-6, "{}", s.reg);
        // divergence theorem: I3 + I4 = 0 for uniform P, any phi
        assert!((s.i3 + s.i4).abs() < 1e-3 * s.i3, "{} {}", s.i3, s.i4);
    }

    #[test]
    fn constant_profile_degenerates_to_mass() {
        let f = radial_field();
        let v = init_volume(&disk(3.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        let one = PhiSpec::radial(|_| (1.0, 0.0, 0.0));
        let (d1, d2) = generic_lemma1_rhs(&f, &v, &one).unwrap();
        assert_eq!((d1, d2), (0.0, 0.0));
        let s = sample(&f, &v, &one, 0.5).unwrap();
        assert_eq!(s.g, s.m);
        assert!(s.q.is_nan());
    }

    #[test]
    fn quadratic_profile_with_radial_velocity() {
        let f = radial_field();
        let v = init_volume(&disk(3.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        let sq = PhiSpec::radial(|r| (r * r, 2.0 * r, 2.0));
        let s = sample(&f, &v, &sq, 0.5).unwrap();
        assert!((s.f - 2.0 * s.g).abs() < 1e-12 * s.g);
    }

    #[test]
    fn power_sup_ratio_is_sharp_constant() {
        let f = radial_field();
        let v = init_volume(&disk(3.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        let r = lemma2_sup_ratio(&v, &PhiSpec::power(-8.0).unwrap()).unwrap();
        assert!((r - 8.0 / 9.0).abs() < 1e-14);
        assert_eq!(sharp_constant(-8.0), 8.0 / 9.0);
        assert!(lemma2_sup_ratio(&v, &PhiSpec::radial(|_| (1.0, 0.0, 0.0))).is_err());
    }

    #[test]
    fn floor_reports_attainment() {
        let f = radial_field();
        let v = init_volume(&disk(3.0, 1.0), &f, Vec3::zeros(), 0.5).unwrap();
        let r = sample_with_floor(&f, &v, &PhiSpec::power(-8.0).unwrap(), 0.5, 2.5);
        assert!(matches!(r, Err(Error::AttainedTarget { .. })));
    }

    #[test]
    fn rejects_nonnegative_exponent() {
        assert!(PhiSpec::power(0.0).is_err());
        assert!(PhiSpec::power(1.5).is_err());
        assert!(PhiSpec::power(f64::NAN).is_err());
    }
}
