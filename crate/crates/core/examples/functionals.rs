//! Sample the weighted functionals along a trajectory.

use movvol::flowfield::{make_analytic_flow, AnalyticSpec};
use movvol::functionals::{sample, PhiSpec};
use movvol::matvol::{advect, init_volume, QuadratureRule, Shape, VolumeShapeSpec};
use movvol::Vec3;

fn main() -> movvol::Result<()> {
    let flow = make_analytic_flow(
        2,
        1.4,
        &AnalyticSpec::Expansion {
            rho0: 1.0,
            entropy: 0.0,
            t_c: -2.0,
        },
    )?;
    let spec = VolumeShapeSpec::single(
        Shape::Disk {
            center: vec![3.0, 0.0],
            radius: 1.0,
        },
        512,
        QuadratureRule::TensorGauss { order: 20 },
    );
    let eps = 0.5;
    let phi = PhiSpec::power(-8.0)?;
    let mut vol = init_volume(&spec, &flow, Vec3::zeros(), eps)?;
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "t", "E", "G", "F", "I1", "I2", "I3"
    );
    for k in 0..=5 {
        let t = 0.2 * k as f64;
        if t > vol.time() {
            vol = advect(&vol, &flow, t, 0.02)?;
        }
        let s = sample(&flow, &vol, &phi, eps)?;
        println!(
            "{t:>5.2} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e}",
            s.energy, s.g, s.f, s.i1, s.i2, s.i3
        );
    }
    Ok(())
}
