//! Build a material volume, transport it and evaluate volume and surface
//! integrals on it.

use std::f64::consts::PI;

use movvol::flowfield::{make_analytic_flow, AnalyticSpec};
use movvol::matvol::{advect, init_volume, QuadratureRule, Shape, VolumeShapeSpec};
use movvol::Vec3;

fn main() -> movvol::Result<()> {
    let flow = make_analytic_flow(
        2,
        1.4,
        &AnalyticSpec::Expansion {
            rho0: 1.0,
            entropy: 0.0,
            t_c: 1.0,
        },
    )?;
    let spec = VolumeShapeSpec {
        shapes: vec![
            Shape::Disk {
                center: vec![3.0, 0.0],
                radius: 1.0,
            },
            Shape::Annulus {
                center: vec![-4.0, 0.0],
                inner: 0.5,
                outer: 1.0,
            },
        ],
        markers: 512,
        quadrature: QuadratureRule::TensorGauss { order: 16 },
    };
    let mut vol = init_volume(&spec, &flow, Vec3::zeros(), 0.5)?;
    println!(
        "nodes {}  markers {}  mass {:.12}",
        vol.nodes().len(),
        vol.marker_count(),
        vol.mass()
    );
    for t in [0.5, 1.0, 2.0] {
        vol = advect(&vol, &flow, t, 0.05)?;
        let area = vol.volume_integral_plain(&flow, |_, _| 1.0)?;
        let flux = vol.surface_integral(|x, n| x.dot(n))?;
        let exact = (PI + PI * 0.75) * (1.0 + t).powi(2);
        println!(
            "t={t:<4} area {area:.10} (exact {exact:.10})  flux/2 {:.8}  distance to x0 {:.6}",
            flux / 2.0,
            vol.boundary_distance()
        );
    }
    Ok(())
}
