//! Query the analytic flows and check that they solve the Euler equations.

use movvol::flowfield::{euler_residual, make_analytic_flow, AnalyticSpec};
use movvol::{Flow, Vec3};

fn main() -> movvol::Result<()> {
    let flows = [
        (
            "constant",
            AnalyticSpec::Constant {
                rho: 1.0,
                velocity: vec![-1.0, 0.5],
                pressure: 2.0,
            },
        ),
        (
            "expansion",
            AnalyticSpec::Expansion {
                rho0: 1.0,
                entropy: 0.0,
                t_c: 1.0,
            },
        ),
        (
            "collapse",
            AnalyticSpec::Expansion {
                rho0: 1.0,
                entropy: 0.0,
                t_c: -1.0,
            },
        ),
    ];
    let x = Vec3::new(0.7, -0.3, 0.0);
    for (name, spec) in &flows {
        let flow = make_analytic_flow(2, 1.4, spec)?;
        println!("{name}: window {:?}", flow.time_window());
        for t in [0.0, 0.25, 0.5] {
            let s = flow.state(t, &x)?;
            let res = euler_residual(&flow, t, &x, 1e-4)?;
            let worst = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
            println!(
                "  t={t:<4} rho={:.6} V=({:.4}, {:.4}) P={:.6} c={:.4} max residual {worst:.1e}",
                s.rho,
                s.vel.x,
                s.vel.y,
                s.pressure,
                s.sound_speed(1.4)
            );
        }
    }
    Ok(())
}
