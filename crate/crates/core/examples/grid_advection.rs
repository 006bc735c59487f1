//! Advect a density bump on a periodic grid and watch mass and error.

use movvol::solver::{smoothness_guard, step, GridSpec, GridState};

fn main() -> movvol::Result<()> {
    let bump = |x: f64, y: f64| 1.0 + 0.2 * (-(x * x + y * y) / 0.72).exp();
    let t_end = 0.5;
    for n in [32, 64, 128] {
        let grid = GridSpec::new([n, n], [-4.0, -4.0], [8.0, 8.0])?;
        // uniform pressure so the bump is carried without acoustic waves
        let mut s = GridState::from_pressure_fn(grid, 1.4, 0.0, |x, y| (bump(x, y), 1.0, 0.0, 1.0))?;
        let m0 = s.total_mass();
        let steps = 2 * n;
        for _ in 0..steps {
            s = step(&s, t_end / steps as f64)?;
        }
        let mut err: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let [x, y] = grid.node(i, j);
                err = err.max((s.rho()[j * n + i] - bump(x - t_end, y)).abs());
            }
        }
        let guard = smoothness_guard(&s, 100.0);
        println!(
            "n={n:<4} max error {err:.3e}  mass drift {:.1e}  max gradient {:.3}",
            (s.total_mass() - m0) / m0,
            guard.max_grad
        );
    }
    Ok(())
}
