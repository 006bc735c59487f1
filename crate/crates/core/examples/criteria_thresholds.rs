//! Constants, Q0/R0, case selection and threshold for a few parameter sets.

use movvol::criteria::{self, CriteriaInputs};

fn main() -> movvol::Result<()> {
    let base = CriteriaInputs {
        q: -8.0,
        gamma: 1.4,
        n: 2,
        s0: 0.0,
        m: 1.0,
        energy: 1.0,
        m_reg: 0.5,
        epsilon: 1.0,
        horizon: 10.0,
        g0: 0.1,
        cond10: -1.0,
        d_init: 2.0,
    };
    let c = criteria::constants(base.q, base.gamma, base.n, base.s0)?;
    println!("C1 {:.10}  C3 {:.10}  C {:.10}", c.c1, c.c3, c.c);
    for (g0, energy, horizon) in [
        (0.1, 1.0, 10.0),
        (0.5, 1.0, 10.0),
        (5.0, 0.01, 10.0),
        (5.0, 0.01, 1e-3),
    ] {
        let inp = CriteriaInputs {
            g0,
            energy,
            horizon,
            ..base
        };
        let r = criteria::evaluate(&inp)?;
        println!(
            "G0={g0:<4} E={energy:<5} T={horizon:<6} Q0={:>12.5e} R0={:>10.4e} case {:<11} delta {:>12.5e}  cond10 holds {}  necessary ok {}",
            r.q0, r.r0, r.case, r.delta, r.cond10_holds, r.necessary.ok
        );
    }
    Ok(())
}
