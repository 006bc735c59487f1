//! Closed-form blow-up times of the comparison equation against numerical
//! integration.

use movvol::criteria::CriteriaInputs;
use movvol::verify::{blowup_oracle, random_oracle_case};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let inp = CriteriaInputs {
        q: -8.0,
        gamma: 1.4,
        n: 2,
        s0: 0.0,
        m: 1.0,
        energy: 1.0,
        m_reg: 0.0,
        epsilon: 1.0,
        horizon: 10.0,
        g0: 0.0,
        cond10: 0.0,
        d_init: 2.0,
    };
    for (label, f0, q0) in [("Q0 > 0", 10.0, 1.0), ("Q0 = 0", 1.0, 0.0), ("Q0 < 0", 0.0, -1.0)] {
        let (closed, numeric) = blowup_oracle(f0, q0, &inp);
        println!("{label}: F0={f0} closed {closed:?} numeric {numeric:?}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (f0, q0, inp) = random_oracle_case(&mut rng);
        if let (Some(c), Some(n)) = blowup_oracle(f0, q0, &inp) {
            worst = worst.max((c - n).abs() / c);
        }
    }
    println!("50 random cases, worst relative gap {worst:.2e}");
}
