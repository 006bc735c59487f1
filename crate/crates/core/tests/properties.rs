use std::f64::consts::PI;

use movvol::criteria::{self, Case, CriteriaInputs};
use movvol::flowfield::{make_analytic_flow, AnalyticSpec, FlowField};
use movvol::functionals::{self, sigma_norm2, PhiSpec};
use movvol::matvol::{advect, init_volume, QuadratureRule, Shape, VolumeShapeSpec};
use movvol::verify;
use movvol::Vec3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn expansion(t_c: f64) -> FlowField {
    make_analytic_flow(
        2,
        1.4,
        &AnalyticSpec::Expansion {
            rho0: 1.0,
            entropy: 0.0,
            t_c,
        },
    )
    .unwrap()
}

fn disk(cx: f64, cy: f64, r: f64, order: usize) -> VolumeShapeSpec {
    VolumeShapeSpec::single(
        Shape::Disk {
            center: vec![cx, cy],
            radius: r,
        },
        256,
        QuadratureRule::TensorGauss { order },
    )
}

fn inputs(q: f64, eps: f64, m: f64, horizon: f64) -> CriteriaInputs {
    CriteriaInputs {
        q,
        gamma: 1.4,
        n: 2,
        s0: 0.0,
        m,
        energy: 1.0,
        m_reg: 0.0,
        epsilon: eps,
        horizon,
        g0: 0.0,
        cond10: 0.0,
        d_init: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_and_area_follow_the_expansion(
        cx in 2.0f64..5.0, cy in -2.0f64..2.0, r in 0.2f64..1.0, t in 0.05f64..1.5,
    ) {
        let flow = expansion(1.0);
        let v0 = init_volume(&disk(cx, cy, r, 12), &flow, Vec3::zeros(), 0.1).unwrap();
        let v = advect(&v0, &flow, t, 0.05).unwrap();
        let m = v.volume_integral_plain(&flow, |_, s| s.rho).unwrap();
        prop_assert!((m - v0.mass()).abs() <= 1e-10 * v0.mass());
        prop_assert_eq!(v.mass(), v0.mass());
        let area = v.volume_integral_plain(&flow, |_, _| 1.0).unwrap();
        let exact = PI * r * r * (1.0 + t).powi(2);
        prop_assert!((area - exact).abs() <= 1e-9 * exact);
    }

    #[test]
    fn polygon_flux_equals_twice_the_area(
        radii in prop::collection::vec(1.0f64..2.0, 5..12),
        cx in 4.0f64..6.0,
    ) {
        let k = radii.len();
        let vertices: Vec<[f64; 2]> = radii
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let a = 2.0 * PI * i as f64 / k as f64;
                [cx + r * a.cos(), r * a.sin()]
            })
            .collect();
        let shoelace = 0.5
            * (0..k)
                .map(|i| {
                    let (p, q) = (vertices[i], vertices[(i + 1) % k]);
                    p[0] * q[1] - q[0] * p[1]
                })
                .sum::<f64>();
        let spec = VolumeShapeSpec::single(
            Shape::Polygon { vertices },
            64,
            QuadratureRule::Triangulation { refinement: 1 },
        );
        let flow = expansion(1.0);
        let v = init_volume(&spec, &flow, Vec3::zeros(), 0.5).unwrap();
        let flux = v.surface_integral(|x, n| x.dot(n)).unwrap();
        let area = v.volume_integral_plain(&flow, |_, _| 1.0).unwrap();
        prop_assert!((flux - 2.0 * shoelace).abs() <= 1e-9 * shoelace);
        prop_assert!((area - shoelace).abs() <= 1e-9 * shoelace);
    }

    #[test]
    fn delta_is_nonpositive_and_nondecreasing_in_horizon(
        q in -14.0f64..-1.0, eps in 0.1f64..2.0, m in 0.2f64..5.0,
        q0 in -2.0f64..2.0, t1 in 0.01f64..20.0, dt in 0.0f64..20.0,
    ) {
        let r0 = q0.abs().sqrt();
        let a = criteria::classify_and_delta(&inputs(q, eps, m, t1), q0, r0).unwrap().1;
        let b = criteria::classify_and_delta(&inputs(q, eps, m, t1 + dt), q0, r0).unwrap().1;
        prop_assert!(a <= 0.0 && b <= 0.0);
        prop_assert!(b >= a - 1e-12 * a.abs());
    }

    #[test]
    fn negative_case_boundary_splits_the_cases(q in -14.0f64..-1.0, eps in 0.1f64..2.0, r0 in 0.01f64..3.0) {
        let t_star = criteria::negative_case_threshold(&inputs(q, eps, 1.0, 1.0), r0);
        let q0 = -r0 * r0;
        let below = inputs(q, eps, 1.0, 0.99 * t_star);
        let above = inputs(q, eps, 1.0, 1.01 * t_star);
        prop_assert_eq!(criteria::classify(&below, q0, r0), Case::QnegShortT);
        prop_assert_eq!(criteria::classify(&above, q0, r0), Case::QnegLongT);
    }

    #[test]
    fn sigma_is_the_cross_product_norm(v in prop::array::uniform3(-5.0f64..5.0), x in prop::array::uniform3(-5.0f64..5.0)) {
        let s = sigma_norm2(&v, &x).unwrap();
        let cross = Vec3::from(v).cross(&Vec3::from(x)).norm_squared();
        prop_assert!((s - cross).abs() <= 1e-12 * (1.0 + cross));
        let vx = Vec3::from(v).dot(&Vec3::from(x));
        let lagrange = Vec3::from(v).norm_squared() * Vec3::from(x).norm_squared() - vx * vx;
        prop_assert!((s - lagrange).abs() <= 1e-9 * (1.0 + s));
        prop_assert_eq!(sigma_norm2(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn blowup_oracle_agrees(seed in 0u64..u64::MAX) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f0, q0, inp) = verify::random_oracle_case(&mut rng);
        let r = verify::oracle_agreement(f0, q0, &inp);
        prop_assert!(r.passed, "{}", r);
    }

    #[test]
    fn integrand_signs(
        cx in 1.5f64..4.0, cy in -1.0f64..1.0, r in 0.2f64..1.0,
        q in -12.0f64..-0.5, t_c in prop_oneof![Just(1.0), Just(-2.0)],
    ) {
        let flow = expansion(t_c);
        let v = init_volume(&disk(cx, cy, r, 8), &flow, Vec3::zeros(), 0.1).unwrap();
        let s = functionals::sample(&flow, &v, &PhiSpec::power(q).unwrap(), 0.1).unwrap();
        prop_assert!(s.i1 >= 0.0);
        prop_assert!(s.i2 <= 0.0);
        prop_assert!(s.i3 >= 0.0);
        prop_assert!(s.g > 0.0);
    }
}
