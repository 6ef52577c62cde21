use proptest::prelude::*;

use wavegauge_core::asymptotics::{
    build_einstein_system, has_lblb_self_coupling, integrate, CharProfile, CharSystem, HllMode,
    IntegrateOptions, WaveSystem,
};
use wavegauge_core::diagnostics::{hardy_ratio, weight_w, WeightSpec};
use wavegauge_core::geometry::{point_geometry, reduced_source};
use wavegauge_core::initdata::background_coefficient;
use wavegauge_core::nullframe::{
    derivative_seminorm, frame_at, null_form, quadratic_p, seminorm, tangential_gradient,
    FrameFamily, NullForm,
};
use wavegauge_core::tensor::{invert4, lower, m_dot, Mat4, SymTensor2, Vec4, ETA, MINKOWSKI};
use wavegauge_core::vectorfields::GENERATORS;

fn point() -> impl Strategy<Value = [f64; 3]> {
    (prop::array::uniform3(-1.0f64..1.0), -3.0f64..3.0)
        .prop_filter("away from the origin", |(d, _)| {
            d.iter().map(|v| v * v).sum::<f64>() > 1e-4
        })
        .prop_map(|(d, s)| {
            let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = 10f64.powf(s);
            [r * d[0] / n, r * d[1] / n, r * d[2] / n]
        })
}

fn sym() -> impl Strategy<Value = SymTensor2> {
    prop::array::uniform10(-1.0f64..1.0).prop_map(|c| SymTensor2 { c })
}

fn covector() -> impl Strategy<Value = Vec4> {
    prop::array::uniform4(-1.0f64..1.0)
}

fn frame_tensor(frame: &wavegauge_core::nullframe::NullFrame) -> [Vec4; 4] {
    [frame.l, frame.lbar, frame.s1, frame.s2]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn frame_metric_table(x in point()) {
        let f = frame_at(x).unwrap();
        let v = frame_tensor(&f);
        let expect = [
            [0.0, -2.0, 0.0, 0.0],
            [-2.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for a in 0..4 {
            for b in 0..4 {
                prop_assert!((m_dot(v[a], v[b]) - expect[a][b]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn p_ignores_lbar_lbar_apart_from_the_ll_cross_term(x in point(), pi in sym(), c in -5.0f64..5.0) {
        let f = frame_at(x).unwrap();
        // 1/4 L_a L_b has frame component 1 on (Lbar, Lbar) and 0 elsewhere.
        let l = lower(f.l);
        let bump = SymTensor2::from_fn(|a, b| 0.25 * c * l[a] * l[b]);
        let moved = pi.add(&bump);
        let fc = |t: &SymTensor2| f.tensor_components(t);
        let (a, b) = (fc(&pi), fc(&moved));
        prop_assert!((b[1][1] - a[1][1] - c).abs() < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                if (i, j) != (1, 1) {
                    prop_assert!((a[i][j] - b[i][j]).abs() < 1e-12);
                }
            }
        }
        let inv = |t: &SymTensor2, k: &[[f64; 4]; 4]| quadratic_p(t, t) + 0.25 * k[0][0] * k[1][1];
        prop_assert!((inv(&pi, &a) - inv(&moved, &b)).abs() < 1e-12);
    }

    #[test]
    fn null_form_tangential_estimate(x in point(), xi in covector(), eta in covector(), a in 0usize..4, b in 0usize..4) {
        let e = |v: Vec4| v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let rhs = tangential_gradient(xi, x).unwrap().norm() * e(eta)
            + e(xi) * tangential_gradient(eta, x).unwrap().norm();
        let q0 = null_form(NullForm::Q0, xi, eta).unwrap();
        prop_assert!(q0.abs() <= 4.0 * rhs + 1e-14);
        if a != b {
            let q = null_form(NullForm::Q(a, b), xi, eta).unwrap();
            prop_assert!(q.abs() <= 4.0 * rhs + 1e-14);
        }
    }

    #[test]
    fn weight_derivative_bound(q in -1e4f64..1e4, g in 1e-3f64..1.0, m in 1e-3f64..0.499) {
        let spec = WeightSpec { gamma: g, mu: m, ..Default::default() };
        let (w, wp) = weight_w(q, &spec);
        prop_assert!(w >= 1.0 && wp >= 0.0);
        prop_assert!(wp <= 4.0 * w / (1.0 + q.abs()));
    }

    #[test]
    fn generators_are_linear_and_kill_ll(t in -5.0f64..5.0, x in point()) {
        let f = frame_at(x).unwrap();
        for g in GENERATORS {
            let c = g.coefficient_gradient();
            let z = g.coefficients(t, x);
            let up = [t, x[0], x[1], x[2]];
            let z0 = g.coefficients(0.0, [0.0; 3]);
            for mu in 0..4 {
                let lin: f64 = (0..4).map(|a| up[a] * c[a][mu]).sum::<f64>() + z0[mu];
                prop_assert!((lin - z[mu]).abs() < 1e-12 * (1.0 + z[mu].abs()));
            }
            // d_a Z_b L^a L^b with Z_b = eta_b Z^b.
            let mut cll = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    cll += f.l[a] * f.l[b] * ETA[b] * c[a][b];
                }
            }
            prop_assert!(cll.abs() < 1e-14);
        }
    }

    #[test]
    fn background_vanishes_inside_cutoffs(m in 1e-6f64..1.0, t in 0.01f64..20.0, x in point()) {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let b = background_coefficient(m, t, x);
        if r <= (0.5 * t).max(0.5) {
            prop_assert_eq!(b, 0.0);
        } else {
            prop_assert!(b >= 0.0 && b <= m / r * (1.0 + 1e-15));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn p_tangential_estimate(x in point(), pi in sym(), th in sym()) {
        use FrameFamily::*;
        let f = frame_at(x).unwrap();
        let tu = |t: &SymTensor2| seminorm(t, &f, Tangent, Full);
        let ll = |t: &SymTensor2| seminorm(t, &f, Outgoing, Outgoing);
        let full = |t: &SymTensor2| seminorm(t, &f, Full, Full);
        let rhs = tu(&pi) * tu(&th) + ll(&pi) * full(&th) + full(&pi) * ll(&th);
        prop_assert!(quadratic_p(&pi, &th).abs() <= 4.0 * rhs + 1e-14);
    }
}

/// Project `dh` (40 numbers) onto the linearised wave-coordinate subspace
/// `m^{ab} d_a h_{b n} - 1/2 d_n tr h = 0`.
fn project_to_wave_coordinates(dh: &mut [SymTensor2; 4]) {
    let rows: Vec<[[f64; 10]; 4]> = (0..4)
        .map(|n| {
            let mut row = [[0.0; 10]; 4];
            for a in 0..4 {
                row[a][sym_idx(a, n)] += ETA[a];
            }
            for b in 0..4 {
                row[n][sym_idx(b, b)] -= 0.5 * ETA[b];
            }
            row
        })
        .collect();
    // Entry weights: off-diagonal storage counts once.
    let dot = |x: &[[f64; 10]; 4], y: &[[f64; 10]; 4]| -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for c in 0..10 {
                s += x[a][c] * y[a][c];
            }
        }
        s
    };
    let mut gram: Mat4 = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            gram[i][j] = dot(&rows[i], &rows[j]);
        }
    }
    let (gi, _) = invert4(&gram).unwrap();
    let v: [[f64; 10]; 4] = core::array::from_fn(|a| dh[a].c);
    let res: Vec<f64> = rows.iter().map(|r| dot(r, &v)).collect();
    for i in 0..4 {
        let coef: f64 = (0..4).map(|j| gi[i][j] * res[j]).sum();
        for a in 0..4 {
            for c in 0..10 {
                dh[a].c[c] -= coef * rows[i][a][c];
            }
        }
    }
}

fn sym_idx(a: usize, b: usize) -> usize {
    wavegauge_core::tensor::sym_index(a, b)
}

fn dh_strategy() -> impl Strategy<Value = [SymTensor2; 4]> {
    prop::array::uniform4(sym())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn source_tangential_estimate(x in point(), mut dh in dh_strategy()) {
        use FrameFamily::*;
        project_to_wave_coordinates(&mut dh);
        let f = frame_at(x).unwrap();
        let g = MINKOWSKI;
        let dg: [Mat4; 4] = core::array::from_fn(|a| dh[a].to_matrix());
        let pg = point_geometry(&g, &dg).unwrap();
        let s = reduced_source(&pg, &dg);
        let p = SymTensor2::from_fn(|m, n| quadratic_p(&dh[m], &dh[n]));
        let dbar = derivative_seminorm(&dh, &f, Tangent, Full, Full);
        let dfull = derivative_seminorm(&dh, &f, Full, Full, Full);
        let bound = 8.0 * dbar * dfull + 1e-13;
        prop_assert!(seminorm(&s, &f, Tangent, Full) <= bound);
        prop_assert!(seminorm(&s.sub(&p), &f, Tangent, Full) <= bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn einstein_table_never_has_lblb_square(x in point()) {
        let w = {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            [x[0] / r, x[1] / r, x[2] / r]
        };
        for mode in [HllMode::Zero, HllMode::MassProfile, HllMode::SelfCoupled] {
            let sys = build_einstein_system(0.01, mode, w).unwrap();
            prop_assert!(!has_lblb_self_coupling(&sys));
        }
    }

    #[test]
    fn null_condition_systems_are_free_transport(
        coeffs in prop::collection::vec((-2.0f64..2.0, 0usize..4, 0usize..4, 0usize..2, 0usize..2, 0usize..2), 1..6),
        x in point(),
        eps in 0.01f64..0.1,
    ) {
        let mut sys = WaveSystem::new(&["a", "b"]);
        for (c, p, q, tgt, j, k) in coeffs {
            if p == q {
                // Q0 = m^{ab} d_a phi_J d_b phi_K.
                for a in 0..4 {
                    sys = sys.with_term(tgt, j, &[a], k, &[a], c * ETA[a]).unwrap();
                }
            } else {
                sys = sys
                    .with_term(tgt, j, &[p], k, &[q], c)
                    .unwrap()
                    .with_term(tgt, j, &[q], k, &[p], -c)
                    .unwrap();
            }
        }
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let w = [x[0] / r, x[1] / r, x[2] / r];
        let cs = CharSystem::from_wave_system(&sys, w).unwrap();
        prop_assert!(cs.couplings.iter().all(|c| c.coeff.abs() < 1e-14));
        let data = CharProfile::gaussian_seed(2, &[0, 1], eps, 101);
        let h = integrate(&cs, &data, &IntegrateOptions { l_max: 5.0, ..Default::default() }).unwrap();
        for c in 0..2 {
            for (a, b) in h.last.u[c].iter().zip(&data.u[c]) {
                prop_assert!((a - b).abs() <= 1e-12 * eps);
            }
        }
    }

    #[test]
    fn hardy_ratio_is_scale_free(
        r0 in 1.0f64..10.0, a in 0.5f64..3.0, t in 0.0f64..15.0, alpha in 0.0f64..2.0, lam in 0.01f64..100.0,
    ) {
        let u = move |s: f64| {
            let z = (s - r0) / a;
            if z.abs() >= 1.0 {
                return (0.0, 0.0);
            }
            let b = 1.0 - z * z;
            (b * b * b, -6.0 * z * b * b / a)
        };
        let spec = WeightSpec::default();
        let x = hardy_ratio(u, r0 + a, t, alpha, &spec, 200).unwrap();
        let y = hardy_ratio(|s| (lam * u(s).0, lam * u(s).1), r0 + a, t, alpha, &spec, 200).unwrap();
        prop_assert!((x / y - 1.0).abs() < 1e-12);
    }
}
