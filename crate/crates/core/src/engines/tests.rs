use super::*;
use crate::oracles::oracle_project_vector;
use crate::problems::rng::SplitMix64;
use crate::types::{ConeKind, ConeSpec, VPoint};
use crate::vcones::kkt_report;

fn models() -> Vec<(ConeKind, Box<dyn ConeModel>, usize)> {
    vec![
        (ConeKind::Log, Box::new(LogModel { n: 4 }) as Box<dyn ConeModel>, 4),
        (ConeKind::Inv, Box::new(InvModel { n: 4 }), 4),
        (ConeKind::VEnt, Box::new(VEntModel { n: 4 }), 4),
        (ConeKind::Geomean, Box::new(GeomeanModel { n: 4 }), 4),
    ]
}

fn random_interior(rng: &mut SplitMix64, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| 0.2 + 2.0 * rng.next_f64()).collect()
}

fn grad_h(model: &dyn ConeModel, target: &VPoint, u: &[f64]) -> Vec<f64> {
    let has_v = model.has_v();
    let (v, x) = if has_v { (u[0], &u[1..]) } else { (1.0, u) };
    let mut gx = vec![0.0; model.n()];
    let gv = model.grad_s(v, x, &mut gx);
    let a = model.eval_s(v, x) - target.t;
    let mut g = vec![0.0; u.len()];
    if has_v {
        g[0] = a * gv + (v - target.v.unwrap());
    }
    for i in 0..model.n() {
        g[usize::from(has_v) + i] = a * gx[i] + (x[i] - target.x[i]);
    }
    g
}

#[test]
fn grad_matches_finite_differences() {
    let mut rng = SplitMix64::new(11);
    for (_, model, _) in models() {
        for _ in 0..100 {
            let dim = model.dim();
            let u = random_interior(&mut rng, dim);
            let (v, x) = if model.has_v() { (u[0], &u[1..]) } else { (1.0, &u[..]) };
            let mut gx = vec![0.0; model.n()];
            let gv = model.grad_s(v, x, &mut gx);
            let mut grad = vec![0.0; dim];
            if model.has_v() {
                grad[0] = gv;
            }
            grad[usize::from(model.has_v())..].copy_from_slice(&gx);

            let h = 1e-6;
            for i in 0..dim {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[i] += h;
                dn[i] -= h;
                let f = |w: &[f64]| {
                    let (v, x) = if model.has_v() { (w[0], &w[1..]) } else { (1.0, w) };
                    model.eval_s(v, x)
                };
                let fd = (f(&up) - f(&dn)) / (2.0 * h);
                let scale = grad[i].abs().max(1.0);
                assert!(
                    (fd - grad[i]).abs() <= 1e-6 * scale,
                    "grad mismatch coord {i}: fd {fd} vs {g}",
                    g = grad[i]
                );
            }
        }
    }
}

#[test]
fn hessians_match_finite_differences_of_gradients() {
    let mut rng = SplitMix64::new(13);
    for (kind, model, n) in models() {
        for _ in 0..25 {
            let dim = model.dim();
            let u = random_interior(&mut rng, dim);
            let target = VPoint {
                t: rng.next_gaussian(),
                v: model.has_v().then(|| rng.next_gaussian()),
                x: rng.gaussian_vec(n),
            };
            let (v, x) = if model.has_v() { (u[0], u[1..].to_vec()) } else { (1.0, u.clone()) };

            // hess(s) * w against finite differences of grad(s)
            let hs = model.hess_s_factors(v, &x);
            let w: Vec<f64> = rng.gaussian_vec(dim);
            let mut hw = vec![0.0; dim];
            hs.matvec(&w, &mut hw);
            let h = 1e-6;
            let gs = |uu: &[f64]| {
                let (v, x) = if model.has_v() { (uu[0], &uu[1..]) } else { (1.0, uu) };
                let mut gx = vec![0.0; model.n()];
                let gv = model.grad_s(v, x, &mut gx);
                let mut g = vec![0.0; uu.len()];
                if model.has_v() {
                    g[0] = gv;
                }
                g[usize::from(model.has_v())..].copy_from_slice(&gx);
                g
            };
            let up: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + h * b).collect();
            let dn: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - h * b).collect();
            let gu = gs(&up);
            let gd = gs(&dn);
            let scale = hw.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for i in 0..dim {
                let fd = (gu[i] - gd[i]) / (2.0 * h);
                assert!(
                    (fd - hw[i]).abs() <= 1e-5 * scale,
                    "{kind:?} hess_s row {i}: fd {fd} vs {v}",
                    v = hw[i]
                );
            }

            // hess(h) * w against finite differences of grad(h)
            let hh = model.hess_h_factors(v, &x, target.t);
            assert!(hh.rank() <= crate::linalg::MAX_LOW_RANK);
            let mut hhw = vec![0.0; dim];
            hh.matvec(&w, &mut hhw);
            let ghu = grad_h(model.as_ref(), &target, &up);
            let ghd = grad_h(model.as_ref(), &target, &dn);
            let scale = hhw.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for i in 0..dim {
                let fd = (ghu[i] - ghd[i]) / (2.0 * h);
                assert!(
                    (fd - hhw[i]).abs() <= 1e-5 * scale,
                    "{kind:?} hess_h row {i}: fd {fd} vs {v}",
                    v = hhw[i]
                );
            }
        }
    }
}

#[test]
fn newton_log_cone_matches_grid_oracle() {
    let spec = ConeSpec::new(ConeKind::Log, 1).unwrap();
    let model = LogModel { n: 1 };
    let target = VPoint::with_v(-1.0, 1.0, vec![1.0]);
    let res = newton_project(&model, &target, None, &NewtonOpts::default());
    assert_eq!(res.status, EngineStatus::Converged);
    let oracle = oracle_project_vector(&spec, &target);
    assert!((res.point.t - oracle.t).abs() <= 1e-8, "{} vs {}", res.point.t, oracle.t);
    assert!((res.point.v.unwrap() - oracle.v.unwrap()).abs() <= 1e-8);
    assert!((res.point.x[0] - oracle.x[0]).abs() <= 1e-8);
    let report = kkt_report(&spec, &target, &res.point, &res.multipliers);
    assert!(report.max() <= 1e-9, "kkt {report:?}");
}

#[test]
fn newton_fixed_point_needs_no_steps() {
    // Re-projecting a previous projection converges immediately from the
    // warm start.
    let model = LogModel { n: 3 };
    let target = VPoint::with_v(-3.0, 1.0, vec![2.0, 1.0, 1.5]);
    let first = newton_project(&model, &target, None, &NewtonOpts::default());
    assert_eq!(first.status, EngineStatus::Converged);
    let warm = first.point.clone();
    let again = newton_project(&model, &first.point, Some(&warm), &NewtonOpts::default());
    assert_eq!(again.status, EngineStatus::Converged);
    assert!(again.iters <= 2, "fixed point took {} iterations", again.iters);
    assert!(again.point.sub(&first.point).norm() <= 1e-9);
}

#[test]
fn warm_start_converges_in_few_iterations() {
    let mut rng = SplitMix64::new(17);
    let n = 8;
    let model = LogModel { n };
    let mut total = 0u32;
    let mut count = 0u32;
    for _ in 0..100 {
        let target = VPoint {
            t: rng.next_gaussian(),
            v: Some(rng.next_gaussian()),
            x: rng.gaussian_vec(n),
        };
        let base = newton_project(&model, &target, None, &NewtonOpts::default());
        if base.status != EngineStatus::Converged {
            continue;
        }
        let perturbed = VPoint {
            t: target.t + 1e-3 * rng.next_gaussian(),
            v: Some(target.v.unwrap() + 1e-3 * rng.next_gaussian()),
            x: target.x.iter().map(|&x| x + 1e-3 * rng.next_gaussian()).collect(),
        };
        let warm = newton_project(&model, &perturbed, Some(&base.point), &NewtonOpts::default());
        if warm.status == EngineStatus::Converged {
            assert!(warm.iters <= 5, "warm start took {} iterations", warm.iters);
            total += warm.iters;
            count += 1;
        }
    }
    assert!(count >= 50, "too few convergent warm-start instances: {count}");
    assert!(total as f64 / count as f64 <= 4.0);
}

#[test]
fn ipm_agrees_with_newton_on_log_cone() {
    let model = LogModel { n: 1 };
    let target = VPoint::with_v(-1.0, 1.0, vec![1.0]);
    let newton = newton_project(&model, &target, None, &NewtonOpts::default());
    let ipm = ipm_project(&model, &target, &IpmOpts::default());
    assert_eq!(newton.status, EngineStatus::Converged);
    assert_eq!(ipm.status, EngineStatus::Converged);
    assert!(newton.point.sub(&ipm.point).norm() <= 1e-8);
}

#[test]
fn ipm_handles_entropy_boundary_target() {
    let spec = ConeSpec::new(ConeKind::VEnt, 2).unwrap();
    let model = VEntModel { n: 2 };
    let target = VPoint::with_v(-0.5, -1.0, vec![1.0, 1.0]);
    let ipm = ipm_project(&model, &target, &IpmOpts::default());
    let report = kkt_report(&spec, &target, &ipm.point, &ipm.multipliers);
    assert!(report.max() <= 1e-9, "kkt {report:?}");
    let oracle = oracle_project_vector(&spec, &target);
    assert!(ipm.point.sub(&oracle).norm() <= 1e-6, "{:?} vs {oracle:?}", ipm.point);
}

#[test]
fn ipm_scaling_invariance() {
    let model = InvModel { n: 3 };
    let target = VPoint::with_v(-0.3, 0.8, vec![1.2, -0.4, 0.9]);
    let alpha = 1e3;
    let base = ipm_project(&model, &target, &IpmOpts::default());
    let scaled = ipm_project(&model, &target.scale(alpha), &IpmOpts::default());
    assert_eq!(base.status, EngineStatus::Converged);
    assert_eq!(scaled.status, EngineStatus::Converged);
    let diff = scaled.point.sub(&base.point.scale(alpha)).norm_inf();
    assert!(diff <= 1e-8 * alpha, "diff {diff:.3e}");
}

#[test]
fn engine_agreement_when_both_converge() {
    let mut rng = SplitMix64::new(23);
    for (kind, model, n) in models() {
        let mut checked = 0;
        for _ in 0..40 {
            let target = VPoint {
                t: rng.next_gaussian(),
                v: model.has_v().then(|| rng.next_gaussian()),
                x: rng.gaussian_vec(n),
            };
            let newton = newton_project(model.as_ref(), &target, None, &NewtonOpts::default());
            if newton.status != EngineStatus::Converged {
                continue;
            }
            let ipm = ipm_project(model.as_ref(), &target, &IpmOpts::default());
            if ipm.status != EngineStatus::Converged {
                continue;
            }
            let diff = newton.point.sub(&ipm.point).norm();
            assert!(diff <= 1e-7, "{kind:?}: engines disagree by {diff:.3e}");
            checked += 1;
        }
        assert!(checked >= 10, "{kind:?}: only {checked} comparable instances");
    }
}
