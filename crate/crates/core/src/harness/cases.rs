//! Built-in problem cases: three manufactured cosine solutions (for
//! convergence orders), a zero case, and the mollified-dipole L¹ source
//! (for the estimate sweeps, no exact solution).

use crate::error::{Error, Result};
use crate::harness::config::CaseConfig;
use crate::mesh::Vec2;
use crate::scheme::ProblemData;
use std::f64::consts::PI;
use std::sync::Arc;

pub type Exact = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub struct ResolvedCase {
    pub name: String,
    pub data: ProblemData<f64>,
    pub exact: Option<Exact>,
}

fn u_star(x: f64, y: f64) -> f64 {
    (PI * x).cos() * (PI * y).cos()
}

/// |∇u*|² = π²(sin²πx cos²πy + cos²πx sin²πy).
fn grad_u_star_sq(x: f64, y: f64) -> f64 {
    let (sx, cx) = (PI * x).sin_cos();
    let (sy, cy) = (PI * y).sin_cos();
    PI * PI * (sx * sx * cy * cy + cx * cx * sy * sy)
}

/// Divergence-free stream velocity with v·n = 0 on the unit square:
/// v = (−sin πx cos πy, cos πx sin πy), the rotated curl of
/// ψ = (1/π) sin πx sin πy.
fn stream_velocity(x: f64, y: f64) -> Vec2<f64> {
    Vec2::new(-(PI * x).sin() * (PI * y).cos(), (PI * x).cos() * (PI * y).sin())
}

fn rational1(r: f64) -> f64 {
    1.0 + 1.0 / (1.0 + r * r)
}

/// Normalized compactly supported bump: g(z) = (4/π)(1−|z|²)³ on |z| ≤ 1,
/// with ∫_{ℝ²} g = 1.
fn bump(zx: f64, zy: f64) -> f64 {
    let r2 = zx * zx + zy * zy;
    if r2 >= 1.0 {
        0.0
    } else {
        let t = 1.0 - r2;
        4.0 / PI * t * t * t
    }
}

pub fn manufactured_case(name: &str, p: f64) -> Result<ResolvedCase> {
    let exact: Exact = Arc::new(u_star);
    let data = match name {
        "diffusion-cos" => ProblemData::new(
            Arc::new(|_| 1.0),
            1.0,
            1.0,
            Arc::new(|_, _| Vec2::new(0.0, 0.0)),
            p,
            Arc::new(|x, y| 2.0 * PI * PI * u_star(x, y)),
        )?,
        "convdiff-cos" => ProblemData::new(
            Arc::new(|_| 1.0),
            1.0,
            1.0,
            Arc::new(stream_velocity),
            p,
            Arc::new(|x: f64, y: f64| {
                let (sx, cx) = (PI * x).sin_cos();
                let (sy, cy) = (PI * y).sin_cos();
                2.0 * PI * PI * cx * cy + PI * (sx * sx * cy * cy - cx * cx * sy * sy)
            }),
        )?,
        "nonlinear-cos" => ProblemData::new(
            Arc::new(rational1),
            1.0,
            2.0,
            Arc::new(|_, _| Vec2::new(0.0, 0.0)),
            p,
            Arc::new(|x, y| {
                let u = u_star(x, y);
                let den = 1.0 + u * u;
                2.0 * PI * PI * u * rational1(u) + 2.0 * u * grad_u_star_sq(x, y) / (den * den)
            }),
        )?,
        "zero" => ProblemData::new(
            Arc::new(|_| 1.0),
            1.0,
            1.0,
            Arc::new(|_, _| Vec2::new(0.0, 0.0)),
            p,
            Arc::new(|_, _| 0.0),
        )?,
        _ => {
            return Err(Error::Config(format!(
                "unknown case '{name}' (expected diffusion-cos, convdiff-cos, nonlinear-cos, zero, dipole)"
            )))
        }
    };
    let exact = if name == "zero" {
        Some(Arc::new(|_: f64, _: f64| 0.0) as Exact)
    } else {
        Some(exact)
    };
    Ok(ResolvedCase {
        name: name.to_string(),
        data,
        exact,
    })
}

/// Mollified dipole: f_ε = [g((x−a)/ε) − g((x−b)/ε)]/ε² with a = (¼,½),
/// b = (¾,½); ‖f_ε‖_L¹ = 2 and ∫f_ε = 0 for any admissible ε. Rejects
/// widths whose bumps touch the boundary of the unit square.
pub fn singular_case(eps: f64, p: f64) -> Result<ResolvedCase> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Config(format!("dipole width eps = {eps} must be > 0")));
    }
    if eps >= 0.25 {
        return Err(Error::Config(format!(
            "dipole width eps = {eps} reaches the boundary (need eps < 0.25)"
        )));
    }
    let data = ProblemData::new(
        Arc::new(rational1),
        1.0,
        2.0,
        Arc::new(stream_velocity),
        p,
        Arc::new(move |x: f64, y: f64| {
            let e2 = eps * eps;
            (bump((x - 0.25) / eps, (y - 0.5) / eps) - bump((x - 0.75) / eps, (y - 0.5) / eps))
                / e2
        }),
    )?;
    Ok(ResolvedCase {
        name: "dipole".to_string(),
        data,
        exact: None,
    })
}

pub fn resolve_case(cfg: &CaseConfig) -> Result<ResolvedCase> {
    match cfg.case_name.as_str() {
        "dipole" => singular_case(cfg.case_eps, cfg.case_p),
        name => manufactured_case(name, cfg.case_p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::DataNorms;
    use crate::field::{median_interval, CellField};
    use crate::mesh::build_rect_mesh;
    use crate::scheme::cell_source;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn names_resolve_and_bad_ones_do_not() {
        for n in ["diffusion-cos", "convdiff-cos", "nonlinear-cos", "zero"] {
            assert!(manufactured_case(n, 4.0).is_ok(), "{n}");
        }
        assert!(manufactured_case("heat", 4.0).is_err());
        assert!(singular_case(0.05, 4.0).is_ok());
        assert!(singular_case(0.25, 4.0).is_err());
        assert!(singular_case(-0.1, 4.0).is_err());
    }

    #[test]
    fn sources_have_zero_mean_by_symmetry() {
        let m = build_rect_mesh(16, 16, 1.0, 1.0).unwrap();
        for name in ["diffusion-cos", "convdiff-cos", "nonlinear-cos"] {
            let case = manufactured_case(name, 4.0).unwrap();
            let (_, defect) = cell_source(&m, &case.data, 4).unwrap();
            assert!(defect <= 1e-12, "{name}: raw quadrature sum {defect}");
        }
        let dip = singular_case(0.05, 4.0).unwrap();
        let m = build_rect_mesh(64, 64, 1.0, 1.0).unwrap();
        let (_, defect) = cell_source(&m, &dip.data, 4).unwrap();
        assert!(defect <= 1e-10, "dipole raw quadrature sum {defect}");
    }

    /// Central-difference oracle for −div(λ(u*)∇u* − v·u*) at a point,
    /// differencing the analytic flux components.
    fn fd_minus_div(case: &ResolvedCase, x: f64, y: f64) -> f64 {
        let h = 3e-5;
        let lam = case.data.lambda.as_ref();
        let vel = case.data.velocity.as_ref();
        let fx = |a: f64, b: f64| {
            let (sx, _) = (PI * a).sin_cos();
            let du = -PI * sx * (PI * b).cos();
            lam(u_star(a, b)) * du - vel(a, b).x * u_star(a, b)
        };
        let fy = |a: f64, b: f64| {
            let du = -PI * (PI * a).cos() * (PI * b).sin();
            lam(u_star(a, b)) * du - vel(a, b).y * u_star(a, b)
        };
        -((fx(x + h, y) - fx(x - h, y)) / (2.0 * h) + (fy(x, y + h) - fy(x, y - h)) / (2.0 * h))
    }

    #[test]
    fn manufactured_sources_match_divergence_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for name in ["diffusion-cos", "convdiff-cos", "nonlinear-cos"] {
            let case = manufactured_case(name, 4.0).unwrap();
            for _ in 0..10 {
                let x: f64 = rng.random_range(0.05..0.95);
                let y: f64 = rng.random_range(0.05..0.95);
                let claimed = (case.data.source)(x, y);
                let oracle = fd_minus_div(&case, x, y);
                assert!(
                    (claimed - oracle).abs() <= 1e-6,
                    "{name} at ({x},{y}): {claimed} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn sampled_exact_solution_median_follows_grid_law() {
        // lower median of Π(cos πx cos πy) on an n×n unit grid is
        // −sin²(π/2n): O(h²), which is what keeps exact-error orders clean.
        for n in [4usize, 8, 16] {
            let m = build_rect_mesh(n, n, 1.0, 1.0).unwrap();
            let u = CellField::sample(&m, u_star).unwrap();
            let med = median_interval(&m, &u).lower;
            let predicted = -(PI / (2.0 * n as f64)).sin().powi(2);
            assert!(
                (med - predicted).abs() <= 1e-14,
                "n={n}: med {med} vs {predicted}"
            );
        }
    }

    #[test]
    fn dipole_l1_mass_is_two() {
        let m = build_rect_mesh(64, 64, 1.0, 1.0).unwrap();
        for eps in [0.1, 0.05] {
            let case = singular_case(eps, 4.0).unwrap();
            let norms = DataNorms::compute(&m, &case.data, 4).unwrap();
            assert!(
                (1.9..=2.1).contains(&norms.f_l1),
                "eps={eps}: ‖f‖_L¹ = {}",
                norms.f_l1
            );
        }
    }

    #[test]
    fn bump_has_unit_mass() {
        // polar closed form: ∫ g = (4/π)·2π·∫₀¹(1−r²)³ r dr = 8/8 = 1;
        // cross-check by midpoint quadrature on [−1,1]².
        let q = 400;
        let w = 2.0 / q as f64;
        let mut s = 0.0;
        for j in 0..q {
            let y = -1.0 + (j as f64 + 0.5) * w;
            for i in 0..q {
                let x = -1.0 + (i as f64 + 0.5) * w;
                s += bump(x, y);
            }
        }
        s *= w * w;
        assert!((s - 1.0).abs() <= 1e-3, "bump mass {s}");
    }

    #[test]
    fn dispatch_honors_config() {
        let mut cfg = CaseConfig::default();
        cfg.case_name = "dipole".into();
        cfg.case_eps = 0.1;
        let c = resolve_case(&cfg).unwrap();
        assert_eq!(c.name, "dipole");
        assert!(c.exact.is_none());

        cfg.case_name = "diffusion-cos".into();
        let c = resolve_case(&cfg).unwrap();
        assert!(c.exact.is_some());
    }
}
