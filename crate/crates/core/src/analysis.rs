//! Measured counterparts of the a priori estimates and functional
//! inequalities behind the scheme: nothing here asserts a constant, the
//! routines return lhs/rhs pairs and the callers judge boundedness.

use crate::error::{Error, Result};
use crate::field::{
    lp_norm, median_interval, s_n, s_n_scalar, truncate, w1p_norm, w1p_seminorm, CellField,
    DiamondField,
};
use crate::mesh::{AdmissibleMesh, Vec2};
use crate::scalar::Real;
use crate::scheme::{lambda_edge, upwind_index, ProblemData, SourceVector};
use std::sync::Arc;

/// φ(s) = ∫₀ˢ dt/(1+|t|)² = s/(1+|s|), the bounded odd test nonlinearity.
pub fn phi<F: Real>(s: F) -> F {
    s / (F::one() + s.abs())
}

#[derive(Clone, Debug)]
pub struct EstimateReport<F> {
    pub name: String,
    pub lhs: F,
    pub rhs: F,
    /// lhs/rhs with 0/0 ↦ 0.
    pub ratio: F,
}

impl<F: Real> EstimateReport<F> {
    pub fn new(name: impl Into<String>, lhs: F, rhs: F) -> Result<Self> {
        if !(lhs >= F::zero()) || !lhs.is_finite() || !(rhs >= F::zero()) || !rhs.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "estimate sides must be finite and nonnegative (lhs={lhs}, rhs={rhs})"
            )));
        }
        let ratio = if lhs == F::zero() { F::zero() } else { lhs / rhs };
        Ok(Self {
            name: name.into(),
            lhs,
            rhs,
            ratio,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeSet {
    A,
    B,
}

/// Partition of the interior edges; `None` on boundary edges.
#[derive(Clone, Debug)]
pub struct EdgeClassification {
    pub member: Vec<Option<EdgeSet>>,
}

impl EdgeClassification {
    pub fn count(&self, set: EdgeSet) -> usize {
        self.member.iter().filter(|m| **m == Some(set)).count()
    }
}

/// Sorts each interior edge into A (the sign pattern that makes the upwind
/// value controllable by the downstream one) or its complement B. With u₊
/// the upwind and u₋ the downstream value:
/// A ⇔ (u₊ ≥ u₋ and u₊ < 0) or (u₊ < u₋ and u₊ ≥ 0).
pub fn classify_edges<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    v_edges: &[F],
) -> Result<EdgeClassification> {
    if u.len() != mesh.n_cells() || v_edges.len() != mesh.n_edges() {
        return Err(Error::InvalidArgument("field/mesh size mismatch".into()));
    }
    let mut member = vec![None; mesh.n_edges()];
    for (id, e) in mesh.interior_edges() {
        let up = upwind_index(e, v_edges[id])?;
        let down = e.other(up).expect("interior edge has both cells");
        let (a, b) = (u[up], u[down]);
        let in_a = (a >= b && a < F::zero()) || (a < b && a >= F::zero());
        member[id] = Some(if in_a { EdgeSet::A } else { EdgeSet::B });
    }
    Ok(EdgeClassification { member })
}

/// Quadrature norms of the continuous data (composite midpoint on a
/// quad_subdiv × quad_subdiv per-cell grid): ‖f‖_L¹, ‖v‖_L², ‖v‖_Lp.
#[derive(Clone, Copy, Debug)]
pub struct DataNorms<F> {
    pub f_l1: F,
    pub v_l2: F,
    pub v_lp: F,
    pub p: F,
}

impl<F: Real> DataNorms<F> {
    pub fn compute(
        mesh: &AdmissibleMesh<F>,
        data: &ProblemData<F>,
        quad_subdiv: usize,
    ) -> Result<Self> {
        if quad_subdiv == 0 {
            return Err(Error::InvalidArgument("quad_subdiv must be >= 1".into()));
        }
        let grid = mesh
            .grid
            .ok_or_else(|| Error::Mesh("data quadrature requires structured grid metadata".into()))?;
        let q = quad_subdiv;
        let qf = F::of_usize(q);
        let hx = grid.lx / F::of_usize(grid.nx);
        let hy = grid.ly / F::of_usize(grid.ny);
        let w = hx * hy / (qf * qf);
        let half = F::of(0.5);
        let p = data.p;

        let (mut sf, mut s2, mut sp) = (F::zero(), F::zero(), F::zero());
        for id in 0..mesh.n_cells() {
            let (i, j) = (id % grid.nx, id / grid.nx);
            let (x0, y0) = (F::of_usize(i) * hx, F::of_usize(j) * hy);
            for t in 0..q {
                let y = y0 + (F::of_usize(t) + half) * hy / qf;
                for s in 0..q {
                    let x = x0 + (F::of_usize(s) + half) * hx / qf;
                    sf = sf + (data.source)(x, y).abs();
                    let vv = (data.velocity)(x, y);
                    let vn = vv.norm();
                    s2 = s2 + vn * vn;
                    sp = sp + vn.powf(p);
                }
            }
        }
        Ok(Self {
            f_l1: sf * w,
            v_l2: (s2 * w).sqrt(),
            v_lp: (sp * w).powf(F::one() / p),
            p,
        })
    }
}

fn require_null_median<F: Real>(mesh: &AdmissibleMesh<F>, u: &CellField<F>) -> Result<()> {
    let med = median_interval(mesh, u).lower;
    if med != F::zero() {
        return Err(Error::InvalidArgument(format!(
            "estimate requires a field with null lower median (got {med})"
        )));
    }
    Ok(())
}

/// Logarithmic energy estimate: lhs = ‖ln(1+|u|)‖²_{1,2,M}, rhs built from
/// the *discrete* data: 2·Σ_K|F_K| + d·m(Ω)^{(p−2)/p}·(Σ_σ m(D_σ)|v_σ|^p)^{2/p}
/// with d = 2. Rejects fields whose lower median is not exactly zero.
pub fn log_estimate<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    data: &ProblemData<F>,
    f: &SourceVector<F>,
    v_edges: &[F],
) -> Result<EstimateReport<F>> {
    require_null_median(mesh, u)?;
    if f.len() != mesh.n_cells() || v_edges.len() != mesh.n_edges() {
        return Err(Error::InvalidArgument("field/mesh size mismatch".into()));
    }
    let two = F::of(2.0);
    let w = u.map(|x| x.abs().ln_1p());
    let lhs_norm = w1p_norm(mesh, &w, two)?;
    let lhs = lhs_norm * lhs_norm;

    let f_l1 = f.values.iter().fold(F::zero(), |s, v| s + v.abs());
    let p = data.p;
    let vp = mesh
        .edges
        .iter()
        .zip(v_edges)
        .fold(F::zero(), |s, (e, &v)| s + e.diamond_measure * v.abs().powf(p));
    let v_sq = vp.powf(two / p);
    let rhs = two * f_l1 + two * mesh.total_measure.powf((p - two) / p) * v_sq;
    EstimateReport::new("log", lhs, rhs)
}

/// Truncate-and-test estimate: lhs = ‖T_n(u)‖_{1,2,M} against the data terms
/// of its proof, rhs = n‖f‖_L¹ + n²·d·‖v‖²_L² + 1 (d = 2, continuous
/// quadrature norms; the +1 keeps zero-data ratios meaningful).
pub fn tn_estimate<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    n: F,
    norms: &DataNorms<F>,
) -> Result<EstimateReport<F>> {
    require_null_median(mesh, u)?;
    let two = F::of(2.0);
    let tn = truncate(u, n)?;
    let lhs = w1p_norm(mesh, &tn, two)?;
    let rhs = n * norms.f_l1 + n * n * two * norms.v_l2 * norms.v_l2 + F::one();
    EstimateReport::new(format!("tn_n{n}"), lhs, rhs)
}

/// Rows (n, meas{|u| > n}, meas·ln²(1+n)): the third column is the quantity
/// expected to stay bounded in n.
pub fn exceedance_bound<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    n_values: &[F],
) -> Result<Vec<(F, F, F)>> {
    n_values
        .iter()
        .map(|&n| {
            if !(n > F::zero()) {
                return Err(Error::InvalidArgument(format!("exceedance level {n} <= 0")));
            }
            let meas = crate::field::exceedance_measure(mesh, u, n);
            let l = n.ln_1p();
            Ok((n, meas, meas * l * l))
        })
        .collect()
}

/// (1/n)·Σ_int m(σ)/d_σ · λ(u)_σ (u_K−u_L)(T_n(u_K)−T_n(u_L)) ≥ 0.
pub fn diffusive_energy<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    n: F,
    data: &ProblemData<F>,
) -> Result<F> {
    let tn = truncate(u, n)?;
    let lam = lambda_edge(mesh, u, data);
    let mut s = F::zero();
    for (id, e) in mesh.interior_edges() {
        let l = e.cell_l.unwrap();
        s = s + e.transmissivity() * lam[id] * (u[e.cell_k] - u[l]) * (tn[e.cell_k] - tn[l]);
    }
    Ok(s / n)
}

/// (1/n)·Σ_int m(σ)|v_{K,σ}||u_{σ,+}||T_n(u_{σ,+})−T_n(u_{σ,−})| ≥ 0.
pub fn convective_energy<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    n: F,
    v_edges: &[F],
) -> Result<F> {
    if v_edges.len() != mesh.n_edges() {
        return Err(Error::InvalidArgument("field/mesh size mismatch".into()));
    }
    let tn = truncate(u, n)?;
    let mut s = F::zero();
    for (id, e) in mesh.interior_edges() {
        let up = upwind_index(e, v_edges[id])?;
        let down = e.other(up).expect("interior edge has both cells");
        s = s + e.length * v_edges[id].abs() * u[up].abs() * (tn[up] - tn[down]).abs();
    }
    Ok(s / n)
}

/// Median Poincaré–Wirtinger ratio: lhs = ‖u − c‖_{0,p} with c the lower
/// median, rhs = |u|_{1,p,M}/ξ^{(p−1)/p}.
pub fn pw_median_check<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    p: F,
    xi: F,
) -> Result<EstimateReport<F>> {
    if !(xi > F::zero()) {
        return Err(Error::InvalidArgument(format!("regularity xi = {xi} <= 0")));
    }
    let c = median_interval(mesh, u).lower;
    let lhs = lp_norm(mesh, &u.map(|x| x - c), p)?;
    let rhs = w1p_seminorm(mesh, u, p)? / xi.powf((p - F::one()) / p);
    EstimateReport::new(format!("pw_median_p{p}"), lhs, rhs)
}

/// Discrete Sobolev ratio: lhs = ‖u‖_{0,q}, rhs = |u|_{1,2,M} + ‖u‖_{0,2}.
pub fn sobolev_check<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    q: F,
) -> Result<EstimateReport<F>> {
    let two = F::of(2.0);
    let lhs = lp_norm(mesh, u, q)?;
    let rhs = w1p_seminorm(mesh, u, two)? + lp_norm(mesh, u, two)?;
    EstimateReport::new(format!("sobolev_q{q}"), lhs, rhs)
}

/// Smooth scalar test function of position, sampled at cell centers.
#[derive(Clone)]
pub struct TestFunction<F> {
    pub name: String,
    func: Arc<dyn Fn(F, F) -> F + Send + Sync>,
}

impl<F: Real> TestFunction<F> {
    pub fn new(name: impl Into<String>, func: impl Fn(F, F) -> F + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    pub fn eval(&self, x: F, y: F) -> F {
        (self.func)(x, y)
    }

    /// Cell-center samples φ(x_K); rejects nonfinite values.
    pub fn sample(&self, mesh: &AdmissibleMesh<F>) -> Result<Vec<F>> {
        let vals: Vec<F> = mesh
            .cells
            .iter()
            .map(|c| (self.func)(c.center.x, c.center.y))
            .collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "test function '{}' is nonfinite on a cell center",
                self.name
            )));
        }
        Ok(vals)
    }
}

/// The weighted summation identity behind the convergence argument: with
/// weights w_K = φ(x_K)·S_n(u_K),
///   T1 = Σ_int m/d·λ_σ (u_K−u_L)(w_K−w_L)
///   T2 = Σ_int m(σ) v_{K,σ} u_{σ,+} (w_K−w_L)
///   T3 = Σ_K F_K w_K
/// and T1 + T2 − T3 equals the w-weighted sum of per-cell scheme residuals
/// (an algebraic rearrangement, so the returned residual is at rounding
/// scale whenever u solves the scheme).
pub fn renormalized_identity<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    data: &ProblemData<F>,
    f: &SourceVector<F>,
    v_edges: &[F],
    phi_fn: &TestFunction<F>,
    n: F,
) -> Result<(F, F, F, F)> {
    if f.len() != mesh.n_cells() || v_edges.len() != mesh.n_edges() {
        return Err(Error::InvalidArgument("field/mesh size mismatch".into()));
    }
    let sn = s_n(u, n)?;
    let phis = phi_fn.sample(mesh)?;
    let w: Vec<F> = phis.iter().zip(&sn.values).map(|(&p, &s)| p * s).collect();
    let lam = lambda_edge(mesh, u, data);

    let (mut t1, mut t2) = (F::zero(), F::zero());
    for (id, e) in mesh.interior_edges() {
        let l = e.cell_l.unwrap();
        let dw = w[e.cell_k] - w[l];
        t1 = t1 + e.transmissivity() * lam[id] * (u[e.cell_k] - u[l]) * dw;
        let up = upwind_index(e, v_edges[id])?;
        t2 = t2 + e.length * v_edges[id] * u[up] * dw;
    }
    let t3 = f
        .values
        .iter()
        .zip(&w)
        .fold(F::zero(), |s, (&fk, &wk)| s + fk * wk);
    Ok((t1, t2, t3, t1 + t2 - t3))
}

/// Diamond-averaged cutoff: (S_n(u_K)+S_n(u_L))/2 on interior diamonds,
/// S_n(u_K) on boundary diamonds.
pub fn diamond_average_sn<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    n: F,
) -> Result<Vec<F>> {
    if u.len() != mesh.n_cells() {
        return Err(Error::InvalidArgument("field/mesh size mismatch".into()));
    }
    if !(n > F::zero()) {
        return Err(Error::InvalidArgument(format!("cutoff level {n} <= 0")));
    }
    let half = F::of(0.5);
    Ok(mesh
        .edges
        .iter()
        .map(|e| {
            let sk = s_n_scalar(u[e.cell_k], n);
            match e.cell_l {
                Some(l) => (sk + s_n_scalar(u[l], n)) * half,
                None => sk,
            }
        })
        .collect())
}

/// L² distance between the diamond-averaged cutoff and the piecewise-constant
/// one, together with its computable majorant (1/(2n√d))·h·|T_{2n}(u)|_{1,2,M}
/// (d = 2). The distance is Σ_int m(D_σ)((S_K−S_L)/2)², square-rooted.
pub fn sn_deviation<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    n: F,
) -> Result<(F, F)> {
    if !(n > F::zero()) {
        return Err(Error::InvalidArgument(format!("cutoff level {n} <= 0")));
    }
    let two = F::of(2.0);
    let half = F::of(0.5);
    let mut dev2 = F::zero();
    for (_, e) in mesh.interior_edges() {
        let l = e.cell_l.unwrap();
        let ds = (s_n_scalar(u[e.cell_k], n) - s_n_scalar(u[l], n)) * half;
        dev2 = dev2 + e.diamond_measure * ds * ds;
    }
    let t2n = truncate(u, two * n)?;
    let semi = w1p_seminorm(mesh, &t2n, two)?;
    let majorant = mesh.h * semi / (two * n * two.sqrt());
    Ok((dev2.sqrt(), majorant))
}

/// Pairing of a diamond field against a smooth vector field at edge
/// midpoints: Σ_σ m(D_σ)·g_σ·w(x_σ). Used as the weak-convergence
/// diagnostic for discrete gradients.
pub fn gradient_pairing<F: Real>(
    mesh: &AdmissibleMesh<F>,
    grad: &DiamondField<F>,
    w: &dyn Fn(F, F) -> Vec2<F>,
) -> F {
    mesh.edges
        .iter()
        .zip(&grad.vectors)
        .fold(F::zero(), |s, (e, g)| {
            let m = e.midpoint();
            s + e.diamond_measure * g.dot(w(m.x, m.y))
        })
}
