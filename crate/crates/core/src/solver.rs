//! Picard iteration on the map Γ: successive substitution with optional
//! damping, starting from u⁰ = 0. The underlying existence proof is a
//! Brouwer fixed-point argument and guarantees nothing about this iteration,
//! so convergence is monitored and reported, never assumed.

use crate::error::{Error, Result};
use crate::field::{lp_norm, median_interval, CellField};
use crate::mesh::AdmissibleMesh;
use crate::scalar::Real;
use crate::scheme::{
    assemble, cell_source, edge_velocity, kernel_vector, lambda_edge, linear_scheme_solve_given,
    median_normalize, upwind_index, EdgeCoefficients, ProblemData, SourceVector, PIN_CELL,
};

#[derive(Clone, Copy, Debug)]
pub struct PicardOptions<F> {
    pub tol: F,
    pub max_iter: usize,
    /// Damping θ ∈ (0, 1]: u^{k+1} = (1−θ)u^k + θ·Γ(u^k).
    pub damping: F,
}

impl<F: Real> Default for PicardOptions<F> {
    fn default() -> Self {
        Self {
            tol: F::of(1e-8),
            max_iter: 200,
            damping: F::one(),
        }
    }
}

impl<F: Real> PicardOptions<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > F::zero()) || !self.tol.is_finite() {
            return Err(Error::InvalidArgument(format!("tol = {} <= 0", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        if !(self.damping > F::zero()) || !(self.damping <= F::one()) {
            return Err(Error::InvalidArgument(format!(
                "damping = {} outside (0, 1]",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Iteration trace. `converged == false` after `max_iter` updates is the
/// loud non-convergence report; callers must not treat the field as a
/// solution in that case.
#[derive(Clone, Debug, PartialEq)]
pub struct PicardReport<F> {
    pub iterations: usize,
    pub converged: bool,
    /// ‖u^{k+1} − u^k‖_{0,2} per iteration.
    pub update_history: Vec<F>,
    /// Krylov iterations per Picard step (0 on the direct path).
    pub linear_iters: Vec<usize>,
    /// max_K |scheme residual| of the returned field.
    pub final_residual: F,
}

impl<F: Real> PicardReport<F> {
    /// CSV dump: `k,update_norm,linear_iters` rows, k starting at 1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,update_norm,linear_iters\n");
        for (k, (du, li)) in self.update_history.iter().zip(&self.linear_iters).enumerate() {
            s.push_str(&format!("{},{du},{li}\n", k + 1));
        }
        s
    }
}

/// Per-cell residual of the fully nonlinear scheme, with λ_σ and the upwind
/// choice evaluated at `u` itself and precomputed velocity averages.
pub fn scheme_residual_given<F: Real>(
    mesh: &AdmissibleMesh<F>,
    data: &ProblemData<F>,
    u: &CellField<F>,
    v_edges: &[F],
    f: &SourceVector<F>,
) -> Result<CellField<F>> {
    if u.len() != mesh.n_cells() || f.len() != mesh.n_cells() {
        return Err(Error::InvalidArgument("field/mesh size mismatch".into()));
    }
    let lam = lambda_edge(mesh, u, data);
    let mut r: Vec<F> = f.values.iter().map(|&fk| -fk).collect();
    for (id, e) in mesh.interior_edges() {
        let l = e.cell_l.unwrap();
        let up = upwind_index(e, v_edges[id])?;
        let flux = e.transmissivity() * lam[id] * (u[e.cell_k] - u[l])
            + e.length * v_edges[id] * u[up];
        r[e.cell_k] = r[e.cell_k] + flux;
        r[l] = r[l] - flux;
    }
    CellField::new(r)
}

/// Residual with velocity averages computed on the fly.
pub fn scheme_residual<F: Real>(
    mesh: &AdmissibleMesh<F>,
    data: &ProblemData<F>,
    u: &CellField<F>,
    f: &SourceVector<F>,
    quad_subdiv: usize,
) -> Result<CellField<F>> {
    let v_edges = edge_velocity(mesh, data, quad_subdiv)?;
    scheme_residual_given(mesh, data, u, &v_edges, f)
}

/// Picard iteration with precomputed velocity averages and source. Converges
/// when ‖u^{k+1} − u^k‖_{0,2} ≤ tol·(1 + ‖u^k‖_{0,2}); the returned field is
/// re-normalized along the kernel of the operator assembled at itself, so its
/// lower median is exactly zero even for damped runs.
pub fn picard_solve_given<F: Real>(
    mesh: &AdmissibleMesh<F>,
    data: &ProblemData<F>,
    opts: &PicardOptions<F>,
    v_edges: &[F],
    f: &SourceVector<F>,
) -> Result<(CellField<F>, PicardReport<F>)> {
    opts.validate()?;
    data.validate()?;
    let two = F::of(2.0);
    let mut u = CellField::zeros(mesh.n_cells());
    let mut update_history = Vec::new();
    let mut linear_iters = Vec::new();
    let mut converged = false;

    for _ in 0..opts.max_iter {
        let (g, lin) = linear_scheme_solve_given(mesh, data, &u, v_edges, f, PIN_CELL)?;
        let u_next = if opts.damping == F::one() {
            g
        } else {
            u.lin_comb(F::one() - opts.damping, &g, opts.damping)
        };
        let delta = lp_norm(mesh, &u_next.sub(&u), two)?;
        let u_norm = lp_norm(mesh, &u, two)?;
        update_history.push(delta);
        linear_iters.push(lin);
        let done = delta <= opts.tol * (F::one() + u_norm);
        u = u_next;
        if done {
            converged = true;
            break;
        }
    }

    // Final exact median normalization along the kernel at the final
    // coefficients (a kernel direction leaves the residual unchanged).
    let lam = lambda_edge(mesh, &u, data);
    let a = assemble(mesh, &EdgeCoefficients::new(mesh, lam, v_edges.to_vec())?)?;
    let kern = kernel_vector(&a)?;
    let u = median_normalize(mesh, &u, &kern)?;

    let final_residual = scheme_residual_given(mesh, data, &u, v_edges, f)?.max_abs();
    let report = PicardReport {
        iterations: update_history.len(),
        converged,
        update_history,
        linear_iters,
        final_residual,
    };
    Ok((u, report))
}

/// Full nonlinear solve: velocity averages and cell sources are produced at
/// quadrature level `quad_subdiv`, then the iteration runs.
pub fn picard_solve<F: Real>(
    mesh: &AdmissibleMesh<F>,
    data: &ProblemData<F>,
    opts: &PicardOptions<F>,
    quad_subdiv: usize,
) -> Result<(CellField<F>, PicardReport<F>)> {
    let v_edges = edge_velocity(mesh, data, quad_subdiv)?;
    let (f, _) = cell_source(mesh, data, quad_subdiv)?;
    picard_solve_given(mesh, data, opts, &v_edges, &f)
}

/// Convenience check used by tests and the harness: exact lower median of
/// the returned solution.
pub fn assert_null_median<F: Real>(mesh: &AdmissibleMesh<F>, u: &CellField<F>) -> Result<()> {
    let med = median_interval(mesh, u);
    if med.lower != F::zero() {
        return Err(Error::LinearSolve(format!(
            "returned field has lower median {} != 0",
            med.lower
        )));
    }
    Ok(())
}
