//! The linearized finite volume operator and its singular solve.
//!
//! For a frozen coefficient field ũ the scheme is a linear system A(ũ)u = F
//! whose matrix has column sums zero (mass conservation): its transpose
//! kernel is spanned by (1,…,1) and, on a connected mesh, its own kernel is
//! one-dimensional and spanned by a strictly positive vector V. A particular
//! solution is obtained by pinning one cell to zero; the returned solution is
//! the member of the affine family Ū + λV whose lower median is exactly zero.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{median_interval, CellField};
use crate::linalg::{Factorization, SparseMatrix};
use crate::mesh::{AdmissibleMesh, Edge, Vec2};
use crate::scalar::Real;

/// Diffusion law r ↦ λ(r).
pub type ScalarLaw<F> = Arc<dyn Fn(F) -> F + Send + Sync>;
/// Velocity field (x, y) ↦ v.
pub type VelocityFn<F> = Arc<dyn Fn(F, F) -> Vec2<F> + Send + Sync>;
/// Scalar field (x, y) ↦ f.
pub type SourceFn<F> = Arc<dyn Fn(F, F) -> F + Send + Sync>;

/// Cell the singular solves are pinned at.
pub const PIN_CELL: usize = 0;

/// Problem coefficients: diffusion law λ with declared bounds
/// 0 < μ ≤ λ(r) ≤ λ∞, velocity v with integrability exponent p > 2, and a
/// zero-mean source f.
#[derive(Clone)]
pub struct ProblemData<F> {
    pub lambda: ScalarLaw<F>,
    pub mu: F,
    pub lambda_inf: F,
    pub velocity: VelocityFn<F>,
    pub p: F,
    pub source: SourceFn<F>,
}

impl<F: Real> ProblemData<F> {
    pub fn new(
        lambda: ScalarLaw<F>,
        mu: F,
        lambda_inf: F,
        velocity: VelocityFn<F>,
        p: F,
        source: SourceFn<F>,
    ) -> Result<Self> {
        let data = Self {
            lambda,
            mu,
            lambda_inf,
            velocity,
            p,
            source,
        };
        data.validate()?;
        Ok(data)
    }

    /// Checks the declared λ bounds on a probe grid and the exponent range.
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > F::zero()) || !self.mu.is_finite() {
            return Err(Error::InvalidArgument(format!("mu = {} <= 0", self.mu)));
        }
        if !(self.lambda_inf >= self.mu) || !self.lambda_inf.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda_inf = {} < mu = {}",
                self.lambda_inf, self.mu
            )));
        }
        if !(self.p > F::of(2.0)) || !self.p.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "velocity exponent p = {} must exceed 2 in dimension 2",
                self.p
            )));
        }
        let mut probes: Vec<F> = (0..=320)
            .map(|k| F::of(-20.0) + F::of(0.125) * F::of_usize(k))
            .collect();
        for big in [1e2, 1e3, 1e6] {
            probes.push(F::of(big));
            probes.push(F::of(-big));
        }
        for r in probes {
            let l = (self.lambda)(r);
            if !(l >= self.mu) || !(l <= self.lambda_inf) {
                return Err(Error::InvalidArgument(format!(
                    "lambda({r}) = {l} outside declared bounds [{}, {}]",
                    self.mu, self.lambda_inf
                )));
            }
        }
        Ok(())
    }
}

/// Cell integrals of the source, F_K = ∫_K f, after compatibility projection.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceVector<F> {
    pub values: Vec<F>,
}

impl<F: Real> SourceVector<F> {
    pub fn new(values: Vec<F>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "nonfinite source entry in cell {i}"
            )));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![F::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> F {
        self.values.iter().fold(F::zero(), |s, &v| s + v)
    }

    /// CSV dump: `cell_id,F` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cell_id,F\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{i},{v}\n"));
        }
        s
    }
}

impl<F> std::ops::Index<usize> for SourceVector<F> {
    type Output = F;
    fn index(&self, i: usize) -> &F {
        &self.values[i]
    }
}

/// Per-edge scheme coefficients: λ_σ, the diamond-averaged normal velocity
/// v_{K,σ}, and the derived flux weights. Boundary entries are present but
/// never enter the operator.
#[derive(Clone, Debug)]
pub struct EdgeCoefficients<F> {
    pub lambda_sigma: Vec<F>,
    pub v_sigma: Vec<F>,
    /// m(σ)·λ_σ/d_σ.
    pub transmissibility: Vec<F>,
    /// m(σ)·v_{K,σ}.
    pub convective: Vec<F>,
}

impl<F: Real> EdgeCoefficients<F> {
    pub fn new(mesh: &AdmissibleMesh<F>, lambda_sigma: Vec<F>, v_sigma: Vec<F>) -> Result<Self> {
        if lambda_sigma.len() != mesh.n_edges() || v_sigma.len() != mesh.n_edges() {
            return Err(Error::InvalidArgument(
                "edge coefficient arrays must cover every edge".into(),
            ));
        }
        let mut transmissibility = Vec::with_capacity(mesh.n_edges());
        let mut convective = Vec::with_capacity(mesh.n_edges());
        for (id, e) in mesh.edges.iter().enumerate() {
            let t = e.length * lambda_sigma[id] / e.d_sigma;
            let c = e.length * v_sigma[id];
            if e.is_interior() && (!(t > F::zero()) || !t.is_finite() || !c.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "edge {id}: transmissibility {t} must be positive and finite"
                )));
            }
            transmissibility.push(t);
            convective.push(c);
        }
        Ok(Self {
            lambda_sigma,
            v_sigma,
            transmissibility,
            convective,
        })
    }
}

/// ∫_T v·n over the triangle (apex, a, b) by a centroid rule on q² congruent
/// subtriangles (exact for affine integrands).
fn cone_flux<F: Real>(
    v: &dyn Fn(F, F) -> Vec2<F>,
    apex: Vec2<F>,
    a: Vec2<F>,
    b: Vec2<F>,
    normal: Vec2<F>,
    q: usize,
) -> F {
    let e1 = a.sub(apex);
    let e2 = b.sub(apex);
    let area = (e1.x * e2.y - e1.y * e2.x).abs() * F::of(0.5);
    let qf = F::of_usize(q);
    let sub_area = area / (qf * qf);
    let third = F::one() / F::of(3.0);
    let two_thirds = F::of(2.0) / F::of(3.0);
    let mut acc = F::zero();
    for i in 0..q {
        for j in 0..(q - i) {
            let (ci, cj) = (F::of_usize(i) + third, F::of_usize(j) + third);
            let p = apex.add(e1.scale(ci / qf)).add(e2.scale(cj / qf));
            acc = acc + v(p.x, p.y).dot(normal);
            if i + j + 2 <= q {
                let (ci, cj) = (F::of_usize(i) + two_thirds, F::of_usize(j) + two_thirds);
                let p = apex.add(e1.scale(ci / qf)).add(e2.scale(cj / qf));
                acc = acc + v(p.x, p.y).dot(normal);
            }
        }
    }
    acc * sub_area
}

/// Diamond averages v_{K,σ} = (1/m(D_σ)) ∫_{D_σ} v·n_{K,σ}: one value per
/// edge, zero on boundary edges (their convective fluxes never enter the
/// scheme).
pub fn edge_velocity<F: Real>(
    mesh: &AdmissibleMesh<F>,
    data: &ProblemData<F>,
    quad_subdiv: usize,
) -> Result<Vec<F>> {
    if quad_subdiv == 0 {
        return Err(Error::InvalidArgument("quad_subdiv must be >= 1".into()));
    }
    let v = data.velocity.as_ref();
    Ok(mesh
        .edges
        .iter()
        .map(|e| match e.cell_l {
            Some(l) => {
                let xk = mesh.cells[e.cell_k].center;
                let xl = mesh.cells[l].center;
                let flux = cone_flux(v, xk, e.a, e.b, e.normal, quad_subdiv)
                    + cone_flux(v, xl, e.a, e.b, e.normal, quad_subdiv);
                flux / e.diamond_measure
            }
            None => F::zero(),
        })
        .collect())
}

/// Cell integrals F_K = ∫_K f by a composite midpoint rule on a
/// quad_subdiv×quad_subdiv subgrid per cell, followed by the compatibility
/// projection F_K ← F_K − m(K)/m(Ω)·Σ_J F_J. Returns the projected vector and
/// the pre-projection defect |Σ_J F_J| (large defects signal genuinely
/// incompatible data rather than quadrature error).
pub fn cell_source<F: Real>(
    mesh: &AdmissibleMesh<F>,
    data: &ProblemData<F>,
    quad_subdiv: usize,
) -> Result<(SourceVector<F>, F)> {
    if quad_subdiv == 0 {
        return Err(Error::InvalidArgument("quad_subdiv must be >= 1".into()));
    }
    let grid = mesh.grid.ok_or_else(|| {
        Error::Mesh("cell quadrature requires structured grid metadata".into())
    })?;
    let f = data.source.as_ref();
    let q = quad_subdiv;
    let qf = F::of_usize(q);
    let hx = grid.lx / F::of_usize(grid.nx);
    let hy = grid.ly / F::of_usize(grid.ny);
    let w = hx * hy / (qf * qf);
    let half = F::of(0.5);

    let mut values = Vec::with_capacity(mesh.n_cells());
    for id in 0..mesh.n_cells() {
        let (i, j) = (id % grid.nx, id / grid.nx);
        let (x0, y0) = (F::of_usize(i) * hx, F::of_usize(j) * hy);
        let mut acc = F::zero();
        for t in 0..q {
            let y = y0 + (F::of_usize(t) + half) * hy / qf;
            for s in 0..q {
                let x = x0 + (F::of_usize(s) + half) * hx / qf;
                acc = acc + f(x, y);
            }
        }
        values.push(acc * w);
    }

    let total: F = values.iter().fold(F::zero(), |s, &v| s + v);
    for (c, v) in mesh.cells.iter().zip(values.iter_mut()) {
        *v = *v - c.measure / mesh.total_measure * total;
    }
    Ok((SourceVector::new(values)?, total.abs()))
}

/// λ(u)_σ: arithmetic mean of the endpoint values on interior edges (the
/// bracket of admissible choices is an interval around it), λ(u_K) on
/// boundary edges.
pub fn lambda_edge<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u: &CellField<F>,
    data: &ProblemData<F>,
) -> Vec<F> {
    assert_eq!(u.len(), mesh.n_cells(), "field/mesh size mismatch");
    let lam = data.lambda.as_ref();
    mesh.edges
        .iter()
        .map(|e| match e.cell_l {
            Some(l) => (lam(u[e.cell_k]) + lam(u[l])) * F::of(0.5),
            None => lam(u[e.cell_k]),
        })
        .collect()
}

/// Upstream cell of an interior edge: K when v_{K,σ} ≥ 0, L otherwise.
pub fn upwind_index<F: Real>(edge: &Edge<F>, v_sigma: F) -> Result<usize> {
    let l = edge
        .cell_l
        .ok_or_else(|| Error::InvalidArgument("boundary edge has no upwind value".into()))?;
    Ok(if v_sigma >= F::zero() { edge.cell_k } else { l })
}

/// Assembles the linearized operator. Per interior edge σ = K|L with
/// v = v_{K,σ}: A_{K,K} += m(σ)(λ_σ/d_σ + v⁺), A_{K,L} += m(σ)(−λ_σ/d_σ − v⁻)
/// and symmetrically for L (where v flips sign, swapping v⁺ and v⁻). The two
/// contributions to each column are exact negations, so column sums vanish to
/// rounding.
pub fn assemble<F: Real>(
    mesh: &AdmissibleMesh<F>,
    coeffs: &EdgeCoefficients<F>,
) -> Result<SparseMatrix<F>> {
    let n = mesh.n_cells();
    let mut triplets = Vec::with_capacity(4 * mesh.n_interior_edges() + n);
    for i in 0..n {
        triplets.push((i, i, F::zero())); // keep the full diagonal in the pattern
    }
    for (id, e) in mesh.interior_edges() {
        let l = e.cell_l.unwrap();
        let k = e.cell_k;
        let v = coeffs.v_sigma[id];
        let vp = v.max(F::zero());
        let vm = (-v).max(F::zero());
        let akk = coeffs.transmissibility[id] + e.length * vp;
        let all = coeffs.transmissibility[id] + e.length * vm;
        triplets.push((k, k, akk));
        triplets.push((k, l, -all));
        triplets.push((l, l, all));
        triplets.push((l, k, -akk));
    }
    SparseMatrix::from_triplets(n, &triplets)
}

/// Strictly positive kernel generator with V = 1 at the pin cell.
pub fn kernel_vector<F: Real>(a: &SparseMatrix<F>) -> Result<CellField<F>> {
    kernel_vector_pinned(a, PIN_CELL)
}

pub fn kernel_vector_pinned<F: Real>(a: &SparseMatrix<F>, pin: usize) -> Result<CellField<F>> {
    let ap = a.with_pinned_row(pin);
    let fact = Factorization::prepare(&ap)?;
    let mut rhs = vec![F::zero(); a.n()];
    rhs[pin] = F::one();
    let (mut v, _) = fact.solve(&ap, &rhs)?;
    let scale = v[pin];
    for x in v.iter_mut() {
        *x = *x / scale;
    }
    check_kernel(a, &v)?;
    CellField::new(v)
}

fn check_kernel<F: Real>(a: &SparseMatrix<F>, v: &[F]) -> Result<()> {
    if let Some(k) = v.iter().position(|&x| !(x > F::zero())) {
        return Err(Error::LinearSolve(format!(
            "kernel vector not strictly positive at cell {k} (value {}): assembly bug",
            v[k]
        )));
    }
    let vmax = v.iter().fold(F::zero(), |m, &x| m.max(x.abs()));
    let rmax = a
        .matvec(v)
        .iter()
        .fold(F::zero(), |m, &x| m.max(x.abs()));
    // 1e-10 at f64 working precision, scaled up for wider-epsilon scalars
    let tol = F::of(1e-10).max(F::epsilon() * F::of(1e3));
    let bound = tol * a.inf_norm() * vmax;
    if rmax > bound {
        return Err(Error::LinearSolve(format!(
            "kernel residual {rmax} exceeds {bound}"
        )));
    }
    Ok(())
}

/// Particular solution of the consistent singular system: row `PIN_CELL` is
/// replaced by the equation u = 0 there, and the residual of the original
/// system is verified.
pub fn solve_pinned<F: Real>(a: &SparseMatrix<F>, f: &SourceVector<F>) -> Result<CellField<F>> {
    solve_pinned_at(a, f, PIN_CELL)
}

pub fn solve_pinned_at<F: Real>(
    a: &SparseMatrix<F>,
    f: &SourceVector<F>,
    pin: usize,
) -> Result<CellField<F>> {
    if f.len() != a.n() {
        return Err(Error::InvalidArgument("rhs/matrix size mismatch".into()));
    }
    let ap = a.with_pinned_row(pin);
    let fact = Factorization::prepare(&ap)?;
    let mut rhs = f.values.clone();
    rhs[pin] = F::zero();
    let (mut u, _) = fact.solve(&ap, &rhs)?;
    u[pin] = F::zero(); // impose the pin constraint exactly
    check_pinned_residual(a, f, &u)?;
    CellField::new(u)
}

fn check_pinned_residual<F: Real>(a: &SparseMatrix<F>, f: &SourceVector<F>, u: &[F]) -> Result<()> {
    let umax = u.iter().fold(F::zero(), |m, &x| m.max(x.abs()));
    let fmax = f.values.iter().fold(F::zero(), |m, &x| m.max(x.abs()));
    let rmax = a
        .matvec(u)
        .iter()
        .zip(&f.values)
        .fold(F::zero(), |m, (&au, &fk)| m.max((au - fk).abs()));
    let tol = F::of(1e-9).max(F::epsilon() * F::of(1e3));
    let bound = tol * (a.inf_norm() * umax + fmax);
    if rmax > bound {
        return Err(Error::LinearSolve(format!(
            "pinned solve residual {rmax} exceeds {bound}: inconsistent right-hand side?"
        )));
    }
    Ok(())
}

/// Shifts Ū along the positive kernel direction so the lower median is
/// exactly zero. The shifted field crosses zero at the candidate values
/// λ_K = −Ū_K/V_K, and the root of the increasing map λ ↦ lower-med(Ū + λV)
/// is the weighted lower quantile of those candidates; each output entry is
/// computed as V_K(λ* − λ_K) so its sign (and the zero at the median cell) is
/// exact.
pub fn median_normalize<F: Real>(
    mesh: &AdmissibleMesh<F>,
    u_bar: &CellField<F>,
    v: &CellField<F>,
) -> Result<CellField<F>> {
    let n = mesh.n_cells();
    if u_bar.len() != n || v.len() != n {
        return Err(Error::InvalidArgument("field/mesh size mismatch".into()));
    }
    if let Some(k) = v.values.iter().position(|&x| !(x > F::zero())) {
        return Err(Error::InvalidArgument(format!(
            "kernel direction not strictly positive at cell {k}"
        )));
    }
    let lam: Vec<F> = u_bar
        .values
        .iter()
        .zip(&v.values)
        .map(|(&ub, &vk)| -ub / vk)
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| lam[i].partial_cmp(&lam[j]).expect("finite candidates"));

    let total = order
        .iter()
        .fold(F::zero(), |s, &i| s + mesh.cells[i].measure);
    let half = total / F::of(2.0);
    let mut cum = F::zero();
    let mut lam_star = None;
    for &i in &order {
        cum = cum + mesh.cells[i].measure;
        if cum > half {
            lam_star = Some(lam[i]);
            break;
        }
    }
    let lam_star = lam_star.expect("cumulative measure reaches the total");

    let u = CellField::new(
        (0..n)
            .map(|k| v.values[k] * (lam_star - lam[k]))
            .collect(),
    )?;
    let med = median_interval(mesh, &u);
    if med.lower != F::zero() {
        return Err(Error::LinearSolve(format!(
            "median normalization failed: lower median {} != 0 (monotonicity bug)",
            med.lower
        )));
    }
    Ok(u)
}

/// One application of the map Γ: assemble at the frozen field, solve the
/// pinned system for a particular solution and the kernel direction (sharing
/// one factorization), and normalize the median. Returns the field and the
/// Krylov iteration count (zero on the direct path).
pub fn linear_scheme_solve_given<F: Real>(
    mesh: &AdmissibleMesh<F>,
    data: &ProblemData<F>,
    u_tilde: &CellField<F>,
    v_edges: &[F],
    f: &SourceVector<F>,
    pin: usize,
) -> Result<(CellField<F>, usize)> {
    let lam = lambda_edge(mesh, u_tilde, data);
    let coeffs = EdgeCoefficients::new(mesh, lam, v_edges.to_vec())?;
    let a = assemble(mesh, &coeffs)?;
    let ap = a.with_pinned_row(pin);
    let fact = Factorization::prepare(&ap)?;

    let mut rhs = f.values.clone();
    rhs[pin] = F::zero();
    let (mut u_bar, it1) = fact.solve(&ap, &rhs)?;
    u_bar[pin] = F::zero();
    check_pinned_residual(&a, f, &u_bar)?;

    let mut e_pin = vec![F::zero(); a.n()];
    e_pin[pin] = F::one();
    let (mut kern, it2) = fact.solve(&ap, &e_pin)?;
    let scale = kern[pin];
    for x in kern.iter_mut() {
        *x = *x / scale;
    }
    check_kernel(&a, &kern)?;

    let u = median_normalize(mesh, &CellField::new(u_bar)?, &CellField::new(kern)?)?;
    Ok((u, it1 + it2))
}

/// Γ(ũ) with velocity averages computed on the fly (quadrature level
/// `quad_subdiv`) and the default pin cell.
pub fn linear_scheme_solve<F: Real>(
    mesh: &AdmissibleMesh<F>,
    data: &ProblemData<F>,
    u_tilde: &CellField<F>,
    f: &SourceVector<F>,
    quad_subdiv: usize,
) -> Result<CellField<F>> {
    let v_edges = edge_velocity(mesh, data, quad_subdiv)?;
    Ok(linear_scheme_solve_given(mesh, data, u_tilde, &v_edges, f, PIN_CELL)?.0)
}
