//! Admissible cell-centered meshes of a rectangle.
//!
//! Admissibility here means the classical two-point-flux orthogonality
//! condition: each interior edge σ separating cells K and L is orthogonal to
//! the segment joining the cell centers x_K, x_L, and that segment crosses σ.
//! Every edge σ carries a diamond D_σ — the union of the cones with apexes at
//! the adjacent cell centers and base σ — of measure m(D_σ) = d_σ·m(σ)/d,
//! where d_σ is the center-to-center distance (center-to-edge distance on the
//! boundary) and d = 2 the space dimension. The diamonds partition Ω, so
//!
//! ```text
//!     Σ_{all σ} m(σ)·d_σ = d·m(Ω),
//! ```
//!
//! while the same sum restricted to interior edges equals
//! (2 − 1/nx − 1/ny)·m(Ω) on an nx×ny grid (strictly below d·m(Ω) whenever
//! there is a boundary).
//!
//! Only axis-aligned uniform rectangular grids are constructed here; the
//! admissibility checker accepts any mesh satisfying the conditions and is
//! exercised against hand-tampered meshes in the tests.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Point of R², also used for direction vectors.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2<F> {
    pub x: F,
    pub y: F,
}

impl<F: Real> Vec2<F> {
    pub fn new(x: F, y: F) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> F {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> F {
        self.dot(self).sqrt()
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, s: F) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Interior,
    Boundary,
}

#[derive(Clone, Debug)]
pub struct Cell<F> {
    pub center: Vec2<F>,
    pub measure: F,
    /// Ids of the edges on this cell's boundary.
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Edge<F> {
    pub kind: EdgeKind,
    /// Cell on the side the stored normal points away from.
    pub cell_k: usize,
    /// Opposite cell (interior edges only).
    pub cell_l: Option<usize>,
    /// Endpoints of the edge segment.
    pub a: Vec2<F>,
    pub b: Vec2<F>,
    /// m(σ): length of the segment.
    pub length: F,
    /// Unit normal n_{K,σ}, pointing out of cell K.
    pub normal: Vec2<F>,
    /// Distance from x_K to the edge line.
    pub d_k: F,
    /// Distance from x_L to the edge line (zero on the boundary).
    pub d_l: F,
    /// d_σ: |x_L − x_K| on interior edges, d_k on boundary edges.
    pub d_sigma: F,
    /// m(D_σ) = d_σ·m(σ)/d with d = 2.
    pub diamond_measure: F,
}

impl<F: Real> Edge<F> {
    pub fn is_interior(&self) -> bool {
        self.kind == EdgeKind::Interior
    }

    pub fn midpoint(&self) -> Vec2<F> {
        self.a.add(self.b).scale(F::of(0.5))
    }

    /// The cell across the edge from `cell`.
    pub fn other(&self, cell: usize) -> Option<usize> {
        if cell == self.cell_k {
            self.cell_l
        } else {
            Some(self.cell_k)
        }
    }

    /// Transmissivity weight m(σ)/d_σ.
    pub fn transmissivity(&self) -> F {
        self.length / self.d_sigma
    }
}

/// Structured description retained by rectangular grids; refinement needs it.
#[derive(Clone, Copy, Debug)]
pub struct RectGrid<F> {
    pub nx: usize,
    pub ny: usize,
    pub lx: F,
    pub ly: F,
}

#[derive(Clone, Debug)]
pub struct AdmissibleMesh<F> {
    pub cells: Vec<Cell<F>>,
    pub edges: Vec<Edge<F>>,
    /// Largest cell diameter.
    pub h: F,
    /// Regularity: min over cells and their edges of d(x_K, σ)/d_σ.
    pub xi: F,
    /// m(Ω).
    pub total_measure: F,
    /// Present iff the mesh came from `build_rect_mesh` (or `refine`).
    pub grid: Option<RectGrid<F>>,
}

impl<F: Real> AdmissibleMesh<F> {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = (usize, &Edge<F>)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_interior())
    }

    pub fn n_interior_edges(&self) -> usize {
        self.interior_edges().count()
    }

    /// Text dump: `cells N edges M h H xi XI` header, then one `C` line per
    /// cell and one `E` line per edge (`L = -1` marks boundary edges).
    pub fn text_dump(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        writeln!(
            s,
            "cells {} edges {} h {} xi {}",
            self.n_cells(),
            self.n_edges(),
            self.h,
            self.xi
        )
        .unwrap();
        for (id, c) in self.cells.iter().enumerate() {
            writeln!(s, "C {} {} {} {}", id, c.center.x, c.center.y, c.measure).unwrap();
        }
        for (id, e) in self.edges.iter().enumerate() {
            let kind = match e.kind {
                EdgeKind::Interior => "int",
                EdgeKind::Boundary => "bnd",
            };
            let l = e.cell_l.map_or(-1i64, |l| l as i64);
            writeln!(
                s,
                "E {} {} {} {} {} {} {} {} {}",
                id, kind, e.cell_k, l, e.length, e.normal.x, e.normal.y, e.d_k, e.d_l
            )
            .unwrap();
        }
        s
    }
}

/// Builds the uniform nx×ny grid of [0,lx]×[0,ly]. Cell (i, j) has id
/// `i + nx*j`; edge ids enumerate vertical interior edges, then horizontal
/// interior edges, then the boundary (left, right, bottom, top).
pub fn build_rect_mesh<F: Real>(nx: usize, ny: usize, lx: F, ly: F) -> Result<AdmissibleMesh<F>> {
    if nx == 0 || ny == 0 {
        return Err(Error::Mesh(format!("empty grid {nx}x{ny}")));
    }
    if !(lx > F::zero()) || !(ly > F::zero()) || !lx.is_finite() || !ly.is_finite() {
        return Err(Error::Mesh("side lengths must be positive and finite".into()));
    }
    let hx = lx / F::of_usize(nx);
    let hy = ly / F::of_usize(ny);
    let half = F::of(0.5);
    let cx = |i: usize| (F::of_usize(i) + half) * hx;
    let cy = |j: usize| (F::of_usize(j) + half) * hy;
    let id = |i: usize, j: usize| i + nx * j;

    let mut cells: Vec<Cell<F>> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| Cell {
            center: Vec2::new(cx(i), cy(j)),
            measure: hx * hy,
            edges: Vec::with_capacity(4),
        })
        .collect();

    let mut edges: Vec<Edge<F>> = Vec::new();
    let mut push = |cells: &mut Vec<Cell<F>>, e: Edge<F>| {
        let eid = edges.len();
        cells[e.cell_k].edges.push(eid);
        if let Some(l) = e.cell_l {
            cells[l].edges.push(eid);
        }
        edges.push(e);
    };

    let interior = |k: usize,
                    l: usize,
                    a: Vec2<F>,
                    b: Vec2<F>,
                    normal: Vec2<F>,
                    length: F,
                    d_half: F| Edge {
        kind: EdgeKind::Interior,
        cell_k: k,
        cell_l: Some(l),
        a,
        b,
        length,
        normal,
        d_k: d_half,
        d_l: d_half,
        d_sigma: d_half + d_half,
        diamond_measure: (d_half + d_half) * length * half,
    };
    let boundary =
        |k: usize, a: Vec2<F>, b: Vec2<F>, normal: Vec2<F>, length: F, d_half: F| Edge {
            kind: EdgeKind::Boundary,
            cell_k: k,
            cell_l: None,
            a,
            b,
            length,
            normal,
            d_k: d_half,
            d_l: F::zero(),
            d_sigma: d_half,
            diamond_measure: d_half * length * half,
        };

    let x_at = |i: usize| F::of_usize(i) * hx;
    let y_at = |j: usize| F::of_usize(j) * hy;
    let hx2 = hx * half;
    let hy2 = hy * half;

    // vertical interior edges between (i, j) and (i+1, j)
    for j in 0..ny {
        for i in 0..nx.saturating_sub(1) {
            let xe = x_at(i + 1);
            let e = interior(
                id(i, j),
                id(i + 1, j),
                Vec2::new(xe, y_at(j)),
                Vec2::new(xe, y_at(j + 1)),
                Vec2::new(F::one(), F::zero()),
                hy,
                hx2,
            );
            push(&mut cells, e);
        }
    }
    // horizontal interior edges between (i, j) and (i, j+1)
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx {
            let ye = y_at(j + 1);
            let e = interior(
                id(i, j),
                id(i, j + 1),
                Vec2::new(x_at(i), ye),
                Vec2::new(x_at(i + 1), ye),
                Vec2::new(F::zero(), F::one()),
                hx,
                hy2,
            );
            push(&mut cells, e);
        }
    }
    // boundary: left, right, bottom, top
    for j in 0..ny {
        let e = boundary(
            id(0, j),
            Vec2::new(F::zero(), y_at(j)),
            Vec2::new(F::zero(), y_at(j + 1)),
            Vec2::new(-F::one(), F::zero()),
            hy,
            hx2,
        );
        push(&mut cells, e);
    }
    for j in 0..ny {
        let e = boundary(
            id(nx - 1, j),
            Vec2::new(lx, y_at(j)),
            Vec2::new(lx, y_at(j + 1)),
            Vec2::new(F::one(), F::zero()),
            hy,
            hx2,
        );
        push(&mut cells, e);
    }
    for i in 0..nx {
        let e = boundary(
            id(i, 0),
            Vec2::new(x_at(i), F::zero()),
            Vec2::new(x_at(i + 1), F::zero()),
            Vec2::new(F::zero(), -F::one()),
            hx,
            hy2,
        );
        push(&mut cells, e);
    }
    for i in 0..nx {
        let e = boundary(
            id(i, ny - 1),
            Vec2::new(x_at(i), ly),
            Vec2::new(x_at(i + 1), ly),
            Vec2::new(F::zero(), F::one()),
            hx,
            hy2,
        );
        push(&mut cells, e);
    }

    let total_measure = cells.iter().fold(F::zero(), |s, c| s + c.measure);
    let mut mesh = AdmissibleMesh {
        cells,
        edges,
        h: (hx * hx + hy * hy).sqrt(),
        xi: F::zero(),
        total_measure,
        grid: Some(RectGrid { nx, ny, lx, ly }),
    };
    mesh.xi = compute_xi(&mesh);

    let report = check_admissibility(&mesh);
    if !report.ok() {
        return Err(Error::Mesh(report.violations.join("; ")));
    }
    Ok(mesh)
}

/// Minimum over cells K and their edges σ of d(x_K, σ)/d_σ. Equals 1/2 on any
/// uniform grid with at least one interior edge, 1 on a single-cell mesh.
pub fn compute_xi<F: Real>(mesh: &AdmissibleMesh<F>) -> F {
    let mut xi = F::infinity();
    for e in &mesh.edges {
        xi = xi.min(e.d_k / e.d_sigma);
        if e.cell_l.is_some() {
            xi = xi.min(e.d_l / e.d_sigma);
        }
    }
    xi
}

/// Outcome of the admissibility audit.
#[derive(Debug, Default)]
pub struct AdmissibilityReport {
    pub violations: Vec<String>,
}

impl AdmissibilityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

const GEOM_RTOL: f64 = 1e-10;

/// Audits the two-point-flux admissibility conditions and the stored derived
/// quantities. Every violation is reported with the offending entity.
pub fn check_admissibility<F: Real>(mesh: &AdmissibleMesh<F>) -> AdmissibilityReport {
    let mut rep = AdmissibilityReport::default();
    let tol = F::of(GEOM_RTOL);
    macro_rules! err {
        ($($arg:tt)*) => {
            rep.violations.push(format!($($arg)*))
        };
    }

    if mesh.cells.is_empty() {
        err!("mesh has no cells");
        return rep;
    }

    for (id, c) in mesh.cells.iter().enumerate() {
        if !(c.measure > F::zero()) {
            err!("cell {id}: nonpositive measure {}", c.measure);
        }
    }

    // cell-edge adjacency must be symmetric
    for (eid, e) in mesh.edges.iter().enumerate() {
        if e.cell_k >= mesh.cells.len() {
            err!("edge {eid}: cell index {} out of range", e.cell_k);
            continue;
        }
        if !mesh.cells[e.cell_k].edges.contains(&eid) {
            err!("edge {eid}: not listed by its cell {}", e.cell_k);
        }
        match (e.kind, e.cell_l) {
            (EdgeKind::Interior, Some(l)) => {
                if l >= mesh.cells.len() {
                    err!("edge {eid}: cell index {l} out of range");
                } else if !mesh.cells[l].edges.contains(&eid) {
                    err!("edge {eid}: not listed by its cell {l}");
                }
            }
            (EdgeKind::Boundary, None) => {}
            _ => err!("edge {eid}: kind/adjacency mismatch"),
        }
    }
    for (cid, c) in mesh.cells.iter().enumerate() {
        for &eid in &c.edges {
            if eid >= mesh.edges.len() {
                err!("cell {cid}: edge index {eid} out of range");
            } else {
                let e = &mesh.edges[eid];
                if e.cell_k != cid && e.cell_l != Some(cid) {
                    err!("cell {cid}: lists foreign edge {eid}");
                }
            }
        }
    }
    if !rep.ok() {
        return rep; // geometry checks below assume sane adjacency
    }

    for (eid, e) in mesh.edges.iter().enumerate() {
        if !(e.length > F::zero()) {
            err!("edge {eid}: nonpositive length {}", e.length);
            continue;
        }
        let tangent = e.b.sub(e.a);
        let nrm = e.normal.norm();
        if ((nrm - F::one()).abs()) > tol {
            err!("edge {eid}: normal not unit (|n| = {nrm})");
        }
        if e.normal.dot(tangent).abs() > tol * e.length {
            err!("edge {eid}: normal not orthogonal to the edge");
        }
        if (tangent.norm() - e.length).abs() > tol * e.length {
            err!("edge {eid}: stored length disagrees with endpoints");
        }
        let xk = mesh.cells[e.cell_k].center;
        let scale = e.d_sigma.max(e.length);
        match e.cell_l {
            Some(l) => {
                let xl = mesh.cells[l].center;
                let dkl = xl.sub(xk);
                // orthogonality: x_K x_L ⟂ σ
                if dkl.dot(tangent).abs() > tol * dkl.norm() * e.length {
                    err!("edge {eid}: centers not orthogonal to the edge");
                }
                if (dkl.norm() - e.d_sigma).abs() > tol * scale {
                    err!(
                        "edge {eid}: d_sigma {} differs from |x_L - x_K| {}",
                        e.d_sigma,
                        dkl.norm()
                    );
                }
                // the segment (x_K, x_L) must cross the edge: the midpoint
                // projection onto the tangent lies inside the segment, and
                // the centers lie on opposite sides of the edge line.
                let sk = xk.sub(e.a).dot(e.normal);
                let sl = xl.sub(e.a).dot(e.normal);
                if !(sk < F::zero() && sl > F::zero()) {
                    err!(
                        "edge {eid}: centers do not straddle the edge line"
                    );
                } else {
                    let t_cross = sl / (sl - sk); // crossing = x_L + t(x_K − x_L)
                    let cross = xl.add(xk.sub(xl).scale(t_cross));
                    let along = cross.sub(e.a).dot(tangent) / (e.length * e.length);
                    if along < -tol || along > F::one() + tol {
                        err!("edge {eid}: center segment misses the edge");
                    }
                }
                let dk = xk.sub(e.a).dot(e.normal).abs();
                let dl = xl.sub(e.a).dot(e.normal).abs();
                if (dk - e.d_k).abs() > tol * scale || (dl - e.d_l).abs() > tol * scale {
                    err!("edge {eid}: stored d_k/d_l disagree with geometry");
                }
            }
            None => {
                let dk = xk.sub(e.a).dot(e.normal).abs();
                if !(dk > F::zero()) {
                    err!("edge {eid}: boundary cell center on the edge line");
                }
                if (dk - e.d_k).abs() > tol * scale || (e.d_sigma - e.d_k).abs() > tol * scale {
                    err!("edge {eid}: boundary distances inconsistent");
                }
                // the foot of the perpendicular from x_K must fall on σ
                let along = xk.sub(e.a).dot(tangent) / (e.length * e.length);
                if along < -tol || along > F::one() + tol {
                    err!(
                        "edge {eid}: orthogonal projection of the center misses the edge"
                    );
                }
            }
        }
        let dm = e.d_sigma * e.length * F::of(0.5);
        if (dm - e.diamond_measure).abs() > tol * dm {
            err!("edge {eid}: diamond measure inconsistent");
        }
    }

    // interior adjacency graph must be connected
    let n = mesh.cells.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(c) = stack.pop() {
        for &eid in &mesh.cells[c].edges {
            if let Some(o) = mesh.edges[eid].other(c) {
                if !seen[o] {
                    seen[o] = true;
                    stack.push(o);
                }
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        err!("interior adjacency graph is disconnected");
    }

    // diamonds partition Ω: Σ m(σ)·d_σ over ALL edges equals d·m(Ω)
    let sum_all = mesh
        .edges
        .iter()
        .fold(F::zero(), |s, e| s + e.length * e.d_sigma);
    let expect = F::of(2.0) * mesh.total_measure;
    if (sum_all - expect).abs() > tol * expect {
        err!(
            "diamond partition identity violated: sum m(sigma) d_sigma = {sum_all}, 2 m(Omega) = {expect}"
        );
    }

    let total = mesh.cells.iter().fold(F::zero(), |s, c| s + c.measure);
    if (total - mesh.total_measure).abs() > tol * mesh.total_measure {
        err!(
            "stored total measure {} differs from cell sum {total}",
            mesh.total_measure
        );
    }

    if !(compute_xi(mesh) > F::zero()) {
        err!("regularity xi is not positive");
    }

    rep
}

/// Splits every cell into 2×2 congruent children. Only meshes carrying
/// rectangular grid structure can be refined.
pub fn refine<F: Real>(mesh: &AdmissibleMesh<F>) -> Result<AdmissibleMesh<F>> {
    match mesh.grid {
        Some(g) => build_rect_mesh(2 * g.nx, 2 * g.ny, g.lx, g.ly),
        None => Err(Error::Mesh(
            "refinement requires a rectangular grid mesh".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit4x4() -> AdmissibleMesh<f64> {
        build_rect_mesh(4, 4, 1.0, 1.0).unwrap()
    }

    #[test]
    fn counts_on_the_4x4_unit_square() {
        let m = unit4x4();
        assert_eq!(m.n_cells(), 16);
        assert_eq!(m.n_interior_edges(), 24);
        assert_eq!(m.n_edges(), 40); // 24 interior + 16 boundary
        assert_eq!(m.xi, 0.5);
        assert_eq!(m.total_measure, 1.0);
        // h is the cell diagonal
        assert!((m.h - 0.25f64.hypot(0.25)).abs() < 1e-15);
    }

    #[test]
    fn unit_cells_have_diagonal_diameter() {
        let m = build_rect_mesh(1, 1, 1.0, 1.0).unwrap();
        assert!((m.h - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.xi, 1.0); // no interior edges: boundary ratios are all 1
        assert_eq!(m.n_edges(), 4);
        assert_eq!(m.n_interior_edges(), 0);
    }

    #[test]
    fn refine_quadruples_cells() {
        let m = build_rect_mesh::<f64>(2, 2, 1.0, 1.0).unwrap();
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.n_interior_edges(), 4);
        let r = refine(&m).unwrap();
        assert_eq!(r.n_cells(), 16);
        assert_eq!(r.n_interior_edges(), 24);
        assert_eq!(r.xi, 0.5);
        assert!((r.h - m.h / 2.0).abs() < 1e-15);
    }

    #[test]
    fn refine_needs_grid_structure() {
        let mut m = unit4x4();
        m.grid = None;
        assert!(refine(&m).is_err());
    }

    #[test]
    fn rejects_degenerate_dimensions() {
        assert!(build_rect_mesh::<f64>(0, 3, 1.0, 1.0).is_err());
        assert!(build_rect_mesh(3, 3, 0.0, 1.0).is_err());
        assert!(build_rect_mesh(3, 3, 1.0, -2.0).is_err());
        assert!(build_rect_mesh(3, 3, f64::NAN, 1.0).is_err());
    }

    /// The diamonds partition Ω, so over ALL edges Σ m(σ)d_σ = 2 m(Ω); over
    /// interior edges only, the sum is (2 − 1/nx − 1/ny)·m(Ω).
    #[test]
    fn transmissivity_sums() {
        for &(nx, ny, lx, ly) in &[(4usize, 4usize, 1.0, 1.0), (5, 3, 2.0, 0.7), (1, 7, 0.3, 2.4)]
        {
            let m = build_rect_mesh(nx, ny, lx, ly).unwrap();
            let all: f64 = m.edges.iter().map(|e| e.length * e.d_sigma).sum();
            assert!(
                (all - 2.0 * m.total_measure).abs() <= 1e-12 * m.total_measure,
                "{nx}x{ny}: all-edge sum {all}"
            );
            let int: f64 = m
                .interior_edges()
                .map(|(_, e)| e.length * e.d_sigma)
                .sum();
            let expect = (2.0 - 1.0 / nx as f64 - 1.0 / ny as f64) * m.total_measure;
            assert!(
                (int - expect).abs() <= 1e-12 * m.total_measure,
                "{nx}x{ny}: interior sum {int} vs {expect}"
            );
        }
    }

    #[test]
    fn diamond_measures_partition_the_domain() {
        let m = build_rect_mesh(6, 3, 1.5, 1.0).unwrap();
        let s: f64 = m.edges.iter().map(|e| e.diamond_measure).sum();
        assert!((s - m.total_measure).abs() <= 1e-12 * m.total_measure);
    }

    #[test]
    fn admissibility_accepts_built_meshes() {
        for &(nx, ny) in &[(1usize, 1usize), (4, 4), (7, 2), (16, 16)] {
            let m = build_rect_mesh(nx, ny, 1.0, 1.0).unwrap();
            let rep = check_admissibility(&m);
            assert!(rep.ok(), "{nx}x{ny}: {:?}", rep.violations);
        }
    }

    #[test]
    fn admissibility_flags_center_displacement() {
        let mut m = unit4x4();
        // slide a center along the grid so an edge loses orthogonality
        m.cells[5].center.y += 0.01;
        let rep = check_admissibility(&m);
        assert!(!rep.ok());
        assert!(rep
            .violations
            .iter()
            .any(|v| v.contains("orthogonal") || v.contains("d_sigma")));
    }

    #[test]
    fn admissibility_flags_negative_measure() {
        let mut m = unit4x4();
        m.cells[3].measure = -1.0;
        assert!(!check_admissibility(&m).ok());
    }

    #[test]
    fn admissibility_flags_broken_adjacency() {
        let mut m = unit4x4();
        m.cells[2].edges.pop();
        assert!(!check_admissibility(&m).ok());
    }

    #[test]
    fn admissibility_flags_bad_diamond_measure() {
        let mut m = unit4x4();
        m.edges[0].diamond_measure *= 2.0;
        assert!(!check_admissibility(&m).ok());
    }

    #[test]
    fn xi_is_half_on_uniform_grids() {
        for &(nx, ny) in &[(2usize, 1usize), (3, 3), (8, 5)] {
            let m = build_rect_mesh(nx, ny, 1.0, 1.0).unwrap();
            assert_eq!(compute_xi(&m), 0.5, "{nx}x{ny}");
        }
    }

    #[test]
    fn text_dump_shape() {
        let m = build_rect_mesh(2, 1, 2.0, 1.0).unwrap();
        let dump = m.text_dump();
        let mut lines = dump.lines();
        assert_eq!(lines.next().unwrap(), "cells 2 edges 7 h 1.4142135623730951 xi 0.5");
        // C id x y measure
        assert_eq!(lines.next().unwrap(), "C 0 0.5 0.5 1");
        assert_eq!(lines.next().unwrap(), "C 1 1.5 0.5 1");
        // E id kind K L length nx ny dK dL — first edge is the interior one
        assert_eq!(lines.next().unwrap(), "E 0 int 0 1 1 1 0 0.5 0.5");
        assert_eq!(dump.lines().count(), 1 + 2 + 7);
        assert!(dump.lines().filter(|l| l.contains(" -1 ")).count() == 6);
    }

    #[test]
    fn single_precision_smoke() {
        let m = build_rect_mesh::<f32>(4, 4, 1.0, 1.0).unwrap();
        assert_eq!(m.xi, 0.5f32);
        assert_eq!(m.n_interior_edges(), 24);
    }

    #[test]
    fn interior_edge_geometry_on_stretched_grid() {
        let m = build_rect_mesh(2, 1, 2.0, 1.0).unwrap();
        let (_, e) = m.interior_edges().next().unwrap();
        assert_eq!(e.length, 1.0);
        assert_eq!(e.d_sigma, 1.0);
        assert_eq!(e.diamond_measure, 0.5);
        assert_eq!(e.normal, Vec2::new(1.0, 0.0));
        assert_eq!(e.cell_k, 0);
        assert_eq!(e.cell_l, Some(1));
    }
}
