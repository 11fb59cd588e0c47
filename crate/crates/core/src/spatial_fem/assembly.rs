use super::mesh::{match_interface, Facet, Side, SpatialMesh};
use super::space::{FunctionSpace, ShapeEval};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::quadrature::GaussLegendre;

/// Spatial bilinear forms. Rows index test functions, columns trial functions.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    /// `(u, φ)`
    Mass,
    /// `(∇u, ∇φ)`
    Stiffness,
    /// `(β·∇u, φ)`
    Convection { beta: [f64; 2] },
    /// `(μ(∇u + ∇uᵀ) + λ(∇·u)I, ∇φ)`
    Elasticity { mu: f64, lambda: f64 },
    /// `-α(pI, ∇φ) + α⟨p n, φ⟩` on `boundary`; rows vector-valued, columns scalar.
    PressureGradientCoupling { alpha: f64, boundary: Option<String> },
    /// `α(∇·u, φ)`; rows scalar, columns vector-valued.
    DivergenceCoupling { alpha: f64 },
    /// `⟨u, φ⟩` on `marker`
    BoundaryMass { marker: String },
    /// `⟨u, φ⟩` on a shared facet set; row and column spaces may live on different meshes.
    InterfaceMass { marker: String },
    /// `⟨∂_n u, φ⟩` on a shared facet set, gradient and outward normal taken
    /// from the trial (column) side.
    InterfaceNormalDerivative { marker: String },
}

fn quad_points(row: &FunctionSpace, col: &FunctionSpace) -> GaussLegendre {
    GaussLegendre::new(row.degree().max(col.degree()) + 2)
}

fn same_mesh(row: &FunctionSpace, col: &FunctionSpace) -> Result<()> {
    if row.mesh() != col.mesh() {
        return Err(Error::Assembly("volume forms need row and column spaces on one mesh".into()));
    }
    Ok(())
}

fn volume_points(mesh: &SpatialMesh, q: &GaussLegendre) -> Vec<([f64; 2], f64)> {
    let (hx, hy) = mesh.cell_size();
    let jac = hx * hy;
    let mut out = Vec::new();
    if mesh.dim() == 1 {
        for (s, w) in q.points().iter().zip(q.weights()) {
            out.push(([*s, 0.0], w * jac));
        }
    } else {
        for (t, wt) in q.points().iter().zip(q.weights()) {
            for (s, ws) in q.points().iter().zip(q.weights()) {
                out.push(([*s, *t], ws * wt * jac));
            }
        }
    }
    out
}

#[inline]
fn volume_kernel(op: &Operator, ci: usize, nr: f64, gr: [f64; 2], cj: usize, nc: f64, gc: [f64; 2]) -> f64 {
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    match op {
        Operator::Mass => {
            if ci == cj {
                nr * nc
            } else {
                0.0
            }
        }
        Operator::Stiffness => {
            if ci == cj {
                dot(gr, gc)
            } else {
                0.0
            }
        }
        Operator::Convection { beta } => {
            if ci == cj {
                dot(*beta, gc) * nr
            } else {
                0.0
            }
        }
        Operator::Elasticity { mu, lambda } => {
            let diag = if ci == cj { dot(gc, gr) } else { 0.0 };
            mu * (diag + gc[ci] * gr[cj]) + lambda * gc[cj] * gr[ci]
        }
        Operator::PressureGradientCoupling { alpha, .. } => -alpha * nc * gr[ci],
        Operator::DivergenceCoupling { alpha } => alpha * gc[cj] * nr,
        _ => 0.0,
    }
}

fn check_components(row: &FunctionSpace, col: &FunctionSpace, op: &Operator) -> Result<()> {
    let (r, c) = (row.components(), col.components());
    let ok = match op {
        Operator::Elasticity { .. } => r == c && r == row.mesh().dim(),
        Operator::PressureGradientCoupling { .. } => c == 1 && r == row.mesh().dim(),
        Operator::DivergenceCoupling { .. } => r == 1 && c == col.mesh().dim(),
        _ => r == c,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Assembly(format!("{op:?} does not accept {r}-component rows and {c}-component columns")))
    }
}

fn assemble_volume(row: &FunctionSpace, col: &FunctionSpace, op: &Operator, out: &mut TripletBuilder) {
    let q = quad_points(row, col);
    let pts = volume_points(row.mesh(), &q);
    let evals: Vec<(ShapeEval, ShapeEval, f64)> =
        pts.iter().map(|(xi, w)| (row.shape_eval(*xi), col.shape_eval(*xi), *w)).collect();
    let (rc, cc) = (row.components(), col.components());
    let nr = row.shapes_per_cell() * rc;
    let nc = col.shapes_per_cell() * cc;
    let mut local = vec![0.0; nr * nc];
    for cell in 0..row.mesh().n_cells() {
        local.iter_mut().for_each(|v| *v = 0.0);
        for (er, ec, w) in &evals {
            for a in 0..row.shapes_per_cell() {
                for ci in 0..rc {
                    let i = a * rc + ci;
                    for b in 0..col.shapes_per_cell() {
                        for cj in 0..cc {
                            let j = b * cc + cj;
                            local[i * nc + j] +=
                                w * volume_kernel(op, ci, er.values[a], er.grads[a], cj, ec.values[b], ec.grads[b]);
                        }
                    }
                }
            }
        }
        let rn = row.cell_nodes(cell);
        let cn = col.cell_nodes(cell);
        for (a, &ra) in rn.iter().enumerate() {
            for ci in 0..rc {
                for (b, &cb) in cn.iter().enumerate() {
                    for cj in 0..cc {
                        let v = local[(a * rc + ci) * nc + b * cc + cj];
                        if v != 0.0 {
                            out.push(row.dof(ra, ci), col.dof(cb, cj), v);
                        }
                    }
                }
            }
        }
    }
}

/// Quadrature on a facet: physical points and weights.
fn facet_points(mesh: &SpatialMesh, f: &Facet, q: &GaussLegendre) -> Vec<([f64; 2], f64)> {
    if mesh.dim() == 1 {
        return vec![(f.a, 1.0)];
    }
    let len = f.measure();
    q.points()
        .iter()
        .zip(q.weights())
        .map(|(s, w)| ([f.a[0] + s * (f.b[0] - f.a[0]), f.a[1] + s * (f.b[1] - f.a[1])], w * len))
        .collect()
}

/// Puts a reference point exactly onto the facet's side of the cell.
fn snap(f: &Facet, mut xi: [f64; 2]) -> [f64; 2] {
    match f.side {
        Side::Left => xi[0] = 0.0,
        Side::Right => xi[0] = 1.0,
        Side::Bottom => xi[1] = 0.0,
        Side::Top => xi[1] = 1.0,
    }
    xi
}

/// Facet integral over matched facet pairs of `kernel(row shape, row comp, col shape, col comp, n_col)`.
fn assemble_facets(
    row: &FunctionSpace,
    col: &FunctionSpace,
    pairs: &[(Facet, Facet)],
    out: &mut TripletBuilder,
    kernel: impl Fn(usize, f64, usize, f64, [f64; 2], [f64; 2]) -> f64,
) {
    let q = quad_points(row, col);
    for (fr, fc) in pairs {
        let rn = row.cell_nodes(fr.cell);
        let cn = col.cell_nodes(fc.cell);
        let normal = fc.side.outward_normal();
        for (p, w) in facet_points(row.mesh(), fr, &q) {
            let er = row.shape_eval(snap(fr, row.to_reference(fr.cell, p)));
            let ec = col.shape_eval(snap(fc, col.to_reference(fc.cell, p)));
            for (a, &ra) in rn.iter().enumerate() {
                for ci in 0..row.components() {
                    for (b, &cb) in cn.iter().enumerate() {
                        for cj in 0..col.components() {
                            let v = kernel(ci, er.values[a], cj, ec.values[b], ec.grads[b], normal);
                            if v != 0.0 {
                                out.push(row.dof(ra, ci), col.dof(cb, cj), w * v);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn self_pairs(space: &FunctionSpace, marker: &str) -> Result<Vec<(Facet, Facet)>> {
    Ok(space.mesh().facets(marker)?.into_iter().map(|f| (f, f)).collect())
}

pub fn assemble_operator(row: &FunctionSpace, col: &FunctionSpace, op: &Operator) -> Result<CsrMatrix> {
    check_components(row, col, op)?;
    let mut out = TripletBuilder::new(row.n_dofs(), col.n_dofs());
    match op {
        Operator::Mass
        | Operator::Stiffness
        | Operator::Convection { .. }
        | Operator::Elasticity { .. }
        | Operator::DivergenceCoupling { .. } => {
            same_mesh(row, col)?;
            assemble_volume(row, col, op, &mut out);
        }
        Operator::PressureGradientCoupling { alpha, boundary } => {
            same_mesh(row, col)?;
            assemble_volume(row, col, op, &mut out);
            if let Some(marker) = boundary {
                let pairs = self_pairs(row, marker)?;
                let alpha = *alpha;
                assemble_facets(row, col, &pairs, &mut out, |ci, nr, _, nc, _, n| alpha * nc * n[ci] * nr);
            }
        }
        Operator::BoundaryMass { marker } => {
            same_mesh(row, col)?;
            let pairs = self_pairs(row, marker)?;
            assemble_facets(row, col, &pairs, &mut out, |ci, nr, cj, nc, _, _| if ci == cj { nr * nc } else { 0.0 });
        }
        Operator::InterfaceMass { marker } => {
            let pairs = match_interface(row.mesh(), marker, col.mesh(), marker)?;
            assemble_facets(row, col, &pairs, &mut out, |ci, nr, cj, nc, _, _| if ci == cj { nr * nc } else { 0.0 });
        }
        Operator::InterfaceNormalDerivative { marker } => {
            let pairs = match_interface(row.mesh(), marker, col.mesh(), marker)?;
            assemble_facets(row, col, &pairs, &mut out, |ci, nr, cj, _, gc, n| {
                if ci == cj {
                    (gc[0] * n[0] + gc[1] * n[1]) * nr
                } else {
                    0.0
                }
            });
        }
    }
    Ok(out.build())
}

/// `⟨t, φ_i⟩` on `marker` for a constant traction vector `t`.
pub fn assemble_traction_vector(space: &FunctionSpace, marker: &str, traction: [f64; 2]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; space.n_dofs()];
    let q = GaussLegendre::new(space.degree() + 2);
    for f in space.mesh().facets(marker)? {
        let nodes = space.cell_nodes(f.cell);
        for (p, w) in facet_points(space.mesh(), &f, &q) {
            let e = space.shape_eval(snap(&f, space.to_reference(f.cell, p)));
            for (a, &n) in nodes.iter().enumerate() {
                for c in 0..space.components() {
                    out[space.dof(n, c)] += w * traction[c] * e.values[a];
                }
            }
        }
    }
    Ok(out)
}

/// `(f, φ_i)` over the whole mesh for a scalar space.
pub fn assemble_load_vector(space: &FunctionSpace, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let q = GaussLegendre::new(space.degree() + 4);
    let pts = volume_points(space.mesh(), &q);
    let evals: Vec<ShapeEval> = pts.iter().map(|(xi, _)| space.shape_eval(*xi)).collect();
    let (hx, hy) = space.mesh().cell_size();
    let mut out = vec![0.0; space.n_dofs()];
    for cell in 0..space.mesh().n_cells() {
        let o = space.mesh().cell_origin(cell);
        let nodes = space.cell_nodes(cell);
        for ((xi, w), e) in pts.iter().zip(&evals) {
            let y = if space.mesh().dim() == 1 { 0.0 } else { o[1] + xi[1] * hy };
            let fv = f([o[0] + xi[0] * hx, y]);
            for (a, &n) in nodes.iter().enumerate() {
                out[space.dof(n, 0)] += w * fv * e.values[a];
            }
        }
    }
    out
}

/// `⟨1, φ_i⟩` on `marker`: the functional `u ↦ ∫_marker u` as a coefficient vector.
pub fn assemble_boundary_functional(space: &FunctionSpace, marker: &str) -> Result<Vec<f64>> {
    if space.components() != 1 {
        return Err(Error::Assembly("boundary functional needs a scalar space".into()));
    }
    assemble_traction_vector(space, marker, [1.0, 0.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial_fem::mesh::{build_mesh, MeshSpec};
    use nalgebra::DMatrix;

    fn interval(a: f64, b: f64, n: usize, deg: usize) -> FunctionSpace {
        FunctionSpace::scalar(build_mesh(&MeshSpec::interval(a, b, n)).unwrap(), deg).unwrap()
    }

    #[test]
    fn interval_stiffness_stencil() {
        let h = 0.5;
        let s = interval(0.0, 2.0 * h, 2, 1);
        let k = assemble_operator(&s, &s, &Operator::Stiffness).unwrap().to_dense();
        let expect = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]) / h;
        assert!((k - expect).amax() < 1e-14);
    }

    #[test]
    fn interval_mass_single_cell() {
        let h = 0.3;
        let s = interval(1.0, 1.0 + h, 1, 1);
        let m = assemble_operator(&s, &s, &Operator::Mass).unwrap().to_dense();
        let expect = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]) * (h / 6.0);
        assert!((m - expect).amax() < 1e-15);
    }

    #[test]
    fn interval_interface_mass_is_point_evaluation() {
        let f = FunctionSpace::scalar(
            build_mesh(&MeshSpec::interval(0.0, 2.0, 5).with_marker(Side::Right, "interface")).unwrap(),
            1,
        )
        .unwrap();
        let s = FunctionSpace::scalar(
            build_mesh(&MeshSpec::interval(2.0, 4.0, 7).with_marker(Side::Left, "interface")).unwrap(),
            1,
        )
        .unwrap();
        let m = assemble_operator(&f, &s, &Operator::InterfaceMass { marker: "interface".into() }).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(5, 0), 1.0);
        // one-sided normal derivative of the solid trial functions, outward normal -1
        let d = assemble_operator(&f, &s, &Operator::InterfaceNormalDerivative { marker: "interface".into() }).unwrap();
        let hs = 2.0 / 7.0;
        assert!((d.get(5, 0) - 1.0 / hs).abs() < 1e-12);
        assert!((d.get(5, 1) + 1.0 / hs).abs() < 1e-12);
    }

    #[test]
    fn traction_sums_to_total_force() {
        let m = build_mesh(&MeshSpec::rectangle((0.0, 100.0), (0.0, 20.0), 16, 16)).unwrap();
        let u = FunctionSpace::vector(m, 2).unwrap();
        let f = assemble_traction_vector(&u, "top", [0.0, -1e7]).unwrap();
        let fy: f64 = (0..u.n_nodes()).map(|n| f[u.dof(n, 1)]).sum();
        let fx: f64 = (0..u.n_nodes()).map(|n| f[u.dof(n, 0)]).sum();
        assert!((fy + 1e9).abs() < 1e-3);
        assert_eq!(fx, 0.0);
        // Simpson weights per edge: h/6, 4h/6, h/6; shared vertices collect two
        let h = 100.0 / 16.0;
        let top = u.boundary_nodes("top").unwrap();
        let w = |k: usize| -f[u.dof(top[k], 1)] / 1e7;
        assert!((w(0) - h / 6.0).abs() < 1e-10);
        assert!((w(1) - 4.0 * h / 6.0).abs() < 1e-10);
        assert!((w(2) - 2.0 * h / 6.0).abs() < 1e-10);
        let zero = assemble_traction_vector(&u, "top", [0.0, 0.0]).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        assert!(assemble_traction_vector(&u, "interface", [0.0, 1.0]).is_err());
    }

    #[test]
    fn pressure_gradient_is_minus_divergence_transpose() {
        let m = build_mesh(&MeshSpec::rectangle((0.0, 3.0), (0.0, 2.0), 3, 2)).unwrap();
        let u = FunctionSpace::vector(m.clone(), 2).unwrap();
        let p = FunctionSpace::scalar(m, 1).unwrap();
        let bup = assemble_operator(&u, &p, &Operator::PressureGradientCoupling { alpha: 0.7, boundary: None }).unwrap();
        let bpu = assemble_operator(&p, &u, &Operator::DivergenceCoupling { alpha: 0.7 }).unwrap();
        assert!((bup.to_dense() + bpu.transpose().to_dense()).amax() < 1e-13);
    }

    #[test]
    fn elasticity_kills_rigid_translations() {
        let m = build_mesh(&MeshSpec::rectangle((0.0, 2.0), (0.0, 1.0), 3, 2)).unwrap();
        let u = FunctionSpace::vector(m, 2).unwrap();
        let s = assemble_operator(&u, &u, &Operator::Elasticity { mu: 2.0, lambda: 3.0 }).unwrap();
        let shift = u.interpolate(|_| vec![1.0, -2.0]);
        assert!(s.mul_vec(&shift).iter().all(|v| v.abs() < 1e-12));
        let rot = u.interpolate(|p| vec![-p[1], p[0]]);
        assert!(s.mul_vec(&rot).iter().all(|v| v.abs() < 1e-12));
        assert!((s.to_dense() - s.transpose().to_dense()).amax() < 1e-12);
    }

    #[test]
    fn convection_of_linear_function() {
        let m = build_mesh(&MeshSpec::rectangle((0.0, 1.0), (0.0, 1.0), 4, 4)).unwrap();
        let s = FunctionSpace::scalar(m, 1).unwrap();
        let c = assemble_operator(&s, &s, &Operator::Convection { beta: [2.0, 0.0] }).unwrap();
        let mass = assemble_operator(&s, &s, &Operator::Mass).unwrap();
        // β·∇x = 2, so C x = M 2
        let x = s.interpolate(|p| vec![p[0]]);
        let two = vec![2.0; s.n_dofs()];
        let lhs = c.mul_vec(&x);
        let rhs = mass.mul_vec(&two);
        assert!(lhs.iter().zip(&rhs).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn boundary_mass_and_functional() {
        let m = build_mesh(&MeshSpec::rectangle((0.0, 100.0), (0.0, 20.0), 16, 16)).unwrap();
        let p = FunctionSpace::scalar(m, 1).unwrap();
        let l = assemble_boundary_functional(&p, "bottom").unwrap();
        assert!((l.iter().sum::<f64>() - 100.0).abs() < 1e-10);
        let bm = assemble_operator(&p, &p, &Operator::BoundaryMass { marker: "bottom".into() }).unwrap();
        let one = vec![1.0; p.n_dofs()];
        assert!((bm.bilinear(&one, &one) - 100.0).abs() < 1e-10);
    }

    #[test]
    fn load_vector_integrates_source() {
        let s = interval(0.0, 2.0, 10, 1);
        let b = assemble_load_vector(&s, |x| (std::f64::consts::PI * x[0] / 4.0).sin());
        // ∫_0^2 sin(πx/4) dx = 4/π
        assert!((b.iter().sum::<f64>() - 4.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn unknown_marker_and_component_mismatch() {
        let s = interval(0.0, 1.0, 2, 1);
        assert!(matches!(
            assemble_operator(&s, &s, &Operator::BoundaryMass { marker: "nope".into() }),
            Err(Error::UnknownMarker(_))
        ));
        assert!(assemble_operator(&s, &s, &Operator::DivergenceCoupling { alpha: 1.0 }).is_ok());
        let m = build_mesh(&MeshSpec::rectangle((0.0, 1.0), (0.0, 1.0), 2, 2)).unwrap();
        let v = FunctionSpace::vector(m.clone(), 1).unwrap();
        let p = FunctionSpace::scalar(m, 1).unwrap();
        assert!(assemble_operator(&p, &v, &Operator::Mass).is_err());
    }
}
