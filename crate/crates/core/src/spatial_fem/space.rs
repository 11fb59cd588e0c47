use super::mesh::{Side, SpatialMesh};
use crate::error::{Error, Result};

/// Continuous Lagrange space of degree 1 or 2 on a structured mesh.
///
/// Nodes form a lexicographic grid refining the vertex grid; DoF
/// `node * components + c` is component `c` at `node`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpace {
    mesh: SpatialMesh,
    degree: usize,
    components: usize,
}

/// Values and physical gradients of the scalar shape functions of one cell at one point.
#[derive(Debug, Clone)]
pub struct ShapeEval {
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

/// Value and derivative of the `i`-th equispaced Lagrange polynomial of
/// degree `deg` on `[0, 1]`.
pub fn lagrange_1d(deg: usize, i: usize, s: f64) -> (f64, f64) {
    match (deg, i) {
        (1, 0) => (1.0 - s, -1.0),
        (1, 1) => (s, 1.0),
        (2, 0) => ((2.0 * s - 1.0) * (s - 1.0), 4.0 * s - 3.0),
        (2, 1) => (4.0 * s * (1.0 - s), 4.0 - 8.0 * s),
        (2, 2) => (s * (2.0 * s - 1.0), 4.0 * s - 1.0),
        _ => panic!("no Lagrange polynomial {i} of degree {deg}"),
    }
}

impl FunctionSpace {
    pub fn new(mesh: SpatialMesh, degree: usize, components: usize) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::InvalidMesh(format!("Lagrange degree {degree} not supported")));
        }
        if components != 1 && components != mesh.dim() {
            return Err(Error::InvalidMesh(format!("{components} components on a {}D mesh", mesh.dim())));
        }
        Ok(Self { mesh, degree, components })
    }

    pub fn scalar(mesh: SpatialMesh, degree: usize) -> Result<Self> {
        Self::new(mesh, degree, 1)
    }

    pub fn vector(mesh: SpatialMesh, degree: usize) -> Result<Self> {
        let d = mesh.dim();
        Self::new(mesh, degree, d)
    }

    pub fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn nodes_per_axis(&self) -> (usize, usize) {
        let (nx, ny) = self.mesh.cells_per_axis();
        let px = self.degree * nx + 1;
        let py = if self.mesh.dim() == 1 { 1 } else { self.degree * ny + 1 };
        (px, py)
    }

    pub fn n_nodes(&self) -> usize {
        let (px, py) = self.nodes_per_axis();
        px * py
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes() * self.components
    }

    #[inline]
    pub fn dof(&self, node: usize, comp: usize) -> usize {
        node * self.components + comp
    }

    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        let (px, _) = self.nodes_per_axis();
        let (hx, hy) = self.mesh.cell_size();
        let [(x0, _), (y0, _)] = self.mesh.extents();
        let d = self.degree as f64;
        let ix = node % px;
        let iy = node / px;
        let y = if self.mesh.dim() == 1 { 0.0 } else { y0 + iy as f64 * hy / d };
        [x0 + ix as f64 * hx / d, y]
    }

    /// Number of scalar shape functions per cell.
    pub fn shapes_per_cell(&self) -> usize {
        let k = self.degree + 1;
        if self.mesh.dim() == 1 {
            k
        } else {
            k * k
        }
    }

    /// Global node of every local shape function, local index `a + (degree+1) * b`.
    pub fn cell_nodes(&self, cell: usize) -> Vec<usize> {
        let (ix, iy) = self.mesh.cell_coords(cell);
        let (px, _) = self.nodes_per_axis();
        let k = self.degree + 1;
        let rows = if self.mesh.dim() == 1 { 1 } else { k };
        let mut out = Vec::with_capacity(k * rows);
        for b in 0..rows {
            for a in 0..k {
                let gx = self.degree * ix + a;
                let gy = if self.mesh.dim() == 1 { 0 } else { self.degree * iy + b };
                out.push(gy * px + gx);
            }
        }
        out
    }

    /// Shape functions of `cell` at reference point `xi` in `[0,1]^d`.
    pub fn shape_eval(&self, xi: [f64; 2]) -> ShapeEval {
        let k = self.degree + 1;
        let (hx, hy) = self.mesh.cell_size();
        let n = self.shapes_per_cell();
        let mut values = Vec::with_capacity(n);
        let mut grads = Vec::with_capacity(n);
        if self.mesh.dim() == 1 {
            for a in 0..k {
                let (v, d) = lagrange_1d(self.degree, a, xi[0]);
                values.push(v);
                grads.push([d / hx, 0.0]);
            }
        } else {
            let lx: Vec<(f64, f64)> = (0..k).map(|a| lagrange_1d(self.degree, a, xi[0])).collect();
            let ly: Vec<(f64, f64)> = (0..k).map(|b| lagrange_1d(self.degree, b, xi[1])).collect();
            for (vy, dy) in &ly {
                for (vx, dx) in &lx {
                    values.push(vx * vy);
                    grads.push([dx * vy / hx, vx * dy / hy]);
                }
            }
        }
        ShapeEval { values, grads }
    }

    /// Reference coordinates of physical point `p` in `cell`.
    pub fn to_reference(&self, cell: usize, p: [f64; 2]) -> [f64; 2] {
        let o = self.mesh.cell_origin(cell);
        let (hx, hy) = self.mesh.cell_size();
        let eta = if self.mesh.dim() == 1 { 0.0 } else { (p[1] - o[1]) / hy };
        [((p[0] - o[0]) / hx).clamp(0.0, 1.0), eta.clamp(0.0, 1.0)]
    }

    /// Cell containing `p` (the lower-left one on shared edges) and the reference point.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let [(x0, x1), (y0, y1)] = self.mesh.extents();
        let (nx, ny) = self.mesh.cells_per_axis();
        let tol = 1e-12 * (x1 - x0).abs().max(1.0);
        if p[0] < x0 - tol || p[0] > x1 + tol {
            return None;
        }
        let ix = (((p[0] - x0) / (x1 - x0) * nx as f64).floor() as isize).clamp(0, nx as isize - 1) as usize;
        let iy = if self.mesh.dim() == 1 {
            0
        } else {
            if p[1] < y0 - tol || p[1] > y1 + tol {
                return None;
            }
            (((p[1] - y0) / (y1 - y0) * ny as f64).floor() as isize).clamp(0, ny as isize - 1) as usize
        };
        let cell = self.mesh.cell_index(ix, iy);
        Some((cell, self.to_reference(cell, p)))
    }

    /// Value of component `comp` of the finite element function `coeffs` at `p`.
    pub fn evaluate(&self, coeffs: &[f64], comp: usize, p: [f64; 2]) -> Option<f64> {
        let (cell, xi) = self.locate(p)?;
        let e = self.shape_eval(xi);
        Some(self.cell_nodes(cell).iter().zip(&e.values).map(|(&n, v)| v * coeffs[self.dof(n, comp)]).sum())
    }

    /// Nodal interpolant of `f`, which returns one value per component.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> Vec<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs()];
        for node in 0..self.n_nodes() {
            let v = f(self.node_coords(node));
            for c in 0..self.components {
                out[self.dof(node, c)] = v[c];
            }
        }
        out
    }

    /// Nodes lying on the side carrying `marker`, in increasing order.
    pub fn boundary_nodes(&self, marker: &str) -> Result<Vec<usize>> {
        let side = self.mesh.side_of(marker)?;
        let (px, py) = self.nodes_per_axis();
        Ok(match side {
            Side::Left => (0..py).map(|j| j * px).collect(),
            Side::Right => (0..py).map(|j| j * px + px - 1).collect(),
            Side::Bottom => (0..px).collect(),
            Side::Top => (0..px).map(|i| (py - 1) * px + i).collect(),
        })
    }

    /// DoFs on `marker`, restricted to one component if given.
    pub fn boundary_dofs(&self, marker: &str, component: Option<usize>) -> Result<Vec<usize>> {
        if let Some(c) = component {
            if c >= self.components {
                return Err(Error::DimensionMismatch(format!("component {c} of a {}-component space", self.components)));
            }
        }
        let mut out = Vec::new();
        for n in self.boundary_nodes(marker)? {
            match component {
                Some(c) => out.push(self.dof(n, c)),
                None => out.extend((0..self.components).map(|c| self.dof(n, c))),
            }
        }
        Ok(out)
    }

    /// Node located at `p`, if any.
    pub fn node_at(&self, p: [f64; 2]) -> Option<usize> {
        let (px, py) = self.nodes_per_axis();
        let (hx, hy) = self.mesh.cell_size();
        let [(x0, _), (y0, _)] = self.mesh.extents();
        let d = self.degree as f64;
        let fx = (p[0] - x0) / (hx / d);
        let fy = if self.mesh.dim() == 1 { 0.0 } else { (p[1] - y0) / (hy / d) };
        let (ix, iy) = (fx.round(), fy.round());
        if (fx - ix).abs() > 1e-8 || (fy - iy).abs() > 1e-8 || ix < 0.0 || iy < 0.0 {
            return None;
        }
        let (ix, iy) = (ix as usize, iy as usize);
        (ix < px && iy < py).then_some(iy * px + ix)
    }
}
