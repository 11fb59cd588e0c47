use crate::error::{Error, Result};

/// Side of the bounding box a boundary facet lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub fn outward_normal(self) -> [f64; 2] {
        match self {
            Side::Left => [-1.0, 0.0],
            Side::Right => [1.0, 0.0],
            Side::Bottom => [0.0, -1.0],
            Side::Top => [0.0, 1.0],
        }
    }

    fn default_name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        }
    }
}

/// Geometry and marker layout of a structured mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub x: (f64, f64),
    /// `None` for an interval.
    pub y: Option<(f64, f64)>,
    pub cells: (usize, usize),
    /// Overrides of the default side names (`left`, `right`, `bottom`, `top`).
    pub markers: Vec<(Side, String)>,
    pub subdomain: usize,
}

impl MeshSpec {
    pub fn interval(a: f64, b: f64, cells: usize) -> Self {
        Self { x: (a, b), y: None, cells: (cells, 1), markers: Vec::new(), subdomain: 0 }
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Self {
        Self { x, y: Some(y), cells: (nx, ny), markers: Vec::new(), subdomain: 0 }
    }

    pub fn with_marker(mut self, side: Side, name: &str) -> Self {
        self.markers.retain(|(s, _)| *s != side);
        self.markers.push((side, name.to_string()));
        self
    }

    pub fn with_subdomain(mut self, id: usize) -> Self {
        self.subdomain = id;
        self
    }
}

/// Axis-aligned tensor-product mesh of an interval or a rectangle.
///
/// Cells and vertices are numbered lexicographically with `x` running fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMesh {
    dim: usize,
    x: (f64, f64),
    y: (f64, f64),
    nx: usize,
    ny: usize,
    markers: Vec<(Side, String)>,
    subdomain: usize,
}

/// A boundary facet: a point in 1D, an edge in 2D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub cell: usize,
    pub side: Side,
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Facet {
    pub fn midpoint(&self) -> [f64; 2] {
        [(self.a[0] + self.b[0]) / 2.0, (self.a[1] + self.b[1]) / 2.0]
    }

    pub fn measure(&self) -> f64 {
        let d = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        (d[0] * d[0] + d[1] * d[1]).sqrt()
    }
}

pub fn build_mesh(spec: &MeshSpec) -> Result<SpatialMesh> {
    let (nx, ny) = spec.cells;
    let dim = if spec.y.is_some() { 2 } else { 1 };
    if nx == 0 || (dim == 2 && ny == 0) {
        return Err(Error::InvalidMesh("cell counts must be positive".into()));
    }
    let y = spec.y.unwrap_or((0.0, 0.0));
    let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && b > a;
    if !ok(spec.x) || (dim == 2 && !ok(y)) {
        return Err(Error::InvalidMesh(format!("degenerate extents {:?} x {:?}", spec.x, spec.y)));
    }
    let sides: &[Side] = if dim == 1 { &[Side::Left, Side::Right] } else { &[Side::Left, Side::Right, Side::Bottom, Side::Top] };
    let mut markers = Vec::new();
    for &s in sides {
        let name = spec
            .markers
            .iter()
            .find(|(m, _)| *m == s)
            .map(|(_, n)| n.clone())
            .unwrap_or_else(|| s.default_name().to_string());
        if markers.iter().any(|(_, n): &(Side, String)| *n == name) {
            return Err(Error::InvalidMesh(format!("marker `{name}` assigned to two sides")));
        }
        markers.push((s, name));
    }
    if let Some((s, _)) = spec.markers.iter().find(|(s, _)| !sides.contains(s)) {
        return Err(Error::InvalidMesh(format!("side {s:?} does not exist in {dim}D")));
    }
    Ok(SpatialMesh { dim, x: spec.x, y, nx, ny: if dim == 1 { 1 } else { ny }, markers, subdomain: spec.subdomain })
}

impl SpatialMesh {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_vertices(&self) -> usize {
        if self.dim == 1 {
            self.nx + 1
        } else {
            (self.nx + 1) * (self.ny + 1)
        }
    }

    pub fn extents(&self) -> [(f64, f64); 2] {
        [self.x, self.y]
    }

    pub fn subdomain(&self) -> usize {
        self.subdomain
    }

    /// Cell sizes `(hx, hy)`; `hy` is 1 for intervals so it cancels in Jacobians.
    pub fn cell_size(&self) -> (f64, f64) {
        let hx = (self.x.1 - self.x.0) / self.nx as f64;
        let hy = if self.dim == 1 { 1.0 } else { (self.y.1 - self.y.0) / self.ny as f64 };
        (hx, hy)
    }

    pub fn measure(&self) -> f64 {
        let lx = self.x.1 - self.x.0;
        if self.dim == 1 {
            lx
        } else {
            lx * (self.y.1 - self.y.0)
        }
    }

    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    /// Lower-left corner of a cell.
    pub fn cell_origin(&self, cell: usize) -> [f64; 2] {
        let (ix, iy) = self.cell_coords(cell);
        let (hx, hy) = self.cell_size();
        let y0 = if self.dim == 1 { 0.0 } else { self.y.0 + iy as f64 * hy };
        [self.x.0 + ix as f64 * hx, y0]
    }

    pub fn vertex(&self, v: usize) -> [f64; 2] {
        let (hx, hy) = self.cell_size();
        let ix = v % (self.nx + 1);
        let iy = v / (self.nx + 1);
        let y = if self.dim == 1 { 0.0 } else { self.y.0 + iy as f64 * hy };
        [self.x.0 + ix as f64 * hx, y]
    }

    pub fn markers(&self) -> impl Iterator<Item = &str> {
        self.markers.iter().map(|(_, n)| n.as_str())
    }

    pub fn side_of(&self, marker: &str) -> Result<Side> {
        self.markers
            .iter()
            .find(|(_, n)| n == marker)
            .map(|(s, _)| *s)
            .ok_or_else(|| Error::UnknownMarker(marker.to_string()))
    }

    pub fn marker_of(&self, side: Side) -> Option<&str> {
        self.markers.iter().find(|(s, _)| *s == side).map(|(_, n)| n.as_str())
    }

    /// Boundary facets carrying `marker`, ordered along the side.
    pub fn facets(&self, marker: &str) -> Result<Vec<Facet>> {
        let side = self.side_of(marker)?;
        let (hx, hy) = self.cell_size();
        let mut out = Vec::new();
        if self.dim == 1 {
            let (cell, x) = match side {
                Side::Left => (0, self.x.0),
                Side::Right => (self.nx - 1, self.x.1),
                _ => unreachable!(),
            };
            out.push(Facet { cell, side, a: [x, 0.0], b: [x, 0.0] });
            return Ok(out);
        }
        match side {
            Side::Bottom | Side::Top => {
                let (iy, y) = if side == Side::Bottom { (0, self.y.0) } else { (self.ny - 1, self.y.1) };
                for ix in 0..self.nx {
                    let x0 = self.x.0 + ix as f64 * hx;
                    out.push(Facet { cell: self.cell_index(ix, iy), side, a: [x0, y], b: [x0 + hx, y] });
                }
            }
            Side::Left | Side::Right => {
                let (ix, x) = if side == Side::Left { (0, self.x.0) } else { (self.nx - 1, self.x.1) };
                for iy in 0..self.ny {
                    let y0 = self.y.0 + iy as f64 * hy;
                    out.push(Facet { cell: self.cell_index(ix, iy), side, a: [x, y0], b: [x, y0 + hy] });
                }
            }
        }
        Ok(out)
    }

    /// Total measure of the facets carrying `marker` (1 per point in 1D).
    pub fn boundary_measure(&self, marker: &str) -> Result<f64> {
        let f = self.facets(marker)?;
        Ok(if self.dim == 1 { f.len() as f64 } else { f.iter().map(Facet::measure).sum() })
    }

    /// Diameter of a cell: its length in 1D, its diagonal in 2D.
    pub fn cell_diameter(&self) -> f64 {
        let (hx, hy) = self.cell_size();
        if self.dim() == 1 {
            hx
        } else {
            hx.hypot(hy)
        }
    }

    /// Size of the cells adjacent to `marker`, measured normal to it.
    pub fn normal_cell_size(&self, marker: &str) -> Result<f64> {
        let (hx, hy) = self.cell_size();
        Ok(match self.side_of(marker)? {
            Side::Left | Side::Right => hx,
            Side::Bottom | Side::Top => hy,
        })
    }
}

/// Pairs each facet of `a` on `marker_a` with the facet of `b` on `marker_b`
/// occupying the same place.
pub fn match_interface(a: &SpatialMesh, marker_a: &str, b: &SpatialMesh, marker_b: &str) -> Result<Vec<(Facet, Facet)>> {
    if a.dim() != b.dim() {
        return Err(Error::NonConformingInterface("meshes differ in dimension".into()));
    }
    let fa = a.facets(marker_a)?;
    let fb = b.facets(marker_b)?;
    if fa.len() != fb.len() {
        return Err(Error::NonConformingInterface(format!("{} facets vs {}", fa.len(), fb.len())));
    }
    let scale = a.extents().iter().chain(b.extents().iter()).fold(1.0f64, |m, (l, r)| m.max(l.abs()).max(r.abs()));
    let tol = 1e-10 * scale;
    let same = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).abs() <= tol && (p[1] - q[1]).abs() <= tol;
    let mut out = Vec::with_capacity(fa.len());
    for f in fa {
        let g = fb
            .iter()
            .find(|g| (same(f.a, g.a) && same(f.b, g.b)) || (same(f.a, g.b) && same(f.b, g.a)))
            .ok_or_else(|| Error::NonConformingInterface(format!("no partner for facet at {:?}", f.midpoint())))?;
        out.push((f, *g));
    }
    Ok(out)
}
