//! Temporal meshes, their per-field hierarchy, discontinuous Galerkin bases and
//! the purely temporal element matrices.
//!
//! A run is organised around a uniform coarse mesh. Each of the two field groups
//! refines every coarse element into `ratio_i` equal sub-elements, and the fine
//! mesh is the union of both field meshes. Since ratios are powers of two, on every
//! coarse slab one of the field meshes *is* the fine mesh and the other is nested
//! in it, so coarse temporal basis functions can always be written exactly in the
//! fine basis through a [`RestrictionMatrix`].

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Relative tolerance used when comparing breakpoints.
const BREAKPOINT_RTOL: f64 = 1e-12;

/// A partition `0 = t_0 < t_1 < ... < t_M = T` of the time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMesh {
    breakpoints: Vec<f64>,
}

impl TemporalMesh {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidTemporalMesh("need at least two breakpoints".into()));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidTemporalMesh(format!(
                "first breakpoint must be 0, got {}",
                breakpoints[0]
            )));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidTemporalMesh(format!(
                "breakpoints not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Self { breakpoints })
    }

    pub fn uniform(t_end: f64, n: usize) -> Result<Self> {
        if !(t_end > 0.0) || n == 0 {
            return Err(Error::InvalidTemporalMesh(format!(
                "uniform mesh needs T > 0 and n >= 1 (T = {t_end}, n = {n})"
            )));
        }
        let mut bp: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        bp[n] = t_end;
        Self::new(bp)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn n_elements(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn end_time(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn element(&self, i: usize) -> (f64, f64) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    pub fn elements(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }

    /// Elements lying inside `[start, end]`.
    pub fn elements_within(&self, start: f64, end: f64) -> Vec<(f64, f64)> {
        let tol = BREAKPOINT_RTOL * self.end_time();
        self.elements()
            .filter(|&(a, b)| a >= start - tol && b <= end + tol)
            .collect()
    }

    fn contains_breakpoint(&self, t: f64) -> bool {
        let tol = BREAKPOINT_RTOL * self.end_time();
        let idx = self.breakpoints.partition_point(|&b| b < t - tol);
        idx < self.breakpoints.len() && (self.breakpoints[idx] - t).abs() <= tol
    }

    /// True when every breakpoint of `coarser` is also a breakpoint of `self`.
    pub fn refines(&self, coarser: &TemporalMesh) -> bool {
        coarser.breakpoints.iter().all(|&t| self.contains_breakpoint(t))
    }

    /// Union of the breakpoints of two meshes over the same interval.
    pub fn union(&self, other: &TemporalMesh) -> Result<TemporalMesh> {
        let tol = BREAKPOINT_RTOL * self.end_time();
        if (self.end_time() - other.end_time()).abs() > tol {
            return Err(Error::InvalidTemporalMesh("meshes cover different intervals".into()));
        }
        let mut all: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        all.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::with_capacity(all.len());
        for t in all {
            match merged.last() {
                Some(&last) if (t - last).abs() <= tol => {}
                _ => merged.push(t),
            }
        }
        TemporalMesh::new(merged)
    }
}

/// The field meshes and the fine mesh restricted to one coarse slab.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabGeometry {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub field_elements: [Vec<(f64, f64)>; 2],
    pub fine_elements: Vec<(f64, f64)>,
}

impl SlabGeometry {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    /// Sub-element counts `(n_1, n_2)` of both field groups.
    pub fn sub_counts(&self) -> (usize, usize) {
        (self.field_elements[0].len(), self.field_elements[1].len())
    }

    /// True when `other` has the same element lengths and layout, so the slab
    /// matrices coincide up to round-off.
    pub fn same_shape(&self, other: &SlabGeometry) -> bool {
        let scale = self.length().abs().max(other.length().abs());
        let tol = 1e-12 * scale;
        let same = |a: &[(f64, f64)], b: &[(f64, f64)]| {
            a.len() == b.len()
                && a.iter().zip(b).all(|(x, y)| ((x.1 - x.0) - (y.1 - y.0)).abs() <= tol)
        };
        same(&self.field_elements[0], &other.field_elements[0])
            && same(&self.field_elements[1], &other.field_elements[1])
            && same(&self.fine_elements, &other.fine_elements)
    }
}

/// Coarse mesh, the two field meshes and their common fine mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalHierarchy {
    coarse: TemporalMesh,
    field_meshes: [TemporalMesh; 2],
    fine: TemporalMesh,
    sub_counts: Vec<(usize, usize)>,
}

impl TemporalHierarchy {
    /// Uniform coarse mesh with `m_coarse` elements on `(0, t_end)`, where field
    /// group `i` splits every coarse element into `ratio_i` equal parts.
    pub fn build(t_end: f64, m_coarse: usize, ratio_1: usize, ratio_2: usize) -> Result<Self> {
        for r in [ratio_1, ratio_2] {
            if r == 0 || !r.is_power_of_two() {
                return Err(Error::NonPowerOfTwoRatio(r));
            }
        }
        let coarse = TemporalMesh::uniform(t_end, m_coarse)?;
        let refine = |ratio: usize| -> Result<TemporalMesh> {
            let mut bp = Vec::with_capacity(m_coarse * ratio + 1);
            for (a, b) in coarse.elements() {
                for j in 0..ratio {
                    bp.push(a + (b - a) * (j as f64 / ratio as f64));
                }
            }
            bp.push(t_end);
            TemporalMesh::new(bp)
        };
        let m1 = refine(ratio_1)?;
        let m2 = refine(ratio_2)?;
        Self::from_meshes(coarse, [m1, m2])
    }

    /// Validates an arbitrary pair of field meshes against a coarse mesh.
    pub fn from_meshes(coarse: TemporalMesh, field_meshes: [TemporalMesh; 2]) -> Result<Self> {
        for (i, m) in field_meshes.iter().enumerate() {
            if !m.refines(&coarse) {
                return Err(Error::NestingViolation(format!(
                    "field mesh {} does not refine the coarse mesh",
                    i + 1
                )));
            }
        }
        let fine = field_meshes[0].union(&field_meshes[1])?;
        let mut sub_counts = Vec::with_capacity(coarse.n_elements());
        for (a, b) in coarse.elements() {
            let e1 = field_meshes[0].elements_within(a, b);
            let e2 = field_meshes[1].elements_within(a, b);
            let nested = |outer: &[(f64, f64)], inner: &TemporalMesh| {
                outer.iter().all(|&(s, e)| inner.contains_breakpoint(s) && inner.contains_breakpoint(e))
            };
            if !(e1.len() == 1 || e2.len() == 1 || nested(&e1, &field_meshes[1]) || nested(&e2, &field_meshes[0])) {
                return Err(Error::NestingViolation(format!(
                    "field meshes are not hierarchical on slab ({a}, {b})"
                )));
            }
            sub_counts.push((e1.len(), e2.len()));
        }
        Ok(Self { coarse, field_meshes, fine, sub_counts })
    }

    pub fn coarse(&self) -> &TemporalMesh {
        &self.coarse
    }

    pub fn field_mesh(&self, group: usize) -> &TemporalMesh {
        &self.field_meshes[group]
    }

    pub fn fine(&self) -> &TemporalMesh {
        &self.fine
    }

    pub fn sub_counts(&self) -> &[(usize, usize)] {
        &self.sub_counts
    }

    pub fn n_slabs(&self) -> usize {
        self.coarse.n_elements()
    }

    pub fn end_time(&self) -> f64 {
        self.coarse.end_time()
    }

    pub fn slab(&self, index: usize) -> SlabGeometry {
        let (start, end) = self.coarse.element(index);
        SlabGeometry {
            index,
            start,
            end,
            field_elements: [
                self.field_meshes[0].elements_within(start, end),
                self.field_meshes[1].elements_within(start, end),
            ],
            fine_elements: self.fine.elements_within(start, end),
        }
    }
}

/// Polynomial degree of the discontinuous temporal discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DgOrder {
    Dg0,
    Dg1,
}

impl DgOrder {
    pub fn degree(self) -> usize {
        match self {
            DgOrder::Dg0 => 0,
            DgOrder::Dg1 => 1,
        }
    }

    pub fn dofs_per_element(self) -> usize {
        self.degree() + 1
    }
}

impl TryFrom<usize> for DgOrder {
    type Error = Error;

    fn try_from(r: usize) -> Result<Self> {
        match r {
            0 => Ok(DgOrder::Dg0),
            1 => Ok(DgOrder::Dg1),
            _ => Err(Error::UnsupportedOrder(r)),
        }
    }
}

/// Which one-sided limit to take at an element boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSide {
    /// Limit from below, `t^-`.
    Left,
    /// Limit from above, `t^+`.
    Right,
}

/// Piecewise polynomial dG(r) basis on a set of contiguous sub-elements.
///
/// dG(0) uses the indicator of each sub-element. dG(1) uses the two linear
/// Lagrange functions attached to the sub-element endpoints; DoF `2e` lives at
/// the left end of sub-element `e` and `2e + 1` at its right end.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalBasis {
    order: DgOrder,
    elements: Vec<(f64, f64)>,
}

impl TemporalBasis {
    pub fn new(order: DgOrder, elements: Vec<(f64, f64)>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidTemporalMesh("basis needs at least one element".into()));
        }
        let span = elements.last().unwrap().1 - elements[0].0;
        let tol = BREAKPOINT_RTOL * span.abs().max(elements.last().unwrap().1.abs());
        for (i, &(a, b)) in elements.iter().enumerate() {
            if !(b > a) {
                return Err(Error::InvalidTemporalMesh(format!("empty element ({a}, {b})")));
            }
            if i > 0 && (elements[i - 1].1 - a).abs() > tol {
                return Err(Error::InvalidTemporalMesh("sub-elements are not contiguous".into()));
            }
        }
        Ok(Self { order, elements })
    }

    pub fn order(&self) -> DgOrder {
        self.order
    }

    pub fn elements(&self) -> &[(f64, f64)] {
        &self.elements
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn dof_count(&self) -> usize {
        self.order.dofs_per_element() * self.elements.len()
    }

    pub fn start(&self) -> f64 {
        self.elements[0].0
    }

    pub fn end(&self) -> f64 {
        self.elements.last().unwrap().1
    }

    pub fn element_of(&self, dof: usize) -> usize {
        dof / self.order.dofs_per_element()
    }

    pub fn dofs_of_element(&self, e: usize) -> std::ops::Range<usize> {
        let n = self.order.dofs_per_element();
        e * n..(e + 1) * n
    }

    /// Element whose closure contains `t`, resolving shared endpoints by `side`.
    pub fn locate(&self, t: f64, side: TraceSide) -> Option<usize> {
        let n = self.elements.len();
        let (start, end) = (self.start(), self.end());
        match side {
            TraceSide::Right => {
                if t < start || t >= end {
                    return None;
                }
                Some(self.elements.partition_point(|&(_, b)| b <= t).min(n - 1))
            }
            TraceSide::Left => {
                if t <= start || t > end {
                    return None;
                }
                Some(self.elements.partition_point(|&(_, b)| b < t).min(n - 1))
            }
        }
    }

    /// Value of local shape function `local` of element `e` at `t` (polynomial
    /// extension, no support check).
    pub fn local_value(&self, e: usize, local: usize, t: f64) -> f64 {
        let (a, b) = self.elements[e];
        match self.order {
            DgOrder::Dg0 => 1.0,
            DgOrder::Dg1 => {
                let s = (t - a) / (b - a);
                if local == 0 { 1.0 - s } else { s }
            }
        }
    }

    pub fn local_derivative(&self, e: usize, local: usize) -> f64 {
        let (a, b) = self.elements[e];
        match self.order {
            DgOrder::Dg0 => 0.0,
            DgOrder::Dg1 => {
                if local == 0 { -1.0 / (b - a) } else { 1.0 / (b - a) }
            }
        }
    }

    pub fn value(&self, dof: usize, t: f64, side: TraceSide) -> f64 {
        let e = self.element_of(dof);
        match self.locate(t, side) {
            Some(found) if found == e => {
                self.local_value(e, dof - e * self.order.dofs_per_element(), t)
            }
            _ => 0.0,
        }
    }

    pub fn derivative(&self, dof: usize, t: f64, side: TraceSide) -> f64 {
        let e = self.element_of(dof);
        match self.locate(t, side) {
            Some(found) if found == e => {
                self.local_derivative(e, dof - e * self.order.dofs_per_element())
            }
            _ => 0.0,
        }
    }

    /// All basis function values at `t`.
    pub fn values_at(&self, t: f64, side: TraceSide) -> Vec<f64> {
        let mut v = vec![0.0; self.dof_count()];
        if let Some(e) = self.locate(t, side) {
            for (local, dof) in self.dofs_of_element(e).enumerate() {
                v[dof] = self.local_value(e, local, t);
            }
        }
        v
    }

    /// Values at `t` inside the known element `e` (avoids the search, and picks
    /// the element unambiguously at shared endpoints).
    pub fn values_in_element(&self, e: usize, t: f64) -> Vec<(usize, f64)> {
        self.dofs_of_element(e)
            .enumerate()
            .map(|(local, dof)| (dof, self.local_value(e, local, t)))
            .collect()
    }

    /// Nodal points used for interpolation: midpoints for dG(0), element
    /// endpoints for dG(1).
    pub fn nodes(&self) -> Vec<(usize, f64)> {
        let mut nodes = Vec::with_capacity(self.dof_count());
        for (e, &(a, b)) in self.elements.iter().enumerate() {
            match self.order {
                DgOrder::Dg0 => nodes.push((e, 0.5 * (a + b))),
                DgOrder::Dg1 => {
                    nodes.push((e, a));
                    nodes.push((e, b));
                }
            }
        }
        nodes
    }

    /// Weights `w` such that the trace at the slab end is `sum_i w_i U_i`.
    pub fn end_trace_weights(&self) -> Vec<f64> {
        self.values_at(self.end(), TraceSide::Left)
    }

    /// Weights such that the value at the slab start (from above) is `sum_i w_i U_i`.
    pub fn start_trace_weights(&self) -> Vec<f64> {
        self.values_at(self.start(), TraceSide::Right)
    }
}

/// dG(r) basis on `n_sub` equal sub-elements of `slab`.
pub fn dg_basis(slab: (f64, f64), n_sub: usize, r: usize) -> Result<TemporalBasis> {
    let order = DgOrder::try_from(r)?;
    if n_sub == 0 {
        return Err(Error::InvalidTemporalMesh("n_sub must be at least 1".into()));
    }
    let (a, b) = slab;
    let node = |j: usize| if j == n_sub { b } else { a + (b - a) * (j as f64 / n_sub as f64) };
    let elements = (0..n_sub).map(|j| (node(j), node(j + 1))).collect();
    TemporalBasis::new(order, elements)
}

/// Coefficients `r_{jl}` expressing coarse basis function `j` through fine basis
/// functions `l`: `phi_j^coarse = sum_l r_{jl} phi_l^fine`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionMatrix(DMatrix<f64>);

impl RestrictionMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_square() && self.0 == DMatrix::identity(self.0.nrows(), self.0.ncols())
    }
}

pub fn restriction_matrix(coarse: &TemporalBasis, fine: &TemporalBasis) -> Result<RestrictionMatrix> {
    if coarse.order != fine.order {
        return Err(Error::NestingViolation("bases have different orders".into()));
    }
    let span = (fine.end() - fine.start()).abs().max(fine.end().abs());
    let tol = BREAKPOINT_RTOL * span;
    if (coarse.start() - fine.start()).abs() > tol || (coarse.end() - fine.end()).abs() > tol {
        return Err(Error::NestingViolation("bases live on different slabs".into()));
    }
    // parent coarse element of each fine element
    let mut parent = Vec::with_capacity(fine.n_elements());
    for &(a, b) in &fine.elements {
        let p = coarse
            .elements
            .iter()
            .position(|&(ca, cb)| a >= ca - tol && b <= cb + tol)
            .ok_or_else(|| {
                Error::NestingViolation(format!("fine element ({a}, {b}) straddles a coarse breakpoint"))
            })?;
        parent.push(p);
    }
    let mut r = DMatrix::zeros(coarse.dof_count(), fine.dof_count());
    // nodal interpolation is exact: restricted to a fine element, every coarse
    // basis function is a polynomial of the same degree
    for (l, (fe, t)) in fine.nodes().into_iter().enumerate() {
        let ce = parent[fe];
        for (local, j) in coarse.dofs_of_element(ce).enumerate() {
            r[(j, l)] = coarse.local_value(ce, local, t);
        }
    }
    Ok(RestrictionMatrix(r))
}

/// Purely temporal bilinear forms appearing in the weak formulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemporalKind {
    /// `int phi_col phi_row dt`
    Mass,
    /// `int phi_col' phi_row dt`, summed over sub-elements
    DtMass,
    /// Jumps at interior sub-element nodes plus the initial right trace:
    /// `sum_m ([phi_col]_m, phi_row(t_m^+)) + phi_col(t_0^+) phi_row(t_0^+)`.
    /// The left trace from the previous slab belongs to the right-hand side.
    JumpPlusInitial,
}

pub fn temporal_matrix(row: &TemporalBasis, col: &TemporalBasis, kind: TemporalKind) -> Result<DMatrix<f64>> {
    if row.elements.len() != col.elements.len() {
        return Err(Error::Assembly("temporal bases have different sub-element meshes".into()));
    }
    let span = (row.end() - row.start()).abs().max(row.end().abs());
    let tol = BREAKPOINT_RTOL * span;
    if row
        .elements
        .iter()
        .zip(&col.elements)
        .any(|(x, y)| (x.0 - y.0).abs() > tol || (x.1 - y.1).abs() > tol)
    {
        return Err(Error::Assembly("temporal bases live on different slabs".into()));
    }
    let mut m = DMatrix::zeros(row.dof_count(), col.dof_count());
    match kind {
        TemporalKind::Mass | TemporalKind::DtMass => {
            let deg = row.order.degree() + col.order.degree();
            let quad = GaussLegendre::exact_for(deg.max(1));
            for (e, &(a, b)) in row.elements.iter().enumerate() {
                for (t, w) in quad.mapped(a, b) {
                    for (li, i) in row.dofs_of_element(e).enumerate() {
                        let phi_i = row.local_value(e, li, t);
                        for (lj, j) in col.dofs_of_element(e).enumerate() {
                            let phi_j = match kind {
                                TemporalKind::Mass => col.local_value(e, lj, t),
                                _ => col.local_derivative(e, lj),
                            };
                            m[(i, j)] += w * phi_j * phi_i;
                        }
                    }
                }
            }
        }
        TemporalKind::JumpPlusInitial => {
            for (e, &(a, _)) in row.elements.iter().enumerate() {
                let test = row.values_in_element(e, a);
                let plus = col.values_in_element(e, a);
                for &(i, vi) in &test {
                    for &(j, vj) in &plus {
                        m[(i, j)] += vi * vj;
                    }
                }
                if e > 0 {
                    let (_, prev_end) = col.elements[e - 1];
                    let minus = col.values_in_element(e - 1, prev_end);
                    for &(i, vi) in &test {
                        for &(j, vj) in &minus {
                            m[(i, j)] -= vi * vj;
                        }
                    }
                }
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_mat(actual: &DMatrix<f64>, expected: &[&[f64]], tol: f64) {
        assert_eq!(actual.nrows(), expected.len());
        for (i, row) in expected.iter().enumerate() {
            assert_eq!(actual.ncols(), row.len());
            for (j, &v) in row.iter().enumerate() {
                assert!((actual[(i, j)] - v).abs() <= tol, "({i},{j}): {} vs {v}", actual[(i, j)]);
            }
        }
    }

    #[test]
    fn hierarchy_one_to_four() {
        let h = TemporalHierarchy::build(4.0, 4, 1, 4).unwrap();
        assert_eq!(h.field_mesh(1).n_elements(), 16);
        assert!(h.field_mesh(1).elements().all(|(a, b)| ((b - a) - 0.25).abs() < 1e-15));
        assert_eq!(h.fine(), h.field_mesh(1));
        assert!(h.sub_counts().iter().all(|&c| c == (1, 4)));
    }

    #[test]
    fn hierarchy_single_rate() {
        let h = TemporalHierarchy::build(1.0, 50, 1, 1).unwrap();
        assert_eq!(h.coarse(), h.field_mesh(0));
        assert_eq!(h.coarse(), h.field_mesh(1));
        assert_eq!(h.coarse(), h.fine());
        assert_eq!(h.fine().n_elements(), 50);
    }

    #[test]
    fn hierarchy_two_and_four() {
        let h = TemporalHierarchy::build(8.0, 2, 2, 4).unwrap();
        // {0,2,4,6,8} united with {0,1,...,8}
        let expected: Vec<f64> = (0..=8).map(f64::from).collect();
        assert_eq!(h.fine().breakpoints(), expected.as_slice());
        assert!(h.fine().refines(h.field_mesh(0)));
        assert!(h.fine().refines(h.field_mesh(1)));
        let s = h.slab(1);
        assert_eq!(s.sub_counts(), (2, 4));
        assert_eq!(s.fine_elements.len(), 4);
        assert_eq!((s.start, s.end), (4.0, 8.0));
    }

    #[test]
    fn hierarchy_rejects_non_power_of_two() {
        assert_eq!(TemporalHierarchy::build(1.0, 4, 3, 1), Err(Error::NonPowerOfTwoRatio(3)));
        assert_eq!(TemporalHierarchy::build(1.0, 4, 1, 0), Err(Error::NonPowerOfTwoRatio(0)));
    }

    #[test]
    fn from_meshes_rejects_non_hierarchical_slab() {
        // {0,4,5,6,8} vs {0,2,4,8} on coarse {0,8}: neither refines the other
        let coarse = TemporalMesh::new(vec![0.0, 8.0]).unwrap();
        let m1 = TemporalMesh::new(vec![0.0, 4.0, 5.0, 6.0, 8.0]).unwrap();
        let m2 = TemporalMesh::new(vec![0.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(matches!(
            TemporalHierarchy::from_meshes(coarse, [m1.clone(), m2.clone()]),
            Err(Error::NestingViolation(_))
        ));
        // with the coarse mesh {0,4,8} every slab is hierarchical
        let coarse = TemporalMesh::new(vec![0.0, 4.0, 8.0]).unwrap();
        let h = TemporalHierarchy::from_meshes(coarse, [m1, m2]).unwrap();
        assert_eq!(h.fine().breakpoints(), &[0.0, 2.0, 4.0, 5.0, 6.0, 8.0]);
        assert_eq!(h.sub_counts(), &[(1, 2), (3, 1)]);
    }

    #[test]
    fn temporal_mesh_invariants() {
        assert!(TemporalMesh::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TemporalMesh::new(vec![0.5, 1.0]).is_err());
        assert!(TemporalMesh::uniform(1.0, 0).is_err());
        let m = TemporalMesh::uniform(3.0, 7).unwrap();
        assert_eq!(m.end_time(), 3.0);
        let total: f64 = m.elements().map(|(a, b)| b - a).sum();
        assert!((total - 3.0).abs() < 1e-14);
    }

    #[test]
    fn dg0_single_indicator() {
        let b = dg_basis((0.0, 0.3), 1, 0).unwrap();
        assert_eq!(b.dof_count(), 1);
        assert_eq!(b.value(0, 0.1, TraceSide::Right), 1.0);
        assert_eq!(b.value(0, 0.3, TraceSide::Right), 0.0);
        assert_eq!(b.value(0, 0.3, TraceSide::Left), 1.0);
    }

    #[test]
    fn dg1_two_sub_elements_hat_halves() {
        let b = dg_basis((1.0, 3.0), 2, 1).unwrap();
        assert_eq!(b.dof_count(), 4);
        // phi_1 falls from 1 to 0 on (1,2); phi_2 rises on (1,2); phi_3 falls on (2,3); phi_4 rises on (2,3)
        assert_eq!(b.value(0, 1.0, TraceSide::Right), 1.0);
        assert_eq!(b.value(1, 2.0, TraceSide::Left), 1.0);
        assert_eq!(b.value(1, 2.0, TraceSide::Right), 0.0);
        assert_eq!(b.value(2, 2.0, TraceSide::Right), 1.0);
        assert_eq!(b.value(3, 3.0, TraceSide::Left), 1.0);
        assert!((b.value(2, 2.5, TraceSide::Right) - 0.5).abs() < 1e-15);
        assert_eq!(b.value(0, 2.5, TraceSide::Right), 0.0);
    }

    #[test]
    fn unsupported_order() {
        assert_eq!(dg_basis((0.0, 1.0), 1, 2), Err(Error::UnsupportedOrder(2)));
    }

    #[test]
    fn restriction_dg1_one_to_two() {
        let c = dg_basis((0.0, 1.0), 1, 1).unwrap();
        let f = dg_basis((0.0, 1.0), 2, 1).unwrap();
        let r = restriction_matrix(&c, &f).unwrap();
        assert_mat(r.matrix(), &[&[1.0, 0.5, 0.5, 0.0], &[0.0, 0.5, 0.5, 1.0]], 1e-15);
    }

    #[test]
    fn restriction_dg0_two_fine() {
        let c = dg_basis((0.0, 2.0), 1, 0).unwrap();
        let f = dg_basis((0.0, 2.0), 2, 0).unwrap();
        let r = restriction_matrix(&c, &f).unwrap();
        assert_mat(r.matrix(), &[&[1.0, 1.0]], 0.0);
    }

    #[test]
    fn restriction_identity() {
        for r in 0..=1 {
            let b = dg_basis((0.0, 1.0), 4, r).unwrap();
            assert!(restriction_matrix(&b, &b).unwrap().is_identity());
        }
    }

    #[test]
    fn restriction_rejects_non_nested() {
        let c = TemporalBasis::new(DgOrder::Dg0, vec![(0.0, 0.4), (0.4, 1.0)]).unwrap();
        let f = dg_basis((0.0, 1.0), 2, 0).unwrap();
        assert!(matches!(restriction_matrix(&c, &f), Err(Error::NestingViolation(_))));
    }

    #[test]
    fn dg0_mass_and_jump_two_sub_elements() {
        let k = 0.7;
        let b = dg_basis((0.0, k), 2, 0).unwrap();
        let m = temporal_matrix(&b, &b, TemporalKind::Mass).unwrap();
        assert_mat(&m, &[&[k / 2.0, 0.0], &[0.0, k / 2.0]], 1e-15);
        let j = temporal_matrix(&b, &b, TemporalKind::JumpPlusInitial).unwrap();
        assert_mat(&j, &[&[1.0, 0.0], &[-1.0, 1.0]], 0.0);
        let d = temporal_matrix(&b, &b, TemporalKind::DtMass).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dg1_mass_single_element() {
        let (a, b) = (0.25, 1.75);
        let basis = dg_basis((a, b), 1, 1).unwrap();
        let m = temporal_matrix(&basis, &basis, TemporalKind::Mass).unwrap();
        let s = (b - a) / 6.0;
        assert_mat(&m, &[&[2.0 * s, s], &[s, 2.0 * s]], 1e-15);
    }

    #[test]
    fn dg1_dt_mass_and_jump_single_element() {
        let basis = dg_basis((0.0, 2.0), 1, 1).unwrap();
        let d = temporal_matrix(&basis, &basis, TemporalKind::DtMass).unwrap();
        // int phi_j' phi_i: phi_j' = -+1/2, int phi_i = 1
        assert_mat(&d, &[&[-0.5, 0.5], &[-0.5, 0.5]], 1e-15);
        let j = temporal_matrix(&basis, &basis, TemporalKind::JumpPlusInitial).unwrap();
        assert_mat(&j, &[&[1.0, 0.0], &[0.0, 0.0]], 0.0);
    }

    #[test]
    fn temporal_matrix_rejects_mismatched_meshes() {
        let a = dg_basis((0.0, 1.0), 2, 0).unwrap();
        let b = dg_basis((0.0, 1.0), 1, 0).unwrap();
        assert!(temporal_matrix(&a, &b, TemporalKind::Mass).is_err());
        let c = dg_basis((0.0, 2.0), 2, 0).unwrap();
        assert!(temporal_matrix(&a, &c, TemporalKind::Mass).is_err());
    }

    #[test]
    fn jump_vanishes_for_continuous_functions() {
        // a continuous piecewise-linear function expressed in the dG(1) basis
        let b = dg_basis((0.0, 1.0), 4, 1).unwrap();
        let f = |t: f64| 1.0 + 2.0 * t;
        let coeffs: Vec<f64> = b.nodes().iter().map(|&(_, t)| f(t)).collect();
        let j = temporal_matrix(&b, &b, TemporalKind::JumpPlusInitial).unwrap();
        let y = &j * nalgebra::DVector::from_vec(coeffs);
        // only the initial trace survives; it sits on the first test function
        assert!((y[0] - f(0.0)).abs() < 1e-14);
        assert!(y.iter().skip(1).all(|v| v.abs() < 1e-12));
    }

    fn random_times(seed: u64, n: usize, a: f64, b: f64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(a..b)).collect()
    }

    #[test]
    fn partition_of_unity() {
        for r in 0..=1 {
            for n_sub in [1, 2, 5] {
                let basis = dg_basis((0.3, 1.9), n_sub, r).unwrap();
                for t in random_times(7 + n_sub as u64, 10, 0.3, 1.9) {
                    let e = basis.locate(t, TraceSide::Right).unwrap();
                    let s: f64 = basis.values_in_element(e, t).iter().map(|&(_, v)| v).sum();
                    assert!((s - 1.0).abs() < 1e-13);
                    let full: f64 = basis.values_at(t, TraceSide::Right).iter().sum();
                    assert!((full - 1.0).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn restriction_reproduces_coarse_functions() {
        for r in 0..=1 {
            for ratio in [2, 4, 8] {
                let c = dg_basis((1.0, 2.5), 1, r).unwrap();
                let f = dg_basis((1.0, 2.5), ratio, r).unwrap();
                let rm = restriction_matrix(&c, &f).unwrap();
                let mut worst: f64 = 0.0;
                for t in random_times(ratio as u64, 50, 1.0, 2.5) {
                    let vc = c.values_at(t, TraceSide::Right);
                    let vf = f.values_at(t, TraceSide::Right);
                    for j in 0..c.dof_count() {
                        let s: f64 = (0..f.dof_count()).map(|l| rm.matrix()[(j, l)] * vf[l]).sum();
                        worst = worst.max((vc[j] - s).abs());
                    }
                }
                assert!(worst < 1e-13, "r={r} ratio={ratio}: {worst}");
            }
        }
    }

    #[test]
    fn mass_is_spd_and_dg0_diagonal() {
        let b0 = dg_basis((0.0, 1.0), 3, 0).unwrap();
        let m0 = temporal_matrix(&b0, &b0, TemporalKind::Mass).unwrap();
        assert!((m0 - DMatrix::from_diagonal_element(3, 3, 1.0 / 3.0)).amax() < 1e-15);
        let b1 = dg_basis((0.0, 1.0), 3, 1).unwrap();
        let m1 = temporal_matrix(&b1, &b1, TemporalKind::Mass).unwrap();
        assert!((&m1 - m1.transpose()).amax() < 1e-15);
        assert!(m1.clone().cholesky().is_some());
    }

    proptest! {
        #[test]
        fn coarse_mass_equals_restricted_fine_mass(r in 0usize..=1, log_ratio in 1u32..=3, a in -2.0f64..2.0, len in 0.01f64..3.0) {
            let ratio = 1usize << log_ratio;
            let c = dg_basis((a, a + len), 1, r).unwrap();
            let f = dg_basis((a, a + len), ratio, r).unwrap();
            let rm = restriction_matrix(&c, &f).unwrap().into_inner();
            let mc = temporal_matrix(&c, &c, TemporalKind::Mass).unwrap();
            let mf = temporal_matrix(&f, &f, TemporalKind::Mass).unwrap();
            let via_r = &rm * mf * rm.transpose();
            prop_assert!((mc - via_r).amax() < 1e-13 * len.max(1.0));
        }
    }
}
