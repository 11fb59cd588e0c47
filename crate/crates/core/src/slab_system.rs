//! Monolithic slab assembly and time marching.
//!
//! A problem is a declarative list of weak-form terms, each a temporal kind
//! times a spatial matrix, between two fields. Fields belong to one of the two
//! temporal groups of a [`TemporalHierarchy`]. Terms within a group are
//! integrated on that group's sub-elements; terms between groups are integrated
//! on the fine sub-elements and contracted with the restriction matrices before
//! they are scattered into the slab matrix.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{BlockLayout, CsrMatrix, SparseLu, TripletBuilder};
use crate::quadrature::GaussLegendre;
use crate::temporal_mesh::{
    restriction_matrix, temporal_matrix, DgOrder, SlabGeometry, TemporalBasis, TemporalHierarchy, TemporalKind,
    TraceSide,
};

/// One unknown of the coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDef {
    pub name: String,
    /// Temporal group (0 or 1) whose mesh the field lives on.
    pub group: usize,
    pub space_dofs: usize,
    /// Spatial DoFs carrying homogeneous Dirichlet data.
    pub dirichlet: Vec<usize>,
}

impl FieldDef {
    pub fn new(name: &str, group: usize, space_dofs: usize) -> Self {
        Self { name: name.to_string(), group, space_dofs, dirichlet: Vec::new() }
    }

    pub fn with_dirichlet(mut self, mut dofs: Vec<usize>) -> Self {
        dofs.sort_unstable();
        dofs.dedup();
        self.dirichlet = dofs;
        self
    }
}

/// `coeff * (temporal kind ⊗ matrix)` with test functions of field `row` and
/// trial functions of field `col`.
#[derive(Debug, Clone)]
pub struct TermSpec {
    pub row: usize,
    pub col: usize,
    pub kind: TemporalKind,
    pub matrix: Arc<CsrMatrix>,
    pub coeff: f64,
}

impl TermSpec {
    pub fn new(row: usize, col: usize, kind: TemporalKind, matrix: Arc<CsrMatrix>, coeff: f64) -> Self {
        Self { row, col, kind, matrix, coeff }
    }
}

/// Scalar function of time with known points of non-smoothness.
#[derive(Clone)]
pub struct TemporalProfile {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    breakpoints: Vec<f64>,
}

impl std::fmt::Debug for TemporalProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TemporalProfile").field("breakpoints", &self.breakpoints).finish_non_exhaustive()
    }
}

impl TemporalProfile {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, breakpoints: Vec<f64>) -> Self {
        Self { f: Arc::new(f), breakpoints }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, Vec::new())
    }

    /// `t^k`
    pub fn power(k: i32) -> Self {
        Self::new(move |t| t.powi(k), Vec::new())
    }

    /// Indicator of `t <= cutoff`.
    pub fn until(cutoff: f64) -> Self {
        Self::new(move |t| if t <= cutoff { 1.0 } else { 0.0 }, vec![cutoff])
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

/// Right-hand side contribution `profile(t) * vector` tested with `field`.
#[derive(Debug, Clone)]
pub struct LoadTerm {
    pub field: usize,
    pub profile: TemporalProfile,
    pub vector: Arc<Vec<f64>>,
}

/// How time integrals of loads against test functions are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceQuadrature {
    /// Gauss quadrature per sub-element, split at profile breakpoints.
    #[default]
    Gauss,
    /// `k_e * f(t_e^right) * phi(t_e^right)`: the backward Euler convention.
    RightEndpoint,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub fields: Vec<FieldDef>,
    pub terms: Vec<TermSpec>,
    pub loads: Vec<LoadTerm>,
    /// Spatial coefficient vectors at `t = 0`, one per field.
    pub initial: Vec<Vec<f64>>,
    pub order: DgOrder,
    pub source_quadrature: SourceQuadrature,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        for (i, f) in self.fields.iter().enumerate() {
            if f.group > 1 {
                return Err(Error::Assembly(format!("field {} has group {}", f.name, f.group)));
            }
            if f.dirichlet.last().is_some_and(|&d| d >= f.space_dofs) {
                return Err(Error::Assembly(format!("Dirichlet DoF outside field {}", f.name)));
            }
            match self.initial.get(i) {
                None => return Err(Error::Assembly(format!("missing initial trace for field {}", f.name))),
                Some(v) if v.len() != f.space_dofs => {
                    return Err(Error::DimensionMismatch(format!(
                        "initial trace of {} has {} entries, expected {}",
                        f.name,
                        v.len(),
                        f.space_dofs
                    )))
                }
                _ => {}
            }
        }
        for t in &self.terms {
            let (r, c) = (self.field(t.row)?, self.field(t.col)?);
            if t.matrix.shape() != (r.space_dofs, c.space_dofs) {
                return Err(Error::DimensionMismatch(format!(
                    "term {} <- {} has a {:?} matrix, expected {:?}",
                    r.name,
                    c.name,
                    t.matrix.shape(),
                    (r.space_dofs, c.space_dofs)
                )));
            }
        }
        for l in &self.loads {
            let f = self.field(l.field)?;
            if l.vector.len() != f.space_dofs {
                return Err(Error::DimensionMismatch(format!("load on {} has wrong length", f.name)));
            }
        }
        if self.source_quadrature == SourceQuadrature::RightEndpoint && self.order != DgOrder::Dg0 {
            return Err(Error::Assembly("right-endpoint source quadrature is a dG(0) convention".into()));
        }
        Ok(())
    }

    fn field(&self, i: usize) -> Result<&FieldDef> {
        self.fields.get(i).ok_or_else(|| Error::Assembly(format!("term references unknown field {i}")))
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }
}

/// Temporal bases of one slab and the restriction of each group to the fine mesh.
#[derive(Debug, Clone)]
pub struct SlabBases {
    pub groups: [TemporalBasis; 2],
    pub fine: TemporalBasis,
    pub restriction: [DMatrix<f64>; 2],
}

impl SlabBases {
    pub fn new(order: DgOrder, slab: &SlabGeometry) -> Result<Self> {
        let g0 = TemporalBasis::new(order, slab.field_elements[0].clone())?;
        let g1 = TemporalBasis::new(order, slab.field_elements[1].clone())?;
        let fine = TemporalBasis::new(order, slab.fine_elements.clone())?;
        let r0 = restriction_matrix(&g0, &fine)?.into_inner();
        let r1 = restriction_matrix(&g1, &fine)?.into_inner();
        Ok(Self { groups: [g0, g1], fine, restriction: [r0, r1] })
    }

    /// Temporal matrix between test group `row` and trial group `col`.
    pub fn coupling(&self, row: usize, col: usize, kind: TemporalKind) -> Result<DMatrix<f64>> {
        if row == col {
            temporal_matrix(&self.groups[row], &self.groups[col], kind)
        } else {
            let fine = temporal_matrix(&self.fine, &self.fine, kind)?;
            Ok(&self.restriction[row] * fine * self.restriction[col].transpose())
        }
    }
}

#[derive(Debug, Clone)]
pub struct SlabSystem {
    pub layout: BlockLayout,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

pub fn slab_layout(problem: &ProblemSpec, bases: &SlabBases) -> BlockLayout {
    let sizes: Vec<(usize, usize)> =
        problem.fields.iter().map(|f| (bases.groups[f.group].dof_count(), f.space_dofs)).collect();
    BlockLayout::new(&sizes)
}

fn constrained_mask(problem: &ProblemSpec, layout: &BlockLayout) -> Vec<bool> {
    let mut mask = vec![false; layout.total()];
    for (fi, f) in problem.fields.iter().enumerate() {
        for a in 0..layout.block(fi).time_dofs {
            for &d in &f.dirichlet {
                mask[layout.index(fi, a, d)] = true;
            }
        }
    }
    mask
}

/// Slab matrix with Dirichlet rows and columns replaced by the identity.
pub fn assemble_matrix(problem: &ProblemSpec, bases: &SlabBases) -> Result<(BlockLayout, CsrMatrix)> {
    let layout = slab_layout(problem, bases);
    let mask = constrained_mask(problem, &layout);
    let n = layout.total();
    let mut tb = TripletBuilder::new(n, n);
    for term in &problem.terms {
        if term.coeff == 0.0 {
            continue;
        }
        let (rf, cf) = (&problem.fields[term.row], &problem.fields[term.col]);
        let t = bases.coupling(rf.group, cf.group, term.kind)?;
        let (r0, c0) = (layout.field_offset(term.row), layout.field_offset(term.col));
        for a in 0..t.nrows() {
            for b in 0..t.ncols() {
                let s = term.coeff * t[(a, b)];
                if s == 0.0 {
                    continue;
                }
                let ro = r0 + a * rf.space_dofs;
                let co = c0 + b * cf.space_dofs;
                for (i, j, v) in term.matrix.iter() {
                    if !mask[ro + i] && !mask[co + j] {
                        tb.push(ro + i, co + j, s * v);
                    }
                }
            }
        }
    }
    for (g, &c) in mask.iter().enumerate() {
        if c {
            tb.push(g, g, 1.0);
        }
    }
    Ok((layout, tb.build()))
}

fn split_points(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let tol = 1e-12 * (b - a);
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&t| t > a + tol && t < b - tol));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts
}

/// `int_slab profile(t) phi_a(t) dt` for every temporal DoF `a` of `basis`.
pub fn load_weights(basis: &TemporalBasis, profile: &TemporalProfile, rule: SourceQuadrature) -> Vec<f64> {
    let mut w = vec![0.0; basis.dof_count()];
    let quad = GaussLegendre::new(6);
    for (e, &(a, b)) in basis.elements().iter().enumerate() {
        match rule {
            SourceQuadrature::Gauss => {
                let pts = split_points(a, b, profile.breakpoints());
                for win in pts.windows(2) {
                    for (t, q) in quad.mapped(win[0], win[1]) {
                        let f = profile.eval(t);
                        for (dof, phi) in basis.values_in_element(e, t) {
                            w[dof] += q * f * phi;
                        }
                    }
                }
            }
            SourceQuadrature::RightEndpoint => {
                let f = profile.eval(b);
                for (dof, phi) in basis.values_in_element(e, b) {
                    w[dof] += (b - a) * f * phi;
                }
            }
        }
    }
    w
}

/// Right-hand side: loads plus the previous slab's traces entering through the
/// jump terms. Dirichlet entries are zero.
pub fn assemble_rhs(
    problem: &ProblemSpec,
    bases: &SlabBases,
    layout: &BlockLayout,
    traces: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if traces.len() != problem.fields.len() {
        return Err(Error::Assembly(format!("{} traces for {} fields", traces.len(), problem.fields.len())));
    }
    let mut rhs = vec![0.0; layout.total()];
    for load in &problem.loads {
        let f = &problem.fields[load.field];
        let w = load_weights(&bases.groups[f.group], &load.profile, problem.source_quadrature);
        for (a, wa) in w.iter().enumerate() {
            if *wa == 0.0 {
                continue;
            }
            let o = layout.index(load.field, a, 0);
            for (i, v) in load.vector.iter().enumerate() {
                rhs[o + i] += wa * v;
            }
        }
    }
    for term in &problem.terms {
        if term.kind != TemporalKind::JumpPlusInitial || term.coeff == 0.0 {
            continue;
        }
        let trace = &traces[term.col];
        if trace.iter().all(|v| *v == 0.0) {
            continue;
        }
        let rf = &problem.fields[term.row];
        let st = term.matrix.mul_vec(trace);
        let start = bases.groups[rf.group].start_trace_weights();
        for (a, phi) in start.iter().enumerate() {
            if *phi == 0.0 {
                continue;
            }
            let o = layout.index(term.row, a, 0);
            for (i, v) in st.iter().enumerate() {
                rhs[o + i] += term.coeff * phi * v;
            }
        }
    }
    for (fi, f) in problem.fields.iter().enumerate() {
        for a in 0..layout.block(fi).time_dofs {
            for &d in &f.dirichlet {
                rhs[layout.index(fi, a, d)] = 0.0;
            }
        }
    }
    Ok(rhs)
}

pub fn assemble_slab(problem: &ProblemSpec, slab: &SlabGeometry, traces: &[Vec<f64>]) -> Result<SlabSystem> {
    problem.validate()?;
    let bases = SlabBases::new(problem.order, slab)?;
    let (layout, matrix) = assemble_matrix(problem, &bases)?;
    let rhs = assemble_rhs(problem, &bases, &layout, traces)?;
    Ok(SlabSystem { layout, matrix, rhs })
}

/// Coefficients of all fields on one slab.
#[derive(Debug, Clone)]
pub struct SlabSolution {
    pub slab: SlabGeometry,
    pub layout: BlockLayout,
    pub coeffs: Vec<f64>,
    bases: Arc<SlabBases>,
    groups: Vec<usize>,
}

impl SlabSolution {
    pub fn new(slab: SlabGeometry, layout: BlockLayout, coeffs: Vec<f64>, bases: Arc<SlabBases>, groups: Vec<usize>) -> Self {
        Self { slab, layout, coeffs, bases, groups }
    }

    pub fn n_fields(&self) -> usize {
        self.groups.len()
    }

    pub fn basis(&self, field: usize) -> &TemporalBasis {
        &self.bases.groups[self.groups[field]]
    }

    pub fn bases(&self) -> &SlabBases {
        &self.bases
    }

    /// Spatial coefficients attached to temporal DoF `a` of `field`.
    pub fn time_dof(&self, field: usize, a: usize) -> &[f64] {
        let s = self.layout.block(field).space_dofs;
        let o = self.layout.index(field, a, 0);
        &self.coeffs[o..o + s]
    }

    fn combine(&self, field: usize, weights: impl IntoIterator<Item = (usize, f64)>) -> Vec<f64> {
        let mut out = vec![0.0; self.layout.block(field).space_dofs];
        for (a, w) in weights {
            if w != 0.0 {
                out.iter_mut().zip(self.time_dof(field, a)).for_each(|(o, v)| *o += w * v);
            }
        }
        out
    }

    /// Spatial coefficients of `field` at time `t` inside sub-element `e` of its group.
    pub fn eval_in_element(&self, field: usize, e: usize, t: f64) -> Vec<f64> {
        let w = self.basis(field).values_in_element(e, t);
        self.combine(field, w)
    }

    pub fn eval(&self, field: usize, t: f64, side: TraceSide) -> Vec<f64> {
        let w = self.basis(field).values_at(t, side);
        self.combine(field, w.into_iter().enumerate())
    }

    /// Left trace at the slab end.
    pub fn end_trace(&self, field: usize) -> Vec<f64> {
        let w = self.basis(field).end_trace_weights();
        self.combine(field, w.into_iter().enumerate())
    }
}

pub fn solve_slab(problem: &ProblemSpec, slab: &SlabGeometry, traces: &[Vec<f64>]) -> Result<SlabSolution> {
    let bases = Arc::new(SlabBases::new(problem.order, slab)?);
    let sys = assemble_slab(problem, slab, traces)?;
    let coeffs = SparseLu::factor(&sys.matrix)
        .and_then(|lu| lu.solve(&sys.rhs))
        .map_err(|e| e.on_slab(slab.index))?;
    let groups = problem.fields.iter().map(|f| f.group).collect();
    Ok(SlabSolution::new(slab.clone(), sys.layout, coeffs, bases, groups))
}

/// Receives every slab solution during [`march`].
pub trait Observer {
    fn observe(&mut self, solution: &SlabSolution) -> Result<()>;
}

impl<F: FnMut(&SlabSolution) -> Result<()>> Observer for F {
    fn observe(&mut self, solution: &SlabSolution) -> Result<()> {
        self(solution)
    }
}

#[derive(Debug, Clone)]
pub struct MarchSummary {
    pub final_traces: Vec<Vec<f64>>,
    pub slabs: usize,
    pub factorizations: usize,
}

/// Solves all slabs in order, feeding each slab's end traces to the next.
/// Slabs of identical shape reuse one factorization.
pub fn march(problem: &ProblemSpec, hierarchy: &TemporalHierarchy, observers: &mut [&mut dyn Observer]) -> Result<MarchSummary> {
    problem.validate()?;
    let groups: Vec<usize> = problem.fields.iter().map(|f| f.group).collect();
    let mut traces = problem.initial.clone();
    let mut cache: Option<(SlabGeometry, Arc<SlabBases>, BlockLayout, SparseLu)> = None;
    let mut factorizations = 0;
    for m in 0..hierarchy.n_slabs() {
        let slab = hierarchy.slab(m);
        let reuse = cache.as_ref().is_some_and(|(g, ..)| g.same_shape(&slab));
        let bases = Arc::new(SlabBases::new(problem.order, &slab).map_err(|e| e.on_slab(m))?);
        if !reuse {
            let (layout, matrix) = assemble_matrix(problem, &bases).map_err(|e| e.on_slab(m))?;
            let lu = SparseLu::factor(&matrix).map_err(|e| e.on_slab(m))?;
            factorizations += 1;
            cache = Some((slab.clone(), bases.clone(), layout, lu));
        }
        let (_, _, layout, lu) = cache.as_ref().unwrap();
        let rhs = assemble_rhs(problem, &bases, layout, &traces).map_err(|e| e.on_slab(m))?;
        let coeffs = lu.solve(&rhs).map_err(|e| e.on_slab(m))?;
        let sol = SlabSolution::new(slab, layout.clone(), coeffs, bases, groups.clone());
        for obs in observers.iter_mut() {
            obs.observe(&sol).map_err(|e| e.on_slab(m))?;
        }
        traces = (0..problem.fields.len()).map(|f| sol.end_trace(f)).collect();
    }
    Ok(MarchSummary { final_traces: traces, slabs: hierarchy.n_slabs(), factorizations })
}
