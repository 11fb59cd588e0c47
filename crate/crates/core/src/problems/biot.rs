//! Quasi-static Biot poroelasticity on Mandel's configuration.
//!
//! Fields are `[u, p]`: displacement (vector Q2, temporal group 0) and
//! pressure (scalar Q1, temporal group 1) on one mesh.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::slab_system::{FieldDef, LoadTerm, ProblemSpec, SourceQuadrature, TemporalProfile, TermSpec};
use crate::spatial_fem::{
    assemble_boundary_functional, assemble_operator, assemble_traction_vector, build_mesh, FunctionSpace, MeshSpec,
    Operator,
};
use crate::temporal_mesh::{DgOrder, TemporalKind};

pub const U: usize = 0;
pub const P: usize = 1;

/// Mandel's problem runs on `(0, T)` with this `T` in seconds.
pub const MANDEL_END_TIME: f64 = 5.0e6;
pub const MANDEL_REFERENCE_QOI: f64 = 8.718831e13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiotParams {
    /// Biot modulus
    pub m: f64,
    pub alpha: f64,
    /// Fluid viscosity
    pub nu: f64,
    /// Permeability
    pub k: f64,
    pub rho: f64,
    /// Traction magnitude on the top boundary
    pub traction: f64,
    pub mu: f64,
    pub lambda: f64,
}

impl BiotParams {
    pub fn mandel() -> Self {
        Self { m: 1.75e7, alpha: 1.0, nu: 1e-3, k: 1e-13, rho: 1.0, traction: 1e7, mu: 1e8, lambda: 2.0e8 / 3.0 }
    }

    pub fn c(&self) -> f64 {
        1.0 / self.m
    }

    pub fn mobility(&self) -> f64 {
        self.k / self.nu
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.m) || !pos(self.nu) || !pos(self.k) || !pos(self.mu) {
            return Err(Error::Assembly(format!("invalid Biot parameters {self:?}")));
        }
        Ok(())
    }
}

/// Spatial operators named as in the hand-derived Mandel time step.
#[derive(Debug, Clone)]
pub struct BiotMatrices {
    /// `(σ(u), ∇φ^u)`
    pub sigma: Arc<CsrMatrix>,
    /// `-α(pI, ∇φ^u) + α⟨pn, φ^u⟩_top`
    pub b_up: Arc<CsrMatrix>,
    /// `α(∇·u, φ^p)`
    pub b_pu: Arc<CsrMatrix>,
    /// `c(p, φ^p)`
    pub mass_p: Arc<CsrMatrix>,
    /// `K/ν (∇p, ∇φ^p)`
    pub stiffness_p: Arc<CsrMatrix>,
    /// `⟨-t̄ e_y, φ^u⟩_top`
    pub traction: Arc<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct BiotSetup {
    pub params: BiotParams,
    pub u_space: FunctionSpace,
    pub p_space: FunctionSpace,
    pub matrices: BiotMatrices,
    pub problem: ProblemSpec,
}

impl BiotMatrices {
    pub fn assemble(params: &BiotParams, u: &FunctionSpace, p: &FunctionSpace) -> Result<Self> {
        let sigma = assemble_operator(u, u, &Operator::Elasticity { mu: params.mu, lambda: params.lambda })?;
        let b_up = assemble_operator(
            u,
            p,
            &Operator::PressureGradientCoupling { alpha: params.alpha, boundary: Some("top".into()) },
        )?;
        let b_pu = assemble_operator(p, u, &Operator::DivergenceCoupling { alpha: params.alpha })?;
        let mass_p = assemble_operator(p, p, &Operator::Mass)?.scaled(params.c());
        let stiffness_p = assemble_operator(p, p, &Operator::Stiffness)?.scaled(params.mobility());
        let traction = assemble_traction_vector(u, "top", [0.0, -params.traction])?;
        Ok(Self {
            sigma: Arc::new(sigma),
            b_up: Arc::new(b_up),
            b_pu: Arc::new(b_pu),
            mass_p: Arc::new(mass_p),
            stiffness_p: Arc::new(stiffness_p),
            traction: Arc::new(traction),
        })
    }
}

/// Every bilinear term of the Biot weak form.
pub fn biot_terms(m: &BiotMatrices) -> Vec<TermSpec> {
    use TemporalKind::*;
    let t = |row, col, kind, mat: &Arc<CsrMatrix>| TermSpec::new(row, col, kind, mat.clone(), 1.0);
    vec![
        t(U, U, Mass, &m.sigma),
        t(P, P, DtMass, &m.mass_p),
        t(P, P, JumpPlusInitial, &m.mass_p),
        t(P, P, Mass, &m.stiffness_p),
        t(U, P, Mass, &m.b_up),
        t(P, U, DtMass, &m.b_pu),
        t(P, U, JumpPlusInitial, &m.b_pu),
    ]
}

/// Dirichlet DoFs of Mandel's problem: `(u, p)`.
pub fn mandel_dirichlet(u: &FunctionSpace, p: &FunctionSpace) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut du = u.boundary_dofs("bottom", Some(1))?;
    du.extend(u.boundary_dofs("left", Some(0))?);
    let dp = p.boundary_dofs("right", None)?;
    Ok((du, dp))
}

impl BiotSetup {
    pub fn new(params: BiotParams, nx: usize, ny: usize, order: DgOrder) -> Result<Self> {
        params.validate()?;
        let mesh = build_mesh(&MeshSpec::rectangle((0.0, 100.0), (0.0, 20.0), nx, ny))?;
        let u_space = FunctionSpace::vector(mesh.clone(), 2)?;
        let p_space = FunctionSpace::scalar(mesh, 1)?;
        let matrices = BiotMatrices::assemble(&params, &u_space, &p_space)?;
        let (du, dp) = mandel_dirichlet(&u_space, &p_space)?;
        let (nu, np) = (u_space.n_dofs(), p_space.n_dofs());
        let problem = ProblemSpec {
            fields: vec![FieldDef::new("u", 0, nu).with_dirichlet(du), FieldDef::new("p", 1, np).with_dirichlet(dp)],
            terms: biot_terms(&matrices),
            loads: vec![LoadTerm { field: U, profile: TemporalProfile::constant(1.0), vector: matrices.traction.clone() }],
            initial: vec![vec![0.0; nu], vec![0.0; np]],
            order,
            source_quadrature: SourceQuadrature::Gauss,
        };
        problem.validate()?;
        Ok(Self { params, u_space, p_space, matrices, problem })
    }

    /// The functional `p ↦ ∫_{Γ_bottom} p` as a coefficient vector.
    pub fn bottom_functional(&self) -> Result<Vec<f64>> {
        assemble_boundary_functional(&self.p_space, "bottom")
    }
}

/// Mandel's problem with dG(0) in time on the 16×16 mesh.
pub fn mandel_problem() -> Result<BiotSetup> {
    BiotSetup::new(BiotParams::mandel(), 16, 16, DgOrder::Dg0)
}

/// Hand-derived dG(0) system for one displacement element and two pressure
/// elements on `(0, k)`, unknowns `[u_1, p_1, p_2]`:
///
/// ```text
/// [ kΣ     k/2 B^up   k/2 B^up ] [u_1]   [ k F              ]
/// [ B^pu   k/2 K + M  0        ] [p_1] = [ B^pu u_0 + M p_0 ]
/// [ 0      -M         k/2 K + M] [p_2]   [ 0                ]
/// ```
///
/// Dirichlet rows and columns are replaced by the identity, as in the slab assembler.
pub fn hand_derived_mandel_system(setup: &BiotSetup, k: f64, u0: &[f64], p0: &[f64]) -> (CsrMatrix, Vec<f64>) {
    let m = &setup.matrices;
    let nu = setup.u_space.n_dofs();
    let np = setup.p_space.n_dofs();
    let n = nu + 2 * np;
    let (o_u, o_p1, o_p2) = (0, nu, nu + np);
    let mut tb = TripletBuilder::new(n, n);
    tb.add_block(o_u, o_u, k, &m.sigma);
    tb.add_block(o_u, o_p1, k / 2.0, &m.b_up);
    tb.add_block(o_u, o_p2, k / 2.0, &m.b_up);
    tb.add_block(o_p1, o_u, 1.0, &m.b_pu);
    tb.add_block(o_p1, o_p1, k / 2.0, &m.stiffness_p);
    tb.add_block(o_p1, o_p1, 1.0, &m.mass_p);
    tb.add_block(o_p2, o_p1, -1.0, &m.mass_p);
    tb.add_block(o_p2, o_p2, k / 2.0, &m.stiffness_p);
    tb.add_block(o_p2, o_p2, 1.0, &m.mass_p);

    let mut rhs = vec![0.0; n];
    for (i, f) in m.traction.iter().enumerate() {
        rhs[o_u + i] = k * f;
    }
    let bu = m.b_pu.mul_vec(u0);
    let mp = m.mass_p.mul_vec(p0);
    for i in 0..np {
        rhs[o_p1 + i] = bu[i] + mp[i];
    }

    let du = &setup.problem.fields[U].dirichlet;
    let dp = &setup.problem.fields[P].dirichlet;
    let mut fixed = vec![false; n];
    for &d in du {
        fixed[o_u + d] = true;
    }
    for &d in dp {
        fixed[o_p1 + d] = true;
        fixed[o_p2 + d] = true;
    }
    tb.retain(|&(i, j, _)| !fixed[i] && !fixed[j]);
    for (i, &f) in fixed.iter().enumerate() {
        if f {
            tb.push(i, i, 1.0);
            rhs[i] = 0.0;
        }
    }
    (tb.build(), rhs)
}
