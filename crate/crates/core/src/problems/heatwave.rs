//! Heat equation (fluid) coupled to a damped wave equation (solid) across an
//! interface, with a harmonic extension of the fluid displacement.
//!
//! Fields are `[u_f, v_f, u_s, v_s]`; the fluid pair lives on temporal group 0,
//! the solid pair on group 1. Interface conditions are imposed weakly with
//! penalty and one-sided normal-derivative terms.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::slab_system::{FieldDef, LoadTerm, ProblemSpec, SourceQuadrature, TemporalProfile, TermSpec};
use crate::spatial_fem::{
    assemble_load_vector, assemble_operator, build_mesh, FunctionSpace, MeshSpec, Operator, Side,
};
use crate::temporal_mesh::{DgOrder, TemporalKind};

pub const U_F: usize = 0;
pub const V_F: usize = 1;
pub const U_S: usize = 2;
pub const V_S: usize = 3;

pub const INTERFACE: &str = "interface";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatWaveParams {
    pub nu: f64,
    pub beta: [f64; 2],
    pub lambda: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Penalty length scale; `None` uses the diameter of the interface cells.
    pub h: Option<f64>,
}

impl HeatWaveParams {
    pub fn one_d() -> Self {
        Self { nu: 0.001, beta: [0.0, 0.0], lambda: 1000.0, delta: 0.0, gamma: 1000.0, h: None }
    }

    pub fn two_d() -> Self {
        Self { nu: 0.001, beta: [2.0, 0.0], lambda: 1000.0, delta: 0.1, gamma: 1000.0, h: None }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.nu) || !pos(self.lambda) || !pos(self.gamma) || !(self.delta >= 0.0) {
            return Err(Error::Assembly(format!("invalid heat-wave parameters {self:?}")));
        }
        Ok(())
    }
}

/// Fluid and solid spaces sharing the facet set [`INTERFACE`].
#[derive(Debug, Clone)]
pub struct HeatWaveSpaces {
    pub fluid: FunctionSpace,
    pub solid: FunctionSpace,
    /// Dirichlet markers of each subdomain; both fields of a subdomain share them.
    pub fluid_dirichlet: Vec<String>,
    pub solid_dirichlet: Vec<String>,
}

impl HeatWaveSpaces {
    /// `Ω_f = (0,2)` and `Ω_s = (2,4)`, Q1, Dirichlet at `x = 0`, Neumann at `x = 4`.
    pub fn interval(cells_fluid: usize, cells_solid: usize) -> Result<Self> {
        let f = build_mesh(&MeshSpec::interval(0.0, 2.0, cells_fluid).with_marker(Side::Right, INTERFACE))?;
        let s = build_mesh(&MeshSpec::interval(2.0, 4.0, cells_solid).with_marker(Side::Left, INTERFACE).with_subdomain(1))?;
        Ok(Self {
            fluid: FunctionSpace::scalar(f, 1)?,
            solid: FunctionSpace::scalar(s, 1)?,
            fluid_dirichlet: vec!["left".into()],
            solid_dirichlet: vec![],
        })
    }

    /// `Ω_f = (0,4)×(0,1)` and `Ω_s = (0,4)×(-1,0)`, Q1. Dirichlet on the fluid
    /// top and the solid sides.
    pub fn rectangle(nx: usize, ny: usize) -> Result<Self> {
        let f = build_mesh(&MeshSpec::rectangle((0.0, 4.0), (0.0, 1.0), nx, ny).with_marker(Side::Bottom, INTERFACE))?;
        let s = build_mesh(
            &MeshSpec::rectangle((0.0, 4.0), (-1.0, 0.0), nx, ny).with_marker(Side::Top, INTERFACE).with_subdomain(1),
        )?;
        Ok(Self {
            fluid: FunctionSpace::scalar(f, 1)?,
            solid: FunctionSpace::scalar(s, 1)?,
            fluid_dirichlet: vec!["top".into()],
            solid_dirichlet: vec!["left".into(), "right".into()],
        })
    }

    pub fn penalty_h(&self, params: &HeatWaveParams) -> f64 {
        params.h.unwrap_or_else(|| self.fluid.mesh().cell_diameter())
    }
}

/// Spatial matrices of the weak form.
#[derive(Debug, Clone)]
pub struct HeatWaveMatrices {
    pub mass_f: Arc<CsrMatrix>,
    pub stiffness_f: Arc<CsrMatrix>,
    pub convection_f: Arc<CsrMatrix>,
    /// `⟨∂_{n_f} u, φ⟩_Γ`, fluid rows and columns
    pub normal_ff: Arc<CsrMatrix>,
    /// `⟨u, φ⟩_Γ`, fluid rows and columns
    pub interface_ff: Arc<CsrMatrix>,
    /// `⟨u_s, φ_f⟩_Γ`
    pub interface_fs: Arc<CsrMatrix>,
    pub mass_s: Arc<CsrMatrix>,
    pub stiffness_s: Arc<CsrMatrix>,
    /// `⟨∂_{n_s} u, φ⟩_Γ`, solid rows and columns
    pub normal_ss: Arc<CsrMatrix>,
    /// `⟨∂_{n_f} v_f, φ_s⟩_Γ`
    pub normal_sf: Arc<CsrMatrix>,
}

impl HeatWaveMatrices {
    pub fn assemble(spaces: &HeatWaveSpaces, beta: [f64; 2]) -> Result<Self> {
        let (f, s) = (&spaces.fluid, &spaces.solid);
        let a = |r: &FunctionSpace, c: &FunctionSpace, op: Operator| assemble_operator(r, c, &op).map(Arc::new);
        let iface = || INTERFACE.to_string();
        Ok(Self {
            mass_f: a(f, f, Operator::Mass)?,
            stiffness_f: a(f, f, Operator::Stiffness)?,
            convection_f: a(f, f, Operator::Convection { beta })?,
            normal_ff: a(f, f, Operator::InterfaceNormalDerivative { marker: iface() })?,
            interface_ff: a(f, f, Operator::InterfaceMass { marker: iface() })?,
            interface_fs: a(f, s, Operator::InterfaceMass { marker: iface() })?,
            mass_s: a(s, s, Operator::Mass)?,
            stiffness_s: a(s, s, Operator::Stiffness)?,
            normal_ss: a(s, s, Operator::InterfaceNormalDerivative { marker: iface() })?,
            normal_sf: a(s, f, Operator::InterfaceNormalDerivative { marker: iface() })?,
        })
    }
}

/// Every bilinear term of the heat-wave weak form.
pub fn heatwave_terms(params: &HeatWaveParams, m: &HeatWaveMatrices, h: f64) -> Vec<TermSpec> {
    use TemporalKind::*;
    let HeatWaveParams { nu, lambda, delta, gamma, .. } = *params;
    let t = |row, col, kind, mat: &Arc<CsrMatrix>, c| TermSpec::new(row, col, kind, mat.clone(), c);
    vec![
        // fluid: heat equation for v_f
        t(V_F, V_F, DtMass, &m.mass_f, 1.0),
        t(V_F, V_F, JumpPlusInitial, &m.mass_f, 1.0),
        t(V_F, V_F, Mass, &m.stiffness_f, nu),
        t(V_F, V_F, Mass, &m.convection_f, 1.0),
        t(V_F, V_F, Mass, &m.normal_ff, -nu),
        t(V_F, V_F, Mass, &m.interface_ff, gamma * nu / h),
        // fluid: harmonic extension u_f
        t(U_F, U_F, Mass, &m.stiffness_f, 1.0),
        t(U_F, U_F, Mass, &m.normal_ff, -1.0),
        t(U_F, U_F, Mass, &m.interface_ff, gamma / h),
        // solid: wave equation as a first-order system
        t(V_S, V_S, DtMass, &m.mass_s, 1.0),
        t(V_S, V_S, JumpPlusInitial, &m.mass_s, 1.0),
        t(V_S, U_S, Mass, &m.stiffness_s, lambda),
        t(V_S, V_S, Mass, &m.stiffness_s, delta),
        t(V_S, V_S, Mass, &m.normal_ss, -delta),
        t(U_S, U_S, DtMass, &m.mass_s, 1.0),
        t(U_S, U_S, JumpPlusInitial, &m.mass_s, 1.0),
        t(U_S, V_S, Mass, &m.mass_s, -1.0),
        // B_1: penalties against the solid traces
        t(V_F, V_S, Mass, &m.interface_fs, -gamma * nu / h),
        t(U_F, U_S, Mass, &m.interface_fs, -gamma / h),
        // B_2: fluid flux into the solid
        t(V_S, V_F, Mass, &m.normal_sf, nu),
    ]
}

/// A heat-wave problem ready to march, with its spaces and matrices.
#[derive(Debug, Clone)]
pub struct HeatWaveSetup {
    pub params: HeatWaveParams,
    pub spaces: HeatWaveSpaces,
    pub matrices: HeatWaveMatrices,
    pub problem: ProblemSpec,
}

impl HeatWaveSetup {
    pub fn new(params: HeatWaveParams, spaces: HeatWaveSpaces, loads: Vec<LoadTerm>, order: DgOrder) -> Result<Self> {
        params.validate()?;
        let matrices = HeatWaveMatrices::assemble(&spaces, params.beta)?;
        let h = spaces.penalty_h(&params);
        let collect = |space: &FunctionSpace, markers: &[String]| -> Result<Vec<usize>> {
            let mut out = Vec::new();
            for m in markers {
                out.extend(space.boundary_dofs(m, None)?);
            }
            Ok(out)
        };
        let df = collect(&spaces.fluid, &spaces.fluid_dirichlet)?;
        let ds = collect(&spaces.solid, &spaces.solid_dirichlet)?;
        let (nf, ns) = (spaces.fluid.n_dofs(), spaces.solid.n_dofs());
        let fields = vec![
            FieldDef::new("u_f", 0, nf).with_dirichlet(df.clone()),
            FieldDef::new("v_f", 0, nf).with_dirichlet(df),
            FieldDef::new("u_s", 1, ns).with_dirichlet(ds.clone()),
            FieldDef::new("v_s", 1, ns).with_dirichlet(ds),
        ];
        let problem = ProblemSpec {
            fields,
            terms: heatwave_terms(&params, &matrices, h),
            loads,
            initial: vec![vec![0.0; nf], vec![0.0; nf], vec![0.0; ns], vec![0.0; ns]],
            order,
            source_quadrature: SourceQuadrature::Gauss,
        };
        problem.validate()?;
        Ok(Self { params, spaces, matrices, problem })
    }

    pub fn space_of(&self, field: usize) -> &FunctionSpace {
        if field < 2 {
            &self.spaces.fluid
        } else {
            &self.spaces.solid
        }
    }
}

/// Closed-form solution and sources of the 1D manufactured test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution1d {
    pub nu: f64,
    pub lambda: f64,
}

impl Default for ManufacturedSolution1d {
    fn default() -> Self {
        let p = HeatWaveParams::one_d();
        Self { nu: p.nu, lambda: p.lambda }
    }
}

impl ManufacturedSolution1d {
    /// `(u_f, v_f, u_s, v_s)`; fluid entries at `x` in (0,2), solid at `x` in (2,4).
    pub fn eval(&self, x: f64, t: f64) -> (f64, f64, f64, f64) {
        (self.u_f(x, t), self.v_f(x, t), self.u_s(x, t), self.v_s(x, t))
    }

    pub fn u_f(&self, x: f64, t: f64) -> f64 {
        t * t * x / 2.0
    }

    pub fn v_f(&self, x: f64, t: f64) -> f64 {
        2.0 * t * (PI * x / 4.0).sin()
    }

    pub fn u_s(&self, x: f64, t: f64) -> f64 {
        t * t * (PI * (x - 2.0) / 2.0).cos()
    }

    pub fn v_s(&self, x: f64, t: f64) -> f64 {
        2.0 * t * (PI * (x - 2.0) / 2.0).cos()
    }

    pub fn g_f(&self, x: f64, t: f64) -> f64 {
        2.0 * (PI * x / 4.0).sin() + PI * PI * t * self.nu * (PI * x / 4.0).sin() / 8.0
    }

    pub fn g_s(&self, x: f64, t: f64) -> f64 {
        let c = (PI * (x - 2.0) / 2.0).cos();
        2.0 * c + PI * PI * t * t * self.lambda * c / 4.0
    }

    /// The sources as sums of `profile(t) * load vector`.
    pub fn loads(&self, spaces: &HeatWaveSpaces) -> Vec<LoadTerm> {
        let (nu, lambda) = (self.nu, self.lambda);
        let sin = |x: [f64; 2]| (PI * x[0] / 4.0).sin();
        let cos = |x: [f64; 2]| (PI * (x[0] - 2.0) / 2.0).cos();
        let lf0 = assemble_load_vector(&spaces.fluid, |x| 2.0 * sin(x));
        let lf1 = assemble_load_vector(&spaces.fluid, |x| PI * PI * nu * sin(x) / 8.0);
        let ls0 = assemble_load_vector(&spaces.solid, |x| 2.0 * cos(x));
        let ls2 = assemble_load_vector(&spaces.solid, |x| PI * PI * lambda * cos(x) / 4.0);
        vec![
            LoadTerm { field: V_F, profile: TemporalProfile::constant(1.0), vector: Arc::new(lf0) },
            LoadTerm { field: V_F, profile: TemporalProfile::power(1), vector: Arc::new(lf1) },
            LoadTerm { field: V_S, profile: TemporalProfile::constant(1.0), vector: Arc::new(ls0) },
            LoadTerm { field: V_S, profile: TemporalProfile::power(2), vector: Arc::new(ls2) },
        ]
    }
}

/// The 1D manufactured problem on `I = (0, 4)`.
pub fn heatwave_1d(cells_per_side: usize, order: DgOrder) -> Result<HeatWaveSetup> {
    let spaces = HeatWaveSpaces::interval(cells_per_side, cells_per_side)?;
    let loads = ManufacturedSolution1d::default().loads(&spaces);
    HeatWaveSetup::new(HeatWaveParams::one_d(), spaces, loads, order)
}

pub const HEATWAVE_1D_END_TIME: f64 = 4.0;
pub const HEATWAVE_2D_END_TIME: f64 = 1.0;
pub const SOURCE_CUTOFF: f64 = 0.1;

/// Where the Gaussian pulse of the 2D tests sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceVariant {
    /// Centered at `(1/2, 1/2)` in the fluid.
    Fluid,
    /// Centered at `(1/2, -1/2)` in the solid.
    Solid,
}

impl SourceVariant {
    pub fn center(self) -> [f64; 2] {
        match self {
            SourceVariant::Fluid => [0.5, 0.5],
            SourceVariant::Solid => [0.5, -0.5],
        }
    }
}

fn gaussian(c: [f64; 2], x: [f64; 2]) -> f64 {
    (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2))).exp()
}

/// `(g_f, g_s)` of the 2D configurations at `(x, t)`.
pub fn config2_sources(variant: SourceVariant, x: [f64; 2], t: f64) -> (f64, f64) {
    let g = if (0.0..=SOURCE_CUTOFF).contains(&t) { gaussian(variant.center(), x) } else { 0.0 };
    match variant {
        SourceVariant::Fluid => (g, 0.0),
        SourceVariant::Solid => (0.0, g),
    }
}

/// The 2D configuration on `I = (0, 1)` with an `nx × ny` grid per subdomain.
pub fn heatwave_2d(variant: SourceVariant, nx: usize, ny: usize, order: DgOrder) -> Result<HeatWaveSetup> {
    heatwave_2d_with(HeatWaveParams::two_d(), variant, nx, ny, order)
}

pub fn heatwave_2d_with(
    params: HeatWaveParams,
    variant: SourceVariant,
    nx: usize,
    ny: usize,
    order: DgOrder,
) -> Result<HeatWaveSetup> {
    let spaces = HeatWaveSpaces::rectangle(nx, ny)?;
    let c = variant.center();
    let (field, space) = match variant {
        SourceVariant::Fluid => (V_F, &spaces.fluid),
        SourceVariant::Solid => (V_S, &spaces.solid),
    };
    let v = assemble_load_vector(space, |x| gaussian(c, x));
    let loads = vec![LoadTerm { field, profile: TemporalProfile::until(SOURCE_CUTOFF), vector: Arc::new(v) }];
    HeatWaveSetup::new(params, spaces, loads, order)
}
