//! Drivers for the numerical studies: one run per coarse mesh, sweeps by halving.

use std::sync::Arc;

use crate::analysis::{fill_eoc, ConvergenceRow, DofProbe, EnergyQoi, ErrorReference, ErrorTarget, LinearQoi, RowValues, SpaceTimeL2Error};
use crate::error::{Error, Result};
use crate::problems::biot::{self, BiotParams, BiotSetup, MANDEL_END_TIME, MANDEL_REFERENCE_QOI};
use crate::problems::heatwave::{
    heatwave_1d, heatwave_2d, ManufacturedSolution1d, SourceVariant, HEATWAVE_1D_END_TIME, HEATWAVE_2D_END_TIME, U_F, U_S,
    V_F, V_S,
};
use crate::slab_system::{march, Observer, ProblemSpec};
use crate::temporal_mesh::{DgOrder, TemporalHierarchy};

/// Cells per subdomain of the 1D heat-wave mesh used with dG(0).
pub const HEATWAVE_1D_CELLS: usize = 50;
/// Cells per subdomain of the coarsest 1D dG(1) mesh.
pub const HEATWAVE_1D_DG1_CELLS: usize = 4;
/// Cells of the 2D heat-wave mesh per subdomain, `x` then `y`; the whole
/// domain `(0,4)×(-1,1)` has 80×20 cells.
pub const HEATWAVE_2D_CELLS: (usize, usize) = (80, 10);
pub const MANDEL_CELLS: usize = 16;
/// Reference values of the 2D goal functionals.
pub const HEATWAVE_2D_FLUID_REFERENCE: f64 = 2.48587692e-4;
pub const HEATWAVE_2D_SOLID_REFERENCE: f64 = 7.14276824e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    HeatWave1d,
    HeatWave2dFluid,
    HeatWave2dSolid,
    Mandel,
    MandelSlabCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::HeatWave1d,
        Experiment::HeatWave2dFluid,
        Experiment::HeatWave2dSolid,
        Experiment::Mandel,
        Experiment::MandelSlabCheck,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::HeatWave1d => "heatwave1d",
            Experiment::HeatWave2dFluid => "heatwave2d_fluid",
            Experiment::HeatWave2dSolid => "heatwave2d_solid",
            Experiment::Mandel => "mandel",
            Experiment::MandelSlabCheck => "appendix_b_check",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.id() == id)
    }

    pub fn end_time(self) -> f64 {
        match self {
            Experiment::HeatWave1d => HEATWAVE_1D_END_TIME,
            Experiment::HeatWave2dFluid | Experiment::HeatWave2dSolid => HEATWAVE_2D_END_TIME,
            Experiment::Mandel | Experiment::MandelSlabCheck => MANDEL_END_TIME,
        }
    }

    /// Published reference value of the goal functional, if the experiment has one.
    pub fn default_reference(self) -> Option<f64> {
        match self {
            Experiment::HeatWave2dFluid => Some(HEATWAVE_2D_FLUID_REFERENCE),
            Experiment::HeatWave2dSolid => Some(HEATWAVE_2D_SOLID_REFERENCE),
            Experiment::Mandel => Some(MANDEL_REFERENCE_QOI),
            _ => None,
        }
    }
}

/// One run of a study on a given coarse temporal mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub experiment: Experiment,
    pub order: DgOrder,
    pub coarse: usize,
    /// Refinement factors `(field 1, field 2)`: fluid:solid or u:p.
    pub ratio: (usize, usize),
    /// Spatial resolution; `None` uses the experiment's default mesh. Cells per
    /// subdomain in 1D, `y` cells per subdomain in 2D (with `8×` as many in `x`),
    /// cells per axis for Mandel.
    pub space_cells: Option<usize>,
    /// `J(U)` the QoI error is measured against.
    pub reference: Option<f64>,
    pub error_reference: ErrorReference,
}

impl RunSpec {
    pub fn new(experiment: Experiment, order: DgOrder, coarse: usize, ratio: (usize, usize)) -> Self {
        Self {
            experiment,
            order,
            coarse,
            ratio,
            space_cells: None,
            reference: experiment.default_reference(),
            error_reference: ErrorReference::SpatialInterpolant,
        }
    }

    pub fn with_space_cells(mut self, cells: usize) -> Self {
        self.space_cells = Some(cells);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTemporalMesh(m));
        if self.coarse == 0 {
            return bad("coarse element count must be positive".into());
        }
        match (self.experiment, self.order) {
            (Experiment::Mandel | Experiment::MandelSlabCheck, DgOrder::Dg1) => {
                return bad(format!("{} requires dG(0)", self.experiment.id()));
            }
            (Experiment::HeatWave2dFluid | Experiment::HeatWave2dSolid, DgOrder::Dg0) => {
                return bad(format!("{} requires dG(1)", self.experiment.id()));
            }
            _ => {}
        }
        for r in [self.ratio.0, self.ratio.1] {
            if r == 0 || !r.is_power_of_two() {
                return Err(Error::NonPowerOfTwoRatio(r));
            }
        }
        if self.space_cells == Some(0) {
            return Err(Error::InvalidMesh("space_cells must be positive".into()));
        }
        Ok(())
    }

    pub fn hierarchy(&self) -> Result<TemporalHierarchy> {
        TemporalHierarchy::build(self.experiment.end_time(), self.coarse, self.ratio.0, self.ratio.1)
    }
}

/// Result of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub row: ConvergenceRow,
    /// Space-time DoFs over all slabs, Dirichlet DoFs included.
    pub space_time_dofs: usize,
    pub factorizations: usize,
    /// Mandel only: `(t, p)` at the bottom-left corner at every pressure sub-element end.
    pub probe: Vec<(f64, f64)>,
}

/// Total space-time DoFs: per field, temporal DoFs of its group times spatial DoFs.
pub fn space_time_dofs(problem: &ProblemSpec, hierarchy: &TemporalHierarchy) -> usize {
    let per_element = match problem.order {
        DgOrder::Dg0 => 1,
        DgOrder::Dg1 => 2,
    };
    problem
        .fields
        .iter()
        .map(|f| per_element * hierarchy.field_mesh(f.group).n_elements() * f.space_dofs)
        .sum()
}

pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    spec.validate()?;
    match spec.experiment {
        Experiment::HeatWave1d => run_heatwave1d(spec),
        Experiment::HeatWave2dFluid => run_heatwave2d(spec, SourceVariant::Fluid),
        Experiment::HeatWave2dSolid => run_heatwave2d(spec, SourceVariant::Solid),
        Experiment::Mandel => run_mandel(spec),
        Experiment::MandelSlabCheck => {
            Err(Error::Assembly("appendix_b_check produces no convergence row; use mandel_slab_check()".into()))
        }
    }
}

fn row(spec: &RunSpec, values: RowValues) -> ConvergenceRow {
    ConvergenceRow {
        coarse: spec.coarse,
        elements: (spec.coarse * spec.ratio.0, spec.coarse * spec.ratio.1),
        ratio: spec.ratio,
        values,
        eoc: None,
    }
}

fn run_heatwave1d(spec: &RunSpec) -> Result<RunOutcome> {
    let default_cells = match spec.order {
        DgOrder::Dg0 => HEATWAVE_1D_CELLS,
        DgOrder::Dg1 => HEATWAVE_1D_DG1_CELLS,
    };
    let setup = heatwave_1d(spec.space_cells.unwrap_or(default_cells), spec.order)?;
    let ex = ManufacturedSolution1d::default();
    let (f, s) = (setup.spaces.fluid.clone(), setup.spaces.solid.clone());
    let targets = vec![
        ErrorTarget::new(U_F, f.clone(), move |x, t| ex.u_f(x[0], t)),
        ErrorTarget::new(V_F, f, move |x, t| ex.v_f(x[0], t)),
        ErrorTarget::new(U_S, s.clone(), move |x, t| ex.u_s(x[0], t)),
        ErrorTarget::new(V_S, s, move |x, t| ex.v_s(x[0], t)),
    ];
    let mut err = SpaceTimeL2Error::new(targets, spec.error_reference)?;
    let h = spec.hierarchy()?;
    let summary = march(&setup.problem, &h, &mut [&mut err])?;
    let q = err.squared();
    let values = RowValues::errors((q[0] + q[1]).sqrt(), (q[2] + q[3]).sqrt());
    Ok(RunOutcome {
        row: row(spec, values),
        space_time_dofs: space_time_dofs(&setup.problem, &h),
        factorizations: summary.factorizations,
        probe: Vec::new(),
    })
}

fn qoi_values(spec: &RunSpec, qoi: f64) -> RowValues {
    let error = spec.reference.map_or(f64::NAN, |r| r - qoi);
    RowValues::Qoi { qoi, error }
}

fn run_heatwave2d(spec: &RunSpec, variant: SourceVariant) -> Result<RunOutcome> {
    let (nx, ny) = match spec.space_cells {
        Some(c) => (8 * c, c),
        None => HEATWAVE_2D_CELLS,
    };
    let setup = heatwave_2d(variant, nx, ny, spec.order)?;
    let mut qoi = match variant {
        SourceVariant::Fluid => EnergyQoi::new(V_F, setup.matrices.stiffness_f.clone(), setup.params.nu),
        SourceVariant::Solid => EnergyQoi::new(U_S, setup.matrices.stiffness_s.clone(), setup.params.lambda),
    };
    let h = spec.hierarchy()?;
    let summary = march(&setup.problem, &h, &mut [&mut qoi])?;
    Ok(RunOutcome {
        row: row(spec, qoi_values(spec, qoi.value())),
        space_time_dofs: space_time_dofs(&setup.problem, &h),
        factorizations: summary.factorizations,
        probe: Vec::new(),
    })
}

fn run_mandel(spec: &RunSpec) -> Result<RunOutcome> {
    let cells = spec.space_cells.unwrap_or(MANDEL_CELLS);
    let setup = BiotSetup::new(BiotParams::mandel(), cells, cells, spec.order)?;
    let mut qoi = LinearQoi::new(biot::P, Arc::new(setup.bottom_functional()?));
    let corner = setup.p_space.node_at([0.0, 0.0]).ok_or_else(|| Error::InvalidMesh("no node at origin".into()))?;
    let mut probe = DofProbe::new(biot::P, setup.p_space.dof(corner, 0));
    let h = spec.hierarchy()?;
    let observers: &mut [&mut dyn Observer] = &mut [&mut qoi, &mut probe];
    let summary = march(&setup.problem, &h, observers)?;
    Ok(RunOutcome {
        row: row(spec, qoi_values(spec, qoi.value())),
        space_time_dofs: space_time_dofs(&setup.problem, &h),
        factorizations: summary.factorizations,
        probe: probe.samples,
    })
}

/// Runs `refinements + 1` rows, halving the coarse step each time. The 1D dG(1)
/// study also halves the spatial mesh width per row.
pub fn sweep(spec: &RunSpec, refinements: usize) -> Result<Vec<RunOutcome>> {
    let mut out = Vec::with_capacity(refinements + 1);
    let refine_space = spec.experiment == Experiment::HeatWave1d && spec.order == DgOrder::Dg1;
    let base_cells = spec.space_cells.unwrap_or(HEATWAVE_1D_DG1_CELLS);
    for level in 0..=refinements {
        let mut s = spec.clone();
        s.coarse = spec.coarse << level;
        if refine_space {
            s.space_cells = Some(base_cells << level);
        }
        out.push(run(&s)?);
    }
    let mut rows: Vec<ConvergenceRow> = out.iter().map(|o| o.row.clone()).collect();
    fill_eoc(&mut rows);
    for (o, r) in out.iter_mut().zip(rows) {
        o.row = r;
    }
    Ok(out)
}

/// Max entrywise difference between the generic slab assembly and the
/// hand-derived Mandel system for one 1:2 dG(0) slab, with random-looking
/// initial data. Returns `(difference, scale)` where `scale` is the largest
/// entry of the hand-derived system.
pub fn mandel_slab_check(cells: usize, k: f64) -> Result<(f64, f64)> {
    use crate::slab_system::assemble_slab;
    let setup = BiotSetup::new(BiotParams::mandel(), cells, cells, DgOrder::Dg0)?;
    let nu = setup.u_space.n_dofs();
    let np = setup.p_space.n_dofs();
    let wiggle = |n: usize, amp: f64| -> Vec<f64> { (0..n).map(|i| amp * ((i as f64 * 0.731).sin() + 0.25)).collect() };
    let mut u0 = wiggle(nu, 1e-3);
    let mut p0 = wiggle(np, 1e6);
    for &d in &setup.problem.fields[biot::U].dirichlet {
        u0[d] = 0.0;
    }
    for &d in &setup.problem.fields[biot::P].dirichlet {
        p0[d] = 0.0;
    }
    let (hand, hand_rhs) = biot::hand_derived_mandel_system(&setup, k, &u0, &p0);
    let h = TemporalHierarchy::build(k, 1, 1, 2)?;
    let sys = assemble_slab(&setup.problem, &h.slab(0), &[u0, p0])?;
    if sys.matrix.shape() != hand.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", sys.matrix.shape(), hand.shape())));
    }
    let diff = sys.matrix.linear_combination(1.0, &hand, -1.0)?.max_abs();
    let rhs_diff = sys.rhs.iter().zip(&hand_rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = hand.max_abs().max(hand_rhs.iter().fold(0.0, |m, v| m.max(v.abs())));
    Ok((diff.max(rhs_diff), scale))
}
