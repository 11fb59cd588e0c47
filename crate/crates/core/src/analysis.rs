//! Error norms, goal functionals, EOC and tabular output.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::Result;
use crate::linalg::CsrMatrix;
use crate::quadrature::GaussLegendre;
use crate::slab_system::{Observer, SlabSolution};
use crate::spatial_fem::{assemble_operator, FunctionSpace, Operator};

type Analytic = Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>;

/// One field compared against a closed-form solution.
#[derive(Clone)]
pub struct ErrorTarget {
    pub field: usize,
    pub space: FunctionSpace,
    pub exact: Analytic,
}

impl ErrorTarget {
    pub fn new(field: usize, space: FunctionSpace, exact: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { field, space, exact: Arc::new(exact) }
    }
}

/// What the discrete solution is compared with at each temporal quadrature point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorReference {
    /// The analytic solution itself, integrated with Gauss quadrature in space.
    #[default]
    Exact,
    /// The nodal interpolant of the analytic solution in the spatial finite
    /// element space, measured with the exact mass matrix.
    SpatialInterpolant,
}

/// Accumulates `||u - u_kh||^2_{L2(I, L2)}` per target.
///
/// Time integrals run over the fine sub-elements so no quadrature panel
/// straddles a discontinuity of any field.
pub struct SpaceTimeL2Error {
    targets: Vec<ErrorTarget>,
    reference: ErrorReference,
    masses: Vec<CsrMatrix>,
    time_rule: GaussLegendre,
    space_rule: GaussLegendre,
    squared: Vec<f64>,
}

impl SpaceTimeL2Error {
    pub fn new(targets: Vec<ErrorTarget>, reference: ErrorReference) -> Result<Self> {
        Self::with_rules(targets, reference, 4, 4)
    }

    /// Gauss rules with `nt` points per fine sub-element and `nx` points per spatial axis.
    pub fn with_rules(targets: Vec<ErrorTarget>, reference: ErrorReference, nt: usize, nx: usize) -> Result<Self> {
        let n = targets.len();
        let masses = match reference {
            ErrorReference::Exact => Vec::new(),
            ErrorReference::SpatialInterpolant => targets
                .iter()
                .map(|t| assemble_operator(&t.space, &t.space, &Operator::Mass))
                .collect::<Result<_>>()?,
        };
        Ok(Self {
            targets,
            reference,
            masses,
            time_rule: GaussLegendre::new(nt),
            space_rule: GaussLegendre::new(nx),
            squared: vec![0.0; n],
        })
    }

    pub fn reference(&self) -> ErrorReference {
        self.reference
    }

    /// Squared errors in target order.
    pub fn squared(&self) -> &[f64] {
        &self.squared
    }

    pub fn errors(&self) -> Vec<f64> {
        self.squared.iter().map(|v| v.sqrt()).collect()
    }
}

/// `int_Ω (u_h - u)^2` at one time.
pub fn spatial_l2_error_sq(space: &FunctionSpace, coeffs: &[f64], exact: impl Fn([f64; 2]) -> f64, rule: &GaussLegendre) -> f64 {
    let mesh = space.mesh();
    let (hx, hy) = mesh.cell_size();
    let mut pts = Vec::new();
    if mesh.dim() == 1 {
        for (s, w) in rule.points().iter().zip(rule.weights()) {
            pts.push(([*s, 0.0], w * hx));
        }
    } else {
        for (t, wt) in rule.points().iter().zip(rule.weights()) {
            for (s, ws) in rule.points().iter().zip(rule.weights()) {
                pts.push(([*s, *t], ws * wt * hx * hy));
            }
        }
    }
    let evals: Vec<_> = pts.iter().map(|(xi, _)| space.shape_eval(*xi)).collect();
    let mut acc = 0.0;
    for cell in 0..mesh.n_cells() {
        let o = mesh.cell_origin(cell);
        let nodes = space.cell_nodes(cell);
        for ((xi, w), e) in pts.iter().zip(&evals) {
            let uh: f64 = nodes.iter().zip(&e.values).map(|(&n, v)| v * coeffs[space.dof(n, 0)]).sum();
            let y = if mesh.dim() == 1 { 0.0 } else { o[1] + xi[1] * hy };
            let d = uh - exact([o[0] + xi[0] * hx, y]);
            acc += w * d * d;
        }
    }
    acc
}

/// Index of the sub-element of `basis` that contains the fine element `(a, b)`.
fn containing_element(elements: &[(f64, f64)], a: f64, b: f64) -> usize {
    let mid = 0.5 * (a + b);
    elements.iter().position(|&(l, r)| mid > l && mid < r).unwrap_or(elements.len() - 1)
}

impl Observer for SpaceTimeL2Error {
    fn observe(&mut self, sol: &SlabSolution) -> Result<()> {
        for &(a, b) in &sol.slab.fine_elements {
            for (t, wt) in self.time_rule.mapped(a, b) {
                for (k, target) in self.targets.iter().enumerate() {
                    let e = containing_element(sol.basis(target.field).elements(), a, b);
                    let c = sol.eval_in_element(target.field, e, t);
                    let exact = &target.exact;
                    let e2 = match self.reference {
                        ErrorReference::Exact => {
                            spatial_l2_error_sq(&target.space, &c, |x| exact(x, t), &self.space_rule)
                        }
                        ErrorReference::SpatialInterpolant => {
                            let mut d = target.space.interpolate(|x| vec![exact(x, t)]);
                            for (di, ci) in d.iter_mut().zip(&c) {
                                *di = ci - *di;
                            }
                            self.masses[k].bilinear(&d, &d)
                        }
                    };
                    self.squared[k] += wt * e2;
                }
            }
        }
        Ok(())
    }
}

/// `scale * int_I w(t)^T K w(t) dt` for one field, e.g. `ν ||∇v||^2`.
pub struct EnergyQoi {
    pub field: usize,
    pub matrix: Arc<CsrMatrix>,
    pub scale: f64,
    rule: GaussLegendre,
    value: f64,
}

impl EnergyQoi {
    pub fn new(field: usize, matrix: Arc<CsrMatrix>, scale: f64) -> Self {
        Self { field, matrix, scale, rule: GaussLegendre::new(3), value: 0.0 }
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl Observer for EnergyQoi {
    fn observe(&mut self, sol: &SlabSolution) -> Result<()> {
        let basis = sol.basis(self.field);
        for (e, &(a, b)) in basis.elements().iter().enumerate() {
            for (t, w) in self.rule.mapped(a, b) {
                let c = sol.eval_in_element(self.field, e, t);
                self.value += self.scale * w * self.matrix.bilinear(&c, &c);
            }
        }
        Ok(())
    }
}

/// `int_I ℓ(w(t)) dt` for a linear functional `ℓ` given by its coefficient vector.
pub struct LinearQoi {
    pub field: usize,
    pub functional: Arc<Vec<f64>>,
    rule: GaussLegendre,
    value: f64,
}

impl LinearQoi {
    pub fn new(field: usize, functional: Arc<Vec<f64>>) -> Self {
        Self { field, functional, rule: GaussLegendre::new(2), value: 0.0 }
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl Observer for LinearQoi {
    fn observe(&mut self, sol: &SlabSolution) -> Result<()> {
        let basis = sol.basis(self.field);
        for (e, &(a, b)) in basis.elements().iter().enumerate() {
            for (t, w) in self.rule.mapped(a, b) {
                let c = sol.eval_in_element(self.field, e, t);
                self.value += w * c.iter().zip(self.functional.iter()).map(|(x, l)| x * l).sum::<f64>();
            }
        }
        Ok(())
    }
}

/// Records one spatial DoF of a field at every sub-element end.
pub struct DofProbe {
    pub field: usize,
    pub dof: usize,
    pub samples: Vec<(f64, f64)>,
}

impl DofProbe {
    pub fn new(field: usize, dof: usize) -> Self {
        Self { field, dof, samples: Vec::new() }
    }
}

impl Observer for DofProbe {
    fn observe(&mut self, sol: &SlabSolution) -> Result<()> {
        let basis = sol.basis(self.field);
        for (e, &(_, b)) in basis.elements().iter().enumerate() {
            let c = sol.eval_in_element(self.field, e, b);
            self.samples.push((b, c[self.dof]));
        }
        Ok(())
    }
}

/// `log2(e_prev / e_cur)` for consecutive entries; `None` for the first entry
/// and wherever an error is zero or not finite.
pub fn eoc(errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None];
    for w in errors.windows(2) {
        let (a, b) = (w[0].abs(), w[1].abs());
        let ok = a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite();
        out.push(ok.then(|| (a / b).log2()));
    }
    out.truncate(errors.len());
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowValues {
    /// Fluid, solid and total space-time L2 errors.
    Errors { eta_f: f64, eta_s: f64, eta_total: f64 },
    /// Goal functional and the signed error `J(U) - J(U_kh)`.
    Qoi { qoi: f64, error: f64 },
}

impl RowValues {
    pub fn errors(eta_f: f64, eta_s: f64) -> Self {
        RowValues::Errors { eta_f, eta_s, eta_total: eta_f.hypot(eta_s) }
    }

    /// The value EOCs are computed from.
    pub fn headline(&self) -> f64 {
        match self {
            RowValues::Errors { eta_total, .. } => *eta_total,
            RowValues::Qoi { error, .. } => *error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub coarse: usize,
    pub elements: (usize, usize),
    pub ratio: (usize, usize),
    pub values: RowValues,
    /// `None` on the first row or when undefined.
    pub eoc: Option<f64>,
}

impl ConvergenceRow {
    pub fn ratio_label(&self) -> String {
        format!("{}:{}", self.ratio.0, self.ratio.1)
    }
}

/// Fills the `eoc` column from consecutive headline values.
pub fn fill_eoc(rows: &mut [ConvergenceRow]) {
    let vals: Vec<f64> = rows.iter().map(|r| r.values.headline()).collect();
    for (r, e) in rows.iter_mut().zip(eoc(&vals)) {
        r.eoc = e;
    }
}

pub const ERROR_HEADER: &str = "coarse_elems,elems_f,elems_s,ratio,eta_f,eta_s,eta_total,eoc";
pub const QOI_HEADER: &str = "coarse_elems,elems_1,elems_2,ratio,qoi,qoi_error,eoc";
pub const EOC_UNDEFINED: &str = "undefined";

fn fmt_float(v: f64) -> String {
    format!("{v:.14e}")
}

/// CSV with 15 significant digits; the first EOC is `-`, undefined ones are
/// [`EOC_UNDEFINED`]. All rows must carry the same kind of values.
pub fn to_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::new();
    let header = match rows.first().map(|r| &r.values) {
        Some(RowValues::Qoi { .. }) => QOI_HEADER,
        _ => ERROR_HEADER,
    };
    out.push_str(header);
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        let vals = match r.values {
            RowValues::Errors { eta_f, eta_s, eta_total } => {
                format!("{},{},{}", fmt_float(eta_f), fmt_float(eta_s), fmt_float(eta_total))
            }
            RowValues::Qoi { qoi, error } => format!("{},{}", fmt_float(qoi), fmt_float(error)),
        };
        let e = match (i, r.eoc) {
            (0, _) => "-".to_string(),
            (_, Some(e)) => fmt_float(e),
            (_, None) => EOC_UNDEFINED.to_string(),
        };
        let _ = writeln!(out, "{},{},{},{},{},{}", r.coarse, r.elements.0, r.elements.1, r.ratio_label(), vals, e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial_fem::{build_mesh, MeshSpec};

    #[test]
    fn eoc_values() {
        let e = eoc(&[4.14e-2, 2.10e-2]);
        assert!(e[0].is_none());
        assert!((e[1].unwrap() - 0.98).abs() < 0.005);
        let e = eoc(&[2.28e-2, 1.16e-2]);
        assert!((e[1].unwrap() - 0.97).abs() < 0.01);
        assert_eq!(eoc(&[1.0, 1.0])[1], Some(0.0));
        assert_eq!(eoc(&[1.0, 0.0])[1], None);
        assert!(eoc(&[]).is_empty());
    }

    #[test]
    fn eoc_antisymmetry() {
        let a = eoc(&[3.0, 1.1])[1].unwrap();
        let b = eoc(&[1.1, 3.0])[1].unwrap();
        assert!((a + b).abs() < 1e-15);
    }

    #[test]
    fn pythagorean_split() {
        let v = RowValues::errors(1.78e-2, 3.73e-2);
        assert!((v.headline() - 4.13e-2).abs() < 1e-4);
    }

    #[test]
    fn interpolant_error_vanishes() {
        let m = build_mesh(&MeshSpec::rectangle((0.0, 1.0), (0.0, 2.0), 3, 4)).unwrap();
        let s = FunctionSpace::scalar(m, 2).unwrap();
        let f = |x: [f64; 2]| 1.0 + x[0] * x[1] - 2.0 * x[1] * x[1];
        let c = s.interpolate(|x| vec![f(x)]);
        assert!(spatial_l2_error_sq(&s, &c, f, &GaussLegendre::new(4)) < 1e-24);
        let shifted = spatial_l2_error_sq(&s, &c, |x| f(x) + 1.0, &GaussLegendre::new(4));
        assert!((shifted - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let mut rows = vec![
            ConvergenceRow { coarse: 25, elements: (25, 25), ratio: (1, 1), values: RowValues::errors(0.3, 0.4), eoc: None },
            ConvergenceRow { coarse: 50, elements: (50, 50), ratio: (1, 1), values: RowValues::errors(0.0, 0.0), eoc: None },
        ];
        fill_eoc(&mut rows);
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], ERROR_HEADER);
        assert_eq!(lines[1], "25,25,25,1:1,3.00000000000000e-1,4.00000000000000e-1,5.00000000000000e-1,-");
        assert!(lines[2].ends_with(",undefined"));
    }
}
