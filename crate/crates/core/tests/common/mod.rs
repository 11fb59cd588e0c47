//! Independent single-rate oracles. They share only the spatial matrices with
//! the library; temporal discretization, block layout, Dirichlet handling and
//! the linear solve are written out by hand here.

#![allow(dead_code)]

use std::f64::consts::PI;

use multirate_core::linalg::{lu_solve, CsrMatrix, TripletBuilder};
use multirate_core::problems::biot::BiotSetup;
use multirate_core::problems::heatwave::{HeatWaveSetup, ManufacturedSolution1d};
use multirate_core::spatial_fem::assemble_load_vector;
use multirate_core::temporal_mesh::TemporalBasis;
use multirate_core::quadrature::GaussLegendre;
use multirate_core::temporal_mesh::TraceSide;

/// Dense-free block system builder with identity rows on constrained DoFs.
struct Blocks {
    tb: TripletBuilder,
    offsets: Vec<usize>,
}

impl Blocks {
    fn new(sizes: &[usize]) -> Self {
        let mut offsets = vec![0];
        for s in sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        let n = *offsets.last().unwrap();
        Self { tb: TripletBuilder::new(n, n), offsets }
    }

    fn add(&mut self, r: usize, c: usize, scale: f64, m: &CsrMatrix) {
        self.tb.add_block(self.offsets[r], self.offsets[c], scale, m);
    }

    fn finish(mut self, fixed: &[bool]) -> CsrMatrix {
        self.tb.retain(|&(i, j, _)| !fixed[i] && !fixed[j]);
        for (i, &f) in fixed.iter().enumerate() {
            if f {
                self.tb.push(i, i, 1.0);
            }
        }
        self.tb.build()
    }
}

fn fixed_mask(offsets: &[usize], dirichlet: &[&[usize]]) -> Vec<bool> {
    let mut fixed = vec![false; *offsets.last().unwrap()];
    for (f, d) in dirichlet.iter().enumerate() {
        for &i in *d {
            fixed[offsets[f] + i] = true;
        }
    }
    fixed
}

/// Backward Euler for the 1D manufactured heat-wave problem with sources
/// integrated exactly over each step. Returns `[u_f, v_f, u_s, v_s]` after
/// every step.
pub fn heatwave_backward_euler(setup: &HeatWaveSetup, t_end: f64, steps: usize) -> Vec<Vec<Vec<f64>>> {
    let p = setup.params;
    let m = &setup.matrices;
    let h = setup.spaces.penalty_h(&p);
    let nf = setup.spaces.fluid.n_dofs();
    let ns = setup.spaces.solid.n_dofs();
    let k = t_end / steps as f64;
    let mut blocks = Blocks::new(&[nf, nf, ns, ns]);
    // u_f: harmonic extension with penalty towards u_s
    blocks.add(0, 0, k, &m.stiffness_f);
    blocks.add(0, 0, -k, &m.normal_ff);
    blocks.add(0, 0, k * p.gamma / h, &m.interface_ff);
    blocks.add(0, 2, -k * p.gamma / h, &m.interface_fs);
    // v_f: heat equation
    blocks.add(1, 1, 1.0, &m.mass_f);
    blocks.add(1, 1, k * p.nu, &m.stiffness_f);
    blocks.add(1, 1, k, &m.convection_f);
    blocks.add(1, 1, -k * p.nu, &m.normal_ff);
    blocks.add(1, 1, k * p.gamma * p.nu / h, &m.interface_ff);
    blocks.add(1, 3, -k * p.gamma * p.nu / h, &m.interface_fs);
    // u_s: ∂t u = v
    blocks.add(2, 2, 1.0, &m.mass_s);
    blocks.add(2, 3, -k, &m.mass_s);
    // v_s: wave equation
    blocks.add(3, 3, 1.0, &m.mass_s);
    blocks.add(3, 2, k * p.lambda, &m.stiffness_s);
    blocks.add(3, 3, k * p.delta, &m.stiffness_s);
    blocks.add(3, 3, -k * p.delta, &m.normal_ss);
    blocks.add(3, 1, k * p.nu, &m.normal_sf);
    let offsets = blocks.offsets.clone();
    let dir: Vec<&[usize]> = setup.problem.fields.iter().map(|f| f.dirichlet.as_slice()).collect();
    let fixed = fixed_mask(&offsets, &dir);
    let a = blocks.finish(&fixed);

    let ex = ManufacturedSolution1d::default();
    let sin = |x: [f64; 2]| (PI * x[0] / 4.0).sin();
    let cos = |x: [f64; 2]| (PI * (x[0] - 2.0) / 2.0).cos();
    let f0 = assemble_load_vector(&setup.spaces.fluid, |x| 2.0 * sin(x));
    let f1 = assemble_load_vector(&setup.spaces.fluid, |x| PI * PI * ex.nu * sin(x) / 8.0);
    let s0 = assemble_load_vector(&setup.spaces.solid, |x| 2.0 * cos(x));
    let s2 = assemble_load_vector(&setup.spaces.solid, |x| PI * PI * ex.lambda * cos(x) / 4.0);

    let n = offsets[4];
    let mut x = vec![0.0; n];
    let mut out = Vec::with_capacity(steps);
    for step in 0..steps {
        let (t0, t1) = (step as f64 * k, (step + 1) as f64 * k);
        let int1 = (t1 * t1 - t0 * t0) / 2.0;
        let int2 = (t1.powi(3) - t0.powi(3)) / 3.0;
        let mut b = vec![0.0; n];
        let mv = m.mass_f.mul_vec(&x[offsets[1]..offsets[2]]);
        let mu = m.mass_s.mul_vec(&x[offsets[2]..offsets[3]]);
        let ms = m.mass_s.mul_vec(&x[offsets[3]..offsets[4]]);
        for i in 0..nf {
            b[offsets[1] + i] = mv[i] + k * f0[i] + int1 * f1[i];
        }
        for i in 0..ns {
            b[offsets[2] + i] = mu[i];
            b[offsets[3] + i] = ms[i] + k * s0[i] + int2 * s2[i];
        }
        for (i, &f) in fixed.iter().enumerate() {
            if f {
                b[i] = 0.0;
            }
        }
        x = lu_solve(&a, &b).expect("oracle solve");
        out.push((0..4).map(|f| x[offsets[f]..offsets[f + 1]].to_vec()).collect());
    }
    out
}

/// Backward Euler for the Biot system: returns `[u, p]` after every step.
pub fn biot_backward_euler(setup: &BiotSetup, t_end: f64, steps: usize) -> Vec<Vec<Vec<f64>>> {
    let m = &setup.matrices;
    let nu = setup.u_space.n_dofs();
    let np = setup.p_space.n_dofs();
    let k = t_end / steps as f64;
    let mut blocks = Blocks::new(&[nu, np]);
    blocks.add(0, 0, k, &m.sigma);
    blocks.add(0, 1, k, &m.b_up);
    blocks.add(1, 0, 1.0, &m.b_pu);
    blocks.add(1, 1, 1.0, &m.mass_p);
    blocks.add(1, 1, k, &m.stiffness_p);
    let offsets = blocks.offsets.clone();
    let dir: Vec<&[usize]> = setup.problem.fields.iter().map(|f| f.dirichlet.as_slice()).collect();
    let fixed = fixed_mask(&offsets, &dir);
    let a = blocks.finish(&fixed);
    let (mut u, mut p) = (vec![0.0; nu], vec![0.0; np]);
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut b = vec![0.0; nu + np];
        for (i, f) in m.traction.iter().enumerate() {
            b[i] = k * f;
        }
        let bu = m.b_pu.mul_vec(&u);
        let mp = m.mass_p.mul_vec(&p);
        for i in 0..np {
            b[nu + i] = bu[i] + mp[i];
        }
        for (i, &f) in fixed.iter().enumerate() {
            if f {
                b[i] = 0.0;
            }
        }
        let x = lu_solve(&a, &b).expect("oracle solve");
        u = x[..nu].to_vec();
        p = x[nu..].to_vec();
        out.push(vec![u.clone(), p.clone()]);
    }
    out
}

/// `∫ φ_i ψ_j`, `∫ φ_i ∂t ψ_j` or the jump form by direct quadrature over a
/// partition that refines both bases, evaluating the basis functions pointwise.
pub fn brute_force_temporal(row: &TemporalBasis, col: &TemporalBasis, kind: usize, breakpoints: &[f64]) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; col.dof_count()]; row.dof_count()];
    let quad = GaussLegendre::new(5);
    match kind {
        0 | 1 => {
            for w in breakpoints.windows(2) {
                for (t, wt) in quad.mapped(w[0], w[1]) {
                    for (i, mi) in m.iter_mut().enumerate() {
                        let phi = row.value(i, t, TraceSide::Right);
                        for (j, mij) in mi.iter_mut().enumerate() {
                            let psi = if kind == 0 {
                                col.value(j, t, TraceSide::Right)
                            } else {
                                col.derivative(j, t, TraceSide::Right)
                            };
                            *mij += wt * phi * psi;
                        }
                    }
                }
            }
        }
        _ => {
            let start = breakpoints[0];
            for (i, mi) in m.iter_mut().enumerate() {
                for (j, mij) in mi.iter_mut().enumerate() {
                    *mij += row.value(i, start, TraceSide::Right) * col.value(j, start, TraceSide::Right);
                    for &t in &breakpoints[1..breakpoints.len() - 1] {
                        let jump = col.value(j, t, TraceSide::Right) - col.value(j, t, TraceSide::Left);
                        *mij += row.value(i, t, TraceSide::Right) * jump;
                    }
                }
            }
        }
    }
    m
}
