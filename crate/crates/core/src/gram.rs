//! Recovering the coefficient vectors of the biharmonic curve and cylinder
//! from their inner-product constraints.
//!
//! A solution of the curve ODE is `gamma = cos(As) c1 + sin(As) c2 + cos(Bs) c3 + sin(Bs) c4`,
//! and the cylinder is `x = cos(Au + v/a) c1 + sin(Au + v/a) c2 + cos(Bu - v/a) c3 + sin(Bu - v/a) c4`.
//! Each geometric constraint `<D1 x, D2 x> = r` at a fixed parameter is one
//! linear equation in the ten Gram entries `c_ij = <c_i, c_j>`, ordered
//! `(c11, c12, c13, c14, c22, c23, c24, c33, c34, c44)`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix4, SMatrix, SVector, Vector4};
use serde::Serialize;

use crate::ambient::{j_apply, Vec4};
use crate::curve::{trig_derivative, ClosedFormCurve, TrigMode};
use crate::error::{Error, Result};
use crate::generators::{HopfCylinderPatch, LegendreFrame};
use crate::sasakian::TannoStructure;

pub type SystemMatrix = SMatrix<f64, 10, 10>;
pub type SystemVector = SVector<f64, 10>;

/// Names of the unknowns, in column order.
pub const UNKNOWNS: [&str; 10] = ["c11", "c12", "c13", "c14", "c22", "c23", "c24", "c33", "c34", "c44"];
/// Systems whose matrix condition number reaches this are refused.
pub const MAX_CONDITION: f64 = 1e10;
/// Deformations this close to the round sphere are refused.
pub const DEGENERATE_MARGIN: f64 = 1e-3;
/// Tolerance on the structure of a solution before reconstruction.
pub const SOLUTION_TOL: f64 = 1e-10;

/// Column of unknown `c_ij` for zero-based `i, j`.
pub fn unknown_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    const START: [usize; 4] = [0, 4, 7, 9];
    START[i] + (j - i)
}

/// Coefficients of `sum_ij c_ij f_i g_j` for basis values `f`, `g`.
fn bilinear_row(f: &[f64; 4], g: &[f64; 4]) -> [f64; 10] {
    let mut row = [0.0; 10];
    for i in 0..4 {
        for j in 0..4 {
            row[unknown_index(i, j)] += f[i] * g[j];
        }
    }
    row
}

/// `d^(du+dv)/du^du dv^dv` of `cos(ku u + kv v)` and `sin(ku u + kv v)`.
fn trig_pair(ku: f64, kv: f64, du: usize, dv: usize, u: f64, v: f64) -> [f64; 2] {
    let (c, s) = trig_derivative(ku * u + kv * v, du + dv);
    let scale = ku.powi(du as i32) * kv.powi(dv as i32);
    [scale * c, scale * s]
}

/// Values of the four basis functions of the cylinder (or, with `v` unused,
/// the curve) differentiated `du` times in `u` and `dv` times in `v`.
fn basis(t: &TannoStructure, du: usize, dv: usize, u: f64, v: f64) -> [f64; 4] {
    let inv_a = 1.0 / t.a();
    let [c1, s1] = trig_pair(t.slow_freq(), inv_a, du, dv, u, v);
    let [c2, s2] = trig_pair(t.fast_freq(), -inv_a, du, dv, u, v);
    [c1, s1, c2, s2]
}

#[derive(Clone, Debug, Serialize)]
pub struct GramSystem {
    tanno: TannoStructure,
    pub labels: Vec<String>,
    pub matrix: SystemMatrix,
    pub rhs: SystemVector,
}

/// One constraint: derivative orders of both factors, evaluation point,
/// right-hand side, and the factor that brings the row to its customary form.
struct Constraint {
    label: &'static str,
    left: (usize, usize),
    right: (usize, usize),
    at: (f64, f64),
    rhs: f64,
    scale: f64,
}

fn assemble(t: &TannoStructure, constraints: &[Constraint]) -> GramSystem {
    let mut matrix = SystemMatrix::zeros();
    let mut rhs = SystemVector::zeros();
    let mut labels = Vec::with_capacity(10);
    for (r, c) in constraints.iter().enumerate() {
        let (u, v) = c.at;
        let f = basis(t, c.left.0, c.left.1, u, v);
        let g = basis(t, c.right.0, c.right.1, u, v);
        for (k, x) in bilinear_row(&f, &g).iter().enumerate() {
            matrix[(r, k)] = c.scale * x;
        }
        rhs[r] = c.scale * c.rhs;
        labels.push(c.label.to_string());
    }
    GramSystem {
        tanno: *t,
        labels,
        matrix,
        rhs,
    }
}

/// The ten derivative constraints of a unit-speed biharmonic Legendre curve at `s = 0`.
pub fn build_curve_system(t: &TannoStructure) -> GramSystem {
    let a = t.a();
    let k2 = (5.0 - 4.0 * a) / (a * a);
    let k3 = (16.0 * a * a - 44.0 * a + 29.0) / (a * a * a);
    let at = (0.0, 0.0);
    let c = |label, p: usize, q: usize, rhs: f64, scale: f64| Constraint {
        label,
        left: (p, 0),
        right: (q, 0),
        at,
        rhs,
        scale,
    };
    assemble(
        t,
        &[
            c("<gamma,gamma> = 1", 0, 0, 1.0, 1.0),
            c("<gamma',gamma'> = 1/a", 1, 1, 1.0 / a, 1.0),
            c("<gamma,gamma'> = 0", 0, 1, 0.0, 1.0),
            c("<gamma',gamma''> = 0", 1, 2, 0.0, -1.0),
            c("<gamma'',gamma''> = (5-4a)/a^2", 2, 2, k2, 1.0),
            c("<gamma,gamma''> = -1/a", 0, 2, -1.0 / a, -1.0),
            c("<gamma',gamma'''> = -(5-4a)/a^2", 1, 3, -k2, -1.0),
            c("<gamma'',gamma'''> = 0", 2, 3, 0.0, 1.0),
            c("<gamma,gamma'''> = 0", 0, 3, 0.0, -1.0),
            c("<gamma''',gamma'''> = (16a^2-44a+29)/a^3", 3, 3, k3, 1.0),
        ],
    )
}

/// The ten cylinder constraints, eight at `(0, 0)` and two at `(0, a pi/2)`.
pub fn build_cylinder_system(t: &TannoStructure) -> GramSystem {
    let a = t.a();
    let origin = (0.0, 0.0);
    let shifted = (0.0, a * FRAC_PI_2);
    let c = |label, left, right, at, rhs: f64, scale: f64| Constraint {
        label,
        left,
        right,
        at,
        rhs,
        scale,
    };
    let (x, xu, xv, xuv) = ((0, 0), (1, 0), (0, 1), (1, 1));
    assemble(
        t,
        &[
            c("<x,x> = 1", x, x, origin, 1.0, 1.0),
            c("<x,x_u> = 0", x, xu, origin, 0.0, 1.0),
            c("<x,x_v> = 0", x, xv, origin, 0.0, -a),
            c("<x_u,x_v> = 0", xu, xv, origin, 0.0, -a),
            c("<x_u,x_u> = 1/a", xu, xu, origin, 1.0 / a, 1.0),
            c("<x_v,x_v> = 1/a^2", xv, xv, origin, 1.0 / (a * a), a * a),
            c("<x_v,x_uv> = 0", xv, xuv, origin, 0.0, a * a),
            c("<x_u,x_uv> = 0", xu, xuv, origin, 0.0, a),
            c("<x_u,x_u> = 1/a at (0, a pi/2)", xu, xu, shifted, 1.0 / a, 1.0),
            c("<x_u,x_v> = 0 at (0, a pi/2)", xu, xv, shifted, 0.0, -a),
        ],
    )
}

impl GramSystem {
    pub fn tanno(&self) -> &TannoStructure {
        &self.tanno
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.matrix.singular_values();
        let lo = sv.min();
        if lo == 0.0 {
            f64::INFINITY
        } else {
            sv.max() / lo
        }
    }

    /// Determinant of the rows `rows` restricted to the unknowns `cols`.
    pub fn subsystem_determinant(&self, rows: [usize; 4], cols: [usize; 4]) -> f64 {
        Matrix4::from_fn(|i, j| self.matrix[(rows[i], cols[j])]).determinant()
    }

    /// Largest row residual `|M c - r|`, each row relative to the size of its terms.
    pub fn residual(&self, unknowns: &SystemVector) -> f64 {
        let defect = self.matrix * unknowns - self.rhs;
        (0..10)
            .map(|r| {
                let terms = (0..10).map(|k| (self.matrix[(r, k)] * unknowns[k]).abs()).fold(0.0, f64::max);
                defect[r].abs() / terms.max(self.rhs[r].abs()).max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Rows and columns of the 4x4 block that decouples `c12, c23, c14, c34` in the curve system.
pub const CURVE_SUBSYSTEM_ROWS: [usize; 4] = [2, 3, 7, 8];
pub const CURVE_SUBSYSTEM_COLS: [usize; 4] = [1, 5, 3, 8];

/// `-A^2 B^2 (A^2 - B^2)^4`.
pub fn expected_subsystem_determinant(t: &TannoStructure) -> f64 {
    let (a2, b2) = (t.slow_freq().powi(2), t.fast_freq().powi(2));
    -a2 * b2 * (a2 - b2).powi(4)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramSolution {
    tanno: TannoStructure,
    pub unknowns: SystemVector,
    /// Symmetric matrix `<c_i, c_j>`.
    pub gram: Matrix4<f64>,
    pub norms: [f64; 4],
    pub residual: f64,
    pub condition: f64,
}

/// Column-pivoted QR solve with degeneracy and conditioning guards.
pub fn solve_gram(system: &GramSystem) -> Result<GramSolution> {
    let a = system.tanno.a();
    if 1.0 - a <= DEGENERATE_MARGIN + 1e-12 {
        return Err(Error::IllConditioned {
            reason: format!("a = {a} is within {DEGENERATE_MARGIN} of 1, where A and B merge"),
        });
    }
    let condition = system.condition_number();
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned {
            reason: format!("condition number {condition:.3e}"),
        });
    }
    // Row and column equilibration, then one step of iterative refinement.
    let rows = SystemVector::from_fn(|r, _| 1.0 / system.matrix.row(r).amax());
    let cols = SystemVector::from_fn(|k, _| 1.0 / system.matrix.column(k).amax());
    let scaled = SystemMatrix::from_fn(|r, k| rows[r] * system.matrix[(r, k)] * cols[k]);
    let qr = scaled.col_piv_qr();
    let singular = || Error::IllConditioned {
        reason: "QR factorization is singular".into(),
    };
    let mut y = qr.solve(&system.rhs.component_mul(&rows)).ok_or_else(singular)?;
    let defect = (system.rhs - system.matrix * y.component_mul(&cols)).component_mul(&rows);
    y += qr.solve(&defect).ok_or_else(singular)?;
    let unknowns = y.component_mul(&cols);
    let gram = Matrix4::from_fn(|i, j| unknowns[unknown_index(i, j)]);
    let norms = [0, 1, 2, 3].map(|i| gram[(i, i)].max(0.0).sqrt());
    Ok(GramSolution {
        tanno: system.tanno,
        residual: system.residual(&unknowns),
        unknowns,
        gram,
        norms,
        condition,
    })
}

impl GramSolution {
    pub fn tanno(&self) -> &TannoStructure {
        &self.tanno
    }

    /// `diag(B, B, A, A) / (A + B)`.
    pub fn expected(t: &TannoStructure) -> Matrix4<f64> {
        let (p, q) = (t.slow_weight(), t.fast_weight());
        Matrix4::from_diagonal(&Vector4::new(p, p, q, q))
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    worst = worst.max(self.gram[(i, j)].abs());
                }
            }
        }
        worst
    }

    /// Largest entrywise deviation from [`GramSolution::expected`].
    pub fn deviation_from_closed_form(&self) -> f64 {
        (self.gram - GramSolution::expected(&self.tanno)).amax()
    }

    fn consistent(&self) -> Result<()> {
        let g = &self.gram;
        let checks = [
            (self.max_off_diagonal(), "coefficient vectors are not orthogonal"),
            ((g[(0, 0)] - g[(1, 1)]).abs(), "|c1| != |c2|"),
            ((g[(2, 2)] - g[(3, 3)]).abs(), "|c3| != |c4|"),
        ];
        for (residual, reason) in checks {
            if !(residual <= SOLUTION_TOL) {
                return Err(Error::InconsistentSolution {
                    reason: format!("{reason} (residual {residual:.3e})"),
                });
            }
        }
        if self.norms.iter().any(|&n| !(n > 0.0)) {
            return Err(Error::InconsistentSolution {
                reason: "a coefficient vector vanishes".into(),
            });
        }
        Ok(())
    }

    /// `c_i = |c_i| e_i` with `e2 = -sign J e1`, `e4 = sign J e3`.
    pub fn coefficient_vectors(&self, frame: &LegendreFrame, branch: Branch) -> Result<[Vec4; 4]> {
        self.consistent()?;
        let sign = match branch {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        };
        let e1 = frame.e1();
        let e3 = frame.e3();
        Ok([
            e1 * self.norms[0],
            -j_apply(&e1) * (sign * self.norms[1]),
            e3 * self.norms[2],
            j_apply(&e3) * (sign * self.norms[3]),
        ])
    }
}

/// Sign choice `<e1, J e2> = -<e3, J e4> = +-1` left open by the Gram data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `e2 = -J e1`, `e4 = J e3`.
    Positive,
    /// `e2 = J e1`, `e4 = -J e3`; traces the same curve backwards.
    Negative,
}

/// `cos(As) c1 + sin(As) c2 + cos(Bs) c3 + sin(Bs) c4` from a solved Gram matrix.
pub fn reconstruct_curve(solution: &GramSolution, frame: &LegendreFrame, branch: Branch) -> Result<ClosedFormCurve> {
    let [c1, c2, c3, c4] = solution.coefficient_vectors(frame, branch)?;
    let t = solution.tanno;
    Ok(ClosedFormCurve::new(
        vec![
            TrigMode::new(t.slow_freq(), 0.0, c1, c2),
            TrigMode::new(t.fast_freq(), 0.0, c3, c4),
        ],
        (0.0, 2.0 * std::f64::consts::PI / t.slow_freq()),
    ))
}

/// Cylinder patch from a solved Gram matrix; `x_v = xi` selects the positive branch.
pub fn reconstruct_cylinder(solution: &GramSolution, frame: &LegendreFrame, branch: Branch) -> Result<HopfCylinderPatch> {
    let coeffs = solution.coefficient_vectors(frame, branch)?;
    Ok(HopfCylinderPatch::from_coefficients(&solution.tanno, frame, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::SpaceCurve;
    use crate::generators::{hopf_cylinder, legendre_biharmonic_curve};

    /// Rows as they are customarily written, entered by hand.
    fn printed_curve_rows(t: &TannoStructure) -> [[f64; 10]; 10] {
        let (a, b) = (t.slow_freq(), t.fast_freq());
        let mut rows = [[0.0; 10]; 10];
        let set = |row: &mut [f64; 10], entries: &[((usize, usize), f64)]| {
            for &((i, j), v) in entries {
                row[unknown_index(i - 1, j - 1)] = v;
            }
        };
        set(&mut rows[0], &[((1, 1), 1.0), ((1, 3), 2.0), ((3, 3), 1.0)]);
        set(&mut rows[1], &[((2, 2), a * a), ((2, 4), 2.0 * a * b), ((4, 4), b * b)]);
        set(&mut rows[2], &[((1, 2), a), ((2, 3), a), ((1, 4), b), ((3, 4), b)]);
        set(&mut rows[3], &[((1, 2), a.powi(3)), ((2, 3), a * b * b), ((1, 4), a * a * b), ((3, 4), b.powi(3))]);
        set(&mut rows[4], &[((1, 1), a.powi(4)), ((1, 3), 2.0 * a * a * b * b), ((3, 3), b.powi(4))]);
        set(&mut rows[5], &[((1, 1), a * a), ((1, 3), a * a + b * b), ((3, 3), b * b)]);
        set(&mut rows[6], &[((2, 2), a.powi(4)), ((2, 4), a * b.powi(3) + a.powi(3) * b), ((4, 4), b.powi(4))]);
        set(&mut rows[7], &[((1, 2), a.powi(5)), ((2, 3), a.powi(3) * b * b), ((1, 4), a * a * b.powi(3)), ((3, 4), b.powi(5))]);
        set(&mut rows[8], &[((1, 2), a.powi(3)), ((2, 3), a.powi(3)), ((1, 4), b.powi(3)), ((3, 4), b.powi(3))]);
        set(&mut rows[9], &[((2, 2), a.powi(6)), ((2, 4), 2.0 * a.powi(3) * b.powi(3)), ((4, 4), b.powi(6))]);
        rows
    }

    fn printed_cylinder_rows(t: &TannoStructure) -> [[f64; 10]; 10] {
        let (a, b) = (t.slow_freq(), t.fast_freq());
        let mut rows = [[0.0; 10]; 10];
        let set = |row: &mut [f64; 10], entries: &[((usize, usize), f64)]| {
            for &((i, j), v) in entries {
                row[unknown_index(i - 1, j - 1)] = v;
            }
        };
        set(&mut rows[0], &[((1, 1), 1.0), ((1, 3), 2.0), ((3, 3), 1.0)]);
        set(&mut rows[1], &[((1, 2), a), ((1, 4), b), ((2, 3), a), ((3, 4), b)]);
        set(&mut rows[2], &[((1, 2), -1.0), ((1, 4), 1.0), ((2, 3), -1.0), ((3, 4), 1.0)]);
        set(&mut rows[3], &[((2, 2), -a), ((2, 4), a - b), ((4, 4), b)]);
        set(&mut rows[4], &[((2, 2), a * a), ((2, 4), 2.0 * a * b), ((4, 4), b * b)]);
        set(&mut rows[5], &[((2, 2), 1.0), ((2, 4), -2.0), ((4, 4), 1.0)]);
        set(&mut rows[6], &[((1, 2), -a), ((1, 4), a), ((2, 3), b), ((3, 4), -b)]);
        set(&mut rows[7], &[((1, 2), -a * a), ((1, 4), -a * b), ((2, 3), a * b), ((3, 4), b * b)]);
        set(&mut rows[8], &[((1, 1), a * a), ((1, 3), -2.0 * a * b), ((3, 3), b * b)]);
        set(&mut rows[9], &[((1, 1), -a), ((1, 3), b - a), ((3, 3), b)]);
        rows
    }

    fn assert_rows_match(system: &GramSystem, printed: &[[f64; 10]; 10]) {
        for (r, row) in printed.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                assert!(
                    (system.matrix[(r, k)] - v).abs() <= 1e-12 * (1.0 + v.abs()),
                    "row {r} ({}) column {}: {} vs {v}",
                    system.labels[r],
                    UNKNOWNS[k],
                    system.matrix[(r, k)]
                );
            }
        }
    }

    #[test]
    fn unknown_ordering() {
        let names: Vec<String> = (0..4)
            .flat_map(|i| (i..4).map(move |j| format!("c{}{}", i + 1, j + 1)))
            .collect();
        for (i, n) in names.iter().enumerate() {
            assert_eq!(UNKNOWNS[i], n);
        }
        assert_eq!(unknown_index(3, 1), unknown_index(1, 3));
    }

    #[test]
    fn assembled_rows_match_customary_forms() {
        for a in [0.1, 0.5, 0.8] {
            let t = TannoStructure::new(a).unwrap();
            assert_rows_match(&build_curve_system(&t), &printed_curve_rows(&t));
            assert_rows_match(&build_cylinder_system(&t), &printed_cylinder_rows(&t));
        }
        let t = TannoStructure::new(0.5).unwrap();
        let curve = build_curve_system(&t);
        assert_eq!(curve.rhs[1], 2.0);
        let cyl = build_cylinder_system(&t);
        assert_eq!(cyl.rhs[9], 0.0);
        assert!((cyl.rhs[5] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn worked_subsystem_determinant() {
        let t = TannoStructure::new(0.5).unwrap();
        let d = build_curve_system(&t).subsystem_determinant(CURVE_SUBSYSTEM_ROWS, CURVE_SUBSYSTEM_COLS);
        assert!((d + 9216.0).abs() <= 1e-8 * 9216.0, "{d}");
        assert!((expected_subsystem_determinant(&t) + 9216.0).abs() <= 1e-9);
    }

    #[test]
    fn both_systems_give_the_closed_form() {
        for k in 1..=20 {
            let a = 0.02 + 0.95 * (k as f64 - 1.0) / 19.0;
            let t = TannoStructure::new(a).unwrap();
            let sc = solve_gram(&build_curve_system(&t)).unwrap();
            let sy = solve_gram(&build_cylinder_system(&t)).unwrap();
            assert!(sc.deviation_from_closed_form() <= 1e-10, "a={a}: {}", sc.deviation_from_closed_form());
            assert!(sy.deviation_from_closed_form() <= 1e-10, "a={a}");
            assert!((sc.gram - sy.gram).amax() <= 1e-10);
            assert!(sc.residual <= 1e-10 && sy.residual <= 1e-10, "{} {}", sc.residual, sy.residual);
            assert!((sc.gram.trace() - 2.0).abs() <= 1e-10);
            let det = (t.slow_freq() * t.fast_freq()).powi(2) / (t.slow_freq() + t.fast_freq()).powi(4);
            assert!((sc.gram.determinant() - det).abs() <= 1e-10);
        }
    }

    #[test]
    fn near_round_sphere_is_refused() {
        let t = TannoStructure::new(0.999).unwrap();
        assert!(matches!(solve_gram(&build_curve_system(&t)), Err(Error::IllConditioned { .. })));
        assert!(matches!(solve_gram(&build_cylinder_system(&t)), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn reconstruction_reproduces_generators() {
        let t = TannoStructure::new(0.5).unwrap();
        let f = LegendreFrame::default();
        let sol = solve_gram(&build_curve_system(&t)).unwrap();
        let c = reconstruct_curve(&sol, &f, Branch::Positive).unwrap();
        let r = reconstruct_curve(&sol, &f, Branch::Negative).unwrap();
        let g = legendre_biharmonic_curve(&t, &f);
        for k in 0..100 {
            let s = -5.0 + 0.1 * k as f64;
            assert!((c.point(s) - g.point(s)).amax() <= 1e-12);
            assert!((r.point(s) - g.point(-s)).amax() <= 1e-12);
        }
        let patch = reconstruct_cylinder(&solve_gram(&build_cylinder_system(&t)).unwrap(), &f, Branch::Positive).unwrap();
        let reference = hopf_cylinder(&t, &f);
        for (u, v) in [(0.0, 0.0), (0.4, 1.0)] {
            let x = patch.point(u, v);
            assert!((x - reference.point(u, v)).amax() <= 1e-12);
            assert!((patch.partial(0, 1, u, v) + j_apply(&x) / t.a()).amax() <= 1e-12);
        }
        let wrong = reconstruct_cylinder(&sol, &f, Branch::Negative).unwrap();
        let x = wrong.point(0.4, 1.0);
        assert!((wrong.partial(0, 1, 0.4, 1.0) + j_apply(&x) / t.a()).amax() > 0.1);
    }

    #[test]
    fn inconsistent_solutions_are_rejected() {
        let t = TannoStructure::new(0.5).unwrap();
        let mut sol = solve_gram(&build_curve_system(&t)).unwrap();
        sol.gram[(0, 1)] = 0.1;
        sol.gram[(1, 0)] = 0.1;
        assert!(matches!(
            reconstruct_curve(&sol, &LegendreFrame::default(), Branch::Positive),
            Err(Error::InconsistentSolution { .. })
        ));
    }
}
