//! Closed-form constructors: the biharmonic Legendre curves, helices used
//! as controls, Reeb orbits, Hopf cylinders and Cartan-Vranceanu curves.

pub mod cartan_vranceanu;
pub mod cylinder;

use std::f64::consts::PI;

use serde::Serialize;

pub use cartan_vranceanu::{cartan_vranceanu, CartanVranceanu, CvCurve, CvParams, CvSpace};
pub use cylinder::{
    cylinder_geodesic, cylinder_pde_residuals, hopf_cylinder, geodesic_tension_norms, HopfCylinderPatch,
};

use crate::ambient::{j_apply, Vec4};
use crate::curve::{ClosedFormCurve, TrigMode};
use crate::error::{Error, Result};
use crate::sasakian::TannoStructure;

/// Frame tolerance for unit length and orthogonality.
pub const FRAME_TOL: f64 = 1e-12;

/// Orthonormal pair `{e1, e3}` with `e3` orthogonal to `J e1`.
///
/// The full frame is `e2 = -J e1`, `e4 = J e3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LegendreFrame {
    e1: Vec4,
    e3: Vec4,
}

impl Default for LegendreFrame {
    fn default() -> Self {
        LegendreFrame {
            e1: Vec4::new(1.0, 0.0, 0.0, 0.0),
            e3: Vec4::new(0.0, 1.0, 0.0, 0.0),
        }
    }
}

impl LegendreFrame {
    pub fn new(e1: Vec4, e3: Vec4) -> Result<Self> {
        let checks = [
            ((e1.norm_squared() - 1.0).abs(), "e1 is not a unit vector"),
            ((e3.norm_squared() - 1.0).abs(), "e3 is not a unit vector"),
            (e1.dot(&e3).abs(), "e1 and e3 are not orthogonal"),
            (e3.dot(&j_apply(&e1)).abs(), "e3 is not orthogonal to J e1"),
        ];
        for (residual, reason) in checks {
            if !(residual <= FRAME_TOL) {
                return Err(Error::InvalidFrame {
                    reason: format!("{reason} (residual {residual:.3e})"),
                });
            }
        }
        Ok(LegendreFrame { e1, e3 })
    }

    /// Frame from the eight components of `e1` followed by `e3`.
    pub fn from_components(c: &[f64]) -> Result<Self> {
        if c.len() != 8 {
            return Err(Error::InvalidFrame {
                reason: format!("expected 8 components, got {}", c.len()),
            });
        }
        LegendreFrame::new(Vec4::from_column_slice(&c[..4]), Vec4::from_column_slice(&c[4..]))
    }

    pub fn e1(&self) -> Vec4 {
        self.e1
    }

    pub fn e2(&self) -> Vec4 {
        -j_apply(&self.e1)
    }

    pub fn e3(&self) -> Vec4 {
        self.e3
    }

    pub fn e4(&self) -> Vec4 {
        j_apply(&self.e3)
    }

    pub fn basis(&self) -> [Vec4; 4] {
        [self.e1(), self.e2(), self.e3(), self.e4()]
    }

    pub fn components(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        out[..4].copy_from_slice(self.e1.as_slice());
        out[4..].copy_from_slice(self.e3.as_slice());
        out
    }
}

/// Legendre helix with frequencies `slow < fast`, `slow * fast = 1/a`.
fn legendre_helix_with(frame: &LegendreFrame, slow: f64, fast: f64, domain: (f64, f64)) -> ClosedFormCurve {
    let r1 = (fast / (slow + fast)).sqrt();
    let r2 = (slow / (slow + fast)).sqrt();
    ClosedFormCurve::new(
        vec![
            TrigMode::new(slow, 0.0, frame.e1() * r1, frame.e2() * r1),
            TrigMode::new(fast, 0.0, frame.e3() * r2, frame.e4() * r2),
        ],
        domain,
    )
}

/// The unit-speed proper-biharmonic Legendre curve
/// `sqrt(B/(A+B)) (cos(As) e1 - sin(As) J e1) + sqrt(A/(A+B)) (cos(Bs) e3 + sin(Bs) J e3)`
/// on `s in [0, 2 pi / A]`.
pub fn legendre_biharmonic_curve(t: &TannoStructure, frame: &LegendreFrame) -> ClosedFormCurve {
    legendre_helix_with(frame, t.slow_freq(), t.fast_freq(), (0.0, 2.0 * PI / t.slow_freq()))
}

/// Unit-speed Legendre helix of geodesic curvature `kappa >= 0`.
///
/// `kappa = sqrt(c - 1)` reproduces [`legendre_biharmonic_curve`] and
/// `kappa = 0` gives a Legendre great circle.
pub fn legendre_helix(t: &TannoStructure, frame: &LegendreFrame, kappa: f64) -> Result<ClosedFormCurve> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
            expected: "kappa >= 0",
        });
    }
    let slow = 0.5 * (-kappa + (kappa * kappa + 4.0 / t.a()).sqrt());
    Ok(legendre_helix_with(frame, slow, slow + kappa, (0.0, 2.0 * PI / slow)))
}

/// Legendre helix whose slow frequency is `t.slow_freq() + delta`; a
/// frequency-perturbed control that is neither geodesic nor biharmonic.
pub fn perturbed_helix(t: &TannoStructure, frame: &LegendreFrame, delta: f64) -> ClosedFormCurve {
    let slow = t.slow_freq() + delta;
    let fast = 1.0 / (t.a() * slow);
    let (slow, fast) = if slow <= fast { (slow, fast) } else { (fast, slow) };
    legendre_helix_with(frame, slow, fast, (0.0, 2.0 * PI / slow))
}

/// Round great circle `cos(w s) e1 + sin(w s) J e1` (not unit speed for `g` in general).
pub fn hopf_great_circle(frame: &LegendreFrame, freq: f64) -> ClosedFormCurve {
    let e1 = frame.e1();
    ClosedFormCurve::new(vec![TrigMode::new(freq, 0.0, e1, j_apply(&e1))], (0.0, 2.0 * PI / freq.abs()))
}

/// Integral curve of `xi` through `z0`: `cos(t/a) z0 - sin(t/a) J z0`.
pub fn reeb_orbit(t: &TannoStructure, z0: &Vec4) -> ClosedFormCurve {
    ClosedFormCurve::new(
        vec![TrigMode::new(1.0 / t.a(), 0.0, *z0, -j_apply(z0))],
        (0.0, 2.0 * PI * t.a()),
    )
}

/// `a^2 gamma'''' + a (6 - 4a) gamma'' + gamma`.
pub fn ode_residual(t: &TannoStructure, curve: &ClosedFormCurve, s: f64) -> Vec4 {
    let a = t.a();
    curve.derivative(4, s) * (a * a) + curve.derivative(2, s) * (a * (6.0 - 4.0 * a)) + curve.derivative(0, s)
}

/// `tau2(j) + 4 (1 - a) tau(j)` for the inclusion `j` with
/// `tau(j) = a gamma'' + gamma` and `tau2(j) = a^2 gamma'''' + 2a gamma'' + (4a - 3) gamma`.
pub fn tension_relation_residual(t: &TannoStructure, curve: &ClosedFormCurve, s: f64) -> Vec4 {
    let a = t.a();
    let g0 = curve.derivative(0, s);
    let g2 = curve.derivative(2, s);
    let g4 = curve.derivative(4, s);
    let tau = g2 * a + g0;
    let tau2 = g4 * (a * a) + g2 * (2.0 * a) + g0 * (4.0 * a - 3.0);
    tau2 + tau * (4.0 * (1.0 - a))
}

/// The frame whose biharmonic curve is the ruling `u -> x(u, v0)`.
pub fn rotated_frame(frame: &LegendreFrame, t: &TannoStructure, v0: f64) -> LegendreFrame {
    let (sin, cos) = (v0 / t.a()).sin_cos();
    let [e1, e2, e3, e4] = frame.basis();
    LegendreFrame {
        e1: e1 * cos + e2 * sin,
        e3: e3 * cos - e4 * sin,
    }
}

/// Periods of the Hopf cylinder in the `(u, v)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeTorus {
    pub w1: [f64; 2],
    pub w2: [f64; 2],
}

impl LatticeTorus {
    /// Phase increments `(A du + dv/a, B du - dv/a)` of the two cylinder modes.
    pub fn phase_shift(t: &TannoStructure, w: &[f64; 2]) -> (f64, f64) {
        (
            t.slow_freq() * w[0] + w[1] / t.a(),
            t.fast_freq() * w[0] - w[1] / t.a(),
        )
    }

    pub fn area(&self) -> f64 {
        (self.w1[0] * self.w2[1] - self.w1[1] * self.w2[0]).abs()
    }

    /// Point `origin + p w1 + q w2`.
    pub fn point(&self, origin: [f64; 2], p: f64, q: f64) -> [f64; 2] {
        [
            origin[0] + p * self.w1[0] + q * self.w2[0],
            origin[1] + p * self.w1[1] + q * self.w2[1],
        ]
    }
}

pub fn lattice(t: &TannoStructure) -> LatticeTorus {
    let (sa, sb) = (t.slow_freq(), t.fast_freq());
    let sum = sa + sb;
    LatticeTorus {
        w1: [2.0 * PI / sum, 2.0 * PI / (sa * sum)],
        w2: [2.0 * PI / sum, -2.0 * PI / (sb * sum)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::SpaceCurve;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn worked() -> TannoStructure {
        TannoStructure::new(0.5).unwrap()
    }

    #[test]
    fn frame_validation() {
        assert!(LegendreFrame::new(Vec4::new(1.0, 0.0, 0.0, 0.0), Vec4::new(0.0, 0.0, 1.0, 0.0)).is_err());
        assert!(LegendreFrame::new(Vec4::new(2.0, 0.0, 0.0, 0.0), Vec4::new(0.0, 1.0, 0.0, 0.0)).is_err());
        assert!(LegendreFrame::from_components(&[1.0, 0.0, 0.0]).is_err());
        let f = LegendreFrame::from_components(&[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f, LegendreFrame::default());
        let basis = f.basis();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(basis[i].dot(&basis[j]), expected);
            }
        }
    }

    #[test]
    fn curve_at_zero_and_worked_coefficients() {
        let t = worked();
        let c = legendre_biharmonic_curve(&t, &LegendreFrame::default());
        let s3 = 3f64.sqrt();
        let p = c.point(0.0);
        assert_relative_eq!(p[0], ((s3 + 1.0) / (2.0 * s3)).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p[1], ((s3 - 1.0) / (2.0 * s3)).sqrt(), epsilon = 1e-15);
        assert_eq!((p[2], p[3]), (0.0, 0.0));
    }

    #[test]
    fn ode_residual_vanishes_only_on_the_right_frequencies() {
        let t = worked();
        let c = legendre_biharmonic_curve(&t, &LegendreFrame::default());
        for s in [0.0, 0.7, 3.0] {
            assert!(ode_residual(&t, &c, s).amax() <= 1e-11);
            assert!(tension_relation_residual(&t, &c, s).amax() <= 1e-11);
        }
        let circle = hopf_great_circle(&LegendreFrame::default(), 1.0);
        let r = ode_residual(&t, &circle, 0.4);
        assert!((r - circle.point(0.4) * (0.25 - 2.0 + 1.0)).amax() <= 1e-15);
        assert!((tension_relation_residual(&t, &circle, 0.4) - r).amax() <= 1e-14);
        let perturbed = perturbed_helix(&t, &LegendreFrame::default(), 0.01);
        assert!(ode_residual(&t, &perturbed, 0.4).amax() > 1e-4);
    }

    #[test]
    fn helix_family_endpoints() {
        let t = worked();
        let f = LegendreFrame::default();
        let h = legendre_helix(&t, &f, t.helix_curvature()).unwrap();
        let c = legendre_biharmonic_curve(&t, &f);
        for s in [0.0, 1.0, 2.0] {
            assert!((h.point(s) - c.point(s)).amax() <= 1e-14);
        }
        let g = legendre_helix(&t, &f, 0.0).unwrap();
        assert!(g.max_sphere_deviation(50) <= 1e-12);
        assert!(legendre_helix(&t, &f, -1.0).is_err());
    }

    #[test]
    fn reversed_curve_is_the_alternate_solution() {
        let t = worked();
        let f = LegendreFrame::default();
        let c = legendre_biharmonic_curve(&t, &f);
        let r = c.reversed();
        let (k1, k2) = (t.slow_weight().sqrt(), t.fast_weight().sqrt());
        for s in [0.2, 1.5] {
            let alt = f.e1() * (k1 * (t.slow_freq() * s).cos())
                + j_apply(&f.e1()) * (k1 * (t.slow_freq() * s).sin())
                + f.e3() * (k2 * (t.fast_freq() * s).cos())
                - j_apply(&f.e3()) * (k2 * (t.fast_freq() * s).sin());
            assert!((r.point(s) - alt).amax() <= 1e-15);
            assert!(ode_residual(&t, &r, s).amax() <= 1e-11);
        }
    }

    #[test]
    fn reeb_orbit_follows_xi() {
        let t = TannoStructure::new(0.3).unwrap();
        let z0 = Vec4::new(0.5, -0.5, 0.5, 0.5);
        let o = reeb_orbit(&t, &z0);
        for s in [0.0, 0.4] {
            assert!((o.velocity(s) - t.xi_at(&o.point(s))).amax() <= 1e-14);
        }
    }

    #[test]
    fn lattice_phases() {
        for a in [0.1, 0.5, 0.9] {
            let t = TannoStructure::new(a).unwrap();
            let l = lattice(&t);
            let (p1, q1) = LatticeTorus::phase_shift(&t, &l.w1);
            assert_relative_eq!(p1, 2.0 * PI, epsilon = 1e-12);
            assert!(q1.abs() <= 1e-12);
            let (p2, q2) = LatticeTorus::phase_shift(&t, &l.w2);
            assert!(p2.abs() <= 1e-12);
            assert_relative_eq!(q2, 2.0 * PI, epsilon = 1e-12);
            assert!(l.area() > 0.0);
            assert_relative_eq!(l.w1[1] - l.w2[1], 2.0 * PI * a, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn rotated_frames_are_legendre_frames(v0 in -20.0f64..20.0, a in 0.05f64..0.95) {
            let t = TannoStructure::new(a).unwrap();
            let f = rotated_frame(&LegendreFrame::default(), &t, v0);
            prop_assert!(LegendreFrame::new(f.e1(), f.e3()).is_ok());
            let [e1, e2, e3, e4] = LegendreFrame::default().basis();
            let (s, c) = (v0 / a).sin_cos();
            prop_assert!((f.e2() - (e2 * c - e1 * s)).amax() <= 1e-14);
            prop_assert!((f.e4() - (e3 * s + e4 * c)).amax() <= 1e-14);
        }

        #[test]
        fn generated_curve_is_unit_speed_and_legendre(a in 0.02f64..0.98, s in -50.0f64..50.0) {
            let t = TannoStructure::new(a).unwrap();
            let c = legendre_biharmonic_curve(&t, &LegendreFrame::default());
            let p = c.point(s);
            prop_assert!((p.norm_squared() - 1.0).abs() <= 1e-12);
            prop_assert!((t.norm_at(&p, &c.velocity(s)) - 1.0).abs() <= 1e-10);
            prop_assert!(t.eta_at(&p, &c.velocity(s)).abs() <= 1e-10);
        }
    }
}
