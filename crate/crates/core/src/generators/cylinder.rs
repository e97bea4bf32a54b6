//! The biharmonic Hopf cylinder and its flat geodesics.

use serde::Serialize;

use super::LegendreFrame;
use crate::ambient::Vec4;
use crate::curve::{trig_derivative, ClosedFormCurve, TrigMode};
use crate::error::{Error, Result};
use crate::sasakian::TannoStructure;

/// `cos(ku u + kv v) cos_coef + sin(ku u + kv v) sin_coef`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceMode {
    pub ku: f64,
    pub kv: f64,
    pub cos_coef: Vec4,
    pub sin_coef: Vec4,
}

/// `x(u,v) = sqrt(B/(A+B)) (cos(Au + v/a) e1 + sin(Au + v/a) e2)
///         + sqrt(A/(A+B)) (cos(Bu - v/a) e3 + sin(Bu - v/a) e4)`.
///
/// `x_u` is the horizontal lift of the base curve's tangent and `x_v = xi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HopfCylinderPatch {
    tanno: TannoStructure,
    frame: LegendreFrame,
    modes: Vec<SurfaceMode>,
}

pub fn hopf_cylinder(t: &TannoStructure, frame: &LegendreFrame) -> HopfCylinderPatch {
    let r1 = t.slow_weight().sqrt();
    let r2 = t.fast_weight().sqrt();
    let [e1, e2, e3, e4] = frame.basis();
    HopfCylinderPatch::from_coefficients(t, frame, [e1 * r1, e2 * r1, e3 * r2, e4 * r2])
}

impl HopfCylinderPatch {
    /// `cos(Au + v/a) c1 + sin(Au + v/a) c2 + cos(Bu - v/a) c3 + sin(Bu - v/a) c4`.
    pub fn from_coefficients(t: &TannoStructure, frame: &LegendreFrame, c: [Vec4; 4]) -> Self {
        let inv_a = 1.0 / t.a();
        HopfCylinderPatch {
            tanno: *t,
            frame: *frame,
            modes: vec![
                SurfaceMode {
                    ku: t.slow_freq(),
                    kv: inv_a,
                    cos_coef: c[0],
                    sin_coef: c[1],
                },
                SurfaceMode {
                    ku: t.fast_freq(),
                    kv: -inv_a,
                    cos_coef: c[2],
                    sin_coef: c[3],
                },
            ],
        }
    }

    pub fn tanno(&self) -> &TannoStructure {
        &self.tanno
    }

    pub fn frame(&self) -> &LegendreFrame {
        &self.frame
    }

    pub fn point(&self, u: f64, v: f64) -> Vec4 {
        self.partial(0, 0, u, v)
    }

    /// `d^(i+j) x / du^i dv^j`.
    pub fn partial(&self, i: usize, j: usize, u: f64, v: f64) -> Vec4 {
        self.modes
            .iter()
            .map(|m| {
                let (c, s) = trig_derivative(m.ku * u + m.kv * v, i + j);
                (m.cos_coef * c + m.sin_coef * s) * (m.ku.powi(i as i32) * m.kv.powi(j as i32))
            })
            .sum()
    }

    /// The curve `t -> x(u0 + du t, v0 + dv t)`.
    pub fn line(&self, start: [f64; 2], direction: [f64; 2], domain: (f64, f64)) -> ClosedFormCurve {
        let modes = self
            .modes
            .iter()
            .map(|m| {
                TrigMode::new(
                    m.ku * direction[0] + m.kv * direction[1],
                    m.ku * start[0] + m.kv * start[1],
                    m.cos_coef,
                    m.sin_coef,
                )
            })
            .collect();
        ClosedFormCurve::new(modes, domain)
    }

    /// The ruling `u -> x(u, v0)`.
    pub fn ruling(&self, v0: f64, domain: (f64, f64)) -> ClosedFormCurve {
        self.line([0.0, v0], [1.0, 0.0], domain)
    }
}

/// `(a^2 x_uuuu + a (6 - 4a) x_uu + x,  a x_uuv - sqrt(c - 1) x_u + x_v)`.
pub fn cylinder_pde_residuals(t: &TannoStructure, patch: &HopfCylinderPatch, u: f64, v: f64) -> (Vec4, Vec4) {
    let a = t.a();
    let first = patch.partial(4, 0, u, v) * (a * a) + patch.partial(2, 0, u, v) * (a * (6.0 - 4.0 * a))
        + patch.point(u, v);
    let second = patch.partial(2, 1, u, v) * a - patch.partial(1, 0, u, v) * t.helix_curvature()
        + patch.partial(0, 1, u, v);
    (first, second)
}

/// Unit-speed geodesic `t -> x(u0 + c2 t, v0 + c1 t)` of the flat cylinder;
/// `c1` is the Reeb component of its direction.
pub fn cylinder_geodesic(
    patch: &HopfCylinderPatch,
    c1: f64,
    c2: f64,
    start: [f64; 2],
    domain: (f64, f64),
) -> Result<ClosedFormCurve> {
    let norm_sq = c1 * c1 + c2 * c2;
    if !((norm_sq - 1.0).abs() <= 1e-12) {
        return Err(Error::InvalidDirection { norm_sq });
    }
    Ok(patch.line(start, [c2, c1], domain))
}

/// Predicted `g`-norms `(|tau|, |tau2|) = (|c2 (c2 k - 2 c1)|, |2 c1 c2^2 (c2 k - 2 c1) k|)`,
/// `k = sqrt(c - 1)`, of the geodesic with direction `c1 xi + c2 x_u`.
pub fn geodesic_tension_norms(t: &TannoStructure, c1: f64, c2: f64) -> (f64, f64) {
    let k = t.helix_curvature();
    let factor = c2 * k - 2.0 * c1;
    ((c2 * factor).abs(), (2.0 * c1 * c2 * c2 * factor * k).abs())
}
