//! Cartan-Vranceanu metrics `ds^2_{l,m}` on R^3 and their Legendre helices.
//!
//! ```text
//! ds^2 = (dx^2 + dy^2) / D^2 + eta^2,   eta = dz + (l/2) (y dx - x dy) / D,   D = 1 + m (x^2 + y^2)
//! ```
//!
//! The candidate curve is `x = alpha sin(beta s + c1)`, `y = -alpha cos(beta s + c1)`,
//! `z = (l/2) s + c2`. Its residuals are reported together with a small
//! family of sign and placement variants.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use serde::Serialize;

use crate::ambient::Vec3;
use crate::connections::{christoffel_from_metric, METRIC_STEP};
use crate::curve::sample_grid;
use crate::error::{Error, Result};
use crate::report::{Check, VerificationReport};

/// Residual below which a variant counts as unit-speed and Legendre.
pub const VARIANT_TOL: f64 = 1e-10;
const SAMPLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CvParams {
    pub l: f64,
    pub m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
}

impl CvParams {
    /// `alpha^2 = (6m - l^2 + sqrt(32 m^2 - 12 m l^2 + l^4)) / (2 m^2)`, `beta = (1 + m alpha^2) / alpha`.
    pub fn new(l: f64, m: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(l != 0.0 && l.is_finite()) {
            return Err(Error::OutOfRange {
                name: "l",
                value: l,
                expected: "l != 0",
            });
        }
        if !(4.0 * m - l * l > 0.0) {
            return Err(Error::OutOfRange {
                name: "m",
                value: m,
                expected: "4m - l^2 > 0",
            });
        }
        let alpha_sq = (6.0 * m - l * l + (32.0 * m * m - 12.0 * m * l * l + l.powi(4)).sqrt()) / (2.0 * m * m);
        let alpha = alpha_sq.sqrt();
        Ok(CvParams {
            l,
            m,
            alpha,
            beta: (1.0 + m * alpha_sq) / alpha,
            c1,
            c2,
        })
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha * self.alpha
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CvSpace {
    pub l: f64,
    pub m: f64,
}

impl CvSpace {
    fn denominator(&self, p: &Vec3) -> f64 {
        1.0 + self.m * (p[0] * p[0] + p[1] * p[1])
    }

    /// Components of the contact form in `(dx, dy, dz)`.
    pub fn eta(&self, p: &Vec3) -> Vec3 {
        let d = self.denominator(p);
        Vec3::new(0.5 * self.l * p[1] / d, -0.5 * self.l * p[0] / d, 1.0)
    }

    pub fn metric(&self, p: &Vec3) -> Matrix3<f64> {
        let d = self.denominator(p);
        let e = self.eta(p);
        Matrix3::from_diagonal(&Vec3::new(1.0 / (d * d), 1.0 / (d * d), 0.0)) + e * e.transpose()
    }

    /// Sasakian space form of constant phi-sectional curvature `4m - 3` when `l = 2`, `m > 1`.
    pub fn phi_sectional_curvature(&self) -> Option<f64> {
        (self.l == 2.0 && self.m > 1.0).then(|| 4.0 * self.m - 3.0)
    }

    /// Geodesic curvature of a regular curve from its first two derivatives.
    pub fn curvature(&self, p: &Vec3, v: &Vec3, acc: &Vec3) -> Result<f64> {
        let metric = |q: &Vec3| self.metric(q);
        let gamma = christoffel_from_metric(&metric, p, METRIC_STEP)?;
        let g = self.metric(p);
        let cov = acc + gamma.contract(v, v);
        let speed_sq = (v.transpose() * g * v)[0];
        let normal = (cov - v * ((cov.transpose() * g * v)[0] / speed_sq)) / speed_sq;
        Ok((normal.transpose() * g * normal)[0].sqrt())
    }
}

/// `x = alpha sin(beta s + c1)`, `y = -alpha cos(beta s + c1)`, `z = z_slope s + c2`;
/// `swapped` exchanges the roles of sine and cosine.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvCurve {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub z_slope: f64,
    pub swapped: bool,
}

impl CvCurve {
    pub fn as_printed(p: &CvParams) -> Self {
        CvCurve {
            name: "z slope l/2".into(),
            alpha: p.alpha,
            beta: p.beta,
            c1: p.c1,
            c2: p.c2,
            z_slope: 0.5 * p.l,
            swapped: false,
        }
    }

    /// `k`-th derivative, `k <= 2`.
    pub fn derivative(&self, k: usize, s: f64) -> Vec3 {
        let theta = self.beta * s + self.c1 + k as f64 * PI / 2.0;
        let scale = self.alpha * self.beta.powi(k as i32);
        let (sin, cos) = theta.sin_cos();
        let (x, y) = if self.swapped {
            (scale * cos, -scale * sin)
        } else {
            (scale * sin, -scale * cos)
        };
        let z = match k {
            0 => self.z_slope * s + self.c2,
            1 => self.z_slope,
            _ => 0.0,
        };
        Vec3::new(x, y, z)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.beta.abs()
    }
}

/// Maximum unit-speed and Legendre residuals over one period.
pub fn curve_residuals(space: &CvSpace, curve: &CvCurve) -> (f64, f64) {
    let mut speed: f64 = 0.0;
    let mut legendre: f64 = 0.0;
    for s in sample_grid((0.0, curve.period()), SAMPLES) {
        let p = curve.derivative(0, s);
        let v = curve.derivative(1, s);
        speed = speed.max(((v.transpose() * space.metric(&p) * v)[0] - 1.0).abs());
        legendre = legendre.max(space.eta(&p).dot(&v).abs());
    }
    (speed, legendre)
}

/// Largest `|kappa^2 - (c - 1)|` over one period.
fn helix_defect(space: &CvSpace, curve: &CvCurve, c: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in sample_grid((0.0, curve.period()), SAMPLES) {
        let k = space.curvature(&curve.derivative(0, s), &curve.derivative(1, s), &curve.derivative(2, s))?;
        worst = worst.max((k * k - (c - 1.0)).abs());
    }
    Ok(worst)
}

/// Sign and placement variants of the candidate curve.
pub fn variant_family(p: &CvParams) -> Vec<CvCurve> {
    let base = CvCurve::as_printed(p);
    let slopes = [
        ("l/2", 0.5 * p.l),
        ("-l/2", -0.5 * p.l),
        ("l alpha/2", 0.5 * p.l * p.alpha),
        ("-l alpha/2", -0.5 * p.l * p.alpha),
    ];
    let mut out = Vec::new();
    for swapped in [false, true] {
        for (label, slope) in slopes {
            out.push(CvCurve {
                name: format!("z slope {label}{}", if swapped { ", sin/cos swapped" } else { "" }),
                z_slope: slope,
                swapped,
                ..base.clone()
            });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CartanVranceanu {
    pub params: CvParams,
    pub space: CvSpace,
    pub curve: CvCurve,
    /// First variant that is unit-speed and Legendre, if any.
    pub variant: Option<CvCurve>,
    pub report: VerificationReport,
}

/// Builds the space and curve and reports residuals; every check is report-only.
pub fn cartan_vranceanu(params: &CvParams) -> Result<CartanVranceanu> {
    let params = CvParams::new(params.l, params.m, params.c1, params.c2)?;
    let space = CvSpace {
        l: params.l,
        m: params.m,
    };
    let curve = CvCurve::as_printed(&params);
    let tag = format!("l={}, m={}", params.l, params.m);
    let mut report = VerificationReport::default();
    report.push(Check::report_only(format!("cv[{tag}]: alpha^2"), "alpha^2 closed form", params.alpha_sq(), f64::NAN));
    report.push(Check::report_only(format!("cv[{tag}]: beta"), "beta = (1 + m alpha^2) / alpha", params.beta, f64::NAN));

    let radius = sample_grid((0.0, curve.period()), SAMPLES)
        .map(|s| {
            let p = curve.derivative(0, s);
            (p[0] * p[0] + p[1] * p[1] - params.alpha_sq()).abs()
        })
        .fold(0.0, f64::max);
    report.push(Check::report_only(format!("cv[{tag}]: x^2 + y^2 - alpha^2"), "x^2 + y^2 = alpha^2", radius, VARIANT_TOL));

    let (speed, legendre) = curve_residuals(&space, &curve);
    report.push(Check::report_only(format!("cv[{tag}]: unit speed (as given)"), "ds^2(gamma', gamma') = 1", speed, VARIANT_TOL));
    report.push(Check::report_only(format!("cv[{tag}]: Legendre (as given)"), "eta(gamma') = 0", legendre, VARIANT_TOL).with_note(format!(
        "closed form |(l/2)(1 - alpha)| = {:.6e}",
        (0.5 * params.l * (1.0 - params.alpha)).abs()
    )));

    let variant = variant_family(&params).into_iter().find(|v| {
        let (s, l) = curve_residuals(&space, v);
        s <= VARIANT_TOL && l <= VARIANT_TOL
    });
    match &variant {
        Some(v) => {
            let (s, l) = curve_residuals(&space, v);
            report.push(Check::report_only(format!("cv[{tag}]: variant search"), "unit-speed Legendre variant", s.max(l), VARIANT_TOL).with_note(v.name.clone()));
        }
        None => report.push(Check::report_only(format!("cv[{tag}]: variant search"), "unit-speed Legendre variant", f64::NAN, VARIANT_TOL).with_note("no variant in the family")),
    }

    if let Some(c) = space.phi_sectional_curvature() {
        report.push(Check::report_only(format!("cv[{tag}]: phi-sectional curvature"), "c = 4m - 3", c, f64::NAN));
        report.push(Check::report_only(
            format!("cv[{tag}]: helix criterion (as given)"),
            "kappa^2 = c - 1",
            helix_defect(&space, &curve, c)?,
            1e-4,
        ));
        if let Some(v) = &variant {
            report.push(Check::report_only(
                format!("cv[{tag}]: helix criterion (variant)"),
                "kappa^2 = c - 1",
                helix_defect(&space, v, c)?,
                1e-4,
            ).with_note(v.name.clone()));
        }
    }

    Ok(CartanVranceanu {
        params,
        space,
        curve,
        variant,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_constants() {
        let p = CvParams::new(2.0, 2.0, 0.0, 0.0).unwrap();
        assert!((p.alpha_sq() - (8.0 + 48f64.sqrt()) / 8.0).abs() <= 1e-14);
        assert!((p.beta - (1.0 + 2.0 * p.alpha_sq()) / p.alpha).abs() <= 1e-14);
        let space = CvSpace { l: 2.0, m: 2.0 };
        assert_eq!(space.phi_sectional_curvature(), Some(5.0));
        assert!(CvParams::new(0.0, 2.0, 0.0, 0.0).is_err());
        assert!(CvParams::new(3.0, 2.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn printed_curve_has_the_predicted_legendre_defect() {
        let p = CvParams::new(2.0, 2.0, 0.3, -1.0).unwrap();
        let space = CvSpace { l: 2.0, m: 2.0 };
        let (speed, legendre) = curve_residuals(&space, &CvCurve::as_printed(&p));
        let defect = (1.0 - p.alpha).abs();
        assert!((legendre - defect).abs() <= 1e-12);
        assert!((speed - defect * defect).abs() <= 1e-12);
    }

    #[test]
    fn alpha_scaled_slope_is_unit_speed_legendre() {
        for (l, m) in [(2.0, 2.0), (2.0, 4.0), (1.0, 0.5)] {
            let r = cartan_vranceanu(&CvParams::new(l, m, 0.0, 0.0).unwrap()).unwrap();
            let v = r.variant.expect("a variant should exist");
            assert_eq!(v.name, "z slope l alpha/2");
            assert!(r.report.pass);
            assert!(r.report.checks.iter().all(|c| !c.asserted));
        }
    }

    #[test]
    fn contact_form_matches_metric() {
        let space = CvSpace { l: 2.0, m: 3.0 };
        let p = Vec3::new(0.2, -0.4, 1.0);
        let g = space.metric(&p);
        assert!((g - g.transpose()).amax() == 0.0);
        // the Reeb field d/dz is g-dual to eta
        let xi = Vec3::new(0.0, 0.0, 1.0);
        assert!(((g * xi) - space.eta(&p)).amax() <= 1e-15);
    }
}
