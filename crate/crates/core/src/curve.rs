//! Curves in S^3 and their biharmonicity data for the deformed metric.
//!
//! Sign conventions: `R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`,
//! and for a unit-speed curve `tau = nabla_T T`,
//! `tau2 = nabla_T^3 T - R(T, nabla_T T) T`.

use serde::Serialize;

use crate::ambient::Vec4;
use crate::connections::{deformed_covariant, ConnectionOracle, SampledField, VectorFieldAlongCurve};
use crate::error::{Error, Result};
use crate::jet::{Jet, VecJet, JET_CAP};
use crate::sasakian::{eta0_jet, phi0_jet, project_jet, TannoStructure};

/// Unit-speed tolerance for tension and bitension.
pub const UNIT_SPEED_TOL: f64 = 1e-6;
/// Curves slower than this are degenerate.
pub const MIN_SPEED: f64 = 1e-8;
/// Legendre tolerance for classification.
pub const LEGENDRE_TOL: f64 = 1e-6;

/// A parametrized curve in R^4 that can report Taylor jets.
pub trait SpaceCurve {
    /// Jet with derivatives `0..=order` at `s`.
    fn jet(&self, s: f64, order: usize) -> VecJet;

    fn domain(&self) -> (f64, f64);

    fn point(&self, s: f64) -> Vec4 {
        self.jet(s, 0).value()
    }

    fn velocity(&self, s: f64) -> Vec4 {
        self.jet(s, 1).derivative_value(1)
    }
}

/// `(d^k/dt^k cos, d^k/dt^k sin)` at `theta`, using exact quarter-turn shifts.
pub fn trig_derivative(theta: f64, k: usize) -> (f64, f64) {
    let (sin, cos) = theta.sin_cos();
    match k % 4 {
        0 => (cos, sin),
        1 => (-sin, cos),
        2 => (-cos, -sin),
        _ => (sin, -cos),
    }
}

/// `cos(freq s + phase) cos_coef + sin(freq s + phase) sin_coef`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigMode {
    pub freq: f64,
    pub phase: f64,
    pub cos_coef: Vec4,
    pub sin_coef: Vec4,
}

impl TrigMode {
    pub fn new(freq: f64, phase: f64, cos_coef: Vec4, sin_coef: Vec4) -> Self {
        TrigMode {
            freq,
            phase,
            cos_coef,
            sin_coef,
        }
    }

    pub fn derivative(&self, k: usize, s: f64) -> Vec4 {
        let (c, sn) = trig_derivative(self.freq * s + self.phase, k);
        (self.cos_coef * c + self.sin_coef * sn) * self.freq.powi(k as i32)
    }
}

/// A finite trigonometric sum with exact derivatives of every order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormCurve {
    modes: Vec<TrigMode>,
    domain: (f64, f64),
}

impl ClosedFormCurve {
    pub fn new(modes: Vec<TrigMode>, domain: (f64, f64)) -> Self {
        ClosedFormCurve { modes, domain }
    }

    pub fn modes(&self) -> &[TrigMode] {
        &self.modes
    }

    pub fn with_domain(mut self, domain: (f64, f64)) -> Self {
        self.domain = domain;
        self
    }

    /// `d^k gamma / ds^k` at `s`.
    pub fn derivative(&self, k: usize, s: f64) -> Vec4 {
        self.modes.iter().map(|m| m.derivative(k, s)).sum()
    }

    /// The curve `s -> gamma(-s)`.
    pub fn reversed(&self) -> ClosedFormCurve {
        let modes = self
            .modes
            .iter()
            .map(|m| TrigMode::new(-m.freq, m.phase, m.cos_coef, m.sin_coef))
            .collect();
        ClosedFormCurve::new(modes, (-self.domain.1, -self.domain.0))
    }

    /// Largest `| |gamma(s)|^2 - 1 |` over `n` evenly spaced samples.
    pub fn max_sphere_deviation(&self, n: usize) -> f64 {
        sample_grid(self.domain, n)
            .map(|s| (self.derivative(0, s).norm_squared() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

impl SpaceCurve for ClosedFormCurve {
    fn jet(&self, s: f64, order: usize) -> VecJet {
        let derivs: Vec<Vec4> = (0..=order.min(JET_CAP - 1)).map(|k| self.derivative(k, s)).collect();
        VecJet::from_derivatives(&derivs)
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

/// `n` evenly spaced parameters covering `domain` including both ends.
pub fn sample_grid(domain: (f64, f64), n: usize) -> impl Iterator<Item = f64> {
    let (lo, hi) = domain;
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |k| lo + k as f64 * step)
}

fn speed_jet(t: &TannoStructure, z: &VecJet) -> Jet {
    let v = z.differentiate();
    t.metric_jet(z, &v, &v).sqrt()
}

/// A curve reparametrized by `g`-arc length, measured from the start of the
/// base curve's domain.
pub struct ArcLengthCurve<'a, C: SpaceCurve> {
    base: &'a C,
    tanno: TannoStructure,
    nodes: Vec<f64>,
    lengths: Vec<f64>,
}

impl<'a, C: SpaceCurve> ArcLengthCurve<'a, C> {
    /// Builds the cumulative length table by trapezoid rule, doubling the
    /// resolution until the total length changes by less than `1e-8`.
    pub fn new(tanno: &TannoStructure, base: &'a C) -> Result<Self> {
        let (lo, hi) = base.domain();
        let speed = |s: f64| tanno.norm_at(&base.point(s), &base.velocity(s));
        let mut n = 64usize;
        let mut previous = f64::NAN;
        loop {
            let h = (hi - lo) / n as f64;
            let nodes: Vec<f64> = (0..=n).map(|k| lo + k as f64 * h).collect();
            let speeds: Vec<f64> = nodes.iter().map(|&s| speed(s)).collect();
            if let Some((k, &v)) = speeds.iter().enumerate().find(|(_, &v)| v < MIN_SPEED) {
                return Err(Error::DegenerateCurve { s: nodes[k], speed: v });
            }
            let mut lengths = vec![0.0; n + 1];
            for k in 1..=n {
                lengths[k] = lengths[k - 1] + 0.5 * h * (speeds[k - 1] + speeds[k]);
            }
            let total = lengths[n];
            if (total - previous).abs() < 1e-8 || n >= 1 << 20 {
                return Ok(ArcLengthCurve {
                    base,
                    tanno: tanno.clone(),
                    nodes,
                    lengths,
                });
            }
            previous = total;
            n *= 2;
        }
    }

    pub fn total_length(&self) -> f64 {
        *self.lengths.last().unwrap()
    }

    /// Length from the start to `t`, Simpson-corrected inside the bracketing cell.
    fn length_at(&self, t: f64) -> f64 {
        let h = self.nodes[1] - self.nodes[0];
        let k = (((t - self.nodes[0]) / h).floor().max(0.0) as usize).min(self.nodes.len() - 2);
        let t0 = self.nodes[k];
        let speed = |s: f64| self.tanno.norm_at(&self.base.point(s), &self.base.velocity(s));
        let mid = 0.5 * (t0 + t);
        self.lengths[k] + (t - t0) / 6.0 * (speed(t0) + 4.0 * speed(mid) + speed(t))
    }

    /// Base parameter at arc length `sigma`.
    pub fn base_parameter(&self, sigma: f64) -> f64 {
        let k = self.lengths.partition_point(|&l| l < sigma).clamp(1, self.lengths.len() - 1);
        let (l0, l1) = (self.lengths[k - 1], self.lengths[k]);
        let w = if l1 > l0 { (sigma - l0) / (l1 - l0) } else { 0.0 };
        let mut t = self.nodes[k - 1] + w * (self.nodes[k] - self.nodes[k - 1]);
        for _ in 0..8 {
            let v = self.tanno.norm_at(&self.base.point(t), &self.base.velocity(t));
            let step = (self.length_at(t) - sigma) / v;
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        t
    }
}

impl<C: SpaceCurve> SpaceCurve for ArcLengthCurve<'_, C> {
    fn jet(&self, sigma: f64, order: usize) -> VecJet {
        let t0 = self.base_parameter(sigma);
        let len = order.min(JET_CAP - 1) + 1;
        let base = self.base.jet(t0, len);
        let inv_speed = speed_jet(&self.tanno, &base).recip();
        // dt/dsigma = 1 / speed(t); each Picard sweep fixes one more coefficient.
        let mut delta = Jet::from_coefficients(&[0.0, inv_speed.value()]).truncate(len);
        for _ in 0..len {
            delta = inv_speed.compose(&delta).integrate(0.0).truncate(len);
        }
        base.compose(&delta).truncate(len)
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.total_length())
    }
}

/// How `nabla` of the deformed metric is evaluated.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Route {
    /// Closed-form difference tensor against the round connection, on jets.
    #[default]
    Analytic,
    /// Chart Christoffel symbols with finite differences.
    Oracle(ConnectionOracle),
}

/// `nabla_{dir} V` with `dir` the parameter derivative of `z`, exact on jets.
pub fn analytic_covariant(t: &TannoStructure, z: &VecJet, v: &VecJet) -> VecJet {
    let dir = z.differentiate();
    let k = t.a() - 1.0;
    project_jet(z, &v.differentiate())
        - (phi0_jet(z, v).scale(eta0_jet(z, &dir)) + phi0_jet(z, &dir).scale(eta0_jet(z, v))) * k
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrenetData {
    pub speed: f64,
    pub tangent: Vec4,
    pub curvature: f64,
    /// Unit principal normal, absent along geodesic points.
    pub normal: Option<Vec4>,
}

pub fn frenet(t: &TannoStructure, curve: &dyn SpaceCurve, s: f64, route: &Route) -> Result<FrenetData> {
    let z = curve.jet(s, 3);
    let p = z.value();
    let raw_speed = t.norm_at(&p, &z.derivative_value(1));
    if raw_speed < MIN_SPEED {
        return Err(Error::DegenerateCurve { s, speed: raw_speed });
    }
    let speed = speed_jet(t, &z);
    let unit = z.differentiate().scale(speed.recip());
    let accel = match route {
        Route::Analytic => analytic_covariant(t, &z, &unit).value(),
        Route::Oracle(oracle) => {
            let field = VectorFieldAlongCurve::from_jets(|x| {
                let z = curve.jet(x, 2);
                z.differentiate().scale(speed_jet(t, &z).recip())
            });
            deformed_covariant(t, oracle, &field, curve, s)?
        }
    } / speed.value();
    let curvature = t.norm_at(&p, &accel);
    Ok(FrenetData {
        speed: speed.value(),
        tangent: unit.value(),
        curvature,
        normal: (curvature > MIN_SPEED).then(|| accel / curvature),
    })
}

fn check_unit_speed(t: &TannoStructure, curve: &dyn SpaceCurve, s: f64) -> Result<()> {
    let speed = t.norm_at(&curve.point(s), &curve.velocity(s));
    if (speed - 1.0).abs() > UNIT_SPEED_TOL {
        return Err(Error::NotUnitSpeed { s, speed });
    }
    Ok(())
}

/// `[nabla_T T, nabla_T^2 T, nabla_T^3 T]` along a unit-speed curve.
pub fn covariant_tower(t: &TannoStructure, curve: &dyn SpaceCurve, s: f64, route: &Route) -> Result<[Vec4; 3]> {
    match route {
        Route::Analytic => {
            let z = curve.jet(s, 4);
            let w1 = analytic_covariant(t, &z, &z.differentiate());
            let w2 = analytic_covariant(t, &z, &w1);
            let w3 = analytic_covariant(t, &z, &w2);
            Ok([w1.value(), w2.value(), w3.value()])
        }
        Route::Oracle(oracle) => {
            let h = oracle.field_step;
            let velocity = VectorFieldAlongCurve::velocity(curve);
            let w1 = SampledField::tabulate(s - 4.0 * h, h, 9, |x| deformed_covariant(t, oracle, &velocity, curve, x))?;
            let w1_field = VectorFieldAlongCurve::Sampled(w1);
            let w2 = SampledField::tabulate(s - 2.0 * h, h, 5, |x| deformed_covariant(t, oracle, &w1_field, curve, x))?;
            let w2_field = VectorFieldAlongCurve::Sampled(w2);
            let w3 = deformed_covariant(t, oracle, &w2_field, curve, s)?;
            Ok([w1_field.value_and_derivative(s)?.0, w2_field.value_and_derivative(s)?.0, w3])
        }
    }
}

/// `tau = nabla_T T` of a unit-speed curve.
pub fn tension(t: &TannoStructure, curve: &dyn SpaceCurve, s: f64, route: &Route) -> Result<Vec4> {
    check_unit_speed(t, curve, s)?;
    match route {
        Route::Analytic => {
            let z = curve.jet(s, 2);
            Ok(analytic_covariant(t, &z, &z.differentiate()).value())
        }
        Route::Oracle(oracle) => deformed_covariant(t, oracle, &VectorFieldAlongCurve::velocity(curve), curve, s),
    }
}

/// `tau2 = nabla_T^3 T - R(T, nabla_T T) T` of a unit-speed curve.
pub fn bitension(t: &TannoStructure, curve: &dyn SpaceCurve, s: f64, route: &Route) -> Result<Vec4> {
    check_unit_speed(t, curve, s)?;
    let [w1, _, w3] = covariant_tower(t, curve, s, route)?;
    let p = curve.point(s);
    let tan = curve.velocity(s);
    Ok(w3 - t.curvature_at(&p, &tan, &w1, &tan))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "geodesic/minimal")]
    Geodesic,
    #[serde(rename = "proper-biharmonic")]
    ProperBiharmonic,
    #[serde(rename = "neither")]
    Neither,
}

/// Thresholds for [`classify`].
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub samples: usize,
    /// Allowed spread of the curvature along the curve and of `kappa^2 - (c-1)`.
    pub helix_tol: f64,
    /// A bitension norm below this counts as biharmonic.
    pub bitension_tol: f64,
}

impl ClassifyOptions {
    pub fn for_route(route: &Route) -> Self {
        match route {
            Route::Analytic => ClassifyOptions {
                samples: 50,
                helix_tol: 1e-6,
                bitension_tol: 1e-6,
            },
            Route::Oracle(_) => ClassifyOptions {
                samples: 50,
                helix_tol: 1e-4,
                bitension_tol: 1e-3,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiharmonicReport {
    pub samples: Vec<f64>,
    pub curvature: Vec<f64>,
    pub tension_norms: Vec<f64>,
    pub bitension_norms: Vec<f64>,
    pub max_eta: f64,
    pub classification: Classification,
    pub criterion: String,
    /// Whether the direct bitension profile agrees with the helix criterion.
    pub bitension_agrees: bool,
}

/// Classifies a unit-speed Legendre curve by the helix criterion
/// `kappa constant, kappa^2 = c - 1`, cross-checked against `tau2` directly.
pub fn classify(
    t: &TannoStructure,
    curve: &dyn SpaceCurve,
    route: &Route,
    opts: &ClassifyOptions,
) -> Result<BiharmonicReport> {
    let (lo, hi) = curve.domain();
    let samples: Vec<f64> = sample_grid((lo, hi), opts.samples).collect();
    let mut max_eta: f64 = 0.0;
    for &s in &samples {
        max_eta = max_eta.max(t.eta_at(&curve.point(s), &curve.velocity(s)).abs());
    }
    if max_eta > LEGENDRE_TOL {
        return Err(Error::NotLegendre { max_eta });
    }

    let mut curvature = Vec::with_capacity(samples.len());
    let mut tension_norms = Vec::with_capacity(samples.len());
    let mut bitension_norms = Vec::with_capacity(samples.len());
    for &s in &samples {
        let p = curve.point(s);
        let tau = tension(t, curve, s, route)?;
        let tau2 = bitension(t, curve, s, route)?;
        let k = t.norm_at(&p, &tau);
        curvature.push(k);
        tension_norms.push(k);
        bitension_norms.push(t.norm_at(&p, &tau2));
    }

    let k_max = curvature.iter().cloned().fold(f64::MIN, f64::max);
    let k_min = curvature.iter().cloned().fold(f64::MAX, f64::min);
    let target = t.c() - 1.0;
    let classification = if k_max <= opts.helix_tol {
        Classification::Geodesic
    } else if k_max - k_min <= opts.helix_tol && (k_max * k_max - target).abs() <= opts.helix_tol * (1.0 + target) {
        Classification::ProperBiharmonic
    } else {
        Classification::Neither
    };
    let biharmonic = bitension_norms.iter().all(|&x| x <= opts.bitension_tol);
    let bitension_agrees = match classification {
        Classification::Neither => !biharmonic,
        _ => biharmonic,
    };
    let criterion = format!(
        "helix: kappa in [{k_min:.6e}, {k_max:.6e}], c - 1 = {target:.6e}; max |tau2| = {:.3e}",
        bitension_norms.iter().cloned().fold(0.0, f64::max)
    );
    Ok(BiharmonicReport {
        samples,
        curvature,
        tension_norms,
        bitension_norms,
        max_eta,
        classification,
        criterion,
        bitension_agrees,
    })
}
