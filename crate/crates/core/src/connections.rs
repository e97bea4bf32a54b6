//! Levi-Civita connections along curves.
//!
//! * flat R^4: componentwise derivative of the field;
//! * round sphere `(S^3, g0)`: tangential projection of the flat derivative;
//! * deformed metric `g`: a numerical witness built from Christoffel symbols of
//!   `g` pulled back through a stereographic chart, with metric derivatives
//!   taken by central differences. No closed-form Christoffel symbols enter
//!   this path.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen};

use crate::ambient::{tangent_project, SpherePoint, StereoChart, Vec3, Vec4};
use crate::curve::SpaceCurve;
use crate::error::{Error, Result};
use crate::jet::VecJet;
use crate::sasakian::TannoStructure;

/// Central-difference step for metric component derivatives.
pub const METRIC_STEP: f64 = 1e-5;
/// Grid step for sampled fields along curves.
pub const FIELD_STEP: f64 = 1e-3;
/// Charts whose metric matrix exceeds this condition number are rejected.
pub const MAX_METRIC_CONDITION: f64 = 1e8;

/// A vector field along a curve, parametrized by the curve parameter.
pub enum VectorFieldAlongCurve<'a> {
    /// Value and exact derivative at each parameter.
    ClosedForm(Box<dyn Fn(f64) -> (Vec4, Vec4) + 'a>),
    Sampled(SampledField),
}

impl<'a> VectorFieldAlongCurve<'a> {
    /// Wraps a jet-valued field; the jet must carry at least one derivative.
    pub fn from_jets(f: impl Fn(f64) -> VecJet + 'a) -> Self {
        VectorFieldAlongCurve::ClosedForm(Box::new(move |s| {
            let j = f(s);
            (j.value(), j.derivative_value(1))
        }))
    }

    /// The velocity field `gamma'` of a curve.
    pub fn velocity(curve: &'a dyn SpaceCurve) -> Self {
        VectorFieldAlongCurve::from_jets(move |s| curve.jet(s, 2).differentiate())
    }

    pub fn constant(v: Vec4) -> Self {
        VectorFieldAlongCurve::ClosedForm(Box::new(move |_| (v, Vec4::zeros())))
    }

    pub fn value_and_derivative(&self, s: f64) -> Result<(Vec4, Vec4)> {
        match self {
            VectorFieldAlongCurve::ClosedForm(f) => Ok(f(s)),
            VectorFieldAlongCurve::Sampled(field) => field.value_and_derivative(s),
        }
    }
}

/// Field values on the uniform grid `start + k * step`.
#[derive(Clone, Debug)]
pub struct SampledField {
    start: f64,
    step: f64,
    values: Vec<Vec4>,
}

impl SampledField {
    pub fn new(start: f64, step: f64, values: Vec<Vec4>) -> Result<Self> {
        if values.len() < 5 || !(step > 0.0) {
            return Err(Error::InvalidGrid {
                len: values.len(),
                step,
            });
        }
        Ok(SampledField { start, step, values })
    }

    /// Samples `f` on `len` points starting at `start`.
    pub fn tabulate(start: f64, step: f64, len: usize, f: impl Fn(f64) -> Result<Vec4>) -> Result<Self> {
        let values = (0..len)
            .map(|k| f(start + k as f64 * step))
            .collect::<Result<Vec<_>>>()?;
        SampledField::new(start, step, values)
    }

    fn node_derivative(&self, k: usize) -> Vec4 {
        let v = &self.values;
        (v[k - 2] - v[k - 1] * 8.0 + v[k + 1] * 8.0 - v[k + 2]) / (12.0 * self.step)
    }

    /// Five-point central derivative; between nodes both value and derivative
    /// are linearly interpolated.
    pub fn value_and_derivative(&self, s: f64) -> Result<(Vec4, Vec4)> {
        let t = (s - self.start) / self.step;
        let last = (self.values.len() - 3) as f64;
        let eps = 1e-9;
        if t < 2.0 - eps || t > last + eps {
            return Err(Error::DomainBoundary { s });
        }
        let t = t.clamp(2.0, last);
        let k = t.round();
        if (t - k).abs() <= 1e-6 {
            let k = k as usize;
            return Ok((self.values[k], self.node_derivative(k)));
        }
        let lo = t.floor() as usize;
        let w = t - lo as f64;
        let value = self.values[lo] * (1.0 - w) + self.values[lo + 1] * w;
        let deriv = self.node_derivative(lo) * (1.0 - w) + self.node_derivative(lo + 1) * w;
        Ok((value, deriv))
    }
}

/// Componentwise derivative in R^4.
pub fn flat_derivative(field: &VectorFieldAlongCurve, s: f64) -> Result<Vec4> {
    field.value_and_derivative(s).map(|(_, d)| d)
}

/// Levi-Civita connection of the round metric along `curve`.
pub fn sphere_covariant(field: &VectorFieldAlongCurve, curve: &dyn SpaceCurve, s: f64) -> Result<Vec4> {
    let z = SpherePoint::normalize(&curve.point(s));
    Ok(tangent_project(&z, &flat_derivative(field, s)?))
}

/// Christoffel symbols `symbols[k][i][j]` in some coordinate system.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    pub symbols: [[[f64; 3]; 3]; 3],
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.symbols[k][i][j]
    }

    /// `Gamma^k_ij u^i v^j`.
    pub fn contract(&self, u: &Vec3, v: &Vec3) -> Vec3 {
        Vec3::from_fn(|k, _| {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    acc += self.symbols[k][i][j] * u[i] * v[j];
                }
            }
            acc
        })
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    worst = worst.max((self.symbols[k][i][j] - self.symbols[k][j][i]).abs());
                }
            }
        }
        worst
    }
}

/// Condition number of a symmetric matrix; infinite when not positive definite.
pub fn condition_number(m: &Matrix3<f64>) -> f64 {
    let eig = SymmetricEigen::new(*m).eigenvalues;
    let lo = eig.min();
    let hi = eig.max();
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Central differences `d metric / d y_l`, `l = 0..3`.
pub fn metric_derivatives(metric: &impl Fn(&Vec3) -> Matrix3<f64>, y: &Vec3, h: f64) -> [Matrix3<f64>; 3] {
    [0, 1, 2].map(|l| {
        let mut yp = *y;
        let mut ym = *y;
        yp[l] += h;
        ym[l] -= h;
        (metric(&yp) - metric(&ym)) / (2.0 * h)
    })
}

/// `Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)` from any metric field.
pub fn christoffel_from_metric(metric: &impl Fn(&Vec3) -> Matrix3<f64>, y: &Vec3, h: f64) -> Result<Christoffel> {
    let g = metric(y);
    let condition = condition_number(&g);
    if !(condition <= MAX_METRIC_CONDITION) {
        return Err(Error::SingularMetric { condition });
    }
    let inv = g.try_inverse().ok_or(Error::SingularMetric { condition })?;
    let dg = metric_derivatives(metric, y, h);
    let mut symbols = [[[0.0; 3]; 3]; 3];
    for (k, sk) in symbols.iter_mut().enumerate() {
        for (i, ski) in sk.iter_mut().enumerate() {
            for (j, skij) in ski.iter_mut().enumerate() {
                *skij = 0.5
                    * (0..3)
                        .map(|l| inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                        .sum::<f64>();
            }
        }
    }
    Ok(Christoffel { symbols })
}

/// Components `g(d_i p, d_j p)` of the deformed metric in a stereographic chart.
pub fn tanno_chart_metric<'a>(t: &'a TannoStructure, chart: &'a StereoChart) -> impl Fn(&Vec3) -> Matrix3<f64> + 'a {
    move |y: &Vec3| {
        let p = *chart.from_chart(y).position();
        let jac = chart.jacobian(y);
        let xi0 = -crate::ambient::j_apply(&p);
        let a = t.a();
        let ambient: Matrix4<f64> = Matrix4::identity() * a + xi0 * xi0.transpose() * (a * (a - 1.0));
        jac.transpose() * ambient * jac
    }
}

/// Christoffel symbols of `g` at chart point `y`.
pub fn christoffel(t: &TannoStructure, chart: &StereoChart, y: &Vec3, h: f64) -> Result<Christoffel> {
    christoffel_from_metric(&tanno_chart_metric(t, chart), y, h)
}

/// Covariant derivative `dV/ds + Gamma(x', V)` in coordinates.
pub fn coordinate_covariant(gamma: &Christoffel, velocity: &Vec3, v: &Vec3, v_rate: &Vec3) -> Vec3 {
    v_rate + gamma.contract(velocity, v)
}

/// Settings of the chart-based connection oracle for `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionOracle {
    pub chart: StereoChart,
    /// Evaluate in a chart centred at each curve point instead of `chart`.
    pub recenter: bool,
    pub metric_step: f64,
    pub field_step: f64,
}

impl Default for ConnectionOracle {
    fn default() -> Self {
        ConnectionOracle {
            chart: StereoChart::default(),
            recenter: true,
            metric_step: METRIC_STEP,
            field_step: FIELD_STEP,
        }
    }
}

/// `nabla_{gamma'} V` for the deformed metric, computed through the oracle
/// and returned as a vector in R^4.
pub fn deformed_covariant(
    t: &TannoStructure,
    oracle: &ConnectionOracle,
    field: &VectorFieldAlongCurve,
    curve: &dyn SpaceCurve,
    s: f64,
) -> Result<Vec4> {
    let cj = curve.jet(s, 1);
    let p = cj.value();
    let pd = cj.derivative_value(1);
    let point = SpherePoint::normalize(&p);
    let chart = if oracle.recenter {
        StereoChart::new(point)
    } else {
        oracle.chart.centered_for(&point)
    };
    let y = chart.to_chart(&point)?;

    let (v, vd) = field.value_and_derivative(s)?;
    let vc = chart.tangent_to_chart_jet(&VecJet::from_derivatives(&[p, pd]), &VecJet::from_derivatives(&[v, vd]));
    let v_chart = Vec3::new(vc[0].value(), vc[1].value(), vc[2].value());
    let v_rate = Vec3::new(
        vc[0].derivative_value(1),
        vc[1].derivative_value(1),
        vc[2].derivative_value(1),
    );
    let velocity = chart.tangent_to_chart(&p, &pd);

    let gamma = christoffel(t, &chart, &y, oracle.metric_step)?;
    let cov = coordinate_covariant(&gamma, &velocity, &v_chart, &v_rate);
    Ok(chart.jacobian(&y) * cov)
}
