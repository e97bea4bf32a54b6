//! Pointwise and covariant checks of the Sasakian axioms for the deformed structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{phi0_jet, project_jet, TannoStructure};
use crate::ambient::{tangent_project, SpherePoint, StereoChart, Vec3, Vec4};
use crate::connections::{deformed_covariant, ConnectionOracle, VectorFieldAlongCurve};
use crate::curve::{ClosedFormCurve, SpaceCurve, TrigMode};
use crate::error::Result;
use crate::jet::VecJet;
use crate::report::{Check, VerificationReport};

/// Random sample points for [`axiom_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomSampling {
    pub points: usize,
    pub seed: u64,
    /// Tolerance for pointwise algebraic identities.
    pub algebraic_tol: f64,
    /// Tolerance for identities evaluated through the connection oracle.
    pub oracle_tol: f64,
}

impl Default for AxiomSampling {
    fn default() -> Self {
        AxiomSampling {
            points: 100,
            seed: 7,
            algebraic_tol: 1e-12,
            oracle_tol: 1e-4,
        }
    }
}

struct Sample {
    p: Vec4,
    x: Vec4,
    y: Vec4,
    z: Vec4,
    w: Vec4,
}

fn random_vec(rng: &mut impl Rng) -> Vec4 {
    Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

fn samples(sampling: &AxiomSampling) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    (0..sampling.points)
        .map(|_| {
            let point = SpherePoint::normalize(&random_vec(&mut rng));
            let mut tangent = || tangent_project(&point, &random_vec(&mut rng));
            Sample {
                p: *point.position(),
                x: tangent(),
                y: tangent(),
                z: tangent(),
                w: tangent(),
            }
        })
        .collect()
}

fn max_over<T>(items: &[T], f: impl Fn(&T) -> f64) -> f64 {
    items.iter().map(f).fold(0.0, f64::max)
}

/// Unit vector orthogonal to `xi` at `p`, built from `v`.
fn horizontal_unit(t: &TannoStructure, p: &Vec4, v: &Vec4) -> Vec4 {
    let h = v - t.xi_at(p) * t.eta_at(p, v);
    h / t.norm_at(p, &h)
}

/// `(nabla_X phi) Y` through the oracle, along the great circle with velocity `X`.
fn phi_derivative_by_oracle(t: &TannoStructure, oracle: &ConnectionOracle, s: &Sample) -> Result<Vec4> {
    let speed = s.x.norm();
    let curve = ClosedFormCurve::new(vec![TrigMode::new(speed, 0.0, s.p, s.x / speed)], (-1.0, 1.0));
    let y = s.y;
    let y_jet = move |c: &ClosedFormCurve, u: f64| project_jet(&c.jet(u, 2), &VecJet::constant(&y));
    let y_field = VectorFieldAlongCurve::from_jets(|u| y_jet(&curve, u));
    let phi_y_field = VectorFieldAlongCurve::from_jets(|u| phi0_jet(&curve.jet(u, 2), &y_jet(&curve, u)));
    let nabla_phi_y = deformed_covariant(t, oracle, &phi_y_field, &curve, 0.0)?;
    let nabla_y = deformed_covariant(t, oracle, &y_field, &curve, 0.0)?;
    Ok(nabla_phi_y - t.phi_at(&s.p, &nabla_y))
}

/// `d eta(d_i, d_j) = d_i eta_j - d_j eta_i` in a chart centred at the point,
/// paired with `g(d_i, phi d_j)`.
fn d_eta_pairs(t: &TannoStructure, p: &Vec4, h: f64) -> Result<Vec<(f64, f64)>> {
    let point = SpherePoint::normalize(p);
    let chart = StereoChart::new(point);
    let y0 = chart.to_chart(&point)?;
    let eta_components = |y: &Vec3| {
        let q = *chart.from_chart(y).position();
        let jac = chart.jacobian(y);
        Vec3::from_fn(|i, _| t.eta_at(&q, &jac.column(i).into_owned()))
    };
    let partial = |i: usize| {
        let mut yp = y0;
        let mut ym = y0;
        yp[i] += h;
        ym[i] -= h;
        (eta_components(&yp) - eta_components(&ym)) / (2.0 * h)
    };
    let d = [partial(0), partial(1), partial(2)];
    let jac = chart.jacobian(&y0);
    let mut out = Vec::new();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let d_eta = d[i][j] - d[j][i];
            let ci = jac.column(i).into_owned();
            let cj = jac.column(j).into_owned();
            out.push((d_eta, t.metric_at(p, &ci, &t.phi_at(p, &cj))));
        }
    }
    Ok(out)
}

/// Residuals of the contact, Sasakian and curvature identities at random points.
pub fn axiom_report(
    t: &TannoStructure,
    sampling: &AxiomSampling,
    oracle: &ConnectionOracle,
) -> Result<VerificationReport> {
    let pts = samples(sampling);
    let tol = sampling.algebraic_tol;
    let mut report = VerificationReport::default();

    report.push(Check::at_most(
        "contact: phi^2 X + X - eta(X) xi",
        "phi^2 = -I + eta (x) xi",
        max_over(&pts, |s| {
            let phi2 = t.phi_at(&s.p, &t.phi_at(&s.p, &s.x));
            (phi2 + s.x - t.xi_at(&s.p) * t.eta_at(&s.p, &s.x)).amax()
        }),
        tol,
    ));
    report.push(Check::at_most(
        "contact: eta(xi) - 1",
        "eta(xi) = 1",
        max_over(&pts, |s| (t.eta_at(&s.p, &t.xi_at(&s.p)) - 1.0).abs()),
        tol,
    ));
    report.push(Check::at_most(
        "contact: phi xi",
        "phi xi = 0",
        max_over(&pts, |s| t.phi_at(&s.p, &t.xi_at(&s.p)).amax()),
        tol,
    ));
    report.push(Check::at_most(
        "contact: eta(phi X)",
        "eta o phi = 0",
        max_over(&pts, |s| t.eta_at(&s.p, &t.phi_at(&s.p, &s.x)).abs()),
        tol,
    ));
    report.push(Check::at_most(
        "contact: g(phi X, phi Y) compatibility",
        "g(phi X, phi Y) = g(X,Y) - eta(X) eta(Y)",
        max_over(&pts, |s| {
            let lhs = t.metric_at(&s.p, &t.phi_at(&s.p, &s.x), &t.phi_at(&s.p, &s.y));
            let rhs = t.metric_at(&s.p, &s.x, &s.y) - t.eta_at(&s.p, &s.x) * t.eta_at(&s.p, &s.y);
            (lhs - rhs).abs()
        }),
        tol,
    ));
    report.push(Check::at_most(
        "contact: g(X, xi) - eta(X)",
        "g(X, xi) = eta(X)",
        max_over(&pts, |s| (t.metric_at(&s.p, &s.x, &t.xi_at(&s.p)) - t.eta_at(&s.p, &s.x)).abs()),
        tol,
    ));

    let mut sasakian: f64 = 0.0;
    for s in &pts {
        let lhs = phi_derivative_by_oracle(t, oracle, s)?;
        let rhs = t.xi_at(&s.p) * t.metric_at(&s.p, &s.x, &s.y) - s.x * t.eta_at(&s.p, &s.y);
        sasakian = sasakian.max((lhs - rhs).amax());
    }
    report.push(Check::at_most(
        "sasakian: (nabla_X phi) Y via oracle",
        "(nabla_X phi) Y = g(X,Y) xi - eta(Y) X",
        sasakian,
        sampling.oracle_tol,
    ));

    let mut pairs = Vec::new();
    for s in &pts {
        pairs.extend(d_eta_pairs(t, &s.p, oracle.metric_step)?);
    }
    let lambda = pairs.iter().map(|(d, g)| d * g).sum::<f64>() / pairs.iter().map(|(_, g)| g * g).sum::<f64>();
    let spread = pairs.iter().map(|(d, g)| (d - lambda * g).abs()).fold(0.0, f64::max);
    report.push(Check::at_most(
        "contact: d eta = lambda g(., phi .) uniformly",
        "g(X, phi Y) = d eta(X, Y) up to a constant",
        spread,
        1e-6,
    ));
    report.push(
        Check::report_only("contact: fitted d eta constant", "lambda", lambda, f64::NAN)
            .with_note("d eta(X,Y) = X eta(Y) - Y eta(X) - eta([X,Y])"),
    );

    let horizontal: Vec<(Vec4, Vec4)> = pts.iter().map(|s| (s.p, horizontal_unit(t, &s.p, &s.x))).collect();
    let c = t.c();
    report.push(Check::at_most(
        "curvature: phi-sectional curvature - c",
        "K(X, phi X) = c",
        max_over(&horizontal, |(p, x)| {
            let phx = t.phi_at(p, x);
            (t.metric_at(p, &t.curvature_at(p, x, &phx, &phx), x) - c).abs()
        }),
        1e-10 * c.max(1.0),
    ));
    report.push(Check::at_most(
        "curvature: K(X, xi) - 1",
        "K(X, xi) = 1",
        max_over(&horizontal, |(p, x)| {
            let xi = t.xi_at(p);
            (t.metric_at(p, &t.curvature_at(p, x, &xi, &xi), x) - 1.0).abs()
        }),
        1e-10,
    ));
    report.push(Check::at_most(
        "curvature: R(X,Y)Z + R(Y,X)Z",
        "R(X,Y) = -R(Y,X)",
        max_over(&pts, |s| {
            (t.curvature_at(&s.p, &s.x, &s.y, &s.z) + t.curvature_at(&s.p, &s.y, &s.x, &s.z)).amax()
        }),
        1e-10,
    ));
    report.push(Check::at_most(
        "curvature: g(R(X,Y)Z,W) + g(R(X,Y)W,Z)",
        "g(R(X,Y)Z,W) = -g(R(X,Y)W,Z)",
        max_over(&pts, |s| {
            (t.metric_at(&s.p, &t.curvature_at(&s.p, &s.x, &s.y, &s.z), &s.w)
                + t.metric_at(&s.p, &t.curvature_at(&s.p, &s.x, &s.y, &s.w), &s.z))
            .abs()
        }),
        1e-10,
    ));
    report.push(Check::at_most(
        "curvature: first Bianchi identity",
        "R(X,Y)Z + R(Y,Z)X + R(Z,X)Y = 0",
        max_over(&pts, |s| {
            (t.curvature_at(&s.p, &s.x, &s.y, &s.z)
                + t.curvature_at(&s.p, &s.y, &s.z, &s.x)
                + t.curvature_at(&s.p, &s.z, &s.x, &s.y))
            .amax()
        }),
        1e-10,
    ));
    Ok(report)
}
