//! Euclidean 4-space viewed as C^2, the unit sphere inside it, and the
//! stereographic chart used by the numerical connection oracle.
//!
//! Coordinates are ordered `(x1, x2, y1, y2)` so that the complex structure
//! acts as `J(x1, x2, y1, y2) = (-y1, -y2, x1, x2)`. Every J-dependent
//! computation in the crate routes through [`j_apply`] (or its jet twin
//! [`VecJet::j`]).

use nalgebra::{Matrix4x3, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::jet::{Jet, VecJet};

pub type Vec4 = Vector4<f64>;
pub type Vec3 = Vector3<f64>;

/// Sphere membership tolerance on `|<p,p> - 1|`.
pub const SPHERE_TOL: f64 = 1e-12;
/// Points with `<p, pole> <= -1 + ANTIPODAL_MARGIN` are outside the chart.
pub const ANTIPODAL_MARGIN: f64 = 1e-6;
/// A chart is re-centred once `<p, pole>` drops below this value.
pub const RECENTER_THRESHOLD: f64 = -0.9;

pub fn j_apply(v: &Vec4) -> Vec4 {
    Vec4::new(-v[2], -v[3], v[0], v[1])
}

/// A point of the unit 3-sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint(Vec4);

impl SpherePoint {
    pub fn new(position: Vec4) -> Result<Self> {
        let deviation = (position.norm_squared() - 1.0).abs();
        if !position.iter().all(|c| c.is_finite()) || deviation > SPHERE_TOL {
            return Err(Error::NotOnSphere { deviation });
        }
        Ok(SpherePoint(position))
    }

    /// Radial projection of a nonzero vector onto the sphere.
    pub fn normalize(v: &Vec4) -> Self {
        SpherePoint(v / v.norm())
    }

    pub fn position(&self) -> &Vec4 {
        &self.0
    }
}

/// Orthogonal projection of `v` onto `T_z S^3`.
pub fn tangent_project(z: &SpherePoint, v: &Vec4) -> Vec4 {
    let z = z.position();
    v - z * v.dot(z)
}

/// Stereographic chart centred at `pole`, projecting from `-pole`.
///
/// `to_chart(p) = (<p,E_i> / (1 + <p,pole>))_i` for an orthonormal basis
/// `E_1, E_2, E_3` of `pole^perp`; the pole itself maps to the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct StereoChart {
    pole: SpherePoint,
    basis: [Vec4; 3],
}

impl Default for StereoChart {
    fn default() -> Self {
        StereoChart::new(Self::default_pole())
    }
}

impl StereoChart {
    pub fn default_pole() -> SpherePoint {
        SpherePoint(Vec4::new(-1.0, 0.0, 0.0, 0.0))
    }

    pub fn new(pole: SpherePoint) -> Self {
        let p = *pole.position();
        // drop the standard axis most aligned with the pole, orthonormalize the rest
        let drop = (0..4)
            .max_by(|&i, &j| p[i].abs().total_cmp(&p[j].abs()))
            .expect("four axes");
        let mut basis = [Vec4::zeros(); 3];
        let mut n = 0;
        for axis in (0..4).filter(|&i| i != drop) {
            let mut e = Vec4::zeros();
            e[axis] = 1.0;
            e -= p * e.dot(&p);
            for prev in basis.iter().take(n) {
                e -= prev * e.dot(prev);
            }
            basis[n] = e.normalize();
            n += 1;
        }
        StereoChart { pole, basis }
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    pub fn basis(&self) -> &[Vec4; 3] {
        &self.basis
    }

    /// Returns `self` unless `p` is close to the excluded point, in which
    /// case a chart centred at `p` is returned.
    pub fn centered_for(&self, p: &SpherePoint) -> StereoChart {
        if p.position().dot(self.pole.position()) < RECENTER_THRESHOLD {
            StereoChart::new(*p)
        } else {
            self.clone()
        }
    }

    pub fn to_chart(&self, p: &SpherePoint) -> Result<Vec3> {
        let x = p.position();
        let inner = x.dot(self.pole.position());
        if inner <= -1.0 + ANTIPODAL_MARGIN {
            return Err(Error::AntipodalPoint { inner });
        }
        let d = 1.0 + inner;
        Ok(Vec3::new(
            x.dot(&self.basis[0]) / d,
            x.dot(&self.basis[1]) / d,
            x.dot(&self.basis[2]) / d,
        ))
    }

    pub fn from_chart(&self, y: &Vec3) -> SpherePoint {
        let r2 = y.norm_squared();
        let mut x = self.pole.position() * (1.0 - r2);
        for (yi, e) in y.iter().zip(self.basis.iter()) {
            x += e * (2.0 * yi);
        }
        SpherePoint(x / (1.0 + r2))
    }

    /// Analytic Jacobian of `from_chart`; column `i` is `dp/dy_i` in R^4.
    pub fn jacobian(&self, y: &Vec3) -> Matrix4x3<f64> {
        let denom = 1.0 + y.norm_squared();
        let p = *self.from_chart(y).position();
        let pole = self.pole.position();
        let mut jac = Matrix4x3::zeros();
        for i in 0..3 {
            let col = (self.basis[i] * 2.0 - pole * (2.0 * y[i]) - p * (2.0 * y[i])) / denom;
            jac.set_column(i, &col);
        }
        jac
    }

    /// Chart components of a tangent vector `v` at `p` (differential of `to_chart`).
    pub fn tangent_to_chart(&self, p: &Vec4, v: &Vec4) -> Vec3 {
        let out = self.tangent_to_chart_jet(&VecJet::constant(p), &VecJet::constant(v));
        Vec3::new(out[0].value(), out[1].value(), out[2].value())
    }

    /// Jet version of [`Self::tangent_to_chart`] along a curve `p(s)` with a
    /// vector field `v(s)`.
    pub fn tangent_to_chart_jet(&self, p: &VecJet, v: &VecJet) -> [Jet; 3] {
        let pole = VecJet::constant(self.pole.position());
        let d = p.dot(&pole) + Jet::constant(1.0);
        let d_inv = d.recip();
        let v_pole = v.dot(&pole);
        self.basis.map(|e| {
            let e = VecJet::constant(&e);
            let n = p.dot(&e);
            v.dot(&e) * d_inv - n * v_pole * d_inv * d_inv
        })
    }
}

/// `from_chart(to_chart(p))`; fails for points outside the chart domain.
pub fn chart_roundtrip(chart: &StereoChart, p: &SpherePoint) -> Result<SpherePoint> {
    let y = chart.to_chart(p)?;
    Ok(chart.from_chart(&y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut impl Rng) -> Vec4 {
        Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_point(rng: &mut impl Rng) -> SpherePoint {
        SpherePoint::normalize(&random_vec(rng))
    }

    #[test]
    fn j_of_first_axis() {
        assert_eq!(
            j_apply(&Vec4::new(1.0, 0.0, 0.0, 0.0)),
            Vec4::new(0.0, 0.0, 1.0, 0.0)
        );
    }

    #[test]
    fn j_is_an_isometric_complex_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let v = random_vec(&mut rng);
            let w = random_vec(&mut rng);
            assert!((j_apply(&j_apply(&v)) + v).amax() <= 1e-14);
            assert!((j_apply(&v).dot(&j_apply(&w)) - v.dot(&w)).abs() <= 1e-14);
        }
    }

    #[test]
    fn projection_kills_normal_and_fixes_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = random_point(&mut rng);
        assert!(tangent_project(&z, z.position()).amax() <= 1e-15);
        let t = tangent_project(&z, &random_vec(&mut rng));
        assert!((tangent_project(&z, &t) - t).amax() <= 1e-15);
        assert!(t.dot(z.position()).abs() <= 1e-12);

        let e1 = SpherePoint::new(Vec4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        let e2 = Vec4::new(0.0, 1.0, 0.0, 0.0);
        assert_eq!(tangent_project(&e1, &e2), e2);
    }

    #[test]
    fn projection_is_self_adjoint_on_tangents() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z = random_point(&mut rng);
            let v = random_vec(&mut rng);
            let w = tangent_project(&z, &random_vec(&mut rng));
            let lhs = tangent_project(&z, &v).dot(&w);
            let rhs = v.dot(&tangent_project(&z, &w));
            assert!((lhs - rhs).abs() <= 1e-14);
        }
    }

    #[test]
    fn sphere_point_rejects_off_sphere() {
        assert!(matches!(
            SpherePoint::new(Vec4::new(1.0, 1.0, 0.0, 0.0)),
            Err(Error::NotOnSphere { .. })
        ));
    }

    #[test]
    fn pole_maps_to_origin_and_back() {
        let chart = StereoChart::default();
        let y = chart.to_chart(chart.pole()).unwrap();
        assert!(y.norm() <= 1e-15);
        let back = chart_roundtrip(&chart, chart.pole()).unwrap();
        assert_eq!(back.position(), chart.pole().position());
    }

    #[test]
    fn antipode_is_rejected() {
        let chart = StereoChart::default();
        let anti = SpherePoint::new(-chart.pole().position()).unwrap();
        assert!(matches!(
            chart_roundtrip(&chart, &anti),
            Err(Error::AntipodalPoint { .. })
        ));
    }

    #[test]
    fn recentering_kicks_in_near_antipode() {
        let chart = StereoChart::default();
        let near = SpherePoint::normalize(&Vec4::new(0.95, 0.3, 0.0, 0.0));
        assert_eq!(chart.centered_for(&near).pole(), &near);
        let far = SpherePoint::normalize(&Vec4::new(-0.2, 0.3, 0.9, 0.0));
        assert_eq!(chart.centered_for(&far).pole(), chart.pole());
    }

    #[test]
    fn jacobian_columns_are_tangent_and_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let chart = StereoChart::new(random_point(&mut rng));
        for _ in 0..50 {
            let y = Vec3::from_fn(|_, _| rng.gen_range(-1.5..1.5));
            let p = chart.from_chart(&y);
            let jac = chart.jacobian(&y);
            let h = 1e-6;
            for i in 0..3 {
                let col = jac.column(i).into_owned();
                assert!(col.dot(p.position()).abs() <= 1e-10);
                let mut yp = y;
                let mut ym = y;
                yp[i] += h;
                ym[i] -= h;
                let fd = (chart.from_chart(&yp).position() - chart.from_chart(&ym).position())
                    / (2.0 * h);
                assert!((fd - col).amax() <= 1e-8);
            }
            // tangent_to_chart inverts the Jacobian on tangent vectors
            let yc = Vec3::new(0.3, -0.2, 0.7);
            let v = jac * yc;
            let back = chart.tangent_to_chart(p.position(), &v);
            assert_relative_eq!(back, yc, epsilon = 1e-11);
        }
    }

    proptest! {
        #[test]
        fn chart_roundtrip_recovers_point(
            x in prop::array::uniform4(-1.0f64..1.0),
            q in prop::array::uniform4(-1.0f64..1.0),
        ) {
            let v = Vec4::from(x);
            let w = Vec4::from(q);
            prop_assume!(v.norm() > 1e-3 && w.norm() > 1e-3);
            let p = SpherePoint::normalize(&v);
            let chart = StereoChart::new(SpherePoint::normalize(&w));
            prop_assume!(p.position().dot(chart.pole().position()) > -1.0 + 1e-3);
            let back = chart_roundtrip(&chart, &p).unwrap();
            prop_assert!((back.position() - p.position()).amax() <= 1e-12);
        }
    }
}
