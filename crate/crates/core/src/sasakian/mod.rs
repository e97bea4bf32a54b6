//! The standard Sasakian structure of S^3 and its D-homothetic deformation.
//!
//! The round structure is `xi0 = -Jz`, `eta0 = <., xi0>`, `phi0 = s o J`
//! (with `s` the tangential projection) and `g0 = <,>`. The deformed
//! structure with parameter `a` is
//!
//! ```text
//! eta = a eta0,   xi = xi0 / a,   phi = phi0,   g = a g0 + a (a - 1) eta0 (x) eta0
//! ```
//!
//! which is a Sasakian space form of constant phi-sectional curvature
//! `c = 4/a - 3`. For `0 < a < 1` we have `c > 1`.

mod axioms;

pub use axioms::{axiom_report, AxiomSampling};

use serde::Serialize;

use crate::ambient::{j_apply, tangent_project, SpherePoint, Vec4};
use crate::error::{Error, Result};
use crate::jet::{Jet, VecJet};

/// Tangency tolerance for [`TangentVector`].
pub const TANGENT_TOL: f64 = 1e-10;

/// Deformation parameter together with the derived curvature and
/// frequency constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TannoStructure {
    a: f64,
    c: f64,
    #[serde(rename = "A")]
    slow: f64,
    #[serde(rename = "B")]
    fast: f64,
}

impl TannoStructure {
    /// Builds the structure for `a` in `(0, 1)`.
    ///
    /// The frequencies are the two positive roots `A < B` of
    /// `a^2 w^4 - a (6 - 4a) w^2 + 1 = 0`.
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::OutOfRange {
                name: "a",
                value: a,
                expected: "0 < a < 1",
            });
        }
        let root = ((a - 1.0) * (a - 2.0)).sqrt();
        let slow = ((3.0 - 2.0 * a - 2.0 * root) / a).sqrt();
        let fast = ((3.0 - 2.0 * a + 2.0 * root) / a).sqrt();
        Ok(TannoStructure {
            a,
            c: 4.0 / a - 3.0,
            slow,
            fast,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// phi-sectional curvature `4/a - 3`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// The smaller frequency `A`.
    pub fn slow_freq(&self) -> f64 {
        self.slow
    }

    /// The larger frequency `B`.
    pub fn fast_freq(&self) -> f64 {
        self.fast
    }

    /// Curvature of the biharmonic Legendre helices, `sqrt(c - 1)`.
    pub fn helix_curvature(&self) -> f64 {
        (self.c - 1.0).sqrt()
    }

    /// Squared amplitude `B/(A+B)` of the slow mode.
    pub fn slow_weight(&self) -> f64 {
        self.fast / (self.slow + self.fast)
    }

    /// Squared amplitude `A/(A+B)` of the fast mode.
    pub fn fast_weight(&self) -> f64 {
        self.slow / (self.slow + self.fast)
    }

    pub fn xi(&self, z: &SpherePoint) -> TangentVector {
        TangentVector {
            base: *z,
            direction: self.xi_at(z.position()),
        }
    }

    pub fn eta(&self, v: &TangentVector) -> f64 {
        self.a * eta0_at(v.base.position(), &v.direction)
    }

    pub fn phi(&self, v: &TangentVector) -> TangentVector {
        TangentVector {
            base: v.base,
            direction: tangent_project(&v.base, &j_apply(&v.direction)),
        }
    }

    pub fn metric(&self, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        v.same_base(w)?;
        Ok(self.metric_at(v.base.position(), &v.direction, &w.direction))
    }

    /// Riemann tensor of the Sasakian space form `M(c)`, evaluated from
    /// the closed-form expression in `g`, `eta`, `phi`, `xi`.
    ///
    /// Convention: `R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`,
    /// so that `g(R(X,Y)Y, X)` is the sectional curvature of a unit orthonormal pair.
    pub fn curvature_tensor(
        &self,
        x: &TangentVector,
        y: &TangentVector,
        z: &TangentVector,
    ) -> Result<TangentVector> {
        x.same_base(y)?;
        x.same_base(z)?;
        Ok(TangentVector {
            base: x.base,
            direction: self.curvature_at(x.base.position(), &x.direction, &y.direction, &z.direction),
        })
    }

    // Raw evaluators on R^4 vectors at a base point; callers guarantee tangency.

    pub fn xi_at(&self, z: &Vec4) -> Vec4 {
        -j_apply(z) / self.a
    }

    pub fn eta_at(&self, z: &Vec4, v: &Vec4) -> f64 {
        self.a * eta0_at(z, v)
    }

    pub fn phi_at(&self, z: &Vec4, v: &Vec4) -> Vec4 {
        let jv = j_apply(v);
        jv - z * jv.dot(z)
    }

    pub fn metric_at(&self, z: &Vec4, v: &Vec4, w: &Vec4) -> f64 {
        let a = self.a;
        a * v.dot(w) + a * (a - 1.0) * eta0_at(z, v) * eta0_at(z, w)
    }

    pub fn norm_at(&self, z: &Vec4, v: &Vec4) -> f64 {
        self.metric_at(z, v, v).max(0.0).sqrt()
    }

    pub fn curvature_at(&self, p: &Vec4, x: &Vec4, y: &Vec4, z: &Vec4) -> Vec4 {
        let c = self.c;
        let g = |u: &Vec4, v: &Vec4| self.metric_at(p, u, v);
        let eta = |u: &Vec4| self.eta_at(p, u);
        let phi = |u: &Vec4| self.phi_at(p, u);
        let xi = self.xi_at(p);
        let (phi_x, phi_y, phi_z) = (phi(x), phi(y), phi(z));

        let round = x * g(z, y) - y * g(z, x);
        let contact = y * (eta(z) * eta(x)) - x * (eta(z) * eta(y)) + xi * (g(z, x) * eta(y))
            - xi * (g(z, y) * eta(x))
            + phi_x * g(z, &phi_y)
            - phi_y * g(z, &phi_x)
            + phi_z * (2.0 * g(x, &phi_y));
        round * ((c + 3.0) / 4.0) + contact * ((c - 1.0) / 4.0)
    }

    // Jet evaluators along a curve z(s); used by the closed-form connection.

    pub fn metric_jet(&self, z: &VecJet, v: &VecJet, w: &VecJet) -> Jet {
        let a = self.a;
        v.dot(w) * a + eta0_jet(z, v) * eta0_jet(z, w) * (a * (a - 1.0))
    }

    pub fn eta_jet(&self, z: &VecJet, v: &VecJet) -> Jet {
        eta0_jet(z, v) * self.a
    }

    pub fn xi_jet(&self, z: &VecJet) -> VecJet {
        -z.j() * (1.0 / self.a)
    }
}

/// `eta0(v) = <v, -Jz>` at base point `z`.
pub fn eta0_at(z: &Vec4, v: &Vec4) -> f64 {
    -v.dot(&j_apply(z))
}

pub fn eta0_jet(z: &VecJet, v: &VecJet) -> Jet {
    -v.dot(&z.j())
}

/// Tangential projection along a curve.
pub fn project_jet(z: &VecJet, v: &VecJet) -> VecJet {
    *v - z.scale(v.dot(z))
}

pub fn phi0_jet(z: &VecJet, v: &VecJet) -> VecJet {
    project_jet(z, &v.j())
}

/// A vector tangent to S^3 at a given base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub base: SpherePoint,
    pub direction: Vec4,
}

impl TangentVector {
    pub fn new(base: SpherePoint, direction: Vec4) -> Result<Self> {
        let inner = direction.dot(base.position());
        if inner.abs() > TANGENT_TOL {
            return Err(Error::NotTangent { inner });
        }
        Ok(TangentVector { base, direction })
    }

    /// Tangential part of an arbitrary vector.
    pub fn projected(base: SpherePoint, v: &Vec4) -> Self {
        TangentVector {
            base,
            direction: tangent_project(&base, v),
        }
    }

    fn same_base(&self, other: &TangentVector) -> Result<()> {
        if self.base == other.base {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }
}
