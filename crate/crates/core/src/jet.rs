//! Truncated Taylor arithmetic along a curve parameter.
//!
//! A [`Jet`] stores the Taylor coefficients `f^(k)(s0) / k!` of a scalar
//! function at a base parameter `s0`, up to a finite order. Sums and
//! products truncate to the shorter operand, so a quantity assembled from
//! `gamma` (order 4) and `gamma'` (order 3) automatically carries order 3.
//! Differentiating along the curve drops one order.
//!
//! [`VecJet`] is the four-component analogue used for fields in R^4. All
//! closed-form covariant derivatives in this crate are built from these two
//! types, which gives exact (round-off limited) derivatives of any
//! polynomial expression in the curve and its derivatives.

use std::ops::{Add, Mul, Neg, Sub};

use crate::ambient::Vec4;

/// Maximum number of Taylor coefficients carried by a jet.
pub const JET_CAP: usize = 10;

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    coeffs: [f64; JET_CAP],
    len: usize,
}

impl Jet {
    /// A constant; carries the full capacity since all its derivatives vanish.
    pub fn constant(c: f64) -> Self {
        let mut coeffs = [0.0; JET_CAP];
        coeffs[0] = c;
        Jet {
            coeffs,
            len: JET_CAP,
        }
    }

    /// Builds a jet from `[f(s0), f'(s0), f''(s0), ...]`.
    pub fn from_derivatives(derivs: &[f64]) -> Self {
        assert!(
            !derivs.is_empty() && derivs.len() <= JET_CAP,
            "jet needs between 1 and {JET_CAP} derivatives"
        );
        let mut coeffs = [0.0; JET_CAP];
        for (k, d) in derivs.iter().enumerate() {
            coeffs[k] = d / factorial(k);
        }
        Jet {
            coeffs,
            len: derivs.len(),
        }
    }

    pub fn from_coefficients(coeffs_in: &[f64]) -> Self {
        assert!(!coeffs_in.is_empty() && coeffs_in.len() <= JET_CAP);
        let mut coeffs = [0.0; JET_CAP];
        coeffs[..coeffs_in.len()].copy_from_slice(coeffs_in);
        Jet {
            coeffs,
            len: coeffs_in.len(),
        }
    }

    /// Highest derivative order carried.
    pub fn order(&self) -> usize {
        self.len - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coefficient(&self, k: usize) -> f64 {
        assert!(k < self.len, "coefficient {k} beyond jet order {}", self.order());
        self.coeffs[k]
    }

    /// The k-th derivative at the base parameter.
    pub fn derivative_value(&self, k: usize) -> f64 {
        self.coefficient(k) * factorial(k)
    }

    pub fn truncate(mut self, len: usize) -> Self {
        let len = len.clamp(1, self.len);
        for c in self.coeffs.iter_mut().skip(len) {
            *c = 0.0;
        }
        self.len = len;
        self
    }

    /// d/ds of the jet; loses one order.
    pub fn differentiate(&self) -> Self {
        assert!(self.len >= 2, "cannot differentiate a jet of order 0");
        let mut coeffs = [0.0; JET_CAP];
        for k in 0..self.len - 1 {
            coeffs[k] = (k + 1) as f64 * self.coeffs[k + 1];
        }
        Jet {
            coeffs,
            len: self.len - 1,
        }
    }

    /// Antiderivative with the given value at the base parameter.
    pub fn integrate(&self, value: f64) -> Self {
        let len = (self.len + 1).min(JET_CAP);
        let mut coeffs = [0.0; JET_CAP];
        coeffs[0] = value;
        for k in 1..len {
            coeffs[k] = self.coeffs[k - 1] / k as f64;
        }
        Jet { coeffs, len }
    }

    pub fn recip(&self) -> Self {
        let a0 = self.coeffs[0];
        assert!(a0 != 0.0, "reciprocal of a jet with zero value");
        let mut b = [0.0; JET_CAP];
        b[0] = 1.0 / a0;
        for k in 1..self.len {
            let acc: f64 = (1..=k).map(|i| self.coeffs[i] * b[k - i]).sum();
            b[k] = -acc / a0;
        }
        Jet {
            coeffs: b,
            len: self.len,
        }
    }

    pub fn sqrt(&self) -> Self {
        let a0 = self.coeffs[0];
        assert!(a0 > 0.0, "square root of a non-positive jet");
        let mut b = [0.0; JET_CAP];
        b[0] = a0.sqrt();
        for k in 1..self.len {
            let acc: f64 = (1..k).map(|i| b[i] * b[k - i]).sum();
            b[k] = (self.coeffs[k] - acc) / (2.0 * b[0]);
        }
        Jet {
            coeffs: b,
            len: self.len,
        }
    }

    /// Evaluates `f(s0 + delta)` where `self` is the Taylor jet of `f` at
    /// `s0` and `delta` has zero constant term.
    pub fn compose(&self, delta: &Jet) -> Self {
        assert!(delta.coeffs[0] == 0.0, "composition needs delta(0) = 0");
        let len = self.len.min(delta.len);
        let mut out = Jet::constant(self.coeffs[0]).truncate(len);
        let mut power = Jet::constant(1.0).truncate(len);
        for k in 1..len {
            power = power * *delta;
            out = out + power * self.coeffs[k];
        }
        out.truncate(len)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let len = self.len.min(rhs.len);
        let mut coeffs = [0.0; JET_CAP];
        for k in 0..len {
            coeffs[k] = self.coeffs[k] + rhs.coeffs[k];
        }
        Jet { coeffs, len }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for c in self.coeffs.iter_mut() {
            *c = -*c;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let len = self.len.min(rhs.len);
        let mut coeffs = [0.0; JET_CAP];
        for k in 0..len {
            coeffs[k] = (0..=k).map(|i| self.coeffs[i] * rhs.coeffs[k - i]).sum();
        }
        Jet { coeffs, len }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for c in self.coeffs.iter_mut() {
            *c *= rhs;
        }
        self
    }
}

/// A vector in R^4 whose components are jets in the same parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VecJet(pub [Jet; 4]);

impl VecJet {
    pub fn constant(v: &Vec4) -> Self {
        VecJet([
            Jet::constant(v[0]),
            Jet::constant(v[1]),
            Jet::constant(v[2]),
            Jet::constant(v[3]),
        ])
    }

    /// Builds a vector jet from `[v(s0), v'(s0), ...]`.
    pub fn from_derivatives(derivs: &[Vec4]) -> Self {
        let comp = |i: usize| {
            let d: Vec<f64> = derivs.iter().map(|v| v[i]).collect();
            Jet::from_derivatives(&d)
        };
        VecJet([comp(0), comp(1), comp(2), comp(3)])
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn value(&self) -> Vec4 {
        Vec4::new(
            self.0[0].value(),
            self.0[1].value(),
            self.0[2].value(),
            self.0[3].value(),
        )
    }

    pub fn derivative_value(&self, k: usize) -> Vec4 {
        Vec4::new(
            self.0[0].derivative_value(k),
            self.0[1].derivative_value(k),
            self.0[2].derivative_value(k),
            self.0[3].derivative_value(k),
        )
    }

    pub fn differentiate(&self) -> Self {
        VecJet(self.0.map(|c| c.differentiate()))
    }

    pub fn truncate(&self, len: usize) -> Self {
        VecJet(self.0.map(|c| c.truncate(len)))
    }

    pub fn dot(&self, other: &VecJet) -> Jet {
        (0..4)
            .map(|i| self.0[i] * other.0[i])
            .reduce(|a, b| a + b)
            .expect("four components")
    }

    /// Componentwise action of the complex structure of C^2.
    pub fn j(&self) -> Self {
        let [x1, x2, y1, y2] = self.0;
        VecJet([-y1, -y2, x1, x2])
    }

    pub fn scale(&self, s: Jet) -> Self {
        VecJet(self.0.map(|c| c * s))
    }

    pub fn compose(&self, delta: &Jet) -> Self {
        VecJet(self.0.map(|c| c.compose(delta)))
    }
}

impl Add for VecJet {
    type Output = VecJet;
    fn add(self, rhs: VecJet) -> VecJet {
        VecJet([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
            self.0[3] + rhs.0[3],
        ])
    }
}

impl Sub for VecJet {
    type Output = VecJet;
    fn sub(self, rhs: VecJet) -> VecJet {
        self + (-rhs)
    }
}

impl Neg for VecJet {
    type Output = VecJet;
    fn neg(self) -> VecJet {
        VecJet(self.0.map(|c| -c))
    }
}

impl Mul<f64> for VecJet {
    type Output = VecJet;
    fn mul(self, rhs: f64) -> VecJet {
        VecJet(self.0.map(|c| c * rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sin_jet(s0: f64, n: usize) -> Jet {
        let d: Vec<f64> = (0..n)
            .map(|k| (s0 + k as f64 * std::f64::consts::FRAC_PI_2).sin())
            .collect();
        Jet::from_derivatives(&d)
    }

    #[test]
    fn product_rule_matches_closed_form() {
        // (sin^2)'' = 2 cos(2s)
        let s0 = 0.37;
        let sq = sin_jet(s0, 6) * sin_jet(s0, 6);
        assert_relative_eq!(sq.derivative_value(2), 2.0 * (2.0 * s0).cos(), epsilon = 1e-14);
        assert_relative_eq!(sq.derivative_value(3), -4.0 * (2.0 * s0).sin(), epsilon = 1e-13);
    }

    #[test]
    fn truncation_follows_shorter_operand() {
        let a = sin_jet(0.1, 5);
        let b = sin_jet(0.1, 3);
        assert_eq!((a * b).order(), 2);
        assert_eq!((a + Jet::constant(1.0)).order(), 4);
        assert_eq!(a.differentiate().order(), 3);
    }

    #[test]
    fn recip_and_sqrt_invert_products() {
        let x = Jet::from_derivatives(&[2.0, 0.3, -0.5, 0.7, 0.1]);
        let one = x * x.recip();
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-15);
        for k in 1..5 {
            assert!(one.coefficient(k).abs() < 1e-14);
        }
        let r = x.sqrt();
        let back = r * r;
        for k in 0..5 {
            assert_relative_eq!(back.coefficient(k), x.coefficient(k), epsilon = 1e-14);
        }
    }

    #[test]
    fn composition_applies_chain_rule() {
        // f = sin at s0, delta(e) = 2e + e^2  =>  d/de sin(s0 + 2e + e^2) at 0 = 2 cos(s0)
        let s0 = 0.8;
        let f = sin_jet(s0, 5);
        let delta = Jet::from_coefficients(&[0.0, 2.0, 1.0, 0.0, 0.0]);
        let h = f.compose(&delta);
        assert_relative_eq!(h.derivative_value(1), 2.0 * s0.cos(), epsilon = 1e-14);
        // second derivative: 4 * (-sin) + 2 * cos
        assert_relative_eq!(
            h.derivative_value(2),
            -4.0 * s0.sin() + 2.0 * s0.cos(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn integrate_then_differentiate_round_trips() {
        let x = Jet::from_derivatives(&[1.0, -2.0, 3.0]);
        let back = x.integrate(5.0).differentiate();
        for k in 0..3 {
            assert_relative_eq!(back.coefficient(k), x.coefficient(k), epsilon = 1e-15);
        }
    }
}
