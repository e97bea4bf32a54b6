//! Sample tables and meshes written by the command-line tool.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::ambient::{SpherePoint, StereoChart, Vec4};
use crate::curve::{sample_grid, SpaceCurve};
use crate::error::{Error, Result};
use crate::generators::{lattice, HopfCylinderPatch, LegendreFrame};
use crate::sasakian::TannoStructure;

/// Parameter region sampled for the cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CylinderDomain {
    /// The parallelogram `p w1 + q w2`, `p, q in [0, 1]`, of the period lattice.
    #[default]
    Parallelogram,
    /// The rectangle `[0, 2 pi / A] x [0, 2 pi a]`; its `v = 0` row is the biharmonic curve.
    Strip,
}

/// Common header `{a, c, A, B, frame}`.
pub fn structure_meta(t: &TannoStructure, frame: &LegendreFrame) -> Value {
    json!({
        "a": t.a(),
        "c": t.c(),
        "A": t.slow_freq(),
        "B": t.fast_freq(),
        "frame": frame.components(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveSample {
    pub s: f64,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveSamples {
    pub meta: Value,
    pub samples: Vec<CurveSample>,
}

/// `n` samples of `(s, gamma(s), gamma'(s))` evenly covering the curve's domain.
pub fn sample_curve(meta: Value, curve: &dyn SpaceCurve, n: usize) -> CurveSamples {
    let samples = sample_grid(curve.domain(), n)
        .map(|s| CurveSample {
            s,
            p: curve.point(s).iter().copied().collect(),
            dp: curve.velocity(s).iter().copied().collect(),
        })
        .collect();
    CurveSamples { meta, samples }
}

/// Samples from explicit point and velocity maps (used for curves outside the 3-sphere).
pub fn sample_map<const D: usize>(
    meta: Value,
    domain: (f64, f64),
    n: usize,
    f: impl Fn(f64) -> ([f64; D], [f64; D]),
) -> CurveSamples {
    let samples = sample_grid(domain, n)
        .map(|s| {
            let (p, dp) = f(s);
            CurveSample { s, p: p.to_vec(), dp: dp.to_vec() }
        })
        .collect();
    CurveSamples { meta, samples }
}

impl CurveSamples {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("samples serialize")
    }

    /// Columns `s, p1..pD, dp1..dpD` with a header row.
    pub fn to_csv(&self) -> String {
        let dim = self.samples.first().map_or(4, |s| s.p.len());
        let mut out = String::from("s");
        for i in 1..=dim {
            let _ = write!(out, ",p{i}");
        }
        for i in 1..=dim {
            let _ = write!(out, ",dp{i}");
        }
        out.push('\n');
        for row in &self.samples {
            let _ = write!(out, "{:?}", row.s);
            for x in row.p.iter().chain(&row.dp) {
                let _ = write!(out, ",{x:?}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridVertex {
    pub u: f64,
    pub v: f64,
    pub p: [f64; 4],
}

/// Row-major `rows x cols` samples of the cylinder; rows vary the second
/// parameter (`q` or `v`) and columns the first.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceGrid {
    pub meta: Value,
    pub rows: usize,
    pub cols: usize,
    pub vertices: Vec<GridVertex>,
}

pub fn sample_cylinder(patch: &HopfCylinderPatch, n: usize, domain: CylinderDomain) -> SurfaceGrid {
    let t = patch.tanno();
    let mut meta = structure_meta(t, patch.frame());
    let lat = lattice(t);
    let map: Box<dyn Fn(f64, f64) -> [f64; 2]> = match domain {
        CylinderDomain::Parallelogram => {
            meta["domain"] = json!({ "kind": "parallelogram", "w1": lat.w1, "w2": lat.w2 });
            Box::new(move |p, q| lat.point([0.0, 0.0], p, q))
        }
        CylinderDomain::Strip => {
            let (lu, lv) = (2.0 * std::f64::consts::PI / t.slow_freq(), 2.0 * std::f64::consts::PI * t.a());
            meta["domain"] = json!({ "kind": "strip", "u": [0.0, lu], "v": [0.0, lv] });
            Box::new(move |p, q| [p * lu, q * lv])
        }
    };
    let steps: Vec<f64> = sample_grid((0.0, 1.0), n).collect();
    let mut vertices = Vec::with_capacity(n * n);
    for &q in &steps {
        for &p in &steps {
            let [u, v] = map(p, q);
            let x = patch.point(u, v);
            vertices.push(GridVertex { u, v, p: [x[0], x[1], x[2], x[3]] });
        }
    }
    SurfaceGrid { meta, rows: n, cols: n, vertices }
}

impl SurfaceGrid {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,p1,p2,p3,p4\n");
        for g in &self.vertices {
            let _ = writeln!(out, "{:?},{:?},{:?},{:?},{:?},{:?}", g.u, g.v, g.p[0], g.p[1], g.p[2], g.p[3]);
        }
        out
    }

    /// Stereographic mesh from `(-1, 0, 0, 0)`. A vertex too close to the
    /// projection point triggers one retry projecting from its antipode.
    pub fn to_obj(&self) -> Result<String> {
        let chart = StereoChart::new(SpherePoint::normalize(&Vec4::new(1.0, 0.0, 0.0, 0.0)));
        let projected = match self.project(&chart) {
            Ok(p) => p,
            Err((Error::AntipodalPoint { .. }, bad)) => {
                self.project(&StereoChart::new(SpherePoint::normalize(&bad))).map_err(|(e, _)| e)?
            }
            Err((e, _)) => return Err(e),
        };
        let mut out = String::new();
        for y in &projected {
            let _ = writeln!(out, "v {:?} {:?} {:?}", y[0], y[1], y[2]);
        }
        let index = |r: usize, c: usize| r * self.cols + c + 1;
        for r in 0..self.rows.saturating_sub(1) {
            for c in 0..self.cols.saturating_sub(1) {
                let (a, b, cc, d) = (index(r, c), index(r, c + 1), index(r + 1, c + 1), index(r + 1, c));
                let _ = writeln!(out, "f {a} {b} {cc}");
                let _ = writeln!(out, "f {a} {cc} {d}");
            }
        }
        Ok(out)
    }

    fn project(&self, chart: &StereoChart) -> std::result::Result<Vec<[f64; 3]>, (Error, Vec4)> {
        self.vertices
            .iter()
            .map(|g| {
                let x = Vec4::from(g.p);
                chart
                    .to_chart(&SpherePoint::normalize(&x))
                    .map(|y| [y[0], y[1], y[2]])
                    .map_err(|e| (e, x))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{hopf_cylinder, legendre_biharmonic_curve};

    fn setup(a: f64) -> (TannoStructure, LegendreFrame) {
        (TannoStructure::new(a).unwrap(), LegendreFrame::default())
    }

    #[test]
    fn curve_csv_has_header_and_rows() {
        let (t, f) = setup(0.5);
        let c = legendre_biharmonic_curve(&t, &f);
        let csv = sample_curve(structure_meta(&t, &f), &c, 3).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s,p1,p2,p3,p4,dp1,dp2,dp3,dp4");
        assert_eq!(lines.len(), 4);
        let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
        assert!((first[1] - t.slow_weight().sqrt()).abs() < 1e-15);
        assert!((first[2] - t.fast_weight().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn parallelogram_corners_coincide() {
        let (t, f) = setup(0.3);
        let g = sample_cylinder(&hopf_cylinder(&t, &f), 32, CylinderDomain::Parallelogram);
        assert_eq!(g.vertices.len(), 1024);
        let first = Vec4::from(g.vertices[0].p);
        let last = Vec4::from(g.vertices[1023].p);
        assert!((first - last).amax() < 1e-10);
        for v in &g.vertices {
            assert!((Vec4::from(v.p).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn strip_first_row_is_the_curve() {
        let (t, f) = setup(0.6);
        let g = sample_cylinder(&hopf_cylinder(&t, &f), 9, CylinderDomain::Strip);
        let c = sample_curve(structure_meta(&t, &f), &legendre_biharmonic_curve(&t, &f), 9);
        for (v, s) in g.vertices.iter().zip(&c.samples) {
            assert!((v.u - s.s).abs() < 1e-15);
            for i in 0..4 {
                assert!((v.p[i] - s.p[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn obj_counts_and_indices() {
        let (t, f) = setup(0.5);
        let g = sample_cylinder(&hopf_cylinder(&t, &f), 4, CylinderDomain::Parallelogram);
        let obj = g.to_obj().unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 16);
        let faces: Vec<&str> = obj.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(faces.len(), 18);
        let max = faces
            .iter()
            .flat_map(|l| l[2..].split(' ').map(|x| x.parse::<usize>().unwrap()))
            .max()
            .unwrap();
        assert_eq!(max, 16);
    }

    #[test]
    fn obj_repoles_when_a_vertex_hits_the_projection_point() {
        let (t, _) = setup(0.5);
        let frame = LegendreFrame::new(Vec4::new(-1.0, 0.0, 0.0, 0.0), Vec4::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        let mut g = sample_cylinder(&hopf_cylinder(&t, &frame), 3, CylinderDomain::Parallelogram);
        g.vertices[4].p = [-1.0, 0.0, 0.0, 0.0];
        let obj = g.to_obj().unwrap();
        assert!(obj.lines().filter(|l| l.starts_with("v ")).all(|l| !l.contains("inf") && !l.contains("NaN")));
    }
}
