//! Initial shapes: boundary markers and interior quadrature rules.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::geometry::{signed_area2, winding_number};
use super::Boundary;
use crate::flowfield::{point, Vec3};
use crate::numerics::gauss_legendre;
use crate::{Error, Result};

/// One connected piece of the initial volume.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Disk in 2-D, ball in 3-D.
    Disk { center: Vec<f64>, radius: f64 },
    /// Planar annulus in 2-D, spherical shell in 3-D.
    Annulus {
        center: Vec<f64>,
        inner: f64,
        outer: f64,
    },
    /// Simple polygon (2-D only), either orientation.
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Polar/spherical tensor Gauss rule for round shapes; collapsed
    /// (Duffy) Gauss rule on an ear-clipping triangulation for polygons.
    TensorGauss { order: usize },
    /// Polygons only: each triangle of the ear-clipping triangulation is
    /// split `4^refinement` times and integrated with a 3x3 collapsed Gauss
    /// rule.
    Triangulation { refinement: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeShapeSpec {
    /// Connected components; the volume may be disconnected.
    pub shapes: Vec<Shape>,
    /// Markers per boundary loop (2-D) or minimum vertex count per closed
    /// surface (3-D). At least 64.
    pub markers: usize,
    pub quadrature: QuadratureRule,
}

impl VolumeShapeSpec {
    pub fn single(shape: Shape, markers: usize, quadrature: QuadratureRule) -> Self {
        Self {
            shapes: vec![shape],
            markers,
            quadrature,
        }
    }
}

/// Boundary loops/surfaces plus interior nodes and plain quadrature weights.
pub(super) struct Discretized {
    pub boundary: Vec<Boundary>,
    pub nodes: Vec<Vec3>,
    pub weights: Vec<f64>,
}

pub(super) fn validate(spec: &VolumeShapeSpec, dimension: usize) -> Result<()> {
    if spec.markers < 64 {
        return Err(Error::invalid(format!(
            "marker count must be at least 64, got {}",
            spec.markers
        )));
    }
    if spec.shapes.is_empty() {
        return Err(Error::invalid("volume needs at least one shape"));
    }
    if let QuadratureRule::TensorGauss { order: 0 } = spec.quadrature {
        return Err(Error::invalid("quadrature order must be positive"));
    }
    for shape in &spec.shapes {
        match shape {
            Shape::Disk { center, radius } => {
                check_center(center, dimension)?;
                if !(*radius > 0.0) {
                    return Err(Error::invalid(format!("radius must be positive, got {radius}")));
                }
            }
            Shape::Annulus { center, inner, outer } => {
                check_center(center, dimension)?;
                if !(*inner > 0.0 && outer > inner) {
                    return Err(Error::invalid(format!(
                        "annulus needs 0 < inner < outer, got {inner}, {outer}"
                    )));
                }
            }
            Shape::Polygon { vertices } => {
                if dimension != 2 {
                    return Err(Error::invalid("polygon shapes are two-dimensional"));
                }
                if vertices.len() < 3 {
                    return Err(Error::invalid("polygon needs at least 3 vertices"));
                }
            }
        }
    }
    Ok(())
}

fn check_center(center: &[f64], dimension: usize) -> Result<()> {
    if center.len() != dimension {
        return Err(Error::invalid(format!(
            "center has {} coordinates, dimension is {dimension}",
            center.len()
        )));
    }
    Ok(())
}

/// Whether `x` lies in the closed shape.
pub(super) fn contains(shape: &Shape, x: &Vec3) -> Result<bool> {
    Ok(match shape {
        Shape::Disk { center, radius } => (x - point(center)?).norm() <= *radius,
        Shape::Annulus { center, inner, outer } => {
            let r = (x - point(center)?).norm();
            r >= *inner && r <= *outer
        }
        Shape::Polygon { vertices } => {
            let pts: Vec<Vec3> = vertices.iter().map(|v| Vec3::new(v[0], v[1], 0.0)).collect();
            winding_number(&pts, x) != 0
        }
    })
}

pub(super) fn discretize(
    shape: &Shape,
    dimension: usize,
    markers: usize,
    rule: QuadratureRule,
) -> Result<Discretized> {
    match (shape, dimension) {
        (Shape::Disk { center, radius }, 2) => {
            let c = point(center)?;
            let order = tensor_order(rule)?;
            let (nodes, weights) = polar_rule(&c, 0.0, *radius, order);
            Ok(Discretized {
                boundary: vec![Boundary::Curve(circle(&c, *radius, markers, false))],
                nodes,
                weights,
            })
        }
        (Shape::Annulus { center, inner, outer }, 2) => {
            let c = point(center)?;
            let order = tensor_order(rule)?;
            let (nodes, weights) = polar_rule(&c, *inner, *outer, order);
            Ok(Discretized {
                boundary: vec![
                    Boundary::Curve(circle(&c, *outer, markers, false)),
                    Boundary::Curve(circle(&c, *inner, markers, true)),
                ],
                nodes,
                weights,
            })
        }
        (Shape::Disk { center, radius }, 3) => {
            let c = point(center)?;
            let order = tensor_order(rule)?;
            let (nodes, weights) = spherical_rule(&c, 0.0, *radius, order);
            Ok(Discretized {
                boundary: vec![sphere(&c, *radius, markers, false)],
                nodes,
                weights,
            })
        }
        (Shape::Annulus { center, inner, outer }, 3) => {
            let c = point(center)?;
            let order = tensor_order(rule)?;
            let (nodes, weights) = spherical_rule(&c, *inner, *outer, order);
            Ok(Discretized {
                boundary: vec![
                    sphere(&c, *outer, markers, false),
                    sphere(&c, *inner, markers, true),
                ],
                nodes,
                weights,
            })
        }
        (Shape::Polygon { vertices }, 2) => polygon(vertices, markers, rule),
        _ => Err(Error::invalid(format!(
            "unsupported shape {shape:?} in dimension {dimension}"
        ))),
    }
}

fn tensor_order(rule: QuadratureRule) -> Result<usize> {
    match rule {
        QuadratureRule::TensorGauss { order } => Ok(order),
        QuadratureRule::Triangulation { .. } => Err(Error::invalid(
            "triangulation quadrature applies to polygon shapes",
        )),
    }
}

/// `markers` points on a circle, counter-clockwise unless `reversed`.
/// Marker `k` sits at angle `2 pi k / markers`.
fn circle(c: &Vec3, r: f64, markers: usize, reversed: bool) -> Vec<Vec3> {
    let mut pts: Vec<Vec3> = (0..markers)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / markers as f64;
            c + Vec3::new(r * th.cos(), r * th.sin(), 0.0)
        })
        .collect();
    if reversed {
        pts.reverse();
    }
    pts
}

/// Gauss in radius (weight r) times the periodic trapezoid rule in angle,
/// `4 * order` angles.
fn polar_rule(c: &Vec3, r0: f64, r1: f64, order: usize) -> (Vec<Vec3>, Vec<f64>) {
    let radial = gauss_legendre(order, r0, r1);
    let n_theta = 4 * order;
    let w_theta = 2.0 * PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(order * n_theta);
    let mut weights = Vec::with_capacity(order * n_theta);
    for &(r, wr) in &radial {
        for k in 0..n_theta {
            let th = (k as f64 + 0.5) * w_theta;
            nodes.push(c + Vec3::new(r * th.cos(), r * th.sin(), 0.0));
            weights.push(wr * r * w_theta);
        }
    }
    (nodes, weights)
}

/// Gauss in radius (weight r^2) and in cos(theta), trapezoid in azimuth.
fn spherical_rule(c: &Vec3, r0: f64, r1: f64, order: usize) -> (Vec<Vec3>, Vec<f64>) {
    let radial = gauss_legendre(order, r0, r1);
    let polar = gauss_legendre(order, -1.0, 1.0);
    let n_phi = 2 * order;
    let w_phi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for &(r, wr) in &radial {
        for &(mu, wmu) in &polar {
            let s = (1.0 - mu * mu).sqrt();
            for k in 0..n_phi {
                let ph = (k as f64 + 0.5) * w_phi;
                nodes.push(c + r * Vec3::new(s * ph.cos(), s * ph.sin(), mu));
                weights.push(wr * r * r * wmu * w_phi);
            }
        }
    }
    (nodes, weights)
}

/// Icosphere with at least `min_vertices` vertices, outward winding unless
/// `reversed`.
fn sphere(c: &Vec3, r: f64, min_vertices: usize, reversed: bool) -> Boundary {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    while vertices.len() < min_vertices {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, cc] in &triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, cc, &mut vertices);
            let ca = mid(cc, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [cc, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    if reversed {
        for tri in &mut triangles {
            tri.swap(1, 2);
        }
    }
    Boundary::Surface {
        vertices: vertices.into_iter().map(|v| c + r * v).collect(),
        triangles,
    }
}

fn polygon(vertices: &[[f64; 2]], markers: usize, rule: QuadratureRule) -> Result<Discretized> {
    let mut pts: Vec<Vec3> = vertices.iter().map(|v| Vec3::new(v[0], v[1], 0.0)).collect();
    let area2 = signed_area2(&pts);
    if area2 == 0.0 {
        return Err(Error::invalid("polygon has zero area"));
    }
    if area2 < 0.0 {
        pts.reverse();
    }
    let n = pts.len();
    let perimeter: f64 = (0..n).map(|i| (pts[(i + 1) % n] - pts[i]).norm()).sum();
    let mut curve = Vec::with_capacity(markers + n);
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let k = ((markers as f64) * (b - a).norm() / perimeter).ceil().max(1.0) as usize;
        for j in 0..k {
            curve.push(a + (b - a) * (j as f64 / k as f64));
        }
    }

    let (subdivide, order) = match rule {
        QuadratureRule::TensorGauss { order } => (0, order),
        QuadratureRule::Triangulation { refinement } => (refinement, 3),
    };
    let mut triangles = ear_clip(&pts)?;
    for _ in 0..subdivide {
        triangles = triangles
            .into_iter()
            .flat_map(|[a, b, c]| {
                let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
                [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
            })
            .collect();
    }
    let gl = gauss_legendre(order, 0.0, 1.0);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for [a, b, c] in &triangles {
        let (e1, e2) = (b - a, c - a);
        let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
        for &(u, wu) in &gl {
            for &(v, wv) in &gl {
                nodes.push(a + u * e1 + v * (1.0 - u) * e2);
                weights.push(wu * wv * (1.0 - u) * jac);
            }
        }
    }
    Ok(Discretized {
        boundary: vec![Boundary::Curve(curve)],
        nodes,
        weights,
    })
}

/// Ear clipping of a simple counter-clockwise polygon.
fn ear_clip(pts: &[Vec3]) -> Result<Vec<[Vec3; 3]>> {
    let cross = |a: &Vec3, b: &Vec3, c: &Vec3| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut out = Vec::with_capacity(pts.len().saturating_sub(2));
    while idx.len() > 3 {
        let m = idx.len();
        let ear = (0..m).find(|&k| {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (&pts[ia], &pts[ib], &pts[ic]);
            if cross(a, b, c) <= 0.0 {
                return false;
            }
            idx.iter().all(|&o| {
                if o == ia || o == ib || o == ic {
                    return true;
                }
                let p = &pts[o];
                !(cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0)
            })
        });
        let k = ear.ok_or_else(|| Error::invalid("polygon is not simple"))?;
        out.push([pts[idx[(k + m - 1) % m]], pts[idx[k]], pts[idx[(k + 1) % m]]]);
        idx.remove(k);
    }
    out.push([pts[idx[0]], pts[idx[1]], pts[idx[2]]]);
    Ok(out)
}
