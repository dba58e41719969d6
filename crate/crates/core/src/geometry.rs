//! Truncating regions: the catalog shapes, their volumes and boundary
//! measures, boundary quadrature nodes with outward normals, and ray-boundary
//! crossings used by the Hilbert-Schmidt oracle.

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub enum Shape {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    AxisBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Concentric shell r_in < |x - center| < r_out (d = 2 or 3).
    Annulus {
        center: Vec<f64>,
        r_in: f64,
        r_out: f64,
    },
    /// {x : x·normal < offset}; only for per-unit-boundary oracles.
    HalfPlane {
        normal: Vec<f64>,
        offset: f64,
    },
}

/// A truncating set Λ (or its complement when `complement` is set).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Region {
    pub shape: Shape,
    pub dimension: usize,
    pub complement: bool,
}

/// One boundary quadrature node: position, unit outward normal, surface weight.
#[derive(Debug, Clone)]
pub struct BoundaryNode {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let d = center.len();
        if !(2..=3).contains(&d) {
            return Err(Error::InvalidParameter("ball: dimension must be 2 or 3".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("ball: radius must be positive".into()));
        }
        Ok(Region {
            shape: Shape::Ball { center, radius },
            dimension: d,
            complement: false,
        })
    }

    pub fn unit_disk() -> Self {
        Region::ball(vec![0.0, 0.0], 1.0).expect("valid")
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Region::ball(vec![0.0, 0.0], radius)
    }

    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let d = lo.len();
        if hi.len() != d || !(2..=3).contains(&d) {
            return Err(Error::InvalidParameter("box: dimension must be 2 or 3".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(b > a)) {
            return Err(Error::InvalidParameter("box: need lo < hi per axis".into()));
        }
        Ok(Region {
            shape: Shape::AxisBox { lo, hi },
            dimension: d,
            complement: false,
        })
    }

    pub fn annulus(center: Vec<f64>, r_in: f64, r_out: f64) -> Result<Self> {
        let d = center.len();
        if !(2..=3).contains(&d) {
            return Err(Error::InvalidParameter("annulus: dimension must be 2 or 3".into()));
        }
        if !(0.0 < r_in && r_in < r_out) {
            return Err(Error::InvalidParameter("annulus: need 0 < r_in < r_out".into()));
        }
        Ok(Region {
            shape: Shape::Annulus { center, r_in, r_out },
            dimension: d,
            complement: false,
        })
    }

    pub fn half_plane(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let d = normal.len();
        if !(2..=3).contains(&d) {
            return Err(Error::InvalidParameter("half_plane: dimension must be 2 or 3".into()));
        }
        let n = norm(&normal);
        if n < 1e-14 {
            return Err(Error::InvalidParameter("half_plane: zero normal".into()));
        }
        Ok(Region {
            shape: Shape::HalfPlane {
                normal: normal.iter().map(|x| x / n).collect(),
                offset,
            },
            dimension: d,
            complement: false,
        })
    }

    /// The complementary region ℝ^d ∖ Λ̄ (boundary shared, normals flipped).
    pub fn complement(&self) -> Region {
        Region {
            complement: !self.complement,
            ..self.clone()
        }
    }

    pub fn tag(&self) -> String {
        let base = match &self.shape {
            Shape::Ball { radius, .. } => format!("ball_r{radius}"),
            Shape::AxisBox { lo, hi } => format!("box_{}x", hi[0] - lo[0]),
            Shape::Annulus { r_in, r_out, .. } => format!("annulus_{r_in}_{r_out}"),
            Shape::HalfPlane { .. } => "half_plane".into(),
        };
        if self.complement {
            format!("compl_{base}")
        } else {
            base
        }
    }

    pub fn is_bounded(&self) -> bool {
        !self.complement && !matches!(self.shape, Shape::HalfPlane { .. })
    }

    /// Volume of the base (non-complemented) shape.
    pub fn volume(&self) -> Result<f64> {
        if !self.is_bounded() {
            return Err(Error::InvalidParameter(format!(
                "volume of unbounded region {}",
                self.tag()
            )));
        }
        Ok(match &self.shape {
            Shape::Ball { radius, .. } => ball_volume(self.dimension, *radius),
            Shape::AxisBox { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Shape::Annulus { r_in, r_out, .. } => {
                ball_volume(self.dimension, *r_out) - ball_volume(self.dimension, *r_in)
            }
            Shape::HalfPlane { .. } => unreachable!(),
        })
    }

    /// |∂Λ|; for the half-plane this is interpreted per unit boundary measure.
    pub fn boundary_measure(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => sphere_measure(self.dimension, *radius),
            Shape::AxisBox { lo, hi } => {
                let sides: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
                match self.dimension {
                    2 => 2.0 * (sides[0] + sides[1]),
                    _ => 2.0 * (sides[0] * sides[1] + sides[0] * sides[2] + sides[1] * sides[2]),
                }
            }
            Shape::Annulus { r_in, r_out, .. } => {
                sphere_measure(self.dimension, *r_in) + sphere_measure(self.dimension, *r_out)
            }
            Shape::HalfPlane { .. } => 1.0,
        }
    }

    /// Smallest geometric feature (radius, side, gap); drives spacing rules.
    pub fn feature_size(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => *radius,
            Shape::AxisBox { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| b - a)
                .fold(f64::INFINITY, f64::min),
            Shape::Annulus { r_in, r_out, .. } => (r_out - r_in).min(*r_in),
            Shape::HalfPlane { .. } => f64::INFINITY,
        }
    }

    /// Membership in the region (complement-aware; boundary excluded).
    pub fn contains(&self, x: &[f64]) -> bool {
        let inside = match &self.shape {
            Shape::Ball { center, radius } => dist(x, center) < *radius,
            Shape::AxisBox { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(xi, (a, b))| *xi > *a && *xi < *b),
            Shape::Annulus { center, r_in, r_out } => {
                let r = dist(x, center);
                r > *r_in && r < *r_out
            }
            Shape::HalfPlane { normal, offset } => dot(x, normal) < *offset,
        };
        inside != self.complement
    }

    /// Axis-aligned bounding box of the base shape.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.shape {
            Shape::Ball { center, radius } => Ok((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            Shape::AxisBox { lo, hi } => Ok((lo.clone(), hi.clone())),
            Shape::Annulus { center, r_out, .. } => Ok((
                center.iter().map(|c| c - r_out).collect(),
                center.iter().map(|c| c + r_out).collect(),
            )),
            Shape::HalfPlane { .. } => Err(Error::InvalidParameter(
                "half-plane has no bounding box".into(),
            )),
        }
    }

    /// Enclosing axis box grown by `margin` on every side.
    pub fn enclosing_box(&self, margin: f64) -> Result<Region> {
        let (lo, hi) = self.bounding_box()?;
        Region::axis_box(
            lo.iter().map(|a| a - margin).collect(),
            hi.iter().map(|b| b + margin).collect(),
        )
    }

    /// Boundary quadrature with unit outward normals (flipped for
    /// complements). Weights sum to the exact boundary measure. `resolution`
    /// is a node-count hint per boundary component/axis.
    pub fn boundary_quadrature(&self, resolution: usize) -> Result<Vec<BoundaryNode>> {
        let n = resolution.max(4);
        let sign = if self.complement { -1.0 } else { 1.0 };
        let mut nodes = match (&self.shape, self.dimension) {
            (Shape::Ball { center, radius }, 2) => circle_nodes(center, *radius, n, 1.0),
            (Shape::Ball { center, radius }, 3) => sphere_nodes(center, *radius, n, 1.0),
            (Shape::Annulus { center, r_in, r_out }, 2) => {
                let mut v = circle_nodes(center, *r_out, n, 1.0);
                v.extend(circle_nodes(center, *r_in, n, -1.0));
                v
            }
            (Shape::Annulus { center, r_in, r_out }, 3) => {
                let mut v = sphere_nodes(center, *r_out, n, 1.0);
                v.extend(sphere_nodes(center, *r_in, n, -1.0));
                v
            }
            (Shape::AxisBox { lo, hi }, 2) => box_edge_nodes(lo, hi, n),
            (Shape::AxisBox { lo, hi }, 3) => box_face_nodes(lo, hi, n),
            (Shape::HalfPlane { .. }, _) => {
                return Err(Error::InvalidParameter(
                    "half-plane boundary is handled per unit measure, not by nodes".into(),
                ))
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unsupported shape/dimension {}",
                    self.tag()
                )))
            }
        };
        if sign < 0.0 {
            for node in &mut nodes {
                for c in &mut node.normal {
                    *c = -*c;
                }
            }
        }
        Ok(nodes)
    }

    /// Distances along the unit ray x + s·dir, s > 0, at which the base-shape
    /// boundary is crossed (sorted ascending). Used by the HS oracle's polar
    /// reduction.
    pub fn ray_boundary_crossings(&self, x: &[f64], dir: &[f64]) -> Vec<f64> {
        let mut out = match &self.shape {
            Shape::Ball { center, radius } => ray_sphere(x, dir, center, *radius),
            Shape::Annulus { center, r_in, r_out } => {
                let mut v = ray_sphere(x, dir, center, *r_in);
                v.extend(ray_sphere(x, dir, center, *r_out));
                v
            }
            Shape::AxisBox { lo, hi } => ray_box(x, dir, lo, hi),
            Shape::HalfPlane { normal, offset } => {
                let dn = dot(dir, normal);
                if dn.abs() < 1e-300 {
                    vec![]
                } else {
                    let s = (offset - dot(x, normal)) / dn;
                    if s > 0.0 {
                        vec![s]
                    } else {
                        vec![]
                    }
                }
            }
        };
        out.sort_by(f64::total_cmp);
        out
    }
}

fn ball_volume(d: usize, r: f64) -> f64 {
    match d {
        2 => std::f64::consts::PI * r * r,
        _ => 4.0 / 3.0 * std::f64::consts::PI * r * r * r,
    }
}

fn sphere_measure(d: usize, r: f64) -> f64 {
    match d {
        2 => 2.0 * std::f64::consts::PI * r,
        _ => 4.0 * std::f64::consts::PI * r * r,
    }
}

fn circle_nodes(center: &[f64], radius: f64, n: usize, orient: f64) -> Vec<BoundaryNode> {
    let w = 2.0 * std::f64::consts::PI * radius / n as f64;
    (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let nr = [orient * th.cos(), orient * th.sin()];
            BoundaryNode {
                point: vec![center[0] + radius * th.cos(), center[1] + radius * th.sin()],
                normal: vec![nr[0], nr[1]],
                weight: w,
            }
        })
        .collect()
}

/// Product rule on the sphere: GL in cos θ × uniform in φ; weights sum to
/// 4πr² exactly.
fn sphere_nodes(center: &[f64], radius: f64, n: usize, orient: f64) -> Vec<BoundaryNode> {
    let n_theta = n.max(8);
    let n_phi = 2 * n_theta;
    let (cs, ws) = gauss_legendre(n_theta);
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for (c, wc) in cs.iter().zip(&ws) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_phi as f64;
            let dir = [s * phi.cos(), s * phi.sin(), *c];
            out.push(BoundaryNode {
                point: vec![
                    center[0] + radius * dir[0],
                    center[1] + radius * dir[1],
                    center[2] + radius * dir[2],
                ],
                normal: vec![orient * dir[0], orient * dir[1], orient * dir[2]],
                weight: radius * radius * wc * 2.0 * std::f64::consts::PI / n_phi as f64,
            });
        }
    }
    out
}

fn box_edge_nodes(lo: &[f64], hi: &[f64], n: usize) -> Vec<BoundaryNode> {
    let mut out = Vec::new();
    // edges parallel to axis `t`, normal along axis `a`
    for a in 0..2 {
        let t = 1 - a;
        let len = hi[t] - lo[t];
        let w = len / n as f64;
        for (side, nrm) in [(lo[a], -1.0), (hi[a], 1.0)] {
            for k in 0..n {
                let mut p = vec![0.0; 2];
                p[a] = side;
                p[t] = lo[t] + len * (k as f64 + 0.5) / n as f64;
                let mut normal = vec![0.0; 2];
                normal[a] = nrm;
                out.push(BoundaryNode {
                    point: p,
                    normal,
                    weight: w,
                });
            }
        }
    }
    out
}

fn box_face_nodes(lo: &[f64], hi: &[f64], n: usize) -> Vec<BoundaryNode> {
    let mut out = Vec::new();
    for a in 0..3 {
        let (t1, t2) = match a {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (l1, l2) = (hi[t1] - lo[t1], hi[t2] - lo[t2]);
        let w = l1 * l2 / (n * n) as f64;
        for (side, nrm) in [(lo[a], -1.0), (hi[a], 1.0)] {
            for i in 0..n {
                for j in 0..n {
                    let mut p = vec![0.0; 3];
                    p[a] = side;
                    p[t1] = lo[t1] + l1 * (i as f64 + 0.5) / n as f64;
                    p[t2] = lo[t2] + l2 * (j as f64 + 0.5) / n as f64;
                    let mut normal = vec![0.0; 3];
                    normal[a] = nrm;
                    out.push(BoundaryNode {
                        point: p,
                        normal,
                        weight: w,
                    });
                }
            }
        }
    }
    out
}

fn ray_sphere(x: &[f64], dir: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    // |x + s dir - c|² = r²
    let rel: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
    let b = dot(&rel, dir);
    let c = dot(&rel, &rel) - radius * radius;
    let disc = b * b - c;
    if disc <= 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    [-b - sq, -b + sq].into_iter().filter(|&s| s > 1e-14).collect()
}

fn ray_box(x: &[f64], dir: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for a in 0..x.len() {
        if dir[a].abs() < 1e-300 {
            continue;
        }
        for plane in [lo[a], hi[a]] {
            let s = (plane - x[a]) / dir[a];
            if s > 1e-14 {
                // crossing counts only if the point lies inside the face
                let on_face = (0..x.len()).all(|b| {
                    b == a || {
                        let v = x[b] + s * dir[b];
                        v >= lo[b] - 1e-12 && v <= hi[b] + 1e-12
                    }
                });
                if on_face {
                    out.push(s);
                }
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn boundary_weights_sum_to_measure() {
        let cases = vec![
            Region::unit_disk(),
            Region::ball(vec![0.5, -0.25, 0.0], 1.5).unwrap(),
            Region::axis_box(vec![-1.0, 0.0], vec![2.0, 1.0]).unwrap(),
            Region::axis_box(vec![-1.0, 0.0, -0.5], vec![1.0, 1.0, 0.5]).unwrap(),
            Region::annulus(vec![0.0, 0.0], 0.5, 1.25).unwrap(),
        ];
        for r in cases {
            let nodes = r.boundary_quadrature(40).unwrap();
            let total: f64 = nodes.iter().map(|n| n.weight).sum();
            assert_abs_diff_eq!(total, r.boundary_measure(), epsilon = 1e-10 * total.abs());
            for node in &nodes {
                assert_abs_diff_eq!(norm(&node.normal), 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn complement_flips_normals_keeps_measure() {
        let r = Region::unit_disk();
        let c = r.complement();
        assert_abs_diff_eq!(c.boundary_measure(), 2.0 * PI, epsilon = 1e-12);
        let n0 = &r.boundary_quadrature(16).unwrap()[3];
        let n1 = &c.boundary_quadrature(16).unwrap()[3];
        for (a, b) in n0.normal.iter().zip(&n1.normal) {
            assert_abs_diff_eq!(*a, -*b, epsilon = 1e-15);
        }
        assert!(r.contains(&[0.1, 0.0]) && !c.contains(&[0.1, 0.0]));
        assert!(!r.contains(&[3.0, 0.0]) && c.contains(&[3.0, 0.0]));
    }

    #[test]
    fn volumes() {
        assert_abs_diff_eq!(Region::unit_disk().volume().unwrap(), PI, epsilon = 1e-14);
        assert_abs_diff_eq!(
            Region::ball(vec![0.0; 3], 2.0).unwrap().volume().unwrap(),
            32.0 * PI / 3.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            Region::axis_box(vec![0.0, 0.0], vec![2.0, 3.0]).unwrap().volume().unwrap(),
            6.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            Region::annulus(vec![0.0, 0.0], 1.0, 2.0).unwrap().volume().unwrap(),
            3.0 * PI,
            epsilon = 1e-12
        );
        assert!(Region::unit_disk().complement().volume().is_err());
    }

    #[test]
    fn annulus_inner_normals_point_inward() {
        let r = Region::annulus(vec![0.0, 0.0], 1.0, 2.0).unwrap();
        let nodes = r.boundary_quadrature(64).unwrap();
        for n in nodes {
            let rad = norm(&n.point);
            let outward = dot(&n.normal, &n.point) / rad;
            if (rad - 2.0).abs() < 1e-9 {
                assert!(outward > 0.99);
            } else {
                assert!(outward < -0.99, "inner normal should point into the hole");
            }
        }
    }

    #[test]
    fn ray_crossings_ball_and_box() {
        let disk = Region::unit_disk();
        let s = disk.ray_boundary_crossings(&[0.0, 0.0], &[1.0, 0.0]);
        assert_eq!(s.len(), 1);
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-14);

        let from_outside = disk.ray_boundary_crossings(&[-2.0, 0.0], &[1.0, 0.0]);
        assert_eq!(from_outside.len(), 2);
        assert_abs_diff_eq!(from_outside[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(from_outside[1], 3.0, epsilon = 1e-14);

        let b = Region::axis_box(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let s = b.ray_boundary_crossings(&[0.5, 1.0], &[0.0, 1.0]);
        assert_eq!(s.len(), 1);
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-14);
        let diag = b.ray_boundary_crossings(&[0.5, 1.0], &[(0.5f64).sqrt(), (0.5f64).sqrt()]);
        assert_eq!(diag.len(), 1);
    }

    #[test]
    fn feature_sizes() {
        assert_abs_diff_eq!(Region::unit_disk().feature_size(), 1.0);
        assert_abs_diff_eq!(
            Region::axis_box(vec![0.0, 0.0], vec![0.5, 4.0]).unwrap().feature_size(),
            0.5
        );
        assert_abs_diff_eq!(
            Region::annulus(vec![0.0, 0.0], 0.8, 1.0).unwrap().feature_size(),
            0.2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn enclosing_box_contains_shape() {
        let r = Region::unit_disk();
        let boxed = r.enclosing_box(0.5).unwrap();
        assert!(boxed.contains(&[1.2, 0.9]));
        assert_abs_diff_eq!(boxed.volume().unwrap(), 9.0, epsilon = 1e-12);
    }

    #[test]
    fn sphere_quadrature_integrates_linear_exactly() {
        // ∫_{S²} z dσ = 0; ∫ 1 dσ = 4π r²
        let r = Region::ball(vec![0.0; 3], 1.5).unwrap();
        let nodes = r.boundary_quadrature(24).unwrap();
        let z: f64 = nodes.iter().map(|n| n.weight * n.point[2]).sum();
        assert_abs_diff_eq!(z, 0.0, epsilon = 1e-10);
    }
}
