//! Planar and spatial primitives: distances, orientation, intersection.

use crate::flowfield::Vec3;

pub fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + s * ab)).norm()
}

/// Closest-point distance from `p` to triangle `abc` (region tests on the
/// barycentric coordinates).
pub fn point_triangle_distance(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (p - (a + v * ab)).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (p - (a + w * ac)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + w * (c - b))).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (p - (a + ab * v + ac * w)).norm()
}

/// Twice the signed area of the closed polygon (positive when CCW).
pub fn signed_area2(points: &[Vec3]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (p, q) = (points[i], points[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum()
}

/// Winding number of a closed polygon around `p` (planar, xy).
pub fn winding_number(points: &[Vec3], p: &Vec3) -> i32 {
    let n = points.len();
    let mut wn = 0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        if a[1] <= p[1] {
            if b[1] > p[1] && cross > 0.0 {
                wn += 1;
            }
        } else if b[1] <= p[1] && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

fn orient(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: &Vec3, b: &Vec3, p: &Vec3) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test in the xy plane.
pub fn segments_intersect(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// A segment of loop `loop_id`, index `index` out of `loop_len`.
#[derive(Debug, Clone, Copy)]
pub struct LoopSegment {
    pub loop_id: usize,
    pub index: usize,
    pub loop_len: usize,
    pub a: Vec3,
    pub b: Vec3,
}

impl LoopSegment {
    fn adjacent(&self, other: &LoopSegment) -> bool {
        if self.loop_id != other.loop_id {
            return false;
        }
        let n = self.loop_len;
        let d = (self.index + n - other.index) % n;
        d == 1 || d == n - 1 || d == 0
    }
}

/// Sweep over segments sorted by their left end; returns the first pair of
/// non-adjacent segments that intersect.
pub fn find_intersection(segments: &[LoopSegment]) -> Option<(usize, usize, usize)> {
    let min_x = |s: &LoopSegment| s.a[0].min(s.b[0]);
    let max_x = |s: &LoopSegment| s.a[0].max(s.b[0]);
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by(|&i, &j| min_x(&segments[i]).total_cmp(&min_x(&segments[j])));

    let mut active: Vec<usize> = Vec::new();
    for &k in &order {
        let s = &segments[k];
        let left = min_x(s);
        active.retain(|&o| max_x(&segments[o]) >= left);
        let (s_lo, s_hi) = (s.a[1].min(s.b[1]), s.a[1].max(s.b[1]));
        for &o in &active {
            let t = &segments[o];
            if t.a[1].max(t.b[1]) < s_lo || t.a[1].min(t.b[1]) > s_hi || s.adjacent(t) {
                continue;
            }
            if segments_intersect(&s.a, &s.b, &t.a, &t.b) {
                return Some((s.loop_id, s.index.min(t.index), s.index.max(t.index)));
            }
        }
        active.push(k);
    }
    None
}
