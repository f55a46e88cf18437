use crate::channel_model::{Position2D, Region};
use crate::{Error, Result};

/// `normal^T r >= offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl HalfPlane {
    /// Signed distance to the boundary; nonnegative inside.
    pub fn slack(&self, p: &Position2D) -> f64 {
        self.normal[0] * p.x + self.normal[1] * p.y - self.offset
    }
}

/// First-order linearization of `||r - other|| >= spacing` at `anchor`:
/// `(anchor - other)^T (r - other) / ||anchor - other|| >= spacing`.
///
/// Any point satisfying the half-plane keeps the true distance (Cauchy-Schwarz).
pub fn distance_linearization(anchor: &Position2D, other: &Position2D, spacing: f64) -> Result<HalfPlane> {
    let d = [anchor.x - other.x, anchor.y - other.y];
    let len = d[0].hypot(d[1]);
    if !(len > 0.0) {
        return Err(Error::DegenerateAnchor);
    }
    let normal = [d[0] / len, d[1] / len];
    Ok(HalfPlane { normal, offset: spacing + normal[0] * other.x + normal[1] * other.y })
}

/// Shape of a clipped convex feasible set.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Empty,
    Point(Position2D),
    Segment(Position2D, Position2D),
    Polygon(Vec<Position2D>),
}

fn clip(poly: &[Position2D], h: &HalfPlane, tol: f64) -> Vec<Position2D> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for (i, a) in poly.iter().enumerate() {
        let b = &poly[(i + 1) % poly.len()];
        let (sa, sb) = (h.slack(a) + tol, h.slack(b) + tol);
        if sa >= 0.0 {
            out.push(*a);
        }
        if (sa >= 0.0) != (sb >= 0.0) {
            let t = sa / (sa - sb);
            out.push(Position2D::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
        }
    }
    out
}

/// Intersection of `region` with the half-planes, each relaxed by `tol`,
/// classified by dimension at resolution `tol`.
pub fn feasible_set(region: &Region, cuts: &[HalfPlane], tol: f64) -> FeasibleSet {
    let mut poly = vec![
        Position2D::new(region.x_min, region.y_min),
        Position2D::new(region.x_max, region.y_min),
        Position2D::new(region.x_max, region.y_max),
        Position2D::new(region.x_min, region.y_max),
    ];
    for h in cuts {
        poly = clip(&poly, h, tol);
        if poly.is_empty() {
            return FeasibleSet::Empty;
        }
    }
    let mut far = (0, 0, 0.0);
    for i in 0..poly.len() {
        for j in i + 1..poly.len() {
            let d = poly[i].distance(&poly[j]);
            if d > far.2 {
                far = (i, j, d);
            }
        }
    }
    let (a, b, diameter) = far;
    // Each relaxed cut adds up to `tol` of slack on either side.
    if diameter <= 4.0 * tol {
        return FeasibleSet::Point(poly[0]);
    }
    let e = [(poly[b].x - poly[a].x) / diameter, (poly[b].y - poly[a].y) / diameter];
    let width = poly
        .iter()
        .map(|p| ((p.x - poly[a].x) * e[1] - (p.y - poly[a].y) * e[0]).abs())
        .fold(0.0, f64::max);
    if width <= 4.0 * tol {
        FeasibleSet::Segment(poly[a], poly[b])
    } else {
        FeasibleSet::Polygon(poly)
    }
}

/// The four sides of `region` as half-planes.
pub fn region_half_planes(region: &Region) -> [HalfPlane; 4] {
    [
        HalfPlane { normal: [1.0, 0.0], offset: region.x_min },
        HalfPlane { normal: [-1.0, 0.0], offset: -region.x_max },
        HalfPlane { normal: [0.0, 1.0], offset: region.y_min },
        HalfPlane { normal: [0.0, -1.0], offset: -region.y_max },
    ]
}
