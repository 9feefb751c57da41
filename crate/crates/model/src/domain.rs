//! The convex polygon of admissible densities `(rho, u)`.

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub vertices: Vec<(f64, f64)>,
}

impl Domain {
    /// Convex hull of a point set (monotone chain).
    pub fn hull(points: &[(f64, f64)]) -> Self {
        let mut pts: Vec<(f64, f64)> = points.to_vec();
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
        pts.dedup();
        if pts.len() < 3 {
            return Self { vertices: pts };
        }
        let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        };
        let mut lower: Vec<(f64, f64)> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<(f64, f64)> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self { vertices: lower }
    }

    /// Signed distance to the boundary: positive inside, negative outside.
    pub fn depth(&self, rho: f64, u: f64) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return f64::NEG_INFINITY;
        }
        let mut d = f64::INFINITY;
        for i in 0..n {
            let (x0, y0) = self.vertices[i];
            let (x1, y1) = self.vertices[(i + 1) % n];
            let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
            let c = ((x1 - x0) * (u - y0) - (y1 - y0) * (rho - x0)) / len;
            d = d.min(c);
        }
        d
    }

    /// Strict interior test.
    pub fn contains_interior(&self, rho: f64, u: f64) -> bool {
        self.depth(rho, u) > 0.0
    }

    /// Closed-set membership up to `tol`.
    pub fn contains(&self, rho: f64, u: f64, tol: f64) -> bool {
        self.depth(rho, u) >= -tol
    }

    /// Bounding box `(rho_min, rho_max, u_min, u_max)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &self.vertices {
            b.0 = b.0.min(x);
            b.1 = b.1.max(x);
            b.2 = b.2.min(y);
            b.3 = b.3.max(y);
        }
        b
    }
}
