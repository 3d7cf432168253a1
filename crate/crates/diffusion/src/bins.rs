//! Boundary bins for exit and balayage histograms: two points in d = 1,
//! equal angles in d = 2, icosahedral refinement in d = 3 (with exact
//! spherical areas, so the uniform case has known bin masses).

/// Bins over the unit sphere of directions in dimension `d`.
#[derive(Debug, Clone)]
pub enum BoundaryBins {
    /// d = 1: bin 0 is the negative side, bin 1 the positive side.
    TwoPoint,
    /// d = 2: `n` equal arcs, bin k covering angles [2 pi k / n, 2 pi (k+1) / n).
    EqualAngle { n: usize },
    /// d = 3: the 20 icosahedron faces, optionally subdivided once (80 bins),
    /// with exact spherical area fractions.
    Icosahedral(IcosaBins),
}

impl BoundaryBins {
    pub fn for_dim(d: usize, requested: usize) -> BoundaryBins {
        match d {
            1 => BoundaryBins::TwoPoint,
            2 => BoundaryBins::EqualAngle {
                n: requested.max(2),
            },
            3 => BoundaryBins::Icosahedral(IcosaBins::new(requested > 20)),
            _ => panic!("dimension {d} unsupported"),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BoundaryBins::TwoPoint => 2,
            BoundaryBins::EqualAngle { n } => *n,
            BoundaryBins::Icosahedral(ib) => ib.faces.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bin of a direction vector (need not be normalized).
    pub fn index(&self, dir: &[f64; 3]) -> usize {
        match self {
            BoundaryBins::TwoPoint => {
                if dir[0] < 0.0 {
                    0
                } else {
                    1
                }
            }
            BoundaryBins::EqualAngle { n } => {
                let mut a = dir[1].atan2(dir[0]);
                if a < 0.0 {
                    a += std::f64::consts::TAU;
                }
                (((a / std::f64::consts::TAU) * *n as f64) as usize).min(n - 1)
            }
            BoundaryBins::Icosahedral(ib) => ib.index(dir),
        }
    }

    /// A representative direction on the unit sphere for the bin.
    pub fn representative(&self, bin: usize) -> [f64; 3] {
        match self {
            BoundaryBins::TwoPoint => {
                if bin == 0 {
                    [-1.0, 0.0, 0.0]
                } else {
                    [1.0, 0.0, 0.0]
                }
            }
            BoundaryBins::EqualAngle { n } => {
                let a = std::f64::consts::TAU * (bin as f64 + 0.5) / *n as f64;
                [a.cos(), a.sin(), 0.0]
            }
            BoundaryBins::Icosahedral(ib) => ib.centroid(bin),
        }
    }

    /// Exact fraction of the uniform direction measure carried by the bin.
    pub fn uniform_fraction(&self, bin: usize) -> f64 {
        match self {
            BoundaryBins::TwoPoint => 0.5,
            BoundaryBins::EqualAngle { n } => 1.0 / *n as f64,
            BoundaryBins::Icosahedral(ib) => ib.area_fraction[bin],
        }
    }
}

/// Icosahedral sphere bins.
#[derive(Debug, Clone)]
pub struct IcosaBins {
    verts: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
    area_fraction: Vec<f64>,
}

impl IcosaBins {
    pub fn new(refine: bool) -> IcosaBins {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<[f64; 3]> = vec![
            [-1.0, phi, 0.0],
            [1.0, phi, 0.0],
            [-1.0, -phi, 0.0],
            [1.0, -phi, 0.0],
            [0.0, -1.0, phi],
            [0.0, 1.0, phi],
            [0.0, -1.0, -phi],
            [0.0, 1.0, -phi],
            [phi, 0.0, -1.0],
            [phi, 0.0, 1.0],
            [-phi, 0.0, -1.0],
            [-phi, 0.0, 1.0],
        ];
        for v in verts.iter_mut() {
            let n = super::point::norm(v);
            for c in v.iter_mut() {
                *c /= n;
            }
        }
        let mut faces: Vec<[usize; 3]> = vec![
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
        if refine {
            let mut new_faces = Vec::with_capacity(80);
            let mut midpoint_cache: std::collections::HashMap<(usize, usize), usize> =
                std::collections::HashMap::new();
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
                let key = (a.min(b), a.max(b));
                if let Some(&m) = midpoint_cache.get(&key) {
                    return m;
                }
                let va = verts[a];
                let vb = verts[b];
                let mut m = [va[0] + vb[0], va[1] + vb[1], va[2] + vb[2]];
                let n = super::point::norm(&m);
                for c in m.iter_mut() {
                    *c /= n;
                }
                verts.push(m);
                midpoint_cache.insert(key, verts.len() - 1);
                verts.len() - 1
            };
            for f in faces {
                let [a, b, c] = f;
                let ab = midpoint(a, b, &mut verts);
                let bc = midpoint(b, c, &mut verts);
                let ca = midpoint(c, a, &mut verts);
                new_faces.push([a, ab, ca]);
                new_faces.push([b, bc, ab]);
                new_faces.push([c, ca, bc]);
                new_faces.push([ab, bc, ca]);
            }
            faces = new_faces;
        }
        let area_fraction: Vec<f64> = faces
            .iter()
            .map(|f| spherical_triangle_area(verts[f[0]], verts[f[1]], verts[f[2]]))
            .map(|a| a / (4.0 * std::f64::consts::PI))
            .collect();
        IcosaBins {
            verts,
            faces,
            area_fraction,
        }
    }

    fn centroid(&self, bin: usize) -> [f64; 3] {
        let [a, b, c] = self.faces[bin];
        let (va, vb, vc) = (self.verts[a], self.verts[b], self.verts[c]);
        let mut m = [va[0] + vb[0] + vc[0], va[1] + vb[1] + vc[1], va[2] + vb[2] + vc[2]];
        let n = super::point::norm(&m);
        for c in m.iter_mut() {
            *c /= n;
        }
        m
    }

    fn index(&self, dir: &[f64; 3]) -> usize {
        // the faces tile the sphere; pick the face whose planar triangle the
        // ray pierces (same-side test against all three edge planes),
        // falling back to nearest centroid for points pinned on edges
        let mut best = 0usize;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, f) in self.faces.iter().enumerate() {
            let (a, b, c) = (self.verts[f[0]], self.verts[f[1]], self.verts[f[2]]);
            let s1 = triple(&a, &b, dir);
            let s2 = triple(&b, &c, dir);
            let s3 = triple(&c, &a, dir);
            if s1 >= -1e-12 && s2 >= -1e-12 && s3 >= -1e-12 {
                return i;
            }
            let cen = self.centroid(i);
            let d = cen[0] * dir[0] + cen[1] * dir[1] + cen[2] * dir[2];
            if d > best_dot {
                best_dot = d;
                best = i;
            }
        }
        best
    }
}

fn triple(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Spherical excess via l'Huilier's formula.
fn spherical_triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let ang = |u: [f64; 3], v: [f64; 3]| -> f64 {
        let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        dot.clamp(-1.0, 1.0).acos()
    };
    let (sa, sb, sc) = (ang(b, c), ang(c, a), ang(a, b));
    let s = 0.5 * (sa + sb + sc);
    let t = (s / 2.0).tan() * ((s - sa) / 2.0).tan() * ((s - sb) / 2.0).tan()
        * ((s - sc) / 2.0).tan();
    4.0 * t.max(0.0).sqrt().atan()
}
