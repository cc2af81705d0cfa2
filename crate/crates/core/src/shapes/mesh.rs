//! Closed, consistently oriented triangle meshes.

use std::collections::HashMap;

use rand::Rng;

use super::BoundaryDraw;
use crate::estimate::{compensated_sum, splitmix64};
use crate::{Error, Result, Vec3};

/// Rays whose direction makes `|σ·n| < GRAZING` with a hit face are re-cast.
pub const GRAZING: f64 = 1e-7;
/// Magnitude of the direction jitter used when re-casting.
pub const JITTER: f64 = 1e-7;
/// Maximum number of re-casts before a ray query gives up.
pub const MAX_RETRIES: usize = 3;

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
    cdf: Vec<f64>,
    area: f64,
    volume: f64,
    lo: Vec3,
    hi: Vec3,
    curvature: Vec<Option<f64>>,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.faces == other.faces
    }
}

struct Hit {
    t: f64,
    cos: f64,
    near_edge: bool,
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.len() < 4 || faces.len() < 4 {
            return Err(Error::InvalidBody("mesh needs at least 4 vertices and 4 faces".into()));
        }
        if vertices.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidBody("non-finite vertex coordinate".into()));
        }
        let mut edges: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * faces.len());
        let mut normals = Vec::with_capacity(faces.len());
        let mut areas = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::InvalidBody(format!("face {fi} references a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidBody(format!("face {fi} repeats a vertex")));
            }
            let cross = (vertices[f[1]] - vertices[f[0]]).cross(&(vertices[f[2]] - vertices[f[0]]));
            let norm = cross.norm();
            if norm == 0.0 {
                return Err(Error::InvalidBody(format!("face {fi} has zero area")));
            }
            normals.push(cross / norm);
            areas.push(0.5 * norm);
            for k in 0..3 {
                *edges.entry((f[k], f[(k + 1) % 3])).or_default() += 1;
            }
        }
        for (&(a, b), &n) in &edges {
            if n != 1 {
                return Err(Error::InvalidBody(format!(
                    "directed edge ({a},{b}) used {n} times: inconsistent winding or non-manifold"
                )));
            }
            if !edges.contains_key(&(b, a)) {
                return Err(Error::InvalidBody(format!(
                    "edge ({a},{b}) is a boundary edge: mesh not closed"
                )));
            }
        }
        let volume = compensated_sum(
            faces
                .iter()
                .map(|f| vertices[f[0]].dot(&vertices[f[1]].cross(&vertices[f[2]])) / 6.0),
        );
        if !(volume > 0.0) {
            return Err(Error::InvalidBody(format!(
                "signed volume {volume:.3e} is not positive: faces must wind outward"
            )));
        }
        let mut lo = vertices[0];
        let mut hi = vertices[0];
        for v in &vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        let area = compensated_sum(areas.iter().copied());
        let mut acc = 0.0;
        let cdf = areas
            .iter()
            .map(|a| {
                acc += a;
                acc / area
            })
            .collect();
        let mut mesh = Self {
            vertices,
            faces,
            normals,
            areas,
            cdf,
            area,
            volume,
            lo,
            hi,
            curvature: Vec::new(),
        };
        mesh.curvature = mesh.vertex_curvatures();
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_normal(&self, face: usize) -> Vec3 {
        self.normals[face]
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Length of the bounding-box diagonal.
    pub fn diameter(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    pub fn centroid(&self) -> Vec3 {
        0.5 * (self.lo + self.hi)
    }

    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        let vertices = self.vertices.iter().map(f).collect();
        Self::new(vertices, self.faces.clone()).expect("similarity preserves validity")
    }

    /// Cotangent mean-curvature vector with one-third vertex areas,
    /// projected on the area-weighted vertex normal.
    fn vertex_curvatures(&self) -> Vec<Option<f64>> {
        let n = self.vertices.len();
        let mut k = vec![Vec3::zeros(); n];
        let mut a = vec![0.0; n];
        let mut nrm = vec![Vec3::zeros(); n];
        for (fi, f) in self.faces.iter().enumerate() {
            for c in 0..3 {
                let (i, p, q) = (f[c], f[(c + 1) % 3], f[(c + 2) % 3]);
                let e1 = self.vertices[p] - self.vertices[i];
                let e2 = self.vertices[q] - self.vertices[i];
                let cot = e1.dot(&e2) / e1.cross(&e2).norm();
                let d = self.vertices[p] - self.vertices[q];
                k[p] += d * cot;
                k[q] -= d * cot;
                a[i] += self.areas[fi] / 3.0;
                nrm[i] += self.normals[fi] * self.areas[fi];
            }
        }
        (0..n)
            .map(|i| {
                let nn = nrm[i].norm();
                if a[i] <= 0.0 || nn == 0.0 {
                    return None;
                }
                let h = k[i].dot(&(nrm[i] / nn)) / (2.0 * a[i]);
                h.is_finite().then_some(h)
            })
            .collect()
    }

    pub fn vertex_curvature(&self, vertex: usize) -> Result<f64> {
        self.curvature
            .get(vertex)
            .copied()
            .flatten()
            .ok_or(Error::DegenerateVertex(vertex))
    }

    fn barycentric(&self, face: usize, x: &Vec3) -> [f64; 3] {
        let f = self.faces[face];
        let (a, b, c) = (self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]);
        let n = (b - a).cross(&(c - a));
        let n2 = n.norm_squared();
        let wa = (c - b).cross(&(x - b)).dot(&n) / n2;
        let wb = (a - c).cross(&(x - c)).dot(&n) / n2;
        [wa, wb, 1.0 - wa - wb]
    }

    fn interpolated_curvature(&self, face: usize, x: &Vec3) -> Result<f64> {
        let w = self.barycentric(face, x);
        let f = self.faces[face];
        let mut h = 0.0;
        for k in 0..3 {
            h += w[k] * self.vertex_curvature(f[k])?;
        }
        Ok(h)
    }

    /// Face nearest to `x` together with its distance.
    fn nearest_face(&self, x: &Vec3) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for fi in 0..self.faces.len() {
            let d = self.distance_to_face(fi, x);
            if d < best.1 {
                best = (fi, d);
            }
        }
        best
    }

    fn distance_to_face(&self, face: usize, x: &Vec3) -> f64 {
        let f = self.faces[face];
        let p = [self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]];
        let n = self.normals[face];
        let off = (x - p[0]).dot(&n);
        let proj = x - n * off;
        let w = self.barycentric(face, &proj);
        if w.iter().all(|&wi| wi >= 0.0) {
            return off.abs();
        }
        (0..3)
            .map(|k| {
                let (a, b) = (p[k], p[(k + 1) % 3]);
                let ab = b - a;
                let s = ((x - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
                (x - (a + ab * s)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn mean_curvature_at(&self, x: &Vec3) -> Result<f64> {
        let (face, d) = self.nearest_face(x);
        if d > 1e-6 * self.diameter() {
            return Err(Error::Domain("point is not on the mesh surface".into()));
        }
        self.interpolated_curvature(face, x)
    }

    pub fn project(&self, p: &Vec3) -> Vec3 {
        let (face, _) = self.nearest_face(p);
        let n = self.normals[face];
        let a = self.vertices[self.faces[face][0]];
        p - n * (p - a).dot(&n)
    }

    /// Möller–Trumbore; returns the ray parameter even when negative.
    fn intersect(&self, face: usize, orig: &Vec3, dir: &Vec3) -> Option<Hit> {
        let f = self.faces[face];
        let v0 = self.vertices[f[0]];
        let e1 = self.vertices[f[1]] - v0;
        let e2 = self.vertices[f[2]] - v0;
        let p = dir.cross(&e2);
        let det = e1.dot(&p);
        let scale = e1.norm() * e2.norm();
        if det.abs() <= 1e-15 * scale {
            return None;
        }
        let inv = 1.0 / det;
        let s = orig - v0;
        let u = s.dot(&p) * inv;
        let q = s.cross(&e1);
        let v = dir.dot(&q) * inv;
        const EDGE: f64 = 1e-9;
        if u < -EDGE || v < -EDGE || u + v > 1.0 + EDGE {
            return None;
        }
        let near_edge = u < EDGE || v < EDGE || u + v > 1.0 - EDGE;
        Some(Hit {
            t: e2.dot(&q) * inv,
            cos: dir.dot(&self.normals[face]),
            near_edge,
        })
    }

    fn jittered(dir: &Vec3, key: u64, attempt: usize) -> Vec3 {
        let mut h = splitmix64(key ^ (attempt as u64).wrapping_mul(0x9e37_79b9));
        let mut comp = || {
            h = splitmix64(h);
            (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let j = Vec3::new(comp(), comp(), comp());
        (dir + j * JITTER).normalize()
    }

    fn point_key(x: &Vec3) -> u64 {
        x.iter().fold(0u64, |acc, c| splitmix64(acc ^ c.to_bits()))
    }

    /// Closed-region membership by ray parity. Rays that graze a face or
    /// pass within round-off of an edge are re-cast with a jittered
    /// direction.
    pub fn contains(&self, x: &Vec3, tol: f64) -> bool {
        let diam = self.diameter();
        let slack = Vec3::repeat(tol * diam + 1e-12 * diam);
        if x.iter().zip(self.lo.iter()).any(|(a, b)| *a < b - slack.x)
            || x.iter().zip(self.hi.iter()).any(|(a, b)| *a > b + slack.x)
        {
            return false;
        }
        let on_surface = (1e-12 + tol) * diam;
        let base = Vec3::new(0.5772156649, 0.6180339887, 0.5307871201).normalize();
        let key = Self::point_key(x);
        let mut dir = base;
        let mut crossings = 0usize;
        for attempt in 0..=MAX_RETRIES {
            crossings = 0;
            let mut ambiguous = false;
            for fi in 0..self.faces.len() {
                if let Some(hit) = self.intersect(fi, x, &dir) {
                    if hit.t.abs() <= on_surface {
                        return true;
                    }
                    if hit.t > 0.0 {
                        if hit.near_edge || hit.cos.abs() < GRAZING {
                            ambiguous = true;
                            break;
                        }
                        crossings += 1;
                    }
                }
            }
            if !ambiguous {
                return crossings % 2 == 1;
            }
            dir = Self::jittered(&base, key, attempt + 1);
        }
        if crossings % 2 == 1 {
            return true;
        }
        self.nearest_face(x).1 <= on_surface
    }

    /// Nearest intersection beyond `1e-9·diameter`. Grazing hits trigger up
    /// to [`MAX_RETRIES`] jittered re-casts.
    pub fn exit(&self, x: &Vec3, dir: &Vec3) -> Result<f64> {
        if !self.contains(x, 1e-9) {
            return Err(Error::ExteriorOrigin);
        }
        let t_min = 1e-9 * self.diameter();
        let key = Self::point_key(x) ^ Self::point_key(dir);
        let mut d = *dir;
        for attempt in 0..=MAX_RETRIES {
            let mut best: Option<Hit> = None;
            for fi in 0..self.faces.len() {
                if let Some(hit) = self.intersect(fi, x, &d) {
                    if hit.t > t_min && best.as_ref().is_none_or(|b| hit.t < b.t) {
                        best = Some(hit);
                    }
                }
            }
            match best {
                Some(hit) if hit.cos.abs() >= GRAZING => return Ok(hit.t),
                _ => d = Self::jittered(dir, key, attempt + 1),
            }
        }
        Err(Error::RayExit(MAX_RETRIES))
    }

    pub(crate) fn draw_boundary<R: Rng>(&self, rng: &mut R) -> BoundaryDraw {
        let target: f64 = rng.random();
        let face = self.cdf.partition_point(|c| *c < target).min(self.faces.len() - 1);
        let f = self.faces[face];
        let (s, t): (f64, f64) = (rng.random(), rng.random());
        let r = s.sqrt();
        let (a, b, c) = (self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]);
        let point = a * (1.0 - r) + b * (r * (1.0 - t)) + c * (r * t);
        BoundaryDraw {
            point,
            inward_normal: -self.normals[face],
            area_weight: self.area,
            mean_curvature: self.interpolated_curvature(face, &point).unwrap_or(f64::NAN),
        }
    }

    /// Uniform interior point by rejection from the bounding box.
    pub(crate) fn draw_interior<R: Rng>(&self, rng: &mut R) -> Vec3 {
        let span = self.hi - self.lo;
        loop {
            let p = self.lo
                + Vec3::new(
                    rng.random::<f64>() * span.x,
                    rng.random::<f64>() * span.y,
                    rng.random::<f64>() * span.z,
                );
            if self.contains(&p, 0.0) {
                return p;
            }
        }
    }

    /// Axis-aligned cube `[−s/2, s/2]³ + center`, each face split into
    /// `2·n²` triangles.
    pub fn cube(center: Vec3, side: f64, subdivisions: usize) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::InvalidBody(format!("cube side must be positive, got {side}")));
        }
        let n = subdivisions.max(1);
        let mut vertices = Vec::new();
        let mut index: HashMap<[i64; 3], usize> = HashMap::new();
        let mut faces = Vec::new();
        let half = n as i64;
        // Integer lattice coordinates in [−n, n] with step 2.
        let mut vid = |p: [i64; 3], vertices: &mut Vec<Vec3>| -> usize {
            *index.entry(p).or_insert_with(|| {
                vertices.push(center + Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64) * (0.5 * side / half as f64));
                vertices.len() - 1
            })
        };
        for axis in 0..3 {
            for sign in [-1i64, 1] {
                let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
                for i in 0..n as i64 {
                    for j in 0..n as i64 {
                        let corner = |di: i64, dj: i64| {
                            let mut p = [0i64; 3];
                            p[axis] = sign * half;
                            p[a1] = -half + 2 * (i + di);
                            p[a2] = -half + 2 * (j + dj);
                            p
                        };
                        let q = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                        let ids: Vec<usize> = q.iter().map(|p| vid(*p, &mut vertices)).collect();
                        // (a1, a2, axis) is right-handed, so this order faces +axis.
                        if sign > 0 {
                            faces.push([ids[0], ids[1], ids[2]]);
                            faces.push([ids[0], ids[2], ids[3]]);
                        } else {
                            faces.push([ids[0], ids[2], ids[1]]);
                            faces.push([ids[0], ids[3], ids[2]]);
                        }
                    }
                }
            }
        }
        Self::new(vertices, faces)
    }

    /// Geodesic sphere from a subdivided icosahedron.
    pub fn icosphere(center: Vec3, radius: f64, subdivisions: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidBody(format!("radius must be positive, got {radius}")));
        }
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vec3> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .iter()
        .map(|p| Vec3::from(*p).normalize())
        .collect();
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
        for _ in 0..subdivisions {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
                let key = (a.min(b), a.max(b));
                *mid.entry(key).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = midpoint(a, b, &mut verts);
                let bc = midpoint(b, c, &mut verts);
                let ca = midpoint(c, a, &mut verts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let vertices = verts.iter().map(|v| center + v * radius).collect();
        Self::new(vertices, faces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cube_measures() {
        let c = Mesh::cube(Vec3::zeros(), 1.0, 2).unwrap();
        assert!((c.volume() - 1.0).abs() < 1e-14);
        assert!((c.area() - 6.0).abs() < 1e-13);
        assert!(c.contains(&Vec3::zeros(), 0.0));
        assert!(c.contains(&Vec3::new(0.5, 0.1, 0.1), 0.0));
        assert!(!c.contains(&Vec3::new(0.6, 0.1, 0.1), 0.0));
        // axis-aligned rays through lattice edges force re-casting
        assert!(c.contains(&Vec3::new(0.0, 0.0, 0.25), 0.0));
    }

    #[test]
    fn cube_exit_lengths() {
        let c = Mesh::cube(Vec3::zeros(), 1.0, 1).unwrap();
        let l = c.exit(&Vec3::new(0.1, 0.2, -0.5), &Vec3::z()).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        let d = Vec3::new(1.0, 1.0, 0.0).normalize();
        let l = c.exit(&Vec3::zeros(), &d).unwrap();
        assert!((l - 0.5 * 2f64.sqrt()).abs() < 1e-9);
        assert!(matches!(
            c.exit(&Vec3::new(2.0, 0.0, 0.0), &d),
            Err(Error::ExteriorOrigin)
        ));
    }

    #[test]
    fn rejects_open_and_inverted_meshes() {
        let c = Mesh::cube(Vec3::zeros(), 1.0, 1).unwrap();
        let mut faces = c.faces().to_vec();
        faces.pop();
        assert!(Mesh::new(c.vertices().to_vec(), faces).is_err());
        let flipped = c.faces().iter().map(|f| [f[0], f[2], f[1]]).collect();
        assert!(Mesh::new(c.vertices().to_vec(), flipped).is_err());
    }

    #[test]
    fn icosphere_curvature_approaches_sphere() {
        let s = Mesh::icosphere(Vec3::zeros(), 2.0, 4).unwrap();
        let hs: Vec<f64> = (0..s.vertices().len())
            .map(|v| s.vertex_curvature(v).unwrap())
            .collect();
        let worst = hs.iter().map(|h| (h - 1.0).abs()).fold(0.0, f64::max);
        let mean = hs.iter().sum::<f64>() / hs.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        // one-third areas are biased at the twelve valence-5 vertices
        assert!(worst < 0.2, "worst {worst}");
        assert!((s.area() - 16.0 * PI).abs() / (16.0 * PI) < 0.01);
    }

    #[test]
    fn isolated_vertex_is_degenerate() {
        let c = Mesh::cube(Vec3::zeros(), 1.0, 1).unwrap();
        let mut v = c.vertices().to_vec();
        v.push(Vec3::new(5.0, 5.0, 5.0));
        let m = Mesh::new(v, c.faces().to_vec()).unwrap();
        assert!(matches!(m.vertex_curvature(8), Err(Error::DegenerateVertex(8))));
    }
}
