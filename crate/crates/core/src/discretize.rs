//! Structured triangulations of parameter windows with per-vertex geometry.
//!
//! Vertices are laid out row-major: index `j * cols + i` where `i` runs along `u`
//! and `j` along `v`. A window spanning the full period of a `u`-periodic chart is
//! stitched, so it has `nu` vertex columns instead of `nu + 1`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{dist, dot, Real};
use crate::surface::{ParametricImmersion, PointGeometry, Window};

/// Below this extrinsic distance a vertex is treated as sitting on the pole.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Vertex<T> {
    pub i: usize,
    pub j: usize,
    pub u: T,
    pub v: T,
    pub geom: PointGeometry<T>,
    /// Extrinsic distance to the origin.
    pub r: T,
    /// `|grad R|`, set to zero on the pole.
    pub grad_r: T,
    /// `|grad-perp rho|`, the normal part of the radial unit vector.
    pub normal_defect: T,
}

#[derive(Debug, Clone)]
pub struct SampledSurface<T> {
    pub immersion: ParametricImmersion<T>,
    pub window: Window<T>,
    /// Cells along `u` and `v`.
    pub nu: usize,
    pub nv: usize,
    pub cols: usize,
    pub periodic: bool,
    pub vertices: Vec<Vertex<T>>,
    pub triangles: Vec<[usize; 3]>,
    /// Parameter coordinates of each triangle's corners, unwrapped across the seam.
    pub tri_uv: Vec<[[T; 2]; 3]>,
    pub triangle_areas: Vec<T>,
    pub edges: Vec<[usize; 2]>,
    pub edge_lengths: Vec<T>,
}

/// Builds the structured triangulation with two triangles per cell.
pub fn triangulate<T: Real>(
    imm: &ParametricImmersion<T>,
    window: Window<T>,
    nu: usize,
    nv: usize,
) -> Result<SampledSurface<T>> {
    if nu < 2 || nv < 2 {
        return Err(Error::Invalid(format!(
            "resolution must be at least 2x2, got {nu}x{nv}"
        )));
    }
    if !(window.u0 < window.u1 && window.v0 < window.v1) {
        return Err(Error::Invalid("empty parameter window".into()));
    }
    for (u, v) in [(window.u0, window.v0), (window.u1, window.v1)] {
        imm.check_domain(u, v)?;
    }
    let periodic = imm.u_periodic && (window.width() - T::TAU()).abs() <= T::lit(1e-9) * T::TAU();
    let cols = if periodic { nu } else { nu + 1 };
    let rows = nv + 1;
    let du = window.width() / T::from_count(nu);
    let dv = window.height() / T::from_count(nv);

    let vertices = (0..rows * cols)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % cols, idx / cols);
            let u = window.u0 + du * T::from_count(i);
            let v = window.v0 + dv * T::from_count(j);
            let geom = imm.point_geometry(u, v)?;
            let r = geom.radius();
            let (grad_r, normal_defect) = if r > T::lit(POLE_TOL) {
                geom.radial_split()
            } else {
                (T::zero(), T::zero())
            };
            Ok(Vertex {
                i,
                j,
                u,
                v,
                geom,
                r,
                grad_r,
                normal_defect,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut triangles = Vec::with_capacity(2 * nu * nv);
    let mut tri_uv = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let i1 = if periodic { (i + 1) % nu } else { i + 1 };
            let a = j * cols + i;
            let b = j * cols + i1;
            let c = (j + 1) * cols + i1;
            let d = (j + 1) * cols + i;
            let u_a = window.u0 + du * T::from_count(i);
            let u_b = u_a + du;
            let v_a = window.v0 + dv * T::from_count(j);
            let v_d = v_a + dv;
            let (pa, pb, pc, pd) = ([u_a, v_a], [u_b, v_a], [u_b, v_d], [u_a, v_d]);
            triangles.push([a, b, c]);
            tri_uv.push([pa, pb, pc]);
            triangles.push([a, c, d]);
            tri_uv.push([pa, pc, pd]);
        }
    }
    let triangle_areas = triangles
        .iter()
        .map(|t| {
            triangle_area(
                &vertices[t[0]].geom.position,
                &vertices[t[1]].geom.position,
                &vertices[t[2]].geom.position,
            )
        })
        .collect();

    let mut edges: Vec<[usize; 2]> = triangles
        .iter()
        .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]])
        .map(|[a, b]| [a.min(b), a.max(b)])
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let edge_lengths = edges
        .iter()
        .map(|e| dist(&vertices[e[0]].geom.position, &vertices[e[1]].geom.position))
        .collect();

    Ok(SampledSurface {
        immersion: imm.clone(),
        window,
        nu,
        nv,
        cols,
        periodic,
        vertices,
        triangles,
        tri_uv,
        triangle_areas,
        edges,
        edge_lengths,
    })
}

/// Area of the ambient triangle `abc` in any dimension.
pub fn triangle_area<T: Real>(a: &[T], b: &[T], c: &[T]) -> T {
    let e1: Vec<T> = b.iter().zip(a).map(|(&x, &y)| x - y).collect();
    let e2: Vec<T> = c.iter().zip(a).map(|(&x, &y)| x - y).collect();
    let (aa, bb, ab) = (dot(&e1, &e1), dot(&e2, &e2), dot(&e1, &e2));
    T::lit(0.5) * (aa * bb - ab * ab).max(T::zero()).sqrt()
}

/// Fraction of a linear triangle where the interpolated level `phi` is negative.
pub fn sliver_fraction<T: Real>(phi: [T; 3]) -> T {
    let inside = phi.iter().filter(|&&p| p < T::zero()).count();
    let corner = |k: usize| {
        let (a, b, c) = (phi[k], phi[(k + 1) % 3], phi[(k + 2) % 3]);
        (a / (a - b)) * (a / (a - c))
    };
    match inside {
        0 => T::zero(),
        3 => T::one(),
        1 => corner(phi.iter().position(|&p| p < T::zero()).expect("one inside")),
        _ => T::one() - corner(phi.iter().position(|&p| p >= T::zero()).expect("one outside")),
    }
}

/// Rows of the mesh stencil used for graph distances (16-connected).
const STENCIL: [(isize, isize); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
];

impl<T: Real> SampledSurface<T> {
    pub fn rows(&self) -> usize {
        self.nv + 1
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cols + i
    }

    pub fn total_area(&self) -> T {
        self.triangle_areas.iter().copied().sum()
    }

    pub fn radii(&self) -> Vec<T> {
        self.vertices.iter().map(|v| v.r).collect()
    }

    /// Vertex nearest the ambient origin.
    pub fn base_vertex(&self) -> usize {
        self.vertices
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.r.partial_cmp(&b.1.r).unwrap_or(Ordering::Equal))
            .map(|(k, _)| k)
            .expect("mesh has vertices")
    }

    pub fn nearest_vertex(&self, u: T, v: T) -> usize {
        let du = self.window.width() / T::from_count(self.nu);
        let dv = self.window.height() / T::from_count(self.nv);
        let mut fi = ((u - self.window.u0) / du).round();
        if self.periodic {
            let n = T::from_count(self.nu);
            fi = fi - (fi / n).floor() * n;
        }
        let i = fi.max(T::zero()).to_usize().unwrap_or(0).min(self.cols - 1);
        let j = ((v - self.window.v0) / dv)
            .round()
            .max(T::zero())
            .to_usize()
            .unwrap_or(0)
            .min(self.nv);
        self.index(i, j)
    }

    /// Grid neighbours of vertex `k` for the 16-connected stencil.
    pub fn stencil_neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = (k % self.cols, k / self.cols);
        STENCIL.iter().filter_map(move |&(di, dj)| {
            let nj = j as isize + dj;
            if nj < 0 || nj as usize > self.nv {
                return None;
            }
            let ni = i as isize + di;
            let ni = if self.periodic {
                ni.rem_euclid(self.nu as isize)
            } else if ni < 0 || ni as usize >= self.cols {
                return None;
            } else {
                ni
            };
            Some(self.index(ni as usize, nj as usize))
        })
    }

    /// Window sides that are true boundary, skipping stitched seams and sides
    /// that collapse to a single ambient point.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let diam = self.vertices.iter().map(|v| v.r).fold(T::zero(), T::max).max(T::one());
        let mut sides: Vec<Vec<usize>> = vec![
            (0..self.cols).map(|i| self.index(i, 0)).collect(),
            (0..self.cols).map(|i| self.index(i, self.nv)).collect(),
        ];
        if !self.periodic {
            sides.push((0..self.rows()).map(|j| self.index(0, j)).collect());
            sides.push((0..self.rows()).map(|j| self.index(self.nu, j)).collect());
        }
        let mut out = Vec::new();
        for side in sides {
            let p0 = &self.vertices[side[0]].geom.position;
            let spread = side
                .iter()
                .map(|&k| dist(p0, &self.vertices[k].geom.position))
                .fold(T::zero(), T::max);
            if spread > T::lit(1e-4) * diam {
                out.extend(side);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Largest radius `r` such that the extrinsic ball `D_r` stays off the window boundary.
    pub fn safe_radius(&self) -> T {
        self.boundary_vertices()
            .iter()
            .map(|&k| self.vertices[k].r)
            .fold(T::infinity(), T::min)
    }

    /// Vertices / faces text dump: `u v x y z ...` per vertex, then three indices per face.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# vertices {}", self.vertices.len())?;
        for vx in &self.vertices {
            write!(w, "{:.17e} {:.17e}", vx.u.as_f64(), vx.v.as_f64())?;
            for x in &vx.geom.position {
                write!(w, " {:.17e}", x.as_f64())?;
            }
            writeln!(w)?;
        }
        writeln!(w, "# faces {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// Area of the triangles whose three vertices satisfy `pred`.
pub fn region_area<T: Real, P: Fn(&Vertex<T>) -> bool>(mesh: &SampledSurface<T>, pred: P) -> T {
    let inside: Vec<bool> = mesh.vertices.iter().map(pred).collect();
    mesh.triangles
        .iter()
        .zip(&mesh.triangle_areas)
        .filter(|(t, _)| t.iter().all(|&k| inside[k]))
        .map(|(_, &a)| a)
        .sum()
}

/// Area of `{phi < 0}` with linear sliver interpolation on crossing triangles.
pub fn region_area_level<T: Real>(mesh: &SampledSurface<T>, phi: &[T]) -> T {
    mesh.triangles
        .iter()
        .zip(&mesh.triangle_areas)
        .map(|(t, &a)| a * sliver_fraction([phi[t[0]], phi[t[1]], phi[t[2]]]))
        .sum()
}

/// Area fraction and barycentric centroid of the part of a linear triangle where
/// `phi < 0`, by clipping the reference triangle.
pub fn clipped_moments<T: Real>(phi: [T; 3]) -> (T, [T; 3]) {
    let third = T::one() / T::lit(3.0);
    let inside = phi.iter().filter(|&&p| p < T::zero()).count();
    match inside {
        0 => return (T::zero(), [third; 3]),
        3 => return (T::one(), [third; 3]),
        _ => {}
    }
    let corner = |k: usize| {
        let mut b = [T::zero(); 3];
        b[k] = T::one();
        b
    };
    let mut poly: Vec<[T; 3]> = Vec::with_capacity(4);
    for k in 0..3 {
        let q = (k + 1) % 3;
        let (fp, fq) = (phi[k], phi[q]);
        if fp < T::zero() {
            poly.push(corner(k));
        }
        if (fp < T::zero()) != (fq < T::zero()) {
            let s = fp / (fp - fq);
            let mut b = [T::zero(); 3];
            b[k] = T::one() - s;
            b[q] = s;
            poly.push(b);
        }
    }
    // fan in the (b1, b2) chart, where the reference triangle has area 1/2
    let mut area = T::zero();
    let mut cen = [T::zero(); 3];
    for k in 1..poly.len() - 1 {
        let (a, b, c) = (poly[0], poly[k], poly[k + 1]);
        let w = T::lit(0.5) * ((b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1])).abs();
        area += w;
        for d in 0..3 {
            cen[d] += w * third * (a[d] + b[d] + c[d]);
        }
    }
    if !(area > T::zero()) {
        return (T::zero(), [third; 3]);
    }
    (T::lit(2.0) * area, cen.map(|x| x / area))
}

/// Integral of a per-vertex quantity over `{phi < 0}`, integrating the linear
/// interpolant exactly over each clipped triangle.
pub fn region_integral<T: Real>(mesh: &SampledSurface<T>, phi: &[T], values: &[T]) -> T {
    mesh.triangles
        .iter()
        .zip(&mesh.triangle_areas)
        .map(|(t, &a)| {
            let (f, w) = clipped_moments([phi[t[0]], phi[t[1]], phi[t[2]]]);
            if f == T::zero() {
                T::zero()
            } else {
                a * f * (w[0] * values[t[0]] + w[1] * values[t[1]] + w[2] * values[t[2]])
            }
        })
        .sum()
}

/// Shortest-path distances from a base vertex.
#[derive(Debug, Clone)]
pub struct IntrinsicDistanceField<T> {
    pub base_vertex: usize,
    /// Per-vertex distance; `inf` where unreachable.
    pub rho: Vec<T>,
    pub method: String,
}

#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Dijkstra over the 16-connected grid graph weighted by ambient chord lengths.
pub fn intrinsic_distance<T: Real>(mesh: &SampledSurface<T>, base_vertex: usize) -> Result<IntrinsicDistanceField<T>> {
    let n = mesh.vertices.len();
    if base_vertex >= n {
        return Err(Error::Invalid(format!("base vertex {base_vertex} out of range")));
    }
    let mut rho = vec![T::infinity(); n];
    let mut done = vec![false; n];
    rho[base_vertex] = T::zero();
    let mut heap = BinaryHeap::new();
    heap.push(Key(0.0, base_vertex));
    while let Some(Key(_, k)) = heap.pop() {
        if done[k] {
            continue;
        }
        done[k] = true;
        let pk = &mesh.vertices[k].geom.position;
        for nb in mesh.stencil_neighbors(k) {
            if done[nb] {
                continue;
            }
            let cand = rho[k] + dist(pk, &mesh.vertices[nb].geom.position);
            if cand < rho[nb] {
                rho[nb] = cand;
                heap.push(Key(cand.as_f64(), nb));
            }
        }
    }
    Ok(IntrinsicDistanceField {
        base_vertex,
        rho,
        method: "graph-16".into(),
    })
}

/// Unique mesh edges of a triangle subset, as sorted vertex pairs.
pub(crate) fn edge_set(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut count = HashMap::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_plane() {
        let m = triangulate(
            &ParametricImmersion::<f64>::plane(),
            Window::new(0.0, 1.0, 0.0, 1.0),
            10,
            10,
        )
        .unwrap();
        assert_eq!(m.triangles.len(), 200);
        assert_eq!(m.vertices.len(), 121);
        assert!((m.total_area() - 1.0).abs() < 1e-9);
        for t in &m.tri_uv {
            let cross = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0]);
            assert!(cross > 0.0);
        }
        assert!(m.edge_lengths.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn catenoid_band_area() {
        let m = triangulate(
            &ParametricImmersion::<f64>::catenoid(),
            Window::new(0.0, std::f64::consts::TAU, -2.0, 2.0),
            128,
            128,
        )
        .unwrap();
        assert!(m.periodic);
        assert_eq!(m.cols, 128);
        let exact = std::f64::consts::TAU * (2.0 + 4f64.sinh() / 2.0);
        assert!((m.total_area() / exact - 1.0).abs() < 1e-3);
        // stitched mesh has no u-boundary
        assert_eq!(m.boundary_vertices().len(), 256);
    }

    #[test]
    fn sphere_area_and_collapsed_sides() {
        let imm = ParametricImmersion::<f64>::sphere(1.0, [0.0; 3]);
        let m = triangulate(&imm, imm.domain, 128, 128).unwrap();
        assert!((m.total_area() / (4.0 * std::f64::consts::PI) - 1.0).abs() < 1e-2);
        assert!(m.boundary_vertices().is_empty());
        assert!(m.safe_radius().is_infinite());
    }

    #[test]
    fn sliver_fractions() {
        assert_eq!(sliver_fraction([1.0f64, 2.0, 3.0]), 0.0);
        assert_eq!(sliver_fraction([-1.0f64, -2.0, -3.0]), 1.0);
        assert!((sliver_fraction([-1.0f64, 1.0, 1.0]) - 0.25).abs() < 1e-15);
        assert!((sliver_fraction([1.0f64, -1.0, -1.0]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn clipped_moments_match_slivers() {
        let (f, w) = clipped_moments([-1.0f64, 1.0, 1.0]);
        assert!((f - 0.25).abs() < 1e-15);
        // corner triangle with vertices (1,0,0), (1/2,1/2,0), (1/2,0,1/2)
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15 && (w[1] - 1.0 / 6.0).abs() < 1e-15);
        for phi in [[0.3f64, -0.7, 0.2], [-0.1, -0.4, 0.9], [2.0, 1.0, -0.5]] {
            let (f, w) = clipped_moments(phi);
            assert!((f - sliver_fraction(phi)).abs() < 1e-14);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn clipped_integral_is_exact_for_linear_data() {
        // int over the unit disk of x^2 + y^2 is pi/2; linear data x integrates to 0
        let m = triangulate(&ParametricImmersion::<f64>::plane(), Window::square(1.5), 128, 128).unwrap();
        let phi: Vec<f64> = m.vertices.iter().map(|v| v.r - 1.0).collect();
        let x: Vec<f64> = m.vertices.iter().map(|v| v.u + 2.0).collect();
        let a = region_area_level(&m, &phi);
        assert!((region_integral(&m, &phi, &x) - 2.0 * a).abs() < 1e-10);
        let r2: Vec<f64> = m.vertices.iter().map(|v| v.r * v.r).collect();
        assert!((region_integral(&m, &phi, &r2) / std::f64::consts::FRAC_PI_2 - 1.0).abs() < 2e-3);
    }

    #[test]
    fn disk_area_with_slivers() {
        let m = triangulate(&ParametricImmersion::<f64>::plane(), Window::square(1.5), 256, 256).unwrap();
        let phi: Vec<f64> = m.vertices.iter().map(|v| v.r - 1.0).collect();
        let a = region_area_level(&m, &phi);
        assert!((a / std::f64::consts::PI - 1.0).abs() < 1e-2);
        let whole = region_area(&m, |_| true);
        assert!((whole - m.total_area()).abs() < 1e-12);
    }

    #[test]
    fn plane_distance_accuracy() {
        for (n, tol) in [(64usize, 0.08), (256, 0.04)] {
            let m = triangulate(&ParametricImmersion::<f64>::plane(), Window::square(1.0), n, n).unwrap();
            let base = m.base_vertex();
            let f = intrinsic_distance(&m, base).unwrap();
            assert_eq!(f.rho[base], 0.0);
            let worst = m
                .vertices
                .iter()
                .zip(&f.rho)
                .filter(|(v, _)| v.r > 0.0)
                .map(|(v, &d)| (d - v.r).abs() / v.r)
                .fold(0.0, f64::max);
            assert!(worst <= tol, "n = {n}: {worst}");
            for (e, &len) in m.edges.iter().zip(&m.edge_lengths) {
                assert!((f.rho[e[0]] - f.rho[e[1]]).abs() <= len * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn catenoid_meridian_distance() {
        let m = triangulate(
            &ParametricImmersion::<f64>::catenoid(),
            Window::new(0.0, std::f64::consts::TAU, -3.0, 3.0),
            128,
            192,
        )
        .unwrap();
        let base = m.nearest_vertex(0.0, 0.0);
        let f = intrinsic_distance(&m, base).unwrap();
        let k = m.nearest_vertex(0.0, 2.0);
        assert!((f.rho[k] / 2f64.sinh() - 1.0).abs() < 1e-3);
        // rotating by half a turn is a grid symmetry
        let shift = m.index(64, 96);
        let g = intrinsic_distance(&m, shift).unwrap();
        for j in 0..m.rows() {
            for i in 0..m.cols {
                let a = f.rho[m.index(i, j)];
                let b = g.rho[m.index((i + 64) % 128, j)];
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dump_format() {
        let m = triangulate(&ParametricImmersion::<f64>::plane(), Window::square(1.0), 2, 2).unwrap();
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 9 + 1 + 8);
        assert_eq!(lines[1].split_whitespace().count(), 5);
    }
}
