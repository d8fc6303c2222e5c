//! Dirichlet eigenvalues of extrinsic balls with linear finite elements, Barta
//! ratios of trial functions, and the transplant upper bound built from the
//! radial eigenfunction of a Euclidean ball.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::comparison::{dirichlet_eigen_ball, RadialEigenfunction};
use crate::discretize::{triangulate, SampledSurface};
use crate::error::{Error, Result};
use crate::extrinsic::{level_set, window_for_radius, TamedVerdict, TamednessReport};
use crate::scalar::{dot, linear_fit, sub, Real};
use crate::surface::ParametricImmersion;

/// Fewest interior vertices accepted for an eigenvalue solve.
pub const MIN_INTERIOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MassKind {
    #[default]
    Consistent,
    Lumped,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions<T> {
    pub mass: MassKind,
    /// Spectral shift `sigma` of the factored matrix `K - sigma M`.
    pub shift: T,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for EigenOptions<T> {
    fn default() -> Self {
        Self {
            mass: MassKind::Consistent,
            shift: T::zero(),
            tol: T::lit(1e-8),
            max_iter: 500,
        }
    }
}

/// Symmetric sparse matrix stored by rows, columns sorted.
#[derive(Debug, Clone)]
pub struct SparseSym<T> {
    pub rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> SparseSym<T> {
    fn from_maps(maps: Vec<BTreeMap<usize, T>>) -> Self {
        Self {
            rows: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn mul(&self, x: &[T]) -> Vec<T> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }
}

/// Variable-band (skyline) `L D L^T` factorization, row-oriented.
#[derive(Debug, Clone)]
pub struct Skyline<T> {
    first: Vec<usize>,
    start: Vec<usize>,
    l: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> Skyline<T> {
    /// Factors `a + s b`; both matrices share the sparsity pattern of `a`'s rows.
    pub fn factor(a: &SparseSym<T>, b: Option<(&SparseSym<T>, T)>) -> Result<Self> {
        let n = a.len();
        let first: Vec<usize> = a
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| row.first().map_or(i, |e| e.0.min(i)))
            .collect();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i]));
        }
        let mut l = vec![T::zero(); start[n]];
        let mut d = vec![T::zero(); n];
        let put = |i: usize, j: usize, v: T, l: &mut Vec<T>, d: &mut Vec<T>| {
            if j == i {
                d[i] += v;
            } else if j < i {
                l[start[i] + (j - first[i])] += v;
            }
        };
        for (i, row) in a.rows.iter().enumerate() {
            for &(j, v) in row {
                put(i, j, v, &mut l, &mut d);
            }
        }
        if let Some((bm, s)) = b {
            for (i, row) in bm.rows.iter().enumerate() {
                for &(j, v) in row {
                    if j < first[i] {
                        return Err(Error::Invalid("shift matrix outside the skyline".into()));
                    }
                    put(i, j, s * v, &mut l, &mut d);
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let si = start[i];
            // row i holds w_ij = l_ij d_j until it is complete
            for j in fi..i {
                let fj = first[j];
                let sj = start[j];
                let k0 = fi.max(fj);
                let mut acc = T::zero();
                for k in k0..j {
                    acc += l[si + (k - fi)] * l[sj + (k - fj)];
                }
                l[si + (j - fi)] -= acc;
            }
            let mut diag = d[i];
            for j in fi..i {
                let w = l[si + (j - fi)];
                let lij = w / d[j];
                diag -= w * lij;
                l[si + (j - fi)] = lij;
            }
            if !(diag > T::zero()) {
                return Err(Error::Invalid(format!("matrix not positive definite at row {i}")));
            }
            d[i] = diag;
        }
        Ok(Self { first, start, l, d })
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let mut acc = T::zero();
            for k in fi..i {
                acc += self.l[si + (k - fi)] * x[k];
            }
            x[i] -= acc;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            let xi = x[i];
            for k in fi..i {
                x[k] -= self.l[si + (k - fi)] * xi;
            }
        }
        x
    }

    /// Stored entries below the diagonal.
    pub fn envelope(&self) -> usize {
        self.l.len()
    }
}

/// Dirichlet stiffness and mass on one connected set of free vertices.
#[derive(Debug, Clone)]
pub struct RegionOperator<T> {
    /// Global vertex index of each free unknown, ascending.
    pub free: Vec<usize>,
    pub stiffness: SparseSym<T>,
    pub mass: SparseSym<T>,
}

/// Triangles with every vertex inside, their vertices, and the free vertices:
/// region vertices off the region boundary and off the mesh boundary.
fn region_free_vertices<T: Real>(mesh: &SampledSurface<T>, inside: &[bool]) -> (Vec<usize>, Vec<bool>) {
    let tris: Vec<usize> = (0..mesh.triangles.len())
        .filter(|&k| mesh.triangles[k].iter().all(|&v| inside[v]))
        .collect();
    let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &k in &tris {
        let t = mesh.triangles[k];
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let n = mesh.vertices.len();
    let mut in_region = vec![false; n];
    let mut clamped = vec![false; n];
    for &k in &tris {
        for &v in &mesh.triangles[k] {
            in_region[v] = true;
        }
    }
    for (&(a, b), &c) in &count {
        if c == 1 {
            clamped[a] = true;
            clamped[b] = true;
        }
    }
    let free: Vec<bool> = (0..n).map(|v| in_region[v] && !clamped[v]).collect();
    (tris, free)
}

fn components<T: Real>(mesh: &SampledSurface<T>, tris: &[usize], free: &[bool]) -> Vec<Vec<usize>> {
    let n = mesh.vertices.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &k in tris {
        let t = mesh.triangles[k];
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            if free[a] && free[b] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in (0..n).filter(|&v| free[v]) {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    groups.into_values().collect()
}

/// Local P1 stiffness `e_a . e_b / (4 A)` with `e_a` the edge opposite vertex `a`.
fn local_stiffness<T: Real>(p: [&[T]; 3]) -> ([[T; 3]; 3], T) {
    let e: Vec<Vec<T>> = (0..3)
        .map(|a| {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            sub(p[c], p[b])
        })
        .collect();
    let area = crate::discretize::triangle_area(p[0], p[1], p[2]);
    let mut k = [[T::zero(); 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = dot(&e[a], &e[b]) / (T::lit(4.0) * area);
        }
    }
    (k, area)
}

/// Assembles one operator per connected component of the free vertices of the
/// region made of triangles with all three vertices inside.
pub fn region_operators<T: Real>(
    mesh: &SampledSurface<T>,
    inside: &[bool],
    mass: MassKind,
) -> Result<Vec<RegionOperator<T>>> {
    let (tris, free) = region_free_vertices(mesh, inside);
    if tris.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let interior = free.iter().filter(|&&f| f).count();
    if interior < MIN_INTERIOR {
        return Err(Error::RegionTooSmall {
            needed: MIN_INTERIOR,
            got: interior,
        });
    }
    let groups = components(mesh, &tris, &free);
    let mut local = vec![usize::MAX; mesh.vertices.len()];
    let mut owner = vec![usize::MAX; mesh.vertices.len()];
    for (g, verts) in groups.iter().enumerate() {
        for (k, &v) in verts.iter().enumerate() {
            local[v] = k;
            owner[v] = g;
        }
    }
    let mut kmaps: Vec<Vec<BTreeMap<usize, T>>> = groups.iter().map(|g| vec![BTreeMap::new(); g.len()]).collect();
    let mut mmaps = kmaps.clone();
    let twelfth = T::one() / T::lit(12.0);
    for &t in &tris {
        let tri = mesh.triangles[t];
        let p = [
            mesh.vertices[tri[0]].geom.position.as_slice(),
            mesh.vertices[tri[1]].geom.position.as_slice(),
            mesh.vertices[tri[2]].geom.position.as_slice(),
        ];
        let (kl, area) = local_stiffness(p);
        for a in 0..3 {
            let va = tri[a];
            if !free[va] {
                continue;
            }
            let g = owner[va];
            let ia = local[va];
            for b in 0..3 {
                let vb = tri[b];
                if !free[vb] {
                    continue;
                }
                let jb = local[vb];
                *kmaps[g][ia].entry(jb).or_insert(T::zero()) += kl[a][b];
                let m = match mass {
                    MassKind::Consistent => area * twelfth * if a == b { T::lit(2.0) } else { T::one() },
                    MassKind::Lumped if a == b => area / T::lit(3.0),
                    MassKind::Lumped => T::zero(),
                };
                if m != T::zero() {
                    *mmaps[g][ia].entry(jb).or_insert(T::zero()) += m;
                }
            }
        }
    }
    Ok(groups
        .into_iter()
        .zip(kmaps.into_iter().zip(mmaps))
        .map(|(free, (k, m))| RegionOperator {
            free,
            stiffness: SparseSym::from_maps(k),
            mass: SparseSym::from_maps(m),
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct Eigenpair<T> {
    pub lambda: T,
    /// `|K x - lambda M x| / |lambda M x|`.
    pub residual: T,
    pub iterations: usize,
    /// `M`-normalized, positive-sum eigenvector over the free vertices.
    pub vector: Vec<T>,
}

/// Shifted inverse iteration from the all-ones vector; stops when the relative
/// eigen-residual drops below `tol`.
pub fn inverse_iteration<T: Real>(op: &RegionOperator<T>, opts: &EigenOptions<T>) -> Result<Eigenpair<T>> {
    let n = op.free.len();
    let shift = (opts.shift != T::zero()).then_some((&op.mass, -opts.shift));
    let fac = Skyline::factor(&op.stiffness, shift)?;
    let mut x = vec![T::one(); n];
    let mut lambda = T::infinity();
    let mut residual = T::infinity();
    let mut iterations = 0;
    // stop on a small eigen-residual, or once the Rayleigh quotient stalls at
    // rounding level
    let stall = T::epsilon() * T::lit(16.0);
    for it in 1..=opts.max_iter.max(1) {
        iterations = it;
        let y = fac.solve(&op.mass.mul(&x));
        let my = op.mass.mul(&y);
        let scale = dot(&y, &my).sqrt();
        x = y.iter().map(|&v| v / scale).collect();
        let kx = op.stiffness.mul(&x);
        let mx: Vec<T> = my.iter().map(|&v| v / scale).collect();
        let rq = dot(&x, &kx);
        let res: Vec<T> = kx.iter().zip(&mx).map(|(&a, &b)| a - rq * b).collect();
        residual = dot(&res, &res).sqrt() / (rq.abs() * dot(&mx, &mx).sqrt());
        let stalled = (rq - lambda).abs() <= stall * rq.abs();
        lambda = rq;
        if residual <= opts.tol || stalled {
            break;
        }
    }
    if x.iter().copied().sum::<T>() < T::zero() {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(Eigenpair {
        lambda,
        residual,
        iterations,
        vector: x,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentEigen<T> {
    pub vertices: usize,
    pub lambda1: T,
    pub residual: T,
    pub iterations: usize,
    /// Every entry of the principal eigenvector is strictly positive.
    pub positive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirichletEigen<T> {
    pub lambda1: T,
    pub rayleigh_residual: T,
    pub interior_vertices: usize,
    pub components: Vec<ComponentEigen<T>>,
}

/// Smallest discrete Dirichlet eigenvalue of the region `inside`, minimum over
/// its connected components.
pub fn dirichlet_lambda1_region<T: Real>(
    mesh: &SampledSurface<T>,
    inside: &[bool],
    opts: &EigenOptions<T>,
) -> Result<DirichletEigen<T>> {
    let ops = region_operators(mesh, inside, opts.mass)?;
    let mut comps = Vec::with_capacity(ops.len());
    for op in &ops {
        let ep = inverse_iteration(op, opts)?;
        comps.push(ComponentEigen {
            vertices: op.free.len(),
            lambda1: ep.lambda,
            residual: ep.residual,
            iterations: ep.iterations,
            positive: ep.vector.iter().all(|&v| v > T::zero()),
        });
    }
    let best = comps
        .iter()
        .min_by(|a, b| a.lambda1.partial_cmp(&b.lambda1).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or(Error::EmptyRegion)?;
    Ok(DirichletEigen {
        lambda1: best.lambda1,
        rayleigh_residual: best.residual,
        interior_vertices: ops.iter().map(|o| o.free.len()).sum(),
        components: comps,
    })
}

/// `lambda_1` of the extrinsic ball `{R <= r}`.
pub fn dirichlet_lambda1_mesh<T: Real>(
    mesh: &SampledSurface<T>,
    r: T,
    opts: &EigenOptions<T>,
) -> Result<DirichletEigen<T>> {
    let inside: Vec<bool> = mesh.vertices.iter().map(|v| v.r <= r).collect();
    dirichlet_lambda1_region(mesh, &inside, opts)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BartaSandwich<T> {
    /// `inf (K f)_i / (M f)_i` over free vertices.
    pub inf_ratio: T,
    pub sup_ratio: T,
    pub lambda1_mesh: T,
    pub contains: bool,
    /// The same ratios restricted to free vertices with `R <= core * r`.
    pub core_inf: T,
    pub core_sup: T,
}

/// Discrete Barta ratios of a trial function given per mesh vertex. The trial is
/// treated as zero on clamped vertices and must be positive on free ones.
pub fn barta_sandwich_check<T: Real>(
    mesh: &SampledSurface<T>,
    r: T,
    trial: &[T],
    core: T,
    opts: &EigenOptions<T>,
) -> Result<BartaSandwich<T>> {
    let mut all = barta_sandwich_batch(mesh, r, std::slice::from_ref(&trial), core, opts)?;
    Ok(all.remove(0))
}

/// [`barta_sandwich_check`] for several trials sharing one eigen solve per component.
pub fn barta_sandwich_batch<T: Real, F: AsRef<[T]>>(
    mesh: &SampledSurface<T>,
    r: T,
    trials: &[F],
    core: T,
    opts: &EigenOptions<T>,
) -> Result<Vec<BartaSandwich<T>>> {
    let inside: Vec<bool> = mesh.vertices.iter().map(|v| v.r <= r).collect();
    let ops = region_operators(mesh, &inside, opts.mass)?;
    let mut out = vec![
        BartaSandwich {
            inf_ratio: T::infinity(),
            sup_ratio: T::neg_infinity(),
            lambda1_mesh: T::infinity(),
            contains: true,
            core_inf: T::infinity(),
            core_sup: T::neg_infinity(),
        };
        trials.len()
    ];
    for op in &ops {
        let lam = inverse_iteration(op, opts)?.lambda;
        let slack = T::lit(1e-9) * lam;
        for (trial, res) in trials.iter().zip(out.iter_mut()) {
            let trial = trial.as_ref();
            let f: Vec<T> = op.free.iter().map(|&v| trial[v]).collect();
            if let Some(k) = f.iter().position(|&x| !(x > T::zero())) {
                return Err(Error::TrialNotPositive { vertex: op.free[k] });
            }
            let kf = op.stiffness.mul(&f);
            let mf = op.mass.mul(&f);
            let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
            for (i, &v) in op.free.iter().enumerate() {
                let q = kf[i] / mf[i];
                lo = lo.min(q);
                hi = hi.max(q);
                if mesh.vertices[v].r <= core * r {
                    res.core_inf = res.core_inf.min(q);
                    res.core_sup = res.core_sup.max(q);
                }
            }
            res.contains &= lo <= lam + slack && lam <= hi + slack;
            res.inf_ratio = res.inf_ratio.min(lo);
            res.sup_ratio = res.sup_ratio.max(hi);
            res.lambda1_mesh = res.lambda1_mesh.min(lam);
        }
    }
    Ok(out)
}

/// `v(R)` of the radial ball eigenfunction transplanted to mesh vertices.
pub fn transplant<T: Real>(mesh: &SampledSurface<T>, ef: &RadialEigenfunction<T>) -> Vec<T> {
    mesh.vertices.iter().map(|v| ef.v_at(v.r)).collect()
}

/// One radius of the tone report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralEstimate<T> {
    pub r: T,
    pub lambda1_mesh: T,
    pub lambda1_barta: T,
    pub l_used: usize,
    pub t_c: T,
    #[serde(rename = "H0")]
    pub h0: T,
    pub v_at_tc: T,
    pub prefactor: T,
    /// `lambda_1` of the Euclidean `l_used`-ball of radius `r`.
    pub lambda_ball: T,
    pub lambda_c: T,
}

/// Smallest integer `l >= 2` with `2m - (l - 1)(1 - Lambda^2) + c <= 0`.
pub fn smallest_dimension<T: Real>(m: usize, lambda_c: T, c: T) -> Result<usize> {
    let gap = T::one() - lambda_c * lambda_c;
    if !(lambda_c < T::one()) || !(gap > T::zero()) {
        return Err(Error::RegimeNotEntered {
            lambda_c: lambda_c.as_f64(),
        });
    }
    let need = (T::lit(2.0) * T::from_count(m) + c) / gap;
    let mut l = (need.floor().to_usize().unwrap_or(usize::MAX - 2) + 1).max(2);
    // floor may land one short or one over after rounding
    while l > 2 && T::lit(2.0) * T::from_count(m) - T::from_count(l - 2) * gap + c <= T::zero() {
        l -= 1;
    }
    while T::lit(2.0) * T::from_count(m) - T::from_count(l - 1) * gap + c > T::zero() {
        l += 1;
    }
    Ok(l)
}

/// `t_c` for a given `c`: first tamedness radius whose tail supremum is below `c`.
pub fn core_radius<T: Real>(tamed: &TamednessReport<T>, c: T) -> Option<T> {
    tamed
        .radii
        .iter()
        .zip(&tamed.a_i)
        .find(|(_, &a)| a < c)
        .map(|(&r, _)| r)
}

/// `H_0 = max R |H|` over vertices of `D_{t_c}`; exactly zero for minimal charts.
pub fn h0_on<T: Real>(mesh: &SampledSurface<T>, t_c: T) -> T {
    if mesh.immersion.is_minimal() {
        return T::zero();
    }
    mesh.vertices
        .iter()
        .filter(|v| v.r <= t_c)
        .map(|v| v.r * v.geom.mean_curvature_norm())
        .fold(T::zero(), T::max)
}

/// `max |grad-perp rho|` along `dD_t`, the `sin beta_max` entering the default
/// `delta(s) = sin beta_max(t) h(t)/h(s)` of the flat ambient space.
pub fn sin_beta_max<T: Real>(mesh: &SampledSurface<T>, t: T) -> Result<T> {
    let ls = level_set(mesh, t);
    let mut best = T::zero();
    for pl in &ls.polylines {
        for x in &pl.points {
            let g = mesh.immersion.point_geometry(x.u, x.v)?;
            best = best.max(g.radial_split().1);
        }
    }
    Ok(best)
}

/// Barta transplant bound `[1 + (2m + H_0)/v(t_c)] lambda_{1,l}(r)` for an
/// `m`-dimensional tamed surface, `Lambda_c(t_c) = delta(t_c) + c`.
pub fn barta_transplant_bound<T: Real>(
    m: usize,
    tamed: &TamednessReport<T>,
    c: T,
    delta_at_tc: T,
    h0: T,
    r: T,
) -> Result<SpectralEstimate<T>> {
    if tamed.verdict != TamedVerdict::Tamed {
        return Err(Error::Hypothesis {
            hypothesis: "tamed second fundamental form",
            detail: format!("verdict {:?}", tamed.verdict),
        });
    }
    if !(c > tamed.a_estimate && c < T::one()) {
        return Err(Error::Hypothesis {
            hypothesis: "c in (a(M), 1)",
            detail: format!("c = {c}, a_estimate = {}", tamed.a_estimate),
        });
    }
    let t_c = core_radius(tamed, c).ok_or_else(|| Error::Hypothesis {
        hypothesis: "t_c exists",
        detail: format!("no tamedness radius has tail supremum below {c}"),
    })?;
    if t_c >= r {
        return Err(Error::BallInsideCore {
            t_c: t_c.as_f64(),
            r: r.as_f64(),
        });
    }
    let lambda_c = delta_at_tc + c;
    let l_used = smallest_dimension(m, lambda_c, c)?;
    let ef = dirichlet_eigen_ball(l_used, r)?;
    let v_at_tc = ef.v_at(t_c);
    let prefactor = T::one() + (T::lit(2.0) * T::from_count(m) + h0) / v_at_tc;
    Ok(SpectralEstimate {
        r,
        lambda1_mesh: T::nan(),
        lambda1_barta: prefactor * ef.lambda1,
        l_used,
        t_c,
        h0,
        v_at_tc,
        prefactor,
        lambda_ball: ef.lambda1,
        lambda_c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeltaChoice {
    /// `delta = 0`.
    Zero,
    /// `delta(t_c) = max |grad-perp rho|` on `dD_{t_c}`.
    #[default]
    Measured,
}

#[derive(Debug, Clone, Copy)]
pub struct ToneOptions<T> {
    pub resolution: usize,
    /// Window margin beyond the largest radius.
    pub margin: T,
    pub delta: DeltaChoice,
    pub eigen: EigenOptions<T>,
}

impl<T: Real> Default for ToneOptions<T> {
    fn default() -> Self {
        Self {
            resolution: 256,
            margin: T::lit(1.1),
            delta: DeltaChoice::Measured,
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ToneReport<T> {
    pub estimates: Vec<SpectralEstimate<T>>,
    /// Least-squares slope of `log lambda1_mesh` against `log r`.
    pub decay_exponent: T,
    pub dominated: bool,
    pub decreasing: bool,
}

/// Mesh eigenvalue and transplant bound at each radius, each on its own mesh
/// sized to the radius.
pub fn tone_decay_report<T: Real>(
    imm: &ParametricImmersion<T>,
    radii: &[T],
    tamed: &TamednessReport<T>,
    c: T,
    opts: &ToneOptions<T>,
) -> Result<ToneReport<T>> {
    if radii.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: radii.len(),
        });
    }
    let mut estimates = Vec::with_capacity(radii.len());
    for &r in radii {
        let window = window_for_radius(imm, r, opts.margin)?;
        let mesh = triangulate(imm, window, opts.resolution, opts.resolution)?;
        let t_c = core_radius(tamed, c).unwrap_or(T::zero());
        let delta = match opts.delta {
            DeltaChoice::Zero => T::zero(),
            DeltaChoice::Measured if t_c > T::zero() => sin_beta_max(&mesh, t_c)?,
            DeltaChoice::Measured => T::zero(),
        };
        let mut est = barta_transplant_bound(2, tamed, c, delta, h0_on(&mesh, t_c), r)?;
        est.lambda1_mesh = dirichlet_lambda1_mesh(&mesh, r, &opts.eigen)?.lambda1;
        estimates.push(est);
    }
    let lx: Vec<T> = estimates.iter().map(|e| e.r.ln()).collect();
    let ly: Vec<T> = estimates.iter().map(|e| e.lambda1_mesh.ln()).collect();
    Ok(ToneReport {
        decay_exponent: linear_fit(&lx, &ly).0,
        dominated: estimates.iter().all(|e| e.lambda1_mesh <= e.lambda1_barta),
        decreasing: estimates.windows(2).all(|w| w[1].lambda1_mesh < w[0].lambda1_mesh),
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrinsic::{tamedness_on, TamednessOptions};
    use crate::surface::Window;

    fn disk_mesh(half: f64, n: usize) -> SampledSurface<f64> {
        triangulate(&ParametricImmersion::plane(), Window::square(half), n, n).unwrap()
    }

    #[test]
    fn skyline_solves_small_spd_system() {
        let rows = vec![
            vec![(0usize, 4.0f64), (1, -1.0)],
            vec![(0, -1.0), (1, 4.0), (2, -1.0)],
            vec![(1, -1.0), (2, 4.0), (3, -1.0)],
            vec![(2, -1.0), (3, 4.0)],
        ];
        let a = SparseSym { rows };
        let x = [1.0, -2.0, 0.5, 3.0];
        let b = a.mul(&x);
        let f = Skyline::factor(&a, None).unwrap();
        let y = f.solve(&b);
        assert!(y.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-13));
        let bad = SparseSym {
            rows: vec![vec![(0usize, 1.0f64), (1, 2.0)], vec![(0, 2.0), (1, 1.0)]],
        };
        assert!(Skyline::factor(&bad, None).is_err());
    }

    #[test]
    fn flat_disk_matches_bessel_zero() {
        let m = disk_mesh(1.1, 256);
        let ode = dirichlet_eigen_ball(2, 1.0).unwrap().lambda1;
        let e = dirichlet_lambda1_mesh(&m, 1.0, &EigenOptions::default()).unwrap();
        assert!((e.lambda1 / ode - 1.0).abs() < 0.03, "{} vs {ode}", e.lambda1);
        assert!(e.rayleigh_residual < 1e-6);
        assert_eq!(e.components.len(), 1);
        assert!(e.components[0].positive);
    }

    #[test]
    fn lumped_and_consistent_bracket_closely() {
        let m = disk_mesh(1.1, 96);
        let c = dirichlet_lambda1_mesh(&m, 1.0, &EigenOptions::default())
            .unwrap()
            .lambda1;
        let l = dirichlet_lambda1_mesh(
            &m,
            1.0,
            &EigenOptions {
                mass: MassKind::Lumped,
                ..EigenOptions::default()
            },
        )
        .unwrap()
        .lambda1;
        assert!((c / l - 1.0).abs() < 0.02);
    }

    #[test]
    fn shift_does_not_move_the_eigenvalue() {
        let m = disk_mesh(1.1, 64);
        let a = dirichlet_lambda1_mesh(&m, 1.0, &EigenOptions::default())
            .unwrap()
            .lambda1;
        let b = dirichlet_lambda1_mesh(
            &m,
            1.0,
            &EigenOptions {
                shift: 4.0,
                ..EigenOptions::default()
            },
        )
        .unwrap()
        .lambda1;
        assert!((a - b).abs() < 1e-7 * a);
    }

    #[test]
    fn small_regions_are_rejected() {
        let m = disk_mesh(1.1, 32);
        assert!(matches!(
            dirichlet_lambda1_mesh(&m, 0.05, &EigenOptions::default()),
            Err(Error::RegionTooSmall { .. }) | Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn two_disks_report_the_smaller_eigenvalue() {
        let m: SampledSurface<f64> = triangulate(
            &ParametricImmersion::plane(),
            Window::new(-3.0, 3.0, -1.5, 1.5),
            192,
            96,
        )
        .unwrap();
        let inside: Vec<bool> = m
            .vertices
            .iter()
            .map(|v| ((v.u + 1.5).powi(2) + v.v * v.v).sqrt() <= 1.0 || ((v.u - 1.5).powi(2) + v.v * v.v).sqrt() <= 0.5)
            .collect();
        let e = dirichlet_lambda1_region(&m, &inside, &EigenOptions::default()).unwrap();
        assert_eq!(e.components.len(), 2);
        let big = e.components.iter().map(|c| c.lambda1).fold(0.0, f64::max);
        assert!((big / e.lambda1 - 4.0).abs() < 0.3);
    }

    #[test]
    fn barta_containment_for_transplant_and_parabola() {
        let m = disk_mesh(1.1, 128);
        let ef = dirichlet_eigen_ball(2, 1.0).unwrap();
        let f = transplant(&m, &ef);
        let b = barta_sandwich_check(&m, 1.0, &f, 0.8, &EigenOptions::default()).unwrap();
        assert!(b.contains);
        assert!(b.core_sup / b.core_inf - 1.0 < 0.05, "{b:?}");
        let g: Vec<f64> = m.vertices.iter().map(|v| 1.0 - v.r * v.r).collect();
        let b = barta_sandwich_check(&m, 1.0, &g, 0.8, &EigenOptions::default()).unwrap();
        assert!(b.contains && b.inf_ratio < b.sup_ratio);
        let bad: Vec<f64> = m.vertices.iter().map(|v| v.u).collect();
        assert!(matches!(
            barta_sandwich_check(&m, 1.0, &bad, 0.8, &EigenOptions::default()),
            Err(Error::TrialNotPositive { .. })
        ));
    }

    #[test]
    fn dimension_choice_matches_arithmetic() {
        assert_eq!(smallest_dimension(2, 0.1f64, 0.1).unwrap(), 6);
        assert_eq!(smallest_dimension(2, 0.0f64, 0.0).unwrap(), 5);
        assert!(smallest_dimension(2, 1.0f64, 0.5).is_err());
    }

    #[test]
    fn plane_transplant_bound() {
        let m = disk_mesh(9.0, 64);
        let radii = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0];
        let tamed = tamedness_on(&m, &radii, 0.1, TamednessOptions::default()).unwrap();
        let est = barta_transplant_bound(2, &tamed, 0.1, 0.0, 0.0, 6.0).unwrap();
        assert_eq!(est.l_used, 6);
        let ef = dirichlet_eigen_ball(6, 6.0).unwrap();
        assert!((est.prefactor - (1.0 + 4.0 / ef.v_at(est.t_c))).abs() < 1e-12);
        assert!((est.lambda1_barta - est.prefactor * ef.lambda1).abs() < 1e-12);
        assert!(matches!(
            barta_transplant_bound(2, &tamed, 0.1, 0.0, 0.0, 0.5),
            Err(Error::BallInsideCore { .. })
        ));
    }

    #[test]
    fn disk_scaling_and_inclusion() {
        let m = disk_mesh(2.2, 192);
        let opts = EigenOptions::default();
        let l1 = dirichlet_lambda1_mesh(&m, 1.0, &opts).unwrap().lambda1;
        let l2 = dirichlet_lambda1_mesh(&m, 2.0, &opts).unwrap().lambda1;
        assert!((l2 / l1 - 0.25).abs() < 0.02, "{}", l2 / l1);
        let mut prev = f64::INFINITY;
        for r in [0.8, 1.0, 1.3, 1.7, 2.0] {
            let l = dirichlet_lambda1_mesh(&m, r, &opts).unwrap().lambda1;
            assert!(l <= prev);
            prev = l;
        }
    }

    #[test]
    fn refinement_reduces_disk_error() {
        let exact = dirichlet_eigen_ball(2, 1.0).unwrap().lambda1;
        let err = |n| {
            let m = disk_mesh(1.0 + 2.0 / n as f64, n);
            (dirichlet_lambda1_mesh(&m, 1.0, &EigenOptions::default())
                .unwrap()
                .lambda1
                - exact)
                .abs()
        };
        let (e1, e2) = (err(48), err(96));
        assert!(e2 <= 0.7 * e1, "{e1} {e2}");
    }

    #[test]
    fn catenoid_transplant_is_contained() {
        let imm = ParametricImmersion::<f64>::catenoid();
        let w = window_for_radius(&imm, 10.0, 1.1).unwrap();
        let m = triangulate(&imm, w, 128, 128).unwrap();
        let ef = dirichlet_eigen_ball(16, 10.0).unwrap();
        let f = transplant(&m, &ef);
        let b = barta_sandwich_check(&m, 10.0, &f, 0.8, &EigenOptions::default()).unwrap();
        assert!(b.contains && b.lambda1_mesh > 0.0);
        assert!((h0_on(&m, 4.0)).abs() == 0.0);
    }
}

#[cfg(test)]
mod properties {
    use std::sync::OnceLock;

    use super::*;
    use crate::surface::Window;
    use proptest::prelude::*;

    fn disk_mesh() -> &'static SampledSurface<f64> {
        static MESH: OnceLock<SampledSurface<f64>> = OnceLock::new();
        MESH.get_or_init(|| triangulate(&ParametricImmersion::plane(), Window::square(1.05), 48, 48).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn smallest_dimension_is_minimal(m in 1usize..4, lam in 0.0..0.99f64, c in 0.0..1.0f64) {
            let l = smallest_dimension(m, lam, c).unwrap();
            let lhs = |l: usize| 2.0 * m as f64 - (l as f64 - 1.0) * (1.0 - lam * lam) + c;
            prop_assert!(l >= 2);
            prop_assert!(lhs(l) <= 0.0);
            prop_assert!(l == 2 || lhs(l - 1) > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn barta_ratios_bracket_the_mesh_eigenvalue(
            centres in prop::collection::vec((-0.7..0.7f64, -0.7..0.7f64, 0.1..2.0f64, 0.05..0.6f64), 1..5),
            eps in 1e-4..0.5f64,
        ) {
            let mesh = disk_mesh();
            let trial: Vec<f64> = mesh
                .vertices
                .iter()
                .map(|v| {
                    let p = &v.geom.position;
                    let bumps: f64 = centres
                        .iter()
                        .map(|&(x, y, w, s)| w * (-((p[0] - x).powi(2) + (p[1] - y).powi(2)) / (s * s)).exp())
                        .sum();
                    (1.0 + eps - v.r * v.r) * (0.05 + bumps)
                })
                .collect();
            let b = barta_sandwich_check(mesh, 1.0, &trial, 0.8, &EigenOptions::default()).unwrap();
            prop_assert!(b.contains, "{:?}", b);
        }

        #[test]
        fn eigenvalue_decreases_under_inclusion(r1 in 0.4..1.0f64, gap in 0.05..0.6f64) {
            let mesh = disk_mesh();
            let r2 = (r1 + gap).min(1.0);
            prop_assume!(r2 - r1 > 0.03);
            let opts = EigenOptions::default();
            let a = dirichlet_lambda1_mesh(mesh, r1, &opts).unwrap().lambda1;
            let b = dirichlet_lambda1_mesh(mesh, r2, &opts).unwrap().lambda1;
            prop_assert!(b <= a, "lambda(D_{r1}) = {a}, lambda(D_{r2}) = {b}");
        }
    }
}
