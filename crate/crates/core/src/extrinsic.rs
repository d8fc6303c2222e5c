//! Geometry of the extrinsic distance `R = |F|`: the split of the ambient radial
//! field, level sets `{R = r}`, growth curves of extrinsic balls, tamedness of the
//! second fundamental form, the coarea and divergence identities and the radial
//! flow along `grad R / |grad R|^2`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::comparison::ComparisonProfile;
use crate::discretize::{intrinsic_distance, region_area_level, region_integral, SampledSurface};
use crate::error::{Error, Result};
use crate::scalar::{dist, dot, linear_fit, Real};
use crate::surface::{ParametricImmersion, PointGeometry, Window};

/// Radius below which the radial split is undefined.
pub const POLE_RADIUS: f64 = 1e-9;

/// `(|grad R|, |grad-perp rho|)` at a parameter point.
pub fn gradient_decomposition<T: Real>(imm: &ParametricImmersion<T>, u: T, v: T) -> Result<(T, T)> {
    let geo = imm.point_geometry(u, v)?;
    let r = geo.radius();
    if !(r > T::lit(POLE_RADIUS)) {
        return Err(Error::PoleNeighborhood {
            u: u.as_f64(),
            v: v.as_f64(),
            r: r.as_f64(),
        });
    }
    Ok(geo.radial_split())
}

/// Radius actually used for a level-set query: nudged by a relative `1e-6`
/// while some vertex value sits within `1e-9 max(r, 1)` of it.
pub fn nudged_radius<T: Real>(mesh: &SampledSurface<T>, r: T) -> T {
    let mut r = r;
    for _ in 0..16 {
        let tol = T::lit(1e-9) * r.max(T::one());
        if mesh.vertices.iter().all(|v| (v.r - r).abs() >= tol) {
            break;
        }
        r *= T::one() + T::lit(1e-6);
    }
    r
}

/// Point where a level set crosses a mesh edge.
#[derive(Debug, Clone)]
pub struct Crossing<T> {
    pub u: T,
    pub v: T,
    pub point: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct Polyline<T> {
    pub points: Vec<Crossing<T>>,
    pub closed: bool,
    pub length: T,
}

impl<T: Real> Polyline<T> {
    /// Consecutive point pairs, including the closing pair of a loop.
    pub fn segments(&self) -> impl Iterator<Item = (&Crossing<T>, &Crossing<T>)> + '_ {
        let n = self.points.len();
        let m = if self.closed { n } else { n.saturating_sub(1) };
        (0..m).map(move |k| (&self.points[k], &self.points[(k + 1) % n]))
    }
}

#[derive(Debug, Clone)]
pub struct LevelSet<T> {
    pub requested: T,
    /// Radius after the degenerate-level nudge.
    pub r: T,
    pub polylines: Vec<Polyline<T>>,
    pub total_length: T,
}

impl<T: Real> LevelSet<T> {
    /// Sum over segments of `chord * mean(f)` with `f` evaluated at each crossing.
    pub fn line_integral<F: FnMut(&Crossing<T>) -> Result<T>>(&self, mut f: F) -> Result<T> {
        let mut acc = T::zero();
        for pl in &self.polylines {
            let vals = pl.points.iter().map(&mut f).collect::<Result<Vec<T>>>()?;
            let n = vals.len();
            let m = if pl.closed { n } else { n.saturating_sub(1) };
            for k in 0..m {
                let k1 = (k + 1) % n;
                acc += dist(&pl.points[k].point, &pl.points[k1].point) * T::lit(0.5) * (vals[k] + vals[k1]);
            }
        }
        Ok(acc)
    }
}

/// Root of `g` on `[0, 1]` given `g(0) = g0 < 0 <= g1 = g(1)` or the reverse,
/// by the Illinois variant of regula falsi.
fn illinois<T: Real, G: Fn(T) -> T>(g: G, g0: T, g1: T, tol: T) -> T {
    let (mut a, mut b, mut fa, mut fb) = (T::zero(), T::one(), g0, g1);
    let mut side = 0i8;
    let mut x = a - fa * (b - a) / (fb - fa);
    for _ in 0..60 {
        x = a - fa * (b - a) / (fb - fa);
        let fx = g(x);
        if fx.abs() <= tol || (b - a).abs() <= T::epsilon() {
            break;
        }
        if (fx < T::zero()) == (fa < T::zero()) {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= T::lit(0.5);
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= T::lit(0.5);
            }
            side = 1;
        }
    }
    x
}

/// Marching-triangles contour of `R = r`, each crossing refined on the exact chart.
pub fn level_set<T: Real>(mesh: &SampledSurface<T>, r: T) -> LevelSet<T> {
    let requested = r;
    let r = nudged_radius(mesh, r);
    let imm = &mesh.immersion;
    let phi: Vec<T> = mesh.vertices.iter().map(|v| v.r - r).collect();
    let tol = T::lit(1e-13) * r.max(T::one());
    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
    let mut crossings: Vec<Crossing<T>> = Vec::new();
    let mut segments: Vec<[usize; 2]> = Vec::new();

    let period = T::TAU();
    let wrap = |u: T| {
        if mesh.periodic {
            let w = mesh.window.u0;
            w + (u - w) - ((u - w) / period).floor() * period
        } else {
            u
        }
    };

    for (t, uv) in mesh.triangles.iter().zip(&mesh.tri_uv) {
        let neg = [phi[t[0]] < T::zero(), phi[t[1]] < T::zero(), phi[t[2]] < T::zero()];
        if neg[0] == neg[1] && neg[1] == neg[2] {
            continue;
        }
        let mut ends = Vec::with_capacity(2);
        for (p, q) in [(0usize, 1usize), (1, 2), (2, 0)] {
            if neg[p] == neg[q] {
                continue;
            }
            let (a, b) = (t[p], t[q]);
            let key = (a.min(b), a.max(b));
            let id = *cache.entry(key).or_insert_with(|| {
                let (ka, kb) = if a < b { (p, q) } else { (q, p) };
                let (ua, ub) = (uv[ka], uv[kb]);
                let (fa, fb) = (phi[key.0], phi[key.1]);
                let at = |s: T| [ua[0] + s * (ub[0] - ua[0]), ua[1] + s * (ub[1] - ua[1])];
                let s = illinois(
                    |s| {
                        let x = at(s);
                        imm.radius(x[0], x[1]) - r
                    },
                    fa,
                    fb,
                    tol,
                );
                let x = at(s);
                crossings.push(Crossing {
                    u: wrap(x[0]),
                    v: x[1],
                    point: imm.position(x[0], x[1]),
                });
                crossings.len() - 1
            });
            ends.push(id);
        }
        if ends.len() == 2 && ends[0] != ends[1] {
            segments.push([ends[0], ends[1]]);
        }
    }

    // chain segments through shared crossings
    let mut at_point: Vec<Vec<usize>> = vec![Vec::new(); crossings.len()];
    for (s, seg) in segments.iter().enumerate() {
        at_point[seg[0]].push(s);
        at_point[seg[1]].push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut chain = vec![segments[start][0], segments[start][1]];
        let walk = |chain: &mut Vec<usize>, used: &mut Vec<bool>| loop {
            let tail = *chain.last().expect("non-empty");
            let next = at_point[tail].iter().copied().find(|&s| !used[s]);
            match next {
                Some(s) => {
                    used[s] = true;
                    let seg = segments[s];
                    chain.push(if seg[0] == tail { seg[1] } else { seg[0] });
                }
                None => break,
            }
        };
        walk(&mut chain, &mut used);
        let closed = chain.len() > 2 && chain.first() == chain.last();
        if closed {
            chain.pop();
        } else {
            chain.reverse();
            walk(&mut chain, &mut used);
        }
        let points: Vec<Crossing<T>> = chain.iter().map(|&k| crossings[k].clone()).collect();
        let mut pl = Polyline {
            points,
            closed,
            length: T::zero(),
        };
        pl.length = pl.segments().map(|(a, b)| dist(&a.point, &b.point)).sum();
        polylines.push(pl);
    }
    let total_length = polylines.iter().map(|p| p.length).sum();
    LevelSet {
        requested,
        r,
        polylines,
        total_length,
    }
}

/// Sampled extrinsic-ball statistics along a radius grid.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthCurve<T> {
    pub radii: Vec<T>,
    /// `A(D_r)`.
    pub area: Vec<T>,
    /// `L(dD_r)`.
    pub perimeter: Vec<T>,
    /// `int_{D_r} K dA`.
    pub curvature_integral: Vec<T>,
    /// `int_{D_r} |alpha|^2 dA`.
    pub alpha_sq_integral: Vec<T>,
    /// `min |grad R|` over sampled vertices outside `D_r` (`inf` when there are none).
    pub min_grad_r_outside: Vec<T>,
    /// Connected components of `dD_r`.
    pub level_components: Vec<usize>,
}

impl<T: Real> GrowthCurve<T> {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn to_f64(&self) -> GrowthCurve<f64> {
        let c = |v: &[T]| v.iter().map(|x| x.as_f64()).collect();
        GrowthCurve {
            radii: c(&self.radii),
            area: c(&self.area),
            perimeter: c(&self.perimeter),
            curvature_integral: c(&self.curvature_integral),
            alpha_sq_integral: c(&self.alpha_sq_integral),
            min_grad_r_outside: c(&self.min_grad_r_outside),
            level_components: self.level_components.clone(),
        }
    }

    fn take(&self, n: usize) -> Self {
        Self {
            radii: self.radii[..n].to_vec(),
            area: self.area[..n].to_vec(),
            perimeter: self.perimeter[..n].to_vec(),
            curvature_integral: self.curvature_integral[..n].to_vec(),
            alpha_sq_integral: self.alpha_sq_integral[..n].to_vec(),
            min_grad_r_outside: self.min_grad_r_outside[..n].to_vec(),
            level_components: self.level_components[..n].to_vec(),
        }
    }
}

fn check_radii<T: Real>(radii: &[T]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if radii.iter().any(|&r| !(r > T::zero())) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("radii must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Growth curve on a prebuilt mesh. Radii beyond the window's safe radius yield
/// a window-truncation error carrying the curve on the covered radii.
pub fn growth_curve_on<T: Real>(mesh: &SampledSurface<T>, radii: &[T]) -> Result<GrowthCurve<T>> {
    check_radii(radii)?;
    let safe = mesh.safe_radius();
    let covered = radii.iter().take_while(|&&r| r <= safe).count();
    let k: Vec<T> = mesh.vertices.iter().map(|v| v.geom.k).collect();
    let a2: Vec<T> = mesh
        .vertices
        .iter()
        .map(|v| v.geom.alpha_norm * v.geom.alpha_norm)
        .collect();
    let rows: Vec<(T, T, T, T, T, usize)> = radii[..covered]
        .par_iter()
        .map(|&r| {
            let ls = level_set(mesh, r);
            let phi: Vec<T> = mesh.vertices.iter().map(|v| v.r - ls.r).collect();
            let min_grad = mesh
                .vertices
                .iter()
                .filter(|v| v.r > ls.r)
                .map(|v| v.grad_r)
                .fold(T::infinity(), T::min);
            (
                region_area_level(mesh, &phi),
                ls.total_length,
                region_integral(mesh, &phi, &k),
                region_integral(mesh, &phi, &a2),
                min_grad,
                ls.polylines.len(),
            )
        })
        .collect();
    let curve = GrowthCurve {
        radii: radii[..covered].to_vec(),
        area: rows.iter().map(|r| r.0).collect(),
        perimeter: rows.iter().map(|r| r.1).collect(),
        curvature_integral: rows.iter().map(|r| r.2).collect(),
        alpha_sq_integral: rows.iter().map(|r| r.3).collect(),
        min_grad_r_outside: rows.iter().map(|r| r.4).collect(),
        level_components: rows.iter().map(|r| r.5).collect(),
    };
    if covered < radii.len() {
        return Err(Error::WindowTruncation {
            requested: radii[radii.len() - 1].as_f64(),
            safe_radius: safe.as_f64(),
            safe: Some(Box::new(curve.take(covered).to_f64())),
        });
    }
    Ok(curve)
}

/// Builds the mesh and measures the growth curve.
pub fn growth_curve<T: Real>(
    imm: &ParametricImmersion<T>,
    window: Window<T>,
    resolution: (usize, usize),
    radii: &[T],
) -> Result<GrowthCurve<T>> {
    let mesh = crate::discretize::triangulate(imm, window, resolution.0, resolution.1)?;
    growth_curve_on(&mesh, radii)
}

/// Smallest window (up to the bracketing tolerance) whose boundary stays beyond
/// `margin * r`. Periodic charts get a symmetric `v`-band, others a square about
/// the basepoint; compact charts get their whole domain.
pub fn window_for_radius<T: Real>(imm: &ParametricImmersion<T>, r: T, margin: T) -> Result<Window<T>> {
    let d = imm.domain;
    if d.u0.is_finite() && d.u1.is_finite() && d.v0.is_finite() && d.v1.is_finite() {
        return Ok(d);
    }
    let target = margin * r;
    let (bu, bv) = imm.basepoint();
    let samples = 512;
    let window_at = |s: T| {
        if imm.u_periodic {
            Window::new(d.u0, d.u1, bv - s, bv + s)
        } else {
            Window::new(bu - s, bu + s, bv - s, bv + s)
        }
    };
    let boundary_min = |s: T| {
        let w = window_at(s);
        let mut m = T::infinity();
        for k in 0..=samples {
            let f = T::from_count(k) / T::from_count(samples);
            let u = w.u0 + f * w.width();
            let v = w.v0 + f * w.height();
            m = m.min(imm.radius(u, w.v0)).min(imm.radius(u, w.v1));
            if !imm.u_periodic {
                m = m.min(imm.radius(w.u0, v)).min(imm.radius(w.u1, v));
            }
        }
        m
    };
    let mut hi = T::one();
    let mut lo = T::zero();
    while boundary_min(hi) <= target {
        lo = hi;
        hi *= T::lit(2.0);
        if hi > T::lit(1e8) {
            return Err(Error::Invalid(format!("no window reaches radius {r}")));
        }
    }
    for _ in 0..40 {
        let mid = T::lit(0.5) * (lo + hi);
        if boundary_min(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(window_at(hi))
}

/// Log-log fits and tail constants of a growth curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthFit<T> {
    pub p_area: T,
    pub c1: T,
    pub c0: T,
    pub q_perim: T,
    pub ct1: T,
    pub ct0: T,
    /// Index of the first radius in the tail.
    pub tail_start: usize,
}

pub fn fit_growth<T: Real>(curve: &GrowthCurve<T>, tail_fraction: T) -> Result<GrowthFit<T>> {
    let n = curve.len();
    let tail = (tail_fraction * T::from_count(n))
        .ceil()
        .to_usize()
        .unwrap_or(n)
        .clamp(1, n.max(1));
    if tail < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: tail });
    }
    let start = n - tail;
    let mut lx = Vec::with_capacity(tail);
    let mut la = Vec::with_capacity(tail);
    let mut lp = Vec::with_capacity(tail);
    for k in start..n {
        for x in [curve.radii[k], curve.area[k], curve.perimeter[k]] {
            if !(x > T::zero()) {
                return Err(Error::NonPositive { value: x.as_f64() });
            }
        }
        lx.push(curve.radii[k].ln());
        la.push(curve.area[k].ln());
        lp.push(curve.perimeter[k].ln());
    }
    let ar: Vec<T> = (start..n)
        .map(|k| curve.area[k] / (curve.radii[k] * curve.radii[k]))
        .collect();
    let pr: Vec<T> = (start..n).map(|k| curve.perimeter[k] / curve.radii[k]).collect();
    let max = |v: &[T]| v.iter().copied().fold(T::neg_infinity(), T::max);
    let min = |v: &[T]| v.iter().copied().fold(T::infinity(), T::min);
    Ok(GrowthFit {
        p_area: linear_fit(&lx, &la).0,
        c1: max(&ar),
        c0: min(&ar),
        q_perim: linear_fit(&lx, &lp).0,
        ct1: max(&pr),
        ct0: min(&pr),
        tail_start: start,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TamedVerdict {
    Tamed,
    NotTamed,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StrongTamedness<T> {
    pub epsilon: T,
    pub tail_sup: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct TamednessReport<T> {
    pub radii: Vec<T>,
    /// `sup rho_M |alpha|` over sampled vertices outside `D_{r_i}`.
    pub a_i: Vec<T>,
    pub a_estimate: T,
    pub verdict: TamedVerdict,
    pub c: T,
    /// First radius whose tail supremum is below `c`.
    pub t_c: Option<T>,
    pub strong: Option<StrongTamedness<T>>,
    pub slack: T,
}

#[derive(Debug, Clone, Copy)]
pub struct TamednessOptions<T> {
    pub slack: T,
    pub epsilon: Option<T>,
}

impl<T: Real> Default for TamednessOptions<T> {
    fn default() -> Self {
        Self {
            slack: T::lit(0.05),
            epsilon: None,
        }
    }
}

/// Tamedness estimate on a prebuilt mesh with graph-metric `rho_M` from the
/// vertex nearest the origin.
pub fn tamedness_on<T: Real>(
    mesh: &SampledSurface<T>,
    radii: &[T],
    c: T,
    opts: TamednessOptions<T>,
) -> Result<TamednessReport<T>> {
    check_radii(radii)?;
    if !(c > T::zero() && c < T::one()) {
        return Err(Error::Invalid(format!("c must lie in (0, 1), got {c}")));
    }
    let safe = mesh.safe_radius();
    if radii[radii.len() - 1] > safe {
        return Err(Error::WindowTruncation {
            requested: radii[radii.len() - 1].as_f64(),
            safe_radius: safe.as_f64(),
            safe: None,
        });
    }
    let rho = intrinsic_distance(mesh, mesh.base_vertex())?.rho;
    let tail_sup = |r: T, power: T| {
        mesh.vertices
            .iter()
            .zip(&rho)
            .filter(|(v, _)| v.r > r)
            .map(|(v, &d)| d.powf(power) * v.geom.alpha_norm)
            .fold(T::zero(), T::max)
    };
    let a_i: Vec<T> = radii.iter().map(|&r| tail_sup(r, T::one())).collect();
    let n = a_i.len();
    let a_estimate = a_i[n - 1];
    let last_third = &a_i[n - n.div_ceil(3)..];
    let last_half = &a_i[n - n.div_ceil(2)..];
    let verdict = if last_third.iter().all(|&a| a < T::one() - opts.slack) {
        TamedVerdict::Tamed
    } else if last_half.iter().all(|&a| a >= T::one()) {
        TamedVerdict::NotTamed
    } else {
        TamedVerdict::Inconclusive
    };
    let t_c = radii.iter().zip(&a_i).find(|(_, &a)| a < c).map(|(&r, _)| r);
    let strong = opts.epsilon.map(|eps| StrongTamedness {
        epsilon: eps,
        tail_sup: tail_sup(radii[n - 1], T::one() + eps),
    });
    Ok(TamednessReport {
        radii: radii.to_vec(),
        a_i,
        a_estimate,
        verdict,
        c,
        t_c,
        strong,
        slack: opts.slack,
    })
}

pub fn tamedness_estimate<T: Real>(
    imm: &ParametricImmersion<T>,
    window: Window<T>,
    resolution: (usize, usize),
    radii: &[T],
    c: T,
) -> Result<TamednessReport<T>> {
    let mesh = crate::discretize::triangulate(imm, window, resolution.0, resolution.1)?;
    tamedness_on(&mesh, radii, c, TamednessOptions::default())
}

/// `|grad R|` at a level-set crossing.
fn crossing_grad<T: Real>(imm: &ParametricImmersion<T>, x: &Crossing<T>) -> Result<T> {
    Ok(gradient_decomposition(imm, x.u, x.v)?.0)
}

/// `int_{dD_s} 1/|grad R| dL`; `None` when the level is critical.
fn inverse_grad_integral<T: Real>(mesh: &SampledSurface<T>, s: T) -> Result<Option<T>> {
    let ls = level_set(mesh, s);
    let mut critical = false;
    let val = ls.line_integral(|x| {
        let g = crossing_grad(&mesh.immersion, x)?;
        if g < T::lit(1e-6) {
            critical = true;
        }
        Ok(T::one() / g.max(T::lit(1e-6)))
    })?;
    Ok(if critical { None } else { Some(val) })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoareaReport<T> {
    pub area_difference: T,
    pub coarea_integral: T,
    pub relative_residual: T,
    /// Sub-grid levels that were critical and had to be nudged.
    pub critical_levels: usize,
}

/// Compares `A(D_r2) - A(D_r1)` against `int_{r1}^{r2} int_{dD_s} 1/|grad R| dL ds`.
pub fn coarea_check<T: Real>(mesh: &SampledSurface<T>, r1: T, r2: T, subgrid: usize) -> Result<CoareaReport<T>> {
    if !(r1 < r2) {
        return Err(Error::EmptyRange {
            from: r1.as_f64(),
            to: r2.as_f64(),
        });
    }
    let n = subgrid.max(2).div_ceil(2) * 2;
    let h = (r2 - r1) / T::from_count(n);
    let levels: Vec<T> = (0..=n).map(|k| r1 + h * T::from_count(k)).collect();
    let vals = levels
        .par_iter()
        .map(|&s| {
            let mut s_try = s;
            for attempt in 0..8 {
                if let Some(v) = inverse_grad_integral(mesh, s_try)? {
                    return Ok((v, attempt));
                }
                s_try *= T::one() + T::lit(1e-3);
            }
            Err(Error::CriticalPoint {
                u: f64::NAN,
                v: f64::NAN,
                grad: 0.0,
            })
        })
        .collect::<Result<Vec<(T, usize)>>>()?;
    let mut integral = T::zero();
    for (k, (v, _)) in vals.iter().enumerate() {
        let w = if k == 0 || k == n {
            T::one()
        } else if k % 2 == 1 {
            T::lit(4.0)
        } else {
            T::lit(2.0)
        };
        integral += w * *v;
    }
    integral = integral * h / T::lit(3.0);
    let area = |r: T| {
        let r = nudged_radius(mesh, r);
        let phi: Vec<T> = mesh.vertices.iter().map(|v| v.r - r).collect();
        region_area_level(mesh, &phi)
    };
    let a2 = area(r2);
    let diff = a2 - area(r1);
    Ok(CoareaReport {
        area_difference: diff,
        coarea_integral: integral,
        relative_residual: (diff - integral).abs() / a2,
        critical_levels: vals.iter().filter(|v| v.1 > 0).count(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DivergenceReport<T> {
    pub interior: T,
    pub boundary: T,
    pub relative_residual: T,
}

/// Compares `int_{D_t} Delta R^2 dA` with `2 t int_{dD_t} |grad R| dL`.
pub fn divergence_check<T: Real>(mesh: &SampledSurface<T>, t: T) -> Result<DivergenceReport<T>> {
    let ls = level_set(mesh, t);
    let phi: Vec<T> = mesh.vertices.iter().map(|v| v.r - ls.r).collect();
    let lap: Vec<T> = mesh.vertices.iter().map(|v| v.geom.laplacian_r2()).collect();
    let interior = region_integral(mesh, &phi, &lap);
    let two_t = T::lit(2.0) * ls.r;
    let mut critical = None;
    let flux = ls.line_integral(|x| {
        let g = crossing_grad(&mesh.immersion, x)?;
        if g < T::lit(1e-6) {
            critical = Some((x.u, x.v, g));
        }
        Ok(g)
    })?;
    if let Some((u, v, g)) = critical {
        return Err(Error::CriticalPoint {
            u: u.as_f64(),
            v: v.as_f64(),
            grad: g.as_f64(),
        });
    }
    let boundary = two_t * flux;
    Ok(DivergenceReport {
        interior,
        boundary,
        relative_residual: (interior - boundary).abs() / (two_t * ls.total_length),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowSample<T> {
    pub t: T,
    pub u: T,
    pub v: T,
    pub r: T,
    /// `psi = |grad R|`.
    pub psi: T,
    pub sin_beta: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowTrajectory<T> {
    pub samples: Vec<FlowSample<T>>,
}

fn flow_velocity<T: Real>(imm: &ParametricImmersion<T>, u: T, v: T) -> Result<([T; 2], PointGeometry<T>)> {
    let geo = imm.point_geometry(u, v)?;
    let r = geo.radius();
    if !(r > T::lit(POLE_RADIUS)) {
        return Err(Error::PoleNeighborhood {
            u: u.as_f64(),
            v: v.as_f64(),
            r: r.as_f64(),
        });
    }
    let xhat: Vec<T> = geo.position.iter().map(|&x| x / r).collect();
    let (a, b) = geo.tangent_coefficients(&xhat);
    let grad_sq = a * dot(&xhat, &geo.fu) + b * dot(&xhat, &geo.fv);
    if !(grad_sq.sqrt() > T::lit(1e-6)) {
        return Err(Error::CriticalPoint {
            u: u.as_f64(),
            v: v.as_f64(),
            grad: grad_sq.max(T::zero()).sqrt().as_f64(),
        });
    }
    Ok(([a / grad_sq, b / grad_sq], geo))
}

/// Integrates `X' = grad R / |grad R|^2` in parameter space with RK4, so that
/// `R(X(t)) = R(X(0)) + t`.
pub fn radial_flow<T: Real>(
    imm: &ParametricImmersion<T>,
    start: (T, T),
    t_end: T,
    step: T,
) -> Result<FlowTrajectory<T>> {
    if !(t_end > T::zero() && step > T::zero()) {
        return Err(Error::Invalid("flow length and step must be positive".into()));
    }
    let n = (t_end / step).ceil().to_usize().unwrap_or(1).max(1);
    let s = t_end / T::from_count(n);
    let half = T::lit(0.5);
    let mut x = [start.0, start.1];
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let (k1, geo) = flow_velocity(imm, x[0], x[1])?;
        let (psi, sin_beta) = geo.radial_split();
        samples.push(FlowSample {
            t: s * T::from_count(k),
            u: x[0],
            v: x[1],
            r: geo.radius(),
            psi,
            sin_beta,
        });
        if k == n {
            break;
        }
        let (k2, _) = flow_velocity(imm, x[0] + half * s * k1[0], x[1] + half * s * k1[1])?;
        let (k3, _) = flow_velocity(imm, x[0] + half * s * k2[0], x[1] + half * s * k2[1])?;
        let (k4, _) = flow_velocity(imm, x[0] + s * k3[0], x[1] + s * k3[1])?;
        for c in 0..2 {
            x[c] += s / T::lit(6.0) * (k1[c] + T::lit(2.0) * (k2[c] + k3[c]) + k4[c]);
        }
    }
    Ok(FlowTrajectory { samples })
}

/// First point on the parameter ray `origin + s dir` (`s > 0`) with `R = r0`.
pub fn flow_start_on_ray<T: Real>(imm: &ParametricImmersion<T>, origin: (T, T), dir: (T, T), r0: T) -> Result<(T, T)> {
    let at = |s: T| (origin.0 + s * dir.0, origin.1 + s * dir.1);
    let f = |s: T| {
        let p = at(s);
        imm.radius(p.0, p.1) - r0
    };
    if f(T::zero()) >= T::zero() {
        return Err(Error::Invalid(format!("ray origin already outside radius {r0}")));
    }
    let mut lo = T::zero();
    let mut hi = T::lit(1e-3);
    while f(hi) < T::zero() {
        lo = hi;
        hi *= T::lit(2.0);
        if hi > T::lit(1e9) {
            return Err(Error::NoSignChange {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
    }
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    let p = at(hi);
    imm.check_domain(p.0, p.1)?;
    Ok(p)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowBoundCheck<T> {
    pub holds: bool,
    pub max_violation: T,
}

/// Pointwise `sin beta(t) <= h(r0)/h(t + r0) (sin beta(0) - c) + c`.
pub fn flow_bound_check<T: Real>(
    traj: &FlowTrajectory<T>,
    c: T,
    r0: T,
    h: &ComparisonProfile<T>,
    tol: T,
) -> FlowBoundCheck<T> {
    let s0 = traj.samples.first().map_or(T::zero(), |s| s.sin_beta);
    let h0 = h.h_at(r0);
    let max_violation = traj
        .samples
        .iter()
        .map(|s| s.sin_beta - (h0 / h.h_at(s.t + r0) * (s0 - c) + c))
        .fold(T::neg_infinity(), T::max);
    FlowBoundCheck {
        holds: max_violation <= tol,
        max_violation,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalScan<T> {
    pub min_grad: T,
    pub vertex: Option<usize>,
    pub u: T,
    pub v: T,
}

/// Smallest `|grad R|` over vertices outside `D_{r0}`.
pub fn critical_point_scan<T: Real>(mesh: &SampledSurface<T>, r0: T) -> CriticalScan<T> {
    let best = mesh
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| v.r > r0)
        .min_by(|a, b| a.1.grad_r.partial_cmp(&b.1.grad_r).unwrap_or(std::cmp::Ordering::Equal));
    match best {
        Some((k, v)) => CriticalScan {
            min_grad: v.grad_r,
            vertex: Some(k),
            u: v.u,
            v: v.v,
        },
        None => CriticalScan {
            min_grad: T::infinity(),
            vertex: None,
            u: T::nan(),
            v: T::nan(),
        },
    }
}

/// Unit parameter-space direction at `angle`, for flow start rays.
pub fn direction<T: Real>(angle: T) -> (T, T) {
    let (s, c) = angle.sin_cos();
    (c, s)
}
