//! Curvature integrals over extrinsic balls and annuli: total curvature and its
//! limit, geodesic curvature of extrinsic spheres, Gauss-Bonnet on annuli, the
//! Euler characteristic of mesh regions and the Chern-Osserman sandwich.

use std::collections::HashSet;

use serde::Serialize;

use crate::discretize::{edge_set, intrinsic_distance, region_area_level, region_integral, SampledSurface};
use crate::error::{Error, Result};
use crate::extrinsic::{
    level_set, nudged_radius, Crossing, GrowthCurve, GrowthFit, TamedVerdict, TamednessReport, POLE_RADIUS,
};
use crate::scalar::{dot, linear_fit, norm, Real};
use crate::surface::ParametricImmersion;

/// `|grad R|` below which a level is treated as critical.
pub const CRITICAL_GRAD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVerdict {
    Finite,
    MinusInfinity,
    PlusInfinity,
    Oscillating,
}

/// Behaviour of an exhaustion sequence `S(r_i)` such as `int_{D_r} K dA`.
#[derive(Debug, Clone, Serialize)]
pub struct ExhaustionLimit<T> {
    pub radii: Vec<T>,
    pub sequence: Vec<T>,
    pub verdict: LimitVerdict,
    /// Tail-corrected limit; present only for a finite verdict.
    pub extrapolated: Option<T>,
    /// Fitted `p` in `dS/dr ~ r^{-p}` over the tail (`inf` for a constant tail).
    pub decay_exponent: T,
}

/// Cauchy-tail test on the increments of `seq`: the increment density
/// `dS/dr` must decay faster than `1/r` for the limit to exist. The limit is the
/// average over the tail of each partial sum plus its power-law remainder.
pub fn exhaustion_limit<T: Real>(radii: &[T], seq: &[T]) -> Result<ExhaustionLimit<T>> {
    let n = radii.len();
    if n < 4 || seq.len() != n {
        return Err(Error::TooFewSamples {
            needed: 4,
            got: n.min(seq.len()),
        });
    }
    let scale = seq.iter().fold(T::one(), |m, s| m.max(s.abs()));
    let noise = T::lit(1e-9) * scale;
    let tail = (n - 1).div_ceil(2).max(3);
    let ks: Vec<usize> = (n - 1 - tail..n - 1).collect();
    let d: Vec<T> = ks.iter().map(|&k| seq[k + 1] - seq[k]).collect();
    let mid: Vec<T> = ks.iter().map(|&k| (radii[k] * radii[k + 1]).sqrt()).collect();
    let dens: Vec<T> = ks
        .iter()
        .zip(&d)
        .map(|(&k, &dk)| dk / (radii[k + 1] - radii[k]))
        .collect();

    let done = |verdict, extrapolated, decay_exponent| ExhaustionLimit {
        radii: radii.to_vec(),
        sequence: seq.to_vec(),
        verdict,
        extrapolated,
        decay_exponent,
    };
    if d.iter().all(|x| x.abs() <= noise) {
        let mean = ks.iter().map(|&k| seq[k + 1]).sum::<T>() / T::from_count(tail);
        return Ok(done(LimitVerdict::Finite, Some(mean), T::infinity()));
    }
    let (lx, ly): (Vec<T>, Vec<T>) = mid
        .iter()
        .zip(&dens)
        .zip(&d)
        .filter(|(_, dk)| dk.abs() > noise)
        .map(|((m, q), _)| (m.ln(), q.abs().ln()))
        .unzip();
    let p = if lx.len() >= 2 {
        -linear_fit(&lx, &ly).0
    } else {
        T::infinity()
    };
    if p > T::one() {
        let pm1 = (p - T::one()).max(T::lit(0.25));
        let pe = T::one() + pm1;
        let est: Vec<T> = ks
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let rn = radii[k + 1];
                seq[k + 1] + dens[i] * (mid[i] / rn).powf(pe) * rn / pm1
            })
            .collect();
        let mean = est.iter().copied().sum::<T>() / T::from_count(est.len());
        return Ok(done(LimitVerdict::Finite, Some(mean), p));
    }
    let verdict = if d.iter().all(|&x| x < T::zero()) {
        LimitVerdict::MinusInfinity
    } else if d.iter().all(|&x| x > T::zero()) {
        LimitVerdict::PlusInfinity
    } else {
        LimitVerdict::Oscillating
    };
    Ok(done(verdict, None, p))
}

/// Total curvature `lim int_{D_r} K dA` along the growth curve's radii.
pub fn total_curvature<T: Real>(growth: &GrowthCurve<T>) -> Result<ExhaustionLimit<T>> {
    exhaustion_limit(&growth.radii, &growth.curvature_integral)
}

/// `lim int_{D_r} |alpha|^2 dA`; the verdict is finite or plus infinity.
pub fn alpha_l2_integral<T: Real>(growth: &GrowthCurve<T>) -> Result<ExhaustionLimit<T>> {
    exhaustion_limit(&growth.radii, &growth.alpha_sq_integral)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WhiteCheck<T> {
    pub nearest_multiple: i64,
    pub residual: T,
}

/// Distance of `value` to the nearest integer multiple of `2 pi`.
pub fn white_multiple_check<T: Real>(value: T) -> WhiteCheck<T> {
    let k = (value / T::TAU()).round();
    WhiteCheck {
        nearest_multiple: k.to_i64().unwrap_or(0),
        residual: (value - T::TAU() * k).abs(),
    }
}

/// Quadratic-area and linear-perimeter verdicts read off a growth fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthVerdicts {
    pub quadratic_area: bool,
    pub linear_perimeter: bool,
}

pub fn growth_verdicts<T: Real>(fit: &GrowthFit<T>, tol: T) -> GrowthVerdicts {
    GrowthVerdicts {
        quadratic_area: fit.p_area <= T::lit(2.0) + tol,
        linear_perimeter: fit.q_perim <= T::one() + tol,
    }
}

/// Geodesic curvature of the extrinsic sphere through a point, with the
/// pointwise sandwich from `|<grad-perp rho, alpha(e, e)>| <= |grad-perp rho| |alpha|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KgSample<T> {
    pub u: T,
    pub v: T,
    /// `R` at the point.
    pub s: T,
    pub kg: T,
    pub grad_r: T,
    pub defect: T,
    pub alpha_norm: T,
    pub lower: T,
    pub upper: T,
}

/// `k_g = (1/|grad R|) (1/s + <grad-perp rho, alpha(e, e)>)` with `e` the unit
/// tangent of the level curve, `e ~ -R_v F_u + R_u F_v`.
pub fn geodesic_curvature_at<T: Real>(imm: &ParametricImmersion<T>, u: T, v: T) -> Result<KgSample<T>> {
    let geo = imm.point_geometry(u, v)?;
    let s = geo.radius();
    if !(s > T::lit(POLE_RADIUS)) {
        return Err(Error::PoleNeighborhood {
            u: u.as_f64(),
            v: v.as_f64(),
            r: s.as_f64(),
        });
    }
    let xhat: Vec<T> = geo.position.iter().map(|&x| x / s).collect();
    let (grad_r, defect) = geo.radial_split();
    let (a, b) = (-dot(&xhat, &geo.fv), dot(&xhat, &geo.fu));
    let len = (geo.g11 * a * a + T::lit(2.0) * geo.g12 * a * b + geo.g22 * b * b).sqrt();
    if !(grad_r > T::lit(CRITICAL_GRAD)) || !(len > T::zero()) {
        return Err(Error::CriticalPoint {
            u: u.as_f64(),
            v: v.as_f64(),
            grad: grad_r.as_f64(),
        });
    }
    let aee = geo.alpha_on(a / len, b / len);
    let kg = (T::one() / s + dot(&geo.radial_normal(), &aee)) / grad_r;
    let spread = s * defect * geo.alpha_norm;
    Ok(KgSample {
        u,
        v,
        s,
        kg,
        grad_r,
        defect,
        alpha_norm: geo.alpha_norm,
        lower: (T::one() - spread) / (s * grad_r),
        upper: (T::one() + spread) / (s * grad_r),
    })
}

/// Curve-based geodesic curvature at `pts[i]`: the circle through the points an
/// arclength `span` behind and ahead, projected on the inward conormal.
fn curve_kg<T: Real>(imm: &ParametricImmersion<T>, pts: &[Crossing<T>], closed: bool, i: usize, span: T) -> Option<T> {
    let n = pts.len();
    let walk = |forward: bool| -> Option<usize> {
        let mut k = i;
        let mut acc = T::zero();
        for _ in 0..n {
            let next = if forward {
                if k + 1 == n {
                    if !closed {
                        return None;
                    }
                    0
                } else {
                    k + 1
                }
            } else if k == 0 {
                if !closed {
                    return None;
                }
                n - 1
            } else {
                k - 1
            };
            acc += crate::scalar::dist(&pts[k].point, &pts[next].point);
            k = next;
            if acc >= span {
                return Some(k);
            }
        }
        None
    };
    let (j, k) = (walk(false)?, walk(true)?);
    if j == k || j == i || k == i {
        return None;
    }
    let p = &pts[i].point;
    let a: Vec<T> = pts[j].point.iter().zip(p).map(|(&x, &y)| x - y).collect();
    let c: Vec<T> = pts[k].point.iter().zip(p).map(|(&x, &y)| x - y).collect();
    let (aa, cc, ac) = (dot(&a, &a), dot(&c, &c), dot(&a, &c));
    let det = aa * cc - ac * ac;
    if !(det > T::zero()) {
        return Some(T::zero());
    }
    // circumcentre o = x a + y c with <o, a> = |a|^2/2, <o, c> = |c|^2/2
    let half = T::lit(0.5);
    let x = half * (aa * cc - cc * ac) / det;
    let y = half * (cc * aa - aa * ac) / det;
    let o: Vec<T> = a.iter().zip(&c).map(|(&p, &q)| x * p + y * q).collect();
    let o2 = dot(&o, &o);
    let geo = imm.point_geometry(pts[i].u, pts[i].v).ok()?;
    let s = geo.radius();
    let xhat: Vec<T> = geo.position.iter().map(|&v| v / s).collect();
    let grad = geo.tangent_part(&xhat);
    let g = norm(&grad);
    Some(-dot(&o, &grad) / (o2 * g))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KgCrossCheck<T> {
    pub u: T,
    pub v: T,
    pub formula: T,
    pub curve: T,
    /// `|formula - curve| / max(|formula|, 1/s)`.
    pub relative_difference: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct KgLevel<T> {
    pub requested: T,
    pub r: T,
    pub samples: Vec<KgSample<T>>,
    pub checks: Vec<KgCrossCheck<T>>,
    pub max_relative_difference: T,
    /// `int_{dD_r} k_g dL` over every component.
    pub integral: T,
    pub length: T,
    pub components: usize,
}

/// Geodesic curvature along `dD_r`. `samples` evenly spaced crossings are
/// reported (all when zero or larger than the level set) and every tenth of
/// them is cross-checked against the curve-based evaluation.
pub fn geodesic_curvature_level<T: Real>(mesh: &SampledSurface<T>, r: T, samples: usize) -> Result<KgLevel<T>> {
    let imm = &mesh.immersion;
    let ls = level_set(mesh, r);
    if ls.polylines.is_empty() {
        return Err(Error::Invalid(format!("level set R = {r} is empty on this mesh")));
    }
    let mut all: Vec<(usize, usize, KgSample<T>)> = Vec::new();
    for (pi, pl) in ls.polylines.iter().enumerate() {
        for (k, x) in pl.points.iter().enumerate() {
            all.push((pi, k, geodesic_curvature_at(imm, x.u, x.v)?));
        }
    }
    let mut cursor = 0;
    let integral = ls.line_integral(|_| {
        let kg = all[cursor].2.kg;
        cursor += 1;
        Ok(kg)
    })?;
    let total = all.len();
    let take = if samples == 0 || samples >= total {
        total
    } else {
        samples
    };
    let picked: Vec<usize> = (0..take).map(|k| k * total / take).collect();
    let mut checks = Vec::new();
    let check_every = 10usize;
    for (n, &idx) in picked.iter().enumerate() {
        if n % check_every != 0 {
            continue;
        }
        let (pi, k, smp) = all[idx];
        let pl = &ls.polylines[pi];
        let segs = pl.points.len().max(2);
        let span = T::lit(3.0) * pl.length / T::from_count(segs);
        if let Some(curve) = curve_kg(imm, &pl.points, pl.closed, k, span) {
            let denom = smp.kg.abs().max(T::one() / smp.s);
            checks.push(KgCrossCheck {
                u: smp.u,
                v: smp.v,
                formula: smp.kg,
                curve,
                relative_difference: (smp.kg - curve).abs() / denom,
            });
        }
    }
    let max_relative_difference = checks.iter().map(|c| c.relative_difference).fold(T::zero(), T::max);
    Ok(KgLevel {
        requested: ls.requested,
        r: ls.r,
        samples: picked.iter().map(|&k| all[k].2).collect(),
        checks,
        max_relative_difference,
        integral,
        length: ls.total_length,
        components: ls.polylines.len(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KgSandwich<T> {
    pub r: T,
    pub c: T,
    pub lambda_c: T,
    pub holds: bool,
    /// Smallest `k_g - lower` over the level set.
    pub lower_margin: T,
    /// Smallest `upper - k_g` over the level set.
    pub upper_margin: T,
    pub samples: usize,
}

/// Checks `(1 - c Lambda_c)/t <= k_g <= (1/t)(1 + c Lambda_c)/sqrt(1 - Lambda_c^2)` at
/// every crossing of `dD_r`, with `Lambda_c = delta(r) + c`.
pub fn kg_sandwich_check<T: Real, D: Fn(T) -> T>(
    mesh: &SampledSurface<T>,
    r: T,
    c: T,
    delta: D,
) -> Result<KgSandwich<T>> {
    let lam = crate::comparison::lambda_c(c, &delta, r);
    if !lam.regime_entered {
        return Err(Error::RegimeNotEntered {
            lambda_c: lam.value.as_f64(),
        });
    }
    let level = geodesic_curvature_level(mesh, r, 0)?;
    let l = lam.value;
    let mut lower_margin = T::infinity();
    let mut upper_margin = T::infinity();
    for smp in &level.samples {
        let lo = (T::one() - c * l) / smp.s;
        let hi = (T::one() + c * l) / (smp.s * (T::one() - l * l).sqrt());
        lower_margin = lower_margin.min(smp.kg - lo);
        upper_margin = upper_margin.min(hi - smp.kg);
    }
    Ok(KgSandwich {
        r: level.r,
        c,
        lambda_c: l,
        holds: lower_margin >= T::zero() && upper_margin >= T::zero(),
        lower_margin,
        upper_margin,
        samples: level.samples.len(),
    })
}

/// `V - E + F` of the sub-complex formed by the selected triangles.
pub fn euler_characteristic<T: Real, P: Fn(usize) -> bool>(mesh: &SampledSurface<T>, select: P) -> Result<i64> {
    let tris: Vec<[usize; 3]> = (0..mesh.triangles.len())
        .filter(|&k| select(k))
        .map(|k| mesh.triangles[k])
        .collect();
    if tris.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let verts: HashSet<usize> = tris.iter().flatten().copied().collect();
    let edges = edge_set(&tris).len();
    Ok(verts.len() as i64 - edges as i64 + tris.len() as i64)
}

/// Triangles whose mean vertex radius lies in `[lo, hi)`.
pub fn band_selector<T: Real>(mesh: &SampledSurface<T>, lo: T, hi: T) -> impl Fn(usize) -> bool + '_ {
    let third = T::one() / T::lit(3.0);
    move |k| {
        let t = mesh.triangles[k];
        let m = third * (mesh.vertices[t[0]].r + mesh.vertices[t[1]].r + mesh.vertices[t[2]].r);
        m >= lo && m < hi
    }
}

/// Gauss-Bonnet bookkeeping on `A = D_{r2} \ D_{r1}` (`r1 = 0` gives the ball).
#[derive(Debug, Clone, Serialize)]
pub struct AnnulusReport<T> {
    pub r1: T,
    pub r2: T,
    pub curvature_integral: T,
    /// `int_{dD_r1} k_g dL` (zero for a ball).
    pub kg_inner: T,
    pub kg_outer: T,
    /// `|int_A K - kg_inner + kg_outer - 2 pi chi|` with `chi` the expected value.
    pub gb_residual: T,
    /// `V - E + F` of the mesh region.
    pub euler_char: i64,
    /// `chi` used in the residual: zero for an annulus free of critical points,
    /// the mesh value otherwise.
    pub expected_chi: i64,
    /// A vertex in the band has `|grad R|` below the critical threshold.
    pub critical: bool,
    pub chi_mismatch: bool,
}

pub fn gauss_bonnet_annulus<T: Real>(mesh: &SampledSurface<T>, r1: T, r2: T) -> Result<AnnulusReport<T>> {
    if !(r1 >= T::zero() && r1 < r2) {
        return Err(Error::EmptyRange {
            from: r1.as_f64(),
            to: r2.as_f64(),
        });
    }
    let safe = mesh.safe_radius();
    if r2 > safe {
        return Err(Error::WindowTruncation {
            requested: r2.as_f64(),
            safe_radius: safe.as_f64(),
            safe: None,
        });
    }
    let k: Vec<T> = mesh.vertices.iter().map(|v| v.geom.k).collect();
    let ball = |r: T| -> Result<(T, T, T)> {
        let level = geodesic_curvature_level(mesh, r, 1)?;
        let phi: Vec<T> = mesh.vertices.iter().map(|v| v.r - level.r).collect();
        Ok((level.r, region_integral(mesh, &phi, &k), level.integral))
    };
    let (r2n, k2, kg_outer) = ball(r2)?;
    let (r1n, k1, kg_inner) = if r1 > T::zero() {
        ball(r1)?
    } else {
        (T::zero(), T::zero(), T::zero())
    };
    let lo = if r1 > T::zero() { r1n } else { T::neg_infinity() };
    let euler_char = euler_characteristic(mesh, band_selector(mesh, lo, r2n))?;
    let critical = mesh
        .vertices
        .iter()
        .any(|v| v.r > r1n && v.r < r2n && v.grad_r < T::lit(CRITICAL_GRAD));
    let expected_chi = if r1 > T::zero() && !critical { 0 } else { euler_char };
    let curvature_integral = k2 - k1;
    let gb_residual = (curvature_integral - kg_inner + kg_outer - T::TAU() * T::lit(expected_chi as f64)).abs();
    Ok(AnnulusReport {
        r1: r1n,
        r2: r2n,
        curvature_integral,
        kg_inner,
        kg_outer,
        gb_residual,
        euler_char,
        expected_chi,
        critical,
        chi_mismatch: euler_char != expected_chi,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ChernOssermanOptions<T> {
    /// Relative slack on both sides of the sandwich.
    pub slack: T,
    /// Fraction of the radius grid treated as the tail.
    pub tail_fraction: T,
    /// Relative tolerance for the intrinsic-ball limit against `middle`.
    pub shiohama_tolerance: T,
}

impl<T: Real> Default for ChernOssermanOptions<T> {
    fn default() -> Self {
        Self {
            slack: T::lit(0.05),
            tail_fraction: T::lit(0.5),
            shiohama_tolerance: T::lit(0.1),
        }
    }
}

/// `lower <= middle <= upper` where `upper` is the measured tail of
/// `A(D_t)/(t^2/2)`, twice the constant `C_1` of `A(D_r) <= C_1 r^2`.
#[derive(Debug, Clone, Serialize)]
pub struct ChernOssermanReport<T> {
    pub chi: i64,
    /// `V - E + F` of the mesh region `D_r` at the largest radius.
    pub chi_mesh: i64,
    pub total_curvature: T,
    pub middle: T,
    pub lower: T,
    pub upper: T,
    pub shiohama: T,
    pub white_nearest: i64,
    pub white_residual: T,
    pub slack: T,
    pub a_estimate: T,
    /// Tail minimum of `L(dD_t)/t`.
    pub c0_tilde: T,
    pub holds: bool,
    pub shiohama_holds: bool,
    pub ends: usize,
}

/// Intrinsic-ball ratios `A(B_t)/(t^2/2)` for the radii whose ball stays inside
/// the mesh; graph distances from the vertex nearest the origin.
pub fn shiohama_ratios<T: Real>(mesh: &SampledSurface<T>, radii: &[T]) -> Result<Vec<(T, T)>> {
    let rho = intrinsic_distance(mesh, mesh.base_vertex())?.rho;
    let reach = mesh
        .boundary_vertices()
        .iter()
        .map(|&k| rho[k])
        .fold(T::infinity(), T::min);
    Ok(radii
        .iter()
        .filter(|&&t| t < reach)
        .map(|&t| {
            let phi: Vec<T> = rho.iter().map(|&d| d - t).collect();
            (t, region_area_level(mesh, &phi) / (T::lit(0.5) * t * t))
        })
        .collect())
}

/// Verifies the Chern-Osserman sandwich. Refuses unless the tamed verdict is
/// `tamed` and the total curvature is finite.
pub fn chern_osserman_check<T: Real>(
    mesh: &SampledSurface<T>,
    chi: i64,
    growth: &GrowthCurve<T>,
    tamed: &TamednessReport<T>,
    opts: ChernOssermanOptions<T>,
) -> Result<ChernOssermanReport<T>> {
    if tamed.verdict != TamedVerdict::Tamed {
        return Err(Error::Hypothesis {
            hypothesis: "tamed second fundamental form",
            detail: format!("verdict {:?} with a_estimate {}", tamed.verdict, tamed.a_estimate),
        });
    }
    let tc = total_curvature(growth)?;
    let total = match (tc.verdict, tc.extrapolated) {
        (LimitVerdict::Finite, Some(v)) => v,
        (v, _) => {
            return Err(Error::Hypothesis {
                hypothesis: "finite total curvature",
                detail: format!("total curvature verdict {v:?}"),
            })
        }
    };
    let n = growth.len();
    let tail = (opts.tail_fraction * T::from_count(n))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, n);
    let c0_tilde = (n - tail..n)
        .map(|k| growth.perimeter[k] / growth.radii[k])
        .fold(T::infinity(), T::min);
    let a = tamed.a_estimate;
    let lower = (T::one() - a * a) * c0_tilde;
    let t_last = growth.radii[n - 1];
    let upper = growth.area[n - 1] / (T::lit(0.5) * t_last * t_last);
    let middle = T::TAU() * T::lit(chi as f64) - total;
    let ratios = shiohama_ratios(mesh, &growth.radii)?;
    let shiohama = ratios.last().map_or(T::nan(), |&(_, q)| q);
    let chi_mesh = euler_characteristic(
        mesh,
        band_selector(mesh, T::neg_infinity(), nudged_radius(mesh, t_last)),
    )?;
    let white = white_multiple_check(total);
    let one = T::one();
    Ok(ChernOssermanReport {
        chi,
        chi_mesh,
        total_curvature: total,
        middle,
        lower,
        upper,
        shiohama,
        white_nearest: white.nearest_multiple,
        white_residual: white.residual,
        slack: opts.slack,
        a_estimate: a,
        c0_tilde,
        holds: lower <= middle * (one + opts.slack) && middle <= upper * (one + opts.slack),
        shiohama_holds: (shiohama - middle).abs() <= opts.shiohama_tolerance * middle.abs(),
        ends: growth.level_components[n - 1],
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, TAU};

    use super::*;
    use crate::discretize::triangulate;
    use crate::surface::Window;

    fn seq(radii: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        radii.iter().map(|&r| f(r)).collect()
    }

    #[test]
    fn limit_verdicts_on_model_sequences() {
        let radii: Vec<f64> = (1..=8).map(|k| 4.0 * k as f64).collect();
        let fin = exhaustion_limit(&radii, &seq(&radii, |r| -4.0 * PI * (1.0 - 0.5 / (r * r)))).unwrap();
        assert_eq!(fin.verdict, LimitVerdict::Finite);
        assert!((fin.extrapolated.unwrap() / (-4.0 * PI) - 1.0).abs() < 1e-4);
        assert!((fin.decay_exponent - 3.0).abs() < 0.2);
        let slow = exhaustion_limit(&radii, &seq(&radii, |r| 5.0 - 2.0 / r.sqrt())).unwrap();
        assert_eq!(slow.verdict, LimitVerdict::Finite);
        assert!((slow.extrapolated.unwrap() - 5.0).abs() < 0.05);
        let down = exhaustion_limit(&radii, &seq(&radii, |r| -4.0 * r)).unwrap();
        assert_eq!(down.verdict, LimitVerdict::MinusInfinity);
        let up = exhaustion_limit(&radii, &seq(&radii, |r| r.ln())).unwrap();
        assert_eq!(up.verdict, LimitVerdict::PlusInfinity);
        let osc = exhaustion_limit(&radii, &seq(&radii, |r| r * (r / 3.0).sin())).unwrap();
        assert_eq!(osc.verdict, LimitVerdict::Oscillating);
        let flat = exhaustion_limit(&radii, &[0.0; 8]).unwrap();
        assert_eq!((flat.verdict, flat.extrapolated), (LimitVerdict::Finite, Some(0.0)));
        assert!(exhaustion_limit(&radii[..3], &[0.0; 3]).is_err());
    }

    #[test]
    fn white_arithmetic() {
        let w = white_multiple_check(-4.0 * PI * 1.001);
        assert_eq!(w.nearest_multiple, -2);
        assert!((w.residual - 0.004 * PI).abs() < 1e-12);
        let z = white_multiple_check(0.0f64);
        assert_eq!((z.nearest_multiple, z.residual), (0, 0.0));
    }

    #[test]
    fn plane_circle_curvature() {
        let m = triangulate(&ParametricImmersion::<f64>::plane(), Window::square(3.0), 128, 128).unwrap();
        let lv = geodesic_curvature_level(&m, 2.0, 40).unwrap();
        assert!(lv.samples.iter().all(|s| (s.kg - 0.5).abs() < 1e-12));
        assert!(!lv.checks.is_empty() && lv.max_relative_difference < 0.03);
        assert!((lv.integral - TAU).abs() < 1e-3);
    }

    #[test]
    fn catenoid_end_curvature_near_reciprocal_radius() {
        let imm = ParametricImmersion::<f64>::catenoid();
        let m = triangulate(&imm, Window::new(0.0, TAU, -3.5, 3.5), 256, 256).unwrap();
        let lv = geodesic_curvature_level(&m, 10.0, 200).unwrap();
        assert_eq!(lv.components, 2);
        assert!(lv.samples.iter().all(|s| (s.kg * 10.0 - 1.0).abs() < 0.05));
        assert!(lv.max_relative_difference < 0.03, "{}", lv.max_relative_difference);
    }

    #[test]
    fn paraboloid_pointwise_sandwich() {
        let imm = ParametricImmersion::<f64>::paraboloid();
        let m = triangulate(&imm, Window::square(4.0), 192, 192).unwrap();
        let lv = geodesic_curvature_level(&m, 6.0, 0).unwrap();
        for s in &lv.samples {
            assert!(s.lower <= s.kg + 1e-12 && s.kg <= s.upper + 1e-12);
        }
        assert!(lv.max_relative_difference < 0.03);
    }

    #[test]
    fn plane_sandwich_arithmetic() {
        let m = triangulate(&ParametricImmersion::<f64>::plane(), Window::square(7.0), 128, 128).unwrap();
        let sw = kg_sandwich_check(&m, 5.0, 0.1, |_| 0.0).unwrap();
        assert!(sw.holds);
        assert!((sw.lower_margin - (0.2 - 0.99 / 5.0)).abs() < 1e-9);
        assert!(matches!(
            kg_sandwich_check(&m, 5.0, 0.9, |_| 0.2),
            Err(Error::RegimeNotEntered { .. })
        ));
    }

    #[test]
    fn euler_characteristics_of_plane_regions() {
        let m = triangulate(&ParametricImmersion::<f64>::plane(), Window::square(3.0), 96, 96).unwrap();
        assert_eq!(
            euler_characteristic(&m, band_selector(&m, f64::NEG_INFINITY, 2.0)).unwrap(),
            1
        );
        assert_eq!(euler_characteristic(&m, band_selector(&m, 1.0, 2.0)).unwrap(), 0);
        assert!(matches!(
            euler_characteristic(&m, band_selector(&m, 10.0, 11.0)),
            Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn plane_annulus_gauss_bonnet() {
        let m = triangulate(&ParametricImmersion::<f64>::plane(), Window::square(3.0), 128, 128).unwrap();
        let a = gauss_bonnet_annulus(&m, 1.0, 2.0).unwrap();
        assert!(a.curvature_integral.abs() < 1e-12);
        assert!((a.kg_inner - TAU).abs() < 1e-2 && (a.kg_outer - TAU).abs() < 1e-2);
        assert!(a.gb_residual < 1e-2);
        assert_eq!((a.euler_char, a.expected_chi, a.critical), (0, 0, false));
        let d = gauss_bonnet_annulus(&m, 0.0, 2.0).unwrap();
        assert_eq!(d.euler_char, 1);
        assert!(d.gb_residual < 1e-2);
    }

    #[test]
    fn catenoid_band_gauss_bonnet() {
        let imm = ParametricImmersion::<f64>::catenoid();
        let m = triangulate(&imm, Window::new(0.0, TAU, -3.6, 3.6), 256, 256).unwrap();
        let a = gauss_bonnet_annulus(&m, 3.0, 12.0).unwrap();
        let vr = |r: f64| {
            let mut v: f64 = r.ln() + 0.5;
            for _ in 0..80 {
                v -= (v.cosh().powi(2) + v * v - r * r) / (2.0 * v.cosh() * v.sinh() + 2.0 * v);
            }
            v
        };
        let exact = -4.0 * PI * (vr(a.r2).tanh() - vr(a.r1).tanh());
        assert!((a.curvature_integral - exact).abs() < 2e-2);
        assert!(a.gb_residual < 2e-2, "{a:?}");
        assert_eq!(a.euler_char, 0);
    }

    #[test]
    fn sphere_zone_gauss_bonnet() {
        let imm = ParametricImmersion::<f64>::sphere(1.0, [0.0, 0.0, 1.0]);
        let m = triangulate(&imm, imm.domain, 256, 256).unwrap();
        let a = gauss_bonnet_annulus(&m, 0.6, 1.5).unwrap();
        // zone between heights z1 < z2 on the unit sphere has area 2 pi (z2 - z1); R^2 = 2 z
        let zone = TAU * (a.r2 * a.r2 - a.r1 * a.r1) / 2.0;
        assert!((a.curvature_integral - zone).abs() < 2e-2);
        assert!(a.gb_residual < 2e-2, "{a:?}");
        assert_eq!(a.euler_char, 0);
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn white_residual_is_distance_to_the_lattice(x in -1e3..1e3f64) {
            let w = white_multiple_check(x);
            prop_assert!(w.residual <= std::f64::consts::PI + 1e-12);
            prop_assert!((w.residual - (x - std::f64::consts::TAU * w.nearest_multiple as f64).abs()).abs() < 1e-9);
        }
    }
}
