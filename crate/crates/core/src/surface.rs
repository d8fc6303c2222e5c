//! Closed-form parametric immersions and their pointwise extrinsic geometry.
//!
//! Every quantity is frame-free: the second fundamental form is obtained by
//! projecting second derivatives onto the orthogonal complement of the tangent
//! plane, which works unchanged in any codimension.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, norm, Real};

/// Parameter rectangle `[u0, u1] x [v0, v1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub u0: T,
    pub u1: T,
    pub v0: T,
    pub v1: T,
}

impl<T: Real> Window<T> {
    pub fn new(u0: T, u1: T, v0: T, v1: T) -> Self {
        Self { u0, u1, v0, v1 }
    }

    pub fn square(half: T) -> Self {
        Self::new(-half, half, -half, half)
    }

    pub fn contains(&self, u: T, v: T) -> bool {
        u >= self.u0 && u <= self.u1 && v >= self.v0 && v <= self.v1
    }

    pub fn width(&self) -> T {
        self.u1 - self.u0
    }

    pub fn height(&self) -> T {
        self.v1 - self.v0
    }
}

pub type HeightFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// The catalog shapes.
#[derive(Clone)]
pub enum SurfaceKind<T> {
    Plane,
    Catenoid,
    Helicoid { c: T },
    Enneper,
    Sphere { radius: T, center: [T; 3] },
    Paraboloid,
    HyperboloidSheet { c: T },
    Graph { label: String, f: HeightFn<T> },
}

impl<T: fmt::Debug> fmt::Debug for SurfaceKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Plane => write!(f, "Plane"),
            Self::Catenoid => write!(f, "Catenoid"),
            Self::Helicoid { c } => write!(f, "Helicoid({c:?})"),
            Self::Enneper => write!(f, "Enneper"),
            Self::Sphere { radius, center } => write!(f, "Sphere({radius:?}, {center:?})"),
            Self::Paraboloid => write!(f, "Paraboloid"),
            Self::HyperboloidSheet { c } => write!(f, "HyperboloidSheet({c:?})"),
            Self::Graph { label, .. } => write!(f, "Graph({label})"),
        }
    }
}

/// Proper rigid motion applied to the first three ambient coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion<T> {
    pub rotation: [[T; 3]; 3],
    pub translation: [T; 3],
}

impl<T: Real> RigidMotion<T> {
    /// Rotation by `angle` about the unit `axis` (Rodrigues), then translation.
    pub fn axis_angle(axis: [T; 3], angle: T, translation: [T; 3]) -> Self {
        let n = norm(&axis);
        let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
        let (s, c) = angle.sin_cos();
        let t = T::one() - c;
        Self {
            rotation: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
            translation,
        }
    }

    fn rotate(&self, p: &mut [T]) {
        let q = [p[0], p[1], p[2]];
        for (i, row) in self.rotation.iter().enumerate() {
            p[i] = row[0] * q[0] + row[1] * q[1] + row[2] * q[2];
        }
    }
}

/// Position and derivatives up to order two at one parameter point.
#[derive(Debug, Clone)]
pub struct Jet<T> {
    pub p: Vec<T>,
    pub fu: Vec<T>,
    pub fv: Vec<T>,
    pub fuu: Vec<T>,
    pub fuv: Vec<T>,
    pub fvv: Vec<T>,
}

/// A chart `F: (u, v) -> R^n` with derivative oracles.
#[derive(Debug, Clone)]
pub struct ParametricImmersion<T> {
    pub name: String,
    pub kind: SurfaceKind<T>,
    pub ambient_dim: usize,
    pub domain: Window<T>,
    /// The chart is `2 pi`-periodic in `u`.
    pub u_periodic: bool,
    pub motion: Option<RigidMotion<T>>,
    /// When set, all derivatives come from central differences with this step.
    pub fd_step: Option<T>,
}

/// Offset used to keep sphere charts off their coordinate poles.
pub const SPHERE_POLE_MARGIN: f64 = 1e-6;

impl<T: Real> ParametricImmersion<T> {
    fn build(name: impl Into<String>, kind: SurfaceKind<T>, domain: Window<T>, u_periodic: bool) -> Self {
        Self {
            name: name.into(),
            kind,
            ambient_dim: 3,
            domain,
            u_periodic,
            motion: None,
            fd_step: None,
        }
    }

    fn unbounded() -> Window<T> {
        let inf = T::infinity();
        Window::new(-inf, inf, -inf, inf)
    }

    fn periodic_strip() -> Window<T> {
        let inf = T::infinity();
        Window::new(T::zero(), T::TAU(), -inf, inf)
    }

    pub fn plane() -> Self {
        Self::build("plane", SurfaceKind::Plane, Self::unbounded(), false)
    }

    pub fn catenoid() -> Self {
        Self::build("catenoid", SurfaceKind::Catenoid, Self::periodic_strip(), true)
    }

    pub fn helicoid(c: T) -> Self {
        Self::build(
            format!("helicoid({c})"),
            SurfaceKind::Helicoid { c },
            Self::unbounded(),
            false,
        )
    }

    pub fn enneper() -> Self {
        Self::build("enneper", SurfaceKind::Enneper, Self::unbounded(), false)
    }

    /// Round sphere `center + a (cos v cos u, cos v sin u, sin v)`.
    pub fn sphere(radius: T, center: [T; 3]) -> Self {
        let half = T::FRAC_PI_2() - T::lit(SPHERE_POLE_MARGIN);
        Self::build(
            format!("sphere({radius})"),
            SurfaceKind::Sphere { radius, center },
            Window::new(T::zero(), T::TAU(), -half, half),
            true,
        )
    }

    pub fn paraboloid() -> Self {
        Self::build("paraboloid", SurfaceKind::Paraboloid, Self::unbounded(), false)
    }

    pub fn hyperboloid_sheet(c: T) -> Self {
        Self::build(
            format!("hyperboloid_sheet({c})"),
            SurfaceKind::HyperboloidSheet { c },
            Self::unbounded(),
            false,
        )
    }

    /// Graph `(u, v, f(u, v))`; derivatives by central differences.
    pub fn graph(label: impl Into<String>, f: HeightFn<T>, fd_step: T) -> Self {
        let label = label.into();
        let mut imm = Self::build(
            format!("graph({label})"),
            SurfaceKind::Graph { label, f },
            Self::unbounded(),
            false,
        );
        imm.fd_step = Some(fd_step);
        imm
    }

    /// Appends zero coordinates so the image lives in `R^n`.
    pub fn in_dimension(mut self, n: usize) -> Self {
        assert!(n >= 3, "ambient dimension must be at least 3");
        self.ambient_dim = n;
        self
    }

    pub fn with_motion(mut self, motion: RigidMotion<T>) -> Self {
        self.motion = Some(motion);
        self
    }

    /// Forces finite-difference derivatives even where closed forms exist.
    pub fn with_finite_differences(mut self, step: T) -> Self {
        self.fd_step = Some(step);
        self
    }

    /// Surfaces whose second fundamental form has vanishing trace.
    pub fn is_minimal(&self) -> bool {
        matches!(
            self.kind,
            SurfaceKind::Plane | SurfaceKind::Catenoid | SurfaceKind::Helicoid { .. } | SurfaceKind::Enneper
        )
    }

    pub fn check_domain(&self, u: T, v: T) -> Result<()> {
        let d = &self.domain;
        let u_ok = self.u_periodic || (u >= d.u0 && u <= d.u1);
        if u_ok && v >= d.v0 && v <= d.v1 && u.is_finite() && v.is_finite() {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                surface: self.name.clone(),
                u: u.as_f64(),
                v: v.as_f64(),
            })
        }
    }

    fn raw_position(&self, u: T, v: T) -> [T; 3] {
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        match &self.kind {
            SurfaceKind::Plane => [u, v, T::zero()],
            SurfaceKind::Catenoid => {
                let ch = v.cosh();
                [ch * u.cos(), ch * u.sin(), v]
            }
            SurfaceKind::Helicoid { c } => [v * u.cos(), v * u.sin(), *c * u],
            SurfaceKind::Enneper => [
                u - u * u * u / three + u * v * v,
                -v + v * v * v / three - u * u * v,
                u * u - v * v,
            ],
            SurfaceKind::Sphere { radius, center } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                [
                    center[0] + *radius * cv * cu,
                    center[1] + *radius * cv * su,
                    center[2] + *radius * sv,
                ]
            }
            SurfaceKind::Paraboloid => [u, v, (u * u + v * v) / two],
            SurfaceKind::HyperboloidSheet { c } => [u, v, *c * (T::one() + u * u + v * v).sqrt()],
            SurfaceKind::Graph { f, .. } => [u, v, f(u, v)],
        }
    }

    /// Closed-form `[p, fu, fv, fuu, fuv, fvv]` in `R^3`, before any rigid motion.
    fn raw_jet(&self, u: T, v: T) -> [[T; 3]; 6] {
        let z = T::zero();
        let one = T::one();
        let two = T::lit(2.0);
        let p = self.raw_position(u, v);
        match &self.kind {
            SurfaceKind::Plane => [p, [one, z, z], [z, one, z], [z; 3], [z; 3], [z; 3]],
            SurfaceKind::Catenoid => {
                let (ch, sh) = (v.cosh(), v.sinh());
                let (su, cu) = u.sin_cos();
                [
                    p,
                    [-ch * su, ch * cu, z],
                    [sh * cu, sh * su, one],
                    [-ch * cu, -ch * su, z],
                    [-sh * su, sh * cu, z],
                    [ch * cu, ch * su, z],
                ]
            }
            SurfaceKind::Helicoid { c } => {
                let (su, cu) = u.sin_cos();
                [
                    p,
                    [-v * su, v * cu, *c],
                    [cu, su, z],
                    [-v * cu, -v * su, z],
                    [-su, cu, z],
                    [z; 3],
                ]
            }
            SurfaceKind::Enneper => [
                p,
                [one - u * u + v * v, -two * u * v, two * u],
                [two * u * v, -one + v * v - u * u, -two * v],
                [-two * u, -two * v, two],
                [two * v, -two * u, z],
                [two * u, two * v, -two],
            ],
            SurfaceKind::Sphere { radius: a, .. } => {
                let a = *a;
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                [
                    p,
                    [-a * cv * su, a * cv * cu, z],
                    [-a * sv * cu, -a * sv * su, a * cv],
                    [-a * cv * cu, -a * cv * su, z],
                    [a * sv * su, -a * sv * cu, z],
                    [-a * cv * cu, -a * cv * su, -a * sv],
                ]
            }
            SurfaceKind::Paraboloid => [p, [one, z, u], [z, one, v], [z, z, one], [z; 3], [z, z, one]],
            SurfaceKind::HyperboloidSheet { c } => {
                let c = *c;
                let s2 = one + u * u + v * v;
                let s = s2.sqrt();
                let s3 = s2 * s;
                [
                    p,
                    [one, z, c * u / s],
                    [z, one, c * v / s],
                    [z, z, c * (one + v * v) / s3],
                    [z, z, -c * u * v / s3],
                    [z, z, c * (one + u * u) / s3],
                ]
            }
            SurfaceKind::Graph { .. } => {
                // only reached through the finite-difference path
                self.fd_jet3(u, v, T::lit(1e-4))
            }
        }
    }

    fn fd_jet3(&self, u: T, v: T, h: T) -> [[T; 3]; 6] {
        let f = |a, b| self.raw_position(a, b);
        let p = f(u, v);
        let (pe, pw, pn, ps) = (f(u + h, v), f(u - h, v), f(u, v + h), f(u, v - h));
        let (ne, nw, se, sw) = (f(u + h, v + h), f(u - h, v + h), f(u + h, v - h), f(u - h, v - h));
        let two = T::lit(2.0);
        let mut out = [[T::zero(); 3]; 6];
        out[0] = p;
        for k in 0..3 {
            out[1][k] = (pe[k] - pw[k]) / (two * h);
            out[2][k] = (pn[k] - ps[k]) / (two * h);
            out[3][k] = (pe[k] - two * p[k] + pw[k]) / (h * h);
            out[4][k] = (ne[k] - nw[k] - se[k] + sw[k]) / (T::lit(4.0) * h * h);
            out[5][k] = (pn[k] - two * p[k] + ps[k]) / (h * h);
        }
        out
    }

    fn lift(&self, x: [T; 3], translate: bool) -> Vec<T> {
        let mut out = vec![T::zero(); self.ambient_dim];
        out[..3].copy_from_slice(&x);
        if let Some(m) = &self.motion {
            m.rotate(&mut out);
            if translate {
                for (o, t) in out.iter_mut().zip(m.translation) {
                    *o += t;
                }
            }
        }
        out
    }

    /// `F(u, v)` without a domain check.
    pub fn position(&self, u: T, v: T) -> Vec<T> {
        self.lift(self.raw_position(u, v), true)
    }

    /// `F(u, v)`.
    pub fn eval(&self, u: T, v: T) -> Result<Vec<T>> {
        self.check_domain(u, v)?;
        Ok(self.position(u, v))
    }

    /// Extrinsic distance `|F(u, v)|` to the ambient origin.
    pub fn radius(&self, u: T, v: T) -> T {
        norm(&self.position(u, v))
    }

    pub fn jet(&self, u: T, v: T) -> Result<Jet<T>> {
        self.check_domain(u, v)?;
        let raw = match self.fd_step {
            Some(h) => self.fd_jet3(u, v, h),
            None => self.raw_jet(u, v),
        };
        Ok(Jet {
            p: self.lift(raw[0], true),
            fu: self.lift(raw[1], false),
            fv: self.lift(raw[2], false),
            fuu: self.lift(raw[3], false),
            fuv: self.lift(raw[4], false),
            fvv: self.lift(raw[5], false),
        })
    }

    /// Parameter point whose image is nearest the ambient origin.
    pub fn basepoint(&self) -> (T, T) {
        if self.motion.is_none() {
            match self.kind {
                SurfaceKind::Plane
                | SurfaceKind::Catenoid
                | SurfaceKind::Helicoid { .. }
                | SurfaceKind::Enneper
                | SurfaceKind::Paraboloid
                | SurfaceKind::HyperboloidSheet { .. } => return (T::zero(), T::zero()),
                _ => {}
            }
        }
        self.nearest_point_search()
    }

    fn nearest_point_search(&self) -> (T, T) {
        let span = T::lit(10.0);
        let d = &self.domain;
        let mut lo = [d.u0.max(-span), d.v0.max(-span)];
        let mut hi = [d.u1.min(span), d.v1.min(span)];
        let mut best = (lo[0], lo[1]);
        let n = 64;
        for _ in 0..12 {
            let mut best_r = T::infinity();
            for i in 0..=n {
                for j in 0..=n {
                    let u = lo[0] + (hi[0] - lo[0]) * T::from_count(i) / T::from_count(n);
                    let v = lo[1] + (hi[1] - lo[1]) * T::from_count(j) / T::from_count(n);
                    let r = self.radius(u, v);
                    if r < best_r {
                        best_r = r;
                        best = (u, v);
                    }
                }
            }
            let du = (hi[0] - lo[0]) / T::from_count(n) * T::lit(2.0);
            let dv = (hi[1] - lo[1]) / T::from_count(n) * T::lit(2.0);
            lo = [(best.0 - du).max(d.u0), (best.1 - dv).max(d.v0)];
            hi = [(best.0 + du).min(d.u1), (best.1 + dv).min(d.v1)];
        }
        best
    }

    pub fn point_geometry(&self, u: T, v: T) -> Result<PointGeometry<T>> {
        PointGeometry::from_jet(&self.jet(u, v)?, u, v)
    }
}

/// Pointwise extrinsic geometry. `h` uses the mean convention `H = tr(alpha)/2`.
#[derive(Debug, Clone)]
pub struct PointGeometry<T> {
    pub position: Vec<T>,
    pub fu: Vec<T>,
    pub fv: Vec<T>,
    pub g11: T,
    pub g12: T,
    pub g22: T,
    /// `[alpha_11, alpha_12, alpha_22]` as ambient normal vectors.
    pub alpha: [Vec<T>; 3],
    pub k: T,
    pub h: Vec<T>,
    pub alpha_norm: T,
}

impl<T: Real> PointGeometry<T> {
    pub fn from_jet(jet: &Jet<T>, u: T, v: T) -> Result<Self> {
        let g11 = dot(&jet.fu, &jet.fu);
        let g12 = dot(&jet.fu, &jet.fv);
        let g22 = dot(&jet.fv, &jet.fv);
        let det = g11 * g22 - g12 * g12;
        let trace = g11 + g22;
        if !(det > T::epsilon() * T::lit(16.0) * trace * trace) {
            return Err(Error::NotImmersion {
                u: u.as_f64(),
                v: v.as_f64(),
                det: det.as_f64(),
            });
        }
        let geo = Self {
            position: jet.p.clone(),
            fu: jet.fu.clone(),
            fv: jet.fv.clone(),
            g11,
            g12,
            g22,
            alpha: [vec![], vec![], vec![]],
            k: T::zero(),
            h: vec![],
            alpha_norm: T::zero(),
        };
        let alpha = [
            geo.normal_part(&jet.fuu),
            geo.normal_part(&jet.fuv),
            geo.normal_part(&jet.fvv),
        ];
        let [i11, i12, i22] = geo.inverse_metric();
        let k = (dot(&alpha[0], &alpha[2]) - dot(&alpha[1], &alpha[1])) / det;
        let half = T::lit(0.5);
        let h: Vec<T> = (0..jet.p.len())
            .map(|c| half * (i11 * alpha[0][c] + T::lit(2.0) * i12 * alpha[1][c] + i22 * alpha[2][c]))
            .collect();
        // |alpha|^2 = g^{ik} g^{jl} <alpha_ij, alpha_kl>
        let gi = [[i11, i12], [i12, i22]];
        let idx = |a: usize, b: usize| {
            if a + b == 0 {
                0
            } else if a + b == 1 {
                1
            } else {
                2
            }
        };
        let mut sq = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                for kk in 0..2 {
                    for l in 0..2 {
                        sq += gi[i][kk] * gi[j][l] * dot(&alpha[idx(i, j)], &alpha[idx(kk, l)]);
                    }
                }
            }
        }
        Ok(Self {
            alpha,
            k,
            h,
            alpha_norm: sq.max(T::zero()).sqrt(),
            ..geo
        })
    }

    pub fn det_g(&self) -> T {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    /// `[g^11, g^12, g^22]`.
    pub fn inverse_metric(&self) -> [T; 3] {
        let det = self.det_g();
        [self.g22 / det, -self.g12 / det, self.g11 / det]
    }

    /// Coefficients `(a, b)` with `a F_u + b F_v` the tangential projection of `x`.
    pub fn tangent_coefficients(&self, x: &[T]) -> (T, T) {
        let [i11, i12, i22] = self.inverse_metric();
        let (pu, pv) = (dot(x, &self.fu), dot(x, &self.fv));
        (i11 * pu + i12 * pv, i12 * pu + i22 * pv)
    }

    pub fn tangent_part(&self, x: &[T]) -> Vec<T> {
        let (a, b) = self.tangent_coefficients(x);
        axpy(&axpy(&vec![T::zero(); x.len()], a, &self.fu), b, &self.fv)
    }

    pub fn normal_part(&self, x: &[T]) -> Vec<T> {
        let t = self.tangent_part(x);
        x.iter().zip(&t).map(|(&a, &b)| a - b).collect()
    }

    pub fn mean_curvature_norm(&self) -> T {
        norm(&self.h)
    }

    /// `alpha(e, e)` for the tangent vector `e = a F_u + b F_v`.
    pub fn alpha_on(&self, a: T, b: T) -> Vec<T> {
        let two = T::lit(2.0);
        (0..self.position.len())
            .map(|c| a * a * self.alpha[0][c] + two * a * b * self.alpha[1][c] + b * b * self.alpha[2][c])
            .collect()
    }

    /// Extrinsic distance to the origin.
    pub fn radius(&self) -> T {
        norm(&self.position)
    }

    /// `(|grad R|, |grad-perp rho|)` from the split of the ambient radial unit vector.
    /// Both are zero at the origin itself.
    pub fn radial_split(&self) -> (T, T) {
        let r = self.radius();
        if !(r > T::zero()) {
            return (T::zero(), T::zero());
        }
        let xhat: Vec<T> = self.position.iter().map(|&x| x / r).collect();
        let (a, b) = self.tangent_coefficients(&xhat);
        let tan_sq = a * dot(&xhat, &self.fu) + b * dot(&xhat, &self.fv);
        let grad = tan_sq.max(T::zero()).min(T::one()).sqrt();
        let defect = norm(&self.normal_part(&xhat)).min(T::one());
        (grad, defect)
    }

    /// Normal component of the ambient radial unit vector.
    pub fn radial_normal(&self) -> Vec<T> {
        let r = self.radius();
        let xhat: Vec<T> = self.position.iter().map(|&x| x / r).collect();
        self.normal_part(&xhat)
    }

    /// `Delta R^2 = 4 (1 + <x, H>)`.
    pub fn laplacian_r2(&self) -> T {
        T::lit(4.0) * (T::one() + dot(&self.position, &self.h))
    }
}

/// Builds a catalog immersion from a name such as `helicoid`, `helicoid(2)`,
/// `hyperboloid_sheet(0.5)`, `sphere(2)`, `sphere(1, 0, 0, 1)` or `graph(bump)`.
pub fn catalog<T: Real>(name: &str) -> Result<ParametricImmersion<T>> {
    let name = name.trim();
    let (head, args) = match name.find('(') {
        Some(i) if name.ends_with(')') => {
            let inner = &name[i + 1..name.len() - 1];
            (
                name[..i].trim(),
                inner
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .collect::<Vec<_>>(),
            )
        }
        Some(_) => return Err(Error::UnknownSurface(name.into())),
        None => (name, vec![]),
    };
    let nums = || -> Result<Vec<T>> {
        args.iter()
            .map(|a| {
                a.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::UnknownSurface(name.into()))
            })
            .collect()
    };
    let one_param = |default: f64| -> Result<T> {
        let v = nums()?;
        match v.len() {
            0 => Ok(T::lit(default)),
            1 => Ok(v[0]),
            _ => Err(Error::UnknownSurface(name.into())),
        }
    };
    let no_params = |imm: ParametricImmersion<T>| {
        if args.is_empty() {
            Ok(imm)
        } else {
            Err(Error::UnknownSurface(name.into()))
        }
    };
    match head {
        "plane" => no_params(ParametricImmersion::plane()),
        "catenoid" => no_params(ParametricImmersion::catenoid()),
        "enneper" => no_params(ParametricImmersion::enneper()),
        "paraboloid" => no_params(ParametricImmersion::paraboloid()),
        "helicoid" => Ok(ParametricImmersion::helicoid(one_param(1.0)?)),
        "hyperboloid_sheet" => Ok(ParametricImmersion::hyperboloid_sheet(one_param(1.0)?)),
        "sphere" => {
            let v = nums()?;
            match v.len() {
                0 => Ok(ParametricImmersion::sphere(T::one(), [T::zero(); 3])),
                1 => Ok(ParametricImmersion::sphere(v[0], [T::zero(); 3])),
                4 => Ok(ParametricImmersion::sphere(v[0], [v[1], v[2], v[3]])),
                _ => Err(Error::UnknownSurface(name.into())),
            }
        }
        "graph" => {
            let step = T::lit(1e-4);
            let f: HeightFn<T> = match args.as_slice() {
                ["bump"] => Arc::new(|u: T, v: T| (-(u * u + v * v)).exp()),
                ["saddle"] => Arc::new(|u: T, v: T| (u * u - v * v) / T::lit(2.0)),
                ["paraboloid"] => Arc::new(|u: T, v: T| (u * u + v * v) / T::lit(2.0)),
                _ => return Err(Error::UnknownSurface(name.into())),
            };
            Ok(ParametricImmersion::graph(args[0], f, step))
        }
        _ => Err(Error::UnknownSurface(name.into())),
    }
}

/// Names accepted by [`catalog`], with their default parameters.
pub const CATALOG_NAMES: [&str; 10] = [
    "plane",
    "catenoid",
    "helicoid(1)",
    "enneper",
    "sphere(1)",
    "paraboloid",
    "hyperboloid_sheet(1)",
    "graph(bump)",
    "graph(saddle)",
    "graph(paraboloid)",
];

/// `(distance proxy, |alpha|)` along a parameter path. Without a proxy the
/// distance is the accumulated ambient chord length from the first point.
pub fn alpha_norm_profile<T: Real>(
    imm: &ParametricImmersion<T>,
    path: &[(T, T)],
    proxy: Option<&[T]>,
) -> Result<Vec<(T, T)>> {
    if let Some(p) = proxy {
        if p.len() != path.len() {
            return Err(Error::Invalid("distance proxy length differs from path length".into()));
        }
    }
    let mut out = Vec::with_capacity(path.len());
    let mut acc = T::zero();
    let mut prev: Option<Vec<T>> = None;
    for (i, &(u, v)) in path.iter().enumerate() {
        let geo = imm.point_geometry(u, v)?;
        if let Some(q) = &prev {
            acc += crate::scalar::dist(q, &geo.position);
        }
        let rho = proxy.map_or(acc, |p| p[i]);
        out.push((rho, geo.alpha_norm));
        prev = Some(geo.position);
    }
    Ok(out)
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::extrinsic::window_for_radius;
    use proptest::prelude::*;

    const SURFACES: [&str; 7] = [
        "plane",
        "catenoid",
        "helicoid(1)",
        "enneper",
        "paraboloid",
        "hyperboloid_sheet(1)",
        "sphere(1,0,0,1)",
    ];

    fn point(k: usize, s: f64, t: f64) -> (ParametricImmersion<f64>, f64, f64) {
        let imm = catalog::<f64>(SURFACES[k]).unwrap();
        let w = window_for_radius(&imm, 4.0, 1.0).unwrap();
        (imm, w.u0 + s * w.width(), w.v0 + t * w.height())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn radial_gradient_splits_the_unit_vector(k in 0..SURFACES.len(), s in 0.0..1.0f64, t in 0.0..1.0f64) {
            let (imm, u, v) = point(k, s, t);
            let geo = imm.point_geometry(u, v);
            prop_assume!(geo.is_ok());
            let geo = geo.unwrap();
            prop_assume!(geo.radius() > 1e-6);
            let (g, d) = geo.radial_split();
            prop_assert!((g * g + d * d - 1.0).abs() < 1e-9, "{} at ({u}, {v}): {g} {d}", SURFACES[k]);
        }

        #[test]
        fn rotations_about_the_origin_preserve_extrinsic_quantities(
            k in 0..SURFACES.len(),
            s in 0.05..0.95f64,
            t in 0.05..0.95f64,
            axis in prop::array::uniform3(-1.0..1.0f64),
            angle in 0.0..std::f64::consts::TAU,
        ) {
            prop_assume!(axis.iter().map(|a| a * a).sum::<f64>() > 1e-2);
            let (imm, u, v) = point(k, s, t);
            let moved = imm.clone().with_motion(RigidMotion::axis_angle(axis, angle, [0.0; 3]));
            let (a, b) = (imm.point_geometry(u, v), moved.point_geometry(u, v));
            prop_assume!(a.is_ok() && b.is_ok());
            let (a, b) = (a.unwrap(), b.unwrap());
            prop_assert!((a.radius() - b.radius()).abs() < 1e-9 * (1.0 + a.radius()));
            prop_assert!((a.alpha_norm - b.alpha_norm).abs() < 1e-6 * (1.0 + a.alpha_norm));
            prop_assert!((a.k - b.k).abs() < 1e-6 * (1.0 + a.k.abs()));
        }
    }
}
