//! Radial comparison machinery.
//!
//! Solutions of the Jacobi problem `h'' = G h`, `h(0) = 0`, `h'(0) = 1` encode the
//! model space whose radial curvature is `-G`. The same module houses the radial
//! first Dirichlet eigenfunction of Euclidean balls, which the tone bounds
//! transplant onto immersed surfaces.
//!
//! Everything here is integrated with a fixed-step classical Runge–Kutta scheme so
//! that repeated runs are bit-identical.

use crate::error::{Error, Result};
use crate::scalar::{simpson, Real};

/// Default absolute tolerance for ODE residual checks.
pub const TOL_ODE: f64 = 1e-8;

fn rk4_step<T: Real, F: Fn(T, [T; 2]) -> [T; 2]>(f: &F, t: T, y: [T; 2], s: T) -> [T; 2] {
    let half = T::lit(0.5);
    let k1 = f(t, y);
    let k2 = f(t + half * s, [y[0] + half * s * k1[0], y[1] + half * s * k1[1]]);
    let k3 = f(t + half * s, [y[0] + half * s * k2[0], y[1] + half * s * k2[1]]);
    let k4 = f(t + s, [y[0] + s * k3[0], y[1] + s * k3[1]]);
    let w = s / T::lit(6.0);
    [
        y[0] + w * (k1[0] + T::lit(2.0) * (k2[0] + k3[0]) + k4[0]),
        y[1] + w * (k1[1] + T::lit(2.0) * (k2[1] + k3[1]) + k4[1]),
    ]
}

/// Cubic Hermite interpolation on a uniform grid given values and slopes.
fn hermite<T: Real>(grid_step: T, vals: &[T], slopes: &[T], t: T) -> T {
    let n = vals.len();
    if t <= T::zero() {
        return vals[0] + slopes[0] * t;
    }
    let x = t / grid_step;
    let mut i = x.floor().to_usize().unwrap_or(n);
    if i >= n - 1 {
        i = n - 2;
    }
    let s = x - T::from_count(i);
    let (s2, s3) = (s * s, s * s * s);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    h00 * vals[i] + h10 * grid_step * slopes[i] + h01 * vals[i + 1] + h11 * grid_step * slopes[i + 1]
}

/// Fourth-order difference of a tabulated derivative at interior node `i`,
/// shifted one-sided stencils next to the ends.
fn second_derivative<T: Real>(slopes: &[T], i: usize, s: T) -> T {
    let n = slopes.len();
    let c = |k: f64| T::lit(k);
    let d = T::lit(12.0) * s;
    if n < 5 {
        return (slopes[i + 1] - slopes[i - 1]) / (T::lit(2.0) * s);
    }
    if i == 1 {
        (c(-3.0) * slopes[0] - c(10.0) * slopes[1] + c(18.0) * slopes[2] - c(6.0) * slopes[3] + slopes[4]) / d
    } else if i == n - 2 {
        (c(3.0) * slopes[n - 1] + c(10.0) * slopes[n - 2] - c(18.0) * slopes[n - 3] + c(6.0) * slopes[n - 4]
            - slopes[n - 5])
            / d
    } else {
        (-slopes[i + 2] + c(8.0) * slopes[i + 1] - c(8.0) * slopes[i - 1] + slopes[i - 2]) / d
    }
}

/// Tabulated solution of the Jacobi problem for a curvature profile `G`.
#[derive(Debug, Clone)]
pub struct ComparisonProfile<T> {
    pub grid_step: T,
    pub t: Vec<T>,
    /// `G` sampled at the grid nodes.
    pub g: Vec<T>,
    pub h: Vec<T>,
    pub h_prime: Vec<T>,
    /// Largest `t` such that `h > 0` on `(0, t]`.
    pub positivity_horizon: T,
    /// Largest nodal difference between this solution and one computed at half the step.
    pub richardson_error: T,
}

impl<T: Real> ComparisonProfile<T> {
    /// The flat profile `h(t) = t`, exact on any grid.
    pub fn flat(t_max: T, step: T) -> Self {
        let n = (t_max / step).ceil().to_usize().unwrap_or(1).max(1);
        let s = t_max / T::from_count(n);
        let t: Vec<T> = (0..=n).map(|i| s * T::from_count(i)).collect();
        Self {
            grid_step: s,
            g: vec![T::zero(); n + 1],
            h: t.clone(),
            h_prime: vec![T::one(); n + 1],
            t,
            positivity_horizon: t_max,
            richardson_error: T::zero(),
        }
    }

    pub fn t_max(&self) -> T {
        *self.t.last().expect("non-empty grid")
    }

    pub fn h_at(&self, t: T) -> T {
        hermite(self.grid_step, &self.h, &self.h_prime, t)
    }

    pub fn h_prime_at(&self, t: T) -> T {
        let gh: Vec<T> = self.g.iter().zip(&self.h).map(|(&g, &h)| g * h).collect();
        hermite(self.grid_step, &self.h_prime, &gh, t)
    }

    /// Largest `|h'' - G h|` over interior nodes, `h''` differenced from the `h'` table.
    pub fn max_residual(&self) -> T {
        let n = self.t.len();
        (1..n - 1)
            .map(|i| (second_derivative(&self.h_prime, i, self.grid_step) - self.g[i] * self.h[i]).abs())
            .fold(T::zero(), T::max)
    }
}

fn eval_g<T: Real, G: Fn(T) -> T>(g: &G, t: T, s: T) -> T {
    let v = g(t);
    if v.is_finite() {
        v
    } else {
        // removable singularity: evaluate from the right
        g(t + s * T::lit(1e-6))
    }
}

fn integrate_jacobi<T: Real, G: Fn(T) -> T>(g: &G, n: usize, s: T) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let escape = T::max_value().sqrt();
    let rhs = |t: T, y: [T; 2]| [y[1], eval_g(g, t, s) * y[0]];
    let mut h = Vec::with_capacity(n + 1);
    let mut hp = Vec::with_capacity(n + 1);
    let mut gs = Vec::with_capacity(n + 1);
    let mut y = [T::zero(), T::one()];
    for i in 0..=n {
        let t = s * T::from_count(i);
        if !y[0].is_finite() || !y[1].is_finite() || y[0].abs() > escape || y[1].abs() > escape {
            return Err(Error::SolutionEscaped { t: t.as_f64() });
        }
        h.push(y[0]);
        hp.push(y[1]);
        gs.push(eval_g(g, t, s));
        if i < n {
            y = rk4_step(&rhs, t, y, s);
        }
    }
    Ok((h, hp, gs))
}

/// Solves `h'' - G h = 0`, `h(0) = 0`, `h'(0) = 1` on `[0, t_max]`.
///
/// The step is shrunk so that it divides `t_max`. A second pass at half the step
/// provides the Richardson error estimate stored on the profile.
pub fn solve_jacobi<T: Real, G: Fn(T) -> T>(g: G, t_max: T, step: T) -> Result<ComparisonProfile<T>> {
    if !(t_max > T::zero()) || !(step > T::zero()) {
        return Err(Error::Invalid("t_max and step must be positive".into()));
    }
    let n = (t_max / step).ceil().to_usize().unwrap_or(1).max(1);
    let s = t_max / T::from_count(n);
    let (h, h_prime, gs) = integrate_jacobi(&g, n, s)?;
    let (fine, _, _) = integrate_jacobi(&g, 2 * n, s * T::lit(0.5))?;
    let richardson_error = h
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - fine[2 * i]).abs())
        .fold(T::zero(), T::max);

    let t: Vec<T> = (0..=n).map(|i| s * T::from_count(i)).collect();
    let mut positivity_horizon = t_max;
    for i in 1..=n {
        if h[i] <= T::zero() {
            positivity_horizon = if i == 1 {
                T::zero()
            } else {
                t[i - 1] + s * h[i - 1] / (h[i - 1] - h[i])
            };
            break;
        }
    }
    Ok(ComparisonProfile {
        grid_step: s,
        t,
        g: gs,
        h,
        h_prime,
        positivity_horizon,
        richardson_error,
    })
}

/// How `G_-` is continued beyond the sampled range when evaluating the tail integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BmrTail<T> {
    /// `G_- = 0` beyond `t_max`.
    Zero,
    /// `G_-(s) = G_-(t_max) (s / t_max)^exponent` beyond `t_max`; needs `exponent < -1`.
    PowerLaw { exponent: T },
}

#[derive(Debug, Clone, Copy)]
pub struct BmrReport<T> {
    pub holds: bool,
    /// `sup_t t * int_t^inf G_-(s) ds` over the sampling grid.
    pub sup_value: T,
    pub tail: BmrTail<T>,
}

/// Checks `t * int_t^inf G_-(s) ds <= 1/4` on a uniform grid over `[0, t_max]`.
pub fn check_bmr<T: Real, G: Fn(T) -> T>(g: G, t_max: T, tail: BmrTail<T>) -> Result<BmrReport<T>> {
    check_bmr_with(g, t_max, tail, 8192)
}

pub fn check_bmr_with<T: Real, G: Fn(T) -> T>(
    g: G,
    t_max: T,
    tail: BmrTail<T>,
    samples: usize,
) -> Result<BmrReport<T>> {
    let n = samples.max(2);
    let s = t_max / T::from_count(n);
    let neg = |t: T| (-eval_g(&g, t, s)).max(T::zero());
    let tail_mass = match tail {
        BmrTail::Zero => T::zero(),
        BmrTail::PowerLaw { exponent } => {
            if !(exponent < -T::one()) {
                return Err(Error::TailDivergent {
                    exponent: exponent.as_f64(),
                });
            }
            neg(t_max) * t_max / (-exponent - T::one())
        }
    };
    let mut running = tail_mass;
    let mut sup = T::zero();
    let mut upper = neg(t_max);
    for i in (0..=n).rev() {
        let t = s * T::from_count(i);
        if i < n {
            let lower = neg(t);
            running += T::lit(0.5) * s * (lower + upper);
            upper = lower;
        }
        sup = sup.max(t * running);
    }
    Ok(BmrReport {
        holds: sup <= T::lit(0.25),
        sup_value: sup,
        tail,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct DecayLemmaCheck<T> {
    /// `h''/h <= 2/t^2` at every positive node inside the horizon.
    pub premise_holds: bool,
    pub max_t_logderiv: T,
}

/// Evaluates the premise `h''/h <= 2/t^2` and the conclusion `t h'/h <= 2` on the grid.
pub fn quadratic_decay_lemma_check<T: Real>(profile: &ComparisonProfile<T>) -> DecayLemmaCheck<T> {
    let mut premise = true;
    let mut max_ratio = T::zero();
    let slack = T::lit(1e-12);
    for i in 1..profile.t.len() {
        let t = profile.t[i];
        if t > profile.positivity_horizon {
            break;
        }
        let bound = T::lit(2.0) / (t * t);
        if profile.g[i] > bound * (T::one() + slack) {
            premise = false;
        }
        max_ratio = max_ratio.max(t * profile.h_prime[i] / profile.h[i]);
    }
    DecayLemmaCheck {
        premise_holds: premise,
        max_t_logderiv: max_ratio,
    }
}

/// `S_kappa(t)`: solution of `S'' + kappa S = 0`, `S(0) = 0`, `S'(0) = 1`.
pub fn s_kappa<T: Real>(kappa: T, t: T) -> T {
    if kappa == T::zero() {
        t
    } else if kappa < T::zero() {
        let w = (-kappa).sqrt();
        (w * t).sinh() / w
    } else {
        let w = kappa.sqrt();
        (w * t).sin() / w
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KasueBound<T> {
    /// Bound clamped to `[0, 1]`.
    pub value: T,
    pub raw: T,
    pub clamped: bool,
}

/// Envelope `delta(R) + (1/S_kappa(R)) int_r^R S_kappa(s) k(s) ds` for the normal
/// part of the radial gradient at extrinsic distance `big_r`.
pub fn kasue_bound<T: Real, K: Fn(T) -> T, D: Fn(T) -> T>(
    kappa: T,
    k: K,
    r: T,
    big_r: T,
    delta: D,
) -> Result<KasueBound<T>> {
    if !(r < big_r) {
        return Err(Error::EmptyRange {
            from: r.as_f64(),
            to: big_r.as_f64(),
        });
    }
    let integral = simpson(|s| s_kappa(kappa, s) * k(s), r, big_r, 2048);
    let raw = delta(big_r) + integral / s_kappa(kappa, big_r);
    let value = raw.max(T::zero()).min(T::one());
    Ok(KasueBound {
        value,
        raw,
        clamped: value != raw,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct LambdaC<T> {
    pub value: T,
    /// `Lambda_c < 1`, the regime where the perimeter and tone estimates apply.
    pub regime_entered: bool,
}

/// `Lambda_c(t) = delta(t) + c`.
pub fn lambda_c<T: Real, D: Fn(T) -> T>(c: T, delta: D, t: T) -> LambdaC<T> {
    let value = delta(t) + c;
    LambdaC {
        value,
        regime_entered: value < T::one(),
    }
}

/// Positive radial first Dirichlet eigenfunction of the Euclidean `l`-ball of radius `r`.
#[derive(Debug, Clone)]
pub struct RadialEigenfunction<T> {
    pub l: usize,
    pub r: T,
    pub lambda1: T,
    pub grid_step: T,
    pub t: Vec<T>,
    pub v: Vec<T>,
    pub v_prime: Vec<T>,
}

impl<T: Real> RadialEigenfunction<T> {
    pub fn v_at(&self, t: T) -> T {
        if t >= self.r {
            return T::zero();
        }
        hermite(self.grid_step, &self.v, &self.v_prime, t)
    }

    pub fn v_prime_at(&self, t: T) -> T {
        let t = t.min(self.r).max(T::zero());
        let n = self.t.len();
        let i = (t / self.grid_step).floor().to_usize().unwrap_or(n).min(n - 2);
        let local = [self.v_second(i), self.v_second(i + 1)];
        let shifted = t - T::from_count(i) * self.grid_step;
        hermite(self.grid_step, &self.v_prime[i..i + 2], &local, shifted)
    }

    fn v_second(&self, i: usize) -> T {
        let t = self.t[i];
        let lm1 = T::from_count(self.l - 1);
        if i == 0 {
            -self.lambda1 / T::from_count(self.l)
        } else {
            -lm1 * self.v_prime[i] / t - self.lambda1 * self.v[i]
        }
    }

    /// Largest `|v'' + (l-1) v'/t + lambda v|` over interior nodes.
    pub fn max_residual(&self) -> T {
        let lm1 = T::from_count(self.l - 1);
        (1..self.t.len() - 1)
            .map(|i| {
                let vpp = second_derivative(&self.v_prime, i, self.grid_step);
                (vpp + lm1 * self.v_prime[i] / self.t[i] + self.lambda1 * self.v[i]).abs()
            })
            .fold(T::zero(), T::max)
    }
}

/// Series of the regular solution, `v = sum a_k t^{2k}` with
/// `a_k = -lambda a_{k-1} / (2k (2k + l - 2))`: returns `v` and `v'` at `t`.
fn eigen_series<T: Real>(l: usize, lambda: T, t: T) -> ([T; 2], T) {
    let lf = T::from_count(l);
    let two = T::lit(2.0);
    let t2 = t * t;
    let mut a = T::one();
    let mut v = T::one();
    let mut vp = T::zero();
    let mut pow = T::one();
    let mut biggest = T::one();
    for k in 1..=200usize {
        let kk = T::from_count(k);
        a = -lambda * a / (two * kk * (two * kk + lf - two));
        pow *= t2;
        let term = a * pow;
        biggest = biggest.max(term.abs());
        v += term;
        vp += two * kk * term / t;
        if term.abs() <= T::epsilon() * T::lit(1e-3) * v.abs() {
            break;
        }
    }
    ([v, vp], biggest)
}

/// Shoots the radial profile for a trial `lambda`; returns the tables and whether
/// `v` reached zero on `(0, r]`.
///
/// The `(l - 1)/t` coefficient makes the equation stiff near the origin, so the
/// series covers the nodes where `(l - 1) s / t` exceeds the explicit stability
/// margin, and keeps going while its terms cancel by less than three digits.
/// RK4 takes over from there.
fn shoot<T: Real>(l: usize, lambda: T, r: T, n: usize) -> (Vec<T>, Vec<T>, bool) {
    let s = r / T::from_count(n);
    let lm1 = T::from_count(l - 1);
    let rhs = |t: T, y: [T; 2]| [y[1], -lm1 * y[1] / t - lambda * y[0]];
    let min_series = l.div_ceil(2).clamp(1, n);
    let mut in_series = true;
    let mut v = Vec::with_capacity(n + 1);
    let mut vp = Vec::with_capacity(n + 1);
    v.push(T::one());
    vp.push(T::zero());
    let mut crossed = false;
    let mut y = [T::one(), T::zero()];
    for i in 1..=n {
        let t = s * T::from_count(i);
        if in_series {
            let (next, biggest) = eigen_series(l, lambda, t);
            if i <= min_series || biggest <= T::lit(1e3) * next[0].abs() {
                y = next;
            } else {
                in_series = false;
            }
        }
        if !in_series {
            y = rk4_step(&rhs, t - s, y, s);
        }
        v.push(y[0]);
        vp.push(y[1]);
        if y[0] <= T::zero() {
            crossed = true;
        }
    }
    (v, vp, crossed)
}

/// Smallest Dirichlet eigenvalue and profile for the `l`-ball of radius `r`
/// (default 4000 integration steps).
pub fn dirichlet_eigen_ball<T: Real>(l: usize, r: T) -> Result<RadialEigenfunction<T>> {
    dirichlet_eigen_ball_with(l, r, 4000)
}

/// Shooting plus bisection on `lambda`. The step count is fixed in units of `r`,
/// so `lambda(r) r^2` is independent of `r` up to rounding.
pub fn dirichlet_eigen_ball_with<T: Real>(l: usize, r: T, steps: usize) -> Result<RadialEigenfunction<T>> {
    if l < 2 {
        return Err(Error::Invalid(format!("ball dimension must be at least 2, got {l}")));
    }
    if !(r > T::zero()) {
        return Err(Error::Invalid("ball radius must be positive".into()));
    }
    let n = steps.max(16);
    let inv_r2 = T::one() / (r * r);
    let mut lo = T::zero();
    let mut hi = inv_r2;
    let cap = T::lit(1e9) * inv_r2;
    while !shoot(l, hi, r, n).2 {
        lo = hi;
        hi *= T::lit(2.0);
        if hi > cap {
            return Err(Error::NoSignChange {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
    }
    let eps = T::epsilon() * T::lit(8.0);
    for _ in 0..200 {
        if hi - lo <= eps * hi {
            break;
        }
        let mid = T::lit(0.5) * (lo + hi);
        if shoot(l, mid, r, n).2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (v, v_prime, _) = shoot(l, lo, r, n);
    let s = r / T::from_count(n);
    Ok(RadialEigenfunction {
        l,
        r,
        lambda1: T::lit(0.5) * (lo + hi),
        grid_step: s,
        t: (0..=n).map(|i| s * T::from_count(i)).collect(),
        v,
        v_prime,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SlopeLemmaCheck<T> {
    pub holds: bool,
    /// `max_t -v'(t)/t` over the grid.
    pub max_ratio: T,
}

/// Checks `-v'(t)/t <= lambda_1` on every positive grid node.
pub fn v_slope_lemma_check<T: Real>(ef: &RadialEigenfunction<T>) -> SlopeLemmaCheck<T> {
    let max_ratio =
        ef.t.iter()
            .zip(&ef.v_prime)
            .skip(1)
            .map(|(&t, &vp)| -vp / t)
            .fold(T::zero(), T::max);
    SlopeLemmaCheck {
        holds: max_ratio <= ef.lambda1 * (T::one() + T::lit(1e-9)),
        max_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_jacobi_is_identity() {
        let p = solve_jacobi(|_| 0.0f64, 10.0, 0.01).unwrap();
        for (t, (h, hp)) in p.t.iter().zip(p.h.iter().zip(&p.h_prime)) {
            assert!((h - t).abs() <= 1e-8);
            assert!((hp - 1.0).abs() <= 1e-8);
        }
        assert_eq!(p.positivity_horizon, 10.0);
    }

    #[test]
    fn unit_curvature_gives_sinh() {
        let p = solve_jacobi(|_| 1.0f64, 5.0, 1e-3).unwrap();
        for (t, h) in p.t.iter().zip(&p.h).skip(1) {
            assert!(((h - t.sinh()) / t.sinh()).abs() <= 1e-6);
        }
        assert!(p.max_residual() < 1e-8 * 5.0f64.cosh());
    }

    #[test]
    fn step_halving_converges_at_fourth_order() {
        let err = |step: f64| {
            let p = solve_jacobi(|_| 1.0f64, 5.0, step).unwrap();
            p.t.iter()
                .zip(&p.h)
                .map(|(t, h)| (h - t.sinh()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.1), err(0.05));
        // O(s^2) is the contract; RK4 delivers roughly 16x
        assert!(e2 <= e1 / 4.0, "e1 = {e1}, e2 = {e2}");
        assert!(e2 <= e1 / 12.0);
    }

    #[test]
    fn oscillating_profile_reports_horizon() {
        // G = -1 gives h = sin t, first zero at pi
        let p = solve_jacobi(|_| -1.0f64, 5.0, 1e-3).unwrap();
        assert!((p.positivity_horizon - std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn blow_up_is_an_error() {
        let r = solve_jacobi(|_| 1e6f64, 10.0, 0.5);
        assert!(matches!(r, Err(Error::SolutionEscaped { .. })));
    }

    #[test]
    fn removable_singularity_at_origin() {
        let p = solve_jacobi(
            |t: f64| (t.sin() / t).powi(2) * 0.0 + 1.0 / (1.0 + t) - 1.0 / (1.0 + t),
            1.0,
            0.01,
        )
        .unwrap();
        assert!((p.h_at(0.5) - 0.5).abs() < 1e-10);
        let q = solve_jacobi(|t: f64| t.sin() / t - t.sin() / t, 1.0, 0.01).unwrap();
        assert!((q.h_at(1.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hermite_interpolation_between_nodes() {
        let p = solve_jacobi(|_| 1.0f64, 3.0, 0.01).unwrap();
        for &t in &[0.005, 1.2345, 2.9999] {
            assert!((p.h_at(t) - t.sinh()).abs() < 1e-8);
            assert!((p.h_prime_at(t) - t.cosh()).abs() < 1e-8);
        }
    }

    #[test]
    fn bmr_trivial_profiles() {
        let r = check_bmr(|_| 0.0f64, 10.0, BmrTail::Zero).unwrap();
        assert!(r.holds && r.sup_value == 0.0);
        let r = check_bmr(|_| 1.0f64, 10.0, BmrTail::Zero).unwrap();
        assert!(r.holds && r.sup_value == 0.0);
    }

    #[test]
    fn bmr_quadratic_negative_profile() {
        let g = |t: f64| -1.0 / (8.0 * (1.0 + t) * (1.0 + t));
        let r = check_bmr(g, 50.0, BmrTail::PowerLaw { exponent: -2.0 }).unwrap();
        assert!(r.holds);
        // closed form t / (8 (1 + t)) at t = 50, up to the tail model at the cut
        let exact = 50.0 / (8.0 * 51.0);
        assert!(
            r.sup_value <= 0.25 && (r.sup_value - exact).abs() < 5e-3,
            "{}",
            r.sup_value
        );
    }

    #[test]
    fn bmr_rejects_divergent_tail() {
        let r = check_bmr(|_| -1.0f64, 1.0, BmrTail::PowerLaw { exponent: -1.0 });
        assert!(matches!(r, Err(Error::TailDivergent { .. })));
    }

    #[test]
    fn bmr_detects_violation() {
        let r = check_bmr(|_| -1.0f64, 2.0, BmrTail::Zero).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn decay_lemma_flat_and_hyperbolic() {
        let flat = ComparisonProfile::flat(10.0f64, 0.01);
        let c = quadratic_decay_lemma_check(&flat);
        assert!(c.premise_holds);
        assert!((c.max_t_logderiv - 1.0).abs() < 1e-12);

        let hyp = solve_jacobi(|_| 1.0f64, 10.0, 0.01).unwrap();
        assert!(!quadratic_decay_lemma_check(&hyp).premise_holds);
    }

    #[test]
    fn s_kappa_closed_forms() {
        assert_eq!(s_kappa(0.0f64, 3.0), 3.0);
        assert!((s_kappa(-1.0f64, 1.0) - 1.1752012).abs() < 1e-7);
        assert!((s_kappa(-4.0f64, 0.5) - 0.5876006).abs() < 1e-7);
        assert!((s_kappa(1.0f64, std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kasue_zero_integrand_and_reciprocal_profile() {
        let b = kasue_bound(0.0f64, |_| 0.0, 1.0, 10.0, |t| 1.0 / t).unwrap();
        assert!((b.value - 0.1).abs() < 1e-12);
        let b = kasue_bound(0.0f64, |s| 0.5 / s, 1.0, 10.0, |_| 0.0).unwrap();
        assert!((b.value - 0.45).abs() < 1e-10);
        assert!(!b.clamped);
    }

    #[test]
    fn kasue_clamps_and_rejects_empty_range() {
        let b = kasue_bound(0.0f64, |_| 0.0, 1.0, 2.0, |_| 3.0).unwrap();
        assert!(b.clamped && b.value == 1.0);
        assert!(matches!(
            kasue_bound(0.0f64, |_| 0.0, 2.0, 2.0, |_| 0.0),
            Err(Error::EmptyRange { .. })
        ));
    }

    #[test]
    fn lambda_c_arithmetic() {
        assert!((lambda_c(0.3f64, |t| 1.0 / t, 10.0).value - 0.4).abs() < 1e-15);
        assert_eq!(lambda_c(0.3f64, |_| 0.0, 123.0).value, 0.3);
        let flagged = lambda_c(0.9f64, |_| 0.2, 1.0);
        assert!((flagged.value - 1.1).abs() < 1e-15 && !flagged.regime_entered);
    }

    #[test]
    fn eigen_ball_three_dimensional_closed_form() {
        let ef = dirichlet_eigen_ball(3, 1.0f64).unwrap();
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert!((ef.lambda1 - pi2).abs() < 1e-6);
        for &t in &[0.1, 0.5, 0.9] {
            let exact = (std::f64::consts::PI * t).sin() / (std::f64::consts::PI * t);
            assert!((ef.v_at(t) - exact).abs() < 1e-8);
        }
        assert!(ef.max_residual() < TOL_ODE);
    }

    #[test]
    fn eigen_ball_profile_shape() {
        let ef = dirichlet_eigen_ball(2, 1.0f64).unwrap();
        assert_eq!(ef.v[0], 1.0);
        assert!(ef.v.last().unwrap().abs() < 1e-8);
        assert!(ef.v[..ef.v.len() - 1].iter().all(|&v| v > 0.0));
        assert!(ef.v_prime[1..].iter().all(|&d| d <= 0.0));
    }

    #[test]
    fn eigen_ball_rejects_bad_dimension() {
        assert!(dirichlet_eigen_ball(1, 1.0f64).is_err());
    }

    #[test]
    fn slope_lemma_for_computed_profiles() {
        for (l, r) in [(3, 1.0f64), (2, 1.0), (2, 5.0), (6, 3.0)] {
            let ef = dirichlet_eigen_ball(l, r).unwrap();
            let c = v_slope_lemma_check(&ef);
            assert!(c.holds, "l = {l}, r = {r}");
            assert!(c.max_ratio <= ef.lambda1);
        }
    }

    #[test]
    fn f32_paths_compile_and_agree() {
        let p = solve_jacobi(|_| 1.0f32, 2.0, 0.01).unwrap();
        assert!((p.h_at(2.0) - 2.0f32.sinh()).abs() < 1e-4);
        let ef = dirichlet_eigen_ball_with(3, 1.0f32, 400).unwrap();
        assert!((ef.lambda1 - 9.869_604).abs() < 1e-3);
    }
}
