//! The limiting distribution of the combined statistics.
//!
//! The standardized statistic `(S_n1 + c|S_n2| - (k-1)) / sigma_n1` converges
//! to `Z1 + s|Z2|` with `s = c sigma_n2 / sigma_n1` and `Z1, Z2` independent
//! standard normals. Its CDF is
//!
//! ```text
//! Psi(x, s) = sqrt(2/pi) * integral_0^inf Phi(x - s t) exp(-t^2/2) dt
//! ```
//!
//! evaluated here by adaptive composite Gauss-Legendre quadrature, with
//! upper-tail critical values `psi_alpha(s)` solved by safeguarded
//! Newton-Raphson. `Psi(x, 0) = Phi(x)`, so `psi_alpha(0)` is the normal
//! critical value `z_alpha`. All tail conventions are upper-tail:
//! `1 - CDF = alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::real::{cast, cast_usize, CompensatedSum, Real};

const DEFAULT_TRUNCATION: f64 = 10.0;
const DEFAULT_NODES: usize = 128;
const PANEL_ORDER: usize = 16;
/// Stop refining when successive composite estimates agree to this.
const QUAD_REFINE_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 1 << 14;
const NEWTON_MAX_ITER: usize = 200;
/// Residual |1 - Psi(psi) - alpha| accepted from the critical-value solver.
const CRITICAL_RESIDUAL_TOL: f64 = 1e-8;

/// Truncation point and base node count for the `Psi` integral.
///
/// The integrand decays like `exp(-t^2/2)`, so truncating at `T = 10` leaves
/// less than `2e-23` behind; refinement doubles the panel count until two
/// successive estimates agree to `1e-12`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec<R> {
    truncation: R,
    nodes: usize,
}

impl<R: Real> QuadratureSpec<R> {
    pub fn new(truncation: R, nodes: usize) -> Result<Self> {
        if !(truncation.is_finite() && truncation >= cast(8.0)) {
            return Err(GofError::InvalidParameter(format!(
                "quadrature truncation must be >= 8, got {truncation}"
            )));
        }
        if nodes < 64 {
            return Err(GofError::InvalidParameter(format!(
                "quadrature base node count must be >= 64, got {nodes}"
            )));
        }
        Ok(Self { truncation, nodes })
    }

    pub fn truncation(&self) -> R {
        self.truncation
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }
}

impl<R: Real> Default for QuadratureSpec<R> {
    fn default() -> Self {
        Self {
            truncation: cast(DEFAULT_TRUNCATION),
            nodes: DEFAULT_NODES,
        }
    }
}

/// An upper-tail critical-value request: level `alpha` and mixture ratio `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalQuery<R> {
    alpha: R,
    s: R,
}

impl<R: Real> CriticalQuery<R> {
    pub fn new(alpha: R, s: R) -> Result<Self> {
        if !(alpha > R::zero() && alpha < R::one()) {
            return Err(GofError::InvalidAlpha(alpha.to_f64().unwrap_or(f64::NAN)));
        }
        if !(s.is_finite() && s >= R::zero()) {
            return Err(GofError::InvalidParameter(format!(
                "mixture ratio s must be finite and >= 0, got {s}"
            )));
        }
        Ok(Self { alpha, s })
    }

    pub fn alpha(&self) -> R {
        self.alpha
    }

    pub fn s(&self) -> R {
        self.s
    }
}

/// erf(z) by its positive-term series, accurate for |z| below ~3:
/// `erf(z) = (2/sqrt(pi)) z exp(-z^2) sum_m (2 z^2)^m / (1*3*...*(2m+1))`.
fn erf_series<R: Real>(z: R) -> R {
    let two = cast::<R>(2.0);
    let z2 = z * z;
    let mut term = R::one();
    let mut sum = R::one();
    let mut m = R::zero();
    for _ in 0..200 {
        m += R::one();
        term = term * two * z2 / (two * m + R::one());
        sum += term;
        if term < sum * R::epsilon() {
            break;
        }
    }
    two / cast::<R>(std::f64::consts::PI).sqrt() * z * (-z2).exp() * sum
}

/// erfc(z) for z >= 3 by the Laplace continued fraction
/// `erfc(z) sqrt(pi) exp(z^2) = 1/(z + (1/2)/(z + (2/2)/(z + ...)))`,
/// evaluated with the modified Lentz recurrence.
fn erfc_continued_fraction<R: Real>(z: R) -> R {
    let tiny = cast::<R>(1e-300).max(R::min_positive_value());
    let half = cast::<R>(0.5);
    let mut f = z;
    let mut c = z;
    let mut d = R::zero();
    let mut m = R::zero();
    for _ in 0..300 {
        m += half;
        d = z + m * d;
        if d == R::zero() {
            d = tiny;
        }
        c = z + m / c;
        if c == R::zero() {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f *= delta;
        if (delta - R::one()).abs() < R::epsilon() {
            break;
        }
    }
    (-z * z).exp() / (cast::<R>(std::f64::consts::PI).sqrt() * f)
}

/// Complementary error function, accurate to roughly machine precision in
/// `f64` across the real line.
pub fn erfc<R: Real>(z: R) -> R {
    let threshold = cast::<R>(3.0);
    if z < R::zero() {
        cast::<R>(2.0) - erfc(-z)
    } else if z < threshold {
        R::one() - erf_series(z)
    } else {
        erfc_continued_fraction(z)
    }
}

/// Standard normal CDF `Phi(x)`.
pub fn std_normal_cdf<R: Real>(x: R) -> R {
    let half = cast::<R>(0.5);
    half * erfc(-x / cast::<R>(std::f64::consts::SQRT_2))
}

/// Standard normal upper tail `1 - Phi(x)`, computed without cancellation.
pub fn std_normal_sf<R: Real>(x: R) -> R {
    let half = cast::<R>(0.5);
    half * erfc(x / cast::<R>(std::f64::consts::SQRT_2))
}

/// Standard normal density.
pub fn std_normal_pdf<R: Real>(x: R) -> R {
    let half = cast::<R>(0.5);
    (-half * x * x).exp() / cast::<R>((2.0 * std::f64::consts::PI).sqrt())
}

/// Upper-tail standard normal quantile: the `z` with `1 - Phi(z) = alpha`.
///
/// A rational first guess is polished by Newton steps on the survival
/// function, safeguarded by bisection on `[0, sqrt(-2 ln alpha)]`.
pub fn std_normal_quantile<R: Real>(alpha: R) -> Result<R> {
    if !(alpha > R::zero() && alpha < R::one()) {
        return Err(GofError::InvalidAlpha(alpha.to_f64().unwrap_or(f64::NAN)));
    }
    let half = cast::<R>(0.5);
    if alpha == half {
        return Ok(R::zero());
    }
    if alpha > half {
        return Ok(-std_normal_quantile(R::one() - alpha)?);
    }

    // Hastings-style initial guess, good to ~4.5e-4.
    let t = (-cast::<R>(2.0) * alpha.ln()).sqrt();
    let num = cast::<R>(2.515517) + t * (cast::<R>(0.802853) + t * cast::<R>(0.010328));
    let den = R::one()
        + t * (cast::<R>(1.432788) + t * (cast::<R>(0.189269) + t * cast::<R>(0.001308)));
    let mut z = (t - num / den).max(R::zero());

    // 1 - Phi(0) = 0.5 > alpha and 1 - Phi(t) <= exp(-t^2/2)/2 = alpha/2,
    // so [0, t] brackets the root.
    let mut lo = R::zero();
    let mut hi = t;
    z = z.min(hi).max(lo);
    for _ in 0..100 {
        let g = std_normal_sf(z) - alpha;
        if g > R::zero() {
            lo = z;
        } else {
            hi = z;
        }
        let density = std_normal_pdf(z);
        let step = g / density;
        let mut next = z + step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = half * (lo + hi);
        }
        if (next - z).abs() <= R::epsilon() * (R::one() + z.abs()) {
            return Ok(next);
        }
        z = next;
    }
    Ok(z)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre polynomial from the Chebyshev-angle initial guess.
struct GaussLegendre<R> {
    nodes: Vec<R>,
    weights: Vec<R>,
}

impl<R: Real> GaussLegendre<R> {
    fn new(order: usize) -> Self {
        let mut nodes = vec![R::zero(); order];
        let mut weights = vec![R::zero(); order];
        let order_r = cast_usize::<R>(order);
        for i in 0..order {
            let angle = std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5);
            let mut x = cast::<R>(angle.cos());
            let mut derivative = R::one();
            for _ in 0..100 {
                // Evaluate P_order and its derivative by upward recurrence.
                let mut p_prev = R::one();
                let mut p = x;
                for m in 2..=order {
                    let m_r = cast_usize::<R>(m);
                    let next = ((cast::<R>(2.0) * m_r - R::one()) * x * p
                        - (m_r - R::one()) * p_prev)
                        / m_r;
                    p_prev = p;
                    p = next;
                }
                derivative = order_r * (x * p - p_prev) / (x * x - R::one());
                let step = p / derivative;
                x -= step;
                if step.abs() <= R::epsilon() * (R::one() + x.abs()) {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = cast::<R>(2.0) / ((R::one() - x * x) * derivative * derivative);
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over `[a, b]` split into `panels` equal panels.
    fn integrate_panels<F: Fn(R) -> R>(&self, a: R, b: R, panels: usize, f: F) -> R {
        let width = (b - a) / cast_usize::<R>(panels);
        let half = cast::<R>(0.5);
        let mut total = CompensatedSum::new();
        for panel in 0..panels {
            let left = a + width * cast_usize::<R>(panel);
            let mid = left + half * width;
            let scale = half * width;
            for (&node, &weight) in self.nodes.iter().zip(&self.weights) {
                total.add(weight * f(mid + scale * node) * scale);
            }
        }
        total.value()
    }
}

/// Adaptive composite quadrature over `[0, truncation]`: the panel count
/// doubles until successive estimates agree to `QUAD_REFINE_TOL`.
fn integrate_adaptive<R: Real, F: Fn(R) -> R>(spec: &QuadratureSpec<R>, f: F) -> R {
    let rule = GaussLegendre::<R>::new(PANEL_ORDER);
    let mut panels = (spec.nodes / PANEL_ORDER).max(2);
    let mut estimate =
        rule.integrate_panels(R::zero(), spec.truncation, panels, &f);
    let tol = cast::<R>(QUAD_REFINE_TOL).max(cast::<R>(16.0) * R::epsilon());
    while panels < MAX_PANELS {
        panels *= 2;
        let refined = rule.integrate_panels(R::zero(), spec.truncation, panels, &f);
        let done = (refined - estimate).abs() < tol;
        estimate = refined;
        if done {
            break;
        }
    }
    estimate
}

fn sqrt_2_over_pi<R: Real>() -> R {
    cast::<R>((2.0 / std::f64::consts::PI).sqrt())
}

/// CDF of `Z1 + s|Z2|` at `x`, for `s >= 0`.
pub fn psi_cdf<R: Real>(x: R, s: R, spec: &QuadratureSpec<R>) -> R {
    assert!(s >= R::zero() && s.is_finite(), "mixture ratio must be >= 0");
    if s == R::zero() {
        return std_normal_cdf(x);
    }
    let half = cast::<R>(0.5);
    let value = sqrt_2_over_pi::<R>()
        * integrate_adaptive(spec, |t| std_normal_cdf(x - s * t) * (-half * t * t).exp());
    value.min(R::one()).max(R::zero())
}

/// Upper tail `1 - Psi(x, s)`, integrating the normal survival function so
/// small tail probabilities keep relative accuracy.
pub fn psi_sf<R: Real>(x: R, s: R, spec: &QuadratureSpec<R>) -> R {
    assert!(s >= R::zero() && s.is_finite(), "mixture ratio must be >= 0");
    if s == R::zero() {
        return std_normal_sf(x);
    }
    let half = cast::<R>(0.5);
    let value = sqrt_2_over_pi::<R>()
        * integrate_adaptive(spec, |t| std_normal_sf(x - s * t) * (-half * t * t).exp());
    value.min(R::one()).max(R::zero())
}

/// Density of `Z1 + s|Z2|` at `x` (the x-derivative of `psi_cdf`).
pub fn psi_pdf<R: Real>(x: R, s: R, spec: &QuadratureSpec<R>) -> R {
    assert!(s >= R::zero() && s.is_finite(), "mixture ratio must be >= 0");
    if s == R::zero() {
        return std_normal_pdf(x);
    }
    let half = cast::<R>(0.5);
    sqrt_2_over_pi::<R>()
        * integrate_adaptive(spec, |t| std_normal_pdf(x - s * t) * (-half * t * t).exp())
}

/// Upper-tail critical value `psi_alpha(s)`: the root of
/// `1 - Psi(psi, s) = alpha`.
///
/// Newton steps use the density; any step that exits the current bracket is
/// replaced by bisection, so the iteration cannot escape.
pub fn psi_critical<R: Real>(query: CriticalQuery<R>, spec: &QuadratureSpec<R>) -> Result<R> {
    let alpha = query.alpha();
    let s = query.s();
    if s == R::zero() {
        return std_normal_quantile(alpha);
    }

    let z = std_normal_quantile(alpha)?;
    let mut lo = cast::<R>(-10.0);
    // For alpha below one half, z(1+s) overshoots the root since
    // P(Z1 + s|Z2| > z + s z) <= P(Z1 > z) = alpha, with slack added.
    let mut hi = (R::one() + s) * z.max(R::zero()) + cast::<R>(10.0);
    let mut expansions = 0;
    while psi_sf(hi, s, spec) > alpha {
        hi += (R::one() + s) * cast::<R>(10.0);
        expansions += 1;
        if expansions > 60 {
            return Err(GofError::NonConvergence(format!(
                "no upper bracket for psi critical value at alpha={alpha}, s={s}"
            )));
        }
    }

    // E|Z2| = sqrt(2/pi) shifts the bulk of the distribution.
    let mut x = (z + s * sqrt_2_over_pi::<R>()).max(lo).min(hi);
    let half = cast::<R>(0.5);
    // The f64 targets; the epsilon floors keep lower-precision scalars from
    // demanding residuals below their own quadrature accuracy.
    let residual_tol =
        (cast::<R>(CRITICAL_RESIDUAL_TOL) * cast::<R>(1e-2)).max(cast::<R>(16.0) * R::epsilon());
    let accept_tol = cast::<R>(CRITICAL_RESIDUAL_TOL).max(cast::<R>(128.0) * R::epsilon());
    let mut g = psi_sf(x, s, spec) - alpha;
    for _ in 0..NEWTON_MAX_ITER {
        if g.abs() <= residual_tol {
            return Ok(x);
        }
        if g > R::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let density = psi_pdf(x, s, spec);
        let mut next = x + g / density;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = half * (lo + hi);
        }
        if (next - x).abs() <= R::epsilon() * (R::one() + x.abs()) {
            x = next;
            g = psi_sf(x, s, spec) - alpha;
            break;
        }
        x = next;
        g = psi_sf(x, s, spec) - alpha;
    }
    if g.abs() <= accept_tol {
        Ok(x)
    } else {
        Err(GofError::NonConvergence(format!(
            "psi critical value stalled at alpha={alpha}, s={s}, residual={g}"
        )))
    }
}
