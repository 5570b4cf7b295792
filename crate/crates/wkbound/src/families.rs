//! Euler Beta function and closed-form uncertainty ratios for every
//! parametric family, used as analytic ground truth against the numerical
//! pipeline.
//!
//! All closed forms are Beta-function expressions of the kernel integrals:
//! positive power laws Φ ∝ |x|^{1/α}, negative (attractive) power laws
//! Φ = E₀ − A(L/|x|)^{1/α}, the finite square well, the two-stage infinite
//! well, and the exponential-profile (logarithmic-potential) shallow family.

use thiserror::Error;

use crate::quadrature::{integrate_singular, QuadratureError, SingularIntegralSpec};
use crate::semiclassical::{self, IntegralTriple, SemiclassicalError};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;
/// Stirling series threshold: the asymptotic tail is 1e−15-accurate here.
const STIRLING_MIN: f64 = 10.0;

#[derive(Debug, Error)]
pub enum FamiliesError {
    #[error("Beta arguments must be positive and finite, got ({x}, {y})")]
    NonPositiveBetaArg { x: f64, y: f64 },
    #[error("alpha = {alpha} outside the family domain (requires {requirement})")]
    AlphaOutOfDomain {
        alpha: f64,
        requirement: &'static str,
    },
    #[error("invalid family parameters: {0}")]
    InvalidParameters(String),
    #[error("profile polynomial must vanish at 0 and be non-trivial")]
    InvalidPolynomial,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Semiclassical(#[from] SemiclassicalError),
}

/// U of the square well, π/(2√3) ≈ 0.9069: the semiclassical floor.
pub fn square_well_u() -> f64 {
    std::f64::consts::PI / (2.0 * 3.0f64.sqrt())
}

/// U of the shallow limit, √(π/(2√3)) ≈ 0.9523: midpoint of the double bound.
pub fn shallow_u() -> f64 {
    square_well_u().sqrt()
}

/// Bernoulli-series correction `ln Γ(x) − [(x−½)ln x − x + ½ln 2π]`, x ≥ 10.
fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        + r2 * (-1.0 / 360.0
            + r2 * (1.0 / 1260.0
                + r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0))))))
}

/// ln Γ(x) for x > 0 via the Stirling series with upward recurrence below
/// the series threshold.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    let mut y = x;
    while y < STIRLING_MIN {
        shift += y.ln();
        y += 1.0;
    }
    (y - 0.5) * y.ln() - y + LN_SQRT_2PI + stirling_tail(y) - shift
}

/// ln Γ(b) − ln Γ(b + a) for b ≥ 10, a ≥ 0, grouped so no large terms cancel.
fn ln_gamma_ratio(b: f64, a: f64) -> f64 {
    let s = a + b;
    -(b - 0.5) * (a / b).ln_1p() - a * s.ln() + a + stirling_tail(b) - stirling_tail(s)
}

/// ln B(x, y).
pub(crate) fn ln_beta(x: f64, y: f64) -> f64 {
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    if a >= STIRLING_MIN {
        let s = a + b;
        (a - 0.5) * (a / s).ln() - (b - 0.5) * (a / b).ln_1p() - 0.5 * s.ln()
            + LN_SQRT_2PI
            + stirling_tail(a)
            + stirling_tail(b)
            - stirling_tail(s)
    } else if b >= STIRLING_MIN {
        ln_gamma(a) + ln_gamma_ratio(b, a)
    } else {
        ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
    }
}

/// Validated positive real arguments of the Beta function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaArgs {
    x: f64,
    y: f64,
}

impl BetaArgs {
    pub fn new(x: f64, y: f64) -> Result<Self, FamiliesError> {
        if !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(FamiliesError::NonPositiveBetaArg { x, y });
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// B(x, y) = Γ(x)Γ(y)/Γ(x+y), computed through log-Gamma.
    pub fn value(&self) -> f64 {
        ln_beta(self.x, self.y).exp()
    }
}

/// B(x, y) for positive real arguments.
pub fn beta(x: f64, y: f64) -> Result<f64, FamiliesError> {
    Ok(BetaArgs::new(x, y)?.value())
}

/// Small-α pole behaviour B(α, ½) ~ 1/α (diagnostic asymptote).
pub fn beta_half_small_alpha(alpha: f64) -> f64 {
    1.0 / alpha
}

/// Large-α behaviour B(α, ½) ~ √(π/α) (diagnostic asymptote).
pub fn beta_half_large_alpha(alpha: f64) -> f64 {
    (std::f64::consts::PI / alpha).sqrt()
}

/// Triple of the extremal profile ℓ = A√(V−V₀):
/// I = (π/2)AΔ, J = (π/2)A, K = (π/4)A³Δ.
pub fn harmonic_triple(amplitude: f64, v0: f64, e: f64) -> Result<IntegralTriple, FamiliesError> {
    if !(amplitude > 0.0) || !(e > v0) {
        return Err(FamiliesError::InvalidParameters(format!(
            "need A > 0 and E > V0, got A={amplitude}, V0={v0}, E={e}"
        )));
    }
    let half_pi = 0.5 * std::f64::consts::PI;
    let delta = e - v0;
    Ok(IntegralTriple::new(
        e,
        half_pi * amplitude * delta,
        half_pi * amplitude,
        0.5 * half_pi * amplitude.powi(3) * delta,
    )?)
}

/// Square-well triple: I = 2L√Δ, J = L/√Δ, K = L³/(3√Δ).
pub fn finite_well_triple(width: f64, v0: f64, e: f64) -> Result<IntegralTriple, FamiliesError> {
    if !(width > 0.0) || !(e > v0) {
        return Err(FamiliesError::InvalidParameters(format!(
            "need L > 0 and E > V0, got L={width}, V0={v0}, E={e}"
        )));
    }
    let delta = e - v0;
    Ok(IntegralTriple::new(
        e,
        2.0 * width * delta.sqrt(),
        width / delta.sqrt(),
        width.powi(3) / (3.0 * delta.sqrt()),
    )?)
}

/// Positive power law Φ = A(|x|/L)^{1/α} + V₀ in Beta closed form.
pub fn positive_power_triple(
    alpha: f64,
    strength: f64,
    length_scale: f64,
    v0: f64,
    e: f64,
) -> Result<IntegralTriple, FamiliesError> {
    if !(alpha > 0.0) {
        return Err(FamiliesError::AlphaOutOfDomain {
            alpha,
            requirement: "alpha > 0",
        });
    }
    if !(strength > 0.0) || !(length_scale > 0.0) || !(e > v0) {
        return Err(FamiliesError::InvalidParameters(format!(
            "need A > 0, L > 0, E > V0; got A={strength}, L={length_scale}, V0={v0}, E={e}"
        )));
    }
    let delta = e - v0;
    // Logs keep extreme α well-conditioned: each piece is exp(ln ...).
    let base = (delta / strength).ln() * alpha;
    let i = 2.0 * length_scale * delta.sqrt() * (base + ln_beta(alpha + 1.0, 0.5)).exp();
    let j = 2.0 * alpha * length_scale / delta.sqrt() * (base + ln_beta(alpha, 0.5)).exp();
    let k = 8.0 * alpha * length_scale.powi(3) / delta.sqrt()
        * (3.0 * base + ln_beta(3.0 * alpha, 0.5)).exp();
    Ok(IntegralTriple::new(e, i, j, k)?)
}

/// Negative power law Φ = E₀ − A(L/|x|)^{1/α} in Beta closed form (α > ½).
pub fn negative_power_triple(
    alpha: f64,
    strength: f64,
    length_scale: f64,
    e0: f64,
    e: f64,
) -> Result<IntegralTriple, FamiliesError> {
    if !(alpha > 0.5) {
        return Err(FamiliesError::AlphaOutOfDomain {
            alpha,
            requirement: "alpha > 1/2 (below it the spectrum is unbounded from below)",
        });
    }
    if !(strength > 0.0) || !(length_scale > 0.0) || !(e < e0) {
        return Err(FamiliesError::InvalidParameters(format!(
            "need A > 0, L > 0, E < E0; got A={strength}, L={length_scale}, E0={e0}, E={e}"
        )));
    }
    let gap = e0 - e;
    let base = (strength / gap).ln() * alpha;
    let i = 2.0 * length_scale * gap.sqrt() * (base + ln_beta(alpha - 0.5, 0.5)).exp();
    let j = 2.0 * alpha * length_scale / gap.sqrt() * (base + ln_beta(alpha + 0.5, 0.5)).exp();
    let k = 8.0 * alpha * length_scale.powi(3) / gap.sqrt()
        * (3.0 * base + ln_beta(3.0 * alpha + 0.5, 0.5)).exp();
    Ok(IntegralTriple::new(e, i, j, k)?)
}

/// U(α) for positive power laws:
/// π/B(α+1,½) · √( B(3α,½) / (2(α+½) B(α,½)) ). E-independent.
pub fn u_positive_power(alpha: f64) -> Result<f64, FamiliesError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(FamiliesError::AlphaOutOfDomain {
            alpha,
            requirement: "alpha > 0",
        });
    }
    let ln_u = std::f64::consts::PI.ln() - ln_beta(alpha + 1.0, 0.5)
        + 0.5 * (ln_beta(3.0 * alpha, 0.5) - (2.0 * alpha + 1.0).ln() - ln_beta(alpha, 0.5));
    Ok(ln_u.exp())
}

/// U(α) for negative power laws:
/// π/B(α−½,½) · √( B(3α+½,½) / (2(α−½) B(α+½,½)) ). E-independent; tends to
/// 0 at the α → ½⁺ stability threshold.
pub fn u_negative_power(alpha: f64) -> Result<f64, FamiliesError> {
    if !(alpha > 0.5) || !alpha.is_finite() {
        return Err(FamiliesError::AlphaOutOfDomain {
            alpha,
            requirement: "alpha > 1/2 (inverse-square instability threshold)",
        });
    }
    let ln_u = std::f64::consts::PI.ln() - ln_beta(alpha - 0.5, 0.5)
        + 0.5
            * (ln_beta(3.0 * alpha + 0.5, 0.5)
                - (2.0 * (alpha - 0.5)).ln()
                - ln_beta(alpha + 0.5, 0.5));
    Ok(ln_u.exp())
}

/// Two-stage well triple and ratio.
#[derive(Debug, Clone, Copy)]
pub struct TwoStageResult {
    pub triple: IntegralTriple,
    pub u: f64,
}

/// Exact triple of the two-stage infinite well ℓ = L₀θ(V−V₀) + L₁θ(V−V₁)
/// and its uncertainty ratio. For E ≤ V₁ the outer stage is inaccessible and
/// the result reduces to the single well of width L₀.
pub fn two_stage_triple(
    width0: f64,
    width1: f64,
    v0: f64,
    v1: f64,
    e: f64,
) -> Result<TwoStageResult, FamiliesError> {
    if !(v0 <= v1) || !(width0 >= 0.0) || !(width1 >= 0.0) {
        return Err(FamiliesError::InvalidParameters(format!(
            "need V0 <= V1 and L0, L1 >= 0; got V0={v0}, V1={v1}, L0={width0}, L1={width1}"
        )));
    }
    if !(e > v0) {
        return Err(FamiliesError::InvalidParameters(format!(
            "energy must lie above the floor: E={e}, V0={v0}"
        )));
    }
    let mut i = 2.0 * width0 * (e - v0).sqrt();
    let mut j = width0 / (e - v0).sqrt();
    let mut k = width0.powi(3) / (3.0 * (e - v0).sqrt());
    if e > v1 && width1 > 0.0 {
        let total = width0 + width1;
        i += 2.0 * width1 * (e - v1).sqrt();
        j += width1 / (e - v1).sqrt();
        k += (total.powi(3) - width0.powi(3)) / (3.0 * (e - v1).sqrt());
    }
    let triple = IntegralTriple::new(e, i, j, k)?;
    let u = semiclassical::uncertainty_ratio(&triple)?;
    Ok(TwoStageResult { triple, u })
}

/// Result of the shallow (logarithmic-potential) family evaluation.
#[derive(Debug, Clone, Copy)]
pub struct LogShallowResult {
    pub u: f64,
    /// α(E−V₀): the shallowness parameter.
    pub alpha_delta: f64,
    /// Whether α(E−V₀) ≥ 10, where the asymptotic value applies.
    pub in_shallow_regime: bool,
    /// The asymptotic reference √(π/(2√3)).
    pub shallow_reference: f64,
}

/// U for the profile ℓ(V) = P(V−V₀)·e^{α(V−V₀)} by direct quadrature.
///
/// P is given by coefficients from degree 0 upward and must vanish at 0.
/// The profile is internally rescaled by e^{−αΔ} (U is scale-invariant), so
/// arbitrarily large αΔ stays inside f64 range.
pub fn u_logarithmic(
    coefficients: &[f64],
    alpha: f64,
    v0: f64,
    e: f64,
) -> Result<LogShallowResult, FamiliesError> {
    if coefficients.first().map(|c| *c != 0.0).unwrap_or(true)
        || coefficients.iter().all(|c| *c == 0.0)
        || coefficients.iter().any(|c| !c.is_finite() || *c < 0.0)
    {
        return Err(FamiliesError::InvalidPolynomial);
    }
    if !(alpha > 0.0) || !(e > v0) {
        return Err(FamiliesError::InvalidParameters(format!(
            "need alpha > 0 and E > V0, got alpha={alpha}, V0={v0}, E={e}"
        )));
    }
    let delta = e - v0;
    let alpha_delta = alpha * delta;
    let poly = coefficients.to_vec();
    let eval_poly = move |z: f64| poly.iter().rev().fold(0.0, |acc, c| acc * z + c);
    let dcoeffs: Vec<f64> = coefficients
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect();
    let eval_dpoly = move |z: f64| dcoeffs.iter().rev().fold(0.0, |acc, c| acc * z + c);

    // Rescaled profile ℓ̃ = P(z)e^{α(z−Δ)}; peaked at z = Δ, underflows (to an
    // exact 0) far below the peak where the true contribution is negligible.
    let ell = |v: f64| {
        let z = v - v0;
        eval_poly(z) * (alpha * (z - delta)).exp()
    };
    let ell_prime = |v: f64| {
        let z = v - v0;
        (eval_dpoly(z) + alpha * eval_poly(z)) * (alpha * (z - delta)).exp()
    };
    let rel_tol = 1e-10;
    let i = integrate_singular(&SingularIntegralSpec::new(&ell, v0, e).with_rel_tol(rel_tol))?;
    let jf = |v: f64| ell_prime(v);
    let j = integrate_singular(&SingularIntegralSpec::new(&jf, v0, e).with_rel_tol(rel_tol))?;
    let kf = |v: f64| {
        let l = ell(v);
        l * l * ell_prime(v)
    };
    let k = integrate_singular(&SingularIntegralSpec::new(&kf, v0, e).with_rel_tol(rel_tol))?;
    let triple = IntegralTriple::new(e, i.value, j.value, k.value.max(0.0))?;
    Ok(LogShallowResult {
        u: semiclassical::uncertainty_ratio(&triple)?,
        alpha_delta,
        in_shallow_regime: alpha_delta >= 10.0,
        shallow_reference: shallow_u(),
    })
}
