//! Potentials Φ(x) and their accessible-length profiles ℓ(V).
//!
//! Every supported potential is even, Φ(x) = Φ(−x), and non-decreasing for
//! x ≥ 0, so the classically accessible region {x : Φ(x) ≤ V} is an interval
//! and its length is ℓ(V) = 2·Φ⁻¹(V), twice the positive inverse branch.
//! Step families (wells) use the convention ℓ(V₀) = 0 at the exact jump
//! level, matching the boundary condition of the transform theory.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An energy bound that may be infinite. Infinities are explicit flags and
/// never enter arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    NegInfinity,
    PosInfinity,
}

impl Bound {
    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Is `e` strictly above this bound (taken as a lower limit)?
    pub fn strictly_below(self, e: f64) -> bool {
        match self {
            Bound::Finite(v) => e > v,
            Bound::NegInfinity => true,
            Bound::PosInfinity => false,
        }
    }

    /// Is `e` strictly below this bound (taken as an upper limit)?
    pub fn strictly_above(self, e: f64) -> bool {
        match self {
            Bound::Finite(v) => e < v,
            Bound::PosInfinity => true,
            Bound::NegInfinity => false,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::NegInfinity => write!(f, "-inf"),
            Bound::PosInfinity => write!(f, "+inf"),
        }
    }
}

/// An accessible length, flagged when the region is no longer bounded
/// (energy at or above the continuum limit of a bounded potential).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Length {
    Finite(f64),
    Unbounded,
}

impl Length {
    pub fn finite(self) -> Option<f64> {
        match self {
            Length::Finite(v) => Some(v),
            Length::Unbounded => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("invalid potential spec: {0}")]
    InvalidSpec(String),
    #[error("energy {v} lies below the potential floor {v0}")]
    BelowFloor { v: f64, v0: f64 },
    #[error("assumption check failed: {0} grid violations (first at index {1})")]
    AssumptionViolation(usize, usize),
    #[error("invalid length profile: {0}")]
    InvalidProfile(String),
}

/// Parametric or tabulated even potential. All families are functions of |x|.
///
/// Serialized as a tagged JSON object, e.g.
/// `{"family":"positive_power","alpha":1.0,"A":1.0,"L":1.0,"V0":0.0}` or
/// `{"family":"tabulated","x":[...],"phi":[...]}` with `x ≥ 0` strictly
/// increasing from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// Φ(x) = V₀ + (2x/A)²; the profile is ℓ(V) = A√(V−V₀).
    Harmonic {
        #[serde(rename = "A")]
        amplitude: f64,
        #[serde(rename = "V0")]
        v0: f64,
    },
    /// Φ(x) = A(|x|/L)^{1/α} + V₀; ℓ(V) = 2L((V−V₀)/A)^α.
    PositivePower {
        alpha: f64,
        #[serde(rename = "A")]
        strength: f64,
        #[serde(rename = "L")]
        length_scale: f64,
        #[serde(rename = "V0")]
        v0: f64,
    },
    /// Φ(x) = E₀ − A(L/|x|)^{1/α}; ℓ(V) = 2L(A/(E₀−V))^α, V₀ = −∞.
    ///
    /// Requires α > 1/2: below that threshold the spectrum is unbounded
    /// from below and there is no ground state.
    NegativePower {
        alpha: f64,
        #[serde(rename = "A")]
        strength: f64,
        #[serde(rename = "L")]
        length_scale: f64,
        #[serde(rename = "E0")]
        e0: f64,
    },
    /// Φ = V₀ for |x| < L/2, E₀ outside; ℓ(V) = L on (V₀, E₀).
    FiniteWell {
        #[serde(rename = "V0")]
        v0: f64,
        #[serde(rename = "E0")]
        e0: f64,
        #[serde(rename = "L")]
        width: f64,
    },
    /// Two floors V₀ ≤ V₁ with widths L₀, L₁ and an infinite outer wall;
    /// ℓ(V) = L₀·θ(V−V₀) + L₁·θ(V−V₁).
    TwoStageWell {
        #[serde(rename = "V0")]
        v0: f64,
        #[serde(rename = "V1")]
        v1: f64,
        #[serde(rename = "L0")]
        width0: f64,
        #[serde(rename = "L1")]
        width1: f64,
    },
    /// Profile-defined family ℓ(V) = P(V−V₀)·e^{α(V−V₀)} with P a polynomial
    /// vanishing at 0 (coefficients from degree 0 upward, all ≥ 0).
    Logarithmic {
        #[serde(rename = "P")]
        coefficients: Vec<f64>,
        alpha: f64,
        #[serde(rename = "V0")]
        v0: f64,
    },
    /// Even potential sampled on the half-axis: x strictly increasing from 0,
    /// phi non-decreasing.
    #[serde(rename = "tabulated")]
    TabulatedEven { x: Vec<f64>, phi: Vec<f64> },
}

fn poly_eval(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

/// P′ coefficients from P coefficients.
fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| j as f64 * c)
        .collect()
}

impl PotentialSpec {
    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        let spec: PotentialSpec = serde_json::from_str(text)
            .map_err(|e| ProfileError::InvalidSpec(format!("JSON parse error: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("potential spec serializes")
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let bad = |msg: String| Err(ProfileError::InvalidSpec(msg));
        match self {
            PotentialSpec::Harmonic { amplitude, v0 } => {
                if !(*amplitude > 0.0) || !amplitude.is_finite() {
                    return bad(format!(
                        "harmonic amplitude A must be positive, got {amplitude}"
                    ));
                }
                if !v0.is_finite() {
                    return bad(format!("V0 must be finite, got {v0}"));
                }
            }
            PotentialSpec::PositivePower {
                alpha,
                strength,
                length_scale,
                v0,
            } => {
                if !(*alpha > 0.0) || !alpha.is_finite() {
                    return bad(format!("positive power law needs alpha > 0, got {alpha}"));
                }
                if !(*strength > 0.0) || !(*length_scale > 0.0) {
                    return bad(format!(
                        "positive power law needs A > 0 and L > 0, got A={strength}, L={length_scale}"
                    ));
                }
                if !v0.is_finite() {
                    return bad(format!("V0 must be finite, got {v0}"));
                }
            }
            PotentialSpec::NegativePower {
                alpha,
                strength,
                length_scale,
                e0,
            } => {
                if !(*alpha > 0.5) || !alpha.is_finite() {
                    return bad(format!(
                        "negative power law needs alpha > 1/2 (no ground state below the \
                         inverse-square threshold), got {alpha}"
                    ));
                }
                if !(*strength > 0.0) || !(*length_scale > 0.0) || !e0.is_finite() {
                    return bad(format!(
                        "negative power law needs A > 0, L > 0, finite E0; got A={strength}, \
                         L={length_scale}, E0={e0}"
                    ));
                }
            }
            PotentialSpec::FiniteWell { v0, e0, width } => {
                if !(v0 < e0) {
                    return bad(format!("finite well needs V0 < E0, got V0={v0}, E0={e0}"));
                }
                if !(*width > 0.0) {
                    return bad(format!("finite well needs L > 0, got {width}"));
                }
            }
            PotentialSpec::TwoStageWell {
                v0,
                v1,
                width0,
                width1,
            } => {
                if !(v0 <= v1) {
                    return bad(format!(
                        "two-stage well needs V0 <= V1, got V0={v0}, V1={v1}"
                    ));
                }
                if !(*width0 >= 0.0) || !(*width1 >= 0.0) || width0 + width1 <= 0.0 {
                    return bad(format!(
                        "two-stage well needs L0, L1 >= 0 with L0+L1 > 0, got L0={width0}, L1={width1}"
                    ));
                }
            }
            PotentialSpec::Logarithmic {
                coefficients,
                alpha,
                v0,
            } => {
                if !(*alpha > 0.0) || !alpha.is_finite() || !v0.is_finite() {
                    return bad("logarithmic family needs alpha > 0 and finite V0".to_string());
                }
                if coefficients.first().map(|c| *c != 0.0).unwrap_or(true) {
                    return bad("polynomial P must have a root at 0 (constant term 0)".to_string());
                }
                if coefficients.iter().any(|c| !c.is_finite() || *c < 0.0) {
                    return bad("polynomial P needs finite non-negative coefficients".to_string());
                }
                if coefficients.iter().all(|c| *c == 0.0) {
                    return bad("polynomial P must not vanish identically".to_string());
                }
            }
            PotentialSpec::TabulatedEven { x, phi } => {
                if x.len() != phi.len() || x.len() < 2 {
                    return bad(format!(
                        "tabulated potential needs matching x and phi with at least 2 samples, \
                         got {} and {}",
                        x.len(),
                        phi.len()
                    ));
                }
                if x[0] != 0.0 {
                    return bad(format!("tabulated x grid must start at 0, got {}", x[0]));
                }
                for pair in x.windows(2) {
                    if !(pair[0] < pair[1]) {
                        return bad(format!(
                            "tabulated x grid must be strictly increasing, got {} then {}",
                            pair[0], pair[1]
                        ));
                    }
                }
                if x.iter().chain(phi.iter()).any(|v| !v.is_finite()) {
                    return bad("tabulated samples must be finite".to_string());
                }
                // Monotonicity is reported by validate_assumptions, not here.
            }
        }
        Ok(())
    }

    /// Infimum of the potential.
    pub fn v0(&self) -> Bound {
        match self {
            PotentialSpec::Harmonic { v0, .. }
            | PotentialSpec::PositivePower { v0, .. }
            | PotentialSpec::FiniteWell { v0, .. }
            | PotentialSpec::TwoStageWell { v0, .. }
            | PotentialSpec::Logarithmic { v0, .. } => Bound::Finite(*v0),
            PotentialSpec::NegativePower { .. } => Bound::NegInfinity,
            PotentialSpec::TabulatedEven { phi, .. } => Bound::Finite(phi[0]),
        }
    }

    /// Continuum limit: supremum of the potential.
    pub fn e0(&self) -> Bound {
        match self {
            PotentialSpec::Harmonic { .. }
            | PotentialSpec::PositivePower { .. }
            | PotentialSpec::TwoStageWell { .. }
            | PotentialSpec::Logarithmic { .. } => Bound::PosInfinity,
            PotentialSpec::NegativePower { e0, .. } | PotentialSpec::FiniteWell { e0, .. } => {
                Bound::Finite(*e0)
            }
            PotentialSpec::TabulatedEven { phi, .. } => {
                Bound::Finite(*phi.last().expect("validated non-empty"))
            }
        }
    }

    /// Half-width of an infinite outer wall, when the family has one.
    pub fn hard_wall_half_width(&self) -> Option<f64> {
        match self {
            PotentialSpec::TwoStageWell { width0, width1, .. } => Some(0.5 * (width0 + width1)),
            _ => None,
        }
    }

    /// Pointwise potential value. Beyond an infinite wall this returns +∞
    /// (as a comparison value, not for arithmetic). For the negative power
    /// law Φ(0) = −∞.
    pub fn phi(&self, x: f64) -> f64 {
        let r = x.abs();
        match self {
            PotentialSpec::Harmonic { amplitude, v0 } => {
                let s = 2.0 * r / amplitude;
                v0 + s * s
            }
            PotentialSpec::PositivePower {
                alpha,
                strength,
                length_scale,
                v0,
            } => v0 + strength * (r / length_scale).powf(1.0 / alpha),
            PotentialSpec::NegativePower {
                alpha,
                strength,
                length_scale,
                e0,
            } => {
                if r == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    e0 - strength * (length_scale / r).powf(1.0 / alpha)
                }
            }
            PotentialSpec::FiniteWell { v0, e0, width } => {
                if r < 0.5 * width {
                    *v0
                } else {
                    *e0
                }
            }
            PotentialSpec::TwoStageWell {
                v0,
                v1,
                width0,
                width1,
            } => {
                if r < 0.5 * width0 {
                    *v0
                } else if r < 0.5 * (width0 + width1) {
                    *v1
                } else {
                    f64::INFINITY
                }
            }
            PotentialSpec::Logarithmic {
                coefficients,
                alpha,
                v0,
            } => v0 + invert_log_profile(coefficients, *alpha, 2.0 * r),
            PotentialSpec::TabulatedEven { x, phi } => {
                if r >= *x.last().unwrap() {
                    *phi.last().unwrap()
                } else {
                    let idx = x.partition_point(|&xx| xx <= r) - 1;
                    let (x0, x1) = (x[idx], x[idx + 1]);
                    let (p0, p1) = (phi[idx], phi[idx + 1]);
                    p0 + (p1 - p0) * (r - x0) / (x1 - x0)
                }
            }
        }
    }

    /// ℓ(V) = 2·Φ⁻¹(V): the length of the accessible interval at level V.
    ///
    /// Exactly `Length::Finite(0.0)` at V = V₀. Returns `Length::Unbounded`
    /// when V reaches the continuum limit of a bounded potential and the
    /// accessible region is no longer an interval of finite length.
    pub fn accessible_length(&self, v: f64) -> Result<Length, ProfileError> {
        if let Bound::Finite(v0) = self.v0() {
            if v < v0 {
                return Err(ProfileError::BelowFloor { v, v0 });
            }
            if v == v0 {
                return Ok(Length::Finite(0.0));
            }
        }
        let len = match self {
            PotentialSpec::Harmonic { amplitude, v0 } => amplitude * (v - v0).sqrt(),
            PotentialSpec::PositivePower {
                alpha,
                strength,
                length_scale,
                v0,
            } => 2.0 * length_scale * ((v - v0) / strength).powf(*alpha),
            PotentialSpec::NegativePower {
                alpha,
                strength,
                length_scale,
                e0,
            } => {
                if v >= *e0 {
                    return Ok(Length::Unbounded);
                }
                2.0 * length_scale * (strength / (e0 - v)).powf(*alpha)
            }
            PotentialSpec::FiniteWell { e0, width, .. } => {
                if v >= *e0 {
                    return Ok(Length::Unbounded);
                }
                *width
            }
            PotentialSpec::TwoStageWell {
                v1, width0, width1, ..
            } => {
                if v > *v1 {
                    width0 + width1
                } else {
                    *width0
                }
            }
            PotentialSpec::Logarithmic {
                coefficients,
                alpha,
                v0,
            } => {
                let z = v - v0;
                poly_eval(coefficients, z) * (alpha * z).exp()
            }
            PotentialSpec::TabulatedEven { x, phi } => {
                let top = *phi.last().unwrap();
                if v >= top {
                    return Ok(Length::Unbounded);
                }
                // Rightmost grid position with phi <= v, then linear
                // interpolation into the next strictly-increasing segment.
                let mut idx = phi.partition_point(|&p| p <= v);
                // idx is the first sample with phi > v; idx >= 1 since phi[0] = V0 < v.
                idx -= 1;
                let (x0, x1) = (x[idx], x[idx + 1]);
                let (p0, p1) = (phi[idx], phi[idx + 1]);
                2.0 * (x0 + (x1 - x0) * (v - p0) / (p1 - p0))
            }
        };
        Ok(Length::Finite(len))
    }
}

/// Solve P(z)·e^{αz} = target for z ≥ 0 (monotone for non-negative P).
fn invert_log_profile(coeffs: &[f64], alpha: f64, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let f = |z: f64| poly_eval(coeffs, z) * (alpha * z).exp();
    let mut hi = 1.0;
    while f(hi) < target && hi < 1e100 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Outcome of a single assumption check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionCheck {
    HoldsByConstruction,
    Verified,
    Failed,
}

/// A grid point at which Φ decreases on x ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridViolation {
    pub index: usize,
    pub x: f64,
    pub phi: f64,
    pub phi_prev: f64,
}

/// Report of the evenness / connectedness assumptions.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub evenness: AssumptionCheck,
    pub monotonicity: AssumptionCheck,
    pub violations: Vec<GridViolation>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.evenness != AssumptionCheck::Failed && self.monotonicity != AssumptionCheck::Failed
    }
}

/// Check the structural assumptions: Φ even, and Φ non-decreasing on x ≥ 0
/// so that every accessible region is a single interval.
///
/// Parametric families satisfy both by construction. Tabulated potentials are
/// even by their half-grid representation; monotonicity is verified within a
/// small relative tolerance and violations listed per grid point.
pub fn validate_assumptions(spec: &PotentialSpec) -> AssumptionReport {
    match spec {
        PotentialSpec::TabulatedEven { x, phi } => {
            let scale = phi.iter().fold(0.0f64, |m, p| m.max(p.abs())).max(1e-300);
            let tol = 1e-12 * scale;
            let mut violations = Vec::new();
            for i in 1..phi.len() {
                if phi[i] < phi[i - 1] - tol {
                    violations.push(GridViolation {
                        index: i,
                        x: x[i],
                        phi: phi[i],
                        phi_prev: phi[i - 1],
                    });
                }
            }
            AssumptionReport {
                evenness: AssumptionCheck::HoldsByConstruction,
                monotonicity: if violations.is_empty() {
                    AssumptionCheck::Verified
                } else {
                    AssumptionCheck::Failed
                },
                violations,
            }
        }
        _ => AssumptionReport {
            evenness: AssumptionCheck::HoldsByConstruction,
            monotonicity: AssumptionCheck::HoldsByConstruction,
            violations: Vec::new(),
        },
    }
}

type EnergyFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form profile over a finite floor: ℓ(V) = smooth(V)·(V−V₀)^q.
///
/// The factored form keeps the kernel quadrature exact for pure power laws
/// and well-conditioned for extreme exponents.
#[derive(Clone)]
pub struct ClosedFormProfile {
    pub(crate) v0: f64,
    pub(crate) exponent: f64,
    pub(crate) smooth: EnergyFn,
    /// ℓ′(V) = smooth_prime(V)·(V−V₀)^{q−1}, when analytically available.
    pub(crate) smooth_prime: Option<EnergyFn>,
    /// Direct potential Φ(x), when available (position-space fallbacks).
    pub(crate) phi: Option<EnergyFn>,
}

/// Power-decay profile with an infinite floor: ℓ(V) = amp·(E₀−V)^{−α}.
#[derive(Debug, Clone, Copy)]
pub struct PowerTailProfile {
    pub(crate) e0: f64,
    pub(crate) alpha: f64,
    pub(crate) amplitude: f64,
}

/// Piecewise-linear profile. A non-zero value at the first knot is an
/// implicit jump at V₀ (a well bottom); beyond the last knot the profile
/// continues as a constant (a hard wall).
#[derive(Debug, Clone)]
pub struct PiecewiseLinearProfile {
    pub(crate) v: Vec<f64>,
    pub(crate) ell: Vec<f64>,
}

/// Pure jump profile: ℓ(V) = Σᵢ Lᵢ θ(V−Vᵢ), with θ(0) = 0.
#[derive(Debug, Clone)]
pub struct StepProfile {
    pub(crate) jumps: Vec<(f64, f64)>,
}

#[derive(Clone)]
pub enum ProfileRepr {
    ClosedForm(ClosedFormProfile),
    PowerTail(PowerTailProfile),
    PiecewiseLinear(PiecewiseLinearProfile),
    Steps(StepProfile),
}

impl fmt::Debug for ProfileRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileRepr::ClosedForm(c) => f
                .debug_struct("ClosedForm")
                .field("v0", &c.v0)
                .field("exponent", &c.exponent)
                .finish_non_exhaustive(),
            ProfileRepr::PowerTail(t) => f
                .debug_struct("PowerTail")
                .field("alpha", &t.alpha)
                .finish(),
            ProfileRepr::PiecewiseLinear(p) => f
                .debug_struct("PiecewiseLinear")
                .field("knots", &p.v.len())
                .finish(),
            ProfileRepr::Steps(s) => f.debug_struct("Steps").field("jumps", &s.jumps).finish(),
        }
    }
}

/// Monotone accessible-length function ℓ(V) on [V₀, E₀).
#[derive(Debug, Clone)]
pub struct LengthProfile {
    v0: Bound,
    e0: Bound,
    repr: ProfileRepr,
    origin: Option<PotentialSpec>,
}

impl LengthProfile {
    /// Closed-form profile ℓ(V) = smooth(V)·(V−V₀)^q with an optional
    /// factored derivative ℓ′(V) = smooth_prime(V)·(V−V₀)^{q−1}.
    pub fn closed_form(
        v0: f64,
        e0: Bound,
        exponent: f64,
        smooth: EnergyFn,
        smooth_prime: Option<EnergyFn>,
    ) -> Result<Self, ProfileError> {
        if !v0.is_finite() {
            return Err(ProfileError::InvalidProfile(
                "closed-form profiles need a finite floor".into(),
            ));
        }
        if !(exponent > -1.0) {
            return Err(ProfileError::InvalidProfile(format!(
                "profile exponent must exceed -1, got {exponent}"
            )));
        }
        Ok(Self {
            v0: Bound::Finite(v0),
            e0,
            repr: ProfileRepr::ClosedForm(ClosedFormProfile {
                v0,
                exponent,
                smooth,
                smooth_prime,
                phi: None,
            }),
            origin: None,
        })
    }

    /// Closed-form profile from a bare ℓ(V) callable without a derivative;
    /// the kernel integrals fall back to differentiating I(E) for J and to a
    /// finite-difference ℓ′ for K, at reduced accuracy.
    pub fn closed_form_no_derivative(
        v0: f64,
        e0: Bound,
        ell: EnergyFn,
    ) -> Result<Self, ProfileError> {
        Self::closed_form(v0, e0, 0.0, ell, None)
    }

    pub fn piecewise_linear(v: Vec<f64>, ell: Vec<f64>) -> Result<Self, ProfileError> {
        if v.len() != ell.len() || v.len() < 2 {
            return Err(ProfileError::InvalidProfile(
                "piecewise-linear profile needs matching grids with at least 2 knots".into(),
            ));
        }
        for pair in v.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(ProfileError::InvalidProfile(format!(
                    "knot abscissae must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        for pair in ell.windows(2) {
            if pair[1] < pair[0] {
                return Err(ProfileError::InvalidProfile(format!(
                    "profile values must be non-decreasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if ell.iter().any(|l| *l < 0.0 || !l.is_finite()) {
            return Err(ProfileError::InvalidProfile(
                "profile values must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            v0: Bound::Finite(v[0]),
            e0: Bound::PosInfinity,
            repr: ProfileRepr::PiecewiseLinear(PiecewiseLinearProfile { v, ell }),
            origin: None,
        })
    }

    pub fn steps(jumps: Vec<(f64, f64)>, e0: Bound) -> Result<Self, ProfileError> {
        if jumps.is_empty() {
            return Err(ProfileError::InvalidProfile(
                "step profile needs at least one jump".into(),
            ));
        }
        for pair in jumps.windows(2) {
            if !(pair[0].0 < pair[1].0) {
                return Err(ProfileError::InvalidProfile(format!(
                    "jump levels must be strictly increasing, got {} then {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if jumps.iter().any(|(_, l)| *l < 0.0 || !l.is_finite()) {
            return Err(ProfileError::InvalidProfile(
                "jump widths must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            v0: Bound::Finite(jumps[0].0),
            e0,
            repr: ProfileRepr::Steps(StepProfile { jumps }),
            origin: None,
        })
    }

    /// Build the natural representation for a potential spec: jump lists for
    /// wells, closed forms otherwise, piecewise-linear for tabulated data.
    pub fn from_spec(spec: &PotentialSpec) -> Result<Self, ProfileError> {
        spec.validate()?;
        let mut profile = match spec {
            PotentialSpec::Harmonic { amplitude, v0 } => {
                let (a, base) = (*amplitude, *v0);
                let mut p = Self::closed_form(
                    base,
                    Bound::PosInfinity,
                    0.5,
                    Arc::new(move |_| a),
                    Some(Arc::new(move |_| 0.5 * a)),
                )?;
                if let ProfileRepr::ClosedForm(c) = &mut p.repr {
                    c.phi = Some(Arc::new(move |x: f64| {
                        let s = 2.0 * x.abs() / a;
                        base + s * s
                    }));
                }
                p
            }
            PotentialSpec::PositivePower {
                alpha,
                strength,
                length_scale,
                v0,
            } => {
                let (al, a, l, base) = (*alpha, *strength, *length_scale, *v0);
                let c0 = 2.0 * l / a.powf(al);
                let mut p = Self::closed_form(
                    base,
                    Bound::PosInfinity,
                    al,
                    Arc::new(move |_| c0),
                    Some(Arc::new(move |_| c0 * al)),
                )?;
                if let ProfileRepr::ClosedForm(c) = &mut p.repr {
                    c.phi = Some(Arc::new(move |x: f64| {
                        base + a * (x.abs() / l).powf(1.0 / al)
                    }));
                }
                p
            }
            PotentialSpec::NegativePower {
                alpha,
                strength,
                length_scale,
                e0,
            } => Self {
                v0: Bound::NegInfinity,
                e0: Bound::Finite(*e0),
                repr: ProfileRepr::PowerTail(PowerTailProfile {
                    e0: *e0,
                    alpha: *alpha,
                    amplitude: 2.0 * length_scale * strength.powf(*alpha),
                }),
                origin: None,
            },
            PotentialSpec::FiniteWell { v0, e0, width } => {
                Self::steps(vec![(*v0, *width)], Bound::Finite(*e0))?
            }
            PotentialSpec::TwoStageWell {
                v0,
                v1,
                width0,
                width1,
            } => {
                let jumps = if v0 == v1 {
                    vec![(*v0, width0 + width1)]
                } else if *width1 == 0.0 {
                    vec![(*v0, *width0)]
                } else if *width0 == 0.0 {
                    vec![(*v1, *width1)]
                } else {
                    vec![(*v0, *width0), (*v1, *width1)]
                };
                Self::steps(jumps, Bound::PosInfinity)?
            }
            PotentialSpec::Logarithmic {
                coefficients,
                alpha,
                v0,
            } => {
                // Lowest non-vanishing power k of P: ℓ = [P(z)/z^k · e^{αz}]·z^k.
                let k = coefficients
                    .iter()
                    .position(|c| *c != 0.0)
                    .expect("validated non-zero polynomial");
                let reduced: Vec<f64> = coefficients[k..].to_vec();
                let deriv = poly_derivative(coefficients);
                // (P′(z) + αP(z)) / z^{k−1}: both terms divide exactly.
                let dk = k - 1;
                let d_reduced: Vec<f64> = deriv[dk..].to_vec();
                let p_over_zk = reduced.clone();
                let (al, base) = (*alpha, *v0);
                let smooth = Arc::new(move |v: f64| {
                    let z = v - base;
                    poly_eval(&reduced, z) * (al * z).exp()
                });
                let smooth_prime = Arc::new(move |v: f64| {
                    let z = v - base;
                    (poly_eval(&d_reduced, z) + al * z * poly_eval(&p_over_zk, z)) * (al * z).exp()
                });
                let coeffs = coefficients.clone();
                let mut p = Self::closed_form(
                    base,
                    Bound::PosInfinity,
                    k as f64,
                    smooth,
                    Some(smooth_prime),
                )?;
                if let ProfileRepr::ClosedForm(c) = &mut p.repr {
                    c.phi = Some(Arc::new(move |x: f64| {
                        base + invert_log_profile(&coeffs, al, 2.0 * x.abs())
                    }));
                }
                p
            }
            PotentialSpec::TabulatedEven { x, phi } => {
                // Knots (Φᵢ, 2xᵢ); plateau runs keep only their rightmost
                // sample so knot abscissae stay strictly increasing. A flat
                // bottom then shows up as a non-zero first knot value, i.e.
                // an implicit jump at V₀.
                let mut v = Vec::with_capacity(phi.len());
                let mut ell = Vec::with_capacity(phi.len());
                for i in 0..phi.len() {
                    let next_same = i + 1 < phi.len() && phi[i + 1] == phi[i];
                    if next_same {
                        continue;
                    }
                    v.push(phi[i]);
                    ell.push(2.0 * x[i]);
                }
                if v.len() < 2 {
                    return Err(ProfileError::InvalidProfile(
                        "tabulated potential is constant; profile undefined".into(),
                    ));
                }
                let mut p = Self::piecewise_linear(v, ell)?;
                p.e0 = Bound::Finite(*phi.last().unwrap());
                p
            }
        };
        profile.origin = Some(spec.clone());
        Ok(profile)
    }

    pub fn v0(&self) -> Bound {
        self.v0
    }

    pub fn e0(&self) -> Bound {
        self.e0
    }

    pub fn repr(&self) -> &ProfileRepr {
        &self.repr
    }

    pub fn origin(&self) -> Option<&PotentialSpec> {
        self.origin.as_ref()
    }

    /// ℓ(V). Zero at and below a finite floor; callers keep V below E₀.
    pub fn ell(&self, v: f64) -> f64 {
        if let Bound::Finite(v0) = self.v0 {
            if v <= v0 {
                return 0.0;
            }
        }
        match &self.repr {
            ProfileRepr::ClosedForm(c) => {
                let u = v - c.v0;
                if c.exponent == 0.0 {
                    (c.smooth)(v)
                } else {
                    (c.smooth)(v) * u.powf(c.exponent)
                }
            }
            ProfileRepr::PowerTail(t) => {
                if v >= t.e0 {
                    f64::INFINITY
                } else {
                    t.amplitude * (t.e0 - v).powf(-t.alpha)
                }
            }
            ProfileRepr::PiecewiseLinear(p) => {
                let n = p.v.len();
                if v >= p.v[n - 1] {
                    return p.ell[n - 1];
                }
                let idx = p.v.partition_point(|&vv| vv <= v) - 1;
                let t = (v - p.v[idx]) / (p.v[idx + 1] - p.v[idx]);
                p.ell[idx] + t * (p.ell[idx + 1] - p.ell[idx])
            }
            ProfileRepr::Steps(s) => s
                .jumps
                .iter()
                .filter(|(level, _)| v > *level)
                .map(|(_, width)| width)
                .sum(),
        }
    }

    /// ℓ′(V) away from jumps. Steps have zero derivative between levels; the
    /// closed-form fallback differentiates ℓ numerically.
    pub fn ell_prime(&self, v: f64) -> f64 {
        match &self.repr {
            ProfileRepr::ClosedForm(c) => {
                let u = v - c.v0;
                if u <= 0.0 {
                    return 0.0;
                }
                match &c.smooth_prime {
                    Some(sp) => {
                        let q = c.exponent - 1.0;
                        if q == 0.0 {
                            sp(v)
                        } else {
                            sp(v) * u.powf(q)
                        }
                    }
                    None => {
                        let h = 1e-7 * u.max(1e-7);
                        (self.ell(v + h) - self.ell(v - h)) / (2.0 * h)
                    }
                }
            }
            ProfileRepr::PowerTail(t) => {
                if v >= t.e0 {
                    f64::INFINITY
                } else {
                    t.alpha * t.amplitude * (t.e0 - v).powf(-t.alpha - 1.0)
                }
            }
            ProfileRepr::PiecewiseLinear(p) => {
                let n = p.v.len();
                if v >= p.v[n - 1] || v < p.v[0] {
                    return 0.0;
                }
                let idx = p.v.partition_point(|&vv| vv <= v).saturating_sub(1);
                (p.ell[idx + 1] - p.ell[idx]) / (p.v[idx + 1] - p.v[idx])
            }
            ProfileRepr::Steps(_) => 0.0,
        }
    }
}
