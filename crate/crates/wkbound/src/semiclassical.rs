//! The kernel integrals I, J, K, the semiclassical state count N(E), the
//! uncertainty ratio U, and the diagnostic WKB wavefunction.
//!
//! For a profile ℓ(V) and energy E inside (V₀, E₀):
//!
//! ```text
//!   I(E) = ∫ ℓ(V) dV/√(E−V)          (∝ phase-space area, N(E) = √(2m)·I/h)
//!   J(E) = ∫ ℓ′(V) dV/√(E−V) = I′(E)
//!   K(E) = ∫ ℓ(V)²ℓ′(V) dV/√(E−V)
//!   U    = π/(√2·J) · √(K/I) = Δx·Δp/(ħN)
//! ```
//!
//! Step profiles evaluate through exact jump sums, piecewise-linear profiles
//! through exact per-segment antiderivatives, closed forms through the
//! adaptive singular quadrature, and power-tail profiles (V₀ = −∞) through
//! the substitution V = E₀ − (E₀−E)/s which maps them onto a finite-range
//! singular integral.

use std::sync::Arc;

use thiserror::Error;

use crate::exec;
use crate::profiles::{
    Bound, ClosedFormProfile, Length, LengthProfile, PotentialSpec, PowerTailProfile, ProfileError,
    ProfileRepr,
};
use crate::quadrature::{
    self, integrate_singular, QuadratureError, SingularIntegralSpec, StepPower,
};
use crate::units::Units;

pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SemiclassicalError {
    #[error("energy {e} outside the profile domain ({v0}, {e0})")]
    EnergyOutOfRange { e: f64, v0: String, e0: String },
    #[error("integral triple needs I > 0 and J > 0 (got I={i}, J={j})")]
    NonPositiveIntegrals { i: f64, j: f64 },
    #[error("integral components must be non-negative and finite: I={i}, J={j}, K={k}")]
    InvalidTriple { i: f64, j: f64, k: f64 },
    #[error("position {x} is at or beyond the classical turning point {turning_point}")]
    BeyondTurningPoint { x: f64, turning_point: f64 },
    #[error("uncertainty report violates Δx·Δp ≥ ħ/2: product {product:.6e} with ħ={hbar}")]
    HeisenbergViolation { product: f64, hbar: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// The values (I, J, K) at a fixed energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralTriple {
    pub e: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

impl IntegralTriple {
    pub fn new(e: f64, i: f64, j: f64, k: f64) -> Result<Self, SemiclassicalError> {
        if !(i >= 0.0)
            || !(j >= 0.0)
            || !(k >= 0.0)
            || !i.is_finite()
            || !j.is_finite()
            || !k.is_finite()
        {
            return Err(SemiclassicalError::InvalidTriple { i, j, k });
        }
        Ok(Self { e, i, j, k })
    }
}

/// How an uncertainty product was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Semiclassical,
    Exact,
}

/// Δx, Δp, N and U at one energy or for one bound state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport {
    pub e: f64,
    pub n: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    pub u: f64,
    pub method: Method,
}

impl UncertaintyReport {
    pub fn semiclassical(e: f64, n: f64, delta_x: f64, delta_p: f64, u: f64) -> Self {
        Self {
            e,
            n,
            delta_x,
            delta_p,
            u,
            method: Method::Semiclassical,
        }
    }

    /// Exact-method report; enforces the Heisenberg floor Δx·Δp ≥ ħ/2 up to
    /// a 1e−8 numerical slack.
    pub fn exact(
        e: f64,
        n: f64,
        delta_x: f64,
        delta_p: f64,
        units: Units,
    ) -> Result<Self, SemiclassicalError> {
        let product = delta_x * delta_p;
        if product < 0.5 * units.hbar() - 1e-8 {
            return Err(SemiclassicalError::HeisenbergViolation {
                product,
                hbar: units.hbar(),
            });
        }
        Ok(Self {
            e,
            n,
            delta_x,
            delta_p,
            u: product / (units.hbar() * n),
            method: Method::Exact,
        })
    }
}

fn check_energy(profile: &LengthProfile, e: f64) -> Result<(), SemiclassicalError> {
    let ok = profile.v0().strictly_below(e) && profile.e0().strictly_above(e);
    if !ok {
        return Err(SemiclassicalError::EnergyOutOfRange {
            e,
            v0: profile.v0().to_string(),
            e0: profile.e0().to_string(),
        });
    }
    Ok(())
}

/// Kernel moments Mₖ = ∫₀^{dw} δᵏ (w1−δ)^{−1/2} dδ for k = 0, 1, 2, in
/// cancellation-free closed form (all factors non-negative). `w1` is the
/// distance from the segment start to the energy, `dw` the segment width.
fn kernel_moments(w1: f64, dw: f64) -> (f64, f64, f64) {
    let w2 = w1 - dw;
    let (r1, r2) = (w1.sqrt(), w2.sqrt());
    let rsum = r1 + r2;
    let m0 = 2.0 * dw / rsum;
    let m1 = (2.0 / 3.0) * dw * dw * (rsum + r1) / (rsum * rsum);
    let m2 = (2.0 / 5.0) * dw * dw * dw * ((8.0 / 3.0) * r1 * r1 + 3.0 * r1 * r2 + r2 * r2)
        / (rsum * rsum * rsum);
    (m0, m1, m2)
}

/// Exact kernel integrals of one affine piece ℓ(V) = c + s·(V − v_lo) over
/// [v_lo, min(v_hi, e)]: returns the (I, J, K) contributions. Expanded in
/// δ = V − v_lo so that steep segments far below the energy stay exact
/// (every term is a product of non-negative factors).
pub(crate) fn affine_segment_triple(
    v_lo: f64,
    v_hi: f64,
    c: f64,
    s: f64,
    e: f64,
) -> (f64, f64, f64) {
    let hi = v_hi.min(e);
    if hi <= v_lo {
        return (0.0, 0.0, 0.0);
    }
    let w1 = e - v_lo;
    let dw = hi - v_lo;
    let (m0, m1, m2) = kernel_moments(w1, dw);
    let i = c * m0 + s * m1;
    let j = s * m0;
    let k = s * (c * c * m0 + 2.0 * c * s * m1 + s * s * m2);
    (i, j, k)
}

fn steps_triple(jumps: &[(f64, f64)], e: f64) -> Result<IntegralTriple, SemiclassicalError> {
    let i = 2.0 * quadrature::integrate_step_kernel(jumps, e, StepPower::SqrtGrowth)?;
    let j = quadrature::integrate_step_kernel(jumps, e, StepPower::InverseSqrt)?;
    // K weights are the increments of the cumulative width cubed.
    let mut cubed = Vec::with_capacity(jumps.len());
    let mut cum = 0.0;
    for &(level, width) in jumps {
        let prev = cum * cum * cum;
        cum += width;
        cubed.push((level, cum * cum * cum - prev));
    }
    let k = quadrature::integrate_step_kernel(&cubed, e, StepPower::InverseSqrt)? / 3.0;
    IntegralTriple::new(e, i, j, k)
}

fn pl_triple(v: &[f64], ell: &[f64], e: f64) -> Result<IntegralTriple, SemiclassicalError> {
    let mut i = 0.0;
    let mut j = 0.0;
    let mut k = 0.0;
    // Implicit jump at the first knot when ℓ starts positive (well bottom).
    if ell[0] > 0.0 {
        let jump = [(v[0], ell[0])];
        j += quadrature::integrate_step_kernel(&jump, e, StepPower::InverseSqrt)?;
        k += ell[0] * ell[0] * ell[0] / (3.0 * (e - v[0]).sqrt());
    }
    for idx in 0..v.len() - 1 {
        if v[idx] >= e {
            break;
        }
        let slope = (ell[idx + 1] - ell[idx]) / (v[idx + 1] - v[idx]);
        let (di, dj, dk) = affine_segment_triple(v[idx], v[idx + 1], ell[idx], slope, e);
        i += di;
        j += dj;
        k += dk;
    }
    // Constant continuation beyond the last knot (hard-wall behaviour).
    let last = v.len() - 1;
    if e > v[last] {
        let (di, _, _) = affine_segment_triple(v[last], e, ell[last], 0.0, e);
        i += di;
    }
    IntegralTriple::new(e, i, j, k)
}

fn closed_form_triple(
    profile: &LengthProfile,
    c: &ClosedFormProfile,
    e: f64,
    rel_tol: f64,
) -> Result<IntegralTriple, SemiclassicalError> {
    let v0 = c.v0;
    let q = c.exponent;
    let smooth = c.smooth.clone();
    let i_part = {
        let f = |v: f64| smooth(v);
        integrate_singular(
            &SingularIntegralSpec::new(&f, v0, e)
                .with_lower_exponent(q)
                .with_rel_tol(rel_tol),
        )?
    };
    let (j_val, k_val) = match &c.smooth_prime {
        Some(sp) => {
            let spc = sp.clone();
            let f = |v: f64| spc(v);
            let j = integrate_singular(
                &SingularIntegralSpec::new(&f, v0, e)
                    .with_lower_exponent(q - 1.0)
                    .with_rel_tol(rel_tol),
            )?
            .value;
            let sm = c.smooth.clone();
            let spc = sp.clone();
            let fk = |v: f64| {
                let s = sm(v);
                s * s * spc(v)
            };
            let k = integrate_singular(
                &SingularIntegralSpec::new(&fk, v0, e)
                    .with_lower_exponent(3.0 * q - 1.0)
                    .with_rel_tol(rel_tol),
            )?
            .value;
            (j, k)
        }
        None => {
            // J = I′(E) by the transform identity; central difference in E.
            let h = 1e-5 * (e - v0);
            let hi = match profile.e0() {
                Bound::Finite(e0) => h.min(0.5 * (e0 - e)),
                _ => h,
            };
            let i_at = |energy: f64| -> Result<f64, SemiclassicalError> {
                let f = |v: f64| smooth(v);
                Ok(integrate_singular(
                    &SingularIntegralSpec::new(&f, v0, energy)
                        .with_lower_exponent(q)
                        .with_rel_tol(rel_tol),
                )?
                .value)
            };
            let j = (i_at(e + hi)? - i_at(e - hi)?) / (2.0 * hi);
            let k = match &c.phi {
                Some(phi) => {
                    // Position-space form K = 8∫₀^{x⁺} x² dx/√(E−Φ).
                    let x_plus = 0.5 * profile.ell(e);
                    let p = phi.clone();
                    let g = |x: f64| 8.0 * x * x / (e - p(x)).sqrt();
                    quadrature::integrate_to_sqrt_edge(&g, 0.0, x_plus, rel_tol)?.value
                }
                None => {
                    // Finite-difference ℓ′ against the kernel; reduced accuracy.
                    let fk = |v: f64| {
                        let l = profile.ell(v);
                        l * l * profile.ell_prime(v)
                    };
                    integrate_singular(
                        &SingularIntegralSpec::new(&fk, v0, e).with_rel_tol(rel_tol.max(1e-8)),
                    )?
                    .value
                }
            };
            (j, k)
        }
    };
    IntegralTriple::new(e, i_part.value, j_val, k_val.max(0.0))
}

/// Power-tail profiles (ℓ = amp·(E₀−V)^{−α}, V₀ = −∞) under V = E₀ − (E₀−E)/s:
/// each kernel integral becomes ∫₀¹ s^{p}(1−s)^{−1/2} ds with constant smooth
/// part, evaluated by the same singular quadrature.
fn power_tail_triple(
    t: &PowerTailProfile,
    e: f64,
    rel_tol: f64,
) -> Result<IntegralTriple, SemiclassicalError> {
    let gap = t.e0 - e;
    let one = |_: f64| 1.0;
    let shape = |p: f64| -> Result<f64, SemiclassicalError> {
        Ok(integrate_singular(
            &SingularIntegralSpec::new(&one, 0.0, 1.0)
                .with_lower_exponent(p)
                .with_rel_tol(rel_tol),
        )?
        .value)
    };
    let i = t.amplitude * gap.powf(0.5 - t.alpha) * shape(t.alpha - 1.5)?;
    let j = t.amplitude * t.alpha * gap.powf(-t.alpha - 0.5) * shape(t.alpha - 0.5)?;
    let k = t.amplitude.powi(3)
        * t.alpha
        * gap.powf(-3.0 * t.alpha - 0.5)
        * shape(3.0 * t.alpha - 0.5)?;
    IntegralTriple::new(e, i, j, k)
}

/// The triple (I, J, K) at energy `e` with the default tolerance.
pub fn integrals(profile: &LengthProfile, e: f64) -> Result<IntegralTriple, SemiclassicalError> {
    integrals_with_tol(profile, e, DEFAULT_REL_TOL)
}

pub fn integrals_with_tol(
    profile: &LengthProfile,
    e: f64,
    rel_tol: f64,
) -> Result<IntegralTriple, SemiclassicalError> {
    check_energy(profile, e)?;
    match profile.repr() {
        ProfileRepr::Steps(s) => steps_triple(&s.jumps, e),
        ProfileRepr::PiecewiseLinear(p) => pl_triple(&p.v, &p.ell, e),
        ProfileRepr::ClosedForm(c) => closed_form_triple(profile, c, e, rel_tol),
        ProfileRepr::PowerTail(t) => power_tail_triple(t, e, rel_tol),
    }
}

/// I(E) alone (the forward transform component).
pub fn integral_i(
    profile: &LengthProfile,
    e: f64,
    rel_tol: f64,
) -> Result<f64, SemiclassicalError> {
    check_energy(profile, e)?;
    match profile.repr() {
        ProfileRepr::Steps(s) => {
            Ok(2.0 * quadrature::integrate_step_kernel(&s.jumps, e, StepPower::SqrtGrowth)?)
        }
        ProfileRepr::PiecewiseLinear(p) => {
            let mut i = 0.0;
            for idx in 0..p.v.len() - 1 {
                if p.v[idx] >= e {
                    break;
                }
                let slope = (p.ell[idx + 1] - p.ell[idx]) / (p.v[idx + 1] - p.v[idx]);
                i += affine_segment_triple(p.v[idx], p.v[idx + 1], p.ell[idx], slope, e).0;
            }
            let last = p.v.len() - 1;
            if e > p.v[last] {
                i += affine_segment_triple(p.v[last], e, p.ell[last], 0.0, e).0;
            }
            Ok(i)
        }
        ProfileRepr::ClosedForm(c) => {
            let smooth = c.smooth.clone();
            let f = |v: f64| smooth(v);
            Ok(integrate_singular(
                &SingularIntegralSpec::new(&f, c.v0, e)
                    .with_lower_exponent(c.exponent)
                    .with_rel_tol(rel_tol),
            )?
            .value)
        }
        ProfileRepr::PowerTail(t) => {
            let gap = t.e0 - e;
            let one = |_: f64| 1.0;
            Ok(t.amplitude
                * gap.powf(0.5 - t.alpha)
                * integrate_singular(
                    &SingularIntegralSpec::new(&one, 0.0, 1.0)
                        .with_lower_exponent(t.alpha - 1.5)
                        .with_rel_tol(rel_tol),
                )?
                .value)
        }
    }
}

/// Semiclassical state count N(E) = √(2m)·I(E)/h. Real-valued, not rounded;
/// integer labels and half-integer offsets are the caller's concern.
pub fn state_count(triple: &IntegralTriple, units: Units) -> f64 {
    (2.0 * units.mass()).sqrt() * triple.i / units.planck()
}

/// The dimensionless ratio U = π/(√2·J)·√(K/I).
pub fn uncertainty_ratio(triple: &IntegralTriple) -> Result<f64, SemiclassicalError> {
    if !(triple.i > 0.0) || !(triple.j > 0.0) {
        return Err(SemiclassicalError::NonPositiveIntegrals {
            i: triple.i,
            j: triple.j,
        });
    }
    Ok(std::f64::consts::PI / (2.0f64.sqrt() * triple.j) * (triple.k / triple.i).sqrt())
}

/// Semiclassical moments (Δx, Δp): Δx² = K/(4J), Δp² = m·I/J, with
/// ⟨x⟩ = ⟨p⟩ = 0 for even potentials.
pub fn semiclassical_moments(
    triple: &IntegralTriple,
    units: Units,
) -> Result<(f64, f64), SemiclassicalError> {
    if !(triple.i > 0.0) || !(triple.j > 0.0) {
        return Err(SemiclassicalError::NonPositiveIntegrals {
            i: triple.i,
            j: triple.j,
        });
    }
    let delta_x = (triple.k / (4.0 * triple.j)).sqrt();
    let delta_p = (units.mass() * triple.i / triple.j).sqrt();
    Ok((delta_x, delta_p))
}

/// Full semiclassical report at one energy.
pub fn report(
    profile: &LengthProfile,
    e: f64,
    units: Units,
    rel_tol: f64,
) -> Result<UncertaintyReport, SemiclassicalError> {
    let triple = integrals_with_tol(profile, e, rel_tol)?;
    let (dx, dp) = semiclassical_moments(&triple, units)?;
    Ok(UncertaintyReport::semiclassical(
        e,
        state_count(&triple, units),
        dx,
        dp,
        uncertainty_ratio(&triple)?,
    ))
}

/// One row of an energy sweep.
#[derive(Debug, Clone, Copy)]
pub struct EnergyPoint {
    pub e: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
    pub n: f64,
    pub u: f64,
}

/// Evaluate the triple, N and U over an energy grid. Runs on the rayon pool
/// when the `parallel` feature is enabled.
pub fn sweep_energies(
    profile: &LengthProfile,
    energies: &[f64],
    units: Units,
    rel_tol: f64,
) -> Result<Vec<EnergyPoint>, SemiclassicalError> {
    let results = exec::map(energies, |&e| -> Result<EnergyPoint, SemiclassicalError> {
        let t = integrals_with_tol(profile, e, rel_tol)?;
        Ok(EnergyPoint {
            e,
            i: t.i,
            j: t.j,
            k: t.k,
            n: state_count(&t, units),
            u: uncertainty_ratio(&t)?,
        })
    });
    results.into_iter().collect()
}

/// WKB bound-state wavefunction ψ(x) = C/√|p(x)| · cos(S(x)/ħ + θ) with
/// S(x) = ∫₀ˣ |p| dx′ and C fixed by the semiclassical normalization
/// 2/|C|² = J/√(2m).
///
/// θ defaults to the left-turning-point connection value (phase −π/4 at the
/// turning point); pass an explicit θ to override. Diagnostic only: valid in
/// the classically allowed region away from the turning points.
pub struct WkbState {
    energy: f64,
    amplitude: f64,
    theta: f64,
    turning_point: f64,
    units: Units,
    phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl WkbState {
    pub fn new(
        spec: &PotentialSpec,
        e: f64,
        units: Units,
        theta: Option<f64>,
    ) -> Result<Self, SemiclassicalError> {
        let profile = LengthProfile::from_spec(spec)?;
        let triple = integrals(&profile, e)?;
        if !(triple.j > 0.0) {
            return Err(SemiclassicalError::NonPositiveIntegrals {
                i: triple.i,
                j: triple.j,
            });
        }
        let turning_point = match spec.accessible_length(e)? {
            Length::Finite(l) => 0.5 * l,
            Length::Unbounded => {
                return Err(SemiclassicalError::EnergyOutOfRange {
                    e,
                    v0: spec.v0().to_string(),
                    e0: spec.e0().to_string(),
                })
            }
        };
        let amplitude = (2.0 * (2.0 * units.mass()).sqrt() / triple.j).sqrt();
        let spec_phi = spec.clone();
        let phi: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |x| spec_phi.phi(x));
        let mut state = Self {
            energy: e,
            amplitude,
            theta: 0.0,
            turning_point,
            units,
            phi,
        };
        state.theta = match theta {
            Some(t) => t,
            None => {
                // Connection formula: phase −π/4 measured from the left
                // turning point; by parity S(x_left) = −S(x_right).
                let s_edge = state.action_to(turning_point * (1.0 - 1e-9))?;
                s_edge / units.hbar() - std::f64::consts::FRAC_PI_4
            }
        };
        Ok(state)
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn turning_point(&self) -> f64 {
        self.turning_point
    }

    /// |p(x)| = √(2m(E−Φ(x))).
    pub fn momentum_magnitude(&self, x: f64) -> Result<f64, SemiclassicalError> {
        let gap = self.energy - (self.phi)(x);
        if gap <= 0.0 {
            return Err(SemiclassicalError::BeyondTurningPoint {
                x,
                turning_point: self.turning_point,
            });
        }
        Ok((2.0 * self.units.mass() * gap).sqrt())
    }

    fn action_to(&self, x: f64) -> Result<f64, SemiclassicalError> {
        if x == 0.0 {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if x > 0.0 {
            (0.0, x, 1.0)
        } else {
            (x, 0.0, -1.0)
        };
        let m = self.units.mass();
        let e = self.energy;
        let phi = self.phi.clone();
        let f = move |t: f64| (2.0 * m * (e - phi(t)).max(0.0)).sqrt();
        let s = quadrature::integrate_smooth(&f, lo, hi, 1e-10)?;
        Ok(sign * s.value)
    }

    /// S(x) = ∫₀ˣ |p| dx′; odd in x, strictly increasing inside the well.
    pub fn action(&self, x: f64) -> Result<f64, SemiclassicalError> {
        if x.abs() >= self.turning_point {
            return Err(SemiclassicalError::BeyondTurningPoint {
                x,
                turning_point: self.turning_point,
            });
        }
        self.action_to(x)
    }

    pub fn eval(&self, x: f64) -> Result<f64, SemiclassicalError> {
        let p = self.momentum_magnitude(x)?;
        let s = self.action(x)?;
        Ok(self.amplitude / p.sqrt() * (s / self.units.hbar() + self.theta).cos())
    }
}

/// Evaluate the WKB wavefunction at one point with the default θ convention.
pub fn wkb_wavefunction(
    spec: &PotentialSpec,
    e: f64,
    x: f64,
    units: Units,
) -> Result<f64, SemiclassicalError> {
    WkbState::new(spec, e, units, None)?.eval(x)
}
