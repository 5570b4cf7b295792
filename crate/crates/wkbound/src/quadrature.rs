//! Adaptive quadrature for integrals with inverse-square-root endpoint kernels.
//!
//! The workhorse is [`integrate_singular`], which evaluates
//!
//! ```text
//!     ∫ₐᴱ f(V) dV / √(E − V),       f(V) = φ(V) · (V − a)^q,   q > −1,
//! ```
//!
//! with φ smooth on `[a, E]`. The upper endpoint is removed exactly by the
//! substitution `V = E − t²`; the lower endpoint by `V = a + (m − a) w^{1/(1+q)}`
//! on the lower half, which turns any integrable power singularity of f at `a`
//! into a smooth integrand. `q = 0` is a plain smooth integrand and
//! `q = −1/2` is the flagged `1/√(V − a)` case.
//!
//! Step profiles never reach the adaptive path: their kernel integrals have the
//! exact closed-form sums of [`integrate_step_kernel`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use thiserror::Error;

/// Points of the Gauss–Legendre panel rule.
const GL_POINTS: usize = 21;
/// Geometric grading levels toward each endpoint in the initial partition.
const SEED_LEVELS: u32 = 26;
/// Default cap on adaptive panels.
pub const DEFAULT_MAX_PANELS: usize = 4096;
/// Default relative tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

static GL_RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();

/// Legendre polynomial value and derivative at `x`.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..64 {
            let (p, dp) = legendre_eval(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    GL_RULE.get_or_init(|| legendre_rule(GL_POINTS))
}

/// Single Gauss–Legendre panel on [a, b]. Nodes are strictly interior.
fn gl_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl_rule();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Value and error estimate of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrated {
    pub value: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("invalid integration range [{lower}, {upper}]")]
    InvalidRange { lower: f64, upper: f64 },
    #[error("lower-endpoint exponent must be > -1 and finite, got {0}")]
    InvalidExponent(f64),
    #[error("relative tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("integrand produced a non-finite value on [{panel_lo}, {panel_hi}]")]
    NonFiniteIntegrand { panel_lo: f64, panel_hi: f64 },
    #[error(
        "quadrature did not reach relative tolerance {tolerance:.3e}: \
         best estimate {best:.16e}, error estimate {error_estimate:.3e}"
    )]
    NotConverged {
        best: f64,
        error_estimate: f64,
        tolerance: f64,
    },
    #[error("energy {energy} coincides with step level {level} in an inverse-sqrt kernel")]
    SingularConfiguration { energy: f64, level: f64 },
    #[error("step levels must be strictly increasing (levels {prev} >= {next})")]
    UnsortedSteps { prev: f64, next: f64 },
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl Panel {
    fn build(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self, QuadratureError> {
        let mid = 0.5 * (lo + hi);
        let coarse = gl_panel(f, lo, hi);
        let fine = gl_panel(f, lo, mid) + gl_panel(f, mid, hi);
        if !fine.is_finite() || !coarse.is_finite() {
            return Err(QuadratureError::NonFiniteIntegrand {
                panel_lo: lo,
                panel_hi: hi,
            });
        }
        Ok(Panel {
            lo,
            hi,
            value: fine,
            err: (coarse - fine).abs(),
        })
    }

    /// Too narrow to split further in f64.
    fn exhausted(&self) -> bool {
        let mid = 0.5 * (self.lo + self.hi);
        mid <= self.lo || mid >= self.hi
    }
}

struct HeapEntry {
    err: f64,
    idx: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Initial partition graded geometrically toward both endpoints, so mass
/// concentrated at either end is seen before refinement starts.
fn seed_breakpoints(lo: f64, hi: f64) -> Vec<f64> {
    let width = hi - lo;
    let mut pts = Vec::with_capacity(2 * SEED_LEVELS as usize + 2);
    pts.push(lo);
    for k in (1..=SEED_LEVELS).rev() {
        pts.push(lo + width * 0.5f64.powi(k as i32));
    }
    for k in 1..SEED_LEVELS {
        pts.push(hi - width * 0.5f64.powi(k as i32 + 1));
    }
    pts.push(hi);
    pts.retain(|p| p.is_finite());
    pts.dedup();
    pts
}

/// Globally adaptive Gauss–Legendre quadrature of a finite integrand on [lo, hi].
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Integrated, QuadratureError> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(QuadratureError::InvalidRange {
            lower: lo,
            upper: hi,
        });
    }
    let pts = seed_breakpoints(lo, hi);
    let mut panels: Vec<Panel> = Vec::with_capacity(max_panels.max(pts.len()));
    for pair in pts.windows(2) {
        panels.push(Panel::build(f, pair[0], pair[1])?);
    }

    let mut heap: BinaryHeap<HeapEntry> = panels
        .iter()
        .enumerate()
        .map(|(idx, p)| HeapEntry { err: p.err, idx })
        .collect();

    // When splitting the worst panel stops shrinking the total error the
    // estimate sits at the rounding floor; report it rather than spinning.
    let mut stagnant = 0usize;
    let mut prev_total_err = f64::INFINITY;

    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        let scale: f64 = panels.iter().map(|p| p.value.abs()).sum();
        if total_err <= rel_tol * scale || total_err == 0.0 {
            let value = panels.iter().map(|p| p.value).sum();
            return Ok(Integrated {
                value,
                error_estimate: total_err,
            });
        }
        if total_err >= 0.999 * prev_total_err {
            stagnant += 1;
            if stagnant >= 64 {
                let value = panels.iter().map(|p| p.value).sum();
                return Ok(Integrated {
                    value,
                    error_estimate: total_err,
                });
            }
        } else {
            stagnant = 0;
        }
        prev_total_err = total_err;
        if panels.len() >= max_panels {
            let value = panels.iter().map(|p| p.value).sum();
            return Err(QuadratureError::NotConverged {
                best: value,
                error_estimate: total_err,
                tolerance: rel_tol,
            });
        }
        let Some(worst) = heap.pop() else {
            let value = panels.iter().map(|p| p.value).sum();
            return Ok(Integrated {
                value,
                error_estimate: total_err,
            });
        };
        // Stale heap entry: the panel was already replaced.
        if worst.idx >= panels.len() || panels[worst.idx].err != worst.err {
            continue;
        }
        let target = &panels[worst.idx];
        if target.exhausted() || target.err == 0.0 {
            // Cannot be improved further; drop it from the refinement queue.
            continue;
        }
        let (plo, phi) = (target.lo, target.hi);
        let mid = 0.5 * (plo + phi);
        let left = Panel::build(f, plo, mid)?;
        let right = Panel::build(f, mid, phi)?;
        let left_entry = HeapEntry {
            err: left.err,
            idx: worst.idx,
        };
        panels[worst.idx] = left;
        heap.push(left_entry);
        let idx = panels.len();
        heap.push(HeapEntry {
            err: right.err,
            idx,
        });
        panels.push(right);
    }
}

/// The integral `∫ₐᴱ φ(V)·(V−a)^q dV / √(E−V)` to evaluate.
pub struct SingularIntegralSpec<'a> {
    /// The smooth cofactor φ; the full integrand numerator is `φ(V)·(V−a)^q`.
    pub smooth_part: &'a dyn Fn(f64) -> f64,
    pub lower: f64,
    pub upper: f64,
    /// Leading power `q` of the numerator at the lower endpoint (`0` = smooth,
    /// `-1/2` = inverse-square-root singularity). Must exceed −1.
    pub lower_exponent: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl<'a> SingularIntegralSpec<'a> {
    pub fn new(smooth_part: &'a dyn Fn(f64) -> f64, lower: f64, upper: f64) -> Self {
        Self {
            smooth_part,
            lower,
            upper,
            lower_exponent: 0.0,
            rel_tol: DEFAULT_REL_TOL,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }

    pub fn with_lower_exponent(mut self, q: f64) -> Self {
        self.lower_exponent = q;
        self
    }

    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }
}

fn pow_or_one(x: f64, q: f64) -> f64 {
    if q == 0.0 {
        1.0
    } else {
        x.powf(q)
    }
}

/// Evaluate a singular-kernel integral; see [`SingularIntegralSpec`].
pub fn integrate_singular(spec: &SingularIntegralSpec) -> Result<Integrated, QuadratureError> {
    let a = spec.lower;
    let e = spec.upper;
    if !(a < e) || !a.is_finite() || !e.is_finite() {
        return Err(QuadratureError::InvalidRange { lower: a, upper: e });
    }
    if !(spec.lower_exponent > -1.0) || !spec.lower_exponent.is_finite() {
        return Err(QuadratureError::InvalidExponent(spec.lower_exponent));
    }
    if !(spec.rel_tol > 0.0) {
        return Err(QuadratureError::InvalidTolerance(spec.rel_tol));
    }
    let phi = spec.smooth_part;
    let q = spec.lower_exponent;
    let m = 0.5 * (a + e);

    // Upper half [m, E]: V = E − t² removes the kernel singularity exactly.
    let t_max = (e - m).sqrt();
    let upper_integrand = move |t: f64| {
        let v = e - t * t;
        2.0 * phi(v) * pow_or_one(v - a, q)
    };
    let upper = adaptive(&upper_integrand, 0.0, t_max, spec.rel_tol, spec.max_panels)?;

    // Lower half [a, m]: V = a + (m−a)·w^{1/(1+q)} absorbs the power of the
    // numerator into the Jacobian, leaving φ against a bounded kernel.
    let beta = 1.0 / (1.0 + q);
    let half = m - a;
    let coeff = beta * half.powf(1.0 + q);
    let lower = if coeff == 0.0 {
        // (m−a)^{1+q} underflow: the lower half carries no representable mass.
        Integrated {
            value: 0.0,
            error_estimate: 0.0,
        }
    } else if !coeff.is_finite() {
        return Err(QuadratureError::NonFiniteIntegrand {
            panel_lo: a,
            panel_hi: m,
        });
    } else {
        let lower_integrand = move |w: f64| {
            let v = a + half * w.powf(beta);
            coeff * phi(v) / (e - v).sqrt()
        };
        adaptive(&lower_integrand, 0.0, 1.0, spec.rel_tol, spec.max_panels)?
    };

    Ok(Integrated {
        value: upper.value + lower.value,
        error_estimate: upper.error_estimate + lower.error_estimate,
    })
}

/// `∫ₐᵇ f(x) dx` for smooth f.
pub fn integrate_smooth(
    f: &dyn Fn(f64) -> f64,
    lower: f64,
    upper: f64,
    rel_tol: f64,
) -> Result<Integrated, QuadratureError> {
    adaptive(f, lower, upper, rel_tol, DEFAULT_MAX_PANELS)
}

/// `∫ₐᵇ f(x) dx` where f may blow up like `C/√(b−x)` at the upper endpoint
/// (e.g. position-space integrands at a simple turning point).
///
/// Arguments closer to b than f64 resolution allows would evaluate f at b
/// itself; that sliver is closed with a midpoint estimate instead.
pub fn integrate_to_sqrt_edge(
    f: &dyn Fn(f64) -> f64,
    lower: f64,
    upper: f64,
    rel_tol: f64,
) -> Result<Integrated, QuadratureError> {
    if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
        return Err(QuadratureError::InvalidRange { lower, upper });
    }
    let t_max = (upper - lower).sqrt();
    let g = move |t: f64| 2.0 * t * f(upper - t * t);
    // Below t_cut, upper − t² is not distinguishable from upper in f64.
    let t_cut = 4.0 * (f64::EPSILON * upper.abs().max(f64::MIN_POSITIVE)).sqrt();
    if t_max <= 2.0 * t_cut {
        let value = t_max * g(0.5 * t_max);
        return Ok(Integrated {
            value,
            error_estimate: value.abs(),
        });
    }
    let sliver = t_cut * g(0.5 * t_cut);
    if !sliver.is_finite() {
        return Err(QuadratureError::NonFiniteIntegrand {
            panel_lo: 0.0,
            panel_hi: t_cut,
        });
    }
    let body = adaptive(&g, t_cut, t_max, rel_tol, DEFAULT_MAX_PANELS)?;
    Ok(Integrated {
        value: body.value + sliver,
        error_estimate: body.error_estimate + sliver.abs() * 1e-8,
    })
}

/// Kernel power for step-profile sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPower {
    /// `(E − Vᵢ)^{+1/2}`
    SqrtGrowth,
    /// `(E − Vᵢ)^{−1/2}`
    InverseSqrt,
}

/// Exact closed-form sum `Σᵢ Lᵢ (E − Vᵢ)^p` over steps with `Vᵢ < E`.
///
/// `jumps` are `(Vᵢ, Lᵢ)` pairs with strictly increasing levels. With
/// `p = −1/2`, an energy within machine precision of a step level is a
/// singular configuration and is rejected.
pub fn integrate_step_kernel(
    jumps: &[(f64, f64)],
    energy: f64,
    power: StepPower,
) -> Result<f64, QuadratureError> {
    for pair in jumps.windows(2) {
        if pair[0].0 >= pair[1].0 {
            return Err(QuadratureError::UnsortedSteps {
                prev: pair[0].0,
                next: pair[1].0,
            });
        }
    }
    let mut acc = 0.0;
    for &(level, weight) in jumps {
        let gap = energy - level;
        if matches!(power, StepPower::InverseSqrt) {
            let eps = 4.0 * f64::EPSILON * energy.abs().max(level.abs()).max(1.0);
            if gap.abs() <= eps {
                return Err(QuadratureError::SingularConfiguration { energy, level });
            }
        }
        if gap <= 0.0 {
            continue;
        }
        acc += match power {
            StepPower::SqrtGrowth => weight * gap.sqrt(),
            StepPower::InverseSqrt => weight / gap.sqrt(),
        };
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn singular(f: &dyn Fn(f64) -> f64, a: f64, e: f64, q: f64) -> f64 {
        integrate_singular(&SingularIntegralSpec::new(f, a, e).with_lower_exponent(q))
            .unwrap()
            .value
    }

    #[test]
    fn unit_integrand() {
        // ∫₀¹ dV/√(1−V) = 2
        assert_relative_eq!(singular(&|_| 1.0, 0.0, 1.0, 0.0), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn sqrt_integrand() {
        // ∫₀¹ √V dV/√(1−V) = B(3/2, 1/2) = π/2
        assert_relative_eq!(
            singular(&|_| 1.0, 0.0, 1.0, 0.5),
            PI / 2.0,
            max_relative = 1e-11
        );
    }

    #[test]
    fn inverse_sqrt_integrand() {
        // ∫₀¹ dV/√(V(1−V)) = B(1/2, 1/2) = π
        assert_relative_eq!(singular(&|_| 1.0, 0.0, 1.0, -0.5), PI, max_relative = 1e-11);
    }

    #[test]
    fn beta_monomials_match_closed_form() {
        // ∫ₐᴱ (V−a)^{α−1/2} dV/√(E−V) = (E−a)^α B(α+1/2, 1/2)
        for &(a, e) in &[(0.0, 1.0), (-2.0, 1.5)] {
            for &alpha in &[0.5f64, 1.0, 1.5, 2.5] {
                let got = singular(&|_| 1.0, a, e, alpha - 0.5);
                let want = (e - a).powf(alpha) * crate::families::beta(alpha + 0.5, 0.5).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn linearity() {
        let f1 = |v: f64| (1.0 + v).ln();
        let f2 = |v: f64| (-v).exp();
        let (c1, c2) = (2.75, -0.4);
        let combo = |v: f64| c1 * f1(v) + c2 * f2(v);
        let lhs = singular(&combo, 0.0, 2.0, 0.0);
        let rhs = c1 * singular(&f1, 0.0, 2.0, 0.0) + c2 * singular(&f2, 0.0, 2.0, 0.0);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }

    #[test]
    fn doubling_panels_stays_within_error_estimate() {
        let f = |v: f64| (3.0 * v).sin().abs() + 0.1;
        let base = integrate_singular(
            &SingularIntegralSpec::new(&f, 0.0, 4.0).with_max_panels(DEFAULT_MAX_PANELS),
        )
        .unwrap();
        let doubled = integrate_singular(
            &SingularIntegralSpec::new(&f, 0.0, 4.0).with_max_panels(2 * DEFAULT_MAX_PANELS),
        )
        .unwrap();
        assert!(
            (base.value - doubled.value).abs() <= base.error_estimate.max(1e-14 * base.value.abs())
        );
    }

    #[test]
    fn concentrated_mass_near_upper_endpoint() {
        // ∫₀¹ V^q dV/√(1−V) = B(q+1, 1/2) for a huge power: nearly all mass
        // sits within 1e−6 of the upper endpoint.
        let q = 1.0e6;
        let got = singular(&|_| 1.0, 0.0, 1.0, q);
        let want = crate::families::beta(q + 1.0, 0.5).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-8);
    }

    #[test]
    fn near_divergent_lower_exponent() {
        // q = −0.999999: B(q+1, 1/2) ≈ 1e6.
        let q = -0.999999;
        let got = singular(&|_| 1.0, 0.0, 1.0, q);
        let want = crate::families::beta(q + 1.0, 0.5).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-8);
    }

    #[test]
    fn zero_integrand() {
        let r = integrate_singular(&SingularIntegralSpec::new(&|_| 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            integrate_singular(&SingularIntegralSpec::new(&|_| 1.0, 1.0, 1.0)),
            Err(QuadratureError::InvalidRange { .. })
        ));
        assert!(matches!(
            integrate_singular(
                &SingularIntegralSpec::new(&|_| 1.0, 0.0, 1.0).with_lower_exponent(-1.0)
            ),
            Err(QuadratureError::InvalidExponent(_))
        ));
    }

    #[test]
    fn starved_refinement_reports_best_estimate() {
        // A panel budget too small to resolve the integrand: the error
        // carries the best estimate and the achieved error.
        let f = |v: f64| (200.0 * v).sin().abs();
        let r = integrate_singular(
            &SingularIntegralSpec::new(&f, 0.0, 6.0)
                .with_rel_tol(1e-13)
                .with_max_panels(64),
        );
        match r {
            Err(QuadratureError::NotConverged {
                best,
                error_estimate,
                tolerance,
            }) => {
                assert!(best.is_finite() && best > 0.0);
                assert!(error_estimate > tolerance * best.abs());
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_reported() {
        let f = |v: f64| 1.0 / (v - 0.5); // non-integrable pole inside range
        let r = integrate_singular(&SingularIntegralSpec::new(&f, 0.0, 1.0));
        assert!(matches!(
            r,
            Err(QuadratureError::NonFiniteIntegrand { .. })
                | Err(QuadratureError::NotConverged { .. })
        ));
    }

    #[test]
    fn step_kernel_examples() {
        let v = integrate_step_kernel(&[(0.0, 1.0)], 4.0, StepPower::SqrtGrowth).unwrap();
        assert_relative_eq!(v, 2.0);

        // Term-by-term: 1/√2 + 2/√1
        let v =
            integrate_step_kernel(&[(0.0, 1.0), (1.0, 2.0)], 2.0, StepPower::InverseSqrt).unwrap();
        assert_relative_eq!(v, 1.0 / 2.0f64.sqrt() + 2.0, max_relative = 1e-15);

        let v = integrate_step_kernel(&[(0.0, 1.0)], 0.5, StepPower::SqrtGrowth).unwrap();
        assert_relative_eq!(v, 0.5f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn step_kernel_singular_configuration() {
        let r = integrate_step_kernel(&[(0.0, 1.0), (1.0, 1.0)], 1.0, StepPower::InverseSqrt);
        assert!(matches!(
            r,
            Err(QuadratureError::SingularConfiguration { .. })
        ));
    }

    #[test]
    fn step_kernel_rejects_unsorted() {
        let r = integrate_step_kernel(&[(1.0, 1.0), (0.0, 1.0)], 2.0, StepPower::SqrtGrowth);
        assert!(matches!(r, Err(QuadratureError::UnsortedSteps { .. })));
    }

    #[test]
    fn sqrt_edge_wrapper() {
        // ∫₀¹ dx/√(1−x) = 2 with the blow-up at the upper edge. Accuracy is
        // limited by the cancellation inside the test integrand itself.
        let f = |x: f64| 1.0 / (1.0 - x).sqrt();
        let r = integrate_to_sqrt_edge(&f, 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-10);
    }
}
