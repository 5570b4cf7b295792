//! Exact quantum-mechanical ground truth: a finite-difference eigensolver
//! for the 1D time-independent Schrödinger equation, per-state position and
//! momentum moments, and the exact uncertainty ratio U_N = Δx·Δp/(ħN).
//!
//! The discretization is second-order central differences on a uniform grid
//! with Dirichlet walls at the grid ends; eigenpairs come from Sturm-sequence
//! bisection plus inverse iteration. Bound-state wavefunctions are kept real
//! (the time-independent equation is invariant under conjugation).

mod tridiag;

use thiserror::Error;

use crate::exec;
use crate::profiles::{Length, PotentialSpec, ProfileError};
use crate::semiclassical::{SemiclassicalError, UncertaintyReport};
use crate::units::Units;
use tridiag::SymTridiag;

/// Default number of interior grid points: keeps the N ≤ 50 moments of the
/// test families within ~1e−5 absolute error.
pub const DEFAULT_GRID_POINTS: usize = 32_768;

const BOUNDARY_AMPLITUDE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(
        "grid too narrow for state {index}: boundary amplitude {amplitude:.3e} of max \
         (potential at edge {phi_edge:.6e}, state energy {energy:.6e})"
    )]
    GridTooNarrow {
        index: usize,
        amplitude: f64,
        phi_edge: f64,
        energy: f64,
    },
    #[error("inverse iteration failed to converge for eigenvalue {0}")]
    NoConvergence(f64),
    #[error("state label N = 0 has no uncertainty ratio (U divides by N)")]
    StateLabelZero,
    #[error("energy target {e_target} is not inside the potential domain")]
    BadEnergyTarget { e_target: f64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Semiclassical(#[from] SemiclassicalError),
}

/// Uniform symmetric grid x ∈ [−x_max, x_max] with `n_points` interior nodes
/// and Dirichlet walls at ±x_max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_max: f64,
    n_points: usize,
    hard_walls: bool,
}

impl Grid {
    /// Grid with soft boundaries: the solver checks that wavefunctions have
    /// decayed at the edges.
    pub fn symmetric(x_max: f64, n_points: usize) -> Result<Self, OracleError> {
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(OracleError::InvalidGrid(format!(
                "x_max must be positive and finite, got {x_max}"
            )));
        }
        if n_points < 3 {
            return Err(OracleError::InvalidGrid(format!(
                "need at least 3 interior points, got {n_points}"
            )));
        }
        Ok(Self {
            x_max,
            n_points,
            hard_walls: false,
        })
    }

    /// Grid whose ends are physical infinite walls (boundary decay check off).
    pub fn with_hard_walls(x_max: f64, n_points: usize) -> Result<Self, OracleError> {
        let mut g = Self::symmetric(x_max, n_points)?;
        g.hard_walls = true;
        Ok(g)
    }

    /// Default grid for a potential and target energy: infinite walls sit
    /// exactly at the wall; soft families extend until Φ(x_max) reaches at
    /// least three times the target depth, growing further when a WKB tail
    /// estimate says the highest state would not have decayed below the
    /// truncation threshold at the boundary.
    pub fn for_spec(
        spec: &PotentialSpec,
        e_target: f64,
        n_points: usize,
        units: Units,
    ) -> Result<Self, OracleError> {
        match spec {
            PotentialSpec::TwoStageWell { .. } => {
                let half = spec
                    .hard_wall_half_width()
                    .expect("two-stage well has a wall");
                Grid::with_hard_walls(half, n_points)
            }
            PotentialSpec::FiniteWell { v0, e0, width } => {
                if !(e_target < *e0) {
                    return Err(OracleError::BadEnergyTarget { e_target });
                }
                // Pad past the well edge by enough evanescent decay lengths.
                let kappa = (2.0 * units.mass() * (e0 - e_target)).sqrt() / units.hbar();
                let pad = 18.0 / kappa.max(1e-6);
                let _ = v0;
                Grid::symmetric(0.5 * width + pad, n_points)
            }
            PotentialSpec::TabulatedEven { x, .. } => Grid::symmetric(*x.last().unwrap(), n_points),
            PotentialSpec::NegativePower { e0, .. } => {
                if !(e_target < *e0) {
                    return Err(OracleError::BadEnergyTarget { e_target });
                }
                // Cannot exceed the continuum limit; stop shy of it.
                let v_cap = e0 - 0.02 * (e0 - e_target);
                let ell = spec
                    .accessible_length(v_cap)?
                    .finite()
                    .expect("below continuum limit");
                Grid::symmetric(0.5 * ell, n_points)
            }
            _ => {
                let v0 = spec
                    .v0()
                    .finite()
                    .expect("smooth families have finite floors");
                if !(e_target > v0) {
                    return Err(OracleError::BadEnergyTarget { e_target });
                }
                let delta = e_target - v0;
                let mut mult = 3.0;
                loop {
                    let v_target = v0 + mult * delta;
                    let x_max = match spec.accessible_length(v_target)? {
                        Length::Finite(ell) => 0.5 * ell,
                        Length::Unbounded => return Err(OracleError::BadEnergyTarget { e_target }),
                    };
                    // Lower bound on the decay exponent ∫κ dx of the highest
                    // state over the outer half of the padding region.
                    let v_mid = v0 + 0.5 * (1.0 + mult) * delta;
                    let x_mid = match spec.accessible_length(v_mid)? {
                        Length::Finite(ell) => 0.5 * ell,
                        Length::Unbounded => return Err(OracleError::BadEnergyTarget { e_target }),
                    };
                    let kappa = (2.0 * units.mass() * (v_mid - e_target)).sqrt() / units.hbar();
                    if kappa * (x_max - x_mid) >= 18.0 || mult > 1e6 {
                        return Grid::symmetric(x_max, n_points);
                    }
                    mult *= 1.5;
                }
            }
        }
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.x_max / (self.n_points as f64 + 1.0)
    }

    /// Interior node position, i ∈ [0, n_points).
    pub fn node(&self, i: usize) -> f64 {
        -self.x_max + (i as f64 + 1.0) * self.spacing()
    }

    pub fn hard_walls(&self) -> bool {
        self.hard_walls
    }
}

/// Which integer labels the states of a family carry in uncertainty ratios:
/// oscillator-like spectra count from 0, well-like spectra from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelConvention {
    ZeroBased,
    OneBased,
}

impl LabelConvention {
    pub fn for_spec(spec: &PotentialSpec) -> Self {
        match spec {
            PotentialSpec::FiniteWell { .. }
            | PotentialSpec::TwoStageWell { .. }
            | PotentialSpec::TabulatedEven { .. } => LabelConvention::OneBased,
            _ => LabelConvention::ZeroBased,
        }
    }
}

/// One numerically exact eigenpair. `psi` holds interior-node samples with
/// ∫ψ² dx = 1; the sign is fixed so the first antinode is positive.
#[derive(Debug, Clone)]
pub struct BoundState {
    index: usize,
    convention: LabelConvention,
    energy: f64,
    psi: Vec<f64>,
}

impl BoundState {
    pub fn index(&self) -> usize {
        self.index
    }

    /// The label N used in U_N = Δx·Δp/(ħN).
    pub fn label(&self) -> usize {
        match self.convention {
            LabelConvention::ZeroBased => self.index,
            LabelConvention::OneBased => self.index + 1,
        }
    }

    pub fn convention(&self) -> LabelConvention {
        self.convention
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }
}

/// Position/momentum moments of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub x_mean: f64,
    pub x_sq_mean: f64,
    pub p_mean: f64,
    pub p_sq_mean: f64,
    pub delta_x: f64,
    pub delta_p: f64,
}

/// Lowest `n_states` eigenpairs of H = p²/2m + Φ on the grid, ascending in
/// energy. Errors when the grid cannot confine the highest requested state.
pub fn solve(
    spec: &PotentialSpec,
    grid: &Grid,
    n_states: usize,
    units: Units,
) -> Result<Vec<BoundState>, OracleError> {
    spec.validate()?;
    if n_states == 0 {
        return Err(OracleError::InvalidGrid(
            "n_states must be at least 1".into(),
        ));
    }
    if n_states > grid.n_points {
        return Err(OracleError::InvalidGrid(format!(
            "n_states = {} exceeds grid size {}",
            n_states, grid.n_points
        )));
    }
    let n = grid.n_points;
    let h = grid.spacing();
    let kin = units.hbar() * units.hbar() / (2.0 * units.mass() * h * h);
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let phi = spec.phi(grid.node(i));
        if !phi.is_finite() {
            return Err(OracleError::InvalidGrid(format!(
                "potential is not finite at grid node x = {} (use a grid that \
                 avoids singular points or walls)",
                grid.node(i)
            )));
        }
        d.push(2.0 * kin + phi);
    }
    let t = SymTridiag {
        d,
        e: vec![-kin; n - 1],
    };
    let eigenvalues = t.lowest_eigenvalues(n_states);
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n_states);
    for &lambda in &eigenvalues {
        let v = t
            .eigenvector(lambda, &pairs)
            .ok_or(OracleError::NoConvergence(lambda))?;
        pairs.push((lambda, v));
    }

    let convention = LabelConvention::for_spec(spec);
    let mut states = Vec::with_capacity(n_states);
    for (index, (energy, mut psi)) in pairs.into_iter().enumerate() {
        // Continuum normalization ∫ψ²dx = 1.
        let scale = 1.0 / h.sqrt();
        for p in psi.iter_mut() {
            *p *= scale;
        }
        // Sign: first antinode positive.
        let max_abs = psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        if let Some(first) = psi.iter().find(|p| p.abs() >= 0.5 * max_abs) {
            if *first < 0.0 {
                for p in psi.iter_mut() {
                    *p = -*p;
                }
            }
        }
        states.push(BoundState {
            index,
            convention,
            energy,
            psi,
        });
    }

    if !grid.hard_walls {
        let top = states.last().expect("n_states >= 1");
        let max_abs = top.psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        let edge = top.psi[0].abs().max(top.psi[n - 1].abs());
        let phi_edge = spec.phi(grid.x_max);
        if edge > BOUNDARY_AMPLITUDE_TOL * max_abs || phi_edge <= top.energy {
            return Err(OracleError::GridTooNarrow {
                index: top.index,
                amplitude: edge / max_abs,
                phi_edge,
                energy: top.energy,
            });
        }
    }
    Ok(states)
}

/// Trapezoid moments of a state: ⟨x⟩, ⟨x²⟩ directly, ⟨p²⟩ = ħ²∫(ψ′)²dx with
/// central differences of ψ at the cell midpoints, and ⟨p⟩ = 0 identically
/// for real wavefunctions.
///
/// The midpoint (staggered) ψ′ keeps the two wall cells in the integral;
/// node-centered differences drop them, which costs an O(h) deficit against
/// hard walls where ψ′ does not vanish.
pub fn moments(state: &BoundState, grid: &Grid, units: Units) -> Moments {
    let n = grid.n_points();
    let h = grid.spacing();
    let psi = state.psi();
    let mut x_mean = 0.0;
    let mut x_sq = 0.0;
    for (i, p) in psi.iter().enumerate() {
        let x = grid.node(i);
        let w = p * p;
        x_mean += x * w;
        x_sq += x * x * w;
    }
    let mut dpsi_sq = 0.0;
    for i in 0..=n {
        let left = if i > 0 { psi[i - 1] } else { 0.0 };
        let right = if i < n { psi[i] } else { 0.0 };
        let dpsi = (right - left) / h;
        dpsi_sq += dpsi * dpsi;
    }
    x_mean *= h;
    x_sq *= h;
    dpsi_sq *= h;
    let hbar = units.hbar();
    let p_sq = hbar * hbar * dpsi_sq;
    Moments {
        x_mean,
        x_sq_mean: x_sq,
        p_mean: 0.0,
        p_sq_mean: p_sq,
        delta_x: (x_sq - x_mean * x_mean).max(0.0).sqrt(),
        delta_p: p_sq.sqrt(),
    }
}

/// Exact per-state uncertainty reports U_N = Δx·Δp/(ħN). States must carry
/// labels N ≥ 1 (drop an oscillator ground state before calling).
pub fn exact_uncertainty_ratio(
    states: &[BoundState],
    grid: &Grid,
    units: Units,
) -> Result<Vec<UncertaintyReport>, OracleError> {
    if states.iter().any(|s| s.label() == 0) {
        return Err(OracleError::StateLabelZero);
    }
    let reports = exec::map(states, |state| {
        let m = moments(state, grid, units);
        UncertaintyReport::exact(
            state.energy(),
            state.label() as f64,
            m.delta_x,
            m.delta_p,
            units,
        )
    });
    let mut out = Vec::with_capacity(reports.len());
    for r in reports {
        out.push(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn physical_harmonic() -> PotentialSpec {
        // Φ = ½x² in natural units: A = 2√2.
        PotentialSpec::Harmonic {
            amplitude: 2.0 * 2.0f64.sqrt(),
            v0: 0.0,
        }
    }

    #[test]
    fn harmonic_low_spectrum() {
        let spec = physical_harmonic();
        let grid = Grid::symmetric(8.0, 32_768).unwrap();
        let states = solve(&spec, &grid, 6, Units::natural()).unwrap();
        for (n, s) in states.iter().enumerate() {
            assert_abs_diff_eq!(s.energy(), n as f64 + 0.5, epsilon = 1e-6);
        }
    }

    #[test]
    fn infinite_well_spectrum() {
        // Hard walls exactly at the well edges emulate the infinite well:
        // E_N = (πħN)²/(2mL²).
        let l = 1.0;
        let spec = PotentialSpec::FiniteWell {
            v0: 0.0,
            e0: 1e12,
            width: l,
        };
        let grid = Grid::with_hard_walls(0.5 * l, 16_384).unwrap();
        let states = solve(&spec, &grid, 3, Units::natural()).unwrap();
        for (i, s) in states.iter().enumerate() {
            let n = (i + 1) as f64;
            let exact = (PI * n / l).powi(2) / 2.0;
            assert_abs_diff_eq!(s.energy(), exact, epsilon = 1e-6 * exact.max(1.0));
            assert_eq!(s.label(), i + 1);
        }
    }

    #[test]
    fn parity_alternates() {
        let spec = physical_harmonic();
        let grid = Grid::symmetric(7.0, 8192).unwrap();
        let states = solve(&spec, &grid, 4, Units::natural()).unwrap();
        let n = grid.n_points();
        for (k, s) in states.iter().enumerate() {
            let psi = s.psi();
            // Compare ψ(x) with ψ(−x): node i mirrors to n−1−i.
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let mut worst = 0.0f64;
            for i in 0..n {
                worst = worst.max((psi[i] - sign * psi[n - 1 - i]).abs());
            }
            let max_abs = psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
            assert!(worst < 1e-8 * max_abs, "state {k} parity defect {worst}");
        }
    }

    #[test]
    fn ground_state_moments() {
        let spec = physical_harmonic();
        let units = Units::natural();
        let grid = Grid::symmetric(6.0, 16_384).unwrap();
        let states = solve(&spec, &grid, 1, units).unwrap();
        let m = moments(&states[0], &grid, units);
        assert_abs_diff_eq!(m.delta_x * m.delta_p, 0.5, epsilon = 1e-5);
        assert_abs_diff_eq!(m.x_mean, 0.0, epsilon = 1e-12);
        assert_eq!(m.p_mean, 0.0);
    }

    #[test]
    fn infinite_well_ground_moments() {
        // ΔxΔp/ħ = ½√(π²/3 − 2) for N = 1.
        let l = 1.0;
        let spec = PotentialSpec::FiniteWell {
            v0: 0.0,
            e0: 1e12,
            width: l,
        };
        let units = Units::natural();
        let grid = Grid::with_hard_walls(0.5 * l, 16_384).unwrap();
        let states = solve(&spec, &grid, 1, units).unwrap();
        let m = moments(&states[0], &grid, units);
        let exact = 0.5 * (PI * PI / 3.0 - 2.0).sqrt();
        assert_abs_diff_eq!(m.delta_x * m.delta_p, exact, epsilon = 1e-5);
    }

    #[test]
    fn norm_is_unity() {
        let spec = physical_harmonic();
        let grid = Grid::symmetric(7.0, 8192).unwrap();
        let states = solve(&spec, &grid, 3, Units::natural()).unwrap();
        let h = grid.spacing();
        for s in &states {
            let norm: f64 = s.psi().iter().map(|p| p * p).sum::<f64>() * h;
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn orthonormality() {
        let spec = physical_harmonic();
        let grid = Grid::symmetric(9.0, 8192).unwrap();
        let states = solve(&spec, &grid, 8, Units::natural()).unwrap();
        let h = grid.spacing();
        for i in 0..states.len() {
            for j in 0..i {
                let dot: f64 = states[i]
                    .psi()
                    .iter()
                    .zip(states[j].psi())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    * h;
                assert!(dot.abs() < 1e-8, "({i},{j}) overlap {dot}");
            }
        }
    }

    #[test]
    fn heisenberg_floor() {
        let spec = physical_harmonic();
        let units = Units::natural();
        let grid = Grid::symmetric(10.0, 131_072).unwrap();
        let states = solve(&spec, &grid, 10, units).unwrap();
        for s in &states {
            let m = moments(s, &grid, units);
            assert!(m.delta_x * m.delta_p >= 0.5 * units.hbar() - 1e-8);
        }
    }

    #[test]
    fn grid_refinement_is_second_order() {
        // Halving the spacing shrinks eigenvalue error about 4×.
        let spec = physical_harmonic();
        let units = Units::natural();
        let coarse = Grid::symmetric(10.0, 2048).unwrap();
        let fine = Grid::symmetric(10.0, 4097).unwrap(); // h/2 needs 2n+1 points
        let sc = solve(&spec, &coarse, 10, units).unwrap();
        let sf = solve(&spec, &fine, 10, units).unwrap();
        for n in 0..10 {
            let exact = n as f64 + 0.5;
            let err_c = (sc[n].energy() - exact).abs();
            let err_f = (sf[n].energy() - exact).abs();
            let ratio = err_c / err_f;
            assert!(
                (3.2..4.8).contains(&ratio),
                "state {n}: refinement ratio {ratio}"
            );
        }
    }

    #[test]
    fn truncation_detected() {
        // A grid far too narrow for the requested states.
        let spec = physical_harmonic();
        let grid = Grid::symmetric(1.5, 512).unwrap();
        let r = solve(&spec, &grid, 8, Units::natural());
        assert!(matches!(r, Err(OracleError::GridTooNarrow { .. })));
    }

    #[test]
    fn exact_ratio_labels() {
        let spec = physical_harmonic();
        let units = Units::natural();
        let grid = Grid::symmetric(7.0, 8192).unwrap();
        let states = solve(&spec, &grid, 3, units).unwrap();
        // Ground state label 0 is rejected.
        assert!(matches!(
            exact_uncertainty_ratio(&states, &grid, units),
            Err(OracleError::StateLabelZero)
        ));
        let reports = exact_uncertainty_ratio(&states[1..], &grid, units).unwrap();
        // U_N = (N + ½)/N for the oscillator.
        assert_abs_diff_eq!(reports[0].u, 1.5, epsilon = 1e-4);
        assert_abs_diff_eq!(reports[1].u, 1.25, epsilon = 1e-4);
    }

    #[test]
    fn semiclassical_count_agrees_with_level_count() {
        // |N_exact(E) − N_semi(E)| ≤ 1 at the 20th eigenvalue.
        let spec = physical_harmonic();
        let units = Units::natural();
        let grid = Grid::symmetric(12.0, 8192).unwrap();
        let states = solve(&spec, &grid, 21, units).unwrap();
        let e20 = states[20].energy();
        let n_exact = states.iter().filter(|s| s.energy() < e20).count() as f64;
        let profile = crate::profiles::LengthProfile::from_spec(&spec).unwrap();
        let triple = crate::semiclassical::integrals(&profile, e20).unwrap();
        let n_semi = crate::semiclassical::state_count(&triple, units);
        assert!(
            (n_exact - n_semi).abs() <= 1.0,
            "exact {n_exact}, semi {n_semi}"
        );
    }

    #[test]
    fn grid_for_spec_reaches_three_times_target() {
        let spec = physical_harmonic();
        let grid = Grid::for_spec(&spec, 10.0, 1024, Units::natural()).unwrap();
        assert!(spec.phi(grid.x_max()) >= 30.0 * (1.0 - 1e-12));
    }
}
