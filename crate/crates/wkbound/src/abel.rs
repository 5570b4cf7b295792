//! The transform pair between accessible-length profiles and the kernel
//! integral I(E).
//!
//! Forward: I(E) = ∫ ℓ(V) dV/√(E−V). Inverse: the accumulated length
//! 𝓛(V) = (1/π)∫ I(E) dE/√(V−E), and ℓ(V) = d𝓛/dV = (1/π)∫ I′(E) dE/√(V−E),
//! a half-order derivative realized through its integral representation.
//!
//! Tabulated data inverts by product integration: the singular kernel is
//! integrated exactly against the piecewise-linear interpolant of I, which
//! makes the inverse exact for affine I and robust at the V = E endpoint.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::profiles::LengthProfile;
use crate::quadrature::{integrate_singular, QuadratureError, SingularIntegralSpec};
use crate::semiclassical::{self, SemiclassicalError};

#[derive(Debug, Error)]
pub enum AbelError {
    #[error("table must be kind {expected:?}, got {got:?}")]
    KindMismatch { expected: TableKind, got: TableKind },
    #[error("level {v} outside table coverage [{low}, {high}]")]
    Coverage { v: f64, low: f64, high: f64 },
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("CSV error on line(s) {lines:?}: {message}")]
    Csv { lines: Vec<usize>, message: String },
    #[error("grid too coarse: {got} points, need at least {need}")]
    GridTooCoarse { got: usize, need: usize },
    #[error(transparent)]
    Semiclassical(#[from] SemiclassicalError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// What a table's values mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    /// I as a function of energy E.
    IOfE,
    /// Accumulated length 𝓛 as a function of level V.
    LOfV,
    /// Accessible length ℓ as a function of level V.
    EllOfV,
}

impl TableKind {
    pub fn tag(self) -> &'static str {
        match self {
            TableKind::IOfE => "I-of-E",
            TableKind::LOfV => "L-of-V",
            TableKind::EllOfV => "ell-of-V",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "I-of-E" => Some(TableKind::IOfE),
            "L-of-V" => Some(TableKind::LOfV),
            "ell-of-V" => Some(TableKind::EllOfV),
            _ => None,
        }
    }
}

/// Sampled transform data: strictly increasing abscissae with non-negative
/// values; ℓ-tables must additionally be non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelTable {
    kind: TableKind,
    abscissae: Vec<f64>,
    values: Vec<f64>,
}

impl AbelTable {
    pub fn new(kind: TableKind, abscissae: Vec<f64>, values: Vec<f64>) -> Result<Self, AbelError> {
        if abscissae.len() != values.len() || abscissae.is_empty() {
            return Err(AbelError::InvalidTable(format!(
                "need matching non-empty columns, got {} and {} rows",
                abscissae.len(),
                values.len()
            )));
        }
        for pair in abscissae.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(AbelError::InvalidTable(format!(
                    "abscissae must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(AbelError::InvalidTable(
                "values must be finite and non-negative".into(),
            ));
        }
        if kind == TableKind::EllOfV {
            for pair in values.windows(2) {
                if pair[1] < pair[0] {
                    return Err(AbelError::InvalidTable(format!(
                        "ell-of-V values must be non-decreasing, got {} then {}",
                        pair[0], pair[1]
                    )));
                }
            }
        }
        Ok(Self {
            kind,
            abscissae,
            values,
        })
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Write as CSV: a `# kind=<tag>` header, a column header, then rows in
    /// full-precision (shortest round-trip) decimal.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), AbelError> {
        writeln!(w, "# kind={}", self.kind.tag())?;
        writeln!(w, "abscissa,value")?;
        for (a, v) in self.abscissae.iter().zip(&self.values) {
            writeln!(w, "{a},{v}")?;
        }
        Ok(())
    }

    /// Parse the CSV format written by [`AbelTable::write_csv`]. Malformed
    /// rows are reported with their 1-based line numbers.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, AbelError> {
        let mut kind = None;
        let mut abscissae = Vec::new();
        let mut values = Vec::new();
        let mut bad_lines = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(tag) = rest.strip_prefix("kind=") {
                    kind = TableKind::from_tag(tag.trim());
                    if kind.is_none() {
                        return Err(AbelError::Csv {
                            lines: vec![line_no],
                            message: format!("unknown table kind '{}'", tag.trim()),
                        });
                    }
                }
                continue;
            }
            if line == "abscissa,value" {
                continue;
            }
            let mut parts = line.split(',');
            let a = parts
                .next()
                .map(str::trim)
                .and_then(|s| s.parse::<f64>().ok());
            let v = parts
                .next()
                .map(str::trim)
                .and_then(|s| s.parse::<f64>().ok());
            match (a, v, parts.next()) {
                (Some(a), Some(v), None) => {
                    abscissae.push(a);
                    values.push(v);
                }
                _ => bad_lines.push(line_no),
            }
        }
        if !bad_lines.is_empty() {
            return Err(AbelError::Csv {
                lines: bad_lines,
                message: "rows must be two comma-separated numbers".into(),
            });
        }
        let kind = kind.ok_or_else(|| AbelError::Csv {
            lines: vec![1],
            message: "missing '# kind=<tag>' header".into(),
        })?;
        Self::new(kind, abscissae, values)
    }
}

/// Forward transform: I at each energy. Energies must be non-decreasing into
/// the profile's domain; an energy exactly at a finite floor yields I = 0.
pub fn forward(
    profile: &LengthProfile,
    energies: &[f64],
    rel_tol: f64,
) -> Result<AbelTable, AbelError> {
    let floor = profile.v0().finite();
    let mut values = Vec::with_capacity(energies.len());
    for &e in energies {
        if floor == Some(e) {
            values.push(0.0);
        } else {
            values.push(semiclassical::integral_i(profile, e, rel_tol)?);
        }
    }
    AbelTable::new(TableKind::IOfE, energies.to_vec(), values)
}

fn check_coverage(table: &AbelTable, v: f64) -> Result<(), AbelError> {
    let low = table.abscissae[0];
    let high = *table.abscissae.last().unwrap();
    if v < low || v > high {
        return Err(AbelError::Coverage { v, low, high });
    }
    Ok(())
}

/// ∫ (c₀ + c₁·(E−e₁)) dE/√(v−E) over [e₁, e₂] with e₂ ≤ v, exactly and
/// without cancellation: moments of δ = E−e₁ against the kernel.
fn affine_against_kernel(e1: f64, e2: f64, c0: f64, c1: f64, v: f64) -> f64 {
    let w1 = v - e1;
    let dw = e2 - e1;
    let w2 = w1 - dw;
    let (r1, r2) = (w1.sqrt(), w2.sqrt());
    let rsum = r1 + r2;
    if rsum == 0.0 {
        return 0.0;
    }
    let m0 = 2.0 * dw / rsum;
    let m1 = (2.0 / 3.0) * dw * dw * (rsum + r1) / (rsum * rsum);
    c0 * m0 + c1 * m1
}

/// Accumulated accessible length 𝓛(V) = (1/π)∫ I(E) dE/√(V−E) from a sampled
/// I-table, by product integration against the piecewise-linear interpolant.
/// Exact for affine I. The table's first abscissa is taken as the floor V₀.
pub fn inverse_accumulated(table: &AbelTable, v: f64) -> Result<f64, AbelError> {
    if table.kind != TableKind::IOfE {
        return Err(AbelError::KindMismatch {
            expected: TableKind::IOfE,
            got: table.kind,
        });
    }
    check_coverage(table, v)?;
    let xs = &table.abscissae;
    let ys = &table.values;
    let mut acc = 0.0;
    for i in 0..xs.len() - 1 {
        if xs[i] >= v {
            break;
        }
        let hi = xs[i + 1].min(v);
        let slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        acc += affine_against_kernel(xs[i], hi, ys[i], slope, v);
    }
    Ok(acc / std::f64::consts::PI)
}

/// Accumulated length for an analytic (non-tabled) I, by singular quadrature:
/// 𝓛(V) = (1/π)∫_{V₀}^{V} I(E) dE/√(V−E).
pub fn inverse_accumulated_fn(
    i_of_e: &dyn Fn(f64) -> f64,
    v0: f64,
    v: f64,
    rel_tol: f64,
) -> Result<f64, AbelError> {
    let r = integrate_singular(&SingularIntegralSpec::new(&i_of_e, v0, v).with_rel_tol(rel_tol))?;
    Ok(r.value / std::f64::consts::PI)
}

/// Accessible length ℓ(V) = (1/π)∫ I′(E) dE/√(V−E) from a sampled I-table.
///
/// I′ is the piecewise-constant slope of the table, integrated exactly
/// against the kernel: Σᵢ slopeᵢ·2(√(V−eᵢ) − √(V−eᵢ₊₁)). Slopes at the two
/// ends are one-sided, so accuracy is reduced over the first subinterval
/// when I′ diverges at the floor (square wells).
pub fn inverse_length(table: &AbelTable, v: f64) -> Result<f64, AbelError> {
    if table.kind != TableKind::IOfE {
        return Err(AbelError::KindMismatch {
            expected: TableKind::IOfE,
            got: table.kind,
        });
    }
    check_coverage(table, v)?;
    let xs = &table.abscissae;
    let ys = &table.values;
    let mut acc = 0.0;
    for i in 0..xs.len() - 1 {
        if xs[i] >= v {
            break;
        }
        let hi = xs[i + 1].min(v);
        let slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        let (r1, r2) = ((v - xs[i]).sqrt(), (v - hi).sqrt());
        acc += slope * 2.0 * (r1 - r2);
    }
    Ok(acc / std::f64::consts::PI)
}

/// Forward-then-inverse self check: reconstruct ℓ on the grid interior and
/// return max |ℓ_rec − ℓ| / max ℓ. The grid should start at the profile
/// floor and contain at least 64 points.
pub fn roundtrip_residual(
    profile: &LengthProfile,
    grid: &[f64],
    rel_tol: f64,
) -> Result<f64, AbelError> {
    if grid.len() < 64 {
        return Err(AbelError::GridTooCoarse {
            got: grid.len(),
            need: 64,
        });
    }
    let table = forward(profile, grid, rel_tol)?;
    let mut max_ell = 0.0f64;
    for &v in &grid[1..] {
        max_ell = max_ell.max(profile.ell(v));
    }
    if max_ell == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for &v in &grid[1..] {
        let rec = inverse_length(&table, v)?;
        worst = worst.max((rec - profile.ell(v)).abs() / max_ell);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::profiles::{LengthProfile, PotentialSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn harmonic(a: f64) -> LengthProfile {
        LengthProfile::from_spec(&PotentialSpec::Harmonic {
            amplitude: a,
            v0: 0.0,
        })
        .unwrap()
    }

    fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn forward_harmonic_single_energy() {
        // I(E) = (π/2)AΔ: A=2, Δ=1 → π.
        let table = forward(&harmonic(2.0), &[1.0], 1e-12).unwrap();
        assert_relative_eq!(table.values()[0], PI, max_relative = 1e-10);
    }

    #[test]
    fn forward_zero_profile() {
        let zero = LengthProfile::piecewise_linear(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let table = forward(&zero, &linspace(0.0, 1.0, 8), 1e-10).unwrap();
        assert!(table.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_power_law_matches_beta() {
        // α=1, A=L=1, E=1: I = 2B(2, ½) = 8/3.
        let profile = LengthProfile::from_spec(&PotentialSpec::PositivePower {
            alpha: 1.0,
            strength: 1.0,
            length_scale: 1.0,
            v0: 0.0,
        })
        .unwrap();
        let table = forward(&profile, &[1.0], 1e-12).unwrap();
        let want = 2.0 * families::beta(2.0, 0.5).unwrap();
        assert_relative_eq!(table.values()[0], want, max_relative = 1e-10);
        assert_relative_eq!(table.values()[0], 8.0 / 3.0, max_relative = 1e-10);
    }

    #[test]
    fn inverse_accumulated_linear_i_is_exact() {
        // I(E) = (π/2)A·E with A=2 → 𝓛(V) = (2A/3)V^{3/2}.
        let grid = linspace(0.0, 2.0, 33);
        let values: Vec<f64> = grid.iter().map(|&e| 0.5 * PI * 2.0 * e).collect();
        let table = AbelTable::new(TableKind::IOfE, grid, values).unwrap();
        let got = inverse_accumulated(&table, 1.0).unwrap();
        assert_relative_eq!(got, 4.0 / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn inverse_accumulated_zero() {
        let grid = linspace(0.0, 1.0, 16);
        let table = AbelTable::new(TableKind::IOfE, grid, vec![0.0; 16]).unwrap();
        assert_eq!(inverse_accumulated(&table, 0.75).unwrap(), 0.0);
    }

    #[test]
    fn inverse_accumulated_square_well() {
        // I = 2L√E with L=1 → 𝓛(V) = V exactly (ℓ ≡ L above the floor).
        let grid = linspace(0.0, 1.5, 3001);
        let values: Vec<f64> = grid.iter().map(|&e| 2.0 * e.sqrt()).collect();
        let table = AbelTable::new(TableKind::IOfE, grid, values).unwrap();
        let got = inverse_accumulated(&table, 1.0).unwrap();
        assert_abs_diff_eq!(got, 1.0, epsilon = 2e-4);
    }

    #[test]
    fn inverse_length_linear_i() {
        // I(E) = (π/2)·2·E → ℓ(V) = 2√V; at V=4, ℓ=4.
        let grid = linspace(0.0, 5.0, 65);
        let values: Vec<f64> = grid.iter().map(|&e| PI * e).collect();
        let table = AbelTable::new(TableKind::IOfE, grid, values).unwrap();
        assert_relative_eq!(
            inverse_length(&table, 4.0).unwrap(),
            4.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn inverse_length_zero() {
        let grid = linspace(0.0, 1.0, 16);
        let table = AbelTable::new(TableKind::IOfE, grid, vec![0.0; 16]).unwrap();
        assert_eq!(inverse_length(&table, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn inverse_length_recovers_square_well_width() {
        // The half-derivative of 2L√E is the constant L: the inversion must
        // return the width away from the first subinterval even though the
        // table violates ℓ(V₀⁺) → 0.
        let l = 3.0;
        let grid = linspace(0.0, 2.0, 2049);
        let values: Vec<f64> = grid.iter().map(|&e| 2.0 * l * e.sqrt()).collect();
        let table = AbelTable::new(TableKind::IOfE, grid, values).unwrap();
        for &v in &[0.5, 1.0, 1.8] {
            let got = inverse_length(&table, v).unwrap();
            assert_relative_eq!(got, l, max_relative = 2e-3);
        }
    }

    #[test]
    fn inverse_monomial_exactness_against_beta() {
        // For I(E) = (E−V₀)^p: 𝓛(V) = (V−V₀)^{p+1/2} B(p+1, ½)/π.
        for &p in &[0.5, 1.0, 1.5] {
            let f = move |e: f64| (e + 1.0).powf(p);
            let v = 0.7;
            let got = inverse_accumulated_fn(&f, -1.0, v, 1e-12).unwrap();
            let want = (v + 1.0).powf(p + 0.5) * families::beta(p + 1.0, 0.5).unwrap() / PI;
            assert_relative_eq!(got, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn inverse_length_is_derivative_of_accumulated() {
        let profile = harmonic(1.7);
        let grid = linspace(0.0, 3.0, 1025);
        let table = forward(&profile, &grid, 1e-11).unwrap();
        let v = 1.9;
        let h = 1e-3;
        let da = (inverse_accumulated(&table, v + h).unwrap()
            - inverse_accumulated(&table, v - h).unwrap())
            / (2.0 * h);
        let ell = inverse_length(&table, v).unwrap();
        assert_relative_eq!(da, ell, max_relative = 1e-4);
    }

    #[test]
    fn roundtrip_residual_harmonic() {
        let profile = harmonic(2.0);
        let grid = linspace(0.0, 2.0, 512);
        let res = roundtrip_residual(&profile, &grid, 1e-10).unwrap();
        assert!(res < 1e-3, "residual {res}");
    }

    #[test]
    fn roundtrip_residual_improves_with_grid() {
        let profile = LengthProfile::from_spec(&PotentialSpec::PositivePower {
            alpha: 2.0,
            strength: 1.0,
            length_scale: 1.0,
            v0: 0.0,
        })
        .unwrap();
        let res512 = roundtrip_residual(&profile, &linspace(0.0, 2.0, 512), 1e-10).unwrap();
        let res1024 = roundtrip_residual(&profile, &linspace(0.0, 2.0, 1024), 1e-10).unwrap();
        assert!(res512 < 1e-3, "residual {res512}");
        assert!(res1024 < res512, "no improvement: {res512} -> {res1024}");
    }

    #[test]
    fn roundtrip_zero_profile() {
        let zero = LengthProfile::piecewise_linear(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let res = roundtrip_residual(&zero, &linspace(0.0, 1.0, 64), 1e-10).unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn roundtrip_needs_dense_grid() {
        let profile = harmonic(1.0);
        assert!(matches!(
            roundtrip_residual(&profile, &linspace(0.0, 1.0, 10), 1e-10),
            Err(AbelError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn coverage_errors() {
        let table = AbelTable::new(TableKind::IOfE, vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            inverse_accumulated(&table, 1.5),
            Err(AbelError::Coverage { .. })
        ));
        let ell_table = AbelTable::new(TableKind::EllOfV, vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            inverse_length(&ell_table, 0.5),
            Err(AbelError::KindMismatch { .. })
        ));
    }

    #[test]
    fn table_validation() {
        assert!(AbelTable::new(TableKind::IOfE, vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(AbelTable::new(TableKind::IOfE, vec![0.0, 1.0], vec![-1.0, 1.0]).is_err());
        assert!(AbelTable::new(TableKind::EllOfV, vec![0.0, 1.0], vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let table = AbelTable::new(
            TableKind::IOfE,
            vec![0.0, 0.1, 0.25, 1.0 / 3.0],
            vec![0.0, 0.731058578630004, 1.5, 2.25],
        )
        .unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let back = AbelTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(table, back);
    }

    #[test]
    fn csv_reports_bad_lines() {
        let text = "# kind=I-of-E\nabscissa,value\n0.0,0.0\nnot,a,number\n1.0\n2.0,4.0\n";
        let err = AbelTable::read_csv(text.as_bytes()).unwrap_err();
        match err {
            AbelError::Csv { lines, .. } => assert_eq!(lines, vec![4, 5]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_requires_kind() {
        let text = "abscissa,value\n0.0,0.0\n1.0,1.0\n";
        assert!(matches!(
            AbelTable::read_csv(text.as_bytes()),
            Err(AbelError::Csv { .. })
        ));
    }
}
