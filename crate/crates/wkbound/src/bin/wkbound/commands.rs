//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::Path;

use wkbound::abel::{self, AbelError, AbelTable, TableKind};
use wkbound::families::{self, FamiliesError};
use wkbound::oracle::{self, Grid, OracleError};
use wkbound::profiles::{LengthProfile, PotentialSpec, ProfileError};
use wkbound::quadrature::QuadratureError;
use wkbound::semiclassical::{self, SemiclassicalError};
use wkbound::units::Units;
use wkbound::variational::{self, VariationalError};

use crate::{
    AnalyzeArgs, CliError, CommonArgs, InvertArgs, OutputFormat, ScanArgs, SweepArgs, SweepFamily,
    VerifyArgs,
};

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::InvalidSpec(_) | ProfileError::InvalidProfile(_) => {
                CliError::Config(e.to_string())
            }
            ProfileError::BelowFloor { .. } => CliError::Config(e.to_string()),
            ProfileError::AssumptionViolation(..) => CliError::Config(e.to_string()),
        }
    }
}

impl From<SemiclassicalError> for CliError {
    fn from(e: SemiclassicalError) -> Self {
        match e {
            SemiclassicalError::EnergyOutOfRange { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<QuadratureError> for CliError {
    fn from(e: QuadratureError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<FamiliesError> for CliError {
    fn from(e: FamiliesError) -> Self {
        match e {
            FamiliesError::Quadrature(q) => CliError::Numerical(q.to_string()),
            FamiliesError::Semiclassical(s) => s.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<AbelError> for CliError {
    fn from(e: AbelError) -> Self {
        match e {
            AbelError::Semiclassical(s) => s.into(),
            AbelError::Quadrature(q) => CliError::Numerical(q.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::InvalidGrid(_) | OracleError::BadEnergyTarget { .. } => {
                CliError::Config(e.to_string())
            }
            OracleError::Profile(p) => p.into(),
            OracleError::Semiclassical(s) => s.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<VariationalError> for CliError {
    fn from(e: VariationalError) -> Self {
        match e {
            VariationalError::NoTrials | VariationalError::NotHarmonicBase => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn units_of(common: &CommonArgs) -> Result<Units, CliError> {
    Units::new(common.mass, common.hbar).map_err(|e| CliError::Config(e.to_string()))
}

fn load_potential(raw: &str) -> Result<PotentialSpec, CliError> {
    let text = if raw.trim_start().starts_with('{') {
        raw.to_string()
    } else {
        std::fs::read_to_string(raw)
            .map_err(|e| CliError::Config(format!("cannot read potential file '{raw}': {e}")))?
    };
    Ok(PotentialSpec::from_json(&text)?)
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::Config(format!("cannot write '{}': {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn energy_grid(emin: f64, emax: f64, n: usize, log: bool) -> Result<Vec<f64>, CliError> {
    if n == 0 {
        return Err(CliError::Config(
            "energy grid is empty (n-energies = 0)".into(),
        ));
    }
    if !emin.is_finite() || !emax.is_finite() || emin > emax {
        return Err(CliError::Config(format!(
            "need emin <= emax with finite values, got {emin} and {emax}"
        )));
    }
    if n == 1 {
        return Ok(vec![emin]);
    }
    if log {
        if !emin.is_finite() || emin <= 0.0 {
            return Err(CliError::Config(format!(
                "log grid requires emin > 0, got {emin}"
            )));
        }
        let (l0, l1) = (emin.ln(), emax.ln());
        Ok((0..n)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
            .collect())
    } else {
        Ok((0..n)
            .map(|i| emin + (emax - emin) * i as f64 / (n - 1) as f64)
            .collect())
    }
}

fn check_energy_domain(spec: &PotentialSpec, energies: &[f64]) -> Result<(), CliError> {
    for &e in energies {
        let ok = spec.v0().strictly_below(e) && spec.e0().strictly_above(e);
        if !ok {
            return Err(CliError::Config(format!(
                "energy {e} outside the potential domain ({}, {})",
                spec.v0(),
                spec.e0()
            )));
        }
    }
    Ok(())
}

pub fn analyze(args: AnalyzeArgs) -> Result<u8, CliError> {
    let spec = load_potential(&args.potential)?;
    let units = units_of(&args.common)?;
    if !args.rel_tol.is_finite() || args.rel_tol <= 0.0 {
        return Err(CliError::Config(format!(
            "rel-tol must be positive, got {}",
            args.rel_tol
        )));
    }
    let energies = energy_grid(args.emin, args.emax, args.n_energies, args.log_grid)?;
    check_energy_domain(&spec, &energies)?;
    let profile = LengthProfile::from_spec(&spec)?;
    let rows = semiclassical::sweep_energies(&profile, &energies, units, args.rel_tol)?;

    let content = match args.common.format {
        OutputFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# wkbound analyze");
            let _ = writeln!(out, "# potential={}", spec.to_json());
            let _ = writeln!(
                out,
                "# mass={} hbar={} rel_tol={}",
                units.mass(),
                units.hbar(),
                args.rel_tol
            );
            let _ = writeln!(out, "E,I,J,K,N,U");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{},{},{}", r.e, r.i, r.j, r.k, r.n, r.u);
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "E": r.e, "I": r.i, "J": r.j, "K": r.k, "N": r.n, "U": r.u
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "command": "analyze",
                "potential": spec,
                "mass": units.mass(),
                "hbar": units.hbar(),
                "rows": rows,
            });
            format!("{doc}\n")
        }
    };
    write_output(args.common.output.as_deref(), &content)?;
    Ok(0)
}

struct SweepRow {
    alpha: f64,
    closed: Option<f64>,
    numeric: Option<f64>,
    status: &'static str,
}

pub fn sweep(args: SweepArgs) -> Result<u8, CliError> {
    let alphas: Vec<f64> = {
        let mut parsed = Vec::new();
        for tok in args
            .alpha_grid
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
        {
            parsed.push(
                tok.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("cannot parse alpha value '{tok}'")))?,
            );
        }
        parsed
    };
    if alphas.is_empty() {
        return Err(CliError::Config("alpha grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let (closed, numeric) = match args.family {
            SweepFamily::PositivePower => {
                let closed = families::u_positive_power(alpha);
                let numeric = closed.is_ok().then(|| {
                    let spec = PotentialSpec::PositivePower {
                        alpha,
                        strength: 1.0,
                        length_scale: 1.0,
                        v0: 0.0,
                    };
                    let profile = LengthProfile::from_spec(&spec)?;
                    let t = semiclassical::integrals(&profile, 1.0)?;
                    Ok::<f64, CliError>(semiclassical::uncertainty_ratio(&t)?)
                });
                (closed, numeric)
            }
            SweepFamily::NegativePower => {
                let closed = families::u_negative_power(alpha);
                let numeric = closed.is_ok().then(|| {
                    let spec = PotentialSpec::NegativePower {
                        alpha,
                        strength: 1.0,
                        length_scale: 1.0,
                        e0: 0.0,
                    };
                    let profile = LengthProfile::from_spec(&spec)?;
                    let t = semiclassical::integrals(&profile, -1.0)?;
                    Ok::<f64, CliError>(semiclassical::uncertainty_ratio(&t)?)
                });
                (closed, numeric)
            }
        };
        match (closed, numeric) {
            (Ok(c), Some(Ok(n))) => rows.push(SweepRow {
                alpha,
                closed: Some(c),
                numeric: Some(n),
                status: "ok",
            }),
            (Ok(_), Some(Err(e))) => return Err(e),
            (Err(e), _) => {
                eprintln!("warning: alpha={alpha}: {e}");
                rows.push(SweepRow {
                    alpha,
                    closed: None,
                    numeric: None,
                    status: "outside_domain",
                });
            }
            (Ok(_), None) => unreachable!("numeric evaluated whenever closed form exists"),
        }
    }

    let content = match args.common.format {
        OutputFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# wkbound sweep");
            let _ = writeln!(out, "# family={:?}", args.family);
            let _ = writeln!(out, "alpha,u_closed_form,u_numeric,abs_diff,status");
            for r in &rows {
                match (r.closed, r.numeric) {
                    (Some(c), Some(n)) => {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{}",
                            r.alpha,
                            c,
                            n,
                            (c - n).abs(),
                            r.status
                        );
                    }
                    _ => {
                        let _ = writeln!(out, "{},,,,{}", r.alpha, r.status);
                    }
                }
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "alpha": r.alpha,
                        "u_closed_form": r.closed,
                        "u_numeric": r.numeric,
                        "abs_diff": r.closed.zip(r.numeric).map(|(c, n)| (c - n).abs()),
                        "status": r.status,
                    })
                })
                .collect();
            let doc = serde_json::json!({"command": "sweep", "rows": rows});
            format!("{doc}\n")
        }
    };
    write_output(args.common.output.as_deref(), &content)?;
    Ok(0)
}

pub fn invert(args: InvertArgs) -> Result<u8, CliError> {
    let file = std::fs::File::open(&args.input)
        .map_err(|e| CliError::Config(format!("cannot read '{}': {e}", args.input.display())))?;
    let table = AbelTable::read_csv(std::io::BufReader::new(file))?;
    if table.kind() != TableKind::IOfE {
        return Err(CliError::Config(format!(
            "input table must be kind I-of-E, got {}",
            table.kind().tag()
        )));
    }
    let interior = &table.abscissae()[1..];
    let mut reconstructed = Vec::with_capacity(interior.len());
    for &v in interior {
        reconstructed.push(abel::inverse_length(&table, v)?);
    }

    let residual = match &args.potential {
        None => None,
        Some(raw) => {
            let spec = load_potential(raw)?;
            let profile = LengthProfile::from_spec(&spec)?;
            let mut max_ell = 0.0f64;
            for &v in interior {
                max_ell = max_ell.max(profile.ell(v));
            }
            let mut worst = 0.0f64;
            if max_ell > 0.0 {
                for (&v, &rec) in interior.iter().zip(&reconstructed) {
                    worst = worst.max((rec - profile.ell(v)).abs() / max_ell);
                }
            }
            Some(worst)
        }
    };

    // Written directly: reconstructions may carry small non-monotone noise
    // that the ell-of-V table validator would reject.
    let content = match args.common.format {
        OutputFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# kind=ell-of-V");
            let _ = writeln!(out, "# method=product-integration");
            if let Some(r) = residual {
                let _ = writeln!(out, "# residual={r}");
            }
            let _ = writeln!(out, "abscissa,value");
            for (&v, &l) in interior.iter().zip(&reconstructed) {
                let _ = writeln!(out, "{v},{l}");
            }
            out
        }
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "command": "invert",
                "kind": "ell-of-V",
                "method": "product-integration",
                "residual": residual,
                "abscissae": interior,
                "values": reconstructed,
            });
            format!("{doc}\n")
        }
    };
    write_output(args.common.output.as_deref(), &content)?;
    Ok(0)
}

/// Energy at which the semiclassical count reaches `target`, by bisection.
fn energy_for_count(profile: &LengthProfile, units: Units, target: f64) -> Result<f64, CliError> {
    let v0 = profile
        .v0()
        .finite()
        .ok_or_else(|| CliError::Config("verify needs a potential with a finite floor".into()))?;
    let cap = profile.e0().finite();
    let count_at = |e: f64| -> Result<f64, CliError> {
        let i = semiclassical::integral_i(profile, e, 1e-8)?;
        Ok((2.0 * units.mass()).sqrt() * i / units.planck())
    };
    let mut hi = v0 + 1.0;
    let mut iters = 0;
    while count_at(hi)? < target {
        let next = v0 + (hi - v0) * 2.0;
        hi = match cap {
            Some(e0) if next >= e0 => {
                if hi >= e0 - 1e-9 * (e0 - v0) {
                    return Err(CliError::Config(format!(
                        "potential holds fewer than {target} states below its continuum limit"
                    )));
                }
                0.5 * (hi + e0)
            }
            _ => next,
        };
        iters += 1;
        if iters > 200 {
            return Err(CliError::Numerical(
                "state-count bisection failed to bracket the target".into(),
            ));
        }
    }
    let mut lo = v0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn verify(args: VerifyArgs) -> Result<u8, CliError> {
    let spec = load_potential(&args.potential)?;
    let units = units_of(&args.common)?;
    if args.n_states == 0 {
        return Err(CliError::Config("n-states must be at least 1".into()));
    }
    let profile = LengthProfile::from_spec(&spec)?;
    let convention = oracle::LabelConvention::for_spec(&spec);
    let solve_count = match convention {
        oracle::LabelConvention::ZeroBased => args.n_states + 1,
        oracle::LabelConvention::OneBased => args.n_states,
    };
    // Semiclassical estimate of the top energy sizes the grid.
    let e_target = energy_for_count(&profile, units, solve_count as f64 + 1.0)?;
    let grid = Grid::for_spec(&spec, e_target, args.grid_points, units)?;
    let states = oracle::solve(&spec, &grid, solve_count, units)?;

    if let Some(path) = &args.dump_states {
        let mut out = String::new();
        let _ = writeln!(out, "N,E,x,psi");
        for s in &states {
            for (i, &p) in s.psi().iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{}", s.label(), s.energy(), grid.node(i), p);
            }
        }
        std::fs::write(path, out)
            .map_err(|e| CliError::Config(format!("cannot write '{}': {e}", path.display())))?;
    }

    let labelled: Vec<_> = states.iter().filter(|s| s.label() >= 1).cloned().collect();
    let reports = oracle::exact_uncertainty_ratio(&labelled, &grid, units)?;

    struct Row {
        n: usize,
        e: f64,
        u_exact: f64,
        u_semi: f64,
        diff: f64,
    }
    let mut rows = Vec::with_capacity(reports.len());
    for (state, rep) in labelled.iter().zip(&reports) {
        let semi = semiclassical::report(&profile, state.energy(), units, 1e-10)?;
        rows.push(Row {
            n: state.label(),
            e: state.energy(),
            u_exact: rep.u,
            u_semi: semi.u,
            diff: (rep.u - semi.u).abs(),
        });
    }
    let max_diff = rows
        .iter()
        .filter(|r| r.n >= args.n_min)
        .map(|r| r.diff)
        .fold(0.0f64, f64::max);

    let content = match args.common.format {
        OutputFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# wkbound verify");
            let _ = writeln!(out, "# potential={}", spec.to_json());
            let _ = writeln!(
                out,
                "# grid_points={} x_max={}",
                grid.n_points(),
                grid.x_max()
            );
            let _ = writeln!(out, "N,E,U_exact,U_semiclassical,abs_diff");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{},{}", r.n, r.e, r.u_exact, r.u_semi, r.diff);
            }
            let _ = writeln!(out, "# max_diff_n_ge_{}={}", args.n_min, max_diff);
            out
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "N": r.n, "E": r.e,
                        "U_exact": r.u_exact,
                        "U_semiclassical": r.u_semi,
                        "abs_diff": r.diff,
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "command": "verify",
                "potential": spec,
                "n_min": args.n_min,
                "max_diff_above_n_min": max_diff,
                "rows": rows,
            });
            format!("{doc}\n")
        }
    };
    write_output(args.common.output.as_deref(), &content)?;
    Ok(0)
}

pub fn scan(args: ScanArgs) -> Result<u8, CliError> {
    if args.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let base = LengthProfile::from_spec(&PotentialSpec::Harmonic {
        amplitude: 2.0,
        v0: 0.0,
    })?;
    let report = variational::perturbation_scan(&base, args.trials, args.seed)?;
    let content = format!(
        "{}\n",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    write_output(args.common.output.as_deref(), &content)?;
    if report.max_u > 1.0 + 1e-6 {
        eprintln!(
            "bound violation: max U = {} exceeds 1 + 1e-6 (seed {}, trials {})",
            report.max_u, args.seed, args.trials
        );
        return Ok(1);
    }
    Ok(0)
}
