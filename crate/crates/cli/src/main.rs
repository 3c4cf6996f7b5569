//! Command-line front end: enumeration, the shift poset, spectra, exact
//! polynomials and the verification suite.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;
use treeshift::exactpoly::{aux_poly, charpoly, BiPoly};
use treeshift::gts::build_hasse;
use treeshift::matrices::{
    exp_distance, exp_distance_qt, hermitian_qt_laplacian, q_laplacian, HermitianMatrix, Orientation,
};
use treeshift::spectra::{herm_eigen, sym_eigen, Spectrum};
use treeshift::trees::{enumerate_trees, prufer_oracle, LabelledTree, TreeCode};
use treeshift::verify::{
    check_monotonicity_on, default_hermitian_grid, run_claim, validate_hermitian_grid, CheckReport, QGrid, Selector,
    SuiteConfig, Tolerances, VerifyError,
};

#[derive(Parser)]
#[command(name = "treeshift", version, about = "Generalized tree shift poset and q-Laplacian spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for verification sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// List canonical level sequences of all trees of order n.
    Trees {
        #[arg(long)]
        n: usize,
        /// Use the brute-force Pruefer enumeration instead.
        #[arg(long)]
        oracle: bool,
    },
    /// Hasse diagram of the shift poset (dot or json).
    Poset {
        #[arg(long)]
        n: usize,
    },
    /// Eigenvalues of a matrix of the tree, as CSV `index,value,cluster`.
    Spectrum {
        /// Level sequence, e.g. 0,1,2,1.
        code: String,
        #[command(flatten)]
        params: MatrixParams,
    },
    /// Dump the matrix of the tree as CSV.
    Matrix {
        code: String,
        #[command(flatten)]
        params: MatrixParams,
    },
    /// Exact bivariate characteristic polynomial det(xI - L^q).
    Charpoly {
        code: String,
        /// Vertices whose rows and columns are removed first.
        #[arg(long, value_delimiter = ',')]
        deleted: Vec<usize>,
        /// Print the auxiliary polynomial at this vertex instead.
        #[arg(long, conflicts_with = "deleted")]
        aux: Option<usize>,
    },
    /// CSV samples `x,f,f_minor,aux` of the characteristic polynomial, its
    /// minor at a vertex and the auxiliary polynomial, at fixed q.
    AuxCurve {
        code: String,
        #[arg(long)]
        vertex: usize,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Run one claim checker, or all of them.
    Verify {
        /// all, table1, monotonicity, structural, interlacing, aux, star,
        /// bounds, qt, ed, identities or solvers.
        selector: String,
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Extra real q values added to the default grid.
        #[arg(long, allow_negative_numbers = true)]
        q: Vec<f64>,
        /// Extra complex q values `re,im` for the Hermitian grid.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        qt: Vec<Complex64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replace every tolerance by this value (testing only).
        #[arg(long)]
        tol_override: Option<f64>,
        /// Add a fake cover between two trees (negative control).
        #[arg(long, hide = true, num_args = 2, value_names = ["LOWER", "UPPER"])]
        inject_cover: Option<Vec<String>>,
    },
}

#[derive(clap::Args)]
struct MatrixParams {
    #[arg(long, value_enum, default_value_t = MatrixKind::Qlap)]
    matrix: MatrixKind,
    /// Real parameter.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "qt")]
    q: Option<f64>,
    /// Complex parameter `re,im`; t is its conjugate.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    qt: Option<Complex64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MatrixKind {
    Qlap,
    Qtlap,
    Ed,
    Edqt,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

enum CliError {
    Usage(anyhow::Error),
    Failure(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Usage(e)
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::OrderOutOfRange { .. } | VerifyError::InvalidGrid(_) | VerifyError::UnknownSelector(_) => {
                CliError::Usage(e.into())
            }
            other => CliError::Failure(other.into()),
        }
    }
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected re,im but got {s:?}"))?;
    let parse = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    Ok(Complex64::new(parse(re)?, parse(im)?))
}

fn parse_tree(code: &str) -> anyhow::Result<(TreeCode, LabelledTree)> {
    let parsed: TreeCode = code.parse().with_context(|| format!("invalid tree code {code:?}"))?;
    let canonical = parsed.canonicalize();
    let tree = canonical.to_tree();
    Ok((canonical, tree))
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn format_or(format: Option<Format>, default: Format, allowed: &[Format]) -> anyhow::Result<Format> {
    let f = format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        bail!("format not supported by this command")
    }
}

/// Real symmetric or Hermitian matrix selected by the flags.
enum Built {
    Real(treeshift::matrices::SymMatrix),
    Complex(HermitianMatrix),
}

fn build_matrix(t: &LabelledTree, p: &MatrixParams) -> anyhow::Result<Built> {
    let orientation = Orientation::away_from(t, 0);
    match (p.matrix, p.q, p.qt) {
        (_, None, None) => bail!("one of --q or --qt is required"),
        (MatrixKind::Qlap, Some(q), None) => Ok(Built::Real(q_laplacian(t, q))),
        (MatrixKind::Ed, Some(q), None) => Ok(Built::Real(exp_distance(t, q))),
        (MatrixKind::Qlap | MatrixKind::Ed, _, Some(_)) => bail!("--qt needs --matrix qtlap or edqt"),
        (MatrixKind::Qtlap, q, qt) => {
            let z = qt.unwrap_or_else(|| Complex64::new(q.unwrap_or_default(), 0.0));
            Ok(Built::Complex(hermitian_qt_laplacian(t, &orientation, z)))
        }
        (MatrixKind::Edqt, q, qt) => {
            let z = qt.unwrap_or_else(|| Complex64::new(q.unwrap_or_default(), 0.0));
            let m = exp_distance_qt(t, &orientation, z, z.conj());
            Ok(Built::Complex(HermitianMatrix::try_from_matrix(m)?))
        }
    }
}

fn spectrum_of(built: &Built) -> anyhow::Result<Spectrum> {
    Ok(match built {
        Built::Real(m) => sym_eigen(m)?,
        Built::Complex(m) => herm_eigen(m)?,
    })
}

fn cmd_trees(n: usize, oracle: bool, format: Format) -> anyhow::Result<String> {
    let codes = if oracle { prufer_oracle(n)? } else { enumerate_trees(n)? };
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&codes)? + "\n",
        _ => codes.iter().map(|c| format!("{c}\n")).collect(),
    })
}

fn cmd_charpoly(code: &str, deleted: &[usize], aux: Option<usize>, format: Format) -> anyhow::Result<String> {
    let (_, t) = parse_tree(code)?;
    let p: BiPoly = match aux {
        Some(v) => aux_poly(&t, v)?,
        None => charpoly(&t, deleted)?,
    };
    Ok(match format {
        Format::Json => serde_json::to_string(&json!({ "terms": p.to_json_terms(), "text": p.to_string() }))? + "\n",
        _ => format!("{p}\n"),
    })
}

fn cmd_aux_curve(code: &str, v: usize, q: f64, from: f64, to: f64, steps: usize) -> anyhow::Result<String> {
    let (_, t) = parse_tree(code)?;
    if steps < 1 {
        bail!("--steps must be positive");
    }
    let f = charpoly(&t, &[])?;
    let minor = charpoly(&t, &[v])?;
    let aux = aux_poly(&t, v)?;
    let mut out = String::from("x,f,f_minor,aux\n");
    for k in 0..=steps {
        let x = from + (to - from) * k as f64 / steps as f64;
        out.push_str(&format!(
            "{x:.16e},{:.16e},{:.16e},{:.16e}\n",
            f.eval_f64(q, x),
            minor.eval_f64(q, x),
            aux.eval_f64(q, x)
        ));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    selector: &str,
    n: usize,
    q: &[f64],
    qt: &[Complex64],
    seed: u64,
    tol_override: Option<f64>,
    inject: Option<&[String]>,
    format: Format,
) -> Result<(String, bool), CliError> {
    let sel: Selector = selector.parse()?;
    let grid = QGrid::default().with_extra(q.iter().copied())?;
    let mut hermitian = default_hermitian_grid();
    hermitian.extend_from_slice(qt);
    validate_hermitian_grid(&hermitian)?;
    let cfg = SuiteConfig {
        n,
        grid,
        hermitian,
        tolerances: tol_override.map_or_else(Tolerances::default, Tolerances::overridden),
        seed,
        ..SuiteConfig::new(n)
    };
    let claims: Vec<Selector> = match sel {
        Selector::All => Selector::CLAIMS.to_vec(),
        s => vec![s],
    };
    let mut reports: Vec<CheckReport> = Vec::new();
    for claim in claims {
        let report = match (claim, inject) {
            (Selector::Monotonicity, Some(pair)) => {
                let mut h = build_hasse(n).map_err(VerifyError::from)?;
                let index = |code: &str| -> Result<usize, CliError> {
                    let (c, _) = parse_tree(code)?;
                    h.index_of(&c).ok_or_else(|| CliError::Usage(anyhow!("{code} is not a tree of order {n}")))
                };
                let (lower, upper) = (index(&pair[0])?, index(&pair[1])?);
                h.inject_cover(lower, upper);
                check_monotonicity_on(&h, &cfg.grid, &cfg.tolerances)?
            }
            (_, Some(_)) if sel != Selector::All => {
                return Err(CliError::Usage(anyhow!("--inject-cover only applies to monotonicity")));
            }
            (c, _) => run_claim(c, &cfg)?,
        };
        reports.push(report);
    }
    let passed = reports.iter().all(CheckReport::passed);
    let text = match format {
        Format::Json => {
            let body = json!({
                "passed": passed,
                "n": n,
                "reports": reports.iter().map(CheckReport::to_json).collect::<Vec<_>>(),
            });
            serde_json::to_string_pretty(&body).map_err(anyhow::Error::from)? + "\n"
        }
        _ => {
            let mut s: String = reports.iter().map(CheckReport::to_text).collect();
            s.push_str(&format!("overall: {}\n", if passed { "PASS" } else { "FAIL" }));
            s
        }
    };
    if !passed && format != Format::Json {
        let dump: Vec<_> = reports.iter().filter(|r| !r.passed()).map(CheckReport::to_json).collect();
        eprintln!("{}", serde_json::to_string_pretty(&dump).unwrap_or_default());
    }
    Ok((text, passed))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage(anyhow!("--jobs must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Usage(e.into()))?;
    }
    let text = match &cli.command {
        Command::Trees { n, oracle } => {
            cmd_trees(*n, *oracle, format_or(cli.format, Format::Text, &[Format::Text, Format::Json])?)?
        }
        Command::Poset { n } => {
            let h = build_hasse(*n).map_err(anyhow::Error::from)?;
            match format_or(cli.format, Format::Dot, &[Format::Dot, Format::Json])? {
                Format::Json => h.to_json() + "\n",
                _ => h.to_dot(),
            }
        }
        Command::Spectrum { code, params } => {
            format_or(cli.format, Format::Csv, &[Format::Csv])?;
            let (_, t) = parse_tree(code)?;
            spectrum_of(&build_matrix(&t, params)?)?.to_csv()
        }
        Command::Matrix { code, params } => {
            format_or(cli.format, Format::Csv, &[Format::Csv])?;
            let (_, t) = parse_tree(code)?;
            match build_matrix(&t, params)? {
                Built::Real(m) => m.to_csv(),
                Built::Complex(m) => m.as_matrix().to_csv(),
            }
        }
        Command::Charpoly { code, deleted, aux } => {
            cmd_charpoly(code, deleted, *aux, format_or(cli.format, Format::Text, &[Format::Text, Format::Json])?)?
        }
        Command::AuxCurve { code, vertex, q, from, to, steps } => {
            format_or(cli.format, Format::Csv, &[Format::Csv])?;
            cmd_aux_curve(code, *vertex, *q, *from, *to, *steps)?
        }
        Command::Verify { selector, n, q, qt, seed, tol_override, inject_cover } => {
            let format = format_or(cli.format, Format::Text, &[Format::Text, Format::Json])?;
            let (text, passed) =
                cmd_verify(selector, *n, q, qt, *seed, *tol_override, inject_cover.as_deref(), format)?;
            emit(&cli.out, &text)?;
            return Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    };
    emit(&cli.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(e)) => {
            eprintln!("verification error: {e:#}");
            ExitCode::from(1)
        }
    }
}
