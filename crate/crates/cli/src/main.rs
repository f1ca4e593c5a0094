//! Batch command-line interface: sampling, density evaluation, additive
//! convolution, and the verification suites, with reproducible seeded
//! configuration. Every output file embeds the full command configuration
//! and library version in `#` header lines.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 domain error.

use clap::{Parser, Subcommand, ValueEnum};
use rmt_core::ensemble::{
    extract_pseudo_diagonal, extract_spectrum, lu_diagonal, sample_matrix, substream,
    EnsembleSpec, MatrixDensity, MatrixSpace, SpaceKind,
};
use rmt_core::grid::GridAxis;
use rmt_core::haar::{build_unitary, sample_haar_coordinates};
use rmt_core::principles::{
    additive_convolve, cue_weight, derivative_principle_hankel_unified,
    derivative_principle_herm, derivative_principle_hermplus, derivative_principle_unitary,
    lu_weight_wishart, PrincipleDensity,
};
use rmt_core::weights::{Domain, WeightFunction};
use rmt_core::RmtError;
use std::io::Write;
use std::path::PathBuf;

const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Gaussian variance conventions, recorded in every output header.
const CONVENTION: &str = "herm diag N(0,1); io/usp pseudo-diag N(0,1); chiral entries std complex";

#[derive(Parser)]
#[command(
    name = "rmt",
    version,
    about = "invariant random-matrix ensembles and derivative principles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceArg {
    Herm,
    IoEven,
    IoOdd,
    Usp,
    Chiral,
    HermPlus,
    Unitary,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DensityArg {
    Gaussian,
    Ginibre,
    Wishart,
    Haar,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CoordsArg {
    /// sample unitary matrices through the iterative angle coordinates and
    /// include the angles as replay columns
    AppendixB,
    /// plain QR-based Haar sampling
    Qr,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BuiltinArg {
    Gue,
    IoEven,
    IoOdd,
    Usp,
    Chiral,
    Wishart,
    Cue,
}

#[derive(Subcommand)]
enum Command {
    /// Draw spectra (plus auxiliary entries) from a built-in ensemble.
    Sample {
        #[arg(long, value_enum)]
        space: SpaceArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        density: DensityArg,
        /// Hankel parameter for the chiral space (columns minus rows).
        #[arg(long, default_value_t = 0)]
        nu: u32,
        /// Degrees of freedom for the Wishart density (defaults to n).
        #[arg(long)]
        dof: Option<usize>,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "qr")]
        coords: CoordsArg,
        /// Scale of the Gaussian/Ginibre densities.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a derivative-principle density on a grid.
    Density {
        #[arg(long, value_enum, conflicts_with = "weight_file")]
        builtin: Option<BuiltinArg>,
        /// Weight function JSON (pseudo-diagonal / LU / torus weight).
        #[arg(long)]
        weight_file: Option<PathBuf>,
        /// Space for a weight-file run.
        #[arg(long, value_enum)]
        space: Option<SpaceArg>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        nu: u32,
        #[arg(long)]
        dof: Option<usize>,
        /// Grid as min,max,count per axis (shared across axes).
        #[arg(long, default_value = "-4,4,81")]
        grid: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Additive convolution of two diagonal weights, then the principle.
    Convolve {
        #[arg(long)]
        weight_a: PathBuf,
        #[arg(long)]
        weight_b: PathBuf,
        #[arg(long, value_enum)]
        space: SpaceArg,
        #[arg(long, default_value_t = 0)]
        nu: u32,
        #[arg(long, default_value = "-4,4,81")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite, emitting one JSON report per line.
    Verify {
        #[arg(long)]
        suite: String,
        /// Sample budget, scientific notation accepted (e.g. 1e5).
        #[arg(long, default_value = "1e4")]
        budget: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Perturb predictions; every statistical comparison must fail.
        #[arg(long, default_value_t = false)]
        negative_control: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &RmtError) -> i32 {
    match e {
        RmtError::Config(_) | RmtError::Io(_) | RmtError::Serde(_) => 2,
        _ => 3,
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}

fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>, RmtError> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::BufWriter::new(std::io::stdout())),
    })
}

fn parse_grid(spec: &str) -> Result<GridAxis, RmtError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(RmtError::Config(format!("grid '{spec}' is not min,max,count")));
    }
    let min: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| RmtError::Config("bad grid min".into()))?;
    let max: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| RmtError::Config("bad grid max".into()))?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| RmtError::Config("bad grid count".into()))?;
    if count < 2 || max <= min {
        return Err(RmtError::Config("grid needs count >= 2 and max > min".into()));
    }
    Ok(GridAxis::new(min, max, count))
}

fn make_space(space: SpaceArg, n: usize, nu: u32) -> MatrixSpace {
    match space {
        SpaceArg::Herm => MatrixSpace::herm(n),
        SpaceArg::IoEven => MatrixSpace::io_even(n),
        SpaceArg::IoOdd => MatrixSpace::io_odd(n),
        SpaceArg::Usp => MatrixSpace::usp(n),
        SpaceArg::Chiral => MatrixSpace::chiral(n, nu),
        SpaceArg::HermPlus => MatrixSpace::herm_plus(n),
        SpaceArg::Unitary => MatrixSpace::unitary(n),
    }
}

fn worker_count() -> usize {
    std::env::var("RMT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
        .min(64)
}

fn run(cli: Cli) -> Result<i32, RmtError> {
    match cli.command {
        Command::Sample {
            space,
            n,
            density,
            nu,
            dof,
            count,
            seed,
            coords,
            scale,
            out,
        } => cmd_sample(space, n, density, nu, dof, count, seed, coords, scale, &out),
        Command::Density {
            builtin,
            weight_file,
            space,
            n,
            nu,
            dof,
            grid,
            seed,
            out,
        } => cmd_density(builtin, weight_file, space, n, nu, dof, &grid, seed, &out),
        Command::Convolve {
            weight_a,
            weight_b,
            space,
            nu,
            grid,
            out,
        } => cmd_convolve(&weight_a, &weight_b, space, nu, &grid, &out),
        Command::Verify {
            suite,
            budget,
            seed,
            negative_control,
            out,
        } => cmd_verify(&suite, &budget, seed, negative_control, &out),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    space_arg: SpaceArg,
    n: usize,
    density: DensityArg,
    nu: u32,
    dof: Option<usize>,
    count: usize,
    seed: u64,
    coords: CoordsArg,
    scale: f64,
    out: &Option<PathBuf>,
) -> Result<i32, RmtError> {
    if count == 0 {
        return Err(RmtError::Config("count must be positive".into()));
    }
    let space = make_space(space_arg, n, nu);
    let density = match density {
        DensityArg::Gaussian => MatrixDensity::Gaussian { scale },
        DensityArg::Ginibre => MatrixDensity::Ginibre { scale },
        DensityArg::Wishart => MatrixDensity::WishartLike { dof: dof.unwrap_or(n) },
        DensityArg::Haar => MatrixDensity::HaarUniform,
    };
    let spec = EnsembleSpec::new(space, density)?;
    let appendix_b = matches!(coords, CoordsArg::AppendixB);
    if appendix_b && space.kind() != SpaceKind::Unitary {
        return Err(RmtError::Config(
            "--coords appendix-b applies to the unitary space".into(),
        ));
    }

    let mut w = writer(out)?;
    writeln!(w, "# command: sample")?;
    writeln!(w, "# version: {VERSION}")?;
    writeln!(w, "# convention: {CONVENTION}")?;
    writeln!(
        w,
        "# space: {:?}, n: {n}, nu: {nu}, density: {:?}, count: {count}, seed: {seed}, coords: {coords:?}",
        space.kind(),
        spec.density
    )?;
    let mut header: Vec<String> = (1..=n).map(|j| format!("value_{j}")).collect();
    match space.kind() {
        SpaceKind::HermPlus => header.extend((1..=n).map(|j| format!("lu_diag_{j}"))),
        SpaceKind::Unitary => {
            if appendix_b {
                header.extend((1..=n).map(|j| format!("alpha_{j}")));
                let pairs = n * (n - 1) / 2;
                header.extend((1..=pairs).map(|j| format!("phi_{j}")));
                header.extend((1..=pairs).map(|j| format!("psi_{j}")));
            }
        }
        _ => header.extend((1..=n).map(|j| format!("pseudo_diag_{j}"))),
    }
    writeln!(w, "{}", header.join(","))?;

    // deterministic chunked parallel sampling: chunk c uses substream c,
    // results are written in chunk order regardless of scheduling
    let chunk_size = 4096usize;
    let chunks: Vec<(usize, usize)> = (0..count)
        .step_by(chunk_size)
        .map(|start| (start / chunk_size, (count - start).min(chunk_size)))
        .collect();
    let workers = worker_count().min(chunks.len().max(1));
    let space_copy = space;
    let spec_ref = &spec;
    let rows: Vec<Vec<String>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w_id in 0..workers {
            let chunks = chunks.clone();
            handles.push(scope.spawn(move || {
                let mut mine: Vec<(usize, Vec<String>)> = Vec::new();
                for &(cid, len) in chunks.iter().skip(w_id).step_by(workers) {
                    let mut rng = substream(seed, cid as u64);
                    let mut lines = Vec::with_capacity(len);
                    for _ in 0..len {
                        lines.push(sample_row(spec_ref, &space_copy, appendix_b, &mut rng));
                    }
                    mine.push((cid, lines));
                }
                mine
            }));
        }
        let mut all: Vec<(usize, Vec<String>)> = Vec::new();
        for h in handles {
            all.extend(h.join().expect("sampler thread panicked"));
        }
        all.sort_by_key(|(cid, _)| *cid);
        all.into_iter().map(|(_, lines)| lines).collect()
    });
    for chunk in rows {
        for line in chunk {
            writeln!(w, "{line}")?;
        }
    }
    Ok(0)
}

fn sample_row(
    spec: &EnsembleSpec,
    space: &MatrixSpace,
    appendix_b: bool,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> String {
    let fmt = |v: f64| format!("{v:.12e}");
    if appendix_b {
        let c = sample_haar_coordinates(space.n(), rng);
        let v = build_unitary(&c);
        let s = extract_spectrum(&v, space).expect("spectrum extraction failed");
        let mut cols: Vec<String> = s.values.iter().copied().map(fmt).collect();
        cols.extend(c.alpha.iter().copied().map(fmt));
        cols.extend(c.phi.iter().copied().map(fmt));
        cols.extend(c.psi.iter().copied().map(fmt));
        return cols.join(",");
    }
    let x = sample_matrix(spec, rng).expect("sampling failed");
    let s = extract_spectrum(&x, space).expect("spectrum extraction failed");
    let mut cols: Vec<String> = s.values.iter().copied().map(fmt).collect();
    match space.kind() {
        SpaceKind::HermPlus => {
            let lu = lu_diagonal(&x).expect("LU of positive definite sample failed");
            cols.extend(lu.iter().map(|z| fmt(z.re)));
        }
        SpaceKind::Unitary => {}
        _ => {
            let pd = extract_pseudo_diagonal(&x, space).expect("pseudo-diagonal failed");
            cols.extend(pd.iter().copied().map(fmt));
        }
    }
    cols.join(",")
}

fn builtin_density(
    builtin: BuiltinArg,
    n: usize,
    nu: u32,
    dof: Option<usize>,
) -> Result<(PrincipleDensity, &'static str), RmtError> {
    use rmt_core::ensemble::Nu;
    Ok(match builtin {
        BuiltinArg::Gue => (
            derivative_principle_herm(&WeightFunction::gaussian_product(n, 0.0, 1.0))?,
            "gue gaussian diagonal weight",
        ),
        BuiltinArg::IoEven => (
            derivative_principle_hankel_unified(
                &WeightFunction::gaussian_product(n, 0.0, 1.0),
                Nu::MinusHalf,
            )?,
            "antisymmetric even gaussian pseudo-diagonal weight",
        ),
        BuiltinArg::IoOdd | BuiltinArg::Usp => (
            derivative_principle_hankel_unified(
                &WeightFunction::gaussian_product(n, 0.0, 1.0),
                Nu::PlusHalf,
            )?,
            "antisymmetric odd / anti-self-dual gaussian pseudo-diagonal weight",
        ),
        BuiltinArg::Chiral => (
            derivative_principle_hankel_unified(
                &WeightFunction::gaussian_product(n, 0.0, 0.5),
                Nu::Int(nu),
            )?,
            "chiral gaussian pseudo-diagonal weight",
        ),
        BuiltinArg::Wishart => (
            derivative_principle_hermplus(&lu_weight_wishart(n, dof.unwrap_or(n))?)?,
            "wishart bartlett LU weight",
        ),
        BuiltinArg::Cue => (
            derivative_principle_unitary(&cue_weight(n))?,
            "cue permanent weight",
        ),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_density(
    builtin: Option<BuiltinArg>,
    weight_file: Option<PathBuf>,
    space: Option<SpaceArg>,
    n: usize,
    nu: u32,
    dof: Option<usize>,
    grid: &str,
    seed: u64,
    out: &Option<PathBuf>,
) -> Result<i32, RmtError> {
    let axis = parse_grid(grid)?;
    let (f, provenance): (PrincipleDensity, String) = match (builtin, weight_file) {
        (Some(b), None) => {
            let (f, p) = builtin_density(b, n, nu, dof)?;
            (f, p.to_string())
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)?;
            let w: WeightFunction = serde_json::from_str(&text)?;
            let space = space.ok_or_else(|| {
                RmtError::Config("--space is required with --weight-file".into())
            })?;
            let ms = make_space(space, w.arity, nu);
            let f = match (ms.kind(), w.domain) {
                (SpaceKind::Herm, Domain::RealLine) => derivative_principle_herm(&w)?,
                (SpaceKind::IoEven, Domain::RealLine)
                | (SpaceKind::IoOdd, Domain::RealLine)
                | (SpaceKind::Usp, Domain::RealLine)
                | (SpaceKind::ChiralRect, Domain::RealLine) => {
                    derivative_principle_hankel_unified(&w, ms.nu().unwrap())?
                }
                (SpaceKind::HermPlus, Domain::HalfLine) => derivative_principle_hermplus(&w)?,
                (SpaceKind::Unitary, Domain::Torus) => derivative_principle_unitary(&w)?,
                (kind, dom) => {
                    return Err(RmtError::Domain(format!(
                        "weight domain {dom:?} does not match space {kind:?}"
                    )))
                }
            };
            (f, format!("weight file {}", path.display()))
        }
        _ => {
            return Err(RmtError::Config(
                "exactly one of --builtin or --weight-file is required".into(),
            ))
        }
    };
    let arity = f.arity;
    let axes = vec![axis; arity];
    let counts: Vec<usize> = axes.iter().map(|a| a.count).collect();
    let total: usize = counts.iter().product();
    let mut values = Vec::with_capacity(total);
    let mut x = vec![0.0; arity];
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..arity).rev() {
            x[d] = axes[d].point(rem % counts[d]);
            rem /= counts[d];
        }
        values.push(f.eval(&x));
    }
    let g = rmt_core::grid::GridDensity::new_unchecked(
        vec![rmt_core::grid::DomainKind::RealLine; arity],
        axes,
        values,
    );
    let mass = g.trapezoid_integral();
    let mut w = writer(out)?;
    g.write_csv(
        &mut w,
        &[
            ("command", "density".to_string()),
            ("version", VERSION.to_string()),
            ("convention", CONVENTION.to_string()),
            ("weight-provenance", provenance),
            ("n", arity.to_string()),
            ("nu", nu.to_string()),
            ("seed", seed.to_string()),
            ("grid-normalization", format!("{mass:.6}")),
        ],
    )?;
    Ok(0)
}

fn cmd_convolve(
    weight_a: &PathBuf,
    weight_b: &PathBuf,
    space: SpaceArg,
    nu: u32,
    grid: &str,
    out: &Option<PathBuf>,
) -> Result<i32, RmtError> {
    let axis = parse_grid(grid)?;
    let wa: WeightFunction = serde_json::from_str(&std::fs::read_to_string(weight_a)?)?;
    let wb: WeightFunction = serde_json::from_str(&std::fs::read_to_string(weight_b)?)?;
    let ms = make_space(space, wa.arity, nu);
    let f = additive_convolve(&wa, &wb, &ms)?;
    let axes = vec![axis; f.arity];
    let counts: Vec<usize> = axes.iter().map(|a| a.count).collect();
    let total: usize = counts.iter().product();
    let mut values = Vec::with_capacity(total);
    let mut x = vec![0.0; f.arity];
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..f.arity).rev() {
            x[d] = axes[d].point(rem % counts[d]);
            rem /= counts[d];
        }
        values.push(f.eval(&x));
    }
    let g = rmt_core::grid::GridDensity::new_unchecked(
        vec![rmt_core::grid::DomainKind::RealLine; f.arity],
        axes,
        values,
    );
    let mass = g.trapezoid_integral();
    let mut w = writer(out)?;
    g.write_csv(
        &mut w,
        &[
            ("command", "convolve".to_string()),
            ("version", VERSION.to_string()),
            ("convention", CONVENTION.to_string()),
            ("space", format!("{:?}", ms.kind())),
            ("grid-normalization", format!("{mass:.6}")),
        ],
    )?;
    Ok(0)
}

fn cmd_verify(
    suite: &str,
    budget: &str,
    seed: u64,
    negative: bool,
    out: &Option<PathBuf>,
) -> Result<i32, RmtError> {
    let budget_f: f64 = budget
        .parse()
        .map_err(|_| RmtError::Config(format!("bad budget '{budget}'")))?;
    if budget_f < 1.0 {
        return Err(RmtError::Config("budget must be at least 1".into()));
    }
    let reports = rmt_core::verify::run_suite(suite, budget_f as usize, seed, negative)?;
    let mut w = writer(out)?;
    let mut failures = 0usize;
    for r in &reports {
        writeln!(w, "{}", serde_json::to_string(r)?)?;
        if !r.pass {
            failures += 1;
        }
    }
    drop(w);
    eprintln!(
        "suite '{suite}': {} comparisons, {} failed (seed {seed}, budget {budget_f})",
        reports.len(),
        failures
    );
    Ok(if failures > 0 { 1 } else { 0 })
}
