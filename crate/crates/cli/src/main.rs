//! crspectra: spectra, wavefunctions, scattering amplitudes and
//! verification suites for the octant Coulomb problem with inverse-square
//! barriers.
//!
//! Exit codes: 0 success, 1 argument/validation error, 2 numerical
//! tolerance failure.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand};
use commands::{parse_list, ScatterKnobs, UsageError};
use crspectra::operators::StencilOrder;
use report::{RunReport, Table};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "crspectra",
    version,
    about = "Exact bound states, scattering amplitudes and conserved-operator \
             verification for the n-dimensional Coulomb potential with \
             inverse-square barriers on the positive octant"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file supplying defaults for flags not given on the command line
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_parser = ["csv", "json", "human"])]
    format: Option<String>,
    /// Numerical tolerance for the command's pass/fail checks
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for the commutator suites (env CRSPECTRA_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Default)]
struct ModelArgs {
    /// Spatial dimension (defaults to the number of kappa entries)
    #[arg(long)]
    n: Option<usize>,
    /// Coulomb strength gamma > 0
    #[arg(long)]
    gamma: Option<f64>,
    /// Barrier integers, comma separated (e.g. 1,1,0)
    #[arg(long)]
    kappa: Option<String>,
    /// Magnetic labels, comma separated (validated, not used by energies)
    #[arg(long)]
    sigma: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Bound-state energies and degeneracies up to a principal label
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        jmax: Option<u32>,
        /// Write a two-column (j, energy) plot file
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Write the table to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Valid quantum-number sets at a fixed principal label
    States {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        j: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radial profile of one bound state (and psi along a fixed ray)
    Wavefn {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        j: Option<u32>,
        #[arg(long)]
        l: Option<u32>,
        /// Chain labels m_1..m_{n-2}, comma separated
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Polyspherical angles of a ray (n-1 values) for a psi column
        #[arg(long)]
        theta: Option<String>,
        /// Write a two-column (r, R) plot file
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scattering amplitude rows by one or all methods. Here --in/--out are
    /// the unit directions; use --save for file output.
    Scatter {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        p: Option<f64>,
        /// Incoming unit direction (octant components, comma separated)
        #[arg(long = "in")]
        dir_in: Option<String>,
        /// Outgoing unit direction
        #[arg(long = "out")]
        dir_out: Option<String>,
        /// pw | closed | coulomb | integral | all
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        lmax: Option<u32>,
        /// Gauss-Legendre nodes per axis for the integral representation
        #[arg(long)]
        nodes: Option<usize>,
        /// Sweep the outgoing angle over this many points (n = 2) and emit
        /// a cross-section table instead
        #[arg(long)]
        sweep: Option<usize>,
        /// Write a plot file (sweep mode)
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Write the table to a file instead of stdout
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Verification suites producing pass/fail reports
    Verify {
        #[command(subcommand)]
        suite: VerifySuite,
    },
}

#[derive(Subcommand)]
enum VerifySuite {
    /// Pointwise H psi = E psi stencil residuals for all states up to jmax
    Residuals {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        jmax: Option<u32>,
        /// Stencil order: 2, 4 or 6
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Commutator-residual refinement study of the conserved-operator suite
    Commutators {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated stencil orders (default 4)
        #[arg(long)]
        orders: Option<String>,
        /// Comma-separated grid point counts per axis (refinement ladder)
        #[arg(long)]
        shapes: Option<String>,
        /// Study the quartic variant with the inverse-square tail exactly
        /// as published (expected to stall; reports the discrepancy)
        #[arg(long)]
        published_quartic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radial/angular normalization and Gram-matrix checks, with the
    /// published-constant ratios reported
    Orthonormality {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        lmax: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independent brute-force cross-checks (shooting, phases, 2-D grid)
    Oracle {
        /// Skip the slow 2-D eigensolver ladder
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All of the above
    All {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        jmax: Option<u32>,
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Config-file fallbacks: a flat JSON object keyed by long flag names.
/// Flags win on conflict.
struct Ctx {
    cfg: serde_json::Map<String, serde_json::Value>,
}

impl Ctx {
    fn load(path: Option<&PathBuf>) -> Result<Self, UsageError> {
        let cfg = match path {
            None => serde_json::Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| UsageError(format!("cannot read config {}: {}", p.display(), e)))?;
                match serde_json::from_str::<serde_json::Value>(&text) {
                    Ok(serde_json::Value::Object(map)) => map,
                    Ok(_) => return Err(UsageError("config file must hold a JSON object".into())),
                    Err(e) => return Err(UsageError(format!("config parse error: {}", e))),
                }
            }
        };
        Ok(Ctx { cfg })
    }

    fn f64(&self, key: &str, flag: Option<f64>, default: f64) -> f64 {
        flag.or_else(|| self.cfg.get(key).and_then(|v| v.as_f64()))
            .unwrap_or(default)
    }

    fn u32(&self, key: &str, flag: Option<u32>, default: u32) -> u32 {
        flag.or_else(|| self.cfg.get(key).and_then(|v| v.as_u64()).map(|v| v as u32))
            .unwrap_or(default)
    }

    fn usize(&self, key: &str, flag: Option<usize>, default: usize) -> usize {
        flag.or_else(|| self.cfg.get(key).and_then(|v| v.as_u64()).map(|v| v as usize))
            .unwrap_or(default)
    }

    fn string(&self, key: &str, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.cfg.get(key).and_then(|v| match v {
            serde_json::Value::String(s) => Some(s.clone()),
            other => Some(other.to_string()),
        }))
    }

    fn model(&self, args: &ModelArgs) -> Result<crspectra::ModelParams, UsageError> {
        let kappa = self
            .string("kappa", args.kappa.clone())
            .ok_or_else(|| UsageError("--kappa is required (e.g. --kappa 1,1)".into()))?;
        let gamma = self.f64("gamma", args.gamma, 1.0);
        let n = args
            .n
            .or_else(|| self.cfg.get("n").and_then(|v| v.as_u64()).map(|v| v as usize));
        let sigma = self.string("sigma", args.sigma.clone());
        commands::build_params(n, gamma, &kappa, sigma.as_deref())
    }
}

fn parse_order(text: &str) -> Result<StencilOrder, UsageError> {
    text.parse::<StencilOrder>().map_err(|e| UsageError(e.to_string()))
}

enum Rendered {
    Data(Table),
    Report(RunReport),
    ScatterRows(commands::ScatterOutput),
}

impl Rendered {
    fn render(&self, format: &str) -> String {
        match self {
            Rendered::Data(t) => match format {
                "csv" => t.render_csv(),
                "json" => t.render_json(),
                _ => t.render_human(),
            },
            Rendered::Report(r) => match format {
                "csv" => r.render_csv(),
                "json" => r.render_json(),
                _ => r.render_human(),
            },
            Rendered::ScatterRows(s) => {
                let mut text = match format {
                    "csv" => s.table.render_csv(),
                    "json" => {
                        let obj = serde_json::json!({
                            "rows": serde_json::from_str::<serde_json::Value>(
                                &s.table.render_json()).unwrap(),
                            "checks": s.checks,
                            "pass": s.pass,
                        });
                        let mut t = serde_json::to_string_pretty(&obj).unwrap();
                        t.push('\n');
                        t
                    }
                    _ => s.table.render_human(),
                };
                if format != "json" {
                    for c in &s.checks {
                        text.push_str(&format!(
                            "# {}: {:.6e} (tol {:.1e}) {}\n",
                            c.name,
                            c.measured,
                            c.tol,
                            if c.pass { "PASS" } else { "FAIL" }
                        ));
                    }
                }
                text
            }
        }
    }

    fn pass(&self) -> bool {
        match self {
            Rendered::Data(_) => true,
            Rendered::Report(r) => r.pass,
            Rendered::ScatterRows(s) => s.pass,
        }
    }
}

fn run(cli: Cli) -> Result<(Rendered, Option<PathBuf>), UsageError> {
    let ctx = Ctx::load(cli.config.as_ref())?;
    let tol = cli.tol;
    let threads = cli
        .threads
        .or_else(|| std::env::var("CRSPECTRA_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1);

    match cli.command {
        Command::Spectrum { model, jmax, plot, out } => {
            let params = ctx.model(&model)?;
            let jmax = ctx.u32("jmax", jmax, params.kappa_sum() + 4);
            let table = commands::spectrum(&params, jmax)?;
            if let Some(path) = plot {
                report::emit_plot_data(&commands::spectrum_plot(&table), &path)
                    .map_err(|e| UsageError(format!("plot output: {}", e)))?;
            }
            Ok((Rendered::Data(table), out))
        }
        Command::States { model, j, out } => {
            let params = ctx.model(&model)?;
            let j = ctx.u32("j", j, params.kappa_sum());
            Ok((Rendered::Data(commands::states(&params, j)?), out))
        }
        Command::Wavefn {
            model,
            j,
            l,
            m,
            rmax,
            samples,
            theta,
            plot,
            out,
        } => {
            let params = ctx.model(&model)?;
            let j = ctx.u32("j", j, params.kappa_sum());
            let l = ctx.u32("l", l, params.kappa_sum());
            let m: Vec<u32> = match ctx.string("m", m) {
                Some(text) => parse_list(&text, "m")?,
                None if params.n <= 2 => Vec::new(),
                None => {
                    return Err(UsageError(
                        "--m is required for n >= 3 (chain labels m_1..m_{n-2})".into(),
                    ))
                }
            };
            let lambda = f64::from(j) + 1.5 * params.n as f64 - 0.5;
            let rmax = ctx.f64("rmax", rmax, 20.0 * lambda / params.gamma);
            let samples = ctx.usize("samples", samples, 200);
            let theta: Option<Vec<f64>> = match ctx.string("theta", theta) {
                Some(text) => Some(parse_list(&text, "theta")?),
                None => None,
            };
            let table = commands::wavefn(&params, j, l, &m, rmax, samples, theta.as_deref())?;
            if let Some(path) = plot {
                report::emit_plot_data(&commands::wavefn_plot(&table), &path)
                    .map_err(|e| UsageError(format!("plot output: {}", e)))?;
            }
            Ok((Rendered::Data(table), out))
        }
        Command::Scatter {
            model,
            p,
            dir_in,
            dir_out,
            method,
            lmax,
            nodes,
            sweep,
            plot,
            save,
        } => {
            let params = ctx.model(&model)?;
            let p = ctx.f64("p", p, 1.0);
            let din: Vec<f64> = parse_list(
                &ctx.string("in", dir_in)
                    .ok_or_else(|| UsageError("--in direction is required".into()))?,
                "in",
            )?;
            if let Some(points) = sweep {
                let table = commands::scatter_sweep(&params, p, din, points)?;
                if let Some(path) = plot {
                    report::emit_plot_data(&table, &path)
                        .map_err(|e| UsageError(format!("plot output: {}", e)))?;
                }
                return Ok((Rendered::Data(table), save));
            }
            let dout: Vec<f64> = parse_list(
                &ctx.string("out", dir_out)
                    .ok_or_else(|| UsageError("--out direction is required".into()))?,
                "out",
            )?;
            let knobs = ScatterKnobs {
                l_max: lmax,
                nodes: ctx.usize("nodes", nodes, 64),
                tol: ctx.f64("tol", tol, 1e-3),
            };
            let method = ctx.string("method", method).unwrap_or_else(|| "all".into());
            let output = commands::scatter(&params, p, din, dout, &method, &knobs)?;
            Ok((Rendered::ScatterRows(output), save))
        }
        Command::Verify { suite } => {
            let t0 = Instant::now();
            let (mut rep, out) = match suite {
                VerifySuite::Residuals { model, jmax, order, out } => {
                    let params = ctx.model(&model)?;
                    let jmax = ctx.u32("jmax", jmax, 4);
                    let order = parse_order(&ctx.string("order", order).unwrap_or_else(|| "6".into()))?;
                    (
                        commands::verify_residuals(&params, jmax, order, tol.unwrap_or(1e-6))?,
                        out,
                    )
                }
                VerifySuite::Commutators {
                    model,
                    orders,
                    shapes,
                    published_quartic,
                    out,
                } => {
                    let params = ctx.model(&model)?;
                    if published_quartic {
                        (commands::verify_published_quartic(&params, tol.unwrap_or(1e-3))?, out)
                    } else {
                        let orders: Vec<StencilOrder> = ctx
                            .string("orders", orders)
                            .unwrap_or_else(|| "4".into())
                            .split(',')
                            .map(|s| parse_order(s.trim()))
                            .collect::<Result<_, _>>()?;
                        let shapes: Option<Vec<usize>> = match ctx.string("shapes", shapes) {
                            Some(text) => Some(parse_list(&text, "shapes")?),
                            None => None,
                        };
                        (
                            commands::verify_commutators(
                                &params,
                                &orders,
                                shapes,
                                tol.unwrap_or(1e-3),
                                threads,
                            )?,
                            out,
                        )
                    }
                }
                VerifySuite::Orthonormality { model, lmax, out } => {
                    let params = ctx.model(&model)?;
                    let lmax = ctx.u32("lmax", lmax, 6);
                    (
                        commands::verify_orthonormality(&params, lmax, tol.unwrap_or(1e-8))?,
                        out,
                    )
                }
                VerifySuite::Oracle { quick, out } => (commands::verify_oracle(quick)?, out),
                VerifySuite::All {
                    model,
                    jmax,
                    order,
                    quick,
                    out,
                } => {
                    let params = ctx.model(&model)?;
                    let jmax = ctx.u32("jmax", jmax, 4);
                    let order = parse_order(&ctx.string("order", order).unwrap_or_else(|| "6".into()))?;
                    (
                        commands::verify_all(
                            &params,
                            jmax,
                            order,
                            1e-6,
                            1e-3,
                            1e-8,
                            threads,
                            quick,
                        )?,
                        out,
                    )
                }
            };
            rep.wall_ms = t0.elapsed().as_millis() as u64;
            Ok((Rendered::Report(rep), out))
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let format = cli.format.clone().unwrap_or_else(|| "human".into());
    match run(cli) {
        Ok((rendered, out)) => {
            let text = rendered.render(&format);
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("error: cannot write {}: {}", path.display(), e);
                        std::process::exit(1);
                    }
                }
                None => print!("{}", text),
            }
            std::process::exit(if rendered.pass() { 0 } else { 2 });
        }
        Err(e) => {
            eprintln!("error: {}", e);
            std::process::exit(1);
        }
    }
}
