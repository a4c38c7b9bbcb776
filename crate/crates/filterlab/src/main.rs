//! The `filterlab` binary: density estimates, filter membership, space
//! arithmetic, convergence certificates, and the experiment gallery, all
//! emitting deterministic report documents.
//!
//! Exit codes are three-valued so CI can tell refutation from an
//! insufficient horizon: 0 when every requested verdict holds or passes,
//! 2 when any fails, 3 when the only non-passes are inconclusive, 1 for
//! operational errors (bad arguments, unreadable files, invalid inputs).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use filterlab::config::RunConfig;
use filterlab::dsl;
use filterlab::report::{
    render_density_csv, render_json, render_report_text, render_verdict_text, write_out,
    CatalogBody, DensityBody, Document, Format, GalleryBody, VectorView, VerdictBody,
};
use filterlab::runner::{exit_code_for_outcome, exit_code_for_statuses, run_gallery};
use filterlab_core::converge::{
    cluster_implies_limit_audit, cluster_point_check, extract_cauchy_from_base, f_cauchy_check,
    f_limit_check, sparse_pointwise_limit, CheckParams, ExtractParams, Region,
};
use filterlab_core::gallery::{experiments, GalleryParams};
use filterlab_core::modulus::{builtin_names, validate_modulus};
use filterlab_core::natset::{f_density, DensityParams};
use filterlab_core::spaces::pairing;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "filterlab",
    version,
    about = "Horizon-bounded certificates for filter convergence on the natural numbers",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Globals {
    /// Sweep horizon; scientific notation is accepted (1e6).
    #[arg(long, global = true, value_parser = parse_sci)]
    horizon: Option<u64>,
    /// Truncation dimension for dense vectors and walks.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Density convergence tolerance (also the zero threshold).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Fraction of checkpoints forming the density convergence window.
    #[arg(long, global = true)]
    window: Option<f64>,
    /// Comma-separated epsilon grid for convergence checks.
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Vec<f64>,
    /// Worker threads for the gallery (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every randomized construction.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML run configuration; flags given here win over the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report to this path instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Output format: json (default), csv (density samples), text.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Include wall-clock timings in gallery documents. Timed documents are
    /// not byte-reproducible.
    #[arg(long, global = true)]
    timings: bool,
}

fn parse_sci(text: &str) -> Result<u64, String> {
    dsl::sci_u64(text).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Modulus (gauge) functions: validation and the builtin catalog.
    Modulus {
        #[command(subcommand)]
        cmd: ModulusCmd,
    },
    /// Estimate the gauged density of a set.
    Density {
        /// Set expression, e.g. `squares` or `compl(union(evens, finite(7)))`.
        #[arg(long)]
        set: String,
        /// Modulus name or expression over t (default: identity).
        #[arg(long, default_value = "identity")]
        modulus: String,
    },
    /// Filters on the naturals: membership, stationarity, inclusion.
    Filter {
        #[command(subcommand)]
        cmd: FilterCmd,
    },
    /// Finite space models: seminorms and dual pairings.
    Space {
        #[command(subcommand)]
        cmd: SpaceCmd,
    },
    /// Convergence certificates for sequences under a filter.
    Converge {
        #[command(subcommand)]
        cmd: ConvergeCmd,
    },
    /// The packaged experiment gallery.
    Gallery {
        #[command(subcommand)]
        cmd: GalleryCmd,
    },
}

#[derive(Subcommand)]
enum ModulusCmd {
    /// Check the axioms (f(0)=0, monotone, subadditive) on the default grid
    /// and probe unboundedness.
    Validate {
        /// Builtin name, e.g. `log1p` or `pow(0.5)`.
        #[arg(long, conflicts_with = "expr")]
        name: Option<String>,
        /// Expression over t, e.g. `sqrt(t) + log1p(t)`.
        #[arg(long)]
        expr: Option<String>,
    },
    /// List the builtin moduli.
    List,
}

#[derive(Subcommand)]
enum FilterCmd {
    /// Is the set a member of the filter?
    Member {
        #[arg(long)]
        filter: String,
        #[arg(long)]
        set: String,
    },
    /// Does the set meet every member of the filter?
    Stationary {
        #[arg(long)]
        filter: String,
        #[arg(long)]
        set: String,
    },
    /// Is every member of `coarser` a member of `finer`, over the standard
    /// testbed?
    Includes {
        #[arg(long)]
        coarser: String,
        #[arg(long)]
        finer: String,
    },
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Evaluate every seminorm of the space on a vector.
    Seminorm {
        /// Space: `l1`, `linf`, `l1(8)`, or `sparse(a,b)`.
        #[arg(long, default_value = "l1")]
        space: String,
        /// Vector expression, e.g. `[1,0,-2]`, `{a: 1.5}`, `basis(5)`.
        #[arg(long)]
        vector: String,
    },
    /// The dual pairing <x, y> = sum of coordinate products.
    Pair {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
}

#[derive(Subcommand)]
enum ConvergeCmd {
    /// Certify a candidate as the filter limit of a sequence.
    Limit {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        candidate: String,
        #[arg(long, default_value = "stat")]
        filter: String,
        #[arg(long, default_value = "l1")]
        space: String,
    },
    /// Certify a sequence as filter-Cauchy.
    Cauchy {
        #[arg(long)]
        seq: String,
        #[arg(long, default_value = "stat")]
        filter: String,
        #[arg(long, default_value = "l1")]
        space: String,
    },
    /// Certify a candidate as a filter cluster point.
    Cluster {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        candidate: String,
        #[arg(long, default_value = "stat")]
        filter: String,
        #[arg(long, default_value = "l1")]
        space: String,
    },
    /// Audit the rule "Cauchy plus cluster point implies limit".
    Audit {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        candidate: String,
        #[arg(long, default_value = "stat")]
        filter: String,
        #[arg(long, default_value = "l1")]
        space: String,
    },
    /// Extract a Cauchy sequence from a nested ball chain B(center, r/2^k).
    Extract {
        /// Center vector of every ball.
        #[arg(long, default_value = "zeros")]
        center: String,
        /// How many nested balls to build.
        #[arg(long, default_value_t = 41)]
        levels: u32,
        /// Radius of the outermost ball.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Keep every radius equal instead of halving (a fixture that must
        /// be rejected with the diameter diagnostic).
        #[arg(long)]
        stalled: bool,
        #[arg(long, default_value = "linf")]
        space: String,
    },
    /// Pointwise filter limit of a sparse-vector sequence.
    Sparse {
        #[arg(long)]
        seq: String,
        #[arg(long, default_value = "frechet")]
        filter: String,
        /// Comma-separated keys to inspect.
        #[arg(long, value_delimiter = ',')]
        keys: Vec<String>,
        /// Defaults to `sparse(<keys>)` so the seminorms match the inspected
        /// coordinates.
        #[arg(long)]
        space: Option<String>,
    },
}

#[derive(Subcommand)]
enum GalleryCmd {
    /// List the experiment catalog.
    List,
    /// Run one experiment by name.
    Run { name: String },
    /// Run the whole catalog in registry order.
    RunAll,
}

/// Globals merged with the optional config file; flags win.
struct Effective {
    horizon: Option<u64>,
    dim: usize,
    seed: u64,
    jobs: Option<usize>,
    report: Option<PathBuf>,
    format: Format,
    timings: bool,
    density: DensityParams,
    check: CheckParams,
    config: RunConfig,
    /// Raw CLI flags, kept apart from the merged values: for the gallery
    /// they must outrank per-experiment config overrides, which in turn
    /// outrank the config's globals.
    cli: Globals,
}

impl Effective {
    fn new(globals: &Globals) -> Result<Effective> {
        let config = match &globals.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config `{}`", path.display()))?;
                RunConfig::parse(&text)
                    .with_context(|| format!("config `{}` is invalid", path.display()))?
            }
            None => RunConfig::default(),
        };
        let output = config.output.clone().unwrap_or_default();
        let horizon = globals.horizon.or(config.horizon);
        let mut density = DensityParams::default();
        if let Some(h) = horizon {
            density.horizon = h;
        }
        if let Some(t) = globals.tolerance.or(config.tolerance) {
            density.tolerance = t;
        }
        if let Some(w) = globals.window.or(config.window) {
            density.window = w;
        }
        let mut check = CheckParams { density, ..CheckParams::default() };
        let eps = if globals.eps.is_empty() { config.eps_grid.clone() } else { globals.eps.clone() };
        if !eps.is_empty() {
            check.eps_grid = eps;
        }
        let format = match &globals.format {
            Some(f) => *f,
            None => match output.format.as_deref() {
                Some(text) => text.parse().map_err(|e: String| anyhow::anyhow!(e))?,
                None => Format::Json,
            },
        };
        Ok(Effective {
            horizon,
            dim: globals.dim.or(config.dim).unwrap_or(1),
            seed: globals.seed.or(config.seed).unwrap_or(7),
            jobs: globals.jobs.or(config.jobs),
            report: globals.report.clone().or(output.report),
            format,
            timings: globals.timings || output.timings.unwrap_or(false),
            density,
            check,
            config,
            cli: globals.clone(),
        })
    }

    /// Look up a DSL expression: named entries in the config shadow nothing;
    /// any text that is not a config name is parsed directly.
    fn set_text<'a>(&'a self, text: &'a str) -> &'a str {
        self.config.sets.get(text).map(String::as_str).unwrap_or(text)
    }

    fn filter_text<'a>(&'a self, text: &'a str) -> &'a str {
        self.config.filters.get(text).map(String::as_str).unwrap_or(text)
    }

    fn seq_text<'a>(&'a self, text: &'a str) -> &'a str {
        self.config.sequences.get(text).map(String::as_str).unwrap_or(text)
    }

    fn gallery_params(&self, experiment: &str) -> GalleryParams {
        let mut params = self.config.gallery_params(experiment);
        params.seed = self.seed;
        if let Some(h) = self.cli.horizon {
            params.horizon = Some(h);
        }
        if let Some(d) = self.cli.dim {
            params.dim = Some(d);
        }
        if let Some(t) = self.cli.tolerance {
            params.tolerance = Some(t);
        }
        params
    }

    /// The sweep horizon for sequence commands, bounded so a forgotten
    /// `--horizon` cannot demand a year of compute.
    fn seq_horizon(&self) -> u64 {
        self.horizon.unwrap_or(100_000)
    }

    fn emit<T: Serialize>(&self, doc: &Document<T>, text_form: Option<String>) -> Result<()> {
        let content = match (self.format, text_form) {
            (Format::Text, Some(text)) => text,
            (Format::Csv, _) => bail!("this command has no CSV form; use json or text"),
            _ => render_json(doc)?,
        };
        write_out(self.report.as_deref(), &content)?;
        Ok(())
    }
}

fn main() -> ExitCode {
    // Usage errors are operational failures (exit 1); clap's default exit 2
    // would collide with the code reserved for refuted verdicts. Help and
    // version requests still exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("filterlab: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let eff = Effective::new(&cli.globals)?;
    match &cli.command {
        Command::Modulus { cmd } => run_modulus(&eff, cmd),
        Command::Density { set, modulus } => run_density(&eff, set, modulus),
        Command::Filter { cmd } => run_filter(&eff, cmd),
        Command::Space { cmd } => run_space(&eff, cmd),
        Command::Converge { cmd } => run_converge(&eff, cmd),
        Command::Gallery { cmd } => run_gallery_cmd(&eff, cmd),
    }
}

fn run_modulus(eff: &Effective, cmd: &ModulusCmd) -> Result<i32> {
    match cmd {
        ModulusCmd::List => {
            #[derive(Serialize)]
            struct Body {
                moduli: Vec<&'static str>,
            }
            let doc = Document::new(Body { moduli: builtin_names() });
            let text = builtin_names().join("\n") + "\n";
            eff.emit(&doc, Some(text))?;
            Ok(0)
        }
        ModulusCmd::Validate { name, expr } => {
            let text = match (name, expr) {
                (Some(n), None) => n.clone(),
                (None, Some(e)) => e.clone(),
                _ => bail!("pass exactly one of --name or --expr"),
            };
            let modulus = dsl::parse_modulus(&text)?;
            let report = validate_modulus(&modulus)?;
            #[derive(Serialize)]
            struct Body {
                report: filterlab_core::modulus::ValidationReport,
            }
            let code = if !report.is_valid_modulus() {
                2
            } else if !report.unbounded.confirmed() {
                3
            } else {
                0
            };
            let mut text_form = String::new();
            for (label, check) in [
                ("f(0) = 0", &report.zero_at_origin),
                ("monotone", &report.monotone),
                ("subadditive", &report.subadditive),
            ] {
                text_form.push_str(&format!(
                    "[{}] {label}: {}\n",
                    if check.holds { "holds" } else { "fails" },
                    check.detail
                ));
            }
            text_form.push_str(&format!("unbounded probe: {:?}\n", report.unbounded));
            let doc = Document::new(Body { report });
            eff.emit(&doc, Some(text_form))?;
            Ok(code)
        }
    }
}

fn run_density(eff: &Effective, set_text: &str, modulus_text: &str) -> Result<i32> {
    let set = dsl::parse_set(eff.set_text(set_text))?;
    let modulus = dsl::parse_modulus(modulus_text)?;
    let estimate = f_density(&set, &modulus, &eff.density)?;
    let body = DensityBody {
        set: set.describe(),
        modulus: modulus.name().to_string(),
        estimate,
    };
    if eff.format == Format::Csv {
        write_out(eff.report.as_deref(), &render_density_csv(&body))?;
        return Ok(0);
    }
    let text = format!(
        "density[{}] of {}: {:?} value={} window=[{}, {}] at horizon {}\n",
        body.modulus,
        body.set,
        body.estimate.status,
        body.estimate.value.map(|v| v.to_string()).unwrap_or_else(|| "-".to_string()),
        body.estimate.tail_inf,
        body.estimate.tail_sup,
        body.estimate.horizon,
    );
    let doc = Document::new(body);
    eff.emit(&doc, Some(text))?;
    Ok(0)
}

fn verdict_result(
    eff: &Effective,
    subject: Vec<(String, String)>,
    verdict: filterlab_core::verdict::Verdict,
) -> Result<i32> {
    let outcome = verdict.outcome;
    let text = render_verdict_text(&verdict);
    let doc = Document::new(VerdictBody { subject, verdict });
    eff.emit(&doc, Some(text))?;
    Ok(exit_code_for_outcome(outcome))
}

fn run_filter(eff: &Effective, cmd: &FilterCmd) -> Result<i32> {
    match cmd {
        FilterCmd::Member { filter, set } => {
            let f = dsl::parse_filter(eff.filter_text(filter))?;
            let s = dsl::parse_set(eff.set_text(set))?;
            let verdict = f.member(&s, &eff.density)?;
            verdict_result(
                eff,
                vec![
                    ("question".to_string(), "membership".to_string()),
                    ("filter".to_string(), f.describe()),
                    ("set".to_string(), s.describe()),
                ],
                verdict,
            )
        }
        FilterCmd::Stationary { filter, set } => {
            let f = dsl::parse_filter(eff.filter_text(filter))?;
            let s = dsl::parse_set(eff.set_text(set))?;
            let verdict = f.is_stationary(&s, &eff.density)?;
            verdict_result(
                eff,
                vec![
                    ("question".to_string(), "stationarity".to_string()),
                    ("filter".to_string(), f.describe()),
                    ("set".to_string(), s.describe()),
                ],
                verdict,
            )
        }
        FilterCmd::Includes { coarser, finer } => {
            let c = dsl::parse_filter(eff.filter_text(coarser))?;
            let f = dsl::parse_filter(eff.filter_text(finer))?;
            let verdict = filterlab_core::filters::includes(
                &c,
                &f,
                &filterlab_core::filters::standard_testbed(),
                &eff.density,
            )?;
            verdict_result(
                eff,
                vec![
                    ("question".to_string(), "inclusion over the standard testbed".to_string()),
                    ("coarser".to_string(), c.describe()),
                    ("finer".to_string(), f.describe()),
                ],
                verdict,
            )
        }
    }
}

fn run_space(eff: &Effective, cmd: &SpaceCmd) -> Result<i32> {
    match cmd {
        SpaceCmd::Seminorm { space, vector } => {
            let space = dsl::parse_space(space, eff.dim)?;
            let v = dsl::parse_vector(vector, eff.dim)?;
            space.check_vector(&v)?;
            let mut values = Vec::new();
            for label in space.seminorm_labels() {
                values.push((label.clone(), space.seminorm(&label, &v)?));
            }
            #[derive(Serialize)]
            struct Body {
                space: String,
                vector: VectorView,
                seminorms: Vec<(String, f64)>,
            }
            let mut text = String::new();
            for (label, value) in &values {
                text.push_str(&format!("{label} = {value}\n"));
            }
            let doc = Document::new(Body {
                space: space.describe(),
                vector: VectorView::from(&v),
                seminorms: values,
            });
            eff.emit(&doc, Some(text))?;
            Ok(0)
        }
        SpaceCmd::Pair { x, y } => {
            let ambient = |flag| {
                format!("--{flag} lives in ambient dimension {}; set --dim to change it", eff.dim)
            };
            let xv = dsl::parse_vector(x, eff.dim).with_context(|| ambient("x"))?;
            let yv = dsl::parse_vector(y, eff.dim).with_context(|| ambient("y"))?;
            let value = pairing(&xv, &yv)?;
            #[derive(Serialize)]
            struct Body {
                x: VectorView,
                y: VectorView,
                pairing: f64,
            }
            let doc = Document::new(Body {
                x: VectorView::from(&xv),
                y: VectorView::from(&yv),
                pairing: value,
            });
            eff.emit(&doc, Some(format!("{value}\n")))?;
            Ok(0)
        }
    }
}

fn run_converge(eff: &Effective, cmd: &ConvergeCmd) -> Result<i32> {
    let h = eff.seq_horizon();
    match cmd {
        ConvergeCmd::Limit { seq, candidate, filter, space } => {
            let space = dsl::parse_space(space, eff.dim)?;
            let seq = dsl::parse_sequence(eff.seq_text(seq), &space, eff.dim, h)?;
            let cand = dsl::parse_vector(candidate, eff.dim)?;
            let f = dsl::parse_filter(eff.filter_text(filter))?;
            let verdict = f_limit_check(&seq, &cand, &f, &eff.check)?;
            verdict_result(
                eff,
                vec![
                    ("question".to_string(), "filter limit".to_string()),
                    ("sequence".to_string(), seq.name().to_string()),
                    ("filter".to_string(), f.describe()),
                ],
                verdict,
            )
        }
        ConvergeCmd::Cauchy { seq, filter, space } => {
            let space = dsl::parse_space(space, eff.dim)?;
            let seq = dsl::parse_sequence(eff.seq_text(seq), &space, eff.dim, h)?;
            let f = dsl::parse_filter(eff.filter_text(filter))?;
            let verdict = f_cauchy_check(&seq, &f, &eff.check)?;
            verdict_result(
                eff,
                vec![
                    ("question".to_string(), "filter Cauchy".to_string()),
                    ("sequence".to_string(), seq.name().to_string()),
                    ("filter".to_string(), f.describe()),
                ],
                verdict,
            )
        }
        ConvergeCmd::Cluster { seq, candidate, filter, space } => {
            let space = dsl::parse_space(space, eff.dim)?;
            let seq = dsl::parse_sequence(eff.seq_text(seq), &space, eff.dim, h)?;
            let cand = dsl::parse_vector(candidate, eff.dim)?;
            let f = dsl::parse_filter(eff.filter_text(filter))?;
            let verdict = cluster_point_check(&seq, &cand, &f, &eff.check)?;
            verdict_result(
                eff,
                vec![
                    ("question".to_string(), "filter cluster point".to_string()),
                    ("sequence".to_string(), seq.name().to_string()),
                    ("filter".to_string(), f.describe()),
                ],
                verdict,
            )
        }
        ConvergeCmd::Audit { seq, candidate, filter, space } => {
            let space = dsl::parse_space(space, eff.dim)?;
            let seq = dsl::parse_sequence(eff.seq_text(seq), &space, eff.dim, h)?;
            let cand = dsl::parse_vector(candidate, eff.dim)?;
            let f = dsl::parse_filter(eff.filter_text(filter))?;
            let verdict = cluster_implies_limit_audit(&seq, &cand, &f, &eff.check)?;
            verdict_result(
                eff,
                vec![
                    ("question".to_string(), "Cauchy + cluster implies limit".to_string()),
                    ("sequence".to_string(), seq.name().to_string()),
                    ("filter".to_string(), f.describe()),
                ],
                verdict,
            )
        }
        ConvergeCmd::Extract { center, levels, radius, stalled, space } => {
            let space = dsl::parse_space(space, eff.dim)?;
            let center = dsl::parse_vector(center, eff.dim)?;
            let regions: Vec<Region> = (0..*levels)
                .map(|k| Region::Ball {
                    center: center.clone(),
                    radius: if *stalled { *radius } else { radius * 0.5f64.powi(k as i32) },
                })
                .collect();
            let params = ExtractParams { seed: eff.seed, ..ExtractParams::default() };
            let extraction = extract_cauchy_from_base(&space, &regions, &params)?;
            #[derive(Serialize)]
            struct Body {
                diameters: Vec<f64>,
                points: Vec<VectorView>,
                audit: filterlab_core::verdict::Verdict,
            }
            let outcome = extraction.audit.outcome;
            let text = render_verdict_text(&extraction.audit);
            let doc = Document::new(Body {
                diameters: extraction.diameters.clone(),
                points: extraction.points.iter().map(VectorView::from).collect(),
                audit: extraction.audit,
            });
            eff.emit(&doc, Some(text))?;
            Ok(exit_code_for_outcome(outcome))
        }
        ConvergeCmd::Sparse { seq, filter, keys, space } => {
            let space_text = match space {
                Some(s) => s.clone(),
                None => {
                    if keys.is_empty() {
                        anyhow::bail!("pass --keys (or an explicit --space) so there is a coordinate to inspect");
                    }
                    format!("sparse({})", keys.join(","))
                }
            };
            let space = dsl::parse_space(&space_text, eff.dim)?;
            let seq = dsl::parse_sequence(eff.seq_text(seq), &space, eff.dim, h)?;
            let f = dsl::parse_filter(eff.filter_text(filter))?;
            let key_refs: Vec<&str> = keys.iter().map(String::as_str).collect();
            let report = sparse_pointwise_limit(&seq, &f, &key_refs, &eff.check)?;
            #[derive(Serialize)]
            struct Body {
                limit: VectorView,
                per_key: Vec<(String, f64)>,
                witnessed_support: Vec<String>,
                verdict: filterlab_core::verdict::Verdict,
            }
            let outcome = report.verdict.outcome;
            let text = render_verdict_text(&report.verdict);
            let doc = Document::new(Body {
                limit: VectorView::from(&report.limit),
                per_key: report.per_key.clone(),
                witnessed_support: report.witnessed_support.clone(),
                verdict: report.verdict,
            });
            eff.emit(&doc, Some(text))?;
            Ok(exit_code_for_outcome(outcome))
        }
    }
}

fn run_gallery_cmd(eff: &Effective, cmd: &GalleryCmd) -> Result<i32> {
    match cmd {
        GalleryCmd::List => {
            let catalog = experiments();
            let mut text = String::new();
            for info in &catalog {
                text.push_str(&format!("{:<24} {}\n", info.name, info.summary));
            }
            let doc = Document::new(CatalogBody { experiments: catalog });
            eff.emit(&doc, Some(text))?;
            Ok(0)
        }
        GalleryCmd::Run { name } => {
            if !experiments().iter().any(|info| info.name == name) {
                anyhow::bail!(
                    "no experiment named `{name}`; run `filterlab gallery list` for the catalog"
                );
            }
            let requests = vec![(name.clone(), eff.gallery_params(name))];
            emit_gallery(eff, &requests)
        }
        GalleryCmd::RunAll => {
            let requests: Vec<(String, GalleryParams)> = experiments()
                .iter()
                .map(|info| (info.name.to_string(), eff.gallery_params(info.name)))
                .collect();
            emit_gallery(eff, &requests)
        }
    }
}

fn emit_gallery(eff: &Effective, requests: &[(String, GalleryParams)]) -> Result<i32> {
    let outcome = run_gallery(requests, eff.jobs)?;
    let code = exit_code_for_statuses(outcome.reports.iter().map(|r| r.status));
    let mut text = String::new();
    for report in &outcome.reports {
        text.push_str(&render_report_text(report));
    }
    let doc = Document::new(GalleryBody {
        seed: eff.seed,
        reports: outcome.reports,
        timings_ms: if eff.timings { Some(outcome.timings_ms) } else { None },
    });
    eff.emit(&doc, Some(text))?;
    Ok(code)
}
