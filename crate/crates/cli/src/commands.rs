use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use dast_core::{
    classical_flags, default_k0_star, diagnostic_k0_series, estimate_k_opt, ingest, lower_tail,
    qq_points, quartiles, run_study, tail_adjusted_boxplot, upper_tail, DastConfig, Distribution,
    LowerTransform, OrderedSample, QqKind, Tail, TailOutliers, K0_STAR_EXPONENT, K0_STAR_FACTOR,
};

use crate::data::read_column;
use crate::error::{CliError, CliResult};
use crate::report::{Classical, InputInfo, Locator, Report};
use crate::settings::{distribution, ConfigFile, CountList, RealList};
use crate::svg;
use crate::{Cli, Command, DataArgs, DetectArgs, GlobalArgs, ModelArgs};

const DEFAULT_DITHER: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format '{other}', expected csv or svg")),
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.global.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(threads) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let out = Output(&cli.global);
    match cli.command {
        Command::Analyze { data, detect } => analyze(&file, &out, data, detect),
        Command::Boxplot {
            data,
            detect,
            format,
        } => boxplot(&file, &out, data, detect, format),
        Command::Qqplot {
            data,
            kind,
            k,
            format,
        } => qqplot(&file, &out, data, kind, k, format),
        Command::Diagnostic {
            data,
            k,
            k0max,
            format,
        } => diagnostic(&file, &out, data, k, k0max, format),
        Command::Simulate {
            model,
            k,
            kstar,
            k0star,
            k0_factor,
            k0_exponent,
            regimes,
            a,
            q,
            xi,
            xi_known,
            inject,
            intensity,
            dither,
        } => {
            let xi_known = xi_known || file.get::<bool>("xi-known")?.unwrap_or(false);
            let grid = StudyGrid {
                ks: file.require(k, "k")?.0,
                kstars: file.require(kstar, "kstar")?.0,
                k0star: file.pick(k0star, "k0star")?,
                k0_factor: file.pick(k0_factor, "k0-factor")?.unwrap_or(K0_STAR_FACTOR),
                k0_exponent: file
                    .pick(k0_exponent, "k0-exponent")?
                    .unwrap_or(K0_STAR_EXPONENT),
                regimes: file.pick(regimes, "regimes")?.unwrap_or(1),
                a: file.pick(a, "a")?.unwrap_or(1.2),
                q: file.pick(q, "q")?.unwrap_or(0.05),
                xi: file.pick(xi, "xi")?,
                xi_known,
                inject: file.pick(inject, "inject")?,
                intensities: file
                    .pick(intensity, "intensity")?
                    .map_or(vec![1.0], |l| l.0),
                dither: file.pick(dither, "dither")?.unwrap_or(0.0),
            };
            simulate(&file, &out, model, grid)
        }
        Command::Kopt { model, grid } => kopt(&file, &out, model, grid),
    }
}

struct Output<'a>(&'a GlobalArgs);

impl Output<'_> {
    fn write(&self, text: &str) -> CliResult<()> {
        match &self.0.output {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
                Ok(())
            }
        }
    }
}

/// Input data after ingestion, with the settings that produced it.
struct Loaded {
    path: PathBuf,
    column: String,
    dither: f64,
    seed: u64,
    raw: Vec<f64>,
    sample: OrderedSample,
}

fn load(file: &ConfigFile, data: DataArgs) -> CliResult<Loaded> {
    let path: PathBuf = file.require(data.input, "input")?;
    let column: String = file.require(data.column, "column")?;
    let dither = file.pick(data.dither, "dither")?.unwrap_or(DEFAULT_DITHER);
    let seed = file.pick(data.seed, "seed")?.unwrap_or(0);
    if !(dither >= 0.0 && dither.is_finite()) {
        return Err(CliError::Config(format!(
            "dither must be non-negative, got {dither}"
        )));
    }
    let raw = read_column(&path, &column)?;
    let sample = ingest(&raw, dither, seed)?;
    Ok(Loaded {
        path,
        column,
        dither,
        seed,
        raw,
        sample,
    })
}

/// Resolved detection settings.
struct Detect {
    k: usize,
    kstar: usize,
    k0star: usize,
    regimes: usize,
    a: f64,
    q: f64,
    xi: Option<f64>,
    tail: Tail,
    lower_transform: LowerTransform,
}

impl Detect {
    fn resolve(file: &ConfigFile, args: DetectArgs) -> CliResult<Self> {
        let k = file.require(args.k, "k")?;
        let kstar = file.require(args.kstar, "kstar")?;
        let factor = file
            .pick(args.k0_factor, "k0-factor")?
            .unwrap_or(K0_STAR_FACTOR);
        let exponent = file
            .pick(args.k0_exponent, "k0-exponent")?
            .unwrap_or(K0_STAR_EXPONENT);
        Ok(Self {
            k,
            kstar,
            k0star: file
                .pick(args.k0star, "k0star")?
                .unwrap_or_else(|| default_k0_star(kstar, k, factor, exponent)),
            regimes: file.pick(args.regimes, "regimes")?.unwrap_or(1),
            a: file.pick(args.a, "a")?.unwrap_or(1.2),
            q: file.pick(args.q, "q")?.unwrap_or(0.05),
            xi: file.pick(args.xi, "xi")?,
            tail: file.pick(args.tail, "tail")?.unwrap_or_default(),
            lower_transform: file
                .pick(args.lower_transform, "lower-transform")?
                .unwrap_or_default(),
        })
    }

    fn config(&self, loaded: &Loaded) -> DastConfig {
        DastConfig {
            k: self.k,
            k_star: self.kstar,
            k0_star: self.k0star,
            regimes_max: self.regimes,
            a: self.a,
            q: self.q,
            xi_override: self.xi,
            tail: self.tail,
            lower_transform: self.lower_transform,
            dither_halfwidth: loaded.dither,
            seed: loaded.seed,
        }
    }

    /// Every effective setting, in configuration-file form.
    fn echo(&self, loaded: &Loaded) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("input", loaded.path.display().to_string());
        put("column", loaded.column.clone());
        put("dither", loaded.dither.to_string());
        put("seed", loaded.seed.to_string());
        put("k", self.k.to_string());
        put("kstar", self.kstar.to_string());
        put("k0star", self.k0star.to_string());
        put("regimes", self.regimes.to_string());
        put("a", self.a.to_string());
        put("q", self.q.to_string());
        if let Some(xi) = self.xi {
            put("xi", xi.to_string());
        }
        put("tail", self.tail.to_string());
        put("lower-transform", self.lower_transform.to_string());
        m
    }
}

type TailOutcome = Option<Result<TailOutliers, dast_core::Error>>;

/// Runs the requested tails; the lower tail mirrors the upper settings.
fn run_tails(sample: &OrderedSample, cfg: &DastConfig) -> (TailOutcome, TailOutcome) {
    match cfg.tail {
        Tail::Both => {
            let bp = tail_adjusted_boxplot(sample, cfg, cfg);
            (Some(bp.upper), Some(bp.lower))
        }
        Tail::Upper => (Some(upper_tail(sample, cfg)), None),
        Tail::Lower => (None, Some(lower_tail(sample, cfg))),
    }
}

fn first_error(outcomes: [&TailOutcome; 2]) -> Option<CliError> {
    outcomes
        .into_iter()
        .flatten()
        .find_map(|o| o.as_ref().err())
        .map(|e| CliError::from(e.clone()))
}

fn analyze(file: &ConfigFile, out: &Output, data: DataArgs, detect: DetectArgs) -> CliResult<()> {
    let loaded = load(file, data)?;
    let detect = Detect::resolve(file, detect)?;
    let cfg = detect.config(&loaded);
    cfg.validate(loaded.sample.len())?;
    let (upper, lower) = run_tails(&loaded.sample, &cfg);

    let s = &loaded.sample;
    let locate = Locator {
        sample: s,
        raw: &loaded.raw,
    };
    let q = quartiles(s);
    let flags = classical_flags(s);
    let flagged = |pred: &dyn Fn(f64) -> bool| {
        (0..s.len())
            .filter(|&i| flags[i] && pred(s.values()[i]))
            .map(|i| locate.at(i))
            .collect()
    };
    let report = Report {
        input: InputInfo {
            path: loaded.path.display().to_string(),
            column: loaded.column.clone(),
            n: s.len(),
            dither: loaded.dither,
            seed: loaded.seed,
        },
        config: detect.echo(&loaded),
        quartiles: q,
        classical: Classical {
            lower_fence: q.lower_fence,
            upper_fence: q.upper_fence,
            lower: flagged(&|x| x < q.lower_fence),
            upper: flagged(&|x| x > q.upper_fence),
        },
        upper: upper.as_ref().map(|o| locate.tail(o, true)),
        lower: lower.as_ref().map(|o| locate.tail(o, false)),
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Numeric(format!("cannot serialise report: {e}")))?;
    text.push('\n');
    out.write(&text)?;
    match first_error([&upper, &lower]) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn boxplot(
    file: &ConfigFile,
    out: &Output,
    data: DataArgs,
    detect: DetectArgs,
    format: Option<Format>,
) -> CliResult<()> {
    let format = file.pick(format, "format")?.unwrap_or_default();
    let loaded = load(file, data)?;
    let cfg = Detect::resolve(file, detect)?.config(&loaded);
    cfg.validate(loaded.sample.len())?;
    let (upper, lower) = run_tails(&loaded.sample, &cfg);
    if let Some(e) = first_error([&upper, &lower]) {
        return Err(e);
    }
    let s = &loaded.sample;
    let q = quartiles(s);
    // whiskers and outliers are shown as read, before dithering
    let raw = |p: usize| {
        Locator {
            sample: s,
            raw: &loaded.raw,
        }
        .at(p)
        .value
    };
    let n = s.len();
    // tails left out of the run keep the classical whisker
    let flags = classical_flags(s);
    let inside = || (0..n).filter(|&p| !flags[p]).map(raw);
    let (whisker_high, high) = match upper {
        Some(Ok(t)) => (
            raw(n - 1 - t.result.k0_stage1),
            t.outliers.iter().map(|&p| raw(p)).collect(),
        ),
        _ => (inside().fold(f64::NEG_INFINITY, f64::max), Vec::new()),
    };
    let (whisker_low, low) = match lower {
        Some(Ok(t)) => (
            raw(t.result.k0_stage1),
            t.outliers.iter().map(|&p| raw(p)).collect::<Vec<_>>(),
        ),
        _ => (inside().fold(f64::INFINITY, f64::min), Vec::new()),
    };

    let text = match format {
        Format::Csv => {
            let mut t = String::from("element,value\n");
            for (name, v) in [
                ("whisker_low", whisker_low),
                ("q1", q.q1),
                ("median", q.median),
                ("q3", q.q3),
                ("whisker_high", whisker_high),
                ("lower_fence", q.lower_fence),
                ("upper_fence", q.upper_fence),
            ] {
                let _ = writeln!(t, "{name},{v}");
            }
            for v in &low {
                let _ = writeln!(t, "outlier_low,{v}");
            }
            for v in &high {
                let _ = writeln!(t, "outlier_high,{v}");
            }
            t
        }
        Format::Svg => svg::render_boxplot(&svg::BoxGeometry {
            title: format!("Tail-adjusted boxplot of {}", loaded.column),
            q1: q.q1,
            median: q.median,
            q3: q.q3,
            whisker_low,
            whisker_high,
            outliers: low.into_iter().chain(high).collect(),
        }),
    };
    out.write(&text)
}

/// Least-squares intercept and slope.
fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| {
        let slope = sxy / sxx;
        (my - slope * mx, slope)
    })
}

fn xy_csv(points: &[(f64, f64)]) -> String {
    let mut t = String::from("x,y\n");
    for (x, y) in points {
        let _ = writeln!(t, "{x},{y}");
    }
    t
}

fn qqplot(
    file: &ConfigFile,
    out: &Output,
    data: DataArgs,
    kind: Option<QqKind>,
    k: Option<usize>,
    format: Option<Format>,
) -> CliResult<()> {
    let kind = file.pick(kind, "kind")?.unwrap_or(QqKind::Generalized);
    let k: Option<usize> = file.pick(k, "k")?;
    let format = file.pick(format, "format")?.unwrap_or_default();
    let loaded = load(file, data)?;
    let points = qq_points(&loaded.sample, kind)?;
    if let Some(k) = k {
        if k < 2 || k > points.len() {
            return Err(CliError::Config(format!(
                "k must lie in 2..={} for the fitted line, got {k}",
                points.len()
            )));
        }
    }
    let text = match format {
        Format::Csv => xy_csv(&points),
        Format::Svg => {
            let (x_label, y_label) = match kind {
                QqKind::Exponential => ("standard exponential quantile", "observation"),
                QqKind::Pareto => ("standard exponential quantile", "log observation"),
                QqKind::Generalized => ("log((j+1)/(n+1))", "log(X H)"),
            };
            svg::render(&svg::Chart {
                title: format!("{kind} QQ-plot of {}", loaded.column),
                x_label: x_label.into(),
                y_label: y_label.into(),
                line: k.and_then(|k| fit_line(&points[..k])),
                series: vec![svg::Series {
                    label: kind.to_string(),
                    points,
                    connected: false,
                }],
            })
        }
    };
    out.write(&text)
}

fn diagnostic(
    file: &ConfigFile,
    out: &Output,
    data: DataArgs,
    k: Option<CountList>,
    k0max: Option<usize>,
    format: Option<Format>,
) -> CliResult<()> {
    let ks = file.require(k, "k")?.0;
    if ks.is_empty() {
        return Err(CliError::Config("k list is empty".into()));
    }
    let format = file.pick(format, "format")?.unwrap_or_default();
    let k0max = match file.pick(k0max, "k0max")? {
        Some(m) => m,
        None => ks
            .iter()
            .map(|&k| default_k0_star(k, k, K0_STAR_FACTOR, K0_STAR_EXPONENT))
            .min()
            .unwrap_or(0),
    };
    if let Some(&k) = ks.iter().find(|&&k| k0max >= k) {
        return Err(CliError::Config(format!(
            "k0max = {k0max} must be below every k, got k = {k}"
        )));
    }
    let loaded = load(file, data)?;
    let series = diagnostic_k0_series(&loaded.sample, &ks, k0max)?;
    let text = match format {
        Format::Csv => {
            let mut t = String::from("k,x,y\n");
            for s in &series {
                for (k0, y) in s.values.iter().enumerate() {
                    let _ = writeln!(t, "{},{k0},{y}", s.k);
                }
            }
            t
        }
        Format::Svg => svg::render(&svg::Chart {
            title: format!("Diagnostic k0 plot of {}", loaded.column),
            x_label: "k0".into(),
            y_label: "trimmed generalized Hill".into(),
            line: None,
            series: series
                .iter()
                .map(|s| svg::Series {
                    label: format!("k = {}", s.k),
                    points: s
                        .values
                        .iter()
                        .enumerate()
                        .map(|(i, &y)| (i as f64, y))
                        .collect(),
                    connected: true,
                })
                .collect(),
        }),
    };
    out.write(&text)
}

struct Model {
    label: String,
    dist: Distribution,
    n: usize,
    reps: usize,
    seed: u64,
}

fn model(file: &ConfigFile, args: ModelArgs) -> CliResult<Model> {
    let name: String = file.require(args.dist, "dist")?;
    let params: RealList = file.require(args.params, "params")?;
    let dist = distribution(&name, &params.0)?;
    let shown: Vec<String> = params.0.iter().map(f64::to_string).collect();
    Ok(Model {
        label: format!("{name}({})", shown.join(";")),
        dist,
        n: file.pick(args.n, "n")?.unwrap_or(1000),
        reps: file.pick(args.reps, "reps")?.unwrap_or(500),
        seed: file.pick(args.seed, "seed")?.unwrap_or(0),
    })
}

struct StudyGrid {
    ks: Vec<usize>,
    kstars: Vec<usize>,
    k0star: Option<usize>,
    k0_factor: f64,
    k0_exponent: f64,
    regimes: usize,
    a: f64,
    q: f64,
    xi: Option<f64>,
    xi_known: bool,
    inject: Option<crate::settings::InjectionShape>,
    intensities: Vec<f64>,
    dither: f64,
}

fn simulate(file: &ConfigFile, out: &Output, args: ModelArgs, grid: StudyGrid) -> CliResult<()> {
    let m = model(file, args)?;
    let xi = if grid.xi_known {
        Some(m.dist.true_xi())
    } else {
        grid.xi
    };
    let mut t = String::from(
        "distribution,k,k_star,k0_star,intensity,reps,type1_rate,mean_k0,sd_k0,failures\n",
    );
    for &k in &grid.ks {
        for &kstar in &grid.kstars {
            let cfg = DastConfig {
                k,
                k_star: kstar,
                k0_star: grid
                    .k0star
                    .unwrap_or_else(|| default_k0_star(kstar, k, grid.k0_factor, grid.k0_exponent)),
                regimes_max: grid.regimes,
                a: grid.a,
                q: grid.q,
                xi_override: xi,
                tail: Tail::Upper,
                lower_transform: LowerTransform::Auto,
                dither_halfwidth: grid.dither,
                seed: m.seed,
            };
            for &intensity in &grid.intensities {
                let injection = grid.inject.map(|shape| shape.with_intensity(intensity));
                let metrics = run_study(&m.dist, injection.as_ref(), &cfg, m.n, m.reps, m.seed)?;
                let shown = if injection.is_some() {
                    intensity.to_string()
                } else {
                    String::new()
                };
                let _ = writeln!(
                    t,
                    "{},{k},{kstar},{},{shown},{},{},{},{},{}",
                    m.label,
                    cfg.k0_star,
                    metrics.reps,
                    metrics.type1_rate,
                    metrics.mean_k0,
                    metrics.sd_k0,
                    metrics.failures
                );
            }
        }
    }
    out.write(&t)
}

fn kopt(
    file: &ConfigFile,
    out: &Output,
    args: ModelArgs,
    grid: Option<CountList>,
) -> CliResult<()> {
    let m = model(file, args)?;
    let grid = file.require(grid, "grid")?.0;
    let est = estimate_k_opt(&m.dist, m.n, &grid, m.reps, m.seed)?;
    let mut t = String::from("row,k,variance,failures\n");
    for c in &est.cells {
        let v = c.variance.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(t, "cell,{},{v},{}", c.k, c.failures);
    }
    let best = est
        .cells
        .iter()
        .find(|c| c.k == est.k_opt)
        .expect("argmin is a grid cell");
    let _ = writeln!(
        t,
        "argmin,{},{},{}",
        best.k,
        best.variance.map_or(String::new(), |v| v.to_string()),
        best.failures
    );
    out.write(&t)
}
