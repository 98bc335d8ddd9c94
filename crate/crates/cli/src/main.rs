mod args;

use anyhow::{anyhow, bail, Context, Result};
use args::*;
use clap::Parser;
use ksample_evalues::config::{FamilyConfig, GrowthMethodName, MeanOf, ProjectMethod, RunConfig};
use ksample_evalues::evariables::{evaluate, Block, EValueKind};
use ksample_evalues::growth::{self, HeatmapConfig};
use ksample_evalues::ripr::{self, brute_force_two_component, li_approximate, MixtureNull, TraceRow};
use ksample_evalues::sequential::{simulate, Simulation, StoppingPolicy, StreamState, Truth};
use ksample_evalues::{Alternative, FamilySpec};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Exit code for runs that finished but had failures in strict mode.
const STRICT_FAILURE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out = Output { dir: cli.out_dir };
    match cli.command {
        Command::Evaluate(a) => cmd_evaluate(a, &out),
        Command::Project(a) => cmd_project(a, &out),
        Command::Growth(a) => cmd_growth(a, &out),
        Command::Heatmap(a) => cmd_heatmap(a, &out),
        Command::Simulate(a) => cmd_simulate(a, &out),
    }
}

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn write(&self, name: &str, content: &str) -> Result<()> {
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

/// Loads the config file if given, applies flag overrides, and validates.
fn resolve(common: &Common, tweak: impl FnOnce(&mut RunConfig) -> Result<()>) -> Result<RunConfig> {
    resolve_with(common, true, tweak)
}

fn resolve_with(
    common: &Common,
    require_means: bool,
    tweak: impl FnOnce(&mut RunConfig) -> Result<()>,
) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| {
                anyhow!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())
            })?
        }
        None => {
            let mut missing = Vec::new();
            if common.family.is_none() {
                missing.push("--family is required without --config");
            }
            if require_means && common.mu.is_none() {
                missing.push("--mu is required without --config");
            }
            if !missing.is_empty() {
                bail!("invalid configuration: {}", missing.join("; "));
            }
            RunConfig::new(FamilyConfig {
                family: String::new(),
                fixed_params: BTreeMap::new(),
                mean_params: Vec::new(),
                mean_of: MeanOf::Statistic,
            })
        }
    };
    if let Some(f) = &common.family {
        if *f != cfg.family.family {
            cfg.family.fixed_params.clear();
        }
        cfg.family.family = f.clone();
    }
    for kv in &common.fixed {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--fixed expects KEY=VALUE, got '{kv}'"))?;
        let v: f64 = v.trim().parse().with_context(|| format!("--fixed {k}: not a number"))?;
        cfg.family.fixed_params.insert(k.trim().to_string(), v);
    }
    if let Some(mu) = &common.mu {
        cfg.family.mean_params = mu.clone();
    }
    if common.u_mean {
        cfg.family.mean_of = MeanOf::UMean;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.strict {
        cfg.strict = true;
    }
    tweak(&mut cfg)?;
    cfg.validate_with(require_means)?;
    Ok(cfg)
}

fn growth_method(m: GrowthMethodArg) -> GrowthMethodName {
    match m {
        GrowthMethodArg::Auto => GrowthMethodName::Auto,
        GrowthMethodArg::Quadrature => GrowthMethodName::Quadrature,
        GrowthMethodArg::MonteCarlo => GrowthMethodName::MonteCarlo,
    }
}

fn load_mixture(path: &Path) -> Result<MixtureNull> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| anyhow!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))?;
    let inner = v.get("mixture").cloned().unwrap_or(v);
    serde_json::from_value(inner).with_context(|| format!("{}: not a mixture", path.display()))
}

/// Parses a kind name, loading the mixture for gro_m.
fn kind_of(cfg: &RunConfig, name: &str) -> Result<EValueKind> {
    match EValueKind::from_name(name) {
        Ok(k) => Ok(k),
        Err(ksample_evalues::Error::Uncertified(_)) => match &cfg.mixture_path {
            Some(p) => {
                let mixture = load_mixture(Path::new(p))?;
                mixture.require_certificate().map_err(|_| {
                    anyhow!("mixture in {p} has no certificate; certify it with `ksample project`")
                })?;
                Ok(EValueKind::GroM { mixture })
            }
            None => bail!(
                "kind gro_m needs a certified mixture: run `ksample project` with the same family \
                 and means, then pass its JSON with --mixture"
            ),
        },
        Err(e) => Err(e.into()),
    }
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("'{}' is not a number", t.trim())))
        .collect()
}

fn cmd_evaluate(a: EvaluateArgs, out: &Output) -> Result<ExitCode> {
    let cfg = resolve(&a.common, |c| {
        if let Some(k) = &a.kind {
            c.kind = k.clone();
        }
        if let Some(m) = &a.mixture {
            c.mixture_path = Some(m.display().to_string());
        }
        if let Some(al) = a.alpha {
            c.simulate.alpha = al;
        }
        Ok(())
    })?;
    if a.common.emit_config {
        print!("{}", cfg.to_json());
        return Ok(ExitCode::SUCCESS);
    }
    let (spec, alt) = cfg.family.resolve()?;
    let kind = kind_of(&cfg, &cfg.kind)?;

    if let Some(path) = &a.stream {
        return evaluate_stream(&cfg, &spec, &alt, &kind, path, out);
    }
    let blocks: Vec<(usize, Vec<f64>)> = match (&a.block, &a.blocks) {
        (Some(b), _) => vec![(1, parse_values(b).context("--block")?)],
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut v = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let vals = parse_values(line).with_context(|| format!("{} line {}", path.display(), i + 1))?;
                v.push((i + 1, vals));
            }
            v
        }
        (None, None) => bail!("evaluate needs --block, --blocks or --stream"),
    };
    let mut results = Vec::new();
    let mut total = 0.0;
    for (line, x) in blocks {
        let block = Block::new(&spec, x).with_context(|| format!("block on line {line}"))?;
        let r = evaluate(&spec, &alt, &kind, &block).with_context(|| format!("block on line {line}"))?;
        total += r.log_evalue;
        results.push(json!({
            "line": line,
            "block": block.x(),
            "log_evalue": r.log_evalue,
            "evalue": r.evalue(),
        }));
    }
    let certificate = match &kind {
        EValueKind::GroM { mixture } => mixture.certificate,
        _ => None,
    };
    let report = json!({
        "config": cfg,
        "kind": kind.name(),
        "results": results,
        "total_log_evalue": total,
        "certificate": certificate,
    });
    let s = to_json(&report);
    out.write("evaluate.json", &s)?;
    print!("{s}");
    Ok(ExitCode::SUCCESS)
}

fn evaluate_stream(
    cfg: &RunConfig,
    spec: &FamilySpec,
    alt: &Alternative,
    kind: &EValueKind,
    path: &Path,
    out: &Output,
) -> Result<ExitCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut state = StreamState::new(spec, alt, kind, cfg.simulate.alpha)?;
    let mut rejected = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (n == 1 && line.to_ascii_lowercase().starts_with("group")) {
            continue;
        }
        let (g, v) = line
            .split_once(',')
            .ok_or_else(|| anyhow!("{} line {n}: expected `group,value`", path.display()))?;
        let g: usize = g
            .trim()
            .parse()
            .map_err(|_| anyhow!("{} line {n}: group '{}' is not a positive integer", path.display(), g.trim()))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| anyhow!("{} line {n}: value '{}' is not a number", path.display(), v.trim()))?;
        if g == 0 {
            bail!("{} line {n}: groups are numbered from 1", path.display());
        }
        if let Err(e) = state.ingest(g - 1, v) {
            rejected.push(json!({"line": n, "error": e.to_string()}));
        }
    }
    let report = json!({
        "config": cfg,
        "kind": kind.name(),
        "blocks": state.blocks(),
        "log_value": state.log_value(),
        "value": state.log_value().exp(),
        "decision": state.decide(),
        "pending": (0..state.k()).map(|j| state.pending(j)).collect::<Vec<_>>(),
        "block_log_evalues": state.block_logs(),
        "rejected_observations": rejected,
        "validity_caveat": state.validity_caveat(),
    });
    let s = to_json(&report);
    out.write("evaluate.json", &s)?;
    print!("{s}");
    if cfg.strict && !rejected.is_empty() {
        eprintln!("{} observations rejected", rejected.len());
        return Ok(ExitCode::from(STRICT_FAILURE));
    }
    Ok(ExitCode::SUCCESS)
}

fn trace_csv(trace: &[TraceRow]) -> Result<String> {
    csv_string(
        &["iter", "kl", "sup_expectation"],
        trace
            .iter()
            .map(|r| vec![r.iter.to_string(), r.kl.to_string(), r.sup_expectation.to_string()]),
    )
}

fn cmd_project(a: ProjectArgs, out: &Output) -> Result<ExitCode> {
    let cfg = resolve(&a.common, |c| {
        if let Some(m) = a.method {
            c.project.method = match m {
                ProjectMethodArg::Li => ProjectMethod::Li,
                ProjectMethodArg::BruteForce => ProjectMethod::BruteForce,
                ProjectMethodArg::Both => ProjectMethod::Both,
            };
        }
        if let Some(n) = a.max_iters {
            c.project.li.max_iters = n;
        }
        if let Some(n) = a.mu0_points {
            let (spec, alt) = c.family.resolve()?;
            let g = ripr::default_mu0_grid(&spec, &alt, n);
            c.project.li.mu0_grid = Some(g);
            c.project.brute_force.mu0_grid = Some(g);
        }
        Ok(())
    })?;
    if a.common.emit_config {
        print!("{}", cfg.to_json());
        return Ok(ExitCode::SUCCESS);
    }
    let (spec, alt) = cfg.family.resolve()?;
    let mut results = Vec::new();
    let mut best: Option<MixtureNull> = None;
    let mut consider = |m: &MixtureNull| {
        let sup = m.certificate.map_or(f64::INFINITY, |c| c.sup_expectation);
        if best
            .as_ref()
            .is_none_or(|b| sup < b.certificate.map_or(f64::INFINITY, |c| c.sup_expectation))
        {
            best = Some(m.clone());
        }
    };
    if matches!(cfg.project.method, ProjectMethod::Li | ProjectMethod::Both) {
        let li = li_approximate(&spec, &alt, &cfg.project.li)?;
        let kl = ripr::kl_to_mixture(&spec, &alt, &li.mixture)?;
        out.write("trace.csv", &trace_csv(&li.trace)?)?;
        consider(&li.mixture);
        results.push(json!({"method": "li", "mixture": li.mixture, "kl": kl, "trace": li.trace}));
    }
    if matches!(cfg.project.method, ProjectMethod::BruteForce | ProjectMethod::Both) {
        let mix = brute_force_two_component(&spec, &alt, &cfg.project.brute_force)?;
        let kl = ripr::kl_to_mixture(&spec, &alt, &mix)?;
        consider(&mix);
        results.push(json!({"method": "brute_force", "mixture": mix, "kl": kl}));
    }
    let report = json!({"config": cfg, "results": results, "mixture": best});
    let s = to_json(&report);
    out.write("project.json", &s)?;
    print!("{s}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_growth(a: GrowthArgs, out: &Output) -> Result<ExitCode> {
    let cfg = resolve(&a.common, |c| {
        if let Some(k) = &a.kinds {
            c.kinds = k.clone();
        }
        if let Some(m) = a.method {
            c.growth.method = growth_method(m);
        }
        if let Some(n) = a.samples {
            c.growth.mc_samples = n;
        }
        if let Some(m) = &a.mixture {
            c.mixture_path = Some(m.display().to_string());
        }
        Ok(())
    })?;
    if a.common.emit_config {
        print!("{}", cfg.to_json());
        return Ok(ExitCode::SUCCESS);
    }
    let (spec, alt) = cfg.family.resolve()?;
    let kinds = cfg.kinds.iter().map(|k| kind_of(&cfg, k)).collect::<Result<Vec<_>>>()?;
    let method = cfg.growth.method(alt.k(), cfg.seed);
    let report = growth::growth_report(&spec, &alt, &kinds, method)?;
    let coefficients = alt.direction().map(|d| {
        let mu0 = alt.mu0_star();
        json!({
            "mu0": mu0,
            "delta": alt.delta(),
            "direction": d,
            "pseudo_minus_gro_iid": growth::coeff_iid_gap(&spec, mu0, d).ok().map(|c| c.value),
            "pseudo_minus_cond": growth::coeff_cond_gap(&spec, mu0, d, alt.k()).ok().map(|c| c.value),
        })
    });
    let s = to_json(&json!({"config": cfg, "report": report, "coefficients": coefficients}));
    out.write("growth.json", &s)?;
    print!("{s}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_heatmap(a: HeatmapArgs, out: &Output) -> Result<ExitCode> {
    let cfg = resolve_with(&a.common, false, |c| {
        if let Some(k) = &a.kinds {
            c.kinds = k.clone();
        }
        if let Some(n) = a.n {
            c.heatmap.n = n;
        }
        if let Some(r) = &a.range {
            if r.len() != 2 {
                bail!("--range expects lo,hi");
            }
            c.heatmap.range = Some((r[0], r[1]));
        }
        if let Some(m) = a.method {
            c.growth.method = growth_method(m);
        }
        if let Some(n) = a.samples {
            c.growth.mc_samples = n;
        }
        Ok(())
    })?;
    if a.common.emit_config {
        print!("{}", cfg.to_json());
        return Ok(ExitCode::SUCCESS);
    }
    if cfg.kinds.len() != 2 {
        bail!("heatmap needs exactly two kinds, got {}", cfg.kinds.len());
    }
    let spec = cfg.family.spec()?;
    let hc = HeatmapConfig {
        n: cfg.heatmap.n,
        range: cfg.heatmap.range,
        minuend: kind_of(&cfg, &cfg.kinds[0])?,
        subtrahend: kind_of(&cfg, &cfg.kinds[1])?,
        method: cfg.growth.method(2, cfg.seed),
    };
    let map = growth::heatmap(&spec, &hc)?;
    let cells_csv = csv_string(
        &["mu1", "mu2", "gap", "gap_fourth_root"],
        map.cells.iter().map(|c| {
            vec![
                c.mu1.to_string(),
                c.mu2.to_string(),
                c.gap.to_string(),
                c.gap_fourth_root().to_string(),
            ]
        }),
    )?;
    let slice_csv = |offset: usize| {
        csv_string(
            &["delta", "signed_fourth_root"],
            map.slice(offset)
                .into_iter()
                .map(|p| vec![p.delta.to_string(), p.signed_fourth_root.to_string()]),
        )
    };
    out.write("heatmap.csv", &cells_csv)?;
    out.write("slice_main.csv", &slice_csv(0)?)?;
    out.write("slice_offset.csv", &slice_csv(a.slice_offset)?)?;
    let failures: Vec<_> = map.failures().cloned().collect();
    out.write(
        "heatmap.json",
        &to_json(&json!({"config": cfg, "standard": map.standard, "means": map.means, "failures": failures})),
    )?;
    print!("{cells_csv}");
    if !failures.is_empty() {
        eprintln!("{} of {} cells failed", failures.len(), map.cells.len());
        if cfg.strict {
            return Ok(ExitCode::from(STRICT_FAILURE));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(a: SimulateArgs, out: &Output) -> Result<ExitCode> {
    let cfg = resolve(&a.common, |c| {
        if let Some(k) = &a.kind {
            c.kind = k.clone();
        }
        if let Some(al) = a.alpha {
            c.simulate.alpha = al;
        }
        let max = a.max_blocks.unwrap_or(c.simulate.policy.max_blocks());
        if let Some(p) = a.policy {
            c.simulate.policy = match p {
                PolicyArg::FixedHorizon => StoppingPolicy::FixedHorizon { blocks: max },
                PolicyArg::Threshold => StoppingPolicy::Threshold { max_blocks: max },
                PolicyArg::RandomBudget => StoppingPolicy::RandomBudget { max_blocks: max },
            };
        } else if a.max_blocks.is_some() {
            c.simulate.policy = match c.simulate.policy {
                StoppingPolicy::FixedHorizon { .. } => StoppingPolicy::FixedHorizon { blocks: max },
                StoppingPolicy::Threshold { .. } => StoppingPolicy::Threshold { max_blocks: max },
                StoppingPolicy::RandomBudget { .. } => StoppingPolicy::RandomBudget { max_blocks: max },
            };
        }
        if let Some(t) = a.trials {
            c.simulate.trials = t;
        }
        if a.under_alternative {
            c.simulate.under_alternative = true;
        }
        if let Some(m) = a.null_mu0 {
            c.simulate.null_mu0 = Some(m);
        }
        if let Some(m) = &a.mixture {
            c.mixture_path = Some(m.display().to_string());
        }
        Ok(())
    })?;
    if a.common.emit_config {
        print!("{}", cfg.to_json());
        return Ok(ExitCode::SUCCESS);
    }
    let (spec, alt) = cfg.family.resolve()?;
    let truth = if cfg.simulate.under_alternative {
        Truth::Means { mu: alt.mu().to_vec() }
    } else {
        Truth::Null {
            mu0: cfg.simulate.null_mu0.unwrap_or(alt.mu0_star()),
        }
    };
    let sim = Simulation {
        alternative: alt,
        kind: kind_of(&cfg, &cfg.kind)?,
        truth,
        alpha: cfg.simulate.alpha,
        policy: cfg.simulate.policy,
        trials: cfg.simulate.trials,
        seed: cfg.seed,
        schedule: cfg.simulate.schedule.clone(),
    };
    let summary = simulate(&spec, &sim)?;
    let trace = csv_string(
        &["block", "rejected_fraction"],
        summary
            .trace
            .iter()
            .map(|p| vec![p.block.to_string(), p.rejected_fraction.to_string()]),
    )?;
    out.write("trace.csv", &trace)?;
    let s = to_json(&json!({"config": cfg, "summary": summary}));
    out.write("simulate.json", &s)?;
    print!("{s}");
    Ok(ExitCode::SUCCESS)
}
