//! `penalab`: command-line experiments for penalized Brownian motion.
//!
//! Every subcommand prints JSON lines on stdout. Verdict lines decide the
//! exit status: 0 when all pass, 1 when any fails, 2 on a usage or
//! configuration error.

mod parse;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use penalab_core::exact_laws::{
    bessel3_cdf, classify_region, h_cdf, hitting_time_cdf, p_bessel3, p_joint, p_max, phi_from_f,
};
use penalab_core::expansion::{f1_coefficient_check, f1_kennedy_check, fit_rate_excess, RateModel, SeriesSample, SeriesSource, DEFAULT_WINDOW};
use penalab_core::harness::suite::{run_criterion, SuiteConfig, CRITERIA};
use penalab_core::harness::{ExperimentConfig, Provenance, Verdict};
use penalab_core::penalized_mc::{bessel_penalization_check, martingale_mean, ratio_mc, regime_limit_check, BesselWeight};
use penalab_core::quadrature::{kennedy_series_point, phi_series_point, q_ay_limit, q_phi_limit, q_y_limit};
use penalab_core::samplers::{sample_q_ay, sample_q_f, sample_q_phi, sample_q_y, QfSampler, QyOptions};
use penalab_core::{RectEvent, RngStream};
use serde::Serialize;
use serde_json::json;

use parse::{Law, Penalty};

#[derive(Parser)]
#[command(name = "penalab", version, about = "Penalizations of Brownian motion by its one-sided maximum")]
struct Cli {
    /// Base seed; defaults to $PENALAB_SEED, then 42.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Plain-text key=value file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV series.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form densities and distribution functions.
    Density(DensityArgs),
    /// Regime of the exponential penalty e^{λS + μX}.
    Classify(ClassifyArgs),
    /// Monte Carlo check that a weight martingale has mean one.
    MartingaleCheck(MartingaleArgs),
    /// Sampler frequencies against the quadrature of a limit law.
    Limit(LimitArgs),
    /// Finite-horizon penalized probabilities approaching their limit.
    Converge(ConvergeArgs),
    /// First-order coefficient of the large-t expansion.
    Expansion(ExpansionArgs),
    /// Bessel(3) penalized by a function of (X_t, J_t).
    Bessel(BesselArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct DensityArgs {
    /// max, bessel3, joint or hitting.
    #[arg(long)]
    law: Option<String>,
    /// Time.
    #[arg(long)]
    r: Option<f64>,
    /// Comma-separated evaluation points (times for `hitting`, endpoints for `joint`).
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Level for `hitting`, maximum for `joint`.
    #[arg(long)]
    y: Option<f64>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
}

#[derive(Args)]
struct MartingaleArgs {
    /// phi:<density>, kennedy:λ:A or mu-lambda:λ:μ.
    #[arg(long, allow_hyphen_values = true)]
    martingale: Option<String>,
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args)]
struct LimitArgs {
    /// y:Y, ay:A:Y, phi:<density> or f:exp:λ:μ.
    #[arg(long, allow_hyphen_values = true)]
    law: Option<String>,
    /// Rectangle event, e.g. u=1,b=0,c=0.5.
    #[arg(long, allow_hyphen_values = true)]
    event: Option<String>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// phi:<density>, kennedy:λ:A or exp:λ:μ.
    #[arg(long, allow_hyphen_values = true)]
    penalty: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    event: Option<String>,
    /// Comma-separated horizons.
    #[arg(long)]
    t: Option<String>,
    /// Sample size for Monte Carlo penalties.
    #[arg(long)]
    n: Option<f64>,
}

#[derive(Args)]
struct ExpansionArgs {
    /// phi:<density> or kennedy:λ:A.
    #[arg(long, allow_hyphen_values = true)]
    penalty: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    event: Option<String>,
    #[arg(long)]
    t: Option<String>,
    /// quadrature or mc.
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    n: Option<f64>,
}

#[derive(Args)]
struct BesselArgs {
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Use the weight (1 + X_t)^{-k} instead of the exponential one.
    #[arg(long)]
    power: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    /// Comma-separated bounds b of the events {X_u ≤ b}.
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    n: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: Option<String>,
    /// Multiplier on every Monte Carlo sample size.
    #[arg(long)]
    scale: Option<f64>,
    /// Comma-separated criterion numbers; all by default.
    #[arg(long)]
    criteria: Option<String>,
}

/// Resolved parameters of one run.
struct Run {
    cfg: ExperimentConfig,
    seed: u64,
    out: Option<PathBuf>,
    all_pass: bool,
    stdout: io::StdoutLock<'static>,
}

fn put<T: ToString>(cfg: &mut ExperimentConfig, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        cfg.set(key, v.to_string());
    }
}

impl Run {
    fn emit<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.stdout, value)?;
        writeln!(self.stdout)?;
        Ok(())
    }

    fn verdict(&mut self, v: &Verdict) -> Result<()> {
        self.all_pass &= v.pass;
        self.emit(v)
    }

    fn f(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.cfg.get(key, default)?)
    }

    fn n(&self, default: f64) -> Result<usize> {
        let n = self.f("n", default)?;
        if !(n >= 2.0 && n.is_finite()) {
            bail!("key 'n': need at least 2 samples, got {n}");
        }
        Ok(n as usize)
    }

    fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        Ok(self.cfg.get_list(key, default)?)
    }

    fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.cfg.get_str(key).unwrap_or(default)
    }

    fn event(&self) -> Result<RectEvent> {
        parse::event(self.str_or("event", "u=1,b=0,c=0.5"))
    }

    fn stream(&self, id: u64) -> RngStream {
        RngStream::new(self.seed, id)
    }

    fn csv(&self, name: &str, header: &str, rows: &[Vec<f64>]) -> Result<()> {
        let Some(dir) = &self.out else { return Ok(()) };
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        let mut text = format!("{header}\n");
        for r in rows {
            text.push_str(&r.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
            text.push('\n');
        }
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("penalab: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (name, keys, overrides): (&str, &[&str], ExperimentConfig) = {
        let mut o = ExperimentConfig::new("");
        let (name, keys): (&str, &[&str]) = match &cli.command {
            Command::Density(a) => {
                put(&mut o, "law", &a.law);
                put(&mut o, "r", &a.r);
                put(&mut o, "z", &a.z);
                put(&mut o, "y", &a.y);
                ("density", &["law", "r", "z", "y"])
            }
            Command::Classify(a) => {
                put(&mut o, "lambda", &a.lambda);
                put(&mut o, "mu", &a.mu);
                ("classify", &["lambda", "mu"])
            }
            Command::MartingaleCheck(a) => {
                put(&mut o, "martingale", &a.martingale);
                put(&mut o, "u", &a.u);
                put(&mut o, "n", &a.n);
                put(&mut o, "step", &a.step);
                ("martingale-check", &["martingale", "u", "n", "step"])
            }
            Command::Limit(a) => {
                put(&mut o, "law", &a.law);
                put(&mut o, "event", &a.event);
                put(&mut o, "n", &a.n);
                put(&mut o, "step", &a.step);
                ("limit", &["law", "event", "n", "step"])
            }
            Command::Converge(a) => {
                put(&mut o, "penalty", &a.penalty);
                put(&mut o, "event", &a.event);
                put(&mut o, "t", &a.t);
                put(&mut o, "n", &a.n);
                ("converge", &["penalty", "event", "t", "n"])
            }
            Command::Expansion(a) => {
                put(&mut o, "penalty", &a.penalty);
                put(&mut o, "event", &a.event);
                put(&mut o, "t", &a.t);
                put(&mut o, "source", &a.source);
                put(&mut o, "n", &a.n);
                ("expansion", &["penalty", "event", "t", "source", "n"])
            }
            Command::Bessel(a) => {
                put(&mut o, "lambda", &a.lambda);
                put(&mut o, "mu", &a.mu);
                put(&mut o, "power", &a.power);
                put(&mut o, "u", &a.u);
                put(&mut o, "b", &a.b);
                put(&mut o, "t", &a.t);
                put(&mut o, "n", &a.n);
                ("bessel", &["lambda", "mu", "power", "u", "b", "t", "n"])
            }
            Command::Verify(a) => {
                put(&mut o, "suite", &a.suite);
                put(&mut o, "scale", &a.scale);
                put(&mut o, "criteria", &a.criteria);
                ("verify", &["suite", "scale", "criteria"])
            }
        };
        put(&mut o, "seed", &cli.seed);
        (name, keys, o)
    };
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse_kv(name, &text)?
        }
        None => ExperimentConfig::new(name),
    };
    cfg.merge(&overrides);
    let mut allowed = keys.to_vec();
    allowed.push("seed");
    cfg.check_keys(&allowed)?;
    let env_seed = match std::env::var("PENALAB_SEED") {
        Ok(s) => s.trim().parse().with_context(|| format!("PENALAB_SEED: not an integer: {s:?}"))?,
        Err(_) => 42,
    };
    let seed = cfg.get("seed", env_seed)?;
    let mut r = Run { cfg, seed, out: cli.out, all_pass: true, stdout: io::stdout().lock() };
    match cli.command {
        Command::Density(_) => density(&mut r)?,
        Command::Classify(_) => classify(&mut r)?,
        Command::MartingaleCheck(_) => martingale_check(&mut r)?,
        Command::Limit(_) => limit(&mut r)?,
        Command::Converge(_) => converge(&mut r)?,
        Command::Expansion(_) => expansion(&mut r)?,
        Command::Bessel(_) => bessel(&mut r)?,
        Command::Verify(_) => verify(&mut r)?,
    }
    r.stdout.flush()?;
    Ok(r.all_pass)
}

fn density(r: &mut Run) -> Result<()> {
    let law = r.str_or("law", "max").to_string();
    let t = r.f("r", 1.0)?;
    let y = r.f("y", 1.0)?;
    let zs = r.list("z", &[0.5, 1.0, 2.0])?;
    let mut rows = Vec::new();
    for &z in &zs {
        let (pdf, cdf) = match law.as_str() {
            "max" => (p_max(t, z)?, Some(h_cdf(t, z)?)),
            "bessel3" => (p_bessel3(t, z)?, Some(bessel3_cdf(t, z)?)),
            "joint" => (p_joint(t, z, y)?, None),
            "hitting" => {
                if y.is_nan() || y <= 0.0 {
                    bail!("key 'y': hitting level must be positive");
                }
                let pdf = if z > 0.0 { y / (2.0 * std::f64::consts::PI * z.powi(3)).sqrt() * (-y * y / (2.0 * z)).exp() } else { 0.0 };
                (pdf, Some(hitting_time_cdf(y, z)))
            }
            other => bail!("key 'law': unknown law {other:?}"),
        };
        r.emit(&json!({ "law": law, "r": t, "z": z, "pdf": pdf, "cdf": cdf }))?;
        rows.push(vec![z, pdf, cdf.unwrap_or(f64::NAN)]);
    }
    r.csv("density.csv", "z,pdf,cdf", &rows)
}

fn classify(r: &mut Run) -> Result<()> {
    let (l, m) = (r.f("lambda", 0.0)?, r.f("mu", 0.0)?);
    if !(l.is_finite() && m.is_finite()) {
        bail!("lambda and mu must be finite");
    }
    r.emit(&json!({ "lambda": l, "mu": m, "region": classify_region(l, m).as_str() }))
}

fn martingale_check(r: &mut Run) -> Result<()> {
    let m = parse::martingale(r.str_or("martingale", "phi:exponential:1"))?;
    let us = r.list("u", &[0.5, 1.0, 2.0])?;
    let (n, step) = (r.n(1e5)?, r.f("step", 1e-2)?);
    let stream = r.stream(2);
    let mut rows = Vec::new();
    for (j, &u) in us.iter().enumerate() {
        let e = martingale_mean(&m, u, step, n, stream.fork(j as u64))?;
        let v = Verdict::within(format!("{} at u={u}", m.label()), e.value, 1.0, 4.0 * e.stderr, Provenance::ClosedForm)
            .with_note(format!("4·stderr, n = {n}, δ = {step}"));
        r.verdict(&v)?;
        rows.push(vec![u, e.value, e.stderr]);
    }
    r.csv("martingale.csv", "u,mean,stderr", &rows)
}

fn limit(r: &mut Run) -> Result<()> {
    let law = parse::law(r.str_or("law", "y:1"))?;
    let ev = r.event()?;
    let (n, step) = (r.n(1e5)?, r.f("step", 1e-3)?);
    let opts = QyOptions::default();
    let (u, e) = (ev.u, ev);
    let hit = move |p: penalab_core::Path| if e.contains(p.value_at(u), p.max_at(u)) { 1.0 } else { 0.0 };
    let stream = r.stream(3);
    let (label, target, full, est) = match &law {
        Law::Y(y) => {
            sample_q_y(*y, u, step, opts, &mut stream.rng())?;
            let est = ratio_mc(n, stream, |rng| (0.0, hit(sample_q_y(*y, u, step, opts, rng).expect("validated"))))?;
            (format!("Q^(y), y={y}"), q_y_limit(*y, &ev)?, q_y_limit(*y, &RectEvent::full(u))?, est)
        }
        Law::Ay(a, y) => {
            sample_q_ay(*a, *y, u, step, opts, &mut stream.rng())?;
            let est = ratio_mc(n, stream, |rng| (0.0, hit(sample_q_ay(*a, *y, u, step, opts, rng).expect("validated"))))?;
            (format!("Q^(a,y), (a,y)=({a},{y})"), q_ay_limit(*a, *y, &ev)?, q_ay_limit(*a, *y, &RectEvent::full(u))?, est)
        }
        Law::Phi(phi) => {
            sample_q_phi(phi, u, step, opts, &mut stream.rng())?;
            let est = ratio_mc(n, stream, |rng| (0.0, hit(sample_q_phi(phi, u, step, opts, rng).expect("validated"))))?;
            (format!("Q^phi, phi={}", phi.label()), q_phi_limit(phi, &ev), q_phi_limit(phi, &RectEvent::full(u)), est)
        }
        Law::F(f) => {
            let sampler = QfSampler::new(f)?;
            let phi = phi_from_f(f)?;
            sample_q_f(&sampler, u, step, opts, &mut stream.rng())?;
            let est = ratio_mc(n, stream, |rng| (0.0, hit(sample_q_f(&sampler, u, step, opts, rng).expect("validated"))))?;
            (format!("Q_f, f={f:?}"), q_phi_limit(&phi, &ev), q_phi_limit(&phi, &RectEvent::full(u)), est)
        }
    };
    let se = (target * (1.0 - target) / n as f64).sqrt();
    r.verdict(
        &Verdict::within(format!("{label} on {}", ev.label()), est.value, target, 3.0 * se, Provenance::Quadrature)
            .with_note(format!("3·stderr, n = {n}, δ = {step}")),
    )?;
    r.verdict(&Verdict::within(format!("{label} full-space mass"), full, 1.0, 1e-7, Provenance::Quadrature))
}

const EXCESS_REL: f64 = 1e-9;

fn converge(r: &mut Run) -> Result<()> {
    let pen = parse::penalty(r.str_or("penalty", "phi:uniform:1"))?;
    let ev = r.event()?;
    let ts = r.list("t", &DEFAULT_WINDOW)?;
    let (model, points) = match &pen {
        Penalty::Phi(phi) => (RateModel::Polynomial, ts.iter().map(|&t| phi_series_point(phi, &ev, t)).collect::<Result<Vec<_>, _>>()?),
        Penalty::Kennedy(psi) => (
            RateModel::Discounted { lambda: psi.lambda() },
            ts.iter().map(|&t| kennedy_series_point(psi, &ev, t)).collect::<Result<Vec<_>, _>>()?,
        ),
        Penalty::Exp { lambda, mu } => {
            let n = r.n(1e5)?;
            let rows = regime_limit_check(*lambda, *mu, &[ev], &ts, n, r.stream(6))?;
            let mut csv = Vec::new();
            for (_, row) in rows {
                let v = Verdict::within(
                    format!("exp:{lambda}:{mu} on {} at t={}", ev.label(), row.t),
                    row.estimate,
                    row.target,
                    3.0 * row.stderr + 2.0 / row.t,
                    Provenance::Quadrature,
                )
                .with_note(format!("3·stderr + 2/t, n = {n}"));
                r.verdict(&v)?;
                csv.push(vec![row.t, row.estimate, row.stderr, row.target]);
            }
            return r.csv("converge.csv", "t,estimate,stderr,target", &csv);
        }
    };
    let limit = points[0].limit;
    let mut series = Vec::new();
    let mut csv = Vec::new();
    for p in &points {
        r.emit(&json!({ "t": p.t, "value": p.value(), "excess": p.excess, "limit": p.limit }))?;
        series.push(SeriesSample { t: p.t, value: p.value(), stderr: EXCESS_REL * p.excess.abs().max(f64::MIN_POSITIVE) });
        csv.push(vec![p.t, p.value(), p.excess, p.limit]);
    }
    r.csv("converge.csv", "t,value,excess,limit", &csv)?;
    let fit = fit_rate_excess(&series, limit, model)?;
    r.emit(&json!({ "fit": fit }))
}

fn expansion(r: &mut Run) -> Result<()> {
    let pen = parse::penalty(r.str_or("penalty", "phi:uniform:1"))?;
    let ev = r.event()?;
    let ts = r.list("t", &DEFAULT_WINDOW)?;
    match &pen {
        Penalty::Phi(phi) => {
            let source = match r.str_or("source", "quadrature") {
                "quadrature" => SeriesSource::Quadrature,
                "mc" => SeriesSource::MonteCarlo { n: r.n(1e6)?, stream: r.stream(8) },
                other => bail!("key 'source': expected quadrature or mc, got {other:?}"),
            };
            let rep = f1_coefficient_check(phi, &ev, &ts, source)?;
            r.verdict(
                &Verdict::within("fitted c1 vs E[1_Γ F1], relative error", rep.rel_error, 0.0, 0.1, Provenance::Quadrature)
                    .with_note(format!("c1 = {}, target = {}", rep.fit.c1, rep.target)),
            )?;
            r.verdict(&Verdict::at_least("half-window residual ratio", rep.residual_ratio, 3.0, Provenance::Quadrature))?;
            let csv: Vec<Vec<f64>> = rep.series.iter().map(|s| vec![s.t, s.value, s.stderr, rep.fit.model_value(s.t)]).collect();
            r.csv("expansion.csv", "t,value,stderr,model", &csv)?;
            r.emit(&json!({ "report": rep }))
        }
        Penalty::Kennedy(psi) => {
            let rep = f1_kennedy_check(psi, &ev, &ts)?;
            r.verdict(
                &Verdict::within("discounted fit vs E[1_Γ F1^λ], relative error", rep.rel_error, 0.0, 0.15, Provenance::Quadrature)
                    .with_note(format!("c1 = {}, target = {}", rep.fit.c1, rep.target)),
            )?;
            r.verdict(&Verdict::at_least("wrong-model residual ratio", rep.model_residual_ratio, 10.0, Provenance::Quadrature))?;
            let csv: Vec<Vec<f64>> = rep.series.iter().map(|s| vec![s.t, s.value, s.stderr, rep.fit.model_value(s.t)]).collect();
            r.csv("expansion.csv", "t,value,stderr,model", &csv)?;
            r.emit(&json!({ "report": rep }))
        }
        Penalty::Exp { .. } => bail!("key 'penalty': expansion supports phi and kennedy penalties"),
    }
}

fn bessel(r: &mut Run) -> Result<()> {
    let w = match r.cfg.get_str("power") {
        Some(_) => BesselWeight::PowerDecay { k: r.f("power", 4.0)? },
        None => BesselWeight::ExpLinear { lambda: r.f("lambda", -1.0)?, mu: r.f("mu", 0.0)? },
    };
    let u = r.f("u", 1.0)?;
    let bs = r.list("b", &[0.5, 1.0, 2.0])?;
    let ts = r.list("t", &[400.0])?;
    let n = r.n(1e5)?;
    let stream = r.stream(11);
    let mut csv = Vec::new();
    for (j, &b) in bs.iter().enumerate() {
        for row in bessel_penalization_check(&w, u, b, &ts, n, stream.fork(j as u64))? {
            let v = Verdict::within(format!("{w:?}: P(X_{u} ≤ {b}) at t={}", row.t), row.estimate, row.target, 3.0 * row.stderr, Provenance::Quadrature)
                .with_note(format!("3·stderr, n = {n}"));
            r.verdict(&v)?;
            csv.push(vec![b, row.t, row.estimate, row.stderr, row.target]);
        }
    }
    r.csv("bessel.csv", "b,t,estimate,stderr,target", &csv)
}

fn verify(r: &mut Run) -> Result<()> {
    let suite = r.str_or("suite", "core");
    if suite != "core" {
        bail!("key 'suite': only 'core' is available, got {suite:?}");
    }
    let all: Vec<f64> = CRITERIA.iter().map(|c| c.0 as f64).collect();
    let ids = r.list("criteria", &all)?;
    let cfg = SuiteConfig { seed: r.seed, scale: r.f("scale", 1.0)? };
    if cfg.scale.is_nan() || cfg.scale <= 0.0 {
        bail!("key 'scale' must be positive");
    }
    let mut passed = 0;
    for &id in &ids {
        if !(id >= 1.0 && id <= CRITERIA.len() as f64 && id.fract() == 0.0) {
            bail!("key 'criteria': no criterion {id}");
        }
        let rep = run_criterion(id as u8, &cfg);
        for v in &rep.verdicts {
            r.emit(&json!({ "criterion": rep.id, "verdict": v }))?;
        }
        if let Some(e) = &rep.error {
            r.emit(&json!({ "criterion": rep.id, "error": e }))?;
        }
        r.all_pass &= rep.pass();
        passed += rep.pass() as usize;
        r.emit(&json!({ "criterion": rep.id, "title": rep.title, "pass": rep.pass() }))?;
    }
    r.emit(&json!({ "suite": "core", "seed": cfg.seed, "criteria": ids.len(), "passed": passed }))
}
