//! Parsers for the compact `family:param:...` arguments.

use anyhow::{anyhow, bail, Context, Result};
use penalab_core::exact_laws::{BivariatePenalty, KennedyProfile};
use penalab_core::penalized_mc::MartingaleKind;
use penalab_core::{DensitySpec, RectEvent};

fn num(s: &str) -> Result<f64> {
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => s.parse().with_context(|| format!("not a number: {s:?}")),
    }
}

fn nums(parts: &[&str], want: usize, what: &str) -> Result<Vec<f64>> {
    if parts.len() != want {
        bail!("{what} takes {want} parameter(s), got {}", parts.len());
    }
    parts.iter().map(|p| num(p)).collect()
}

/// `uniform:A`, `exponential:RATE` or `table:FILE` (two columns `y,value`).
pub fn density(s: &str) -> Result<DensitySpec> {
    let parts: Vec<&str> = s.split(':').collect();
    Ok(match parts[0] {
        "uniform" => DensitySpec::uniform(nums(&parts[1..], 1, "uniform")?[0])?,
        "exponential" | "exp" => DensitySpec::exponential(nums(&parts[1..], 1, "exponential")?[0])?,
        "table" => {
            let path = parts.get(1).ok_or_else(|| anyhow!("table needs a file name"))?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let (mut ys, mut vs) = (Vec::new(), Vec::new());
            for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
                let Some((y, v)) = line.split_once(',') else { bail!("{path}: expected y,value rows") };
                let (Ok(y), Ok(v)) = (num(y.trim()), num(v.trim())) else { continue };
                ys.push(y);
                vs.push(v);
            }
            DensitySpec::tabulated(ys, vs)?
        }
        other => bail!("unknown density family {other:?}"),
    })
}

/// A rectangle event `u=1,b=0,c=0.5`; `b` and `c` default to `inf`.
pub fn event(s: &str) -> Result<RectEvent> {
    let (mut u, mut b, mut c) = (None, f64::INFINITY, f64::INFINITY);
    for kv in s.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("event fields look like u=1, got {kv:?}"))?;
        match k.trim() {
            "u" => u = Some(num(v.trim())?),
            "b" => b = num(v.trim())?,
            "c" => c = num(v.trim())?,
            k => bail!("unknown event field {k:?}"),
        }
    }
    Ok(RectEvent::new(u.ok_or_else(|| anyhow!("event needs u"))?, b, c)?)
}

/// Penalty used by `converge` and `expansion`.
#[derive(Debug, Clone)]
pub enum Penalty {
    Phi(DensitySpec),
    Kennedy(KennedyProfile),
    Exp { lambda: f64, mu: f64 },
}

fn kennedy(parts: &[&str]) -> Result<KennedyProfile> {
    let p = nums(parts, 2, "kennedy (λ, A)")?;
    Ok(KennedyProfile::indicator(p[1], p[0])?)
}

/// `phi:<density>`, `kennedy:λ:A` (indicator profile on `[0, A]`) or `exp:λ:μ`.
pub fn penalty(s: &str) -> Result<Penalty> {
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    let parts: Vec<&str> = rest.split(':').collect();
    Ok(match head {
        "phi" => Penalty::Phi(density(rest)?),
        "kennedy" => Penalty::Kennedy(kennedy(&parts)?),
        "exp" => {
            let p = nums(&parts, 2, "exp (λ, μ)")?;
            Penalty::Exp { lambda: p[0], mu: p[1] }
        }
        other => bail!("unknown penalty {other:?}"),
    })
}

/// `phi:<density>`, `kennedy:λ:A` or `mu-lambda:λ:μ`.
pub fn martingale(s: &str) -> Result<MartingaleKind> {
    Ok(match penalty(&s.replacen("mu-lambda", "exp", 1))? {
        Penalty::Phi(d) => MartingaleKind::Phi(d),
        Penalty::Kennedy(k) => MartingaleKind::Kennedy(k),
        Penalty::Exp { lambda, mu } => MartingaleKind::MuLambda { lambda, mu },
    })
}

/// Limit law for the `limit` subcommand.
#[derive(Debug, Clone)]
pub enum Law {
    Y(f64),
    Ay(f64, f64),
    Phi(DensitySpec),
    F(BivariatePenalty),
}

/// `y:Y`, `ay:A:Y`, `phi:<density>` or `f:exp:λ:μ`.
pub fn law(s: &str) -> Result<Law> {
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    let parts: Vec<&str> = rest.split(':').collect();
    Ok(match head {
        "y" => Law::Y(nums(&parts, 1, "y")?[0]),
        "ay" => {
            let p = nums(&parts, 2, "ay (a, y)")?;
            Law::Ay(p[0], p[1])
        }
        "phi" => Law::Phi(density(rest)?),
        "f" => match parts.first() {
            Some(&"exp") => {
                let p = nums(&parts[1..], 2, "f:exp (λ, μ)")?;
                Law::F(BivariatePenalty::ExponentialBivariate { lambda: p[0], mu: p[1] })
            }
            _ => bail!("only f:exp:λ:μ is available from the command line"),
        },
        other => bail!("unknown limit law {other:?}"),
    })
}
