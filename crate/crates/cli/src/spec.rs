//! Flag groups shared by several subcommands.

use clap::{Args, ValueEnum};
use coxf_core::codes::{CodeSpec, FamilyParams, DEFAULT_COEFF_SET_SIZE};
use coxf_core::simulator::{StragglerKind, StragglerModel};

use crate::usage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    SDiagonal,
    OneDiagonal,
    PBernoulli,
    Cross,
    Uncoded,
}

/// Code construction flags.
#[derive(Debug, Clone, Args)]
pub struct CodeArgs {
    /// Code family
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Number of data blocks
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of workers [default: n + s when --s is given; n + 1 for one-diagonal; n for uncoded]
    #[arg(long)]
    pub m: Option<usize>,
    /// Stragglers to resist (band width of s-diagonal)
    #[arg(long)]
    pub s: Option<usize>,
    /// Nonzero probability (p-bernoulli)
    #[arg(long)]
    pub p: Option<f64>,
    /// Picks per worker row (cross; fractional allowed)
    #[arg(long)]
    pub d1: Option<f64>,
    /// Picks per block column (cross; fractional allowed)
    #[arg(long)]
    pub d2: Option<f64>,
    /// Coefficients are drawn from {1..SIZE}
    #[arg(long, default_value_t = DEFAULT_COEFF_SET_SIZE)]
    pub coeff_set_size: u64,
}

impl CodeArgs {
    pub fn has_family(&self) -> bool {
        self.family.is_some()
    }

    /// Validated spec for block count `n` (overriding `--n` when given)
    /// and an optional bernoulli probability override.
    pub fn to_spec_with(&self, n: Option<usize>, p: Option<f64>, seed: u64) -> anyhow::Result<CodeSpec> {
        let family = self.family.ok_or_else(|| usage("--family is required"))?;
        let n = n.or(self.n).ok_or_else(|| usage("--n is required"))?;
        let reject = |flag: &str, set: bool| {
            if set {
                Err(usage(format!("{flag} does not apply to the {} family", family_name(family))))
            } else {
                Ok(())
            }
        };
        if family != FamilyArg::PBernoulli {
            reject("--p", self.p.is_some())?;
        }
        if family != FamilyArg::Cross {
            reject("--d1", self.d1.is_some())?;
            reject("--d2", self.d2.is_some())?;
        }
        let m_from_s = self.s.map(|s| n + s);
        let params = match family {
            FamilyArg::SDiagonal => FamilyParams::SDiagonal {
                s: self.s.ok_or_else(|| usage("s-diagonal needs --s"))?,
            },
            FamilyArg::OneDiagonal => FamilyParams::OneDiagonal,
            FamilyArg::Uncoded => FamilyParams::Uncoded,
            FamilyArg::PBernoulli => FamilyParams::PBernoulli {
                p: p.or(self.p).ok_or_else(|| usage("p-bernoulli needs --p"))?,
            },
            FamilyArg::Cross => FamilyParams::Cross {
                d1: self.d1.ok_or_else(|| usage("cross needs --d1"))?,
                d2: self.d2.ok_or_else(|| usage("cross needs --d2"))?,
            },
        };
        let m = match (self.m, family) {
            (Some(m), _) if n != self.n.unwrap_or(n) => {
                // sweeping n: keep the straggler count implied by --n/--m
                n + m.saturating_sub(self.n.unwrap_or(n))
            }
            (Some(m), _) => m,
            (None, FamilyArg::OneDiagonal) => m_from_s.unwrap_or(n + 1),
            (None, FamilyArg::Uncoded) => m_from_s.unwrap_or(n),
            (None, _) => m_from_s.ok_or_else(|| usage("give --m, or --s to use m = n + s"))?,
        };
        let spec = CodeSpec {
            params,
            n,
            m,
            coeff_set_size: self.coeff_set_size,
            seed,
        };
        spec.validate().map_err(|e| usage(e.to_string()))?;
        Ok(spec)
    }

    pub fn to_spec(&self, seed: u64) -> anyhow::Result<CodeSpec> {
        self.to_spec_with(None, None, seed)
    }
}

fn family_name(f: FamilyArg) -> &'static str {
    match f {
        FamilyArg::SDiagonal => "s-diagonal",
        FamilyArg::OneDiagonal => "one-diagonal",
        FamilyArg::PBernoulli => "p-bernoulli",
        FamilyArg::Cross => "cross",
        FamilyArg::Uncoded => "uncoded",
    }
}

/// Straggler model flags.
#[derive(Debug, Clone, Args)]
pub struct StragglerArgs {
    /// none | fixed:W1,W2,.. (1-based, slowed) | random:COUNT (slowed) |
    /// bernoulli:Q (each fails) | delay:P (each slowed)
    #[arg(long, default_value = "none")]
    pub stragglers: String,
    /// Time multiplier for a slowed worker
    #[arg(long, default_value_t = 10.0)]
    pub slow_factor: f64,
    /// Virtual seconds per scalar operation
    #[arg(long, default_value_t = 1e-9)]
    pub base_rate: f64,
}

impl StragglerArgs {
    pub fn model(&self) -> anyhow::Result<StragglerModel> {
        let kind = parse_stragglers(&self.stragglers)?;
        Ok(StragglerModel {
            kind,
            base_rate: self.base_rate,
            slow_factor: self.slow_factor,
            seed: 0,
        })
    }
}

pub fn parse_stragglers(text: &str) -> anyhow::Result<StragglerKind> {
    let bad = || usage(format!("cannot parse --stragglers {text:?}; expected none, fixed:1,2, random:2, bernoulli:0.1 or delay:0.2"));
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    let prob = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    Ok(match kind.trim() {
        "none" if arg.is_empty() => StragglerKind::None,
        "fixed" => {
            let workers = arg
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(w) if w >= 1 => Ok(w - 1),
                    _ => Err(bad()),
                })
                .collect::<anyhow::Result<Vec<usize>>>()?;
            StragglerKind::FixedSet { workers }
        }
        "random" => StragglerKind::RandomSet {
            count: arg.trim().parse().map_err(|_| bad())?,
        },
        "bernoulli" => StragglerKind::Bernoulli { q: prob(arg)? },
        "delay" => StragglerKind::Delay { slow_prob: prob(arg)? },
        _ => return Err(bad()),
    })
}
