use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use morrey_core::constants::DEFAULT_EPS_LADDER;
use morrey_core::{ConstantKind, IntegrationSettings, Mode, NormEvaluator, SearchSettings, SpaceParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeSel {
    Morrey,
    Small,
    Both,
}

impl ModeSel {
    pub fn modes(self) -> Vec<Mode> {
        match self {
            ModeSel::Morrey => vec![Mode::Morrey],
            ModeSel::Small => vec![Mode::SmallMorrey],
            ModeSel::Both => vec![Mode::Morrey, Mode::SmallMorrey],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by every subcommand. Each one overrides the matching field
/// of the `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON file with any of the fields below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Dimension.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeSel>,
    /// Exponent of the generalized constants (repeatable).
    #[arg(long = "s", global = true)]
    pub s: Vec<f64>,
    /// Witness split point for small Morrey spaces (repeatable).
    #[arg(long = "eps", global = true)]
    pub eps: Vec<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub r_max: Option<f64>,
    #[arg(long, global = true)]
    pub d_max: Option<f64>,
    #[arg(long, global = true)]
    pub mc_samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Random pairs per mode.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Piecewise power function, `lo hi coef alpha; ...`.
    #[arg(long, global = true)]
    pub function: Option<String>,
    /// Also evaluate the witness and trivial pairs in `search`.
    #[arg(long, global = true)]
    pub with_witnesses: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Fully resolved run configuration. Output-only settings (`out`, `format`,
/// `threads`) are not echoed into reports so that the report bytes depend
/// only on what was computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub mode: ModeSel,
    pub s: Vec<f64>,
    pub eps: Vec<f64>,
    pub rel_tol: f64,
    pub r_max: Option<f64>,
    pub d_max: Option<f64>,
    pub mc_samples: usize,
    pub seed: u64,
    pub trials: Option<usize>,
    pub function: Option<String>,
    pub with_witnesses: bool,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub format: Format,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let integ = IntegrationSettings::default();
        Self {
            n: 1,
            p: 1.0,
            q: 2.0,
            mode: ModeSel::Morrey,
            s: vec![1.0, 1.5, 2.0, 3.0],
            eps: DEFAULT_EPS_LADDER.to_vec(),
            rel_tol: integ.rel_tol,
            r_max: None,
            d_max: None,
            mc_samples: integ.mc_samples,
            seed: 0,
            trials: None,
            function: None,
            with_witnesses: false,
            out: None,
            format: Format::Json,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// The `--config` file (or defaults) with the flags applied on top.
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut c = match &o.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = o.$field.clone() {
                    c.$field = v;
                }
            )*};
        }
        take!(n, p, q, mode, rel_tol, mc_samples, seed, format);
        macro_rules! take_opt {
            ($($field:ident),*) => {$(
                if o.$field.is_some() {
                    c.$field = o.$field.clone();
                }
            )*};
        }
        take_opt!(r_max, d_max, trials, function, out, threads);
        if !o.s.is_empty() {
            c.s = o.s.clone();
        }
        if !o.eps.is_empty() {
            c.eps = o.eps.clone();
        }
        c.with_witnesses |= o.with_witnesses;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        SpaceParams::morrey(self.n, self.p, self.q)?;
        if self.s.is_empty() {
            bail!("at least one --s value is required");
        }
        for &s in &self.s {
            ConstantKind::GenVnj { s }.validate()?;
        }
        for &e in &self.eps {
            if !(e > 0.0 && e < 1.0) {
                bail!("--eps {e} must lie in (0, 1)");
            }
        }
        self.integration().validate()?;
        if self.threads == Some(0) {
            bail!("--threads must be >= 1");
        }
        Ok(())
    }

    pub fn space(&self, mode: Mode) -> Result<SpaceParams> {
        Ok(SpaceParams::new(self.n, self.p, self.q, mode)?)
    }

    pub fn search(&self) -> SearchSettings {
        SearchSettings {
            r_max: self.r_max,
            d_max: self.d_max,
            ..SearchSettings::default()
        }
    }

    pub fn integration(&self) -> IntegrationSettings {
        IntegrationSettings {
            rel_tol: self.rel_tol,
            mc_samples: self.mc_samples,
            rng_seed: self.seed,
            ..IntegrationSettings::default()
        }
    }

    pub fn evaluator(&self, mode: Mode) -> Result<NormEvaluator> {
        Ok(NormEvaluator::new(self.space(mode)?, self.search(), self.integration()))
    }

    /// `gen_vnj` for every `s`, `mod_vnj`, `gen_mod_vnj` for every `s`, `zbaganu`.
    pub fn kinds(&self) -> Vec<ConstantKind> {
        let mut out: Vec<_> = self.s.iter().map(|&s| ConstantKind::GenVnj { s }).collect();
        out.push(ConstantKind::ModVnj);
        out.extend(self.s.iter().map(|&s| ConstantKind::GenModVnj { s }));
        out.push(ConstantKind::Zbaganu);
        out
    }
}
