//! Run configuration: flat `key = value` text with optional `[section]`
//! headers, plus command-line overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::cases::{CaseOptions, CASE_NAMES};
use crate::flux::FluxKind;
use crate::igr::IgrParams;
use crate::integrate::{default_cfl, Scheme, SchemeConfig};
use crate::lad::LadParams;
use crate::mesh::Grid;
use crate::reconstruct::ReconstructionKind;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("override `{text}`: {msg}")]
    Override { text: String, msg: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

const SECTIONS: [(&str, &[&str]); 4] = [
    ("case", &["case", "m", "ny", "eps", "t_final", "perturb_amp", "perturb_wavenumber", "periods", "amplitude", "wavenumber"]),
    ("scheme", &["scheme", "flux", "recon", "alpha_factor", "alpha", "cfl", "max_sweeps", "rel_tol", "lad_coeff", "lad_passes"]),
    ("output", &["dir", "snapshot_times", "series_stride"]),
    ("study", &["regime", "resolutions", "alphas", "times", "ref_factor"]),
];

fn section_of(key: &str) -> Option<&'static str> {
    SECTIONS.iter().find(|(_, keys)| keys.contains(&key)).map(|(s, _)| *s)
}

/// Convergence-study regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Fixed α, refining the grid.
    FixedAlpha,
    /// Fixed grid, α decreasing; errors against the smallest α.
    AlphaSweep,
    /// α = alpha_factor·Δx² while refining.
    Joint,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::FixedAlpha => "fixed_alpha",
            Regime::AlphaSweep => "alpha_sweep",
            Regime::Joint => "joint",
        })
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed_alpha" => Ok(Regime::FixedAlpha),
            "alpha_sweep" => Ok(Regime::AlphaSweep),
            "joint" => Ok(Regime::Joint),
            other => Err(format!("unknown regime `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSettings {
    pub scheme: Scheme,
    pub flux: Option<FluxKind>,
    pub recon: Option<ReconstructionKind>,
    pub alpha_factor: f64,
    /// Absolute α; takes precedence over `alpha_factor`.
    pub alpha: Option<f64>,
    pub cfl: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub rel_tol: Option<f64>,
    pub lad_coeff: Option<f64>,
    pub lad_passes: Option<usize>,
}

impl Default for SchemeSettings {
    fn default() -> Self {
        SchemeSettings {
            scheme: Scheme::Igr,
            flux: None,
            recon: None,
            alpha_factor: 2.0,
            alpha: None,
            cfl: None,
            max_sweeps: None,
            rel_tol: None,
            lad_coeff: None,
            lad_passes: None,
        }
    }
}

impl SchemeSettings {
    /// Concrete scheme configuration on `grid`.
    pub fn build(&self, grid: &Grid) -> crate::Result<SchemeConfig> {
        let dim = grid.dim();
        let mut cfg = match self.scheme {
            Scheme::Igr => SchemeConfig::igr(grid, self.alpha_factor)?,
            Scheme::Weno5 => SchemeConfig::weno5(dim),
            Scheme::Lad => {
                let d = LadParams::default();
                SchemeConfig::lad(dim, LadParams::new(self.lad_coeff.unwrap_or(d.coeff), self.lad_passes.unwrap_or(d.smoothing_passes))?)
            }
            Scheme::Plain => SchemeConfig::plain(dim),
        };
        if let Some(a) = self.alpha {
            cfg.igr = IgrParams::new(a, cfg.igr.max_sweeps, cfg.igr.rel_tol)?;
        }
        let max_sweeps = self.max_sweeps.unwrap_or(cfg.igr.max_sweeps);
        let rel_tol = self.rel_tol.unwrap_or(cfg.igr.rel_tol);
        cfg.igr = IgrParams::new(cfg.igr.alpha, max_sweeps, rel_tol)?;
        if let Some(f) = self.flux {
            cfg = cfg.with_flux(f);
        }
        if let Some(r) = self.recon {
            cfg = cfg.with_recon(r);
        }
        cfg = cfg.with_cfl(self.cfl.unwrap_or(default_cfl(dim)));
        cfg.validate(dim)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Extra snapshot times; the final time is always written.
    pub snapshot_times: Vec<f64>,
    /// Write every n-th step to the series file; 0 disables it.
    pub series_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("output"), snapshot_times: Vec::new(), series_stride: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub regime: Regime,
    pub resolutions: Vec<usize>,
    pub alphas: Vec<f64>,
    pub times: Vec<f64>,
    /// Reference resolution as a multiple of the finest one.
    pub ref_factor: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: String,
    pub m: usize,
    pub case_options: CaseOptions,
    pub scheme: SchemeSettings,
    pub output: OutputConfig,
    pub study: Option<StudyConfig>,
}

/// Raw key/value pairs, later keys winning.
#[derive(Debug, Default)]
struct Entries {
    values: Vec<(String, String, usize)>,
}

impl Entries {
    fn set(&mut self, key: &str, value: &str, line: usize) {
        self.values.retain(|(k, _, _)| k != key);
        self.values.push((key.to_string(), value.to_string(), line));
    }

    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.values.iter().find(|(k, _, _)| k == key).map(|(_, v, l)| (v.as_str(), *l))
    }
}

/// Parse a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_with_overrides(text, &[])
}

/// Parse a configuration file and apply `key=value` or `section.key=value`
/// overrides on top.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut entries = Entries::default();
    let mut section: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |msg: String| ConfigError::Parse { line, msg };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| err(format!("malformed section header `{content}`")))?.trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(err(format!("unknown section `{name}`")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let home = section_of(key).ok_or_else(|| err(format!("unknown key `{key}`")))?;
        if let Some(s) = &section {
            if s != home {
                return Err(err(format!("key `{key}` belongs in [{home}], not [{s}]")));
            }
        }
        if value.is_empty() {
            return Err(err(format!("key `{key}` has no value")));
        }
        entries.set(key, value, line);
    }
    for text in overrides {
        let oerr = |msg: String| ConfigError::Override { text: text.clone(), msg };
        let (key, value) = text.split_once('=').ok_or_else(|| oerr("expected key=value".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let key = match key.split_once('.') {
            Some((s, k)) => {
                if section_of(k) != Some(s) {
                    return Err(oerr(format!("unknown key `{s}.{k}`")));
                }
                k
            }
            None => key,
        };
        if section_of(key).is_none() {
            return Err(oerr(format!("unknown key `{key}`")));
        }
        // Line 0 marks values from the command line.
        entries.set(key, value, 0);
    }
    build(&entries)
}

fn anchored(line: usize, key: &str, msg: String) -> ConfigError {
    if line == 0 {
        ConfigError::Override { text: key.to_string(), msg }
    } else {
        ConfigError::Parse { line, msg }
    }
}

fn value<T: FromStr>(entries: &Entries, key: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    match entries.get(key) {
        None => Ok(None),
        Some((v, line)) => v.parse::<T>().map(Some).map_err(|e| anchored(line, key, format!("`{key}`: cannot parse `{v}`: {e}"))),
    }
}

fn list<T: FromStr>(entries: &Entries, key: &str) -> Result<Option<Vec<T>>, ConfigError>
where
    T::Err: fmt::Display,
{
    match entries.get(key) {
        None => Ok(None),
        Some((v, line)) => v
            .split(',')
            .map(|s| s.trim().parse::<T>().map_err(|e| anchored(line, key, format!("`{key}`: cannot parse `{}`: {e}", s.trim()))))
            .collect::<Result<Vec<T>, _>>()
            .map(Some),
    }
}

fn build(e: &Entries) -> Result<RunConfig, ConfigError> {
    let invalid = |msg: String| ConfigError::Validation(msg);
    let case: String = value(e, "case")?.ok_or_else(|| invalid("missing key `case`".into()))?;
    if !CASE_NAMES.contains(&case.as_str()) {
        let line = e.get("case").map_or(0, |(_, l)| l);
        return Err(anchored(line, "case", format!("unknown case `{case}`; known: {}", CASE_NAMES.join(", "))));
    }
    let positive = |key: &str, v: Option<f64>| -> Result<Option<f64>, ConfigError> {
        match v {
            Some(x) if !(x > 0.0) || !x.is_finite() => {
                let line = e.get(key).map_or(0, |(_, l)| l);
                Err(anchored(line, key, format!("`{key}` must be positive, got {x}")))
            }
            _ => Ok(v),
        }
    };
    let case_options = CaseOptions {
        eps: value(e, "eps")?,
        t_final: positive("t_final", value(e, "t_final")?)?,
        ny: value(e, "ny")?,
        perturb_amp: value(e, "perturb_amp")?,
        perturb_wavenumber: value(e, "perturb_wavenumber")?,
        periods: positive("periods", value(e, "periods")?)?,
        amplitude: value(e, "amplitude")?,
        wavenumber: value(e, "wavenumber")?,
    };
    let scheme = SchemeSettings {
        scheme: value(e, "scheme")?.unwrap_or(Scheme::Igr),
        flux: value(e, "flux")?,
        recon: value(e, "recon")?,
        alpha_factor: value(e, "alpha_factor")?.unwrap_or(2.0),
        alpha: value(e, "alpha")?,
        cfl: positive("cfl", value(e, "cfl")?)?,
        max_sweeps: value(e, "max_sweeps")?,
        rel_tol: positive("rel_tol", value(e, "rel_tol")?)?,
        lad_coeff: value(e, "lad_coeff")?,
        lad_passes: value(e, "lad_passes")?,
    };
    let output = OutputConfig {
        dir: value::<String>(e, "dir")?.map_or_else(|| OutputConfig::default().dir, PathBuf::from),
        snapshot_times: list(e, "snapshot_times")?.unwrap_or_default(),
        series_stride: value(e, "series_stride")?.unwrap_or(0),
    };
    if output.snapshot_times.iter().any(|t: &f64| !(*t >= 0.0)) {
        return Err(invalid("snapshot times must be >= 0".into()));
    }

    let study = match value::<Regime>(e, "regime")? {
        None => {
            for k in ["resolutions", "alphas", "times", "ref_factor"] {
                if e.get(k).is_some() {
                    return Err(invalid(format!("`{k}` needs a study `regime`")));
                }
            }
            None
        }
        Some(regime) => {
            let resolutions: Vec<usize> = list(e, "resolutions")?.unwrap_or_default();
            let alphas: Vec<f64> = list(e, "alphas")?.unwrap_or_default();
            let times: Vec<f64> = list(e, "times")?.unwrap_or_default();
            let ref_factor = value(e, "ref_factor")?.unwrap_or(4);
            match regime {
                Regime::AlphaSweep => {
                    if alphas.len() < 3 {
                        return Err(invalid("alpha_sweep needs at least 3 values in `alphas`".into()));
                    }
                    if alphas.iter().any(|a| !(*a > 0.0)) {
                        return Err(invalid("`alphas` must be positive".into()));
                    }
                }
                Regime::FixedAlpha | Regime::Joint => {
                    if resolutions.len() < 3 {
                        return Err(invalid(format!("{regime} needs at least 3 `resolutions`")));
                    }
                    if resolutions.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(invalid("`resolutions` must be strictly ascending".into()));
                    }
                    if ref_factor < 2 {
                        return Err(invalid("`ref_factor` must be at least 2".into()));
                    }
                }
            }
            if regime == Regime::FixedAlpha && scheme.alpha.is_none() {
                return Err(invalid("fixed_alpha needs an absolute `alpha`".into()));
            }
            if regime == Regime::Joint && scheme.alpha.is_some() {
                return Err(invalid("joint scales alpha with the grid; use `alpha_factor`, not `alpha`".into()));
            }
            if times.iter().any(|t| !(*t > 0.0)) {
                return Err(invalid("study `times` must be positive".into()));
            }
            Some(StudyConfig { regime, resolutions, alphas, times, ref_factor })
        }
    };

    let m = match (value(e, "m")?, &study) {
        (Some(m), _) => m,
        (None, Some(s)) if !s.resolutions.is_empty() => s.resolutions[s.resolutions.len() - 1],
        _ => return Err(invalid("missing key `m`".into())),
    };
    if m == 0 {
        return Err(invalid("`m` must be positive".into()));
    }
    let cfg = RunConfig { case, m, case_options, scheme, output, study };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Check scheme/case compatibility by building both on the run grid.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let case = crate::cases::build_case(&self.case, self.m, &self.case_options).map_err(|e| ConfigError::Validation(e.to_string()))?;
        self.scheme.build(&case.grid).map_err(|e| ConfigError::Validation(e.to_string()))?;
        Ok(())
    }
}
