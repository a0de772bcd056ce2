use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use umbilic::continuation::TrackConfig;
use umbilic::family::{elliptic_umbilic, perturb, symmetric_umbilic, GeneratingFunction, Perturbation, SolverConfig};
use umbilic::strata::build::StrataConfig;
use umbilic::strata::grid::Window;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError { code: 2, message: msg.into() }
    }

    pub fn verify(msg: impl Into<String>) -> Self {
        CliError { code: 1, message: msg.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<umbilic::error::Error> for CliError {
    fn from(e: umbilic::error::Error) -> Self {
        let code = match e {
            umbilic::error::Error::Config(_) => 2,
            _ => 3,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(format!("i/o: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `y1^3/3 - y1 y2^2`, threefold symmetric.
    Umbilic,
    /// `y1^3/3 - 2 y1 y2^2`.
    UmbilicCoefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Bisection tolerance on wall points.
    pub wall: f64,
    /// Sheet continuation tolerance.
    pub sheet: f64,
    pub newton: f64,
    /// Fibres with a smaller `|det Hess|` count as degenerate.
    pub degenerate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            wall: 1e-6,
            sheet: 1e-6,
            newton: 1e-12,
            degenerate: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Preset,
    /// JSON monomial list; replaces the preset when set.
    pub function: Option<PathBuf>,
    pub perturbation: Perturbation,
    /// Half width of the square window.
    pub window: f64,
    /// Angular resolution of the wall scan.
    pub grid: usize,
    pub tol: Tolerances,
    pub out: PathBuf,
    /// Empty means the command's defaults.
    pub formats: Vec<Format>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: Preset::Umbilic,
            function: None,
            perturbation: Perturbation::radial(0.1),
            window: 1.0,
            grid: 240,
            tol: Tolerances::default(),
            out: PathBuf::from("."),
            formats: Vec::new(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    /// Generating function as a JSON monomial list.
    #[arg(long, global = true)]
    pub function: Option<PathBuf>,
    /// Radial perturbation strength.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Half width of the square window [-w, w]^2.
    #[arg(long, global = true)]
    pub window: Option<f64>,
    /// Angular resolution of the wall scan (default 240).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long = "tol-wall", global = true)]
    pub tol_wall: Option<f64>,
    #[arg(long = "tol-sheet", global = true)]
    pub tol_sheet: Option<f64>,
    #[arg(long = "tol-newton", global = true)]
    pub tol_newton: Option<f64>,
    #[arg(long = "tol-degenerate", global = true)]
    pub tol_degenerate: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(args: &CommonArgs) -> CliResult<Self> {
        let mut cfg = match &args.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = args.preset {
            cfg.preset = p;
            cfg.function = None;
        }
        if let Some(f) = &args.function {
            cfg.function = Some(f.clone());
        }
        if let Some(e) = args.eps {
            cfg.perturbation.eps = e;
        }
        if let Some(w) = args.window {
            cfg.window = w;
        }
        if let Some(g) = args.grid {
            cfg.grid = g;
        }
        if let Some(t) = args.tol_wall {
            cfg.tol.wall = t;
        }
        if let Some(t) = args.tol_sheet {
            cfg.tol.sheet = t;
        }
        if let Some(t) = args.tol_newton {
            cfg.tol.newton = t;
        }
        if let Some(t) = args.tol_degenerate {
            cfg.tol.degenerate = t;
        }
        if let Some(o) = &args.out {
            cfg.out = o.clone();
        }
        if !args.format.is_empty() {
            cfg.formats = args.format.clone();
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let t = &self.tol;
        for (name, v) in [("wall", t.wall), ("sheet", t.sheet), ("newton", t.newton), ("degenerate", t.degenerate)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if !(self.window.is_finite() && self.window > 0.0) {
            return Err(CliError::config(format!("window must be positive, got {}", self.window)));
        }
        if self.grid < 16 {
            return Err(CliError::config(format!("grid must be at least 16, got {}", self.grid)));
        }
        if !self.perturbation.eps.is_finite() {
            return Err(CliError::config("eps must be finite"));
        }
        Ok(())
    }

    pub fn formats_or(&self, defaults: &[Format]) -> Vec<Format> {
        if self.formats.is_empty() {
            defaults.to_vec()
        } else {
            self.formats.clone()
        }
    }

    pub fn generating_function(&self) -> CliResult<GeneratingFunction> {
        let base = match &self.function {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
                GeneratingFunction::from_json(&text).map_err(|e| CliError::config(e.to_string()))?
            }
            None => match self.preset {
                Preset::Umbilic => symmetric_umbilic(),
                Preset::UmbilicCoefficient => elliptic_umbilic(),
            },
        };
        perturb(&base, &self.perturbation).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            newton_tol: self.tol.newton,
            degenerate_det: self.tol.degenerate,
            ..SolverConfig::default()
        }
    }

    pub fn track(&self) -> TrackConfig {
        TrackConfig { solver: self.solver(), ..TrackConfig::default() }
    }

    pub fn window(&self) -> Window {
        Window::square(self.window)
    }

    pub fn strata(&self) -> StrataConfig {
        let mut s = StrataConfig {
            window: self.window(),
            track: self.track(),
            ..StrataConfig::default()
        };
        s.grid.angles = self.grid;
        // caustic steps follow the grid so that --grid refines both
        let step = 0.48 / self.grid as f64;
        s.caustic.max_step = step;
        s.caustic.image_step = step;
        s.walls.tol = self.tol.wall;
        s.walls.solver = self.solver();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        std::fs::write(&p, r#"{"window": 2.0, "grid": 120, "perturbation": {"eps": 0.05}}"#).unwrap();
        let args = CommonArgs {
            config: Some(p),
            grid: Some(300),
            ..CommonArgs::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.window, 2.0);
        assert_eq!(cfg.grid, 300);
        assert_eq!(cfg.perturbation.eps, 0.05);
    }

    #[test]
    fn nonpositive_tolerance_is_a_config_error() {
        let args = CommonArgs { tol_wall: Some(0.0), ..CommonArgs::default() };
        assert_eq!(RunConfig::resolve(&args).unwrap_err().code, 2);
    }

    #[test]
    fn default_strata_config_is_the_library_default() {
        let s = RunConfig::default().strata();
        assert_eq!(s, StrataConfig::default());
    }
}
