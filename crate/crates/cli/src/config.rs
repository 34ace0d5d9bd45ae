//! Flat `key = value` run configuration.

use std::collections::HashSet;
use std::fmt::Write as _;

use helmfield_core::causality::CausalityConfig;
use helmfield_core::maxwell::Check;
use helmfield_core::sources::{SourceModel, Trajectory};
use helmfield_core::{Grid, GridSpec};

use crate::report::num;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Static,
    SwitchOn,
    Oscillating,
}

impl SourceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SourceKind::Static => "static",
            SourceKind::SwitchOn => "switch_on",
            SourceKind::Oscillating => "oscillating",
        }
    }

    fn parse(v: &str) -> Option<Self> {
        [SourceKind::Static, SourceKind::SwitchOn, SourceKind::Oscillating].into_iter().find(|k| k.name() == v)
    }
}

/// Everything a `simulate` or `causality` run needs. Defaults are the acceptance settings
/// of the causality run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub box_len: f64,
    pub dt: f64,
    pub nt: usize,
    pub source: SourceKind,
    pub q: f64,
    pub sigma: f64,
    pub center: [f64; 3],
    pub direction: [f64; 3],
    pub t_on: f64,
    pub ramp: f64,
    pub current: f64,
    pub separation: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub threshold: f64,
    pub instant_threshold: f64,
    pub margin_cells: f64,
    pub speed_band: f64,
    pub ratio_bound: f64,
    pub tol_rohrlich: f64,
    pub tol_split: f64,
    pub tol_identity: f64,
    pub tol_equations: f64,
    /// Write field snapshots every this many levels; 0 writes only the last level.
    pub snapshot_every: usize,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 64,
            box_len: 10.0,
            dt: 0.02,
            nt: 166,
            source: SourceKind::SwitchOn,
            q: 1.0,
            sigma: 0.4,
            center: [5.0; 3],
            direction: [0.0, 0.0, 1.0],
            t_on: 0.1,
            ramp: 0.1,
            current: 1.0,
            separation: 0.8,
            amplitude: 0.2,
            omega: 1.0,
            threshold: 1e-6,
            instant_threshold: 1e-9,
            margin_cells: 2.0,
            speed_band: 0.05,
            ratio_bound: 1e-3,
            tol_rohrlich: 1e-6,
            tol_split: 1e-6,
            tol_identity: 1e-8,
            tol_equations: 1e-5,
            snapshot_every: 0,
            out_dir: "out".into(),
        }
    }
}

fn triple(v: [f64; 3]) -> String {
    format!("{},{},{}", num(v[0]), num(v[1]), num(v[2]))
}

fn bad(line: usize, key: &str, value: &str, what: &str) -> CliError {
    CliError::Config(format!("line {line}: {key} = {value}: {what}"))
}

impl RunConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec::cubic(self.n, self.box_len, self.dt, self.nt)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(self.spec())?)
    }

    pub fn model(&self) -> SourceModel {
        let trajectory = match self.source {
            SourceKind::Static => Trajectory::Static,
            SourceKind::SwitchOn => Trajectory::SwitchOnCurrent {
                direction: self.direction,
                t_on: self.t_on,
                ramp: self.ramp,
                current: self.current,
                separation: self.separation,
            },
            SourceKind::Oscillating => {
                Trajectory::Oscillating { direction: self.direction, amplitude: self.amplitude, omega: self.omega }
            }
        };
        SourceModel { q: self.q, sigma: self.sigma, center: self.center, trajectory }
    }

    pub fn causality(&self) -> CausalityConfig {
        CausalityConfig {
            threshold: self.threshold,
            instant_threshold: self.instant_threshold,
            margin_cells: self.margin_cells,
        }
    }

    /// Bound applied to a residual check.
    pub fn tolerance(&self, check: Check) -> f64 {
        match check {
            Check::RohrlichEquality => self.tol_rohrlich,
            Check::Split22 | Check::HerasParGap => self.tol_split,
            Check::Perp36VsComplement | Check::TauPar26 => self.tol_identity,
            _ => self.tol_equations,
        }
    }

    /// Levels whose fields are written by `simulate`.
    pub fn snapshot_levels(&self) -> Vec<usize> {
        let last = self.nt.saturating_sub(1);
        let mut levels: Vec<usize> =
            if self.snapshot_every == 0 { vec![] } else { (0..self.nt).step_by(self.snapshot_every).collect() };
        if levels.last() != Some(&last) {
            levels.push(last);
        }
        levels
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let grid = self.grid()?;
        self.model().validate(&grid, self.dt)?;
        let positive = [
            ("threshold", self.threshold),
            ("instant_threshold", self.instant_threshold),
            ("speed_band", self.speed_band),
            ("ratio_bound", self.ratio_bound),
            ("tol_rohrlich", self.tol_rohrlich),
            ("tol_split", self.tol_split),
            ("tol_identity", self.tol_identity),
            ("tol_equations", self.tol_equations),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{k} = {v} must be positive")));
            }
        }
        if !(self.margin_cells >= 0.0 && self.margin_cells.is_finite()) {
            return Err(CliError::Config(format!("margin_cells = {} must be non-negative", self.margin_cells)));
        }
        if self.out_dir.is_empty() {
            return Err(CliError::Config("out_dir is empty".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("string write");
        kv("n", self.n.to_string());
        kv("box_len", num(self.box_len));
        kv("dt", num(self.dt));
        kv("nt", self.nt.to_string());
        kv("source", self.source.name().into());
        kv("q", num(self.q));
        kv("sigma", num(self.sigma));
        kv("center", triple(self.center));
        kv("direction", triple(self.direction));
        kv("t_on", num(self.t_on));
        kv("ramp", num(self.ramp));
        kv("current", num(self.current));
        kv("separation", num(self.separation));
        kv("amplitude", num(self.amplitude));
        kv("omega", num(self.omega));
        kv("threshold", num(self.threshold));
        kv("instant_threshold", num(self.instant_threshold));
        kv("margin_cells", num(self.margin_cells));
        kv("speed_band", num(self.speed_band));
        kv("ratio_bound", num(self.ratio_bound));
        kv("tol_rohrlich", num(self.tol_rohrlich));
        kv("tol_split", num(self.tol_split));
        kv("tol_identity", num(self.tol_identity));
        kv("tol_equations", num(self.tol_equations));
        kv("snapshot_every", self.snapshot_every.to_string());
        kv("out_dir", self.out_dir.clone());
        s
    }

    /// Parses without checking physical preconditions.
    pub fn parse_unchecked(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        let mut center_given = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Config(format!("line {line}: expected key = value, found {content:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {line}: duplicate key {key}")));
            }
            let real = || value.parse::<f64>().map_err(|_| bad(line, key, value, "not a number"));
            let count = || value.parse::<usize>().map_err(|_| bad(line, key, value, "not a non-negative integer"));
            let vector = || -> Result<[f64; 3], CliError> {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(bad(line, key, value, "expected three comma-separated numbers"));
                }
                let mut out = [0.0; 3];
                for (o, p) in out.iter_mut().zip(parts) {
                    *o = p.parse().map_err(|_| bad(line, key, value, "not a number"))?;
                }
                Ok(out)
            };
            match key {
                "n" => cfg.n = count()?,
                "box_len" => cfg.box_len = real()?,
                "dt" => cfg.dt = real()?,
                "nt" => cfg.nt = count()?,
                "source" => {
                    cfg.source = SourceKind::parse(value)
                        .ok_or_else(|| bad(line, key, value, "expected static, switch_on or oscillating"))?
                }
                "q" => cfg.q = real()?,
                "sigma" => cfg.sigma = real()?,
                "center" => {
                    cfg.center = vector()?;
                    center_given = true;
                }
                "direction" => cfg.direction = vector()?,
                "t_on" => cfg.t_on = real()?,
                "ramp" => cfg.ramp = real()?,
                "current" => cfg.current = real()?,
                "separation" => cfg.separation = real()?,
                "amplitude" => cfg.amplitude = real()?,
                "omega" => cfg.omega = real()?,
                "threshold" => cfg.threshold = real()?,
                "instant_threshold" => cfg.instant_threshold = real()?,
                "margin_cells" => cfg.margin_cells = real()?,
                "speed_band" => cfg.speed_band = real()?,
                "ratio_bound" => cfg.ratio_bound = real()?,
                "tol_rohrlich" => cfg.tol_rohrlich = real()?,
                "tol_split" => cfg.tol_split = real()?,
                "tol_identity" => cfg.tol_identity = real()?,
                "tol_equations" => cfg.tol_equations = real()?,
                "snapshot_every" => cfg.snapshot_every = count()?,
                "out_dir" => cfg.out_dir = value.to_string(),
                _ => return Err(CliError::Config(format!("line {line}: unknown key {key}"))),
            }
        }
        if !center_given {
            cfg.center = [0.5 * cfg.box_len; 3];
        }
        Ok(cfg)
    }

    /// Parses and checks every physical precondition.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg = Self::parse_unchecked(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let text = cfg.to_text();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn comments_and_center_default() {
        let cfg =
            RunConfig::parse("# header\nn = 32 # cells\nbox_len = 16\nsigma = 1\ndt = 0.1\nnt = 3\nsource = static\n")
                .unwrap();
        assert_eq!(cfg.center, [8.0; 3]);
        assert_eq!(cfg.source, SourceKind::Static);
    }

    #[test]
    fn rejects_bad_lines() {
        for text in ["n = x", "n = 64\nn = 64", "bogus = 1", "no equals sign", "center = 1,2", "source = moving"] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn rejects_unphysical_settings() {
        assert!(RunConfig::parse("n = 63").is_err());
        assert!(RunConfig::parse("dt = 0.5").is_err());
        assert!(RunConfig::parse("ramp = 0.01").is_err());
        assert!(RunConfig::parse("threshold = 0").is_err());
    }

    #[test]
    fn snapshot_levels_end_at_last() {
        let mut cfg = RunConfig { nt: 10, ..RunConfig::default() };
        assert_eq!(cfg.snapshot_levels(), vec![9]);
        cfg.snapshot_every = 4;
        assert_eq!(cfg.snapshot_levels(), vec![0, 4, 8, 9]);
    }
}
