//! Experiment configuration in TOML.
//!
//! Every key is optional. Missing keys take per-system defaults, and the
//! resolved configuration is what reports echo.
//!
//! ```toml
//! system = "euler"            # or "em"
//! m = 3
//! ladder = [0.2, 0.1, 0.05, 0.025]
//! t_final = 2.0
//!
//! [grid]
//! d = 1
//! n = 256
//! length = 6.283185307179586
//!
//! [pressure]
//! a = 1.0
//! gamma = 2.0
//!
//! [time]
//! cfl = 0.25
//! scheme = "ars222"           # or "imex_euler"
//! samples = 51
//! layer_points = 20
//! # dt = 1e-4
//!
//! [data]
//! amplitude = 0.05
//! preparation = "ill"         # "well", "expansion"
//! velocity_scaling = "inverse_eps"
//! [data.family]
//! kind = "cosine"
//! modes = [[1, 0, 0]]
//!
//! [output]
//! dir = "out"
//!
//! [[bands]]
//! metric = "sup_rho_Hm1"
//! min = 0.85
//! max = 1.15
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{Family, InitialDataFamily, Preparation, TWO_PI};
use crate::error::{Error, Result};
use crate::euler::PressureLaw;
use crate::spectral::Grid;
use crate::stepping::Scheme;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    #[default]
    Euler,
    Em,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureConfig {
    pub a: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Fixed step; solver defaults when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub cfl: f64,
    pub scheme: Scheme,
    /// Uniform report samples on `[0, T]`.
    pub samples: usize,
    /// Extra samples resolving the `O(ε²)` initial layer.
    pub layer_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: String,
    pub json: String,
    pub plot: String,
}

/// Acceptance band for a fitted slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateBand {
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl RateBand {
    pub fn new(metric: &str, min: Option<f64>, max: Option<f64>) -> Self {
        Self {
            metric: metric.to_string(),
            min,
            max,
        }
    }

    pub fn contains(&self, slope: f64) -> bool {
        slope.is_finite() && self.min.is_none_or(|lo| slope >= lo) && self.max.is_none_or(|hi| slope <= hi)
    }

    pub fn describe(&self) -> String {
        match (self.min, self.max) {
            (Some(lo), Some(hi)) => format!("[{lo}, {hi}]"),
            (Some(lo), None) => format!(">= {lo}"),
            (None, Some(hi)) => format!("<= {hi}"),
            (None, None) => "any".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: System,
    pub m: u32,
    pub ladder: Vec<f64>,
    pub t_final: f64,
    /// Overrides the seed of a random data family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// External magnetic field (Euler–Maxwell only).
    pub b_ext: [f64; 3],
    /// Also solve the first-order Euler–Maxwell corrector.
    pub em_corrector: bool,
    pub grid: GridConfig,
    pub pressure: PressureConfig,
    pub time: TimeConfig,
    pub data: InitialDataFamily,
    pub output: OutputConfig,
    #[serde(default)]
    pub bands: Vec<RateBand>,
}

impl ExperimentConfig {
    /// Defaults for `system`, with the matching acceptance bands.
    pub fn defaults(system: System) -> Self {
        let mut cfg = match system {
            System::Euler => Self {
                system,
                m: 3,
                ladder: vec![0.2, 0.1, 0.05, 0.025],
                t_final: 2.0,
                seed: None,
                b_ext: [0.0, 0.0, 0.0],
                em_corrector: false,
                grid: GridConfig { d: 1, n: 256, length: TWO_PI },
                pressure: PressureConfig { a: 1.0, gamma: 2.0 },
                time: TimeConfig {
                    dt: None,
                    cfl: crate::euler::DEFAULT_CFL,
                    scheme: Scheme::Ars222,
                    samples: 51,
                    layer_points: 20,
                },
                data: InitialDataFamily::default(),
                output: OutputConfig {
                    dir: PathBuf::from("out"),
                    csv: "errors.csv".into(),
                    json: "report.json".into(),
                    plot: "plot_rates.py".into(),
                },
                bands: Vec::new(),
            },
            System::Em => {
                let mut c = Self::defaults(System::Euler);
                c.system = System::Em;
                c.ladder = vec![0.2, 0.1, 0.05];
                c.t_final = 1.0;
                c.b_ext = [0.0, 0.0, 1.0];
                c.grid = GridConfig { d: 3, n: 32, length: TWO_PI };
                c.data.family = Family::Cosine {
                    modes: vec![[1, 0, 0], [0, 2, 1], [1, 1, 3]],
                };
                c
            }
        };
        cfg.bands = cfg.default_bands();
        cfg
    }

    /// Slope bands implied by the system and the data preparation.
    pub fn default_bands(&self) -> Vec<RateBand> {
        let b = RateBand::new;
        match (self.system, self.data.preparation) {
            (System::Em, _) => vec![b("sup_rho_Hm1", Some(0.8), None), b("sup_E_Hm1", Some(0.8), None)],
            (System::Euler, Preparation::Ill) => vec![
                b("sup_rho_Hm1", Some(0.85), Some(1.15)),
                b("l2t_grad_rho_Hm1", Some(0.85), None),
                b("l2t_q_layer_Hm1", Some(0.85), Some(1.15)),
                b("l2t_rho_L2", Some(0.85), Some(1.15)),
            ],
            (System::Euler, Preparation::Well) => vec![
                b("sup_rho_exp_Hm2", Some(1.7), Some(2.3)),
                b("l2t_q_exp_Hm2", Some(1.7), Some(2.3)),
            ],
            (System::Euler, Preparation::Expansion) => vec![
                b("sup_rho_exp_Hm2", Some(1.7), Some(2.3)),
                b("l2t_q_exp_Hm2", Some(1.7), Some(2.3)),
                b("l2t_q_Hm2", Some(0.85), Some(1.15)),
            ],
        }
    }

    pub fn law(&self) -> Result<PressureLaw> {
        PressureLaw::gamma_law(self.pressure.a, self.pressure.gamma)
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.d, self.grid.n, self.grid.length)
    }

    /// Data family with the seed override applied.
    pub fn data_family(&self) -> InitialDataFamily {
        let mut data = self.data.clone();
        if let (Some(seed), Family::Random { seed: s, .. }) = (self.seed, &mut data.family) {
            *s = seed;
        }
        data
    }

    pub fn validate(&self) -> Result<()> {
        let v = |msg: String| Err(Error::Validation(msg));
        if self.system == System::Em && self.grid.d != 3 {
            return v("em requires d=3".into());
        }
        let least = self.grid.d as u32 / 2 + 2;
        if self.m < least {
            return v(format!("m = {} is below [d/2]+2 = {least} for d = {}", self.m, self.grid.d));
        }
        if self.seed.is_some_and(|s| s > i64::MAX as u64) {
            return v(format!("seed must be at most {} to be representable in TOML", i64::MAX));
        }
        for &e in &self.ladder {
            if !(e > 0.0 && e <= 1.0) {
                return v(format!("eps = {e} is outside (0, 1]"));
            }
        }
        if self.ladder.windows(2).any(|w| w[1] >= w[0]) {
            return v("eps ladder must be strictly decreasing".into());
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return v(format!("t_final = {} must be > 0", self.t_final));
        }
        if self.time.samples < 2 {
            return v("time.samples must be >= 2".into());
        }
        if !(self.time.cfl > 0.0 && self.time.cfl.is_finite()) {
            return v(format!("time.cfl = {} must be > 0", self.time.cfl));
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return v(format!("time.dt = {dt} must be > 0"));
            }
        }
        if self.b_ext.iter().any(|b| !b.is_finite()) {
            return v("b_ext must be finite".into());
        }
        if self.system == System::Em && self.data.preparation == Preparation::Expansion {
            return v("em supports preparation = \"ill\" or \"well\"".into());
        }
        if self.em_corrector && self.system != System::Em {
            return v("em_corrector requires system = \"em\"".into());
        }
        for band in &self.bands {
            if let (Some(lo), Some(hi)) = (band.min, band.max) {
                if lo > hi {
                    return v(format!("band for {} has min > max", band.metric));
                }
            }
        }
        self.build_grid().map_err(|e| Error::Validation(e.to_string()))?;
        self.law().map_err(|e| Error::Validation(e.to_string()))?;
        self.data_family()
            .density_perturbation(&self.build_grid()?)
            .map_err(|e| Error::Validation(e.to_string()))?;
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Parse and validate a configuration from TOML text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let user: toml::Table = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        Error::Parse {
            line,
            key: String::new(),
            message: e.message().to_string(),
        }
    })?;
    let system = match user.get("system") {
        None => System::Euler,
        Some(toml::Value::String(s)) if s == "euler" => System::Euler,
        Some(toml::Value::String(s)) if s == "em" => System::Em,
        Some(other) => {
            return Err(Error::Parse {
                line: find_key_line(text, "", "system"),
                key: "system".into(),
                message: format!("expected \"euler\" or \"em\", got {other}"),
            })
        }
    };
    let defaults = ExperimentConfig::defaults(system);
    let mut base = toml::Table::try_from(&defaults).map_err(|e| Error::Serialize(e.to_string()))?;
    base.remove("bands");
    merge(&mut base, &user);
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(toml::Value::Table(base)).map_err(|e| {
        let path = e.path().to_string();
        Error::Parse {
            line: locate(text, &path),
            key: path,
            message: e.into_inner().to_string(),
        }
    })?;
    if !user.contains_key("bands") {
        cfg.bands = cfg.default_bands();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

/// Overlay `user` onto `base`. Tables merge key by key, except a data
/// family, which is replaced whole because its fields depend on its kind.
fn merge(base: &mut toml::Table, user: &toml::Table) {
    for (k, v) in user {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) if k != "family" => merge(b, u),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the key at a serde path such as `grid.n` or `data.family.modes[0]`.
fn locate(text: &str, path: &str) -> usize {
    let clean: String = {
        let mut out = String::new();
        let mut depth = 0;
        for c in path.chars() {
            match c {
                '[' => depth += 1,
                ']' => depth -= 1,
                _ if depth == 0 => out.push(c),
                _ => {}
            }
        }
        out
    };
    let parts: Vec<&str> = clean.split('.').filter(|p| !p.is_empty() && *p != "?").collect();
    match parts.split_last() {
        Some((leaf, section)) => find_key_line(text, &section.join("."), leaf),
        None => 0,
    }
}

fn find_key_line(text: &str, section: &str, leaf: &str) -> usize {
    let mut current = String::new();
    let mut fallback = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if !section.is_empty() && current == format!("{section}.{leaf}") {
                return i + 1;
            }
            continue;
        }
        let Some((key, _)) = line.split_once('=') else {
            continue;
        };
        let key = key.trim();
        let full = if current.is_empty() { key.to_string() } else { format!("{current}.{key}") };
        let want = if section.is_empty() { leaf.to_string() } else { format!("{section}.{leaf}") };
        if full == want {
            return i + 1;
        }
        if fallback == 0 && key == leaf {
            fallback = i + 1;
        }
    }
    fallback
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_euler_config_takes_defaults() {
        let cfg = parse_config_str("system = \"euler\"\n").unwrap();
        assert_eq!(cfg.grid.n, 256);
        assert_eq!(cfg.grid.d, 1);
        assert_eq!(cfg.grid.length, TWO_PI);
        assert_eq!(cfg.m, 3);
        assert_eq!(cfg.ladder, vec![0.2, 0.1, 0.05, 0.025]);
        assert_eq!(cfg.t_final, 2.0);
        assert_eq!(cfg.bands.len(), 4);
    }

    #[test]
    fn empty_text_is_euler() {
        assert_eq!(parse_config_str("").unwrap(), ExperimentConfig::defaults(System::Euler));
    }

    #[test]
    fn em_in_two_dimensions_is_rejected() {
        let err = parse_config_str("system = \"em\"\n[grid]\nd = 2\n").unwrap_err();
        match err {
            Error::Validation(msg) => assert_eq!(msg, "em requires d=3"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        for sys in [System::Euler, System::Em] {
            let mut cfg = ExperimentConfig::defaults(sys);
            cfg.time.dt = Some(1e-4);
            cfg.seed = Some(9);
            let text = cfg.to_toml().unwrap();
            assert_eq!(parse_config_str(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn type_errors_carry_line_and_key() {
        let text = "system = \"euler\"\n\n[grid]\nd = 1\nn = \"many\"\n";
        match parse_config_str(text).unwrap_err() {
            Error::Parse { line, key, .. } => {
                assert_eq!(line, 5);
                assert_eq!(key, "grid.n");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line() {
        match parse_config_str("m = 3\nladder = [0.2,\n\n").unwrap_err() {
            Error::Parse { line, .. } => assert!(line >= 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            parse_config_str("[grid]\nsize = 3\n").unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn invariants_are_enforced() {
        let bad = [
            "m = 1\n",
            "m = 2\n[grid]\nd = 3\nn = 16\n",
            "ladder = [0.1, 0.2, 0.05]\n",
            "ladder = [1.5, 0.1, 0.05]\n",
            "[data]\namplitude = 0.0\n",
            "[grid]\nd = 4\n",
        ];
        for text in bad {
            assert!(parse_config_str(text).is_err(), "{text}");
        }
        assert!(matches!(parse_config_str("m = 1\n"), Err(Error::Validation(_))));
        assert!(parse_config_str("m = 2\n").is_ok());
    }

    #[test]
    fn family_is_replaced_not_merged() {
        let cfg = parse_config_str("[data.family]\nkind = \"bump\"\nwidth = 0.5\nband = 4\n").unwrap();
        assert_eq!(cfg.data.family, Family::Bump { width: 0.5, band: 4 });
    }

    #[test]
    fn expansion_preparation_gets_three_bands() {
        let cfg = parse_config_str("[data]\npreparation = \"expansion\"\n").unwrap();
        assert_eq!(cfg.bands.len(), 3);
        assert_eq!(cfg.bands[2].metric, "l2t_q_Hm2");
    }
}
