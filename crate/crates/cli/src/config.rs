//! Flat key-value run configuration.
//!
//! The format is one `key = value` pair per line, `#` comments, no
//! sections. Every key has a default, so an empty file is a valid
//! configuration; unknown keys are errors. The same parser reads run
//! manifests back, which makes a manifest a reusable configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qsflow_core::coefficients::MaterialCoefficients;
use qsflow_core::dynamics::{FieldMask, InitialKind, InitialSpec};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dimension: usize,
    pub grid_n: usize,
    /// Sobolev order of the diagnostics.
    pub s: usize,
    pub coeffs: MaterialCoefficients,
    /// Fixed step size; absent selects the CFL rule.
    pub dt: Option<f64>,
    pub cfl: f64,
    /// Stability cap for the explicitly-integrated terms.
    pub dt_cap: f64,
    pub t_end: f64,
    /// Mollifier parameter (0 = off).
    pub eps: f64,
    /// Modified-energy weight; absent selects (1/4) min(1, a/J).
    pub eta: Option<f64>,
    pub init_kind: InitialKind,
    pub init_energy: f64,
    pub init_seed: u64,
    pub init_decay: f64,
    pub init_mode: [i64; 3],
    pub init_fields: FieldMask,
    pub out_dir: PathBuf,
    /// Diagnostics cadence: sample every `cadence` steps.
    pub cadence: usize,
    /// Test hook: flips a sign inside the verification suite's
    /// cancellation check, proving the check can fail.
    pub verify_negative_control: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dimension: 2,
            grid_n: 64,
            s: 2,
            coeffs: MaterialCoefficients {
                a: 1.0,
                b: 0.5,
                c: 1.0,
                j: 0.5,
                l: 1.0,
                beta1: 0.1,
                beta4: 2.0,
                beta5: -0.5,
                beta6: 0.5,
                mu1: 1.0,
                mu2: 1.0,
                mu2_tilde: 1.0,
            },
            dt: None,
            cfl: 0.4,
            dt_cap: 0.025,
            t_end: 1.0,
            eps: 0.0,
            eta: None,
            init_kind: InitialKind::RandomSmooth,
            init_energy: 1e-2,
            init_seed: 1,
            init_decay: 2.0,
            init_mode: [1, 0, 0],
            init_fields: FieldMask::default(),
            out_dir: PathBuf::from("out"),
            cadence: 10,
            verify_negative_control: false,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError(format!("key '{key}': expected a number, got '{v}'")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError(format!("key '{key}': expected an integer, got '{v}'")))
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "dimension" => self.dimension = parse_usize(key, v)?,
            "grid_n" => self.grid_n = parse_usize(key, v)?,
            "s" => self.s = parse_usize(key, v)?,
            "a" => self.coeffs.a = parse_f64(key, v)?,
            "b" => self.coeffs.b = parse_f64(key, v)?,
            "c" => self.coeffs.c = parse_f64(key, v)?,
            "J" => self.coeffs.j = parse_f64(key, v)?,
            "L" => self.coeffs.l = parse_f64(key, v)?,
            "beta1" => self.coeffs.beta1 = parse_f64(key, v)?,
            "beta4" => self.coeffs.beta4 = parse_f64(key, v)?,
            "beta5" => self.coeffs.beta5 = parse_f64(key, v)?,
            "beta6" => self.coeffs.beta6 = parse_f64(key, v)?,
            "mu1" => self.coeffs.mu1 = parse_f64(key, v)?,
            "mu2" => self.coeffs.mu2 = parse_f64(key, v)?,
            "mu2_tilde" => self.coeffs.mu2_tilde = parse_f64(key, v)?,
            "dt" => self.dt = Some(parse_f64(key, v)?),
            "cfl" => self.cfl = parse_f64(key, v)?,
            "dt_cap" => self.dt_cap = parse_f64(key, v)?,
            "t_end" => self.t_end = parse_f64(key, v)?,
            "eps" => self.eps = parse_f64(key, v)?,
            "eta" => self.eta = Some(parse_f64(key, v)?),
            "init_kind" => {
                self.init_kind = match v {
                    "random_smooth" => InitialKind::RandomSmooth,
                    "single_mode" => InitialKind::SingleMode,
                    "manufactured" => InitialKind::Manufactured,
                    other => {
                        return Err(ConfigError(format!(
                            "key 'init_kind': unknown kind '{other}' \
                             (random_smooth | single_mode | manufactured)"
                        )))
                    }
                }
            }
            "init_energy" => self.init_energy = parse_f64(key, v)?,
            "init_seed" => {
                self.init_seed = v
                    .parse()
                    .map_err(|_| ConfigError(format!("key 'init_seed': bad integer '{v}'")))?
            }
            "init_decay" => self.init_decay = parse_f64(key, v)?,
            "init_mode" => {
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                if parts.is_empty() || parts.len() > 3 {
                    return Err(ConfigError(format!(
                        "key 'init_mode': expected 1-3 comma-separated integers, got '{v}'"
                    )));
                }
                let mut mode = [0i64; 3];
                for (i, p) in parts.iter().enumerate() {
                    mode[i] = p
                        .parse()
                        .map_err(|_| ConfigError(format!("key 'init_mode': bad integer '{p}'")))?;
                }
                self.init_mode = mode;
            }
            "init_fields" => {
                for ch in v.chars() {
                    if !"uqr".contains(ch) {
                        return Err(ConfigError(format!(
                            "key 'init_fields': expected a subset of \"uqr\", got '{v}'"
                        )));
                    }
                }
                self.init_fields = FieldMask {
                    u: v.contains('u'),
                    q: v.contains('q'),
                    r: v.contains('r'),
                };
            }
            "out_dir" => self.out_dir = PathBuf::from(v),
            "cadence" => self.cadence = parse_usize(key, v)?,
            "verify_negative_control" => {
                self.verify_negative_control = v.parse().map_err(|_| {
                    ConfigError(format!(
                        "key 'verify_negative_control': expected true/false, got '{v}'"
                    ))
                })?
            }
            other => return Err(ConfigError(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Parses a configuration file (line-oriented `key = value`).
    pub fn from_file(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "{}:{}: expected 'key = value', got '{line}'",
                    path.display(),
                    lineno + 1
                )));
            };
            cfg.set(key.trim(), value)?;
        }
        Ok(cfg)
    }

    /// Structural validation (grid, cadence, time window). Coefficient
    /// admissibility is the classifier's job.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(ConfigError(format!(
                "dimension must be 2 or 3 (got {})",
                self.dimension
            )));
        }
        if self.grid_n < 8 || self.grid_n % 2 != 0 {
            return Err(ConfigError(format!(
                "grid_n must be even and >= 8 (got {})",
                self.grid_n
            )));
        }
        if self.cadence == 0 {
            return Err(ConfigError("cadence must be at least 1".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(ConfigError(format!(
                "t_end must be positive (got {})",
                self.t_end
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(ConfigError(format!("dt must be positive (got {dt})")));
            }
        }
        if self.eps < 0.0 {
            return Err(ConfigError(format!(
                "eps must be nonnegative (got {})",
                self.eps
            )));
        }
        Ok(())
    }

    /// Warning when s misses the standing regularity hypothesis
    /// s > d/2 + 1 of the well-posedness theory; the run proceeds since
    /// discrete norms exist for any s >= 0.
    pub fn sobolev_warning(&self) -> Option<String> {
        let threshold = self.dimension as f64 / 2.0 + 1.0;
        if (self.s as f64) <= threshold {
            Some(format!(
                "warning: s = {} does not satisfy s > d/2 + 1 = {}; \
                 diagnostics remain defined but the well-posedness theory \
                 assumes a higher order",
                self.s, threshold
            ))
        } else {
            None
        }
    }

    pub fn eta_value(&self) -> f64 {
        self.eta
            .unwrap_or_else(|| qsflow_core::diagnostics::eta_default(&self.coeffs))
    }

    pub fn initial_spec(&self) -> InitialSpec {
        InitialSpec {
            kind: self.init_kind,
            target_energy: self.init_energy,
            seed: self.init_seed,
            sobolev_order: self.s,
            eps: self.eps,
            decay_width: self.init_decay,
            mode: self.init_mode,
            fields: self.init_fields,
        }
    }

    /// Canonical echo: every key in a fixed order, shortest round-trip
    /// float formatting, directly reloadable by [`RunConfig::from_file`].
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let kind = match self.init_kind {
            InitialKind::RandomSmooth => "random_smooth",
            InitialKind::SingleMode => "single_mode",
            InitialKind::Manufactured => "manufactured",
        };
        let mut fields = String::new();
        if self.init_fields.u {
            fields.push('u');
        }
        if self.init_fields.q {
            fields.push('q');
        }
        if self.init_fields.r {
            fields.push('r');
        }
        let _ = writeln!(s, "dimension = {}", self.dimension);
        let _ = writeln!(s, "grid_n = {}", self.grid_n);
        let _ = writeln!(s, "s = {}", self.s);
        let c = &self.coeffs;
        let _ = writeln!(s, "a = {}", c.a);
        let _ = writeln!(s, "b = {}", c.b);
        let _ = writeln!(s, "c = {}", c.c);
        let _ = writeln!(s, "J = {}", c.j);
        let _ = writeln!(s, "L = {}", c.l);
        let _ = writeln!(s, "beta1 = {}", c.beta1);
        let _ = writeln!(s, "beta4 = {}", c.beta4);
        let _ = writeln!(s, "beta5 = {}", c.beta5);
        let _ = writeln!(s, "beta6 = {}", c.beta6);
        let _ = writeln!(s, "mu1 = {}", c.mu1);
        let _ = writeln!(s, "mu2 = {}", c.mu2);
        let _ = writeln!(s, "mu2_tilde = {}", c.mu2_tilde);
        if let Some(dt) = self.dt {
            let _ = writeln!(s, "dt = {}", dt);
        }
        let _ = writeln!(s, "cfl = {}", self.cfl);
        let _ = writeln!(s, "dt_cap = {}", self.dt_cap);
        let _ = writeln!(s, "t_end = {}", self.t_end);
        let _ = writeln!(s, "eps = {}", self.eps);
        if let Some(eta) = self.eta {
            let _ = writeln!(s, "eta = {}", eta);
        }
        let _ = writeln!(s, "init_kind = {}", kind);
        let _ = writeln!(s, "init_energy = {}", self.init_energy);
        let _ = writeln!(s, "init_seed = {}", self.init_seed);
        let _ = writeln!(s, "init_decay = {}", self.init_decay);
        let _ = writeln!(
            s,
            "init_mode = {},{},{}",
            self.init_mode[0], self.init_mode[1], self.init_mode[2]
        );
        let _ = writeln!(s, "init_fields = {}", fields);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(s, "cadence = {}", self.cadence);
        let _ = writeln!(
            s,
            "verify_negative_control = {}",
            self.verify_negative_control
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set("mu2", "0.7500000000000001").unwrap();
        cfg.set("dt", "0.012499999999999999").unwrap();
        cfg.set("init_fields", "uq").unwrap();
        let dir = std::env::temp_dir().join("qsflow-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("echo.cfg");
        std::fs::write(&path, cfg.echo()).unwrap();
        let back = RunConfig::from_file(&path).unwrap();
        assert_eq!(back.coeffs.mu2, cfg.coeffs.mu2);
        assert_eq!(back.dt, cfg.dt);
        assert_eq!(back.init_fields, cfg.init_fields);
        assert_eq!(back.echo(), cfg.echo());
    }

    #[test]
    fn unknown_key_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("grid", "64").is_err());
        assert!(cfg.set("grid_n", "sixty-four").is_err());
    }

    #[test]
    fn sobolev_warning_threshold() {
        let mut cfg = RunConfig::default();
        cfg.dimension = 2;
        cfg.s = 2;
        assert!(cfg.sobolev_warning().is_some()); // 2 <= 2
        cfg.s = 3;
        assert!(cfg.sobolev_warning().is_none());
    }
}
