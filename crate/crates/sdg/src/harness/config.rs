//! Plain-text run configuration: `key = value` entries grouped in
//! `[section]` headers.

use crate::error::{Result, SdgError};
use crate::mesh::MeshKind;
use crate::solver::{InitialGuess, NonlinearScheme, PicardSettings};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case_id: u32,
    pub kind_s: MeshKind,
    pub kind_d: MeshKind,
    /// Primal cells along the interface per level, strictly increasing.
    pub levels: Vec<usize>,
    pub degree: usize,
    pub distortion: f64,
    pub seed: u64,
    /// Offset the Darcy grid by one cell along the interface so the two
    /// interface partitions never align.
    pub nonmatching: bool,
    pub picard: PicardSettings,
    pub g_override: Option<f64>,
    pub out_dir: Option<PathBuf>,
    /// Report wall time in the CSV; disable for byte-reproducible output.
    pub timing: bool,
    /// Solve the refinement levels concurrently (one thread per level).
    pub parallel_levels: bool,
    pub emit_vtk: bool,
    /// Acceptance windows for fitted rates (min, max); checked when present.
    pub expect_l2: Option<(f64, f64)>,
    pub expect_energy: Option<(f64, f64)>,
    pub expect_super: Option<(f64, f64)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case_id: 1,
            kind_s: MeshKind::Triangular,
            kind_d: MeshKind::Triangular,
            levels: vec![4, 8, 16, 32],
            degree: 1,
            distortion: 0.0,
            seed: 0,
            nonmatching: false,
            picard: PicardSettings::default(),
            g_override: None,
            out_dir: None,
            timing: true,
            parallel_levels: false,
            emit_vtk: false,
            expect_l2: None,
            expect_energy: None,
            expect_super: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(SdgError::Config("at least one level required".into()));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SdgError::Config("levels must be strictly increasing".into()));
        }
        if !(1..=3).contains(&self.degree) {
            return Err(SdgError::Config(format!("degree {} outside 1..=3", self.degree)));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        let mut entries: BTreeMap<(String, String), String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(SdgError::Config(format!("line {}: expected key = value", lineno + 1)));
            };
            entries.insert(
                (section.clone(), key.trim().to_string()),
                value.trim().to_string(),
            );
        }

        let get = |sec: &str, key: &str| entries.get(&(sec.to_string(), key.to_string()));
        let parse_f64 = |sec: &str, key: &str, v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| SdgError::Config(format!("[{sec}] {key}: bad number {v}")))
        };

        if let Some(v) = get("case", "id") {
            cfg.case_id = v
                .parse()
                .map_err(|_| SdgError::Config(format!("[case] id: bad value {v}")))?;
        }
        if let Some(v) = get("mesh", "kind") {
            let kind = MeshKind::parse(v)
                .ok_or_else(|| SdgError::Config(format!("[mesh] kind: unknown {v}")))?;
            cfg.kind_s = kind.clone();
            cfg.kind_d = kind;
        }
        if let Some(v) = get("mesh", "kind_s") {
            cfg.kind_s = MeshKind::parse(v)
                .ok_or_else(|| SdgError::Config(format!("[mesh] kind_s: unknown {v}")))?;
        }
        if let Some(v) = get("mesh", "kind_d") {
            cfg.kind_d = MeshKind::parse(v)
                .ok_or_else(|| SdgError::Config(format!("[mesh] kind_d: unknown {v}")))?;
        }
        if let Some(v) = get("mesh", "levels") {
            cfg.levels = v
                .split_whitespace()
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| SdgError::Config(format!("[mesh] levels: bad list {v}")))?;
        }
        if let Some(v) = get("mesh", "distortion") {
            cfg.distortion = parse_f64("mesh", "distortion", v)?;
        }
        if let Some(v) = get("mesh", "seed") {
            cfg.seed = v
                .parse()
                .map_err(|_| SdgError::Config(format!("[mesh] seed: bad value {v}")))?;
        }
        if let Some(v) = get("mesh", "nonmatching") {
            cfg.nonmatching = parse_bool("mesh", "nonmatching", v)?;
        }
        if let Some(v) = get("space", "degree") {
            cfg.degree = v
                .parse()
                .map_err(|_| SdgError::Config(format!("[space] degree: bad value {v}")))?;
        }
        if let Some(v) = get("picard", "tol_rel") {
            cfg.picard.tol_rel = parse_f64("picard", "tol_rel", v)?;
        }
        if let Some(v) = get("picard", "tol_res") {
            cfg.picard.tol_res = parse_f64("picard", "tol_res", v)?;
        }
        if let Some(v) = get("picard", "max_iters") {
            cfg.picard.max_iters = v
                .parse()
                .map_err(|_| SdgError::Config(format!("[picard] max_iters: bad value {v}")))?;
        }
        if let Some(v) = get("picard", "damping") {
            cfg.picard.damping = parse_f64("picard", "damping", v)?;
        }
        if let Some(v) = get("picard", "initial_guess") {
            cfg.picard.initial_guess = match v.as_str() {
                "zero" => InitialGuess::Zero,
                "darcy-linear" => InitialGuess::DarcyLinear,
                other => {
                    return Err(SdgError::Config(format!(
                        "[picard] initial_guess: unknown {other}"
                    )))
                }
            };
        }
        if let Some(v) = get("picard", "scheme") {
            cfg.picard.scheme = match v.as_str() {
                "picard" => NonlinearScheme::Picard,
                "newton" => NonlinearScheme::Newton,
                other => return Err(SdgError::Config(format!("[picard] scheme: unknown {other}"))),
            };
        }
        if let Some(v) = get("physics", "G") {
            cfg.g_override = Some(parse_f64("physics", "G", v)?);
        }
        if let Some(v) = get("output", "dir") {
            cfg.out_dir = Some(PathBuf::from(v));
        }
        if let Some(v) = get("output", "timing") {
            cfg.timing = parse_bool("output", "timing", v)?;
        }
        if let Some(v) = get("output", "parallel_levels") {
            cfg.parallel_levels = parse_bool("output", "parallel_levels", v)?;
        }
        if let Some(v) = get("output", "vtk") {
            cfg.emit_vtk = parse_bool("output", "vtk", v)?;
        }
        for (key, slot) in [
            ("rate_l2", &mut cfg.expect_l2),
            ("rate_energy", &mut cfg.expect_energy),
            ("rate_super", &mut cfg.expect_super),
        ] {
            if let Some(v) = get("expect", key) {
                let parts: Vec<&str> = v.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(SdgError::Config(format!("[expect] {key}: need two numbers")));
                }
                *slot = Some((
                    parse_f64("expect", key, parts[0])?,
                    parse_f64("expect", key, parts[1])?,
                ));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<RunConfig> {
        RunConfig::parse(&std::fs::read_to_string(path)?)
    }
}

fn parse_bool(sec: &str, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(SdgError::Config(format!("[{sec}] {key}: bad bool {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let text = "
[case]
id = 3
[mesh]
kind = triangular
levels = 4 8 16
distortion = 0.3
seed = 9
nonmatching = true
[space]
degree = 2
[picard]
tol_rel = 1e-9
max_iters = 30
scheme = picard
[physics]
G = 0.5
[output]
dir = out/test
timing = false
[expect]
rate_l2 = 1.8 2.2
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.case_id, 3);
        assert_eq!(cfg.levels, vec![4, 8, 16]);
        assert_eq!(cfg.degree, 2);
        assert!(cfg.nonmatching);
        assert_eq!(cfg.picard.max_iters, 30);
        assert_eq!(cfg.g_override, Some(0.5));
        assert!(!cfg.timing);
        assert_eq!(cfg.expect_l2, Some((1.8, 2.2)));
    }

    #[test]
    fn decreasing_levels_rejected() {
        assert!(RunConfig::parse("[mesh]\nlevels = 8 4\n").is_err());
    }

    #[test]
    fn bad_degree_rejected() {
        assert!(RunConfig::parse("[space]\ndegree = 4\n").is_err());
    }
}
