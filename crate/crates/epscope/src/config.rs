//! Run configuration: a flat block/key-value text format.
//!
//! ```text
//! # two-level example
//! [level]
//! intercept = 1.0
//! slope = -0.5
//! gamma_half = 1.0
//!
//! [level]
//! intercept = 0.0
//! slope = 1.0
//! gamma_half = 1.1
//!
//! [coupling]
//! omega_1_2 = 0.05
//!
//! [grid]
//! a_min = 0.6
//! a_max = 0.74
//! steps = 211
//!
//! [output]
//! csv = out.csv
//! ```
//!
//! Blocks: repeated `[level]` (in order), one `[coupling]` with
//! `omega_<i>_<j>` keys (1-based, i < j, unspecified entries are zero), one
//! `[grid]`, optional `[output]`. Unknown blocks and keys are rejected.
//! Widths are given as `gamma_half` to match the usual caption convention;
//! they are doubled into full widths internally. Comments start with `#`.

use std::path::PathBuf;

use thiserror::Error;

use crate::model::{EnergyLaw, LevelSpec, ModelError, ModelSpec};
use crate::sweep::{SweepError, SweepGrid};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown block '[{name}]'")]
    UnknownBlock { line: usize, name: String },
    #[error("line {line}: unknown key '{key}' in block [{block}]")]
    UnknownKey {
        line: usize,
        block: String,
        key: String,
    },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: key '{key}' outside any block")]
    KeyOutsideBlock { line: usize, key: String },
    #[error("line {line}: invalid number '{value}' for '{key}'")]
    BadNumber {
        line: usize,
        key: String,
        value: String,
    },
    #[error("line {line}: coupling index out of range in '{key}' ({n} levels)")]
    CouplingIndex { line: usize, key: String, n: usize },
    #[error("missing required key '{key}' in block [{block}]")]
    MissingKey { block: String, key: String },
    #[error("missing [{0}] block")]
    MissingBlock(&'static str),
    #[error("duplicate [{0}] block")]
    DuplicateBlock(&'static str),
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("invalid grid: {0}")]
    Grid(SweepError),
    #[error("steps must be a positive integer, got '{0}'")]
    BadSteps(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub tolerance: Option<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            csv: None,
            svg: None,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub grid: SweepGrid,
    pub output: OutputConfig,
}

struct RawLevel {
    intercept: Option<f64>,
    slope: Option<f64>,
    gamma_half: f64,
    line: usize,
}

/// Parse a configuration from text. Must never panic, whatever the input.
pub fn parse_str(text: &str) -> Result<RunConfig, ConfigError> {
    enum Block {
        None,
        Level,
        Coupling,
        Grid,
        Output,
    }

    let mut levels: Vec<RawLevel> = Vec::new();
    let mut couplings: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen_coupling_keys: Vec<String> = Vec::new();
    let mut grid: Option<(Option<f64>, Option<f64>, Option<usize>, bool, f64)> = None;
    let mut output: Option<OutputConfig> = None;
    let mut block = Block::None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
        {
            block = match name.trim() {
                "level" => {
                    levels.push(RawLevel {
                        intercept: None,
                        slope: None,
                        gamma_half: 0.0,
                        line,
                    });
                    Block::Level
                }
                "coupling" => Block::Coupling,
                "grid" => {
                    if grid.is_some() {
                        return Err(ConfigError::DuplicateBlock("grid"));
                    }
                    grid = Some((None, None, None, true, 1e-9));
                    Block::Grid
                }
                "output" => {
                    if output.is_some() {
                        return Err(ConfigError::DuplicateBlock("output"));
                    }
                    output = Some(OutputConfig::default());
                    Block::Output
                }
                other => {
                    return Err(ConfigError::UnknownBlock {
                        line,
                        name: other.to_string(),
                    })
                }
            };
            continue;
        }
        let (key, value) = match content.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => {
                return Err(ConfigError::Syntax {
                    line,
                    text: content.to_string(),
                })
            }
        };
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        }
        let num = |key: &str, value: &str| -> Result<f64, ConfigError> {
            value.parse::<f64>().map_err(|_| ConfigError::BadNumber {
                line,
                key: key.to_string(),
                value: value.to_string(),
            })
        };
        match block {
            Block::None => {
                return Err(ConfigError::KeyOutsideBlock {
                    line,
                    key: key.to_string(),
                })
            }
            Block::Level => {
                let lv = levels.last_mut().expect("entered via [level]");
                match key {
                    "intercept" => set_once(&mut lv.intercept, num(key, value)?, line, key)?,
                    "slope" => set_once(&mut lv.slope, num(key, value)?, line, key)?,
                    "gamma_half" => lv.gamma_half = num(key, value)?,
                    _ => {
                        return Err(ConfigError::UnknownKey {
                            line,
                            block: "level".into(),
                            key: key.to_string(),
                        })
                    }
                }
            }
            Block::Coupling => {
                let (i, j) = parse_omega_key(key).ok_or_else(|| ConfigError::UnknownKey {
                    line,
                    block: "coupling".into(),
                    key: key.to_string(),
                })?;
                if seen_coupling_keys.iter().any(|k| k == key) {
                    return Err(ConfigError::DuplicateKey {
                        line,
                        key: key.to_string(),
                    });
                }
                seen_coupling_keys.push(key.to_string());
                couplings.push((i, j, num(key, value)?));
            }
            Block::Grid => {
                let g = grid.as_mut().expect("entered via [grid]");
                match key {
                    "a_min" => set_once(&mut g.0, num(key, value)?, line, key)?,
                    "a_max" => set_once(&mut g.1, num(key, value)?, line, key)?,
                    "steps" => {
                        let s: usize = value
                            .parse()
                            .map_err(|_| ConfigError::BadSteps(value.to_string()))?;
                        set_once(&mut g.2, s, line, key)?;
                    }
                    "adaptive" => {
                        g.3 = match value {
                            "true" => true,
                            "false" => false,
                            _ => {
                                return Err(ConfigError::BadNumber {
                                    line,
                                    key: key.to_string(),
                                    value: value.to_string(),
                                })
                            }
                        }
                    }
                    "min_step" => g.4 = num(key, value)?,
                    _ => {
                        return Err(ConfigError::UnknownKey {
                            line,
                            block: "grid".into(),
                            key: key.to_string(),
                        })
                    }
                }
            }
            Block::Output => {
                let o = output.as_mut().expect("entered via [output]");
                match key {
                    "csv" => o.csv = Some(PathBuf::from(value)),
                    "svg" => o.svg = Some(PathBuf::from(value)),
                    "tolerance" => o.tolerance = Some(num(key, value)?),
                    _ => {
                        return Err(ConfigError::UnknownKey {
                            line,
                            block: "output".into(),
                            key: key.to_string(),
                        })
                    }
                }
            }
        }
    }

    if levels.is_empty() {
        return Err(ConfigError::MissingBlock("level"));
    }
    let n = levels.len();
    let mut specs = Vec::with_capacity(n);
    for lv in &levels {
        let intercept = lv.intercept.ok_or(ConfigError::MissingKey {
            block: format!("level (line {})", lv.line),
            key: "intercept".into(),
        })?;
        let slope = lv.slope.ok_or(ConfigError::MissingKey {
            block: format!("level (line {})", lv.line),
            key: "slope".into(),
        })?;
        specs.push(LevelSpec::new(
            EnergyLaw::new(intercept, slope),
            2.0 * lv.gamma_half,
        ));
    }
    let mut coupling = vec![vec![0.0; n]; n];
    for &(i, j, w) in &couplings {
        if i == 0 || j == 0 || i > n || j > n || i == j {
            return Err(ConfigError::CouplingIndex {
                line: 0,
                key: format!("omega_{i}_{j}"),
                n,
            });
        }
        coupling[i - 1][j - 1] = w;
        coupling[j - 1][i - 1] = w;
    }
    let model = ModelSpec::new(specs, coupling)?;

    let g = grid.ok_or(ConfigError::MissingBlock("grid"))?;
    let a_min = g.0.ok_or(ConfigError::MissingKey {
        block: "grid".into(),
        key: "a_min".into(),
    })?;
    let a_max = g.1.ok_or(ConfigError::MissingKey {
        block: "grid".into(),
        key: "a_max".into(),
    })?;
    let steps = g.2.ok_or(ConfigError::MissingKey {
        block: "grid".into(),
        key: "steps".into(),
    })?;
    let mut sweep_grid = SweepGrid::new(a_min, a_max, steps).map_err(ConfigError::Grid)?;
    sweep_grid.adaptive = g.3;
    sweep_grid.min_step = g.4;

    Ok(RunConfig {
        model,
        grid: sweep_grid,
        output: output.unwrap_or_default(),
    })
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, key: &str) -> Result<(), ConfigError> {
    if slot.is_some() {
        return Err(ConfigError::DuplicateKey {
            line,
            key: key.to_string(),
        });
    }
    *slot = Some(value);
    Ok(())
}

fn parse_omega_key(key: &str) -> Option<(usize, usize)> {
    let rest = key.strip_prefix("omega_")?;
    let (i, j) = rest.split_once('_')?;
    let i: usize = i.parse().ok()?;
    let j: usize = j.parse().ok()?;
    Some((i, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
# two-level double-pole model
[level]
intercept = 1.0
slope = -0.5
gamma_half = 1.0

[level]
intercept = 0.0
slope = 1.0
gamma_half = 1.1

[coupling]
omega_1_2 = 0.05

[grid]
a_min = 0.6
a_max = 0.74
steps = 211

[output]
csv = out.csv
tolerance = 1e-8
";

    #[test]
    fn parses_two_level_config() {
        let cfg = parse_str(GOOD).unwrap();
        assert_eq!(cfg.model.n(), 2);
        assert_eq!(cfg.model.levels()[0].gamma, 2.0);
        assert_eq!(cfg.model.levels()[1].gamma, 2.2);
        assert_eq!(cfg.model.omega(0, 1), 0.05);
        assert_eq!(cfg.grid.steps, 211);
        assert_eq!(cfg.output.csv.as_deref().unwrap().to_str(), Some("out.csv"));
        assert_eq!(cfg.output.tolerance, Some(1e-8));
    }

    #[test]
    fn rejects_unknown_key() {
        let bad = GOOD.replace("slope", "slopp");
        let err = parse_str(&bad).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { .. }), "{err}");
    }

    #[test]
    fn rejects_steps_below_two() {
        let bad = GOOD.replace("steps = 211", "steps = 1");
        let err = parse_str(&bad).unwrap_err();
        assert!(format!("{err}").contains("steps"), "{err}");
    }

    #[test]
    fn rejects_negative_width() {
        let bad = GOOD.replace("gamma_half = 1.1", "gamma_half = -0.2");
        let err = parse_str(&bad).unwrap_err();
        assert!(matches!(err, ConfigError::Model(_)), "{err}");
    }

    #[test]
    fn rejects_coupling_index_out_of_range() {
        let bad = GOOD.replace("omega_1_2", "omega_1_3");
        let err = parse_str(&bad).unwrap_err();
        assert!(matches!(err, ConfigError::CouplingIndex { .. }), "{err}");
    }

    #[test]
    fn rejects_missing_grid() {
        let bad: String = GOOD
            .lines()
            .take_while(|l| !l.starts_with("[grid]"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(parse_str(&bad).unwrap_err(), ConfigError::MissingBlock("grid"));
    }

    #[test]
    fn garbage_lines_are_syntax_errors() {
        for junk in ["[grid]\nwhat is this", "[]", "[level]\n= 3", "[level]\nx ="] {
            assert!(parse_str(junk).is_err(), "accepted {junk:?}");
        }
    }
}
