//! Canned figure datasets: named model/grid combinations swept and written
//! out as CSV (optionally SVG). The `a` windows are chosen to frame the
//! interesting structure; the captions only pin the model parameters.

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{EnergyLaw, LevelSpec, ModelSpec};
use crate::output::{sweep_csv, sweep_svg};
use crate::sweep::{run_sweep, SweepError, SweepGrid};

#[derive(Debug, Error)]
pub enum FigureError {
    #[error("unknown figure number {0} (expected 1..=6)")]
    UnknownFigure(u8),
    #[error("sweep failed for {name}: {source}")]
    Sweep { name: String, source: SweepError },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Two linearly tuned levels, e1 = 1 - a/2 and e2 = a, widths given as
/// half-widths, one real coupling.
pub fn two_level_model(gamma1_half: f64, gamma2_half: f64, omega: f64) -> ModelSpec {
    ModelSpec::two_level(
        LevelSpec::new(EnergyLaw::new(1.0, -0.5), 2.0 * gamma1_half),
        LevelSpec::new(EnergyLaw::new(0.0, 1.0), 2.0 * gamma2_half),
        omega,
    )
}

/// Four discrete levels (zero width), all pairs coupled with the same omega.
pub fn four_level_model(omega: f64) -> ModelSpec {
    let laws = [
        EnergyLaw::new(1.0, -1.0 / 3.0),
        EnergyLaw::new(1.0, -5.0 / 12.0),
        EnergyLaw::new(1.0, -0.5),
        EnergyLaw::new(0.0, 1.0),
    ];
    let levels = laws.iter().map(|&e| LevelSpec::new(e, 0.0)).collect();
    let mut coupling = vec![vec![0.0; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            if k != l {
                coupling[k][l] = omega;
            }
        }
    }
    ModelSpec::new(levels, coupling).unwrap()
}

/// Selective-coupling variant: levels 1 and 2 are flat and fully decoupled,
/// only levels 3 and 4 interact.
pub fn four_level_selective() -> ModelSpec {
    let laws = [
        EnergyLaw::new(1.0, 0.0),
        EnergyLaw::new(1.2, 0.0),
        EnergyLaw::new(1.0, -0.5),
        EnergyLaw::new(0.0, 1.0),
    ];
    let levels = laws.iter().map(|&e| LevelSpec::new(e, 0.0)).collect();
    let mut coupling = vec![vec![0.0; 4]; 4];
    coupling[2][3] = 0.1;
    coupling[3][2] = 0.1;
    ModelSpec::new(levels, coupling).unwrap()
}

#[derive(Debug, Clone)]
pub struct FigureJob {
    pub name: String,
    pub model: ModelSpec,
    pub grid: SweepGrid,
}

fn grid(a_min: f64, a_max: f64, steps: usize) -> SweepGrid {
    SweepGrid::new(a_min, a_max, steps).expect("static grids are valid")
}

/// The sweeps behind figure `n`. Windows: the close-up around the branch
/// point uses [0.6, 0.74]; full trajectories use [0, 1.4]. The four-level
/// sweeps start at 0.05 because at a = 0 three levels are exactly degenerate
/// and trajectory labels are meaningless there. The 211-point close-up grid
/// places a node at a = 2/3 up to rounding.
pub fn figure_jobs(n: u8) -> Result<Vec<FigureJob>, FigureError> {
    let two = |name: &str, g1h: f64, omega: f64, g: SweepGrid| FigureJob {
        name: name.to_string(),
        model: two_level_model(g1h, 1.1 * g1h, omega),
        grid: g,
    };
    let jobs = match n {
        1 => vec![FigureJob {
            name: "fig1".into(),
            model: two_level_model(1.0, 1.1, 0.05),
            grid: grid(0.6, 0.74, 211),
        }],
        2 | 3 => {
            let g = grid(0.0, 1.4, 281);
            let p = format!("fig{n}");
            vec![
                two(&format!("{p}_top"), 1.10, 0.05, g),
                two(&format!("{p}_middle"), 0.90, 0.05, g),
                two(&format!("{p}_bottom"), 0.0, 0.05, g),
            ]
        }
        4 | 5 => {
            let g = grid(0.6, 0.74, 281);
            let p = format!("fig{n}");
            vec![
                two(&format!("{p}_g1010"), 1.010, 0.05, g),
                two(&format!("{p}_g0990"), 0.990, 0.05, g),
                two(&format!("{p}_g090"), 0.90, 0.05, g),
                two(&format!("{p}_g0"), 0.0, 0.05, g),
            ]
        }
        6 => {
            let g = grid(0.05, 1.4, 271);
            vec![
                FigureJob {
                    name: "fig6_top".into(),
                    model: four_level_model(0.05),
                    grid: g,
                },
                FigureJob {
                    name: "fig6_middle".into(),
                    model: four_level_model(0.1),
                    grid: g,
                },
                FigureJob {
                    name: "fig6_bottom".into(),
                    model: four_level_selective(),
                    grid: g,
                },
            ]
        }
        other => return Err(FigureError::UnknownFigure(other)),
    };
    Ok(jobs)
}

/// Run all sweeps of figure `n` and write `<name>.csv` (and `<name>.svg` if
/// requested) into `dir`. Returns the paths written.
pub fn run_figure(n: u8, dir: &Path, svg: bool) -> Result<Vec<PathBuf>, FigureError> {
    let mut written = Vec::new();
    for job in figure_jobs(n)? {
        let result = run_sweep(&job.model, &job.grid).map_err(|source| FigureError::Sweep {
            name: job.name.clone(),
            source,
        })?;
        let csv_path = dir.join(format!("{}.csv", job.name));
        write_file(&csv_path, &sweep_csv(&result))?;
        written.push(csv_path);
        if svg {
            let svg_path = dir.join(format!("{}.svg", job.name));
            write_file(&svg_path, &sweep_svg(&result, &job.name))?;
            written.push(svg_path);
        }
    }
    Ok(written)
}

fn write_file(path: &Path, content: &str) -> Result<(), FigureError> {
    std::fs::write(path, content).map_err(|source| FigureError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn job_counts_and_names() {
        assert_eq!(figure_jobs(1).unwrap().len(), 1);
        assert_eq!(figure_jobs(2).unwrap().len(), 3);
        assert_eq!(figure_jobs(3).unwrap().len(), 3);
        let f4: Vec<String> = figure_jobs(4).unwrap().into_iter().map(|j| j.name).collect();
        assert_eq!(f4, ["fig4_g1010", "fig4_g0990", "fig4_g090", "fig4_g0"]);
        assert_eq!(figure_jobs(6).unwrap().len(), 3);
        assert!(matches!(figure_jobs(0), Err(FigureError::UnknownFigure(0))));
        assert!(matches!(figure_jobs(7), Err(FigureError::UnknownFigure(7))));
    }

    #[test]
    fn half_width_ratio_is_fixed() {
        for job in figure_jobs(2).unwrap() {
            let levels = job.model.levels();
            assert!((levels[1].gamma - 1.1 * levels[0].gamma).abs() < 1e-15);
        }
    }

    #[test]
    fn close_up_grid_contains_the_coalescence_node() {
        let job = &figure_jobs(1).unwrap()[0];
        let nearest = job
            .grid
            .points()
            .into_iter()
            .map(|a| (a - 2.0 / 3.0).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-15, "nearest node off by {nearest:e}");
    }

    #[test]
    fn writes_files_for_figure_one() {
        let dir = tempfile::tempdir().unwrap();
        let paths = run_figure(1, dir.path(), true).unwrap();
        assert_eq!(paths.len(), 2);
        let csv = std::fs::read_to_string(&paths[0]).unwrap();
        assert!(csv.lines().count() > 211);
        assert!(csv.starts_with("a,E_1"));
    }
}
