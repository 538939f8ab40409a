//! Riemann problems for the two-phase model: configuration, initial data,
//! time marching and snapshot output.

mod config;
mod output;

use std::path::PathBuf;

pub use config::{load_config, DensitySpec, Primitive, ScenarioConfig, SideState};
pub use output::{
    format_significant, plot_script, plot_script_path, read_csv, snapshot_path, snapshot_records,
    write_csv, write_snapshot, SnapshotRecord, CSV_HEADER,
};

use crate::error::{Error, Result};
use crate::hydro::{total_energy, ConservedCell, GridState, Hyperbolicity, Scheme};
use crate::relaxation::RelaxationSettings;
use crate::thermo::ThermoParams;

/// Edge cells that moved by more than this are reported as disturbed.
pub const EDGE_TOL: f64 = 1e-12;

/// Piecewise constant data: cell centres left of `interface_x` take the
/// left state, the others the right state.
pub fn init_riemann(config: &ScenarioConfig, params: &ThermoParams) -> Result<GridState> {
    let left = config.left.resolve(params)?;
    let right = config.right.resolve(params)?;
    for (side, s) in [("left", &left), ("right", &right)] {
        for v in [s.rho, s.rho1, s.rho2] {
            params.check_density(v).map_err(|e| Error::InvalidState {
                cell: if side == "left" {
                    0
                } else {
                    config.n_cells - 1
                },
                reason: format!("{side} state: {e}"),
            })?;
        }
    }
    let dx = (config.x_max - config.x_min) / config.n_cells as f64;
    let cells = (0..config.n_cells)
        .map(|i| {
            let x = config.x_min + (i as f64 + 0.5) * dx;
            let s = if x < config.interface_x { left } else { right };
            ConservedCell::from_primitive(s.rho, s.rho1, s.rho2, s.u)
        })
        .collect();
    GridState::new(cells, dx, config.x_min)
}

pub fn scheme_for(config: &ScenarioConfig) -> Result<Scheme> {
    let params = config.params()?;
    let mut scheme = Scheme::new(params, RelaxationSettings::with_epsilon(config.epsilon));
    scheme.cfl = config.cfl;
    scheme.boundary = config.boundary;
    scheme.hyperbolicity = Hyperbolicity::Fatal;
    Ok(scheme)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub step: usize,
    pub records: Vec<SnapshotRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub initial_mass: f64,
    pub final_mass: f64,
    /// `(M(t_end) - M(0)) / M(0)`.
    pub relative_mass_drift: f64,
    pub min_density: f64,
    pub max_density: f64,
    /// `(t, total energy)` after every step, starting at `t = 0`.
    pub energy_history: Vec<(f64, f64)>,
    pub non_hyperbolic_events: usize,
    /// Largest change of the first and last cells over the run.
    pub edge_drift: f64,
}

impl RunSummary {
    pub fn edges_unchanged(&self) -> bool {
        self.edge_drift <= EDGE_TOL
    }

    /// Number of steps over which the total energy increased.
    pub fn energy_increases(&self) -> usize {
        self.energy_history
            .windows(2)
            .filter(|w| w[1].1 > w[0].1)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub snapshots: Vec<Snapshot>,
    pub summary: RunSummary,
    pub initial: GridState,
    pub final_grid: GridState,
}

/// Marches the split scheme from the Riemann data to `t_end`, clipping the
/// last step to land on `t_end`.
pub fn run(config: &ScenarioConfig) -> Result<RunOutput> {
    config.validate()?;
    let scheme = scheme_for(config)?;
    scheme.validate()?;
    let params = scheme.params;
    let initial = init_riemann(config, &params)?;

    let mut requested: Vec<f64> = config.snapshot_times.clone();
    requested.sort_by(|a, b| a.total_cmp(b));
    requested.dedup();
    let mut pending = requested.into_iter().peekable();

    let mut grid = initial.clone();
    let mut time = 0.0;
    let mut steps = 0;
    let mut snapshots = Vec::new();
    let mut non_hyperbolic = 0;
    let (mut min_density, mut max_density) = density_range(&grid);
    let mut energy_history = vec![(0.0, total_energy(&grid, &params)?)];

    while pending.peek().is_some_and(|t| *t <= 0.0) {
        pending.next();
        snapshots.push(Snapshot {
            time,
            step: 0,
            records: snapshot_records(&grid, &params)?,
        });
    }

    while time < config.t_end {
        let remaining = config.t_end - time;
        let outcome = scheme
            .full_step(&grid, Some(remaining))
            .map_err(|e| e.at_time(time))?;
        grid = outcome.grid;
        time = if outcome.dt >= remaining {
            config.t_end
        } else {
            time + outcome.dt
        };
        steps += 1;
        non_hyperbolic += outcome.stats.non_hyperbolic;
        let (lo, hi) = density_range(&grid);
        min_density = min_density.min(lo);
        max_density = max_density.max(hi);
        energy_history.push((
            time,
            total_energy(&grid, &params).map_err(|e| e.at_time(time))?,
        ));

        let mut due = false;
        while pending.peek().is_some_and(|t| *t <= time) {
            pending.next();
            due = true;
        }
        if due && time < config.t_end {
            snapshots.push(Snapshot {
                time,
                step: steps,
                records: snapshot_records(&grid, &params)?,
            });
        }
    }
    snapshots.push(Snapshot {
        time,
        step: steps,
        records: snapshot_records(&grid, &params)?,
    });

    let initial_mass = initial.total_mass();
    let final_mass = grid.total_mass();
    let last = grid.len() - 1;
    let edge_drift = grid.cells[0]
        .max_abs_diff(&initial.cells[0])
        .max(grid.cells[last].max_abs_diff(&initial.cells[last]));
    Ok(RunOutput {
        snapshots,
        summary: RunSummary {
            steps,
            final_time: time,
            initial_mass,
            final_mass,
            relative_mass_drift: (final_mass - initial_mass) / initial_mass,
            min_density,
            max_density,
            energy_history,
            non_hyperbolic_events: non_hyperbolic,
            edge_drift,
        },
        initial,
        final_grid: grid,
    })
}

fn density_range(grid: &GridState) -> (f64, f64) {
    grid.cells
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c.rho1).min(c.rho), hi.max(c.rho2).max(c.rho))
        })
}

/// Writes one CSV per snapshot and the plot script; returns the paths written.
pub fn write_outputs(config: &ScenarioConfig, output: &RunOutput) -> Result<Vec<PathBuf>> {
    if let Some(dir) = PathBuf::from(&config.output_prefix).parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut csvs = Vec::new();
    for snap in &output.snapshots {
        let path = snapshot_path(&config.output_prefix, snap.time);
        write_snapshot(&snap.records, &path)?;
        csvs.push(path);
    }
    let script = plot_script_path(&config.output_prefix);
    std::fs::write(&script, plot_script(&csvs))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755))?;
    }
    let mut all = csvs;
    all.push(script);
    Ok(all)
}
