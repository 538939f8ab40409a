#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use metaphase::equilibrium::{
    maxwell_construction, mixture_free_energy, spinodal_bounds, MixtureState,
};
use metaphase::relaxation::{relax_step, RelaxationSettings};
use metaphase::scenario::{self, format_significant, ScenarioConfig};
use metaphase::thermo::ThermoParams;
use metaphase::{Error, Result};

#[derive(Parser)]
#[command(
    name = "metaphase",
    version,
    about = "Two-phase van der Waals flow with metastable phase transition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Riemann problem scenario and write snapshot CSVs.
    Run {
        config: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Print saturation and spinodal densities at a temperature.
    Maxwell {
        #[arg(long)]
        temperature: f64,
    },
    /// Integrate the phase transfer system for one homogeneous state.
    Relax {
        #[arg(long)]
        temperature: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        rho1: f64,
        #[arg(long)]
        rho2: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long = "t-end")]
        t_end: f64,
        /// Number of output intervals.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            epsilon,
            cells,
            t_end,
        } => run(config, epsilon, cells, t_end),
        Command::Maxwell { temperature } => maxwell(temperature),
        Command::Relax {
            temperature,
            rho,
            rho1,
            rho2,
            epsilon,
            t_end,
            samples,
        } => relax(temperature, rho, rho1, rho2, epsilon, t_end, samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error category={} message={message}", e.category());
            ExitCode::FAILURE
        }
    }
}

fn run(
    path: PathBuf,
    epsilon: Option<f64>,
    cells: Option<usize>,
    t_end: Option<f64>,
) -> Result<()> {
    let mut config = ScenarioConfig::from_file(&path)?;
    if let Some(e) = epsilon {
        config.epsilon = e;
    }
    if let Some(n) = cells {
        config.n_cells = n;
    }
    if let Some(t) = t_end {
        config.t_end = t;
        config.snapshot_times.retain(|s| *s <= t);
    }
    config.validate()?;

    let started = Instant::now();
    let output = scenario::run(&config)?;
    let files = scenario::write_outputs(&config, &output)?;
    let s = &output.summary;
    let energy = &s.energy_history;
    println!("steps={}", s.steps);
    println!("final_time={}", format_significant(s.final_time, 9));
    println!("relative_mass_drift={:e}", s.relative_mass_drift);
    println!("min_density={}", format_significant(s.min_density, 9));
    println!("max_density={}", format_significant(s.max_density, 9));
    println!("energy_initial={}", format_significant(energy[0].1, 12));
    println!(
        "energy_final={}",
        format_significant(energy[energy.len() - 1].1, 12)
    );
    println!("energy_increasing_steps={}", s.energy_increases());
    println!("non_hyperbolic_events={}", s.non_hyperbolic_events);
    println!("edge_cells_unchanged={}", s.edges_unchanged());
    println!("wall_seconds={:.2}", started.elapsed().as_secs_f64());
    for f in files {
        println!("wrote={}", f.display());
    }
    Ok(())
}

fn maxwell(temperature: f64) -> Result<()> {
    let params = ThermoParams::reduced(temperature)?;
    let sat = maxwell_construction(&params)?;
    let spin = spinodal_bounds(&params)?;
    let rows = [
        ("rho1_star", sat.rho1_star),
        ("rho2_star", sat.rho2_star),
        ("p_star", sat.p_star),
        ("mu_star", sat.mu_star),
        ("rho_minus", spin.rho_minus),
        ("rho_plus", spin.rho_plus),
    ];
    for (k, v) in rows {
        println!("{k}={}", format_significant(v, 9));
    }
    Ok(())
}

fn relax(
    temperature: f64,
    rho: f64,
    rho1: f64,
    rho2: f64,
    epsilon: f64,
    t_end: f64,
    samples: usize,
) -> Result<()> {
    if !(t_end > 0.0) || samples == 0 {
        return Err(Error::Validation(
            "t-end and samples must be positive".into(),
        ));
    }
    let params = ThermoParams::reduced(temperature)?;
    let settings = RelaxationSettings::with_epsilon(epsilon);
    settings.validate()?;
    let mut state = MixtureState::new(rho, rho1, rho2)?;
    for v in [rho, rho1, rho2] {
        params.check_density(v)?;
    }

    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    writeln!(out, "t,rho1,rho2,alpha1,F,p1,p2,mu1,mu2")?;
    let dt = t_end / samples as f64;
    for k in 0..=samples {
        if k > 0 {
            state = relax_step(&state, dt, &settings, &params)?;
        }
        let q1 = params.potentials(state.rho1)?;
        let q2 = params.potentials(state.rho2)?;
        let row = [
            k as f64 * dt,
            state.rho1,
            state.rho2,
            state.fractions().0,
            mixture_free_energy(&state, &params)?,
            q1.pressure,
            q2.pressure,
            q1.chemical_potential,
            q2.chemical_potential,
        ];
        let cols: Vec<String> = row.iter().map(|v| format_significant(*v, 12)).collect();
        writeln!(out, "{}", cols.join(","))?;
    }
    out.flush()?;
    Ok(())
}
