mod args;

use std::io;
use std::process::ExitCode;

use atwr_core::channel::{ScenarioFile, ScenarioGeometry};
use atwr_core::simulate::{emit_csv, run_sweep, write_csv, Scenario, Scheme, SweepResult, SweepSpec};
use atwr_core::Error;
use clap::Parser;

use args::{Cli, Command, ScenarioArg, SweepArgs};

const DEFAULT_SNR_AXIS: &str = "0:40:10";

/// Bad flags or config files.
const EXIT_CONFIG: u8 = 2;
/// The sweep itself could not run.
const EXIT_SOLVE: u8 = 1;
/// The CSV was written but some axis point has no successful realization.
const EXIT_ALL_FAILED: u8 = 3;

fn build_spec(a: &SweepArgs) -> Result<SweepSpec, Error> {
    let coverage = a.scenario.is_coverage();
    if coverage && a.snr_db.is_some() {
        return Err(Error::Config("coverage scenarios sweep --distances-m, not --snr-db".into()));
    }
    if !coverage && a.distances_m.is_some() {
        return Err(Error::Config("--distances-m only applies to coverage scenarios".into()));
    }
    if !coverage && a.config.is_some() {
        return Err(Error::Config("--config only applies to coverage scenarios".into()));
    }

    let scenario = match a.scenario {
        ScenarioArg::Balanced => Scenario::Balanced,
        ScenarioArg::Unbalanced => Scenario::Unbalanced { snr_b_db: a.snr_b_db },
        ScenarioArg::CoverageExt | ScenarioArg::CoverageHole => {
            let mut geo = if a.scenario == ScenarioArg::CoverageExt {
                ScenarioGeometry::coverage_extension()
            } else {
                ScenarioGeometry::coverage_hole()
            };
            if let Some(path) = &a.config {
                ScenarioFile::load(path)?.apply(&mut geo)?;
            }
            Scenario::Coverage(geo)
        }
    };

    let axis = match (&scenario, &a.snr_db, &a.distances_m) {
        (Scenario::Coverage(geo), _, None) => geo.default_tue_distances(),
        (_, _, Some(d)) => d.0.clone(),
        (_, Some(s), _) => s.0.clone(),
        (_, None, None) => args::parse_axis(DEFAULT_SNR_AXIS).map_err(Error::Config)?.0,
    };

    let schemes = a.schemes.clone().unwrap_or_else(|| {
        let mut s = vec![Scheme::BiCt, Scheme::BiCp, Scheme::Owr];
        if coverage {
            s.push(Scheme::Direct);
        }
        s
    });

    let spec = SweepSpec {
        scenario,
        axis,
        n_antennas: a.antennas.0,
        m_antennas: a.antennas.1,
        schemes,
        realizations: a.realizations,
        seed: a.seed,
        weights: a.weights,
        solver: a.solver,
    };
    spec.validate()?;
    Ok(spec)
}

fn write(result: &SweepResult, a: &SweepArgs) -> Result<(), Error> {
    match &a.out {
        Some(path) => emit_csv(result, path),
        None => write_csv(result, io::stdout().lock()).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e.into(),
        }),
    }
}

fn sweep(a: &SweepArgs) -> ExitCode {
    let spec = match build_spec(a) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("atwr-lab: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match run_sweep(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("atwr-lab: sweep failed: {e}");
            return ExitCode::from(EXIT_SOLVE);
        }
    };
    if let Err(e) = write(&result, a) {
        eprintln!("atwr-lab: {e}");
        return ExitCode::from(EXIT_SOLVE);
    }
    eprintln!(
        "atwr-lab: {} rows, {} realizations per point, seed {}, config {:016x}",
        result.rows.len(),
        spec.realizations,
        spec.seed,
        result.config_hash
    );
    let dead: Vec<String> = result
        .rows
        .iter()
        .filter(|r| r.failures == r.realizations)
        .map(|r| format!("{}@{}", r.scheme, r.axis))
        .collect();
    if !dead.is_empty() {
        eprintln!("atwr-lab: every realization failed for {}", dead.join(", "));
        return ExitCode::from(EXIT_ALL_FAILED);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Sweep(a) => sweep(a),
    }
}
