//! Scenario execution: every engine at every sweep point, then CSV and
//! `.meta` emission. Nothing is written until all points have succeeded,
//! and files written before an I/O failure are removed again.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use squeezenm::bath::discretize_bath;
use squeezenm::detection::output_variance;
use squeezenm::markov::solve_markovian;
use squeezenm::meanfield::solve_meanfield;
use squeezenm::oracle::{simulate_oracle, OracleConfig};
use squeezenm::output::{write_detection, write_green, write_kernel, write_meanfield, write_trace};
use squeezenm::pipeline::run_volterra;
use squeezenm::VarianceTrace;

use crate::error::{CliError, Result};
use crate::scenario::{Engine, Point, Scenario};

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker threads for sweep points; 0 lets rayon decide.
    pub jobs: usize,
}

/// One engine's trace at one sweep point, with its rendered files.
struct EngineOutput {
    engine: Engine,
    trace: VarianceTrace,
    seconds: f64,
    /// (suffix, contents); the empty suffix is the trace itself.
    files: Vec<(String, Vec<u8>)>,
    notes: Vec<String>,
}

struct PointOutcome {
    point: Point,
    outputs: Vec<EngineOutput>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub point: Option<String>,
    pub engines: (Engine, Engine),
    pub max_relative_deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceSummary {
    pub file: PathBuf,
    pub min_var_theta: f64,
    pub t_at_min: f64,
    pub max_commutator_residual: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub traces: Vec<TraceSummary>,
    pub comparisons: Vec<Comparison>,
    pub notes: Vec<String>,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.traces {
            writeln!(
                f,
                "{}: min var_theta {:.6} at t = {:.2}, max commutator residual {:.2e}, {:.2} s",
                t.file.display(),
                t.min_var_theta,
                t.t_at_min,
                t.max_commutator_residual,
                t.seconds
            )?;
        }
        for c in &self.comparisons {
            let at = c.point.as_deref().map(|p| format!(" [{p}]")).unwrap_or_default();
            writeln!(
                f,
                "compare {} vs {}{at}: max relative deviation of var_theta {:.3e}",
                c.engines.0, c.engines.1, c.max_relative_deviation
            )?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        write!(f, "{} files written", self.files.len())
    }
}

pub fn run_scenario(scn: &Scenario, opts: &RunOptions) -> Result<RunReport> {
    scn.validate()?;
    let points = scn.points()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| CliError::Invalid(format!("worker pool: {e}")))?;
    let outcomes: Vec<PointOutcome> = pool.install(|| points.into_par_iter().map(run_point).collect::<Result<_>>())?;

    fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::Io(opts.out_dir.display().to_string(), e))?;
    let mut report = RunReport::default();
    if let Err(e) = emit(&outcomes, &opts.out_dir, &mut report) {
        for file in &report.files {
            let _ = fs::remove_file(file);
        }
        return Err(e);
    }
    for outcome in &outcomes {
        compare_engines(outcome, &mut report);
    }
    Ok(report)
}

fn describe(point: &Point) -> String {
    let s = &point.scenario;
    let at = point.label.as_deref().map(|l| format!(" at {l}")).unwrap_or_default();
    format!(
        "scenario {}{at} (s = {}, η = {}, ω₀ = {}, G = {}, κ = {}, Δ'_c = {})",
        s.name, s.bath.s, s.bath.eta, s.bath.omega0, s.system.coupling_g, s.system.kappa, s.system.delta_eff
    )
}

fn run_point(point: Point) -> Result<PointOutcome> {
    let wrap = |e: CliError| CliError::AtPoint { point: describe(&point), source: Box::new(e) };
    point.scenario.check_stability().map_err(wrap)?;
    let mut outputs = Vec::new();
    for &engine in &point.scenario.engines {
        info!("running {engine} for {}", describe(&point));
        let out = run_engine(&point.scenario, engine)
            .map_err(|e| CliError::AtPoint { point: format!("{engine} engine, {}", describe(&point)), source: Box::new(e) })?;
        outputs.push(out);
    }
    Ok(PointOutcome { point, outputs })
}

fn render(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory cannot fail");
    buf
}

fn run_engine(scn: &Scenario, engine: Engine) -> Result<EngineOutput> {
    let start = Instant::now();
    let mut files = Vec::new();
    let mut notes = Vec::new();
    let trace = match engine {
        Engine::Volterra => {
            let run = run_volterra(&scn.system, &scn.bath, &scn.grid)?;
            if scn.output.meanfield {
                let mf = solve_meanfield(&scn.system, &scn.bath, &scn.grid)?;
                files.push(("_meanfield".to_string(), render(|b| write_meanfield(b, &mf))));
            }
            if scn.output.kernel {
                files.push(("_kernel".to_string(), render(|b| write_kernel(b, &run.table, scn.grid.output_stride))));
            }
            if scn.output.green {
                files.push(("_green".to_string(), render(|b| write_green(b, &run.green))));
            }
            run.trace
        }
        Engine::Markovian => {
            let run = solve_markovian(&scn.system, &scn.grid)?;
            if run.unstable {
                notes.push(format!("markovian drift is unstable, growth rate {:.3e}", run.max_growth_rate));
            }
            run.trace
        }
        Engine::Oracle => {
            let discrete = discretize_bath(&scn.bath, scn.oracle.modes, scn.oracle.cutoff(&scn.bath))?;
            let mut config = OracleConfig::new(discrete, scn.system, scn.grid);
            config.substeps = scn.oracle.substeps;
            let recurrence = config.recurrence_time();
            if scn.grid.t_max() > recurrence {
                notes.push(format!(
                    "oracle run extends past the bath recurrence time {recurrence:.1}; raise oracle.modes for later times"
                ));
            }
            simulate_oracle(&config)?.trace
        }
    };
    if let Some(det) = &scn.detection {
        notes.extend(det.warnings(scn.system.coupling_g.norm()));
        let var_out = output_variance(&trace, det);
        files.push(("_detection".to_string(), render(|b| write_detection(b, &trace.times, &var_out))));
    }
    files.insert(0, (String::new(), render(|b| write_trace(b, &trace, &[]))));
    Ok(EngineOutput { engine, trace, seconds: start.elapsed().as_secs_f64(), files, notes })
}

/// `<scenario>_<engine>[_<param>=<value>]`
pub fn basename(scn: &Scenario, engine: Engine, label: Option<&str>) -> String {
    match label {
        Some(l) => format!("{}_{engine}_{l}", scn.name),
        None => format!("{}_{engine}", scn.name),
    }
}

fn meta_text(point: &Point, out: &EngineOutput) -> Result<String> {
    let mut text = format!("# squeezenm {}\n# engine = {}\n", env!("CARGO_PKG_VERSION"), out.engine);
    if let Some(label) = &point.label {
        text.push_str(&format!("# sweep point {label}\n"));
    }
    text.push_str(&format!("# wall time {:.3} s\n", out.seconds));
    text.push_str(&point.scenario.to_flat_toml()?);
    Ok(text)
}

fn write_file(path: &Path, bytes: &[u8], report: &mut RunReport) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    report.files.push(path.to_path_buf());
    Ok(())
}

fn emit(outcomes: &[PointOutcome], dir: &Path, report: &mut RunReport) -> Result<()> {
    for outcome in outcomes {
        let point = &outcome.point;
        for out in &outcome.outputs {
            let base = basename(&point.scenario, out.engine, point.label.as_deref());
            for (suffix, bytes) in &out.files {
                write_file(&dir.join(format!("{base}{suffix}.csv")), bytes, report)?;
            }
            write_file(&dir.join(format!("{base}.meta")), meta_text(point, out)?.as_bytes(), report)?;
            let (i_min, min) = out
                .trace
                .var_theta
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
            report.traces.push(TraceSummary {
                file: dir.join(format!("{base}.csv")),
                min_var_theta: min,
                t_at_min: out.trace.times[i_min],
                max_commutator_residual: out.trace.max_commutator_residual(),
                seconds: out.seconds,
            });
            for note in &out.notes {
                warn!("{base}: {note}");
                report.notes.push(format!("{base}: {note}"));
            }
        }
    }
    Ok(())
}

fn compare_engines(outcome: &PointOutcome, report: &mut RunReport) {
    let outs = &outcome.outputs;
    for (i, a) in outs.iter().enumerate() {
        for b in &outs[i + 1..] {
            report.comparisons.push(Comparison {
                point: outcome.point.label.clone(),
                engines: (a.engine, b.engine),
                max_relative_deviation: a.trace.max_relative_deviation(&b.trace),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::load_preset;

    #[test]
    fn basenames_follow_contract() {
        let scn = load_preset("fig3a").unwrap();
        let points = scn.points().unwrap();
        assert_eq!(basename(&scn, Engine::Volterra, None), "fig3a_volterra");
        assert_eq!(
            basename(&points[0].scenario, Engine::Oracle, points[0].label.as_deref()),
            "fig3a_oracle_bath.eta=0.001"
        );
    }

    #[test]
    fn unstable_point_names_parameters() {
        let points = load_preset("fig3a").unwrap().points().unwrap();
        let err = match run_point(points[2].clone()) {
            Err(e) => e.to_string(),
            Ok(_) => panic!("η = 1e-2 must be rejected"),
        };
        assert!(err.contains("bath.eta=0.01") && err.contains("unstable"), "{err}");
    }
}
