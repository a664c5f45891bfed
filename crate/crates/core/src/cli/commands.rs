use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Format, OutputKind, RunConfig, SweepConfig};
use super::output::{svg_line_chart, to_json, Emission, Table};
use super::tables::{all_tables, TablesReport};
use super::{CliError, ConventionChoice};
use crate::channels::{evolve, Channel, NoiseScenario};
use crate::entanglement::{concurrence, entanglement_of_formation};
use crate::oracle::{compare_to_channel, Comparison, McStatus};
use crate::states::{reduced_all, StateSpec};
use crate::tensor::{label, Qubit};
use crate::timescales::{timescale_report, TimeGrid, TimescaleReport, Verdict};

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub plots: bool,
    pub seed: Option<u64>,
    pub force_informational: bool,
    pub convention: Option<ConventionChoice>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        cfg.plots |= self.plots;
        if let Some(seed) = self.seed {
            if let Some(mc) = cfg.mc.as_mut() {
                mc.seed = seed;
            }
            if let Some(sw) = cfg.sweep.as_mut() {
                sw.seed = seed;
            }
        }
    }

    /// C for two qubits and C² for three unless asked otherwise.
    pub fn convention_for(&self, register_size: usize) -> ConventionChoice {
        self.convention.unwrap_or(if register_size == 2 { ConventionChoice::C } else { ConventionChoice::C2 })
    }
}

fn pairs(register: &[Qubit]) -> Vec<Vec<Qubit>> {
    let mut out = Vec::new();
    for (i, &p) in register.iter().enumerate() {
        for &q in &register[i + 1..] {
            out.push(vec![p, q]);
        }
    }
    out
}

/// One row per grid time: `|ρᵢⱼ|` for `i < j` (1-based names), each pair's
/// concurrence in the chosen convention, `E_f`, then reduced-state entries.
pub fn trajectory_table(cfg: &RunConfig, convention: ConventionChoice) -> Result<Table, CliError> {
    let rho0 = cfg.state.projector()?;
    let register = rho0.register().to_vec();
    let dim = rho0.dim();
    let pairs = pairs(&register);
    let want = |k| cfg.outputs.contains(&k);
    let (with_c, with_c2) = match convention {
        ConventionChoice::C => (true, false),
        ConventionChoice::C2 => (false, true),
        ConventionChoice::Both => (true, true),
    };

    let mut columns = vec!["t".to_string()];
    if want(OutputKind::Elements) {
        for i in 0..dim {
            for j in i + 1..dim {
                columns.push(format!("abs_rho_{}_{}", i + 1, j + 1));
            }
        }
    }
    let pair_labels: Vec<String> = pairs.iter().map(|p| label(p)).collect();
    if want(OutputKind::Concurrence) {
        if with_c {
            columns.extend(pair_labels.iter().map(|p| format!("C_{p}")));
        }
        if with_c2 {
            columns.extend(pair_labels.iter().map(|p| format!("C2_{p}")));
        }
    }
    if want(OutputKind::Eof) {
        columns.extend(pair_labels.iter().map(|p| format!("Ef_{p}")));
    }
    let reduced0 = reduced_all(&rho0)?;
    if want(OutputKind::Reduced) {
        for (keep, r) in &reduced0 {
            let d = r.dim();
            for i in 0..d {
                for j in i + 1..d {
                    columns.push(format!("abs_rho_{}_{}_{}", label(keep), i + 1, j + 1));
                }
            }
        }
    }

    let rows = cfg
        .grid
        .times()
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>, CliError> {
            let rho = evolve(&rho0, &cfg.scenario, t)?;
            let reduced = reduced_all(&rho)?;
            let mut row = vec![t];
            if want(OutputKind::Elements) {
                for i in 0..dim {
                    for j in i + 1..dim {
                        row.push(rho.matrix()[(i, j)].norm());
                    }
                }
            }
            let cs: Vec<f64> = pairs
                .iter()
                .map(|p| {
                    let state = if p.len() == register.len() { &rho } else { &reduced[p] };
                    concurrence(state).map(|c| c.value)
                })
                .collect::<crate::Result<_>>()?;
            if want(OutputKind::Concurrence) {
                if with_c {
                    row.extend(&cs);
                }
                if with_c2 {
                    row.extend(cs.iter().map(|c| c * c));
                }
            }
            if want(OutputKind::Eof) {
                for &c in &cs {
                    row.push(entanglement_of_formation(c)?);
                }
            }
            if want(OutputKind::Reduced) {
                for r in reduced.values() {
                    let d = r.dim();
                    for i in 0..d {
                        for j in i + 1..d {
                            row.push(r.matrix()[(i, j)].norm());
                        }
                    }
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Table { columns, rows })
}

fn plot_columns(table: &Table, prefix: &[&str]) -> Vec<(String, Vec<f64>)> {
    table
        .columns
        .iter()
        .filter(|c| prefix.iter().any(|p| c.starts_with(p)))
        .map(|c| (c.clone(), table.column(c).unwrap_or_default()))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub files: Vec<String>,
    pub audit: Option<Verdict>,
}

pub fn stage_run(cfg: &RunConfig, ov: &Overrides) -> Result<(Emission, RunOutcome), CliError> {
    let convention = ov.convention_for(cfg.scenario.register_size);
    let table = trajectory_table(cfg, convention)?;
    let mut files = Emission::default();
    let ext = match cfg.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    files.add(format!("trajectory.{ext}"), table.render(cfg.format)?);

    let mut audit = None;
    if cfg.outputs.contains(&OutputKind::Timescales) || cfg.outputs.contains(&OutputKind::Audit) {
        let report = timescale_report(&cfg.state, &cfg.scenario, &cfg.grid)?;
        audit = Some(report.audit.verdict);
        if cfg.outputs.contains(&OutputKind::Timescales) {
            files.add("timescales.json", to_json(&report)?);
        }
        if cfg.outputs.contains(&OutputKind::Audit) {
            files.add("audit.json", to_json(&report.audit)?);
        }
    }
    if cfg.plots {
        let ts = table.column("t").unwrap_or_default();
        let elements = plot_columns(&table, &["abs_rho_"]);
        if !elements.is_empty() {
            files.add("elements.svg", svg_line_chart("|ρᵢⱼ(t)|", &ts, &elements, cfg.log_y));
        }
        let ent = plot_columns(&table, &["C_", "C2_", "Ef_"]);
        if !ent.is_empty() {
            files.add("entanglement.svg", svg_line_chart("pairwise entanglement", &ts, &ent, cfg.log_y));
        }
    }
    let outcome = RunOutcome { files: files.names().map(str::to_string).collect(), audit };
    Ok((files, outcome))
}

pub fn cmd_run(cfg: &RunConfig, ov: &Overrides) -> Result<RunOutcome, CliError> {
    let (files, outcome) = stage_run(cfg, ov)?;
    files.commit(&cfg.output_dir)?;
    Ok(outcome)
}

pub fn cmd_verify(cfg: &RunConfig, ov: &Overrides) -> Result<Comparison, CliError> {
    let mc = cfg.mc.ok_or_else(|| CliError::Validation("mc: verify needs mc.* settings".into()))?;
    let report = compare_to_channel(&cfg.state, &cfg.scenario, &mc, ov.force_informational)?;
    let mut files = Emission::default();
    files.add("verify.json", to_json(&report)?);
    files.commit(&cfg.output_dir)?;
    Ok(report)
}

/// One sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub rate: f64,
    pub draw: usize,
    pub state: StateSpec,
    pub tau_dec_slowest: Option<f64>,
    /// Per pair, in C and C² conventions.
    pub tau_dis: BTreeMap<String, (f64, f64)>,
    pub audit: Verdict,
}

fn with_rate(scenario: &NoiseScenario, rate: f64) -> Result<NoiseScenario, CliError> {
    let channels = scenario.channels.iter().map(|c| Channel::new(c.kind, rate)).collect();
    let s = if scenario.relaxed {
        NoiseScenario::relaxed(scenario.register_size, channels)
    } else {
        NoiseScenario::new(scenario.register_size, channels)
    };
    Ok(s?)
}

fn sweep_point(cfg: &RunConfig, sw: &SweepConfig, rate: f64, draw: usize, index: u64) -> Result<SweepPoint, CliError> {
    let scenario = with_rate(&cfg.scenario, rate)?;
    let state = if sw.draws == 0 {
        cfg.state
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(sw.seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        StateSpec::random(cfg.state.class(), &mut rng)
    };
    let grid = TimeGrid::new(TimeGrid::default_for(&scenario).t_max, cfg.grid.n_samples)?;
    let report: TimescaleReport = timescale_report(&state, &scenario, &grid)?;
    let n = scenario.register_size;
    let tau_dec_slowest = report
        .coherence
        .iter()
        .filter(|c| c.subsystem.len() == n && c.fit.decays())
        .map(|c| c.fit.tau)
        .max_by(f64::total_cmp);
    let tau_dis = report
        .concurrence
        .iter()
        .map(|c| {
            let tau = |f: &crate::timescales::FitResult| if f.decays() { f.tau } else { f64::INFINITY };
            (c.pair.clone(), (tau(&c.c), tau(&c.c2)))
        })
        .collect();
    Ok(SweepPoint { rate, draw, state, tau_dec_slowest, tau_dis, audit: report.audit.verdict })
}

pub fn sweep_points(cfg: &RunConfig) -> Result<Vec<SweepPoint>, CliError> {
    let sw = cfg.sweep.as_ref().ok_or_else(|| CliError::Validation("sweep: sweep needs sweep.rates".into()))?;
    let draws = sw.draws.max(1);
    let jobs: Vec<(f64, usize)> = sw.rates.iter().flat_map(|&r| (0..draws).map(move |d| (r, d))).collect();
    jobs.par_iter()
        .enumerate()
        .map(|(k, &(rate, draw))| sweep_point(cfg, sw, rate, draw, k as u64))
        .collect()
}

pub fn cmd_sweep(cfg: &RunConfig, ov: &Overrides) -> Result<Vec<SweepPoint>, CliError> {
    let points = sweep_points(cfg)?;
    let mut files = Emission::default();
    match cfg.format {
        Format::Json => files.add("sweep.json", to_json(&points)?),
        Format::Csv => {
            let convention = ov.convention_for(cfg.scenario.register_size);
            let pair_names: Vec<String> = points.first().map(|p| p.tau_dis.keys().cloned().collect()).unwrap_or_default();
            let mut columns = vec!["rate".to_string(), "draw".to_string(), "tau_dec_slowest".to_string()];
            for p in &pair_names {
                if convention != ConventionChoice::C2 {
                    columns.push(format!("tau_dis_C_{p}"));
                }
                if convention != ConventionChoice::C {
                    columns.push(format!("tau_dis_C2_{p}"));
                }
            }
            columns.push("audit_fail".into());
            let rows = points
                .iter()
                .map(|pt| {
                    let mut row = vec![pt.rate, pt.draw as f64, pt.tau_dec_slowest.unwrap_or(f64::INFINITY)];
                    for p in &pair_names {
                        let (c, c2) = pt.tau_dis[p];
                        if convention != ConventionChoice::C2 {
                            row.push(c);
                        }
                        if convention != ConventionChoice::C {
                            row.push(c2);
                        }
                    }
                    row.push(if pt.audit == Verdict::Fail { 1.0 } else { 0.0 });
                    row
                })
                .collect();
            files.add("sweep.csv", Table { columns, rows }.to_csv());
        }
    }
    files.commit(&cfg.output_dir)?;
    Ok(points)
}

pub fn cmd_paper_tables(out: &std::path::Path, seed: u64) -> Result<TablesReport, CliError> {
    let report = all_tables(seed)?;
    let mut files = Emission::default();
    files.add("paper_tables.json", to_json(&report)?);
    files.commit(out)?;
    Ok(report)
}

pub fn status_is_failure(c: &Comparison) -> bool {
    c.status == McStatus::Fail
}
