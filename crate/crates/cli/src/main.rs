//! Command-line driver for the Glauber laboratory. Every subcommand reads a
//! key=value configuration (defaults, optional file, trailing overrides),
//! runs one experiment, and emits a CSV table with a `#` metadata block.
//!
//! Exit codes: 0 success, 1 configuration error, 2 statistical or spectral
//! degeneracy (results unusable at the requested precision), 3 I/O failure.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use glauber_lab::birth_death::{scaling_experiment, BirthDeathChain};
use glauber_lab::coarse::{default_block_side, BlockGrid};
use glauber_lab::coupling::agreement_experiment;
use glauber_lab::droplet::{droplet_relaxation_experiment, DropletPlan};
use glauber_lab::generator::exact_inverse_gap;
use glauber_lab::lattice::LatticeDomain;
use glauber_lab::moments::{
    estimate_moments, gap_lower_bound, ls_lower_bound, resolve_m_star, BoundEstimate,
    MagnetizationRule, Moments, SamplingPlan,
};
use glauber_lab::numeric::{fit_log_log, RunningMoments};
use glauber_lab::testfn::TestFunction;
use glauber_lab::{Error as CoreError, RateModel, Scalar};

use config::{MStarSource, RunConfig};
use output::{float, int, opt_float, text, Cell, Table};

#[derive(Parser)]
#[command(name = "glauber-lab", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Key=value configuration file; `#` lines are comments.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed from any other source.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when omitted); written atomically.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trailing key=value overrides, applied after the config file.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact gap, Hardy bounds, and hitting time for one birth-death chain.
    BdGap(Common),
    /// Gap, bounds, and hitting times across box sides, with log-log fits.
    BdScaling(Common),
    /// Exact and simulated mean hitting times to the empty droplet.
    BdHit(Common),
    /// MCMC moments of the coarse-grained tilt on a lattice box.
    IsingSample(Common),
    /// Variational lower bounds for the lattice relaxation constants.
    IsingBound(Common),
    /// Monotone coupling agreement curve at the center site.
    IsingCouple(Common),
    /// Shrinking-droplet relaxation curves and crossing times.
    IsingDroplet(Common),
}

enum Failure {
    Config(String),
    Core(CoreError),
    Io(std::io::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Core(e) => match e {
                CoreError::DegenerateSpectrum { .. }
                | CoreError::DegenerateDirichlet
                | CoreError::LowEffectiveSamples { .. } => 2,
                _ => 1,
            },
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
            Failure::Io(e) => e.to_string(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, common): (&'static str, &Common) = match &cli.command {
        Command::BdGap(c) => ("bd-gap", c),
        Command::BdScaling(c) => ("bd-scaling", c),
        Command::BdHit(c) => ("bd-hit", c),
        Command::IsingSample(c) => ("ising-sample", c),
        Command::IsingBound(c) => ("ising-bound", c),
        Command::IsingCouple(c) => ("ising-couple", c),
        Command::IsingDroplet(c) => ("ising-droplet", c),
    };
    match run(name, common) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(name: &'static str, common: &Common) -> Result<u8, Failure> {
    let cfg = RunConfig::load(common.config.as_deref(), &common.overrides, common.seed)
        .map_err(Failure::Config)?;
    let (table, exit) = match name {
        "bd-gap" => bd_gap(&cfg)?,
        "bd-scaling" => bd_scaling(&cfg)?,
        "bd-hit" => bd_hit(&cfg)?,
        "ising-sample" => ising_sample(&cfg)?,
        "ising-bound" => ising_bound(&cfg)?,
        "ising-couple" => ising_couple(&cfg)?,
        "ising-droplet" => ising_droplet(&cfg)?,
        _ => unreachable!(),
    };
    output::write_table(&table, common.out.as_deref())?;
    Ok(exit)
}

fn replicas_or(cfg: &RunConfig, default: usize) -> usize {
    if cfg.replicas == 0 {
        default
    } else {
        cfg.replicas
    }
}

fn magnetization_rule(cfg: &RunConfig) -> MagnetizationRule<Scalar> {
    match cfg.m_star {
        MStarSource::Exact => MagnetizationRule::ExactD2,
        MStarSource::Fixed(v) => MagnetizationRule::Fixed(v),
        MStarSource::Mcmc => MagnetizationRule::Mcmc {
            burnin: 100,
            samples: 2000,
            seed: cfg.seed ^ 0x5eed_5eed,
        },
    }
}

struct LatticeSetup {
    model: RateModel<Scalar>,
    domain: std::sync::Arc<LatticeDomain>,
    grid: BlockGrid,
    tf: TestFunction<Scalar>,
    m_star: Scalar,
    block_side: usize,
}

fn lattice_setup(cfg: &RunConfig) -> Result<LatticeSetup, Failure> {
    let domain = LatticeDomain::plus_boundary(cfg.dim, cfg.side);
    let model = RateModel::new(cfg.rate_model, cfg.beta);
    let block_side =
        if cfg.block_side == 0 { default_block_side(cfg.side) } else { cfg.block_side };
    let grid = BlockGrid::new(&domain, block_side)?;
    let m_star = resolve_m_star(&magnetization_rule(cfg), &model, &domain)?;
    let tf = TestFunction::new(cfg.lambda, m_star, &grid);
    Ok(LatticeSetup { model, domain, grid, tf, m_star, block_side })
}

fn bd_chain(cfg: &RunConfig, side: usize) -> Result<BirthDeathChain<Scalar>, Failure> {
    let volume = (side as u128).pow(cfg.dim);
    if volume > (1 << 20) {
        return Err(Failure::Config(format!(
            "side^dim = {volume} states exceeds the 2^20 limit"
        )));
    }
    Ok(BirthDeathChain::new(cfg.dim, side))
}

fn bd_gap(cfg: &RunConfig) -> Result<(Table, u8), Failure> {
    let chain = bd_chain(cfg, cfg.side)?;
    let gap = chain.hardy_gap_bound();
    let ls = chain.hardy_ls_bound();
    let mut t = Table::new(
        "bd-gap",
        cfg.metadata(),
        vec![
            "side",
            "volume",
            "inverse_gap",
            "hardy_gap_bound",
            "hardy_gap_anchor",
            "hardy_ls_bound",
            "hitting_from_top",
        ],
    );
    t.push_row(vec![
        int(chain.side()),
        int(chain.volume()),
        float(chain.exact_inverse_gap()?),
        float(gap.bound),
        int(gap.anchor),
        float(ls.bound),
        float(chain.expected_hitting_to_zero(chain.volume())),
    ]);
    Ok((t, 0))
}

fn default_sides(dim: u32) -> Vec<usize> {
    if dim == 2 {
        vec![8, 12, 16, 24, 32, 48, 64]
    } else {
        vec![4, 6, 8, 10, 12, 14, 16]
    }
}

fn bd_scaling(cfg: &RunConfig) -> Result<(Table, u8), Failure> {
    let sides = if cfg.sides.is_empty() { default_sides(cfg.dim) } else { cfg.sides.clone() };
    for &s in &sides {
        bd_chain(cfg, s)?;
    }
    let rows = scaling_experiment::<Scalar>(cfg.dim, &sides)?;
    let mut t = Table::new(
        "bd-scaling",
        cfg.metadata(),
        vec!["side", "volume", "inverse_gap", "hardy_gap_bound", "hardy_ls_bound", "hitting_from_top"],
    );
    for r in &rows {
        t.push_row(vec![
            int(r.side),
            int(r.volume),
            float(r.inverse_gap),
            float(r.hardy_gap),
            float(r.hardy_ls),
            float(r.hitting_from_top),
        ]);
    }
    if rows.len() >= 3 {
        let xs: Vec<f64> = rows.iter().map(|r| r.side as f64).collect();
        for (name, ys) in [
            ("inverse_gap", rows.iter().map(|r| r.inverse_gap).collect::<Vec<_>>()),
            ("hardy_ls_bound", rows.iter().map(|r| r.hardy_ls).collect()),
            ("hitting_from_top", rows.iter().map(|r| r.hitting_from_top).collect()),
        ] {
            let fit = fit_log_log(&xs, &ys);
            t.comment(format!(
                "loglog_fit {name}: slope = {:.4} +- {:.4} (ci95 {:.4})",
                fit.slope, fit.slope_se, fit.slope_ci95
            ));
        }
    }
    Ok((t, 0))
}

fn bd_hit(cfg: &RunConfig) -> Result<(Table, u8), Failure> {
    let chain = bd_chain(cfg, cfg.side)?;
    let top = chain.volume();
    let start = if cfg.start == 0 { top } else { cfg.start.min(top) };
    let mut starts = Vec::new();
    let mut x = 1;
    while x < start {
        starts.push(x);
        x *= 2;
    }
    starts.push(start);
    let mut t = Table::new(
        "bd-hit",
        cfg.metadata(),
        vec!["start", "exact_mean", "simulated_mean", "simulated_se", "sim_replicas"],
    );
    for &x in &starts {
        let exact = chain.expected_hitting_to_zero(x);
        let (sim_mean, sim_se) = if cfg.sim_replicas > 0 {
            let mut acc = RunningMoments::new();
            for r in 0..cfg.sim_replicas as u64 {
                let run_seed = cfg.seed.wrapping_mul(0x9e37_79b9).wrapping_add((x as u64) << 20) + r;
                acc.push(chain.simulate_hitting_to_zero(x, run_seed));
            }
            let est = acc.estimate();
            (Some(est.value), Some(est.se))
        } else {
            (None, None)
        };
        t.push_row(vec![
            int(x),
            float(exact),
            opt_float(sim_mean),
            opt_float(sim_se),
            int(cfg.sim_replicas),
        ]);
    }
    Ok((t, 0))
}

fn moment_cells(m: &Moments<Scalar>) -> Vec<Cell> {
    vec![
        float(m.mean_f.value),
        float(m.mean_f.se),
        float(m.mean_f2.value),
        float(m.mean_f2.se),
        float(m.var_f.value),
        float(m.var_f.se),
        float(m.entropy_f2.value),
        float(m.entropy_f2.se),
        float(m.dirichlet.value),
        float(m.dirichlet.se),
        float(m.log_mean_f),
        float(m.log_var_f),
        float(m.log_entropy_f2),
        float(m.log_dirichlet),
        float(m.ess),
        int(m.samples),
    ]
}

const MOMENT_COLUMNS: [&str; 16] = [
    "mean_f",
    "mean_f_se",
    "mean_f2",
    "mean_f2_se",
    "var_f",
    "var_f_se",
    "entropy_f2",
    "entropy_f2_se",
    "dirichlet",
    "dirichlet_se",
    "log_mean_f",
    "log_var_f",
    "log_entropy_f2",
    "log_dirichlet",
    "ess",
    "samples",
];

fn ising_sample(cfg: &RunConfig) -> Result<(Table, u8), Failure> {
    let setup = lattice_setup(cfg)?;
    let plan = SamplingPlan { burnin: cfg.burnin, samples: cfg.samples, batches: cfg.batches };
    let m = estimate_moments(&setup.model, &setup.grid, &setup.tf, &plan, cfg.seed);
    let mut columns = vec!["side", "dim", "block_side", "m_star"];
    columns.extend(MOMENT_COLUMNS);
    columns.push("status");
    let mut t = Table::new("ising-sample", cfg.metadata(), columns);
    let mut row = vec![int(cfg.side), int(cfg.dim as usize), int(setup.block_side), float(setup.m_star)];
    row.extend(moment_cells(&m));
    row.push(text(if m.low_ess { "low_ess" } else { "ok" }));
    t.push_row(row);
    Ok((t, if m.low_ess { 2 } else { 0 }))
}

fn bound_cells(b: &BoundEstimate<Scalar>) -> Vec<Cell> {
    vec![
        float(b.value),
        float(b.se),
        float(b.log_value),
        float(b.numerator.value),
        float(b.denominator.value),
        float(b.ess),
    ]
}

fn ising_bound(cfg: &RunConfig) -> Result<(Table, u8), Failure> {
    let setup = lattice_setup(cfg)?;
    let plan = SamplingPlan { burnin: cfg.burnin, samples: cfg.samples, batches: cfg.batches };
    let m = estimate_moments(&setup.model, &setup.grid, &setup.tf, &plan, cfg.seed);
    let exact_ref = if setup.domain.sites() <= 12 {
        Some(exact_inverse_gap(&setup.model, &setup.domain)?)
    } else {
        None
    };
    let mut t = Table::new(
        "ising-bound",
        cfg.metadata(),
        vec![
            "bound",
            "value",
            "se",
            "log_value",
            "numerator",
            "denominator",
            "ess",
            "exact_inverse_gap",
            "status",
        ],
    );
    let mut exit = if m.low_ess { 2 } else { 0 };
    for (name, result) in
        [("inverse_gap", gap_lower_bound(&m)), ("log_sobolev", ls_lower_bound(&m))]
    {
        match result {
            Ok(b) => {
                let mut row = vec![text(name)];
                row.extend(bound_cells(&b));
                row.push(if name == "inverse_gap" { opt_float(exact_ref) } else { Cell::Empty });
                row.push(text(if m.low_ess { "low_ess" } else { "ok" }));
                t.push_row(row);
            }
            Err(CoreError::DegenerateDirichlet) => {
                let mut row = vec![text(name)];
                row.extend(std::iter::repeat(Cell::Empty).take(7));
                row.push(text("degenerate_dirichlet"));
                t.push_row(row);
                exit = 2;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((t, exit))
}

fn ising_couple(cfg: &RunConfig) -> Result<(Table, u8), Failure> {
    let domain = LatticeDomain::plus_boundary(cfg.dim, cfg.side);
    let model = RateModel::new(cfg.rate_model, cfg.beta);
    let times: Vec<Scalar> = (0..cfg.t_points)
        .map(|i| cfg.t_max * i as f64 / (cfg.t_points - 1) as f64)
        .collect();
    let replicas = replicas_or(cfg, 200);
    let points =
        agreement_experiment(&model, &domain, &times, replicas, cfg.equilibration, cfg.seed)?;
    let mut t = Table::new(
        "ising-couple",
        cfg.metadata(),
        vec!["time", "disagreement", "se", "replicas"],
    );
    for p in &points {
        t.push_row(vec![float(p.time), float(p.disagreement), float(p.se), int(p.replicas)]);
    }
    Ok((t, 0))
}

fn ising_droplet(cfg: &RunConfig) -> Result<(Table, u8), Failure> {
    let sides = if cfg.sides.is_empty() { vec![16, 32] } else { cfg.sides.clone() };
    let model = RateModel::new(cfg.rate_model, cfg.beta);
    let largest = *sides.iter().max().expect("sides must be nonempty");
    let reference_domain = LatticeDomain::plus_boundary(cfg.dim, largest);
    let m_star = resolve_m_star(&magnetization_rule(cfg), &model, &reference_domain)?;
    let mut plan = DropletPlan::new(cfg.lambda, m_star);
    plan.replicas = replicas_or(cfg, 6);
    plan.horizon_factor = cfg.horizon_factor;
    plan.grid_points = cfg.grid_points;
    plan.equilibrium_burnin = cfg.equilibration.max(1.0);
    if cfg.block_side > 0 {
        plan.block_side = Some(cfg.block_side);
    }
    let curves = droplet_relaxation_experiment(&model, cfg.dim, &sides, &plan, cfg.seed)?;
    let mut t = Table::new(
        "ising-droplet",
        cfg.metadata(),
        vec![
            "side",
            "block_side",
            "time",
            "mean_log_psi",
            "se_log_psi",
            "equilibrium",
            "equilibrium_se",
            "crossing_time",
        ],
    );
    for c in &curves {
        for (i, &time) in c.times.iter().enumerate() {
            t.push_row(vec![
                int(c.side),
                int(c.block_side),
                float(time),
                float(c.mean_log_psi[i]),
                float(c.se_log_psi[i]),
                float(c.equilibrium.value),
                float(c.equilibrium.se),
                opt_float(c.crossing_time),
            ]);
        }
        t.comment(match c.crossing_time {
            Some(ct) => format!("crossing side {} at t = {:.3}", c.side, ct),
            None => format!("no crossing for side {} inside the horizon", c.side),
        });
    }
    Ok((t, 0))
}
