use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sae_core::acceptance;
use sae_core::exact_states::qes_wronskian_table;
use sae_core::potentials::Potential;
use sae_core::scattering::{extract_alpha_theta, locate_tt_energy, solve_scattering, SolverConfig};
use sae_core::spectrum::{build_spectrum, PhaseSource, Scheme, SpectrumSpec};
use sae_core::wkb::{phase_triple, total_transmission_energies, wkb_phase};
use sae_core::{par_map, Error};

mod output;

use output::{emit, Format};

#[derive(Parser, Debug)]
#[command(name = "sae", version, about = "WKB and numerical scattering for unbounded-below potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Table of (phi, alpha, theta) over an energy grid.
    Phases {
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Method::Wkb)]
        method: Method,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Reflection and transmission amplitudes.
    Scatter {
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Quantized spectrum of both parity sectors.
    Spectrum {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Two)]
        scheme: SchemeArg,
        /// Even reference; for `tt` the seed of the total-transmission search.
        #[arg(long)]
        eref_plus: Option<f64>,
        #[arg(long)]
        eref_minus: Option<f64>,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        n_min: i32,
        #[arg(long, default_value_t = 5, allow_negative_numbers = true)]
        n_max: i32,
        #[arg(long, value_enum, default_value_t = Method::Numeric)]
        method: Method,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Total-transmission energies of the power law.
    TtModes {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, default_value_t = 3)]
        count: usize,
        /// Also locate the numerical |R|^2 minima.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Wronskian limits of the exact QES states.
    Wronskian {
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Classical time to reach infinity.
    FlightTime {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, allow_negative_numbers = true)]
        energy: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        from: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the acceptance criteria.
    Verify {
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<u8>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Family {
    Power,
    Qes,
    Coshkar,
}

#[derive(Args, Debug)]
struct PotentialArgs {
    #[arg(long, value_enum, default_value_t = Family::Power)]
    potential: Family,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    a1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
}

impl PotentialArgs {
    fn build(&self) -> Result<Potential, CliError> {
        let given = |name: &str, v: bool| if v { Some(name.to_string()) } else { None };
        let foreign: Vec<String> = match self.potential {
            Family::Power => [given("b", self.b.is_some()), given("n", self.n.is_some()), given("a1", self.a1.is_some()), given("nu", self.nu.is_some())],
            Family::Qes => [given("a", self.a.is_some()), given("p", self.p.is_some()), given("a1", self.a1.is_some()), given("nu", self.nu.is_some())],
            Family::Coshkar => [given("a", self.a.is_some()), given("p", self.p.is_some()), given("b", self.b.is_some()), given("n", self.n.is_some())],
        }
        .into_iter()
        .flatten()
        .collect();
        if !foreign.is_empty() {
            return Err(CliError::Config(format!(
                "--{} does not apply to --potential {}",
                foreign.join(", --"),
                self.potential.to_possible_value().expect("no skipped variants").get_name()
            )));
        }
        let pot = match self.potential {
            Family::Power => Potential::power_law(self.a.unwrap_or(1.0), self.p.unwrap_or(2.0)),
            Family::Qes => Potential::qes(self.b.unwrap_or(2.0), self.n.unwrap_or(2)),
            Family::Coshkar => Potential::cosh_kar(self.a1.unwrap_or(1.0), self.nu.unwrap_or(1.0)),
        };
        Ok(pot?)
    }
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["emin", "emax", "samples"])]
    energy: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    emin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    emax: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

impl GridArgs {
    fn energies(&self) -> Result<Vec<f64>, CliError> {
        if let Some(e) = self.energy {
            return Ok(vec![e]);
        }
        let (Some(lo), Some(hi)) = (self.emin, self.emax) else {
            return Err(CliError::Config("give --energy or both --emin and --emax".into()));
        };
        let n = self.samples.unwrap_or(51);
        if !(lo < hi) || n < 2 {
            return Err(CliError::Config("need --emin < --emax and --samples >= 2".into()));
        }
        Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
    }

    fn describe(&self) -> Value {
        json!({"energy": self.energy, "emin": self.emin, "emax": self.emax, "samples": self.samples})
    }
}

#[derive(Args, Debug)]
struct TolArgs {
    /// WKB validity threshold for the truncation radius.
    #[arg(long, default_value_t = 1e-3)]
    tol_eps: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol_ode: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_unitarity: f64,
    #[arg(long, default_value_t = 1e-2)]
    tol_readoff: f64,
    /// Relative degeneracy tolerance for spectra.
    #[arg(long, default_value_t = 1e-4)]
    tol_degeneracy: f64,
}

impl TolArgs {
    fn solver(&self) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            eps: self.tol_eps,
            ode_tol: self.tol_ode,
            unitarity_tol: self.tol_unitarity,
            readoff_tol: self.tol_readoff,
        };
        let positive = [cfg.eps, cfg.ode_tol, cfg.unitarity_tol, cfg.readoff_tol, self.tol_degeneracy];
        if positive.iter().any(|t| !(*t > 0.0)) || cfg.eps > 0.1 {
            return Err(CliError::Config("tolerances must be positive and --tol-eps at most 0.1".into()));
        }
        Ok(cfg)
    }

    fn describe(&self) -> Value {
        json!({
            "eps": self.tol_eps,
            "ode": self.tol_ode,
            "unitarity": self.tol_unitarity,
            "readoff": self.tol_readoff,
            "degeneracy": self.tol_degeneracy,
        })
    }
}

#[derive(Args, Debug)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Method {
    Numeric,
    Wkb,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Numeric => "numeric",
            Method::Wkb => "wkb",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum SchemeArg {
    Two,
    One,
    Tt,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numeric(Error),
    Io(std::io::Error),
    /// Verification ran but some criteria failed.
    Failed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_domain() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numeric(e)
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Failed) => ExitCode::from(1),
    }
}

fn document(pot: &Potential, config: Value, results: Value) -> Value {
    json!({"potential": pot, "config": config, "results": results})
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Phases {
            pot,
            grid,
            method,
            tol,
            out,
        } => {
            let potential = pot.build()?;
            let energies = grid.energies()?;
            let cfg = tol.solver()?;
            let rows = par_map(&energies, |&e| -> sae_core::Result<[f64; 4]> {
                match method {
                    Method::Wkb => {
                        let t = phase_triple(&potential, e)?;
                        Ok([e, t.phi, t.alpha, t.theta])
                    }
                    Method::Numeric => {
                        let amps = solve_scattering(&potential, e, &cfg)?;
                        let at = extract_alpha_theta(&amps, cfg.unitarity_tol)?;
                        Ok([e, wkb_phase(&potential, e)?, at.alpha, at.theta])
                    }
                }
            })?;
            let format = out.format.unwrap_or(Format::Csv);
            let doc = match format {
                Format::Csv => None,
                Format::Json => Some(document(
                    &potential,
                    json!({"command": "phases", "method": method.name(), "grid": grid.describe(), "tolerances": tol.describe()}),
                    Value::Array(
                        rows.iter()
                            .map(|r| json!({"energy": r[0], "phi": r[1], "alpha": r[2], "theta": r[3], "method": method.name()}))
                            .collect(),
                    ),
                )),
            };
            match doc {
                Some(doc) => emit(&out.out, &doc),
                None => output::emit_phase_csv(&out.out, &rows, method.name()),
            }
        }
        Command::Scatter { pot, grid, tol, out } => {
            let potential = pot.build()?;
            let energies = grid.energies()?;
            let cfg = tol.solver()?;
            let results = par_map(&energies, |&e| -> sae_core::Result<Value> {
                let amps = solve_scattering(&potential, e, &cfg)?;
                let at = extract_alpha_theta(&amps, cfg.unitarity_tol).ok();
                Ok(json!({
                    "energy": e,
                    "r": {"re": amps.r.re, "im": amps.r.im},
                    "t": {"re": amps.t.re, "im": amps.t.im},
                    "alpha": at.map(|a| a.alpha),
                    "theta": at.map(|a| a.theta),
                    "residual_unitarity": amps.residual_unitarity,
                    "x_max": amps.x_max,
                }))
            })?;
            let results = if grid.energy.is_some() { results[0].clone() } else { Value::Array(results) };
            json_only(&out)?;
            let doc = document(
                &potential,
                json!({"command": "scatter", "grid": grid.describe(), "tolerances": tol.describe()}),
                results,
            );
            emit(&out.out, &doc)
        }
        Command::Spectrum {
            pot,
            scheme,
            eref_plus,
            eref_minus,
            n_min,
            n_max,
            method,
            tol,
            out,
        } => {
            let potential = pot.build()?;
            let cfg = tol.solver()?;
            let scheme = match scheme {
                SchemeArg::Two => Scheme::TwoParameter,
                SchemeArg::One => Scheme::OneParameter,
                SchemeArg::Tt => Scheme::TtReference,
            };
            let e_plus = match (eref_plus, scheme, potential) {
                (Some(e), _, _) => e,
                (None, Scheme::TtReference, Potential::PowerLaw { a, p }) => total_transmission_energies(a, p, 1)?[0],
                _ => return Err(CliError::Config("--eref-plus is required".into())),
            };
            let e_minus = match (eref_minus, scheme) {
                (Some(e), _) => e,
                (None, Scheme::TwoParameter) => {
                    return Err(CliError::Config("--eref-minus is required for --scheme two".into()))
                }
                (None, _) => f64::NAN,
            };
            let spec = SpectrumSpec {
                potential,
                e_ref_plus: e_plus,
                e_ref_minus: e_minus,
                n_min,
                n_max,
                scheme,
                phase_source: match method {
                    Method::Numeric => PhaseSource::Numeric,
                    Method::Wkb => PhaseSource::WkbEstimate,
                },
                degeneracy_tol: tol.tol_degeneracy,
                solver: cfg,
            };
            let res = build_spectrum(&spec)?;
            json_only(&out)?;
            let levels: Vec<Value> = res
                .levels
                .iter()
                .map(|l| {
                    json!({
                        "n": l.n,
                        "parity": l.parity,
                        "energy": l.energy,
                        "degenerate_with": l.degenerate_with,
                        "ambiguous": l.ambiguous,
                    })
                })
                .collect();
            let doc = document(
                &potential,
                json!({
                    "command": "spectrum",
                    "scheme": res.scheme,
                    "method": method.name(),
                    "eref_plus": eref_plus,
                    "eref_minus": eref_minus,
                    "n_min": n_min,
                    "n_max": n_max,
                    "tolerances": tol.describe(),
                }),
                json!({
                    "scheme": res.scheme,
                    "reference": {"plus": res.e_ref_plus, "minus": res.e_ref_minus},
                    "levels": levels,
                    "degenerate_pairs": res.degenerate_pairs,
                }),
            );
            emit(&out.out, &doc)
        }
        Command::TtModes {
            pot,
            count,
            numeric,
            tol,
            out,
        } => {
            let potential = pot.build()?;
            let Potential::PowerLaw { a, p } = potential else {
                return Err(CliError::Config("tt-modes needs --potential power".into()));
            };
            let energies = total_transmission_energies(a, p, count)?;
            let mut results = json!({"energies": energies});
            if numeric {
                let cfg = tol.solver()?;
                let minima = par_map(&energies, |&e| -> sae_core::Result<Value> {
                    let half = 0.25 * e.abs().max(1.0);
                    let (at, r2) = locate_tt_energy(&potential, e - half, e + half, &cfg)?;
                    Ok(json!({"energy": at, "reflection": r2}))
                })?;
                results["numeric"] = Value::Array(minima);
            }
            json_only(&out)?;
            let doc = document(
                &potential,
                json!({"command": "tt-modes", "count": count, "numeric": numeric, "tolerances": tol.describe()}),
                results,
            );
            emit(&out.out, &doc)
        }
        Command::Wronskian { pot, out } => {
            let potential = pot.build()?;
            let Potential::Qes { b, n: 2 } = potential else {
                return Err(CliError::Config("wronskian needs --potential qes with --n 2".into()));
            };
            let table = qes_wronskian_table(b)?;
            json_only(&out)?;
            let rows: Vec<Value> = table
                .iter()
                .map(|w| {
                    json!({
                        "pair": [w.pair.0, w.pair.1],
                        "limit_plus": w.limit_plus,
                        "limit_minus": w.limit_minus,
                        "equal": w.equal,
                        "closed_form": w.closed_form,
                    })
                })
                .collect();
            let doc = document(&potential, json!({"command": "wronskian"}), Value::Array(rows));
            emit(&out.out, &doc)
        }
        Command::FlightTime {
            pot,
            energy,
            from,
            out,
        } => {
            let potential = pot.build()?;
            let t = potential.flight_time(energy, from)?;
            json_only(&out)?;
            let doc = document(
                &potential,
                json!({"command": "flight-time", "energy": energy, "from": from}),
                json!(t),
            );
            emit(&out.out, &doc)
        }
        Command::Verify { criterion, out } => {
            let reports = match criterion {
                Some(id) if (1..=acceptance::CRITERIA as u8).contains(&id) => vec![acceptance::run_criterion(id)],
                Some(id) => return Err(CliError::Config(format!("no criterion {id}"))),
                None => (1..=acceptance::CRITERIA as u8)
                    .map(|id| {
                        let r = acceptance::run_criterion(id);
                        eprintln!("{r}");
                        r
                    })
                    .collect(),
            };
            if criterion.is_some() {
                eprintln!("{}", reports[0]);
            }
            let all = reports.iter().all(|r| r.passed);
            if out.out.is_some() || out.format == Some(Format::Json) {
                json_only(&out)?;
                let value = serde_json::to_value(&reports).expect("reports serialize");
                emit(&out.out, &json!({"config": {"command": "verify"}, "results": value}))?;
            }
            if all {
                Ok(())
            } else {
                Err(CliError::Failed)
            }
        }
    }
}

fn json_only(out: &OutArgs) -> Result<(), CliError> {
    match out.format {
        Some(Format::Csv) => Err(CliError::Config("this command only writes JSON".into())),
        _ => Ok(()),
    }
}
