use std::fmt::Write as _;
use std::process::ExitCode;

use driven_impurity::checks::{propagator_deviation, root_agreement, sw_error_exponent, sw_periods};
use driven_impurity::diagnostics::{classify_heating, entropy_time_series, pt_classify, PhaseLabel, DEFAULT_PT_TOL, DEFAULT_SLOPE_THRESHOLD, DEFAULT_WINDOW};
use driven_impurity::floquet_analytics::{average_energy_sp, su2_check, two_step_average_energy_sp, AverageEnergyMethod};
use driven_impurity::manybody_ed::{lowest_k_free_spectrum, SectorFloquetProblem};
use driven_impurity::{ChainParams, DriveSpec, Result};

use crate::config::{CliError, Layers};

const SUITES: [&str; 9] = ["su2", "eq4", "roots", "sw", "kato", "lowk", "mb", "pt", "heating"];

/// One invariant: measured value against an upper (`<=`) or lower (`>=`) bound.
struct Line {
    name: &'static str,
    measured: f64,
    bound: f64,
    upper: bool,
}

impl Line {
    fn at_most(name: &'static str, measured: f64, bound: f64) -> Self {
        Line { name, measured, bound, upper: true }
    }

    fn at_least(name: &'static str, measured: f64, bound: f64) -> Self {
        Line { name, measured, bound, upper: false }
    }

    fn pass(&self) -> bool {
        if self.upper {
            self.measured <= self.bound
        } else {
            self.measured >= self.bound
        }
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn suite(name: &str) -> Result<Vec<Line>> {
    let l50 = ChainParams::free(50)?;
    Ok(match name {
        "su2" => vec![Line::at_most("su2_algebra_deviation", su2_check(50)?.max_deviation(), 1e-10)],
        "eq4" => vec![Line::at_most("propagator_deviation_T2.5", propagator_deviation(&l50, 2.5, 1024)?, 1e-5)],
        "roots" => {
            let (count, worst) = root_agreement(&l50, 2.5)?;
            vec![
                Line::at_least("root_count", count as f64, 100.0),
                Line::at_most("root_residual", worst, 1e-9),
            ]
        }
        "sw" => vec![Line::at_least("sw_error_exponent", sw_error_exponent(&l50, &sw_periods())?, 2.7)],
        "kato" => {
            let a = average_energy_sp(&l50, 2.5, AverageEnergyMethod::Analytic)?;
            let n = average_energy_sp(&l50, 2.5, AverageEnergyMethod::Numeric)?;
            vec![Line::at_most("theta_analytic_vs_numeric", max_diff(a.theta(), n.theta()), 1e-8)]
        }
        "lowk" => {
            // 2L = 8 at half filling: 70 states, compared with brute-force subset sums
            let params = ChainParams::free(4)?;
            let theta = two_step_average_energy_sp(&params, &DriveSpec::two_step(2.5, 0.5)?)?.theta().to_vec();
            let mut brute: Vec<f64> = (0u32..1 << 8)
                .filter(|m| m.count_ones() == 4)
                .map(|m| (0..8).filter(|i| m >> i & 1 == 1).map(|i| theta[i]).sum())
                .collect();
            brute.sort_by(f64::total_cmp);
            let fast = lowest_k_free_spectrum(&theta, 4, 70)?;
            vec![Line::at_most("lowk_vs_enumeration", max_diff(&fast, &brute), 1e-12)]
        }
        "mb" => {
            let params = ChainParams::free(5)?;
            let drive = DriveSpec::two_step(2.2, 0.5)?;
            let theta = two_step_average_energy_sp(&params, &drive)?.theta().to_vec();
            let table = SectorFloquetProblem::new(&params, 0.5, 5)?.spectrum_at(2.2)?;
            let free = lowest_k_free_spectrum(&theta, 5, table.len())?;
            vec![
                Line::at_most("mb_theta_vs_free_subset_sums", max_diff(&table.theta(), &free), 1e-8),
                Line::at_most("mb_overlap_sum_defect", (table.total_weight() - 1.0).abs(), 1e-8),
            ]
        }
        "pt" => {
            let params = ChainParams::free(200)?;
            let sym = pt_classify(&params, &DriveSpec::non_hermitian(2.7, 2.0)?, DEFAULT_PT_TOL)?;
            let broken = pt_classify(&params, &DriveSpec::non_hermitian(2.8, 2.0)?, DEFAULT_PT_TOL)?;
            vec![
                Line::at_most("pt_score_T2.7_lambda2", sym.score, DEFAULT_PT_TOL),
                Line::at_least("pt_score_T2.8_lambda2", broken.score, DEFAULT_PT_TOL),
            ]
        }
        "heating" => {
            let params = ChainParams::free(200)?;
            let mut lines = Vec::new();
            for (t, name) in [(2.5, "heating_slope_T2.5"), (4.2, "heating_slope_T4.2")] {
                let series = entropy_time_series(&params, &DriveSpec::two_step(t, 0.5)?, DEFAULT_WINDOW.1, 1)?;
                let p = classify_heating(&series, DEFAULT_WINDOW, DEFAULT_SLOPE_THRESHOLD)?;
                debug_assert_eq!(p.label == PhaseLabel::Heating, p.score > DEFAULT_SLOPE_THRESHOLD);
                lines.push(if t < 3.0 {
                    Line::at_most(name, p.score, DEFAULT_SLOPE_THRESHOLD)
                } else {
                    Line::at_least(name, p.score, DEFAULT_SLOPE_THRESHOLD)
                });
            }
            lines
        }
        _ => unreachable!("suite names are checked first"),
    })
}

pub fn run(layers: &mut Layers) -> std::result::Result<ExitCode, CliError> {
    let which = layers.string("suite", "all")?;
    let names: Vec<&str> = match which.as_str() {
        "all" => SUITES.to_vec(),
        s => match SUITES.iter().find(|n| **n == s) {
            Some(n) => vec![*n],
            None => return Err(CliError::Config(format!("unknown suite `{s}` (all | {})", SUITES.join(" | ")))),
        },
    };
    let mut out = format!("# driven-impurity {}\n# command = verify\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in layers.echo() {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out.push_str("name,measured,bound,pass\n");
    let mut ok = true;
    for name in names {
        match suite(name) {
            Ok(lines) => {
                for line in lines {
                    let cmp = if line.upper { "<=" } else { ">=" };
                    ok &= line.pass();
                    let _ = writeln!(out, "{},{:e},{cmp}{:e},{}", line.name, line.measured, line.bound, line.pass());
                }
            }
            Err(e) => {
                ok = false;
                let _ = writeln!(out, "{name},{},,false", e.name());
            }
        }
    }
    crate::commands::write_output(layers, &out)?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
