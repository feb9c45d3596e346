use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use driven_impurity::diagnostics::{classify_heating, gap_curve, pt_classify, PhaseLabel, PhasePoint};
use driven_impurity::floquet_analytics::{average_energy_sp, floquet_hamiltonian_exact, kato_hamiltonian_sp, two_step_average_energy_sp, AverageEnergyMethod, KatoSP};
use driven_impurity::gaussian::{entanglement_profile, evolve as step, half_chain_entropy, initial_state, segment_propagator};
use driven_impurity::manybody_ed::{lowest_k_free_spectrum, lowest_k_free_spectrum_all_fillings, SectorFloquetProblem};
use driven_impurity::{diagnostics, ChainParams, DriveFamily, DriveSpec};

use crate::config::{config_err, grid, CliError, CliResult, Layers};

/// `# tool version`, `# command`, then every resolved knob.
fn preamble(command: &str, layers: &Layers) -> String {
    let mut s = format!("# driven-impurity {}\n# command = {command}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in layers.echo() {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

pub fn write_output(layers: &Layers, text: &str) -> CliResult<()> {
    match layers.output() {
        Some(path) => {
            let mut f = File::create(&path).map_err(|e| CliError::Config(format!("cannot create {path}: {e}")))?;
            f.write_all(text.as_bytes())?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_family(s: &str) -> CliResult<DriveFamily> {
    s.parse::<DriveFamily>().map_err(config_err)
}

fn method_of(s: &str) -> CliResult<AverageEnergyMethod> {
    match s {
        "analytic" => Ok(AverageEnergyMethod::Analytic),
        "numeric" => Ok(AverageEnergyMethod::Numeric),
        other => Err(CliError::Config(format!("unknown method `{other}` (analytic | numeric)"))),
    }
}

fn positive(name: &str, v: usize) -> CliResult<usize> {
    if v == 0 {
        return Err(CliError::Config(format!("`{name}` must be >= 1")));
    }
    Ok(v)
}

/// Maps `f` over `items` on `threads` workers; results (and the first
/// error) come back in input order whatever the completion order.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> CliResult<R> + Sync,
{
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<CliResult<R>>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.min(items.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every slot is filled"))
        .collect()
}

pub fn evolve(layers: &mut Layers) -> CliResult<()> {
    let family = parse_family(&layers.string("family", "two-step")?)?;
    let period = layers.f64("T", 2.5)?;
    let lambda = layers.f64("lambda", 0.5)?;
    let l = layers.usize("L", 200)?;
    let cycles = layers.usize("cycles", 300)?;
    let n_sub = positive("n-sub", layers.usize("n-sub", 256)?)?;
    let profile = layers.bool("profile", false)?;
    let samples = positive("samples", layers.usize("samples", 1)?)?;
    let every = positive("every", layers.usize("every", 1)?)?;
    let offset = layers.f64("gauge-offset", 0.0)?;

    let params = ChainParams::free(l).map_err(config_err)?;
    let mut drive = DriveSpec::new(family, period, lambda).map_err(config_err)?;
    if offset != 0.0 {
        drive = drive.with_gauge_offset(offset).map_err(config_err)?;
    }

    let dt = period / samples as f64;
    let pieces = (0..samples)
        .map(|k| segment_propagator(&params, &drive, k as f64 * dt, (k + 1) as f64 * dt, n_sub))
        .collect::<driven_impurity::Result<Vec<_>>>()?;
    let renormalize = pieces.iter().any(|p| !p.is_unitary());

    let mut out = preamble("evolve", layers);
    out.push_str("cycle,t,cut,S_nats\n");
    let total = cycles * samples;
    let mut state = initial_state(&params)?;
    for m in 0..=total {
        if m > 0 {
            state = step(&state, &pieces[(m - 1) % samples], renormalize)?;
        }
        if m % every != 0 && m != total {
            continue;
        }
        let cycle = m as f64 / samples as f64;
        let t = m as f64 * dt;
        if profile {
            for (cut, s) in entanglement_profile(&state)?.cuts() {
                let _ = writeln!(out, "{cycle},{t},{cut},{s}");
            }
        } else {
            let _ = writeln!(out, "{cycle},{t},{l},{}", half_chain_entropy(&state)?);
        }
    }
    write_output(layers, &out)
}

fn sites_and_half(layers: &mut Layers, default_sites: usize) -> CliResult<(usize, usize)> {
    let l = layers.opt_usize("L")?;
    let sites = layers.opt_usize("sites")?;
    let sites = match (sites, l) {
        (Some(s), Some(l)) if s != 2 * l => {
            return Err(CliError::Config(format!("--sites {s} contradicts --L {l}")));
        }
        (Some(s), _) => s,
        (None, Some(l)) => 2 * l,
        (None, None) => default_sites,
    };
    if sites % 2 != 0 {
        return Err(CliError::Config(format!("--sites must be even, got {sites}")));
    }
    Ok((sites, sites / 2))
}

fn sp_rows(out: &mut String, kato: &KatoSP, method: &str) {
    for (n, (theta, e)) in kato.theta().iter().zip(kato.quasienergies()).enumerate() {
        let _ = writeln!(out, "{n},{e},{theta},,{method}");
    }
}

pub fn spectrum(layers: &mut Layers) -> CliResult<()> {
    let mode = layers.string("mode", "roots")?;
    let default_sites = match mode.as_str() {
        "mb" => 14,
        "free-lowk" => 50,
        _ => 100,
    };
    let (sites, l) = sites_and_half(layers, default_sites)?;
    let period = layers.f64("T", 2.5)?;
    let lambda = layers.f64("lambda", 0.5)?;
    let header = "n,quasienergy,theta,overlap_w,method";
    let mut body = String::new();
    match mode.as_str() {
        "roots" => {
            let compare = layers.bool("compare", false)?;
            let params = ChainParams::free(l).map_err(config_err)?;
            check_period(period)?;
            let kato = average_energy_sp(&params, period, AverageEnergyMethod::Analytic)?;
            let exact = if compare { floquet_hamiltonian_exact(&params, period)?.spectrum()? } else { Vec::new() };
            body.push_str(header);
            body.push_str(if compare { ",residual\n" } else { "\n" });
            for (n, (theta, e)) in kato.theta().iter().zip(kato.quasienergies()).enumerate() {
                let _ = write!(body, "{n},{e},{theta},,roots");
                if compare {
                    let r = exact.iter().map(|s| (s - e).abs()).fold(f64::INFINITY, f64::min);
                    let _ = write!(body, ",{r}");
                }
                body.push('\n');
            }
        }
        "sp" => {
            let family = parse_family(&layers.string("family", "harmonic")?)?;
            let method = layers.string("method", "analytic")?;
            let params = ChainParams::free(l).map_err(config_err)?;
            body.push_str(header);
            body.push('\n');
            match family {
                DriveFamily::Harmonic => {
                    check_period(period)?;
                    let kato = average_energy_sp(&params, period, method_of(&method)?)?;
                    sp_rows(&mut body, &kato, &format!("sp-{method}"));
                }
                DriveFamily::TwoStep => {
                    let drive = DriveSpec::two_step(period, lambda).map_err(config_err)?;
                    sp_rows(&mut body, &two_step_average_energy_sp(&params, &drive)?, "sp-two-step");
                }
                DriveFamily::NonHermitianTwoStep => {
                    return Err(CliError::Config("average energies need a Hermitian drive".into()));
                }
            }
        }
        "mb" => {
            let n = layers.opt_usize("N")?.unwrap_or(l);
            let delta = layers.f64("delta", 0.0)?;
            let list = layers.list("T-list")?;
            let params = ChainParams::new(l, delta).map_err(config_err)?;
            let periods = list.clone().unwrap_or_else(|| vec![period]);
            for &t in &periods {
                DriveSpec::two_step(t, lambda).map_err(config_err)?;
            }
            if n > sites {
                return Err(CliError::Config(format!("N = {n} exceeds {sites} sites")));
            }
            let problem = SectorFloquetProblem::new(&params, lambda, n)?;
            if list.is_some() {
                body.push_str("T,");
            }
            body.push_str(header);
            body.push_str(",grey\n");
            for &t in &periods {
                let table = problem.spectrum_at(t)?;
                for r in table.records() {
                    if list.is_some() {
                        let _ = write!(body, "{t},");
                    }
                    let _ = writeln!(body, "{},{},{},{},mb,{}", r.n, r.quasienergy, r.theta, r.overlap, u8::from(r.is_grey()));
                }
            }
        }
        "free-lowk" => {
            let n = layers.opt_usize("N")?.unwrap_or(l);
            let k = layers.usize("K", 100_000)?;
            let all = layers.bool("all-fillings", false)?;
            let params = ChainParams::free(l).map_err(config_err)?;
            let drive = DriveSpec::two_step(period, lambda).map_err(config_err)?;
            let sp = two_step_average_energy_sp(&params, &drive)?;
            let values = if all {
                lowest_k_free_spectrum_all_fillings(sp.theta(), k)?
            } else {
                lowest_k_free_spectrum(sp.theta(), n, k)?
            };
            body.push_str(header);
            body.push('\n');
            for (i, v) in values.iter().enumerate() {
                let _ = writeln!(body, "{i},,{v},,free-lowk");
            }
        }
        "kato-grid" => {
            let method = layers.string("method", "numeric")?;
            let params = ChainParams::free(l).map_err(config_err)?;
            check_period(period)?;
            let kato = match method_of(&method)? {
                AverageEnergyMethod::Numeric => kato_hamiltonian_sp(&params, period)?,
                m => average_energy_sp(&params, period, m)?,
            };
            let (anti, rest) = kato.anti_diagonal_contrast();
            let _ = writeln!(body, "# off_tridiagonal_weight = {}", kato.off_tridiagonal_weight());
            let _ = writeln!(body, "# off_tridiagonal_magnitude = {}", kato.off_tridiagonal_magnitude());
            let _ = writeln!(body, "# anti_diagonal_mean = {anti}");
            let _ = writeln!(body, "# other_off_diagonal_mean = {rest}");
            body.push_str("i,j,abs_HK\n");
            for (i, j, m) in kato.magnitude_grid() {
                let _ = writeln!(body, "{i},{j},{m}");
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown mode `{other}` (roots | sp | mb | free-lowk | kato-grid)"
            )))
        }
    }
    let mut out = preamble("spectrum", layers);
    out.push_str(&body);
    write_output(layers, &out)
}

fn check_period(period: f64) -> CliResult<()> {
    if period > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("period T must be > 0, got {period}")))
    }
}

fn two_step_family(period: f64, lambda: f64) -> CliResult<DriveSpec> {
    if lambda > 1.0 {
        DriveSpec::non_hermitian(period, lambda).map_err(config_err)
    } else {
        DriveSpec::two_step(period, lambda).map_err(config_err)
    }
}

fn point_rows(out: &mut String, points: &[PhasePoint]) {
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.period, p.lambda, p.label, p.score);
    }
}

pub fn phase(layers: &mut Layers) -> CliResult<()> {
    let kind = layers.string("kind", "pt")?;
    let l = layers.usize("L", 200)?;
    let periods = grid("T", layers.f64("T-min", 2.0)?, layers.f64("T-max", 4.0)?, layers.f64("T-step", 0.05)?)?;
    let lambdas = grid(
        "lambda",
        layers.f64("lambda-min", 1.0)?,
        layers.f64("lambda-max", 2.4)?,
        layers.f64("lambda-step", 0.05)?,
    )?;
    let threads = layers.usize("threads", 1)?;
    let params = ChainParams::free(l).map_err(config_err)?;
    let mut jobs = Vec::with_capacity(periods.len() * lambdas.len());
    for &lambda in &lambdas {
        for &t in &periods {
            jobs.push((t, lambda));
        }
    }
    let mut out;
    match kind.as_str() {
        "pt" => {
            let tol = layers.f64("pt-tol", diagnostics::DEFAULT_PT_TOL)?;
            for &(t, lambda) in &jobs {
                two_step_family(t, lambda)?;
            }
            let points = parallel_map(&jobs, threads, |&(t, lambda)| {
                Ok(pt_classify(&params, &two_step_family(t, lambda)?, tol)?)
            })?;
            out = preamble("phase", layers);
            let _ = writeln!(out, "# reference_T = {}", std::f64::consts::PI);
            out.push_str("T,lambda,label,score\n");
            point_rows(&mut out, &points);
            for (i, &lambda) in lambdas.iter().enumerate() {
                let row = &points[i * periods.len()..(i + 1) * periods.len()];
                let shown = match row.iter().position(|p| p.label == PhaseLabel::PTBroken) {
                    Some(0) => "broken at T_min".to_string(),
                    Some(k) => format!("{}", 0.5 * (row[k - 1].period + row[k].period)),
                    None => "none".to_string(),
                };
                let _ = writeln!(out, "# boundary lambda = {lambda} T_pt = {shown}");
            }
        }
        "heating" => {
            let family = parse_family(&layers.string("family", "two-step")?)?;
            let cycles = layers.usize("cycles", 60)?;
            let n_sub = positive("n-sub", layers.usize("n-sub", 256)?)?;
            let ws = layers.usize("window-start", diagnostics::DEFAULT_WINDOW.0)?;
            let we = layers.usize("window-end", diagnostics::DEFAULT_WINDOW.1)?;
            let sc = layers.f64("slope-threshold", diagnostics::DEFAULT_SLOPE_THRESHOLD)?;
            if we >= cycles + 1 || ws >= we {
                return Err(CliError::Config(format!(
                    "fit window [{ws}, {we}] must lie inside the {cycles} simulated cycles"
                )));
            }
            let make = |t: f64, lambda: f64| -> CliResult<DriveSpec> {
                match family {
                    DriveFamily::Harmonic => DriveSpec::harmonic(t).map_err(config_err),
                    _ => two_step_family(t, lambda),
                }
            };
            for &(t, lambda) in &jobs {
                make(t, lambda)?;
            }
            let points = parallel_map(&jobs, threads, |&(t, lambda)| {
                let drive = make(t, lambda)?;
                let series = diagnostics::entropy_time_series(&params, &drive, cycles, n_sub)?;
                Ok(classify_heating(&series, (ws, we), sc)?)
            })?;
            out = preamble("phase", layers);
            let _ = writeln!(out, "# reference_T = {}", std::f64::consts::PI);
            out.push_str("T,lambda,label,score\n");
            point_rows(&mut out, &points);
        }
        other => return Err(CliError::Config(format!("unknown kind `{other}` (pt | heating)"))),
    }
    write_output(layers, &out)
}

pub fn gap(layers: &mut Layers) -> CliResult<()> {
    let family = parse_family(&layers.string("family", "harmonic")?)?;
    let lambda = layers.f64("lambda", 0.5)?;
    let l = layers.usize("L", 200)?;
    let periods = grid("T", layers.f64("T-min", 0.2)?, layers.f64("T-max", 4.2)?, layers.f64("T-step", 0.1)?)?;
    let threads = layers.usize("threads", 1)?;
    if family == DriveFamily::NonHermitianTwoStep {
        return Err(CliError::Config("gap curves need a Hermitian drive".into()));
    }
    if family == DriveFamily::TwoStep {
        DriveSpec::two_step(1.0, lambda).map_err(config_err)?;
    }
    let params = ChainParams::free(l).map_err(config_err)?;
    let gaps = parallel_map(&periods, threads, |&t| Ok(gap_curve(&params, family, lambda, &[t])?[0]))?;
    let mut out = preamble("gap", layers);
    out.push_str("T,gap\n");
    for (t, g) in gaps {
        let _ = writeln!(out, "{t},{g}");
    }
    write_output(layers, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<usize> = (0..50).collect();
        let got = parallel_map(&items, 4, |&i| Ok(i * i)).unwrap();
        assert_eq!(got, items.iter().map(|i| i * i).collect::<Vec<_>>());
        let err = parallel_map(&items, 3, |&i| if i % 7 == 3 { Err(CliError::Config(format!("{i}"))) } else { Ok(i) });
        assert!(matches!(err, Err(CliError::Config(m)) if m == "3"));
    }
}
