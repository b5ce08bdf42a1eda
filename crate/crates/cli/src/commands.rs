use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use szego_core::experiments::{empirical_average_j1_sq, instability_run, average_j1_sq, j1_closed_form, perturbed_blaschke};
use szego_core::flow::{
    conserved_report, exact_trajectory, integrate_adaptive, integrate_direct_sampled, AdaptiveTruncation,
};
use szego_core::hankel::spectral_data;
use szego_core::inverse_hankel::{
    build_selfadjoint, build_symbol, verify_signed_eigenvalues, verify_singular_values, SignedSpectrumReport,
    SingularValueReport,
};
use szego_core::suites::{run_case, summarize, Suite};
use szego_core::symbol::{DEFAULT_LENGTH, DEFAULT_TAIL_TOL};
use szego_core::transform::{inverse_model, reconstruct_auto, reconstruct_coeffs, reconstruct_rational};
use szego_core::{Complex64, ConservedReport, FourierSymbol, InverseModel, RationalSymbol, SpectralCoordinates};

use crate::error::{CliError, CliResult};
use crate::io::{create, emit, read_json, read_symbol, to_json, with_suffix};
use crate::Method;

pub fn spectrum(input: &Path, m: usize, rank_tol: f64, gap_tol: f64, out: Option<&Path>) -> CliResult<()> {
    let u = read_symbol(input, m, DEFAULT_TAIL_TOL)?;
    let s = spectral_data(&u, rank_tol, gap_tol)?;
    emit(out, &to_json(&s)?)
}

#[derive(Deserialize)]
struct AngleTargets {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    phi: Vec<f64>,
    theta: Vec<f64>,
}

#[derive(Serialize)]
struct Reconstruction<'a> {
    model: &'a InverseModel,
    rational: &'a RationalSymbol,
    symbol: &'a FourierSymbol,
}

pub fn reconstruct(input: &Path, m: Option<usize>, out: Option<&Path>) -> CliResult<()> {
    let t: AngleTargets = read_json(input)?;
    let s = SpectralCoordinates::from_actions_angles(t.lambda, t.mu, t.phi, t.theta)?;
    let model = inverse_model(&s)?;
    let rational = reconstruct_rational(&model)?;
    let symbol = match m {
        Some(m) => reconstruct_coeffs(&model, m)?,
        None => reconstruct_auto(&model, DEFAULT_LENGTH, DEFAULT_TAIL_TOL)?,
    };
    emit(out, &to_json(&Reconstruction { model: &model, rational: &rational, symbol: &symbol })?)
}

#[derive(Serialize)]
struct EvolveManifest {
    method: &'static str,
    t_end: f64,
    dt: f64,
    every: usize,
    length: usize,
    samples: usize,
    last_time: f64,
    files: BTreeMap<&'static str, String>,
    conserved: BTreeMap<&'static str, ConservedReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_deviation: Option<f64>,
}

pub fn evolve(input: &Path, t_end: f64, method: Method, dt: f64, every: usize, m: usize, out: &Path) -> CliResult<()> {
    let u0 = read_symbol(input, m, DEFAULT_TAIL_TOL)?;
    let every = every.max(1);
    let mut files = BTreeMap::new();
    let mut conserved = BTreeMap::new();
    let mut max_deviation = None;

    let write = |name: &str, tr: &szego_core::TrajectoryRecord| -> CliResult<String> {
        let path = with_suffix(out, name);
        let mut w = create(&path)?;
        tr.write_csv(&mut w)?;
        w.flush()?;
        Ok(path.display().to_string())
    };

    let (samples, last_time) = match method {
        Method::Exact => {
            let times = thinned_times(t_end, dt, every)?;
            let tr = exact_trajectory(&u0, &times)?;
            conserved.insert("exact", conserved_report(&tr));
            files.insert("exact", write(".csv", &tr)?);
            (tr.len(), *tr.times.last().unwrap_or(&0.0))
        }
        Method::Direct => {
            let tr = integrate_direct_sampled(&u0, t_end, dt, every)?;
            conserved.insert("direct", conserved_report(&tr));
            files.insert("direct", write(".csv", &tr)?);
            (tr.len(), *tr.times.last().unwrap_or(&0.0))
        }
        Method::Both => {
            let mut direct = integrate_direct_sampled(&u0, t_end, dt, every)?;
            let exact = exact_trajectory(&u0, &direct.times)?;
            max_deviation = Some(direct.attach_deviation(&exact)?);
            conserved.insert("exact", conserved_report(&exact));
            conserved.insert("direct", conserved_report(&direct));
            files.insert("exact", write(".exact.csv", &exact)?);
            files.insert("direct", write(".direct.csv", &direct)?);
            (direct.len(), *direct.times.last().unwrap_or(&0.0))
        }
    };
    let manifest = EvolveManifest {
        method: match method {
            Method::Exact => "exact",
            Method::Direct => "direct",
            Method::Both => "both",
        },
        t_end,
        dt,
        every,
        length: u0.len(),
        samples,
        last_time,
        files,
        conserved,
        max_deviation,
    };
    emit(Some(&with_suffix(out, ".json")), &to_json(&manifest)?)
}

/// The direct integrator's recording times: every `every`-th step and the last.
fn thinned_times(t_end: f64, dt: f64, every: usize) -> CliResult<Vec<f64>> {
    let all = szego_core::flow::sample_times(t_end, dt)?;
    let last = all.len() - 1;
    Ok(all
        .into_iter()
        .enumerate()
        .filter(|(k, _)| k % every == 0 || *k == last)
        .map(|(_, t)| t)
        .collect())
}

#[derive(Deserialize)]
struct SignedTargets {
    zeta: Vec<f64>,
    gamma: Vec<f64>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum BuildReport {
    Singular(SingularValueReport),
    Signed(SignedSpectrumReport),
}

#[derive(Serialize)]
struct BuildOutput {
    symbol: FourierSymbol,
    report: BuildReport,
}

pub fn hankel_build(input: &Path, selfadjoint: bool, m: Option<usize>, tol: f64, out: Option<&Path>) -> CliResult<()> {
    let (symbol, report, pass) = if selfadjoint {
        let t: SignedTargets = read_json(input)?;
        let c = build_selfadjoint(&t.zeta, &t.gamma, m)?;
        let abs_zeta: Vec<f64> = t.zeta.iter().map(|x| x.abs()).collect();
        let abs_gamma: Vec<f64> = t.gamma.iter().map(|x| x.abs()).collect();
        // Signed spectra first, then the singular values they imply.
        let signed = verify_signed_eigenvalues(&c, &t.zeta, &t.gamma, tol)?;
        let singular = verify_singular_values(&c, &abs_zeta, &abs_gamma, tol)?;
        let pass = signed.pass && singular.pass;
        (c, BuildReport::Signed(signed), pass)
    } else {
        let t: AngleTargets = read_json(input)?;
        let c = build_symbol(&t.lambda, &t.mu, &t.phi, &t.theta, m)?;
        let report = verify_singular_values(&c, &t.lambda, &t.mu, tol)?;
        let pass = report.pass;
        (c, BuildReport::Singular(report), pass)
    };
    emit(out, &to_json(&BuildOutput { symbol, report })?)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Property(format!("spectra of the built symbol deviate by more than {tol:e}")))
    }
}

#[derive(Serialize)]
struct InstabilitySummary {
    q: f64,
    epsilon: f64,
    horizon: f64,
    r_plus: f64,
    r_minus: f64,
    gamma_plus: f64,
    gamma_minus: f64,
    f_of_s: f64,
    empirical_avg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    direct_max_deviation: Option<f64>,
}

pub fn instability(
    q: f64,
    eps: f64,
    horizon: f64,
    samples: usize,
    direct: Option<f64>,
    out: Option<&Path>,
) -> CliResult<()> {
    let run = instability_run(q, eps, horizon, samples)?;
    let direct_max_deviation = match direct {
        Some(t_end) => Some(direct_j1_deviation(q, eps, t_end)?),
        None => None,
    };
    let summary = InstabilitySummary {
        q,
        epsilon: eps,
        horizon,
        r_plus: run.r_plus,
        r_minus: run.r_minus,
        gamma_plus: run.gamma_plus,
        gamma_minus: run.gamma_minus,
        f_of_s: average_j1_sq(q, horizon),
        empirical_avg: empirical_average_j1_sq(q, eps, horizon, samples.max(1))?,
        direct_max_deviation,
    };
    match out {
        Some(prefix) => {
            let path = with_suffix(prefix, ".csv");
            let mut w = create(&path)?;
            writeln!(w, "t,re_J1,im_J1,abs_J1_sq")?;
            for (t, j) in run.times.iter().zip(&run.j1_series) {
                writeln!(w, "{t},{},{},{}", j.re, j.im, j.norm_sqr())?;
            }
            w.flush()?;
            emit(Some(&with_suffix(prefix, ".json")), &to_json(&summary)?)
        }
        None => emit(None, &to_json(&summary)?),
    }
}

/// `max_t | |(u(t)|1)| - |J_1(t)| |` along the RK4 solution from
/// `(z - q)/(1 - q z) + eps`, sampled every 10 steps of 1e-3.
fn direct_j1_deviation(q: f64, eps: f64, t_end: f64) -> CliResult<f64> {
    let run = perturbed_blaschke(&[Complex64::new(q, 0.0)], eps, DEFAULT_LENGTH)?;
    let cfg = AdaptiveTruncation { tail_tol: 1e-7, ..AdaptiveTruncation::default() };
    let tr = integrate_adaptive(&run.symbol, t_end, 1e-3, 10, cfg)?;
    let mut worst = 0.0f64;
    for (t, u) in tr.times.iter().zip(&tr.symbols) {
        let j1 = j1_closed_form(run.q, eps, *t)?;
        worst = worst.max((u.coeff(0).norm() - j1.norm()).abs());
    }
    Ok(worst)
}

pub fn verify(suite: Suite, seed: u64, n: usize, jobs: usize, out: Option<&Path>) -> CliResult<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let cases = pool.install(|| (0..n).into_par_iter().map(|i| run_case(suite, seed, i)).collect());
    let report = summarize(suite, seed, cases);
    emit(out, &to_json(&report)?)?;
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.properties.iter().filter(|p| !p.pass).map(|p| p.name.as_str()).collect();
        let errored = report.cases.iter().filter(|c| c.error.is_some()).count();
        Err(CliError::Property(format!(
            "{} suite: failing properties {failed:?}, {errored} case(s) errored",
            suite.name()
        )))
    }
}
