//! Seeded property suites shared by the command-line `verify` front end and
//! the acceptance tests. Every case draws from its own random stream, so cases
//! can run in any order or in parallel.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::{krylov_moments_from_j, momentum_lower_bound, trace_lower_bound};
use crate::flow::{conserved_report, exact_trajectory, integrate_direct_sampled, ExactFlow};
use crate::hankel::{
    apply_h, build_pair, secular_mu, spectral_decomposition, spectral_data_default, theta_from_k_eigenvectors,
    SpectralCoordinates, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL,
};
use crate::inverse_hankel::build_symbol;
use crate::linalg::{angle_distance, general_eigenvalues, norm_sq};
use crate::sampling::{case_rng, sample_actions, sample_angles, sample_flow_rational, sample_generic_rational, SamplerConfig};
use crate::symbol::{expand_rational, functionals, FourierSymbol, RationalSymbol, DEFAULT_TAIL_TOL};
use crate::transform::{
    b_from_actions, b_product_form, generating_j_partial_fractions, generating_j_product, generating_j_sum,
    generating_j_with, inverse_model, log_derivative_trace, nu_from_actions, reconstruct_coeffs, reconstruct_rational,
    torus_moments,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Roundtrip,
    Conservation,
    Trace,
    Torus,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Roundtrip => "roundtrip",
            Suite::Conservation => "conservation",
            Suite::Trace => "trace",
            Suite::Torus => "torus",
        }
    }

    pub fn default_cases(self) -> usize {
        match self {
            Suite::Roundtrip | Suite::Trace => 50,
            Suite::Conservation => 10,
            Suite::Torus => 20,
        }
    }

    /// `(metric, bound)` pairs checked on every case.
    pub fn properties(self) -> &'static [(&'static str, Bound)] {
        use Bound::*;
        match self {
            Suite::Roundtrip => &[
                ("symbol_roundtrip", AtMost(1e-7)),
                ("coordinate_roundtrip", AtMost(1e-7)),
                ("secular_vs_k2", AtMost(1e-10)),
                ("interlacing_margin", Positive),
                ("nu_closed_form", AtMost(1e-8)),
                ("b_sum_vs_product", AtMost(1e-8)),
                ("rational_vs_coeffs", AtMost(1e-9)),
                ("theta_routes", AtMost(1e-7)),
                ("eigen_relation", AtMost(1e-8)),
                ("rank_one_difference", AtMost(1e-12)),
            ],
            Suite::Trace => &[("j_forms", AtMost(1e-9)), ("trace_formula", AtMost(1e-4))],
            Suite::Conservation => &[
                ("max_deviation", AtMost(1e-5)),
                ("drift_direct", AtMost(1e-7)),
                ("drift_exact", AtMost(1e-7)),
                ("action_invariance", AtMost(1e-8)),
                ("moment_conservation", AtMost(1e-8)),
            ],
            Suite::Torus => &[
                ("torus_moments", AtMost(1e-8)),
                ("bound_equality_gap", AtMost(1e-8)),
                ("bound_from_j_gap", AtMost(1e-8)),
                ("perturbed_margin", AtLeast(1e-4)),
            ],
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "roundtrip" => Ok(Suite::Roundtrip),
            "conservation" => Ok(Suite::Conservation),
            "trace" => Ok(Suite::Trace),
            "torus" => Ok(Suite::Torus),
            other => Err(format!("unknown suite {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Positive,
}

impl Bound {
    pub fn holds(self, x: f64) -> bool {
        match self {
            Bound::AtMost(t) => x <= t,
            Bound::AtLeast(t) => x >= t,
            Bound::Positive => x > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case: usize,
    pub rank: usize,
    pub metrics: BTreeMap<String, f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub bound: Bound,
    /// Worst value over all cases (largest for upper bounds, smallest otherwise).
    pub worst: f64,
    pub failures: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: Vec<CaseResult>,
    pub properties: Vec<PropertyResult>,
    pub pass: bool,
}

/// Run one case of a suite.
pub fn run_case(suite: Suite, seed: u64, case: usize) -> CaseResult {
    let outcome = match suite {
        Suite::Roundtrip => roundtrip_case(seed, case),
        Suite::Trace => trace_case(seed, case),
        Suite::Conservation => conservation_case(seed, case),
        Suite::Torus => torus_case(seed, case),
    };
    match outcome {
        Ok((rank, metrics)) => CaseResult { case, rank, metrics, error: None },
        Err(e) => CaseResult { case, rank: 0, metrics: BTreeMap::new(), error: Some(e.to_string()) },
    }
}

/// Aggregate case results (in case order) into a report.
pub fn summarize(suite: Suite, seed: u64, mut cases: Vec<CaseResult>) -> SuiteReport {
    cases.sort_by_key(|c| c.case);
    let properties: Vec<PropertyResult> = suite
        .properties()
        .iter()
        .map(|(name, bound)| {
            let mut worst: Option<f64> = None;
            let mut failures = 0;
            for c in &cases {
                match c.metrics.get(*name) {
                    Some(&x) => {
                        if !bound.holds(x) {
                            failures += 1;
                        }
                        worst = Some(match (worst, bound) {
                            (None, _) => x,
                            (Some(w), Bound::AtMost(_)) => w.max(x),
                            (Some(w), _) => w.min(x),
                        });
                    }
                    None => failures += 1,
                }
            }
            PropertyResult {
                name: name.to_string(),
                bound: *bound,
                worst: worst.unwrap_or(f64::NAN),
                failures,
                pass: failures == 0,
            }
        })
        .collect();
    let pass = !cases.is_empty() && properties.iter().all(|p| p.pass) && cases.iter().all(|c| c.error.is_none());
    SuiteReport { suite, seed, cases, properties, pass }
}

/// Sequential run of `n` cases.
pub fn run_suite(suite: Suite, seed: u64, n: usize) -> SuiteReport {
    let cases = (0..n).map(|i| run_case(suite, seed, i)).collect();
    summarize(suite, seed, cases)
}

type Metrics = BTreeMap<String, f64>;

/// Length used by the round-trip and trace suites.
pub const SUITE_LENGTH: usize = 128;

/// The generic rational symbol of case `case`: rank `1 + case mod 6`,
/// pole radius at most 0.8, at least 128 coefficients.
pub fn roundtrip_sample(seed: u64, case: usize) -> Result<(RationalSymbol, SpectralCoordinates, FourierSymbol)> {
    let mut rng = case_rng(seed, case as u64);
    let n = 1 + case % 6;
    let (r, s) = sample_generic_rational(&mut rng, n, &SamplerConfig::default());
    let u = expand_rational(&r, SUITE_LENGTH, DEFAULT_TAIL_TOL)?;
    Ok((r, s, u))
}

fn coordinate_distance(a: &SpectralCoordinates, b: &SpectralCoordinates) -> f64 {
    if a.rank() != b.rank() {
        return f64::INFINITY;
    }
    let mut d = 0.0f64;
    for j in 0..a.rank() {
        d = d
            .max((a.lambda[j] - b.lambda[j]).abs())
            .max((a.mu[j] - b.mu[j]).abs())
            .max(angle_distance(a.phi[j], b.phi[j]))
            .max(angle_distance(a.theta[j], b.theta[j]));
    }
    d
}

fn roundtrip_case(seed: u64, case: usize) -> Result<(usize, Metrics)> {
    let (_, s, u) = roundtrip_sample(seed, case)?;
    let n = s.rank();
    let mut m = Metrics::new();
    let d = spectral_decomposition(&u, DEFAULT_RANK_TOL, DEFAULT_GAP_TOL)?;
    let fwd = &d.coords;

    let model = inverse_model(fwd)?;
    let back = reconstruct_coeffs(&model, u.len())?;
    m.insert("symbol_roundtrip".into(), back.distance(&u) / u.l2_norm_sq().sqrt());
    m.insert("coordinate_roundtrip".into(), coordinate_distance(&s, fwd));

    let l2 = fwd.lambda_sq();
    let nu2: Vec<f64> = fwd.nu.iter().map(|v| v * v).collect();
    let mu2 = secular_mu(&l2, &nu2)?;
    let sec = mu2.iter().zip(&d.k_values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    m.insert("secular_vs_k2".into(), sec);

    let mut margin = f64::INFINITY;
    for j in 0..n {
        margin = margin.min(fwd.lambda[j] - fwd.mu[j]);
        if j + 1 < n {
            margin = margin.min(fwd.mu[j] - fwd.lambda[j + 1]);
        }
    }
    margin = margin.min(fwd.mu[n - 1]);
    m.insert("interlacing_margin".into(), margin);

    let nu_cf = nu_from_actions(&fwd.lambda, &fwd.mu)?;
    m.insert(
        "nu_closed_form".into(),
        nu_cf.iter().zip(&fwd.nu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
    );
    let b1 = b_from_actions(&fwd.lambda, &fwd.mu, &nu_cf)?;
    let b2 = b_product_form(&fwd.lambda, &fwd.mu)?;
    m.insert(
        "b_sum_vs_product".into(),
        b1.iter().zip(&b2).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max),
    );

    let rat = reconstruct_rational(&model)?;
    let expanded = expand_rational(&rat, u.len(), DEFAULT_TAIL_TOL)?.resized(u.len());
    m.insert("rational_vs_coeffs".into(), expanded.distance(&back));

    let theta_k = theta_from_k_eigenvectors(&u, &d);
    m.insert(
        "theta_routes".into(),
        theta_k.iter().zip(&fwd.theta).map(|(a, b)| angle_distance(*a, *b)).fold(0.0, f64::max),
    );

    let mut eig = 0.0f64;
    for (j, e) in d.e.iter().enumerate() {
        let he = apply_h(&u, e);
        let r: Vec<Complex64> = he.iter().zip(e).map(|(a, b)| a - b * fwd.lambda[j]).collect();
        eig = eig.max(norm_sq(&r).sqrt());
    }
    m.insert("eigen_relation".into(), eig);

    let pair = build_pair(&u);
    let c = u.coeffs();
    let mut rank_one = 0.0f64;
    for i in 0..c.len() {
        for k in 0..c.len() {
            let diff = pair.h2[(i, k)] - pair.k2[(i, k)] - c[i] * c[k].conj();
            rank_one = rank_one.max(diff.norm());
        }
    }
    m.insert("rank_one_difference".into(), rank_one);
    Ok((n, m))
}

/// Points at which the generating-function forms are compared.
pub const TRACE_POINTS: [f64; 3] = [-1.0, 0.1, 0.3];

fn trace_case(seed: u64, case: usize) -> Result<(usize, Metrics)> {
    let (_, _, u) = roundtrip_sample(seed, case)?;
    let s = spectral_data_default(&u)?;
    let h2 = build_pair(&u).h2;
    let mut forms = 0.0f64;
    let mut trace = 0.0f64;
    for &x in &TRACE_POINTS {
        let jr = generating_j_with(&h2, x)?;
        let js = generating_j_sum(&s.lambda, &s.nu, x)?;
        let jp = generating_j_product(&s.lambda, &s.mu, x)?;
        let jf = generating_j_partial_fractions(&s.lambda, &s.nu, x)?;
        let scale = jr.abs().max(1.0);
        forms = forms.max([js, jp, jf].iter().map(|v| (v - jr).abs() / scale).fold(0.0, f64::max));
        let h = 1e-6;
        let deriv = (generating_j_with(&h2, x + h)? - generating_j_with(&h2, x - h)?) / (2.0 * h) / jr;
        trace = trace.max((deriv - log_derivative_trace(&s.lambda, &s.mu, x)?).abs());
    }
    let mut m = Metrics::new();
    m.insert("j_forms".into(), forms);
    m.insert("trace_formula".into(), trace);
    Ok((s.rank(), m))
}

/// Horizon, step and length of the conservation suite.
pub const FLOW_HORIZON: f64 = 10.0;
pub const FLOW_STEP: f64 = 1e-3;
pub const FLOW_LENGTH: usize = 128;
/// Every this many steps the direct solution is compared with the exact one.
pub const FLOW_SAMPLE_EVERY: usize = 10;

/// Initial datum of case `case`: rank `1 + case mod 3`, poles within 0.7,
/// staying within 0.8 along the orbit up to the horizon.
pub fn flow_sample(seed: u64, case: usize) -> Result<FourierSymbol> {
    let mut rng = case_rng(seed, case as u64);
    let n = 1 + case % 3;
    let cfg = SamplerConfig { max_pole_radius: 0.7, ..SamplerConfig::default() };
    let (r, _) = sample_flow_rational(&mut rng, n, &cfg, FLOW_HORIZON, 0.8);
    expand_rational(&r, FLOW_LENGTH, DEFAULT_TAIL_TOL)
}

fn conservation_case(seed: u64, case: usize) -> Result<(usize, Metrics)> {
    let u0 = flow_sample(seed, case)?;
    let direct = integrate_direct_sampled(&u0, FLOW_HORIZON, FLOW_STEP, FLOW_SAMPLE_EVERY)?;
    let exact = exact_trajectory(&u0, &direct.times)?;
    let mut direct = direct;
    let dev = direct.attach_deviation(&exact)?;
    let mut m = Metrics::new();
    m.insert("max_deviation".into(), dev);
    m.insert("drift_direct".into(), conserved_report(&direct).max());
    m.insert("drift_exact".into(), conserved_report(&exact).max());

    let flow = ExactFlow::new(&u0)?;
    let s0 = flow.coordinates().clone();
    let f0 = functionals(&u0, 4);
    let mut actions = 0.0f64;
    let mut moments = 0.0f64;
    for t in [1.0, 2.5, 5.0, 10.0] {
        let u = flow.at(t)?;
        let st = spectral_data_default(&u)?;
        for (a, b) in st.lambda.iter().zip(&s0.lambda) {
            actions = actions.max((a - b).abs());
        }
        let ft = functionals(&u, 4);
        for (a, b) in ft.moments.iter().zip(&f0.moments) {
            moments = moments.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    m.insert("action_invariance".into(), actions);
    m.insert("moment_conservation".into(), moments);
    Ok((s0.rank(), m))
}

/// Torus suite data: rank `1 + case mod 3`, actions and angles from the
/// case stream.
pub fn torus_sample(seed: u64, case: usize) -> Result<(SpectralCoordinates, FourierSymbol)> {
    let mut rng = case_rng(seed, case as u64);
    let n = 1 + case % 3;
    let cfg = SamplerConfig::default();
    loop {
        let (lambda, mu) = sample_actions(&mut rng, n, &cfg);
        let phi = sample_angles(&mut rng, n);
        let theta = sample_angles(&mut rng, n);
        let s = SpectralCoordinates::from_actions_angles(lambda, mu, phi, theta)?;
        if inverse_model(&s)?.spectral_radius() <= cfg.max_pole_radius {
            let u = build_symbol(&s.lambda, &s.mu, &s.phi, &s.theta, None)?;
            return Ok((s, u));
        }
    }
}

fn torus_case(seed: u64, case: usize) -> Result<(usize, Metrics)> {
    let (s, u) = torus_sample(seed, case)?;
    let n = s.rank();
    let mut m = Metrics::new();
    let j = torus_moments(&s.lambda, &s.mu, 2 * n)?;
    let f = functionals(&u, 2 * n);
    m.insert(
        "torus_moments".into(),
        j.iter().zip(&f.moments).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)).fold(0.0, f64::max),
    );

    let bound = momentum_lower_bound(&u, n)?;
    m.insert("bound_equality_gap".into(), (u.momentum() - bound).abs());
    let torus_bound = trace_lower_bound(&krylov_moments_from_j(&j, 2 * n)?, n)?;
    let mu_sum: f64 = s.mu.iter().map(|x| x * x).sum();
    m.insert("bound_from_j_gap".into(), (torus_bound - mu_sum).abs());

    // Add a mode with a fresh pole, away from the existing ones: rank N + 1,
    // so the bound becomes strict.
    let poles: Vec<Complex64> = general_eigenvalues(&inverse_model(&s)?.a);
    let fresh = (0..64)
        .map(|k| Complex64::from_polar(0.6, 2.0 * std::f64::consts::PI * k as f64 / 64.0))
        .max_by(|a, b| {
            let da = poles.iter().map(|p| (p - a).norm()).fold(f64::INFINITY, f64::min);
            let db = poles.iter().map(|p| (p - b).norm()).fold(f64::INFINITY, f64::min);
            da.total_cmp(&db)
        })
        .expect("nonempty candidate set");
    let extra = RationalSymbol::new(vec![Complex64::new(0.5 * s.lambda[0], 0.0)], vec![Complex64::new(1.0, 0.0), -fresh])?;
    let extra = expand_rational(&extra, u.len(), DEFAULT_TAIL_TOL)?.resized(u.len());
    let v = FourierSymbol::new(u.coeffs().iter().zip(extra.coeffs()).map(|(a, b)| a + b).collect())?;
    let bound_v = momentum_lower_bound(&v, n)?;
    m.insert("perturbed_margin".into(), v.momentum() - bound_v);
    Ok((n, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Roundtrip, Suite::Conservation, Suite::Trace, Suite::Torus] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn bounds() {
        assert!(Bound::AtMost(1.0).holds(1.0));
        assert!(!Bound::AtLeast(1.0).holds(0.5));
        assert!(!Bound::Positive.holds(0.0));
    }

    #[test]
    fn summary_flags_missing_metrics() {
        let cases = vec![CaseResult { case: 0, rank: 1, metrics: BTreeMap::new(), error: Some("x".into()) }];
        let r = summarize(Suite::Trace, 1, cases);
        assert!(!r.pass);
        assert!(r.properties.iter().all(|p| p.failures == 1));
    }
}
