//! Exact action-angle evolution and a direct RK4 Galerkin integrator.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{spectral_data, SpectralCoordinates, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL};
use crate::linalg::{wrap_angle, ZERO};
use crate::symbol::{functionals, FourierSymbol, NonlinearityPlan, SymbolFunctionals};
use crate::transform::{inverse_model, reconstruct_coeffs};

/// Coefficient modulus beyond which a step is rejected.
pub const OVERFLOW_GUARD: f64 = 1e100;

/// `phi_j += lambda_j^2 t`, `theta_m -= mu_m^2 t`; actions untouched.
pub fn evolve_angles(s: &SpectralCoordinates, t: f64) -> SpectralCoordinates {
    let mut out = s.clone();
    for (phi, l) in out.phi.iter_mut().zip(&s.lambda) {
        *phi = wrap_angle(*phi + l * l * t);
    }
    for (theta, m) in out.theta.iter_mut().zip(&s.mu) {
        *theta = wrap_angle(*theta - m * m * t);
    }
    out
}

/// Forward transform once, then evaluate the solution at any time.
#[derive(Debug, Clone)]
pub struct ExactFlow {
    coords: SpectralCoordinates,
    len: usize,
}

impl ExactFlow {
    pub fn new(u0: &FourierSymbol) -> Result<Self> {
        let coords = spectral_data(u0, DEFAULT_RANK_TOL, DEFAULT_GAP_TOL)?;
        Ok(Self { coords, len: u0.len() })
    }

    pub fn from_coordinates(coords: SpectralCoordinates, len: usize) -> Self {
        Self { coords, len }
    }

    pub fn coordinates(&self) -> &SpectralCoordinates {
        &self.coords
    }

    pub fn at(&self, t: f64) -> Result<FourierSymbol> {
        let model = inverse_model(&evolve_angles(&self.coords, t))?;
        reconstruct_coeffs(&model, self.len)
    }
}

pub fn solve_exact(u0: &FourierSymbol, t: f64) -> Result<FourierSymbol> {
    ExactFlow::new(u0)?.at(t)
}

/// Samples of a trajectory with their conserved quantities.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub symbols: Vec<FourierSymbol>,
    pub invariants_series: Vec<SymbolFunctionals>,
    #[serde(default)]
    pub l2_deviation: Option<Vec<f64>>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, u: FourierSymbol) {
        self.invariants_series.push(functionals(&u, 2));
        self.times.push(t);
        self.symbols.push(u);
    }

    /// Fill `l2_deviation` with the distance to `reference`, sample by sample.
    pub fn attach_deviation(&mut self, reference: &TrajectoryRecord) -> Result<f64> {
        if reference.times.len() != self.times.len() {
            return Err(Error::DimensionMismatch(format!(
                "trajectories have {} and {} samples",
                self.times.len(),
                reference.times.len()
            )));
        }
        let dev: Vec<f64> = self
            .symbols
            .iter()
            .zip(&reference.symbols)
            .map(|(a, b)| a.distance(b))
            .collect();
        let max = dev.iter().cloned().fold(0.0, f64::max);
        self.l2_deviation = Some(dev);
        Ok(max)
    }

    /// CSV with columns `t, re_c0, im_c0, ..., J2, J4, M, E[, l2_dev]`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = self.symbols.first().map_or(0, |u| u.len());
        let mut header = vec!["t".to_string()];
        for k in 0..m {
            header.push(format!("re_c{k}"));
            header.push(format!("im_c{k}"));
        }
        header.extend(["J2", "J4", "M", "E"].map(String::from));
        if self.l2_deviation.is_some() {
            header.push("l2_dev".into());
        }
        writeln!(w, "{}", header.join(","))?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![t.to_string()];
            for c in self.symbols[i].coeffs() {
                row.push(c.re.to_string());
                row.push(c.im.to_string());
            }
            let f = &self.invariants_series[i];
            row.extend([f.j(1), f.j(2), f.momentum, f.energy].map(|x| x.to_string()));
            if let Some(d) = &self.l2_deviation {
                row.push(d[i].to_string());
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Sample times `0, dt, ..., floor(T/dt) dt`.
pub fn sample_times(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::DimensionMismatch(format!("need dt > 0 and T >= 0, got dt = {dt}, T = {t_end}")));
    }
    let steps = (t_end / dt * (1.0 + 1e-12)).floor() as usize;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

/// Exact solution sampled at the given times; `t = 0` returns `u0` itself.
pub fn exact_trajectory(u0: &FourierSymbol, times: &[f64]) -> Result<TrajectoryRecord> {
    let flow = ExactFlow::new(u0)?;
    let mut tr = TrajectoryRecord::default();
    for &t in times {
        let u = if t == 0.0 { u0.clone() } else { flow.at(t)? };
        tr.push(t, u);
    }
    Ok(tr)
}

/// RK4 on `du/dt = -i Pi(|u|^2 u)` with all steps recorded.
pub fn integrate_direct(u0: &FourierSymbol, t_end: f64, dt: f64) -> Result<TrajectoryRecord> {
    integrate_direct_sampled(u0, t_end, dt, 1)
}

/// As [`integrate_direct`], recording every `every`-th step (and the last one).
pub fn integrate_direct_sampled(
    u0: &FourierSymbol,
    t_end: f64,
    dt: f64,
    every: usize,
) -> Result<TrajectoryRecord> {
    let times = sample_times(t_end, dt)?;
    let steps = times.len() - 1;
    let every = every.max(1);
    let mut rk = Rk4::new(u0.len());
    let mut u = u0.coeffs().to_vec();
    let mut tr = TrajectoryRecord::default();
    tr.push(0.0, u0.clone());
    for (k, &t) in times.iter().enumerate().skip(1) {
        rk.step(&mut u, dt);
        if u.iter().any(|c| !(c.norm() <= OVERFLOW_GUARD)) {
            return Err(Error::StepRejected { time: t });
        }
        if k % every == 0 || k == steps {
            tr.push(t, FourierSymbol::new(u.clone())?);
        }
    }
    Ok(tr)
}

/// Truncation control for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveTruncation {
    /// Largest modulus tolerated among the top quarter of the modes.
    pub tail_tol: f64,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for AdaptiveTruncation {
    fn default() -> Self {
        Self { tail_tol: 1e-10, min_len: 64, max_len: 1 << 15 }
    }
}

fn top_quarter_max(u: &[Complex64], from: usize) -> f64 {
    u[from..].iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// RK4 whose truncation length doubles when the top quarter of the modes
/// exceeds `tail_tol` and halves once the modes that would form the new top
/// quarter, and everything above them, fall well below it.
/// Needed when poles pass close to the unit circle.
pub fn integrate_adaptive(
    u0: &FourierSymbol,
    t_end: f64,
    dt: f64,
    every: usize,
    cfg: AdaptiveTruncation,
) -> Result<TrajectoryRecord> {
    let times = sample_times(t_end, dt)?;
    let steps = times.len() - 1;
    let every = every.max(1);
    let min_len = cfg.min_len.max(4).next_power_of_two();
    let mut u = u0.coeffs().to_vec();
    let start = u.len().max(min_len).next_power_of_two();
    u.resize(start, ZERO);
    let mut rk = Rk4::new(u.len());
    let mut tr = TrajectoryRecord::default();
    tr.push(0.0, u0.clone());
    for (k, &t) in times.iter().enumerate().skip(1) {
        loop {
            let m = u.len();
            if m < cfg.max_len && top_quarter_max(&u, 3 * m / 4) > cfg.tail_tol {
                u.resize(2 * m, ZERO);
                rk = Rk4::new(2 * m);
            } else if m > min_len && top_quarter_max(&u, 3 * m / 8) < 1e-3 * cfg.tail_tol {
                u.truncate(m / 2);
                rk = Rk4::new(m / 2);
            } else {
                break;
            }
        }
        rk.step(&mut u, dt);
        if u.iter().any(|c| !(c.norm() <= OVERFLOW_GUARD)) {
            return Err(Error::StepRejected { time: t });
        }
        if k % every == 0 || k == steps {
            tr.push(t, FourierSymbol::new(u.clone())?);
        }
    }
    Ok(tr)
}

/// Classical fourth-order Runge-Kutta stepper for the truncated system.
pub struct Rk4 {
    plan: NonlinearityPlan,
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(m: usize) -> Self {
        Self {
            plan: NonlinearityPlan::new(m),
            k: std::array::from_fn(|_| vec![ZERO; m]),
            stage: vec![ZERO; m],
        }
    }

    fn rhs(plan: &mut NonlinearityPlan, u: &[Complex64], out: &mut [Complex64]) {
        plan.apply(u, out);
        for o in out.iter_mut() {
            *o = Complex64::new(o.im, -o.re);
        }
    }

    pub fn step(&mut self, u: &mut [Complex64], dt: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        Self::rhs(&mut self.plan, u, k1);
        for ((s, x), k) in self.stage.iter_mut().zip(u.iter()).zip(k1.iter()) {
            *s = x + k * (0.5 * dt);
        }
        Self::rhs(&mut self.plan, &self.stage, k2);
        for ((s, x), k) in self.stage.iter_mut().zip(u.iter()).zip(k2.iter()) {
            *s = x + k * (0.5 * dt);
        }
        Self::rhs(&mut self.plan, &self.stage, k3);
        for ((s, x), k) in self.stage.iter_mut().zip(u.iter()).zip(k3.iter()) {
            *s = x + k * dt;
        }
        Self::rhs(&mut self.plan, &self.stage, k4);
        for i in 0..u.len() {
            u[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
}

/// Maximal relative drifts `max_t |Q(t) - Q(0)| / |Q(0)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedReport {
    pub j2: f64,
    pub j4: f64,
    pub momentum: f64,
    pub energy: f64,
}

impl ConservedReport {
    pub fn max(&self) -> f64 {
        self.j2.max(self.j4).max(self.momentum).max(self.energy)
    }
}

pub fn conserved_report(tr: &TrajectoryRecord) -> ConservedReport {
    let series = &tr.invariants_series;
    let drift = |q: &dyn Fn(&SymbolFunctionals) -> f64| -> f64 {
        let Some(first) = series.first() else { return 0.0 };
        let q0 = q(first);
        let scale = if q0 == 0.0 { 1.0 } else { q0.abs() };
        series.iter().map(|f| (q(f) - q0).abs() / scale).fold(0.0, f64::max)
    };
    ConservedReport {
        j2: drift(&|f| f.j(1)),
        j4: drift(&|f| f.j(2)),
        momentum: drift(&|f| f.momentum),
        energy: drift(&|f| f.energy),
    }
}

/// Nearest-branch continuation of a sampled angle.
pub fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &a in angles {
        if let Some(p) = prev {
            offset += wrap_angle(a - p) - (a - p);
        }
        out.push(a + offset);
        prev = Some(a);
    }
    out
}

/// Least-squares slope of an unwrapped angle series.
pub fn angle_rate(times: &[f64], angles: &[f64]) -> f64 {
    let y = unwrap_angles(angles);
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let num: f64 = times.iter().zip(&y).map(|(t, v)| (t - tm) * (v - ym)).sum();
    let den: f64 = times.iter().map(|t| (t - tm) * (t - tm)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn wave(m: usize) -> FourierSymbol {
        FourierSymbol::from_real(&(0..m).map(|k| 0.5f64.powi(k as i32)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let s = SpectralCoordinates::from_actions_angles(vec![2.0, 0.8], vec![1.0, 0.3], vec![0.4, -1.0], vec![2.0, 0.1])
            .unwrap();
        assert_eq!(evolve_angles(&s, 0.0), s);
        let later = evolve_angles(&s, 3.7);
        assert_eq!(later.lambda, s.lambda);
        assert_eq!(later.mu, s.mu);
        assert_eq!(later.nu, s.nu);
    }

    #[test]
    fn full_turn_of_phi() {
        let s = SpectralCoordinates::from_actions_angles(vec![4.0 / 3.0], vec![2.0 / 3.0], vec![0.3], vec![0.0]).unwrap();
        let later = evolve_angles(&s, 9.0 * PI / 8.0);
        assert!(crate::linalg::angle_distance(later.phi[0], 0.3) < 1e-12);
    }

    #[test]
    fn traveling_wave_closed_form() {
        let u0 = wave(64);
        for t in [0.0, 0.7, 2.5, -1.3] {
            let u = solve_exact(&u0, t).unwrap();
            let alpha = Complex64::from_polar(1.0, -16.0 / 9.0 * t);
            let p = Complex64::from_polar(0.5, -4.0 / 3.0 * t);
            for (n, c) in u.coeffs().iter().enumerate() {
                assert!((c - alpha * p.powi(n as i32)).norm() < 1e-12, "t={t} n={n}");
            }
        }
    }

    #[test]
    fn constant_symbol_rotates() {
        let u0 = FourierSymbol::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        let tr = integrate_direct(&u0, 1.0, 1e-3).unwrap();
        assert_eq!(tr.len(), 1001);
        for (t, u) in tr.times.iter().zip(&tr.symbols) {
            assert!((u.coeff(0) - Complex64::from_polar(1.0, -t)).norm() < 1e-10);
        }
        assert!(conserved_report(&tr).max() < 1e-12);
    }

    #[test]
    fn last_sample_is_floor_of_horizon() {
        let times = sample_times(1.0, 0.3).unwrap();
        assert_eq!(times.len(), 4);
        assert!((times[3] - 0.9).abs() < 1e-15);
        assert_eq!(sample_times(0.0, 1e-3).unwrap(), vec![0.0]);
        assert_eq!(sample_times(10.0, 1e-3).unwrap().len(), 10_001);
    }

    #[test]
    fn unwrap_follows_nearest_branch() {
        let y = unwrap_angles(&[3.0, -3.0, -2.5, 3.1]);
        assert!((y[1] - (2.0 * PI - 3.0)).abs() < 1e-12);
        assert!((y[3] - (2.0 * PI - 2.5 + wrap_angle(3.1 + 2.5))).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let tr = integrate_direct(&wave(3), 0.002, 1e-3).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,re_c0,im_c0,re_c1,im_c1,re_c2,im_c2,J2,J4,M,E");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].split(',').count(), 11);
    }
}
