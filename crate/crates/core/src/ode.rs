//! Chaotic-ODE benchmark generation.
//!
//! Six explicitly parameterized dynamical systems integrated by classical
//! fixed-step RK4. Every run is a pure function of `(system, config)`: the
//! initial condition receives a seeded uniform perturbation of relative
//! magnitude 1e-3, a transient prefix is discarded, and the recorded states
//! are written as CSV plus a JSON manifest echoing every parameter.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::series::{write_csv, TimeSeries};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// The six benchmark systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    Lorenz,
    LorenzCoupled,
    DoublePendulum,
    CellCycle,
    Hopfield,
    BlinkingRotlet,
}

impl SystemKind {
    pub fn all() -> [SystemKind; 6] {
        [
            SystemKind::Lorenz,
            SystemKind::LorenzCoupled,
            SystemKind::DoublePendulum,
            SystemKind::CellCycle,
            SystemKind::Hopfield,
            SystemKind::BlinkingRotlet,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Lorenz => "Lorenz",
            SystemKind::LorenzCoupled => "LorenzCoupled",
            SystemKind::DoublePendulum => "DoublePendulum",
            SystemKind::CellCycle => "CellCycle",
            SystemKind::Hopfield => "Hopfield",
            SystemKind::BlinkingRotlet => "BlinkingRotlet",
        }
    }

    pub fn from_name(name: &str) -> Option<SystemKind> {
        SystemKind::all().into_iter().find(|k| k.name() == name)
    }

    /// State dimension (and channel count of generated series).
    pub fn dim(&self) -> usize {
        match self {
            SystemKind::Lorenz | SystemKind::BlinkingRotlet => 3,
            SystemKind::DoublePendulum => 4,
            SystemKind::LorenzCoupled | SystemKind::CellCycle | SystemKind::Hopfield => 6,
        }
    }
}

/// Fixed weight matrix of the 6-neuron Hopfield network: two detuned copies
/// of the classic chaotic 3-neuron circuit, cross-coupled through the first
/// neuron of each block so the halves influence one another without
/// synchronizing.
pub const HOPFIELD_WEIGHTS: [[f64; 6]; 6] = [
    [2.0, -1.2, 0.0, 0.25, 0.0, 0.0],
    [1.9995, 1.71, 1.15, 0.0, 0.0, 0.0],
    [-4.75, 0.0, 1.1, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 1.9, -1.1, 0.0],
    [0.0, 0.0, 0.0, 2.1005, 1.62, 1.05],
    [0.0, 0.0, 0.0, -4.45, 0.0, 1.05],
];

/// A named dynamical system: parameter map plus default initial condition.
///
/// `params` covers every symbol the right-hand side reads, so a manifest
/// entry fully reproduces the run.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSystem {
    pub kind: SystemKind,
    pub params: BTreeMap<String, f64>,
    pub init: Vec<f64>,
}

fn params_from(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

impl OdeSystem {
    /// The system with its standard parameters and initial condition.
    pub fn standard(kind: SystemKind) -> OdeSystem {
        match kind {
            SystemKind::Lorenz => OdeSystem {
                kind,
                params: params_from(&[("sigma", 10.0), ("rho", 28.0), ("beta", 8.0 / 3.0)]),
                init: vec![1.0, 1.0, 1.0],
            },
            SystemKind::LorenzCoupled => {
                let mut params =
                    params_from(&[("sigma", 10.0), ("rho", 28.0), ("beta", 8.0 / 3.0)]);
                params.insert("eps".into(), 0.1);
                OdeSystem {
                    kind,
                    params,
                    init: vec![1.0, 1.0, 1.0, -8.0, 8.0, 27.0],
                }
            }
            SystemKind::DoublePendulum => OdeSystem {
                kind,
                params: params_from(&[("g", 9.81), ("l", 10.0), ("linearized", 0.0)]),
                init: vec![
                    std::f64::consts::FRAC_PI_2,
                    std::f64::consts::FRAC_PI_2,
                    0.0,
                    0.0,
                ],
            },
            SystemKind::CellCycle => OdeSystem {
                kind,
                // oscillator 2 runs 20% faster than oscillator 1; the
                // detuning keeps the coupled pair in its aperiodic
                // alternating regime instead of a phase-locked cycle
                params: params_from(&[
                    ("vi1", 0.05),
                    ("vi2", 0.06),
                    ("Kim1", 0.65),
                    ("Kim2", 0.65),
                    ("vd1", 0.025),
                    ("vd2", 0.03),
                    ("Kd1", 0.02),
                    ("Kd2", 0.02),
                    ("kd1", 0.001),
                    ("kd2", 0.0012),
                    ("K1", 0.01),
                    ("K2", 0.01),
                    ("K3", 0.01),
                    ("K4", 0.01),
                    ("H1", 0.01),
                    ("H2", 0.01),
                    ("H3", 0.01),
                    ("H4", 0.01),
                    ("Kc1", 0.5),
                    ("Kc2", 0.5),
                    ("VM1", 0.3),
                    ("VM3", 0.1),
                    ("UM1", 0.3),
                    ("UM3", 0.1),
                    ("V2", 0.15),
                    ("V4", 0.05),
                    ("U2", 0.15),
                    ("U4", 0.05),
                    // canonical rate constants are per-minute; the rescale
                    // puts a few oscillation cycles inside a 1000-step window
                    ("time_scale", 24.0),
                ]),
                init: vec![0.2, 0.3, 0.2, 0.35, 0.3, 0.2],
            },
            SystemKind::Hopfield => {
                let mut params = params_from(&[("gain", 0.9), ("time_scale", 1.0)]);
                for (i, row) in HOPFIELD_WEIGHTS.iter().enumerate() {
                    for (j, w) in row.iter().enumerate() {
                        params.insert(format!("w{i}{j}"), *w);
                    }
                }
                OdeSystem {
                    kind,
                    params,
                    init: vec![0.4, -0.2, 0.3, -0.4, 0.1, -0.3],
                }
            }
            SystemKind::BlinkingRotlet => OdeSystem {
                kind,
                params: params_from(&[
                    ("radius", 1.0),
                    ("offset", 0.55),
                    ("strength", 2.0),
                    ("core", 0.05),
                    ("omega", 2.0 * std::f64::consts::PI / 5.0),
                ]),
                init: vec![0.3, 0.2, 0.0],
            },
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn with_param(mut self, key: &str, value: f64) -> OdeSystem {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_init(mut self, init: Vec<f64>) -> OdeSystem {
        self.init = init;
        self
    }

    fn param(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("{} is missing parameter `{key}`", self.name())))
    }

    /// `dstate/dt` at `(state, t)`.
    pub fn eval_rhs(&self, state: &[f64], t: f64) -> Result<Vec<f64>> {
        if state.len() != self.dim() {
            return Err(Error::Shape(format!(
                "{} state has length {}, expected {}",
                self.name(),
                state.len(),
                self.dim()
            )));
        }
        let resolved = self.resolve()?;
        let mut out = vec![0.0; self.dim()];
        resolved.eval(state, t, &mut out)?;
        Ok(out)
    }

    /// Pre-resolves the parameter map for tight integration loops.
    pub(crate) fn resolve(&self) -> Result<Resolved> {
        Ok(match self.kind {
            SystemKind::Lorenz => Resolved::Lorenz {
                sigma: self.param("sigma")?,
                rho: self.param("rho")?,
                beta: self.param("beta")?,
            },
            SystemKind::LorenzCoupled => Resolved::LorenzCoupled {
                sigma: self.param("sigma")?,
                rho: self.param("rho")?,
                beta: self.param("beta")?,
                eps: self.param("eps")?,
            },
            SystemKind::DoublePendulum => Resolved::DoublePendulum {
                grav_over_len: self.param("g")? / self.param("l")?,
                linearized: self.param("linearized")? != 0.0,
            },
            SystemKind::CellCycle => Resolved::CellCycle {
                vi: [self.param("vi1")?, self.param("vi2")?],
                kim: [self.param("Kim1")?, self.param("Kim2")?],
                vd: [self.param("vd1")?, self.param("vd2")?],
                kd_m: [self.param("Kd1")?, self.param("Kd2")?],
                kd: [self.param("kd1")?, self.param("kd2")?],
                k: [
                    self.param("K1")?,
                    self.param("K2")?,
                    self.param("K3")?,
                    self.param("K4")?,
                ],
                h: [
                    self.param("H1")?,
                    self.param("H2")?,
                    self.param("H3")?,
                    self.param("H4")?,
                ],
                kc: [self.param("Kc1")?, self.param("Kc2")?],
                vm1: [self.param("VM1")?, self.param("UM1")?],
                vm3: [self.param("VM3")?, self.param("UM3")?],
                v2: [self.param("V2")?, self.param("U2")?],
                v4: [self.param("V4")?, self.param("U4")?],
                time_scale: self.param("time_scale")?,
            },
            SystemKind::Hopfield => {
                let mut weights = [[0.0; 6]; 6];
                for (i, row) in weights.iter_mut().enumerate() {
                    for (j, w) in row.iter_mut().enumerate() {
                        *w = self.param(&format!("w{i}{j}"))?;
                    }
                }
                Resolved::Hopfield {
                    weights,
                    gain: self.param("gain")?,
                    time_scale: self.param("time_scale")?,
                }
            }
            SystemKind::BlinkingRotlet => Resolved::BlinkingRotlet {
                radius: self.param("radius")?,
                offset: self.param("offset")?,
                strength: self.param("strength")?,
                core: self.param("core")?,
                omega: self.param("omega")?,
            },
        })
    }
}

/// Parameter maps flattened into plain structs for the integration loop.
#[derive(Debug, Clone)]
pub(crate) enum Resolved {
    Lorenz {
        sigma: f64,
        rho: f64,
        beta: f64,
    },
    LorenzCoupled {
        sigma: f64,
        rho: f64,
        beta: f64,
        eps: f64,
    },
    DoublePendulum {
        grav_over_len: f64,
        linearized: bool,
    },
    CellCycle {
        vi: [f64; 2],
        kim: [f64; 2],
        vd: [f64; 2],
        kd_m: [f64; 2],
        kd: [f64; 2],
        k: [f64; 4],
        h: [f64; 4],
        kc: [f64; 2],
        vm1: [f64; 2],
        vm3: [f64; 2],
        v2: [f64; 2],
        v4: [f64; 2],
        time_scale: f64,
    },
    Hopfield {
        weights: [[f64; 6]; 6],
        gain: f64,
        time_scale: f64,
    },
    BlinkingRotlet {
        radius: f64,
        offset: f64,
        strength: f64,
        core: f64,
        omega: f64,
    },
}

#[inline]
fn checked_div(num: f64, den: f64, what: &str) -> Result<f64> {
    if den.abs() < 1e-300 {
        return Err(Error::Singular(format!("zero denominator in {what}")));
    }
    Ok(num / den)
}

impl Resolved {
    pub(crate) fn eval(&self, s: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        match self {
            Resolved::Lorenz { sigma, rho, beta } => {
                out[0] = sigma * (s[1] - s[0]);
                out[1] = s[0] * (rho - s[2]) - s[1];
                out[2] = s[0] * s[1] - beta * s[2];
            }
            Resolved::LorenzCoupled {
                sigma,
                rho,
                beta,
                eps,
            } => {
                // two Lorenz copies with bidirectional linear coupling on x
                out[0] = sigma * (s[1] - s[0]) + eps * (s[3] - s[0]);
                out[1] = s[0] * (rho - s[2]) - s[1];
                out[2] = s[0] * s[1] - beta * s[2];
                out[3] = sigma * (s[4] - s[3]) + eps * (s[0] - s[3]);
                out[4] = s[3] * (rho - s[5]) - s[4];
                out[5] = s[3] * s[4] - beta * s[5];
            }
            Resolved::DoublePendulum {
                grav_over_len: a,
                linearized,
            } => {
                let (t1, t2, w1, w2) = (s[0], s[1], s[2], s[3]);
                out[0] = w1;
                out[1] = w2;
                if *linearized {
                    // small-angle form with equal masses and rod lengths
                    out[2] = -2.0 * a * t1 + a * t2;
                    out[3] = 2.0 * a * t1 - 2.0 * a * t2;
                } else {
                    let delta = t1 - t2;
                    let den = 3.0 - (2.0 * delta).cos();
                    out[2] = (-3.0 * a * t1.sin()
                        - a * (t1 - 2.0 * t2).sin()
                        - 2.0 * delta.sin() * (w2 * w2 + w1 * w1 * delta.cos()))
                        / den;
                    out[3] = 2.0
                        * delta.sin()
                        * (2.0 * w1 * w1 + 2.0 * a * t1.cos() + w2 * w2 * delta.cos())
                        / den;
                }
            }
            Resolved::CellCycle {
                vi,
                kim,
                vd,
                kd_m,
                kd,
                k,
                h,
                kc,
                vm1,
                vm3,
                v2,
                v4,
                time_scale,
            } => {
                // two coupled cyclin/kinase/protease oscillators; oscillator 0
                // is inhibited by kinase 1 and vice versa
                for osc in 0..2 {
                    let (c, m, x) = (s[3 * osc], s[3 * osc + 1], s[3 * osc + 2]);
                    let m_other = s[3 * (1 - osc) + 1];
                    let (ka, kb, kc_pair, kd_pair) = if osc == 0 {
                        (k[0], k[1], k[2], k[3])
                    } else {
                        (h[0], h[1], h[2], h[3])
                    };
                    let dc = vi[osc] * checked_div(kim[osc], kim[osc] + m_other, "Kim + M")?
                        - vd[osc] * x * checked_div(c, kd_m[osc] + c, "Kd + C")?
                        - kd[osc] * c;
                    let v1 = vm1[osc] * checked_div(c, kc[osc] + c, "Kc + C")?;
                    let dm = v1 * checked_div(1.0 - m, ka + 1.0 - m, "K1 + (1 - M)")?
                        - v2[osc] * checked_div(m, kb + m, "K2 + M")?;
                    let v3 = m * vm3[osc];
                    let dx = v3 * checked_div(1.0 - x, kc_pair + 1.0 - x, "K3 + (1 - X)")?
                        - v4[osc] * checked_div(x, kd_pair + x, "K4 + X")?;
                    out[3 * osc] = time_scale * dc;
                    out[3 * osc + 1] = time_scale * dm;
                    out[3 * osc + 2] = time_scale * dx;
                }
            }
            Resolved::Hopfield {
                weights,
                gain,
                time_scale,
            } => {
                let mut act = [0.0; 6];
                for (a, v) in act.iter_mut().zip(s) {
                    *a = v.tanh();
                }
                for i in 0..6 {
                    let drive: f64 = weights[i].iter().zip(&act).map(|(w, a)| w * a).sum();
                    out[i] = time_scale * (-s[i] + gain * drive);
                }
            }
            Resolved::BlinkingRotlet {
                radius,
                offset,
                strength,
                core,
                omega,
            } => {
                // two rotlets at (±offset, 0) inside a disk of `radius`, each
                // paired with an opposite-sign image rotlet at (±radius²/offset, 0)
                // so the boundary stays a streamline; strengths blink smoothly
                // in antiphase with angular frequency `omega`
                let (x, y, phase) = (s[0], s[1], s[2]);
                let w1 = 0.5 * (1.0 + phase.cos());
                let w2 = 1.0 - w1;
                let img = radius * radius / offset;
                let core2 = core * core;
                let vortex = |x0: f64, gamma: f64| {
                    let dx = x - x0;
                    let dy = y;
                    let r2 = dx * dx + dy * dy + core2;
                    let coef = gamma / (2.0 * std::f64::consts::PI * r2);
                    (-coef * dy, coef * dx)
                };
                let mut u = 0.0;
                let mut v = 0.0;
                for (side, w) in [(1.0, w1), (-1.0, w2)] {
                    let (u1, v1) = vortex(side * offset, strength * w);
                    let (u2, v2) = vortex(side * img, -strength * w);
                    u += u1 + u2;
                    v += v1 + v2;
                }
                out[0] = u;
                out[1] = v;
                out[2] = *omega;
            }
        }
        // t only enters through the phase state of the rotlet flow
        let _ = t;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular(format!(
                "non-finite derivative at state {s:?}"
            )));
        }
        Ok(())
    }
}

/// Classical 4-stage Runge-Kutta update for an arbitrary right-hand side.
pub fn rk4_step_with<F>(mut rhs: F, state: &[f64], t: f64, dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], f64, &mut [f64]) -> Result<()>,
{
    if dt <= 0.0 {
        return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
    }
    let n = state.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    rhs(state, t, &mut k1)?;
    for i in 0..n {
        tmp[i] = state[i] + 0.5 * dt * k1[i];
    }
    rhs(&tmp, t + 0.5 * dt, &mut k2)?;
    for i in 0..n {
        tmp[i] = state[i] + 0.5 * dt * k2[i];
    }
    rhs(&tmp, t + 0.5 * dt, &mut k3)?;
    for i in 0..n {
        tmp[i] = state[i] + dt * k3[i];
    }
    rhs(&tmp, t + dt, &mut k4)?;

    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("non-finite RK4 stage".into()));
    }
    Ok(out)
}

/// One RK4 step of a named system.
pub fn rk4_step(system: &OdeSystem, state: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
    let resolved = system.resolve()?;
    rk4_step_with(|s, tt, out| resolved.eval(s, tt, out), state, t, dt)
}

/// Integration settings. Defaults: 20 samples per time unit, 60000 recorded
/// steps, 1000 discarded transient steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub transient_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            steps: 60_000,
            seed: 3001,
            transient_steps: 1000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(Error::Invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.steps == 0 {
            return Err(Error::Invalid("steps must be at least 1".into()));
        }
        Ok(())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

/// Integrates a system, discarding the transient and recording `steps`
/// states. Bit-deterministic in `(system, cfg)`.
pub fn integrate(system: &OdeSystem, cfg: &IntegratorConfig) -> Result<TimeSeries> {
    cfg.validate()?;
    if system.init.len() != system.dim() {
        return Err(Error::Shape(format!(
            "{} initial condition has length {}, expected {}",
            system.name(),
            system.init.len(),
            system.dim()
        )));
    }
    if system.init.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!(
            "{} initial condition is not finite",
            system.name()
        )));
    }

    let resolved = system.resolve()?;
    let mut rng = SplitMix64::derive(cfg.seed, fnv1a(system.name().as_bytes()));
    let mut state: Vec<f64> = system
        .init
        .iter()
        .map(|v| v * (1.0 + 1e-3 * (2.0 * rng.next_f64() - 1.0)))
        .collect();

    let dim = system.dim();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.steps); dim];
    let total = cfg.transient_steps + cfg.steps;
    let mut recorded = 0usize;
    for step in 0..total {
        if step >= cfg.transient_steps {
            for (c, column) in values.iter_mut().enumerate() {
                column.push(state[c]);
            }
            recorded += 1;
            if recorded == cfg.steps {
                break;
            }
        }
        let t = step as f64 * cfg.dt;
        state = rk4_step_with(|s, tt, out| resolved.eval(s, tt, out), &state, t, cfg.dt).map_err(
            |_| Error::Divergence {
                system: system.name().into(),
                step,
            },
        )?;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                system: system.name().into(),
                step,
            });
        }
    }

    let mut series = TimeSeries::from_channels(system.name(), values, cfg.dt)?;
    series.name = system.name().to_string();
    Ok(series)
}

/// One manifest record per generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub dim: usize,
    pub dt: f64,
    pub steps: usize,
    pub transient_steps: usize,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
    /// Parameter names whose values are toolkit defaults rather than values
    /// fixed by the source model descriptions.
    pub toolkit_defaults: Vec<String>,
}

fn toolkit_default_params(kind: SystemKind) -> Vec<String> {
    let names: &[&str] = match kind {
        SystemKind::Lorenz => &[],
        SystemKind::LorenzCoupled => &["eps"],
        SystemKind::DoublePendulum => &["g", "l"],
        SystemKind::CellCycle => &["vi2", "vd2", "kd2", "time_scale"],
        SystemKind::Hopfield => &["gain", "time_scale", "weights"],
        SystemKind::BlinkingRotlet => &["radius", "offset", "strength", "core", "omega"],
    };
    names.iter().map(|s| s.to_string()).collect()
}

/// Generates all six benchmark CSVs plus `manifest.json` under `out_dir`.
pub fn generate_benchmark(out_dir: &Path, cfg: &IntegratorConfig) -> Result<Vec<ManifestEntry>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = Vec::new();
    for kind in SystemKind::all() {
        let system = OdeSystem::standard(kind);
        let series = integrate(&system, cfg)?;
        let path = out_dir.join(format!("{}.csv", system.name()));
        write_csv(&series, &path)?;
        manifest.push(ManifestEntry {
            name: system.name().into(),
            dim: system.dim(),
            dt: cfg.dt,
            steps: cfg.steps,
            transient_steps: cfg.transient_steps,
            seed: cfg.seed,
            params: system.params.clone(),
            toolkit_defaults: toolkit_default_params(kind),
        });
    }
    let manifest_path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::load_csv;

    #[test]
    fn default_config_matches_generation_protocol() {
        let cfg = IntegratorConfig::default();
        assert_eq!(cfg.dt, 0.05); // 20 samples per time unit
        assert_eq!(cfg.steps, 60_000);
        assert_eq!(cfg.transient_steps, 1000);
        assert_eq!(cfg.seed, 3001);
        for kind in SystemKind::all() {
            let sys = OdeSystem::standard(kind);
            assert_eq!(sys.init.len(), kind.dim());
            assert!(sys.eval_rhs(&sys.init, 0.0).is_ok());
        }
    }

    #[test]
    fn lorenz_equilibrium_at_origin() {
        let sys = OdeSystem::standard(SystemKind::Lorenz);
        let rhs = sys.eval_rhs(&[0.0, 0.0, 0.0], 0.0).unwrap();
        assert_eq!(rhs, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn lorenz_hand_substitution() {
        let sys = OdeSystem::standard(SystemKind::Lorenz);
        let rhs = sys.eval_rhs(&[1.0, 1.0, 1.0], 0.0).unwrap();
        assert!((rhs[0] - 0.0).abs() < 1e-15);
        assert!((rhs[1] - 26.0).abs() < 1e-12);
        assert!((rhs[2] - (1.0 - 8.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn double_pendulum_rest_is_fixed_point() {
        for linearized in [0.0, 1.0] {
            let sys = OdeSystem::standard(SystemKind::DoublePendulum)
                .with_param("linearized", linearized);
            let rhs = sys.eval_rhs(&[0.0, 0.0, 0.0, 0.0], 0.0).unwrap();
            assert_eq!(rhs, vec![0.0; 4]);
        }
    }

    #[test]
    fn double_pendulum_linearization_consistency() {
        // for small angles the full equations agree with the linear form
        let nonlin = OdeSystem::standard(SystemKind::DoublePendulum);
        let lin = OdeSystem::standard(SystemKind::DoublePendulum).with_param("linearized", 1.0);
        let state = [1e-4, -5e-5, 0.0, 0.0];
        let a = nonlin.eval_rhs(&state, 0.0).unwrap();
        let b = lin.eval_rhs(&state, 0.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn cell_cycle_zero_state_rate() {
        let sys = OdeSystem::standard(SystemKind::CellCycle);
        let rhs = sys.eval_rhs(&[0.0; 6], 0.0).unwrap();
        let expected = sys.params["vi1"] * sys.params["time_scale"];
        assert!((rhs[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn cell_cycle_singular_denominator_detected() {
        let sys = OdeSystem::standard(SystemKind::CellCycle).with_param("Kd1", 0.0);
        let err = sys.eval_rhs(&[0.0; 6], 0.0).unwrap_err();
        assert!(matches!(err, Error::Singular(_)));
    }

    #[test]
    fn rk4_fixed_point_unchanged() {
        let sys = OdeSystem::standard(SystemKind::Lorenz);
        let next = rk4_step(&sys, &[0.0, 0.0, 0.0], 0.0, 0.05).unwrap();
        assert_eq!(next, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn rk4_scalar_decay_hand_stages() {
        let next = rk4_step_with(
            |s, _t, out| {
                out[0] = -s[0];
                Ok(())
            },
            &[1.0],
            0.0,
            0.1,
        )
        .unwrap();
        assert!((next[0] - 0.90483750).abs() < 1e-8);
    }

    #[test]
    fn rk4_rejects_nonpositive_dt() {
        let sys = OdeSystem::standard(SystemKind::Lorenz);
        assert!(rk4_step(&sys, &[1.0, 1.0, 1.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn integrating_an_equilibrium_repeats_the_state() {
        // zero initial condition sits on the Lorenz fixed point and the
        // relative perturbation leaves zeros untouched
        let sys = OdeSystem::standard(SystemKind::Lorenz).with_init(vec![0.0, 0.0, 0.0]);
        let cfg = IntegratorConfig {
            steps: 10,
            transient_steps: 0,
            ..Default::default()
        };
        let series = integrate(&sys, &cfg).unwrap();
        assert_eq!(series.len(), 10);
        for c in 0..3 {
            assert!(series.channel(c).iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn integrate_shapes_and_determinism() {
        let cfg = IntegratorConfig {
            steps: 500,
            transient_steps: 100,
            ..Default::default()
        };
        let sys = OdeSystem::standard(SystemKind::Lorenz);
        let a = integrate(&sys, &cfg).unwrap();
        let b = integrate(&sys, &cfg).unwrap();
        assert_eq!(a.channels(), 3);
        assert_eq!(a.len(), 500);
        assert_eq!(a, b);

        let other = integrate(&sys, &IntegratorConfig { seed: 3002, ..cfg }).unwrap();
        assert_ne!(a.channel(0), other.channel(0));
    }

    #[test]
    fn lorenz_stays_on_attractor() {
        let cfg = IntegratorConfig {
            steps: 5000,
            ..Default::default()
        };
        let series = integrate(&OdeSystem::standard(SystemKind::Lorenz), &cfg).unwrap();
        for t in 0..series.len() {
            assert!(series.channel(0)[t].abs() < 100.0);
            assert!(series.channel(1)[t].abs() < 100.0);
            assert!(series.channel(2)[t] > 0.0 && series.channel(2)[t] < 100.0);
        }
    }

    #[test]
    fn divergence_is_reported_with_step() {
        // exponential blow-up: Lorenz with negated sigma diverges quickly
        let sys = OdeSystem::standard(SystemKind::Lorenz)
            .with_param("rho", 1e9)
            .with_param("sigma", -1e5);
        let cfg = IntegratorConfig {
            steps: 1000,
            transient_steps: 0,
            ..Default::default()
        };
        match integrate(&sys, &cfg) {
            Err(Error::Divergence { system, .. }) => assert_eq!(system, "Lorenz"),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn generate_writes_csvs_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = IntegratorConfig {
            steps: 200,
            transient_steps: 50,
            ..Default::default()
        };
        let manifest = generate_benchmark(dir.path(), &cfg).unwrap();
        assert_eq!(manifest.len(), 6);
        for entry in &manifest {
            let series = load_csv(&dir.path().join(format!("{}.csv", entry.name)), true).unwrap();
            assert_eq!(series.channels(), entry.dim);
            assert_eq!(series.len(), entry.steps);
        }
        let manifest_json = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let parsed: Vec<ManifestEntry> = serde_json::from_str(&manifest_json).unwrap();
        assert_eq!(parsed, manifest);
    }

    #[test]
    fn seed_changes_every_file() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let cfg_a = IntegratorConfig {
            steps: 100,
            transient_steps: 10,
            seed: 3001,
            ..Default::default()
        };
        let cfg_b = IntegratorConfig {
            seed: 3002,
            ..cfg_a
        };
        generate_benchmark(dir_a.path(), &cfg_a).unwrap();
        generate_benchmark(dir_b.path(), &cfg_b).unwrap();
        for kind in SystemKind::all() {
            let a =
                std::fs::read_to_string(dir_a.path().join(format!("{}.csv", kind.name()))).unwrap();
            let b =
                std::fs::read_to_string(dir_b.path().join(format!("{}.csv", kind.name()))).unwrap();
            assert_ne!(a, b, "{} unchanged by seed", kind.name());
        }
    }
}
