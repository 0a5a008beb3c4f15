//! The Cauchy problem φφ″ = ((k−1)/(k−2))(φ′)²: closed-form branches and
//! backward continuation with an embedded Runge–Kutta pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const ODE_RTOL: f64 = 1e-10;
pub const ODE_ATOL: f64 = 1e-14;
pub const BLOW_UP: f64 = 1e9;
pub const MIN_STEP: f64 = 1e-14;
/// φ(0) must stay above MARGIN·c.
pub const MARGIN: f64 = 1e-6;

pub fn ode_alpha(k: u32) -> f64 {
    (k as f64 - 1.0) / (k as f64 - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
    Zero,
}

/// φ(t) = ±(At+B)^{−(k−2)}, or φ ≡ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    pub k: u32,
    pub alpha: f64,
    pub branch: Branch,
    pub a: f64,
    pub b: f64,
}

impl OdeSolution {
    pub fn new(k: u32, branch: Branch, a: f64, b: f64) -> Result<OdeSolution> {
        if k < 3 {
            return Err(LabError::Domain(format!("the equation needs k ≥ 3, got {k}")));
        }
        if branch != Branch::Zero && a == 0.0 {
            return Err(LabError::Domain("A must be nonzero".into()));
        }
        Ok(OdeSolution { k, alpha: ode_alpha(k), branch, a, b })
    }

    pub fn zero(k: u32) -> Result<OdeSolution> {
        OdeSolution::new(k, Branch::Zero, 0.0, 0.0)
    }

    /// Closed-form power 1/(1−α) = −(k−2).
    pub fn power(&self) -> i32 {
        -(self.k as i32 - 2)
    }

    /// (−B/A, ∞) for A > 0, (−∞, −B/A) for A < 0.
    pub fn domain(&self) -> (f64, f64) {
        if self.branch == Branch::Zero {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let t = -self.b / self.a;
        if self.a > 0.0 {
            (t, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, t)
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.domain();
        t > lo && t < hi
    }

    fn sign(&self) -> f64 {
        match self.branch {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
            Branch::Zero => 0.0,
        }
    }

    /// (φ, φ′, φ″) at t.
    pub fn derivs(&self, t: f64) -> (f64, f64, f64) {
        if self.branch == Branch::Zero {
            return (0.0, 0.0, 0.0);
        }
        let m = (self.k - 2) as f64;
        let x = self.a * t + self.b;
        let s = self.sign();
        let phi = s * x.powf(-m);
        let d1 = -s * m * self.a * x.powf(-m - 1.0);
        let d2 = s * m * (m + 1.0) * self.a * self.a * x.powf(-m - 2.0);
        (phi, d1, d2)
    }
}

pub fn ode_residual(sol: &OdeSolution, ts: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &t in ts {
        if !sol.contains(t) {
            return Err(LabError::Precondition(format!("t = {t} lies outside the solution's interval")));
        }
        let (p, d1, d2) = sol.derivs(t);
        worst = worst.max((p * d2 - sol.alpha * d1 * d1).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum OdeVerdict {
    /// |(φ, φ′)| passed the blow-up threshold at t* > 0.
    BlowUp { t_star: f64, step_underflow: bool },
    ReachesZero { phi0: f64, margin: f64 },
    /// Reached t = 0 with φ(0) below the margin.
    Falsifying { phi0: f64, margin: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeReport {
    pub k: u32,
    pub t0: f64,
    pub c: f64,
    pub d: f64,
    pub verdict: OdeVerdict,
    pub accepted: usize,
    pub rejected: usize,
}

impl OdeReport {
    pub fn falsifying(&self) -> bool {
        matches!(self.verdict, OdeVerdict::Falsifying { .. })
    }
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rhs(alpha: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1], alpha * y[1] * y[1] / y[0]]
}

/// Integrates from t₀ down to 0 starting at φ(t₀) = c > 0, φ′(t₀) = d.
pub fn ode_no_nontrivial_solution(k: u32, t0: f64, c: f64, d: f64) -> Result<OdeReport> {
    if k < 3 {
        return Err(LabError::Domain(format!("the equation needs k ≥ 3, got {k}")));
    }
    if !(c > 0.0) || !(t0 > 0.0) || !d.is_finite() {
        return Err(LabError::Domain("need t₀ > 0, φ(t₀) > 0 and finite φ′(t₀)".into()));
    }
    let alpha = ode_alpha(k);
    let margin = MARGIN * c;
    let mut t = t0;
    let mut y = [c, d];
    let mut h = -(t0 * 1e-3).min(1e-2);
    let (mut accepted, mut rejected) = (0, 0);
    let report = |verdict, accepted, rejected| OdeReport { k, t0, c, d, verdict, accepted, rejected };
    loop {
        if y[0].abs().max(y[1].abs()) > BLOW_UP || !y[0].is_finite() || !y[1].is_finite() {
            return Ok(report(OdeVerdict::BlowUp { t_star: t, step_underflow: false }, accepted, rejected));
        }
        if t <= 0.0 {
            let verdict = if y[0] >= margin {
                OdeVerdict::ReachesZero { phi0: y[0], margin }
            } else {
                OdeVerdict::Falsifying { phi0: y[0], margin }
            };
            return Ok(report(verdict, accepted, rejected));
        }
        if h.abs() < MIN_STEP {
            return Ok(report(OdeVerdict::BlowUp { t_star: t, step_underflow: true }, accepted, rejected));
        }
        if t + h < 0.0 {
            h = -t;
        }
        let mut kk = [[0.0f64; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in kk.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            kk[s] = rhs(alpha, ys);
        }
        let mut y5 = y;
        let mut err = [0.0f64; 2];
        for s in 0..7 {
            for i in 0..2 {
                y5[i] += h * B5[s] * kk[s][i];
                err[i] += h * (B5[s] - B4[s]) * kk[s][i];
            }
        }
        let en = (0..2)
            .map(|i| err[i].abs() / (ODE_ATOL + ODE_RTOL * y[i].abs().max(y5[i].abs())))
            .fold(0.0f64, f64::max);
        let ok = en <= 1.0 && y5[0].is_finite() && y5[1].is_finite() && y5[0] > 0.0;
        if ok {
            t = if t + h <= 0.0 || (t + h).abs() < 1e-15 * t0 { 0.0 } else { t + h };
            y = y5;
            accepted += 1;
        } else {
            rejected += 1;
        }
        let factor = if en.is_finite() && en > 0.0 { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) } else if en == 0.0 { 5.0 } else { 0.2 };
        h *= if ok { factor } else { factor.min(1.0) };
    }
}

/// Seeded sweep with c ∈ [0.1, 10], d ∈ [−10, 10], t₀ = 1.
pub fn ode_sweep(k: u32, count: usize, seed: u64) -> Result<Vec<OdeReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let c = rng.random_range(0.1..=10.0);
        let d = rng.random_range(-10.0..=10.0);
        out.push(ode_no_nontrivial_solution(k, 1.0, c, d)?);
    }
    Ok(out)
}
