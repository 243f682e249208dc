use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of log-spaced τ starting points.
pub const TAU_STARTS: usize = 32;

/// τ is searched over `[span/TAU_RANGE, span·TAU_RANGE]`.
pub const TAU_RANGE: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `A·e^{−t/τ}`
    Exp,
    /// `A·e^{−t/τ} + C`
    ExpOffset,
}

impl DecayModel {
    pub fn min_points(self) -> usize {
        match self {
            DecayModel::Exp => 3,
            DecayModel::ExpOffset => 4,
        }
    }
}

impl FromStr for DecayModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(DecayModel::Exp),
            "exp_offset" => Ok(DecayModel::ExpOffset),
            other => Err(Error::invalid(format!(
                "unknown decay model {other:?}, expected exp or exp_offset"
            ))),
        }
    }
}

impl fmt::Display for DecayModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecayModel::Exp => "exp",
            DecayModel::ExpOffset => "exp_offset",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub a: f64,
    pub tau: f64,
    /// Present for [`DecayModel::ExpOffset`].
    pub c: Option<f64>,
    pub rms_residual: f64,
    /// False when τ sits on a search bound or the exponential term vanished.
    pub converged: bool,
}

impl DecayFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.a * (-t / self.tau).exp() + self.c.unwrap_or(0.0)
    }
}

/// Linear amplitudes and residual sum of squares for fixed τ, with A, C ≥ 0.
fn project(points: &[(f64, f64)], tau: f64, model: DecayModel) -> (f64, f64, f64) {
    let sse = |a: f64, c: f64| -> f64 {
        points
            .iter()
            .map(|&(t, y)| (a * (-t / tau).exp() + c - y).powi(2))
            .sum()
    };
    let (mut see, mut sey, mut se, mut sy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in points {
        let e = (-t / tau).exp();
        see += e * e;
        sey += e * y;
        se += e;
        sy += y;
    }
    let n = points.len() as f64;
    let a_only = if see > 0.0 { (sey / see).max(0.0) } else { 0.0 };
    match model {
        DecayModel::Exp => (a_only, 0.0, sse(a_only, 0.0)),
        DecayModel::ExpOffset => {
            let mut best = (a_only, 0.0, sse(a_only, 0.0));
            let c_only = (sy / n).max(0.0);
            let cand = sse(0.0, c_only);
            if cand < best.2 {
                best = (0.0, c_only, cand);
            }
            let det = see * n - se * se;
            if det > 0.0 {
                let a = (sey * n - se * sy) / det;
                let c = (see * sy - se * sey) / det;
                if a >= 0.0 && c >= 0.0 {
                    let cand = sse(a, c);
                    if cand <= best.2 {
                        best = (a, c, cand);
                    }
                }
            }
            best
        }
    }
}

/// Least-squares fit of an exponential decay by variable projection: the
/// amplitudes are linear for fixed τ, and `ln τ` is located by a log-spaced
/// grid followed by golden-section refinement around the best start.
pub fn fit_decay(points: &[(f64, f64)], model: DecayModel) -> Result<DecayFit> {
    if points.len() < model.min_points() {
        return Err(Error::invalid(format!(
            "{model} fit needs at least {} points, got {}",
            model.min_points(),
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(t, y)| !t.is_finite() || !y.is_finite() || y < 0.0)
    {
        return Err(Error::invalid("fit points must be finite with non-negative amplitudes"));
    }
    let t_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let span = t_max - t_min;
    if !(span > 0.0) {
        return Err(Error::invalid("fit points need at least two distinct times"));
    }
    let (lo, hi) = ((span / TAU_RANGE).ln(), (span * TAU_RANGE).ln());
    let cost = |x: f64| project(points, x.exp(), model).2;

    let step = (hi - lo) / (TAU_STARTS - 1) as f64;
    let starts: Vec<f64> = (0..TAU_STARTS).map(|k| lo + k as f64 * step).collect();
    let costs: Vec<f64> = starts.iter().map(|&x| cost(x)).collect();
    let best = (0..TAU_STARTS)
        .min_by(|&a, &b| costs[a].total_cmp(&costs[b]))
        .expect("non-empty");

    let (mut a, mut b) = (
        starts[best.saturating_sub(1)],
        starts[(best + 1).min(TAU_STARTS - 1)],
    );
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    while b - a > 1e-12 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
    }
    let mut x = 0.5 * (a + b);
    for cand in [starts[best], lo, hi] {
        if cost(cand) < cost(x) {
            x = cand;
        }
    }
    let tau = x.exp();
    let (amp, c, sse) = project(points, tau, model);
    let on_bound = (x - lo).abs() < 1e-6 || (hi - x).abs() < 1e-6;
    Ok(DecayFit {
        model,
        a: amp,
        tau,
        c: (model == DecayModel::ExpOffset).then_some(c),
        rms_residual: (sse / points.len() as f64).sqrt(),
        converged: !on_bound && amp > 0.0 && sse.is_finite(),
    })
}
