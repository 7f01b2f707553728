//! Gaussian ball membership and the per-ball threshold search that turns a
//! granular-ball into a shadowed one.
//!
//! A shadowed ball maps memberships `μ ≥ 1−α` to 1, `μ ≤ α` to 0 and keeps
//! the rest. `α` is chosen per ball by minimizing an equal weighted sum of
//! the uncertainty variance (membership mass lost by the 0/1 rounding) and
//! the band fuzziness (`Σ 4μ(1−μ)` over the kept band), each min-max
//! normalized over the whole range `0 < α < 0.5`. The objective only
//! changes where `α` crosses some `min(μ, 1−μ)`, so the search visits one
//! candidate per interval between those breakpoints: the first grid point
//! inside it, or its midpoint when the grid skips it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::granular_ball::{sq_dist, BallSpace, BallSummary, GranularBall};

pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_ALPHA_STEP: f64 = 0.005;
/// Objective differences below this count as ties. The objective lies in
/// `[0, 1]`, so this only absorbs rounding.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Threshold used when a ball has at most one member or all its members
/// share one membership value.
pub const DEGENERATE_ALPHA: f64 = 0.25;
/// Radius floor when no ball in the space has a positive radius.
pub const MIN_EFFECTIVE_RADIUS: f64 = 1e-6;

/// `exp(−d²/(2σ²r²))` from a squared distance.
pub fn gaussian_membership(dist_sq: f64, radius: f64, sigma: f64) -> f64 {
    (-dist_sq / (2.0 * sigma * sigma * radius * radius)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShadowValue {
    One,
    Zero,
    Fuzzy(f64),
}

/// Three-valued image of `mu` under the threshold pair `(alpha, 1 − alpha)`.
pub fn shadow_map(alpha: f64, mu: f64) -> ShadowValue {
    if mu >= 1.0 - alpha {
        ShadowValue::One
    } else if mu <= alpha {
        ShadowValue::Zero
    } else {
        ShadowValue::Fuzzy(mu)
    }
}

/// Mass moved by rounding: `Σ_{μ≤α} μ + Σ_{μ≥1−α} (1−μ)`.
pub fn uncertainty_variance(memberships: &[f64], alpha: f64) -> f64 {
    memberships
        .iter()
        .map(|&mu| {
            if mu <= alpha {
                mu
            } else if mu >= 1.0 - alpha {
                1.0 - mu
            } else {
                0.0
            }
        })
        .sum()
}

/// `Σ 4μ(1−μ)` over memberships strictly inside `(α, 1−α)`.
pub fn band_fuzziness(memberships: &[f64], alpha: f64) -> f64 {
    memberships
        .iter()
        .filter(|&&mu| mu > alpha && mu < 1.0 - alpha)
        .map(|&mu| 4.0 * mu * (1.0 - mu))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaConfig {
    /// Spacing of the candidate grid `{s, 2s, …}` below 0.5.
    pub grid_step: f64,
    /// Weight of the normalized variance; fuzziness gets `1 − w`.
    pub variance_weight: f64,
}

impl Default for AlphaConfig {
    fn default() -> Self {
        AlphaConfig {
            grid_step: DEFAULT_ALPHA_STEP,
            variance_weight: 0.5,
        }
    }
}

impl AlphaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step > 0.0 && self.grid_step <= 0.1) {
            return Err(Error::config(format!(
                "alpha grid step {} outside (0, 0.1]",
                self.grid_step
            )));
        }
        if !(0.0..=1.0).contains(&self.variance_weight) {
            return Err(Error::config("variance weight outside [0, 1]"));
        }
        Ok(())
    }
}

/// Candidate thresholds `k·step` strictly between 0 and 0.5.
pub fn alpha_grid(step: f64) -> Vec<f64> {
    let count = (0.5 / step - 1e-9).floor() as usize;
    (1..=count)
        .map(|k| k as f64 * step)
        .filter(|&a| a < 0.5)
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaDiagnostics {
    pub grid: Vec<f64>,
    pub variance_curve: Vec<f64>,
    pub fuzziness_curve: Vec<f64>,
    pub objective_curve: Vec<f64>,
    pub chosen: f64,
}

impl AlphaDiagnostics {
    /// Writes `alpha,V,F,f` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Write(e.into());
        w.write_record(["alpha", "V", "F", "f"]).map_err(io)?;
        for i in 0..self.grid.len() {
            w.write_record([
                self.grid[i].to_string(),
                self.variance_curve[i].to_string(),
                self.fuzziness_curve[i].to_string(),
                self.objective_curve[i].to_string(),
            ])
            .map_err(io)?;
        }
        Ok(w.flush()?)
    }
}

/// Extremes of the two curves over `0 < α < 0.5`: variance runs from 0 up
/// to its value just below 0.5, fuzziness from the full-band sum down to
/// the contribution of memberships equal to 0.5.
fn curve_bounds(memberships: &[f64]) -> ((f64, f64), (f64, f64)) {
    let mut v_hi = 0.0;
    let mut f_lo = 0.0;
    let mut f_hi = 0.0;
    for &mu in memberships {
        if mu < 0.5 {
            v_hi += mu;
        } else if mu > 0.5 {
            v_hi += 1.0 - mu;
        } else {
            f_lo += 1.0;
        }
        if mu > 0.0 && mu < 1.0 {
            f_hi += 4.0 * mu * (1.0 - mu);
        }
    }
    ((0.0, v_hi), (f_lo, f_hi))
}

fn normalize(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// Variance, fuzziness and combined objective at each `grid` point. The
/// normalization does not depend on the grid, so curves from different
/// grids describe the same function.
pub fn objective_curve(
    memberships: &[f64],
    grid: &[f64],
    variance_weight: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (v_bounds, f_bounds) = curve_bounds(memberships);
    let variance: Vec<f64> = grid
        .iter()
        .map(|&a| uncertainty_variance(memberships, a))
        .collect();
    let fuzziness: Vec<f64> = grid
        .iter()
        .map(|&a| band_fuzziness(memberships, a))
        .collect();
    let objective = variance
        .iter()
        .zip(&fuzziness)
        .map(|(&v, &f)| {
            variance_weight * normalize(v, v_bounds)
                + (1.0 - variance_weight) * normalize(f, f_bounds)
        })
        .collect();
    (variance, fuzziness, objective)
}

/// Sorted memberships with prefix sums, for O(log n) curve evaluation.
struct Profile {
    sorted: Vec<f64>,
    /// `Σ μ` over the first `i` memberships.
    mass: Vec<f64>,
    /// `Σ 4μ(1−μ)` over the first `i` memberships.
    fuzz: Vec<f64>,
}

impl Profile {
    fn new(memberships: &[f64]) -> Self {
        let mut sorted = memberships.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut mass = Vec::with_capacity(sorted.len() + 1);
        let mut fuzz = Vec::with_capacity(sorted.len() + 1);
        let (mut m, mut f) = (0.0, 0.0);
        mass.push(m);
        fuzz.push(f);
        for &mu in &sorted {
            m += mu;
            f += 4.0 * mu * (1.0 - mu);
            mass.push(m);
            fuzz.push(f);
        }
        Profile { sorted, mass, fuzz }
    }

    /// Same values as `uncertainty_variance` and `band_fuzziness`.
    fn curves(&self, alpha: f64) -> (f64, f64) {
        let n = self.sorted.len();
        let low = self.sorted.partition_point(|&mu| mu <= alpha);
        let high = self.sorted.partition_point(|&mu| mu < 1.0 - alpha).max(low);
        let variance = self.mass[low] + (n - high) as f64 - (self.mass[n] - self.mass[high]);
        (variance, self.fuzz[high] - self.fuzz[low])
    }
}

/// Threshold minimizing the combined objective; ties (within
/// `TIE_TOLERANCE`) go to the smaller threshold. The diagnostics cover the grid plus the chosen point, so
/// `chosen` is the minimum of the reported curve.
pub fn optimal_alpha_from_memberships(
    memberships: &[f64],
    config: &AlphaConfig,
) -> Result<(f64, AlphaDiagnostics)> {
    config.validate()?;
    let degenerate = memberships.len() <= 1 || memberships.iter().all(|&m| m == memberships[0]);
    if degenerate {
        return Ok((
            DEGENERATE_ALPHA,
            AlphaDiagnostics {
                chosen: DEGENERATE_ALPHA,
                ..Default::default()
            },
        ));
    }
    let profile = Profile::new(memberships);
    let (v_bounds, f_bounds) = curve_bounds(memberships);
    let objective = |alpha: f64| {
        let (v, f) = profile.curves(alpha);
        config.variance_weight * normalize(v, v_bounds)
            + (1.0 - config.variance_weight) * normalize(f, f_bounds)
    };

    let mut edges: Vec<f64> = profile
        .sorted
        .iter()
        .map(|&mu| mu.min(1.0 - mu))
        .filter(|&b| b > 0.0 && b < 0.5)
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges.insert(0, 0.0);
    edges.push(0.5);

    let grid = alpha_grid(config.grid_step);
    let mut chosen = grid[0];
    let mut best = f64::INFINITY;
    for w in edges.windows(2) {
        let first = grid.partition_point(|&g| g < w[0]);
        let alpha = match grid.get(first) {
            Some(&g) if g < w[1] => g,
            _ => 0.5 * (w[0] + w[1]),
        };
        let value = objective(alpha);
        if value < best - TIE_TOLERANCE {
            best = value;
            chosen = alpha;
        }
    }

    let mut points = grid;
    if let Err(at) = points.binary_search_by(|g| g.total_cmp(&chosen)) {
        points.insert(at, chosen);
    }
    let (variance_curve, fuzziness_curve, objective_curve) =
        objective_curve(memberships, &points, config.variance_weight);
    Ok((
        chosen,
        AlphaDiagnostics {
            grid: points,
            variance_curve,
            fuzziness_curve,
            objective_curve,
            chosen,
        },
    ))
}

/// Memberships of a ball's own members.
pub fn member_memberships(
    ball: &GranularBall,
    ds: &Dataset,
    effective_radius: f64,
    sigma: f64,
) -> Vec<f64> {
    ball.members()
        .iter()
        .map(|&i| gaussian_membership(sq_dist(ds.row(i), ball.center()), effective_radius, sigma))
        .collect()
}

pub fn optimal_alpha(
    ball: &GranularBall,
    ds: &Dataset,
    effective_radius: f64,
    sigma: f64,
    config: &AlphaConfig,
) -> Result<(f64, AlphaDiagnostics)> {
    optimal_alpha_from_memberships(
        &member_memberships(ball, ds, effective_radius, sigma),
        config,
    )
}

/// A ball with its threshold pair `(alpha, 1 − alpha)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowedBall {
    pub ball: BallSummary,
    pub sigma: f64,
    pub alpha: f64,
    pub effective_radius: f64,
}

impl ShadowedBall {
    pub fn membership(&self, x: &[f64]) -> f64 {
        gaussian_membership(
            sq_dist(x, &self.ball.center),
            self.effective_radius,
            self.sigma,
        )
    }

    pub fn shadow(&self, mu: f64) -> ShadowValue {
        shadow_map(self.alpha, mu)
    }

    pub fn label(&self) -> usize {
        self.ball.label
    }
}

/// Radii used for membership: zero radii are lifted to the smallest
/// positive radius in the space, or [`MIN_EFFECTIVE_RADIUS`].
pub fn effective_radii(balls: &[GranularBall]) -> Vec<f64> {
    let floor = balls
        .iter()
        .map(GranularBall::radius)
        .filter(|&r| r > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() {
        floor
    } else {
        MIN_EFFECTIVE_RADIUS
    };
    balls
        .iter()
        .map(|b| if b.radius() > 0.0 { b.radius() } else { floor })
        .collect()
}

/// Shadows every ball of a space with its own optimal threshold.
pub fn shadow_space(
    space: &BallSpace,
    ds: &Dataset,
    sigma: f64,
    config: &AlphaConfig,
) -> Result<Vec<ShadowedBall>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::config(format!("sigma {sigma} must be positive")));
    }
    config.validate()?;
    let radii = effective_radii(&space.balls);
    space
        .balls
        .iter()
        .zip(radii)
        .map(|(gb, r)| {
            let (alpha, _) = optimal_alpha(gb, ds, r, sigma, config)?;
            Ok(ShadowedBall {
                ball: gb.summary(),
                sigma,
                alpha,
                effective_radius: r,
            })
        })
        .collect()
}
