//! Three-way classification over shadowed granular-balls, plus the
//! nearest-ball baseline.
//!
//! For a query `x` with memberships `μ_i`:
//!
//! * if some `μ_i ≥ 1−α_i`, the core region controls. One distinct label
//!   among those balls commits to it; several labels defer.
//! * otherwise, if some `μ_i > α_i`, the important region controls. The
//!   memberships of those balls are summed per label and a label with a
//!   strict majority of the total commits; anything else defers.
//! * otherwise the query is unessential to every ball and defers.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, MinMaxScaler};
use crate::error::{Error, Result};
use crate::granular_ball::{dist, sq_dist, BallSpace, BallSummary};
use crate::granulation::{generate_justifiable_observed, GenerationConfig, GenerationTrace};
use crate::shadowing::{shadow_space, AlphaConfig, ShadowedBall, DEFAULT_SIGMA};

pub const MODEL_FORMAT: &str = "shadowgb-classifier";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    #[serde(rename = "COR")]
    Core,
    #[serde(rename = "IMP")]
    Important,
    #[serde(rename = "UNE")]
    Unessential,
}

impl RegionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionKind::Core => "COR",
            RegionKind::Important => "IMP",
            RegionKind::Unessential => "UNE",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Certain(usize),
    Uncertain,
}

impl Outcome {
    pub fn label(&self) -> Option<usize> {
        match self {
            Outcome::Certain(l) => Some(*l),
            Outcome::Uncertain => None,
        }
    }
}

/// Per-label membership sums of an important-region decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportantSupport {
    /// `(label, Σμ)` in ascending label order.
    pub sums: Vec<(usize, f64)>,
    pub leader: usize,
    pub proportion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeWayPrediction {
    pub outcome: Outcome,
    pub region: RegionKind,
    pub support: Option<ImportantSupport>,
}

/// Evidence of the controlling region.
#[derive(Clone, Debug, PartialEq)]
pub enum ControlledRegion {
    /// Distinct labels of the balls whose core holds the query, ascending.
    Core(Vec<usize>),
    /// `(label, Σμ)` over balls whose band holds the query, ascending label.
    Important(Vec<(usize, f64)>),
    Unessential,
}

impl ControlledRegion {
    pub fn kind(&self) -> RegionKind {
        match self {
            ControlledRegion::Core(_) => RegionKind::Core,
            ControlledRegion::Important(_) => RegionKind::Important,
            ControlledRegion::Unessential => RegionKind::Unessential,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub generation: GenerationConfig,
    pub sigma: f64,
    pub alpha: AlphaConfig,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            generation: GenerationConfig::default(),
            sigma: DEFAULT_SIGMA,
            alpha: AlphaConfig::default(),
        }
    }
}

/// Squared-distance form of a ball's two thresholds. Each cutoff is kept
/// as a guard interval; only inside it is the membership itself compared.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Cutoffs {
    /// `μ ≥ 1−α` below `core.0`, `μ < 1−α` above `core.1`
    core: (f64, f64),
    /// `μ > α` below `band.0`, `μ ≤ α` above `band.1`
    band: (f64, f64),
    /// `2σ²r²`, so that `μ = exp(−d²/scale)`
    scale: f64,
    alpha: f64,
    label: usize,
}

impl Cutoffs {
    fn of(sb: &ShadowedBall) -> Self {
        let scale = 2.0 * sb.sigma * sb.sigma * sb.effective_radius * sb.effective_radius;
        Cutoffs {
            core: guarded(-scale * (1.0 - sb.alpha).ln()),
            band: guarded(-scale * sb.alpha.ln()),
            scale,
            alpha: sb.alpha,
            label: sb.ball.label,
        }
    }
}

/// Contiguous copy of what prediction reads, rebuilt after loading.
#[derive(Clone, Debug, Default, PartialEq)]
struct Lookup {
    centers: Vec<f64>,
    cutoffs: Vec<Cutoffs>,
}

impl Lookup {
    fn of(balls: &[ShadowedBall]) -> Self {
        Lookup {
            centers: balls
                .iter()
                .flat_map(|b| b.ball.center.iter().copied())
                .collect(),
            cutoffs: balls.iter().map(Cutoffs::of).collect(),
        }
    }
}

/// Balls measured per pass of [`ShadowClassifier::scan`]; one bit each.
const CHUNK: usize = 64;

/// Relative width of the band around a cutoff inside which the exact
/// membership comparison is used instead of the squared-distance one.
const CUTOFF_GUARD: f64 = 1e-9;

fn guarded(cutoff: f64) -> (f64, f64) {
    let slack = CUTOFF_GUARD * cutoff.abs().max(f64::MIN_POSITIVE);
    (cutoff - slack, cutoff + slack)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowClassifier {
    format: String,
    version: u32,
    balls: Vec<ShadowedBall>,
    class_count: usize,
    dim: usize,
    label_names: Vec<String>,
    config: ClassifierConfig,
    scaler: Option<MinMaxScaler>,
    #[serde(skip)]
    lookup: Lookup,
}

impl ShadowClassifier {
    /// Builds the justifiable ball space of a normalized training set and
    /// shadows every ball.
    pub fn fit(train: &Dataset, config: &ClassifierConfig) -> Result<Self> {
        Self::fit_traced(train, config).map(|(clf, _)| clf)
    }

    /// [`Self::fit`] that also returns the generation trace.
    pub fn fit_traced(
        train: &Dataset,
        config: &ClassifierConfig,
    ) -> Result<(Self, GenerationTrace)> {
        if train.is_empty() {
            return Err(Error::config("empty training set"));
        }
        if !train.is_normalized() {
            return Err(Error::contract("training data must be min-max normalized"));
        }
        if train.class_count() < 2 {
            return Err(Error::config("classification needs at least two classes"));
        }
        let (space, trace) = generate_justifiable_observed(train, &config.generation, |_| {})?;
        Ok((Self::from_space(&space, train, config)?, trace))
    }

    /// Shadows an existing ball space of `train`.
    pub fn from_space(
        space: &BallSpace,
        train: &Dataset,
        config: &ClassifierConfig,
    ) -> Result<Self> {
        let balls = shadow_space(space, train, config.sigma, &config.alpha)?;
        Self::from_parts(
            balls,
            train.class_count(),
            train.dim(),
            train.label_names().to_vec(),
            *config,
        )
    }

    pub fn from_parts(
        balls: Vec<ShadowedBall>,
        class_count: usize,
        dim: usize,
        label_names: Vec<String>,
        config: ClassifierConfig,
    ) -> Result<Self> {
        let mut clf = ShadowClassifier {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            balls,
            class_count,
            dim,
            label_names,
            config,
            scaler: None,
            lookup: Lookup::default(),
        };
        clf.validate()?;
        clf.lookup = Lookup::of(&clf.balls);
        Ok(clf)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Model(m));
        if self.format != MODEL_FORMAT {
            return bad(format!("unexpected format tag {:?}", self.format));
        }
        if self.version != MODEL_VERSION {
            return bad(format!("unsupported model version {}", self.version));
        }
        if self.balls.is_empty() {
            return bad("model has no balls".into());
        }
        if self.dim == 0 {
            return bad("model has no features".into());
        }
        if self.label_names.len() != self.class_count {
            return bad("label name count differs from class count".into());
        }
        if let Some(s) = &self.scaler {
            if s.dim() != self.dim || s.maxs.len() != self.dim {
                return bad("scaler dimension differs from model dimension".into());
            }
        }
        for (i, b) in self.balls.iter().enumerate() {
            if b.ball.label >= self.class_count {
                return bad(format!("ball {i} label {} out of range", b.ball.label));
            }
            if b.ball.center.len() != self.dim {
                return bad(format!("ball {i} center has wrong dimension"));
            }
            if !(b.alpha > 0.0 && b.alpha < 0.5) {
                return bad(format!("ball {i} alpha {} outside (0, 0.5)", b.alpha));
            }
            if !(b.sigma > 0.0 && b.effective_radius > 0.0) {
                return bad(format!("ball {i} needs positive sigma and radius"));
            }
            if b.ball.center.iter().any(|v| !v.is_finite()) {
                return bad(format!("ball {i} center is not finite"));
            }
        }
        Ok(())
    }

    /// Attaches the training scaler used by [`Self::predict_raw`].
    pub fn with_scaler(mut self, scaler: MinMaxScaler) -> Result<Self> {
        if scaler.dim() != self.dim {
            return Err(Error::config(
                "scaler dimension differs from model dimension",
            ));
        }
        self.scaler = Some(scaler);
        Ok(self)
    }

    pub fn balls(&self) -> &[ShadowedBall] {
        &self.balls
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    pub fn scaler(&self) -> Option<&MinMaxScaler> {
        self.scaler.as_ref()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(dim_mismatch(x.len(), self.dim));
        }
        Ok(())
    }

    /// Controlled region by literal application of the three rules over all
    /// balls.
    pub fn resolve_controlled_region(&self, x: &[f64]) -> Result<ControlledRegion> {
        self.check_dim(x)?;
        let mu: Vec<f64> = self.balls.iter().map(|b| b.membership(x)).collect();

        let mut core: Vec<usize> = self
            .balls
            .iter()
            .zip(&mu)
            .filter(|(b, &m)| m >= 1.0 - b.alpha)
            .map(|(b, _)| b.label())
            .collect();
        if !core.is_empty() {
            core.sort_unstable();
            core.dedup();
            return Ok(ControlledRegion::Core(core));
        }

        let mut sums = vec![None::<f64>; self.class_count];
        for (b, &m) in self.balls.iter().zip(&mu) {
            if m > b.alpha {
                *sums[b.label()].get_or_insert(0.0) += m;
            }
        }
        let sums: Vec<(usize, f64)> = sums
            .into_iter()
            .enumerate()
            .filter_map(|(l, s)| s.map(|s| (l, s)))
            .collect();
        if sums.is_empty() {
            Ok(ControlledRegion::Unessential)
        } else {
            Ok(ControlledRegion::Important(sums))
        }
    }

    /// Three-way decision for a normalized query.
    pub fn predict(&self, x: &[f64]) -> Result<ThreeWayPrediction> {
        self.check_dim(x)?;
        let mut sums = vec![0.0; self.class_count];
        Ok(match self.scan(x, Some(&mut sums)) {
            Scan::Conflict => ThreeWayPrediction {
                outcome: Outcome::Uncertain,
                region: RegionKind::Core,
                support: None,
            },
            Scan::Core(l) => ThreeWayPrediction {
                outcome: Outcome::Certain(l),
                region: RegionKind::Core,
                support: None,
            },
            Scan::Empty => ThreeWayPrediction {
                outcome: Outcome::Uncertain,
                region: RegionKind::Unessential,
                support: None,
            },
            Scan::Band(_) => important_decision(present(&sums).collect()),
        })
    }

    /// Same outcome as `predict` without building the region details.
    /// Memberships are only evaluated when the band holds several labels.
    pub fn classify(&self, x: &[f64]) -> Result<Outcome> {
        const INLINE: usize = 8;
        self.check_dim(x)?;
        Ok(match self.scan(x, None) {
            Scan::Conflict | Scan::Empty => Outcome::Uncertain,
            Scan::Core(l) | Scan::Band(Some(l)) => Outcome::Certain(l),
            Scan::Band(None) => {
                let mut inline = [0.0; INLINE];
                let mut heap = Vec::new();
                let sums = if self.class_count <= INLINE {
                    &mut inline[..self.class_count]
                } else {
                    heap.resize(self.class_count, 0.0);
                    &mut heap[..]
                };
                self.scan(x, Some(&mut *sums));
                let (leader, proportion) = lead(present(sums));
                if proportion > 0.5 {
                    Outcome::Certain(leader)
                } else {
                    Outcome::Uncertain
                }
            }
        })
    }

    /// Walks the balls once. With `sums` (all zero on entry) band
    /// memberships are accumulated per label; without it they are only
    /// computed where a threshold is too close to call.
    #[inline(always)]
    fn scan(&self, x: &[f64], mut sums: Option<&mut [f64]>) -> Scan {
        let mut core_label: Option<usize> = None;
        let mut band_label: Option<usize> = None;
        let mut mixed = false;
        let mut rest = &self.lookup.centers[..];
        for chunk in self.lookup.cutoffs.chunks(CHUNK) {
            // branch-free first pass: one bit per ball within band reach;
            // beyond the band means beyond the core as well
            let block = rest;
            let mut hits = 0u64;
            for (j, c) in chunk.iter().enumerate() {
                let (center, tail) = rest.split_at(self.dim);
                rest = tail;
                hits |= u64::from(sq_dist(x, center) <= c.band.1) << j;
            }
            while hits != 0 {
                let j = hits.trailing_zeros() as usize;
                hits &= hits - 1;
                let c = &chunk[j];
                let d2 = sq_dist(x, &block[j * self.dim..(j + 1) * self.dim]);
                let in_core = if d2 < c.core.0 {
                    true
                } else if d2 > c.core.1 {
                    false
                } else {
                    (-d2 / c.scale).exp() >= 1.0 - c.alpha
                };
                if in_core {
                    match core_label {
                        None => core_label = Some(c.label),
                        // two distinct core labels settle the decision
                        Some(l) if l != c.label => return Scan::Conflict,
                        Some(_) => {}
                    }
                    continue;
                }
                if core_label.is_some() {
                    continue;
                }
                let in_band = d2 < c.band.0 || (-d2 / c.scale).exp() > c.alpha;
                if !in_band {
                    continue;
                }
                if let Some(sums) = sums.as_deref_mut() {
                    sums[c.label] += (-d2 / c.scale).exp();
                }
                match band_label {
                    None => band_label = Some(c.label),
                    Some(l) if l != c.label => mixed = true,
                    Some(_) => {}
                }
            }
        }
        match (core_label, band_label) {
            (Some(l), _) => Scan::Core(l),
            (None, Some(l)) => Scan::Band((!mixed).then_some(l)),
            (None, None) => Scan::Empty,
        }
    }

    /// Applies the training scaler, when present, before predicting.
    pub fn predict_raw(&self, x: &[f64]) -> Result<ThreeWayPrediction> {
        self.check_dim(x)?;
        match &self.scaler {
            Some(s) => self.predict(&s.transform_row(x)),
            None => self.predict(x),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut clf: ShadowClassifier =
            serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        clf.validate()?;
        clf.lookup = Lookup::of(&clf.balls);
        Ok(clf)
    }
}

/// Decision from important-region sums: the leader commits only with a
/// strict majority of the total membership.
pub fn important_decision(sums: Vec<(usize, f64)>) -> ThreeWayPrediction {
    let (leader, proportion) = lead(sums.iter().copied());
    let outcome = if proportion > 0.5 {
        Outcome::Certain(leader)
    } else {
        Outcome::Uncertain
    };
    ThreeWayPrediction {
        outcome,
        region: RegionKind::Important,
        support: Some(ImportantSupport {
            sums,
            leader,
            proportion,
        }),
    }
}

#[cold]
fn dim_mismatch(got: usize, expected: usize) -> Error {
    Error::config(format!(
        "query has {got} features, model expects {expected}"
    ))
}

/// Leading label and its share of the total; equal sums favor the smaller
/// label.
fn lead(sums: impl Iterator<Item = (usize, f64)>) -> (usize, f64) {
    let mut total = 0.0;
    let mut best: Option<(usize, f64)> = None;
    for (l, s) in sums {
        total += s;
        let better = match best {
            None => true,
            Some((bl, bs)) => s.total_cmp(&bs).then(bl.cmp(&l)).is_gt(),
        };
        if better {
            best = Some((l, s));
        }
    }
    let (leader, top) = best.expect("important region has at least one label");
    (leader, top / total)
}

/// Labels with a positive band sum; band memberships are always positive.
fn present(sums: &[f64]) -> impl Iterator<Item = (usize, f64)> + '_ {
    sums.iter()
        .enumerate()
        .filter(|&(_, &s)| s > 0.0)
        .map(|(l, &s)| (l, s))
}

enum Scan {
    Conflict,
    Core(usize),
    /// Important region; carries the label when only one label is present.
    Band(Option<usize>),
    Empty,
}

/// Decision principles applied to a resolved controlled region.
pub fn decide(region: ControlledRegion) -> ThreeWayPrediction {
    match region {
        ControlledRegion::Core(labels) => ThreeWayPrediction {
            outcome: if labels.len() == 1 {
                Outcome::Certain(labels[0])
            } else {
                Outcome::Uncertain
            },
            region: RegionKind::Core,
            support: None,
        },
        ControlledRegion::Important(sums) => important_decision(sums),
        ControlledRegion::Unessential => ThreeWayPrediction {
            outcome: Outcome::Uncertain,
            region: RegionKind::Unessential,
            support: None,
        },
    }
}

/// Nearest-ball rule: the label of the ball minimizing `d(x, c) − r`, ties
/// broken by smaller radius, then smaller label.
pub fn predict_gbknn(balls: &[BallSummary], x: &[f64]) -> Result<usize> {
    let mut best: Option<(f64, f64, usize)> = None;
    for b in balls {
        if b.center.len() != x.len() {
            return Err(Error::config("query dimension differs from ball dimension"));
        }
        let key = (dist(x, &b.center) - b.radius, b.radius, b.label);
        let better = match best {
            None => true,
            Some(cur) => key
                .0
                .total_cmp(&cur.0)
                .then(key.1.total_cmp(&cur.1))
                .then(key.2.cmp(&cur.2))
                .is_lt(),
        };
        if better {
            best = Some(key);
        }
    }
    best.map(|b| b.2)
        .ok_or_else(|| Error::contract("nearest-ball rule needs at least one ball"))
}

/// Nearest-ball classifier over a fixed ball space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbKnnClassifier {
    pub balls: Vec<BallSummary>,
}

impl GbKnnClassifier {
    pub fn new(space: &BallSpace) -> Self {
        GbKnnClassifier {
            balls: space.summaries(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        predict_gbknn(&self.balls, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::normalize_min_max;

    fn ball(center: Vec<f64>, radius: f64, label: usize, alpha: f64) -> ShadowedBall {
        ShadowedBall {
            ball: BallSummary {
                center,
                radius,
                label,
                purity: 1.0,
                size: 5,
            },
            sigma: 1.0,
            alpha,
            effective_radius: radius,
        }
    }

    fn clf(balls: Vec<ShadowedBall>) -> ShadowClassifier {
        let names = vec!["A".into(), "B".into()];
        ShadowClassifier::from_parts(balls, 2, 1, names, ClassifierConfig::default()).unwrap()
    }

    /// Distance at which membership equals `mu` for radius 1, sigma 1.
    fn at(mu: f64) -> f64 {
        (-2.0 * mu.ln()).sqrt()
    }

    #[test]
    fn center_is_core() {
        let c = clf(vec![
            ball(vec![0.3], 0.1, 1, 0.2),
            ball(vec![0.9], 0.1, 0, 0.2),
        ]);
        let p = c.predict(&[0.3]).unwrap();
        assert_eq!(p.region, RegionKind::Core);
        assert_eq!(p.outcome, Outcome::Certain(1));
    }

    #[test]
    fn far_query_is_unessential() {
        let c = clf(vec![
            ball(vec![0.0], 0.01, 0, 0.2),
            ball(vec![0.1], 0.01, 1, 0.2),
        ]);
        assert_eq!(
            c.resolve_controlled_region(&[5.0]).unwrap(),
            ControlledRegion::Unessential
        );
        let p = c.predict(&[5.0]).unwrap();
        assert_eq!(p.outcome, Outcome::Uncertain);
        assert_eq!(p.region, RegionKind::Unessential);
    }

    #[test]
    fn important_region_sums_and_majority() {
        // A at distance giving mu = 0.6, B on the other side with mu = 0.55
        let x = 0.0;
        let c = clf(vec![
            ball(vec![x - at(0.6)], 1.0, 0, 0.3),
            ball(vec![x + at(0.55)], 1.0, 1, 0.3),
        ]);
        match c.resolve_controlled_region(&[x]).unwrap() {
            ControlledRegion::Important(sums) => {
                assert_eq!(sums.len(), 2);
                assert!((sums[0].1 - 0.6).abs() < 1e-12);
                assert!((sums[1].1 - 0.55).abs() < 1e-12);
            }
            other => panic!("expected IMP, got {other:?}"),
        }
        let p = c.predict(&[x]).unwrap();
        assert_eq!(p.outcome, Outcome::Certain(0));
        let s = p.support.unwrap();
        assert!((s.proportion - 0.6 / 1.15).abs() < 1e-12);
        assert!((s.proportion - 0.5217).abs() < 1e-4);
    }

    #[test]
    fn even_split_defers() {
        let p = important_decision(vec![(0, 0.4), (1, 0.4)]);
        assert_eq!(p.outcome, Outcome::Uncertain);
        let p = important_decision(vec![(0, 0.2), (1, 0.3), (2, 0.25)]);
        assert_eq!(p.outcome, Outcome::Uncertain);
    }

    #[test]
    fn same_label_cores_commit() {
        let c = clf(vec![
            ball(vec![0.0], 1.0, 1, 0.3),
            ball(vec![0.1], 1.0, 1, 0.3),
        ]);
        let p = c.predict(&[0.05]).unwrap();
        assert_eq!(
            (p.outcome, p.region),
            (Outcome::Certain(1), RegionKind::Core)
        );
    }

    #[test]
    fn conflicting_cores_defer() {
        let c = clf(vec![
            ball(vec![0.0], 1.0, 0, 0.3),
            ball(vec![0.1], 1.0, 1, 0.3),
        ]);
        let p = c.predict(&[0.05]).unwrap();
        assert_eq!(
            (p.outcome, p.region),
            (Outcome::Uncertain, RegionKind::Core)
        );
        assert_eq!(
            c.resolve_controlled_region(&[0.05]).unwrap(),
            ControlledRegion::Core(vec![0, 1])
        );
    }

    #[test]
    fn core_boundary_counts_as_core() {
        let alpha = 0.25;
        let c = clf(vec![ball(vec![0.0], 1.0, 0, alpha)]);
        let x = at(1.0 - alpha);
        let naive = decide(c.resolve_controlled_region(&[x]).unwrap());
        assert_eq!(c.predict(&[x]).unwrap(), naive);
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let c = clf(vec![ball(vec![0.0], 1.0, 0, 0.3)]);
        assert!(c.predict(&[0.0, 1.0]).unwrap_err().is_config());
    }

    #[test]
    fn gbknn_rules() {
        let balls = vec![
            BallSummary {
                center: vec![0.0],
                radius: 0.5,
                label: 1,
                purity: 1.0,
                size: 3,
            },
            BallSummary {
                center: vec![3.0],
                radius: 0.2,
                label: 0,
                purity: 1.0,
                size: 3,
            },
        ];
        assert_eq!(predict_gbknn(&balls, &[0.0]).unwrap(), 1);
        assert_eq!(predict_gbknn(&balls, &[3.0]).unwrap(), 0);
        // d - r = 0.6 - 0.5 = 0.1 vs 2.4 - 0.2 = 2.2
        assert_eq!(predict_gbknn(&balls, &[0.6]).unwrap(), 1);
        // equal d - r: 1.5 - 0.5 = 1.0 and 1.2 - 0.2 = 1.0 -> smaller radius
        let tie = vec![
            BallSummary {
                center: vec![0.0],
                radius: 0.5,
                label: 1,
                purity: 1.0,
                size: 3,
            },
            BallSummary {
                center: vec![2.75],
                radius: 0.25,
                label: 0,
                purity: 1.0,
                size: 3,
            },
        ];
        assert_eq!(predict_gbknn(&tie, &[1.5]).unwrap(), 0);
        assert!(predict_gbknn(&[], &[0.0]).is_err());
    }

    #[test]
    fn single_class_training_commits() {
        let ds = Dataset::new(
            vec![
                vec![0.0, 0.0],
                vec![0.2, 0.1],
                vec![1.0, 1.0],
                vec![0.5, 0.4],
            ],
            vec![1, 1, 1, 1],
            2,
        )
        .unwrap();
        let ds = normalize_min_max(&ds);
        let c = ShadowClassifier::fit(&ds, &ClassifierConfig::default()).unwrap();
        assert_eq!(c.balls().len(), 1);
        let center = c.balls()[0].ball.center.clone();
        assert_eq!(c.predict(&center).unwrap().outcome, Outcome::Certain(1));
    }

    #[test]
    fn fit_requires_normalized_nonempty_data() {
        let ds = Dataset::new(vec![vec![0.0], vec![2.0]], vec![0, 1], 2).unwrap();
        assert!(ShadowClassifier::fit(&ds, &ClassifierConfig::default()).is_err());
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let c = clf(vec![
            ball(vec![0.0], 1.0, 0, 0.3),
            ball(vec![2.0], 0.5, 1, 0.1),
        ]);
        let text = c.to_json().unwrap();
        let back = ShadowClassifier::from_json(&text).unwrap();
        assert_eq!(back, c);
        for q in [-1.0, 0.4, 1.3, 2.2, 9.0] {
            assert_eq!(back.predict(&[q]).unwrap(), c.predict(&[q]).unwrap());
        }
        let broken = text.replace("\"alpha\": 0.3", "\"alpha\": 0.7");
        assert!(matches!(
            ShadowClassifier::from_json(&broken),
            Err(Error::Model(_))
        ));
        assert!(matches!(
            ShadowClassifier::from_json("{}"),
            Err(Error::Model(_))
        ));
    }
}
