//! Granular-balls: member subsets of a dataset summarized by center,
//! mean-distance radius, modal label and purity, plus the binary split
//! primitive shared by every generation strategy.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Maximum Lloyd iterations for the two-means split.
pub const TWO_MEANS_MAX_ITER: usize = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMethod {
    /// Lloyd iterations with k = 2 from the anchor pair.
    #[default]
    TwoMeans,
    /// One nearest-anchor assignment pass.
    TwoDivision,
}

impl std::str::FromStr for SplitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-means" | "two_means" => Ok(SplitMethod::TwoMeans),
            "two-division" | "two_division" => Ok(SplitMethod::TwoDivision),
            other => Err(Error::config(format!("unknown split method {other:?}"))),
        }
    }
}

impl std::fmt::Display for SplitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitMethod::TwoMeans => "two-means",
            SplitMethod::TwoDivision => "two-division",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GranularBall {
    members: Vec<usize>,
    center: Vec<f64>,
    radius: f64,
    label: usize,
    purity: f64,
    splittable: bool,
    label_counts: Vec<usize>,
}

impl GranularBall {
    /// Sample indices into the owning dataset, ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn purity(&self) -> f64 {
        self.purity
    }

    pub fn is_pure(&self) -> bool {
        self.label_counts[self.label] == self.members.len()
    }

    pub fn is_splittable(&self) -> bool {
        self.splittable
    }

    /// Member count per class identifier.
    pub fn label_counts(&self) -> &[usize] {
        &self.label_counts
    }

    pub fn summary(&self) -> BallSummary {
        BallSummary {
            center: self.center.clone(),
            radius: self.radius,
            label: self.label,
            purity: self.purity,
            size: self.members.len(),
        }
    }
}

/// Attribute-only view of a ball, used for persistence and baselines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSummary {
    pub center: Vec<f64>,
    pub radius: f64,
    pub label: usize,
    pub purity: f64,
    pub size: usize,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

fn mean_of(members: &[usize], ds: &Dataset) -> Vec<f64> {
    let mut c = vec![0.0; ds.dim()];
    for &i in members {
        for (acc, v) in c.iter_mut().zip(ds.row(i)) {
            *acc += v;
        }
    }
    let inv = 1.0 / members.len() as f64;
    c.iter_mut().for_each(|v| *v *= inv);
    c
}

/// Builds a ball over `members`. The modal label breaks ties toward the
/// smallest class identifier.
pub fn compute_attributes(mut members: Vec<usize>, ds: &Dataset) -> Result<GranularBall> {
    if members.is_empty() {
        return Err(Error::contract("a granular-ball needs at least one member"));
    }
    if let Some(&bad) = members.iter().find(|&&i| i >= ds.len()) {
        return Err(Error::contract(format!("member index {bad} out of range")));
    }
    members.sort_unstable();

    let center = mean_of(&members, ds);
    let radius = members
        .iter()
        .map(|&i| dist(ds.row(i), &center))
        .sum::<f64>()
        / members.len() as f64;

    let mut label_counts = vec![0usize; ds.class_count()];
    for &i in &members {
        label_counts[ds.label(i)] += 1;
    }
    let (label, &top) = label_counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("class_count >= 1");
    let purity = top as f64 / members.len() as f64;

    let first = ds.row(members[0]);
    let splittable = members.len() >= 2 && members.iter().any(|&i| ds.row(i) != first);

    Ok(GranularBall {
        members,
        center,
        radius,
        label,
        purity,
        splittable,
        label_counts,
    })
}

/// Member farthest from `from`; first index wins ties.
fn farthest(members: &[usize], ds: &Dataset, from: &[f64]) -> usize {
    let mut best = members[0];
    let mut best_d = -1.0;
    for &i in members {
        let d = sq_dist(ds.row(i), from);
        if d > best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn farthest_pair_anchors(gb: &GranularBall, ds: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let a = farthest(&gb.members, ds, &gb.center);
    let b = farthest(&gb.members, ds, ds.row(a));
    (ds.row(a).to_vec(), ds.row(b).to_vec())
}

/// Centroids of the two most frequent classes, if the ball is mixed.
fn class_anchors(gb: &GranularBall, ds: &Dataset) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut present: Vec<usize> = (0..gb.label_counts.len())
        .filter(|&c| gb.label_counts[c] > 0)
        .collect();
    if present.len() < 2 {
        return None;
    }
    present.sort_by(|&a, &b| gb.label_counts[b].cmp(&gb.label_counts[a]).then(a.cmp(&b)));
    let centroid = |class: usize| {
        let idx: Vec<usize> = gb
            .members
            .iter()
            .copied()
            .filter(|&i| ds.label(i) == class)
            .collect();
        mean_of(&idx, ds)
    };
    let a = centroid(present[0]);
    let b = centroid(present[1]);
    if sq_dist(&a, &b) > 0.0 {
        Some((a, b))
    } else {
        None
    }
}

/// `true` = first anchor. Ties go to the first anchor.
fn assign(members: &[usize], ds: &Dataset, a: &[f64], b: &[f64]) -> Vec<bool> {
    members
        .iter()
        .map(|&i| {
            let row = ds.row(i);
            sq_dist(row, a) <= sq_dist(row, b)
        })
        .collect()
}

fn both_sides(side: &[bool]) -> bool {
    side.iter().any(|&s| s) && side.iter().any(|&s| !s)
}

fn lloyd(members: &[usize], ds: &Dataset, mut side: Vec<bool>) -> Vec<bool> {
    for _ in 0..TWO_MEANS_MAX_ITER {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (&i, &s) in members.iter().zip(&side) {
            if s {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        let next = assign(members, ds, &mean_of(&left, ds), &mean_of(&right, ds));
        // an assignment that empties a side is rejected; the previous one stands
        if next == side || !both_sides(&next) {
            break;
        }
        side = next;
    }
    side
}

fn partition_with(
    gb: &GranularBall,
    ds: &Dataset,
    method: SplitMethod,
    anchors: (Vec<f64>, Vec<f64>),
) -> Option<Vec<bool>> {
    let side = assign(&gb.members, ds, &anchors.0, &anchors.1);
    if !both_sides(&side) {
        return None;
    }
    Some(match method {
        SplitMethod::TwoDivision => side,
        SplitMethod::TwoMeans => lloyd(&gb.members, ds, side),
    })
}

/// Splits a ball in two. Mixed balls start from the centroids of their two
/// most frequent classes; pure balls (or mixed balls whose class centroids
/// coincide) start from the farthest-point pair. Deterministic.
pub fn split_ball(
    gb: &GranularBall,
    ds: &Dataset,
    method: SplitMethod,
) -> Result<(GranularBall, GranularBall)> {
    if !gb.splittable {
        return Err(Error::contract("ball is not splittable"));
    }
    let side = class_anchors(gb, ds)
        .and_then(|anchors| partition_with(gb, ds, method, anchors))
        .or_else(|| partition_with(gb, ds, method, farthest_pair_anchors(gb, ds)))
        .ok_or_else(|| Error::contract("split produced an empty child"))?;

    let mut left = Vec::new();
    let mut right = Vec::new();
    for (&i, &s) in gb.members.iter().zip(&side) {
        if s {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    Ok((
        compute_attributes(left, ds)?,
        compute_attributes(right, ds)?,
    ))
}

/// A set of balls whose members partition `0..dataset_size`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallSpace {
    pub balls: Vec<GranularBall>,
    pub dataset_size: usize,
}

impl BallSpace {
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn summaries(&self) -> Vec<BallSummary> {
        self.balls.iter().map(GranularBall::summary).collect()
    }
}

/// True iff the member sets are disjoint and cover `0..n`.
pub fn is_partition(balls: &[GranularBall], n: usize) -> bool {
    let mut seen = vec![false; n];
    for gb in balls {
        for &i in gb.members() {
            if i >= n || seen[i] {
                return false;
            }
            seen[i] = true;
        }
    }
    seen.into_iter().all(|s| s)
}
