//! Coverage and specificity entropies, the justifiable-granularity measure
//! `L = θ·Hc + ε(1−θ)·Hs`, and the generators built on top of them.
//!
//! [`generate_justifiable`] grows a ball space greedily: every impure
//! splittable ball is pre-split when it enters the space, its split delta
//! `ΔL` is kept in a min-heap, and the ball with the smallest delta is
//! replaced by its children until the heap is empty. Pure balls are final.
//! The space with the lowest `L` seen along the way is returned.
//!
//! All logarithms are natural.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::granular_ball::{
    compute_attributes, is_partition, split_ball, BallSpace, GranularBall, SplitMethod,
};

/// `−p·ln p` with `0·ln 0 = 0`.
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// Coverage entropy of a ball holding `size` of `n` samples.
pub fn coverage_entropy(size: usize, n: usize) -> f64 {
    if size >= n {
        return 0.0;
    }
    plogp(size as f64 / n as f64)
}

/// Label entropy inside one ball, from its per-class counts.
pub fn specificity_entropy(label_counts: &[usize]) -> f64 {
    let total: usize = label_counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    label_counts.iter().map(|&c| plogp(c as f64 / total)).sum()
}

/// Label entropy of a whole dataset (the single-ball specificity).
pub fn label_entropy(ds: &Dataset) -> f64 {
    specificity_entropy(&ds.class_counts())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub coverage: f64,
    pub specificity: f64,
    pub epsilon: f64,
    pub theta: f64,
    #[serde(rename = "L")]
    pub measure: f64,
}

/// The objective `L` for one dataset and one θ. `ε = ln n / H(labels)`,
/// the ratio of the two entropies' extreme values, or 1 when the labels
/// carry no entropy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JustifiableMeasure {
    n: usize,
    theta: f64,
    epsilon: f64,
}

impl JustifiableMeasure {
    pub fn new(ds: &Dataset, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let h = label_entropy(ds);
        let epsilon = if h > 0.0 {
            (ds.len() as f64).ln() / h
        } else {
            1.0
        };
        Ok(JustifiableMeasure {
            n: ds.len(),
            theta,
            epsilon,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn coverage_of(&self, gb: &GranularBall) -> f64 {
        coverage_entropy(gb.len(), self.n)
    }

    fn weighted_specificity_of(&self, gb: &GranularBall) -> f64 {
        gb.len() as f64 / self.n as f64 * specificity_entropy(gb.label_counts())
    }

    /// Contribution of one ball to `L`; `L` is additive over balls.
    pub fn ball_term(&self, gb: &GranularBall) -> f64 {
        self.theta * self.coverage_of(gb)
            + self.epsilon * (1.0 - self.theta) * self.weighted_specificity_of(gb)
    }

    /// `L` after replacing `parent` by `a` and `b`, minus `L` before.
    pub fn split_delta(&self, parent: &GranularBall, a: &GranularBall, b: &GranularBall) -> f64 {
        self.ball_term(a) + self.ball_term(b) - self.ball_term(parent)
    }

    pub fn report<'a>(&self, balls: impl IntoIterator<Item = &'a GranularBall>) -> EntropyReport {
        let mut coverage = 0.0;
        let mut specificity = 0.0;
        for gb in balls {
            coverage += self.coverage_of(gb);
            specificity += self.weighted_specificity_of(gb);
        }
        EntropyReport {
            coverage,
            specificity,
            epsilon: self.epsilon,
            theta: self.theta,
            measure: self.theta * coverage + self.epsilon * (1.0 - self.theta) * specificity,
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::config(format!("theta {theta} outside [0, 1]")))
    }
}

/// Entropies and `L` of a ball space computed from scratch.
pub fn space_measures(balls: &[GranularBall], ds: &Dataset, theta: f64) -> Result<EntropyReport> {
    if !is_partition(balls, ds.len()) {
        return Err(Error::contract("balls do not partition the dataset"));
    }
    Ok(JustifiableMeasure::new(ds, theta)?.report(balls))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub theta: f64,
    pub split_method: SplitMethod,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            theta: 0.5,
            split_method: SplitMethod::TwoMeans,
        }
    }
}

/// One line of the split trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub delta: f64,
    pub current_l: f64,
    pub ball_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub initial_l: f64,
    pub steps: Vec<TraceStep>,
    /// Step whose space was returned; 0 is the initial single ball.
    pub best_step: usize,
    pub best_l: f64,
}

struct Node {
    ball: GranularBall,
    pre_split: Option<Box<(GranularBall, GranularBall)>>,
    delta: f64,
    born: usize,
    died: Option<usize>,
}

/// State handed to a generation observer after every pop.
pub struct GenerationStep<'a> {
    pub step: usize,
    pub delta: f64,
    pub current_l: f64,
    pub ball_count: usize,
    /// Smallest delta left in the heap right after the pop, before the
    /// children were inserted.
    pub remaining_min_delta: Option<f64>,
    nodes: &'a [Node],
}

impl GenerationStep<'_> {
    /// Balls of the current space.
    pub fn balls(&self) -> Vec<GranularBall> {
        self.nodes
            .iter()
            .filter(|n| n.died.is_none())
            .map(|n| n.ball.clone())
            .collect()
    }
}

#[derive(PartialEq)]
struct HeapKey {
    delta: f64,
    id: usize,
}

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.delta
            .total_cmp(&other.delta)
            .then(self.id.cmp(&other.id))
    }
}

struct Generator<'d> {
    ds: &'d Dataset,
    measure: JustifiableMeasure,
    method: SplitMethod,
    nodes: Vec<Node>,
    heap: BinaryHeap<Reverse<HeapKey>>,
}

impl Generator<'_> {
    fn insert(&mut self, ball: GranularBall, born: usize) -> Result<()> {
        let id = self.nodes.len();
        // a pure ball has reached the break condition and is never split
        let (pre_split, delta) = if ball.is_splittable() && !ball.is_pure() {
            let (a, b) = split_ball(&ball, self.ds, self.method)?;
            let delta = self.measure.split_delta(&ball, &a, &b);
            (Some(Box::new((a, b))), delta)
        } else {
            (None, f64::INFINITY)
        };
        if pre_split.is_some() {
            self.heap.push(Reverse(HeapKey { delta, id }));
        }
        self.nodes.push(Node {
            ball,
            pre_split,
            delta,
            born,
            died: None,
        });
        Ok(())
    }
}

/// Greedy minimum-`L` generation; see the module docs.
pub fn generate_justifiable(ds: &Dataset, config: &GenerationConfig) -> Result<BallSpace> {
    generate_justifiable_observed(ds, config, |_| {}).map(|(space, _)| space)
}

/// Generation that calls `observer` after every split.
pub fn generate_justifiable_observed(
    ds: &Dataset,
    config: &GenerationConfig,
    mut observer: impl FnMut(&GenerationStep<'_>),
) -> Result<(BallSpace, GenerationTrace)> {
    let measure = JustifiableMeasure::new(ds, config.theta)?;
    let root = compute_attributes((0..ds.len()).collect(), ds)?;
    let initial_l = measure.ball_term(&root);

    let mut gen = Generator {
        ds,
        measure,
        method: config.split_method,
        nodes: Vec::new(),
        heap: BinaryHeap::new(),
    };
    gen.insert(root, 0)?;

    let mut current_l = initial_l;
    let mut min_l = initial_l;
    let mut best_step = 0;
    let mut ball_count = 1;
    let mut steps = Vec::new();
    let mut step = 0;

    while let Some(Reverse(HeapKey { id, .. })) = gen.heap.pop() {
        step += 1;
        let remaining_min_delta = gen.heap.peek().map(|Reverse(k)| k.delta);

        let node = &mut gen.nodes[id];
        let delta = node.delta;
        node.died = Some(step);
        let (a, b) = *node
            .pre_split
            .take()
            .expect("heap entries carry a pre-split");
        gen.insert(a, step)?;
        gen.insert(b, step)?;

        current_l += delta;
        ball_count += 1;
        if current_l < min_l {
            min_l = current_l;
            best_step = step;
        }
        steps.push(TraceStep {
            step,
            delta,
            current_l,
            ball_count,
        });
        observer(&GenerationStep {
            step,
            delta,
            current_l,
            ball_count,
            remaining_min_delta,
            nodes: &gen.nodes,
        });
    }

    let balls = gen
        .nodes
        .into_iter()
        .filter(|n| n.born <= best_step && n.died.is_none_or(|d| d > best_step))
        .map(|n| n.ball)
        .collect();
    Ok((
        BallSpace {
            balls,
            dataset_size: ds.len(),
        },
        GenerationTrace {
            initial_l,
            steps,
            best_step,
            best_l: min_l,
        },
    ))
}

/// Conventional purity-controlled generation: split every splittable ball
/// whose purity is below `purity_threshold` until none is left.
pub fn generate_purity_baseline(
    ds: &Dataset,
    purity_threshold: f64,
    method: SplitMethod,
) -> Result<BallSpace> {
    if !(purity_threshold > 0.5 && purity_threshold <= 1.0) {
        return Err(Error::config(format!(
            "purity threshold {purity_threshold} outside (0.5, 1]"
        )));
    }
    let mut pending = vec![compute_attributes((0..ds.len()).collect(), ds)?];
    let mut done = Vec::new();
    while let Some(gb) = pending.pop() {
        if gb.is_splittable() && gb.purity() < purity_threshold {
            let (a, b) = split_ball(&gb, ds, method)?;
            pending.push(b);
            pending.push(a);
        } else {
            done.push(gb);
        }
    }
    Ok(BallSpace {
        balls: done,
        dataset_size: ds.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::normalize_min_max;

    const LN2: f64 = std::f64::consts::LN_2;

    fn ds(points: &[(f64, f64, usize)]) -> Dataset {
        let rows = points.iter().map(|p| vec![p.0, p.1]).collect();
        let labels = points.iter().map(|p| p.2).collect();
        Dataset::new(rows, labels, 2).unwrap()
    }

    #[test]
    fn coverage_examples() {
        assert_eq!(coverage_entropy(8, 8), 0.0);
        assert!((coverage_entropy(4, 8) - 0.346_573_590_279_972_6).abs() < 1e-12);
        assert!((coverage_entropy(1, 4) - 0.25 * 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn specificity_examples() {
        assert_eq!(specificity_entropy(&[5, 0]), 0.0);
        assert!((specificity_entropy(&[3, 3]) - LN2).abs() < 1e-12);
        let expected = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((specificity_entropy(&[3, 1]) - expected).abs() < 1e-12);
        assert!((expected - 0.562_335_144_618_808_2).abs() < 1e-12);
    }

    fn four_points() -> Dataset {
        ds(&[(0.0, 0.0, 0), (0.0, 0.1, 0), (1.0, 0.0, 1), (1.0, 0.1, 1)])
    }

    #[test]
    fn boundary_spaces() {
        let d = four_points();
        let theta = 0.3;
        let whole = vec![compute_attributes(vec![0, 1, 2, 3], &d).unwrap()];
        let r = space_measures(&whole, &d, theta).unwrap();
        assert_eq!(r.coverage, 0.0);
        assert!((r.specificity - LN2).abs() < 1e-12);
        assert!((r.epsilon - 2.0).abs() < 1e-12);
        assert!((r.measure - 2.0 * 0.7 * LN2).abs() < 1e-12);

        let singles: Vec<_> = (0..4)
            .map(|i| compute_attributes(vec![i], &d).unwrap())
            .collect();
        let r = space_measures(&singles, &d, theta).unwrap();
        assert!((r.coverage - 4f64.ln()).abs() < 1e-12);
        assert_eq!(r.specificity, 0.0);
        assert!((r.measure - theta * 4f64.ln()).abs() < 1e-12);

        let pairs = vec![
            compute_attributes(vec![0, 1], &d).unwrap(),
            compute_attributes(vec![2, 3], &d).unwrap(),
        ];
        let r = space_measures(&pairs, &d, theta).unwrap();
        assert!((r.coverage - LN2).abs() < 1e-12);
        assert_eq!(r.specificity, 0.0);
        assert!((r.measure - theta * LN2).abs() < 1e-12);
    }

    #[test]
    fn report_is_consistent() {
        let d = four_points();
        let balls = vec![
            compute_attributes(vec![0, 2], &d).unwrap(),
            compute_attributes(vec![1, 3], &d).unwrap(),
        ];
        let r = space_measures(&balls, &d, 0.4).unwrap();
        let l = r.theta * r.coverage + r.epsilon * (1.0 - r.theta) * r.specificity;
        assert!((r.measure - l).abs() < 1e-12);
    }

    #[test]
    fn non_partition_rejected() {
        let d = four_points();
        let balls = vec![compute_attributes(vec![0, 1], &d).unwrap()];
        assert!(matches!(
            space_measures(&balls, &d, 0.5),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn single_class_keeps_initial_ball() {
        let d = ds(&[(0.0, 0.0, 0), (0.3, 0.9, 0), (1.0, 0.5, 0), (0.2, 0.2, 0)]);
        let space =
            generate_justifiable(&normalize_min_max(&d), &GenerationConfig::default()).unwrap();
        assert_eq!(space.len(), 1);
        assert_eq!(space.balls[0].len(), 4);
    }

    #[test]
    fn two_separated_clusters_give_two_balls() {
        // Hand enumeration at theta = 0.5, eps = ln4/ln2 = 2:
        //   one ball     L = 2 * 0.5 * ln2          = ln2
        //   two pure     L = 0.5 * ln2              = 0.3466
        //   three balls  L = 0.5 * (ln2/2 + ln4/2)  = 0.5199
        //   singletons   L = 0.5 * ln4              = ln2
        let one = 2.0 * 0.5 * LN2;
        let two = 0.5 * (2.0 * 0.5 * 2f64.ln());
        let three = 0.5 * (0.5 * 2f64.ln() + 2.0 * 0.25 * 4f64.ln());
        let four = 0.5 * 4f64.ln();
        assert!(two < one && two < three && two < four);

        let d = normalize_min_max(&four_points());
        let (space, trace) =
            generate_justifiable_observed(&d, &GenerationConfig::default(), |_| {}).unwrap();
        assert_eq!(space.len(), 2);
        assert!((trace.best_l - two).abs() < 1e-12);
        let mut sets: Vec<_> = space.balls.iter().map(|b| b.members().to_vec()).collect();
        sets.sort();
        assert_eq!(sets, vec![vec![0, 1], vec![2, 3]]);
    }

    fn noisy_xor(n_per_quadrant: usize) -> Dataset {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for q in 0..4 {
            let (cx, cy) = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)][q];
            for _ in 0..n_per_quadrant {
                rows.push(vec![
                    cx + rng.random_range(-0.3..0.3),
                    cy + rng.random_range(-0.3..0.3),
                ]);
                let clean = usize::from((cx + cy) as usize == 1);
                labels.push(if rng.random_bool(0.2) {
                    1 - clean
                } else {
                    clean
                });
            }
        }
        Dataset::new(rows, labels, 2).unwrap()
    }

    #[test]
    fn purity_baseline_reaches_purity_under_noise() {
        let d = normalize_min_max(&noisy_xor(10));
        let purity = generate_purity_baseline(&d, 1.0, SplitMethod::TwoMeans).unwrap();
        assert!(is_partition(&purity.balls, d.len()));
        assert!(purity
            .balls
            .iter()
            .all(|b| b.is_pure() || !b.is_splittable()));
        assert!(purity.len() > 4);

        // the justifiable space ends below the single-ball measure
        let (_, trace) =
            generate_justifiable_observed(&d, &GenerationConfig::default(), |_| {}).unwrap();
        assert!(trace.best_l < trace.initial_l);
    }

    #[test]
    fn purity_baseline_threshold_edge_cases() {
        let d = normalize_min_max(&four_points());
        let all = generate_purity_baseline(&d, 1.0, SplitMethod::TwoMeans).unwrap();
        assert!(all.balls.iter().all(|b| b.is_pure()));
        let skewed = ds(&[(0.0, 0.0, 0), (0.5, 0.1, 0), (1.0, 0.0, 0), (1.0, 1.0, 1)]);
        let one = generate_purity_baseline(&skewed, 0.75, SplitMethod::TwoMeans).unwrap();
        assert_eq!(one.len(), 1);
        assert!(generate_purity_baseline(&d, 0.5, SplitMethod::TwoMeans).is_err());
    }

    #[test]
    fn snapshot_is_minimum_of_visited_spaces() {
        let d = normalize_min_max(&noisy_xor(15));
        let mut visited = Vec::new();
        let (space, trace) = generate_justifiable_observed(
            &d,
            &GenerationConfig {
                theta: 0.4,
                split_method: SplitMethod::TwoMeans,
            },
            |s| {
                visited.push(s.current_l);
                if let Some(m) = s.remaining_min_delta {
                    assert!(s.delta <= m);
                }
            },
        )
        .unwrap();
        let l = space_measures(&space.balls, &d, 0.4).unwrap().measure;
        assert!((l - trace.best_l).abs() < 1e-9);
        assert!(l <= trace.initial_l + 1e-12);
        for v in visited {
            assert!(l <= v + 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let d = normalize_min_max(&noisy_xor(12));
        let cfg = GenerationConfig {
            theta: 0.6,
            split_method: SplitMethod::TwoDivision,
        };
        assert_eq!(
            generate_justifiable(&d, &cfg).unwrap(),
            generate_justifiable(&d, &cfg).unwrap()
        );
    }

    #[test]
    fn single_sample_dataset() {
        let d = Dataset::new(vec![vec![0.5, 0.5]], vec![1], 2).unwrap();
        let space = generate_justifiable(&d, &GenerationConfig::default()).unwrap();
        assert_eq!(space.len(), 1);
    }

    #[test]
    fn theta_out_of_range() {
        let d = four_points();
        let cfg = GenerationConfig {
            theta: 1.2,
            split_method: SplitMethod::TwoMeans,
        };
        assert!(generate_justifiable(&d, &cfg).unwrap_err().is_config());
    }
}
