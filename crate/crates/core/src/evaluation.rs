//! Three-way metrics, cost accounting and the cross-validated noise
//! experiment.
//!
//! Deferred predictions are never correct: accuracy and recall count them
//! as misses, precision only looks at committed predictions.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierConfig, GbKnnClassifier, Outcome, ShadowClassifier};
use crate::data::{derive_seed, inject_label_noise, make_folds, Dataset, MinMaxScaler};
use crate::error::{Error, Result};
use crate::granulation::{generate_purity_baseline, GenerationTrace};

/// Per-instance costs of the three outcome kinds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    pub correct: f64,
    pub wrong: f64,
    pub defer: f64,
}

impl Default for CostMatrix {
    fn default() -> Self {
        CostMatrix {
            correct: 0.0,
            wrong: 10.0,
            defer: 2.0,
        }
    }
}

impl CostMatrix {
    pub fn validate(&self) -> Result<()> {
        if self.wrong > self.defer && self.defer >= self.correct && self.correct >= 0.0 {
            Ok(())
        } else {
            Err(Error::config(format!(
                "cost matrix must satisfy wrong > defer >= correct >= 0, got {}/{}/{}",
                self.correct, self.wrong, self.defer
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ur: f64,
    pub cost: f64,
    pub n: usize,
    pub correct: usize,
    pub wrong: usize,
    pub deferred: usize,
}

/// Scores three-way outcomes against the true labels with respect to one
/// positive class.
pub fn score(
    predictions: &[Outcome],
    truth: &[usize],
    positive_class: usize,
    class_count: usize,
    costs: &CostMatrix,
) -> Result<MetricRecord> {
    if predictions.len() != truth.len() {
        return Err(Error::contract("prediction and truth lengths differ"));
    }
    if positive_class >= class_count {
        return Err(Error::config(format!(
            "positive class {positive_class} outside [0, {class_count})"
        )));
    }
    let n = truth.len();
    let (mut correct, mut wrong, mut deferred) = (0, 0, 0);
    let (mut tp, mut fp, mut actual_pos) = (0usize, 0usize, 0usize);
    for (p, &t) in predictions.iter().zip(truth) {
        if t == positive_class {
            actual_pos += 1;
        }
        match *p {
            Outcome::Uncertain => deferred += 1,
            Outcome::Certain(l) => {
                if l == t {
                    correct += 1;
                } else {
                    wrong += 1;
                }
                if l == positive_class {
                    if t == positive_class {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                }
            }
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, actual_pos);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let cost = if n == 0 {
        0.0
    } else {
        (costs.wrong * wrong as f64
            + costs.defer * deferred as f64
            + costs.correct * correct as f64)
            / n as f64
    };
    Ok(MetricRecord {
        accuracy: ratio(correct, n),
        precision,
        recall,
        f1,
        ur: ratio(deferred, n),
        cost,
        n,
        correct,
        wrong,
        deferred,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    #[default]
    Shadow3wc,
    Gbknn,
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shadow3wc" | "shadow_3wc" => Ok(ClassifierKind::Shadow3wc),
            "gbknn" | "gbknn_baseline" => Ok(ClassifierKind::Gbknn),
            other => Err(Error::config(format!("unknown classifier {other:?}"))),
        }
    }
}

/// Everything that determines one cross-validated run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub classifier: ClassifierKind,
    pub model: ClassifierConfig,
    pub noise_rate: f64,
    pub fold_count: usize,
    pub seed: u64,
    pub costs: CostMatrix,
    /// Purity threshold of the baseline's ball generation.
    pub baseline_purity: f64,
    /// Worker threads for folds; 1 runs inline.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            classifier: ClassifierKind::Shadow3wc,
            model: ClassifierConfig::default(),
            noise_rate: 0.0,
            fold_count: 10,
            seed: 0,
            costs: CostMatrix::default(),
            baseline_purity: 1.0,
            jobs: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::config(format!(
                "noise rate {} outside [0, 1]",
                self.noise_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.model.generation.theta) {
            return Err(Error::config(format!(
                "theta {} outside [0, 1]",
                self.model.generation.theta
            )));
        }
        if !(self.model.sigma > 0.0 && self.model.sigma.is_finite()) {
            return Err(Error::config("sigma must be positive"));
        }
        self.model.alpha.validate()?;
        self.costs.validate()?;
        if self.fold_count < 2 {
            return Err(Error::config("fold count must be at least 2"));
        }
        if !(self.baseline_purity > 0.5 && self.baseline_purity <= 1.0) {
            return Err(Error::config("baseline purity outside (0.5, 1]"));
        }
        if self.jobs == 0 {
            return Err(Error::config("jobs must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    #[serde(flatten)]
    pub metrics: MetricRecord,
    pub ball_count: usize,
    pub fit_ms: f64,
    pub predict_ms: f64,
    #[serde(skip)]
    pub trace: Option<GenerationTrace>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ur: f64,
    pub cost: f64,
    pub ball_count: f64,
    pub fit_ms: f64,
    pub predict_ms: f64,
}

impl AggregateMetrics {
    /// Unweighted means over folds.
    pub fn mean_of(folds: &[FoldMetrics]) -> Self {
        let k = folds.len().max(1) as f64;
        let mean = |f: &dyn Fn(&FoldMetrics) -> f64| folds.iter().map(f).sum::<f64>() / k;
        AggregateMetrics {
            accuracy: mean(&|f| f.metrics.accuracy),
            precision: mean(&|f| f.metrics.precision),
            recall: mean(&|f| f.metrics.recall),
            f1: mean(&|f| f.metrics.f1),
            ur: mean(&|f| f.metrics.ur),
            cost: mean(&|f| f.metrics.cost),
            ball_count: mean(&|f| f.ball_count as f64),
            fit_ms: mean(&|f| f.fit_ms),
            predict_ms: mean(&|f| f.predict_ms),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub dataset_size: usize,
    pub positive_class: usize,
    pub per_fold: Vec<FoldMetrics>,
    pub aggregate: AggregateMetrics,
}

impl EvaluationReport {
    /// Copy with timing fields zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for f in &mut r.per_fold {
            f.fit_ms = 0.0;
            f.predict_ms = 0.0;
        }
        r.aggregate.fit_ms = 0.0;
        r.aggregate.predict_ms = 0.0;
        r
    }

    /// One row per fold plus a `mean` row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Write(e.into());
        w.write_record([
            "fold",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "ur",
            "cost",
            "ball_count",
            "fit_ms",
            "predict_ms",
        ])
        .map_err(err)?;
        for f in &self.per_fold {
            let m = &f.metrics;
            w.write_record([
                f.fold.to_string(),
                m.accuracy.to_string(),
                m.precision.to_string(),
                m.recall.to_string(),
                m.f1.to_string(),
                m.ur.to_string(),
                m.cost.to_string(),
                f.ball_count.to_string(),
                format!("{:.3}", f.fit_ms),
                format!("{:.3}", f.predict_ms),
            ])
            .map_err(err)?;
        }
        let a = &self.aggregate;
        w.write_record([
            "mean".to_string(),
            a.accuracy.to_string(),
            a.precision.to_string(),
            a.recall.to_string(),
            a.f1.to_string(),
            a.ur.to_string(),
            a.cost.to_string(),
            a.ball_count.to_string(),
            format!("{:.3}", a.fit_ms),
            format!("{:.3}", a.predict_ms),
        ])
        .map_err(err)?;
        Ok(w.flush()?)
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn run_fold(
    ds: &Dataset,
    train_idx: &[usize],
    test_idx: &[usize],
    fold: usize,
    positive_class: usize,
    cfg: &RunConfig,
    trace: bool,
) -> Result<FoldMetrics> {
    let train_raw = ds.subset(train_idx);
    let scaler = MinMaxScaler::fit(&train_raw);
    let train = scaler.transform(&train_raw);
    let (train, _) =
        inject_label_noise(&train, cfg.noise_rate, derive_seed(cfg.seed, fold as u64))?;
    let queries: Vec<Vec<f64>> = test_idx
        .iter()
        .map(|&i| scaler.transform_row(ds.row(i)))
        .collect();
    let truth: Vec<usize> = test_idx.iter().map(|&i| ds.label(i)).collect();

    let start = Instant::now();
    let (predictions, ball_count, fit_ms, predict_ms, trace) = match cfg.classifier {
        ClassifierKind::Shadow3wc => {
            let (clf, gen_trace) = ShadowClassifier::fit_traced(&train, &cfg.model)?;
            let fit_ms = elapsed_ms(start);
            let start = Instant::now();
            let preds = queries
                .iter()
                .map(|q| clf.classify(q))
                .collect::<Result<Vec<_>>>()?;
            (
                preds,
                clf.balls().len(),
                fit_ms,
                elapsed_ms(start),
                trace.then_some(gen_trace),
            )
        }
        ClassifierKind::Gbknn => {
            let space = generate_purity_baseline(
                &train,
                cfg.baseline_purity,
                cfg.model.generation.split_method,
            )?;
            let clf = GbKnnClassifier::new(&space);
            let fit_ms = elapsed_ms(start);
            let start = Instant::now();
            let preds = queries
                .iter()
                .map(|q| clf.predict(q).map(Outcome::Certain))
                .collect::<Result<Vec<_>>>()?;
            (preds, clf.balls.len(), fit_ms, elapsed_ms(start), None)
        }
    };
    let metrics = score(
        &predictions,
        &truth,
        positive_class,
        ds.class_count(),
        &cfg.costs,
    )?;
    Ok(FoldMetrics {
        fold,
        metrics,
        ball_count,
        fit_ms,
        predict_ms,
        trace,
    })
}

/// Stratified k-fold run: scale on the training part, flip training
/// labels only, fit, predict the clean test part and score with the clean
/// dataset's minority class as positive.
pub fn run_experiment(ds: &Dataset, cfg: &RunConfig) -> Result<EvaluationReport> {
    run_experiment_traced(ds, cfg, false)
}

/// [`run_experiment`] keeping each fold's generation trace.
pub fn run_experiment_traced(
    ds: &Dataset,
    cfg: &RunConfig,
    trace: bool,
) -> Result<EvaluationReport> {
    cfg.validate()?;
    if ds.class_count() < 2 {
        return Err(Error::config("classification needs at least two classes"));
    }
    let plan = make_folds(ds, cfg.fold_count, cfg.seed)?;
    let positive_class = ds.minority_class();
    let splits: Vec<(Vec<usize>, Vec<usize>)> =
        (0..cfg.fold_count).map(|k| plan.split(k)).collect();

    let run = |k: usize| {
        let (train, test) = &splits[k];
        run_fold(ds, train, test, k, positive_class, cfg, trace)
    };
    let per_fold = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::config(format!("worker pool: {e}")))?;
        pool.install(|| {
            (0..cfg.fold_count)
                .into_par_iter()
                .map(run)
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        (0..cfg.fold_count).map(run).collect::<Result<Vec<_>>>()?
    };

    Ok(EvaluationReport {
        config: *cfg,
        dataset_size: ds.len(),
        positive_class,
        aggregate: AggregateMetrics::mean_of(&per_fold),
        per_fold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub theta: f64,
    pub aggregate: AggregateMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaSearch {
    pub rows: Vec<ThetaRow>,
    /// θ with the highest mean F1; ties go to the smaller θ.
    pub best_theta: f64,
}

impl ThetaSearch {
    pub fn best(&self) -> &ThetaRow {
        self.rows
            .iter()
            .find(|r| r.theta == self.best_theta)
            .expect("best theta is one of the rows")
    }

    /// `theta,accuracy,precision,recall,f1,ur,cost` rows followed by a
    /// `recommended_theta` line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta,accuracy,precision,recall,f1,ur,cost")?;
        for r in &self.rows {
            let a = &r.aggregate;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.theta, a.accuracy, a.precision, a.recall, a.f1, a.ur, a.cost
            )?;
        }
        writeln!(out, "recommended_theta,{}", self.best_theta).map_err(Error::from)
    }
}

/// Runs one experiment per distinct θ (first occurrence order) and picks
/// the θ with the best mean F1.
pub fn theta_grid_search(ds: &Dataset, thetas: &[f64], base: &RunConfig) -> Result<ThetaSearch> {
    let mut distinct: Vec<f64> = Vec::new();
    for &t in thetas {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::config(format!("theta {t} outside [0, 1]")));
        }
        if !distinct.contains(&t) {
            distinct.push(t);
        }
    }
    if distinct.is_empty() {
        return Err(Error::config("theta grid is empty"));
    }
    let mut rows = Vec::with_capacity(distinct.len());
    for theta in distinct {
        let mut cfg = *base;
        cfg.model.generation.theta = theta;
        let report = run_experiment(ds, &cfg)?;
        rows.push(ThetaRow {
            theta,
            aggregate: report.aggregate,
        });
    }
    let best_theta = rows
        .iter()
        .fold(None::<&ThetaRow>, |best, r| match best {
            Some(b) if b.aggregate.f1 > r.aggregate.f1 => Some(b),
            Some(b) if b.aggregate.f1 == r.aggregate.f1 && b.theta <= r.theta => Some(b),
            _ => Some(r),
        })
        .map(|r| r.theta)
        .expect("at least one row");
    Ok(ThetaSearch { rows, best_theta })
}
