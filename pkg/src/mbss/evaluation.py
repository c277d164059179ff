"""Experiment harness: cross-validation, detection-rate sweeps, ROC, PCA.

Two protocols are implemented. In-sample: stratified k-fold
cross-validation where the held-out fold is handed to the mixture
classifier as its unlabeled block (the transductive fit) while baselines
train on the labeled folds alone. Out-of-sample: an all-malicious test set
is subsampled at a ladder of fractions with Monte Carlo replicates and the
detection rate (flagged-malicious share) is averaged per fraction.

The positive class means "malicious" throughout and defaults to label 2.
Ambiguous-tie predictions count as incorrect and are tallied separately;
in arrays they are encoded as label 0.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import baselines, cem
from .dataset import Dataset, stratified_folds

TIE_LABEL = 0

DEFAULT_FRACTIONS = (0.1, 1.0, 20.0, 50.0, 90.0, 100.0)
DEFAULT_REPLICATES = (50, 30, 20, 10, 5, 1)


def predictions_to_array(preds) -> np.ndarray:
    """Normalize a prediction list to an int array, ties becoming 0."""
    if isinstance(preds, np.ndarray):
        return preds.astype(np.int64)
    return np.array(
        [TIE_LABEL if isinstance(p, baselines.AmbiguousTie) else int(p) for p in preds],
        dtype=np.int64,
    )


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion counts with malicious as the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    @property
    def fpr(self) -> float:
        denom = self.fp + self.tn
        return self.fp / denom if denom else float("nan")


def confusion(truth: np.ndarray, preds, positive_label: int):
    """Counts plus the number of ambiguous ties.

    A tie is wrong by definition: it lands in FN when the sample is
    positive and FP when it is negative, so counts still conserve the
    sample total.
    """
    truth = np.asarray(truth, dtype=np.int64).reshape(-1)
    pred = predictions_to_array(preds)
    if pred.shape[0] != truth.shape[0]:
        raise ValueError("one prediction per truth label required")
    is_pos = truth == positive_label
    tie = pred == TIE_LABEL
    correct = (pred == truth) & ~tie
    tp = int(np.sum(is_pos & correct))
    tn = int(np.sum(~is_pos & correct))
    fn = int(np.sum(is_pos & ~correct))
    # Any wrong prediction on a negative sample (including K > 2 confusions
    # between non-positive classes) lands in FP so counts conserve the total.
    fp = int(np.sum(~is_pos & ~correct))
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn), int(np.sum(tie))


@dataclass(frozen=True)
class DrRow:
    """Detection rate at one test-size fraction."""

    fraction_pct: float
    replicates: int
    subsample_size: int
    dr_mean: float
    dr_sd: float


@dataclass
class EvalReport:
    """Per-fold metrics with aggregates, plus optional ROC/AUC and DR table."""

    classifier: str
    fold_accuracy: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fold_fpr: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fold_ties: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    acc_mean: float = float("nan")
    acc_sd: float = float("nan")
    fpr_mean: float = float("nan")
    fpr_sd: float = float("nan")
    roc_points: np.ndarray | None = None
    auc: float | None = None
    dr_rows: list[DrRow] = field(default_factory=list)


def _sample_sd(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if values.size > 1 else float("nan")


class MbssCv:
    """Transductive mixture classifier for cross-validation folds."""

    def __init__(self, config: cem.CemConfig, name: str = "mbss"):
        self.config = config
        self.name = name

    def predict_fold(self, train_X, train_y, test_X, dataset, positive_label):
        fold_ds = Dataset(train_X, train_y, test_X, dataset.vocabulary, dataset.K)
        result = cem.fit(fold_ds, self.config)
        scores = result.posteriors[:, positive_label - 1]
        return result.hard_labels, scores


class KnnCv:
    def __init__(self, k: int = 3, name: str | None = None):
        self.k = k
        self.name = name or f"{k}nn"

    def predict_fold(self, train_X, train_y, test_X, dataset, positive_label):
        model = baselines.KnnModel(train_X, train_y, k=self.k)
        return baselines.knn_predict_all(model, test_X), None


class LdaCv:
    def __init__(self, regularization: float = 1e-6, name: str = "lda"):
        self.regularization = regularization
        self.name = name

    def predict_fold(self, train_X, train_y, test_X, dataset, positive_label):
        model = baselines.lda_fit(train_X, train_y, self.regularization)
        labels, scores = baselines.lda_predict_all(model, test_X)
        others = np.delete(scores, positive_label - 1, axis=1)
        margin = scores[:, positive_label - 1] - others.max(axis=1)
        return labels, margin


def cross_validate(
    dataset: Dataset,
    classifier,
    folds: int = 10,
    seed: int = 0,
    positive_label: int = 2,
) -> EvalReport:
    """Stratified k-fold evaluation of one classifier spec.

    Accuracy is correct/test-size per fold; FPR is FP/(FP+TN). Aggregates
    are the mean and sample standard deviation over folds. When the
    classifier produces scores, a pooled out-of-fold ROC and AUC are
    attached.
    """
    X = dataset.labeled_features
    y = dataset.labels
    accs, fprs, ties = [], [], []
    pooled_scores, pooled_truth = [], []
    for train_idx, test_idx in stratified_folds(dataset, folds, seed):
        preds, scores = classifier.predict_fold(
            X[train_idx], y[train_idx], X[test_idx], dataset, positive_label
        )
        counts, n_ties = confusion(y[test_idx], preds, positive_label)
        accs.append(counts.accuracy)
        fprs.append(counts.fpr)
        ties.append(n_ties)
        if scores is not None:
            pooled_scores.append(np.asarray(scores, dtype=np.float64))
            pooled_truth.append((y[test_idx] == positive_label).astype(np.int64))
    accs = np.array(accs)
    fprs = np.array(fprs)
    roc_points, auc = None, None
    if pooled_scores:
        roc_points, auc = roc_auc(
            np.concatenate(pooled_scores), np.concatenate(pooled_truth)
        )
    return EvalReport(
        classifier=classifier.name,
        fold_accuracy=accs,
        fold_fpr=fprs,
        fold_ties=np.array(ties, dtype=np.int64),
        acc_mean=float(accs.mean()),
        acc_sd=_sample_sd(accs),
        fpr_mean=float(fprs.mean()),
        fpr_sd=_sample_sd(fprs),
        roc_points=roc_points,
        auc=auc,
    )


def detection_rate(
    predict_fn,
    test_features: np.ndarray,
    fractions=DEFAULT_FRACTIONS,
    replicates=DEFAULT_REPLICATES,
    seed: int = 0,
    positive_label: int = 2,
) -> list[DrRow]:
    """Detection rate over subsampled fractions of an all-malicious set.

    ``predict_fn`` maps a feature matrix to predicted labels; ties count as
    not detected. Fractions are percentages; each is paired with its Monte
    Carlo replicate count. Subsampling is without replacement and fully
    determined by the seed. A fraction that yields zero samples is skipped
    with a warning.
    """
    X = np.atleast_2d(np.asarray(test_features, dtype=np.float64))
    if X.shape[0] == 0:
        raise ValueError("test set must be non-empty")
    fractions = list(fractions)
    replicates = list(replicates)
    if len(fractions) != len(replicates):
        raise ValueError("fractions and replicates must have equal length")
    rng = np.random.default_rng(seed)
    rows: list[DrRow] = []
    N = X.shape[0]
    for pct, reps in zip(fractions, replicates):
        if reps < 1:
            raise ValueError("replicate counts must be positive")
        size = int(round(N * pct / 100.0))
        if size == 0:
            warnings.warn(
                f"fraction {pct}% of {N} test samples yields zero rows; skipped",
                stacklevel=2,
            )
            continue
        drs = []
        for _ in range(reps):
            idx = rng.choice(N, size=size, replace=False)
            preds = predictions_to_array(predict_fn(X[idx]))
            drs.append(float(np.mean(preds == positive_label)))
        drs = np.array(drs)
        rows.append(
            DrRow(
                fraction_pct=float(pct),
                replicates=reps,
                subsample_size=size,
                dr_mean=float(drs.mean()),
                dr_sd=_sample_sd(drs),
            )
        )
    return rows


def roc_auc(scores: np.ndarray, truth: np.ndarray):
    """ROC points from a threshold sweep plus trapezoidal AUC.

    Points are ``(threshold, fpr, tpr)`` rows, thresholds descending from
    +inf, predicting positive at score >= threshold. Tied scores are
    grouped, so the AUC equals the Mann-Whitney statistic with half credit
    for ties. With single-class truth the sweep is still returned and AUC
    is None.
    """
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    t = np.asarray(truth).reshape(-1).astype(np.int64)
    if s.shape[0] != t.shape[0]:
        raise ValueError("scores and truth must have equal length")
    if s.shape[0] == 0:
        raise ValueError("scores must be non-empty")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    if not np.all((t == 0) | (t == 1)):
        raise ValueError("truth must be binary (0/1)")
    P = int(t.sum())
    Ng = t.shape[0] - P
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    t_sorted = t[order]
    points = [(float("inf"), 0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(s_sorted):
        j = i
        while j < len(s_sorted) and s_sorted[j] == s_sorted[i]:
            j += 1
        tp += int(t_sorted[i:j].sum())
        fp += (j - i) - int(t_sorted[i:j].sum())
        points.append(
            (
                float(s_sorted[i]),
                fp / Ng if Ng else 0.0,
                tp / P if P else 0.0,
            )
        )
        i = j
    pts = np.array(points, dtype=np.float64)
    if P == 0 or Ng == 0:
        return pts, None
    auc = float(np.trapezoid(pts[:, 2], pts[:, 1]))
    return pts, auc


@dataclass
class PcaProjection:
    """In-sample-anchored principal component projections of both cohorts."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    in_projection: np.ndarray
    in_cohorts: list[str]
    oos_projection: np.ndarray


def pca_project(
    in_features: np.ndarray,
    in_labels: np.ndarray,
    oos_features: np.ndarray,
    n_components: int = 4,
    positive_label: int = 2,
) -> PcaProjection:
    """Project in-sample and out-of-sample blocks on in-sample PCs.

    Centering and principal directions come from the in-sample block only.
    Each direction is signed so its largest-magnitude coordinate is
    positive, making projections reproducible. Cohorts are ``benign-in``,
    ``malicious-in`` and ``oos``.
    """
    X = np.atleast_2d(np.asarray(in_features, dtype=np.float64))
    labels = np.asarray(in_labels, dtype=np.int64).reshape(-1)
    oos = np.atleast_2d(np.asarray(oos_features, dtype=np.float64))
    if oos.size == 0:
        oos = np.empty((0, X.shape[1]))
    if labels.shape[0] != X.shape[0]:
        raise ValueError("one label per in-sample row required")
    if oos.shape[1] != X.shape[1]:
        raise ValueError("in-sample and out-of-sample dimensions differ")
    if not 1 <= n_components <= min(X.shape):
        raise ValueError(
            f"n_components must be in 1..{min(X.shape)} for a {X.shape[0]}x{X.shape[1]} block"
        )
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (X.shape[0] - 1 if X.shape[0] > 1 else 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    if not eigvals[-1] > 0.0:
        raise ValueError("in-sample block has zero variance")
    order = np.argsort(eigvals)[::-1][:n_components]
    components = eigvecs[:, order].T.copy()
    for vec in components:
        if vec[np.argmax(np.abs(vec))] < 0:
            vec *= -1.0
    cohorts = [
        "malicious-in" if lab == positive_label else "benign-in" for lab in labels
    ]
    return PcaProjection(
        mean=mean,
        components=components,
        explained_variance=eigvals[order],
        in_projection=centered @ components.T,
        in_cohorts=cohorts,
        oos_projection=(oos - mean) @ components.T,
    )


def write_pca_csv(path, projection: PcaProjection) -> None:
    n_comp = projection.components.shape[0]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"PC{i + 1}" for i in range(n_comp)] + ["cohort"])
        for row, cohort in zip(projection.in_projection, projection.in_cohorts):
            writer.writerow([repr(float(v)) for v in row] + [cohort])
        for row in projection.oos_projection:
            writer.writerow([repr(float(v)) for v in row] + ["oos"])


def write_roc_csv(path, roc_points: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["threshold", "fpr", "tpr"])
        for thr, fpr, tpr in roc_points:
            writer.writerow([repr(float(thr)), repr(float(fpr)), repr(float(tpr))])


def write_cv_csv(path, reports: list[EvalReport]) -> None:
    """Machine-readable CV results: per-fold rows then a summary row each."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["classifier", "fold", "accuracy", "fpr", "ties"])
        for report in reports:
            for f, (acc, fpr, tie) in enumerate(
                zip(report.fold_accuracy, report.fold_fpr, report.fold_ties), start=1
            ):
                writer.writerow(
                    [report.classifier, f, repr(float(acc)), repr(float(fpr)), int(tie)]
                )
            writer.writerow(
                [
                    report.classifier,
                    "mean",
                    repr(report.acc_mean),
                    repr(report.fpr_mean),
                    int(report.fold_ties.sum()),
                ]
            )
            writer.writerow(
                [report.classifier, "sd", repr(report.acc_sd), repr(report.fpr_sd), ""]
            )


def write_dr_csv(path, rows_by_classifier: dict[str, list[DrRow]]) -> None:
    """Detection-rate sweep table, one row per classifier and fraction."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["classifier", "fraction_pct", "replicates", "subsample_size", "dr_mean", "dr_sd"]
        )
        for name, rows in rows_by_classifier.items():
            for row in rows:
                writer.writerow(
                    [
                        name,
                        repr(row.fraction_pct),
                        row.replicates,
                        row.subsample_size,
                        repr(row.dr_mean),
                        "" if np.isnan(row.dr_sd) else repr(row.dr_sd),
                    ]
                )


def format_cv_table(reports: list[EvalReport]) -> str:
    """Human-readable comparison table of cross-validation aggregates."""
    lines = [
        f"{'classifier':<12} {'mean ACC':>9} {'sd ACC':>8} {'mean FPR':>9} {'sd FPR':>8} {'AUC':>6} {'ties':>5}"
    ]
    for r in reports:
        auc = f"{r.auc:.3f}" if r.auc is not None else "-"
        lines.append(
            f"{r.classifier:<12} {r.acc_mean:>9.4f} {r.acc_sd:>8.4f} "
            f"{r.fpr_mean:>9.4f} {r.fpr_sd:>8.4f} {auc:>6} {int(r.fold_ties.sum()):>5}"
        )
    return "\n".join(lines)
