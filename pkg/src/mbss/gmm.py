"""Finite Gaussian mixtures under constrained covariance families.

All density math happens in log space through Cholesky factors; explicit
inverses and determinants are never formed. Six covariance families are
supported, named by the volume/shape/orientation convention:

    EII  lambda * I                 spherical, shared volume
    VII  lambda_k * I               spherical, per-component volume
    EEI  diag(a)                    diagonal, shared across components
    VVI  diag(a_k)                  diagonal, per component
    EEE  full, shared across components
    VVV  full, per component
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DataFormatError, SingularCovarianceError

FAMILIES = ("EII", "VII", "EEI", "VVI", "EEE", "VVV")

_LOG_2PI = float(np.log(2.0 * np.pi))

# Regularization escalates by x10 from the configured epsilon up to this cap.
MAX_REGULARIZATION = 1e-2


def _logsumexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Stable log(sum(exp(a))) along an axis."""
    shift = np.max(a, axis=axis, keepdims=True)
    shift = np.where(np.isfinite(shift), shift, 0.0)
    out = np.log(np.sum(np.exp(a - shift), axis=axis)) + np.squeeze(shift, axis=axis)
    return out


@dataclass
class ComponentParams:
    """One Gaussian component: mean vector and SPD covariance.

    The Cholesky factor and log-determinant are computed once at
    construction and cached; they are what every density evaluation uses.
    """

    mean: np.ndarray
    covariance: np.ndarray
    cholesky: np.ndarray = field(init=False, repr=False)
    log_det: float = field(init=False)

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError(f"covariance must be square, got shape {cov.shape}")
        if cov.shape[0] != mean.shape[0]:
            raise ValueError(
                f"mean has dimension {mean.shape[0]} but covariance is {cov.shape[0]}x{cov.shape[1]}"
            )
        scale = float(np.max(np.abs(cov))) if cov.size else 0.0
        if not np.allclose(cov, cov.T, atol=1e-8 * (1.0 + scale), rtol=0.0):
            raise ValueError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise SingularCovarianceError(
                "covariance is not positive definite"
            ) from exc
        self.mean = mean
        self.covariance = cov
        self.cholesky = chol
        self.log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))

    @property
    def d(self) -> int:
        return self.mean.shape[0]


def make_component(
    mean: np.ndarray, covariance: np.ndarray, regularization: float = 1e-6
) -> ComponentParams:
    """Build a component from an estimated covariance, regularizing it.

    Adds ``eps * t`` to the diagonal where ``t = trace(cov)/d``; if the
    Cholesky factorization still fails, eps escalates by factors of 10 up
    to ``MAX_REGULARIZATION`` before giving up.
    """
    cov = np.asarray(covariance, dtype=np.float64)
    d = cov.shape[0]
    t = float(np.trace(cov)) / d
    if not t > 0.0:
        # Zero or degenerate scatter (e.g. identical rows); fall back to an
        # absolute scale so the ridge is nonzero.
        t = 1.0
    eps = float(regularization)
    while True:
        try:
            return ComponentParams(mean, cov + (eps * t) * np.eye(d))
        except SingularCovarianceError:
            if eps >= MAX_REGULARIZATION:
                raise SingularCovarianceError(
                    f"covariance not positive definite even at regularization {eps:g}"
                ) from None
            eps *= 10.0


def family_deviation(family: str, covariances: np.ndarray) -> float:
    """Largest absolute deviation of a covariance stack from a family's shape.

    Returned value is relative to the overall covariance scale, so a model
    conforms to its declared family when this is ~0.
    """
    covs = np.asarray(covariances, dtype=np.float64)
    K, d, _ = covs.shape
    scale = float(np.max(np.abs(covs)))
    if scale == 0.0:
        scale = 1.0
    eye = np.eye(d)
    if family == "EII":
        lam = float(np.trace(covs.sum(axis=0))) / (K * d)
        dev = np.max(np.abs(covs - lam * eye))
    elif family == "VII":
        lams = np.trace(covs, axis1=1, axis2=2) / d
        dev = np.max(np.abs(covs - lams[:, None, None] * eye))
    elif family == "EEI":
        diag = np.mean([np.diag(c) for c in covs], axis=0)
        dev = np.max(np.abs(covs - np.diag(diag)))
    elif family == "VVI":
        dev = max(np.max(np.abs(c - np.diag(np.diag(c)))) for c in covs)
    elif family == "EEE":
        dev = np.max(np.abs(covs - covs[0]))
    elif family == "VVV":
        dev = max(np.max(np.abs(c - c.T)) for c in covs)
    else:
        raise ValueError(f"unknown covariance family {family!r}")
    return float(dev) / scale


@dataclass
class MixtureModel:
    """A K-component Gaussian mixture with a declared covariance family."""

    weights: np.ndarray
    components: list[ComponentParams]
    family: str

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown covariance family {self.family!r}")
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if len(self.components) != w.shape[0]:
            raise ValueError("one weight per component required")
        if w.shape[0] < 1:
            raise ValueError("mixture needs at least one component")
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        dims = {c.d for c in self.components}
        if len(dims) != 1:
            raise ValueError("components disagree on dimension")
        dev = family_deviation(
            self.family, np.stack([c.covariance for c in self.components])
        )
        if dev > 1e-8:
            raise ValueError(
                f"covariances deviate from family {self.family} by {dev:.3e} (relative)"
            )
        self.weights = w

    @property
    def K(self) -> int:
        return len(self.components)

    @property
    def d(self) -> int:
        return self.components[0].d

    @classmethod
    def from_arrays(
        cls,
        weights: np.ndarray,
        means: np.ndarray,
        covariances: np.ndarray,
        family: str,
    ) -> "MixtureModel":
        comps = [ComponentParams(m, c) for m, c in zip(means, covariances)]
        return cls(np.asarray(weights, dtype=np.float64), comps, family)


def log_density(component: ComponentParams, x: np.ndarray) -> float | np.ndarray:
    """Log of the Gaussian density at ``x`` (a vector, or a matrix of rows).

    Computes -0.5 (x-mu)^T Sigma^-1 (x-mu) - 0.5 log det(2 pi Sigma) using
    the cached Cholesky factor.
    """
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != component.d:
        raise ValueError(f"expected dimension {component.d}, got {X.shape[1]}")
    diff = X - component.mean
    z = solve_triangular(component.cholesky, diff.T, lower=True)
    quad = np.sum(z * z, axis=0)
    out = -0.5 * (quad + component.d * _LOG_2PI + component.log_det)
    return float(out[0]) if single else out


def log_joint(model: MixtureModel, X: np.ndarray) -> np.ndarray:
    """Matrix of log(pi_k) + log f_k(x_j), rows = samples, cols = components."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] == 0:
        return np.empty((0, model.K))
    if X.shape[1] != model.d:
        raise ValueError(f"expected dimension {model.d}, got {X.shape[1]}")
    with np.errstate(divide="ignore"):
        logw = np.log(model.weights)
    out = np.empty((X.shape[0], model.K))
    for k, comp in enumerate(model.components):
        out[:, k] = logw[k] + log_density(comp, X)
    return out


def log_responsibilities(model: MixtureModel, X: np.ndarray) -> np.ndarray:
    """Row-normalized posterior membership log-probabilities.

    Each row exponentiates to a probability vector; normalization uses the
    log-sum-exp shift so widely separated components stay finite.
    """
    lj = log_joint(model, X)
    if lj.shape[0] == 0:
        return lj
    return lj - _logsumexp(lj, axis=1)[:, None]


def complete_log_likelihood(model, dataset, hard_labels) -> float:
    """Log-likelihood of labeled plus unlabeled data with labels filled in.

    Labeled rows contribute their true class's joint term; unlabeled rows
    contribute the joint term of the supplied hard label.
    """
    hard = np.asarray(hard_labels, dtype=np.int64).reshape(-1)
    if hard.shape[0] != dataset.m:
        raise ValueError(
            f"hard_labels has length {hard.shape[0]} but dataset has {dataset.m} unlabeled rows"
        )
    if hard.size and (hard.min() < 1 or hard.max() > model.K):
        raise ValueError("hard labels must lie in 1..K")
    total = 0.0
    if dataset.n:
        lj = log_joint(model, dataset.labeled_features)
        total += float(lj[np.arange(dataset.n), dataset.labels - 1].sum())
    if dataset.m:
        lj = log_joint(model, dataset.unlabeled_features)
        total += float(lj[np.arange(dataset.m), hard - 1].sum())
    return total


def observed_log_likelihood(model, dataset) -> float:
    """Training log-likelihood: labeled joints plus marginalized unlabeled terms."""
    total = 0.0
    if dataset.n:
        lj = log_joint(model, dataset.labeled_features)
        total += float(lj[np.arange(dataset.n), dataset.labels - 1].sum())
    if dataset.m:
        lj = log_joint(model, dataset.unlabeled_features)
        total += float(_logsumexp(lj, axis=1).sum())
    return total


def parameter_count(family: str, K: int, d: int) -> int:
    """Number of free parameters: weights + means + covariance terms."""
    if K < 1 or d < 1:
        raise ValueError("K and d must be positive")
    cov_params = {
        "EII": 1,
        "VII": K,
        "EEI": d,
        "VVI": K * d,
        "EEE": d * (d + 1) // 2,
        "VVV": K * d * (d + 1) // 2,
    }
    if family not in cov_params:
        raise ValueError(f"unknown covariance family {family!r}")
    return (K - 1) + K * d + cov_params[family]


def estimate_family_covariances(
    family: str,
    scatters: np.ndarray,
    counts: np.ndarray,
    total: int,
) -> np.ndarray:
    """Closed-form covariance estimates from per-component scatter matrices.

    ``scatters[k]`` is the sum of outer products of centered rows assigned
    to component k and ``counts[k]`` the number of those rows. Components
    with ``counts[k] == 0`` get a NaN matrix in per-component families and
    must be patched by the caller; shared families pool over all components
    and are unaffected.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown covariance family {family!r}")
    scatters = np.asarray(scatters, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    K, d, _ = scatters.shape
    eye = np.eye(d)
    pooled = scatters.sum(axis=0)
    if family == "EII":
        lam = float(np.trace(pooled)) / (d * total)
        return np.broadcast_to(lam * eye, (K, d, d)).copy()
    if family == "EEI":
        return np.broadcast_to(np.diag(np.diag(pooled) / total), (K, d, d)).copy()
    if family == "EEE":
        return np.broadcast_to(pooled / total, (K, d, d)).copy()
    out = np.full((K, d, d), np.nan)
    for k in range(K):
        if counts[k] == 0:
            continue
        if family == "VII":
            out[k] = (float(np.trace(scatters[k])) / (d * counts[k])) * eye
        elif family == "VVI":
            out[k] = np.diag(np.diag(scatters[k]) / counts[k])
        else:
            out[k] = scatters[k] / counts[k]
    return out


def save_model(model: MixtureModel, path) -> None:
    """Serialize a model as JSON. Floats use shortest round-trip decimals."""
    payload = {
        "format": "mbss-model",
        "version": 1,
        "family": model.family,
        "weights": model.weights.tolist(),
        "means": [c.mean.tolist() for c in model.components],
        "covariances": [c.covariance.tolist() for c in model.components],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path) -> MixtureModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != "mbss-model":
        raise DataFormatError(f"{path}: not a serialized mixture model")
    try:
        return MixtureModel.from_arrays(
            np.asarray(payload["weights"], dtype=np.float64),
            np.asarray(payload["means"], dtype=np.float64),
            np.asarray(payload["covariances"], dtype=np.float64),
            payload["family"],
        )
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"{path}: malformed model file: {exc}") from exc
