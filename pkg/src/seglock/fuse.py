"""Multi-model fusion: Soft-NMS over segment proposals and polynomial
logistic-regression fusion of per-model file scores.

Soft-NMS treats proposals from all models as one joint pool. Scores in
different spaces (probabilities vs raw logits) are compared as-is, which is
deliberate: a high raw logit takes precedence over every overlapping
probability-space proposal.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import InputError, Segment, sigmoid
from .metrics import auc

__all__ = [
    "SoftNmsConfig",
    "FusionModel",
    "DEFAULT_LAMBDA_GRID",
    "soft_nms",
    "monomial_exponents",
    "poly_features",
    "fit_fusion",
    "apply_fusion",
]

# 13 logarithmically spaced regularization strengths, 1e-4 .. 1e2.
DEFAULT_LAMBDA_GRID: tuple[float, ...] = tuple(np.logspace(-4.0, 2.0, 13))


@dataclass(frozen=True)
class SoftNmsConfig:
    """Gaussian Soft-NMS parameters.

    Proposals scoring below ``pre_threshold`` (in their own score space) are
    filtered out before suppression; remaining scores decay by
    exp(-IoU^2 / sigma) against each selected proposal.
    """

    sigma: float = 0.8
    pre_threshold: float = 0.2
    max_output: int | None = None

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise InputError(f"sigma must be > 0, got {self.sigma}")
        if self.max_output is not None and self.max_output < 0:
            raise InputError(f"max_output must be >= 0, got {self.max_output}")


def soft_nms(proposals, cfg: SoftNmsConfig | None = None) -> list[Segment]:
    """Gaussian Soft-NMS over a joint proposal pool.

    Repeatedly selects the highest-scoring remaining proposal (ties: earlier
    start, earlier end, then input order), emits it with its current score,
    and decays every remaining score by exp(-IoU(selected, other)^2 / sigma).
    Boundaries are never altered and scores never increase; the output is in
    selection order and carries the decayed scores.
    """
    cfg = cfg or SoftNmsConfig()
    pool = list(proposals)
    if not pool:
        return []
    starts = np.array([p.start for p in pool], dtype=np.float64)
    ends = np.array([p.end for p in pool], dtype=np.float64)
    scores = np.array([p.score for p in pool], dtype=np.float64)
    order = np.arange(len(pool))

    keep = scores >= cfg.pre_threshold
    starts, ends, scores, order = starts[keep], ends[keep], scores[keep], order[keep]
    lengths = ends - starts

    limit = len(order) if cfg.max_output is None else min(cfg.max_output, len(order))
    remaining = np.ones(len(order), dtype=bool)
    out: list[Segment] = []
    while len(out) < limit:
        live = np.flatnonzero(remaining)
        pick = live[np.lexsort((order[live], ends[live], starts[live], -scores[live]))[0]]
        out.append(Segment(float(starts[pick]), float(ends[pick]), float(scores[pick])))
        remaining[pick] = False
        rest = np.flatnonzero(remaining)
        if len(rest) == 0:
            break
        inter = np.minimum(ends[pick], ends[rest]) - np.maximum(starts[pick], starts[rest])
        inter = np.maximum(inter, 0.0)
        union = lengths[pick] + lengths[rest] - inter
        iou = np.where((inter > 0.0) & (union > 0.0), inter / np.where(union > 0.0, union, 1.0), 0.0)
        scores[rest] *= np.exp(-(iou**2) / cfg.sigma)
    return out


def monomial_exponents(n_models: int, degree: int) -> list[tuple[int, ...]]:
    """Canonical monomial order: index tuples of total degree 1..degree.

    Degree blocks come in ascending order; within a block, combinations with
    replacement over variable indices, e.g. for two variables and degree 2:
    (0,), (1,), (0,0), (0,1), (1,1) -> a, b, a^2, ab, b^2. Serialized fusion
    models rely on this order being stable.
    """
    if n_models < 1:
        raise InputError(f"n_models must be >= 1, got {n_models}")
    if degree < 1:
        raise InputError(f"degree must be >= 1, got {degree}")
    combos: list[tuple[int, ...]] = []
    for d in range(1, degree + 1):
        combos.extend(itertools.combinations_with_replacement(range(n_models), d))
    return combos


def _poly_matrix(z: np.ndarray, degree: int) -> np.ndarray:
    """Monomial features for a batch of z-normalized score rows (n x m)."""
    combos = monomial_exponents(z.shape[1], degree)
    cols = [np.prod(z[:, combo], axis=1) for combo in combos]
    return np.column_stack(cols)


def poly_features(scores, means, stds, degree: int = 2) -> np.ndarray:
    """z-normalize one score vector and expand it into monomial features."""
    s = np.asarray(scores, dtype=np.float64)
    mu = np.asarray(means, dtype=np.float64)
    sd = np.asarray(stds, dtype=np.float64)
    if not (s.shape == mu.shape == sd.shape) or s.ndim != 1:
        raise InputError(
            f"scores/means/stds must be 1-D with one shared length, got "
            f"{s.shape}/{mu.shape}/{sd.shape}"
        )
    if np.any(sd <= 0.0):
        raise InputError("stds must be strictly positive")
    z = (s - mu) / sd
    return _poly_matrix(z[None, :], degree)[0]


@dataclass(frozen=True)
class FusionModel:
    """Fitted polynomial logistic-regression score fuser.

    Holds the per-model z-normalization statistics (computed on the fit
    split), the monomial coefficient vector in the canonical order of
    ``monomial_exponents``, the bias, and the regularization strength the
    grid search selected.
    """

    model_ids: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray
    degree: int
    coefficients: np.ndarray
    bias: float
    reg_lambda: float

    def __post_init__(self) -> None:
        ids = tuple(str(m) for m in self.model_ids)
        means = np.asarray(self.means, dtype=np.float64).copy()
        stds = np.asarray(self.stds, dtype=np.float64).copy()
        coef = np.asarray(self.coefficients, dtype=np.float64).copy()
        if not (len(means) == len(stds) == len(ids)):
            raise InputError("model_ids, means, and stds must share one length")
        if np.any(stds <= 0.0):
            raise InputError("stds must be strictly positive")
        expected = len(monomial_exponents(len(ids), int(self.degree)))
        if len(coef) != expected:
            raise InputError(
                f"coefficient vector has length {len(coef)}, expected {expected} "
                f"for {len(ids)} models at degree {self.degree}"
            )
        if not (math.isfinite(self.bias) and np.all(np.isfinite(coef))):
            raise InputError("fusion parameters must be finite")
        means.flags.writeable = False
        stds.flags.writeable = False
        coef.flags.writeable = False
        object.__setattr__(self, "model_ids", ids)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "reg_lambda", float(self.reg_lambda))

    @property
    def n_models(self) -> int:
        return len(self.model_ids)


def apply_fusion(model: FusionModel, scores) -> float:
    """Fused fake probability for one vector of per-model scores."""
    feats = poly_features(scores, model.means, model.stds, model.degree)
    return float(sigmoid(model.bias + float(feats @ model.coefficients)))


def _apply_matrix(model: FusionModel, scores: np.ndarray) -> np.ndarray:
    z = (scores - model.means) / model.stds
    x = _poly_matrix(z, model.degree)
    return sigmoid(x @ model.coefficients + model.bias)


def _check_scores_labels(name: str, scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if s.ndim != 2:
        raise InputError(f"{name} scores must be a 2-D (rows x models) array")
    if len(y) != s.shape[0]:
        raise InputError(f"{name} labels length {len(y)} != {s.shape[0]} rows")
    if not np.all(np.isfinite(s)):
        raise InputError(f"{name} scores must be finite")
    if y.all() or not y.any():
        raise InputError(f"{name} labels contain a single class; need both")
    return s, y


def _newton_logistic(x: np.ndarray, y: np.ndarray, lam: float,
                     tol: float = 1e-8, max_iter: int = 200) -> tuple[np.ndarray, float]:
    """L2-regularized logistic fit by damped Newton iteration.

    Deterministic: zero initialization, pure function of the inputs, stops
    when the max-norm of the gradient of (mean NLL + lam/2 * ||w||^2) drops
    below ``tol`` or after ``max_iter`` steps. The bias is not regularized,
    so lam -> inf drives the coefficients (not the intercept) to zero.
    """
    n, p = x.shape
    xb = np.column_stack([x, np.ones(n)])
    reg = np.append(np.full(p, lam), 0.0)
    theta = np.zeros(p + 1)
    yf = y.astype(np.float64)

    def objective(t: np.ndarray) -> float:
        z = xb @ t
        return float(np.mean(np.logaddexp(0.0, z) - yf * z) + 0.5 * lam * t[:p] @ t[:p])

    obj = objective(theta)
    for _ in range(max_iter):
        z = xb @ theta
        prob = sigmoid(z)
        grad = xb.T @ (prob - yf) / n + reg * theta
        if np.max(np.abs(grad)) < tol:
            break
        w = prob * (1.0 - prob)
        hess = (xb * w[:, None]).T @ xb / n + np.diag(reg)
        hess[np.diag_indices_from(hess)] += 1e-12  # solver safeguard
        step = np.linalg.solve(hess, grad)
        t = 1.0
        descent = float(grad @ step)
        while t > 1e-8:
            cand = theta - t * step
            cand_obj = objective(cand)
            if cand_obj <= obj - 1e-4 * t * descent:
                break
            t *= 0.5
        theta = theta - t * step
        obj = objective(theta)
    return theta[:p], float(theta[p])


def fit_fusion(
    train_scores,
    train_labels,
    val_scores,
    val_labels,
    lambda_grid=None,
    *,
    degree: int = 2,
    model_ids=None,
) -> FusionModel:
    """Fit the polynomial logistic fuser with a regularization grid search.

    z-normalization statistics come from the training scores. For each
    lambda in the grid an L2-regularized logistic regression is fitted on the
    monomial features; the lambda whose predictions maximize validation AUC
    wins (ties go to the larger lambda). The whole procedure is
    deterministic: identical inputs give a bit-identical model.
    """
    train, y_train = _check_scores_labels("train", train_scores, train_labels)
    val, y_val = _check_scores_labels("validation", val_scores, val_labels)
    m = train.shape[1]
    if val.shape[1] != m:
        raise InputError(f"validation has {val.shape[1]} model columns, train has {m}")
    ids = tuple(str(s) for s in model_ids) if model_ids is not None else tuple(
        f"model_{i + 1}" for i in range(m)
    )
    if len(ids) != m:
        raise InputError(f"{len(ids)} model ids for {m} score columns")

    means = train.mean(axis=0)
    stds = train.std(axis=0)
    for j, sd in enumerate(stds):
        if sd <= 0.0:
            raise InputError(f"model {ids[j]!r} has zero variance in the training scores")

    x_train = _poly_matrix((train - means) / stds, degree)
    x_val = _poly_matrix((val - means) / stds, degree)

    grid = [float(l) for l in (lambda_grid if lambda_grid is not None else DEFAULT_LAMBDA_GRID)]
    if not grid or any(l < 0.0 for l in grid):
        raise InputError("lambda_grid must be non-empty with non-negative entries")

    best = None
    for lam in sorted(grid):
        coef, bias = _newton_logistic(x_train, y_train, lam)
        val_probs = sigmoid(x_val @ coef + bias)
        score = auc(val_probs, y_val)
        if best is None or score >= best[0]:
            best = (score, lam, coef, bias)
    _, lam, coef, bias = best
    return FusionModel(
        model_ids=ids,
        means=means,
        stds=stds,
        degree=degree,
        coefficients=coef,
        bias=bias,
        reg_lambda=lam,
    )
