"""Coordinator-side aggregation: the matrix beta-mean over local truncated
eigendecompositions, the generic phi-mean it specializes, and the
projection-averaging baseline.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InvalidInput, TieWarning
from .linalg import EIGEN_FLOOR, eig_sym, matrix_function, matrix_power, symmetrize
from .local_pca import TruncatedEig, truncated_eig


@dataclass(frozen=True)
class BetaConfig:
    """Aggregator knobs.

    beta selects the branch (0 means the geometric-mean limit), delta
    regularizes the beta < 0 branch, eigen_floor absorbs round-off ahead of
    logs and negative powers.
    """

    beta: float
    delta: float = 1e-5
    eigen_floor: float = EIGEN_FLOOR

    def __post_init__(self):
        if not self.delta > 0:
            raise InvalidInput("delta must be positive")
        if not self.eigen_floor > 0:
            raise InvalidInput("eigen_floor must be positive")


@dataclass(frozen=True, eq=False)
class AggregateResult:
    """Aggregated covariance estimate plus its leading block.

    `leading` is always derived from sigma_beta by truncated_eig.  branch
    records which formula produced sigma_beta.  The optional fields carry
    protocol metadata when the result comes out of a coordinator round.
    """

    sigma_beta: np.ndarray
    leading: TruncatedEig
    branch: str  # "positive" | "limit_zero" | "negative" | "projection_average"
    beta_used: float | None = None
    cv: object | None = None
    missing: tuple[int, ...] = ()


def _normalized_weights(count: int, weights) -> np.ndarray:
    if weights is None:
        return np.full(count, 1.0 / count)
    w = np.asarray(weights, dtype=float)
    if w.shape != (count,) or not np.isfinite(w).all() or (w <= 0).any():
        raise InvalidInput(f"weights must be {count} positive finite numbers")
    return w / w.sum()


def _validated_square(inputs) -> list[np.ndarray]:
    mats = [symmetrize(m) for m in inputs]
    if not mats:
        raise InvalidInput("need at least one input matrix")
    p = mats[0].shape[0]
    if any(m.shape != (p, p) for m in mats):
        raise InvalidInput("input matrices differ in dimension")
    return mats


def phi_mean(inputs: Sequence, phi: Callable, phi_inverse: Callable) -> np.ndarray:
    """Generalized matrix mean: phi_inverse of the average of phi applied spectrally.

    phi must be strictly increasing on the spectra involved and phi_inverse
    must invert it there; both are applied through matrix_function, so domain
    violations surface as DomainError.
    """
    mats = _validated_square(inputs)
    acc = np.zeros_like(mats[0])
    for m in mats:
        acc += matrix_function(m, phi)
    return matrix_function(acc / len(mats), phi_inverse)


def beta_mean(inputs: Sequence, cfg: BetaConfig, weights=None) -> np.ndarray:
    """Matrix beta-mean of PSD matrices.

    beta > 0:  { mean(M_l^beta) }^(1/beta)
    beta = 0:  exp( mean(log M_l) )          (geometric / log-Euclidean limit)
    beta < 0:  { mean((M_l + delta I)^beta) }^(1/beta), no delta subtracted after

    The beta = 0 branch floors eigenvalues at cfg.eigen_floor before the log;
    the beta < 0 branch regularizes every input by +delta I before powering.
    """
    mats = _validated_square(inputs)
    w = _normalized_weights(len(mats), weights)
    p = mats[0].shape[0]
    b = cfg.beta
    if b == 0:
        acc = np.zeros((p, p))
        for wl, m in zip(w, mats):
            acc += wl * matrix_function(m, np.log, floor=cfg.eigen_floor)
        return matrix_function(acc, np.exp)
    shift = cfg.delta * np.eye(p) if b < 0 else 0.0
    acc = np.zeros((p, p))
    for wl, m in zip(w, mats):
        acc += wl * matrix_power(m + shift, b, floor=cfg.eigen_floor)
    return matrix_power(acc, 1.0 / b, floor=cfg.eigen_floor)


def _leading_block(sigma: np.ndarray, r: int) -> TruncatedEig:
    # One eig serves both the leading block and the boundary-tie check.
    es = eig_sym(sigma)
    if r < es.values.size and es.values[r - 1] == es.values[r]:
        warnings.warn(
            f"eigenvalues {r} and {r + 1} of the aggregate coincide "
            f"({es.values[r - 1]:.17g}); ordering uses the deterministic tie-break",
            TieWarning,
            stacklevel=3,
        )
    return truncated_eig(es, r)


def _validated_summaries(summaries: Sequence[TruncatedEig]):
    if not summaries:
        raise InvalidInput("need at least one local summary")
    p, q = summaries[0].p, summaries[0].q
    for s in summaries:
        if s.p != p or s.q != q:
            raise InvalidInput("local summaries differ in p or q")
    return p, q


def beta_aggregate(summaries: Sequence[TruncatedEig], cfg: BetaConfig, r: int, weights=None) -> AggregateResult:
    """Aggregate local rank-q summaries into Sigma_beta and take its top-r block.

    With M_l = V_l diag(lam_l) V_l^T machine l's rank-q reconstruction:

    beta > 0:  Sigma = { mean(V_l lam_l^beta V_l^T) }^(1/beta)
    beta = 0:  Sigma = exp( mean(V_l log(lam_l) V_l^T) )
    beta < 0:  Sigma = { mean((M_l + delta I)^beta) }^(1/beta), with the term
               computed in closed form as
               V_l ((lam_l + delta)^beta - delta^beta) V_l^T + delta^beta I.

    Summation runs in list order; callers with machine ids sort first.
    """
    p, q = _validated_summaries(summaries)
    if not 1 <= r <= q:
        raise InvalidInput(f"need 1 <= r <= q={q}, got r={r}")
    w = _normalized_weights(len(summaries), weights)
    b = cfg.beta
    acc = np.zeros((p, p))
    if b > 0:
        for wl, s in zip(w, summaries):
            acc += wl * (s.vectors * s.values ** b) @ s.vectors.T
        sigma = matrix_power(acc, 1.0 / b, floor=cfg.eigen_floor)
        branch = "positive"
    elif b == 0:
        for wl, s in zip(w, summaries):
            vals = np.where(s.values < cfg.eigen_floor, cfg.eigen_floor, s.values)
            if (vals <= 0).any():
                raise DomainError("non-positive eigenvalue survived flooring in the beta=0 branch")
            acc += wl * (s.vectors * np.log(vals)) @ s.vectors.T
        sigma = matrix_function(acc, np.exp)
        branch = "limit_zero"
    else:
        db = cfg.delta ** b
        for wl, s in zip(w, summaries):
            acc += wl * (s.vectors * ((s.values + cfg.delta) ** b - db)) @ s.vectors.T
        acc += db * np.eye(p)  # weights sum to 1
        sigma = matrix_power(acc, 1.0 / b, floor=cfg.eigen_floor)
        branch = "negative"
    return AggregateResult(sigma_beta=sigma, leading=_leading_block(sigma, r), branch=branch, beta_used=b)


def fan_aggregate(summaries: Sequence[TruncatedEig], weights=None) -> AggregateResult:
    """Aggregate by averaging the rank-r projection matrices V_l V_l^T.

    Eigenvalue weights are discarded entirely; the summaries must already be
    truncated at the target rank r (their common q).
    """
    p, r = _validated_summaries(summaries)
    w = _normalized_weights(len(summaries), weights)
    acc = np.zeros((p, p))
    for wl, s in zip(w, summaries):
        acc += wl * s.vectors @ s.vectors.T
    sigma = symmetrize(acc)
    return AggregateResult(sigma_beta=sigma, leading=_leading_block(sigma, r), branch="projection_average")
