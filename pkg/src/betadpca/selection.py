"""Cross-validated choice of beta.

Machines (not samples) are partitioned into folds.  For each fold, training
machines are aggregated at rank r for every candidate beta, and the mismatch
against each validation machine's own rank-r projection is averaged.  The
candidate with the smallest mean mismatch wins; ties go to the earlier
candidate in the declared order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .aggregation import BetaConfig, beta_aggregate
from .errors import InvalidInput
from .local_pca import TruncatedEig
from .rngs import FOLDS, stream

DEFAULT_CANDIDATES = (-1.0, 0.0, 1.0)


@dataclass(frozen=True)
class CvPlan:
    """Fold assignment over machine indices 0..m-1 plus the candidate betas."""

    m: int
    k: int
    folds: tuple[tuple[int, ...], ...]
    candidate_set: tuple[float, ...]
    seed: int
    r: int | None = None
    q: int | None = None

    def __post_init__(self):
        seen = [i for fold in self.folds for i in fold]
        if sorted(seen) != list(range(self.m)):
            raise InvalidInput("folds must partition the machine indices 0..m-1")
        sizes = [len(f) for f in self.folds]
        if len(self.folds) != self.k or min(sizes) < 1 or max(sizes) - min(sizes) > 1:
            raise InvalidInput("fold sizes must be balanced (differ by at most 1)")
        if not self.candidate_set:
            raise InvalidInput("candidate_set must be non-empty")


def make_folds(m: int, k: int, seed: int, *, candidate_set: Sequence[float] = DEFAULT_CANDIDATES,
               r: int | None = None, q: int | None = None) -> CvPlan:
    """Shuffle machine indices with the plan seed, then chunk contiguously.

    With m <= k the plan degenerates to leave-one-out (k becomes m).
    """
    if m < 2:
        raise InvalidInput("cross-validation needs at least two machines")
    if k < 2:
        raise InvalidInput("need at least two folds")
    k_eff = min(k, m)
    perm = stream(seed, FOLDS).permutation(m)
    folds = tuple(tuple(int(i) for i in chunk) for chunk in np.array_split(perm, k_eff))
    return CvPlan(m=m, k=k_eff, folds=folds, candidate_set=tuple(float(b) for b in candidate_set),
                  seed=seed, r=r, q=q)


def projection_discrepancy(a: TruncatedEig, b: TruncatedEig) -> float:
    """Squared Frobenius distance between the two rank-r projection matrices."""
    if a.p != b.p or a.q != b.q:
        raise InvalidInput("summaries must share p and rank")
    diff = a.vectors @ a.vectors.T - b.vectors @ b.vectors.T
    return float(np.sum(diff * diff))


@dataclass(frozen=True, eq=False)
class CvResult:
    """Mean mismatch per candidate, the winner, and the per-fold breakdown."""

    scores: dict[float, float]
    best_beta: float
    per_fold: np.ndarray  # (k, n_candidates)


def select_beta(summaries_q: Sequence[TruncatedEig], summaries_r: Sequence[TruncatedEig],
                plan: CvPlan, cfg_template: BetaConfig) -> CvResult:
    """Run the fold loop and pick the best beta.

    summaries_q feed the training-side aggregation; summaries_r are the
    validation machines' own rank-r projections and are the only thing the
    validation side looks at.
    """
    if len(summaries_q) != plan.m or len(summaries_r) != plan.m:
        raise InvalidInput(f"plan covers {plan.m} machines, got {len(summaries_q)}/{len(summaries_r)}")
    r = summaries_r[0].q
    if any(s.q != r for s in summaries_r):
        raise InvalidInput("validation summaries differ in rank")
    if plan.r is not None and plan.r != r:
        raise InvalidInput(f"plan expects rank r={plan.r}, validation summaries have {r}")
    q = summaries_q[0].q
    if plan.q is not None and plan.q != q:
        raise InvalidInput(f"plan expects rank q={plan.q}, training summaries have {q}")
    if r > q:
        raise InvalidInput(f"validation rank r={r} exceeds training rank q={q}")

    candidates = plan.candidate_set
    per_fold = np.zeros((plan.k, len(candidates)))
    for j, fold in enumerate(plan.folds):
        held = set(fold)
        train = [summaries_q[i] for i in range(plan.m) if i not in held]
        for bi, b in enumerate(candidates):
            agg = beta_aggregate(train, replace(cfg_template, beta=b), r)
            per_fold[j, bi] = float(np.mean(
                [projection_discrepancy(agg.leading, summaries_r[i]) for i in fold]
            ))
    scores = per_fold.mean(axis=0)
    best = candidates[int(np.argmin(scores))]  # argmin takes the first minimum
    return CvResult(
        scores={b: float(s) for b, s in zip(candidates, scores)},
        best_beta=best,
        per_fold=per_fold,
    )
