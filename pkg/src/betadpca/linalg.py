"""Symmetric eigendecomposition with a deterministic output convention, plus
spectral functional calculus (f(M), M^beta, symmetric square-root factor).

All functions are pure: inputs are never mutated, outputs are fresh arrays.
Outputs are deterministic down to the bit for bit-identical inputs, which the
aggregation protocol relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError, InvalidInput, NotPSD

# Round-off window: eigenvalues in (-PSD_TOL, EIGEN_FLOOR) are treated as
# EIGEN_FLOOR (or 0) by maps whose domain excludes them.  Anything below
# -PSD_TOL counts as genuinely negative and is never silently repaired.
PSD_TOL = 1e-10
EIGEN_FLOOR = 1e-12


def symmetrize(a) -> np.ndarray:
    """Validate a finite square matrix and return its exactly symmetric part (A + A.T)/2."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise InvalidInput("matrix has non-finite entries")
    return (m + m.T) / 2.0


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Full eigendecomposition; column j of `vectors` pairs with values[j]."""

    values: np.ndarray   # (p,), non-increasing
    vectors: np.ndarray  # (p, p), orthonormal columns


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # Sign convention: the largest-|entry| component of each column is made
    # positive; argmax picks the lowest row index on magnitude ties.
    lead = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _order_tied_columns(values: np.ndarray, vectors: np.ndarray):
    # Values are already non-increasing.  Inside runs of exactly equal values
    # the solver's basis is kept but columns are ordered lexicographically
    # descending (after the sign fix), so e.g. I_p decomposes to I_p.
    p = values.size
    cols = np.arange(p)
    j = 0
    while j < p:
        k = j + 1
        while k < p and values[k] == values[j]:
            k += 1
        if k - j > 1:
            run = sorted(range(j, k), key=lambda c: tuple(vectors[:, c]), reverse=True)
            cols[j:k] = run
        j = k
    return values[cols], vectors[:, cols]


def eig_sym(m) -> EigenSystem:
    """Eigendecomposition of a symmetric matrix, values sorted non-increasing.

    The returned basis follows a deterministic convention: each eigenvector's
    largest-magnitude entry is positive (ties broken by lowest row index), and
    columns with exactly equal eigenvalues are ordered lexicographically
    descending.  Two calls on bit-identical input give bit-identical output.
    """
    sym = symmetrize(m)
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure is rare
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
    vals = vals[::-1].copy()
    vecs = np.ascontiguousarray(vecs[:, ::-1])
    vecs = _fix_signs(vecs)
    vals, vecs = _order_tied_columns(vals, vecs)
    return EigenSystem(values=vals, vectors=vecs)


def matrix_function(m, f: Callable[[np.ndarray], np.ndarray], *, floor: float | None = None) -> np.ndarray:
    """Spectral functional calculus: V f(Lambda) V^T for the scalar map f.

    f must accept an eigenvalue vector (any numpy ufunc-like map works).  With
    `floor` set, eigenvalues inside the round-off window (-1e-10, floor) are
    clamped to floor first, so PSD inputs survive maps such as log that would
    otherwise reject the tiny negatives round-off introduces.
    """
    es = eig_sym(m)
    vals = es.values
    if floor is not None:
        vals = np.where((vals > -PSD_TOL) & (vals < floor), floor, vals)
    with np.errstate(all="ignore"):
        fvals = np.asarray(f(vals), dtype=float)
    if fvals.shape != vals.shape:
        raise InvalidInput("scalar map must return one value per eigenvalue")
    bad = ~np.isfinite(fvals)
    if bad.any():
        raise DomainError(f"scalar map undefined at eigenvalue {vals[bad][0]:.17g}")
    return symmetrize((es.vectors * fvals) @ es.vectors.T)


def matrix_power(m, beta: float, *, floor: float = EIGEN_FLOOR) -> np.ndarray:
    """Spectral power M^beta.

    beta < 0 requires every eigenvalue (after the round-off clamp to `floor`)
    to be at least `floor`; fractional positive powers clamp round-off
    negatives to 0.  beta = 0 is a caller error: use matrix_function with
    log/exp for the limiting branch.
    """
    if beta == 0:
        raise InvalidInput("beta=0 has no direct power form; use the log/exp limit")
    es = eig_sym(m)
    vals = es.values
    if beta < 0:
        vals = np.where((vals > -PSD_TOL) & (vals < floor), floor, vals)
        if vals.min() < floor:
            raise DomainError(
                f"negative power {beta} needs eigenvalues >= {floor:g}; found {vals.min():.17g}"
            )
    elif not float(beta).is_integer():
        vals = np.where((vals > -PSD_TOL) & (vals < 0.0), 0.0, vals)
    with np.errstate(all="ignore"):
        pvals = vals ** beta
    bad = ~np.isfinite(pvals)
    if bad.any():
        raise DomainError(f"power {beta} undefined at eigenvalue {vals[bad][0]:.17g}")
    return symmetrize((es.vectors * pvals) @ es.vectors.T)


def sqrt_factor(m) -> np.ndarray:
    """Symmetric factor L with L @ L.T = M, for PSD M.

    Round-off negatives above -1e-10 are clamped to zero; anything lower
    raises NotPSD.
    """
    es = eig_sym(m)
    vals = es.values
    if vals.min() < -PSD_TOL:
        raise NotPSD(f"eigenvalue {vals.min():.17g} is below -{PSD_TOL:g}")
    vals = np.clip(vals, 0.0, None)
    return symmetrize((es.vectors * np.sqrt(vals)) @ es.vectors.T)
