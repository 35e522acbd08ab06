"""Convergence and correctness instrumentation.

Three kinds of checks live here:

* the first-order (KKT) stationarity residual ``min(X, grad_X f)`` for the
  nonnegativity-constrained misfit, which vanishes exactly at stationary
  points;
* direct evaluators for the quadratic (INOM) and separable quarter-power /
  logarithm (PARINOM) upper bounds, so tests and audits can confirm that
  each bound touches the objective at the anchor point and dominates it
  everywhere else;
* :func:`audit_majorization`, which packages those checks into a pass/fail
  report over random sample points.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from . import linalg
from .errors import ContractViolationError, ShapeError
from .solvers import Algorithm, FactorPair

__all__ = [
    "KktReport",
    "nmf_gradients",
    "kkt_residual",
    "inom_h_surrogate",
    "inom_w_surrogate",
    "parinom_surrogate",
    "sigmoidal_upper_bound",
    "SurrogateCheck",
    "MajorizationReport",
    "audit_majorization",
]


@dataclass(frozen=True)
class KktReport:
    """Stationarity residuals for both factors; zero iff first-order optimal."""

    w_residual: float
    h_residual: float

    @property
    def combined(self) -> float:
        return max(self.w_residual, self.h_residual)

    def to_text(self) -> str:
        return (
            f"w_residual: {self.w_residual!r}\n"
            f"h_residual: {self.h_residual!r}\n"
            f"combined: {self.combined!r}\n"
        )


def nmf_gradients(V, W, H) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of ``||V - W H||_F**2`` with respect to W and H."""
    GW = 2.0 * (W @ (H @ H.T)) - 2.0 * (V @ H.T)
    GH = 2.0 * ((W.T @ W) @ H) - 2.0 * (W.T @ V)
    return GW, GH


def kkt_residual(V, W, H) -> KktReport:
    """Max-abs entry of ``min(X, grad_X f)`` for each factor X.

    The entrywise minimum vanishes exactly where either the entry is active
    at zero with a nonnegative gradient or the gradient is zero, so the
    residual is 0 iff (W, H) is first-order stationary for the
    nonnegativity-constrained problem.
    """
    V = linalg.as_matrix(V, "V")
    W = linalg.as_matrix(W, "W")
    H = linalg.as_matrix(H, "H")
    if W.shape[0] != V.shape[0] or H.shape[1] != V.shape[1] or W.shape[1] != H.shape[0]:
        raise ShapeError(
            f"cannot form residuals from V {V.shape}, W {W.shape}, H {H.shape}"
        )
    GW, GH = nmf_gradients(V, W, H)
    w_res = float(np.abs(np.minimum(W, GW)).max())
    h_res = float(np.abs(np.minimum(H, GH)).max())
    return KktReport(w_residual=w_res, h_residual=h_res)


def inom_h_surrogate(V, W, H_ref, H) -> float:
    """Quadratic upper bound on ``f(W, .)`` anchored at ``H_ref``.

    Equals the objective at ``H = H_ref`` and dominates it elsewhere because
    the isotropic curvature (max row sum of ``2 W^T W``) dominates the true
    block Hessian.
    """
    G = W.T @ W
    mu = linalg.max_row_sum(2.0 * G)
    f_ref = linalg.frobenius_residual(V, W, H_ref)
    grad = 2.0 * (G @ H_ref) - 2.0 * (W.T @ V)
    D = H - H_ref
    return f_ref + float(np.sum(grad * D)) + 0.5 * mu * float(np.sum(D * D))


def inom_w_surrogate(V, W_ref, H, W) -> float:
    """Quadratic upper bound on ``f(., H)`` anchored at ``W_ref``."""
    G = H @ H.T
    nu = linalg.max_row_sum(2.0 * G)
    f_ref = linalg.frobenius_residual(V, W_ref, H)
    grad = 2.0 * (W_ref @ G) - 2.0 * (V @ H.T)
    D = W - W_ref
    return f_ref + float(np.sum(grad * D)) + 0.5 * nu * float(np.sum(D * D))


def sigmoidal_upper_bound(c: float, alpha, x, x_ref) -> float:
    """Upper bound on the positive-coefficient monomial ``c * prod(x**alpha)``.

    For c > 0 and strictly positive x, x_ref, weighted AM-GM gives

        c * prod(x**alpha)
            <= c * prod(x_ref**alpha)
                 * sum_j (alpha_j / |alpha|_1) * (x_j / x_ref_j)**|alpha|_1

    with equality at ``x = x_ref``.
    """
    if not c > 0:
        raise ContractViolationError(f"coefficient must be positive, got {c}")
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    x_ref = np.asarray(x_ref, dtype=float)
    a1 = float(np.sum(alpha))
    lead = c * float(np.prod(x_ref**alpha))
    return lead * float(np.sum((alpha / a1) * (x / x_ref) ** a1))


def parinom_surrogate(V, W_ref, H_ref, W, H) -> float:
    """Separable upper bound on the joint objective anchored at (W_ref, H_ref).

    The quadratic-in-the-product part of the objective is bounded by
    quarter-power terms (AM-GM on each four-factor monomial) and the negative
    cross term by its tangent logarithm bound; both touch at the anchor. All
    four matrices must be strictly positive.
    """
    VHt = V @ H_ref.T
    WtV = W_ref.T @ V
    WHHt = W_ref @ (H_ref @ H_ref.T)
    WtWH = (W_ref.T @ W_ref) @ H_ref
    quart_w = (W / W_ref) ** 4
    quart_h = (H / H_ref) ** 4
    positive = 0.5 * float(np.sum(WHHt * W_ref * quart_w)) + 0.5 * float(
        np.sum(WtWH * H_ref * quart_h)
    )
    cross_ref = float(np.sum(VHt * W_ref))
    negative = -2.0 * (
        cross_ref
        + float(np.sum(VHt * W_ref * np.log(W / W_ref)))
        + float(np.sum(WtV * H_ref * np.log(H / H_ref)))
    )
    return float(np.sum(V * V)) + positive + negative


@dataclass(frozen=True)
class SurrogateCheck:
    name: str
    equality_gap: float  # |g - f| / max(1, |f|) at the anchor
    worst_domination: float  # max over samples of f - g; <= tol when passing
    samples: int


@dataclass(frozen=True)
class MajorizationReport:
    algorithm: Algorithm
    checks: tuple[SurrogateCheck, ...]
    equality_tol: float = 1e-9
    domination_tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return all(
            c.equality_gap <= self.equality_tol
            and c.worst_domination <= self.domination_tol
            for c in self.checks
        )

    def to_text(self) -> str:
        lines = [f"algorithm: {self.algorithm.value}", f"passed: {self.passed}"]
        for c in self.checks:
            lines.append(
                f"{c.name}: equality_gap={c.equality_gap:.3e} "
                f"worst_domination={c.worst_domination:.3e} samples={c.samples}"
            )
        return "\n".join(lines) + "\n"


def _sample_nonnegative(rng, shape, scale):
    return rng.uniform(0.0, 2.0 * scale, size=shape)


def _sample_positive(rng, shape, scale):
    return rng.uniform(1e-6, 2.0 * scale, size=shape)


def audit_majorization(
    V,
    state: FactorPair,
    algorithm: Algorithm,
    samples: int = 100,
    seed: int = 0,
) -> MajorizationReport:
    """Check the algorithm's upper bound(s) at ``state`` and at random points.

    At the anchor the bound must reproduce the objective (relative gap below
    1e-9); at ``samples`` random perturbed points it must dominate it (f - g
    below 1e-9). Violations are report content, never exceptions.
    """
    V = linalg.as_matrix(V, "V")
    W, H = state.W, state.H
    rng = np.random.default_rng(seed)
    f_here = linalg.frobenius_residual(V, W, H)
    denom = max(1.0, abs(f_here))
    checks: list[SurrogateCheck] = []

    if algorithm is Algorithm.INOM:
        gap_h = abs(inom_h_surrogate(V, W, H, H) - f_here) / denom
        worst_h = -np.inf
        scale_h = max(1.0, float(H.max()))
        for _ in range(samples):
            Hs = _sample_nonnegative(rng, H.shape, scale_h)
            worst_h = max(
                worst_h,
                linalg.frobenius_residual(V, W, Hs) - inom_h_surrogate(V, W, H, Hs),
            )
        checks.append(
            SurrogateCheck("inom_h", gap_h, worst_h if samples else 0.0, samples)
        )

        gap_w = abs(inom_w_surrogate(V, W, H, W) - f_here) / denom
        worst_w = -np.inf
        scale_w = max(1.0, float(W.max()))
        for _ in range(samples):
            Ws = _sample_nonnegative(rng, W.shape, scale_w)
            worst_w = max(
                worst_w,
                linalg.frobenius_residual(V, Ws, H) - inom_w_surrogate(V, W, H, Ws),
            )
        checks.append(
            SurrogateCheck("inom_w", gap_w, worst_w if samples else 0.0, samples)
        )

    elif algorithm in (Algorithm.PARINOM, Algorithm.ACC_PARINOM):
        if np.any(W <= 0.0) or np.any(H <= 0.0):
            raise ContractViolationError(
                "the PARINOM audit needs strictly positive factors"
            )
        gap = abs(parinom_surrogate(V, W, H, W, H) - f_here) / denom
        worst = -np.inf
        scale_w = max(1.0, float(W.max()))
        scale_h = max(1.0, float(H.max()))
        for _ in range(samples):
            Ws = _sample_positive(rng, W.shape, scale_w)
            Hs = _sample_positive(rng, H.shape, scale_h)
            worst = max(
                worst,
                linalg.frobenius_residual(V, Ws, Hs)
                - parinom_surrogate(V, W, H, Ws, Hs),
            )
        checks.append(
            SurrogateCheck("parinom_joint", gap, worst if samples else 0.0, samples)
        )

    else:
        raise ContractViolationError(
            f"no majorization audit is defined for {algorithm.value}"
        )

    return MajorizationReport(algorithm=algorithm, checks=tuple(checks))
