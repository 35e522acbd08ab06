"""NMF iteration maps (INOM, PARINOM, MU, Fast-HALS) and the outer solve loop.

All maps minimize ``||V - W H||_F**2`` over entrywise-nonnegative factors.
They are pure functions of ``(V, state)``: inputs are never mutated, so
multiple solves may share a read-only V concurrently.

Conventions kept by every full iteration:
  * both factors stay entrywise nonnegative;
  * columns of W end the iteration with unit Euclidean norm. For INOM,
    PARINOM and MU the column scales are moved into the rows of H, which
    leaves the product W H (and hence the objective) unchanged. Fast-HALS
    renormalizes each column inside its sweep, where the unit-norm update is
    itself the exact block minimizer.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import linalg
from .errors import (
    ContractViolationError,
    DegenerateComponentError,
    DegenerateFactorError,
    NumericalFailureError,
    PositivityError,
)

__all__ = [
    "Algorithm",
    "InitScheme",
    "SolverConfig",
    "FactorPair",
    "TraceRecord",
    "IterationTrace",
    "initial_factors",
    "inom_update_h",
    "inom_update_w",
    "inom_iterate",
    "parinom_update",
    "parinom_iterate",
    "mu_iterate",
    "fast_hals_iterate",
    "iteration_stepper",
    "solve",
]

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 5000
DEFAULT_FLOOR = 1e-12


class Algorithm(Enum):
    INOM = "inom"
    PARINOM = "parinom"
    MU = "mu"
    FAST_HALS = "fast-hals"
    ACC_PARINOM = "acc-parinom"
    ACC_MU = "acc-mu"


class InitScheme(Enum):
    UNIFORM_01 = "uniform01"
    PROVIDED = "provided"


@dataclass(frozen=True)
class SolverConfig:
    """Everything a solve needs besides the data matrix itself."""

    algorithm: Algorithm
    rank: int
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    positivity_floor: float = DEFAULT_FLOOR
    seed: int = 0
    init: InitScheme = InitScheme.UNIFORM_01

    def __post_init__(self):
        if self.rank < 1:
            raise ContractViolationError(f"rank must be >= 1, got {self.rank}")
        if not self.tol > 0:
            raise ContractViolationError(f"tol must be > 0, got {self.tol}")
        if self.max_iters < 1:
            raise ContractViolationError(
                f"max_iters must be >= 1, got {self.max_iters}"
            )
        if not self.positivity_floor > 0:
            raise ContractViolationError(
                f"positivity_floor must be > 0, got {self.positivity_floor}"
            )


@dataclass
class FactorPair:
    """The pair (W: n x r, H: r x m) carried between iterations."""

    W: np.ndarray
    H: np.ndarray

    def copy(self) -> "FactorPair":
        return FactorPair(self.W.copy(), self.H.copy())

    @property
    def rank(self) -> int:
        return self.W.shape[1]

    def validate(self, unit_norm_tol: float = 1e-9) -> None:
        """Check nonnegativity, conformability and unit-norm W columns."""
        linalg.require_nonnegative(self.W, "W")
        linalg.require_nonnegative(self.H, "H")
        if self.W.shape[1] != self.H.shape[0]:
            raise ContractViolationError(
                f"W has {self.W.shape[1]} columns but H has {self.H.shape[0]} rows"
            )
        norms = linalg.column_norms(self.W)
        if np.any(np.abs(norms - 1.0) > unit_norm_tol):
            raise ContractViolationError(
                f"W columns must have unit norm, got norms {norms}"
            )


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    objective: float
    elapsed_s: float
    mu: Optional[float] = None
    nu: Optional[float] = None
    backtracks: Optional[int] = None


@dataclass
class IterationTrace:
    """Per-iteration objective / timing / step-diagnostic log of one solve."""

    records: list[TraceRecord] = field(default_factory=list)
    converged: bool = False

    def append(self, record: TraceRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    @property
    def elapsed(self) -> np.ndarray:
        return np.array([r.elapsed_s for r in self.records])

    @property
    def final_objective(self) -> float:
        return self.records[-1].objective

    @property
    def iterations(self) -> int:
        return self.records[-1].iteration

    def is_monotone(self, slack: float = 1e-9) -> bool:
        """True when f never rises by more than ``slack * max(1, f)``."""
        f = self.objectives
        return bool(np.all(f[1:] <= f[:-1] + slack * np.maximum(1.0, f[:-1])))

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("iter,objective,elapsed_s\n")
            for r in self.records:
                fh.write(f"{r.iteration},{r.objective!r},{r.elapsed_s!r}\n")


def _normalize_pair(W: np.ndarray, H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Move column scales of W into rows of H so the product is unchanged.
    norms = linalg.column_norms(W)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateFactorError(
            f"column {int(zero[0])} of W collapsed to zero during the iteration"
        )
    return W / norms, H * norms[:, None]


def initial_factors(V: np.ndarray, config: SolverConfig) -> FactorPair:
    """Seeded uniform-[0,1) starting factors with W column-normalized.

    For a fixed seed this is deterministic, so several algorithms given the
    same config seed start from the same factors and the same objective.
    """
    n, m = V.shape
    rng = np.random.default_rng(config.seed)
    W = rng.random((n, config.rank))
    H = rng.random((config.rank, m))
    return FactorPair(linalg.normalize_columns(W), H)


def inom_update_h(V, W, H) -> tuple[np.ndarray, float]:
    """One INOM block update of H with W fixed.

    The step size ``mu`` is the maximum row sum of ``2 W^T W``, which
    dominates the block Hessian, so the projected step
    ``max(0, H + (2 W^T V - 2 W^T W H) / mu)`` minimizes the quadratic upper
    bound of the objective anchored at H and can only decrease the misfit.

    Returns the updated H and ``mu``.
    """
    G = W.T @ W
    mu = linalg.max_row_sum(2.0 * G)
    if mu == 0.0:
        raise DegenerateFactorError("W is identically zero; no H step size exists")
    Hn = np.maximum(0.0, H + (2.0 * (W.T @ V) - 2.0 * (G @ H)) / mu)
    return Hn, mu


def inom_update_w(V, W, H) -> tuple[np.ndarray, float]:
    """One INOM block update of W with H fixed; returns (W', nu).

    ``nu`` is the maximum row sum of ``2 H H^T``.
    """
    G = H @ H.T
    nu = linalg.max_row_sum(2.0 * G)
    if nu == 0.0:
        raise DegenerateFactorError("H is identically zero; no W step size exists")
    Wn = np.maximum(0.0, W + (2.0 * (V @ H.T) - 2.0 * (W @ G)) / nu)
    return Wn, nu


def inom_iterate(V, state: FactorPair) -> FactorPair:
    """Full INOM iteration: H step, then W step, then renormalize W.

    Per-iteration cost is O(2 r n m + 2 r^2 (n + m)).
    """
    Hn, _ = inom_update_h(V, state.W, state.H)
    Wn, _ = inom_update_w(V, state.W, Hn)
    Wn, Hn = _normalize_pair(Wn, Hn)
    return FactorPair(Wn, Hn)


def _parinom_products(V, W, H):
    VHt = V @ H.T
    WHHt = W @ (H @ H.T)
    WtV = W.T @ V
    WtWH = (W.T @ W) @ H
    return VHt, WHHt, WtV, WtWH


def _quarter_power_step(numerator, denominator, X, floor, what):
    if np.any(denominator == 0.0):
        raise PositivityError(
            f"zero denominator entry in the {what} update; factors must stay "
            "strictly positive (is the positivity floor set to 0?)"
        )
    return np.maximum(floor, ((numerator * X**4) / denominator) ** 0.25)


def parinom_update(V, W, H, *, floor: float = DEFAULT_FLOOR):
    """Raw PARINOM quarter-power maps, before any normalization.

    W' = ((V H^T  o W^4) / (W H H^T))^(1/4)
    H' = ((W^T V o H^4) / (W^T W H))^(1/4)

    Both are computed entirely from the incoming (W, H), so they are mutually
    independent. Entries are floored at ``floor`` afterwards because the
    multiplicative form needs strictly positive factors on the next call.
    """
    VHt, WHHt, WtV, WtWH = _parinom_products(V, W, H)
    Wn = _quarter_power_step(VHt, WHHt, W, floor, "W")
    Hn = _quarter_power_step(WtV, WtWH, H, floor, "H")
    return Wn, Hn


def parinom_iterate(
    V, state: FactorPair, *, floor: float = DEFAULT_FLOOR, parallel: bool = False
) -> FactorPair:
    """Full PARINOM iteration: joint W/H update, floor, renormalize W.

    With ``parallel=True`` the two factor updates run in two threads. The
    shared matrix products are formed once up front (BLAS kernels are not
    guaranteed bit-reproducible under concurrent invocation); the per-factor
    elementwise work then proceeds independently, and the result is exactly
    equal to the sequential evaluation.
    """
    W, H = state.W, state.H
    VHt, WHHt, WtV, WtWH = _parinom_products(V, W, H)
    if parallel:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fw = pool.submit(_quarter_power_step, VHt, WHHt, W, floor, "W")
            fh = pool.submit(_quarter_power_step, WtV, WtWH, H, floor, "H")
            Wn, Hn = fw.result(), fh.result()
    else:
        Wn = _quarter_power_step(VHt, WHHt, W, floor, "W")
        Hn = _quarter_power_step(WtV, WtWH, H, floor, "H")
    Wn, Hn = _normalize_pair(Wn, Hn)
    return FactorPair(Wn, Hn)


def mu_iterate(V, state: FactorPair, *, floor: float = DEFAULT_FLOOR) -> FactorPair:
    """Multiplicative-update iteration: W ratio step, then H ratio step.

    The H step uses the freshly updated W in both its numerator and
    denominator, which keeps exact factorizations fixed points of the map.
    W is renormalized (scales moved into H) after the pair of updates.
    """
    W, H = state.W, state.H
    den_w = W @ (H @ H.T)
    if np.any(den_w == 0.0):
        raise PositivityError("zero denominator entry in the MU W update")
    Wn = np.maximum(floor, W * ((V @ H.T) / den_w))
    den_h = (Wn.T @ Wn) @ H
    if np.any(den_h == 0.0):
        raise PositivityError("zero denominator entry in the MU H update")
    Hn = np.maximum(floor, H * ((Wn.T @ V) / den_h))
    Wn, Hn = _normalize_pair(Wn, Hn)
    return FactorPair(Wn, Hn)


def fast_hals_iterate(
    V, state: FactorPair, *, floor: float = DEFAULT_FLOOR
) -> FactorPair:
    """One Fast-HALS sweep: every row of H, then every column of W.

    Each inner step is the exact nonnegative minimizer of the objective over
    that single row/column (for W, over the unit sphere, hence the in-loop
    normalization), using Gram-matrix precomputations instead of explicit
    residuals.
    """
    W = state.W.copy()
    H = state.H.copy()
    r = W.shape[1]
    P = V.T @ W
    Q = W.T @ W
    for j in range(r):
        if Q[j, j] == 0.0:
            raise DegenerateComponentError(j, f"zero Gram diagonal for component {j}")
        H[j] = np.maximum(floor, H[j] + (P[:, j] - H.T @ Q[:, j]) / Q[j, j])
    R = V @ H.T
    S = H @ H.T
    for j in range(r):
        if S[j, j] == 0.0:
            raise DegenerateComponentError(j, f"zero Gram diagonal for component {j}")
        w = np.maximum(floor, W[:, j] + (R[:, j] - W @ S[:, j]) / S[j, j])
        W[:, j] = w / math.sqrt(float(w @ w))
    return FactorPair(W, H)


def iteration_stepper(
    config: SolverConfig,
) -> Callable[[np.ndarray, FactorPair], tuple[FactorPair, dict]]:
    """Build the per-iteration step function for ``config.algorithm``.

    The returned callable maps ``(V, state)`` to ``(new_state, info)`` where
    ``info`` carries step diagnostics (mu/nu for INOM, backtrack counts for
    the accelerated algorithms).
    """
    floor = config.positivity_floor
    alg = config.algorithm

    if alg is Algorithm.INOM:

        def step(V, state):
            Hn, mu = inom_update_h(V, state.W, state.H)
            Wn, nu = inom_update_w(V, state.W, Hn)
            Wn, Hn = _normalize_pair(Wn, Hn)
            return FactorPair(Wn, Hn), {"mu": mu, "nu": nu}

    elif alg is Algorithm.PARINOM:

        def step(V, state):
            return parinom_iterate(V, state, floor=floor), {}

    elif alg is Algorithm.MU:

        def step(V, state):
            return mu_iterate(V, state, floor=floor), {}

    elif alg is Algorithm.FAST_HALS:

        def step(V, state):
            return fast_hals_iterate(V, state, floor=floor), {}

    elif alg in (Algorithm.ACC_PARINOM, Algorithm.ACC_MU):
        from . import squarem

        fp_map = (
            squarem.parinom_map(floor=floor)
            if alg is Algorithm.ACC_PARINOM
            else squarem.mu_map(floor=floor)
        )

        def step(V, state):
            pair, accel = squarem.squarem_step(V, state, fp_map, floor=floor)
            return pair, {"backtracks": accel.backtracks}

    else:  # pragma: no cover - enum is closed
        raise ContractViolationError(f"unknown algorithm {alg!r}")

    return step


def solve(
    V,
    config: SolverConfig,
    init: Optional[FactorPair] = None,
    *,
    callback: Optional[Callable[[int, FactorPair], None]] = None,
) -> tuple[FactorPair, IterationTrace]:
    """Run the configured iteration map until the relative objective change
    drops to ``config.tol`` or ``config.max_iters`` is reached.

    Parameters
    ----------
    V : array, shape (n, m)
        Nonnegative data matrix. Column-normalize it beforehand if the
        normalized-cone convention is wanted; this routine uses V as given.
    config : SolverConfig
        Algorithm, rank, stopping rule, floor and seed.
    init : FactorPair, optional
        Starting factors; required (and only allowed) with
        ``InitScheme.PROVIDED``.
    callback : callable, optional
        Invoked as ``callback(iteration, state)`` after each full iteration.

    Returns
    -------
    (FactorPair, IterationTrace)
        Final factors and the full objective/timing trace. The objective
        sequence in the trace is non-increasing.
    """
    V = linalg.as_matrix(V, "V")
    linalg.require_nonnegative(V, "V")
    n, m = V.shape
    if config.rank > min(n, m):
        raise ContractViolationError(
            f"rank {config.rank} exceeds min(n, m) = {min(n, m)}"
        )

    if config.init is InitScheme.PROVIDED:
        if init is None:
            raise ContractViolationError("InitScheme.PROVIDED requires init factors")
        if init.W.shape != (n, config.rank) or init.H.shape != (config.rank, m):
            raise ContractViolationError(
                f"init shapes {init.W.shape}/{init.H.shape} do not match "
                f"({n}, {config.rank})/({config.rank}, {m})"
            )
        linalg.require_nonnegative(init.W, "init W")
        linalg.require_nonnegative(init.H, "init H")
        state = init.copy()
    else:
        if init is not None:
            raise ContractViolationError(
                "init factors were given but config.init is not PROVIDED"
            )
        state = initial_factors(V, config)

    step = iteration_stepper(config)
    trace = IterationTrace()
    f_prev = linalg.frobenius_residual(V, state.W, state.H)
    if not np.isfinite(f_prev):
        raise NumericalFailureError("initial objective is not finite", iteration=0)
    trace.append(TraceRecord(0, f_prev, 0.0))

    t0 = time.perf_counter()
    for k in range(1, config.max_iters + 1):
        state, info = step(V, state)
        f_k = linalg.frobenius_residual(V, state.W, state.H)
        if not np.isfinite(f_k):
            raise NumericalFailureError(
                f"objective became non-finite at iteration {k}", iteration=k
            )
        trace.append(
            TraceRecord(
                k,
                f_k,
                time.perf_counter() - t0,
                mu=info.get("mu"),
                nu=info.get("nu"),
                backtracks=info.get("backtracks"),
            )
        )
        if callback is not None:
            callback(k, state)
        rel_change = abs(f_k - f_prev) / f_prev if f_prev > 0.0 else 0.0
        if rel_change <= config.tol:
            trace.converged = True
            break
        f_prev = f_k
    return state, trace
