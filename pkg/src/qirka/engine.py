"""Q-IRKA: symplectic iterative rational Krylov fixed-point iteration.

Each sweep solves ``(A - sigma_i I) z = B t`` for every shift and tangential
direction, extracts a symplectic basis from the resulting real pool,
projects, and replaces the shifts by mirrored reduced poles.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .errors import (
    ConfigError,
    ContractError,
    NumericalBreakdownError,
    ShiftCollisionError,
)
from .model import StateSpaceModel, pr_residuals
from .projection import (
    DEFAULT_TAU,
    CandidatePool,
    ProjectionPair,
    StructuralDiagnostics,
    project,
    structural_diagnostics,
    symplectic_basis,
)

__all__ = [
    "QirkaConfig",
    "IterationRecord",
    "QirkaResult",
    "canonical_order",
    "tangential_directions",
    "candidate_pool",
    "select_shifts",
    "relative_change",
    "initial_shifts",
    "run",
]

log = logging.getLogger(__name__)

INIT_STRATEGIES = ("log-spaced-real", "user-provided")


@dataclass(frozen=True)
class QirkaConfig:
    r: int
    L: int | None = None  # None means L = r
    epsilon: float = 1e-6
    max_iter: int = 100
    tau: float = DEFAULT_TAU
    init_strategy: str = "log-spaced-real"
    initial_shifts: tuple = ()

    def __post_init__(self):
        if self.r < 1:
            raise ConfigError("r must be >= 1")
        if self.L is not None and self.L < 1:
            raise ConfigError("L must be >= 1")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ConfigError(f"unknown init_strategy {self.init_strategy!r}")
        if self.init_strategy == "user-provided" and len(self.initial_shifts) != self.r:
            raise ConfigError("user-provided strategy needs exactly r initial shifts")

    @property
    def per_shift(self) -> int:
        return self.r if self.L is None else self.L


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    relchg: float
    symp: float
    left: float
    pr1: float
    pr2: float
    poles: np.ndarray = field(repr=False)
    shifts: np.ndarray = field(repr=False)
    elapsed: float = 0.0


@dataclass
class QirkaResult:
    reduced: StateSpaceModel
    pair: ProjectionPair
    trace: list
    converged: bool
    diagnostics: StructuralDiagnostics
    monitored_reduced: StateSpaceModel | None = None
    wall_time: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.trace)

    def __iter__(self):
        # allows ``reduced, pair, trace = run(...)``
        return iter((self.reduced, self.pair, self.trace))


def canonical_order(sigma) -> np.ndarray:
    """Sort by increasing imaginary part, ties by increasing real part."""
    s = np.asarray(sigma, dtype=complex).ravel()
    idx = np.lexsort((s.real, s.imag))
    return s[idx]


def tangential_directions(m: int, L: int) -> np.ndarray:
    """Columns ``e_nu(l)`` with ``nu(l) = 1 + ((l - 1) mod 2m)``, shape ``(2m, L)``."""
    if m < 1 or L < 1:
        raise ConfigError("tangential_directions needs m >= 1 and L >= 1")
    idx = np.arange(L) % (2 * m)
    T = np.zeros((2 * m, L))
    T[idx, np.arange(L)] = 1.0
    return T


def _factor_shifted(A, sigma, tol):
    M = A - sigma * np.eye(A.shape[0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spla.LinAlgWarning)
        lu, piv = spla.lu_factor(M, check_finite=False)
    if np.min(np.abs(np.diag(lu))) <= tol:
        raise ShiftCollisionError(f"shift {sigma} collides with spec(A)", shift=sigma)
    return lu, piv


def candidate_pool(model: StateSpaceModel, shifts, directions) -> CandidatePool:
    """Real candidate pool, shift-major and direction-minor.

    A real shift contributes ``(A - s I)^{-1} B t``; a complex shift
    contributes the real and then the imaginary part of the complex solve.
    """
    A = model.A
    T = np.asarray(directions, dtype=float)
    if T.ndim != 2 or T.shape[0] != model.B.shape[1]:
        raise ContractError("directions must be a (2m, L) array")
    N = A.shape[0]
    if T.shape[1] == 0:
        return CandidatePool(np.empty((N, 0)), ())
    tol = 1e-10 * max(1.0, np.linalg.norm(A, 1))
    BT = model.B @ T
    cols, tags = [], []
    for i, s in enumerate(np.asarray(shifts, dtype=complex)):
        if s.imag == 0:
            lu = _factor_shifted(A, s.real, tol)
            Z = spla.lu_solve(lu, BT, check_finite=False)
            for ell in range(T.shape[1]):
                cols.append(Z[:, ell])
                tags.append((i, ell, "real"))
        else:
            lu = _factor_shifted(A, s, tol)
            Z = spla.lu_solve(lu, BT.astype(complex), check_finite=False)
            for ell in range(T.shape[1]):
                cols.append(Z[:, ell].real)
                tags.append((i, ell, "re"))
                cols.append(Z[:, ell].imag)
                tags.append((i, ell, "im"))
    return CandidatePool(np.column_stack(cols), tuple(tags))


def select_shifts(A_r) -> np.ndarray:
    """Next shifts ``-conj(lambda)`` from the ``Im >= 0`` reduced poles, canonically ordered."""
    A_r = np.asarray(A_r, dtype=float)
    k = A_r.shape[0]
    if A_r.ndim != 2 or k != A_r.shape[1] or k % 2:
        raise ContractError("A_r must be square of even size")
    r = k // 2
    try:
        lam = spla.eigvals(A_r, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalBreakdownError(f"reduced eigensolve failed: {exc}") from None
    upper = canonical_order(lam[lam.imag >= 0])
    chosen = list(upper[:r])
    if len(chosen) < r:
        real = lam[lam.imag == 0]
        real = real[np.argsort(-np.abs(real.real), kind="stable")]
        for x in real:
            if len(chosen) == r:
                break
            chosen.append(x)
    lam_sel = np.asarray(chosen, dtype=complex)
    sigma = -np.conj(lam_sel)
    # unstable reduced poles would mirror into the left half-plane
    sigma = np.abs(sigma.real) + 1j * sigma.imag
    return canonical_order(sigma)


def relative_change(new, old) -> float:
    new = np.asarray(new, dtype=complex)
    old = np.asarray(old, dtype=complex)
    if new.shape != old.shape:
        raise ContractError("shift vectors differ in length")
    return float(np.linalg.norm(new - old) / max(1.0, np.linalg.norm(old)))


def initial_shifts(model: StateSpaceModel, r: int, strategy: str = "log-spaced-real", shifts=()):
    """Starting shifts: log-spaced reals from a row-sum bound of ``A``, or user values."""
    if r < 1:
        raise ConfigError("r must be >= 1")
    if strategy == "user-provided":
        s = canonical_order(shifts)
        if s.size != r:
            raise ConfigError(f"expected {r} user shifts, got {s.size}")
        return s
    if strategy != "log-spaced-real":
        raise ConfigError(f"unknown strategy {strategy!r}")
    g = float(np.linalg.norm(model.A, np.inf))
    lo, hi = max(1e-3, 0.01 * g), 10.0 * g
    if not (lo > 0 and hi > 0):
        raise ConfigError("nonpositive shift bounds")
    return log_grid(lo, hi, r)


def log_grid(lo: float, hi: float, r: int) -> np.ndarray:
    if lo <= 0 or hi <= 0:
        raise ConfigError("nonpositive shift bounds")
    if r == 1:
        return np.array([np.sqrt(lo * hi)], dtype=complex)
    return np.logspace(np.log10(lo), np.log10(hi), r).astype(complex)


def _build(model, sigma, directions, r, tau):
    """One pool -> basis -> projection step, retrying once on a shift collision."""
    for attempt in (0, 1):
        try:
            pool = candidate_pool(model, sigma, directions)
            break
        except ShiftCollisionError as exc:
            if attempt:
                raise
            s = exc.shift
            bumped = s + 1e-6 * (1 + abs(s))
            log.warning("shift %s collides with spec(A); retrying with %s", s, bumped)
            sigma = np.where(sigma == s, bumped, sigma)
    pair = symplectic_basis(pool, model.n, r, tau)
    return pair, project(model, pair)


def run(model: StateSpaceModel, config: QirkaConfig, monitor: StateSpaceModel | None = None) -> QirkaResult:
    """Run Q-IRKA on ``model``.

    Parameters
    ----------
    model
        PR (or PR-dilatable) model whose transfer matrix is approximated.
    config
        Iteration settings.
    monitor
        Optional full-port dilation sharing ``A`` with ``model``. When given,
        the PR defects in the trace are evaluated on its projection, which is
        where PR is meaningful for external-port models.
    """
    structured = monitor if monitor is not None else model
    if monitor is not None and not np.array_equal(monitor.A, model.A):
        raise ContractError("monitor model must share A with the reduced model")
    res = pr_residuals(structured)
    if max(res.norms()) > 1e-8:
        log.warning("input model is not PR (residual norms %s)", res.norms())
    r = config.r
    directions = tangential_directions(model.m, config.per_shift)
    sigma = canonical_order(
        initial_shifts(model, r, config.init_strategy, config.initial_shifts)
    )
    trace = []
    best = None
    t0 = time.perf_counter()
    for k in range(config.max_iter):
        pair, reduced = _build(model, sigma, directions, r, config.tau)
        mon_red = project(monitor, pair) if monitor is not None else reduced
        diag = structural_diagnostics(pair, mon_red)
        new_sigma = select_shifts(reduced.A)
        rc = relative_change(new_sigma, sigma)
        trace.append(
            IterationRecord(
                k + 1, rc, diag.symp, diag.left, diag.pr1, diag.pr2,
                np.linalg.eigvals(reduced.A), sigma.copy(),
                time.perf_counter() - t0,
            )
        )
        log.debug("iteration %d relchg %.3e", k + 1, rc)
        if best is None or rc < best[0]:
            best = (rc, pair, reduced, mon_red, diag)
        sigma = new_sigma
        if rc < config.epsilon:
            wall = time.perf_counter() - t0
            return QirkaResult(reduced, pair, trace, True, diag, mon_red, wall)
    wall = time.perf_counter() - t0
    _, pair, reduced, mon_red, diag = best
    return QirkaResult(reduced, pair, trace, False, diag, mon_red, wall)
