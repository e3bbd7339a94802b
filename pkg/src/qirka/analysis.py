"""Gramians, Hankel singular values, H2 norms and interpolation diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .errors import ContractError, InstabilityError, NumericalBreakdownError
from .model import StateSpaceModel

__all__ = [
    "GramianPair",
    "InterpolationDiagnostics",
    "lyapunov_solve",
    "gramians",
    "hankel_singular_values",
    "h2_norm",
    "h2_error",
    "error_system",
    "transmission_zeros",
    "interpolation_residuals",
    "psd_sqrt",
]


@dataclass(frozen=True)
class GramianPair:
    Wc: np.ndarray
    Wo: np.ndarray


@dataclass(frozen=True)
class InterpolationDiagnostics:
    poles: np.ndarray
    right: np.ndarray
    left: np.ndarray
    derivative: np.ndarray
    reliable: bool = True


def lyapunov_solve(A, Q) -> np.ndarray:
    """Solve ``A X + X A^T + Q = 0`` for Hurwitz ``A`` (Bartels-Stewart)."""
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    T, Z = spla.schur(A, output="real")
    diag = np.diag(T)
    if diag.size and np.max(diag) >= 0:
        raise InstabilityError(f"A is not Hurwitz (max Re eig = {np.max(diag):.3e})")
    # trsyl on the Schur factor: T Y + Y T^T = -Z^T Q Z
    F = -(Z.T @ Q @ Z)
    Y = spla.solve_sylvester(T, T.T, F)
    X = Z @ Y @ Z.T
    return 0.5 * (X + X.T)


def gramians(model: StateSpaceModel) -> GramianPair:
    A, B, C = model.A, model.B, model.C
    Wc = lyapunov_solve(A, B @ B.T)
    Wo = lyapunov_solve(A.T, C.T @ C)
    return GramianPair(Wc, Wo)


def psd_sqrt(W, clip: float = 1e-12) -> np.ndarray:
    """Symmetric square root; eigenvalues in ``[-clip * scale, 0)`` are set to zero."""
    W = 0.5 * (W + W.T)
    w, U = np.linalg.eigh(W)
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    if w.size and w.min() < -max(clip, 1e-10) * scale:
        raise NumericalBreakdownError(f"matrix is indefinite (eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (U * np.sqrt(w)) @ U.T


def hankel_singular_values(g: GramianPair) -> np.ndarray:
    """Nonincreasing square roots of ``eig(Wc^{1/2} Wo Wc^{1/2})``."""
    R = psd_sqrt(g.Wc)
    M = R @ g.Wo @ R
    ev = np.linalg.eigvalsh(0.5 * (M + M.T))
    ev = np.clip(ev, 0.0, None)
    return np.sqrt(ev)[::-1]


def h2_norm(model: StateSpaceModel) -> float:
    """H2 norm of the strictly proper part, ``sqrt(trace(C Wc C^T))``."""
    if not np.any(model.C) or not np.any(model.B):
        # still insist on stability, as the norm is otherwise undefined
        if model.spectral_abscissa() >= 0:
            raise InstabilityError("A is not Hurwitz")
        return 0.0
    Wc = lyapunov_solve(model.A, model.B @ model.B.T)
    val = float(np.trace(model.C @ Wc @ model.C.T))
    return float(np.sqrt(max(val, 0.0)))


def error_system(full: StateSpaceModel, reduced: StateSpaceModel, V=None) -> StateSpaceModel:
    """Realization of ``Xi_full - Xi_reduced`` with zero feed-through.

    Without ``V`` this is ``(diag(A, A_r), [B; B_r], [C, -C_r])``. With the
    trial basis ``V`` of a projected model (``C_r = C V``) the state is changed
    to ``(x - V x_r, x_r)``, giving ``A_e = [[A, A V - V A_r], [0, A_r]]``,
    ``B_e = [B - V B_r; B_r]``, ``C_e = [C, 0]``. Both realize the same
    transfer matrix, but the second carries the error explicitly instead of as
    a difference of two O(1) terms.
    """
    if full.D.shape != reduced.D.shape:
        raise ContractError("full and reduced models have different channel counts")
    if V is None:
        A = spla.block_diag(full.A, reduced.A)
        B = np.vstack([full.B, reduced.B])
        C = np.hstack([full.C, -reduced.C])
    else:
        V = np.asarray(V, dtype=float)
        if not np.array_equal(reduced.C, full.C @ V):
            raise ContractError("reduced C is not C V for the given basis")
        N, k = V.shape
        A = np.block([
            [full.A, full.A @ V - V @ reduced.A],
            [np.zeros((k, N)), reduced.A],
        ])
        B = np.vstack([full.B - V @ reduced.B, reduced.B])
        C = np.hstack([full.C, np.zeros_like(reduced.C)])
    return StateSpaceModel(A, B, C, np.zeros_like(full.D))


def h2_error(full: StateSpaceModel, reduced: StateSpaceModel, V=None):
    """Return ``(absolute, relative)`` H2 error; the reduced ``A`` must be Hurwitz.

    Pass the trial basis ``V`` for projected models; it removes the
    cancellation floor (about ``sqrt(eps)`` relative) of the block-diagonal
    error realization.
    """
    if not np.array_equal(full.D, reduced.D):
        raise ContractError("error system is strictly proper only when D_r = D")
    if reduced.spectral_abscissa() >= 0:
        raise InstabilityError("reduced model is not Hurwitz")
    err = h2_norm(error_system(full, reduced, V))
    ref = h2_norm(full)
    return err, (err / ref if ref > 0 else np.inf)


def transmission_zeros(model: StateSpaceModel) -> np.ndarray:
    """Eigenvalues of ``A - B D^{-1} C``."""
    D = model.D
    if np.linalg.cond(D) > 1e12:
        raise ContractError("transmission zeros need an invertible D")
    return spla.eigvals(model.A - model.B @ np.linalg.solve(D, model.C))


def _resolvent_pair(model, s):
    """``G(s) = C (sI-A)^{-1} B`` and ``G'(s) = -C (sI-A)^{-2} B``."""
    N = model.A.shape[0]
    lu = spla.lu_factor(s * np.eye(N) - model.A)
    X = spla.lu_solve(lu, model.B.astype(complex))
    X2 = spla.lu_solve(lu, X)
    return model.C @ X, -(model.C @ X2)


def interpolation_residuals(full: StateSpaceModel, reduced: StateSpaceModel) -> InterpolationDiagnostics:
    """Residuals of the first-order H2 interpolation conditions at ``-conj(lambda_i)``.

    Each reduced residue ``C_r v_i w_i^H B_r`` is replaced by its best rank-1
    factorization ``c_i b_i^H``. Nothing here asserts that the residuals vanish.
    """
    lam, W, Vr = spla.eig(reduced.A, left=True, right=True)
    reliable = True
    cond = np.linalg.cond(Vr)
    if not np.isfinite(cond) or cond > 1e10:
        reliable = False
    gaps = np.abs(lam[:, None] - lam[None, :]) + np.diag(np.full(lam.size, np.inf))
    if gaps.size and gaps.min() < 1e-8 * max(1.0, np.abs(lam).max()):
        reliable = False
    right, left, deriv = [], [], []
    for i, li in enumerate(lam):
        v = Vr[:, i]
        w = W[:, i]
        # normalize so that w^H v = 1
        w = w / np.conj(np.vdot(w, v))
        Res = np.outer(reduced.C @ v, np.conj(w) @ reduced.B)
        Uu, sv, Vh = np.linalg.svd(Res)
        c = Uu[:, 0] * np.sqrt(sv[0])
        b = np.conj(Vh[0]) * np.sqrt(sv[0])
        s = -np.conj(li)
        try:
            H, dH = _resolvent_pair(full, s)
            Hr, dHr = _resolvent_pair(reduced, s)
        except (np.linalg.LinAlgError, spla.LinAlgError):
            right.append(np.nan), left.append(np.nan), deriv.append(np.nan)
            reliable = False
            continue
        E, dE = H - Hr, dH - dHr
        right.append(np.linalg.norm(E @ b))
        left.append(np.linalg.norm(np.conj(c) @ E))
        deriv.append(abs(np.conj(c) @ dE @ b))
    return InterpolationDiagnostics(
        lam, np.array(right), np.array(left), np.array(deriv), reliable
    )
