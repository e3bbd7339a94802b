"""Symplectic trial/test bases and PR-preserving Petrov-Galerkin projection.

The pipeline is::

    pool --symplectic_gram_schmidt--> W --pairing--> S
         --symplectic_normalize--> V --test_basis--> U --project--> (A_r, B_r, C_r, D)

``V^T Jn V = Jr`` and ``U = Jr^{-1} V^T Jn`` together make every PR
identity survive the projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .errors import (
    DegeneratePairingError,
    DimensionError,
    InsufficientPoolError,
    NonSymplecticBasisError,
)
from .model import CanonicalStructure, StateSpaceModel, jmat, pr_residuals

__all__ = [
    "CandidatePool",
    "PairingMatrix",
    "ProjectionPair",
    "StructuralDiagnostics",
    "symplectic_gram_schmidt",
    "pairing",
    "symplectic_normalize",
    "test_basis",
    "make_pair",
    "project",
    "structural_diagnostics",
    "symplectic_basis",
]

DEFAULT_TAU = 1e-12
RANK_TOL = 1e-10


def _J(J) -> np.ndarray:
    if isinstance(J, CanonicalStructure):
        return J.J
    if isinstance(J, (int, np.integer)):
        return jmat(int(J))
    return np.asarray(J, dtype=float)


@dataclass(frozen=True)
class CandidatePool:
    """Ordered real candidate vectors (columns) with ``(shift, direction, part)`` tags.

    ``part`` is ``"real"`` for a real shift, otherwise ``"re"`` / ``"im"``.
    """

    columns: np.ndarray
    provenance: tuple = ()

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=float)
        if cols.ndim != 2:
            raise DimensionError("pool columns must form a 2-D array")
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        if self.provenance and len(self.provenance) != cols.shape[1]:
            raise DimensionError("one provenance tag per column is required")

    def __len__(self):
        return self.columns.shape[1]

    @classmethod
    def from_matrix(cls, M):
        M = np.asarray(M, dtype=float)
        return cls(M, tuple((0, j, "real") for j in range(M.shape[1])))


@dataclass(frozen=True)
class PairingMatrix:
    """Skew pairing ``S = W^T Jn W`` and its real Schur data.

    ``Q^T S Q = blockdiag([[0, a_j], [-a_j, 0]])`` with every ``a_j > 0``.
    """

    S: np.ndarray
    Q: np.ndarray = field(repr=False)
    schur_blocks: np.ndarray


@dataclass(frozen=True)
class ProjectionPair:
    V: np.ndarray
    U: np.ndarray
    r: int
    symp_defect: float
    left_defect: float
    identity_defect: float


@dataclass(frozen=True)
class StructuralDiagnostics:
    symp: float
    left: float
    pr1: float
    pr2: float
    pr3: float

    def max_defect(self) -> float:
        return max(self.symp, self.left, self.pr1, self.pr2, self.pr3)


def _j_project(W, S, Jn, x):
    """Remove from ``x`` its component along span(W) in the Jn pairing."""
    if W.shape[1] == 0:
        return x.copy()
    try:
        coeffs = np.linalg.solve(S, W.T @ (Jn @ x))
    except np.linalg.LinAlgError:
        raise DegeneratePairingError("accumulated pairing matrix became singular") from None
    return x - W @ coeffs


def symplectic_gram_schmidt(pool, J_n, r: int, tau: float = DEFAULT_TAU) -> np.ndarray:
    """Extract ``2r`` columns ``[v_1, Jn^T v_1, ..., v_r, Jn^T v_r]`` from ``pool``.

    Candidates are visited in pool order. Each one is stripped of its
    Jn-pairing component along the accepted columns; if the remainder has
    2-norm at most ``tau`` it is dropped, otherwise it is normalized and
    appended together with its symplectic conjugate. The new pair then gets
    exactly one more projection pass and is renormalized.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if r < 1:
        raise DimensionError("r must be >= 1")
    cols = pool.columns if isinstance(pool, CandidatePool) else np.asarray(pool, float)
    Jn = _J(J_n)
    N = Jn.shape[0]
    if cols.shape[0] != N:
        raise DimensionError(f"pool vectors have length {cols.shape[0]}, expected {N}")
    W = np.empty((N, 0))
    S = np.empty((0, 0))
    for j in range(cols.shape[1]):
        w_hat = _j_project(W, S, Jn, cols[:, j])
        nrm = np.linalg.norm(w_hat)
        if nrm <= tau:
            continue
        v = w_hat / nrm
        u = Jn.T @ v
        # single re-orthogonalization pass on the new pair
        v = _j_project(W, S, Jn, v)
        v /= np.linalg.norm(v)
        u = _j_project(W, S, Jn, u)
        u /= np.linalg.norm(u)
        W = np.column_stack([W, v, u])
        S = W.T @ Jn @ W
        if W.shape[1] == 2 * r:
            return W
    raise InsufficientPoolError(
        f"candidate pool furnished only {W.shape[1]} of {2 * r} columns; "
        "increase the enrichment parameter L",
        achieved=W.shape[1],
    )


def pairing(W, J_n) -> PairingMatrix:
    """Form ``S = W^T Jn W`` (antisymmetrized) and its sign-fixed skew Schur form."""
    W = np.asarray(W, dtype=float)
    Jn = _J(J_n)
    S = W.T @ Jn @ W
    S = 0.5 * (S - S.T)
    k = S.shape[0]
    if k % 2:
        raise DimensionError("pairing needs an even number of columns")
    T, Q = spla.schur(S, output="real")
    alphas = np.empty(k // 2)
    ok = True
    for j in range(k // 2):
        a, b = 2 * j, 2 * j + 1
        if b + 1 < k and abs(T[b + 1, b]) > 1e-8 * max(1.0, abs(T[a, b])):
            ok = False
            break
        if T[a, b] * T[b, a] >= 0:
            ok = False
            break
        alpha = 0.5 * (T[a, b] - T[b, a])
        if alpha < 0:
            Q[:, [a, b]] = Q[:, [b, a]]
            alpha = -alpha
        alphas[j] = alpha
    if not ok:
        # zero eigenvalues broke the 2x2 block layout; report the spectrum instead
        ev = np.sort(np.abs(np.linalg.eigvals(S).imag))[::2]
        alphas = ev
    return PairingMatrix(S, Q, alphas)


def symplectic_normalize(W, S: PairingMatrix):
    """Return ``(V, T)`` with ``T = Q blockdiag(a_j^{-1/2} I_2)`` and ``V = W T``."""
    alphas = np.asarray(S.schur_blocks)
    amax = float(np.max(alphas)) if alphas.size else 0.0
    amin = float(np.min(alphas)) if alphas.size else 0.0
    if amax <= 0 or amin <= RANK_TOL * amax or alphas.size * 2 != S.S.shape[0]:
        raise DegeneratePairingError(
            f"pairing matrix is rank deficient (smallest block {amin:.3e})", alpha_min=amin
        )
    scale = np.repeat(alphas ** -0.5, 2)
    T = S.Q * scale[None, :]
    V = np.asarray(W, dtype=float) @ T
    return V, T


def test_basis(V, J_n, J_r) -> np.ndarray:
    """``U = Jr^T V^T Jn``, the Petrov-Galerkin test basis (``Jr^{-1} = Jr^T``)."""
    V = np.asarray(V, dtype=float)
    Jn, Jr = _J(J_n), _J(J_r)
    defect = np.linalg.norm(V.T @ Jn @ V - Jr)
    if defect > 1e-8:
        raise NonSymplecticBasisError(f"V^T Jn V - Jr has norm {defect:.3e}")
    return Jr.T @ V.T @ Jn


test_basis.__test__ = False  # not a pytest test despite the name


def make_pair(V) -> ProjectionPair:
    """Wrap a symplectic ``V`` with its test basis and defect measurements.

    ``identity_defect`` measures ``V Jr = Jn U^T``, which follows from
    ``U = Jr^T V^T Jn`` and ``Jn^2 = -I``.
    """
    V = np.array(V, dtype=float)
    N, k = V.shape
    if N % 2 or k % 2:
        raise DimensionError(f"V must be 2n x 2r, got {V.shape}")
    n, r = N // 2, k // 2
    Jn, Jr = jmat(n), jmat(r)
    U = test_basis(V, Jn, Jr)
    V.setflags(write=False)
    U.setflags(write=False)
    return ProjectionPair(
        V,
        U,
        r,
        float(np.linalg.norm(V.T @ Jn @ V - Jr)),
        float(np.linalg.norm(U @ V - np.eye(k))),
        float(np.linalg.norm(V @ Jr - Jn @ U.T)),
    )


def project(model: StateSpaceModel, pair: ProjectionPair) -> StateSpaceModel:
    """Reduced model ``(U A V, U B, C V, D)``."""
    if pair.V.shape[0] != model.A.shape[0]:
        raise DimensionError("basis and model state dimensions differ")
    U, V = pair.U, pair.V
    return StateSpaceModel(U @ model.A @ V, U @ model.B, model.C @ V, model.D)


def structural_diagnostics(pair: ProjectionPair, reduced: StateSpaceModel) -> StructuralDiagnostics:
    res = pr_residuals(reduced)
    return StructuralDiagnostics(
        pair.symp_defect, pair.left_defect, res.r1_norm, res.r2_norm, res.r3_norm
    )


def symplectic_basis(pool, n: int, r: int, tau: float = DEFAULT_TAU) -> ProjectionPair:
    """Gram-Schmidt extraction, pairing, normalization and test basis in one call."""
    Jn = jmat(n)
    W = symplectic_gram_schmidt(pool, Jn, r, tau)
    V, _ = symplectic_normalize(W, pairing(W, Jn))
    return make_pair(V)
