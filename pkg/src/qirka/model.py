"""Canonical symplectic structures and physically realizable state-space models.

Everything lives in real quadrature coordinates ``(x_1, p_1, ..., x_n, p_n)``.
A model has ``2n`` states and ``2m`` input/output quadratures.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as spla

from .errors import ContractError, DimensionError, NearPoleError

__all__ = [
    "CanonicalStructure",
    "StateSpaceModel",
    "PRResiduals",
    "canonical_matrix",
    "jmat",
    "pr_residuals",
    "pr_from_template",
    "transfer_eval",
]

_J2 = np.array([[0, 1], [-1, 0]], dtype=float)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CanonicalStructure:
    """The canonical symplectic matrix ``J_k = I_k kron [[0, 1], [-1, 0]]``."""

    k: int
    J: np.ndarray = field(repr=False)

    def __array__(self, dtype=None, copy=None):
        return self.J if dtype is None else self.J.astype(dtype)


@lru_cache(maxsize=64)
def _canonical(k):
    return CanonicalStructure(k, _frozen(np.kron(np.eye(k), _J2)))


def canonical_matrix(k: int) -> CanonicalStructure:
    """Return ``J_k``; entries are exactly -1, 0 or 1."""
    if int(k) != k or k < 1:
        raise DimensionError(f"canonical_matrix needs k >= 1, got {k}")
    return _canonical(int(k))


def jmat(k: int) -> np.ndarray:
    """Shorthand for ``canonical_matrix(k).J`` (read-only array)."""
    return canonical_matrix(k).J


@dataclass(frozen=True)
class StateSpaceModel:
    """Real quadruple ``(A, B, C, D)`` with ``A`` of size 2n x 2n and ``D`` of size 2m x 2m.

    Arrays are copied and made read-only on construction.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        for name in "ABCD":
            a = getattr(self, name)
            if np.iscomplexobj(a):
                raise DimensionError(f"{name} must be real")
            object.__setattr__(self, name, _frozen(a))
        A, B, C, D = self.A, self.B, self.C, self.D
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2 or A.shape[0] == 0:
            raise DimensionError(f"A must be square of even size, got {A.shape}")
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] % 2 or D.shape[0] == 0:
            raise DimensionError(f"D must be square of even size, got {D.shape}")
        N, P = A.shape[0], D.shape[0]
        if B.shape != (N, P):
            raise DimensionError(f"B has shape {B.shape}, expected {(N, P)}")
        if C.shape != (P, N):
            raise DimensionError(f"C has shape {C.shape}, expected {(P, N)}")

    @property
    def n(self) -> int:
        return self.A.shape[0] // 2

    @property
    def m(self) -> int:
        return self.D.shape[0] // 2

    def poles(self) -> np.ndarray:
        return spla.eigvals(self.A)

    def spectral_abscissa(self) -> float:
        """Largest real part of spec(A), from a full eigensolve."""
        return float(np.max(self.poles().real))

    @property
    def hurwitz(self) -> bool:
        return self.spectral_abscissa() < 0

    def restrict_channels(self, m: int) -> "StateSpaceModel":
        """Keep the first ``2m`` input and output quadratures (same ``A``)."""
        if not 1 <= m <= self.m:
            raise DimensionError(f"cannot restrict {self.m} channels to {m}")
        k = 2 * m
        return StateSpaceModel(self.A, self.B[:, :k], self.C[:k, :], self.D[:k, :k])


@dataclass(frozen=True)
class PRResiduals:
    r1: np.ndarray
    r2: np.ndarray
    r3: np.ndarray

    @property
    def r1_norm(self) -> float:
        return float(np.linalg.norm(self.r1))

    @property
    def r2_norm(self) -> float:
        return float(np.linalg.norm(self.r2))

    @property
    def r3_norm(self) -> float:
        return float(np.linalg.norm(self.r3))

    def norms(self) -> tuple[float, float, float]:
        return self.r1_norm, self.r2_norm, self.r3_norm


def pr_residuals(model: StateSpaceModel) -> PRResiduals:
    """Residuals of the three physical-realizability identities.

    ``r1 = A Jn + Jn A^T + B Jm B^T``, ``r2 = Jn C^T + B Jm D^T`` and
    ``r3 = D Jm D^T - Jm``. The model is PR iff all three vanish.
    """
    A, B, C, D = model.A, model.B, model.C, model.D
    Jn, Jm = jmat(model.n), jmat(model.m)
    r1 = A @ Jn + Jn @ A.T + B @ Jm @ B.T
    r2 = Jn @ C.T + B @ Jm @ D.T
    r3 = D @ Jm @ D.T - Jm
    return PRResiduals(r1, r2, r3)


def pr_from_template(R, B) -> StateSpaceModel:
    """Build a PR model from a symmetric energy matrix ``R`` and coupling ``B``.

    ``A = Jn R + 1/2 B Jm B^T Jn``, ``C = Jm B^T Jn``, ``D = I``.
    """
    R = np.asarray(R, dtype=float)
    B = np.asarray(B, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] % 2:
        raise DimensionError(f"R must be square of even size, got {R.shape}")
    if B.ndim != 2 or B.shape[0] != R.shape[0] or B.shape[1] % 2 or B.shape[1] == 0:
        raise DimensionError(f"B has shape {B.shape}, incompatible with R {R.shape}")
    if not np.array_equal(R, R.T):
        raise ContractError("R must be exactly symmetric")
    n, m = R.shape[0] // 2, B.shape[1] // 2
    Jn, Jm = jmat(n), jmat(m)
    A = Jn @ R + 0.5 * (B @ Jm @ B.T) @ Jn
    C = Jm @ B.T @ Jn
    return StateSpaceModel(A, B, C, np.eye(2 * m))


def transfer_eval(model: StateSpaceModel, s: complex) -> np.ndarray:
    """Evaluate ``C (sI - A)^{-1} B + D`` with one LU factorization."""
    A = model.A
    N = A.shape[0]
    M = s * np.eye(N) - A
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spla.LinAlgWarning)
        lu, piv = spla.lu_factor(M, check_finite=False)
    scale = max(1.0, np.linalg.norm(A, 1), abs(s))
    if np.min(np.abs(np.diag(lu))) <= 1e-12 * scale:
        raise NearPoleError(f"s = {s} is numerically a pole of the model")
    X = spla.lu_solve((lu, piv), model.B.astype(M.dtype), check_finite=False)
    return model.C @ X + model.D
