"""Deterministic PR benchmark generators.

* ``build_chain``: low-channel oscillator chain with a full-port dilation
  (external channels plus one hidden damping channel per site).
* ``build_bkc``: bosonic Kitaev-chain-like lattice with anisotropic
  nearest-neighbour quadrature coupling ``[[0, beta], [alpha, 0]]``.
* ``build_bus``: ten-mode star ("bus") model, one damped main mode coupled
  to nine undamped ancillas.

Full-port models are built with the PR template, so every generator output
is PR up to roundoff. External models keep the first ``2m`` channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError
from .model import StateSpaceModel, pr_from_template

__all__ = [
    "ChainConfig",
    "BKCConfig",
    "BusConfig",
    "attachment_sites",
    "attachment_matrix",
    "build_chain",
    "build_bkc",
    "build_bus",
    "calibrate_site_scale",
    "BUS_OMEGA",
    "BUS_KAPPA",
]

VARIANTS = ("homogeneous", "heterogeneous")

BUS_OMEGA = (4.18, 3.28, 2.42, 2.28, 1.75, 1.61, 1.55, 1.40, 1.20)
BUS_KAPPA = (0.95, 0.78, 0.66, 0.58, 0.44, 0.31, 0.22, 0.14, 0.08)

# stability margins the defaults are calibrated against
CHAIN_MARGIN = {"homogeneous": -1e-1, "heterogeneous": -1e-2}
BKC_MARGIN = {"homogeneous": -1.25e-1, "heterogeneous": -1.5e-2}


def attachment_sites(n: int, m: int) -> list[int]:
    """0-based sites of the external channels: both endpoints, then interior sites.

    Interior channel ``j`` (``j = 1..m-2``) sits at 1-based site
    ``round(j n / (m - 1))``.
    """
    if m < 1:
        raise ConfigError("m must be >= 1")
    if m > n:
        raise ConfigError(f"cannot attach {m} channels to {n} sites")
    if m == 1:
        return [0]
    sites = [0, n - 1]
    for j in range(1, m - 1):
        s = int(round(j * n / (m - 1))) - 1
        s = min(max(s, 1), n - 2)
        while s in sites:
            s += 1
        sites.append(s)
    if len(set(sites)) != m or max(sites) >= n:
        raise ConfigError(f"cannot place {m} distinct channels on {n} sites")
    return sites


def attachment_matrix(n: int, m: int) -> np.ndarray:
    S = np.zeros((n, m))
    for ell, j in enumerate(attachment_sites(n, m)):
        S[j, ell] = 1.0
    return S


def _positive(name, values, size):
    v = np.asarray(values, dtype=float).ravel()
    if v.size != size:
        raise ConfigError(f"{name} must have {size} entries, got {v.size}")
    if not np.all(v > 0) or not np.all(np.isfinite(v)):
        raise ConfigError(f"all {name} entries must be positive")
    return v


def _dilate(R, S, kappa_ch, kappa_site):
    """Full-port model from energy matrix, attachment and damping vectors."""
    I2 = np.eye(2)
    B_ch = np.kron(S * np.sqrt(kappa_ch)[None, :], I2)
    B_site = np.kron(np.diag(np.sqrt(kappa_site)), I2)
    full = pr_from_template(R, np.hstack([B_ch, B_site]))
    return full, full.restrict_channels(S.shape[1])


def _check_hurwitz(full, what):
    margin = full.spectral_abscissa()
    if margin >= 0:
        raise ConfigError(f"{what}: A is not Hurwitz (max Re eig = {margin:.3e})")
    return margin


def _tridiag_R(diag_blocks, off_block):
    """Symmetric block tridiagonal ``R`` with ``off_block`` below the diagonal."""
    n = len(diag_blocks)
    R = np.zeros((2 * n, 2 * n))
    for j, blk in enumerate(diag_blocks):
        R[2 * j:2 * j + 2, 2 * j:2 * j + 2] = blk
    for j in range(n - 1):
        R[2 * j + 2:2 * j + 4, 2 * j:2 * j + 2] = off_block
        R[2 * j:2 * j + 2, 2 * j + 2:2 * j + 4] = off_block.T
    return R


def calibrate_site_scale(build, target: float, lo: float = 1e-4, hi: float = 10.0) -> float:
    """Find the scale ``c`` with ``build(c).spectral_abscissa() == target`` by bisection.

    ``build`` maps a site-damping scale to a full-port model; the abscissa must
    decrease through ``target`` on ``[lo, hi]``.
    """
    f = lambda c: build(c).spectral_abscissa() - target  # noqa: E731
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ConfigError(f"target margin {target} not bracketed on [{lo}, {hi}]")
    return float(brentq(f, lo, hi, xtol=1e-12, rtol=1e-10))


@dataclass(frozen=True)
class ChainConfig:
    """Oscillator chain; ``None`` fields take the variant defaults."""

    n: int
    m: int
    variant: str = "homogeneous"
    kappa_ch: tuple | None = None
    kappa_site: tuple | None = None
    attachment: np.ndarray | None = None
    omega: tuple | None = None
    coupling: float = 0.05

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.n < 1 or self.m < 1:
            raise ConfigError("n and m must be >= 1")
        if self.m > self.n:
            raise ConfigError("m must not exceed n")

    def resolved(self):
        n, m = self.n, self.m
        j = np.arange(1, n + 1)
        het = self.variant == "heterogeneous"
        omega = (
            np.asarray(self.omega, float) if self.omega is not None
            else (1.0 + 0.5 * j / n if het else np.ones(n))
        )
        kappa_site = (
            self.kappa_site if self.kappa_site is not None
            else (0.02 * (1 + j / n) if het else np.full(n, 0.2))
        )
        kappa_ch = self.kappa_ch if self.kappa_ch is not None else np.ones(m)
        S = (
            np.asarray(self.attachment, float) if self.attachment is not None
            else attachment_matrix(n, m)
        )
        if S.shape != (n, m) or np.any(np.all(S == 0, axis=0)):
            raise ConfigError("attachment must be n x m with nonzero columns")
        if omega.size != n:
            raise ConfigError("omega must have n entries")
        return (
            omega,
            _positive("kappa_site", kappa_site, n),
            _positive("kappa_ch", kappa_ch, m),
            S,
        )


def build_chain(config: ChainConfig):
    """Return ``(full_port, external)`` for the oscillator chain."""
    omega, kappa_site, kappa_ch, S = config.resolved()
    I2 = np.eye(2)
    R = _tridiag_R([w * I2 for w in omega], config.coupling * I2)
    full, ext = _dilate(R, S, kappa_ch, kappa_site)
    _check_hurwitz(full, "chain")
    return full, ext


@dataclass(frozen=True)
class BKCConfig:
    """Bosonic Kitaev chain.

    ``kappa_site=None`` means: the variant's damping profile scaled by
    bisection so that the spectral abscissa equals ``target_margin``
    (the variant default when that is also ``None``).
    """

    n: int
    m: int
    variant: str = "homogeneous"
    omega: tuple | None = None
    J_mag: float = 0.045
    lambda_mag: float = 0.05
    kappa_ch: tuple | None = None
    kappa_site: tuple | None = None
    target_margin: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.n < 2 or self.m < 1:
            raise ConfigError("BKC needs n >= 2 and m >= 1")
        if self.m > self.n:
            raise ConfigError(f"m = {self.m} exceeds n = {self.n}")
        if self.J_mag < 0 or self.lambda_mag < 0:
            raise ConfigError("|J| and |lambda| must be nonnegative")

    @property
    def alpha(self) -> float:
        return abs(self.lambda_mag) - abs(self.J_mag)

    @property
    def beta(self) -> float:
        return abs(self.lambda_mag) + abs(self.J_mag)

    @property
    def nearly_balanced(self) -> bool:
        return abs(self.alpha) <= 0.1 * self.beta

    def energy_matrix(self) -> np.ndarray:
        n = self.n
        j = np.arange(1, n + 1)
        if self.omega is not None:
            omega = np.asarray(self.omega, float)
            if omega.size != n:
                raise ConfigError("omega must have n entries")
        elif self.variant == "heterogeneous":
            omega = 1.0 + 0.5 * j / n
        else:
            omega = np.ones(n)
        R1 = np.array([[0.0, self.beta], [self.alpha, 0.0]])
        return _tridiag_R([w * np.eye(2) for w in omega], R1)

    def site_profile(self) -> np.ndarray:
        j = np.arange(1, self.n + 1)
        if self.variant == "heterogeneous":
            return 1.0 + j / self.n
        return np.ones(self.n)


def build_bkc(config: BKCConfig):
    """Return ``(full_port, external)`` for the BKC lattice."""
    n, m = config.n, config.m
    R = config.energy_matrix()
    S = attachment_matrix(n, m)
    kappa_ch = _positive(
        "kappa_ch", config.kappa_ch if config.kappa_ch is not None else np.ones(m), m
    )
    if config.kappa_site is not None:
        kappa_site = _positive("kappa_site", config.kappa_site, n)
    else:
        target = config.target_margin
        if target is None:
            target = BKC_MARGIN[config.variant]
        profile = config.site_profile()
        scale = calibrate_site_scale(
            lambda c: _dilate(R, S, kappa_ch, c * profile)[0], target
        )
        kappa_site = scale * profile
    full, ext = _dilate(R, S, kappa_ch, kappa_site)
    _check_hurwitz(full, "bkc")
    return full, ext


BUS_COUPLINGS = ("beam-splitter", "position")


@dataclass(frozen=True)
class BusConfig:
    """Star model parameters.

    ``coupling="beam-splitter"`` couples ancilla ``j`` through
    ``kappa_j (x_0 x_j + p_0 p_j)`` (passive exchange); ``"position"`` uses
    ``kappa_j x_0 x_j`` only.
    """

    gamma: float = 2.2
    omega0: float = 1.0
    omega_j: tuple = BUS_OMEGA
    kappa_j: tuple = BUS_KAPPA
    coupling: str = "beam-splitter"

    def __post_init__(self):
        if len(self.omega_j) != 9 or len(self.kappa_j) != 9:
            raise ConfigError("bus model needs nine ancilla frequencies and couplings")
        if not (self.gamma > 0 and self.omega0 > 0):
            raise ConfigError("gamma and omega0 must be positive")
        if min(self.omega_j) <= 0 or min(self.kappa_j) < 0:
            raise ConfigError("ancilla frequencies must be positive, couplings nonnegative")
        if self.coupling not in BUS_COUPLINGS:
            raise ConfigError(f"unknown bus coupling {self.coupling!r}")


def build_bus(config: BusConfig = BusConfig(), check_hurwitz: bool = True) -> StateSpaceModel:
    """Star-coupled model: main mode 0 (damped by the field) plus nine ancillas."""
    n = 10
    R = np.zeros((2 * n, 2 * n))
    R[0:2, 0:2] = config.omega0 * np.eye(2)
    for j, (w, k) in enumerate(zip(config.omega_j, config.kappa_j), start=1):
        R[2 * j:2 * j + 2, 2 * j:2 * j + 2] = w * np.eye(2)
        R[0, 2 * j] = R[2 * j, 0] = k
        if config.coupling == "beam-splitter":
            R[1, 2 * j + 1] = R[2 * j + 1, 1] = k
    B = np.zeros((2 * n, 2))
    B[0:2, 0:2] = np.sqrt(config.gamma) * np.eye(2)
    model = pr_from_template(R, B)
    if check_hurwitz:
        _check_hurwitz(model, "bus")
    return model
