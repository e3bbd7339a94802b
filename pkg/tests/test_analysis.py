import numpy as np
import pytest
from conftest import random_pr_model
from hypothesis import given
from hypothesis import strategies as st
from oracles import h2_quadrature, lyapunov_kron, random_hurwitz, random_symmetric
from scipy.linalg import expm

from qirka import QirkaConfig, StateSpaceModel, jmat, pr_from_template, run
from qirka.analysis import (
    GramianPair,
    error_system,
    gramians,
    h2_error,
    h2_norm,
    hankel_singular_values,
    interpolation_residuals,
    lyapunov_solve,
    psd_sqrt,
    transmission_zeros,
)
from qirka.benchmarks import BKCConfig, ChainConfig, build_bkc, build_chain
from qirka.errors import ContractError, InstabilityError, NumericalBreakdownError
from qirka.projection import make_pair, project


def _diag_model(a, b, c):
    """Decoupled model with A = -diag(a), B = diag(b), C = diag(c), D = I."""
    return StateSpaceModel(-np.diag(a), np.diag(b), np.diag(c), np.eye(len(a)))


# Lyapunov


def test_lyapunov_identity():
    assert np.allclose(lyapunov_solve(-np.eye(3), np.eye(3)), 0.5 * np.eye(3))


def test_lyapunov_diagonal():
    X = lyapunov_solve(np.diag([-1.0, -2.0]), np.eye(2))
    assert np.allclose(X, np.diag([0.5, 0.25]))


def test_lyapunov_matches_kronecker(rng):
    A = random_hurwitz(rng, 6)
    Q = rng.standard_normal((6, 3))
    Q = Q @ Q.T
    X = lyapunov_solve(A, Q)
    assert np.max(np.abs(X - lyapunov_kron(A, Q))) <= 1e-9 * max(1.0, np.abs(X).max())


@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_lyapunov_residual_bound(N, seed):
    rng = np.random.default_rng(seed)
    A = random_hurwitz(rng, N)
    Q = random_symmetric(rng, N)
    X = lyapunov_solve(A, Q)
    res = np.linalg.norm(A @ X + X @ A.T + Q)
    assert res <= 1e-8 * (np.linalg.norm(A) * np.linalg.norm(X) + np.linalg.norm(Q))
    assert np.array_equal(X, X.T)


def test_lyapunov_rejects_unstable():
    with pytest.raises(InstabilityError):
        lyapunov_solve(np.diag([-1.0, 0.1]), np.eye(2))


# Gramians and Hankel singular values


def test_gramians_zero_input(rng):
    model = StateSpaceModel(random_hurwitz(rng, 4), np.zeros((4, 2)), rng.standard_normal((2, 4)), np.eye(2))
    assert not np.any(gramians(model).Wc)


def test_gramians_decoupled_blocks():
    a, b, c = np.array([1.0, 3.0]), np.array([2.0, 0.5]), np.array([1.5, 4.0])
    g = gramians(_diag_model(a, b, c))
    assert np.allclose(g.Wc, np.diag(b**2 / (2 * a)))
    assert np.allclose(g.Wo, np.diag(c**2 / (2 * a)))


def _isotropic_pr_model(rng, n, m):
    """PR template with ``B = S kron I2`` and ``R = K kron I2 + diagonal``.

    This class (which contains the chain benchmark) has eig(Wc) = eig(Wo).
    """
    R = np.kron(random_symmetric(rng, n, 0.5), np.eye(2)) + np.diag(rng.standard_normal(2 * n))
    S = rng.standard_normal((n, m))
    damping = 1.0
    while True:
        B = np.hstack([np.kron(S, np.eye(2)), damping * np.eye(2 * n)])
        model = pr_from_template(R, B)
        if model.hurwitz:
            return model
        damping *= 1.5


@given(st.integers(2, 6), st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_gramian_spectra_agree_for_isotropic_coupling(n, m, seed):
    model = _isotropic_pr_model(np.random.default_rng(seed), n, m)
    g = gramians(model)
    ec = np.sort(np.linalg.eigvalsh(g.Wc))
    eo = np.sort(np.linalg.eigvalsh(g.Wo))
    assert np.allclose(ec, eo, rtol=1e-6, atol=1e-12 * ec.max())


def test_gramian_spectra_generic_coupling_counterexample(rng):
    # with a generic (non-isotropic) B the two spectra differ, so the agreement
    # above is a property of the coupling class, not of PR alone
    model = random_pr_model(rng, 3, 1)
    g = gramians(model)
    ec = np.sort(np.linalg.eigvalsh(g.Wc))
    eo = np.sort(np.linalg.eigvalsh(g.Wo))
    assert np.max(np.abs(ec - eo) / eo.max()) > 1e-3


@pytest.mark.parametrize(
    "build",
    [
        lambda v: build_chain(ChainConfig(10, 2, v)),
        lambda v: build_bkc(BKCConfig(12, 2, v)),
    ],
    ids=["chain", "bkc"],
)
@pytest.mark.parametrize("variant", ["homogeneous", "heterogeneous"])
def test_benchmark_gramian_spectra_agree(build, variant):
    for model in build(variant):
        g = gramians(model)
        ec = np.sort(np.linalg.eigvalsh(g.Wc))
        eo = np.sort(np.linalg.eigvalsh(g.Wo))
        assert np.allclose(ec, eo, rtol=1e-6, atol=1e-12 * ec.max())


def test_hsv_identity():
    assert np.allclose(hankel_singular_values(GramianPair(np.eye(4), np.eye(4))), 1.0)


def test_hsv_closed_form():
    a, b, c = np.array([0.7, 2.0]), np.array([1.2, 0.3]), np.array([0.4, 5.0])
    hsv = hankel_singular_values(gramians(_diag_model(a, b, c)))
    ref = np.sort(np.abs(b * c) / (2 * a))[::-1]
    assert np.allclose(hsv, ref, rtol=1e-10, atol=0)
    assert np.all(np.diff(hsv) <= 0)


def test_hsv_symplectic_similarity_invariance(rng):
    model = random_pr_model(rng, 3, 1)
    H = random_symmetric(rng, 6, 0.2)
    T = expm(jmat(3) @ H)
    Ti = np.linalg.inv(T)
    moved = StateSpaceModel(T @ model.A @ Ti, T @ model.B, model.C @ Ti, model.D)
    h1 = hankel_singular_values(gramians(model))
    h2 = hankel_singular_values(gramians(moved))
    assert np.allclose(h1, h2, rtol=1e-8, atol=1e-8 * h1.max())


def test_psd_sqrt_rejects_indefinite():
    with pytest.raises(NumericalBreakdownError):
        psd_sqrt(np.diag([1.0, -0.5]))
    R = psd_sqrt(np.diag([4.0, -1e-14]))
    assert np.allclose(R, np.diag([2.0, 0.0]))


# H2 norm and error


def test_h2_zero_output(rng):
    model = StateSpaceModel(random_hurwitz(rng, 4), rng.standard_normal((4, 2)), np.zeros((2, 4)), np.eye(2))
    assert h2_norm(model) == 0.0


def test_h2_scalar_closed_form():
    a, b, c = 1.0, 1.0, 1.0
    model = StateSpaceModel(-a * np.eye(2), np.diag([b, 0.0]), np.diag([c, 0.0]), np.eye(2))
    assert h2_norm(model) == pytest.approx(abs(c * b) / np.sqrt(2 * a), rel=1e-14)


def test_h2_matches_quadrature(rng):
    for _ in range(3):
        model = random_pr_model(rng, 2, 1)
        ref = h2_quadrature(model.A, model.B, model.C)
        assert h2_norm(model) == pytest.approx(ref, rel=1e-4)


def test_h2_rejects_unstable():
    model = StateSpaceModel(np.eye(2), np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(InstabilityError):
        h2_norm(model)


def test_h2_error_identity_projection(rng):
    model = random_pr_model(rng, 3, 1)
    pair = make_pair(np.eye(6))
    red = project(model, pair)
    err, rel = h2_error(model, red, pair.V)
    assert err <= 1e-10 and rel <= 1e-10


def test_error_realizations_agree():
    full, ext = build_chain(ChainConfig(15, 2, "heterogeneous"))
    res = run(ext, QirkaConfig(r=4), monitor=full)
    e_block, _ = h2_error(ext, res.reduced)
    e_v, _ = h2_error(ext, res.reduced, res.pair.V)
    assert e_v == pytest.approx(e_block, rel=1e-6)
    Ee = error_system(ext, res.reduced, res.pair.V)
    assert not np.any(Ee.D)


def test_h2_error_contracts(rng):
    model = random_pr_model(rng, 2, 1)
    other_D = StateSpaceModel(model.A, model.B, model.C, 2 * model.D)
    with pytest.raises(ContractError):
        h2_error(model, other_D)
    unstable = StateSpaceModel(-model.A, model.B, model.C, model.D)
    with pytest.raises(InstabilityError):
        h2_error(model, unstable)


# transmission zeros


def test_zeros_without_feedback(rng):
    A = random_hurwitz(rng, 4)
    model = StateSpaceModel(A, np.zeros((4, 2)), rng.standard_normal((2, 4)), np.eye(2))
    assert np.allclose(np.sort_complex(transmission_zeros(model)), np.sort_complex(np.linalg.eigvals(A)))


def test_zeros_scalar():
    model = StateSpaceModel(-np.eye(2), np.eye(2), np.eye(2), np.eye(2))
    assert np.allclose(transmission_zeros(model), -2.0)


def test_zeros_mirror_poles(rng):
    for _ in range(5):
        model = random_pr_model(rng, 3, 1)
        z = np.sort_complex(transmission_zeros(model))
        mirrored = np.sort_complex(-np.conj(model.poles()))
        assert np.max(np.abs(z - mirrored)) <= 1e-8


def test_zeros_need_invertible_D(rng):
    model = StateSpaceModel(random_hurwitz(rng, 2), np.eye(2), np.eye(2), np.zeros((2, 2)))
    with pytest.raises(ContractError):
        transmission_zeros(model)


# interpolation diagnostics


def test_interpolation_identity_projection(rng):
    model = random_pr_model(rng, 2, 1)
    d = interpolation_residuals(model, model)
    assert max(d.right.max(), d.left.max(), d.derivative.max()) <= 1e-8


def test_interpolation_after_run_is_finite():
    full, ext = build_chain(ChainConfig(12, 2))
    res = run(ext, QirkaConfig(r=3), monitor=full)
    d = interpolation_residuals(ext, res.reduced)
    assert d.poles.size == 6
    assert np.all(np.isfinite(d.right)) and np.all(np.isfinite(d.left))
    assert np.all(d.right >= 0) and np.all(d.derivative >= 0)


def test_interpolation_unrelated_models(rng):
    full = random_pr_model(rng, 3, 1)
    other = random_pr_model(rng, 1, 1)
    small = StateSpaceModel(other.A, other.B[:, :2], other.C[:2], np.eye(2))
    big = StateSpaceModel(full.A, full.B[:, :2], full.C[:2], np.eye(2))
    d = interpolation_residuals(big, small)
    assert np.all(d.right > 0) and np.all(d.left > 0)
