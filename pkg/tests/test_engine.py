import logging

import numpy as np
import pytest
from conftest import random_pr_model
from hypothesis import given
from hypothesis import strategies as st

from qirka import QirkaConfig, StateSpaceModel, pr_from_template, run
from qirka.analysis import h2_error
from qirka.benchmarks import ChainConfig, build_chain
from qirka.engine import (
    candidate_pool,
    canonical_order,
    initial_shifts,
    log_grid,
    relative_change,
    select_shifts,
    tangential_directions,
)
from qirka.errors import (
    ConfigError,
    ContractError,
    InsufficientPoolError,
    ShiftCollisionError,
)


@pytest.fixture(scope="module")
def chain_small():
    return build_chain(ChainConfig(20, 2))


# configuration


@pytest.mark.parametrize(
    "kw",
    [
        {"r": 0},
        {"r": 2, "L": 0},
        {"r": 2, "epsilon": 0.0},
        {"r": 2, "max_iter": 0},
        {"r": 2, "tau": -1.0},
        {"r": 2, "init_strategy": "random"},
        {"r": 2, "init_strategy": "user-provided", "initial_shifts": (1.0,)},
    ],
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        QirkaConfig(**kw)


def test_config_defaults():
    c = QirkaConfig(r=4)
    assert (c.per_shift, c.epsilon, c.max_iter, c.tau) == (4, 1e-6, 100, 1e-12)


# tangential directions


def test_directions_m1_L2():
    assert np.array_equal(tangential_directions(1, 2), np.eye(2))


def test_directions_wrap():
    T = tangential_directions(1, 3)
    assert np.array_equal(T, np.eye(2)[:, [0, 1, 0]])


def test_directions_exhaust():
    assert np.array_equal(tangential_directions(2, 4), np.eye(4))


@given(st.integers(1, 5), st.integers(1, 20))
def test_directions_cyclic(m, L):
    T = tangential_directions(m, L)
    for ell in range(1, L + 1):
        nu = 1 + ((ell - 1) % (2 * m))
        assert np.array_equal(T[:, ell - 1], np.eye(2 * m)[:, nu - 1])


# candidate pool


def test_pool_real_shift():
    model = StateSpaceModel(-np.eye(2), np.eye(2), np.eye(2), np.eye(2))
    pool = candidate_pool(model, [1.0], np.array([[1.0], [0.0]]))
    assert np.allclose(pool.columns[:, 0], [-0.5, 0.0])
    assert pool.provenance == ((0, 0, "real"),)


def test_pool_complex_shift_spans_conjugate_pair(rng):
    model = random_pr_model(rng, 3, 1)
    t = tangential_directions(model.m, 1)
    pool = candidate_pool(model, [1j], t)
    z = np.linalg.solve(model.A - 1j * np.eye(6), model.B @ t[:, 0])
    assert pool.columns.dtype == float
    assert np.allclose(pool.columns[:, 0], z.real) and np.allclose(pool.columns[:, 1], z.imag)
    assert [p[2] for p in pool.provenance] == ["re", "im"]


def test_pool_order_shift_major(rng):
    model = random_pr_model(rng, 3, 1)
    pool = candidate_pool(model, [0.5, 1 + 1j], tangential_directions(model.m, 2))
    assert [p[:2] for p in pool.provenance] == [(0, 0), (0, 1), (1, 0), (1, 0), (1, 1), (1, 1)]


def test_pool_empty_directions(rng):
    model = random_pr_model(rng, 2, 1)
    pool = candidate_pool(model, [1.0], np.zeros((model.B.shape[1], 0)))
    assert len(pool) == 0


def test_pool_collision():
    model = StateSpaceModel(-np.eye(2), np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(ShiftCollisionError) as exc:
        candidate_pool(model, [-1.0], np.eye(2))
    assert exc.value.shift == -1.0


# shift selection


def _blocks(*eigs):
    A = np.zeros((2 * len(eigs), 2 * len(eigs)))
    for j, lam in enumerate(eigs):
        A[2 * j:2 * j + 2, 2 * j:2 * j + 2] = [[lam.real, lam.imag], [-lam.imag, lam.real]]
    return A


def test_select_shifts_hand_computed():
    sigma = select_shifts(_blocks(-3 + 4j, -1 + 2j))
    assert np.allclose(sigma, [1 + 2j, 3 + 4j])


def test_select_shifts_double_real():
    assert np.allclose(select_shifts(-np.eye(2)), [1.0])


@given(st.integers(0, 2**32 - 1))
def test_select_shifts_mirror_hurwitz(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((6, 6))
    A = X - (np.max(np.linalg.eigvals(X).real) + 0.1) * np.eye(6)
    sigma = select_shifts(A)
    assert sigma.size == 3
    assert np.all(sigma.real > 0) and np.all(sigma.imag >= 0)
    assert np.array_equal(sigma, canonical_order(sigma))


def test_select_shifts_reflects_unstable():
    sigma = select_shifts(_blocks(0.5 + 1j))
    assert sigma[0].real > 0


def test_select_shifts_rejects_odd():
    with pytest.raises(ContractError):
        select_shifts(np.eye(3))


def test_canonical_order():
    s = canonical_order([2 + 1j, 1 + 1j, 5 + 0j])
    assert list(s) == [5, 1 + 1j, 2 + 1j]


# relative change


def test_relchg_values():
    assert relative_change([1 + 1j], [1 + 1j]) == 0.0
    assert relative_change([1.0], [0.0]) == 1.0
    assert relative_change([3 + 4j + 0.05], [3 + 4j]) == pytest.approx(0.01)
    with pytest.raises(ContractError):
        relative_change([1.0, 2.0], [1.0])


# initial shifts


def test_log_grid():
    assert np.allclose(log_grid(0.1, 10, 3), [0.1, 1.0, 10.0])
    assert np.allclose(log_grid(0.1, 10, 1), [1.0])


def test_initial_shifts_bounds(rng):
    model = random_pr_model(rng, 3, 1)
    g = np.linalg.norm(model.A, np.inf)
    s = initial_shifts(model, 4)
    assert s.real.min() == pytest.approx(max(1e-3, 0.01 * g))
    assert s.real.max() == pytest.approx(10 * g)
    assert np.all(s.imag == 0)


def test_initial_shifts_user_ordering(rng):
    model = random_pr_model(rng, 3, 1)
    s = initial_shifts(model, 3, "user-provided", [2 + 1j, 1 + 3j, 0.5])
    assert list(s) == [0.5, 2 + 1j, 1 + 3j]


# driver


def test_run_chain_converges_with_small_defects(chain_small):
    full, ext = chain_small
    res = run(ext, QirkaConfig(r=6), monitor=full)
    assert res.converged
    for rec in res.trace:
        assert max(rec.symp, rec.left, rec.pr1, rec.pr2) <= 1e-10
        assert rec.relchg >= 0
        assert rec.poles.size == 12
    assert np.array_equal(res.reduced.D, ext.D)
    assert res.reduced.hurwitz
    red, pair, trace = res
    assert red is res.reduced and trace is res.trace


def test_run_deterministic(chain_small):
    full, ext = chain_small
    a = run(ext, QirkaConfig(r=4), monitor=full)
    b = run(ext, QirkaConfig(r=4), monitor=full)
    assert np.array_equal(a.reduced.A, b.reduced.A)
    assert [t.relchg for t in a.trace] == [t.relchg for t in b.trace]


def test_run_single_iteration_with_huge_epsilon(chain_small):
    full, ext = chain_small
    res = run(ext, QirkaConfig(r=3, epsilon=1e99), monitor=full)
    assert res.iterations == 1 and res.converged


def test_run_nonconvergence_returns_best(chain_small):
    full, ext = chain_small
    res = run(ext, QirkaConfig(r=6, max_iter=2, epsilon=1e-300), monitor=full)
    assert not res.converged
    assert len(res.trace) == 2
    best = min(res.trace, key=lambda t: t.relchg)
    assert np.allclose(np.sort_complex(np.linalg.eigvals(res.reduced.A)), np.sort_complex(best.poles))


def test_run_exact_at_full_order(rng):
    model = random_pr_model(rng, 3, 1)
    res = run(model, QirkaConfig(r=3, max_iter=3))
    _, rel = h2_error(model, res.reduced, res.pair.V)
    assert rel <= 1e-8


def test_run_insufficient_pool():
    # one input channel touching only the first mode of two decoupled modes
    R = np.eye(4)
    B = np.zeros((4, 2))
    B[:2, :2] = np.eye(2)
    model = pr_from_template(R, B)
    with pytest.raises(InsufficientPoolError):
        run(model, QirkaConfig(r=2, max_iter=2))


def test_run_warns_on_non_pr_input(rng, caplog):
    model = random_pr_model(rng, 3, 1)
    bad = StateSpaceModel(model.A, model.B, model.C + 0.1, model.D)
    with caplog.at_level(logging.WARNING, logger="qirka.engine"):
        run(bad, QirkaConfig(r=2, max_iter=2))
    assert "not PR" in caplog.text


def test_run_rejects_foreign_monitor(chain_small, rng):
    full, ext = chain_small
    other = random_pr_model(rng, 20, 1)
    with pytest.raises(ContractError):
        run(ext, QirkaConfig(r=2), monitor=other)


def test_run_retries_shift_collision(caplog):
    # R = 0, B = sqrt(2) I gives A = -I, so the shift -1 sits on the pole
    model = pr_from_template(np.zeros((2, 2)), np.sqrt(2) * np.eye(2))
    assert np.allclose(model.A, -np.eye(2))
    cfg = QirkaConfig(r=1, init_strategy="user-provided", initial_shifts=(-1.0,), max_iter=3)
    with caplog.at_level(logging.WARNING, logger="qirka.engine"):
        res = run(model, cfg)
    assert "collides" in caplog.text
    assert res.iterations >= 1
