import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from oracles import random_symmetric  # noqa: E402

from qirka import pr_from_template  # noqa: E402

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")


def random_pr_model(rng, n, m):
    """Random Hurwitz PR template model.

    ``2m`` random channels plus one isotropic damping channel per mode, scaled
    up until ``A`` is Hurwitz. All channels are kept, so the model is PR.
    """
    R = random_symmetric(rng, 2 * n, 0.5)
    B = np.hstack([rng.standard_normal((2 * n, 2 * m)), np.eye(2 * n)])
    scale = 1.0
    while True:
        B2 = B.copy()
        B2[:, 2 * m:] *= scale
        model = pr_from_template(R, B2)
        if model.hurwitz:
            return model
        scale *= 1.5


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
