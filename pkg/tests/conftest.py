import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bel import kernels  # noqa: E402
from bel.persistence import Barcode  # noqa: E402
from bel.profiles import Profile  # noqa: E402


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    return kernels.backends()[request.param]


def random_barcode(rng, max_bars=12, span=10.0, inf_prob=0.2):
    n = int(rng.integers(0, max_bars + 1))
    b = np.round(rng.uniform(0, span, n), 3)
    length = np.round(rng.exponential(1.5, n), 3) + 0.001
    d = np.where(rng.random(n) < inf_prob, np.inf, b + length)
    m = rng.integers(1, 4, n)
    return Barcode(b, d, m)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spline(rng) -> Profile:
    k = int(rng.integers(3, 7))
    rmax = float(rng.uniform(1.5, 4.0))
    r = np.concatenate([[1.0], np.sort(rng.uniform(1.0, rmax, k - 2)), [rmax]])
    r = np.unique(r)
    # non-decreasing positive curvature gives h''' >= 0
    q = np.sort(rng.uniform(0.2, 3.0, r.size))
    return Profile.from_curvature(r, q, a=float(rng.uniform(0.5, 4.0)))
