import numpy as np
import pytest

from seqmon.functionals import FunctionalKind


def random_spd(rng, p, scale=1.0):
    a = rng.standard_normal((p, p))
    return scale * (a @ a.T + p * np.eye(p))


FUNCTIONAL_CONFIGS = [
    ("mean_d1", FunctionalKind.mean(1)),
    ("mean_d2", FunctionalKind.mean(2)),
    ("mean_d3", FunctionalKind.mean(3)),
    ("var_d1", FunctionalKind.vech_variance(1)),
    ("var_d2", FunctionalKind.vech_variance(2)),
    ("var_d3", FunctionalKind.vech_variance(3)),
    ("quantile", FunctionalKind.quantile(0.35)),
    ("corr", FunctionalKind.correlation()),
]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240517)
