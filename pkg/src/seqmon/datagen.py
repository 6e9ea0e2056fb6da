"""Reproducible generators for the simulation models.

Univariate mean-study models (standard normal innovations unless noted):

    M1  x_t = e_t
    M2  x_t = 0.1 x_{t-1} + e_t
    M3  x_t = e_t + 0.3 e_{t-1} - 0.1 e_{t-2}
    M4  x_t = 0.3 x_{t-1} + e_t,  e_t standard exponential (used raw)

Multivariate variance-study models (centered Gaussian innovations):

    V1  x_t = e_t                      (d = 2)
    V2  x_t = A1 x_{t-1} + e_t         (d = 2)
    V3  x_t = e_t + A2 e_{t-1} + A3 e_{t-2}   (d = 2)
    V4  x_t = A4 x_{t-1} + e_t         (d = 3)

Correlation-study models C1..C3 reuse the V1..V3 recursions with bivariate
unit-variance innovations whose correlation is 0.3 before the change row.

Alternatives are applied to a base draw that does not depend on them, so
rows before the change index are bit-identical across parameter values:
a mean shift adds mu to emitted rows from the change row on, a variance
inflation scales innovations by sqrt(1 + delta) from the change row on, and
the correlation switch replaces the innovation correlation with c2.

Recursive models burn in 500 pre-samples before emitting row 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K

__all__ = ["ModelSpec", "generate", "BURN_IN", "PRE_CHANGE_CORRELATION"]

BURN_IN = 500
PRE_CHANGE_CORRELATION = 0.3

_A1 = np.array([[0.2, 0.1], [0.1, 0.2]])
_A2 = np.array([[0.3, 0.1], [0.1, 0.3]])
_A3 = np.array([[0.1, 0.05], [0.05, 0.1]])
_A4 = np.array([[0.1, 0.05, 0.05], [0.05, 0.1, 0.05], [0.05, 0.05, 0.1]])

_MODEL_DIM = {
    "M1": 1, "M2": 1, "M3": 1, "M4": 1,
    "V1": 2, "V2": 2, "V3": 2, "V4": 3,
    "C1": 2, "C2": 2, "C3": 2,
}


@dataclass(frozen=True)
class ModelSpec:
    """A simulation model plus its alternative parameters.

    ``change_index`` is the 1-based emitted row from which the alternative
    applies; None (or zero-valued parameters) reproduces the null model.
    """

    model: str
    mu: float = 0.0
    delta: float = 0.0
    c2: float | None = None
    change_index: int | None = None

    def __post_init__(self):
        if self.model not in _MODEL_DIM:
            raise ValueError(f"unknown model {self.model!r}")
        if self.c2 is not None and not self.model.startswith("C"):
            raise ValueError("post-change correlation only applies to C models")
        if self.c2 is not None and not -1.0 < self.c2 < 1.0:
            raise ValueError("correlation must lie in (-1, 1)")
        if self.delta < 0:
            raise ValueError("variance inflation must be nonnegative")
        if self.change_index is not None and self.change_index < 1:
            raise ValueError("change index is 1-based")

    @property
    def d(self) -> int:
        return _MODEL_DIM[self.model]


def _needs_burn_in(model: str) -> bool:
    return model not in ("M1", "V1", "C1")


def generate(spec: ModelSpec, n: int, seed) -> np.ndarray:
    """Simulate n rows; bit-identical for equal (spec, n, seed)."""
    if n < 1:
        raise ValueError("need at least one row")
    rng = np.random.default_rng(seed)
    model = spec.model
    d = spec.d
    burn = BURN_IN if _needs_burn_in(model) else 0
    total = burn + n
    # innovation index of the first post-change row
    change = burn + spec.change_index - 1 if spec.change_index is not None else total

    if model == "M4":
        eps = rng.standard_exponential(total).reshape(-1, 1)
    else:
        eps = rng.standard_normal((total, d))

    if model.startswith("C"):
        c_pre = PRE_CHANGE_CORRELATION
        c_post = spec.c2 if spec.c2 is not None else c_pre
        mixed = np.empty_like(eps)
        mixed[:, 0] = eps[:, 0]
        mixed[:change, 1] = c_pre * eps[:change, 0] + math.sqrt(
            1.0 - c_pre * c_pre
        ) * eps[:change, 1]
        mixed[change:, 1] = c_post * eps[change:, 0] + math.sqrt(
            1.0 - c_post * c_post
        ) * eps[change:, 1]
        eps = mixed

    if spec.delta > 0:
        eps = eps.copy()
        eps[change:] *= math.sqrt(1.0 + spec.delta)

    if model in ("M1", "V1", "C1"):
        x = eps
    elif model == "M2":
        x = K.ar_filter(eps, np.array([[0.1]]))
    elif model == "M4":
        x = K.ar_filter(eps, np.array([[0.3]]))
    elif model == "M3":
        x = K.ma_filter(eps, np.array([[0.3]]), np.array([[-0.1]]))
    elif model in ("V2", "C2"):
        x = K.ar_filter(eps, _A1)
    elif model in ("V3", "C3"):
        x = K.ma_filter(eps, _A2, _A3)
    else:  # V4
        x = K.ar_filter(eps, _A4)

    out = np.ascontiguousarray(x[burn:])
    if spec.mu != 0.0 and spec.change_index is not None:
        out = out.copy()
        out[spec.change_index - 1 :] += spec.mu
    return out
