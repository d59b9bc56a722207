"""Time propagation of two-spin states: matrix-exponential propagation of the
full decoherence generator, and the closed-form decay of the zero- and
double-quantum coherence states.  The two routes must agree and their mutual
consistency is a core test surface.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import NoiseParams, devectorize, full_generator, vectorize
from .states import coherence_state, validate_density_matrix

# Pade-13 numerator coefficients for the scaling-and-squaring exponential.
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_PADE13_THETA = 5.371920351148152


def matrix_exp(m: np.ndarray) -> np.ndarray:
    """Dense matrix exponential by Pade-13 scaling and squaring."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix_exp requires a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix_exp requires finite entries")
    norm = np.linalg.norm(m, 1)
    squarings = 0
    if norm > _PADE13_THETA:
        squarings = int(np.ceil(np.log2(norm / _PADE13_THETA)))
        m = m / (2.0**squarings)
    b = _PADE13
    eye = np.eye(m.shape[0], dtype=complex)
    m2 = m @ m
    m4 = m2 @ m2
    m6 = m2 @ m4
    u = m @ (m6 @ (b[13] * m6 + b[11] * m4 + b[9] * m2) + b[7] * m6 + b[5] * m4 + b[3] * m2 + b[1] * eye)
    v = m6 @ (b[12] * m6 + b[10] * m4 + b[8] * m2) + b[6] * m6 + b[4] * m4 + b[2] * m2 + b[0] * eye
    out = np.linalg.solve(v - u, v + u)
    for _ in range(squarings):
        out = out @ out
    return out


@dataclass(frozen=True)
class Propagator:
    """exp(Z t) for the full generator at the given parameters."""

    superop: np.ndarray
    t: float
    params: NoiseParams


# lru_cache is safe for concurrent readers/writers; entries are frozen.
@lru_cache(maxsize=512)
def _propagator_matrix(params: NoiseParams, t: float) -> np.ndarray:
    mat = matrix_exp(full_generator(params) * t)
    mat.flags.writeable = False
    return mat


def propagator(params: NoiseParams, t: float) -> Propagator:
    """Build (and cache) the propagator for the given rates and time."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return Propagator(_propagator_matrix(params, float(t)), float(t), params)


def propagate(rho0: np.ndarray, params: NoiseParams, t: float) -> np.ndarray:
    """Evolve rho0 for time t under the full decoherence generator."""
    rho0 = validate_density_matrix(rho0)
    prop = propagator(params, t)
    return validate_density_matrix(devectorize(prop.superop @ vectorize(rho0)))


@dataclass(frozen=True)
class AnalyticDecayState:
    """Diagonal values and symmetric off-diagonal values of a decayed state.

    The betas are ordered (0,1), (0,2), (0,3), (1,2), (1,3), (2,3); the
    assembled matrix is real symmetric.
    """

    alpha: tuple[float, float, float, float]
    beta: tuple[float, float, float, float, float, float]
    t: float

    _BETA_INDEX = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

    def to_matrix(self) -> np.ndarray:
        rho = np.diag(np.asarray(self.alpha, dtype=complex))
        for value, (r, s) in zip(self.beta, self._BETA_INDEX):
            rho[r, s] = value
            rho[s, r] = value
        return rho


def coherence_decay_rate(kind: str, params: NoiseParams) -> float:
    """Decay rate (1/s) of the ZQ or DQ coherence element under the full generator."""
    base = params.gamma1 + params.gamma2 + 0.5 * (params.Gamma1 + params.Gamma2)
    if kind == "ZQ":
        return base - params.gamma3
    if kind == "DQ":
        return base + params.gamma3
    raise ValueError(f"kind must be 'ZQ' or 'DQ', got {kind!r}")


def _population_relaxation(params: NoiseParams, t: float, inner_start: bool) -> tuple[float, float]:
    """Populations of (outer, inner) basis-state pairs at time t.

    inner_start selects the initial condition: the ZQ state populates the
    inner pair |01>,|10>; the DQ state populates the outer pair |00>,|11>.
    """
    relax = np.exp(-t * (params.Gamma1 + params.Gamma2))
    if inner_start:
        return 0.25 * (1.0 - relax), 0.25 * (1.0 + relax)
    return 0.25 * (1.0 + relax), 0.25 * (1.0 - relax)


def analytic_zq_state(params: NoiseParams, t: float) -> np.ndarray:
    """Closed-form state at time t starting from the ZQ coherence state."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    outer, inner = _population_relaxation(params, t, inner_start=True)
    zq_element = 0.5 * np.exp(-t * coherence_decay_rate("ZQ", params))
    state = AnalyticDecayState(
        alpha=(outer, inner, inner, outer),
        beta=(0.0, 0.0, 0.0, zq_element, 0.0, 0.0),
        t=float(t),
    )
    return state.to_matrix()


def analytic_dq_state(params: NoiseParams, t: float) -> np.ndarray:
    """Closed-form state at time t starting from the DQ coherence state."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    outer, inner = _population_relaxation(params, t, inner_start=False)
    dq_element = 0.5 * np.exp(-t * coherence_decay_rate("DQ", params))
    state = AnalyticDecayState(
        alpha=(outer, inner, inner, outer),
        beta=(0.0, 0.0, dq_element, 0.0, 0.0, 0.0),
        t=float(t),
    )
    return state.to_matrix()


def analytic_state(kind: str, params: NoiseParams, t: float) -> np.ndarray:
    """Closed-form decayed state for kind 'ZQ' or 'DQ'."""
    if kind == "ZQ":
        return analytic_zq_state(params, t)
    if kind == "DQ":
        return analytic_dq_state(params, t)
    raise ValueError(f"kind must be 'ZQ' or 'DQ', got {kind!r}")


def initial_coherence_state(kind: str) -> np.ndarray:
    """Initial state whose decay the analytic forms describe."""
    return coherence_state(kind)


def default_time_grid(start: float = 1e-3, stop: float = 10.0, points: int = 64) -> np.ndarray:
    """Log-spaced sweep grid with a leading t = 0 sample."""
    if start <= 0 or stop <= start or points < 2:
        raise ValueError("need 0 < start < stop and at least 2 points")
    return np.concatenate(([0.0], np.geomspace(start, stop, points)))
