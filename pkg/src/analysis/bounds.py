# src/analysis/bounds.py
"""
Overlap-sum security bounds for the nine-state fake-signal family.

An attacker who sends |Psi> = |0>|alpha> + |1>|beta> and later intercepts the
encoded particle must tell apart the nine states chi_k = (U_r sigma_p x I)|Psi>.
Everything here is a function of the Gram parameters (x, y, z, t):

    <alpha|beta>/sqrt2 = x + iy,  <alpha|alpha>/sqrt2 = z,  <beta|beta>/sqrt2 = t

with z, t > 0, z + t = 1/sqrt2 and x^2 + y^2 <= z t.
"""
import logging
from dataclasses import dataclass
from math import sqrt
from typing import Literal, Tuple

import numpy as np
from scipy.optimize import OptimizeResult, minimize

from src.config.settings import BOUNDS_TOL, DEFAULT_REFINEMENT, DEFAULT_RESOLUTION, MIN_RESOLUTION
from src.quantum.core import ALL_OPCODES, PureState, apply_op, make_pair
from src.reports.schema import BoundsReport
from src.utils.errors import ConfigurationError, FeasibilityError

logger = logging.getLogger(__name__)

Objective = Literal["s1", "s2"]

SQRT2 = sqrt(2)
HALF_NORM = 1 / SQRT2
EPR_Z = 1 / (2 * SQRT2)


@dataclass(frozen=True)
class GramParams:
    x: float
    y: float
    z: float
    t: float

    @classmethod
    def from_xyz(cls, x: float, y: float, z: float) -> "GramParams":
        return cls(float(x), float(y), float(z), HALF_NORM - float(z))

    @classmethod
    def epr(cls) -> "GramParams":
        return cls(0.0, 0.0, EPR_Z, EPR_Z)

    @property
    def gram(self) -> Tuple[float, complex, float]:
        """(<a|a>, <a|b>, <b|b>)."""
        return SQRT2 * self.z, SQRT2 * complex(self.x, self.y), SQRT2 * self.t

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x, self.y, self.z, self.t)


@dataclass(frozen=True)
class ChiFamily:
    params: GramParams
    overlap_matrix: np.ndarray


def is_feasible(params: GramParams, tol: float = BOUNDS_TOL) -> bool:
    p = params
    return (
        p.z > 0
        and p.t > 0
        and abs(p.z + p.t - HALF_NORM) <= tol
        and p.x ** 2 + p.y ** 2 <= p.z * p.t + tol
    )


def check_feasible(params: GramParams) -> GramParams:
    if not is_feasible(params):
        raise FeasibilityError(
            f"Gram parameters {params.as_tuple()} violate z,t > 0, z+t = 1/sqrt2 or x^2+y^2 <= zt."
        )
    return params


# --- Formal Gram algebra ---
# <chi_i|chi_j> = K00 <a|a> + K01 <a|b> + K10 <b|a> + K11 <b|b>, K = M_i^dag M_j.
def _coefficients() -> np.ndarray:
    mats = [op.matrix for op in ALL_OPCODES]
    coeff = np.empty((9, 9, 4), dtype=complex)
    for i, mi in enumerate(mats):
        for j, mj in enumerate(mats):
            k = mi.conj().T @ mj
            coeff[i, j] = (k[0, 0], k[0, 1], k[1, 0], k[1, 1])
    return coeff


_COEFF = _coefficients().reshape(81, 4)
_OFF_DIAGONAL = ~np.eye(9, dtype=bool).reshape(81)
# pauli class of chi index k (= rot*3 + pauli)
_CLASS = np.array([op.pauli for op in ALL_OPCODES])
_CROSS_CLASS = (_CLASS[:, None] != _CLASS[None, :]).reshape(81)
# eta = 1/9 per state, N = 9 states, 3 per class: sqrt((1/81) / 36)
CROSS_WEIGHT = 1 / 54


def _features(x, y, z, t) -> np.ndarray:
    """Stack (<a|a>, <a|b>, <b|a>, <b|b>) for broadcastable parameter arrays."""
    g = SQRT2 * (np.asarray(x) + 1j * np.asarray(y))
    return np.stack(
        np.broadcast_arrays(SQRT2 * np.asarray(z, dtype=complex), g, np.conj(g), SQRT2 * np.asarray(t, dtype=complex)),
        axis=-1,
    )


def _batch_abs_overlaps(x, y, z, t) -> np.ndarray:
    """|<chi_i|chi_j>| flattened to shape (..., 81)."""
    return np.abs(_features(x, y, z, t) @ _COEFF.T)


def chi_overlaps(params: GramParams) -> ChiFamily:
    check_feasible(params)
    matrix = (_features(*params.as_tuple()) @ _COEFF.T).reshape(9, 9)
    return ChiFamily(params=params, overlap_matrix=matrix)


# --- Realized vectors ---
def realize_vectors(params: GramParams) -> Tuple[np.ndarray, np.ndarray]:
    """Two-component alpha, beta reproducing the Gram matrix of `params`."""
    check_feasible(params)
    aa, ab, bb = params.gram
    root = sqrt(aa)
    alpha = np.array([root, 0], dtype=complex)
    beta = np.array([ab / root, sqrt(max(0.0, bb - abs(ab) ** 2 / aa))], dtype=complex)
    # renormalise away roundoff from t = 1/sqrt2 - z
    scale = sqrt(float(np.real(np.vdot(alpha, alpha) + np.vdot(beta, beta))))
    return alpha / scale, beta / scale


def chi_states(params: GramParams) -> Tuple[PureState, ...]:
    alpha, beta = realize_vectors(params)
    psi = make_pair(alpha, beta)
    return tuple(apply_op(op, psi) for op in ALL_OPCODES)


def realized_overlap_matrix(params: GramParams) -> np.ndarray:
    states = chi_states(params)
    return np.array([[np.vdot(a.amplitudes, b.amplitudes) for b in states] for a in states])


# --- Objectives ---
def s1_sum(params: GramParams) -> float:
    """Sum of |<chi_i|chi_j>| over ordered pairs i != j."""
    overlaps = np.abs(chi_overlaps(params).overlap_matrix).reshape(81)
    return float(overlaps[_OFF_DIAGONAL].sum())


def s2_sum(params: GramParams) -> float:
    """Weighted cross-class overlap sum of the pauli-class classification problem."""
    overlaps = np.abs(chi_overlaps(params).overlap_matrix).reshape(81)
    return float(CROSS_WEIGHT * overlaps[_CROSS_CLASS].sum())


def _closed_form_terms(x, y, z, t):
    return (
        SQRT2 * abs(y),
        SQRT2 * abs(z - t),
        SQRT2 * abs(x),
        sqrt((x + y + z) ** 2 + (x + y - t) ** 2),
        sqrt((x - y - z) ** 2 + (x - y + t) ** 2),
        sqrt((x - y + z) ** 2 + (x - y - t) ** 2),
        sqrt((x + y - z) ** 2 + (x + y + t) ** 2),
        sqrt(0.5 + (2 * x + 2 * y + z - t) ** 2) / SQRT2,
        sqrt(0.5 + (2 * x - 2 * y - z + t) ** 2) / SQRT2,
        sqrt(0.5 + (2 * x - 2 * y + z - t) ** 2) / SQRT2,
        sqrt(0.5 + (2 * x + 2 * y - z + t) ** 2) / SQRT2,
    )


# multiplicities of the eleven terms above
_S1_HALF_WEIGHTS = (6, 3, 6, 4, 6, 4, 4, 2, 3, 2, 2)
_S2_WEIGHTS = (6, 3, 6, 2, 6, 2, 2, 1, 3, 1, 1)


def s1_closed_form(params: GramParams) -> float:
    """Published closed form of half the ordered-pair overlap sum."""
    terms = _closed_form_terms(*params.as_tuple())
    return float(sum(w * v for w, v in zip(_S1_HALF_WEIGHTS, terms)))


def s2_closed_form(params: GramParams) -> float:
    terms = _closed_form_terms(*params.as_tuple())
    return float(sum(w * v for w, v in zip(_S2_WEIGHTS, terms)) / 27)


def p1_bound(params: GramParams) -> float:
    """Unambiguous identification of the nine states: 1 - (1/8)(1/9) S1."""
    return 1 - s1_sum(params) / 72


def p2_bound(params: GramParams) -> float:
    """Classification into the three pauli classes: 1 - S2."""
    return 1 - s2_sum(params)


def p1_from_sum(s1: float) -> float:
    return 1 - s1 / 72


def p2_from_sum(s2: float) -> float:
    return 1 - s2


# --- Minimisation ---
def _objective_batch(which: Objective, x, y, z) -> np.ndarray:
    overlaps = _batch_abs_overlaps(x, y, z, HALF_NORM - np.asarray(z))
    if which == "s1":
        return overlaps[..., _OFF_DIAGONAL].sum(axis=-1)
    return CROSS_WEIGHT * overlaps[..., _CROSS_CLASS].sum(axis=-1)


def _objective_point(which: Objective, x: float, y: float, z: float) -> float:
    return float(_objective_batch(which, np.array([x]), np.array([y]), np.array([z]))[0])


def _feasible_xyz(x: float, y: float, z: float) -> bool:
    t = HALF_NORM - z
    return z > 0 and t > 0 and x * x + y * y <= z * t


def _grid_search(which: Objective, resolution: int, chunk: int = 4):
    """Exhaustive feasible grid; returns (best (x, y, z), best value, evaluations)."""
    count = resolution if resolution % 2 else resolution + 1
    # interior z grid, odd count keeps z = 1/(2 sqrt2) on the grid
    zs = HALF_NORM * np.arange(1, count + 1) / (count + 1)
    unit = np.linspace(-1.0, 1.0, count)
    best_value, best_point, nfev = np.inf, None, 0
    for start in range(0, count, chunk):
        z_block = zs[start:start + chunk]
        radius = np.sqrt(z_block * (HALF_NORM - z_block))
        zz = np.broadcast_to(z_block[:, None, None], (z_block.size, count, count))
        xx = unit[None, :, None] * radius[:, None, None]
        yy = unit[None, None, :] * radius[:, None, None]
        xx, yy = np.broadcast_arrays(xx, yy)
        mask = xx ** 2 + yy ** 2 <= zz * (HALF_NORM - zz)
        if not mask.any():
            continue
        values = _objective_batch(which, xx[mask], yy[mask], zz[mask])
        nfev += values.size
        idx = int(np.argmin(values))
        if values[idx] < best_value:
            best_value = float(values[idx])
            best_point = (float(xx[mask][idx]), float(yy[mask][idx]), float(zz[mask][idx]))
    if best_point is None:
        raise FeasibilityError(f"No feasible grid point at resolution {resolution}.")
    return best_point, best_value, nfev, HALF_NORM / (count + 1)


def _refine(which: Objective, point, value: float, step: float, iterations: int):
    """Coordinate descent with step halving, restricted to the feasible set."""
    point = list(point)
    nfev = 0
    for _ in range(iterations):
        improved = False
        for axis in range(3):
            for sign in (1.0, -1.0):
                trial = list(point)
                trial[axis] += sign * step
                if not _feasible_xyz(*trial):
                    continue
                trial_value = _objective_point(which, *trial)
                nfev += 1
                if trial_value < value:
                    point, value, improved = trial, trial_value, True
                    break
        if not improved:
            step /= 2
    return tuple(point), value, nfev


def _unconstrained(which: Objective, start) -> OptimizeResult:
    """Nelder-Mead without Gram positivity, keeping z inside (0, 1/sqrt2)."""
    def fun(v):
        x, y, z = v
        if not 0 < z < HALF_NORM:
            return np.inf
        return _objective_point(which, x, y, z)

    return minimize(fun, x0=np.asarray(start), method="Nelder-Mead", options=dict(xatol=1e-10, fatol=1e-12, maxiter=4000))


def minimize_objective(
    which: Objective,
    resolution: int = DEFAULT_RESOLUTION,
    refinement_iters: int = DEFAULT_REFINEMENT,
) -> OptimizeResult:
    """
    Feasible minimum of S1 or S2 over (x, y, z), t = 1/sqrt2 - z.

    Exhaustive grid search followed by coordinate refinement. The result's
    `x` is a GramParams; `grid_value` is the value before refinement and
    `unconstrained_fun` the Nelder-Mead minimum without Gram positivity.
    """
    if which not in ("s1", "s2"):
        raise ConfigurationError(f"Unknown objective {which!r}; expected 's1' or 's2'.")
    if resolution < MIN_RESOLUTION:
        raise ConfigurationError(f"resolution must be at least {MIN_RESOLUTION}, got {resolution}.")

    point, grid_value, nfev, step = _grid_search(which, resolution)
    logger.info(f"[Bounds] {which} grid minimum {grid_value:.12f} at (x, y, z) = {point}")
    point, value, extra = _refine(which, point, grid_value, step, refinement_iters)
    nfev += extra
    free = _unconstrained(which, point)
    logger.info(f"[Bounds] {which} refined minimum {value:.12f}; unconstrained {free.fun:.12f}")

    return OptimizeResult(
        x=GramParams.from_xyz(*point),
        fun=value,
        nfev=nfev,
        grid_value=grid_value,
        unconstrained_fun=float(free.fun),
        unconstrained_x=tuple(float(v) for v in free.x),
        success=True,
        status=0,
        message="Grid and refinement complete",
    )


def params_from_pair(alpha, beta) -> GramParams:
    """Gram parameters of |0>|alpha> + |1>|beta>."""
    alpha = np.asarray(alpha, dtype=complex).reshape(-1)
    beta = np.asarray(beta, dtype=complex).reshape(-1)
    make_pair(alpha, beta)
    cross = complex(np.vdot(alpha, beta)) / SQRT2
    params = GramParams(
        cross.real,
        cross.imag,
        float(np.real(np.vdot(alpha, alpha))) / SQRT2,
        float(np.real(np.vdot(beta, beta))) / SQRT2,
    )
    return check_feasible(params)


def bounds_report(
    which: Objective,
    resolution: int = DEFAULT_RESOLUTION,
    refinement_iters: int = DEFAULT_REFINEMENT,
) -> BoundsReport:
    result = minimize_objective(which, resolution, refinement_iters)
    return BoundsReport(
        objective=which,
        minimum=result.fun,
        argmin=result.x.as_tuple(),
        p1=p1_bound(result.x),
        p2=p2_bound(result.x),
        grid_resolution=resolution,
        refinement=refinement_iters,
        grid_minimum=result.grid_value,
        unconstrained_minimum=result.unconstrained_fun,
    )
