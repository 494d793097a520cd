"""Singlet-pair statistics: quantum correlations from the Born rule, the
observer-independent-facts hidden-variable model, and the CHSH comparison
(local models at most 2, the singlet at 2*sqrt2).

Measurement directions are restricted to one Bloch great circle (real
amplitudes), so a setting is a single angle and the hidden-variable responses
are the familiar cos^2(angle/2) laws.  Outcome +1 means the "plus" port.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .memory import Friend, record_and_erase, record_and_keep
from .qcore import (
    UP,
    DOWN,
    Basis,
    DensityOperator,
    StateVector,
    born_distribution,
    direction_basis,
    make_state,
)

_TWO_PI = 2.0 * math.pi

# z basis for either particle of the pair, ordered (up, down).
PAIR_Z = Basis("Z", (UP, DOWN), ((1, 0), (0, 1)))

_SIGN = {"plus_a": 1, "minus_a": -1}


def singlet() -> StateVector:
    """The pair state (|up,down> - |down,up>)/sqrt2."""
    inv = 1.0 / math.sqrt(2.0)
    return make_state([0.0, inv, -inv, 0.0], (PAIR_Z, PAIR_Z))


def quantum_correlation(alpha: float, beta: float, state=None) -> float:
    """Expectation of the +-1 outcome product at settings (alpha, beta).

    Computed from Born probabilities of the state (default: the singlet,
    where the closed form is -cos(alpha - beta)); accepts a density operator
    as well.
    """
    obj = singlet() if state is None else state
    dist = born_distribution(obj, (direction_basis(alpha), direction_basis(beta)))
    return sum(_SIGN[k1] * _SIGN[k2] * p for (k1, k2), p in dist.items())


@dataclass(frozen=True, eq=False)
class LHVModel:
    """A finite local hidden-variable model: a prior over pair configurations
    and per-side response probabilities depending only on the local component.

    The joint it induces is a convex combination of products, so it is local
    and causal by construction.
    """

    lambda_space: tuple[tuple[str, str], ...]
    prior: tuple[float, ...]
    response: Callable[[int, float, str], dict[int, float]]

    def __post_init__(self) -> None:
        if len(self.prior) != len(self.lambda_space):
            raise ValueError("dimension mismatch")
        if any(p < 0 for p in self.prior) or abs(sum(self.prior) - 1.0) > 1e-12:
            raise ValueError("prior must be a probability distribution")


def observer_independent_facts_model() -> LHVModel:
    """The model induced by treating both friends' z records as facts:
    perfectly anticorrelated z values, cos^2(angle/2) readout on each side."""

    def response(side: int, angle: float, component: str) -> dict[int, float]:
        p_plus = math.cos(angle / 2.0) ** 2 if component == "up" else math.sin(angle / 2.0) ** 2
        return {1: p_plus, -1: 1.0 - p_plus}

    return LHVModel(
        lambda_space=(("up", "down"), ("down", "up"), ("up", "up"), ("down", "down")),
        prior=(0.5, 0.5, 0.0, 0.0),
        response=response,
    )


def lhv_joint(model: LHVModel, alpha: float, beta: float) -> dict[tuple[int, int], float]:
    """P(x, y | alpha, beta) = sum_lambda P1(x|lambda) P2(y|lambda) P(lambda)."""
    joint = {(x, y): 0.0 for x in (1, -1) for y in (1, -1)}
    for lam, weight in zip(model.lambda_space, model.prior):
        if weight == 0.0:
            continue
        r1 = model.response(0, alpha, lam[0])
        r2 = model.response(1, beta, lam[1])
        for x, p1 in r1.items():
            for y, p2 in r2.items():
                joint[(x, y)] += weight * p1 * p2
    return joint


def lhv_correlation(model: LHVModel, alpha: float, beta: float) -> float:
    """Expectation of the outcome product under the hidden-variable model."""
    return sum(x * y * p for (x, y), p in lhv_joint(model, alpha, beta).items())


@dataclass(frozen=True)
class AngleQuad:
    """Alice's two settings and Bob's two settings, stored mod 2*pi."""

    a: float
    aprime: float
    b: float
    bprime: float

    def __post_init__(self) -> None:
        for name in ("a", "aprime", "b", "bprime"):
            object.__setattr__(self, name, float(getattr(self, name)) % _TWO_PI)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.aprime, self.b, self.bprime)


OPTIMAL_QUAD = AngleQuad(0.0, math.pi / 2.0, math.pi / 4.0, -math.pi / 4.0)

CorrelationFn = Callable[[float, float], float]


def chsh(correlation_fn: CorrelationFn, quad: AngleQuad) -> float:
    """S = |E(a,b) + E(a',b) + E(a,b') - E(a',b')|."""
    e = correlation_fn
    return abs(
        e(quad.a, quad.b)
        + e(quad.aprime, quad.b)
        + e(quad.a, quad.bprime)
        - e(quad.aprime, quad.bprime)
    )


@dataclass(frozen=True)
class ScanResult:
    max_s: float
    argmax: AngleQuad
    grid_n: int
    refined: bool


def chsh_scan(correlation_fn: CorrelationFn, grid_n: int = 20, refine: bool = True) -> ScanResult:
    """Maximize S over a grid_n^4 angle grid, then refine locally.

    The refinement is a Nelder-Mead descent on -S from the best grid point;
    this is bound verification, not optimization research.
    """
    grid = np.linspace(0.0, _TWO_PI, grid_n, endpoint=False)
    e = np.array([[correlation_fn(a, b) for b in grid] for a in grid])
    s = np.abs(
        e[:, None, :, None] + e[None, :, :, None] + e[:, None, None, :] - e[None, :, None, :]
    )
    flat = int(np.argmax(s))
    i, j, k, l = np.unravel_index(flat, s.shape)
    best = AngleQuad(grid[i], grid[j], grid[k], grid[l])
    best_s = float(s[i, j, k, l])
    if refine:
        result = minimize(
            lambda q: -chsh(correlation_fn, AngleQuad(*q)),
            np.array(best.as_tuple()),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000, "maxfev": 8000},
        )
        if -result.fun > best_s:
            best_s = float(-result.fun)
            best = AngleQuad(*result.x)
    return ScanResult(best_s, best, grid_n, refine)


@dataclass(frozen=True)
class ErasedKeptReport:
    """CHSH attainable when the friends' records are erased versus kept."""

    quad: AngleQuad
    s_erased: float
    s_kept_at_quad: float
    s_kept_max: float
    aligned_correlation: float
    kept_vs_lhv_max_gap: float

    def to_json_dict(self) -> dict:
        return {
            "quad": list(self.quad.as_tuple()),
            "S_erased": f"{self.s_erased:.17g}",
            "S_kept_at_quad": f"{self.s_kept_at_quad:.17g}",
            "S_kept_max": f"{self.s_kept_max:.17g}",
            "aligned_correlation": f"{self.aligned_correlation:.17g}",
            "kept_vs_lhv_max_gap": f"{self.kept_vs_lhv_max_gap:.17g}",
        }


def erased_vs_kept_chsh(grid_n: int = 20, match_grid: int = 10) -> ErasedKeptReport:
    """Erased records leave the singlet coherent (S = 2*sqrt2); kept records
    dephase it in z, and the dephased correlations equal the
    observer-independent-facts model's -cos(alpha)cos(beta) exactly."""
    pair = singlet()
    run = record_and_erase(pair, Friend.FBAR, PAIR_Z)
    run = record_and_erase(run.final_state, Friend.F, PAIR_Z)
    coherent = run.final_state
    s_erased = chsh(lambda a, b: quantum_correlation(a, b, coherent), OPTIMAL_QUAD)

    kept: DensityOperator = record_and_keep(pair, (Friend.F, Friend.FBAR)).final_state

    def kept_corr(a: float, b: float) -> float:
        return quantum_correlation(a, b, kept)

    s_kept_at_quad = chsh(kept_corr, OPTIMAL_QUAD)
    s_kept_max = chsh_scan(kept_corr, grid_n=grid_n).max_s

    model = observer_independent_facts_model()
    angles = np.linspace(0.0, _TWO_PI, match_grid, endpoint=False)
    gap = max(
        abs(kept_corr(a, b) - lhv_correlation(model, a, b)) for a in angles for b in angles
    )
    return ErasedKeptReport(
        OPTIMAL_QUAD,
        s_erased,
        s_kept_at_quad,
        s_kept_max,
        kept_corr(0.0, 0.0),
        gap,
    )
