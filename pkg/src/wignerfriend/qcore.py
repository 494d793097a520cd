"""Exact two-qubit quantum kernel: labeled bases, states, local maps, the Born
rule, projective collapse, density operators, and dephasing.

Every value is immutable and every operation is a pure function, so the module
is safe for concurrent use without synchronization.  Amplitudes are complex
doubles; constructors and operations validate their invariants to 1e-12 and
raise :class:`InvariantViolation` on breach.

Conventions, fixed so that emitted tables and files are deterministic:

* tensor index is first-system-major: ``amps[i*2 + j]`` pairs label ``i`` of
  system 0 with label ``j`` of system 1;
* the coin's computational basis is ordered ``(h, t)`` and the spin's
  ``(down, up)``;
* port bases: ``okbar = (h - t)/sqrt2``, ``failbar = (h + t)/sqrt2``,
  ``ok = (up - down)/sqrt2``, ``fail = (up + down)/sqrt2``.  All probabilities
  are insensitive to a consistent rephasing of these definitions, but branch
  amplitudes are not, so the signs above are part of the module contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

NORM_TOL = 1e-12
ZERO_BRANCH_TOL = 1e-15

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class InvariantViolation(Exception):
    """A numerical invariant (norm, hermiticity, positivity, ...) was breached."""


class System(str, Enum):
    COIN = "coin"
    SPIN = "spin"


_COIN_NAMES = {"h", "t", "okbar", "failbar"}
_SPIN_NAMES = {"up", "down", "ok", "fail", "plus_a", "minus_a"}
_ANGLED_NAMES = {"plus_a", "minus_a"}


@dataclass(frozen=True)
class BasisLabel:
    """One named basis vector of a two-level system.

    ``plus_a``/``minus_a`` are the Bloch-equator directions at ``angle``
    radians from the +z axis; all other names are fixed directions and carry
    no angle.
    """

    system: System
    name: str
    angle: float | None = None

    def __post_init__(self) -> None:
        allowed = _COIN_NAMES if self.system is System.COIN else _SPIN_NAMES
        if self.name not in allowed:
            raise ValueError(f"label {self.name!r} not allowed on {self.system.value}")
        if (self.angle is not None) != (self.name in _ANGLED_NAMES):
            raise ValueError(f"label {self.name!r} takes an angle iff it is angled")


H = BasisLabel(System.COIN, "h")
T = BasisLabel(System.COIN, "t")
OKBAR = BasisLabel(System.COIN, "okbar")
FAILBAR = BasisLabel(System.COIN, "failbar")
DOWN = BasisLabel(System.SPIN, "down")
UP = BasisLabel(System.SPIN, "up")
OK = BasisLabel(System.SPIN, "ok")
FAIL = BasisLabel(System.SPIN, "fail")

_Vec = tuple[complex, complex]


@dataclass(frozen=True)
class Basis:
    """An ordered pair of orthonormal labels for one system.

    ``vectors`` holds each label's coordinates in the system's reference
    frame (the computational basis the state was constructed in), column per
    label.  Two Basis values are equal iff their names, labels and vectors
    coincide, so context equality is structural.
    """

    name: str
    labels: tuple[BasisLabel, BasisLabel]
    vectors: tuple[_Vec, _Vec]

    def __post_init__(self) -> None:
        if self.labels[0].system is not self.labels[1].system:
            raise ValueError("basis labels must belong to one system")
        m = self.matrix
        if not np.allclose(m.conj().T @ m, np.eye(2), atol=NORM_TOL):
            raise ValueError("not unitary")

    @property
    def system(self) -> System:
        return self.labels[0].system

    @property
    def matrix(self) -> np.ndarray:
        """2x2 complex matrix; column k is labels[k] in the reference frame."""
        return np.array(self.vectors, dtype=complex).T

    @property
    def label_names(self) -> tuple[str, str]:
        return (self.labels[0].name, self.labels[1].name)

    def index(self, label_name: str) -> int:
        try:
            return self.label_names.index(label_name)
        except ValueError:
            raise ValueError(f"outcome {label_name!r} not in basis {self.name}") from None


COIN_ZBAR = Basis("Zbar", (H, T), ((1, 0), (0, 1)))
COIN_WBAR = Basis(
    "Wbar",
    (OKBAR, FAILBAR),
    ((_INV_SQRT2, -_INV_SQRT2), (_INV_SQRT2, _INV_SQRT2)),
)
SPIN_Z = Basis("Z", (DOWN, UP), ((1, 0), (0, 1)))
SPIN_W = Basis(
    "W",
    (OK, FAIL),
    ((-_INV_SQRT2, _INV_SQRT2), (_INV_SQRT2, _INV_SQRT2)),
)


def direction_basis(angle: float) -> Basis:
    """Spin basis along the Bloch-equator direction at ``angle`` radians.

    Reference frame is (up, down); at angle 0 the plus port is ``up``.
    Angles are taken mod 2*pi.
    """
    a = float(angle) % (2.0 * math.pi)
    c, s = math.cos(a / 2.0), math.sin(a / 2.0)
    return Basis(
        f"A({a:.9g})",
        (BasisLabel(System.SPIN, "plus_a", a), BasisLabel(System.SPIN, "minus_a", a)),
        ((c, s), (-s, c)),
    )


@dataclass(frozen=True, eq=False)
class StateVector:
    """A normalized state over labeled two-level systems.

    ``bases[k]`` records the basis system k is currently expressed in; the
    flat ``amps`` array is first-system-major over the bases' label order.
    """

    bases: tuple[Basis, ...]
    amps: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.amps, dtype=complex)
        if a.shape != (2 ** len(self.bases),):
            raise ValueError("dimension mismatch")
        norm = float(np.linalg.norm(a))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvariantViolation(f"state norm {norm} drifted from 1")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @property
    def num_systems(self) -> int:
        return len(self.bases)

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * len(self.bases)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def to_json_dict(self) -> dict:
        """Amplitudes with explicit basis labels and real/imaginary parts."""
        return {
            "systems": [
                {"system": b.system.value, "basis": b.name, "labels": list(b.label_names)}
                for b in self.bases
            ],
            "amplitudes": [{"re": float(a.real), "im": float(a.imag)} for a in self.amps],
        }


def make_state(amplitudes, bases: tuple[Basis, ...]) -> StateVector:
    """Build a StateVector, renormalizing exactly on construction.

    Raises ValueError("null state") for a zero vector and
    ValueError("dimension mismatch") when the amplitude count does not equal
    the product of the system dimensions.
    """
    a = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if a.shape != (2 ** len(bases),):
        raise ValueError("dimension mismatch")
    norm = float(np.linalg.norm(a))
    if norm < 1e-9:
        raise ValueError("null state")
    return StateVector(tuple(bases), a / norm)


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    """A 2x2 unitary acting on one system, mapping amplitudes expressed in
    ``source`` to amplitudes expressed in ``target``."""

    system: int
    matrix: np.ndarray
    source: Basis
    target: Basis

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("dimension mismatch")
        if not np.allclose(m.conj().T @ m, np.eye(2), atol=NORM_TOL):
            raise ValueError("not unitary")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def basis_change(system: int, source: Basis, target: Basis) -> LocalUnitary:
    """The unitary re-expressing one system from ``source`` into ``target``."""
    if source.system is not target.system:
        raise ValueError("basis mismatch: source and target address different systems")
    u = target.matrix.conj().T @ source.matrix
    return LocalUnitary(system, u, source, target)


def apply_local(state: StateVector, u: LocalUnitary) -> StateVector:
    """Apply a local unitary; the norm is preserved and the system's basis tag
    is updated to the unitary's target."""
    if not 0 <= u.system < state.num_systems:
        raise ValueError("system index out of range")
    if state.bases[u.system] != u.source:
        raise ValueError(
            f"basis mismatch: system {u.system} is in {state.bases[u.system].name}, "
            f"unitary expects {u.source.name}"
        )
    t = np.tensordot(u.matrix, state.tensor(), axes=([1], [u.system]))
    t = np.moveaxis(t, 0, u.system)
    bases = tuple(u.target if k == u.system else b for k, b in enumerate(state.bases))
    return StateVector(bases, t.reshape(-1))


def express(state: StateVector, bases: tuple[Basis, ...]) -> StateVector:
    """Re-express every system of ``state`` in the given bases."""
    if len(bases) != state.num_systems:
        raise ValueError("dimension mismatch")
    out = state
    for k, b in enumerate(bases):
        if out.bases[k] != b:
            out = apply_local(out, basis_change(k, out.bases[k], b))
    return out


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities over joint outcomes, keyed by label-name tuples."""

    basis_names: tuple[str, ...]
    probs: dict[tuple[str, ...], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        total = 0.0
        for key, p in self.probs.items():
            if p < -NORM_TOL:
                raise InvariantViolation(f"negative probability {p} at {key}")
            total += p
        if abs(total - 1.0) > NORM_TOL:
            raise InvariantViolation(f"probabilities sum to {total}")

    def __getitem__(self, key: tuple[str, ...]) -> float:
        return self.probs[key]

    def items(self):
        return self.probs.items()


def _distribution_from_diagonal(diag: np.ndarray, bases: tuple[Basis, ...]) -> OutcomeDistribution:
    names = [b.label_names for b in bases]
    probs: dict[tuple[str, ...], float] = {}
    for flat, p in enumerate(diag):
        idx = np.unravel_index(flat, (2,) * len(bases))
        probs[tuple(names[k][i] for k, i in enumerate(idx))] = max(float(p), 0.0)
    return OutcomeDistribution(tuple(b.name for b in bases), probs)


def born_distribution(obj, bases: tuple[Basis, ...]) -> OutcomeDistribution:
    """Born-rule outcome probabilities of a state or density operator in the
    given measurement bases (one per system)."""
    if isinstance(obj, StateVector):
        amps = express(obj, tuple(bases)).amps
        return _distribution_from_diagonal(np.abs(amps) ** 2, tuple(bases))
    if isinstance(obj, DensityOperator):
        rho = express_density(obj, tuple(bases))
        return _distribution_from_diagonal(np.real(np.diag(rho.matrix)), tuple(bases))
    raise TypeError(f"cannot take Born distribution of {type(obj).__name__}")


def project(state: StateVector, system: int, outcome: str) -> tuple[StateVector, float]:
    """Collapse ``system`` onto ``outcome`` (a label of its current basis).

    Returns the renormalized joint state with that system pinned to the
    outcome, and the outcome's probability.  Collapse onto a branch of
    probability below 1e-15 is undefined and raises
    ValueError("zero-probability branch").
    """
    if not 0 <= system < state.num_systems:
        raise ValueError("system index out of range")
    i = state.bases[system].index(outcome)
    t = state.tensor().copy()
    sel = [slice(None)] * state.num_systems
    sel[system] = 1 - i
    t[tuple(sel)] = 0.0
    prob = float(np.sum(np.abs(t) ** 2))
    if prob < ZERO_BRANCH_TOL:
        raise ValueError("zero-probability branch")
    return StateVector(state.bases, t.reshape(-1) / math.sqrt(prob)), prob


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A density matrix over the same labeled tensor basis as StateVector.

    Hermiticity, unit trace, and positivity are enforced to 1e-12.
    """

    bases: tuple[Basis, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        d = 2 ** len(self.bases)
        if m.shape != (d, d):
            raise ValueError("dimension mismatch")
        if not np.allclose(m, m.conj().T, atol=NORM_TOL):
            raise InvariantViolation("density operator not Hermitian")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > NORM_TOL:
            raise InvariantViolation(f"density operator trace {tr}")
        if float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2.0))) < -NORM_TOL:
            raise InvariantViolation("density operator not positive semidefinite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def num_systems(self) -> int:
        return len(self.bases)


def density_from_state(state: StateVector) -> DensityOperator:
    """The pure density operator |psi><psi|."""
    return DensityOperator(state.bases, np.outer(state.amps, state.amps.conj()))


def express_density(rho: DensityOperator, bases: tuple[Basis, ...]) -> DensityOperator:
    """Re-express a density operator in the given bases."""
    if len(bases) != rho.num_systems:
        raise ValueError("dimension mismatch")
    if all(b == c for b, c in zip(rho.bases, bases)):
        return rho
    u = np.eye(1)
    for k, b in enumerate(bases):
        u = np.kron(u, basis_change(k, rho.bases[k], b).matrix if rho.bases[k] != b else np.eye(2))
    return DensityOperator(tuple(bases), u @ rho.matrix @ u.conj().T)


def dephase(rho: DensityOperator, system: int, basis: Basis) -> DensityOperator:
    """Zero all coherences between ``basis`` sectors of ``system``.

    The trace is preserved; dephasing twice in the same basis is the same as
    dephasing once.
    """
    if not 0 <= system < rho.num_systems:
        raise ValueError("system index out of range")
    target = tuple(basis if k == system else b for k, b in enumerate(rho.bases))
    m = express_density(rho, target).matrix
    n = rho.num_systems
    t = m.reshape((2,) * (2 * n)).copy()
    idx_row = [slice(None)] * (2 * n)
    idx_row[system] = 0
    idx_row[n + system] = 1
    t[tuple(idx_row)] = 0.0
    idx_row[system] = 1
    idx_row[n + system] = 0
    t[tuple(idx_row)] = 0.0
    return DensityOperator(target, t.reshape(m.shape))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2, after re-expressing ``b`` in ``a``'s bases."""
    if a.num_systems != b.num_systems:
        raise ValueError("dimension mismatch")
    return float(abs(np.vdot(a.amps, express(b, a.bases).amps)) ** 2)
