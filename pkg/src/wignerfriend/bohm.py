"""Discrete pilot-wave hidden-variable engine for the coin/spin experiment.

Hidden-variable dynamics is sequential conditional collapse: at each
beam-splitter event the active system's outcome distribution is its
conditional wave, given the partner's current hidden branch, pushed through
the beam splitter.  The residual freedom of matching input branches to output
ports (e.g. a 50/50 split fed by a single packet) is resolved by a
:class:`TransportCoupling`; the default monotone coupling is the unique
no-crossing transport between the two ranked marginals, the discrete analogue
of non-crossing trajectories.  Everything is enumerated exactly; the sampler
exists only for Monte-Carlo consistency checks and demo output.

When both beam splitters fire, the two events are space-like separated, so
the dynamics needs a global ordering of them: a :class:`Foliation`.  The two
orderings generate different trajectory sets with identical final-outcome
marginals (equivariance) but different origins for the same outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .hardy import (
    CTX_WBAR_W,
    CTX_WBAR_Z,
    CTX_ZBAR_W,
    CTX_ZBAR_Z,
    MeasurementContext,
    context_table,
    hardy_state,
)
from .qcore import (
    COIN_WBAR,
    SPIN_W,
    Basis,
    InvariantViolation,
    StateVector,
    apply_local,
    basis_change,
    project,
)

WEIGHT_TOL = 1e-12
_ADVANCE_TOL = 1e-15


class MeasurementEvent(str, Enum):
    SPIN_BS = "spin"  # spin beam splitter + W-port detection
    COIN_BS = "coin"  # coin beam splitter + Wbar-port detection


_EVENT_SYSTEM = {MeasurementEvent.SPIN_BS: 1, MeasurementEvent.COIN_BS: 0}
_EVENT_TARGET: dict[MeasurementEvent, Basis] = {
    MeasurementEvent.SPIN_BS: SPIN_W,
    MeasurementEvent.COIN_BS: COIN_WBAR,
}


@dataclass(frozen=True)
class Foliation:
    """A global ordering of the two space-like-separated detection events."""

    name: str
    ordering: tuple[MeasurementEvent, MeasurementEvent]

    def __post_init__(self) -> None:
        if set(self.ordering) != {MeasurementEvent.SPIN_BS, MeasurementEvent.COIN_BS}:
            raise ValueError("ordering must permute the two measurement events")


FOLIATION_F = Foliation("F", (MeasurementEvent.SPIN_BS, MeasurementEvent.COIN_BS))
FOLIATION_FPRIME = Foliation("Fprime", (MeasurementEvent.COIN_BS, MeasurementEvent.SPIN_BS))


class CouplingKind(str, Enum):
    MONOTONE = "monotone"
    INDEPENDENT = "independent"


# Rank 0 is drawn "above" rank 1 when matching cumulative masses.
BRANCH_RANK: dict[str, int] = {
    "h": 0,
    "t": 1,
    "up": 0,
    "down": 1,
    "okbar": 0,
    "failbar": 1,
    "ok": 0,
    "fail": 1,
}


@dataclass(frozen=True)
class TransportCoupling:
    """A joint law over (input branch, output port) with prescribed marginals.

    Monotone pairs the two distributions by matching cumulative mass in rank
    order (no crossing); independent couples them as a product.  Either way
    both marginals are reproduced exactly.
    """

    kind: CouplingKind
    ranks: tuple[tuple[str, int], ...] = tuple(sorted(BRANCH_RANK.items()))

    @property
    def rank_of(self) -> dict[str, int]:
        return dict(self.ranks)

    def joint(
        self, input_dist: dict[str, float], output_dist: dict[str, float]
    ) -> dict[tuple[str, str], float]:
        if abs(sum(input_dist.values()) - 1.0) > 1e-9 or abs(sum(output_dist.values()) - 1.0) > 1e-9:
            raise InvariantViolation("coupling marginals must each sum to 1")
        if self.kind is CouplingKind.INDEPENDENT:
            joint = {
                (i, o): pi * po
                for i, pi in input_dist.items()
                for o, po in output_dist.items()
                if pi * po > _ADVANCE_TOL
            }
        else:
            joint = self._monotone(input_dist, output_dist)
        self._check_marginals(joint, input_dist, output_dist)
        return joint

    def _monotone(
        self, input_dist: dict[str, float], output_dist: dict[str, float]
    ) -> dict[tuple[str, str], float]:
        rank = self.rank_of
        ins = sorted(
            ((lab, p) for lab, p in input_dist.items() if p > _ADVANCE_TOL),
            key=lambda kv: rank[kv[0]],
        )
        outs = sorted(
            ((lab, p) for lab, p in output_dist.items() if p > _ADVANCE_TOL),
            key=lambda kv: rank[kv[0]],
        )
        joint: dict[tuple[str, str], float] = {}
        i = j = 0
        left_i = ins[0][1] if ins else 0.0
        left_j = outs[0][1] if outs else 0.0
        while i < len(ins) and j < len(outs):
            take = min(left_i, left_j)
            if take > _ADVANCE_TOL:
                key = (ins[i][0], outs[j][0])
                joint[key] = joint.get(key, 0.0) + take
            left_i -= take
            left_j -= take
            if left_i <= _ADVANCE_TOL:
                i += 1
                left_i = ins[i][1] if i < len(ins) else 0.0
            if left_j <= _ADVANCE_TOL:
                j += 1
                left_j = outs[j][1] if j < len(outs) else 0.0
        return joint

    @staticmethod
    def _check_marginals(joint, input_dist, output_dist) -> None:
        for lab, p in input_dist.items():
            got = sum(v for (i, _), v in joint.items() if i == lab)
            if abs(got - p) > WEIGHT_TOL:
                raise InvariantViolation(f"input marginal broken at {lab}: {got} != {p}")
        for lab, p in output_dist.items():
            got = sum(v for (_, o), v in joint.items() if o == lab)
            if abs(got - p) > WEIGHT_TOL:
                raise InvariantViolation(f"output marginal broken at {lab}: {got} != {p}")


MONOTONE = TransportCoupling(CouplingKind.MONOTONE)
INDEPENDENT = TransportCoupling(CouplingKind.INDEPENDENT)


@dataclass(frozen=True)
class HiddenConfig:
    """The pair of hidden branch labels, in the pilot state's current bases."""

    coin: str
    spin: str

    def label(self, system: int) -> str:
        return self.coin if system == 0 else self.spin

    def with_label(self, system: int, label: str) -> "HiddenConfig":
        return replace(self, coin=label) if system == 0 else replace(self, spin=label)


@dataclass(frozen=True)
class Transition:
    system: str  # "coin" or "spin"
    source: str
    target: str


@dataclass(frozen=True)
class TrajectoryPath:
    initial: HiddenConfig
    events: tuple[Transition, ...]
    final: tuple[str, str]  # (coin label, spin label)
    weight: float

    @property
    def signature(self) -> tuple:
        return (self.initial, self.events, self.final)


@dataclass(frozen=True)
class TrajectorySet:
    """All weighted hidden-variable paths of one experiment."""

    foliation: Foliation | None  # None when only one beam splitter fires
    context: tuple[str, str]  # (coin basis name, spin basis name)
    coupling: TransportCoupling
    paths: tuple[TrajectoryPath, ...]

    def __post_init__(self) -> None:
        total = 0.0
        for p in self.paths:
            if p.weight < -WEIGHT_TOL:
                raise InvariantViolation(f"negative path weight {p.weight}")
            total += p.weight
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvariantViolation(f"path weights sum to {total}")

    def final_marginal(self) -> dict[tuple[str, str], float]:
        out: dict[tuple[str, str], float] = {}
        for p in self.paths:
            out[p.final] = out.get(p.final, 0.0) + p.weight
        return out

    def to_json_dict(self) -> dict:
        return {
            "foliation": self.foliation.name if self.foliation else None,
            "context": list(self.context),
            "coupling": self.coupling.kind.value,
            "paths": [
                {
                    "initial": {"coin": p.initial.coin, "spin": p.initial.spin},
                    "events": [
                        {"system": t.system, "from": t.source, "to": t.target}
                        for t in p.events
                    ],
                    "final": list(p.final),
                    "weight": f"{p.weight:.17g}",
                }
                for p in self.paths
            ],
        }


def initial_distribution() -> dict[HiddenConfig, float]:
    """Hidden configurations distributed by the shared state's (Zbar, Z) table."""
    table = context_table(CTX_ZBAR_Z)
    return {
        HiddenConfig(coin, spin): table[(coin, spin)]
        for coin in ("h", "t")
        for spin in ("down", "up")
    }


def conditional_wave(state: StateVector, fixed_system: int, fixed_branch: str) -> StateVector:
    """The other system's normalized state given the partner's hidden branch."""
    if not 0 <= fixed_system < state.num_systems:
        raise ValueError("system index out of range")
    i = state.bases[fixed_system].index(fixed_branch)
    vec = np.take(state.tensor(), i, axis=fixed_system).reshape(-1)
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        raise ValueError("empty conditional")
    other_bases = tuple(b for k, b in enumerate(state.bases) if k != fixed_system)
    return StateVector(other_bases, vec / norm)


def _born_1q(state: StateVector) -> dict[str, float]:
    names = state.bases[0].label_names
    p = np.abs(state.amps) ** 2
    return {names[0]: float(p[0]), names[1]: float(p[1])}


def _walk(
    pilot: StateVector,
    initial: HiddenConfig,
    config: HiddenConfig,
    weight: float,
    events: tuple[MeasurementEvent, ...],
    transitions: tuple[Transition, ...],
    coupling: TransportCoupling,
    out: list[TrajectoryPath],
) -> None:
    if not events:
        out.append(TrajectoryPath(initial, transitions, (config.coin, config.spin), weight))
        return
    event, rest = events[0], events[1:]
    active = _EVENT_SYSTEM[event]
    partner = 1 - active
    cond = conditional_wave(pilot, partner, config.label(partner))
    target = _EVENT_TARGET[event]
    out_wave = apply_local(cond, basis_change(0, cond.bases[0], target))
    input_dist = _born_1q(cond)
    output_dist = _born_1q(out_wave)
    joint = coupling.joint(input_dist, output_dist)

    branch = config.label(active)
    in_mass = input_dist[branch]
    if in_mass <= WEIGHT_TOL:
        raise InvariantViolation(
            f"hidden branch {branch!r} has weight {weight} but zero conditional mass"
        )
    pilot_bs = apply_local(pilot, basis_change(active, pilot.bases[active], target))
    for out_name in target.label_names:
        p = joint.get((branch, out_name), 0.0) / in_mass
        if p <= WEIGHT_TOL:
            continue
        collapsed, _ = project(pilot_bs, active, out_name)
        _walk(
            collapsed,
            initial,
            config.with_label(active, out_name),
            weight * p,
            rest,
            transitions + (Transition(event.value, branch, out_name),),
            coupling,
            out,
        )


def _evolve_events(
    events: tuple[MeasurementEvent, ...],
    coupling: TransportCoupling,
    foliation: Foliation | None,
    context: tuple[str, str],
) -> TrajectorySet:
    paths: list[TrajectoryPath] = []
    for config, w in initial_distribution().items():
        if w <= WEIGHT_TOL:
            continue
        _walk(hardy_state(), config, config, w, events, (), coupling, paths)
    return TrajectorySet(foliation, context, coupling, tuple(paths))


def evolve(foliation: Foliation, coupling: TransportCoupling = MONOTONE) -> TrajectorySet:
    """Enumerate every weighted path of the two-beam-splitter experiment."""
    return _evolve_events(foliation.ordering, coupling, foliation, ("Wbar", "W"))


def legacy_contexts() -> dict[MeasurementContext, TrajectorySet]:
    """Trajectory sets for the two single-beam-splitter contexts.

    With one event there is nothing to order, so these sets are foliation
    independent; and every split is either fed by a single branch or forced
    onto a single port, so they do not depend on the coupling either.
    """
    return {
        CTX_ZBAR_W: _evolve_events((MeasurementEvent.SPIN_BS,), MONOTONE, None, ("Zbar", "W")),
        CTX_WBAR_Z: _evolve_events((MeasurementEvent.COIN_BS,), MONOTONE, None, ("Wbar", "Z")),
    }


def origin_of(
    trajectories: TrajectorySet, final_outcome: tuple[str, str]
) -> dict[HiddenConfig, float]:
    """Conditional distribution over initial hidden configs given a final outcome."""
    hits = [p for p in trajectories.paths if p.final == tuple(final_outcome)]
    total = sum(p.weight for p in hits)
    if total <= WEIGHT_TOL:
        raise ValueError("unreached outcome")
    out: dict[HiddenConfig, float] = {}
    for p in hits:
        out[p.initial] = out.get(p.initial, 0.0) + p.weight
    return {k: v / total for k, v in out.items()}


def _dicts_differ(a: dict, b: dict, tol: float = WEIGHT_TOL) -> bool:
    keys = set(a) | set(b)
    return any(abs(a.get(k, 0.0) - b.get(k, 0.0)) > tol for k in keys)


@dataclass(frozen=True)
class FoliationReport:
    """Per-outcome origin comparison between the two event orderings."""

    coupling: TransportCoupling
    marginal_f: dict[tuple[str, str], float]
    marginal_fprime: dict[tuple[str, str], float]
    origins_f: dict[tuple[str, str], dict[HiddenConfig, float]]
    origins_fprime: dict[tuple[str, str], dict[HiddenConfig, float]]
    origin_differs: dict[tuple[str, str], bool]
    marginals_identical: bool
    born_identical: bool


def compare_foliations(coupling: TransportCoupling = MONOTONE) -> FoliationReport:
    """Evolve under both orderings and report where the origins disagree."""
    ts_f = evolve(FOLIATION_F, coupling)
    ts_fp = evolve(FOLIATION_FPRIME, coupling)
    marg_f = ts_f.final_marginal()
    marg_fp = ts_fp.final_marginal()
    outcomes = sorted(set(marg_f) | set(marg_fp))
    origins_f = {o: origin_of(ts_f, o) for o in outcomes}
    origins_fp = {o: origin_of(ts_fp, o) for o in outcomes}
    differs = {o: _dicts_differ(origins_f[o], origins_fp[o]) for o in outcomes}
    born = context_table(CTX_WBAR_W)
    born_identical = not _dicts_differ(marg_f, dict(born.items())) and not _dicts_differ(
        marg_fp, dict(born.items())
    )
    return FoliationReport(
        coupling,
        marg_f,
        marg_fp,
        origins_f,
        origins_fp,
        differs,
        not _dicts_differ(marg_f, marg_fp),
        born_identical,
    )


def sample_paths(
    foliation: Foliation,
    coupling: TransportCoupling = MONOTONE,
    samples: int = 10**6,
    seed: int = 0,
) -> dict[tuple, int]:
    """Sample the trajectory dynamics stage by stage with a seeded generator.

    Counts are distributed with one multinomial draw per branching node, which
    is distribution-identical to simulating each run independently.  Returns
    counts keyed by path signature; deterministic given the seed.
    """
    ts = evolve(foliation, coupling)
    rng = np.random.default_rng(seed)
    counts: dict[tuple, int] = {}

    def assign(count: int, group: list[TrajectoryPath], depth: int) -> None:
        if count == 0:
            return
        if len(group) == 1:
            counts[group[0].signature] = count
            return
        buckets: dict[object, list[TrajectoryPath]] = {}
        for p in group:
            key = p.initial if depth == 0 else p.events[depth - 1]
            buckets.setdefault(key, []).append(p)
        keys = list(buckets)
        masses = np.array([sum(q.weight for q in buckets[k]) for k in keys])
        probs = masses / masses.sum()
        split = rng.multinomial(count, probs)
        for k, c in zip(keys, split):
            assign(int(c), buckets[k], depth + 1)

    assign(samples, list(ts.paths), 0)
    return counts
