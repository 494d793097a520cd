"""Independent brute-force reference computations for the test suite.

Everything here is built directly from hardcoded 2x2 matrices and 4-vectors
and imports nothing from the package under test, so the values it produces
stand on their own as oracles.
"""

from __future__ import annotations

import numpy as np

INV = 2.0 ** -0.5

# Label vectors in (h, t) coordinates for the coin and (down, up) for the spin.
COIN_VECS = {
    "h": np.array([1.0, 0.0], dtype=complex),
    "t": np.array([0.0, 1.0], dtype=complex),
    "okbar": np.array([INV, -INV], dtype=complex),
    "failbar": np.array([INV, INV], dtype=complex),
}
SPIN_VECS = {
    "down": np.array([1.0, 0.0], dtype=complex),
    "up": np.array([0.0, 1.0], dtype=complex),
    "ok": np.array([-INV, INV], dtype=complex),
    "fail": np.array([INV, INV], dtype=complex),
}

# Hardy amplitudes, index order (h,down), (h,up), (t,down), (t,up).
HARDY = np.array([1.0, 0.0, 1.0, 1.0], dtype=complex) / np.sqrt(3.0)

CONTEXT_LABELS = {
    "Zbar,Z": (("h", "t"), ("down", "up")),
    "Zbar,W": (("h", "t"), ("ok", "fail")),
    "Wbar,Z": (("okbar", "failbar"), ("down", "up")),
    "Wbar,W": (("okbar", "failbar"), ("ok", "fail")),
}

# Beam splitters as amplitude maps: row r of BS_SPIN is <port_r| on (down, up),
# ports ordered (ok, fail); BS_COIN likewise on (h, t) with ports (okbar, failbar).
BS_SPIN = np.array([[-INV, INV], [INV, INV]], dtype=complex)
BS_COIN = np.array([[INV, -INV], [INV, INV]], dtype=complex)

BRANCH_RANK = {
    "h": 0,
    "t": 1,
    "up": 0,
    "down": 1,
    "okbar": 0,
    "failbar": 1,
    "ok": 0,
    "fail": 1,
}


def outcome_vector(coin_label: str, spin_label: str) -> np.ndarray:
    return np.kron(COIN_VECS[coin_label], SPIN_VECS[spin_label])


def born_table(context: str, state: np.ndarray = HARDY) -> dict[tuple[str, str], float]:
    """P(c, s) = |<c, s|state>|^2 by direct inner products."""
    coin_labels, spin_labels = CONTEXT_LABELS[context]
    return {
        (c, s): float(abs(np.vdot(outcome_vector(c, s), state)) ** 2)
        for c in coin_labels
        for s in spin_labels
    }


def quantile_joint(
    input_dist: dict[str, float], output_dist: dict[str, float]
) -> dict[tuple[str, str], float]:
    """No-crossing coupling by interval overlap on [0, 1] in rank order."""

    def intervals(dist: dict[str, float]) -> dict[str, tuple[float, float]]:
        out = {}
        lo = 0.0
        for label in sorted((l for l, p in dist.items() if p > 1e-15), key=BRANCH_RANK.get):
            out[label] = (lo, lo + dist[label])
            lo += dist[label]
        return out

    joint = {}
    for li, (a1, b1) in intervals(input_dist).items():
        for lo, (a2, b2) in intervals(output_dist).items():
            overlap = min(b1, b2) - max(a1, a2)
            if overlap > 1e-15:
                joint[(li, lo)] = overlap
    return joint


def product_joint(
    input_dist: dict[str, float], output_dist: dict[str, float]
) -> dict[tuple[str, str], float]:
    return {
        (i, o): pi * po
        for i, pi in input_dist.items()
        for o, po in output_dist.items()
        if pi * po > 1e-15
    }


def enumerate_paths(
    event_order: tuple[str, ...], coupling: str = "monotone"
) -> list[dict]:
    """Sequential-conditional-collapse enumeration over
    (initial hidden config) x (event outcome sequences).

    The shared amplitudes are tracked as a 2x2 matrix M[coin, spin]; at each
    event the active side's outcome law is its conditional amplitude row or
    column (given the partner's hidden branch) pushed through the beam
    splitter, and hidden branches transition through the chosen coupling.
    Returns dicts with keys initial, transitions, final, weight.
    """
    m0 = HARDY.reshape(2, 2)
    initial_labels = [("h", "down"), ("h", "up"), ("t", "down"), ("t", "up")]
    join = quantile_joint if coupling == "monotone" else product_joint
    results: list[dict] = []

    def step(m, coin_labels, spin_labels, coin_lab, spin_lab, weight, events, trans, initial):
        if not events:
            results.append(
                {
                    "initial": initial,
                    "transitions": tuple(trans),
                    "final": (coin_lab, spin_lab),
                    "weight": weight,
                }
            )
            return
        event, rest = events[0], events[1:]
        if event == "spin":
            cond = m[coin_labels.index(coin_lab), :]
            cond = cond / np.linalg.norm(cond)
            out_amp = BS_SPIN @ cond
            input_dist = dict(zip(spin_labels, np.abs(cond) ** 2))
            output_dist = dict(zip(("ok", "fail"), np.abs(out_amp) ** 2))
            joint = join(input_dist, output_dist)
            m_bs = m @ BS_SPIN.T
            for port_idx, port in enumerate(("ok", "fail")):
                p = joint.get((spin_lab, port), 0.0) / input_dist[spin_lab]
                if p <= 1e-12:
                    continue
                m_new = m_bs.copy()
                m_new[:, 1 - port_idx] = 0.0
                m_new /= np.linalg.norm(m_new)
                step(
                    m_new,
                    coin_labels,
                    ("ok", "fail"),
                    coin_lab,
                    port,
                    weight * p,
                    rest,
                    trans + [("spin", spin_lab, port)],
                    initial,
                )
        else:
            cond = m[:, spin_labels.index(spin_lab)]
            cond = cond / np.linalg.norm(cond)
            out_amp = BS_COIN @ cond
            input_dist = dict(zip(coin_labels, np.abs(cond) ** 2))
            output_dist = dict(zip(("okbar", "failbar"), np.abs(out_amp) ** 2))
            joint = join(input_dist, output_dist)
            m_bs = BS_COIN @ m
            for port_idx, port in enumerate(("okbar", "failbar")):
                p = joint.get((coin_lab, port), 0.0) / input_dist[coin_lab]
                if p <= 1e-12:
                    continue
                m_new = m_bs.copy()
                m_new[1 - port_idx, :] = 0.0
                m_new /= np.linalg.norm(m_new)
                step(
                    m_new,
                    ("okbar", "failbar"),
                    spin_labels,
                    port,
                    spin_lab,
                    weight * p,
                    rest,
                    trans + [("coin", coin_lab, port)],
                    initial,
                )

    for (coin_lab, spin_lab) in initial_labels:
        w0 = float(abs(m0[("h", "t").index(coin_lab), ("down", "up").index(spin_lab)]) ** 2)
        if w0 <= 1e-15:
            continue
        step(
            m0,
            ("h", "t"),
            ("down", "up"),
            coin_lab,
            spin_lab,
            w0,
            tuple(event_order),
            [],
            (coin_lab, spin_lab),
        )
    return results


def dephase_matrix(rho: np.ndarray, site: int) -> np.ndarray:
    """Projector-sum dephasing of a 4x4 two-qubit density in the current basis."""
    out = np.zeros_like(rho)
    for k in range(2):
        p = np.zeros((2, 2))
        p[k, k] = 1.0
        full = np.kron(p, np.eye(2)) if site == 0 else np.kron(np.eye(2), p)
        out += full @ rho @ full
    return out


def born_from_density(context: str, rho: np.ndarray) -> dict[tuple[str, str], float]:
    coin_labels, spin_labels = CONTEXT_LABELS[context]
    table = {}
    for c in coin_labels:
        for s in spin_labels:
            v = outcome_vector(c, s)
            table[(c, s)] = float(np.real(np.vdot(v, rho @ v)))
    return table
