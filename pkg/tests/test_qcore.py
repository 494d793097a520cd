import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from wignerfriend.qcore import (
    COIN_WBAR,
    COIN_ZBAR,
    SPIN_W,
    SPIN_Z,
    Basis,
    BasisLabel,
    DensityOperator,
    LocalUnitary,
    System,
    apply_local,
    basis_change,
    born_distribution,
    dephase,
    density_from_state,
    express,
    fidelity,
    make_state,
    project,
)

INV = 2.0 ** -0.5
SQRT3 = math.sqrt(3.0)
HARDY_BASES = (COIN_ZBAR, SPIN_Z)


def hardy():
    return make_state([1 / SQRT3, 0, 1 / SQRT3, 1 / SQRT3], HARDY_BASES)


def test_make_state_computational():
    s = make_state([1, 0, 0, 0], HARDY_BASES)
    assert np.allclose(s.amps, [1, 0, 0, 0])
    assert abs(np.linalg.norm(s.amps) - 1) < 1e-12


def test_make_state_hardy_amplitudes():
    s = hardy()
    assert np.allclose(s.amps, np.array([1, 0, 1, 1]) / SQRT3, atol=1e-15)


def test_make_state_null_vector_rejected():
    with pytest.raises(ValueError, match="null state"):
        make_state([0, 0, 0, 0], HARDY_BASES)


def test_make_state_length_mismatch_rejected():
    with pytest.raises(ValueError, match="dimension mismatch"):
        make_state([1, 0, 0], HARDY_BASES)


def test_label_system_discipline():
    with pytest.raises(ValueError):
        BasisLabel(System.COIN, "ok")
    with pytest.raises(ValueError):
        BasisLabel(System.SPIN, "h")
    with pytest.raises(ValueError):
        BasisLabel(System.SPIN, "plus_a")  # angled labels need an angle


def spin_bs():
    # up -> (fail + ok)/sqrt2, down -> (fail - ok)/sqrt2, rows ordered (ok, fail)
    return LocalUnitary(1, np.array([[-INV, INV], [INV, INV]]), SPIN_Z, SPIN_W)


def test_apply_local_single_branch():
    s = make_state([1, 0, 0, 0], HARDY_BASES)
    out = apply_local(s, spin_bs())
    # |h,down> -> (|h,fail> - |h,ok>)/sqrt2, amps ordered (h,ok),(h,fail),(t,ok),(t,fail)
    assert np.allclose(out.amps, [-INV, INV, 0, 0], atol=1e-15)
    assert out.bases[1] == SPIN_W


def test_apply_local_hardy_state():
    out = apply_local(hardy(), spin_bs())
    expected = np.array([-1, 1, 0, 2]) / math.sqrt(6.0)
    assert np.allclose(out.amps, expected, atol=1e-15)
    assert abs(out.amps[2]) < 1e-15  # no (t, ok) amplitude


def test_apply_local_identity():
    s = hardy()
    ident = LocalUnitary(0, np.eye(2), COIN_ZBAR, COIN_ZBAR)
    assert np.allclose(apply_local(s, ident).amps, s.amps)


def test_apply_local_rejects_non_unitary():
    with pytest.raises(ValueError, match="not unitary"):
        LocalUnitary(1, np.array([[1, 1], [0, 1]]), SPIN_Z, SPIN_W)


def test_apply_local_rejects_basis_mismatch():
    s = hardy()
    u = basis_change(1, SPIN_W, SPIN_Z)
    with pytest.raises(ValueError, match="basis mismatch"):
        apply_local(s, u)


@pytest.mark.parametrize(
    "bases,context",
    [
        ((COIN_ZBAR, SPIN_Z), "Zbar,Z"),
        ((COIN_ZBAR, SPIN_W), "Zbar,W"),
        ((COIN_WBAR, SPIN_Z), "Wbar,Z"),
        ((COIN_WBAR, SPIN_W), "Wbar,W"),
    ],
)
def test_born_distribution_matches_inner_product_oracle(bases, context):
    table = born_distribution(hardy(), bases)
    expected = oracles.born_table(context)
    for key, p in expected.items():
        assert table[key] == pytest.approx(p, abs=1e-12)


def test_born_distribution_frozen_values():
    t = born_distribution(hardy(), (COIN_ZBAR, SPIN_Z))
    assert t[("h", "down")] == pytest.approx(1 / 3, abs=1e-12)
    assert t[("h", "up")] <= 1e-15
    w = born_distribution(hardy(), (COIN_WBAR, SPIN_W))
    assert w[("okbar", "ok")] == pytest.approx(1 / 12, abs=1e-12)
    assert w[("failbar", "fail")] == pytest.approx(3 / 4, abs=1e-12)
    zw = born_distribution(hardy(), (COIN_ZBAR, SPIN_W))
    assert zw[("t", "ok")] <= 1e-15
    assert zw[("t", "fail")] == pytest.approx(2 / 3, abs=1e-12)
    assert zw[("h", "ok")] == pytest.approx(1 / 6, abs=1e-12)


def test_born_consistency_with_hand_applied_beam_splitters():
    # Independent route for all four contexts: push the state through
    # hand-built basis maps and square the amplitudes.
    coin_bs = LocalUnitary(0, np.array([[INV, -INV], [INV, INV]]), COIN_ZBAR, COIN_WBAR)
    for use_coin_bs, use_spin_bs in [(False, False), (False, True), (True, False), (True, True)]:
        out = hardy()
        if use_spin_bs:
            out = apply_local(out, spin_bs())
        if use_coin_bs:
            out = apply_local(out, coin_bs)
        table = born_distribution(hardy(), out.bases)
        coin_labels = out.bases[0].label_names
        spin_labels = out.bases[1].label_names
        for flat, (c, s) in enumerate([(c, s) for c in coin_labels for s in spin_labels]):
            assert table[(c, s)] == pytest.approx(float(abs(out.amps[flat]) ** 2), abs=1e-12)


def test_state_json_serialization_round_trips():
    state = express(hardy(), (COIN_WBAR, SPIN_W))
    payload = state.to_json_dict()
    assert payload["systems"][0] == {"system": "coin", "basis": "Wbar", "labels": ["okbar", "failbar"]}
    rebuilt = make_state(
        [complex(a["re"], a["im"]) for a in payload["amplitudes"]], state.bases
    )
    assert fidelity(state, rebuilt) == pytest.approx(1.0, abs=1e-12)


def test_project_on_tail():
    collapsed, prob = project(hardy(), 0, "t")
    assert prob == pytest.approx(2 / 3, abs=1e-12)
    expected = make_state([0, 0, INV, INV], HARDY_BASES)
    assert fidelity(expected, collapsed) == pytest.approx(1.0, abs=1e-12)


def test_project_on_okbar():
    state = express(hardy(), (COIN_WBAR, SPIN_Z))
    collapsed, prob = project(state, 0, "okbar")
    assert prob == pytest.approx(1 / 6, abs=1e-12)
    expected = make_state([0, 1, 0, 0], (COIN_WBAR, SPIN_Z))  # |okbar, up>
    assert fidelity(expected, collapsed) == pytest.approx(1.0, abs=1e-12)


def test_project_zero_probability_branch():
    s = make_state([1, 0, 0, 0], HARDY_BASES)
    with pytest.raises(ValueError, match="zero-probability branch"):
        project(s, 0, "t")


def test_project_unknown_outcome():
    with pytest.raises(ValueError, match="not in basis"):
        project(hardy(), 0, "ok")


def _reconstruction_holds(state, system):
    basis = state.bases[system]
    total = np.zeros((4, 4), dtype=complex)
    for label in basis.label_names:
        try:
            collapsed, prob = project(state, system, label)
        except ValueError:
            continue
        total += prob * np.outer(collapsed.amps, collapsed.amps.conj())
    expected = dephase(density_from_state(state), system, basis)
    assert np.allclose(total, expected.matrix, atol=1e-12)


def test_project_then_marginalize_reconstructs_dephased_density():
    for state in (hardy(), express(hardy(), (COIN_WBAR, SPIN_W))):
        for system in (0, 1):
            _reconstruction_holds(state, system)


amp_parts = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(amp_parts, amp_parts), min_size=4, max_size=4), st.integers(0, 1))
def test_project_then_marginalize_holds_for_arbitrary_states(parts, system):
    amps = np.array([complex(re, im) for re, im in parts])
    if np.linalg.norm(amps) < 1e-3:
        return
    _reconstruction_holds(make_state(amps, HARDY_BASES), system)


def test_dephase_both_gives_uniform_third_mixture():
    rho = density_from_state(hardy())
    rho = dephase(dephase(rho, 0, COIN_ZBAR), 1, SPIN_Z)
    assert np.allclose(rho.matrix, np.diag([1 / 3, 0, 1 / 3, 1 / 3]), atol=1e-12)


def test_dephase_fixed_point_when_already_diagonal():
    rho = DensityOperator(HARDY_BASES, np.diag([0.5, 0.1, 0.2, 0.2]))
    again = dephase(rho, 0, COIN_ZBAR)
    assert np.allclose(again.matrix, rho.matrix, atol=1e-15)


def test_dephase_idempotent():
    rho = density_from_state(hardy())
    once = dephase(rho, 1, SPIN_W)
    twice = dephase(once, 1, SPIN_W)
    assert np.allclose(once.matrix, twice.matrix, atol=1e-15)


def test_dephased_tables_go_uniform_in_port_bases():
    rho = dephase(dephase(density_from_state(hardy()), 0, COIN_ZBAR), 1, SPIN_Z)
    table = born_distribution(rho, (COIN_WBAR, SPIN_W))
    for key, p in table.items():
        assert p == pytest.approx(1 / 4, abs=1e-12)
    # contrast with the coherent 1/12 and 3/4
    coherent = born_distribution(hardy(), (COIN_WBAR, SPIN_W))
    assert coherent[("failbar", "fail")] == pytest.approx(3 / 4, abs=1e-12)


def _rotation(theta, phi, lam):
    return np.array(
        [
            [math.cos(theta), -np.exp(1j * lam) * math.sin(theta)],
            [np.exp(1j * phi) * math.sin(theta), np.exp(1j * (phi + lam)) * math.cos(theta)],
        ]
    )


angles = st.floats(0, 2 * math.pi, allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(st.integers(0, 1), angles, angles, angles), min_size=1, max_size=6))
def test_norm_preserved_under_unitary_sequences(ops):
    state = hardy()
    for system, theta, phi, lam in ops:
        basis = state.bases[system]
        state = apply_local(state, LocalUnitary(system, _rotation(theta, phi, lam), basis, basis))
        assert abs(float(np.linalg.norm(state.amps)) - 1.0) < 1e-12


@given(angles, angles, angles, angles)
def test_rephasing_the_port_bases_changes_no_probabilities(p1, p2, p3, p4):
    # Multiply each port basis vector by its own phase; all tables must stay put.
    wbar = Basis(
        "Wbar'",
        COIN_WBAR.labels,
        (
            tuple(np.exp(1j * p1) * v for v in COIN_WBAR.vectors[0]),
            tuple(np.exp(1j * p2) * v for v in COIN_WBAR.vectors[1]),
        ),
    )
    w = Basis(
        "W'",
        SPIN_W.labels,
        (
            tuple(np.exp(1j * p3) * v for v in SPIN_W.vectors[0]),
            tuple(np.exp(1j * p4) * v for v in SPIN_W.vectors[1]),
        ),
    )
    rephased = born_distribution(hardy(), (wbar, w))
    reference = born_distribution(hardy(), (COIN_WBAR, SPIN_W))
    for key, p in reference.items():
        assert rephased[key] == pytest.approx(p, abs=1e-12)


def test_density_validation_rejects_bad_matrices():
    from wignerfriend.qcore import InvariantViolation

    with pytest.raises(InvariantViolation):
        DensityOperator(HARDY_BASES, np.diag([0.9, 0.3, 0, 0]))  # trace 1.2
    with pytest.raises(InvariantViolation):
        DensityOperator(HARDY_BASES, np.diag([1.5, -0.5, 0, 0]))  # negative eigenvalue
