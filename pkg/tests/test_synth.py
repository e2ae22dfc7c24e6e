import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    AMPLITUDE_DAMPING_FIGURE_CIRCUIT,
    DEPHASING_FIGURE_CIRCUIT,
    ancilla_circuit_channel,
    average_gate_infidelity,
    negate_angles,
)
from petzrec import numerics as nx
from petzrec.channels import make_amplitude_damping, make_dephasing, make_depolarizing
from petzrec.dilation import dilate_general, dilate_rank2_analytic
from petzrec.errors import BudgetExceededError, IndexOutOfRangeError, NotUnitaryError, UnsupportedGateError
from petzrec.petz import BlochState, build_petz
from petzrec.synth import (
    CNOT,
    CZ,
    GPG,
    RX,
    RY,
    RZ,
    Gate,
    GateSequence,
    canonical_coordinates,
    decompose_3q,
    decompose_su4,
    embed,
    merge_single_qubit_runs,
    raw_unitary,
    rewrite_cnot_to_gpg,
    sequence_unitary,
    synthesize,
    verify_equiv,
)
from petzrec.synth.gates import CNOT_MAT, wrap_angle
from petzrec.synth.twoq import zyz_angles

PI = math.pi
G0 = BlochState(0.5, PI / 2, PI / 4)


def local(rng, n=2):
    return nx.kron(*(nx.haar_unitary(2, rng) for _ in range(n)))


# -- gates ------------------------------------------------------------------------


def test_rotation_convention():
    assert np.allclose(RZ(0, PI / 2).matrix(), np.diag(np.exp([-0.25j * PI, 0.25j * PI])))
    assert np.allclose(RX(0, PI).matrix(), -1j * nx.SX)
    assert np.allclose(RY(0, PI).matrix(), -1j * nx.SY)
    assert np.allclose(GPG(0, 1, PI / 2).matrix(), np.diag(np.exp(-0.25j * PI * np.array([1, -1, -1, 1]))))


def test_sequence_unitary_examples():
    assert np.allclose(sequence_unitary(GateSequence(2)), np.eye(4))
    hh = GateSequence(1, [Gate("H", (0,)), Gate("H", (0,))])
    assert np.allclose(sequence_unitary(hh), np.eye(2))
    assert np.allclose(sequence_unitary(GateSequence(2, [CNOT(0, 1)])), CNOT_MAT)


def test_qubit_zero_is_most_significant():
    x0 = raw_unitary(GateSequence(2, [RX(0, PI)]))
    assert np.allclose(x0, np.kron(-1j * nx.SX, nx.I2))
    cx10 = raw_unitary(GateSequence(2, [CNOT(1, 0)]))
    assert np.allclose(cx10 @ np.eye(4)[:, 1], np.eye(4)[:, 3])


def test_time_order():
    gs = GateSequence(1, [RX(0, 0.3), RZ(0, 0.7)])
    assert np.allclose(raw_unitary(gs), RZ(0, 0.7).matrix() @ RX(0, 0.3).matrix())


def test_embed_on_non_adjacent_qubits(rng):
    op = nx.haar_unitary(4, rng)
    full = embed(op, (2, 0), 3)
    v = rng.standard_normal(8)
    t = v.reshape(2, 2, 2)
    expected = np.einsum("abcd,dxc->bxa", op.reshape(2, 2, 2, 2), t).reshape(-1)
    assert np.allclose(full @ v, expected)


def test_gate_validation():
    with pytest.raises(UnsupportedGateError):
        Gate("SWAP", (0, 1))
    with pytest.raises(ValueError):
        Gate("RX", (0,))
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(IndexOutOfRangeError):
        GateSequence(2, [CNOT(0, 2)])


def test_text_round_trip(rng):
    gs = decompose_3q(nx.haar_unitary(8, rng))
    gs = rewrite_cnot_to_gpg(gs, merge=True)
    back = GateSequence.from_text(gs.to_text())
    assert back == gs
    line = GateSequence(2, [RZ(0, 3 * PI / 2), CNOT(1, 0), GPG(0, 1, PI / 2)]).to_text().splitlines()
    assert line == ["# width 2", "RZ q0 4.71238898038469", "CNOT q1 q0", "GPG q0 q1 1.5707963267948966"]


def test_wrap_angle():
    assert wrap_angle(4 * PI) == pytest.approx(0.0, abs=1e-12)
    assert wrap_angle(5 * PI) == pytest.approx(PI)
    assert wrap_angle(-2 * PI) == pytest.approx(2 * PI)


def test_verify_equiv_examples(rng):
    assert verify_equiv(np.eye(4), GateSequence(2)) == 0
    assert verify_equiv(np.kron(nx.SX, nx.I2), GateSequence(2, [CNOT(0, 1)])) > 0.1


# -- two-qubit synthesis ----------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_local_unitary_needs_no_cnot(seed):
    u = local(np.random.default_rng(seed))
    gs = decompose_su4(u)
    assert gs.cnot_count == 0
    assert verify_equiv(u, gs) <= 1e-8


def test_cnot_needs_one(rng):
    for u in (CNOT_MAT, local(rng) @ CNOT_MAT @ local(rng)):
        gs = decompose_su4(u)
        assert gs.cnot_count == 1
        assert verify_equiv(u, gs) <= 1e-10


def test_two_cnot_class(rng):
    u = local(rng) @ raw_unitary(GateSequence(2, [GPG(0, 1, 0.7)])) @ local(rng)
    gs = decompose_su4(u)
    assert gs.cnot_count == 2
    assert verify_equiv(u, gs) <= 1e-10


def test_swap_needs_three():
    swap = np.eye(4)[[0, 2, 1, 3]]
    gs = decompose_su4(swap)
    assert gs.cnot_count == 3
    assert verify_equiv(swap, gs) <= 1e-10


def test_haar_random_round_trip(rng):
    for _ in range(100):
        u = nx.haar_unitary(4, rng)
        gs = decompose_su4(u)
        assert gs.cnot_count <= 3
        assert verify_equiv(u, gs) <= 1e-8


def test_canonical_coordinates_frozen():
    pm = build_petz(make_amplitude_damping(0.5), G0)
    c = canonical_coordinates(dilate_rank2_analytic(pm).U)
    assert np.allclose(c, [-0.32750055, 0.3423596, -0.71313759], atol=1e-7)


def test_canonical_coordinates_are_local_invariants(rng):
    u = nx.haar_unitary(4, rng)
    a = np.sort(np.abs(canonical_coordinates(u)))
    b = np.sort(np.abs(canonical_coordinates(local(rng) @ u @ local(rng))))
    # coordinates are defined modulo pi/2 shifts and sign flips
    assert np.allclose(np.minimum(a % (PI / 2), PI / 2 - a % (PI / 2)), np.minimum(b % (PI / 2), PI / 2 - b % (PI / 2)), atol=1e-8)


def test_not_unitary_rejected():
    with pytest.raises(NotUnitaryError):
        decompose_su4(np.ones((4, 4)))


@settings(max_examples=40, deadline=None)
@given(st.floats(-PI, PI), st.floats(-PI, PI), st.floats(-PI, PI))
def test_zyz_angles(a, b, c):
    u = RZ(0, c).matrix() @ RY(0, b).matrix() @ RZ(0, a).matrix()
    t = zyz_angles(u)
    v = RZ(0, t[0]).matrix() @ RY(0, t[1]).matrix() @ RZ(0, t[2]).matrix()
    assert nx.phase_distance(u, v) < 1e-9


def test_merge_single_qubit_runs(rng):
    gs = GateSequence(2, [RX(0, 0.1), RY(0, 0.2), RX(0, 0.3), RZ(1, 0.3), CNOT(0, 1), RZ(0, 0.4), RX(0, 0.5), RY(0, 0.6), RZ(0, 0.7)])
    m = merge_single_qubit_runs(gs)
    assert m.cnot_count == 1
    assert len(m) < len(gs)
    assert nx.phase_distance(raw_unitary(gs), raw_unitary(m)) < 1e-12


# -- three-qubit synthesis --------------------------------------------------------


def test_product_of_locals_needs_no_cnot(rng):
    u = local(rng, 3)
    gs = decompose_3q(u)
    assert gs.entangler_count == 0
    assert verify_equiv(u, gs) <= 1e-8


def test_cnot_times_identity_needs_one(rng):
    u = np.kron(CNOT_MAT, nx.I2)
    gs = decompose_3q(u)
    assert gs.entangler_count <= 1
    assert verify_equiv(u, gs) <= 1e-10


def test_depolarizing_dilation_within_budget():
    d = dilate_general(build_petz(make_depolarizing(0.5), G0))
    gs = decompose_3q(d.U)
    assert gs.entangler_count <= 20
    assert verify_equiv(d.U, gs) <= 1e-6


def test_haar_random_8x8(rng):
    for _ in range(20):
        u = nx.haar_unitary(8, rng)
        gs = decompose_3q(u)
        assert gs.entangler_count <= 20
        assert verify_equiv(u, gs) <= 1e-6


def test_budget_constant():
    from petzrec.synth import qsd

    assert qsd.CNOT_BUDGET == 20
    assert issubclass(BudgetExceededError, RuntimeError)


def test_synthesize_dispatch(rng):
    for n in (2, 4, 8):
        u = nx.haar_unitary(n, rng)
        assert verify_equiv(u, synthesize(u)) <= 1e-6
    with pytest.raises(ValueError):
        synthesize(np.eye(16))


# -- GPG rewrite ------------------------------------------------------------------


def test_cz_identity_exact():
    gs = rewrite_cnot_to_gpg(GateSequence(2, [CZ(0, 1)]))
    assert [g.name for g in gs] == ["GPG", "RZ", "RZ"]
    assert [g.angle for g in gs] == [PI / 2, -PI / 2, -PI / 2]
    assert np.allclose(np.exp(-0.25j * PI) * raw_unitary(gs), np.diag([1, 1, 1, -1]))


def test_cnot_rewrite():
    gs = rewrite_cnot_to_gpg(GateSequence(2, [CNOT(0, 1)]))
    assert gs.count("GPG") == 1 and gs.count("CNOT") == 0
    assert gs.count("RZ") == 4 and gs.count("RY") == 2
    assert nx.phase_distance(raw_unitary(gs), CNOT_MAT) < 1e-12


def test_three_cnot_circuit_becomes_three_gpg(rng):
    gs = decompose_su4(nx.haar_unitary(4, rng))
    r = rewrite_cnot_to_gpg(gs, merge=True)
    assert r.count("GPG") == 3 and r.count("CNOT") == 0
    assert nx.phase_distance(raw_unitary(gs), raw_unitary(r)) < 1e-10


def test_rewrite_refuses_gpg_input():
    with pytest.raises(UnsupportedGateError):
        rewrite_cnot_to_gpg(GateSequence(2, [GPG(0, 1, 0.3)]))


# -- printed circuit fixtures -----------------------------------------------------


@pytest.mark.parametrize(
    "channel, circuit, frozen",
    [
        (make_dephasing(0.5), DEPHASING_FIGURE_CIRCUIT, 6.385565036737262e-06),
        (make_amplitude_damping(0.5), AMPLITUDE_DAMPING_FIGURE_CIRCUIT, 6.785715214951971e-06),
    ],
)
def test_printed_circuits_with_opposite_rotation_sign(channel, circuit, frozen):
    pm = build_petz(channel, G0)
    err = average_gate_infidelity(ancilla_circuit_channel(negate_angles(circuit)), pm)
    assert err == pytest.approx(frozen, rel=1e-6)
    assert err <= 0.02


@pytest.mark.parametrize(
    "channel, circuit, frozen",
    [
        (make_dephasing(0.5), DEPHASING_FIGURE_CIRCUIT, 0.06768871603044102),
        (make_amplitude_damping(0.5), AMPLITUDE_DAMPING_FIGURE_CIRCUIT, 0.2616082848009115),
    ],
)
def test_printed_circuits_with_literal_rotation_sign(channel, circuit, frozen):
    pm = build_petz(channel, G0)
    err = average_gate_infidelity(ancilla_circuit_channel(circuit), pm)
    assert err == pytest.approx(frozen, rel=1e-6)


def test_compiled_petz_circuit_reproduces_channel():
    for ch in (make_dephasing(0.5), make_amplitude_damping(0.5)):
        pm = build_petz(ch, G0)
        gs = decompose_su4(dilate_rank2_analytic(pm).U)
        assert gs.cnot_count <= 3
        assert average_gate_infidelity(ancilla_circuit_channel(gs), pm) < 1e-12
