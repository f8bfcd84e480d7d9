import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eitkerr.channel import KerrGateSpec, Transfer
from eitkerr.errors import BasisMismatchError, GateError
from eitkerr.params import ChannelConfig, ControlProfile, Label
from eitkerr.protocol import (BELL_WEIGHTS, Bell, BellBasis, channel_bell_basis, fock_channel,
                              run_channel, run_swap, sample_outcome, split, swap, swap_fock)
from eitkerr.states import (CatBasis, CoherentSuperposition, entanglement_entropy, fidelity,
                            four_term_cat, to_fock)

from conftest import ideal_gate

A, L = Transfer.TO_ATOM_LASER, Transfer.STAYS_LIGHT
P = ControlProfile.constant(1.0)
CH = {lab: ChannelConfig(P, P, lab) for lab in Label}
G1 = ideal_gate(A, L)
G2 = ideal_gate(L, A)
D = 48


def coefficient(state, amps):
    i = int(np.argmin(np.abs(state.amps - np.asarray(amps)).sum(axis=1)))
    assert np.allclose(state.amps[i], amps, atol=1e-12)
    return state.coeffs[i]


def test_split_examples():
    assert split(0) == (0, 0)
    a, b = split(math.sqrt(2))
    assert a == pytest.approx(1.0, abs=1e-15) and b == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=1e3, allow_nan=False))
def test_split_conserves_intensity(x):
    a, b = split(x)
    assert abs(a) ** 2 + abs(b) ** 2 == pytest.approx(abs(x) ** 2, rel=1e-14, abs=1e-300)


def test_no_partner_no_entanglement():
    out = run_channel(CH[Label.FIG2B], 1.0, 0.0, G1)
    assert len(out) == 1
    assert entanglement_entropy(out) == pytest.approx(0.0, abs=1e-12)


def test_fig2a_gives_four_term_cat():
    out = run_channel(CH[Label.FIG2A], 1.0, 1.0, ideal_gate())
    assert fidelity(out, four_term_cat(1.0, 1.0)) == pytest.approx(1.0, abs=1e-14)


def test_fig2c_channel_one_matches_atom_light_pair():
    x = 1 / math.sqrt(2)
    out = run_channel(CH[Label.FIG2C_CH1], 1.0, 1.0, G1)
    pair = CoherentSuperposition([0.5, 0.5, 0.5, -0.5], [[x, x], [x, -x], [-x, x], [-x, -x]])
    assert fidelity(out, pair) == pytest.approx(1.0, abs=1e-14)
    oracle = fock_channel(x, x, G1, D)
    assert fidelity(to_fock(out, D), oracle) >= 1 - 1e-10


def test_fig2c_channel_two_swaps_roles():
    out = run_channel(CH[Label.FIG2C_CH2], 2.0, 0.6, ideal_gate(L, A, amp_2=1.5))
    a, b = 2 / math.sqrt(2), 0.6 / math.sqrt(2) * 1.5
    # light carries the cat on mode 0, the atom laser is |+-b> on mode 1
    assert coefficient(out, [a, b]) == pytest.approx(0.5)
    assert coefficient(out, [-a, -b]) == pytest.approx(-0.5)


def test_gate_must_match_channel():
    with pytest.raises(GateError, match="transfers"):
        run_channel(CH[Label.FIG2C_CH1], 1.0, 1.0, G2)


def test_gate_must_be_calibrated():
    with pytest.raises(GateError, match="pi"):
        run_channel(CH[Label.FIG2A], 1.0, 1.0, KerrGateSpec(2 * math.pi, 2 * math.pi, 3.0))
    with pytest.raises(GateError, match="self phase"):
        run_channel(CH[Label.FIG2A], 1.0, 1.0, KerrGateSpec(1.0, 2 * math.pi, math.pi))


def test_bell_basis_orthonormal():
    bell = BellBasis(CatBasis(0.8), CatBasis(1.1j))
    states = [bell.state(o) for o in Bell]
    gram = np.array([[s.inner(t) for t in states] for s in states])
    assert np.allclose(gram, np.eye(4), atol=1e-10)


def swap_outcomes(alpha, beta, g1=G1, g2=G2):
    return run_swap(alpha, beta, CH[Label.FIG2C_CH1], g1, CH[Label.FIG2C_CH2], g2)


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(min_magnitude=0.05, max_magnitude=2.0, allow_nan=False),
       st.complex_numbers(min_magnitude=0.05, max_magnitude=2.0, allow_nan=False))
def test_outcome_probabilities_complete(alpha, beta):
    _, _, outcomes = swap_outcomes(alpha, beta)
    assert sum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-10)
    for o in outcomes:
        assert o.atom_state.is_normalized()
        assert o.entropy > 0


def test_psi_minus_is_maximally_entangled_for_equal_inputs():
    for x in (0.3, 1.0, 2.0):
        _, _, outcomes = swap_outcomes(x, x)
        psi_minus = next(o for o in outcomes if o.outcome is Bell.PSI_MINUS)
        assert psi_minus.entropy == pytest.approx(1.0, abs=1e-9)


def norms(x):
    # N+- for the cat basis on amplitude x
    return 2 + 2 * math.exp(-2 * abs(x) ** 2), 2 - 2 * math.exp(-2 * abs(x) ** 2)


@pytest.mark.parametrize("alpha,beta", [(1.0, 2.0), (0.5, 1.5), (2.0, 0.7)])
def test_outcome_coefficient_ratios(alpha, beta):
    g1, g2 = ideal_gate(A, L, 1.3, 0.8), ideal_gate(L, A, 0.9, 1.1)
    _, _, outcomes = swap_outcomes(alpha, beta, g1, g2)
    a = alpha / math.sqrt(2) * g1.amp_1
    b = beta / math.sqrt(2) * g2.amp_2
    n1p, n1m = norms(beta / math.sqrt(2) * g1.amp_2)    # light 1L
    n2p, n2m = norms(alpha / math.sqrt(2) * g2.amp_1)   # light 2L
    by = {o.outcome: o.atom_state for o in outcomes}
    for o, sign in ((Bell.PSI_PLUS, 1), (Bell.PSI_MINUS, -1)):
        ratio = coefficient(by[o], [a, -b]) / coefficient(by[o], [-a, b])
        assert ratio == pytest.approx(sign * math.sqrt(n1p * n2m / (n1m * n2p)), rel=1e-10)
    for o, sign in ((Bell.PHI_PLUS, 1), (Bell.PHI_MINUS, -1)):
        ratio = coefficient(by[o], [a, b]) / coefficient(by[o], [-a, -b])
        assert ratio == pytest.approx(sign * math.sqrt(n1p * n2p / (n1m * n2m)), rel=1e-10)


def test_exchange_symmetry():
    _, _, left = swap_outcomes(0.7, 1.6)
    _, _, right = swap_outcomes(1.6, 0.7)
    p = {o.outcome: o.probability for o in left}
    q = {o.outcome: o.probability for o in right}
    assert p[Bell.PSI_PLUS] == pytest.approx(q[Bell.PSI_PLUS], abs=1e-10)
    assert p[Bell.PSI_MINUS] == pytest.approx(q[Bell.PSI_MINUS], abs=1e-10)


def test_pre_measurement_state_is_product_across_channels():
    ch1, ch2, _ = swap_outcomes(0.8, 1.2)
    d = 20
    joint = np.einsum("ab,cd->abcd", to_fock(ch1, d).amps, to_fock(ch2, d).amps)
    s = np.linalg.svd(joint.reshape(d * d, d * d), compute_uv=False)
    p = s ** 2 / np.sum(s ** 2)
    p = p[p > 1e-300]
    assert float(-(p * np.log2(p)).sum()) < 1e-9


@pytest.mark.parametrize("alpha,beta", [(1.0, 1.0), (2.0, 0.5), (1.5j, 1 - 1j)])
def test_symbolic_swap_matches_fock_pipeline(alpha, beta):
    _, _, outcomes = swap_outcomes(alpha, beta)
    oracle = swap_fock(alpha, beta, G1, G2, D)
    for o in outcomes:
        p, vec = oracle[o.outcome]
        assert o.probability == pytest.approx(p, abs=1e-10)
        assert fidelity(to_fock(o.atom_state, D), vec) >= 1 - 1e-10


def test_swap_rejects_wrong_basis():
    ch1, ch2, _ = swap_outcomes(1.0, 1.0)
    with pytest.raises(BasisMismatchError):
        swap(ch1, ch2, BellBasis(CatBasis(0.3), CatBasis(0.3)))


def test_default_basis_equals_explicit():
    ch1, ch2, outcomes = swap_outcomes(1.0, 2.0)
    default = swap(ch1, ch2)
    for a, b in zip(outcomes, default):
        assert a.probability == pytest.approx(b.probability, abs=1e-15)


def test_sampling_is_seeded():
    _, _, outcomes = swap_outcomes(1.0, 1.0)
    rng1, rng2 = np.random.default_rng(7), np.random.default_rng(7)
    a = [sample_outcome(outcomes, rng1).outcome for _ in range(200)]
    b = [sample_outcome(outcomes, rng2).outcome for _ in range(200)]
    assert a == b
    rng = np.random.default_rng(11)
    shots = [sample_outcome(outcomes, rng).outcome for _ in range(20000)]
    for o in outcomes:
        assert shots.count(o.outcome) / len(shots) == pytest.approx(o.probability, abs=0.02)


def test_bell_weights_normalised():
    for w in BELL_WEIGHTS.values():
        assert np.sum(np.abs(w) ** 2) == pytest.approx(1.0, abs=1e-15)


def test_channel_bell_basis_amplitudes():
    bell = channel_bell_basis(1.0, 2.0, ideal_gate(A, L, 1, 0.5), ideal_gate(L, A, 3.0, 1))
    assert bell.basis_1.amp == pytest.approx(2.0 / math.sqrt(2) * 0.5)
    assert bell.basis_2.amp == pytest.approx(1.0 / math.sqrt(2) * 3.0)
