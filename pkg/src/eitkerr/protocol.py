"""Beam splitting, the two transfer channels and Bell-measurement swapping.

Mode order inside a channel always follows the probe index: mode 0 carries
probe 1 and mode 1 carries probe 2, whichever of them became an atom laser.
Channel 1 (FIG2C_CH1) turns probe 1 into atom laser 1A and keeps probe 2 as
light 1L; channel 2 (FIG2C_CH2) keeps probe 1 as light 2L and turns probe 2
into atom laser 2A. The Bell measurement acts on (1L, 2L) and leaves the
atom lasers (1A, 2A) entangled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import KerrGateSpec, Transfer
from .errors import GateError
from .params import ChannelConfig, Label
from .states import (PHASE_TOL, CatBasis, CoherentSuperposition, FockVector,
                     apply_kerr, coherent_fock, entanglement_entropy, project_cats,
                     scale_modes)

SQRT_HALF = 1.0 / math.sqrt(2.0)


class Bell(enum.Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"


# coefficients over |s>_1L |t>_2L, index 0 = |+>, 1 = |->
BELL_WEIGHTS = {
    Bell.PSI_PLUS: np.array([[0, 1], [1, 0]]) * SQRT_HALF,
    Bell.PSI_MINUS: np.array([[0, 1], [-1, 0]]) * SQRT_HALF,
    Bell.PHI_PLUS: np.array([[1, 0], [0, 1]]) * SQRT_HALF,
    Bell.PHI_MINUS: np.array([[1, 0], [0, -1]]) * SQRT_HALF,
}


@dataclass(frozen=True)
class BellBasis:
    basis_1: CatBasis
    basis_2: CatBasis

    def state(self, outcome: Bell) -> CoherentSuperposition:
        w = BELL_WEIGHTS[outcome]
        out = None
        for (s, t), c in np.ndenumerate(w):
            if c == 0:
                continue
            piece = self.basis_1.state(1 - 2 * s).tensor(self.basis_2.state(1 - 2 * t)).scaled(c)
            out = piece if out is None else out + piece
        return out

    def fock(self, outcome: Bell, cutoff: int) -> np.ndarray:
        f1 = [self.basis_1.fock(+1, cutoff), self.basis_1.fock(-1, cutoff)]
        f2 = [self.basis_2.fock(+1, cutoff), self.basis_2.fock(-1, cutoff)]
        w = BELL_WEIGHTS[outcome]
        return sum(w[s, t] * np.outer(f1[s], f2[t]) for s in range(2) for t in range(2))


@dataclass(frozen=True)
class SwapOutcome:
    outcome: Bell
    probability: float
    atom_state: CoherentSuperposition | None
    entropy: float


def split(input_amp: complex) -> tuple[complex, complex]:
    """Noiseless 50/50 division of a coherent amplitude."""
    half = complex(input_amp) * SQRT_HALF
    return half, half


def _check_gate(config: ChannelConfig, gate: KerrGateSpec):
    expected = tuple(Transfer.TO_ATOM_LASER if t else Transfer.STAYS_LIGHT
                     for t in config.transfers)
    if gate.transfers != expected:
        raise GateError(f"gate transfers {[t.value for t in gate.transfers]} do not match "
                        f"configuration {config.label.value}")
    k = gate.phi_12 / math.pi
    if abs(k - round(k)) * math.pi > PHASE_TOL or round(k) % 2 != 1:
        raise GateError(f"cross phase {gate.phi_12!r} is not calibrated to pi")
    for phi in (gate.phi_11, gate.phi_22):
        k = phi / (2 * math.pi)
        if abs(k - round(k)) * 2 * math.pi > PHASE_TOL:
            raise GateError(f"self phase {phi!r} is not a multiple of 2 pi")


def channel_inputs(config: ChannelConfig, in1: complex, in2: complex):
    """Amplitudes that reach the medium: the two swapping channels receive half of each probe."""
    if config.label in (Label.FIG2C_CH1, Label.FIG2C_CH2):
        return split(in1)[0], split(in2)[0]
    return complex(in1), complex(in2)


def run_channel(config: ChannelConfig, in1: complex, in2: complex,
                gate: KerrGateSpec) -> CoherentSuperposition:
    """Output of one transfer channel for coherent probe inputs |in1> x |in2>."""
    _check_gate(config, gate)
    a, b = channel_inputs(config, in1, in2)
    return apply_kerr(gate, CoherentSuperposition.coherent(a, b))


def _canonical(x: complex) -> complex:
    return x if (x.real, x.imag) >= (-x.real, -x.imag) else -x


def light_basis(state: CoherentSuperposition, mode: int) -> CatBasis:
    return CatBasis(_canonical(complex(state.amps[0, mode])))


def swap(ch1: CoherentSuperposition, ch2: CoherentSuperposition,
         bell: BellBasis | None = None) -> list[SwapOutcome]:
    """Bell measurement on the light modes of the two channel outputs.

    ``ch1`` is (1A, 1L), ``ch2`` is (2L, 2A). Without an explicit basis
    the cat bases are built on the channels' own light amplitudes.
    """
    if bell is None:
        bell = BellBasis(light_basis(ch1, 1), light_basis(ch2, 0))
    product = ch1.tensor(ch2)  # modes 1A, 1L, 2L, 2A
    out = []
    for outcome in Bell:
        p, post = project_cats(product, (1, 2), (bell.basis_1, bell.basis_2),
                               BELL_WEIGHTS[outcome])
        entropy = entanglement_entropy(post) if post is not None else 0.0
        out.append(SwapOutcome(outcome, p, post, entropy))
    return out


def sample_outcome(outcomes: list[SwapOutcome], rng: np.random.Generator) -> SwapOutcome:
    p = np.array([o.probability for o in outcomes])
    return outcomes[rng.choice(len(outcomes), p=p / p.sum())]


def channel_bell_basis(alpha, beta, gate_1: KerrGateSpec, gate_2: KerrGateSpec) -> BellBasis:
    """Bell basis on the emitted light: 1L carries beta/sqrt2, 2L carries alpha/sqrt2."""
    return BellBasis(CatBasis(split(beta)[0] * gate_1.amp_2),
                     CatBasis(split(alpha)[0] * gate_2.amp_1))


def run_swap(alpha, beta, config_1: ChannelConfig, gate_1: KerrGateSpec,
             config_2: ChannelConfig, gate_2: KerrGateSpec):
    """Split, both transfer channels, then the Bell measurement.

    Returns (channel 1 state, channel 2 state, outcomes).
    """
    if config_1.label is not Label.FIG2C_CH1 or config_2.label is not Label.FIG2C_CH2:
        raise GateError("swapping needs a FIG2C_CH1 and a FIG2C_CH2 channel")
    ch1 = run_channel(config_1, alpha, beta, gate_1)
    ch2 = run_channel(config_2, alpha, beta, gate_2)
    return ch1, ch2, swap(ch1, ch2, channel_bell_basis(alpha, beta, gate_1, gate_2))


# ---- all-Fock oracle ----------------------------------------------------

def fock_channel(a, b, gate: KerrGateSpec, cutoff: int, rescale=True) -> FockVector:
    """|a, b> on the Fock grid, Kerr phases applied numerically, then rescaled."""
    vec = FockVector(np.outer(coherent_fock(a, cutoff), coherent_fock(b, cutoff)))
    vec = apply_kerr(gate, vec, rescale=False)
    return scale_modes(vec, gate.amps) if rescale else vec


def swap_fock(alpha, beta, gate_1: KerrGateSpec, gate_2: KerrGateSpec, cutoff: int = 48):
    """The swap pipeline carried out entirely on truncated Fock tensors.

    Returns {Bell outcome: (probability, normalised (1A, 2A) FockVector or None)}.
    """
    a, _ = split(alpha)
    b, _ = split(beta)
    ch1 = fock_channel(a, b, gate_1, cutoff).amps   # (1A, 1L)
    ch2 = fock_channel(a, b, gate_2, cutoff).amps   # (2L, 2A)
    bell = channel_bell_basis(alpha, beta, gate_1, gate_2)
    out = {}
    for outcome in Bell:
        target = bell.fock(outcome, cutoff)
        atoms = np.einsum("xl,mz,lm->xz", ch1, ch2, target.conj())
        p = float(np.vdot(atoms, atoms).real)
        out[outcome] = (p, FockVector(atoms / math.sqrt(p)) if p > 0 else None)
    return out
