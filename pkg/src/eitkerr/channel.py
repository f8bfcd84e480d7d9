"""Collision-induced self/cross phase integrals and the effective Kerr gate.

The directed phase coefficient Phi[j, k] multiplies the photon number of
probe k in the phase picked up by probe j:

    Phi[j, k](z) = mu_jk * int_0^z cos^2 th_j(x) / cos^2 th_k(0)
                   * (g^2 n)^2 / (Om_k^2 (Om_j^2 + g^2 n v0/c)) dx

The gate built from them is U = exp[-i(phi_11 n1^2 + phi_22 n2^2 + phi_12 n1 n2)]
with phi_jj = Phi[j, j] and phi_12 the symmetrised cross term
(Phi[0, 1] + Phi[1, 0]) / 2, the value each probe sees from its partner.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .errors import CalibrationError, DomainError
from .params import (ChannelConfig, PhysicalParams, _check_z, integrate_profile,
                     mixing_angle)

CALIBRATION_TOL = 1e-8
SCALE_RANGE = (1e-6, 1e6)


class Knob(enum.Enum):
    SCALE_MU12 = "mu12"
    SCALE_LENGTH = "length"


class Transfer(enum.Enum):
    TO_ATOM_LASER = "atom"
    STAYS_LIGHT = "light"


@dataclass(frozen=True)
class PhaseIntegrals:
    phi: np.ndarray
    bare: np.ndarray
    amplitude_ratio: np.ndarray
    z_eval: float

    @property
    def cross(self) -> float:
        return 0.5 * (self.phi[0, 1] + self.phi[1, 0])


@dataclass(frozen=True)
class KerrGateSpec:
    phi_11: float
    phi_22: float
    phi_12: float
    transfer_1: Transfer = Transfer.TO_ATOM_LASER
    transfer_2: Transfer = Transfer.TO_ATOM_LASER
    amp_1: float = 1.0
    amp_2: float = 1.0
    # Phi[0, 1] - Phi[1, 0]; a number-diagonal unitary can only carry the mean
    cross_asymmetry: float = 0.0

    def __post_init__(self):
        vals = (self.phi_11, self.phi_22, self.phi_12, self.amp_1, self.amp_2)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("gate phases and amplitudes must be finite")
        if self.amp_1 <= 0 or self.amp_2 <= 0:
            raise DomainError("gate amplitude factors must be positive")

    @property
    def amps(self):
        return (self.amp_1, self.amp_2)

    @property
    def transfers(self):
        return (self.transfer_1, self.transfer_2)

    def unit_amplitudes(self) -> KerrGateSpec:
        """Same phases, amplitude factors set to 1 (input-referenced frame)."""
        return replace(self, amp_1=1.0, amp_2=1.0)


def _bare_integrand(params, channel, j, k):
    pj, pk = channel.profiles[j], channel.profiles[k]
    g2n2 = params.g2n ** 2
    k2 = params.omega_cross_sq
    cos2_k0 = math.cos(float(mixing_angle(params, pk, 0.0))) ** 2

    def f(x):
        oj2 = pj(x) ** 2
        ok2 = pk(x) ** 2
        # cos^2 th_j = Om_j^2 / (Om_j^2 + K^2)
        return g2n2 * oj2 / ((oj2 + k2) ** 2 * ok2) / cos2_k0

    return f


def phase_integrals(params: PhysicalParams, channel: ChannelConfig, z=None) -> PhaseIntegrals:
    z = params.L if z is None else float(_check_z(params, z))
    mu = params.mu_matrix
    bare = np.zeros((2, 2))
    for j in range(2):
        for k in range(2):
            points = channel.profiles[j].breakpoints() + channel.profiles[k].breakpoints()
            # phases need 1e-10 absolute; the bare integral may be ~(c/v0)^2 * L
            epsabs = 1e-11 / abs(mu[j, k]) if mu[j, k] else 1e-11
            bare[j, k] = integrate_profile(_bare_integrand(params, channel, j, k), 0.0, z,
                                           points=points, epsabs=epsabs, epsrel=1e-12)
    ratio = np.array([
        math.cos(float(mixing_angle(params, p, z))) / math.cos(float(mixing_angle(params, p, 0.0)))
        for p in channel.profiles])
    return PhaseIntegrals(phi=mu * bare, bare=bare, amplitude_ratio=ratio, z_eval=z)


def apply_knob(params: PhysicalParams, knob: Knob, s: float) -> PhysicalParams:
    if knob is Knob.SCALE_MU12:
        mu = params.mu_matrix
        mu[0, 1] *= s
        mu[1, 0] *= s
        return params.with_mu(mu)
    return replace(params, L=params.L * s)


def cross_phase(params: PhysicalParams, channel: ChannelConfig) -> float:
    return phase_integrals(params, channel).cross


def calibrate_to_pi(params: PhysicalParams, channel: ChannelConfig,
                    knob: Knob = Knob.SCALE_MU12) -> float:
    """Scale factor s for ``knob`` that brings the cross phase at z = L to pi."""
    base = cross_phase(params, channel)
    if not (math.isfinite(base) and base > 0):
        raise CalibrationError(f"cross phase at scale 1 must be finite and positive, got {base}")
    if knob is Knob.SCALE_MU12:
        # exactly linear in mu12
        s = math.pi / base
        if not SCALE_RANGE[0] <= s <= SCALE_RANGE[1]:
            raise CalibrationError(f"required mu12 scale {s:.3e} outside {SCALE_RANGE}")
        return s

    def residual(s):
        return cross_phase(apply_knob(params, knob, s), channel) - math.pi

    lo = hi = 1.0
    f_lo = f_hi = base - math.pi
    if f_lo == 0.0:
        return 1.0
    # cross phase grows monotonically with L
    while f_hi < 0:
        lo, f_lo = hi, f_hi
        hi *= 2.0
        if hi > SCALE_RANGE[1]:
            raise CalibrationError("no bracket for the pi phase below the maximum length scale")
        f_hi = residual(hi)
    while f_lo > 0:
        hi, f_hi = lo, f_lo
        lo *= 0.5
        if lo < SCALE_RANGE[0]:
            raise CalibrationError("no bracket for the pi phase above the minimum length scale")
        f_lo = residual(lo)
    if f_hi == 0.0:
        return hi
    if f_lo == 0.0:
        return lo
    s = optimize.brentq(residual, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(residual(s)) >= CALIBRATION_TOL:
        raise CalibrationError(f"calibration residual {residual(s):.3e} above {CALIBRATION_TOL}")
    return s


def calibrate(params: PhysicalParams, channel: ChannelConfig,
              knob: Knob = Knob.SCALE_MU12) -> tuple[PhysicalParams, float]:
    s = calibrate_to_pi(params, channel, knob)
    return apply_knob(params, knob, s), s


def lock_self_phases(params: PhysicalParams, channel: ChannelConfig) -> PhysicalParams:
    """Rescale mu_11, mu_22 so each non-zero self phase at z = L is exactly 2 pi.

    With identical profiles on both probes this is the condition
    mu_11 = mu_22 = 2 mu_12 on a pi-calibrated channel.
    """
    phi = phase_integrals(params, channel).phi
    mu = params.mu_matrix
    for j in range(2):
        if mu[j, j] != 0.0:
            mu[j, j] *= 2.0 * math.pi / phi[j, j]
    return params.with_mu(mu)


def gate_spec(params: PhysicalParams, channel: ChannelConfig,
              calibrated: PhaseIntegrals | None = None) -> KerrGateSpec:
    integrals = phase_integrals(params, channel) if calibrated is None else calibrated
    if abs(integrals.z_eval - params.L) > 1e-12 * params.L:
        raise DomainError("gate phases must be evaluated at the medium exit z = L")
    phi = integrals.phi
    amps, flags = [], []
    for profile, to_atom in zip(channel.profiles, channel.transfers):
        theta_L = float(mixing_angle(params, profile, params.L))
        if to_atom:
            flags.append(Transfer.TO_ATOM_LASER)
            amps.append(math.sqrt(params.c / params.v0) * math.sin(theta_L))
        else:
            flags.append(Transfer.STAYS_LIGHT)
            theta_0 = float(mixing_angle(params, profile, 0.0))
            amps.append(math.cos(theta_L) / math.cos(theta_0))
    return KerrGateSpec(phi_11=float(phi[0, 0]), phi_22=float(phi[1, 1]),
                        phi_12=float(integrals.cross),
                        transfer_1=flags[0], transfer_2=flags[1],
                        amp_1=amps[0], amp_2=amps[1],
                        cross_asymmetry=float(phi[0, 1] - phi[1, 0]))


def build_gate(params: PhysicalParams, channel: ChannelConfig,
               knob: Knob = Knob.SCALE_MU12) -> tuple[PhysicalParams, KerrGateSpec]:
    """Calibrate the cross phase to pi, lock self phases to 2 pi, return the gate."""
    tuned, _ = calibrate(params, channel, knob)
    tuned = lock_self_phases(tuned, channel)
    return tuned, gate_spec(tuned, channel)
