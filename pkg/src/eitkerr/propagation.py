"""Semiclassical probe-envelope integrator and validity checks.

The envelope equation

    [(1 + r) d/dt + (c + r v0) d/dz] E_j + i sum_k (g^2 n)^2 / Om_k^4 mu_jk |E_k|^2 E_j
        = r v0 (d/dz ln Om_j) E_j,        r = g^2 n / Om_j^2,

is first order, so it is solved along characteristics dt/dz = 1/V_gr. Each
channel is marched in z on its own retarded time labels t (lab time is
t + tau_j(z)); along a characteristic it reduces to an ODE for E_j, which
is advanced together with tau_j by classical RK4. The partner intensity
seen by channel j is interpolated onto channel j's labels when the two
delays differ.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import expit

from .channel import phase_integrals
from .errors import BlowUpError, DomainError, StabilityError
from .params import (ChannelConfig, PhysicalParams, group_velocity, mixing_angle,
                     transit_time)

# RK4 is stable for h * |rate| up to ~2.78 on the real axis, ~2.83 on the imaginary one
STABILITY_LIMIT = 2.5

# validity thresholds
ETA_MAX = 0.01
DOPPLER_FACTOR = 0.1
DEPHASING_RATIO = 100.0
ADIABATIC_MAX = 1.0


@dataclass(frozen=True)
class EnvelopeGrid:
    z_points: np.ndarray
    t_points: np.ndarray
    e1: np.ndarray          # (nz + 1, nt), channel 1 on its own retarded labels
    e2: np.ndarray
    delays: np.ndarray      # (2, nz + 1): tau_j(z), lab time = t + tau_j(z)
    scheme_meta: dict = field(default_factory=dict)

    @property
    def envelopes(self):
        return (self.e1, self.e2)

    def amplitude_ratio(self, j: int) -> float:
        e = self.envelopes[j]
        return float(np.max(np.abs(e[-1])) / np.max(np.abs(e[0])))

    def phase_at(self, j: int, t: float) -> float:
        """Accumulated phase -arg(E(L)/E(0)) on the label nearest to t."""
        i = int(np.argmin(np.abs(self.t_points - t)))
        e = self.envelopes[j]
        return float(-np.angle(e[-1, i] / e[0, i]))


def gaussian_pulse(amplitude, center, width):
    def f(t):
        return amplitude * np.exp(-0.5 * ((np.asarray(t) - center) / width) ** 2)
    return f


def flat_top_pulse(amplitude, t_on, t_off, rise):
    """Plateau between t_on and t_off with logistic edges of time constant ``rise``."""
    def f(t):
        t = np.asarray(t, dtype=float)
        return amplitude * expit((t - t_on) / rise) * expit((t_off - t) / rise)
    return f


def _coefficients(params: PhysicalParams, channel: ChannelConfig, z):
    """Per-channel linear rate, Kerr prefactors and slowness at z."""
    mu = params.mu_matrix
    omega = np.array([p(z) for p in channel.profiles])
    dlog = np.array([p.log_derivative(z) for p in channel.profiles])
    r = params.g2n / omega ** 2
    denom = params.c + r * params.v0
    lin = r * params.v0 * dlog / denom
    kerr = mu * (params.g2n ** 2 / omega ** 4)[None, :] / denom[:, None]
    slowness = (1.0 + r) / denom
    return lin, kerr, slowness


def max_rate(params, channel, peak_intensity, z_samples):
    """Largest |d ln E / dz| over z_samples, using the linear amplitude law for |E_k|^2."""
    th0 = np.array([float(mixing_angle(params, p, 0.0)) for p in channel.profiles])
    worst = 0.0
    for z in z_samples:
        lin, kerr, _ = _coefficients(params, channel, z)
        th = np.array([float(mixing_angle(params, p, z)) for p in channel.profiles])
        intensity = np.asarray(peak_intensity) * (np.cos(th) / np.cos(th0)) ** 2
        rate = np.abs(lin) + np.abs(kerr) @ intensity
        worst = max(worst, float(np.max(rate)))
    return worst


def _partner_intensity(intens, t_points, shift):
    """|E_k|^2 at labels t + shift, zero outside the sampled window."""
    if shift == 0.0:
        return intens
    spline = CubicSpline(t_points, intens, extrapolate=False)
    out = spline(t_points + shift)
    return np.nan_to_num(out, nan=0.0)


def integrate(params: PhysicalParams, channel: ChannelConfig, input_pulses, nz: int,
              t_points) -> EnvelopeGrid:
    """March both envelopes from z = 0 to L on nz uniform steps."""
    if nz < 1:
        raise DomainError("nz must be at least 1")
    t_points = np.asarray(t_points, dtype=float)
    if t_points.ndim != 1 or t_points.size < 4 or np.any(np.diff(t_points) <= 0):
        raise DomainError("t_points must be an increasing grid of at least 4 points")
    z_points = np.linspace(0.0, params.L, nz + 1)
    h = params.L / nz

    e0 = np.array([np.asarray(f(t_points), dtype=complex) for f in input_pulses])
    if e0.shape != (2, t_points.size):
        raise DomainError("need one input pulse per probe")
    peak = np.max(np.abs(e0), axis=1) ** 2
    samples = np.linspace(0.0, params.L, 4 * nz + 1)
    samples = np.union1d(samples, [b for p in channel.profiles for b in p.breakpoints()
                                   if 0.0 <= b <= params.L])
    rate = max_rate(params, channel, peak, samples)
    cfl = h * rate
    if cfl > STABILITY_LIMIT:
        need = STABILITY_LIMIT / rate
        raise StabilityError(f"step {h:.3e} m too large (h*rate = {cfl:.3g}); "
                             f"need h <= {need:.3e} m, nz >= {math.ceil(params.L / need)}",
                             required_step=need)

    def rhs(z, e, tau):
        lin, kerr, slowness = _coefficients(params, channel, z)
        intens = np.abs(e) ** 2
        de = np.empty_like(e)
        for j in range(2):
            phase_rate = np.zeros(t_points.size)
            for k in range(2):
                if kerr[j, k] == 0.0:
                    continue
                phase_rate += kerr[j, k] * _partner_intensity(intens[k], t_points, tau[j] - tau[k])
            de[j] = (lin[j] - 1j * phase_rate) * e[j]
        return de, slowness

    e = e0.copy()
    tau = np.zeros(2)
    out = np.empty((nz + 1, 2, t_points.size), dtype=complex)
    delays = np.empty((2, nz + 1))
    out[0], delays[:, 0] = e, tau
    for i in range(nz):
        z = z_points[i]
        k1, s1 = rhs(z, e, tau)
        k2, s2 = rhs(z + h / 2, e + h / 2 * k1, tau + h / 2 * s1)
        k3, s3 = rhs(z + h / 2, e + h / 2 * k2, tau + h / 2 * s2)
        k4, s4 = rhs(z + h, e + h * k3, tau + h * s3)
        e = e + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        tau = tau + h / 6 * (s1 + 2 * s2 + 2 * s3 + s4)
        if not np.all(np.isfinite(e)):
            raise BlowUpError(f"non-finite envelope after step {i + 1} (z = {z + h:.6g} m)")
        out[i + 1], delays[:, i + 1] = e, tau

    meta = {"dz": h, "dt": float(t_points[1] - t_points[0]), "nz": nz,
            "nt": int(t_points.size), "cfl": cfl, "max_rate": rate}
    return EnvelopeGrid(z_points, t_points, out[:, 0].copy(), out[:, 1].copy(), delays, meta)


def expected_phase(params: PhysicalParams, channel: ChannelConfig, intensities) -> np.ndarray:
    """Plane-wave Kerr phase sum_k Phi[j, k] |E_k(0)|^2 / c of each channel.

    Exact for the envelope equation when both probes see the same control
    profile; otherwise only indicative.
    """
    phi = phase_integrals(params, channel).phi
    return phi @ np.asarray(intensities, dtype=float) / params.c


def compare_with_quadrature(params, channel, grid: EnvelopeGrid, t_center=None):
    """Rows (quantity, numeric, expected, relative error) at z = L."""
    rows = []
    t_center = float(np.mean(grid.t_points[[0, -1]])) if t_center is None else t_center
    i = int(np.argmin(np.abs(grid.t_points - t_center)))
    intens = [abs(e[0, i]) ** 2 for e in grid.envelopes]
    phases = expected_phase(params, channel, intens) if np.any(params.mu_matrix) else (0.0, 0.0)
    for j, profile in enumerate(channel.profiles):
        th0 = float(mixing_angle(params, profile, 0.0))
        thL = float(mixing_angle(params, profile, params.L))
        checks = [(f"delay_{j + 1}", grid.delays[j, -1], transit_time(params, profile, params.L)),
                  (f"amplitude_ratio_{j + 1}", grid.amplitude_ratio(j), math.cos(thL) / math.cos(th0)),
                  (f"phase_{j + 1}", grid.phase_at(j, t_center), float(phases[j]))]
        for name, got, want in checks:
            err = abs(got - want) / abs(want) if want else abs(got - want)
            rows.append((name, float(got), float(want), float(err)))
    return rows


def linear_error(params, channel, grid: EnvelopeGrid) -> float:
    """Worst relative error of a mu = 0 run against the exact amplitude law and delay."""
    worst = 0.0
    for j, profile in enumerate(channel.profiles):
        ratio = (math.cos(float(mixing_angle(params, profile, params.L)))
                 / math.cos(float(mixing_angle(params, profile, 0.0))))
        e = grid.envelopes[j]
        exact = e[0] * ratio
        worst = max(worst, float(np.max(np.abs(e[-1] - exact)) / np.max(np.abs(exact))))
        tau = transit_time(params, profile, params.L)
        worst = max(worst, abs(grid.delays[j, -1] - tau) / tau)
    return worst


def convergence_study(params, channel, input_pulses, t_points, nz_base, refinements=3):
    """Errors at nz_base * 2^m, m = 0..refinements, and the observed orders."""
    if np.any(params.mu_matrix):
        raise DomainError("convergence study needs mu = 0 (exact reference)")
    sizes = [nz_base * 2 ** m for m in range(refinements + 1)]
    errors = [linear_error(params, channel, integrate(params, channel, input_pulses, n, t_points))
              for n in sizes]
    orders = [math.log2(a / b) if a > 0 and b > 0 else math.nan
              for a, b in zip(errors, errors[1:])]
    return sizes, errors, orders


@dataclass(frozen=True)
class ValidityReport:
    eta: tuple
    eta_bound: tuple
    transmission: tuple
    doppler_margin: float
    doppler_ratio: float
    collision_ratio: float
    dephasing_ratio: float
    adiabatic_parameter: float
    loss_ok: bool
    doppler_ok: bool
    dephasing_ok: bool
    adiabatic_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.loss_ok and self.doppler_ok and self.dephasing_ok and self.adiabatic_ok

    def as_text(self) -> str:
        buf = io.StringIO()
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if isinstance(value, tuple):
                value = " ".join(format(v, ".17g") for v in value)
            elif isinstance(value, float):
                value = format(value, ".17g")
            buf.write(f"{name} = {value}\n")
        buf.write(f"all_ok = {self.all_ok}\n")
        return buf.getvalue()


def validity_check(params: PhysicalParams, channel: ChannelConfig, pulse_duration: float,
                   n_samples: int = 4001) -> ValidityReport:
    """Loss bound, Doppler, dephasing and adiabaticity checks for one channel."""
    detuning = np.abs(np.asarray(params.delta) + np.asarray(params.mu_bj))
    eta_bound = tuple(float(d * params.L / params.v0) for d in detuning)
    # the bound is all that is known about the loss; report the worst case
    eta = eta_bound
    transmission = tuple(math.exp(-x) for x in eta)

    margins = []
    for dk, mub in zip(params.dk, params.mu_bj):
        gap = 1.0 / params.L - mub / params.v0
        margins.append(math.inf if dk == 0 else gap / abs(dk))
    margin = min(margins)
    doppler_ratio = params.velocity_spread / params.v0
    mub_max = max(abs(m) for m in params.mu_bj)
    collision_ratio = math.inf if mub_max == 0 else params.v0 / (mub_max * params.L)
    doppler_ok = margin > 0 and doppler_ratio <= DOPPLER_FACTOR * margin and collision_ratio > 1

    z = np.linspace(0.0, params.L, n_samples)
    z = np.union1d(z, [b for p in channel.profiles for b in p.breakpoints() if 0 <= b <= params.L])
    vmin = min(float(np.min(group_velocity(params, p, z))) for p in channel.profiles)
    dephasing_ratio = vmin * pulse_duration / params.lambda_probe
    adiabatic = max(float(np.max(np.abs(p.log_derivative(z)) * group_velocity(params, p, z)))
                    for p in channel.profiles) * pulse_duration

    return ValidityReport(
        eta=eta, eta_bound=eta_bound, transmission=transmission,
        doppler_margin=margin, doppler_ratio=doppler_ratio, collision_ratio=collision_ratio,
        dephasing_ratio=dephasing_ratio, adiabatic_parameter=adiabatic,
        loss_ok=max(eta_bound) <= ETA_MAX, doppler_ok=bool(doppler_ok),
        dephasing_ok=dephasing_ratio >= DEPHASING_RATIO, adiabatic_ok=adiabatic < ADIABATIC_MAX)


def grid_to_text(grid: EnvelopeGrid) -> str:
    """Columnar dump: z, lab time per channel, Re/Im of each envelope."""
    buf = io.StringIO()
    buf.write("z,t_label,t_lab_1,re_e1,im_e1,t_lab_2,re_e2,im_e2\n")
    for iz, z in enumerate(grid.z_points):
        for it, t in enumerate(grid.t_points):
            e1, e2 = grid.e1[iz, it], grid.e2[iz, it]
            vals = (z, t, t + grid.delays[0, iz], e1.real, e1.imag,
                    t + grid.delays[1, iz], e2.real, e2.imag)
            buf.write(",".join(format(v, ".17g") for v in vals) + "\n")
    return buf.getvalue()
