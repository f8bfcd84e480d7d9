"""Physical constants, control-field profiles and per-point EIT quantities.

Rates are in rad/s and lengths in m. The atom-light coupling and the
atomic density only ever enter as the product g^2 n, which is stored as a
single number (``g2n``). Likewise the collision shifts ``mu_b`` and
``mu_bj`` are the mean-field values mu_b*n and mu_bj*n.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate
from scipy.special import expit

from .errors import DomainError, QuadratureError

# z may overshoot L by this relative amount (floating round-off in callers)
_Z_SLACK = 1e-12
TRANSFER_TOL = 1e-3
# a probe that stays light may keep theta(L) up to this (sin^2 leakage <= 1%)
STAY_TOL = 0.1


@dataclass(frozen=True)
class PhysicalParams:
    g2n: float
    v0: float
    c: float
    L: float
    mu: tuple = ((0.0, 0.0), (0.0, 0.0))
    mu_b: float = 0.0
    mu_bj: tuple = (0.0, 0.0)
    gamma: float = 0.0
    delta: tuple = (0.0, 0.0)
    dk: tuple = (0.0, 0.0)
    lambda_probe: float = 780e-9
    velocity_spread: float = 0.0

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.shape != (2, 2):
            raise DomainError(f"mu must be 2x2, got shape {mu.shape}")
        object.__setattr__(self, "mu", tuple(map(tuple, mu.tolist())))
        for name in ("mu_bj", "delta", "dk"):
            pair = tuple(float(x) for x in getattr(self, name))
            if len(pair) != 2:
                raise DomainError(f"{name} needs one value per channel")
            object.__setattr__(self, name, pair)

        scalars = [self.g2n, self.v0, self.c, self.L, self.mu_b, self.gamma,
                   self.lambda_probe, self.velocity_spread]
        if not all(math.isfinite(x) for x in scalars) or not np.all(np.isfinite(mu)):
            raise DomainError("all physical parameters must be finite")
        if self.g2n <= 0:
            raise DomainError(f"g2n must be positive, got {self.g2n}")
        if not 0 < self.v0 < self.c:
            raise DomainError(f"need c > v0 > 0, got v0={self.v0}, c={self.c}")
        if self.L <= 0:
            raise DomainError(f"L must be positive, got {self.L}")
        if self.gamma < 0:
            raise DomainError("gamma must be non-negative")
        if mu[0, 1] != mu[1, 0]:
            raise DomainError("collision matrix must be symmetric (mu12 == mu21)")

    @property
    def mu_matrix(self) -> np.ndarray:
        return np.array(self.mu)

    @property
    def omega_cross_sq(self) -> float:
        """Control intensity g^2 n v0 / c at which tan(theta) = 1."""
        return self.g2n * self.v0 / self.c

    def with_mu(self, mu) -> PhysicalParams:
        return replace(self, mu=mu)


class Shape(enum.Enum):
    CONSTANT = "constant"
    TANH_RAMP = "tanh"
    DOUBLE_RAMP = "double"


@dataclass(frozen=True)
class ControlProfile:
    """Space-dependent control Rabi frequency Omega_0(z).

    TANH_RAMP goes from ``omega_in`` to ``omega_out`` around ``center``.
    DOUBLE_RAMP goes down from ``omega_in`` to ``omega_mid`` around
    ``center`` and back up to ``omega_out`` around ``center_up``.
    """

    shape: Shape
    omega_in: float
    omega_out: float | None = None
    center: float = 0.0
    width: float = 1.0
    omega_mid: float | None = None
    center_up: float | None = None

    def __post_init__(self):
        if self.omega_out is None:
            object.__setattr__(self, "omega_out", self.omega_in)
        if self.shape is Shape.CONSTANT:
            object.__setattr__(self, "omega_out", self.omega_in)
        if not (self.omega_in > 0 and self.omega_out > 0):
            raise DomainError("control Rabi frequencies must be positive")
        if self.width <= 0:
            raise DomainError("ramp width must be positive")
        if self.shape is Shape.DOUBLE_RAMP:
            if self.omega_mid is None or self.omega_mid <= 0:
                raise DomainError("DOUBLE_RAMP needs a positive omega_mid")
            if self.center_up is None or self.center_up < self.center:
                raise DomainError("DOUBLE_RAMP needs center_up >= center")

    @classmethod
    def constant(cls, omega):
        return cls(Shape.CONSTANT, omega)

    @classmethod
    def tanh_ramp(cls, omega_in, omega_out, center, width):
        return cls(Shape.TANH_RAMP, omega_in, omega_out, center, width)

    @classmethod
    def double_ramp(cls, omega_in, omega_mid, omega_out, center, center_up, width):
        return cls(Shape.DOUBLE_RAMP, omega_in, omega_out, center, width,
                   omega_mid=omega_mid, center_up=center_up)

    # logistic steps and their complements, each evaluated directly so the
    # weak end keeps full relative precision when omega_in/omega_out is huge
    def _steps(self, z):
        x1 = 2.0 * (z - self.center) / self.width
        steps = [(expit(x1), expit(-x1))]
        if self.shape is Shape.DOUBLE_RAMP:
            x2 = 2.0 * (z - self.center_up) / self.width
            steps.append((expit(x2), expit(-x2)))
        return steps

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.shape is Shape.CONSTANT:
            return np.full_like(z, self.omega_in)[()]
        steps = self._steps(z)
        s1, c1 = steps[0]
        if self.shape is Shape.TANH_RAMP:
            return (self.omega_in * c1 + self.omega_out * s1)[()]
        s2, c2 = steps[1]
        # the dip weight c2 - c1 = s1 - s2 is formed as s1 * c2 - c1 * s2
        return (self.omega_in * c1 + self.omega_mid * (s1 * c2 - c1 * s2)
                + self.omega_out * s2)[()]

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        if self.shape is Shape.CONSTANT:
            return np.zeros_like(z)[()]
        steps = self._steps(z)
        s1, c1 = steps[0]
        ds1 = 2.0 * s1 * c1 / self.width
        if self.shape is Shape.TANH_RAMP:
            return ((self.omega_out - self.omega_in) * ds1)[()]
        s2, c2 = steps[1]
        ds2 = 2.0 * s2 * c2 / self.width
        return ((self.omega_mid - self.omega_in) * ds1
                + (self.omega_out - self.omega_mid) * ds2)[()]

    def log_derivative(self, z):
        return self.derivative(z) / self(z)

    def breakpoints(self):
        if self.shape is Shape.CONSTANT:
            return ()
        if self.shape is Shape.TANH_RAMP:
            return (self.center,)
        return (self.center, self.center_up)


class Label(enum.Enum):
    FIG2A = "fig2a"
    FIG2B = "fig2b"
    FIG2C_CH1 = "fig2c_ch1"
    FIG2C_CH2 = "fig2c_ch2"


# True where the probe is mapped onto an atom laser at z = L
TRANSFERS = {
    Label.FIG2A: (True, True),
    Label.FIG2B: (True, False),
    Label.FIG2C_CH1: (True, False),
    Label.FIG2C_CH2: (False, True),
}


@dataclass(frozen=True)
class ChannelConfig:
    profile_1: ControlProfile
    profile_2: ControlProfile
    label: Label

    @property
    def profiles(self):
        return (self.profile_1, self.profile_2)

    @property
    def transfers(self):
        return TRANSFERS[self.label]


def _check_z(params, z):
    z = np.asarray(z, dtype=float)
    slack = _Z_SLACK * params.L
    if np.any(z < -slack) or np.any(z > params.L + slack) or np.any(~np.isfinite(z)):
        raise DomainError(f"z must lie in [0, {params.L}]")
    return np.clip(z, 0.0, params.L)


def mixing_angle(params: PhysicalParams, profile: ControlProfile, z):
    """theta(z) with tan^2(theta) = g^2 n v0 / (Omega_0^2 c)."""
    z = _check_z(params, z)
    return np.arctan2(math.sqrt(params.omega_cross_sq), profile(z))


def group_velocity(params: PhysicalParams, profile: ControlProfile, z):
    z = _check_z(params, z)
    r = params.g2n / profile(z) ** 2
    return (params.c + r * params.v0) / (1.0 + r)


def integrate_profile(f, a, b, points=(), epsabs=1e-10, epsrel=1e-12, limit=500):
    """Adaptive Gauss-Kronrod quadrature of f over [a, b].

    ``points`` are interior locations where the integrand changes quickly
    (ramp centres); they are clipped to (a, b).
    """
    if b == a:
        return 0.0
    inner = sorted({p for p in points if a < p < b})
    kwargs = dict(epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    if inner:
        kwargs["points"] = inner
    out = integrate.quad(f, a, b, **kwargs)
    value, abserr, info = out[0], out[1], out[2]
    tol = max(epsabs, epsrel * abs(value))
    # QUADPACK also flags round-off when the estimate already meets tolerance
    if abserr <= tol and math.isfinite(value):
        return value
    worst = None
    last = info.get("last", 0)
    if last and "elist" in info:
        k = int(np.argmax(info["elist"][:last]))
        worst = (float(info["alist"][k]), float(info["blist"][k]))
    reason = out[3] if len(out) > 3 else "error estimate above tolerance"
    raise QuadratureError(
        f"quadrature on [{a}, {b}] failed (estimate {abserr:.3e} > {tol:.3e}): {reason}",
        residual=abserr, worst_interval=worst)


def transit_time(params: PhysicalParams, profile: ControlProfile, z: float) -> float:
    """Group delay from the entrance to z, the integral of dz'/V_gr."""
    z = float(_check_z(params, z))

    if z == 0.0:
        return 0.0

    # v0/V_gr lies in [v0/c, 1], so the integral is O(z)
    def reduced_slowness(x):
        r = params.g2n / profile(x) ** 2
        return params.v0 * (1.0 + r) / (params.c + r * params.v0)

    value = integrate_profile(reduced_slowness, 0.0, z, points=profile.breakpoints(),
                              epsabs=1e-14 * z, epsrel=1e-13)
    return value / params.v0


def transfer_residuals(params: PhysicalParams, channel: ChannelConfig):
    """Per-mode deficit at z = L.

    cos^2(theta) for a mode that should become an atom laser, sin^2(theta)
    for a mode that should stay light.
    """
    out = []
    for profile, to_atom in zip(channel.profiles, channel.transfers):
        theta = float(mixing_angle(params, profile, params.L))
        out.append(math.cos(theta) ** 2 if to_atom else math.sin(theta) ** 2)
    return tuple(out)


def validate_channel(params: PhysicalParams, channel: ChannelConfig,
                     tol=TRANSFER_TOL, stay_tol=STAY_TOL):
    """Raise DomainError unless each mixing angle ends close enough to its target."""
    for j, (profile, to_atom) in enumerate(zip(channel.profiles, channel.transfers), 1):
        theta = float(mixing_angle(params, profile, params.L))
        target, allowed = (math.pi / 2, tol) if to_atom else (0.0, stay_tol)
        if abs(theta - target) > allowed:
            raise DomainError(
                f"{channel.label.value}: theta_{j}(L) = {theta:.6g} rad, "
                f"needs to be within {allowed} of {target:.6g}")
