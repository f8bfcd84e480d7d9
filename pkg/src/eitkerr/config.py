"""Flat key = value run configuration.

Lines are ``key = value``; ``#`` starts a comment. Complex amplitudes use
Python literal syntax (``1+0.5j``). Unknown keys are rejected so that a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass
from pathlib import Path

from .channel import Knob
from .errors import ConfigError, EITKerrError
from .params import ChannelConfig, ControlProfile, Label, PhysicalParams

_SECTION = "run"

DEFAULTS = {
    # physics, SI units
    "g2n": None, "v0": None, "c": None, "L": None,
    "mu11": "0", "mu22": "0", "mu12": "0",
    "mu_b": "0", "mu_b1": "0", "mu_b2": "0",
    "gamma": "0", "delta1": "0", "delta2": "0", "dk1": "0", "dk2": "0",
    "lambda_probe": "780e-9", "velocity_spread": "0",
    # transferring control field (tanh ramp)
    "ramp_omega_in": None, "ramp_omega_out": None, "ramp_center": None, "ramp_width": None,
    # control field of a probe that stays light
    "hold_shape": "constant", "hold_omega": None, "hold_omega_mid": "0",
    "hold_center": "0", "hold_center_up": "0", "hold_width": "1",
    # protocol
    "knob": "mu12", "alpha": "1", "beta": "1", "frame": "input",
    "cutoff": "48", "seed": "20240611",
    # validity and propagation
    "pulse_duration": "1e-5", "prop_label": "fig2a", "prop_mu": "calibrated",
    "prop_nz": "128", "prop_nt": "101", "prop_window": "1e-2",
    "prop_shape": "gaussian", "prop_width": "1e-3", "prop_intensity": "1",
}

FRAMES = ("input", "physical")


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    channels: dict
    knob: Knob
    alpha: complex
    beta: complex
    frame: str
    cutoff: int
    seed: int
    pulse_duration: float
    prop_label: Label
    prop_mu: str
    prop_nz: int
    prop_nt: int
    prop_window: float
    prop_shape: str
    prop_width: float
    prop_intensity: float
    digest: str


def _parse_text(text: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    raw = dict(parser[_SECTION])
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    values = {k: raw.get(k, v) for k, v in DEFAULTS.items()}
    missing = sorted(k for k, v in values.items() if v is None)
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    return values


def _get(values, key, kind):
    try:
        return kind(values[key].strip())
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for '{key}': {values[key]!r}") from exc


def build_channels(values) -> dict:
    f = lambda k: _get(values, k, float)
    ramp = ControlProfile.tanh_ramp(f("ramp_omega_in"), f("ramp_omega_out"),
                                    f("ramp_center"), f("ramp_width"))
    shape = values["hold_shape"].strip()
    if shape == "constant":
        hold = ControlProfile.constant(f("hold_omega"))
    elif shape == "double":
        hold = ControlProfile.double_ramp(f("hold_omega"), f("hold_omega_mid"), f("hold_omega"),
                                          f("hold_center"), f("hold_center_up"), f("hold_width"))
    else:
        raise ConfigError(f"bad value for 'hold_shape': {shape!r} (constant or double)")
    return {
        Label.FIG2A: ChannelConfig(ramp, ramp, Label.FIG2A),
        Label.FIG2B: ChannelConfig(ramp, hold, Label.FIG2B),
        Label.FIG2C_CH1: ChannelConfig(ramp, hold, Label.FIG2C_CH1),
        Label.FIG2C_CH2: ChannelConfig(hold, ramp, Label.FIG2C_CH2),
    }


def _enum(values, key, cls):
    try:
        return cls(values[key].strip())
    except ValueError as exc:
        allowed = ", ".join(m.value for m in cls)
        raise ConfigError(f"bad value for '{key}': {values[key]!r} ({allowed})") from exc


def parse_config(text: str) -> RunConfig:
    values = _parse_text(text)
    f = lambda k: _get(values, k, float)
    try:
        params = PhysicalParams(
            g2n=f("g2n"), v0=f("v0"), c=f("c"), L=f("L"),
            mu=((f("mu11"), f("mu12")), (f("mu12"), f("mu22"))),
            mu_b=f("mu_b"), mu_bj=(f("mu_b1"), f("mu_b2")), gamma=f("gamma"),
            delta=(f("delta1"), f("delta2")), dk=(f("dk1"), f("dk2")),
            lambda_probe=f("lambda_probe"), velocity_spread=f("velocity_spread"))
        channels = build_channels(values)
    except ConfigError:
        raise
    except EITKerrError as exc:
        raise ConfigError(f"invalid physical parameters: {exc}") from exc

    frame = values["frame"].strip()
    if frame not in FRAMES:
        raise ConfigError(f"bad value for 'frame': {frame!r} ({', '.join(FRAMES)})")
    prop_mu = values["prop_mu"].strip()
    if prop_mu not in ("zero", "calibrated"):
        raise ConfigError(f"bad value for 'prop_mu': {prop_mu!r} (zero or calibrated)")
    prop_shape = values["prop_shape"].strip()
    if prop_shape not in ("gaussian", "flat"):
        raise ConfigError(f"bad value for 'prop_shape': {prop_shape!r} (gaussian or flat)")
    cutoff = _get(values, "cutoff", int)
    if cutoff < 2:
        raise ConfigError("'cutoff' must be at least 2")

    return RunConfig(
        params=params, channels=channels, knob=_enum(values, "knob", Knob),
        alpha=_get(values, "alpha", complex), beta=_get(values, "beta", complex),
        frame=frame, cutoff=cutoff, seed=_get(values, "seed", int),
        pulse_duration=f("pulse_duration"), prop_label=_enum(values, "prop_label", Label),
        prop_mu=prop_mu, prop_nz=_get(values, "prop_nz", int), prop_nt=_get(values, "prop_nt", int),
        prop_window=f("prop_window"), prop_shape=prop_shape, prop_width=f("prop_width"),
        prop_intensity=f("prop_intensity"),
        digest=hashlib.sha256(text.encode()).hexdigest())


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
