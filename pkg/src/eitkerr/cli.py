"""Command-line scenario runner.

    python -m eitkerr --scenario calibrate --config configs/default.cfg --out runs/cal

Every scenario writes CSV / key-value files into ``--out`` plus a
``manifest.json`` recording the config hash and library versions. Numeric
outputs do not depend on wall-clock time; the timestamp lives only in the
manifest.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import platform
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .channel import apply_knob, build_gate, calibrate_to_pi, cross_phase, gate_spec
from .config import RunConfig, load_config
from .errors import EITKerrError
from .params import Label, validate_channel
from .propagation import (compare_with_quadrature, convergence_study, flat_top_pulse,
                          gaussian_pulse, grid_to_text, integrate, validity_check)
from .protocol import (channel_inputs, fock_channel, run_channel, run_swap, sample_outcome,
                       swap_fock)
from .states import (CoherentSuperposition, apply_kerr, entanglement_entropy, fidelity,
                     superposition_to_csv, to_fock)

SCENARIOS = ("cat", "atom-light", "swap", "propagate", "calibrate", "validity")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _gate(cfg: RunConfig, label: Label):
    """Calibrated gate for a channel, or the bare gate when there is no cross coupling."""
    channel = cfg.channels[label]
    validate_channel(cfg.params, channel)
    if cfg.params.mu_matrix[0, 1] == 0.0:
        gate = gate_spec(cfg.params, channel)
    else:
        _, gate = build_gate(cfg.params, channel, cfg.knob)
    return gate.unit_amplitudes() if cfg.frame == "input" else gate


def _gate_rows(gate):
    return [("phi_11", gate.phi_11), ("phi_22", gate.phi_22), ("phi_12", gate.phi_12),
            ("cross_asymmetry", gate.cross_asymmetry),
            ("transfer_1", gate.transfer_1.value), ("transfer_2", gate.transfer_2.value),
            ("amp_1", gate.amp_1), ("amp_2", gate.amp_2)]


def _two_mode_scenario(cfg: RunConfig, label: Label, out: Path, stem: str):
    gate = _gate(cfg, label)
    channel = cfg.channels[label]
    a, b = channel_inputs(channel, cfg.alpha, cfg.beta)
    if gate.phi_12 == 0.0:
        # no cross coupling configured: nothing to calibrate
        state = apply_kerr(gate, CoherentSuperposition.coherent(a, b))
    else:
        state = run_channel(channel, cfg.alpha, cfg.beta, gate)
    oracle = fock_channel(a, b, gate, cfg.cutoff)
    fid = fidelity(to_fock(state, cfg.cutoff), oracle)
    entropy = entanglement_entropy(state)
    (out / f"{stem}_state.csv").write_text(superposition_to_csv(state))
    rows = [("label", label.value), ("frame", cfg.frame), ("alpha_re", cfg.alpha.real),
            ("alpha_im", cfg.alpha.imag), ("beta_re", cfg.beta.real), ("beta_im", cfg.beta.imag),
            *_gate_rows(gate), ("cutoff", cfg.cutoff), ("fidelity_vs_fock", fid),
            ("entropy_ebits", entropy)]
    _write_csv(out / f"{stem}_summary.csv", ("key", "value"), rows)
    print(f"{stem}: entropy = {entropy:.12f} ebit, fidelity vs Fock = {fid:.15f}")
    return [f"{stem}_state.csv", f"{stem}_summary.csv"]


def run_cat(cfg, out, args):
    return _two_mode_scenario(cfg, Label.FIG2A, out, "cat")


def run_atom_light(cfg, out, args):
    return _two_mode_scenario(cfg, Label.FIG2B, out, "atom_light")


def run_swap_scenario(cfg, out, args):
    c1, c2 = cfg.channels[Label.FIG2C_CH1], cfg.channels[Label.FIG2C_CH2]
    g1, g2 = _gate(cfg, Label.FIG2C_CH1), _gate(cfg, Label.FIG2C_CH2)
    _, _, outcomes = run_swap(cfg.alpha, cfg.beta, c1, g1, c2, g2)
    oracle = swap_fock(cfg.alpha, cfg.beta, g1, g2, cfg.cutoff)
    rows, files = [], ["outcomes.csv"]
    for o in outcomes:
        p_fock, v_fock = oracle[o.outcome]
        fid = fidelity(to_fock(o.atom_state, cfg.cutoff), v_fock) if o.atom_state else math.nan
        rows.append((o.outcome.value, o.probability, o.entropy, p_fock, fid))
        name = f"atom_state_{o.outcome.name.lower()}.csv"
        if o.atom_state is not None:
            (out / name).write_text(superposition_to_csv(o.atom_state))
            files.append(name)
    _write_csv(out / "outcomes.csv",
               ("outcome", "probability", "entropy_ebits", "fock_probability", "fidelity_vs_fock"),
               rows)
    total = sum(o.probability for o in outcomes)
    print(f"swap: {len(outcomes)} outcomes, probability sum = {total:.17g}")
    for r in rows:
        print(f"  {r[0]:5s} p = {r[1]:.12f}  S = {r[2]:.12f} ebit  F_fock = {r[4]:.15f}")
    if args.sample:
        rng = np.random.default_rng(cfg.seed)
        draws = [(i, sample_outcome(outcomes, rng).outcome.value) for i in range(args.sample)]
        _write_csv(out / "samples.csv", ("shot", "outcome"), draws)
        files.append("samples.csv")
    return files


def run_propagate(cfg, out, args):
    label = cfg.prop_label
    channel = cfg.channels[label]
    params = cfg.params
    if cfg.prop_mu == "zero":
        params = params.with_mu(((0.0, 0.0), (0.0, 0.0)))
    elif params.mu_matrix[0, 1] != 0.0:
        params, _ = build_gate(params, channel, cfg.knob)
    half = 0.5 * cfg.prop_window
    t = np.linspace(-half, half, cfg.prop_nt)
    amp = math.sqrt(cfg.prop_intensity)
    if cfg.prop_shape == "gaussian":
        pulse = gaussian_pulse(amp, 0.0, cfg.prop_width)
    else:
        pulse = flat_top_pulse(amp, -0.5 * cfg.prop_width, 0.5 * cfg.prop_width,
                               0.05 * cfg.prop_width)
    grid = integrate(params, channel, (pulse, pulse), cfg.prop_nz, t)
    (out / "grid.csv").write_text(grid_to_text(grid))
    rows = compare_with_quadrature(params, channel, grid, 0.0)
    _write_csv(out / "comparison.csv", ("quantity", "numeric", "expected", "relative_error"), rows)
    for r in rows:
        print(f"{r[0]:18s} numeric = {r[1]:.12g}  expected = {r[2]:.12g}  rel.err = {r[3]:.3e}")
    files = ["grid.csv", "comparison.csv"]
    if args.grid_refine:
        linear = params.with_mu(((0.0, 0.0), (0.0, 0.0)))
        sizes, errors, orders = convergence_study(linear, channel, (pulse, pulse), t,
                                                  cfg.prop_nz, args.grid_refine)
        conv = [(n, e, orders[i - 1] if i else math.nan) for i, (n, e) in enumerate(zip(sizes, errors))]
        _write_csv(out / "convergence.csv", ("nz", "error", "observed_order"), conv)
        for n, e, o in conv:
            print(f"nz = {n:6d}  error = {e:.3e}  order = {o:.3f}")
        files.append("convergence.csv")
    return files


def run_calibrate(cfg, out, args):
    rows = []
    for label, channel in cfg.channels.items():
        validate_channel(cfg.params, channel)
        s = calibrate_to_pi(cfg.params, channel, cfg.knob)
        residual = abs(cross_phase(apply_knob(cfg.params, cfg.knob, s), channel) - math.pi)
        _, gate = build_gate(cfg.params, channel, cfg.knob)
        rows.append((label.value, cfg.knob.value, s, residual, gate.phi_11, gate.phi_22,
                     gate.phi_12, gate.cross_asymmetry, gate.amp_1, gate.amp_2))
        print(f"{label.value:10s} scale = {s:.17g}  residual = {residual:.3e}")
    _write_csv(out / "calibration.csv",
               ("label", "knob", "scale", "residual", "phi_11", "phi_22", "phi_12",
                "cross_asymmetry", "amp_1", "amp_2"), rows)
    return ["calibration.csv"]


def run_validity(cfg, out, args):
    rows, files = [], ["validity.csv"]
    for label, channel in cfg.channels.items():
        report = validity_check(cfg.params, channel, cfg.pulse_duration)
        name = f"validity_{label.value}.txt"
        (out / name).write_text(report.as_text())
        files.append(name)
        rows.append((label.value, max(report.eta_bound), min(report.transmission),
                     report.loss_ok, report.doppler_ok, report.dephasing_ok,
                     report.adiabatic_ok, report.all_ok))
        print(f"{label.value:10s} eta_bound = {max(report.eta_bound):.3e}  loss={report.loss_ok} "
              f"doppler={report.doppler_ok} dephasing={report.dephasing_ok} "
              f"adiabatic={report.adiabatic_ok}")
    _write_csv(out / "validity.csv",
               ("label", "eta_bound", "transmission", "loss_ok", "doppler_ok", "dephasing_ok",
                "adiabatic_ok", "all_ok"), rows)
    return files


RUNNERS = {"cat": run_cat, "atom-light": run_atom_light, "swap": run_swap_scenario,
           "propagate": run_propagate, "calibrate": run_calibrate, "validity": run_validity}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eitkerr", description=__doc__.splitlines()[0])
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--cutoff", type=int, default=None, help="Fock cutoff override")
    p.add_argument("--sample", type=int, default=0, metavar="N",
                   help="swap: draw N seeded Bell outcomes")
    p.add_argument("--grid-refine", type=int, default=0, metavar="R",
                   help="propagate: convergence study over R grid doublings")
    return p


def _manifest(args, cfg: RunConfig, files):
    return {
        "scenario": args.scenario,
        "config": str(args.config),
        "config_sha256": cfg.digest,
        "seed": cfg.seed,
        "cutoff": cfg.cutoff,
        "files": files,
        "versions": {"eitkerr": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.cutoff is not None:
            overrides["cutoff"] = args.cutoff
        if overrides:
            cfg = replace(cfg, **overrides)
        args.out.mkdir(parents=True, exist_ok=True)
        files = RUNNERS[args.scenario](cfg, args.out, args)
        (args.out / "manifest.json").write_text(
            json.dumps(_manifest(args, cfg, files), indent=2) + "\n")
    except EITKerrError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
