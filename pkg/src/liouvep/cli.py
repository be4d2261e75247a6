"""Command-line interface.

Subcommands: ``spectrum`` (branch-tracked eigenvalue sweep), ``ep``
(exceptional-point search), ``evolve`` (deterministic hybrid evolution),
``trajectories`` (Monte Carlo ensemble with postselection) and ``verify``
(closed-form vs numeric cross-checks).  Tabular output is CSV, structured
reports are JSON, and every run writes a manifest sufficient to reproduce it.
Relative output paths resolve against ``$LIOUVEP_OUTDIR`` (default ".").
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .evolve import propagate
from .lindblad import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    QubitStateSpec,
    hybrid_liouvillian,
    liouvillian,
    qubit_state,
)
from .models import model_from_json, preset_model
from .spectra import locate_ep, sweep
from .trajectories import (
    InefficientDetector,
    TrajectoryConfig,
    TwoDetector,
    run_ensemble,
)
from .verify import run_verification

SWEEP_COLUMNS = ["param", "q", "branch", "re_lambda", "im_lambda", "residual"]
EVOLVE_COLUMNS = ["t", "sx", "sy", "sz", "raw_trace"]
TRAJ_COLUMNS = ["t", "obs", "mean", "sem", "n_accepted", "n_total"]
EVENT_COLUMNS = ["traj_id", "t_jump", "channel", "detector"]


def _outdir():
    return Path(os.environ.get("LIOUVEP_OUTDIR", "."))


def _resolve_out(name):
    p = Path(name)
    if not p.is_absolute():
        p = _outdir() / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in columns})


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _write_manifest(out_path, args, output_files, acceptance=None, started=None):
    manifest = {
        "tool_version": __version__,
        "command": args.command,
        "parameters": {
            k: (str(v) if isinstance(v, Path) else v)
            for k, v in vars(args).items()
            if k not in ("func", "command")
        },
        "master_seed": getattr(args, "seed", None),
        "timestamps": {
            "started": started,
            "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
        "output_files": [Path(f).name for f in output_files],
        "acceptance": acceptance,
    }
    path = out_path.with_suffix(out_path.suffix + ".manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    return path


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _build_model(args, gamma=None):
    g = args.gamma if gamma is None else gamma
    if args.model in ("example1", "example2"):
        return preset_model(args.model, args.omega, g)
    with open(args.model) as fh:
        return model_from_json(json.load(fh))


def _model_family(args):
    if args.model not in ("example1", "example2"):
        raise ValueError("parameter sweeps require a named preset model")
    return lambda g: preset_model(args.model, args.omega, g)


def cmd_spectrum(args):
    started = _now()
    family = _model_family(args)
    grid = np.linspace(args.sweep_min, args.sweep_max, args.sweep_steps)
    track = sweep(family, grid, args.q)
    out = _resolve_out(args.out)
    _write_csv(out, SWEEP_COLUMNS, track.to_rows(args.q))
    files = [out]
    if args.plot:
        files.append(_plot_spectrum(track, out))
    _write_manifest(out, args, files, started=started)
    print(f"wrote {out}")
    return 0


def cmd_ep(args):
    started = _now()
    family = _model_family(args)
    est = locate_ep(family, args.q, bracket=(args.sweep_min, args.sweep_max))
    out = _resolve_out(args.out)
    with open(out, "w") as fh:
        json.dump(est.to_report_dict(), fh, indent=2)
    _write_manifest(out, args, [out], started=started)
    if est.found:
        print(f"EP at parameter {est.parameter_value:.9g} (order {est.order})")
    else:
        print(
            f"no EP in bracket [{args.sweep_min}, {args.sweep_max}]; "
            f"smallest gap {est.gap_at_ep:.3e} at {est.parameter_value:.9g}"
        )
    return 0


def cmd_evolve(args):
    started = _now()
    model = _build_model(args)
    sup = hybrid_liouvillian(model, args.q)
    psi0 = qubit_state(QubitStateSpec(theta=args.theta, phi=args.phi))
    rho0 = np.outer(psi0, psi0.conj())
    times = np.linspace(0.0, args.t_max, args.samples)
    result = propagate(sup, rho0, times)
    rows = []
    for k, t in enumerate(result.times):
        rho = result.states[k]
        rows.append(
            {
                "t": float(t),
                "sx": float(np.trace(SIGMA_X @ rho).real),
                "sy": float(np.trace(SIGMA_Y @ rho).real),
                "sz": float(np.trace(SIGMA_Z @ rho).real),
                "raw_trace": float(result.raw_traces[k]),
            }
        )
    out = _resolve_out(args.out)
    _write_csv(out, EVOLVE_COLUMNS, rows)
    files = [out]
    if args.plot:
        files.append(_plot_curves(rows, out))
    _write_manifest(out, args, files, started=started)
    print(f"wrote {out}")
    return 0


def cmd_trajectories(args):
    started = _now()
    if (args.q is None) == (args.eta is None):
        raise ValueError("specify exactly one of --q (two-detector) or --eta (inefficient)")
    setup = TwoDetector(args.q) if args.q is not None else InefficientDetector(args.eta)
    model = _build_model(args)
    psi0 = qubit_state(QubitStateSpec(theta=args.theta, phi=args.phi))
    cfg = TrajectoryConfig(
        t_max=args.t_max,
        n_traj=args.n_traj,
        master_seed=args.seed,
        sample_times=np.linspace(0.0, args.t_max, args.samples),
        dt=args.dt,
    )
    records, stats = run_ensemble(model, setup, cfg, psi0)
    out = _resolve_out(args.out)
    _write_csv(out, TRAJ_COLUMNS, stats.to_rows())
    files = [out]
    if args.events:
        ev_path = _resolve_out(args.events)
        ev_rows = [
            {
                "traj_id": r.index,
                "t_jump": float(ev.time),
                "channel": ev.channel,
                "detector": ev.detector,
            }
            for r in records
            for ev in r.jump_events
        ]
        _write_csv(ev_path, EVENT_COLUMNS, ev_rows)
        files.append(ev_path)
    if args.plot:
        files.append(_plot_stats(stats, out))
    acceptance = {"accepted": stats.n_accepted, "total": stats.n_total}
    _write_manifest(out, args, files, acceptance=acceptance, started=started)
    if stats.n_accepted == 0:
        print(
            f"empty postselection: 0 of {stats.n_total} trajectories accepted "
            f"(means are NaN); see {out}"
        )
    else:
        print(f"wrote {out} ({stats.n_accepted}/{stats.n_total} accepted)")
    return 0


def cmd_verify(args):
    started = _now()
    examples = ["example1", "example2"] if args.model == "all" else [args.model]
    out = _resolve_out(args.out)
    reports = [run_verification(ex, n_samples=args.samples, seed=args.seed) for ex in examples]
    payload = {"reports": [r.to_dict() for r in reports]}
    with open(out, "w") as fh:
        json.dump(payload, fh, indent=2)
    dev_path = out.with_name(out.stem + ".deviations.json")
    deviations = [d for r in reports for d in r.to_dict()["deviations"]]
    with open(dev_path, "w") as fh:
        json.dump(deviations, fh, indent=2)
    _write_manifest(out, args, [out, dev_path], started=started)
    ok = all(r.passed for r in reports)
    for r in reports:
        for c in r.checks:
            status = "PASS" if c.passed else ("FAIL" if c.hard else "DEVIATES")
            print(
                f"[{status}] {c.name}: {c.n_samples - c.n_failed}/{c.n_samples} "
                f"(max err {c.max_error:.2e})"
            )
    print(f"deviations logged: {len(deviations)} -> {dev_path}")
    return 0 if ok else 1


def _plot_spectrum(track, out):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for b in range(track.n_branches):
        axes[0].plot(track.parameter_grid, track.eigenvalues[b].real, label=f"branch {b}")
        axes[1].plot(track.parameter_grid, track.eigenvalues[b].imag)
    axes[0].set_xlabel("parameter")
    axes[0].set_ylabel("Re lambda")
    axes[1].set_xlabel("parameter")
    axes[1].set_ylabel("Im lambda")
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    path = out.with_suffix(".svg")
    fig.savefig(path)
    plt.close(fig)
    return path


def _plot_curves(rows, out):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = [r["t"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for key, color in (("sx", "tab:red"), ("sy", "tab:blue"), ("sz", "tab:green")):
        ax.plot(t, [r[key] for r in rows], color=color, label=key)
    ax.set_xlabel("t")
    ax.legend()
    fig.tight_layout()
    path = out.with_suffix(".svg")
    fig.savefig(path)
    plt.close(fig)
    return path


def _plot_stats(stats, out):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 3.5))
    for name in stats.means:
        ax.errorbar(stats.times, stats.means[name], yerr=stats.sems[name], label=name)
    ax.set_xlabel("t")
    ax.legend()
    fig.tight_layout()
    path = out.with_suffix(".svg")
    fig.savefig(path)
    plt.close(fig)
    return path


def _add_model_flags(p, need_gamma=True):
    p.add_argument("--model", required=True, help="example1, example2, or a JSON model file")
    p.add_argument("--omega", type=float, default=1.0)
    if need_gamma:
        p.add_argument("--gamma", type=float, required=True)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="liouvep",
        description="Hybrid-generator spectra, exceptional points, and postselected trajectories",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="branch-tracked eigenvalue sweep")
    _add_model_flags(p, need_gamma=False)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--sweep-min", type=float, required=True)
    p.add_argument("--sweep-max", type=float, required=True)
    p.add_argument("--sweep-steps", type=int, default=201)
    p.add_argument("--out", default="spectrum.csv")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("ep", help="locate an exceptional point in a bracket")
    _add_model_flags(p, need_gamma=False)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--sweep-min", type=float, required=True, help="bracket lower edge")
    p.add_argument("--sweep-max", type=float, required=True, help="bracket upper edge")
    p.add_argument("--out", default="ep.json")
    p.set_defaults(func=cmd_ep)

    p = sub.add_parser("evolve", help="deterministic hybrid evolution of a pure state")
    _add_model_flags(p)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=5.0)
    p.add_argument("--samples", type=int, default=101)
    p.add_argument("--out", default="evolve.csv")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("trajectories", help="Monte Carlo ensemble with postselection")
    _add_model_flags(p)
    p.add_argument("--q", type=float, default=None, help="two-detector protocol")
    p.add_argument("--eta", type=float, default=None, help="inefficient-detector protocol")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--n-traj", type=int, default=5000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-max", type=float, default=5.0)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--out", default="trajectories.csv")
    p.add_argument("--events", default=None, help="also write the raw jump event log")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_trajectories)

    p = sub.add_parser("verify", help="closed-form vs numeric cross-checks")
    p.add_argument("--model", default="all", choices=["example1", "example2", "all"])
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--out", default="verify.json")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
