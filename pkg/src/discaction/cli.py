"""Command-line front end: ``discaction <subcommand> [options]``.

The configuration file is JSON with a ``hamiltonian`` entry (the serialised
Hamiltonian, see :func:`discaction.hamiltonians.to_dict`) and optional run
parameters, e.g.::

    {"hamiltonian": {"kind": "radial_poly", "coeffs": [0, 4, -4]},
     "point": [0.5, 0.0], "t_span": [0, 1], "n_list": [8, 32, 128]}

Command-line flags override the matching config entries.  Exit codes: 0 when
every verdict is a witness (or the command produced its table), 2 when some
verdict is inconclusive, 1 on an error or a violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import verify as V
from .action import action_of_loop, calabi_report
from .errors import DiscActionError
from .flow import integrate_orbit
from .hamiltonians import describe, from_dict, mollifier_diagnostics
from .radial import circle_orbit_check, tangent_curve, tangent_spectrum
from .spectrum import _json_default, interior_mean_spectrum, radial_profile

log = logging.getLogger("discaction")

DEFAULT_HAMILTONIAN = {"kind": "radial_poly", "coeffs": [0.0, 4.0, -4.0]}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _hamiltonian(cfg: dict):
    return from_dict(cfg.get("hamiltonian", DEFAULT_HAMILTONIAN))


def _param(args, cfg: dict, name: str, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name, default)


class Output:
    """Writes named artefacts to ``--out`` (or stdout when unset)."""

    def __init__(self, out: str | None, fmt: str):
        self.dir = Path(out) if out else None
        self.fmt = fmt
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def _emit(self, name: str, text: str):
        if self.dir:
            (self.dir / name).write_text(text)
            log.info("wrote %s", self.dir / name)
        else:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")

    def json(self, name: str, obj):
        self._emit(f"{name}.json", json.dumps(obj, indent=2, default=_json_default))

    def table(self, name: str, rows: list[dict]):
        if self.fmt == "json":
            self.json(name, rows)
            return
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]))
            w.writeheader()
            for r in rows:
                w.writerow({k: (json.dumps(v, default=_json_default) if isinstance(v, (list, dict)) else v)
                            for k, v in r.items()})
        self._emit(f"{name}.csv", buf.getvalue())

    def array(self, name: str, header: list[str], data: np.ndarray):
        self.table(name, [dict(zip(header, map(float, row))) for row in data])


# ------------------------------------------------------------- subcommands


def cmd_orbit(args, cfg, out: Output) -> int:
    H = _hamiltonian(cfg)
    z0 = _param(args, cfg, "point", [0.5, 0.0])
    t_span = cfg.get("t_span", [0.0, 1.0])
    spu = _param(args, cfg, "steps", None)
    steps = int(np.ceil(spu * abs(t_span[1] - t_span[0]))) if spu else None
    tr = integrate_orbit(H, z0, tuple(t_span), steps=steps)
    summary = {"family": H.to_dict(), "start": list(z0), "end": tr.endpoint.tolist(),
               "closing_gap": tr.closing_gap, "action_integral": float(tr.action_integrand[-1]),
               "winding": (float((tr.angle_lift[-1] - tr.angle_lift[0]) / (2 * np.pi))
                           if tr.angle_lift is not None else None)}
    if tr.closing_gap <= 1e-6:
        summary["loop_action"] = action_of_loop(H, tr)
    out.json("orbit", summary)
    stride = max(1, (len(tr.times) - 1) // int(cfg.get("samples", 200)))
    data = np.column_stack([tr.times, tr.points, tr.action_integrand])[::stride]
    out.array("orbit_samples", ["t", "x", "y", "action"], data)
    return 0


def cmd_spectrum(args, cfg, out: Output) -> int:
    H = _hamiltonian(cfg)
    K = _param(args, cfg, "period_max", 16)
    grid = _param(args, cfg, "grid", 64)
    rep = interior_mean_spectrum(H, K, grid, with_calabi=True)
    out.json("spectrum", rep.to_dict())
    rows = [o.to_row() for o in rep.orbits]
    out.table("spectrum_orbits", rows)
    # plot data: mean action against radius
    out.table("mean_action_vs_radius",
              [{"radius": float(np.hypot(*o.point)), "period": o.period, "mean_action": o.mean_action}
               for o in sorted(rep.orbits, key=lambda o: np.hypot(*o.point))])
    return 0


def cmd_radial_spec(args, cfg, out: Output) -> int:
    H = _hamiltonian(cfg)
    prof = radial_profile(H)
    if prof is None:
        raise DiscActionError(f"{describe(H)} is not radial and autonomous")
    ts = tangent_spectrum(prof)
    rows = circle_orbit_check(H, ts, steps=_param(args, cfg, "steps", None) or 4000)
    out.json("radial_spectrum", ts.to_dict())
    out.table("radial_oracle", rows)
    out.array("tangent_curve", ["s", "g", "dg", "intercept"], tangent_curve(prof, int(cfg.get("samples", 201))))
    return 0


def cmd_calabi(args, cfg, out: Output) -> int:
    H = _hamiltonian(cfg)
    out.json("calabi", {"family": H.to_dict()} | calabi_report(H))
    return 0


def cmd_mollify_diag(args, cfg, out: Output) -> int:
    H = from_dict(cfg.get("hamiltonian", {"kind": "rotation_family", "rho": 0.5}))
    n_list = cfg.get("n_list", [4, 8, 16, 32, 64, 128, 256])
    d = mollifier_diagnostics(H, n_list)
    out.json("mollify_diag", {"family": H.to_dict(), "sup_slope": d["sup_slope"],
                              "plain_profile_sup": d["plain_profile_sup"]})
    out.table("mollify_diag_rows", d["rows"])
    return 0


def _verify_targets(cfg):
    if "hamiltonian" in cfg:
        return [from_dict(cfg["hamiltonian"])]
    if "families" in cfg:
        return [from_dict(f) for f in cfg["families"]]
    return V.shipped_families()


def cmd_verify(args, cfg, out: Output) -> int:
    which = args.check
    K = _param(args, cfg, "period_max", 16)
    grid = _param(args, cfg, "grid", 64)
    tol = _param(args, cfg, "tol", None)
    checks = ["hutchings", "closure", "brouwer", "wind", "membership"] if which == "all" else [which]
    verdicts: list[V.VerificationVerdict] = []
    if checks == ["membership"]:
        verdicts.append(V.check_membership("rotation", cfg.get("rhos")))
    else:
        fams = _verify_targets(cfg)
        verdicts = V.run_all(fams, K, grid, K_perturbed=cfg.get("K_perturbed", min(K, 4)),
                             grid_perturbed=cfg.get("grid_perturbed", min(grid, 16)),
                             tol=tol if tol is not None else 1e-6, checks=checks)
    for i, v in enumerate(verdicts):
        log.info(v.line())
        out.json(f"verdict_{i:02d}_{v.check_name}", v.to_dict())
    out.table("verdicts", [{"check": v.check_name, "family": describe(from_dict(v.family))
                            if v.family and v.family.get("kind") != "rotation_sweep" else "rotation_sweep",
                            "status": v.status.value, "runtime_s": v.runtime_s} for v in verdicts])
    return V.exit_code(verdicts)


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file: serialised Hamiltonian plus run parameters")
    common.add_argument("--out", help="output directory (default: print to stdout)")
    common.add_argument("--format", choices=["json", "csv"], default="csv",
                        help="format of tabular outputs")
    common.add_argument("--period-max", dest="period_max", type=int, help="period cutoff K")
    common.add_argument("--grid", type=int, help="seed lattice size N (N x N)")
    common.add_argument("--steps", type=int, help="RK4 steps per unit time")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised suites")
    common.add_argument("--tol", type=float, help="tolerance for verdicts")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="discaction", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("orbit", parents=[common], help="integrate one orbit").set_defaults(fn=cmd_orbit)
    sub.add_parser("spectrum", parents=[common],
                   help="periodic orbits and interior mean action spectrum").set_defaults(fn=cmd_spectrum)
    sub.add_parser("radial-spec", parents=[common],
                   help="tangent-line spectrum of a radial profile").set_defaults(fn=cmd_radial_spec)
    sub.add_parser("calabi", parents=[common], help="Calabi invariant").set_defaults(fn=cmd_calabi)
    sub.add_parser("mollify-diag", parents=[common],
                   help="diagnostics of the mollified extensions").set_defaults(fn=cmd_mollify_diag)
    pv = sub.add_parser("verify", parents=[common], help="run verification checks")
    pv.add_argument("check", choices=["hutchings", "closure", "brouwer", "wind", "membership", "all"])
    pv.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = _load_config(args.config)
        return args.fn(args, cfg, Output(args.out, args.format))
    except (DiscActionError, ValueError, KeyError, OSError) as e:
        log.error("%s: %s", type(e).__name__, e)
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
