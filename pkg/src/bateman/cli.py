"""Command-line driver: ``bateman <subcommand> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classical, resonance, spectral
from .errors import AccuracyWarning, BatemanError, DomainError, NearPoleError, OverdampedError
from .funcalg import FunctionSpecError, GphFunction, atom
from .params import SystemParams
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_CONFIG_KEYS = {"hbar": float, "gamma": float, "kappa": float, "format": str, "seed": int,
                "output_dir": str}

DEFAULT_GAUSSIAN = atom(1.0, 0, 0, 1.0)
DEFAULT_POLYNOMIAL = atom(1.0, 0, 2, 0.0)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    params: SystemParams
    output_dir: Path | None = None
    format: str = "csv"
    seed: int = 0
    tolerances: dict = field(default_factory=dict)


def parse_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; ``tol_<name>`` sets a tolerance."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("tol_"):
            conv = float
        elif key in _CONFIG_KEYS:
            conv = _CONFIG_KEYS[key]
        else:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = conv(value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def build_config(args) -> RunConfig:
    values = {"hbar": 1.0, "gamma": 0.5, "kappa": 1.25, "seed": 0, "output_dir": None,
              "format": getattr(args, "format_default", None) or "csv"}
    tolerances = {}
    if args.config:
        for k, v in parse_config_file(args.config).items():
            if k.startswith("tol_"):
                tolerances[k[4:]] = v
            else:
                values[k] = v
    for k in ("hbar", "gamma", "kappa", "format", "seed", "output_dir"):
        v = getattr(args, k, None)
        if v is not None:
            values[k] = v
    if values["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {values['format']!r}")
    for name, tol in tolerances.items():
        if not tol > 0:
            raise UsageError(f"tolerance {name} must be positive")
    params = SystemParams(hbar=values["hbar"], gamma=values["gamma"], kappa=values["kappa"])
    out = Path(values["output_dir"]) if values["output_dir"] else None
    return RunConfig(params, out, values["format"], int(values["seed"]), tolerances)


# ----------------------------------------------------------------------------
# output

def _expand(row: dict) -> dict:
    flat = {}
    for k, v in row.items():
        if isinstance(v, complex):
            flat[f"{k}_re"] = v.real
            flat[f"{k}_im"] = v.imag
        else:
            flat[k] = v
    return flat


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(rows: list, fmt: str) -> str:
    flat = [_expand(r) for r in rows]
    if fmt == "json":
        return json.dumps(flat, indent=1) + "\n"
    buf = io.StringIO()
    if flat:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(flat[0]))
        for r in flat:
            w.writerow([_cell(v) for v in r.values()])
    return buf.getvalue()


def emit(cfg: RunConfig, name: str, rows: list, stream) -> None:
    text = render(rows, cfg.format)
    if cfg.output_dir is None:
        stream.write(text)
    else:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        (cfg.output_dir / f"{name}.{cfg.format}").write_text(text, encoding="utf-8", newline="\n")


def _function_arg(text: str | None, default: GphFunction) -> GphFunction:
    if text is None:
        return default
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read function spec: {exc}") from None
    return GphFunction.from_json(text)


# ----------------------------------------------------------------------------
# subcommands

def cmd_resonances(args, cfg):
    if args.lmax < 0 or args.nmax < 0:
        raise UsageError("lmax and nmax must be >= 0")
    rows = []
    for idx in spectral.resonance_indices(args.lmax, args.nmax):
        rows.append({"l": idx.l, "n": idx.n, "k": idx.k, "lambda": idx.pole,
                     "E_minus": idx.energy_minus(cfg.params), "E_plus": idx.energy_plus(cfg.params)})
    return "resonances", rows, EXIT_OK


def cmd_verify(args, cfg):
    checks = run_suite(args.suite, cfg.params, cfg.seed, cfg.tolerances)
    rows = [c.as_dict() for c in checks]
    failed = [c for c in checks if not c.passed]
    if failed:
        print(f"verification failed: {failed[0].suite}.{failed[0].name} "
              f"(residual {failed[0].residual!r} > {failed[0].tolerance!r})", file=sys.stderr)
    return "verify", rows, EXIT_FAIL if failed else EXIT_OK


def cmd_decay(args, cfg):
    phi = _function_arg(args.phi, atom(1.0, args.l, abs(args.l), 1.0))
    idx = spectral.ResonanceIndex(args.l, args.n)
    rows = []
    for t in args.t:
        m, pr = resonance.coefficient_evolution(phi, idx, t, cfg.params)
        base = resonance.pair_plus(phi, idx)
        rows.append({"l": idx.l, "n": idx.n, "t": float(t), "measured": m, "predicted": pr,
                     "abs_coefficient": abs(base * m)})
    return "decay", rows, EXIT_OK


def cmd_reconstruct(args, cfg):
    psi = _function_arg(args.psi, DEFAULT_POLYNOMIAL)
    phi = _function_arg(args.phi, DEFAULT_GAUSSIAN)
    rep = resonance.weak_identity_sum(psi, phi, args.nmax, abel_x=())
    x = args.abel_x
    terms = np.array(rep.terms)
    abel_partial = np.cumsum(terms * x ** np.arange(len(terms)))
    rows = []
    for n, (s, e, a) in enumerate(zip(rep.partial_sums, rep.errors, abel_partial)):
        rows.append({"N": n, "partial": s, "raw_error": e, "abel_x": x,
                     "abel_error": float(abs(a - rep.target))})
    return "reconstruct", rows, EXIT_OK


def cmd_resolvent_scan(args, cfg):
    psi = _function_arg(args.psi, DEFAULT_POLYNOMIAL)
    phi = _function_arg(args.phi, DEFAULT_GAUSSIAN)
    rows = []
    for zr in args.z_re:
        for zi in args.z_im:
            z = complex(zr, zi)
            row = {"z": z}
            values = []
            for m in resonance.RESOLVENT_METHODS:
                try:
                    if m == "spectral_integral":
                        v, err = resonance.spectral_integral_resolvent(psi, phi, z, cfg.params)
                    else:
                        v, err = resonance.resolvent_element(psi, phi, z, cfg.params, m), None
                    row[m] = complex(v)
                    values.append(complex(v))
                    if m == "spectral_integral":
                        row["spectral_integral_error"] = err
                except NearPoleError:
                    raise
                except BatemanError:
                    # method not defined for this pair; leave the cells empty
                    row[f"{m}_re"] = None
                    row[f"{m}_im"] = None
                    if m == "spectral_integral":
                        row["spectral_integral_error"] = None
            spread = max((abs(a - b) for a in values for b in values), default=0.0)
            row["max_discrepancy"] = float(spread)
            rows.append(row)
    return "resolvent_scan", rows, EXIT_OK


def cmd_classical_trajectory(args, cfg):
    s = classical.PhasePoint(args.chart, tuple(args.state))
    times = np.linspace(0.0, args.t_end, args.steps + 1)
    rows = []
    for t, *coords, h in classical.trajectory(s, times, cfg.params):
        row = {"t": t}
        for name, v in zip(_coord_names(args.chart), coords):
            row[name] = v
        row["H"] = h
        rows.append(row)
    return "classical_trajectory", rows, EXIT_OK


def _coord_names(chart):
    return {"bateman": ("x", "y", "p_x", "p_y"), "pontriagin": ("x1", "x2", "p1", "p2"),
            "polar": ("r", "phi", "p_r", "p_phi")}[chart]


def cmd_residues(args, cfg):
    phi = _function_arg(args.phi, DEFAULT_GAUSSIAN)
    rows = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AccuracyWarning)
        for idx in spectral.resonance_indices(args.lmax, args.nmax):
            rc = spectral.residue_contour(phi, idx, radius=args.radius)
            rt = spectral.residue_taylor(phi, idx)
            rows.append({"l": idx.l, "n": idx.n, "k": idx.k, "contour": rc, "taylor": rt,
                         "ratio": (rc / rt) if rt != 0 else None})
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    for r in rows:
        if r["ratio"] is None:
            r["ratio_re"] = r["ratio_im"] = None
            del r["ratio"]
    return "residues", rows, EXIT_OK


# ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--hbar", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--kappa", type=float)
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--output-dir", dest="output_dir")

    parser = argparse.ArgumentParser(prog="bateman", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resonances", parents=[common], help="table of resonance poles and energies")
    p.add_argument("--lmax", type=int, default=2)
    p.add_argument("--nmax", type=int, default=2)
    p.set_defaults(func=cmd_resonances)

    p = sub.add_parser("verify", parents=[common], help="run invariant suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.set_defaults(func=cmd_verify, format_default="json")

    p = sub.add_parser("decay", parents=[common], help="semigroup decay of expansion coefficients")
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--t", type=float, nargs="+", default=[1.0])
    p.add_argument("--phi", help="function spec (JSON text or @file)")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("reconstruct", parents=[common], help="truncated resonance expansion of <psi|phi>")
    p.add_argument("--psi")
    p.add_argument("--phi")
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--abel-x", dest="abel_x", type=float, default=1 - 1e-4)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("resolvent-scan", parents=[common], help="resolvent matrix elements on a z grid")
    p.add_argument("--psi")
    p.add_argument("--phi")
    p.add_argument("--z-re", dest="z_re", type=float, nargs="+", default=[1.0])
    p.add_argument("--z-im", dest="z_im", type=float, nargs="+", default=[0.1])
    p.set_defaults(func=cmd_resolvent_scan)

    p = sub.add_parser("classical-trajectory", parents=[common], help="exact classical flow")
    p.add_argument("--chart", choices=classical.CHARTS, default="bateman")
    p.add_argument("--state", type=float, nargs=4, default=[1.0, 0.0, 0.0, 1.0])
    p.add_argument("--t-end", dest="t_end", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=100)
    p.set_defaults(func=cmd_classical_trajectory)

    p = sub.add_parser("residues", parents=[common], help="pole residues by contour and by Taylor data")
    p.add_argument("--phi")
    p.add_argument("--lmax", type=int, default=1)
    p.add_argument("--nmax", type=int, default=2)
    p.add_argument("--radius", type=float, default=spectral.DEFAULT_RESIDUE_RADIUS)
    p.set_defaults(func=cmd_residues)
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        name, rows, code = args.func(args, cfg)
    except (OverdampedError, UsageError, FunctionSpecError, DomainError, NearPoleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    emit(cfg, name, rows, stdout)
    return code
