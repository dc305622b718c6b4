"""Command-line front end: ``fracstab {analyze,respond,simulate,equilibria,ml}``.

JSON reports go to stdout wrapped in a fixed envelope; CSV commands write
their table to stdout and a one-line summary to stderr. Exit codes: 0 on
success (an UNSTABLE verdict or a diverged simulation is still success), 2
for malformed input or configuration, 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import DomainError, FracStabError, NotApplicableError, NumericError
from .gl import SimConfig, simulate
from .lti import analyze, final_value
from .mittag_leffler import ml_scalar
from .nonlinear import find_equilibria, min_chaos_order, nonlinear_stability
from .orders import format_pseudo_polynomial
from .parser import (
    PolynomialVectorField,
    TransferFunction,
    parse_pseudo_polynomial,
    parse_transfer_function,
    parse_vector_field,
)
from .response import SeriesBudget, Variant, general_fode_response

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
SIG_DIGITS = 12

CHEN = {
    "orders": "0.8,1.0,0.9",
    "components": ["35*(x2-x1)", "-7*x1-x1*x3+28*x2", "x1*x2-3*x3"],
    "x0": (-9.0, -5.0, 14.0),
    "seeds": [(0.0, 0.0, 0.0), (8.0, 8.0, 21.0), (-8.0, -8.0, 21.0)],
}


class UsageError(FracStabError):
    pass


def fmt(x: float) -> str:
    """Shortest round-trip text, capped at 12 significant digits."""
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    capped = f"{x:.{SIG_DIGITS}g}"
    if float(capped) == x:
        return repr(x)
    # keep integral-looking values visibly float, like repr does
    return capped if any(ch in capped for ch in ".e") else capped + ".0"


def _round(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.{SIG_DIGITS}g}") if math.isfinite(obj) else repr(obj)
    if isinstance(obj, complex):
        return {"re": _round(obj.real), "im": _round(obj.imag)}
    if isinstance(obj, np.generic):
        return _round(obj.item())
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return str(obj)


def envelope(command: str, inputs: dict, result, warnings: Sequence[str] = ()) -> str:
    body = {
        "tool_version": __version__,
        "command": command,
        "inputs_echo": inputs,
        "result": result,
        "warnings": list(warnings),
    }
    return json.dumps(_round(body), sort_keys=True, indent=2)


def _floats(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(";", ",").split(","))
    except ValueError as exc:
        raise UsageError(f"bad {what} list {text!r}") from exc


def _seed_list(text: str) -> list[tuple[float, ...]]:
    return [_floats(chunk, "seed") for chunk in text.split(";") if chunk.strip()]


_COMPONENT = re.compile(r"^x(\d+)\s*'\s*=\s*(.+)$")


def load_fvf(path: str | Path) -> tuple[str, list[str]]:
    """Read a vector-field file: ``orders: q1,q2,...`` then ``xi' = expr``."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    orders = None
    comps: dict[int, str] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if orders is None:
            if not line.startswith("orders:"):
                raise UsageError(f"{path}:{lineno}: expected 'orders: ...' first")
            orders = line[len("orders:") :].strip()
            continue
        match = _COMPONENT.match(line)
        if not match:
            raise UsageError(f"{path}:{lineno}: expected \"xi' = <polynomial>\"")
        idx = int(match.group(1))
        if idx in comps:
            raise UsageError(f"{path}:{lineno}: x{idx}' defined twice")
        comps[idx] = match.group(2)
    if orders is None or not comps:
        raise UsageError(f"{path}: no orders line or no equations")
    if sorted(comps) != list(range(1, len(comps) + 1)):
        raise UsageError(f"{path}: equations must cover x1..x{len(comps)}")
    return orders, [comps[i] for i in sorted(comps)]


def _system(args) -> tuple[PolynomialVectorField, dict]:
    if args.system == "chen":
        orders, comps = CHEN["orders"], CHEN["components"]
    else:
        orders, comps = load_fvf(args.system)
    if getattr(args, "orders", None):
        orders = args.orders
    field = parse_vector_field(orders, comps)
    return field, {"system": args.system, "orders": orders, "equations": comps}


def _svg(path: str, x: np.ndarray, ys: Sequence[np.ndarray]) -> None:
    """Minimal polyline plot, one line per series."""
    w, h, pad = 640, 400, 20
    finite = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.zeros(1)
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if hi == lo:
        hi = lo + 1.0
    x0, x1 = float(x[0]), float(x[-1]) if x[-1] != x[0] else float(x[0]) + 1.0
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">']
    for i, y in enumerate(ys):
        pts = " ".join(
            f"{pad + (w - 2 * pad) * (xi - x0) / (x1 - x0):.2f},{h - pad - (h - 2 * pad) * (yi - lo) / (hi - lo):.2f}"
            for xi, yi in zip(x, y)
            if math.isfinite(yi)
        )
        parts.append(f'<polyline fill="none" stroke="{colors[i % len(colors)]}" points="{pts}"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


# -- commands ---------------------------------------------------------------------


def cmd_analyze(args, out, err) -> int:
    warnings = []
    if args.tf is not None:
        tf = parse_transfer_function(args.tf)
        inputs = {"tf": args.tf, "numerator": format_pseudo_polynomial(tf.numerator)}
    else:
        tf = TransferFunction(parse_pseudo_polynomial("1"), parse_pseudo_polynomial(args.char))
        inputs = {"char": args.char}
    inputs["denominator"] = format_pseudo_polynomial(tf.denominator)
    report = analyze(tf)
    result = report.to_dict()
    fv = final_value(tf)
    result["final_value"] = fv
    if report.verdict.value != "STABLE":
        warnings.append(f"verdict {report.verdict.value}")
    out.write(envelope("analyze", inputs, result, warnings) + "\n")
    return EXIT_OK


def cmd_respond(args, out, err) -> int:
    if not args.t_end > 0:
        raise UsageError("--t-end must be positive")
    if args.points < 1:
        raise UsageError("--points must be positive")
    den = parse_pseudo_polynomial(args.char)
    budget = SeriesBudget(args.max_outer, args.rel_tol, args.cancellation_cap, not args.no_mp)
    ts = np.linspace(args.t_end / args.points, args.t_end, args.points)
    values = general_fode_response(den, ts, budget, Variant(args.variant))
    out.write("t,y,converged\n")
    for p in values:
        out.write(f"{fmt(p.t)},{fmt(p.value)},{int(p.converged)}\n")
    bad = sum(not p.converged for p in values)
    err.write(f"respond: {bad} of {len(values)} points unconverged\n")
    if args.svg:
        _svg(args.svg, ts, [np.array([p.value for p in values])])
    return EXIT_OK


def cmd_simulate(args, out, err) -> int:
    field, _ = _system(args)
    if args.x0:
        x0 = _floats(args.x0, "x0")
    elif args.system == "chen":
        x0 = CHEN["x0"]
    else:
        x0 = (0.0,) * field.n
    cfg = SimConfig(args.h, args.t_end, x0, args.memory, not args.no_start_correction)
    traj = simulate(field, cfg)
    out.write(traj.to_csv(fmt=fmt))
    status = f"diverged at step {traj.diverged_at}" if traj.diverged else "ok"
    err.write(f"simulate: {len(traj.times)} samples, {status}\n")
    if args.svg:
        _svg(args.svg, traj.times, [traj.states[:, i] for i in range(traj.states.shape[1])])
    return EXIT_OK


def cmd_equilibria(args, out, err) -> int:
    field, inputs = _system(args)
    if args.seeds:
        seeds = _seed_list(args.seeds)
    elif args.system == "chen":
        seeds = CHEN["seeds"]
    else:
        seeds = [(0.0,) * field.n]
    inputs["seeds"] = [list(s) for s in seeds]
    warnings: list[str] = []
    found = find_equilibria(field, seeds, diagnostics=warnings)
    if not found:
        warnings.append("no seed converged to an equilibrium")
    items = []
    for eq in found:
        jac = field.jacobian(np.asarray(eq.x_star))
        rep = nonlinear_stability(jac, field.orders)
        item = {
            "x_star": list(eq.x_star),
            "residual": eq.residual,
            "jacobian": jac,
            "gamma": rep.gamma,
            "threshold": rep.threshold,
            "verdict": rep.verdict.value,
            "unstable_roots": rep.unstable_roots,
            "notes": list(rep.notes),
        }
        if rep.char_poly is not None:
            item["notes"].append(
                "characteristic polynomial built from the Newton-refined equilibrium; "
                "rounding x* first perturbs the low-order coefficients"
            )
            item["char_poly"] = {
                "m": rep.char_poly.m,
                "terms": [{"degree": d, "coeff": c} for d, c in rep.char_poly.terms()],
            }
        try:
            item["min_chaos_order"] = min_chaos_order(jac)
        except NotApplicableError:
            item["min_chaos_order"] = None
        items.append(item)
    out.write(envelope("equilibria", inputs, {"equilibria": items}, warnings) + "\n")
    return EXIT_OK


def cmd_ml(args, out, err) -> int:
    z = complex(args.z, args.z_im)
    try:
        value = ml_scalar(args.mu, args.nu, z, args.k)
    except DomainError as exc:  # |z| beyond the series range is a numeric limit
        raise NumericError(str(exc)) from exc
    if args.z_im == 0 and value.imag == 0:
        out.write(fmt(value.real) + "\n")
    else:
        out.write(f"{fmt(value.real)}{'+' if value.imag >= 0 else '-'}{fmt(abs(value.imag))}j\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracstab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="stability of a transfer function or characteristic pseudo-polynomial")
    g = a.add_mutually_exclusive_group(required=True)
    g.add_argument("--tf", help='e.g. "(12.46*s+64.47)/(39.69*s^1.25+12.46*s+65.068)"')
    g.add_argument("--char", help='e.g. "0.8*s^2.2+0.5*s^0.9+1"')
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("respond", help="analytic series response as CSV")
    r.add_argument("--char", required=True)
    r.add_argument("--variant", choices=[v.value for v in Variant], default="impulse")
    r.add_argument("--t-end", type=float, default=10.0)
    r.add_argument("--points", type=int, default=200)
    r.add_argument("--max-outer", type=int, default=SeriesBudget.max_outer)
    r.add_argument("--rel-tol", type=float, default=SeriesBudget.rel_tol)
    r.add_argument("--cancellation-cap", type=float, default=SeriesBudget.cancellation_cap)
    r.add_argument("--no-mp", action="store_true", help="disable the high-precision fallback")
    r.add_argument("--svg")
    r.set_defaults(func=cmd_respond)

    s = sub.add_parser("simulate", help="Grünwald-Letnikov simulation as CSV")
    s.add_argument("--system", required=True, help="'chen' or a .fvf file")
    s.add_argument("--orders", help="override the orders, comma separated")
    s.add_argument("--x0")
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--t-end", type=float, required=True)
    s.add_argument("--memory", type=float, help="short-memory window length")
    s.add_argument("--no-start-correction", action="store_true")
    s.add_argument("--svg")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("equilibria", help="equilibria and their local stability")
    e.add_argument("--system", required=True, help="'chen' or a .fvf file")
    e.add_argument("--orders")
    e.add_argument("--seeds", help='e.g. "0,0,0;8,8,21"')
    e.set_defaults(func=cmd_equilibria)

    m = sub.add_parser("ml", help="two-parameter Mittag-Leffler function or derivative")
    m.add_argument("--mu", type=float, required=True)
    m.add_argument("--nu", type=float, required=True)
    m.add_argument("--k", type=int, default=0)
    m.add_argument("--z", type=float, required=True)
    m.add_argument("--z-im", type=float, default=0.0)
    m.set_defaults(func=cmd_ml)
    return p


_VALUE_OPTIONS = {"--x0", "--seeds", "--z", "--z-im", "--orders", "--mu", "--nu"}


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--x0 -9,-5,14`` into ``--x0=-9,-5,14`` so argparse accepts it."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_OPTIONS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            elif nxt.startswith("-") and not nxt.startswith("--"):
                out.append(f"{tok}={nxt}")
            else:
                out.extend([tok, nxt])
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out, err)
    except NumericError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    except (FracStabError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
