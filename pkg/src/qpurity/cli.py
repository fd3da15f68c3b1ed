"""Command-line front end.

Every subcommand writes one CSV (default) or JSON report.  Each row starts
with the metadata columns ``tool_version, command, seed, restarts, measure,
channel_a, channel_b`` followed by the subcommand's own columns:

  purity                 value, converged_restarts, restarts_run, best_restart, argmax_state
  capacity               value, upper_bound, method, ensemble_size, converged_restarts, best_restart
  product-test           joint_value, product_value, gap, diag_*
  depolarizing-validate  closed_form, optimizer_value, deviation, diag_*
  weaknoise-scan         eps, measured, predicted, residual, ratio, fitted_order, diag_*
  strongdepol-check      q, product_entropy, predicted, residual, entangled_entropy,
                         haar_min_entropy, fitted_order, min_slope, product_below_entangled
  pnorm-limit            p, measured, predicted, residual, ratio, fitted_order, diag_*

Floats carry 12 significant digits.  Exit status: 0 success, 1 invalid
input, 2 when some optimizer call had no converged restart.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import __version__
from .capacity import capacity, capacity_binary_bistochastic
from .channels import (Channel, amplitude_damping, depolarizing, identity, load_channel, random_channel,
                       tensor_channel, weak_noise)
from .harness import (capacity_additivity_check, depolarizing_closed_forms, pnorm_limit_scan, product_gap,
                      strong_depolarization_check, weaknoise_product_check, weaknoise_scan)
from .linalg import ValidationError
from .optimize import OptimizerConfig
from .purity import parse_measure, purity

SIG_DIGITS = 12
META = ("tool_version", "command", "seed", "restarts", "measure", "channel_a", "channel_b")


class SpecParseError(ValidationError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos} in {text!r}")


# -- channel specs ------------------------------------------------------------

def _split_top(text: str, sep: str) -> list[tuple[str, int]]:
    """Split on ``sep`` outside parentheses; returns (piece, offset) pairs."""
    out, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            out.append((text[start:i], start))
            start = i + 1
    out.append((text[start:], start))
    return out


def _kv(body: str, offset: int, full: str, keys: Sequence[str]) -> dict[str, tuple[str, int]]:
    vals = {}
    for piece, pos in _split_top(body, ","):
        if "=" not in piece:
            raise SpecParseError(f"expected key=value, got {piece!r}", full, offset + pos)
        k, v = piece.split("=", 1)
        k = k.strip()
        if k not in keys:
            raise SpecParseError(f"unknown key {k!r} (expected {', '.join(keys)})", full, offset + pos)
        vals[k] = (v.strip(), offset + pos + len(k) + 1)
    missing = [k for k in keys if k not in vals]
    if missing:
        raise SpecParseError(f"missing key(s) {', '.join(missing)}", full, offset + len(body))
    return vals


def _num(val: tuple[str, int], full: str, kind=float):
    try:
        return kind(val[0])
    except ValueError:
        raise SpecParseError(f"bad number {val[0]!r}", full, val[1]) from None


def _parse(text: str, offset: int, full: str) -> Channel:
    s = text.strip()
    offset += len(text) - len(text.lstrip())
    if s.startswith("(") and s.endswith(")"):
        return _parse(s[1:-1], offset + 1, full)
    kind, sep, body = s.partition(":")
    boff = offset + len(kind) + 1
    try:
        if kind == "identity":
            kv = _kv(body, boff, full, ["d"])
            return identity(_num(kv["d"], full, int))
        if kind == "depolarizing":
            kv = _kv(body, boff, full, ["d", "p"])
            return depolarizing(_num(kv["d"], full, int), _num(kv["p"], full))
        if kind == "amplitude-damping":
            kv = _kv(body, boff, full, ["gamma"])
            return amplitude_damping(_num(kv["gamma"], full))
        if kind == "random":
            kv = _kv(body, boff, full, ["d", "rank", "seed"])
            rng = np.random.default_rng(_num(kv["seed"], full, int))
            phi = random_channel(_num(kv["d"], full, int), rng, rank=_num(kv["rank"], full, int))
            return Channel(phi.kraus, f"random:d={phi.dim_in},rank={phi.rank},seed={kv['seed'][0]}")
        if kind == "weaknoise":
            if not body.startswith("base="):
                raise SpecParseError("weaknoise needs base=<spec>,eps=<x>", full, boff)
            head, sep2, eps = body.rpartition(",eps=")
            if not sep2:
                raise SpecParseError("missing ,eps=<x>", full, boff + len(body))
            base = _parse(head[len("base="):], boff + len("base="), full)
            return weak_noise(base, _num((eps, boff + len(head) + len(sep2)), full))
        if kind == "tensor":
            pieces = _split_top(body, ";")
            if len(pieces) < 2:
                raise SpecParseError("tensor needs at least two ';'-separated specs", full, boff)
            return tensor_channel(*[_parse(p, boff + pos, full) for p, pos in pieces])
    except SpecParseError:
        raise
    except ValidationError as e:
        raise ValidationError(f"{e} (in spec {s!r})") from e
    if os.path.exists(s):
        return load_channel(s)
    raise SpecParseError(f"unknown channel kind {kind!r} and no such file", full, offset)


def parse_channel_spec(text: str) -> Channel:
    """Build a channel from a spec string or a channel-file path.

    Spec forms: ``identity:d=<n>``, ``depolarizing:d=<n>,p=<x>``,
    ``weaknoise:base=<spec>,eps=<x>``, ``tensor:<spec>;<spec>[;...]``,
    plus ``amplitude-damping:gamma=<x>`` and ``random:d=<n>,rank=<k>,seed=<s>``.
    Nested specs may be wrapped in parentheses to protect ``;`` and ``,``.
    """
    return _parse(text, 0, text)


# -- output -------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return float(f"{v:.{SIG_DIGITS}g}")
    if isinstance(v, complex):
        return f"{v.real:.{SIG_DIGITS}g}{v.imag:+.{SIG_DIGITS}g}j"
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(str(_fmt(x)) for x in v)
    if v is None:
        return ""
    return str(v)


def _csv_cell(v) -> str:
    f = _fmt(v)
    if isinstance(f, float):
        return f"{f:.{SIG_DIGITS}g}"
    return str(f)


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: _fmt(v) for k, v in r.items()} for r in rows], indent=1) + "\n"
    cols = list(rows[0].keys()) if rows else list(META)
    for r in rows[1:]:
        cols += [k for k in r if k not in cols]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_csv_cell(r.get(c, "")) for c in cols])
    return buf.getvalue()


# -- commands -----------------------------------------------------------------

@dataclass
class RunConfig:
    seed: int
    restarts: int
    tol: float | None
    format: str
    out: str | None
    workers: int = 1
    max_iters: int = 2000

    def optimizer(self) -> OptimizerConfig:
        extra = {"value_tol": self.tol} if self.tol is not None else {}
        return OptimizerConfig(restarts=self.restarts, seed=self.seed, workers=self.workers,
                               max_iters=self.max_iters, **extra)


def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(x) if x.strip().lower() != "inf" else math.inf for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"--{name}: expected comma-separated numbers, got {text!r}") from None


def _need(args, name: str) -> Channel:
    spec = getattr(args, name)
    if spec is None:
        raise ValidationError(f"--{name.replace('_', '-')} is required for {args.command}")
    return parse_channel_spec(spec)


def _meta(args, rc: RunConfig, measure="", a="", b="") -> dict:
    return {"tool_version": __version__, "command": args.command, "seed": rc.seed, "restarts": rc.restarts,
            "measure": measure, "channel_a": a, "channel_b": b}


def cmd_purity(args, rc):
    phi = _need(args, "channel")
    m = parse_measure(args.measure)
    r = purity(phi, m, rc.optimizer())
    return [{**_meta(args, rc, str(m), phi.label), "value": r.value,
             "converged_restarts": r.converged_restarts, "restarts_run": r.restarts,
             "best_restart": r.best_restart, "argmax_state": list(r.argmax_state)}]


def cmd_capacity(args, rc):
    phi = _need(args, "channel")
    cfg = rc.optimizer()
    r = capacity_binary_bistochastic(phi, cfg) if args.method == "binary" else capacity(phi, cfg)
    return [{**_meta(args, rc, "capacity", phi.label), "value": r.value, "upper_bound": r.upper_bound,
             "method": r.method, "ensemble_size": r.ensemble.size,
             "converged_restarts": r.converged_restarts, "best_restart": r.best_restart}]


def cmd_product(args, rc):
    a, b = _need(args, "a"), _need(args, "b")
    cfg = rc.optimizer()
    if args.measure == "capacity":
        rep = capacity_additivity_check(a, b, cfg)
    else:
        rep = product_gap(a, b, args.measure, cfg)
    return [{**_meta(args, rc, rep.measure, a.label, b.label),
             **{k: v for k, v in row.items() if k not in ("measure", "channel_a", "channel_b")}}
            for row in rep.rows()]


def cmd_depolarizing(args, rc):
    dims = [int(x) for x in _floats(args.dims, "dims")]
    ps = _floats(args.params, "params")
    rows = depolarizing_closed_forms(dims, ps, rc.optimizer())
    return [{**_meta(args, rc, r.pop("measure"), r.pop("channel")), **r} for r in rows]


def _expansion_rows(args, rc, rep, measure, a="", b=""):
    return [{**_meta(args, rc, measure, a, b), **{k: v for k, v in row.items() if k != "label"}}
            for row in rep.rows()]


def cmd_weaknoise(args, rc):
    eps = _floats(args.eps_list, "eps-list")
    if args.b is not None:
        a, b = _need(args, "a"), _need(args, "b")
        rep = weaknoise_product_check([a, b], eps, rc.optimizer())
        rows = _expansion_rows(args, rc, rep, "p=inf", a.label, b.label)
        for r in rows:
            r["delta_nu_flat"] = rep.extra["delta_nu_flat"]
            r["mean_nu_flat"] = rep.extra["mean_nu_flat"]
        return rows
    base = parse_channel_spec(args.channel or args.a) if (args.channel or args.a) else None
    if base is None:
        raise ValidationError("--channel is required for weaknoise-scan")
    rep = weaknoise_scan(base, eps, rc.optimizer())
    rows = _expansion_rows(args, rc, rep, "p=inf", base.label)
    for r in rows:
        r["nu_flat"] = rep.extra["nu_flat"]
    return rows


def cmd_strongdepol(args, rc):
    dims = [int(x) for x in _floats(args.dims, "dims")]
    qs = _floats(args.q_list, "q-list")
    rep = strong_depolarization_check(dims, qs, trials=args.trials, seed=rc.seed)
    ex = rep.extra
    rows = []
    for i, q in enumerate(rep.grid):
        ent = ex["entangled_entropy"]
        rows.append({**_meta(args, rc, "entropy", rep.label), "q": q,
                     "product_entropy": rep.measured[i], "predicted": rep.predicted[i],
                     "residual": rep.residuals[i], "entangled_entropy": ent[i] if ent else None,
                     "haar_min_entropy": ex["haar_min_entropy"][i], "fitted_order": rep.fitted_order,
                     "min_slope": ex["min_slope"], "product_below_entangled": ex["product_below_entangled"]})
    return rows


def cmd_pnorm(args, rc):
    phi = _need(args, "channel")
    rep = pnorm_limit_scan(phi, _floats(args.p_list, "p-list"), rc.optimizer())
    rows = _expansion_rows(args, rc, rep, "entropy", phi.label)
    for r in rows:
        r["monotone"] = rep.extra["monotone"]
    return rows


COMMANDS = {
    "purity": (cmd_purity, "extremal output purity of one channel"),
    "capacity": (cmd_capacity, "one-step classical capacity"),
    "product-test": (cmd_product, "joint vs product value for a tensor product (-a, -b)"),
    "depolarizing-validate": (cmd_depolarizing, "optimizer vs closed forms for depolarizing products"),
    "weaknoise-scan": (cmd_weaknoise, "leading-order weak-noise expansion of nu_inf"),
    "strongdepol-check": (cmd_strongdepol, "second-order strong-depolarization entropy expansion"),
    "pnorm-limit": (cmd_pnorm, "(1 - nu_p^p)/(p - 1) as p decreases to 1"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpurity", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"qpurity {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--channel", help="channel spec or channel-file path")
        p.add_argument("-a", "--a", help="first factor channel")
        p.add_argument("-b", "--b", help="second factor channel")
        p.add_argument("--measure", default="p=2", help="p=<x> | p=inf | entropy | mininv | flat"
                       + (" | capacity" if name == "product-test" else ""))
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--restarts", type=int, default=32)
        p.add_argument("--tol", type=float, default=None, help="optimizer value tolerance")
        p.add_argument("--workers", type=int, default=1, help="threads for optimizer restarts")
        p.add_argument("--max-iters", type=int, default=2000, help="ascent iterations per restart")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--eps-list", default="0.2,0.1,0.05,0.01")
        p.add_argument("--p-list", default="1.5,1.2,1.1,1.01,1.001")
        p.add_argument("--q-list", default="0.05,0.02,0.01")
        p.add_argument("--dims", default="2,2" if name == "strongdepol-check" else "2")
        p.add_argument("--params", default="0.5", help="depolarizing parameters, one per factor")
        p.add_argument("--trials", type=int, default=50)
        p.add_argument("--method", choices=("ensemble", "binary"), default="ensemble")
    return parser


def run_command(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = RunConfig(args.seed, args.restarts, args.tol, args.format, args.out, args.workers, args.max_iters)
        rows = COMMANDS[args.command][0](args, rc)
    except ValidationError as e:
        print(f"qpurity: error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"qpurity: error: {e}", file=sys.stderr)
        return 1
    text = render(rows, args.format)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if any(r.get("converged_restarts", r.get("diag_converged_restarts", 1)) == 0 for r in rows):
        print("qpurity: no optimizer restart converged", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
