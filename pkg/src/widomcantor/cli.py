"""Command-line front end.

One config file (TOML or JSON) describes the model; subcommands build level
data, verify the certified statements, or report factor tables.  All numeric
output is rendered both as fixed 40-digit decimals and as exact hex-float
strings, so repeated runs produce byte-identical artifacts.

Exit codes: 0 success / verified, 1 a certified check failed, 2 bad config
or usage, 3 precision or refinement budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from mpmath import mp, mpf, workprec

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .cantor import (
    CantorModel,
    CertificateUnavailable,
    Gamma,
    MAX_LEVEL,
    TailCertificate,
)
from .invariants import run_invariant_suite
from .numerics import DepthExhausted, PrecisionExhausted, PrecisionPolicy
from .potential import green_set_bracket, harnack_bracket
from .sequences import (
    HorizonExceeded,
    SequenceError,
    SequenceSpec,
    regularize,
)
from .widom import (
    check_thm1,
    check_thm2,
    residual_widom_bracket,
    widom_l2_dyadic,
    widom_sup_dyadic,
)

__all__ = ["RunConfig", "load_config", "build_model", "main"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    mode: str
    s_max: int = 8
    sequence: Optional[SequenceSpec] = None
    regularize_n: int = 64
    gamma_values: Optional[list] = None
    gamma_extension: str = "hold"
    tail: Optional[TailCertificate] = None
    base_bits: int = 256
    slope_bits: int = 4
    max_bits: int = 1 << 20
    eps_cap: str = "1e-8"
    eps_green: str = "1e-8"
    x0: List[str] = field(default_factory=lambda: ["2"])
    thm1_n: int = 256
    thm2_smax: int = 6
    report_smax: int = 6

    def policy(self) -> PrecisionPolicy:
        return PrecisionPolicy(self.base_bits, self.slope_bits, self.max_bits)


def load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    data = p.read_bytes()
    if p.suffix.lower() == ".toml":
        try:
            return tomllib.loads(data.decode())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad TOML in {path}: {exc}") from exc
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad JSON in {path}: {exc}") from exc


def parse_config(raw: dict) -> RunConfig:
    model = raw.get("model")
    if not isinstance(model, dict):
        raise ConfigError("config needs a [model] section")
    mode = model.get("mode")
    if mode not in ("derived", "direct"):
        raise ConfigError("model.mode must be 'derived' or 'direct'")
    cfg = RunConfig(mode=mode)
    s_max = model.get("s_max", cfg.s_max)
    if not isinstance(s_max, int) or not 0 <= s_max <= MAX_LEVEL:
        raise ConfigError(f"model.s_max must be an integer in [0, {MAX_LEVEL}]")
    cfg.s_max = s_max
    if mode == "derived":
        seq = model.get("sequence")
        if not isinstance(seq, dict):
            raise ConfigError("derived mode needs a model.sequence table")
        try:
            cfg.sequence = SequenceSpec.from_dict(seq)
        except (SequenceError, KeyError) as exc:
            raise ConfigError(f"bad sequence: {exc}") from exc
        n = model.get("regularize_n", cfg.regularize_n)
        if not isinstance(n, int) or n < 1:
            raise ConfigError("model.regularize_n must be a positive integer")
        cfg.regularize_n = n
    else:
        gam = model.get("gamma")
        if not isinstance(gam, dict) or not gam.get("values"):
            raise ConfigError("direct mode needs model.gamma.values")
        cfg.gamma_values = list(gam["values"])
        cfg.gamma_extension = gam.get("extension", "hold")
        if cfg.gamma_extension not in ("hold", "none"):
            raise ConfigError("gamma.extension must be 'hold' or 'none'")
        tail = gam.get("tail")
        if tail is not None:
            kind = tail.get("kind", "constant")
            start = tail.get("start", 1)
            if kind == "constant":
                cfg.tail = TailCertificate.constant(tail["value"], start)
            elif kind == "bounded":
                cfg.tail = TailCertificate.bounded(tail["lo"], tail["hi"], start)
            else:
                raise ConfigError("gamma.tail.kind must be constant or bounded")
    prec = raw.get("precision", {})
    for key in ("base_bits", "slope_bits", "max_bits"):
        if key in prec:
            v = prec[key]
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"precision.{key} must be a positive integer")
            setattr(cfg, key, v)
    run = raw.get("run", {})
    cfg.eps_cap = str(run.get("eps_cap", cfg.eps_cap))
    cfg.eps_green = str(run.get("eps_green", cfg.eps_green))
    x0 = run.get("x0", cfg.x0)
    if not isinstance(x0, list) or not all(isinstance(v, (str, int, float)) for v in x0):
        raise ConfigError("run.x0 must be a list of numbers or strings")
    cfg.x0 = [str(v) for v in x0]
    for key in ("thm1_n", "thm2_smax", "report_smax"):
        if key in run:
            v = run[key]
            if not isinstance(v, int) or v < 0:
                raise ConfigError(f"run.{key} must be a nonnegative integer")
            setattr(cfg, key, v)
    return cfg


def build_model(cfg: RunConfig) -> CantorModel:
    if cfg.mode == "derived":
        reg = regularize(cfg.sequence, cfg.regularize_n)
        gamma = Gamma.derived(reg)
    else:
        gamma = Gamma.direct(cfg.gamma_values, cfg.gamma_extension, cfg.tail)
    try:
        return CantorModel(gamma, cfg.policy(), cfg.s_max)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# -- deterministic rendering ------------------------------------------------


def _dec(x, digits: int = 40) -> str:
    if not isinstance(x, mpf):
        with workprec(8 * digits):
            x = mpf(x)
    return mp.nstr(x, digits)


def _hex(x) -> str:
    if not isinstance(x, mpf):
        with workprec(320):
            x = mpf(x)
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return "0x0p+0"
    return f"{'-' if sign else ''}0x{man:x}p{exp:+d}"


def _emit_rows(rows: List[dict], fmt: str, out: io.TextIOBase) -> None:
    if fmt == "json":
        json.dump(rows, out, indent=2, sort_keys=True)
        out.write("\n")
        return
    if not rows:
        return
    keys = list(rows[0].keys())
    writer = csv.DictWriter(out, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: r.get(k, "") for k in keys})


# -- subcommands ------------------------------------------------------------


def cmd_build(model: CantorModel, cfg: RunConfig, args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    levels = args.levels if args.levels is not None else min(cfg.s_max, 6)
    if not 0 <= levels <= cfg.s_max:
        raise ConfigError(f"--levels must be in [0, {cfg.s_max}]")
    prec = 192
    with workprec(prec):
        cap_lo, cap_hi = model.log_cap_K(prec)
        eps = mpf(cfg.eps_cap)
        tail_index = model.capacity_tail_index(eps, prec)
        meta = {
            "mode": cfg.mode,
            "s_max": cfg.s_max,
            "levels_written": levels,
            "log_cap_set": {"lo": _dec(cap_lo), "hi": _dec(cap_hi)},
            "eps_cap": cfg.eps_cap,
            "capacity_tail_index": tail_index,
            "gamma_small": model.gamma.small_gamma,
            "levels": [],
        }
        for s in range(levels + 1):
            glo, ghi = model.cap_gap_bracket(s, prec)
            meta["levels"].append({
                "s": s,
                "log_r": _dec(model.log_r(s, prec)),
                "log_cap_level": _dec(model.log_cap_level(s, prec)),
                "cap_gap_hi": _dec(ghi),
            })
    (out_dir / "model.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n")
    with (out_dir / "levels.csv").open("w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s", "j", "left", "right", "left_hex", "right_hex"])
        for s in range(levels + 1):
            for j, (a, b) in enumerate(model.level(s).intervals()):
                writer.writerow([s, j, _dec(a), _dec(b), _hex(a), _hex(b)])
    print(f"wrote {out_dir / 'model.json'} and {out_dir / 'levels.csv'}")
    return 0


def cmd_verify(model: CantorModel, cfg: RunConfig, args) -> int:
    target = args.target
    if target == "invariants":
        results = run_invariant_suite(model, s_top=min(cfg.s_max, 6))
        for r in results:
            print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}")
        return 0 if all(r.ok for r in results) else 1
    if target == "thm1":
        n = args.n if args.n is not None else cfg.thm1_n
        ok, rows = check_thm1(model, n)
        for r in rows:
            d = r.to_dict()
            print(f"{'PASS' if r.ok and r.ok_weak else 'FAIL'}  "
                  f"{d['kind']:6s} n={d['n']:<6d} W2_lo={d['w_lo']} "
                  f">= {d['bound']} (log margin {d['log_margin']})")
        print(f"lower bound at degrees up to {n}: "
              f"{'verified' if ok else 'FAILED'}")
        return 0 if ok else 1
    if target == "thm2":
        xs = args.x0 or cfg.x0
        smax = args.smax if args.smax is not None else cfg.thm2_smax
        all_ok = True
        for x in xs:
            ok, rows, green, hb = check_thm2(model, x, smax,
                                             eps=mpf(cfg.eps_green))
            print(f"x0={x}: tau in [{_dec(hb.lo, 20)}, {_dec(hb.hi, 20)}], "
                  f"green in [{_dec(green.lo, 20)}, {_dec(green.hi, 20)}]")
            for r in rows:
                d = r.to_dict()
                print(f"{'PASS' if r.ok else 'FAIL'}  n={d['n']:<6d} "
                      f"W_lo={d['w_lo']} >= {d['bound']} "
                      f"(log margin {d['log_margin']})")
            all_ok = all_ok and ok
        print(f"residual lower bound: {'verified' if all_ok else 'FAILED'}")
        return 0 if all_ok else 1
    raise ConfigError(f"unknown verify target {target!r}")


def cmd_report(model: CantorModel, cfg: RunConfig, args) -> int:
    fmt = args.format
    out = sys.stdout
    topic = args.topic
    if topic in ("widom-sup", "widom-l2"):
        smax = args.smax if args.smax is not None else cfg.report_smax
        fn = widom_sup_dyadic if topic == "widom-sup" else widom_l2_dyadic
        rows = [fn(model, s).to_dict() for s in range(smax + 1)]
        _emit_rows(rows, fmt, out)
        return 0
    if topic == "widom-res":
        xs = args.x0 or cfg.x0
        smax = args.smax if args.smax is not None else cfg.report_smax
        rows = []
        for x in xs:
            hb = harnack_bracket(model, x)
            green = green_set_bracket(model, x,
                                      mpf(cfg.eps_green) / (1 << smax),
                                      tau_hi=hb.hi)
            s_min = hb.s0 if hb.kind == "bounded" else 0
            for s in range(s_min, smax + 1):
                lo, hi, _ = residual_widom_bracket(model, x, s, green)
                rows.append({
                    "x0": x, "s": s, "n": 1 << s,
                    "log_lo": _dec(lo), "log_hi": _dec(hi),
                    "tau_hi": _dec(hb.hi),
                })
        _emit_rows(rows, fmt, out)
        return 0
    if topic == "green":
        rows = [green_set_bracket(model, x, mpf(cfg.eps_green)).to_dict()
                for x in (args.x0 or cfg.x0)]
        _emit_rows(rows, fmt, out)
        return 0
    if topic == "harnack":
        rows = [harnack_bracket(model, x).to_dict()
                for x in (args.x0 or cfg.x0)]
        _emit_rows(rows, fmt, out)
        return 0
    if topic == "levels":
        s = args.level
        if s is None or not 0 <= s <= cfg.s_max:
            raise ConfigError("report levels needs --level in range")
        rows = [{
            "s": s, "j": j, "left": _dec(a), "right": _dec(b),
            "left_hex": _hex(a), "right_hex": _hex(b),
        } for j, (a, b) in enumerate(model.level(s).intervals())]
        _emit_rows(rows, fmt, out)
        return 0
    raise ConfigError(f"unknown report topic {topic!r}")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="widomcantor",
        description="certified Widom factors for quadratic-preimage Cantor sets")
    ap.add_argument("--config", required=True, help="TOML or JSON model config")
    ap.add_argument("--precision-bits", type=int, help="override base precision")
    ap.add_argument("--smax-model", type=int, dest="smax_model",
                    help="override model level cap")
    ap.add_argument("--eps-cap", help="override capacity epsilon")
    ap.add_argument("--eps-green", help="override Green epsilon")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="write model metadata and level tables")
    b.add_argument("--out", default=".", help="output directory")
    b.add_argument("--levels", type=int, help="deepest level to write")

    v = sub.add_parser("verify", help="run certified checks")
    v.add_argument("target", choices=["thm1", "thm2", "invariants"])
    v.add_argument("--n", type=int, help="degree cap for thm1")
    v.add_argument("--smax", type=int, help="dyadic cap for thm2")
    v.add_argument("--x0", action="append", help="pole (repeatable)")

    r = sub.add_parser("report", help="emit factor tables")
    r.add_argument("topic", choices=["widom-sup", "widom-l2", "widom-res",
                                     "green", "harnack", "levels"])
    r.add_argument("--format", choices=["csv", "json"], default="csv")
    r.add_argument("--smax", type=int, help="deepest dyadic level")
    r.add_argument("--x0", action="append", help="pole (repeatable)")
    r.add_argument("--level", type=int, help="level for the endpoint table")
    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = parse_config(load_config(args.config))
        if args.precision_bits is not None:
            cfg.base_bits = args.precision_bits
        if args.smax_model is not None:
            cfg.s_max = args.smax_model
        if args.eps_cap is not None:
            cfg.eps_cap = args.eps_cap
        if args.eps_green is not None:
            cfg.eps_green = args.eps_green
        model = build_model(cfg)
        if args.command == "build":
            return cmd_build(model, cfg, args)
        if args.command == "verify":
            return cmd_verify(model, cfg, args)
        if args.command == "report":
            return cmd_report(model, cfg, args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (PrecisionExhausted, DepthExhausted, HorizonExceeded) as exc:
        print(f"resolution exhausted: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, SequenceError, CertificateUnavailable) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
