"""Command-line front end.

Exit status: 0 when every check passed, 1 when some check failed, 2 on
usage or configuration errors (including the desk-scale guards).
"""
from __future__ import annotations

import argparse
import os
import sys
import time

from . import lambalgen, soi
from .codes import pack_condition
from .complexity import (
    ABOVE_BOUND, DEFAULT_MAX_LEN_GUARD, BoundTooLarge, CacheError, TableStore,
)
from .machine import Mode
from .pins import PinError, load_pins, save_pins
from .report import make_manifest, write_outputs

PAIR_GUARD = 14


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--cache-dir", default=os.environ.get("KOLMOLAB_CACHE_DIR"),
                   help="table cache directory (default: $KOLMOLAB_CACHE_DIR, else memory only)")
    g.add_argument("--max-len", type=int, default=None,
                   help="program length bound L (default: smallest L covering the outputs)")
    g.add_argument("--fuel", type=int, default=4096)
    g.add_argument("--output-cap", type=int, default=64)
    g.add_argument("--mode", choices=["plain", "prefix"], default="plain")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--format", choices=["structured", "csv"], default="structured")
    g.add_argument("--pin-file", default=os.environ.get("KOLMOLAB_PIN_FILE"))
    g.add_argument("--pin", action="store_true",
                   help="record fitted constants missing from the pin file")
    g.add_argument("--out-dir", default="reports")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="kolmolab",
                                     description="Exhaustive algorithmic-information lab")
    sub = parser.add_subparsers(dest="group", required=True)

    table = sub.add_parser("table").add_subparsers(dest="cmd", required=True)
    for name in ("build", "query"):
        t = table.add_parser(name, parents=[common])
        t.add_argument("--cond", default=None, help="raw condition bits")
        t.add_argument("--cond-item", action="append", default=None,
                       help="condition item (repeatable; packed in order)")
        if name == "query":
            t.add_argument("--x", required=True)

    s = sub.add_parser("soi").add_subparsers(dest="cmd", required=True)
    for name in ("profile", "grid"):
        t = s.add_parser(name, parents=[common])
        t.add_argument("--x", required=True)
        t.add_argument("--y", required=True)
    t = s.add_parser("verify", parents=[common])
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--n-y", type=int, default=None)

    lb = sub.add_parser("lambalgen").add_subparsers(dest="cmd", required=True)
    for name in ("verify-t2", "verify-t3"):
        t = lb.add_parser(name, parents=[common])
        t.add_argument("--n", type=int, required=True)
        t.add_argument("--c-max", type=int, default=None, help="default: n")
        if name == "verify-t3":
            t.add_argument("--c1", type=int, default=lambalgen.DecoderCostModel.c1)
            t.add_argument("--c2", type=int, default=lambalgen.DecoderCostModel.c2)
    t = lb.add_parser("sets", parents=[common])
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--d", type=int, required=True)

    t = sub.add_parser("witness", parents=[common])
    t.add_argument("--n-y", type=int, default=6)

    sub.add_parser("report", parents=[common],
                   help="run the whole battery at desk scale")
    return parser


def _bounds(args, out_len: int, mode=Mode.PLAIN) -> soi.Bounds:
    if args.max_len is not None:
        b = soi.Bounds(args.max_len, args.fuel, args.output_cap)
    else:
        b = soi.Bounds.covering(out_len, mode, fuel=args.fuel, output_cap=args.output_cap)
    if b.max_len > DEFAULT_MAX_LEN_GUARD:
        raise UsageError(f"max_len {b.max_len} exceeds desk guard {DEFAULT_MAX_LEN_GUARD}")
    return b


def _pair_guard(n_x: int, n_y: int) -> None:
    if n_x < 1 or n_y < 1:
        raise UsageError("string lengths must be positive")
    if n_x + n_y > PAIR_GUARD:
        raise UsageError(f"n_x + n_y = {n_x + n_y} exceeds desk guard {PAIR_GUARD}")


def _condition(args) -> str:
    if args.cond is not None and args.cond_item:
        raise UsageError("give --cond or --cond-item, not both")
    if args.cond_item:
        return pack_condition(args.cond_item)
    return args.cond or ""


def _check_bits(*values) -> None:
    for v in values:
        if v is not None and set(v) - {"0", "1"}:
            raise UsageError(f"not a bitstring: {v!r}")


class _Pins:
    def __init__(self, args):
        self.path = args.pin_file
        self.write = args.pin
        self.pins = load_pins(self.path) if self.path else {}
        self.new = {}

    def get(self, key):
        return self.pins.get(key)

    def offer(self, key, value):
        # first measurement wins; existing pins are never replaced
        if (key not in self.pins and key not in self.new and self.write
                and self.path and value is not None):
            self.new[key] = value

    def flush(self):
        if self.new:
            self.pins.update(self.new)
            self.new = {}
            save_pins(self.path, self.pins)


def _soi_reports(args, store, pins, n_x, n_y):
    _pair_guard(n_x, n_y)
    bounds = _bounds(args, n_x + n_y)
    lab = soi.Lab(bounds, Mode.PLAIN, store)
    reps = [soi.verify_counting_bounds(n_x, lab, n_y=n_y)]
    if n_x == n_y:
        key = "chain-rule-B"
        rep = soi.verify_chain_rule_upper(n_x, lab, pin=pins.get(key))
        pins.offer(key, rep.summary.get("B"))
        reps.append(rep)
    key = "main-theorem"
    pin = pins.get(key)
    rep = soi.verify_main_theorem(n_x, n_y, lab, pin=pin)
    if pin is None:
        fit = rep.summary.get("fit")
        pins.offer(key, tuple(fit) if fit else None)
    reps.append(rep)
    return reps


def _lambalgen_report(args, store, pins, which: str, n: int):
    if n < 1 or 2 * n > PAIR_GUARD:
        raise UsageError(f"n = {n} outside desk guard 1 <= n <= {PAIR_GUARD // 2}")
    cs = range(0, (args.c_max if getattr(args, "c_max", None) is not None else n) + 1)
    key = "theorem2" if which == "t2" else "theorem3"
    pin = pins.get(key)
    if which == "t2":
        lab = soi.Lab(_bounds(args, 2 * n), Mode.PLAIN, store)
        rep = lambalgen.verify_theorem2(n, cs, lab, pin=pin)
    else:
        lab = soi.Lab(_bounds(args, 2 * n, Mode.PREFIX_FREE), Mode.PREFIX_FREE, store)
        costs = lambalgen.DecoderCostModel(getattr(args, "c1", 16), getattr(args, "c2", 16))
        rep = lambalgen.verify_theorem3(n, cs, lab, costs=costs, pin=pin)
    if pin is None:
        pins.offer(key, tuple(rep.summary["fit"]))
    return rep


def _witness_report(args, store, pins, n_y: int):
    if n_y < 1 or n_y.bit_length() + n_y > PAIR_GUARD:
        raise UsageError(f"n_y = {n_y} outside desk guard")
    lab = soi.Lab(_bounds(args, n_y.bit_length() + n_y), Mode.PLAIN, store)
    x, y, p = soi.find_asymmetry_witness(n_y, lab)
    gap = p.i_yx - p.i_xy
    rep = soi.Report("asymmetry-witness", {"n_y": n_y, "max_len": lab.bounds.max_len})
    rep.summary = {"x": x, "y": y, "i_xy": p.i_xy, "i_yx": p.i_yx, "gap": gap}
    rep.records.append(_profile_record(p))
    key = f"witness-gap-{n_y}"
    pinned = pins.get(key)
    if pinned is not None and gap < pinned:
        rep.fail(f"gap {gap} below pinned {pinned}")
    pins.offer(key, gap)
    return rep


def _profile_record(p) -> dict:
    rec = {"x": p.x, "y": p.y, "t_x": p.t_x, "t_y": p.t_y, "t": p.t, "w": p.w,
           "i_xy": p.i_xy, "i_yx": p.i_yx, "delta": p.delta}
    if not p.partial:
        rec["bound_term"] = round(soi.bound_term(p), 6)
    else:
        rec["missing"] = list(p.missing)
    return rec


def _dispatch(args, store):
    """Run the command; returns (stem, reports, text_for_stdout)."""
    pins = _Pins(args)
    g, cmd = args.group, getattr(args, "cmd", None)
    if g == "table":
        cond = _condition(args)
        _check_bits(cond, getattr(args, "x", None))
        mode = Mode(args.mode)
        b = _bounds(args, len(args.x) if cmd == "query" else 6, mode)
        t = store.get(cond, mode, b.max_len, b.cfg(mode))
        if cmd == "query":
            v = t.value(args.x)
            return None, [], str(v) if v is not ABOVE_BOUND else "ABOVE_BOUND"
        counts = t.counts_by_value()
        lines = [f"condition={cond or 'ε'} mode={mode.value} L={b.max_len} outputs={len(t)}"]
        lines += [f"  length {k}: {counts[k]} outputs" for k in sorted(counts)]
        return None, [], "\n".join(lines)
    if g == "soi" and cmd in ("profile", "grid"):
        _check_bits(args.x, args.y)
        _pair_guard(len(args.x), len(args.y))
        lab = soi.Lab(_bounds(args, len(args.x) + len(args.y)), Mode.PLAIN, store)
        if cmd == "profile":
            p = soi.info_profile(args.x, args.y, lab, strict=False)
            rep = soi.Report("profile", {"x": args.x, "y": args.y,
                                         "max_len": lab.bounds.max_len})
            rep.records.append(_profile_record(p))
            return f"soi-profile-{args.x}-{args.y}", [rep], None
        grid = soi.build_cell_grid(args.x, args.y, lab)
        rep = soi.Report("grid", {"x": args.x, "y": args.y, "max_len": lab.bounds.max_len})
        rep.summary = {"t": grid.t, "S": grid.size, "Sx": len(grid.s_x), "m": grid.m,
                       "F": grid.fat, "F_at_least_rule": grid.fat_weak}
        rep.records = [{"row": u, "cells": vs} for u, vs in grid.rows.items()]
        return f"soi-grid-{args.x}-{args.y}", [rep], None
    if g == "soi":
        n_y = args.n_y if args.n_y is not None else args.n
        reps = _soi_reports(args, store, pins, args.n, n_y)
        pins.flush()
        return f"soi-verify-{args.n}-{n_y}", reps, None
    if g == "lambalgen" and cmd == "sets":
        if args.n < 1 or 2 * args.n > PAIR_GUARD:
            raise UsageError("n outside desk guard")
        lab = soi.Lab(_bounds(args, 2 * args.n, Mode.PREFIX_FREE), Mode.PREFIX_FREE, store)
        ds = lambalgen.deficiency_sets(args.n, args.d, lab)
        rep = soi.Report("deficiency-sets", {"n": args.n, "d": args.d,
                                             "max_len": lab.bounds.max_len})
        rep.summary = {"pairs": ds.pair_count, "F": ds.F}
        rep.records = [{"u": u, "A": vs} for u, vs in ds.A.items() if vs]
        return f"lambalgen-sets-{args.n}-{args.d}", [rep], None
    if g == "lambalgen":
        which = "t2" if cmd == "verify-t2" else "t3"
        rep = _lambalgen_report(args, store, pins, which, args.n)
        pins.flush()
        return f"lambalgen-{cmd}-{args.n}", [rep], None
    if g == "witness":
        rep = _witness_report(args, store, pins, args.n_y)
        pins.flush()
        return f"witness-{args.n_y}", [rep], None
    if g == "report":
        if args.max_len is not None:
            raise UsageError("report picks its own bounds; drop --max-len")
        reps = []
        for n_x, n_y in ((3, 3), (4, 4), (3, 5)):
            reps += _soi_reports(args, store, pins, n_x, n_y)
            pins.flush()
        for which in ("t2", "t3"):
            for n in (3, 4):
                args.c_max = n
                reps.append(_lambalgen_report(args, store, pins, which, n))
                pins.flush()
        reps.append(_witness_report(args, store, pins, 6))
        pins.flush()
        return "report", reps, None
    raise UsageError(f"unknown command {g} {cmd}")


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.time()
    try:
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        store = TableStore(args.cache_dir, workers=args.workers)
        stem, reports, text = _dispatch(args, store)
    except (UsageError, BoundTooLarge, PinError, CacheError) as exc:
        print(f"kolmolab: error: {exc}", file=sys.stderr)
        return 2
    if text is not None:
        print(text)
        return 0
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("cache_dir", "out_dir", "workers")}
    manifest = make_manifest(" ".join(filter(None, [args.group, getattr(args, "cmd", None)])),
                             params, {"fuel": args.fuel, "output_cap": args.output_cap,
                                      "max_len": args.max_len}, reports, started)
    path = write_outputs(args.out_dir, stem, reports, args.format, manifest)
    for rep in reports:
        print(f"{'PASS' if rep.passed else 'FAIL'}  {rep.name}  {_short(rep)}")
    print(f"report: {path}")
    return 0 if all(r.passed for r in reports) else 1


def _short(rep) -> str:
    keys = [k for k in rep.summary if not isinstance(rep.summary[k], (list, dict))][:4]
    return " ".join(f"{k}={rep.summary[k]}" for k in keys)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

