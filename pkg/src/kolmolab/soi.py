"""Information terms, cell grids, the two-part index code, and the
symmetry-of-information verifiers.

Notation follows the usual one: for strings ``x``, ``y`` of lengths
``n_x``, ``n_y``

* ``t_x = C(x | n_x)``, ``t_y = C(y | x, n_y)``, ``t = C(xy | n_x, n_y)``
* ``w = t_x + t_y - t`` (the chain-rule deficiency)
* ``I(x:y) = C(y | n_y) - C(y | x, n_y)``
* ``delta = C2(x | n_x) + C2(y | n_y)`` with ``C2(x | n) = C(C(x | n) | n)``
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .codes import (
    CodeError, LambdaRecord, bin_str, decode_lambda, encode_lambda,
    pack_condition,
)
from .complexity import (
    ABOVE_BOUND, TableStore, all_strings, default_store, length_condition,
)
from .machine import MachineConfig, Mode


class PartialProfile(ValueError):
    def __init__(self, missing):
        super().__init__(f"lookups above bound: {', '.join(missing)}")
        self.missing = tuple(missing)


class ThresholdUnavailable(ValueError):
    pass


class IndexOverflow(AssertionError):
    pass


class MalformedInput(ValueError):
    pass


class RankOutOfRange(ValueError):
    pass


class NoWitness(LookupError):
    pass


def literal_cost(n: int) -> int:
    """Length of the LIT program printing an ``n``-bit string."""
    if n == 0:
        return 0
    return n + 2 * (n.bit_length() - 1) + 6


@dataclass(frozen=True)
class Bounds:
    max_len: int = 16
    fuel: int = 4096
    output_cap: int = 64

    def cfg(self, mode=Mode.PLAIN) -> MachineConfig:
        return MachineConfig(mode, self.fuel, self.output_cap)

    @classmethod
    def covering(cls, out_len: int, mode=Mode.PLAIN, **kw) -> "Bounds":
        """Smallest max_len at which every ``out_len``-bit string has a program."""
        extra = 4 if Mode(mode) is Mode.PREFIX_FREE else 0
        return cls(max_len=literal_cost(out_len) + extra, **kw)


class Lab:
    """Complexity lookups at fixed bounds and mode, backed by a TableStore."""

    def __init__(self, bounds: Bounds, mode=Mode.PLAIN, store: TableStore | None = None):
        self.bounds = bounds
        self.mode = Mode(mode)
        self.store = store or default_store()

    def table(self, condition: str):
        return self.store.get(condition, self.mode, self.bounds.max_len,
                              self.bounds.cfg(self.mode))

    def C(self, x: str, *items: str):
        return self.table(pack_condition(list(items))).value(x)

    def given_len(self, x: str, *lengths: int):
        return self.table(length_condition(*lengths)).value(x)

    def prefetch(self, conditions) -> None:
        self.store.prefetch(conditions, self.mode, self.bounds.max_len,
                            self.bounds.cfg(self.mode))

    def second_order(self, x: str):
        """``C(C(x | n_x) | n_x)``."""
        t_x = self.given_len(x, len(x))
        if t_x is ABOVE_BOUND:
            raise PartialProfile(["C(x|n_x)"])
        return self.given_len(bin_str(t_x), len(x))


def _lab(bounds, store, mode=Mode.PLAIN) -> Lab:
    if isinstance(bounds, Lab):
        return bounds
    return Lab(bounds or Bounds(), mode, store)


def second_order_complexity(x: str, bounds: Bounds | None = None,
                            store: TableStore | None = None) -> int:
    v = _lab(bounds, store).second_order(x)
    if v is ABOVE_BOUND:
        raise PartialProfile(["C2(x|n_x)"])
    return v


# ---------------------------------------------------------------------------
# profiles

@dataclass(frozen=True)
class InfoProfile:
    x: str
    y: str
    t_x: Optional[int]
    t_y: Optional[int]
    t: Optional[int]
    c_y: Optional[int]          # C(y | n_y)
    c_x_given_y: Optional[int]  # C(x | y, n_x)
    c2_x: Optional[int]
    c2_y: Optional[int]
    missing: tuple = ()

    @property
    def partial(self) -> bool:
        return bool(self.missing)

    @property
    def w(self):
        if None in (self.t_x, self.t_y, self.t):
            return None
        return self.t_x + self.t_y - self.t

    @property
    def i_xy(self):
        if None in (self.c_y, self.t_y):
            return None
        return self.c_y - self.t_y

    @property
    def i_yx(self):
        if None in (self.t_x, self.c_x_given_y):
            return None
        return self.t_x - self.c_x_given_y

    @property
    def delta(self):
        if None in (self.c2_x, self.c2_y):
            return None
        return self.c2_x + self.c2_y


def _val(v, name, missing):
    if v is ABOVE_BOUND:
        missing.append(name)
        return None
    return v


def info_profile(x: str, y: str, bounds: Bounds | Lab | None = None,
                 store: TableStore | None = None, strict: bool = True) -> InfoProfile:
    lab = _lab(bounds, store)
    nx, ny = len(x), len(y)
    missing: list[str] = []
    t_x = _val(lab.given_len(x, nx), "C(x|n_x)", missing)
    c_y = _val(lab.given_len(y, ny), "C(y|n_y)", missing)
    t_y = _val(lab.C(y, x, bin_str(ny)), "C(y|x,n_y)", missing)
    c_xy = _val(lab.C(x, y, bin_str(nx)), "C(x|y,n_x)", missing)
    t = _val(lab.given_len(x + y, nx, ny), "C(xy|n_x,n_y)", missing)
    c2_x = c2_y = None
    if t_x is not None:
        c2_x = _val(lab.given_len(bin_str(t_x), nx), "C2(x|n_x)", missing)
    if c_y is not None:
        c2_y = _val(lab.given_len(bin_str(c_y), ny), "C2(y|n_y)", missing)
    if missing and strict:
        raise PartialProfile(missing)
    return InfoProfile(x, y, t_x, t_y, t, c_y, c_xy, c2_x, c2_y, tuple(missing))


def prefetch_pairs(lab: Lab, n_x: int, n_y: int) -> None:
    """Build every table a full n_x-by-n_y sweep will touch."""
    conds = [bin_str(n_x), bin_str(n_y), length_condition(n_x, n_y)]
    conds += [pack_condition([u, bin_str(n_y)]) for u in all_strings(n_x)]
    conds += [pack_condition([v, bin_str(n_x)]) for v in all_strings(n_y)]
    lab.prefetch(conds)


def profile_matrix(n_x: int, n_y: int, bounds: Bounds | Lab | None = None,
                   store: TableStore | None = None) -> dict:
    lab = _lab(bounds, store)
    prefetch_pairs(lab, n_x, n_y)
    return {(x, y): info_profile(x, y, lab, strict=False)
            for x in all_strings(n_x) for y in all_strings(n_y)}


# ---------------------------------------------------------------------------
# cell grids

def threshold_exponent(size: int) -> int:
    """The m with 2^(m-1) < size <= 2^m (m = 0 for size 1)."""
    if size < 1:
        raise ValueError("row must contain at least one 1-cell")
    return (size - 1).bit_length()


@dataclass
class CellGrid:
    n_x: int
    n_y: int
    t: int
    row: str
    rows: dict                      # u -> sorted list of v with C(uv|n_x,n_y) <= t
    m: int = field(init=False)
    fat: list = field(init=False)   # rows with more than 2^(m-1) 1-cells, sorted
    fat_weak: list = field(init=False)  # rows with at least 2^(m-1) 1-cells

    def __post_init__(self):
        self.m = threshold_exponent(len(self.rows.get(self.row, ())))
        # 2|S_u| > 2^m avoids the half-integer at m = 0
        self.fat = sorted(u for u, vs in self.rows.items() if 2 * len(vs) > 2 ** self.m)
        self.fat_weak = sorted(u for u, vs in self.rows.items()
                               if 2 * len(vs) >= 2 ** self.m)

    @property
    def size(self) -> int:
        return sum(len(vs) for vs in self.rows.values())

    def cell(self, u: str, v: str) -> bool:
        return v in self.rows.get(u, ())

    @property
    def s_x(self) -> list:
        return self.rows[self.row]

    def matrix(self) -> list[list[bool]]:
        cols = all_strings(self.n_y)
        return [[v in set(self.rows.get(u, ())) for v in cols]
                for u in all_strings(self.n_x)]


def one_cells(lab: Lab, n_x: int, n_y: int, t: int) -> dict:
    """Rows of the grid at threshold t: u -> sorted 1-cell columns (nonempty rows only)."""
    table = lab.table(length_condition(n_x, n_y))
    rows: dict[str, list] = {}
    n = n_x + n_y
    for s, v in table.items():
        if len(s) == n and v <= t:
            rows.setdefault(s[:n_x], []).append(s[n_x:])
    for vs in rows.values():
        vs.sort()
    return dict(sorted(rows.items()))


def build_cell_grid(x: str, y: str, bounds: Bounds | Lab | None = None,
                    store: TableStore | None = None) -> CellGrid:
    lab = _lab(bounds, store)
    nx, ny = len(x), len(y)
    t = lab.given_len(x + y, nx, ny)
    if t is ABOVE_BOUND:
        raise ThresholdUnavailable(f"C({x}{y} | {nx},{ny}) is above the bound")
    return CellGrid(nx, ny, t, x, one_cells(lab, nx, ny, t))


# ---------------------------------------------------------------------------
# two-part code

class KLCode(NamedTuple):
    """Header plus the two enumeration ranks.

    The parts are kept separate: each stands for its own description whose
    length the decoder is given, which is how the row threshold ``m`` is
    recovered from the width of ``f_index``.
    """

    lam: str
    f_index: str
    s_index: str

    @property
    def bits(self) -> str:
        return self.lam + self.f_index + self.s_index

    def __len__(self):
        return len(self.lam) + len(self.f_index) + len(self.s_index)


def _fixed_width(rank: int, width: int) -> str:
    if rank >= 2 ** width:
        raise IndexOverflow(f"rank {rank} does not fit in {width} bits")
    return format(rank, f"0{width}b") if width else ""


def lambda_record(p: InfoProfile) -> LambdaRecord:
    nx, ny = len(p.x), len(p.y)
    return LambdaRecord(abs(nx - ny), p.t_x, p.t_y, p.w, int(nx > ny))


def kl_encode(x: str, y: str, bounds: Bounds | Lab | None = None,
              store: TableStore | None = None) -> KLCode:
    lab = _lab(bounds, store)
    p = info_profile(x, y, lab, strict=False)
    if p.w is None:
        raise PartialProfile(p.missing)
    if p.w <= 0:
        raise ValueError(f"deficiency w = {p.w} is not positive")
    rec = lambda_record(p)
    grid = CellGrid(len(x), len(y), rec.t, x, one_cells(lab, len(x), len(y), rec.t))
    f_width = rec.t - grid.m + 2
    f_index = _fixed_width(grid.fat.index(x), f_width)
    s_index = _fixed_width(grid.s_x.index(y), grid.m)
    return KLCode(encode_lambda(rec), f_index, s_index)


def kl_decode(code: KLCode, n_x: int, bounds: Bounds | Lab | None = None,
              store: TableStore | None = None) -> tuple[str, str]:
    lab = _lab(bounds, store)
    lam, f_index, s_index = code
    if not lam:
        raise MalformedInput("empty header")
    try:
        rec, used = decode_lambda(lam)
    except CodeError as exc:
        raise MalformedInput(f"header: {exc}") from None
    if used != len(lam):
        raise MalformedInput("trailing bits after header")
    t = rec.t
    m = t + 2 - len(f_index)
    if m < 0 or len(s_index) != m:
        raise MalformedInput(f"index widths {len(f_index)}+{len(s_index)} "
                             f"inconsistent with t = {t}")
    n_y = rec.n_y(n_x)
    if n_y < 0 or t < 0:
        raise MalformedInput("header describes impossible lengths")
    rows = one_cells(lab, n_x, n_y, t)
    fat = sorted(u for u, vs in rows.items() if 2 * len(vs) > 2 ** m)
    i = int(f_index, 2) if f_index else 0
    if i >= len(fat):
        raise RankOutOfRange(f"row rank {i} >= {len(fat)} fat rows")
    x = fat[i]
    j = int(s_index, 2) if s_index else 0
    if j >= len(rows[x]):
        raise RankOutOfRange(f"column rank {j} >= {len(rows[x])} cells in row")
    return x, rows[x][j]


# ---------------------------------------------------------------------------
# verifiers

@dataclass
class Report:
    """Result of one verification: summary fields plus per-item records."""

    name: str
    params: dict
    summary: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, what: str) -> None:
        self.failures.append(what)


def _pairs(n_x, n_y):
    return [(x, y) for x in all_strings(n_x) for y in all_strings(n_y)]


def verify_counting_bounds(n: int, bounds: Bounds | Lab | None = None,
                           store: TableStore | None = None, n_y: int | None = None) -> Report:
    lab = _lab(bounds, store)
    n_x, n_y = n, n if n_y is None else n_y
    rep = Report("counting-bounds", {"n_x": n_x, "n_y": n_y, "max_len": lab.bounds.max_len})
    table = lab.table(length_condition(n_x, n_y))
    by_t: dict[int, dict] = {}
    checked = skipped = 0
    min_s_slack = min_f_slack = None
    weak_larger = 0
    for x, y in _pairs(n_x, n_y):
        t = table.value(x + y)
        if t is ABOVE_BOUND:
            skipped += 1
            continue
        if t not in by_t:
            by_t[t] = one_cells(lab, n_x, n_y, t)
        g = CellGrid(n_x, n_y, t, x, by_t[t])
        checked += 1
        s_slack = 2 ** (t + 1) - g.size
        f_slack = 2 ** (t - g.m + 2) - len(g.fat)
        min_s_slack = s_slack if min_s_slack is None else min(min_s_slack, s_slack)
        min_f_slack = f_slack if min_f_slack is None else min(min_f_slack, f_slack)
        weak_larger += len(g.fat_weak) > len(g.fat)
        ok = s_slack > 0 and f_slack > 0 and x in g.fat and 2 ** (g.m - 1) < len(g.s_x) <= 2 ** g.m
        rep.records.append({"x": x, "y": y, "t": t, "S": g.size, "m": g.m,
                            "Sx": len(g.s_x), "F": len(g.fat), "F_weak": len(g.fat_weak),
                            "pass": ok})
        if not ok:
            rep.fail(f"({x},{y}): |S|={g.size} t={t} m={g.m} |F|={len(g.fat)}")
    rep.summary = {"pairs_checked": checked, "pairs_above_bound": skipped,
                   "violations": len(rep.failures),
                   "min_S_slack": min_s_slack, "min_F_slack": min_f_slack,
                   "grids_where_at_least_rule_adds_rows": weak_larger}
    return rep


def verify_chain_rule_upper(n: int, bounds: Bounds | Lab | None = None,
                            store: TableStore | None = None,
                            pin: int | None = None) -> Report:
    """Measure ``max C(xy|n,n) - [C(y|n) + C(x|y,n) + 2 C2(y|n)]`` over all pairs."""
    lab = _lab(bounds, store)
    prefetch_pairs(lab, n, n)
    rep = Report("chain-rule-upper", {"n": n, "max_len": lab.bounds.max_len, "pin": pin})
    excess = None
    partial = 0
    for x, y in _pairs(n, n):
        p = info_profile(x, y, lab, strict=False)
        if None in (p.t, p.c_y, p.c_x_given_y, p.c2_y):
            partial += 1
            continue
        e = p.t - (p.c_y + p.c_x_given_y + 2 * p.c2_y)
        rep.records.append({"x": x, "y": y, "excess": e})
        excess = e if excess is None else max(excess, e)
    rep.summary = {"B": excess, "pairs": len(rep.records), "partial": partial}
    if pin is not None and excess is not None and excess > pin:
        rep.fail(f"B({n}) = {excess} exceeds pinned {pin}")
    return rep


def bound_term(p: InfoProfile) -> float:
    """``log2(1 + I(x:y)) + log2(1 + |n_x - n_y|) + delta``; negative I counts as 0."""
    i = max(p.i_xy, 0)
    return math.log2(1 + i) + math.log2(1 + abs(len(p.x) - len(p.y))) + p.delta


def verify_main_theorem(n_x: int, n_y: int, bounds: Bounds | Lab | None = None,
                        store: TableStore | None = None, pin=None) -> Report:
    """Check ``w <= a*g + b`` on every pair with ``w > 0``, plus the code checks.

    Without ``pin`` the constants are fitted from this sweep and recorded in
    the summary; with ``pin = (a, b)`` each pair is checked against them.
    """
    from .pins import fit_line

    lab = _lab(bounds, store)
    prefetch_pairs(lab, n_x, n_y)
    rep = Report("main-theorem", {"n_x": n_x, "n_y": n_y,
                                  "max_len": lab.bounds.max_len,
                                  "pin": list(pin) if pin else None})
    points = []
    skipped_w = partial = 0
    round_trips = 0
    # measured constant of C(x|n_x) <= C(x|n_x, lambda) + O(|lambda|)
    lam_gap = None
    for x, y in _pairs(n_x, n_y):
        p = info_profile(x, y, lab, strict=False)
        if p.w is None or p.delta is None or p.i_xy is None:
            partial += 1
            continue
        if p.w <= 0:
            skipped_w += 1
            continue
        g = bound_term(p)
        points.append((g, p.w))
        code = kl_encode(x, y, lab)
        t = p.t
        rec_ok = kl_decode(code, n_x, lab) == (x, y)
        len_ok = len(code) == len(code.lam) + t + 2
        m = t + 2 - len(code.f_index)
        width_ok = len(code.f_index) == t - m + 2 and len(code.s_index) == m
        round_trips += rec_ok
        c_x_lam = lab.C(x, bin_str(n_x), code.lam)
        if c_x_lam is not ABOVE_BOUND:
            gap = p.t_x - c_x_lam
            lam_gap = gap if lam_gap is None else max(lam_gap, gap)
        rec = {"x": x, "y": y, "t_x": p.t_x, "t_y": p.t_y, "t": t, "w": p.w,
               "i_xy": p.i_xy, "i_yx": p.i_yx, "delta": p.delta,
               "bound_term": round(g, 6), "lambda": len(code.lam),
               "code_len": len(code), "round_trip": rec_ok,
               "c_x_given_lambda": None if c_x_lam is ABOVE_BOUND else c_x_lam}
        if not (rec_ok and len_ok and width_ok):
            rep.fail(f"({x},{y}): two-part code check failed")
        if pin is not None:
            a, b = pin
            rec["pass"] = p.w <= a * g + b + 1e-9
            if not rec["pass"]:
                rep.fail(f"({x},{y}): w={p.w} > {a}*{g:.4f} + {b}")
        rep.records.append(rec)
    rep.summary = {"pairs_w_positive": len(points), "pairs_w_nonpositive": skipped_w,
                   "partial": partial, "round_trips": round_trips,
                   "max_w": max((w for _, w in points), default=None),
                   "max_lambda_step_gap": lam_gap}
    if pin is None and points:
        a, b = fit_line(points)
        rep.summary["fit"] = [a, b]
    return rep


def find_asymmetry_witness(n_y: int = 6, bounds: Bounds | Lab | None = None,
                           store: TableStore | None = None):
    """Search ``x = bin(n_y)``, ``y`` over all n_y-bit strings, for the
    largest ``I(y:x) - I(x:y)``; ties go to the lexicographically first y."""
    lab = _lab(bounds, store)
    x = bin_str(n_y)
    prefetch_pairs(lab, len(x), n_y)
    best = None
    for y in all_strings(n_y):
        p = info_profile(x, y, lab, strict=False)
        if p.i_xy is None or p.i_yx is None:
            continue
        gap = p.i_yx - p.i_xy
        if best is None or gap > best[0]:
            best = (gap, y, p)
    if best is None:
        raise NoWitness(f"every profile at n_y={n_y} is partial")
    return x, best[1], best[2]
