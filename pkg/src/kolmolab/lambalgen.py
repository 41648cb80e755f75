"""Randomness predicates and the finite van Lambalgen checks.

Plain side: if ``C(x|n) >= n-c`` and ``C(y|x) >= n-c`` then
``C(xy|2n) >= 2n - O(c)``.  Prefix-free side: the same with ``K`` and weak
K-randomness, together with the decoders ``p1``/``p2`` of the counting
argument, realized here as meta-level rank decoders rather than programs of
the reference machine.
"""
from __future__ import annotations

from dataclasses import dataclass

from .codes import bin_str, log2_floor
from .complexity import ABOVE_BOUND, TableStore, all_strings, default_store
from .machine import Mode
from .pins import fit_line
from .soi import Bounds, Lab, RankOutOfRange, Report


class WrongIndexWidth(ValueError):
    """The index is not exactly n - d bits wide (the decoder diverges)."""


class EmptyQualifyingSet(LookupError):
    pass


@dataclass(frozen=True)
class DecoderCostModel:
    """Accounting lengths charged for the two meta-level decoders."""

    c1: int = 16
    c2: int = 16


@dataclass
class DeficiencySets:
    n: int
    d: int
    A: dict      # u -> sorted list of v with K(uv|n) <= 2n - d
    F: list      # sorted u with |A_u(d)| >= 2^(n-d)

    @property
    def pair_count(self) -> int:
        return sum(len(vs) for vs in self.A.values())


def _lab(bounds, store, mode) -> Lab:
    if isinstance(bounds, Lab):
        if bounds.mode is not Mode(mode):
            return Lab(bounds.bounds, mode, bounds.store)
        return bounds
    return Lab(bounds or Bounds(), mode, store or default_store())


def _at_least(v, k: int) -> bool:
    # ABOVE_BOUND means the true value exceeds the bound, so it passes
    return v is ABOVE_BOUND or v >= k


def plain_random_strings(n: int, c: int, bounds=None, store: TableStore | None = None) -> list[str]:
    """All x of length n with C(x|n) >= n - c."""
    if c < 0:
        raise ValueError("randomness slack c must be non-negative")
    lab = _lab(bounds, store, Mode.PLAIN)
    table = lab.table(bin_str(n))
    return [x for x in all_strings(n) if _at_least(table.value(x), n - c)]


def weak_k_random_strings(n: int, c: int, bounds=None, store: TableStore | None = None) -> list[str]:
    """All x of length n with K(x|n) >= n - c."""
    if c < 0:
        raise ValueError("randomness slack c must be non-negative")
    lab = _lab(bounds, store, Mode.PREFIX_FREE)
    table = lab.table(bin_str(n))
    return [x for x in all_strings(n) if _at_least(table.value(x), n - c)]


def _deficiency(v, two_n: int, max_len: int) -> int:
    # above-bound means value >= max_len + 1, so this is an upper estimate
    return two_n - (max_len + 1 if v is ABOVE_BOUND else v)


def _van_lambalgen_sweep(lab: Lab, n: int, cs, name: str, pin, cond_with_n: bool) -> Report:
    rep = Report(name, {"n": n, "c": list(cs), "mode": lab.mode.value,
                        "max_len": lab.bounds.max_len,
                        "pin": list(pin) if pin else None})
    lab.prefetch([bin_str(n), bin_str(2 * n)] + all_strings(n))
    joint = lab.table(bin_str(2 * n))
    single = lab.table(bin_str(n))
    points = []
    for c in cs:
        xs = [x for x in all_strings(n) if _at_least(single.value(x), n - c)]
        worst = None
        worst_alt = None
        count = 0
        for x in xs:
            given_x = lab.table(x)
            for y in all_strings(n):
                if not _at_least(given_x.value(y), n - c):
                    continue
                count += 1
                dfc = _deficiency(joint.value(x + y), 2 * n, lab.bounds.max_len)
                if worst is None or dfc > worst[0]:
                    worst = (dfc, x, y)
        if cond_with_n:
            # the variant conditioning y on (x, n) as well
            for x in xs:
                for y in all_strings(n):
                    if _at_least(lab.C(y, x, bin_str(n)), n - c):
                        dfc = _deficiency(joint.value(x + y), 2 * n, lab.bounds.max_len)
                        worst_alt = dfc if worst_alt is None else max(worst_alt, dfc)
        rec = {"c": c, "qualifying_x": len(xs), "qualifying_pairs": count,
               "D": worst[0] if worst else None,
               "argmax": f"{worst[1]}{worst[2]}" if worst else None}
        if cond_with_n:
            rec["D_given_x_and_n"] = worst_alt
        if worst is None:
            rec["note"] = "EmptyQualifyingSet"
        else:
            points.append((c, worst[0]))
            if pin is not None:
                a, b = pin
                rec["pass"] = worst[0] <= a * c + b + 1e-9
                if not rec["pass"]:
                    rep.fail(f"c={c}: D={worst[0]} > {a}*{c} + {b}")
        rep.records.append(rec)
    if not points:
        raise EmptyQualifyingSet(f"no qualifying pairs at n={n}")
    rep.summary = {"max_D": max(p[1] for p in points),
                   "points": [list(p) for p in points]}
    if pin is None:
        rep.summary["fit"] = list(fit_line(points))
    return rep


def verify_theorem2(n: int, cs=range(0, 4), bounds=None, store: TableStore | None = None,
                    pin=None) -> Report:
    """Max of ``2n - C(xy|2n)`` over pairs with ``C(x|n) >= n-c``, ``C(y|x) >= n-c``."""
    lab = _lab(bounds, store, Mode.PLAIN)
    return _van_lambalgen_sweep(lab, n, list(cs), "theorem2", pin, cond_with_n=True)


# ---------------------------------------------------------------------------
# prefix-free constructions

def _pair_table(lab: Lab, n: int):
    return lab.table(bin_str(n))


def deficiency_sets(n: int, d: int, bounds=None, store: TableStore | None = None) -> DeficiencySets:
    lab = _lab(bounds, store, Mode.PREFIX_FREE)
    table = _pair_table(lab, n)
    limit = 2 * n - d
    A: dict[str, list] = {u: [] for u in all_strings(n)}
    for s, v in table.items():
        if len(s) == 2 * n and v <= limit:
            A[s[:n]].append(s[n:])
    for vs in A.values():
        vs.sort()
    # |A_u| >= 2^(n-d), kept in integers for d > n
    F = [u for u in all_strings(n) if len(A[u]) * 2 ** d >= 2 ** n]
    return DeficiencySets(n, d, A, F)


def _read_index(i: str, n: int, d: int) -> int:
    if len(i) != n - d or n - d < 0:
        raise WrongIndexWidth(f"index has {len(i)} bits, expected n - d = {n - d}")
    return int(i, 2) if i else 0


def p1_candidates(x: str, d: int, bounds=None, store: TableStore | None = None) -> list[str]:
    """Canonical enumeration of u with K(xu|n) <= 2n - 2d."""
    n = len(x)
    lab = _lab(bounds, store, Mode.PREFIX_FREE)
    table = _pair_table(lab, n)
    limit = 2 * n - 2 * d
    return [u for u in all_strings(n) if (v := table.value(x + u)) is not ABOVE_BOUND
            and v <= limit]


def p1_decode(x: str, d: int, i: str, bounds=None, store: TableStore | None = None) -> str:
    n = len(x)
    k = _read_index(i, n, d)
    cands = p1_candidates(x, d, bounds, store)
    if k >= len(cands):
        raise RankOutOfRange(f"rank {k} >= {len(cands)} candidates")
    return cands[k]


def p2_decode(n: int, d: int, i: str, bounds=None, store: TableStore | None = None) -> str:
    k = _read_index(i, n, d)
    fat = deficiency_sets(n, d, bounds, store).F
    if k >= len(fat):
        raise RankOutOfRange(f"rank {k} >= |F(d)| = {len(fat)}")
    return fat[k]


def compute_d0(c: int, costs: DecoderCostModel = DecoderCostModel()) -> int:
    if c < 0:
        raise ValueError("c must be non-negative")
    return max(2 * (c + 4 + costs.c1), 2 * (c + 4 + costs.c2))


def accounting_length(n: int, d: int, cost: int) -> int:
    """Charged length of a decoder call: index, encoded d, and the decoder."""
    return n - d + 2 * log2_floor(d) + 4 + cost


def verify_theorem3(n: int, cs=range(0, 4), bounds=None, store: TableStore | None = None,
                    costs: DecoderCostModel = DecoderCostModel(), pin=None,
                    structural: bool = True) -> Report:
    """Empirical K-deficiency regression plus the case analysis of the
    counting argument, exhaustively for every qualifying pair and d."""
    lab = _lab(bounds, store, Mode.PREFIX_FREE)
    rep = _van_lambalgen_sweep(lab, n, list(cs), "theorem3", pin, cond_with_n=False)
    rep.params["c1"] = costs.c1
    rep.params["c2"] = costs.c2
    if not structural:
        return rep
    s = structural_checks(n, list(cs), lab, costs)
    rep.summary["structural"] = s.summary
    rep.failures.extend(s.failures)
    return rep


def _index_bits(r: int, width: int) -> str:
    return format(r, f"0{width}b") if width else ""


def structural_checks(n: int, cs, lab: Lab, costs: DecoderCostModel) -> Report:
    """Exhaustive checks of the counting argument's steps.

    Threshold identities (nesting, counting, decoder round trips) are run for
    every d whose threshold ``2n - d`` lies in ``[0, max_len]``, including
    negative d, since at desk scale the sets are empty for every positive d.
    The case analysis itself runs for positive d only.
    """
    rep = Report("theorem3-structural", {"n": n, "c1": costs.c1, "c2": costs.c2})
    table = _pair_table(lab, n)
    d_lo = 2 * n - lab.bounds.max_len
    sets = {d: deficiency_sets(n, d, lab) for d in range(d_lo, 2 * n + 2)}
    pair_counts = {}
    max_ratio = 0.0
    p1_trips = p2_trips = 0
    for d, ds in sets.items():
        nxt = sets.get(d + 1)
        if nxt is not None:
            for u in all_strings(n):
                if not set(nxt.A[u]) <= set(ds.A[u]):
                    rep.fail(f"nesting: A_{u}({d + 1}) not within A_{u}({d})")
        cnt = ds.pair_count
        pair_counts[d] = cnt
        if len(ds.F) * 2 ** n > cnt * 2 ** d:
            rep.fail(f"counting: |F({d})| * 2^(n-d) > {cnt}")
        if cnt >= 2 ** (2 * n - d + 1):
            rep.fail(f"program counting: {cnt} pairs with K <= 2n-{d}")
        if d <= n:
            width = n - d
            max_ratio = max(max_ratio, len(ds.F) / 2 ** width)
            for r, u in enumerate(ds.F[:2 ** width]):
                p2_trips += 1
                if p2_decode(n, d, _index_bits(r, width), lab) != u:
                    rep.fail(f"p2 round trip d={d} rank={r}")
            if 2 * d >= d_lo:
                for x in all_strings(n):
                    cands = p1_candidates(x, d, lab)
                    for r, u in enumerate(cands[:2 ** width]):
                        p1_trips += 1
                        if p1_decode(x, d, _index_bits(r, width), lab) != u:
                            rep.fail(f"p1 round trip x={x} d={d} rank={r}")
    f_nest = sum(not set(sets[d + 1].F) <= set(sets[d].F)
                 for d in range(d_lo, 2 * n + 1))

    cases = {"decodable": 0, "a": 0, "b": 0, "b_x_in_F": 0, "b_p2_decodable": 0,
             "guard1_holds": 0, "guard2_holds": 0}
    single = lab.table(bin_str(n))
    for c in cs:
        for x in all_strings(n):
            if not _at_least(single.value(x), n - c):
                continue
            given_x = lab.table(x)
            for d in range(1, n + 1):
                width = n - d
                cands = p1_candidates(x, d, lab)
                g1 = accounting_length(n, d, costs.c1) < n - c
                g2 = accounting_length(n, d, costs.c2) < n - c
                cases["guard1_holds"] += g1
                cases["guard2_holds"] += g2
                for y in all_strings(n):
                    if not _at_least(given_x.value(y), n - c):
                        continue
                    rank = cands.index(y) if y in cands else None
                    if rank is not None and rank < 2 ** width:
                        cases["decodable"] += 1
                        if g1:
                            rep.fail(f"x={x} y={y} d={d}: p1 describes y below n-c")
                        continue
                    kxy = table.value(x + y)
                    if kxy is ABOVE_BOUND or kxy > 2 * n - 2 * d:
                        cases["a"] += 1
                        continue
                    cases["b"] += 1
                    ds = sets[d]
                    if x in ds.F and len(ds.A[x]) * 2 ** d >= 2 ** n:
                        cases["b_x_in_F"] += 1
                    else:
                        rep.fail(f"x={x} y={y} d={d}: case (b) but x not in F(d)")
                        continue
                    if ds.F.index(x) < 2 ** width:
                        cases["b_p2_decodable"] += 1
                        if g1 and g2:
                            rep.fail(f"x={x} y={y} d={d}: case (b) under both guards")
    rep.summary = {"cases": cases, "p1_round_trips": p1_trips,
                   "p2_round_trips": p2_trips, "max_F_ratio": max_ratio,
                   "F_nesting_breaks": f_nest,
                   "pair_counts": {str(k): v for k, v in pair_counts.items()},
                   "violations": len(rep.failures)}
    return rep
