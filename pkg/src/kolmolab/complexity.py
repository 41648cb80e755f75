"""Exhaustive, bounded conditional complexity.

``C_{L,T}(x | y)`` is the length of the shortest program of at most ``L`` bits
that makes the reference machine print ``x`` on condition ``y`` within the
fuel/output bounds of the config.  Outputs no such program reaches get
:data:`ABOVE_BOUND`, which is deliberately not an integer.
"""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterable, Mapping

from .codes import bin_str, pack_condition, sd_encode
from .machine import (
    OPCODES, MachineConfig, Mode, execute, machine_fingerprint,
)


class _AboveBound:
    __slots__ = ()

    def __repr__(self):
        return "ABOVE_BOUND"

    def __reduce__(self):
        return (_above_bound, ())


def _above_bound():
    return ABOVE_BOUND


ABOVE_BOUND = object.__new__(_AboveBound)

DEFAULT_MAX_LEN_GUARD = 24
CACHE_FORMAT = "kolmolab-table/1"


class BoundTooLarge(ValueError):
    pass


class CacheError(Exception):
    pass


class FingerprintMismatch(CacheError):
    pass


class CorruptCache(CacheError):
    pass


@dataclass(frozen=True)
class TableKey:
    condition: str
    mode: Mode
    max_len: int
    cfg: MachineConfig
    machine_fingerprint: str = field(default_factory=machine_fingerprint)

    def digest(self) -> str:
        text = json.dumps(self.as_dict(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:20]

    def as_dict(self) -> dict:
        return {
            "condition": self.condition,
            "mode": self.mode.value,
            "max_len": self.max_len,
            "fuel": self.cfg.fuel,
            "output_cap": self.cfg.output_cap,
            "machine_fingerprint": self.machine_fingerprint,
        }


class ComplexityTable(Mapping):
    """Immutable map output -> minimal program length."""

    def __init__(self, key: TableKey, entries: dict[str, int]):
        self.key = key
        self._entries = dict(entries)

    def __getitem__(self, x):
        return self._entries[x]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def value(self, x: str):
        return self._entries.get(x, ABOVE_BOUND)

    def __eq__(self, other):
        if not isinstance(other, ComplexityTable):
            return NotImplemented
        return self.key == other.key and self._entries == other._entries

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return (f"ComplexityTable(cond={self.key.condition!r}, "
                f"mode={self.key.mode.value}, L={self.key.max_len}, "
                f"outputs={len(self)})")

    def counts_by_value(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for v in self._entries.values():
            out[v] = out.get(v, 0) + 1
        return out

    def restricted(self, max_len: int) -> dict[str, int]:
        return {x: v for x, v in self._entries.items() if v <= max_len}


# ---------------------------------------------------------------------------
# enumeration

_CODE = {name: code for name, (code, _) in OPCODES.items()}


def _operand_choices(budget: int, lit: bool):
    """Yield (k, operand_bits) with canonical operand codes fitting ``budget``.

    Zero operands are skipped: every zero-operand opcode is a no-op, so any
    program using one is dominated by the same program without it.
    """
    k = 1
    while True:
        enc = sd_encode(k)
        need = len(enc) + (k if lit else 0)
        if need > budget:
            # sd length and payload both grow with k
            return
        yield k, enc
        k += 1


def root_branches(max_len: int) -> list[str]:
    """First-opcode labels used to split the search for parallel workers."""
    return [name for name in OPCODES if len(_CODE[name]) <= max_len]


def enumerate_pruned(condition: str, mode: Mode, max_len: int,
                     cfg: MachineConfig, roots: Iterable[str] | None = None,
                     with_empty: bool = True) -> dict[str, int]:
    """Minimal program length per output, walking only valid opcode sequences.

    Execution state is carried down the search tree, so each program costs
    one opcode step.  Programs that are dominated by a strictly shorter
    program with identical output are not visited: non-canonical operand
    codes, zero operands, no-op REWIND/DUP/COPYALL, and anything after HALT.
    """
    mode = Mode(mode)
    plain = mode is Mode.PLAIN
    cond = condition
    clen = len(cond)
    cap = cfg.output_cap
    fuel = cfg.fuel
    neg = str.maketrans("01", "10")
    best: dict[str, int] = {}
    allowed = set(roots) if roots is not None else set(OPCODES)

    def record(out, length):
        old = best.get(out)
        if old is None or length < old:
            best[out] = length

    def dfs(used, out, cursor, cost, top):
        if plain:
            if not top or with_empty:
                record(out, used)
        budget = max_len - used

        def ok(name):
            return not top or name in allowed

        # HALT
        if budget >= 4 and ok("HALT") and cost + 1 <= fuel:
            if not plain:
                record(out, used + 4)
        olen = len(out)
        # COPYALL
        if budget >= 3 and cursor < clen and ok("COPYALL"):
            g = clen - cursor
            c2 = cost + 1 + g
            if olen + g <= cap and c2 <= fuel:
                dfs(used + 3, out + cond[cursor:], clen, c2, False)
        # REWIND
        if budget >= 4 and cursor > 0 and ok("REWIND") and cost + 1 <= fuel:
            dfs(used + 4, out, 0, cost + 1, False)
        # DUP
        if budget >= 4 and olen > 0 and ok("DUP"):
            c2 = cost + 1 + olen
            if 2 * olen <= cap and c2 <= fuel:
                dfs(used + 4, out + out, cursor, c2, False)
        # LIT
        if budget >= 2 + 4 + 1 and ok("LIT"):
            for k, enc in _operand_choices(budget - 2, True):
                c2 = cost + 1 + k
                if olen + k > cap or c2 > fuel:
                    break
                u2 = used + 2 + len(enc) + k
                for payload in product("01", repeat=k):
                    dfs(u2, out + "".join(payload), cursor, c2, False)
        # ZEROS
        if budget >= 2 + 4 and ok("ZEROS"):
            for k, enc in _operand_choices(budget - 2, False):
                c2 = cost + 1 + k
                if olen + k > cap or c2 > fuel:
                    break
                dfs(used + 2 + len(enc), out + "0" * k, cursor, c2, False)
        # COPY / FLIP / SKIP
        for name, clen_code in (("COPY", 3), ("SKIP", 5), ("FLIP", 5)):
            if budget < clen_code + 4 or not ok(name):
                continue
            for k, enc in _operand_choices(budget - clen_code, False):
                end = cursor + k
                if end > clen:
                    break
                grow = 0 if name == "SKIP" else k
                c2 = cost + 1 + grow
                if olen + grow > cap or c2 > fuel:
                    break
                if name == "COPY":
                    o2 = out + cond[cursor:end]
                elif name == "FLIP":
                    o2 = out + cond[cursor:end].translate(neg)
                else:
                    o2 = out
                dfs(used + clen_code + len(enc), o2, end, c2, False)

    dfs(0, "", 0, 0, True)
    return best


def enumerate_naive(condition: str, mode: Mode, max_len: int,
                    cfg: MachineConfig) -> dict[str, int]:
    """Reference enumerator: run every bitstring of length <= max_len."""
    cfg = MachineConfig(mode, cfg.fuel, cfg.output_cap)
    best: dict[str, int] = {}
    for n in range(max_len + 1):
        for bits in product("01", repeat=n):
            res = execute("".join(bits), condition, cfg)
            if res.halted and res.output not in best:
                best[res.output] = n
    return best


def _worker(args):
    condition, mode, max_len, cfg, roots = args
    return enumerate_pruned(condition, mode, max_len, cfg, roots=roots,
                            with_empty=False)


def _merge_min(parts: Iterable[dict[str, int]]) -> dict[str, int]:
    best: dict[str, int] = {}
    for part in parts:
        for x, v in part.items():
            old = best.get(x)
            if old is None or v < old:
                best[x] = v
    return best


def build_table(condition: str, mode: Mode | str, max_len: int,
                cfg: MachineConfig | None = None, workers: int = 1,
                guard: int = DEFAULT_MAX_LEN_GUARD) -> ComplexityTable:
    mode = Mode(mode)
    cfg = MachineConfig(mode, (cfg or MachineConfig()).fuel,
                        (cfg or MachineConfig()).output_cap)
    if max_len > guard:
        raise BoundTooLarge(f"max_len {max_len} exceeds desk guard {guard}")
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    key = TableKey(condition, mode, max_len, cfg)
    if workers <= 1:
        return ComplexityTable(key, enumerate_pruned(condition, mode, max_len, cfg))
    tasks = [(condition, mode, max_len, cfg, [r]) for r in root_branches(max_len)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_worker, tasks))
    if mode is Mode.PLAIN:
        parts.append({"": 0})
    return ComplexityTable(key, _merge_min(parts))


# ---------------------------------------------------------------------------
# on-disk cache

def save_table(t: ComplexityTable, path) -> None:
    """Write ``t`` as line-oriented JSON: header line, then one entry per line.

    Bitstrings are stored as ``"<bitlength>:<hex>"`` so leading zeros survive.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"format": CACHE_FORMAT, "key": t.key.as_dict(), "entries": len(t)}
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for x in sorted(t, key=lambda s: (len(s), s)):
            fh.write(f"{hex_bits(x)} {t[x]}\n")
        fh.write("end\n")
    os.replace(tmp, path)


def load_table(path, expect: TableKey | None = None) -> ComplexityTable:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
    except (OSError, IndexError, ValueError) as exc:
        raise CorruptCache(f"{path}: unreadable header ({exc})") from None
    if header.get("format") != CACHE_FORMAT:
        raise CorruptCache(f"{path}: unknown format {header.get('format')!r}")
    kd = header["key"]
    if kd.get("machine_fingerprint") != machine_fingerprint():
        raise FingerprintMismatch(
            f"{path}: table built for machine {kd.get('machine_fingerprint')}, "
            f"current machine is {machine_fingerprint()}")
    if not lines or lines[-1] != "end" or len(lines) != header["entries"] + 2:
        raise CorruptCache(f"{path}: truncated")
    mode = Mode(kd["mode"])
    key = TableKey(kd["condition"], mode, kd["max_len"],
                   MachineConfig(mode, kd["fuel"], kd["output_cap"]),
                   kd["machine_fingerprint"])
    if expect is not None and key != expect:
        raise FingerprintMismatch(f"{path}: key mismatch")
    entries = {}
    try:
        for line in lines[1:-1]:
            h, v = line.split()
            entries[unhex_bits(h)] = int(v)
    except ValueError as exc:
        raise CorruptCache(f"{path}: bad entry ({exc})") from None
    return ComplexityTable(key, entries)


def hex_bits(x: str) -> str:
    if not x:
        return "0:"
    return f"{len(x)}:{int(x, 2):x}"


def unhex_bits(s: str) -> str:
    n, _, h = s.partition(":")
    n = int(n)
    if n == 0:
        return ""
    return format(int(h, 16), f"0{n}b")


class TableStore:
    """Memoizing source of complexity tables, optionally backed by a cache dir.

    The cache directory has one file per :class:`TableKey`, named by the
    key digest.
    """

    def __init__(self, cache_dir=None, workers: int = 1,
                 guard: int = DEFAULT_MAX_LEN_GUARD):
        if cache_dir is None:
            cache_dir = os.environ.get("KOLMOLAB_CACHE_DIR") or None
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.workers = workers
        self.guard = guard
        self._mem: dict[TableKey, ComplexityTable] = {}

    def _path(self, key: TableKey) -> Path:
        return self.cache_dir / f"{key.digest()}.table"

    def get(self, condition: str, mode, max_len: int,
            cfg: MachineConfig | None = None) -> ComplexityTable:
        mode = Mode(mode)
        cfg = cfg or MachineConfig()
        cfg = MachineConfig(mode, cfg.fuel, cfg.output_cap)
        if max_len > self.guard:
            raise BoundTooLarge(f"max_len {max_len} exceeds desk guard {self.guard}")
        key = TableKey(condition, mode, max_len, cfg)
        t = self._mem.get(key)
        if t is not None:
            return t
        if self.cache_dir is not None and self._path(key).exists():
            t = load_table(self._path(key), expect=key)
        else:
            t = build_table(condition, mode, max_len, cfg, guard=self.guard)
            if self.cache_dir is not None:
                save_table(t, self._path(key))
        self._mem[key] = t
        return t

    def prefetch(self, conditions: Iterable[str], mode, max_len: int,
                 cfg: MachineConfig | None = None) -> None:
        """Build many tables, one per worker process, into the memo."""
        mode = Mode(mode)
        cfg = cfg or MachineConfig()
        cfg = MachineConfig(mode, cfg.fuel, cfg.output_cap)
        todo = []
        for c in dict.fromkeys(conditions):
            key = TableKey(c, mode, max_len, cfg)
            if key in self._mem:
                continue
            if self.cache_dir is not None and self._path(key).exists():
                self.get(c, mode, max_len, cfg)
                continue
            todo.append(c)
        if self.workers <= 1 or len(todo) <= 1:
            for c in todo:
                self.get(c, mode, max_len, cfg)
            return
        if max_len > self.guard:
            raise BoundTooLarge(f"max_len {max_len} exceeds desk guard {self.guard}")
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            results = pool.map(_build_entries, [(c, mode, max_len, cfg) for c in todo])
            for c, entries in zip(todo, results):
                key = TableKey(c, mode, max_len, cfg)
                t = ComplexityTable(key, entries)
                if self.cache_dir is not None:
                    save_table(t, self._path(key))
                self._mem[key] = t


def _build_entries(args):
    c, mode, max_len, cfg = args
    return enumerate_pruned(c, mode, max_len, cfg)


_default_store = TableStore()


def default_store() -> TableStore:
    return _default_store


def complexity_of(x: str, condition_items, mode=Mode.PLAIN, max_len: int = 16,
                  cfg: MachineConfig | None = None, store: TableStore | None = None):
    store = store or _default_store
    return store.get(pack_condition(list(condition_items)), mode, max_len, cfg).value(x)


def length_condition(*lengths: int) -> str:
    """Condition string for conditioning on one or more integers."""
    return pack_condition([bin_str(n) for n in lengths])


def build_pair_grid(n_x: int, n_y: int, mode=Mode.PLAIN, max_len: int = 16,
                    cfg: MachineConfig | None = None,
                    store: TableStore | None = None, guard: int = 14) -> dict:
    """``C(uv | n_x, n_y)`` for every cell of the 2^n_x by 2^n_y table."""
    if n_x + n_y > guard:
        raise BoundTooLarge(f"n_x + n_y = {n_x + n_y} exceeds grid guard {guard}")
    store = store or _default_store
    table = store.get(length_condition(n_x, n_y), mode, max_len, cfg)
    return {(u, v): table.value(u + v)
            for u in all_strings(n_x) for v in all_strings(n_y)}


def all_strings(n: int) -> list[str]:
    if n == 0:
        return [""]
    return [format(i, f"0{n}b") for i in range(2 ** n)]
