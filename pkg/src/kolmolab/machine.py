"""The fixed reference machine.

Programs are bitstrings read MSB-first as a sequence of opcodes.  The opcode
field is a complete prefix code::

    00     LIT  k   then k raw payload bits      append payload
    01     ZEROS k                               append 0^k
    100    COPY k                                append next k condition bits
    101    COPYALL                               append condition[cursor:]
    1100   REWIND                                cursor := 0
    1101   DUP                                   output := output + output
    1110   HALT
    11110  SKIP k                                cursor += k
    11111  FLIP k                                append next k condition bits, negated

Integer operands use the self-delimiting code from :mod:`kolmolab.codes`.
Execution cost is one unit per opcode executed plus one per output bit
appended.
"""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .codes import MalformedPair, UnexpectedEnd, sd_decode


class Mode(str, enum.Enum):
    PLAIN = "plain"
    PREFIX_FREE = "prefix"


class FailReason(str, enum.Enum):
    INCOMPLETE_OPCODE = "IncompleteOpcode"
    OPERAND_UNDERFLOW = "OperandUnderflow"
    CONDITION_OVERRUN = "ConditionOverrun"
    FUEL_EXHAUSTED = "FuelExhausted"
    OUTPUT_CAP_EXCEEDED = "OutputCapExceeded"
    TRAILING_BITS_AFTER_HALT = "TrailingBitsAfterHalt"
    HALT_NOT_REACHED = "HaltNotReached"


# mnemonic -> (codeword, has integer operand)
OPCODES = {
    "LIT": ("00", True),
    "ZEROS": ("01", True),
    "COPY": ("100", True),
    "COPYALL": ("101", False),
    "REWIND": ("1100", False),
    "DUP": ("1101", False),
    "HALT": ("1110", False),
    "SKIP": ("11110", True),
    "FLIP": ("11111", True),
}
_BY_CODE = {code: name for name, (code, _) in OPCODES.items()}
_MAX_CODE_LEN = max(len(c) for c, _ in OPCODES.values())

MACHINE_VERSION = 1


def machine_fingerprint() -> str:
    """Content hash of the normative opcode table and execution rules."""
    text = ";".join(f"{name}={code}/{int(arg)}"
                    for name, (code, arg) in sorted(OPCODES.items()))
    text += f";sd=doubled+01;cost=ops+bits;v{MACHINE_VERSION}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class MachineConfig:
    mode: Mode = Mode.PLAIN
    fuel: int = 4096
    output_cap: int = 64

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.fuel <= 0 or self.output_cap <= 0:
            raise ValueError("fuel and output_cap must be positive")


class Opcode(NamedTuple):
    mnemonic: str
    operand: Optional[int] = None
    payload: str = ""

    def __str__(self):
        if self.mnemonic == "LIT":
            return f"LIT {self.operand} {self.payload or 'ε'}"
        if self.operand is None:
            return self.mnemonic
        return f"{self.mnemonic} {self.operand}"


class ParseError(Exception):
    def __init__(self, reason: FailReason, message: str = ""):
        super().__init__(f"{reason.value}: {message}" if message else reason.value)
        self.reason = reason


@dataclass(frozen=True)
class ExecOutcome:
    halted: bool
    output: Optional[str] = None
    fail_reason: Optional[FailReason] = None
    cost: int = 0

    @property
    def status(self) -> str:
        return "Halted" if self.halted else "Fail"


def read_opcode(p: str, pos: int) -> tuple[Opcode, int]:
    """Read one opcode (with operand and payload) at ``pos``.

    Returns the opcode and the position just after it.
    """
    code = ""
    name = None
    i = pos
    while name is None:
        if i >= len(p) or len(code) >= _MAX_CODE_LEN:
            raise ParseError(FailReason.INCOMPLETE_OPCODE, f"codeword at bit {pos}")
        code += p[i]
        i += 1
        name = _BY_CODE.get(code)
    if not OPCODES[name][1]:
        return Opcode(name), i
    try:
        k, used = sd_decode(p, i)
    except UnexpectedEnd:
        raise ParseError(FailReason.INCOMPLETE_OPCODE, f"operand at bit {i}") from None
    except MalformedPair as exc:
        raise ParseError(FailReason.OPERAND_UNDERFLOW, str(exc)) from None
    i += used
    if name == "LIT":
        if i + k > len(p):
            raise ParseError(FailReason.INCOMPLETE_OPCODE, f"payload at bit {i}")
        return Opcode(name, k, p[i:i + k]), i + k
    return Opcode(name, k), i


def parse_program(p: str, mode: Mode | str = Mode.PLAIN) -> list[Opcode]:
    mode = Mode(mode)
    ops = []
    pos = 0
    while pos < len(p):
        op, pos = read_opcode(p, pos)
        ops.append(op)
        if op.mnemonic == "HALT" and mode is Mode.PREFIX_FREE:
            if pos != len(p):
                raise ParseError(FailReason.TRAILING_BITS_AFTER_HALT,
                                 f"{len(p) - pos} bits after HALT")
            return ops
    if mode is Mode.PREFIX_FREE:
        raise ParseError(FailReason.HALT_NOT_REACHED)
    return ops


class _Fail(Exception):
    def __init__(self, reason: FailReason):
        self.reason = reason


def step(op: Opcode, out: str, cursor: int, cond: str) -> tuple[str, int]:
    """Apply one non-HALT opcode.  Raises ``_Fail`` on condition overrun.

    Output-cap and fuel accounting are the caller's job.
    """
    m = op.mnemonic
    if m == "LIT":
        return out + op.payload, cursor
    if m == "ZEROS":
        return out + "0" * op.operand, cursor
    if m in ("COPY", "SKIP", "FLIP"):
        end = cursor + op.operand
        if end > len(cond):
            raise _Fail(FailReason.CONDITION_OVERRUN)
        if m == "COPY":
            return out + cond[cursor:end], end
        if m == "FLIP":
            return out + cond[cursor:end].translate(_NEGATE), end
        return out, end
    if m == "COPYALL":
        return out + cond[cursor:], len(cond)
    if m == "REWIND":
        return out, 0
    if m == "DUP":
        return out + out, cursor
    raise AssertionError(m)


_NEGATE = str.maketrans("01", "10")


def appended_bits(op: Opcode, out_len: int, cursor: int, cond_len: int) -> int:
    m = op.mnemonic
    if m in ("LIT", "ZEROS", "COPY", "FLIP"):
        return op.operand
    if m == "COPYALL":
        return max(cond_len - cursor, 0)
    if m == "DUP":
        return out_len
    return 0


def run_ops(ops, cond: str, cfg: MachineConfig) -> ExecOutcome:
    out = ""
    cursor = 0
    cost = 0
    for op in ops:
        if op.mnemonic == "HALT":
            cost += 1
            if cost > cfg.fuel:
                return ExecOutcome(False, fail_reason=FailReason.FUEL_EXHAUSTED, cost=cost)
            return ExecOutcome(True, out, cost=cost)
        grow = appended_bits(op, len(out), cursor, len(cond))
        if op.mnemonic in ("COPY", "SKIP", "FLIP") and cursor + op.operand > len(cond):
            return ExecOutcome(False, fail_reason=FailReason.CONDITION_OVERRUN, cost=cost)
        if len(out) + grow > cfg.output_cap:
            return ExecOutcome(False, fail_reason=FailReason.OUTPUT_CAP_EXCEEDED, cost=cost)
        cost += 1 + grow
        if cost > cfg.fuel:
            return ExecOutcome(False, fail_reason=FailReason.FUEL_EXHAUSTED, cost=cost)
        out, cursor = step(op, out, cursor, cond)
    # plain mode: program exhaustion halts
    return ExecOutcome(True, out, cost=cost)


def execute(p: str, condition: str = "", cfg: MachineConfig | None = None) -> ExecOutcome:
    cfg = cfg or MachineConfig()
    try:
        ops = parse_program(p, cfg.mode)
    except ParseError as exc:
        return ExecOutcome(False, fail_reason=exc.reason)
    return run_ops(ops, condition, cfg)


def assemble(ops) -> str:
    """Inverse of :func:`parse_program` for canonical operands."""
    from .codes import sd_encode

    bits = []
    for op in ops:
        if isinstance(op, str):
            op = Opcode(op)
        code, has_arg = OPCODES[op.mnemonic]
        bits.append(code)
        if has_arg:
            bits.append(sd_encode(op.operand))
        if op.mnemonic == "LIT":
            if len(op.payload) != op.operand:
                raise ValueError("LIT payload length must equal its operand")
            bits.append(op.payload)
    return "".join(bits)


def trace(p: str, condition: str = "", cfg: MachineConfig | None = None) -> list[str]:
    """Human-readable step-by-step listing of an execution."""
    cfg = cfg or MachineConfig()
    lines = []
    pos = 0
    out, cursor = "", 0
    while pos < len(p):
        try:
            op, nxt = read_opcode(p, pos)
        except ParseError as exc:
            lines.append(f"{pos:>3}  {p[pos:]:<20} !! {exc.reason.value}")
            return lines
        if op.mnemonic == "HALT":
            lines.append(f"{pos:>3}  {p[pos:nxt]:<20} HALT  out={out or 'ε'}")
            return lines
        try:
            out, cursor = step(op, out, cursor, condition)
        except _Fail as exc:
            lines.append(f"{pos:>3}  {p[pos:nxt]:<20} {op}  !! {exc.reason.value}")
            return lines
        lines.append(f"{pos:>3}  {p[pos:nxt]:<20} {str(op):<14} out={out or 'ε'} cursor={cursor}")
        pos = nxt
    lines.append("     (end of program)")
    return lines
