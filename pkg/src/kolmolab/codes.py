"""Self-delimiting codes used throughout the lab.

Bitstrings are plain ``str`` objects over ``"0"``/``"1"``, most significant
bit first.  The integer code doubles every bit of the minimal binary
representation and terminates with the pair ``01``::

    sd_encode(5) == "11" "00" "11" + "01" == "11001101"
"""
from __future__ import annotations

from dataclasses import dataclass


class CodeError(ValueError):
    """Raised when a bitstring is not a valid codeword sequence."""


class MalformedPair(CodeError):
    pass


class UnexpectedEnd(CodeError):
    pass


class TrailingBits(CodeError):
    pass


def bin_str(n: int) -> str:
    """Minimal binary representation; ``bin_str(0) == "0"``."""
    if n < 0:
        raise ValueError(f"negative integer {n}")
    return format(n, "b")


def sd_encode(d: int) -> str:
    return "".join(b + b for b in bin_str(d)) + "01"


def sd_decode(bits: str, pos: int = 0) -> tuple[int, int]:
    """Decode one integer starting at ``pos``.

    Returns ``(value, consumed)`` where ``consumed`` counts bits read from
    ``pos``.  Trailing bits after the terminator are left for the caller.
    """
    value = 0
    i = pos
    n = len(bits)
    while True:
        if i + 2 > n:
            raise UnexpectedEnd(f"integer code truncated at bit {n}")
        pair = bits[i:i + 2]
        i += 2
        if pair == "01":
            # a bare terminator reads as 0; it is outside the image of sd_encode
            return value, i - pos
        if pair == "00":
            value <<= 1
        elif pair == "11":
            value = (value << 1) | 1
        else:
            raise MalformedPair(f"pair {pair!r} at bit {i - 2}")


def pack_condition(items: list[str] | tuple[str, ...]) -> str:
    """Pack an ordered list of bitstrings into one condition string.

    A single item packs raw; two or more are length-prefixed.
    """
    if len(items) == 1:
        return items[0]
    return "".join(sd_encode(len(it)) + it for it in items)


def unpack_condition(bits: str, count: int) -> list[str]:
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        if bits:
            raise TrailingBits(f"{len(bits)} bits left over")
        return []
    if count == 1:
        return [bits]
    out = []
    pos = 0
    for _ in range(count):
        k, used = sd_decode(bits, pos)
        pos += used
        if pos + k > len(bits):
            raise UnexpectedEnd("condition item truncated")
        out.append(bits[pos:pos + k])
        pos += k
    if pos != len(bits):
        raise TrailingBits(f"{len(bits) - pos} bits left over")
    return out


@dataclass(frozen=True)
class LambdaRecord:
    """Header of the two-part symmetry-of-information code.

    ``b`` is 1 iff ``n_x > n_y``.
    """

    delta_n: int
    t_x: int
    t_y: int
    w: int
    b: int

    def __post_init__(self):
        if min(self.delta_n, self.t_x, self.t_y) < 0:
            raise ValueError("record fields must be non-negative")
        if self.w < 1:
            raise ValueError("deficiency w must be positive")
        if self.b not in (0, 1):
            raise ValueError("b must be a single bit")

    @property
    def t(self) -> int:
        return self.t_x + self.t_y - self.w

    def n_y(self, n_x: int) -> int:
        return n_x - self.delta_n if self.b else n_x + self.delta_n


def encode_lambda(r: LambdaRecord) -> str:
    return (sd_encode(r.delta_n) + sd_encode(r.t_x) + sd_encode(r.t_y)
            + sd_encode(r.w) + str(r.b))


def decode_lambda(bits: str) -> tuple[LambdaRecord, int]:
    pos = 0
    fields = []
    for _ in range(4):
        v, used = sd_decode(bits, pos)
        fields.append(v)
        pos += used
    if pos >= len(bits):
        raise UnexpectedEnd("record truncated before direction bit")
    b = int(bits[pos])
    try:
        rec = LambdaRecord(*fields, b)
    except ValueError as exc:
        raise CodeError(str(exc)) from None
    return rec, pos + 1


def log2_floor(n: int) -> int:
    """``floor(log2 n)`` with the convention ``log 0 = 0``."""
    return n.bit_length() - 1 if n > 0 else 0
