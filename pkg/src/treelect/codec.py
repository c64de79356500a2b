"""Self-delimiting coding of natural-number sequences over a small alphabet.

A sequence (p_1, ..., p_k) is coded in three steps: write each p_i in base
lambda, double every digit with a fixed prefix symbol, drop the prefix that
follows each comma, and turn the commas into a fixed separator symbol.  For
the binary alphabet the prefix is 1 and the comma becomes 0; for larger
alphabets the prefix is the first color (symbol 0) and the comma becomes the
second (symbol 1).  Decoding scans digit pairs and is an exact inverse.

Also here: the block/separator transform that keeps payload strings free of
long runs of symbol 1 (so marker delimiters stay unambiguous), and the
fixed-layout packing of the 4-field advice record used by the
unbounded-valency scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class Malformed(ValueError):
    pass


def _symbols(lam: int) -> tuple:
    """(prefix symbol, comma symbol) for alphabet size lam."""
    if lam < 2:
        raise ValueError("alphabet size must be at least 2")
    return ("1", "0") if lam == 2 else ("0", "1")


def _digits(p: int, lam: int) -> str:
    if p < 0:
        raise ValueError("only nonnegative integers can be coded")
    if p == 0:
        return "0"  # zero is the single digit 0, never the empty string
    out = []
    while p:
        out.append(str(p % lam))
        p //= lam
    return "".join(reversed(out))


def encode_sequence(seq: Sequence, lam: int = 2) -> str:
    """Code a sequence of nonnegative integers as a string over 0..lam-1."""
    prefix, comma = _symbols(lam)
    out = []
    for idx, p in enumerate(seq):
        digs = _digits(p, lam)
        if idx > 0:
            out.append(comma)
            out.append(digs[0])  # the pair prefix after a comma is dropped
            digs = digs[1:]
        for d in digs:
            out.append(prefix)
            out.append(d)
    return "".join(out)


def decode_sequence(s: str, lam: int = 2) -> tuple:
    """Exact inverse of encode_sequence; raises Malformed otherwise."""
    prefix, comma = _symbols(lam)
    if s == "":
        return ()
    if s[0] != prefix:
        raise Malformed("coded string must start with a digit pair")
    if len(s) % 2:
        raise Malformed("odd number of symbols")
    numbers = []
    cur: list = []
    for i in range(0, len(s), 2):
        a, b = s[i], s[i + 1]
        if not b.isdigit() or int(b) >= lam:
            raise Malformed(f"digit {b!r} outside alphabet of size {lam}")
        if a == prefix:
            cur.append(b)
        elif a == comma:
            numbers.append(cur)
            cur = [b]
        else:
            raise Malformed(f"unexpected pair lead {a!r}")
    numbers.append(cur)
    return tuple(int("".join(d), lam) for d in numbers)


def decode_count_prefixed(s: str, lam: int = 2) -> tuple:
    """Decode a coded sequence whose first number is the count of the rest.

    Trailing garbage after the counted numbers is ignored, which lets payload
    strings be padded with zeros to a fixed length.
    """
    prefix, comma = _symbols(lam)
    if not s or s[0] != prefix:
        raise Malformed("coded string must start with a digit pair")
    numbers: list = []
    cur: list = []
    expected = None
    for i in range(0, len(s) - 1, 2):
        a, b = s[i], s[i + 1]
        if not b.isdigit() or int(b) >= lam:
            raise Malformed(f"digit {b!r} outside alphabet of size {lam}")
        if a == prefix:
            cur.append(b)
        elif a == comma:
            numbers.append(int("".join(cur), lam))
            cur = []
            if expected is None:
                expected = numbers[0]
            if len(numbers) == expected + 1:
                return tuple(numbers[1:])
            cur = [b]
        else:
            raise Malformed(f"unexpected pair lead {a!r}")
    if cur:
        numbers.append(int("".join(cur), lam))
        if expected is None:
            expected = numbers[0]
    if expected is None or len(numbers) != expected + 1:
        raise Malformed("count-prefixed sequence ended early")
    return tuple(numbers[1:])


def sequence_code_length_bound(seq: Sequence, lam: int = 2) -> int:
    """The stated length bound 2 * sum(floor(log_lam max(p,1)) + 1)."""
    import math

    total = 0
    for p in seq:
        q = max(p, 1)
        total += int(math.log(q) / math.log(lam) + 1e-12) + 1
    return 2 * total


def insert_separators(s: str, k: int) -> str:
    """Split s into blocks of k symbols and join with single 0 separators.

    The result never contains a run of k+1 copies of symbol 1, so the marker
    delimiter pattern cannot occur inside payload.
    """
    if k < 1:
        raise ValueError("block length must be positive")
    if not s:
        return ""
    blocks = [s[i : i + k] for i in range(0, len(s), k)]
    return "0".join(blocks)


def remove_separators(s: str, k: int) -> str:
    """Exact inverse of insert_separators for the same k."""
    if k < 1:
        raise ValueError("block length must be positive")
    out = []
    for i, ch in enumerate(s):
        if i % (k + 1) == k:
            if ch != "0":
                raise Malformed(f"separator expected at offset {i}")
        else:
            out.append(ch)
    return "".join(out)


# ---------------------------------------------------------------------------
# the packed 4-field record of the unbounded-valency scheme


@dataclass(frozen=True)
class UnboundedAdviceRecord:
    m1: int  # 0..3; 3 only at the root
    m2: int
    m3: int
    c: str  # binary payload, possibly empty

    def __post_init__(self):
        if not 0 <= self.m1 <= 3:
            raise ValueError("m1 out of range")
        if self.m2 not in (0, 1) or self.m3 not in (0, 1):
            raise ValueError("m2/m3 must be bits")


def pack_record(rec: UnboundedAdviceRecord) -> str:
    """m1 on three bits, m2 and m3 on one bit each, then c verbatim."""
    return f"{rec.m1:03b}{rec.m2}{rec.m3}{rec.c}"


def unpack_record(s: str) -> UnboundedAdviceRecord:
    if len(s) < 5:
        raise Malformed("packed record needs at least 5 symbols")
    m1 = int(s[:3], 2)
    if m1 > 3:
        raise Malformed("m1 field out of range")
    return UnboundedAdviceRecord(m1, int(s[3]), int(s[4]), s[5:])
