"""Digital control interface: 26-bit row words, the serial shift register and (A,B,C) opcodes.

Serial order: the last row's word is shifted first, down to row 1; each
word is the 14-bit I-pot code MSB first followed by the packed 12-bit
calibration code MSB first. Bitstrings are written with the first
shifted bit leftmost.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .caldac import CalCode
from .crossbar import IPOT_BITS
from .devices import Operation
from .errors import ProtocolError

CAL_BITS = 12
WORD_BITS = IPOT_BITS + CAL_BITS


@dataclass(frozen=True)
class RowControlWord:
    ipot_code: int
    cal_code: CalCode

    def __post_init__(self):
        if not 0 <= self.ipot_code < (1 << IPOT_BITS):
            raise ProtocolError(f"ipot_code {self.ipot_code} does not fit {IPOT_BITS} bits")

    def to_bits(self) -> str:
        return format(self.ipot_code, f"0{IPOT_BITS}b") + format(self.cal_code.packed, f"0{CAL_BITS}b")

    @classmethod
    def from_bits(cls, bits: str) -> "RowControlWord":
        return cls(int(bits[:IPOT_BITS], 2), CalCode.unpack(int(bits[IPOT_BITS:], 2)))


@dataclass(frozen=True)
class ControlFrame:
    """Control words for all rows; ``rows[0]`` is row 1."""

    rows: tuple[RowControlWord, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise ProtocolError("a frame needs at least one row")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @classmethod
    def blank(cls, n_rows: int) -> "ControlFrame":
        return cls(tuple(RowControlWord(0, CalCode(0, 0, 0)) for _ in range(n_rows)))

    def to_json(self) -> dict:
        return {
            "rows": [
                {"ipot": w.ipot_code, "cal": dict(zip(("coarse", "fine", "finer"), w.cal_code.as_tuple()))}
                for w in self.rows
            ]
        }

    @classmethod
    def from_json(cls, doc: dict | str) -> "ControlFrame":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            rows = []
            for entry in doc["rows"]:
                cal = entry["cal"]
                rows.append(RowControlWord(int(entry["ipot"]), CalCode(cal["coarse"], cal["fine"], cal["finer"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed frame JSON: {exc}") from exc
        return cls(tuple(rows))


def encode_frame(frame: ControlFrame) -> str:
    return "".join(w.to_bits() for w in reversed(frame.rows))


def _clean_bits(bits: str) -> str:
    bits = "".join(bits.split())
    bad = set(bits) - {"0", "1"}
    if bad:
        raise ProtocolError(f"non-binary characters in bitstream: {sorted(bad)}")
    return bits


def decode_frame(bits: str, n_rows: int) -> ControlFrame:
    """Inverse of :func:`encode_frame`. Whitespace in ``bits`` is ignored."""
    bits = _clean_bits(bits)
    if n_rows < 1:
        raise ProtocolError(f"n_rows must be >= 1, got {n_rows}")
    if len(bits) != WORD_BITS * n_rows:
        raise ProtocolError(f"expected {WORD_BITS * n_rows} bits for {n_rows} rows, got {len(bits)}")
    words = [RowControlWord.from_bits(bits[i : i + WORD_BITS]) for i in range(0, len(bits), WORD_BITS)]
    return ControlFrame(tuple(reversed(words)))


def shift_register_step(register: tuple[int, ...], bit_in: int, clock_edge: str) -> tuple[int, ...]:
    """One clock edge of the D-flip-flop chain.

    ``register[0]`` is the stage fed by the serial input. Only rising
    edges shift.
    """
    if clock_edge == "falling":
        return register
    if clock_edge != "rising":
        raise ProtocolError(f"clock_edge must be 'rising' or 'falling', got {clock_edge!r}")
    if bit_in not in (0, 1):
        raise ProtocolError(f"bit_in must be 0 or 1, got {bit_in!r}")
    return (bit_in,) + register[:-1]


@dataclass
class ShiftRegister:
    """26 x N-bit serial register with a separate latch.

    The parallel outputs drive the row I-pots and calibration DACs and
    only change on :meth:`latch`. ``clock_hz`` sets the time base used
    for logging; it never affects values.
    """

    n_rows: int
    clock_hz: float = 2000.0
    bits: tuple[int, ...] = field(init=False)
    outputs: ControlFrame = field(init=False)
    time_s: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.n_rows < 1:
            raise ProtocolError("n_rows must be >= 1")
        self.bits = (0,) * (WORD_BITS * self.n_rows)
        self.outputs = ControlFrame.blank(self.n_rows)

    @property
    def length(self) -> int:
        return len(self.bits)

    def step(self, bit_in: int, clock_edge: str = "rising"):
        self.bits = shift_register_step(self.bits, bit_in, clock_edge)
        self.time_s += 0.5 / self.clock_hz

    def clock_in(self, bitstring: str):
        """Shift a whole bitstring in, leftmost bit first, one full clock per bit."""
        for ch in _clean_bits(bitstring):
            self.step(int(ch), "rising")
            self.step(0, "falling")

    def contents(self) -> str:
        # the first bit shifted in ends up at the far end of the chain
        return "".join(str(b) for b in reversed(self.bits))

    def latch(self) -> ControlFrame:
        self.outputs = decode_frame(self.contents(), self.n_rows)
        return self.outputs


@dataclass(frozen=True)
class OpSelect:
    a: bool
    b: bool
    c: bool

    @classmethod
    def parse(cls, text: str) -> "OpSelect":
        text = text.strip()
        if len(text) != 3 or set(text) - {"0", "1"}:
            raise ProtocolError(f"opselect must be three 0/1 characters (ABC), got {text!r}")
        return cls(*(ch == "1" for ch in text))


# Only READ = all-off is documented for the chip; the one-hot rest is this model's choice.
OPCODES = {
    (False, False, False): Operation.READ,
    (True, False, False): Operation.FORM,
    (False, True, False): Operation.SET,
    (False, False, True): Operation.RESET,
}


def decode_opselect(op: OpSelect) -> Operation:
    key = (bool(op.a), bool(op.b), bool(op.c))
    try:
        return OPCODES[key]
    except KeyError:
        raise ProtocolError(f"invalid (A,B,C) code {tuple(int(v) for v in key)}") from None


def encode_opselect(op: Operation) -> OpSelect:
    for key, value in OPCODES.items():
        if value is op:
            return OpSelect(*key)
    raise ProtocolError(f"no opcode for {op}")


def apply_frame(xbar, frame: ControlFrame):
    """Load latched control words into a crossbar's row drivers."""
    if frame.n_rows != xbar.rows:
        raise ProtocolError(f"frame has {frame.n_rows} rows, crossbar has {xbar.rows}")
    for driver, word in zip(xbar.drivers, frame.rows):
        driver.ipot_code = word.ipot_code
        driver.cal_code = word.cal_code
