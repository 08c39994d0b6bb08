"""Slot-level codecs for the pulse modulation schemes used on the laser leg.

The common currency is a :class:`SlotStream`: a train of equal-duration laser
slots ("chips") where a True chip means a pulse is fired in that slot.  OOK
and PPM use fixed-length frames; DPPM, IDPPM and the padded VCD variant
encode a value purely in the number of empty chips before the next pulse,
which makes them variable-length and self-synchronizing.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "Scheme",
    "SchemeSpec",
    "SlotStream",
    "MappingTable",
    "DecodeEvent",
    "DecodeResult",
    "SynchronizationError",
    "OverlongGapError",
    "CapacityError",
    "encode_symbol",
    "encode_values",
    "decode_stream",
    "build_mapping",
    "mapping_from_text",
    "encode_text",
    "pack_bits",
    "unpack_values",
]


class Scheme(str, enum.Enum):
    OOK = "OOK"
    PPM = "PPM"
    DPPM = "DPPM"
    IDPPM = "IDPPM"
    VCD_DPPM = "VCD_DPPM"

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        key = name.strip().upper().replace("-", "_")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown scheme {name!r}; expected one of "
                             f"{', '.join(s.value for s in cls)}") from None


class SynchronizationError(ValueError):
    """A pulse arrived before the minimum gap: the decoder lost framing."""

    def __init__(self, message: str, chip_index: int):
        super().__init__(message)
        self.chip_index = chip_index


class OverlongGapError(ValueError):
    """A gap exceeded every valid symbol: a pulse was lost upstream."""

    def __init__(self, message: str, chip_index: int):
        super().__init__(message)
        self.chip_index = chip_index


class CapacityError(ValueError):
    """The alphabet does not fit in the available symbol values."""


@dataclass(frozen=True)
class SchemeSpec:
    """A modulation scheme with its order M and, for VCD-DPPM, the padding N0."""

    scheme: Scheme
    order_m: int
    padding_n0: int = 0

    def __post_init__(self):
        if self.order_m < 1:
            raise ValueError(f"order_m must be >= 1, got {self.order_m}")
        if self.padding_n0 < 0:
            raise ValueError(f"padding_n0 must be >= 0, got {self.padding_n0}")
        if self.padding_n0 and self.scheme is not Scheme.VCD_DPPM:
            raise ValueError(f"padding_n0 is only meaningful for VCD_DPPM, "
                             f"not {self.scheme.value}")

    @property
    def n_values(self) -> int:
        """Number of symbol values L = 2**M."""
        return 1 << self.order_m

    @property
    def gap_offset(self) -> int:
        """Empty chips preceding the pulse of value 0 (gap-coded schemes only)."""
        if self.scheme is Scheme.DPPM:
            return 0
        if self.scheme is Scheme.IDPPM:
            return 1
        if self.scheme is Scheme.VCD_DPPM:
            return self.padding_n0
        raise ValueError(f"{self.scheme.value} is not gap-coded")

    @property
    def is_gap_coded(self) -> bool:
        return self.scheme in (Scheme.DPPM, Scheme.IDPPM, Scheme.VCD_DPPM)


@dataclass(frozen=True, eq=False)
class SlotStream:
    """A timed train of binary chips; True means a laser pulse in that slot."""

    chips: np.ndarray
    slot_duration_s: float | Fraction = 1.0

    def __post_init__(self):
        arr = np.array(self.chips, dtype=bool, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "chips", arr)
        if not float(self.slot_duration_s) > 0:
            raise ValueError(f"slot_duration_s must be positive, "
                             f"got {self.slot_duration_s}")

    @classmethod
    def from_string(cls, bits: str, slot_duration_s: float | Fraction = 1.0) -> "SlotStream":
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"pattern must be a non-empty 0/1 string, got {bits!r}")
        return cls(np.frombuffer(bits.encode("ascii"), dtype=np.uint8) == ord("1"),
                   slot_duration_s)

    def to_string(self) -> str:
        return "".join("1" if c else "0" for c in self.chips)

    def pulse_indices(self) -> np.ndarray:
        return np.flatnonzero(self.chips)

    def pulse_times(self) -> list:
        """Pulse times, exactly index * slot_duration_s."""
        return [int(i) * self.slot_duration_s for i in self.pulse_indices()]

    @property
    def duration_s(self):
        return len(self.chips) * self.slot_duration_s

    def __len__(self) -> int:
        return len(self.chips)


@dataclass
class DecodeEvent:
    """An anomaly seen while decoding: kind plus the chip index of the pulse."""

    kind: str  # "short_gap" | "overlong_gap" | "empty_frame" | "multi_pulse"
    chip_index: int


@dataclass
class DecodeResult:
    values: list
    residue_chips: int
    events: list

    def event_count(self, kind: str) -> int:
        return sum(1 for e in self.events if e.kind == kind)


def encode_symbol(spec: SchemeSpec, value: int) -> np.ndarray:
    """Encode one value into its chip sequence.

    OOK sends the M-bit pattern of the value verbatim (MSB first).  PPM puts
    the single pulse at slot index ``value`` of an L-chip frame.  The
    gap-coded schemes send ``gap_offset + value`` empty chips and then the
    pulse.
    """
    value = int(value)
    if not 0 <= value < spec.n_values:
        raise ValueError(f"value {value} out of range [0, {spec.n_values}) "
                         f"for M={spec.order_m}")
    if spec.scheme is Scheme.OOK:
        m = spec.order_m
        return np.array([(value >> k) & 1 for k in range(m - 1, -1, -1)],
                        dtype=bool)
    if spec.scheme is Scheme.PPM:
        chips = np.zeros(spec.n_values, dtype=bool)
        chips[value] = True
        return chips
    chips = np.zeros(spec.gap_offset + value + 1, dtype=bool)
    chips[-1] = True
    return chips


def encode_values(spec: SchemeSpec, values: Sequence[int] | np.ndarray,
                  slot_duration_s: float | Fraction = 1.0) -> SlotStream:
    """Encode a sequence of values into one concatenated SlotStream.

    Equivalent to concatenating :func:`encode_symbol` outputs, but built in
    one allocation so long Monte Carlo streams stay cheap.
    """
    vals = np.asarray(values, dtype=np.int64)
    if vals.size and (vals.min() < 0 or vals.max() >= spec.n_values):
        bad = vals[(vals < 0) | (vals >= spec.n_values)][0]
        raise ValueError(f"value {int(bad)} out of range [0, {spec.n_values}) "
                         f"for M={spec.order_m}")
    if spec.scheme is Scheme.OOK:
        chips = unpack_values(vals, spec.order_m).astype(bool)
    elif spec.scheme is Scheme.PPM:
        L = spec.n_values
        chips = np.zeros(vals.size * L, dtype=bool)
        chips[np.arange(vals.size) * L + vals] = True
    else:
        lengths = vals + (spec.gap_offset + 1)
        ends = np.cumsum(lengths)
        chips = np.zeros(int(ends[-1]) if vals.size else 0, dtype=bool)
        if vals.size:
            chips[ends - 1] = True
    return SlotStream(chips, slot_duration_s)


def decode_stream(spec: SchemeSpec, stream: SlotStream,
                  strict: bool = True) -> DecodeResult:
    """Parse a stream back into values.

    Gap-coded schemes count the empty chips since the previous pulse and
    subtract the scheme's gap offset; OOK and PPM parse fixed frames.  Chips
    after the final pulse (or an incomplete trailing frame) are reported as
    residue, not an error.

    With ``strict=True`` a gap shorter than the offset raises
    :class:`SynchronizationError` and a gap implying a value >= L raises
    :class:`OverlongGapError`.  With ``strict=False`` such symbols are
    clamped into range and recorded as :class:`DecodeEvent` entries, so a
    noisy stream still yields a best-effort value sequence.
    """
    chips = stream.chips
    if spec.scheme is Scheme.OOK:
        m = spec.order_m
        n_frames = len(chips) // m
        body = chips[:n_frames * m].reshape(n_frames, m)
        weights = (1 << np.arange(m - 1, -1, -1)).astype(np.int64)
        values = body.astype(np.int64) @ weights
        return DecodeResult(values.tolist(), len(chips) - n_frames * m, [])

    if spec.scheme is Scheme.PPM:
        L = spec.n_values
        n_frames = len(chips) // L
        residue = len(chips) - n_frames * L
        body = chips[:n_frames * L].reshape(n_frames, L)
        counts = body.sum(axis=1)
        firsts = body.argmax(axis=1)
        events = []
        if not np.all(counts == 1):
            for k in np.flatnonzero(counts != 1):
                if counts[k] == 0:
                    ev = DecodeEvent("empty_frame", int(k) * L)
                else:
                    ev = DecodeEvent("multi_pulse", int(k) * L + int(firsts[k]))
                if strict:
                    raise SynchronizationError(
                        f"PPM frame {int(k)} has {int(counts[k])} pulses",
                        chip_index=ev.chip_index)
                events.append(ev)
        return DecodeResult(firsts.astype(np.int64).tolist(), residue, events)

    offset = spec.gap_offset
    L = spec.n_values
    positions = np.flatnonzero(chips)
    if positions.size == 0:
        return DecodeResult([], len(chips), [])
    zeros = np.diff(positions, prepend=-1) - 1
    values = zeros - offset
    low = values < 0
    high = values >= L
    events = []
    if low.any() or high.any():
        for i in np.flatnonzero(low | high):
            pos = int(positions[i])
            if low[i]:
                if strict:
                    raise SynchronizationError(
                        f"gap of {int(zeros[i])} chips at chip {pos} is shorter "
                        f"than the {offset}-chip offset", chip_index=pos)
                events.append(DecodeEvent("short_gap", pos))
            else:
                if strict:
                    raise OverlongGapError(
                        f"gap of {int(zeros[i])} chips at chip {pos} exceeds the "
                        f"largest symbol (value {L - 1})", chip_index=pos)
                events.append(DecodeEvent("overlong_gap", pos))
        values = np.clip(values, 0, L - 1)
    residue = len(chips) - int(positions[-1]) - 1
    return DecodeResult(values.astype(np.int64).tolist(), residue, events)


@dataclass
class MappingTable:
    """Bijection between alphabet symbols and values 0..L-1, ranked by frequency.

    ``probability_of`` is None for tables loaded from disk without frequency
    information; the rank ordering can then no longer be re-validated.
    """

    value_of: dict
    probability_of: dict | None = None

    def __post_init__(self):
        values = sorted(self.value_of.values())
        if values != list(range(len(values))):
            raise ValueError("mapping values must be exactly 0..n-1 with no gaps")
        if self.probability_of is not None:
            if set(self.probability_of) != set(self.value_of):
                raise ValueError("probability table must cover exactly the alphabet")
            total = sum(self.probability_of.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"probabilities sum to {total!r}, expected 1")
            ranked = sorted(self.value_of, key=self.value_of.__getitem__)
            probs = [self.probability_of[s] for s in ranked]
            if any(probs[i] < probs[i + 1] - 1e-12 for i in range(len(probs) - 1)):
                raise ValueError("values must be assigned in non-increasing "
                                 "frequency order")

    @property
    def symbol_of(self) -> dict:
        return {v: s for s, v in self.value_of.items()}

    def min_order_m(self) -> int:
        """Smallest M whose symbol space holds this alphabet."""
        return max(1, math.ceil(math.log2(max(1, len(self.value_of)))))

    def __len__(self) -> int:
        return len(self.value_of)

    def save(self, path) -> None:
        """Write the two-column text form: symbol code point, value."""
        lines = []
        for sym, val in sorted(self.value_of.items(), key=lambda kv: kv[1]):
            if len(sym) != 1:
                raise ValueError(f"only single-character symbols serialize, "
                                 f"got {sym!r}")
            lines.append(f"{ord(sym)} {val}\n")
        Path(path).write_text("".join(lines), encoding="ascii")

    @classmethod
    def load(cls, path) -> "MappingTable":
        value_of = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
            if not line.strip():
                continue
            try:
                cp, val = line.split()
                value_of[chr(int(cp))] = int(val)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected two integers, "
                                 f"got {line!r}") from None
        return cls(value_of, probability_of=None)


def build_mapping(frequencies: Mapping[str, float], order_m: int) -> MappingTable:
    """Rank symbols by descending probability and assign value = rank.

    Ties break toward the lower code point.  The alphabet must fit in
    2**order_m values.
    """
    if order_m < 1:
        raise ValueError(f"order_m must be >= 1, got {order_m}")
    if len(frequencies) > (1 << order_m):
        raise CapacityError(f"alphabet of {len(frequencies)} symbols does not "
                            f"fit in 2^{order_m} = {1 << order_m} values")
    if any(p < 0 for p in frequencies.values()):
        raise ValueError("frequencies must be non-negative")
    total = float(sum(frequencies.values()))
    if total <= 0:
        raise ValueError("frequencies must not all be zero")
    ranked = sorted(frequencies, key=lambda s: (-frequencies[s], s))
    return MappingTable(
        value_of={s: i for i, s in enumerate(ranked)},
        probability_of={s: frequencies[s] / total for s in frequencies},
    )


def mapping_from_text(text: str, order_m: int | None = None) -> MappingTable:
    """Build a frequency-ranked mapping from a corpus.

    With ``order_m=None`` the smallest M that holds the corpus alphabet is
    used.
    """
    if not text:
        raise ValueError("corpus text is empty")
    counts = Counter(text)
    if order_m is None:
        order_m = max(1, math.ceil(math.log2(len(counts))))
    return build_mapping(counts, order_m)


def encode_text(text: str, table: MappingTable, spec: SchemeSpec,
                slot_duration_s: float | Fraction = 1.0) -> SlotStream:
    """Encode text: one symbol per character, or verbatim 8-bit codes for OOK."""
    if spec.scheme is Scheme.OOK:
        try:
            codes = np.frombuffer(text.encode("latin-1"), dtype=np.uint8)
        except UnicodeEncodeError as exc:
            raise ValueError(f"character {text[exc.start]!r} is not "
                             f"representable in 8 bits") from None
        return SlotStream(np.unpackbits(codes).astype(bool), slot_duration_s)
    try:
        values = [table.value_of[c] for c in text]
    except KeyError as exc:
        raise ValueError(f"character {exc.args[0]!r} is not in the mapping "
                         f"table") from None
    if values and max(values) >= spec.n_values:
        raise ValueError(f"mapping value {max(values)} does not fit in "
                         f"M={spec.order_m}")
    return encode_values(spec, values, slot_duration_s)


def pack_bits(bits: np.ndarray, order_m: int) -> np.ndarray:
    """Pack a bit array (length divisible by M) into M-bit values, MSB first."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % order_m:
        raise ValueError(f"bit count {bits.size} is not a multiple of M={order_m}")
    weights = (1 << np.arange(order_m - 1, -1, -1)).astype(np.int64)
    return bits.reshape(-1, order_m) @ weights


def unpack_values(values: np.ndarray, order_m: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`: values to an MSB-first bit array."""
    vals = np.asarray(values, dtype=np.int64).reshape(-1, 1)
    shifts = np.arange(order_m - 1, -1, -1)
    return ((vals >> shifts) & 1).ravel()
