"""Codec behavior: symbol shapes, framing, round trips, mapping tables."""

import math
from fractions import Fraction

import numpy as np
import pytest

from optosim.codec import (CapacityError, MappingTable, OverlongGapError,
                           Scheme, SchemeSpec, SlotStream,
                           SynchronizationError, build_mapping, decode_stream,
                           encode_symbol, encode_text, encode_values,
                           mapping_from_text, pack_bits, unpack_values)

ALL_SCHEMES = list(Scheme)
GAP_CODED = [Scheme.DPPM, Scheme.IDPPM, Scheme.VCD_DPPM]


def make_spec(scheme, m, n0=2):
    return SchemeSpec(scheme, m, n0 if scheme is Scheme.VCD_DPPM else 0)


def as_str(chips):
    return "".join("1" if c else "0" for c in chips)


class TestEncodeSymbol:
    def test_ppm_pulse_at_value_index(self):
        spec = SchemeSpec(Scheme.PPM, 2)
        assert as_str(encode_symbol(spec, 3)) == "0001"
        assert as_str(encode_symbol(spec, 0)) == "1000"

    def test_vcd_padding_two(self):
        spec = SchemeSpec(Scheme.VCD_DPPM, 2, 2)
        assert as_str(encode_symbol(spec, 0)) == "001"

    def test_vcd_padding_four_length_five(self):
        spec = SchemeSpec(Scheme.VCD_DPPM, 2, 4)
        chips = encode_symbol(spec, 0)
        assert as_str(chips) == "00001"
        assert len(chips) == 5

    def test_dppm_zero_is_single_chip(self):
        assert as_str(encode_symbol(SchemeSpec(Scheme.DPPM, 2), 0)) == "1"

    def test_idppm_one_leading_zero(self):
        assert as_str(encode_symbol(SchemeSpec(Scheme.IDPPM, 2), 0)) == "01"
        assert as_str(encode_symbol(SchemeSpec(Scheme.IDPPM, 2), 2)) == "0001"

    def test_ook_msb_first(self):
        assert as_str(encode_symbol(SchemeSpec(Scheme.OOK, 4), 0b1010)) == "1010"

    @pytest.mark.parametrize("scheme", ALL_SCHEMES)
    def test_out_of_range_value(self, scheme):
        spec = make_spec(scheme, 3)
        with pytest.raises(ValueError):
            encode_symbol(spec, 8)
        with pytest.raises(ValueError):
            encode_symbol(spec, -1)

    @pytest.mark.parametrize("scheme", ALL_SCHEMES)
    @pytest.mark.parametrize("m", range(1, 11))
    def test_vectorized_encoder_matches_scalar(self, scheme, m):
        spec = make_spec(scheme, m)
        values = np.arange(spec.n_values)
        stream = encode_values(spec, values)
        scalar = np.concatenate([encode_symbol(spec, int(v)) for v in values])
        assert np.array_equal(stream.chips, scalar)

    @pytest.mark.parametrize("scheme",
                             [Scheme.PPM, Scheme.DPPM, Scheme.IDPPM,
                              Scheme.VCD_DPPM])
    def test_one_pulse_per_symbol(self, scheme):
        spec = make_spec(scheme, 4)
        for v in range(spec.n_values):
            assert encode_symbol(spec, v).sum() == 1


class TestDecodeStream:
    def test_vcd_symbol_sequence(self):
        spec = SchemeSpec(Scheme.VCD_DPPM, 2, 2)
        out = decode_stream(spec, SlotStream.from_string("0010010001"))
        assert out.values == [0, 0, 1]
        assert out.residue_chips == 0
        assert out.events == []

    def test_dppm_shortest_symbols(self):
        out = decode_stream(SchemeSpec(Scheme.DPPM, 2),
                            SlotStream.from_string("101001"))
        assert out.values == [0, 1, 2]

    def test_short_gap_raises_with_position(self):
        spec = SchemeSpec(Scheme.VCD_DPPM, 2, 2)
        with pytest.raises(SynchronizationError) as exc:
            decode_stream(spec, SlotStream.from_string("01"))
        assert exc.value.chip_index == 1

    def test_overlong_gap_raises(self):
        spec = SchemeSpec(Scheme.VCD_DPPM, 1, 1)
        # gap of 3 zeros implies value 2 >= L = 2
        with pytest.raises(OverlongGapError):
            decode_stream(spec, SlotStream.from_string("0001"))

    def test_lenient_mode_clamps_and_records(self):
        spec = SchemeSpec(Scheme.VCD_DPPM, 1, 1)
        out = decode_stream(spec, SlotStream.from_string("10001"), strict=False)
        assert out.values == [0, 1]  # short gap -> 0, overlong -> L-1
        assert [e.kind for e in out.events] == ["short_gap", "overlong_gap"]

    def test_trailing_zeros_are_residue(self):
        spec = SchemeSpec(Scheme.DPPM, 2)
        out = decode_stream(spec, SlotStream.from_string("01000"))
        assert out.values == [1]
        assert out.residue_chips == 3

    def test_empty_stream(self):
        spec = SchemeSpec(Scheme.DPPM, 2)
        out = decode_stream(spec, SlotStream(np.zeros(4, dtype=bool)))
        assert out.values == []
        assert out.residue_chips == 4

    def test_ppm_frames_and_residue(self):
        spec = SchemeSpec(Scheme.PPM, 2)
        out = decode_stream(spec, SlotStream.from_string("0001" + "1000" + "01"))
        assert out.values == [3, 0]
        assert out.residue_chips == 2

    def test_ppm_anomalies_lenient(self):
        spec = SchemeSpec(Scheme.PPM, 2)
        out = decode_stream(spec, SlotStream.from_string("0000" + "1100"),
                            strict=False)
        assert out.values == [0, 0]
        assert sorted(e.kind for e in out.events) == ["empty_frame",
                                                      "multi_pulse"]
        with pytest.raises(SynchronizationError):
            decode_stream(spec, SlotStream.from_string("0000"))

    def test_ook_frames(self):
        spec = SchemeSpec(Scheme.OOK, 4)
        out = decode_stream(spec, SlotStream.from_string("10100011" + "1"))
        assert out.values == [0b1010, 0b0011]
        assert out.residue_chips == 1


class TestRoundTrip:
    @pytest.mark.parametrize("scheme", ALL_SCHEMES)
    def test_exhaustive_single_symbols(self, scheme):
        for m in range(1, 13):
            spec = make_spec(scheme, m)
            for v in range(spec.n_values):
                out = decode_stream(spec, SlotStream(encode_symbol(spec, v)))
                assert out.values == [v], (scheme, m, v)

    @pytest.mark.parametrize("scheme", ALL_SCHEMES)
    def test_random_streams(self, scheme):
        rng = np.random.default_rng(7)
        for m in (1, 3, 8):
            spec = make_spec(scheme, m)
            values = rng.integers(0, spec.n_values, 5000)
            stream = encode_values(spec, values)
            out = decode_stream(spec, stream)
            assert out.values == values.tolist()
            assert out.events == []

    @pytest.mark.parametrize("scheme", GAP_CODED)
    def test_self_synchronization_after_prefix_drop(self, scheme):
        rng = np.random.default_rng(11)
        spec = make_spec(scheme, 4)
        values = rng.integers(0, spec.n_values, 400)
        stream = encode_values(spec, values)
        pulses = stream.pulse_indices()
        for k in (0, 17, 123, 398):
            # drop everything up to and including the (k+1)-th pulse chip
            rest = SlotStream(stream.chips[int(pulses[k]) + 1:])
            out = decode_stream(spec, rest)
            assert out.values == values[k + 1:].tolist()


def test_average_symbol_length_is_exact_rational():
    for m in range(1, 11):
        L = 1 << m
        for scheme, expect in [
            (Scheme.DPPM, Fraction(L + 1, 2)),
            (Scheme.IDPPM, Fraction(L + 3, 2)),
            (Scheme.VCD_DPPM, Fraction(2 * 5 + L + 1, 2)),
        ]:
            spec = make_spec(scheme, m, n0=5)
            total = sum(len(encode_symbol(spec, v)) for v in range(L))
            assert Fraction(total, L) == expect, (scheme, m)


class TestSlotStream:
    def test_pulse_times_are_index_times_duration(self):
        s = SlotStream.from_string("0101", Fraction(1, 40))
        assert s.pulse_times() == [Fraction(1, 40), Fraction(3, 40)]

    def test_nonpositive_duration_rejected(self):
        with pytest.raises(ValueError):
            SlotStream(np.array([True]), 0.0)

    def test_string_round_trip(self):
        assert SlotStream.from_string("00101").to_string() == "00101"

    def test_chips_are_immutable(self):
        s = SlotStream.from_string("01")
        with pytest.raises(ValueError):
            s.chips[0] = True


class TestMapping:
    def test_rank_order(self):
        table = build_mapping({"a": 0.5, "b": 0.3, "c": 0.2}, 2)
        assert table.value_of == {"a": 0, "b": 1, "c": 2}

    def test_uniform_ties_break_by_code_point(self):
        table = build_mapping({c: 0.25 for c in "dcba"}, 2)
        assert table.value_of == {"a": 0, "b": 1, "c": 2, "d": 3}

    def test_capacity_error(self):
        with pytest.raises(CapacityError):
            build_mapping({c: 1.0 for c in "abcde"}, 2)

    def test_corpus_space_is_most_frequent(self, corpus_text):
        table = mapping_from_text(corpus_text)
        assert table.value_of[" "] == 0

    def test_counts_are_normalized(self):
        table = build_mapping({"a": 3, "b": 1}, 1)
        assert table.probability_of == {"a": 0.75, "b": 0.25}

    def test_save_load_round_trip(self, tmp_path):
        table = build_mapping({"a": 0.5, "b": 0.3, "c": 0.2}, 2)
        path = tmp_path / "map.txt"
        table.save(path)
        loaded = MappingTable.load(path)
        assert loaded.value_of == table.value_of
        assert loaded.probability_of is None

    def test_rank_violation_rejected(self):
        with pytest.raises(ValueError):
            MappingTable({"a": 0, "b": 1}, {"a": 0.2, "b": 0.8})


class TestEncodeText:
    def test_concatenation(self):
        table = build_mapping({"a": 1.0}, 1)
        spec = SchemeSpec(Scheme.VCD_DPPM, 1, 2)
        assert encode_text("aa", table, spec).to_string() == "001001"

    def test_empty_text(self):
        table = build_mapping({"a": 1.0}, 1)
        spec = SchemeSpec(Scheme.VCD_DPPM, 1, 2)
        assert len(encode_text("", table, spec)) == 0
        assert len(encode_text("", table, SchemeSpec(Scheme.OOK, 8))) == 0

    def test_ook_eight_bit_codes(self):
        table = build_mapping({"a": 0.5, "b": 0.5}, 1)
        out = encode_text("ab", table, SchemeSpec(Scheme.OOK, 8))
        assert out.to_string() == "0110000101100010"

    def test_unmapped_character(self):
        table = build_mapping({"a": 1.0}, 1)
        with pytest.raises(ValueError):
            encode_text("ax", table, SchemeSpec(Scheme.VCD_DPPM, 1, 2))

    def test_pulse_count_equals_char_count(self, corpus_text):
        text = corpus_text[:500]
        table = mapping_from_text(text)
        spec = SchemeSpec(Scheme.VCD_DPPM, table.min_order_m(), 3)
        stream = encode_text(text, table, spec)
        assert int(stream.chips.sum()) == len(text)


def test_pack_unpack_inverse():
    rng = np.random.default_rng(3)
    for m in (1, 5, 12):
        bits = rng.integers(0, 2, 60 * m)
        assert np.array_equal(unpack_values(pack_bits(bits, m), m), bits)


def test_spec_validation():
    with pytest.raises(ValueError):
        SchemeSpec(Scheme.DPPM, 2, padding_n0=1)
    with pytest.raises(ValueError):
        SchemeSpec(Scheme.PPM, 0)
    assert SchemeSpec(Scheme.PPM, 5).n_values == 32
    assert Scheme.parse("vcd-dppm") is Scheme.VCD_DPPM
