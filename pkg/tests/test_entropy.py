import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privleak.entropy import (
    Algorithm,
    DegenerateLengthError,
    EmptyPayloadError,
    EntropyConfig,
    EntropyValue,
    Symbol,
    batch_entropy,
    binary_min_constant,
    binary_shannon_constant,
    correction_factor,
    length_correct,
    min_entropy,
    octet_bit_entropy_classes,
    payload_entropy,
    shannon_entropy,
)

payloads = st.binary(min_size=1, max_size=256)


class TestShannon:
    def test_single_symbol_payload_is_zero(self):
        assert shannon_entropy(b"A" * 31, Symbol.OCTET).value == 0.0

    def test_uniform_octets_hit_the_maximum(self):
        payload = bytes(range(256))
        assert shannon_entropy(payload, Symbol.OCTET).value == pytest.approx(8.0)

    def test_nop_sled_bit_entropy(self):
        # 0x90 has two of eight bits set
        ev = shannon_entropy(b"\x90" * 64, Symbol.BIT)
        assert ev.value == pytest.approx(0.8112781244591328, abs=1e-12)
        assert ev.n == 64 * 8

    def test_empty_payload_rejected(self):
        with pytest.raises(EmptyPayloadError):
            shannon_entropy(b"", Symbol.OCTET)

    def test_bounded_by_alphabet(self):
        ev = shannon_entropy(b"hello world", Symbol.OCTET)
        assert 0.0 <= ev.value <= 8.0


class TestMinEntropy:
    def test_constant_payload(self):
        assert min_entropy(b"\x90" * 10, Symbol.OCTET).value == 0.0

    def test_uniform_bits(self):
        # 0xF0: equal zero/one counts
        assert min_entropy(b"\xf0" * 4, Symbol.BIT).value == pytest.approx(1.0)

    def test_nop_sled_bit(self):
        # max bit frequency 6/8
        expected = math.log2(1 / 0.75)
        assert min_entropy(b"\x90" * 8, Symbol.BIT).value == pytest.approx(expected)

    def test_empty_payload_rejected(self):
        with pytest.raises(EmptyPayloadError):
            min_entropy(b"", Symbol.BIT)

    @given(payloads)
    @settings(max_examples=200)
    def test_min_never_exceeds_shannon(self, payload):
        for symbol in (Symbol.BIT, Symbol.OCTET):
            lo = min_entropy(payload, symbol).value
            hi = shannon_entropy(payload, symbol).value
            assert lo <= hi + 1e-12


@given(payloads, st.randoms(use_true_random=False))
@settings(max_examples=100)
def test_permutation_invariance(payload, rnd):
    shuffled = bytearray(payload)
    rnd.shuffle(shuffled)
    shuffled = bytes(shuffled)
    for symbol in (Symbol.BIT, Symbol.OCTET):
        assert shannon_entropy(payload, symbol).value == pytest.approx(
            shannon_entropy(shuffled, symbol).value, abs=1e-12
        )
        assert min_entropy(payload, symbol).value == pytest.approx(
            min_entropy(shuffled, symbol).value, abs=1e-12
        )


class TestLengthCorrection:
    def test_bit_formula(self):
        ev = length_correct(EntropyValue(0.5, 100), Symbol.BIT)
        assert ev.value == pytest.approx(5.0)

    def test_octet_formula(self):
        # sqrt(16)/log2(16) == 1
        ev = length_correct(EntropyValue(1.0, 16), Symbol.OCTET)
        assert ev.value == pytest.approx(1.0)

    def test_zero_entropy_stays_zero(self):
        assert length_correct(EntropyValue(0.0, 1234), Symbol.OCTET).value == 0.0

    def test_one_octet_is_degenerate(self):
        with pytest.raises(DegenerateLengthError):
            correction_factor(1, Symbol.OCTET)

    def test_pipeline_uses_octet_count_for_bit_symbol(self):
        # the calibrated thresholds assume sqrt(octets) for the bit metric
        payload = b"\x90\x0f" * 8
        cfg = EntropyConfig(Algorithm.SHANNON, Symbol.BIT, normalized=True, length_corrected=True)
        raw = shannon_entropy(payload, Symbol.BIT).value
        assert payload_entropy(payload, cfg).value == pytest.approx(raw * math.sqrt(16))


class TestPipeline:
    def test_normalization_bounds(self):
        cfg = EntropyConfig(Algorithm.SHANNON, Symbol.OCTET, normalized=True, length_corrected=False)
        ev = payload_entropy(bytes(range(256)), cfg)
        assert ev.value == pytest.approx(1.0)

    def test_octet_zero_but_bit_positive_on_nop_sled(self):
        sled = b"\x90" * 31
        octet = payload_entropy(sled, EntropyConfig(Algorithm.SHANNON, Symbol.OCTET, True, False))
        bit = payload_entropy(sled, EntropyConfig(Algorithm.SHANNON, Symbol.BIT, True, False))
        assert octet.value == 0.0
        assert bit.value > 0.0

    @given(payloads)
    @settings(max_examples=100)
    def test_batch_matches_scalar(self, payload):
        cfg = EntropyConfig(Algorithm.SHANNON, Symbol.OCTET, normalized=True,
                            length_corrected=len(payload) > 1)
        matrix = np.frombuffer(payload, dtype=np.uint8)[None, :]
        assert batch_entropy(matrix, cfg)[0] == pytest.approx(
            payload_entropy(payload, cfg).value, abs=1e-12
        )

    @given(payloads)
    @settings(max_examples=100)
    def test_normalized_in_unit_interval(self, payload):
        for algorithm in Algorithm:
            for symbol in Symbol:
                cfg = EntropyConfig(algorithm, symbol, normalized=True, length_corrected=False)
                assert -1e-12 <= payload_entropy(payload, cfg).value <= 1.0 + 1e-12


class TestBinaryConstants:
    def test_shannon_maximum(self):
        assert binary_shannon_constant(0.5) == pytest.approx(1.0)

    def test_shannon_edge(self):
        assert binary_shannon_constant(0.0) == 0.0
        assert binary_shannon_constant(1.0) == 0.0

    def test_shannon_quarter(self):
        assert binary_shannon_constant(0.25) == pytest.approx(0.811278124459, abs=1e-9)

    def test_min_edges(self):
        assert binary_min_constant(0.0) == 0.0
        assert binary_min_constant(1.0) == 0.0
        assert binary_min_constant(0.5) == pytest.approx(1.0)

    def test_min_quarter(self):
        assert binary_min_constant(0.25) == pytest.approx(math.log2(1 / 0.625))

    def test_domain_errors(self):
        for p in (-0.1, 1.1):
            with pytest.raises(ValueError):
                binary_shannon_constant(p)
            with pytest.raises(ValueError):
                binary_min_constant(p)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_symmetry(self, p):
        assert binary_shannon_constant(p) == pytest.approx(binary_shannon_constant(1 - p), abs=1e-12)
        assert binary_min_constant(p) == pytest.approx(binary_min_constant(1 - p), abs=1e-12)

    @given(st.floats(min_value=0.001, max_value=0.999))
    def test_constants_differ_away_from_special_points(self, p):
        c1 = binary_shannon_constant(p)
        cinf = binary_min_constant(p)
        if min(abs(p - 0.0), abs(p - 0.5), abs(p - 1.0)) > 0.01:
            assert c1 != pytest.approx(cinf, abs=1e-6)


class TestBitEntropyClasses:
    def test_nine_signature_classes(self):
        classes = octet_bit_entropy_classes()
        assert len(classes) == 9
        assert sum(len(c[2]) for c in classes) == 256

    def test_two_bits_set_class_has_28_octets(self):
        classes = octet_bit_entropy_classes()
        two = classes[2]
        assert two[0] == 2
        assert len(two[2]) == 28
        assert 0x90 in two[2]
        assert two[1] == pytest.approx(0.8112781244591328)

    def test_scalar_values_fold_symmetrically(self):
        # H(k/8) == H((8-k)/8), so the nine classes share five scalar values
        classes = octet_bit_entropy_classes()
        assert len({round(c[1], 12) for c in classes}) == 5
