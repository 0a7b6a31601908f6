"""
Tanner Module Tests

Tests for code spec parsing, Tanner graph construction, encoding and syndromes.
"""

import pytest
import numpy as np

from ahd.errors import LengthMismatch
from ahd.tanner import (
    CodeSpec,
    InvalidSpec,
    batch_syndrome,
    build_code,
    default_spec_path,
    encode,
    expand_dense,
    gf2_rank,
    is_staircase,
    load_spec,
    parse_spec,
    serialize_spec,
    syndrome,
)


# =============================================================================
# Spec Format Tests
# =============================================================================


class TestSpecFormat:
    """Tests for the code spec text format."""

    def test_load_shipped_spec(self):
        """Test the shipped Z=8 spec dimensions."""
        spec = load_spec(default_spec_path(8))
        assert (spec.base_rows, spec.base_cols, spec.lift_size) == (4, 8, 8)
        assert spec.k == 32
        assert spec.n == 64
        assert spec.rate == 0.5

    def test_serialize_is_canonical(self):
        """Test that serializing a parsed spec gives a stable text."""
        text = "# comment\nqcldpc 2 4 3 2\n0  1 0 -\n2 - 0 0\n"
        spec = parse_spec(text)
        canonical = serialize_spec(spec)
        assert canonical == "qcldpc 2 4 3 2\n0 1 0 -\n2 - 0 0\n"
        assert parse_spec(canonical) == spec

    def test_bad_header(self):
        """Test rejection of a malformed header."""
        with pytest.raises(InvalidSpec):
            parse_spec("ldpc 2 4 3 2\n0 1 0 -\n2 - 0 0\n")

    def test_shift_out_of_range(self):
        """Test rejection of a shift >= Z."""
        with pytest.raises(InvalidSpec):
            parse_spec("qcldpc 2 4 3 2\n0 3 0 -\n2 - 0 0\n")

    def test_row_count_mismatch(self):
        """Test rejection of a missing shift row."""
        with pytest.raises(InvalidSpec):
            parse_spec("qcldpc 2 4 3 2\n0 1 0 -\n")

    def test_low_check_degree(self):
        """Test rejection of a base row with a single circulant."""
        with pytest.raises(InvalidSpec):
            parse_spec("qcldpc 2 4 3 2\n- - 0 -\n2 - 0 0\n")

    def test_info_cols_must_match(self):
        """Test rejection of an info column count other than cols - rows."""
        with pytest.raises(InvalidSpec):
            parse_spec("qcldpc 2 4 3 1\n0 1 0 -\n2 - 0 0\n")


# =============================================================================
# Graph Construction Tests
# =============================================================================


class TestBuildCode:
    """Tests for Tanner graph construction."""

    def test_dimensions(self, graph8):
        """Test N, K and edge count of the Z=8 code."""
        spec = graph8.spec
        assert graph8.n == 64
        assert graph8.k == 32
        assert graph8.n_checks == 32
        assert graph8.n_edges == spec.nonnull_count() * 8 == 19 * 8

    def test_edges_match_dense_matrix(self, graph8):
        """Test that every edge is a one of H and every one of H is an edge."""
        h = expand_dense(graph8.spec)
        assert h[graph8.edge_check, graph8.edge_var].all()
        assert int(h.sum()) == graph8.n_edges

    def test_full_rank(self, graph16):
        """Test that the shipped code has full-rank parity checks."""
        assert gf2_rank(expand_dense(graph16.spec)) == graph16.n_checks

    def test_check_degrees(self, graph8):
        """Test check node degrees against the base row weights."""
        for r in range(graph8.spec.base_rows):
            degree = graph8.spec.row_degree(r)
            assert len(graph8.check_neighbors(r * 8)) == degree
            assert graph8.row_groups[r].shape == (8, degree)

    def test_deterministic(self):
        """Test that two builds produce byte-identical adjacency."""
        spec = load_spec(default_spec_path(16))
        assert build_code(spec).adjacency_bytes() == build_code(spec).adjacency_bytes()

    def test_shipped_specs_are_staircase(self):
        """Test the block dual-diagonal parity part of the shipped codes."""
        for lift in (8, 16, 32):
            assert is_staircase(load_spec(default_spec_path(lift)))

    def test_singular_parity_rejected(self):
        """Test that an unencodable spec fails to build."""
        spec = CodeSpec(
            base_rows=2,
            base_cols=4,
            lift_size=3,
            shifts=((0, 1, 0, 0), (2, 0, 0, 0)),
            info_cols=2,
        )
        with pytest.raises(InvalidSpec):
            build_code(spec)


# =============================================================================
# Encoding Tests
# =============================================================================


class TestEncode:
    """Tests for systematic encoding and syndromes."""

    def test_codewords_have_zero_syndrome(self, graph16, rng):
        """Test that random messages encode to valid codewords."""
        for _ in range(20):
            info = rng.integers(0, 2, graph16.k)
            codeword = encode(graph16, info)
            assert codeword.shape == (graph16.n,)
            assert np.array_equal(codeword[:graph16.k], info)
            assert not syndrome(graph16, codeword).any()

    def test_zero_message(self, graph8):
        """Test that the zero message encodes to the zero codeword."""
        assert not encode(graph8, np.zeros(32, dtype=np.uint8)).any()

    def test_non_staircase_encoder(self, rng):
        """Test the dense-inverse fallback on an upper block-triangular parity part."""
        spec = parse_spec("qcldpc 2 4 3 2\n0 1 0 1\n2 0 - 0\n")
        assert not is_staircase(spec)
        graph = build_code(spec)
        for _ in range(8):
            codeword = encode(graph, rng.integers(0, 2, graph.k))
            assert not syndrome(graph, codeword).any()

    def test_wrong_message_length(self, graph8):
        """Test LengthMismatch for a message of the wrong size."""
        with pytest.raises(LengthMismatch):
            encode(graph8, np.zeros(31, dtype=np.uint8))

    def test_wrong_word_length(self, graph8):
        """Test LengthMismatch for a syndrome over the wrong length."""
        with pytest.raises(LengthMismatch):
            syndrome(graph8, np.zeros(63, dtype=np.uint8))

    def test_single_bit_error_detected(self, graph8, rng):
        """Test that flipping one codeword bit breaks some parity check."""
        codeword = encode(graph8, rng.integers(0, 2, graph8.k))
        codeword[5] ^= 1
        assert syndrome(graph8, codeword).any()

    def test_batch_syndrome_matches_single(self, graph8, rng):
        """Test batched syndromes against the one-word version."""
        words = rng.integers(0, 2, (5, graph8.n)).astype(np.uint8)
        batch = batch_syndrome(graph8, words)
        for i in range(5):
            assert np.array_equal(batch[i], syndrome(graph8, words[i]))
