import gzip

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adsg.data import (
    Dataset,
    ParseError,
    format_libsvm,
    load_libsvm,
    make_partition,
    parse_libsvm,
    row_block_dot,
    shuffle_rows,
    sparsity,
)
from conftest import random_sparse_dataset


class TestParse:
    def test_basic(self):
        ds = parse_libsvm("1 1:0.5 3:-2.0\n-1 2:1.0")
        assert (ds.n, ds.d, ds.nnz) == (2, 3, 3)
        np.testing.assert_array_equal(ds.labels, [1.0, -1.0])
        idx, vals = ds.row(0)
        np.testing.assert_array_equal(idx, [0, 2])  # converted to 0-based
        np.testing.assert_array_equal(vals, [0.5, -2.0])

    def test_empty_input(self):
        with pytest.raises(ParseError, match="empty input"):
            parse_libsvm("")

    def test_comments_and_blank_lines(self):
        ds = parse_libsvm("# header\n\n1 1:2.0  # trailing\n")
        assert ds.n == 1 and ds.d == 1

    def test_malformed_token_names_line(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_libsvm("1 1:1.0\n1 2:oops")

    def test_bad_label_names_line(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_libsvm("x 1:1.0")

    def test_non_ascending_rejected(self):
        with pytest.raises(ParseError, match="ascending"):
            parse_libsvm("1 3:1.0 2:1.0")

    def test_duplicate_index_rejected(self):
        with pytest.raises(ParseError, match="ascending"):
            parse_libsvm("1 2:1.0 2:3.0")

    def test_index_below_one_rejected(self):
        with pytest.raises(ParseError, match="< 1"):
            parse_libsvm("1 0:1.0")

    def test_dimension_override_upward(self):
        ds = parse_libsvm("1 1:1.0", d=10)
        assert ds.d == 10
        with pytest.raises(ParseError, match="smaller"):
            parse_libsvm("1 5:1.0", d=2)

    def test_round_trip(self, rng):
        ds = random_sparse_dataset(7, 12, 4, rng)
        back = parse_libsvm(format_libsvm(ds), d=ds.d)
        np.testing.assert_array_equal(back.indptr, ds.indptr)
        np.testing.assert_array_equal(back.indices, ds.indices)
        np.testing.assert_array_equal(back.data, ds.data)
        np.testing.assert_array_equal(back.labels, ds.labels)

    def test_gzip_load(self, tmp_path):
        path = tmp_path / "tiny.txt.gz"
        with gzip.open(path, "wt") as fh:
            fh.write("1 1:0.5 3:-2.0\n-1 2:1.0\n")
        ds = load_libsvm(path)
        assert (ds.n, ds.d, ds.nnz) == (2, 3, 3)


class TestDataset:
    def test_immutable(self):
        ds = parse_libsvm("1 1:0.5")
        with pytest.raises(ValueError):
            ds.data[0] = 2.0

    def test_matvec_against_dense(self, rng):
        from conftest import dense_matrix

        ds = random_sparse_dataset(9, 14, 5, rng)
        A = dense_matrix(ds)
        x = rng.standard_normal(14)
        g = rng.standard_normal(9)
        np.testing.assert_allclose(ds.dot(x), A @ x, atol=1e-12)
        np.testing.assert_allclose(ds.tdot(g), A.T @ g, atol=1e-12)

    def test_shuffle_rows_preserves_content(self, rng):
        ds = random_sparse_dataset(8, 10, 3, rng)
        sh = shuffle_rows(ds, seed=3)
        orig = sorted(
            (tuple(ds.row(i)[0]), tuple(ds.row(i)[1]), ds.labels[i]) for i in range(ds.n)
        )
        got = sorted(
            (tuple(sh.row(i)[0]), tuple(sh.row(i)[1]), sh.labels[i]) for i in range(sh.n)
        )
        assert orig == got


class TestSparsity:
    def test_direct_count(self):
        ds = parse_libsvm("1 1:0.5 3:-2.0\n-1 2:1.0")
        assert sparsity(ds) == pytest.approx(0.5)

    def test_dense_is_one(self):
        ds = parse_libsvm("1 1:1.0 2:1.0\n-1 1:2.0 2:0.5")
        assert sparsity(ds) == 1.0

    def test_in_unit_interval(self, rng):
        ds = random_sparse_dataset(5, 9, 2, rng)
        assert 0.0 < sparsity(ds) <= 1.0


class TestPartition:
    def test_even_split(self):
        part = make_partition(8, 4)
        assert part.omega == 2
        assert part.bounds(3) == (6, 8)

    def test_short_last_block(self):
        part = make_partition(7, 3)
        assert part.omega == 3
        assert part.bounds(2) == (6, 7)
        covered = sorted(c for l in range(3) for c in range(*part.bounds(l)))
        assert covered == list(range(7))

    def test_single_block(self):
        part = make_partition(5, 1)
        assert part.bounds(0) == (0, 5)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            make_partition(4, 0)
        with pytest.raises(ValueError):
            make_partition(4, 5)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 300), st.data())
    def test_blocks_cover_and_disjoint(self, d, data):
        B = data.draw(st.integers(1, d))
        part = make_partition(d, B)
        seen = []
        for l in range(B):
            lo, hi = part.bounds(l)
            assert 0 <= lo <= hi <= d
            seen.extend(range(lo, hi))
        assert seen == list(range(d))  # disjoint union, in order
        if d % B == 0:
            assert all(part.width(l) == part.omega for l in range(B))


class TestRowBlockDot:
    def test_single_block(self):
        ds = parse_libsvm("1 1:2.0", d=2)
        part = make_partition(2, 1)
        assert row_block_dot(ds, part, 0, np.array([3.0, 0.0]), 0) == 6.0

    def test_empty_intersection(self):
        ds = parse_libsvm("1 1:2.0", d=4)
        part = make_partition(4, 2)
        assert row_block_dot(ds, part, 0, np.zeros(4) + 1.0, 1) == 0.0

    def test_against_dense_oracle(self, rng):
        from conftest import dense_matrix

        ds = random_sparse_dataset(4, 20, 10, rng)
        part = make_partition(20, 3)
        A = dense_matrix(ds)
        v = rng.standard_normal(20)
        for i in range(ds.n):
            for l in range(part.B):
                lo, hi = part.bounds(l)
                want = float(A[i, lo:hi] @ v[lo:hi])
                assert abs(row_block_dot(ds, part, i, v, l) - want) < 1e-12

    def test_out_of_range(self):
        ds = parse_libsvm("1 1:2.0")
        part = make_partition(2, 1)
        with pytest.raises(ValueError):
            row_block_dot(ds, part, 5, np.zeros(2), 0)
        with pytest.raises(ValueError):
            row_block_dot(ds, part, 0, np.zeros(2), 3)
