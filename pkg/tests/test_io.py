import shutil
import struct

import numpy as np
import pytest

from rnla import (MatrixFileError, make_rng, read_matrix, read_vector,
                  write_matrix, write_vector)
from rnla.matio import BINARY_MAGIC


def test_text_round_trip_exact(tmp_path):
    M = make_rng(0).standard_normal((5, 3))
    M[0, 0] = 1e300
    M[1, 1] = -1e-300
    M[2, 2] = 0.1  # not representable exactly; 17 digits must still round-trip
    p = tmp_path / "m.mtx"
    write_matrix(p, M)
    np.testing.assert_array_equal(read_matrix(p), M)


def test_binary_round_trip_exact(tmp_path):
    M = make_rng(1).standard_normal((4, 7))
    for name in ("m.bin", "m.rnla"):
        p = tmp_path / name
        write_matrix(p, M)
        assert p.read_bytes()[:8] == BINARY_MAGIC
        np.testing.assert_array_equal(read_matrix(p), M)


def test_read_sniffs_content_not_extension(tmp_path):
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    src = tmp_path / "m.bin"
    write_matrix(src, M)
    disguised = tmp_path / "m.mtx"
    shutil.copy(src, disguised)
    np.testing.assert_array_equal(read_matrix(disguised), M)


def test_text_layout_is_column_major(tmp_path):
    p = tmp_path / "m.mtx"
    p.write_text("%%MatrixMarket matrix array real general\n2 3\n"
                 "1\n2\n3\n4\n5\n6\n")
    np.testing.assert_array_equal(read_matrix(p),
                                  [[1.0, 3.0, 5.0], [2.0, 4.0, 6.0]])


def test_binary_layout_is_row_major(tmp_path):
    p = tmp_path / "m.bin"
    p.write_bytes(BINARY_MAGIC + struct.pack("<QQ", 2, 2)
                  + struct.pack("<4d", 1.0, 2.0, 3.0, 4.0))
    np.testing.assert_array_equal(read_matrix(p), [[1.0, 2.0], [3.0, 4.0]])


def test_banner_case_and_comments(tmp_path):
    p = tmp_path / "m.mtx"
    p.write_text("%%matrixmarket MATRIX Array REAL General\n"
                 "% a comment\n% another\n1 2\n7\n% inline comment line\n8\n")
    np.testing.assert_array_equal(read_matrix(p), [[7.0, 8.0]])


def test_vector_round_trip_and_shapes(tmp_path):
    v = np.array([1.5, -2.5, 3.5])
    p = tmp_path / "v.mtx"
    write_vector(p, v)
    np.testing.assert_array_equal(read_vector(p), v)
    assert read_matrix(p).shape == (3, 1)

    row = tmp_path / "row.mtx"
    write_matrix(row, v.reshape(1, -1))
    np.testing.assert_array_equal(read_vector(row), v)

    square = tmp_path / "sq.mtx"
    write_matrix(square, np.eye(2))
    with pytest.raises(MatrixFileError, match="expected a vector"):
        read_vector(square)


def test_text_errors(tmp_path):
    head = "%%MatrixMarket matrix array real general\n"

    def bad(name, body):
        p = tmp_path / name
        p.write_text(body)
        return p

    with pytest.raises(MatrixFileError, match="line 1"):
        read_matrix(bad("banner.mtx", "%%MatrixMarket coordinate real\n1 1\n0\n"))
    with pytest.raises(MatrixFileError, match="empty"):
        read_matrix(bad("empty.mtx", ""))
    with pytest.raises(MatrixFileError, match="missing size line"):
        read_matrix(bad("nosize.mtx", head + "% only comments\n"))
    with pytest.raises(MatrixFileError, match="line 2"):
        read_matrix(bad("size3.mtx", head + "1 2 3\n"))
    with pytest.raises(MatrixFileError, match="non-integer"):
        read_matrix(bad("sizex.mtx", head + "one 2\n"))
    with pytest.raises(MatrixFileError, match="positive"):
        read_matrix(bad("size0.mtx", head + "0 2\n"))
    with pytest.raises(MatrixFileError, match="line 3: not a number"):
        read_matrix(bad("nan1.mtx", head + "1 1\nabc\n"))
    with pytest.raises(MatrixFileError, match="non-finite"):
        read_matrix(bad("inf.mtx", head + "1 1\ninf\n"))
    with pytest.raises(MatrixFileError, match="non-finite"):
        read_matrix(bad("nan2.mtx", head + "1 1\nnan\n"))
    with pytest.raises(MatrixFileError, match="found 1"):
        read_matrix(bad("short.mtx", head + "2 2\n1\n"))
    with pytest.raises(MatrixFileError, match="more than 1"):
        read_matrix(bad("long.mtx", head + "1 1\n1\n2\n"))


def test_binary_errors(tmp_path):
    def bad(name, payload):
        p = tmp_path / name
        p.write_bytes(payload)
        return p

    with pytest.raises(MatrixFileError, match="truncated"):
        read_matrix(bad("t.bin", BINARY_MAGIC + b"\x00" * 4))
    with pytest.raises(MatrixFileError, match="positive"):
        read_matrix(bad("z.bin", BINARY_MAGIC + struct.pack("<QQ", 0, 3)))
    with pytest.raises(MatrixFileError, match="payload is 8 bytes, expected 32"):
        read_matrix(bad("p.bin", BINARY_MAGIC + struct.pack("<QQ", 2, 2)
                        + struct.pack("<d", 1.0)))
    with pytest.raises(MatrixFileError, match="flat index 1"):
        read_matrix(bad("n.bin", BINARY_MAGIC + struct.pack("<QQ", 1, 2)
                        + struct.pack("<2d", 1.0, float("nan"))))


def test_error_messages_carry_path(tmp_path):
    p = tmp_path / "named.mtx"
    p.write_text("junk\n")
    with pytest.raises(MatrixFileError, match="named.mtx"):
        read_matrix(p)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_matrix(tmp_path / "absent.mtx")
