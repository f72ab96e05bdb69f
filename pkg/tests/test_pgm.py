import numpy as np
import pytest

from viewpred.pgm import read_pgm, write_pgm


def test_roundtrip_quantized(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.random((9, 7)).astype(np.float32)
    path = tmp_path / "x.pgm"
    write_pgm(path, img)
    back = read_pgm(path)
    assert back.shape == (9, 7)
    np.testing.assert_allclose(back, img, atol=0.5 / 255 + 1e-6)


def test_exact_levels_roundtrip(tmp_path):
    img = np.array([[0.0, 1.0], [128 / 255, 17 / 255]], dtype=np.float32)
    path = tmp_path / "levels.pgm"
    write_pgm(path, img)
    np.testing.assert_allclose(read_pgm(path), img, atol=1e-7)


def test_out_of_range_clipped(tmp_path):
    img = np.array([[-0.5, 1.5]])
    path = tmp_path / "clip.pgm"
    write_pgm(path, img)
    back = read_pgm(path)
    assert back[0, 0] == 0.0
    assert back[0, 1] == 1.0


def test_rejects_non_pgm(tmp_path):
    path = tmp_path / "bad.pgm"
    path.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(ValueError):
        read_pgm(path)
