"""Kernel container round trips: binary and CSV."""

import numpy as np
import pytest

from nlmedia.grids import (
    DiscreteKernel,
    PeriodicGrid,
    load_kernel,
    load_kernel_csv,
    save_kernel,
    save_kernel_csv,
)
from nlmedia.response import hydrodynamic_model


def _sample_kernel():
    grid = PeriodicGrid((2, 2, 2), (1.5, 2.0, 2.5))
    return hydrodynamic_model(1.3, 0.3, 0.4).q_kernel(grid, 1.1)


class TestBinaryContainer:
    def test_roundtrip_exact(self, tmp_path):
        k = _sample_kernel()
        path = tmp_path / "kernel.nlmk"
        save_kernel(k, path)
        back = load_kernel(path)
        assert back.grid.shape == k.grid.shape
        assert back.grid.lengths == k.grid.lengths
        assert np.array_equal(back.matrix, k.matrix)

    def test_magic_guard(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"XXXX" + b"\x00" * 64)
        with pytest.raises(ValueError, match="magic"):
            load_kernel(path)

    def test_version_guard(self, tmp_path):
        k = _sample_kernel()
        path = tmp_path / "kernel.nlmk"
        save_kernel(k, path)
        data = bytearray(path.read_bytes())
        data[4:8] = (99).to_bytes(4, "little")
        path.write_bytes(bytes(data))
        with pytest.raises(ValueError, match="version"):
            load_kernel(path)

    def test_truncated_file(self, tmp_path):
        k = _sample_kernel()
        path = tmp_path / "kernel.nlmk"
        save_kernel(k, path)
        path.write_bytes(path.read_bytes()[: len(path.read_bytes()) // 2])
        with pytest.raises(ValueError):
            load_kernel(path)


class TestCsvContainer:
    def test_roundtrip_exact(self, tmp_path):
        k = _sample_kernel()
        path = tmp_path / "kernel.csv"
        save_kernel_csv(k, path)
        back = load_kernel_csv(path)
        assert back.grid.shape == k.grid.shape
        assert back.grid.lengths == k.grid.lengths
        # %.17g round-trips IEEE doubles exactly
        assert np.array_equal(back.matrix, k.matrix)

    def test_missing_metadata(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("row,col,re,im\n0,0,1.0,0.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="metadata"):
            load_kernel_csv(path)

    def test_binary_and_csv_agree(self, tmp_path):
        k = _sample_kernel()
        pb = tmp_path / "kernel.nlmk"
        pc = tmp_path / "kernel.csv"
        save_kernel(k, pb)
        save_kernel_csv(k, pc)
        assert np.array_equal(load_kernel(pb).matrix,
                              load_kernel_csv(pc).matrix)


def test_identity_roundtrip(tmp_path):
    grid = PeriodicGrid((2, 2, 2))
    n = 3 * grid.n_points
    k = DiscreteKernel(grid, np.eye(n, dtype=complex))
    path = tmp_path / "identity.nlmk"
    save_kernel(k, path)
    assert np.array_equal(load_kernel(path).matrix, np.eye(n))
