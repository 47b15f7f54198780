import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from jndladder.glcm import glcm, glcm_features, quantize_levels


def naive_glcm(patch, offset, levels):
    """Dictionary-count oracle: integer pair counts, symmetrized, normalized."""
    patch = np.asarray(patch, dtype=np.int64)
    dy, dx = offset
    h, w = patch.shape
    counts = np.zeros((levels, levels), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            yy, xx = y + dy, x + dx
            if 0 <= yy < h and 0 <= xx < w:
                a, b = patch[y, x], patch[yy, xx]
                counts[a, b] += 1
                counts[b, a] += 1
    return counts


class TestGlcm:
    def test_constant_patch_single_diagonal_entry(self):
        p = glcm(np.full((8, 8), 42, dtype=np.uint8), levels=256)
        assert p[42, 42] == 1.0
        assert p.sum() == pytest.approx(1.0, abs=1e-12)

    def test_two_by_two_hand_count(self):
        patch = np.array([[0, 1], [0, 1]], dtype=np.uint8)
        p = glcm(patch, offset=(0, 1), levels=2)
        assert p[0, 1] == 0.5 and p[1, 0] == 0.5
        assert p[0, 0] == 0.0 and p[1, 1] == 0.0

    def test_matches_naive_counting_oracle(self, rng):
        for _ in range(10):
            patch = rng.integers(0, 16, size=(9, 7)).astype(np.uint8)
            offset = (int(rng.integers(0, 3)), int(rng.integers(-2, 3)))
            if offset == (0, 0):
                offset = (1, 0)
            counts = naive_glcm(patch, offset, 16)
            p = glcm(patch, offset=offset, levels=16)
            # exact integer counts before normalization
            assert np.array_equal(p * counts.sum(), counts.astype(np.float64))

    def test_symmetric_and_normalized(self, rng):
        patch = rng.integers(0, 64, size=(16, 16)).astype(np.uint8)
        p = glcm(patch, levels=64)
        assert np.array_equal(p, p.T)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_patch_rejected(self):
        with pytest.raises(ValueError, match="no sample pairs"):
            glcm(np.zeros((1, 1), dtype=np.uint8), offset=(0, 1), levels=4)

    def test_values_above_levels_rejected(self):
        with pytest.raises(ValueError, match="levels"):
            glcm(np.full((4, 4), 9, dtype=np.uint8), levels=8)


class TestGlcmFeatures:
    def test_constant_patch_conventions(self):
        feats = glcm_features(glcm(np.full((6, 6), 3, dtype=np.uint8), levels=8))
        assert feats.as_tuple() == (0.0, 0.0, 1.0, 1.0, 1.0, 1.0)

    def test_two_by_two_hand_values(self):
        p = glcm(np.array([[0, 1], [0, 1]], dtype=np.uint8), levels=2)
        feats = glcm_features(p)
        assert feats.contrast == pytest.approx(1.0, abs=1e-12)
        assert feats.dissimilarity == pytest.approx(1.0, abs=1e-12)
        assert feats.homogeneity == pytest.approx(0.5, abs=1e-12)
        assert feats.angular_second_moment == pytest.approx(0.5, abs=1e-12)
        assert feats.energy == pytest.approx(math.sqrt(0.5), abs=1e-12)

    def test_energy_squared_is_asm(self, rng):
        patch = rng.integers(0, 32, size=(12, 12)).astype(np.uint8)
        feats = glcm_features(glcm(patch, levels=32))
        assert feats.energy**2 == pytest.approx(
            feats.angular_second_moment, rel=1e-12
        )

    def test_haralick_formulas_against_direct_sums(self, rng):
        patch = rng.integers(0, 16, size=(10, 10)).astype(np.uint8)
        p = glcm(patch, levels=16)
        feats = glcm_features(p)
        idx = np.arange(16.0)
        a = idx[:, None] + np.zeros(16)
        b = np.zeros(16)[:, None] + idx
        assert feats.contrast == pytest.approx(np.sum(p * (a - b) ** 2), abs=1e-12)
        assert feats.dissimilarity == pytest.approx(
            np.sum(p * np.abs(a - b)), abs=1e-12
        )
        assert feats.homogeneity == pytest.approx(
            np.sum(p / (1 + (a - b) ** 2)), abs=1e-12
        )
        mu = np.sum(p * a)
        sigma = math.sqrt(np.sum(p * (a - mu) ** 2))
        corr = np.sum(p * (a - mu) * (b - mu)) / sigma**2
        assert feats.correlation == pytest.approx(corr, abs=1e-12)

    @given(
        arrays(
            np.uint8,
            (6, 6),
            elements=st.integers(min_value=0, max_value=7),
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_invariants_hold(self, patch):
        p = glcm(patch, levels=8)
        assert abs(p.sum() - 1.0) < 1e-12
        feats = glcm_features(p)
        assert 0.0 < feats.homogeneity <= 1.0
        assert 0.0 < feats.angular_second_moment <= 1.0
        assert 0.0 < feats.energy <= 1.0
        assert feats.contrast >= 0.0 and feats.dissimilarity >= 0.0
        assert -1.0 - 1e-12 <= feats.correlation <= 1.0 + 1e-12


def test_quantize_levels():
    patch = np.array([0, 255, 512, 1023], dtype=np.uint16)
    q = quantize_levels(patch, 256, 10)
    assert list(q) == [0, 63, 128, 255]
    assert quantize_levels(patch, 1024, 10) is patch
