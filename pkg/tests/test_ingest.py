import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jndladder.errors import IngestError, SchemaError
from jndladder.ingest import (
    chroma_plane_shape,
    crop_patches,
    load_sidecar_metadata,
    parse_raw_yuv,
    parse_y4m,
    tile_blocks,
    write_raw_yuv,
    write_y4m,
)

from conftest import random_luma, y4m_stream


class TestParseY4m:
    def test_basic_header_and_frames(self, rng):
        planes = [
            (random_luma(rng, 64, 64), random_luma(rng, 32, 32), random_luma(rng, 32, 32))
            for _ in range(2)
        ]
        clip = parse_y4m(y4m_stream(planes, 64, 64), scene_id="s0")
        assert clip.frame_count == 2
        assert clip.frames[0].width == 64 and clip.frames[0].height == 64
        assert clip.framerate == 30.0
        assert clip.frames[0].chroma_format == "420"
        assert np.array_equal(clip.frames[1].y, planes[1][0])

    def test_not_y4m(self):
        with pytest.raises(IngestError, match="offset 0"):
            parse_y4m(b"RIFFxxxx")

    def test_truncated_frame_reports_counts(self, rng):
        y, u, v = random_luma(rng, 64, 64), random_luma(rng, 32, 32), random_luma(rng, 32, 32)
        data = y4m_stream([(y, u, v)], 64, 64)
        with pytest.raises(IngestError, match=r"expected 6144 bytes, got 100"):
            parse_y4m(data[: data.index(b"FRAME\n") + 6 + 100])

    def test_unsupported_chroma_tag(self):
        with pytest.raises(IngestError, match="Cmono"):
            parse_y4m(b"YUV4MPEG2 W4 H4 F30:1 Cmono\n")

    def test_missing_framerate(self):
        with pytest.raises(IngestError, match="framerate"):
            parse_y4m(b"YUV4MPEG2 W4 H4 C420\nFRAME\n" + bytes(24))

    def test_ten_bit_roundtrip_byte_identical(self, rng):
        planes = [
            (
                random_luma(rng, 32, 48, bit_depth=10),
                random_luma(rng, 16, 24, bit_depth=10),
                random_luma(rng, 16, 24, bit_depth=10),
            )
            for _ in range(3)
        ]
        data = y4m_stream(planes, 48, 32, fps=(30000, 1001), ctag="420p10")
        clip = parse_y4m(data)
        assert clip.frames[0].bit_depth == 10
        assert write_y4m(clip) == data

    def test_parse_write_parse_identity(self, rng):
        planes = [
            (random_luma(rng, 16, 16), random_luma(rng, 8, 16), random_luma(rng, 8, 16))
        ]
        data = y4m_stream(planes, 16, 16, ctag="422", extra=" Ip A1:1")
        clip = parse_y4m(data)
        again = parse_y4m(write_y4m(clip))
        assert again.fps_num == clip.fps_num
        for a, b in zip(clip.frames, again.frames):
            assert np.array_equal(a.y, b.y)
            assert np.array_equal(a.u, b.u)
            assert np.array_equal(a.v, b.v)


class TestParseRawYuv:
    def test_two_frames(self, rng):
        data = rng.integers(0, 256, size=2 * (64 * 64 + 2 * 32 * 32), dtype=np.uint32)
        raw = data.astype(np.uint8).tobytes()
        clip = parse_raw_yuv(raw, width=64, height=64)
        assert clip.frame_count == 2

    def test_empty_input(self):
        with pytest.raises(IngestError, match="empty"):
            parse_raw_yuv(b"", width=64, height=64)

    def test_size_mismatch(self):
        with pytest.raises(IngestError, match="not a multiple"):
            parse_raw_yuv(bytes(6145), width=64, height=64)

    @given(
        n_frames=st.integers(min_value=1, max_value=5),
        w=st.integers(min_value=2, max_value=24).map(lambda v: v * 2),
        h=st.integers(min_value=2, max_value=24).map(lambda v: v * 2),
    )
    @settings(max_examples=40, deadline=None)
    def test_frame_count_is_size_over_frame_size(self, n_frames, w, h):
        frame_size = w * h + 2 * (w // 2) * (h // 2)
        clip = parse_raw_yuv(bytes(n_frames * frame_size), width=w, height=h)
        assert clip.frame_count == n_frames

    def test_roundtrip(self, rng):
        raw = bytes(rng.integers(0, 256, size=3 * 6144, dtype=np.uint32).astype(np.uint8))
        clip = parse_raw_yuv(raw, width=64, height=64)
        assert write_raw_yuv(clip) == raw


class TestSidecar:
    def test_fields(self):
        meta = load_sidecar_metadata(
            '{"width": 64, "height": 48, "bit_depth": 8, "chroma": "420",'
            ' "fps": 29.97, "scene_id": "clip7"}'
        )
        assert meta["fps_num"] == 2997 and meta["fps_den"] == 100
        assert meta["scene_id"] == "clip7"

    def test_missing_field(self):
        with pytest.raises(SchemaError, match="chroma"):
            load_sidecar_metadata('{"width": 64, "height": 48, "bit_depth": 8,'
                                  ' "fps": 30, "scene_id": "x"}')


class TestTileBlocks:
    def test_exact_tiling(self, rng):
        blocks = tile_blocks(random_luma(rng, 64, 64), 32)
        assert blocks.shape == (4, 32, 32)

    def test_partial_column_edge_replicated(self, rng):
        plane = random_luma(rng, 64, 65)
        blocks = tile_blocks(plane, 32)
        assert blocks.shape == (6, 32, 32)
        # rightmost blocks replicate the final sample column
        right_top = blocks[2]
        assert np.array_equal(right_top[:, 0], plane[:32, 64])
        assert np.array_equal(right_top[:, 1], plane[:32, 64])

    def test_block_size_precondition(self, rng):
        with pytest.raises(ValueError):
            tile_blocks(random_luma(rng, 8, 8), 2)

    def test_reassembly_reproduces_plane(self, rng):
        plane = random_luma(rng, 37, 53)
        w = 16
        blocks = tile_blocks(plane, w)
        nbx = -(-53 // w)
        rebuilt = np.zeros((48, 64), dtype=plane.dtype)
        for k, block in enumerate(blocks):
            by, bx = divmod(k, nbx)
            rebuilt[by * w : (by + 1) * w, bx * w : (bx + 1) * w] = block
        assert np.array_equal(rebuilt[:37, :53], plane)

    @given(
        h=st.integers(min_value=5, max_value=90),
        w=st.integers(min_value=5, max_value=90),
        block=st.integers(min_value=4, max_value=40),
    )
    @settings(max_examples=60, deadline=None)
    def test_block_count_formula(self, h, w, block):
        plane = np.zeros((h, w), dtype=np.uint8)
        blocks = tile_blocks(plane, block)
        assert len(blocks) == -(-h // block) * -(-w // block)


class TestCropPatches:
    def test_full_hd_patch_count(self):
        plane = np.zeros((1080, 1920), dtype=np.uint8)
        assert len(crop_patches(plane, 64)) == 480  # 30 x 16

    def test_single_patch_equals_plane(self, rng):
        plane = random_luma(rng, 64, 64)
        patches = crop_patches(plane, 64)
        assert len(patches) == 1
        assert np.array_equal(patches[0], plane)

    def test_pixels_map_to_source_coordinates(self, rng):
        plane = random_luma(rng, 21, 34)
        q = 8
        patches = crop_patches(plane, q)
        nx = 34 // q
        for k, patch in enumerate(patches):
            py, px = divmod(k, nx)
            assert np.array_equal(
                patch, plane[py * q : (py + 1) * q, px * q : (px + 1) * q]
            )

    def test_plane_smaller_than_patch(self, rng):
        with pytest.raises(ValueError, match="smaller"):
            crop_patches(random_luma(rng, 16, 63), 64)

    @given(
        h=st.integers(min_value=8, max_value=75),
        w=st.integers(min_value=8, max_value=75),
        q=st.integers(min_value=2, max_value=8),
    )
    @settings(max_examples=60, deadline=None)
    def test_patch_count_formula(self, h, w, q):
        patches = crop_patches(np.zeros((h, w), dtype=np.uint8), q)
        assert len(patches) == (h // q) * (w // q)


def test_chroma_shapes():
    assert chroma_plane_shape(64, 48, "420") == (24, 32)
    assert chroma_plane_shape(64, 48, "422") == (48, 32)
    assert chroma_plane_shape(64, 48, "444") == (48, 64)
