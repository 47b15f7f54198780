import numpy as np
import pytest

from jndladder.ingest import PlanarFrame, SceneClip, chroma_plane_shape


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_frame(y, bit_depth=8, chroma="420", u=None, v=None) -> PlanarFrame:
    """Frame from a luma array; chroma planes default to mid-gray."""
    y = np.asarray(y)
    h, w = y.shape
    ch, cw = chroma_plane_shape(w, h, chroma)
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    mid = 1 << (bit_depth - 1)
    if u is None:
        u = np.full((ch, cw), mid, dtype=dtype)
    if v is None:
        v = np.full((ch, cw), mid, dtype=dtype)
    return PlanarFrame(
        width=w,
        height=h,
        bit_depth=bit_depth,
        chroma_format=chroma,
        y=y.astype(dtype),
        u=np.asarray(u, dtype=dtype),
        v=np.asarray(v, dtype=dtype),
    )


def make_clip(lumas, bit_depth=8, chroma="420", fps=(30, 1), scene_id="test") -> SceneClip:
    frames = [make_frame(y, bit_depth=bit_depth, chroma=chroma) for y in lumas]
    return SceneClip(
        scene_id=scene_id, fps_num=fps[0], fps_den=fps[1], frames=frames
    )


def random_luma(rng, h, w, bit_depth=8):
    return rng.integers(0, 1 << bit_depth, size=(h, w)).astype(
        np.uint8 if bit_depth == 8 else np.uint16
    )


def y4m_stream(frames_planes, width, height, fps=(30, 1), ctag="420", extra=""):
    """Assemble a Y4M byte stream from raw plane arrays."""
    header = f"YUV4MPEG2 W{width} H{height} F{fps[0]}:{fps[1]} C{ctag}{extra}\n"
    out = bytearray(header.encode())
    for planes in frames_planes:
        out += b"FRAME\n"
        for plane in planes:
            out += np.asarray(plane).tobytes()
    return bytes(out)


class StubModel:
    """Predictor stub: constant value or a callable on the input vector."""

    feature_names = None

    def __init__(self, fn):
        self._fn = fn if callable(fn) else (lambda x, v=fn: v)

    def predict(self, x):
        return float(self._fn(np.asarray(x, dtype=np.float64)))
