"""Raw video ingestion: Y4M and headerless planar YUV, plus block/patch cutting.

Decoded frames are immutable numpy planes in the native integer range
(10-bit stays 10-bit). Only YUV4MPEG2 and raw planar YUV with sidecar
metadata are supported; compressed bitstreams are out of scope.
"""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import IngestError, SchemaError

Y4M_MAGIC = b"YUV4MPEG2"

CHROMA_FORMATS = ("420", "422", "444")

# Y4M colorspace tag -> (chroma_format, bit_depth)
_CTAG_MAP = {
    b"420": ("420", 8),
    b"420jpeg": ("420", 8),
    b"420mpeg2": ("420", 8),
    b"420paldv": ("420", 8),
    b"422": ("422", 8),
    b"444": ("444", 8),
    b"420p10": ("420", 10),
    b"422p10": ("422", 10),
    b"444p10": ("444", 10),
}


def chroma_plane_shape(width: int, height: int, chroma_format: str) -> tuple[int, int]:
    """(height, width) of one chroma plane for the given subsampling."""
    if chroma_format == "420":
        return (height + 1) // 2, (width + 1) // 2
    if chroma_format == "422":
        return height, (width + 1) // 2
    if chroma_format == "444":
        return height, width
    raise ValueError(f"unsupported chroma format {chroma_format!r}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PlanarFrame:
    """One decoded frame: Y/U/V planes in native integer range."""

    width: int
    height: int
    bit_depth: int
    chroma_format: str
    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.bit_depth not in (8, 10):
            raise ValueError(f"bit depth must be 8 or 10, got {self.bit_depth}")
        if self.chroma_format not in CHROMA_FORMATS:
            raise ValueError(f"unsupported chroma format {self.chroma_format!r}")
        if self.y.shape != (self.height, self.width):
            raise ValueError(
                f"Y plane shape {self.y.shape} != {(self.height, self.width)}"
            )
        cshape = chroma_plane_shape(self.width, self.height, self.chroma_format)
        for name, plane in (("U", self.u), ("V", self.v)):
            if plane.shape != cshape:
                raise ValueError(f"{name} plane shape {plane.shape} != {cshape}")
        limit = 1 << self.bit_depth
        for plane in (self.y, self.u, self.v):
            if plane.size and int(plane.max()) >= limit:
                raise ValueError(f"sample value out of {self.bit_depth}-bit range")
        for attr in ("y", "u", "v"):
            object.__setattr__(self, attr, _freeze(getattr(self, attr)))

    @property
    def planes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.y, self.u, self.v


@dataclass
class SceneClip:
    """One scene: an ordered run of frames sharing geometry and format."""

    scene_id: str
    fps_num: int
    fps_den: int
    frames: list[PlanarFrame]
    # raw Y4M header/frame parameter strings, kept for byte-exact rewrite
    y4m_header_params: str | None = None
    y4m_frame_params: list[str] | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.frames:
            raise ValueError("a scene clip needs at least one frame")
        if self.fps_num <= 0 or self.fps_den <= 0:
            raise ValueError("framerate must be positive")
        first = self.frames[0]
        for f in self.frames[1:]:
            if (
                f.width != first.width
                or f.height != first.height
                or f.bit_depth != first.bit_depth
                or f.chroma_format != first.chroma_format
            ):
                raise ValueError("all frames in a scene must share format")

    @property
    def framerate(self) -> float:
        return self.fps_num / self.fps_den

    @property
    def frame_count(self) -> int:
        return len(self.frames)


def _frame_byte_size(width, height, chroma_format, bit_depth):
    ch, cw = chroma_plane_shape(width, height, chroma_format)
    bps = 1 if bit_depth == 8 else 2
    return (width * height + 2 * ch * cw) * bps


def _decode_frame(payload, width, height, chroma_format, bit_depth):
    dtype = np.uint8 if bit_depth == 8 else np.dtype("<u2")
    ch, cw = chroma_plane_shape(width, height, chroma_format)
    ysize = width * height
    csize = ch * cw
    arr = np.frombuffer(payload, dtype=dtype)
    y = arr[:ysize].reshape(height, width)
    u = arr[ysize : ysize + csize].reshape(ch, cw)
    v = arr[ysize + csize :].reshape(ch, cw)
    return PlanarFrame(width, height, bit_depth, chroma_format, y, u, v)


def parse_y4m(data: bytes, scene_id: str = "scene") -> SceneClip:
    """Decode a YUV4MPEG2 byte stream into a SceneClip.

    Raises IngestError (with byte offset) on malformed headers, unsupported
    colorspace tags or truncated frame payloads.
    """
    if not data.startswith(Y4M_MAGIC):
        raise IngestError("not a YUV4MPEG2 stream", offset=0)
    nl = data.find(b"\n")
    if nl < 0:
        raise IngestError("unterminated stream header", offset=len(data))

    header = data[len(Y4M_MAGIC) : nl]
    width = height = None
    fps_num, fps_den = None, None
    chroma_format, bit_depth = "420", 8
    pos = len(Y4M_MAGIC)
    for token in header.split(b" "):
        if not token:
            pos += 1
            continue
        tag, val = token[:1], token[1:]
        try:
            if tag == b"W":
                width = int(val)
            elif tag == b"H":
                height = int(val)
            elif tag == b"F":
                num, den = val.split(b":")
                fps_num, fps_den = int(num), int(den)
            elif tag == b"C":
                if val not in _CTAG_MAP:
                    raise IngestError(
                        f"unsupported colorspace tag C{val.decode('ascii', 'replace')}",
                        offset=pos,
                    )
                chroma_format, bit_depth = _CTAG_MAP[val]
            # I (interlace), A (aspect) and X (extension) tags are carried
            # through verbatim via y4m_header_params
        except (ValueError, IndexError) as exc:
            raise IngestError(f"malformed header token {token!r}: {exc}", offset=pos)
        pos += len(token) + 1
    if width is None or height is None:
        raise IngestError("header is missing W or H", offset=len(Y4M_MAGIC))
    if width <= 0 or height <= 0:
        raise IngestError("non-positive frame dimensions", offset=len(Y4M_MAGIC))
    if fps_num is None:
        raise IngestError("header is missing the F framerate tag", offset=len(Y4M_MAGIC))

    frame_size = _frame_byte_size(width, height, chroma_format, bit_depth)
    frames: list[PlanarFrame] = []
    frame_params: list[str] = []
    pos = nl + 1
    while pos < len(data):
        if not data.startswith(b"FRAME", pos):
            raise IngestError("expected FRAME marker", offset=pos)
        fnl = data.find(b"\n", pos)
        if fnl < 0:
            raise IngestError("unterminated FRAME header", offset=pos)
        frame_params.append(data[pos + 5 : fnl].decode("ascii", "replace"))
        start = fnl + 1
        end = start + frame_size
        if end > len(data):
            raise IngestError(
                f"truncated frame {len(frames)}: expected {frame_size} bytes, "
                f"got {len(data) - start}",
                offset=start,
            )
        frames.append(
            _decode_frame(data[start:end], width, height, chroma_format, bit_depth)
        )
        pos = end
    if not frames:
        raise IngestError("stream contains no frames", offset=nl + 1)

    return SceneClip(
        scene_id=scene_id,
        fps_num=fps_num,
        fps_den=fps_den,
        frames=frames,
        y4m_header_params=header.decode("ascii", "replace"),
        y4m_frame_params=frame_params,
    )


def _canonical_ctag(chroma_format: str, bit_depth: int) -> str:
    return chroma_format if bit_depth == 8 else f"{chroma_format}p10"


def write_y4m(clip: SceneClip) -> bytes:
    """Serialize a clip back to Y4M; parse -> write round-trips byte-exactly."""
    first = clip.frames[0]
    if clip.y4m_header_params is not None:
        header = Y4M_MAGIC + clip.y4m_header_params.encode("ascii")
    else:
        header = Y4M_MAGIC + (
            f" W{first.width} H{first.height} F{clip.fps_num}:{clip.fps_den}"
            f" C{_canonical_ctag(first.chroma_format, first.bit_depth)}"
        ).encode("ascii")
    out = bytearray(header + b"\n")
    params = clip.y4m_frame_params or [""] * len(clip.frames)
    for frame, par in zip(clip.frames, params):
        out += b"FRAME" + par.encode("ascii") + b"\n"
        for plane in frame.planes:
            out += plane.tobytes()
    return bytes(out)


def parse_raw_yuv(
    data: bytes,
    *,
    width: int,
    height: int,
    bit_depth: int = 8,
    chroma_format: str = "420",
    fps_num: int = 30,
    fps_den: int = 1,
    scene_id: str = "scene",
) -> SceneClip:
    """Decode headerless planar YUV; stream length must be a whole number of frames."""
    if len(data) == 0:
        raise IngestError("empty input stream", offset=0)
    frame_size = _frame_byte_size(width, height, chroma_format, bit_depth)
    n, rem = divmod(len(data), frame_size)
    if rem:
        raise IngestError(
            f"stream size {len(data)} is not a multiple of the "
            f"{frame_size}-byte frame size ({rem} trailing bytes)",
            offset=n * frame_size,
        )
    frames = [
        _decode_frame(
            data[k * frame_size : (k + 1) * frame_size],
            width,
            height,
            chroma_format,
            bit_depth,
        )
        for k in range(n)
    ]
    return SceneClip(scene_id, fps_num, fps_den, frames)


def write_raw_yuv(clip: SceneClip) -> bytes:
    out = bytearray()
    for frame in clip.frames:
        for plane in frame.planes:
            out += plane.tobytes()
    return bytes(out)


def load_sidecar_metadata(text: str) -> dict:
    """Parse the sidecar JSON for raw YUV input.

    Schema: width, height, bit_depth, chroma, fps (number or [num, den]),
    scene_id.
    """
    try:
        meta = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"sidecar metadata is not valid JSON: {exc}")
    for key in ("width", "height", "bit_depth", "chroma", "fps", "scene_id"):
        if key not in meta:
            raise SchemaError(f"sidecar metadata is missing {key!r}")
    fps = meta["fps"]
    if isinstance(fps, (list, tuple)):
        if len(fps) != 2:
            raise SchemaError("fps must be a number or a [num, den] pair")
        num, den = int(fps[0]), int(fps[1])
    else:
        frac = Fraction(str(fps))
        num, den = frac.numerator, frac.denominator
    return {
        "width": int(meta["width"]),
        "height": int(meta["height"]),
        "bit_depth": int(meta["bit_depth"]),
        "chroma_format": str(meta["chroma"]),
        "fps_num": num,
        "fps_den": den,
        "scene_id": str(meta["scene_id"]),
    }


def tile_blocks(plane: np.ndarray, block_size: int) -> np.ndarray:
    """Cut a plane into block_size x block_size tiles, edge-padding partials.

    Blocks run left-to-right, top-to-bottom; the count is
    ceil(W/w) * ceil(H/w). Returns an (n, w, w) array.
    """
    if block_size < 4:
        raise ValueError(f"block size must be >= 4, got {block_size}")
    h, w = plane.shape
    nby = math.ceil(h / block_size)
    nbx = math.ceil(w / block_size)
    padded = np.pad(
        plane, ((0, nby * block_size - h), (0, nbx * block_size - w)), mode="edge"
    )
    return (
        padded.reshape(nby, block_size, nbx, block_size)
        .swapaxes(1, 2)
        .reshape(-1, block_size, block_size)
    )


def crop_patches(plane: np.ndarray, patch_size: int) -> np.ndarray:
    """Cut a plane into non-overlapping patches, discarding partial remainders.

    Remainders are dropped rather than padded so no synthetic texture enters
    the co-occurrence statistics. Returns an (n, Q, Q) array.
    """
    if patch_size < 2:
        raise ValueError(f"patch size must be >= 2, got {patch_size}")
    h, w = plane.shape
    ny, nx = h // patch_size, w // patch_size
    if ny == 0 or nx == 0:
        raise ValueError(
            f"plane {w}x{h} is smaller than one {patch_size}x{patch_size} patch"
        )
    trimmed = plane[: ny * patch_size, : nx * patch_size]
    return (
        trimmed.reshape(ny, patch_size, nx, patch_size)
        .swapaxes(1, 2)
        .reshape(-1, patch_size, patch_size)
    )
