"""Flat binary container for named float64 tensors.

Layout (all integers little-endian):

    magic   8 bytes  b"RNNTNSR\\0"
    version u32      currently 1
    count   u32      number of tensors
    per tensor:
        name_len u16, name bytes (UTF-8)
        ndim     u8, dims u32 * ndim
        payload  float64 little-endian, C order

Round-trips are bit-exact, which is what lets trained models be
reloaded and replayed deterministically.
"""

import struct

import numpy as np

from .errors import ParseError

MAGIC = b"RNNTNSR\x00"
VERSION = 1


def save_tensors(path, tensors: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, len(tensors)))
        for name, arr in tensors.items():
            arr = np.ascontiguousarray(arr, dtype=np.float64)
            encoded = name.encode("utf-8")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<B", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(arr.astype("<f8", copy=False).tobytes())


def load_tensors(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as f:
        data = f.read()
    if data[:8] != MAGIC:
        raise ParseError("bad magic bytes", offset=0)
    if len(data) < 16:
        raise ParseError("truncated header", offset=len(data))
    version, count = struct.unpack_from("<II", data, 8)
    if version != VERSION:
        raise ParseError(f"unsupported container version {version}", offset=8)
    pos = 16
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        try:
            (name_len,) = struct.unpack_from("<H", data, pos)
            pos += 2
            name = data[pos:pos + name_len].decode("utf-8")
            pos += name_len
            (ndim,) = struct.unpack_from("<B", data, pos)
            pos += 1
            shape = struct.unpack_from(f"<{ndim}I", data, pos)
            pos += 4 * ndim
            n = int(np.prod(shape)) if ndim else 1
            end = pos + 8 * n
            if end > len(data):
                raise ParseError("truncated tensor payload", offset=pos)
            arr = np.frombuffer(data, dtype="<f8", count=n, offset=pos)
            out[name] = arr.reshape(shape).astype(np.float64)
            pos = end
        except struct.error:
            raise ParseError("truncated tensor header", offset=pos) from None
    if pos != len(data):
        raise ParseError("trailing bytes after last tensor", offset=pos)
    return out
