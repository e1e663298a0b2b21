"""Single-file keyed tensor archive.

Layout (all integers little-endian):

    magic: 4 bytes ("AINN" for translation, "SSDC" for detector)
    version: u16
    metadata count: u32, then per entry: key length u32, UTF-8 key,
        value length u32, UTF-8 value
    tensor count: u32, then per tensor: name length u32, UTF-8 name,
        rank u32, dims u32 x rank, float32 data

Round trips are bit-exact.
"""

import struct

import numpy as np

from .errors import (
    CheckpointFormatError,
    CheckpointTruncatedError,
    CheckpointVersionError,
)

FORMAT_VERSION = 1
TRANSLATION_MAGIC = b"AINN"
DETECTOR_MAGIC = b"SSDC"


def write_archive(path, magic, metadata, tensors):
    """Write string metadata and named float32 tensors to ``path``."""
    if len(magic) != 4:
        raise ValueError("magic must be 4 bytes")
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(metadata)))
        for key, value in metadata.items():
            _write_str(fh, key)
            _write_str(fh, str(value))
        fh.write(struct.pack("<I", len(tensors)))
        for name, tensor in tensors.items():
            arr = np.ascontiguousarray(tensor, dtype=np.float32)
            _write_str(fh, name)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.astype("<f4").tobytes())


def read_archive(path, expected_magic):
    """Read back ``(metadata, tensors)``; validates magic and version."""
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4)
        if magic != expected_magic:
            raise CheckpointFormatError(
                f"{path}: bad magic {magic!r}, expected {expected_magic!r}"
            )
        (version,) = struct.unpack("<H", _read_exact(fh, 2))
        if version != FORMAT_VERSION:
            raise CheckpointVersionError(
                f"{path}: unsupported format version {version}"
            )
        (n_meta,) = struct.unpack("<I", _read_exact(fh, 4))
        metadata = {}
        for _ in range(n_meta):
            key = _read_str(fh)
            metadata[key] = _read_str(fh)
        (n_tensors,) = struct.unpack("<I", _read_exact(fh, 4))
        tensors = {}
        for _ in range(n_tensors):
            name = _read_str(fh)
            (rank,) = struct.unpack("<I", _read_exact(fh, 4))
            dims = struct.unpack(f"<{rank}I", _read_exact(fh, 4 * rank))
            count = int(np.prod(dims, dtype=np.int64)) if rank else 1
            data = _read_exact(fh, 4 * count)
            tensors[name] = np.frombuffer(data, dtype="<f4").reshape(dims).copy()
        return metadata, tensors


def _write_str(fh, text):
    raw = text.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_str(fh):
    (length,) = struct.unpack("<I", _read_exact(fh, 4))
    return _read_exact(fh, length).decode("utf-8")


def _read_exact(fh, count):
    data = fh.read(count)
    if len(data) != count:
        raise CheckpointTruncatedError(
            f"{fh.name}: expected {count} bytes, got {len(data)}"
        )
    return data
