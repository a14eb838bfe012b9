"""Named-tensor checkpoint file format.

Layout (all integers little-endian):
  header:  magic b"CGCK" | u32 version | u32 tensor count
  record:  u32 name length | name UTF-8 | u32 rank | u32 extents[rank]
           | float32 payload (row-major)

Payloads are always stored as float32 regardless of the in-memory precision.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ArtifactError

MAGIC = b"CGCK"
VERSION = 1


def save_checkpoint(path: str | Path, tensors: dict[str, np.ndarray]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, len(tensors)))
        for name, arr in tensors.items():
            raw = name.encode("utf-8")
            a = np.ascontiguousarray(arr, dtype="<f4")
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)
            f.write(struct.pack("<I", a.ndim))
            f.write(struct.pack(f"<{a.ndim}I", *a.shape))
            f.write(a.tobytes())


def load_checkpoint(path: str | Path) -> dict[str, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise ArtifactError(f"checkpoint not found: {path}")
    blob = path.read_bytes()
    if blob[:4] != MAGIC:
        raise ArtifactError(f"not a checkpoint file: {path}")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise ArtifactError(f"unsupported checkpoint version {version} in {path}")
    out: dict[str, np.ndarray] = {}
    off = 12
    for _ in range(count):
        (nlen,) = struct.unpack_from("<I", blob, off)
        off += 4
        name = blob[off:off + nlen].decode("utf-8")
        off += nlen
        (rank,) = struct.unpack_from("<I", blob, off)
        off += 4
        shape = struct.unpack_from(f"<{rank}I", blob, off)
        off += 4 * rank
        n = int(np.prod(shape)) if rank else 1
        arr = np.frombuffer(blob, dtype="<f4", count=n, offset=off).reshape(shape)
        off += 4 * n
        out[name] = np.array(arr)  # own the memory
    if off != len(blob):
        raise ArtifactError(f"trailing bytes in checkpoint: {path}")
    return out
