"""Little-endian binary file helpers shared by the index/embedding/checkpoint formats."""

from __future__ import annotations

import json
import struct
from typing import BinaryIO, List

import numpy as np

from .errors import CheckpointError


def write_u32(f: BinaryIO, value: int) -> None:
    f.write(struct.pack("<I", value))


def read_u32(f: BinaryIO) -> int:
    return struct.unpack("<I", f.read(4))[0]


def write_u64(f: BinaryIO, value: int) -> None:
    f.write(struct.pack("<Q", value))


def read_u64(f: BinaryIO) -> int:
    return struct.unpack("<Q", f.read(8))[0]


def write_f64(f: BinaryIO, value: float) -> None:
    f.write(struct.pack("<d", value))


def read_f64(f: BinaryIO) -> float:
    return struct.unpack("<d", f.read(8))[0]


def write_str(f: BinaryIO, s: str) -> None:
    data = s.encode("utf-8")
    write_u32(f, len(data))
    f.write(data)


def read_str(f: BinaryIO) -> str:
    n = read_u32(f)
    return f.read(n).decode("utf-8")


def write_json_block(f: BinaryIO, obj) -> None:
    data = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    write_u32(f, len(data))
    f.write(data)


def read_json_block(f: BinaryIO):
    n = read_u32(f)
    return json.loads(f.read(n).decode("utf-8"))


def write_array(f: BinaryIO, arr: np.ndarray, dtype: str) -> None:
    arr = np.ascontiguousarray(arr, dtype=np.dtype(dtype).newbyteorder("<"))
    write_u32(f, arr.ndim)
    for dim in arr.shape:
        write_u64(f, dim)
    f.write(arr.tobytes())


def read_array(f: BinaryIO, dtype: str) -> np.ndarray:
    ndim = read_u32(f)
    shape = tuple(read_u64(f) for _ in range(ndim))
    dt = np.dtype(dtype).newbyteorder("<")
    count = int(np.prod(shape)) if shape else 1
    data = f.read(count * dt.itemsize)
    if len(data) != count * dt.itemsize:
        raise CheckpointError("truncated array block")
    return np.frombuffer(data, dtype=dt).reshape(shape).astype(dtype)


def expect_magic(f: BinaryIO, magic: bytes, kind: str) -> None:
    got = f.read(len(magic))
    if got != magic:
        raise CheckpointError(f"not a {kind} file (bad magic {got!r})")


def write_str_list(f: BinaryIO, items: List[str]) -> None:
    write_u32(f, len(items))
    for s in items:
        write_str(f, s)


def read_str_list(f: BinaryIO) -> List[str]:
    n = read_u32(f)
    return [read_str(f) for _ in range(n)]
