"""RVOX map-set files: every map for one crane, in a fixed little-endian layout.

    magic "RVOX" | u16 version=1 | u16 rotationCount | u16 heightCount
    | f64 rotationStepDeg | f64 heightStep
    then per config, row-major (rot outer, height inner):
    f64*3 grid origin | f64 cellSize | u32*3 dims | u32 voxelCount
    | voxelCount * (i32 i, i32 j, i32 k, u8 status)

Status bytes: 0 = Blocked, 1 = Reachable. Writes are deterministic (voxels
sorted by coordinate), so identical inputs give identical bytes.
"""

from __future__ import annotations

import math
import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from .reachability import ReachabilityMap, Status, VoxelGrid
from .scenario import CraneSpec, WorkpieceConfig

MAGIC = b"RVOX"
VERSION = 1

_VOXEL_DTYPE = np.dtype([("i", "<i4"), ("j", "<i4"), ("k", "<i4"), ("s", "u1")])
assert _VOXEL_DTYPE.itemsize == 13


class MapSetParseError(ValueError):
    def __init__(self, offset: int, message: str):
        self.offset = offset
        super().__init__(f"parse error at byte {offset}: {message}")


def write_map_set(path, crane: CraneSpec, maps: Mapping[WorkpieceConfig, ReachabilityMap]) -> int:
    """Serialize the full config->map set; returns the byte count written."""
    expected = {cfg for cfg in crane.configs()}
    got = set(maps.keys())
    if got != expected:
        missing = sorted((c.rot_index, c.height_index) for c in expected - got)
        extra = sorted((c.rot_index, c.height_index) for c in got - expected)
        raise ValueError(f"maps do not cover the crane configs exactly (missing {missing}, extra {extra})")

    out = bytearray()
    out += MAGIC
    out += struct.pack("<HHH", VERSION, crane.rotation_count, crane.height_count)
    out += struct.pack("<dd", crane.rotation_step_deg, crane.height_step)

    for rot in range(crane.rotation_count):
        for height in range(crane.height_count):
            rmap = maps[WorkpieceConfig(rot, height)]
            g = rmap.grid
            out += struct.pack("<dddd", g.origin[0], g.origin[1], g.origin[2], g.cell_size)
            out += struct.pack("<IIII", g.dims[0], g.dims[1], g.dims[2], len(rmap.status))
            if rmap.status:
                rec = np.empty(len(rmap.status), dtype=_VOXEL_DTYPE)
                for n, (coord, status) in enumerate(sorted(rmap.status.items())):
                    rec[n] = (coord[0], coord[1], coord[2], int(status))
                out += rec.tobytes()

    data = bytes(out)
    Path(path).write_bytes(data)
    return len(data)


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, fmt: str, what: str):
        size = struct.calcsize(fmt)
        if self.offset + size > len(self.data):
            raise MapSetParseError(self.offset, f"truncated while reading {what}")
        vals = struct.unpack_from(fmt, self.data, self.offset)
        self.offset += size
        return vals

    def take_bytes(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.data):
            raise MapSetParseError(self.offset, f"truncated while reading {what}")
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk


def read_map_set(path) -> tuple[CraneSpec, dict[WorkpieceConfig, ReachabilityMap]]:
    """Inverse of write_map_set. Loaded maps carry meta=None (the file stores none)."""
    cur = _Cursor(Path(path).read_bytes())

    magic = cur.take_bytes(4, "magic")
    if magic != MAGIC:
        raise MapSetParseError(0, f"bad magic {magic!r}, expected {MAGIC!r}")
    (version,) = cur.take("<H", "version")
    if version != VERSION:
        raise MapSetParseError(4, f"unsupported version {version}, expected {VERSION}")
    rot_count, height_count = cur.take("<HH", "config counts")
    if rot_count < 1 or height_count < 1:
        raise MapSetParseError(6, f"config counts must be >= 1, got {rot_count}x{height_count}")
    step_offset = cur.offset
    (rot_step,) = cur.take("<d", "rotation step")
    (height_step,) = cur.take("<d", "height step")
    if not math.isfinite(rot_step) or abs(rot_step * rot_count - 360.0) > 1e-9:
        raise MapSetParseError(step_offset, f"rotation step {rot_step} * count {rot_count} != 360")
    if not math.isfinite(height_step):
        raise MapSetParseError(step_offset + 8, f"height step {height_step} is not finite")
    crane = CraneSpec(rot_step, rot_count, height_count, height_step)

    maps: dict[WorkpieceConfig, ReachabilityMap] = {}
    for rot in range(rot_count):
        for height in range(height_count):
            grid_offset = cur.offset
            ox, oy, oz, cell = cur.take("<dddd", f"grid header of config ({rot},{height})")
            if not all(math.isfinite(v) for v in (ox, oy, oz, cell)) or cell <= 0:
                raise MapSetParseError(grid_offset, f"invalid grid origin/cell for config ({rot},{height})")
            d0, d1, d2, count = cur.take("<IIII", f"dims of config ({rot},{height})")
            if min(d0, d1, d2) < 1:
                raise MapSetParseError(grid_offset + 32, f"grid dims {(d0, d1, d2)} must all be >= 1")
            rec_offset = cur.offset
            raw = cur.take_bytes(count * _VOXEL_DTYPE.itemsize, f"{count} voxel records of config ({rot},{height})")
            rec = np.frombuffer(raw, dtype=_VOXEL_DTYPE)
            status: dict[tuple[int, int, int], Status] = {}
            for n in range(count):
                i, j, k, s = int(rec["i"][n]), int(rec["j"][n]), int(rec["k"][n]), int(rec["s"][n])
                at = rec_offset + n * _VOXEL_DTYPE.itemsize
                if not (0 <= i < d0 and 0 <= j < d1 and 0 <= k < d2):
                    raise MapSetParseError(at, f"voxel ({i},{j},{k}) outside dims {(d0, d1, d2)}")
                if s not in (0, 1):
                    raise MapSetParseError(at + 12, f"voxel status byte {s} not in {{0, 1}}")
                if (i, j, k) in status:
                    raise MapSetParseError(at, f"duplicate voxel ({i},{j},{k})")
                status[(i, j, k)] = Status(s)
            grid = VoxelGrid(np.array([ox, oy, oz]), cell, (d0, d1, d2))
            maps[WorkpieceConfig(rot, height)] = ReachabilityMap(grid, status, meta=None)

    if cur.offset != len(cur.data):
        raise MapSetParseError(cur.offset, f"{len(cur.data) - cur.offset} unconsumed trailing byte(s)")
    return crane, maps
