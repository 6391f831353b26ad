"""Binary coefficient cache: magic "MSSC", little-endian, CRC-checked.

Layout: magic(4) | u32 version=1 | u32 n | u64 M | u8 self_dual |
M float64 values (m = 1..M) | u32 CRC32.  The CRC covers everything between
the magic and the CRC itself (header fields and values).  The form identity
is carried by the file name (hash of the FormSpec), not by the payload.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import CorruptCache
from .satake import HeckeTable

MAGIC = b"MSSC"
VERSION = 1
_HEADER = struct.Struct("<IIQB")


def table_cache_path(cache_dir, form) -> Path:
    return Path(cache_dir) / f"{form.identity_hash()}.mssc"


def write_table_cache(path, table: HeckeTable) -> str:
    """Write the cache file; returns the CRC32 as 8 hex digits."""
    if not table.self_dual:
        raise ValueError("cache format stores self-dual (real) tables only")
    header = _HEADER.pack(VERSION, table.form.n, table.M, 1 if table.self_dual else 0)
    body = np.ascontiguousarray(table.values[1:], dtype="<f8").tobytes()
    crc = zlib.crc32(header + body) & 0xFFFFFFFF
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header)
        fh.write(body)
        fh.write(struct.pack("<I", crc))
    return f"{crc:08x}"


def read_table_cache(path):
    """Validate magic/version/CRC and return (n, M, self_dual, values, crc_hex).

    ``values`` has length M+1 with the zero slot unused.  Raises CorruptCache
    on any validation failure (including truncation).
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CorruptCache(f"unreadable cache {path}: {exc}") from exc
    if len(raw) < len(MAGIC) + _HEADER.size + 4:
        raise CorruptCache(f"truncated cache {path}")
    if raw[: len(MAGIC)] != MAGIC:
        raise CorruptCache(f"bad magic in {path}")
    header = raw[len(MAGIC) : len(MAGIC) + _HEADER.size]
    version, n, M, flag = _HEADER.unpack(header)
    if version != VERSION:
        raise CorruptCache(f"unsupported cache version {version} in {path}")
    expect = len(MAGIC) + _HEADER.size + 8 * M + 4
    if len(raw) != expect:
        raise CorruptCache(f"cache {path} has {len(raw)} bytes, expected {expect}")
    body = raw[len(MAGIC) + _HEADER.size : -4]
    (crc_stored,) = struct.unpack("<I", raw[-4:])
    crc = zlib.crc32(header + body) & 0xFFFFFFFF
    if crc != crc_stored:
        raise CorruptCache(f"CRC mismatch in {path}")
    values = np.empty(M + 1, dtype=np.float64)
    values[0] = 0.0
    values[1:] = np.frombuffer(body, dtype="<f8")
    return n, M, bool(flag), values, f"{crc:08x}"
