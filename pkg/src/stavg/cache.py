"""Binary cache files.

Layout (all little-endian):

    b"STAV"  version:u8  kind:u8  count:u64  records...  fnv1a64:u64

The checksum covers every byte before it. Record layouts per kind:

    primes        p:u64 logp:f64
    class numbers p:u64 r:i64 H:u64
    traces        p:u64 a:i64 b:i64 lambda:i64
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import IntegrityError
from .numthy import PrimeTable
from .quadforms import ClassNumberTable, reduced_form_count

MAGIC = b"STAV"
VERSION = 1
KIND_PRIMES = 1
KIND_CLASS_NUMBERS = 2
KIND_TRACES = 3

RECORD_TYPES = {
    KIND_PRIMES: np.dtype([("p", "<u8"), ("logp", "<f8")]),
    KIND_CLASS_NUMBERS: np.dtype([("p", "<u8"), ("r", "<i8"), ("H", "<u8")]),
    KIND_TRACES: np.dtype([("p", "<u8"), ("a", "<i8"), ("b", "<i8"), ("lam", "<i8")]),
}
_HEADER = struct.Struct("<4sBBQ")
_CHECKSUM = struct.Struct("<Q")


def checksum(data: bytes) -> int:
    return int(_kernels.fnv1a64(np.frombuffer(data, dtype=np.uint8)))


def encode(kind: int, records: np.ndarray) -> bytes:
    dtype = RECORD_TYPES[kind]
    body = _HEADER.pack(MAGIC, VERSION, kind, len(records)) + records.astype(dtype).tobytes()
    return body + _CHECKSUM.pack(checksum(body))


def decode(data: bytes, kind: int, verify: bool = True) -> np.ndarray:
    """Parse a cache image; structural problems and bad checksums raise IntegrityError."""
    if len(data) < _HEADER.size + _CHECKSUM.size:
        raise IntegrityError("cache file truncated")
    magic, version, got_kind, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise IntegrityError("bad magic")
    if version != VERSION:
        raise IntegrityError(f"unsupported cache version {version}")
    if got_kind != kind:
        raise IntegrityError(f"cache holds kind {got_kind}, expected {kind}")
    dtype = RECORD_TYPES[kind]
    size = _HEADER.size + count * dtype.itemsize
    if len(data) != size + _CHECKSUM.size:
        raise IntegrityError(f"record count {count} does not match payload length")
    records = np.frombuffer(data, dtype=dtype, count=count, offset=_HEADER.size).copy()
    if verify:
        (stored,) = _CHECKSUM.unpack_from(data, size)
        if stored != checksum(data[:size]):
            raise IntegrityError(_checksum_message(kind, records))
    return records


def _checksum_message(kind: int, records: np.ndarray) -> str:
    msg = "checksum mismatch"
    if kind == KIND_CLASS_NUMBERS:
        # name the first record that no longer matches a recomputation
        for p, r, h in records.tolist():
            if reduced_form_count(r * r - 4 * p) != h:
                return f"{msg} at p={p} r={r}"
    return msg


def write(path: str | os.PathLike, kind: int, records: np.ndarray) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(encode(kind, records))
    os.replace(tmp, path)


def read(path: str | os.PathLike, kind: int) -> np.ndarray:
    return decode(Path(path).read_bytes(), kind)


# ---------------------------------------------------------------------------
# Table adapters
# ---------------------------------------------------------------------------

def primes_to_records(table: PrimeTable) -> np.ndarray:
    rec = np.empty(len(table), dtype=RECORD_TYPES[KIND_PRIMES])
    rec["p"] = table.primes
    rec["logp"] = table.logp
    return rec


def primes_from_records(rec: np.ndarray, limit: int | None = None) -> PrimeTable:
    primes = rec["p"].astype(np.int64)
    lim = limit if limit is not None else (int(primes[-1]) if len(primes) else 1)
    return PrimeTable(lim, primes, rec["logp"].astype(np.float64))


def class_numbers_to_records(table: ClassNumberTable) -> np.ndarray:
    entries = np.array(list(table.entries()), dtype=np.int64).reshape(-1, 3)
    rec = np.empty(len(entries), dtype=RECORD_TYPES[KIND_CLASS_NUMBERS])
    rec["p"], rec["r"], rec["H"] = entries[:, 0], entries[:, 1], entries[:, 2]
    return rec


def class_numbers_from_records(rec: np.ndarray, limit: int | None = None) -> ClassNumberTable:
    entries = zip(rec["p"].tolist(), rec["r"].tolist(), rec["H"].tolist())
    lim = limit if limit is not None else (int(rec["p"][-1]) if len(rec) else 1)
    return ClassNumberTable.from_entries(lim, entries)


def traces_to_records(p: int, lam: np.ndarray, good: np.ndarray) -> np.ndarray:
    a, b = np.nonzero(good)
    rec = np.empty(len(a), dtype=RECORD_TYPES[KIND_TRACES])
    rec["p"], rec["a"], rec["b"], rec["lam"] = p, a, b, lam[a, b]
    return rec


def class_number_path(cache_dir: str | os.PathLike, x: int) -> Path:
    return Path(cache_dir) / f"classno_{int(x)}.stav"


def load_or_build_class_numbers(cache_dir: str | os.PathLike | None, x: int, build) -> ClassNumberTable:
    """Read the cached table for limit x, or build it with ``build(x)`` and store it."""
    if cache_dir is None:
        return build(x)
    path = class_number_path(cache_dir, x)
    if path.exists():
        return class_numbers_from_records(read(path, KIND_CLASS_NUMBERS), x)
    table = build(x)
    path.parent.mkdir(parents=True, exist_ok=True)
    write(path, KIND_CLASS_NUMBERS, class_numbers_to_records(table))
    return table
