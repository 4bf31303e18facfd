"""On-disk store of sampled click histograms (one row per image).

Layout, all little-endian::

    magic      8 bytes   b"QORCFTR1"
    version    u32
    modes      u32
    photons    u32
    n_images   u32
    samples    u32       samples drawn per image
    noise      3 x f64   indistinguishability, g2, transmission
    seeds      2 x u64   unitary seed, sampling seed
    flags      u32       bit 0: pre-circuit unitary distinct from reservoir
    inputs     photons x u32   input modes
    digest     32 bytes  sha256 of the float64 phase matrix of the cached images
    rows       n_images x (C(M, N) + 1) u32: pattern counts, then discarded events

A file may hold fewer than ``n_images`` rows while sampling is in progress;
:func:`open_for_append` resumes after the last complete row.
"""

from __future__ import annotations

import hashlib
import math
import os
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import CacheIncompatibleError, ParseError

MAGIC = b"QORCFTR1"
VERSION = 1
_FIXED = struct.Struct("<8sIIIII3d2QI")


def phase_digest(phases: np.ndarray) -> bytes:
    return hashlib.sha256(np.ascontiguousarray(phases, dtype="<f8").tobytes()).digest()


@dataclass(frozen=True)
class CacheHeader:
    modes: int
    photons: int
    n_images: int
    samples_per_image: int
    indistinguishability: float
    g2: float
    transmission: float
    unitary_seed: int
    sampling_seed: int
    distinct_pre: bool
    input_modes: tuple
    digest: bytes

    @property
    def n_patterns(self) -> int:
        return math.comb(self.modes, self.photons)

    @property
    def row_bytes(self) -> int:
        return 4 * (self.n_patterns + 1)

    def pack(self) -> bytes:
        fixed = _FIXED.pack(
            MAGIC, VERSION, self.modes, self.photons, self.n_images, self.samples_per_image,
            self.indistinguishability, self.g2, self.transmission,
            self.unitary_seed, self.sampling_seed, int(self.distinct_pre),
        )
        inputs = struct.pack(f"<{self.photons}I", *self.input_modes)
        return fixed + inputs + self.digest

    @property
    def size(self) -> int:
        return _FIXED.size + 4 * self.photons + 32

    @classmethod
    def unpack(cls, raw: bytes, path="") -> CacheHeader:
        if len(raw) < _FIXED.size:
            raise ParseError(f"{path}: truncated cache header ({len(raw)} bytes)")
        magic, version, m, n, count, samples, ind, g2, tr, useed, sseed, flags = _FIXED.unpack_from(raw)
        if magic != MAGIC:
            raise ParseError(f"{path}: not a feature cache (magic {magic!r})")
        if version != VERSION:
            raise ParseError(f"{path}: unsupported cache version {version}")
        end = _FIXED.size + 4 * n + 32
        if len(raw) < end:
            raise ParseError(f"{path}: truncated cache header ({len(raw)} bytes, need {end})")
        inputs = struct.unpack_from(f"<{n}I", raw, _FIXED.size)
        digest = raw[_FIXED.size + 4 * n:end]
        return cls(m, n, count, samples, ind, g2, tr, useed, sseed, bool(flags & 1), tuple(inputs), digest)

    def differences(self, other: CacheHeader) -> dict:
        """Fields (other than the image count) that differ between two headers."""
        mine, theirs = asdict(self), asdict(other)
        return {k: (mine[k], theirs[k]) for k in mine if k != "n_images" and mine[k] != theirs[k]}


@dataclass
class FeatureCache:
    header: CacheHeader
    counts: np.ndarray  # (rows, n_patterns) uint32
    discarded: np.ndarray  # (rows,) uint32

    @property
    def complete(self) -> bool:
        return self.counts.shape[0] == self.header.n_images

    def check_compatible(self, expected: CacheHeader):
        diffs = self.header.differences(expected)
        if self.header.n_images != expected.n_images:
            diffs["n_images"] = (self.header.n_images, expected.n_images)
        if diffs:
            raise CacheIncompatibleError(diffs)


def read_cache(path, require_complete: bool = True) -> FeatureCache:
    raw = Path(path).read_bytes()
    header = CacheHeader.unpack(raw, path)
    payload = len(raw) - header.size
    rows, extra = divmod(payload, header.row_bytes)
    if rows > header.n_images or (require_complete and (rows != header.n_images or extra)):
        raise ParseError(
            f"{path}: payload of {payload} bytes does not hold {header.n_images} rows of {header.row_bytes} bytes"
        )
    table = np.frombuffer(raw, dtype="<u4", count=rows * (header.n_patterns + 1), offset=header.size)
    table = table.reshape(rows, header.n_patterns + 1).astype(np.uint32)
    return FeatureCache(header, table[:, :-1], table[:, -1])


def write_cache(path, header: CacheHeader, counts: np.ndarray, discarded: np.ndarray):
    counts = np.asarray(counts)
    if counts.shape != (header.n_images, header.n_patterns):
        raise ValueError(f"counts shape {counts.shape} does not match header")
    with open(path, "wb") as fh:
        fh.write(header.pack())
        fh.write(_rows(counts, discarded))


def _rows(counts, discarded) -> bytes:
    table = np.concatenate([np.asarray(counts), np.asarray(discarded)[:, None]], axis=1)
    return np.ascontiguousarray(table, dtype="<u4").tobytes()


class CacheWriter:
    """Append rows in image order, resuming a partial file with a matching header."""

    def __init__(self, path, header: CacheHeader):
        self.path = Path(path)
        self.header = header
        self.done = 0
        if self.path.exists():
            existing = read_cache(self.path, require_complete=False)
            existing.check_compatible(header)
            self.done = existing.counts.shape[0]
            # drop a trailing partial row, if any
            keep = header.size + self.done * header.row_bytes
            with open(self.path, "r+b") as fh:
                fh.truncate(keep)
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_bytes(header.pack())
        self._fh = open(self.path, "ab")

    def append(self, counts: np.ndarray, discarded: np.ndarray):
        counts = np.atleast_2d(counts)
        self._fh.write(_rows(counts, np.atleast_1d(discarded)))
        self.done += counts.shape[0]

    def close(self):
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
