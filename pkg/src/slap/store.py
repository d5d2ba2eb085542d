"""Gridded spectrum-availability database with an append-log file format.

File layout (all integers big-endian):

    header   magic "SLAPSDB1" | version u16 | origin_x f64 | origin_y f64 |
             width_m f64 | height_m f64 | cell_m f64 | window_s u32 |
             windows u16 | band_count u16 | band_count x (low_mhz u32, high_mhz u32)
    records  560 bytes each, appended; a later record for the same
             (cell, window, band) key replaces an earlier one on load.

Record layout (560 bytes):

    cell_x u32 | cell_y u32 | window u16 | band u16 | available u8 |
    incumbent_class u8 | max_power_dbm_x10 i16 | updated_ts i64 |
    writer_store u32 | writer_nym_digest 32B | zero padding to 560
"""
from __future__ import annotations

import hashlib
import math
import random
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

RECORD_SIZE = 560
MAGIC = b"SLAPSDB1"
VERSION = 1
NS_PER_S = 1_000_000_000

_RECORD = struct.Struct(">IIHHBBhqI32s")
_HEADER = struct.Struct(">8sHdddddIHH")
_BAND = struct.Struct(">II")
_QUERY = struct.Struct(">ddqI")

INCUMBENT_CLASSES = ("none", "federal-radar", "fixed-satellite", "priority-access")


class NoCoverage(LookupError):
    pass


class StoreFormatError(ValueError):
    pass


class PopulateRejected(PermissionError):
    pass


Key = Tuple[int, int, int, int]  # cell_x, cell_y, window, band


@dataclass(frozen=True)
class Grid:
    origin: Tuple[float, float] = (0.0, 0.0)
    width_m: float = 1000.0
    height_m: float = 1000.0
    cell_m: float = 100.0
    window_s: int = 900
    windows: int = 96
    bands: Tuple[Tuple[int, int], ...] = ((3550, 3560), (3560, 3570), (3570, 3580), (3580, 3590))

    @property
    def cells_x(self) -> int:
        return math.ceil(self.width_m / self.cell_m)

    @property
    def cells_y(self) -> int:
        return math.ceil(self.height_m / self.cell_m)

    @property
    def record_count(self) -> int:
        return self.cells_x * self.cells_y * self.windows * len(self.bands)

    def cell(self, x: float, y: float) -> Tuple[int, int]:
        dx, dy = x - self.origin[0], y - self.origin[1]
        if not (0 <= dx < self.width_m and 0 <= dy < self.height_m):
            raise NoCoverage(f"({x}, {y}) lies outside the configured region")
        return int(dx // self.cell_m), int(dy // self.cell_m)

    def window(self, ts_ns: int) -> int:
        return (ts_ns // (self.window_s * NS_PER_S)) % self.windows

    def band(self, freq_mhz: int) -> int:
        for i, (lo, hi) in enumerate(self.bands):
            if lo <= freq_mhz < hi:
                return i
        raise NoCoverage(f"{freq_mhz} MHz is not a managed band")

    def keys(self) -> Iterator[Key]:
        for cx in range(self.cells_x):
            for cy in range(self.cells_y):
                for w in range(self.windows):
                    for b in range(len(self.bands)):
                        yield cx, cy, w, b

    def header(self) -> bytes:
        head = _HEADER.pack(MAGIC, VERSION, self.origin[0], self.origin[1], self.width_m,
                            self.height_m, self.cell_m, self.window_s, self.windows, len(self.bands))
        return head + b"".join(_BAND.pack(lo, hi) for lo, hi in self.bands)

    @classmethod
    def from_header(cls, data: bytes) -> Tuple["Grid", int]:
        if len(data) < _HEADER.size:
            raise StoreFormatError("truncated header")
        magic, version, ox, oy, w, h, cell, wins_s, wins, nb = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise StoreFormatError("bad magic")
        if version != VERSION:
            raise StoreFormatError(f"unsupported store version {version}")
        end = _HEADER.size + nb * _BAND.size
        if len(data) < end:
            raise StoreFormatError("truncated band table")
        bands = tuple(_BAND.unpack_from(data, _HEADER.size + i * _BAND.size) for i in range(nb))
        return cls((ox, oy), w, h, cell, wins_s, wins, bands), end


@dataclass(frozen=True)
class Query:
    x: float
    y: float
    ts_ns: int
    freq_mhz: int

    SIZE = _QUERY.size  # 16 + 8 + 4

    def to_bytes(self) -> bytes:
        return _QUERY.pack(self.x, self.y, self.ts_ns, self.freq_mhz)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Query":
        if len(data) != cls.SIZE:
            raise StoreFormatError("query must be 28 bytes")
        return cls(*_QUERY.unpack(data))


@dataclass(frozen=True)
class SpectrumRecord:
    cell_x: int
    cell_y: int
    window: int
    band: int
    available: bool
    incumbent_class: int = 0
    max_power_dbm_x10: int = 300
    updated_ts: int = 0
    writer_store: int = 0
    writer_nym_digest: bytes = bytes(32)

    @property
    def key(self) -> Key:
        return self.cell_x, self.cell_y, self.window, self.band

    def to_bytes(self) -> bytes:
        body = _RECORD.pack(self.cell_x, self.cell_y, self.window, self.band, int(self.available),
                            self.incumbent_class, self.max_power_dbm_x10, self.updated_ts,
                            self.writer_store, self.writer_nym_digest)
        return body + bytes(RECORD_SIZE - len(body))

    @classmethod
    def from_bytes(cls, data: bytes) -> "SpectrumRecord":
        if len(data) != RECORD_SIZE:
            raise StoreFormatError(f"record must be {RECORD_SIZE} bytes")
        cx, cy, w, b, avail, inc, pw, ts, sid, nym = _RECORD.unpack_from(data)
        if any(data[_RECORD.size:]):
            raise StoreFormatError("non-zero record padding")
        return cls(cx, cy, w, b, bool(avail), inc, pw, ts, sid, nym)

    def newer_than(self, other: "SpectrumRecord") -> bool:
        return (self.updated_ts, self.writer_store) > (other.updated_ts, other.writer_store)


@dataclass(frozen=True)
class Submission:
    """A record update from a primary user, with whatever the verifier needs."""

    query: Query
    available: bool
    incumbent_class: int
    max_power_dbm_x10: int
    nym: bytes
    evidence: object = None


@dataclass
class SyncReport:
    reconciled: List[Key] = field(default_factory=list)

    def __bool__(self):
        return bool(self.reconciled)


class SpectrumStore:
    """In-memory index over an optional append-log file.

    Writes take a lock; reads see a consistent dict snapshot.
    """

    def __init__(self, grid: Grid, store_id: int = 0, path: Optional[Path] = None):
        self.grid = grid
        self.store_id = store_id
        self.path = Path(path) if path else None
        self._records: Dict[Key, SpectrumRecord] = {}
        self._lock = threading.Lock()
        self.audit: List[Tuple[int, str, Key]] = []

    def __len__(self):
        return len(self._records)

    def records(self) -> List[SpectrumRecord]:
        return [self._records[k] for k in sorted(self._records)]

    def key_for(self, query: Query) -> Key:
        cx, cy = self.grid.cell(query.x, query.y)
        return cx, cy, self.grid.window(query.ts_ns), self.grid.band(query.freq_mhz)

    def lookup(self, query: Query) -> SpectrumRecord:
        key = self.key_for(query)
        rec = self._records.get(key)
        if rec is None:
            raise NoCoverage(f"no record for cell {key[:2]} window {key[2]} band {key[3]}")
        return rec

    def put(self, record: SpectrumRecord):
        with self._lock:
            self._records[record.key] = record
            if self.path is not None:
                with open(self.path, "ab") as fh:
                    fh.write(record.to_bytes())

    def populate(self, submission: Submission, verify: Callable[[Submission], bool]) -> SpectrumRecord:
        if not verify(submission):
            raise PopulateRejected("submission failed credential or location verification")
        key = self.key_for(submission.query)
        nym_digest = hashlib.sha256(submission.nym).digest()
        rec = SpectrumRecord(*key, submission.available, submission.incumbent_class,
                             submission.max_power_dbm_x10, submission.query.ts_ns,
                             self.store_id, nym_digest)
        self.put(rec)
        with self._lock:
            self.audit.append((submission.query.ts_ns, nym_digest.hex(), key))
        return rec

    def dump(self, path: Path):
        path = Path(path)
        with self._lock, open(path, "wb") as fh:
            fh.write(self.grid.header())
            for rec in (self._records[k] for k in sorted(self._records)):
                fh.write(rec.to_bytes())

    @classmethod
    def load(cls, path: Path, store_id: int = 0, attach: bool = False) -> "SpectrumStore":
        data = Path(path).read_bytes()
        grid, offset = Grid.from_header(data)
        if (len(data) - offset) % RECORD_SIZE:
            raise StoreFormatError("trailing partial record")
        store = cls(grid, store_id, Path(path) if attach else None)
        for i in range(offset, len(data), RECORD_SIZE):
            rec = SpectrumRecord.from_bytes(data[i:i + RECORD_SIZE])
            store._records[rec.key] = rec
        return store

    def create_log(self, path: Path):
        """Start an append-log at `path` holding the current contents."""
        self.dump(path)
        self.path = Path(path)


def store_sync(stores: Sequence[SpectrumStore]) -> SyncReport:
    """Reconcile every store to the newest record per key (ties: higher store id)."""
    if len(stores) < 2:
        raise ValueError("sync needs at least two stores")
    report = SyncReport()
    keys = sorted(set().union(*(s._records.keys() for s in stores)))
    for key in keys:
        present = [s._records.get(key) for s in stores]
        candidates = [r for r in present if r is not None]
        winner = candidates[0]
        for r in candidates[1:]:
            if r.newer_than(winner):
                winner = r
        if any(r != winner for r in present):
            report.reconciled.append(key)
            for s, r in zip(stores, present):
                if r != winner:
                    s.put(winner)
    return report


def synth_generate(grid: Grid, seed: int, density: float = 0.7, store_id: int = 0) -> SpectrumStore:
    """Deterministic synthetic availability records for every grid key."""
    if not 0 <= density <= 1:
        raise ValueError("density must lie in [0, 1]")
    rng = random.Random(seed)
    store = SpectrumStore(grid, store_id)
    for key in grid.keys():
        available = rng.random() < density
        incumbent = 0 if available else rng.randrange(1, len(INCUMBENT_CLASSES))
        power = rng.randrange(200, 360) if available else 0
        store._records[key] = SpectrumRecord(*key, available, incumbent, power)
    return store
