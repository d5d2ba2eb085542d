import random
import threading

import pytest
from hypothesis import given, strategies as st

from slap.store import (NS_PER_S, RECORD_SIZE, Grid, NoCoverage, PopulateRejected, Query,
                        SpectrumRecord, SpectrumStore, StoreFormatError, Submission, store_sync,
                        synth_generate)

GRID = Grid(width_m=300, height_m=200, cell_m=100, windows=4, bands=((3550, 3560), (3560, 3570)))


def test_sizes():
    assert RECORD_SIZE == 560
    assert len(SpectrumRecord(0, 0, 0, 0, True).to_bytes()) == 560
    assert len(Query(1.0, 2.0, 3, 3555).to_bytes()) == 28


@given(st.integers(0, 2**31), st.integers(0, 2**31), st.booleans(), st.integers(-32768, 32767),
       st.binary(min_size=32, max_size=32))
def test_record_roundtrip(cx, cy, avail, power, nym):
    rec = SpectrumRecord(cx, cy, 3, 1, avail, 2, power, 99, 7, nym)
    assert SpectrumRecord.from_bytes(rec.to_bytes()) == rec


def test_record_padding_must_be_zero():
    data = bytearray(SpectrumRecord(0, 0, 0, 0, True).to_bytes())
    data[-1] = 1
    with pytest.raises(StoreFormatError):
        SpectrumRecord.from_bytes(bytes(data))


def test_synth_is_deterministic_and_complete():
    a, b = synth_generate(GRID, 5), synth_generate(GRID, 5)
    assert len(a) == GRID.record_count == 3 * 2 * 4 * 2
    assert [r.to_bytes() for r in a.records()] == [r.to_bytes() for r in b.records()]
    assert [r.available for r in synth_generate(GRID, 6).records()] != [r.available for r in a.records()]


def test_lookup_and_no_coverage():
    store = synth_generate(GRID, 1)
    q = Query(150.0, 50.0, 2 * 900 * NS_PER_S, 3565)
    assert store.lookup(q).key == (1, 0, 2, 1)
    with pytest.raises(NoCoverage):
        store.lookup(Query(500.0, 50.0, 0, 3555))
    with pytest.raises(NoCoverage):
        store.lookup(Query(50.0, 50.0, 0, 3700))


def test_dump_load_roundtrip(tmp_path):
    store = synth_generate(GRID, 2)
    path = tmp_path / "db.bin"
    store.dump(path)
    loaded = SpectrumStore.load(path)
    assert loaded.grid == GRID
    assert loaded.records() == store.records()
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(StoreFormatError):
        SpectrumStore.load(path)
    path.write_bytes(b"NOTASTORE" + bytes(100))
    with pytest.raises(StoreFormatError):
        SpectrumStore.load(path)


def test_append_log_replays(tmp_path):
    store = synth_generate(GRID, 3)
    path = tmp_path / "log.bin"
    store.create_log(path)
    rec = SpectrumRecord(0, 0, 0, 0, False, 1, 100, 123, 0)
    store.put(rec)
    assert SpectrumStore.load(path).lookup(Query(1, 1, 0, 3555)) == rec


def test_populate_requires_verification():
    store = SpectrumStore(GRID)
    sub = Submission(Query(10, 10, 5, 3555), False, 1, 200, b"nym")
    with pytest.raises(PopulateRejected):
        store.populate(sub, lambda s: False)
    rec = store.populate(sub, lambda s: True)
    assert store.lookup(sub.query) == rec and not rec.available
    assert len(store.audit) == 1


def test_concurrent_writers():
    store = SpectrumStore(GRID)
    keys = list(GRID.keys())

    def writer(sid):
        rng = random.Random(sid)
        for k in keys:
            store.put(SpectrumRecord(*k, rng.random() < 0.5, updated_ts=sid, writer_store=sid))

    threads = [threading.Thread(target=writer, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(store) == len(keys)
    assert all(0 <= r.writer_store < 8 for r in store.records())


def test_sync_newest_wins():
    a, b = synth_generate(GRID, 1, store_id=0), synth_generate(GRID, 1, store_id=1)
    newer = SpectrumRecord(0, 0, 0, 0, False, 1, 0, 10**12, 1)
    b.put(newer)
    a.put(SpectrumRecord(0, 0, 1, 0, False, 1, 0, 10**12, 0))
    report = store_sync([a, b])
    assert len(report.reconciled) == 2
    assert a.records() == b.records()
    assert a.lookup(Query(1, 1, 0, 3555)) == newer
    assert not store_sync([a, b])
    with pytest.raises(ValueError):
        store_sync([a])


def test_grid_header_roundtrip():
    grid, end = Grid.from_header(GRID.header())
    assert grid == GRID and end == len(GRID.header())
