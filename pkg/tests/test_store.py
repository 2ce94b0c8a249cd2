"""Log framing, crash repair, checksums, snapshots, and replay."""

import json
import random
import struct
import zlib

import pytest

import synth
from oracles import read_frames_naive
from vocab_registry.changes import ChangeEvent, EventKind, fold_events
from vocab_registry.errors import CorruptRecord, IoFailure, UnknownVersion, VersionConflict
from vocab_registry.model import canonical_json
from vocab_registry.registry import Registry
from vocab_registry.store import EventLog

LEN = struct.Struct(">I")


def note_event(version, text="x"):
    """Minimal well-formed event; enough for framing tests."""
    return ChangeEvent(
        scheme_id="s1",
        version=version,
        seq=version,
        timestamp="2026-01-01T00:00:00Z",
        author="a1",
        kind=EventKind.SCHEME_METADATA_UPDATED,
        meta={"description": text},
    )


def fill(log, token, n):
    for v in range(1, n + 1):
        log.append(token, v, [note_event(v, f"payload {v}")])


# -- framing ---------------------------------------------------------------


def test_append_read_round_trip(tmp_path):
    log = EventLog(tmp_path)
    fill(log, "gem", 3)
    got = list(log.read("gem"))
    assert [v for v, _ in got] == [1, 2, 3]
    for v, events in got:
        assert [e.to_jsonable() for e in events] == [note_event(v, f"payload {v}").to_jsonable()]


def test_version_must_be_contiguous(tmp_path):
    log = EventLog(tmp_path)
    fill(log, "gem", 2)
    with pytest.raises(VersionConflict):
        log.append("gem", 4, [note_event(4)])
    with pytest.raises(VersionConflict):
        log.append("gem", 2, [note_event(2)])
    assert log.head("gem") == 2


def test_empty_record_refused(tmp_path):
    log = EventLog(tmp_path)
    with pytest.raises(IoFailure):
        log.append("gem", 1, [])


def test_head_of_unknown_scheme_is_zero(tmp_path):
    assert EventLog(tmp_path).head("nope") == 0


def test_tokens_lists_only_schemes_with_logs(tmp_path):
    log = EventLog(tmp_path)
    fill(log, "b-scheme", 1)
    fill(log, "a-scheme", 1)
    (tmp_path / "not-a-scheme").mkdir()
    (tmp_path / "stray.txt").write_text("junk")
    assert log.tokens() == ["a-scheme", "b-scheme"]


def test_read_window(tmp_path):
    log = EventLog(tmp_path)
    fill(log, "gem", 6)
    assert [v for v, _ in log.read("gem", since=2, until=5)] == [3, 4, 5]
    assert [v for v, _ in log.read("gem", since=6)] == []


def test_frames_match_naive_reader(tmp_path):
    log = EventLog(tmp_path)
    fill(log, "gem", 4)
    raw = (tmp_path / "gem" / "log").read_bytes()
    payloads = read_frames_naive(raw)
    assert len(payloads) == 4
    for v, payload in enumerate(payloads, start=1):
        record = json.loads(payload)
        assert record["version"] == v
        # payloads are canonical JSON, byte for byte
        assert canonical_json(record).encode("utf-8") == payload


# -- crash repair and corruption --------------------------------------------


def test_torn_tail_truncated_at_every_offset(tmp_path):
    log = EventLog(tmp_path)
    fill(log, "gem", 3)
    raw = (tmp_path / "gem" / "log").read_bytes()
    # locate the start of the third record by walking the first two frames
    offset = 0
    for _ in range(2):
        (length,) = LEN.unpack(raw[offset : offset + 4])
        offset += 4 + length + 4
    assert offset < len(raw)

    for cut in range(offset, len(raw)):
        scratch = tmp_path / f"cut-{cut}"
        dup = EventLog(scratch)
        dup._dir("gem").mkdir(parents=True)
        (scratch / "gem" / "log").write_bytes(raw[:cut])
        assert dup.head("gem") == 2
        # the scan repaired the file in place
        assert (scratch / "gem" / "log").read_bytes() == raw[:offset]
        # and the log accepts version 3 again afterwards
        dup.append("gem", 3, [note_event(3)])
        assert dup.head("gem") == 3


def test_torn_tail_may_eat_whole_log(tmp_path):
    log = EventLog(tmp_path)
    fill(log, "gem", 1)
    raw = (tmp_path / "gem" / "log").read_bytes()
    scratch = tmp_path / "partial"
    dup = EventLog(scratch)
    dup._dir("gem").mkdir(parents=True)
    (scratch / "gem" / "log").write_bytes(raw[:3])  # not even a length header
    assert dup.head("gem") == 0
    assert (scratch / "gem" / "log").read_bytes() == b""


def test_checksum_mismatch_is_not_repaired(tmp_path):
    log = EventLog(tmp_path)
    fill(log, "gem", 3)
    path = tmp_path / "gem" / "log"
    raw = bytearray(path.read_bytes())
    # flip one byte inside the payload of the second record
    (first_len,) = LEN.unpack(bytes(raw[0:4]))
    second_payload_at = 4 + first_len + 4 + 4
    raw[second_payload_at] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptRecord):
        log.head("gem")
    # naive reader agrees the frame is bad
    with pytest.raises(ValueError):
        read_frames_naive(bytes(raw))


def test_damaged_crc_field_detected(tmp_path):
    log = EventLog(tmp_path)
    fill(log, "gem", 2)
    path = tmp_path / "gem" / "log"
    raw = bytearray(path.read_bytes())
    raw[-1] ^= 0x01  # last CRC byte of the final record
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptRecord):
        log.head("gem")


def test_record_numbering_must_match_position(tmp_path):
    log = EventLog(tmp_path)
    payload = canonical_json({"version": 7, "events": [note_event(7).to_jsonable()]}).encode()
    frame = LEN.pack(len(payload)) + payload + LEN.pack(zlib.crc32(payload) & 0xFFFFFFFF)
    log._dir("gem").mkdir(parents=True)
    (tmp_path / "gem" / "log").write_bytes(frame)
    with pytest.raises(CorruptRecord):
        list(log.read("gem"))


# -- snapshots and materialization ------------------------------------------


def test_snapshot_round_trip(tmp_path):
    reg = Registry(tmp_path, snapshot_every=1000)
    rng = random.Random(11)
    synth.populate_scheme(rng, reg, "gem", "owner-a", 8)
    state = reg.log.materialize("gem")
    reg.log.write_snapshot("gem", state)
    back = reg.log.load_snapshot("gem", state.version)
    assert back.canonical() == state.canonical()
    assert reg.log.snapshot_versions("gem") == [state.version]


def test_maybe_snapshot_fires_on_multiples(tmp_path):
    reg = Registry(tmp_path, snapshot_every=3)
    rng = random.Random(12)
    synth.populate_scheme(rng, reg, "gem", "owner-a", 10)
    head = reg.log.head("gem")
    expected = [v for v in range(1, head + 1) if v % 3 == 0]
    assert reg.log.snapshot_versions("gem") == expected


def test_materialize_equals_naive_replay_at_every_version(tmp_path):
    reg = Registry(tmp_path, snapshot_every=4)
    rng = random.Random(13)
    synth.populate_scheme(rng, reg, "gem", "owner-a", 12)
    log = reg.log
    head = log.head("gem")
    assert head > 8  # ensure we cross several snapshot boundaries
    for version in range(1, head + 1):
        resumed = log.materialize("gem", version)
        replayed = fold_events(log.events("gem", until=version))
        assert resumed.canonical() == replayed.canonical()


def test_materialize_out_of_range(tmp_path):
    reg = Registry(tmp_path, snapshot_every=100)
    rng = random.Random(14)
    synth.populate_scheme(rng, reg, "gem", "owner-a", 2)
    head = reg.log.head("gem")
    for bad in (0, -1, head + 1):
        with pytest.raises(UnknownVersion):
            reg.log.materialize("gem", bad)
    with pytest.raises(UnknownVersion):
        reg.log.materialize("never-created")


def test_snapshot_corruption_does_not_affect_log_replay(tmp_path):
    """Snapshots are an accelerator; the log alone remains authoritative."""
    reg = Registry(tmp_path, snapshot_every=2)
    rng = random.Random(15)
    synth.populate_scheme(rng, reg, "gem", "owner-a", 6)
    log = reg.log
    head = log.head("gem")
    want = fold_events(log.events("gem")).canonical()
    for snap in log.snapshot_versions("gem"):
        log._snapshot_path("gem", snap).unlink()
    assert log.materialize("gem", head).canonical() == want
