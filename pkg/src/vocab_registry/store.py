"""Append-only per-scheme event logs with snapshot acceleration.

Layout under the data directory:

    <data_dir>/<token>/log              framed change records
    <data_dir>/<token>/snap-<version>   cached materialization (canonical JSON)

Log framing, one record per committed version:

    4 bytes  big-endian payload length
    n bytes  canonical-JSON payload {"version": v, "events": [...]}
    4 bytes  big-endian CRC32 of the payload

A torn tail (process killed mid-append) leaves a record whose frame is
incomplete; opening the log repairs it by truncating back to the last intact
record.  A *complete* frame whose checksum does not match is real corruption
and raises CorruptRecord instead of being silently dropped.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .changes import ChangeEvent, fold_events
from .errors import CorruptRecord, IoFailure, UnknownVersion, VersionConflict
from .model import SchemeState, canonical_json

_LEN = struct.Struct(">I")

SNAPSHOT_EVERY = 100


def _frame(payload: bytes) -> bytes:
    return _LEN.pack(len(payload)) + payload + _LEN.pack(zlib.crc32(payload) & 0xFFFFFFFF)


class EventLog:
    """All persisted per-scheme history below one data directory."""

    def __init__(self, data_dir: str | os.PathLike, snapshot_every: int = SNAPSHOT_EVERY):
        self.root = Path(data_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        if snapshot_every < 1:
            raise ValueError("snapshot_every must be positive")
        self.snapshot_every = snapshot_every

    # -- paths ------------------------------------------------------------

    def _dir(self, token: str) -> Path:
        return self.root / token

    def _log_path(self, token: str) -> Path:
        return self._dir(token) / "log"

    def tokens(self) -> list[str]:
        return sorted(
            p.name for p in self.root.iterdir() if p.is_dir() and (p / "log").exists()
        )

    # -- scanning ---------------------------------------------------------

    def _scan(self, token: str, repair: bool = True) -> Iterator[tuple[int, bytes]]:
        """Yield (version, payload) per intact record, repairing a torn tail."""
        path = self._log_path(token)
        if not path.exists():
            return
        size = path.stat().st_size
        good_end = 0
        version = 0
        with open(path, "rb") as fh:
            while True:
                header = fh.read(_LEN.size)
                if len(header) < _LEN.size:
                    break  # clean EOF or torn length field
                (length,) = _LEN.unpack(header)
                payload = fh.read(length)
                crc_raw = fh.read(_LEN.size)
                if len(payload) < length or len(crc_raw) < _LEN.size:
                    break  # torn payload or checksum
                (crc,) = _LEN.unpack(crc_raw)
                if crc != zlib.crc32(payload) & 0xFFFFFFFF:
                    raise CorruptRecord(version + 1, f"checksum mismatch in {path}")
                version += 1
                good_end = fh.tell()
                yield version, payload
        if repair and good_end < size:
            with open(path, "r+b") as fh:
                fh.truncate(good_end)

    def head(self, token: str) -> int:
        last = 0
        for version, _ in self._scan(token):
            last = version
        return last

    def read(
        self, token: str, since: int = 0, until: Optional[int] = None
    ) -> Iterator[tuple[int, list[ChangeEvent]]]:
        """Records with since < version <= until, parsed into events."""
        for version, payload in self._scan(token):
            if version <= since:
                continue
            if until is not None and version > until:
                break
            record = json.loads(payload.decode("utf-8"))
            if record["version"] != version:
                raise CorruptRecord(version, "record numbering does not match its position")
            yield version, [ChangeEvent.from_jsonable(e) for e in record["events"]]

    def events(self, token: str, since: int = 0, until: Optional[int] = None) -> Iterator[ChangeEvent]:
        for _, batch in self.read(token, since, until):
            yield from batch

    # -- writing ----------------------------------------------------------

    def append(self, token: str, version: int, events: Sequence[ChangeEvent]) -> None:
        """Append one version record. Versions must arrive contiguously from 1."""
        if not events:
            raise IoFailure("refusing to append an empty record")
        current = self.head(token)
        if version != current + 1:
            raise VersionConflict(expected=version, actual=current)
        payload = canonical_json(
            {"version": version, "events": [e.to_jsonable() for e in events]}
        ).encode("utf-8")
        self._dir(token).mkdir(parents=True, exist_ok=True)
        with open(self._log_path(token), "ab") as fh:
            fh.write(_frame(payload))
            fh.flush()
            os.fsync(fh.fileno())

    # -- snapshots ----------------------------------------------------------

    def _snapshot_path(self, token: str, version: int) -> Path:
        return self._dir(token) / f"snap-{version}"

    def snapshot_versions(self, token: str) -> list[int]:
        directory = self._dir(token)
        if not directory.exists():
            return []
        out = []
        for p in directory.iterdir():
            name = p.name
            if name.startswith("snap-") and name[5:].isdigit():
                out.append(int(name[5:]))
        return sorted(out)

    def write_snapshot(self, token: str, state: SchemeState) -> None:
        path = self._snapshot_path(token, state.version)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes((state.canonical() + "\n").encode("utf-8"))
        os.replace(tmp, path)

    def load_snapshot(self, token: str, version: int) -> SchemeState:
        raw = self._snapshot_path(token, version).read_bytes()
        return SchemeState.from_jsonable(json.loads(raw.decode("utf-8")))

    def maybe_snapshot(self, token: str, state: SchemeState) -> bool:
        if state.version % self.snapshot_every == 0:
            self.write_snapshot(token, state)
            return True
        return False

    # -- materialization ----------------------------------------------------

    def materialize(self, token: str, version: Optional[int] = None) -> SchemeState:
        """State at a version (head when omitted), replaying past the nearest snapshot."""
        current = self.head(token)
        if current == 0:
            raise UnknownVersion(f"scheme {token!r} has no history")
        target = current if version is None else version
        if target < 1 or target > current:
            raise UnknownVersion(f"scheme {token!r} has no version {target}")

        base: Optional[SchemeState] = None
        floor = 0
        for v in reversed(self.snapshot_versions(token)):
            if v <= target:
                base = self.load_snapshot(token, v)
                floor = v
                break
        if floor == target and base is not None:
            return base
        return fold_events(self.events(token, since=floor, until=target), base)
