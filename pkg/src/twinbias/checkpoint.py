"""Resumable CSV scans.

A checkpoint is a single JSON object written next to the output file via
write-temp-then-rename.  It records how far the scan got, the counters at that
point, and a 64-bit BLAKE2b digest of the output bytes written so far, so a
resumed run can prove it is continuing the same file.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, TextIO

from .errors import StateError
from .scan import (
    DEFAULT_RESIDUES,
    FIRST_TWIN,
    RECORD_HEADER,
    ScanCounters,
    _check_limit,
    iter_segments,
)
from .sieve import DEFAULT_SEGMENT_LEN

SCHEMA_VERSION = 1
DEFAULT_CHECKPOINT_EVERY = 1 << 28


def _hasher(data: bytes = b""):
    h = hashlib.blake2b(digest_size=8)
    h.update(data)
    return h


@dataclass
class CheckpointState:
    scanned_up_to: int
    counters: ScanCounters
    digest: str
    limit: int
    segment_len: int
    output_bytes: int

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "scanned_up_to": self.scanned_up_to,
            "counters": self.counters.to_json(),
            "digest": self.digest,
            "limit": self.limit,
            "segment_len": self.segment_len,
            "output_bytes": self.output_bytes,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CheckpointState":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise StateError(f"unsupported checkpoint schema {data.get('schema_version')!r}")
        try:
            return cls(
                scanned_up_to=int(data["scanned_up_to"]),
                counters=ScanCounters.from_json(data["counters"]),
                digest=str(data["digest"]),
                limit=int(data["limit"]),
                segment_len=int(data["segment_len"]),
                output_bytes=int(data["output_bytes"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"malformed checkpoint: {exc}") from exc


def save_checkpoint(path: str | os.PathLike, state: CheckpointState) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(state.to_json(), fh, sort_keys=True)
        fh.write("\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_checkpoint(path: str | os.PathLike) -> CheckpointState:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise StateError(f"checkpoint {path} is not valid JSON") from exc
    return CheckpointState.from_json(data)


def stream_scan_csv(
    limit: int,
    out: TextIO,
    *,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    threads: int = 1,
    residues: Sequence[tuple[int, int]] = DEFAULT_RESIDUES,
) -> ScanCounters:
    """Write the record CSV for [5, limit] to an open text stream."""
    _check_limit(limit)
    out.write(RECORD_HEADER + "\n")
    counters = ScanCounters(limit=limit, residue_hits={k: 0 for k in residues})
    for top, block in iter_segments(limit, segment_len=segment_len, threads=threads):
        out.write(block.csv_lines())
        counters = counters.merge(block.counters(top, residues))
    return counters


def scan_to_csv(
    limit: int,
    out_path: str | os.PathLike,
    *,
    checkpoint_path: str | os.PathLike | None = None,
    checkpoint_every: int = DEFAULT_CHECKPOINT_EVERY,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    threads: int = 1,
    residues: Sequence[tuple[int, int]] = DEFAULT_RESIDUES,
    on_checkpoint: Callable[[CheckpointState], None] | None = None,
) -> ScanCounters:
    """Scan [5, limit] into ``out_path``, resuming from ``checkpoint_path`` if present.

    ``on_checkpoint`` is called after each checkpoint is durably written; an
    exception raised there aborts the scan, leaving a resumable state behind.
    """
    _check_limit(limit)
    out_path = Path(out_path)
    if checkpoint_every < 1:
        raise ValueError("checkpoint_every must be positive")

    start = FIRST_TWIN
    counters = ScanCounters(limit=FIRST_TWIN - 1, residue_hits={k: 0 for k in residues})
    hasher = _hasher()
    written = 0

    if checkpoint_path is not None and Path(checkpoint_path).exists():
        state = load_checkpoint(checkpoint_path)
        if state.limit != limit or state.segment_len != segment_len:
            raise StateError(
                f"checkpoint was written for limit={state.limit}, segment_len={state.segment_len};"
                f" this run has limit={limit}, segment_len={segment_len}"
            )
        if not out_path.exists() or out_path.stat().st_size < state.output_bytes:
            raise StateError(f"output {out_path} is shorter than the checkpoint records")
        with open(out_path, "rb") as fh:
            prefix = fh.read(state.output_bytes)
        hasher = _hasher(prefix)
        if hasher.hexdigest() != state.digest:
            raise StateError(f"output {out_path} does not match the checkpoint digest")
        with open(out_path, "r+b") as fh:
            fh.truncate(state.output_bytes)
        start = state.scanned_up_to + 1
        counters = state.counters
        written = state.output_bytes
        mode = "ab"
    else:
        mode = "wb"

    with open(out_path, mode) as fh:
        if mode == "wb":
            header = (RECORD_HEADER + "\n").encode()
            fh.write(header)
            hasher.update(header)
            written = len(header)
        last_mark = start - 1
        if start <= limit:
            segments = iter_segments(limit, start=start, segment_len=segment_len, threads=threads)
            for top, block in segments:
                data = block.csv_lines().encode()
                fh.write(data)
                hasher.update(data)
                written += len(data)
                counters = counters.merge(block.counters(top, residues))
                if checkpoint_path is not None and (
                    top - last_mark >= checkpoint_every or top == limit
                ):
                    fh.flush()
                    os.fsync(fh.fileno())
                    state = CheckpointState(
                        scanned_up_to=top,
                        counters=counters,
                        digest=hasher.hexdigest(),
                        limit=limit,
                        segment_len=segment_len,
                        output_bytes=written,
                    )
                    save_checkpoint(checkpoint_path, state)
                    last_mark = top
                    if on_checkpoint is not None:
                        on_checkpoint(state)
    return counters
