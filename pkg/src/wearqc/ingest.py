"""Empatica E4 session archives, participant recordings and JSON manifests.

An E4 export is a directory (or zip) of CSV files. Each signal file starts
with two header lines, the session start as Unix seconds and the sample rate
in Hz (one value per column), followed by one row per sample. ``ACC.csv``
holds three columns of raw counts at 64 counts per g; ``IBI.csv`` holds
``offset_s,duration_s`` rows after a start-time line; ``tags.csv`` holds one
Unix timestamp per line.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import E4ParseError, RecordingError
from .intervals import IntervalSet
from .signal import UniformSignal

__all__ = [
    "ACC_COUNTS_PER_G",
    "NOMINAL_RATES",
    "E4Session",
    "ParticipantRecording",
    "read_e4_archive",
    "write_e4_archive",
    "assemble_recording",
    "read_labels",
    "session_intervals",
    "write_manifest",
    "load_manifest",
]

ACC_COUNTS_PER_G = 64.0

NOMINAL_RATES = {"acc": 32.0, "eda": 4.0, "temp": 4.0, "bvp": 64.0, "hr": 1.0}
_FILES = {"acc": "ACC.csv", "eda": "EDA.csv", "temp": "TEMP.csv", "bvp": "BVP.csv", "hr": "HR.csv"}
_UNITS = {"acc": "g", "eda": "uS", "temp": "degC", "bvp": "dimensionless", "hr": "bpm"}
_COLUMNS = {"acc": 3, "eda": 1, "temp": 1, "bvp": 1, "hr": 1}
_MANDATORY = ("acc", "eda", "temp")
MODALITIES = tuple(_FILES) + ("session",)

MANIFEST_FORMAT = "wearqc-manifest/1"


@dataclass(frozen=True, eq=False)
class E4Session:
    acc: UniformSignal
    eda: UniformSignal
    temp: UniformSignal
    bvp: UniformSignal | None = None
    hr: UniformSignal | None = None
    ibi_start: float | None = None
    ibi: np.ndarray | None = None
    tags: tuple[float, ...] = ()
    source: str | None = None

    def __post_init__(self):
        for name in _FILES:
            sig = getattr(self, name)
            if sig is None:
                continue
            if abs(sig.rate_hz - NOMINAL_RATES[name]) > 1e-6:
                raise RecordingError(
                    f"{name} rate {sig.rate_hz} Hz differs from nominal {NOMINAL_RATES[name]} Hz"
                )
            if sig.channels != _COLUMNS[name]:
                raise RecordingError(f"{name} must have {_COLUMNS[name]} channel(s)")
        if self.ibi is not None:
            arr = np.asarray(self.ibi, dtype=float).reshape(-1, 2)
            arr.setflags(write=False)
            object.__setattr__(self, "ibi", arr)

    def signals(self) -> dict[str, UniformSignal]:
        return {k: getattr(self, k) for k in _FILES if getattr(self, k) is not None}

    @property
    def start(self) -> float:
        return min(s.start for s in self.signals().values())

    @property
    def end(self) -> float:
        return max(s.end for s in self.signals().values())


@dataclass(eq=False)
class ParticipantRecording:
    participant_id: str
    sessions: list[E4Session] = field(default_factory=list)
    label_spans: dict[str, IntervalSet] = field(default_factory=dict)

    def __post_init__(self):
        self.sessions = sorted(self.sessions, key=lambda s: s.start)
        _check_overlap(self.sessions)

    @property
    def extent(self) -> tuple[float, float] | None:
        if not self.sessions:
            return None
        return self.sessions[0].start, max(s.end for s in self.sessions)


def _check_overlap(sessions):
    for a, b in zip(sessions, sessions[1:]):
        if b.start < a.end:
            raise RecordingError(
                f"overlapping sessions: {a.source or '<memory>'} [{a.start}, {a.end}) and "
                f"{b.source or '<memory>'} [{b.start}, {b.end})"
            )


# --------------------------------------------------------------------------
# reading


class _Archive:
    """Uniform read access to a directory or a zip file."""

    def __init__(self, path):
        self.path = Path(path)
        if not self.path.exists():
            raise FileNotFoundError(f"archive not found: {self.path}")
        self._zip = None
        if self.path.is_file():
            if not zipfile.is_zipfile(self.path):
                raise E4ParseError(self.path, None, "not a directory or zip archive")
            self._zip = zipfile.ZipFile(self.path)
            # exports sometimes nest the files in a single folder
            self._names = {Path(n).name: n for n in self._zip.namelist() if not n.endswith("/")}

    def has(self, name: str) -> bool:
        if self._zip is not None:
            return name in self._names
        return (self.path / name).is_file()

    def read(self, name: str) -> str:
        if self._zip is not None:
            return self._zip.read(self._names[name]).decode("utf-8")
        return (self.path / name).read_text(encoding="utf-8")

    def label(self, name: str) -> str:
        return f"{self.path}/{name}" if self._zip is None else f"{self.path}!{name}"


def _header_values(line: str, where: str, lineno: int, ncols: int) -> float:
    parts = [p.strip() for p in line.split(",")]
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise E4ParseError(where, lineno, f"non-numeric header {line.strip()!r}") from None
    if len(vals) != ncols:
        raise E4ParseError(where, lineno, f"expected {ncols} header column(s), got {len(vals)}")
    if any(v != vals[0] for v in vals) or not math.isfinite(vals[0]):
        raise E4ParseError(where, lineno, f"inconsistent header values {line.strip()!r}")
    return vals[0]


def _parse_rows(lines: list[str], where: str, first_lineno: int, ncols: int) -> np.ndarray:
    while lines and not lines[-1].strip():
        lines = lines[:-1]
    if not lines:
        return np.empty((0, ncols))
    try:
        data = np.loadtxt(lines, delimiter=",", ndmin=2, dtype=float)
        if data.shape[1] == ncols and np.isfinite(data).all():
            return data
    except ValueError:
        pass
    # slow path, only to locate the offending line
    for offset, line in enumerate(lines):
        parts = line.split(",")
        lineno = first_lineno + offset
        if len(parts) != ncols:
            raise E4ParseError(where, lineno, f"expected {ncols} column(s), got {len(parts)}")
        for p in parts:
            try:
                v = float(p)
            except ValueError:
                raise E4ParseError(where, lineno, f"non-numeric value {p.strip()!r}") from None
            if not math.isfinite(v):
                raise E4ParseError(where, lineno, f"non-finite value {p.strip()!r}")
    raise E4ParseError(where, None, "unparseable data section")  # pragma: no cover


def _read_signal(arch: _Archive, modality: str, acc_scale: float) -> UniformSignal:
    name = _FILES[modality]
    where = arch.label(name)
    lines = arch.read(name).splitlines()
    ncols = _COLUMNS[modality]
    if len(lines) < 2:
        raise E4ParseError(where, len(lines) + 1, "missing start-time/sample-rate header")
    start = _header_values(lines[0], where, 1, ncols)
    rate = _header_values(lines[1], where, 2, ncols)
    if rate <= 0:
        raise E4ParseError(where, 2, f"sample rate must be positive, got {rate}")
    data = _parse_rows(lines[2:], where, 3, ncols)
    if modality == "acc":
        data = data * acc_scale
    return UniformSignal(start, rate, data, _UNITS[modality])


def _read_ibi(arch: _Archive):
    where = arch.label("IBI.csv")
    lines = arch.read("IBI.csv").splitlines()
    if not lines:
        raise E4ParseError(where, 1, "missing start-time header")
    try:
        start = float(lines[0].split(",")[0])
    except ValueError:
        raise E4ParseError(where, 1, f"non-numeric header {lines[0].strip()!r}") from None
    return start, _parse_rows(lines[1:], where, 2, 2)


def _read_tags(arch: _Archive) -> tuple[float, ...]:
    where = arch.label("tags.csv")
    lines = [ln for ln in arch.read("tags.csv").splitlines()]
    out = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            out.append(float(line))
        except ValueError:
            raise E4ParseError(where, lineno, f"non-numeric tag {line.strip()!r}") from None
    return tuple(out)


def read_e4_archive(path, acc_scale: float = 1.0 / ACC_COUNTS_PER_G) -> E4Session:
    """Parse one E4 session export.

    Parameters
    ----------
    path : path-like
        Directory or zip archive containing at least ACC.csv, EDA.csv and
        TEMP.csv. BVP.csv, HR.csv, IBI.csv and tags.csv are optional.
    acc_scale : float
        Multiplier from file values to g. Use 1.0 for pre-scaled data.

    Raises
    ------
    E4ParseError
        For a missing mandatory file or a malformed header or row; the
        message names the file and line.
    """
    arch = _Archive(path)
    for modality in _MANDATORY:
        if not arch.has(_FILES[modality]):
            raise E4ParseError(arch.label(_FILES[modality]), None, "mandatory file missing")
    signals = {
        m: _read_signal(arch, m, acc_scale) for m in _FILES if arch.has(_FILES[m])
    }
    ibi_start = ibi = None
    if arch.has("IBI.csv"):
        ibi_start, ibi = _read_ibi(arch)
    tags = _read_tags(arch) if arch.has("tags.csv") else ()
    return E4Session(**signals, ibi_start=ibi_start, ibi=ibi, tags=tags, source=str(path))


# --------------------------------------------------------------------------
# writing


def _fmt_rows(data: np.ndarray) -> str:
    buf = io.StringIO()
    if data.size and np.all(data == np.round(data)) and np.all(np.abs(data) < 2**53):
        np.savetxt(buf, data, fmt="%d", delimiter=",")
    elif data.size:
        np.savetxt(buf, data, fmt="%.17g", delimiter=",")
    return buf.getvalue()


def _write_signal(path: Path, sig: UniformSignal, values: np.ndarray):
    ncols = values.shape[1]
    header = ",".join([repr(sig.start)] * ncols) + "\n" + ",".join([repr(sig.rate_hz)] * ncols) + "\n"
    path.write_text(header + _fmt_rows(values), encoding="utf-8")


def write_e4_archive(session: E4Session, path, acc_scale: float = 1.0 / ACC_COUNTS_PER_G) -> Path:
    """Write ``session`` as an E4-layout directory; inverse of :func:`read_e4_archive`."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    for modality, sig in session.signals().items():
        values = sig.samples / acc_scale if modality == "acc" else sig.samples
        _write_signal(out / _FILES[modality], sig, values)
    if session.ibi is not None:
        text = f"{session.ibi_start!r}, IBI\n" + _fmt_rows(session.ibi)
        (out / "IBI.csv").write_text(text, encoding="utf-8")
    if session.tags:
        (out / "tags.csv").write_text("".join(f"{t!r}\n" for t in session.tags), encoding="utf-8")
    return out


# --------------------------------------------------------------------------
# recordings


def read_labels(path) -> dict[str, IntervalSet]:
    """Read a ``name,start_unix_s,end_unix_s`` CSV (with header row)."""
    spans: dict[str, list[tuple[float, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return {}
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 3:
                raise E4ParseError(path, lineno, f"expected name,start,end; got {len(row)} field(s)")
            name = row[0].strip()
            try:
                start, end = float(row[1]), float(row[2])
            except ValueError:
                raise E4ParseError(path, lineno, "non-numeric label bound") from None
            if not start < end:
                raise E4ParseError(path, lineno, f"label start {start} not before end {end}")
            spans.setdefault(name, []).append((start, end))
    return {name: IntervalSet(v) for name, v in spans.items()}


def assemble_recording(session_paths, labels_path=None, participant_id: str | None = None,
                       acc_scale: float = 1.0 / ACC_COUNTS_PER_G) -> ParticipantRecording:
    sessions = [read_e4_archive(p, acc_scale) for p in session_paths]
    labels = read_labels(labels_path) if labels_path is not None else {}
    if participant_id is None:
        participant_id = Path(session_paths[0]).parent.name if session_paths else "participant"
    return ParticipantRecording(participant_id, sessions, labels)


def session_intervals(recording: ParticipantRecording, modality: str = "session") -> IntervalSet:
    """One interval per session spanning the recorded extent of ``modality``.

    ``"session"`` spans every modality of the session together.
    """
    if modality not in MODALITIES:
        raise RecordingError(f"unknown modality {modality!r}; expected one of {MODALITIES}")
    spans = []
    for s in recording.sessions:
        if modality == "session":
            spans.append((s.start, s.end))
            continue
        sig = getattr(s, modality)
        if sig is not None and len(sig):
            spans.append((sig.start, sig.end))
    return IntervalSet(spans)


def write_manifest(recording: ParticipantRecording, out_dir) -> Path:
    """Dump a recording as ``manifest.json`` plus one E4-layout folder per session."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for k, sess in enumerate(recording.sessions):
        rel = f"sessions/{k:03d}"
        write_e4_archive(sess, out / rel)
        entries.append({
            "archive": rel,
            "source": sess.source,
            "start": sess.start,
            "end": sess.end,
            "modalities": {
                m: {"start": sig.start, "rate_hz": sig.rate_hz, "n_samples": len(sig),
                    "file": f"{rel}/{_FILES[m]}"}
                for m, sig in sess.signals().items()
            },
        })
    doc = {
        "format": MANIFEST_FORMAT,
        "participant_id": recording.participant_id,
        "sessions": entries,
        "label_spans": {k: v.to_list() for k, v in sorted(recording.label_spans.items())},
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_manifest(path) -> ParticipantRecording:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("format") != MANIFEST_FORMAT:
        raise RecordingError(f"{path}: not a {MANIFEST_FORMAT} document")
    base = path.parent
    sessions = [read_e4_archive(base / e["archive"]) for e in doc["sessions"]]
    for sess, e in zip(sessions, doc["sessions"]):
        object.__setattr__(sess, "source", e.get("source") or os.fspath(base / e["archive"]))
    labels = {k: IntervalSet(map(tuple, v)) for k, v in doc.get("label_spans", {}).items()}
    return ParticipantRecording(doc["participant_id"], sessions, labels)
