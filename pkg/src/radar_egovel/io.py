"""Delimited-text formats for scans, estimate logs and ground truth.

Scan file      ``scan_id,timestamp,x,y,z,doppler[,snr]``, one detection per row
Estimate log   ``timestamp,vx,vy,vz,status,inliers,total,residual_rms``
Ground truth   ``timestamp,vx,vy,vz[,wx,wy,wz]``

The header row fixes the column order. Rows may be comma- or
whitespace-delimited; ``#`` starts a comment line. In a scan stream a blank
line closes the current scan early, which lets online producers get an
estimate without waiting for the next scan's first row.
"""

from __future__ import annotations

import contextlib
import io
import logging
import math
import re
import sys
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np

from .errors import MissingColumn, NonMonotonicScanId, ParseError
from .evaluation import GroundTruthSample
from .types import Detection, EstimateStatus, RadarScan, VelocityEstimate

log = logging.getLogger(__name__)

SCAN_COLUMNS = ("scan_id", "timestamp", "x", "y", "z", "doppler")
ESTIMATE_COLUMNS = ("timestamp", "vx", "vy", "vz", "status", "inliers", "total", "residual_rms")
GT_COLUMNS = ("timestamp", "vx", "vy", "vz")
GT_OPTIONAL = ("wx", "wy", "wz")

_SPLIT = re.compile(r"\s*,\s*|\s+")


def fmt(x: float, digits: int = 9) -> str:
    """Fixed significant-digit formatting used for velocities and statistics."""
    return f"{x:.{digits}g}"


def fmt_exact(x: float) -> str:
    """Shortest representation that round-trips to the same double."""
    return repr(float(x))


@contextlib.contextmanager
def _open(target, mode):
    if target == "-" or target is None:
        yield sys.stdin if "r" in mode else sys.stdout
    elif isinstance(target, (str, Path)):
        with open(target, mode, newline="") as fh:
            yield fh
    else:
        yield target


def _split(line: str):
    return [tok for tok in _SPLIT.split(line.strip()) if tok != ""]


def _rows(stream: IO[str], source):
    """Yield ``(lineno, fields)`` for data rows and ``(lineno, None)`` for blank lines."""
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            continue
        yield lineno, (_split(stripped) if stripped else None)


def _header(rows, required, source):
    for lineno, fields in rows:
        if fields is None:
            continue
        names = [f.lower() for f in fields]
        for col in required:
            if col not in names:
                raise MissingColumn(col, source=source)
        return {name: i for i, name in enumerate(names)}
    raise MissingColumn(required[0], source=source)


def _float(fields, cols, name, lineno, source):
    try:
        value = float(fields[cols[name]])
    except IndexError:
        raise ParseError(f"row has {len(fields)} fields, missing {name!r}", lineno, source) from None
    except ValueError:
        raise ParseError(f"{name}={fields[cols[name]]!r} is not a number", lineno, source) from None
    return value


def iter_scans(source, doppler_sign: float = 1.0) -> Iterator[RadarScan]:
    """Lazily group detection rows into scans, yielding each once complete."""
    name = source if isinstance(source, (str, Path)) else getattr(source, "name", "<stream>")
    with _open(source, "r") as fh:
        rows = _rows(fh, name)
        cols = _header(rows, SCAN_COLUMNS, name)
        has_snr = "snr" in cols
        current_id = None
        current_t = None
        dets: list[Detection] = []
        last_id = None

        for lineno, fields in rows:
            if fields is None:
                if dets:
                    yield RadarScan(current_t, dets)
                    dets = []
                continue
            raw_id = fields[cols["scan_id"]] if len(fields) > cols["scan_id"] else ""
            try:
                scan_id = int(raw_id)
            except ValueError:
                raise ParseError(f"scan_id={raw_id!r} is not an integer", lineno, name) from None
            t = _float(fields, cols, "timestamp", lineno, name)
            x, y, z = (_float(fields, cols, c, lineno, name) for c in ("x", "y", "z"))
            doppler = _float(fields, cols, "doppler", lineno, name) * doppler_sign
            snr = 1.0
            if has_snr and len(fields) > cols["snr"] and fields[cols["snr"]] not in ("", "nan", "NaN"):
                snr = _float(fields, cols, "snr", lineno, name)
            if last_id is not None and scan_id < last_id:
                raise NonMonotonicScanId(f"scan_id {scan_id} after {last_id}", lineno, name)
            if scan_id != current_id:
                if dets:
                    yield RadarScan(current_t, dets)
                    dets = []
                current_id, current_t = scan_id, t
            elif t != current_t:
                raise ParseError(
                    f"scan {scan_id} has timestamps {current_t!r} and {t!r}", lineno, name
                )
            if not dets:
                current_t = t
            if math.sqrt(x * x + y * y + z * z) < 1e-9:
                raise ParseError("detection at zero range", lineno, name)
            try:
                dets.append(Detection((x, y, z), doppler, snr))
            except ValueError as exc:
                raise ParseError(str(exc), lineno, name) from None
            last_id = scan_id
        if dets:
            yield RadarScan(current_t, dets)


def parse_scan_file(source, doppler_sign: float = 1.0) -> list[RadarScan]:
    """Read every scan from a path, ``"-"`` (stdin) or an open text stream."""
    return list(iter_scans(source, doppler_sign))


def write_scan_file(scans: Iterable[RadarScan], target, exact: bool = True, with_snr: bool = True):
    """Write scans; ``exact`` uses round-trip formatting instead of 9 digits."""
    f = fmt_exact if exact else fmt
    with _open(target, "w") as fh:
        fh.write(",".join(SCAN_COLUMNS + (("snr",) if with_snr else ())) + "\n")
        for sid, scan in enumerate(scans):
            t = fmt_exact(scan.timestamp)
            for d in scan.detections:
                row = [str(sid), t, *(f(p) for p in d.position), f(d.doppler)]
                if with_snr:
                    row.append(f(d.snr))
                fh.write(",".join(row) + "\n")


def estimate_row(e: VelocityEstimate) -> str:
    vel = [fmt(x) for x in e.velocity]
    return ",".join(
        [fmt_exact(e.timestamp), *vel, e.status.value, str(e.inlier_count), str(e.total_count), fmt(e.residual_rms)]
    )


def write_estimate_log(estimates: Iterable[VelocityEstimate], target):
    with _open(target, "w") as fh:
        fh.write(",".join(ESTIMATE_COLUMNS) + "\n")
        for e in estimates:
            fh.write(estimate_row(e) + "\n")


def read_estimate_log(source) -> list[VelocityEstimate]:
    name = source if isinstance(source, (str, Path)) else getattr(source, "name", "<stream>")
    out = []
    with _open(source, "r") as fh:
        rows = _rows(fh, name)
        cols = _header(rows, ESTIMATE_COLUMNS, name)
        for lineno, fields in rows:
            if fields is None:
                continue
            try:
                status = EstimateStatus(fields[cols["status"]])
            except (ValueError, IndexError):
                raise ParseError("missing or unknown status", lineno, name) from None
            t = _float(fields, cols, "timestamp", lineno, name)
            v = [_float(fields, cols, c, lineno, name) for c in ("vx", "vy", "vz")]
            rms = _float(fields, cols, "residual_rms", lineno, name)
            try:
                inl, tot = int(fields[cols["inliers"]]), int(fields[cols["total"]])
                out.append(VelocityEstimate(t, v, status, inl, tot, rms))
            except ValueError as exc:
                raise ParseError(str(exc), lineno, name) from None
    return out


def read_gt_file(source) -> list[GroundTruthSample]:
    """Read ground truth; missing angular velocity is taken as zero."""
    name = source if isinstance(source, (str, Path)) else getattr(source, "name", "<stream>")
    out = []
    with _open(source, "r") as fh:
        rows = _rows(fh, name)
        cols = _header(rows, GT_COLUMNS, name)
        has_w = all(c in cols for c in GT_OPTIONAL)
        if not has_w:
            log.warning("%s: no angular velocity columns; assuming zero", name)
        for lineno, fields in rows:
            if fields is None:
                continue
            t = _float(fields, cols, "timestamp", lineno, name)
            v = [_float(fields, cols, c, lineno, name) for c in ("vx", "vy", "vz")]
            w = [_float(fields, cols, c, lineno, name) for c in GT_OPTIONAL] if has_w else [0.0] * 3
            try:
                out.append(GroundTruthSample(t, v, w))
            except ValueError as exc:
                raise ParseError(str(exc), lineno, name) from None
    ts = np.array([s.timestamp for s in out])
    if np.any(np.diff(ts) <= 0):
        raise ParseError("ground-truth timestamps must be strictly increasing", source=name)
    return out


def write_gt_file(samples: Iterable[GroundTruthSample], target):
    with _open(target, "w") as fh:
        fh.write(",".join(GT_COLUMNS + GT_OPTIONAL) + "\n")
        for s in samples:
            vals = [fmt_exact(s.timestamp), *(fmt_exact(x) for x in s.velocity), *(fmt_exact(x) for x in s.angular_velocity)]
            fh.write(",".join(vals) + "\n")


def dumps_scans(scans, **kwargs) -> str:
    buf = io.StringIO()
    write_scan_file(scans, buf, **kwargs)
    return buf.getvalue()
