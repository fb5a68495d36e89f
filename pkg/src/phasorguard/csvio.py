"""File formats: channel CSV, unwrap CSV, profile CSV, verdict JSON Lines.

Channel capture format (one file per capture):
    header  time_s,channel_id,angle_deg,magnitude_pu
    rows sorted by (channel_id, time_s), UTF-8, '.' decimal point.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .angles import ChannelSeries, TIME_TOL_S
from .detector import Classification
from .errors import DataFormatError

CHANNEL_HEADER = ["time_s", "channel_id", "angle_deg", "magnitude_pu"]
UNWRAP_HEADER = CHANNEL_HEADER + ["unwrapped_deg", "roc"]


def channels_to_csv(channels: list[ChannelSeries]) -> str:
    """Render aligned channel series in the capture format."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CHANNEL_HEADER)
    for ch in sorted(channels, key=lambda c: c.channel_id):
        mags = ch.magnitudes if ch.magnitudes is not None else np.ones(ch.n)
        for t, a, m in zip(ch.timestamps(), ch.angles_deg, mags):
            w.writerow([repr(float(t)), ch.channel_id, repr(float(a)), repr(float(m))])
    return buf.getvalue()


def write_channels_csv(channels: list[ChannelSeries], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(channels_to_csv(channels))


def channels_from_csv(text: str) -> list[ChannelSeries]:
    """Parse the capture format back into channel series."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("empty CSV")
    if [h.strip() for h in header] != CHANNEL_HEADER:
        raise DataFormatError(
            f"unexpected header {header!r}; want {','.join(CHANNEL_HEADER)}"
        )
    rows_by_channel: dict[str, list[tuple[float, float, float]]] = {}
    for i, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise DataFormatError(f"line {i}: expected 4 fields, got {len(row)}")
        try:
            t, a, m = float(row[0]), float(row[2]), float(row[3])
        except ValueError as exc:
            raise DataFormatError(f"line {i}: {exc}") from exc
        rows_by_channel.setdefault(row[1], []).append((t, a, m))
    if not rows_by_channel:
        raise DataFormatError("no data rows")
    channels = []
    for cid, rows in rows_by_channel.items():
        rows.sort(key=lambda r: r[0])
        t = np.array([r[0] for r in rows])
        if t.size < 2:
            raise DataFormatError(f"channel {cid}: needs at least 2 samples")
        dt = np.diff(t)
        if np.any(np.abs(dt - dt[0]) > TIME_TOL_S):
            raise DataFormatError(f"channel {cid}: non-uniform sample spacing")
        channels.append(
            ChannelSeries(
                channel_id=cid,
                rate_hz=1.0 / dt[0],
                t0=float(t[0]),
                angles_deg=np.array([r[1] for r in rows]),
                magnitudes=np.array([r[2] for r in rows]),
            )
        )
    return channels


def read_channels_csv(path) -> list[ChannelSeries]:
    with open(path, encoding="utf-8") as f:
        return channels_from_csv(f.read())


def unwrap_to_csv(channels: list[ChannelSeries]) -> str:
    """Capture format plus per-sample unwrapped angle and roll-over count."""
    from .unwrap import unwrap_series

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(UNWRAP_HEADER)
    for ch in sorted(channels, key=lambda c: c.channel_id):
        mags = ch.magnitudes if ch.magnitudes is not None else np.ones(ch.n)
        res = unwrap_series(ch.angles_deg)
        for t, a, m, u, r in zip(
            ch.timestamps(), ch.angles_deg, mags, res.unwrapped_deg, res.roc
        ):
            w.writerow(
                [
                    repr(float(t)),
                    ch.channel_id,
                    repr(float(a)),
                    repr(float(m)),
                    repr(float(u)),
                    int(r),
                ]
            )
    return buf.getvalue()


def profile_to_csv(errors_pct) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "error_pct"])
    for r, e in enumerate(np.asarray(errors_pct), start=1):
        w.writerow([r, repr(float(e))])
    return buf.getvalue()


def _profile_list(arr) -> list[float] | None:
    if arr is None:
        return None
    return [float(v) for v in arr]


def classification_to_dict(c: Classification) -> dict:
    return {
        "window_index": c.window_index,
        "window_start": c.window_start,
        "verdict": c.verdict.value,
        "e_r": _profile_list(c.evidence.e_r),
        "e_rr": _profile_list(c.evidence.e_rr),
        "e_ru": _profile_list(c.evidence.e_ru),
        "gate_level": c.evidence.gate_level,
        "gate_fired": c.evidence.gate_fired,
    }


def verdicts_to_jsonl(
    classifications: list[Classification], meta: dict | None = None
) -> str:
    """One JSON object per window; optional leading metadata record."""
    lines = []
    if meta is not None:
        lines.append(json.dumps({"meta": meta}, sort_keys=True))
    for c in classifications:
        lines.append(json.dumps(classification_to_dict(c), sort_keys=True))
    return "\n".join(lines) + "\n"


def verdicts_from_jsonl(text: str) -> tuple[dict | None, list[dict]]:
    meta = None
    records = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"line {i}: {exc}") from exc
        if "meta" in obj and i == 1:
            meta = obj["meta"]
        else:
            records.append(obj)
    return meta, records
