"""Command-line client for the phasorguard service.

Every data-processing subcommand builds a JSON request and sends it
through the HTTP API; by default an in-process instance of the service
handles it, with --server pointing the same commands at a remote one.
File reading/writing stays on the client side.

Exit codes: 0 normal, 2 attack detected, 3 event detected,
64 configuration error, 65 data format error.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click
import httpx

from .csvio import verdicts_from_jsonl
from .errors import DataFormatError

EXIT_CONFIG = 64
EXIT_DATA = 65


class _SyncASGITransport(httpx.BaseTransport):
    """Drive the async ASGI transport from a synchronous client."""

    def __init__(self, app):
        self._async = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        import asyncio

        async def call():
            resp = await self._async.handle_async_request(request)
            body = await resp.aread()
            await resp.aclose()
            return httpx.Response(
                status_code=resp.status_code,
                headers=resp.headers,
                content=body,
                request=request,
            )

        return asyncio.run(call())


class ServiceClient:
    """Thin wrapper: in-process ASGI by default, HTTP when --server given."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=300.0)
        else:
            from .service.app import app

            self._client = httpx.Client(
                transport=_SyncASGITransport(app),
                base_url="http://phasorguard.local",
                timeout=None,
            )

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except Exception:
                detail = resp.text
            code = EXIT_DATA if resp.status_code == 400 else EXIT_CONFIG
            raise click.exceptions.Exit(_fail(f"service error: {detail}", code))
        return resp.json()


def _fail(message: str, code: int) -> int:
    click.echo(f"error: {message}", err=True)
    return code


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise click.exceptions.Exit(_fail(f"config not found: {path}", EXIT_CONFIG))
    except json.JSONDecodeError as exc:
        raise click.exceptions.Exit(_fail(f"bad config JSON: {exc}", EXIT_CONFIG))


def _read_channel_models(path: str) -> list[dict]:
    from .csvio import read_channels_csv

    try:
        channels = read_channels_csv(path)
    except FileNotFoundError:
        raise click.exceptions.Exit(_fail(f"input not found: {path}", EXIT_DATA))
    except DataFormatError as exc:
        raise click.exceptions.Exit(_fail(str(exc), EXIT_DATA))
    return [
        {
            "channel_id": ch.channel_id,
            "rate_hz": ch.rate_hz,
            "t0": ch.t0,
            "angles_deg": [float(v) for v in ch.angles_deg],
            "magnitudes": [float(v) for v in ch.magnitudes]
            if ch.magnitudes is not None
            else None,
        }
        for ch in channels
    ]


def _models_to_csv(models: list[dict]) -> str:
    import numpy as np

    from .angles import ChannelSeries
    from .csvio import channels_to_csv

    channels = [
        ChannelSeries(
            channel_id=m["channel_id"],
            rate_hz=m["rate_hz"],
            t0=m["t0"],
            angles_deg=np.asarray(m["angles_deg"]),
            magnitudes=np.asarray(m["magnitudes"])
            if m.get("magnitudes") is not None
            else None,
        )
        for m in models
    ]
    return channels_to_csv(channels)


def _write(out_dir: str, name: str, content: str) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(content, encoding="utf-8")
    return path


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; "
              "default handles requests in-process.")
@click.option("--config", "config_path", default=None, help="JSON config file.")
@click.option("--seed", default=None, type=int, help="Root seed override.")
@click.option("--out", "out_dir", default="out", show_default=True,
              help="Output directory.")
@click.option("--format", "out_format", default="jsonl",
              type=click.Choice(["csv", "jsonl"]), show_default=True,
              help="Verdict output format.")
@click.pass_context
def main(ctx, server, config_path, seed, out_dir, out_format):
    """Synchrophasor timing-attack detection toolkit."""
    ctx.ensure_object(dict)
    ctx.obj.update(
        server=server, config_path=config_path, seed=seed,
        out_dir=out_dir, out_format=out_format,
    )


def _ctx_config(ctx, required: bool = False) -> dict:
    path = ctx.obj.get("config_path")
    if path is None:
        if required:
            raise click.exceptions.Exit(_fail("--config is required", EXIT_CONFIG))
        return {}
    return _load_json(path)


def _apply_seed(ctx, cfg: dict) -> dict:
    seed = ctx.obj.get("seed")
    if seed is not None:
        cfg = dict(cfg)
        cfg["seed"] = seed
        if "sim" in cfg and isinstance(cfg["sim"], dict):
            cfg["sim"] = {**cfg["sim"], "seed": seed}
    return cfg


@main.command()
@click.pass_context
def simulate(ctx):
    """Generate clean channel CSVs from the sim section of the config."""
    cfg = _apply_seed(ctx, _ctx_config(ctx, required=True))
    sim = cfg.get("sim", cfg)
    client = ServiceClient(ctx.obj["server"])
    resp = client.post("/simulate", {"sim": sim})
    path = _write(ctx.obj["out_dir"], "channels.csv", _models_to_csv(resp["channels"]))
    click.echo(f"wrote {path}")


@main.command()
@click.option("--input", "input_path", required=True, help="Channel capture CSV.")
@click.pass_context
def inject(ctx, input_path):
    """Apply the config's events/fdia/timing to a capture."""
    cfg = _apply_seed(ctx, _ctx_config(ctx, required=True))
    models = _read_channel_models(input_path)
    client = ServiceClient(ctx.obj["server"])
    suffix = []
    for ev in cfg.get("events", []):
        models = client.post("/inject/event", {"channels": models, "event": ev})["channels"]
        suffix.append("event")
    if cfg.get("fdia"):
        models = client.post(
            "/inject/fdia",
            {"channels": models, "fdia": cfg["fdia"], "seed": cfg.get("seed", 0)},
        )["channels"]
        suffix.append("fdia")
    if cfg.get("timing"):
        models = client.post(
            "/inject/timing", {"channels": models, "timing": cfg["timing"]}
        )["channels"]
        suffix.append("timing")
    name = "channels_" + ("_".join(suffix) if suffix else "copy") + ".csv"
    path = _write(ctx.obj["out_dir"], name, _models_to_csv(models))
    click.echo(f"wrote {path}")


@main.command()
@click.option("--input", "input_path", required=True, help="Channel capture CSV.")
@click.pass_context
def unwrap(ctx, input_path):
    """Add unwrapped_deg and roc columns to a capture."""
    models = _read_channel_models(input_path)
    client = ServiceClient(ctx.obj["server"])
    resp = client.post("/unwrap", {"channels": models})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time_s", "channel_id", "angle_deg", "magnitude_pu",
                "unwrapped_deg", "roc"])
    for ch in sorted(resp["channels"], key=lambda c: c["channel_id"]):
        mags = ch.get("magnitudes") or [1.0] * len(ch["angles_deg"])
        for i, (a, m, u, r) in enumerate(
            zip(ch["angles_deg"], mags, ch["unwrapped_deg"], ch["roc"])
        ):
            t = ch["t0"] + i / ch["rate_hz"]
            w.writerow([repr(float(t)), ch["channel_id"], repr(float(a)),
                        repr(float(m)), repr(float(u)), int(r)])
    path = _write(ctx.obj["out_dir"], "unwrapped.csv", buf.getvalue())
    click.echo(f"wrote {path}")


@main.command()
@click.option("--input", "input_path", required=True, help="Channel capture CSV.")
@click.option("--domain", default="raw", type=click.Choice(["raw", "unwrapped"]),
              show_default=True)
@click.option("--permute", is_flag=True, help="Shuffle sample order first.")
@click.option("--hankel-rows", "L", default=None, type=int,
              help="Per-channel Hankel rows (default floor(n/2)+2).")
@click.option("--svg", is_flag=True, help="Also write an SVG chart.")
@click.pass_context
def profile(ctx, input_path, domain, permute, L, svg):
    """Write the low-rank approximation error profile as CSV."""
    models = _read_channel_models(input_path)
    client = ServiceClient(ctx.obj["server"])
    resp = client.post("/profile", {
        "channels": models, "domain": domain, "permuted": permute,
        "seed": ctx.obj.get("seed") or 0, "L": L,
    })
    from .csvio import profile_to_csv

    path = _write(ctx.obj["out_dir"], "profile.csv",
                  profile_to_csv(resp["errors_pct"]))
    click.echo(f"wrote {path}")
    if svg:
        import numpy as np

        from .figures import svg_line_chart

        errors = np.asarray(resp["errors_pct"])
        ranks = np.arange(1, errors.size + 1)
        chart = svg_line_chart(
            [(domain, ranks, errors)],
            title="Low-rank approximation error",
            xlabel="rank r", ylabel="error (%)",
        )
        svg_path = _write(ctx.obj["out_dir"], "profile.svg", chart)
        click.echo(f"wrote {svg_path}")


def _verdict_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["window_index", "window_start", "verdict"])
    for r in records:
        w.writerow([r["window_index"], repr(float(r["window_start"])), r["verdict"]])
    return buf.getvalue()


@main.command()
@click.option("--input", "input_path", required=True, help="Channel capture CSV.")
@click.option("--calibrate-with", "cal_path", default=None,
              help="Clean capture CSV used to fit the anomaly gate.")
@click.option("--stride", default=None, type=int,
              help="Window hop in samples (default: the window length).")
@click.pass_context
def detect(ctx, input_path, cal_path, stride):
    """Classify consecutive windows; exit 0 normal / 2 attack / 3 event."""
    cfg = _ctx_config(ctx)
    detector = cfg.get("detector", {})
    if ctx.obj.get("seed") is not None:
        detector = {**detector, "seed": ctx.obj["seed"]}
    if stride is not None:
        detector = {**detector, "stride": stride}
    payload = {"channels": _read_channel_models(input_path), "detector": detector}
    if cal_path:
        payload["calibration_channels"] = _read_channel_models(cal_path)
    client = ServiceClient(ctx.obj["server"])
    resp = client.post("/detect", payload)
    records = [
        {
            "window_index": c["window_index"],
            "window_start": c["window_start"],
            "verdict": c["verdict"],
            "e_r": c["evidence"]["e_r"],
            "e_rr": c["evidence"]["e_rr"],
            "e_ru": c["evidence"]["e_ru"],
            "gate_level": c["evidence"]["gate_level"],
            "gate_fired": c["evidence"]["gate_fired"],
        }
        for c in resp["classifications"]
    ]
    if ctx.obj["out_format"] == "csv":
        path = _write(ctx.obj["out_dir"], "verdicts.csv", _verdict_csv(records))
    else:
        lines = [json.dumps(r, sort_keys=True) for r in records]
        path = _write(ctx.obj["out_dir"], "verdicts.jsonl", "\n".join(lines) + "\n")
    counts: dict[str, int] = {}
    for r in records:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    click.echo(f"wrote {path} verdicts={counts}")
    sys.exit(resp["exit_code"])


@main.command()
@click.pass_context
def run(ctx):
    """Full experiment: simulate, inject, detect, figures, verdicts."""
    cfg = _apply_seed(ctx, _ctx_config(ctx, required=True))
    client = ServiceClient(ctx.obj["server"])
    resp = client.post("/run", {"experiment": cfg})
    for name, content in sorted(resp["files"].items()):
        _write(ctx.obj["out_dir"], name, content)
    click.echo(f"config_sha256={resp['config_sha256']}")
    for variant, verdicts in resp["verdicts"].items():
        click.echo(f"{variant}: {verdicts}")
    click.echo(f"wrote {len(resp['files'])} files to {ctx.obj['out_dir']}")
    sys.exit(resp["exit_code"])


@main.command()
@click.option("--input", "input_path", required=True, help="Verdict JSONL file.")
@click.pass_context
def report(ctx, input_path):
    """Summarize a verdict file; exit code mirrors the verdicts."""
    try:
        text = Path(input_path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise click.exceptions.Exit(_fail(f"input not found: {input_path}", EXIT_DATA))
    try:
        meta, records = verdicts_from_jsonl(text)
    except DataFormatError as exc:
        raise click.exceptions.Exit(_fail(str(exc), EXIT_DATA))
    counts: dict[str, int] = {}
    for r in records:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    lines = ["# Detection report", ""]
    if meta:
        lines.append(f"- config: `{meta.get('config_sha256', 'n/a')}`"
                     f" seed {meta.get('seed', 'n/a')}"
                     f" variant {meta.get('variant', 'n/a')}")
    lines.append(f"- windows: {len(records)}")
    for verdict in ("Normal", "Event", "FDIA", "TimingAttack"):
        if verdict in counts:
            lines.append(f"- {verdict}: {counts[verdict]}")
    lines += ["", "| window | start (s) | verdict |", "|---|---|---|"]
    for r in records:
        lines.append(f"| {r['window_index']} | {r['window_start']:.3f} "
                     f"| {r['verdict']} |")
    content = "\n".join(lines) + "\n"
    path = _write(ctx.obj["out_dir"], "report.md", content)
    click.echo(content)
    click.echo(f"wrote {path}")
    if counts.get("FDIA") or counts.get("TimingAttack"):
        sys.exit(2)
    if counts.get("Event"):
        sys.exit(3)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8731, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("phasorguard.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
