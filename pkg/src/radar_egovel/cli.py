"""Command-line entry point: ``radar-egovel {estimate,eval,synth}``.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O or parse
error, 3 empty result.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from .config import load_config
from .errors import ConfigError, NoPairs, ParseError
from .evaluation import ExtrinsicSpec, GroundTruthSample, score
from .io import (
    ESTIMATE_COLUMNS,
    estimate_row,
    iter_scans,
    read_estimate_log,
    read_gt_file,
    write_gt_file,
    write_scan_file,
    _open,
)
from .pipeline import EgoVelocityEstimator
from .synth import SceneSpec, constant_profile, generate_trajectory_stream, sinusoidal_profile

log = logging.getLogger("radar_egovel")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_EMPTY = 0, 1, 2, 3


def _floats(text, n, what):
    try:
        vals = [float(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what}: expected {n} comma-separated numbers") from None
    if len(vals) != n:
        raise argparse.ArgumentTypeError(f"{what}: expected {n} values, got {len(vals)}")
    return vals


def cmd_estimate(args) -> int:
    cfg = load_config(args.config)
    estimator = EgoVelocityEstimator(cfg)
    count = 0
    with _open(args.output, "w") as out:
        out.write(",".join(ESTIMATE_COLUMNS) + "\n")
        for scan in iter_scans(args.input):
            out.write(estimate_row(estimator.process_scan(scan)) + "\n")
            out.flush()
            count += 1
    if count == 0:
        log.error("no scans found in %s", args.input)
        return EXIT_EMPTY
    return EXIT_OK


def cmd_eval(args) -> int:
    estimates = read_estimate_log(args.estimates)
    gt = read_gt_file(args.gt)
    rotation = np.array(args.rotation).reshape(3, 3) if args.rotation else np.eye(3)
    try:
        ext = ExtrinsicSpec(args.lever_arm or np.zeros(3), rotation)
    except ValueError as exc:
        raise ConfigError(f"extrinsics: {exc}") from None
    try:
        report = score(estimates, gt, ext)
    except NoPairs as exc:
        log.error("%s: %s", args.estimates, exc)
        return EXIT_EMPTY
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.report:
        with _open(args.report, "w") as fh:
            fh.write(text)
    table_stream = sys.stderr if args.report == "-" else sys.stdout
    print(report.format_table(), file=table_stream)
    return EXIT_OK


STREAM_KEYS = {"rate", "duration", "profile", "velocity", "amplitude", "frequency", "wild_indices", "wild_offset", "t0"}


def load_synth_spec(path):
    """Parse a synth YAML file into ``(SceneSpec, stream settings)``."""
    data = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    unknown = set(data) - {"scene", "stream"}
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown synth key {key!r}", key=key)
    scene = dict(data.get("scene") or {})
    known = {f.name for f in dataclasses.fields(SceneSpec)}
    for key in scene:
        if key not in known:
            raise ConfigError(f"unknown synth key 'scene.{key}'", key=f"scene.{key}")
    for key in ("ego_velocity", "range_interval", "snr_interval", "dynamic_offset_interval"):
        if scene.get(key) is not None:
            scene[key] = tuple(scene[key])
    stream = dict(data.get("stream") or {})
    for key in stream:
        if key not in STREAM_KEYS:
            raise ConfigError(f"unknown synth key 'stream.{key}'", key=f"stream.{key}")
    try:
        return SceneSpec(**scene), stream
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"scene: {exc}") from None


def cmd_synth(args) -> int:
    spec, stream = load_synth_spec(args.spec)
    velocity = stream.get("velocity", spec.ego_velocity)
    kind = stream.get("profile", "constant")
    if kind == "constant":
        profile = constant_profile(velocity)
    elif kind in ("sine", "sinusoidal"):
        profile = sinusoidal_profile(velocity, stream.get("amplitude", (0.0, 0.0, 0.0)), stream.get("frequency", 0.1))
    else:
        raise ConfigError(f"stream.profile: unknown profile {kind!r}", key="stream.profile")
    ticks = generate_trajectory_stream(
        profile,
        rate=float(stream.get("rate", 10.0)),
        duration=float(stream.get("duration", 10.0)),
        spec=spec,
        wild_indices=stream.get("wild_indices", ()),
        wild_offset=stream.get("wild_offset", (10.0, 0.0, 0.0)),
        t0=float(stream.get("t0", 0.0)),
    )
    write_scan_file([s for s, _ in ticks], args.output)
    if args.gt:
        write_gt_file([GroundTruthSample(s.timestamp, v) for s, v in ticks], args.gt)
    if not ticks:
        return EXIT_EMPTY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radar-egovel", description="Radar ego-velocity estimation")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate ego-velocity for every scan")
    p.add_argument("--config", default=None, help="YAML config (defaults if omitted)")
    p.add_argument("--input", required=True, help="scan file, or - for stdin")
    p.add_argument("--output", required=True, help="estimate log, or - for stdout")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("eval", help="score an estimate log against ground truth")
    p.add_argument("--estimates", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--lever-arm", type=lambda s: _floats(s, 3, "--lever-arm"), default=None, metavar="X,Y,Z")
    p.add_argument("--rotation", type=lambda s: _floats(s, 9, "--rotation"), default=None, metavar="R00,...,R22")
    p.add_argument("--report", default=None, help="JSON report path, or - for stdout")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic scan fixture")
    p.add_argument("--spec", required=True, help="YAML with 'scene' and 'stream' sections")
    p.add_argument("--output", required=True, help="scan file, or - for stdout")
    p.add_argument("--gt", default=None, help="also write ground truth here")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_USAGE
    except (OSError, ParseError) as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
