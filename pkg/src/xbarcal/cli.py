"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 protocol error,
4 device-state error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from .autocal import calibrate_row, sweep_stage
from .caldac import dac_output
from .config import ExperimentConfig, load_config
from .crossbar import Crossbar
from .devices import Operation
from .errors import ConfigError, DeviceStateError, ModelValidityError, ProtocolError
from .experiments import run_montecarlo
from .protocol import ControlFrame, OpSelect, decode_frame, decode_opselect, encode_frame

EXIT_CONFIG = 2
EXIT_PROTOCOL = 3
EXIT_DEVICE = 4

SWEEP_HEADER = ["stage", "code", "v_cal_volts", "mean_offset_volts", "stderr_volts", "n_samples", "seed"]


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _emit_json(doc: dict, args):
    if not args.no_timestamp:
        doc = {"generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"), **doc}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be >= 0")
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _crossbar(cfg: ExperimentConfig, **overrides) -> Crossbar:
    return Crossbar(cfg.rows, cfg.cols, cfg.crossbar_params(**overrides), seed=cfg.seed)


def _check_row(cfg: ExperimentConfig, row: int):
    if not 0 <= row < cfg.rows:
        raise ConfigError(f"row {row} outside 0..{cfg.rows - 1}")


def _parse_prefix(text: str | None) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"--prefix must be comma-separated integers, got {text!r}") from None


def cmd_sweep(args) -> int:
    cfg = _config(args)
    _check_row(cfg, args.row)
    xbar = _crossbar(cfg)
    try:
        record = sweep_stage(
            xbar, args.row, args.stage, _parse_prefix(args.prefix), cfg.n_samples, cfg.seed, exact=args.exact_sampling
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for value, m in record.points:
        v_cal = dac_output(record.code(value), xbar.ladder)
        writer.writerow([record.stage, value, repr(v_cal), repr(m.mean), repr(m.stderr), m.n_samples, m.seed])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_autocal(args) -> int:
    cfg = _config(args)
    _check_row(cfg, args.row)
    xbar = _crossbar(cfg)
    v_os = xbar.drivers[args.row].v_os_random
    res = calibrate_row(xbar, args.row, cfg.n_samples, cfg.seed, exact=args.exact_sampling)
    doc = {
        "row": args.row,
        "seed": cfg.seed,
        "v_os_random_volts": v_os,
        "v_cal_volts": dac_output(res.best_code, xbar.ladder),
        **res.to_dict(xbar.ladder),
    }
    _emit_json(doc, args)
    return 0


def cmd_montecarlo(args) -> int:
    cfg = _config(args)
    _check_row(cfg, args.row)
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if not 0 <= args.truncate:
        raise ConfigError("--truncate must be >= 0")
    limit = None
    if args.truncate > 0:
        limit = args.truncate * abs(cfg.eta) * cfg.v_d
    params = cfg.crossbar_params(offset_limit=limit)
    stats = run_montecarlo(
        params,
        args.trials,
        seed=cfg.seed,
        n_samples=cfg.n_samples,
        rows=cfg.rows,
        cols=cfg.cols,
        row=args.row,
        workers=args.workers,
        exact=args.exact_sampling,
    )
    doc = {"seed": cfg.seed, "n_samples": cfg.n_samples, "offset_limit_volts": limit, **stats}
    _emit_json(doc, args)
    return 0


def _parse_selection(text: str, cfg: ExperimentConfig) -> list[tuple[int, int]]:
    if text.strip() == "all":
        return [(r, c) for r in range(cfg.rows) for c in range(cfg.cols)]
    cells = []
    for item in filter(None, (s.strip() for s in text.split(";"))):
        try:
            r, c = (int(v) for v in item.split(","))
        except ValueError:
            raise ConfigError(f"bad cell {item!r}; expected 'row,col' pairs separated by ';'") from None
        if not (0 <= r < cfg.rows and 0 <= c < cfg.cols):
            raise ConfigError(f"cell {item!r} outside the {cfg.rows}x{cfg.cols} array")
        cells.append((r, c))
    return cells


def cmd_power(args) -> int:
    cfg = _config(args)
    cells = _parse_selection(args.select, cfg)
    xbar = _crossbar(cfg)
    for r, c in cells:
        xbar.target_cell_op(r, c, Operation.FORM)
        if args.state == "HRS":
            xbar.target_cell_op(r, c, Operation.RESET)
    v_read = args.v_read_mv * 1e-3
    per_cell = xbar.read_power_breakdown(cells, v_read)
    doc = {
        "v_read_volts": v_read,
        "state": args.state,
        "total_watts": xbar.read_power(cells, v_read),
        "per_cell": [{"row": r, "col": c, "watts": p} for (r, c), p in per_cell.items()],
    }
    _emit_json(doc, args)
    return 0


def cmd_frame(args) -> int:
    text = Path(args.input).read_text() if args.input else sys.stdin.read()
    if args.action == "encode":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"frame file is not valid JSON: {exc}") from exc
        _emit(encode_frame(ControlFrame.from_json(doc)) + "\n", args.out)
    else:
        if args.rows is None:
            args.rows = _config(args).rows
        frame = decode_frame(text, args.rows)
        _emit(json.dumps(frame.to_json(), indent=2) + "\n", args.out)
    return 0


def _parse_op(text: str) -> Operation:
    if set(text) <= {"0", "1"}:
        return decode_opselect(OpSelect.parse(text))
    try:
        return Operation(text.upper())
    except ValueError:
        raise ProtocolError(f"unknown operation {text!r}") from None


def cmd_pulse(args) -> int:
    cfg = _config(args)
    if not (0 <= args.row < cfg.rows and 0 <= args.col < cfg.cols):
        raise ConfigError(f"cell ({args.row}, {args.col}) outside the {cfg.rows}x{cfg.cols} array")
    ops = [_parse_op(t) for t in args.ops]
    xbar = _crossbar(cfg)
    steps = []
    for op in ops:
        current = xbar.target_cell_op(args.row, args.col, op)
        step = {"op": op.value, "state": xbar.cells[args.row][args.col].state.value}
        if current is not None:
            step["column_current_amps"] = current
        steps.append(step)
    _emit_json({"row": args.row, "col": args.col, "steps": steps}, args)
    return 0


def _global_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="experiment config JSON")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the config seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    common.add_argument("--exact-sampling", action="store_true", default=argparse.SUPPRESS,
                        help="draw every noise sample instead of the closed-form mean")
    common.add_argument("--no-timestamp", action="store_true", default=argparse.SUPPRESS,
                        help="omit generated_at from JSON reports")
    return common


def build_parser() -> argparse.ArgumentParser:
    # Global flags are accepted before or after the subcommand. Parent
    # parsers share action objects, so each level gets its own copy.
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="xbarcal", description=__doc__.splitlines()[0], parents=[common])
    parser.set_defaults(config=None, seed=None, out=None, exact_sampling=False, no_timestamp=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[_global_flags()], help="one calibration stage sweep as CSV")
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--stage", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--prefix", help="fixed higher-stage codes, e.g. '7' or '7,12'")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("autocal", parents=[_global_flags()], help="three-stage automatic calibration of one row")
    p.add_argument("--row", type=int, default=0)
    p.set_defaults(func=cmd_autocal)

    p = sub.add_parser("montecarlo", parents=[_global_flags()], help="calibration residuals over seeded trials")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--truncate", type=float, default=0.9,
                   help="redraw offsets beyond this fraction of the correctable range (0 disables)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("power", parents=[_global_flags()], help="read power of a set of cells")
    p.add_argument("--v-read-mv", type=float, default=50.0)
    p.add_argument("--select", default="all", help="'all' or 'r,c;r,c;...'")
    p.add_argument("--state", choices=("LRS", "HRS"), default="LRS")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("frame", parents=[_global_flags()], help="encode or decode a control frame")
    p.add_argument("action", choices=("encode", "decode"))
    p.add_argument("--in", dest="input", help="input file (default stdin)")
    p.add_argument("--rows", type=int, help="row count for decode (default: config rows)")
    p.set_defaults(func=cmd_frame)

    p = sub.add_parser("pulse", parents=[_global_flags()], help="apply FORM/SET/RESET/READ to one cell")
    p.add_argument("ops", nargs="+", help="operation names or ABC codes such as 000")
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--col", type=int, default=0)
    p.set_defaults(func=cmd_pulse)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProtocolError as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (DeviceStateError, ModelValidityError) as exc:
        print(f"device error: {exc}", file=sys.stderr)
        return EXIT_DEVICE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
