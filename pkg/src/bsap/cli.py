"""Command-line driver.

Subcommands
-----------
spectrum     eigenvalue tracks of the interpolated Hamiltonian at one coupling point
prepare      full pipeline for one coupling point, printing the resulting record
sweep        grid sweep over coupling ratios, writing the result CSV
ap-baseline  same sweep driven from the non-degenerate field start

Every subcommand accepts ``--config <json>`` plus overriding flags; flags win
over file values.  Exit codes: 0 success, 2 invalid configuration, 3 resource
guard tripped.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, ResourceLimitError
from .experiment import (
    CSV_HEADER,
    ExperimentConfig,
    cmd_ap_baseline,
    cmd_prepare,
    cmd_spectrum,
    cmd_sweep,
    config_from_dict,
    config_to_dict,
    load_config,
    record_to_row,
    validate_config,
    write_json_bundle,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bsap",
        description="Adiabatic eigenstate preparation on the XYZ ring (statevector).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--L", type=int, help="ring size (even, 4..12)")
        p.add_argument("--grid", type=int, help="points per grid axis (spectrum: s samples)")
        p.add_argument("--steps", type=int, help="number of evolution steps N")
        p.add_argument("--dt", type=float, help="step duration in units of 1/J^z")
        p.add_argument("--parity", type=int, help="spin-flip sector, +1 or -1")
        p.add_argument("--level-n", type=int, help="starting level index (0 or 1)")
        p.add_argument("--level-rank", type=int, help="target rank within the addressed sector")
        p.add_argument("--mode", choices=("trotter", "exact"), help="stepping mode")
        p.add_argument("--method", choices=("bsap", "ap-baseline"), help="initial-Hamiltonian family")
        p.add_argument("--seed", type=int, help="seed for optimizer restarts")
        p.add_argument("--out", help="output file path")
        p.add_argument("--workers", type=int, help="worker processes for grid cells")
        p.add_argument("--json", dest="json_out", metavar="PATH",
                       help="also write a JSON bundle (config echo + records)")

    p_spectrum = sub.add_parser("spectrum", help="export eigenvalue tracks along the schedule")
    p_spectrum.add_argument("jx_ratio", type=float, help="J^x/J^z in [0, 1]")
    p_spectrum.add_argument("jy_ratio", type=float, help="J^y/J^x in [0, 1]")
    add_common(p_spectrum)

    p_prepare = sub.add_parser("prepare", help="run one coupling point end to end")
    p_prepare.add_argument("jx_ratio", type=float, help="J^x/J^z in [0, 1]")
    p_prepare.add_argument("jy_ratio", type=float, help="J^y/J^x in [0, 1]")
    add_common(p_prepare)

    p_sweep = sub.add_parser("sweep", help="full coupling-ratio grid sweep")
    add_common(p_sweep)

    p_ap = sub.add_parser("ap-baseline", help="grid sweep from the non-degenerate field start")
    add_common(p_ap)

    return parser


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    data = config_to_dict(load_config(args.config)) if args.config else {}
    if args.command == "ap-baseline":
        data["method"] = "ap-baseline"
    elif args.method is not None:
        data["method"] = args.method
    overrides = {
        "L": args.L,
        "grid_points": args.grid,
        "num_steps": args.steps,
        "step_duration": args.dt,
        "stepping_mode": args.mode,
        "seed": args.seed,
        "out": args.out,
        "workers": args.workers,
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if args.parity is not None or args.level_n is not None or args.level_rank is not None:
        method = data.get("method", "bsap")
        if method == "ap-baseline":
            n = -1
            parity = 0
        else:
            n = args.level_n if args.level_n is not None else 0
            parity = args.parity if args.parity is not None else 1
        rank = args.level_rank if args.level_rank is not None else (1 if n == 1 else 0)
        data["levels"] = [[n, parity, rank]]
    if "L" not in data:
        raise ConfigError("the ring size is required: pass --L or a config file setting it")
    return validate_config(config_from_dict(data))


def _print_records(records) -> None:
    print(CSV_HEADER)
    for record in records:
        print(record_to_row(record))


def _dispatch(args: argparse.Namespace) -> int:
    config = _build_config(args)
    if args.command == "spectrum":
        s_points = config.grid_points if args.grid is not None else 41
        flow = cmd_spectrum(config, args.jx_ratio, args.jy_ratio, s_points)
        print(
            f"tracked {flow.eigenvalue_tracks.shape[1]} eigenvalues "
            f"over {len(flow.s_grid)} schedule points"
        )
        for event in flow.crossings:
            print(
                f"crossing: pair ({event.pair_index}, {event.pair_index + 1}) "
                f"at s={event.s:.6f} (gap {event.gap:.3e})"
            )
        if not flow.crossings:
            print("no level crossings flagged")
        if config.out:
            print(f"wrote {config.out}")
        records = []
    elif args.command == "prepare":
        records = cmd_prepare(config, args.jx_ratio, args.jy_ratio)
        _print_records(records)
        if config.out:
            print(f"appended {len(records)} record(s) to {config.out}")
    elif args.command == "sweep":
        records = cmd_sweep(config)
        print(f"swept {config.grid_points}x{config.grid_points} grid: {len(records)} records")
        if records:
            print(f"max error {max(r.error for r in records):.6f}")
        if config.out:
            print(f"wrote {config.out}")
    else:  # ap-baseline
        records = cmd_ap_baseline(config)
        print(f"swept {config.grid_points}x{config.grid_points} grid: {len(records)} records")
        if records:
            print(f"max error {max(r.error for r in records):.6f}")
        if config.out:
            print(f"wrote {config.out}")
    if args.json_out:
        write_json_bundle(config, records, args.json_out)
        print(f"wrote {args.json_out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
