"""Command-line entry point (``uavisac``)."""

import argparse
import json
import logging
import sys

from .config import ConfigError, load_config
from .exceptions import ProcessingError
from .params import derive_params
from .pipeline import build_params, run_experiment
from .waveform import export_sequence_csv, generate_golay_pair

EXIT_OK, EXIT_CONFIG, EXIT_PROCESSING = 0, 2, 3


def _parser():
    ap = argparse.ArgumentParser(prog="uavisac", description="UAV-swarm 802.11ad radar simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run synthesis, CLEAN and MUSIC from a config")
    sim.add_argument("--config", required=True, help="JSON file or bundled preset name")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.add_argument("--profile", choices=("paper", "desk"), default=None)
    sim.add_argument("--pol", choices=("H", "V", "both"), default="both")
    sim.add_argument("--export-cubes", action="store_true",
                     help="also write raw complex64 data cubes")

    der = sub.add_parser("derive", help="print derived radar quantities")
    der.add_argument("--config", required=True)
    der.add_argument("--profile", choices=("paper", "desk"), default=None)

    gol = sub.add_parser("golay", help="write one member of a Golay pair as CSV")
    gol.add_argument("--length", type=int, required=True)
    gol.add_argument("--member", choices=("a", "b"), default="a")
    gol.add_argument("--out", required=True)
    return ap


def _simulate(args):
    cfg = load_config(args.config)
    pols = ("H", "V") if args.pol == "both" else (args.pol,)
    report = run_experiment(cfg, args.out, profile=args.profile, seed=args.seed,
                            polarizations=pols, export_cubes=args.export_cubes)
    for d in report.detections:
        print(f"{d.polarization} r={d.range:.3f} m v={d.velocity:.3f} m/s "
              f"az={d.azimuth:.2f} el={d.elevation:.2f} power={d.power_db:.2f} dB")
    return EXIT_OK


def _derive(args):
    cfg = load_config(args.config)
    p = build_params(cfg, args.profile or cfg.scale_profile)
    out = derive_params(p.carrier_frequency, p.bandwidth, p.pri, p.cpi)
    out["n_fast"] = p.n_fast
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def _golay(args):
    pair = generate_golay_pair(args.length)
    export_sequence_csv(pair.a if args.member == "a" else pair.b, args.out)
    return EXIT_OK


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"simulate": _simulate, "derive": _derive, "golay": _golay}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProcessingError as exc:
        print(f"processing error: {exc}", file=sys.stderr)
        return EXIT_PROCESSING
    except ValueError as exc:
        # argument-level problems outside a config (e.g. golay length)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
