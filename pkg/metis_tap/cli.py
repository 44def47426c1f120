import argparse
import sys
from pathlib import Path

from . import __version__, logger, pipeline
from .config import RunConfig
from .ingest import EXPORT_FORMATS, GRAPH_JSON
from .merge import MergePolicy
from .structure import NameFilter

COMMANDS = ("ingest", "screen", "simtap", "dedupe", "export")


def parse_pair(value: str) -> tuple[str, str]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"expected a pair of character ids as a,b; got {value!r}")
    return parts[0], parts[1]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--records", type=Path, required=True, help="transaction records CSV")
    common.add_argument("--manifest", type=Path, help="dataset manifest JSON")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--strict", action="store_true", help="fail on malformed records")
    common.add_argument("--workers", type=int, default=1, help="worker processes for pair scoring")
    common.add_argument("--log-level", default=None, help="debug, info, warning or error")

    screening = argparse.ArgumentParser(add_help=False)
    screening.add_argument("--name-filter",
                           choices=[f.value for f in NameFilter],
                           default=NameFilter.OFF.value,
                           help="restrict candidate pairs by display name")

    anchored = argparse.ArgumentParser(add_help=False)
    anchored.add_argument("--now", type=int, help="reference time point (default: manifest now, else latest end)")

    parser = argparse.ArgumentParser(prog="metis-tap",
                                     description="Duplicate character detection in heterogeneous temporal networks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("ingest", parents=[common], help="load and validate records")

    screen = commands.add_parser("screen", parents=[common, screening], help="zero structure error candidates")
    screen.add_argument("--nearest", type=int, default=0, help="also list the N lowest structure error pairs")

    simtap = commands.add_parser("simtap", parents=[common, screening, anchored], help="SimTAP similarity")
    simtap.add_argument("--pair", type=parse_pair, action="append", default=[], help="a,b (repeatable)")
    simtap.add_argument("--theta", type=float, help="threshold for the divergent pair report")

    dedupe = commands.add_parser("dedupe", parents=[common, screening, anchored], help="detect and merge duplicates")
    dedupe.add_argument("--theta", type=float, help="character uniqueness threshold in (0, 1]")
    dedupe.add_argument("--merge-policy",
                        choices=[p.value for p in MergePolicy],
                        default=MergePolicy.SMALLEST_ID.value)

    export = commands.add_parser("export", parents=[common], help="export the loaded network")
    export.add_argument("--format", choices=EXPORT_FORMATS, default=GRAPH_JSON)
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(command=args.command,
                     records_path=args.records,
                     manifest_path=args.manifest,
                     out_dir=args.out,
                     now=getattr(args, 'now', None),
                     theta=getattr(args, 'theta', None),
                     name_filter=getattr(args, 'name_filter', NameFilter.OFF.value),
                     strict=args.strict,
                     workers=args.workers,
                     pairs=tuple(getattr(args, 'pair', ())),
                     export_format=getattr(args, 'format', GRAPH_JSON),
                     nearest=getattr(args, 'nearest', 0),
                     merge_policy=getattr(args, 'merge_policy', MergePolicy.SMALLEST_ID.value))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        logger.LogConfig().configure(level=args.log_level)
    return pipeline.run(run_config(args))


if __name__ == "__main__":
    sys.exit(main())
