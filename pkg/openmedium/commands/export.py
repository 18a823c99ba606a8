import sys

from ..utils.data_handler import RUN_ARTIFACTS, read_run_table
from ..utils.errors import UsageError
from . import ExitStatus

GENOTYPE_EXPORT = ["genotype_id", "sequence", "first_seen", "last_seen", "max_abundance"]


def register(subparsers):
    p = subparsers.add_parser("export", help="print a run table as CSV")
    p.add_argument("run_dir")
    p.add_argument("what", choices=sorted(RUN_ARTIFACTS))
    p.set_defaults(handler=cmd_export)


def cmd_export(args) -> ExitStatus:
    try:
        table = read_run_table(args.run_dir, args.what)
    except FileNotFoundError as exc:
        raise UsageError(f"missing run artifact: {exc}") from None
    if args.what == "genotypes":
        table = table[GENOTYPE_EXPORT]
    sys.stdout.write(table.to_csv(index=False, lineterminator="\n"))
    return ExitStatus.OK
