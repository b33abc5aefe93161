"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a verification fails, 2 for
usage errors and specs that cannot be loaded (syntax, unknown names, or a
form that violates its invariants).
"""

from __future__ import annotations

import argparse
import sys

from superfedosov.errors import SuperfedosovError
from superfedosov.frontend import commands
from superfedosov.frontend import report as R

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_LOAD = 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="superfedosov",
        description="Construct and verify symplectic connections on coordinate superdomains.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def with_json(p):
        p.add_argument("--json", metavar="PATH", help="also write the machine-readable report to PATH")
        p.add_argument("--quiet", action="store_true", help="suppress the text report")
        return p

    p = with_json(sub.add_parser("validate", help="check antisymmetry, closedness and nondegeneracy of omega"))
    p.add_argument("spec")
    p = with_json(sub.add_parser("fedosov", help="build the corrected symplectic connection and verify it"))
    p.add_argument("spec")
    p = with_json(sub.add_parser("deform", help="deform the corrected connection by an admissible S-tensor"))
    p.add_argument("spec")
    p.add_argument("--seed", type=int, default=None, help="random cochain seed (default: spec cochain, else 0)")
    p.add_argument("--degree", type=int, default=1, help="degree bound of the random cochain (default 1)")
    p = with_json(sub.add_parser("selftest", help="run all identity checks on a random corpus"))
    p.add_argument("--charts", type=int, default=18)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--degree", type=int, default=2, help="degree bound of the random 1-forms (default 2)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (output order is unaffected)")
    return ap


def _error_document(command: str, err: Exception) -> dict:
    if isinstance(err, commands.LoadError):
        entry = err.entry
    else:
        entry = {"type": type(err).__name__, "message": str(err)}
    return {"schema": R.SCHEMA, "command": command, "ok": False, "error": entry}


def _dispatch(args) -> dict:
    if args.command == "validate":
        return commands.run_validate(args.spec)
    if args.command == "fedosov":
        return commands.run_fedosov(args.spec)
    if args.command == "deform":
        if args.degree < 0:
            raise SystemExit("superfedosov deform: --degree must be nonnegative")
        return commands.run_deform(args.spec, args.seed, args.degree)
    if args.charts < 0 or args.degree < 0 or args.jobs < 1:
        raise SystemExit("superfedosov selftest: --charts/--degree must be >= 0 and --jobs >= 1")
    return commands.run_selftest(args.charts, args.seed, args.degree, args.jobs)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = _dispatch(args)
        code = EXIT_OK if doc["ok"] else EXIT_FAILED
    except SystemExit as e:
        if isinstance(e.code, str):
            print(e.code, file=sys.stderr)
            return EXIT_LOAD
        raise
    except (SuperfedosovError, commands.LoadError, OSError) as err:
        doc = _error_document(args.command, err)
        code = EXIT_LOAD
    if args.json:
        R.write_json(doc, args.json)
    if not args.quiet:
        out = sys.stdout if code == EXIT_OK else sys.stderr
        out.write(R.render_text(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())
