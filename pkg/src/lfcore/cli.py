"""``lf`` command line: check, run, hash.

Exit codes: 0 success, 1 parse/type failure, 2 scenario step failure, 3 usage.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import LfError
from .ledger import project
from .packages import World
from .parser import parse_package, parse_scenario
from .scenario import run_scenario
from .transaction import render_tree
from .typecheck import check_packages

EXIT_OK, EXIT_CHECK, EXIT_STEP, EXIT_USAGE = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _diag(err: LfError) -> str:
    text = err.diagnostic()
    if os.environ.get("LF_COLOR") == "1":
        cls = err.error_class
        text = text.replace(f": {cls}: ", f": \x1b[1;31m{cls}\x1b[0m: ", 1)
    return text


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _UsageError(f"cannot read {path}: {e.strerror}") from None


def load(paths: list[str]) -> World:
    pkgs = [parse_package(_read(p), p) for p in paths]
    return check_packages(pkgs)


def cmd_check(args) -> int:
    world = load(args.files)
    for name, pkg in sorted(world.packages.items()):
        print(f"{name} {pkg.id}")
    return EXIT_OK


def cmd_hash(args) -> int:
    print(parse_package(_read(args.file), args.file).id)
    return EXIT_OK


def cmd_run(args) -> int:
    world = load(args.files)
    scenario = parse_scenario(_read(args.scenario), args.scenario)
    side = sys.stderr if args.json else sys.stdout

    def on_commit(n, actors, tx):
        if args.trace:
            print(f"-- commit {n} (actors: {', '.join(sorted(actors))})", file=side)
            side.write(render_tree(tx))
        if args.project:
            view = project(tx, args.project)
            print(f"-- view of {args.project} after commit {n}", file=side)
            side.write(render_tree(view) if view else "(nothing)\n")

    report, _ = run_scenario(world, scenario, on_commit)
    if args.json:
        print(report.to_json())
        return report.exit_code
    for s in report.steps:
        status = "ok" if s.ok else "FAILED"
        print(f"step {s.index} {s.kind}: {status}" + (f" ({s.detail})" if s.detail else ""))
    print("active contracts:")
    for c in report.active:
        print(f"  #{c.cid} {c.template} {c.arg}")
    return report.exit_code


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lf", description="Typecheck packages and run ledger scenarios.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("check", help="parse and typecheck packages, print their ids")
    c.add_argument("files", nargs="+")
    c.set_defaults(func=cmd_check)
    r = sub.add_parser("run", help="run a scenario against the given packages")
    r.add_argument("files", nargs="+")
    r.add_argument("--scenario", required=True)
    r.add_argument("--trace", action="store_true", help="print each committed transaction tree")
    r.add_argument("--project", metavar="PARTY", help="print PARTY's view after each commit")
    r.add_argument("--json", action="store_true", help="emit a machine-readable report")
    r.set_defaults(func=cmd_run)
    h = sub.add_parser("hash", help="print the content hash of a package")
    h.add_argument("file")
    h.set_defaults(func=cmd_hash)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as e:
        print(f"lf: {e}", file=sys.stderr)
        return EXIT_USAGE
    except LfError as e:
        print(_diag(e), file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
