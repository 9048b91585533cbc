"""Command line driver: ``essnorm <kind> [flags]`` or ``essnorm run scenario.txt``."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .results import dumps_json, format_table, to_csv
from .scenarios import DEFAULTS, KINDS, run_scenario
from .verify import run_suite


class ScenarioError(ValueError):
    pass


def parse_scenario(text: str, source: str = "<scenario>") -> tuple[str, dict]:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Errors carry line numbers."""
    params = {}
    kind = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ScenarioError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key = key.strip().lower()
        value = value.strip()
        if key == "kind":
            if value not in KINDS:
                raise ScenarioError(f"{source}:{lineno}: unknown kind {value!r} (one of {', '.join(KINDS)})")
            kind = value
        elif key in DEFAULTS:
            if key in params:
                raise ScenarioError(f"{source}:{lineno}: duplicate key {key!r}")
            params[key] = value
        else:
            raise ScenarioError(f"{source}:{lineno}: unknown key {key!r}")
    if kind is None:
        raise ScenarioError(f"{source}: missing 'kind = ...'")
    return kind, params


def _run_file(path: str) -> list:
    text = Path(path).read_text()
    kind, params = parse_scenario(text, path)
    params.setdefault("name", Path(path).stem)
    return run_scenario(kind, params)


def _emit(rows, out, json_path, quiet=False):
    if not quiet:
        print(format_table(rows))
    if out:
        if str(out).endswith(".json"):
            Path(out).write_text(dumps_json(rows))
        else:
            Path(out).write_text(to_csv(rows))
    if json_path:
        Path(json_path).write_text(dumps_json(rows))
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"FAILED {r.scenario}: {r.quantity} lower={r.lower!r} upper={r.upper!r} "
              f"oracle={r.oracle!r} gap={r.gap!r} tol={r.tol!r}", file=sys.stderr)
    return 0 if not failed else 1


def _common(p: argparse.ArgumentParser):
    p.add_argument("--p", help="domain exponent (number or inf)")
    p.add_argument("--q", help="target exponent")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, help="bins / grid points per axis")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--window", help="index window a:b")
    p.add_argument("--tol", type=float)
    p.add_argument("--out", help="CSV path (or .json)")
    p.add_argument("--json", help="also write the JSON document here")
    p.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="essnorm", description="Essential norms of composition, multiplication and inclusion operators.")
    sub = ap.add_subparsers(dest="command", required=True)
    specs = {
        "compo": [("--map", "self-map: 'blaschke: a,b;rot=eta', 'taylor: c0,c1;tail=t', 'compose: A|B'")],
        "mult": [("--space", "measure space 'atoms: a=0.5; diffuse: m=10, density=1'"), ("--u", "symbol '<expr in x>; atoms=v1,v2'")],
        "mult-smallp": [("--space", "purely atomic space"), ("--u", "symbol 'atoms=v1,v2,...'")],
        "dirichlet": [("--u", "Dirichlet polynomial '1:1, 2:2, 3:1'")],
        "inclusion": [("--mu", "measure 'points: z@m, ... | density: <circle function>'")],
        "wco": [("--space", "source space"), ("--target", "target space (default: source)"),
                ("--map", "'diffuse=<expr in x>; atoms=a->b'"), ("--u", "weight on the source")],
    }
    for kind, flags in specs.items():
        p = sub.add_parser(kind)
        for flag, help_ in flags:
            p.add_argument(flag, help=help_)
        _common(p)
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="core")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--out")
    v.add_argument("--json")
    v.add_argument("--quiet", action="store_true")
    r = sub.add_parser("run", help="run scenario files (key = value format)")
    r.add_argument("files", nargs="+")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out")
    r.add_argument("--json")
    r.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            rows = run_suite(args.suite, args.seed, jobs=args.jobs)
        elif args.command == "run":
            for f in args.files:  # fail fast on syntax before running anything
                parse_scenario(Path(f).read_text(), f)
            if args.jobs > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                    parts = list(ex.map(_run_file, args.files))
            else:
                parts = [_run_file(f) for f in args.files]
            rows = [r for part in parts for r in part]
        else:
            params = {k: getattr(args, k, None) for k in DEFAULTS if k not in ("out", "json")}
            rows = run_scenario(args.command, params)
    except (ValueError, OSError) as exc:
        print(f"essnorm: error: {exc}", file=sys.stderr)
        return 2
    return _emit(rows, args.out, args.json, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
