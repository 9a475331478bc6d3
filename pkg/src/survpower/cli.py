"""Command-line front end.

Each compute subcommand reads a JSON payload (--json FILE or '-' for stdin),
routes it through the shared dispatcher, and writes the result document to
stdout or --out. Exit codes: 0 ok, 2 validation, 3 numeric domain,
4 convergence.
"""

import argparse
import json
import sys

from . import report, service
from .errors import PayloadError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="survpower",
        description="Power and sample size for marginal hazard ratios in "
        "randomized and weighted observational survival studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in report.COMMANDS:
        p = sub.add_parser(command, help=f"run the '{command}' calculation")
        p.add_argument("--json", default="-", metavar="FILE",
                       help="payload JSON file, or '-' for stdin (default)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the payload seed where applicable")
        p.add_argument("--out", default=None, metavar="FILE",
                       help="write the result document here instead of stdout")
        p.add_argument("--pretty", action="store_true",
                       help="indent the result document")
    p = sub.add_parser("serve", help="run the JSON HTTP API")
    p.add_argument("--bind", default=None, metavar="HOST:PORT",
                   help=f"bind address (default ${service.BIND_ENV_VAR} "
                   f"or {service.DEFAULT_BIND})")
    p.add_argument("--ui-dir", default=None, metavar="DIR",
                   help="also serve the built web UI from this directory")
    return parser


def _read_payload(path):
    if path == "-":
        raw = sys.stdin.read()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = fh.read()
        except OSError as exc:
            raise PayloadError(f"cannot read payload file: {exc}", field="--json")
    try:
        return json.loads(raw or "{}")
    except json.JSONDecodeError as exc:
        raise PayloadError(f"malformed JSON payload: {exc}", field="(body)")


def _emit(data, out_path):
    if out_path:
        with open(out_path, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        service.serve(bind=args.bind, ui_dir=args.ui_dir)
        return 0
    try:
        payload = _read_payload(args.json)
        if args.seed is not None:
            if not isinstance(payload, dict):
                raise PayloadError("payload must be a JSON object", field="(body)")
            if "seed" not in report.command_schema(args.command):
                raise PayloadError(
                    f"command {args.command!r} takes no seed", field="--seed"
                )
            payload["seed"] = args.seed
        doc = report.dispatch(args.command, payload)
    except Exception as exc:  # noqa: BLE001 - mapped to a structured body
        doc, exit_code, _ = report.error_document(exc)
        _emit(report.render(doc, pretty=args.pretty), args.out)
        return exit_code
    _emit(report.render(doc, pretty=args.pretty), args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
