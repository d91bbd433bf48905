"""Command-line client for the bound, curve, detect, code, and image-bound runs.

The CLI is a thin client over the service layer: flags are parsed into
the same pydantic request models the HTTP endpoints accept, executed
through the in-process handlers by default, or POSTed to a running
service with ``--server``.  Either way the output renders the same
config/results/diagnostics envelope.

Exit codes: 0 success, 2 usage, 3 input-format error, 4 numerical or
domain error, 5 I/O error.
"""

from __future__ import annotations

import argparse
import base64
import json
import sys

import httpx
import pydantic

from . import __version__
from .errors import PgmFormatError, StegboundError
from .service import handlers
from .service.schemas import (
    BoundRequest,
    CodeRequest,
    CurveRequest,
    DetectRequest,
    ImageBoundRequest,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5

_ENDPOINTS = {
    "bound": ("/bound", BoundRequest, handlers.handle_bound),
    "curve": ("/curve", CurveRequest, handlers.handle_curve),
    "detect": ("/detect", DetectRequest, handlers.handle_detect),
    "code": ("/code", CodeRequest, handlers.handle_code),
    "image-bound": ("/image-bound", ImageBoundRequest, handlers.handle_image_bound),
}

_TABLE_COLUMNS = {
    "bound": [
        "n",
        "epsilon",
        "u",
        "a",
        "rate_nats",
        "rate_bits_per_element",
        "srl_nats",
        "sandwich_low",
        "sandwich_high",
    ],
    "curve": ["p_E", "payload_bpe", "a_low", "srl_bpe"],
    "detect": [
        "detector",
        "trials",
        "alpha",
        "beta",
        "p_e",
        "p_E",
        "kl_theoretical",
        "p_e_floor",
        "mc_stderr",
    ],
    "code": [
        "rate_fraction",
        "rate_nats_per_element",
        "K",
        "trials",
        "p_B",
        "stderr",
        "method",
    ],
    "image-bound": [
        "width",
        "height",
        "maxval",
        "clique_count",
        "clique_dim",
        "epsilon",
        "u",
        "a",
        "rate_nats",
        "rate_bits_per_element",
        "srl_nats",
    ],
}


def _fractions_arg(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated float list")
    if not values:
        raise argparse.ArgumentTypeError("at least one rate fraction is required")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stegbound",
        description="Embedding-capacity bounds and Monte Carlo verification.",
    )
    parser.add_argument("--version", action="version", version=f"stegbound {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=("human", "csv", "json"), default="human", help="output format"
    )
    common.add_argument("--output", metavar="PATH", help="write output to PATH instead of stdout")
    common.add_argument(
        "--server", metavar="URL", help="POST the request to a running service instead"
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", parents=[common], help="rate bound for (n, epsilon)")
    p_bound.add_argument("--n", type=int, required=True, help="number of cover elements")
    p_bound.add_argument("--epsilon", type=float, required=True, help="total-variation budget")

    p_curve = sub.add_parser("curve", parents=[common], help="payload versus error-target curve")
    p_curve.add_argument("--n", type=int, required=True)
    p_curve.add_argument("--pe-min", type=float, default=0.0, dest="p_e_min")
    p_curve.add_argument("--pe-max", type=float, default=0.5, dest="p_e_max")
    p_curve.add_argument("--steps", type=int, default=5)

    p_detect = sub.add_parser("detect", parents=[common], help="optimal-detector Monte Carlo run")
    p_detect.add_argument("--n", type=int, required=True)
    p_detect.add_argument("--epsilon", type=float, required=True)
    p_detect.add_argument("--trials", type=int, default=100_000)
    p_detect.add_argument("--seed", type=int, default=0)

    p_code = sub.add_parser("code", parents=[common], help="random-coding Monte Carlo run")
    p_code.add_argument("--n", type=int, required=True)
    p_code.add_argument("--epsilon", type=float, required=True)
    p_code.add_argument(
        "--fractions",
        type=_fractions_arg,
        default=[0.2, 0.8, 1.5],
        help="comma-separated fractions of the capacity bound",
    )
    p_code.add_argument("--trials", type=int, default=500)
    p_code.add_argument("--seed", type=int, default=0)

    p_image = sub.add_parser("image-bound", parents=[common], help="per-image capacity bound")
    p_image.add_argument("path", help="binary (P5) PGM file")
    p_image.add_argument("--epsilon", type=float, required=True)
    p_image.add_argument(
        "--mode",
        choices=("independent-pixels", "square-block", "single-clique"),
        default="independent-pixels",
    )
    p_image.add_argument("--block-edge", type=int, default=None, dest="block_edge")
    p_image.add_argument("--shrinkage", type=float, default=0.05)

    return parser


def _build_request(args: argparse.Namespace):
    if args.command == "bound":
        return BoundRequest(n=args.n, epsilon=args.epsilon)
    if args.command == "curve":
        return CurveRequest(
            n=args.n, p_e_min=args.p_e_min, p_e_max=args.p_e_max, steps=args.steps
        )
    if args.command == "detect":
        return DetectRequest(n=args.n, epsilon=args.epsilon, trials=args.trials, seed=args.seed)
    if args.command == "code":
        return CodeRequest(
            n=args.n,
            epsilon=args.epsilon,
            fractions=args.fractions,
            trials=args.trials,
            seed=args.seed,
        )
    with open(args.path, "rb") as fh:
        raw = fh.read()
    return ImageBoundRequest(
        pgm_base64=base64.b64encode(raw).decode("ascii"),
        epsilon=args.epsilon,
        mode=args.mode,
        block_edge=args.block_edge,
        shrinkage=args.shrinkage,
    )


class _RemoteError(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


def _execute(args: argparse.Namespace, request) -> dict:
    path, _model, handler = _ENDPOINTS[args.command]
    if not args.server:
        return handler(request).model_dump()
    url = args.server.rstrip("/") + path
    response = httpx.post(url, json=request.model_dump(), timeout=600.0)
    if response.status_code == 200:
        return response.json()
    try:
        body = response.json()
        detail = f"{body.get('error', 'error')}: {body.get('detail', response.text)}"
    except ValueError:
        detail = response.text
    exit_code = EXIT_FORMAT if response.status_code == 415 else EXIT_NUMERICAL
    raise _RemoteError(exit_code, f"server answered {response.status_code}: {detail}")


def _fmt_machine(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _fmt_human(value) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    return _fmt_machine(value)


def _config_line(config: dict) -> str:
    parts = [f"{key}={_fmt_machine(config[key])}" for key in sorted(config)]
    return " ".join(parts)


def _table_rows(envelope: dict) -> list[dict]:
    command = envelope["config"]["command"]
    results = envelope["results"]
    if command in ("curve", "code"):
        return results["rows"]
    if command == "detect":
        return [results, envelope["diagnostics"]["energy_baseline"]]
    return [results]


def render_json(envelope: dict) -> str:
    return json.dumps(envelope, indent=2, sort_keys=True) + "\n"


def render_csv(envelope: dict) -> str:
    command = envelope["config"]["command"]
    columns = _TABLE_COLUMNS[command]
    lines = ["# " + _config_line(envelope["config"])]
    lines.append(",".join(columns))
    for row in _table_rows(envelope):
        lines.append(",".join(_fmt_machine(row.get(col)) for col in columns))
    return "\n".join(lines) + "\n"


def render_human(envelope: dict) -> str:
    command = envelope["config"]["command"]
    lines = [f"stegbound {command}", "config: " + _config_line(envelope["config"])]
    rows = _table_rows(envelope)
    columns = _TABLE_COLUMNS[command]
    if len(rows) == 1:
        width = max(len(col) for col in columns)
        for col in columns:
            lines.append(f"{col:<{width}} = {_fmt_human(rows[0].get(col))}")
    else:
        cells = [[_fmt_human(row.get(col)) for col in columns] for row in rows]
        widths = [
            max(len(columns[i]), max(len(row[i]) for row in cells)) for i in range(len(columns))
        ]
        lines.append("  ".join(col.ljust(w) for col, w in zip(columns, widths)))
        for row in cells:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    extras = {"image-bound": ["estimator_note"]}.get(command, [])
    for key in extras:
        lines.append(f"{key}: {envelope['diagnostics'].get(key)}")
    return "\n".join(lines) + "\n"


def _render(envelope: dict, fmt: str) -> str:
    if fmt == "json":
        return render_json(envelope)
    if fmt == "csv":
        return render_csv(envelope)
    return render_human(envelope)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        request = _build_request(args)
    except pydantic.ValidationError as exc:
        print(f"stegbound: invalid arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"stegbound: cannot read input: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        envelope = _execute(args, request)
    except _RemoteError as exc:
        print(f"stegbound: {exc}", file=sys.stderr)
        return exc.exit_code
    except PgmFormatError as exc:
        print(f"stegbound: input format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (StegboundError, ValueError) as exc:
        print(f"stegbound: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except httpx.HTTPError as exc:
        print(f"stegbound: server unreachable: {exc}", file=sys.stderr)
        return EXIT_IO
    text = _render(envelope, args.format)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"stegbound: cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
