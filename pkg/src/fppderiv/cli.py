"""Thin command-line client for the engine.

Every subcommand marshals its flags into the same request models the
HTTP service accepts, runs them in-process by default (or against a
remote service with --server), and renders the response as JSON or CSV.

Exit codes: 0 success, 2 invalid input, 3 size cap exceeded,
4 verification failure, 5 empirical violation of a proved statement.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import pydantic

from . import api
from .derivative import default_workers
from .errors import FppError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BY_CODE = {
    "invalid_input": 2,
    "size_cap": 3,
    "verification_failure": 4,
    "theorem_violation": 5,
}
STATUS_TO_EXIT = {400: 2, 422: 2, 413: 3, 409: 4}


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _parse_vertex(text: str) -> list[int]:
    try:
        return [int(c) for c in text.split(",")]
    except ValueError:
        raise CliError("invalid_input", f"cannot parse vertex {text!r}") from None


def _parse_box(text: str) -> list[list[int]]:
    try:
        out = []
        for rng in text.split(","):
            lo, hi = rng.split(":")
            out.append([int(lo), int(hi)])
        return out
    except ValueError:
        raise CliError(
            "invalid_input", f"cannot parse box {text!r} (expected LO:HI,LO:HI,...)"
        ) from None


def _parse_edge(text: str) -> dict:
    try:
        coords, axis = text.rsplit(":", 1)
        return {"base": _parse_vertex(coords), "axis": int(axis)}
    except (ValueError, CliError):
        raise CliError(
            "invalid_input", f"cannot parse edge {text!r} (expected X,Y,...:AXIS)"
        ) from None


def _lattice_flags(args) -> dict:
    params = {}
    if args.dim is not None:
        params["dim"] = args.dim
    if args.radius is not None:
        params["radius"] = args.radius
    if args.a is not None:
        params["a"] = args.a
    if args.b is not None:
        params["b"] = args.b
    if args.reduced_box is not None:
        params["reduced_box"] = _parse_box(args.reduced_box)
    if args.source is not None:
        params["source"] = _parse_vertex(args.source)
    if args.sink is not None:
        params["sink"] = _parse_vertex(args.sink)
    return params


def _attach_source(payload: dict, args) -> None:
    inline = _lattice_flags(args)
    if args.env is not None:
        if inline or args.default is not None:
            raise CliError(
                "invalid_input",
                "--env conflicts with inline lattice flags; pass exactly one source",
            )
        try:
            payload["environment"] = json.loads(Path(args.env).read_text())
        except FileNotFoundError:
            raise CliError("invalid_input", f"no such environment file: {args.env}") from None
        except json.JSONDecodeError as exc:
            raise CliError("invalid_input", f"invalid JSON in {args.env}: {exc}") from None
    else:
        payload["lattice"] = inline
        payload["default"] = args.default if args.default is not None else "a"


def _call(route: str, payload: dict, args) -> dict:
    if args.server:
        return _call_remote(args.server, route, payload)
    try:
        return api.dispatch(route, payload).model_dump(mode="json")
    except pydantic.ValidationError as exc:
        raise CliError("invalid_input", str(exc)) from None
    except FppError as exc:
        raise CliError(exc.code, str(exc)) from None


def _call_remote(server: str, route: str, payload: dict) -> dict:
    import httpx

    url = server.rstrip("/") + "/" + route
    try:
        response = httpx.post(url, json=payload, timeout=3600.0)
    except httpx.HTTPError as exc:
        raise CliError("invalid_input", f"cannot reach {url}: {exc}") from None
    if response.status_code == 200:
        return response.json()
    try:
        record = response.json().get("error") or {}
    except ValueError:
        record = {}
    if "code" in record:
        raise CliError(record["code"], record.get("message", ""))
    exit_code = STATUS_TO_EXIT.get(response.status_code)
    code = next((c for c, e in EXIT_BY_CODE.items() if e == exit_code), "error")
    raise CliError(code, f"{url} returned HTTP {response.status_code}")


def _render_csv(route: str, data: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    if route == "variance":
        writer.writerow(["size", "term_sum", "cumulative", "residual"])
        for row in data["rows"]:
            writer.writerow([row["size"], row["term_sum"], row["cumulative"], row["residual"]])
    elif route == "classify":
        writer.writerow(
            ["base", "axis", "essential", "semi_essential", "influential", "very_influential"]
        )
        for rec in data["records"]:
            writer.writerow(
                [
                    " ".join(str(c) for c in rec["edge"]["base"]),
                    rec["edge"]["axis"],
                    rec["essential"],
                    rec["semi_essential"],
                    rec["influential"],
                    rec["very_influential"],
                ]
            )
    elif route == "reproduce-table":
        writer.writerow(
            [
                "k",
                "u_expected",
                "u_witnessed",
                "u_pass",
                "l_expected",
                "l_witnessed",
                "l_pass",
                "exhaustive_max",
                "exhaustive_min",
            ]
        )
        for cell in data["cells"]:
            writer.writerow(
                [
                    cell["k"],
                    cell["u_expected"],
                    cell["u_witnessed"],
                    "PASS" if cell["u_pass"] else "FAIL",
                    cell["l_expected"],
                    cell["l_witnessed"],
                    "PASS" if cell["l_pass"] else "FAIL",
                    cell["exhaustive_max"],
                    cell["exhaustive_min"],
                ]
            )
    else:
        raise CliError("invalid_input", f"csv output is not defined for {route!r}")
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _run_route(route: str, payload: dict, args) -> int:
    data = _call(route, payload, args)
    if args.format == "csv":
        _emit(_render_csv(route, data), args.out)
    else:
        _emit(json.dumps(data, indent=2) + "\n", args.out)
    if route == "reproduce-table" and not data["all_pass"]:
        return EXIT_BY_CODE["verification_failure"]
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=["json", "csv"], default="json")
    output.add_argument("--out", help="write the report to this file instead of stdout")
    output.add_argument("--server", help="URL of a running service; default is in-process")

    lattice = argparse.ArgumentParser(add_help=False)
    lattice.add_argument("--dim", type=int)
    lattice.add_argument("--radius", type=int)
    lattice.add_argument("--a", type=int)
    lattice.add_argument("--b", type=int)
    lattice.add_argument("--reduced-box", help="debug box as LO:HI,LO:HI,... per axis")
    lattice.add_argument("--source", help="vertex as comma-separated coordinates")
    lattice.add_argument("--sink", help="vertex as comma-separated coordinates")
    lattice.add_argument("--env", help="environment JSON file (excludes inline flags)")
    lattice.add_argument("--default", choices=["a", "b"], help="fill value for inline lattices")

    workers = argparse.ArgumentParser(add_help=False)
    workers.add_argument(
        "--workers",
        type=int,
        default=default_workers(),
        help="worker processes for mask sweeps (default: FPP_WORKERS or 1)",
    )

    parser = argparse.ArgumentParser(
        prog="fppderiv",
        description="Exact first-passage percolation engine on finite boxes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("time", parents=[output, lattice], help="source-to-sink passage time")

    p = sub.add_parser(
        "derivative", parents=[output, lattice], help="environment derivative of f over S"
    )
    p.add_argument(
        "--s-edge",
        action="append",
        required=True,
        metavar="X,Y,...:AXIS",
        help="edge of S; repeat for higher order",
    )
    p.add_argument("--method", choices=["leibniz", "recursive", "table"], default="leibniz")

    p = sub.add_parser(
        "classify", parents=[output, lattice], help="essential/influential edge flags"
    )
    p.add_argument(
        "--edge",
        action="append",
        metavar="X,Y,...:AXIS",
        help="restrict classification to these edges (default: all)",
    )

    p = sub.add_parser(
        "lanes", parents=[output], help="closed-form two-lane derivative, optionally embedded"
    )
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    p.add_argument("--beta1", type=int, default=0)
    p.add_argument("--beta2", type=int, default=0)
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--b", type=int, default=2)
    p.add_argument("--lane-length", type=int)
    p.add_argument("--embed", action="store_true", help="realize and verify on a lattice")
    p.add_argument("--separation", type=int, default=2)
    p.add_argument("--span", type=int)

    p = sub.add_parser(
        "search-extremes",
        parents=[output, lattice, workers],
        help="extreme normalized derivatives of a given order",
    )
    p.add_argument("--k", type=int, required=True)
    p.add_argument(
        "--mode",
        choices=["exhaustive", "random", "lanes", "hunt"],
        default="exhaustive",
        help="hunt = lane witnesses embedded, then seeded randomized search (the open-order preset)",
    )
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-beta", type=int, default=4)

    p = sub.add_parser(
        "variance", parents=[output, lattice, workers], help="variance decomposition"
    )
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--max-size", type=int)
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--talagrand-k", type=int)

    p = sub.add_parser("identities", parents=[output], help="verify the two binomial identities")
    p.add_argument("--check", action="store_true", default=True)
    p.add_argument("--max-b", type=int, default=64)
    p.add_argument("--max-nk", type=int, default=64)

    p = sub.add_parser(
        "reproduce-table",
        parents=[output, workers],
        help="rebuild the order 1..4 optimal-bound table with PASS/FAIL cells",
    )
    p.add_argument("--max-beta", type=int, default=4)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            import uvicorn

            from .service import app

            uvicorn.run(app, host=args.host, port=args.port)
            return EXIT_OK
        if args.command == "time":
            payload: dict = {}
            _attach_source(payload, args)
            return _run_route("time", payload, args)
        if args.command == "derivative":
            payload = {
                "S": [_parse_edge(e) for e in args.s_edge],
                "method": args.method,
            }
            _attach_source(payload, args)
            return _run_route("derivative", payload, args)
        if args.command == "classify":
            payload = {}
            if args.edge:
                payload["edges"] = [_parse_edge(e) for e in args.edge]
            _attach_source(payload, args)
            return _run_route("classify", payload, args)
        if args.command == "lanes":
            payload = {
                "m1": args.m1,
                "m2": args.m2,
                "beta1": args.beta1,
                "beta2": args.beta2,
                "a": args.a,
                "b": args.b,
                "lane_length": args.lane_length,
                "embed": args.embed,
                "separation": args.separation,
                "span": args.span,
            }
            return _run_route("lanes", payload, args)
        if args.command == "search-extremes":
            payload = {
                "k": args.k,
                "mode": args.mode,
                "budget": args.budget,
                "seed": args.seed,
                "max_beta": args.max_beta,
                "workers": args.workers,
            }
            if args.mode in ("exhaustive", "random"):
                _attach_source(payload, args)
            elif args.env is not None or _lattice_flags(args) or args.default is not None:
                raise CliError(
                    "invalid_input", f"mode {args.mode!r} takes no lattice input"
                )
            return _run_route("search-extremes", payload, args)
        if args.command == "variance":
            payload = {
                "p": args.p,
                "max_size": args.max_size,
                "mc_samples": args.mc_samples,
                "seed": args.seed,
                "talagrand_k": args.talagrand_k,
                "workers": args.workers,
            }
            _attach_source(payload, args)
            return _run_route("variance", payload, args)
        if args.command == "identities":
            payload = {"check": args.check, "max_b": args.max_b, "max_nk": args.max_nk}
            return _run_route("identities", payload, args)
        if args.command == "reproduce-table":
            payload = {"max_beta": args.max_beta, "workers": args.workers}
            return _run_route("reproduce-table", payload, args)
        raise CliError("invalid_input", f"unknown command {args.command!r}")
    except CliError as exc:
        record = {"error": {"code": exc.code, "message": str(exc)}}
        sys.stderr.write(json.dumps(record, indent=2) + "\n")
        return EXIT_BY_CODE.get(exc.code, EXIT_ERROR)


if __name__ == "__main__":
    sys.exit(main())
