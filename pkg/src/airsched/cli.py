"""Command-line front end; a thin client of the scheduling service.

Every subcommand builds a request model and sends it through
``ServiceClient``: in-process by default, or to a running server when
``--server URL`` is given.  Files (instance documents, CSV output) are read
and written on the client side.

Subcommands: ``gen``, ``solve``, ``round``, ``bench``, ``serve``.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .model import InstanceFormatError, read_instance, write_instance
from .runner import records_to_csv
from .service import schemas
from .service.client import ServiceClient, ServiceError
from .solver import OPTIMAL


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got '{text}'")
    return lo, hi


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got '{text}'")


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gap-tol", type=float, default=1e-7,
                        help="relative duality-gap tolerance (default 1e-7)")
    parser.add_argument("--max-iters", type=int, default=100)
    parser.add_argument("--samples", type=int, default=100,
                        help="rounding samples (default 100)")
    parser.add_argument("--seed", type=int, default=0,
                        help="rounding stream seed (default 0)")
    parser.add_argument("--perturb", type=float, nargs="?", const=1e-3,
                        default=None, metavar="EPS",
                        help="break symmetric optima by adding uniform [0,EPS) "
                             "noise to the objective (EPS defaults to 1e-3)")
    parser.add_argument("--perturb-seed", type=int, default=None,
                        help="perturbation stream seed (defaults to --seed)")
    parser.add_argument("--budget", type=int, default=10_000_000,
                        help="oracle enumeration cap (default 1e7)")


def _settings(args) -> schemas.SolveSettings:
    perturb_seed = args.perturb_seed if args.perturb_seed is not None else args.seed
    return schemas.SolveSettings(
        gap_tol=args.gap_tol,
        max_iters=args.max_iters,
        samples=args.samples,
        seed=args.seed,
        perturb=args.perturb,
        perturb_seed=perturb_seed,
        budget=args.budget,
    )


def _load_payload(path: str) -> schemas.InstancePayload:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    instance = read_instance(text)  # precise parse errors, local validation
    return schemas.InstancePayload.from_instance(instance)


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _record_line(record: schemas.RunRecordPayload) -> str:
    def fmt(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v)

    fields = ["m", "n", "T", "d", "seed", "mode", "wall_s",
              "sdp_bound", "oracle", "best_rounded", "status"]
    return " ".join(f"{name}={fmt(getattr(record, name))}" for name in fields)


def _print_record(record: schemas.RunRecordPayload, fmt: str) -> None:
    if fmt == "csv":
        sys.stdout.write(records_to_csv([record.to_record()]))
    else:
        print(_record_line(record))


def _print_rounding(resp_rounding: schemas.RoundingPayload, certified: bool) -> None:
    best = resp_rounding.best_schedule
    delay = resp_rounding.best_delay
    print(
        f"rounding: samples={resp_rounding.samples_drawn} "
        f"feasible={resp_rounding.feasible_count} "
        f"best_delay={'-' if delay is None else f'{delay:.6g}'} "
        f"best_schedule={'-' if best is None else tuple(best)}"
    )
    if certified:
        print("OPTIMAL (bound matched)")


def cmd_gen(client: ServiceClient, args) -> int:
    request = schemas.GenerateRequest(
        m=args.m, n=args.n, T=args.T, d=args.d,
        capacity_range=args.cap_range,
        route_length_range=args.len_range,
        seed=args.seed,
    )
    response = client.generate(request)
    text = write_instance(response.instance.to_instance())
    _write_text(args.out, text)
    return 0


def cmd_solve(client: ServiceClient, args) -> int:
    payload = _load_payload(args.instance)
    response = client.solve(schemas.SolveRequest(
        instance=payload, mode=args.mode, settings=_settings(args),
    ))
    record = response.record
    _print_record(record, args.format)
    if args.format != "csv":
        if response.x is not None:
            print("x =", [round(v, 4) for v in response.x])
        if response.rank_one_gap is not None:
            print(f"max|X - xx'| = {response.rank_one_gap:.3e}")
        if response.schur_residual is not None:
            print(f"schur_residual = {response.schur_residual:.3e}")
        if args.mode == "exact" and response.schedule is not None:
            print("schedule =", tuple(response.schedule))
        if response.rounding is not None:
            _print_rounding(response.rounding, response.certified)
    if record.status == "BUDGET_EXCEEDED":
        print("enumeration budget exceeded; rerun with --mode sdp", file=sys.stderr)
        return 1
    return 0 if record.status == OPTIMAL else 1


def cmd_round(client: ServiceClient, args) -> int:
    payload = _load_payload(args.instance)
    response = client.round(schemas.RoundRequest(
        instance=payload, settings=_settings(args),
    ))
    _print_record(response.record, args.format)
    if args.format != "csv" and response.rounding is not None:
        _print_rounding(response.rounding, response.certified)
    _write_text(args.hist_out, response.histogram_csv)
    return 0 if response.record.status == OPTIMAL else 1


def cmd_bench(client: ServiceClient, args) -> int:
    if not args.n or not args.seeds or not args.modes:
        print("bench grid is empty (need --n, --seeds, --modes)", file=sys.stderr)
        return 2
    response = client.bench(schemas.BenchRequest(
        n_values=args.n, seeds=args.seeds, modes=args.modes,
        m=args.m, T=args.T, d=args.d,
        capacity_range=args.cap_range,
        route_length_range=args.len_range,
        settings=_settings(args),
    ))
    _write_text(args.out, response.csv)
    return 0 if all(r.status == OPTIMAL for r in response.records) else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airsched",
        description="Schedule ground delays under sector capacities: exact "
                    "oracle, SDP lower bound, randomized rounding.",
    )
    parser.add_argument("--server", default=None, metavar="URL",
                        help="send requests to a running service instead of "
                             "solving in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance file")
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--T", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--cap-range", type=_parse_range, default=(1, 3),
                     metavar="LO,HI")
    gen.add_argument("--len-range", type=_parse_range, default=(3, 8),
                     metavar="LO,HI")
    gen.add_argument("-o", "--out", default="-")

    solve = sub.add_parser("solve", help="solve one instance file")
    solve.add_argument("instance")
    solve.add_argument("--mode", choices=["exact", "sdp", "sdp+round"],
                       default="sdp")
    solve.add_argument("--format", choices=["human", "csv"], default="human")
    _add_solver_flags(solve)

    rnd = sub.add_parser("round", help="solve the relaxation and emit the "
                                       "rounding histogram CSV")
    rnd.add_argument("instance")
    rnd.add_argument("--format", choices=["human", "csv"], default="human")
    rnd.add_argument("--hist-out", default="-", metavar="PATH",
                     help="where to write the delay,count histogram "
                          "(default stdout)")
    _add_solver_flags(rnd)

    bench = sub.add_parser("bench", help="sweep generated instances, emit CSV")
    bench.add_argument("--n", type=_parse_int_list, default=[],
                       metavar="N1,N2,...")
    bench.add_argument("--seeds", type=_parse_int_list, default=[0],
                       metavar="S1,S2,...")
    bench.add_argument("--modes", type=lambda t: t.split(","),
                       default=["sdp"], metavar="MODE1,MODE2")
    bench.add_argument("--m", type=int, default=50)
    bench.add_argument("--T", type=int, default=30)
    bench.add_argument("--d", type=int, default=2)
    bench.add_argument("--cap-range", type=_parse_range, default=(1, 3))
    bench.add_argument("--len-range", type=_parse_range, default=(3, 8))
    bench.add_argument("-o", "--out", default="-")
    _add_solver_flags(bench)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    client = ServiceClient(base_url=args.server)
    handlers = {
        "gen": cmd_gen,
        "solve": cmd_solve,
        "round": cmd_round,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](client, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InstanceFormatError as exc:
        print(f"error: bad instance file: {exc}", file=sys.stderr)
        return 2
    except ServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if exc.status_code >= 500 else 2


if __name__ == "__main__":
    sys.exit(main())
