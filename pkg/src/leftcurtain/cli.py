"""Command-line surface.

Subcommands
-----------
shadow     compute the shadow of one measure in another
curtain    build the left-curtain coupling (JSON, optional curve CSV)
verify     check a coupling file against its marginals
sample     draw reproducible destination samples
decompose  list irreducible components

Measures are JSON files, either explicit atoms::

    {"type": "atoms", "atoms": [[x, w], ...]}

or a density to be quantised::

    {"type": "grid-density", "xs": [...], "pdf": [...], "n": 1000}

``-`` stands for stdin/stdout.  Exit codes: 0 success, 1 verification
failure, 2 I/O or format error, 3 convex-order failure.  Sampling uses
NumPy's PCG64 generator (``numpy.random.default_rng``) seeded from
``--seed``, so runs reproduce bit for bit across platforms.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .curtain import build_curtain, coupling, curve_rows, sample_y_many, LiftedCoupling
from .decompose import DecomposeError, decompose
from .measures import (
    DiscreteMeasure,
    check_convex_order,
    measure_from_json,
    measure_to_json,
    quantile_left,
)
from .shadow import ShadowInvalid, shadow
from .verify import (
    VerificationReport,
    verify_coupling,
    verify_left_monotone,
    verify_marginal_identity,
    verify_shadow_consistency,
)

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_IO = 2
EXIT_ORDER = 3


def _read_json(path: str) -> dict:
    if path == "-":
        return json.load(sys.stdin)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
        if not text.endswith("\n"):
            fh.write("\n")


def _load_measure(path: str) -> DiscreteMeasure:
    return measure_from_json(_read_json(path))


def _load_pair(args) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    mu = _load_measure(args.mu)
    nu = _load_measure(args.nu)
    return mu, nu


def _require_order(mu, nu) -> None:
    order = check_convex_order(mu, nu)
    if not order:
        raise _OrderFailure(
            f"marginals not in convex order (witness {order.witness}, gap {order.gap:.3e})"
        )


class _OrderFailure(Exception):
    pass


def _components_payload(mu, nu) -> list[dict]:
    dec = decompose(mu, nu)
    payload = []
    for k, comp in enumerate(dec.components):
        payload.append(
            {
                "index": k,
                "interval": [comp.a, comp.b],
                "includes_endpoints": [comp.includes_a, comp.includes_b],
                "mass": comp.mass,
                "mu_part": measure_to_json(comp.mu_part),
                "nu_part": measure_to_json(comp.nu_part),
            }
        )
    return payload


def _cmd_shadow(args) -> int:
    mu, nu = _load_pair(args)
    result = shadow(mu, nu)
    _write_text(args.out, json.dumps(measure_to_json(result), indent=2))
    return EXIT_OK


def _cmd_curtain(args) -> int:
    mu, nu = _load_pair(args)
    _require_order(mu, nu)
    table = build_curtain(mu, nu)
    pi = coupling(table, mu)
    components = _components_payload(mu, nu) if args.components else []
    _write_text(args.out, json.dumps(pi.to_json(components=components), indent=2))
    if args.curves:
        lines = ["u,G,R,Q,S,phi"]
        for row in curve_rows(table):
            lines.append(",".join(repr(float(v)) for v in row))
        _write_text(args.curves, "\n".join(lines))
    return EXIT_OK


def _cmd_verify(args) -> int:
    mu, nu = _load_pair(args)
    _require_order(mu, nu)
    pi = LiftedCoupling.from_json(_read_json(args.coupling))
    table = build_curtain(mu, nu)
    rep = VerificationReport()
    verify_coupling(pi, mu, nu, tol=args.tol, report=rep)
    verify_left_monotone(table, report=rep)
    verify_marginal_identity(table, nu, samples=100, seed=0, mu=mu, report=rep)
    verify_shadow_consistency(table, mu, nu, grid=10, seed=0, coupling_obj=pi, report=rep)
    _write_text(args.out, rep.to_json())
    return EXIT_OK if rep.passed() else EXIT_VERIFICATION


def _cmd_sample(args) -> int:
    mu, nu = _load_pair(args)
    _require_order(mu, nu)
    table = build_curtain(mu, nu)
    rng = np.random.default_rng(args.seed)
    us = rng.uniform(0.0, 1.0, size=args.n)
    vs = rng.uniform(0.0, 1.0, size=args.n)
    # avoid the measure-zero endpoints where the quantile is undefined
    eps = np.finfo(float).tiny
    us = np.clip(us, eps, 1.0 - 1e-16)
    vs = np.clip(vs, eps, 1.0 - 1e-16)
    ys = sample_y_many(table, us, vs)
    xs = np.array([quantile_left(mu, float(u)) for u in us])
    lines = ["u,v,x,y"]
    for u, v, x, y in zip(us, vs, xs, ys):
        lines.append(",".join(repr(float(t)) for t in (u, v, x, y)))
    _write_text(args.out, "\n".join(lines))
    return EXIT_OK


def _cmd_decompose(args) -> int:
    mu, nu = _load_pair(args)
    _require_order(mu, nu)
    dec = decompose(mu, nu)
    payload = {
        "components": _components_payload(mu, nu),
        "static": measure_to_json(dec.static),
    }
    _write_text(args.out, json.dumps(payload, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leftcurtain",
        description="Left-curtain martingale coupling toolkit",
        epilog="Exit codes: 0 ok, 1 verification failure, 2 I/O error, 3 order failure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pair(p):
        p.add_argument("--mu", required=True, help="source measure JSON ('-' for stdin)")
        p.add_argument("--nu", required=True, help="target measure JSON ('-' for stdin)")

    p = sub.add_parser("shadow", help="shadow of --mu in --nu")
    add_pair(p)
    p.add_argument("--out", default="-", help="output measure JSON")
    p.set_defaults(func=_cmd_shadow)

    p = sub.add_parser("curtain", help="left-curtain coupling")
    add_pair(p)
    p.add_argument("--out", default="-", help="coupling JSON output")
    p.add_argument("--curves", default=None, help="CSV of u,G,R,Q,S,phi rows")
    p.add_argument(
        "--components", action="store_true", help="embed the irreducible decomposition"
    )
    p.set_defaults(func=_cmd_curtain)

    p = sub.add_parser("verify", help="verify a coupling file")
    add_pair(p)
    p.add_argument("--coupling", required=True, help="coupling JSON to check")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default="-", help="report JSON output")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sample", help="reproducible destination samples")
    add_pair(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="CSV output (u,v,x,y)")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("decompose", help="irreducible component listing")
    add_pair(p)
    p.add_argument("--out", default="-", help="decomposition JSON output")
    p.set_defaults(func=_cmd_decompose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (_OrderFailure, DecomposeError, ShadowInvalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORDER
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
