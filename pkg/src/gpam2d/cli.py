"""Batch command-line front end.

Subcommands: ``symbols``, ``graphs validate|pair|classify``, ``constants
crho|geps|gconv`` and ``mc noise|xiixi|weighted``.  Every output artifact
embeds the fully serialised run configuration and the toolkit version, and
re-running a configuration reproduces the bytes.  Exit codes: 0 on success,
1 on an assertion mismatch, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__


def _config_line(args: argparse.Namespace) -> str:
    blob = {k: v for k, v in sorted(vars(args).items())
            if k not in ("func", "out") and v is not None}
    return json.dumps({"tool": "gpam2d", "version": __version__, "config": blob},
                      sort_keys=True, default=str)


def _emit(args, text: str) -> None:
    payload = f"# {_config_line(args)}\n{text}"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _parse_eps_list(text: str) -> list[float]:
    """Either a single value (``1/8``, ``0.125``, ``2^-3``) or ``2^-3..2^-6``."""

    def one(tok: str) -> float:
        if "^" in tok:
            base, expo = tok.split("^")
            return float(base) ** float(expo)
        return float(Fraction(tok))

    if ".." in text:
        lo, hi = text.split("..")
        v0, v1 = one(lo), one(hi)
        out = [v0]
        while out[-1] > v1 * 1.0001:
            out.append(out[-1] / 2.0)
        return out
    return [one(text)]


# ---------------------------------------------------------------------------


def cmd_symbols(args) -> int:
    from .symbols import generate, homogeneity

    try:
        syms = generate(args.structure, args.side)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = sorted(
        ((str(s), str(homogeneity(s, args.structure))) for s in syms),
        key=lambda row: row[0],
    )
    if args.json:
        text = json.dumps(dict(rows), indent=2, sort_keys=True) + "\n"
    else:
        width = max(len(r[0]) for r in rows)
        text = "\n".join(f"{name:<{width}}  {hom}" for name, hom in rows) + "\n"
    _emit(args, text)
    return 0


def _load_corpus(path: str | None):
    from .corpus import classification_corpus, parse_fixtures

    if path is None:
        return classification_corpus()
    with open(path) as fh:
        fixtures = parse_fixtures(fh.read())
    return [(name, fx.graph) for name, fx in fixtures.items()]


def cmd_graphs(args) -> int:
    from .feynman import validate_structure, wick_pairings

    if args.action == "validate":
        corpus = _load_corpus(args.corpus)
        lines = []
        bad = 0
        for ref, graph in corpus:
            report = validate_structure(graph)
            ok = report.ok()
            bad += not ok
            lines.append(f"{ref}: {'ok' if ok else 'FAIL ' + str(report.items)}")
        _emit(args, "\n".join(lines) + f"\nchecked {len(corpus)} graphs, {bad} failures\n")
        return 1 if bad else 0

    if args.action == "pair":
        from .corpus import load_graph

        graph = load_graph(args.graph) if ":" in args.graph else _dict_lookup(args)
        pairs = wick_pairings(graph, args.constraint)
        lines = [f"{g.name}: vertices={len(g.kinds)} edges={len(g.edges)} coeff={g.coeff}"
                 for g in pairs]
        _emit(args, "\n".join(lines) + f"\n{len(pairs)} pairings\n")
        return 0

    if args.action == "classify":
        from .classify import classify_corpus, manifest_forms
        from .corpus import load_manifest

        corpus = _load_corpus(args.corpus)
        crit = manifest_forms(load_manifest("class_crit"))
        g2 = manifest_forms(load_manifest("class_g2"))
        results = classify_corpus(corpus, crit_forms=crit, g2_forms=g2)
        graphs = dict(corpus)
        counts: dict[str, int] = {}
        mismatch = 0
        report = []
        for ref, res in sorted(results.items()):
            counts[res.verdict] = counts.get(res.verdict, 0) + 1
            expected = graphs[ref].expect
            entry = {"graph_ref": ref} | res.to_dict()
            if expected and expected != res.verdict:
                entry["expected"] = expected
                mismatch += 1
            report.append(entry)
        _emit(args, json.dumps({"counts": counts, "mismatches": mismatch,
                                "verdicts": report}, indent=2) + "\n")
        return 1 if mismatch else 0

    return 2


def _dict_lookup(args):
    corpus = dict(_load_corpus(args.corpus))
    return corpus[args.graph]


def cmd_constants(args) -> int:
    rows = [("quantity", "eps", "resolution", "value", "error_estimate", "label")]

    if args.action == "crho":
        from .kernels import crho_squared

        routes = ("spatial", "fourier") if args.route == "both" else (args.route,)
        values = []
        for route in routes:
            res = crho_squared(route, args.resolution)
            values.append(res.value)
            rows.append((f"crho_squared_{route}", "", str(args.resolution),
                         repr(res.value), repr(res.estimated_error), "noise-amplitude"))
        _emit(args, _csv(rows))
        if len(values) == 2 and abs(values[0] - values[1]) > 1e-3 * abs(values[0]):
            print("error: quadrature routes disagree", file=sys.stderr)
            return 1
        return 0

    if args.action == "geps":
        from .kernels import SquareKernel

        kernel = SquareKernel(resolution=args.resolution)
        for eps in _parse_eps_list(args.eps):
            total = kernel.integral(eps)
            rows.append(("square_kernel_integral", repr(eps), str(args.resolution),
                         repr(total), "", "scale-invariance"))
        _emit(args, _csv(rows))
        return 0

    if args.action == "gconv":
        from .kernels import gconv_limits_check

        for eps in _parse_eps_list(args.eps):
            res = gconv_limits_check(eps, n=args.n, resolution=args.resolution)
            for key, val in res.items():
                rows.append((f"gconv_{key}", repr(eps), str(args.n), repr(val), "",
                             "smoothing-residual"))
        _emit(args, _csv(rows))
        return 0

    return 2


def _csv(rows) -> str:
    return "\n".join(",".join(map(str, row)) for row in rows) + "\n"


def cmd_mc(args) -> int:
    import numpy as np

    from .kernels import bump_field, crho_squared, torus_coords
    from .montecarlo import (
        convergence_table,
        estimate_stats,
        pi_weighted,
        pi_xiixi,
        sample_noise,
        sample_seeds,
    )

    if args.action == "noise":
        values = []
        for s in sample_seeds(args.seed, args.samples):
            values.append(float(np.mean(sample_noise(args.n, s).xi ** 2)))
        stats = estimate_stats(values) if len(values) >= 16 else None
        text = _csv(
            [("quantity", "n", "samples", "value", "se", "seed"),
             ("cell_variance", args.n, args.samples,
              repr(float(np.mean(values))),
              repr(stats.mean_se if stats else ""), args.seed)]
        )
        _emit(args, text)
        return 0

    eps_list = _parse_eps_list(args.eps)
    try:
        if args.action == "xiixi":
            crho = crho_squared("spatial", args.resolution).value
            table = convergence_table(eps_list, args.n, args.samples, seed=args.seed,
                                      crho_sq=crho)
            rows = [("eps", "n", "samples", "var_ratio", "var_se", "mean", "mean_se",
                     "k4_ratio", "k4_se", "seed")]
            for row in table:
                rows.append(tuple(repr(row[k]) if isinstance(row[k], float) else row[k]
                                  for k in rows[0]))
            _emit(args, _csv(rows))
            return 0

        if args.action == "weighted":
            phi = bump_field(args.n, radius=0.25)
            x = torus_coords(args.n)
            xj = (x[:, None] if args.axis == 1 else x[None, :]) * np.ones((args.n, args.n))
            crho = crho_squared("spatial", args.resolution).value
            target = crho * float(np.sum((xj * phi) ** 2)) / (args.n**2)
            rows = [("eps", "n", "samples", "which", "axis", "var_ratio", "mean",
                     "mean_se", "seed")]
            for eps in eps_list:
                values = np.array(
                    [pi_weighted(sample_noise(args.n, s), eps, phi, args.which, args.axis)
                     for s in sample_seeds(args.seed, args.samples)]
                )
                stats = estimate_stats(values)
                rows.append((repr(eps), args.n, args.samples, args.which, args.axis,
                             repr(stats.variance / target), repr(stats.mean),
                             repr(stats.mean_se), args.seed))
            _emit(args, _csv(rows))
            return 0
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpam2d")
    parser.add_argument("--out", help="write output to this path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("symbols", help="print a symbol table with homogeneities")
    p.add_argument("--structure", choices=["unprimed", "primed"], required=True)
    p.add_argument("--side", choices=["RHS", "sol"], required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_symbols)

    p = sub.add_parser("graphs", help="validate, pair or classify graph fixtures")
    p.add_argument("action", choices=["validate", "pair", "classify"])
    p.add_argument("--corpus", help="fixture file (defaults to the shipped corpus)")
    p.add_argument("--graph", help="file:name of a stochastic graph (pair)")
    p.add_argument("--constraint", default="all")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_graphs)

    p = sub.add_parser("constants", help="kernel constants and limits")
    p.add_argument("action", choices=["crho", "geps", "gconv"])
    p.add_argument("--route", choices=["spatial", "fourier", "both"], default="both")
    p.add_argument("--resolution", type=int, default=128)
    p.add_argument("--eps", default="1..1/4")
    p.add_argument("--n", type=int, default=512)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("mc", help="Monte-Carlo verification runs")
    p.add_argument("action", choices=["noise", "xiixi", "weighted"])
    p.add_argument("--eps", default="2^-3..2^-6")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--resolution", type=int, default=128)
    p.add_argument("--which", choices=["xxiixi", "xiixxi"], default="xiixxi")
    p.add_argument("--axis", type=int, choices=[1, 2], default=1)
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
