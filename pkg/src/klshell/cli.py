"""Command line interface.

Subcommands:
  verify       analytic test-case engine: closed-form table reproduction,
               pass/fail matrix, torsion stress ratio
  bench        run one benchmark and export CSV/VTK/manifest
  convergence  error-versus-dofs study of a linear benchmark

A JSON config file (--config) overrides command line flags, which in turn
override benchmark defaults.
"""

from __future__ import annotations

import argparse
import json
import sys


def _verify(args) -> int:
    from .verifier import (
        CASES,
        MODELS,
        TABLE_EXPECTED,
        compare_tables,
        matrix_symbols,
        run_matrix,
        torsion_stress_ratio,
    )

    results = compare_tables(n_draws=5, seed=args.seed)
    worst = max(r[3] for r in results)
    tables_ok = worst < 1e-10
    print(f"closed-form tables: worst cell error {worst:.3e} "
          f"({'ok' if tables_ok else 'FAIL'})")

    matrix = run_matrix()
    expected_ok = all(matrix[(c, m)] == TABLE_EXPECTED[c][m]
                      for c in CASES for m in MODELS)
    print()
    print(matrix_symbols(matrix))
    print()
    print(f"pass/fail matrix matches the expected summary: "
          f"{'yes' if expected_ok else 'NO'}")

    ratio = torsion_stress_ratio(100.0, 1.0)
    ratio_ok = abs(ratio / 1e-5 - 1.0) < 0.2
    print(f"torsion bending-vs-membrane stress ratio at R/T=100: {ratio:.4e} "
          f"({'ok' if ratio_ok else 'FAIL'})")

    if args.json:
        doc = {
            "tables_worst_error": worst,
            "tables_ok": bool(tables_ok),
            "matrix": {f"{c}/{m}": matrix[(c, m)] for c in CASES for m in MODELS},
            "matrix_ok": bool(expected_ok),
            "torsion_ratio": ratio,
            "torsion_ok": bool(ratio_ok),
        }
        with open(args.json, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
        print(f"wrote {args.json}")
    return 0 if (tables_ok and expected_ok and ratio_ok) else 1


def _apply_config(args, fields) -> None:
    if not getattr(args, "config", None):
        return
    with open(args.config) as fh:
        doc = json.load(fh)
    for key in fields:
        if key in doc:
            setattr(args, key, doc[key])


def _bench(args) -> int:
    from .bench import BENCH_NAMES, BenchmarkDef, run_benchmark

    _apply_config(args, ("name", "model", "degree", "mesh", "steps", "skew", "out"))
    if args.name not in BENCH_NAMES:
        print(f"unknown benchmark {args.name!r}; choose from {BENCH_NAMES}", file=sys.stderr)
        return 2
    bench = BenchmarkDef(args.name, model=args.model, degree=args.degree,
                         mesh=args.mesh, steps=args.steps, skew=args.skew)
    result = run_benchmark(bench, out_dir=args.out)
    for name, trace in sorted(result["monitors"].items()):
        print(f"{name}: {trace[-1][1]:+.6e} at load factor {trace[-1][0]:g}")
    print(f"elapsed: {result['elapsed']:.2f} s")
    if args.out:
        print(f"outputs in {args.out}")
    return 0


def _convergence(args) -> int:
    from .bench import run_convergence, write_csv

    _apply_config(args, ("name", "model", "degree", "meshes", "skew", "out"))
    if args.name not in ("plate", "pinched_linear"):
        print("convergence studies exist for the linear benchmarks "
              "(plate, pinched_linear)", file=sys.stderr)
        return 2
    meshes = [int(s) for s in str(args.meshes).split(",")]
    rows = run_convergence(args.name, meshes, model=args.model,
                           degree=args.degree, skew=args.skew)
    print(f"{'mesh':>6} {'dofs':>8} {'value':>14} {'reference':>14} {'rel_error':>12}")
    for r in rows:
        print(f"{r['mesh']:>6d} {r['dofs']:>8d} {r['value']:>14.6e} "
              f"{r['reference']:>14.6e} {r['rel_error']:>12.3e}")
    if args.out:
        write_csv(args.out, ["mesh", "dofs", "value", "reference", "rel_error"],
                  [[r["mesh"], r["dofs"], r["value"], r["reference"], r["rel_error"]]
                   for r in rows])
        print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="klshell",
                                     description="isogeometric Kirchhoff-Love shell solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run the analytic verification engine")
    p_verify.add_argument("--json", help="write a machine-readable report")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=_verify)

    p_bench = sub.add_parser("bench", help="run one benchmark")
    p_bench.add_argument("name")
    p_bench.add_argument("--model", default="new")
    p_bench.add_argument("--degree", type=int, default=0)
    p_bench.add_argument("--mesh", type=int, default=0)
    p_bench.add_argument("--steps", type=int, default=0)
    p_bench.add_argument("--skew", type=float, default=0.0)
    p_bench.add_argument("--out", default=None)
    p_bench.add_argument("--config", default=None)
    p_bench.set_defaults(func=_bench)

    p_conv = sub.add_parser("convergence", help="mesh convergence study")
    p_conv.add_argument("name")
    p_conv.add_argument("--meshes", default="4,8,16,32")
    p_conv.add_argument("--model", default="new")
    p_conv.add_argument("--degree", type=int, default=0)
    p_conv.add_argument("--skew", type=float, default=0.0)
    p_conv.add_argument("--out", default=None)
    p_conv.add_argument("--config", default=None)
    p_conv.set_defaults(func=_convergence)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
