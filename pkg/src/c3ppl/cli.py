"""Command-line harness: run, bench, compare, enumerate, transform-dump, cache-dump."""

from __future__ import annotations

import argparse
import csv
import math
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor

from scipy import stats as _stats

from .errors import C3Error, EnumerationError, InitializationFailure
from .infer import (
    ENGINES, _okey, compare_engines, engine_name, enumerate_program, make_engine, run_chain,
)
from .lang import parse, unparse, value_repr
from .models import MODELS, build_model, normalized_size
from .transform import PASS_ORDER, PIPELINES, run_pipeline

BENCH_FIELDS = [
    "engine", "model", "size", "iterations", "seed", "rep", "wall_seconds",
    "proposals_per_second", "accept_rate", "mean_nodes_executed", "mean_entry_sc",
    "mean_exit_sc", "mean_choices_rescored",
]
METRICS = BENCH_FIELDS[6:]


class UsageError(Exception):
    pass


def _csv_list(s: str) -> list:
    return [x.strip() for x in s.split(",") if x.strip()]


def _int_list(s: str) -> list:
    out = []
    for part in _csv_list(s):
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _program(args):
    if getattr(args, "file", None):
        with open(args.file, encoding="utf-8") as fh:
            return fh.read()
    try:
        return build_model(args.model, args.size, seed=args.data_seed).program
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _engine(s: str) -> str:
    try:
        return engine_name(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def format_sample(sample) -> str:
    if isinstance(sample, tuple) and all(isinstance(p, tuple) and len(p) == 2 for p in sample) \
            and sample:
        return " ".join(f"{value_repr(k)}={value_repr(v)}" for k, v in sample)
    return "value=" + value_repr(sample)


# -- run ------------------------------------------------------------------------


def cmd_run(args, out) -> int:
    program = _program(args)
    burn = args.burn if args.burn is not None else args.iters // 10
    try:
        res = run_chain(program, args.engine, args.iters, thin=args.thin, burn=burn,
                        seed=args.seed, deterministic=args.deterministic or None)
    except InitializationFailure as exc:
        print(f"error: initialization failed: {exc}", file=sys.stderr)
        return 1
    dest = open(args.out, "w", encoding="utf-8") if args.out else out
    try:
        for s in res.samples:
            print(format_sample(s), file=dest)
        c = res.mean_counters
        print(f"# engine={res.engine} iterations={res.iterations} burn={burn} thin={args.thin} "
              f"samples={len(res.samples)} seed={args.seed}", file=dest)
        print(f"# acceptRate={res.accept_rate!r} wallSeconds={res.wall_seconds:.6f} "
              f"proposalsPerSecond={res.proposals_per_second:.3f}", file=dest)
        print("# " + " ".join(f"mean_{k}={v!r}" for k, v in sorted(c.items())), file=dest)
    finally:
        if dest is not out:
            dest.close()
    return 0


# -- bench ------------------------------------------------------------------------


def _bench_one(job):
    engine, model, size, iters, seed, rep, data_seed = job
    program = build_model(model, size, seed=data_seed).program
    res = run_chain(program, engine, iters, seed=seed)
    c = res.mean_counters
    return {
        "engine": engine, "model": model, "size": size, "iterations": iters, "seed": seed,
        "rep": rep, "wall_seconds": res.wall_seconds,
        "proposals_per_second": res.proposals_per_second, "accept_rate": res.accept_rate,
        "mean_nodes_executed": c.get("nodes_executed", 0.0),
        "mean_entry_sc": c.get("entry_sc", 0.0), "mean_exit_sc": c.get("exit_sc", 0.0),
        "mean_choices_rescored": c.get("rescored", 0.0),
    }


def confidence_interval(xs, level: float = 0.95):
    """Mean with a Student-t interval; degenerate for a single rep."""
    m = statistics.fmean(xs)
    if len(xs) < 2:
        return m, m, m
    sd = statistics.stdev(xs)
    h = _stats.t.ppf(0.5 + level / 2, len(xs) - 1) * sd / math.sqrt(len(xs))
    return m, m - h, m + h


def summarize(rows) -> list:
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["engine"], r["model"], r["size"]), []).append(r)
    out = []
    for (engine, model, size), rs in groups.items():
        row = {"engine": engine, "model": model, "size": size, "reps": len(rs)}
        for k in METRICS:
            m, lo, hi = confidence_interval([r[k] for r in rs])
            row[k], row[k + "_lo"], row[k + "_hi"] = m, lo, hi
        out.append(row)
    return out


def cmd_bench(args, out) -> int:
    models = _csv_list(args.models)
    engines = [_engine(e) for e in _csv_list(args.engines)] if args.engines != "all" \
        else list(ENGINES)
    sizes = _int_list(args.sizes)
    if not sizes:
        raise UsageError("--sizes must list at least one size")
    if not models:
        raise UsageError("--models must list at least one model")
    for m in models:
        if m not in MODELS:
            raise UsageError(f"unknown model {m!r}")
    jobs = []
    for model in models:
        for size in sizes:
            try:
                real = normalized_size(model, size) if args.normalized else size
                build_model(model, real, seed=args.data_seed)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            for engine in engines:
                for rep in range(args.reps):
                    jobs.append((engine, model, real, args.iters, args.seed + rep, rep,
                                 args.data_seed))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    dest = out if args.csv in (None, "-") else open(args.csv, "w", newline="", encoding="utf-8")
    try:
        w = csv.DictWriter(dest, fieldnames=BENCH_FIELDS)
        w.writeheader()
        w.writerows(rows)
    finally:
        if dest is not out:
            dest.close()
    summary = summarize(rows)
    if args.summary:
        fields = ["engine", "model", "size", "reps"] + [
            f for k in METRICS for f in (k, k + "_lo", k + "_hi")]
        with open(args.summary, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=fields)
            w.writeheader()
            w.writerows(summary)
    if dest is not out or args.summary:
        for r in summary:
            print(f"{r['model']:>12} size={r['size']:<4} {r['engine']:<12} "
                  f"nodes={r['mean_nodes_executed']:9.2f} "
                  f"pps={r['proposals_per_second']:10.1f} "
                  f"[{r['proposals_per_second_lo']:.1f}, {r['proposals_per_second_hi']:.1f}]",
                  file=sys.stderr if dest is out else out)
    return 0


# -- compare / enumerate ------------------------------------------------------------------


def cmd_compare(args, out) -> int:
    program = _program(args)
    seeds = _int_list(args.seeds)
    if not seeds:
        raise UsageError("--seeds must list at least one seed")
    ok = True
    for seed in seeds:
        try:
            res = compare_engines(program, args.iters, seed=seed)
        except InitializationFailure as exc:
            print(f"error: initialization failed: {exc}", file=sys.stderr)
            return 1
        status = "pass" if res.ok else "FAIL"
        print(f"seed {seed}: {status} ({res.proposals} proposals) {res.message}", file=out)
        ok &= res.ok
    return 0 if ok else 1


def cmd_enumerate(args, out) -> int:
    program = _program(args)
    try:
        dist = enumerate_program(program, max_paths=args.max_paths)
    except EnumerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for k in sorted(dist, key=_okey_sample):
        print(f"{format_sample(k)}\t{dist[k]!r}", file=out)
    return 0


def _okey_sample(s):
    if isinstance(s, tuple):
        return (1, tuple((_okey(k), _okey(v)) for k, v in s))
    return (0, _okey(s))


# -- dumps ------------------------------------------------------------------------


def cmd_transform_dump(args, out) -> int:
    ast = parse(_program(args))
    passes = _csv_list(args.passes) if args.passes else PIPELINES[args.engine]
    try:
        tp = run_pipeline(ast, passes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(";; source", file=out)
    print(unparse(ast), file=out)
    for name, stage in tp.stages:
        print(f";; after {name}", file=out)
        print(unparse(stage), file=out)
    return 0


def cmd_cache_dump(args, out) -> int:
    program = _program(args)
    if args.engine not in ("caching", "c3"):
        raise UsageError("cache-dump needs a caching engine (caching or c3)")
    try:
        eng = make_engine(program, args.engine, seed=args.seed,
                          deterministic=args.deterministic or None).init()
    except InitializationFailure as exc:
        print(f"error: initialization failed: {exc}", file=sys.stderr)
        return 1
    print(";; initial", file=out)
    print(eng.rt.dump_tree(), file=out)
    for _ in range(args.iters):
        r = eng.step()
        addr = "[" + ",".join(map(str, r.address)) + "]" if r.address is not None else "-"
        print(f";; proposal {r.index} {addr} accepted={str(r.accepted).lower()}", file=out)
        print(eng.rt.dump_tree(), file=out)
    return 0


# -- parser ------------------------------------------------------------------------


def _add_program_args(p, default_model=None):
    g = p.add_mutually_exclusive_group(required=default_model is None)
    g.add_argument("--model", choices=MODELS, default=default_model)
    g.add_argument("--file", help="program file (.c3p) instead of a built-in model")
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--data-seed", type=int, default=0, help="seed for synthetic data")


def _positive(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="c3ppl", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run one MH chain and print samples")
    _add_program_args(p)
    p.add_argument("--engine", type=_engine, default="c3")
    p.add_argument("--iters", type=_positive, default=1000)
    p.add_argument("--thin", type=_positive, default=1)
    p.add_argument("--burn", type=_nonneg, default=None, help="default: 10%% of --iters")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--deterministic", action="store_true",
                   help="select choices by sorted address (also C3_DETERMINISTIC=1)")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("bench", help="throughput and counter sweep, CSV output")
    p.add_argument("--models", default="hmm")
    p.add_argument("--engines", default="all")
    p.add_argument("--sizes", default="10")
    p.add_argument("--normalized", action="store_true",
                   help="treat sizes as normalized model sizes 1..10")
    p.add_argument("--iters", type=_positive, default=1000)
    p.add_argument("--reps", type=_positive, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--csv", default=None, help="per-rep rows (default stdout)")
    p.add_argument("--summary", default=None, help="mean and 95%% bounds per group")
    p.add_argument("--jobs", type=_positive, default=1)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("compare", help="lockstep cross-engine check")
    _add_program_args(p)
    p.add_argument("--iters", type=_positive, default=1000)
    p.add_argument("--seeds", default="0")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("enumerate", help="exact posterior of a finite discrete model")
    _add_program_args(p)
    p.add_argument("--max-paths", type=_positive, default=10 ** 6)
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("transform-dump", help="print the program after each pass")
    _add_program_args(p)
    p.add_argument("--engine", type=_engine, default="c3")
    p.add_argument("--passes", default=None, help=f"comma list from {','.join(PASS_ORDER)}")
    p.set_defaults(fn=cmd_transform_dump)

    p = sub.add_parser("cache-dump", help="print the cache tree after each proposal")
    _add_program_args(p)
    p.add_argument("--engine", type=_engine, default="c3")
    p.add_argument("--iters", type=_nonneg, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deterministic", action="store_true")
    p.set_defaults(fn=cmd_cache_dump)
    return ap


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args, out)
    except UsageError as exc:
        ap.error(str(exc))  # exits 2
    except (C3Error, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
