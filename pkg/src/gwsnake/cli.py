"""Command-line interface.  Exit codes: 0 success, 2 usage error, 3 sampling failure."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import io
from .experiment_harness import ExperimentSpec, ReplicaFailure, load_spec, run_ensemble
from .experiments import EXPERIMENTS, run_named
from .offspring_laws import LawError, normalization_for, parse_law
from .plotting import emit_plot, process_plot, snake_plot, tree_svg
from .snake_stats import (
    StatReport,
    branch_composition,
    extract_peaks,
    holder_statistic,
    inversions,
    uniform_vertex_progeny,
)
from .spatial_snake import decorate, parse_displacement
from .tree_codec import encode, total_path_length
from .tree_sampler import SamplingFailure, sample_tree

EXIT_OK, EXIT_USAGE, EXIT_SAMPLING = 0, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gwsnake", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=False):
        sp.add_argument("--offspring", default="geometric:0.5", help="offspring law, e.g. geometric:0.5")
        sp.add_argument("--n", type=int, help="tree size is n + 1 vertices")
        sp.add_argument("--seed", type=int, required=seed)
        sp.add_argument("--out", default="-", help="output path ('-' for stdout)")
        sp.add_argument("--format", choices=["csv", "json", "svg", "bin"], default=None)
        sp.add_argument("--config")

    s = sub.add_parser("sample", help="sample a conditioned tree")
    common(s, seed=True)

    s = sub.add_parser("encode", help="Lukasiewicz, height and contour processes of a tree")
    common(s)
    s.add_argument("--in", dest="inp", required=True)

    s = sub.add_parser("snake", help="decorate a tree with displacements")
    common(s, seed=True)
    s.add_argument("--in", dest="inp")
    s.add_argument("--displacement", default="uniform3")
    s.add_argument("--contour", action="store_true", help="write the contour variant")

    s = sub.add_parser("stats", help="compute one statistic on a tree or snake")
    common(s)
    s.add_argument("statistic", choices=["inversions", "path-length", "holder", "peaks", "progeny", "branch"])
    s.add_argument("--in", dest="inp")
    s.add_argument("--perm", default="identity", help="identity, reverse, random or @file")
    s.add_argument("--gamma", type=float, default=0.4)
    s.add_argument("--eta", type=float, default=1.0)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--displacement", default="regime:p=2")

    s = sub.add_parser("ensemble", help="run a Monte Carlo ensemble")
    common(s)
    s.add_argument("--name", choices=sorted(EXPERIMENTS))
    s.add_argument("--replicas", type=int)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--displacement")
    s.add_argument("--stats", help="comma separated statistic names")

    s = sub.add_parser("plot", help="render a process, snake or tree")
    common(s)
    s.add_argument("--in", dest="inp")
    s.add_argument("--kind", choices=["process", "snake", "tree"], default="process")
    s.add_argument("--layout", choices=["radial", "layered"], default="radial")
    s.add_argument("--displacement", default="regime:p=2")
    s.add_argument("--eta", type=float)
    s.add_argument("--p", type=float, default=2.0)
    return p


def _write_text(out: str, text: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _tree_from(args, rng=None):
    if getattr(args, "inp", None):
        return io.read_tree_csv(args.inp)
    if args.n is None:
        raise UsageError("give --in or --n")
    if rng is None:
        if args.seed is None:
            raise UsageError("--seed is required to sample a tree")
        rng = np.random.default_rng(args.seed)
    return sample_tree(parse_law(args.offspring), args.n, rng)


def _cmd_sample(args):
    if args.n is None or args.n < 0:
        raise UsageError("--n must be a nonnegative integer")
    tree = sample_tree(parse_law(args.offspring), args.n, np.random.default_rng(args.seed))
    if args.format == "json":
        _write_text(args.out, json.dumps({"degrees": tree.degrees.tolist()}) + "\n")
    elif args.out == "-":
        sys.stdout.write("degree\n" + "".join(f"{d}\n" for d in tree.degrees.tolist()))
    else:
        io.write_tree_csv(args.out, tree)


def _cmd_encode(args):
    tree = io.read_tree_csv(args.inp)
    enc = encode(tree)
    if args.out == "-":
        raise UsageError("encode writes three files; --out must be a directory")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, values in zip("WHC", enc):
        if args.format == "bin":
            io.write_binary(out / f"{name}.bin", values)
        else:
            io.write_process_csv(out / f"{name}.csv", values)


def _cmd_snake(args):
    rng = np.random.default_rng(args.seed)
    tree = _tree_from(args, rng)
    law = parse_law(args.offspring)
    disp = parse_displacement(args.displacement)
    n = max(tree.n, 1)
    disp = disp.calibrate(n, normalization_for(law)(n), law.alpha)
    snake = decorate(tree, disp, rng)
    if args.out == "-":
        raise UsageError("snake needs --out")
    io.write_snake_csv(args.out, snake, contour=args.contour)


def _perm(args, size):
    if args.perm == "identity":
        return np.arange(size)
    if args.perm == "reverse":
        return np.arange(size)[::-1].copy()
    if args.perm == "random":
        if args.seed is None:
            raise UsageError("--perm random needs --seed")
        return np.random.default_rng(args.seed).permutation(size)
    if args.perm.startswith("@"):
        return np.loadtxt(args.perm[1:], dtype=np.int64, ndmin=1)
    raise UsageError(f"bad --perm {args.perm!r}")


def _cmd_stats(args):
    rng = np.random.default_rng(args.seed) if args.seed is not None else None
    tree = _tree_from(args, rng)
    law = parse_law(args.offspring)
    n = max(tree.n, 1)
    B = normalization_for(law)(n)
    params = {"offspring": args.offspring, "n": tree.n}
    if args.statistic == "inversions":
        params["perm"] = args.perm
        rep = StatReport("inversions", float(inversions(tree, _perm(args, tree.degrees.size))), params=params)
    elif args.statistic == "path-length":
        rep = StatReport("path_length", float(total_path_length(tree)), params=params)
    elif args.statistic == "holder":
        params["gamma"] = args.gamma
        rep = StatReport("holder", holder_statistic(tree.depth, B, args.gamma), params=params)
    elif args.statistic == "branch":
        br = branch_composition(tree, law.mu0)
        params.update(window=br.window, threshold=br.threshold, violated=br.violated)
        rep = StatReport("branch_max_first_child_fraction", br.max_fraction, params=params)
    else:
        if rng is None:
            raise UsageError(f"{args.statistic} needs --seed")
        if args.statistic == "progeny":
            rep = StatReport("progeny", uniform_vertex_progeny(tree, rng), params=params)
        else:
            disp = parse_displacement(args.displacement).calibrate(n, B, law.alpha)
            snake = decorate(tree, disp, rng)
            t_n = (n / B) ** (1 / args.p)
            pk = extract_peaks(snake, t_n, args.eta)
            params.update(displacement=args.displacement, eta=args.eta, p=args.p)
            rep = StatReport("peaks", float(len(pk)), params=params)
    rep.seed = args.seed
    _write_text(args.out, rep.to_json() + "\n")


def _cmd_ensemble(args):
    if args.name:
        if args.seed is None:
            raise UsageError("--seed is required")
        out = None if args.out == "-" else args.out
        results = run_named(args.name, args.seed, out_dir=out, replicas=args.replicas, workers=args.workers)
        summary = {k: [v.__dict__ for v in r.verdicts] for k, r in results.items()}
        sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True, default=float) + "\n")
        return
    if args.config:
        spec = load_spec(args.config)
        if args.seed is not None:
            spec.seed = args.seed
        if args.replicas is not None:
            spec.replicas = args.replicas
        if args.out != "-":
            spec.out_dir = args.out
    else:
        if args.seed is None:
            raise UsageError("--seed is required")
        if args.n is None or not args.stats:
            raise UsageError("give --config, --name, or --n with --stats")
        spec = ExperimentSpec(
            offspring=args.offspring, displacement=args.displacement, n_grid=[args.n],
            replicas=args.replicas or 1, seed=args.seed, stats=args.stats.split(","),
            out_dir=None if args.out == "-" else args.out,
        )
    res = run_ensemble(spec, workers=args.workers)
    if spec.out_dir is None:
        sys.stdout.write(json.dumps(res.to_dict(), indent=2, sort_keys=True, default=float) + "\n")


def _cmd_plot(args):
    fmt = args.format or "svg"
    if fmt not in ("svg", "csv"):
        raise UsageError("plot formats are svg and csv")
    if args.kind == "process":
        if not args.inp:
            raise UsageError("plot --kind process needs --in")
        values = io.read_binary(args.inp) if args.inp.endswith(".bin") else io.read_process_csv(args.inp)
        data = emit_plot(process_plot(Path(args.inp).stem, values, fmt))
    else:
        if args.seed is None:
            raise UsageError("--seed is required")
        rng = np.random.default_rng(args.seed)
        tree = _tree_from(args, rng)
        law = parse_law(args.offspring)
        n = max(tree.n, 1)
        B = normalization_for(law)(n)
        snake = decorate(tree, parse_displacement(args.displacement).calibrate(n, B, law.alpha), rng)
        if args.kind == "tree":
            if fmt != "svg":
                raise UsageError("tree renders are svg only")
            data = tree_svg(tree, snake.S, layout=args.layout).encode()
        else:
            scale = (n / B) ** (1 / args.p)
            peaks = extract_peaks(snake, scale, args.eta) if args.eta else None
            data = emit_plot(snake_plot(snake, peaks, scale, fmt))
    if args.out == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(args.out).write_bytes(data)


COMMANDS = {
    "sample": _cmd_sample,
    "encode": _cmd_encode,
    "snake": _cmd_snake,
    "stats": _cmd_stats,
    "ensemble": _cmd_ensemble,
    "plot": _cmd_plot,
}


def cli_main(argv: Optional[List[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gwsnake: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LawError, ValueError, OSError) as exc:
        print(f"gwsnake: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SamplingFailure, ReplicaFailure) as exc:
        print(f"gwsnake: sampling failure: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    return EXIT_OK


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
