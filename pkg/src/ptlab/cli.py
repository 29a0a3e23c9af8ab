"""Command line entry point: ``ptlab <subcommand> ...``.

Exit codes: 0 when every verdict passes, 1 when any fails, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import diagrams, experiments
from .errors import ArgumentError, ConfigError, PtlabError, ResourceLimitError, SingularSystemError
from .freeprob import MomentFunctional, adjoint_letter, cumulants_from_moments, limit_functional
from .matrices import EnsembleSpec, WordSpec, dump_matrix, mc_word_moment, sample, stream
from .partitions import (
    STAR,
    EpsilonMap,
    enumerate_ap,
    enumerate_eps_pairings,
    enumerate_nc12,
    enumerate_noncrossing,
    enumerate_pairings,
)
from .ratfunc import RationalFunction
from .weingarten import CycleType, wg_exact

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # shared so the flags work before or after the subcommand
    default = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=default, help="experiment config (JSON)")
    p.add_argument("--seed", type=int, default=default)
    p.add_argument("--out", default=default, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=default)
    p.add_argument("--threads", type=int, default=default)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    parser = argparse.ArgumentParser(prog="ptlab", parents=[_global_flags(suppress=False)],
                                     description="Partial transposes, Weingarten calculus and free cumulants.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partitions", parents=[common], help="enumerate pairings and partitions")
    p.add_argument("kind", choices=("pairings", "eps-pairings", "nc", "nc12", "ap", "counts"))
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--eps", help="labels over 1 and *, e.g. '1*1*' (eps-pairings)")

    p = sub.add_parser("wg", parents=[common], help="Weingarten function and entry moments")
    wsub = p.add_subparsers(dest="wg_command", required=True)
    e = wsub.add_parser("exact", parents=[common])
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--parts", required=True, help="cycle type, e.g. '2' or '2,1'")
    g = e.add_mutually_exclusive_group()
    g.add_argument("--dim", type=int)
    g.add_argument("--symbolic", action="store_true")
    e = wsub.add_parser("entry-moment", parents=[common])
    e.add_argument("--word", required=True, help="e.g. 'u11 u22 u11* u22*'")
    e.add_argument("--dim", type=int, required=True)

    p = sub.add_parser("predict", parents=[common], help="limit predictions from a moment functional")
    p.add_argument("--moments", required=True, help="JSON: word string -> [re, im]")
    p.add_argument("--word", action="append", default=[], help="word such as 'A:G A:G*' (repeatable)")
    p.add_argument("--cumulants", action="store_true", help="emit free cumulants instead of moments")

    p = sub.add_parser("verify", parents=[common], help="run an experiment")
    p.add_argument("experiment", choices=("entry-moments", "limit-dist", "freeness", "blocks", "invariance"))
    p.add_argument("--m", type=int, help="blocks: word length")
    p.add_argument("--word", action="append", default=None, help="word (repeatable)")
    p.add_argument("--grid", help="blocks: comma-separated grid of b = d")
    p.add_argument("--samples", type=int)
    p.add_argument("--dims", help="ladder such as '32x32,16x16'")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate of one word moment")
    p.add_argument("--ensemble", default="wishart", choices=("haar-unitary", "wishart", "ginibre", "gue"))
    p.add_argument("--b", type=int, default=8)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--n", type=int)
    p.add_argument("--lam", type=float, default=0.25)
    p.add_argument("--word", required=True)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--dump", help="write the first draw of each matrix to <path>.<name>.fptm")
    return parser


def _write(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _cmd_partitions(args) -> int:
    m = args.m
    if args.kind == "counts":
        rows = []
        for k in range(1, m + 1):
            rows.append({
                "m": k,
                "pairings": len(enumerate_pairings(k)),
                "eps_pairings": len(enumerate_eps_pairings(EpsilonMap.alternating(k))),
                "noncrossing": len(enumerate_noncrossing(range(1, k + 1))),
                "nc12": len(enumerate_nc12(k)),
                "ap": len(enumerate_ap(k)),
            })
        if args.format == "json":
            _write(json.dumps(rows, indent=2) + "\n", args.out)
        else:
            head = list(rows[0])
            _write(",".join(head) + "\n" + "".join(",".join(str(r[h]) for h in head) + "\n" for r in rows), args.out)
        return EXIT_OK
    if args.kind == "pairings":
        items = [p.pairs() for p in enumerate_pairings(m)]
    elif args.kind == "eps-pairings":
        eps = EpsilonMap(tuple(args.eps)) if args.eps else EpsilonMap.alternating(m)
        items = [p.pairs() for p in enumerate_eps_pairings(eps)]
    elif args.kind == "nc":
        items = [p.blocks for p in enumerate_noncrossing(range(1, m + 1))]
    elif args.kind == "nc12":
        items = [p.blocks for p in enumerate_nc12(m)]
    else:
        items = [p.blocks for p in enumerate_ap(m)]
    if args.format == "json":
        _write(json.dumps([[list(b) for b in it] for it in items]) + "\n", args.out)
    else:
        _write("".join(" ".join("(" + ",".join(map(str, b)) + ")" for b in it) + "\n" for it in items), args.out)
    return EXIT_OK


def _cmd_wg(args) -> int:
    if args.wg_command == "exact":
        parts = tuple(int(x) for x in args.parts.split(","))
        ct = CycleType(parts)
        if ct.m != args.m:
            raise ArgumentError(f"parts {parts} do not sum to m={args.m}")
        if args.dim is None:
            val = wg_exact(ct)
            if args.format == "csv" or args.format is None and not args.symbolic:
                _write(str(val) + "\n", args.out)
            else:
                _write(json.dumps(val.to_json()) + "\n", args.out)
        else:
            val = wg_exact(ct, args.dim)
            _write(f"{val.numerator}/{val.denominator}\n", args.out)
        return EXIT_OK
    word = experiments.EntryWord.parse(args.word)
    val = word.exact(args.dim)
    _write(f"{val.numerator}/{val.denominator}\n", args.out)
    return EXIT_OK


def _parse_value(v):
    if isinstance(v, list):
        if len(v) != 2:
            raise ConfigError(f"moment values must be [re, im], got {v}")
        re, im = (Fraction(x) if isinstance(x, str) else x for x in v)
        return re if im == 0 else complex(re, im)
    return Fraction(v) if isinstance(v, str) else v


def load_functional(path) -> MomentFunctional:
    """Plain moment functional from JSON ``{"A A*": [re, im], ...}``; values may be "p/q" strings."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read moments: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("moments file must be a JSON object")
    table = {}
    for key, v in raw.items():
        try:
            w = WordSpec.parse(key)
        except ArgumentError as exc:
            raise ConfigError(str(exc)) from None
        if any(x.symbol != "I" for x in w.letters):
            raise ConfigError(f"moment keys must be plain words: {key!r}")
        table[tuple((x.matrix, x.nu) for x in w.letters)] = _parse_value(v)
    phi = MomentFunctional(table, adjoint=adjoint_letter)
    if any(nu == STAR for key in table for _, nu in key):
        return phi
    # no starred key anywhere: the matrices are taken to be self-adjoint
    return lambda word: phi(tuple((r, "1") for r, _ in word))


def _jsonable(v):
    if isinstance(v, Fraction):
        return [str(v), "0"] if v.denominator != 1 else [v.numerator, 0]
    if isinstance(v, int):
        return [v, 0]
    v = complex(v)
    return [v.real, v.imag]


def _cmd_predict(args) -> int:
    phi = load_functional(args.moments)
    lim = limit_functional(phi)
    words = args.word
    if not words:
        with open(args.moments) as fh:
            a = sorted(WordSpec.parse(k).matrices()[0] for k in json.load(fh))[0]
        words = [" ".join([f"{a}:G"] * k) for k in range(1, 5)]
    out = {}
    for text in words:
        w = WordSpec.parse(text).as_tuples()
        out[text] = _jsonable(cumulants_from_moments(lim, w) if args.cumulants else lim(w))
    _write(json.dumps({"kind": "cumulants" if args.cumulants else "moments", "values": out}, indent=2) + "\n", args.out)
    return EXIT_OK


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from None


def _parse_dims(text: str):
    out = []
    for item in text.split(","):
        b, _, d = item.partition("x")
        out.append([int(b), int(d or b)])
    return out


DEFAULT_CONFIGS = {
    "entry-moments": {"experiment": "entry-moments", "dims": [[2, 4]], "samples": 100000},
    "limit-dist": {"experiment": "limit-distribution", "ensembles": {"A": {"kind": "wishart", "lam": 0.25}},
                   "dims": [[32, 32]], "samples": 32},
    "freeness": {"experiment": "freeness",
                 "ensembles": {"A": {"kind": "wishart", "lam": 0.25}, "B": {"kind": "wishart", "lam": 0.25}},
                 "dims": [[32, 32]], "samples": 32},
    "blocks": {"experiment": "blocks", "m": 2},
    "invariance": {"experiment": "invariance", "ensembles": {"A": {"kind": "wishart", "lam": 0.25}},
                   "dims": [[8, 8]], "samples": 200},
}


def _cmd_verify(args) -> int:
    obj = _load_config(args.config) if args.config else dict(DEFAULT_CONFIGS[args.experiment])
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    wanted = experiments.ALIASES.get(args.experiment, args.experiment)
    given = experiments.ALIASES.get(obj.get("experiment", wanted), obj.get("experiment"))
    if given != wanted:
        raise ConfigError(f"config is for experiment {obj.get('experiment')!r}, not {args.experiment!r}")
    obj["experiment"] = wanted
    if args.seed is not None:
        obj["seed"] = args.seed
    if args.threads is not None:
        obj["threads"] = args.threads
    if args.samples is not None:
        obj["samples"] = args.samples
    if args.dims:
        obj["dims"] = _parse_dims(args.dims)
    if args.word:
        obj["words"] = args.word
    if args.m is not None:
        obj["m"] = args.m
        if not args.word:
            obj.pop("words", None)
    if args.grid:
        obj["grid"] = [int(x) for x in args.grid.split(",")]
    cfg = experiments.ExperimentConfig.from_dict(obj)
    report = experiments.run(cfg)
    experiments.emit_report(report, args.format or "csv", args.out)
    return report.exit_code


def _cmd_simulate(args) -> int:
    word = WordSpec.parse(args.word)
    M = args.b * args.d
    n = args.n if args.n is not None else max(1, round(M / args.lam))
    spec = EnsembleSpec(args.ensemble, args.b, args.d, n if args.ensemble == "wishart" else None)
    seed = args.seed or 0
    est = mc_word_moment(word, spec, args.samples, seed, args.threads or 1)
    if args.dump:
        for k, name in enumerate(word.matrices()):
            dump_matrix(sample(spec, stream(seed, 0, k)), f"{args.dump}.{name}.fptm")
    rec = {"word": str(word), "ensemble": args.ensemble, "b": args.b, "d": args.d, "n": spec.n, **est.to_dict()}
    if args.format == "csv":
        text = ",".join(rec) + "\n" + ",".join(repr(v) if isinstance(v, float) else str(v) for v in rec.values()) + "\n"
    else:
        text = json.dumps(rec, indent=2) + "\n"
    _write(text, args.out)
    return EXIT_OK


COMMANDS = {
    "partitions": _cmd_partitions,
    "wg": _cmd_wg,
    "predict": _cmd_predict,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ArgumentError, ResourceLimitError, SingularSystemError) as exc:
        print(f"ptlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PtlabError as exc:
        print(f"ptlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
