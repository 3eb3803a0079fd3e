"""Command line front end.

Six subcommands: `verify` replays the exact check suite, `enumerate` and
`sample` expose the oracle and the chain sampler on a single instance, and
the three scan commands drive the desk-scale studies. Study parameters come
from flags or from a key=value config file (flags win). The process exits 0
only when every verdict the invoked command produced has passed.
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .experiments import (_interior_near_origin, loop_scan, tail_scan,
                          variance_scan, verify_suite)
from .heights import BoundaryCondition, Model, const_bc, parse_bc, pm1_bc
from .lattice import build_patch, parse_region
from .mcmc import SamplerConfig, run
from .oracle import CapacityError, enumerate_heights, marginal_stats

# config-file keys and how to coerce their string values; every key is the
# dest of exactly one flag so a file line and a flag are interchangeable
_COERCE = {
    "seed": int,
    "threads": int,
    "sweeps": int,
    "burnin": int,
    "thin": int,
    "cluster_period": int,
    "box": int,
    "mmax": int,
    "ratio": int,
    "kind": str,
    "region": str,
    "c": str,
    "bc": str,
    "sizes": str,
    "groups": str,
    "out": str,
    "format": str,
    "full": lambda s: s.lower() in ("1", "true", "yes"),
}


def _load_config(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _COERCE:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _COERCE[key](val)
    return out


def _parse_sizes(text: str) -> list:
    return [int(t) for t in text.replace(" ", "").split(",") if t]


def _parse_c(text: str):
    return Fraction(str(text))


def _make_bc(spec: str, patch) -> BoundaryCondition:
    """pm1 | const:<k> | <v>:<vals>;<v>:<vals> | @<file in BC-line format>."""
    spec = spec.strip()
    if spec.startswith("@"):
        return parse_bc(Path(spec[1:]).read_text())
    if spec == "pm1":
        return pm1_bc(patch)
    if spec.startswith("const:"):
        return const_bc(patch, int(spec.split(":", 1)[1]))
    values = {}
    for part in spec.split(";"):
        v, vals = part.split(":")
        values[int(v)] = tuple(int(x) for x in vals.split(","))
    return BoundaryCondition(values)


def _build_model(args):
    patch = build_patch(args.kind, parse_region(args.region))
    model = Model(patch, _parse_c(args.c))
    return patch, model, _make_bc(args.bc, patch)


def _sampler_config(args) -> SamplerConfig:
    return SamplerConfig(sweeps=args.sweeps, burnin=args.burnin,
                         thin=args.thin, cluster_period=args.cluster_period,
                         seed=args.seed)


def _emit(text: str, args, filename: str) -> None:
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / filename).write_text(text)
    else:
        sys.stdout.write(text)


def _write_study(res, args) -> int:
    if args.format == "json":
        _emit(res.to_json(), args, f"{res.study}.json")
    else:
        _emit(res.to_csv(), args, f"{res.study}.csv")
    sys.stdout.write(res.verdict_lines())
    return 0 if res.ok else 1


def _cmd_verify(args) -> int:
    groups = _parse_groups(args.groups)
    rep = verify_suite(groups)
    _emit(rep.dump(), args, "verify.txt")
    if args.out:
        sys.stdout.write(rep.dump())
    return 0 if rep.ok else 1


def _parse_groups(text):
    if not text:
        return None
    return [g for g in text.replace(" ", "").split(",") if g]


def _cmd_enumerate(args) -> int:
    patch, model, bc = _build_model(args)
    dist = enumerate_heights(model, bc)
    lines = [f"# {args.kind} {args.region} c={args.c} "
             f"fields={len(dist)} Z={dist.Z}"]
    for v in range(model.graph.n):
        pmf, mean, var = marginal_stats(dist, v)
        support = " ".join(f"{k}:{p}" for k, p in pmf.items())
        lines.append(f"vertex {v} mean={mean} var={var} pmf[{support}]")
    text = "\n".join(lines) + "\n"
    if args.full:
        text += dist.dump()
    _emit(text, args, "enumerate.txt")
    return 0


def _cmd_sample(args) -> int:
    patch, model, bc = _build_model(args)
    try:
        x0 = _interior_near_origin(patch)
    except ValueError:
        x0 = patch.center_vertex()
    res = run(model, bc, _sampler_config(args),
              {"h": lambda h, B, om: float(h[x0]),
               "h2": lambda h, B, om: float(h[x0]) ** 2,
               "open_frac": lambda h, B, om: float(om.mean())})
    text = f"# vertex {x0}, {res.nsweeps} sweeps\n" + res.dump()
    _emit(text, args, "sample.txt")
    return 0


def _cmd_variance_scan(args) -> int:
    res = variance_scan(args.kind, _parse_c(args.c), _parse_sizes(args.sizes),
                        _sampler_config(args), threads=args.threads)
    return _write_study(res, args)


def _cmd_loop_scan(args) -> int:
    res = loop_scan(args.kind, _parse_c(args.c), _parse_sizes(args.sizes),
                    _sampler_config(args), threads=args.threads,
                    ratio=args.ratio)
    return _write_study(res, args)


def _cmd_tail_scan(args) -> int:
    res = tail_scan(args.kind, _parse_c(args.c), args.box, args.mmax,
                    _sampler_config(args), threads=args.threads)
    return _write_study(res, args)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file with defaults for any flag")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="directory for result files (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    sampler = argparse.ArgumentParser(add_help=False)
    sampler.add_argument("--sweeps", type=int, default=1000)
    sampler.add_argument("--burnin", type=int, default=None)
    sampler.add_argument("--thin", type=int, default=1)
    sampler.add_argument("--cluster-period", type=int, default=None,
                         dest="cluster_period")

    instance = argparse.ArgumentParser(add_help=False)
    instance.add_argument("--kind", default="honeycomb")
    instance.add_argument("--region", default="Lozenge(2)")
    instance.add_argument("--c", default="2")
    instance.add_argument("--bc", default="pm1")

    p = argparse.ArgumentParser(prog="liplat",
                                description="weighted Lipschitz field toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify", parents=[common],
                        help="run the exact check suite")
    sp.add_argument("--groups", help="comma list, default all")
    sp.set_defaults(fn=_cmd_verify)

    sp = sub.add_parser("enumerate", parents=[common, instance],
                        help="exact distribution of one instance")
    sp.add_argument("--full", action="store_true",
                    help="also dump every configuration")
    sp.set_defaults(fn=_cmd_enumerate)

    sp = sub.add_parser("sample", parents=[common, instance, sampler],
                        help="run the chain sampler on one instance")
    sp.set_defaults(fn=_cmd_sample)

    sp = sub.add_parser("variance-scan", parents=[common, sampler],
                        help="second moment across a size ladder")
    sp.add_argument("--kind", default="honeycomb")
    sp.add_argument("--c", default="2")
    sp.add_argument("--sizes", default="4,8,16")
    sp.set_defaults(fn=_cmd_variance_scan)

    sp = sub.add_parser("loop-scan", parents=[common, sampler],
                        help="circuit frequencies in annuli")
    sp.add_argument("--kind", default="honeycomb")
    sp.add_argument("--c", default="1")
    sp.add_argument("--sizes", default="2,4")
    sp.add_argument("--ratio", type=int, default=3)
    sp.set_defaults(fn=_cmd_loop_scan)

    sp = sub.add_parser("tail-scan", parents=[common, sampler],
                        help="upper tail of the height at the center")
    sp.add_argument("--kind", default="square")
    sp.add_argument("--c", default="3")
    sp.add_argument("--box", type=int, default=6)
    sp.add_argument("--mmax", type=int, default=3)
    sp.set_defaults(fn=_cmd_tail_scan)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # first pass finds --config so its values become defaults, flags still
    # win; abbreviation must stay off or --c would match as a prefix
    probe = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    try:
        if known.config:
            defaults = _load_config(known.config)
            for sub in parser._subparsers._group_actions[0].choices.values():
                sub.set_defaults(**{k: v for k, v in defaults.items()
                                    if any(a.dest == k for a in sub._actions)})
        args = parser.parse_args(argv)
        return args.fn(args)
    except (ValueError, MemoryError, OSError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
