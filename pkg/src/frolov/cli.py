"""Command line interface: ``frolov <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import corpus
from .analysis import predict_exponent
from .corpus import SmoothnessSpec, describe, format_fn_spec, get_integrand, parse_fn_spec
from .cubature import baseline_mc, randomized_frolov
from .errors import FrolovError
from .generator import build_generator, scale
from .harness import (DEFAULT_N_GRID, METHODS, StudyConfig, fmt_float, load_config_file,
                      read_results, report, run_study)
from .lattice import Randomization, draw_randomization, enumerate_nodes, unit_cube
from .streams import derive_stream
from .transform import transform_T
from .verify import LEMMAS, run_check


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _dump(obj) -> None:
    print(json.dumps(obj, default=_json_default, indent=2))


# ---------------------------------------------------------------------------
# subcommands

def cmd_matrix(args) -> int:
    base = build_generator(args.dim, args.check_radius)
    if args.json:
        _dump({"dim": base.dim, "entries": base.entries.tolist(), "det_abs": base.det_abs,
               "check_radius": base.check_radius, "check_margin": base.check_margin})
        return 0
    for row in base.entries:
        print(" ".join(fmt_float(x) for x in row))
    print(f"d_B = {fmt_float(base.det_abs)}")
    print(f"check_margin = {fmt_float(base.check_margin)} (radius {base.check_radius})")
    return 0


def _randomization(d: int, seed: int, u_text, v_text) -> Randomization:
    drawn = draw_randomization(d, derive_stream(seed, 0, 0), seed=seed, index=0)
    u = drawn.u if u_text is None else np.array(_floats(u_text))
    v = drawn.v if v_text is None else np.array(_floats(v_text))
    if len(u) != d or len(v) != d:
        raise UsageError(f"--u and --v need {d} comma-separated values")
    return Randomization(u, v, seed=seed, index=0)


def cmd_points(args) -> int:
    d = args.dim
    gen = scale(build_generator(d), args.n)
    rand = _randomization(d, args.seed, args.u, args.v)
    nodes = enumerate_nodes(gen, rand, unit_cube(d))
    lines = [f"# frolov-points v1, d={d}, n={fmt_float(args.n)}, seed={args.seed}",
             ",".join(f"x_{j + 1}" for j in range(d))]
    lines += [",".join(fmt_float(x) for x in row) for row in nodes.nodes]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, newline="")
    else:
        sys.stdout.write(text)
    return 0


def cmd_integrate(args) -> int:
    name, params = parse_fn_spec(args.fn)
    f = get_integrand(name, args.dim, params)
    stream = derive_stream(args.seed, 0, 0)
    if args.method == "mc":
        method = "mc"
        res = baseline_mc(f, int(round(args.n)), None, stream)
    else:
        method = "frolov-boundary-free" if args.boundary_free else "frolov"
        if not f.support_in_domain and not args.boundary_free:
            raise UsageError(f"{name} is not supported in the cube; add --boundary-free")
        target = transform_T(f) if args.boundary_free else f
        gen = scale(build_generator(args.dim), args.n)
        res = randomized_frolov(target, gen, draw_randomization(args.dim, stream))
    out = {"fn": format_fn_spec(name, f.params), "d": args.dim, "n": args.n,
           "method": method, "seed": args.seed, "value": res.value,
           "node_count": res.node_count, "exact": f.exact_integral}
    if args.json:
        _dump(out)
    else:
        for key, val in out.items():
            print(f"{key}: {'null' if val is None else val}")
    return 0


def cmd_corpus(args) -> int:
    rows = describe(corpus.NAMES, args.dim)
    if args.json:
        _dump(rows)
        return 0
    for row in rows:
        sm = row["smoothness"]
        smooth = "none" if sm is None else f"{sm['mode']} s={sm['s']:g} p={sm['p']:g}"
        params = ",".join(f"{k}={v}" for k, v in row["defaults"].items()) or "-"
        print(f"{row['name']:<16} params: {params:<12} support_in_cube: "
              f"{str(row['support_in_domain']).lower():<6} smoothness: {smooth:<22}"
              f" fourier: {row['fourier'] or '-'}")
    return 0


def cmd_verify(args) -> int:
    kwargs = {}
    if args.lemma == "tail-bound":
        kwargs = {"reps": args.reps, "seed": args.seed}
    elif args.lemma == "boxes":
        kwargs = {"seed": args.seed}
    result = run_check(args.lemma, args.dim, args.n, **kwargs)
    if args.json:
        _dump(result.as_dict())
    else:
        print(f"{args.lemma}: {'PASS' if result.passed else 'FAIL'}")
        for key, val in result.details.items():
            print(f"  {key}: {val}")
    return 0 if result.passed else 1


_STUDY_KEYS = ("fn", "dim", "method", "n_grid", "reps", "seed", "out", "raw",
               "rep_start", "workers", "boundary_free", "predict")


def _study_config(args) -> tuple[StudyConfig, str | None]:
    settings = load_config_file(args.config) if args.config else {}
    unknown = set(settings) - set(_STUDY_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in _STUDY_KEYS:
        val = getattr(args, key)
        if val is not None and val is not False:
            settings[key] = val
    missing = [k for k in ("fn", "dim", "out") if k not in settings]
    if missing:
        raise UsageError(f"study needs {', '.join('--' + k for k in missing)}")
    name, params = parse_fn_spec(str(settings["fn"]))
    method = str(settings.get("method", "frolov"))
    boundary_free = str(settings.get("boundary_free", "false")).lower() in ("1", "true", "yes")
    if boundary_free and method == "frolov":
        method = "frolov-boundary-free"
    grid = settings.get("n_grid", DEFAULT_N_GRID)
    if isinstance(grid, str):
        grid = _floats(grid)
    config = StudyConfig(
        fn=name, params=params, dim=int(settings["dim"]), method=method,
        n_grid=tuple(grid), reps=int(settings.get("reps", 200)),
        seed=int(settings.get("seed", 0)), rep_start=int(settings.get("rep_start", 0)),
        out=str(settings["out"]), raw=settings.get("raw"),
        workers=int(settings.get("workers", 1)))
    return config, settings.get("predict")


def parse_prediction(text: str, d: int) -> SmoothnessSpec:
    """``mode:s=1.5,p=2`` or ``mode:S=1;2,p=2`` as a smoothness spec in dimension ``d``."""
    mode, _, rest = text.partition(":")
    _, params = parse_fn_spec("x:" + rest)
    if "S" in params:
        S = np.atleast_1d(params.pop("S")).tolist()
    elif "s" in params:
        S = [float(params.pop("s"))] * d
    else:
        raise UsageError(f"prediction {text!r} needs s= or S=")
    p = float(params.pop("p", 2.0))
    if params:
        raise UsageError(f"unknown prediction keys {sorted(params)}")
    return SmoothnessSpec(S=tuple(S), p=p, mode=mode.strip())


def _default_prediction(fn_label: str, d: int):
    name, params = parse_fn_spec(fn_label)
    try:
        return get_integrand(name, d, params).smoothness
    except (KeyError, ValueError):
        return None


def _prediction(text, fn_label: str, d: int):
    spec = parse_prediction(text, d) if text else _default_prediction(fn_label, d)
    if spec is None or not np.isfinite(spec.s_min):
        return None
    return predict_exponent(spec)


def cmd_study(args) -> int:
    config, predict = _study_config(args)
    records = run_study(config)
    sys.stdout.write(report(records, _prediction(predict, config.fn_label, config.dim)))
    return 0


def cmd_rate(args) -> int:
    meta, records = read_results(args.input)
    if not records:
        raise UsageError(f"{args.input} holds no records")
    labels = {(m["fn"], m["d"], m["method"]) for m in meta}
    if len(labels) != 1:
        raise UsageError(f"{args.input} mixes several studies: {sorted(labels)}")
    fn_label, d, method = labels.pop()
    print(f"fn={fn_label} d={d} method={method}")
    sys.stdout.write(report(records, _prediction(args.predict, fn_label, int(d))))
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frolov",
                                     description="Randomized Frolov lattice cubature.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matrix", help="print the generator matrix")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--check-radius", type=int, default=20)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("points", help="write the node set of one randomization")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--u", help="dilation, comma-separated values in [0.5, 1.5]")
    p.add_argument("--v", help="shift, comma-separated values in [0, 1)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_points)

    p = sub.add_parser("integrate", help="one randomized estimate")
    p.add_argument("--fn", required=True, help="NAME[:k=v,...]")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("frolov", "mc"), default="frolov")
    p.add_argument("--boundary-free", action="store_true",
                   help="apply the change of variables first")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("corpus", help="list the test integrands")
    p.add_argument("action", choices=("list",))
    p.add_argument("--dim", type=int, default=2, help="dimension for exact integrals")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("verify", help="run an oracle suite")
    p.add_argument("--lemma", choices=LEMMAS, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--reps", type=int, default=10_000, help="replications for tail-bound")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("study", help="seeded convergence study")
    p.add_argument("--config", help="file of key=value lines; flags override it")
    p.add_argument("--fn")
    p.add_argument("--dim", type=int)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--n-grid", dest="n_grid", help="comma-separated increasing n values")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--rep-start", dest="rep_start", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--raw", help="also write per-replication rows")
    p.add_argument("--boundary-free", dest="boundary_free", action="store_true")
    p.add_argument("--predict", help="e.g. mixed:s=1.5,p=2")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("rate", help="fit and report a results file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--predict", help="e.g. mixed:s=1.5,p=2")
    p.set_defaults(func=cmd_rate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FrolovError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"frolov {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
