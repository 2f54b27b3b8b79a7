"""Command-line front end: ``collatz-gf {validate,orbit,series,pfd,verify,report}``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import __version__
from .config import aggregate, build_report, config_from_map, load_config, make_manifest, read_report, save_config, write_report
from .dynamics import iterate, radius_R_w
from .pfd import pfd_nd
from .presets import PRESETS, get_preset
from .series import dump_series, orbit_series
from .verify import CHECK_KINDS, DEFAULT_SEED, CheckSpec, TolerancePolicy, run_check


class FlagError(ValueError):
    pass


def parse_complex(text: str, flag: str) -> complex:
    s = text.strip().replace(" ", "").replace("I", "i")
    try:
        return complex(s.replace("i", "j"))
    except ValueError:
        raise FlagError(f"{flag}: cannot parse {text!r} as a complex number (use a+bi)") from None


def parse_point(text: str, flag: str) -> tuple[complex, ...]:
    return tuple(parse_complex(part, flag) for part in text.split(","))


def parse_ints(text: str, flag: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise FlagError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def parse_k(text: str, flag: str = "--k") -> tuple[int, ...]:
    """``"3"``, ``"1..4"`` or ``"1,2,4"``."""
    out = []
    try:
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise FlagError(f"{flag}: expected an integer, a range a..b or a list, got {text!r}") from None
    if not out or any(k < 0 for k in out):
        raise FlagError(f"{flag}: iteration indices must be nonnegative")
    return tuple(sorted(set(out)))


def parse_checks(text: str) -> tuple[str, ...]:
    if text == "all":
        return CHECK_KINDS
    names = tuple(v.strip().replace("-", "_") for v in text.split(","))
    bad = [n for n in names if n not in CHECK_KINDS]
    if bad:
        raise FlagError(f"--check: unknown check(s) {', '.join(bad)}; choose from {', '.join(CHECK_KINDS)} or all")
    return names


def _load_map(args):
    if args.config:
        cfg = load_config(args.config)
        return cfg.build(), args.config, cfg.name
    return get_preset(args.preset), args.preset, args.preset


def _fmt_vec(v):
    return " ".join(str(x) for x in v)


def cmd_validate(args) -> int:
    cmap, _, name = _load_map(args)
    print(f"map {name}: d={cmap.d} m={list(cmap.m)} R_w={radius_R_w(cmap)}")
    print("r\tlambda\tmu")
    for br in cmap.branches:
        print(f"{list(br.r)}\t{list(br.lam)}\t{list(br.mu)}")
    if args.emit_config:
        save_config(config_from_map(cmap, name), args.emit_config)
        print(f"config written to {args.emit_config}")
    return 0


def cmd_orbit(args) -> int:
    cmap, _, _ = _load_map(args)
    start = parse_ints(args.start, "--start")
    if len(start) != cmap.d:
        raise FlagError(f"--start: expected {cmap.d} components")
    for n in iterate(cmap, start, args.steps):
        print(_fmt_vec(n))
    return 0


def cmd_series(args) -> int:
    cmap, _, _ = _load_map(args)
    k = parse_k(args.k)
    if len(k) != 1:
        raise FlagError("--k: series takes a single iteration index")
    limits = parse_ints(args.limits, "--limits") if args.limits else (16,) * cmap.d
    limits = limits * cmap.d if len(limits) == 1 else limits
    vec = orbit_series(cmap, k[0], limits)
    doc = {"k": k[0], "components": [dump_series(c) for c in vec.components]}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh)
    else:
        for j, comp in enumerate(vec.components):
            vals = comp.coeffs.real.astype(int).reshape(-1) if cmap.d == 1 else comp.coeffs.real.astype(int)
            print(f"component {j + 1}:")
            print(vals if cmap.d > 1 else _fmt_vec(vals))
    return 0


def cmd_pfd(args) -> int:
    cmap, _, _ = _load_map(args)
    r = parse_ints(args.r, "--r")
    doc = pfd_nd(cmap, r).to_dict()
    text = json.dumps(doc, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _spec_for(kind, cmap, args) -> CheckSpec:
    pol = TolerancePolicy(scale=args.tol_scale)
    spec = CheckSpec(kind, tolerance_policy=pol, seed=args.seed)
    if args.k:
        spec = replace(spec, ks=parse_k(args.k))
    if args.limits:
        spec = replace(spec, limits=parse_ints(args.limits, "--limits"))
    if args.nodes:
        spec = replace(spec, quad_nodes=args.nodes)
    if args.z:
        spec = replace(spec, sample_points=tuple(parse_point(z, "--z") for z in args.z))
    if args.w:
        spec = replace(spec, w_values=tuple(parse_complex(w, "--w") for w in args.w.split(",")))
    elif kind == "convergence":
        spec = replace(spec, w_values=(0.9 * float(radius_R_w(cmap)),))
    if args.K is not None:
        spec = replace(spec, K=args.K)
    if kind == "bound":
        spec = replace(spec, n_max=args.n_max if args.n_max is not None else 200 if cmap.d > 1 else 10_000,
                       k_max=args.k_max if args.k_max is not None else 12 if cmap.d > 1 else 30)
    if kind == "delta_identity":
        spec = replace(spec, tolerance_policy=replace(pol, abs_floor=1e-14), quad_nodes=args.nodes or 64)
    return spec


def cmd_verify(args) -> int:
    cmap, source, _ = _load_map(args)
    kinds = parse_checks(args.check)
    reports = []
    for kind in kinds:
        rep = run_check(cmap, _spec_for(kind, cmap, args))
        reports.append(rep)
        status = "PASS" if rep.all_pass else "FAIL"
        print(f"{status} {kind}: {len(rep.records)} records, max residual {rep.max_residual:.3e}, {rep.wall_time:.2f}s")
    params = {
        "check": list(kinds), "k": args.k, "limits": args.limits, "M": args.nodes, "tol_scale": args.tol_scale,
        "seed": args.seed, "z": args.z, "w": args.w, "K": args.K, "n_max": args.n_max, "k_max": args.k_max,
    }
    doc = build_report(make_manifest(source, "verify", params), reports)
    if args.out:
        write_report(doc, args.out)
        print(f"report written to {args.out}")
    return 0 if all(r.all_pass for r in reports) else 1


def cmd_report(args) -> int:
    docs = {path: read_report(path) for path in args.paths}
    kinds = aggregate(docs)
    labels = list(docs)
    print("kind\trecords\tmax_residual\tall_pass\t" + "\t".join(labels))
    for kind, agg in kinds.items():
        cells = ["-" if lab not in agg["sources"] else ("pass" if agg["sources"][lab] else "FAIL") for lab in labels]
        print(f"{kind}\t{agg['n_records']}\t{agg['max_residual']:.3e}\t{agg['all_pass']}\t" + "\t".join(cells))
    return 0 if all(agg["all_pass"] for agg in kinds.values()) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="collatz-gf", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def with_map(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--preset", default="3n+1", choices=sorted(PRESETS), help="named map (default 3n+1)")
        g.add_argument("--config", help="JSON map config")
        return sp

    sp = with_map(sub.add_parser("validate", help="check map conditions and print lambda/mu per residue"))
    sp.add_argument("--emit-config", metavar="PATH", help="write the validated map as a JSON config")
    sp.set_defaults(func=cmd_validate)

    sp = with_map(sub.add_parser("orbit", help="print t_0(n) .. t_steps(n)"))
    sp.add_argument("--start", required=True, help="start point, comma-separated for d > 1")
    sp.add_argument("--steps", type=int, default=10)
    sp.set_defaults(func=cmd_orbit)

    sp = with_map(sub.add_parser("series", help="truncated coefficients of f_k"))
    sp.add_argument("--k", default="0")
    sp.add_argument("--limits", help="truncation box, e.g. 16 or 8,8")
    sp.add_argument("--out", help="write a JSON series dump instead of printing")
    sp.set_defaults(func=cmd_series)

    sp = with_map(sub.add_parser("pfd", help="dump the decomposition L(r) of one residue class"))
    sp.add_argument("--r", required=True, help="residue vector, comma-separated")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_pfd)

    sp = with_map(sub.add_parser("verify", help="run numerical checks and write a report"))
    sp.add_argument("--check", default="recurrence", help=f"comma list from {', '.join(CHECK_KINDS)}, or all")
    sp.add_argument("--k", help="iteration indices: 3, 1..4 or 1,2,4")
    sp.add_argument("--limits", help="truncation box, e.g. 2000 or 96,96")
    sp.add_argument("--nodes", "-M", "--M", type=int, dest="nodes", help="quadrature nodes per circle")
    sp.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for random sample points")
    sp.add_argument("--z", action="append", help="sample point a+bi (components comma-separated); repeatable")
    sp.add_argument("--w", help="comma list of w values for bivariate/convergence")
    sp.add_argument("--K", type=int, help="truncation order in w")
    sp.add_argument("--n-max", type=int, help="bound check: largest start value per component")
    sp.add_argument("--k-max", type=int, help="bound check: largest iteration index")
    sp.add_argument("--out", help="report path (JSON)")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("report", help="merge reports and print the pass/fail matrix")
    sp.add_argument("paths", nargs="+")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
