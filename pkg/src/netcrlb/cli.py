"""Command-line entry point: ``netcrlb <command> [options]``.

Commands write CSV to ``--output`` (or stdout).  When an output path is given a
``<output>.manifest.txt`` sidecar records the parameters, seed and version; the
CSV's first line carries the manifest hash.

Exit codes: 0 ok, 2 usage error, 3 numerical failure, 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, config
from .analytic import (CondCdfParams, MarginalParams, cond_cdf_s, default_s_grid, marginal_cdf_s,
                       quantile, tabulate_cdf)
from .errors import ConfigError, QuadratureError, SingularGeometry
from .infoanalysis import MIN_SAMPLES, best_surrogate, mi_study
from .localizability import Pmf, pmf_with_reuse
from .simulator import SimConfig, empirical_cdf, ks_distance, run_conditional_mc, run_network_mc

log = logging.getLogger("netcrlb")

EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_VALIDATION = 4


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    pass


# -- parameter handling -------------------------------------------------------

def _add_param_flags(p):
    g = p.add_argument_group("parameters (override --config / --preset)")
    g.add_argument("--config", type=Path, help="key = value parameter file")
    g.add_argument("--preset", choices=sorted(config.PRESETS))
    for key in config.NETWORK_KEYS + config.EXTRA_KEYS:
        g.add_argument(f"--{key}", dest=f"p_{key}", default=None, metavar="VALUE")
    for key in ("gamma_db", "beta_db"):
        g.add_argument(f"--{key}", dest=f"p_{key}", default=None, metavar="VALUE")


def resolve_params(args) -> dict:
    if args.config is not None:
        try:
            cfg = config.load(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        except config.ConfigParseError as exc:
            raise UsageError(str(exc)) from None
    elif args.preset is not None:
        cfg = dict(config.PRESETS[args.preset])
    else:
        cfg = config.default_config()
    for key in config.NETWORK_KEYS + config.EXTRA_KEYS + ("gamma_db", "beta_db"):
        val = getattr(args, f"p_{key}", None)
        if val is not None:
            try:
                k, v = config.normalize(key, val)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            cfg[k] = v
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise UsageError(f"missing parameter(s): {', '.join(missing)}")


def _network(cfg):
    try:
        return config.network_params(cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- output -------------------------------------------------------------------

def manifest_hash(command: str, params: dict) -> str:
    blob = json.dumps({"command": command, "params": params, "version": __version__},
                      sort_keys=True, default=float)
    return hashlib.sha256(blob.encode()).hexdigest()


def _emit(args, command, params, header, rows, extra_files=()):
    digest = manifest_hash(command, params)
    buf = io.StringIO()
    buf.write(f"# manifest_sha256={digest}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    out = getattr(args, "output", None)
    if out is None:
        sys.stdout.write(text)
        return digest
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    manifest = {
        "command": command,
        "params": params,
        "version": __version__,
        "sha256": digest,
        "created": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(out), *map(str, extra_files)],
    }
    Path(str(out) + ".manifest.txt").write_text(json.dumps(manifest, indent=2, sort_keys=True,
                                                            default=float) + "\n")
    return digest


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _report(msg):
    print(msg, file=sys.stderr)


# -- commands -----------------------------------------------------------------

def _grid(args, a, M):
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    if args.s_max is None:
        return default_s_grid(a, M, args.points)
    if args.s_max <= a:
        raise UsageError(f"--s-max must exceed the support edge {a:g}")
    return np.geomspace(a * (1.0 + 1e-6), args.s_max, args.points)


def cmd_cond_cdf(args):
    cfg = resolve_params(args)
    if args.L is None or args.L < 3:
        raise UsageError("--L must be an integer >= 3")
    _require(cfg, "sigma_r")
    p = CondCdfParams(args.L, cfg["sigma_r"])
    grid = _grid(args, p.a, cfg.get("M", 200.0))
    curve = tabulate_cdf(lambda s: cond_cdf_s(s, p), grid, support_low=p.a)
    header = ["s_meters", "cdf"]
    rows = list(zip(curve.values, curve.probs))
    params = {"L": args.L, "sigma_r": cfg["sigma_r"], "grid": grid.tolist()}
    if args.mc:
        est = run_conditional_mc(args.L, cfg["sigma_r"], args.mc, seed=args.seed)
        emp = empirical_cdf(est, grid)
        header.append("empirical")
        rows = [r + (e,) for r, e in zip(rows, emp.probs)]
        ks = ks_distance(est.sorted_samples, lambda s: cond_cdf_s(s, p))
        params.update(mc=args.mc, seed=args.seed)
        _report(f"sup-norm vs exact S (n={args.mc}, seed={args.seed}): {ks:.4f}")
        if est.n_singular:
            _report(f"singular draws: {est.n_singular}")
    _emit(args, "cond-cdf", params, header, rows)


def _pmf_rows(pmf: Pmf):
    rows = [(ell, p) for ell, p in enumerate(pmf.probs)]
    rows.append(("tail_mass", pmf.tail_mass))
    return rows


def cmd_pmf_l(args):
    cfg = resolve_params(args)
    net = _network(cfg)
    pmf = pmf_with_reuse(net, args.ell_max)
    params = {"network": cfg, "ell_max": args.ell_max}
    if args.validate:
        sim = SimConfig(net, cfg.get("sigma_r", 20.0), int(cfg.get("N", 10)), cfg.get("M", 200.0),
                        n_realizations=args.validate, rng_seed=args.seed)
        est = run_network_mc(sim)
        emp = np.zeros(pmf.ell_max + 1)
        k = min(emp.size, est.l_pmf.size)
        emp[:k] = est.l_pmf[:k]
        dev = float(np.max(np.abs(emp - pmf.probs)))
        params.update(validate=args.validate, seed=args.seed)
        _report(f"max per-entry deviation vs network MC (n={args.validate}): {dev:.4f}")
        _emit(args, "pmf-l", params, ["ell", "prob", "empirical"],
              [(e, p, q) for (e, p), q in zip(_pmf_rows(pmf), list(emp) + [est.l_pmf[k:].sum()])])
        if args.tolerance is not None and dev > args.tolerance:
            raise ValidationFailure(f"pmf deviation {dev:.4f} exceeds {args.tolerance}")
        return
    _emit(args, "pmf-l", params, ["ell", "prob"], _pmf_rows(pmf))


def _parse_stub_pmf(text):
    pairs = {}
    for item in text.split(","):
        ell, prob = item.split(":")
        pairs[int(ell)] = float(prob)
    probs = np.zeros(max(pairs) + 1)
    for ell, prob in pairs.items():
        probs[ell] = prob
    return Pmf(probs, 0.0)


def marginal_curve(cfg, pmf=None, points=2000, ell_max=35):
    _require(cfg, "sigma_r", "M", "N")
    net = _network(cfg)
    mp = MarginalParams(net, cfg["sigma_r"], cfg["M"], int(cfg["N"]))
    if pmf is None:
        pmf = pmf_with_reuse(net, ell_max)
    a = CondCdfParams(mp.N, mp.sigma_r).a
    grid = np.union1d(default_s_grid(a, mp.M, points), [mp.M])
    curve = tabulate_cdf(lambda s: marginal_cdf_s(s, mp, pmf), grid, support_low=a,
                         support_note=f"atom of mass {pmf.p_at_most(2):.6g} at M={mp.M:g}")
    return mp, pmf, curve


def _percentile(mp, pmf, prob):
    a = CondCdfParams(mp.N, mp.sigma_r).a
    return quantile(lambda s: marginal_cdf_s(s, mp, pmf), prob, a, 1e3 * max(mp.M, a), tol=1e-7)


def cmd_marginal(args):
    cfg = resolve_params(args)
    try:
        stub = _parse_stub_pmf(args.stub_pmf) if args.stub_pmf else None
    except ValueError as exc:
        raise UsageError(f"bad --stub-pmf: {exc}") from None
    mp, pmf, curve = marginal_curve(cfg, stub, args.points)
    params = {"network": cfg, "points": args.points, "stub_pmf": args.stub_pmf}
    header = ["s_meters", "cdf"]
    rows = list(zip(curve.values, curve.probs))
    _report(f"atom at M={mp.M:g}: P[L<=2] = {pmf.p_at_most(2):.6f}; "
            f"localizable fraction {pmf.localizable_fraction:.6f}")
    if args.validate:
        sim = SimConfig(mp.network, mp.sigma_r, mp.N, mp.M, n_realizations=args.validate,
                        rng_seed=args.seed)
        est = run_network_mc(sim)
        emp = empirical_cdf(est, curve.values)
        sup = float(np.max(np.abs(emp.probs - curve.probs)))
        header.append("empirical")
        rows = [r + (e,) for r, e in zip(rows, emp.probs)]
        params.update(validate=args.validate, seed=args.seed)
        _report(f"sup-norm vs network MC (n={args.validate}, seed={args.seed}): {sup:.4f}; "
                f"empirical P[L<=2] = {est.l_pmf[:3].sum():.6f}")
        _emit(args, "marginal", params, header, rows)
        if args.tolerance is not None and sup > args.tolerance:
            raise ValidationFailure(f"sup-norm {sup:.4f} exceeds {args.tolerance}")
        return
    _emit(args, "marginal", params, header, rows)


def _parse_values(text):
    vals = [v for v in (text or "").split(",") if v.strip()]
    if not vals:
        raise UsageError("--values must list at least one value")
    try:
        return [float(v) for v in vals]
    except ValueError:
        raise UsageError(f"bad --values {text!r}") from None


def cmd_sweep(args):
    base = resolve_params(args)
    values = _parse_values(args.values)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = []
    files = []
    for v in values:
        try:
            key, val = config.normalize(args.param, v)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        cfg = {**base, key: val}
        mp, pmf, curve = marginal_curve(cfg, points=args.points)
        row = [v, pmf.localizable_fraction, _percentile(mp, pmf, args.percentile / 100.0)]
        curve_rows = list(zip(curve.values, curve.probs))
        header = ["s_meters", "cdf"]
        if args.validate:
            est = run_network_mc(SimConfig(mp.network, mp.sigma_r, mp.N, mp.M,
                                           n_realizations=args.validate, rng_seed=args.seed))
            emp = empirical_cdf(est, curve.values)
            header.append("empirical")
            curve_rows = [r + (e,) for r, e in zip(curve_rows, emp.probs)]
            row += [1.0 - est.l_pmf[:3].sum(),
                    float(np.quantile(est.sorted_samples, args.percentile / 100.0, method="inverted_cdf")),
                    float(np.max(np.abs(emp.probs - curve.probs)))]
        path = outdir / f"marginal_{args.param}={v:g}.csv"
        files.append(path)
        sub = argparse.Namespace(output=path)
        _emit(sub, "sweep-curve", {"network": cfg, "validate": args.validate, "seed": args.seed},
              header, curve_rows)
        summary.append(row)
    header = ["value", "localizable_fraction", f"p{args.percentile:g}_meters"]
    if args.validate:
        header += ["empirical_localizable_fraction", f"empirical_p{args.percentile:g}_meters", "sup_norm"]
    args.output = outdir / "summary.csv"
    _emit(args, "sweep", {"base": base, "param": args.param, "values": values,
                          "validate": args.validate, "seed": args.seed}, header, summary, files)


def cmd_mi(args):
    try:
        Ls = sorted({int(v) for v in args.L.split(",") if v.strip()})
    except ValueError:
        raise UsageError(f"bad --L {args.L!r}") from None
    if not Ls or min(Ls) < 3:
        raise UsageError("--L values must be integers >= 3")
    if args.samples < MIN_SAMPLES:
        log.warning("--samples %d is below %d; estimates will be biased", args.samples, MIN_SAMPLES)
    rows = mi_study(Ls, args.samples, seed=args.seed, bin_width=args.bin_width)
    _emit(args, "mi", {"L": Ls, "samples": args.samples, "seed": args.seed,
                       "bin_width": args.bin_width},
          ["L", "i", "mi_bits", "n_samples", "bin_width"], rows)
    best = best_surrogate(rows)
    bad = [L for L, lab in best.items() if lab != "L-1"]
    for L in Ls:
        _report(f"L={L}: largest MI for W_({best[L]})")
    if bad and not args.no_assert:
        raise ValidationFailure(f"W_(L-1) is not the most informative surrogate for L in {bad}")


# -- parser -------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="netcrlb", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cond-cdf", help="CDF of S given L anchors")
    _add_param_flags(p)
    p.add_argument("--L", type=int)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--s-max", type=float)
    p.add_argument("--mc", type=int, default=0, help="Monte Carlo draws of the exact S")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_cond_cdf)

    p = sub.add_parser("pmf-l", help="distribution of the number of hearable anchors")
    _add_param_flags(p)
    p.add_argument("--ell-max", type=int, default=35)
    p.add_argument("--validate", type=int, default=0, help="network MC realizations")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_pmf_l)

    p = sub.add_parser("marginal", help="network-wide CDF of S")
    _add_param_flags(p)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--stub-pmf", help="replace the L distribution, e.g. '4:1' or '3:0.5,5:0.5'")
    p.add_argument("--validate", type=int, default=0, help="network MC realizations")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_marginal)

    p = sub.add_parser("sweep", help="marginal CDFs over one parameter")
    _add_param_flags(p)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma-separated list")
    p.add_argument("--outdir", required=True, type=Path)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--percentile", type=float, default=80.0)
    p.add_argument("--validate", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mi", help="mutual information between D and single-angle surrogates")
    p.add_argument("--L", default="4,5,6,7,8")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bin-width", type=float, default=0.01)
    p.add_argument("--no-assert", action="store_true")
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_mi)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        _report(f"netcrlb: error: {exc}")
        return EXIT_USAGE
    except (QuadratureError, SingularGeometry, FloatingPointError) as exc:
        _report(f"netcrlb: numerical failure: {exc}")
        return EXIT_NUMERIC
    except ConfigError as exc:
        _report(f"netcrlb: configuration error: {exc}")
        return EXIT_USAGE
    except ValidationFailure as exc:
        _report(f"netcrlb: validation failed: {exc}")
        return EXIT_VALIDATION
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        _report(f"netcrlb: error: {exc}")
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
