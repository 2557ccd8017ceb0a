"""Command-line front end.

Exit codes: 0 success or affirmed, 1 verification failed, 2 build or config
error, 3 inconclusive, 4 not found.  Output goes to ``--out``, else to
``$TREEGIBBS_OUT``, else to ``./treegibbs-out``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

from . import _backend
from .analysis import NO_PERIOD2, uniqueness_condition
from .errors import KernelBuildError, NonPositiveError
from .grid import DEFAULT_NODES, SCHEMES, build_rule
from .kernels import build_family, export_kernel, find_k0, kernel_from_xi, load_kernel, load_xi
from .kernels.base import _jsonable
from .operators import H_FORM, CyclePair, cycle_residual
from .solver import PREFERRED_SCHEME, SolverConfig, catalog_params, find_cycles, verify_catalog, write_plot_csv

OUT_ENV = "TREEGIBBS_OUT"
DEFAULT_OUT = "treegibbs-out"
DEFAULT_K_MAX = 1000

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3
EXIT_NOT_FOUND = 4

CATALOG = [
    {"family": "k2_family", "params": {"n": "integer >= 1; positivity scanned, default smallest positive n"},
     "k": 2, "result": "at least two periodic Gibbs measures on the tree of order 2"},
    {"family": "k3_family", "params": {}, "k": 3,
     "result": "at least two periodic Gibbs measures on the tree of order 3"},
    {"family": "k_ge4_family", "params": {"k": "integer >= 4"}, "k": "k",
     "result": "at least two periodic Gibbs measures for every k >= 4"},
    {"family": "four_cycle_family", "params": {"k": "integer >= k0 (see the k0 command)"}, "k": "k",
     "result": "at least four periodic Gibbs measures for k >= k0"},
    {"family": "generic_xi", "params": {"xi": "builtin name or CSV file", "J": "nonzero real", "beta": "> 0"},
     "k": "any", "result": "exp(J beta xi) kernels for the uniqueness check and the solver"},
]

KERNEL_KEYS = {"family", "n", "k", "nodes", "scheme", "xi", "xi_file", "J", "beta", "kernel_file"}
SOLVER_KEYS = {"seed", "starts", "tol", "max_iterations", "damping", "perturbation", "dedup_radius",
               "workers", "verify_tolerance"}
SCHEMA = {
    "catalog": {"out"},
    "verify": {"family", "n", "k", "nodes", "scheme", "out"},
    "solve": KERNEL_KEYS | SOLVER_KEYS | {"out"},
    "uniq": KERNEL_KEYS | {"out"},
    "k0": {"k_max", "out"},
    "export-kernel": KERNEL_KEYS | {"out"},
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config

def load_config(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return doc


def resolve(command: str, args: argparse.Namespace) -> dict:
    """Merge config file and flags (flags win) and validate against the command schema."""
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    if cfg.get("command", command) != command:
        raise ConfigError(f"config is for command {cfg['command']!r}, not {command!r}")
    cfg.pop("command", None)
    unknown = sorted(set(cfg) - SCHEMA[command])
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
    for key in SCHEMA[command]:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def out_dir(cfg: dict) -> Path:
    return Path(cfg.get("out") or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _dump(path: Path, doc) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path


def build_kernel(cfg: dict):
    """Kernel from a resolved config: catalog family, generic_xi or an exported file."""
    if cfg.get("kernel_file"):
        return load_kernel(cfg["kernel_file"])
    family = cfg.get("family")
    if family is None:
        raise ConfigError("--family is required")
    scheme = cfg.get("scheme") or PREFERRED_SCHEME.get(family, "gauss_legendre")
    rule = build_rule(int(cfg.get("nodes") or DEFAULT_NODES), scheme)
    if family == "generic_xi":
        xi = load_xi(cfg["xi_file"], rule) if cfg.get("xi_file") else cfg.get("xi", "zero")
        return kernel_from_xi(xi, float(cfg.get("J", 1.0)), float(cfg.get("beta", 1.0)), rule)
    params = catalog_params(family, {"n": cfg.get("n"), "k": cfg.get("k")}) \
        if family != "k3_family" else {}
    return build_family(family, rule, **params)


def _equation_k(cfg: dict, kernel) -> int:
    k = cfg.get("k") or kernel.order
    if k is None:
        raise ConfigError("--k is required for this kernel")
    return int(k)


# ---------------------------------------------------------------- commands

def cmd_catalog(cfg: dict) -> int:
    for entry in CATALOG:
        params = ", ".join(f"{k}: {v}" for k, v in entry["params"].items()) or "none"
        print(f"{entry['family']:18s} k={entry['k']!s:4s} params [{params}]  {entry['result']}")
    if cfg.get("out"):
        _dump(out_dir(cfg) / "catalog.json", CATALOG)
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    family = cfg.get("family")
    if family is None:
        raise ConfigError("--family is required")
    if family not in (e["family"] for e in CATALOG):
        raise ConfigError(f"unknown family {family!r}")
    params = {"n": cfg.get("n"), "k": cfg.get("k")} if family != "k3_family" else {}
    report = verify_catalog(family, params, int(cfg.get("nodes") or DEFAULT_NODES), cfg.get("scheme"))
    out = out_dir(cfg)
    stem = f"verify_{family}"
    _dump(out / f"{stem}.json", report.to_dict())
    if not report.positive:
        print(f"kernel {family} {report.params} is not positive: scan minimum {report.scan_min:.6g}",
              file=sys.stderr)
        return EXIT_CONFIG
    kernel = build_family(family, build_rule(report.nodes, report.scheme), **catalog_params(family, params))
    from .kernels import closed_form_pairs

    for cf in closed_form_pairs(kernel):
        pair = cycle_residual(kernel, CyclePair(kernel.rule.sample(cf.f, "f"), kernel.rule.sample(cf.g, "g"),
                                                cf.k, H_FORM))
        write_plot_csv(out / f"{stem}_{cf.name}.csv", pair, kernel)
    for c in report.checks:
        print(f"{c.name} N={c.nodes}: r1={c.residuals[0]:.3e} r2={c.residuals[1]:.3e}")
    print("PASS" if report.passed else "FAIL", f"(tolerance {report.tolerance:g})")
    return EXIT_OK if report.passed else EXIT_FAILED


def solver_config(cfg: dict, k: int) -> SolverConfig:
    names = {f.name for f in fields(SolverConfig)}
    kw = {key: cfg[key] for key in names & set(cfg) if key != "k"}
    if "starts" in cfg:
        kw["random_starts"] = int(cfg["starts"])
    if "tol" in cfg:
        kw["tolerance"] = float(cfg["tol"])
    return SolverConfig(k=k, **kw)


def cmd_solve(cfg: dict) -> int:
    kernel = build_kernel(cfg)
    k = _equation_k(cfg, kernel)
    config = solver_config(cfg, k)
    if k == 1:
        print("warning: k = 1 is the linear case; no solutions with f != g are expected", file=sys.stderr)
    if kernel.scan is not None and not kernel.scan.positive:
        print(f"kernel is not positive: scan minimum {kernel.scan.minimum:.6g}", file=sys.stderr)
        return EXIT_CONFIG
    result = find_cycles(kernel, config)
    path = result.write(out_dir(cfg), kernel)
    for i, c in enumerate(result.cycles):
        print(f"[{i}] {c.classification} gap={c.gap:.6g} residual={max(c.residuals):.3e} starts={len(c.starts)}")
    print(f"{len(result.cycles)} solutions, {len(result.failures)} failed starts -> {path}")
    return EXIT_OK


def cmd_uniq(cfg: dict) -> int:
    kernel = build_kernel(cfg)
    k = _equation_k(cfg, kernel)
    report = uniqueness_condition(kernel, k)
    _dump(out_dir(cfg) / f"uniq_{kernel.family}_k{k}.json", report.to_dict())
    print(f"M={report.M:.17g} m={report.m:.17g} lhs={report.uniqueness_lhs:.6g} "
          f"threshold={report.threshold:.6g} -> {report.verdict}")
    return EXIT_OK if report.verdict == NO_PERIOD2 else EXIT_INCONCLUSIVE


def cmd_k0(cfg: dict) -> int:
    k_max = int(cfg.get("k_max") or DEFAULT_K_MAX)
    res = find_k0(k_max)
    if cfg.get("out"):
        _dump(out_dir(cfg) / "k0.json", vars(res))
    if res.k0 is None:
        print(f"no k0 <= {k_max}; minimum at k_max = {res.previous_minimum:.6g}")
        return EXIT_NOT_FOUND
    print(f"k0={res.k0} min={res.minimum:.17g} previous_min={res.previous_minimum!r}")
    return EXIT_OK


def cmd_export_kernel(cfg: dict) -> int:
    kernel = build_kernel(cfg)
    out = out_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, side = export_kernel(kernel, out / f"kernel_{kernel.family}.csv")
    print(f"{csv_path}\n{side}")
    return EXIT_OK


COMMANDS = {
    "catalog": cmd_catalog,
    "verify": cmd_verify,
    "solve": cmd_solve,
    "uniq": cmd_uniq,
    "k0": cmd_k0,
    "export-kernel": cmd_export_kernel,
}


# ---------------------------------------------------------------- parser

def _add_kernel_flags(p: argparse.ArgumentParser, extra: bool = True):
    p.add_argument("--family", help="kernel family (see the catalog command)")
    p.add_argument("--n", type=int, help="root order of the k = 2 family")
    p.add_argument("--k", type=int, help="equation power k (also the family parameter where needed)")
    p.add_argument("--nodes", type=int, help=f"quadrature nodes (default {DEFAULT_NODES})")
    p.add_argument("--scheme", choices=SCHEMES, help="quadrature scheme")
    if extra:
        p.add_argument("--xi", help="builtin xi name for generic_xi")
        p.add_argument("--xi-file", dest="xi_file", help="xi values as CSV for generic_xi")
        p.add_argument("--J", type=float, help="coupling J for generic_xi")
        p.add_argument("--beta", type=float, help="inverse temperature for generic_xi")
        p.add_argument("--kernel-file", dest="kernel_file", help="exported kernel CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treegibbs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        p.add_argument("--config", help="JSON config; flags override its keys")
        if name in ("solve", "uniq", "export-kernel"):
            _add_kernel_flags(p)
        elif name == "verify":
            _add_kernel_flags(p, extra=False)
        if name == "solve":
            p.add_argument("--seed", type=int, help="random start seed")
            p.add_argument("--starts", type=int, help="number of random starts")
            p.add_argument("--tol", type=float, help="successive-iterate tolerance")
            p.add_argument("--workers", type=int, help="threads running starts")
        if name == "k0":
            p.add_argument("--k-max", "--k", dest="k_max", type=int, help=f"search bound (default {DEFAULT_K_MAX})")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    logging.getLogger(__name__).debug("backend: %s", _backend.NAME)
    try:
        cfg = resolve(args.command, args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, KernelBuildError, NonPositiveError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, ConfigError) or (isinstance(exc, ValueError) and "unknown" in str(exc)):
            parser.print_usage(sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
