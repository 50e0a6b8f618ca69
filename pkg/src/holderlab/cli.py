"""Command-line driver.

Every command reads an optional JSON config (``--config``) and flat flags, flags
winning. The validated config is echoed into each artifact, and artifacts are
named ``<out>/<command>-<sha256[:12]>.json|csv`` after the canonical config so
identical runs produce identical files.

Exit codes: 0 success, 2 config error, 3 numerical flag raised by a module.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import zlib
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import __version__
from ._accel import backend

COMMANDS = ("exponents", "build-domain", "norms", "cover", "count", "weyl-scan", "bracketing",
            "clr-check", "certify-example", "poincare-scan")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    command: Literal[COMMANDS]  # type: ignore[valid-type]
    domain: dict = Field(default_factory=lambda: {"flat": 1.0})
    potential: dict = Field(default_factory=lambda: {"kind": "zero"})
    d: int = 2
    gamma: Optional[float] = None
    c: float = 1.0
    p: float = 1.0
    beta: Optional[float] = None
    eta: Optional[list[float]] = None
    delta0: Optional[float] = None
    quad_res: int = 3
    probe_res: float = 2.0
    lam: float = Field(1.0, alias="lambda")
    sigma: float = 0.0
    mesh_h: float = 1.0 / 64
    bc: Literal["neumann", "dirichlet"] = "neumann"
    lambda_grid: list[float] = Field(default_factory=lambda: [250.0, 500.0, 1000.0, 2000.0])
    m_level: list[int] = Field(default_factory=lambda: [2, 3])
    m: int = 10
    n: int = 1
    epsilon: Optional[float] = None
    delta_grid: list[float] = Field(default_factory=lambda: [2.0**-k for k in range(2, 7)])
    h_per_delta: float = 1.0 / 32
    export_mesh: bool = False
    rng_seed: int = 0
    out: str = "holderlab-out"


class NumericalFlag(RuntimeError):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator per named stream, all derived from one seed."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode())])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def config_hash(cfg: RunConfig) -> str:
    canon = json.dumps(_jsonable(cfg.model_dump(by_alias=True, exclude={"out"})), sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


# --- commands --------------------------------------------------------------------

def _domain(cfg):
    from .domain import build_domain
    return build_domain(cfg.domain)


def _potential(cfg):
    from .potentials import build_potential
    return build_potential(cfg.potential)


def cmd_exponents(cfg):
    from .exponents import compute_exponents, verify_exponent_identities
    gamma = 0.75 if cfg.gamma is None else cfg.gamma
    es = compute_exponents(cfg.d, gamma, cfg.c)
    check = verify_exponent_identities(es)
    out = {"exponents": es.as_dict(), "identities": check}
    if check["max_residual"] > 1e-10:
        raise NumericalFlag("exponent identity residual above 1e-10", out)
    return out, None


def cmd_build_domain(cfg):
    from .domain import holder_check, spike_window_scan
    dom = _domain(cfg)
    seed = int(rng_stream(cfg.rng_seed, "domain").integers(2**31))
    out = {"domain": dom.describe(), "holder_ratio": holder_check(dom, 100_000, seed),
           "f_max": dom.f_max(), "shoelace_area": dom.shoelace_area()}
    if dom.fractal is not None:
        out["spike_windows"] = [spike_window_scan(dom.fractal, n) for n in range(dom.fractal.n_max + 1)]
    rows = [["x", "f"]] + [[repr(float(x)), repr(float(f))] for x, f in zip(dom.xs, dom.fs)]
    return out, rows


def cmd_norms(cfg):
    from .exponents import compute_exponents
    from .norms import combined_norm, divergence_slope, lp_norm, orlicz_norm, weighted_seminorm
    dom, V = _domain(cfg), _potential(cfg)
    es = compute_exponents(2, cfg.gamma if cfg.gamma is not None else dom.gamma, dom.c)
    beta = es.beta if cfg.beta is None else cfg.beta
    div = divergence_slope(V, dom, cfg.p, beta, cfg.eta, cfg.quad_res + 1)
    out = {"lp": lp_norm(V, dom, cfg.p, cfg.quad_res + 1),
           "seminorm": weighted_seminorm(V, dom, cfg.p, beta, 0.0, cfg.quad_res + 1),
           "orlicz": orlicz_norm(V, dom, resolution=cfg.quad_res + 1),
           "combined": combined_norm(V, dom, es, cfg.quad_res + 1),
           "p": cfg.p, "beta": beta, "divergence_flags": div.as_dict()}
    return out, None


def cmd_cover(cfg):
    from .covering import CoverConfig, domain_exponents, greedy_cover, verify_cover
    from .exponents import delta0
    from .norms import combined_norm
    dom, V = _domain(cfg), _potential(cfg)
    es = domain_exponents(dom)
    d0 = cfg.delta0
    if d0 is None:
        d0 = delta0(combined_norm(V, dom, es, cfg.quad_res + 1), dom.h_omega, 2)
        if d0 <= 0:
            raise ValueError("the combined norm of V diverges; pass --delta0 explicitly")
    cf = greedy_cover(dom, V, d0, es, CoverConfig(quad_res=cfg.quad_res, probe_factor=cfg.probe_res))
    rep = verify_cover(cf, dom)
    out = {"cover": cf.as_dict(), "report": rep.as_dict()}
    if not rep.pairwise_disjoint or rep.coverage_fraction < 1.0:
        raise NumericalFlag("cover is not disjoint per family or misses probe points", out)
    return out, None


def cmd_count(cfg):
    from .spectral import assemble, count_report, export_mesh_csv, triangulate
    from .weyl import semiclassical_count
    dom, V = _domain(cfg), _potential(cfg)
    mesh = triangulate(dom, cfg.mesh_h)
    rep = count_report(assemble(mesh, dom, V, cfg.lam, cfg.bc), cfg.sigma)
    out = rep.as_dict()
    out["mesh"].update(mesh.stats())
    if cfg.sigma == 0 and not V.is_zero:
        out["semiclassical"] = semiclassical_count(V, dom, cfg.lam)
    if cfg.export_mesh:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        paths = export_mesh_csv(mesh, Path(cfg.out) / f"count-{config_hash(cfg)}-mesh")
        out["mesh_files"] = [p.name for p in paths]
    return out, None


def cmd_weyl_scan(cfg):
    from .weyl import weyl_scan
    dom, V = _domain(cfg), _potential(cfg)
    rows = weyl_scan(dom, V, cfg.lambda_grid, cfg.mesh_h, cfg.bc, cfg.quad_res + 1)
    table = [["lambda", "fem_count", "semiclassical", "ratio", "clr_bound", "mesh_h"]]
    table += [[r.lam, r.fem_count, r.semiclassical, r.ratio, r.clr_bound, r.mesh_h] for r in rows]
    return {"rows": [r.as_dict() for r in rows], "area": dom.area()}, table


def cmd_bracketing(cfg):
    from .weyl import bracketing_check
    dom, W = _domain(cfg), _potential(cfg)
    results = [bracketing_check(dom, W, m, lam, cfg.mesh_h) for lam in cfg.lambda_grid for m in cfg.m_level]
    table = [["lambda", "m_level", "sum_dirichlet", "global", "sum_neumann"]]
    table += [[r.lam, r.m_level, r.sum_dirichlet, r.global_count, r.sum_neumann] for r in results]
    out = {"results": [r.as_dict() for r in results]}
    if not all(r.sandwich for r in results):
        raise NumericalFlag("bracketing sandwich violated", out)
    return out, table


def cmd_clr_check(cfg):
    from .weyl import clr_bound_check
    dom, V = _domain(cfg), _potential(cfg)
    tab = clr_bound_check(dom, V, None, cfg.lambda_grid, cfg.mesh_h, cfg.quad_res + 1)
    return tab.as_dict(), None


def cmd_certify_example(cfg):
    from .counterexample import ExampleConfig, certify, lambda_schedule, ratio_log2
    gamma = 0.6 if cfg.gamma is None else cfg.gamma
    ex = ExampleConfig(gamma=gamma, m=cfg.m, n_max=cfg.n, epsilon=cfg.epsilon)
    rep = certify(ex, cfg.n, rng=rng_stream(cfg.rng_seed, "counterexample"))
    table = [["n", "lambda", "ratio"]]
    table += [[k, lambda_schedule(ex, k), 2.0 ** ratio_log2(ex, k)] for k in range(cfg.n + 1)]
    out = {"config": {"gamma": ex.gamma, "m": ex.m, "epsilon": ex.epsilon, "n": cfg.n},
           "report": rep.as_dict()}
    if not rep.all_negative:
        raise NumericalFlag("a quadratic form is nonnegative; certificate void", out)
    return out, table


def cmd_poincare_scan(cfg):
    from .spectral import estimate_poincare_constant, hat_domain
    fit = estimate_poincare_constant(hat_domain, cfg.delta_grid, cfg.h_per_delta)
    table = [["delta", "mu2"]] + [[d, m] for d, m in zip(fit.deltas, fit.mu2)]
    return fit.as_dict(), table


HANDLERS = {
    "exponents": cmd_exponents, "build-domain": cmd_build_domain, "norms": cmd_norms,
    "cover": cmd_cover, "count": cmd_count, "weyl-scan": cmd_weyl_scan, "bracketing": cmd_bracketing,
    "clr-check": cmd_clr_check, "certify-example": cmd_certify_example, "poincare-scan": cmd_poincare_scan,
}


# --- driver ----------------------------------------------------------------------

def _write(cfg: RunConfig, payload: dict, table) -> list[Path]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{cfg.command}-{config_hash(cfg)}"
    jpath = out / f"{stem}.json"
    jpath.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    paths = [jpath]
    if table is not None:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(
            [[repr(v) if isinstance(v, float) else v for v in row] for row in table])
        cpath = out / f"{stem}.csv"
        cpath.write_text(buf.getvalue())
        paths.append(cpath)
    return paths


def run(config: dict) -> tuple[int, dict]:
    """Validate, dispatch and write artifacts; returns (exit status, payload)."""
    try:
        cfg = RunConfig.model_validate(config)
    except ValidationError as exc:
        errs = [{"field": ".".join(str(p) for p in e["loc"]) or "<root>", "message": e["msg"]}
                for e in exc.errors()]
        return EXIT_CONFIG, {"error": "config", "details": errs}
    echo = cfg.model_dump(by_alias=True, exclude={"out"})
    base = {"command": cfg.command, "config": echo, "seed": cfg.rng_seed, "version": __version__,
            "backend": backend()}
    try:
        result, table = HANDLERS[cfg.command](cfg)
        status = EXIT_OK
    except NumericalFlag as exc:
        result, table, status = {"flag": str(exc), "report": exc.report}, None, EXIT_NUMERIC
    except (ValueError, KeyError, TypeError) as exc:
        return EXIT_CONFIG, {**base, "error": "config", "details": [{"field": "<value>", "message": str(exc)}]}
    except (RuntimeError, ArithmeticError, MemoryError) as exc:
        result, table, status = {"flag": f"{type(exc).__name__}: {exc}"}, None, EXIT_NUMERIC
    payload = {**base, "result": result}
    payload["artifacts"] = [p.name for p in _write(cfg, payload, table)]
    return status, payload


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="holderlab", description=__doc__.splitlines()[0])
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--config", help="JSON config file; flags override its entries")
    flags = [
        ("--domain", "domain spec (JSON)"), ("--potential", "potential spec (JSON)"),
        ("--d", None), ("--gamma", None), ("--c", None), ("--p", None), ("--beta", None),
        ("--eta", "JSON list"), ("--delta0", None), ("--quad-res", None), ("--probe-res", None),
        ("--lambda", None), ("--sigma", None), ("--mesh-h", None), ("--bc", None),
        ("--lambda-grid", "JSON list"), ("--m-level", "int or JSON list"), ("--m", None), ("--n", None),
        ("--epsilon", None), ("--delta-grid", "JSON list"), ("--h-per-delta", None),
        ("--rng-seed", None), ("--out", "artifact directory"),
    ]
    for flag, help_text in flags:
        ap.add_argument(flag, dest=flag[2:].replace("-", "_"), help=help_text)
    ap.add_argument("--export-mesh", action="store_true", default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config: dict = {}
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(json.dumps({"error": "config", "details": [{"field": "--config", "message": str(exc)}]}))
            return EXIT_CONFIG
        if not isinstance(config, dict):
            print(json.dumps({"error": "config", "details": [{"field": "<root>", "message": "not an object"}]}))
            return EXIT_CONFIG
    for key, val in vars(args).items():
        if key == "config" or val is None:
            continue
        if key == "command":
            config["command"] = val
        elif key == "lambda":
            config["lambda"] = _parse_value(val)
        elif key == "export_mesh":
            config[key] = bool(val)
        elif key == "m_level":
            v = _parse_value(val)
            config[key] = v if isinstance(v, list) else [v]
        elif key == "out":
            config[key] = val
        else:
            config[key] = _parse_value(val)
    status, payload = run(config)
    summary = {k: payload[k] for k in ("command", "artifacts", "error", "details") if k in payload}
    if "result" in payload and isinstance(payload["result"], dict) and "flag" in payload["result"]:
        summary["flag"] = payload["result"]["flag"]
    print(json.dumps(_jsonable(summary), sort_keys=True))
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
