"""Configuration, seeded experiment runs, canonical reports and sweeps.

A config is strict JSON::

    {
      "version": 1,
      "group":   {"family": "heisenberg", "n": 1},
      "kernel":  {"expr": "1", "support": [[1, 2]], "resolution": 16, "rule": "gauss", "id": "box"},
      "family":  {"kind": "dilation", "lambda": "u", "id": "dil"},
      "function": {"expr": "(1 - x1^2)^2", "support": [[-1, 1]], "l1": null},
      "suite": "all",
      "seed": 0,
      "samples": 100000,
      "grid_resolution": 48,
      "atoms": 5,
      "kappa_rho": null,
      "tolerances": {"lemma1": 0.01}
    }

``support`` may be the string ``"group"`` on tori and SU(2), in which case Ω is
the group with normalised Haar measure and the kernel variables are the group
coordinates.  Unknown keys anywhere are rejected.  Each suite draws from its
own stream ``SeedSequence([seed, crc32(suite name)])``, so adding a suite does
not change the numbers of the others.
"""
import csv
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import _kernels
from . import homspace as hs
from .automorphisms import (AutomorphismFamily, AutomorphismSpec, estimate_kappa, estimate_lipschitz,
                            estimate_modulus, struble_scaling_ratio, verify_star_condition)
from .errors import ConfigError, InvalidInputError
from .expr import coordinate_function
from .hardy import HomogeneityConstants, make_random_atom
from .hausdorff import (Kernel, addendum_bound, atomic_image_decomposition, check_lemma1,
                        covering_box, evaluate_operator, special_form_torus, theorem1_bound)

SUITES = ("doubling", "star", "lemma1", "lemma4", "theorem1", "torus_structure",
          "su2_isometry", "modulus", "struble")

TOLERANCES = {
    "exact": 1e-12,
    "atom": 1e-6,
    "lemma1": 1e-2,
    "theorem1": 1e-2,
    "modulus_z": 3.0,
    "lipschitz": 1e-6,
    "torus_structure": 1e-6,
    "struble": 1e-9,
}

DEFAULTS = {
    "version": 1,
    "function": None,
    "suite": "all",
    "seed": 0,
    "samples": 100_000,
    "grid_resolution": 48,
    "atoms": 5,
    "kappa_rho": None,
    "tolerances": {},
}

_TOP_KEYS = {"version", "group", "kernel", "family"} | set(DEFAULTS)
_KERNEL_KEYS = {"expr", "support", "resolution", "rule", "id"}
_FUNCTION_KEYS = {"expr", "support", "l1"}


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object, got {type(d).__name__}")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def _int(value, name, lo=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"{name} must be >= {lo}, got {value}")
    return value


def _box(support, dim, where):
    if not isinstance(support, list) or len(support) != dim:
        raise ConfigError(f"{where} must list {dim} [lo, hi] pairs")
    out = []
    for pair in support:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(f"{where}: bad interval {pair!r}")
        lo, hi = (float(v) for v in pair)
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ConfigError(f"{where}: empty or infinite interval {pair!r}")
        out.append((lo, hi))
    return out


def default_function(spec):
    d = spec.coord_dim
    if spec.family == "torus":
        return {"expr": "1 + 0.5*cos(2*pi*x1)", "support": None, "l1": 1.0}
    if spec.family == "su2":
        return {"expr": "1 + 0.5*x2", "support": None, "l1": 1.0}
    expr = "*".join(f"(1 - x{i + 1}^2)^2" for i in range(d))
    return {"expr": expr, "support": [[-1.0, 1.0]] * d, "l1": (16.0 / 15.0) ** d}


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    group: hs.GroupSpec
    kernel: dict
    family: dict
    function: dict
    suite: tuple
    seed: int
    samples: int
    grid_resolution: int
    atoms: int
    kappa_rho: object
    tolerances: dict
    version: int = 1

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, _TOP_KEYS, "config")
        for key in ("group", "kernel", "family"):
            if key not in d:
                raise ConfigError(f"config is missing {key!r}")
        d = {**DEFAULTS, **d}
        if d["version"] != 1:
            raise ConfigError(f"unsupported config version {d['version']!r}")
        try:
            group = hs.GroupSpec.from_dict(d["group"])
        except InvalidInputError as e:
            raise ConfigError(str(e)) from e
        _check_keys(d["kernel"], _KERNEL_KEYS, "kernel")
        kernel = {"support": [[1.0, 2.0]], "resolution": 16, "rule": "gauss", **d["kernel"]}
        if "expr" not in kernel:
            raise ConfigError("kernel needs an 'expr'")
        if kernel["support"] == "group" and not group.is_compact:
            raise ConfigError(f"support 'group' needs a compact group, not {group.label}")
        _int(kernel["resolution"], "kernel.resolution", 1)
        if kernel["rule"] not in ("gauss", "midpoint"):
            raise ConfigError(f"kernel.rule must be 'gauss' or 'midpoint', got {kernel['rule']!r}")
        if not isinstance(d["family"], dict):
            raise ConfigError("family must be an object")
        function = d["function"]
        if function is None:
            function = default_function(group)
        else:
            _check_keys(function, _FUNCTION_KEYS, "function")
            function = {"support": None, "l1": None, **function}
            if "expr" not in function:
                raise ConfigError("function needs an 'expr'")
            if function["support"] is None and not group.is_compact:
                raise ConfigError(f"function on {group.label} needs a compact 'support' box")
            if function["l1"] is not None and not float(function["l1"]) >= 0:
                raise ConfigError("function.l1 must be nonnegative")
        suite = d["suite"]
        if isinstance(suite, str):
            suite = list(SUITES) if suite == "all" else [suite]
        if not isinstance(suite, list) or any(s not in SUITES + ("all",) for s in suite):
            raise ConfigError(f"suite must be 'all' or a list drawn from {SUITES}, got {suite!r}")
        if "all" in suite:
            suite = list(SUITES)
        seed = _int(d["seed"], "seed", 0)
        if seed >= 2 ** 64:
            raise ConfigError("seed must fit in 64 bits")
        tol = d["tolerances"]
        _check_keys(tol, TOLERANCES, "tolerances")
        tol = {**TOLERANCES, **{k: float(v) for k, v in tol.items()}}
        kappa = d["kappa_rho"]
        if kappa is not None and not (isinstance(kappa, (int, float)) and kappa > 0):
            raise ConfigError("kappa_rho must be a positive number or null")
        cfg = cls(group, kernel, dict(d["family"]), function, tuple(suite), seed,
                  _int(d["samples"], "samples", 10_000), _int(d["grid_resolution"], "grid_resolution", 2),
                  _int(d["atoms"], "atoms", 0), kappa, tol, 1)
        cfg.build()  # surface expression and family errors now
        return cfg

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from e
        except OSError as e:
            raise ConfigError(f"{path}: {e.strerror}") from e
        try:
            return cls.from_dict(data)
        except ConfigError as e:
            raise ConfigError(f"{path}: {e}") from e

    def to_dict(self):
        return {
            "version": self.version,
            "group": self.group.to_dict(),
            "kernel": dict(self.kernel),
            "family": dict(self.family),
            "function": dict(self.function),
            "suite": list(self.suite),
            "seed": self.seed,
            "samples": self.samples,
            "grid_resolution": self.grid_resolution,
            "atoms": self.atoms,
            "kappa_rho": self.kappa_rho,
            "tolerances": dict(self.tolerances),
        }

    def build(self):
        """Instantiate (kernel, family, f, f_support); errors become ConfigError."""
        cached = self.__dict__.get("_built")
        if cached is not None:
            return cached
        spec, k = self.group, self.kernel
        try:
            if k["support"] == "group":
                kernel = Kernel.on_group(k["expr"], spec, k["resolution"])
            else:
                if not isinstance(k["support"], list) or not k["support"]:
                    raise ConfigError("kernel.support must be 'group' or a list of [lo, hi]")
                box = _box(k["support"], len(k["support"]), "kernel.support")
                kernel = Kernel.from_expression(k["expr"], box, k["resolution"], k["rule"])
            fam_desc = {key: v for key, v in self.family.items()}
            family = AutomorphismFamily.from_descriptor(spec, fam_desc, kernel.param_dim)
            family.at(kernel.grid.points)
            kernel.values()
            fn = self.function
            expr = coordinate_function(fn["expr"], spec.coord_dim, "x")
            box = None if fn["support"] is None else _box(fn["support"], spec.coord_dim, "function.support")
        except InvalidInputError as e:
            raise ConfigError(str(e)) from e
        except (TypeError, ValueError, ZeroDivisionError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"cannot build experiment: {e}") from e

        if box is None:
            f = expr
        else:
            lo = np.array([b[0] for b in box])
            hi = np.array([b[1] for b in box])

            def f(x, expr=expr, lo=lo, hi=hi):
                x = np.atleast_2d(x)
                inside = np.all((x >= lo) & (x <= hi), axis=1)
                return np.where(inside, expr(x), 0.0)
        built = (kernel, family, f, box)
        self.__dict__["_built"] = built
        return built


# ----------------------------------------------------------------------------
# records and reports
# ----------------------------------------------------------------------------


def judge(lhs, rhs, relation, tolerance, stderr=None):
    """Verdict of one record from its stored fields."""
    if relation == "n/a":
        return "skip"
    if lhs is None or rhs is None or not (math.isfinite(lhs) and math.isfinite(rhs)):
        return "fail"
    if relation == "le":
        ok = lhs <= rhs + tolerance * abs(rhs)
    elif relation == "ge":
        ok = lhs >= rhs
    elif relation == "eq_rel":
        ok = abs(lhs - rhs) <= tolerance * abs(rhs)
    elif relation == "eq_abs":
        ok = abs(lhs - rhs) <= tolerance
    elif relation == "z":
        ok = stderr is not None and abs(lhs - rhs) <= tolerance * stderr
    else:
        raise ValueError(f"unknown relation {relation!r}")
    return "pass" if ok else "fail"


@dataclass
class Record:
    name: str
    lhs: float
    rhs: float
    relation: str
    tolerance: float
    provenance: str
    stderr: float = None
    detail: dict = field(default_factory=dict)
    runtime_ms: float = 0.0
    verdict: str = ""

    def __post_init__(self):
        self.lhs = None if self.lhs is None else float(self.lhs)
        self.rhs = None if self.rhs is None else float(self.rhs)
        self.stderr = None if self.stderr is None else float(self.stderr)
        if not self.verdict:
            self.verdict = judge(self.lhs, self.rhs, self.relation, self.tolerance, self.stderr)

    def to_dict(self, include_timing=False):
        d = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "tolerance": self.tolerance,
            "stderr": self.stderr,
            "provenance": self.provenance,
            "verdict": self.verdict,
            "detail": _plain(self.detail),
        }
        if include_timing:
            d["runtime_ms"] = self.runtime_ms
        return d


def skip(name, reason):
    return Record(name, None, None, "n/a", 0.0, "not-applicable", detail={"reason": reason})


@dataclass
class ExperimentReport:
    config: dict
    records: list = field(default_factory=list)
    bounds: dict = None
    environment: dict = field(default_factory=dict)

    @property
    def failed(self):
        return [r for r in self.records if r.verdict == "fail"]

    @property
    def ok(self):
        return not self.failed

    def summary(self):
        out = {"pass": 0, "fail": 0, "skip": 0}
        for r in self.records:
            out[r.verdict] += 1
        return out

    def to_dict(self, include_timing=False):
        return {
            "config": self.config,
            "environment": self.environment,
            "bounds": self.bounds,
            "records": [r.to_dict(include_timing) for r in self.records],
            "summary": self.summary(),
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def canonical_json(obj):
    """Sorted keys, floats as '%.12e'; non-finite floats become strings."""
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{canonical_json(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return "%.12e" % x if math.isfinite(x) else json.dumps(str(x))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    return canonical_json(_plain(obj))


def rounded(obj):
    """The value a canonical JSON round trip produces."""
    return json.loads(canonical_json(_plain(obj)))


CSV_REPORT_COLUMNS = ("name", "verdict", "lhs", "rhs", "relation", "tolerance", "stderr", "provenance")

SWEEP_COLUMNS = ("group", "kernel_id", "family_id", "norm_L_A", "norm_L1_ks", "theorem1_bound",
                 "lemma1_lhs", "lemma1_rhs", "verdict")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "%.12e" % float(v)
    return str(v)


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _write(path, text):
    if path is None:
        return text
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e
    return text


def emit(report, fmt="json", path=None, include_timing=False):
    """Serialise a report; returns the text and writes it when ``path`` is given."""
    if fmt == "json":
        text = canonical_json(report.to_dict(include_timing)) + "\n"
    elif fmt == "csv":
        cols = CSV_REPORT_COLUMNS + (("runtime_ms",) if include_timing else ())
        text = _csv_text(cols, [r.to_dict(include_timing) for r in report.records])
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return _write(path, text)


def load_report(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ----------------------------------------------------------------------------
# suites
# ----------------------------------------------------------------------------


def suite_seed(seed, name):
    """Independent 63-bit seed for a named substream."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(name.encode())])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass
class _Context:
    cfg: ExperimentConfig
    kernel: Kernel
    family: AutomorphismFamily
    f: object
    f_box: list
    consts: HomogeneityConstants

    @property
    def spec(self):
        return self.cfg.group

    def nodes(self, limit):
        """Up to ``limit`` kernel nodes with Φ != 0, evenly spread."""
        phi = self.kernel.values()
        idx = np.nonzero(phi != 0.0)[0]
        if idx.size > limit:
            idx = idx[np.linspace(0, idx.size - 1, limit).round().astype(int)]
        U = self.kernel.grid.points[idx]
        return U, self.family.at(U)


def _ball_radius(spec):
    return {"torus": 0.2, "su2": 0.6}.get(spec.family, 0.5)


def _fmt_u(u):
    return ",".join("%.6g" % v for v in np.ravel(u))


def _doubling(ctx, seed):
    spec = ctx.spec
    rng = np.random.default_rng(seed)
    C = ctx.consts.c_mu
    centers = hs.sample_region(spec, 3, rng, extent=1.0)
    radii = {"torus": [0.01, 0.05, 0.1, 0.2], "su2": [0.05, 0.2, 0.5, 1.0, 1.5]}.get(
        spec.family, [0.25, 0.5, 1.0, 2.0, 4.0])
    rep = hs.doubling_profile(spec, centers, radii)
    tol = ctx.cfg.tolerances["exact"]
    out = [
        Record("doubling.max_ratio", rep.max_ratio, C, "le", tol, "closed-form",
               detail={"radii": radii, "ratios": rep.ratios}),
        Record("doubling.D_violations", rep.d_violations, 0, "eq_abs", 0.0, "closed-form",
               detail={"checks": rep.d_checks}),
    ]
    sf = hs.snowflake_doubling(spec, radii, 0.5)
    out.append(Record("doubling.snowflake_theta_0.5", sf["max_ratio"], sf["bound"], "le", tol,
                      "closed-form", detail={"power_law": sf["power_law"]}))
    r0 = radii[1]
    for i, x in enumerate(centers):
        ball = hs.Ball(x, r0)
        est, se = hs.estimate_ball_measure(spec, ball, ctx.cfg.samples, int(rng.integers(2 ** 62)))
        out.append(Record(f"doubling.ball_measure[{i}]", est, hs.ball_measure(ball, spec), "z",
                          ctx.cfg.tolerances["modulus_z"], "monte-carlo", stderr=se,
                          detail={"center": x, "radius": r0}))
    return out


def _star(ctx, seed):
    spec = ctx.spec
    rng = np.random.default_rng(seed)
    out = []
    U, autos = ctx.nodes(4)
    for u, A in zip(U, autos):
        center = hs.sample_region(spec, 1, rng, extent=1.0)[0]
        ball = hs.Ball(center, _ball_radius(spec))
        k = A.k_constant()
        cert = verify_star_condition(A, ball, k, int(rng.integers(2 ** 62)), ctx.cfg.samples)
        out.append(Record(f"star.violations[u={_fmt_u(u)}]", cert.violations, 0, "eq_abs", 0.0,
                          "monte-carlo", detail={"k": k, "max_ratio": cert.max_ratio,
                                                 "samples": cert.samples_checked}))
    return out


def _x_grid(ctx, seed):
    spec = ctx.spec
    res = ctx.cfg.grid_resolution
    if spec.is_compact:
        return hs.group_grid(spec, res)
    bounds = covering_box(ctx.kernel, ctx.family, ctx.f_box, pad=0.02)
    if spec.coord_dim <= 3:
        return hs.box_grid(bounds, res)
    pts, w = hs._jittered_box(bounds, res ** 3, np.random.default_rng(seed))
    return hs.QuadratureGrid(pts, w, {"kind": "box", "bounds": bounds, "rule": "jittered"})


def _f_l1(ctx, seed):
    given = ctx.cfg.function.get("l1")
    if given is not None:
        return float(given), "closed-form"
    spec = ctx.spec
    res = 2 * ctx.cfg.grid_resolution
    if spec.is_compact:
        grid = hs.group_grid(spec, res if spec.family == "torus" else ctx.cfg.grid_resolution)
    elif spec.coord_dim <= 3:
        grid = hs.box_grid(ctx.f_box, res)
    else:
        pts, w = hs._jittered_box(ctx.f_box, res ** 3, np.random.default_rng(seed))
        grid = hs.QuadratureGrid(pts, w)
    return float(np.dot(np.abs(ctx.f(grid.points)), grid.weights)), "quadrature"


def _lemma1(ctx, seed):
    tol = ctx.cfg.tolerances["lemma1"]
    l1, prov = _f_l1(ctx, seed)
    grid = _x_grid(ctx, seed)
    rep = check_lemma1(ctx.kernel, ctx.family, ctx.f, grid, l1, tol)
    detail = {"f_l1": l1, "f_l1_provenance": prov, "norm_L_A": rep.norm_L_A,
              "captured": rep.captured, "truncation": rep.truncation, "x_cells": grid.size}
    out = [Record("lemma1.bound", rep.lhs, rep.rhs, "le", tol, "quadrature", detail=detail)]
    if rep.nonnegative:
        out.append(Record("lemma1.equality", rep.lhs, rep.rhs, "eq_rel", tol, "quadrature"))
    return out


def _lemma4(ctx, seed):
    tol = ctx.cfg.tolerances["exact"]
    c = ctx.consts
    b = theorem1_bound(ctx.kernel, ctx.family, c)
    autos = ctx.family.at(ctx.kernel.grid.points)
    worst = max((1.0 / A.modulus()) / (c.c_mu * A.k_constant() ** c.s) for A in autos)
    return [
        Record("lemma4.norms", b.norm_L_A, c.c_mu * b.norm_L1_ks, "le", tol, "quadrature"),
        Record("lemma4.pointwise_ratio", worst, 1.0, "le", tol, "closed-form",
               detail={"meaning": "max over nodes of mod(A^-1) / (C_mu k^s)"}),
    ]


def _theorem1(ctx, seed):
    spec = ctx.spec
    rng = np.random.default_rng(seed)
    tol = ctx.cfg.tolerances["theorem1"]
    out = []
    for i in range(ctx.cfg.atoms):
        center = hs.sample_region(spec, 1, rng, extent=0.5)[0]
        ball = hs.Ball(center, _ball_radius(spec))
        a0 = make_random_atom(spec, ball, int(rng.integers(2 ** 62)), resolution=10)
        _, chk = atomic_image_decomposition(ctx.kernel, ctx.family, a0, ctx.consts, tol,
                                            ctx.cfg.tolerances["atom"])
        detail = {"n_terms": chk.n_terms, "all_valid": chk.all_valid,
                  "reconstruction_error": chk.reconstruction_error}
        out.append(Record(f"theorem1.atom[{i}].lambda_sum", chk.lambda_sum, chk.bound, "le", tol,
                          "quadrature", detail=detail))
        out.append(Record(f"theorem1.atom[{i}].invalid_atoms", 0 if chk.all_valid else 1, 0,
                          "eq_abs", 0.0, "closed-form"))
    return out


def _torus_structure(ctx, seed):
    spec = ctx.spec
    if spec.family != "torus" or spec.n != 1:
        return [skip("torus_structure", "defined on T^1 only")]
    tol = ctx.cfg.tolerances["torus_structure"]
    x = hs.group_grid(spec, 64).points
    form = special_form_torus(ctx.kernel, ctx.family, ctx.f, x)
    a, b = form.ab
    total = ctx.kernel.integral()
    out = [
        Record("torus_structure.aI_plus_bJ", form.cross_check, 0.0, "eq_abs", tol, "quadrature",
               detail={"a": a, "b": b}),
        Record("torus_structure.a_plus_b", a + b, total, "eq_abs", ctx.cfg.tolerances["exact"],
               "arithmetic"),
    ]
    if abs(a - b) <= ctx.cfg.tolerances["exact"] * max(1.0, abs(total)):
        odd = special_form_torus(ctx.kernel, ctx.family, lambda p: np.sin(2 * np.pi * p[:, 0]), x)
        out.append(Record("torus_structure.odd_annihilated", float(np.max(np.abs(odd.values))), 0.0,
                          "eq_abs", 1e-8, "quadrature"))
    return out


def _su2_isometry(ctx, seed):
    spec = ctx.spec
    if spec.family != "su2":
        return [skip("su2_isometry", "defined on SU(2) only")]
    rng = np.random.default_rng(seed)
    tol = ctx.cfg.tolerances["lipschitz"]
    hi, lo = -math.inf, math.inf
    pairs = max(10_000, ctx.cfg.samples // 10)
    for _ in range(20):
        A = AutomorphismSpec.inner(rng.normal(size=4))
        est = estimate_lipschitz(A, int(rng.integers(2 ** 62)), pairs)
        hi, lo = max(hi, est.max_ratio), min(lo, est.min_ratio)
    out = [
        Record("su2_isometry.lipschitz_max", hi, 1.0, "eq_abs", tol, "monte-carlo"),
        Record("su2_isometry.lipschitz_min", lo, 1.0, "eq_abs", tol, "monte-carlo"),
        Record("su2_isometry.norm_L_A_equals_L1", theorem1_bound(ctx.kernel, ctx.family, ctx.consts).norm_L_A,
               ctx.kernel.l1_norm(), "eq_rel", ctx.cfg.tolerances["exact"], "arithmetic"),
    ]
    return out


def _modulus(ctx, seed):
    rng = np.random.default_rng(seed)
    out = []
    U, autos = ctx.nodes(3)
    for u, A in zip(U, autos):
        est = estimate_modulus(A, int(rng.integers(2 ** 62)), ctx.cfg.samples)
        out.append(Record(f"modulus[u={_fmt_u(u)}]", est.value, est.exact, "z",
                          ctx.cfg.tolerances["modulus_z"], "monte-carlo", stderr=est.stderr))
    return out


def _struble(ctx, seed):
    spec = ctx.spec
    if spec.family != "torus":
        return [skip("struble", "Struble metric is built on tori")]
    rng = np.random.default_rng(seed)
    fam = hs.StrubleFamily(spec)
    pairs = min(ctx.cfg.samples, 20_000)
    kappa = ctx.cfg.kappa_rho
    prov = "config"
    if kappa is None:
        kappa = estimate_kappa(spec, fam, int(rng.integers(2 ** 62)), pairs)
        prov = "monte-carlo"
    out = []
    U, autos = ctx.nodes(4)
    tol = ctx.cfg.tolerances["struble"]
    for u, A in zip(U, autos):
        sr = struble_scaling_ratio(A, fam, int(rng.integers(2 ** 62)), pairs)
        name = f"struble.ratio[u={_fmt_u(u)}]"
        if spec.n == 1:
            out.append(Record(name + ".min", sr.min_ratio, sr.predicted, "eq_abs", tol, "closed-form"))
            out.append(Record(name + ".max", sr.max_ratio, sr.predicted, "eq_abs", tol, "closed-form"))
        else:
            rec = skip(name, "observed only: A(V_k) need not be a box for n > 1")
            rec.detail.update(min=sr.min_ratio, max=sr.max_ratio, predicted=sr.predicted)
            out.append(rec)
    c = ctx.consts
    ident = addendum_bound(ctx.kernel, ctx.family, 1.0, c)
    out.append(Record("struble.addendum_identity", ident, c.c_mu * ctx.kernel.l1_norm(), "eq_rel",
                      ctx.cfg.tolerances["exact"], "arithmetic"))
    out.append(Record("struble.addendum_bound", addendum_bound(ctx.kernel, ctx.family, kappa, c),
                      c.c_mu * kappa ** c.s * ctx.kernel.l1_norm(), "eq_rel", ctx.cfg.tolerances["exact"],
                      "arithmetic", detail={"kappa_rho": kappa, "kappa_provenance": prov}))
    return out


_SUITE_FUNCS = {
    "doubling": _doubling,
    "star": _star,
    "lemma1": _lemma1,
    "lemma4": _lemma4,
    "theorem1": _theorem1,
    "torus_structure": _torus_structure,
    "su2_isometry": _su2_isometry,
    "modulus": _modulus,
    "struble": _struble,
}


def environment_stamp(seed):
    return {"version": __version__, "seed": int(seed), "backend": _kernels.backend.name}


def run(config, c_mu_scale=1.0):
    """Run the configured suites; check failures become failed records."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    kernel, family, f, box = cfg.build()
    consts = HomogeneityConstants.of(cfg.group, c_mu_scale)
    ctx = _Context(cfg, kernel, family, f, box, consts)
    report = ExperimentReport(cfg.to_dict(), environment=environment_stamp(cfg.seed))
    if not cfg.suite:
        return report
    try:
        report.bounds = theorem1_bound(kernel, family, consts, cfg.kappa_rho).to_dict()
    except ValueError as e:
        report.records.append(Record("bounds", None, None, "le", 0.0, "error", detail={"error": str(e)}))
    for name in cfg.suite:
        t0 = time.perf_counter()
        try:
            recs = _SUITE_FUNCS[name](ctx, suite_seed(cfg.seed, name))
        except (ValueError, ArithmeticError) as e:
            recs = [Record(f"{name}.error", None, None, "le", 0.0, "error",
                           detail={"error": f"{type(e).__name__}: {e}"})]
        ms = 1e3 * (time.perf_counter() - t0) / max(len(recs), 1)
        for r in recs:
            r.runtime_ms = ms
        report.records.extend(recs)
    return report


def apply_operator(config, points):
    """Evaluate the configured operator on the configured function at ``points``."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    kernel, family, f, _ = cfg.build()
    pts = np.atleast_2d(np.asarray(points, float))
    try:
        return evaluate_operator(kernel, family, f, pts)
    except InvalidInputError as e:
        raise ConfigError(str(e)) from e


def bound_report(config):
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    kernel, family, _, _ = cfg.build()
    return theorem1_bound(kernel, family, HomogeneityConstants.of(cfg.group), cfg.kappa_rho)


# ----------------------------------------------------------------------------
# sweeps
# ----------------------------------------------------------------------------


def thread_cap():
    raw = os.environ.get("HAUSDORFF_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as e:
        raise ConfigError(f"HAUSDORFF_THREADS must be an integer, got {raw!r}") from e
    if n < 1:
        raise ConfigError("HAUSDORFF_THREADS must be >= 1")
    return n


def _sweep_row(cfg):
    kernel, family, f, box = cfg.build()
    consts = HomogeneityConstants.of(cfg.group)
    ctx = _Context(cfg, kernel, family, f, box, consts)
    b = theorem1_bound(kernel, family, consts)
    seed = suite_seed(cfg.seed, "lemma1")
    l1, _ = _f_l1(ctx, seed)
    lem = check_lemma1(kernel, family, f, _x_grid(ctx, seed), l1, cfg.tolerances["lemma1"])
    lemma4 = b.norm_L_A <= consts.c_mu * b.norm_L1_ks * (1 + cfg.tolerances["exact"])
    return {
        "group": cfg.group.label,
        "kernel_id": cfg.kernel.get("id", cfg.kernel["expr"]),
        "family_id": cfg.family.get("id", cfg.family["kind"]),
        "norm_L_A": b.norm_L_A,
        "norm_L1_ks": b.norm_L1_ks,
        "theorem1_bound": b.theorem1_bound,
        "lemma1_lhs": lem.lhs,
        "lemma1_rhs": lem.rhs,
        "verdict": "pass" if (lem.passed and lemma4) else "fail",
    }


def sweep(configs, path=None, threads=None):
    """One CSV row per config, in input order; returns (rows, csv_text)."""
    if not configs:
        raise ConfigError("sweep needs at least one config")
    parsed = []
    for i, c in enumerate(configs):
        try:
            parsed.append(c if isinstance(c, ExperimentConfig) else ExperimentConfig.from_dict(c))
        except ConfigError as e:
            raise ConfigError(f"config #{i}: {e}") from e
    workers = max(1, min(threads or thread_cap(), len(parsed)))
    if workers == 1:
        rows = [_sweep_row(c) for c in parsed]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, parsed))
    text = _csv_text(SWEEP_COLUMNS, rows)
    _write(path, text)
    return rows, text


def load_config_dir(directory):
    names = sorted(n for n in os.listdir(directory) if n.endswith(".json"))
    if not names:
        raise ConfigError(f"no .json configs in {directory}")
    return [ExperimentConfig.load(os.path.join(directory, n)) for n in names]


def acceptance(seed=0, c_mu_scale=1.0, stream=None):
    from .acceptance import run_acceptance
    return run_acceptance(seed, c_mu_scale, stream)
