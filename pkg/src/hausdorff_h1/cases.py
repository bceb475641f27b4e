"""Seeded test inputs: kernels, automorphism families and functions per group.

Every case carries an L¹ norm for f that is known in closed form, so the
L¹-boundedness check compares quadrature against an exact right-hand side.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import homspace as hs
from .automorphisms import AutomorphismFamily
from .hausdorff import Kernel, covering_box

# groups used by the acceptance suite, one per family
DEFAULT_GROUPS = (
    hs.GroupSpec("euclidean", 2),
    hs.GroupSpec("torus", 2),
    hs.GroupSpec("su2"),
    hs.GroupSpec("heisenberg", 1),
    hs.GroupSpec("upper_triangular", 3),
)

# small GL(2, Z) pool for torus families
_TORUS_MATS = (
    ((1, 1), (0, 1)),
    ((0, 1), (1, 0)),
    ((2, 1), (1, 1)),
    ((-1, 0), (0, 1)),
    ((1, 0), (-1, 1)),
    ((1, 0), (0, 1)),
)

BIWEIGHT_MASS = 16.0 / 15.0


def _fmt(v):
    return repr(float(v))


def biweight(x, center, half):
    """Product of (1 - t^2)^2 bumps; integral prod(half) * (16/15)^d."""
    t = (np.atleast_2d(x) - center) / half
    return np.prod(np.where(np.abs(t) < 1.0, (1.0 - t * t) ** 2, 0.0), axis=1)


@dataclass
class Lemma1Case:
    kernel: Kernel
    family: AutomorphismFamily
    f: object
    f_l1: float
    x_grid: hs.QuadratureGrid
    nonneg: bool
    label: str = ""


def _kernel(rng, nonneg, lo=1.0, hi=2.0, resolution=12):
    a = _fmt(rng.uniform(-0.9, 0.9))
    if nonneg:
        expr = f"1 + {a}*cos(pi*(u - {_fmt(lo)}))"
    else:
        expr = f"cos(2*pi*(u - {_fmt(lo)})) + {a}*0.5"
    return Kernel.from_expression(expr, [(lo, hi)], resolution, "gauss")


def _bump_function(d, rng, nonneg, lo=-1.0, hi=1.0):
    """One bump (nonneg) or bump minus half a disjoint bump (signed)."""
    half = rng.uniform(0.3, 0.5, size=d)
    if nonneg:
        c = rng.uniform(lo + 0.5, hi - 0.5, size=d)
        f = lambda x: biweight(x, c, half)
        l1 = float(np.prod(half) * BIWEIGHT_MASS ** d)
        support = np.stack([c - half, c + half], axis=1)
        return f, l1, support
    c1 = np.full(d, -0.55)
    c2 = np.full(d, 0.55)
    half = np.minimum(half, 0.5)
    f = lambda x: biweight(x, c1, half) - 0.5 * biweight(x, c2, half)
    l1 = 1.5 * float(np.prod(half) * BIWEIGHT_MASS ** d)
    support = np.stack([c1 - half, c2 + half], axis=1)
    return f, l1, support


def _box_x_grid(kernel, family, support, resolution):
    bounds = covering_box(kernel, family, support, pad=0.02)
    return hs.box_grid(bounds, resolution)


def random_lemma1_case(spec, rng, nonneg=None, x_resolution=None):
    """A seeded (Φ, A, f) triple on ``spec`` with its truncation grid."""
    if nonneg is None:
        nonneg = bool(rng.uniform() < 0.5)
    fam = spec.family
    if fam == "euclidean":
        n = spec.n
        M = [[("u" if i == j else "0") for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                M[i][j] = _fmt(rng.uniform(-1.0, 1.0))
        if n == 1:
            M = [[rng.choice(["u", "1/u"])]]
        family = AutomorphismFamily.from_descriptor(spec, {"kind": "matrix", "matrix": M}, 1)
        kernel = _kernel(rng, nonneg)
        f, l1, support = _bump_function(n, rng, nonneg)
        res = x_resolution or {1: 4000, 2: 240, 3: 64}.get(n, 24)
        x_grid = _box_x_grid(kernel, family, support, res)
    elif fam == "torus":
        n = spec.n
        split = _fmt(rng.uniform(0.3, 0.7))
        if n == 1:
            mats = [((1,),), ((-1,),)]
        else:
            idx = rng.choice(len(_TORUS_MATS), size=2, replace=False)
            mats = [_TORUS_MATS[i] for i in idx]
            if n > 2:
                mats = [tuple(tuple(int(i == j) for j in range(n)) for i in range(n))] * 2
        rows = [[f"{mats[0][i][j]}*step({split} - u) + {mats[1][i][j]}*step(u - {split})"
                 for j in range(n)] for i in range(n)]
        family = AutomorphismFamily.from_descriptor(spec, {"kind": "matrix", "matrix": rows}, 1)
        kernel = _kernel(rng, nonneg, 0.0, 1.0, 16)
        k = rng.integers(-2, 3, size=n)
        if not k.any():
            k[0] = 1
        alpha = rng.uniform(-0.9, 0.9)
        if nonneg:
            f = lambda x: 1.0 + alpha * np.cos(2.0 * np.pi * (np.atleast_2d(x) @ k))
            l1 = 1.0
        else:
            f = lambda x: np.cos(2.0 * np.pi * (np.atleast_2d(x) @ k))
            l1 = 2.0 / math.pi
        x_grid = hs.group_grid(spec, x_resolution or {1: 512, 2: 96}.get(n, 24))
    elif fam == "su2":
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        a = _fmt(rng.uniform(0.5, 3.0))
        quat = [f"cos({a}*u)"] + [f"{_fmt(c)}*sin({a}*u)" for c in axis]
        family = AutomorphismFamily.from_descriptor(spec, {"kind": "inner", "quaternion": quat}, 1)
        kernel = _kernel(rng, nonneg, 0.0, 1.0)
        p = rng.normal(size=4)
        p /= np.linalg.norm(p)
        alpha = rng.uniform(-1.0, 1.0)
        if nonneg:
            f = lambda x: 1.0 + alpha * (np.atleast_2d(x) @ p)
            l1 = 1.0
        else:
            f = lambda x: np.atleast_2d(x) @ p
            l1 = 4.0 / (3.0 * math.pi)  # E|x_1| on S^3
        x_grid = hs.su2_grid(x_resolution or 24)
    else:
        d = spec.coord_dim
        if fam == "heisenberg" and spec.n == 1 and rng.uniform() < 0.5:
            c = _fmt(rng.uniform(0.2, 1.5))
            if rng.uniform() < 0.5:
                S = [[f"cos({c}*u)", f"-sin({c}*u)"], [f"sin({c}*u)", f"cos({c}*u)"]]
            else:
                S = [["1", f"{c}*(u - 1)"], ["0", "1"]]
            desc = {"kind": "symplectic", "matrix": S}
        else:
            lo = _fmt(rng.uniform(0.8, 1.0))
            span = _fmt(rng.uniform(0.1, 0.4))
            desc = {"kind": "dilation", "lambda": f"{lo} + {span}*(u - 1)"}
        family = AutomorphismFamily.from_descriptor(spec, desc, 1)
        kernel = _kernel(rng, nonneg)
        f, l1, support = _bump_function(d, rng, nonneg)
        x_grid = _box_x_grid(kernel, family, support, x_resolution or (40 if d <= 3 else 12))
    return Lemma1Case(kernel, family, f, l1, x_grid, nonneg, spec.label)


def standard_family(spec):
    """A representative automorphism family on Ω = [1, 2] for each group."""
    fam = spec.family
    if fam == "euclidean":
        n = spec.n
        rows = [[("u" if i == j else ("1" if j == i + 1 else "0")) for j in range(n)] for i in range(n)]
        desc = {"kind": "matrix", "matrix": rows}
    elif fam == "torus":
        n = spec.n
        if n == 1:
            rows = [["2*step(1.5 - u) - 1"]]
        else:
            rows = [[("1" if i == j else ("floor(u)" if j == i + 1 else "0")) for j in range(n)]
                    for i in range(n)]
        desc = {"kind": "matrix", "matrix": rows}
    elif fam == "su2":
        desc = {"kind": "inner", "quaternion": ["cos(u)", "0.6*sin(u)", "0", "0.8*sin(u)"]}
    else:
        desc = {"kind": "dilation", "lambda": "u"}
    return AutomorphismFamily.from_descriptor(spec, desc, 1)


def standard_kernel(resolution=16):
    return Kernel.from_expression("1", [(1.0, 2.0)], resolution, "gauss")


def atom_ball(spec, rng):
    """A random ball of admissible radius for atoms on ``spec``."""
    center = hs.sample_region(spec, 1, rng, extent=0.5)[0]
    r = {"torus": 0.2, "su2": 0.6}.get(spec.family, 0.5)
    return hs.Ball(center, r)
