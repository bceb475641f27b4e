"""Concrete groups as spaces of homogeneous type.

Five backends share one functional interface: Euclidean space R^n with the
sup-metric, the torus T^n in additive coordinates [0, 1)^n, SU(2) as unit
quaternions with the great-circle metric on S^3, the Heisenberg group H_n
with a Koranyi-type gauge, and the strictly upper triangular group T_1(n, R)
with a symmetrised homogeneous quasi-norm.

Points are plain numpy arrays whose last axis holds the coordinates, so every
operation accepts a single point of shape ``(d,)`` or a batch ``(N, d)``.
Haar measures are Lebesgue measure for R^n, H_n and T_1(n, R) (normalised so
that gauge balls satisfy ``mu(B(x, r)) = r**Q``), and the probability Haar
measure on the compact groups.
"""
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _kernels
from ._kernels import as_rows
from .errors import InvalidInputError

FAMILIES = ("euclidean", "torus", "su2", "heisenberg", "upper_triangular")

_ALIASES = {
    "r": "euclidean", "rn": "euclidean", "real": "euclidean",
    "t": "torus", "tn": "torus",
    "su(2)": "su2", "sphere3": "su2",
    "h": "heisenberg", "hn": "heisenberg",
    "ut": "upper_triangular", "t1": "upper_triangular", "unitriangular": "upper_triangular",
}


@dataclass(frozen=True)
class GroupSpec:
    """One of the five supported groups.

    ``n`` is the Euclidean/torus dimension, the Heisenberg index, or the matrix
    size for T_1(n, R).  It is ignored (and stored as 1) for SU(2).
    """

    family: str
    n: int = 1

    def __post_init__(self):
        fam = _ALIASES.get(str(self.family).lower(), str(self.family).lower())
        if fam not in FAMILIES:
            raise InvalidInputError(f"unknown group family {self.family!r}")
        n = 1 if fam == "su2" else int(self.n)
        if n < 1 or (fam == "upper_triangular" and n < 2):
            raise InvalidInputError(f"invalid size n={self.n} for {fam}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "family" not in d:
            raise InvalidInputError(f"group descriptor needs a 'family' key: {d!r}")
        extra = set(d) - {"family", "n"}
        if extra:
            raise InvalidInputError(f"unknown group descriptor keys {sorted(extra)}")
        return cls(d["family"], d.get("n", 1))

    def to_dict(self):
        if self.family == "su2":
            return {"family": "su2"}
        return {"family": self.family, "n": self.n}

    @property
    def dimension(self):
        """Manifold dimension."""
        n = self.n
        return {
            "euclidean": n,
            "torus": n,
            "su2": 3,
            "heisenberg": 2 * n + 1,
            "upper_triangular": n * (n - 1) // 2,
        }[self.family]

    @property
    def coord_dim(self):
        """Length of the coordinate vector (4 for unit quaternions)."""
        return 4 if self.family == "su2" else self.dimension

    @property
    def homogeneous_dimension(self):
        n = self.n
        return {
            "euclidean": n,
            "torus": n,
            "su2": 3,
            "heisenberg": 2 * n + 2,
            "upper_triangular": n * (n * n - 1) // 6,
        }[self.family]

    @property
    def s(self):
        """Doubling exponent log2(C_mu)."""
        return float(self.homogeneous_dimension)

    @property
    def doubling_constant(self):
        if self.family == "su2":
            return 8.0
        return 2.0 ** self.homogeneous_dimension

    @property
    def is_compact(self):
        return self.family in ("torus", "su2")

    @property
    def label(self):
        return {
            "euclidean": f"R^{self.n}",
            "torus": f"T^{self.n}",
            "su2": "SU(2)",
            "heisenberg": f"H_{self.n}",
            "upper_triangular": f"T1({self.n},R)",
        }[self.family]

    def identity(self):
        e = np.zeros(self.coord_dim)
        if self.family == "su2":
            e[0] = 1.0
        return e

    def point(self, coords):
        """Validate ``coords`` and return the canonical point array."""
        x = np.array(coords, dtype=float)
        check_points(x, self)
        if self.family == "torus":
            x = reduce_torus(x)
        elif self.family == "su2":
            norm = np.linalg.norm(x, axis=-1, keepdims=True)
            if np.any(np.abs(norm - 1.0) > 1e-8):
                raise InvalidInputError("SU(2) coordinates must be unit quaternions")
            x = x / norm
        return x


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise InvalidInputError(f"ball radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class SnowflakeParams:
    """Comparison constants ``a d^(1/beta) <= rho <= b d^(1/beta)``."""

    a: float = 1.0
    b: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.beta > 0):
            raise InvalidInputError("snowflake parameters must be positive")
        if self.a > self.b:
            raise InvalidInputError("need a <= b")


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Cells of a (truncated) domain: representative points and Haar weights.

    ``error`` is zero for deterministic tilings and the absolute error of the
    total measure for sampled grids.  ``axes`` is set for regular tensor grids
    and enables multilinear interpolation of grid functions.
    """

    points: np.ndarray
    weights: np.ndarray
    domain: dict = field(default_factory=dict)
    error: float = 0.0
    axes: tuple = None

    @property
    def size(self):
        return self.weights.shape[0]

    @property
    def total(self):
        return float(np.sum(self.weights))


@dataclass(frozen=True)
class StrubleFamily:
    """Shrinking centred boxes V_k of side 2^-k, k = 1..n_max, in T^n."""

    group: GroupSpec
    n_max: int = 30

    def __post_init__(self):
        if self.group.family != "torus":
            raise InvalidInputError("Struble neighbourhoods are implemented for tori only")
        if self.n_max < 1:
            raise InvalidInputError("n_max must be >= 1")

    @property
    def sides(self):
        return 0.5 ** np.arange(1, self.n_max + 1)


# ----------------------------------------------------------------------------
# coordinates
# ----------------------------------------------------------------------------


def check_points(x, spec):
    x = np.asarray(x)
    if x.ndim not in (1, 2) or x.shape[-1] != spec.coord_dim:
        raise InvalidInputError(
            f"{spec.label} points need {spec.coord_dim} coordinates, got shape {x.shape}")
    return x


def reduce_torus(x):
    r = np.mod(x, 1.0)
    return np.where(r >= 1.0, 0.0, r)


@functools.lru_cache(maxsize=None)
def ut_pairs(n):
    """Index arrays (I, J) of the strictly upper entries, row-major."""
    I, J = np.triu_indices(n, k=1)
    return I.astype(np.int64), J.astype(np.int64)


def ut_to_matrix(x, n):
    I, J = ut_pairs(n)
    x = as_rows(x)
    mats = np.tile(np.eye(n), (x.shape[0], 1, 1))
    mats[:, I, J] = x
    return mats


def quat_multiply(p, q):
    p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
    w1, x1, y1, z1 = np.moveaxis(p, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q, -1, 0)
    return np.stack([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ], axis=-1)


def quat_conjugate(q):
    q = np.array(q, dtype=float)
    q[..., 1:] *= -1.0
    return q


def _batched(g, h, spec):
    check_points(g, spec)
    check_points(h, spec)
    g, h = np.asarray(g, float), np.asarray(h, float)
    squeeze = g.ndim == 1 and h.ndim == 1
    G, H = np.broadcast_arrays(as_rows(g), as_rows(h))
    return np.ascontiguousarray(G), np.ascontiguousarray(H), squeeze


# ----------------------------------------------------------------------------
# group law
# ----------------------------------------------------------------------------


def multiply(g, h, spec):
    """Group product g·h."""
    fam = spec.family
    if fam in ("euclidean", "torus", "su2", "heisenberg"):
        check_points(g, spec)
        check_points(h, spec)
        g, h = np.asarray(g, float), np.asarray(h, float)
        if fam == "euclidean":
            return g + h
        if fam == "torus":
            return reduce_torus(g + h)
        if fam == "su2":
            return quat_multiply(g, h)
        n = spec.n
        g, h = np.broadcast_arrays(g, h)
        v, w, t = g[..., :n], g[..., n:2 * n], g[..., 2 * n]
        v2, w2, t2 = h[..., :n], h[..., n:2 * n], h[..., 2 * n]
        tt = t + t2 + 0.5 * (np.sum(v * w2, axis=-1) - np.sum(w * v2, axis=-1))
        return np.concatenate([v + v2, w + w2, tt[..., None]], axis=-1)
    G, H, squeeze = _batched(g, h, spec)
    I, J = ut_pairs(spec.n)
    out = _kernels.backend.ut_multiply(G, H, I, J, spec.n)
    return out[0] if squeeze else out


def inverse(g, spec):
    check_points(g, spec)
    g = np.asarray(g, float)
    fam = spec.family
    if fam in ("euclidean", "heisenberg"):
        return -g
    if fam == "torus":
        return reduce_torus(-g)
    if fam == "su2":
        return quat_conjugate(g)
    I, J = ut_pairs(spec.n)
    out = _kernels.backend.ut_inverse(as_rows(g), I, J, spec.n)
    return out[0] if g.ndim == 1 else out


# ----------------------------------------------------------------------------
# gauges and distances
# ----------------------------------------------------------------------------


def heisenberg_gauge(x, n, c=1.0):
    """c * ((|v|^2 + |w|^2)^2 + t^2)^(1/4)."""
    x = np.asarray(x, float)
    z2 = np.sum(x[..., :2 * n] ** 2, axis=-1)
    return c * np.sqrt(np.sqrt(z2 * z2 + x[..., 2 * n] ** 2))


def ut_gauge(x, n, c=1.0):
    """c * max(N(x), N(x^-1)) with N(x) = max_{i<j} |x_ij|^(1/(j-i))."""
    x = np.asarray(x, float)
    I, J = ut_pairs(n)
    out = c * _kernels.backend.ut_gauge(as_rows(x), I, J, n)
    return out[0] if x.ndim == 1 else out


def distance(g, h, spec):
    """Left-invariant (quasi-)distance rho(g, h) = |h^-1 g|."""
    fam = spec.family
    if fam == "euclidean":
        check_points(g, spec)
        check_points(h, spec)
        return np.max(np.abs(np.asarray(g, float) - np.asarray(h, float)), axis=-1)
    if fam == "torus":
        check_points(g, spec)
        check_points(h, spec)
        d = np.mod(np.abs(np.asarray(g, float) - np.asarray(h, float)), 1.0)
        return np.max(np.minimum(d, 1.0 - d), axis=-1)
    if fam == "su2":
        check_points(g, spec)
        check_points(h, spec)
        g, h = np.asarray(g, float), np.asarray(h, float)
        # arccos(<g,h>) written in a form that stays accurate for tiny angles
        return 2.0 * np.arctan2(np.linalg.norm(g - h, axis=-1), np.linalg.norm(g + h, axis=-1))
    G, H, squeeze = _batched(g, h, spec)
    c = calibrate_gauge(spec)
    if fam == "heisenberg":
        out = _kernels.backend.heis_distance(G, H, spec.n, c)
    else:
        I, J = ut_pairs(spec.n)
        diff = _kernels.backend.ut_left_divide(H, G, I, J, spec.n)
        out = c * _kernels.backend.ut_gauge(diff, I, J, spec.n)
    return out[0] if squeeze else out


def snowflake_distance(g, h, spec, theta):
    """rho(g, h) ** theta for theta in (0, 1]."""
    if not 0.0 < theta <= 1.0:
        raise InvalidInputError(f"theta must lie in (0, 1], got {theta}")
    return distance(g, h, spec) ** theta


# ----------------------------------------------------------------------------
# measures
# ----------------------------------------------------------------------------


def su2_cap_measure(r):
    """Normalised Haar measure of a geodesic ball of radius r in S^3."""
    r = np.minimum(np.asarray(r, float), math.pi)
    return (r - np.sin(r) * np.cos(r)) / math.pi


def _ball_measure_radius(r, spec):
    fam = spec.family
    if fam == "euclidean":
        return math.prod([2.0 * r] * spec.n)
    if fam == "torus":
        return math.prod([min(2.0 * r, 1.0)] * spec.n)
    if fam == "su2":
        return float(su2_cap_measure(r))
    return r ** spec.homogeneous_dimension


def ball_measure(ball, spec):
    """Haar measure of B(x, r); independent of the centre."""
    radius = ball.radius if isinstance(ball, Ball) else float(ball)
    if not radius > 0:
        raise InvalidInputError(f"ball radius must be positive, got {radius}")
    return _ball_measure_radius(radius, spec)


@functools.lru_cache(maxsize=None)
def _unit_gauge_volume(spec):
    """Lebesgue volume of {x : |x| < 1} for the uncalibrated gauge (c = 1)."""
    if spec.family == "heisenberg":
        n = spec.n
        # slices in t are 2n-balls of radius (1 - t^2)^(1/4); t = sin(theta)
        nodes, wts = leggauss(96)
        theta = 0.5 * math.pi * nodes
        slab = np.sum(wts * np.cos(theta) ** (n + 1)) * 0.5 * math.pi
        return math.pi ** n / math.factorial(n) * slab
    if spec.family == "upper_triangular":
        return _ut_unit_volume(spec.n)
    raise InvalidInputError(f"no gauge to calibrate for {spec.label}")


def _ut_unit_volume(n, mc_samples=2_000_000, seed=20240917):
    # The (1, n) entry appears only in (x^-1)_{1n} = -x_{1n} + P(rest), so its
    # admissible set is (-1, 1) ∩ (P - 1, P + 1), of length max(0, 2 - |P|).
    I, J = ut_pairs(n)
    m = len(I)
    if m == 1:
        return 2.0
    last = int(np.nonzero((I == 0) & (J == n - 1))[0][0])
    others = [p for p in range(m) if p != last]
    expo = 1.0 / (J - I).astype(float)

    def integrand(rest):
        full = np.zeros((rest.shape[0], m))
        full[:, others] = rest
        inv = _kernels.backend.ut_inverse(full, I, J, n)
        keep = np.ones(rest.shape[0], dtype=bool)
        for p in others:
            keep &= (np.abs(full[:, p]) ** expo[p] < 1.0) & (np.abs(inv[:, p]) ** expo[p] < 1.0)
        P = inv[:, last]
        return np.where(keep, np.maximum(0.0, 2.0 - np.abs(P)), 0.0)

    if len(others) <= 2:
        nodes, wts = leggauss(24)
        # split every axis at 0 where |.| has its kink
        xs = np.concatenate([0.5 * (nodes - 1.0), 0.5 * (nodes + 1.0)])
        ws = np.concatenate([0.5 * wts, 0.5 * wts])
        mesh = np.meshgrid(*([xs] * len(others)), indexing="ij")
        wmesh = np.meshgrid(*([ws] * len(others)), indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        w = np.prod(np.stack([g.ravel() for g in wmesh], axis=1), axis=1)
        return float(np.sum(w * integrand(pts)))
    rng = np.random.default_rng(seed)
    total = 0.0
    chunk = 200_000
    for start in range(0, mc_samples, chunk):
        size = min(chunk, mc_samples - start)
        rest = rng.uniform(-1.0, 1.0, size=(size, len(others)))
        total += float(np.sum(integrand(rest)))
    return total / mc_samples * 2.0 ** len(others)


@functools.lru_cache(maxsize=None)
def calibrate_gauge(spec):
    """Gauge constant c with mu(B(e, 1)) = 1, i.e. c = V0^(1/Q).

    V0 is the Lebesgue volume of the uncalibrated unit gauge ball.  The value
    is computed once per group by deterministic quadrature (seeded Monte
    Carlo for T_1(n, R) with n >= 4) and cached.
    """
    if spec.family not in ("heisenberg", "upper_triangular"):
        raise InvalidInputError(f"calibrate_gauge is defined for homogeneous groups, not {spec.label}")
    return _unit_gauge_volume(spec) ** (1.0 / spec.homogeneous_dimension)


# ----------------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------------


def sample_uniform_s3(n, rng):
    q = rng.standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def _sample_cap_angles(n, r, rng):
    # inverse CDF of the radial density ∝ sin^2(theta) on [0, r]
    R = min(r, math.pi)
    target = rng.uniform(0.0, 1.0, n) * (R - math.sin(R) * math.cos(R))
    lo = np.zeros(n)
    hi = np.full(n, R)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = mid - np.sin(mid) * np.cos(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _gauge_box(spec, R):
    """Half-widths of a coordinate box containing the gauge ball of radius R·c."""
    if spec.family == "heisenberg":
        n = spec.n
        return np.array([R] * (2 * n) + [R * R])
    I, J = ut_pairs(spec.n)
    return R ** (J - I).astype(float)


def sample_ball(spec, ball, n, rng):
    """n points distributed uniformly (w.r.t. Haar measure) in ``ball``."""
    x0, r = ball.center, ball.radius
    fam = spec.family
    if fam == "euclidean":
        return x0 + rng.uniform(-r, r, size=(n, spec.n))
    if fam == "torus":
        if r > 0.5:
            return rng.uniform(0.0, 1.0, size=(n, spec.n))
        return reduce_torus(x0 + rng.uniform(-r, r, size=(n, spec.n)))
    if fam == "su2":
        theta = _sample_cap_angles(n, r, rng)
        axis = rng.standard_normal((n, 3))
        axis /= np.linalg.norm(axis, axis=1, keepdims=True)
        local = np.concatenate([np.cos(theta)[:, None], np.sin(theta)[:, None] * axis], axis=1)
        return quat_multiply(x0, local)
    c = calibrate_gauge(spec)
    half = _gauge_box(spec, r / c)
    e = spec.identity()
    found = []
    count = 0
    while count < n:
        draw = rng.uniform(-1.0, 1.0, size=(max(2 * (n - count), 64), half.size)) * half
        keep = draw[distance(draw, e, spec) < r]
        found.append(keep)
        count += keep.shape[0]
    local = np.concatenate(found)[:n]
    return multiply(x0, local, spec)


def sample_region(spec, n, rng, extent=1.0):
    """n points spread over a fixed reference region of the group."""
    if spec.family == "torus":
        return rng.uniform(0.0, 1.0, size=(n, spec.n))
    if spec.family == "su2":
        return sample_uniform_s3(n, rng)
    return rng.uniform(-extent, extent, size=(n, spec.coord_dim))


def estimate_ball_measure(spec, ball, n_samples=200_000, seed=0, method="mc", resolution=2000):
    """Independent measurement of mu(ball); returns (value, standard_error).

    ``method="mc"`` counts uniform samples of a bounding region that land in
    the ball.  ``method="grid"`` (Heisenberg H_1 only) integrates the
    t-extent of the ball over a midpoint grid in (v, w).
    """
    r = ball.radius
    if method == "grid":
        if spec.family != "heisenberg" or spec.n != 1:
            raise InvalidInputError("grid ball measurement is implemented for H_1 only")
        R = r / calibrate_gauge(spec)
        return float(_kernels.backend.heis_slice_volume(R, int(resolution))), 0.0
    rng = np.random.default_rng(seed)
    fam = spec.family
    if fam == "su2":
        pts = sample_uniform_s3(n_samples, rng)
        vol = 1.0
    elif fam == "torus":
        pts = rng.uniform(0.0, 1.0, size=(n_samples, spec.n))
        vol = 1.0
    else:
        if fam == "euclidean":
            half = np.full(spec.n, 1.25 * r)
        else:
            half = 1.1 * _gauge_box(spec, r / calibrate_gauge(spec))
        local = rng.uniform(-1.0, 1.0, size=(n_samples, half.size)) * half
        pts = multiply(ball.center, local, spec)
        vol = float(np.prod(2.0 * half))
    p = float(np.mean(distance(pts, ball.center, spec) < r))
    return vol * p, vol * math.sqrt(max(p * (1.0 - p), 0.0) / n_samples)


# ----------------------------------------------------------------------------
# doubling diagnostics
# ----------------------------------------------------------------------------


@dataclass
class DoublingReport:
    group: str
    c_mu: float
    s: float
    ratios: np.ndarray
    max_ratio: float
    d_checks: int
    d_violations: int
    mc_ratios: np.ndarray = None
    mc_stderr: np.ndarray = None
    passed: bool = False


def doubling_profile(spec, centers, radii, ks=(1.5, 2.0, 4.0, 8.0), mc_samples=0, seed=0):
    """Ratios mu(B(x, 2r)) / mu(B(x, r)) and the (D) inequality for several k.

    With ``mc_samples > 0`` both balls are also measured by Monte Carlo at each
    centre (SU(2) cross-check; any family accepted).
    """
    centers = [np.asarray(c, float) for c in centers]
    radii = [float(r) for r in radii]
    if not centers or not radii:
        raise InvalidInputError("doubling_profile needs at least one centre and one radius")
    C, s = spec.doubling_constant, spec.s
    ratios = np.empty((len(centers), len(radii)))
    checks = violations = 0
    for i, x in enumerate(centers):
        for j, r in enumerate(radii):
            m_r = ball_measure(Ball(x, r), spec)
            ratios[i, j] = ball_measure(Ball(x, 2.0 * r), spec) / m_r
            for k in ks:
                checks += 1
                if ball_measure(Ball(x, k * r), spec) > C * k ** s * m_r * (1.0 + 1e-12):
                    violations += 1
    report = DoublingReport(spec.label, C, s, ratios, float(ratios.max()), checks, violations)
    if mc_samples:
        mc = np.empty_like(ratios)
        se = np.empty_like(ratios)
        for i, x in enumerate(centers):
            for j, r in enumerate(radii):
                seed_ij = (seed, i, j)
                big, se_big = estimate_ball_measure(spec, Ball(x, 2 * r), mc_samples, seed_ij)
                small, se_small = estimate_ball_measure(spec, Ball(x, r), mc_samples, seed_ij + (1,))
                mc[i, j] = big / small
                se[i, j] = mc[i, j] * math.hypot(se_big / big, se_small / small)
        report.mc_ratios, report.mc_stderr = mc, se
    report.passed = report.max_ratio <= C * (1.0 + 1e-12) and violations == 0
    return report


def snowflake_doubling(spec, radii, theta):
    """Doubling ratios of (G, rho^theta) with the comparison-metric bound.

    A rho^theta ball of radius r is the rho ball of radius r^(1/theta); the
    doubling bound for the new metric is C_mu * 2^(s/theta).
    """
    if not 0.0 < theta <= 1.0:
        raise InvalidInputError(f"theta must lie in (0, 1], got {theta}")
    inv = 1.0 / theta
    ratios = np.array([
        _ball_measure_radius((2.0 * r) ** inv, spec) / _ball_measure_radius(r ** inv, spec)
        for r in radii
    ])
    bound = spec.doubling_constant * 2.0 ** (spec.s * inv)
    return {
        "theta": theta,
        "max_ratio": float(ratios.max()),
        "power_law": spec.doubling_constant ** inv,
        "bound": bound,
        "passed": bool(ratios.max() <= bound * (1.0 + 1e-12)),
    }


# ----------------------------------------------------------------------------
# Struble metric on tori
# ----------------------------------------------------------------------------


def torus_offsets(x, y):
    d = np.mod(np.abs(np.asarray(x, float) - np.asarray(y, float)), 1.0)
    return np.minimum(d, 1.0 - d)


def struble_metric(x, y, fam):
    """sup_k nu(x V_k  △  y V_k) computed in closed form for boxes."""
    spec = fam.group
    check_points(x, spec)
    check_points(y, spec)
    squeeze = np.ndim(x) == 1 and np.ndim(y) == 1
    X, Y = np.broadcast_arrays(as_rows(x), as_rows(y))
    delta = np.ascontiguousarray(torus_offsets(X, Y))
    out = _kernels.backend.torus_symdiff_sup(delta, np.ascontiguousarray(fam.sides))
    return float(out[0]) if squeeze else out


# ----------------------------------------------------------------------------
# quadrature grids
# ----------------------------------------------------------------------------


def _axis_rule(lo, hi, m, rule):
    if rule == "midpoint":
        h = (hi - lo) / m
        return lo + h * (np.arange(m) + 0.5), np.full(m, h)
    if rule == "gauss":
        nodes, wts = leggauss(m)
        half = 0.5 * (hi - lo)
        return lo + half * (nodes + 1.0), half * wts
    raise InvalidInputError(f"unknown quadrature rule {rule!r}")


def box_grid(bounds, resolution, rule="midpoint"):
    """Tensor-product grid over a box ``[(lo, hi), ...]``."""
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if not bounds or any(hi <= lo for lo, hi in bounds):
        raise InvalidInputError(f"degenerate box {bounds}")
    res = [int(resolution)] * len(bounds) if np.isscalar(resolution) else [int(r) for r in resolution]
    axes, wax = zip(*(_axis_rule(lo, hi, m, rule) for (lo, hi), m in zip(bounds, res)))
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    w = np.prod(np.stack([g.ravel() for g in np.meshgrid(*wax, indexing="ij")], axis=1), axis=1)
    return QuadratureGrid(pts, w, {"kind": "box", "bounds": bounds, "rule": rule}, 0.0, tuple(axes))


def _jittered_box(bounds, budget, rng):
    d = len(bounds)
    k = max(2, int(round(budget ** (1.0 / d))))
    lo = np.array([b[0] for b in bounds])
    width = np.array([b[1] - b[0] for b in bounds]) / k
    idx = np.stack([g.ravel() for g in np.meshgrid(*([np.arange(k)] * d), indexing="ij")], axis=1)
    pts = lo + width * (idx + rng.uniform(0.0, 1.0, size=idx.shape))
    return pts, np.full(pts.shape[0], float(np.prod(width)))


def su2_grid(resolution):
    """Deterministic Haar-exact cells of SU(2) in Hopf coordinates.

    q = (cos(eta) e^{i xi1}, sin(eta) e^{i xi2}); the density is
    sin(eta) cos(eta) and each weight is the exact measure of its cell.
    """
    m_eta, m_xi = int(resolution), 2 * int(resolution)
    e_edges = np.linspace(0.0, 0.5 * math.pi, m_eta + 1)
    x_edges = np.linspace(0.0, 2.0 * math.pi, m_xi + 1)
    eta = 0.5 * (e_edges[1:] + e_edges[:-1])
    xi = 0.5 * (x_edges[1:] + x_edges[:-1])
    w_eta = 0.5 * (np.sin(e_edges[1:]) ** 2 - np.sin(e_edges[:-1]) ** 2)
    E, X1, X2 = np.meshgrid(eta, xi, xi, indexing="ij")
    W = np.meshgrid(w_eta, np.ones(m_xi), np.ones(m_xi), indexing="ij")[0]
    pts = np.stack([np.cos(E) * np.cos(X1), np.cos(E) * np.sin(X1),
                    np.sin(E) * np.cos(X2), np.sin(E) * np.sin(X2)], axis=-1).reshape(-1, 4)
    w = W.ravel() * (2.0 * math.pi / m_xi) ** 2 / (2.0 * math.pi ** 2)
    return QuadratureGrid(pts, w, {"kind": "su2", "resolution": int(resolution)})


def group_grid(spec, resolution, bounds=None, seed=0):
    """Grid over the whole compact group or a coordinate box of a noncompact one."""
    if spec.family == "torus":
        g = box_grid([(0.0, 1.0)] * spec.n, resolution)
        return QuadratureGrid(g.points, g.weights, {"kind": "torus", "n": spec.n}, 0.0, g.axes)
    if spec.family == "su2":
        return su2_grid(resolution)
    if bounds is None:
        bounds = [(-1.0, 1.0)] * spec.coord_dim
    if spec.coord_dim <= 3:
        return box_grid(bounds, resolution)
    rng = np.random.default_rng(seed)
    pts, w = _jittered_box(bounds, int(resolution) ** 3, rng)
    return QuadratureGrid(pts, w, {"kind": "box", "bounds": bounds, "rule": "jittered"})


def _cap_cells(r, resolution):
    R = min(r, math.pi)
    m_t, m_z, m_a = int(resolution), int(resolution), 2 * int(resolution)
    t_edges = np.linspace(0.0, R, m_t + 1)
    theta = 0.5 * (t_edges[1:] + t_edges[:-1])
    anti = 0.5 * t_edges - 0.25 * np.sin(2.0 * t_edges)
    w_t = np.diff(anti)
    z = -1.0 + (2.0 / m_z) * (np.arange(m_z) + 0.5)
    alpha = (2.0 * math.pi / m_a) * (np.arange(m_a) + 0.5)
    T, Z, A = np.meshgrid(theta, z, alpha, indexing="ij")
    Wt = np.meshgrid(w_t, z, alpha, indexing="ij")[0]
    rxy = np.sqrt(1.0 - Z ** 2)
    axis = np.stack([rxy * np.cos(A), rxy * np.sin(A), Z], axis=-1)
    pts = np.concatenate([np.cos(T)[..., None], np.sin(T)[..., None] * axis], axis=-1).reshape(-1, 4)
    w = Wt.ravel() * (2.0 / m_z) * (2.0 * math.pi / m_a) / (2.0 * math.pi ** 2)
    return pts, w


def ball_grid(spec, ball, resolution=16, seed=0):
    """Cells covering ``ball``; every representative point lies inside it."""
    x0, r = ball.center, ball.radius
    fam = spec.family
    dom = {"kind": "ball", "center": [float(v) for v in np.ravel(x0)], "radius": r}
    if fam in ("euclidean", "torus"):
        half = min(r, 0.5) if fam == "torus" else r
        g = box_grid([(-half, half)] * spec.n, resolution)
        pts = x0 + g.points
        if fam == "torus":
            pts = reduce_torus(pts)
        return QuadratureGrid(pts, g.weights, dom)
    if fam == "su2":
        local, w = _cap_cells(r, resolution)
        return QuadratureGrid(quat_multiply(x0, local), w, dom)
    c = calibrate_gauge(spec)
    bounds = [(-h, h) for h in _gauge_box(spec, r / c)]
    e = spec.identity()
    if spec.coord_dim <= 3:
        g = box_grid(bounds, resolution)
        local, w = g.points, g.weights
    else:
        local, w = _jittered_box(bounds, int(resolution) ** 3, np.random.default_rng(seed))
    inside = distance(local, e, spec) < r
    local, w = local[inside], w[inside]
    err = abs(float(np.sum(w)) - ball_measure(ball, spec))
    return QuadratureGrid(multiply(x0, local, spec), w, dom, err)
