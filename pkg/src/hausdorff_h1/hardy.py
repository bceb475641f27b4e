"""(1, inf)-atoms on grids, their pushforward under automorphisms, and
finite atomic representations giving upper bounds for the H^1 norm.

Atoms are piecewise constant on the cells of a :class:`QuadratureGrid`
restricted to their ball.  Composing with an automorphism A moves every cell
through A^-1 and multiplies its Haar weight by mod(A^-1), which is the exact
change of variables; no re-gridding is involved.
"""
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import homspace as hs
from .errors import AtomValidationError, InvalidInputError, RepresentationError


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Piecewise-constant function: ``values[i]`` on the cell around ``points[i]``."""

    group: hs.GroupSpec
    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, float))
        w = np.asarray(self.weights, float).ravel()
        v = np.asarray(self.values, float).ravel()
        if pts.shape[0] != w.size or w.size != v.size:
            raise InvalidInputError("points, weights and values must have matching lengths")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", v)

    @classmethod
    def on_grid(cls, group, grid, values):
        return cls(group, grid.points, grid.weights, values)

    def integral(self):
        return float(np.dot(self.values, self.weights))

    def l1_norm(self):
        return float(np.dot(np.abs(self.values), self.weights))

    def sup_norm(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def scaled(self, factor):
        return GridFunction(self.group, self.points, self.weights, self.values * factor)

    def _tree(self):
        tree = self.__dict__.get("_kdtree")
        if tree is None:
            if self.group.family == "torus":
                tree = cKDTree(np.mod(self.points, 1.0), boxsize=1.0)
            else:
                tree = cKDTree(self.points)
            self.__dict__["_kdtree"] = tree
        return tree

    def nearest(self, x):
        """Value of the cell whose representative is nearest to x (coordinate metric)."""
        x = np.atleast_2d(np.asarray(x, float))
        if self.group.family == "torus":
            x = hs.reduce_torus(x)
        _, idx = self._tree().query(x)
        return self.values[idx]


@dataclass(frozen=True, eq=False)
class Atom:
    """Function supported in ``ball`` with declared sup bound ``sup_bound``.

    ``evaluator`` optionally gives exact pointwise values; otherwise points
    inside the ball take the value of the nearest cell and points outside
    take 0.
    """

    ball: hs.Ball
    fn: GridFunction
    sup_bound: float
    evaluator: object = None
    meta: dict = field(default_factory=dict)

    @property
    def group(self):
        return self.fn.group

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        if self.evaluator is not None:
            return np.asarray(self.evaluator(x), float)
        inside = hs.distance(x, self.ball.center, self.group) < self.ball.radius
        out = np.zeros(x.shape[0])
        if inside.any():
            out[inside] = self.fn.nearest(x[inside])
        return out

    def scaled(self, factor):
        ev = None if self.evaluator is None else (lambda x, e=self.evaluator: factor * e(x))
        return Atom(self.ball, self.fn.scaled(factor), abs(factor) * self.sup_bound, ev, dict(self.meta))

    def to_dict(self):
        return {
            "group": self.group.to_dict(),
            "center": self.ball.center.tolist(),
            "radius": self.ball.radius,
            "points": self.fn.points.tolist(),
            "weights": self.fn.weights.tolist(),
            "values": self.fn.values.tolist(),
            "sup_bound": self.sup_bound,
        }

    @classmethod
    def from_dict(cls, d):
        group = hs.GroupSpec.from_dict(d["group"])
        fn = GridFunction(group, np.array(d["points"], float), d["weights"], d["values"])
        return cls(hs.Ball(np.array(d["center"], float), d["radius"]), fn, float(d["sup_bound"]))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass
class AtomReport:
    support_residual: float
    sup_residual: float
    cancellation_residual: float
    passed_support: bool
    passed_sup: bool
    passed_cancellation: bool

    @property
    def passed(self):
        return self.passed_support and self.passed_sup and self.passed_cancellation


def validate_atom(a, tol=1e-6):
    """Check (i) support in the ball, (ii) ||a||_inf <= 1/mu(B), (iii) ∫a = 0.

    Residuals: (i) largest excess distance of a nonzero cell beyond the
    radius, (ii) ``||a||_inf - 1/mu(B)``, (iii) ``|∫a dmu|``.  Condition (ii)
    allows a relative slack ``tol``; (iii) is judged against
    ``tol * ||a||_inf * mu(B)``.
    """
    fn = a.fn
    if fn.values.size == 0:
        raise AtomValidationError("atom has an empty grid")
    if np.any(fn.weights < 0):
        raise AtomValidationError("negative cell weights")
    spec = a.group
    mu = hs.ball_measure(a.ball, spec)
    live = fn.values != 0.0
    if live.any():
        d = hs.distance(fn.points[live], a.ball.center, spec)
        support_res = float(max(0.0, np.max(d) - a.ball.radius))
        inside = bool(np.all(d < a.ball.radius * (1.0 + 1e-9)))
    else:
        support_res, inside = 0.0, True
    sup = max(fn.sup_norm(), a.sup_bound)
    sup_res = sup - 1.0 / mu
    integral = abs(fn.integral())
    return AtomReport(
        support_residual=support_res,
        sup_residual=float(sup_res),
        cancellation_residual=integral,
        passed_support=inside,
        passed_sup=bool(sup <= (1.0 + tol) / mu),
        passed_cancellation=bool(integral <= tol * sup * mu),
    )


def make_atom(group, ball, grid, values, evaluator=None):
    fn = GridFunction.on_grid(group, grid, values)
    return Atom(ball, fn, fn.sup_norm(), evaluator)


def make_random_atom(spec, ball, seed=0, resolution=16):
    """Random mean-zero cell values scaled so that ||a||_inf = 1/mu(B)."""
    if spec.family == "torus" and ball.radius > 0.5:
        raise InvalidInputError("torus atoms need radius <= 1/2")
    grid = hs.ball_grid(spec, ball, resolution, seed)
    if grid.size == 0:
        raise InvalidInputError("ball grid is empty")
    rng = np.random.default_rng(seed)
    v = rng.uniform(-1.0, 1.0, grid.size)
    v -= np.dot(v, grid.weights) / grid.total
    v *= (1.0 / hs.ball_measure(ball, spec)) / np.max(np.abs(v))
    return make_atom(spec, ball, grid, v)


@dataclass(frozen=True)
class HomogeneityConstants:
    """Doubling constant, metric comparison constants a <= b and exponent s."""

    c_mu: float
    s: float
    a: float = 1.0
    b: float = 1.0

    @classmethod
    def of(cls, spec, c_mu_scale=1.0):
        return cls(spec.doubling_constant * c_mu_scale, spec.s)

    def atom_scale(self, k):
        """C_mu (b k / a)^s."""
        return self.c_mu * (self.b * k / self.a) ** self.s


def pushforward_atom(a, A, consts, tol=1e-6, k=None):
    """Return (lambda_scale, a') with a∘A = lambda_scale · a'.

    ``lambda_scale = C_mu (b k / a)^s`` with k = k(A), and a' is supported in
    B(A^-1(x), k r).  Both the input atom and the output are validated.
    """
    if a.group != A.group:
        raise InvalidInputError("atom and automorphism live on different groups")
    rep = validate_atom(a, tol)
    if not rep.passed:
        raise AtomValidationError("input atom is invalid", rep)
    k = A.k_constant() if k is None else k
    scale = consts.atom_scale(k)
    Ainv = A.inverse()
    fn = GridFunction(a.group, Ainv.apply(a.fn.points), a.fn.weights * Ainv.modulus(),
                      a.fn.values / scale)
    ball = hs.Ball(Ainv.apply(a.ball.center), k * a.ball.radius)

    def evaluate(x, src=a, A=A, scale=scale):
        return src(A.apply(x)) / scale

    out = Atom(ball, fn, a.sup_bound / scale, evaluate, {"k": k, "lambda_scale": scale})
    rep = validate_atom(out, tol)
    if not rep.passed:
        raise AtomValidationError(f"pushforward atom is invalid: {rep}", rep)
    return scale, out


@dataclass
class AtomicRepresentation:
    terms: list = field(default_factory=list)

    def __len__(self):
        return len(self.terms)

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        out = np.zeros(x.shape[0])
        for lam, atom in self.terms:
            out += lam * atom(x)
        return out


@dataclass
class H1UpperBound:
    value: float


def h1_upper_bound(rep):
    """sum |lambda_j| of a concrete representation."""
    return H1UpperBound(float(sum(abs(lam) for lam, _ in rep.terms)))


def represent(f, balls, tol=1e-8):
    """Split a grid function into atoms supported on the given disjoint balls.

    Each cell goes to the first ball containing its representative.  Every
    piece must have zero integral; it becomes ``lambda_j a_j`` with
    ``lambda_j = ||piece||_inf mu(B_j)``.  Cells outside all balls must carry
    zero mass, otherwise :class:`RepresentationError` reports the residual.
    """
    spec = f.group
    owner = np.full(f.values.size, -1)
    for j, ball in enumerate(balls):
        free = owner < 0
        if not free.any():
            break
        idx = np.nonzero(free)[0]
        inside = hs.distance(f.points[idx], ball.center, spec) < ball.radius
        owner[idx[inside]] = j
    scale = max(f.l1_norm(), 1e-300)
    stray = float(np.dot(np.abs(f.values[owner < 0]), f.weights[owner < 0]))
    if stray > tol * scale:
        raise RepresentationError(f"mass {stray:.3e} lies outside the proposed balls", stray)
    rep = AtomicRepresentation()
    for j, ball in enumerate(balls):
        sel = owner == j
        vals = f.values[sel]
        if not sel.any() or not np.any(vals != 0.0):
            continue
        sup = float(np.max(np.abs(vals)))
        mu = hs.ball_measure(ball, spec)
        mean = abs(float(np.dot(vals, f.weights[sel])))
        if mean > tol * sup * mu:
            raise RepresentationError(f"piece on ball {j} has nonzero integral {mean:.3e}", mean)
        lam = sup * mu
        piece = GridFunction(spec, f.points[sel], f.weights[sel], vals / lam)
        rep.terms.append((lam, Atom(ball, piece, piece.sup_norm())))
    return rep
