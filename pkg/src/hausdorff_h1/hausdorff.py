"""Hausdorff operators  (H f)(x) = ∫_Ω Φ(u) f(A(u)(x)) dμ(u)  by quadrature.

The parameter space Ω is either a compact coordinate box (any group) or the
compact group itself (torus or SU(2)), in which case the kernel grid carries
normalised Haar weights.  All norms and bounds use the same grid as the
operator, so identities between them hold to rounding.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import homspace as hs
from .automorphisms import AutomorphismFamily, AutomorphismSpec
from .errors import AtomValidationError, InvalidInputError
from .expr import coordinate_function
from .hardy import (AtomicRepresentation, GridFunction, HomogeneityConstants,
                    pushforward_atom, validate_atom)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Kernel Φ given by an expression over Ω with a quadrature grid.

    ``support`` is a list of (lo, hi) pairs, or a GroupSpec when Ω is a
    compact group.  Φ is taken to vanish outside the support.
    """

    expression: str
    support: object
    grid: hs.QuadratureGrid
    resolution: int
    rule: str = "gauss"
    fn: object = None

    @classmethod
    def from_expression(cls, expression, support, resolution=32, rule="gauss"):
        bounds = [tuple(map(float, b)) for b in support]
        grid = hs.box_grid(bounds, resolution, rule)
        fn = coordinate_function(expression, len(bounds), "u")
        return cls(str(expression), bounds, grid, int(resolution), rule, fn)

    @classmethod
    def on_group(cls, expression, spec, resolution=64):
        """Ω = the compact group ``spec`` with normalised Haar measure."""
        if not spec.is_compact:
            raise InvalidInputError(f"{spec.label} is not compact; give a support box")
        grid = hs.group_grid(spec, resolution)
        fn = coordinate_function(expression, spec.coord_dim, "u")
        return cls(str(expression), spec, grid, int(resolution), "midpoint", fn)

    @property
    def param_dim(self):
        return self.grid.points.shape[1]

    @property
    def on_group_domain(self):
        return isinstance(self.support, hs.GroupSpec)

    def values(self):
        # non-finite values are reported below, so silence numpy's own warning
        with np.errstate(divide="ignore", invalid="ignore"):
            v = self.fn(self.grid.points)
        if not np.all(np.isfinite(v)):
            raise InvalidInputError(f"kernel {self.expression!r} is not finite on its grid")
        return v

    def refined(self, factor=2):
        if self.on_group_domain:
            return Kernel.on_group(self.expression, self.support, self.resolution * factor)
        return Kernel.from_expression(self.expression, self.support, self.resolution * factor, self.rule)

    def l1_norm(self):
        return float(np.dot(np.abs(self.values()), self.grid.weights))

    def integral(self):
        return float(np.dot(self.values(), self.grid.weights))

    def check_integrable(self, rtol=1e-2):
        """Refinement ratio test on ∫|Φ|; returns the relative change."""
        coarse, fine = self.l1_norm(), self.refined().l1_norm()
        change = abs(fine - coarse) / max(abs(fine), 1e-300)
        if fine > 0 and change > rtol:
            raise InvalidInputError(
                f"kernel {self.expression!r}: ∫|Φ| changes by {change:.2e} under refinement")
        return change

    def describe(self):
        sup = self.support.to_dict() if self.on_group_domain else [list(b) for b in self.support]
        return {"expr": self.expression, "support": sup, "resolution": self.resolution, "rule": self.rule}


# ----------------------------------------------------------------------------
# test functions
# ----------------------------------------------------------------------------


def multilinear(grid, values, periodic=False):
    """Multilinear interpolant of values on a regular grid (zero outside)."""
    if grid.axes is None:
        raise InvalidInputError("multilinear interpolation needs a tensor grid")
    axes = [np.asarray(a, float) for a in grid.axes]
    vals = np.asarray(values, float).reshape([a.size for a in axes])
    if periodic:
        # wrap one cell on each side so that interpolation sees the circle
        axes = [np.concatenate([[a[-1] - 1.0], a, [a[0] + 1.0]]) for a in axes]
        vals = np.pad(vals, 1, mode="wrap")
    interp = RegularGridInterpolator(axes, vals, bounds_error=False, fill_value=0.0)

    def f(x):
        x = np.atleast_2d(np.asarray(x, float))
        return interp(hs.reduce_torus(x) if periodic else x)
    return f


def as_callable(f):
    """Accept a callable on (N, d) arrays or a GridFunction (nearest cell)."""
    if isinstance(f, GridFunction):
        return f.nearest
    if callable(f):
        return f
    raise InvalidInputError(f"cannot evaluate {type(f).__name__} as a function")


# ----------------------------------------------------------------------------
# operator
# ----------------------------------------------------------------------------


def _automorphisms(kernel, family):
    if kernel.on_group_domain and family.group is None:
        raise InvalidInputError("family has no group")
    return family.at(kernel.grid.points)


def evaluate_operator(kernel, family, f, x):
    """Σ_i Φ(u_i) w_i f(A(u_i) x), vectorised over the rows of ``x``."""
    spec = family.group
    x = np.atleast_2d(np.asarray(x, float))
    hs.check_points(x, spec)
    fx = as_callable(f)
    phi = kernel.values() * kernel.grid.weights
    out = np.zeros(x.shape[0])
    # fixed summation order over kernel cells keeps results bit-stable
    for c, A in zip(phi, _automorphisms(kernel, family)):
        if c == 0.0:
            continue
        vals = np.asarray(fx(A.apply(x)), float)
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("f is undefined at some point A(u)(x)")
        out += c * vals
    return out


@dataclass
class Refinement:
    value: np.ndarray
    refined: np.ndarray
    rel_change: float


def operator_refinement(kernel, family, f, x):
    """Evaluate at the kernel resolution and at twice it; report the change."""
    v = evaluate_operator(kernel, family, f, x)
    w = evaluate_operator(kernel.refined(), family, f, x)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    return Refinement(v, w, float(np.max(np.abs(v - w))) / scale)


def norm_L_A(kernel, family):
    """∫ |Φ(u)| mod(A(u)^-1) dμ(u)."""
    phi = np.abs(kernel.values()) * kernel.grid.weights
    mods = np.array([1.0 / A.modulus() for A in _automorphisms(kernel, family)])
    return float(np.dot(phi, mods))


def norm_L1_ks(kernel, family, s=None):
    """∫ |Φ(u)| k(u)^s dμ(u) with k(u) = k_constant(A(u))."""
    s = family.group.s if s is None else s
    phi = np.abs(kernel.values()) * kernel.grid.weights
    ks = np.array([A.k_constant() for A in _automorphisms(kernel, family)])
    return float(np.dot(phi, ks ** s))


@dataclass
class BoundReport:
    norm_L_A: float
    norm_L1_ks: float
    theorem1_bound: float
    addendum_bound: float = None
    constants: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "norm_L_A": self.norm_L_A,
            "norm_L1_ks": self.norm_L1_ks,
            "theorem1_bound": self.theorem1_bound,
            "addendum_bound": self.addendum_bound,
            "constants": dict(self.constants),
        }


def theorem1_bound(kernel, family, consts=None, kappa_rho=None):
    """Operator-norm bound C_μ (b/a)^s ‖Φ‖_{L¹_{k^s}} on H¹."""
    consts = consts or HomogeneityConstants.of(family.group)
    nk = norm_L1_ks(kernel, family, consts.s)
    bound = consts.c_mu * (consts.b / consts.a) ** consts.s * nk
    add = None if kappa_rho is None else addendum_bound(kernel, family, kappa_rho, consts)
    c = {"C_mu": consts.c_mu, "a": consts.a, "b": consts.b, "s": consts.s, "kappa_rho": kappa_rho}
    return BoundReport(norm_L_A(kernel, family), nk, bound, add, c)


def addendum_bound(kernel, family, kappa_rho, consts=None):
    """C_μ ∫ |Φ(u)| (κ_ρ / mod(A(u)))^s dμ(u)."""
    if kappa_rho is None:
        raise InvalidInputError("the refined bound needs a value for kappa_rho")
    kappa_rho = float(kappa_rho)
    if not kappa_rho > 0:
        raise InvalidInputError(f"kappa_rho must be positive, got {kappa_rho}")
    consts = consts or HomogeneityConstants.of(family.group)
    phi = np.abs(kernel.values()) * kernel.grid.weights
    mods = np.array([A.modulus() for A in _automorphisms(kernel, family)])
    return float(consts.c_mu * np.dot(phi, (kappa_rho / mods) ** consts.s))


# ----------------------------------------------------------------------------
# L¹ boundedness check
# ----------------------------------------------------------------------------


@dataclass
class Lemma1Report:
    lhs: float
    rhs: float
    norm_L_A: float
    f_l1: float
    captured: float
    truncation: float
    nonnegative: bool
    passed: bool
    equality: object = None
    tol: float = 1e-2

    def to_dict(self):
        return dict(self.__dict__)


def covering_box(kernel, family, bounds, pad=0.0):
    """Coordinate box containing A(u)^-1(box) for every kernel node u.

    Works for coordinate-linear automorphisms; the result is where f∘A(u)
    can be nonzero when f is supported in ``bounds``.
    """
    bounds = np.asarray(bounds, float)
    d = bounds.shape[0]
    corners = np.stack(np.meshgrid(*bounds, indexing="ij"), axis=-1).reshape(-1, d)
    lo, hi = np.full(d, np.inf), np.full(d, -np.inf)
    phi = kernel.values()
    for c, A in zip(phi, _automorphisms(kernel, family)):
        if c == 0.0:
            continue
        img = corners @ np.linalg.inv(A.linear_map()).T
        lo, hi = np.minimum(lo, img.min(axis=0)), np.maximum(hi, img.max(axis=0))
    width = hi - lo
    return [(float(a - pad * w), float(b + pad * w)) for a, b, w in zip(lo, hi, width)]


def check_lemma1(kernel, family, f, x_grid, f_l1=None, tol=1e-2):
    """Compare ‖H f‖₁ (on ``x_grid``) with ‖Φ‖_{L_A} ‖f‖₁.

    ``captured`` is Σ_u |Φ| w ∫_{x_grid} |f(A(u)x)| dx, the right-hand side
    restricted to the truncated domain; ``truncation = rhs - captured``
    estimates what the grid misses.  For Φ, f ≥ 0 the two sides agree
    (Fubini) and ``equality`` records whether they do within ``tol``.
    """
    fx = as_callable(f)
    if f_l1 is None:
        if not isinstance(f, GridFunction):
            raise InvalidInputError("pass f_l1 for a closed-form f")
        f_l1 = f.l1_norm()
    phi = kernel.values()
    pw = phi * kernel.grid.weights
    Hf = np.zeros(x_grid.size)
    captured = 0.0
    f_nonneg = True
    for c, A in zip(pw, _automorphisms(kernel, family)):
        if c == 0.0:
            continue
        vals = np.asarray(fx(A.apply(x_grid.points)), float)
        f_nonneg = f_nonneg and bool(np.all(vals >= 0.0))
        Hf += c * vals
        captured += abs(c) * float(np.dot(np.abs(vals), x_grid.weights))
    lhs = float(np.dot(np.abs(Hf), x_grid.weights))
    nla = norm_L_A(kernel, family)
    rhs = nla * float(f_l1)
    nonneg = bool(np.all(phi >= 0.0)) and f_nonneg
    passed = lhs <= rhs * (1.0 + tol) + 1e-300
    equality = None
    if nonneg:
        equality = abs(lhs - rhs) <= tol * max(rhs, 1e-300)
    return Lemma1Report(lhs, rhs, nla, float(f_l1), captured, rhs - captured, nonneg, bool(passed),
                        equality, tol)


# ----------------------------------------------------------------------------
# atomic image
# ----------------------------------------------------------------------------


@dataclass
class ImageCheck:
    lambda_sum: float
    bound: float
    all_valid: bool
    n_terms: int
    reconstruction_error: float
    tol: float

    @property
    def passed(self):
        return self.all_valid and self.lambda_sum <= self.bound * (1.0 + self.tol)


def atomic_image_decomposition(kernel, family, a0, consts=None, tol=1e-2, atom_tol=1e-6, probe=None):
    """Write the quadrature of H a0 as Σ λ_i a'_i with a'_i pushed-forward atoms.

    λ_i = Φ(u_i) w_i · C_μ (b k(u_i)/a)^s.  ``probe`` points (default: the
    atom's own cells) are used to check Σ λ_i a'_i against H a0 evaluated
    directly.
    """
    consts = consts or HomogeneityConstants.of(family.group)
    rep = validate_atom(a0, atom_tol)
    if not rep.passed:
        raise AtomValidationError("input atom is invalid", rep)
    pw = kernel.values() * kernel.grid.weights
    out = AtomicRepresentation()
    all_valid = True
    for c, A in zip(pw, _automorphisms(kernel, family)):
        if c == 0.0:
            continue
        scale, ap = pushforward_atom(a0, A, consts, atom_tol)
        all_valid = all_valid and validate_atom(ap, atom_tol).passed
        out.terms.append((float(c * scale), ap))
    lam = float(sum(abs(l) for l, _ in out.terms))
    bound = theorem1_bound(kernel, family, consts).theorem1_bound
    if probe is None:
        probe = a0.fn.points[:: max(1, a0.fn.points.shape[0] // 64)]
    direct = evaluate_operator(kernel, family, a0, probe)
    err = float(np.max(np.abs(out(probe) - direct))) if len(out) else float(np.max(np.abs(direct)))
    return out, ImageCheck(lam, bound, all_valid, len(out), err, tol)


# ----------------------------------------------------------------------------
# special forms
# ----------------------------------------------------------------------------


@dataclass
class TorusForm:
    values: np.ndarray
    ab: tuple = None
    cross_check: float = None


def special_form_torus(kernel, family, f, x):
    """Operator on T^n with integer-matrix automorphisms.

    For n = 1 every automorphism is I or J = (-1), so H = aI + bJ; the pair
    (a, b) is returned together with the largest difference between the
    quadrature and a f(x) + b f(-x).
    """
    spec = family.group
    if spec.family != "torus":
        raise InvalidInputError("special_form_torus needs a torus family")
    vals = evaluate_operator(kernel, family, f, x)
    if spec.n != 1:
        return TorusForm(vals)
    pw = kernel.values() * kernel.grid.weights
    a = b = 0.0
    for c, A in zip(pw, _automorphisms(kernel, family)):
        if A.matrix[0, 0] > 0:
            a += c
        else:
            b += c
    fx = as_callable(f)
    x = np.atleast_2d(np.asarray(x, float))
    alt = a * fx(x) + b * fx(hs.reduce_torus(-x))
    return TorusForm(vals, (float(a), float(b)), float(np.max(np.abs(vals - alt))))


def special_form_su2(kernel, family, f, x):
    """Operator on SU(2) with a family of inner automorphisms x -> b(u) x b(u)^-1."""
    if family.group.family != "su2":
        raise InvalidInputError("special_form_su2 needs an SU(2) family")
    return evaluate_operator(kernel, family, f, x)


def special_form_heisenberg_symplectic(kernel, family, f, x):
    """Operator on H_1 with automorphisms (z, t) -> (S(u) z, t), S(u) in SL(2, R)."""
    spec = family.group
    if spec.family != "heisenberg" or spec.n != 1:
        raise InvalidInputError("symplectic special form is implemented for H_1")
    for A in _automorphisms(kernel, family):
        if A.kind != "symplectic":
            raise InvalidInputError("family must consist of symplectic automorphisms")
    return evaluate_operator(kernel, family, f, x)


def identity_family(spec):
    return AutomorphismFamily.constant(AutomorphismSpec.identity(spec))
