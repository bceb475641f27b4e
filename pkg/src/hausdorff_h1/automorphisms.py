"""Automorphisms of the supported groups and condition-(*) diagnostics.

An :class:`AutomorphismSpec` is one automorphism A: linear maps of R^n,
unimodular integer matrices on T^n, inner automorphisms of SU(2), dilations
of H_n and T_1(n, R), and symplectic maps of H_n.  Each knows how to apply
itself, its inverse, its modulus (Haar scaling factor) and a constant k such
that ``A^-1(B(x, r))`` lies in ``B(A^-1(x), k r)``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import homspace as hs
from .expr import coordinate_function
from .errors import ConfigError, InvalidInputError

KINDS = ("matrix", "inner", "dilation", "symplectic")


def symplectic_form(n):
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


@dataclass(frozen=True, eq=False)
class AutomorphismSpec:
    """A single automorphism of ``group``.

    ``kind`` is ``"matrix"`` (R^n, and T^n with an integer matrix),
    ``"inner"`` (SU(2), x -> q x q^-1), ``"dilation"`` (H_n, T_1(n, R)) or
    ``"symplectic"`` (H_n, acting on (v, w) with t fixed).
    """

    group: hs.GroupSpec
    kind: str
    matrix: np.ndarray = None
    quaternion: np.ndarray = None
    lam: float = None

    def __post_init__(self):
        fam = self.group.family
        allowed = {
            "euclidean": ("matrix",),
            "torus": ("matrix",),
            "su2": ("inner",),
            "heisenberg": ("dilation", "symplectic"),
            "upper_triangular": ("dilation",),
        }[fam]
        if self.kind not in allowed:
            raise InvalidInputError(f"{self.kind!r} automorphisms are not available on {self.group.label}")
        if self.kind == "matrix":
            M = np.array(self.matrix, dtype=float)
            n = self.group.n
            if M.shape != (n, n):
                raise InvalidInputError(f"matrix must be {n}x{n}, got {M.shape}")
            det = np.linalg.det(M)
            if fam == "torus":
                if not np.allclose(M, np.round(M), atol=1e-9):
                    raise InvalidInputError("torus automorphisms need integer matrices")
                M = np.round(M)
                if abs(abs(round(det)) - 1) > 0 or abs(abs(det) - 1.0) > 1e-9:
                    raise InvalidInputError(f"torus automorphism needs det = ±1, got {det}")
            elif not abs(det) > 0:
                raise InvalidInputError("singular matrix")
            object.__setattr__(self, "matrix", M)
        elif self.kind == "inner":
            q = np.array(self.quaternion, dtype=float)
            if q.shape != (4,) or not np.linalg.norm(q) > 0:
                raise InvalidInputError("inner automorphism needs a nonzero quaternion")
            if abs(np.linalg.norm(q) - 1.0) > 1e-12:
                raise InvalidInputError("conjugator must be a unit quaternion")
            object.__setattr__(self, "quaternion", q)
        elif self.kind == "dilation":
            if not (self.lam is not None and np.isfinite(self.lam) and self.lam > 0):
                raise InvalidInputError(f"dilation parameter must be positive, got {self.lam}")
            object.__setattr__(self, "lam", float(self.lam))
        else:
            S = np.array(self.matrix, dtype=float)
            n = self.group.n
            if S.shape != (2 * n, 2 * n):
                raise InvalidInputError(f"symplectic matrix must be {2 * n}x{2 * n}")
            J = symplectic_form(n)
            if np.max(np.abs(S.T @ J @ S - J)) > 1e-10:
                raise InvalidInputError("matrix is not symplectic (S^T J S != J)")
            object.__setattr__(self, "matrix", S)

    # constructors ---------------------------------------------------------

    @classmethod
    def identity(cls, group):
        fam = group.family
        if fam in ("euclidean", "torus"):
            return cls(group, "matrix", matrix=np.eye(group.n))
        if fam == "su2":
            return cls(group, "inner", quaternion=np.array([1.0, 0, 0, 0]))
        return cls(group, "dilation", lam=1.0)

    @classmethod
    def linear(cls, group, M):
        return cls(group, "matrix", matrix=M)

    @classmethod
    def dilation(cls, group, lam):
        return cls(group, "dilation", lam=lam)

    @classmethod
    def inner(cls, q):
        q = np.asarray(q, float)
        return cls(hs.GroupSpec("su2"), "inner", quaternion=q / np.linalg.norm(q))

    @classmethod
    def symplectic(cls, group, S):
        return cls(group, "symplectic", matrix=S)

    # action ---------------------------------------------------------------

    def apply(self, g):
        hs.check_points(g, self.group)
        g = np.asarray(g, float)
        fam = self.group.family
        if fam == "euclidean":
            return g @ self.matrix.T
        if fam == "torus":
            # z_j -> prod_i z_i^{m_ij}, i.e. x -> M^T x in additive coordinates
            return hs.reduce_torus(g @ self.matrix)
        if fam == "su2":
            q = self.quaternion
            return hs.quat_multiply(hs.quat_multiply(q, g), hs.quat_conjugate(q))
        if self.kind == "symplectic":
            n = self.group.n
            z = g[..., :2 * n] @ self.matrix.T
            return np.concatenate([z, g[..., 2 * n:]], axis=-1)
        return g * self.scales()

    def scales(self):
        """Coordinate-wise dilation factors."""
        lam = self.lam
        if self.group.family == "heisenberg":
            n = self.group.n
            return np.array([lam] * (2 * n) + [lam * lam])
        I, J = hs.ut_pairs(self.group.n)
        return lam ** (J - I).astype(float)

    def inverse(self):
        if self.kind == "matrix":
            inv = np.linalg.inv(self.matrix)
            if self.group.family == "torus":
                inv = np.round(inv)
            return AutomorphismSpec(self.group, "matrix", matrix=inv)
        if self.kind == "inner":
            return AutomorphismSpec(self.group, "inner", quaternion=hs.quat_conjugate(self.quaternion))
        if self.kind == "dilation":
            return AutomorphismSpec(self.group, "dilation", lam=1.0 / self.lam)
        return AutomorphismSpec(self.group, "symplectic", matrix=np.linalg.inv(self.matrix))

    def linear_map(self):
        """Matrix of A acting on coordinate row vectors as x -> L x (not SU(2))."""
        if self.group.family == "euclidean":
            return self.matrix
        if self.group.family == "torus":
            return self.matrix.T
        if self.kind == "dilation":
            return np.diag(self.scales())
        if self.kind == "symplectic":
            n = self.group.n
            L = np.eye(2 * n + 1)
            L[:2 * n, :2 * n] = self.matrix
            return L
        raise InvalidInputError("inner automorphisms are not coordinate-linear")

    def modulus(self):
        """mod(A): mu(A(E)) = mod(A) mu(E)."""
        fam = self.group.family
        if fam == "euclidean":
            return float(abs(np.linalg.det(self.matrix)))
        if self.kind == "dilation":
            return self.lam ** self.group.homogeneous_dimension
        return 1.0

    def k_constant(self):
        """Radius factor k with A^-1(B(x, r)) ⊆ B(A^-1(x), k r)."""
        fam = self.group.family
        if fam in ("euclidean", "torus"):
            inv = np.linalg.inv(self.linear_map())
            return float(np.max(np.sum(np.abs(inv), axis=1)))
        if fam == "su2":
            return 1.0
        if self.kind == "dilation":
            return 1.0 / self.lam
        # Koranyi gauge: |(S^-1 z, t)|^4 = |S^-1 z|^4 + t^2 <= ||S^-1||^4 (|z|^4 + t^2)
        return max(1.0, float(np.linalg.norm(np.linalg.inv(self.matrix), 2)))

    def describe(self):
        d = {"group": self.group.to_dict(), "kind": self.kind}
        if self.matrix is not None:
            d["matrix"] = self.matrix.tolist()
        if self.quaternion is not None:
            d["quaternion"] = self.quaternion.tolist()
        if self.lam is not None:
            d["lambda"] = self.lam
        return d


# ----------------------------------------------------------------------------
# families u -> A(u)
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AutomorphismFamily:
    """A measurable map u -> A(u) given by closed-form expressions in u.

    ``build`` takes parameter points of shape (N, d) and returns a list of N
    automorphisms of ``group``.
    """

    group: hs.GroupSpec
    build: object
    descriptor: dict = field(default_factory=dict)

    def at(self, U):
        U = np.asarray(U, float)
        if U.ndim == 1:
            U = U[:, None]
        return self.build(U)

    @classmethod
    def constant(cls, A):
        return cls(A.group, lambda U: [A] * U.shape[0], {"kind": "constant"})

    @classmethod
    def from_descriptor(cls, group, desc, param_dim):
        """Build a family from a JSON descriptor.

        Kinds: ``identity``; ``dilation`` with ``lambda``; ``matrix`` and
        ``symplectic`` with ``matrix`` (rows of expressions); ``inner`` with
        ``quaternion`` (four expressions, normalised).  Expressions use the
        variables u1..ud (or u when d = 1).
        """
        if not isinstance(desc, dict) or "kind" not in desc:
            raise ConfigError(f"family descriptor needs a 'kind': {desc!r}")
        kind = desc["kind"]
        expected = {
            "identity": set(),
            "dilation": {"lambda"},
            "matrix": {"matrix"},
            "symplectic": {"matrix"},
            "inner": {"quaternion"},
        }
        if kind not in expected:
            raise ConfigError(f"unknown family kind {kind!r}")
        extra = set(desc) - expected[kind] - {"kind", "id"}
        missing = expected[kind] - set(desc)
        if extra or missing:
            raise ConfigError(f"family {kind!r}: unknown keys {sorted(extra)}, missing {sorted(missing)}")

        def fn(text):
            return coordinate_function(text, param_dim, "u")

        if kind == "identity":
            A = AutomorphismSpec.identity(group)
            return cls(group, lambda U: [A] * U.shape[0], desc)
        if kind == "dilation":
            lam = fn(desc["lambda"])
            return cls(group, lambda U: [AutomorphismSpec(group, "dilation", lam=v) for v in lam(U)], desc)
        if kind in ("matrix", "symplectic"):
            rows = desc["matrix"]
            if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
                raise ConfigError("matrix must be a list of rows")
            entries = [[fn(e) for e in row] for row in rows]

            def build(U):
                M = np.stack([np.stack([e(U) for e in row], axis=-1) for row in entries], axis=-2)
                return [AutomorphismSpec(group, kind if kind == "symplectic" else "matrix", matrix=m) for m in M]
            return cls(group, build, desc)
        comps = [fn(e) for e in desc["quaternion"]]
        if len(comps) != 4:
            raise ConfigError("quaternion needs four components")

        def build_inner(U):
            Q = np.stack([c(U) for c in comps], axis=-1)
            Q = Q / np.linalg.norm(Q, axis=1, keepdims=True)
            return [AutomorphismSpec(group, "inner", quaternion=q) for q in Q]
        return cls(group, build_inner, desc)


# ----------------------------------------------------------------------------
# Monte Carlo diagnostics
# ----------------------------------------------------------------------------


@dataclass
class ModulusEstimate:
    value: float
    stderr: float
    exact: float
    n_samples: int

    @property
    def z_score(self):
        if self.stderr > 0:
            return abs(self.value - self.exact) / self.stderr
        return 0.0 if self.value == self.exact else math.inf


def _reference_box(group):
    d = group.coord_dim
    return np.array([0.2] * d), np.array([1.2] * d)


def estimate_modulus(A, seed=0, n_samples=100_000):
    """Monte Carlo estimate of mu(A(E)) / mu(E) for a fixed reference set E.

    E is the box [0.2, 1.2]^d (noncompact groups), [0.1, 0.4]^n (tori) or the
    cap B((0.6, 0.8, 0, 0), 1) (SU(2)).  Samples cover a region containing
    A(E) and membership is tested through y in A(E) <=> A^-1(y) in E.
    """
    if n_samples < 10_000:
        raise InvalidInputError("estimate_modulus needs at least 1e4 samples")
    group = A.group
    rng = np.random.default_rng(seed)
    Ainv = A.inverse()
    fam = group.family
    if fam == "torus":
        lo, hi = np.full(group.n, 0.1), np.full(group.n, 0.4)
        vol_E = float(np.prod(hi - lo))
        y = rng.uniform(0.0, 1.0, size=(n_samples, group.n))
        x = Ainv.apply(y)
        inside = np.all((x > lo) & (x < hi), axis=1)
        vol_R = 1.0
    elif fam == "su2":
        p = np.array([0.6, 0.8, 0.0, 0.0])
        vol_E = float(hs.su2_cap_measure(1.0))
        y = hs.sample_uniform_s3(n_samples, rng)
        inside = hs.distance(Ainv.apply(y), p, group) < 1.0
        vol_R = 1.0
    else:
        lo, hi = _reference_box(group)
        vol_E = float(np.prod(hi - lo))
        if not vol_E > 0:
            raise InvalidInputError("degenerate reference set")
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(group.coord_dim, -1).T
        img = A.apply(corners)
        c_lo, c_hi = img.min(axis=0), img.max(axis=0)
        mid, half = 0.5 * (c_lo + c_hi), 0.5 * (c_hi - c_lo) * 1.1
        y = mid + rng.uniform(-1.0, 1.0, size=(n_samples, group.coord_dim)) * half
        x = Ainv.apply(y)
        inside = np.all((x > lo) & (x < hi), axis=1)
        vol_R = float(np.prod(2.0 * half))
    p = float(np.mean(inside))
    value = vol_R * p / vol_E
    stderr = vol_R * math.sqrt(p * (1.0 - p) / n_samples) / vol_E
    return ModulusEstimate(value, stderr, A.modulus(), n_samples)


@dataclass
class StarCertificate:
    """Outcome of sampling condition (*) with the recentring x' = A^-1(x)."""

    k: float
    samples_checked: int
    violations: int
    max_ratio: float
    center: np.ndarray = None

    @property
    def passed(self):
        return self.violations == 0


def verify_star_condition(A, ball, k, seed=0, n_samples=100_000, rel_slack=1e-12):
    """Check A^-1(B(x, r)) ⊆ B(A^-1(x), k r) on uniform samples of the ball.

    ``max_ratio`` is the largest observed rho(A^-1 y, A^-1 x) / r, i.e. the
    smallest k with no violations on these samples.
    """
    if not k > 0:
        raise InvalidInputError("k must be positive")
    group = A.group
    rng = np.random.default_rng(seed)
    Ainv = A.inverse()
    y = hs.sample_ball(group, ball, n_samples, rng)
    x_new = Ainv.apply(ball.center)
    d = hs.distance(Ainv.apply(y), x_new, group)
    violations = int(np.count_nonzero(d >= k * ball.radius * (1.0 + rel_slack)))
    return StarCertificate(float(k), n_samples, violations, float(d.max() / ball.radius), x_new)


def empirical_k_constant(A, ball, seed=0, n_samples=100_000, safety=1.05):
    """Sampled upper estimate of k: max observed radius ratio times ``safety``."""
    cert = verify_star_condition(A, ball, 1.0, seed, n_samples)
    return cert.max_ratio * safety


def _sample_pairs(group, n, rng):
    x = hs.sample_region(group, n, rng)
    if group.family in ("torus", "su2"):
        return x, hs.sample_region(group, n, rng)
    # mix of scales so that both local and global ratios are probed
    radii = 10.0 ** rng.uniform(-2.0, 0.5, size=n)
    y = np.empty_like(x)
    e = group.identity()
    for r in np.unique(np.round(np.log10(radii), 1)):
        sel = np.round(np.log10(radii), 1) == r
        y[sel] = hs.multiply(x[sel], hs.sample_ball(group, hs.Ball(e, 10.0 ** r), int(sel.sum()), rng), group)
    return x, y


@dataclass
class LipschitzEstimate:
    max_ratio: float
    min_ratio: float
    quantiles: dict
    n_pairs: int


def estimate_lipschitz(A, seed=0, n_pairs=10_000):
    """max over sampled pairs of rho(A x, A y) / rho(x, y); a lower bound for Lip(A)."""
    if n_pairs < 10_000:
        raise InvalidInputError("estimate_lipschitz needs at least 1e4 pairs")
    group = A.group
    rng = np.random.default_rng(seed)
    x, y = _sample_pairs(group, n_pairs, rng)
    d0 = hs.distance(x, y, group)
    keep = d0 > 1e-9
    ratio = hs.distance(A.apply(x[keep]), A.apply(y[keep]), group) / d0[keep]
    qs = {str(q): float(np.quantile(ratio, q)) for q in (0.0, 0.5, 0.99, 1.0)}
    return LipschitzEstimate(float(ratio.max()), float(ratio.min()), qs, int(keep.sum()))


@dataclass
class StrubleRatio:
    min_ratio: float
    max_ratio: float
    predicted: float
    n_pairs: int

    @property
    def deviates(self):
        return abs(self.max_ratio - self.predicted) > 1e-9 or abs(self.min_ratio - self.predicted) > 1e-9


def struble_scaling_ratio(A, fam, seed=0, n_pairs=10_000):
    """Observed interval of rho_1(A x, A y) / rho_1(x, y) on a torus.

    The interval is reported against the predicted constant mod(A); it is not
    asserted, because A(V_k) need not coincide with V_k.
    """
    group = A.group
    if group.family != "torus":
        raise InvalidInputError("struble_scaling_ratio is defined on tori")
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=(n_pairs, group.n))
    y = rng.uniform(0.0, 1.0, size=(n_pairs, group.n))
    d0 = hs.struble_metric(x, y, fam)
    keep = d0 > 1e-12
    ratio = hs.struble_metric(A.apply(x[keep]), A.apply(y[keep]), fam) / d0[keep]
    return StrubleRatio(float(ratio.min()), float(ratio.max()), A.modulus(), int(keep.sum()))


def estimate_kappa(group, fam, seed=0, n_pairs=10_000):
    """Ratio C2/C1 of the best constants in C1 rho_1 <= rho <= C2 rho_1 (sampled)."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=(n_pairs, group.n))
    y = rng.uniform(0.0, 1.0, size=(n_pairs, group.n))
    r1 = hs.struble_metric(x, y, fam)
    keep = r1 > 1e-12
    ratio = hs.distance(x[keep], y[keep], group) / r1[keep]
    return float(ratio.max() / ratio.min())
