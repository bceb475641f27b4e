"""The eight acceptance criteria, each returning a pass flag and a summary line.

``c_mu_scale`` multiplies every doubling constant; it exists so that tests
can check that a wrong constant is caught.
"""
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import cases
from . import homspace as hs
from .automorphisms import (AutomorphismFamily, AutomorphismSpec, estimate_lipschitz, estimate_modulus,
                            struble_scaling_ratio, verify_star_condition)
from .hardy import HomogeneityConstants, make_random_atom, validate_atom
from .hausdorff import (Kernel, addendum_bound, atomic_image_decomposition, check_lemma1,
                        special_form_torus, theorem1_bound)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.title} | {self.summary} ({self.seconds:.1f}s)"


@dataclass
class AcceptanceResult:
    results: list
    seconds: float

    @property
    def exit_code(self):
        return 0 if all(r.passed for r in self.results) else 1

    def table(self):
        lines = [r.line() for r in self.results]
        n_ok = sum(r.passed for r in self.results)
        lines.append(f"{n_ok}/{len(self.results)} criteria passed in {self.seconds:.1f}s")
        return "\n".join(lines)


def _rng(seed, *key):
    return np.random.default_rng([int(seed), *key])


# ----------------------------------------------------------------------------


def closed_form_constants(seed=0, c_mu_scale=1.0):
    notes, ok = [], True
    radii = [0.01, 0.03, 0.1, 0.2]
    for fam in ("euclidean", "torus"):
        for n in (1, 2, 3):
            spec = hs.GroupSpec(fam, n)
            centers = hs.sample_region(spec, 3, _rng(seed, 1, n), extent=1.0)
            rep = hs.doubling_profile(spec, centers, radii)
            C = spec.doubling_constant * c_mu_scale
            exact = bool(np.all(np.abs(rep.ratios - C) <= 1e-12 * C))
            ok &= exact and rep.d_violations == 0
            if not exact:
                notes.append(f"{spec.label} ratio {rep.max_ratio:g} != C_mu {C:g}")
    if ok:
        notes.append("R^n, T^n (n<=3) doubling ratios exactly 2^n")
    H1 = hs.GroupSpec("heisenberg", 1)
    worst = 0.0
    for r in (0.25, 0.5, 1.0, 2.0, 4.0):
        vol, _ = hs.estimate_ball_measure(H1, hs.Ball(H1.identity(), r), method="grid", resolution=2000)
        worst = max(worst, abs(vol - r ** 4) / r ** 4)
    ok &= worst <= 1e-3
    notes.append(f"H_1 |B(e,r)| vs r^4 rel err {worst:.1e}")
    UT = hs.GroupSpec("upper_triangular", 3)
    zs = []
    for i, lam in enumerate((0.6, 1.7)):
        est = estimate_modulus(AutomorphismSpec.dilation(UT, lam), seed=int(_rng(seed, 2, i).integers(2 ** 62)),
                               n_samples=100_000)
        zs.append(abs(est.value - lam ** 4) / est.stderr)
    ok &= max(zs) <= 3.0
    notes.append(f"T1(3) mod(D_lam)=lam^4 max z {max(zs):.2f}")
    return ok, "; ".join(notes)


def star_condition(seed=0, c_mu_scale=1.0):
    notes, ok = [], True
    U = np.array([[1.0], [1.5], [2.0]])
    families = [(spec, cases.standard_family(spec)) for spec in cases.DEFAULT_GROUPS]
    H1 = hs.GroupSpec("heisenberg", 1)
    families.append((H1, AutomorphismFamily.from_descriptor(
        H1, {"kind": "symplectic", "matrix": [["1", "u"], ["0", "1"]]}, 1)))
    for j, (spec, fam) in enumerate(families):
        rng = _rng(seed, 3, j)
        total = 0
        for A in fam.at(U):
            center = hs.sample_region(spec, 1, rng, extent=1.0)[0]
            ball = hs.Ball(center, {"torus": 0.2, "su2": 0.6}.get(spec.family, 0.5))
            cert = verify_star_condition(A, ball, A.k_constant(), int(rng.integers(2 ** 62)), 100_000)
            total += cert.violations
        ok &= total == 0
        notes.append(f"{spec.label}/{fam.descriptor['kind']}: {total}")
    R2 = hs.GroupSpec("euclidean", 2)
    A = AutomorphismSpec.linear(R2, np.linalg.inv([[1.0, 2.0], [0.0, 1.0]]))
    ball = hs.Ball(np.zeros(2), 1.0)
    tight = verify_star_condition(A, ball, A.k_constant(), seed, 100_000)
    loose = verify_star_condition(A, ball, 2.9, seed, 100_000)
    ok &= tight.violations == 0 and loose.violations >= 1 and abs(A.k_constant() - 3.0) < 1e-12
    notes.append(f"R^2 sharpness k=3: {tight.violations}, k=2.9: {loose.violations}")
    return ok, "violations " + ", ".join(notes)


def running_example_oracle(n_x=4000, n_u=4000):
    """Brute force ∫∫ 1_[1,2](u) 1_[0,1](x/u) du dx by counting on midpoint grids."""
    xs = 2.5 * (np.arange(n_x) + 0.5) / n_x
    us = 1.0 + (np.arange(n_u) + 0.5) / n_u
    total = 0.0
    for chunk in np.array_split(xs, 16):
        q = chunk[:, None] / us[None, :]
        total += np.count_nonzero((q >= 0.0) & (q <= 1.0))
    return total * (2.5 / n_x) * (1.0 / n_u)


def running_example():
    R1 = hs.GroupSpec("euclidean", 1)
    kernel = Kernel.from_expression("1", [(1.0, 2.0)], 32, "gauss")
    family = AutomorphismFamily.from_descriptor(R1, {"kind": "matrix", "matrix": [["1/u"]]}, 1)
    return R1, kernel, family


def lemma1(seed=0, c_mu_scale=1.0):
    notes, ok = [], True
    for j, spec in enumerate(cases.DEFAULT_GROUPS):
        worst, eq_worst, bad = 0.0, 0.0, 0
        for i in range(50):
            c = cases.random_lemma1_case(spec, _rng(seed, 4, j, i))
            rep = check_lemma1(c.kernel, c.family, c.f, c.x_grid, c.f_l1, 1e-2)
            worst = max(worst, rep.lhs / rep.rhs)
            if rep.nonnegative:
                eq_worst = max(eq_worst, abs(rep.lhs - rep.rhs) / rep.rhs)
            bad += (not rep.passed) or rep.equality is False
        ok &= bad == 0
        notes.append(f"{spec.label} max lhs/rhs {worst:.6f}")
    R1, kernel, family = running_example()
    f = lambda x: ((x[:, 0] >= 0.0) & (x[:, 0] <= 1.0)).astype(float)
    rep = check_lemma1(kernel, family, f, hs.box_grid([(-0.5, 2.5)], 6000), 1.0)
    oracle = running_example_oracle()
    hit = abs(rep.lhs - oracle) <= 1e-2 * oracle and abs(rep.rhs - oracle) <= 1e-2 * oracle
    ok &= hit and abs(oracle - 1.5) <= 1e-2
    notes.append(f"running example lhs {rep.lhs:.6f} rhs {rep.rhs:.6f} oracle {oracle:.6f}")
    return ok, "; ".join(notes)


def lemma4(seed=0, c_mu_scale=1.0):
    ok, count, worst = True, 0, 0.0
    tests = []
    for spec in cases.DEFAULT_GROUPS + (hs.GroupSpec("euclidean", 1), hs.GroupSpec("torus", 1)):
        tests.append((spec, cases.standard_kernel(), cases.standard_family(spec)))
    for j, spec in enumerate(cases.DEFAULT_GROUPS):
        for i in range(10):
            c = cases.random_lemma1_case(spec, _rng(seed, 5, j, i), x_resolution=4)
            tests.append((spec, c.kernel, c.family))
    for spec, kernel, family in tests:
        consts = HomogeneityConstants.of(spec, c_mu_scale)
        b = theorem1_bound(kernel, family, consts)
        ok &= b.norm_L_A <= consts.c_mu * b.norm_L1_ks * (1 + 1e-12)
        for A in family.at(kernel.grid.points):
            r = (1.0 / A.modulus()) / (consts.c_mu * A.k_constant() ** consts.s)
            worst = max(worst, r)
            count += 1
    ok &= worst <= 1.0 + 1e-12
    return ok, f"{len(tests)} kernel/family pairs, {count} automorphisms, max mod(A^-1)/(C_mu k^s) = {worst:.4f}"


def theorem1(seed=0, c_mu_scale=1.0):
    notes, ok = [], True
    kernel = cases.standard_kernel()
    for j, spec in enumerate(cases.DEFAULT_GROUPS):
        family = cases.standard_family(spec)
        consts = HomogeneityConstants.of(spec, c_mu_scale)
        worst, invalid = 0.0, 0
        for i in range(20):
            rng = _rng(seed, 6, j, i)
            a0 = make_random_atom(spec, cases.atom_ball(spec, rng), int(rng.integers(2 ** 62)), resolution=10)
            invalid += not validate_atom(a0, 1e-6).passed
            rep, chk = atomic_image_decomposition(kernel, family, a0, consts, 1e-2, 1e-6)
            invalid += sum(not validate_atom(a, 1e-6).passed for _, a in rep.terms)
            worst = max(worst, chk.lambda_sum / chk.bound)
        ok &= invalid == 0 and worst <= 1.0 + 1e-2
        notes.append(f"{spec.label} max Σ|λ|/bound {worst:.6f}, invalid {invalid}")
    R1, k1, fam1 = running_example()
    b1 = theorem1_bound(k1, fam1).theorem1_bound
    ref1 = 2.0 * integrate.quad(lambda u: u, 1.0, 2.0)[0]
    H1 = hs.GroupSpec("heisenberg", 1)
    famH = AutomorphismFamily.from_descriptor(H1, {"kind": "dilation", "lambda": "u"}, 1)
    bH = theorem1_bound(k1, famH).theorem1_bound
    refH = 16.0 * integrate.quad(lambda lam: lam ** -4, 1.0, 2.0)[0]
    ok &= abs(b1 - ref1) <= 1e-3 * ref1 and abs(bH - refH) <= 1e-3 * refH
    ok &= abs(ref1 - 3.0) <= 1e-3 * 3.0 and abs(refH - 14.0 / 3.0) <= 1e-3 * 14.0 / 3.0
    notes.append(f"R^1 bound {b1:.6f} (quad {ref1:.6f}); H_1 bound {bH:.6f} (quad {refH:.6f})")
    return ok, "; ".join(notes)


def torus_structure(seed=0, c_mu_scale=1.0):
    T1 = hs.GroupSpec("torus", 1)
    family = AutomorphismFamily.from_descriptor(T1, {"kind": "matrix", "matrix": [["2*step(u - 0.5) - 1"]]}, 1)
    x = hs.sample_region(T1, 200, _rng(seed, 7))
    sin = lambda p: np.sin(2.0 * np.pi * np.atleast_2d(p)[:, 0])
    smooth = lambda p: np.exp(np.cos(2.0 * np.pi * np.atleast_2d(p)[:, 0])) + np.sin(4.0 * np.pi * p[:, 0])
    even = special_form_torus(Kernel.on_group("1", T1, 1024), family, sin, x)
    a, b = even.ab
    ok = abs(a - 0.5) <= 1e-6 and abs(b - 0.5) <= 1e-6
    ok &= float(np.max(np.abs(even.values))) <= 1e-8
    skew = special_form_torus(Kernel.on_group("1 + 0.5*sin(2*pi*u)", T1, 4096), family, smooth, x)
    a2, b2 = skew.ab
    b_ref = 0.5 + 0.5 / math.pi
    a_ref = 0.5 - 0.5 / math.pi
    ok &= abs(a2 - a_ref) <= 1e-6 and abs(b2 - b_ref) <= 1e-6
    closed = a_ref * smooth(x) + b_ref * smooth(hs.reduce_torus(-x))
    dev = float(np.max(np.abs(skew.values - closed)))
    ok &= dev <= 1e-6 and skew.cross_check <= 1e-6 and even.cross_check <= 1e-6
    return ok, (f"(a,b)=({a:.9f},{b:.9f}); |H sin| max {np.max(np.abs(even.values)):.1e}; "
                f"weighted kernel quadrature vs closed-form aI+bJ {dev:.1e}")


def su2_isometry(seed=0, c_mu_scale=1.0):
    rng = _rng(seed, 8)
    hi, lo = -math.inf, math.inf
    for _ in range(20):
        A = AutomorphismSpec.inner(rng.normal(size=4))
        est = estimate_lipschitz(A, int(rng.integers(2 ** 62)), 10_000)
        hi, lo = max(hi, est.max_ratio), min(lo, est.min_ratio)
    ok = 1 - 1e-6 <= lo and hi <= 1 + 1e-6
    SU2 = hs.GroupSpec("su2")
    kernel = Kernel.from_expression("1 + 0.5*cos(pi*u)", [(1.0, 2.0)], 12, "gauss")
    family = cases.standard_family(SU2)
    p = np.array([0.0, 0.6, 0.0, 0.8])
    rep = check_lemma1(kernel, family, lambda x: 1.0 + 0.7 * (x @ p), hs.su2_grid(24), 1.0)
    ok &= rep.passed and abs(rep.rhs - kernel.l1_norm()) <= 1e-12 * rep.rhs
    return ok, f"Lipschitz ratios in [{lo:.12f}, {hi:.12f}]; lemma1 lhs {rep.lhs:.9f} <= rhs {rep.rhs:.9f}"


def addendum(seed=0, c_mu_scale=1.0):
    T1 = hs.GroupSpec("torus", 1)
    fam = hs.StrubleFamily(T1)
    ok, ratios = True, []
    for m in (1.0, -1.0):
        sr = struble_scaling_ratio(AutomorphismSpec.linear(T1, [[m]]), fam, seed, 10_000)
        ratios.append((sr.min_ratio, sr.max_ratio))
        ok &= abs(sr.min_ratio - 1.0) <= 1e-9 and abs(sr.max_ratio - 1.0) <= 1e-9
    worst = 0.0
    compact = [
        (T1, Kernel.on_group("1 + 0.5*sin(2*pi*u)", T1, 256),
         AutomorphismFamily.from_descriptor(T1, {"kind": "matrix", "matrix": [["2*step(u - 0.5) - 1"]]}, 1)),
        (hs.GroupSpec("torus", 2), cases.standard_kernel(), cases.standard_family(hs.GroupSpec("torus", 2))),
        (hs.GroupSpec("su2"), Kernel.from_expression("u^2", [(1.0, 2.0)], 16),
         cases.standard_family(hs.GroupSpec("su2"))),
    ]
    for spec, kernel, family in compact:
        consts = HomogeneityConstants.of(spec, c_mu_scale)
        got = addendum_bound(kernel, family, 1.0, consts)
        ref = consts.c_mu * kernel.l1_norm()
        worst = max(worst, abs(got - ref) / ref)
    ok &= worst <= 1e-12
    return ok, f"Struble ratios M=+1 {ratios[0]}, M=-1 {ratios[1]}; addendum identity rel err {worst:.1e}"


CRITERIA = (
    (1, "closed-form constants", closed_form_constants),
    (2, "condition (*)", star_condition),
    (3, "L1 boundedness", lemma1),
    (4, "kernel norm comparison", lemma4),
    (5, "atomic image bound", theorem1),
    (6, "T^1 structure H = aI + bJ", torus_structure),
    (7, "SU(2) isometry", su2_isometry),
    (8, "Struble scaling and refined bound", addendum),
)


def run_criterion(number, seed=0, c_mu_scale=1.0):
    _, title, fn = CRITERIA[number - 1]
    t0 = time.perf_counter()
    try:
        ok, summary = fn(seed, c_mu_scale)
    except (ValueError, ArithmeticError) as e:
        ok, summary = False, f"error: {type(e).__name__}: {e}"
    return CriterionResult(number, title, bool(ok), summary, time.perf_counter() - t0)


def run_acceptance(seed=0, c_mu_scale=1.0, stream=None):
    """Run all criteria, printing one line per criterion to ``stream``."""
    stream = sys.stdout if stream is None else stream
    t0 = time.perf_counter()
    results = []
    for number, _, _ in CRITERIA:
        res = run_criterion(number, seed, c_mu_scale)
        results.append(res)
        if stream is not False:
            print(res.line(), file=stream, flush=True)
    out = AcceptanceResult(results, time.perf_counter() - t0)
    if stream is not False:
        print(out.table().splitlines()[-1], file=stream, flush=True)
    return out
