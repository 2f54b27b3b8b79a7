"""Numerical certification of the recurrences and functional equations.

Every check compares two independently computed sides and records the
residual next to a tolerance assembled from named parts: z-truncation
tails, w-truncation tails, quadrature error estimates and a fixed
floating-point floor.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .dynamics import CollatzMap, radius_R_w
from .errors import DomainViolation
from .pfd import eval_eta, eval_phi, pfd_nd
from .quadrature import PolyCircle, choose_radius, circle_integral, contour_recursion_terms, polycircle_integral
from .series import (
    SeriesVector,
    TruncatedSeries,
    closed_form_f0,
    eval_series,
    full_moment,
    orbit_series_range,
    orbit_tables,
    tail_bound,
)

CHECK_KINDS = (
    "recurrence",
    "contour",
    "bivariate",
    "corollary_structure",
    "bound",
    "convergence",
    "branch_invariance",
    "delta_identity",
)

DEFAULT_SEED = 0x5EED
DEFAULT_LIMITS = {1: 2000, 2: 96, 3: 24}
DEFAULT_NODES = {1: 512, 2: 128, 3: 32}
DETERMINISTIC_1D = (0.3, 0.2 + 0.4j, -0.5, 0.55j)
DETERMINISTIC_2D = ((0.3, 0.1 + 0.25j), (0.2 + 0.4j, -0.5), (-0.5, 0.55j), (0.55j, 0.3))


@dataclass(frozen=True)
class TolerancePolicy:
    abs_floor: float = 1e-12
    rel_factor: float = 0.0
    tail_multiplier: float = 1.0
    scale: float = 1.0

    def tolerance(self, tail: float = 0.0, quad: float = 0.0, magnitude: float = 0.0) -> float:
        return self.scale * (self.tail_multiplier * tail + quad + self.abs_floor + self.rel_factor * magnitude)


@dataclass(frozen=True)
class CheckSpec:
    check_kind: str
    ks: tuple[int, ...] = (1, 2, 3, 4)
    sample_points: tuple | None = None
    w_values: tuple = (0.2, 0.4, 0.4j)
    limits: tuple[int, ...] | None = None
    quad_nodes: int | None = None
    tolerance_policy: TolerancePolicy = field(default_factory=TolerancePolicy)
    K: int | None = None
    w_target: float = 1e-6
    radius_positions: tuple[float, float] = (0.5, 0.75)
    seed: int = DEFAULT_SEED
    n_random: int = 8
    n_max: int | tuple[int, ...] = 10_000
    k_max: int = 30
    closed_form_f0: bool = True
    slack: float = 0.05

    def __post_init__(self):
        if self.check_kind not in CHECK_KINDS:
            raise ValueError(f"unknown check kind {self.check_kind!r}; choose from {', '.join(CHECK_KINDS)}")


@dataclass(frozen=True)
class Record:
    check: str
    inputs: dict
    component: int
    lhs: complex
    rhs: complex
    abs_residual: float
    tolerance: float
    passed: bool
    relation: str = "eq"
    comparison: str = ""
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "comparison": self.comparison,
            "inputs": self.inputs,
            "component": self.component,
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "abs_residual": self.abs_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "relation": self.relation,
            "detail": self.detail,
        }


def residual(lhs: complex, rhs: complex, relation: str) -> float:
    if relation == "eq":
        return abs(lhs - rhs)
    if relation == "le":
        return max(0.0, lhs.real - rhs.real)
    raise ValueError(f"unknown relation {relation!r}")


def make_record(check, inputs, component, lhs, rhs, tolerance, relation="eq", comparison="", detail=None) -> Record:
    lhs, rhs = complex(lhs), complex(rhs)
    res = residual(lhs, rhs, relation)
    tol = float(tolerance)
    return Record(check, inputs, component, lhs, rhs, res, tol, bool(res <= tol), relation, comparison, detail or {})


@dataclass
class VerificationReport:
    check_kind: str
    records: list[Record]
    wall_time: float = 0.0

    @property
    def max_residual(self) -> float:
        return max((r.abs_residual for r in self.records), default=0.0)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.records)

    def worst(self, comparison: str | None = None) -> float:
        vals = [r.abs_residual for r in self.records if comparison is None or r.comparison == comparison]
        return max(vals, default=0.0)

    def to_dict(self) -> dict:
        return {
            "kind": self.check_kind,
            "all_pass": self.all_pass,
            "max_residual": self.max_residual,
            "wall_time": self.wall_time,
            "records": [r.to_dict() for r in self.records],
        }


def _cplx(v) -> list[float]:
    v = complex(v)
    return [v.real, v.imag]


def _z_input(z) -> list:
    return [_cplx(v) for v in z]


def default_sample_points(d: int, seed: int = DEFAULT_SEED, n_random: int = 8) -> list[tuple[complex, ...]]:
    """The 4 fixed points followed by ``n_random`` seeded points with 0.1 <= |z_j| <= 0.6."""
    if d == 1:
        fixed = [(complex(v),) for v in DETERMINISTIC_1D]
    elif d == 2:
        fixed = [tuple(complex(v) for v in p) for p in DETERMINISTIC_2D]
    else:
        fixed = [tuple(complex(DETERMINISTIC_1D[(i + j) % 4]) for j in range(d)) for i in range(4)]
    rng = np.random.default_rng(seed)
    mods = rng.uniform(0.1, 0.6, size=(n_random, d))
    args = rng.uniform(0.0, 2 * np.pi, size=(n_random, d))
    rand = [tuple(complex(v) for v in row) for row in mods * np.exp(1j * args)]
    return fixed + rand


def _points(cmap: CollatzMap, spec: CheckSpec):
    pts = spec.sample_points
    if pts is None:
        pts = default_sample_points(cmap.d, spec.seed, spec.n_random)
    out = []
    for p in pts:
        p = tuple(complex(v) for v in np.atleast_1d(p))
        if len(p) != cmap.d:
            raise ValueError(f"sample point {p} does not have {cmap.d} components")
        if any(not 0 < abs(v) < 1 for v in p):
            raise DomainViolation(f"sample point {list(p)} is outside the punctured unit poly-disk")
        out.append(p)
    return out


def _limits(cmap: CollatzMap, spec: CheckSpec) -> tuple[int, ...]:
    if spec.limits is not None:
        lim = tuple(spec.limits)
        return lim * cmap.d if len(lim) == 1 else lim
    return (DEFAULT_LIMITS.get(cmap.d, 16),) * cmap.d


def _nodes(cmap: CollatzMap, spec: CheckSpec) -> int:
    return spec.quad_nodes or DEFAULT_NODES.get(cmap.d, 16)


def all_pfds(cmap: CollatzMap, shifts=None) -> dict:
    return {r: pfd_nd(cmap, r, shifts) for r in cmap.residues}


class SeriesSource:
    """Derivatives of a truncated vector series, with the bound on what truncation dropped.

    ``tail(ell, rho)`` bounds the omitted part of the ell-th derivative on
    the closed poly-disk of radii rho (all components).
    """

    def __init__(self, vec: SeriesVector, tail):
        self.vec = vec
        self._tail = tail

    def derivative(self, ell, x) -> np.ndarray:
        out = np.empty(len(self.vec), dtype=np.complex128)
        for j, comp in enumerate(self.vec.components):
            c = comp.coeffs
            # axis order shrinks as we slice, so walk the dimensions back to front
            for axis in reversed(range(comp.d)):
                lj = ell[axis]
                if x[axis] == 0:
                    # derivative at the origin is coefficient extraction: ell! * c_ell
                    if lj >= c.shape[axis]:
                        c = np.zeros(c.shape[:axis] + c.shape[axis + 1:], dtype=c.dtype)
                    else:
                        c = np.take(c, lj, axis=axis) * math.factorial(lj)
                else:
                    if lj:
                        c = P.polyder(c, lj, axis=axis)
                    c = np.moveaxis(c, axis, 0)
                    c = P.polyval(x[axis], c, tensor=False)
            out[j] = complex(c)
        return out

    def tail(self, ell, rho) -> float:
        return self._tail(ell, rho)


class ClosedF0Source:
    """Exact f_0 derivatives from the closed form; nothing is truncated."""

    def __init__(self, d: int):
        self.d = d

    def derivative(self, ell, x) -> np.ndarray:
        return closed_form_f0(self.d, x, ell)

    def tail(self, ell, rho) -> float:
        return 0.0


def series_source(cmap: CollatzMap, vec: SeriesVector, k: int) -> SeriesSource:
    lim = vec.limits
    return SeriesSource(vec, lambda ell, rho: tail_bound(cmap, k, lim, rho, ell))


def residue_rhs(cmap: CollatzMap, pfds: dict, z, src) -> tuple[np.ndarray, float]:
    """``sum_r z^r sum_{(ell,nu)} eta/ell! * src^(ell)(phi)`` and its truncation bound."""
    z = np.asarray(z, dtype=np.complex128)
    total = np.zeros(cmap.d, dtype=np.complex128)
    tail = 0.0
    for r in cmap.residues:
        zr = complex(np.prod(z ** np.array(r)))
        for term in pfds[r].terms:
            eta = eval_eta(term, z)
            if eta == 0:
                continue
            phi = eval_phi(term, z)
            fact = math.prod(math.factorial(l) for l in term.ell)
            coeff = zr * eta / fact
            total += coeff * src.derivative(term.ell, phi)
            t = src.tail(term.ell, np.abs(phi))
            if t:
                tail += abs(coeff) * t
    return total, tail


def recurrence_rhs(cmap: CollatzMap, f_prev: SeriesVector, z, k_prev: int = 0, pfds=None) -> np.ndarray:
    pfds = pfds or all_pfds(cmap)
    return residue_rhs(cmap, pfds, z, series_source(cmap, f_prev, k_prev))[0]


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        rep = fn(*args, **kwargs)
        rep.wall_time = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def check_recurrence(cmap: CollatzMap, spec: CheckSpec) -> VerificationReport:
    """Direct f_k(z) against the residue-form right-hand side built from f_{k-1}."""
    if any(k < 1 for k in spec.ks):
        raise ValueError("recurrence needs k >= 1")
    pol = spec.tolerance_policy
    lim = _limits(cmap, spec)
    pts = _points(cmap, spec)
    fs = orbit_series_range(cmap, max(spec.ks), lim)
    pfds = all_pfds(cmap)
    recs = []
    for k in spec.ks:
        src = series_source(cmap, fs[k - 1], k - 1)
        for z in pts:
            lhs = np.array([eval_series(c, z) for c in fs[k].components])
            lhs_tail = tail_bound(cmap, k, lim, np.abs(z))
            rhs, rhs_tail = residue_rhs(cmap, pfds, z, src)
            for j in range(cmap.d):
                tol = pol.tolerance(lhs_tail + rhs_tail, magnitude=abs(lhs[j]))
                recs.append(make_record("recurrence", {"k": k, "z": _z_input(z)}, j, lhs[j], rhs[j], tol,
                                        comparison="direct_vs_residue",
                                        detail={"z_tail": lhs_tail + rhs_tail}))
    if spec.closed_form_f0 and 1 in spec.ks:
        src0 = ClosedF0Source(cmap.d)
        for z in pts:
            lhs = np.array([eval_series(c, z) for c in fs[1].components])
            lhs_tail = tail_bound(cmap, 1, lim, np.abs(z))
            rhs, _ = residue_rhs(cmap, pfds, z, src0)
            for j in range(cmap.d):
                tol = pol.tolerance(lhs_tail, magnitude=abs(lhs[j]))
                recs.append(make_record("recurrence", {"k": 1, "z": _z_input(z), "source": "closed_form_f0"}, j,
                                        lhs[j], rhs[j], tol, comparison="direct_vs_closed_form",
                                        detail={"z_tail": lhs_tail}))
    return VerificationReport("recurrence", recs)


@_timed
def check_contour(cmap: CollatzMap, spec: CheckSpec) -> VerificationReport:
    """Quadrature form of the recursion against direct f_k, the residue form, and a second radius."""
    pol = spec.tolerance_policy
    lim = _limits(cmap, spec)
    M = _nodes(cmap, spec)
    pts = _points(cmap, spec)
    fs = orbit_series_range(cmap, max(spec.ks), lim)
    pfds = all_pfds(cmap)
    pos1, pos2 = spec.radius_positions
    recs = []
    for k in spec.ks:
        src = series_source(cmap, fs[k - 1], k - 1)
        for z in pts:
            inputs = {"k": k, "z": _z_input(z), "M": M}
            lhs = np.array([eval_series(c, z) for c in fs[k].components])
            lhs_tail = tail_bound(cmap, k, lim, np.abs(z))
            res, res_tail = residue_rhs(cmap, pfds, z, src)
            rho1 = choose_radius(cmap, z, pos1)
            rho2 = choose_radius(cmap, z, pos2)
            q1 = contour_recursion_terms(cmap, fs[k - 1], z, PolyCircle(rho1, M))
            q2 = contour_recursion_terms(cmap, fs[k - 1], z, PolyCircle(rho2, M))
            for j in range(cmap.d):
                e1, e2 = q1[j].est_error, q2[j].est_error
                recs.append(make_record("contour", dict(inputs, rho=list(rho1)), j, q1[j].value, lhs[j],
                                        pol.tolerance(lhs_tail + res_tail, quad=e1, magnitude=abs(lhs[j])),
                                        comparison="quadrature_vs_direct",
                                        detail={"z_tail": lhs_tail + res_tail, "quad_error": e1}))
                # same truncated polynomial on both sides: only aliasing separates them
                recs.append(make_record("contour", dict(inputs, rho=list(rho1)), j, q1[j].value, res[j],
                                        pol.tolerance(0.0, quad=e1, magnitude=abs(res[j])),
                                        comparison="quadrature_vs_residue", detail={"quad_error": e1}))
                recs.append(make_record("contour", dict(inputs, rho=list(rho1), rho2=list(rho2)), j,
                                        q1[j].value, q2[j].value,
                                        pol.tolerance(0.0, quad=e1 + e2, magnitude=abs(q1[j].value)),
                                        comparison="radius_robustness", detail={"quad_error": e1 + e2}))
    return VerificationReport("contour", recs)


def w_truncation(cmap: CollatzMap, w: complex, target: float) -> int:
    """Smallest K with ``(|w| amax)^K < target/10``."""
    q = abs(w) * float(cmap.growth.amax)
    if q == 0:
        return 0
    return max(1, math.ceil(math.log(target / 10) / math.log(q)))


def _w_tail_factor(cmap: CollatzMap, aw: float, K: int) -> float:
    """``sum_{k>K} |w|^k C_k`` with ``C_k`` the product constant."""
    g = cmap.growth
    if aw == 0:
        return 0.0
    if g.chi is None:
        b = float(g.bmax)
        # sum_{k>K} (b k + 1) aw^k
        geo = aw ** (K + 1) / (1 - aw)
        return b * (aw ** (K + 1) * ((K + 1) * (1 - aw) + aw) / (1 - aw) ** 2) + geo
    amax = float(g.amax)
    x = amax * aw
    return (abs(float(g.chi)) + 1) * (x ** (K + 1) / (1 - x) + aw ** (K + 1) / (1 - aw))


def _w_source(cmap: CollatzMap, fs: list[SeriesVector], w: complex, lim) -> SeriesSource:
    K = len(fs) - 1
    comps = []
    for j in range(cmap.d):
        acc = np.zeros(lim, dtype=np.complex128)
        wk = 1 + 0j
        for k in range(K + 1):
            acc = acc + wk * fs[k][j].coeffs
            wk *= w
        comps.append(TruncatedSeries(cmap.d, tuple(lim), acc))
    G = SeriesVector(tuple(comps))
    aw = abs(w)
    wtail = _w_tail_factor(cmap, aw, K)

    def tail(ell, rho):
        z_part = sum(aw**k * tail_bound(cmap, k, lim, rho, ell) for k in range(K + 1))
        w_part = wtail * math.prod(full_moment(int(l), float(r)) for l, r in zip(ell, rho)) if wtail else 0.0
        return z_part + w_part

    return SeriesSource(G, tail)


@_timed
def check_bivariate(cmap: CollatzMap, spec: CheckSpec) -> VerificationReport:
    """``F(z,w) = f_0(z) + w sum_r z^r sum eta/ell! F^(ell)(phi, w)`` on the double truncation."""
    pol = spec.tolerance_policy
    lim = _limits(cmap, spec)
    R_w = float(radius_R_w(cmap))
    ws = [complex(w) for w in spec.w_values]
    for w in ws:
        if abs(w) >= R_w:
            raise DomainViolation(f"|w| = {abs(w):g} is not below R_w = {radius_R_w(cmap)}")
    pts = _points(cmap, spec)
    pfds = all_pfds(cmap)
    Ks = {w: (spec.K if spec.K is not None else w_truncation(cmap, w, spec.w_target)) for w in ws}
    if any(w == 0 for w in ws):
        Ks = {w: (0 if w == 0 else K) for w, K in Ks.items()}
    fs_all = orbit_series_range(cmap, max(Ks.values(), default=0), lim)
    recs = []
    for w in ws:
        K = Ks[w]
        src = _w_source(cmap, fs_all[: K + 1], w, lim)
        for z in pts:
            inputs = {"z": _z_input(z), "w": _cplx(w), "K": K}
            lhs = src.derivative((0,) * cmap.d, z)
            lhs_tail = src.tail((0,) * cmap.d, np.abs(z))
            f0 = closed_form_f0(cmap.d, z)
            if w == 0:
                rhs, rhs_tail = f0, 0.0
            else:
                inner, inner_tail = residue_rhs(cmap, pfds, z, src)
                rhs, rhs_tail = f0 + w * inner, abs(w) * inner_tail
            for j in range(cmap.d):
                tol = pol.tolerance(lhs_tail + rhs_tail, magnitude=abs(lhs[j]))
                recs.append(make_record("bivariate", inputs, j, lhs[j], rhs[j], tol,
                                        comparison="F_vs_functional_equation",
                                        detail={"tail": lhs_tail + rhs_tail}))
    return VerificationReport("bivariate", recs)


def _structure_records(cmap: CollatzMap) -> list[Record]:
    recs = []
    exact = TolerancePolicy(abs_floor=0.0)
    for r in cmap.residues:
        pfd = pfd_nd(cmap, r)
        br = cmap.branch(r)
        inp = {"r": list(r), "lambda": list(br.lam), "mu": list(br.mu)}

        def rec(name, observed, predicted):
            recs.append(make_record("corollary_structure", inp, 0, float(observed), float(predicted),
                                    exact.tolerance(), comparison=name))

        # |L(r)| is the product of the one-dimensional basis sizes
        sizes = [max(mu - lam, 0) + lam + (1 if mu >= lam else 0) for lam, mu in zip(br.lam, br.mu)]
        rec("term_count", len(pfd.terms), math.prod(sizes))
        rec("zero_zero_member", any(t.ell == (0,) * cmap.d and t.nu == 0 for t in pfd.terms), True)
        complete = True
        for ell in {t.ell for t in pfd.terms}:
            nus = sorted(t.nu for t in pfd.terms if t.ell == ell)
            complete &= nus == list(range(len(nus)))
        rec("nu_complete", complete, True)
        pairs = [(t.ell, t.nu) for t in pfd.terms]
        rec("pairs_distinct", len(set(pairs)) == len(pairs), True)
        rec("pole_at_zero_when_ell_positive",
            all(t.phi_spec[j].pole_at_zero for t in pfd.terms for j in range(cmap.d) if t.ell[j] > 0), True)
        roots_only = all(mu - lam <= -1 for lam, mu in zip(br.lam, br.mu))
        sigma_free = all(all(p.pole_at_zero is False for p in t.phi_spec) for t in pfd.terms)
        rec("sigma_free_iff_mu_below_lambda", sigma_free, roots_only)
        no_deriv = all(mu <= lam for lam, mu in zip(br.lam, br.mu))
        rec("ell_zero_iff_mu_at_most_lambda", all(t.ell == (0,) * cmap.d for t in pfd.terms), no_deriv)
        if roots_only:
            # the right-hand side reduces to a sum over roots only, one term per root tuple
            rec("root_terms_only", len(pfd.terms), math.prod(br.lam))
    return recs


@_timed
def check_corollary_structure(cmap: CollatzMap, spec: CheckSpec | None = None) -> VerificationReport:
    """Shape of every L(r) and agreement with the structural hypotheses on (lambda, mu)."""
    return VerificationReport("corollary_structure", _structure_records(cmap))


def structure_hypotheses(cmap: CollatzMap) -> dict:
    roots_only = all(mu - lam <= -1 for br in cmap.branches for lam, mu in zip(br.lam, br.mu))
    no_deriv = all(mu <= lam for br in cmap.branches for lam, mu in zip(br.lam, br.mu))
    return {"roots_only": roots_only, "no_derivative_terms": no_deriv}


@_timed
def check_bound(cmap: CollatzMap, n_max, k_max: int, spec: CheckSpec | None = None) -> VerificationReport:
    """Exhaustive ``||t_k(n)|| <= bound(n, k)`` over the box ``n_j <= n_max``, in exact integers.

    One record per k: lhs is the largest ratio ``||t_k(n)|| / bound``, rhs is 1.
    """
    n_max = (n_max,) * cmap.d if isinstance(n_max, int) else tuple(n_max)
    lim = tuple(v + 1 for v in n_max)
    tabs = orbit_tables(cmap, k_max, lim, budget=max(math.prod(lim), 1))
    norm = tabs[0].max(axis=0).astype(object)
    g = cmap.growth
    recs = []
    for k, t in enumerate(tabs):
        tk = t.astype(object).max(axis=0) if cmap.d > 1 else t[0].astype(object)
        if g.chi is None:
            bound = Fraction(g.bmax) * k
            den = bound.denominator
            lhs_int = tk * den
            rhs_int = norm * den + bound.numerator
        else:
            a = g.amax**k
            chi = g.chi
            # amax^k (N + chi) - chi, multiplied through by den(a) * den(chi)
            lhs_int = tk * (a.denominator * chi.denominator)
            rhs_int = (norm * chi.denominator + chi.numerator) * a.numerator - chi.numerator * a.denominator
        violations = int(np.count_nonzero(lhs_int > rhs_int))
        ratios = [0.0 if b == 0 else int(x) / int(b) for x, b in zip(lhs_int.ravel(), rhs_int.ravel())]
        worst = max(ratios)
        recs.append(make_record("bound", {"k": k, "n_max": list(n_max)}, 0, worst, 1.0, 0.0, relation="le",
                                comparison="orbit_norm_le_bound", detail={"violations": violations,
                                                                         "points": int(np.prod(lim))}))
    return VerificationReport("bound", recs)


def _rotations(cmap: CollatzMap):
    lam_max = cmap.lambda_max()
    for s in itertools.product(*(range(L) for L in lam_max)):
        if any(s):
            yield s


@_timed
def check_branch_invariance(cmap: CollatzMap, spec: CheckSpec) -> VerificationReport:
    """Residue-form RHS recomputed with the root labels rotated by every shift vector."""
    pol = spec.tolerance_policy
    lim = _limits(cmap, spec)
    pts = _points(cmap, spec)
    fs = orbit_series_range(cmap, max(spec.ks), lim)
    base = all_pfds(cmap)
    shifted = {s: all_pfds(cmap, s) for s in _rotations(cmap)}
    recs = []
    for k in spec.ks:
        src = series_source(cmap, fs[k - 1], k - 1)
        for z in pts:
            ref, _ = residue_rhs(cmap, base, z, src)
            for s, pf in shifted.items():
                val, _ = residue_rhs(cmap, pf, z, src)
                for j in range(cmap.d):
                    recs.append(make_record("branch_invariance", {"k": k, "z": _z_input(z), "shift": list(s)}, j,
                                            val[j], ref[j], pol.tolerance(magnitude=abs(ref[j])),
                                            comparison="rotated_vs_principal"))
    return VerificationReport("branch_invariance", recs)


def _increments(cmap: CollatzMap, z, w: complex, K: int, fs) -> np.ndarray:
    aw = abs(w)
    return np.array([max(abs(eval_series(c, z)) for c in fs[k].components) * aw**k for k in range(K + 1)])


def fitted_ratio(inc: np.ndarray) -> float:
    """Geometric ratio from a least-squares line through log increments over the second half."""
    k = np.arange(len(inc))
    keep = (k >= len(inc) // 2) & (inc > 0)
    if keep.sum() < 2:
        return 0.0
    slope = np.polyfit(k[keep], np.log(inc[keep]), 1)[0]
    return float(math.exp(slope))


def monotone_from(inc: np.ndarray, stride: int = 1) -> int:
    """First k after which every subsequence ``inc[k+p::stride]`` is nonincreasing.

    Orbits that settle on a cycle of length c make |f_k(z)| oscillate with
    period c, so stride 1 may never become monotone while stride c does.
    """
    n = len(inc)
    for k in range(n):
        if all(np.all(np.diff(inc[k + p::stride]) <= 0) for p in range(stride)):
            return k
    return n


@_timed
def check_convergence(cmap: CollatzMap, spec: CheckSpec) -> VerificationReport:
    """Increments ``max_j |f_{j,k}(z)| |w|^k`` decay geometrically with ratio at most ``|w|/R_w + slack``."""
    lim = _limits(cmap, spec)
    R_w = float(radius_R_w(cmap))
    ws = [complex(w) for w in spec.w_values]
    for w in ws:
        if abs(w) > 0.95 * R_w:
            raise DomainViolation(f"|w| = {abs(w):g} exceeds 0.95 R_w = {0.95 * R_w:g}")
    K = spec.K if spec.K is not None else 40
    pts = _points(cmap, spec)
    fs = orbit_series_range(cmap, K, lim)
    recs = []
    for w in ws:
        for z in pts:
            inputs = {"z": _z_input(z), "w": _cplx(w), "K": K}
            if w == 0:
                recs.append(make_record("convergence", inputs, 0, 0.0, 0.0, 0.0, relation="le",
                                        comparison="fitted_ratio", detail={"note": "single term"}))
                continue
            inc = _increments(cmap, z, w, K, fs)
            ratio = fitted_ratio(inc)
            limit = abs(w) / R_w + spec.slack
            k0, k0_pairs = monotone_from(inc, 1), monotone_from(inc, 2)
            recs.append(make_record("convergence", inputs, 0, ratio, limit, 0.0, relation="le",
                                    comparison="fitted_ratio", detail={"k0": k0, "k0_stride2": k0_pairs}))
    return VerificationReport("convergence", recs)


@_timed
def check_delta_identity(cmap: CollatzMap | None = None, spec: CheckSpec | None = None, M: int = 64,
                         d_values: Sequence[int] = (1, 2), rho: float = 1.0) -> VerificationReport:
    """Trapezoid integrals of ``u^(n-k-1)`` reproduce the Kronecker delta for offsets ``|n-k| < M``."""
    pol = spec.tolerance_policy if spec is not None else TolerancePolicy(abs_floor=1e-14)
    recs = []
    if 1 in d_values:
        for p in range(-M + 1, M):
            q = circle_integral(lambda u, p=p: u ** (p - 1), rho, M)
            tol = pol.tolerance() * max(1.0, rho**p)
            recs.append(make_record("delta_identity", {"offset": [p], "M": M, "rho": rho}, 0, q.value,
                                    1.0 if p == 0 else 0.0, tol, comparison="delta_1d"))
    if 2 in d_values:
        offs = sorted({-M + 1, -M // 2, -3, -1, 0, 1, 2, M // 3, M - 1})
        pc = PolyCircle((rho, rho), M)
        for p1, p2 in itertools.product(offs, offs):
            q = polycircle_integral(lambda u1, u2, a=p1, b=p2: u1 ** (a - 1) * u2 ** (b - 1), pc)
            tol = pol.tolerance() * max(1.0, rho ** (p1 + p2))
            recs.append(make_record("delta_identity", {"offset": [p1, p2], "M": M, "rho": rho}, 0, q.value,
                                    1.0 if p1 == p2 == 0 else 0.0, tol, comparison="delta_2d"))
    return VerificationReport("delta_identity", recs)


def run_check(cmap: CollatzMap, spec: CheckSpec) -> VerificationReport:
    kind = spec.check_kind
    if kind == "recurrence":
        return check_recurrence(cmap, spec)
    if kind == "contour":
        return check_contour(cmap, spec)
    if kind == "bivariate":
        return check_bivariate(cmap, spec)
    if kind == "corollary_structure":
        return check_corollary_structure(cmap, spec)
    if kind == "bound":
        return check_bound(cmap, spec.n_max, spec.k_max, spec)
    if kind == "branch_invariance":
        return check_branch_invariance(cmap, spec)
    if kind == "convergence":
        return check_convergence(cmap, spec)
    if kind == "delta_identity":
        if spec.tolerance_policy == TolerancePolicy():
            spec = replace(spec, tolerance_policy=TolerancePolicy(abs_floor=1e-14))
        return check_delta_identity(cmap, spec, M=spec.quad_nodes or 64)
    raise ValueError(kind)
