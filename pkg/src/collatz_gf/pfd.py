"""Partial fraction decomposition of the recursion kernel.

For one residue class and one dimension the kernel is
``1/(u^(mu-lam+1) (u^lam - z^m))``.  It splits into pole-at-zero terms
``sigma_l / u^(l+1)`` and simple-root terms ``tau_l / (u - phi_l)`` with
``phi_l = z^(m/lam) zeta^l``.  The d-dimensional kernel is the product over
dimensions, and its term set L(r) is built by induction on d.

Coefficients are symbolic ``FracMonomial`` values: an exact root of unity
(stored as a rational number of turns), a rational scale and a rational
exponent of z.  Fractional powers use the principal logarithm.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dynamics import CollatzMap
from .errors import BadResidue, PoleProximity, ZeroArgument

POLE_PROXIMITY = 1e-6


def _turn(t: Fraction) -> complex:
    t = t % 1
    # exact values on the axes keep products of units clean
    if t == 0:
        return 1 + 0j
    if t == Fraction(1, 2):
        return -1 + 0j
    if t == Fraction(1, 4):
        return 1j
    if t == Fraction(3, 4):
        return -1j
    return cmath.exp(2j * cmath.pi * float(t))


def principal_power(z: complex, p: Fraction) -> complex:
    """``z^p = exp(p * Log z)`` on the principal branch."""
    z = complex(z)
    if p.denominator == 1:
        if z == 0 and p < 0:
            raise ZeroArgument("negative power of zero")
        return z ** int(p) if p != 0 else 1 + 0j
    if z == 0:
        raise ZeroArgument("fractional power of zero")
    return cmath.exp(float(p) * cmath.log(z))


@dataclass(frozen=True)
class FracMonomial:
    """The function ``z -> exp(2 pi i turn) * scale * z^exponent``.

    ``scale`` may be 0, which encodes a coefficient that vanishes
    identically (e.g. a sigma_l whose index is not on the lam-lattice).
    """

    turn: Fraction
    scale: Fraction
    exponent: Fraction

    def __post_init__(self):
        object.__setattr__(self, "turn", Fraction(self.turn) % 1)
        if self.scale < 0:
            raise ValueError("scale must be nonnegative; fold signs into the unit")

    @property
    def unit(self) -> complex:
        return _turn(self.turn)

    @property
    def is_zero(self) -> bool:
        return self.scale == 0

    def __call__(self, z) -> complex:
        z = complex(z)
        if z == 0:
            raise ZeroArgument("coefficient evaluated at z = 0")
        if self.scale == 0:
            return 0j
        return self.unit * float(self.scale) * principal_power(z, self.exponent)

    def __mul__(self, other: "FracMonomial") -> "FracMonomial":
        return FracMonomial(self.turn + other.turn, self.scale * other.scale, self.exponent + other.exponent)

    def to_dict(self) -> dict:
        u = self.unit
        return {
            "turn": [self.turn.numerator, self.turn.denominator],
            "unit": [u.real, u.imag],
            "scale": [self.scale.numerator, self.scale.denominator],
            "exponent": [self.exponent.numerator, self.exponent.denominator],
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "FracMonomial":
        return cls(Fraction(*rec["turn"]), Fraction(*rec["scale"]), Fraction(*rec["exponent"]))


ONE = FracMonomial(Fraction(0), Fraction(1), Fraction(0))


@dataclass(frozen=True)
class PhiSpec:
    """Pole location in one dimension: zero, or root ``index`` of ``u^lam = z^m``."""

    index: int | None = None
    lam: int = 1
    m: int = 1

    @property
    def pole_at_zero(self) -> bool:
        return self.index is None

    def __call__(self, z) -> complex:
        if self.index is None:
            return 0j
        return roots(self.lam, self.m, z)[self.index]

    def to_dict(self) -> dict:
        if self.index is None:
            return {"kind": "zero"}
        return {"kind": "root", "index": self.index, "lam": self.lam, "m": self.m}

    @classmethod
    def from_dict(cls, rec: dict) -> "PhiSpec":
        if rec["kind"] == "zero":
            return cls()
        return cls(int(rec["index"]), int(rec["lam"]), int(rec["m"]))


POLE_AT_ZERO = PhiSpec()


def roots(lam: int, m: int, z, shift: int = 0) -> list[complex]:
    """``[p zeta^(l+shift) for l < lam]`` with p the principal ``z^(m/lam)``."""
    z = complex(z)
    if z == 0:
        raise ZeroArgument("roots of u^lam = z^m requested at z = 0")
    p = principal_power(z, Fraction(m, lam))
    return [p * _turn(Fraction(l + shift, lam)) for l in range(lam)]


@dataclass(frozen=True)
class Pfd1D:
    lam: int
    mu: int
    m: int
    sigma: tuple[FracMonomial, ...]
    tau: tuple[FracMonomial, ...]
    shift: int = 0

    @property
    def root_unit(self) -> complex:
        return _turn(Fraction(1, self.lam))

    def phi(self, l: int) -> PhiSpec:
        return PhiSpec((l + self.shift) % self.lam, self.lam, self.m)

    def roots(self, z) -> list[complex]:
        return roots(self.lam, self.m, z, self.shift)


def pfd_1d(lam: int, mu: int, m: int, shift: int = 0) -> Pfd1D:
    """Closed-form sigma and tau for ``1/(u^(mu-lam+1) (u^lam - z^m))``.

    tau_l is the residue ``1/(lam phi_l^mu)`` at the simple root phi_l.
    sigma_l is the coefficient of ``u^-(l+1)`` in the Laurent expansion at 0,
    from ``1/(u^lam - z^m) = -sum_q z^(-m(q+1)) u^(lam q)``.
    """
    if lam < 1 or mu < 0 or m < 1:
        raise ValueError("need lam >= 1, mu >= 0, m >= 1")
    tau = []
    for l in range(lam):
        j = (l + shift) % lam
        tau.append(FracMonomial(Fraction(-j * mu, lam), Fraction(1, lam), Fraction(-m * mu, lam)))
    sigma = []
    for l in range(mu - lam + 1):
        q, rem = divmod(mu - lam - l, lam)
        if rem == 0:
            sigma.append(FracMonomial(Fraction(1, 2), Fraction(1), Fraction(-m * (q + 1))))
        else:
            sigma.append(FracMonomial(Fraction(0), Fraction(0), Fraction(0)))
    return Pfd1D(lam, mu, m, tuple(sigma), tuple(tau), shift % lam)


@dataclass(frozen=True)
class PfdTermND:
    ell: tuple[int, ...]
    nu: int
    eta_factors: tuple[FracMonomial, ...]
    phi_spec: tuple[PhiSpec, ...]

    def to_dict(self) -> dict:
        return {
            "ell": list(self.ell),
            "nu": self.nu,
            "factors": [dict(f.to_dict(), phi=p.to_dict()) for f, p in zip(self.eta_factors, self.phi_spec)],
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "PfdTermND":
        return cls(
            tuple(rec["ell"]),
            int(rec["nu"]),
            tuple(FracMonomial.from_dict(f) for f in rec["factors"]),
            tuple(PhiSpec.from_dict(f["phi"]) for f in rec["factors"]),
        )


@dataclass(frozen=True)
class PfdND:
    r: tuple[int, ...]
    terms: tuple[PfdTermND, ...]
    lam: tuple[int, ...]
    mu: tuple[int, ...]
    m: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.r)

    def multiplicity(self, ell: Sequence[int]) -> int:
        ell = tuple(ell)
        return sum(1 for t in self.terms if t.ell == ell)

    def to_dict(self) -> dict:
        return {
            "r": list(self.r),
            "lam": list(self.lam),
            "mu": list(self.mu),
            "m": list(self.m),
            "terms": [t.to_dict() for t in self.terms],
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "PfdND":
        return cls(
            tuple(rec["r"]),
            tuple(PfdTermND.from_dict(t) for t in rec["terms"]),
            tuple(rec["lam"]),
            tuple(rec["mu"]),
            tuple(rec["m"]),
        )


def basis_terms(p: Pfd1D) -> list[tuple[int, int, FracMonomial, PhiSpec]]:
    """One-dimensional L(r) as (ell, nu, eta, phi) tuples."""
    out = [(l, 0, p.sigma[l], POLE_AT_ZERO) for l in range(1, len(p.sigma))]
    out += [(0, l, p.tau[l], p.phi(l)) for l in range(p.lam)]
    if p.mu >= p.lam:
        out.append((0, p.lam, p.sigma[0], POLE_AT_ZERO))
    return out


def _product_step(prev, new):
    """Combine a (d-1)-dimensional term list with one more dimension.

    Terms sharing ell = (ell', ell'') are numbered by the lexicographic
    position of (nu', nu'') among all such pairs, starting at 0.
    """
    combos = {}
    for (l1, n1, eta1, phi1), (l2, n2, eta2, phi2) in itertools.product(prev, new):
        ell = l1 + (l2,)
        combos.setdefault(ell, []).append(((n1, n2), eta1 + (eta2,), phi1 + (phi2,)))
    out = []
    for ell, items in combos.items():
        items.sort(key=lambda it: it[0])
        for nu, (_, eta, phi) in enumerate(items):
            out.append((ell, nu, eta, phi))
    return out


def pfd_nd(cmap: CollatzMap, r: Sequence[int], shifts: Sequence[int] | None = None) -> PfdND:
    """L(r) with eta factors and pole specs for residue class r.

    ``shifts[j]`` rotates the root labelling in dimension j (p -> p zeta^s);
    the default 0 is the principal branch.
    """
    r = tuple(int(v) for v in r)
    if len(r) != cmap.d or any(not 0 <= rj < mj for rj, mj in zip(r, cmap.m)):
        raise BadResidue(f"r={list(r)} is not a residue vector of m={list(cmap.m)}")
    shifts = tuple(shifts) if shifts is not None else (0,) * cmap.d
    br = cmap.branch(r)
    ones = [pfd_1d(br.lam[j], br.mu[j], cmap.m[j], shifts[j]) for j in range(cmap.d)]
    terms = [((l,), nu, (eta,), (phi,)) for l, nu, eta, phi in basis_terms(ones[0])]
    for p in ones[1:]:
        terms = _product_step(terms, basis_terms(p))
    terms.sort(key=lambda t: (t[0], t[1]))
    built = tuple(PfdTermND(ell, nu, eta, phi) for ell, nu, eta, phi in terms)
    return PfdND(r, built, br.lam, br.mu, cmap.m)


def _vec(z, d):
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if z.shape != (d,):
        raise ValueError(f"expected {d} components")
    return z


def eval_eta(term: PfdTermND, z) -> complex:
    z = _vec(z, len(term.ell))
    val = 1 + 0j
    for f, zj in zip(term.eta_factors, z):
        val *= f(zj)
    return val


def eval_phi(term: PfdTermND, z) -> np.ndarray:
    z = _vec(z, len(term.ell))
    if np.any(z == 0):
        raise ZeroArgument("pole vector evaluated at z with a zero component")
    return np.array([p(zj) for p, zj in zip(term.phi_spec, z)], dtype=np.complex128)


def kernel_direct(lam, mu, m, u, z) -> complex:
    """``prod_j 1/(u_j^(mu_j-lam_j+1) (u_j^lam_j - z_j^m_j))`` by direct evaluation."""
    val = 1 + 0j
    for lj, uj, mj, a, b in zip(lam, mu, m, np.atleast_1d(u), np.atleast_1d(z)):
        a, b = complex(a), complex(b)
        val /= a ** (uj - lj + 1) * (a**lj - b**mj)
    return val


def recombine_eval(pfd: PfdND, u, z) -> complex:
    """``sum_terms eta(z) / prod_j (u_j - phi_j(z))^(ell_j + 1)``."""
    u = _vec(u, pfd.d)
    z = _vec(z, pfd.d)
    total = 0j
    for term in pfd.terms:
        phi = eval_phi(term, z)
        gap = u - phi
        if np.any(np.abs(gap) <= POLE_PROXIMITY * np.maximum(np.abs(u), 1e-300)):
            raise PoleProximity(f"u={u.tolist()} lies within {POLE_PROXIMITY:g} of a pole")
        denom = np.prod(gap ** (np.array(term.ell) + 1))
        total += eval_eta(term, z) / denom
    return total


def numeric_pfd_1d(lam: int, mu: int, m: int, z, samples: int | None = None):
    """Least-squares sigma and tau at one numeric z; an independent oracle.

    Fits ``sum sigma_l u^-(l+1) + sum tau_l/(u - phi_l)`` to the kernel on
    points spread over a circle that separates zero from the roots.
    """
    z = complex(z)
    phis = np.array(roots(lam, m, z))
    ns = max(mu - lam + 1, 0)
    unknowns = ns + lam
    samples = samples or 4 * unknowns + 8
    rad = 0.5 * abs(phis[0]) if ns else 1.5 * abs(phis[0])
    rad = rad if rad > 0 else 0.5
    theta = 2 * np.pi * (np.arange(samples) + 0.37) / samples
    u = rad * np.exp(1j * theta)
    cols = [u ** -(l + 1) for l in range(ns)] + [1 / (u - p) for p in phis]
    A = np.stack(cols, axis=1)
    rhs = np.array([kernel_direct([lam], [mu], [m], [ui], [z]) for ui in u])
    # scale rows so the fit is relative rather than dominated by large kernel values
    w = 1 / np.maximum(np.abs(rhs), 1e-300)
    sol, *_ = np.linalg.lstsq(A * w[:, None], rhs * w, rcond=None)
    return sol[:ns], sol[ns:], phis


def dump_pfd(pfd: PfdND) -> dict:
    return pfd.to_dict()


def load_pfd(rec: dict) -> PfdND:
    return PfdND.from_dict(rec)
