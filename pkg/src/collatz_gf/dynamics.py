"""Generalized Collatz maps on the lattice N_0^d.

A map is given by a modulus vector ``m`` and, for every residue vector
``r`` in ``R(m) = {0..m_1-1} x ... x {0..m_d-1}``, an affine branch
``n -> A_r n + b_r``.  Validation derives ``lambda_r = A_r m`` and
``mu_r = A_r r + b_r`` and certifies they are positive / nonnegative
integer vectors, after which ``t(q*m + r) = q*lambda_r + mu_r`` is exact
integer arithmetic.  Scalar maps are the ``d = 1`` case.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    ConditionCaViolated,
    ConditionCbViolated,
    MapValidationError,
    MissingResidueClass,
    NonDiagonalBranch,
)

MultiIndex = tuple[int, ...]


def to_rational(x) -> Fraction:
    """Coerce ints, Fractions, ``"p/q"`` strings and ``[p, q]`` pairs to a Fraction.

    Floats are rejected: decimal input is ambiguous for map data.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (list, tuple)) and len(x) == 2:
        num, den = x
        if isinstance(num, int) and isinstance(den, int) and not isinstance(num, bool):
            if den == 0:
                raise ZeroDivisionError("rational with zero denominator")
            return Fraction(num, den)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def residue_classes(m: Sequence[int]) -> list[MultiIndex]:
    """All residue vectors of ``m`` in lexicographic order (the canonical order)."""
    return list(itertools.product(*(range(mj) for mj in m)))


def residue_decompose(n: Sequence[int], m: Sequence[int]) -> tuple[MultiIndex, MultiIndex]:
    """Split ``n = q*m + r`` componentwise with ``0 <= r_j < m_j``."""
    if len(n) != len(m):
        raise ValueError(f"length mismatch: n has {len(n)} components, m has {len(m)}")
    q = tuple(nj // mj for nj, mj in zip(n, m))
    r = tuple(nj % mj for nj, mj in zip(n, m))
    return q, r


@dataclass(frozen=True)
class Branch:
    r: MultiIndex
    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    lam: MultiIndex
    mu: MultiIndex


@dataclass(frozen=True)
class GrowthBound:
    """Constants of the rough growth bound ``||t_k(n)|| <= amax^k (||n|| + chi) - chi``.

    ``amax`` is ``d * max|A entries|`` (``||a||`` when d = 1) and ``chi`` is
    ``None`` when ``amax == 1``.
    """

    amax: Fraction
    bmax: Fraction
    chi: Fraction | None


@dataclass(frozen=True)
class CollatzMap:
    """A validated (m, A, B)-Collatz map.  Construct with :func:`validate_map`."""

    d: int
    m: MultiIndex
    branches: tuple[Branch, ...]

    def branch(self, r: Sequence[int]) -> Branch:
        idx = 0
        for rj, mj in zip(r, self.m):
            idx = idx * mj + rj
        return self.branches[idx]

    @property
    def residues(self) -> list[MultiIndex]:
        return [br.r for br in self.branches]

    def lambda_max(self) -> MultiIndex:
        return tuple(max(br.lam[j] for br in self.branches) for j in range(self.d))

    @property
    def growth(self) -> GrowthBound:
        return growth_bound(self)


def _as_matrix(A, d: int, r) -> tuple[tuple[Fraction, ...], ...]:
    if d == 1 and not isinstance(A, (list, tuple)):
        A = [[A]]
    elif d == 1 and len(A) == 1 and not isinstance(A[0], (list, tuple)):
        A = [A]
    elif d == 1 and len(A) == 2 and all(isinstance(v, int) for v in A):
        # a bare [num, den] pair for a scalar map
        A = [[A]]
    rows = [tuple(to_rational(v) for v in row) for row in A]
    if len(rows) != d or any(len(row) != d for row in rows):
        raise MapValidationError(f"branch r={list(r)}: A must be a {d}x{d} matrix")
    return tuple(rows)


def _as_vector(b, d: int, r) -> tuple[Fraction, ...]:
    if d == 1 and not isinstance(b, (list, tuple)):
        b = [b]
    elif d == 1 and len(b) == 2 and all(isinstance(v, int) for v in b):
        b = [b]
    vec = tuple(to_rational(v) for v in b)
    if len(vec) != d:
        raise MapValidationError(f"branch r={list(r)}: b must have {d} components")
    return vec


def validate_map(d: int, m: Sequence[int], raw_branches: Mapping) -> CollatzMap:
    """Build a :class:`CollatzMap`, certifying conditions (C.a) and (C.b) for every r.

    ``raw_branches`` maps residue tuples (or bare ints when ``d == 1``) to
    ``(A_r, b_r)`` pairs.  Entries may be anything :func:`to_rational`
    accepts.  Residue classes are checked in lexicographic order and the
    first violation is raised.
    """
    if d < 1:
        raise MapValidationError("dimension d must be >= 1")
    m = tuple(int(mj) for mj in m)
    if len(m) != d or any(mj < 1 for mj in m):
        raise MapValidationError(f"m must be {d} positive integers, got {list(m)}")

    table = {}
    for key, value in raw_branches.items():
        rkey = (key,) if isinstance(key, int) else tuple(key)
        table[rkey] = value

    branches = []
    for r in residue_classes(m):
        if r not in table:
            raise MissingResidueClass(r)
        A_raw, b_raw = table[r]
        A = _as_matrix(A_raw, d, r)
        b = _as_vector(b_raw, d, r)
        lam_q = [sum(A[i][j] * m[j] for j in range(d)) for i in range(d)]
        for i, v in enumerate(lam_q):
            if v.denominator != 1 or v < 1:
                raise ConditionCaViolated(r, i, v, d)
        mu_q = [sum(A[i][j] * r[j] for j in range(d)) + b[i] for i in range(d)]
        for i, v in enumerate(mu_q):
            if v.denominator != 1 or v < 0:
                raise ConditionCbViolated(r, i, v, d)
        for i in range(d):
            for j in range(d):
                if i != j and A[i][j] != 0:
                    raise NonDiagonalBranch(r, i, j, A[i][j])
        branches.append(Branch(r, A, b, tuple(int(v) for v in lam_q), tuple(int(v) for v in mu_q)))
    extra = set(table) - set(residue_classes(m))
    if extra:
        raise MapValidationError(f"branches given for residues outside R(m): {sorted(extra)}")
    return CollatzMap(d, m, tuple(branches))


def scalar_map(m: int, a: Sequence, b: Sequence) -> CollatzMap:
    """The one-dimensional (m, a, b)-Collatz map."""
    if len(a) != m or len(b) != m:
        raise MapValidationError(f"a and b must have m={m} entries")
    return validate_map(1, (m,), {r: (a[r], b[r]) for r in range(m)})


def step(cmap: CollatzMap, n: Sequence[int]) -> MultiIndex:
    """One application ``t(n) = q*lambda_r + mu_r``."""
    q, r = residue_decompose(n, cmap.m)
    br = cmap.branch(r)
    return tuple(qj * lj + uj for qj, lj, uj in zip(q, br.lam, br.mu))


def iterate(cmap: CollatzMap, n: Sequence[int], k: int) -> list[MultiIndex]:
    """The orbit ``[t_0(n), ..., t_k(n)]``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    n = tuple(int(v) for v in n)
    if any(v < 0 for v in n):
        raise ValueError("orbit start must lie in N_0^d")
    orbit = [n]
    for _ in range(k):
        orbit.append(step(cmap, orbit[-1]))
    return orbit


def direct_step(cmap: CollatzMap, n: Sequence[int]) -> MultiIndex:
    """``A_r n + b_r`` in exact rational arithmetic; an oracle for :func:`step`."""
    _, r = residue_decompose(n, cmap.m)
    br = cmap.branch(r)
    out = []
    for i in range(cmap.d):
        v = sum(br.A[i][j] * n[j] for j in range(cmap.d)) + br.b[i]
        if v.denominator != 1:
            raise ArithmeticError(f"A_r n + b_r left the lattice at n={list(n)}")
        out.append(int(v))
    return tuple(out)


def growth_bound(cmap: CollatzMap) -> GrowthBound:
    amax = cmap.d * max(abs(v) for br in cmap.branches for row in br.A for v in row)
    bmax = max(abs(v) for br in cmap.branches for v in br.b)
    chi = None if amax == 1 else bmax / (amax - 1)
    return GrowthBound(Fraction(amax), Fraction(bmax), chi)


def coefficient_bound(cmap: CollatzMap, n: Sequence[int], k: int) -> Fraction:
    """Exact upper bound on ``||t_k(n)||_inf`` from the rough growth estimate."""
    g = cmap.growth
    norm = max(int(v) for v in n)
    if g.chi is None:
        return norm + g.bmax * k
    return g.amax**k * (norm + g.chi) - g.chi


def product_constant(cmap: CollatzMap, k: int) -> Fraction:
    """``C_k`` with ``||t_k(n)||_inf <= C_k * prod_j (n_j + 1)``."""
    g = cmap.growth
    if g.chi is None:
        return g.bmax * k + 1
    return (abs(g.chi) + 1) * (g.amax**k + 1)


def radius_R_w(cmap: CollatzMap) -> Fraction:
    """Proven lower bound ``min(1/amax, 1)`` on the convergence radius of F in w."""
    return min(1 / cmap.growth.amax, Fraction(1))


def lattice_points(limits: Iterable[int]) -> Iterable[MultiIndex]:
    return itertools.product(*(range(n) for n in limits))
