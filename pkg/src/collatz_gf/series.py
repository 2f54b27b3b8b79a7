"""Box-truncated power series for the orbit generating functions.

``f_k(z) = sum_n t_k(n) z^n`` is stored densely over the box
``n_j < N_j``.  Coefficients are complex doubles; the integer orbit values
behind them are produced exactly and converted at the end.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .dynamics import CollatzMap, product_constant
from .errors import OutOfBox, TruncationTooLarge

DEFAULT_BUDGET = 1 << 22
_INT64_SAFE = 1 << 62


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    d: int
    limits: tuple[int, ...]
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != tuple(self.limits):
            raise ValueError(f"coefficient array shape {self.coeffs.shape} != limits {self.limits}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("series coefficients must be finite")
        self.coeffs.setflags(write=False)

    def __eq__(self, other):
        return (
            isinstance(other, TruncatedSeries)
            and self.limits == other.limits
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def scaled(self, c) -> "TruncatedSeries":
        return TruncatedSeries(self.d, self.limits, self.coeffs * c)


@dataclass(frozen=True, eq=False)
class SeriesVector:
    components: tuple[TruncatedSeries, ...]

    @property
    def d(self) -> int:
        return self.components[0].d

    @property
    def limits(self) -> tuple[int, ...]:
        return self.components[0].limits

    def __getitem__(self, j) -> TruncatedSeries:
        return self.components[j]

    def __len__(self):
        return len(self.components)

    def __eq__(self, other):
        return isinstance(other, SeriesVector) and all(
            a == b for a, b in zip(self.components, other.components)
        ) and len(self) == len(other)


def _check_limits(limits, d, budget):
    limits = tuple(int(v) for v in limits)
    if len(limits) != d or any(v < 1 for v in limits):
        raise ValueError(f"limits must be {d} positive integers, got {list(limits)}")
    size = math.prod(limits)
    if size > budget:
        raise TruncationTooLarge(f"truncation box {list(limits)} has {size} terms, budget is {budget}")
    return limits


def _branch_tables(cmap: CollatzMap):
    lam = np.array([br.lam for br in cmap.branches], dtype=np.int64)
    mu = np.array([br.mu for br in cmap.branches], dtype=np.int64)
    strides = []
    acc = 1
    for mj in reversed(cmap.m):
        strides.append(acc)
        acc *= mj
    return lam, mu, tuple(reversed(strides))


def _step_array(cmap: CollatzMap, n: np.ndarray, tables) -> np.ndarray:
    """Apply t to every lattice point stored along axes 1.. of ``n`` (axis 0 = component)."""
    lam, mu, strides = tables
    if n.dtype != object:
        top = int(n.max(initial=0)) * int(lam.max()) + int(mu.max())
        if top >= _INT64_SAFE:
            n = n.astype(object)
    idx = np.zeros(n.shape[1:], dtype=np.int64)
    q = np.empty_like(n)
    for j, mj in enumerate(cmap.m):
        q[j] = n[j] // mj
        idx += (n[j] % mj).astype(np.int64) * strides[j]
    out = np.empty_like(n)
    for j in range(cmap.d):
        lj, uj = lam[idx, j], mu[idx, j]
        if n.dtype == object:
            lj, uj = lj.astype(object), uj.astype(object)
        out[j] = q[j] * lj + uj
    return out


def lattice_grid(limits: Sequence[int]) -> np.ndarray:
    """Array of shape (d, *limits) holding every n in the box."""
    return np.stack(np.meshgrid(*(np.arange(v, dtype=np.int64) for v in limits), indexing="ij"))


def orbit_tables(cmap: CollatzMap, k_max: int, limits: Sequence[int], budget: int = DEFAULT_BUDGET):
    """Exact integer arrays ``t_k(n)`` over the box for k = 0..k_max.

    Each entry has shape (d, *limits); int64 while that is provably safe,
    Python ints (object dtype) afterwards.
    """
    limits = _check_limits(limits, cmap.d, budget)
    tables = _branch_tables(cmap)
    cur = lattice_grid(limits)
    out = [cur]
    for _ in range(k_max):
        cur = _step_array(cmap, cur, tables)
        out.append(cur)
    return out


def _to_vector(arr: np.ndarray, limits) -> SeriesVector:
    d = arr.shape[0]
    comps = []
    for j in range(d):
        c = np.asarray(arr[j].astype(np.float64), dtype=np.complex128)
        comps.append(TruncatedSeries(d, tuple(limits), c))
    return SeriesVector(tuple(comps))


def orbit_series(cmap: CollatzMap, k: int, limits: Sequence[int], budget: int = DEFAULT_BUDGET) -> SeriesVector:
    """Truncation of ``f_k`` over the box ``limits``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    tabs = orbit_tables(cmap, k, limits, budget)
    return _to_vector(tabs[-1], tabs[-1].shape[1:])


def orbit_series_range(cmap: CollatzMap, k_max: int, limits: Sequence[int], budget: int = DEFAULT_BUDGET):
    """``[f_0, ..., f_{k_max}]`` truncated to one box, sharing a single orbit sweep."""
    tabs = orbit_tables(cmap, k_max, limits, budget)
    return [_to_vector(t, t.shape[1:]) for t in tabs]


def zero_series(d: int, limits: Sequence[int]) -> TruncatedSeries:
    limits = tuple(limits)
    return TruncatedSeries(d, limits, np.zeros(limits, dtype=np.complex128))


def _point(z, d):
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if z.shape != (d,):
        raise ValueError(f"evaluation point must have {d} components")
    return z


def _nested_polyval(c: np.ndarray, z) -> complex:
    # Horner along axis 0, then the next variable, and so on
    val = c
    for zj in z:
        val = P.polyval(zj, val, tensor=False)
    return complex(val)


def eval_series(s: TruncatedSeries, z) -> complex:
    """``sum_{n in box} c_n z^n`` by nested Horner evaluation."""
    return _nested_polyval(s.coeffs, _point(z, s.d))


def coefficient(s: TruncatedSeries, n: Sequence[int]) -> complex:
    n = tuple(int(v) for v in n)
    if len(n) != s.d or any(v < 0 or v >= N for v, N in zip(n, s.limits)):
        raise OutOfBox(f"multi-index {list(n)} outside truncation box {list(s.limits)}")
    return complex(s.coeffs[n])


def derivative_coeffs(s: TruncatedSeries, ell: Sequence[int]) -> np.ndarray:
    c = s.coeffs
    for axis, lj in enumerate(ell):
        if lj < 0 or lj >= s.limits[axis]:
            raise OutOfBox(f"derivative order {list(ell)} outside truncation box {list(s.limits)}")
        if lj:
            c = P.polyder(c, lj, axis=axis)
    return c


def eval_derivative(s: TruncatedSeries, ell: Sequence[int], z) -> complex:
    """``d^ell/dz^ell`` of the truncated polynomial at ``z``."""
    ell = tuple(int(v) for v in ell)
    if len(ell) != s.d:
        raise ValueError(f"derivative order must have {s.d} components")
    return _nested_polyval(derivative_coeffs(s, ell), _point(z, s.d))


@functools.lru_cache(maxsize=16)
def _phase_table(M: int, N: int) -> np.ndarray:
    # exp(2 pi i s n / M) depends only on s*n mod M, so index a table of M roots
    s = np.arange(M, dtype=np.int64)[:, None]
    n = np.arange(N, dtype=np.int64)[None, :]
    roots = np.exp(2j * np.pi * np.arange(M) / M)
    table = roots[(s * n) % M]
    table.setflags(write=False)
    return table


def circle_powers(rho: float, M: int, N: int) -> np.ndarray:
    """``V[s, n] = (rho * exp(2 pi i s / M))**n`` with the angle reduced exactly mod M."""
    return _phase_table(M, N) * (float(rho) ** np.arange(N))[None, :]


def eval_grid(s: TruncatedSeries, radii: Sequence[float], M: int) -> np.ndarray:
    """Values on the tensor grid of M equispaced nodes per circle; shape (M,)*d."""
    out = s.coeffs
    for j in range(s.d):
        V = circle_powers(radii[j], M, s.limits[j])
        # contract the current leading coefficient axis; the node axis goes to the back
        out = np.tensordot(out, V, axes=([0], [1]))
    return out


def _falling(n: int, ell: int) -> float:
    return float(math.perm(n, ell)) if n >= ell else 0.0


def full_moment(ell: int, rho: float) -> float:
    """``sum_{n>=0} (n+1) * n!/(n-ell)! * rho^(n-ell) = (ell+1)!/(1-rho)^(ell+2)``."""
    if rho >= 1:
        return math.inf
    return math.factorial(ell + 1) / (1.0 - rho) ** (ell + 2)


def tail_moment(ell: int, rho: float, N: int) -> float:
    """Upper bound on ``sum_{n>=N} (n+1) * n!/(n-ell)! * rho^(n-ell)``."""
    if rho >= 1:
        return math.inf
    if rho == 0:
        return 0.0 if N > ell else float(math.factorial(ell + 1))
    if ell == 0:
        return rho**N * ((N + 1) * (1 - rho) + rho) / (1 - rho) ** 2
    n = max(N, ell)
    log_term = math.log(n + 1) + math.lgamma(n + 1) - math.lgamma(n - ell + 1) + (n - ell) * math.log(rho)
    total = 0.0
    while True:
        term = math.exp(log_term) if log_term > -745 else 0.0
        total += term
        # a_{n+1}/a_n = (n+2) rho/(n+1-ell) decreases in n, so it bounds every later ratio
        q = (n + 2) * rho / (n + 1 - ell)
        if q < 1:
            rest = term * q / (1 - q)
            if rest <= 1e-17 * total or rest < 1e-300:
                return total + rest
        log_term += math.log(q)
        n += 1


def tail_bound(cmap: CollatzMap, k: int, limits: Sequence[int], rho: Sequence[float], ell: Sequence[int] | None = None) -> float:
    """Bound on ``|sum_{n outside box} t_{j,k}(n) d^ell z^n|`` over ``|z_i| <= rho_i``, all j.

    Uses ``|t_{j,k}(n)| <= C_k prod(n_i + 1)`` and a union bound over the
    dimensions in which n leaves the box.
    """
    d = cmap.d
    ell = (0,) * d if ell is None else tuple(ell)
    rho = [float(v) for v in rho]
    if any(r < 0 for r in rho):
        raise ValueError("radii must be nonnegative")
    C = float(product_constant(cmap, k))
    full = [full_moment(ell[i], rho[i]) for i in range(d)]
    total = 0.0
    for j in range(d):
        t = tail_moment(ell[j], rho[j], int(limits[j]))
        if t == 0.0:
            continue
        others = math.prod(full[i] for i in range(d) if i != j)
        total += t * others
    return C * total


def _f0_factor_g(x: complex, ell: int) -> complex:
    # d^ell of x/(1-x)^2 = 1/(1-x)^2 - 1/(1-x)
    y = 1.0 - x
    return math.factorial(ell + 1) / y ** (ell + 2) - math.factorial(ell) / y ** (ell + 1)


def _f0_factor_h(x: complex, ell: int) -> complex:
    return math.factorial(ell) / (1.0 - x) ** (ell + 1)


def closed_form_f0(cmap_or_d, z, ell: Sequence[int] | None = None) -> np.ndarray:
    """``d^ell f_{j,0}(z)`` from ``f_{j,0} = z_j / ((1-z_j)^2 prod_{i != j} (1-z_i))``."""
    d = cmap_or_d if isinstance(cmap_or_d, int) else cmap_or_d.d
    z = _point(z, d)
    if np.any(np.abs(z) >= 1):
        raise ValueError("closed form of f_0 requires |z_j| < 1")
    ell = (0,) * d if ell is None else tuple(ell)
    out = np.empty(d, dtype=np.complex128)
    for j in range(d):
        val = _f0_factor_g(z[j], ell[j])
        for i in range(d):
            if i != j:
                val *= _f0_factor_h(z[i], ell[i])
        out[j] = val
    return out


def dump_series(s: TruncatedSeries) -> dict:
    flat = s.coeffs.reshape(-1)
    return {
        "d": s.d,
        "limits": list(s.limits),
        "coeffs": [[float(c.real), float(c.imag)] for c in flat],
    }


def load_series(rec: dict) -> TruncatedSeries:
    limits = tuple(int(v) for v in rec["limits"])
    pairs = np.asarray(rec["coeffs"], dtype=np.float64).reshape(-1, 2)
    if pairs.shape[0] != math.prod(limits):
        raise ValueError("coefficient list length does not match limits")
    coeffs = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(limits)
    return TruncatedSeries(int(rec["d"]), limits, coeffs)
