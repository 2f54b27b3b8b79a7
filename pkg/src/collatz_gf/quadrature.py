"""Periodic trapezoidal rule on circles and poly-circles.

``(1/2 pi i) \\oint_{|u|=rho} f(u) du`` becomes ``(1/M) sum_s f(u_s) u_s`` with
``u_s = rho exp(2 pi i s/M)``.  Every integral is evaluated on 2M nodes; the
reported value is the M-node rule (the even-indexed subset) and
``est_error`` is its distance to the 2M-node rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import CollatzMap
from .errors import BudgetExceeded, DomainViolation, NonFiniteSample
from .series import SeriesVector, TruncatedSeries, eval_grid

MAX_DIM = 3
MAX_NODES = 1 << 24
DEFAULT_M = 512


@dataclass(frozen=True)
class PolyCircle:
    radii: tuple[float, ...]
    nodes_per_circle: int = DEFAULT_M

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in np.atleast_1d(self.radii)))
        if any(not r > 0 for r in self.radii):
            raise ValueError("poly-circle radii must be positive")
        if self.nodes_per_circle < 4:
            raise ValueError("need at least 4 nodes per circle")

    @property
    def d(self) -> int:
        return len(self.radii)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    nodes_used: int
    est_error: float


def circle_nodes(rho: float, M: int) -> np.ndarray:
    s = np.arange(M)
    return rho * np.exp(2j * np.pi * s / M)


def _fsum_mean(vals: np.ndarray) -> complex:
    flat = vals.reshape(-1)
    return complex(math.fsum(flat.real), math.fsum(flat.imag)) / flat.size


def _finalize(weighted: np.ndarray, M: int) -> QuadratureResult:
    """``weighted`` holds f(u) prod(u_j) on the (2M)^d grid."""
    if not np.all(np.isfinite(weighted)):
        raise NonFiniteSample("integrand is not finite at some quadrature node")
    d = weighted.ndim
    fine = _fsum_mean(weighted)
    coarse = _fsum_mean(weighted[(slice(None, None, 2),) * d])
    return QuadratureResult(coarse, weighted.size, abs(coarse - fine))


def _check_budget(d: int, M: int):
    if d > MAX_DIM:
        raise BudgetExceeded(f"tensor quadrature supports d <= {MAX_DIM}, got d = {d}")
    if (2 * M) ** d > MAX_NODES:
        raise BudgetExceeded(f"{(2 * M) ** d} nodes exceed the budget of {MAX_NODES}")


def circle_integral(f: Callable, rho: float, M: int = DEFAULT_M) -> QuadratureResult:
    """``(1/2 pi i) \\oint_{|u|=rho} f(u) du``; ``f`` must accept an array of nodes."""
    if M < 4:
        raise ValueError("need at least 4 nodes")
    u = circle_nodes(rho, 2 * M)
    with np.errstate(all="ignore"):
        vals = np.asarray(f(u), dtype=np.complex128) * u
    return _finalize(vals, M)


def grid_nodes(pc: PolyCircle, factor: int = 2) -> list[np.ndarray]:
    return [circle_nodes(r, factor * pc.nodes_per_circle) for r in pc.radii]


def polycircle_integral(f: Callable, pc: PolyCircle) -> QuadratureResult:
    """Tensor-product rule; ``f`` receives d broadcastable node arrays."""
    _check_budget(pc.d, pc.nodes_per_circle)
    nodes = grid_nodes(pc)
    U = np.meshgrid(*nodes, indexing="ij", sparse=True)
    with np.errstate(all="ignore"):
        vals = np.asarray(f(*U), dtype=np.complex128)
    vals = np.broadcast_to(vals, tuple(len(n) for n in nodes))
    weight = 1.0
    for Uj in U:
        weight = weight * Uj
    return _finalize(vals * weight, pc.nodes_per_circle)


def choose_radius(cmap: CollatzMap, z, position: float = 0.5) -> tuple[float, ...]:
    """``rho_j = lo_j + position (1 - lo_j)`` with ``lo_j = |z_j|^(m_j/lam_j^max)``.

    ``position = 0.5`` is the midpoint of the admissible interval.
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if z.shape != (cmap.d,):
        raise ValueError(f"z must have {cmap.d} components")
    if not 0 < position < 1:
        raise ValueError("position must lie strictly inside (0, 1)")
    lam_max = cmap.lambda_max()
    out = []
    for j, zj in enumerate(z):
        a = abs(zj)
        if not 0 < a < 1:
            raise DomainViolation(f"|z_{j + 1}| = {a:g} is outside (0, 1)")
        lo = a ** (cmap.m[j] / lam_max[j])
        out.append(lo + position * (1.0 - lo))
    return tuple(out)


def total_kernel(cmap: CollatzMap, z, U: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_r z^r prod_j 1/(u_j^(mu-lam+1) (u_j^lam - z_j^m))`` on broadcastable node arrays."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    total = 0
    for br in cmap.branches:
        term = complex(np.prod(z ** np.array(br.r)))
        for j in range(cmap.d):
            e = br.mu[j] - br.lam[j] + 1
            term = term / (U[j] ** e * (U[j] ** br.lam[j] - z[j] ** cmap.m[j]))
        total = total + term
    return total


def contour_recursion_terms(cmap: CollatzMap, f_prev: SeriesVector, z, pc: PolyCircle) -> list[QuadratureResult]:
    """Per-component quadrature of ``sum_r z^r (2 pi i)^-d \\oint kernel_r f_prev du``."""
    if pc.d != cmap.d:
        raise ValueError("poly-circle dimension does not match the map")
    _check_budget(pc.d, pc.nodes_per_circle)
    nodes = grid_nodes(pc)
    U = np.meshgrid(*nodes, indexing="ij", sparse=True)
    with np.errstate(all="ignore"):
        K = total_kernel(cmap, z, U)
    weight = 1.0
    for Uj in U:
        weight = weight * Uj
    Kw = np.broadcast_to(K * weight, tuple(len(n) for n in nodes))
    out = []
    for comp in f_prev.components:
        F = eval_grid(comp, pc.radii, 2 * pc.nodes_per_circle)
        out.append(_finalize(Kw * F, pc.nodes_per_circle))
    return out


def contour_recursion_rhs(cmap: CollatzMap, f_prev: SeriesVector, z, pc: PolyCircle) -> np.ndarray:
    return np.array([q.value for q in contour_recursion_terms(cmap, f_prev, z, pc)])


def coefficient_by_quadrature(s: TruncatedSeries, n: Sequence[int], radii: Sequence[float], M: int) -> QuadratureResult:
    """Cauchy formula ``c_n = (2 pi i)^-d \\oint f(u) u^(-n-1) du`` on the poly-circle."""
    pc = PolyCircle(tuple(radii), M)
    _check_budget(pc.d, M)
    F = eval_grid(s, pc.radii, 2 * M)
    nodes = grid_nodes(pc)
    U = np.meshgrid(*nodes, indexing="ij", sparse=True)
    w = 1.0
    for Uj, nj in zip(U, n):
        w = w * Uj ** (-int(nj))
    return _finalize(F * w, M)
