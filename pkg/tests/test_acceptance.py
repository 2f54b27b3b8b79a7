"""One test per acceptance criterion; each logs a PASS/FAIL line shown in the pytest summary."""

import time

import numpy as np
import pytest

from collatz_gf.errors import DomainViolation, PoleProximity
from collatz_gf.pfd import kernel_direct, pfd_1d, pfd_nd, recombine_eval
from collatz_gf.presets import PRESETS, get_preset
from collatz_gf.verify import (
    CheckSpec,
    check_bivariate,
    check_bound,
    check_branch_invariance,
    check_contour,
    check_corollary_structure,
    check_delta_identity,
    check_recurrence,
    structure_hypotheses,
)

ZETA3 = np.exp(2j * np.pi / 3)


def criterion(log, label, ok, text):
    line = f"{'PASS' if ok else 'FAIL'} [{label}] {text}"
    log.append(line)
    print(line)
    assert ok, line


def test_1_functional_recurrence(acceptance_log):
    t0 = time.perf_counter()
    worst, ok = 0.0, True
    for name in ("3n+1", "3n-1"):
        rep = check_recurrence(get_preset(name), CheckSpec("recurrence", ks=(1, 2, 3, 4), limits=(2000,)))
        worst = max(worst, rep.max_residual)
        ok &= rep.all_pass and len(rep.records) == 4 * 12 + 12
    dt = time.perf_counter() - t0
    criterion(acceptance_log, "1", ok and worst <= 1e-9 and dt < 10,
              f"recurrence 3n+1/3n-1 k=1..4 N=2000: max residual {worst:.2e} <= 1e-9, {dt:.1f}s < 10s")


def test_2_contour_recursion(acceptance_log):
    t0 = time.perf_counter()
    w = {"quadrature_vs_residue": 0.0, "quadrature_vs_direct": 0.0, "radius_robustness": 0.0}
    ok = True
    for name in ("3n+1", "3n-1"):
        rep = check_contour(get_preset(name), CheckSpec("contour", ks=(1, 2, 3, 4), limits=(2000,), quad_nodes=512))
        ok &= rep.all_pass
        for c in w:
            w[c] = max(w[c], rep.worst(c))
    dt = time.perf_counter() - t0
    ok &= w["quadrature_vs_residue"] <= 1e-10 and w["quadrature_vs_direct"] <= 1e-9
    ok &= w["radius_robustness"] <= 1e-10 and dt < 30
    criterion(acceptance_log, "2", ok,
              f"contour M=512: vs residue {w['quadrature_vs_residue']:.2e} <= 1e-10, "
              f"vs direct {w['quadrature_vs_direct']:.2e} <= 1e-9, "
              f"second radius {w['radius_robustness']:.2e} <= 1e-10, {dt:.1f}s < 30s")


def test_3_bivariate(acceptance_log):
    cmap = get_preset("3n+1")
    pts = ((0.3,),)
    rep = check_bivariate(cmap, CheckSpec("bivariate", w_values=(0.2, 0.4, 0.4j), K=40, limits=(2000,), sample_points=pts))
    zero = check_bivariate(cmap, CheckSpec("bivariate", w_values=(0,), limits=(2000,), sample_points=pts))
    try:
        check_bivariate(cmap, CheckSpec("bivariate", w_values=(0.7,), K=40, limits=(2000,), sample_points=pts))
        rejected = False
    except DomainViolation:
        rejected = True
    ok = rep.all_pass and rep.max_residual <= 1e-6 and zero.max_residual <= 1e-12 and rejected
    criterion(acceptance_log, "3", ok,
              f"bivariate z=0.3 K=40: max residual {rep.max_residual:.2e} <= 1e-6, "
              f"w=0 {zero.max_residual:.2e} <= 1e-12, w=0.7 rejected={rejected}")


def test_4_multidimensional(acceptance_log):
    t0 = time.perf_counter()
    worst, ok = 0.0, True
    for name in ("double-3n+1", "coupled-2d"):
        cmap = get_preset(name)
        for kind, fn in (("recurrence", check_recurrence), ("contour", check_contour)):
            rep = fn(cmap, CheckSpec(kind, ks=(1, 2, 3), limits=(96, 96), quad_nodes=128))
            ok &= rep.all_pass
            worst = max(worst, rep.max_residual)
        ok &= check_corollary_structure(cmap).all_pass
    dt = time.perf_counter() - t0
    criterion(acceptance_log, "4", ok and worst <= 1e-8 and dt < 120,
              f"2-D presets k=1..3 N=96 M=128: max residual {worst:.2e} <= 1e-8, L(r) structure ok={ok}, {dt:.1f}s < 120s")


def test_5_pfd_recombination(acceptance_log):
    rng = np.random.default_rng(5)
    worst = 0.0
    for name in sorted(PRESETS):
        cmap = get_preset(name)
        for r in cmap.residues:
            pfd = pfd_nd(cmap, r)
            done = 0
            while done < 50:
                u = rng.uniform(0.1, 1.2, cmap.d) * np.exp(2j * np.pi * rng.random(cmap.d))
                z = rng.uniform(0.1, 0.95, cmap.d) * np.exp(2j * np.pi * rng.random(cmap.d))
                try:
                    got = recombine_eval(pfd, u, z)
                except PoleProximity:
                    continue
                direct = kernel_direct(pfd.lam, pfd.mu, pfd.m, u, z)
                worst = max(worst, abs(got - direct) / abs(direct))
                done += 1
    ex = 0.0
    p1, p2 = pfd_1d(3, 2, 2), pfd_1d(3, 1, 2)
    for z in rng.uniform(0.1, 0.95, 10) * np.exp(2j * np.pi * rng.random(10)):
        for l in range(3):
            a = ZETA3**l / (3 * z ** (4 / 3))
            b = ZETA3 ** (-l) / (3 * z ** (2 / 3))
            ex = max(ex, abs(p1.tau[l](z) - a) / abs(a), abs(p2.tau[l](z) - b) / abs(b))
    criterion(acceptance_log, "5", worst <= 1e-10 and ex <= 1e-12,
              f"PFD recombination relative error {worst:.2e} <= 1e-10, closed-form tau {ex:.2e} <= 1e-12")


def test_6_delta_identities(acceptance_log):
    rep = check_delta_identity(M=64, d_values=(1, 2))
    criterion(acceptance_log, "6", rep.all_pass and rep.max_residual <= 1e-14,
              f"Kronecker delta 1-D and 2-D, |n-k| < M=64: max residual {rep.max_residual:.2e} <= 1e-14")


def test_7_growth_bound(acceptance_log):
    t0 = time.perf_counter()
    rep = check_bound(get_preset("3n+1"), 10_000, 30)
    dt = time.perf_counter() - t0
    viol = sum(r.detail["violations"] for r in rep.records)
    criterion(acceptance_log, "7", rep.all_pass and viol == 0 and dt < 20,
              f"t_k(n) <= (3/2)^k (n+1) - 1 for n <= 10^4, k <= 30: {viol} violations, {dt:.1f}s < 20s")


def test_8_branch_invariance(acceptance_log):
    worst, ok = 0.0, True
    for name in sorted(PRESETS):
        cmap = get_preset(name)
        lim = (2000,) if cmap.d == 1 else (96, 96)
        ks = (1, 2, 3, 4) if cmap.d == 1 else (1, 2, 3)
        rep = check_branch_invariance(cmap, CheckSpec("branch_invariance", ks=ks, limits=lim))
        ok &= rep.all_pass
        worst = max(worst, rep.max_residual)
    criterion(acceptance_log, "8", ok and worst <= 1e-10,
              f"rotated roots, all presets, default points: max change {worst:.2e} <= 1e-10")


def test_9_corollary_structure(acceptance_log):
    ok = all(check_corollary_structure(get_preset(n)).all_pass for n in PRESETS)
    sigma_free = [n for n in PRESETS if structure_hypotheses(get_preset(n))["roots_only"]]
    for n in sigma_free:
        c = get_preset(n)
        ok &= all(not p.pole_at_zero for r in c.residues for t in pfd_nd(c, r).terms for p in t.phi_spec)
        ok &= all(t.ell == (0,) * c.d for r in c.residues for t in pfd_nd(c, r).terms)
    s2 = get_preset("shift-2")
    has_ell = any(any(t.ell) for t in pfd_nd(s2, (0,)).terms)
    ok &= has_ell and not structure_hypotheses(s2)["no_derivative_terms"]
    criterion(acceptance_log, "9", ok,
              f"sigma-free and ell=0-only for {', '.join(sorted(sigma_free))}; shift-2 has ell>0 terms={has_ell}")
