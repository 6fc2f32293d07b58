"""Closed-form thermal density operators for the su(2) and su(1,1) thermal coherent states.

All factorials enter through ``gammaln`` with phases carried separately, so
coefficients stay finite far past 170!.  Truncation is rectangular in the
physical occupations; the discarded trace weight is certified exactly from
negative-binomial tails (each (n1, n2) block of rho is rank one and positive).
"""

from __future__ import annotations

import cmath
import math
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import stats
from scipy.special import gammaln

from .fock import DensityOperator, FockSpace, check_dense, make_space
from .liealg import TailError, su11_amplitudes, su11_tail, su2_amplitudes
from .tfd import ThermalContext

__all__ = [
    "AUTO_SAFETY",
    "auto_cutoff_su11",
    "auto_cutoff_su2",
    "c_coeff_su2",
    "gamma_coeff_su11",
    "identity_resolution_su2",
    "identity_resolution_su2_thermal",
    "overlap_hw",
    "overlap_su11",
    "overlap_su2",
    "rho_su11",
    "rho_su2",
    "su11_n_cap",
    "su11_rho_tail",
    "su2_rho_tail",
    "trace_su11",
]

AUTO_SAFETY = 1.5
PURE_TAIL_CAP = 1e-32

CoeffHook = Callable[[np.ndarray, dict], np.ndarray]


def _lf(k):
    """log k!"""
    return gammaln(np.asarray(k, dtype=float) + 1.0)


def _klog(k, log_abs: float):
    """k * log|w| with the convention 0 * log 0 = 0."""
    k = np.asarray(k, dtype=float)
    if log_abs == -math.inf:
        return np.where(k == 0, 0.0, -np.inf)
    return k * log_abs


def _safe_log(value: float) -> float:
    return math.log(value) if value > 0 else -math.inf


def _twice(j) -> int:
    twice = 2 * float(j)
    if abs(twice - round(twice)) > 1e-12 or round(twice) < 1:
        raise ValueError(f"j must be a positive half-integer, got {j}")
    return int(round(twice))


def _require_thermal(ctx: ThermalContext) -> None:
    if ctx.x <= 0.0:
        raise ValueError("closed-form thermal coefficients need x > 0")


# --- su(2) -------------------------------------------------------------------


def _c_su2(twice_j: int, z: complex, ctx: ThermalContext, jm, jmp, n1, n2) -> np.ndarray:
    """Vectorized C coefficient; ``jm = j + m`` and ``jmp = j + m'`` are integers."""
    jm, jmp, n1, n2 = (np.asarray(a, dtype=float) for a in (jm, jmp, n1, n2))
    J = twice_j
    log_z = _safe_log(abs(z))
    with np.errstate(invalid="ignore"):
        log_mag = (
            0.5 * (_lf(J) - _lf(jm) - _lf(J - jm))
            + 0.5 * (_lf(J) - _lf(jmp) - _lf(J - jmp))
            + _klog(jm, log_z)
            + _klog(jmp, log_z)
            - J * math.log1p(abs(z) ** 2)
            - ctx.x * (n1 + n2)
            + (J + 2) * math.log(ctx.one_minus)
            - 0.5 * (_lf(jm) + _lf(J - jm) + _lf(jmp) + _lf(J - jmp))
            + 0.5 * (_lf(n1 + jm) - _lf(n1) + _lf(n2 + J - jm) - _lf(n2))
            + 0.5 * (_lf(n1 + jmp) - _lf(n1) + _lf(n2 + J - jmp) - _lf(n2))
        )
    phase = np.exp(1j * (jm - jmp) * cmath.phase(complex(z)))
    return np.exp(log_mag) * phase


def c_coeff_su2(j, z: complex, ctx: ThermalContext, m, m_prime, n1: int, n2: int) -> complex:
    """Density-matrix coefficient C^{m,m'}_{n1,n2}(z, beta) of the su(2) thermal coherent state."""
    twice = _twice(j)
    jm, jmp = m + twice / 2, m_prime + twice / 2
    for val in (jm, jmp):
        if abs(val - round(val)) > 1e-12 or not 0 <= round(val) <= twice:
            raise ValueError(f"m, m' must lie in -j..j in integer steps (got {m}, {m_prime})")
    if n1 < 0 or n2 < 0:
        raise ValueError("n1, n2 must be nonnegative")
    _require_thermal(ctx)
    return complex(_c_su2(twice, complex(z), ctx, round(jm), round(jmp), n1, n2))


def su2_rho_tail(j, z: complex, ctx: ThermalContext, cutoff: int) -> float:
    """Exact trace weight of the su(2) thermal state outside the per-mode cutoff."""
    J = _twice(j)
    t = ctx.boltzmann_factor
    jm = np.arange(J + 1)
    weights = np.abs(su2_amplitudes(J, z)) ** 2
    s1 = stats.nbinom.sf(cutoff - jm, jm + 1, 1.0 - t)
    s2 = stats.nbinom.sf(cutoff - (J - jm), J - jm + 1, 1.0 - t)
    return float(np.sum(weights * (s1 + s2 - s1 * s2)))


def _smallest_cutoff(tail: Callable[[int], float], start: int, tol: float) -> int:
    hi = max(start, 1)
    while tail(hi) > tol:
        hi *= 2
    lo = start
    while lo < hi:
        mid = (lo + hi) // 2
        if tail(mid) <= tol:
            hi = mid
        else:
            lo = mid + 1
    return hi


def auto_cutoff_su2(j, z: complex, ctx: ThermalContext, tol_tail: float, safety: float = AUTO_SAFETY) -> int:
    J = _twice(j)
    base = _smallest_cutoff(lambda n: su2_rho_tail(j, z, ctx, n), J, tol_tail)
    return max(J, math.ceil(safety * base))


def rho_su2(
    j,
    z: complex,
    ctx: ThermalContext,
    cutoff: int,
    tol_tail: float | None = 1e-8,
    coeff_hook: CoeffHook | None = None,
) -> DensityOperator:
    """rho = sum C^{m,m'}_{n1,n2} |n1+j+m, n2+j-m><n1+j+m', n2+j-m'| on a two-mode space.

    Entries with any occupation above ``cutoff`` are dropped; the dropped trace
    weight is stored as ``tail_bound`` and must not exceed ``tol_tail`` (pass
    ``None`` to skip certification).  ``coeff_hook(values, indices)`` may
    rewrite the coefficient array before assembly (debug/tamper testing).
    """
    J = _twice(j)
    _require_thermal(ctx)
    if cutoff < J:
        raise ValueError(f"cutoff {cutoff} < 2j = {J}")
    space = make_space(2, cutoff)
    check_dense(space)
    tail = su2_rho_tail(j, z, ctx, cutoff)
    if tol_tail is not None and tail > tol_tail:
        suggested = auto_cutoff_su2(j, z, ctx, tol_tail)
        raise TailError(
            f"su(2) truncation tail {tail:.3e} > {tol_tail:.1e} at cutoff {cutoff}; try cutoff >= {suggested}",
            suggested,
        )
    N = cutoff
    jm, jmp, n1, n2 = np.meshgrid(
        np.arange(J + 1), np.arange(J + 1), np.arange(N + 1), np.arange(N + 1), indexing="ij"
    )
    keep = (n1 + jm <= N) & (n2 + J - jm <= N) & (n1 + jmp <= N) & (n2 + J - jmp <= N)
    jm, jmp, n1, n2 = jm[keep], jmp[keep], n1[keep], n2[keep]
    values = _c_su2(J, complex(z), ctx, jm, jmp, n1, n2)
    if coeff_hook is not None:
        values = coeff_hook(values, {"jm": jm, "jmp": jmp, "n1": n1, "n2": n2})
    rows = (n1 + jm) * (N + 1) + (n2 + J - jm)
    cols = (n1 + jmp) * (N + 1) + (n2 + J - jmp)
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    np.add.at(mat, (rows, cols), values)
    return DensityOperator(space, mat, tail_bound=tail)


# --- su(1,1) -----------------------------------------------------------------


def _gamma_su11(q: int, zeta: complex, ctx: ThermalContext, n, nb, n1, n2) -> np.ndarray:
    n, nb, n1, n2 = (np.asarray(a, dtype=float) for a in (n, nb, n1, n2))
    log_z = _safe_log(abs(zeta))
    with np.errstate(invalid="ignore"):
        log_mag = (
            (1 + q) * math.log1p(-abs(zeta) ** 2)
            + _klog(nb, log_z)
            + _klog(n, log_z)
            - ctx.x * (n1 + n2)
            - _lf(q)
            - _lf(n)
            - _lf(nb)
            + (n + nb + q + 2) * math.log(ctx.one_minus)
            + 0.5 * (_lf(n2 + n) - _lf(n2) + _lf(n1 + n + q) - _lf(n1))
            + 0.5 * (_lf(n2 + nb) - _lf(n2) + _lf(n1 + nb + q) - _lf(n1))
        )
    phase = np.exp(1j * (n - nb) * cmath.phase(complex(zeta)))
    return np.exp(log_mag) * phase


def _check_su11(q: int, zeta: complex) -> None:
    if int(q) != q or q < 0:
        raise ValueError(f"q must be a nonnegative integer, got {q}")
    if not abs(complex(zeta)) < 1.0:
        raise ValueError("zeta must satisfy |zeta| < 1")


def gamma_coeff_su11(q: int, zeta: complex, ctx: ThermalContext, n: int, nbar: int, n1: int, n2: int) -> complex:
    """Density-matrix coefficient Gamma^{n,nbar}_{n1,n2}(zeta, beta) of the su(1,1) thermal coherent state."""
    _check_su11(q, zeta)
    _require_thermal(ctx)
    if min(n, nbar, n1, n2) < 0:
        raise ValueError("indices must be nonnegative")
    return complex(_gamma_su11(q, complex(zeta), ctx, n, nbar, n1, n2))


def su11_n_cap(q: int, zeta: complex, cap: float = PURE_TAIL_CAP) -> int:
    """Smallest n_max with pure-state weight beyond n_max below ``cap``."""
    return _smallest_cutoff(lambda n: su11_tail(q, zeta, n), 0, cap)


def su11_rho_tail(q: int, zeta: complex, ctx: ThermalContext, cutoff: int, n_cap: int | None = None) -> float:
    """Certified truncation bound for the su(1,1) thermal state at a per-mode cutoff.

    Trace weight outside the box for kept coherent indices n <= n_cap, plus
    ``p + 2 sqrt(p)`` for the pure-state weight ``p`` beyond ``n_cap`` (trace-norm
    bound on dropping those components).
    """
    _check_su11(q, zeta)
    if n_cap is None:
        n_cap = su11_n_cap(q, zeta)
    t = ctx.boltzmann_factor
    n = np.arange(n_cap + 1)
    weights = np.abs(su11_amplitudes(q, zeta, n_cap)) ** 2
    s1 = stats.nbinom.sf(cutoff - n - q, n + q + 1, 1.0 - t)
    s2 = stats.nbinom.sf(cutoff - n, n + 1, 1.0 - t)
    p = su11_tail(q, zeta, n_cap)
    return float(np.sum(weights * (s1 + s2 - s1 * s2)) + p + 2.0 * math.sqrt(p))


def auto_cutoff_su11(q: int, zeta: complex, ctx: ThermalContext, tol_tail: float, safety: float = AUTO_SAFETY) -> int:
    n_cap = su11_n_cap(q, zeta)
    base = _smallest_cutoff(lambda c: su11_rho_tail(q, zeta, ctx, c, n_cap), max(q, 1), tol_tail)
    return max(q + 1, math.ceil(safety * base))


def rho_su11(
    q: int,
    zeta: complex,
    ctx: ThermalContext,
    cutoff: int,
    tol_tail: float | None = 1e-8,
    coeff_hook: CoeffHook | None = None,
) -> DensityOperator:
    """rho = sum Gamma^{n,nbar}_{n1,n2} |n1+n+q, n2+n><n1+nbar+q, n2+nbar| on a two-mode space."""
    _check_su11(q, zeta)
    _require_thermal(ctx)
    if cutoff < q:
        raise ValueError(f"cutoff {cutoff} < q = {q}")
    space = make_space(2, cutoff)
    check_dense(space)
    n_cap = su11_n_cap(q, zeta)
    tail = su11_rho_tail(q, zeta, ctx, cutoff, n_cap)
    if tol_tail is not None and tail > tol_tail:
        suggested = auto_cutoff_su11(q, zeta, ctx, tol_tail)
        raise TailError(
            f"su(1,1) truncation tail {tail:.3e} > {tol_tail:.1e} at cutoff {cutoff}; try cutoff >= {suggested}",
            suggested,
        )
    N = cutoff
    n_top = min(n_cap, N - q)
    n, nb, n1, n2 = np.meshgrid(
        np.arange(n_top + 1), np.arange(n_top + 1), np.arange(N + 1), np.arange(N + 1), indexing="ij"
    )
    keep = (n1 + n + q <= N) & (n2 + n <= N) & (n1 + nb + q <= N) & (n2 + nb <= N)
    n, nb, n1, n2 = n[keep], nb[keep], n1[keep], n2[keep]
    values = _gamma_su11(q, complex(zeta), ctx, n, nb, n1, n2)
    if coeff_hook is not None:
        values = coeff_hook(values, {"n": n, "nbar": nb, "n1": n1, "n2": n2})
    rows = (n1 + n + q) * (N + 1) + (n2 + n)
    cols = (n1 + nb + q) * (N + 1) + (n2 + nb)
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    np.add.at(mat, (rows, cols), values)
    return DensityOperator(space, mat, tail_bound=tail)


def trace_su11(q: int, zeta: complex, ctx: ThermalContext, cutoff: int) -> float:
    """Trace of the cutoff-truncated rho_su11, summing only diagonal Gamma coefficients.

    The diagonal coefficient separates into an n-part, an (n, n1)-part and an
    (n, n2)-part, so the box sum costs O(n_cap * cutoff) instead of forming rho.
    """
    _check_su11(q, zeta)
    _require_thermal(ctx)
    n_cap = min(su11_n_cap(q, zeta), cutoff - q)
    total = 0.0
    for n in range(n_cap + 1):
        n1 = np.arange(cutoff - n - q + 1)
        n2 = np.arange(cutoff - n + 1)
        head = float(_gamma_su11(q, complex(zeta), ctx, n, n, 0, 0).real)
        part1 = np.exp(-ctx.x * n1 + _lf(n1 + n + q) - _lf(n1) - _lf(n + q))
        part2 = np.exp(-ctx.x * n2 + _lf(n2 + n) - _lf(n2) - _lf(n))
        total += head * math.fsum(part1) * math.fsum(part2)
    return total


# --- overlaps and over-completeness -------------------------------------------


def overlap_su2(z1: complex, z2: complex, j) -> complex:
    """<z1(beta)|z2(beta)> = (1 + z1* z2)^{2j} / [(1+|z1|^2)^j (1+|z2|^2)^j]."""
    J = _twice(j)
    z1, z2 = complex(z1), complex(z2)
    return (1 + z1.conjugate() * z2) ** J / ((1 + abs(z1) ** 2) ** (J / 2) * (1 + abs(z2) ** 2) ** (J / 2))


def overlap_su11(zeta1: complex, zeta2: complex, q: int) -> complex:
    """<zeta1(beta)|zeta2(beta)> = (1-|zeta1|^2)^{(1+q)/2} (1-|zeta2|^2)^{(1+q)/2} (1 - zeta1* zeta2)^{-(1+q)}."""
    _check_su11(q, zeta1)
    _check_su11(q, zeta2)
    zeta1, zeta2 = complex(zeta1), complex(zeta2)
    half = (1 + q) / 2
    return (1 - abs(zeta1) ** 2) ** half * (1 - abs(zeta2) ** 2) ** half / (1 - zeta1.conjugate() * zeta2) ** (1 + q)


def overlap_hw(alpha1: complex, alpha2: complex) -> complex:
    """<alpha1(beta)|alpha2(beta)> = exp(-|alpha1|^2/2 - |alpha2|^2/2 + alpha1* alpha2)."""
    a1, a2 = complex(alpha1), complex(alpha2)
    return cmath.exp(-0.5 * abs(a1) ** 2 - 0.5 * abs(a2) ** 2 + a1.conjugate() * a2)


def _sphere_nodes(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes z = tan(theta/2) e^{i phi} and weights of d mu = (2j+1)/pi d^2z/(1+|z|^2)^2 up to the (2j+1) factor.

    Gauss-Legendre in cos(theta) times the trapezoid rule in phi.  The
    measure becomes sin(theta) dtheta dphi / (4 pi).
    """
    u, wu = leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    theta = np.arccos(u)
    r = np.tan(theta / 2)
    z = (r[:, None] * np.exp(1j * phi)[None, :]).ravel()
    w = (wu[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :]).ravel() / (4 * np.pi)
    return z, w


def _resolution_matrix(twice_j: int, n_theta: int, n_phi: int) -> np.ndarray:
    """sum over nodes of w |z><z| in the (2j+1)-dimensional Dicke basis."""
    z_nodes, weights = _sphere_nodes(n_theta, n_phi)
    amps = np.array([su2_amplitudes(twice_j, z) for z in z_nodes])  # (nodes, 2j+1)
    return (twice_j + 1) * np.einsum("k,ka,kb->ab", weights, amps, amps.conj())


def identity_resolution_su2(j, n_theta: int = 32, n_phi: int = 32) -> float:
    """max-entry residual of int d mu |z><z| minus the spin-j projector, on the two-mode Fock space.

    The projector is onto span{|n1, n2> : n1 + n2 = 2j}; the Fock space uses
    cutoff 2j so every Dicke state is represented.
    """
    J = _twice(j)
    space = make_space(2, J)
    integral = _resolution_matrix(J, n_theta, n_phi)
    idx = np.array([space.index((a, J - a)) for a in range(J + 1)])
    full = np.zeros((space.dim, space.dim), dtype=complex)
    full[np.ix_(idx, idx)] = integral - np.eye(J + 1)
    return float(np.max(np.abs(full)))


def identity_resolution_su2_thermal(
    j, ctx: ThermalContext, cutoff: int, n_theta: int = 32, n_phi: int = 32
) -> float:
    """Residual of int d mu |z(beta)><z(beta)| against U(beta) (P (x) |0~0~><0~0~|) U(beta)^dag.

    The Bogoliubov transformation is applied to every Dicke state on a doubled
    space of the given cutoff; the result measures unitary invariance of the
    over-completeness relation.
    """
    from .fock import basis_state
    from .tfd import apply_bogoliubov

    J = _twice(j)
    doubled = make_space(4, cutoff)
    cols = [apply_bogoliubov(basis_state(doubled, (a, J - a, 0, 0)), ctx).amplitudes for a in range(J + 1)]
    V = np.stack(cols, axis=1)
    residual = _resolution_matrix(J, n_theta, n_phi) - np.eye(J + 1)
    return float(np.max(np.abs(V @ residual @ V.conj().T)))
