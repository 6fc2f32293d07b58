"""Thermal fidelity and thermal Wigner functions.

Wigner conventions
------------------
``raw`` values follow the defining integral
``f = int dv1 dv2 e^{i(p1 v1 + p2 v2)} <q - v/2| rho |q + v/2>`` with hbar = 1
and oscillator frequency ``omega``; the vacuum at the origin gives exactly 4.
``normalized`` divides by ``(2 pi)^2`` so the integral over
``dq1 dp1 dq2 dp2`` is one.  Complex coordinates are
``x = q sqrt(omega) + i p / sqrt(omega)`` and Gaussians/Laguerre arguments use
``|x|^2``.

For an operator ``|a><b|`` on one mode the raw transform is
``2 (-1)^min sqrt(2^d min!/max!) c^d e^{-|x|^2} L_min^d(2|x|^2)`` with
``d = |a - b|`` and ``c = conj(x)`` if ``a > b`` else ``x``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np
from scipy import stats
from scipy.special import eval_genlaguerre, gammaln

from .fock import DensityOperator
from .liealg import su11_amplitudes, su11_tail, su2_amplitudes
from .states import _check_su11, _require_thermal, _twice, rho_su11, rho_su2, su11_n_cap
from .tfd import ThermalContext

__all__ = [
    "ChiConvention",
    "Method",
    "SeriesResult",
    "WignerGrid",
    "WignerPoint",
    "WignerValue",
    "chi_factor",
    "fidelity_su11_numeric",
    "fidelity_su11_triple_sum",
    "fidelity_su11_series",
    "fidelity_su2_closed",
    "fidelity_su2_numeric",
    "laguerre_assoc",
    "laguerre_table",
    "wigner_grid",
    "wigner_numeric",
    "wigner_su11_closed",
    "wigner_su2_closed",
    "RAW_TO_NORMALIZED",
]

RAW_TO_NORMALIZED = 1.0 / (2.0 * math.pi) ** 2
IMAG_RESIDUAL_TOL = 1e-10

ChiConvention = Literal["standard", "literal"]


# --- Laguerre ------------------------------------------------------------------


def laguerre_table(n_max: int, alpha: int, t, log_scale=None, dtype=float) -> np.ndarray:
    """L_k^alpha(t) for k = 0..n_max by forward three-term recurrence.

    Returns shape ``(n_max + 1,) + shape(t)``.  With ``log_scale`` every row
    is multiplied by ``exp(log_scale)``; the recurrence then runs on
    renormalized values with a per-point exponent, so factors like e^{-t/2}
    at large t neither underflow the seeds nor overflow the iterates.
    ``dtype`` sets the working precision (``np.longdouble`` for extended).
    """
    t = np.asarray(t, dtype=dtype)
    out = np.empty((n_max + 1,) + t.shape, dtype=dtype)
    shift = np.zeros_like(t) if log_scale is None else np.asarray(log_scale, dtype=dtype) * np.ones_like(t)
    prev = np.ones_like(t)
    exponent = shift.copy()
    out[0] = np.exp(exponent) if log_scale is not None else prev
    if n_max == 0:
        return out
    cur = (1.0 + alpha - t) * prev
    out[1] = cur * np.exp(exponent) if log_scale is not None else cur
    for k in range(1, n_max):
        prev, cur = cur, ((2 * k + 1 + alpha - t) * cur - (k + alpha) * prev) / (k + 1)
        if log_scale is not None:
            big = np.abs(cur) > 1e150
            if big.any():
                cur = np.where(big, cur * 1e-150, cur)
                prev = np.where(big, prev * 1e-150, prev)
                exponent = exponent + np.where(big, np.asarray(150 * math.log(10.0), dtype=dtype), 0)
            with np.errstate(under="ignore"):
                out[k + 1] = cur * np.exp(exponent)
        else:
            out[k + 1] = cur
    return out


def laguerre_assoc(n: int, alpha: int, t):
    """Associated Laguerre polynomial L_n^alpha(t)."""
    if n < 0 or n > 10**4:
        raise ValueError(f"n must be in 0..10000, got {n}")
    value = laguerre_table(n, alpha, t)[n]
    return float(value) if np.ndim(value) == 0 else value


# --- fidelity --------------------------------------------------------------------


def fidelity_su2_closed(j, ctx: ThermalContext) -> float:
    """F = (1 - e^{-x})^{j+1}; independent of z."""
    J = _twice(j)
    return ctx.one_minus ** (J / 2 + 1)


def fidelity_su2_numeric(j, z: complex, ctx: ThermalContext, cutoff: int | None = None) -> float:
    """F = sqrt(<z| rho |z>) with rho from the closed-form coefficients.

    ``<z|rho|z>`` only touches the block n1 + n2 = 2j, which lies inside any
    cutoff >= 2j, so the quadratic form carries no truncation error and rho
    is built without tail certification.
    """
    J = _twice(j)
    cutoff = J if cutoff is None else cutoff
    rho = rho_su2(j, z, ctx, cutoff, tol_tail=None)
    space = rho.space
    vec = np.zeros(space.dim, dtype=complex)
    for a, c in enumerate(su2_amplitudes(J, z)):
        vec[space.index((a, J - a))] = c
    return _sqrt_form(vec, rho)


def _sqrt_form(vec: np.ndarray, rho: DensityOperator) -> float:
    value = np.vdot(vec, rho.matrix @ vec)
    if value.real < -1e-12:
        raise ValueError(f"<psi|rho|psi> = {value.real:.3e} < 0: rho is broken")
    return math.sqrt(max(value.real, 0.0))


class SeriesResult(NamedTuple):
    value: float
    remainder_bound: float
    terms: int


def _series_with_bound(log_term, log_ratio_bound, tol: float, max_terms: int) -> tuple[float, float, int]:
    """Sum exp(log_term(k)) for k >= 0 until the geometric remainder bound is below tol * sum.

    ``log_ratio_bound(k)`` must bound log(T_{i+1}/T_i) for every i >= k and
    decrease in k.
    """
    total = 0.0
    for k in range(max_terms):
        term = math.exp(log_term(k))
        total += term
        lr = log_ratio_bound(k)
        if lr < 0.0:
            r = math.exp(lr)
            remainder = term * r / (1.0 - r)
            if remainder <= tol * total:
                return total, remainder, k + 1
    raise ArithmeticError(f"series remainder bound not reached within {max_terms} terms")


def fidelity_su11_triple_sum(
    q: int, zeta: complex, ctx: ThermalContext, tol: float = 1e-15, max_terms: int = 100_000
) -> SeriesResult:
    """The triple series over (n, nbar, n1) for the su(1,1) thermal fidelity, with a remainder bound.

    The (n, nbar) double sum factors into the square of a single sum for each
    n1.  Term ratios are monotone in every index, so each truncation carries
    a geometric remainder bound.  The sum equals ``<zeta| rho |zeta>``; see
    :func:`fidelity_su11_series` for F itself.
    """
    _check_su11(q, zeta)
    _require_thermal(ctx)
    s = abs(complex(zeta)) ** 2
    t = ctx.boltzmann_factor
    w = s * ctx.one_minus
    log_w = math.log(w) if w > 0 else -math.inf
    log_pref = (2 + 2 * q) * math.log1p(-s) + (q + 2) * math.log(ctx.one_minus) - 2 * gammaln(q + 1)

    def inner(n1: int) -> tuple[float, float]:
        if w == 0.0:
            return math.exp(gammaln(n1 + q + 1)), 0.0
        total, rem, _ = _series_with_bound(
            lambda n: n * log_w + gammaln(n + n1 + q + 1) - gammaln(n + 1),
            lambda n: log_w + math.log((n + n1 + q + 1) / (n + 1)),
            tol,
            max_terms,
        )
        return total, rem / total

    log_st = (math.log(s) + 2 * math.log(t)) if s > 0 and t > 0 else -math.inf
    deficit = 0.0
    total = 0.0
    last_log = None
    for n1 in range(max_terms):
        value, rel = inner(n1)
        log_a = n1 * log_st - 2 * gammaln(n1 + 1) + 2 * math.log(value) if n1 else 2 * math.log(value)
        a = math.exp(log_a)
        total += a
        deficit += a * (2 * rel + rel * rel)
        if log_st == -math.inf:
            last_log = None
            break
        # exact ratio of consecutive outer terms, decreasing in n1
        lr = log_st + 2 * math.log((n1 + q + 1) / (n1 + 1)) - 2 * math.log1p(-w)
        if lr < 0:
            r = math.exp(lr)
            last_log = a * r / (1 - r)
            if last_log <= tol * total:
                break
    else:
        raise ArithmeticError(f"outer series remainder bound not reached within {max_terms} terms")
    pref = math.exp(log_pref)
    remainder = pref * (deficit + (last_log or 0.0))
    return SeriesResult(pref * total, remainder, n1 + 1)


def fidelity_su11_series(q: int, zeta: complex, ctx: ThermalContext, tol: float = 1e-15) -> float:
    """F = sqrt of the triple series (which sums to <zeta|rho|zeta>)."""
    return math.sqrt(fidelity_su11_triple_sum(q, zeta, ctx, tol).value)


def fidelity_su11_numeric(q: int, zeta: complex, ctx: ThermalContext, cutoff: int = 30) -> float:
    """F = sqrt(<zeta| rho |zeta>) from the closed-form rho at a per-mode cutoff.

    Truncating |zeta> to the box changes the form by at most ``2 sqrt(p) + p``
    with ``p`` the pure-state weight above the cutoff.
    """
    rho = rho_su11(q, zeta, ctx, cutoff, tol_tail=None)
    space = rho.space
    n_max = cutoff - q
    vec = np.zeros(space.dim, dtype=complex)
    for n, c in enumerate(su11_amplitudes(q, zeta, n_max)):
        vec[space.index((n + q, n))] = c
    return _sqrt_form(vec, rho)


def fidelity_su11_numeric_bound(q: int, zeta: complex, cutoff: int) -> float:
    p = su11_tail(q, zeta, cutoff - q)
    return 2 * math.sqrt(p) + p


# --- Wigner --------------------------------------------------------------------


@dataclass(frozen=True)
class WignerPoint:
    q1: float
    p1: float
    q2: float
    p2: float
    omega: float = 1.0

    @property
    def x1(self) -> complex:
        return complex(self.q1 * math.sqrt(self.omega), self.p1 / math.sqrt(self.omega))

    @property
    def x2(self) -> complex:
        return complex(self.q2 * math.sqrt(self.omega), self.p2 / math.sqrt(self.omega))


def complex_coords(q, p, omega: float) -> np.ndarray:
    return np.asarray(q, dtype=float) * math.sqrt(omega) + 1j * np.asarray(p, dtype=float) / math.sqrt(omega)


def chi_factor(m, m_prime, x1, x2, convention: ChiConvention = "standard", algebra: str = "su2"):
    """Combined chi_i chi_j factor for the index pair (m, m'), or (n, nbar) for su(1,1).

    ``literal``: ``(-x2 x1*)^d`` if m < m' else ``(-x2* x1)^d``, for both
    algebras.  ``standard`` is what the Fock-kernel Wigner transform gives:
    for su(2) ``(-x1 x2*)^d`` if m < m' else ``(-x1* x2)^d`` (the complex
    conjugate of the literal form); for su(1,1) ``(x1 x2)^d`` if n < nbar
    else ``(x1* x2*)^d``.
    """
    d = abs(m - m_prime)
    x1, x2 = np.asarray(x1), np.asarray(x2)
    if d == 0:
        return np.ones(np.broadcast(x1, x2).shape, dtype=complex)
    if convention == "literal":
        base = -x2 * np.conj(x1) if m < m_prime else -np.conj(x2) * x1
    elif convention == "standard":
        if algebra == "su2":
            base = -x1 * np.conj(x2) if m < m_prime else -np.conj(x1) * x2
        elif algebra == "su11":
            base = x1 * x2 if m < m_prime else np.conj(x1 * x2)
        else:
            raise ValueError(f"unknown algebra {algebra!r}")
    else:
        raise ValueError(f"unknown chi convention {convention!r}")
    return base**d


class WignerValue(NamedTuple):
    raw: np.ndarray
    tail_bound: float
    imag_residual: float
    n_terms: int

    @property
    def normalized(self) -> np.ndarray:
        return self.raw * RAW_TO_NORMALIZED


Method = Literal["series", "resummed"]


def _thermal_sums(offsets, d: int, y: np.ndarray, t: float, n_terms: int, dtype=np.longdouble) -> np.ndarray:
    """sum_{n=0}^{n_terms} (-t)^n (n+s)!/n! L_{n+s}^d(y) e^{-y/2} for every offset s.

    The terms grow like n^s before t^n wins, so at small x the sum cancels
    heavily; it runs in extended precision by default.  Weights come from
    their ratio recurrence, not from log-gamma differences.
    Returns shape ``(len(offsets),) + y.shape``.
    """
    offsets = np.asarray(offsets, dtype=int)
    top = n_terms + int(offsets.max())
    yy = np.asarray(y, dtype=dtype)
    table = laguerre_table(top, d, yy, log_scale=-yy / 2, dtype=dtype)
    flat = table.reshape(top + 1, -1)
    out = np.empty((len(offsets), flat.shape[1]), dtype=dtype)
    neg_t = -np.asarray(t, dtype=dtype)
    for i, s in enumerate(offsets):
        weights = np.empty(n_terms + 1, dtype=dtype)
        weights[0] = np.asarray(math.factorial(int(s)), dtype=dtype)
        for n in range(1, n_terms + 1):
            weights[n] = weights[n - 1] * neg_t * (n + s) / n
        out[i] = weights @ flat[s : s + n_terms + 1]
    return out.astype(float).reshape((len(offsets),) + np.shape(y))


def _resummed_sums(offsets, d: int, y: np.ndarray, t: float) -> np.ndarray:
    """The n -> infinity limit of :func:`_thermal_sums` in closed form.

    From the Laguerre generating function differentiated s times:
    sum_n (n+s)!/n! w^n L_{n+s}^d(y) = s! (1-w)^{-d-s-1} e^{-yw/(1-w)} L_s^d(y/(1-w)),
    taken at w = -t and multiplied by e^{-y/2}.
    """
    offsets = np.asarray(offsets, dtype=int)
    y = np.asarray(y, dtype=float)
    u = y / (1.0 + t)
    table = laguerre_table(int(offsets.max()), d, u)
    damp = np.exp(-0.5 * y * (1.0 - t) / (1.0 + t))
    out = np.empty((len(offsets),) + y.shape)
    for i, s in enumerate(offsets):
        log_c = float(gammaln(s + 1)) - (d + s + 1) * math.log1p(t)
        out[i] = math.exp(log_c) * damp * table[s]
    return out


def _inner_sums(method: str, offsets, d: int, y, t: float, n_terms: int) -> np.ndarray:
    if method == "series":
        return _thermal_sums(offsets, d, y, t, n_terms)
    if method == "resummed":
        return _resummed_sums(offsets, d, y, t)
    raise ValueError(f"unknown method {method!r}")


def _nb_sf(k, r, p):
    return stats.nbinom.sf(k, r, p)


def su2_wigner_tail(j, z: complex, ctx: ThermalContext, n_terms: int) -> float:
    """Raw-convention bound on the error from cutting the (n1, n2) sums at n_terms."""
    J = _twice(j)
    jm = np.arange(J + 1)
    weights = np.abs(su2_amplitudes(J, z)) ** 2
    s1 = _nb_sf(n_terms, jm + 1, ctx.one_minus)
    s2 = _nb_sf(n_terms, J - jm + 1, ctx.one_minus)
    return float(4.0 * np.sum(weights * (s1 + s2 - s1 * s2)))


def su11_wigner_n_cap(q: int, zeta: complex, tol_tail: float) -> int:
    """n cap whose pure-state contribution 4 (p + 2 sqrt p) stays near tol_tail / 4."""
    from .states import PURE_TAIL_CAP

    return su11_n_cap(q, zeta, cap=min(PURE_TAIL_CAP, (tol_tail / 32.0) ** 2))


def su11_wigner_tail(q: int, zeta: complex, ctx: ThermalContext, n_terms: int, n_cap: int) -> float:
    n = np.arange(n_cap + 1)
    weights = np.abs(su11_amplitudes(q, zeta, n_cap)) ** 2
    s1 = _nb_sf(n_terms, n + q + 1, ctx.one_minus)
    s2 = _nb_sf(n_terms, n + 1, ctx.one_minus)
    p = su11_tail(q, zeta, n_cap)
    return float(4.0 * (np.sum(weights * (s1 + s2 - s1 * s2)) + p + 2 * math.sqrt(p)))


MAX_TERMS = 1 << 20


def _auto_terms(tail, tol: float) -> int:
    n = 8
    while tail(n) > tol:
        n *= 2
        if n > MAX_TERMS:
            raise ArithmeticError(f"no truncation up to {MAX_TERMS} terms reaches tail {tol:.1e}")
    lo, hi = n // 2, n
    while lo < hi:
        mid = (lo + hi) // 2
        if tail(mid) <= tol:
            hi = mid
        else:
            lo = mid + 1
    return hi


def wigner_auto_terms(algebra: str, params: dict, ctx: ThermalContext, tol_tail: float) -> int:
    """Smallest (n1, n2) cap whose certified raw tail is at most tol_tail."""
    if algebra == "su2":
        return _auto_terms(lambda n: su2_wigner_tail(params["j"], params["z"], ctx, n), tol_tail)
    n_cap = su11_wigner_n_cap(params["q"], params["zeta"], tol_tail)
    return _auto_terms(lambda n: su11_wigner_tail(params["q"], params["zeta"], ctx, n, n_cap), tol_tail)


def _finish(total: np.ndarray, tail: float, n_terms: int) -> WignerValue:
    residual = float(np.max(np.abs(total.imag))) if total.size else 0.0
    if residual > IMAG_RESIDUAL_TOL:
        raise ArithmeticError(f"Wigner sum has imaginary residual {residual:.3e} (chi bookkeeping)")
    return WignerValue(total.real, tail, residual, n_terms)


def wigner_su2_values(
    x1,
    x2,
    j,
    z: complex,
    ctx: ThermalContext,
    n_terms: int | None = None,
    tol_tail: float = 1e-10,
    chi: ChiConvention = "standard",
    method: Method = "series",
) -> WignerValue:
    """Closed-form su(2) thermal Wigner function at arrays of complex coordinates.

    The (n1, n2) double sum separates for each (m, m') pair into one sum per
    mode; ``n_terms`` caps both.  When omitted it is chosen so the certified
    tail is at most ``tol_tail``.  ``method="resummed"`` replaces each
    per-mode sum by its exact infinite-sum value (no truncation tail).
    """
    J = _twice(j)
    _require_thermal(ctx)
    z = complex(z)
    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=complex), np.asarray(x2, dtype=complex))
    if method == "resummed":
        n_terms, tail = 0, 0.0
    else:
        if n_terms is None:
            n_terms = _auto_terms(lambda n: su2_wigner_tail(j, z, ctx, n), tol_tail)
        tail = su2_wigner_tail(j, z, ctx, n_terms)
    t = ctx.boltzmann_factor
    y1, y2 = 2 * np.abs(x1) ** 2, 2 * np.abs(x2) ** 2
    log_z = math.log(abs(z)) if z != 0 else -math.inf
    arg_z = cmath.phase(z)

    def log_fact(k):
        return float(gammaln(k + 1))

    total = np.zeros(x1.shape, dtype=complex)
    for d in range(J + 1):
        pairs = [(a, b) for a in range(J + 1) for b in range(J + 1) if abs(a - b) == d]
        if log_z == -math.inf:
            pairs = [(a, b) for a, b in pairs if a == 0 and b == 0]
        if not pairs:
            continue
        off1 = sorted({min(a, b) for a, b in pairs})
        off2 = sorted({J - max(a, b) for a, b in pairs})
        s1 = dict(zip(off1, _inner_sums(method, off1, d, y1, t, n_terms)))
        s2 = dict(zip(off2, _inner_sums(method, off2, d, y2, t, n_terms)))
        for a, b in pairs:
            # a = j + m, b = j + m'
            log_p = (
                0.5 * (2 * log_fact(J) - log_fact(a) - log_fact(J - a) - log_fact(b) - log_fact(J - b))
                + ((a + b) * log_z if a + b else 0.0)
                - J * math.log1p(abs(z) ** 2)
                + (J + 2) * math.log(ctx.one_minus)
                - 0.5 * (log_fact(a) + log_fact(J - a) + log_fact(b) + log_fact(J - b))
                + d * math.log(2.0)
            )
            pref = 4.0 * (-1) ** J * math.exp(log_p) * cmath.exp(1j * (a - b) * arg_z)
            total += pref * chi_factor(a, b, x1, x2, chi, "su2") * s1[min(a, b)] * s2[J - max(a, b)]
    return _finish(total, tail, n_terms)


def wigner_su11_values(
    x1,
    x2,
    q: int,
    zeta: complex,
    ctx: ThermalContext,
    n_terms: int | None = None,
    tol_tail: float = 1e-10,
    chi: ChiConvention = "standard",
    method: Method = "series",
) -> WignerValue:
    """Closed-form su(1,1) thermal Wigner function at arrays of complex coordinates."""
    _check_su11(q, zeta)
    _require_thermal(ctx)
    zeta = complex(zeta)
    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=complex), np.asarray(x2, dtype=complex))
    n_cap = su11_wigner_n_cap(q, zeta, tol_tail)
    if method == "resummed":
        p = su11_tail(q, zeta, n_cap)
        n_terms, tail = 0, 4.0 * (p + 2 * math.sqrt(p))
    else:
        if n_terms is None:
            n_terms = _auto_terms(lambda n: su11_wigner_tail(q, zeta, ctx, n, n_cap), tol_tail)
        tail = su11_wigner_tail(q, zeta, ctx, n_terms, n_cap)
    t = ctx.boltzmann_factor
    y1, y2 = 2 * np.abs(x1) ** 2, 2 * np.abs(x2) ** 2
    log_s = math.log(abs(zeta)) if zeta != 0 else -math.inf
    arg_z = cmath.phase(zeta)
    base = (1 + q) * math.log1p(-abs(zeta) ** 2) + (q + 2) * math.log(ctx.one_minus) - float(gammaln(q + 1))

    total = np.zeros(x1.shape, dtype=complex)
    for d in range(n_cap + 1):
        pairs = [(n, n + d) for n in range(n_cap + 1 - d)]
        pairs += [(n + d, n) for n in range(n_cap + 1 - d)] if d else []
        if log_s == -math.inf:
            pairs = [(a, b) for a, b in pairs if a == 0 and b == 0]
        if not pairs:
            continue
        offs = sorted({min(a, b) for a, b in pairs})
        s1 = dict(zip(offs, _inner_sums(method, [q + o for o in offs], d, y1, t, n_terms)))
        s2 = dict(zip(offs, _inner_sums(method, offs, d, y2, t, n_terms)))
        for n, nb in pairs:
            log_p = (
                base
                + ((n + nb) * log_s if n + nb else 0.0)
                + (n + nb) * math.log(ctx.one_minus)
                - float(gammaln(n + 1) + gammaln(nb + 1))
                + d * math.log(2.0)
            )
            pref = 4.0 * (-1) ** q * math.exp(log_p) * cmath.exp(1j * (n - nb) * arg_z)
            lo = min(n, nb)
            total += pref * chi_factor(n, nb, x1, x2, chi, "su11") * s1[lo] * s2[lo]
    return _finish(total, tail, n_terms)


def wigner_su2_closed(
    point: WignerPoint, j, z: complex, ctx: ThermalContext, truncation: int | None = None, **kwargs
) -> float:
    """Raw-convention su(2) thermal Wigner function at one phase-space point."""
    return float(wigner_su2_values(point.x1, point.x2, j, z, ctx, truncation, **kwargs).raw)


def wigner_su11_closed(
    point: WignerPoint, q: int, zeta: complex, ctx: ThermalContext, truncation: int | None = None, **kwargs
) -> float:
    """Raw-convention su(1,1) thermal Wigner function at one phase-space point."""
    return float(wigner_su11_values(point.x1, point.x2, q, zeta, ctx, truncation, **kwargs).raw)


def fock_wigner_kernel(levels: int, x: complex) -> np.ndarray:
    """K[a, b] = raw single-mode Wigner transform of |a><b| at complex coordinate x."""
    a = np.arange(levels)[:, None]
    b = np.arange(levels)[None, :]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    d = hi - lo
    y = 2 * abs(x) ** 2
    mag = np.exp(0.5 * (d * math.log(2.0) + gammaln(lo + 1) - gammaln(hi + 1)) - abs(x) ** 2)
    lag = eval_genlaguerre(lo, d, y)
    c = np.where(a > b, np.conj(x), x) ** d
    return 2.0 * np.where(lo % 2, -1.0, 1.0) * mag * c * lag


def wigner_numeric(rho: DensityOperator, point: WignerPoint) -> float:
    """Raw-convention Wigner function of a two-mode rho by summing Fock-kernel transforms."""
    if rho.space.num_modes != 2:
        raise ValueError("wigner_numeric expects a two-mode density operator")
    L = rho.space.levels
    k1 = fock_wigner_kernel(L, point.x1)
    k2 = fock_wigner_kernel(L, point.x2)
    r = rho.matrix.reshape(L, L, L, L)
    value = np.einsum("abcd,ac,bd->", r, k1, k2)
    if abs(value.imag) > IMAG_RESIDUAL_TOL * max(1.0, abs(value.real)):
        raise ArithmeticError(f"numeric Wigner imaginary residual {value.imag:.3e}")
    return float(value.real)


# --- grids -----------------------------------------------------------------------

COORDS = ("q1", "p1", "q2", "p2")


@dataclass(frozen=True)
class WignerGrid:
    """Wigner values on a 2D slice; ``values[i, k]`` is at (axis1[i], axis2[k])."""

    plane: tuple[str, str]
    axis1: tuple[float, float, int]
    axis2: tuple[float, float, int]
    fixed: dict = field(default_factory=dict)
    omega: float = 1.0
    values: np.ndarray | None = None
    tail_bound: float = 0.0
    n_terms: int = 0

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linspace(*self.axis1[:2], int(self.axis1[2])), np.linspace(*self.axis2[:2], int(self.axis2[2]))


def _grid_points(plane, axis1, axis2, fixed, omega):
    if len(plane) != 2 or plane[0] == plane[1] or not set(plane) <= set(COORDS):
        raise ValueError(f"plane must name two distinct coordinates from {COORDS}, got {plane}")
    for ax in (axis1, axis2):
        if int(ax[2]) < 2:
            raise ValueError("grid axes need count >= 2")
    c1 = np.linspace(axis1[0], axis1[1], int(axis1[2]))
    c2 = np.linspace(axis2[0], axis2[1], int(axis2[2]))
    g1, g2 = np.meshgrid(c1, c2, indexing="ij")
    vals = {name: np.full(g1.shape, float(fixed.get(name, 0.0))) for name in COORDS}
    vals[plane[0]], vals[plane[1]] = g1, g2
    x1 = complex_coords(vals["q1"], vals["p1"], omega)
    x2 = complex_coords(vals["q2"], vals["p2"], omega)
    return x1, x2


def wigner_grid(
    algebra: str,
    params: dict,
    ctx: ThermalContext,
    plane=("q1", "p1"),
    axis1=(-1.0, 1.0, 41),
    axis2=(-1.0, 1.0, 41),
    fixed: dict | None = None,
    omega: float = 1.0,
    tol_tail: float = 1e-10,
    n_terms: int | None = None,
    chi: ChiConvention = "standard",
    method: Method = "series",
) -> WignerGrid:
    """Evaluate the closed-form thermal Wigner function on a 2D slice of phase space."""
    fixed = {k: v for k, v in (fixed or {}).items() if k not in plane}
    x1, x2 = _grid_points(tuple(plane), axis1, axis2, fixed, omega)
    if algebra == "su2":
        res = wigner_su2_values(x1, x2, params["j"], params["z"], ctx, n_terms, tol_tail, chi, method)
    elif algebra == "su11":
        res = wigner_su11_values(x1, x2, params["q"], params["zeta"], ctx, n_terms, tol_tail, chi, method)
    else:
        raise ValueError(f"Wigner grids support su2 and su11, got {algebra!r}")
    return WignerGrid(
        tuple(plane),
        tuple(axis1),
        tuple(axis2),
        dict(fixed),
        omega,
        np.asarray(res.raw),
        res.tail_bound,
        res.n_terms,
    )
