"""Two-boson realizations of su(2) and su(1,1), Casimirs, and T = 0 coherent states.

su(2) uses the Schwinger map ``J+ = a1^dag a2``, ``J- = a2^dag a1``,
``Jz = (n1 - n2) / 2`` with ``|j, m> = |j + m, j - m>``.  su(1,1) uses
``K+ = a1^dag a2^dag``, ``K- = a1 a2``, ``K0 = (n1 + n2 + 1) / 2`` with
``|k, m> = |m + q, m>`` and Bargmann index ``k = (1 + q) / 2``.

Modes 0 and 1 of the given space carry the representation; any further
modes (e.g. tilde modes of a doubled space) are left in vacuum.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .fock import FockSpace, OperatorMatrix, PureState, identity, ladder, number_op

__all__ = [
    "HwParams",
    "Su11Generators",
    "Su11Params",
    "Su2Generators",
    "Su2Params",
    "TailError",
    "casimir_su11",
    "casimir_su2",
    "coherent_hw_pure",
    "coherent_su11_pure",
    "coherent_su2_pure",
    "displacement_map_su11",
    "displacement_map_su2",
    "su11_generators",
    "su11_tail",
    "su2_generators",
]

Su2Map = Literal["tangent", "sine"]
DEFAULT_SU2_MAP: Su2Map = "tangent"


class TailError(ValueError):
    """Truncation tail exceeds tolerance; ``suggested_cutoff`` would satisfy it."""

    def __init__(self, message: str, suggested_cutoff: int | None = None):
        super().__init__(message)
        self.suggested_cutoff = suggested_cutoff


def displacement_map_su2(eta: complex, kind: Su2Map = DEFAULT_SU2_MAP) -> complex:
    """Map the displacement parameter eta of exp(eta J+ - eta* J-) to the coset label z.

    ``kind="tangent"`` gives ``z = (eta/|eta|) tan|eta|``.  ``kind="sine"``
    solves ``z / sqrt(1 + |z|^2) = eta sin|eta| / |eta|`` for z; the two agree
    for ``|eta| < pi/2`` and differ beyond it.
    """
    eta = complex(eta)
    r = abs(eta)
    if r == 0.0:
        return 0j
    phase = eta / r
    if kind == "tangent":
        if math.isclose(math.cos(r), 0.0, abs_tol=1e-15):
            raise ValueError(f"tangent map has a pole at |eta| = pi/2 (got |eta| = {r})")
        return phase * math.tan(r)
    if kind == "sine":
        w = phase * math.sin(r)
        if abs(w) >= 1.0:
            raise ValueError(f"sine map undefined for |eta sin|eta|/|eta|| >= 1 (|eta| = {r})")
        return w / math.sqrt(1.0 - abs(w) ** 2)
    raise ValueError(f"unknown su(2) map {kind!r}")


def displacement_map_su11(alpha: complex) -> complex:
    """zeta = (alpha/|alpha|) tanh|alpha|."""
    alpha = complex(alpha)
    r = abs(alpha)
    if r == 0.0:
        return 0j
    return alpha / r * math.tanh(r)


@dataclass(frozen=True)
class Su2Params:
    twice_j: int
    z: complex
    eta: complex | None = None

    def __post_init__(self):
        if int(self.twice_j) != self.twice_j or self.twice_j < 1:
            raise ValueError(f"twice_j must be a positive integer, got {self.twice_j}")
        object.__setattr__(self, "z", complex(self.z))

    @property
    def j(self) -> float:
        return self.twice_j / 2

    @classmethod
    def from_j(cls, j: float, z: complex) -> Su2Params:
        twice = 2 * j
        if abs(twice - round(twice)) > 1e-12:
            raise ValueError(f"j must be a half-integer, got {j}")
        return cls(int(round(twice)), z)

    @classmethod
    def from_eta(cls, j: float, eta: complex, kind: Su2Map = DEFAULT_SU2_MAP) -> Su2Params:
        p = cls.from_j(j, displacement_map_su2(eta, kind))
        return cls(p.twice_j, p.z, complex(eta))


@dataclass(frozen=True)
class Su11Params:
    q: int
    zeta: complex
    alpha: complex | None = None

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 0:
            raise ValueError(f"q must be a nonnegative integer, got {self.q}")
        zeta = complex(self.zeta)
        if not abs(zeta) < 1.0:
            raise ValueError("zeta must satisfy |zeta| < 1")
        object.__setattr__(self, "zeta", zeta)
        if self.alpha is not None:
            if abs(displacement_map_su11(self.alpha) - zeta) > 1e-12:
                raise ValueError("zeta inconsistent with alpha under zeta = (alpha/|alpha|) tanh|alpha|")

    @property
    def k(self) -> float:
        return (1 + self.q) / 2

    @classmethod
    def from_alpha(cls, q: int, alpha: complex) -> Su11Params:
        return cls(q, displacement_map_su11(alpha), complex(alpha))


@dataclass(frozen=True)
class HwParams:
    alpha: complex


class Su2Generators(NamedTuple):
    plus: OperatorMatrix
    minus: OperatorMatrix
    z: OperatorMatrix


class Su11Generators(NamedTuple):
    plus: OperatorMatrix
    minus: OperatorMatrix
    zero: OperatorMatrix


def _require_two_modes(space: FockSpace) -> None:
    if space.num_modes < 2:
        raise ValueError("two-boson representation needs at least 2 modes")


def su2_generators(space: FockSpace) -> Su2Generators:
    _require_two_modes(space)
    a1, a2 = ladder(space, 0, "lower"), ladder(space, 1, "lower")
    a1d, a2d = a1.adjoint(), a2.adjoint()
    jz = (number_op(space, 0) - number_op(space, 1)) * 0.5
    return Su2Generators(a1d @ a2, a2d @ a1, jz)


def su11_generators(space: FockSpace) -> Su11Generators:
    _require_two_modes(space)
    a1, a2 = ladder(space, 0, "lower"), ladder(space, 1, "lower")
    k0 = (number_op(space, 0) + number_op(space, 1) + identity(space)) * 0.5
    return Su11Generators(a1.adjoint() @ a2.adjoint(), a1 @ a2, k0)


def casimir_su2(space: FockSpace) -> OperatorMatrix:
    """J^2 = Jz^2 + (J+ J- + J- J+) / 2."""
    g = su2_generators(space)
    return g.z @ g.z + (g.plus @ g.minus + g.minus @ g.plus) * 0.5


def casimir_su11(space: FockSpace) -> OperatorMatrix:
    """K^2 = K0^2 - (K+ K- + K- K+) / 2, i.e. K0^2 - K1^2 - K2^2."""
    g = su11_generators(space)
    return g.zero @ g.zero - (g.plus @ g.minus + g.minus @ g.plus) * 0.5


def _two_mode_state(space: FockSpace, n1: np.ndarray, n2: np.ndarray, amps: np.ndarray) -> PureState:
    tensor = np.zeros(space.shape, dtype=complex)
    rest = (0,) * (space.num_modes - 2)
    for a, b, c in zip(n1, n2, amps):
        tensor[(int(a), int(b)) + rest] = c
    return PureState(space, tensor.reshape(-1))


def su2_amplitudes(twice_j: int, z: complex) -> np.ndarray:
    """Amplitudes of |z> on |j, m> for m = -j..j (index ``j + m``)."""
    z = complex(z)
    jm = np.arange(twice_j + 1)
    log_binom = 0.5 * (gammaln(twice_j + 1) - gammaln(jm + 1) - gammaln(twice_j - jm + 1))
    # z^(j+m) (1+|z|^2)^(-j) = |z|^(j+m) e^{i(j+m)arg z} / (1+|z|^2)^j
    if z == 0:
        out = np.zeros(twice_j + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = log_binom + jm * math.log(abs(z)) - 0.5 * twice_j * math.log1p(abs(z) ** 2)
    return np.exp(log_mag) * np.exp(1j * jm * cmath.phase(z))


def coherent_su2_pure(p: Su2Params, space: FockSpace) -> PureState:
    """sum_m z^{j+m} (1+|z|^2)^{-j} sqrt(C(2j, j+m)) |j+m, j-m>."""
    _require_two_modes(space)
    if space.cutoff < p.twice_j:
        raise ValueError(f"cutoff {space.cutoff} < 2j = {p.twice_j}")
    jm = np.arange(p.twice_j + 1)
    return _two_mode_state(space, jm, p.twice_j - jm, su2_amplitudes(p.twice_j, p.z))


def su11_tail(q: int, zeta: complex, n_max: int) -> float:
    """Probability weight of |zeta, k> on levels n > n_max (negative-binomial tail)."""
    s = abs(complex(zeta)) ** 2
    if s == 0.0:
        return 0.0
    return float(stats.nbinom.sf(n_max, q + 1, 1.0 - s))


def su11_amplitudes(q: int, zeta: complex, n_max: int) -> np.ndarray:
    """Amplitudes of |zeta, k> on |n + q, n> for n = 0..n_max."""
    zeta = complex(zeta)
    n = np.arange(n_max + 1)
    out = np.zeros(n_max + 1, dtype=complex)
    if zeta == 0:
        out[0] = 1.0
        return out
    log_mag = (
        0.5 * (1 + q) * math.log1p(-abs(zeta) ** 2)
        + 0.5 * (gammaln(n + q + 1) - gammaln(n + 1) - gammaln(q + 1))
        + n * math.log(abs(zeta))
    )
    return np.exp(log_mag) * np.exp(1j * n * cmath.phase(zeta))


def _su11_suggest(q: int, zeta: complex, tol_tail: float) -> int:
    n = 1
    while su11_tail(q, zeta, n) >= tol_tail:
        n *= 2
    lo, hi = n // 2, n
    while lo < hi:
        mid = (lo + hi) // 2
        if su11_tail(q, zeta, mid) < tol_tail:
            hi = mid
        else:
            lo = mid + 1
    return hi


def coherent_su11_pure(p: Su11Params, space: FockSpace, tol_tail: float = 1e-12) -> PureState:
    """(1-|zeta|^2)^{(1+q)/2} sum_n sqrt(C(n+q, q)) zeta^n |n+q, n>, truncated at the cutoff."""
    _require_two_modes(space)
    n_max = space.cutoff - p.q
    if n_max < 0:
        raise TailError(f"cutoff {space.cutoff} < q = {p.q}", p.q + _su11_suggest(p.q, p.zeta, tol_tail))
    tail = su11_tail(p.q, p.zeta, n_max)
    if tail >= tol_tail:
        suggested = p.q + _su11_suggest(p.q, p.zeta, tol_tail)
        raise TailError(
            f"su(1,1) tail {tail:.3e} >= {tol_tail:.1e} at cutoff {space.cutoff}; try cutoff >= {suggested}",
            suggested,
        )
    n = np.arange(n_max + 1)
    return _two_mode_state(space, n + p.q, n, su11_amplitudes(p.q, p.zeta, n_max))


def coherent_hw_pure(p: HwParams, space: FockSpace, tol_tail: float = 1e-12) -> PureState:
    """Glauber state e^{-|alpha|^2/2} sum alpha^n / sqrt(n!) |n> on mode 0 (others in vacuum)."""
    alpha = complex(p.alpha)
    mean = abs(alpha) ** 2
    tail = float(stats.poisson.sf(space.cutoff, mean)) if mean > 0 else 0.0
    if tail >= tol_tail:
        suggested = int(stats.poisson.isf(tol_tail, mean)) + 1
        raise TailError(f"coherent-state tail {tail:.3e} >= {tol_tail:.1e}; try cutoff >= {suggested}", suggested)
    n = np.arange(space.levels)
    amps = np.zeros(space.levels, dtype=complex)
    if alpha == 0:
        amps[0] = 1.0
    else:
        amps = np.exp(-mean / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1) + 1j * n * cmath.phase(alpha))
    tensor = np.zeros(space.shape, dtype=complex)
    tensor[(slice(None),) + (0,) * (space.num_modes - 1)] = amps
    return PureState(space, tensor.reshape(-1))
