"""Thermofield doubling: thermal parameter, Bogoliubov transformation, thermal vacuum.

The brute-force constructions here act on a doubled, truncated Fock space
(physical modes first, tilde partners second) and are the independent
reference for the closed-form density operators in :mod:`thermal_coset.states`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .fock import (
    FockSpace,
    OperatorMatrix,
    PureState,
    apply_exponential,
    basis_state,
    ladder,
    make_space,
)
from .liealg import (
    HwParams,
    Su11Params,
    Su2Params,
    TailError,
    coherent_hw_pure,
    coherent_su11_pure,
    coherent_su2_pure,
    su11_generators,
    su2_generators,
)

__all__ = [
    "BOLTZMANN",
    "HBAR",
    "ThermalContext",
    "apply_bogoliubov",
    "bogoliubov_generator",
    "bogoliubov_images",
    "bogoliubov_thermal_vacuum",
    "restrict",
    "thermal_coherent_hw",
    "thermal_coherent_su11_oracle",
    "thermal_coherent_su2_oracle",
    "thermal_context",
    "thermal_context_physical",
    "thermal_overlap",
    "thermal_vacuum",
]

HBAR = 1.054571817e-34  # J s (CODATA 2018)
BOLTZMANN = 1.380649e-23  # J / K (exact, SI 2019)


@dataclass(frozen=True)
class ThermalContext:
    """Dimensionless thermal parameter ``x = beta * hbar * omega`` and derived Bogoliubov data."""

    x: float

    def __post_init__(self):
        if not (self.x >= 0.0) or math.isnan(self.x):
            raise ValueError(f"x must be >= 0, got {self.x}")

    @property
    def boltzmann_factor(self) -> float:
        """e^{-x}."""
        return math.exp(-self.x)

    @property
    def one_minus(self) -> float:
        """1 - e^{-x}, accurate for small x."""
        return -math.expm1(-self.x)

    def _require_finite(self) -> None:
        if self.x == 0.0:
            raise ValueError("x = 0 (infinite temperature) has no finite Bogoliubov angle")

    @property
    def u(self) -> float:
        """cosh(theta) = (1 - e^{-x})^{-1/2}."""
        self._require_finite()
        return 1.0 / math.sqrt(self.one_minus)

    @property
    def v(self) -> float:
        """sinh(theta) = e^{-x/2} (1 - e^{-x})^{-1/2}."""
        self._require_finite()
        return math.exp(-self.x / 2) / math.sqrt(self.one_minus)

    @property
    def theta(self) -> float:
        """Bogoliubov angle with tanh(theta) = e^{-x/2}."""
        self._require_finite()
        return math.atanh(math.exp(-self.x / 2))

    def temperature_k(self, omega_hz: float) -> float:
        """Temperature that gives this x for angular frequency ``omega_hz``."""
        self._require_finite()
        return HBAR * omega_hz / (BOLTZMANN * self.x)


def thermal_context(x: float) -> ThermalContext:
    return ThermalContext(float(x))


def thermal_context_physical(omega_hz: float, temp_k: float) -> ThermalContext:
    """x = hbar * omega / (k_B * T)."""
    if not omega_hz > 0:
        raise ValueError(f"omega_hz must be positive, got {omega_hz}")
    if not temp_k > 0:
        raise ValueError(f"temp_k must be positive, got {temp_k}")
    return ThermalContext(HBAR * omega_hz / (BOLTZMANN * temp_k))


def _pair_modes(space: FockSpace, mode: int) -> tuple[int, int]:
    if space.num_modes % 2:
        raise ValueError(f"doubled space needs an even mode count, got {space.num_modes}")
    k = space.num_modes // 2
    if not 0 <= mode < k:
        raise ValueError(f"physical mode {mode} outside 0..{k - 1}")
    return mode, k + mode


def bogoliubov_generator(space: FockSpace, mode: int, ctx: ThermalContext) -> OperatorMatrix:
    """G_i = -i theta (a~_i a_i - a~_i^dag a_i^dag), so U_i = exp(-i G_i) = exp[theta (a^dag a~^dag - a a~)]."""
    phys, tilde = _pair_modes(space, mode)
    theta = ctx.theta
    a, at = ladder(space, phys, "lower"), ladder(space, tilde, "lower")
    return (at @ a - at.adjoint() @ a.adjoint()) * (-1j * theta)


def apply_bogoliubov(psi: PureState, ctx: ThermalContext, tol: float = 1e-15) -> PureState:
    """Apply U(beta) = prod_i exp(-i G_i) mode pair by mode pair."""
    k = psi.space.num_modes // 2
    _pair_modes(psi.space, 0)
    out = psi
    for mode in range(k):
        gen = bogoliubov_generator(psi.space, mode, ctx) * (-1j)
        out = apply_exponential(gen, out, tol=tol)
    return out


def thermal_vacuum_tail(ctx: ThermalContext, cutoff: int) -> float:
    """Per-mode thermal weight above the cutoff, e^{-x (cutoff + 1)}."""
    return math.exp(-ctx.x * (cutoff + 1))


def thermal_vacuum(ctx: ThermalContext, k_modes: int, cutoff: int, tol_tail: float = 1e-10) -> PureState:
    """Analytic |0(beta)> = prod_i sum_n sqrt(1 - e^{-x}) e^{-x n / 2} |n, n~>.

    Built from the coefficients directly, never by exponentiation.
    """
    ctx._require_finite()
    tail = thermal_vacuum_tail(ctx, cutoff)
    if tail >= tol_tail:
        suggested = math.ceil(-math.log(tol_tail) / ctx.x)
        raise TailError(f"thermal tail {tail:.3e} >= {tol_tail:.1e}; try cutoff >= {suggested}", suggested)
    space = make_space(2 * k_modes, cutoff)
    n = np.arange(space.levels)
    g = math.sqrt(ctx.one_minus) * np.exp(-ctx.x * n / 2)
    pair = np.diag(g)  # pair[n, n~]
    # physical modes come first: tensor axes (p_0..p_{k-1}, t_0..t_{k-1})
    tensor = np.ones((1,) * (2 * k_modes))
    for i in range(k_modes):
        shape = [1] * (2 * k_modes)
        shape[i] = shape[k_modes + i] = space.levels
        tensor = tensor * pair.reshape(shape)
    return PureState(space, tensor.reshape(-1).astype(complex))


def restrict(psi: PureState, cutoff: int) -> PureState:
    """Project onto occupations <= cutoff in every mode (no renormalization)."""
    if cutoff > psi.space.cutoff:
        raise ValueError(f"cannot restrict cutoff {psi.space.cutoff} up to {cutoff}")
    space = make_space(psi.space.num_modes, cutoff)
    block = psi.tensor()[(slice(0, cutoff + 1),) * psi.space.num_modes]
    return PureState(space, np.ascontiguousarray(block).reshape(-1))


def bogoliubov_thermal_vacuum(
    ctx: ThermalContext, k_modes: int, cutoff: int, pad: int = 8, tol: float = 1e-15
) -> PureState:
    """U(beta)|0, 0~> by exponentiation on a space ``pad`` levels larger, restricted to ``cutoff``.

    Hard truncation distorts exp(-iG) near the top levels; the padding keeps
    that distortion out of the returned amplitudes.
    """
    space = make_space(2 * k_modes, cutoff + pad)
    psi = apply_bogoliubov(basis_state(space, (0,) * (2 * k_modes)), ctx, tol=tol)
    return restrict(psi, cutoff)


def _doubled(cutoff: int) -> FockSpace:
    return make_space(4, cutoff)


def thermal_coherent_su2_oracle(
    p: Su2Params, ctx: ThermalContext, cutoff: int, tol: float = 1e-15, pad: int = 0
) -> PureState:
    """|z(beta)> = U(beta) (|z> (x) |0~, 0~>) on a 4-mode doubled space.

    When ``p.eta`` is set the pure state is produced by exponentiating
    ``eta J+ - eta* J-`` on ``|j, -j>`` instead of the closed form.  ``pad``
    extra levels are carried during exponentiation and dropped afterwards.
    """
    space = _doubled(cutoff + pad)
    if p.eta is not None:
        if cutoff < p.twice_j:
            raise ValueError(f"cutoff {cutoff} < 2j = {p.twice_j}")
        g = su2_generators(space)
        gen = g.plus * p.eta - g.minus * complex(p.eta).conjugate()
        pure = apply_exponential(gen, basis_state(space, (0, p.twice_j, 0, 0)), tol=tol)
    else:
        pure = coherent_su2_pure(p, space)
    return restrict(apply_bogoliubov(pure, ctx, tol=tol), cutoff)


def thermal_coherent_su11_oracle(
    p: Su11Params,
    ctx: ThermalContext,
    cutoff: int,
    tol: float = 1e-15,
    tol_tail: float = 1e-12,
    pad: int = 0,
) -> PureState:
    """|zeta(beta)> = U(beta) (|zeta, k> (x) |0~, 0~>) on a 4-mode doubled space.

    With ``p.alpha`` set the pure state comes from exponentiating
    ``alpha K+ - alpha* K-`` on ``|q, 0>``.
    """
    space = _doubled(cutoff + pad)
    if p.alpha is not None:
        g = su11_generators(space)
        gen = g.plus * p.alpha - g.minus * complex(p.alpha).conjugate()
        pure = apply_exponential(gen, basis_state(space, (p.q, 0, 0, 0)), tol=tol)
    else:
        pure = coherent_su11_pure(p, space, tol_tail=tol_tail)
    return restrict(apply_bogoliubov(pure, ctx, tol=tol), cutoff)


def thermal_coherent_hw(
    alpha: complex,
    ctx: ThermalContext,
    cutoff: int,
    tol: float = 1e-15,
    tol_tail: float = 1e-12,
    pad: int = 0,
) -> PureState:
    """|alpha(beta)> = U D(alpha) U^dag |0(beta)> = U(beta) D(alpha) |0, 0~> on one mode pair."""
    space = make_space(2, cutoff + pad)
    alpha = complex(alpha)
    coherent_hw_pure(HwParams(alpha), space, tol_tail=tol_tail)  # tail check only
    a = ladder(space, 0, "lower")
    gen = a.adjoint() * alpha - a * alpha.conjugate()
    pure = apply_exponential(gen, basis_state(space, (0, 0)), tol=tol)
    return restrict(apply_bogoliubov(pure, ctx, tol=tol), cutoff)


def bogoliubov_images(
    ctx: ThermalContext, n_max: int, tail_tol: float = 1e-13, pad: int = 8, tol: float = 1e-15
) -> np.ndarray:
    """Rows are U(beta)|n, 0~> for n = 0..n_max, flattened on one mode pair.

    The pair cutoff is the smallest one whose thermal tail for n_max (a
    negative-binomial tail in the tilde occupation) is below ``tail_tol``.
    """
    ctx._require_finite()
    excess = int(stats.nbinom.isf(tail_tol, n_max + 1, ctx.one_minus)) + 1
    cutoff = n_max + excess
    rows = []
    for n in range(n_max + 1):
        space = make_space(2, cutoff + pad)
        psi = apply_bogoliubov(basis_state(space, (n, 0)), ctx, tol=tol)
        rows.append(restrict(psi, cutoff).amplitudes)
    return np.array(rows)


def thermal_overlap(
    occupations,
    amps1,
    amps2,
    ctx: ThermalContext,
    tail_tol: float = 1e-13,
    pad: int = 8,
    images: np.ndarray | None = None,
) -> complex:
    """<psi1(beta)|psi2(beta)> for pure states sharing a list of occupation tuples.

    Each physical mode pairs with its own tilde mode and U(beta) factorizes
    over pairs, so the doubled-space inner product is a sum of products of
    single-pair Gram entries <U n,0~|U n',0~>.  ``images`` from
    :func:`bogoliubov_images` can be passed in to share them across calls.
    """
    occ = np.atleast_2d(np.asarray(occupations, dtype=int))
    if occ.shape[0] != len(amps1) or occ.shape[0] != len(amps2):
        raise ValueError("occupations and amplitude arrays disagree in length")
    if images is None:
        images = bogoliubov_images(ctx, int(occ.max()), tail_tol, pad)
    elif images.shape[0] <= occ.max():
        raise ValueError(f"images cover n <= {images.shape[0] - 1}, need {occ.max()}")
    gram = images.conj() @ images.T
    weight = np.ones((occ.shape[0], occ.shape[0]), dtype=complex)
    for mode in range(occ.shape[1]):
        weight *= gram[np.ix_(occ[:, mode], occ[:, mode])]
    return complex(np.conj(np.asarray(amps1)) @ weight @ np.asarray(amps2))
