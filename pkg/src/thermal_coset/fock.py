"""Truncated multi-mode bosonic Fock space.

Basis states are occupation tuples ``(n_0, ..., n_{k-1})`` with every
``n_i`` in ``0..cutoff``.  Indices follow lexicographic (C) order with mode 0
most significant, so a state vector reshaped to ``(cutoff + 1,) * k`` is
indexed by occupation directly.

For doubled (thermofield) spaces the physical modes occupy positions
``0..k-1`` and the tilde partner of mode ``i`` sits at ``k + i``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DEFAULT_MAX_DIM",
    "DensityOperator",
    "DimensionCapError",
    "ExponentialConvergenceError",
    "FockSpace",
    "OperatorMatrix",
    "PureState",
    "SpaceMismatchError",
    "apply_exponential",
    "basis_state",
    "expectation",
    "identity",
    "inner",
    "ladder",
    "make_space",
    "number_op",
    "check_dense",
    "partial_trace_tilde",
    "trace",
]

DEFAULT_MAX_DIM = 10**7
DEFAULT_DENSE_MAX_DIM = 8192  # dense complex dim x dim matrix of about 1 GiB
MAX_DIM_ENV = "THERMAL_COSET_MAX_DIM"


class DimensionCapError(ValueError):
    """Requested space exceeds the configured dimension cap."""


class SpaceMismatchError(ValueError):
    """Operands live on different Fock spaces."""


class ExponentialConvergenceError(RuntimeError):
    """Taylor series for exp(A) psi failed to converge."""


def _max_dim() -> int:
    value = os.environ.get(MAX_DIM_ENV)
    return int(value) if value else DEFAULT_MAX_DIM


def check_dense(space: "FockSpace") -> None:
    """Refuse dense dim x dim matrices above the dense cap.

    The cap is 8192 unless ``THERMAL_COSET_MAX_DIM`` is set, in which case
    that value applies to dense matrices too.
    """
    value = os.environ.get(MAX_DIM_ENV)
    cap = int(value) if value else DEFAULT_DENSE_MAX_DIM
    if space.dim > cap:
        raise DimensionCapError(
            f"dense matrix of dimension {space.dim} exceeds cap {cap} (set {MAX_DIM_ENV} to raise it)"
        )


@dataclass(frozen=True)
class FockSpace:
    num_modes: int
    cutoff: int

    @property
    def levels(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return self.levels**self.num_modes

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.levels,) * self.num_modes

    def index(self, occupation) -> int:
        occupation = tuple(int(n) for n in occupation)
        if len(occupation) != self.num_modes:
            raise ValueError(f"expected {self.num_modes} occupations, got {len(occupation)}")
        if any(n < 0 or n > self.cutoff for n in occupation):
            raise ValueError(f"occupation {occupation} outside cutoff {self.cutoff}")
        return int(np.ravel_multi_index(occupation, self.shape))

    def occupation(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dim:
            raise IndexError(index)
        return tuple(int(n) for n in np.unravel_index(index, self.shape))

    def basis(self) -> np.ndarray:
        """All occupation tuples as a ``(dim, num_modes)`` integer array, in index order."""
        grids = np.indices(self.shape).reshape(self.num_modes, -1)
        return grids.T.copy()

    def label(self, index: int) -> str:
        return "|" + ",".join(str(n) for n in self.occupation(index)) + ">"


def make_space(num_modes: int, cutoff: int, max_dim: int | None = None) -> FockSpace:
    """Build a truncated Fock space, refusing dimensions above the cap.

    The cap defaults to ``10**7`` and can be overridden with the
    ``THERMAL_COSET_MAX_DIM`` environment variable.
    """
    if not 1 <= num_modes <= 4:
        raise ValueError(f"num_modes must be in 1..4, got {num_modes}")
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    cap = _max_dim() if max_dim is None else max_dim
    dim = (cutoff + 1) ** num_modes
    if dim > cap:
        raise DimensionCapError(f"dimension {dim} exceeds cap {cap} (set {MAX_DIM_ENV} to raise it)")
    return FockSpace(num_modes, cutoff)


def _check_same(a: FockSpace, b: FockSpace) -> None:
    if a != b:
        raise SpaceMismatchError(f"space mismatch: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class PureState:
    space: FockSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.dim,):
            raise ValueError(f"amplitudes shape {amps.shape} != ({self.space.dim},)")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> PureState:
        return PureState(self.space, self.amplitudes / self.norm())

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped so that ``psi.tensor()[n0, n1, ...]`` is the occupation amplitude."""
        return self.amplitudes.reshape(self.space.shape)

    def amplitude(self, occupation) -> complex:
        return complex(self.amplitudes[self.space.index(occupation)])

    def __add__(self, other: PureState) -> PureState:
        _check_same(self.space, other.space)
        return PureState(self.space, self.amplitudes + other.amplitudes)

    def __sub__(self, other: PureState) -> PureState:
        _check_same(self.space, other.space)
        return PureState(self.space, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar: complex) -> PureState:
        return PureState(self.space, self.amplitudes * scalar)

    __rmul__ = __mul__


def basis_state(space: FockSpace, occupation) -> PureState:
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index(occupation)] = 1.0
    return PureState(space, amps)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Operator on a Fock space, stored as a sparse CSR matrix."""

    space: FockSpace
    entries: sp.csr_matrix

    def __post_init__(self):
        mat = sp.csr_matrix(self.entries, dtype=complex)
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValueError(f"operator shape {mat.shape} does not match dim {self.space.dim}")
        object.__setattr__(self, "entries", mat)

    def adjoint(self) -> OperatorMatrix:
        return OperatorMatrix(self.space, self.entries.conj().T.tocsr())

    def dense(self) -> np.ndarray:
        return self.entries.toarray()

    def norm1(self) -> float:
        """Induced 1-norm (max absolute column sum); an upper bound on the spectral norm scale."""
        if self.entries.nnz == 0:
            return 0.0
        return float(abs(self.entries).sum(axis=0).max())

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            _check_same(self.space, other.space)
            return OperatorMatrix(self.space, self.entries @ other.entries)
        if isinstance(other, PureState):
            _check_same(self.space, other.space)
            return PureState(self.space, self.entries @ other.amplitudes)
        return NotImplemented

    def __add__(self, other: OperatorMatrix) -> OperatorMatrix:
        _check_same(self.space, other.space)
        return OperatorMatrix(self.space, self.entries + other.entries)

    def __sub__(self, other: OperatorMatrix) -> OperatorMatrix:
        _check_same(self.space, other.space)
        return OperatorMatrix(self.space, self.entries - other.entries)

    def __mul__(self, scalar: complex) -> OperatorMatrix:
        return OperatorMatrix(self.space, self.entries * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> OperatorMatrix:
        return OperatorMatrix(self.space, -self.entries)


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    return a @ b - b @ a


def _single_mode_lower(levels: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, levels, dtype=float)), offsets=1, format="csr")


def _embed(space: FockSpace, mode: int, single: sp.spmatrix) -> sp.csr_matrix:
    eye_left = sp.identity(space.levels**mode, format="csr")
    eye_right = sp.identity(space.levels ** (space.num_modes - mode - 1), format="csr")
    return sp.kron(sp.kron(eye_left, single), eye_right, format="csr")


def ladder(space: FockSpace, mode: int, kind: Literal["lower", "raise"]) -> OperatorMatrix:
    """Annihilation (``lower``) or creation (``raise``) operator on one mode.

    Hard truncation: the creation operator maps ``|cutoff>`` to zero.
    """
    if not 0 <= mode < space.num_modes:
        raise ValueError(f"mode {mode} outside 0..{space.num_modes - 1}")
    lower = _single_mode_lower(space.levels)
    if kind == "lower":
        single = lower
    elif kind == "raise":
        single = lower.T.tocsr()
    else:
        raise ValueError(f"kind must be 'lower' or 'raise', got {kind!r}")
    return OperatorMatrix(space, _embed(space, mode, single))


def number_op(space: FockSpace, mode: int) -> OperatorMatrix:
    single = sp.diags(np.arange(space.levels, dtype=float), format="csr")
    return OperatorMatrix(space, _embed(space, mode, single))


def identity(space: FockSpace) -> OperatorMatrix:
    return OperatorMatrix(space, sp.identity(space.dim, format="csr"))


def apply_exponential(
    A: OperatorMatrix,
    psi: PureState,
    tol: float = 1e-15,
    max_terms: int = 200,
    extra_terms: int = 2,
) -> PureState:
    """Compute ``exp(A) psi`` by a scaled Taylor series on the vector.

    ``A`` is split into ``s = ceil(||A||_1)`` substeps so each substep has
    generator norm at most one.  Within a substep the series stops once a term
    falls below ``tol * ||result||`` and ``extra_terms`` further terms have been
    added.  The dense exponential is never formed.
    """
    _check_same(A.space, psi.space)
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = np.array(psi.amplitudes, dtype=complex)
    norm_est = A.norm1()
    if norm_est == 0.0 or not np.any(v):
        return PureState(psi.space, v)
    steps = max(1, math.ceil(norm_est))
    mat = A.entries / steps
    for _ in range(steps):
        result = v.copy()
        term = v
        confirmed = -1
        for k in range(1, max_terms + 1):
            term = (mat @ term) / k
            result += term
            if confirmed >= 0:
                confirmed += 1
                if confirmed >= extra_terms:
                    break
            elif np.linalg.norm(term) < tol * np.linalg.norm(result):
                confirmed = 0
        else:
            raise ExponentialConvergenceError(
                f"Taylor series did not converge within {max_terms} terms (||A||_1 = {norm_est:.3g})"
            )
        v = result
    return PureState(psi.space, v)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Dense density matrix on the physical modes.

    ``tail_bound`` records the certified trace mass lost to truncation (zero
    when the operator is exact on its space).
    """

    space: FockSpace
    matrix: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValueError(f"matrix shape {mat.shape} does not match dim {self.space.dim}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])

    def element(self, row, col) -> complex:
        return complex(self.matrix[self.space.index(row), self.space.index(col)])

    def check(self, tol_trace: float, tol_herm: float = 1e-12, tol_psd: float = 1e-9) -> None:
        """Raise ``ValueError`` unless the matrix is Hermitian, unit-trace and PSD within tolerance."""
        herm = self.hermiticity_error()
        if herm > tol_herm:
            raise ValueError(f"not Hermitian: max |rho - rho^dagger| = {herm:.3e}")
        tr = self.trace()
        if abs(tr.imag) > tol_herm or abs(tr.real - 1.0) > tol_trace:
            raise ValueError(f"trace {tr} not within {tol_trace:.1e} of 1")
        lam = self.min_eigenvalue()
        if lam < -tol_psd:
            raise ValueError(f"not positive semidefinite: min eigenvalue {lam:.3e}")


def partial_trace_tilde(psi: PureState) -> DensityOperator:
    """Reduce a doubled-space pure state to the physical modes.

    ``rho[a, b] = sum_t psi[a, t] * conj(psi[b, t])`` over tilde occupations ``t``.
    """
    modes = psi.space.num_modes
    if modes % 2:
        raise ValueError(f"doubled space needs an even mode count, got {modes}")
    k = modes // 2
    phys = FockSpace(k, psi.space.cutoff)
    block = psi.amplitudes.reshape(phys.dim, phys.dim)
    rho = block @ block.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(phys, rho)


def inner(phi: PureState, psi: PureState) -> complex:
    """<phi|psi>, conjugate-linear in ``phi``."""
    _check_same(phi.space, psi.space)
    return complex(np.vdot(phi.amplitudes, psi.amplitudes))


def trace(rho: DensityOperator) -> complex:
    return rho.trace()


def expectation(rho: DensityOperator, A: OperatorMatrix) -> complex:
    """tr(rho A)."""
    _check_same(rho.space, A.space)
    # tr(rho A) = sum_ij rho_ij A_ji
    return complex(np.sum(rho.matrix * A.entries.T.toarray()))
