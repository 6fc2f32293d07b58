"""Self-verification suite behind ``thermal-coset verify``.

Each check returns a :class:`Check`.  ``kind="check"`` entries decide the
exit status; ``kind="finding"`` entries record how a closed-form expression compares
with the oracle and only fail when the implemented default disagrees with it.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import measures, states
from .fock import apply_exponential, basis_state, identity, ladder, make_space, partial_trace_tilde
from .liealg import (
    Su11Params,
    Su2Params,
    coherent_su11_pure,
    coherent_su2_pure,
    displacement_map_su2,
    su11_amplitudes,
    su11_generators,
    su11_tail,
    su2_amplitudes,
    su2_generators,
)
from .tfd import (
    bogoliubov_images,
    bogoliubov_thermal_vacuum,
    thermal_coherent_su11_oracle,
    thermal_coherent_su2_oracle,
    thermal_context,
    thermal_overlap,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    kind: str = "check"
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        label = "finding" if self.kind == "finding" else "check"
        bits = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{status}] {label:7s} {self.name}: {bits}"

    def as_dict(self) -> dict:
        return asdict(self)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".3g")
    return str(v)


# --- invariants -------------------------------------------------------------------


def _interior_columns(space, margin: int = 1) -> np.ndarray:
    occ = np.array(np.unravel_index(np.arange(space.dim), space.shape)).T
    return np.flatnonzero(np.all(occ <= space.cutoff - margin, axis=1))


def check_commutators(cutoff: int = 8) -> Check:
    space = make_space(2, cutoff)
    cols = _interior_columns(space)
    one = identity(space)
    errs = {}
    for mode in (0, 1):
        a = ladder(space, mode, "lower")
        c = a @ a.adjoint() - a.adjoint() @ a - one
        errs[f"[a{mode},a{mode}^dag]"] = _col_err(c, cols)
    g = su2_generators(space)
    errs["[J+,J-]-2Jz"] = _col_err(g.plus @ g.minus - g.minus @ g.plus - g.z * 2, cols)
    k = su11_generators(space)
    errs["[K-,K+]-2K0"] = _col_err(k.minus @ k.plus - k.plus @ k.minus - k.zero * 2, cols)
    worst = max(errs.values())
    return Check("commutators (interior)", worst < 1e-12, {"max_err": worst, "cutoff": cutoff})


def _col_err(op, cols) -> float:
    sub = op.entries.tocsc()[:, cols]
    return float(abs(sub).max()) if sub.nnz else 0.0


def _rho_props(name: str, rho) -> Check:
    tr = abs(rho.trace() - 1.0)
    herm = rho.hermiticity_error()
    mineig = rho.min_eigenvalue()
    ok = tr <= rho.tail_bound + 1e-12 and herm < 1e-12 and mineig > -1e-9
    return Check(
        f"{name} trace/Hermiticity/PSD",
        ok,
        {"trace_err": tr, "tail_bound": rho.tail_bound, "herm_err": herm, "min_eig": mineig},
    )


def check_rho_invariants() -> list[Check]:
    ctx = thermal_context(1.0)
    return [
        _rho_props("rho su2 (j=1/2, z=0.1, x=1, cutoff 25)", states.rho_su2(0.5, 0.1, ctx, 25)),
        _rho_props("rho su11 (q=0, zeta=0.2, x=1, cutoff 25)", states.rho_su11(0, 0.2, ctx, 25)),
    ]


def check_zero_temperature() -> list[Check]:
    ctx = thermal_context(40.0)
    out = []
    rho = states.rho_su2(1.0, 0.3 + 0.1j, ctx, 4)
    pure = coherent_su2_pure(Su2Params.from_j(1.0, 0.3 + 0.1j), rho.space).amplitudes
    err = float(np.max(np.abs(rho.matrix - np.outer(pure, pure.conj()))))
    out.append(Check("T->0 su2 rho is the pure projector", err < 1e-8, {"max_err": err, "x": 40.0}))
    rho = states.rho_su11(1, 0.2, ctx, 30)
    pure = coherent_su11_pure(Su11Params(1, 0.2), rho.space).amplitudes
    err = float(np.max(np.abs(rho.matrix - np.outer(pure, pure.conj()))))
    out.append(Check("T->0 su11 rho is the pure projector", err < 1e-8, {"max_err": err, "x": 40.0}))
    f = measures.fidelity_su2_numeric(1.0, 0.3, ctx)
    out.append(Check("T->0 su2 fidelity", abs(f - 1) < 1e-8, {"F": f}))
    return out


def check_thermal_vacuum() -> Check:
    ctx = thermal_context(1.0)
    psi = bogoliubov_thermal_vacuum(ctx, 1, 40, pad=8).tensor()
    n = np.arange(41)
    expected = np.diag(np.exp(-n / 2) * math.sqrt(ctx.one_minus))
    err = float(np.max(np.abs(psi - expected)))
    return Check("thermal vacuum amplitudes (x=1, cutoff 40)", err < 1e-10, {"max_err": err})


def _series_laguerre(n: int, alpha: int, t: float) -> float:
    t = Fraction(t)
    return float(
        sum(Fraction((-1) ** k * math.comb(n + alpha, n - k)) * t**k / math.factorial(k) for k in range(n + 1))
    )


def check_laguerre(n_max: int = 50, alpha_max: int = 10, t_max: float = 20.0, points: int = 21) -> Check:
    """Recurrence against the exact-arithmetic series; error scaled by max(1, running max |L_k|)."""
    ts = np.linspace(0.0, t_max, points)
    worst = 0.0
    for alpha in range(alpha_max + 1):
        table = measures.laguerre_table(n_max, alpha, ts)
        exact = np.array([[_series_laguerre(n, alpha, t) for t in ts] for n in range(n_max + 1)])
        scale = np.maximum(1.0, np.maximum.accumulate(np.abs(exact), axis=0))
        worst = max(worst, float(np.max(np.abs(table - exact) / scale)))
    return Check("Laguerre recurrence vs series", worst < 1e-12, {"scaled_err": worst, "n_max": n_max})


# --- oracle equivalence -------------------------------------------------------------

def tamper_hook(delta: float = 1e-6):
    """Coefficient hook that shifts the first coefficient by ``delta``."""

    def hook(values, _indices):
        values = values.copy()
        values[0] += delta
        return values

    return hook


def check_oracle_su2(cutoff: int = 25, coeff_hook=None) -> Check:
    ctx = thermal_context(1.0)
    p = Su2Params.from_j(0.5, 0.1)
    rho_o = partial_trace_tilde(thermal_coherent_su2_oracle(p, ctx, cutoff))
    rho_c = states.rho_su2(0.5, 0.1, ctx, cutoff, coeff_hook=coeff_hook)
    err = float(np.max(np.abs(rho_o.matrix - rho_c.matrix)))
    return Check("oracle equivalence su2 (j=1/2, z=0.1, x=1)", err < 1e-8, {"max_err": err, "cutoff": cutoff})


def check_oracle_su11(cutoff: int = 25, coeff_hook=None) -> Check:
    ctx = thermal_context(1.0)
    p = Su11Params(0, 0.2)
    rho_o = partial_trace_tilde(thermal_coherent_su11_oracle(p, ctx, cutoff))
    rho_c = states.rho_su11(0, 0.2, ctx, cutoff, coeff_hook=coeff_hook)
    err = float(np.max(np.abs(rho_o.matrix - rho_c.matrix)))
    return Check("oracle equivalence su11 (q=0, zeta=0.2, x=1)", err < 1e-8, {"max_err": err, "cutoff": cutoff})


# --- findings -------------------------------------------------------------------------


def finding_su2_map(j: float = 1.0, eta: complex = 2.0) -> Check:
    """Exponentiate eta J+ - eta* J- on |j,-j> and compare with both coset maps."""
    p = Su2Params.from_j(j, 0)
    space = make_space(2, p.twice_j)
    g = su2_generators(space)
    gen = g.plus * eta - g.minus * complex(eta).conjugate()
    exact = apply_exponential(gen, basis_state(space, (0, p.twice_j))).amplitudes
    errs = {}
    for kind in ("tangent", "sine"):
        z = displacement_map_su2(eta, kind)
        errs[kind] = float(np.max(np.abs(coherent_su2_pure(Su2Params.from_j(j, z), space).amplitudes - exact)))
    matched = [k for k, e in errs.items() if e < 1e-10]
    return Check(
        "su2 displacement map (sine vs tangent)",
        "tangent" in matched,
        {"eta": abs(eta), "err_tangent": errs["tangent"], "err_sine": errs["sine"], "matches": "+".join(matched) or "none", "default": "tangent"},
        kind="finding",
    )


def finding_fidelity_reading() -> Check:
    ctx = thermal_context(1.0)
    closed = measures.fidelity_su2_closed(1.0, ctx)
    form = measures.fidelity_su2_numeric(1.0, 0.3, ctx) ** 2  # <z|rho|z>
    su2_sqrt = abs(closed - math.sqrt(form)) < 1e-10
    su2_plain = abs(closed - form) < 1e-10
    triple = measures.fidelity_su11_triple_sum(0, 0.2, ctx).value
    form11 = measures.fidelity_su11_numeric(0, 0.2, ctx, 30) ** 2
    su11_sqrt = abs(triple - math.sqrt(form11)) < 1e-10
    su11_plain = abs(triple - form11) < 1e-10
    detail = {
        "su2_closed_form_is": "F=sqrt<rho>" if su2_sqrt else ("<rho>" if su2_plain else "neither"),
        "su11_triple_sum_is": "F^2=<rho>" if su11_plain else ("F" if su11_sqrt else "neither"),
        "su11_reported_F": "sqrt(triple sum)",
    }
    return Check("fidelity square-root reading", su2_sqrt and su11_plain, detail, kind="finding")


def finding_gamma_exponent(cutoff: int = 20) -> Check:
    """Exponent n+nbar+q+2 on (1-e^{-x}) against a constant (q+2) exponent, both vs the oracle."""
    ctx = thermal_context(1.0)
    q, zeta = 1, 0.3
    rho_o = partial_trace_tilde(thermal_coherent_su11_oracle(Su11Params(q, zeta), ctx, cutoff, pad=8))

    def constant_exponent(values, idx):
        return values * ctx.one_minus ** (-(idx["n"] + idx["nbar"]).astype(float))

    err_varying = float(np.max(np.abs(states.rho_su11(q, zeta, ctx, cutoff, tol_tail=None).matrix - rho_o.matrix)))
    err_const = float(
        np.max(
            np.abs(states.rho_su11(q, zeta, ctx, cutoff, tol_tail=None, coeff_hook=constant_exponent).matrix - rho_o.matrix)
        )
    )
    return Check(
        "su11 Gamma exponent n+nbar+q+2",
        err_varying < 1e-8,
        {"err_n+nbar+q+2": err_varying, "err_constant_q+2": err_const},
        kind="finding",
    )


def finding_chi_convention() -> Check:
    ctx = thermal_context(1.0)
    rng = np.random.default_rng(7)
    rho2 = states.rho_su2(0.5, 0.3 + 0.4j, ctx, 30, tol_tail=None)
    rho11 = states.rho_su11(0, 0.2, ctx, 30, tol_tail=None)
    errs = {}
    for label, rho, fn, args in (
        ("su2_complex_z", rho2, measures.wigner_su2_closed, (0.5, 0.3 + 0.4j)),
        ("su11", rho11, measures.wigner_su11_closed, (0, 0.2)),
    ):
        pts = [measures.WignerPoint(*rng.uniform(-1.2, 1.2, 4)) for _ in range(3)]
        for chi in ("standard", "literal"):
            worst = 0.0
            for pt in pts:
                ref = measures.wigner_numeric(rho, pt)
                try:
                    val = fn(pt, *args, ctx, chi=chi)
                except ArithmeticError:
                    val = math.nan
                worst = max(worst, abs(val - ref) / max(abs(ref), 1e-12)) if not math.isnan(val) else math.inf
            errs[f"{label}_{chi}"] = worst
    ok = errs["su2_complex_z_standard"] < 1e-6 and errs["su11_standard"] < 1e-6
    return Check("Wigner chi convention", ok, {**errs, "default": "standard"}, kind="finding")


# --- fidelity -------------------------------------------------------------------------


def check_fidelity_points() -> list[Check]:
    ctx = thermal_context(1.0)
    closed = measures.fidelity_su2_closed(1.0, ctx)
    num = measures.fidelity_su2_numeric(1.0, 0.3, ctx)
    out = [Check("su2 fidelity closed vs numeric (j=1, z=0.3, x=1)", abs(closed - num) < 1e-8, {"abs_diff": abs(closed - num)})]
    res = measures.fidelity_su11_triple_sum(0, 0.2, ctx)
    series = math.sqrt(res.value)
    num = measures.fidelity_su11_numeric(0, 0.2, ctx, 30)
    out.append(
        Check(
            "su11 fidelity series vs numeric (q=0, zeta=0.2, x=1)",
            abs(series - num) < 1e-7,
            {"abs_diff": abs(series - num), "remainder": res.remainder_bound},
        )
    )
    return out


def check_fidelity_scan() -> list[Check]:
    xs = np.geomspace(0.1, 10.0, 50)
    diffs = [abs(measures.fidelity_su2_closed(1.0, thermal_context(x)) - measures.fidelity_su2_numeric(1.0, 0.3, thermal_context(x))) for x in xs]
    out = [Check("su2 fidelity scan j=1, x in [0.1, 10]", max(diffs) < 1e-7, {"max_abs_diff": max(diffs), "points": 50})]
    fs = [math.sqrt(measures.fidelity_su11_triple_sum(0, 0.2, thermal_context(x)).value) for x in xs]
    mono = all(b >= a - 1e-15 for a, b in zip(fs, fs[1:]))
    out.append(Check("su11 fidelity monotone in x, below 1", mono and max(fs) < 1, {"F_min": min(fs), "F_max": max(fs)}))
    return out


# --- full-only --------------------------------------------------------------------------


def check_identity_resolution(nodes: int = 64) -> list[Check]:
    out = []
    for j in (0.5, 1.0, 3.0):
        err = states.identity_resolution_su2(j, nodes, nodes)
        out.append(Check(f"identity resolution su2 j={j:g} ({nodes}x{nodes})", err < 1e-10, {"max_err": err}))
    return out


def check_wigner_oracle(points: int = 20, seed: int = 2024) -> list[Check]:
    ctx = thermal_context(1.0)
    rng = np.random.default_rng(seed)
    out = []
    for label, rho, fn, args in (
        ("su2 (j=1/2, z=0.1, x=1)", states.rho_su2(0.5, 0.1, ctx, 40, tol_tail=None), measures.wigner_su2_closed, (0.5, 0.1)),
        ("su11 (q=0, zeta=0.2, x=1)", states.rho_su11(0, 0.2, ctx, 40, tol_tail=None), measures.wigner_su11_closed, (0, 0.2)),
    ):
        worst = 0.0
        for _ in range(points):
            pt = measures.WignerPoint(*rng.uniform(-2.0, 2.0, 4))
            ref = measures.wigner_numeric(rho, pt)
            val = fn(pt, *args, ctx)
            err = abs(val - ref) / abs(ref) if abs(ref) > 1e-12 else abs(val - ref)
            worst = max(worst, err)
        out.append(Check(f"Wigner closed vs numeric {label}", worst < 1e-6, {"max_rel_err": worst, "points": points}))
    return out


def check_overlaps() -> list[Check]:
    out = []
    q = 2
    n_top = next(n for n in range(10_000) if su11_tail(q, 0.3, n) < 1e-20)
    su2_pairs = [(0.1, 0.5j), (1 + 1j, -0.3), (2.0, 2.1)]
    su11_pairs = [(0.1, 0.2j), (0.2 + 0.2j, -0.25), (0.3, 0.28)]
    worst = {"su2": 0.0, "su11": 0.0}
    for x in (0.5, 1.0, 5.0):
        ctx = thermal_context(x)
        images = bogoliubov_images(ctx, n_top + q, tail_tol=1e-12)
        occ = [(a, 6 - a) for a in range(7)]
        for z1, z2 in su2_pairs:
            got = thermal_overlap(occ, su2_amplitudes(6, z1), su2_amplitudes(6, z2), ctx, images=images)
            worst["su2"] = max(worst["su2"], abs(got - states.overlap_su2(z1, z2, 3)))
        occ = [(n + q, n) for n in range(n_top + 1)]
        for z1, z2 in su11_pairs:
            got = thermal_overlap(occ, su11_amplitudes(q, z1, n_top), su11_amplitudes(q, z2, n_top), ctx, images=images)
            worst["su11"] = max(worst["su11"], abs(got - states.overlap_su11(z1, z2, q)))
    for k, v in worst.items():
        out.append(Check(f"thermal overlaps {k} at x in (0.5, 1, 5)", v < 1e-9, {"max_err": v}))
    return out


# --- driver ----------------------------------------------------------------------------


def _timed(fn, *args, **kwargs) -> list[Check]:
    t0 = time.perf_counter()
    res = fn(*args, **kwargs)
    res = res if isinstance(res, list) else [res]
    dt = (time.perf_counter() - t0) / len(res)
    for c in res:
        c.seconds = dt
    return res


def run(level: str = "quick", tamper: bool = False, log=None) -> list[Check]:
    if level not in ("quick", "full"):
        raise ValueError(f"level must be quick or full, got {level!r}")
    hook = tamper_hook() if tamper else None
    steps: list[tuple] = [
        (check_commutators,),
        (check_rho_invariants,),
        (check_zero_temperature,),
        (check_thermal_vacuum,),
        (check_laguerre,),
        (check_oracle_su2, 25, hook),
        (check_oracle_su11, 25),
        (check_fidelity_points,),
        (finding_su2_map,),
        (finding_fidelity_reading,),
        (finding_gamma_exponent,),
        (finding_chi_convention,),
    ]
    if level == "full":
        steps += [
            (check_identity_resolution,),
            (check_wigner_oracle,),
            (check_fidelity_scan,),
            (check_overlaps,),
        ]
    results = []
    for fn, *args in steps:
        for c in _timed(fn, *args):
            results.append(c)
            if log is not None:
                log(c.line())
    return results


__all__ = ["Check", "run", "tamper_hook"]
