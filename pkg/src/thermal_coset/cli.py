"""``thermal-coset`` command line: rho, fidelity, wigner and verify subcommands.

Exit codes: 0 success, 1 verification or numerical failure, 2 invalid input,
3 resource cap or truncation certification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, measures, states, verify
from .fock import DensityOperator, DimensionCapError, ExponentialConvergenceError, make_space, partial_trace_tilde
from .liealg import (
    HwParams,
    Su11Params,
    Su2Params,
    TailError,
    coherent_hw_pure,
)
from .tfd import ThermalContext, thermal_coherent_hw, thermal_context, thermal_context_physical

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3
AUTO_WIGNER_REL = 1e-9  # automatic Wigner tail target, relative to the grid peak


class InputError(ValueError):
    pass


# --- formatting ------------------------------------------------------------------


def fmt(v: float) -> str:
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {v} in output")
    return format(v, ".17g")


def to_json(obj, indent: int = 0) -> str:
    """JSON text with every float printed at 17 significant digits."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent + 2)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 2) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, complex):
        return to_json([obj.real, obj.imag])
    return json.dumps(str(obj))


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def csv_with_metadata(meta: dict, header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {json.dumps(v, sort_keys=True, default=_json_default)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


# --- config ------------------------------------------------------------------------


def parse_complex(text: str) -> complex:
    parts = [p.strip() for p in str(text).split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise InputError(f"cannot parse complex value {text!r}; use 're' or 're,im'")


def parse_axis(text: str) -> tuple[float, float, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise InputError(f"axis spec {text!r} must be 'min,max,count'")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 2 or not hi > lo:
        raise InputError(f"axis spec {text!r} needs max > min and count >= 2")
    return lo, hi, count


@dataclass
class RunConfig:
    algebra: str
    params: dict
    ctx: ThermalContext
    thermal: dict
    cutoff: int | None = None
    tol_tail: float = 1e-8
    extra: dict = field(default_factory=dict)

    def echo(self) -> dict:
        p = {k: ([v.real, v.imag] if isinstance(v, complex) else v) for k, v in self.params.items()}
        return {"algebra": self.algebra, "params": p, "thermal": self.thermal, "x": self.ctx.x, **self.extra}


def resolve_thermal(args) -> tuple[ThermalContext, dict]:
    has_x = args.x is not None
    has_phys = args.omega_hz is not None or args.temp_k is not None
    if has_x == has_phys:
        raise InputError("give exactly one thermal specification: --x, or --omega-hz with --temp-k")
    if has_x:
        return thermal_context(args.x), {"x": args.x}
    if args.omega_hz is None or args.temp_k is None:
        raise InputError("--omega-hz and --temp-k must be given together")
    ctx = thermal_context_physical(args.omega_hz, args.temp_k)
    return ctx, {"omega_hz": args.omega_hz, "temp_k": args.temp_k}


def resolve_state(args) -> tuple[str, dict]:
    alg = args.algebra
    given = {k: getattr(args, k) for k in ("z", "eta", "zeta", "alpha") if getattr(args, k) is not None}
    if alg == "su2":
        if args.j is None:
            raise InputError("su2 needs --j")
        if set(given) not in ({"z"}, {"eta"}):
            raise InputError("su2 needs exactly one of --z or --eta")
        if "eta" in given:
            eta = parse_complex(given["eta"])
            p = Su2Params.from_eta(args.j, eta, args.su2_map)
            return alg, {"j": p.j, "z": p.z, "eta": eta, "su2_map": args.su2_map}
        p = Su2Params.from_j(args.j, parse_complex(given["z"]))
        return alg, {"j": p.j, "z": p.z}
    if alg == "su11":
        if args.q is None:
            raise InputError("su11 needs --q")
        if set(given) not in ({"zeta"}, {"alpha"}):
            raise InputError("su11 needs exactly one of --zeta or --alpha")
        if "alpha" in given:
            alpha = parse_complex(given["alpha"])
            p = Su11Params.from_alpha(args.q, alpha)
            return alg, {"q": p.q, "zeta": p.zeta, "alpha": alpha}
        p = Su11Params(args.q, parse_complex(given["zeta"]))
        return alg, {"q": p.q, "zeta": p.zeta}
    if alg == "hw":
        if set(given) != {"alpha"}:
            raise InputError("hw needs exactly --alpha")
        return alg, {"alpha": parse_complex(given["alpha"])}
    raise InputError(f"unknown algebra {alg!r}")


def parse_cutoff(text: str | None) -> int | None:
    if text is None or text == "auto":
        return None
    try:
        value = int(text)
    except ValueError:
        raise InputError(f"cutoff must be an integer or 'auto', got {text!r}") from None
    if value < 1:
        raise InputError("cutoff must be >= 1")
    return value


def build_config(args) -> RunConfig:
    algebra, params = resolve_state(args)
    ctx, thermal = resolve_thermal(args)
    cutoff = parse_cutoff(getattr(args, "cutoff", None))
    return RunConfig(algebra, params, ctx, thermal, cutoff, getattr(args, "tol_tail", 1e-8))


def envelope(command: str, cfg: RunConfig, cutoffs: dict, bounds: dict, payload) -> dict:
    return {
        "tool": "thermal-coset",
        "version": __version__,
        "command": command,
        "config": cfg.echo(),
        "x": cfg.ctx.x,
        "cutoffs": cutoffs,
        "bounds": bounds,
        "payload": payload,
    }


# --- rho -----------------------------------------------------------------------------


def _hw_rho(alpha: complex, ctx: ThermalContext, cutoff: int | None, tol: float):
    if cutoff is None:
        nbar = math.exp(-ctx.x) / ctx.one_minus
        mean = abs(alpha) ** 2 + nbar
        cutoff = math.ceil(states.AUTO_SAFETY * (mean + 12 * math.sqrt(mean + 1) + 10))
    coherent_hw_pure(HwParams(alpha), make_space(1, cutoff), tol_tail=tol)
    psi = thermal_coherent_hw(alpha, ctx, cutoff, pad=8)
    rho = partial_trace_tilde(psi)
    deficit = max(0.0, 1.0 - float(np.vdot(psi.amplitudes, psi.amplitudes).real))
    if deficit > tol:
        raise TailError(f"hw trace deficit {deficit:.3e} > {tol:.1e} at cutoff {cutoff}", math.ceil(1.5 * cutoff))
    return DensityOperator(rho.space, rho.matrix, tail_bound=deficit), cutoff


def compute_rho(cfg: RunConfig):
    p = cfg.params
    if cfg.algebra == "su2":
        cutoff = cfg.cutoff or states.auto_cutoff_su2(p["j"], p["z"], cfg.ctx, cfg.tol_tail)
        return states.rho_su2(p["j"], p["z"], cfg.ctx, cutoff, tol_tail=cfg.tol_tail), cutoff
    if cfg.algebra == "su11":
        cutoff = cfg.cutoff or states.auto_cutoff_su11(p["q"], p["zeta"], cfg.ctx, cfg.tol_tail)
        return states.rho_su11(p["q"], p["zeta"], cfg.ctx, cutoff, tol_tail=cfg.tol_tail), cutoff
    return _hw_rho(p["alpha"], cfg.ctx, cfg.cutoff, cfg.tol_tail)


def cmd_rho(args) -> int:
    cfg = build_config(args)
    rho, cutoff = compute_rho(cfg)
    space = rho.space
    labels = [list(space.occupation(i)) for i in range(space.dim)]
    bounds = {"trace_tail": rho.tail_bound, "trace_error": abs(rho.trace() - 1.0)}
    cutoffs = {"per_mode": cutoff}
    out = Path(args.output)
    if args.format == "json":
        mat = rho.matrix
        payload = {
            "labels": labels,
            "matrix": [[[float(mat[r, c].real), float(mat[r, c].imag)] for c in range(space.dim)] for r in range(space.dim)],
        }
        write_text(out, to_json(envelope("rho", cfg, cutoffs, bounds, payload)) + "\n")
    else:
        rows = []
        nz = np.argwhere(np.abs(rho.matrix) > 0)
        for r, c in nz:  # argwhere is row-major, so ordering is deterministic
            v = rho.matrix[r, c]
            rows.append([_label(labels[r]), _label(labels[c]), fmt(v.real), fmt(v.imag)])
        meta = envelope("rho", cfg, cutoffs, bounds, "triplets below")
        write_text(out, csv_with_metadata(meta, ["row_label", "col_label", "re", "im"], rows))
    print(f"wrote {out} (cutoff {cutoff}, dim {space.dim}, trace tail {rho.tail_bound:.3e})")
    return EXIT_OK


def _label(occ) -> str:
    return "|" + " ".join(str(n) for n in occ) + ">"


# --- fidelity --------------------------------------------------------------------------


def _scan_xs(args, ctx: ThermalContext) -> list[float]:
    if args.x_min is None and args.x_max is None:
        return [ctx.x]
    if args.x_min is None or args.x_max is None or not 0 < args.x_min < args.x_max:
        raise InputError("scan needs 0 < --x-min < --x-max")
    if args.steps < 2:
        raise InputError("--steps must be >= 2")
    if args.scale == "log":
        return [float(v) for v in np.geomspace(args.x_min, args.x_max, args.steps)]
    return [float(v) for v in np.linspace(args.x_min, args.x_max, args.steps)]


def cmd_fidelity(args) -> int:
    scanning = args.x_min is not None or args.x_max is not None
    omega = args.omega_hz
    if scanning:
        if args.x is not None or args.temp_k is not None:
            raise InputError("a scan takes its thermal values from --x-min/--x-max; --omega-hz only labels T")
        args.x, args.omega_hz = args.x_min, None
    cfg = build_config(args)
    if scanning:
        cfg.thermal = {"scan": True, "omega_hz": omega}
    if cfg.algebra == "hw":
        raise InputError("fidelity supports su2 and su11")
    xs = _scan_xs(args, cfg.ctx)
    p = cfg.params
    label = "F_closed" if cfg.algebra == "su2" else "F_series"
    header = ["x", "T_equivalent_K", label, "F_numeric", "abs_diff", "bound", "flag"]
    rows, worst = [], 0.0
    flagged = 0
    for x in xs:
        ctx = thermal_context(x)
        temp = fmt(ctx.temperature_k(omega)) if omega else ""
        flag, bound = "", 0.0
        if cfg.algebra == "su2":
            ref = measures.fidelity_su2_closed(p["j"], ctx)
            num = measures.fidelity_su2_numeric(p["j"], p["z"], ctx)
        else:
            cutoff = cfg.cutoff or _su11_fidelity_cutoff(p["q"], p["zeta"])
            num = measures.fidelity_su11_numeric(p["q"], p["zeta"], ctx, cutoff)
            try:
                res = measures.fidelity_su11_triple_sum(p["q"], p["zeta"], ctx)
                ref = math.sqrt(res.value)
                bound = res.remainder_bound / (2 * ref) + measures.fidelity_su11_numeric_bound(p["q"], p["zeta"], cutoff)
            except (ArithmeticError, ExponentialConvergenceError) as exc:
                ref, flag = math.nan, f"series: {exc}".replace(",", ";")
                flagged += 1
        diff = abs(ref - num)
        if not flag:
            worst = max(worst, diff)
        rows.append([fmt(x), temp, "" if flag else fmt(ref), fmt(num), "" if flag else fmt(diff), fmt(bound), flag])
    meta = envelope("fidelity", cfg, {}, {"max_abs_diff": worst, "flagged_rows": flagged}, "rows below")
    meta["config"]["scan"] = {"x_min": args.x_min, "x_max": args.x_max, "steps": args.steps, "scale": args.scale} if scanning else None
    out = Path(args.output)
    write_text(out, csv_with_metadata(meta, header, rows))
    print(f"wrote {out} ({len(rows)} rows, max |diff| {worst:.3e})")
    return EXIT_OK


def _su11_fidelity_cutoff(q: int, zeta: complex, bound: float = 1e-12) -> int:
    c = q + 1
    while measures.fidelity_su11_numeric_bound(q, zeta, c) > bound:
        c += 1
    return c


# --- wigner ----------------------------------------------------------------------------


def parse_fixed(text: str | None) -> dict:
    fixed = {}
    if not text:
        return fixed
    for part in text.split(","):
        name, _, value = part.partition("=")
        name = name.strip()
        if name not in measures.COORDS or not value:
            raise InputError(f"fixed coordinate {part!r} must look like q2=0.0")
        fixed[name] = float(value)
    return fixed


def cmd_wigner(args) -> int:
    cfg = build_config(args)
    if cfg.algebra == "hw":
        raise InputError("wigner supports su2 and su11")
    plane = tuple(s.strip() for s in args.plane.split(","))
    axis1, axis2 = parse_axis(args.axis1), parse_axis(args.axis2)
    fixed = parse_fixed(args.fixed)
    fixed = {name: fixed.get(name, 0.0) for name in measures.COORDS if name not in plane}
    n_terms = parse_cutoff(args.truncation)
    params = {k: v for k, v in cfg.params.items() if k in ("j", "z", "q", "zeta")}
    grid_args = (cfg.algebra, params, cfg.ctx, plane, axis1, axis2, fixed, args.phase_omega)

    # the resummed grid is exact in the (n1, n2) sums; it scales the automatic
    # tolerance and measures the rounding error of the literal series
    reference = measures.wigner_grid(*grid_args, 1e-12, None, args.chi, "resummed")
    peak = float(np.max(np.abs(reference.values)))
    if args.tol_wigner == "auto":
        tol = max(AUTO_WIGNER_REL * peak, 1e-300)
    else:
        tol = float(args.tol_wigner)
    if args.method == "resummed":
        grid = reference if reference.tail_bound <= tol else measures.wigner_grid(*grid_args, tol, None, args.chi, "resummed")
    else:
        if n_terms is not None:
            tail = _wigner_tail(cfg, params, n_terms, tol)
            if tail > tol:
                auto = measures.wigner_auto_terms(cfg.algebra, params, cfg.ctx, tol)
                raise TailError(f"Wigner truncation tail {tail:.3e} > {tol:.1e}; try --truncation {auto}", auto)
        grid = measures.wigner_grid(*grid_args, tol, n_terms, args.chi, "series")
    rounding = float(np.max(np.abs(grid.values - reference.values)))
    c1, c2 = grid.coords()
    rows = []
    for i, a in enumerate(c1):
        for k, b in enumerate(c2):
            raw = grid.values[i, k]
            rows.append([fmt(a), fmt(b), fmt(raw), fmt(raw * measures.RAW_TO_NORMALIZED)])
    slice_info = {"plane": list(plane), "axis1": list(axis1), "axis2": list(axis2), "fixed": fixed, "phase_omega": args.phase_omega}
    cfg.extra = {
        "slice": slice_info,
        "chi": args.chi,
        "method": args.method,
        "tol_wigner": args.tol_wigner,
        "convention": "raw (vacuum at origin = 4); normalized = raw/(2 pi)^2",
    }
    bounds = {
        "raw_tail": grid.tail_bound,
        "raw_tail_target": tol,
        "normalized_tail": grid.tail_bound * measures.RAW_TO_NORMALIZED,
        "series_vs_resummed_max_abs": rounding,
    }
    summary = {
        "min_raw": float(grid.values.min()),
        "max_raw": float(grid.values.max()),
        "columns": ["coord1", "coord2", "f_w", "f_w_normalized"],
    }
    meta = envelope("wigner", cfg, {"n_terms": grid.n_terms}, bounds, summary)
    out = Path(args.output)
    write_text(out, csv_with_metadata(meta, ["coord1", "coord2", "f_w", "f_w_normalized"], rows))
    write_text(out.with_name(out.name + ".json"), to_json(meta) + "\n")
    print(
        f"wrote {out} and {out.name}.json ({len(rows)} points, n_terms {grid.n_terms}, "
        f"tail {grid.tail_bound:.3e}, series-resummed {rounding:.3e})"
    )
    return EXIT_OK


def _wigner_tail(cfg: RunConfig, params: dict, n_terms: int, tol: float) -> float:
    if cfg.algebra == "su2":
        return measures.su2_wigner_tail(params["j"], params["z"], cfg.ctx, n_terms)
    n_cap = measures.su11_wigner_n_cap(params["q"], params["zeta"], tol)
    return measures.su11_wigner_tail(params["q"], params["zeta"], cfg.ctx, n_terms, n_cap)


# --- verify ----------------------------------------------------------------------------


def cmd_verify(args) -> int:
    results = verify.run(args.level, tamper=args.tamper_c, log=print)
    failed = [c for c in results if not c.passed]
    report = {
        "tool": "thermal-coset",
        "version": __version__,
        "command": "verify",
        "level": args.level,
        "tampered": bool(args.tamper_c),
        "passed": not failed,
        "checks": [{k: v for k, v in c.as_dict().items() if k != "seconds"} for c in results],
    }
    if args.report:
        write_text(Path(args.report), to_json(report) + "\n")
    print(f"{len(results) - len(failed)}/{len(results)} passed")
    return EXIT_OK if not failed else EXIT_VERIFY


# --- parser ------------------------------------------------------------------------------


def _state_args(p: argparse.ArgumentParser, cutoff: bool = True) -> None:
    p.add_argument("--algebra", choices=("su2", "su11", "hw"), required=True)
    p.add_argument("--j", type=float, help="su2 label (half-integer)")
    p.add_argument("--q", type=int, help="su11 label; Bargmann index k = (1+q)/2")
    p.add_argument("--z", help="su2 coset point 're,im'")
    p.add_argument("--eta", help="su2 displacement parameter 're,im' (mapped to z)")
    p.add_argument("--su2-map", choices=("tangent", "sine"), default="tangent")
    p.add_argument("--zeta", help="su11 coset point 're,im', |zeta| < 1")
    p.add_argument("--alpha", help="hw amplitude, or su11 displacement parameter 're,im'")
    p.add_argument("--x", type=float, help="dimensionless hbar*omega/(k_B T)")
    p.add_argument("--omega-hz", type=float)
    p.add_argument("--temp-k", type=float)
    if cutoff:
        p.add_argument("--cutoff", default="auto", help="per-mode cutoff or 'auto'")
        p.add_argument("--tol-tail", type=float, default=1e-8)
    p.add_argument("--output", "-o", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermal-coset", description="Thermal coherent states in the thermofield formalism.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rho", help="write the thermal density operator")
    _state_args(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("fidelity", help="closed-form/series vs numeric fidelity over an x scan")
    _state_args(p)
    p.add_argument("--x-min", type=float)
    p.add_argument("--x-max", type=float)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--scale", choices=("log", "linear"), default="log")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("wigner", help="closed-form thermal Wigner function on a 2D slice")
    _state_args(p, cutoff=False)
    p.add_argument("--plane", default="q1,p1", help="two free coordinates, e.g. q1,p1")
    p.add_argument("--axis1", default="-4,4,41", help="min,max,count")
    p.add_argument("--axis2", default="-4,4,41", help="min,max,count")
    p.add_argument("--fixed", default="", help="values of the other coordinates, e.g. q2=0,p2=0")
    p.add_argument("--phase-omega", type=float, default=1.0, help="oscillator frequency in x = q sqrt(w) + i p / sqrt(w)")
    p.add_argument("--truncation", default="auto", help="(n1, n2) sum cap or 'auto'")
    p.add_argument("--tol-wigner", default="auto", help="certified raw-convention tail, or 'auto' (1e-9 of the grid peak)")
    p.add_argument("--method", choices=("series", "resummed"), default="series")
    p.add_argument("--chi", choices=("standard", "literal"), default="standard")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("verify", help="run the self-verification suite")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--report", help="also write a JSON report here")
    p.add_argument("--tamper-c", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except (TailError, DimensionCapError, MemoryError) as exc:
        hint = getattr(exc, "suggested_cutoff", None)
        print(f"error: {exc}" + (f" (suggested: {hint})" if hint else ""), file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, ExponentialConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"wall time {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
