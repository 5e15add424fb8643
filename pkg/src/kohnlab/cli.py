"""Command-line front end: configured sweeps with CSV + manifest output.

Subcommands map one-to-one onto the figure-shaped tables of the study:

  sweep-k        phase_vs_k.csv  - every scheme vs the oracle over k
  tau-scan       tau_scan.csv    - eta_v, determinants, conditioning over tau
  surface-ab     surface_ab.csv  - phase surface over the correlation exponents
  gamma-scan     gamma_scan.csv  - phase vs the shielding parameter
  complex-check  complex_check.csv - determinant circle of the outgoing variant

Configuration is a flat key = value file (unknown keys are errors) with
command-line overrides; every run writes a manifest.json echoing the
full configuration so the sweep can be reproduced bit-identically.  CSV
payloads are deterministic: fixed ordering, 17 significant digits, no
timestamps.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .basis import BasisSpec
from .complexkohn import det_complex_exact, scan_D, solve_complex_at_tau
from .engine import assemble_elements, kohn_cotangent, rotate_table, _solve_eta
from .errors import ConfigError, KohnError, NoAnomalyFreeRoot
from .linalg import cond_one
from .potentials import PotentialKind, PotentialSpec, build_grid, oracle_phase_shift
from .singularities import (
    SingularityReport,
    analyze_table,
    anomaly_measure,
    det_at_tau,
    extract_coeffs,
    form_value,
    optimize_tau,
)

__all__ = ["RunConfig", "load_config", "main"]

_POTENTIALS = {
    "zero": PotentialKind.ZERO,
    "exponential": PotentialKind.EXPONENTIAL,
    "square_well": PotentialKind.SQUARE_WELL,
}

# fraction of the sweep-median Lambda below which a probe counts as
# ill-conditioned; a row is flagged when all three probe phases are
D_LAMBDA_RTOL = 1e-4


@dataclass(frozen=True)
class RunConfig:
    potential: str = "exponential"
    v0: float = -3.0
    r0: float = 1.0
    gamma: float = 0.75
    c: float = 0.0
    alpha: float = 0.6
    beta: float = 1.0
    m1: int = 6
    m2: int = 6
    norm: float = 1.0
    k: tuple[float, ...] = field(default_factory=lambda: tuple(
        np.linspace(0.05, 1.0, 20)
    ))
    p: int = 1001
    r_max: float = 60.0
    nodes: int = 480
    scheme: str = "anomaly_free"
    out: str = "kohn-run"

    def validate(self) -> "RunConfig":
        if self.potential not in _POTENTIALS:
            raise ConfigError(f"unknown potential {self.potential!r}")
        if self.scheme not in ("anomaly_free", "median"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.p < 3:
            raise ConfigError(f"p must be >= 3, got {self.p}")
        if not self.k or any(kk <= 0.0 for kk in self.k):
            raise ConfigError("k values must be positive")
        if self.nodes < 16:
            raise ConfigError("need at least 16 quadrature nodes")
        try:
            self.potential_spec()
            self.basis_spec()
        except (ValueError, IndexError) as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def potential_spec(self) -> PotentialSpec:
        kind = _POTENTIALS[self.potential]
        if kind is PotentialKind.ZERO:
            return PotentialSpec.zero()
        return PotentialSpec(kind, self.v0, self.r0)

    def basis_spec(self, alpha=None, beta=None, gamma=None) -> BasisSpec:
        return BasisSpec(
            gamma=self.gamma if gamma is None else gamma,
            c=self.c,
            alpha=self.alpha if alpha is None else alpha,
            beta=self.beta if beta is None else beta,
            m1=self.m1,
            m2=self.m2,
            norm=self.norm,
        )

    def grid(self):
        return build_grid(self.r_max, self.nodes, self.potential_spec())


_SCALARS = {
    "potential": str,
    "v0": float,
    "r0": float,
    "gamma": float,
    "c": float,
    "alpha": float,
    "beta": float,
    "m1": int,
    "m2": int,
    "norm": float,
    "p": int,
    "r_max": float,
    "nodes": int,
    "scheme": str,
    "out": str,
}


def parse_values(spec: str) -> tuple[float, ...]:
    """Momentum/parameter lists: 'lo:hi:count', comma list, or one value."""
    spec = spec.strip()
    try:
        if ":" in spec:
            lo, hi, count = spec.split(":")
            n = int(count)
            if n < 1:
                raise ValueError
            return tuple(np.linspace(float(lo), float(hi), n))
        if "," in spec:
            return tuple(float(v) for v in spec.split(",") if v.strip())
        return (float(spec),)
    except ValueError as exc:
        raise ConfigError(f"cannot parse value list {spec!r}") from exc


def load_config(path: str | Path) -> dict:
    """Flat key = value file; comments with '#'; unknown keys are errors."""
    fields = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "k":
            fields["k"] = parse_values(value)
        elif key in _SCALARS:
            try:
                fields[key] = _SCALARS[key](value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}") from exc
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return fields


def make_config(args) -> RunConfig:
    fields = {}
    if args.config:
        fields.update(load_config(args.config))
    if args.k is not None:
        fields["k"] = parse_values(args.k)
    for name in ("p", "alpha", "beta", "gamma", "out"):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    return RunConfig(**fields).validate()


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def write_manifest(outdir: Path, config: RunConfig, payload: dict) -> None:
    manifest = {
        "tool": "kohn-lab",
        "version": __version__,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config": {**asdict(config), "k": list(config.k)},
    }
    manifest.update(payload)
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def report_to_dict(report: SingularityReport) -> dict:
    pair = report.roots.complex_pair
    return {
        "k": report.k,
        "coefficients": {
            "a": report.coeffs.a,
            "b": report.coeffs.b,
            "c": report.coeffs.c,
        },
        "real_roots": list(report.roots.real),
        "complex_pair": None if pair is None else {
            "re": pair[0].real, "im": abs(pair[0].imag),
        },
        "classifications": [cl.value for cl in report.classifications],
        "anomaly_free_root": report.af_root,
        "eta_hat": report.eta_hat,
        "degenerate": report.degenerate,
        "near_real_complex": report.roots.near_real_complex,
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sweep_k(config: RunConfig) -> int:
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    potential = config.potential_spec()
    grid = config.grid()

    per_k = []
    failures = 0
    for k in config.k:
        entry = {"k": k}
        try:
            table = assemble_elements(potential, config.basis_spec(), k, grid)
            report = analyze_table(table, config.c)
            measure = anomaly_measure(table, config.p, config.c)
            entry["eta_oracle"] = oracle_phase_shift(potential, k, grid)
            _, entry["eta_median"] = optimize_tau("median", report=None,
                                                  measure=measure)
            try:
                _, entry["eta_anomaly_free"] = optimize_tau(
                    "anomaly_free", report=report, measure=measure)
            except NoAnomalyFreeRoot:
                entry["eta_anomaly_free"] = math.nan
                entry.setdefault("flags", []).append("no_anomaly_free_root")
            entry["eta_complex"] = solve_complex_at_tau(table, 0.0, config.c).eta_v
            entry["abs_D"] = abs(report.coeffs.d_const)
            for tag, tau in (("lambda_tau0", 0.0),
                             ("lambda_tau_pi4", 0.25 * math.pi),
                             ("lambda_tau_pi2", 0.5 * math.pi)):
                a, _, _ = rotate_table(table, tau)
                entry[tag] = cond_one(a)[1]
            if report.roots.near_real_complex:
                entry.setdefault("flags", []).append("complex_roots_near_real")
            if report.degenerate:
                entry.setdefault("flags", []).append("degenerate")
            entry["gate_rel_change"] = table.gate_rel_change
            entry["report"] = report
        except (KohnError, ValueError) as exc:
            failures += 1
            entry["error"] = f"{type(exc).__name__}: {exc}"
            print(f"sweep-k: k={k:g} failed: {entry['error']}", file=sys.stderr)
        per_k.append(entry)

    # sweep-relative flags: |D| near zero and widespread ill-conditioning
    good = [e for e in per_k if "error" not in e]
    if good:
        d_scan = scan_D([e["k"] for e in good],
                        [e["report"].coeffs for e in good])
        med_lam = {
            tag: float(np.median([e[tag] for e in good]))
            for tag in ("lambda_tau0", "lambda_tau_pi4", "lambda_tau_pi2")
        }
        for e, flagged in zip(good, d_scan.flags):
            if flagged:
                e.setdefault("flags", []).append("small_abs_D")
            if all(e[tag] < D_LAMBDA_RTOL * med_lam[tag] for tag in med_lam):
                e.setdefault("flags", []).append("ill_conditioned_all_probes")

    header = ["k", "eta_oracle", "eta_median", "eta_anomaly_free",
              "eta_complex", "abs_D", "lambda_tau0", "lambda_tau_pi4",
              "lambda_tau_pi2", "flags"]
    rows = []
    for e in per_k:
        if "error" in e:
            rows.append([e["k"]] + [math.nan] * 8 + [f"error:{e['error']}"])
        else:
            rows.append([e[h] for h in header[:-1]]
                        + [";".join(e.get("flags", []))])
    write_csv(outdir / "phase_vs_k.csv", header, rows)

    summary = []
    for e in per_k:
        if "error" in e:
            summary.append({"k": e["k"], "error": e["error"]})
        else:
            summary.append({
                "k": e["k"],
                "eta_oracle": e["eta_oracle"],
                "eta_median": e["eta_median"],
                "eta_anomaly_free": None if math.isnan(e["eta_anomaly_free"])
                else e["eta_anomaly_free"],
                "eta_complex": e["eta_complex"],
                "flags": e.get("flags", []),
                "quadrature_gate": e["gate_rel_change"],
                "report": report_to_dict(e["report"]),
            })
    write_manifest(outdir, config, {"command": "sweep-k", "per_k": summary})
    return 1 if failures else 0


def cmd_tau_scan(config: RunConfig) -> int:
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    k = config.k[0]
    potential = config.potential_spec()
    grid = config.grid()
    table = assemble_elements(potential, config.basis_spec(), k, grid)
    report = analyze_table(table, config.c)

    taus = np.linspace(0.0, math.pi, config.p, endpoint=False)
    rows = []
    for tau in map(float, taus):
        try:
            eta = _solve_eta(table, tau, config.c)
        except KohnError:
            eta = math.nan
        det = det_at_tau(table, tau)
        form = form_value(report.coeffs, tau)
        try:
            cot = kohn_cotangent(table, tau, config.c)
        except KohnError:
            cot = math.nan
        a, _, _ = rotate_table(table, tau)
        kappa, lam = cond_one(a)
        rows.append([tau, eta, det, form, cot, kappa, lam])
    write_csv(outdir / "tau_scan.csv",
              ["tau", "eta_v", "det_A", "det_form", "cot_value",
               "kappa", "lambda"], rows)
    (outdir / "roots.json").write_text(
        json.dumps(report_to_dict(report), indent=2) + "\n")
    write_manifest(outdir, config, {"command": "tau-scan", "k": k})
    return 0


def cmd_surface_ab(config: RunConfig, alphas, betas) -> int:
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    potential = config.potential_spec()
    grid = config.grid()
    k = config.k[0]

    etas = np.full((len(alphas), len(betas)), np.nan)
    for i, alpha in enumerate(alphas):
        for j, beta in enumerate(betas):
            basis = config.basis_spec(alpha=alpha, beta=beta)
            try:
                table = assemble_elements(potential, basis, k, grid)
                etas[i, j] = solve_complex_at_tau(table, 0.0, config.c).eta_v
            except (KohnError, ValueError) as exc:
                print(f"surface-ab: alpha={alpha:g} beta={beta:g} failed: {exc}",
                      file=sys.stderr)
    rows = []
    for i, alpha in enumerate(alphas):
        line = etas[i]
        med = float(np.nanmedian(line))
        for j, beta in enumerate(betas):
            rows.append([alpha, beta, etas[i, j], abs(etas[i, j] - med)])
    write_csv(outdir / "surface_ab.csv",
              ["alpha", "beta", "eta_v", "delta_prime"], rows)
    write_manifest(outdir, config, {
        "command": "surface-ab", "k": k,
        "alphas": list(alphas), "betas": list(betas),
    })
    return 0


def cmd_gamma_scan(config: RunConfig, gammas) -> int:
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    potential = config.potential_spec()
    grid = config.grid()
    k = config.k[0]
    rows = []
    for gamma in gammas:
        basis = config.basis_spec(gamma=gamma)
        table = assemble_elements(potential, basis, k, grid)
        eta = solve_complex_at_tau(table, 0.0, config.c).eta_v
        coeffs = extract_coeffs(table)
        a, _, _ = rotate_table(table, 0.0)
        rows.append([gamma, eta, abs(coeffs.d_const), cond_one(a)[1]])
    write_csv(outdir / "gamma_scan.csv",
              ["gamma", "eta_v", "abs_D", "lambda"], rows)
    write_manifest(outdir, config, {
        "command": "gamma-scan", "k": k, "gammas": list(gammas),
    })
    return 0


def cmd_complex_check(config: RunConfig) -> int:
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    potential = config.potential_spec()
    grid = config.grid()
    k = config.k[0]
    table = assemble_elements(potential, config.basis_spec(), k, grid)
    coeffs = extract_coeffs(table)

    taus = np.linspace(0.0, math.pi, config.p, endpoint=False)
    rows = []
    dets = []
    for tau in map(float, taus):
        det = det_complex_exact(table, tau)
        dets.append(det)
        sol = solve_complex_at_tau(table, tau, config.c)
        rows.append([tau, det.real, det.imag, abs(det), sol.eta_v, sol.deficit])
    write_csv(outdir / "complex_check.csv",
              ["tau", "re_det", "im_det", "abs_det", "eta_v", "deficit"], rows)

    mags = np.abs(dets)
    d_const = coeffs.d_const
    write_manifest(outdir, config, {
        "command": "complex-check",
        "k": k,
        "circle_stdev_over_mean": float(np.std(mags) / np.mean(mags)),
        "d_identity_rel_error": abs(dets[0] - d_const) / abs(d_const),
        "d_const": {"re": d_const.real, "im": d_const.imag},
    })
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_common(sub):
    sub.add_argument("--config", help="key = value configuration file")
    sub.add_argument("--k", help="momentum list (lo:hi:count, csv, or value)")
    sub.add_argument("--p", type=int, help="tau grid size")
    sub.add_argument("--alpha", type=float, help="first correlation exponent")
    sub.add_argument("--beta", type=float, help="second correlation exponent")
    sub.add_argument("--gamma", type=float, help="shielding parameter")
    sub.add_argument("--out", help="output directory")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kohn-lab",
        description="variational phase-shift laboratory on a model potential",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("sweep-k", "tau-scan", "complex-check"):
        _add_common(subs.add_parser(name))
    sp = subs.add_parser("surface-ab")
    _add_common(sp)
    sp.add_argument("--alpha-range", default="0.59:0.605:31")
    sp.add_argument("--beta-range", default="0.65:1.25:61")
    sp = subs.add_parser("gamma-scan")
    _add_common(sp)
    sp.add_argument("--gamma-range", default="0.5:1.0:11")

    args = parser.parse_args(argv)
    try:
        config = make_config(args)
        if args.command == "sweep-k":
            return cmd_sweep_k(config)
        if args.command == "tau-scan":
            return cmd_tau_scan(config)
        if args.command == "surface-ab":
            return cmd_surface_ab(config, parse_values(args.alpha_range),
                                  parse_values(args.beta_range))
        if args.command == "gamma-scan":
            return cmd_gamma_scan(config, parse_values(args.gamma_range))
        if args.command == "complex-check":
            return cmd_complex_check(config)
        raise ConfigError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"kohn-lab: {exc}", file=sys.stderr)
        return 2
    except KohnError as exc:
        print(f"kohn-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
