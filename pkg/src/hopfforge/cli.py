"""Command-line interface: detection, prediction, verification, and
parameter scans, with JSON/CSV reports and rendered figures.

Exit codes are a stable contract: 0 success, 2 input error, 3 no
zero-Hopf detection, 4 averaging precondition failure, 5 verification
mismatch. Every run is deterministic given its config; reports carry
the fully resolved config and no timestamps.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import io
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import report as report_mod
from .averaging import average_first, average_second
from .chua import ChuaParams, detect_zero_hopf, equilibria
from .errors import (
    AmbiguousDetection,
    FirstOrderNotZero,
    HopfforgeError,
    InvalidFamily,
    InvalidInput,
    MismatchWarning,
)
from .solve import (
    Stability,
    closed_form_zero_origin,
    find_zeros,
    gamma,
    predict_cycle_count,
    stability_eigenvalues_origin,
)
from .transform import (
    PerturbationOrigin,
    PerturbationPMinus,
    params_at,
    standard_form_origin,
    standard_form_pminus,
)
from .verify import continuation_sweep, count_limit_cycles

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_DETECTION = 3
EXIT_PRECONDITION = 4
EXIT_MISMATCH = 5

_ORIGIN_DEFAULTS = {
    "abar0": 1.0, "alpha0": 0.0, "abar1": 0.0, "alpha1": 0.0,
    "abar2": 1.0, "alpha2": 0.0, "beta0": 2.0, "beta1": 0.0,
    "beta2": 1.0, "omega": 2.0,
}
_PMINUS_DEFAULTS = {
    "abar0": 1.0, "alpha0": 0.0, "xi0": 0.0, "abar1": 1.0, "alpha1": 0.0,
    "xi1": 0.0, "alpha2": -6.0, "xi2": 0.0, "zeta0": -1.0, "beta1": 0.0,
    "zeta1": 0.0, "zeta2": -6.0, "omega": 2.0,
}
_SCAN_ALPHA2 = (-6.6, -6.2, -5.8, -5.4, -5.0)
_SCAN_ZETA2 = (-3.25, -1.0, 0.5, 4.5, 6.0)


def _parse_floats(text: str) -> tuple[float, ...]:
    tokens = text.replace(",", " ").split()
    try:
        return tuple(float(tok) for tok in tokens)
    except ValueError:
        raise InvalidInput("cannot parse float list from %r" % text)


@dataclass
class RunConfig:
    """Fully resolved run configuration; round-trips through its own
    INI rendering."""

    kind: str = "origin"
    coefficients: dict = field(default_factory=dict)
    order: int = 0
    grid_size: int = 512
    seeds: int = 24
    r_max: float = 20.0
    w_max: float = 20.0
    eps_list: tuple = (0.02, 0.01, 0.005)
    scan_alpha2: tuple = _SCAN_ALPHA2
    scan_zeta2: tuple = _SCAN_ZETA2
    scan_grid_size: int = 128
    scan_seeds: int = 12

    def __post_init__(self):
        if self.kind not in ("origin", "pminus"):
            raise InvalidInput("family kind must be origin or pminus")
        defaults = (_ORIGIN_DEFAULTS if self.kind == "origin"
                    else _PMINUS_DEFAULTS)
        unknown = set(self.coefficients) - set(defaults)
        if unknown:
            raise InvalidInput(
                "unknown %s coefficient(s): %s"
                % (self.kind, ", ".join(sorted(unknown))))
        merged = dict(defaults)
        merged.update({k: float(v) for k, v in self.coefficients.items()})
        self.coefficients = merged
        self.eps_list = tuple(float(e) for e in self.eps_list)
        self.scan_alpha2 = tuple(float(v) for v in self.scan_alpha2)
        self.scan_zeta2 = tuple(float(v) for v in self.scan_zeta2)
        if self.order not in (0, 1, 2):
            raise InvalidInput("order must be auto, 1, or 2")
        for name in ("grid_size", "seeds", "scan_grid_size", "scan_seeds"):
            if int(getattr(self, name)) <= 0:
                raise InvalidInput("%s must be positive" % name)

    def family(self):
        if self.kind == "origin":
            return PerturbationOrigin(**self.coefficients)
        return PerturbationPMinus(**self.coefficients)

    def domain(self):
        return ((1e-4, self.r_max), (-self.w_max, self.w_max))

    def effective_order(self) -> int:
        if self.order:
            return self.order
        return 1 if self.kind == "origin" else 2

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise InvalidInput("config parse error: %s" % exc)
        known = {"family", "predict", "verify", "scan"}
        unknown = set(parser.sections()) - known
        if unknown:
            raise InvalidInput(
                "unknown config section(s): %s" % ", ".join(sorted(unknown)))
        kwargs: dict = {}
        if parser.has_section("family"):
            sec = dict(parser.items("family"))
            kwargs["kind"] = sec.pop("kind", "origin").strip()
            kwargs["coefficients"] = sec
        if parser.has_section("predict"):
            sec = dict(parser.items("predict"))
            order = sec.pop("order", "auto").strip()
            kwargs["order"] = 0 if order == "auto" else int(order)
            if "grid" in sec:
                kwargs["grid_size"] = int(sec.pop("grid"))
            if "seeds" in sec:
                kwargs["seeds"] = int(sec.pop("seeds"))
            if "r_max" in sec:
                kwargs["r_max"] = float(sec.pop("r_max"))
            if "w_max" in sec:
                kwargs["w_max"] = float(sec.pop("w_max"))
            if sec:
                raise InvalidInput(
                    "unknown [predict] key(s): %s" % ", ".join(sorted(sec)))
        if parser.has_section("verify"):
            sec = dict(parser.items("verify"))
            if "eps" in sec:
                kwargs["eps_list"] = _parse_floats(sec.pop("eps"))
            if sec:
                raise InvalidInput(
                    "unknown [verify] key(s): %s" % ", ".join(sorted(sec)))
        if parser.has_section("scan"):
            sec = dict(parser.items("scan"))
            if "alpha2" in sec:
                kwargs["scan_alpha2"] = _parse_floats(sec.pop("alpha2"))
            if "zeta2" in sec:
                kwargs["scan_zeta2"] = _parse_floats(sec.pop("zeta2"))
            if "grid" in sec:
                kwargs["scan_grid_size"] = int(sec.pop("grid"))
            if "seeds" in sec:
                kwargs["scan_seeds"] = int(sec.pop("seeds"))
            if sec:
                raise InvalidInput(
                    "unknown [scan] key(s): %s" % ", ".join(sorted(sec)))
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise InvalidInput("config error: %s" % exc)

    def to_ini(self) -> str:
        fmt = report_mod.fmt
        out = io.StringIO()
        out.write("[family]\nkind = %s\n" % self.kind)
        for key in sorted(self.coefficients):
            out.write("%s = %s\n" % (key, fmt(self.coefficients[key])))
        out.write("\n[predict]\norder = %s\n"
                  % (self.order if self.order else "auto"))
        out.write("grid = %d\nseeds = %d\n" % (self.grid_size, self.seeds))
        out.write("r_max = %s\nw_max = %s\n"
                  % (fmt(self.r_max), fmt(self.w_max)))
        out.write("\n[verify]\neps = %s\n"
                  % " ".join(fmt(e) for e in self.eps_list))
        out.write("\n[scan]\nalpha2 = %s\n"
                  % " ".join(fmt(v) for v in self.scan_alpha2))
        out.write("zeta2 = %s\n" % " ".join(fmt(v) for v in self.scan_zeta2))
        out.write("grid = %d\nseeds = %d\n"
                  % (self.scan_grid_size, self.scan_seeds))
        return out.getvalue()

    def resolved(self) -> dict:
        return {
            "family": {"kind": self.kind, **self.coefficients},
            "predict": {
                "order": self.order if self.order else "auto",
                "grid": self.grid_size,
                "seeds": self.seeds,
                "r_max": self.r_max,
                "w_max": self.w_max,
            },
            "verify": {"eps": list(self.eps_list)},
            "scan": {
                "alpha2": list(self.scan_alpha2),
                "zeta2": list(self.scan_zeta2),
                "grid": self.scan_grid_size,
                "seeds": self.scan_seeds,
            },
        }


def _load_config(path: str | None, grid_override: int | None = None,
                 eps_override: str | None = None,
                 default_kind: str = "origin") -> RunConfig:
    if path is None:
        cfg = RunConfig(kind=default_kind)
    else:
        try:
            with open(path) as fh:
                cfg = RunConfig.from_ini(fh.read())
        except OSError as exc:
            raise InvalidInput("cannot read config: %s" % exc)
    if grid_override is not None:
        if grid_override <= 0:
            raise InvalidInput("--grid must be positive")
        cfg = dataclasses.replace(cfg, grid_size=grid_override,
                                  scan_grid_size=grid_override)
    if eps_override is not None:
        cfg = dataclasses.replace(cfg, eps_list=_parse_floats(eps_override))
    return cfg


def _thread_count() -> int:
    raw = os.environ.get("HOPFFORGE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = min(4, os.cpu_count() or 1)
    return max(1, n)


def _ordered_map(fn, items):
    """Apply fn over items through the bounded pool, preserving order."""
    workers = _thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _complex_str(z: complex) -> str:
    fmt = report_mod.fmt
    sign = "+" if z.imag >= 0 else "-"
    return "%s %s %sj" % (fmt(z.real), sign, fmt(abs(z.imag)))


def _emit(quiet: bool, *lines: str) -> None:
    if not quiet:
        for line in lines:
            print(line)


def _zero_payload(z) -> dict:
    return {
        "r": z.r,
        "w": z.w,
        "jacobian": z.jac,
        "eigenvalues": list(z.eigenvalues),
        "classification": z.classification,
        "residual": z.residual,
    }


def _averaged_zeros(cfg: RunConfig, family):
    order = cfg.effective_order()
    if cfg.kind == "origin":
        standard = standard_form_origin(family)
    else:
        standard = standard_form_pminus(family)
    if order == 1:
        averaged = average_first(standard, cfg.grid_size)
    else:
        averaged = average_second(standard, cfg.grid_size)
    zeros = find_zeros(averaged, cfg.domain(), cfg.seeds)
    live = [z for z in zeros
            if z.r > 0.0 and z.classification is not Stability.DEGENERATE]
    return order, averaged, zeros, live


# -- commands ------------------------------------------------------------

def cmd_detect(values, as_json: bool, quiet: bool) -> int:
    values = [float(v) for v in values]
    if not all(np.isfinite(values)):
        print("error: parameters must be six finite numbers",
              file=sys.stderr)
        return EXIT_INPUT
    params = ChuaParams(*values)
    eqs = equilibria(params)
    payload: dict = {
        "schema_version": report_mod.SCHEMA_VERSION,
        "command": "detect",
        "params": list(params.as_tuple()),
        "equilibria": [],
    }
    for eq in eqs:
        payload["equilibria"].append({
            "kind": eq.kind,
            "position": list(eq.position),
            "eigenvalues": [complex(l) for l in eq.eigenvalues],
        })
        _emit(quiet, "%s at (%s, %s, %s)" % (
            eq.kind.value,
            *(report_mod.fmt(x) for x in eq.position)))
        for lam in eq.eigenvalues:
            _emit(quiet, "  lambda = " + _complex_str(complex(lam)))
    try:
        hit = detect_zero_hopf(params)
    except AmbiguousDetection as exc:
        payload["verdict"] = "ambiguous"
        _emit(quiet, "verdict: ambiguous detection (%s)" % exc)
        if as_json:
            print(report_mod.render_json(payload), end="")
        return EXIT_NO_DETECTION
    if hit is None:
        payload["verdict"] = "none"
        _emit(quiet, "verdict: no zero-Hopf equilibrium")
        if as_json:
            print(report_mod.render_json(payload), end="")
        return EXIT_NO_DETECTION
    payload["verdict"] = {
        "kind": hit.equilibrium.kind,
        "position": list(hit.equilibrium.position),
        "omega": hit.omega,
    }
    _emit(quiet, "verdict: zero-Hopf at %s, omega = %s"
          % (hit.equilibrium.kind.value, report_mod.fmt(hit.omega)))
    if as_json:
        print(report_mod.render_json(payload), end="")
    return EXIT_OK


def cmd_predict(cfg: RunConfig, out_dir: str, as_json: bool, quiet: bool,
                figures: bool) -> int:
    family = cfg.family()
    order, averaged, zeros, live = _averaged_zeros(cfg, family)
    os.makedirs(out_dir, exist_ok=True)

    family_id = cfg.kind
    zeros_path = os.path.join(out_dir, "zeros.csv")
    report_mod.write_zeros_csv(zeros_path, [(family_id, z) for z in zeros])
    recon_path = os.path.join(out_dir, "reconciliation.md")
    report_mod.build_reconciliation(recon_path)

    payload: dict = {
        "schema_version": report_mod.SCHEMA_VERSION,
        "command": "predict",
        "config": cfg.resolved(),
        "order": order,
        "zero_count": len(live),
        "zeros": [_zero_payload(z) for z in zeros],
        "files": {"zeros_csv": zeros_path, "reconciliation": recon_path},
    }
    if cfg.kind == "origin":
        printed, indicator = gamma(family)
        payload["gamma"] = {"as_printed": printed, "indicator": indicator}
        closed = closed_form_zero_origin(family)
        if closed is not None:
            lam = stability_eigenvalues_origin(family)
            payload["closed_form"] = {
                "r": closed[0], "w": closed[1],
                "eigenvalues": [lam[0], lam[1]],
            }
        else:
            payload["closed_form"] = None

    if figures:
        r_hi = max([2.0 * z.r for z in live] + [5.0])
        w_hi = max([2.0 * abs(z.w) + 1.0 for z in live] + [5.0])
        portrait = os.path.join(out_dir, "field_portrait.png")
        report_mod.render_field_portrait(averaged, zeros, portrait,
                                         r_max=r_hi, w_max=w_hi)
        payload["files"]["field_portrait"] = portrait

    report_path = os.path.join(out_dir, "report.json")
    report_mod.write_json(payload, report_path)
    _emit(quiet, "family: %s (order %d averaging)" % (cfg.kind, order),
          "zeros found: %d (%d counted as cycles)" % (len(zeros), len(live)))
    for z in zeros:
        _emit(quiet, "  r = %s, w = %s, %s" % (
            report_mod.fmt(z.r), report_mod.fmt(z.w),
            z.classification.value))
    _emit(quiet, "wrote: %s" % ", ".join(
        [report_path] + sorted(str(v) for v in payload["files"].values())))
    if as_json:
        print(report_mod.render_json(payload), end="")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out_dir: str, as_json: bool, quiet: bool,
               figures: bool) -> int:
    family = cfg.family()
    eps_list = list(cfg.eps_list)
    if not eps_list or any(e <= 0 for e in eps_list):
        raise InvalidInput("eps list must contain positive values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidInput("eps list must be strictly decreasing")
    order, averaged, zeros, live = _averaged_zeros(cfg, family)
    seeds = sorted(live, key=lambda z: (z.r, z.w))
    os.makedirs(out_dir, exist_ok=True)

    def sweep_one(eps: float) -> list[dict]:
        if eps > 0.1:
            return [{"eps": eps, "orbit_id": k,
                     "error": "eps outside the asymptotic regime (0, 0.1]"}
                    for k in range(len(seeds))]
        if not seeds:
            return []
        return continuation_sweep(family, [eps], seeds)

    rows = [row for chunk in _ordered_map(sweep_one, eps_list)
            for row in chunk]

    smallest = eps_list[-1]
    ok_rows = [r for r in rows if r["eps"] == smallest and "error" not in r]
    verified = len(ok_rows)
    mismatch_msgs: list[str] = []
    counted = None
    if smallest <= 0.1:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", MismatchWarning)
            counted = count_limit_cycles(family, smallest, zeros=zeros)
            mismatch_msgs = [str(w.message) for w in caught
                             if issubclass(w.category, MismatchWarning)]
    else:
        mismatch_msgs = ["smallest eps %s is outside the asymptotic "
                         "regime (0, 0.1]" % report_mod.fmt(smallest)]

    success = (verified == len(seeds)) and not mismatch_msgs

    sweep_path = os.path.join(out_dir, "sweep.csv")
    report_mod.write_sweep_csv(sweep_path, rows)
    payload: dict = {
        "schema_version": report_mod.SCHEMA_VERSION,
        "command": "verify",
        "config": cfg.resolved(),
        "order": order,
        "predicted_count": len(seeds),
        "verified_at_smallest": verified,
        "smallest_eps": smallest,
        "counted_cycles": counted,
        "mismatch": mismatch_msgs,
        "sweep": [{k: v for k, v in row.items() if k != "orbit"}
                  for row in rows],
        "files": {"sweep_csv": sweep_path},
    }

    if figures:
        conv_path = os.path.join(out_dir, "convergence.png")
        report_mod.render_convergence(rows, conv_path)
        payload["files"]["convergence"] = conv_path
        orbits = [row["orbit"] for row in ok_rows if "orbit" in row]
        if orbits:
            orb_path = os.path.join(out_dir, "orbits.png")
            report_mod.render_orbits(params_at(family, smallest), family,
                                     smallest, orbits, orb_path)
            payload["files"]["orbits"] = orb_path

    report_path = os.path.join(out_dir, "report.json")
    report_mod.write_json(payload, report_path)
    _emit(quiet,
          "predicted orbits: %d" % len(seeds),
          "verified at eps = %s: %d" % (report_mod.fmt(smallest), verified))
    for msg in mismatch_msgs:
        _emit(quiet, "mismatch: %s" % msg)
    _emit(quiet, "wrote: %s" % ", ".join(
        [report_path] + sorted(str(v) for v in payload["files"].values())))
    if as_json:
        print(report_mod.render_json(payload), end="")
    return EXIT_OK if success else EXIT_MISMATCH


def cmd_scan(cfg: RunConfig, out_dir: str, as_json: bool, quiet: bool,
             figures: bool) -> int:
    if cfg.kind != "pminus":
        raise InvalidInput("scan requires a pminus family section")
    if not cfg.scan_alpha2 or not cfg.scan_zeta2:
        raise InvalidInput("scan grid must be nonempty on both axes")
    base = cfg.family()
    cells = [(a2, z2) for z2 in cfg.scan_zeta2 for a2 in cfg.scan_alpha2]

    def scan_cell(cell) -> dict:
        a2, z2 = cell
        fam = dataclasses.replace(base, alpha2=a2, zeta2=z2)
        row = {"alpha2": a2, "zeta0": base.zeta0, "zeta2": z2}
        try:
            count, _ = predict_cycle_count(
                fam, grid_size=cfg.scan_grid_size, domain=cfg.domain(),
                seeds=cfg.scan_seeds)
        except (InvalidFamily, FirstOrderNotZero) as exc:
            row.update(count=None, valid=False, reason=str(exc))
            return row
        row.update(count=count, valid=True)
        return row

    rows = _ordered_map(scan_cell, cells)
    os.makedirs(out_dir, exist_ok=True)
    scan_path = os.path.join(out_dir, "scan.csv")
    report_mod.write_scan_csv(scan_path, rows)

    n_a = len(cfg.scan_alpha2)
    count_grid = [
        [(-1 if not row.get("valid") else row["count"])
         for row in rows[i * n_a:(i + 1) * n_a]]
        for i in range(len(cfg.scan_zeta2))
    ]
    payload: dict = {
        "schema_version": report_mod.SCHEMA_VERSION,
        "command": "scan",
        "config": cfg.resolved(),
        "alpha2": list(cfg.scan_alpha2),
        "zeta2": list(cfg.scan_zeta2),
        "counts": count_grid,
        "invalid_cells": sum(1 for row in rows if not row.get("valid")),
        "files": {"scan_csv": scan_path},
    }
    if figures:
        fig_path = os.path.join(out_dir, "cycle_counts.png")
        report_mod.render_cycle_counts(cfg.scan_alpha2, cfg.scan_zeta2,
                                       count_grid, fig_path)
        payload["files"]["cycle_counts"] = fig_path

    report_path = os.path.join(out_dir, "report.json")
    report_mod.write_json(payload, report_path)
    seen = sorted({row["count"] for row in rows if row.get("valid")})
    _emit(quiet,
          "scanned %d cells (%d invalid)" % (len(rows),
                                             payload["invalid_cells"]),
          "distinct predicted counts: %s"
          % (", ".join(str(c) for c in seen) or "none"),
          "wrote: %s" % ", ".join(
              [report_path] + sorted(str(v) for v in payload["files"].values())))
    if as_json:
        print(report_mod.render_json(payload), end="")
    return EXIT_OK


# -- entry point ----------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopfforge",
        description="Zero-Hopf bifurcation analysis for a cubic Chua "
                    "system: detection, averaging predictions, ODE "
                    "verification, parameter scans.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser(
        "detect", help="classify equilibria and report zero-Hopf points")
    p_detect.add_argument("params", nargs=6, type=float, metavar="COEFF",
                          help="six coefficients in the order a a1 a2 b b1 b2")
    p_detect.add_argument("--json", action="store_true")
    p_detect.add_argument("--quiet", action="store_true")

    for name, help_text in (
        ("predict", "averaged-field zeros and cycle predictions"),
        ("verify", "locate and validate periodic orbits by integration"),
        ("scan", "predicted cycle counts over a parameter grid"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH",
                       help="INI config; defaults to the benchmark family")
        p.add_argument("--out", metavar="DIR", default=".")
        p.add_argument("--grid", type=int, metavar="N",
                       help="override the averaging grid size")
        p.add_argument("--json", action="store_true",
                       help="print the JSON report to stdout")
        p.add_argument("--quiet", action="store_true")
        p.add_argument("--no-figures", action="store_true",
                       help="skip rendering png figures")
        if name == "verify":
            p.add_argument("--eps", metavar="LIST",
                           help="decreasing eps values, e.g. '0.02 0.01'")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "detect":
            return cmd_detect(args.params, args.json, args.quiet)
        cfg = _load_config(args.config, args.grid,
                           getattr(args, "eps", None),
                           default_kind="pminus" if args.command == "scan"
                           else "origin")
        figures = not args.no_figures
        if args.command == "predict":
            return cmd_predict(cfg, args.out, args.json, args.quiet, figures)
        if args.command == "verify":
            return cmd_verify(cfg, args.out, args.json, args.quiet, figures)
        return cmd_scan(cfg, args.out, args.json, args.quiet, figures)
    except FirstOrderNotZero as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_PRECONDITION
    except (InvalidInput, InvalidFamily) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except HopfforgeError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
