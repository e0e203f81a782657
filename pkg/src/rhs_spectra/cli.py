"""Command-line interface: TOML run configs in, CSV/JSON out.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 mathematical domain error, 4 quadrature failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .eigen import Family, eval_eigenfunction
from .errors import ConfigError, QuadratureFailure, RHSError
from .functions import r_exp
from .green import green_function
from .model import BarrierConfig, as_energy
from .quadrature import QuadratureSpec
from .spectral import rho_values, spectrum_info
from .testspace import make_position_bump, make_spectral_test_function, membership_report, phi_norm
from .transform import (dispersion, energy_representation, evolve, position_norm, round_trip,
                        to_energy, to_position)
from .verify import SUITES, run_suites

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_DOMAIN, EXIT_QUADRATURE = 0, 1, 2, 3, 4

SCHEMA = {
    "barrier": {"kappa", "hbar", "v0", "a", "b", "eps_energy"},
    "quadrature": {"r_cutoff", "e_cutoff", "nodes_per_panel", "max_panel_phase", "integration_phase",
                   "tol", "max_matrix_entries", "max_work"},
    "output": {"format", "path"},
    "eval": {"quantity", "family", "energies", "r", "s", "order"},
    "test_function": {"kind", "e_lo", "e_hi", "coeffs", "amplitude", "vanish_order", "center",
                      "half_width", "beta", "power"},
    "transform": {"quantity", "energies", "r", "normalize"},
    "evolve": {"times", "r"},
    "verify": {"suites", "faulty_a2"},
}
TOP_LEVEL = {"seed"}


@dataclass
class RunConfig:
    barrier: BarrierConfig = field(default_factory=BarrierConfig)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    sections: dict = field(default_factory=dict)
    output_format: str | None = None
    output_path: str | None = None
    seed: int = 0

    def section(self, name) -> dict:
        return self.sections.get(name, {})


# ---------------------------------------------------------------- config

def _check_keys(where, table, allowed):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r} (allowed: {', '.join(sorted(allowed))})")


def _number(where, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    return float(v)


def parse_grid(where, spec) -> np.ndarray:
    """A strictly increasing real grid: a list, or {start, stop, num[, log]}."""
    if isinstance(spec, dict):
        _check_keys(where, spec, {"start", "stop", "num", "log"})
        try:
            start, stop, num = spec["start"], spec["stop"], spec["num"]
        except KeyError as exc:
            raise ConfigError(f"{where}: missing {exc.args[0]!r}") from None
        start, stop = _number(f"{where}.start", start), _number(f"{where}.stop", stop)
        if not isinstance(num, int) or isinstance(num, bool) or num < 1:
            raise ConfigError(f"{where}.num: expected a positive integer")
        if spec.get("log", False):
            if start <= 0 or stop <= 0:
                raise ConfigError(f"{where}: log grids need positive endpoints")
            grid = np.geomspace(start, stop, num)
        else:
            grid = np.linspace(start, stop, num)
    elif isinstance(spec, list):
        grid = np.array([_number(f"{where}[{i}]", v) for i, v in enumerate(spec)])
    else:
        raise ConfigError(f"{where}: expected a list or a {{start, stop, num}} table")
    if grid.size == 0:
        raise ConfigError(f"{where}: empty grid")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError(f"{where}: grid must be strictly increasing")
    return grid


def parse_energies(where, spec) -> np.ndarray:
    """Energies: a real grid, or a list whose entries are numbers or [re, im] pairs."""
    if isinstance(spec, list) and any(isinstance(v, list) for v in spec):
        vals = []
        for i, v in enumerate(spec):
            if isinstance(v, list):
                if len(v) != 2:
                    raise ConfigError(f"{where}[{i}]: complex energies are [re, im] pairs")
                vals.append(complex(_number(f"{where}[{i}]", v[0]), _number(f"{where}[{i}]", v[1])))
            else:
                vals.append(complex(_number(f"{where}[{i}]", v)))
        keys = [(z.real, z.imag) for z in vals]
        if any(k1 >= k2 for k1, k2 in zip(keys, keys[1:])):
            raise ConfigError(f"{where}: energies must be strictly increasing (by real, then imaginary part)")
        return np.array(vals)
    return parse_grid(where, spec)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return build_config(data)


def build_config(data: dict) -> RunConfig:
    for key, value in data.items():
        if key in TOP_LEVEL:
            continue
        if key not in SCHEMA:
            raise ConfigError(f"unknown section [{key}]")
        if not isinstance(value, dict):
            raise ConfigError(f"[{key}] must be a table")
        _check_keys(f"[{key}]", value, SCHEMA[key])
    cfg = RunConfig()
    try:
        cfg.barrier = BarrierConfig(**{k: _number(f"[barrier].{k}", v) for k, v in data.get("barrier", {}).items()})
    except RHSError as exc:
        raise ConfigError(f"[barrier]: {exc}") from None
    quad = {}
    for k, v in data.get("quadrature", {}).items():
        quad[k] = int(v) if k in ("nodes_per_panel", "max_matrix_entries") else _number(f"[quadrature].{k}", v)
    try:
        cfg.quadrature = QuadratureSpec(**quad)
    except RHSError as exc:
        raise ConfigError(f"[quadrature]: {exc}") from None
    out = data.get("output", {})
    fmt = out.get("format")
    if fmt is not None and fmt not in ("csv", "json"):
        raise ConfigError(f"[output].format: expected 'csv' or 'json', got {fmt!r}")
    cfg.output_format, cfg.output_path = fmt, out.get("path")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed: expected a non-negative integer")
    cfg.seed = seed
    cfg.sections = {k: v for k, v in data.items() if k in SCHEMA}
    return cfg


def _choice(where, value, options):
    if value not in options:
        raise ConfigError(f"{where}: expected one of {', '.join(options)}, got {value!r}")
    return value


def build_test_function(cfg: RunConfig):
    tf = cfg.section("test_function")
    if not tf:
        raise ConfigError("[test_function] is required for this command")
    kind = _choice("[test_function].kind", tf.get("kind", "spectral"), ("spectral", "bump", "rexp"))
    bc, quad = cfg.barrier, cfg.quadrature
    allowed = {"spectral": {"kind", "e_lo", "e_hi", "coeffs", "amplitude", "vanish_order"},
               "bump": {"kind", "center", "half_width", "amplitude"},
               "rexp": {"kind", "amplitude", "beta", "power"}}[kind]
    _check_keys(f"[test_function] (kind={kind})", tf, allowed)
    num = {k: _number(f"[test_function].{k}", v) for k, v in tf.items()
           if k not in ("kind", "coeffs", "vanish_order", "power")}
    if kind == "spectral":
        for k in ("e_lo", "e_hi"):
            if k not in num:
                raise ConfigError(f"[test_function].{k} is required for spectral test functions")
        coeffs = tuple(_number(f"[test_function].coeffs[{i}]", c) for i, c in enumerate(tf.get("coeffs", [1.0])))
        return make_spectral_test_function(bc, num["e_lo"], num["e_hi"], coeffs, num.get("amplitude", 1.0),
                                           int(tf.get("vanish_order", 3)), quad)
    if kind == "bump":
        for k in ("center", "half_width"):
            if k not in num:
                raise ConfigError(f"[test_function].{k} is required for bumps")
        return make_position_bump(bc, num["center"], num["half_width"], num.get("amplitude", 1.0))
    return r_exp(num.get("amplitude", 1.0), num.get("beta", 1.0), int(tf.get("power", 1)))


# ---------------------------------------------------------------- output

def fmt_float(x) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def fmt_energy(E) -> str:
    E = as_energy(E)
    if E.imag == 0:
        return fmt_float(E.real)
    sign = "+" if E.imag > 0 else "-"
    return f"{fmt_float(E.real)}{sign}{fmt_float(abs(E.imag))}j"


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt_float(v) for v in row))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


@dataclass
class Output:
    header: list | None = None
    rows: list | None = None
    document: dict | None = None      # JSON payload (replaces the CSV when format=json)
    sidecar: dict = field(default_factory=dict)

    def render(self, fmt: str) -> str:
        if fmt == "json" or self.rows is None:
            doc = self.document
            if doc is None:
                doc = {"columns": self.header, "rows": self.rows, "info": self.sidecar}
            return json_text(doc)
        return csv_text(self.header, self.rows)


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------- commands

def _meta(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "barrier": cfg.barrier.as_dict(), "quadrature": cfg.quadrature.as_dict()}


def cmd_eval(cfg: RunConfig, args) -> Output:
    sec = cfg.section("eval")
    quantity = _choice("[eval].quantity", sec.get("quantity", "eigenfunction"), ("eigenfunction", "green", "rho"))
    bc = cfg.barrier
    meta = _meta(cfg, "eval")
    meta["quantity"] = quantity
    if quantity == "rho":
        E = parse_grid("[eval].energies", sec.get("energies", [1.5, 2.0, 3.0]))
        vals = rho_values(bc, E)
        return Output(["E", "rho"], [(e, v) for e, v in zip(E, vals)], sidecar=meta)
    r = parse_grid("[eval].r", sec.get("r", {"start": 0.0, "stop": 4.0, "num": 9}))
    if np.any(r < 0):
        raise ConfigError("[eval].r: radii must be non-negative")
    if quantity == "eigenfunction":
        try:
            fam = Family.parse(sec.get("family", "Chi"))
        except (KeyError, ValueError):
            raise ConfigError(f"[eval].family: unknown family {sec.get('family')!r}") from None
        order = sec.get("order", 0)
        if not isinstance(order, int) or isinstance(order, bool) or order < 0:
            raise ConfigError("[eval].order: expected a non-negative integer")
        E = parse_energies("[eval].energies", sec.get("energies", [2.0]))
        vals = np.array([eval_eigenfunction(bc, fam, e, r, order) for e in E])   # (nE, nr)
        rows = [(ri, fmt_energy(e), fam.value, vals[j, i].real, vals[j, i].imag)
                for i, ri in enumerate(r) for j, e in enumerate(E)]
        meta.update(family=fam.value, order=order)
        return Output(["r", "E", "family", "re", "im"], rows, sidecar=meta)
    s = parse_grid("[eval].s", sec["s"]) if "s" in sec else r
    E = parse_energies("[eval].energies", sec.get("energies", [-1.0]))
    rows = []
    for ri in r:
        for si in s:
            for e in E:
                g = green_function(bc, ri, si, e)
                rows.append((ri, si, complex(e).real, complex(e).imag, g.real, g.imag))
    return Output(["r", "s", "Ere", "Eim", "re", "im"], rows, sidecar=meta)


def _info(fhat) -> dict:
    return dict(getattr(fhat, "info", None) or {})


def cmd_transform(cfg: RunConfig, args) -> Output:
    sec = cfg.section("transform")
    quantity = _choice("[transform].quantity", sec.get("quantity", "energy"),
                       ("energy", "round_trip", "dispersion"))
    bc, quad = cfg.barrier, cfg.quadrature
    f = build_test_function(cfg)
    meta = _meta(cfg, "transform")
    meta.update(quantity=quantity, test_function=cfg.section("test_function"))
    if quantity == "energy":
        E = parse_grid("[transform].energies", sec.get("energies", {"start": 0.1, "stop": 10.0, "num": 100}))
        if np.any(E <= 0):
            raise ConfigError("[transform].energies: energies must be positive")
        fhat = to_energy(bc, f, quad)
        vals = fhat(E)
        meta["transform"] = _info(fhat)
        return Output(["E", "re", "im"], [(e, v.real, v.imag) for e, v in zip(E, np.asarray(vals, complex))],
                      sidecar=meta)
    if quantity == "round_trip":
        r = parse_grid("[transform].r", sec.get("r", {"start": 0.0, "stop": 8.0, "num": 81}))
        res = round_trip(bc, f, quad)
        fhat = to_energy(bc, f, quad, method="quadrature")
        back = to_position(bc, fhat, quad, f.decay_hint)
        vals = np.asarray(back(r), complex)
        meta.update(transform=_info(fhat), round_trip=res.round_trip, isometry=res.isometry, norm=res.norm)
        return Output(["r", "re", "im"], [(x, v.real, v.imag) for x, v in zip(r, vals)], sidecar=meta)
    norm = position_norm(bc, f, quad)
    if sec.get("normalize", True):
        f = (1.0 / norm) * f
    d = dispersion(bc, f, quad)
    meta.update(input_norm=norm)
    doc = {"mean": d.mean, "dispersion": d.disp, "delta": d.delta}
    return Output(["mean", "dispersion", "delta"], [(d.mean, d.disp, d.delta)],
                  document={**doc, "info": meta}, sidecar=meta)


def cmd_evolve(cfg: RunConfig, args) -> Output:
    sec = cfg.section("evolve")
    bc, quad = cfg.barrier, cfg.quadrature
    times = parse_grid("[evolve].times", sec.get("times", [0.0, 1.0]))
    r = parse_grid("[evolve].r", sec.get("r", {"start": 0.0, "stop": 8.0, "num": 81}))
    f = build_test_function(cfg)
    fhat = energy_representation(bc, f, quad)
    rows, norms = [], []
    for t in times:
        phi_t = evolve(bc, f, float(t), quad, fhat=fhat)
        vals = np.asarray(phi_t(r), complex)
        rows.extend((t, x, v.real, v.imag) for x, v in zip(r, vals))
        norms.append(position_norm(bc, phi_t, quad))
    meta = _meta(cfg, "evolve")
    meta.update(test_function=cfg.section("test_function"), times=list(times), norms=norms,
                initial_norm=position_norm(bc, f, quad))
    return Output(["t", "r", "re", "im"], rows, sidecar=meta)


def cmd_verify(cfg: RunConfig, args) -> Output:
    sec = cfg.section("verify")
    names = sec.get("suites")
    if names is not None:
        if not isinstance(names, list):
            raise ConfigError("[verify].suites: expected a list of suite names")
        for n in names:
            _choice("[verify].suites", n, tuple(SUITES))
    seed = args.seed if args.seed is not None else cfg.seed
    report = run_suites(cfg.barrier, cfg.quadrature, seed=seed, names=names,
                        faulty_a2=bool(sec.get("faulty_a2", False)))
    for name, secs in report.timings.items():
        print(f"suite {name}: {secs:.1f} s", file=sys.stderr)
    for rec in report.records:
        if not rec.passed:
            print(f"FAIL {rec.name}: achieved {rec.achieved:.3e}, tolerance {rec.tolerance:.1e}", file=sys.stderr)
    doc = {"pass": report.passed, "seed": seed, "barrier": cfg.barrier.as_dict(),
           "records": [r.as_dict() for r in report.records]}
    return Output(document=doc, sidecar={"pass": report.passed})


def cmd_report_spectrum(cfg: RunConfig, args) -> Output:
    bc, quad = cfg.barrier, cfg.quadrature
    doc = {"barrier": bc.as_dict(), "spectrum": spectrum_info(bc).as_dict(),
           "thresholds": [0.0, bc.v0], "excluded_band": [bc.v0 - bc.eps_energy, bc.v0 + bc.eps_energy]}
    if cfg.section("test_function"):
        max_order = 3 if args.max_order is None else args.max_order
        f = build_test_function(cfg)
        rep = membership_report(bc, f, max_order=max_order, quad=quad)
        doc["membership"] = {"passed": rep.passed, "flags": rep.flags,
                             "checks": [dict(name=c.name, value=c.value, threshold=c.threshold, passed=c.passed)
                                        for c in rep.checks]}
        doc["norms"] = [{"n": n, "m": m, "norm": phi_norm(bc, f, n, m, quad)}
                        for n in range(max_order + 1) for m in range(max_order + 1)]
    return Output(document=doc)


COMMANDS = {
    "eval": cmd_eval,
    "transform": cmd_transform,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
    "report-spectrum": cmd_report_spectrum,
}


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rhs-spectra", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--out", help="output path (overrides [output].path)")
    p.add_argument("--stdout", action="store_true", help="write data to stdout")
    p.add_argument("--max-order", type=int, default=None,
                   help="highest derivative/norm order in report-spectrum (default 3)")
    p.add_argument("--seed", type=int, default=None, help="seed for random test families")
    return p


def _thread_cap():
    raw = os.environ.get("RHS_SPECTRA_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigError(f"RHS_SPECTRA_THREADS must be a positive integer, got {raw!r}")
    return n


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        _thread_cap()
        if args.max_order is not None and args.max_order < 0:
            raise ConfigError("--max-order must be non-negative")
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = load_config(args.config)
        start = time.perf_counter()
        out = COMMANDS[args.command](cfg, args)
        fmt = cfg.output_format or ("json" if args.command in ("verify", "report-spectrum") else "csv")
        text = out.render(fmt)
        path = args.out or cfg.output_path
        if args.stdout or path is None:
            sys.stdout.write(text)
        if path is not None:
            _write(path, text)
            if out.rows is not None and fmt == "csv":
                _write(path + ".json", json_text(out.sidecar))
        print(f"{args.command}: done in {time.perf_counter() - start:.2f} s", file=sys.stderr)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureFailure as exc:
        print(f"quadrature failure in {args.command}: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except RHSError as exc:
        print(f"domain error in {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.command == "verify" and not out.sidecar.get("pass", False):
        return EXIT_VERIFY
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
