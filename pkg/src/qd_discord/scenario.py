"""Configuration-driven trajectory runs and figure presets.

A configuration is a TOML document with the sections ``material``,
``bath``, ``initial``, ``grid``, ``sweep``, ``quadrature`` and ``output``.
Missing keys take the GaAs defaults below.
"""
from __future__ import annotations

import copy
import itertools
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .measures import (
    discord_bounds,
    wootters_concurrence,
    xstate_concurrence,
    xstate_discord_closed_form,
    xstate_regime_margin,
)
from .oracle import oracle_discord
from .phonon import (
    DENSITY_SI_TO_INTERNAL,
    HBAR,
    INFINITE,
    K_B,
    BathConfig,
    DephasingKernels,
    KernelValues,
    MaterialParams,
    QuadratureConfig,
    kernels_on_grid,
)
from .quadrature import QuadratureNotConverged
from .states import (
    PureStateSpec,
    TwoQubitState,
    XStateSpec,
    apply_kernels,
    load_state,
    make_pure_state,
    make_x_state,
    purity,
)

SWEEP_AXES = ("temperature", "d", "ab_diff", "delta_eps", "delta_E")

DEFAULTS: dict[str, dict[str, Any]] = {
    "material": {"sigma_e": 8000.0, "sigma_h": -1000.0, "c": 5.1, "rho": 5360.0,
                 "l_perp": 5.0, "l_z": 1.0},
    "bath": {"temperature": 77.0, "d": 6.0, "delta_eps": 0.0},
    "grid": {"t_max": 10.0, "n_points": 401},
    "quadrature": {"tol": 1e-8, "n_sigma": 7.0, "max_nodes": 2_000_000, "angular_tol": 1e-14},
    "output": {"dir": "out", "name": "run"},
}
DEFAULT_INITIAL = {"pure": {"a": 0.25, "alpha": 0.0, "beta": 0.0}}

PRESETS: dict[str, list[dict[str, Any]]] = {
    "fig1": [
        {
            "bath": {"temperature": 77.0, "d": "inf"},
            "initial": {"xstate": {"diff": 0.0}},
            "sweep": {"axis": "ab_diff", "values": [0.0, 0.15, 0.3]},
            "output": {"name": "fig1a"},
        },
        {
            "bath": {"temperature": 77.0, "d": 6.0},
            "initial": {"xstate": {"diff": 0.0}},
            "sweep": {"axis": "ab_diff", "values": [0.0, 0.15, 0.3]},
            "output": {"name": "fig1b"},
        },
    ],
    "fig2": [
        {
            "bath": {"d": 6.0, "delta_E": 0.0},
            "initial": {"pure": {"a": 0.25}},
            "sweep": {"axis": "temperature", "values": [3.0, 77.0]},
            "output": {"name": "fig2a"},
        },
        {
            "bath": {"d": 6.0, "temperature": 77.0},
            "initial": {"pure": {"a": 0.25}},
            "sweep": {"axis": "delta_E", "values": [0.0, 6.0]},
            "output": {"name": "fig2b"},
        },
    ],
}


class ConfigParseError(ValueError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if field:
            where.append(field)
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")
        self.field = field
        self.line = line


@dataclass(frozen=True)
class InitialState:
    kind: str                                # "pure" | "xstate" | "matrix"
    pure: PureStateSpec | None = None
    xstate: XStateSpec | None = None
    path: str | None = None
    matrix: TwoQubitState | None = field(default=None, compare=False, repr=False)

    def build(self, ab_diff: float | None = None) -> TwoQubitState:
        if self.kind == "pure":
            return make_pure_state(self.pure)
        if self.kind == "xstate":
            spec = XStateSpec.from_difference(ab_diff) if ab_diff is not None else self.xstate
            return make_x_state(spec, 1.0, 1.0)
        return self.matrix

    def xspec(self, ab_diff: float | None = None) -> XStateSpec | None:
        if self.kind != "xstate":
            return None
        return XStateSpec.from_difference(ab_diff) if ab_diff is not None else self.xstate


@dataclass(frozen=True)
class ScenarioConfig:
    material: MaterialParams
    bath: BathConfig
    initial: InitialState
    t_max: float
    n_points: int
    quad: QuadratureConfig
    delta_E: float | None = None             # renormalized target; overrides bath.delta_eps
    sweep_axis: str | None = None
    sweep_values: tuple = ()
    out_dir: str = "out"
    name: str = "run"

    def time_grid(self) -> np.ndarray:
        if self.n_points == 1:
            return np.array([0.0])
        return np.linspace(0.0, self.t_max, self.n_points)

    def points(self) -> list[tuple[Any, "ScenarioConfig"]]:
        """(sweep value, scenario with that value applied); one entry without a sweep."""
        if not self.sweep_axis:
            return [(None, self)]
        out = []
        for v in self.sweep_values:
            if self.sweep_axis == "temperature":
                out.append((v, replace(self, bath=replace(self.bath, temperature=v))))
            elif self.sweep_axis == "d":
                out.append((v, replace(self, bath=replace(self.bath, d=v))))
            elif self.sweep_axis == "delta_eps":
                out.append((v, replace(self, bath=replace(self.bath, delta_eps=v), delta_E=None)))
            elif self.sweep_axis == "delta_E":
                out.append((v, replace(self, delta_E=v)))
            else:
                out.append((v, self))
        return out


# -- parsing --------------------------------------------------------------------

def _deep_merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            if key == "initial":
                out[key] = copy.deepcopy(value)    # variants replace, never mix
            else:
                out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _number(section: dict, key: str, where: str, *, allow_inf: bool = False) -> float:
    value = section[key]
    if allow_inf and isinstance(value, str) and value.strip().lower() in ("inf", "infinite", "infinity"):
        return INFINITE
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigParseError(f"expected a number, got {value!r}", f"{where}.{key}")
    value = float(value)
    if math.isinf(value) and allow_inf and value > 0:
        return INFINITE
    if not math.isfinite(value):
        raise ConfigParseError(f"must be finite, got {value!r}", f"{where}.{key}")
    return value


def _check_keys(section: dict, allowed, where: str):
    for key in section:
        if key not in allowed:
            raise ConfigParseError(f"unknown key {key!r}", f"{where}.{key}")


def load_toml(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError:
        raise
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            import re
            m = re.search(r"line (\d+)", str(exc))
            line = int(m.group(1)) if m else None
        raise ConfigParseError(str(exc), line=line) from exc


def resolve(raw: dict, base_dir: Path | None = None) -> ScenarioConfig:
    """Apply defaults, check ranges, and build a ScenarioConfig."""
    _check_keys(raw, ("material", "bath", "initial", "grid", "sweep", "quadrature", "output"), "config")
    doc = _deep_merge(DEFAULTS, {k: v for k, v in raw.items() if k != "initial"})
    for name in ("material", "bath", "grid", "quadrature", "output", "sweep"):
        if name in doc and not isinstance(doc[name], dict):
            raise ConfigParseError("expected a table", name)

    m = doc["material"]
    _check_keys(m, DEFAULTS["material"], "material")
    try:
        material = MaterialParams(**{k: _number(m, k, "material") for k in m})
    except ValueError as exc:
        raise ConfigParseError(str(exc), "material") from exc

    b = doc["bath"]
    _check_keys(b, ("temperature", "d", "delta_eps", "delta_E"), "bath")
    temperature = _number(b, "temperature", "bath")
    if temperature < 0:
        raise ConfigParseError(f"must be >= 0, got {temperature:g}", "bath.temperature")
    d = _number(b, "d", "bath", allow_inf=True)
    if not d > 0:
        raise ConfigParseError(f"must be > 0 or \"inf\", got {d:g}", "bath.d")
    delta_eps = _number(b, "delta_eps", "bath")
    delta_E = _number(b, "delta_E", "bath") if "delta_E" in b else None
    if delta_E is not None and "delta_eps" in raw.get("bath", {}):
        raise ConfigParseError("give either delta_eps or delta_E, not both", "bath.delta_E")
    bath = BathConfig(temperature=temperature, d=d, delta_eps=delta_eps)

    initial = _resolve_initial(raw.get("initial", DEFAULT_INITIAL), base_dir)

    g = doc["grid"]
    _check_keys(g, DEFAULTS["grid"], "grid")
    t_max = _number(g, "t_max", "grid")
    if t_max < 0:
        raise ConfigParseError("must be >= 0", "grid.t_max")
    n_points = g["n_points"]
    if isinstance(n_points, bool) or not isinstance(n_points, int):
        raise ConfigParseError(f"expected an integer, got {n_points!r}", "grid.n_points")
    if t_max == 0:
        n_points = 1
    elif n_points < 2:
        raise ConfigParseError("must be >= 2 when t_max > 0", "grid.n_points")

    q = doc["quadrature"]
    _check_keys(q, DEFAULTS["quadrature"], "quadrature")
    try:
        quad = QuadratureConfig(tol=_number(q, "tol", "quadrature"),
                                n_sigma=_number(q, "n_sigma", "quadrature"),
                                max_nodes=int(q["max_nodes"]),
                                angular_tol=_number(q, "angular_tol", "quadrature"))
    except ValueError as exc:
        raise ConfigParseError(str(exc), "quadrature") from exc

    axis, values = None, ()
    s = doc.get("sweep")
    if s:
        _check_keys(s, ("axis", "values"), "sweep")
        axis = s.get("axis")
        if axis not in SWEEP_AXES:
            raise ConfigParseError(f"must be one of {', '.join(SWEEP_AXES)}", "sweep.axis")
        raw_values = s.get("values")
        if not isinstance(raw_values, list) or not raw_values:
            raise ConfigParseError("expected a non-empty list", "sweep.values")
        values = []
        for i, v in enumerate(raw_values):
            try:
                values.append(_number({"v": v}, "v", "sweep", allow_inf=(axis == "d")))
            except ConfigParseError as exc:
                raise ConfigParseError(f"entry {i}: expected a number, got {v!r}", "sweep.values") from exc
        values = tuple(values)
        if axis != "d" and any(math.isinf(v) for v in values):
            raise ConfigParseError("values must be finite", "sweep.values")
        if axis == "temperature" and any(v < 0 for v in values):
            raise ConfigParseError("temperatures must be >= 0", "sweep.values")
        if axis == "d" and any(not v > 0 for v in values):
            raise ConfigParseError("distances must be > 0", "sweep.values")
        if axis == "ab_diff":
            if initial.kind != "xstate":
                raise ConfigParseError("ab_diff sweeps need an xstate initial state", "sweep.axis")
            if any(abs(v) > 0.5 for v in values):
                raise ConfigParseError("|a - b| must be <= 1/2", "sweep.values")

    o = doc["output"]
    _check_keys(o, DEFAULTS["output"], "output")
    return ScenarioConfig(
        material=material, bath=bath, initial=initial, t_max=t_max, n_points=n_points,
        quad=quad, delta_E=delta_E, sweep_axis=axis, sweep_values=values,
        out_dir=str(o["dir"]), name=str(o["name"]),
    )


def _resolve_initial(section, base_dir) -> InitialState:
    if not isinstance(section, dict):
        raise ConfigParseError("expected a table", "initial")
    variants = [k for k in section if k in ("pure", "xstate", "matrix")]
    extra = [k for k in section if k not in ("pure", "xstate", "matrix")]
    if extra:
        raise ConfigParseError(f"unknown key {extra[0]!r}", f"initial.{extra[0]}")
    if len(variants) != 1:
        raise ConfigParseError("exactly one of initial.pure, initial.xstate, initial.matrix is required", "initial")
    kind = variants[0]
    body = section[kind]
    if not isinstance(body, dict):
        raise ConfigParseError("expected a table", f"initial.{kind}")
    where = f"initial.{kind}"
    try:
        if kind == "pure":
            _check_keys(body, ("a", "alpha", "beta"), where)
            vals = {k: _number(body, k, where) for k in body}
            return InitialState("pure", pure=PureStateSpec(**vals))
        if kind == "xstate":
            _check_keys(body, ("a", "b", "diff"), where)
            if "diff" in body:
                if "a" in body or "b" in body:
                    raise ConfigParseError("give either diff or a/b", where)
                spec = XStateSpec.from_difference(_number(body, "diff", where))
            else:
                a = _number(body, "a", where) if "a" in body else None
                b = _number(body, "b", where) if "b" in body else None
                if a is None and b is None:
                    a = b = 0.25
                a = 0.5 - b if a is None else a
                b = 0.5 - a if b is None else b
                spec = XStateSpec(a, b)
            return InitialState("xstate", xstate=spec)
        _check_keys(body, ("path",), where)
        if "path" not in body:
            raise ConfigParseError("missing key 'path'", where)
        path = Path(body["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return InitialState("matrix", path=str(path), matrix=load_state(path))
    except ConfigParseError:
        raise
    except ValueError as exc:
        raise ConfigParseError(str(exc), where) from exc


def load_config(path=None, preset: str | None = None, overrides: dict | None = None) -> list[ScenarioConfig]:
    """Resolve a config file and/or preset into one or more scenarios.

    Values in the file override the preset; ``overrides`` (from the command
    line) override both.
    """
    raw = {}
    base_dir = None
    if path is not None:
        raw = load_toml(path)
        base_dir = Path(path).resolve().parent
    docs = [raw]
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigParseError(f"unknown preset {preset!r}", "preset")
        docs = [_deep_merge(p, raw) for p in PRESETS[preset]]
    if overrides:
        docs = [_deep_merge(d, overrides) for d in docs]
    return [resolve(d, base_dir) for d in docs]


def validate_config(path) -> ScenarioConfig:
    """Resolve ``path`` without computing anything."""
    return load_config(path)[0]


# -- running --------------------------------------------------------------------

@dataclass
class Trajectory:
    sweep_value: Any
    columns: list[str]
    rows: list[list[float]]
    path: Path | None = None

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


def _short(v) -> str:
    """Shortest round-trip form, for names and manifests."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)


def _fmt(v) -> str:
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{float(v):.17g}"


def _closed_form(xspec: XStateSpec, values: KernelValues) -> float:
    f = values.coherence_factors()
    return xstate_discord_closed_form(xspec, f[0, 3], f[1, 2])


def _bounds_with_error(state: TwoQubitState, values: KernelValues, xspec: XStateSpec | None = None):
    """Discord bounds and their sensitivity to the kernel error bounds.

    Each error is the largest change over the 16 corners of the box
    kernel +/- error, plus a roundoff floor. Returns
    ``(bounds, err_lower, err_upper, err_closed_form)``; the last is None
    without an X-state spec.
    """
    floor = 1e-15
    base = discord_bounds(apply_kernels(state, values), warn=False)
    closed = _closed_form(xspec, values) if xspec is not None else None
    errs = (values.err_A01, values.err_A03, values.err_B01, values.err_B03)
    if values.t == 0 or not any(errs):
        return base, floor, floor, (floor if xspec is not None else None)
    dl = du = dc = 0.0
    for signs in itertools.product((-1.0, 1.0), repeat=4):
        shifted = replace(
            values,
            A01=values.A01 + signs[0] * errs[0],
            A03=values.A03 + signs[1] * errs[1],
            B01=min(0.0, values.B01 + signs[2] * errs[2]),
            B03=min(0.0, values.B03 + signs[3] * errs[3]),
        )
        b = discord_bounds(apply_kernels(state, shifted), warn=False)
        dl = max(dl, abs(b.lower - base.lower))
        du = max(du, abs(b.upper - base.upper))
        if xspec is not None:
            dc = max(dc, abs(_closed_form(xspec, shifted) - closed))
    return base, dl + floor, du + floor, (dc + floor if xspec is not None else None)


def base_kernels(cfg: ScenarioConfig, cache: dict | None = None) -> DephasingKernels:
    key = (cfg.material, cfg.bath.temperature, cfg.bath.d, cfg.quad)
    if cache is not None and key in cache:
        base = cache[key]
    else:
        base = DephasingKernels(cfg.material, replace(cfg.bath, delta_eps=0.0), cfg.quad)
        if cache is not None:
            cache[key] = base
    return base


def resolved_delta_eps(cfg: ScenarioConfig, kernels: DephasingKernels) -> float:
    if cfg.delta_E is None:
        return cfg.bath.delta_eps
    # deltaE = delta_eps - shift with a delta_eps-independent shift, so the inversion is exact.
    return cfg.delta_E + kernels._phonon_shift()[0]


def tabulate(cfg: ScenarioConfig, cache: dict | None = None, threads: int = 1):
    base = base_kernels(cfg, cache)
    kernels = base.with_delta_eps(resolved_delta_eps(cfg, base))
    return kernels, kernels_on_grid(cfg.time_grid(), kernels, threads=threads)


KERNEL_COLUMNS = ["t", "B01", "B03", "B12", "A01", "A03", "deltaE",
                  "err_B01", "err_B03", "err_B12", "err_A01", "err_A03", "err_deltaE"]


def kernel_rows(table) -> list[list[float]]:
    return [[v.t, v.B01, v.B03, v.B12, v.A01, v.A03, v.deltaE,
             v.err_B01, v.err_B03, v.err_B12, v.err_A01, v.err_A03, v.err_deltaE] for v in table.values]


def trajectory_columns(cfg: ScenarioConfig, with_oracle: bool) -> list[str]:
    cols = ["t", "B01", "B03", "B12", "A01", "A03", "deltaE", "D_lower", "D_upper"]
    if with_oracle:
        cols.append("D_oracle")
    cols.append("C_wootters")
    if cfg.initial.kind == "xstate":
        cols += ["C_xstate", "D_xstate_closed", "xstate_margin"]
    cols += ["purity", "D_k1", "D_k2", "D_k3",
             "err_B01", "err_B03", "err_B12", "err_A01", "err_A03", "err_deltaE", "err_D_lower", "err_D_upper"]
    if cfg.initial.kind == "xstate":
        cols.append("err_D_xstate_closed")
    return cols


def evaluate_trajectory(cfg: ScenarioConfig, table, initial: TwoQubitState,
                        xspec: XStateSpec | None, with_oracle: bool = False,
                        oracle_restarts: int = 4) -> list[list[float]]:
    rows = []
    for v in table.values:
        state = apply_kernels(initial, v)
        bounds, err_lo, err_up, err_closed = _bounds_with_error(initial, v, xspec)
        row = [v.t, v.B01, v.B03, v.B12, v.A01, v.A03, v.deltaE, bounds.lower, bounds.upper]
        if with_oracle:
            row.append(oracle_discord(state, restarts=oracle_restarts).value)
        row.append(wootters_concurrence(state))
        if xspec is not None:
            factors = v.coherence_factors()
            g03, g12 = factors[0, 3], factors[1, 2]
            row += [xstate_concurrence(xspec, g03, g12),
                    xstate_discord_closed_form(xspec, g03, g12),
                    xstate_regime_margin(xspec, g03, g12)]
        row.append(purity(state))
        row += list(bounds.lower_candidates)
        row += [v.err_B01, v.err_B03, v.err_B12, v.err_A01, v.err_A03, v.err_deltaE, err_lo, err_up]
        if xspec is not None:
            row.append(err_closed)
        rows.append(row)
    return rows


def _label(cfg: ScenarioConfig, value) -> str:
    if cfg.sweep_axis is None:
        return cfg.name
    return f"{cfg.name}_{cfg.sweep_axis}={_short(value)}"


def write_csv(path: Path, columns: list[str], rows: list[list[float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(x) for x in r) + "\n")


def write_plot_script(path: Path, csv_name: str, columns: list[str]) -> None:
    """gnuplot commands plotting the discord bounds against time."""
    idx = {c: i + 1 for i, c in enumerate(columns)}
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 't (ps)'",
        "set ylabel 'geometric discord'",
        f"plot '{csv_name}' using {idx['t']}:{idx['D_lower']} with lines, \\",
        f"     '{csv_name}' using {idx['t']}:{idx['D_upper']} with lines dashtype 2",
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def manifest_lines(cfg: ScenarioConfig, resolved: list[tuple[Any, float, float]], files: list[str],
                   with_oracle: bool) -> list[str]:
    m, b, q = cfg.material, cfg.bath, cfg.quad
    lines = [
        f"tool = qd_discord {__version__}",
        f"name = {cfg.name}",
        f"constant.hbar_meV_ps = {_short(HBAR)}",
        f"constant.k_B_meV_per_K = {_short(K_B)}",
        f"constant.density_kg_m3_to_meV_ps2_nm5 = {_short(DENSITY_SI_TO_INTERNAL)}",
        f"material.sigma_e_meV = {_short(m.sigma_e)}",
        f"material.sigma_h_meV = {_short(m.sigma_h)}",
        f"material.c_nm_per_ps = {_short(m.c)}",
        f"material.rho_kg_m3 = {_short(m.rho)}",
        f"material.rho_internal = {_short(m.rho_internal)}",
        f"material.l_perp_nm = {_short(m.l_perp)}",
        f"material.l_z_nm = {_short(m.l_z)}",
        f"bath.temperature_K = {_short(b.temperature)}",
        f"bath.d_nm = {_short(b.d)}",
        f"bath.delta_eps_per_ps = {_short(b.delta_eps)}",
        f"bath.delta_E_target_per_ps = {'none' if cfg.delta_E is None else _short(cfg.delta_E)}",
        f"initial.kind = {cfg.initial.kind}",
    ]
    if cfg.initial.kind == "pure":
        p = cfg.initial.pure
        lines += [f"initial.a = {_short(p.a)}", f"initial.alpha = {_short(p.alpha)}", f"initial.beta = {_short(p.beta)}"]
    elif cfg.initial.kind == "xstate":
        lines += [f"initial.a = {_short(cfg.initial.xstate.a)}", f"initial.b = {_short(cfg.initial.xstate.b)}"]
    else:
        lines.append(f"initial.path = {cfg.initial.path}")
    lines += [
        f"grid.t_max_ps = {_short(cfg.t_max)}",
        f"grid.n_points = {cfg.n_points}",
        f"quadrature.tol = {_short(q.tol)}",
        f"quadrature.n_sigma = {_short(q.n_sigma)}",
        f"quadrature.max_nodes = {q.max_nodes}",
        f"quadrature.angular_tol = {_short(q.angular_tol)}",
        f"sweep.axis = {cfg.sweep_axis or 'none'}",
        f"sweep.values = {' '.join(_short(v) for v in cfg.sweep_values) if cfg.sweep_values else 'none'}",
        f"oracle = {'on' if with_oracle else 'off'}",
    ]
    for (value, delta_eps, deltaE), fname in zip(resolved, files):
        lines.append(f"run.{fname}.delta_eps_per_ps = {_short(delta_eps)}")
        lines.append(f"run.{fname}.deltaE_per_ps = {_short(deltaE)}")
    return lines


def run_scenario(cfg: ScenarioConfig, with_oracle: bool = False, threads: int = 1,
                 out_dir: str | os.PathLike | None = None, write: bool = True,
                 kernel_cache: dict | None = None) -> list[Trajectory]:
    """Propagate the initial state over the time grid for every sweep value.

    Writes ``<name>_<axis>=<value>.csv`` plus a gnuplot script per CSV and a
    ``<name>_manifest.txt``. On failure, files written by this call are removed.
    """
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    cache = kernel_cache if kernel_cache is not None else {}
    written: list[Path] = []
    results: list[Trajectory] = []
    resolved = []
    try:
        if write:
            out.mkdir(parents=True, exist_ok=True)
        for value, point in cfg.points():
            ab_diff = value if cfg.sweep_axis == "ab_diff" else None
            initial = point.initial.build(ab_diff)
            xspec = point.initial.xspec(ab_diff)
            kernels, table = tabulate(point, cache, threads)
            resolved.append((value, kernels.bath.delta_eps, kernels.deltaE))
            columns = trajectory_columns(point, with_oracle)
            rows = evaluate_trajectory(point, table, initial, xspec, with_oracle)
            traj = Trajectory(value, columns, rows)
            if write:
                label = _label(cfg, value)
                csv_path = out / f"{label}.csv"
                write_csv(csv_path, columns, rows)
                written.append(csv_path)
                plot_path = out / f"{label}.gp"
                write_plot_script(plot_path, csv_path.name, columns)
                written.append(plot_path)
                traj.path = csv_path
            results.append(traj)
        if write:
            files = [t.path.name for t in results]
            manifest = out / f"{cfg.name}_manifest.txt"
            manifest.write_text("\n".join(manifest_lines(cfg, resolved, files, with_oracle)) + "\n",
                                encoding="utf-8")
            written.append(manifest)
    except BaseException:
        for p in written:
            try:
                p.unlink()
            except OSError:
                pass
        raise
    return results


def run_kernels(cfg: ScenarioConfig, threads: int = 1, out_dir=None, write: bool = True):
    """Kernel-only tables, one per sweep value."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    cache: dict = {}
    written, results = [], []
    try:
        if write:
            out.mkdir(parents=True, exist_ok=True)
        for value, point in cfg.points():
            _, table = tabulate(point, cache, threads)
            rows = kernel_rows(table)
            traj = Trajectory(value, list(KERNEL_COLUMNS), rows)
            if write:
                path = out / f"{_label(cfg, value)}_kernels.csv"
                write_csv(path, KERNEL_COLUMNS, rows)
                written.append(path)
                traj.path = path
            results.append(traj)
    except BaseException:
        for p in written:
            try:
                p.unlink()
            except OSError:
                pass
        raise
    return results


def describe(cfg: ScenarioConfig) -> list[str]:
    """Resolved configuration as ``key = value`` lines."""
    return manifest_lines(cfg, [], [], with_oracle=False)
