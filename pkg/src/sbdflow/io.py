"""Run configuration files and result writers.

Configs are INI files with fixed sections.  Unknown sections or keys are
rejected, and every problem is reported as ``section.key (line N): message``
so typos do not silently fall back to defaults.  Data on boundary segments
is either a constant or one of a few named built-in functions; there are
no expressions.
"""
from __future__ import annotations

import configparser
import csv
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .core import ClosureProfile, PhysicalParams, SymTensor2, ValidationError, validate_params
from .grid import GeometryConfig, Model, StaggeredGrid

SCENARIOS = ("mms-full", "mms-reduced", "filtration", "custom")
BC_SEGMENTS_FULL = ("ff_left", "ff_right", "ff_top", "tr_left", "tr_right",
                    "pm_left", "pm_right", "pm_bottom")
GAMMA_ENDS = ("gamma_left", "gamma_right")
BC_KINDS = ("velocity", "no_slip", "traction", "do_nothing", "pressure", "flux")
NAMED_FUNCTIONS = ("zero", "exact", "parabola_inflow")
OUTPUT_ENV = "SBDFLOW_OUTPUT_DIR"


@dataclass(frozen=True)
class BCEntry:
    """One boundary segment: kind plus constant data or a named function."""

    kind: str
    data: tuple | str = ()

    def text(self) -> str:
        if self.data == () or self.data is None:
            return self.kind
        if isinstance(self.data, str):
            return f"{self.kind}:{self.data}"
        return f"{self.kind}:" + ",".join(repr(float(v)) for v in self.data)


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "mms-full"
    model: str = "full"
    profile: str = "quadratic"
    lambda1: float | None = None
    lambda2: float | None = None
    output: str = "results"
    # geometry; nx/ny are only used by custom runs
    Lx: float = 1.0
    Ly: float = 2.0
    y_gamma_pm: float = 0.9
    y_gamma_ff: float = 1.1
    nx: int = 20
    ny: int = 40
    # physics
    mu: float = 1.0
    mu_eff: float = 1.0
    alpha: float = 0.1
    beta: tuple = (0.0, 0.0, 0.0)
    K_tr: tuple = (1e-2, 0.0, 1e-2)
    K_pm: tuple = (1e-2, 0.0, 1e-2)
    # grid levels (cells per unit length)
    levels: tuple = (20, 40, 80)
    # solver
    method: str = "direct"
    tol: float = 1e-10
    bc: dict = field(default_factory=dict)

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(self.mu, self.mu_eff, self.alpha, SymTensor2(*self.beta),
                              SymTensor2(*self.K_tr), SymTensor2(*self.K_pm))

    @property
    def geometry(self) -> GeometryConfig:
        return GeometryConfig(self.Lx, self.Ly, self.y_gamma_pm, self.y_gamma_ff, self.nx, self.ny)

    @property
    def closure(self) -> ClosureProfile:
        if self.profile == "custom":
            return ClosureProfile.custom(self.lambda1, self.lambda2)
        return ClosureProfile.named(self.profile)

    def output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_ENV) or self.output)


# key -> (section, converter, serializer)
def _floats3(s):
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 3:
        raise ValueError("expected three numbers xx, xy, yy")
    return tuple(float(p) for p in parts)


def _ints(s):
    out = tuple(int(p) for p in s.replace(",", " ").split())
    if not out:
        raise ValueError("expected at least one integer")
    return out


def _opt_float(s):
    return None if s.strip().lower() in ("", "none") else float(s)


def _join(v):
    return ", ".join(repr(float(x)) for x in v)


_SCHEMA = {
    "run": {"scenario": (str, str), "model": (str, str), "profile": (str, str),
            "lambda1": (_opt_float, str), "lambda2": (_opt_float, str), "output": (str, str)},
    "geometry": {"Lx": (float, repr), "Ly": (float, repr), "y_gamma_pm": (float, repr),
                 "y_gamma_ff": (float, repr), "nx": (int, str), "ny": (int, str)},
    "params": {"mu": (float, repr), "mu_eff": (float, repr), "alpha": (float, repr),
               "beta": (_floats3, _join), "K_tr": (_floats3, _join), "K_pm": (_floats3, _join)},
    "grid": {"levels": (_ints, lambda v: " ".join(map(str, v)))},
    "solver": {"method": (str, str), "tol": (float, repr)},
}


def _parse_bc(text: str) -> BCEntry:
    kind, _, data = text.strip().partition(":")
    kind, data = kind.strip(), data.strip()
    if kind in ("dirichlet", "neumann"):
        vals = tuple(float(v) for v in data.split(",")) if data else (0.0, 0.0)
        if len(vals) != 2:
            raise ValueError("interface end data needs two numbers")
        return BCEntry(kind, vals)
    if kind not in BC_KINDS:
        raise ValueError(f"unknown boundary kind {kind!r}")
    if not data:
        return BCEntry(kind)
    if data in NAMED_FUNCTIONS:
        return BCEntry(kind, data)
    vals = tuple(float(v) for v in data.split(","))
    want = 2 if kind in ("velocity", "traction") else 1
    if len(vals) != want:
        raise ValueError(f"{kind} data needs {want} number(s) or one of {', '.join(NAMED_FUNCTIONS)}")
    return BCEntry(kind, vals)


def _line_numbers(text: str) -> dict:
    """(section, key) -> line number, and section -> line number."""
    out, sec = {}, None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            sec = line[1:-1].strip()
            out[sec] = n
        elif sec is not None and ("=" in line or ":" in line):
            key = line.split("=", 1)[0].strip() if "=" in line else line.split(":", 1)[0].strip()
            out[(sec, key)] = n
    return out


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ValidationError(f"{source}: {exc}") from exc
    lines = _line_numbers(text)
    errs, vals = [], {}

    def err(sec, key, msg):
        n = lines.get((sec, key), lines.get(sec, "?"))
        where = f"{sec}.{key}" if key else sec
        errs.append(f"{where} (line {n}): {msg}")

    for sec in cp.sections():
        if sec != "bc" and sec not in _SCHEMA:
            err(sec, None, "unknown section")
            continue
        for key, raw in cp.items(sec):
            if sec == "bc":
                if key not in BC_SEGMENTS_FULL + GAMMA_ENDS:
                    err(sec, key, "unknown boundary segment")
                    continue
                try:
                    vals.setdefault("bc", {})[key] = _parse_bc(raw)
                except ValueError as exc:
                    err(sec, key, str(exc))
                continue
            if key not in _SCHEMA[sec]:
                err(sec, key, "unknown key")
                continue
            conv = _SCHEMA[sec][key][0]
            try:
                vals[key] = conv(raw)
            except ValueError as exc:
                err(sec, key, f"bad value {raw!r}: {exc}")
    cfg = RunConfig(**vals)

    def chk(sec, key, ok, msg):
        if not ok:
            err(sec, key, msg)

    chk("run", "scenario", cfg.scenario in SCENARIOS, f"must be one of {', '.join(SCENARIOS)}")
    chk("run", "model", cfg.model in ("full", "reduced"), "must be full or reduced")
    chk("solver", "method", cfg.method in ("direct", "krylov", "auto"),
        "must be direct, krylov or auto")
    chk("solver", "tol", cfg.tol > 0, "must be positive")
    try:
        cfg.closure
    except (ValidationError, ValueError) as exc:
        err("run", "profile", str(exc))
    for msg in validate_params(cfg.params):
        name = msg.split()[0]
        err("params", name, msg)
    for msg in cfg.geometry.errors():
        key = "y_gamma_ff" if "d must" in msg else None
        err("geometry", key, msg)
    if cfg.scenario == "custom":
        from .grid import build_grid
        try:
            build_grid(cfg.geometry, cfg.model)
        except ValidationError as exc:
            for m in exc.errors:
                err("geometry", None, m)
        need = BC_SEGMENTS_FULL if cfg.model == "full" else tuple(
            s for s in BC_SEGMENTS_FULL if not s.startswith("tr_")) + GAMMA_ENDS
        for s in need:
            chk("bc", s, s in cfg.bc, "missing boundary condition for custom run")
    if errs:
        raise ValidationError(errs)
    return cfg


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), str(path))


def serialize_config(cfg: RunConfig) -> str:
    """INI text that parses back to ``cfg``."""
    out = []
    for sec, keys in _SCHEMA.items():
        out.append(f"[{sec}]")
        for key, (_, ser) in keys.items():
            v = getattr(cfg, key)
            if v is None:
                continue
            out.append(f"{key} = {ser(v)}")
        out.append("")
    if cfg.bc:
        out.append("[bc]")
        for k in sorted(cfg.bc):
            out.append(f"{k} = {cfg.bc[k].text()}")
        out.append("")
    return "\n".join(out)


# ------------------------------------------------------------------ writers
def _g17(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_g17(v) for v in r])
    return path


def write_convergence_csv(report, outdir) -> Path:
    return write_csv(Path(outdir) / f"convergence_{report.model}.csv",
                     ("h", "field", "error", "order"), report.rows())


def write_deviations_csv(report, outdir) -> Path:
    return write_csv(Path(outdir) / "filtration_deviations.csv",
                     ("profile", "eps_u", "eps_v", "eps_p", "cpu_full_s", "cpu_reduced_s"),
                     report.rows())


def write_profile_csv(table: dict, outdir, y: float = 0.505) -> Path:
    cols = list(table)
    rows = zip(*(table[c] for c in cols))
    return write_csv(Path(outdir) / f"profile_y{y:g}.csv", cols, rows)


def write_gamma_csv(grid: StaggeredGrid, x: np.ndarray, outdir) -> Path:
    f = grid.dofmap.split(x)
    return write_csv(Path(outdir) / "gamma_fields.csv", ("s", "U", "V", "P"),
                     zip(grid.xc, f["V_t"], f["V_n"], f["P"]))


def _node_fields(grid: StaggeredGrid, x: np.ndarray, params: PhysicalParams | None):
    """Cell pressure (nx, ny) and node velocity (nx+1, ny+1) over the whole box.

    Rows run from the bottom; the porous rows come first.  In the reduced
    model the interface has no thickness in this picture.
    """
    f = grid.dofmap.split(x)
    nx, npm, ns = grid.nx, grid.n_pm, grid.ns
    p = np.concatenate([f["p_pm"], f["p"]], axis=1)
    U = np.zeros((nx + 1, npm + ns + 1))
    V = np.zeros_like(U)
    # porous medium: Darcy velocity from the cell pressure gradient
    if params is not None:
        K, mu = params.K_pm, params.mu
        ppm = f["p_pm"]
        gx = np.gradient(ppm, grid.hx, axis=0) if nx > 1 else np.zeros_like(ppm)
        gy = np.gradient(ppm, grid.hy, axis=1) if npm > 1 else np.zeros_like(ppm)
        ux = -(K.xx * gx + K.xy * gy) / mu
        uy = -(K.xy * gx + K.yy * gy) / mu
        pad = lambda a: np.pad(a, 1, mode="edge")  # noqa: E731
        for src, dst in ((ux, U), (uy, V)):
            q = pad(src)
            dst[:, :npm + 1] = 0.25 * (q[:-1, :-1] + q[1:, :-1] + q[:-1, 1:] + q[1:, 1:])
    # Stokes rows: u on vertical faces, v on horizontal faces
    u = f["u"]
    bottom = f["u_gpm"] if "u_gpm" in f else f["u_gff"]
    ulines = np.column_stack([bottom, 0.5 * (u[:, :-1] + u[:, 1:]), f["u_top"]])
    if grid.n_tr:
        ulines[:, grid.n_tr] = f["u_gff"]
    v = f["v"]
    vcols = np.vstack([f["v_left"], 0.5 * (v[:-1] + v[1:]), f["v_right"]])
    U[:, npm:] = ulines
    V[:, npm:] = vcols
    return p, U, V


def write_vtk(grid: StaggeredGrid, x: np.ndarray, path, params: PhysicalParams | None = None,
              title: str = "sbdflow solution") -> Path:
    """Legacy ASCII STRUCTURED_POINTS file: cell pressure, node velocity."""
    p, U, V = _node_fields(grid, x, params)
    nx, ny = p.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    g = lambda a: format(float(a), ".17g")  # noqa: E731
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET STRUCTURED_POINTS",
             f"DIMENSIONS {nx + 1} {ny + 1} 1", "ORIGIN 0 0 0",
             f"SPACING {g(grid.hx)} {g(grid.hy)} 1",
             f"CELL_DATA {nx * ny}", "SCALARS p double 1", "LOOKUP_TABLE default"]
    lines += [g(v) for v in p.ravel(order="F")]
    lines += [f"POINT_DATA {(nx + 1) * (ny + 1)}", "VECTORS velocity double"]
    lines += [f"{g(a)} {g(b)} 0" for a, b in zip(U.ravel(order="F"), V.ravel(order="F"))]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_matrix(system, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scipy.io.mmwrite(str(path), sp.coo_matrix(system.matrix), comment="sbdflow system matrix",
                     precision=17)
    return path
