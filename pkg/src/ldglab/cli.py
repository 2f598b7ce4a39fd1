"""Command-line entry point: verify, minimize, analyze, sweep.

Run configs are INI-style text with a top-level ``schema = 1`` line (a
``[meta]`` section is accepted too) and sections ``[domain]``, ``[grid]``,
``[solver]``, ``[boundary]``, ``[analysis]``.  The schema is strict: unknown
sections or keys are errors carrying the offending line number, so typos
never silently fall back to defaults.  Every run directory embeds the full
effective config (``config_echo`` in ``run.json``), and that echo re-parses
to an equal config.

Exit codes: 0 success, 1 numerical failure, 2 config/schema error, 3 I/O
error.  Malformed *values* (negative radius, too-coarse grid, bad boundary
parameters) count as config errors; divergence, norm violations and
unconverged-run diagnostics count as numerical failures.

Thread count resolution: ``--threads`` flag, else the ``LDG_THREADS``
environment variable, else ``threads`` under ``[solver]``, else 1.  All
artifacts are bitwise independent of the thread count.

``verify`` honours the ``LDG_VERIFY_MUTATE`` environment variable as a
negative-control hook: when set, every computed residual is shifted by a
constant offset before the pass/fail comparison, so the suite must report
failures.  A verify run that cannot be made to fail would be worthless.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from math import pi
from pathlib import Path

import numpy as np

from .boundary_data import (
    angle_radial,
    angle_torus,
    constant_trace,
    director_trace,
    full_sphere_trace,
    tangent_trace,
)
from .errors import (
    BadBoundary,
    BadEndpoints,
    ConfigError,
    InvalidSpec,
    LdgError,
    MissingArtifacts,
)
from .solver import (
    Ball,
    Cylinder,
    E0_COORDS,
    EquivariantField,
    HalfSliceGrid,
    SolverConfig,
    SolverRun,
    detect_singularities,
    discrete_energy,
    discrete_gradient,
    field_from_csv,
    field_to_csv,
    minimize,
    sample_field,
)
from .spheres import (
    S2Point,
    SphereSpec,
    TwistorCurve,
    VERONESE,
    energy_density,
    eval_sphere,
    horizontality_residual,
    sphere_energy,
    tension_residual,
    conformality_gap,
    twistor_curve_eval,
    twistor_lift,
    twistor_project,
)
from .topology import LEVEL_LADDER, beta_field, classify_solution, report_to_dict
from .variation import (
    Hedgehog,
    QuadratureGrid,
    TangentMap,
    hedgehog_destabilizer,
    omega2_identity_gap,
    random_test_field,
    second_variation,
)

SCHEMA_VERSION = 1

# Exit-code contract.
EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2
EXIT_IO = 3

_RUN_JSON = "run.json"
_FIELD_CSV = "field.csv"
_HISTORY_CSV = "energy_history.csv"
_TOPOLOGY_JSON = "topology.json"
_BETA_CSV = "beta.csv"


# --- config schema -----------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Validated run description plus the verbatim source text.

    The text participates in equality on purpose: the reproducibility
    contract is that the echo embedded in run.json re-parses to *this*
    object, text included.
    """

    text: str
    schema: int
    domain_kind: str            # "ball" | "cylinder"
    radius: float
    height: float | None        # cylinder only
    n_r: int
    n_z: int
    lam: float
    penalty_eps: float | None
    tau: float | None
    max_iters: int
    grad_tol: float
    seed: int
    init: str                   # "homogeneous" | "dipole"
    dipole_count: int
    threads: int
    boundary_kind: str          # constant | tangent | radial | torus | full_sphere
    alpha: float                # tangent only
    j: float                    # torus only
    mu1: complex                # full_sphere only
    mu2: complex                # full_sphere only
    ladder: tuple[float, ...]
    ring_tol: float
    t2: float


_SECTION_KEYS = {
    "meta": ("schema",),
    "domain": ("kind", "radius", "height"),
    "grid": ("n_r", "n_z"),
    "solver": ("lambda", "penalty_eps", "tau", "max_iters", "grad_tol",
               "seed", "init", "dipole_count", "threads"),
    "boundary": ("kind", "alpha", "j", "mu1", "mu2"),
    "analysis": ("ladder", "ring_tol", "t2"),
}

_BOUNDARY_KINDS = ("constant", "tangent", "radial", "torus", "full_sphere")
# Keys that only make sense for specific boundary kinds; anything else
# present is a typo the schema must catch.
_BOUNDARY_EXTRAS = {
    "constant": (),
    "tangent": ("alpha",),
    "radial": (),
    "torus": ("j",),
    "full_sphere": ("mu1", "mu2"),
}


def _key_lines(text: str) -> dict:
    """First line number of every (section, key) pair and section header.

    Sections map from (name, None); keys before any header get section
    None, which the schema treats as [meta].
    """
    lines: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if raw[:1].isspace():
            continue  # continuation line of the previous value
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            lines.setdefault((section, None), lineno)
            continue
        for sep in "=:":
            if sep in stripped:
                key = stripped.split(sep, 1)[0].strip()
                lines.setdefault((section, key), lineno)
                break
    return lines


class _Section:
    """One config section with line-aware take-and-validate access."""

    def __init__(self, name: str, raw: dict, lines: dict):
        self.name = name
        self._raw = dict(raw)
        self._lines = lines

    def keys(self):
        return tuple(self._raw)

    def line(self, key: str) -> int | None:
        return self._lines.get((self.name, key), self._lines.get((None, key)))

    def take(self, key: str, conv, default=None, required: bool = False):
        if key not in self._raw:
            if required:
                raise ConfigError(
                    f"[{self.name}] is missing required key '{key}'",
                    self._lines.get((self.name, None)))
            return default
        raw = self._raw.pop(key)
        try:
            return conv(raw)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(
                f"[{self.name}] {key} = {raw!r}: {exc}", self.line(key))

    def reject_leftovers(self):
        for key in self._raw:
            raise ConfigError(
                f"unknown key '{key}' in [{self.name}]", self.line(key))

    def reject(self, key: str, why: str):
        if key in self._raw:
            raise ConfigError(f"[{self.name}] {key}: {why}", self.line(key))


def _as_float(raw: str) -> float:
    v = float(raw)
    if not np.isfinite(v):
        raise ValueError("must be finite")
    return v


def _as_int(raw: str) -> int:
    if float(raw) != int(float(raw)):
        raise ValueError("must be an integer")
    return int(float(raw))


def _as_complex(raw: str) -> complex:
    v = complex(str(raw).replace(" ", ""))
    if not (np.isfinite(v.real) and np.isfinite(v.imag)):
        raise ValueError("must be finite")
    return v


def _as_choice(options):
    def conv(raw: str) -> str:
        v = str(raw).strip()
        if v not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return v
    return conv


def _as_ladder(raw: str) -> tuple:
    parts = [p.strip() for p in str(raw).split(",") if p.strip()]
    if not parts:
        raise ValueError("must be a comma-separated list of levels")
    vals = tuple(float(p) for p in parts)
    for t in vals:
        if not (-1.0 < t < 1.0):
            raise ValueError(f"level {t!r} outside (-1, 1)")
    return vals


def _positive(kind, what: str):
    def conv(raw: str):
        v = kind(raw)
        if v <= 0:
            raise ValueError(f"{what} must be positive")
        return v
    return conv


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run config; raises ConfigError on any problem."""
    lines = _key_lines(text)
    cp = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError:
        # Bare top-of-file keys (the plain `schema = 1` style) live in an
        # implicit [meta] section; _Section.line falls back to the
        # section-less entries recorded by _key_lines.
        try:
            cp = configparser.ConfigParser(
                interpolation=None, inline_comment_prefixes=("#", ";"))
            cp.optionxform = str
            cp.read_string("[meta]\n" + text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    sections: dict[str, _Section] = {}
    for name in cp.sections():
        if name not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{name}]",
                              lines.get((name, None)))
        sec = _Section(name, dict(cp.items(name)), lines)
        for key in sec.keys():
            if key not in _SECTION_KEYS[name]:
                raise ConfigError(f"unknown key '{key}' in [{name}]",
                                  sec.line(key))
        sections[name] = sec

    def section(name: str) -> _Section:
        if name not in sections:
            raise ConfigError(f"missing [{name}] section")
        return sections[name]

    def optional(name: str) -> _Section:
        return sections.get(name) or _Section(name, {}, lines)

    meta = optional("meta")
    schema = meta.take("schema", _as_int)
    meta.reject_leftovers()
    if schema is None:
        raise ConfigError("missing 'schema = 1' (top of file or [meta])")
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {schema} "
                          f"(this build reads schema = {SCHEMA_VERSION})",
                          meta.line("schema"))

    dom = section("domain")
    domain_kind = dom.take("kind", _as_choice(("ball", "cylinder")),
                           required=True)
    radius = dom.take("radius", _positive(_as_float, "radius"), required=True)
    if domain_kind == "cylinder":
        height = dom.take("height", _positive(_as_float, "height"),
                          required=True)
    else:
        dom.reject("height", "only valid for cylinder domains")
        height = None
    dom.reject_leftovers()

    grd = section("grid")
    n_r = grd.take("n_r", _positive(_as_int, "n_r"), required=True)
    n_z = grd.take("n_z", _positive(_as_int, "n_z"), required=True)
    grd.reject_leftovers()

    sol = optional("solver")
    lam = sol.take("lambda", _as_float, default=0.0)
    if lam < 0:
        raise ConfigError("[solver] lambda must be >= 0", sol.line("lambda"))
    penalty_eps = sol.take("penalty_eps", _positive(_as_float, "penalty_eps"))
    tau = sol.take("tau", _positive(_as_float, "tau"))
    max_iters = sol.take("max_iters", _positive(_as_int, "max_iters"),
                         default=20000)
    grad_tol = sol.take("grad_tol", _positive(_as_float, "grad_tol"),
                        default=1e-6)
    seed = sol.take("seed", _as_int, default=0)
    init = sol.take("init", _as_choice(("homogeneous", "dipole")),
                    default="homogeneous")
    dipole_count = sol.take("dipole_count",
                            _positive(_as_int, "dipole_count"), default=1)
    threads = sol.take("threads", _positive(_as_int, "threads"), default=1)
    sol.reject_leftovers()

    bnd = section("boundary")
    boundary_kind = bnd.take("kind", _as_choice(_BOUNDARY_KINDS),
                             required=True)
    allowed = _BOUNDARY_EXTRAS[boundary_kind]
    for key in ("alpha", "j", "mu1", "mu2"):
        if key not in allowed:
            bnd.reject(key, f"only valid for boundary kind "
                            f"{_owner_of(key)}, not {boundary_kind}")
    alpha = bnd.take("alpha", _as_float, default=0.0)
    j = bnd.take("j", _as_float, default=1.0,
                 required=boundary_kind == "torus")
    if boundary_kind == "torus" and j < 1.0:
        raise ConfigError("[boundary] j must be >= 1", bnd.line("j"))
    mu1 = bnd.take("mu1", _as_complex, default=0j,
                   required=boundary_kind == "full_sphere")
    mu2 = bnd.take("mu2", _as_complex, default=0j,
                   required=boundary_kind == "full_sphere")
    bnd.reject_leftovers()

    ana = optional("analysis")
    ladder = ana.take("ladder", _as_ladder, default=LEVEL_LADDER)
    ring_tol = ana.take("ring_tol", _positive(_as_float, "ring_tol"),
                        default=0.05)
    t2 = ana.take("t2", _as_float, default=0.5)
    if not (-1.0 < t2 < 1.0):
        raise ConfigError("[analysis] t2 must lie in (-1, 1)", ana.line("t2"))
    ana.reject_leftovers()

    return RunConfig(
        text=text, schema=schema,
        domain_kind=domain_kind, radius=radius, height=height,
        n_r=n_r, n_z=n_z,
        lam=lam, penalty_eps=penalty_eps, tau=tau, max_iters=max_iters,
        grad_tol=grad_tol, seed=seed, init=init, dipole_count=dipole_count,
        threads=threads,
        boundary_kind=boundary_kind, alpha=alpha, j=j, mu1=mu1, mu2=mu2,
        ladder=ladder, ring_tol=ring_tol, t2=t2,
    )


def _owner_of(key: str) -> str:
    for kind, extras in _BOUNDARY_EXTRAS.items():
        if key in extras:
            return kind
    raise AssertionError(key)


def render_config(cfg: RunConfig) -> str:
    """Canonical config text whose parse equals ``cfg`` up to the text field.

    Used by sweeps to derive per-value configs whose echo honours the
    round-trip contract; floats are written with repr so values survive
    exactly.
    """
    out = [f"schema = {cfg.schema}", "", "[domain]", f"kind = {cfg.domain_kind}",
           f"radius = {cfg.radius!r}"]
    if cfg.height is not None:
        out.append(f"height = {cfg.height!r}")
    out += ["", "[grid]", f"n_r = {cfg.n_r}", f"n_z = {cfg.n_z}"]
    out += ["", "[solver]", f"lambda = {cfg.lam!r}"]
    if cfg.penalty_eps is not None:
        out.append(f"penalty_eps = {cfg.penalty_eps!r}")
    if cfg.tau is not None:
        out.append(f"tau = {cfg.tau!r}")
    out += [f"max_iters = {cfg.max_iters}", f"grad_tol = {cfg.grad_tol!r}",
            f"seed = {cfg.seed}", f"init = {cfg.init}",
            f"dipole_count = {cfg.dipole_count}", f"threads = {cfg.threads}"]
    out += ["", "[boundary]", f"kind = {cfg.boundary_kind}"]
    if cfg.boundary_kind == "tangent":
        out.append(f"alpha = {cfg.alpha!r}")
    elif cfg.boundary_kind == "torus":
        out.append(f"j = {cfg.j!r}")
    elif cfg.boundary_kind == "full_sphere":
        out.append(f"mu1 = {cfg.mu1!r}")
        out.append(f"mu2 = {cfg.mu2!r}")
    out += ["", "[analysis]",
            "ladder = " + ", ".join(repr(t) for t in cfg.ladder),
            f"ring_tol = {cfg.ring_tol!r}", f"t2 = {cfg.t2!r}"]
    text = "\n".join(out) + "\n"
    return text


def _with_text(cfg: RunConfig) -> RunConfig:
    """Attach the canonical rendering as the config's own source text."""
    rendered = dataclasses.replace(cfg, text="")
    return dataclasses.replace(rendered, text=render_config(rendered))


# --- builders ----------------------------------------------------------------

def build_grid(cfg: RunConfig) -> HalfSliceGrid:
    if cfg.domain_kind == "ball":
        domain = Ball(cfg.radius)
    else:
        domain = Cylinder(cfg.radius, cfg.height)
    return HalfSliceGrid(domain, cfg.n_r, cfg.n_z)


def build_trace(cfg: RunConfig, grid: HalfSliceGrid):
    kind = cfg.boundary_kind
    if kind == "constant":
        return constant_trace(grid)
    if kind == "tangent":
        return tangent_trace(grid, cfg.alpha)
    if kind == "radial":
        return director_trace(grid, angle_radial(), tag="radial")
    if kind == "torus":
        return director_trace(grid, angle_torus(cfg.j), tag="torus",
                              params={"j": cfg.j})
    if kind == "full_sphere":
        return full_sphere_trace(grid, cfg.mu1, cfg.mu2)
    raise AssertionError(kind)


def build_solver_config(cfg: RunConfig, threads: int | None = None,
                        seed: int | None = None) -> SolverConfig:
    return SolverConfig(
        lam=cfg.lam, penalty_eps=cfg.penalty_eps, tau=cfg.tau,
        max_iters=cfg.max_iters, grad_tol=cfg.grad_tol,
        seed=cfg.seed if seed is None else seed,
        init=cfg.init, dipole_count=cfg.dipole_count,
        threads=cfg.threads if threads is None else threads,
    )


def resolve_threads(flag: int | None) -> int | None:
    """--threads beats LDG_THREADS beats the config value (None = config)."""
    if flag is not None:
        if flag < 1:
            raise ConfigError("--threads must be >= 1")
        return flag
    env = os.environ.get("LDG_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"LDG_THREADS={env!r} is not an integer")
        if n < 1:
            raise ConfigError("LDG_THREADS must be >= 1")
        return n
    return None


# --- artifacts ---------------------------------------------------------------

def write_run_artifacts(out_dir: Path, run: SolverRun, config_text: str):
    """field.csv, run.json, energy_history.csv.

    Everything written is a pure function of config + seed: no wall times,
    no hostnames, repr floats throughout, so reruns at any thread count
    produce byte-identical files.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / _FIELD_CSV).write_text(field_to_csv(run.field))

    singular = detect_singularities(run) if run.converged else []
    record = {
        "schema": SCHEMA_VERSION,
        "converged": bool(run.converged),
        "iterations": int(run.iterations),
        "energy": float(run.energy_history[-1]),
        "energy_history": [float(e) for e in run.energy_history],
        "grad_history": [float(g) for g in run.grad_history],
        "singularities": [{"z": float(s.z), "sign": int(s.sign)}
                          for s in singular],
        "config_echo": config_text,
    }
    (out_dir / _RUN_JSON).write_text(json.dumps(record, indent=2) + "\n")

    rows = ["iter,energy,grad"]
    for i, e in enumerate(run.energy_history):
        grad = repr(float(run.grad_history[i])) \
            if i < len(run.grad_history) else ""
        rows.append(f"{i},{float(e)!r},{grad}")
    (out_dir / _HISTORY_CSV).write_text("\n".join(rows) + "\n")


def load_run(run_dir: Path) -> tuple[SolverRun, RunConfig]:
    """Rebuild a solver run from a run directory's artifacts."""
    run_path = run_dir / _RUN_JSON
    field_path = run_dir / _FIELD_CSV
    missing = [p.name for p in (run_path, field_path) if not p.is_file()]
    if missing:
        raise MissingArtifacts(
            f"{run_dir} lacks required artifact(s): {', '.join(missing)}")
    try:
        record = json.loads(run_path.read_text())
    except json.JSONDecodeError as exc:
        raise MissingArtifacts(f"{run_path} is not valid JSON: {exc}")
    for key in ("energy_history", "grad_history", "singularities",
                "config_echo"):
        if key not in record:
            raise MissingArtifacts(f"{run_path} is missing key {key!r}")

    cfg = parse_config(record["config_echo"])
    grid = build_grid(cfg)
    trace = build_trace(cfg, grid)
    field = field_from_csv(field_path.read_text(), grid)
    run = SolverRun(
        grid=grid,
        config=build_solver_config(cfg),
        trace=trace,
        field=field,
        energy_history=[float(e) for e in record["energy_history"]],
        grad_history=[float(g) for g in record["grad_history"]],
        converged=bool(record.get("converged", True)),
        iterations=int(record.get("iterations",
                                  len(record["energy_history"]) - 1)),
        wall_time=0.0,
        diagnostics={},
    )
    return run, cfg


def write_beta_csv(out_dir: Path, field: EquivariantField):
    """Nodewise biaxiality over the valued nodes, same order as field.csv."""
    beta = beta_field(field)
    grid = field.grid
    rows = ["r,z,beta"]
    for j in range(grid.n_z):
        for i in np.flatnonzero(grid.defined[j]):
            rows.append(f"{float(grid.r[i])!r},{float(grid.z[j])!r},"
                        f"{float(beta.values[j, i])!r}")
    (out_dir / _BETA_CSV).write_text("\n".join(rows) + "\n")


# --- verify ------------------------------------------------------------------

def _draw_specs(rng, family: str, count: int) -> list:
    """Moderate random catalog members, bounded away from degenerations."""
    out = []
    while len(out) < count:
        def mu():
            return (rng.uniform(0.5, 1.5)
                    * np.exp(1j * rng.uniform(0.0, 2 * pi)))
        if family == "degenerate1":
            out.append(SphereSpec.degenerate(1, mu()))
        elif family == "degenerate2":
            out.append(SphereSpec.degenerate(2, mu()))
        elif family == "full":
            out.append(SphereSpec.full(mu(), mu()))
        else:
            raise AssertionError(family)
    return out


def _split_dist(a, b) -> float:
    return abs(a.t - b.t) + abs(a.zeta1 - b.zeta1) + abs(a.zeta2 - b.zeta2)


def _energy_check(specs, quantum: float, n_quad: int) -> float:
    worst = 0.0
    for s in specs:
        worst = max(worst, abs(sphere_energy(s, n_quad=n_quad) / quantum - 1.0))
    return worst


def _tension_check(specs, thetas) -> float:
    worst = 0.0
    for s in specs:
        for theta in thetas:
            worst = max(worst, tension_residual(s, theta, 0.3))
    return worst


def _conformality_check(specs, thetas) -> float:
    worst = 0.0
    for s in specs:
        for theta in thetas:
            rep = conformality_gap(s, theta, 0.3)
            worst = max(worst, rep.conf_residual, rep.iso_residual)
    return worst


def _metric_check(specs, thetas) -> float:
    worst = 0.0
    for s in specs:
        for theta in thetas:
            rep = conformality_gap(s, theta, 0.3)
            worst = max(worst, rep.theta_gap, rep.cross_gap)
    return worst


def _twistor_identity_check(rng, n_params: int, n_points: int) -> float:
    worst = 0.0
    for _ in range(n_params):
        mu1 = rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0, 2 * pi))
        mu2 = rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0, 2 * pi))
        curve = TwistorCurve((1.0, mu1, mu2, -mu1 * mu2 / 3.0))
        if not curve.horizontal:
            return float("inf")
        spec = SphereSpec.full(mu1, mu2)
        for _ in range(n_points):
            p = S2Point.from_angles(rng.uniform(0.05, pi - 0.05),
                                    rng.uniform(0.0, 2 * pi))
            via = twistor_project(twistor_curve_eval(curve, p))
            worst = max(worst, _split_dist(via, eval_sphere(spec, p)))
    return worst


def _horizontality_check(rng, n_curves: int) -> float:
    worst = 0.0
    for _ in range(n_curves):
        mu1 = rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0, 2 * pi))
        mu2 = rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0, 2 * pi))
        curve = TwistorCurve((1.0, mu1, mu2, -mu1 * mu2 / 3.0))
        alg, contact = horizontality_residual(curve, n_samples=24)
        worst = max(worst, alg, contact)
    return worst


def _lift_check(rng, specs, n_points: int) -> float:
    worst = 0.0
    for s in specs:
        for _ in range(n_points):
            z = rng.uniform(0.2, 2.5) * np.exp(1j * rng.uniform(0, 2 * pi))
            lift = twistor_lift(s, z)
            if lift.sign != 1:
                return float("inf")
            back = twistor_project(lift.w)
            direct = eval_sphere(s, S2Point.from_complex(z))
            worst = max(worst, _split_dist(back, direct))
    return worst


def _second_variation_check(rng, grid: QuadratureGrid, n_fields: int) -> float:
    base = TangentMap()
    worst = -float("inf")
    for _ in range(n_fields):
        X = random_test_field(grid, rng)
        rep = second_variation(base, X)
        worst = max(worst, -rep.value / X.norm_sq())
    return worst


def _vacuum_energy_check() -> float:
    grid = HalfSliceGrid(Ball(1.0), 24, 48)
    field = sample_field(grid, lambda r, z: np.broadcast_to(
        E0_COORDS, r.shape + (5,)).copy())
    return abs(discrete_energy(field, lam=1.0))


def _cone_law_check() -> float:
    grid = HalfSliceGrid(Ball(1.0), 32, 64)

    def tangent(r, z):
        rho = np.hypot(r, z)
        ct, st = z / rho, r / rho
        return np.stack([ct, st, np.zeros_like(ct),
                         np.zeros_like(ct), np.zeros_like(ct)], axis=-1)

    beta = beta_field(sample_field(grid, tangent))
    where = {(j, i): k for k, (j, i) in enumerate(grid.boundary_index)}
    worst = 0.0
    for j, i in np.argwhere(grid.defined):
        if grid.boundary[j, i]:
            r, z = grid.boundary_points[where[(j, i)]]
        else:
            r, z = grid.r[i], grid.z[j]
        c = z / np.hypot(r, z)
        law = 1.5 * c - 0.5 * c ** 3
        worst = max(worst, abs(beta.values[j, i] - law))
    return worst


def _gradient_fd_check() -> float:
    grid = HalfSliceGrid(Ball(1.0), 16, 32)
    rng = np.random.default_rng(3)
    raw = rng.normal(size=(grid.n_z, grid.n_r, 5))
    raw /= np.linalg.norm(raw, axis=-1, keepdims=True)
    field = EquivariantField(grid, np.where(grid.defined[..., None], raw, 0.0))
    lam, eps, h = 0.7, 0.1, 1e-5
    grad = discrete_gradient(field, lam=lam, penalty_eps=eps)
    jj, ii = np.nonzero(grid.active)
    picks = [(jj[k], ii[k]) for k in
             rng.choice(len(jj), size=5, replace=False)]
    worst = 0.0
    for j, i in picks:
        for c in range(5):
            bumped = field.values.copy()
            bumped[j, i, c] += h
            plus = discrete_energy(EquivariantField(grid, bumped),
                                   lam=lam, penalty_eps=eps)
            bumped[j, i, c] -= 2 * h
            minus = discrete_energy(EquivariantField(grid, bumped),
                                    lam=lam, penalty_eps=eps)
            fd = (plus - minus) / (2 * h)
            scale = max(1.0, abs(fd))
            worst = max(worst, abs(grad[j, i, c] - fd) / scale)
    return worst


def run_verify_checks(level: str, seed: int = 0) -> list[dict]:
    """The analytic identity suite; every entry carries its own tolerance."""
    rng = np.random.default_rng(seed)
    full = level == "full"
    n_energy = 10 if full else 3
    n_quad = 128 if full else 64
    thetas = (0.6, 1.1, pi / 2, 2.0, 2.5) if full \
        else (0.7, pi / 2, 2.3)
    catalog = [
        SphereSpec.degenerate(1, 1.0),
        SphereSpec.degenerate(1, 1.3 - 0.4j, -1),
        SphereSpec.degenerate(2, 0.8 + 0.2j),
        SphereSpec.degenerate(2, 1.1, -1),
        SphereSpec.equatorial(1),
        SphereSpec.equatorial(2),
        VERONESE,
        SphereSpec.full(1.0, 1.0),
        SphereSpec.full(0.8 - 0.3j, 1.1),
        SphereSpec.full(0.6, 1.4 + 0.5j),
    ]
    survey = catalog if full else catalog[1::3]

    checks: list[tuple[str, "callable", float]] = [
        ("energy_degenerate_k1",
         lambda: _energy_check(_draw_specs(rng, "degenerate1", n_energy),
                               4 * pi, n_quad), 1e-4),
        ("energy_degenerate_k2",
         lambda: _energy_check(_draw_specs(rng, "degenerate2", n_energy),
                               8 * pi, n_quad), 1e-4),
        ("energy_full_veronese",
         lambda: _energy_check([VERONESE], 12 * pi, n_quad), 1e-4),
        ("energy_full_generic",
         lambda: _energy_check(_draw_specs(rng, "full", n_energy),
                               12 * pi, n_quad), 1e-4),
        ("density_veronese",
         lambda: max(abs(energy_density(VERONESE, th) - 6.0)
                     for th in thetas), 1e-6),
        ("tension_catalog", lambda: _tension_check(survey, thetas), 1e-5),
        ("conformality_catalog",
         lambda: _conformality_check(survey, thetas), 1e-6),
        ("metric_conformality",
         lambda: _metric_check(survey, thetas), 2e-5),
        ("twistor_identity",
         lambda: _twistor_identity_check(
             rng, 50 if full else 10, 50 if full else 10), 1e-12),
        ("twistor_horizontality",
         lambda: _horizontality_check(rng, 20 if full else 5), 1e-12),
        ("twistor_lift_roundtrip",
         lambda: _lift_check(rng, [VERONESE, SphereSpec.full(1.0, 1.0)],
                             20 if full else 5), 1e-4),
        # the omega2 weight identity is a real-profile statement, so only
        # real positive parameters qualify
        ("omega2_identity",
         lambda: max(omega2_identity_gap(s, n_quad=256)
                     for s in ([VERONESE, SphereSpec.full(0.8, 1.1),
                                SphereSpec.degenerate(1, 1.2)]
                               if full else [VERONESE])), 1e-5),
        ("second_variation_nonneg",
         lambda: _second_variation_check(
             rng,
             QuadratureGrid(256, 128) if full else QuadratureGrid(96, 64),
             20 if full else 6), 1e-6),
        ("hedgehog_instability",
         lambda: float(second_variation(
             Hedgehog(), hedgehog_destabilizer(128, 96)).value), 0.0),
        ("discrete_vacuum_energy", _vacuum_energy_check, 1e-12),
        ("discrete_cone_law", _cone_law_check, 1e-6),
        ("discrete_gradient_fd", _gradient_fd_check, 1e-6),
    ]

    # Negative-control hook: shifting every residual must flip the suite
    # to failing, proving the harness actually compares numbers.
    mutate = 0.01 if os.environ.get("LDG_VERIFY_MUTATE") else 0.0

    report = []
    for name, fn, tol in checks:
        residual = float(fn()) + mutate
        report.append({
            "name": name,
            "residual": residual,
            "tolerance": tol,
            "passed": bool(residual <= tol),
        })
    return report


def cmd_verify(level: str, out_dir: Path | None = None, seed: int = 0) -> int:
    checks = run_verify_checks(level, seed=seed)
    for c in checks:
        status = "ok  " if c["passed"] else "FAIL"
        print(f"{status} {c['name']:<28s} residual {c['residual']:.3e} "
              f"(tol {c['tolerance']:.1e})")
    passed = all(c["passed"] for c in checks)
    record = {
        "schema": SCHEMA_VERSION,
        "level": level,
        "mutated": bool(os.environ.get("LDG_VERIFY_MUTATE")),
        "checks": checks,
        "passed": passed,
    }
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "verify.json").write_text(
            json.dumps(record, indent=2) + "\n")
    print(f"{'all' if passed else 'NOT all'} {len(checks)} checks passed "
          f"({level})")
    return EXIT_OK if passed else EXIT_NUMERICAL


# --- minimize / analyze ------------------------------------------------------

def cmd_minimize(config_path: Path, out_dir: Path,
                 threads: int | None = None, seed: int | None = None) -> int:
    cfg = parse_config(config_path.read_text())
    grid = build_grid(cfg)
    trace = build_trace(cfg, grid)
    solver_cfg = build_solver_config(cfg, threads=threads, seed=seed)
    run = minimize(grid, trace, solver_cfg)
    write_run_artifacts(out_dir, run, cfg.text)
    state = "converged" if run.converged else "NOT converged"
    print(f"{state} after {run.iterations} iterations, "
          f"energy {run.energy_history[-1]:.10g}")
    return EXIT_OK if run.converged else EXIT_NUMERICAL


def cmd_analyze(run_dir: Path, out_dir: Path | None = None) -> int:
    run, cfg = load_run(run_dir)
    report = classify_solution(run, ladder=cfg.ladder,
                               ring_tol=cfg.ring_tol, t2=cfg.t2)
    record = {"schema": SCHEMA_VERSION, **report_to_dict(report)}
    target = out_dir if out_dir is not None else run_dir
    target.mkdir(parents=True, exist_ok=True)
    (target / _TOPOLOGY_JSON).write_text(json.dumps(record, indent=2) + "\n")
    write_beta_csv(target, run.field)
    ring = "ring" if report.ring is not None else "no ring"
    print(f"{report.verdict}: {len(report.singularities)} singularit"
          f"{'y' if len(report.singularities) == 1 else 'ies'}, {ring}")
    return EXIT_OK


# --- sweep -------------------------------------------------------------------

_SWEEP_PARAMS = ("lambda", "j", "mu2")


def _sweep_variant(cfg: RunConfig, param: str, value: float) -> RunConfig:
    if param == "lambda":
        if value < 0:
            raise ConfigError("sweep value for lambda must be >= 0")
        return _with_text(dataclasses.replace(cfg, lam=value))
    if param == "j":
        if cfg.boundary_kind != "torus":
            raise ConfigError(
                "sweep over j needs boundary kind = torus "
                f"(config has {cfg.boundary_kind})")
        if value < 1:
            raise ConfigError("sweep value for j must be >= 1")
        return _with_text(dataclasses.replace(cfg, j=value))
    if param == "mu2":
        if cfg.boundary_kind != "full_sphere":
            raise ConfigError(
                "sweep over mu2 needs boundary kind = full_sphere "
                f"(config has {cfg.boundary_kind})")
        return _with_text(dataclasses.replace(cfg, mu2=complex(value)))
    raise ConfigError(f"unknown sweep parameter {param!r} "
                      f"(one of {', '.join(_SWEEP_PARAMS)})")


def parse_values(raw: str) -> list[float]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError("--values must be a comma-separated list")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"--values: {exc}")


def cmd_sweep(config_path: Path, param: str, values: list[float],
              out_dir: Path, threads: int | None = None,
              seed: int | None = None) -> int:
    base = parse_config(config_path.read_text())
    if param not in _SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r} "
                          f"(one of {', '.join(_SWEEP_PARAMS)})")
    variants = [(v, _sweep_variant(base, param, v)) for v in values]

    out_dir.mkdir(parents=True, exist_ok=True)
    rows = ["value,energy,n_singularities,ring,verdict,status"]
    all_ok = True
    for value, cfg in variants:
        run_dir = out_dir / f"{param}_{value:g}"
        try:
            grid = build_grid(cfg)
            trace = build_trace(cfg, grid)
            run = minimize(grid, trace,
                           build_solver_config(cfg, threads=threads,
                                               seed=seed))
            write_run_artifacts(run_dir, run, cfg.text)
            report = classify_solution(run, ladder=cfg.ladder,
                                       ring_tol=cfg.ring_tol, t2=cfg.t2)
            record = {"schema": SCHEMA_VERSION, **report_to_dict(report)}
            (run_dir / _TOPOLOGY_JSON).write_text(
                json.dumps(record, indent=2) + "\n")
            write_beta_csv(run_dir, run.field)
            rows.append(",".join([
                f"{value:g}",
                repr(float(run.energy_history[-1])),
                str(len(report.singularities)),
                "true" if report.ring is not None else "false",
                report.verdict,
                "ok",
            ]))
            print(f"{param} = {value:g}: {report.verdict}, "
                  f"energy {run.energy_history[-1]:.8g}")
        except LdgError as exc:
            all_ok = False
            rows.append(f"{value:g},,,,," + type(exc).__name__)
            print(f"{param} = {value:g}: {type(exc).__name__}: {exc}",
                  file=sys.stderr)
    (out_dir / "sweep.csv").write_text("\n".join(rows) + "\n")
    return EXIT_OK if all_ok else EXIT_NUMERICAL


# --- entry point -------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ldglab",
        description="Norm-constrained Landau-de Gennes laboratory: "
                    "identity verification, energy minimization, "
                    "biaxiality topology, parameter sweeps.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the analytic identity suites")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--out", type=Path, default=None,
                   help="directory for verify.json (optional)")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("minimize", help="minimize a configured energy")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("analyze", help="biaxiality topology of a run dir")
    p.add_argument("--run", type=Path, required=True,
                   help="directory holding run.json and field.csv")
    p.add_argument("--out", type=Path, default=None,
                   help="output directory (defaults to the run dir)")

    p = sub.add_parser("sweep", help="minimize + analyze across a parameter")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--param", required=True,
                   help="one of " + ", ".join(_SWEEP_PARAMS))
    p.add_argument("--values", required=True,
                   help="comma-separated parameter values")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.level, out_dir=args.out, seed=args.seed)
        if args.command == "minimize":
            return cmd_minimize(args.config, args.out,
                                threads=resolve_threads(args.threads),
                                seed=args.seed)
        if args.command == "analyze":
            return cmd_analyze(args.run, out_dir=args.out)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.param,
                             parse_values(args.values), args.out,
                             threads=resolve_threads(args.threads),
                             seed=args.seed)
        raise AssertionError(args.command)
    except (ConfigError, InvalidSpec, BadBoundary, BadEndpoints) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingArtifacts as exc:
        print(f"missing artifacts: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LdgError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
