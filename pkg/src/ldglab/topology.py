"""Biaxiality analysis of half-slice fields: level sets, rings, verdicts.

The signed biaxiality beta = sqrt6 tr(Q^3)/|Q|^3 maps a unit field to a
scalar in [-1, 1] whose level sets organize the defect structure: +1 on
positive uniaxial states (the vacuum e0 and everything rotationally
equivalent), -1 on negative uniaxial states, 0 on maximally biaxial ones.
This module computes beta on the grid, extracts level sets by marching
squares on the node lattice, classifies each component by what its surface
of revolution is (torus, sphere, boundary strip, circle), finds the deep
negative ring a torus solution carries, runs the axisymmetric linking test,
and assembles the final verdict.

All operations are pure functions of immutable inputs with fixed iteration
order, so repeated calls (at any thread count upstream) produce identical
output.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyLevel,
    InvalidSpec,
    MissingRing,
    NormViolation,
    SingularValue,
    Unconverged,
)
from .solver import EquivariantField, HalfSliceGrid, SolverRun, detect_singularities
from .tensor_core import SQRT6, cubic_invariant

#: default level ladder for solution classification
LEVEL_LADDER = (-0.9, -0.5, 0.0, 0.5, 0.9)

#: fraction of the global |grad beta| max below which a crossed cell flags
#: the level value as critical
_REGULAR_FRACTION = 1e-3

#: nudge applied (both signs tried) when a ladder value is rejected
_NUDGE = 0.01


# --- the beta field ----------------------------------------------------------

@dataclass(frozen=True)
class BetaField:
    """Signed biaxiality on the grid; NaN at undefined nodes.

    ``bar_beta`` is the minimum over boundary nodes — the quantity the
    boundary-data hypothesis compares against -1.
    """

    grid: HalfSliceGrid
    values: np.ndarray
    bar_beta: float


def beta_field(field: EquivariantField) -> BetaField:
    """Nodewise signed biaxiality of a unit-norm field.

    Raises NormViolation if the field strays from the unit sphere by more
    than 1e-8 on valued nodes; the residual norm is divided out, so the
    result satisfies |beta| <= 1 + 1e-12 exactly.
    """
    viol = field.norm_violation()
    if viol > 1e-8:
        raise NormViolation(
            f"biaxiality needs a unit-norm field, worst violation {viol:.3e}")
    grid = field.grid
    vals = field.values
    t = vals[..., 0]
    z1 = vals[..., 1] + 1j * vals[..., 2]
    z2 = vals[..., 3] + 1j * vals[..., 4]
    norm = np.sqrt(np.einsum("jkc,jkc->jk", vals, vals))
    with np.errstate(invalid="ignore", divide="ignore"):
        beta = SQRT6 * cubic_invariant(t, z1, z2) / norm ** 3
    beta = np.where(grid.defined, beta, np.nan)
    bi = grid.boundary_index
    bar = float(np.min(beta[bi[:, 0], bi[:, 1]]))
    return BetaField(grid=grid, values=beta, bar_beta=bar)


def _grad_magnitude(beta: BetaField) -> np.ndarray:
    """|grad beta| by central differences, one-sided at the frontier of the
    defined region, zero where no defined neighbor exists."""
    grid = beta.grid
    b = np.where(grid.defined, beta.values, 0.0)
    ok = grid.defined
    out = np.zeros_like(b)
    for axis, h in ((0, grid.dz), (1, grid.dr)):
        fwd_ok = np.zeros_like(ok)
        bwd_ok = np.zeros_like(ok)
        fwd = np.zeros_like(b)
        bwd = np.zeros_like(b)
        sl_from = [slice(None)] * 2
        sl_to = [slice(None)] * 2
        sl_from[axis] = slice(1, None)
        sl_to[axis] = slice(None, -1)
        fwd_ok[tuple(sl_to)] = ok[tuple(sl_from)]
        fwd[tuple(sl_to)] = b[tuple(sl_from)]
        bwd_ok[tuple(sl_from)] = ok[tuple(sl_to)]
        bwd[tuple(sl_from)] = b[tuple(sl_to)]
        both = ok & fwd_ok & bwd_ok
        fonly = ok & fwd_ok & ~bwd_ok
        bonly = ok & ~fwd_ok & bwd_ok
        d = np.zeros_like(b)
        d[both] = (fwd[both] - bwd[both]) / (2.0 * h)
        d[fonly] = (fwd[fonly] - b[fonly]) / h
        d[bonly] = (b[bonly] - bwd[bonly]) / h
        out += d ** 2
    return np.sqrt(out)


# --- marching squares --------------------------------------------------------

# segment table: corner bits are A=(j,i), B=(j,i+1), C=(j+1,i+1), D=(j+1,i);
# edges are "b"ottom, "r"ight, "t"op, "l"eft; masks 5 and 10 are the saddles
_SEGMENTS = {
    1: (("b", "l"),),
    2: (("b", "r"),),
    3: (("l", "r"),),
    4: (("t", "r"),),
    6: (("b", "t"),),
    7: (("l", "t"),),
    8: (("l", "t"),),
    9: (("b", "t"),),
    11: (("t", "r"),),
    12: (("l", "r"),),
    13: (("b", "r"),),
    14: (("b", "l"),),
}


def _edge_id(side: str, j: int, i: int):
    if side == "b":
        return ("h", j, i)
    if side == "t":
        return ("h", j + 1, i)
    if side == "l":
        return ("v", j, i)
    return ("v", j, i + 1)


def _edge_point(edge, b, t, grid):
    """Linear crossing location on a lattice edge."""
    kind, j, i = edge
    if kind == "h":
        va, vb = b[j, i], b[j, i + 1]
        s = (t - va) / (vb - va)
        return (grid.r[i] + s * grid.dr, grid.z[j])
    va, vb = b[j, i], b[j + 1, i]
    s = (t - va) / (vb - va)
    return (grid.r[i], grid.z[j] + s * grid.dz)


@dataclass(frozen=True)
class LevelComponent:
    """One connected component of a discrete beta level set.

    ``points`` runs along the polyline in the half-slice; for ``closed``
    components the first point is not repeated.  ``kind`` says how the curve
    meets the frontier (closed | axis_to_axis | boundary_arc |
    boundary_point) and ``revolved`` what the S^1-revolution of the curve is
    (Torus | TopologicalSphere | Strip | Circle | Indeterminate — the last
    when an axis endpoint matches no detected singularity).  For
    axis_to_axis components ``axis_ids`` are indices into the singularity
    list handed to the extractor (None where unmatched) and ``axis_z`` the
    endpoint colatitudes extrapolated to r = 0.
    """

    level: float
    points: np.ndarray
    closed: bool
    kind: str
    revolved: str
    axis_ids: tuple = ()
    axis_z: tuple = ()


def _chain(segments):
    """Join cell segments into maximal paths/cycles of lattice-edge ids."""
    adj = defaultdict(list)
    for sid, (e1, e2) in enumerate(segments):
        adj[e1].append((sid, e2))
        adj[e2].append((sid, e1))
    used = [False] * len(segments)

    def walk(start_edge):
        chain = [start_edge]
        cur = start_edge
        while True:
            nxt = None
            for sid, other in adj[cur]:
                if not used[sid]:
                    used[sid] = True
                    nxt = other
                    break
            if nxt is None:
                return chain, False
            if nxt == chain[0]:
                return chain, True
            chain.append(nxt)
            cur = nxt

    out = []
    for start in sorted(e for e, lst in adj.items() if len(lst) == 1):
        if not all(used[sid] for sid, _ in adj[start]):
            out.append(walk(start))
    for sid, (e1, _) in enumerate(segments):
        if not used[sid]:
            out.append(walk(e1))
    return out


def _axis_extrapolate(points, end_index):
    """z at r = 0 continued linearly from the path's terminal segment."""
    p = points[end_index]
    q = points[end_index + 1] if end_index == 0 else points[end_index - 1]
    if abs(q[0] - p[0]) < 1e-300:
        return p[1]
    return p[1] + (q[1] - p[1]) * (0.0 - p[0]) / (q[0] - p[0])


def extract_level_set(beta: BetaField, t: float,
                      singularities=()) -> list:
    """Marching-squares components of {beta = t} on the half-slice.

    Cells are lattice squares with all four corners valued; corners count as
    above the level when beta > t, saddles are resolved by comparing the
    cell mean to t.  A path end on the leftmost column continues toward the
    axis and is matched to the nearest singularity within 2 max(dr, dz); any
    other end sits on the domain boundary.  Raises SingularValue when a
    crossed cell's largest corner |grad beta| falls below 1e-3 of the global
    maximum (the level is then treated as critical and should be nudged),
    and EmptyLevel when no cell is crossed.
    """
    if not (-1.0 < t < 1.0):
        raise InvalidSpec(f"level must lie strictly inside (-1, 1), got {t}")
    grid = beta.grid
    b = beta.values
    ok = grid.defined
    valid = ok[:-1, :-1] & ok[:-1, 1:] & ok[1:, 1:] & ok[1:, :-1]
    with np.errstate(invalid="ignore"):
        above = np.where(ok, b > t, False)
    mask = (above[:-1, :-1].astype(int) + 2 * above[:-1, 1:]
            + 4 * above[1:, 1:] + 8 * above[1:, :-1])
    crossed = valid & (mask != 0) & (mask != 15)
    cells = np.argwhere(crossed)
    if len(cells) == 0:
        raise EmptyLevel(f"level {t} misses every grid cell")

    gmag = _grad_magnitude(beta)
    gmax = float(np.max(gmag[ok]))
    floor = _REGULAR_FRACTION * gmax
    for j, i in cells:
        corners = gmag[j:j + 2, i:i + 2]
        if float(np.max(corners)) < floor:
            raise SingularValue(
                f"level {t} crosses a near-critical cell at "
                f"(r, z) = ({grid.r[i]:.4f}, {grid.z[j]:.4f})")

    segments = []
    for j, i in cells:
        m = int(mask[j, i])
        if m in (5, 10):
            mean = 0.25 * (b[j, i] + b[j, i + 1] + b[j + 1, i] + b[j + 1, i + 1])
            lo_pair = (("b", "l"), ("t", "r")) if m == 5 else (("b", "r"), ("l", "t"))
            hi_pair = (("b", "r"), ("l", "t")) if m == 5 else (("b", "l"), ("t", "r"))
            pairs = hi_pair if mean > t else lo_pair
        else:
            pairs = _SEGMENTS[m]
        for ea, eb in pairs:
            segments.append((_edge_id(ea, j, i), _edge_id(eb, j, i)))

    match_radius = 2.0 * max(grid.dr, grid.dz)
    sing_z = np.array([s.z for s in singularities], dtype=float)
    components = []
    for chain, closed in _chain(segments):
        pts = np.array([_edge_point(e, b, t, grid) for e in chain])
        if closed:
            components.append(LevelComponent(
                level=t, points=pts, closed=True, kind="closed",
                revolved="Torus"))
            continue
        ends_axis = [e[0] == "v" and e[2] == 0 for e in (chain[0], chain[-1])]
        if all(ends_axis):
            zs = (_axis_extrapolate(pts, 0), _axis_extrapolate(pts, len(pts) - 1))
            ids = []
            for z_end in zs:
                if len(sing_z):
                    k = int(np.argmin(np.abs(sing_z - z_end)))
                    ids.append(k if abs(sing_z[k] - z_end) <= match_radius
                               else None)
                else:
                    ids.append(None)
            matched = (None not in ids) and ids[0] != ids[1]
            components.append(LevelComponent(
                level=t, points=pts, closed=False, kind="axis_to_axis",
                revolved="TopologicalSphere" if matched else "Indeterminate",
                axis_ids=tuple(ids), axis_z=tuple(float(z) for z in zs)))
        else:
            components.append(LevelComponent(
                level=t, points=pts, closed=False, kind="boundary_arc",
                revolved="Strip"))
    components.sort(key=lambda c: (float(np.min(c.points[:, 1])),
                                   float(np.min(c.points[:, 0]))))
    return components


# --- ring and linking --------------------------------------------------------

def detect_ring(beta: BetaField, ring_tol: float = 0.05):
    """Deepest interior beta value, reported as a ring candidate.

    Returns ((r, z), value) when the interior minimum dips within ring_tol
    of -1 *and* sits at least 2 dr off the axis (an on-axis minimum is a
    point defect candidate, not a ring), else None.
    """
    grid = beta.grid
    b = np.where(grid.active, beta.values, np.inf)
    j, i = np.unravel_index(int(np.argmin(b)), b.shape)
    value = float(b[j, i])
    if value > -1.0 + ring_tol:
        return None
    if grid.r[i] < 2.0 * grid.dr:
        return None
    return ((float(grid.r[i]), float(grid.z[j])), value)


def linking_check(beta: BetaField, ring, t2: float = 0.5) -> bool:
    """Axisymmetric linking of the ring with boundary-plus-axis.

    For S^1-invariant sets linking reduces to planar containment: the
    revolved ring and the revolved frontier curve are linked exactly when
    the ring point is interior to the half-slice while beta stays above t2
    on the whole frontier — every boundary node and the axis trace
    (extrapolated from the first two columns).  Raises MissingRing when no
    ring was detected.
    """
    if ring is None:
        raise MissingRing("linking test needs a detected ring")
    grid = beta.grid
    (r, _z), _value = ring
    if r < 2.0 * grid.dr:
        return False
    bi = grid.boundary_index
    if float(np.min(beta.values[bi[:, 0], bi[:, 1]])) <= t2:
        return False
    rows = grid.defined[:, 0] & grid.defined[:, 1]
    axis = 1.5 * beta.values[rows, 0] - 0.5 * beta.values[rows, 1]
    return bool(np.min(axis) > t2)


# --- the verdict -------------------------------------------------------------

@dataclass(frozen=True)
class TopologyReport:
    """Everything the torus/split dichotomy needs, in one record."""

    singularities: tuple
    levels: dict
    nudges: dict
    ring: object
    linking: bool
    hp1: bool
    hp1_value: float
    hp3: bool
    hp3_degree: object
    verdict: str


def _extract_with_nudge(beta, t, singularities):
    """Ladder extraction: empty levels are fine, critical ones get nudged."""
    try:
        return t, extract_level_set(beta, t, singularities)
    except EmptyLevel:
        return t, []
    except SingularValue:
        pass
    for t_used in (t + _NUDGE, t - _NUDGE):
        try:
            return t_used, extract_level_set(beta, t_used, singularities)
        except EmptyLevel:
            return t_used, []
        except SingularValue:
            continue
    raise SingularValue(
        f"level {t} and both nudges {t - _NUDGE}, {t + _NUDGE} are critical")


def classify_solution(run: SolverRun, ladder=LEVEL_LADDER,
                      ring_tol: float = 0.05, t2: float = 0.5) -> TopologyReport:
    """Assemble the topology report and verdict for a converged run.

    The boundary hypotheses come from the run's trace provenance: hp1 from
    the generator's analytic profile flag (the discrete boundary minimum is
    also recorded), hp3 from the generator's lift degree when one exists.
    A run without trace provenance gets both flags False and can only reach
    the Indeterminate verdict.

    Verdict rules: TorusSolution needs hp1, an odd lift degree, an empty
    singularity list, a detected ring, and no ambiguous component at the
    central level; SplitMinimizer needs hp1 and a positive even singularity
    count (signs alternate along the axis by construction); anything else is
    Indeterminate.
    """
    if not run.converged:
        raise Unconverged("refusing to classify an unconverged run")
    sings = tuple(detect_singularities(run))
    beta = beta_field(run.field)

    trace = run.trace
    hp1 = bool(getattr(trace, "hp1", False))
    degree = getattr(trace, "degree", None)
    hp3 = degree is not None and degree % 2 == 1

    levels = {}
    nudges = {}
    for t in ladder:
        t_used, comps = _extract_with_nudge(beta, t, sings)
        levels[t] = comps
        if t_used != t:
            nudges[t] = t_used

    ring = detect_ring(beta, ring_tol)
    linking = False if ring is None else linking_check(beta, ring, t2)

    central = levels.get(0.0, [])
    ambiguous = any(c.revolved == "Indeterminate" for c in central)

    if hp1 and hp3 and not sings and ring is not None and not ambiguous:
        verdict = "TorusSolution"
    elif hp1 and sings and len(sings) % 2 == 0 and not ambiguous:
        verdict = "SplitMinimizer"
    else:
        verdict = "Indeterminate"

    return TopologyReport(
        singularities=sings,
        levels=levels,
        nudges=nudges,
        ring=ring,
        linking=linking,
        hp1=hp1,
        hp1_value=beta.bar_beta,
        hp3=hp3,
        hp3_degree=degree,
        verdict=verdict,
    )


def report_to_dict(report: TopologyReport) -> dict:
    """JSON-ready view of a report, polylines included (repr-exact floats)."""
    levels = {}
    for t, comps in report.levels.items():
        levels[repr(float(t))] = [
            {
                "kind": c.kind,
                "revolved": c.revolved,
                "closed": c.closed,
                "points": [[float(r), float(z)] for r, z in c.points],
                "axis_ids": list(c.axis_ids),
                "axis_z": list(c.axis_z),
            }
            for c in comps
        ]
    return {
        "verdict": report.verdict,
        "singularities": [{"z": float(s.z), "sign": int(s.sign)}
                          for s in report.singularities],
        "ring": None if report.ring is None else {
            "r": report.ring[0][0], "z": report.ring[0][1],
            "beta": report.ring[1]},
        "linking": bool(report.linking),
        "hp1": bool(report.hp1),
        "hp1_value": float(report.hp1_value),
        "hp3": bool(report.hp3),
        "hp3_degree": report.hp3_degree,
        "nudges": {repr(float(k)): float(v) for k, v in report.nudges.items()},
        "levels": levels,
    }
