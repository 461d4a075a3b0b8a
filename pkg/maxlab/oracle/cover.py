"""
Parallelepiped covers of the truncated-ball slices B_h /\\ C_h.

For every height on a ladder a finite family of boxes (FrameBox, i.e.
parallelepipeds with fixed unit edge directions) is built following the
boundary case of a':

- vertex: one box with the cross-section's edges at a'_h, the smallest one
  anchored at a'_h; in three dimensions it is frozen and joined with the
  box around the whole ball above h = r/3;
- side, d = 3: the half-plane at a'_h is cut into three wedges of angle
  pi/3 and each piece gets its own box;
- side and edge, d = 4: congruent regular tetrahedra with apex a'_h, axes
  on a latitude-longitude grid around the pole of the tangent cone at a'.

The certificate samples B_h /\\ C_h and requires every point to be in some
box of the family, checks that the family increases with h, and compares
side lengths with their bounds.
"""
import logging
import math
from typing import List, Optional

import numpy as np

from maxlab.config import get_settings
from maxlab.errors import CapabilityError, DomainError
from maxlab.geometry import ConeFrame, ConvexPolytope, FrameBox, minimal_frame_box, sample_ball_polytope
from .configs import BallConeConfig, ConeCase, random_ball_config
from .report import OracleReport, envelope_range, record_points, run_instances
from .roots import v_roots, exit_length

logger = logging.getLogger(__name__)

WEDGES = ((0.0, math.pi / 3), (math.pi / 3, 2 * math.pi / 3), (2 * math.pi / 3, math.pi))
LATITUDES = (10.0, 30.0, 50.0, 70.0)
AZIMUTH_STEP = 20.0
SMALL_H_FRACTIONS = (0.2, 0.4, 0.6, 0.8)


def _unit(v):
    return v / np.linalg.norm(v)


def _complement(u: np.ndarray):
    """Two unit vectors completing u to an orthonormal basis of R^3."""
    seed = np.eye(3)[int(np.argmin(np.abs(u)))]
    p = _unit(seed - (seed @ u) * u)
    return p, np.cross(u, p)


def default_height(cfg: BallConeConfig) -> float:
    return 0.9 * (cfg.r + cfg.delta) if cfg.d == 3 else cfg.r / 2


def _check_height(cfg: BallConeConfig, h: float):
    if cfg.d == 3 and not 0 < h < cfg.r + cfg.delta:
        raise DomainError(f"h = {h} is outside (0, r + m1 - a1) = (0, {cfg.r + cfg.delta:.6g})")
    if cfg.d == 4 and not 0 < h <= cfg.r / 2:
        raise DomainError(f"h = {h} is outside (0, r/2] = (0, {cfg.r / 2:.6g}]")


def height_ladder(cfg: BallConeConfig, h: float, steps: int, c0: float) -> np.ndarray:
    ladder = np.linspace(h / steps, h, steps)
    if cfg.d == 4 and cfg.case is ConeCase.VERTEX:
        small = c0 * cfg.R * np.array(SMALL_H_FRACTIONS)
        ladder = np.concatenate([ladder, small[small < h]])
    return np.unique(ladder)


def _ball_box(directions: np.ndarray, center: np.ndarray, radius: float) -> FrameBox:
    """Smallest box with the given edge directions around a full Euclidean ball."""
    functionals = np.linalg.inv(directions.T)
    mid = functionals @ center
    reach = radius * np.linalg.norm(functionals, axis=1)
    return FrameBox(directions, mid - reach, mid + reach)


class _CoverState:
    """Running results shared by the three constructions."""

    def __init__(self):
        self.violations = 0
        self.points: List[np.ndarray] = []
        self.ratios: List[float] = []
        self.residual = 0.0
        self.monotone_failures = 0
        self.details = {}
        self.envelopes = {}

    def fail(self, point=None, count: int = 1):
        self.violations += count
        if point is not None:
            self.points.append(np.asarray(point, dtype=float))


def _vertex_family(cfg: BallConeConfig, ladder, c0: float, state: _CoverState, samples_at):
    directions = cfg.cone_edges
    split = cfg.r / 3 if cfg.d == 3 else cfg.r / 2
    frozen: Optional[FrameBox] = None
    families = []
    star_checks = 0
    for h in ladder:
        R_h = cfg.slice_radius(h)
        if h <= split:
            box = minimal_frame_box(directions, cfg.center_slice, R_h, cfg.section(h), anchor=cfg.apex(h))
            bounds = [min(cfg.level(h), exit_length(cfg.center_slice, R_h, cfg.vertex, e)) for e in directions]
            state.ratios.extend(box.sides / np.array(bounds))
            state.envelopes[h] = (cfg.apex(h), np.array(bounds))
        else:
            if frozen is None:
                frozen = minimal_frame_box(directions, cfg.center_slice, cfg.slice_radius(split), cfg.section(split), anchor=cfg.apex(split))
            box = frozen.hull(_ball_box(directions, cfg.center_slice, cfg.r))
            state.ratios.extend(box.sides / cfg.r)
        families.append([box])

        if cfg.d == 4 and h < c0 * cfg.R:
            star_checks += 1
            _star_check(cfg, h, box, c0, state, samples_at(h))
    state.details["star_checks"] = star_checks
    return families


def _envelope_check(directions: np.ndarray, anchor: np.ndarray, bounds: np.ndarray, points: np.ndarray, state: _CoverState) -> float:
    """
    Sampled points against the frame anchored at a'_h, independently of the fitted box.

    Every point must have nonnegative edge coordinates (C_h lies in the cone
    its edges span at the vertex); returns the largest coordinate over its
    side bound, the scale the envelope box needs to hold the sample.
    """
    if not len(points):
        return 0.0
    coords = (points - anchor) @ np.linalg.inv(directions.T).T
    slack = 1e-9 * max(1.0, float(np.max(np.abs(coords))))
    for p in points[np.min(coords, axis=1) < -slack]:
        state.fail(p)
    return float(np.max(coords / bounds))


def _star_check(cfg: BallConeConfig, h: float, box: FrameBox, c0: float, state: _CoverState, points: np.ndarray):
    """
    P_h against the two outer boxes at a'_h: sides |v_i| and sides equal to the edge of C_h.
    """
    roots, violations, bad = v_roots(cfg, h, c0)
    state.fail(count=violations)
    state.points.extend(bad)
    state.residual = max(state.residual, max(s.residual for s in roots))
    v_sides = np.array([s.closed_form for s in roots if s.kind == "v_i"])
    edge_sides = np.full(len(v_sides), ConeFrame(cfg.d).section_side(cfg.level(h)))
    lo = np.linalg.inv(box.directions.T) @ cfg.apex(h)
    inner = FrameBox(box.directions, lo, lo + v_sides)
    star = FrameBox(box.directions, lo, lo + np.minimum(v_sides, edge_sides))
    slack = 1e-9 * max(1.0, float(np.max(np.abs(star.hi))))
    excess = int(np.sum(box.hi > star.hi + slack))
    if excess:
        state.fail(count=excess)
    if len(points):
        outside = points[~inner.contains(points)]
        for p in outside:
            state.fail(p)
        if float(np.max(cfg.tau(points))) > cfg.slice_radius(h) * (1 + 1e-12):
            state.fail()


def _wedge_family(cfg: BallConeConfig, ladder, state: _CoverState):
    nu = cfg.inward_normals[0]
    s = np.array([nu[1], -nu[0]])

    def f(theta):
        return math.cos(theta) * s + math.sin(theta) * nu

    running: List[Optional[FrameBox]] = [None] * len(WEDGES)
    families = []
    for h in ladder:
        apex = cfg.apex(h)
        A, b = cfg.section_halfspaces(h)
        R_h = cfg.slice_radius(h)
        for j, (t1, t2) in enumerate(WEDGES):
            g1, g2 = f(t1 + math.pi / 2), f(t2 - math.pi / 2)
            piece = ConvexPolytope.from_halfspaces(
                np.vstack([A, -g1, -g2]), np.concatenate([b, [-(g1 @ apex), -(g2 @ apex)]])
            )
            if piece is None:
                continue
            box = minimal_frame_box(np.array([f(t1), f(t2)]), cfg.center_slice, R_h, piece, anchor=apex)
            if box is not None:
                running[j] = box if running[j] is None else running[j].hull(box)
        families.append(list(running))
    state.details["pieces"] = len(WEDGES)
    return families


def tetra_axes(pole: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """
    Axes of the covering tetrahedra: a latitude-longitude grid around pole
    (covering radius about 15 degrees), kept when the axis makes an angle
    with the tangent cone smaller than the tetrahedron's inscribed cone.
    """
    p, q = _complement(pole)
    axes = [pole, -pole]
    for lat in LATITUDES:
        for sign in (1.0, -1.0):
            phi = math.radians(sign * lat)
            count = int(math.ceil(360.0 * math.cos(phi) / AZIMUTH_STEP))
            for k in range(count):
                lam = 2 * math.pi * k / count
                axes.append(math.sin(phi) * pole + math.cos(phi) * (math.cos(lam) * p + math.sin(lam) * q))
    axes = np.array(axes)
    keep = np.min(axes @ normals.T, axis=1) > -1.0 / 3.0
    return axes[keep]


def tetra_edges(axis: np.ndarray) -> np.ndarray:
    """Unit edges at the apex of a regular tetrahedron whose apex-to-centroid axis is the given one."""
    p, q = _complement(axis)
    return np.array([
        math.sqrt(2.0 / 3.0) * axis + (math.cos(phi) * p + math.sin(phi) * q) / math.sqrt(3.0)
        for phi in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)
    ])


def _tetra_family(cfg: BallConeConfig, ladder, state: _CoverState):
    normals = cfg.inward_normals
    pole = _unit(normals.sum(axis=0))
    edge_sets = [tetra_edges(u) for u in tetra_axes(pole, normals)]

    max_angles = []
    for edges in edge_sets:
        sines = edges @ cfg.n
        if np.all(sines >= -1e-12):
            max_angles.append(math.asin(min(1.0, float(sines.max()))))
    if max_angles and min(max_angles) < math.pi / 4 - 1e-9:
        state.fail()
    state.details["pieces"] = len(edge_sets)
    state.details["min_max_edge_angle"] = min(max_angles) if max_angles else None

    running: List[Optional[FrameBox]] = [None] * len(edge_sets)
    families = []
    for h in ladder:
        apex = cfg.apex(h)
        A, b = cfg.section_halfspaces(h)
        R_h = cfg.slice_radius(h)
        length = 2 * ConeFrame(cfg.d).section_side(cfg.level(h))
        for j, edges in enumerate(edge_sets):
            G = np.linalg.inv(edges.T)
            total = G.sum(axis=0)
            piece = ConvexPolytope.from_halfspaces(
                np.vstack([A, -G, total]), np.concatenate([b, -(G @ apex), [length + total @ apex]])
            )
            if piece is None:
                continue
            box = minimal_frame_box(edges, cfg.center_slice, R_h, piece, anchor=apex)
            if box is not None:
                running[j] = box if running[j] is None else running[j].hull(box)
        families.append(list(running))
    return families


def cover_check(cfg: BallConeConfig, h: float = None, seed: int = None, samples: int = None, steps: int = 20, c0: float = None) -> OracleReport:
    """
    Build the cover family on a ladder of heights up to h and certify it.

    Args:
        cfg: configuration in d = 3 or 4, any boundary case of a'
        h: top of the ladder (defaults: 0.9 (r + m1 - a1) in d = 3, r/2 in d = 4)
        seed: seed for the containment samples
        samples: containment samples spread over the ladder
        steps: ladder length
        c0: small-h constant for the d = 4 vertex checks

    Returns:
        OracleReport; violations count uncovered points, failed nestings and
        failed side or angle bounds
    """
    settings = get_settings()
    if cfg.d == 2:
        raise CapabilityError("The parallelepiped covers are built in dimensions 3 and 4")
    h = default_height(cfg) if h is None else h
    _check_height(cfg, h)
    seed = settings.seed if seed is None else seed
    samples = settings.oracle.containment_samples if samples is None else samples
    c0 = settings.oracle.c0 if c0 is None else c0
    case = cfg.case
    rng = np.random.default_rng(seed)
    ladder = height_ladder(cfg, h, steps, c0)
    per_step = max(1, samples // len(ladder))

    cache = {}

    def samples_at(hk):
        if hk not in cache:
            cache[hk] = sample_ball_polytope(cfg.center_slice, cfg.slice_radius(hk), cfg.section(hk), per_step, rng)
        return cache[hk]

    state = _CoverState()
    if case is ConeCase.VERTEX:
        families = _vertex_family(cfg, ladder, c0, state, samples_at)
    elif cfg.d == 3:
        families = _wedge_family(cfg, ladder, state)
    else:
        families = _tetra_family(cfg, ladder, state)

    drawn = 0
    envelope_scale = None
    for hk, boxes in zip(ladder, families):
        points = samples_at(hk)
        drawn += len(points)
        if hk in state.envelopes:
            scale = _envelope_check(cfg.cone_edges, *state.envelopes[hk], points, state)
            envelope_scale = scale if envelope_scale is None else max(envelope_scale, scale)
        boxes = [b for b in boxes if b is not None]
        covered = np.zeros(len(points), dtype=bool)
        for box in boxes:
            covered |= box.contains(points)
        for p in points[~covered]:
            state.fail(np.concatenate([[cfg.level(hk)], p]))

    for prev, curr in zip(families, families[1:]):
        for a, b in zip(prev, curr):
            if a is not None and (b is None or not b.contains_box(a)):
                state.monotone_failures += 1
    state.fail(count=state.monotone_failures)

    lo, hi = envelope_range(state.ratios)
    logger.info("cover d=%d %s: %d violations over %d points", cfg.d, case.value, state.violations, drawn)
    return OracleReport(
        lemma=f"cover-d{cfg.d}",
        config={**cfg.to_dict(), "h": h, "steps": steps, "seed": seed},
        samples=drawn,
        violations=state.violations,
        residual_max=state.residual,
        envelope_min=lo,
        envelope_max=hi,
        details={"case": case.value, "ladder": len(ladder), "monotone_failures": state.monotone_failures, "envelope_scale": envelope_scale, **state.details},
        violating_points=record_points(state.points),
    )


def cover_sweep(d: int, case=None, instances: int = None, seed: int = None, samples: int = None, steps: int = 20, threads: int = 1) -> List[OracleReport]:
    """cover_check over random configurations; without a case the instances are shared out over the cases of d."""
    settings = get_settings()
    instances = settings.oracle.instances if instances is None else instances
    seed = settings.seed if seed is None else seed
    cases = [ConeCase.parse(case)] if case is not None else [c for c in ConeCase if not (d == 3 and c is ConeCase.EDGE)]
    reports = []
    for k, pick in enumerate(cases):
        count = instances // len(cases) + (1 if k < instances % len(cases) else 0)
        case_seed = int(np.random.SeedSequence([seed, k]).generate_state(1)[0])

        def check(rng, pick=pick):
            cfg = random_ball_config(d, pick, rng)
            return cover_check(cfg, seed=int(rng.integers(2 ** 31)), samples=samples, steps=steps)

        reports.extend(run_instances(check, count, case_seed, threads))
    return reports


def cross_section_checks(level: float = 1.7) -> OracleReport:
    """
    Side lengths of the cone's cross-sections and the angle identities of the regular tetrahedron.
    """
    values = {}
    tri = ConeFrame(3).section_vertices(level)[:, 1:]
    values["triangle_side"] = (_pairwise(tri), math.sqrt(6) * level)
    tet = ConeFrame(4).section_vertices(level)[:, 1:]
    edge = math.sqrt(8) * level
    values["tetrahedron_side"] = (_pairwise(tet), edge)

    v0, others = tet[0], tet[1:]
    edges = np.array([_unit(v - v0) for v in others])
    axis = _unit(tet.mean(axis=0) - v0)
    values["sin_gamma"] = (math.sqrt(1 - float(edges[0] @ axis) ** 2), 1 / math.sqrt(3))
    n1 = _unit(np.cross(others[1] - v0, others[2] - v0))
    n2 = _unit(np.cross(others[0] - v0, others[2] - v0))
    values["dihedral"] = (math.acos(abs(float(n1 @ n2))), 2 * math.asin(1 / math.sqrt(3)))
    values["sin_kappa"] = (abs(float(edges[0] @ n1)), math.sqrt(2.0 / 3.0))
    height = abs(float((v0 - others[0]) @ _unit(np.cross(others[1] - others[0], others[2] - others[0]))))
    values["height_over_edge"] = (height / edge, math.sqrt(2.0 / 3.0))

    residuals = {
        key: max(abs(m - expected) for m in np.atleast_1d(measured)) / max(1.0, abs(expected))
        for key, (measured, expected) in values.items()
    }
    return OracleReport(
        lemma="cross-section",
        config={"level": level},
        samples=len(values),
        violations=0,
        residual_max=max(residuals.values()),
        details={
            key: {"measured": np.atleast_1d(m).tolist(), "expected": e, "residual": residuals[key]}
            for key, (m, e) in values.items()
        },
    )


def _pairwise(points: np.ndarray) -> np.ndarray:
    return np.array([float(np.linalg.norm(p - q)) for i, p in enumerate(points) for q in points[i + 1:]])
