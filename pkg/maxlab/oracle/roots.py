"""
Closed-form exit lengths in the cross-sections of a truncated ball.

Every closed form is paired with a direct computation of the same root
(a ray-sphere intersection, or a ray-plane one for the half-space branch)
and with the envelope it is compared against.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from maxlab.config import get_settings
from maxlab.errors import DomainError, InputError
from .configs import BallConeConfig, ConeCase, random_ball_config
from .report import OracleReport, envelope_range, run_instances

logger = logging.getLogger(__name__)

SMALL_SINE = 1.0 / 32.0

KIND_DIMS = {"xi": 2, "p": 3, "q": 3, "p_slanted": 3, "p_i": 4, "v_i": 4}


def positive_root(B: float, A: float) -> float:
    """Positive root of t^2 + 2 B t - A = 0 for A > 0, without cancellation."""
    if not A > 0:
        raise DomainError(f"The start point is not inside the sphere (A = {A})")
    s = math.sqrt(B * B + A)
    return A / (B + s) if B >= 0 else s - B


def exit_length(center, radius: float, origin, direction) -> float:
    """
    Distance from a point inside a sphere to the sphere along a unit direction.

    Args:
        center: sphere center
        radius: sphere radius
        origin: start point, strictly inside the ball
        direction: unit vector

    Returns:
        the positive t with |origin + t direction - center| = radius
    """
    center = np.asarray(center, dtype=float)
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if not center.shape == origin.shape == direction.shape:
        raise InputError("Center, origin and direction must have the same dimension")
    if abs(float(np.linalg.norm(direction)) - 1.0) > 1e-9:
        raise InputError("Direction must be a unit vector")
    w = origin - center
    b = float(w @ direction)
    c = float(w @ w) - radius * radius
    if c >= 0:
        raise DomainError("The origin is not strictly inside the ball")
    return positive_root(b, -c)


def xi_closed(R: float, delta: float, h: float) -> float:
    return positive_root(R, 2 * delta * h - h * h)


def p_closed(R: float, sine: float, delta: float, h: float) -> float:
    """Exit length from a' along an edge making angle asin(sine) with the tangent at a'."""
    return positive_root(R * sine, 2 * delta * h - h * h)


def slanted_closed(R: float, beta: float, delta: float, h: float) -> float:
    """Exit length from a'_h along the edge e1 in three dimensions."""
    A = 2 * delta * h - 3 * h * h + 2 * math.sqrt(2) * R * h * math.sin(beta + math.pi / 6)
    B = R * math.sin(beta) - math.sqrt(6) * h / 2
    return positive_root(B, A)


def z_closed(K: float, L: float) -> float:
    return positive_root(K, L)


def rh_envelope(r: float, h: float, scale: float) -> float:
    """sqrt(r h) /\\ r h / scale; the second term drops out when scale is zero."""
    root = math.sqrt(r * h)
    return min(root, r * h / scale) if scale > 0 else root


@dataclass(frozen=True)
class RootSample:
    kind: str
    h: float
    closed_form: float
    direct: float
    envelope: Optional[float] = None
    sphere_residual: float = 0.0

    @property
    def residual(self) -> float:
        return max(abs(self.closed_form - self.direct) / max(1.0, abs(self.direct)), self.sphere_residual)

    @property
    def ratio(self) -> Optional[float]:
        if self.envelope is None or self.envelope <= 0:
            return None
        return self.closed_form / self.envelope

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "h": self.h,
            "closed_form": self.closed_form,
            "direct": self.direct,
            "envelope": self.envelope,
            "residual": self.residual,
            "ratio": self.ratio,
        }


def _sphere_residual(center, radius: float, point) -> float:
    return abs(float(np.linalg.norm(np.asarray(point) - center)) - radius) / max(1.0, radius)


def _require(cfg: BallConeConfig, kind: str, h: float, h_max: float, strict: bool = False):
    d = KIND_DIMS[kind]
    if cfg.d != d:
        raise DomainError(f"{kind} lives in dimension {d}, the configuration has d = {cfg.d}")
    if cfg.case is not ConeCase.VERTEX:
        raise DomainError(f"{kind} needs a' at a vertex of the cross-section, got the {cfg.case.value} case")
    inside = h < h_max if strict else h <= h_max
    if not (h > 0 and inside):
        raise DomainError(f"h = {h} is outside the range (0, {h_max:.6g}{')' if strict else ']'} for {kind}")


def h_limit(kind: str, cfg: BallConeConfig, c0: float = None) -> float:
    if kind == "xi":
        return cfg.r / math.sqrt(2)
    if kind in ("p", "q"):
        return cfg.r / math.sqrt(3)
    if kind == "p_slanted":
        return cfg.r / 3
    if kind == "p_i":
        return cfg.r / 2
    if kind == "v_i":
        c0 = get_settings().oracle.c0 if c0 is None else c0
        return c0 * cfg.R
    raise InputError(f"Unknown root kind: {kind}")


def xi_of_h(cfg: BallConeConfig, h: float) -> RootSample:
    """
    Depth xi of the circle below a' at height a1 + h in the plane, with its envelope rh / (R + sqrt(rh)).
    """
    _require(cfg, "xi", h, h_limit("xi", cfg))
    closed = xi_closed(cfg.R, cfg.delta, h)
    R_h = cfg.slice_radius(h)
    direct = exit_length(cfg.center_slice, R_h, cfg.vertex, cfg.n)
    point = np.concatenate([[cfg.level(h)], cfg.vertex + closed * cfg.n])
    envelope = cfg.r * h / (cfg.R + math.sqrt(cfg.r * h))
    return RootSample("xi", h, closed, direct, envelope, _sphere_residual(cfg.center, cfg.r, point))


def _edge_sample(cfg: BallConeConfig, kind: str, h: float, closed: float, origin, edge, envelope) -> RootSample:
    R_h = cfg.slice_radius(h)
    direct = exit_length(cfg.center_slice, R_h, origin, edge)
    residual = _sphere_residual(cfg.center_slice, R_h, origin + closed * edge)
    return RootSample(kind, h, closed, direct, envelope, residual)


def _ordered_edges(cfg: BallConeConfig):
    """The two edges at a' in three dimensions, smaller sine first, and the angle beta of the first."""
    order = np.argsort(cfg.edge_sines)
    edges = cfg.cone_edges[order]
    sines = cfg.edge_sines[order]
    beta = math.asin(min(max(float(sines[0]), -1.0), 1.0))
    return edges, sines, beta


def _three_dim_roots(kind: str, cfg: BallConeConfig, h: float) -> List[RootSample]:
    edges, sines, beta = _ordered_edges(cfg)
    r, R, delta = cfg.r, cfg.R, cfg.delta
    if kind == "p":
        closed = p_closed(R, math.sin(beta), delta, h)
        return [_edge_sample(cfg, kind, h, closed, cfg.vertex, edges[0], rh_envelope(r, h, R * math.sin(beta)))]
    if kind == "q":
        sine = math.sin(beta + math.pi / 3)
        closed = p_closed(R, sine, delta, h)
        sample = _edge_sample(cfg, kind, h, closed, cfg.vertex, edges[1], rh_envelope(r, h, R))
        # the second edge is the first one turned by pi/3
        angle = RootSample("edge_angle", h, sine, float(sines[1]))
        return [sample, angle]
    closed = slanted_closed(R, beta, delta, h)
    return [_edge_sample(cfg, kind, h, closed, cfg.apex(h), edges[0], None)]


def v_roots(cfg: BallConeConfig, h: float, c0: float = None):
    """
    Roots for the edges at a'_h in four dimensions.

    Returns (samples, violations, points) where violations count failures
    of the ordering z(pi) <= z(theta) <= z(0) and of |v_i| >= 4h for
    nearly tangent edges.
    """
    r, R, delta = cfg.r, cfg.R, cfg.delta
    n = cfg.n
    R_h = cfg.slice_radius(h)
    apex = cfg.apex(h)
    towards_center = -cfg.vertex / np.linalg.norm(cfg.vertex)
    sin_w = float(towards_center @ n)
    across = towards_center - sin_w * n
    cos_w = float(np.linalg.norm(across))
    u_hat = across / cos_w if cos_w > 1e-12 else None
    ell = R - math.sqrt(3) * h * sin_w
    L_star = R_h * R_h - R * R + 2 * math.sqrt(3) * R * h * sin_w - 3 * h * h

    samples, violations, points = [], 0, []
    for edge, sine in zip(cfg.cone_edges, cfg.edge_sines):
        sine = float(sine)
        beta = math.asin(min(max(sine, -1.0), 1.0))
        cos_b = math.cos(beta)
        side = edge - sine * n
        if u_hat is None or cos_b < 1e-12:
            cos_t = 0.0
        else:
            cos_t = float(np.clip(side @ across / (cos_b * cos_w), -1.0, 1.0))
        K = ell * sine - math.sqrt(3) * h * cos_w * cos_b * cos_t
        L = ell * ell + 3 * h * h * cos_w * cos_w - R_h * R_h
        z_theta = _edge_sample(cfg, "z_theta", h, z_closed(K, -L), apex, edge, None)

        ends = []
        for label, sign, K_star in (
            ("z0", 1.0, R * sine - math.sqrt(3) * h * math.cos(beta - math.atan2(sin_w, cos_w))),
            ("zpi", -1.0, R * sine + math.sqrt(3) * h * math.cos(beta + math.atan2(sin_w, cos_w))),
        ):
            if u_hat is None:
                ray = edge
            else:
                ray = sine * n + sign * cos_b * u_hat
            ends.append(_edge_sample(cfg, label, h, z_closed(K_star, L_star), apex, ray, None))
        z0, zpi = ends
        scale = max(1.0, z0.closed_form)
        if not zpi.closed_form - 1e-9 * scale <= z_theta.closed_form <= z0.closed_form + 1e-9 * scale:
            violations += 1
            points.append(apex + z_theta.closed_form * edge)

        envelope = rh_envelope(r, h, R * sine)
        if sine >= SMALL_SINE:
            length = (R_h - R + math.sqrt(3) * h * sin_w) / sine
            hit = apex + length * edge
            direct = length + (R_h - float(cfg.tau(hit))) / sine
            v = RootSample("v_i", h, length, direct, envelope)
        else:
            v = RootSample("v_i", h, z_theta.closed_form, z_theta.direct, envelope, z_theta.sphere_residual)
            if v.closed_form < 4 * h * (1 - 1e-12):
                violations += 1
                points.append(apex + v.closed_form * edge)
        samples.extend([v, z_theta, z0, zpi])
    return samples, violations, points


def root_samples(kind: str, cfg: BallConeConfig, h: float, c0: float = None):
    """(samples, violations, violating points) for one root kind at one h."""
    if kind not in KIND_DIMS:
        raise InputError(f"Unknown root kind: {kind}")
    _require(cfg, kind, h, h_limit(kind, cfg, c0), strict=(kind == "v_i"))
    if kind == "xi":
        return [xi_of_h(cfg, h)], 0, []
    if kind in ("p", "q", "p_slanted"):
        return _three_dim_roots(kind, cfg, h), 0, []
    if kind == "p_i":
        samples = [
            _edge_sample(cfg, kind, h, p_closed(cfg.R, float(s), cfg.delta, h), cfg.vertex, e, rh_envelope(cfg.r, h, cfg.R * float(s)))
            for e, s in zip(cfg.cone_edges, cfg.edge_sines)
        ]
        return samples, 0, []
    return v_roots(cfg, h, c0)


def envelope_check(kind: str, cfg: BallConeConfig, h: float, c0: float = None) -> OracleReport:
    """
    Closed form against direct geometry and against its envelope at one h.

    Args:
        kind: one of xi, p, q, p_slanted, p_i, v_i
        cfg: a vertex configuration of the matching dimension
        h: height above a1, inside the range of the kind
        c0: small-h constant for v_i (settings default)

    Returns:
        OracleReport with the largest residual and the envelope ratio range
    """
    samples, violations, points = root_samples(kind, cfg, h, c0)
    lo, hi = envelope_range(s.ratio for s in samples)
    return OracleReport(
        lemma=f"roots:{kind}",
        config={**cfg.to_dict(), "h": h},
        samples=len(samples),
        violations=violations,
        residual_max=max(s.residual for s in samples),
        envelope_min=lo,
        envelope_max=hi,
        details={"roots": [s.to_dict() for s in samples]},
        violating_points=tuple(tuple(float(c) for c in p) for p in points),
    )


def root_sweep(kind: str, instances: int = None, seed: int = None, threads: int = 1, c0: float = None) -> List[OracleReport]:
    """envelope_check on random vertex configurations, h drawn inside the kind's range."""
    settings = get_settings()
    instances = settings.oracle.instances if instances is None else instances
    seed = settings.seed if seed is None else seed
    if kind not in KIND_DIMS:
        raise InputError(f"Unknown root kind: {kind}")

    def check(rng):
        cfg = random_ball_config(KIND_DIMS[kind], ConeCase.VERTEX, rng)
        h = h_limit(kind, cfg, c0) * rng.uniform(0.01, 0.99)
        return envelope_check(kind, cfg, h, c0)

    reports = run_instances(check, instances, seed, threads)
    logger.info("root sweep %s: %d instances", kind, len(reports))
    return reports
