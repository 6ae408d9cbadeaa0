"""Dimension-distortion bound evaluators and the end-to-end experiment harness.

Three closed-form bounds on the box dimension of an image set f(E):

* compact-Holder maps:   p*d / (alpha*p + d), strictly below the plain
  Holder bound d/alpha for d > 0;
* super-critical Sobolev-type maps: p*d / (p - Q + d), strictly below Q
  whenever d < Q;
* quasisymmetric homeomorphisms: the Sobolev upper bound paired with the
  lower bound (p-Q)*d / (p-d), obtained by running the upper bound on the
  inverse map.

The major/minor diagnostic mirrors the covering argument behind the first
bound: at a target image scale r, cubes meeting E whose images have diameter
at least r are "major" and get subdivided; minor cubes' images form a
diameter-< r cover of f(E). On a finite sample the subdivision always
terminates, and the per-level major counts are the measurable shadow of the
bound's bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cubes import CubeParams, DyadicSystem, build_system, cubes_intersecting
from .dimension import (DimensionEstimate, dimension_from_covers)
from .errors import (InvalidInputError, OutOfRangeError, ResolutionExhaustedError)
from .holder import (HolderCertificate, SampledMap, certify_compactly_holder,
                     default_radius_schedule)

KIND_CH = "ch"
KIND_SOBOLEV = "sobolev"
KIND_QS = "qs"


@dataclass(frozen=True)
class BoundInputs:
    """Exponents feeding a distortion bound; ``d`` may be measured later."""

    kind: str
    p: float
    alpha: float | None = None
    q: float | None = None
    d: float | None = None

    def __post_init__(self):
        if self.kind not in (KIND_CH, KIND_SOBOLEV, KIND_QS):
            raise InvalidInputError(f"unknown bound kind {self.kind!r}")
        if not self.p > 1.0:
            raise InvalidInputError("p must exceed 1")
        if self.kind == KIND_CH:
            if self.alpha is None or not (0.0 < self.alpha < 1.0):
                raise InvalidInputError("compact-Holder bound needs alpha in (0, 1)")
        else:
            if self.q is None or not self.q > 0.0:
                raise InvalidInputError("Sobolev/QS bounds need a homogeneity exponent Q > 0")
            if not self.p > self.q:
                raise InvalidInputError("super-critical case only: p must exceed Q")
            if self.kind == KIND_QS and not self.q > 1.0:
                raise InvalidInputError("QS bounds need Q > 1")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "p": self.p, "alpha": self.alpha,
                "Q": self.q, "d": self.d}


def ch_bound(p: float, alpha: float, d: float) -> float:
    """Image-dimension bound p*d / (alpha*p + d) for compact-Holder maps."""
    if not p > 1.0:
        raise InvalidInputError("p must exceed 1")
    if not (0.0 < alpha < 1.0):
        raise InvalidInputError("alpha must lie in (0, 1)")
    if d < 0.0:
        raise InvalidInputError("dimension must be nonnegative")
    if d == 0.0:
        return 0.0
    return p * d / (alpha * p + d)


def sobolev_bound(p: float, q: float, d: float) -> float:
    """Image-dimension bound p*d / (p - Q + d); stays below Q when d < Q."""
    if not q > 0.0:
        raise InvalidInputError("Q must be positive")
    if not p > q:
        raise InvalidInputError("super-critical case only: p must exceed Q")
    if not 0.0 <= d < q:
        raise InvalidInputError("requires 0 <= d < Q")
    if d == 0.0:
        return 0.0
    value = p * d / (p - q + d)
    assert value < q, "interior bound must stay below Q"
    return value


def qs_bounds(p: float, q: float, d: float) -> tuple:
    """Two-sided bounds ((p-Q)d/(p-d), p*d/(p-Q+d)) for quasisymmetric maps."""
    if not q > 1.0:
        raise InvalidInputError("QS bounds need Q > 1")
    if not p > q:
        raise InvalidInputError("super-critical case only: p must exceed Q")
    if not 0.0 < d < q:
        raise InvalidInputError("requires d in (0, Q)")
    lower = (p - q) * d / (p - d)
    upper = sobolev_bound(p, q, d)
    assert 0.0 < lower <= upper < q
    return lower, upper


def compute_k_r(delta: float, d: float, big_d: float, r: float, k_e: int) -> int:
    """Largest integer k >= k_e with delta^((k+1)d/D) < r <= delta^(k d/D).

    Raises when r exceeds delta^(k_e d/D): no admissible starting level.
    """
    if not (0.0 < delta < 1.0):
        raise InvalidInputError("delta must lie in (0, 1)")
    if not (d > 0.0 and big_d > 0.0 and r > 0.0):
        raise InvalidInputError("d, D and r must be positive")
    exponent = d / big_d
    t = big_d * math.log(r) / (d * math.log(delta))
    k = math.floor(t)
    # Guard float edges: nudge until the defining inequalities hold exactly.
    while delta ** ((k + 1) * exponent) >= r:
        k += 1
    while r > delta ** (k * exponent):
        k -= 1
    if k < k_e:
        raise OutOfRangeError(
            f"r={r} exceeds the level-{k_e} scale delta^(k_e*d/D)="
            f"{delta ** (k_e * exponent)}")
    return int(k)


@dataclass
class MajorMinorTrace:
    """Per-level major-cube counts at one target image scale."""

    r: float
    k_r: int
    levels: list
    major_counts: list
    total_major: int
    cover_size_for_fe: int

    def to_dict(self) -> dict:
        return {"r": self.r, "k_r": self.k_r, "levels": self.levels,
                "major_counts": self.major_counts,
                "total_major": self.total_major,
                "cover_size_for_fE": self.cover_size_for_fe}


def classify_major_minor(system: DyadicSystem, map_: SampledMap, e_points,
                         r: float, d: float, big_d: float) -> MajorMinorTrace:
    """Classify cubes by image diameter >= r, subdividing major cubes.

    Starting at the level k_r fixed by the target scale, every E-meeting cube
    whose image has diameter >= r is major and its E-meeting children are
    examined next; minor cubes accumulate into a cover of E whose image sets
    all have diameter < r. The walk ends when a level has no major cubes; on
    a finite sample that always happens unless k_max is reached first, which
    raises with the partial trace attached.
    """
    e_points = np.asarray(e_points, dtype=np.intp)
    if e_points.size == 0:
        raise InvalidInputError("E must be nonempty")
    if not r > 0.0:
        raise InvalidInputError("target scale must be positive")
    space = system.space
    diam_e = space.subset_diameter(e_points)
    k_e = 0
    while system.params.delta ** k_e > diam_e and k_e < system.params.k_max:
        k_e += 1
    k_r = compute_k_r(system.params.delta, d, big_d, r, k_e)
    if k_r > system.params.k_max:
        k_r = system.params.k_max

    in_e = np.zeros(space.n, dtype=bool)
    in_e[e_points] = True

    levels = []
    major_counts = []
    minor_cover = 0
    _, hit = cubes_intersecting(system, k_r, e_points)
    frontier = [system.levels[k_r][j] for j in hit.tolist()]
    k = k_r
    while True:
        majors = []
        minors = 0
        for cube in frontier:
            if map_.image_diameter(cube.members) >= r:
                majors.append(cube)
            else:
                minors += 1
        levels.append(k)
        major_counts.append(len(majors))
        minor_cover += minors
        if not majors:
            break
        if k >= system.params.k_max:
            partial = MajorMinorTrace(r=float(r), k_r=k_r, levels=levels,
                                      major_counts=major_counts,
                                      total_major=int(sum(major_counts)),
                                      cover_size_for_fe=minor_cover)
            raise ResolutionExhaustedError(
                f"{len(majors)} major cubes remain at the deepest level {k}",
                trace=partial)
        next_frontier = []
        for cube in majors:
            for child_idx in cube.children:
                child = system.levels[k + 1][child_idx]
                if in_e[child.members].any():
                    next_frontier.append(child)
        frontier = next_frontier
        k += 1

    return MajorMinorTrace(r=float(r), k_r=k_r, levels=levels,
                           major_counts=major_counts,
                           total_major=int(sum(major_counts)),
                           cover_size_for_fe=minor_cover)


@dataclass
class DistortionReport:
    """End-to-end evidence for one distortion experiment."""

    bound_kind: str
    inputs: BoundInputs
    source_dim: DimensionEstimate
    image_dim: DimensionEstimate
    bound_value: float | None
    bound_lower: float | None
    margin: float | None
    margin_tol: float
    certificate: HolderCertificate | None
    traces: list = field(default_factory=list)
    hypothesis_violation: str | None = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool | None:
        if self.margin is None:
            return None
        return self.margin >= -self.margin_tol

    def to_dict(self) -> dict:
        return {
            "schema": "distortion/1",
            "bound_kind": self.bound_kind,
            "inputs": self.inputs.to_dict(),
            "source_dim": self.source_dim.to_dict(),
            "image_dim": self.image_dim.to_dict(),
            "bound_value": self.bound_value,
            "bound_lower": self.bound_lower,
            "margin": self.margin,
            "margin_tol": self.margin_tol,
            "passed": self.passed,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "traces": [t.to_dict() for t in self.traces],
            "hypothesis_violation": self.hypothesis_violation,
            "notes": self.notes,
        }


def run_distortion_experiment(map_: SampledMap, e_points, inputs: BoundInputs,
                              cube_params: CubeParams, *, epsilon: float = 0.4,
                              cert_schedule=None, source_scales=None,
                              image_scales=None, source_ratio: float = 0.5,
                              image_ratio: float = 0.5, trace_levels=None,
                              margin_tol: float = 0.05) -> DistortionReport:
    """Measure dimensions, certify, evaluate the bound and trace major cubes.

    The bound is evaluated at the measured source dimension (or at
    ``inputs.d`` when given). Sobolev/QS hypotheses require d < Q; when the
    measurement violates that, the report flags it instead of evaluating.
    """
    e_points = np.asarray(e_points, dtype=np.intp)
    source = map_.source
    notes = []

    _, source_dim = dimension_from_covers(source, e_points, scales=source_scales,
                                          ratio=source_ratio)
    image_pts = map_.image(e_points)
    _, image_dim = dimension_from_covers(map_.target, image_pts,
                                         scales=image_scales, ratio=image_ratio)

    if inputs.kind == KIND_CH:
        cert_alpha = inputs.alpha
    else:
        cert_alpha = 1.0 - inputs.q / inputs.p
        notes.append(f"certified at the limiting pair (p, 1 - Q/p) = "
                     f"({inputs.p}, {cert_alpha})")
    if cert_schedule is None:
        cert_schedule = default_radius_schedule(source, e_points)
    certificate = certify_compactly_holder(map_, e_points, inputs.p, cert_alpha,
                                           epsilon, cert_schedule)

    d_hat = inputs.d if inputs.d is not None else source_dim.slope
    bound_lower = None
    hypothesis_violation = None
    if inputs.kind == KIND_CH:
        bound_value = ch_bound(inputs.p, inputs.alpha, d_hat)
    elif d_hat >= inputs.q:
        bound_value = None
        hypothesis_violation = (f"measured source dimension {d_hat:.4f} is not "
                                f"below Q={inputs.q}; bound hypotheses fail")
    elif inputs.kind == KIND_SOBOLEV:
        bound_value = sobolev_bound(inputs.p, inputs.q, d_hat)
    else:
        bound_lower, bound_value = qs_bounds(inputs.p, inputs.q, d_hat)

    traces = []
    if bound_value is not None and bound_value > 0.0 and d_hat > 0.0:
        system = build_system(source, cube_params)
        if trace_levels is None:
            trace_levels = range(0, cube_params.k_max)
        for k in trace_levels:
            r_k = cube_params.delta ** (k * d_hat / bound_value)
            try:
                traces.append(classify_major_minor(system, map_, e_points,
                                                   r_k, d_hat, bound_value))
            except ResolutionExhaustedError as exc:
                notes.append(f"trace at r={r_k:.6g} exhausted resolution: {exc}")
                break
            except OutOfRangeError as exc:
                notes.append(f"trace at r={r_k:.6g} out of range: {exc}")

    margin = None if bound_value is None else bound_value - image_dim.slope
    return DistortionReport(bound_kind=inputs.kind, inputs=inputs,
                            source_dim=source_dim, image_dim=image_dim,
                            bound_value=bound_value, bound_lower=bound_lower,
                            margin=margin, margin_tol=margin_tol,
                            certificate=certificate, traces=traces,
                            hypothesis_violation=hypothesis_violation,
                            notes=notes)
