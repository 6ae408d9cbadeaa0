"""Deterministic generators for the standard fixture spaces and maps, plus file I/O.

Supported spaces: middle-thirds Cantor endpoints, Sierpinski-carpet cell
centers, uniform grids in one and two dimensions, snowflake re-metrizations
and power-weighted variants. All generators are deterministic: the same spec
yields the same sample bit for bit. Map targets are never re-sampled; the
image sample is exactly the mapped source points.

File formats: CSV point clouds with header ``id,x1,...,xn[,w]`` and JSON
space specs ``{"type": "euclidean"|"snowflake"|"table", ...}``. Saving then
loading reproduces points, weights and metric kind exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ParseError
from .holder import SampledMap
from .spaces import EUCLIDEAN, SNOWFLAKE, TABLE, SpaceSample

POINT_CAP = 1_000_000

KIND_CANTOR = "cantor"
KIND_CARPET = "carpet"
KIND_GRID = "grid"
KIND_GRID2 = "grid2"
KIND_SNOWFLAKE = "snowflake"
KIND_WEIGHTED = "weighted"


@dataclass
class GeneratorSpec:
    """Declarative recipe for a fixture space.

    ``seed`` is carried for future randomized samplers; every current
    generator is deterministic and ignores it.
    """

    kind: str
    depth: int = 0
    n: int = 0
    lo: float = 0.0
    hi: float = 1.0
    alpha: float | None = None
    weight_kind: str | None = None
    weight_param: float = 0.0
    base: "GeneratorSpec | None" = None
    seed: int = 0

    def token(self) -> str:
        if self.kind == KIND_CANTOR:
            return f"cantor:{self.depth}"
        if self.kind == KIND_CARPET:
            return f"carpet:{self.depth}"
        if self.kind in (KIND_GRID, KIND_GRID2):
            tok = f"{self.kind}:{self.n}"
            if (self.lo, self.hi) != (0.0, 1.0):
                tok += f":{self.lo}:{self.hi}"
            return tok
        if self.kind == KIND_SNOWFLAKE:
            return f"snowflake:{self.alpha}:{self.base.token()}"
        if self.kind == KIND_WEIGHTED:
            return f"weighted:{self.weight_kind}:{self.weight_param}:{self.base.token()}"
        raise InvalidInputError(f"unknown generator kind {self.kind!r}")


def parse_space_token(token: str) -> GeneratorSpec:
    """Parse CLI-style space tokens like ``cantor:8`` or ``snowflake:0.5:grid:1001``."""
    parts = token.split(":")
    kind = parts[0]
    try:
        if kind in (KIND_CANTOR, KIND_CARPET):
            return GeneratorSpec(kind=kind, depth=int(parts[1]))
        if kind in (KIND_GRID, KIND_GRID2):
            spec = GeneratorSpec(kind=kind, n=int(parts[1]))
            if len(parts) == 4:
                spec.lo, spec.hi = float(parts[2]), float(parts[3])
            elif len(parts) != 2:
                raise InvalidInputError(f"malformed grid token {token!r}")
            return spec
        if kind == KIND_SNOWFLAKE:
            return GeneratorSpec(kind=kind, alpha=float(parts[1]),
                                 base=parse_space_token(":".join(parts[2:])))
        if kind == KIND_WEIGHTED:
            return GeneratorSpec(kind=kind, weight_kind=parts[1],
                                 weight_param=float(parts[2]),
                                 base=parse_space_token(":".join(parts[3:])))
    except (IndexError, ValueError) as exc:
        raise InvalidInputError(f"malformed space token {token!r}: {exc}") from exc
    raise InvalidInputError(f"unknown space kind in token {token!r}")


def _cantor_points(depth: int) -> np.ndarray:
    """Left and right endpoints of the depth-k middle-thirds intervals."""
    lefts = np.array([0.0])
    for k in range(1, depth + 1):
        step = 2.0 / 3.0 ** k
        lefts = np.concatenate([lefts, lefts + step])
    lefts = np.sort(lefts)
    return np.sort(np.concatenate([lefts, lefts + 3.0 ** (-depth)]))


def _carpet_centers(depth: int) -> np.ndarray:
    """Centers of the 8^k cells of the depth-k Sierpinski carpet."""
    offsets = np.asarray([(dx, dy) for dx in range(3) for dy in range(3)
                          if (dx, dy) != (1, 1)], dtype=np.int64)
    cells = np.zeros((1, 2), dtype=np.int64)
    for _ in range(depth):
        cells = (cells[:, None, :] * 3 + offsets[None, :, :]).reshape(-1, 2)
    cells = cells[np.lexsort((cells[:, 1], cells[:, 0]))]
    return (cells.astype(float) + 0.5) * 3.0 ** (-depth)


def _natural_cell_mass(spec: GeneratorSpec, n_points: int) -> float:
    """Per-point mass making the uniform measure a Riemann-style sum."""
    if spec.kind == KIND_GRID:
        return (spec.hi - spec.lo) / (spec.n - 1)
    if spec.kind == KIND_GRID2:
        return ((spec.hi - spec.lo) / (spec.n - 1)) ** 2
    return 1.0 / n_points


def generate(spec: GeneratorSpec) -> SpaceSample:
    """Build the sample described by ``spec`` (deterministic)."""
    if spec.kind == KIND_CANTOR:
        if spec.depth < 0 or 2 ** (spec.depth + 1) > POINT_CAP:
            raise InvalidInputError(f"cantor depth {spec.depth} out of range")
        pts = _cantor_points(spec.depth)[:, None]
        return SpaceSample(kind=EUCLIDEAN, coords=pts, label=spec.token())
    if spec.kind == KIND_CARPET:
        if spec.depth < 0 or 8 ** spec.depth > POINT_CAP:
            raise InvalidInputError(f"carpet depth {spec.depth} out of range")
        return SpaceSample(kind=EUCLIDEAN, coords=_carpet_centers(spec.depth),
                           label=spec.token())
    if spec.kind in (KIND_GRID, KIND_GRID2):
        if spec.n < 2:
            raise InvalidInputError("grids need at least two points per axis")
        if spec.hi <= spec.lo:
            raise InvalidInputError("grid bounds must satisfy lo < hi")
        axis = np.linspace(spec.lo, spec.hi, spec.n)
        if spec.kind == KIND_GRID:
            coords = axis[:, None]
        else:
            if spec.n ** 2 > POINT_CAP:
                raise InvalidInputError(f"grid2:{spec.n} exceeds the point cap")
            coords = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1)
            coords = coords.reshape(-1, 2)
        if coords.shape[0] > POINT_CAP:
            raise InvalidInputError("grid exceeds the point cap")
        return SpaceSample(kind=EUCLIDEAN, coords=coords, label=spec.token())
    if spec.kind == KIND_SNOWFLAKE:
        if spec.alpha is None or not (0.0 < spec.alpha < 1.0):
            raise InvalidInputError("snowflake exponent must lie in (0, 1)")
        base = generate(spec.base)
        return snowflake_space(base, spec.alpha, label=spec.token())
    if spec.kind == KIND_WEIGHTED:
        base_space = generate(spec.base)
        mass = _natural_cell_mass(spec.base, base_space.n)
        if spec.weight_kind == "unit":
            w = np.full(base_space.n, mass)
        elif spec.weight_kind == "power":
            if spec.weight_param <= -1.0:
                raise InvalidInputError("power weight exponent must exceed -1")
            if base_space.coords is None:
                raise InvalidInputError("power weights need coordinate-backed spaces")
            radius = np.linalg.norm(base_space.coords, axis=1)
            w = radius ** spec.weight_param * mass
        else:
            raise InvalidInputError(f"unknown weight kind {spec.weight_kind!r}")
        out = base_space.with_weights(w)
        out.label = spec.token()
        return out
    raise InvalidInputError(f"unknown generator kind {spec.kind!r}")


def snowflake_space(base: SpaceSample, alpha: float, *, label=None) -> SpaceSample:
    """Re-metrize a sample with the alpha-power of its metric.

    Snowflaking composes: applying alpha then beta equals one pass with
    alpha*beta over the original metric.
    """
    if not (0.0 < alpha < 1.0):
        raise InvalidInputError("snowflake exponent must lie in (0, 1)")
    label = base.label + f"^({alpha})" if label is None else label
    if base.kind == TABLE:
        return SpaceSample(kind=TABLE, table=base.table ** alpha,
                           weights=base.weights, ids=base.ids, label=label)
    combined = alpha if base.kind == EUCLIDEAN else alpha * base.alpha
    if not (0.0 < combined < 1.0):
        raise InvalidInputError("composed snowflake exponent left (0, 1)")
    return SpaceSample(kind=SNOWFLAKE, coords=base.coords, alpha=combined,
                       weights=base.weights, ids=base.ids, label=label)


def make_map(kind: str, source: SpaceSample) -> SampledMap:
    """Build one of the standard test maps on a source sample.

    Tokens: ``identity``, ``snowflake_id:alpha``, ``power:beta`` (coordinates
    must be nonnegative, 1-d), ``radial:beta`` (radial stretch |x|^(beta-1) x),
    ``affine:a:b``.
    """
    parts = kind.split(":")
    name = parts[0]
    identity = np.arange(source.n, dtype=np.intp)
    if name == "identity":
        return SampledMap(source=source, target=source, assignment=identity)
    if name == "snowflake_id":
        alpha = float(parts[1])
        return SampledMap(source=source,
                          target=snowflake_space(source, alpha),
                          assignment=identity)
    if source.coords is None:
        raise InvalidInputError(f"map {name!r} needs coordinate-backed sources")
    if name == "power":
        beta = float(parts[1])
        if not (0.0 < beta <= 1.0):
            raise InvalidInputError("power exponent must lie in (0, 1]")
        if source.coords.shape[1] != 1:
            raise InvalidInputError("power maps act on 1-d samples")
        if np.any(source.coords < 0.0):
            raise InvalidInputError("power maps need nonnegative coordinates")
        target = SpaceSample(kind=EUCLIDEAN, coords=source.coords ** beta,
                             label=f"{source.label}->x^{beta}")
        return SampledMap(source=source, target=target, assignment=identity)
    if name == "radial":
        beta = float(parts[1])
        if not (0.0 < beta <= 1.0):
            raise InvalidInputError("radial exponent must lie in (0, 1]")
        radius = np.linalg.norm(source.coords, axis=1, keepdims=True)
        scale = np.where(radius > 0.0, radius ** (beta - 1.0), 0.0)
        target = SpaceSample(kind=EUCLIDEAN, coords=source.coords * scale,
                             label=f"{source.label}->radial^{beta}")
        return SampledMap(source=source, target=target, assignment=identity)
    if name == "affine":
        a, b = float(parts[1]), float(parts[2])
        if a == 0.0:
            raise InvalidInputError("affine maps need a nonzero linear part")
        target = SpaceSample(kind=EUCLIDEAN, coords=a * source.coords + b,
                             label=f"{source.label}->affine")
        return SampledMap(source=source, target=target, assignment=identity)
    raise InvalidInputError(f"unknown map kind {kind!r}")


# -- file I/O -----------------------------------------------------------------

def write_json(payload: dict, path) -> None:
    """Deterministic JSON artifact: sorted keys, two-space indent, newline."""
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2,
                                     default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def space_to_dict(space: SpaceSample) -> dict:
    out = {"type": space.kind, "label": space.label, "ids": list(space.ids)}
    if space.kind == TABLE:
        out["distances"] = space.table.tolist()
    else:
        out["points"] = space.coords.tolist()
        if space.kind == SNOWFLAKE:
            out["alpha"] = space.alpha
    if space.weights is not None:
        out["weights"] = space.weights.tolist()
    return out


def save_space(space: SpaceSample, path) -> None:
    write_json(space_to_dict(space), path)


def space_from_dict(doc: dict) -> SpaceSample:
    kind = doc.get("type")
    if kind not in (EUCLIDEAN, SNOWFLAKE, TABLE):
        raise ParseError(f"unknown space type {kind!r}")
    try:
        if kind == TABLE:
            return SpaceSample(kind=TABLE, table=np.asarray(doc["distances"], float),
                               weights=doc.get("weights"), ids=doc.get("ids"),
                               label=doc.get("label", ""))
        return SpaceSample(kind=kind, coords=np.asarray(doc["points"], float),
                           alpha=doc.get("alpha"), weights=doc.get("weights"),
                           ids=doc.get("ids"), label=doc.get("label", ""))
    except KeyError as exc:
        raise ParseError(f"space spec missing field {exc}") from exc
    except InvalidInputError as exc:
        raise ParseError(f"invalid space spec: {exc}") from exc


def _load_csv(path) -> SpaceSample:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[0] != "id":
            raise ParseError(f"{path}: line 1: header must start with 'id'")
        has_w = header[-1] == "w"
        coord_names = header[1:-1] if has_w else header[1:]
        expected = [f"x{i + 1}" for i in range(len(coord_names))]
        if not coord_names or coord_names != expected:
            raise ParseError(f"{path}: line 1: expected columns id,x1,...,xn[,w]")
        ids, rows, weights = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            ids.append(row[0].strip())
            try:
                values = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
            if has_w:
                rows.append(values[:-1])
                weights.append(values[-1])
            else:
                rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    try:
        return SpaceSample(kind=EUCLIDEAN, coords=np.asarray(rows),
                           weights=np.asarray(weights) if has_w else None,
                           ids=ids, label=str(path))
    except InvalidInputError as exc:
        raise ParseError(f"{path}: invalid point cloud: {exc}") from exc


def load_point_cloud(path) -> SpaceSample:
    """Load a CSV point cloud or JSON space spec."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _load_csv(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if "space" in doc and isinstance(doc["space"], dict):
        doc = doc["space"]            # artifact files embed the spec under "space"
    return space_from_dict(doc)


def save_report(report, path) -> None:
    """Write any report object (dict or dataclass with to_dict) as JSON."""
    payload = report.to_dict() if hasattr(report, "to_dict") else report
    write_json(payload, path)
