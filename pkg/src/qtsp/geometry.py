"""Planar Euclidean TSP instances.

Tours are cyclic: a permutation ``(p_1, ..., p_n)`` of 1-based point labels
closes back from ``p_n`` to ``p_1``. After :func:`normalize`, every tour of
an ``n``-point instance has length in ``[2, sqrt(2) * n]``.
"""

from __future__ import annotations

import json
import math
import re
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateInstanceError,
    DimensionError,
    InstanceFormatError,
    OutOfRangeError,
    UnsupportedFormatError,
)

TOL = 1e-9
GENERATOR_KINDS = ("uniform", "two-corner", "collinear")


@dataclass(frozen=True, eq=False)
class EuclideanInstance:
    points: np.ndarray
    name: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DimensionError(f"points must be an (n, 2) array, got shape {pts.shape}")
        if pts.shape[0] < 2:
            raise DimensionError("an instance needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise InstanceFormatError("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def distance_matrix(self) -> np.ndarray:
        diff = self.points[:, None, :] - self.points[None, :, :]
        return np.sqrt((diff ** 2).sum(axis=-1))

    def dist(self, i: int, j: int) -> float:
        """Distance between 1-based points ``i`` and ``j``."""
        (x1, y1), (x2, y2) = self.points[i - 1], self.points[j - 1]
        return math.hypot(x1 - x2, y1 - y2)

    def to_json(self) -> dict:
        return {"name": self.name, "points": self.points.tolist()}


@dataclass(frozen=True, eq=False)
class NormalizedInstance(EuclideanInstance):
    """Instance mapped into the unit square by ``(p - offset) * scale``."""

    scale: float = 1.0
    offset: tuple[float, float] = field(default=(0.0, 0.0))


def normalize(inst: EuclideanInstance) -> NormalizedInstance:
    pts = inst.points
    lo = pts.min(axis=0)
    extent = float((pts.max(axis=0) - lo).max())
    if extent <= 0.0:
        raise DegenerateInstanceError("all points coincide; cannot normalize")
    scale = 1.0 / extent
    # dividing (not multiplying by scale) maps the far edge to exactly 1.0,
    # which makes a second normalize an exact identity
    scaled = (pts - lo) / extent
    return NormalizedInstance(
        points=scaled, name=inst.name, scale=scale, offset=(float(lo[0]), float(lo[1]))
    )


def is_normalized(inst: EuclideanInstance, tol: float = TOL) -> bool:
    pts = inst.points
    if pts.min() < -tol or pts.max() > 1 + tol:
        return False
    extent = (pts.max(axis=0) - pts.min(axis=0)).max()
    return abs(extent - 1.0) <= tol


def tour_length(inst: EuclideanInstance, perm: Sequence[int]) -> float:
    """Cyclic length of ``perm``; ``perm`` must list every point exactly once."""
    if len(perm) != inst.n:
        raise DimensionError(f"permutation has {len(perm)} entries, instance has {inst.n} points")
    return cycle_length(inst, perm)


def cycle_length(inst: EuclideanInstance, labels: Sequence[int]) -> float:
    """Cyclic length through a subset of points (0 for a single point)."""
    m = len(labels)
    if m < 2:
        return 0.0
    return sum(inst.dist(labels[k], labels[(k + 1) % m]) for k in range(m))


def insertion_increment(
    inst: EuclideanInstance, partial: Sequence[int], new_point: int, position: int
) -> float:
    """Growth of the cyclic tour over ``partial`` when ``new_point`` is inserted.

    ``position`` is 1-based: the new point goes between the ``(position-1)``-th
    and ``position``-th entries. Positions 1 and ``len(partial)+1`` both split
    the closing edge (last, first).
    """
    m = len(partial)
    if not 1 <= position <= m + 1:
        raise OutOfRangeError(f"position {position} outside [1, {m + 1}]")
    if new_point in partial:
        raise OutOfRangeError(f"point {new_point} already in the partial tour")
    if m == 0:
        return 0.0
    if m == 1:
        return 2.0 * inst.dist(partial[0], new_point)
    u = partial[(position - 2) % m]
    w = partial[(position - 1) % m]
    inc = inst.dist(u, new_point) + inst.dist(new_point, w) - inst.dist(u, w)
    return max(inc, 0.0)


def length_bounds(n: int) -> tuple[float, float]:
    """Shortest and longest possible tour of a normalized ``n``-point instance."""
    if n < 2:
        raise OutOfRangeError(f"bounds need n >= 2, got {n}")
    return 2.0, math.sqrt(2.0) * n


def generate(kind: str, n: int, seed: int | None = 0) -> EuclideanInstance:
    """Fixture instances.

    ``uniform`` draws i.i.d. points in the unit square. ``two-corner``
    alternates points between (0, 0) and (1, 1), so the alternating tour has
    length ``sqrt(2) * n`` for even ``n``. ``collinear`` places points on the
    segment x = 0, y in [0, 1] with both endpoints present, so the shortest
    tour has length exactly 2.
    """
    if n < 2:
        raise OutOfRangeError(f"n must be >= 2, got {n}")
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        pts = rng.random((n, 2))
    elif kind == "two-corner":
        pts = np.array([(0.0, 0.0) if i % 2 == 0 else (1.0, 1.0) for i in range(n)])
    elif kind == "collinear":
        ys = np.concatenate([[0.0, 1.0], rng.random(n - 2)])
        pts = np.column_stack([np.zeros(n), rng.permutation(ys)])
    else:
        raise ValueError(f"unknown generator kind {kind!r}; expected one of {GENERATOR_KINDS}")
    return EuclideanInstance(points=pts, name=f"{kind}-{n}-s{seed}")


# -- file formats -----------------------------------------------------------

def instance_from_json(data: dict) -> EuclideanInstance:
    if not isinstance(data, dict) or "points" not in data:
        raise InstanceFormatError('instance JSON needs a "points" array')
    pts = data["points"]
    if not isinstance(pts, list) or len(pts) == 0:
        raise InstanceFormatError('"points" must be a non-empty list of [x, y] pairs')
    for k, p in enumerate(pts):
        if (not isinstance(p, (list, tuple)) or len(p) != 2
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p)):
            raise InstanceFormatError(f"points[{k}] is not an [x, y] pair of numbers: {p!r}")
    try:
        return EuclideanInstance(points=np.array(pts, dtype=float), name=str(data.get("name", "")))
    except DimensionError as exc:
        raise InstanceFormatError(str(exc)) from exc


def read_json(path: str | Path) -> EuclideanInstance:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
        ) from exc
    return instance_from_json(data)


def write_json(inst: EuclideanInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(inst.to_json(), indent=2) + "\n")


_KEY_RE = re.compile(r"^\s*([A-Z_]+)\s*:?\s*(.*?)\s*$")


def read_tsplib(path: str | Path) -> EuclideanInstance:
    """Read the EUC_2D / NODE_COORD_SECTION subset of TSPLIB."""
    lines = Path(path).read_text().splitlines()
    header: dict[str, str] = {}
    coords: list[tuple[float, float]] = []
    in_coords = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        if in_coords:
            parts = line.split()
            if len(parts) != 3:
                col = len(raw) - len(raw.lstrip()) + 1
                raise InstanceFormatError(
                    f"{path}:{lineno}:{col}: expected 'id x y', got {line!r}"
                )
            try:
                coords.append((float(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise InstanceFormatError(f"{path}:{lineno}:1: bad coordinate in {line!r}") from exc
            continue
        if line.startswith("NODE_COORD_SECTION"):
            ewt = header.get("EDGE_WEIGHT_TYPE")
            if ewt != "EUC_2D":
                raise UnsupportedFormatError(
                    f"{path}: EDGE_WEIGHT_TYPE {ewt!r} unsupported (only EUC_2D)"
                )
            in_coords = True
            continue
        if line.endswith("_SECTION"):
            raise UnsupportedFormatError(f"{path}:{lineno}:1: section {line} unsupported")
        m = _KEY_RE.match(line)
        if m is None:
            raise InstanceFormatError(f"{path}:{lineno}:1: cannot parse header line {line!r}")
        key, value = m.groups()
        header[key] = value
        if key == "EDGE_WEIGHT_TYPE" and value != "EUC_2D":
            raise UnsupportedFormatError(
                f"{path}:{lineno}:1: EDGE_WEIGHT_TYPE {value!r} unsupported (only EUC_2D)"
            )
    if not in_coords:
        raise InstanceFormatError(f"{path}: missing NODE_COORD_SECTION")
    if "DIMENSION" in header and header["DIMENSION"].isdigit():
        if int(header["DIMENSION"]) != len(coords):
            raise InstanceFormatError(
                f"{path}: DIMENSION {header['DIMENSION']} but {len(coords)} coordinates"
            )
    try:
        return EuclideanInstance(points=np.array(coords, dtype=float), name=header.get("NAME", ""))
    except DimensionError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc


def load_instance(path: str | Path) -> EuclideanInstance:
    """Load JSON or TSPLIB, chosen by extension and then by content."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return read_json(path)
    if path.suffix.lower() == ".tsp":
        return read_tsplib(path)
    head = path.read_text().lstrip()[:1]
    return read_json(path) if head in ("{", "[") else read_tsplib(path)
