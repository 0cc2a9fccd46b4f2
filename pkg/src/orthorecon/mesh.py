"""Structured benchmark meshes on [-1, 1]^2 and a plain polygon container."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, TextIO

import numpy as np

from .boundary import Polygon

__all__ = ["MeshFamily", "Mesh", "friedrichs_keller", "cartesian", "from_polygons", "by_name"]


class MeshFamily(str, Enum):
    FRIEDRICHS_KELLER = "fk"
    CARTESIAN = "cart"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Mesh:
    """Elements stored as one array ``(n_elements, n_vertices, 2)``, CCW order."""

    vertices: np.ndarray
    family: MeshFamily
    n: Optional[int] = None
    h: float = field(default=0.0)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        if not self.h:
            object.__setattr__(self, "h", float(np.max(_diameters(v))))

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def __iter__(self):
        return iter(self.elements)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[1]

    @cached_property
    def elements(self) -> list[Polygon]:
        return [Polygon(v) for v in self.vertices]

    @property
    def areas(self) -> np.ndarray:
        x, y = self.vertices[..., 0], self.vertices[..., 1]
        return 0.5 * np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)

    @property
    def label(self) -> str:
        return f"{self.family.value}:{self.n}" if self.n is not None else self.family.value

    def locate(self, points) -> np.ndarray:
        """Index of an element containing each point (-1 if none).

        Structured families use index arithmetic; custom meshes fall back to
        a brute-force convex containment test (lowest index wins on edges).
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.family is MeshFamily.CUSTOM or self.n is None:
            return self._locate_brute(pts)
        cells = self.n + 1 if self.family is MeshFamily.FRIEDRICHS_KELLER else self.n - 1
        step = 2.0 / cells
        ij = np.floor((pts + 1.0) / step).astype(int)
        inside = np.all((pts >= -1.0) & (pts <= 1.0), axis=1)
        ij = np.clip(ij, 0, cells - 1)
        cell = ij[:, 1] * cells + ij[:, 0]
        if self.family is MeshFamily.CARTESIAN:
            out = cell
        else:
            first = 2 * cell
            ok = self._contains(first, pts)
            out = np.where(ok, first, first + 1)
        return np.where(inside, out, -1)

    def _contains(self, idx: np.ndarray, pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        v = self.vertices[idx]
        e = np.roll(v, -1, axis=1) - v
        rel = pts[:, None, :] - v
        return np.all(e[..., 0] * rel[..., 1] - e[..., 1] * rel[..., 0] >= -tol, axis=1)

    def _locate_brute(self, pts: np.ndarray) -> np.ndarray:
        out = np.full(len(pts), -1, dtype=int)
        v = self.vertices
        e = np.roll(v, -1, axis=1) - v
        block = max(1, 2_000_000 // max(1, v.size))
        for start in range(0, len(pts), block):
            p = pts[start:start + block]
            rel = p[:, None, None, :] - v[None]
            cross = e[None, ..., 0] * rel[..., 1] - e[None, ..., 1] * rel[..., 0]
            inside = np.all(cross >= -1e-12, axis=2)
            hit = inside.any(axis=1)
            out[start:start + block][hit] = np.argmax(inside[hit], axis=1)
        return out

    def dump(self, fh: TextIO) -> None:
        """One element per line: ``x1 y1 x2 y2 ...`` with 17 significant digits."""
        for poly in self.vertices:
            fh.write(" ".join(f"{c:.17g}" for c in poly.ravel()) + "\n")


def _diameters(v: np.ndarray) -> np.ndarray:
    diff = v[:, :, None, :] - v[:, None, :, :]
    return np.sqrt(np.max(np.sum(diff**2, axis=-1), axis=(1, 2)))


def _grid(cells: int) -> np.ndarray:
    # integer indices scaled once so shared vertices are bitwise identical
    return -1.0 + 2.0 * np.arange(cells + 1) / cells


def friedrichs_keller(n: int, diagonal: str = "down") -> Mesh:
    """(n+1)^2 squares, each cut along the same diagonal into two triangles.

    ``diagonal="down"`` (default) cuts from the upper-left to the lower-right
    corner; ``"up"`` cuts from the lower-left to the upper-right corner.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if diagonal not in ("down", "up"):
        raise ValueError("diagonal must be 'down' or 'up'")
    g = _grid(n + 1)
    i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="xy")
    i, j = i.ravel(), j.ravel()
    p00 = np.column_stack([g[i], g[j]])
    p10 = np.column_stack([g[i + 1], g[j]])
    p11 = np.column_stack([g[i + 1], g[j + 1]])
    p01 = np.column_stack([g[i], g[j + 1]])
    if diagonal == "down":
        first, second = np.stack([p00, p10, p01], axis=1), np.stack([p10, p11, p01], axis=1)
    else:
        first, second = np.stack([p00, p10, p11], axis=1), np.stack([p00, p11, p01], axis=1)
    tris = np.stack([first, second], axis=1).reshape(-1, 3, 2)
    step = 2.0 / (n + 1)
    return Mesh(tris, MeshFamily.FRIEDRICHS_KELLER, n, float(np.hypot(step, step)))


def cartesian(n: int) -> Mesh:
    """(n-1)^2 congruent axis-aligned squares."""
    if n < 2:
        raise ValueError("cartesian mesh needs n >= 2")
    g = _grid(n - 1)
    i, j = np.meshgrid(np.arange(n - 1), np.arange(n - 1), indexing="xy")
    i, j = i.ravel(), j.ravel()
    quads = np.stack([
        np.column_stack([g[i], g[j]]),
        np.column_stack([g[i + 1], g[j]]),
        np.column_stack([g[i + 1], g[j + 1]]),
        np.column_stack([g[i], g[j + 1]]),
    ], axis=1)
    step = 2.0 / (n - 1)
    return Mesh(quads, MeshFamily.CARTESIAN, n, float(np.hypot(step, step)))


def from_polygons(polys: Iterable) -> Mesh:
    """Custom mesh; all elements must share a vertex count."""
    arr = np.array([p.vertices if isinstance(p, Polygon) else np.asarray(p, float) for p in polys])
    for p in arr:
        Polygon(p)
    return Mesh(arr, MeshFamily.CUSTOM)


def by_name(spec: str) -> Mesh:
    """Parse ``fk:30`` or ``cart:30``."""
    fam, _, size = spec.partition(":")
    try:
        n = int(size)
    except ValueError:
        raise ValueError(f"bad mesh size in {spec!r}") from None
    if fam == "fk":
        return friedrichs_keller(n)
    if fam == "cart":
        return cartesian(n)
    raise ValueError(f"unknown mesh family {fam!r}; use fk or cart")
