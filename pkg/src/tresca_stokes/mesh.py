"""Structured triangulations of an axis-aligned rectangle.

Vertices are numbered row by row, ``v = j*(nx+1) + i``.  Every cell is cut
along its bottom-left to top-right diagonal, so refining ``(nx, ny)`` by an
integer factor yields a mesh whose triangles nest inside the coarse ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GAMMA0 = "Gamma0"
GAMMA = "Gamma"
LABELS = (GAMMA0, GAMMA)
SIDES = ("bottom", "right", "top", "left")

_SIDE_NORMALS = {
    "bottom": (0.0, -1.0),
    "right": (1.0, 0.0),
    "top": (0.0, 1.0),
    "left": (-1.0, 0.0),
}


@dataclass(frozen=True)
class BoundarySpec:
    """Label (``"Gamma0"`` or ``"Gamma"``) of each side of the rectangle."""

    left: str = GAMMA0
    right: str = GAMMA0
    bottom: str = GAMMA0
    top: str = GAMMA0

    def __post_init__(self):
        labels = [self.label(s) for s in SIDES]
        for s, lab in zip(SIDES, labels):
            if lab not in LABELS:
                raise ValueError(f"side {s!r}: unknown label {lab!r}")
        if GAMMA0 not in labels:
            raise ValueError("at least one side must be labelled Gamma0")

    def label(self, side: str) -> str:
        return getattr(self, side)

    @classmethod
    def channel(cls) -> "BoundarySpec":
        """No-slip left/right walls, friction on top and bottom."""
        return cls(left=GAMMA0, right=GAMMA0, bottom=GAMMA, top=GAMMA)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation of ``[0, Lx] x [0, Ly]``.

    ``edges`` holds boundary edges as vertex pairs ordered counter-clockwise
    around the domain; ``edge_side`` and ``edge_label`` are parallel arrays.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    edge_side: np.ndarray
    edge_label: np.ndarray
    nx: int
    ny: int
    Lx: float
    Ly: float
    spec: BoundarySpec = field(default_factory=BoundarySpec)

    @property
    def h(self) -> float:
        return float(np.hypot(self.Lx / self.nx, self.Ly / self.ny))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def area(self) -> float:
        return self.Lx * self.Ly

    @property
    def edge_normals(self) -> np.ndarray:
        return np.array([_SIDE_NORMALS[s] for s in self.edge_side], dtype=float).reshape(-1, 2)

    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def vertex_index(self, i, j):
        return np.asarray(j) * (self.nx + 1) + np.asarray(i)

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Index of a triangle containing each point (closed-set membership)."""
        pts = np.atleast_2d(points)
        dx, dy = self.Lx / self.nx, self.Ly / self.ny
        s = pts[:, 0] / dx
        t = pts[:, 1] / dy
        i = np.clip(np.floor(s).astype(np.int64), 0, self.nx - 1)
        j = np.clip(np.floor(t).astype(np.int64), 0, self.ny - 1)
        # lower-right triangle of the cell is 2*c, upper-left is 2*c+1
        upper = (t - j) > (s - i)
        return 2 * (j * self.nx + i) + upper

    def side_vertices(self, side: str) -> np.ndarray:
        """Vertices on one side, ordered by increasing coordinate."""
        nx, ny = self.nx, self.ny
        if side == "bottom":
            return self.vertex_index(np.arange(nx + 1), 0)
        if side == "top":
            return self.vertex_index(np.arange(nx + 1), ny)
        if side == "left":
            return self.vertex_index(0, np.arange(ny + 1))
        if side == "right":
            return self.vertex_index(nx, np.arange(ny + 1))
        raise ValueError(f"unknown side {side!r}")


def structured_rect_mesh(nx: int, ny: int, Lx: float = 1.0, Ly: float = 1.0) -> Mesh:
    """Rectangle mesh with ``2*nx*ny`` triangles; all sides labelled Gamma0."""
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ValueError(f"cell counts must be positive integers, got {nx}, {ny}")
    if not (Lx > 0 and Ly > 0 and np.isfinite(Lx) and np.isfinite(Ly)):
        raise ValueError(f"side lengths must be positive, got {Lx}, {Ly}")
    nx, ny = int(nx), int(ny)
    x = np.linspace(0.0, Lx, nx + 1)
    y = np.linspace(0.0, Ly, ny + 1)
    X, Y = np.meshgrid(x, y)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny))
    v0 = (jj * (nx + 1) + ii).ravel()
    v1 = v0 + 1
    v2 = v0 + nx + 2
    v3 = v0 + nx + 1
    triangles = np.empty((2 * nx * ny, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([v0, v1, v2])
    triangles[1::2] = np.column_stack([v0, v2, v3])

    edges, sides = [], []
    bi = np.arange(nx)
    bj = np.arange(ny)
    edges.append(np.column_stack([bi, bi + 1]))
    sides += ["bottom"] * nx
    r = bj * (nx + 1) + nx
    edges.append(np.column_stack([r, r + nx + 1]))
    sides += ["right"] * ny
    t = ny * (nx + 1) + bi[::-1]
    edges.append(np.column_stack([t + 1, t]))
    sides += ["top"] * nx
    left = bj[::-1] * (nx + 1)
    edges.append(np.column_stack([left + nx + 1, left]))
    sides += ["left"] * ny

    edges = np.vstack(edges).astype(np.int64)
    edge_side = np.array(sides)
    mesh = Mesh(vertices, triangles, edges, edge_side,
                np.full(len(edges), GAMMA0, dtype=object), nx, ny, float(Lx), float(Ly))
    return mesh


def tag_boundary(mesh: Mesh, spec: BoundarySpec) -> Mesh:
    """Return a copy of ``mesh`` with edge labels taken from ``spec``."""
    labels = np.array([spec.label(s) for s in mesh.edge_side], dtype=object)
    return Mesh(mesh.vertices, mesh.triangles, mesh.edges, mesh.edge_side, labels,
                mesh.nx, mesh.ny, mesh.Lx, mesh.Ly, spec)


def boundary_arclength(mesh: Mesh, label: str) -> float:
    return float(mesh.edge_lengths()[mesh.edge_label == label].sum())


def gamma0_vertices(mesh: Mesh) -> np.ndarray:
    """Sorted vertices touching at least one Gamma0 edge."""
    return np.unique(mesh.edges[mesh.edge_label == GAMMA0])
