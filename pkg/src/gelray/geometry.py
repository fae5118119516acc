"""Triangle meshes, heightfields, and the Wavefront OBJ loader.

Meshes carry per-vertex shading normals; heightfields tessellate into
meshes whose shading normals come from the analytic grid gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import read_pfm


class MeshError(ValueError):
    """Raised for malformed mesh input (OBJ records, bad indices)."""


@dataclass
class TriangleMesh:
    """Indexed triangle mesh in world coordinates (mm).

    vertices: (nv, 3) float64; indices: (nt, 3) int32;
    normals: (nv, 3) per-vertex shading normals (unit).
    """

    vertices: np.ndarray
    indices: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=np.float64))
        self.indices = np.atleast_2d(np.asarray(self.indices, dtype=np.int32))
        if self.indices.size and self.indices.max() >= len(self.vertices):
            raise MeshError("triangle index out of range")
        if self.normals is None:
            self.normals = vertex_normals(self.vertices, self.indices)
        else:
            self.normals = np.atleast_2d(np.asarray(self.normals, dtype=np.float64))

    @property
    def n_triangles(self) -> int:
        return len(self.indices)

    def transformed(self, offset=(0.0, 0.0, 0.0), scale=1.0) -> "TriangleMesh":
        v = self.vertices * scale + np.asarray(offset, dtype=np.float64)
        return TriangleMesh(v, self.indices.copy(), self.normals.copy())

    def face_areas(self) -> np.ndarray:
        v = self.vertices
        i = self.indices
        e1 = v[i[:, 1]] - v[i[:, 0]]
        e2 = v[i[:, 2]] - v[i[:, 0]]
        return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)


def face_normals(vertices: np.ndarray, indices: np.ndarray) -> np.ndarray:
    e1 = vertices[indices[:, 1]] - vertices[indices[:, 0]]
    e2 = vertices[indices[:, 2]] - vertices[indices[:, 0]]
    n = np.cross(e1, e2)
    length = np.linalg.norm(n, axis=1, keepdims=True)
    length[length == 0] = 1.0
    return n / length


def vertex_normals(vertices: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Area-weighted average of adjacent face normals per vertex."""
    e1 = vertices[indices[:, 1]] - vertices[indices[:, 0]]
    e2 = vertices[indices[:, 2]] - vertices[indices[:, 0]]
    fn = np.cross(e1, e2)  # area-weighted (unnormalized cross product)
    vn = np.zeros_like(vertices)
    for k in range(3):
        np.add.at(vn, indices[:, k], fn)
    length = np.linalg.norm(vn, axis=1, keepdims=True)
    length[length == 0] = 1.0
    return vn / length


def drop_degenerate(vertices: np.ndarray, indices: np.ndarray, eps: float = 1e-12):
    """Remove zero-area triangles after load."""
    e1 = vertices[indices[:, 1]] - vertices[indices[:, 0]]
    e2 = vertices[indices[:, 2]] - vertices[indices[:, 0]]
    area2 = np.linalg.norm(np.cross(e1, e2), axis=1)
    return indices[area2 > eps]


@dataclass
class HeightField:
    """Regular grid of surface heights.

    heights[i, j] is the height (mm) at x = origin[0] + i*pitch,
    y = origin[1] + j*pitch; z = origin[2] + heights[i, j].
    """

    pitch: float
    origin: tuple = (0.0, 0.0, 0.0)
    heights: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self):
        self.heights = np.asarray(self.heights, dtype=np.float64)
        if self.heights.ndim != 2:
            raise ValueError("heights must be a 2-D array")
        if self.pitch <= 0:
            raise ValueError("pitch must be positive")
        if not np.all(np.isfinite(self.heights)):
            raise ValueError("heights must be finite")

    @property
    def nx(self) -> int:
        return self.heights.shape[0]

    @property
    def ny(self) -> int:
        return self.heights.shape[1]

    def cell_position(self, i, j) -> np.ndarray:
        ox, oy, oz = self.origin
        return np.array([ox + i * self.pitch, oy + j * self.pitch, oz + self.heights[i, j]])

    def grid_xy(self):
        ox, oy, _ = self.origin
        xs = ox + np.arange(self.nx) * self.pitch
        ys = oy + np.arange(self.ny) * self.pitch
        return xs, ys


def heightfield_from_pfm(path, pitch: float, origin=(0.0, 0.0, 0.0)) -> HeightField:
    """Load grid heights from PFM; color files use the R channel, values in mm.

    The PFM raster is (ny rows, nx cols); heights are stored transposed so
    heights[i, j] indexes x then y.
    """
    data = read_pfm(path)
    if data.ndim == 3:
        data = data[:, :, 0]
    return HeightField(pitch=pitch, origin=origin, heights=data.T.astype(np.float64))


def heightfield_to_pfm_raster(hf: HeightField) -> np.ndarray:
    """Single-channel (ny, nx) float32 raster for write_pfm."""
    return hf.heights.T.astype(np.float32)


def gradient_normals(hf: HeightField, facing: int) -> np.ndarray:
    """Per-grid-vertex shading normals from the central-difference gradient.

    facing=-1 points normals toward -z (camera below the gel), +1 toward +z.
    """
    dhdx, dhdy = np.gradient(hf.heights, hf.pitch)
    if facing < 0:
        n = np.stack([dhdx, dhdy, -np.ones_like(dhdx)], axis=-1)
    else:
        n = np.stack([-dhdx, -dhdy, np.ones_like(dhdx)], axis=-1)
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    return n


def tessellate_heightfield(hf: HeightField, facing: int = -1) -> TriangleMesh:
    """Tessellate a heightfield into 2*(nx-1)*(ny-1) triangles.

    Winding is chosen so geometric normals face `facing` (*z); shading
    normals are the analytic grid-gradient normals.
    """
    nx, ny = hf.nx, hf.ny
    if nx < 2 or ny < 2:
        raise ValueError("heightfield must be at least 2x2")
    xs, ys = hf.grid_xy()
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    verts = np.stack([xx, yy, hf.origin[2] + hf.heights], axis=-1).reshape(-1, 3)

    ii, jj = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="ij")
    v00 = (ii * ny + jj).ravel()
    v10 = ((ii + 1) * ny + jj).ravel()
    v01 = (ii * ny + jj + 1).ravel()
    v11 = ((ii + 1) * ny + jj + 1).ravel()
    if facing < 0:
        tris = np.concatenate(
            [np.stack([v00, v10, v11], axis=1), np.stack([v00, v11, v01], axis=1)]
        )
    else:
        tris = np.concatenate(
            [np.stack([v00, v11, v10], axis=1), np.stack([v00, v01, v11], axis=1)]
        )
    normals = gradient_normals(hf, facing).reshape(-1, 3)
    return TriangleMesh(verts, tris.astype(np.int32), normals)


def load_obj(path) -> TriangleMesh:
    """Load a Wavefront OBJ (v/vn/f records); polygons are fan-triangulated.

    Vertex normals missing from the file are computed per vertex.
    """
    vertices = []
    file_normals = []
    faces = []  # list of [(vi, ni|None), ...]
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            kind = parts[0]
            try:
                if kind == "v":
                    vertices.append([float(x) for x in parts[1:4]])
                elif kind == "vn":
                    file_normals.append([float(x) for x in parts[1:4]])
                elif kind == "f":
                    corners = []
                    for spec in parts[1:]:
                        fields = spec.split("/")
                        vi = int(fields[0])
                        ni = int(fields[2]) if len(fields) >= 3 and fields[2] else None
                        corners.append((vi, ni))
                    if len(corners) < 3:
                        raise MeshError(f"{path}:{lineno}: face with fewer than 3 vertices")
                    faces.append(corners)
            except (ValueError, IndexError) as e:
                raise MeshError(f"{path}:{lineno}: malformed {kind!r} record: {e}") from e

    def resolve(idx: int, count: int, lineno_hint: str) -> int:
        if idx == 0:
            raise MeshError(f"{path}: {lineno_hint}: OBJ indices are 1-based, found 0")
        r = idx - 1 if idx > 0 else count + idx
        if not 0 <= r < count:
            raise MeshError(f"{path}: {lineno_hint}: index {idx} out of range (count {count})")
        return r

    tri_idx = []
    tri_nidx = []
    for corners in faces:
        rc = [
            (resolve(vi, len(vertices), "face"), resolve(ni, len(file_normals), "face normal") if ni else -1)
            for vi, ni in corners
        ]
        for k in range(1, len(rc) - 1):  # fan triangulation
            tri_idx.append([rc[0][0], rc[k][0], rc[k + 1][0]])
            tri_nidx.append([rc[0][1], rc[k][1], rc[k + 1][1]])

    if not vertices or not tri_idx:
        raise MeshError(f"{path}: no geometry found")
    verts = np.asarray(vertices, dtype=np.float64)
    idx = np.asarray(tri_idx, dtype=np.int32)
    idx = drop_degenerate(verts, idx)

    nidx = np.asarray(tri_nidx, dtype=np.int64)
    if file_normals and np.all(nidx >= 0) and len(idx) == len(nidx):
        # normals supplied per corner; average per vertex position
        fn = np.asarray(file_normals, dtype=np.float64)
        vn = np.zeros_like(verts)
        cnt = np.zeros(len(verts))
        for t, tn in zip(np.asarray(tri_idx), nidx):
            for c in range(3):
                vn[t[c]] += fn[tn[c]]
                cnt[t[c]] += 1
        cnt[cnt == 0] = 1
        vn /= cnt[:, None]
        length = np.linalg.norm(vn, axis=1, keepdims=True)
        length[length == 0] = 1.0
        return TriangleMesh(verts, idx, vn / length)
    return TriangleMesh(verts, idx)


def make_quad(center, edge_u, edge_v) -> TriangleMesh:
    """Rectangle from center and half-edge vectors; normal = edge_u x edge_v."""
    c = np.asarray(center, dtype=np.float64)
    u = np.asarray(edge_u, dtype=np.float64)
    v = np.asarray(edge_v, dtype=np.float64)
    verts = np.array([c - u - v, c + u - v, c + u + v, c - u + v])
    idx = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)
    return TriangleMesh(verts, idx)


def make_sphere(center, radius: float, n_theta: int = 24, n_phi: int = 48,
                flip: bool = False) -> TriangleMesh:
    """UV sphere mesh. flip=True turns normals inward (enclosing emitter)."""
    c = np.asarray(center, dtype=np.float64)
    thetas = np.linspace(0.0, np.pi, n_theta + 1)
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    verts = [c + np.array([0.0, 0.0, radius])]
    for t in thetas[1:-1]:
        st, ct = np.sin(t), np.cos(t)
        for p in phis:
            verts.append(c + radius * np.array([st * np.cos(p), st * np.sin(p), ct]))
    verts.append(c + np.array([0.0, 0.0, -radius]))
    verts = np.asarray(verts)

    idx = []
    top, bottom = 0, len(verts) - 1
    ring = lambda r, k: 1 + r * n_phi + (k % n_phi)
    for k in range(n_phi):
        idx.append([top, ring(0, k), ring(0, k + 1)])
    for r in range(n_theta - 2):
        for k in range(n_phi):
            a, b = ring(r, k), ring(r, k + 1)
            d, e = ring(r + 1, k), ring(r + 1, k + 1)
            idx.append([a, d, e])
            idx.append([a, e, b])
    for k in range(n_phi):
        idx.append([bottom, ring(n_theta - 2, k + 1), ring(n_theta - 2, k)])
    idx = np.asarray(idx, dtype=np.int32)
    if flip:
        idx = idx[:, [0, 2, 1]]
    nrm = (verts - c) / radius
    if flip:
        nrm = -nrm
    return TriangleMesh(verts, idx, nrm)


def make_box(lo, hi, inward: bool = False) -> TriangleMesh:
    """Axis-aligned box as 12 triangles; inward=True flips faces inside."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    v = np.array([
        [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
        [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
    ])
    quads = [
        (0, 3, 2, 1),  # bottom (-z out)
        (4, 5, 6, 7),  # top
        (0, 1, 5, 4),  # -y
        (2, 3, 7, 6),  # +y
        (0, 4, 7, 3),  # -x
        (1, 2, 6, 5),  # +x
    ]
    idx = []
    for a, b, c, d in quads:
        idx.append([a, b, c])
        idx.append([a, c, d])
    idx = np.asarray(idx, dtype=np.int32)
    if inward:
        idx = idx[:, [0, 2, 1]]
    verts = v
    # split vertices per face so normals stay flat
    flat_v = verts[idx.ravel()]
    flat_i = np.arange(len(flat_v), dtype=np.int32).reshape(-1, 3)
    return TriangleMesh(flat_v, flat_i)
