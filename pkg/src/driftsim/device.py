"""Device description and tensor-product finite-volume meshes.

A device is an axis-aligned box (1D or 2D) tiled by material regions,
with its boundary partitioned into Dirichlet contacts, Robin segments,
and (possibly recombining) insulated remainder, plus optional interior
recombination interfaces and doping (box profiles and sheet densities on
interior hyperplanes).  All quantities are in scaled units.

``build_mesh`` produces the cell/face geometry used by the assembly
routines; every layer, interface, and sheet coordinate must land on a
grid line (within 1e-6 of the extent), otherwise a GeometryError names
the offending coordinate instead of silently moving it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import GeometryError

__all__ = [
    "MaterialRegion", "Contact", "RobinSegment", "SurfaceSegment",
    "InterfaceSpec", "BoxDoping", "SheetDoping", "DopingProfile",
    "DeviceSpec", "Mesh", "ValidationReport",
    "build_mesh", "validate_device", "sample_series",
]

Span = tuple[float, float]
TimeSeries = Union[float, tuple[tuple[float, float], ...]]

_SIDES_1D = ("left", "right")
_SIDES_2D = ("left", "right", "bottom", "top")
# side -> (axis, is_high_end)
_SIDE_AXIS = {"left": (0, False), "right": (0, True),
              "bottom": (1, False), "top": (1, True)}


def sample_series(series: TimeSeries, t: float) -> float:
    """Evaluate a constant or piecewise-linear time series, clamped at the ends."""
    if isinstance(series, (int, float)):
        return float(series)
    knots = np.asarray(series, dtype=float)
    return float(np.interp(t, knots[:, 0], knots[:, 1]))


def _series_ok(series) -> bool:
    if isinstance(series, (int, float)):
        return np.isfinite(series)
    try:
        knots = np.asarray(series, dtype=float)
    except (TypeError, ValueError):
        return False
    return (knots.ndim == 2 and knots.shape[1] == 2 and knots.shape[0] >= 1
            and bool(np.all(np.isfinite(knots)))
            and bool(np.all(np.diff(knots[:, 0]) > 0)))


def _axis_tuple(value, dim) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),) * dim
    out = tuple(float(v) for v in value)
    if len(out) != dim:
        raise GeometryError(f"per-axis value {value!r} does not match dimension {dim}")
    return out


@dataclass(frozen=True)
class MaterialRegion:
    name: str
    bounds: tuple[Span, ...]
    eps: Union[float, tuple[float, ...]] = 1.0
    mu1: Union[float, tuple[float, ...]] = 1.0
    mu2: Union[float, tuple[float, ...]] = 1.0


@dataclass(frozen=True)
class Contact:
    """Dirichlet boundary segment carrying phi and quasi-Fermi contact values.

    ``bias`` shifts phi, Phi1, and Phi2 together (a rigid contact bias);
    parameter sweeps address it as a single scalar, ramped decks can give
    it a time series like any other contact value.
    """
    side: str
    phi: TimeSeries = 0.0
    Phi1: TimeSeries = 0.0
    Phi2: TimeSeries = 0.0
    bias: TimeSeries = 0.0
    span: Span | None = None

    def values(self, t: float) -> tuple[float, float, float]:
        b = sample_series(self.bias, t)
        return (sample_series(self.phi, t) + b,
                sample_series(self.Phi1, t) + b,
                sample_series(self.Phi2, t) + b)


@dataclass(frozen=True)
class RobinSegment:
    side: str
    eps_gamma: float
    phi_gamma: TimeSeries = 0.0
    span: Span | None = None


@dataclass(frozen=True)
class SurfaceSegment:
    """Insulated boundary piece, optionally recombination-active.

    ``model`` is a surface recombination model instance (None leaves the
    stretch a plain zero-flux wall).
    """
    side: str
    model: object | None = None
    span: Span | None = None


@dataclass(frozen=True)
class InterfaceSpec:
    """Interior hyperplane x_axis = position carrying interfacial recombination."""
    axis: int
    position: float
    model: object | None = None
    span: Span | None = None


@dataclass(frozen=True)
class BoxDoping:
    bounds: tuple[Span, ...]
    value: float


@dataclass(frozen=True)
class SheetDoping:
    axis: int
    position: float
    density: float


@dataclass(frozen=True)
class DopingProfile:
    bulk: tuple[BoxDoping, ...] = ()
    sheets: tuple[SheetDoping, ...] = ()


@dataclass(frozen=True)
class DeviceSpec:
    dimension: int
    extent: tuple[float, ...]
    resolution: tuple[int, ...]
    regions: tuple[MaterialRegion, ...]
    contacts: tuple[Contact, ...] = ()
    robin: tuple[RobinSegment, ...] = ()
    surfaces: tuple[SurfaceSegment, ...] = ()
    interfaces: tuple[InterfaceSpec, ...] = ()
    doping: DopingProfile = field(default_factory=DopingProfile)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


# face boundary tags
TAG_INTERIOR = 0
TAG_DIRICHLET = 1
TAG_ROBIN = 2
TAG_NEUMANN = 3


@dataclass(frozen=True)
class Mesh:
    dimension: int
    shape: tuple[int, ...]
    extent: tuple[float, ...]
    spacing: tuple[float, ...]
    cell_centers: np.ndarray      # (n_cells, dim)
    cell_volumes: np.ndarray      # (n_cells,)
    cell_region: np.ndarray       # (n_cells,) index into device.regions
    face_axis: np.ndarray         # (n_faces,)
    face_area: np.ndarray         # (n_faces,)
    face_centers: np.ndarray      # (n_faces, dim)
    face_cells: np.ndarray        # (n_faces, 2): [low-side cell, high-side cell], -1 outside
    face_dl: np.ndarray           # center-to-face distance on the low side (0 if none)
    face_dr: np.ndarray           # center-to-face distance on the high side
    face_tag: np.ndarray          # TAG_* per face
    face_contact: np.ndarray      # contact index for Dirichlet faces, else -1
    dirichlet_faces: tuple[np.ndarray, ...]   # per contact
    robin_faces: tuple[np.ndarray, ...]       # per robin segment
    surface_faces: tuple[np.ndarray, ...]     # per surface segment
    interface_faces: tuple[np.ndarray, ...]   # per interface
    sheet_faces: tuple[np.ndarray, ...]       # per doping sheet
    cell_face_lo: np.ndarray      # (n_cells, dim): face on the low side, per axis
    cell_face_hi: np.ndarray      # (n_cells, dim): face on the high side, per axis

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n_faces(self) -> int:
        return self.face_axis.shape[0]

    def interior_mask(self) -> np.ndarray:
        return self.face_tag == TAG_INTERIOR


def _snap(coord: float, h: float, n: int, extent: float, what: str) -> int:
    idx = int(round(coord / h))
    if idx < 0 or idx > n or abs(coord - idx * h) > 1e-6 * extent:
        raise GeometryError(
            f"{what} coordinate {coord!r} does not lie on a grid line "
            f"(spacing {h!r}); refusing to move it")
    return idx


def validate_device(device: DeviceSpec) -> ValidationReport:
    """Static admissibility checks; returns every finding, raises nothing."""
    out: list[str] = []
    dim = device.dimension
    if dim not in (1, 2):
        return ValidationReport((f"dimension must be 1 or 2, got {dim}",))
    sides = _SIDES_1D if dim == 1 else _SIDES_2D
    if len(device.extent) != dim or any(e <= 0 for e in device.extent):
        out.append(f"extent must be {dim} positive lengths, got {device.extent}")
    if len(device.resolution) != dim or any(n < 1 for n in device.resolution):
        out.append(f"resolution must be {dim} positive cell counts, got {device.resolution}")
    if out:
        return ValidationReport(tuple(out))
    volume = float(np.prod(device.extent))

    if not device.regions:
        out.append("device has no material regions")
    covered = 0.0
    for i, reg in enumerate(device.regions):
        if len(reg.bounds) != dim:
            out.append(f"region {reg.name!r} bounds do not match dimension {dim}")
            continue
        v = 1.0
        for ax, (lo, hi) in enumerate(reg.bounds):
            if not (0.0 <= lo < hi <= device.extent[ax] + 1e-12 * device.extent[ax]):
                out.append(f"region {reg.name!r} axis {ax} span ({lo}, {hi}) "
                           f"leaves the domain [0, {device.extent[ax]}]")
            v *= hi - lo
        covered += v
        for coeff_name in ("eps", "mu1", "mu2"):
            vals = _axis_tuple(getattr(reg, coeff_name), dim)
            if coeff_name == "eps":
                if any((not np.isfinite(c)) or c <= 0.0 for c in vals):
                    out.append(f"region {reg.name!r} has non-elliptic eps {vals}")
            elif any((not np.isfinite(c)) or c <= 0.0 for c in vals):
                out.append(f"region {reg.name!r} has non-elliptic {coeff_name} {vals}")
        for other in device.regions[i + 1:]:
            if len(other.bounds) != dim:
                continue
            overlap = 1.0
            for (lo, hi), (lo2, hi2) in zip(reg.bounds, other.bounds):
                overlap *= max(0.0, min(hi, hi2) - max(lo, lo2))
            if overlap > 1e-12 * volume:
                out.append(f"regions {reg.name!r} and {other.name!r} overlap")
    if device.regions and abs(covered - volume) > 1e-9 * volume:
        out.append(f"regions cover volume {covered}, domain volume is {volume}")

    segments = ([("contact", c) for c in device.contacts]
                + [("robin", r) for r in device.robin]
                + [("surface", s) for s in device.surfaces])
    for kind, seg in segments:
        if seg.side not in sides:
            out.append(f"{kind} side {seg.side!r} invalid for dimension {dim}")
            continue
        if seg.span is not None:
            if dim == 1:
                out.append(f"{kind} on side {seg.side!r} carries a span in 1D")
            else:
                axis, _ = _SIDE_AXIS[seg.side]
                tangent = 1 - axis
                lo, hi = seg.span
                if not (0.0 <= lo < hi <= device.extent[tangent] + 1e-12):
                    out.append(f"{kind} span {seg.span} leaves side {seg.side!r}")
    for i, (kind, seg) in enumerate(segments):
        for kind2, seg2 in segments[i + 1:]:
            if seg.side != seg2.side or seg.side not in sides:
                continue
            if dim == 1:
                out.append(f"side {seg.side!r} claimed by both a {kind} and a {kind2}")
            else:
                axis, _ = _SIDE_AXIS[seg.side]
                full = (0.0, device.extent[1 - axis])
                lo1, hi1 = seg.span or full
                lo2, hi2 = seg2.span or full
                if min(hi1, hi2) - max(lo1, lo2) > 1e-12:
                    out.append(f"{kind} and {kind2} segments overlap on side {seg.side!r}")

    for r in device.robin:
        if not np.isfinite(r.eps_gamma) or r.eps_gamma < 0.0:
            out.append(f"robin segment on {r.side!r} has negative capacity "
                       f"eps_gamma = {r.eps_gamma}")
        if not _series_ok(r.phi_gamma):
            out.append(f"robin segment on {r.side!r} has a malformed phi_gamma series")
    if not device.contacts and not any(r.eps_gamma > 0.0 for r in device.robin):
        out.append("no Dirichlet contact and no positive Robin capacity: "
                   "the electrostatic problem is not coercive")
    for c in device.contacts:
        for name in ("phi", "Phi1", "Phi2", "bias"):
            if not _series_ok(getattr(c, name)):
                out.append(f"contact on {c.side!r} has a malformed {name} series")

    for itf in device.interfaces:
        if not (0 <= itf.axis < dim):
            out.append(f"interface axis {itf.axis} invalid for dimension {dim}")
            continue
        if not (0.0 < itf.position < device.extent[itf.axis]):
            out.append(f"interface at {itf.position} on axis {itf.axis} "
                       f"is not strictly interior")
    for box in device.doping.bulk:
        if len(box.bounds) != dim:
            out.append(f"doping box bounds {box.bounds} do not match dimension")
        if not np.isfinite(box.value):
            out.append("doping box value is not finite")
    for sheet in device.doping.sheets:
        if not (0 <= sheet.axis < dim):
            out.append(f"sheet doping axis {sheet.axis} invalid")
        elif not (0.0 < sheet.position < device.extent[sheet.axis]):
            out.append(f"sheet doping at {sheet.position} is not strictly interior")
        if not np.isfinite(sheet.density):
            out.append("sheet doping density is not finite")

    return ValidationReport(tuple(out))


def build_mesh(device: DeviceSpec) -> Mesh:
    """Uniform tensor-product cell-centered mesh for the device."""
    dim = device.dimension
    shape = tuple(int(n) for n in device.resolution)
    extent = tuple(float(e) for e in device.extent)
    h = tuple(e / n for e, n in zip(extent, shape))
    nx = shape[0]
    ny = shape[1] if dim == 2 else 1

    # cells, x-fastest ordering
    ix = np.arange(nx)
    if dim == 1:
        centers = (ix[:, None] + 0.5) * h[0]
        volumes = np.full(nx, h[0])
    else:
        iy = np.arange(ny)
        cx, cy = np.meshgrid((ix + 0.5) * h[0], (iy + 0.5) * h[1], indexing="xy")
        centers = np.column_stack([cx.ravel(), cy.ravel()])
        volumes = np.full(nx * ny, h[0] * h[1])
    n_cells = centers.shape[0]

    def cell_index(i, j=0):
        return i + nx * j

    # region lookup by cell center; every bound must sit on a grid line
    for reg in device.regions:
        for ax, (lo, hi) in enumerate(reg.bounds):
            _snap(lo, h[ax], shape[ax], extent[ax], f"region {reg.name!r}")
            _snap(hi, h[ax], shape[ax], extent[ax], f"region {reg.name!r}")
    region_of = np.full(n_cells, -1, dtype=int)
    for r, reg in enumerate(device.regions):
        inside = np.ones(n_cells, dtype=bool)
        for ax, (lo, hi) in enumerate(reg.bounds):
            inside &= (centers[:, ax] > lo) & (centers[:, ax] < hi)
        if np.any(region_of[inside] >= 0):
            raise GeometryError(f"region {reg.name!r} overlaps another region")
        region_of[inside] = r
    if np.any(region_of < 0):
        missing = int(np.argwhere(region_of < 0).ravel()[0])
        raise GeometryError(
            f"cell at {tuple(np.atleast_1d(centers[missing]))} belongs to no region")

    # faces: all x-normal faces first, then y-normal
    rows_ax, rows_area, rows_center = [], [], []
    rows_cells, rows_dl, rows_dr = [], [], []
    if dim == 1:
        fx = np.arange(nx + 1)
        rows_ax.append(np.zeros(nx + 1, dtype=int))
        rows_area.append(np.ones(nx + 1))
        rows_center.append((fx * h[0])[:, None])
        lo_cell = np.where(fx > 0, fx - 1, -1)
        hi_cell = np.where(fx < nx, fx, -1)
        rows_cells.append(np.column_stack([lo_cell, hi_cell]))
        rows_dl.append(np.where(lo_cell >= 0, 0.5 * h[0], 0.0))
        rows_dr.append(np.where(hi_cell >= 0, 0.5 * h[0], 0.0))
    else:
        # x-normal: (nx+1) x ny
        fx, fy = np.meshgrid(np.arange(nx + 1), np.arange(ny), indexing="xy")
        fx, fy = fx.ravel(), fy.ravel()
        rows_ax.append(np.zeros(fx.size, dtype=int))
        rows_area.append(np.full(fx.size, h[1]))
        rows_center.append(np.column_stack([fx * h[0], (fy + 0.5) * h[1]]))
        lo_cell = np.where(fx > 0, cell_index(fx - 1, fy), -1)
        hi_cell = np.where(fx < nx, cell_index(np.minimum(fx, nx - 1), fy), -1)
        rows_cells.append(np.column_stack([lo_cell, hi_cell]))
        rows_dl.append(np.where(lo_cell >= 0, 0.5 * h[0], 0.0))
        rows_dr.append(np.where(hi_cell >= 0, 0.5 * h[0], 0.0))
        # y-normal: nx x (ny+1)
        gx, gy = np.meshgrid(np.arange(nx), np.arange(ny + 1), indexing="xy")
        gx, gy = gx.ravel(), gy.ravel()
        rows_ax.append(np.ones(gx.size, dtype=int))
        rows_area.append(np.full(gx.size, h[0]))
        rows_center.append(np.column_stack([(gx + 0.5) * h[0], gy * h[1]]))
        lo_cell = np.where(gy > 0, cell_index(gx, gy - 1), -1)
        hi_cell = np.where(gy < ny, cell_index(gx, np.minimum(gy, ny - 1)), -1)
        rows_cells.append(np.column_stack([lo_cell, hi_cell]))
        rows_dl.append(np.where(lo_cell >= 0, 0.5 * h[1], 0.0))
        rows_dr.append(np.where(hi_cell >= 0, 0.5 * h[1], 0.0))

    face_axis = np.concatenate(rows_ax)
    face_area = np.concatenate(rows_area)
    face_centers = np.vstack(rows_center)
    face_cells = np.vstack(rows_cells)
    face_dl = np.concatenate(rows_dl)
    face_dr = np.concatenate(rows_dr)
    n_faces = face_axis.size

    boundary = (face_cells[:, 0] < 0) | (face_cells[:, 1] < 0)
    face_tag = np.where(boundary, TAG_NEUMANN, TAG_INTERIOR).astype(int)
    face_contact = np.full(n_faces, -1, dtype=int)

    def side_faces(side: str, span: Span | None) -> np.ndarray:
        axis, high = _SIDE_AXIS[side]
        if axis >= dim:
            raise GeometryError(f"side {side!r} invalid in {dim}D")
        coord = extent[axis] if high else 0.0
        sel = (face_axis == axis) & boundary & \
              (np.abs(face_centers[:, axis] - coord) < 1e-12 * max(extent))
        if span is not None and dim == 2:
            tangent = 1 - axis
            lo, hi = span
            _snap(lo, h[tangent], shape[tangent], extent[tangent], f"segment on {side!r}")
            _snap(hi, h[tangent], shape[tangent], extent[tangent], f"segment on {side!r}")
            c = face_centers[:, tangent]
            sel &= (c > lo) & (c < hi)
        return np.flatnonzero(sel)

    dirichlet_faces = []
    for ci, c in enumerate(device.contacts):
        faces = side_faces(c.side, c.span)
        if np.any(face_tag[faces] != TAG_NEUMANN):
            raise GeometryError(f"contact on {c.side!r} overlaps another segment")
        face_tag[faces] = TAG_DIRICHLET
        face_contact[faces] = ci
        dirichlet_faces.append(faces)
    robin_faces = []
    for r in device.robin:
        faces = side_faces(r.side, r.span)
        if np.any(face_tag[faces] != TAG_NEUMANN):
            raise GeometryError(f"robin segment on {r.side!r} overlaps another segment")
        face_tag[faces] = TAG_ROBIN
        robin_faces.append(faces)
    surface_faces = []
    for seg in device.surfaces:
        faces = side_faces(seg.side, seg.span)
        if np.any(face_tag[faces] != TAG_NEUMANN):
            raise GeometryError(f"surface segment on {seg.side!r} overlaps another segment")
        surface_faces.append(faces)

    def hyperplane_faces(axis: int, position: float, span: Span | None,
                         what: str) -> np.ndarray:
        idx = _snap(position, h[axis], shape[axis], extent[axis], what)
        if idx == 0 or idx == shape[axis]:
            raise GeometryError(f"{what} at {position!r} lies on the boundary")
        sel = (face_axis == axis) & ~boundary & \
              (np.abs(face_centers[:, axis] - idx * h[axis]) < 0.5 * h[axis])
        if span is not None and dim == 2:
            tangent = 1 - axis
            lo, hi = span
            _snap(lo, h[tangent], shape[tangent], extent[tangent], what)
            _snap(hi, h[tangent], shape[tangent], extent[tangent], what)
            c = face_centers[:, tangent]
            sel &= (c > lo) & (c < hi)
        return np.flatnonzero(sel)

    interface_faces = [hyperplane_faces(i.axis, i.position, i.span, "interface")
                       for i in device.interfaces]
    sheet_faces = [hyperplane_faces(s.axis, s.position, None, "sheet doping")
                   for s in device.doping.sheets]

    cell_face_lo = np.full((n_cells, dim), -1, dtype=int)
    cell_face_hi = np.full((n_cells, dim), -1, dtype=int)
    fids = np.arange(n_faces)
    has_hi = face_cells[:, 1] >= 0
    has_lo = face_cells[:, 0] >= 0
    cell_face_lo[face_cells[has_hi, 1], face_axis[has_hi]] = fids[has_hi]
    cell_face_hi[face_cells[has_lo, 0], face_axis[has_lo]] = fids[has_lo]

    return Mesh(
        dimension=dim, shape=shape, extent=extent, spacing=h,
        cell_centers=centers, cell_volumes=volumes, cell_region=region_of,
        face_axis=face_axis, face_area=face_area, face_centers=face_centers,
        face_cells=face_cells, face_dl=face_dl, face_dr=face_dr,
        face_tag=face_tag, face_contact=face_contact,
        dirichlet_faces=tuple(dirichlet_faces),
        robin_faces=tuple(robin_faces),
        surface_faces=tuple(surface_faces),
        interface_faces=tuple(interface_faces),
        sheet_faces=tuple(sheet_faces),
        cell_face_lo=cell_face_lo,
        cell_face_hi=cell_face_hi,
    )


def cell_tensor(device: DeviceSpec, mesh: Mesh, name: str) -> np.ndarray:
    """Per-cell diagonal coefficient tensor (n_cells, dim) for eps/mu1/mu2."""
    dim = device.dimension
    out = np.empty((mesh.n_cells, dim))
    for r, reg in enumerate(device.regions):
        out[mesh.cell_region == r] = _axis_tuple(getattr(reg, name), dim)
    return out


def bulk_doping(device: DeviceSpec, mesh: Mesh) -> np.ndarray:
    """Cellwise volume doping d evaluated at cell centers (boxes add up)."""
    d = np.zeros(mesh.n_cells)
    for box in device.doping.bulk:
        inside = np.ones(mesh.n_cells, dtype=bool)
        for ax, (lo, hi) in enumerate(box.bounds):
            inside &= (mesh.cell_centers[:, ax] > lo) & (mesh.cell_centers[:, ax] < hi)
        d[inside] += box.value
    return d
