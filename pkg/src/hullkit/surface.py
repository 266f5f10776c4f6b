"""Hull surface evaluation and point-cloud generation.

Coordinate frame: x runs aft->forward in [0, loa], y is the starboard
half-beam (>= 0), z runs keel-up in [0, depth]; the waterline of a floating
condition sits at z = draft.  A HullSurface is immutable and safe to share
across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _geom, names
from .errors import DomainError, InfeasibleHullError
from .params import HullParameters, check_feasibility


@dataclass(frozen=True)
class PointCloud:
    """Surface sample points with the grid metadata that produced them."""

    points: np.ndarray  # (N, 3)
    nx: int = 0
    nz: int = 0
    clip_draft: float | None = None
    mirrored: bool = False
    loa: float = 0.0

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise DomainError("point cloud must be an (N, 3) array")
        if not np.all(np.isfinite(pts)):
            raise DomainError("point cloud contains non-finite coordinates")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    @property
    def x_extent(self) -> float:
        return float(self.points[:, 0].max() - self.points[:, 0].min())

    def translated(self, offset) -> "PointCloud":
        return PointCloud(self.points + np.asarray(offset, dtype=float),
                          self.nx, self.nz, self.clip_draft, self.mirrored, self.loa)

    def scaled(self, factor: float) -> "PointCloud":
        return PointCloud(self.points * float(factor),
                          self.nx, self.nz, self.clip_draft, self.mirrored, self.loa)


class HullSurface:
    """Algebraic half-beam evaluator for one feasible parameter vector."""

    def __init__(self, params: HullParameters, check: bool = True):
        if not isinstance(params, HullParameters):
            params = HullParameters(params)
        if check:
            report = check_feasibility(params)
            if not report.feasible:
                bad = ", ".join(c.name for c in report.violated[:4])
                raise InfeasibleHullError(
                    f"parameters are infeasible ({bad}); run check_feasibility "
                    "for the full constraint report"
                )
        self.params = params
        unit = params.values.copy()
        unit[names.I_LOA] = 1.0
        self._r = _geom.resolve(unit)
        self.loa = params.loa
        self.beam = params["beam_deck_frac"] * self.loa
        self.depth = params["depth_frac"] * self.loa
        self.design_draft = params["design_draft_frac"] * self.depth

    # ------------------------------------------------------------------ #
    def offsets(self, x, z):
        """Half-beam at (x, z) in metres; 0 outside the profile, no checks."""
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        return self.loa * self._r.half_beam(x / self.loa, z / self.loa)

    def half_beam(self, x, z) -> float | np.ndarray:
        """Half-beam with domain validation: 0 <= x <= loa, 0 <= z <= depth."""
        xa = np.asarray(x, dtype=float)
        za = np.asarray(z, dtype=float)
        if np.any(xa < 0) or np.any(xa > self.loa):
            raise DomainError(f"x outside [0, {self.loa}]")
        if np.any(za < 0) or np.any(za > self.depth):
            raise DomainError(f"z outside [0, {self.depth}]")
        y = self.offsets(xa, za)
        return float(y) if np.isscalar(x) and np.isscalar(z) else y

    def envelope(self, z):
        """(x_lo, x_hi) extent of hull material at height z, in metres."""
        z = np.asarray(z, dtype=float)
        lo, hi = self._r.envelope(z / self.loa)
        return lo * self.loa, hi * self.loa

    def waterline_length(self, draft: float, tol_frac: float = 1e-6) -> float:
        """Extent in x where the hull has width at z = draft, by bisection."""
        if not 0.0 < draft <= self.depth:
            raise DomainError(f"draft {draft} outside (0, {self.depth}]")
        tol = tol_frac * self.loa
        lo_env, hi_env = (float(v) for v in self.envelope(np.asarray(draft)))

        def has_width(x):
            return self.offsets(np.asarray(x), np.asarray(draft)) > 0.0

        # the envelope bounds are exact for the bare hull; bisection refines
        # against the actual offsets so bulb extensions are honoured too
        a, b = lo_env - tol, hi_env + tol
        mid = 0.5 * (a + b)
        if not has_width(mid):
            return max(hi_env - lo_env, 0.0)
        x_lo, x_hi = a, mid
        while x_hi - x_lo > tol:
            m = 0.5 * (x_lo + x_hi)
            if has_width(m):
                x_hi = m
            else:
                x_lo = m
        fwd_lo, fwd_hi = mid, b
        while fwd_hi - fwd_lo > tol:
            m = 0.5 * (fwd_lo + fwd_hi)
            if has_width(m):
                fwd_lo = m
            else:
                fwd_hi = m
        return max(fwd_lo - x_hi, 0.0)

    # ------------------------------------------------------------------ #
    def station_grid(self, nx: int, nz: int, z_top: float | None = None):
        """Envelope-following station grid: x[j, i], z[j], y[j, i]."""
        if nx < 2 or nz < 2:
            raise DomainError("nx and nz must both be >= 2")
        z_top = self.depth if z_top is None else float(z_top)
        z = np.linspace(0.0, z_top, nz)
        lo, hi = self.envelope(z)
        u = np.linspace(0.0, 1.0, nx)
        x = lo[:, None] + (hi - lo)[:, None] * u[None, :]
        y = self.offsets(x, z[:, None])
        # boundary stations are analytically zero; snap float residue so the
        # mirrored mesh welds exactly along the centerplane
        y[y < 1e-9 * self.loa] = 0.0
        return x, z, y


class WigleySurface:
    """Parabolic benchmark hull: Y = (B/2)(1-(2x'/L)^2)(1-((T-z)/T)^2).

    Duck-types the parts of HullSurface that meshing and hydrostatics use;
    depth equals the design draft T.
    """

    def __init__(self, length: float = 100.0, beam: float = 10.0, draft: float = 6.25):
        if min(length, beam, draft) <= 0:
            raise DomainError("Wigley dimensions must be positive")
        self.loa = float(length)
        self.beam = float(beam)
        self.depth = float(draft)
        self.design_draft = float(draft)

    def offsets(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        xi = 2.0 * (x - 0.5 * self.loa) / self.loa
        zeta = (self.depth - z) / self.depth
        y = 0.5 * self.beam * (1.0 - xi**2) * (1.0 - zeta**2)
        return np.maximum(y, 0.0)

    def half_beam(self, x, z):
        xa, za = np.asarray(x, float), np.asarray(z, float)
        if np.any(xa < 0) or np.any(xa > self.loa) or np.any(za < 0) or np.any(za > self.depth):
            raise DomainError("query outside the Wigley envelope")
        return self.offsets(xa, za)

    def envelope(self, z):
        z = np.asarray(z, dtype=float)
        return np.zeros_like(z), np.full_like(z, self.loa)

    def waterline_length(self, draft: float, tol_frac: float = 1e-6) -> float:
        if not 0.0 < draft <= self.depth:
            raise DomainError("draft outside (0, depth]")
        return self.loa

    def station_grid(self, nx: int, nz: int, z_top: float | None = None):
        if nx < 2 or nz < 2:
            raise DomainError("nx and nz must both be >= 2")
        z_top = self.depth if z_top is None else float(z_top)
        z = np.linspace(0.0, z_top, nz)
        x = np.broadcast_to(np.linspace(0.0, self.loa, nx), (nz, nx)).copy()
        y = self.offsets(x, z[:, None])
        return x, z, y


def generate_point_cloud(
    surface,
    nx: int,
    nz: int,
    clip_draft: float | None = None,
    mirror: bool = False,
) -> PointCloud:
    """Evenly spaced surface stations: nx per waterline, nz waterlines.

    Returns nx*nz points for one side (doubled when mirrored across the
    centerplane).  With clip_draft the grid spans z in [0, clip_draft].
    """
    if clip_draft is not None and not 0.0 < clip_draft <= surface.depth:
        raise DomainError(f"clip_draft {clip_draft} outside (0, depth]")
    x, z, y = surface.station_grid(nx, nz, z_top=clip_draft)
    zz = np.broadcast_to(z[:, None], x.shape)
    pts = np.column_stack([x.ravel(), y.ravel(), zz.ravel()])
    if mirror:
        mirrored = pts * np.array([1.0, -1.0, 1.0])
        pts = np.vstack([pts, mirrored])
    return PointCloud(points=pts, nx=nx, nz=nz, clip_draft=clip_draft,
                      mirrored=mirror, loa=surface.loa)
