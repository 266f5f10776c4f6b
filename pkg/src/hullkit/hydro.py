"""Thin-ship wave resistance, ITTC friction, and the 32-condition drag table.

Wave resistance of the half hull with centerplane offsets Y(x, z):

    Rw = (4 rho g^2) / (pi U^2) * int_1^inf (I^2 + J^2) lam^2 / sqrt(lam^2-1) dlam
    I + iJ = integral over the submerged centerplane of
             dY/dx * exp(k0 lam^2 z) * exp(i k0 lam x) dx dz,   k0 = g / U^2

The lambda integral is evaluated after the substitution lam = cosh(t), which
removes the square-root singularity exactly (the weight becomes cosh^2 t),
with composite Simpson panels in t and the upper limit truncated where the
exponential depth factor drops below 1e-12 for the shallowest grid depth.
Inner x/z integrals use the trapezoidal rule on the even offset grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .mesh import wetted_surface_area

GRAVITY = 9.81
RHO_SEAWATER = 1025.0
NU_SEAWATER = 1.19e-6

DRAFT_FRACTIONS = (0.25, 0.33, 0.50, 0.67)
# eight speeds per draft; 4 x 8 = 32 conditions
FROUDE_NUMBERS = (0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45)


@dataclass(frozen=True)
class FlowConditions:
    speed: float                      # ship speed U, m/s
    draft: float                      # draft T, m
    rho: float = RHO_SEAWATER         # water density, kg/m^3
    gravity: float = GRAVITY          # m/s^2
    nu: float = NU_SEAWATER           # kinematic viscosity, m^2/s

    def __post_init__(self):
        for name in ("speed", "draft", "rho", "gravity", "nu"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")


@dataclass
class OffsetGrid:
    """Half-beam offsets over the submerged centerplane, z in [-T, 0]."""

    x: np.ndarray        # (Nx,) evenly spaced
    z: np.ndarray        # (Nz,) evenly spaced, -T .. 0
    y: np.ndarray        # (Nx, Nz) offsets >= 0
    dydx: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.ascontiguousarray(self.x, dtype=float)
        self.z = np.ascontiguousarray(self.z, dtype=float)
        self.y = np.ascontiguousarray(self.y, dtype=float)
        if self.x.size < 3 or self.z.size < 3:
            raise DomainError("offset grid needs at least 3 stations per axis")
        if self.y.shape != (self.x.size, self.z.size):
            raise DomainError("offset array shape must be (Nx, Nz)")
        if not (np.all(np.isfinite(self.y)) and np.all(self.y >= 0.0)):
            raise DomainError("offsets must be finite and non-negative")
        for axis in (self.x, self.z):
            steps = np.diff(axis)
            if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * abs(steps[0]) + 1e-15:
                raise DomainError("grid axes must be strictly increasing and even")
        if self.dydx is None:
            self.dydx = np.gradient(self.y, self.x, axis=0)
        else:
            self.dydx = np.ascontiguousarray(self.dydx, dtype=float)
            if self.dydx.shape != self.y.shape:
                raise DomainError("dydx shape must match offsets")

    @property
    def draft(self) -> float:
        return float(-self.z[0])


def offsets_from_surface(surface, draft: float, nx: int = 301, nz: int = 51) -> OffsetGrid:
    """Rectangular offset grid of the hull below `draft` (zeros off-hull)."""
    if not 0.0 < draft <= surface.depth:
        raise DomainError(f"draft {draft} outside (0, depth]")
    z_geom = np.linspace(0.0, draft, nz)
    lo, hi = surface.envelope(z_geom)
    x = np.linspace(float(np.min(lo)), float(np.max(hi)), nx)
    y = surface.offsets(x[:, None], z_geom[None, :])
    return OffsetGrid(x=x, z=z_geom - draft, y=y)


def wigley_offsets(beam: float, length: float, draft: float,
                   nx: int = 301, nz: int = 51,
                   full_draft: float | None = None) -> OffsetGrid:
    """Analytic Wigley offsets with exact dY/dx.

    `full_draft` is the hull's design draft; pass a smaller `draft` to clip
    the grid to a shallower floating condition.
    """
    if min(beam, length, draft) <= 0:
        raise DomainError("Wigley dimensions must be positive")
    T_full = draft if full_draft is None else float(full_draft)
    if not 0.0 < draft <= T_full:
        raise DomainError("draft must lie in (0, full_draft]")
    x = np.linspace(0.0, length, nx)
    z = np.linspace(-draft, 0.0, nz)
    xi = 2.0 * (x - 0.5 * length) / length
    # z is measured from the actual waterline; depth below the design
    # waterline is (T_full - draft) - z_geometry
    z_design = z - (T_full - draft)
    shape_z = 1.0 - (z_design / T_full) ** 2
    y = 0.5 * beam * np.maximum(1.0 - xi**2, 0.0)[:, None] * np.maximum(shape_z, 0.0)[None, :]
    dydx = 0.5 * beam * (-8.0 * (x - 0.5 * length) / length**2)[:, None] * np.maximum(shape_z, 0.0)[None, :]
    return OffsetGrid(x=x, z=z, y=y, dydx=dydx)


def _trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    h = axis[1] - axis[0]
    w = np.full(axis.size, h)
    w[0] = w[-1] = 0.5 * h
    return w


def michell_wave_resistance(grid: OffsetGrid, cond: FlowConditions,
                            n_panels: int = 300) -> float:
    """Michell integral wave resistance of the half-offset grid, in N."""
    if n_panels % 2:
        n_panels += 1
    if not np.all(np.isfinite(grid.dydx)):
        raise DomainError("offset slopes contain non-finite values")
    if not np.any(grid.y > 0.0):
        return 0.0
    U, g, rho = cond.speed, cond.gravity, cond.rho
    k0 = g / U**2

    dz = grid.z[1] - grid.z[0]
    lam_max = max(3.0, np.sqrt(12.0 * np.log(10.0) / (2.0 * k0 * dz)))
    t_max = float(np.arccosh(lam_max))
    t = np.linspace(0.0, t_max, n_panels + 1)
    lam = np.cosh(t)

    wz = _trapezoid_weights(grid.z)
    wx = _trapezoid_weights(grid.x)

    # depth attenuation, weighted for the z-integral: (Nz, Nt)
    E = np.exp(k0 * np.outer(grid.z, lam**2)) * wz[:, None]
    G = grid.dydx @ E                                  # (Nx, Nt)
    phase = k0 * np.outer(grid.x, lam)                 # (Nx, Nt)
    I = wx @ (G * np.cos(phase))
    J = wx @ (G * np.sin(phase))

    integrand = (I**2 + J**2) * lam**2                 # cosh^2 t weight
    dt = t[1] - t[0]
    w_simp = np.ones(n_panels + 1)
    w_simp[1:-1:2] = 4.0
    w_simp[2:-1:2] = 2.0
    integral = dt / 3.0 * float(w_simp @ integrand)
    return max(4.0 * rho * g**2 / (np.pi * U**2) * integral, 0.0)


def froude_to_speed(fn: float, length: float, gravity: float = GRAVITY) -> float:
    if fn <= 0 or length <= 0:
        raise DomainError("Froude number and length must be positive")
    return fn * np.sqrt(gravity * length)


def speed_to_froude(speed: float, length: float, gravity: float = GRAVITY) -> float:
    if speed <= 0 or length <= 0:
        raise DomainError("speed and length must be positive")
    return speed / np.sqrt(gravity * length)


def wave_drag_coefficient(rw: float, cond: FlowConditions, loa: float) -> float:
    """Cw = Rw / (0.5 rho U^2 LOA^2); LOA-normalized, not wetted-area."""
    if loa <= 0:
        raise DomainError("loa must be positive")
    return rw / (0.5 * cond.rho * cond.speed**2 * loa**2)


def friction_coefficient(re: float) -> float:
    """ITTC-1957 line: Cf = 0.075 / (log10*Re - 2)^2 ... valid for Re > 100."""
    if re <= 100.0:
        raise DomainError("Reynolds number must exceed 100 (singular line)")
    return 0.075 / (np.log10(re) - 2.0) ** 2


@dataclass
class DragTable:
    """32 wave-drag conditions: 4 draft fractions x 8 Froude numbers."""

    loa: float
    draft_fracs: np.ndarray       # (4,)
    froude_numbers: np.ndarray    # (8,)
    lwl: np.ndarray               # (4,) waterline length per draft, m
    aws: np.ndarray               # (4,) wetted surface per draft, m^2
    cw: np.ndarray                # (4, 8)
    rw: np.ndarray                # (4, 8) N
    rf: np.ndarray                # (4, 8) N
    rt: np.ndarray                # (4, 8) N
    rho: float = RHO_SEAWATER
    nu: float = NU_SEAWATER

    def cw_flat(self) -> np.ndarray:
        """The 32 coefficients in draft-major, Froude-minor order."""
        return self.cw.reshape(-1)

    @staticmethod
    def condition_labels() -> list[str]:
        return [
            f"d{int(round(d * 100)):02d}_f{int(round(f * 100)):03d}"
            for d in DRAFT_FRACTIONS for f in FROUDE_NUMBERS
        ]


def sweep_32(surface, nx: int = 301, nz: int = 51,
             rho: float = RHO_SEAWATER, nu: float = NU_SEAWATER,
             n_panels: int = 300,
             area_grid: tuple[int, int] = (160, 60)) -> DragTable:
    """Full 32-condition sweep; Froude numbers use each draft's waterline."""
    drafts = np.array(DRAFT_FRACTIONS) * surface.depth
    n_f = len(FROUDE_NUMBERS)
    lwl = np.empty(4)
    aws = np.empty(4)
    cw = np.empty((4, n_f))
    rw = np.empty((4, n_f))
    rf = np.empty((4, n_f))
    rt = np.empty((4, n_f))
    for i, draft in enumerate(drafts):
        grid = offsets_from_surface(surface, draft, nx, nz)
        lwl[i] = surface.waterline_length(draft)
        aws[i] = wetted_surface_area(surface, draft, *area_grid)
        for j, fn in enumerate(FROUDE_NUMBERS):
            speed = froude_to_speed(fn, lwl[i])
            cond = FlowConditions(speed=speed, draft=draft, rho=rho, nu=nu)
            rw[i, j] = michell_wave_resistance(grid, cond, n_panels=n_panels)
            cw[i, j] = wave_drag_coefficient(rw[i, j], cond, surface.loa)
            re = speed * lwl[i] / nu
            cf = friction_coefficient(re)
            rf[i, j] = 0.5 * cf * rho * speed**2 * aws[i]
            rt[i, j] = rw[i, j] + rf[i, j]
    return DragTable(
        loa=surface.loa,
        draft_fracs=np.array(DRAFT_FRACTIONS), froude_numbers=np.array(FROUDE_NUMBERS),
        lwl=lwl, aws=aws, cw=cw, rw=rw, rf=rf, rt=rt, rho=rho, nu=nu,
    )


def total_resistance(surface, cond: FlowConditions,
                     nx: int = 301, nz: int = 51,
                     area_grid: tuple[int, int] = (160, 60)) -> tuple[float, float, float]:
    """(Rw, Rf, Rt) at one flow condition; Re uses the waterline length."""
    if not 0.0 < cond.draft <= surface.depth:
        raise DomainError("draft outside (0, depth]")
    grid = offsets_from_surface(surface, cond.draft, nx, nz)
    rw = michell_wave_resistance(grid, cond)
    lwl = surface.waterline_length(cond.draft)
    aws = wetted_surface_area(surface, cond.draft, *area_grid)
    re = cond.speed * lwl / cond.nu
    rf = 0.5 * friction_coefficient(re) * cond.rho * cond.speed**2 * aws
    return rw, rf, rw + rf


def interpolate_cw(table: DragTable, fn: float, draft_frac: float) -> float:
    """Bilinear interpolation on log10(Cw) over the 4 x 8 condition grid."""
    f_axis = table.froude_numbers
    d_axis = table.draft_fracs
    if not f_axis[0] <= fn <= f_axis[-1]:
        raise DomainError(f"Froude number {fn} outside [{f_axis[0]}, {f_axis[-1]}]")
    if not d_axis[0] <= draft_frac <= d_axis[-1]:
        raise DomainError(f"draft fraction {draft_frac} outside [{d_axis[0]}, {d_axis[-1]}]")
    if np.any(table.cw <= 0.0):
        raise DomainError("drag table contains non-positive Cw; cannot take log10")
    log_cw = np.log10(table.cw)
    i = min(int(np.searchsorted(d_axis, draft_frac, side="right") - 1), len(d_axis) - 2)
    j = min(int(np.searchsorted(f_axis, fn, side="right") - 1), len(f_axis) - 2)
    i = max(i, 0)
    j = max(j, 0)
    td = (draft_frac - d_axis[i]) / (d_axis[i + 1] - d_axis[i])
    tf = (fn - f_axis[j]) / (f_axis[j + 1] - f_axis[j])
    val = ((1 - td) * (1 - tf) * log_cw[i, j] + (1 - td) * tf * log_cw[i, j + 1]
           + td * (1 - tf) * log_cw[i + 1, j] + td * tf * log_cw[i + 1, j + 1])
    return float(10.0**val)


def wigley_drag_table(length: float = 100.0, beam: float = 10.0,
                      design_draft: float = 6.25,
                      nx: int = 301, nz: int = 51,
                      rho: float = RHO_SEAWATER, nu: float = NU_SEAWATER) -> DragTable:
    """32-condition sweep of the analytic Wigley hull (depth = design draft)."""
    from .surface import WigleySurface

    surf = WigleySurface(length, beam, design_draft)
    drafts = np.array(DRAFT_FRACTIONS) * design_draft
    n_f = len(FROUDE_NUMBERS)
    lwl = np.full(4, length)
    aws = np.empty(4)
    cw = np.empty((4, n_f))
    rw = np.empty((4, n_f))
    rf = np.empty((4, n_f))
    rt = np.empty((4, n_f))
    for i, draft in enumerate(drafts):
        grid = wigley_offsets(beam, length, draft, nx, nz, full_draft=design_draft)
        aws[i] = wetted_surface_area(surf, draft, 160, 60)
        for j, fn in enumerate(FROUDE_NUMBERS):
            speed = froude_to_speed(fn, length)
            cond = FlowConditions(speed=speed, draft=draft, rho=rho, nu=nu)
            rw[i, j] = michell_wave_resistance(grid, cond)
            cw[i, j] = wave_drag_coefficient(rw[i, j], cond, length)
            cf = friction_coefficient(speed * length / nu)
            rf[i, j] = 0.5 * cf * rho * speed**2 * aws[i]
            rt[i, j] = rw[i, j] + rf[i, j]
    return DragTable(
        loa=length, draft_fracs=np.array(DRAFT_FRACTIONS),
        froude_numbers=np.array(FROUDE_NUMBERS),
        lwl=lwl, aws=aws, cw=cw, rw=rw, rf=rf, rt=rt, rho=rho, nu=nu,
    )
