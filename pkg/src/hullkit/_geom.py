"""Algebraic hull template resolution.

Everything here works in unit-length coordinates (length overall scaled to 1,
x aft->forward in [0, 1], y = half-beam >= 0, z keel-up in [0, depth]).  All
quantities are functions of the 44 dimensionless shape terms only, which makes
the feasibility margins scale-invariant by construction.

The template:

* parallel-midbody cross section: keel arc tangent to the baseline at the
  centerline, deadrise segment, chine fillet arc, straight side up to the deck
  edge;
* bow/stern tapers: per-waterline cubics in x fixed by four boundary
  conditions (zero value and drift-angle slope at the outer profile, midbody
  value and zero slope at the attachment curve);
* fore/aft profiles: raked stem/stern power curves combined with keel-rise
  curves;
* transom: power-law outline between its bottom height and the deck;
* bulbs: superellipsoid bodies faired into the taper by quartic fillets in x.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import names

_EPS = 1e-12
# fixed waterline stations used for the algebraic constraint margins; the
# count never changes with mesh resolution, keeping the check constant-time
_N_KNOTS = 65


def _asarray(z):
    return np.asarray(z, dtype=float)


@dataclass(frozen=True)
class BulbGeom:
    """Resolved bulb constants for one hull end (unit-length coordinates)."""

    active: bool
    forward: bool            # True for the bow bulb (tip points to +x)
    x_cb: float = 0.0        # center-plane station of the superellipsoid
    length: float = 0.0      # protrusion semi-axis along x
    z_c: float = 0.0
    r_up: float = 0.0
    r_dn: float = 0.0
    r_y: float = 0.0
    tip_exp: float = 2.0
    fillet_len: float = 0.0

    @property
    def x_hull(self) -> float:
        """Station where the fillet meets the hull surface."""
        return self.x_cb - self.fillet_len if self.forward else self.x_cb + self.fillet_len

    @property
    def z_lo(self) -> float:
        return self.z_c - self.r_dn

    @property
    def z_hi(self) -> float:
        return self.z_c + self.r_up

    def eta(self, z):
        z = _asarray(z)
        scale = np.where(z >= self.z_c, max(self.r_up, _EPS), max(self.r_dn, _EPS))
        return (z - self.z_c) / scale

    def xi_max(self, z):
        """Half-extent of the body along x at height z (0 outside the span)."""
        eta = np.abs(self.eta(z))
        inside = eta < 1.0
        with np.errstate(invalid="ignore"):
            xi = np.where(inside, (1.0 - np.minimum(eta, 1.0) ** self.tip_exp) ** (1.0 / self.tip_exp), 0.0)
        return xi


@dataclass
class ResolvedHull:
    """All section/taper/bulb constants derived from one parameter vector."""

    v: np.ndarray
    # principal
    Lb: float = 0.0
    Ls: float = 0.0
    Bh: float = 0.0
    D: float = 0.0
    Btr: float = 0.0
    Td: float = 0.0
    x_mb_aft: float = 0.0
    x_mb_fwd: float = 0.0
    # cross section
    beta: float = 0.0
    Rk: float = 0.0
    Rc: float = 0.0
    ych: float = 0.0
    zk1: float = 0.0
    yk1: float = 0.0
    zch: float = 0.0
    sigma: float = 0.0
    len_dead: float = 0.0
    len_side: float = 0.0
    fillet_tangent: float = 0.0
    chine_center: tuple[float, float] = (0.0, 0.0)
    z_t1: float = 0.0
    z_t2: float = 0.0
    # transom
    z_tb: float = 0.0
    w_tr: float = 0.0
    transom_exp: float = 1.0
    # profile curves
    tan_rake_b: float = 0.0
    tan_rake_s: float = 0.0
    x_kr0_b: float = 1.0
    x_kr0_s: float = 0.0
    x_corner: float = 0.0
    bulb_bow: BulbGeom = field(default_factory=lambda: BulbGeom(False, True))
    bulb_stern: BulbGeom = field(default_factory=lambda: BulbGeom(False, False))

    # ------------------------------------------------------------------ #
    # cross-section template
    # ------------------------------------------------------------------ #
    def y_section(self, z):
        """Half-beam of the parallel-midbody section at height z (unit len)."""
        z = _asarray(z)
        D = self.D
        cy, cz = self.chine_center
        with np.errstate(invalid="ignore", divide="ignore"):
            y_keel = np.sqrt(np.maximum(z * (2.0 * self.Rk - z), 0.0))
            if self.beta > _EPS:
                y_dead = self.yk1 + (z - self.zk1) / np.tan(self.beta)
            else:
                y_dead = np.full_like(z, self.ych)
            y_arc = cy + np.sqrt(np.maximum(self.Rc**2 - (z - cz) ** 2, 0.0))
            if self.ych < self.Bh - _EPS:
                slope = (self.Bh - self.ych) / max(D - self.zch, _EPS)
                y_side = self.ych + (z - self.zch) * slope
            else:
                y_side = np.full_like(z, self.Bh)
        y = np.select(
            [z < self.zk1, z < self.z_t1, z < self.z_t2],
            [y_keel, y_dead, y_arc],
            default=y_side,
        )
        return np.clip(y, 0.0, self.Bh)

    def y_transom(self, z):
        """Transom outline half-beam at height z; zero below the bottom edge."""
        z = _asarray(z)
        if self.Btr <= _EPS:
            return np.zeros_like(z)
        if self.w_tr > _EPS:
            s = np.clip((z - self.z_tb) / self.w_tr, 0.0, 1.0)
        else:
            s = (z >= self.z_tb).astype(float)
        return self.Btr * s**self.transom_exp

    # ------------------------------------------------------------------ #
    # profile / envelope curves
    # ------------------------------------------------------------------ #
    def x_stem(self, z):
        z = _asarray(z)
        t = np.clip((self.D - z) / self.D, 0.0, 1.0)
        pe = self.v[names.IDX["bow_profile_exponent"]]
        return 1.0 - self.tan_rake_b * self.D * t**pe

    def x_sternface(self, z):
        z = _asarray(z)
        t = np.clip((self.D - z) / self.D, 0.0, 1.0)
        pe = self.v[names.IDX["stern_profile_exponent"]]
        return self.tan_rake_s * self.D * t**pe

    def x_fwd(self, z):
        """Forward envelope boundary (stem and bow keel-rise combined)."""
        z = _asarray(z)
        xs = self.x_stem(z)
        krs = self.v[names.IDX["bow_keelrise_start_frac"]]
        if krs <= _EPS:
            return xs
        ke = self.v[names.IDX["bow_keelrise_exponent"]]
        zt = max(self.Td, _EPS)
        with np.errstate(invalid="ignore"):
            rise = np.clip(z / zt, 0.0, 1.0) ** (1.0 / ke)
        xk = np.where(z < zt, self.x_kr0_b + (1.0 - self.x_kr0_b) * rise, 1.0)
        return np.minimum(xs, xk)

    def x_aft(self, z):
        """Aft envelope boundary (stern face and stern keel-rise combined)."""
        z = _asarray(z)
        xr = self.x_sternface(z)
        krs = self.v[names.IDX["stern_keelrise_start_frac"]]
        if self.z_tb <= _EPS or krs <= _EPS:
            return xr
        ke = self.v[names.IDX["stern_keelrise_exponent"]]
        with np.errstate(invalid="ignore"):
            drop = np.clip(1.0 - z / self.z_tb, 0.0, 1.0) ** ke
        xk = self.x_corner + (self.x_kr0_s - self.x_corner) * drop
        return np.where(z < self.z_tb, np.maximum(xr, xk), xr)

    def x_att_bow(self, z):
        z = _asarray(z)
        mtf = self.v[names.IDX["bow_midbody_transition_frac"]]
        sbe = self.v[names.IDX["bow_section_blend_exponent"]]
        t = np.clip(1.0 - z / self.D, 0.0, 1.0)
        return self.x_mb_fwd + mtf * self.Lb * t**sbe

    def x_att_stern(self, z):
        z = _asarray(z)
        mtf = self.v[names.IDX["stern_midbody_transition_frac"]]
        sbe = self.v[names.IDX["stern_section_blend_exponent"]]
        t = np.clip(1.0 - z / self.D, 0.0, 1.0)
        return self.x_mb_aft - mtf * self.Ls * t**sbe

    def drift_bow(self, z):
        z = _asarray(z)
        dk = np.radians(self.v[names.IDX["bow_drift_keel_deg"]])
        dd = np.radians(self.v[names.IDX["bow_drift_deck_deg"]])
        wfe = self.v[names.IDX["bow_waterplane_fullness_exponent"]]
        zeta = np.clip(z / self.D, 0.0, 1.0)
        return dk + (dd - dk) * zeta**wfe

    def drift_stern(self, z):
        z = _asarray(z)
        dd = np.radians(self.v[names.IDX["stern_drift_deck_deg"]])
        de = self.v[names.IDX["stern_drift_exponent"]]
        zeta = np.clip(z / self.D, 0.0, 1.0)
        return dd * zeta**de

    # ------------------------------------------------------------------ #
    # taper cubics
    # ------------------------------------------------------------------ #
    def bow_cubic(self, z):
        """Coefficients (a, b, c, d) of the bow waterline cubic in u.

        u runs 0 at the stem to 1 at the midbody attachment; the polynomial
        value is the half-beam.  Also returns (x_outer, span).
        """
        z = _asarray(z)
        ym = self.y_section(z)
        x1 = self.x_fwd(z)
        x0 = self.x_att_bow(z)
        span = np.maximum(x1 - x0, _EPS)
        c = np.tan(self.drift_bow(z)) * span
        a = c - 2.0 * ym
        b = 3.0 * ym - 2.0 * c
        d = np.zeros_like(ym)
        return a, b, c, d, x1, span

    def stern_cubic(self, z):
        """Stern waterline cubic; u runs 0 at the aft boundary to 1 inboard."""
        z = _asarray(z)
        ym = self.y_section(z)
        ytr = self.y_transom(z)
        x1 = self.x_att_stern(z)
        x0 = self.x_aft(z)
        span = np.maximum(x1 - x0, _EPS)
        delta = ym - ytr
        c = np.tan(self.drift_stern(z)) * span
        a = c - 2.0 * delta
        b = 3.0 * delta - 2.0 * c
        return a, b, c, ytr, x0, span

    @staticmethod
    def _cubic_value(a, b, c, d, u):
        return ((a * u + b) * u + c) * u + d

    @staticmethod
    def _cubic_slope(a, b, c, u):
        return (3.0 * a * u + 2.0 * b) * u + c

    @staticmethod
    def _cubic_extrema(a, b, c, d):
        """(min, max) of the cubic over u in [0, 1], fully vectorized."""
        a, b, c, d = np.broadcast_arrays(*map(_asarray, (a, b, c, d)))
        lo = np.minimum(d, a + b + c + d)
        hi = np.maximum(d, a + b + c + d)
        with np.errstate(divide="ignore", invalid="ignore"):
            cubic = np.abs(a) > _EPS
            disc = np.maximum(b**2 - 3.0 * a * c, 0.0)
            root = np.sqrt(disc)
            denom = np.where(cubic, 3.0 * a, 1.0)
            u_roots = [
                np.where(cubic, (-b + root) / denom, -1.0),
                np.where(cubic, (-b - root) / denom, -1.0),
            ]
            # quadratic fallback when the cubic term vanishes
            blin = np.abs(b) > _EPS
            u_roots.append(np.where(~cubic & blin, -c / np.where(blin, 2.0 * b, 1.0), -1.0))
        for u in u_roots:
            valid = (u > 0.0) & (u < 1.0)
            val = ((a * u + b) * u + c) * u + d
            lo = np.where(valid, np.minimum(lo, val), lo)
            hi = np.where(valid, np.maximum(hi, val), hi)
        return lo, hi

    # ------------------------------------------------------------------ #
    # base surface (no bulbs)
    # ------------------------------------------------------------------ #
    def y_base(self, x, z):
        """Half-beam of the bare hull at (x, z); 0 outside the envelope."""
        x = _asarray(x)
        z = _asarray(z)
        x, z = np.broadcast_arrays(x, z)
        ym = self.y_section(z)

        ab, bb, cb, db, x1b, span_b = self.bow_cubic(z)
        x_att_b = self.x_att_bow(z)
        asn, bsn, csn, dsn, x0s, span_s = self.stern_cubic(z)
        x_att_s = self.x_att_stern(z)

        ub = np.clip((x1b - x) / span_b, 0.0, 1.0)
        us = np.clip((x - x0s) / span_s, 0.0, 1.0)
        y_bow = self._cubic_value(ab, bb, cb, db, ub)
        y_stern = self._cubic_value(asn, bsn, csn, dsn, us)

        y = np.select(
            [x < x0s, x <= x_att_s, x <= x_att_b, x <= x1b],
            [np.zeros_like(ym), y_stern, ym, y_bow],
            default=0.0,
        )
        return np.maximum(y, 0.0)

    def _hull_bcs_at(self, x0, z, forward):
        """Value/slope/curvature of the bare hull at station x0 per height z.

        Slope and curvature are taken with respect to x.  Used as fillet
        boundary conditions; x0 is assumed to lie in the taper region.
        """
        z = _asarray(z)
        if forward:
            a, b, c, d, x1, span = self.bow_cubic(z)
            u = np.clip((x1 - x0) / span, 0.0, 1.0)
            val = self._cubic_value(a, b, c, d, u)
            slope = -self._cubic_slope(a, b, c, u) / span
            curv = (6.0 * a * u + 2.0 * b) / span**2
        else:
            a, b, c, d, x0s, span = self.stern_cubic(z)
            u = np.clip((x0 - x0s) / span, 0.0, 1.0)
            val = self._cubic_value(a, b, c, d, u)
            slope = self._cubic_slope(a, b, c, u) / span
            curv = (6.0 * a * u + 2.0 * b) / span**2
        return val, slope, curv

    def y_bulb(self, bulb: BulbGeom, x, z):
        """Half-beam contribution of one bulb (0 outside its support)."""
        if not bulb.active:
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(z)).shape)
        x = _asarray(x)
        z = _asarray(z)
        x, z = np.broadcast_arrays(x, z)
        eta = bulb.eta(z)
        inside = np.abs(eta) < 1.0

        # superellipsoid body, xi measured toward the tip
        xi = (x - bulb.x_cb) / bulb.length if bulb.forward else (bulb.x_cb - x) / bulb.length
        with np.errstate(invalid="ignore"):
            rho2 = np.where(
                (xi >= 0.0) & (xi <= 1.0),
                (1.0 - np.clip(xi, 0.0, 1.0) ** bulb.tip_exp) ** (2.0 / bulb.tip_exp),
                -1.0,
            )
            y_body = np.sqrt(np.maximum(rho2 - eta**2, 0.0)) * bulb.r_y
        y_body = np.where((rho2 >= 0.0) & inside, y_body, 0.0)

        # quartic fillet between the hull station and the bulb center plane
        x_f0 = bulb.x_hull
        h = abs(bulb.x_cb - x_f0)
        y0, sl0, cu0 = self._hull_bcs_at(x_f0, z, bulb.forward)
        if not bulb.forward:
            sl0 = -sl0  # slope w.r.t. the mirrored coordinate
        w = bulb.r_y * np.sqrt(np.maximum(1.0 - eta**2, 0.0))
        a0 = y0
        a1 = sl0 * h
        a2 = 0.5 * cu0 * h**2
        A = w - (a0 + a1 + a2)
        B = -(a1 + 2.0 * a2)
        a3 = 4.0 * A - B
        a4 = B - 3.0 * A
        s = (x - x_f0) / h if bulb.forward else (x_f0 - x) / h
        in_fillet = (s >= 0.0) & (s < 1.0) & inside
        y_fil = ((((a4 * s + a3) * s + a2) * s + a1) * s) + a0
        y_fil = np.where(in_fillet, np.maximum(y_fil, 0.0), 0.0)
        return np.maximum(y_body, y_fil)

    def fillet_min(self, bulb: BulbGeom, n_z: int = 33, n_s: int = 33) -> float:
        """Minimum of the fillet quartic over the bulb span (units of r_y).

        A negative minimum means the faired surface pinches to zero width
        inside a waterline, splitting it into disconnected lobes.
        """
        if not bulb.active:
            return _PASS
        z = np.linspace(max(bulb.z_lo, 0.0), min(bulb.z_hi, self.D), n_z)
        x_f0 = bulb.x_hull
        h = abs(bulb.x_cb - x_f0)
        y0, sl0, cu0 = self._hull_bcs_at(x_f0, z, bulb.forward)
        if not bulb.forward:
            sl0 = -sl0
        eta = bulb.eta(z)
        w = bulb.r_y * np.sqrt(np.maximum(1.0 - eta**2, 0.0))
        a0 = y0
        a1 = sl0 * h
        a2 = 0.5 * cu0 * h**2
        A = w - (a0 + a1 + a2)
        B = -(a1 + 2.0 * a2)
        a3 = 4.0 * A - B
        a4 = B - 3.0 * A
        s = np.linspace(0.0, 1.0, n_s)[:, None]
        q = ((((a4[None, :] * s + a3[None, :]) * s + a2[None, :]) * s
              + a1[None, :]) * s) + a0[None, :]
        return float(q.min() / max(bulb.r_y, _EPS))

    def half_beam(self, x, z):
        """Full half-beam surface in unit coordinates (bulbs included)."""
        y = self.y_base(x, z)
        if self.bulb_bow.active:
            y = np.maximum(y, self.y_bulb(self.bulb_bow, x, z))
        if self.bulb_stern.active:
            y = np.maximum(y, self.y_bulb(self.bulb_stern, x, z))
        return y

    def envelope(self, z):
        """(x_lo, x_hi) extent of hull material at height z, bulbs included."""
        z = _asarray(z)
        x_hi = self.x_fwd(z)
        x_lo = self.x_aft(z)
        bb = self.bulb_bow
        if bb.active:
            x_hi = np.maximum(x_hi, np.where(bb.xi_max(z) > 0.0, bb.x_cb + bb.length * bb.xi_max(z), -np.inf))
        bs = self.bulb_stern
        if bs.active:
            x_lo = np.minimum(x_lo, np.where(bs.xi_max(z) > 0.0, bs.x_cb - bs.length * bs.xi_max(z), np.inf))
        return x_lo, x_hi

    def bottom_halfwidth(self, x):
        """Half-beam at z = 0 (width of the flat-bottom closure strip)."""
        return self.half_beam(x, np.zeros_like(_asarray(x)))


def resolve(v: np.ndarray) -> ResolvedHull:
    """Resolve the 45-term vector into template constants (unit length)."""
    v = np.asarray(v, dtype=float)
    r = ResolvedHull(v=v)
    r.Lb = float(v[names.I_LBOW])
    r.Ls = float(v[names.I_LSTERN])
    r.Bh = max(float(v[names.I_BEAM]) / 2.0, _EPS)
    r.D = max(float(v[names.I_DEPTH]), _EPS)
    r.Btr = float(v[names.I_BTRANSOM]) * r.Bh
    r.Td = max(float(v[names.I_TDESIGN]) * r.D, _EPS)
    r.x_mb_aft = r.Ls
    r.x_mb_fwd = 1.0 - r.Lb

    # cross section
    r.beta = np.radians(float(v[names.I_DEADRISE]))
    r.Rk = float(v[names.I_RKEEL]) * r.Bh
    r.Rc = float(v[names.I_RCHINE]) * r.Bh
    r.ych = float(v[names.I_YCHINE]) * r.Bh
    r.zk1 = r.Rk * (1.0 - np.cos(r.beta))
    r.yk1 = r.Rk * np.sin(r.beta)
    tan_b = np.tan(r.beta)
    r.zch = r.zk1 + max(r.ych - r.yk1, 0.0) * tan_b
    if r.ych < r.Bh - _EPS:
        r.sigma = float(np.arctan2(r.D - r.zch, r.Bh - r.ych))
        r.len_side = float(np.hypot(r.Bh - r.ych, r.D - r.zch))
    else:
        r.sigma = 0.5 * np.pi
        r.len_side = max(r.D - r.zch, 0.0)
    r.len_dead = max(r.ych - r.yk1, 0.0) / max(np.cos(r.beta), _EPS)

    if r.Rc > _EPS and r.sigma > r.beta + _EPS:
        half = 0.5 * (r.sigma - r.beta)
        ell = r.Rc * np.tan(half)
        dist = r.Rc / np.cos(half)
        u = np.array([-np.cos(r.beta), -np.sin(r.beta)])
        w = np.array([np.cos(r.sigma), np.sin(r.sigma)])
        bis = u + w
        bis = bis / max(np.linalg.norm(bis), _EPS)
        center = np.array([r.ych, r.zch]) + dist * bis
        r.fillet_tangent = float(ell)
        r.chine_center = (float(center[0]), float(center[1]))
        r.z_t1 = r.zch - ell * np.sin(r.beta)
        r.z_t2 = r.zch + ell * np.sin(r.sigma)
    else:
        r.fillet_tangent = 0.0
        r.chine_center = (r.ych, r.zch)
        r.z_t1 = r.zch
        r.z_t2 = r.zch

    # transom
    r.z_tb = float(v[names.IDX["transom_bottom_height_frac"]]) * r.D
    tau = np.radians(float(v[names.IDX["transom_deadrise_deg"]]))
    r.w_tr = r.Btr * np.tan(tau)
    r.transom_exp = float(v[names.IDX["stern_waterplane_fullness_exponent"]])

    # profiles
    r.tan_rake_b = float(np.tan(np.radians(v[names.IDX["bow_rake_deg"]])))
    r.tan_rake_s = float(np.tan(np.radians(v[names.IDX["stern_rake_deg"]])))
    r.x_kr0_b = 1.0 - r.Lb * float(v[names.IDX["bow_keelrise_start_frac"]])
    r.x_kr0_s = r.Ls * float(v[names.IDX["stern_keelrise_start_frac"]])
    r.x_corner = float(r.x_sternface(r.z_tb))

    # bulbs
    def _bulb(prefix: str, forward: bool) -> BulbGeom:
        lf = float(v[names.IDX[f"{prefix}_bulb_length_frac"]])
        if lf <= _EPS:
            return BulbGeom(False, forward)
        z_c = float(v[names.IDX[f"{prefix}_bulb_center_depth_frac"]]) * r.D
        r_dn = float(v[names.IDX[f"{prefix}_bulb_radius_frac"]]) * r.D
        r_up = float(v[names.IDX[f"{prefix}_bulb_vertical_asymmetry_ratio"]]) * r_dn
        r_y = float(v[names.IDX[f"{prefix}_bulb_lateral_width_ratio"]]) * r_dn
        te = float(v[names.IDX[f"{prefix}_bulb_tip_exponent"]])
        taper_len = r.Lb if forward else r.Ls
        fil = float(v[names.IDX[f"{prefix}_bulb_fillet_length_frac"]]) * taper_len
        x_cb = float(r.x_fwd(np.array(z_c))) if forward else float(r.x_aft(np.array(z_c)))
        return BulbGeom(
            active=True, forward=forward, x_cb=x_cb, length=lf, z_c=z_c,
            r_up=max(r_up, _EPS), r_dn=max(r_dn, _EPS), r_y=r_y,
            tip_exp=max(te, 0.05), fillet_len=max(fil, _EPS),
        )

    r.bulb_bow = _bulb("bow", True)
    r.bulb_stern = _bulb("stern", False)
    return r


# ---------------------------------------------------------------------- #
# constraints
# ---------------------------------------------------------------------- #

_PASS = 1.0  # margin reported for constraints that do not apply


def constraint_margins(r: ResolvedHull) -> list[tuple[str, str, float]]:
    """Signed feasibility margins; the hull is feasible iff all are >= 0.

    Returns (constraint name, family, margin) triples in a fixed order.
    """
    v = r.v
    out: list[tuple[str, str, float]] = []

    def add(name: str, family: str, margin: float) -> None:
        m = float(margin)
        if not np.isfinite(m):
            m = -1e9
        elif abs(m) < 1e-9:
            m = 0.0  # margins exactly on the boundary count as feasible
        out.append((name, family, m))

    # --- hard range bounds, grouped by parameter set --------------------- #
    def range_margin(sl: slice) -> float:
        lo = names.HARD_LOWER[sl]
        hi = names.HARD_UPPER[sl]
        vv = v[sl]
        return float(np.min(np.minimum(vv - lo, hi - vv) / np.maximum(hi - lo, _EPS)))

    add("loa_positive", "range", v[names.I_LOA])
    add("principal_in_bounds", "range", range_margin(slice(1, 7)))
    add("cross_section_in_bounds", "range", range_margin(slice(7, 11)))
    add("bow_taper_in_bounds", "range", range_margin(names.BOW_TAPER_SLICE))
    add("stern_taper_in_bounds", "range", range_margin(names.STERN_TAPER_SLICE))
    add("bow_bulb_in_bounds", "range", range_margin(names.BOW_BULB_SLICE))
    add("stern_bulb_in_bounds", "range", range_margin(names.STERN_BULB_SLICE))

    # --- taper overlap ---------------------------------------------------- #
    add("parallel_midbody_positive", "taper-overlap", 1.0 - r.Lb - r.Ls - 0.05)

    # --- cross-section arc fitting ----------------------------------------- #
    add("chine_below_deck", "section", (r.D - r.zch) / r.D - 0.02)
    add("keel_arc_within_depth", "section", (0.9 * r.D - r.zk1) / r.D)
    if r.Rc > _EPS:
        add("chine_corner_convex", "section", ((r.sigma - r.beta) - 0.0087) / np.pi)
    else:
        add("chine_corner_convex", "section", _PASS)
    add("chine_fillet_on_deadrise", "section", (r.len_dead - r.fillet_tangent) / r.Bh)
    add("chine_fillet_on_side", "section", (r.len_side - r.fillet_tangent) / r.Bh)

    # --- transom ----------------------------------------------------------- #
    add("transom_above_keel", "transom", r.z_tb / r.D)
    add("transom_wedge_within_depth", "transom", (r.D - r.z_tb - r.w_tr) / r.D)
    zeta = np.linspace(0.0, 1.0, _N_KNOTS)
    extra = np.array([r.zk1, r.z_t1, r.z_t2, r.zch, r.z_tb, r.z_tb + r.w_tr]) / r.D
    zeta = np.unique(np.clip(np.concatenate([zeta, extra]), 0.0, 1.0))
    zk = zeta * r.D
    ym = r.y_section(zk)
    ytr = r.y_transom(zk)
    add("transom_within_section", "transom", float(np.min(ym - ytr)) / r.Bh)
    cont = max(1e-9 - r.z_tb, r.w_tr - 0.02 * r.z_tb) / r.D
    add("transom_outline_continuous", "transom", cont)

    # --- envelope spans ----------------------------------------------------- #
    mtf_b = v[names.IDX["bow_midbody_transition_frac"]]
    mtf_s = v[names.IDX["stern_midbody_transition_frac"]]
    krs_b = v[names.IDX["bow_keelrise_start_frac"]]
    krs_s = v[names.IDX["stern_keelrise_start_frac"]]
    Lb = max(r.Lb, _EPS)
    Ls = max(r.Ls, _EPS)
    add("bow_rake_within_taper", "envelope",
        ((1.0 - r.tan_rake_b * r.D) - (r.x_mb_fwd + mtf_b * r.Lb) - 0.02 * r.Lb) / Lb)
    add("bow_keelrise_within_taper", "envelope", (1.0 - krs_b - mtf_b) - 0.02)
    add("stern_rake_within_taper", "envelope",
        ((r.x_mb_aft - mtf_s * r.Ls) - r.tan_rake_s * r.D - 0.02 * r.Ls) / Ls)
    add("stern_keelrise_within_taper", "envelope", (1.0 - krs_s - mtf_s) - 0.02)

    # --- waterline cubics: non-negative and within the declared beam ---------- #
    ab, bb, cb, db, _, _ = r.bow_cubic(zk)
    lo_b, hi_b = r._cubic_extrema(ab, bb, cb, db)
    add("bow_waterlines_nonnegative", "taper-cubic", float(np.min(lo_b)) / r.Bh)
    add("bow_waterlines_within_beam", "taper-cubic", float(np.min(r.Bh - hi_b)) / r.Bh)
    asn, bsn, csn, dsn, _, _ = r.stern_cubic(zk)
    lo_s, hi_s = r._cubic_extrema(asn, bsn, csn, dsn)
    add("stern_waterlines_nonnegative", "taper-cubic", float(np.min(lo_s)) / r.Bh)
    add("stern_waterlines_within_beam", "taper-cubic", float(np.min(r.Bh - hi_s)) / r.Bh)

    # --- bulbs --------------------------------------------------------------- #
    for prefix, bulb in (("bow", r.bulb_bow), ("stern", r.bulb_stern)):
        fam = f"{prefix}-bulb"
        if not bulb.active:
            for tag in ("above_baseline", "below_deck", "tip_within_hull",
                        "width_within_beam", "fillet_within_taper",
                        "fillet_nonnegative"):
                add(f"{prefix}_bulb_{tag}", fam, _PASS)
            continue
        add(f"{prefix}_bulb_above_baseline", fam, bulb.z_lo / r.D)
        add(f"{prefix}_bulb_below_deck", fam, (r.D - bulb.z_hi) / r.D)
        if bulb.forward:
            tip = (1.0 - (bulb.x_cb + bulb.length)) / Lb
        else:
            tip = (bulb.x_cb - bulb.length) / Ls
        add(f"{prefix}_bulb_tip_within_hull", fam, tip)
        y_loc = float(r.y_section(np.array(bulb.z_c)))
        add(f"{prefix}_bulb_width_within_beam", fam, (0.95 * y_loc - bulb.r_y) / r.Bh)
        z_lo = max(bulb.z_lo, 0.0)
        if bulb.forward:
            fil = (bulb.x_hull - float(r.x_att_bow(np.array(z_lo)))) / Lb
        else:
            fil = (float(r.x_att_stern(np.array(z_lo))) - bulb.x_hull) / Ls
        add(f"{prefix}_bulb_fillet_within_taper", fam, fil)
        add(f"{prefix}_bulb_fillet_nonnegative", fam, r.fillet_min(bulb))

    return out
