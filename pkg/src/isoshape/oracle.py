"""Independent brute-force ground truth and inequality checkers.

Two oracles cross-validate the quadrature path without sharing any code
with it.  The raster oracle covers d=2: a shape becomes the set of h by
h cells whose centers pass the membership test, volume is cell count
times h^2 (exact raster arithmetic), and perimeters are edge sums

    P ~ EDGE_FACTOR * h * sum_{exposed edges} a(edge midpoint),

where the anisotropy factor corrects the axis-aligned overcount (a
smooth boundary crossing direction phi is counted with weight
|cos phi| + |sin phi|, averaging 4/pi on a circle; the frozen constant
is calibrated on rasterized balls).  The Monte Carlo oracle estimates
the Riesz energy V(A,B) = int_A int_B |x-y|^(-alpha) with the exact
singular kernel over uniform point pairs: directions are drawn by
angular rejection under the envelope r_max, radii by the exact inverse
CDF rho = s^(1/d) r(theta), so samples are exactly uniform over the
interpolated set.

The checkers quantify inequalities the analysis relies on: the
symmetric-difference Lipschitz bound |V(E) - V(F)| <= C |E delta F|
with C = 2 (d omega_d / (d - alpha) + 1), the relative isoperimetric
inequality min(|Omega cap A|, |A minus Omega|)^((d-1)/d) <= c_d P(Omega, A)
on dyadic annuli A_{2^j, 2^(j+1)}, the weighted relative density
h_a(x, r), and the small-mass expansion of the two-ball perimeter
P_a(B_R) + P_a(B_rho) - P_a(B_{r_0}) = Cbar m + o(m) with
Cbar = (d-1+p) r_0^(p-1).

Every checker reports {check, trials, violations, worst_margin, params};
margins are signed with >= 0 meaning the trial passed with room.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import VolumeQuadrature, riesz_self
from .errors import (
    DegenerateAnnulusError,
    MassPreconditionError,
    OutOfBoundsError,
    ResolutionError,
    ValidationError,
)
from .geometry import (
    Configuration,
    EnergyParams,
    StarShape,
    config_membership,
    dilate,
    interpolated_volume,
    make_ball,
    make_grid,
    membership,
    radial_at_directions,
    unit_ball_volume,
)

__all__ = [
    "EDGE_FACTOR",
    "RasterSet",
    "rasterize",
    "raster_from_predicate",
    "raster_measures",
    "symmetric_difference_area",
    "mc_riesz",
    "check_rel_isop",
    "check_v_lipschitz",
    "weighted_density",
    "check_en_lower_bound",
    "random_star",
    "run_raster_agreement",
    "run_mc_agreement",
    "run_v_lipschitz",
    "run_rel_isop",
    "run_all_checks",
]

# Anisotropy correction for the edge-based perimeter estimator, frozen
# from a calibration run on rasterized balls (R in {0.7, 1.0, 1.3},
# h = 1/512, factors 0.786276 / 0.785398 / 0.784926); the analytic
# direction-average for smooth boundaries is pi/4 = 0.78539816.
EDGE_FACTOR = 0.785533440

_MC_CHUNK = 1 << 19


# ----------------------------------------------------------------------
# rasters
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RasterSet:
    """Axis-aligned cell set in the plane: mask[i, j] covers the cell
    [x0 + i h, x0 + (i+1) h) x [y0 + j h, y0 + (j+1) h).

    The lattice is anchored at multiples of h so rasters of equal pixel
    size are cell-aligned and admit exact boolean arithmetic.
    """

    h: float
    x0: float
    y0: float
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValidationError(f"pixel size h={self.h}; need h > 0")
        mask = np.ascontiguousarray(self.mask, dtype=bool)
        object.__setattr__(self, "mask", mask)
        if mask.ndim != 2:
            raise ValidationError("raster mask must be two-dimensional")

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def volume(self) -> float:
        return self.count * self.h * self.h

    def cell_centers(self):
        """Centers of all lattice cells in the bounding box, as a grid."""
        nx, ny = self.mask.shape
        cx = self.x0 + (np.arange(nx) + 0.5) * self.h
        cy = self.y0 + (np.arange(ny) + 0.5) * self.h
        return cx, cy

    def occupied_centers(self) -> np.ndarray:
        ii, jj = np.nonzero(self.mask)
        return np.stack([self.x0 + (ii + 0.5) * self.h,
                         self.y0 + (jj + 0.5) * self.h], axis=1)


def _snap(v: float, h: float) -> float:
    return math.floor(v / h) * h


def rasterize(obj, h: float, pad: float | None = None) -> RasterSet:
    """Cell-center rasterization of a star shape or configuration, d=2.

    A cell is occupied iff its center lies in the set per the membership
    test |x - c| <= r_interp(angle(x - c)).  pad widens the bounding box
    (default two cells) for callers probing near the boundary.
    """
    if isinstance(obj, StarShape):
        obj = Configuration((obj,))
    if obj.components[0].grid.d != 2:
        raise ValidationError("rasterize supports d=2 only")
    if not h > 0:
        raise ValidationError(f"pixel size h={h}; need h > 0")
    if pad is None:
        pad = 2 * h
    lo = np.full(2, math.inf)
    hi = np.full(2, -math.inf)
    for s in obj.components:
        rmax = float(s.radii.max())
        lo = np.minimum(lo, s.center - rmax)
        hi = np.maximum(hi, s.center + rmax)
    x0 = _snap(lo[0] - pad, h)
    y0 = _snap(lo[1] - pad, h)
    nx = int(math.ceil((hi[0] + pad - x0) / h))
    ny = int(math.ceil((hi[1] + pad - y0) / h))
    cx = x0 + (np.arange(nx) + 0.5) * h
    cy = y0 + (np.arange(ny) + 0.5) * h
    pts = np.stack(np.meshgrid(cx, cy, indexing="ij"), axis=-1).reshape(-1, 2)
    mask = config_membership(obj, pts).reshape(nx, ny)
    rs = RasterSet(h=h, x0=x0, y0=y0, mask=mask)
    if rs.count < 100:
        raise ResolutionError(
            f"raster too coarse: {rs.count} occupied cells (< 100)")
    return rs


def raster_from_predicate(pred, bounds, h: float) -> RasterSet:
    """Raster of {x : pred(x)} over bounds ((xmin, xmax), (ymin, ymax)).

    pred receives an (N, 2) array and returns a boolean vector; used to
    build non-star test sets (half-planes, squares) for the checkers.
    """
    (xmin, xmax), (ymin, ymax) = bounds
    x0, y0 = _snap(xmin, h), _snap(ymin, h)
    nx = int(math.ceil((xmax - x0) / h))
    ny = int(math.ceil((ymax - y0) / h))
    cx = x0 + (np.arange(nx) + 0.5) * h
    cy = y0 + (np.arange(ny) + 0.5) * h
    pts = np.stack(np.meshgrid(cx, cy, indexing="ij"), axis=-1).reshape(-1, 2)
    mask = np.asarray(pred(pts), dtype=bool).reshape(nx, ny)
    return RasterSet(h=h, x0=x0, y0=y0, mask=mask)


def _exposed_edges(rs: RasterSet):
    """Midpoints of boundary edges, one row per exposed cell edge."""
    m = np.pad(rs.mask, 1, constant_values=False)
    core = m[1:-1, 1:-1]
    h = rs.h
    mids = []
    # neighbor offsets and the corresponding edge-midpoint offsets from
    # the cell's lower-left corner
    for shift, off in (((1, 0), (1.0, 0.5)), ((-1, 0), (0.0, 0.5)),
                       ((0, 1), (0.5, 1.0)), ((0, -1), (0.5, 0.0))):
        nb = m[1 + shift[0]:m.shape[0] - 1 + shift[0],
               1 + shift[1]:m.shape[1] - 1 + shift[1]]
        ii, jj = np.nonzero(core & ~nb)
        if ii.size:
            mids.append(np.stack([rs.x0 + (ii + off[0]) * h,
                                  rs.y0 + (jj + off[1]) * h], axis=1))
    if not mids:
        return np.empty((0, 2))
    return np.concatenate(mids)


def raster_measures(rs: RasterSet, p: float):
    """(volume, perimeter, weighted perimeter) of the raster.

    Volume is exact cell arithmetic; the perimeters are calibrated edge
    sums with the frozen anisotropy factor.
    """
    mids = _exposed_edges(rs)
    per = EDGE_FACTOR * rs.h * mids.shape[0]
    if p == 0:
        wper = per
    else:
        dens = np.linalg.norm(mids, axis=1) ** p
        wper = EDGE_FACTOR * rs.h * float(dens.sum())
    return rs.volume, per, wper


def symmetric_difference_area(a: RasterSet, b: RasterSet) -> float:
    """|A delta B| by exact cell arithmetic; rasters must share the lattice."""
    if not math.isclose(a.h, b.h, rel_tol=1e-12):
        raise ValidationError("rasters have different pixel sizes")
    h = a.h
    for v in (a.x0 - b.x0, a.y0 - b.y0):
        if abs(v / h - round(v / h)) > 1e-9:
            raise ValidationError("raster lattices are not aligned")
    x0 = min(a.x0, b.x0)
    y0 = min(a.y0, b.y0)
    nx = max(a.x0 + a.mask.shape[0] * h, b.x0 + b.mask.shape[0] * h)
    ny = max(a.y0 + a.mask.shape[1] * h, b.y0 + b.mask.shape[1] * h)
    nx = int(round((nx - x0) / h))
    ny = int(round((ny - y0) / h))

    def embed(r):
        out = np.zeros((nx, ny), dtype=bool)
        i0 = int(round((r.x0 - x0) / h))
        j0 = int(round((r.y0 - y0) / h))
        out[i0:i0 + r.mask.shape[0], j0:j0 + r.mask.shape[1]] = r.mask
        return out

    return int(np.count_nonzero(embed(a) ^ embed(b))) * h * h


# ----------------------------------------------------------------------
# Monte Carlo Riesz energy
# ----------------------------------------------------------------------

def _shape_sampler(shape: StarShape):
    g = shape.grid
    d = g.d
    if d == 2:
        # the periodic cubic interpolant can overshoot the nodal maximum;
        # any majorant keeps the rejection exact, so pad a dense scan
        ang = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
        r_max = float(radial_at_directions(
            shape, np.stack([np.cos(ang), np.sin(ang)], axis=1)).max())
        r_max *= 1.0 + 1e-5
    else:
        # bilinear interpolation never exceeds the nodal maximum
        r_max = float(shape.radii.max())

    def draw(rng, m):
        out = np.empty((m, d))
        have = 0
        while have < m:
            k = max(m - have, 1024)
            dirs = rng.standard_normal((k, d))
            dirs /= np.linalg.norm(dirs, axis=1)[:, None]
            r_dir = radial_at_directions(shape, dirs)
            # sector mass scales like r^d, hence the power in the
            # acceptance test; the radial inverse CDF is s^(1/d) r
            keep = rng.random(k) <= (r_dir / r_max) ** d
            s = rng.random(k)
            idx = np.nonzero(keep)[0][:m - have]
            rho = s[idx] ** (1.0 / d) * r_dir[idx]
            out[have:have + idx.size] = shape.center + rho[:, None] * dirs[idx]
            have += idx.size
        return out

    return draw, interpolated_volume(shape)


def _raster_sampler(rs: RasterSet):
    cells = rs.occupied_centers()

    def draw(rng, m):
        idx = rng.integers(cells.shape[0], size=m)
        return cells[idx] + (rng.random((m, 2)) - 0.5) * rs.h

    return draw, rs.volume


def _sampler(obj):
    if isinstance(obj, RasterSet):
        return _raster_sampler(obj)
    if isinstance(obj, StarShape):
        return _shape_sampler(obj)
    if isinstance(obj, Configuration):
        parts = [_shape_sampler(s) for s in obj.components]
        vols = np.array([v for _, v in parts])
        total = float(vols.sum())
        probs = vols / total

        def draw(rng, m):
            counts = rng.multinomial(m, probs)
            blocks = [p_draw(rng, c) for (p_draw, _), c in zip(parts, counts)
                      if c > 0]
            pts = np.concatenate(blocks)
            return pts[rng.permutation(m)]

        return draw, total
    raise ValidationError(f"cannot sample from {type(obj).__name__}")


def mc_riesz(set_a, set_b=None, alpha: float = 1.0,
             n_samples: int = 1_000_000, seed: int = 0):
    """Monte Carlo Riesz energy V(A, B) = int_A int_B |x-y|^(-alpha).

    set_b = None estimates the self-energy V(A) (independent uniform
    pairs from A).  Returns (estimate, standard error); bit-identical
    for identical seeds.
    """
    if n_samples < 1_000_000:
        raise ValidationError(
            f"n_samples={n_samples}; the oracle contract requires >= 1e6")
    draw_a, vol_a = _sampler(set_a)
    if set_b is None:
        draw_b, vol_b = draw_a, vol_a
    else:
        draw_b, vol_b = _sampler(set_b)
    d = 2 if isinstance(set_a, RasterSet) else (
        set_a.grid.d if isinstance(set_a, StarShape)
        else set_a.components[0].grid.d)
    if not 0.0 < alpha < d:
        raise ValidationError(f"alpha={alpha} outside (0, {d})")
    ss = np.random.SeedSequence(seed)
    n_chunks = (n_samples + _MC_CHUNK - 1) // _MC_CHUNK
    children = ss.spawn(n_chunks)
    s1, s2 = [], []
    left = n_samples
    for child in children:
        m = min(_MC_CHUNK, left)
        left -= m
        rng = np.random.default_rng(child)
        xa = draw_a(rng, m)
        xb = draw_b(rng, m)
        k = np.sum((xa - xb) ** 2, axis=1) ** (-0.5 * alpha)
        s1.append(float(k.sum()))
        s2.append(float((k * k).sum()))
    total1 = math.fsum(s1)
    total2 = math.fsum(s2)
    mean = total1 / n_samples
    # squared standard error of the mean, with the n/(n-1) bias factor
    se2 = max(total2 / n_samples - mean * mean, 0.0) / max(n_samples - 1, 1)
    scale = vol_a * vol_b
    return scale * mean, scale * math.sqrt(se2)


# ----------------------------------------------------------------------
# inequality checkers
# ----------------------------------------------------------------------

def check_rel_isop(rs: RasterSet, j: int):
    """Relative isoperimetric quantities on the annulus A_{2^j, 2^(j+1)}.

    Returns (lhs, per, ratio) with lhs = min(|Omega cap A|,
    |A minus Omega|)^((d-1)/d), per = P(Omega; int A) and ratio = lhs / per
    (zero when lhs is zero).
    """
    r_in, r_out = 2.0 ** j, 2.0 ** (j + 1)
    cx, cy = rs.cell_centers()
    rho2 = cx[:, None] ** 2 + cy[None, :] ** 2
    in_annulus = (rho2 >= r_in * r_in) & (rho2 < r_out * r_out)
    inter = int(np.count_nonzero(rs.mask & in_annulus)) * rs.h ** 2
    area = math.pi * (r_out ** 2 - r_in ** 2)
    minus = max(area - inter, 0.0)
    lhs = min(inter, minus) ** 0.5
    mids = _exposed_edges(rs)
    if mids.shape[0]:
        rr = np.linalg.norm(mids, axis=1)
        per = EDGE_FACTOR * rs.h * int(np.count_nonzero(
            (rr > r_in) & (rr < r_out)))
    else:
        per = 0.0
    if per == 0.0:
        # cell-center counting resolves the relative volumes only to the
        # area of one boundary layer of cells; below that, a vanishing
        # relative perimeter means containment, not an artifact
        noise = 16.0 * rs.h * r_out
        if min(inter, minus) > noise:
            raise DegenerateAnnulusError(
                f"no relative perimeter in annulus j={j} despite proper "
                f"intersection ({inter:.3e} of {area:.3e})")
        return lhs, per, 0.0
    ratio = 0.0 if lhs == 0.0 else lhs / per
    return lhs, per, ratio


def check_v_lipschitz(set_e: RasterSet, set_f: RasterSet, alpha: float,
                      n_samples: int = 1_000_000, seed: int = 0):
    """Symmetric-difference Lipschitz bound |V(E) - V(F)| <= C |E delta F|.

    C = 2 (d omega_d / (d - alpha) + 1).  The left side is the Monte
    Carlo difference minus three combined standard errors (clamped at
    zero), so a reported violation is a 3 sigma event, not noise.
    """
    d = 2
    if set_e.volume > 1.0 + 1e-9 or set_f.volume > 1.0 + 1e-9:
        raise MassPreconditionError(
            f"|E|={set_e.volume:.4f}, |F|={set_f.volume:.4f}; need <= 1")
    ve, se_e = mc_riesz(set_e, None, alpha, n_samples, seed)
    vf, se_f = mc_riesz(set_f, None, alpha, n_samples, seed + 1)
    lhs = max(abs(vf - ve) - 3.0 * (se_e + se_f), 0.0)
    c = 2.0 * (d * unit_ball_volume(d) / (d - alpha) + 1.0)
    return lhs, c * symmetric_difference_area(set_e, set_f)


def weighted_density(rs: RasterSet, x, r: float, p: float) -> float:
    """Weighted relative density h_a(x, r) of the raster at center x.

    min(L_a(Omega cap B_r(x)), L_a(B_r(x) minus Omega)) / L_a(B_r(x)) with
    L_a the |x|^p-weighted area; always in [0, 1/2].
    """
    x = np.asarray(x, dtype=float)
    nx, ny = rs.mask.shape
    if (x[0] - r < rs.x0 or x[0] + r > rs.x0 + nx * rs.h
            or x[1] - r < rs.y0 or x[1] + r > rs.y0 + ny * rs.h):
        raise OutOfBoundsError(
            f"ball B_{r:g}({x[0]:g}, {x[1]:g}) leaves the raster bounds")
    cx, cy = rs.cell_centers()
    in_ball = ((cx[:, None] - x[0]) ** 2 + (cy[None, :] - x[1]) ** 2) <= r * r
    if p == 0:
        dens = np.ones_like(rs.mask, dtype=float)
    else:
        dens = (cx[:, None] ** 2 + cy[None, :] ** 2) ** (0.5 * p)
    la_ball = float(dens[in_ball].sum()) * rs.h ** 2
    if la_ball <= 0.0:
        raise ValidationError("weighted measure of the query ball vanishes")
    la_in = float(dens[in_ball & rs.mask].sum()) * rs.h ** 2
    return min(la_in, la_ball - la_in) / la_ball


def check_en_lower_bound(m: float, p: float, d: int):
    """Small-mass expansion of the split-ball perimeter excess.

    exact_lhs = d omega_d (R^(d-1+p) + rho^(d-1+p) - r0^(d-1+p)) with
    r0 the unit-volume ball radius, rho = (m/omega_d)^(1/d) and
    R = (r0^d + rho^d)^(1/d); expansion = Cbar m with
    Cbar = (d-1+p) r0^(p-1).  For p > 1 the ratio tends to 1 as m -> 0;
    for p <= 1 the rho^(d-1+p) term decays no faster than m and the
    caller must compare against exact_lhs - d omega_d rho^(d-1+p).
    """
    if not (0.0 <= m <= 0.1):
        raise ValidationError(f"mass m={m} outside [0, 0.1]")
    if not p > 0:
        raise ValidationError(f"density exponent p={p}; need p > 0")
    wd = unit_ball_volume(d)
    r0 = wd ** (-1.0 / d)
    rho = (m / wd) ** (1.0 / d)
    big_r = (r0 ** d + rho ** d) ** (1.0 / d)
    q = d - 1 + p
    exact_lhs = d * wd * (big_r ** q + rho ** q - r0 ** q)
    cbar = q * r0 ** (p - 1.0)
    return exact_lhs, cbar * m


# ----------------------------------------------------------------------
# randomized corpora
# ----------------------------------------------------------------------

def random_star(rng, n: int = 96, d: int = 2, amp: float = 0.12,
                kmax: int = 4, center_scale: float = 0.15,
                normalize: bool = True) -> StarShape:
    """Random smooth star shape; normalize rescales to unit volume."""
    g = make_grid(d, n)
    if d == 2:
        u = np.zeros(g.n_nodes)
        for k in range(1, kmax + 1):
            a, b = rng.standard_normal(2) / k
            u += a * np.cos(k * g.theta) + b * np.sin(k * g.theta)
    else:
        phi = np.repeat(g.polar, g.azimuth.size)
        psi = np.tile(g.azimuth, g.polar.size)
        u = np.zeros(g.n_nodes)
        for k in range(1, kmax + 1):
            u += rng.standard_normal() / k * np.cos(k * phi)
            u += rng.standard_normal() / k * np.sin(phi) ** k * np.cos(k * psi)
    u *= amp / max(float(np.abs(u).max()), 1e-12)
    r0 = unit_ball_volume(d) ** (-1.0 / d)
    shape = StarShape(grid=g, center=rng.uniform(-1, 1, d) * center_scale,
                      radii=r0 * (1.0 + u))
    if normalize:
        from .geometry import volume as _vol
        shape = dilate(shape, _vol(shape) ** (-1.0 / d))
    return shape


def _report(check: str, trials: int, violations: int, worst_margin: float,
            params: dict) -> dict:
    return {"check": check, "trials": int(trials), "violations": int(violations),
            "worst_margin": float(worst_margin), "params": params}


def run_raster_agreement(seed: int = 0, trials: int = 20,
                         h: float = 1.0 / 512, p: float = 2.0) -> dict:
    """Raster volume and weighted perimeter vs the quadrature path.

    Margins: 0.01 - |dvol|/vol and 0.02 - |dper|/per per shape; a
    negative margin is a violation.  The corpus uses gentle waviness
    (amp 0.08, modes <= 3): the global edge factor models boundaries
    whose normal-direction distribution is near uniform, and high-mode
    blobs bias individual directions by several percent.
    """
    from .energy import weighted_perimeter
    from .geometry import volume as quad_volume
    rng = np.random.default_rng(seed)
    worst = math.inf
    violations = 0
    for _ in range(trials):
        shape = random_star(rng, n=96, d=2, amp=0.08, kmax=3)
        rs = rasterize(shape, h)
        vol, _, wper = raster_measures(rs, p)
        vq = quad_volume(shape)
        wq = weighted_perimeter(shape, EnergyParams(d=2, p=p, alpha=1.0))
        m_vol = 0.01 - abs(vol - vq) / vq
        m_per = 0.02 - abs(wper - wq) / wq
        worst = min(worst, m_vol, m_per)
        violations += int(m_vol < 0) + int(m_per < 0)
    return _report("raster_agreement", 2 * trials, violations, worst,
                   {"h": h, "p": p, "seed": seed})


# Cells of the MC agreement corpus: (d, n, n_s, shapes, alphas).  A 3
# sigma gate is meaningful only where (a) the pair-distance integrand
# t^(-2 alpha) has a finite second moment, i.e. 2 alpha < d -- at
# 2 alpha >= d the sample sigma estimates a divergent quantity and the
# z statistic is not Gaussian -- and (b) the quadrature truncation at
# the cell's resolution sits below the 1e6-sample noise (measured on
# balls against the exact constants: every cell below has |bias| <=
# 1.2 sigma).  The excluded self-energy cells (d=2 alpha in {1, 1.5},
# d=3 alpha = 1.5) are covered instead by the exact ball references,
# the homogeneity invariant, and the separated-ball cross-term test,
# none of which need the CLT.  Corpus shapes use gentle waviness so
# truncation, which grows with boundary curvature, stays below noise.
MC_AGREEMENT_CELLS = (
    (2, 128, None, 3, (0.5, 0.75)),
    (3, 24, 24, 3, (0.5, 0.75)),
    (3, 28, 28, 2, (1.0,)),
)


def run_mc_agreement(seed: int = 0, n_samples: int = 1_000_000) -> dict:
    """riesz_self vs mc_riesz within 3 sigma on every corpus shape.

    Margin: 3 sigma - |quad - mc| in units of sigma (i.e. 3 - |z|).
    """
    rng = np.random.default_rng(seed)
    worst = math.inf
    violations = 0
    trials = 0
    mc_seed = seed
    for d, n, n_s, n_shapes, alphas in MC_AGREEMENT_CELLS:
        for i in range(n_shapes):
            shape = (make_ball(unit_ball_volume(d) ** (-1.0 / d),
                               np.zeros(d), make_grid(d, n))
                     if i == 0 else random_star(rng, n=n, d=d,
                                                amp=0.08, kmax=3))
            vq = VolumeQuadrature.build(shape, n_s=n_s)
            for alpha in alphas:
                params = EnergyParams(d=d, p=2.0, alpha=alpha)
                quad = float(riesz_self(shape, params, vq))
                mc_seed += 1
                est, se = mc_riesz(shape, None, alpha, n_samples, mc_seed)
                z = abs(quad - est) / se
                worst = min(worst, 3.0 - z)
                violations += int(z > 3.0)
                trials += 1
    return _report("mc_agreement", trials, violations, worst,
                   {"n_samples": n_samples, "seed": seed,
                    "cells": [[c[0], c[1], c[3]] + [list(c[4])]
                              for c in MC_AGREEMENT_CELLS]})


def run_v_lipschitz(seed: int = 0, trials: int = 100, alpha: float = 1.0,
                    n_samples: int = 1_000_000) -> dict:
    """Eq.-style Lipschitz corpus over random unit-mass raster pairs.

    Margin: bound - lhs (violation when negative, a > 3 sigma event).
    """
    rng = np.random.default_rng(seed)
    worst = math.inf
    violations = 0
    h = 1.0 / 128
    # Quadrature-unit-volume blobs rasterize to mass 1 + O(h^2), which
    # can tip over the |E| <= 1 precondition; shrink slightly below it.
    sub = 0.99
    for t in range(trials):
        a = rasterize(dilate(
            random_star(rng, n=64, d=2, amp=0.2, center_scale=0.1), sub), h)
        shape_b = dilate(
            random_star(rng, n=64, d=2, amp=0.2, center_scale=0.1), sub)
        if rng.random() < 0.5:
            shape_b = dilate(shape_b, rng.uniform(0.75, 1.0))
        b = rasterize(shape_b, h)
        lhs, bound = check_v_lipschitz(a, b, alpha, n_samples, seed * 1000 + t)
        worst = min(worst, bound - lhs)
        violations += int(lhs > bound)
    return _report("v_lipschitz", trials, violations, worst,
                   {"alpha": alpha, "n_samples": n_samples, "h": h,
                    "seed": seed})


def _halfplane_raster(angle: float, offset: float, r_out: float, h: float):
    nrm = np.array([math.cos(angle), math.sin(angle)])

    def pred(pts):
        return (pts @ nrm <= offset) & (np.linalg.norm(pts, axis=1)
                                        <= 1.5 * r_out)

    b = 1.5 * r_out + 2 * h
    return raster_from_predicate(pred, ((-b, b), (-b, b)), h)


def run_rel_isop(seed: int = 0, blobs: int = 50) -> dict:
    """Empirical relative-isoperimetric constant across dyadic annuli.

    Per annulus j in {0..3} the corpus is the through-origin half-plane
    cut (the extremal example), random offset cuts, and random star
    blobs scaled to straddle the annulus; the empirical constant c_j is
    the corpus maximum of lhs / per.  Scale stability asserts
    |c_j / c_0 - 1| <= 0.1; margin = 0.1 - max_j |c_j / c_0 - 1|.
    """
    rng = np.random.default_rng(seed)
    cs = []
    trials = 0
    for j in range(4):
        r_in, r_out = 2.0 ** j, 2.0 ** (j + 1)
        h = r_in / 192
        ratios = []
        lhs, per, ratio = check_rel_isop(_halfplane_raster(0.0, 0.0, r_out, h), j)
        ratios.append(ratio)
        trials += 1
        for _ in range(6):
            ang = rng.uniform(0, 2 * math.pi)
            off = rng.uniform(-0.5, 0.5) * r_in
            _, _, ratio = check_rel_isop(
                _halfplane_raster(ang, off, r_out, h), j)
            ratios.append(ratio)
            trials += 1
        for _ in range(blobs):
            shape = random_star(rng, n=64, d=2, amp=0.25, kmax=5,
                                center_scale=0.3, normalize=False)
            shape = dilate(shape, rng.uniform(1.0, 2.4) * r_in
                           / float(shape.radii.mean()))
            try:
                rs = rasterize(shape, h)
                _, _, ratio = check_rel_isop(rs, j)
            except (ResolutionError, DegenerateAnnulusError):
                continue
            ratios.append(ratio)
            trials += 1
        cs.append(max(ratios))
    devs = [abs(c / cs[0] - 1.0) for c in cs[1:]]
    worst = 0.1 - max(devs)
    return _report("rel_isop", trials, int(worst < 0), worst,
                   {"constants": cs, "seed": seed, "blobs": blobs})


def run_en_lower_bound(p: float = 2.0, d: int = 2) -> dict:
    """Expansion ratio exact_lhs / (Cbar m) -> 1 along m = 1e-4 * 4^-k.

    Margin: 0.02 - |ratio - 1| at the smallest mass.
    """
    masses = [1e-4, 2.5e-5, 6.25e-6]
    ratios = []
    for m in masses:
        lhs, exp_ = check_en_lower_bound(m, p, d)
        ratios.append(lhs / exp_)
    worst = 0.02 - abs(ratios[-1] - 1.0)
    return _report("en_lower_bound", len(masses), int(worst < 0), worst,
                   {"p": p, "d": d, "masses": masses, "ratios": ratios})


def run_all_checks(seed: int = 0, n_samples: int = 1_000_000) -> list:
    """The default verify corpus: every checker's report, in fixed order."""
    return [
        run_raster_agreement(seed=seed),
        run_mc_agreement(seed=seed, n_samples=n_samples),
        run_v_lipschitz(seed=seed, n_samples=n_samples),
        run_rel_isop(seed=seed),
        run_en_lower_bound(),
    ]
