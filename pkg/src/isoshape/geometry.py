"""Star-shaped geometry over sphere quadrature grids.

A component is the radial graph

    x = c + r(theta) theta,    theta in S^(d-1),    r > 0,

sampled at the nodes of a quadrature grid on the unit sphere, so that
every measure-theoretic primitive reduces to a weighted nodal sum:

    |Omega| = (1/d) int_{S^(d-1)} r(theta)^d dsigma(theta).

Grids: d=2 uses n uniform angles with trapezoid weights 2*pi/n
(spectrally accurate for smooth integrands); d=3 uses Gauss-Legendre
nodes in the polar angle (poles excluded, avoiding the lat-long
coordinate singularity) times 2n uniform azimuths, weights scaled so
they sum to 4*pi.

Tangential derivatives are 4th-order finite differences: periodic
central stencils along uniform directions, Fornberg stencils on the
nonuniform polar nodes.  Finite differences (rather than spectral
transforms) keep the discrete energy a smooth function of the radial
samples, so the energy module can differentiate its quadrature sums
exactly.

A StarShape also has a continuous interpretation used by the raster and
Monte Carlo oracles: the radial samples are interpolated (periodic
cubic spline for d=2, bilinear on the lat-long grid for d=3) and
membership of a point x is the test |x - c| <= r_interp(angle(x - c)).
The quadrature path never touches the interpolant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import OverlapError, ValidationError

R_MIN_DEFAULT = 1e-6

GRID_KIND = {2: "uniform-angle", 3: "gauss-latlong"}


def unit_ball_volume(d: int) -> float:
    if d == 2:
        return math.pi
    if d == 3:
        return 4.0 * math.pi / 3.0
    raise ValidationError(f"unsupported dimension d={d}; only d=2 and d=3")


def sphere_area(d: int) -> float:
    """Surface measure of S^(d-1), i.e. d * omega_d."""
    return d * unit_ball_volume(d)


# ----------------------------------------------------------------------
# finite-difference stencils
# ----------------------------------------------------------------------

def _fornberg_weights(x, x0, m=1):
    """Derivative weights on arbitrary nodes x at the point x0.

    Standard Fornberg recursion; returns an (m+1, len(x)) array whose
    row k holds the weights of the k-th derivative.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    w = np.zeros((m + 1, n))
    w[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    w[k, i] = c1 * (k * w[k - 1, i - 1] - c5 * w[k, i - 1]) / c2
                w[0, i] = -c1 * c5 * w[0, i - 1] / c2
            for k in range(mn, 0, -1):
                w[k, j] = (c4 * w[k, j] - k * w[k - 1, j]) / c3
            w[0, j] = c4 * w[0, j] / c3
        c1 = c2
    return w


def _nonuniform_d1_matrix(x):
    """Dense first-derivative matrix on nonuniform nodes, 5-point stencils."""
    n = x.size
    D = np.zeros((n, n))
    for i in range(n):
        lo = min(max(i - 2, 0), n - 5)
        D[i, lo:lo + 5] = _fornberg_weights(x[lo:lo + 5], x[i], 1)[1]
    return D


def _periodic_d1(f, h, axis=-1):
    """4th-order central difference on a uniform periodic axis.

    The stencil is antisymmetric, so the matrix of this map is
    skew-symmetric: the adjoint is the negated operator.
    """
    fm1 = np.roll(f, 1, axis=axis)
    fp1 = np.roll(f, -1, axis=axis)
    fm2 = np.roll(f, 2, axis=axis)
    fp2 = np.roll(f, -2, axis=axis)
    return (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h)


# ----------------------------------------------------------------------
# grids
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature nodes and weights on S^(d-1), with derivative stencils."""

    d: int
    n: int
    nodes: np.ndarray      # (N, d) unit directions
    weights: np.ndarray    # (N,), sum = d * omega_d
    theta: np.ndarray | None = None    # d=2: angles of the nodes
    polar: np.ndarray | None = None    # d=3: polar angles, ascending, no poles
    azimuth: np.ndarray | None = None  # d=3: uniform azimuths
    dpolar: np.ndarray | None = None   # d=3: dense polar derivative matrix

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def shape2d(self):
        # lat-long layout of flat node index: i_polar * n_azimuth + i_azimuth
        return (self.polar.size, self.azimuth.size)

    # -- first-derivative components in an orthonormal tangent frame --
    # d=2: [df/dtheta]; d=3: [df/dphi, (df/dpsi)/sin(phi)].
    # Linear maps of the nodal field; the _T variant applies the plain
    # coordinate transpose of each map (needed for exact gradients of
    # quadrature sums).

    def grad_components(self, f):
        f = np.asarray(f, dtype=float)
        if self.d == 2:
            return [_periodic_d1(f, 2.0 * math.pi / self.n)]
        F = f.reshape(self.shape2d)
        dp = self.dpolar @ F
        da = _periodic_d1(F, 2.0 * math.pi / self.azimuth.size, axis=1)
        da /= np.sin(self.polar)[:, None]
        return [dp.ravel(), da.ravel()]

    def grad_components_T(self, comps):
        if self.d == 2:
            return -_periodic_d1(np.asarray(comps[0], dtype=float),
                                 2.0 * math.pi / self.n)
        shp = self.shape2d
        t1 = np.asarray(comps[0], dtype=float).reshape(shp)
        t2 = np.asarray(comps[1], dtype=float).reshape(shp)
        out = self.dpolar.T @ t1
        out -= _periodic_d1(t2 / np.sin(self.polar)[:, None],
                            2.0 * math.pi / self.azimuth.size, axis=1)
        return out.ravel()

    def tangent_frame(self):
        """Orthonormal tangent vectors at each node, ambient coordinates."""
        if self.d == 2:
            t = self.theta
            return [np.stack([-np.sin(t), np.cos(t)], axis=1)]
        phi = np.repeat(self.polar, self.azimuth.size)
        psi = np.tile(self.azimuth, self.polar.size)
        e_phi = np.stack([np.cos(phi) * np.cos(psi),
                          np.cos(phi) * np.sin(psi),
                          -np.sin(phi)], axis=1)
        e_psi = np.stack([-np.sin(psi), np.cos(psi), np.zeros_like(psi)], axis=1)
        return [e_phi, e_psi]


def make_grid(d: int, n: int) -> SphereGrid:
    """Build the quadrature grid on S^(d-1).

    Parameters
    ----------
    d : 2 or 3.
    n : resolution, n >= 8.  d=2: n uniform angles; d=3: n Gauss polar
        nodes times 2n uniform azimuths.
    """
    if d not in (2, 3):
        raise ValidationError(f"unsupported dimension d={d}; only d=2 and d=3")
    if n < 8:
        raise ValidationError(f"resolution too small: n={n}, need n >= 8")
    if d == 2:
        theta = 2.0 * math.pi * np.arange(n) / n
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(n, 2.0 * math.pi / n)
        return SphereGrid(d=2, n=n, nodes=nodes, weights=weights, theta=theta)
    x, v = np.polynomial.legendre.leggauss(n)
    polar = np.arccos(x)[::-1].copy()          # ascending, strictly inside (0, pi)
    vpol = v[::-1].copy()
    na = 2 * n
    azimuth = 2.0 * math.pi * np.arange(na) / na
    phi = np.repeat(polar, na)
    psi = np.tile(azimuth, n)
    nodes = np.stack([np.sin(phi) * np.cos(psi),
                      np.sin(phi) * np.sin(psi),
                      np.cos(phi)], axis=1)
    weights = np.repeat(vpol * (2.0 * math.pi / na), na)
    return SphereGrid(d=3, n=n, nodes=nodes, weights=weights,
                      polar=polar, azimuth=azimuth,
                      dpolar=_nonuniform_d1_matrix(polar))


def tangential_gradient(field, grid: SphereGrid) -> np.ndarray:
    """Tangential gradient of a nodal field, as ambient (N, d) vectors."""
    comps = grid.grad_components(field)
    frame = grid.tangent_frame()
    out = comps[0][:, None] * frame[0]
    for c, e in zip(comps[1:], frame[1:]):
        out += c[:, None] * e
    return out


# ----------------------------------------------------------------------
# shapes and configurations
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StarShape:
    """Radial graph x = c + r(theta) theta over a sphere grid."""

    grid: SphereGrid
    center: np.ndarray
    radii: np.ndarray
    r_min: float = R_MIN_DEFAULT
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(-1)
        r = np.array(self.radii, dtype=float).reshape(-1)
        if c.size != self.grid.d:
            raise ValidationError(f"center has {c.size} coordinates, grid d={self.grid.d}")
        if r.size != self.grid.n_nodes:
            raise ValidationError(f"got {r.size} radial samples for {self.grid.n_nodes} nodes")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(r)):
            raise ValidationError("non-finite center or radial sample")
        if np.any(r < self.r_min):
            raise ValidationError(f"radius below floor r_min={self.r_min:g}")
        c.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radii", r)

    @property
    def max_radius(self) -> float:
        return float(self.radii.max())


def make_ball(R: float, center, grid: SphereGrid, r_min: float = R_MIN_DEFAULT) -> StarShape:
    if not R >= r_min:
        raise ValidationError(f"radius {R:g} below floor r_min={r_min:g}")
    return StarShape(grid=grid, center=np.asarray(center, dtype=float),
                     radii=np.full(grid.n_nodes, float(R)), r_min=r_min)


@dataclass(frozen=True, eq=False)
class Configuration:
    """Ordered list of star-shaped components; may be empty."""

    components: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def n_components(self) -> int:
        return len(self.components)

    def validate(self):
        """Certify pairwise disjointness by the bounding-sphere test."""
        comps = self.components
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                dist = float(np.linalg.norm(comps[i].center - comps[j].center))
                if dist <= comps[i].max_radius + comps[j].max_radius:
                    raise OverlapError(
                        f"components {i} and {j}: center distance {dist:g} "
                        f"<= sum of bounding radii "
                        f"{comps[i].max_radius + comps[j].max_radius:g}")
        return self


@dataclass(frozen=True)
class EnergyParams:
    """Physical parameters: a(x) = |x|^p, kernel |x-y|^(-alpha), strength gamma."""

    d: int
    p: float
    alpha: float
    gamma: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValidationError(f"unsupported dimension d={self.d}")
        if not (self.p >= 0 and math.isfinite(self.p)):
            raise ValidationError(f"density exponent p={self.p}; need p >= 0")
        if not (0.0 < self.alpha < self.d):
            raise ValidationError(f"alpha={self.alpha} outside (0, d) with d={self.d}")
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ValidationError(f"gamma={self.gamma}; need gamma >= 0")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValidationError(f"lambda={self.lam}; need lambda >= 0")


# ----------------------------------------------------------------------
# measures
# ----------------------------------------------------------------------

def volume(shape: StarShape) -> float:
    """|Omega| = (1/d) int r^d dsigma by grid quadrature."""
    d = shape.grid.d
    return float(np.dot(shape.grid.weights, shape.radii ** d)) / d


def total_volume(config: Configuration) -> float:
    config.validate()
    return sum(volume(s) for s in config.components)


def dilate(obj, t: float):
    """Dilation about the origin: scales centers and radial samples by t."""
    if not t > 0:
        raise ValidationError(f"dilation scale must be positive, got {t:g}")
    if isinstance(obj, Configuration):
        return Configuration(tuple(dilate(s, t) for s in obj.components))
    return StarShape(grid=obj.grid, center=obj.center * t,
                     radii=obj.radii * t, r_min=obj.r_min)


def translate(shape: StarShape, v) -> StarShape:
    return StarShape(grid=shape.grid, center=shape.center + np.asarray(v, dtype=float),
                     radii=shape.radii, r_min=shape.r_min)


# ----------------------------------------------------------------------
# continuous interpretation (shared by the raster / Monte Carlo oracles)
# ----------------------------------------------------------------------

def _spline(shape: StarShape) -> CubicSpline:
    sp = shape._cache.get("spline")
    if sp is None:
        g = shape.grid
        th = np.append(g.theta, 2.0 * math.pi)
        rr = np.append(shape.radii, shape.radii[0])
        sp = CubicSpline(th, rr, bc_type="periodic")
        shape._cache["spline"] = sp
    return sp


def radial_at_directions(shape: StarShape, dirs) -> np.ndarray:
    """Interpolated radial function at arbitrary unit directions."""
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    g = shape.grid
    if g.d == 2:
        ang = np.mod(np.arctan2(dirs[:, 1], dirs[:, 0]), 2.0 * math.pi)
        return _spline(shape)(ang)
    phi = np.arccos(np.clip(dirs[:, 2], -1.0, 1.0))
    psi = np.mod(np.arctan2(dirs[:, 1], dirs[:, 0]), 2.0 * math.pi)
    return _bilinear(shape, phi, psi)


def _bilinear(shape: StarShape, phi, psi):
    g = shape.grid
    R = shape.radii.reshape(g.shape2d)
    pol, az = g.polar, g.azimuth
    na = az.size
    dpsi = 2.0 * math.pi / na
    # polar interval, clamped: constant radial caps beyond the extreme rows
    i = np.searchsorted(pol, phi) - 1
    i = np.clip(i, 0, pol.size - 2)
    t = (phi - pol[i]) / (pol[i + 1] - pol[i])
    t = np.clip(t, 0.0, 1.0)
    # azimuth interval with periodic wrap
    j = np.floor(psi / dpsi).astype(int) % na
    u = psi / dpsi - np.floor(psi / dpsi)
    jp = (j + 1) % na
    r00 = R[i, j]
    r01 = R[i, jp]
    r10 = R[i + 1, j]
    r11 = R[i + 1, jp]
    return (1 - t) * ((1 - u) * r00 + u * r01) + t * ((1 - u) * r10 + u * r11)


def membership(shape: StarShape, pts) -> np.ndarray:
    """Point-in-set test |x - c| <= r_interp(angle(x - c))."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    y = pts - shape.center
    rho = np.linalg.norm(y, axis=1)
    out = np.empty(rho.size, dtype=bool)
    at_center = rho == 0.0
    out[at_center] = True
    if np.any(~at_center):
        dirs = y[~at_center] / rho[~at_center, None]
        out[~at_center] = rho[~at_center] <= radial_at_directions(shape, dirs)
    return out


def config_membership(config: Configuration, pts) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    out = np.zeros(pts.shape[0], dtype=bool)
    for s in config.components:
        out |= membership(s, pts)
    return out


def interpolated_volume(shape: StarShape) -> float:
    """Measure of the interpreted set (1/d) int r_interp^d, to near machine precision."""
    g = shape.grid
    if g.d == 2:
        sp = _spline(shape)
        th = np.append(g.theta, 2.0 * math.pi)
        xg, wg = np.polynomial.legendre.leggauss(4)   # exact for the cubic squared
        a, b = th[:-1], th[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        pts = mid[:, None] + half[:, None] * xg[None, :]
        vals = sp(pts.ravel()).reshape(pts.shape) ** 2
        return 0.5 * float(np.sum(vals @ wg * half))
    # d=3: tensor Gauss per lat-long cell on the bilinear interpolant, plus
    # the constant-radius polar caps left by clamping.
    pol, az = g.polar, g.azimuth
    na = az.size
    dpsi = 2.0 * math.pi / na
    xg, wg = np.polynomial.legendre.leggauss(6)
    phi_a, phi_b = pol[:-1], pol[1:]
    tot = 0.0
    for k in range(xg.size):
        phi_k = 0.5 * (phi_a + phi_b) + 0.5 * (phi_b - phi_a) * xg[k]
        wphi = 0.5 * (phi_b - phi_a) * wg[k]
        PHI = np.repeat(phi_k, na)
        WPHI = np.repeat(wphi, na)
        for l in range(xg.size):
            off = 0.5 * dpsi * (1.0 + xg[l])
            wpsi = 0.5 * dpsi * wg[l]
            PSI = np.mod(np.tile(az, phi_k.size) + off, 2.0 * math.pi)
            r = _bilinear(shape, PHI, PSI)
            tot += wpsi * float(np.dot(WPHI, (r ** 3 / 3.0) * np.sin(PHI)))
    # caps: the interpolant is constant in phi beyond the extreme Gauss rows
    # and linear in psi there, so 3-point Gauss is exact for the cube
    xg2, wg2 = np.polynomial.legendre.leggauss(3)
    for row_phi, (clo, chi) in ((pol[0], (0.0, pol[0])), (pol[-1], (pol[-1], math.pi))):
        azint = 0.0
        for l in range(3):
            off = 0.5 * dpsi * (1.0 + xg2[l])
            r = _bilinear(shape, np.full(na, row_phi), np.mod(az + off, 2.0 * math.pi))
            azint += float(np.sum(r ** 3 / 3.0)) * 0.5 * dpsi * wg2[l]
        tot += (math.cos(clo) - math.cos(chi)) * azint
    return tot


def ray_radius(shape: StarShape, dirs=None) -> np.ndarray:
    """Distance from the origin to the boundary along unit directions.

    Bisection on the membership test; requires the origin to lie inside.
    """
    g = shape.grid
    if dirs is None:
        dirs = g.nodes
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    if not membership(shape, np.zeros((1, g.d)))[0]:
        raise ValidationError("origin is not inside the shape; ray cast undefined")
    m = dirs.shape[0]
    lo = np.zeros(m)
    hi = np.full(m, float(np.linalg.norm(shape.center)) + shape.max_radius * (1.0 + 1e-9))
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        inside = membership(shape, mid[:, None] * dirs)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


# ----------------------------------------------------------------------
# shape files
# ----------------------------------------------------------------------

def config_to_dict(config: Configuration) -> dict:
    if config.n_components == 0:
        raise ValidationError("cannot serialize an empty configuration")
    d = config.components[0].grid.d
    comps = []
    for s in config.components:
        if s.grid.d != d:
            raise ValidationError("mixed dimensions in configuration")
        comps.append({
            "center": [float(x) for x in s.center],
            "grid": {"kind": GRID_KIND[d], "n": int(s.grid.n)},
            "radial": [float(r) for r in s.radii],
        })
    return {"d": d, "components": comps}


def dict_to_config(obj: dict, r_min: float = R_MIN_DEFAULT) -> Configuration:
    try:
        d = int(obj["d"])
        raw = obj["components"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"shape file missing required key: {exc}") from exc
    if d not in (2, 3):
        raise ValidationError(f"shape file has unsupported dimension d={d}")
    comps = []
    grids: dict[int, SphereGrid] = {}
    for entry in raw:
        gspec = entry.get("grid", {})
        kind = gspec.get("kind")
        if kind != GRID_KIND[d]:
            raise ValidationError(f"grid kind {kind!r} does not match d={d}")
        n = int(gspec.get("n", 0))
        if n not in grids:
            grids[n] = make_grid(d, n)
        comps.append(StarShape(grid=grids[n],
                               center=np.asarray(entry["center"], dtype=float),
                               radii=np.asarray(entry["radial"], dtype=float),
                               r_min=r_min))
    return Configuration(tuple(comps))


def save_configuration(path, config: Configuration):
    with open(path, "w") as fh:
        json.dump(config_to_dict(config), fh)
        fh.write("\n")


def load_configuration(path, r_min: float = R_MIN_DEFAULT) -> Configuration:
    with open(path) as fh:
        return dict_to_config(json.load(fh), r_min=r_min)
