"""Constrained minimization of E_gamma over star-shaped configurations.

The optimizer is projected gradient descent with Armijo backtracking.
Gradients are the exact derivatives of the discrete energy: the
perimeter part differentiates the surface quadrature sum through the
finite-difference tangential gradient operators (using their exact
adjoints), and the Riesz part differentiates the desingularized pair
sum at the frozen kernel lengths {h0, h0/2},

    dV/dr_J = 2 sum_k [ (d/r_J) W_Jk phi_Jk + W_Jk s_k (theta_J . G_Jk) ],
    dV/dc_m = 2 sum_{a in m} W_a G_a,

where phi and G are the desingularized potential and its spatial
gradient accumulated over the whole node cloud and then Richardson
combined exactly like the energy.  Because energy and gradient use the
same frozen quadrature, the gradient matches central finite differences
of the energy to truncation order.

The unit-volume constraint is enforced either by projection (dilation
x -> t x with t = volume^{-1/d}, exact for the homogeneous density
|x|^p) or by the penalty lambda * | |Omega| - 1 | for multi-component
runs, with one final dilation.  Descent directions are preconditioned
by the H^1 metric (M + D^T M D)^{-1} on each radial block, which evens
out the k^2 stiffness of high angular modes.

The gamma <-> m scaling maps and the energy identity they satisfy,

    E_1(m^{1/d} Omega) = m^{(d-1+p)/d} E_gamma(Omega),
    gamma = m^{-(p + alpha - d - 1)/d},

break down at the critical exponent p* = d - alpha + 1, where the
functional is scale invariant and the map is undefined.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .energy import (
    VolumeQuadrature,
    extrapolation_exponent,
    pair_potential_field,
    pair_sum,
    total_energy,
    weighted_perimeter,
)
from .errors import (
    CriticalExponentError,
    OverlapError,
    ValidationError,
)
from .geometry import (
    Configuration,
    EnergyParams,
    SphereGrid,
    StarShape,
    dilate,
    make_ball,
    membership,
    ray_radius,
    total_volume,
    unit_ball_volume,
    volume,
)

__all__ = [
    "OptimizerOptions",
    "SweepRecord",
    "shape_gradient",
    "minimize",
    "critical_exponent",
    "gamma_to_mass",
    "mass_to_gamma",
    "asphericity",
    "build_initial_config",
    "sweep_gamma",
    "records_to_csv",
    "SWEEP_CSV_HEADER",
]


# ----------------------------------------------------------------------
# options and records
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerOptions:
    """Knobs for one minimize call."""

    max_iter: int = 2000
    g_tol: float = 1e-6
    s0: float = 1.0
    c1: float = 1e-4
    shrink: float = 0.5
    mode: str = "projection"
    lam: float = 1e4
    seed: int = 0
    init: tuple = ("ball",)

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if not self.g_tol > 0:
            raise ValidationError("g_tol must be positive")
        if not self.s0 > 0:
            raise ValidationError("s0 must be positive")
        if self.mode not in ("projection", "penalty"):
            raise ValidationError(f"unknown constraint mode {self.mode!r}")


@dataclass(frozen=True)
class SweepRecord:
    """Outcome of one minimization."""

    gamma: float
    p: float
    alpha: float
    d: int
    energy: float
    perimeter: float
    riesz: float
    volume: float
    n_components: int
    asphericity: float
    iterations: int
    converged: bool


SWEEP_CSV_HEADER = ("gamma,p,alpha,d,energy,perimeter,riesz,volume,"
                    "n_components,asphericity,iterations,converged")


def records_to_csv(records) -> str:
    """Render sweep records as CSV ('.' decimal, 17 significant digits)."""
    lines = [SWEEP_CSV_HEADER]
    for r in records:
        lines.append(",".join([
            _fmt(r.gamma), _fmt(r.p), _fmt(r.alpha), str(r.d),
            _fmt(r.energy), _fmt(r.perimeter), _fmt(r.riesz), _fmt(r.volume),
            str(r.n_components), _fmt(r.asphericity), str(r.iterations),
            str(int(r.converged)),
        ]))
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


# ----------------------------------------------------------------------
# scaling maps
# ----------------------------------------------------------------------

def critical_exponent(d: int, alpha: float) -> float:
    """p* = d - alpha + 1, the scale-invariant density power."""
    if not 0.0 < alpha < d:
        raise ValidationError(f"alpha must lie in (0, d), got {alpha}")
    return d - alpha + 1.0


def _scaling_exponent(params: EnergyParams) -> float:
    ex = params.p + params.alpha - params.d - 1.0
    if abs(ex) < 1e-12:
        raise CriticalExponentError(
            f"p = p* = {critical_exponent(params.d, params.alpha)}: "
            "the functional is scale invariant and gamma <-> m is undefined")
    return ex


def gamma_to_mass(gamma: float, params: EnergyParams) -> float:
    """m = gamma^(-d/(p + alpha - d - 1))."""
    if not gamma > 0:
        raise ValidationError("gamma must be positive")
    return gamma ** (-params.d / _scaling_exponent(params))


def mass_to_gamma(m: float, params: EnergyParams) -> float:
    """gamma = m^(-(p + alpha - d - 1)/d)."""
    if not m > 0:
        raise ValidationError("mass must be positive")
    return m ** (-_scaling_exponent(params) / params.d)


# ----------------------------------------------------------------------
# exact discrete gradient
# ----------------------------------------------------------------------

def _perimeter_gradient(shape: StarShape, params: EnergyParams):
    g = shape.grid
    d = g.d
    r = shape.radii
    w = g.weights
    comps = g.grad_components(r)
    slant = np.sqrt(r * r + sum(c * c for c in comps))
    y = shape.center[None, :] + r[:, None] * g.nodes
    if params.p == 0.0:
        dens = np.ones_like(r)
        dd_dr = np.zeros_like(r)
        dd_dc_fac = np.zeros_like(r)
    else:
        ny = np.linalg.norm(y, axis=1)
        dens = ny ** params.p
        fac = params.p * ny ** (params.p - 2.0)
        dd_dr = fac * np.einsum("ij,ij->i", y, g.nodes)
        dd_dc_fac = fac
    base = w * dens * r ** (d - 2)
    gr = w * dd_dr * r ** (d - 2) * slant
    gr += w * dens * (d - 2) * r ** (d - 3) * slant
    gr += base * r / slant
    gr += g.grad_components_T([base * c / slant for c in comps])
    gc = ((w * r ** (d - 2) * slant * dd_dc_fac)[:, None] * y).sum(axis=0)
    return gr, gc


def _riesz_gradient(config: Configuration, params: EnergyParams,
                    vq: VolumeQuadrature):
    comps = config.components
    clouds = [vq.nodes(s) for s in comps]
    X = np.concatenate([c[0] for c in clouds])
    W = np.concatenate([c[1] for c in clouds])
    q = extrapolation_exponent(params.d, params.alpha)
    (S1, phi1, G1), (S2, phi2, G2) = pair_potential_field(
        X, W, params.alpha, (vq.h, vq.h / 2.0))
    a = 2.0 ** q / (2.0 ** q - 1.0)
    b = 1.0 / (2.0 ** q - 1.0)
    value = a * S2 - b * S1
    phi = a * phi2 - b * phi1
    G = a * G2 - b * G1
    out = []
    i0 = 0
    for shape, (Xc, Wc) in zip(comps, clouds):
        g = shape.grid
        d = g.d
        n_nodes = Wc.size
        ns = vq.s.size
        Wm = Wc.reshape(-1, ns)
        pm = phi[i0:i0 + n_nodes].reshape(-1, ns)
        Gm = G[i0:i0 + n_nodes].reshape(-1, ns, d)
        proj = np.einsum("jkt,jt->jk", Gm, g.nodes)
        gr = 2.0 * ((d / shape.radii) * (Wm * pm).sum(axis=1)
                    + (Wm * vq.s[None, :] * proj).sum(axis=1))
        gc = 2.0 * (Wm[:, :, None] * Gm).sum(axis=(0, 1))
        out.append((gr, gc))
        i0 += n_nodes
    return value, out


def shape_gradient(config, params: EnergyParams, vq: VolumeQuadrature):
    """Exact gradient of the discrete E_gamma.

    Returns one (dE/dr, dE/dc) pair per component; both arrays are the
    coordinate partial derivatives of total_energy at frozen quadrature.
    """
    if isinstance(config, StarShape):
        config = Configuration((config,))
    grads = [_perimeter_gradient(s, params) for s in config.components]
    if params.gamma != 0.0:
        _, rg = _riesz_gradient(config, params, vq)
        grads = [(gp + params.gamma * gr, cp + params.gamma * cr)
                 for (gp, cp), (gr, cr) in zip(grads, rg)]
    return grads


def _volume_gradient(shape: StarShape):
    g = shape.grid
    return g.weights * shape.radii ** (g.d - 1)


# ----------------------------------------------------------------------
# H^1 preconditioner
# ----------------------------------------------------------------------

def _periodic_d1_matrix(n: int, h: float) -> np.ndarray:
    D = np.zeros((n, n))
    idx = np.arange(n)
    for off, coef in ((1, 8.0), (-1, -8.0), (2, -1.0), (-2, 1.0)):
        D[idx, (idx + off) % n] = coef / (12.0 * h)
    return D


def _h1_operator(grid: SphereGrid):
    M = np.diag(grid.weights)
    if grid.d == 2:
        D = _periodic_d1_matrix(grid.n, 2.0 * math.pi / grid.n)
        return M + D.T @ M @ D
    n_az = grid.azimuth.size
    Dp = np.kron(grid.dpolar, np.eye(n_az))
    Da = np.kron(np.eye(grid.polar.size),
                 _periodic_d1_matrix(n_az, 2.0 * math.pi / n_az))
    Da /= np.sin(np.repeat(grid.polar, n_az))[:, None]
    return M + Dp.T @ M @ Dp + Da.T @ M @ Da


class _Preconditioner:
    """Cached H^1 solves, one Cholesky factor per distinct grid."""

    def __init__(self):
        self._factors = {}

    def solve(self, grid: SphereGrid, rhs: np.ndarray) -> np.ndarray:
        key = id(grid)
        if key not in self._factors:
            self._factors[key] = cho_factor(_h1_operator(grid))
        return cho_solve(self._factors[key], rhs)


# ----------------------------------------------------------------------
# initial configurations and asphericity
# ----------------------------------------------------------------------

def build_initial_config(params: EnergyParams, grid: SphereGrid,
                         init: tuple = ("ball",)) -> Configuration:
    """Unit-volume starting configuration from an init spec.

    Specs: ("ball",), ("perturbed-ball", eps, mode_k),
    ("multiball", count, spacing).
    """
    d = params.d
    r0 = unit_ball_volume(d) ** (-1.0 / d)
    kind = init[0]
    if kind == "ball":
        return Configuration((make_ball(r0, np.zeros(d), grid),))
    if kind == "perturbed-ball":
        eps, k = float(init[1]), int(init[2])
        if d == 2:
            u = eps * np.cos(k * grid.theta)
        else:
            u = eps * np.polynomial.legendre.Legendre.basis(k)(
                np.cos(np.repeat(grid.polar, grid.azimuth.size)))
        shape = StarShape(grid=grid, center=np.zeros(d), radii=r0 * (1.0 + u))
        cfg = Configuration((dilate(shape, total_volume(
            Configuration((shape,))) ** (-1.0 / d)),))
        return cfg
    if kind == "multiball":
        count, spacing = int(init[1]), float(init[2])
        rb = (1.0 / (count * unit_ball_volume(d))) ** (1.0 / d)
        shapes = []
        for i in range(count):
            c = np.zeros(d)
            c[0] = spacing * (i - (count - 1) / 2.0)
            shapes.append(make_ball(rb, c, grid))
        cfg = Configuration(tuple(shapes))
        cfg.validate()
        return cfg
    raise ValidationError(f"unknown init spec {init!r}")


def asphericity(config) -> float:
    """H^1 norm of the best-fit zero-mean radial perturbation.

    The shape is ray-cast from the origin and compared with the
    volume-matched origin-centered ball; the zero-mean part of
    rho/R_vol - 1 is measured in H^1(S^{d-1}).  Multi-component
    configurations and shapes not containing the origin give +inf.
    """
    if isinstance(config, StarShape):
        config = Configuration((config,))
    if config.n_components != 1:
        return math.inf
    shape = config.components[0]
    g = shape.grid
    d = g.d
    vol = total_volume(config)
    r_vol = (vol / unit_ball_volume(d)) ** (1.0 / d)
    if np.all(shape.center == 0.0):
        rho = shape.radii
    else:
        if not membership(shape, np.zeros(d)):
            return math.inf
        try:
            rho = ray_radius(shape)
        except ValidationError:
            return math.inf
    w = g.weights
    u = rho / r_vol
    u0 = u - float(w @ u) / float(w.sum())
    comps = g.grad_components(u0)
    return math.sqrt(float(w @ (u0 * u0 + sum(c * c for c in comps))))


# ----------------------------------------------------------------------
# minimize
# ----------------------------------------------------------------------

def _flatten(grads):
    return np.concatenate([np.concatenate([gr, gc]) for gr, gc in grads])


def _rebuild(config: Configuration, z: np.ndarray) -> Configuration:
    shapes = []
    i0 = 0
    for s in config.components:
        n = s.radii.size
        d = s.grid.d
        radii = np.maximum(z[i0:i0 + n], s.r_min)
        center = z[i0 + n:i0 + n + d]
        shapes.append(StarShape(grid=s.grid, center=center, radii=radii,
                                r_min=s.r_min))
        i0 += n + d
    return Configuration(tuple(shapes))


def _pack(config: Configuration) -> np.ndarray:
    return np.concatenate([np.concatenate([s.radii, s.center])
                           for s in config.components])


def _project_volume(config: Configuration) -> Configuration:
    # per-component volume sum, skipping the disjointness certificate:
    # overlapping trial candidates must still be rescalable so that the
    # line search can reject them through the objective instead of
    # raising.  The radius floor is reapplied for the same reason.
    vol = math.fsum(volume(s) for s in config.components)
    t = vol ** (-1.0 / config.components[0].grid.d)
    return _rebuild(config, _pack(config) * t)


# Smoothing width of the penalty |volume - 1| inside the optimizer: the
# line search needs a differentiable model of the kink.
EPS_LAM = 1e-8

# Resolvability cap on the radial graph: max |grad_tau r| per component
# may not exceed SLOPE_LIMIT times the component's volume radius.  The
# frozen desingularized kernel cannot see features below its smoothing
# length, so without this cap a strongly repulsive Riesz term (large
# gamma) drives the descent into sub-grid "starburst" oscillations that
# hide interaction mass from the quadrature while the true energy grows.
# Candidates beyond the cap are outside the class of shapes the discrete
# model resolves and are rejected like overlapping ones.
SLOPE_LIMIT = 2.0


def _resolved(config: Configuration) -> bool:
    for s in config.components:
        d = s.grid.d
        r_vol = (volume(s) / unit_ball_volume(d)) ** (1.0 / d)
        comps = s.grid.grad_components(s.radii)
        slope2 = sum(c * c for c in comps)
        if float(slope2.max()) > (SLOPE_LIMIT * r_vol) ** 2:
            return False
    return True


def _objective(config: Configuration, params: EnergyParams,
               vq: VolumeQuadrature, lam: float) -> float:
    try:
        config.validate()
    except OverlapError:
        return math.inf
    if not _resolved(config):
        return math.inf
    per = math.fsum(weighted_perimeter(s, params) for s in config.components)
    val = per
    if params.gamma != 0.0:
        clouds = [vq.nodes(s) for s in config.components]
        X = np.concatenate([c[0] for c in clouds])
        W = np.concatenate([c[1] for c in clouds])
        q = extrapolation_exponent(params.d, params.alpha)
        S1, S2 = pair_sum(X, W, X, W, params.alpha, (vq.h, vq.h / 2.0))
        a = 2.0 ** q / (2.0 ** q - 1.0)
        b = 1.0 / (2.0 ** q - 1.0)
        val += params.gamma * (a * S2 - b * S1)
    if lam:
        val += lam * math.hypot(total_volume(config) - 1.0, EPS_LAM)
    return val


def minimize(init: Configuration, params: EnergyParams,
             opts: OptimizerOptions = OptimizerOptions(),
             callback=None):
    """Descend E_gamma from init under the unit-volume constraint.

    Returns (final configuration, SweepRecord).  Hitting the iteration
    cap or a failed line search returns the best configuration found
    with converged=False rather than raising.
    """
    if isinstance(init, StarShape):
        init = Configuration((init,))
    init.validate()
    vol0 = total_volume(init)
    if not 0.5 <= vol0 <= 2.0:
        raise ValidationError(f"initial volume {vol0:.6f} outside [0.5, 2]")
    projection = opts.mode == "projection"
    lam = 0.0 if projection else opts.lam
    vq = VolumeQuadrature.build(init)
    precond = _Preconditioner()

    config = _project_volume(init) if projection else init
    f = _objective(config, params, vq, lam)
    step = opts.s0
    converged = False
    iterations = 0

    r_scale = float(np.median(np.concatenate(
        [s.radii for s in config.components])))
    step = min(opts.s0, 0.05 * r_scale)

    for it in range(1, opts.max_iter + 1):
        iterations = it
        grads = shape_gradient(config, params, vq)
        g = _flatten(grads)
        vol = total_volume(config)
        n_vec = _flatten([(_volume_gradient(s), np.zeros(s.grid.d))
                          for s in config.components])
        if not projection:
            smooth = math.hypot(vol - 1.0, EPS_LAM)
            g = g + lam * ((vol - 1.0) / smooth) * n_vec
            kappa = lam * EPS_LAM ** 2 / smooth ** 3

        # preconditioned direction; in projection mode kept tangent to the
        # constraint, in penalty mode the penalty curvature along the volume
        # normal is folded in by a rank-1 (Sherman-Morrison) update
        pg_parts = []
        pn_parts = []
        i0 = 0
        for s in config.components:
            n = s.radii.size
            d = s.grid.d
            pg_parts.append(precond.solve(s.grid, g[i0:i0 + n]))
            pg_parts.append(g[i0 + n:i0 + n + d])
            pn_parts.append(precond.solve(s.grid, n_vec[i0:i0 + n]))
            pn_parts.append(n_vec[i0 + n:i0 + n + d])
            i0 += n + d
        direction = np.concatenate(pg_parts)
        Pn = np.concatenate(pn_parts)
        nPn = float(n_vec @ Pn)
        if projection:
            direction = direction - Pn * (float(n_vec @ direction) / nPn)
            g_proj = g - n_vec * (float(n_vec @ g) / float(n_vec @ n_vec))
        else:
            direction = direction - Pn * (
                kappa * float(n_vec @ direction) / (1.0 + kappa * nPn))
            g_proj = g
        g_norm = float(np.abs(g_proj).max())
        if callback is not None:
            callback(it, f, g_norm)
        if g_norm <= opts.g_tol:
            converged = True
            break

        gd = float(g @ direction)
        d_norm = float(np.abs(direction).max())
        if not (gd > 0 and d_norm > 0):
            break
        direction /= d_norm
        gd /= d_norm
        z = _pack(config)
        t = step
        accepted = False
        while t * r_scale > 1e-16:
            cand = _rebuild(config, z - t * direction)
            if projection:
                cand = _project_volume(cand)
            f_new = _objective(cand, params, vq, lam)
            if f_new <= f - opts.c1 * t * gd:
                accepted = True
                break
            t *= opts.shrink
        if not accepted:
            break
        config = cand
        f = f_new
        step = min(t * 2.0, opts.s0)

    if not projection:
        config = _project_volume(config)
    bd = total_energy(config, replace(params, lam=0.0))
    record = SweepRecord(
        gamma=params.gamma, p=params.p, alpha=params.alpha, d=params.d,
        energy=bd.total, perimeter=bd.weighted_perimeter, riesz=bd.riesz,
        volume=bd.volume, n_components=config.n_components,
        asphericity=asphericity(config), iterations=iterations,
        converged=converged)
    return config, record


# ----------------------------------------------------------------------
# gamma sweeps
# ----------------------------------------------------------------------

def _worker_count(n_jobs: int) -> int:
    env = os.environ.get("ISOSHAPE_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(n_jobs, os.cpu_count() or 1))


def sweep_gamma(gamma_list, params: EnergyParams, grid: SphereGrid,
                opts: OptimizerOptions = OptimizerOptions()):
    """Minimize at each gamma; keep the better of fresh and warm starts.

    Fresh starts run in parallel (ISOSHAPE_THREADS workers); the warm
    start pass chains the previous minimizer through increasing gamma.
    Individual failures are recorded, never raised.
    """
    gammas = [float(g) for g in gamma_list]
    if not gammas or any(g <= 0 for g in gammas) or sorted(gammas) != gammas:
        raise ValidationError("gamma list must be nonempty, positive, sorted")

    def fresh(gamma):
        p = replace(params, gamma=gamma)
        try:
            init = build_initial_config(p, grid, opts.init)
            return minimize(init, p, opts)
        except Exception:
            return None, SweepRecord(gamma, params.p, params.alpha, params.d,
                                     math.inf, math.inf, math.inf, math.nan,
                                     0, math.inf, 0, False)

    with ThreadPoolExecutor(max_workers=_worker_count(len(gammas))) as ex:
        results = list(ex.map(fresh, gammas))

    out = []
    prev_config = None
    for gamma, (config, record) in zip(gammas, results):
        p = replace(params, gamma=gamma)
        if prev_config is not None:
            try:
                warm_config, warm_record = minimize(prev_config, p, opts)
            except Exception:
                warm_config, warm_record = None, None
            if warm_record is not None and _better(warm_record, record):
                config, record = warm_config, warm_record
        out.append(record)
        if config is not None:
            prev_config = config
    return out


def _better(a: SweepRecord, b: SweepRecord) -> bool:
    """Energy comparison with asphericity tie-break below 1e-10."""
    if not math.isfinite(a.energy):
        return False
    if not math.isfinite(b.energy):
        return True
    if abs(a.energy - b.energy) < 1e-10:
        return a.asphericity < b.asphericity
    return a.energy < b.energy
