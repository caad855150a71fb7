"""Sigma-form Painlevé V solver for the sine-process generating function.

The central object is the one-parameter family sigma0(t; zeta) of solutions
of the sigma-Painlevé V equation

    (t s'')^2 + (t s' - s) (t s' - s + 4 s'^2) = 0

that are analytic at t = 0 and start off as

    sigma0(t; zeta) = -(t/2pi) zeta - (t/2pi)^2 zeta^2 + O(t^3).

For zeta on the circle |1 - zeta| = 1 (parametrized by zeta = 1 - e^{i omega})
the accumulated log-integral  integral_0^lambda sigma0(t)/t dt  is the
logarithm of a sine-kernel Fredholmdeterminant; its exponential is the
integrand of the spacing power spectrum.

Integration strategy: a truncated power series on [0, t0], then adaptive
Runge-Kutta on the second-order form  s'' = +-sqrt(-f (f + 4 s'^2))/t  with
f = t s' - s, the complex square-root branch tracked by continuity.  The
second-order form keeps the trajectory exactly on the constraint manifold;
the differentiated third-order form drifts off it exponentially along
complex paths.  For omega close to pi the determinant has zeros on the real
t-axis (sigma has poles there), so the path is lifted to Im t = delta and
real-axis values are recovered by a short vertical descent.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import solve_ivp

TWO_PI = 2.0 * np.pi


class SolverError(RuntimeError):
    """Adaptive integration failed; carries the failure location."""

    def __init__(self, message, t_star=None):
        super().__init__(message)
        self.t_star = t_star


class BranchTrackingError(SolverError):
    """The sigma'' square-root branch could not be resolved."""


@dataclass(frozen=True)
class SpectralParameter:
    """Point zeta = 1 - e^{i omega} on the circle |1 - zeta| = 1."""

    omega: float

    def __post_init__(self):
        if not np.isfinite(self.omega):
            raise ValueError("omega must be finite")
        if not (0.0 <= self.omega <= np.pi):
            raise ValueError(f"omega must lie in [0, pi], got {self.omega}")

    @property
    def zeta(self) -> complex:
        return 1.0 - np.exp(1j * self.omega)

    @property
    def z(self) -> complex:
        return np.exp(1j * self.omega)


@dataclass(frozen=True)
class SolverConfig:
    series_order: int = 14
    series_rtol: float = 1e-14     # last retained series term vs partial sum
    rtol: float = 1e-12
    atol: float = 1e-13
    residual_tol: float = 1e-9     # ODE residual relative to max(1, |sigma|^2)
    elevation_omega: float = 2.9   # lift the path for omega beyond this
    elevation: float = 1.0         # Im t of the lifted path


DEFAULT_CONFIG = SolverConfig()


def _as_zeta(zeta) -> complex:
    if isinstance(zeta, SpectralParameter):
        return zeta.zeta
    z = complex(zeta)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError("zeta must be finite")
    return z


def series_sigma0(zeta, order: int) -> np.ndarray:
    """Coefficients c_1..c_order of sigma0(t; zeta) = sum c_n t^n.

    c_1 and c_2 are fixed by the boundary behaviour; every higher
    coefficient is determined by substituting the truncated series into the
    sigma equation and matching powers of t, where it enters linearly.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    z = _as_zeta(zeta)
    c = np.zeros(order + 1, dtype=complex)
    if z == 0:
        return c[1:]
    c[1] = -z / TWO_PI
    c[2] = -(z / TWO_PI) ** 2

    def residual_coeff(coeffs, n):
        # coefficient of t^n of (t s'')^2 + f^2 + 4 f s'^2, f = t s' - s
        sp = np.arange(1, len(coeffs)) * coeffs[1:]
        spp = np.arange(1, len(sp)) * sp[1:]
        t_spp = np.concatenate(([0.0], spp))
        f = np.concatenate(([0.0], sp)) - coeffs[: len(sp) + 1]
        g = npoly.polymul(t_spp, t_spp)
        g = npoly.polyadd(g, npoly.polymul(f, f))
        g = npoly.polyadd(g, 4.0 * npoly.polymul(f, npoly.polymul(sp, sp)))
        return g[n] if n < len(g) else 0.0

    for n in range(3, order + 1):
        r0 = residual_coeff(c, n)
        c[n] = 1.0
        r1 = residual_coeff(c, n)
        c[n] = -r0 / (r1 - r0)
    return c[1:]


class _Series:
    """Truncated sigma0 series with evaluation helpers."""

    def __init__(self, zeta: complex, config: SolverConfig):
        self.zeta = zeta
        self.order = config.series_order
        self.coeffs = series_sigma0(zeta, self.order)  # c_1..c_order

    def radius(self, config: SolverConfig) -> float:
        """Largest t0 at which the last term is negligible vs the sum."""
        if self.zeta == 0:
            return 1.0
        t0 = 0.5
        c = self.coeffs
        n = np.arange(1, self.order + 1)
        while t0 > 1e-3:
            total = np.sum(c * t0 ** n)
            if abs(c[-1] * t0 ** self.order) < config.series_rtol * max(abs(total), 1e-30):
                break
            t0 *= 0.8
        return t0

    def sigma(self, t):
        n = np.arange(1, self.order + 1)
        t = np.asarray(t, dtype=complex)
        return np.sum(self.coeffs * t[..., None] ** n, axis=-1)

    def sigma_prime(self, t):
        n = np.arange(1, self.order + 1)
        t = np.asarray(t, dtype=complex)
        return np.sum(n * self.coeffs * t[..., None] ** (n - 1), axis=-1)

    def sigma_pp(self, t):
        n = np.arange(1, self.order + 1)
        t = np.asarray(t, dtype=complex)
        return np.sum(n * (n - 1) * self.coeffs * t[..., None] ** (n - 2), axis=-1)

    def log_integral(self, t):
        n = np.arange(1, self.order + 1)
        t = np.asarray(t, dtype=complex)
        return np.sum(self.coeffs / n * t[..., None] ** n, axis=-1)


def _make_rhs(t_of_x, jacobian, branch_state):
    """RHS of the first-order system (sigma, sigma', log_integral).

    sigma'' is the square root of -f (f + 4 sigma'^2)/t^2 whose branch is
    the one closer to the previously selected value.  Used on the complex
    (lifted) path pieces, where it keeps the trajectory exactly on the
    constraint manifold; the differentiated third-order form drifts there.
    """

    def rhs(x, y):
        t = t_of_x(x)
        s, sp, _ = y
        f = t * sp - s
        r = np.sqrt(-f * (f + 4.0 * sp * sp) + 0j) / t
        prev = branch_state["spp"]
        spp = r if abs(r - prev) <= abs(-r - prev) else -r
        branch_state["spp"] = spp
        return np.array([sp, spp, s / t], dtype=complex)

    return rhs


def _rhs_third_order(x, y):
    """RHS of (sigma, sigma', sigma'', log_integral) on the real axis.

    The differentiated form sigma''' = -(t s'' + t f + 2 t s'^2 + 4 f s')/t^2
    is branch-free; constraint perturbations decay like 1/t along the real
    axis, so no drift control is needed there.  On complex paths the same
    perturbations grow and the branch-tracked second-order form is used
    instead.
    """
    t = x
    s, sp, spp, _ = y
    f = t * sp - s
    sppp = -(t * spp + t * f + 2.0 * t * sp * sp + 4.0 * f * sp) / (t * t)
    return np.array([sp, spp, sppp, s / t], dtype=complex)


class _Segment:
    """Dense-output piece of the trajectory over [x_lo, x_hi] in path arclength."""

    __slots__ = ("x_lo", "x_hi", "sol")

    def __init__(self, x_lo, x_hi, sol):
        self.x_lo = x_lo
        self.x_hi = x_hi
        self.sol = sol


@dataclass
class SigmaTrajectory:
    """sigma0 along a path in the t-plane, with its accumulated log-integral.

    ``t_grid``/``sigma``/``sigma_prime``/``log_integral`` tabulate the
    accepted integration steps (real positions along the horizontal part of
    the path).  ``series_radius`` is the handoff point below which the
    truncated power series is authoritative.
    """

    zeta: complex
    series_radius: float
    elevation: float                      # 0.0 for a real-axis path
    t_grid: np.ndarray = field(default_factory=lambda: np.zeros(1))
    sigma: np.ndarray = field(default_factory=lambda: np.zeros(1, complex))
    sigma_prime: np.ndarray = field(default_factory=lambda: np.zeros(1, complex))
    log_integral: np.ndarray = field(default_factory=lambda: np.zeros(1, complex))

    _series: _Series | None = None
    _segments: list = field(default_factory=list)
    _branch_state: dict = field(default_factory=dict)
    _vertical: object = None              # dense solution of the initial lift
    _config: SolverConfig = DEFAULT_CONFIG
    _descent_cache: dict = field(default_factory=dict)

    # -- evaluation --------------------------------------------------------

    @property
    def _L_idx(self) -> int:
        # real-axis segments carry [s, s', s'', L]; lifted ones [s, s', L]
        return 2 if self.elevation else 3

    @property
    def t_max(self) -> float:
        return self._segments[-1].x_hi if self._segments else self.series_radius

    def _segment_state(self, x: float) -> np.ndarray:
        i = bisect.bisect_left([seg.x_hi for seg in self._segments], x)
        i = min(i, len(self._segments) - 1)
        return self._segments[i].sol(x)

    def state_at(self, x: float) -> np.ndarray:
        """Solver state at path position x; the last entry is the
        log-integral, the first two are (sigma, sigma')."""
        if x <= self.series_radius:
            head = [self._series.sigma(x), self._series.sigma_prime(x)]
            if not self.elevation:
                head.append(self._series.sigma_pp(x))
            return np.array(head + [self._series.log_integral(x)],
                            dtype=complex)
        return self._segment_state(x)

    def eval_log_integral(self, x) -> np.ndarray:
        """Log-integral at path positions x (vectorized)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape, dtype=complex)
        small = x <= self.series_radius
        if np.any(small):
            out[small] = self._series.log_integral(x[small])
        for i in np.nonzero(~small)[0]:
            out[i] = self._segment_state(x[i])[self._L_idx]
        return out

    def eval_sigma(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape, dtype=complex)
        small = x <= self.series_radius
        if np.any(small):
            out[small] = self._series.sigma(x[small])
        for i in np.nonzero(~small)[0]:
            out[i] = self._segment_state(x[i])[0]
        return out

    def log_integral_real_axis(self, lam: float) -> complex:
        """Log-integral at the real point t = lam, descending if lifted."""
        if lam <= self.series_radius:
            return complex(self._series.log_integral(lam))
        if self.elevation == 0.0:
            return complex(self._segment_state(lam)[self._L_idx])
        key = round(lam, 12)
        if key in self._descent_cache:
            return self._descent_cache[key]
        y = self._segment_state(lam)
        branch = {"spp": self._branch_spp(lam, y)}
        rhs = _make_rhs(lambda tau: lam + 1j * tau, 1j, branch)
        sol = solve_ivp(
            lambda tau, yy: 1j * rhs(tau, yy), (self.elevation, 0.0), y,
            method="DOP853", rtol=self._config.rtol, atol=self._config.atol)
        if not sol.success:
            raise SolverError(
                f"descent to the real axis failed near t = {lam}", t_star=lam)
        val = complex(sol.y[2, -1])
        self._descent_cache[key] = val
        return val

    def _branch_spp(self, x, y):
        t = x + 1j * self.elevation
        s, sp, _ = y
        f = t * sp - s
        r = np.sqrt(-f * (f + 4.0 * sp * sp) + 0j) / t
        prev = self._branch_state.get("spp", r)
        return r if abs(r - prev) <= abs(-r - prev) else -r

    # -- residual diagnostics ---------------------------------------------

    def residual(self, x) -> np.ndarray:
        """|(t s'')^2 + f (f + 4 s'^2)| / max(1, |s|^2) along the path.

        sigma'' is re-derived by differentiating sigma' with central
        differences, independently of the branch selection.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        # (t sigma'')^2 is large on lifted paths, so the stencil must
        # deliver sigma'' to ~1e-11: a wide 7-point rule keeps the state
        # noise averaged down while its h^6 truncation stays negligible
        h = 4e-3
        out = np.empty(x.shape)
        for i, xi in enumerate(x):
            t = xi + 1j * self.elevation if xi > self.series_radius else xi
            st = self.state_at(xi)
            s, sp = st[0], st[1]
            if xi > 3 * h + 1e-3:
                vals = [self.state_at(xi + m * h)[1]
                        for m in (-3, -2, -1, 1, 2, 3)]
                spp_fd = (-vals[0] + 9 * vals[1] - 45 * vals[2]
                          + 45 * vals[3] - 9 * vals[4] + vals[5]) / (60.0 * h)
            else:
                lo = max(xi - h, 1e-3)
                spp_fd = (self.state_at(xi + h)[1] - self.state_at(lo)[1]) / (
                    xi + h - lo)
            f = t * sp - s
            g = (t * spp_fd) ** 2 + f * (f + 4.0 * sp * sp)
            out[i] = abs(g) / max(1.0, abs(s) ** 2)
        return out

    # -- construction ------------------------------------------------------

    def extend(self, t_max: float):
        """Grow the trajectory monotonically up to path position t_max."""
        if t_max <= self.t_max:
            return self
        if self.zeta == 0:
            return self
        x0 = self.t_max
        y0 = self.state_at(x0) if self._segments else self._initial_state()
        if self.elevation:
            rhs = _make_rhs(lambda x: x + 1j * self.elevation, 1.0,
                            self._branch_state)
        else:
            rhs = _rhs_third_order
        # lifted segments need tighter control: dense-output wiggle and
        # the accumulated error of the branch-tracked form both sit near
        # the residual tolerance at the default settings
        rtol, atol, cap = (self._config.rtol, self._config.atol, np.inf)
        if self.elevation:
            rtol, atol, cap = 1e-13, 1e-14, 0.02
        sol = solve_ivp(rhs, (x0, t_max), y0, method="DOP853",
                        rtol=rtol, atol=atol, max_step=cap,
                        dense_output=True)
        if not sol.success:
            raise SolverError(
                f"integration stalled at t = {sol.t[-1]:.6g} "
                f"(omega-path for zeta = {self.zeta})", t_star=float(sol.t[-1]))
        self._segments.append(_Segment(x0, t_max, sol.sol))
        self.t_grid = np.concatenate([self.t_grid, sol.t[1:]])
        self.sigma = np.concatenate([self.sigma, sol.y[0, 1:]])
        self.sigma_prime = np.concatenate([self.sigma_prime, sol.y[1, 1:]])
        self.log_integral = np.concatenate(
            [self.log_integral, sol.y[self._L_idx, 1:]])
        return self

    def _initial_state(self) -> np.ndarray:
        ser = self._series
        t0 = self.series_radius
        if not self.elevation:
            return np.array([ser.sigma(t0), ser.sigma_prime(t0),
                             ser.sigma_pp(t0), ser.log_integral(t0)],
                            dtype=complex)
        y = np.array([ser.sigma(t0), ser.sigma_prime(t0), ser.log_integral(t0)],
                     dtype=complex)
        self._branch_state["spp"] = complex(ser.sigma_pp(t0))
        if self.elevation:
            rhs = _make_rhs(lambda tau: t0 + 1j * tau, 1j, self._branch_state)
            sol = solve_ivp(lambda tau, yy: 1j * rhs(tau, yy),
                            (0.0, self.elevation), y, method="DOP853",
                            rtol=self._config.rtol, atol=self._config.atol,
                            dense_output=True)
            if not sol.success:
                raise SolverError("vertical lift failed", t_star=t0)
            self._vertical = sol.sol
            y = sol.y[:, -1]
        return y

    def vertical_log_integral(self, tau) -> np.ndarray:
        """Log-integral along the initial lift t = t0 + i tau (lifted paths)."""
        if self._vertical is None:
            raise ValueError("trajectory has no vertical segment")
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return np.array([self._vertical(v)[2] for v in tau])


def solve_sigma0(zeta, t_max: float, config: SolverConfig = DEFAULT_CONFIG,
                 elevation: float | None = None) -> SigmaTrajectory:
    """Integrate sigma0(t; zeta) with its log-integral up to t_max.

    ``elevation`` overrides the automatic path choice: for zeta on the
    circle with omega > config.elevation_omega the path is lifted to
    Im t = config.elevation to stay clear of real-axis poles.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    z = _as_zeta(zeta)
    if z == 0:
        traj = SigmaTrajectory(zeta=0j, series_radius=t_max, elevation=0.0)
        traj._series = _Series(0j, config)
        traj.t_grid = np.array([0.0, t_max])
        traj.sigma = np.zeros(2, complex)
        traj.sigma_prime = np.zeros(2, complex)
        traj.log_integral = np.zeros(2, complex)
        return traj
    if elevation is None:
        omega = _omega_of(z)
        elevation = (config.elevation
                     if (omega is not None and omega > config.elevation_omega)
                     else 0.0)
    ser = _Series(z, config)
    traj = SigmaTrajectory(zeta=z, series_radius=ser.radius(config),
                           elevation=elevation, _series=ser, _config=config)
    traj.t_grid = np.array([0.0])
    traj.sigma = np.zeros(1, complex)
    traj.sigma_prime = np.array([ser.coeffs[0]])
    traj.log_integral = np.zeros(1, complex)
    traj.extend(t_max)
    return traj


def _omega_of(z: complex) -> float | None:
    """omega with zeta = 1 - e^{i omega}, if z lies on the circle."""
    if abs(abs(1.0 - z) - 1.0) > 1e-9:
        return None
    w = np.angle(1.0 - z)
    return abs(w) if abs(w) > 0 else 0.0


class TrajectoryCache:
    """Trajectories keyed by zeta, extended monotonically on demand."""

    def __init__(self, config: SolverConfig = DEFAULT_CONFIG):
        self.config = config
        self._store: dict = {}

    def get(self, zeta, t_max: float) -> SigmaTrajectory:
        z = _as_zeta(zeta)
        key = (round(z.real, 15), round(z.imag, 15))
        traj = self._store.get(key)
        if traj is None:
            traj = solve_sigma0(z, t_max, self.config)
            self._store[key] = traj
        elif traj.t_max < t_max:
            traj.extend(t_max)
        return traj

    def clear(self):
        self._store.clear()


_GLOBAL_CACHE = TrajectoryCache()


def log_generating_function(zeta, lam: float,
                            config: SolverConfig = DEFAULT_CONFIG,
                            cache: TrajectoryCache | None = None) -> complex:
    """integral_0^lambda sigma0(t; zeta)/t dt at real lambda >= 0."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if lam == 0:
        return 0j
    z = _as_zeta(zeta)
    if z == 0:
        return 0j
    if cache is None:
        cache = _GLOBAL_CACHE if config is DEFAULT_CONFIG else TrajectoryCache(config)
    traj = cache.get(z, max(lam, 1.0))
    return traj.log_integral_real_axis(lam)


def dump_trajectory_csv(traj: SigmaTrajectory, path):
    """Debug dump: t, Re sigma, Im sigma, Re log-integral, Im log-integral."""
    rows = np.column_stack([
        traj.t_grid, traj.sigma.real, traj.sigma.imag,
        traj.log_integral.real, traj.log_integral.imag])
    np.savetxt(path, rows, delimiter=",",
               header="t,re_sigma,im_sigma,re_logint,im_logint", comments="")
