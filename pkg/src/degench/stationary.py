"""Stationary radially symmetric free-boundary states.

The profile solves eps^2 (u'' + u'/r) + eta - 2u(u^2 - 1) = 0 on [r_star, 1]
with u'(1) = 0 and the contact conditions u(r_star) = 1, u'(r_star) = 0; the
constant chemical potential eta is fixed by pinning the interface u(r0) = 0.

Two routes are provided.  The production route replaces the trajectory
computation inside the classic shooting loop with a Newton collocation solve
of the free-boundary problem at fixed eta: integrating the ODE across the
outer plateau amplifies the unstable mode by exp(2(1 - r0)/eps), so a
double-precision initial-value march cannot place the interface once
eps drops below roughly 0.07 (the required boundary-value correction falls
under the resolution of u(1)).  The boundary-value formulation has no such
dichotomy and converges for the whole benchmark range.  The initial-value
route (shoot / solve_stationary_ivp) is kept both as the module's
cross-validation oracle at moderate eps and for trajectory diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.integrate
import scipy.linalg as sla

from .asymptotics import make_bundle
from .errors import NoSolutionError, NumericalError
from .grid import barycentric_interpolate, lobatto_points, reference_diff_matrix

__all__ = [
    "ShootResult",
    "StationarySolution",
    "shoot",
    "solve_stationary",
    "solve_stationary_ivp",
    "stationary_sweep",
]


@dataclass(frozen=True)
class StationarySolution:
    """Free-boundary profile together with its defining constants."""

    epsilon: float
    eta: float
    r_star: float
    r0: float
    profile_r: np.ndarray
    profile_u: np.ndarray
    method: str
    defects: dict

    @property
    def sigma(self) -> float:
        """Free-boundary offset (r0 - r_star) / epsilon."""
        return (self.r0 - self.r_star) / self.epsilon

    def summary(self) -> dict:
        b = make_bundle(self.epsilon, 1.0 / self.r0)
        return {
            "epsilon": self.epsilon,
            "eta": self.eta,
            "r_star": self.r_star,
            "r0": self.r0,
            "sigma": self.sigma,
            "eta_asym": b.eta,
            "sigma_asym": b.sigma,
        }


# ---------------------------------------------------------------------------
# initial-value route
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShootResult:
    """Backward trajectory from r = 1 and its free-boundary defect.

    defect < 0: the trajectory crossed u = 1 with residual slope (overshoot);
    defect > 0: it never reached 1 (1 - max u, undershoot); defect = 0 at
    tangency.
    """

    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    touched: bool
    r_stop: float
    defect: float
    sol: object = field(repr=False, default=None)


def shoot(eta: float, u_at_1: float, epsilon: float, r_min: float = 1e-10,
          rtol: float = 1e-10, atol: float = 1e-12) -> ShootResult:
    """Integrate the profile ODE inward from r = 1 with a stiff solver.

    Stops at the first crossing of u = 1 or at r_min.
    """
    if epsilon <= 0:
        raise ValueError(f"interface width must be positive, got {epsilon}")

    inv_eps2 = 1.0 / epsilon**2

    def rhs(r, y):
        u, v = y
        return (v, (2.0 * u * (u * u - 1.0) - eta) * inv_eps2 - v / r)

    def touch(r, y):
        return y[0] - 1.0

    touch.terminal = True

    def runaway(r, y):
        # stops trajectories that dive toward -inf before reaching r_min
        return y[0] + 3.0

    runaway.terminal = True
    sol = scipy.integrate.solve_ivp(
        rhs, (1.0, r_min), [u_at_1, 0.0], method="Radau",
        events=[touch, runaway], rtol=rtol, atol=atol, dense_output=True)
    if sol.status == -1:
        raise NumericalError(f"stiff integration failed: {sol.message}")
    touched = sol.t_events[0].size > 0
    if touched:
        r_stop = float(sol.t_events[0][0])
        defect = float(sol.y_events[0][0][1])
    else:
        r_stop = float(sol.t[-1])
        defect = float(1.0 - np.max(sol.y[0]))
    return ShootResult(r=sol.t, u=sol.y[0], du=sol.y[1], touched=touched,
                       r_stop=r_stop, defect=defect, sol=sol)


def _touching_boundary_value(eta: float, epsilon: float, guess: float,
                             param_tol: float = 1e-12, max_iter: int = 90):
    """Root solve on u(1) driving the free-boundary defect to zero at fixed
    eta: secant probes until the tangency is bracketed (undershoot defect > 0
    against overshoot defect < 0), then bisection.

    The defect is kinked at the tangency (square-root overshoot slope against
    a slowly varying undershoot gap), so bisection does the final work; the
    returned trajectory is the touching-side bracket endpoint.
    """
    p0 = guess
    s0 = shoot(eta, p0, epsilon)
    scale = max(abs(1.0 + p0), 1e-8)
    p1 = p0 + (1e-6 if s0.defect > 0 else -1e-6) * scale
    s1 = shoot(eta, p1, epsilon)
    lo = hi = None  # lo: undershoot (defect > 0), hi: overshoot (defect < 0)
    for p, s in ((p0, s0), (p1, s1)):
        if s.defect > 0:
            lo = (p, s)
        elif s.defect < 0:
            hi = (p, s)
        else:
            return p, s
    for _ in range(max_iter):
        if lo is not None and hi is not None:
            if abs(hi[0] - lo[0]) < param_tol * max(1.0, abs(hi[0])):
                break
            p2 = 0.5 * (lo[0] + hi[0])
        else:
            denom = s1.defect - s0.defect
            if denom == 0.0:
                # expand in the descent direction until the sign flips
                p2 = p1 + 4.0 * (p1 - p0)
            else:
                p2 = p1 - s1.defect * (p1 - p0) / denom
                # cap the extrapolation to keep probes sane
                limit = 256.0 * max(abs(p1 - p0), 1e-9 * scale)
                p2 = np.clip(p2, p1 - limit, p1 + limit)
        s2 = None
        for _ in range(6):
            try:
                s2 = shoot(eta, p2, epsilon)
                break
            except NumericalError:
                # grazing contact can collapse the step size; back off
                p2 = 0.5 * (p2 + p1)
        if s2 is None:
            raise NoSolutionError(
                f"inner loop: repeated integrator failures near u(1)={p2} at eta={eta}")
        if s2.defect > 0:
            lo = (p2, s2)
        elif s2.defect < 0:
            hi = (p2, s2)
        else:
            return p2, s2
        p0, s0, p1, s1 = p1, s1, p2, s2
    if hi is not None:
        return hi  # touching-side representative of the tangency
    raise NoSolutionError(
        f"inner loop found no touching trajectory at eta={eta}")


def solve_stationary_ivp(r0_target: float, epsilon: float,
                         u_tol: float = 3e-6, max_bisect: int = 200) -> StationarySolution:
    """Classic two-level solve: inner secant on u(1) for tangency, outer
    bisection on eta until the interface sits at r0_target.

    Practical for eps >= ~0.07 in double precision; see the module docstring.
    The default tolerance reflects the shooting granularity: one ulp of u(1)
    moves the layer by exp(2(1 - r_star)/eps) times more, which limits how
    precisely the tangency (and hence u at the pinned radius) can be placed.
    """
    sol, eta, trace = _outer_bisection(r0_target, epsilon, u_tol, max_bisect,
                                       _eval_interface_ivp)
    touch = trace["last_inner"]
    dense = touch.sol.sol
    r_dense = np.linspace(touch.r_stop, 1.0, 2000)
    u_dense = dense(r_dense)[0]
    r_all = np.concatenate([r_dense, touch.r[::-1]])
    u_all = np.concatenate([u_dense, touch.u[::-1]])
    order = np.argsort(r_all)
    return StationarySolution(
        epsilon=epsilon, eta=eta, r_star=touch.r_stop, r0=trace["r0"],
        profile_r=r_all[order], profile_u=u_all[order], method="shooting",
        defects={"u_at_r0": trace["u_at_r0"], "du_at_r_star": touch.defect,
                 "du_at_1": 0.0})


def _eval_interface_ivp(eta, epsilon, r0_target, warm):
    guess = warm if warm is not None else _u1_guess(eta, epsilon)
    p, touch = _touching_boundary_value(eta, epsilon, guess)
    if not touch.touched:
        raise NoSolutionError(
            f"inner loop failed: no tangency found at eta={eta}")
    u_at_r0 = float(touch.sol.sol(r0_target)[0])
    return u_at_r0, p, {"last_inner": touch}


def _u1_guess(eta: float, epsilon: float) -> float:
    kappa = _kappa_from_eta(eta, epsilon)
    return -1.0 + epsilon * kappa / 6.0 + epsilon**2 * 7.0 * kappa**2 / 144.0 \
        + 2.0 * np.exp(-2.0 * (1.0 - 1.0 / kappa) / epsilon)


def _kappa_from_eta(eta: float, epsilon: float) -> float:
    # invert eta = (2/3) eps k + eps^2 k^2 / 36 for the curvature
    a = epsilon**2 / 36.0
    b = 2.0 * epsilon / 3.0
    return 2.0 * eta / (b + np.sqrt(b * b + 4.0 * a * eta))


# ---------------------------------------------------------------------------
# collocation route
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _colloc_ops(n: int):
    x = lobatto_points(n)          # decreasing, +1 .. -1
    s = 0.5 * (x + 1.0)            # decreasing, 1 .. 0
    dref = reference_diff_matrix(n)
    ds = 2.0 * dref                # d/ds
    return x, s, ds, ds @ ds


class _FreeBoundaryNewton:
    """Newton solve of the fixed-eta free-boundary problem on [r_star, 1],
    with the contact radius as an extra unknown."""

    def __init__(self, epsilon: float, n: int = 240, r_floor: float = 1e-6):
        self.epsilon = epsilon
        self.n = n
        self.r_floor = r_floor
        self.x, self.s, self.ds, self.ds2 = _colloc_ops(n)

    def residual(self, u, r_star, eta):
        eps2 = self.epsilon**2
        span = 1.0 - r_star
        r = r_star + self.s * span
        du = (self.ds @ u) / span
        d2u = (self.ds2 @ u) / span**2
        f = eps2 * (d2u + du / r) + eta - 2.0 * u * (u * u - 1.0)
        out = np.empty(self.n + 1)
        out[1:self.n - 1] = f[1:self.n - 1]
        out[0] = du[0]            # u'(1) = 0
        out[self.n - 1] = u[-1] - 1.0    # u(r_star) = 1
        out[self.n] = du[-1]      # u'(r_star) = 0
        return out

    def _jacobian(self, u, r_star, eta):
        n = self.n
        eps2 = self.epsilon**2
        span = 1.0 - r_star
        r = r_star + self.s * span
        jac = np.zeros((n + 1, n + 1))
        core = eps2 * (self.ds2 / span**2 + self.ds / (span * r[:, None])) \
            + np.diag(-6.0 * u * u + 2.0)
        jac[1:n - 1, :n] = core[1:n - 1, :]
        jac[0, :n] = self.ds[0, :] / span
        jac[n - 1, n - 1] = 1.0
        jac[n, :n] = self.ds[-1, :] / span
        # contact-radius column by central difference
        h = 1e-7 * max(span, 1e-3)
        fp = self.residual(u, r_star + h, eta)
        fm = self.residual(u, r_star - h, eta)
        jac[:, n] = (fp - fm) / (2.0 * h)
        return jac

    def initial_guess(self, eta):
        kappa = _kappa_from_eta(eta, self.epsilon)
        b = make_bundle(self.epsilon, kappa)
        r0 = 1.0 / kappa
        r_star = max(self.r_floor, min(0.95, r0 - self.epsilon * b.sigma))
        span = 1.0 - r_star
        r = r_star + self.s * span
        u = -np.tanh((r - r0) / self.epsilon) \
            + b.u1_outer * self.epsilon * np.tanh((r - r0) / self.epsilon) ** 2
        u[-1] = 1.0
        return u, r_star

    def solve(self, eta, warm=None, tol=1e-12, max_iter=60):
        """Damped Newton.  Near the roundoff floor of the residual the norm
        stops being a reliable descent measure, so full steps that keep the
        norm within a factor of the floor are still applied (they keep
        polishing the true error); iteration ends once no progress is made.
        """
        if warm is not None:
            u, r_star = warm
            u = u.copy()
        else:
            u, r_star = self.initial_guess(eta)
        f = self.residual(u, r_star, eta)
        norm = np.max(np.abs(f))
        best = (u, r_star, norm)
        stale = 0
        for _ in range(max_iter):
            if norm < tol or stale >= 2:
                break
            jac = self._jacobian(u, r_star, eta)
            try:
                delta = sla.solve(jac, -f)
            except sla.LinAlgError as exc:
                raise NoSolutionError(f"inner Newton: singular Jacobian ({exc})")
            u_scale = max(1.0, float(np.max(np.abs(u))))
            step = np.max(np.abs(delta[:self.n]))
            if step < 1e-14 * u_scale:
                break
            lam, accepted = 1.0, False
            for _ in range(12):
                u_try = u + lam * delta[:self.n]
                rs_try = r_star + lam * delta[self.n]
                if self.r_floor < rs_try < 0.98:
                    f_try = self.residual(u_try, rs_try, eta)
                    norm_try = np.max(np.abs(f_try))
                    floor_wiggle = lam == 1.0 and step < 1e-7 * u_scale \
                        and norm_try < 3.0 * norm
                    if norm_try < norm or norm_try < tol or floor_wiggle:
                        accepted = norm_try < norm
                        u, r_star, f, norm = u_try, rs_try, f_try, norm_try
                        break
                lam *= 0.5
            else:
                stale += 1
                continue
            if accepted and norm < best[2]:
                best = (u.copy(), r_star, norm)
                stale = 0
            else:
                stale += 1
        u_best, rs_best, norm_best = best
        if norm < norm_best:
            u_best, rs_best, norm_best = u, r_star, norm
        if norm_best > 1e-5:
            raise NoSolutionError(
                f"inner Newton did not converge at eta={eta}: residual {norm_best:.3e}")
        # reject roots that are not free-boundary profiles (wrong cubic branch)
        if not (-1.2 < u_best[0] < 0.0) or np.max(u_best) > 1.001 \
                or np.min(u_best) < -1.2:
            raise NoSolutionError(
                f"inner Newton converged to a non-physical branch at eta={eta} "
                f"(u(1)={u_best[0]:.3f}, range [{np.min(u_best):.3f}, {np.max(u_best):.3f}])")
        return u_best, rs_best

    def interp(self, u, r_star, r_query):
        span = 1.0 - r_star
        x_query = 2.0 * (np.asarray(r_query) - r_star) / span - 1.0
        return barycentric_interpolate(self.x, u, x_query)


def _outer_bisection(r0_target, epsilon, u_tol, max_bisect, eval_interface):
    """Bisection on eta driving u(r0_target) to zero.

    `eval_interface(eta, epsilon, r0_target, warm)` returns
    (u_at_r0, state, extras); every evaluation is cold-started so the map is
    a deterministic function of eta.  Monotonicity over the bracket is
    asserted along the way (with slack for the evaluation noise floor); a
    genuine violation aborts with diagnostics.
    """
    if not 0.0 < r0_target < 1.0:
        raise ValueError(f"interface radius must lie in (0, 1), got {r0_target}")
    if epsilon <= 0:
        raise ValueError(f"interface width must be positive, got {epsilon}")
    if epsilon * np.log(1.0 / epsilon) > r0_target / 2.0:
        raise ValueError("epsilon too large: the interface layers do not fit "
                         f"inside r0={r0_target}")

    eta_ref = make_bundle(epsilon, 1.0 / r0_target).eta
    lo_fac, hi_fac = 0.5, 2.0

    def evaluate(eta):
        return eval_interface(eta, epsilon, r0_target, None)

    # bracket, shrinking toward the predicted eta if an endpoint fails
    for _ in range(8):
        try:
            f_lo, _, _ = evaluate(lo_fac * eta_ref)
            break
        except (NoSolutionError, NumericalError):
            lo_fac = 0.5 * (lo_fac + 1.0)
    else:
        raise NoSolutionError("outer loop: could not evaluate the lower eta bracket")
    for _ in range(8):
        try:
            f_hi, _, _ = evaluate(hi_fac * eta_ref)
            break
        except (NoSolutionError, NumericalError):
            hi_fac = 0.5 * (hi_fac + 1.0)
    else:
        raise NoSolutionError("outer loop: could not evaluate the upper eta bracket")

    eta_lo, eta_hi = lo_fac * eta_ref, hi_fac * eta_ref
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoSolutionError(
            f"outer loop: no sign change over eta in [{eta_lo}, {eta_hi}] "
            f"(u(r0) = {f_lo:.3e}, {f_hi:.3e})")

    slack = max(10.0 * u_tol, 1e-7)  # soft-mode evaluation noise
    best = None
    for _ in range(max_bisect):
        eta_mid = 0.5 * (eta_lo + eta_hi)
        f_mid, state, extras = evaluate(eta_mid)
        # once the bracket sits inside the transition zone (interface sweeping
        # through r0, |u| well below saturation) the map must be monotone
        in_transition = max(abs(f_lo), abs(f_hi)) < 0.5
        if in_transition and not (min(f_lo, f_hi) - slack <= f_mid
                                  <= max(f_lo, f_hi) + slack):
            raise NoSolutionError(
                "outer loop: eta -> u(r0) is not monotone over the bracket: "
                f"u({eta_lo})={f_lo:.3e}, u({eta_mid})={f_mid:.3e}, "
                f"u({eta_hi})={f_hi:.3e}")
        if best is None or abs(f_mid) < abs(best[1]):
            best = (eta_mid, f_mid, state, dict(extras))
        if abs(f_mid) < u_tol:
            extras.update({"r0": r0_target, "u_at_r0": f_mid})
            return state, eta_mid, extras
        if np.sign(f_mid) == np.sign(f_lo):
            eta_lo, f_lo = eta_mid, f_mid
        else:
            eta_hi, f_hi = eta_mid, f_mid
        if abs(eta_hi - eta_lo) < 4e-16 * abs(eta_ref):
            break
    # the eta bracket is exhausted at machine resolution; accept the best
    # evaluation if it sits at the noise floor rather than far off
    eta_best, f_best, state, extras = best
    if abs(f_best) <= slack:
        extras.update({"r0": r0_target, "u_at_r0": f_best})
        return state, eta_best, extras
    raise NoSolutionError(
        f"outer loop: bisection exhausted with |u(r0)| = {abs(f_best):.3e} > {u_tol}")


def solve_stationary(r0_target: float, epsilon: float, n: int = 240,
                     u_tol: float = 1e-8) -> StationarySolution:
    """Free-boundary state with the interface pinned at r0_target.

    Inner Newton collocation at fixed eta, outer bisection on eta with
    |u(r0_target)| < u_tol as the stopping test.  The default tolerance
    reflects the double-precision floor: the Jacobian's soft interface-
    translation mode amplifies the residual roundoff, so the u-value at the
    pinned radius cannot be resolved below ~1e-8 (the radius itself is then
    accurate to about epsilon times that).
    """
    newton = _FreeBoundaryNewton(epsilon, n=n)

    def eval_interface(eta, eps, r0, warm):
        u, r_star = newton.solve(eta, warm=warm)
        if r_star >= r0:
            raise NoSolutionError(
                f"contact radius {r_star:.4f} beyond the target interface {r0}")
        val = float(newton.interp(u, r_star, r0))
        if abs(val) > 1.05:
            raise NoSolutionError(
                f"non-physical interpolant value u(r0) = {val:.3f} at eta={eta}")
        return val, (u, r_star), {"u": u, "r_star": r_star}

    (u, r_star), eta, extras = _outer_bisection(
        r0_target, epsilon, u_tol, 200, eval_interface)

    span = 1.0 - r_star
    r_nodes = r_star + newton.s * span
    r_dense = np.linspace(r_star, 1.0, 2000)
    u_dense = newton.interp(u, r_star, r_dense)
    r_all = np.concatenate([r_dense, r_nodes])
    u_all = np.concatenate([u_dense, u])
    order = np.argsort(r_all)
    du = (newton.ds @ u) / span
    sol = StationarySolution(
        epsilon=epsilon, eta=eta, r_star=float(r_star), r0=r0_target,
        profile_r=r_all[order], profile_u=u_all[order], method="collocation",
        defects={"u_at_r0": extras["u_at_r0"], "du_at_r_star": float(du[-1]),
                 "du_at_1": float(du[0]),
                 "u_at_r_star": float(u[-1] - 1.0)})
    _check_invariants(sol)
    return sol


def _check_invariants(sol: StationarySolution):
    d = sol.defects
    if abs(d["du_at_r_star"]) > 1e-8 or abs(d.get("u_at_r_star", 0.0)) > 1e-8:
        raise NoSolutionError(
            f"contact conditions violated: u' = {d['du_at_r_star']:.2e}, "
            f"u - 1 = {d.get('u_at_r_star', 0.0):.2e}")
    if abs(d["du_at_1"]) > 1e-8:
        raise NoSolutionError(f"outer wall condition violated: u'(1) = {d['du_at_1']:.2e}")
    if not (0.0 < sol.r_star < sol.r0 < 1.0):
        raise NoSolutionError(
            f"radii out of order: r_star={sol.r_star}, r0={sol.r0}")


def stationary_sweep(epsilons, r0_target: float = 0.5, n: int = 240):
    """Rows (epsilon, sigma_num, sigma_asym, eta_num, eta_asym) for a list of
    interface widths."""
    rows = []
    for eps in epsilons:
        sol = solve_stationary(r0_target, eps, n=n)
        b = make_bundle(eps, 1.0 / r0_target)
        rows.append({
            "epsilon": eps,
            "sigma_num": sol.sigma,
            "sigma_asym": b.sigma,
            "eta_num": sol.eta,
            "eta_asym": b.eta,
        })
    return rows


def eta_defect_order(rows) -> float:
    """Empirical convergence order of |eta_num - eta_asym| from sweep rows."""
    eps = np.array([row["epsilon"] for row in rows])
    defect = np.array([abs(row["eta_num"] - row["eta_asym"]) for row in rows])
    if np.any(defect == 0.0):
        raise ValueError("zero defect; order undefined")
    slope, _ = np.polyfit(np.log(eps), np.log(defect), 1)
    return float(slope)
