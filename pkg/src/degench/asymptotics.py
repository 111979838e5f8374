"""Closed-form sharp-interface asymptotics for the degenerate Cahn-Hilliard
problem: matched layer profiles for the radially symmetric stationary state,
quantitative matching diagnostics, and relaxation-rate formulas for azimuthal
perturbations of a circular interface.

All rational coefficients are carried as exact fractions so that identities
such as the vanishing of secularly growing terms hold exactly in floating
point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from types import SimpleNamespace

import mpmath as mp
import numpy as np

from .mobility import MobilityKind

__all__ = [
    "AsymptoticBundle",
    "make_bundle",
    "interface_profile_leading",
    "interface_correction1",
    "interface_correction2",
    "interface_correction2_hp",
    "free_boundary_correction1",
    "free_boundary_correction2",
    "degeneracy_layer_profiles",
    "dilog",
    "matching_mismatch",
    "matched_exponential_coefficient",
    "decay_rate_surface_diffusion",
    "decay_rate_one_sided_bulk",
    "decay_rate_two_sided_bulk",
    "sharp_interface_coefficients",
]

# One-sided slope of the quadratic mobility at u = -1 (limit from |u| < 1).
MOBILITY_SLOPE_AT_MINUS_ONE = 2.0

# Ratios fixed by the exponential matching: first- and second-order chemical
# potential per unit curvature (power), and the free-boundary offset slope.
_ETA1_OVER_KAPPA = Fraction(2, 3)
_ETA2_OVER_KAPPA2 = Fraction(1, 36)
_SIGMA1_OVER_KAPPA = Fraction(3, 16)
_U1_OUTER_OVER_KAPPA = Fraction(1, 6)
_U2_OUTER_OVER_KAPPA2 = Fraction(7, 144)

# Beyond this |rho| the direct floating-point form of the second interface
# correction loses too many digits to the cancellation between hyperbolically
# growing and decaying groups; the evaluator switches to high precision.
# Crossover continuity is pinned below 1e-9 by tests.
_RHO_DIRECT_LIMIT = 6.0


# ---------------------------------------------------------------------------
# chemical potential / free-boundary offset bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticBundle:
    """Matched-expansion constants for a circular interface of curvature kappa
    at interface width epsilon."""

    epsilon: float
    kappa: float
    eta1: float        # first-order chemical potential coefficient
    eta2: float        # second-order coefficient
    sigma0: float      # leading free-boundary offset (in layer units)
    sigma1: float      # first offset correction
    u1_outer: float    # first-order outer plateau shift above -1
    u2_outer: float    # second-order outer shift

    @property
    def eta(self) -> float:
        """Composite chemical potential eps*eta1 + eps^2*eta2."""
        return self.epsilon * self.eta1 + self.epsilon**2 * self.eta2

    @property
    def sigma(self) -> float:
        """Composite free-boundary offset sigma0 + eps*sigma1."""
        return self.sigma0 + self.epsilon * self.sigma1

    @property
    def r_star(self) -> float:
        """Predicted free-boundary radius 1/kappa - eps*sigma."""
        return 1.0 / self.kappa - self.epsilon * self.sigma

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "kappa": self.kappa,
            "eta1": self.eta1,
            "eta2": self.eta2,
            "sigma0": self.sigma0,
            "sigma1": self.sigma1,
            "u1_outer": self.u1_outer,
            "u2_outer": self.u2_outer,
            "eta": self.eta,
            "sigma": self.sigma,
            "r_star": self.r_star,
        }


def make_bundle(epsilon: float, kappa: float) -> AsymptoticBundle:
    if kappa <= 0:
        raise ValueError(f"curvature must be positive, got kappa={kappa}")
    if epsilon <= 0:
        raise ValueError(f"interface width must be positive, got epsilon={epsilon}")
    if epsilon * kappa >= 24.0:
        raise ValueError("epsilon*kappa too large; the offset logarithm is undefined")
    return AsymptoticBundle(
        epsilon=float(epsilon),
        kappa=float(kappa),
        eta1=2.0 * kappa / 3.0,
        eta2=kappa**2 / 36.0,
        sigma0=0.5 * math.log(24.0 / (epsilon * kappa)),
        sigma1=3.0 * kappa / 16.0,
        u1_outer=kappa / 6.0,
        u2_outer=7.0 * kappa**2 / 144.0,
    )


# ---------------------------------------------------------------------------
# dilogarithm (non-positive arguments only)
# ---------------------------------------------------------------------------

def _dilog_series(z: np.ndarray) -> np.ndarray:
    # sum z^k / k^2 for |z| <= 1/2; 60 terms leave < 1e-18 relative.
    acc = np.zeros_like(z)
    zk = np.array(z, copy=True)
    for k in range(1, 61):
        acc += zk / (k * k)
        zk *= z
    return acc


def dilog(x):
    """Real dilogarithm Li2(x) for x <= 0, relative error below 1e-12.

    Small arguments use the defining series; [-1, -1/2] is pushed into the
    series range by the Landen transform, and x < -1 by the inversion
    identity Li2(x) + Li2(1/x) = -pi^2/6 - ln^2(-x)/2.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa > 0.0):
        raise ValueError("dilog is implemented for non-positive arguments only")
    out = np.empty_like(xa)

    near = xa >= -0.5
    out[near] = _dilog_series(xa[near])

    mid = (xa < -0.5) & (xa >= -1.0)
    if np.any(mid):
        z = xa[mid]
        w = z / (z - 1.0)  # in [1/3, 1/2]
        out[mid] = -_dilog_series(w) - 0.5 * np.log1p(-z) ** 2

    far = xa < -1.0
    if np.any(far):
        z = xa[far]
        inv = 1.0 / z  # in (-1, 0)
        inner = np.where(inv >= -0.5, _dilog_series(inv),
                         -_dilog_series(inv / (inv - 1.0)) - 0.5 * np.log1p(-inv) ** 2)
        out[far] = -np.pi**2 / 6.0 - 0.5 * np.log(-z) ** 2 - inner
    return float(out[0]) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# layer profiles
# ---------------------------------------------------------------------------

def interface_profile_leading(rho):
    """Leading interface profile -tanh(rho)."""
    return -np.tanh(rho)


def interface_correction1(rho, kappa: float):
    """First interface correction at the matched chemical potential.

    Of the four structural terms of the bounded solution, the secularly
    growing ones carry the coefficients (3*eta1 - 2*kappa) and
    (2*kappa - 3*eta1), both exactly zero at eta1 = 2*kappa/3; what survives
    is kappa * (1 - sech^2) / 6, stable for all rho.
    """
    c_sech2 = Fraction(-1, 16) * (_ETA1_OVER_KAPPA + 2)   # -1/6
    c_const = Fraction(1, 8) * (2 - _ETA1_OVER_KAPPA)     # +1/6
    sech2 = 1.0 / np.cosh(np.asarray(rho, dtype=float)) ** 2
    out = kappa * (float(c_sech2) * sech2 + float(c_const))
    return float(out) if np.ndim(rho) == 0 else out


def matched_exponential_coefficient(kappa: float) -> float:
    """Coefficient (2*kappa - 3*eta1)/24 of the growing exponential left over
    in the interface-side expansion; exactly zero at the matched eta1."""
    return float(Fraction(1, 24) * (2 - 3 * _ETA1_OVER_KAPPA)) * kappa


def _u2_expression(rho, kappa, ns):
    """Second interface correction, one expression for both backends.

    `ns` supplies cosh/sinh/tanh/exp, logcosh, dilog, pi, log2 and an exact
    rational constructor frac(p, q), so the identical formula evaluates in
    float (vectorized) or arbitrary precision.

    The tail groups (cosh/sinh times rho-linear factors) cancel their
    exponential growth pairwise; direct float evaluation is therefore limited
    to moderate |rho| (see _RHO_DIRECT_LIMIT).  The last two groups are a
    layer-localized particular solution, obtained by variation of parameters
    from the normalized homogeneous pair {sech^2, sech^2 * K}; it decays at
    both ends, so the far-field constants are untouched by it.
    """
    k2 = kappa * kappa
    e2 = ns.frac(1, 36)          # eta2 / kappa^2
    sech2 = 1 / ns.cosh(rho) ** 2
    th = ns.tanh(rho)
    lc = ns.logcosh(rho)
    l2c = lc + ns.log2           # log(2 cosh rho)

    # growing homogeneous solution divided by sech^2
    kern = (ns.frac(3, 8) * rho + ns.frac(1, 4) * ns.sinh(2 * rho)
            + ns.frac(1, 32) * ns.sinh(4 * rho))

    t = -e2 * k2 / 8
    t = t - rho * k2 / 4
    t = t - (ns.cosh(2 * rho) / 8) * (e2 * k2 + ns.frac(2, 3) * rho * k2)
    t = t + (sech2 / 16) * (5 * e2 * k2 + ns.frac(23, 6) * rho * k2 - 2 * rho**2 * k2)
    t = t + (rho * k2 / 4) * (rho - ns.log2) * sech2
    t = t + (k2 / 8) * sech2 * ns.dilog(-ns.exp(2 * rho))
    t = t - (k2 / 288) * ns.sinh(2 * rho) * (1 - 24 * lc)
    t = t - (k2 / 96) * th * (1 - 24 * lc - ns.frac(8, 3) * sech2)
    t = t + ns.frac(1, 16) * (ns.pi**2 / 6 - e2) * k2 * sech2
    t = t + (e2 * k2 * (1 + 24 * ns.log2) + e2 * k2) * sech2 * kern

    # layer-localized particular part: weight integrals of the log-bearing
    # forcing against the homogeneous pair (Wronskian is exactly 1)
    a_int = (-ns.frac(3, 32) * rho * sech2**2 + rho / 4
             - ns.frac(5, 32) * th + ns.frac(3, 32) * th**3)
    p2_int = (a_int / 2 - 2 * a_int * l2c + rho / 2 * l2c
              + ns.frac(3, 64) * rho * sech2**2 - rho**2 / 4 - rho / 8
              + ns.frac(5, 64) * th - ns.frac(3, 64) * th**3
              - ns.dilog(-ns.exp(-2 * rho)) / 4 - ns.pi**2 / 48)
    t = t + k2 * (sech2**3 * kern * l2c / 2 - sech2 * p2_int)
    return t


def _float_ns() -> SimpleNamespace:
    return SimpleNamespace(
        cosh=np.cosh, sinh=np.sinh, tanh=np.tanh, exp=np.exp,
        logcosh=lambda r: np.abs(r) + np.log1p(np.exp(-2.0 * np.abs(r))) - np.log(2.0),
        dilog=dilog,
        pi=np.pi,
        log2=np.log(2.0),
        frac=lambda p, q: p / q,
    )


def _mp_ns() -> SimpleNamespace:
    return SimpleNamespace(
        cosh=mp.cosh, sinh=mp.sinh, tanh=mp.tanh, exp=mp.exp,
        logcosh=lambda r: mp.log(mp.cosh(r)),
        dilog=lambda z: mp.polylog(2, z),
        pi=mp.pi,
        log2=mp.log(2),
        frac=lambda p, q: mp.mpf(p) / q,
    )


_NS_FLOAT = _float_ns()


def interface_correction2_hp(rho: float, kappa: float, dps: int = 50) -> float:
    """Second interface correction by arbitrary-precision evaluation.

    Working precision grows with |rho| because the expression cancels at the
    scale exp(2|rho|).
    """
    need = max(dps, int(2 * abs(rho)) + 30)
    with mp.workdps(need):
        val = _u2_expression(mp.mpf(rho), mp.mpf(kappa), _mp_ns())
        return float(val)


def interface_correction2(rho, kappa: float):
    """Second interface correction at the matched eta2 = kappa^2/36.

    Direct vectorized evaluation inside |rho| <= 6; high-precision fallback
    beyond, where the float form would lose the cancellation.
    """
    arr = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.empty_like(arr)
    direct = np.abs(arr) <= _RHO_DIRECT_LIMIT
    if np.any(direct):
        out[direct] = _u2_expression(arr[direct], kappa, _NS_FLOAT)
    for i in np.nonzero(~direct)[0]:
        out[i] = interface_correction2_hp(arr[i], kappa)
    return float(out[0]) if np.ndim(rho) == 0 else out


def free_boundary_correction1(z, kappa: float):
    """First correction in the layer where u touches 1:
    (eta1/4) * (1 - cosh 2z) with eta1 = 2*kappa/3."""
    return (kappa / 6.0) * (1.0 - np.cosh(2.0 * np.asarray(z, dtype=float)))


def free_boundary_correction2(z, kappa: float):
    """Second correction in the touching layer; grows like
    (kappa/12)^2 * exp(4z)/2 for large z."""
    za = np.asarray(z, dtype=float)
    c = (kappa / 12.0) ** 2   # also equals eta2/4
    out = c * (np.cosh(4.0 * za) + 3.0 * np.exp(-2.0 * za) * (1.0 + 4.0 * za) - 9.0)
    out = out + c * np.exp(2.0 * za) + (kappa / 6.0) ** 2 * np.exp(-2.0 * za)
    out = out + c * (1.0 - np.cosh(2.0 * za))
    return float(out) if np.ndim(z) == 0 else out


def degeneracy_layer_profiles(y, kappa: float, interface_flux: float):
    """Profiles of the layer where the mobility degeneracy is lifted.

    Returns the order-parameter correction 2*exp(-2y) + kappa/6 and the
    second-order chemical potential, whose logarithmic term carries the bulk
    flux through the layer.  The prefactor 3/(2*kappa*M'(-1)) makes the
    y -> -inf tail reproduce the exp(2*rho) flux term of the interface
    expansion exactly.
    """
    ya = np.asarray(y, dtype=float)
    u1 = 2.0 * np.exp(-2.0 * ya) + kappa / 6.0
    log_term = np.logaddexp(0.0, 2.0 * ya + np.log(kappa / 12.0))
    eta2 = (1.5 * interface_flux / (kappa * MOBILITY_SLOPE_AT_MINUS_ONE)) * log_term \
        + kappa**2 / 36.0
    if np.ndim(y) == 0:
        return float(u1), float(eta2)
    return u1, eta2


# ---------------------------------------------------------------------------
# exponential matching diagnostic
# ---------------------------------------------------------------------------

def matching_mismatch(epsilon: float, kappa: float,
                      z_window: tuple[float, float] = (1.0, 2.0),
                      num: int = 41) -> float:
    """Maximum absolute difference between the interface-layer composite and
    the touching-layer composite across the overlap window.

    The interface composite U0 + eps*U1 + eps^2*U2 is evaluated at
    rho = z - sigma(eps, kappa), the touching-layer composite
    1 + eps*Ub1 + eps^2*Ub2 at z.  With the matched values of eta1, eta2,
    sigma0 and sigma1, every shared exponential cancels and the residual
    decays like eps^3 (the next unmatched tail).
    """
    if not 0.0 < epsilon <= 0.1:
        raise ValueError(f"epsilon must lie in (0, 0.1], got {epsilon}")
    if kappa <= 0:
        raise ValueError(f"curvature must be positive, got kappa={kappa}")
    b = make_bundle(epsilon, kappa)
    z = np.linspace(z_window[0], z_window[1], num)
    rho = z - b.sigma
    inner = (interface_profile_leading(rho)
             + epsilon * interface_correction1(rho, kappa)
             + epsilon**2 * interface_correction2(rho, kappa))
    touching = (1.0
                + epsilon * free_boundary_correction1(z, kappa)
                + epsilon**2 * free_boundary_correction2(z, kappa))
    return float(np.max(np.abs(inner - touching)))


# ---------------------------------------------------------------------------
# sharp-interface relaxation rates
# ---------------------------------------------------------------------------

def _mode_factor(m: int) -> int:
    return m * m * (m * m - 1)


def decay_rate_surface_diffusion(m: int, r0: float, mobility_factor) -> float:
    """Decay rate of a cos(m*theta) perturbation under pure surface diffusion:
    -M * m^2 (m^2 - 1) / r0^4.

    `mobility_factor` may be a Fraction (e.g. from
    sharp_interface_coefficients) to keep rational results exact.
    """
    if m < 0:
        raise ValueError(f"mode number must be non-negative, got m={m}")
    if not 0.0 < r0 < 1.0:
        raise ValueError(f"interface radius must lie in (0, 1), got r0={r0}")
    if mobility_factor <= 0:
        raise ValueError("mobility factor must be positive")
    return -float(mobility_factor * _mode_factor(m)) / r0**4


def decay_rate_one_sided_bulk(m: int, r0: float) -> float:
    """Decay rate with surface diffusion plus nonlinear bulk flux from the
    outer phase only."""
    if m < 1:
        raise ValueError(f"mode number must be at least 1, got m={m}")
    if not 0.0 < r0 < 1.0:
        raise ValueError(f"interface radius must lie in (0, 1), got r0={r0}")
    surface = float(Fraction(2, 3) * _mode_factor(m)) / r0**4
    bulk = float(Fraction(1, 9) * m * (m * m - 1)) / r0**4 \
        * math.tanh(m * math.log(1.0 / r0))
    return -(surface + bulk)


def decay_rate_two_sided_bulk(m: int, r0: float) -> float:
    """Decay rate with bulk flux entering from both sides of the interface."""
    if m < 1:
        raise ValueError(f"mode number must be at least 1, got m={m}")
    if not 0.0 < r0 < 1.0:
        raise ValueError(f"interface radius must lie in (0, 1), got r0={r0}")
    surface = float(Fraction(2, 3) * _mode_factor(m)) / r0**4
    bulk = float(Fraction(1, 9) * m * (m * m - 1)) / r0**4 \
        * (math.tanh(m * math.log(1.0 / r0)) + 1.0)
    return -(surface + bulk)


def sharp_interface_coefficients(mobility: MobilityKind):
    """Surface-diffusion coefficient and bulk-flux prefactors of the normal
    velocity law for each mobility.

    Returns (surface, bulk) with exact Fractions; `bulk` holds one prefactor
    per contributing side (empty for the biquadratic mobility, whose bulk
    flux is subdominant).
    """
    if mobility is MobilityKind.QUADRATIC_POSITIVE_PART:
        return Fraction(2, 3), (Fraction(1, 4),)
    if mobility is MobilityKind.ABSOLUTE_VALUE:
        return Fraction(2, 3), (Fraction(1, 4), Fraction(1, 4))
    if mobility is MobilityKind.BIQUADRATIC_POSITIVE_PART:
        return Fraction(4, 9), ()
    raise ValueError(f"unknown mobility {mobility!r}")
