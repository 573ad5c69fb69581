"""Dispersion relation, branch-cut-aware symmetries and the region D+.

All functions accept scalars or numpy arrays for the spectral variable ``k``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import OnBranchCut, ParameterError

EPS_CUT = 1e-10


@dataclass(frozen=True)
class PdeParams:
    """Coefficients of ``i u_t + i beta u_xxx + alpha u_xx + i delta u_x = kappa |u|^p u``."""

    alpha: float
    beta: float
    delta: float
    kappa: complex = 0.0
    p: float = 2.0

    def __post_init__(self):
        values = (self.alpha, self.beta, self.delta, self.p, complex(self.kappa).real, complex(self.kappa).imag)
        if not all(math.isfinite(v) for v in values):
            raise ParameterError("all PDE coefficients must be finite")
        if self.beta <= 0:
            raise ParameterError(
                "beta must be positive: only the single boundary condition regime (beta > 0) is supported"
            )
        if self.p <= 0:
            raise ParameterError("nonlinearity power p must be positive")

    @property
    def discriminant(self) -> float:
        return self.alpha**2 + 3.0 * self.beta * self.delta

    @property
    def shift(self) -> float:
        """Inflection point alpha/(3 beta) of omega on the real line."""
        return self.alpha / (3.0 * self.beta)

    def with_kappa(self, kappa: complex) -> PdeParams:
        return PdeParams(self.alpha, self.beta, self.delta, kappa, self.p)


class DiscCase(enum.Enum):
    POSITIVE = "PositiveDisc"
    ZERO = "ZeroDisc"
    NEGATIVE = "NegativeDisc"


@dataclass(frozen=True)
class SpectralClassification:
    discriminant: float
    case: DiscCase
    branch_points: tuple[complex, complex] | None
    shift: float
    beta: float

    @property
    def cut(self) -> str:
        if self.case is DiscCase.POSITIVE:
            b_minus, b_plus = self.branch_points
            return f"(-inf, {b_minus.real:.12g}] U [{b_plus.real:.12g}, inf)"
        if self.case is DiscCase.NEGATIVE:
            b_minus, b_plus = self.branch_points
            return f"segment [{b_minus:.12g}, {b_plus:.12g}]"
        return "none"

    def distance_to_cut(self, k):
        """Distance from ``k`` to the branch cut (``inf`` when there is none)."""
        k = np.asarray(k, dtype=complex)
        if self.case is DiscCase.ZERO:
            return np.full(k.shape, np.inf)
        b_minus, b_plus = self.branch_points
        if self.case is DiscCase.POSITIVE:
            # rays (-inf, b-] and [b+, inf) on the real axis
            left = np.where(k.real <= b_minus.real, 0.0, k.real - b_minus.real)
            right = np.where(k.real >= b_plus.real, 0.0, b_plus.real - k.real)
            along = np.minimum(left, right)
            return np.hypot(along, k.imag)
        # vertical segment Re k = shift, |Im k| <= Im b+
        top = b_plus.imag
        dy = np.maximum(np.abs(k.imag) - top, 0.0)
        return np.hypot(k.real - self.shift, dy)


def classify(params: PdeParams) -> SpectralClassification:
    """Sign of the discriminant, branch points and cut geometry."""
    disc = params.discriminant
    a = params.shift
    beta = params.beta
    if disc > 0:
        root = math.sqrt(disc)
        bp = (complex((params.alpha - 2 * root) / (3 * beta)), complex((params.alpha + 2 * root) / (3 * beta)))
        case = DiscCase.POSITIVE
    elif disc < 0:
        root = math.sqrt(-disc)
        bp = (complex(a, -2 * root / (3 * beta)), complex(a, 2 * root / (3 * beta)))
        case = DiscCase.NEGATIVE
    else:
        bp = None
        case = DiscCase.ZERO
    return SpectralClassification(disc, case, bp, a, beta)


def omega(k, params: PdeParams):
    """omega(k) = -i beta k^3 + i alpha k^2 + i delta k."""
    k = np.asarray(k, dtype=complex) if not np.isscalar(k) else complex(k)
    return 1j * k * (params.delta + k * (params.alpha - params.beta * k))


def omega_prime(k, params: PdeParams):
    k = np.asarray(k, dtype=complex) if not np.isscalar(k) else complex(k)
    return 1j * (params.delta + k * (2 * params.alpha - 3 * params.beta * k))


def _wrap(theta, lo):
    """Map angles into ``[lo, lo + 2 pi)``."""
    return lo + np.mod(theta - lo, 2 * np.pi)


def sqrt_branch(k, cls: SpectralClassification, eps_cut: float = EPS_CUT, on_cut: str = "raise"):
    """Single-valued root of ``(k - a)^2 - 4 disc / (9 beta^2)``.

    Positive discriminant: cuts along the real rays outside ``[b-, b+]``.
    Negative discriminant: cut along the vertical segment joining ``b-`` and ``b+``.
    Within ``eps_cut`` of the cut this raises :class:`OnBranchCut`, unless
    ``on_cut="convention"``, in which case the half-open angle ranges decide the side.
    """
    if cls.case is DiscCase.ZERO:
        raise ParameterError("zero discriminant has no branch structure; use the entire symmetries")
    if on_cut not in ("raise", "convention"):
        raise ValueError("on_cut must be 'raise' or 'convention'")
    scalar = np.isscalar(k)
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    dist = cls.distance_to_cut(k)
    if on_cut == "raise" and np.any(dist <= eps_cut):
        bad = k[dist <= eps_cut][0]
        raise OnBranchCut(f"k = {bad} lies within {eps_cut:g} of the branch cut {cls.cut}")
    b_minus, b_plus = cls.branch_points
    zp = k - b_plus
    zm = k - b_minus
    modulus = np.sqrt(np.abs(zp) * np.abs(zm))
    if cls.case is DiscCase.POSITIVE:
        theta_p = _wrap(np.angle(zp), 0.0)
        theta_m = _wrap(np.angle(zm), -np.pi)
        # np.angle returns pi on the negative real axis, which is already in (-pi, pi]
        theta_m = np.where(theta_m == -np.pi, np.pi, theta_m)
        phase = 0.5 * (theta_p + theta_m)
    else:
        theta_p = _wrap(np.angle(zp) + 0.5 * np.pi, 0.0)
        theta_m = _wrap(np.angle(zm) + 0.5 * np.pi, 0.0)
        phase = 0.5 * (theta_p + theta_m - np.pi)
    out = modulus * np.exp(1j * phase)
    return complex(out[0]) if scalar else out


def nu_pm(k, cls: SpectralClassification, params: PdeParams, sign: int, eps_cut: float = EPS_CUT):
    """Nontrivial roots nu of omega(nu) = omega(k); ``sign`` selects nu+ (+1) or nu- (-1)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    k = np.asarray(k, dtype=complex) if not np.isscalar(k) else complex(k)
    a = params.shift
    if cls.case is DiscCase.ZERO:
        root = k - a
    else:
        root = sqrt_branch(k, cls, eps_cut)
    return -0.5 * (k - params.alpha / params.beta) + sign * (0.5j * math.sqrt(3.0)) * root


def nu_both(k, cls: SpectralClassification, params: PdeParams, eps_cut: float = EPS_CUT):
    """``(nu+, nu-)`` sharing a single square-root evaluation."""
    k = np.asarray(k, dtype=complex) if not np.isscalar(k) else complex(k)
    root = k - params.shift if cls.case is DiscCase.ZERO else sqrt_branch(k, cls, eps_cut)
    mid = -0.5 * (k - params.alpha / params.beta)
    half = (0.5j * math.sqrt(3.0)) * root
    return mid + half, mid - half


def d_plus_indicator(k, params: PdeParams):
    """Left side of the defining inequality of D+ (negative inside)."""
    k = np.asarray(k, dtype=complex) if not np.isscalar(k) else complex(k)
    beta = params.beta
    return 3.0 * (k.real - params.shift) ** 2 - k.imag**2 - params.discriminant / (3.0 * beta**2)


def in_D_plus(k, params: PdeParams):
    """Membership in D+ = {Im k > 0, Re omega(k) < 0}."""
    k = np.asarray(k, dtype=complex) if not np.isscalar(k) else complex(k)
    inside = (np.imag(k) > 0) & (d_plus_indicator(k, params) < 0)
    return bool(inside) if np.ndim(inside) == 0 else inside
