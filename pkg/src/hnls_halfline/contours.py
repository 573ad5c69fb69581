"""Integration contours for the reduced half-line problem.

The contour is the positively oriented boundary of D+ (or of its deformation
for a non-positive discriminant), parametrised either by the imaginary part
(``gamma`` form: left branch, bottom segment at height lambda, right branch) or
by the real part (``Gamma`` form).  Nodes come from composite Gauss-Legendre
panels whose lengths follow the local oscillation rate of the integrand.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NegativeRadicand, OutOfInterval, ParameterError, TruncationInsufficient
from .spectral import DiscCase, PdeParams, SpectralClassification, classify, d_plus_indicator, omega, omega_prime


class SegmentKind(enum.Enum):
    GAMMA_LEFT = "GammaLeft"
    GAMMA_BOTTOM = "GammaBottom"
    GAMMA_RIGHT = "GammaRight"
    BIG_GAMMA_LEFT = "BigGammaLeft"
    BIG_GAMMA_BOTTOM = "BigGammaBottom"
    BIG_GAMMA_RIGHT = "BigGammaRight"


def select_lambda(cls: SpectralClassification, params: PdeParams, margin: float = 1.5, lambda0: float = 1.0) -> float:
    """Height of the bottom segment; zero when the discriminant is positive."""
    if margin <= 1:
        raise ParameterError("margin must exceed 1")
    if cls.case is DiscCase.POSITIVE:
        return 0.0
    if cls.case is DiscCase.NEGATIVE:
        return margin * 2.0 * math.sqrt(-cls.discriminant) / (3.0 * params.beta)
    return margin * lambda0


def c_pm(params: PdeParams, lam: float) -> tuple[float, float]:
    """Endpoints (c-, c+) of the bottom segment at height ``lam``."""
    radicand = 3.0 * params.beta**2 * lam**2 + params.discriminant
    if radicand < 0:
        raise NegativeRadicand(f"3 beta^2 lambda^2 + disc = {radicand:g} < 0; increase lambda")
    root = math.sqrt(radicand)
    return (params.alpha - root) / (3 * params.beta), (params.alpha + root) / (3 * params.beta)


def _branch_root(m, params: PdeParams):
    return np.sqrt(3.0 * params.beta**2 * np.asarray(m, dtype=float) ** 2 + params.discriminant)


def gamma_path(j: int, m, params: PdeParams, lam: float, check: bool = True):
    """Point and derivative ``(k(m), k'(m))`` on gamma_j (imaginary-part parametrisation)."""
    m = np.asarray(m, dtype=float)
    beta, alpha = params.beta, params.alpha
    if j == 2:
        if check:
            lo, hi = c_pm(params, lam)
            if np.any((m < lo - 1e-12) | (m > hi + 1e-12)):
                raise OutOfInterval(f"gamma_2 parameter must lie in [{lo}, {hi}]")
        return m + 1j * lam, np.ones_like(m) + 0j
    if j not in (1, 3):
        raise ValueError("j must be 1, 2 or 3")
    if check and np.any(m < lam - 1e-12):
        raise OutOfInterval(f"gamma_{j} parameter must be >= lambda = {lam}")
    sign = -1.0 if j == 1 else 1.0
    root = _branch_root(m, params)
    k = (alpha + sign * root) / (3 * beta) + 1j * m
    with np.errstate(divide="ignore", invalid="ignore"):
        dre = np.where(root > 0, sign * beta * m / root, 0.0)
    return k, dre + 1j


def _s_of(m, params: PdeParams):
    beta = params.beta
    val = 3.0 * (np.asarray(m, dtype=float) - params.shift) ** 2 - params.discriminant / (3 * beta**2)
    return np.sqrt(np.maximum(val, 0.0))


def big_gamma_path(j: int, m, params: PdeParams, lam: float, check: bool = True):
    """Point and derivative on Gamma_j (real-part parametrisation)."""
    m = np.asarray(m, dtype=float)
    lo, hi = c_pm(params, lam)
    if j == 2:
        return gamma_path(2, m, params, lam, check)
    if j not in (1, 3):
        raise ValueError("j must be 1, 2 or 3")
    if check:
        bad = (m > lo + 1e-12) if j == 1 else (m < hi - 1e-12)
        if np.any(bad):
            raise OutOfInterval(f"Gamma_{j} parameter out of range (c- = {lo}, c+ = {hi})")
    s = _s_of(m, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        ds = np.where(s > 0, 3.0 * (m - params.shift) / s, -np.inf if j == 1 else np.inf)
    deriv = np.empty(m.shape, dtype=complex)
    deriv.real = 1.0
    deriv.imag = ds
    return m + 1j * s, deriv


@dataclass(frozen=True)
class PathSegment:
    kind: SegmentKind
    interval: tuple[float, float]
    orientation: int
    map: Callable = field(repr=False, compare=False)


@dataclass(frozen=True)
class ContourSpec:
    """Discretised contour: ``sum(f(k) * dk * weight)`` approximates the integral."""

    lam: float
    c_minus: float
    c_plus: float
    segments: tuple
    truncation_M: float
    k: np.ndarray = field(repr=False)
    dk: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)
    param: np.ndarray = field(repr=False)
    segment_index: np.ndarray = field(repr=False)
    form: str = "gamma"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def size(self) -> int:
        return self.k.size

    @property
    def measure(self) -> np.ndarray:
        """Complex quadrature measure ``dk * weight`` per node."""
        return self.dk * self.weight

    def integrate(self, values) -> complex:
        return complex(np.sum(np.asarray(values) * self.measure))


def _gauss(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def _panel_breaks(a: float, b: float, rate: Callable, max_phase: float, max_len: float) -> np.ndarray:
    """Breakpoints on [a, b] with at most ``max_phase`` of cumulative ``rate`` per panel."""
    if b <= a:
        return np.array([a, b])
    fine = np.linspace(a, b, 4001)
    r = rate(fine)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (r[1:] + r[:-1]) * np.diff(fine))])
    n_phase = max(1, int(math.ceil(cum[-1] / max_phase)))
    targets = np.linspace(0.0, cum[-1], n_phase + 1)
    breaks = np.interp(targets, cum, fine)
    breaks[0], breaks[-1] = a, b
    # cap panel length so slowly varying amplitudes are still resolved
    out = [breaks[0]]
    for left, right in zip(breaks[:-1], breaks[1:]):
        n_sub = max(1, int(math.ceil((right - left) / max_len)))
        out.extend(np.linspace(left, right, n_sub + 1)[1:])
    return np.asarray(out)


def build_contour(
    cls: SpectralClassification,
    params: PdeParams,
    lam: float,
    M: float,
    density: float = 1.0,
    *,
    T_prime: float = 1.0,
    x_max: float = 1.0,
    order: int = 8,
    max_panel: float = 0.25,
    x_min: float | None = None,
    tail_tol: float | None = None,
    envelope: Callable | None = None,
    form: str = "gamma",
) -> ContourSpec:
    """Composite Gauss-Legendre discretisation of the contour truncated at ``M``.

    Panels hold at most ``2 pi / density`` of the local phase
    ``|d omega| T' + |dk| x_max`` and at most ``max_panel / density`` of parameter length.
    When ``tail_tol`` is given, the truncation is checked against the decay
    ``exp(-M x_min)`` (``x_min > 0``) or against ``envelope(M)`` and
    :class:`TruncationInsufficient` is raised if the tail is too large.
    """
    if density <= 0:
        raise ParameterError("density must be positive")
    if form not in ("gamma", "Gamma"):
        raise ParameterError("form must be 'gamma' or 'Gamma'")
    c_minus, c_plus = c_pm(params, lam)
    if M <= lam:
        raise ParameterError("truncation M must exceed lambda")
    if tail_tol is not None:
        tail = _tail_estimate(M, x_min, envelope)
        if tail > tail_tol:
            raise TruncationInsufficient(f"tail estimate {tail:.3g} exceeds {tail_tol:.3g} at M = {M}")

    unit_nodes, unit_weights = _gauss(order)
    max_phase = 2 * math.pi / density
    max_len = max_panel / density

    def rate_for(j):
        def rate(m):
            k, dk = gamma_path(j, m, params, lam, check=False)
            return np.abs(omega_prime(k, params) * dk) * T_prime + np.abs(dk) * x_max + 1.0

        return rate

    ks, dks, ws, ps, seg_ids = [], [], [], [], []
    segments = []
    layout = [
        (1, SegmentKind.GAMMA_LEFT, (lam, M), -1),
        (2, SegmentKind.GAMMA_BOTTOM, (c_minus, c_plus), 1),
        (3, SegmentKind.GAMMA_RIGHT, (lam, M), 1),
    ]
    for idx, (j, kind, (a, b), orient) in enumerate(layout):
        breaks = _panel_breaks(a, b, rate_for(j), max_phase, max_len)
        left, width = breaks[:-1], np.diff(breaks)
        m = (left[:, None] + width[:, None] * unit_nodes[None, :]).ravel()
        w = (width[:, None] * unit_weights[None, :]).ravel()
        k, dk = gamma_path(j, m, params, lam, check=False)
        if orient < 0:
            m, w, k, dk = m[::-1], w[::-1], k[::-1], dk[::-1]
        ks.append(k)
        dks.append(orient * dk)
        ws.append(w)
        if form == "Gamma":
            ps.append(k.real)
            big_kind = {1: SegmentKind.BIG_GAMMA_LEFT, 2: SegmentKind.BIG_GAMMA_BOTTOM, 3: SegmentKind.BIG_GAMMA_RIGHT}[j]
            big_interval = {1: (-math.inf, c_minus), 2: (c_minus, c_plus), 3: (c_plus, math.inf)}[j]
            segments.append(PathSegment(big_kind, big_interval, 1, lambda mm, j=j: big_gamma_path(j, mm, params, lam)))
        else:
            ps.append(m)
            segments.append(PathSegment(kind, (a, b), orient, lambda mm, j=j: gamma_path(j, mm, params, lam)))
        seg_ids.append(np.full(m.size, idx))

    meta = {
        "density": density,
        "order": order,
        "T_prime": T_prime,
        "x_max": x_max,
        "max_panel": max_panel,
        "detour_clearance": _clearance(cls, params, lam),
    }
    return ContourSpec(
        lam=lam,
        c_minus=c_minus,
        c_plus=c_plus,
        segments=tuple(segments),
        truncation_M=M,
        k=np.concatenate(ks),
        dk=np.concatenate(dks),
        weight=np.concatenate(ws),
        param=np.concatenate(ps),
        segment_index=np.concatenate(seg_ids),
        form=form,
        meta=meta,
    )


def _clearance(cls: SpectralClassification, params: PdeParams, lam: float) -> float:
    """Distance between the bottom segment and the point the deformation must avoid."""
    if cls.case is DiscCase.POSITIVE:
        return float(cls.distance_to_cut(complex(params.shift)).item())
    if cls.case is DiscCase.NEGATIVE:
        return lam - cls.branch_points[1].imag
    return lam


def _tail_estimate(M: float, x_min: float | None, envelope: Callable | None) -> float:
    if x_min is not None and x_min > 0:
        return math.exp(-M * x_min)
    if envelope is None:
        raise ParameterError("x_min = 0 requires an envelope for the truncation check")
    return float(envelope(M))


def choose_truncation(
    lam: float,
    tail_tol: float,
    x_min: float | None = None,
    envelope: Callable | None = None,
    m_cap: float = 200.0,
) -> float:
    """Smallest M (on a geometric probe grid) whose tail estimate is below ``tail_tol``.

    ``envelope`` maps an array of parameters m to nonnegative integrand bounds; its
    running maximum from the right is used so oscillation zeros do not fool the search.
    """
    start = max(lam, 0.0) + 0.5
    probe = np.geomspace(start, max(m_cap, 2 * start), 400)
    tails = np.zeros_like(probe)
    if x_min is not None and x_min > 0:
        tails = np.maximum(tails, np.exp(-probe * x_min))
    elif envelope is None:
        raise ParameterError("x_min = 0 requires an envelope")
    if envelope is not None:
        env = np.asarray(envelope(probe), dtype=float)
        env = np.maximum.accumulate(env[::-1])[::-1]
        tails = env if (x_min is None or x_min <= 0) else np.minimum(tails, env)
    ok = np.nonzero(tails <= tail_tol)[0]
    if ok.size == 0:
        raise TruncationInsufficient(f"tail stays above {tail_tol:g} up to m = {probe[-1]:.3g}")
    return float(probe[ok[0]])


def contour_for(params: PdeParams, **kwargs) -> ContourSpec:
    """Convenience: classify, select lambda and build in one call."""
    cls = classify(params)
    margin = kwargs.pop("margin", 1.5)
    lam = kwargs.pop("lam", None)
    if lam is None:
        lam = select_lambda(cls, params, margin)
    M = kwargs.pop("M")
    return build_contour(cls, params, lam, M, **kwargs)


def node_closure_violation(contour: ContourSpec, params: PdeParams) -> float:
    """Largest Re omega over the nodes (nonpositive for nodes in the closure of D+)."""
    return float(np.max(omega(contour.k, params).real))


def write_contour_csv(contour: ContourSpec, params: PdeParams, path) -> None:
    """Rows ``(m, Re k, Im k, Re omega, Im omega)`` in traversal order."""
    w = omega(contour.k, params)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "re_k", "im_k", "re_omega", "im_omega"])
        for m, k, wk in zip(contour.param, contour.k, w):
            writer.writerow([f"{m:.17g}", f"{k.real:.17g}", f"{k.imag:.17g}", f"{wk.real:.17g}", f"{wk.imag:.17g}"])


def hyperbola_indicator(contour: ContourSpec, params: PdeParams) -> np.ndarray:
    """D+ indicator at branch nodes (zero on the hyperbola)."""
    mask = contour.segment_index != 1
    return d_plus_indicator(contour.k[mask], params)
