"""POVM families on a moving outcome window, outcome statistics, and sampling.

A family here is a continuous-outcome POVM on the window
[center - pi, center + pi] whose element at outcome phi_hat is

    Pi(phi_hat) = [[x11, x12 + i y12], [x12 - i y12, x11]],

with equal diagonal entries (x22 = x11 throughout).  `center` is the
construction point mu = construct_phi + eps: the window moves with the
parameter, which is the source of the boundary terms surfaced by the audit
module.

Element derivative callables (`d_x11`, ...) hold the total derivative with
respect to the construction parameter, including the dependence through the
trigonometric construction coefficients, not just through the window center.
They carry the piecewise-smooth part only: the distributional contribution
from differentiating a jump (the sign factor at the center) is not
represented.  In every combination the package integrates, that contribution
cancels identically when the evaluation angle equals the construction angle,
which is how the families are exercised here.

The saturating Gaussian family takes

    x11 = exp(-(phi_hat - mu)^2 / (2 sigma^2)) / (sigma sqrt(2 pi) erf(pi / (sigma sqrt 2)))
    y12 = cos(phi_c) * x11 * sgn(mu - phi_hat)
    x12 = sin(phi_c) * x11 * sgn(mu - phi_hat)

with sgn(0) = 0.  Its small eigenvalue vanishes identically away from the
center ("sharp" measurement) and the off-diagonal sign pattern makes the
maximized bound an equality.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import QuadSpec, integrate_1d, nodes_1d
from .qubit import DomainError, QubitState, density_matrix

COMPLETENESS_TOL = 1e-9
EIGENVALUE_TOL = 1e-12
UNBIASEDNESS_TOL = 1e-8
DENSITY_NEG_TOL = 1e-12

_COS_MIN = 1e-12


@dataclass(frozen=True)
class EstimationContext:
    """State plus the measurement construction data (window offset eps and
    the angle used by the trigonometric construction).

    construct_phi defaults to the state's phi.  Its cosine must be nonzero
    because the construction divides by it.
    """

    state: QubitState
    eps: float = 0.0
    construct_phi: float | None = None

    def __post_init__(self):
        if self.construct_phi is None:
            object.__setattr__(self, "construct_phi", self.state.phi)
        else:
            object.__setattr__(self, "construct_phi", float(self.construct_phi))
        if not math.isfinite(self.eps):
            raise DomainError("eps must be finite")
        if abs(math.cos(self.construct_phi)) < _COS_MIN:
            raise DomainError(
                "construction angle has cos(phi) ~ 0; the off-diagonal "
                "construction divides by it"
            )

    @property
    def center(self) -> float:
        """Window center mu = construct_phi + eps."""
        return self.construct_phi + self.eps


@dataclass(frozen=True)
class PovmFamily:
    """Matrix-element functions of one POVM family, plus window metadata.

    The outcome window is [center - half_width, center + half_width];
    constructed families use the full half_width = pi, tabulated ones infer
    it from their abscissa extremes.
    """

    center: float
    x11: Callable
    x12: Callable
    y12: Callable
    d_x11: Callable
    d_x12: Callable
    d_y12: Callable
    discontinuities: tuple[float, ...] = ()
    label: str = ""
    half_width: float = math.pi
    # quadrature sizing hint; tabulated families override it
    panels_hint: int = 64
    order_hint: int = 16

    @property
    def window(self) -> tuple[float, float]:
        return (self.center - self.half_width, self.center + self.half_width)

    def quad_spec(self, spec: QuadSpec | None = None) -> QuadSpec:
        """Spec for integrals over this family's window, split at its
        discontinuities.  An explicit spec keeps its panel/order sizing."""
        if spec is None:
            spec = QuadSpec(self.panels_hint, self.order_hint)
        return spec.with_splits(self.discontinuities)

    def matrix(self, phi_hat) -> np.ndarray:
        """Element matrix Pi(phi_hat); (..., 2, 2) for array input."""
        phi_hat = np.asarray(phi_hat, dtype=float)
        a = np.broadcast_to(np.asarray(self.x11(phi_hat)), phi_hat.shape)
        b = np.broadcast_to(np.asarray(self.x12(phi_hat)), phi_hat.shape)
        c = np.broadcast_to(np.asarray(self.y12(phi_hat)), phi_hat.shape)
        out = np.empty(phi_hat.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = a
        out[..., 0, 1] = b + 1j * c
        out[..., 1, 0] = b - 1j * c
        out[..., 1, 1] = a
        return out

    def eigenvalues(self, phi_hat) -> tuple[np.ndarray, np.ndarray]:
        """(lam1, lam2) with lam1 <= lam2, elementwise over phi_hat."""
        a = np.asarray(self.x11(phi_hat), dtype=float)
        root = np.sqrt(np.asarray(self.x12(phi_hat)) ** 2 + np.asarray(self.y12(phi_hat)) ** 2)
        return a - root, a + root


def _zero(phi_hat):
    return np.zeros_like(np.asarray(phi_hat, dtype=float))


def gaussian_sharp_family(ctx: EstimationContext, sigma: float = 3.0) -> PovmFamily:
    """The saturating Gaussian family (default sigma = 3)."""
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    mu = ctx.center
    phi_c = ctx.construct_phi
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi) * math.erf(math.pi / (sigma * math.sqrt(2.0))))
    sin_c, cos_c = math.sin(phi_c), math.cos(phi_c)
    inv_s2 = 1.0 / (sigma * sigma)

    def x11(u):
        u = np.asarray(u, dtype=float)
        return norm * np.exp(-0.5 * (u - mu) ** 2 * inv_s2)

    def sgn(u):
        return np.sign(mu - np.asarray(u, dtype=float))

    def x12(u):
        return sin_c * x11(u) * sgn(u)

    def y12(u):
        return cos_c * x11(u) * sgn(u)

    def d_x11(u):
        u = np.asarray(u, dtype=float)
        return x11(u) * (u - mu) * inv_s2

    def d_x12(u):
        return (cos_c * x11(u) + sin_c * d_x11(u)) * sgn(u)

    def d_y12(u):
        return (-sin_c * x11(u) + cos_c * d_x11(u)) * sgn(u)

    return PovmFamily(
        center=mu,
        x11=x11,
        x12=x12,
        y12=y12,
        d_x11=d_x11,
        d_x12=d_x12,
        d_y12=d_y12,
        discontinuities=(mu,),
        label=f"gaussian-sharp(sigma={sigma:g})",
    )


def tapered_sharp_family(
    ctx: EstimationContext,
    sigma: float = 3.0,
    taper_power: int = 1,
    offdiag_scale: float = 1.0,
) -> PovmFamily:
    """Gaussian-profile family whose elements vanish at the window edges.

    x11 is the Gaussian profile multiplied by cos^{2k}((phi_hat - mu)/2) and
    renormalized; the off-diagonals follow the sharp construction scaled by
    |offdiag_scale| <= 1, so the small eigenvalue is (1 - |scale|) x11 >= 0.
    Because the elements vanish at the edges, the moving-window boundary term
    vanishes for this family.
    """
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    if taper_power < 1:
        raise DomainError("taper_power must be >= 1")
    if abs(offdiag_scale) > 1.0:
        raise DomainError("|offdiag_scale| must be <= 1 to keep the POVM positive")
    mu = ctx.center
    phi_c = ctx.construct_phi
    sin_c, cos_c = math.sin(phi_c), math.cos(phi_c)
    inv_s2 = 1.0 / (sigma * sigma)
    k = int(taper_power)

    def shape(u):
        # profile as a function of u = phi_hat - mu
        return np.exp(-0.5 * u * u * inv_s2) * np.cos(0.5 * u) ** (2 * k)

    def shape_prime(u):
        cos_half = np.cos(0.5 * u)
        return np.exp(-0.5 * u * u * inv_s2) * (
            -u * inv_s2 * cos_half ** (2 * k)
            - k * cos_half ** (2 * k - 1) * np.sin(0.5 * u)
        )

    norm = 1.0 / integrate_1d(shape, -math.pi, math.pi, QuadSpec(64, 16))

    def x11(u):
        return norm * shape(np.asarray(u, dtype=float) - mu)

    def sgn(u):
        return np.sign(mu - np.asarray(u, dtype=float))

    def x12(u):
        return offdiag_scale * sin_c * x11(u) * sgn(u)

    def y12(u):
        return offdiag_scale * cos_c * x11(u) * sgn(u)

    def d_x11(u):
        return -norm * shape_prime(np.asarray(u, dtype=float) - mu)

    def d_x12(u):
        return offdiag_scale * (cos_c * x11(u) + sin_c * d_x11(u)) * sgn(u)

    def d_y12(u):
        return offdiag_scale * (-sin_c * x11(u) + cos_c * d_x11(u)) * sgn(u)

    return PovmFamily(
        center=mu,
        x11=x11,
        x12=x12,
        y12=y12,
        d_x11=d_x11,
        d_x12=d_x12,
        d_y12=d_y12,
        discontinuities=(mu,),
        label=f"tapered-sharp(sigma={sigma:g},k={k},scale={offdiag_scale:g})",
    )


def tabulated_family(phi_hat, x11, x12, y12, label: str = "tabulated") -> PovmFamily:
    """Piecewise-linear family from sampled matrix elements.

    The samples are interpreted as a parameter-independent POVM (its total
    parameter derivative is zero), the window is inferred from the abscissa
    extremes, and interpolation kinks are registered as split points so
    low-order panels integrate the elements exactly.
    """
    phi_hat = np.asarray(phi_hat, dtype=float)
    if phi_hat.ndim != 1 or phi_hat.size < 2:
        raise ValueError("need at least two tabulation nodes")
    if not np.all(np.diff(phi_hat) > 0):
        raise ValueError("phi_hat column must be strictly increasing")
    cols = []
    for name, col in (("x11", x11), ("x12", x12), ("y12", y12)):
        col = np.asarray(col, dtype=float)
        if col.shape != phi_hat.shape:
            raise ValueError(f"column {name} has shape {col.shape}, expected {phi_hat.shape}")
        if not np.all(np.isfinite(col)):
            raise ValueError(f"column {name} contains non-finite values")
        cols.append(col)
    x11c, x12c, y12c = cols
    lo, hi = float(phi_hat[0]), float(phi_hat[-1])
    center = 0.5 * (lo + hi)

    def interp(col):
        def f(u):
            return np.interp(np.asarray(u, dtype=float), phi_hat, col)

        return f

    return PovmFamily(
        center=center,
        x11=interp(x11c),
        x12=interp(x12c),
        y12=interp(y12c),
        d_x11=_zero,
        d_x12=_zero,
        d_y12=_zero,
        discontinuities=tuple(float(v) for v in phi_hat[1:-1]),
        label=label,
        half_width=0.5 * (hi - lo),
        panels_hint=1,
        order_hint=4,
    )


def load_tabulated_csv(path) -> PovmFamily:
    """Read a (phi_hat, x11, x12, y12) CSV into a piecewise-linear family."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty POVM table")
        expected = ["phi_hat", "x11", "x12", "y12"]
        if [h.strip() for h in header] != expected:
            raise ValueError(f"{path}: header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 columns")
            rows.append([float(v) for v in row])
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two rows")
    data = np.asarray(rows, dtype=float)
    return tabulated_family(data[:, 0], data[:, 1], data[:, 2], data[:, 3], label=str(path))


def trace_with_elements(m: np.ndarray, x11, x12, y12):
    """tr(M Pi) for element-value arrays of a family with equal diagonals."""
    return (m[0, 0] + m[1, 1]) * x11 + m[0, 1] * (x12 - 1j * y12) + m[1, 0] * (x12 + 1j * y12)


def outcome_density_values(ctx: EstimationContext, p: PovmFamily, phi_hat) -> np.ndarray:
    """q(phi_hat) = tr[rho Pi(phi_hat)] evaluated vectorized (real part)."""
    rho = density_matrix(ctx.state)
    vals = trace_with_elements(rho, p.x11(phi_hat), p.x12(phi_hat), p.y12(phi_hat))
    return np.asarray(vals).real


@dataclass(frozen=True)
class ValidationReport:
    """Diagnostic residuals for one family at one estimation context."""

    completeness_residual: float
    min_eigenvalue: float
    x11_symmetry_residual: float
    x12_mean_residual: float
    y12_mean_residual: float
    unbiasedness_residual: float
    sign_conditions_ok: bool
    completeness_ok: bool = field(init=False)
    positivity_ok: bool = field(init=False)
    unbiasedness_ok: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "completeness_ok", self.completeness_residual <= COMPLETENESS_TOL)
        object.__setattr__(self, "positivity_ok", self.min_eigenvalue >= -EIGENVALUE_TOL)
        object.__setattr__(self, "unbiasedness_ok", abs(self.unbiasedness_residual) <= UNBIASEDNESS_TOL)

    @property
    def all_ok(self) -> bool:
        return (
            self.completeness_ok
            and self.positivity_ok
            and self.unbiasedness_ok
            and self.sign_conditions_ok
        )

    def as_dict(self) -> dict:
        return {
            "completeness_residual": self.completeness_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "x11_symmetry_residual": self.x11_symmetry_residual,
            "x12_mean_residual": self.x12_mean_residual,
            "y12_mean_residual": self.y12_mean_residual,
            "unbiasedness_residual": self.unbiasedness_residual,
            "sign_conditions_ok": self.sign_conditions_ok,
            "completeness_ok": self.completeness_ok,
            "positivity_ok": self.positivity_ok,
            "unbiasedness_ok": self.unbiasedness_ok,
            "all_ok": self.all_ok,
        }


def validate_povm(
    p: PovmFamily,
    ctx: EstimationContext,
    spec: QuadSpec | None = None,
    grid_points: int = 2001,
) -> ValidationReport:
    """Check completeness, positivity, the symmetry and zero-mean element
    conditions, the shifted unbiasedness integral, and the off-diagonal sign
    pattern.  Purely diagnostic: nothing raises."""
    qspec = p.quad_spec(spec)
    lo, hi = p.window
    mu = p.center

    comp_diag = integrate_1d(p.x11, lo, hi, qspec) - 1.0
    comp_x = integrate_1d(p.x12, lo, hi, qspec)
    comp_y = integrate_1d(p.y12, lo, hi, qspec)
    completeness = max(abs(comp_diag), math.hypot(comp_x, comp_y))

    # interior grid, avoiding the exact center and edges
    u = np.linspace(lo, hi, grid_points)[1:-1]
    lam1, _ = p.eigenvalues(u)
    min_eig = float(np.min(lam1))

    half = np.linspace(0.0, p.half_width, grid_points // 2)[1:-1]
    sym = float(np.max(np.abs(np.asarray(p.x11(mu + half)) - np.asarray(p.x11(mu - half)))))

    def unbias_integrand(x):
        return (x - mu) * outcome_density_values(ctx, p, x)

    unbias = integrate_1d(unbias_integrand, lo, hi, qspec)

    cos_c = math.cos(ctx.construct_phi)
    ratio = np.asarray(p.y12(u)) / cos_c
    pattern = ratio * np.sign(mu - u)
    sign_ok = bool(np.all(pattern >= -EIGENVALUE_TOL)) and abs(float(p.y12(mu))) <= EIGENVALUE_TOL

    return ValidationReport(
        completeness_residual=float(completeness),
        min_eigenvalue=min_eig,
        x11_symmetry_residual=sym,
        x12_mean_residual=float(abs(comp_x)),
        y12_mean_residual=float(abs(comp_y)),
        unbiasedness_residual=float(unbias),
        sign_conditions_ok=sign_ok,
    )


@dataclass(frozen=True)
class OutcomeDistribution:
    """Outcome density q(phi_hat) = tr[rho Pi(phi_hat)] on the family window."""

    pdf: Callable
    window: tuple[float, float]
    split_points: tuple[float, ...]

    def grid(self, size: int = 8192) -> np.ndarray:
        lo, hi = self.window
        pts = np.linspace(lo, hi, size)
        return np.unique(np.concatenate([pts, np.asarray(self.split_points)]))


def outcome_distribution(
    ctx: EstimationContext,
    p: PovmFamily,
    scan_points: int = 4097,
) -> OutcomeDistribution:
    """Build the outcome density, rejecting families that go genuinely negative."""
    lo, hi = p.window

    def pdf(phi_hat):
        return outcome_density_values(ctx, p, phi_hat)

    scan = np.linspace(lo, hi, scan_points)
    vals = pdf(scan)
    worst = int(np.argmin(vals))
    if vals[worst] < -DENSITY_NEG_TOL:
        raise DomainError(
            f"outcome density is negative ({vals[worst]:.3e}) at phi_hat = {scan[worst]!r}"
        )
    return OutcomeDistribution(pdf=pdf, window=(lo, hi), split_points=p.discontinuities)


def estimator_moments(
    ctx: EstimationContext,
    p: PovmFamily,
    spec: QuadSpec | None = None,
) -> tuple[float, float]:
    """Mean of phi_hat and the second moment about the true parameter.

    The variance returned is E[(phi_hat - phi)^2] with phi the state's
    azimuth, i.e. deviation from the true value rather than from the sample
    mean; the two coincide when eps = 0.
    """
    qspec = p.quad_spec(spec)
    lo, hi = p.window
    phi = ctx.state.phi

    def mean_integrand(x):
        return x * outcome_density_values(ctx, p, x)

    def var_integrand(x):
        return (x - phi) ** 2 * outcome_density_values(ctx, p, x)

    mean = integrate_1d(mean_integrand, lo, hi, qspec)
    var = integrate_1d(var_integrand, lo, hi, qspec)
    return float(mean), float(var)


def sample_outcomes(
    dist: OutcomeDistribution,
    n: int,
    seed: int,
    grid_size: int = 8192,
) -> np.ndarray:
    """Draw n outcomes by inverse-CDF on a tabulated cumulative grid.

    The CDF is a trapezoid accumulation on `grid_size` nodes (plus the split
    points), inverted by linear interpolation.  Identical (seed, n,
    grid_size) give identical output.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if grid_size < 4096:
        raise ValueError("grid_size must be >= 4096")
    grid = dist.grid(grid_size)
    dens = np.maximum(np.asarray(dist.pdf(grid), dtype=float), 0.0)
    steps = np.diff(grid)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * steps)])
    total = cdf[-1]
    if not (np.isfinite(total) and total > 0):
        raise ValueError("density does not integrate to a positive finite mass")
    cdf /= total
    if n == 0:
        return np.empty(0, dtype=float)
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    return np.interp(u, cdf, grid)
