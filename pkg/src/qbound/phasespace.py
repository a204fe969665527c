"""Phase-space correspondence for one qubit: kernel, symbol maps, Husimi function.

The operator <-> function correspondence on the sphere is implemented through
the kernel family

    Delta(theta1, phi1; s) = 1/2 [[1 + c_s cos t1,  c_s e^{-i p1} sin t1],
                                  [c_s e^{+i p1} sin t1,  1 - c_s cos t1]],

with c_s = 3^{(1+s)/2}.  The forward map sends an operator A to the symbol
F_A(Omega; s) = tr[A Delta(Omega; s)]; the inverse map integrates the symbol
against the kernel of *opposite* index, A = integral F_A(Omega; s)
Delta(Omega; -s) dmu(Omega) with dmu = sin t1 dt1 dp1 / (2 pi).  This sign
pairing is adopted literally and is pinned down by round-trip tests rather
than by convention.

Only s = -1 (whose state symbol is the Husimi function, a genuine probability
density) and s = +1 are exercised by the rest of the package; other real s
values are accepted but untested territory.
"""

from __future__ import annotations

import math

import numpy as np

from .quadrature import QuadSpec, sphere_integrate
from .qubit import ParamIndex, QubitState, require_hermitian


def sw_kernel(theta1, phi1, s: float) -> np.ndarray:
    """Kernel matrix at one sphere point, or a (..., 2, 2) field for array input.

    Every value is Hermitian with unit trace.
    """
    theta1 = np.asarray(theta1, dtype=float)
    phi1 = np.asarray(phi1, dtype=float)
    c = 3.0 ** ((1.0 + s) / 2.0)
    shape = np.broadcast(theta1, phi1).shape
    out = np.empty(shape + (2, 2), dtype=complex)
    ct, st = np.cos(theta1), np.sin(theta1)
    phase = np.exp(1j * phi1)
    out[..., 0, 0] = 1.0 + c * ct
    out[..., 0, 1] = c * st / phase
    out[..., 1, 0] = c * st * phase
    out[..., 1, 1] = 1.0 - c * ct
    return 0.5 * out


def weyl_map(a, s: float):
    """Symbol of a Hermitian operator: the real function tr[a Delta(.; s)]."""
    a = require_hermitian(a, name="weyl_map input")

    def symbol(theta1, phi1):
        kern = sw_kernel(theta1, phi1, s)
        return np.einsum("jk,...kj->...", a, kern).real

    return symbol


def inverse_weyl(f, s: float, spec: QuadSpec | None = None) -> np.ndarray:
    """Operator whose s-symbol is f: integral of f(Omega) Delta(Omega; -s) dmu."""

    def integrand(theta1, phi1):
        vals = np.broadcast_to(
            np.asarray(f(theta1, phi1), dtype=float), np.shape(theta1)
        )
        return vals[..., None, None] * sw_kernel(theta1, phi1, -s)

    return sphere_integrate(integrand, spec)


def husimi(state: QubitState):
    """Husimi function of the state as a callable Q(theta1, phi1).

    Q = (1 + r cos t1 cos theta + r cos(p1 - phi) sin t1 sin theta) / 2,
    which is the s = -1 symbol of the density matrix.  It is nonnegative,
    bounded by (1 +/- r)/2, and integrates to 1 against dmu.
    """
    r, th, ph = state.r, state.theta, state.phi
    ct, st = math.cos(th), math.sin(th)

    def q(theta1, phi1):
        theta1 = np.asarray(theta1, dtype=float)
        phi1 = np.asarray(phi1, dtype=float)
        return 0.5 * (1.0 + r * np.cos(theta1) * ct + r * np.cos(phi1 - ph) * np.sin(theta1) * st)

    return q


def husimi_partial(state: QubitState, k: ParamIndex):
    """Partial derivative of the Husimi function w.r.t. xi^k, as a callable."""
    r, th, ph = state.r, state.theta, state.phi
    ct, st = math.cos(th), math.sin(th)
    k = ParamIndex(k)

    if k is ParamIndex.R:

        def dq(theta1, phi1):
            return 0.5 * (
                np.cos(theta1) * ct + np.cos(np.asarray(phi1) - ph) * np.sin(theta1) * st
            )

    elif k is ParamIndex.THETA:

        def dq(theta1, phi1):
            return (0.5 * r) * (
                -np.cos(theta1) * st + np.cos(np.asarray(phi1) - ph) * np.sin(theta1) * ct
            )

    else:

        def dq(theta1, phi1):
            return (0.5 * r) * np.sin(np.asarray(phi1) - ph) * np.sin(theta1) * st

    return dq
