"""Shared grids and independent oracle helpers for the test suite.

Oracles here are deliberately written from scratch (math.erf closed forms,
series, plain formulas) so they stay independent of the package's quadrature
and closed-form code paths.
"""

import math

PI = math.pi

# standard evaluation grids
GRID_R = tuple(k / 10 for k in range(1, 10))
GRID_R_SMALL = (0.1, 0.5, 0.9)
GRID_THETA = (PI / 6, PI / 2)
GRID_PHI = (0.3, 3 * PI / 4)


def grid_36():
    return [(r, th, ph) for r in GRID_R for th in GRID_THETA for ph in GRID_PHI]


def grid_12():
    return [(r, th, ph) for r in GRID_R_SMALL for th in GRID_THETA for ph in GRID_PHI]


def k_coeff(r):
    """2r + (1 - r^2) log((1-r)/(1+r)), straight from the definition."""
    return 2 * r + (1 - r * r) * math.log((1 - r) / (1 + r))


def k_tilde_coeff(r):
    return 2 * r + math.log((1 - r) / (1 + r))


def h3_amplitude(r):
    return (6 * r - 4 * r**3 + 3 * (1 - r * r) * math.log((1 - r) / (1 + r))) / (8 * r * r)


class SharpOracle:
    """Closed-form reference values for the truncated-Gaussian sharp family.

    Everything is expressed through math.erf; nothing touches the package.
    """

    def __init__(self, sigma=3.0):
        self.sigma = sigma
        self.erf_edge = math.erf(PI / (sigma * math.sqrt(2.0)))
        self.edge_exp = math.exp(-PI * PI / (2.0 * sigma * sigma))
        self.norm = 1.0 / (sigma * math.sqrt(2.0 * PI) * self.erf_edge)

    @property
    def x11_edge(self):
        """Profile value at the window edges mu +/- pi."""
        return self.norm * self.edge_exp

    @property
    def boundary_term(self):
        """(hi - phi) q(hi) - (lo - phi) q(lo) for the translating family."""
        return 2.0 * PI * self.x11_edge

    @property
    def abs_moment(self):
        """First absolute moment integral |u| x11(u) du over the window."""
        return 2.0 * self.sigma**2 * self.norm * (1.0 - self.edge_exp)

    @property
    def variance(self):
        """Second moment of the truncated profile about its center."""
        s = self.sigma
        return s * s * (self.erf_edge - (2.0 * PI / (s * math.sqrt(2.0 * PI))) * self.edge_exp) / self.erf_edge

    def b(self, r, theta):
        return self.boundary_term + r * math.sin(theta) * self.abs_moment

    def bound_C(self, r, theta):
        st = math.sin(theta)
        return (self.b(r, theta) + 2.0 * h3_amplitude(r) * st * self.abs_moment) ** 2

    def cross_term(self, r, theta):
        """Re tr integral rho L_phi Pi (phi_hat - phi): (3K/(4r^2)) sin(th) m1."""
        return 3.0 * k_coeff(r) / (4.0 * r * r) * math.sin(theta) * self.abs_moment


def new_metric_phiphi_oracle(r, theta):
    """9 K(r)^2 sin^2(theta) / (16 r^4)."""
    return 9.0 * k_coeff(r) ** 2 * math.sin(theta) ** 2 / (16.0 * r**4)
