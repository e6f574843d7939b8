"""Bounded domains, uniform grids, Dirichlet operators and singular quadrature.

Geometries are 1-D intervals containing the origin and N-dimensional balls
under radial symmetry.  All quadrature reduces nodal data against |x|^alpha
weights to dot products with hat-function masses (exact near the origin,
Gauss-Legendre where the weight is smooth), and the kinetic term is the P1
Dirichlet form, so flows, energies and residuals share one discrete system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonIntegrableWeight, OriginOutside, ZeroFunction
from .params import surface_area
from .quadrature import cell_moments


@dataclass(frozen=True)
class Interval:
    """Open interval (x_lo, x_hi); must contain 0 in its interior."""

    x_lo: float
    x_hi: float

    @property
    def contains_origin(self) -> bool:
        return self.x_lo < 0.0 < self.x_hi

    @property
    def dimension(self) -> int:
        return 1

    @property
    def origin_distance(self) -> float:
        return min(-self.x_lo, self.x_hi)

    @property
    def measure(self) -> float:
        return self.x_hi - self.x_lo


@dataclass(frozen=True)
class Ball:
    """Ball of radius R in R^N, reduced to the radial segment [0, R]."""

    N: int
    radius: float

    @property
    def contains_origin(self) -> bool:
        return True

    @property
    def dimension(self) -> int:
        return self.N

    @property
    def origin_distance(self) -> float:
        return self.radius

    @property
    def measure(self) -> float:
        return surface_area(self.N) * self.radius**self.N / self.N


Domain = Interval | Ball


@dataclass(frozen=True)
class Grid:
    """Uniform grid over a domain with Dirichlet boundary flags."""

    domain: Domain
    nodes: np.ndarray
    h: float

    @property
    def is_ball(self) -> bool:
        return isinstance(self.domain, Ball)

    @property
    def interior(self) -> slice:
        # ball grids keep r = 0 as an interior (regularity) node
        return slice(0, self.nodes.size - 1) if self.is_ball else slice(1, self.nodes.size - 1)

    @property
    def n_interior(self) -> int:
        return self.nodes.size - 1 if self.is_ball else self.nodes.size - 2

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes[self.interior]

    @property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.nodes.size, dtype=bool)
        mask[-1] = True
        if not self.is_ball:
            mask[0] = True
        return mask


def build_grid(domain: Domain, resolution: int) -> Grid:
    """Uniform grid with ``resolution`` cells."""
    if resolution < 16:
        raise ValueError(f"resolution must be at least 16, got {resolution}")
    if not domain.contains_origin:
        raise OriginOutside(f"domain {domain} does not contain 0 in its interior")
    if isinstance(domain, Interval):
        if not domain.x_lo < domain.x_hi:
            raise ValueError("interval requires x_lo < x_hi")
        nodes = np.linspace(domain.x_lo, domain.x_hi, resolution + 1)
        h = (domain.x_hi - domain.x_lo) / resolution
    else:
        if domain.radius <= 0 or domain.N < 1:
            raise ValueError("ball requires positive radius and N >= 1")
        nodes = np.linspace(0.0, domain.radius, resolution + 1)
        h = domain.radius / resolution
    return Grid(domain=domain, nodes=nodes, h=h)


@dataclass
class GridFunction:
    """Nodal values at interior nodes; zero trace on the boundary is implicit."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_interior,):
            raise ValueError(
                f"expected {self.grid.n_interior} interior values, got {self.values.shape}"
            )

    def full(self) -> np.ndarray:
        out = np.zeros(self.grid.nodes.size)
        out[self.grid.interior] = self.values
        return out

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, np.asarray(values, dtype=float))

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, fn(grid.interior_nodes))

    @classmethod
    def from_full(cls, grid: Grid, full_values) -> "GridFunction":
        return cls(grid, np.asarray(full_values, dtype=float)[grid.interior])


# ----------------------------------------------------------------------
# weights shared by quadrature, energies and flows
# ----------------------------------------------------------------------

def check_weight_exponent(grid: Grid, weight_exponent: float) -> None:
    limit = -min(2.0, float(grid.domain.dimension))
    if weight_exponent <= limit:
        raise NonIntegrableWeight(
            f"weight exponent {weight_exponent} not integrable near 0 in dimension "
            f"{grid.domain.dimension} (needs > {limit})"
        )


def hat_masses(grid: Grid, weight_exponent: float) -> np.ndarray:
    """Per-node weights w with sum(w * z) = integral of |x|^alpha * interp(z).

    The linear interpolant of the nodal data z is integrated cell by cell
    against the weight in closed form near the origin; the result is the
    full N-dimensional integral (sphere factor included for balls).
    """
    check_weight_exponent(grid, weight_exponent)
    x = grid.nodes
    n = x.size
    w = np.zeros(n)
    if grid.is_ball:
        alpha = grid.domain.N - 1.0 + weight_exponent
        M = cell_moments(x[:-1], x[1:], alpha, 1)
        h = np.diff(x)
        frac = M[:, 1] / h
        w[:-1] += M[:, 0] - frac
        w[1:] += frac
        return surface_area(grid.domain.N) * w

    # interval: reflect negative-x cells onto the positive axis
    alpha = weight_exponent
    lo, hi = x[:-1], x[1:]
    h = hi - lo

    pos = lo >= 0.0
    if np.any(pos):
        M = cell_moments(lo[pos], hi[pos], alpha, 1)
        frac = M[:, 1] / h[pos]
        idx = np.nonzero(pos)[0]
        np.add.at(w, idx, M[:, 0] - frac)
        np.add.at(w, idx + 1, frac)

    neg = hi <= 0.0
    if np.any(neg):
        M = cell_moments(-hi[neg], -lo[neg], alpha, 1)
        frac = M[:, 1] / h[neg]
        idx = np.nonzero(neg)[0]
        np.add.at(w, idx + 1, M[:, 0] - frac)
        np.add.at(w, idx, frac)

    strad = ~(pos | neg)
    for i in np.nonzero(strad)[0]:
        # cell straddles the origin: split there; the virtual node value
        # is a convex combination of the endpoints
        a_node, b_node = x[i], x[i + 1]
        t0 = -a_node / (b_node - a_node)  # interpolation parameter of x = 0
        c_i, c_ip = 1.0 - t0, t0
        M = cell_moments(np.array([0.0]), np.array([b_node]), alpha, 1)[0]
        frac = M[1] / b_node
        w0 = M[0] - frac
        w[i] += w0 * c_i
        w[i + 1] += w0 * c_ip + frac
        M = cell_moments(np.array([0.0]), np.array([-a_node]), alpha, 1)[0]
        frac = M[1] / (-a_node)
        w0 = M[0] - frac
        w[i] += w0 * c_i + frac
        w[i + 1] += w0 * c_ip
    return w


def kinetic_conductances(grid: Grid) -> np.ndarray:
    """Per-cell kappa with Dirichlet form K(u) = sum kappa * (u_{i+1} - u_i)^2."""
    x = grid.nodes
    h = np.diff(x)
    if grid.is_ball:
        nu = grid.domain.N - 1.0
        meas = surface_area(grid.domain.N) * cell_moments(x[:-1], x[1:], nu, 0)[:, 0]
    else:
        meas = h.copy()
    return meas / h**2


# ----------------------------------------------------------------------
# operations
# ----------------------------------------------------------------------

def integrate_nodal(grid: Grid, full_values, weight_exponent: float = 0.0) -> float:
    """Quadrature of arbitrary nodal data on the closed domain.

    Unlike ``integrate`` this keeps the supplied boundary values, so the
    constant 1 integrates exactly to |Omega| (weight 0) or to the closed
    forms of the weighted volume.
    """
    w = hat_masses(grid, weight_exponent)
    return float(np.dot(w, np.asarray(full_values, dtype=float)))


def integrate(g: GridFunction, weight_exponent: float = 0.0) -> float:
    """Integral over the domain of |x|^weight_exponent times the interpolant of g.

    The zero trace of g on the boundary is part of the interpolant.
    """
    return integrate_nodal(g.grid, g.full(), weight_exponent)


def mass(g: GridFunction) -> float:
    """Squared L2 norm of g (quadrature of the nodal squares)."""
    return integrate(g.with_values(g.values**2), 0.0)


def normalize_mass(g: GridFunction) -> GridFunction:
    """Rescale to unit mass; idempotent at round-off level."""
    m = mass(g)
    if m <= 0.0:
        raise ZeroFunction("cannot normalize a grid function with zero L2 norm")
    return g.with_values(g.values / math.sqrt(m))


def dirichlet_form(g: GridFunction) -> float:
    """Kinetic integral of |grad g|^2 (P1 Dirichlet form)."""
    kappa = kinetic_conductances(g.grid)
    return float(np.sum(kappa * np.diff(g.full()) ** 2))


def apply_dirichlet_laplacian(g: GridFunction) -> GridFunction:
    """Negative Laplacian of g with Dirichlet rows eliminated.

    Weak (lumped P1) realization: (-Lap u)_i = F_i / m_i with F the
    conservative fluxes and m the unweighted hat masses; in radial
    reduction this is -(u'' + (N-1)/r u') with the r = 0 node closed by
    the regularity condition.
    """
    kappa = kinetic_conductances(g.grid)
    full = g.full()
    d = np.diff(full)
    flux = np.zeros_like(full)
    flux[:-1] += kappa * -d
    flux[1:] += kappa * d
    m = hat_masses(g.grid, 0.0)
    nodal = flux / m
    return g.with_values(nodal[g.grid.interior])
