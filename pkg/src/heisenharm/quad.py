"""Grids, quadrature rules, sampled functions, and Haar sampling of U(n)."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_hermite

BOUNDARY_DECAY_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid on [-extent, extent]^dim."""

    dim: int
    extent: float
    npoints: int

    def __post_init__(self):
        if self.npoints < 2:
            raise ValueError("npoints must be >= 2")
        if self.extent <= 0:
            raise ValueError("extent must be positive")

    @property
    def spacing(self):
        return 2.0 * self.extent / (self.npoints - 1)

    def axis(self):
        return np.linspace(-self.extent, self.extent, self.npoints)

    def axis_weights(self):
        """Per-axis trapezoid weights (spacing h, halved at the endpoints)."""
        w = np.full(self.npoints, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def meshgrid(self):
        return np.meshgrid(*([self.axis()] * self.dim), indexing="ij")

    def weight_array(self):
        """Tensor-product trapezoid weights over the full grid."""
        w = self.axis_weights()
        out = w
        for _ in range(self.dim - 1):
            out = np.multiply.outer(out, w)
        return out

    @property
    def shape(self):
        return (self.npoints,) * self.dim


@dataclass
class SampledFunction:
    """Complex values sampled on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        self.values = vals

    @classmethod
    def from_callable(cls, grid, fn):
        return cls(grid, np.asarray(fn(*grid.meshgrid()), dtype=complex))

    def norm2_sq(self):
        """Squared L^2 norm by trapezoid quadrature."""
        return float(np.sum(self.grid.weight_array() * np.abs(self.values) ** 2))

    def boundary_max(self):
        """Largest |value| on the boundary shell of the grid."""
        mask = np.zeros(self.grid.shape, dtype=bool)
        for axis in range(self.grid.dim):
            sl = [slice(None)] * self.grid.dim
            sl[axis] = 0
            mask[tuple(sl)] = True
            sl[axis] = -1
            mask[tuple(sl)] = True
        return float(np.max(np.abs(self.values)[mask]))

    def decays_at_boundary(self, tol=BOUNDARY_DECAY_TOL):
        peak = float(np.max(np.abs(self.values)))
        if peak == 0.0:
            return True
        return self.boundary_max() <= tol * peak


@dataclass
class GaussHermiteRule:
    """Gauss-Hermite rule for integrals against exp(-(scale*xi)^2) d(xi)."""

    order: int
    scale: float = 1.0
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x, w = roots_hermite(self.order)
        self.nodes = x / self.scale
        self.weights = w / self.scale

    def integrate(self, fn):
        return np.sum(self.weights * fn(self.nodes))

    def total_weights(self):
        """Weights with the Gaussian divided out: w_j exp(x_j^2), log-computed."""
        x, w = roots_hermite(self.order)
        return np.exp(np.log(w) + x * x) / self.scale


def integrate(f, rule=None, warn=None):
    """Quadrature of a SampledFunction (trapezoid) or callable (Gauss-Hermite).

    Boundary-decay violations of the trapezoid path are appended to `warn`
    (a list) as structured entries rather than raised.
    """
    if isinstance(f, SampledFunction):
        if not f.decays_at_boundary() and warn is not None:
            warn.append(
                {
                    "kind": "boundary-decay",
                    "boundary_max": f.boundary_max(),
                    "extent": f.grid.extent,
                }
            )
        return complex(np.sum(f.grid.weight_array() * f.values))
    if isinstance(rule, GaussHermiteRule):
        return complex(rule.integrate(f))
    raise TypeError("need a SampledFunction or a callable plus a GaussHermiteRule")


@dataclass
class UnitarySample:
    """A U(n) element with its real symplectic-orthogonal embedding."""

    complex_matrix: np.ndarray
    real_embedding: np.ndarray = field(init=False)

    def __post_init__(self):
        sigma = np.asarray(self.complex_matrix, dtype=complex)
        a, b = sigma.real, sigma.imag
        self.complex_matrix = sigma
        self.real_embedding = np.block([[a, -b], [b, a]])

    def unitarity_defect(self):
        n = self.complex_matrix.shape[0]
        return float(
            np.max(np.abs(self.complex_matrix @ self.complex_matrix.conj().T - np.eye(n)))
        )

    def apply(self, p):
        """Act on a real or complexified point of R^{2n} (x-block then u-block)."""
        return self.real_embedding @ np.asarray(p)


def haar_unitary(n, seed):
    """Haar-distributed U(n) sample, deterministic per seed.

    QR of an iid complex Gaussian matrix with the phase-fixed diagonal.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return UnitarySample(q)


def circle_rule(npoints=64):
    """Deterministic uniform U(1) rule, exact for trigonometric polynomials
    of degree < npoints."""
    thetas = 2.0 * math.pi * np.arange(npoints) / npoints
    return [UnitarySample(np.array([[np.exp(1j * t)]])) for t in thetas]


def unitary_samples(n, count, seed):
    """U(n) sampling rule: deterministic circle rule for n = 1, Haar otherwise."""
    if n == 1:
        return circle_rule(count)
    return [haar_unitary(n, seed + j) for j in range(count)]


def symplectic_form(p, q):
    """[(x,u),(y,v)] = u.y - v.x for p=(x,u), q=(y,v) in R^{2n}."""
    p = np.asarray(p)
    q = np.asarray(q)
    if p.shape != q.shape or p.shape[0] % 2 != 0:
        raise ValueError("points must share an even dimension 2n")
    n = p.shape[0] // 2
    return p[n:] @ q[:n] - q[n:] @ p[:n]


def gauss_legendre_rule(a, b, order):
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w
