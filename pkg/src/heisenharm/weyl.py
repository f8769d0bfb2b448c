"""Finite Hermite-basis models of pi_lambda, the Weyl transform, and Schatten norms.

Operators are dense complex matrices in the degree-graded truncated Hermite
basis; entry (a, b) is the coefficient (T Phi_b^lam, Phi_a^lam).  Matrix
elements are computed by Gauss-Hermite quadrature shifted to the centre of
the displaced Gaussian factor.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_hermite

from .specfn import hermite_normalized_seq

IMAG_RANGE_FACTOR = 6.0


class RangeGuardError(ValueError):
    """Complexified displacement too far into the imaginary domain."""


@lru_cache(maxsize=None)
def graded_indices(n, K):
    """Multi-indices |alpha| <= K ordered by degree, then lexicographically."""
    byk = []
    for k in range(K + 1):
        level = []

        def fill(prefix, remaining, slots):
            if slots == 1:
                level.append(prefix + (remaining,))
                return
            for first in range(remaining, -1, -1):
                fill(prefix + (first,), remaining - first, slots - 1)

        fill((), k, n)
        byk.extend(level)
    return tuple(byk)


@dataclass(frozen=True)
class BasisSpec:
    """Finite model of L^2(R^n): dimension n, spectral parameter, truncation K."""

    n: int
    lam: float
    K: int

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("lambda must be nonzero")
        if self.K < 0 or self.n < 1:
            raise ValueError("need K >= 0 and n >= 1")

    @property
    def dim_total(self):
        return math.comb(self.K + self.n, self.n)

    def indices(self):
        return graded_indices(self.n, self.K)

    def index_array(self):
        return np.array(self.indices(), dtype=int)

    def degrees(self):
        return self.index_array().sum(axis=1)

    def block(self, k):
        """Positions of the multi-indices with |alpha| = k (contiguous)."""
        deg = self.degrees()
        pos = np.nonzero(deg == k)[0]
        return slice(int(pos[0]), int(pos[-1]) + 1)


@dataclass
class OperatorMatrix:
    """Dense complex matrix tagged with its BasisSpec."""

    basis: BasisSpec
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        d = self.basis.dim_total
        if e.shape != (d, d):
            raise ValueError(f"entries must be {d}x{d}")
        self.entries = e

    def compose(self, other):
        if other.basis != self.basis:
            raise ValueError("basis mismatch")
        return OperatorMatrix(self.basis, self.entries @ other.entries)

    def adjoint(self):
        return OperatorMatrix(self.basis, self.entries.conj().T)

    def hs_norm_sq(self):
        return float(np.sum(np.abs(self.entries) ** 2))


def default_rule_order(K):
    return 2 * K + 16


def _pi_entries_1d(lam, K, z, w, nodes, weights):
    """(K+1)x(K+1) matrix of (pi_lam(z,w) h_q, h_p) for one coordinate pair.

    Gauss-Hermite in the integration variable, with the node centre shifted
    by -Re(W)/2 where W = sqrt|lam| w, so the combined Gaussian of the two
    Hermite factors sits on the rule.
    """
    mu = math.sqrt(abs(lam))
    s = 1.0 if lam > 0 else -1.0
    W = mu * complex(w)
    Z = complex(z)
    c = -0.5 * W.real
    t = nodes + c
    wi = W.imag
    prefactor = np.exp(1j * lam * Z * complex(w) / 2.0 + (wi * wi - W * W) / 4.0)
    phase = np.exp(1j * s * mu * Z * t - 1j * nodes * wi)
    a = hermite_normalized_seq(K, t) * weights
    b = hermite_normalized_seq(K, t + W)
    m = (a * phase) @ b.T
    return prefactor * m


def _assemble(basis, mats):
    """Tensor-product entries M[a,b] = prod_j m_j[alpha_j, beta_j]."""
    idx = basis.index_array()
    out = np.ones((basis.dim_total, basis.dim_total), dtype=complex)
    for j, m in enumerate(mats):
        col = idx[:, j]
        out *= m[col[:, None], col[None, :]]
    return out


def pi_real(x, u, basis, order=None):
    """Matrix of the Schroedinger representation pi_lam(x, u) on the basis."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if x.shape[0] != basis.n or u.shape[0] != basis.n:
        raise ValueError("x and u must have n coordinates")
    nodes, weights = roots_hermite(order or default_rule_order(basis.K))
    mats = [
        _pi_entries_1d(basis.lam, basis.K, x[j], u[j], nodes, weights) for j in range(basis.n)
    ]
    return OperatorMatrix(basis, _assemble(basis, mats))


def pi_complex(z, w, basis, order=None):
    """Matrix of the complexified pi_lam(z, w); rejects |Im w| beyond 6/sqrt|lam|."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    if z.shape[0] != basis.n or w.shape[0] != basis.n:
        raise ValueError("z and w must have n coordinates")
    limit = IMAG_RANGE_FACTOR / math.sqrt(abs(basis.lam))
    if np.max(np.abs(w.imag)) > limit:
        raise RangeGuardError(
            f"|Im w| = {np.max(np.abs(w.imag)):.3f} exceeds the desk-scale limit {limit:.3f}"
        )
    nodes, weights = roots_hermite(order or default_rule_order(basis.K))
    mats = [
        _pi_entries_1d(basis.lam, basis.K, z[j], w[j], nodes, weights) for j in range(basis.n)
    ]
    return OperatorMatrix(basis, _assemble(basis, mats))


def _check_weyl_grid(g, basis):
    if basis.n != 1:
        raise NotImplementedError("grid-based Weyl transform is implemented for n = 1")
    if g.grid.dim != 2:
        raise ValueError("need a 2-dimensional grid (x, u) for n = 1")


def weyl_transform(g, basis, order=None, warn=None):
    """pi_lam(g) = integral of g(x,u) pi_lam(x,u) dx du over the sample grid.

    The x-integral is folded into per-node phase sums so the cost is
    O(N_u (N_x M + K^2 M)) rather than one dense matrix per grid point.
    """
    _check_weyl_grid(g, basis)
    if warn is not None and not g.decays_at_boundary():
        warn.append({"kind": "boundary-decay", "boundary_max": g.boundary_max()})
    lam, K = basis.lam, basis.K
    mu = math.sqrt(abs(lam))
    s = 1.0 if lam > 0 else -1.0
    nodes, weights = roots_hermite(order or default_rule_order(K))
    ax = g.grid.axis()
    wt = g.grid.axis_weights()
    gx = wt[:, None] * g.values  # x-weights folded into the data
    acc = np.zeros((K + 1, K + 1), dtype=complex)
    for iu, u in enumerate(ax):
        W = mu * u
        t = nodes - 0.5 * W
        freqs = lam * u / 2.0 + s * mu * t
        su = np.exp(1j * np.outer(ax, freqs)).T @ gx[:, iu]
        a = hermite_normalized_seq(K, t)
        b = hermite_normalized_seq(K, t + W)
        acc += (wt[iu] * math.exp(-W * W / 4.0)) * ((a * (weights * su)) @ b.T)
    return OperatorMatrix(basis, acc)


def weyl_inverse(op, grid, order=None):
    """g(x,u) = (2pi)^{-n} |lam|^n tr(pi_lam(x,u)^* T) on every grid point."""
    basis = op.basis
    if basis.n != 1:
        raise NotImplementedError("grid-based Weyl inversion is implemented for n = 1")
    if grid.dim != 2:
        raise ValueError("need a 2-dimensional grid")
    lam, K = basis.lam, basis.K
    mu = math.sqrt(abs(lam))
    s = 1.0 if lam > 0 else -1.0
    nodes, weights = roots_hermite(order or default_rule_order(K))
    ax = grid.axis()
    c = (2.0 * math.pi) ** -1 * abs(lam)
    vals = np.empty((grid.npoints, grid.npoints), dtype=complex)
    T = op.entries
    for iu, u in enumerate(ax):
        W = mu * u
        t = nodes - 0.5 * W
        freqs = lam * u / 2.0 + s * mu * t
        a = hermite_normalized_seq(K, t)
        b = hermite_normalized_seq(K, t + W)
        v = np.einsum("pj,pq,qj->j", a, T, b)
        vals[:, iu] = c * math.exp(-W * W / 4.0) * (np.exp(-1j * np.outer(ax, freqs)) @ (weights * v))
    from .quad import SampledFunction

    return SampledFunction(grid, vals)


def special_hermite(alpha, beta, zw, basis, order=None):
    """Special Hermite function Phi_{alpha,beta}^lam(z,w) =
    (2pi)^{-n/2} (pi_lam(z,w) Phi_alpha, Phi_beta)."""
    n = basis.n
    zw = np.atleast_1d(np.asarray(zw, dtype=complex))
    if zw.shape[0] != 2 * n:
        raise ValueError("zw must have 2n coordinates")
    alpha = tuple(int(v) for v in np.atleast_1d(alpha))
    beta = tuple(int(v) for v in np.atleast_1d(beta))
    if max(sum(alpha), sum(beta)) > basis.K:
        raise ValueError("multi-index degree exceeds the basis truncation")
    z, w = zw[:n], zw[n:]
    nodes, weights = roots_hermite(order or default_rule_order(basis.K))
    val = (2.0 * math.pi) ** (-n / 2.0)
    for j in range(n):
        m = _pi_entries_1d(basis.lam, basis.K, z[j], w[j], nodes, weights)
        val = val * m[beta[j], alpha[j]]
    return complex(val)


def hermite_semigroup(a, basis):
    """Diagonal semigroup e^{-a H(lam)}: entries e^{-a (2|alpha|+n) |lam|}."""
    if a < 0:
        raise ValueError("a must be >= 0")
    eig = (2 * basis.degrees() + basis.n) * abs(basis.lam)
    return OperatorMatrix(basis, np.diag(np.exp(-a * eig)).astype(complex))


SV_FLOOR = 1e-14


def schatten(op, p):
    """Schatten norm (p in {1, 2, inf}) or plain trace of an OperatorMatrix.

    Singular values below 1e-14 * s_max are treated as noise and dropped.
    """
    T = op.entries if isinstance(op, OperatorMatrix) else np.asarray(op)
    if p == "trace":
        return complex(np.trace(T))
    sv = np.linalg.svd(T, compute_uv=False)
    if sv.size:
        sv = sv[sv > SV_FLOOR * sv[0]]
    if p == 1:
        return float(np.sum(sv))
    if p == 2:
        return float(np.sqrt(np.sum(sv * sv)))
    if p in (np.inf, float("inf"), "inf"):
        return float(sv[0]) if sv.size else 0.0
    raise ValueError("p must be 1, 2, inf, or 'trace'")


def save_operator(op, path):
    """Text serialisation: header {n, lambda, K} then one 'a b re im' row per entry.

    17 significant digits so the round-trip is bit-exact.
    """
    d = op.basis.dim_total
    with open(path, "w") as fh:
        fh.write(f"# heisenharm operator n={op.basis.n} lambda={op.basis.lam!r} K={op.basis.K}\n")
        for a in range(d):
            for b in range(d):
                v = op.entries[a, b]
                fh.write(f"{a} {b} {v.real:.17g} {v.imag:.17g}\n")


def load_operator(path):
    with open(path) as fh:
        header = fh.readline().split()
        fields = dict(tok.split("=") for tok in header if "=" in tok)
        basis = BasisSpec(int(fields["n"]), float(fields["lambda"]), int(fields["K"]))
        entries = np.zeros((basis.dim_total, basis.dim_total), dtype=complex)
        for line in fh:
            a, b, re, im = line.split()
            entries[int(a), int(b)] = float(re) + 1j * float(im)
    return OperatorMatrix(basis, entries)
