"""Uncertainty-principle functionals: Beurling profiles, Hedenmalm strip
functions, Hardy/Cowling-Price window checks, and the Hermite variants.

Nonexistence theorems are demonstrated in contrapositive form: every nonzero
test input yields a diverging profile or a strip-boundary blow-up, never an
asserted "f = 0".
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .quad import Grid, SampledFunction, gauss_legendre_rule
from .specfn import (
    hermite_fn_seq,
    hermite_projection_kernel,
    laguerre_fn_phi_imag_radial_seq,
    laguerre_seq,
)
from .twisted import TailBoundError, lam_coth, lam_over_sinh
from .weyl import RangeGuardError, pi_complex, schatten, weyl_transform

CONVERGED_TOL = 1e-10
DECAY_FACTOR = 0.9


class ParsevalError(ValueError):
    """Supplied transform pair fails the Plancherel consistency check."""


@dataclass
class FunctionalProfile:
    """Partial values of a non-negative functional over increasing cutoffs."""

    radii: np.ndarray
    partials: np.ndarray
    verdict: str = field(init=False)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.partials = np.asarray(self.partials, dtype=float)
        if np.any(np.diff(self.partials) < -1e-12 * (1.0 + np.abs(self.partials[:-1]))):
            raise ValueError("partial values of a non-negative integrand must be non-decreasing")
        self.verdict = self._classify()

    def increments(self):
        return np.diff(self.partials, prepend=0.0)

    def _classify(self):
        inc = self.increments()
        final = self.partials[-1]
        if inc[-1] < CONVERGED_TOL * (1.0 + abs(final)):
            return "converged"
        pos = inc[inc > 0]
        if len(inc) >= 4:
            ratios = inc[1:] / np.where(inc[:-1] > 0, inc[:-1], np.inf)
            if np.all(ratios[-3:] > DECAY_FACTOR):
                return "diverging"
        elif pos.size and np.all(inc[1:] > DECAY_FACTOR * inc[:-1]):
            return "diverging"
        return "undetermined"

    def to_csv(self, path):
        inc = self.increments()
        with open(path, "w") as fh:
            fh.write("R,partial,increment,verdict\n")
            for r, p, i in zip(self.radii, self.partials, inc):
                fh.write(f"{r:.17g},{p:.17g},{i:.17g},{self.verdict}\n")


@dataclass
class StripEval:
    """One strip-function evaluation: value plus a convergence flag."""

    zeta: complex
    value: complex
    converged: bool
    note: str = ""


def fourier_transform_1d(f):
    """Unitary Fourier transform of a 1-d SampledFunction on its own grid."""
    if f.grid.dim != 1:
        raise ValueError("need a 1-d grid")
    y = f.grid.axis()
    wt = f.grid.axis_weights()
    phase = np.exp(-1j * np.outer(y, y))
    vals = (2.0 * math.pi) ** -0.5 * (phase.T @ (wt * f.values))
    return SampledFunction(f.grid, vals)


def beurling_euclidean(f, fhat, radii):
    """Partial Beurling integrals in both the e^{|y.xi|} and the w_1 form.

    Returns {'w0': profile of int int |f||fhat| e^{|y xi|}, 'w1': profile of
    int |f(y)| sup_{|u|<=|y|} int |fhat(xi)| e^{-u xi} dxi dy}.  The pair must
    satisfy Plancherel to 1e-6 relative.
    """
    if f.grid != fhat.grid or f.grid.dim != 1:
        raise ValueError("f and fhat must share one 1-d grid")
    nf, nh = f.norm2_sq(), fhat.norm2_sq()
    if abs(nf - nh) > 1e-6 * max(nf, 1e-300):
        raise ParsevalError(f"||f||^2 = {nf:.6e} vs ||fhat||^2 = {nh:.6e}")
    y = f.grid.axis()
    wt = f.grid.axis_weights()
    af = np.abs(f.values)
    ah = np.abs(fhat.values)
    radii = np.asarray(radii, dtype=float)
    w0 = np.empty(radii.shape)
    kernel = np.exp(np.abs(np.outer(y, y)))
    for m, r in enumerate(radii):
        mask = (np.abs(y) <= r).astype(float)
        w0[m] = float((wt * mask * af) @ kernel @ (wt * mask * ah))
    # w_1 weight: sup over a 9-point net in [-|y|, |y|]
    w1y = np.empty(y.shape)
    for i, yi in enumerate(y):
        us = np.linspace(-abs(yi), abs(yi), 9)
        w1y[i] = np.max(np.exp(-np.outer(us, y)) @ (wt * ah))
    w1 = np.array([float(np.sum(wt[np.abs(y) <= r] * (af * w1y)[np.abs(y) <= r])) for r in radii])
    return {
        "w0": FunctionalProfile(radii, w0),
        "w1": FunctionalProfile(radii, w1),
    }


def hedenmalm_F(f, zeta, extent=8.0, npoints=257, n=1):
    """F(zeta) = (2pi)^{n/2} int conj(f(y)) f(zeta y) dy on the strip |Im zeta| <= 1.

    `f` is an entire-function evaluator acting on arrays.  Divergence at the
    requested zeta (expected near +-i for non-Beurling inputs) is reported in
    the flag, not raised.
    """
    zeta = complex(zeta)
    if abs(zeta.imag) > 1.0 + 1e-12:
        raise ValueError("zeta must lie in the closed strip |Im zeta| <= 1")
    grid = Grid(1, extent, npoints)
    y = grid.axis()
    wt = grid.axis_weights()
    integrand = np.conj(f(y)) * f(zeta * y)
    total = (2.0 * math.pi) ** (n / 2.0) * complex(np.sum(wt * integrand))
    mags = np.abs(integrand)
    peak = float(np.max(mags))
    edge = float(max(mags[0], mags[-1]))
    converged = peak == 0.0 or edge <= 1e-10 * peak
    note = "" if converged else f"integrand at the cutoff is {edge:.3e} vs peak {peak:.3e}"
    return StripEval(zeta, total, converged, note)


def hedenmalm_G(f, zeta, extent=8.0, npoints=257, n=1):
    """Companion G(zeta) = (1+zeta^2)^{n/2} F(zeta)."""
    ev = hedenmalm_F(f, zeta, extent, npoints, n)
    g = (1.0 + complex(zeta) ** 2) ** (n / 2.0) * ev.value
    return StripEval(ev.zeta, g, ev.converged, ev.note)


def F_lambda(fl, lam, zeta, grid):
    """F_lam(zeta) = int conj(f^lam(y,v)) f^lam(zeta y, zeta v) dy dv (n = 1).

    `fl` evaluates the entire extension of f^lam on coordinate arrays (Z, W).
    """
    zeta = complex(zeta)
    if abs(zeta.imag) > 1.0 + 1e-12:
        raise ValueError("zeta must lie in the closed strip |Im zeta| <= 1")
    if grid.dim != 2:
        raise ValueError("need a 2-d grid")
    Y, V = grid.meshgrid()
    wt = grid.weight_array()
    integrand = np.conj(fl(Y.astype(complex), V.astype(complex))) * fl(zeta * Y, zeta * V)
    total = complex(np.sum(wt * integrand))
    mags = np.abs(integrand)
    peak = float(np.max(mags))
    edge = float(
        max(mags[0].max(), mags[-1].max(), mags[:, 0].max(), mags[:, -1].max())
    )
    converged = peak == 0.0 or edge <= 1e-10 * peak
    note = "" if converged else f"integrand at the cutoff is {edge:.3e} vs peak {peak:.3e}"
    return StripEval(zeta, total, converged, note)


def trace_norm_net(fhat, radii, directions=8):
    """Radial sup-net for w_lam(fhat, .): cumulative max over nested radii of
    ||pi_lam(i(y',v')) fhat||_1 on a direction fan (n = 1)."""
    basis = fhat.basis
    thetas = np.pi * np.arange(directions) / directions  # antipodal pairs coincide
    best = []
    running = 0.0
    for r in radii:
        for th in thetas:
            yv = r * np.array([math.cos(th), math.sin(th)])
            m = pi_complex([1j * yv[0]], [1j * yv[1]], basis)
            running = max(running, schatten(m.compose(fhat), 1))
        best.append(running)
    return np.array(best)


def heisenberg_beurling(fhat, fl, radii, directions=8, consistency_tol=1e-4, warn=None):
    """Partial integrals of |f^lam| against the trace-norm ball weight.

    The sup over the ball in w_lam(fhat, (y,v)) is discretised as a
    directions x radii polar net; fhat and fl must be consistent under the
    Weyl transform.  Radii beyond the pi_complex range guard truncate the
    profile with a note.
    """
    basis = fhat.basis
    op = weyl_transform(fl, basis)
    dev = math.sqrt(float(np.sum(np.abs(op.entries - fhat.entries) ** 2)))
    scale = math.sqrt(float(np.sum(np.abs(fhat.entries) ** 2)))
    if scale > 0 and dev > consistency_tol * scale:
        raise ValueError(f"fhat and fl disagree: HS deviation {dev:.3e} vs scale {scale:.3e}")
    radii = np.asarray(radii, dtype=float)
    limit = 6.0 / math.sqrt(abs(basis.lam))
    notes = []
    if radii[-1] > limit:
        keep = radii <= limit
        notes.append(
            f"profile truncated at r = {radii[keep][-1]:.3f}: imaginary range guard at {limit:.3f}"
        )
        radii = radii[keep]
    if scale == 0.0:
        net = np.zeros(radii.shape)
    else:
        net = trace_norm_net(fhat, radii, directions)
    Y, V = fl.grid.meshgrid()
    wt = fl.grid.weight_array()
    r_pt = np.sqrt(Y ** 2 + V ** 2)
    absf = np.abs(fl.values)
    bins = np.searchsorted(radii, r_pt)  # weight bin: smallest net radius >= r
    partials = []
    acc = 0.0
    for m, r in enumerate(radii):
        shell = (bins == m) & (r_pt <= radii[-1])
        acc += float(np.sum(wt[shell] * absf[shell])) * net[m]
        partials.append(acc)
    prof = FunctionalProfile(radii, np.array(partials))
    prof.notes.extend(notes)
    return prof, net


def majorant_consistency(fl_eval, fhat, points, zetas):
    """Margins of |f^lam(zeta y, zeta v)| <= c_lam w_lam(fhat,(y,v)) at samples.

    Returns (margins, worst) where margins <= 0 means the bound holds;
    c_lam = (2pi)^{-n} |lam|^n.
    """
    basis = fhat.basis
    c_lam = (2.0 * math.pi) ** (-basis.n) * abs(basis.lam) ** basis.n
    margins = []
    for (y, v), zeta in zip(points, zetas):
        r = math.hypot(y, v)
        net = trace_norm_net(fhat, [r], directions=8)[0]
        lhs = abs(fl_eval(zeta * y, zeta * v))
        margins.append(lhs - c_lam * net)
    margins = np.array(margins)
    return margins, float(np.max(margins))


def hardy_window(a, b, bprime, table_points=9, tol=1e-10):
    """Largest delta <= 1 with lam coth(2 b' lam) below the 1/(2a) threshold
    on (0, delta), by bisection; also the lam -> 0 limit 1/(2b') and a table.

    Rejects a >= b (the equality case is excluded) and requires a < b' < b.
    """
    if a >= b:
        raise ValueError("the window requires a < b (a = b is excluded)")
    if not (a < bprime < b):
        raise ValueError("need a < b' < b")
    threshold = 1.0 / (2.0 * a)
    g = lambda lam: lam_coth(lam, 2.0 * bprime) - threshold
    if g(1.0) < 0:
        delta = 1.0
    else:
        lo, hi = 0.0, 1.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
        delta = lo
    lams = np.linspace(1e-8, max(delta, 0.1), table_points)
    table = [(float(l), float(lam_coth(l, 2.0 * bprime))) for l in lams]
    return delta, {"limit": 1.0 / (2.0 * bprime), "threshold": threshold, "table": table}


def hardy_beurling_integral(a, bprime, lam, n, nodes=400):
    """int e^{-(1/4a)(|y|^2+|v|^2)} sqrt(p_{2b'}^lam(2iy,2iv)) dy dv, with verdict.

    Finite iff lam coth(2b' lam) < 1/(2a); divergence is a verdict, not an error.
    """
    kappa = lam_coth(lam, 2.0 * bprime)
    sigma = 1.0 / (4.0 * a) - 0.5 * kappa
    pref = ((4.0 * math.pi) ** (-n) * lam_over_sinh(lam, 2.0 * bprime) ** n) ** 0.5
    if sigma <= 0:
        return math.inf, "diverging"
    rmax = math.sqrt(60.0 / sigma)
    r, w = gauss_legendre_rule(0.0, rmax, nodes)
    surface = 2.0 * math.pi ** n / math.gamma(n)
    value = surface * pref * float(np.sum(w * r ** (2 * n - 1) * np.exp(-sigma * r * r)))
    return value, "finite"


def cowling_price_bound(a, lam_max, n, r_points=12, lam_points=4001):
    """Fitted constant C in int (p_a^lam)^2 dlam <= C e^{-r^2/(2a)} J(a, n).

    J is the lam-integral of (lam/sinh(a lam))^{2n}; the fit is a max of
    ratios over a radial grid.  Returns (C, J, ratio list).
    """
    lams, wl = gauss_legendre_rule(0.0, lam_max, lam_points)
    base = np.array([lam_over_sinh(l, a) for l in lams])
    J = 2.0 * float(np.sum(wl * base ** (2 * n)))
    ratios = []
    for r in np.linspace(0.0, 3.0, r_points):
        lk = np.array([lam_coth(l, a) for l in lams])
        lhs = 2.0 * float(
            np.sum(wl * (4.0 * math.pi) ** (-2 * n) * base ** (2 * n) * np.exp(-0.5 * lk * r * r))
        )
        rhs = math.exp(-r * r / (2.0 * a)) * J
        ratios.append(lhs / rhs)
    return float(np.max(ratios)), J, ratios


def hermite_projection(f, k, z):
    """P_k f(z) = int f(y) Phi_k(z, y) dy for a sampled f on R (n = 1)."""
    if f.grid.dim != 1:
        raise ValueError("need a 1-d grid")
    y = f.grid.axis()
    wt = f.grid.axis_weights()
    kern = hermite_projection_kernel(k, np.asarray([z], dtype=complex), y[None, :].astype(complex))
    return complex(np.sum(wt * f.values * kern))


def hermite_coefficients(f, kmax):
    """(f, h_k) for the orthonormal Hermite functions, k <= kmax (n = 1)."""
    y = f.grid.axis()
    wt = f.grid.axis_weights()
    basis_vals = hermite_fn_seq(kmax, y)
    return basis_vals @ (wt * f.values)


def beurling_hermite(f, kmax, radii, coeffs=None, coeff_floor=1e-13):
    """Partial sums of sum_k int |f(y)| ||P_k f||_2 sqrt(phi_k^{n-1}(2iy)) dy.

    `coeffs` overrides the computed ||P_k f||_2 (synthetic decay profiles);
    coefficients below coeff_floor * max are dropped as numerical noise, since
    the sqrt(phi_k(2iy)) growth would otherwise amplify them into garbage.
    """
    if f.grid.dim != 1:
        raise ValueError("need a 1-d grid")
    y = f.grid.axis()
    wt = f.grid.axis_weights()
    if coeffs is None:
        coeffs = np.abs(hermite_coefficients(f, kmax))
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size:
        coeffs = np.where(coeffs >= coeff_floor * np.max(coeffs), coeffs, 0.0)
    phis = laguerre_fn_phi_imag_radial_seq(kmax, 1, 1.0, y ** 2)
    weight = coeffs @ np.sqrt(np.maximum(phis, 0.0))
    live = np.nonzero(coeffs)[0]
    if live.size and live[-1] == kmax and coeffs[live[-1]] * math.sqrt(
        float(np.max(phis[kmax]))
    ) > 1e-12 * max(float(np.max(weight)), 1e-300):
        raise TailBoundError("kmax too small for the coefficient decay at this extent")
    af = np.abs(f.values)
    radii = np.asarray(radii, dtype=float)
    partials = np.array(
        [float(np.sum((wt * af * weight)[np.abs(y) <= r])) for r in radii]
    )
    return FunctionalProfile(radii, partials)


def hermite_heat_majorant(bprime, y, kmax, n=1):
    """Relative error between sum_k e^{-b'(2k+n)} phi_k^{n-1}(2iy) and the
    closed form (2pi)^n p_{b'}^{lam=1}(2iy, 0) = (2 sinh b')^{-n} e^{coth(b')|y|^2}."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    rsq = float(np.sum(y ** 2))
    phis = laguerre_fn_phi_imag_radial_seq(kmax, n, 1.0, rsq)
    k = np.arange(kmax + 1)
    terms = np.exp(-bprime * (2 * k + n)) * phis
    total = float(np.sum(terms))
    if abs(terms[-1]) > 1e-12 * abs(total):
        raise TailBoundError("kmax tail above 1e-12 of the sum")
    closed = (2.0 * math.sinh(bprime)) ** (-n) * math.exp(lam_coth(1.0, bprime) * rsq / 1.0)
    return abs(total - closed) / abs(closed)
