"""Gutzmer orbital integrals, the twisted Segal-Bargmann isometry, reproducing
kernels, and the weight-to-kernel construction.

The spectral constants the source material leaves untracked (the Gutzmer c_n,
the isometry c_lambda, the heat-weight substitution constant) are calibrated
once on reference inputs by the callers and then frozen; nothing here hides a
constant inside a formula.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .quad import Grid, SampledFunction, gauss_legendre_rule, symplectic_form
from .specfn import (
    laguerre_fn_phi_imag_radial_seq,
    laguerre_seq,
    laguerre_zero_value,
)
from .twisted import KernelParams, TailBoundError, heat_kernel, lam_coth, lam_over_sinh
from .weyl import RangeGuardError, pi_complex

IMAG_RANGE_FACTOR = 6.0


class NonIntegrableError(ValueError):
    """Weight grows too fast against the e^{lam r^2} Laguerre growth."""


class InsufficientDecayError(ValueError):
    """Coefficient sequence decays too slowly for the kernel series."""


class CostGuardError(ValueError):
    """Requested direct quadrature exceeds the configured grid budget."""


def eigenspace_multiplicity(k, n):
    """dim of the k-th special Hermite eigenspace: binom(k+n-1, n-1)."""
    return math.comb(k + n - 1, n - 1)


@dataclass
class RadialWeight:
    """Non-negative radial weight (y,v) -> w(|(y,v)|) on R^{2n}."""

    profile: callable
    lam: float
    n: int

    def __call__(self, r):
        return self.profile(np.asarray(r, dtype=float))

    def evaluate(self, y, v):
        r = np.sqrt(np.sum(np.atleast_1d(y) ** 2) + np.sum(np.atleast_1d(v) ** 2))
        return float(self.profile(r))

    def validate(self, rmax=10.0, npts=64):
        r = np.linspace(0.0, rmax, npts)
        vals = self.profile(r)
        if np.any(np.asarray(vals) < 0):
            raise ValueError("weight must be non-negative")


@dataclass
class SpectralCoefficients:
    """Sequence over k: squared component norms or weight coefficients C_lam(k)."""

    values: np.ndarray
    kind: str  # 'norms' | 'weights'
    lam: float
    n: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if np.any(~np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("coefficients must be finite and non-negative")
        if self.kind not in ("norms", "weights"):
            raise ValueError("kind must be 'norms' or 'weights'")
        self.values = vals

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(f"# heisenharm coefficients kind={self.kind} n={self.n} lambda={self.lam!r}\n")
            for k, v in enumerate(self.values):
                fh.write(f"{k} {v:.17g}\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            header = fh.readline().split()
            fields = dict(tok.split("=") for tok in header if "=" in tok)
            data = np.loadtxt(fh)
        return cls(data[:, 1], fields["kind"], float(fields["lambda"]), int(fields["n"]))


def spectral_norms_weyl(op, kmax):
    """||g *_lam phi_k||_2^2 for k <= kmax from the Weyl matrix of g.

    ||g *_lam phi_k||^2 = (2pi)^n |lam|^{-n} ||pi(g) P_k||_HS^2, i.e. the
    column-block Frobenius norms of the operator matrix.
    """
    basis = op.basis
    if kmax > basis.K:
        raise ValueError("kmax exceeds the basis truncation")
    c = (2.0 * math.pi) ** basis.n * abs(basis.lam) ** (-basis.n)
    vals = np.empty(kmax + 1)
    for k in range(kmax + 1):
        block = op.entries[:, basis.block(k)]
        vals[k] = c * float(np.sum(np.abs(block) ** 2))
    return SpectralCoefficients(vals, "norms", basis.lam, basis.n)


def spectral_norms_conv(f, lam, kmax):
    """||f *_lam phi_k||_2^2 by direct twisted convolution (n = 1 grids)."""
    from .twisted import phi_sampled, twisted_conv_many

    n = f.grid.dim // 2
    kernels = [phi_sampled(k, lam, f.grid, n) for k in range(kmax + 1)]
    convs = twisted_conv_many(f, kernels, lam)
    return SpectralCoefficients(
        np.array([h.norm2_sq() for h in convs]), "norms", lam, n
    )


def segal_bargmann(g, a, lam, zw, warn=None):
    """(g *_lam p_a^lam)(z,w) at a complexified point, by direct quadrature.

    Uses the closed-form heat kernel and the complexified twist phase
    e^{i(lam/2)(w.y' - v'.z)}.  n = 1 grids; the imaginary parts obey the same
    desk-scale range guard as pi_complex.
    """
    if g.grid.dim != 2:
        raise ValueError("n = 1 grids only")
    zw = np.atleast_1d(np.asarray(zw, dtype=complex))
    z, w = zw[0], zw[1]
    limit = IMAG_RANGE_FACTOR / math.sqrt(abs(lam))
    if max(abs(z.imag), abs(w.imag)) > limit:
        raise RangeGuardError(f"imaginary radius beyond the desk-scale limit {limit:.3f}")
    if warn is not None and not g.decays_at_boundary():
        warn.append({"kind": "boundary-decay", "boundary_max": g.boundary_max()})
    X, U = g.grid.meshgrid()
    wt = g.grid.weight_array()
    kappa = lam_coth(lam, a)
    c = (4.0 * math.pi) ** -1 * lam_over_sinh(lam, a)
    kern = c * np.exp(-0.25 * kappa * ((z - X) ** 2 + (w - U) ** 2))
    phase = np.exp(0.5j * lam * (w * X - U * z))
    return complex(np.sum(wt * g.values * kern * phase))


def segal_bargmann_slice(g, a, lam, grid_out, y, v):
    """g *_lam p_a^lam on the full (x,u) output grid at fixed imaginary parts.

    One GEMM per slice: the kernel factorises into (z,y') x (w,v') pairings.
    """
    kappa = lam_coth(lam, a)
    c = (4.0 * math.pi) ** -1 * lam_over_sinh(lam, a)
    yin = g.grid.axis()
    wt1 = g.grid.axis_weights()
    xout = grid_out.axis()
    z = xout + 1j * y
    w = xout + 1j * v
    k1 = np.exp(-0.25 * kappa * (z[:, None] - yin[None, :]) ** 2)        # (x, y')
    p2 = np.exp(-0.5j * lam * np.outer(z, yin))                          # (x, v')
    k2 = np.exp(-0.25 * kappa * (w[:, None] - yin[None, :]) ** 2)        # (u, v')
    p1 = np.exp(0.5j * lam * np.outer(w, yin))                           # (u, y')
    a_mat = (k1[:, :, None] * p2[:, None, :]).reshape(len(xout), -1)
    b_mat = (p1[:, :, None] * k2[:, None, :]).reshape(len(xout), -1)
    gw = (g.values * np.outer(wt1, wt1)).reshape(-1)
    return c * ((a_mat * gw) @ b_mat.T)


def gutzmer_lhs(G, lam, yv, grid, samples, warn=None, sigma_tol=1e-6):
    """U(n)-averaged weighted square integral of the holomorphic extension.

    int_{U(n)} int |G((x,u) + i sigma(y,v))|^2 e^{lam(u.y - v.x)} dx du dsigma,
    with the unrotated (y,v) in the exponent exactly as the identity is
    stated; any sigma-dependence of the inner integral beyond sigma_tol is
    reported as a note, not a failure.
    """
    if grid.dim != 2:
        raise ValueError("n = 1 grids only")
    y0, v0 = float(yv[0]), float(yv[1])
    X, U = grid.meshgrid()
    wt = grid.weight_array()
    expwt = np.exp(lam * (U * y0 - v0 * X))
    inner = []
    for s in samples:
        yr, vr = s.apply(np.array([y0, v0]))
        vals = np.abs(G(X + 1j * yr, U + 1j * vr)) ** 2 * expwt
        if warn is not None:
            peak = float(np.max(vals))
            edge = max(
                float(np.max(vals[0])), float(np.max(vals[-1])),
                float(np.max(vals[:, 0])), float(np.max(vals[:, -1])),
            )
            if peak > 0 and edge > 1e-8 * peak:
                warn.append({"kind": "tube-divergence", "edge": edge, "peak": peak})
        inner.append(float(np.sum(wt * vals)))
    inner = np.array(inner)
    mean = float(np.mean(inner))
    note = None
    if mean > 0:
        dev = float(np.max(np.abs(inner - mean))) / mean
        if dev > sigma_tol:
            note = f"inner integral varies with sigma by {dev:.3e} (relative)"
    return mean, note


def gutzmer_rhs(coeffs, lam, yv, c_n=1.0):
    """c_n sum_k [k!(n-1)!/(k+n-1)!] phi_{k,lam}(2iy,2iv) ||g *_lam phi_k||_2^2."""
    if coeffs.kind != "norms":
        raise ValueError("need squared component norms")
    n = coeffs.n
    rsq = float(np.sum(np.asarray(yv, dtype=float) ** 2))
    kmax = len(coeffs.values) - 1
    phis = laguerre_fn_phi_imag_radial_seq(kmax, n, lam, rsq)
    mult = np.array([eigenspace_multiplicity(k, n) for k in range(kmax + 1)])
    terms = coeffs.values * phis / mult
    total = float(np.sum(terms))
    if total > 0 and abs(terms[-1]) > 1e-12 * total:
        raise TailBoundError(
            f"last Gutzmer term {terms[-1]:.3e} is not below 1e-12 of the sum {total:.3e}"
        )
    return c_n * total


def orbital_hs_identity(fhat, zw, samples):
    """Both sides of the U(n)-averaged Hilbert-Schmidt orbit identity.

    LHS: mean over sigma of ||pi_lam(sigma(z,w))^* fhat||_HS^2 (the adjoint is
    the variant the identity actually holds for; dropping it flips the sign of
    the symplectic exponential on the other side).
    RHS (raw, constant-free): e^{-lam(u.y - v.x)} sum_k [k!(n-1)!/(k+n-1)!]
    phi_k(2iy,2iv) ||f^lam *_lam phi_k||^2, with the component norms read off
    the column blocks of fhat.  Returns (lhs, rhs_raw, stderr).
    """
    basis = fhat.basis
    n = basis.n
    zw = np.atleast_1d(np.asarray(zw, dtype=complex))
    if zw.shape[0] != 2 * n:
        raise ValueError("zw must have 2n coordinates")
    vals = []
    for s in samples:
        pt = s.apply(zw)
        m = pi_complex(pt[:n], pt[n:], basis)
        vals.append(float(np.sum(np.abs(m.entries.conj().T @ fhat.entries) ** 2)))
    vals = np.array(vals)
    lhs = float(np.mean(vals))
    stderr = float(np.std(vals) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    xu = np.concatenate([zw[:n].real, zw[n:].real])
    yv = np.concatenate([zw[:n].imag, zw[n:].imag])
    coeffs = spectral_norms_weyl(fhat, basis.K)
    rsq = float(np.sum(yv ** 2))
    phis = laguerre_fn_phi_imag_radial_seq(basis.K, n, basis.lam, rsq)
    mult = np.array([eigenspace_multiplicity(k, n) for k in range(basis.K + 1)])
    series = float(np.sum(coeffs.values * phis / mult))
    rhs_raw = math.exp(-basis.lam * symplectic_form(xu, yv)) * series
    return lhs, rhs_raw, stderr


def heat_weight(a, lam, n):
    """The KTX weight w_lam(y,v) = p_{2a}^lam(2y, 2v) as a RadialWeight."""
    params = KernelParams(2.0 * a, lam, n)
    kappa = lam_coth(lam, 2.0 * a)
    c = (4.0 * math.pi) ** (-n) * lam_over_sinh(lam, 2.0 * a) ** n

    def profile(r):
        return c * np.exp(-kappa * np.asarray(r, dtype=float) ** 2)

    return RadialWeight(profile, lam, n)


def weight_to_coefficients(weight, kmax, nodes=600, rcap=80.0, tail_log=-37.0):
    """C_lam(k) = [k!(n-1)!/(k+n-1)!] int w(y,v) phi_k(2iy,2iv) dy dv, polar form.

    The radial extent is certified by a log-space scan of the k = kmax
    integrand; a weight whose product with the e^{lam r^2} growth does not
    fall below e^{tail_log} of its peak before rcap raises NonIntegrableError.
    """
    lam, n = weight.lam, weight.n
    if lam <= 0:
        raise ValueError("weights are complexified against phi_k: lam > 0 required")
    scan = np.linspace(0.0, rcap, 4001)[1:]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        wvals = np.asarray(weight.profile(scan), dtype=float)
        logw = np.where(wvals > 0, np.log(np.where(wvals > 0, wvals, 1.0)), -np.inf)
        lk = laguerre_seq(kmax, n - 1, -2.0 * lam * scan ** 2)[kmax]
        logi = logw + np.log(np.abs(lk)) + lam * scan ** 2 + (2 * n - 1) * np.log(scan)
    peak_pos = int(np.argmax(logi))
    peak = logi[peak_pos]
    if not np.isfinite(peak):
        raise NonIntegrableError("weight integrand overflows before the tail sets in")
    below = np.nonzero(logi[peak_pos:] < peak + tail_log)[0]
    if below.size == 0:
        raise NonIntegrableError(
            f"integrand at k={kmax} has not decayed to e^{tail_log:.0f} of its peak by r={rcap}"
        )
    rmax = float(scan[peak_pos + below[0]])
    r, wq = gauss_legendre_rule(0.0, rmax, nodes)
    surface = 2.0 * math.pi ** n / math.gamma(n)
    phis = laguerre_fn_phi_imag_radial_seq(kmax, n, lam, r ** 2)
    wr = np.asarray(weight.profile(r), dtype=float)
    integrals = phis @ (wq * wr * r ** (2 * n - 1))
    mult = np.array([eigenspace_multiplicity(k, n) for k in range(kmax + 1)])
    return SpectralCoefficients(surface * integrals / mult, "weights", lam, n)


def kernel_from_weight(coeffs, lam, zw, tail_tol=1e-10):
    """q_lam(z,w) = sum_k C_lam(k)^{-1/2} phi_{k,lam}(z,w), tail-certified.

    The tail is certified against the pointwise growth bound
    |phi_k(z,w)|^2 <= mult_k e^{lam [(x,u),(y,v)]} phi_k(2iy,2iv).
    """
    if coeffs.kind != "weights":
        raise ValueError("need weight coefficients C_lam(k)")
    n = coeffs.n
    zw = np.atleast_1d(np.asarray(zw, dtype=complex))
    kmax = len(coeffs.values) - 1
    s = np.sum(zw * zw)
    arg = 0.5 * lam * s
    phis = laguerre_seq(kmax, n - 1, arg) * np.exp(-0.5 * arg)
    inv_sqrt = coeffs.values ** -0.5
    total = complex(np.sum(inv_sqrt * phis))
    xu = np.concatenate([zw[:n].real, zw[n:].real])
    yv = np.concatenate([zw[:n].imag, zw[n:].imag])
    rsq = float(np.sum(yv ** 2))
    phi_imag = laguerre_fn_phi_imag_radial_seq(kmax, n, lam, rsq)
    growth = math.exp(0.5 * lam * abs(symplectic_form(xu, yv)))
    bounds = inv_sqrt * np.sqrt(
        np.array([eigenspace_multiplicity(k, n) for k in range(kmax + 1)]) * np.abs(phi_imag)
    ) * growth
    if bounds[-1] > max(1e-300, bounds[-2]):
        raise InsufficientDecayError("C_lam(k)^{-1/2} does not decay against the phi_k growth")
    ratio = bounds[-1] / bounds[-2] if bounds[-2] > 0 else 0.0
    tail = bounds[-1] * ratio / (1.0 - ratio) if ratio < 1 else math.inf
    if tail > tail_tol * max(abs(total), 1e-300):
        raise InsufficientDecayError(
            f"certified tail {tail:.3e} exceeds {tail_tol:.0e} of the partial sum"
        )
    return total


def superposition_radial_weight(s, lam, n, tmin=1e-7, nodes=1200):
    """w_lam(y,v) = int_0^inf t^n e^{-t^s/s} p_t^lam(2y,2v) dt as a RadialWeight.

    Quadrature on a log-stretched grid; s > 1.
    """
    if s <= 1:
        raise ValueError("superposition exponent must satisfy s > 1")
    tmax = (60.0 * s) ** (1.0 / s) + 8.0
    eta, weta = gauss_legendre_rule(math.log(tmin), math.log(tmax), nodes)
    t = np.exp(eta)
    rho = np.array([lam_over_sinh(lam, ti) for ti in t])
    kap = np.array([lam_coth(lam, ti) for ti in t])
    base = t ** n * np.exp(-t ** s / s) * (4.0 * math.pi) ** (-n) * rho ** n * t

    def profile(r):
        # p_t(2y,2v) carries exp(-(1/4) lam coth(t lam) * 4 r^2) = exp(-kappa r^2)
        r = np.asarray(r, dtype=float)
        vals = base[:, None] * np.exp(-kap[:, None] * np.atleast_1d(r)[None, :] ** 2)
        out = weta @ vals
        return out if r.ndim else float(out[0])

    return RadialWeight(profile, lam, n)


def superposition_lower_bound(k, s, lam, n):
    """The claimed floor ((2k+n)lam)^{(n+1)(s'-s)} e^{((2k+n)lam)^{s'}/(2s')}."""
    sp = s / (s - 1.0)
    a = (2 * k + n) * lam
    return a ** ((n + 1) * (sp - s)) * math.exp(a ** sp / (2.0 * sp))


def saddle_time(s):
    """t0 in (0,1) with psi(t0) = 1/(2s'), psi(t) = t^s/s + 1/s' - t, by bisection."""
    sp = s / (s - 1.0)
    target = 0.5 / sp
    psi = lambda t: t ** s / s + 1.0 / sp - t
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if psi(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def saddle_integral_check(A, s, nodes=2000):
    """(lhs, rhs): int_0^inf t^n e^{-A^{s'} psi(t)} dt vs c e^{-A^{s'}/(2s')}, n = 1."""
    sp = s / (s - 1.0)
    n = 1
    t0 = saddle_time(s)
    c = (1.0 - t0 ** (n + 1)) / (n + 1)
    tmax = 1.0 + (60.0 / A ** sp + 2.0) ** (1.0 / s) * 4.0
    t, w = gauss_legendre_rule(0.0, tmax, nodes)
    psi = t ** s / s + 1.0 / sp - t
    lhs = float(np.sum(w * t ** n * np.exp(-A ** sp * psi)))
    rhs = c * math.exp(-A ** sp / (2.0 * sp))
    return lhs, rhs


def reproducing_kernel_heat(a, lam, n, zw1, zw2):
    """K((z,w),(z',w')) for the heat case: twisted phase times p_{2a} at the
    conjugate-shifted offset (the semigroup identity collapses q *_lam q)."""
    zw1 = np.atleast_1d(np.asarray(zw1, dtype=complex))
    zw2 = np.atleast_1d(np.asarray(zw2, dtype=complex))
    z1, w1 = zw1[:n], zw1[n:]
    z2, w2 = zw2[:n], zw2[n:]
    phase = np.exp(-0.5j * lam * (np.sum(w1 * z2.conj()) - np.sum(z1 * w2.conj())))
    offset = np.concatenate([z1 - z2.conj(), w1 - w2.conj()])
    return complex(phase * heat_kernel(KernelParams(2.0 * a, lam, n), offset))


def reproducing_kernel_conv(q_sampled, q_eval, lam, zw1, zw2):
    """Same kernel with q *_lam q evaluated by quadrature at the complex offset.

    q_sampled holds q on a real 2-d grid (n = 1); q_eval evaluates the entire
    extension of q at complex (Z, W).
    """
    zw1 = np.atleast_1d(np.asarray(zw1, dtype=complex))
    zw2 = np.atleast_1d(np.asarray(zw2, dtype=complex))
    z1, w1 = zw1[0], zw1[1]
    z2, w2 = zw2[0], zw2[1]
    Z, W = z1 - z2.conj(), w1 - w2.conj()
    X, U = q_sampled.grid.meshgrid()
    wt = q_sampled.grid.weight_array()
    conv = np.sum(
        wt * q_eval(Z - X, W - U) * q_sampled.values * np.exp(0.5j * lam * (W * X - U * Z))
    )
    phase = np.exp(-0.5j * lam * (w1 * z2.conj() - z1 * w2.conj()))
    return complex(phase * conv)


def bergman_isometry(g, a, lam, mode, *, basis=None, kmax=None, c_gutzmer=1.0,
                     grid_xu=None, grid_yv=None, max_points=6_000_000):
    """(lhs, rhs) of the twisted Bergman isometry for the heat transform.

    rhs is always the plain squared L^2 norm of g; the lhs/rhs ratio is the
    isometry constant, to be calibrated once and then held fixed.

    * series mode: Gutzmer-reduced k-sum pairing the numerically computed
      heat-weight coefficients with the component norms of g (needs `basis`).
    * direct-4d mode: direct quadrature of the C^{2n} integral (n = 1), slice
      GEMMs over the imaginary-part grid (needs `grid_xu`, `grid_yv`).
    """
    if mode == "series":
        from .weyl import weyl_transform

        if basis is None:
            raise ValueError("series mode needs a BasisSpec")
        kmax = kmax if kmax is not None else basis.K
        op = weyl_transform(g, basis)
        norms = spectral_norms_weyl(op, kmax)
        cw = weight_to_coefficients(heat_weight(a, lam, basis.n), kmax)
        n = basis.n
        k = np.arange(kmax + 1)
        decay = np.exp(-2.0 * a * (2 * k + n) * abs(lam))
        lhs = c_gutzmer * float(np.sum(cw.values * decay * norms.values))
        return lhs, g.norm2_sq()
    if mode == "direct-4d":
        if grid_xu is None or grid_yv is None:
            raise ValueError("direct-4d mode needs grid_xu and grid_yv")
        npts = (grid_xu.npoints * grid_yv.npoints) ** 2
        if npts > max_points:
            raise CostGuardError(f"{npts} quadrature points exceed the budget {max_points}")
        wfun = heat_weight(a, lam, 1)
        ax_out = grid_xu.axis()
        wt_out = np.outer(grid_xu.axis_weights(), grid_xu.axis_weights())
        X, U = np.meshgrid(ax_out, ax_out, indexing="ij")
        ax_im = grid_yv.axis()
        wt_im = grid_yv.axis_weights()
        rmax = grid_yv.extent
        total = 0.0
        for iy, y in enumerate(ax_im):
            for iv, v in enumerate(ax_im):
                # imaginary-part plane truncated to the inscribed ball: the
                # weight is radial and the square's corners would demand a far
                # larger real-part box than the budget allows
                if math.hypot(y, v) > rmax:
                    continue
                F = segal_bargmann_slice(g, a, lam, grid_xu, y, v)
                inner = np.sum(wt_out * np.abs(F) ** 2 * np.exp(lam * (U * y - v * X)))
                total += wt_im[iy] * wt_im[iv] * wfun.evaluate([y], [v]) * float(inner)
        return total, g.norm2_sq()
    raise ValueError("mode must be 'series' or 'direct-4d'")
