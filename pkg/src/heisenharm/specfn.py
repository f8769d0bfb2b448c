"""Hermite and Laguerre functions for real and complex arguments.

All complexified formulas use the bilinear square z^2 = sum z_j^2 (never
|z|^2), evaluated by forward recurrences in complex arithmetic.
"""

import math

import numpy as np
from scipy.special import gammaln


def laguerre(k, alpha, t):
    """Generalized Laguerre polynomial L_k^alpha(t) via the three-term recurrence.

    Accepts scalar or array t, real or complex.  Exact for polynomial degree.
    """
    return laguerre_seq(k, alpha, t)[k]


def laguerre_seq(kmax, alpha, t):
    """All L_k^alpha(t) for k = 0..kmax, stacked along axis 0."""
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    if alpha <= -1:
        raise ValueError("Laguerre type alpha must be > -1")
    t = np.asarray(t)
    dtype = np.result_type(t.dtype, np.float64)
    out = np.empty((kmax + 1,) + t.shape, dtype=dtype)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 1.0 + alpha - t
    for k in range(1, kmax):
        # (k+1) L_{k+1} = (2k+1+alpha-t) L_k - (k+alpha) L_{k-1}
        out[k + 1] = ((2 * k + 1 + alpha - t) * out[k] - (k + alpha) * out[k - 1]) / (k + 1)
    return out


def hermite_normalized_seq(kmax, t):
    """Orthonormal-Hermite polynomial part h~_m(t) = H_m(t)/sqrt(2^m m! sqrt(pi)).

    No Gaussian factor; multiply by exp(-t^2/2) to get the Hermite functions.
    Stable forward recurrence, fine for the desk-scale degrees (< 500) used here.
    """
    t = np.asarray(t)
    dtype = np.result_type(t.dtype, np.float64)
    out = np.empty((kmax + 1,) + t.shape, dtype=dtype)
    out[0] = math.pi ** -0.25
    if kmax >= 1:
        out[1] = math.sqrt(2.0) * math.pi ** -0.25 * t
    for m in range(1, kmax):
        out[m + 1] = t * math.sqrt(2.0 / (m + 1)) * out[m] - math.sqrt(m / (m + 1.0)) * out[m - 1]
    return out


def hermite_fn_seq(kmax, t):
    """Orthonormal Hermite functions h_m(t) = h~_m(t) exp(-t^2/2), m = 0..kmax."""
    t = np.asarray(t)
    return hermite_normalized_seq(kmax, t) * np.exp(-0.5 * t * t)


def hermite_fn(alpha, z, lam):
    """Scaled Hermite function Phi_alpha^lambda(z) on C^n.

    Phi_alpha^lambda(z) = |lam|^{n/4} Phi_alpha(|lam|^{1/2} z) with
    Phi_alpha(z) = c_alpha H_alpha(z) exp(-z^2/2); the normalising constants
    come from the closed form (2^{alpha_j} alpha_j! sqrt(pi))^{-1/2} per
    coordinate, never from quadrature.
    """
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    z = np.atleast_1d(np.asarray(z))
    n = len(alpha)
    if z.shape[0] != n:
        raise ValueError("point dimension does not match the multi-index length")
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    mu = math.sqrt(abs(lam))
    val = abs(lam) ** (n / 4.0)
    for j, aj in enumerate(alpha):
        tj = mu * z[j]
        val = val * hermite_normalized_seq(aj, tj)[aj] * np.exp(-0.5 * tj * tj)
    return complex(val) if np.iscomplexobj(np.asarray(val)) else float(val)


def laguerre_fn_phi(k, n, lam, zw):
    """Laguerre function phi_{k,lam}^{n-1}(z,w) on C^{2n}.

    Real points use |lam| as in the real-variable definition; complexified
    points use lam directly (bilinear squares), which requires lam > 0 --
    the lam < 0 complexification is not fixed by the formulas implemented here.
    """
    zw = np.atleast_1d(np.asarray(zw))
    if zw.shape[0] != 2 * n:
        raise ValueError("zw must have 2n coordinates")
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    is_real = not np.iscomplexobj(zw) or np.all(zw.imag == 0)
    if is_real:
        s = float(np.sum(np.real(zw) ** 2))
        lam_eff = abs(lam)
    else:
        if lam < 0:
            raise ValueError("complexified phi_{k,lam} requires lam > 0")
        s = complex(np.sum(zw * zw))
        lam_eff = lam
    arg = 0.5 * lam_eff * s
    val = laguerre(k, n - 1, arg) * np.exp(-0.5 * arg)
    return float(np.real(val)) if is_real else complex(val)


def laguerre_fn_phi_imag_radial(k, n, lam, rsq):
    """phi_{k,lam}^{n-1}(2iy,2iv) as a function of rsq = |y|^2 + |v|^2.

    With bilinear squares (2iy)^2+(2iv)^2 = -4 rsq, so the value is
    L_k^{n-1}(-2 lam rsq) exp(lam rsq): real, positive, increasing in rsq.
    Vectorised over rsq.
    """
    if lam <= 0:
        raise ValueError("complexified phi_{k,lam} requires lam > 0")
    rsq = np.asarray(rsq, dtype=float)
    return laguerre(k, n - 1, -2.0 * lam * rsq) * np.exp(lam * rsq)


def laguerre_fn_phi_imag_radial_seq(kmax, n, lam, rsq):
    """All phi_{k,lam}^{n-1}(2iy,2iv) for k = 0..kmax; shape (kmax+1,) + rsq.shape."""
    if lam <= 0:
        raise ValueError("complexified phi_{k,lam} requires lam > 0")
    rsq = np.asarray(rsq, dtype=float)
    return laguerre_seq(kmax, n - 1, -2.0 * lam * rsq) * np.exp(lam * rsq)


PERRON_KMIN = 5


def perron_asymptotic(k, alpha, s):
    """Leading term of Perron's asymptotic for L_k^alpha(s), s off [0, inf).

    (1/2) pi^{-1/2} e^{s/2} (-s)^{-alpha/2-1/4} k^{alpha/2-1/4} e^{2 sqrt(-s k)}.
    Refuses k < 5: the O(k^{-1/2}) correction dominates below that.
    """
    if k < PERRON_KMIN:
        raise ValueError(f"asymptotic regime starts at k = {PERRON_KMIN}; got k = {k}")
    s = complex(s)
    if s.imag == 0 and s.real >= 0:
        raise ValueError("s must avoid the branch cut [0, inf)")
    ms = -s
    return (
        0.5
        * math.pi ** -0.5
        * np.exp(0.5 * s)
        * ms ** (-0.5 * alpha - 0.25)
        * k ** (0.5 * alpha - 0.25)
        * np.exp(2.0 * np.sqrt(ms * k))
    )


def laguerre_zero_value(k, alpha):
    """L_k^alpha(0) = Gamma(k+alpha+1) / (Gamma(k+1) Gamma(alpha+1))."""
    return math.exp(gammaln(k + alpha + 1) - gammaln(k + 1) - gammaln(alpha + 1))


def hermite_projection_kernel(k, z, w):
    """Hermite projection kernel Phi_k(z,w) on C^n x C^n.

    Phi_k(z,w) = pi^{-n/2} sum_{j<=k} (-1)^j L_j^{n/2-1}((z+w)^2/2)
                 L_{k-j}^{n/2-1}((z-w)^2/2) exp(-(z^2+w^2)/2).

    z and w may carry trailing array axes (broadcast together) for batch
    evaluation; axis 0 is the coordinate axis of length n.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    n = z.shape[0]
    if w.shape[0] != n:
        raise ValueError("z and w must have the same dimension")
    plus = 0.5 * np.sum((z + w) ** 2, axis=0)
    minus = 0.5 * np.sum((z - w) ** 2, axis=0)
    la = laguerre_seq(k, n / 2.0 - 1.0, plus)
    lb = laguerre_seq(k, n / 2.0 - 1.0, minus)
    signs = (-1.0) ** np.arange(k + 1)
    acc = np.tensordot(signs, la * lb[::-1], axes=(0, 0))
    val = math.pi ** (-n / 2.0) * acc * np.exp(-0.5 * np.sum(z * z + w * w, axis=0))
    return complex(val) if val.ndim == 0 else val
