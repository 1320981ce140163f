"""The finite-N determinantal kernel of the multilayer growth model, by
double contour integration.

With q = alpha^2 the kernel is

  Ktilde_N(2u,x; 2v,y) = (2 pi i)^{-2} oint_{|z|=r2} dz/z oint_{|w|=r1}
        dw/w  (w^y / z^x) (z / (z - w)) G(z, w),
  G(z, w) = (1-alpha)^{2(v-u)} (1-alpha/z)^{N+u} (1-alpha w)^{N-v}
            / ((1-alpha z)^{N-u} (1-alpha/w)^{N+v}),

K_N = Ktilde_N - phi_{2u,2v}, with phi the theta-integral transition
kernel.  The placement of (x, y) is pinned empirically: the N=1 law is
exactly geometric and N<=3 gap probabilities match direct simulation.

Numerics: expanding z/(z-w) = sum_k (w/z)^k on r1 < r2 factorizes the
double trapezoid sum exactly into products of single-circle trapezoid
sums, i.e. FFTs of the two factors -- same values, O(n log n) instead of
O(n^2), and every (x, y) pair shares the two FFTs.  Radii are placed at
the stationary points of the integrand exponent (near |z| = 1 in the
scaling window), which keeps the circle maxima within a few e-folds of
the extracted coefficients; fixed radii far from the stationary point
lose tens of digits to cancellation at large N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericsError
from .png_sim import d_scaling, growth_speed

_N_MAX_FFT = 1 << 17


@dataclass(frozen=True)
class PngKernelParams:
    alpha: float
    N: int
    r1: float
    r2: float
    contour_points: int = 512

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if self.N < 1:
            raise DomainError("N must be >= 1")
        if not self.alpha < self.r1 < self.r2 < 1.0 / self.alpha:
            raise DomainError("radii must satisfy alpha < r1 < r2 < 1/alpha")
        if self.contour_points < 64 or self.contour_points % 2:
            raise DomainError("contour_points must be even and >= 64")


@dataclass(frozen=True)
class LatticePoint:
    u: int
    x: int


def default_params(alpha: float, N: int,
                   contour_points: int = 512) -> PngKernelParams:
    """Radii 1 * (1 +- 0.8 N^{-1/3}), clamped into (alpha, 1/alpha)."""
    delta = 0.8 * N ** (-1.0 / 3.0)
    lo, hi = alpha, 1.0 / alpha
    r2 = min(1.0 + delta, hi - 0.08 * (hi - lo))
    r1 = max(1.0 / (1.0 + delta), lo + 0.08 * (hi - lo))
    if not r1 < r2:
        r1 = lo + 0.45 * (hi - lo)
        r2 = lo + 0.55 * (hi - lo)
    return PngKernelParams(alpha=alpha, N=N, r1=r1, r2=r2,
                           contour_points=contour_points)


def _check_lattice(params: PngKernelParams, p: LatticePoint):
    if abs(p.u) >= params.N:
        raise DomainError("time index |u| must be < N")
    if p.x < 0:
        raise DomainError("height coordinates must be >= 0")


def _coefficient_scans(params, u, v, j_hi, m_hi, n):
    """Trapezoid Laurent coefficients I_F(0..j_hi) and I_H(0..m_hi)."""
    alpha = params.alpha
    N = params.N
    theta = 2.0 * math.pi * np.arange(n) / n
    z = params.r2 * np.exp(1j * theta)
    log_f = (N + u) * np.log(1.0 - alpha / z) \
        - (N - u) * np.log(1.0 - alpha * z)
    w = params.r1 * np.exp(1j * theta)
    log_h = (N - v) * np.log(1.0 - alpha * w) \
        - (N + v) * np.log(1.0 - alpha / w)
    js = np.arange(j_hi + 1)
    ms = np.arange(m_hi + 1)
    if (float(np.max(log_f.real)) > 690.0
            or float(np.max(log_h.real)) > 690.0
            or j_hi * abs(math.log(params.r2)) > 690.0
            or m_hi * abs(math.log(params.r1)) > 690.0):
        raise NumericsError("contour radii give an unrepresentable dynamic "
                            "range; move them toward the stationary point")
    s_f = np.fft.fft(np.exp(log_f)) / n
    s_h = np.fft.ifft(np.exp(log_h))
    i_f = s_f[js % n] * params.r2 ** (-js.astype(float))
    i_h = s_h[ms % n] * params.r1 ** (ms.astype(float))
    return i_f, i_h


def _ktilde_matrix_once(params, u, v, xs, ys, n):
    ratio = params.r1 / params.r2
    k_terms = min(int(math.ceil(48.0 / -math.log(ratio))), 200_000)
    j_hi = int(xs.max()) + k_terms
    m_hi = int(ys.max()) + k_terms
    i_f, i_h = _coefficient_scans(params, u, v, j_hi, m_hi, n)
    win_f = np.lib.stride_tricks.sliding_window_view(i_f, k_terms + 1)
    win_h = np.lib.stride_tricks.sliding_window_view(i_h, k_terms + 1)
    mat = win_f[xs] @ win_h[ys].T
    prefactor = (1.0 - params.alpha) ** (2 * (v - u))
    return prefactor * mat


def ktilde_matrix(params: PngKernelParams, u: int, v: int,
                  xs, ys, tol: float = 1e-9) -> np.ndarray:
    """Ktilde_N(2u, x; 2v, y) over coordinate arrays, trapezoid-converged.

    The point count doubles from params.contour_points until two
    consecutive evaluations agree to ``tol``; the imaginary residual must
    stay below 1e-10.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=int))
    ys = np.atleast_1d(np.asarray(ys, dtype=int))
    if xs.min() < 0 or ys.min() < 0:
        raise DomainError("height coordinates must be >= 0")
    n = params.contour_points
    prev = _ktilde_matrix_once(params, u, v, xs, ys, n)
    while n <= _N_MAX_FFT:
        n *= 2
        cur = _ktilde_matrix_once(params, u, v, xs, ys, n)
        if float(np.max(np.abs(cur - prev))) <= tol:
            imag = float(np.max(np.abs(cur.imag)))
            if imag > 1e-10:
                raise NumericsError(
                    f"contour integral imaginary residual {imag:.3e}")
            return cur.real
        prev = cur
    raise NumericsError("contour point-doubling did not converge",
                        estimates=(prev,))


def k_tilde(params: PngKernelParams, p: LatticePoint,
            q_pt: LatticePoint) -> float:
    _check_lattice(params, p)
    _check_lattice(params, q_pt)
    mat = ktilde_matrix(params, p.u, q_pt.u,
                        np.array([p.x]), np.array([q_pt.x]))
    return float(mat[0, 0])


def _phi_values_once(params, u, v, deltas, n):
    alpha = params.alpha
    theta = 2.0 * math.pi * np.arange(n) / n
    log_sym = (v - u) * (2.0 * math.log(1.0 - alpha)
                         - np.log(1.0 + alpha * alpha
                                  - 2.0 * alpha * np.cos(theta)))
    co = np.fft.ifft(np.exp(log_sym))
    return co[np.asarray(deltas) % n].real


def phi_values(params: PngKernelParams, u: int, v: int, deltas,
               tol: float = 1e-12) -> np.ndarray:
    """phi_{2u,2v} as a function of y - x (zero unless u < v)."""
    deltas = np.atleast_1d(np.asarray(deltas, dtype=int))
    if u >= v:
        return np.zeros(deltas.shape)
    n = max(params.contour_points, 256)
    prev = _phi_values_once(params, u, v, deltas, n)
    while n <= _N_MAX_FFT:
        n *= 2
        cur = _phi_values_once(params, u, v, deltas, n)
        if float(np.max(np.abs(cur - prev))) <= tol:
            return cur
        prev = cur
    raise NumericsError("phi point-doubling did not converge")


def phi_discrete(params: PngKernelParams, u: int, v: int,
                 x: int, y: int) -> float:
    """Transition kernel phi_{2u,2v}(x, y); depends on y - x only."""
    return float(phi_values(params, u, v, np.array([y - x]))[0])


def k_n(params: PngKernelParams, p: LatticePoint, q_pt: LatticePoint) -> float:
    """K_N = Ktilde_N - phi_{2u,2v}."""
    val = k_tilde(params, p, q_pt)
    if p.u < q_pt.u:
        val -= phi_discrete(params, p.u, q_pt.u, p.x, q_pt.x)
    return val


def kn_block_matrix(params: PngKernelParams, lines) -> np.ndarray:
    """K_N over a multi-time point set; ``lines`` is a list of (u, xs)."""
    sizes = [len(xs) for _u, xs in lines]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    total = offs[-1]
    out = np.empty((total, total))
    for i, (ui, xi) in enumerate(lines):
        for j, (uj, xj) in enumerate(lines):
            block = ktilde_matrix(params, ui, uj, np.asarray(xi),
                                  np.asarray(xj))
            if ui < uj:
                deltas = np.asarray(xj)[None, :] - np.asarray(xi)[:, None]
                block = block - phi_values(params, ui, uj, deltas)
            out[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] = block
    return out


def joint_gap_probability(params: PngKernelParams, events) -> float:
    """P[top line <= threshold at each (u, threshold)]; window fixed at 320.

    Test-scale helper for multi-time laws; single-time work should go
    through discrete_gap_probability.
    """
    lines = [(u, np.arange(thr + 1, thr + 1 + 320)) for u, thr in events]
    K = kn_block_matrix(params, lines)
    sign, logdet = np.linalg.slogdet(np.eye(K.shape[0]) - K)
    return float(sign * math.exp(logdet))


def discrete_gap_probability(params: PngKernelParams, u: int,
                             threshold: int, window: int | None = None) -> float:
    """P[top line at time 2u has no particle above ``threshold``] as the
    determinant of I - K_N on {threshold+1, ..., threshold+W}, W doubled
    until the value settles to 1e-8."""
    if threshold < -1:
        raise DomainError("threshold must be >= -1")
    if window is not None and window > 600:
        raise DomainError("window must be <= 600")
    W = window or 8 * int(math.ceil(d_scaling(params.alpha ** 2)
                                    * params.N ** (1.0 / 3.0)))
    prev = None
    while W <= 1280:
        xs = np.arange(threshold + 1, threshold + 1 + W)
        K = ktilde_matrix(params, u, u, xs, xs)
        sign, logdet = np.linalg.slogdet(np.eye(W) - K)
        val = float(sign * math.exp(logdet))
        if prev is not None and abs(val - prev) < 1e-8:
            return val
        prev = val
        W *= 2
    raise NumericsError("gap window doubling did not converge",
                        estimates=(prev,))


@dataclass(frozen=True)
class AiryLimitRow:
    N: int
    scaled_kernel: float
    airy_reference: float
    abs_error: float


def airy_limit_report(q: float, N_list, tau: float = 0.0,
                               tau_prime: float = 0.0, x_prime: float = 0.0,
                               y_prime: float = 0.0,
                               contour_points: int = 512):
    """Tabulate |d N^(1/3) Ktilde_N - conjugated extended Airy kernel|
    against N at fixed scaled coordinates.

    Lattice indices are rounded to integers and the scaled coordinates
    recomputed from the rounded values, so the reference is evaluated at
    the points actually used.
    """
    from . import airy_kernel as ak

    alpha = math.sqrt(q)
    d = d_scaling(q)
    mu = growth_speed(q)
    rows = []
    for N in N_list:
        if not 1 <= N <= 512:
            raise DomainError("airy_limit_report N range is [1, 512]")
        conv = (1.0 + alpha) / (1.0 - alpha) / d
        u = round(conv * N ** (2.0 / 3.0) * tau)
        v = round(conv * N ** (2.0 / 3.0) * tau_prime)
        tau_r = u / (conv * N ** (2.0 / 3.0))
        tau_p_r = v / (conv * N ** (2.0 / 3.0))
        x = round(mu * N + (x_prime - tau_r ** 2) * d * N ** (1.0 / 3.0))
        y = round(mu * N + (y_prime - tau_p_r ** 2) * d * N ** (1.0 / 3.0))
        xp = (x - mu * N) / (d * N ** (1.0 / 3.0)) + tau_r ** 2
        yp = (y - mu * N) / (d * N ** (1.0 / 3.0)) + tau_p_r ** 2
        params = default_params(alpha, N, contour_points)
        scaled = d * N ** (1.0 / 3.0) * k_tilde(
            params, LatticePoint(u, x), LatticePoint(v, y))
        if tau_r >= tau_p_r:
            tilde_ref = ak.extended_airy_kernel(tau_r, tau_p_r, xp, yp)
        else:
            tilde_ref = ak.a_tilde(tau_r, tau_p_r, xp, yp)
        conj = math.exp((tau_r ** 3 - tau_p_r ** 3) / 3.0
                        + yp * tau_p_r - xp * tau_r)
        ref = conj * tilde_ref
        rows.append(AiryLimitRow(N=int(N), scaled_kernel=scaled,
                               airy_reference=ref,
                               abs_error=abs(scaled - ref)))
    return rows
