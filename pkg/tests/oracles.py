"""Independent reference computations used only by the tests.

Nothing here touches the library's own Airy or quadrature code paths: the
Airy oracle sums the Maclaurin series in extended-precision mpmath
arithmetic, the Tracy-Widom oracle is a high-resolution Nystrom build on
the classic closed-form kernel with scipy's Airy functions, and the
last-passage oracle enumerates paths.
"""

from __future__ import annotations

import math
from itertools import combinations

import mpmath as mp
import numpy as np
import scipy.special as sp

def airy_series_oracle(x: float, derivative: int = 0) -> float:
    """Ai(x) or Ai'(x) from the power series of y'' = xy, summed with
    enough working digits to cover the oscillatory cancellation."""
    # negative x: terms reach exp(xi); positive x: the result is exp(-xi)
    # below the terms, so twice the digits are needed
    dps = 40 + int((0.62 if x > 0 else 0.35) * abs(x) ** 1.5)
    with mp.workdps(dps):
        xm = mp.mpf(x)
        x3 = xm ** 3
        fa, ga = mp.mpf(1), xm
        f, g = fa, ga
        fp, gp = mp.mpf(0), mp.mpf(1)
        for k in range(0, 4000):
            fa *= x3 / ((3 * k + 2) * (3 * k + 3))
            ga *= x3 / ((3 * k + 3) * (3 * k + 4))
            kk = k + 1
            f += fa
            g += ga
            if x != 0:
                fp += 3 * kk * fa / xm
                gp += (3 * kk + 1) * ga / xm
            if abs(fa) + abs(ga) < mp.mpf(10) ** (-dps - 5):
                break
        ai0 = mp.power(3, mp.mpf(-2) / 3) / mp.gamma(mp.mpf(2) / 3)
        aip0 = -mp.power(3, mp.mpf(-1) / 3) / mp.gamma(mp.mpf(1) / 3)
        if derivative == 0:
            return float(ai0 * f + aip0 * g)
        return float(ai0 * fp + aip0 * gp)


def airy_first_zero() -> float:
    """Root of Ai near -2.34, bisected on the series oracle."""
    lo, hi = -2.5, -2.2
    flo = airy_series_oracle(lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = airy_series_oracle(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classic_airy_kernel_matrix(nodes: np.ndarray) -> np.ndarray:
    """(Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y) with scipy Airy values."""
    ai, aip, _, _ = sp.airy(nodes)
    num = np.outer(ai, aip) - np.outer(aip, ai)
    den = nodes[:, None] - nodes[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        K = num / den
    diag = aip ** 2 - nodes * ai ** 2
    np.fill_diagonal(K, diag)
    return K


def f2_nystrom_oracle(s: float, n: int = 200, L: float = 14.0) -> float:
    """High-resolution Nystrom determinant of the classic Airy kernel on
    (s, s + L]; fully independent of the package's kernel pipeline."""
    per = max(8, int(math.ceil(n / 7)))
    nodes_list = []
    weights_list = []
    edges = np.linspace(s, s + L, 8)
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = np.polynomial.legendre.leggauss(per)
        nodes_list.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights_list.append(0.5 * (b - a) * w)
    nodes = np.concatenate(nodes_list)
    weights = np.concatenate(weights_list)
    K = classic_airy_kernel_matrix(nodes)
    r = np.sqrt(weights)
    D = r[:, None] * K * r[None, :]
    sign, logdet = np.linalg.slogdet(np.eye(len(nodes)) - D)
    return float(sign * math.exp(logdet))


# Frozen from f2_nystrom_oracle(0.0) (n=200); the known value of F2 at zero.
F2_AT_ZERO = 0.9693728283552632


def okounkov_lhs_quadrature(alpha: float, x: float, y: float) -> float:
    """int_R exp(alpha z) Ai(x+z) Ai(y+z) dz by composite Gauss panels on
    scipy Airy values; independent of the closed form and of the package
    quadratures."""
    z_hi = 60.0
    z_lo = -(46.0 / alpha + 25.0)
    edges = np.concatenate([np.linspace(z_lo, -10.0, 60),
                            np.linspace(-10.0, z_hi, 36)[1:]])
    xg, wg = np.polynomial.legendre.leggauss(32)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        z = 0.5 * (b - a) * xg + 0.5 * (a + b)
        w = 0.5 * (b - a) * wg
        ai_x = sp.airy(x + z)[0]
        ai_y = sp.airy(y + z)[0]
        total += float(np.dot(w, np.exp(alpha * z) * ai_x * ai_y))
    return total


def lpp_bruteforce(w: np.ndarray) -> int:
    """Max path sum over all up/right paths by explicit enumeration."""
    M, N = w.shape
    best = None
    for downs in combinations(range(M + N - 2), M - 1):
        i = j = 0
        s = int(w[0, 0])
        for step in range(M + N - 2):
            if step in downs:
                i += 1
            else:
                j += 1
            s += int(w[i, j])
        best = s if best is None else max(best, s)
    return best


def geometric_pmf(q: float, m) -> np.ndarray:
    m = np.asarray(m)
    return (1.0 - q) * q ** m


def gaussian_window_mass(s: float, a: float, b: float) -> float:
    half = 0.5 / math.sqrt(s)
    return 0.5 * (math.erf(b * half) - math.erf(a * half))
