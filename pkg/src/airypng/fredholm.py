"""Nystrom discretization of the multi-time Airy operator and the
distributions built on its Fredholm determinant.

A joint event {A(t_1) <= xi_1, ..., A(t_m) <= xi_m} is the determinant
det(I - D) of the symmetrized block matrix D with entries
sqrt(w_a) A_{t_i,t_j}(x_a, x_b) sqrt(w_b), nodes living on the truncated
half-lines (xi_i, xi_i + L].  All integrals of Airy products are evaluated
on shared z-grids so a whole block is one elementwise scale plus a matmul.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericsError
from . import airy_kernel as ak
from .special import airy_ai_aip_vec, gauss_legendre, panel_rule

DEFAULT_NODES = 192
DEFAULT_CUTOFF = 16.0
THRESHOLD_MIN = -8.0


@dataclass(frozen=True)
class TimeGrid:
    """Ordered times t_1 < ... < t_m with per-time thresholds xi_i."""

    times: tuple
    thresholds: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        thresholds = tuple(float(x) for x in self.thresholds)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "thresholds", thresholds)
        if not 1 <= len(times) <= 8:
            raise DomainError("TimeGrid supports 1..8 time points")
        if len(times) != len(thresholds):
            raise DomainError("times and thresholds must have equal length")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("times must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class DiscretizedOperator:
    block_matrix: np.ndarray
    grid: tuple
    weights: tuple


# ---------------------------------------------------------------------------
# Leg construction and block assembly.
# ---------------------------------------------------------------------------

def _leg_rule(lo: float, hi: float, n: int):
    """Composite GL rule on (lo, hi]; finer panels near lo where the kernel
    carries its mass."""
    edges = [lo]
    while edges[-1] < hi - 1e-12:
        step = 1.5 if edges[-1] < lo + 6.0 else 2.5
        edges.append(min(edges[-1] + step, hi))
    per = max(4, int(math.ceil(n / (len(edges) - 1))))
    return panel_rule(np.asarray(edges), per)


class _Leg:
    """Quadrature nodes on one time line plus cached Airy values."""

    def __init__(self, t, nodes, weights, npp=48):
        self.t = float(t)
        self.nodes = nodes
        self.weights = weights
        self.npp = npp
        self._ai_pos = None
        self._ai_neg = {}

    def ai_pos(self):
        if self._ai_pos is None:
            z, _ = ak._positive_grid(self.npp)
            self._ai_pos = airy_ai_aip_vec(self.nodes[:, None] + z[None, :])[0]
        return self._ai_pos

    def ai_neg(self, gap_key: int):
        if gap_key not in self._ai_neg:
            u, _ = ak._negative_grid(gap_key, self.npp)
            self._ai_neg[gap_key] = airy_ai_aip_vec(
                self.nodes[:, None] - u[None, :])[0]
        return self._ai_neg[gap_key]


def _phi_matrix(gap: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    dx = x[:, None] - y[None, :]
    sx = x[:, None] + y[None, :]
    return np.exp(-dx * dx / (4.0 * gap) - gap * sx / 2.0 + gap ** 3 / 12.0) \
        / math.sqrt(4.0 * math.pi * gap)


def _kernel_block(leg_i: _Leg, leg_j: _Leg) -> np.ndarray:
    """Matrix A_{t_i, t_j}(x_a, y_b) over the two node sets (no weights)."""
    npp = leg_i.npp
    ti, tj = leg_i.t, leg_j.t
    if ti >= tj:
        z, w = ak._positive_grid(npp)
        scale = w * np.exp(-(ti - tj) * z)
        return (leg_i.ai_pos() * scale) @ leg_j.ai_pos().T
    gap = tj - ti
    lo = float(leg_i.nodes.min() + leg_j.nodes.min())
    kappa = gap ** 3 / 12.0 - gap * lo / 2.0
    if gap <= ak.A_TILDE_MAX_GAP and kappa <= ak._CANCEL_BUDGET:
        z, w = ak._positive_grid(npp)
        scale = w * np.exp(gap * z)
        tilde = (leg_i.ai_pos() * scale) @ leg_j.ai_pos().T
        return tilde - _phi_matrix(gap, leg_i.nodes, leg_j.nodes)
    key = ak._gap_key(gap)
    u, w = ak._negative_grid(key, npp)
    scale = w * np.exp(-gap * u)
    return -(leg_i.ai_neg(key) * scale) @ leg_j.ai_neg(key).T


def _operator_from_legs(legs) -> DiscretizedOperator:
    sizes = [len(leg.nodes) for leg in legs]
    total = sum(sizes)
    D = np.empty((total, total))
    offs = np.concatenate([[0], np.cumsum(sizes)])
    roots = [np.sqrt(leg.weights) for leg in legs]
    for i, leg_i in enumerate(legs):
        for j, leg_j in enumerate(legs):
            block = _kernel_block(leg_i, leg_j)
            D[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] = \
                roots[i][:, None] * block * roots[j][None, :]
    return DiscretizedOperator(
        block_matrix=D,
        grid=tuple(leg.nodes for leg in legs),
        weights=tuple(leg.weights for leg in legs),
    )


def build_operator(grid: TimeGrid, n: int = DEFAULT_NODES,
                   L: float = DEFAULT_CUTOFF, npp: int = 48,
                   check_spectral: bool = False) -> DiscretizedOperator:
    """Assemble the symmetrized Nystrom matrix of f^1/2 A f^1/2."""
    legs = []
    for t, xi in zip(grid.times, grid.thresholds):
        nodes, weights = _leg_rule(xi, xi + L, n)
        legs.append(_Leg(t, nodes, weights, npp))
    op = _operator_from_legs(legs)
    if check_spectral:
        rho = float(np.max(np.abs(np.linalg.eigvals(op.block_matrix))))
        if rho >= 1.0:
            raise NumericsError(f"operator spectral radius {rho} >= 1")
    return op


def _det_i_minus(D: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(np.eye(D.shape[0]) - D)
    if sign == 0.0:
        return 0.0
    return float(sign * math.exp(logdet))


def _gap_value(grid: TimeGrid, n: int, L: float, npp: int) -> float:
    return _det_i_minus(build_operator(grid, n, L, npp).block_matrix)


def gap_probability(grid: TimeGrid, n: int = DEFAULT_NODES,
                    L: float = DEFAULT_CUTOFF, refine: bool = True) -> float:
    """P[A(t_i) <= xi_i for all i] as det(I - D).

    With ``refine`` the value is accepted only if the (2n, L+4) rerun moves
    it by less than 1e-8; the refined value is returned.
    """
    if any(xi < THRESHOLD_MIN for xi in grid.thresholds):
        raise DomainError(f"thresholds below {THRESHOLD_MIN} are unsupported")
    if n < 16 or L < 8:
        raise DomainError("gap_probability needs n >= 16 and L >= 8")
    if not refine:
        return _gap_value(grid, n, L, 48)
    base = _gap_value(grid, n, L, 48)
    fine = _gap_value(grid, 2 * n, L + 4.0, 96)
    if not abs(base - fine) <= 1e-8:
        raise NumericsError(
            f"gap_probability refinement moved {abs(base - fine):.3e}",
            estimates=(base, fine))
    return fine


# ---------------------------------------------------------------------------
# Tracy-Widom GUE distribution.
# ---------------------------------------------------------------------------

@lru_cache(maxsize=100_000)
def _tw2_cached(s: float, n: int, L: float, refine: bool) -> float:
    return gap_probability(TimeGrid((0.0,), (s,)), n=n, L=L, refine=refine)


def tw2_cdf(s: float, n: int = DEFAULT_NODES, L: float = DEFAULT_CUTOFF,
            refine: bool = True) -> float:
    """F_2(s), the GUE Tracy-Widom distribution function, for s >= -8."""
    s = float(s)
    if s < THRESHOLD_MIN:
        raise DomainError("tw2_cdf supports s >= -8")
    return _tw2_cached(s, n, float(L), refine)


def tw2_pdf(s: float, delta: float = 2e-3, n: int = DEFAULT_NODES,
            L: float = DEFAULT_CUTOFF, refine: bool = True) -> float:
    """Central finite difference (F_2(s+delta) - F_2(s-delta)) / (2 delta)."""
    s = float(s)
    if s < -7.5:
        raise DomainError("tw2_pdf supports s >= -7.5")
    if not 1e-4 <= delta <= 1e-2:
        raise DomainError("tw2_pdf needs delta in [1e-4, 1e-2]")
    hi = tw2_cdf(s + delta, n=n, L=L, refine=refine)
    lo = tw2_cdf(s - delta, n=n, L=L, refine=refine)
    return (hi - lo) / (2.0 * delta)


@lru_cache(maxsize=None)
def _tw2_moments(n: int = DEFAULT_NODES, L: float = DEFAULT_CUTOFF):
    """(mean, variance) of TW2 from quadrature of the finite-difference
    density over [-7.5, 8]."""
    nodes, weights = panel_rule(np.linspace(-7.5, 8.0, 17), 8)
    dens = np.array([tw2_pdf(float(s), n=n, L=L, refine=False)
                     for s in nodes])
    mass = float(np.dot(weights, dens))
    mean = float(np.dot(weights, nodes * dens)) / mass
    second = float(np.dot(weights, nodes ** 2 * dens)) / mass
    return mean, second - mean ** 2


# ---------------------------------------------------------------------------
# Joint-CDF boxes and the conditional window probability of the local
# Brownian comparison.
# ---------------------------------------------------------------------------

def _box_probability(times, lows, highs, n, L, refine) -> float:
    """P[lows_i < A(t_i) <= highs_i for all i] by the 2^m vertex sum of the
    joint CDF."""
    m = len(times)
    total = 0.0
    for mask in range(1 << m):
        vertex = [highs[i] if mask & (1 << i) else lows[i] for i in range(m)]
        sign = (-1) ** (m - bin(mask).count("1"))
        total += sign * gap_probability(
            TimeGrid(tuple(times), tuple(vertex)), n=n, L=L, refine=refine)
    return total


def conditional_window_probability(t1: float, p1: float, offsets,
                                   epsilon: float, delta1: float = 0.02,
                                   n: int = 160, L: float = DEFAULT_CUTOFF,
                                   refine: bool = True) -> float:
    """P[A(t_i) in [p1 + a_i sqrt(eps), p1 + b_i sqrt(eps)] for all i >= 2
    given A(t_1) = p1], with the conditioning replaced by a finite
    difference of width ``delta1`` at time t_1.

    ``offsets`` lists (s_gap, a, b) per later time; t_i = t_{i-1} +
    s_gap * epsilon.
    """
    offsets = list(offsets)
    if not 1 <= len(offsets) <= 3:
        raise DomainError("conditional window supports 1..3 offsets")
    if not 0.01 <= epsilon <= 0.5:
        raise DomainError("epsilon must lie in [0.01, 0.5]")
    if not 1e-3 <= delta1 <= 1e-1:
        raise DomainError("delta1 must lie in [1e-3, 1e-1]")
    times = [float(t1)]
    lows = [p1 - delta1]
    highs = [p1]
    root = math.sqrt(epsilon)
    for s_gap, a, b in offsets:
        if not s_gap > 0:
            raise DomainError("time gaps s_i must be positive")
        if a > b:
            raise DomainError("window needs a <= b")
        times.append(times[-1] + s_gap * epsilon)
        lows.append(p1 + a * root)
        highs.append(p1 + b * root)
    numerator = _box_probability(times, lows, highs, n, L, refine)
    denominator = (tw2_cdf(p1, n=n, L=L, refine=refine)
                   - tw2_cdf(p1 - delta1, n=n, L=L, refine=refine))
    if denominator < 1e-8:
        raise NumericsError(
            f"conditioning denominator {denominator:.3e} is ill-conditioned")
    return numerator / denominator


def conditional_window_report(t1, p1, offsets, epsilon, delta1=0.02,
                              n=160, L=DEFAULT_CUTOFF):
    """Estimate plus a half-step Richardson companion, for reporting."""
    est = conditional_window_probability(t1, p1, offsets, epsilon,
                                         delta1=delta1, n=n, L=L)
    half = conditional_window_probability(t1, p1, offsets, epsilon,
                                          delta1=delta1 / 2.0, n=n, L=L)
    return {"estimate": est, "estimate_half_delta": half,
            "delta1": delta1, "epsilon": epsilon}


# ---------------------------------------------------------------------------
# Two-time covariance machinery (Hoeffding double integral).
# ---------------------------------------------------------------------------

# The integrand P[A(t)<=x, A(0)<=y] - F(x)F(y) is below 2e-10 once either
# coordinate leaves this window, so the [-8, 8]^2 contract domain can be
# clipped to it.
_COV_X_LO = -6.9
_COV_X_HI = 5.3
_COV_NPP = 32


def _covariance_integrand_row(t, u, x_nodes, n, L):
    """C(x, x-u) for an array of x values; marginals are read off the
    diagonal blocks of the same joint operator."""
    out = np.empty(len(x_nodes))
    for idx, x in enumerate(x_nodes):
        y = float(x - u)
        leg0 = _Leg(0.0, *_leg_rule(y, y + L, n), npp=_COV_NPP)
        legt = _Leg(t, *_leg_rule(float(x), float(x) + L, n), npp=_COV_NPP)
        D = _operator_from_legs([leg0, legt]).block_matrix
        k = len(leg0.nodes)
        joint = _det_i_minus(D)
        marg_y = _det_i_minus(D[:k, :k])
        marg_x = _det_i_minus(D[k:, k:])
        out[idx] = joint - marg_x * marg_y
    return out


def _covariance_once(t: float, n: int, L: float,
                     u_per_panel: int, x_per_panel: int) -> float:
    """Cov(A(t), A(0)) as the Hoeffding integral of
    P[A(t) <= x, A(0) <= y] - F(x) F(y), in coordinates rotated to follow
    the near-diagonal crossover.

    The stationary two-time law is exchangeable in its two arguments (the
    determinants agree to machine precision under threshold swap), so only
    u = x - y >= 0 is integrated and doubled.
    """
    width = max(math.sqrt(2.0 * t), 0.05)
    u_edges = [0.0]
    for mult in (0.5, 1.5, 4.0):
        e = mult * width
        if e < 6.0:
            u_edges.append(e)
    u_max = _COV_X_HI - _COV_X_LO
    u_edges.extend([7.0, u_max] if u_max > 7.0 + 1e-9 else [u_max])
    u_nodes, u_weights = panel_rule(np.array(u_edges), u_per_panel)
    total = 0.0
    for u, wu in zip(u_nodes, u_weights):
        lo = max(_COV_X_LO, _COV_X_LO + u)
        hi = min(_COV_X_HI, _COV_X_HI + u)
        if hi - lo <= 1e-9:
            continue
        x_edges = np.unique(np.clip([lo, -4.0, -1.5, 1.0, hi], lo, hi))
        x_nodes, x_weights = panel_rule(x_edges, x_per_panel)
        row = _covariance_integrand_row(t, float(u), x_nodes, n, L)
        total += wu * float(np.dot(x_weights, row))
    return 2.0 * total


def _covariance(t: float, n: int, L: float, tol: float = 5e-3) -> float:
    coarse = _covariance_once(t, n, L, u_per_panel=4, x_per_panel=4)
    fine = _covariance_once(t, n, L, u_per_panel=6, x_per_panel=6)
    if not abs(coarse - fine) <= tol:
        raise NumericsError(
            f"covariance grid refinement moved {abs(coarse - fine):.3e}",
            estimates=(coarse, fine))
    return fine


def increment_variance(t: float, n: int = 96, L: float = DEFAULT_CUTOFF) -> float:
    """Var(A(t) - A(0)) = 2 (Var TW2 - Cov(A(t), A(0))) for t in
    [0.02, 0.5]."""
    t = float(t)
    if t == 0.0:
        return 0.0
    if not 0.02 <= t <= 0.5:
        raise DomainError("increment_variance supports t in [0.02, 0.5]")
    cov = _covariance(t, n, L)
    _, var = _tw2_moments()
    return 2.0 * (var - cov)


def long_range_covariance(t: float, n: int = 96,
                          L: float = DEFAULT_CUTOFF) -> float:
    """Cov(A(t), A(0)) for t in [2, 6]."""
    t = float(t)
    if not 2.0 <= t <= 6.0:
        raise DomainError("long_range_covariance supports t in [2, 6]")
    return _covariance(t, n, L)


# ---------------------------------------------------------------------------
# Factorial-moment identity check.
# ---------------------------------------------------------------------------

def _cells(lo: float, hi: float, m: int):
    edges = np.linspace(lo, hi, m + 1)
    return list(zip(edges[:-1], edges[1:]))


def _void_dets(grid: TimeGrid, cell_sets):
    """Build one operator over every cell and return a closure computing
    det(I - D) on arbitrary index subsets.

    ``cell_sets`` is a list of lists of (time_index, lo, hi); the closure
    takes tuples of flat cell indices.
    """
    legs = []
    index_of = {}
    flat = 0
    per_cell_nodes = 6
    for cells in cell_sets:
        for (ti, lo, hi) in cells:
            rule = gauss_legendre(per_cell_nodes, lo, hi)
            legs.append(_Leg(grid.times[ti], rule.nodes, rule.weights))
            index_of[flat] = slice(flat * per_cell_nodes,
                                   (flat + 1) * per_cell_nodes)
            flat += 1
    D = _operator_from_legs(legs).block_matrix

    def void(cell_indices) -> float:
        idx = np.concatenate([np.arange(index_of[c].start, index_of[c].stop)
                              for c in cell_indices])
        return _det_i_minus(D[np.ix_(idx, idx)])

    return void


def _lhs_mesh_estimate(grid: TimeGrid, boxes, mesh: int) -> float:
    """Factorial moment from occupation probabilities of a cell mesh.

    Each box is split into ``mesh`` cells; since the process a.s. has at
    most one particle per shrinking cell,
      E[#B]            ~ sum_i P[#c_i >= 1]
      E[#B (#B - 1)]   ~ 2 sum_{i<j} P[#c_i >= 1, #c_j >= 1]
      E[#B #B']        ~ sum_{i,l} P[#c_i >= 1, #c'_l >= 1]
    and joint occupation probabilities expand by inclusion-exclusion into
    void probabilities det(I - K) over cell unions.
    """
    cell_sets = []
    for (ti, (lo, hi), _k) in boxes:
        cell_sets.append([(ti, a, b) for a, b in _cells(lo, hi, mesh)])
    void = _void_dets(grid, cell_sets)
    m = mesh

    def occupied(cells):
        """P[every listed cell holds >= 1 particle], by inclusion-exclusion."""
        total = 0.0
        p = len(cells)
        for mask in range(1 << p):
            chosen = tuple(cells[i] for i in range(p) if mask & (1 << i))
            total += (-1) ** len(chosen) * (1.0 if not chosen
                                            else void(chosen))
        return total

    groups = []
    for b, (_ti, _iv, k) in enumerate(boxes):
        groups.append((k, [b * mesh + i for i in range(mesh)]))

    if len(groups) == 1:
        k, cells = groups[0]
        if k == 1:
            return sum(occupied((c,)) for c in cells)
        total = 0.0
        for a in range(m):
            for b in range(a + 1, m):
                total += occupied((cells[a], cells[b]))
        return 2.0 * total
    if len(groups) == 2:
        (k1, cells1), (k2, cells2) = groups
        if k1 == 1 and k2 == 1:
            return sum(occupied((c1, c2)) for c1 in cells1 for c2 in cells2)
        if {k1, k2} == {1, 2}:
            two_cells, one_cells = \
                (cells1, cells2) if k1 == 2 else (cells2, cells1)
            total = 0.0
            for a in range(m):
                for b in range(a + 1, m):
                    for c in one_cells:
                        total += occupied((two_cells[a], two_cells[b], c))
            return 2.0 * total
    if len(groups) == 3:
        total = 0.0
        for c1 in groups[0][1]:
            for c2 in groups[1][1]:
                for c3 in groups[2][1]:
                    total += occupied((c1, c2, c3))
        return total
    raise DomainError("unsupported box structure")


def _rhs_correlation_integral(grid: TimeGrid, boxes,
                              nodes_per_dim: int = 24) -> float:
    """Quadrature of the k-point correlation determinant over the box
    product."""
    slots = []
    for (ti, (lo, hi), k) in boxes:
        rule = gauss_legendre(nodes_per_dim, lo, hi)
        for _ in range(k):
            slots.append((ti, rule.nodes, rule.weights))
    k = len(slots)
    legs = [_Leg(grid.times[ti], nodes, np.ones_like(nodes))
            for ti, nodes, _w in slots]
    M = [[_kernel_block(legs[i], legs[j]) for j in range(k)]
         for i in range(k)]
    w = [slots[i][2] for i in range(k)]
    if k == 1:
        return float(np.dot(w[0], np.diagonal(M[0][0])))
    if k == 2:
        d0 = np.diagonal(M[0][0])
        d1 = np.diagonal(M[1][1])
        dets = d0[:, None] * d1[None, :] - M[0][1] * M[1][0].T
        return float(w[0] @ dets @ w[1])
    if k == 3:
        d0 = np.diagonal(M[0][0])[:, None, None]
        d1 = np.diagonal(M[1][1])[None, :, None]
        d2 = np.diagonal(M[2][2])[None, None, :]
        a01 = M[0][1][:, :, None]
        a02 = M[0][2][:, None, :]
        a10 = M[1][0].T[:, :, None]
        a12 = M[1][2][None, :, :]
        a20 = M[2][0].T[:, None, :]
        a21 = M[2][1].T[None, :, :]
        dets = (d0 * d1 * d2 + a01 * a12 * a20 + a02 * a10 * a21
                - d0 * a12 * a21 - a01 * a10 * d2 - a02 * d1 * a20)
        return float(np.einsum("a,b,c,abc->", w[0], w[1], w[2], dets))
    raise DomainError("total factorial order k must be <= 3")


def moment_identity_check(grid: TimeGrid, boxes):
    """Return (lhs, rhs) of the factorial-moment identity for the listed
    boxes.

    ``boxes`` is a list of (time_index, (lo, hi), k_i) with k_i in {1, 2}
    and total order at most 3; intervals on a common time line must be
    disjoint.  lhs comes from cell meshes of void probabilities (two mesh
    sizes, Richardson extrapolated), rhs from quadrature of the
    correlation determinant.
    """
    boxes = [(int(ti), (float(lo), float(hi)), int(k))
             for ti, (lo, hi), k in boxes]
    for ti, (lo, hi), k in boxes:
        if not 0 <= ti < grid.m:
            raise DomainError("box time index out of range")
        if k not in (1, 2):
            raise DomainError("k_i must be 1 or 2")
        if hi < lo:
            raise DomainError("box interval reversed")
    for i, (ti, (lo, hi), _) in enumerate(boxes):
        for tj, (lo2, hi2), _k in boxes[i + 1:]:
            if ti == tj and not (hi <= lo2 or hi2 <= lo):
                raise DomainError("boxes on one time line must be disjoint")
    if any(hi == lo for _t, (lo, hi), _k in boxes):
        return 0.0, 0.0
    total_k = sum(k for *_x, k in boxes)
    if total_k > 3:
        raise DomainError("total factorial order k must be <= 3")
    mesh = 8 if total_k == 3 else 16
    coarse = _lhs_mesh_estimate(grid, boxes, mesh)
    fine = _lhs_mesh_estimate(grid, boxes, 2 * mesh)
    lhs = 2.0 * fine - coarse
    rhs = _rhs_correlation_integral(grid, boxes)
    return lhs, rhs
