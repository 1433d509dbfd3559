"""Three-qubit floors on GHZ-diagonal states.

A GHZ-diagonal state is stored by eight reals: the diagonal pairs
``a, b, c, d`` (on ``|000>,|111>``, ``|001>,|110>``, ``|010>,|101>`` and
``|011>,|100>``) and the anti-diagonal couplings ``h, g, f, e`` joining the
two members of each pair.  Normalisation is ``2(a + b + c + d) = 1``.

The measured data are ``<xxx>``, ``<1zz>`` and ``<zz1>``.  They fix
``e + f + g + h`` and three of the four diagonal combinations; the fourth,
``<z1z>``, is unobserved, so compatible states form a family with one free
diagonal parameter ``t = a`` plus the split of the couplings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import ConvergenceError, InfeasibleError
from .floors import EXACT, FloorResult

__all__ = [
    "GhzDiagonal",
    "TriData",
    "GhzFamily",
    "ghz_family_from_data",
    "tri_ppt_delta",
    "random_robustness",
    "min_delta",
    "min_random_robustness",
    "e3_inner",
    "min_e3",
]

_EPS = 1e-12
# index pairs (i, 7 - i) for the diagonal entries a, b, c, d
_PAIRS = ((0, 7), (1, 6), (2, 5), (3, 4))


@dataclass(frozen=True)
class GhzDiagonal:
    a: float
    b: float
    c: float
    d: float
    e: float = 0.0
    f: float = 0.0
    g: float = 0.0
    h: float = 0.0

    @property
    def diagonal(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def couplings(self) -> tuple[float, float, float, float]:
        """Couplings aligned with :attr:`diagonal`: ``(h, g, f, e)``."""
        return (self.h, self.g, self.f, self.e)

    def validate(self, tol: float = _EPS) -> "GhzDiagonal":
        if abs(2 * sum(self.diagonal) - 1) > tol:
            raise ValueError("GHZ-diagonal state must satisfy 2(a+b+c+d) = 1")
        for p, q in zip(self.diagonal, self.couplings):
            if abs(q) > p + tol:
                raise ValueError("GHZ-diagonal state is not positive semidefinite")
        return self

    def canonical(self) -> "GhzDiagonal":
        """Same state up to local unitaries, with non-negative couplings."""
        return GhzDiagonal(self.a, self.b, self.c, self.d,
                           abs(self.e), abs(self.f), abs(self.g), abs(self.h))

    def to_matrix(self) -> np.ndarray:
        rho = np.zeros((8, 8), dtype=complex)
        for (i, j), p, q in zip(_PAIRS, self.diagonal, self.couplings):
            rho[i, i] = rho[j, j] = p
            rho[i, j] = rho[j, i] = q
        return rho

    @classmethod
    def from_matrix(cls, rho) -> "GhzDiagonal":
        """Read the eight parameters off a (GHZ-symmetrised) 8x8 matrix."""
        rho = np.asarray(rho)
        diag = [0.5 * (rho[i, i] + rho[j, j]).real for i, j in _PAIRS]
        off = [0.5 * (rho[i, j] + rho[j, i]).real for i, j in _PAIRS]
        a, b, c, d = diag
        h, g, f, e = off
        return cls(a, b, c, d, e, f, g, h)

    @classmethod
    def maximally_mixed(cls) -> "GhzDiagonal":
        return cls(0.125, 0.125, 0.125, 0.125)

    @classmethod
    def ghz(cls) -> "GhzDiagonal":
        return cls(0.5, 0.0, 0.0, 0.0, h=0.5)


@dataclass(frozen=True)
class TriData:
    """Measured ``<xxx>``, ``<1zz>`` and ``<zz1>``."""

    cxxx: float
    c1zz: float
    czz1: float

    def __post_init__(self):
        for name in ("cxxx", "c1zz", "czz1"):
            v = getattr(self, name)
            if not -1 - _EPS <= v <= 1 + _EPS or math.isnan(v):
                raise InfeasibleError(f"{name} = {v} outside [-1, 1]")

    @classmethod
    def of(cls, data) -> "TriData":
        return data if isinstance(data, TriData) else cls(*data)


@dataclass(frozen=True)
class GhzFamily:
    """All GHZ-diagonal states compatible with one :class:`TriData`.

    The diagonal is affine in ``t`` on ``[t_lo, t_hi]``; the couplings are
    any split of ``cxxx/2`` with ``|coupling| <= paired diagonal entry``.
    """

    data: TriData
    t_lo: float
    t_hi: float

    @property
    def coupling_sum(self) -> float:
        return self.data.cxxx / 2

    def diagonal(self, t: float) -> np.ndarray:
        c1, c2 = self.data.c1zz, self.data.czz1
        return np.array([t, (1 + c2) / 4 - t, t - (c1 + c2) / 4, (1 + c1) / 4 - t])

    def member(self, t: float | None = None, split=None) -> GhzDiagonal:
        """Family member at ``t`` (default mid-range).

        ``split`` gives the couplings aligned with the diagonal ``(h, g, f,
        e)``; by default they are proportional to the diagonal.
        """
        if t is None:
            t = 0.5 * (self.t_lo + self.t_hi)
        diag = np.maximum(self.diagonal(t), 0.0)
        if split is None:
            split = 2 * self.coupling_sum * diag
        h, g, f, e = (float(x) for x in split)
        a, b, c, d = (float(x) for x in diag)
        return GhzDiagonal(a, b, c, d, e, f, g, h)


def ghz_family_from_data(data) -> GhzFamily:
    """Solve the linear data equations for the compatible family.

    ``<1zz> = 2(a-b-c+d)``, ``<zz1> = 2(a+b-c-d)``, ``1 = 2(a+b+c+d)`` and
    ``<xxx> = 2(e+f+g+h)``.  Raises :class:`InfeasibleError` if no member
    has a non-negative diagonal.
    """
    data = TriData.of(data)
    c1, c2 = data.c1zz, data.czz1
    t_lo = max(0.0, (c1 + c2) / 4)
    t_hi = min((1 + c2) / 4, (1 + c1) / 4)
    if t_lo > t_hi + _EPS:
        raise InfeasibleError(f"no GHZ-diagonal state reproduces {data}")
    return GhzFamily(data, t_lo, max(t_lo, t_hi))


def tri_ppt_delta(s: GhzDiagonal) -> float:
    """``max |coupling| - min diagonal``; the state is Tri-PPT iff this is <= 0."""
    return max(abs(x) for x in s.couplings) - min(s.diagonal)


def random_robustness(s: GhzDiagonal) -> float:
    """Least weight ``p`` of ``I/8`` making ``p I/8 + (1-p) s`` Tri-PPT."""
    delta = tri_ppt_delta(s)
    if delta <= 0:
        return 0.0
    return delta / (0.125 + delta)


def _delta_min_formula(data: TriData) -> float:
    return max(0.0, (abs(data.cxxx) - 1) / 2 + (abs(data.czz1) + abs(data.c1zz)) / 4)


def min_delta(data) -> tuple[float, GhzDiagonal]:
    """Smallest ``tri_ppt_delta`` over the family, solved as a linear program.

    Variables ``(t, x_1..x_4, L, m)``: minimise ``L - m`` subject to
    ``0 <= x_i <= diag_i(t)``, ``x_i <= L``, ``m <= diag_i(t)`` and
    ``sum x_i = |cxxx|/2``.
    """
    data = TriData.of(data)
    fam = ghz_family_from_data(data)
    c1, c2 = data.c1zz, data.czz1
    # diag_i(t) = k_i + s_i t
    k = np.array([0.0, (1 + c2) / 4, -(c1 + c2) / 4, (1 + c1) / 4])
    s = np.array([1.0, -1.0, 1.0, -1.0])
    cost = np.array([0, 0, 0, 0, 0, 1, -1], dtype=float)
    a_ub, b_ub = [], []
    for i in range(4):
        row = np.zeros(7)
        row[1 + i], row[0] = 1.0, -s[i]  # x_i <= diag_i
        a_ub.append(row)
        b_ub.append(k[i])
        row = np.zeros(7)
        row[1 + i], row[5] = 1.0, -1.0  # x_i <= L
        a_ub.append(row)
        b_ub.append(0.0)
        row = np.zeros(7)
        row[6], row[0] = 1.0, -s[i]  # m <= diag_i
        a_ub.append(row)
        b_ub.append(k[i])
    a_eq = [np.array([0, 1, 1, 1, 1, 0, 0], dtype=float)]
    b_eq = [abs(data.cxxx) / 2]
    bounds = [(fam.t_lo, fam.t_hi)] + [(0, None)] * 4 + [(None, None)] * 2
    res = linprog(cost, A_ub=np.array(a_ub), b_ub=b_ub, A_eq=np.array(a_eq), b_eq=b_eq,
                  bounds=bounds, method="highs")
    if not res.success:
        raise InfeasibleError(f"linear program failed for {data}: {res.message}")
    # the LP fixes t; the split is rebuilt exactly since the solver's
    # feasibility tolerance can swallow a tiny |cxxx|
    t = min(max(float(res.x[0]), fam.t_lo), fam.t_hi)
    sign = -1.0 if data.cxxx < 0 else 1.0
    split = _water_fill(np.maximum(fam.diagonal(t), 0.0), abs(data.cxxx) / 2)
    member = fam.member(t, sign * split)
    return tri_ppt_delta(member), member


def _water_fill(caps, total) -> np.ndarray:
    """``min(level, caps)`` summing to ``total``, with the lowest possible level."""
    order = np.sort(caps)
    n = len(order)
    used = 0.0
    for i, cap in enumerate(order):
        level = (total - used) / (n - i)
        if level <= cap:
            return np.minimum(caps, level)
        used += cap
    return np.array(caps, dtype=float)


def min_random_robustness(data) -> FloorResult:
    """Least random robustness over states compatible with ``data``.

    The smallest ``Delta`` is solved exactly by :func:`min_delta`.  The
    closed form ``max((|cxxx|-1)/2 + (|c1zz|+|czz1|)/4, 0)`` is a lower
    bound on it that is tight at ``|cxxx| = 1``; when the two agree to 1e-9
    the closed form is used so the value carries no solver round-off.
    """
    data = TriData.of(data)
    closed = _delta_min_formula(data)
    lp_delta, member = min_delta(data)
    delta = closed if abs(max(lp_delta, 0.0) - closed) <= 1e-9 else max(lp_delta, 0.0)
    value = delta / (0.125 + delta)
    return FloorResult(
        value,
        EXACT,
        witness=member.to_matrix(),
        details={
            "delta_min": delta,
            "delta_closed_form": closed,
            "delta_lp": lp_delta,
            "member": member.__dict__,
        },
    )


# --- relative entropy to the Tri-PPT set ----------------------------------


def _pair_divergence(p_plus, p_minus, q_plus, q_minus) -> float:
    total = 0.0
    for p, q in ((p_plus, q_plus), (p_minus, q_minus)):
        if p <= 0.0:
            continue
        if q <= 0.0:
            return math.inf
        total += p * math.log2(p / q)
    return total


def _inner_from_diag(sig_diag, sig_coup, rho_diag) -> float:
    m = min(rho_diag)
    total = 0.0
    for ps, qs, pr in zip(sig_diag, sig_coup, rho_diag):
        ratio = qs / ps if ps > 0 else 0.0
        qr = min(m, ratio * pr)
        total += _pair_divergence(ps + qs, ps - qs, pr + qr, pr - qr)
        if total == math.inf:
            return math.inf
    return total


def e3_inner(sigma: GhzDiagonal, a_rho: float, b_rho: float, c_rho: float) -> float:
    """``S(sigma || rho)`` in bits for the best Tri-PPT ``rho`` with given diagonal.

    The fourth diagonal entry is ``d = 1/2 - (a + b + c)``; each coupling of
    ``rho`` copies the coupling-to-diagonal ratio of ``sigma`` unless capped
    by the smallest diagonal entry.  Returns ``inf`` when the support of
    ``sigma`` is not covered.
    """
    d_rho = 0.5 - (a_rho + b_rho + c_rho)
    if min(a_rho, b_rho, c_rho) < -_EPS or d_rho < -_EPS:
        raise ValueError("rho diagonal must be non-negative with a + b + c <= 1/2")
    s = sigma.canonical()
    rho_diag = [max(0.0, x) for x in (a_rho, b_rho, c_rho, d_rho)]
    return _inner_from_diag(s.diagonal, s.couplings, rho_diag)


class _E3Program:
    """Lifted form of the E3 minimisation, solved by a log-barrier method.

    Variables are ``x = (t, y[4], r[4], c[4])``: the free diagonal
    parameter and coupling split of sigma (in the ``|cxxx|`` orientation),
    and the diagonal and couplings of rho.  With ``p = diag(t)`` the
    objective ``sum_k D(p_k + y_k, p_k - y_k || r_k + c_k, r_k - c_k)`` is
    jointly convex, and minimising over ``c`` alone reproduces the
    ratio-or-cap rule of :func:`e3_inner`.  Constraints are
    ``|y_k| <= p_k``, ``|c_k| <= r_j`` for all ``j, k``, ``sum y = |cxxx|/2``
    and ``sum r = 1/2``.

    Coordinates forced by the data (a pinned ``t``, a vanishing ``p_k``,
    or ``y = p`` when ``|cxxx| = 1``) are eliminated, so the remaining
    variables ``w`` have a strictly feasible interior.
    """

    _FLAT = 1e-12

    def __init__(self, family: GhzFamily):
        self.family = family
        data = family.data
        c1, c2 = data.c1zz, data.czz1
        self.k = np.array([0.0, (1 + c2) / 4, -(c1 + c2) / 4, (1 + c1) / 4])
        self.s = np.array([1.0, -1.0, 1.0, -1.0])
        self.ytot = abs(data.cxxx) / 2
        self.t_free = family.t_hi - family.t_lo > self._FLAT
        eye = np.eye(13)
        # x = x0 + G w, with column j of G a unit vector on x[free[j]] plus
        # the dependent coordinates it drags along
        x0 = np.zeros(13)
        cols, self.free = [], []
        if self.t_free:
            cols.append(eye[0].copy())
            self.free.append(0)
        else:
            x0[0] = family.t_lo
        p_fixed = np.maximum(self.k + self.s * family.t_lo, 0.0)
        self.y_live = []
        if abs(data.cxxx) >= 1 - self._FLAT:
            # y = p(t)
            if self.t_free:
                x0[1:5] = self.k
                cols[0][1:5] = self.s
            else:
                x0[1:5] = p_fixed
        else:
            self.y_live = [i for i in range(4) if self.t_free or p_fixed[i] > self._FLAT]
            last = self.y_live[-1]
            x0[1 + last] = self.ytot
            for i in self.y_live[:-1]:
                g = eye[1 + i].copy()
                g[1 + last] = -1.0
                cols.append(g)
                self.free.append(1 + i)
        x0[8] = 0.5
        for j in range(3):
            g = eye[5 + j].copy()
            g[8] = -1.0
            cols.append(g)
            self.free.append(5 + j)
        for j in range(4):
            cols.append(eye[9 + j].copy())
            self.free.append(9 + j)
        self.x0 = x0
        self.G = np.array(cols).T

        # objective pairs U = p +- y and V = r +- c, affine in w
        au, av = np.zeros((8, 13)), np.zeros((8, 13))
        bu = np.zeros(8)
        for i in range(4):
            for row, sg in ((i, 1.0), (4 + i, -1.0)):
                au[row, 0], au[row, 1 + i], bu[row] = self.s[i], sg, self.k[i]
                av[row, 5 + i], av[row, 9 + i] = 1.0, sg
        self.ju, self.jv = au @ self.G, av @ self.G
        self.cu, self.cv = au @ x0 + bu, av @ x0
        const_u = np.all(np.abs(self.ju) < self._FLAT, axis=1)
        self.cu = np.where(const_u, np.maximum(self.cu, 0.0), self.cu)
        # a pair whose U is pinned at zero contributes nothing
        self.terms = ~(const_u & (self.cu <= self._FLAT))
        # barrier rows: U >= 0 and r_j +- c_k >= 0; pinned rows are dropped
        rows, consts = [au], [bu]
        for j in range(4):
            for k in range(4):
                for sg in (1.0, -1.0):
                    g = np.zeros((1, 13))
                    g[0, 5 + j], g[0, 9 + k] = 1.0, sg
                    rows.append(g)
                    consts.append(np.zeros(1))
        a_all, b_all = np.vstack(rows), np.concatenate(consts)
        bm, bc = a_all @ self.G, a_all @ x0 + b_all
        keep = ~np.all(np.abs(bm) < self._FLAT, axis=1)
        self.bm, self.bc = bm[keep], bc[keep]

    def diag(self, t: float) -> np.ndarray:
        return np.maximum(self.k + self.s * t, 0.0)

    def full(self, w) -> np.ndarray:
        return self.x0 + self.G @ w

    def start(self, rng=None) -> np.ndarray:
        """Strictly feasible point: deterministic without ``rng``, random otherwise."""
        fam = self.family
        x = self.x0.copy()
        if self.t_free:
            frac = 0.5 if rng is None else 0.1 + 0.8 * rng.random()
            x[0] = fam.t_lo + frac * (fam.t_hi - fam.t_lo)
        p = self.diag(x[0])
        live = self.y_live
        if live:
            # shrink the chosen split towards the proportional one until strict
            prop = np.zeros(4)
            prop[live] = 2 * self.ytot * p[live]
            target = np.zeros(4)
            if rng is None:
                target[live] = self.ytot / len(live)
            else:
                target[live] = self.ytot * rng.dirichlet(np.ones(len(live)))
            y, theta = target, 1.0
            while np.any(np.abs(y[live]) >= 0.99 * p[live]) and theta > 1e-6:
                theta *= 0.5
                y = prop + theta * (target - prop)
            x[1:5] = y
        if rng is None:
            r, c = np.full(4, 0.125), np.zeros(4)
        else:
            r = 0.25 * rng.dirichlet(np.ones(4)) + 0.0625
            c = rng.uniform(-0.9, 0.9, 4) * r.min()
        x[5:9], x[9:13] = r, c
        w = x[self.free]
        if np.any(self.bm @ w + self.bc <= 0):
            raise ConvergenceError("could not build a strictly feasible start")
        return w

    def objective(self, w, derivatives: bool = False):
        m = self.terms
        ju, jv = self.ju[m], self.jv[m]
        u = self.cu[m] + ju @ w
        v = self.cv[m] + jv @ w
        pos = u > 0
        safe_u = np.where(pos, u, 1.0)
        lr = np.where(pos, np.log(safe_u / v), 0.0)
        f = float(np.sum(u * lr)) / math.log(2)
        if not derivatives:
            return f
        gu, gv = lr + 1.0, -u / v
        grad = (ju.T @ gu + jv.T @ gv) / math.log(2)
        huu, huv, hvv = np.where(pos, 1.0 / safe_u, 0.0), -1.0 / v, u / v**2
        hess = (ju.T @ (huu[:, None] * ju) + ju.T @ (huv[:, None] * jv)
                + jv.T @ (huv[:, None] * ju) + jv.T @ (hvv[:, None] * jv))
        return f, grad, hess / math.log(2)

    def solve(self, w, gap: float = 1e-11, max_newton: int = 100) -> np.ndarray:
        """Barrier path following from the strictly feasible point ``w``."""
        tau = 1.0

        def phi(w):
            sl = self.bm @ w + self.bc
            if np.any(sl <= 0):
                return math.inf
            return tau * self.objective(w) - float(np.sum(np.log(sl)))

        while True:
            for _ in range(max_newton):
                sl = self.bm @ w + self.bc
                f, g, h = self.objective(w, derivatives=True)
                inv = 1.0 / sl
                g = tau * g - self.bm.T @ inv
                h = tau * h + self.bm.T @ ((inv**2)[:, None] * self.bm)
                try:
                    dw = -np.linalg.solve(h, g)
                except np.linalg.LinAlgError:
                    dw = -np.linalg.lstsq(h, g, rcond=None)[0]
                dec = -float(g @ dw)
                if dec / 2 <= 1e-10:
                    break
                # start inside the barrier domain, then Armijo backtracking;
                # once steps shrink to round-off the centre is as good as it gets
                rate = self.bm @ dw
                shrinking = rate < 0
                step = min(1.0, 0.99 * float(np.min(-sl[shrinking] / rate[shrinking]))) \
                    if np.any(shrinking) else 1.0
                val = tau * f - float(np.sum(np.log(sl)))
                while step > 1e-10 and phi(w + step * dw) > val - 0.25 * step * dec:
                    step *= 0.5
                if step <= 1e-10:
                    break
                w = w + step * dw
            if len(self.bc) / tau < gap:
                return w
            tau *= 20.0


def min_e3(data, tol: float = 1e-6, restarts: int = 8, seed: int = 0) -> FloorResult:
    """Least relative entropy of Tri-PPT entanglement compatible with ``data``.

    Jointly minimises over the compatible sigma family (free diagonal
    parameter and coupling split) and over Tri-PPT rho, by a barrier
    method on the lifted convex program of :class:`_E3Program`.  The first
    start is the uniform rho with mid-range ``t`` and the uniform coupling
    split; the others are random interior points.  All ``restarts`` must
    agree within ``tol`` or :class:`ConvergenceError` is raised.  Each
    run is scored by :func:`e3_inner` at its end point.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    data = TriData.of(data)
    prog = _E3Program(ghz_family_from_data(data))
    rng = np.random.default_rng(seed)
    runs = []
    for k in range(max(1, restarts)):
        x = prog.full(prog.solve(prog.start(None if k == 0 else rng)))
        diag = prog.diag(x[0])
        coup = np.clip(x[1:5], -diag, diag)
        val = _inner_from_diag(list(diag), list(np.abs(coup)), list(np.maximum(x[5:9], 0.0)))
        runs.append((val, k, x))
    values = np.array([run[0] for run in runs])
    best_val, _, best_x = min(runs, key=lambda run: (run[0], run[1]))
    spread = float(values.max() - values.min())
    if spread > tol:
        raise ConvergenceError(
            f"min_e3 restarts disagree by {spread:.3g} (> tol {tol:g})", spread=spread, best=best_val
        )
    diag = prog.diag(best_x[0])
    sign = -1.0 if data.cxxx < 0 else 1.0
    coup = sign * np.clip(best_x[1:5], -diag, diag)
    sigma = GhzDiagonal(*(float(v) for v in diag), *(float(v) for v in coup[::-1]))
    rho_diag = np.maximum(best_x[5:9], 0.0)
    m = rho_diag.min()
    rho_coup = [float(np.sign(q) * min(m, abs(q) / p * r)) if p > 0 else 0.0
                for p, q, r in zip(diag, coup, rho_diag)]
    return FloorResult(
        max(0.0, float(best_val)),
        EXACT,
        witness=sigma.to_matrix(),
        details={
            "spread": spread,
            "restart_values": values,
            "rho_diagonal": [float(v) for v in rho_diag],
            "rho_couplings": rho_coup,
            "sigma": sigma.__dict__,
        },
    )
