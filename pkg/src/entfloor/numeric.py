"""Brute-force minimisation of log-negativity under measured constraints.

States are parametrised as ``rho = T^dag T / Tr(T^dag T)`` with ``T`` upper
triangular (real diagonal, complex above), which covers every density
matrix while using the fewest real parameters.  Each start runs an
augmented Lagrangian whose subproblems are solved by Nelder-Mead, so no
gradients of the (nonsmooth) trace norm are needed, then an SLSQP polish
from both ends of that search; kicks re-polish from jolted or fresh points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import least_squares, minimize

from .errors import ConvergenceError, InfeasibleError
from .floors import EXACT, FloorResult
from .qstate import _normalise_word, partial_transpose, pauli_word

__all__ = [
    "FUNCTIONALS",
    "LinearConstraint",
    "NonlinearConstraint",
    "ConstraintSet",
    "SolverOptions",
    "min_entanglement_numeric",
]

# functional -> admissible target range for two qubits
FUNCTIONALS = {
    "purity-Q": (0.25, 1.0),
    "entropy": (0.0, 2.0),
    "mutual-info": (0.0, 2.0),
    "connected-czz": (-1.0, 1.0),
}


@dataclass(frozen=True)
class LinearConstraint:
    """``Tr[rho A] = target``; ``observable`` is a Pauli word or a matrix."""

    observable: object
    target: float
    tol: float = 1e-6

    def matrix(self, dim: int) -> np.ndarray:
        if isinstance(self.observable, str):
            a = pauli_word(self.observable)
        else:
            a = np.asarray(self.observable, dtype=complex)
        if a.shape != (dim, dim):
            raise ValueError(f"observable shape {a.shape} does not fit dimension {dim}")
        return a

    @property
    def label(self) -> str:
        return self.observable if isinstance(self.observable, str) else "matrix"


@dataclass(frozen=True)
class NonlinearConstraint:
    functional: str
    target: float
    tol: float = 1e-6


@dataclass(frozen=True)
class ConstraintSet:
    linear: tuple = ()
    nonlinear: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "linear", tuple(self.linear))
        object.__setattr__(self, "nonlinear", tuple(self.nonlinear))
        for c in self.linear + self.nonlinear:
            if not c.tol > 0:
                raise ValueError("constraint tolerances must be positive")
        for c in self.nonlinear:
            if c.functional not in FUNCTIONALS:
                raise ValueError(
                    f"unknown functional {c.functional!r}; choose from {', '.join(FUNCTIONALS)}"
                )
            lo, hi = FUNCTIONALS[c.functional]
            if not lo - 1e-12 <= c.target <= hi + 1e-12:
                raise InfeasibleError(f"{c.functional} = {c.target} outside [{lo}, {hi}]")

    @classmethod
    def from_mapping(cls, targets: Mapping[str, float], tol: float = 1e-6) -> "ConstraintSet":
        """Build from ``{"xx": 1.0, "purity-Q": 0.6, ...}``.

        Keys naming a functional become nonlinear constraints; everything
        else is read as a Pauli word.
        """
        linear, nonlinear = [], []
        for key, value in targets.items():
            if key in FUNCTIONALS:
                nonlinear.append(NonlinearConstraint(key, float(value), tol))
            else:
                linear.append(LinearConstraint(_normalise_word(key), float(value), tol))
        return cls(linear, nonlinear)

    @property
    def tolerances(self) -> np.ndarray:
        return np.array([c.tol for c in self.linear + self.nonlinear])

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.linear] + [c.functional for c in self.nonlinear]


@dataclass(frozen=True)
class SolverOptions:
    restarts: int = 3
    max_iters: int = 20000
    penalty_weight: float = 1e3
    seed: int = 0
    objective: str | Callable = "log-negativity"
    cut: object = None
    # perturb-and-resolve rounds per start; None means 4 when any
    # nonlinear constraint is present, else 0
    kicks: int | None = None
    spread_tol: float = 1e-4
    max_outer: int = 15

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.penalty_weight > 0:
            raise ValueError("penalty_weight must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not callable(self.objective) and self.objective != "log-negativity":
            raise ValueError(f"unknown objective {self.objective!r}")


def _entropy_bits(eigs) -> float:
    p = eigs[eigs > 1e-300]
    return float(-(p * np.log2(p)).sum())


class _Problem:
    """Pre-compiled objective and constraint evaluation for one dimension."""

    def __init__(self, cs: ConstraintSet, dim: int, opts: SolverOptions):
        self.dim = dim
        self.n_qubits = int(round(math.log2(dim)))
        if 2**self.n_qubits != dim or self.n_qubits not in (2, 3):
            raise ValueError("dim must be 4 or 8")
        if cs.nonlinear and self.n_qubits != 2:
            raise ValueError("nonlinear functionals are defined for two qubits")
        self.cs = cs
        self.opts = opts
        self.triu = np.triu_indices(dim, 1)
        self.n_params = dim * dim
        # Tr[rho A] = sum_ij rho_ij A_ji
        self.rows = np.array([c.matrix(dim).T.ravel() for c in cs.linear]).reshape(-1, dim * dim)
        self.targets = np.array([c.target for c in cs.linear + cs.nonlinear])
        self.pt_index = (
            partial_transpose(np.arange(dim * dim, dtype=float).reshape(dim, dim), opts.cut)
            .real.astype(int)
            .ravel()
        )
        z = pauli_word("z")
        self.z_rows = np.array(
            [np.kron(z, z).T.ravel(), np.kron(z, np.eye(2)).T.ravel(), np.kron(np.eye(2), z).T.ravel()]
        )

    def state(self, x) -> np.ndarray:
        d = self.dim
        t = np.zeros((d, d), dtype=complex)
        t[range(d), range(d)] = x[:d]
        m = len(self.triu[0])
        t[self.triu] = x[d : d + m] + 1j * x[d + m :]
        rho = t.conj().T @ t
        return rho / float(x @ x)

    def objective(self, rho) -> float:
        if callable(self.opts.objective):
            return float(self.opts.objective(rho))
        pt = rho.ravel()[self.pt_index].reshape(self.dim, self.dim)
        return float(np.log2(max(np.abs(np.linalg.eigvalsh(pt)).sum(), 1.0)))

    def _functional(self, name: str, rho) -> float:
        if name == "purity-Q":
            return float((np.abs(rho) ** 2).sum())
        if name == "connected-czz":
            zz, z1, z2 = (self.z_rows @ rho.ravel()).real
            return float(zz - z1 * z2)
        if name == "entropy":
            return _entropy_bits(np.linalg.eigvalsh(rho))
        # mutual information between the two qubits
        r = rho.reshape(2, 2, 2, 2)
        ra = np.einsum("ijkj->ik", r)
        rb = np.einsum("ijil->jl", r)
        return (
            _entropy_bits(np.linalg.eigvalsh(ra))
            + _entropy_bits(np.linalg.eigvalsh(rb))
            - _entropy_bits(np.linalg.eigvalsh(rho))
        )

    def violations(self, rho) -> np.ndarray:
        lin = (self.rows @ rho.ravel()).real
        nonlin = [self._functional(c.functional, rho) for c in self.cs.nonlinear]
        return np.concatenate([lin, nonlin]) - self.targets

    def parts(self, x):
        norm = float(x @ x)
        if not (math.isfinite(norm) and norm > 1e-200):
            # T = 0 encodes no state; steer searches away without NaNs
            return 1e6, np.full(len(self.targets), 1e6)
        rho = self.state(x)
        return self.objective(rho), self.violations(rho)


@dataclass
class _Run:
    value: float
    violation: np.ndarray
    x: np.ndarray
    feasible: bool = False
    evaluations: int = 0
    kicks_accepted: int = 0
    history: list = field(default_factory=list)


def _nelder_mead(fun, x, max_iters: int):
    """Adaptive Nelder-Mead, restarted until a restart stops helping."""
    best = fun(x)
    nfev = 0
    for _ in range(8):
        res = minimize(
            fun,
            x,
            method="Nelder-Mead",
            options={"maxfev": max_iters, "xatol": 1e-8, "fatol": 1e-11, "adaptive": True},
        )
        nfev += res.nfev
        gain = best - res.fun
        if res.fun <= best:
            x, best = res.x, res.fun
        if gain < 1e-10:
            break
    return x, nfev


def _restore(prob: _Problem, x):
    """Nearby point meeting the constraints, by least squares on the violations."""
    tol = prob.cs.tolerances
    res = least_squares(lambda y: prob.violations(prob.state(y)) / tol, x,
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
    return res.x


def _augmented_lagrangian(prob: _Problem, x, lam=None):
    """Minimise ``E + lam.g + w/2 |g|^2`` with multiplier updates.

    The weight starts at ``penalty_weight`` and doubles (at most four
    times) whenever an outer round fails to shrink the worst violation.
    """
    opts = prob.opts
    tol = prob.cs.tolerances
    lam = np.zeros(len(prob.targets)) if lam is None else lam.copy()
    w = opts.penalty_weight
    doublings = 0
    nfev = 0
    worst_prev = math.inf
    value, g = prob.parts(x)
    if len(prob.targets) == 0:
        x, nfev = _nelder_mead(lambda y: prob.parts(y)[0], x, opts.max_iters)
        value, g = prob.parts(x)
        return x, value, g, lam, nfev
    for _ in range(opts.max_outer):

        def merit(y, lam=lam, w=w):
            e, gy = prob.parts(y)
            return e + lam @ gy + 0.5 * w * (gy @ gy)

        x, used = _nelder_mead(merit, x, opts.max_iters)
        nfev += used
        value, g = prob.parts(x)
        lam = lam + w * g
        worst = float(np.max(np.abs(g) / tol))
        if worst < 0.1:
            break
        # the simplex cannot track thin feasible sets (e.g. rank-deficient
        # ones), so finish on the smooth constraints
        x = _restore(prob, x)
        value, g = prob.parts(x)
        if float(np.max(np.abs(g) / tol)) < 0.1:
            break
        if worst > 0.5 * worst_prev and doublings < 4:
            w *= 2
            doublings += 1
        worst_prev = worst
    return x, value, g, lam, nfev


def _polish(prob: _Problem, x):
    """SLSQP on the constrained problem, then feasibility restoration.

    Finite-difference gradients of the trace norm are rough at eigenvalue
    crossings, but from many starts this finds minima the simplex misses.
    """
    # rho ignores the scale of x; fixing it keeps difference steps sensible
    x = x * (math.sqrt(prob.n_params) / np.linalg.norm(x))
    res = minimize(
        lambda y: prob.parts(y)[0],
        x,
        method="SLSQP",
        constraints={"type": "eq", "fun": lambda y: prob.parts(y)[1]} if len(prob.targets) else (),
        options={"maxiter": 1000, "ftol": 1e-12},
    )
    y = res.x if np.all(np.isfinite(res.x)) else x
    if len(prob.targets):
        y = _restore(prob, y)
    value, g = prob.parts(y)
    return y, value, g, res.nfev


def _single_run(prob: _Problem, rng: np.random.Generator, kicks: int) -> _Run:
    x0 = rng.standard_normal(prob.n_params)
    x, value, g, _, nfev = _augmented_lagrangian(prob, x0)
    tol = prob.cs.tolerances
    run = _Run(value, g, x, bool(np.all(np.abs(g) < tol)), nfev)
    run.history.append(value)

    def offer(y, val, gy):
        ok = bool(np.all(np.abs(gy) < tol))
        better = (ok and (not run.feasible or val < run.value - 1e-9)) or (
            not run.feasible and not ok and np.max(np.abs(gy)) < np.max(np.abs(run.violation))
        )
        if better:
            run.value, run.violation, run.x, run.feasible = val, gy, y, ok
        run.history.append(val)
        return better

    for start in (run.x, x0):
        y, val, gy, used = _polish(prob, start)
        run.evaluations += used
        offer(y, val, gy)
    for k in range(kicks):
        # escape local minima: alternate a jolt of the incumbent with a
        # fresh draw, since some basins sit far from any jolt
        if k % 2:
            start = rng.standard_normal(prob.n_params)
        else:
            scale = 0.3 * np.linalg.norm(run.x) / math.sqrt(prob.n_params)
            start = run.x + scale * rng.standard_normal(prob.n_params)
        y, val, gy, used = _polish(prob, start)
        run.evaluations += used
        if offer(y, val, gy):
            run.kicks_accepted += 1
    return run


def min_entanglement_numeric(cs: ConstraintSet, dim: int = 4, opts: SolverOptions | None = None) -> FloorResult:
    """Least log-negativity over states satisfying ``cs``, by direct search.

    Runs ``opts.restarts`` independently seeded searches.  The result is
    ``exact`` only if every constraint is met within its tolerance and the
    feasible runs agree within ``opts.spread_tol``; otherwise
    :class:`ConvergenceError` (runs disagree) or :class:`InfeasibleError`
    (no run met the constraints) is raised.  Both carry the best value.
    """
    if isinstance(cs, Mapping):
        cs = ConstraintSet.from_mapping(cs)
    opts = opts or SolverOptions()
    prob = _Problem(cs, dim, opts)
    kicks = opts.kicks if opts.kicks is not None else (4 if cs.nonlinear else 0)
    seeds = np.random.SeedSequence(opts.seed).spawn(opts.restarts)
    runs = [_single_run(prob, np.random.default_rng(s), kicks) for s in seeds]

    feasible = [r for r in runs if r.feasible]
    values = [r.value for r in runs]
    if not feasible:
        best = min(runs, key=lambda r: float(np.max(np.abs(r.violation))))
        raise InfeasibleError(
            "no start met the constraints (worst violation "
            f"{float(np.max(np.abs(best.violation))):.3g})"
        )
    best = min(feasible, key=lambda r: r.value)
    spread = max(r.value for r in feasible) - best.value
    details = {
        "spread": spread,
        "run_values": values,
        "feasible_runs": len(feasible),
        "violations": dict(zip(cs.labels, best.violation.tolist())),
        "evaluations": sum(r.evaluations for r in runs),
        "kicks_accepted": sum(r.kicks_accepted for r in runs),
    }
    witness = prob.state(best.x)
    if len(feasible) < min(2, opts.restarts) or spread > opts.spread_tol:
        err = ConvergenceError(
            f"restarts disagree: spread {spread:.3g}, {len(feasible)}/{len(runs)} feasible",
            spread=spread,
            best=best.value,
        )
        err.witness, err.details = witness, details
        raise err
    return FloorResult(max(best.value, 0.0), EXACT, witness=witness, details=details)
