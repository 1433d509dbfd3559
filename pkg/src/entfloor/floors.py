"""Closed-form minimal-entanglement floors for two qubits.

Every floor returns a :class:`FloorResult`.  Entanglement is in bits; for the
correlation floors it is the logarithmic negativity, for
:func:`floor_mutual_info` the relative entropy of entanglement.

Two different z-z correlators appear here:

* ``floor_purity_czz`` consumes the *connected* correlator
  ``<zz> - <z1><1z>`` (see :func:`entfloor.qstate.connected_czz`);
* ``floor_xx_zz``, ``floor_xx_yy_zz`` and the local-statistics floor consume
  *raw* correlators ``<zz>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import InfeasibleError
from .jsonio import matrix_to_json, to_plain
from .qstate import PAULI, log2_plus, pauli_word

__all__ = [
    "EXACT",
    "CONJECTURED",
    "LOWER_BOUND",
    "REGION_I",
    "REGION_S",
    "REGION_IIA",
    "REGION_IIB",
    "FloorResult",
    "floor_xx_zz",
    "floor_xx_yy_zz",
    "bell_diagonal_eigenvalues",
    "classify_purity_czz",
    "purity_czz_formulas",
    "floor_purity_czz",
    "floor_mutual_info",
    "binary_entropy",
    "local_stats_feasible",
    "local_stats_diagonal",
    "local_stats_lambda_min",
    "floor_local_stats",
    "golden_max",
]

EXACT = "exact"
CONJECTURED = "conjectured-exact"
LOWER_BOUND = "lower-bound"

REGION_I = "infeasible-I"
REGION_S = "separable-S"
REGION_IIA = "entangled-IIa"
REGION_IIB = "entangled-IIb"

_EPS = 1e-12


@dataclass
class FloorResult:
    """Minimal entanglement compatible with some data.

    ``value`` is in bits.  ``witness`` is a state attaining ``value`` when
    one is known.  ``lower_bound`` carries a proven bound when ``value``
    itself is only conjectured.
    """

    value: float
    status: str
    witness: np.ndarray | None = None
    region: str | None = None
    lower_bound: float | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("floor value must be non-negative")

    def to_dict(self, with_witness: bool = True) -> dict:
        out = {"value": float(self.value), "status": self.status}
        if self.region is not None:
            out["region"] = self.region
        if self.lower_bound is not None:
            out["lower_bound"] = float(self.lower_bound)
        if self.details:
            out["details"] = to_plain(self.details)
        if with_witness and self.witness is not None:
            out["witness"] = matrix_to_json(self.witness)
        return out


def _check_unit(name, value):
    value = float(value)
    if not -1.0 - _EPS <= value <= 1.0 + _EPS or math.isnan(value):
        raise InfeasibleError(f"{name} = {value} lies outside [-1, 1]")
    return min(1.0, max(-1.0, value))


def _flip_second(rho, letter):
    u = np.kron(PAULI["1"], PAULI[letter])
    return u @ rho @ u.conj().T


# --- two correlation axes -------------------------------------------------


def floor_xx_zz(cxx: float, czz: float) -> FloorResult:
    """Floor from raw ``<xx>`` and ``<zz>``: ``log2+(|Cxx| + |Czz|)``.

    The witness is the symmetric X-shaped state with the inner coherence
    pushed to its positivity limit, flipped back to the signs of the inputs.
    """
    cxx = _check_unit("Cxx", cxx)
    czz = _check_unit("Czz", czz)
    ax, az = abs(cxx), abs(czz)
    b = (1 - az) / 4
    corner = ax / 2 - b
    p, q = (1 + az) / 4, (1 - az) / 4
    rho = np.array(
        [[p, 0, 0, corner], [0, q, b, 0], [0, b, q, 0], [corner, 0, 0, p]], dtype=complex
    )
    if cxx < 0 and czz < 0:
        rho = _flip_second(rho, "y")
    elif cxx < 0:
        rho = _flip_second(rho, "z")
    elif czz < 0:
        rho = _flip_second(rho, "x")
    return FloorResult(float(log2_plus(ax + az)), EXACT, witness=rho)


# --- three correlation axes -----------------------------------------------


def bell_diagonal_eigenvalues(cxx, cyy, czz) -> np.ndarray:
    """Weights on (phi+, phi-, psi+, psi-) of ``(I + sum C_kk s_k s_k)/4``."""
    return np.array(
        [
            1 + cxx - cyy + czz,
            1 - cxx + cyy + czz,
            1 + cxx + cyy - czz,
            1 - cxx - cyy - czz,
        ]
    ) / 4


def floor_xx_yy_zz(cxx: float, cyy: float, czz: float) -> FloorResult:
    """Floor from raw ``<xx>``, ``<yy>``, ``<zz>``.

    Twirling with ``{11, xx, yy, zz}`` maps any compatible state to the
    unique Bell-diagonal state with these correlations, so that state is the
    witness and the triple is feasible exactly when its weights are
    non-negative.
    """
    cxx = _check_unit("Cxx", cxx)
    cyy = _check_unit("Cyy", cyy)
    czz = _check_unit("Czz", czz)
    lam = bell_diagonal_eigenvalues(cxx, cyy, czz)
    if lam.min() < -_EPS:
        raise InfeasibleError(
            f"no state has (Cxx, Cyy, Czz) = ({cxx}, {cyy}, {czz}): "
            f"Bell weight {lam.min():.6g} < 0"
        )
    rho = (
        np.eye(4)
        + cxx * pauli_word("xx")
        + cyy * pauli_word("yy")
        + czz * pauli_word("zz")
    ) / 4
    value = float(log2_plus((1 + abs(cxx) + abs(cyy) + abs(czz)) / 2))
    return FloorResult(value, EXACT, witness=rho, details={"bell_weights": lam})


# --- purity and connected zz ---------------------------------------------


def classify_purity_czz(P: float, czz: float) -> str:
    """Region of the (purity, connected Czz) plane.

    ``P`` is the rescaled purity in [0, 1]; ``czz`` the connected correlator,
    folded to ``|czz|``.  Points on the boundary of the separable region are
    labelled separable.
    """
    P = float(P)
    if not -_EPS <= P <= 1 + _EPS:
        raise ValueError(f"purity P = {P} outside [0, 1]")
    if not -1 - _EPS <= czz <= 1 + _EPS:
        raise ValueError(f"Czz = {czz} outside [-1, 1]")
    c = abs(float(czz))
    if P < c * c / 3 - _EPS:
        return REGION_I
    if P <= 1 - 2 * c / 3 + _EPS:
        return REGION_S
    Q = (3 * P + 1) / 4
    lo = 1 - c / 2
    hi = (1 + (1 - c / 2) ** 2) / 2
    if lo - _EPS <= Q <= hi + _EPS:
        return REGION_IIA
    return REGION_IIB


def purity_czz_formulas(Q: float, czz: float) -> tuple[float, float]:
    """The two candidate floors ``(IIa, IIb)`` at ``Q = Tr rho^2``."""
    c = abs(czz)
    a = math.log2(1 + math.sqrt(max(0.0, 2 * (Q - 1) + c)))
    b = math.log2(c + math.sqrt(max(0.0, 2 * Q - 1)))
    return a, b


def floor_purity_czz(P: float, czz: float) -> FloorResult:
    """Floor from purity ``P`` and the connected correlator.

    Inside the separable region the floor is 0 and exact.  In regions IIa
    and IIb the value is the smaller of the two region formulas, which is
    supported numerically but unproven, hence ``conjectured-exact``;
    ``lower_bound`` always holds the proven ``log2+(Q + |Czz|/2)``.
    """
    region = classify_purity_czz(P, czz)
    if region == REGION_I:
        raise InfeasibleError(
            f"no state has P = {P} and Czz = {czz} (P < Czz^2/3): Region I",
            region=region,
        )
    Q = (3 * float(P) + 1) / 4
    c = abs(float(czz))
    lower = float(log2_plus(Q + c / 2))
    if region == REGION_S:
        return FloorResult(0.0, EXACT, region=region, lower_bound=lower, details={"Q": Q})
    f_a, f_b = purity_czz_formulas(Q, c)
    value = max(0.0, min(f_a, f_b))
    return FloorResult(
        value,
        CONJECTURED,
        region=region,
        lower_bound=lower,
        details={"Q": Q, "formula_IIa": f_a, "formula_IIb": f_b},
    )


# --- mutual information and entropy ---------------------------------------


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _inv_binary_entropy(h: float) -> float:
    """The root in [0, 1/2] of ``binary_entropy(p) = h``."""
    if h <= 0.0:
        return 0.0
    if h >= 1.0:
        return 0.5
    return brentq(lambda p: binary_entropy(p) - h, 0.0, 0.5, xtol=1e-300, rtol=1e-15, maxiter=500)


def _diagonal_witness(I: float, S: float) -> np.ndarray:
    """Classical two-bit state with mutual information I and entropy S.

    Bit A is Bernoulli(alpha) and bit B copies A through a binary symmetric
    channel with flip probability q.  Fixing q determines alpha through
    S = h(alpha) + h(q); the remaining scalar equation in q is bracketed by
    the edges of the feasible triangle.
    """

    def alpha_of(q):
        return _inv_binary_entropy(S - binary_entropy(q))

    def mi(q):
        al = alpha_of(q)
        pb = al * (1 - q) + (1 - al) * q
        return binary_entropy(pb) - binary_entropy(q)

    q_lo = _inv_binary_entropy(max(0.0, S - 1.0))
    q_hi = _inv_binary_entropy(min(1.0, S))
    f_lo, f_hi = mi(q_lo) - I, mi(q_hi) - I
    if abs(f_lo) <= 1e-15:
        q = q_lo
    elif abs(f_hi) <= 1e-15:
        q = q_hi
    else:
        q = brentq(lambda q: mi(q) - I, q_lo, q_hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    al = alpha_of(q)
    p = np.array([(1 - al) * (1 - q), (1 - al) * q, al * q, al * (1 - q)])
    return np.diag(p).astype(complex)


def _maximally_correlated_witness(I: float, S: float) -> tuple[np.ndarray, float, float]:
    a = _inv_binary_entropy((I + S) / 2)
    lam = _inv_binary_entropy(S)
    b = 0.5 * math.sqrt(max(0.0, (1 - 2 * lam) ** 2 - (1 - 2 * a) ** 2))
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0], rho[3, 3] = a, 1 - a
    rho[0, 3] = rho[3, 0] = b
    return rho, a, b


def floor_mutual_info(I: float, S: float) -> FloorResult:
    """Relative-entropy floor from mutual information I and entropy S.

    ``max(0, (I - S)/2)``, attained by a diagonal state when ``S >= I`` and by
    a maximally correlated state ``a|00><00| + b(|00><11| + h.c.) +
    (1-a)|11><11|`` otherwise.
    """
    I, S = float(I), float(S)
    if I < -_EPS or S < -_EPS or I + S > 2 + _EPS:
        raise InfeasibleError(
            f"(I, S) = ({I}, {S}) outside the two-qubit triangle I, S >= 0, I + S <= 2"
        )
    I, S = max(I, 0.0), max(S, 0.0)
    if I + S > 2:
        scale = 2 / (I + S)
        I, S = I * scale, S * scale
    if S >= I:
        return FloorResult(0.0, EXACT, witness=_diagonal_witness(I, S), details={"family": "diagonal"})
    rho, a, b = _maximally_correlated_witness(I, S)
    return FloorResult(
        (I - S) / 2,
        EXACT,
        witness=rho,
        details={"family": "maximally-correlated", "a": a, "b": b},
    )


# --- local statistics -----------------------------------------------------


def local_stats_diagonal(czz, z1, z2) -> tuple[float, float, float, float]:
    """Diagonal on ``|00>, |01>, |10>, |11>`` fixed by raw ``<zz>``, ``z1 = <z1>`` and ``z2 = <1z>``."""
    a = (1 + z1 + z2 + czz) / 4
    b = (1 + z1 - z2 - czz) / 4
    c = (1 - z1 + z2 - czz) / 4
    d = (1 - z1 - z2 + czz) / 4
    return a, b, c, d


def local_stats_feasible(czz: float, cxx: float, z1: float, z2: float) -> bool:
    """Whether some two-qubit state has these ``<zz>, <xx>, <z1>, <1z>``.

    Checks the two published restrictions (``Czz <= 1 - |z2 - z1|`` and the
    ``Cxx`` ceiling, radicands clamped at 0) together with non-negativity of
    the two remaining diagonal entries, ``Czz >= |z1 + z2| - 1``.
    """
    vals = (czz, cxx, z1, z2)
    if any(not -1 - _EPS <= v <= 1 + _EPS for v in vals):
        return False
    if czz > 1 - abs(z2 - z1) + _EPS:
        return False
    if czz < abs(z1 + z2) - 1 - _EPS:
        return False
    ceiling = 0.5 * math.sqrt(max(0.0, (1 + czz) ** 2 - (z1 + z2) ** 2)) + 0.5 * math.sqrt(
        max(0.0, (1 - czz) ** 2 - (z1 - z2) ** 2)
    )
    return abs(cxx) <= ceiling + _EPS


def local_stats_lambda_min(e, czz, cxx, z1, z2) -> float:
    """Smallest eigenvalue of the partial transpose for inner coherence ``e``."""
    f = cxx / 2 - e
    return 0.25 * min(
        1 + czz - math.sqrt((z1 + z2) ** 2 + (4 * e) ** 2),
        1 - czz - math.sqrt((z1 - z2) ** 2 + (4 * f) ** 2),
    )


_INVPHI = (math.sqrt(5) - 1) / 2


def golden_max(func, lo: float, hi: float, tol: float = 1e-12, maxiter: int = 500):
    """Maximise a unimodal ``func`` on ``[lo, hi]`` by golden-section search.

    Returns ``(x, func(x))``; the end points are compared too, so a maximum
    sitting on the boundary is found exactly.
    """
    if hi < lo:
        raise ValueError("empty interval")
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(maxiter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = func(d)
    candidates = [(fc, c), (fd, d), (func(lo), lo), (func(hi), hi)]
    best_f, best_x = max(candidates, key=lambda t: t[0])
    return best_x, best_f


def floor_local_stats(czz: float, cxx: float, z1: float, z2: float) -> FloorResult:
    """Floor from raw ``<zz>``, ``<xx>`` and the local values ``<z1>, <1z>``.

    The optimal state is X-shaped with diagonal fixed by ``(czz, z1, z2)``
    and coherences ``e`` (inner) and ``f = |cxx|/2 - e`` (outer).  The
    smallest partial-transpose eigenvalue is concave in ``e`` and is
    maximised by golden-section search over the allowed range of ``e``.
    """
    if not local_stats_feasible(czz, cxx, z1, z2):
        raise InfeasibleError(
            f"no state has Czz={czz}, Cxx={cxx}, z1={z1}, z2={z2}"
        )
    czz, z1, z2 = (min(1.0, max(-1.0, float(v))) for v in (czz, z1, z2))
    ax = min(1.0, abs(float(cxx)))
    a, b, c, d = (max(0.0, v) for v in local_stats_diagonal(czz, z1, z2))
    e_lo = max(0.0, ax / 2 - math.sqrt(a * d))
    e_hi = min(ax / 2, math.sqrt(b * c))
    if e_lo > e_hi:
        # only reachable through round-off at the feasibility edge
        e_lo = e_hi = min(e_lo, e_hi)
    e, lam = golden_max(lambda e: local_stats_lambda_min(e, czz, ax, z1, z2), e_lo, e_hi)
    f = ax / 2 - e
    value = math.log2(1 - 2 * min(0.0, lam))
    rho = np.array(
        [[a, 0, 0, f], [0, b, e, 0], [0, e, c, 0], [f, 0, 0, d]], dtype=complex
    )
    if cxx < 0:
        rho = _flip_second(rho, "z")
    return FloorResult(
        value,
        EXACT,
        witness=rho,
        details={"e": e, "f": f, "lambda_min": lam, "e_range": [e_lo, e_hi]},
    )
