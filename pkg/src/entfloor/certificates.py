"""Dual certificates for lower bounds on log-negativity.

A certificate is a Hermitian ``M`` with unit operator norm together with
multipliers ``nu`` such that ``M^T_B - sum nu_i A_i`` is positive
semidefinite.  For any state with ``Tr[A_i rho] = a_i`` it proves
``E_N(rho) >= log2+(sum nu_i a_i)``.

Two-copy certificates act on ``rho (x) rho`` in the qubit order
``A, B, A', B'``; the partial transpose is taken on ``B`` and ``B'``.
Because ``||rho^T (x) rho^T||_1 = ||rho^T||_1 ** 2`` the per-copy bound
is half the two-copy one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .jsonio import matrix_from_json, matrix_to_json
from .qstate import log2_plus, partial_transpose, pauli_word

__all__ = [
    "DualCertificate",
    "CertificateReport",
    "verify_certificate",
    "bound_from_certificate",
    "two_copy_value",
    "two_copy_operators",
    "xxzz_certificate",
    "xyz_certificate",
    "purity_certificate",
    "builtin_certificate",
    "BUILTINS",
    "load_certificate",
    "certificate_to_dict",
]

NORM_TOL = 1e-9
SLACK_TOL = 1e-10
BUILTINS = ("xxzz", "xyz", "purity")


@dataclass
class DualCertificate:
    M: np.ndarray
    observables: list
    nus: np.ndarray
    two_copy: bool = False
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.M = np.asarray(self.M, dtype=complex)
        self.observables = [np.asarray(a, dtype=complex) for a in self.observables]
        self.nus = np.asarray(self.nus, dtype=float)
        if not self.labels:
            self.labels = [f"A{i}" for i in range(len(self.observables))]
        d = self.M.shape[0]
        if self.M.shape != (d, d):
            raise ValueError("M must be square")
        if self.two_copy and d != 16:
            raise ValueError("two-copy certificates act on 16x16 matrices")
        if not self.two_copy and d != 4:
            raise ValueError("single-copy certificates act on 4x4 matrices")
        if len(self.nus) != len(self.observables):
            raise ValueError("nus and observables differ in length")
        for a in self.observables:
            if a.shape != (d, d):
                raise ValueError(f"observable of shape {a.shape} does not match M ({d}x{d})")

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    def transposed_M(self) -> np.ndarray:
        cut = (1, 3) if self.two_copy else (1,)
        return partial_transpose(self.M, cut)

    def slack_operator(self) -> np.ndarray:
        total = sum(nu * a for nu, a in zip(self.nus, self.observables))
        return self.transposed_M() - total


@dataclass(frozen=True)
class CertificateReport:
    operator_norm: float
    min_eig_slack: float
    valid: bool


def verify_certificate(cert: DualCertificate) -> CertificateReport:
    """Largest singular value of ``M`` and least eigenvalue of the slack."""
    norm = float(np.linalg.norm(cert.M, 2))
    slack = cert.slack_operator()
    slack = 0.5 * (slack + slack.conj().T)
    min_eig = float(np.linalg.eigvalsh(slack)[0])
    valid = abs(norm - 1.0) <= NORM_TOL and min_eig >= -SLACK_TOL
    return CertificateReport(norm, min_eig, valid)


def _check_values(cert: DualCertificate, values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != cert.nus.shape:
        raise ValueError(f"expected {len(cert.nus)} values, got {values.size}")
    return values


def two_copy_value(cert: DualCertificate, values) -> float:
    """``log2+(sum nu_i a_i)`` without the per-copy halving."""
    report = verify_certificate(cert)
    if not report.valid:
        raise ValueError(f"certificate is not valid: {report}")
    return float(log2_plus(float(cert.nus @ _check_values(cert, values))))


def bound_from_certificate(cert: DualCertificate, values) -> float:
    """Lower bound (bits) on the log-negativity of any state matching ``values``.

    ``values[i]`` is the expectation of ``observables[i]``; for the identity
    pass 1.  Invalid certificates are refused with ``ValueError``.
    """
    value = two_copy_value(cert, values)
    return 0.5 * value if cert.two_copy else value


# --- built-ins ----------------------------------------------------------------

_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
_LOCAL = {"1": np.eye(2), "x": pauli_word("x"), "y": pauli_word("y"), "z": pauli_word("z")}


def _orient(m, nus, words, flip: str):
    """Conjugate ``M`` by ``1 (x) sigma_flip``; the observables stay fixed.

    Pauli products anticommuting with the flip change sign, so their
    multipliers are negated.
    """
    u = np.kron(np.eye(2), _LOCAL[flip])
    m = u @ m @ u.conj().T
    nus = [-nu if (w[1] not in ("1", flip) and flip != "1") else nu for nu, w in zip(nus, words)]
    return m, nus


def xxzz_certificate(flip: str = "1") -> DualCertificate:
    """Certificate for ``(<xx>, <zz>)``: ``M`` is the swap, ``nu = (0, 1, 1)``.

    ``flip`` conjugates by ``1 (x) sigma`` to handle other sign patterns:
    ``z`` for ``<xx> < 0``, ``x`` for ``<zz> < 0`` and ``y`` for both.
    """
    words = ["11", "xx", "zz"]
    m, nus = _orient(_SWAP, [0.0, 1.0, 1.0], words, flip)
    return DualCertificate(m, [pauli_word(w) for w in words], nus, labels=words)


def xyz_certificate(flip: str = "1") -> DualCertificate:
    """Certificate for ``(<xx>, <yy>, <zz>)`` with ``M^T_B`` equal to the multiplier sum.

    Unflipped it is tight for correlations of sign pattern ``(+, -, +)``;
    the singlet pattern ``(-, -, -)`` uses ``flip='y'``.
    """
    words = ["11", "xx", "yy", "zz"]
    m, nus = _orient(_SWAP, [0.5, 0.5, -0.5, 0.5], words, flip)
    return DualCertificate(m, [pauli_word(w) for w in words], nus, labels=words)


def _best(make, values, flips="1xyz") -> DualCertificate:
    certs = [make(f) for f in flips]
    return max(certs, key=lambda c: float(c.nus @ np.asarray(values, dtype=float)))


@lru_cache(maxsize=1)
def _two_copy_cached():
    z = pauli_word("z")
    one = np.eye(2)
    zz_op = np.kron(np.kron(z, z), np.eye(4))
    cross = np.kron(np.kron(one, z), np.kron(z, one))
    zop = zz_op - cross
    flip = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            flip[4 * j + i, 4 * i + j] = 1.0
    zprime = 0.5 * (zop + flip @ zop @ flip)
    for op in (zop, zprime, flip):
        op.setflags(write=False)
    return zop, zprime, flip


def two_copy_operators() -> dict[str, np.ndarray]:
    """``Z``, ``Z'`` and the flip ``F`` on ``rho (x) rho`` (order ``A, B, A', B'``).

    ``Tr[(rho (x) rho) Z]`` is the connected ``<zz>`` and
    ``Tr[(rho (x) rho) F]`` is the purity.
    """
    zop, zprime, flip = _two_copy_cached()
    return {"Z": zop, "Z'": zprime, "F": flip}


def purity_certificate() -> DualCertificate:
    """Two-copy certificate for (connected ``<zz>``, purity), ``nu = (1/2, 1)``.

    ``M`` is the identity with the ``|0110>, |1001>`` block replaced by a
    bit flip between them.  The purely diagonal choice fails: the flip
    ``F`` couples ``|0011>`` and ``|1100>``, and only the partial transpose
    of that off-diagonal block covers it.
    """
    ops = two_copy_operators()
    m = np.eye(16, dtype=complex)
    m[6, 6] = m[9, 9] = 0.0
    m[6, 9] = m[9, 6] = 1.0
    return DualCertificate(m, [ops["Z'"], ops["F"]], [0.5, 1.0],
                           two_copy=True, labels=["Z'", "F"])


def builtin_certificate(name: str, values=None) -> DualCertificate:
    """Built-in certificate by name, oriented to fit ``values`` if given."""
    if name == "purity":
        return purity_certificate()
    makers = {"xxzz": xxzz_certificate, "xyz": xyz_certificate}
    if name not in makers:
        raise ValueError(f"unknown certificate {name!r}; choose from {', '.join(BUILTINS)}")
    if values is None:
        return makers[name]()
    return _best(makers[name], values)


# --- JSON -------------------------------------------------------------------


def _observable(spec, dim: int) -> tuple[np.ndarray, str]:
    if isinstance(spec, str):
        ops = two_copy_operators()
        if spec in ops:
            return ops[spec], spec
        return pauli_word(spec), spec
    return matrix_from_json(spec, dim), "matrix"


def load_certificate(source) -> DualCertificate:
    """Read a certificate from a JSON file path or an already-parsed dict.

    Schema: ``{"dim", "two_copy", "M", "observables", "nus"}`` where each
    observable is a Pauli word, one of ``Z``, ``Z'``, ``F``, or a matrix
    given as ``[re, im]`` pairs.
    """
    data = source if isinstance(source, dict) else json.loads(Path(source).read_text())
    try:
        dim = int(data["dim"])
        m = matrix_from_json(data["M"], dim)
        pairs = [_observable(o, dim) for o in data["observables"]]
        nus = data["nus"]
    except KeyError as exc:
        raise ValueError(f"certificate is missing field {exc}") from None
    return DualCertificate(
        m,
        [p[0] for p in pairs],
        nus,
        two_copy=bool(data.get("two_copy", False)),
        labels=[p[1] for p in pairs],
    )


def certificate_to_dict(cert: DualCertificate) -> dict:
    observables = [
        label if label != "matrix" and not label.startswith("A") else matrix_to_json(a)
        for label, a in zip(cert.labels, cert.observables)
    ]
    return {
        "dim": cert.dim,
        "two_copy": cert.two_copy,
        "M": matrix_to_json(cert.M),
        "observables": observables,
        "nus": [float(v) for v in cert.nus],
    }
