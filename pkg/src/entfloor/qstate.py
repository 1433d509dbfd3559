"""Operator algebra and state functionals for one to three qubits.

States are plain complex ``numpy`` arrays.  Most functions also accept a
stack of matrices with shape ``(..., d, d)`` so that Monte-Carlo loops can be
vectorised.  Qubit 0 is the leftmost tensor factor (party A) and the most
significant bit of the computational-basis index.

All logarithms are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

__all__ = [
    "PAULI",
    "HERMITIAN_TOL",
    "TRACE_TOL",
    "PSD_TOL",
    "pauli_word",
    "check_density",
    "is_density",
    "n_qubits",
    "partial_transpose",
    "log_negativity",
    "is_ppt",
    "expectation",
    "correlations",
    "partial_trace",
    "connected_czz",
    "purity",
    "purity_P",
    "entropy",
    "mutual_information",
    "relative_entropy",
    "twirl",
    "SampleFamily",
    "sample",
    "sample_batch",
    "bell_state",
    "ghz_state",
    "ket_to_dm",
    "werner_state",
    "log2_plus",
]

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
# eigenvalues at or below this count as zero when deciding supports
SUPPORT_TOL = 1e-12

PAULI = {
    "1": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_ALIASES = {"i": "1", "I": "1", "0": "1", "X": "x", "Y": "y", "Z": "z"}


def log2_plus(x):
    """``max(0, log2(x))``; zero for every ``x <= 1`` including non-positive."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    mask = x > 1.0
    out[mask] = np.log2(x[mask])
    return out if out.ndim else float(out)


def _normalise_word(word: str) -> str:
    letters = []
    for ch in word:
        ch = _ALIASES.get(ch, ch)
        if ch not in PAULI:
            raise ValueError(f"malformed Pauli word {word!r}: bad letter {ch!r}")
        letters.append(ch)
    if not letters:
        raise ValueError("empty Pauli word")
    return "".join(letters)


@lru_cache(maxsize=None)
def _pauli_word_cached(word: str) -> np.ndarray:
    mat = np.ones((1, 1), dtype=complex)
    for ch in word:
        mat = np.kron(mat, PAULI[ch])
    mat.setflags(write=False)
    return mat


def pauli_word(word: str) -> np.ndarray:
    """Tensor product of Pauli matrices, e.g. ``pauli_word("xz")``.

    Letters are ``1`` (identity), ``x``, ``y`` and ``z``; ``i`` is accepted as
    an alias for the identity.
    """
    return _pauli_word_cached(_normalise_word(word)).copy()


def n_qubits(rho: np.ndarray) -> int:
    dim = rho.shape[-1]
    n = int(round(np.log2(dim)))
    if dim < 2 or 2**n != dim or rho.shape[-2] != dim:
        raise ValueError(f"expected a square qubit operator, got shape {rho.shape}")
    return n


def check_density(rho, name: str = "rho") -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Raises
    ------
    ValueError
        If the matrix is not square on 1-3 qubits, not Hermitian, not of unit
        trace, or has an eigenvalue below ``-PSD_TOL``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got shape {rho.shape}")
    n = n_qubits(rho)
    if n > 3:
        raise ValueError(f"{name} acts on {n} qubits; at most 3 are supported")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise ValueError(f"{name} is not Hermitian (deviation {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} does not have unit trace (trace {tr:.15g})")
    lam = np.linalg.eigvalsh(rho)[0]
    if lam < -PSD_TOL:
        raise ValueError(f"{name} is not positive semidefinite (eigenvalue {lam:.3g})")
    return rho


def is_density(rho) -> bool:
    try:
        check_density(rho)
    except ValueError:
        return False
    return True


def _cut_axes(cut, n: int) -> tuple[int, ...]:
    if cut is None:
        return (n - 1,)
    if isinstance(cut, (int, np.integer)):
        cut = (int(cut),)
    cut = tuple(sorted(set(int(c) for c in cut)))
    if not cut or any(c < 0 or c >= n for c in cut):
        raise ValueError(f"invalid cut {cut} for a {n}-qubit operator")
    return cut


def partial_transpose(rho: np.ndarray, cut=None) -> np.ndarray:
    """Transpose the tensor factors listed in ``cut``.

    ``cut`` is a qubit index or a collection of them; the default transposes
    the last qubit (party B for two qubits).  For three qubits, transposing
    qubit ``k`` realises the cut ``k | rest``.
    """
    rho = np.asarray(rho)
    n = n_qubits(rho)
    axes = _cut_axes(cut, n)
    lead = rho.shape[:-2]
    t = rho.reshape(lead + (2,) * (2 * n))
    off = len(lead)
    perm = list(range(t.ndim))
    for k in axes:
        perm[off + k], perm[off + n + k] = perm[off + n + k], perm[off + k]
    return t.transpose(perm).reshape(rho.shape)


def log_negativity(rho: np.ndarray, cut=None):
    """``log2 || rho^Gamma ||_1`` in bits.

    Uses ``||rho^Gamma||_1 = 1 + 2 sum |negative eigenvalues|`` with
    eigenvalues above ``-PSD_TOL`` treated as zero, so PPT states give
    exactly 0.
    """
    lam = np.linalg.eigvalsh(partial_transpose(rho, cut))
    neg = np.where(lam < -PSD_TOL, -lam, 0.0)
    norm = 1.0 + 2.0 * np.sum(neg, axis=-1)
    out = np.log2(norm)
    return out if np.ndim(out) else float(out)


def is_ppt(rho: np.ndarray, cut=None, tol: float = PSD_TOL) -> bool:
    return bool(np.linalg.eigvalsh(partial_transpose(rho, cut))[0] >= -tol)


def expectation(rho: np.ndarray, op: np.ndarray):
    """``Tr[op rho]`` (real part) for a Hermitian ``op``; broadcasts over stacks."""
    val = np.einsum("ij,...ji->...", op, rho).real
    return val if np.ndim(val) else float(val)


def correlations(rho: np.ndarray, words) -> list[float]:
    """Expectation values of the given Pauli words."""
    n = n_qubits(rho)
    if isinstance(words, str):
        words = [words]
    out = []
    for w in words:
        w = _normalise_word(w)
        if len(w) != n:
            raise ValueError(f"Pauli word {w!r} does not match a {n}-qubit state")
        out.append(expectation(rho, _pauli_word_cached(w)))
    return out


def partial_trace(rho: np.ndarray, keep) -> np.ndarray:
    """Reduced operator on the qubits listed in ``keep`` (order preserved)."""
    rho = np.asarray(rho)
    n = n_qubits(rho)
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(keep)
    drop = [k for k in range(n) if k not in keep]
    lead = rho.shape[:-2]
    off = len(lead)
    t = rho.reshape(lead + (2,) * (2 * n))
    letters = "abcdefghijklmnop"
    row = [letters[k] for k in range(n)]
    col = [letters[n + k] for k in range(n)]
    for k in drop:
        col[k] = row[k]
    out_idx = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    spec = "..." + "".join(row) + "".join(col) + "->..." + out_idx
    red = np.einsum(spec, t)
    d = 2 ** len(keep)
    return red.reshape(lead + (d, d))


def _require_two_qubits(rho):
    if rho.shape[-1] != 4 or rho.shape[-2] != 4:
        raise ValueError(f"expected a two-qubit operator, got shape {rho.shape}")


def connected_czz(rho: np.ndarray):
    """``<z z> - <z 1><1 z>`` for a two-qubit state."""
    _require_two_qubits(rho)
    zz = expectation(rho, _pauli_word_cached("zz"))
    z1 = expectation(rho, _pauli_word_cached("z1"))
    z2 = expectation(rho, _pauli_word_cached("1z"))
    return zz - z1 * z2


def purity(rho: np.ndarray):
    """``Q = Tr[rho^2]``."""
    val = np.einsum("...ij,...ji->...", rho, rho).real
    return val if np.ndim(val) else float(val)


def purity_P(rho: np.ndarray):
    """Two-qubit purity rescaled to [0, 1]: ``(4/3)(Tr rho^2 - 1/4)``."""
    _require_two_qubits(rho)
    return 4.0 / 3.0 * (purity(rho) - 0.25)


def _xlogx(p):
    p = np.clip(p, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms


def entropy(rho: np.ndarray):
    """Von Neumann entropy in bits."""
    lam = np.linalg.eigvalsh(rho)
    lam = np.where(lam < 0, 0.0, lam)
    val = -np.sum(_xlogx(lam), axis=-1)
    val = val + 0.0  # normalise -0.0
    return val if np.ndim(val) else float(val)


def mutual_information(rho: np.ndarray):
    """``S(A) + S(B) - S(AB)`` for a two-qubit state, in bits."""
    _require_two_qubits(rho)
    return (
        entropy(partial_trace(rho, [0]))
        + entropy(partial_trace(rho, [1]))
        - entropy(rho)
    )


def relative_entropy(sigma: np.ndarray, rho: np.ndarray) -> float:
    """Quantum relative entropy ``S(sigma || rho)`` in bits.

    Returns ``inf`` when the support of ``sigma`` is not contained in the
    support of ``rho``.
    """
    sigma = np.asarray(sigma, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    ls = np.linalg.eigvalsh(sigma)
    lr, vr = np.linalg.eigh(rho)
    weights = np.einsum("ji,jk,ki->i", vr.conj(), sigma, vr).real
    null = lr <= SUPPORT_TOL
    if np.any(weights[null] > SUPPORT_TOL):
        return float("inf")
    cross = -np.sum(weights[~null] * np.log2(lr[~null]))
    val = float(np.sum(_xlogx(ls)) + cross)
    # round-off can give tiny negatives for sigma == rho
    return max(val, 0.0)


@lru_cache(maxsize=None)
def _twirl_group(mode: str) -> np.ndarray:
    if mode == "zz-pinch":
        words = ["11", "1z", "z1", "zz"]
    elif mode == "bell-twirl":
        words = ["11", "xx", "yy", "zz"]
    elif mode == "ghz-symmetrize":
        # stabiliser group of the GHZ basis, generated by xxx, zz1 and 1zz
        gens = [_pauli_word_cached(w) for w in ("xxx", "zz1", "1zz")]
        ops = []
        for bits in product((0, 1), repeat=3):
            u = np.eye(8, dtype=complex)
            for b, g in zip(bits, gens):
                if b:
                    u = u @ g
            ops.append(u)
        group = np.array(ops)
        group.setflags(write=False)
        return group
    else:
        raise ValueError(f"unknown twirl mode {mode!r}")
    group = np.array([_pauli_word_cached(w) for w in words])
    group.setflags(write=False)
    return group


def twirl(rho: np.ndarray, mode: str) -> np.ndarray:
    """Average ``rho`` over a finite group of local unitaries.

    ``zz-pinch``
        Conjugation by ``{11, 1z, z1, zz}``; the output is diagonal.
    ``bell-twirl``
        Conjugation by ``{11, xx, yy, zz}``; the output is Bell diagonal.
    ``ghz-symmetrize``
        Conjugation by the eight-element stabiliser group of the GHZ basis;
        the output is GHZ diagonal (three qubits).
    """
    rho = np.asarray(rho, dtype=complex)
    group = _twirl_group(mode)
    if rho.shape[-1] != group.shape[-1]:
        raise ValueError(
            f"twirl mode {mode!r} needs dimension {group.shape[-1]}, got {rho.shape[-1]}"
        )
    out = np.einsum("gij,...jk,glk->...il", group, rho, group.conj()) / len(group)
    return out


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def bell_state(which: str = "phi+") -> np.ndarray:
    """Density matrix of one of the four Bell states."""
    s = 1 / np.sqrt(2)
    kets = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    return ket_to_dm(kets[which])


def ghz_state() -> np.ndarray:
    psi = np.zeros(8)
    psi[0] = psi[7] = 1 / np.sqrt(2)
    return ket_to_dm(psi)


def werner_state(p: float) -> np.ndarray:
    """``(1 - p) I/4 + p |psi-><psi-|``."""
    return (1 - p) * np.eye(4) / 4 + p * bell_state("psi-")


@dataclass(frozen=True)
class SampleFamily:
    """Random-state ensemble.

    ``kind`` is one of ``haar-pure``, ``hilbert-schmidt-mixed``,
    ``pure-product`` or ``separable-mixture``; ``mixture_size`` is the number
    of pure product states in a separable mixture.
    """

    kind: str
    n_qubits: int = 2
    mixture_size: int = 16

    KINDS = ("haar-pure", "hilbert-schmidt-mixed", "pure-product", "separable-mixture")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown sample family {self.kind!r}")
        if self.n_qubits not in (1, 2, 3):
            raise ValueError("n_qubits must be 1, 2 or 3")
        if self.mixture_size < 1:
            raise ValueError("mixture_size must be >= 1")


def _as_family(family) -> SampleFamily:
    return family if isinstance(family, SampleFamily) else SampleFamily(family)


def _gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _haar_kets(rng, n, dim):
    psi = _gaussian(rng, (n, dim))
    return psi / np.linalg.norm(psi, axis=-1, keepdims=True)


def _product_kets(rng, n, nq):
    psi = _haar_kets(rng, n, 2)
    for _ in range(nq - 1):
        nxt = _haar_kets(rng, n, 2)
        psi = np.einsum("ni,nj->nij", psi, nxt).reshape(n, -1)
    return psi


def _outer(psi):
    return np.einsum("...i,...j->...ij", psi, psi.conj())


def sample_batch(family, n: int, seed) -> np.ndarray:
    """Draw ``n`` states from ``family``; deterministic in ``seed``.

    Measures: Haar pure states from normalised complex Gaussian vectors;
    mixed states from the Ginibre-induced (Hilbert-Schmidt) measure with a
    square ancilla; separable states as Dirichlet(1, ..., 1) mixtures of
    Haar-random pure product states.
    """
    family = _as_family(family)
    rng = np.random.default_rng(seed)
    dim = 2**family.n_qubits
    if family.kind == "haar-pure":
        return _outer(_haar_kets(rng, n, dim))
    if family.kind == "pure-product":
        return _outer(_product_kets(rng, n, family.n_qubits))
    if family.kind == "hilbert-schmidt-mixed":
        g = _gaussian(rng, (n, dim, dim))
        rho = g @ np.conj(np.swapaxes(g, -1, -2))
        tr = np.trace(rho, axis1=-2, axis2=-1).real
        rho = rho / tr[:, None, None]
        return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    k = family.mixture_size
    w = rng.dirichlet(np.ones(k), size=n)
    kets = _product_kets(rng, n * k, family.n_qubits).reshape(n, k, dim)
    rho = np.einsum("nk,nki,nkj->nij", w, kets, kets.conj())
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def sample(family, seed) -> np.ndarray:
    """One state from ``family``; identical seeds give identical matrices."""
    return sample_batch(family, 1, seed)[0]
