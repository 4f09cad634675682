"""Tensor-product Hilbert space of N qubits and one truncated cavity mode.

Conventions (normative for the whole package and for all serialized output):

* sigma_z|0> = +|0>, sigma_x|0> = |1>.  The sigma_x eigenstates are
  |minus> = (|0> + |1>)/sqrt(2) with eigenvalue +1 and
  |plus>  = (|0> - |1>)/sqrt(2) with eigenvalue -1.
* Basis index = fock_n * 2^N + sum_i bit_i * 2^i: qubit 0 is the least
  significant bit, the cavity index varies slowest.
* Joint operators are therefore kron(cavity_factor, qubit_factor), with the
  qubit factor itself kron(op_{N-1}, ..., op_0).

All values are immutable after construction; every function here is pure.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import SpaceMismatchError, TruncationError, TruncationWarning

__all__ = [
    "HilbertSpace", "StateVector", "DensityOperator", "LinearOperator",
    "qubit_space", "joint_space", "basis_index", "basis_state",
    "embed_qubit_operator", "embed_cavity_operator", "collective_jx",
    "annihilation", "number_operator", "displacement_operator",
    "apply", "expectation", "partial_trace", "fidelity", "operator_distance",
    "PAULI_X", "PAULI_Y", "PAULI_Z", "SIGMA_PLUS", "SIGMA_MINUS",
    "truncation_config",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


PAULI_X = _frozen(np.array([[0, 1], [1, 0]], dtype=complex))
PAULI_Y = _frozen(np.array([[0, -1j], [1j, 0]], dtype=complex))
PAULI_Z = _frozen(np.array([[1, 0], [0, -1]], dtype=complex))
# sigma^+- = (sigma_x +- i sigma_y)/2; sigma^+ maps |1> to |0>.
SIGMA_PLUS = _frozen(np.array([[0, 1], [0, 0]], dtype=complex))
SIGMA_MINUS = _frozen(np.array([[0, 0], [1, 0]], dtype=complex))


@dataclass
class _TruncationConfig:
    """Policy for cavity-displacing operations.

    ``threshold`` bounds the tolerated leaked norm past Fock level
    n_max - 2; with ``error=True`` a violation raises TruncationError
    instead of emitting TruncationWarning.
    """
    threshold: float = 1e-8
    error: bool = False


truncation_config = _TruncationConfig()


def _check_truncation(defect: float, context: str) -> None:
    if defect <= truncation_config.threshold:
        return
    msg = f"{context}: leaked norm {defect:.3e} beyond Fock cutoff guard"
    if truncation_config.error:
        raise TruncationError(msg)
    warnings.warn(msg, TruncationWarning, stacklevel=3)


@dataclass(frozen=True)
class HilbertSpace:
    """N qubits and, optionally, one cavity mode truncated at fock_cutoff."""

    num_qubits: int
    fock_cutoff: int | None = None

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if self.fock_cutoff is not None and self.fock_cutoff < 1:
            raise ValueError("fock_cutoff must be >= 1 when the cavity participates")

    @property
    def has_cavity(self) -> bool:
        return self.fock_cutoff is not None

    @property
    def qubit_dim(self) -> int:
        return 2 ** self.num_qubits

    @property
    def cavity_dim(self) -> int:
        return 1 if self.fock_cutoff is None else self.fock_cutoff + 1

    @property
    def dim(self) -> int:
        return self.qubit_dim * self.cavity_dim

    def qubits_only(self) -> "HilbertSpace":
        return HilbertSpace(self.num_qubits)

    def tensor_dims(self) -> tuple[int, ...]:
        """Per-axis dims for reshaping amplitudes: (cavity?, qubit N-1, ..., qubit 0)."""
        qdims = (2,) * self.num_qubits
        return (self.cavity_dim,) + qdims if self.has_cavity else qdims


def qubit_space(num_qubits: int) -> HilbertSpace:
    return HilbertSpace(num_qubits)


def joint_space(num_qubits: int, fock_cutoff: int) -> HilbertSpace:
    return HilbertSpace(num_qubits, fock_cutoff)


def _as_matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, LinearOperator) else np.asarray(op)


def _require_same_space(a, b) -> None:
    if a.space != b.space:
        raise SpaceMismatchError(f"space mismatch: {a.space} vs {b.space}")


@dataclass(frozen=True)
class StateVector:
    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.shape != (self.space.dim,):
            raise SpaceMismatchError(
                f"amplitudes shape {amp.shape} != ({self.space.dim},)")
        object.__setattr__(self, "amplitudes", _frozen(amp))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.space, self.amplitudes / self.norm())

    def overlap(self, other: "StateVector") -> complex:
        _require_same_space(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(self.space, np.outer(a, a.conj()))


@dataclass(frozen=True)
class DensityOperator:
    space: HilbertSpace
    matrix: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise SpaceMismatchError(f"matrix shape {m.shape} != ({d}, {d})")
        if self.validate:
            herm = np.max(np.abs(m - m.conj().T))
            if herm > 1e-10:
                raise ValueError(f"density matrix not Hermitian (defect {herm:.3e})")
            tr = np.trace(m)
            if abs(tr - 1.0) > 1e-10:
                raise ValueError(f"density matrix trace {tr} != 1")
        object.__setattr__(self, "matrix", _frozen(m))

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


@dataclass(frozen=True)
class LinearOperator:
    """Dense operator with an optional structural tag checked on construction."""

    space: HilbertSpace
    matrix: np.ndarray
    tag: str | None = None
    truncation_defect: float | None = field(default=None, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise SpaceMismatchError(f"matrix shape {m.shape} != ({d}, {d})")
        if self.tag == "hermitian":
            defect = np.max(np.abs(m - m.conj().T))
            if defect > 1e-12:
                raise ValueError(f"hermitian tag violated (defect {defect:.3e})")
        elif self.tag == "unitary":
            defect = np.max(np.abs(m.conj().T @ m - np.eye(d)))
            if defect > 1e-10:
                raise ValueError(f"unitary tag violated (defect {defect:.3e})")
        elif self.tag not in (None, "general"):
            raise ValueError(f"unknown tag {self.tag!r}")
        object.__setattr__(self, "matrix", _frozen(m))

    def dagger(self) -> "LinearOperator":
        return LinearOperator(self.space, self.matrix.conj().T, self.tag,
                              self.truncation_defect)

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            _require_same_space(self, other)
            tag = "unitary" if self.tag == other.tag == "unitary" else None
            return LinearOperator(self.space, self.matrix @ other.matrix, tag)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented


def basis_index(space: HilbertSpace, qubit_bits: Sequence[int], fock_n: int = 0) -> int:
    """Flat index of |qubit_bits, fock_n>; qubit 0 least significant, cavity slowest."""
    bits = list(qubit_bits)
    if len(bits) != space.num_qubits:
        raise ValueError(f"expected {space.num_qubits} bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"bits must be 0 or 1, got {bits}")
    if space.has_cavity:
        if not 0 <= fock_n <= space.fock_cutoff:
            raise ValueError(f"fock_n {fock_n} outside 0..{space.fock_cutoff}")
    elif fock_n != 0:
        raise ValueError("fock_n must be 0 for a qubits-only space")
    return fock_n * space.qubit_dim + sum(b << i for i, b in enumerate(bits))


def basis_state(space: HilbertSpace, qubit_bits: Sequence[int], fock_n: int = 0) -> StateVector:
    amp = np.zeros(space.dim, dtype=complex)
    amp[basis_index(space, qubit_bits, fock_n)] = 1.0
    return StateVector(space, amp)


def _kron_chain(factors: Iterable[np.ndarray]) -> np.ndarray:
    out = None
    for f in factors:
        out = f if out is None else np.kron(out, f)
    return out


def embed_qubit_operator(space: HilbertSpace, qubit_index: int, op2: np.ndarray,
                         tag: str | None = None) -> LinearOperator:
    """Extend a single-qubit operator by identities on all other tensor factors."""
    op2 = np.asarray(op2, dtype=complex)
    if op2.shape != (2, 2):
        raise SpaceMismatchError(f"expected a 2x2 matrix, got {op2.shape}")
    if not 0 <= qubit_index < space.num_qubits:
        raise ValueError(f"qubit_index {qubit_index} outside 0..{space.num_qubits - 1}")
    n = space.num_qubits
    factors = [np.eye(2, dtype=complex)] * (n - 1 - qubit_index) + [op2] \
        + [np.eye(2, dtype=complex)] * qubit_index
    mat = _kron_chain(factors)
    if space.has_cavity:
        mat = np.kron(np.eye(space.cavity_dim, dtype=complex), mat)
    return LinearOperator(space, mat, tag)


def embed_cavity_operator(space: HilbertSpace, op: np.ndarray,
                          tag: str | None = None) -> LinearOperator:
    if not space.has_cavity:
        raise SpaceMismatchError("space has no cavity factor")
    op = np.asarray(op, dtype=complex)
    dc = space.cavity_dim
    if op.shape != (dc, dc):
        raise SpaceMismatchError(f"expected {dc}x{dc}, got {op.shape}")
    return LinearOperator(space, np.kron(op, np.eye(space.qubit_dim, dtype=complex)), tag)


def collective_jx(space: HilbertSpace) -> LinearOperator:
    """Sum of sigma_x over all qubits; eigenvalues -N, -N+2, ..., N."""
    mat = sum(embed_qubit_operator(space, j, PAULI_X).matrix
              for j in range(space.num_qubits))
    return LinearOperator(space, mat, "hermitian")


def annihilation(levels: int) -> np.ndarray:
    """Truncated ladder operator a with a|n> = sqrt(n)|n-1> on `levels` levels."""
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1).astype(complex)


def number_operator(levels: int) -> np.ndarray:
    return np.diag(np.arange(levels, dtype=float)).astype(complex)


def coherent_leak(alpha: complex, fock_cutoff: int) -> float:
    """Poisson-tail norm of a displaced vacuum beyond level fock_cutoff - 2."""
    from scipy.special import gammainc
    lam = abs(alpha) ** 2
    if lam == 0.0:
        return 0.0
    guard = max(fock_cutoff - 1, 1)
    return float(gammainc(guard, lam))


def displacement_matrix(alpha: complex, levels: int) -> np.ndarray:
    """exp(alpha a^dag - conj(alpha) a) on a truncated ladder, exactly unitary."""
    a = annihilation(levels)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    w, v = np.linalg.eigh(1j * gen)  # gen is anti-Hermitian
    return (v * np.exp(-1j * w)) @ v.conj().T


def displacement_operator(space: HilbertSpace, alpha: complex) -> LinearOperator:
    """Cavity displacement embedded on the joint space.

    The reported truncation_defect is the leaked norm of the displaced vacuum
    beyond Fock level n_max - 2; it is compared against the configured
    truncation threshold.
    """
    if not space.has_cavity:
        raise SpaceMismatchError("displacement needs a cavity factor")
    defect = coherent_leak(alpha, space.fock_cutoff)
    _check_truncation(defect, f"displacement_operator(alpha={alpha:.4g})")
    mat = np.kron(displacement_matrix(alpha, space.cavity_dim),
                  np.eye(space.qubit_dim, dtype=complex))
    return LinearOperator(space, mat, "unitary", truncation_defect=defect)


def apply(op: LinearOperator, state: StateVector) -> StateVector:
    _require_same_space(op, state)
    return StateVector(state.space, op.matrix @ state.amplitudes)


def expectation(op, state) -> complex:
    m = _as_matrix(op)
    if isinstance(state, StateVector):
        a = state.amplitudes
        return complex(np.vdot(a, m @ a))
    if isinstance(state, DensityOperator):
        return complex(np.trace(m @ state.matrix))
    raise TypeError(f"expected StateVector or DensityOperator, got {type(state)}")


def _subsystem_axes(space: HilbertSpace, keep) -> tuple[list[int], list[int], HilbertSpace]:
    """Map a keep-set (qubit indices and/or 'cavity') onto tensor axes."""
    keep = {k for k in ([keep] if isinstance(keep, (int, str)) else keep)}
    n = space.num_qubits
    keep_qubits = sorted(k for k in keep if isinstance(k, int))
    keep_cavity = "cavity" in keep
    if keep_cavity and not space.has_cavity:
        raise SpaceMismatchError("cannot keep cavity: space has none")
    if any(not 0 <= q < n for q in keep_qubits):
        raise ValueError(f"qubit index out of range in keep={keep}")
    stray = keep - set(keep_qubits) - ({"cavity"} if keep_cavity else set())
    if stray:
        raise ValueError(f"unknown subsystems in keep: {stray}")
    if not keep_qubits and not keep_cavity:
        raise ValueError("keep must name at least one subsystem")

    off = 1 if space.has_cavity else 0
    axis_of_qubit = {q: off + (n - 1 - q) for q in range(n)}
    # Higher qubit index = lower axis number, so this list is ascending and the
    # kept axes already sit in the package index convention after the trace.
    keep_axes = ([0] if keep_cavity else []) + [axis_of_qubit[q] for q in sorted(keep_qubits, reverse=True)]
    all_axes = list(range(off + n))
    traced_axes = [ax for ax in all_axes if ax not in keep_axes]
    if keep_qubits:
        new_space = HilbertSpace(len(keep_qubits),
                                 space.fock_cutoff if keep_cavity else None)
    else:
        # cavity-only remainder: represent as a 1-qubit-free space is not
        # possible here, so keep the cavity with a dummy structure
        raise ValueError("keeping only the cavity is not supported; keep at least one qubit")
    return keep_axes, traced_axes, new_space


def partial_trace(state, keep) -> DensityOperator:
    """Reduced density operator on the named subsystems.

    ``keep`` is a qubit index, an iterable of qubit indices, optionally
    including the string "cavity".  Kept subsystems retain the package-wide
    index convention among themselves.
    """
    space = state.space
    keep_axes, traced_axes, new_space = _subsystem_axes(space, keep)
    dims = space.tensor_dims()
    d = new_space.dim
    if isinstance(state, StateVector):
        psi = state.amplitudes.reshape(dims)
        rho = np.tensordot(psi, psi.conj(), axes=(traced_axes, traced_axes))
        return DensityOperator(new_space, rho.reshape(d, d))
    if isinstance(state, DensityOperator):
        rho = state.matrix.reshape(dims + dims)
        nax = len(dims)
        for ax in sorted(traced_axes, reverse=True):
            rho = np.trace(rho, axis1=ax, axis2=ax + nax)
            nax -= 1
        return DensityOperator(new_space, rho.reshape(d, d))
    raise TypeError(f"expected StateVector or DensityOperator, got {type(state)}")


def fidelity(x, y) -> float:
    """State fidelity, squared-overlap convention; blind to global phase.

    pure/pure -> |<x|y>|^2, pure/mixed -> <x|rho|x>, mixed/mixed -> Uhlmann
    fidelity squared.
    """
    _require_same_space(x, y)
    xs, ys = isinstance(x, StateVector), isinstance(y, StateVector)
    if xs and ys:
        return float(abs(x.overlap(y)) ** 2)
    if xs or ys:
        psi, rho = (x, y) if xs else (y, x)
        val = np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes).real
        return float(min(max(val, 0.0), 1.0))
    w, v = np.linalg.eigh(x.matrix)
    sqrt_x = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    inner = sqrt_x @ y.matrix @ sqrt_x
    ev = np.linalg.eigvalsh(inner)
    root = np.sum(np.sqrt(np.clip(ev, 0.0, None)))
    return float(min(max(root ** 2, 0.0), 1.0))


def operator_distance(u, v, columns: int | None = None) -> float:
    """Phase-aligned distance 1 - |Tr(U^dag V)| / D; zero iff U = e^{i phi} V.

    With ``columns=c`` the trace runs over the first c basis columns only
    (full-length column inner products).  This restricts a comparison to the
    Fock band that a truncated cavity represents faithfully.
    """
    mu, mv = _as_matrix(u), _as_matrix(v)
    if mu.shape != mv.shape:
        raise SpaceMismatchError(f"shape mismatch {mu.shape} vs {mv.shape}")
    if columns is None:
        columns = mu.shape[1]
    tr = np.sum(np.conj(mu[:, :columns]) * mv[:, :columns])
    return float(1.0 - abs(tr) / columns)
