"""Complex linear algebra for multi-photon polarization states.

Conventions, fixed package-wide:

* single-photon basis: H -> 0, V -> 1
* ``n``-photon basis index: photon 1 occupies the most significant bit,
  photon ``n`` the least significant bit
* photons are numbered 1..n in the public API
* circular polarization: ``|R> = (|H> + i|V>)/sqrt(2)``

All values are immutable after construction; every operation returns a
new object, so states and operators are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    BadIndex,
    DimensionMismatch,
    IncompleteProjectorSet,
    NotNormalized,
)

# Algebraic identities must hold to double-precision headroom; user input
# gets the looser tolerance.
ATOL_ALGEBRA = 1e-12
ATOL_INPUT = 1e-9
ATOL_PSD = 1e-10

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# SWAP on two photons in the basis ordering above.
SWAP_2 = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


class BellOutcome(Enum):
    """The four maximally entangled two-photon measurement outcomes."""

    PSI_MINUS = "psi-"
    PSI_PLUS = "psi+"
    PHI_MINUS = "phi-"
    PHI_PLUS = "phi+"


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PureState:
    """Pure polarization state of ``num_photons`` photons."""

    num_photons: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.num_photons < 1:
            raise BadIndex(f"num_photons must be positive, got {self.num_photons}")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (2**self.num_photons,):
            raise DimensionMismatch(
                f"expected {2**self.num_photons} amplitudes for "
                f"{self.num_photons} photons, got {amps.shape[0]}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > ATOL_ALGEBRA:
            raise NotNormalized(f"|amplitudes|^2 = {norm_sq!r}, expected 1")
        object.__setattr__(self, "amplitudes", _freeze(amps))

    @property
    def dim(self) -> int:
        return 2**self.num_photons

    def density(self) -> "DensityOperator":
        """Rank-one density operator ``|psi><psi|``."""
        return DensityOperator(self.num_photons, np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "PureState") -> complex:
        """Inner product ``<self|other>``."""
        if self.num_photons != other.num_photons:
            raise DimensionMismatch("states act on different photon counts")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Mixed polarization state of ``num_photons`` photons."""

    num_photons: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.num_photons < 1:
            raise BadIndex(f"num_photons must be positive, got {self.num_photons}")
        mat = np.asarray(self.matrix, dtype=complex)
        dim = 2**self.num_photons
        if mat.shape != (dim, dim):
            raise DimensionMismatch(f"expected {dim}x{dim} matrix, got {mat.shape}")
        if not np.allclose(mat, mat.conj().T, atol=ATOL_ALGEBRA):
            raise NotNormalized("matrix is not Hermitian")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > ATOL_ALGEBRA:
            raise NotNormalized(f"trace = {tr!r}, expected 1")
        if float(np.linalg.eigvalsh(mat).min()) < -ATOL_PSD:
            raise NotNormalized("matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", _freeze(mat))

    @property
    def dim(self) -> int:
        return 2**self.num_photons


@dataclass(frozen=True, eq=False)
class Operator:
    """Matrix acting on a fixed number of photons (unitary, projector or POVM element)."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatch(f"operator matrix must be square, got {mat.shape}")
        n = int(round(np.log2(mat.shape[0])))
        if 2**n != mat.shape[0]:
            raise DimensionMismatch(f"dimension {mat.shape[0]} is not a power of two")
        object.__setattr__(self, "matrix", _freeze(mat))

    @property
    def num_photons(self) -> int:
        return int(round(np.log2(self.matrix.shape[0])))

    def is_unitary(self, atol: float = ATOL_ALGEBRA) -> bool:
        m = self.matrix
        return bool(np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=atol))

    def is_hermitian(self, atol: float = ATOL_ALGEBRA) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=atol))

    def is_psd(self, atol: float = ATOL_PSD) -> bool:
        if not self.is_hermitian():
            return False
        return bool(np.linalg.eigvalsh(self.matrix).min() >= -atol)


State = Union[PureState, DensityOperator]

_LABEL_AMPLITUDES = {
    "H": (1.0, 0.0),
    "V": (0.0, 1.0),
    "+45": (1 / np.sqrt(2), 1 / np.sqrt(2)),
    "-45": (1 / np.sqrt(2), -1 / np.sqrt(2)),
    "R": (1 / np.sqrt(2), 1j / np.sqrt(2)),
    "L": (1 / np.sqrt(2), -1j / np.sqrt(2)),
}

# Aliases accepted when parsing user input (degrees of linear polarization).
_LABEL_ALIASES = {
    "0": "H",
    "90": "V",
    "45": "+45",
    "D": "+45",
    "A": "-45",
    "circular": "R",
}


@dataclass(frozen=True, eq=False)
class PolarizationSpec:
    """A named or custom single-photon polarization."""

    label: str
    alpha: complex
    beta: complex

    @classmethod
    def from_label(cls, label: str) -> "PolarizationSpec":
        key = _LABEL_ALIASES.get(label, label)
        if key not in _LABEL_AMPLITUDES:
            raise NotNormalized(f"unknown polarization label {label!r}")
        a, b = _LABEL_AMPLITUDES[key]
        return cls(key, complex(a), complex(b))

    @classmethod
    def custom(cls, alpha: complex, beta: complex) -> "PolarizationSpec":
        state = make_qubit(alpha, beta)
        return cls("custom", complex(state.amplitudes[0]), complex(state.amplitudes[1]))

    @classmethod
    def parse(cls, text: str) -> "PolarizationSpec":
        """Parse a CLI/config polarization: a label or an ``alpha,beta`` pair.

        Complex components accept ``i`` or ``j`` as the imaginary unit,
        e.g. ``"0.6,0.8i"``.
        """
        text = text.strip()
        if "," not in text:
            return cls.from_label(text)
        parts = text.split(",")
        if len(parts) != 2:
            raise NotNormalized(f"expected 'alpha,beta', got {text!r}")
        try:
            alpha, beta = (complex(p.strip().replace("i", "j")) for p in parts)
        except ValueError as exc:
            raise NotNormalized(f"cannot parse amplitudes from {text!r}") from exc
        return cls.custom(alpha, beta)

    def state(self) -> PureState:
        """The normalized single-photon state this spec resolves to."""
        return make_qubit(self.alpha, self.beta)

    def orthogonal(self) -> "PolarizationSpec":
        """The polarization orthogonal to this one."""
        return PolarizationSpec(
            "custom", -complex(self.beta).conjugate(), complex(self.alpha).conjugate()
        )

    def __str__(self) -> str:
        if self.label != "custom":
            return self.label
        return f"{self.alpha:.6g},{self.beta:.6g}"


def make_qubit(alpha: complex, beta: complex) -> PureState:
    """Single-photon state ``alpha|H> + beta|V>``.

    Raises NotNormalized unless ``|alpha|^2 + |beta|^2 = 1`` within 1e-9;
    the stored amplitudes are renormalized exactly.
    """
    norm_sq = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm_sq - 1.0) > ATOL_INPUT:
        raise NotNormalized(f"|alpha|^2 + |beta|^2 = {norm_sq!r}, expected 1")
    amps = np.array([alpha, beta], dtype=complex) / np.sqrt(norm_sq)
    return PureState(1, amps)


_BELL_VECTORS = {
    BellOutcome.PSI_MINUS: np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),
    BellOutcome.PSI_PLUS: np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),
    BellOutcome.PHI_MINUS: np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2),
    BellOutcome.PHI_PLUS: np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2),
}


def bell_state(kind: BellOutcome) -> PureState:
    """One of the four maximally entangled two-photon states."""
    return PureState(2, _BELL_VECTORS[kind])


def bell_projectors() -> list[Operator]:
    """Rank-one projectors onto the Bell basis, ordered as ``BellOutcome``."""
    return [projector(bell_state(kind)) for kind in BellOutcome]


def projector(state: PureState) -> Operator:
    """Rank-one projector ``|psi><psi|``."""
    return Operator(np.outer(state.amplitudes, state.amplitudes.conj()))


def tensor(a: State, b: State) -> State:
    """Kronecker product; ``a``'s photons come first in the combined index."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(a.num_photons + b.num_photons, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(a.num_photons + b.num_photons, np.kron(a.matrix, b.matrix))
    raise DimensionMismatch("tensor requires two PureStates or two DensityOperators")


def partial_trace(rho: DensityOperator, keep: Iterable[int]) -> DensityOperator:
    """Reduced state on the kept photons (1-based indices, order preserved ascending)."""
    keep_set = sorted(set(int(k) for k in keep))
    n = rho.num_photons
    if not keep_set:
        raise BadIndex("keep set must not be empty")
    if keep_set[0] < 1 or keep_set[-1] > n:
        raise BadIndex(f"photon indices must lie in 1..{n}, got {keep_set}")
    reduced = partial_trace_matrix(rho.matrix, n, [k - 1 for k in keep_set])
    return DensityOperator(len(keep_set), reduced)


def partial_trace_matrix(matrix: np.ndarray, num_photons: int, keep0: Sequence[int]) -> np.ndarray:
    """Partial trace on a raw ``2^n x 2^n`` array over 0-based kept positions."""
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGH"
    row = list(letters[:num_photons])
    col = list(letters[num_photons : 2 * num_photons])
    for d in range(num_photons):
        if d not in keep0:
            col[d] = row[d]
    out = "".join(row[d] for d in keep0) + "".join(col[d] for d in keep0)
    tensor_form = matrix.reshape((2,) * (2 * num_photons))
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, tensor_form)
    k = len(keep0)
    return reduced.reshape(2**k, 2**k)


def embed_operator(matrix: np.ndarray, num_photons: int, targets: Sequence[int]) -> np.ndarray:
    """Expand an operator on ``targets`` (1-based, ordered) to the full space."""
    targets0 = [t - 1 for t in targets]
    if any(t < 0 or t >= num_photons for t in targets0):
        raise BadIndex(f"targets {list(targets)} outside 1..{num_photons}")
    if len(set(targets0)) != len(targets0):
        raise BadIndex("duplicate target photon")
    k = len(targets0)
    if matrix.shape != (2**k, 2**k):
        raise DimensionMismatch(f"operator shape {matrix.shape} does not match {k} targets")
    rest = [d for d in range(num_photons) if d not in targets0]
    full = np.kron(matrix, np.eye(2 ** len(rest), dtype=complex))
    # kron ordering is (targets..., rest...); permute back to photon order
    order = targets0 + rest
    inv = np.argsort(order)
    tensor_form = full.reshape((2,) * (2 * num_photons))
    perm = list(inv) + [num_photons + i for i in inv]
    return tensor_form.transpose(perm).reshape(2**num_photons, 2**num_photons)


def measure_projective(
    state: State, projectors: Sequence[Operator], rng: np.random.Generator
) -> tuple[int, State, float]:
    """Sample a projective measurement with Born probabilities.

    Returns ``(outcome index, collapsed state, outcome probability)``. The
    projectors must resolve the identity within 1e-10.
    """
    mats = [np.asarray(p.matrix, dtype=complex) for p in projectors]
    dim = state.dim
    if any(m.shape != (dim, dim) for m in mats):
        raise DimensionMismatch("projector dimensions do not match the state")
    if not np.allclose(sum(mats), np.eye(dim), atol=1e-10):
        raise IncompleteProjectorSet("projectors do not sum to the identity")

    if isinstance(state, PureState):
        psi = state.amplitudes
        probs = np.array([float(np.vdot(psi, m @ psi).real) for m in mats])
    else:
        probs = np.array([float(np.trace(m @ state.matrix).real) for m in mats])
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    outcome = int(rng.choice(len(mats), p=probs))
    p = float(probs[outcome])

    if isinstance(state, PureState):
        collapsed_vec = mats[outcome] @ state.amplitudes
        collapsed: State = PureState(state.num_photons, collapsed_vec / np.sqrt(p))
    else:
        m = mats[outcome]
        collapsed = DensityOperator(state.num_photons, m @ state.matrix @ m.conj().T / p)
    return outcome, collapsed, p


def fidelity(rho: State, target: PureState) -> float:
    """Overlap ``<target|rho|target>`` of a state with a pure target."""
    if rho.num_photons != target.num_photons:
        raise DimensionMismatch("state and target act on different photon counts")
    t = target.amplitudes
    if isinstance(rho, PureState):
        return float(abs(np.vdot(t, rho.amplitudes)) ** 2)
    return float(np.vdot(t, rho.matrix @ t).real)
