"""Composite Hilbert space of N two-level emitters plus one truncated cavity mode.

Each emitter has levels g (no excitation) and e (one excitation); the cavity
is a Fock ladder truncated at an inclusive cutoff.  Basis ordering is fixed:
the emitter configuration is the fast index (emitter 1 = least significant
bit, bit value 1 = e) and the photon number is the slow index, so

    index(bits, photons) = photons * 2**n_emitters + bits.

All values here are immutable after construction and all operations are pure,
so states and operators can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

DEFAULT_DIM_LIMIT = 2**20

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


def parse_config_bits(label: str, n_emitters: int) -> int:
    """Translate an emitter configuration label into its basis integer.

    Accepts '0'/'1' bitstrings as well as 'g'/'e' strings; the first character
    is emitter 1.  '10' and 'eg' both mean emitter 1 excited, emitter 2 ground.
    """
    if len(label) != n_emitters:
        raise ValueError(
            f"configuration {label!r} has {len(label)} characters, expected {n_emitters}"
        )
    bits = 0
    for position, char in enumerate(label):
        if char in ("1", "e"):
            bits |= 1 << position
        elif char not in ("0", "g"):
            raise ValueError(f"configuration {label!r}: bad character {char!r}")
    return bits


def config_label(bits: int, n_emitters: int) -> str:
    """Inverse of :func:`parse_config_bits`, in 'ge' notation."""
    return "".join("e" if bits >> i & 1 else "g" for i in range(n_emitters))


@dataclass(frozen=True)
class CompositeSpace:
    """Indexed basis of (emitter configuration, cavity Fock level).

    A space with ``photon_cutoff == 0`` doubles as the emitter-only space used
    for conditional channels and their eigenvectors.
    """

    n_emitters: int
    photon_cutoff: int

    @property
    def n_configs(self) -> int:
        return 2**self.n_emitters

    @property
    def dim(self) -> int:
        return self.n_configs * (self.photon_cutoff + 1)

    @property
    def ordering(self) -> str:
        return "photon number major, emitter bits minor, emitter 1 = LSB"

    def index(self, bits: int, photons: int) -> int:
        if not 0 <= bits < self.n_configs:
            raise ValueError(f"emitter configuration {bits} out of range")
        if not 0 <= photons <= self.photon_cutoff:
            raise ValueError(
                f"photon number {photons} exceeds cutoff {self.photon_cutoff}"
            )
        return photons * self.n_configs + bits

    def labels(self, index: int) -> tuple[int, int]:
        """Map a basis index back to (emitter bits, photon number)."""
        if not 0 <= index < self.dim:
            raise ValueError(f"basis index {index} out of range")
        return index % self.n_configs, index // self.n_configs

    def total_quanta(self, index: int) -> int:
        bits, photons = self.labels(index)
        return int(bits).bit_count() + photons

    def sector_indices(self) -> dict[int, list[int]]:
        """Partition of the basis into total-quanta sectors."""
        sectors: dict[int, list[int]] = {}
        for index in range(self.dim):
            sectors.setdefault(self.total_quanta(index), []).append(index)
        return sectors

    def emitter_only(self) -> CompositeSpace:
        """The 2^n-dimensional emitter factor, as a cutoff-0 space."""
        return CompositeSpace(self.n_emitters, 0)

    def basis_label(self, index: int) -> str:
        bits, photons = self.labels(index)
        return f"{config_label(bits, self.n_emitters)};{photons}"


def build_space(
    n_emitters: int, photon_cutoff: int, dim_limit: int = DEFAULT_DIM_LIMIT
) -> CompositeSpace:
    """Construct the composite space, guarding against accidental explosion."""
    if n_emitters < 1:
        raise ValueError("need at least one emitter")
    if photon_cutoff < 0:
        raise ValueError("photon cutoff must be non-negative")
    dim = 2**n_emitters * (photon_cutoff + 1)
    if dim > dim_limit:
        raise ConfigurationError(
            f"dimension {dim} exceeds the configured limit {dim_limit}"
        )
    return CompositeSpace(n_emitters, photon_cutoff)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over a composite (or emitter-only) space."""

    space: CompositeSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.shape != (self.space.dim,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected ({self.space.dim},)"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> StateVector:
        norm = self.norm
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.space, self.amplitudes / norm)

    def inner(self, other: StateVector) -> complex:
        """⟨self|other⟩."""
        self._require_same_space(other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def overlap_squared(self, other: StateVector) -> float:
        return abs(self.inner(other)) ** 2

    def _require_same_space(self, other) -> None:
        if other.space != self.space:
            raise ValueError(f"space mismatch: {self.space} vs {other.space}")


def basis_state(space: CompositeSpace, emitter_bits: str, photons: int) -> StateVector:
    """Product state |configuration⟩ ⊗ |photons⟩, e.g. ('10', 0) → |e g; 0⟩."""
    bits = parse_config_bits(emitter_bits, space.n_emitters)
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index(bits, photons)] = 1.0
    return StateVector(space, amps)


def embed_with_photons(
    state: StateVector, space: CompositeSpace, photons: int
) -> StateVector:
    """Tensor an emitter-only state with a Fock state: v ⊗ |photons⟩."""
    if state.space.n_configs != space.n_configs:
        raise ValueError("emitter count mismatch")
    amps = np.zeros(space.dim, dtype=complex)
    start = space.index(0, photons)
    amps[start : start + space.n_configs] = state.amplitudes
    return StateVector(space, amps)


def project_cavity(state: StateVector, photons: int) -> StateVector:
    """Cavity-bra contraction ⟨photons|state⟩, an unnormalized emitter vector.

    The squared norm of the result is the probability of finding the cavity
    in that Fock state.  The zero vector is a valid outcome.
    """
    space = state.space
    start = space.index(0, photons)
    block = state.amplitudes[start : start + space.n_configs]
    return StateVector(space.emitter_only(), block)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex matrix over a space, with verified attestation flags.

    ``hermitian`` and ``unitary`` are measured at construction, never trusted
    from the caller.
    """

    space: CompositeSpace
    matrix: np.ndarray
    hermitian: bool = field(init=False)
    unitary: bool = field(init=False)

    def __post_init__(self):
        mat = _frozen(self.matrix)
        dim = self.space.dim
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix has shape {mat.shape}, expected ({dim}, {dim})")
        object.__setattr__(self, "matrix", mat)
        herm = float(np.max(np.abs(mat - mat.conj().T))) <= HERMITIAN_TOL
        gram = mat.conj().T @ mat
        unit = float(np.max(np.abs(gram - np.eye(dim)))) <= UNITARY_TOL
        object.__setattr__(self, "hermitian", herm)
        object.__setattr__(self, "unitary", unit)

    def apply(self, state: StateVector) -> StateVector:
        if state.space != self.space:
            raise ValueError("operator and state live on different spaces")
        return StateVector(self.space, self.matrix @ state.amplitudes)

    def dagger(self) -> OperatorMatrix:
        return OperatorMatrix(self.space, self.matrix.conj().T)

    def __matmul__(self, other: OperatorMatrix) -> OperatorMatrix:
        if other.space != self.space:
            raise ValueError("operators live on different spaces")
        return OperatorMatrix(self.space, self.matrix @ other.matrix)

    def expectation(self, state: StateVector) -> complex:
        return complex(np.vdot(state.amplitudes, self.matrix @ state.amplitudes))


def ladder_operators(space: CompositeSpace) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Cavity annihilation/creation pair (a, a†), identity on the emitters.

    Truncation means a† annihilates the top Fock level, so [a, a†] = 1 holds
    only strictly below the cutoff.
    """
    levels = space.photon_cutoff + 1
    cavity = np.zeros((levels, levels), dtype=complex)
    for n in range(1, levels):
        cavity[n - 1, n] = np.sqrt(n)
    annihilate = np.kron(cavity, np.eye(space.n_configs))
    return (
        OperatorMatrix(space, annihilate),
        OperatorMatrix(space, annihilate.conj().T),
    )


def emitter_lowering(space: CompositeSpace, emitter_index: int) -> OperatorMatrix:
    """σ⁻ on one emitter (1-based index), identity elsewhere."""
    if not 1 <= emitter_index <= space.n_emitters:
        raise ValueError(
            f"emitter index {emitter_index} out of range 1..{space.n_emitters}"
        )
    bit = 1 << (emitter_index - 1)
    configs = np.zeros((space.n_configs, space.n_configs), dtype=complex)
    for bits in range(space.n_configs):
        if bits & bit:
            configs[bits & ~bit, bits] = 1.0
    full = np.kron(np.eye(space.photon_cutoff + 1), configs)
    return OperatorMatrix(space, full)


def total_excitation_operator(space: CompositeSpace) -> OperatorMatrix:
    """Diagonal N_tot = a†a + Σ σ⁺σ⁻; eigenvalue = total quanta of the basis state."""
    diag = np.array([space.total_quanta(i) for i in range(space.dim)], dtype=complex)
    return OperatorMatrix(space, np.diag(diag))


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state over a space: Hermitian, positive, unit trace."""

    space: CompositeSpace
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.matrix)
        dim = self.space.dim
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix has shape {mat.shape}, expected ({dim}, {dim})")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {np.trace(mat).real!r} is not 1")
        if float(np.min(np.linalg.eigvalsh(mat))) < -POSITIVITY_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_state(cls, state: StateVector) -> DensityMatrix:
        psi = state.normalized().amplitudes
        return cls(state.space, np.outer(psi, psi.conj()))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def expectation_of_projector(self, state: StateVector) -> float:
        """⟨state|ρ|state⟩, clamped against tiny negative numerical residue."""
        if state.space != self.space:
            raise ValueError("state and density matrix live on different spaces")
        psi = state.amplitudes
        value = float(np.real(np.vdot(psi, self.matrix @ psi)))
        if value < -1e-12:
            raise ValueError(f"projector expectation {value} is significantly negative")
        return min(max(value, 0.0), 1.0)
