"""Resonant multi-emitter/single-mode dynamics.

The interaction Hamiltonian is the rotating-wave, all-resonant form

    H = γ Σ_n m_n (a σ_n⁺ + a† σ_n⁻),      ħ = 1,

with per-emitter multipliers m_n (all 1 by default; perturbing one breaks the
trapping state on purpose, which the verification suite exploits).  H commutes
with the total-excitation operator, so evolution is block-diagonal in the
total-quanta sectors.

Propagators are computed by Hermitian eigendecomposition, U = V e^{-iΛt} V†,
which is exact to machine precision at these dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import CompositeSpace, OperatorMatrix, StateVector, emitter_lowering, ladder_operators


@dataclass(frozen=True)
class HamiltonianSpec:
    """Coupling layout for one space: overall γ plus per-emitter multipliers."""

    space: CompositeSpace
    coupling: float = 1.0
    multipliers: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.coupling > 0:
            raise ValueError("coupling must be positive")
        mults = self.multipliers or (1.0,) * self.space.n_emitters
        mults = tuple(float(m) for m in mults)
        if len(mults) != self.space.n_emitters:
            raise ValueError(
                f"{len(mults)} multipliers for {self.space.n_emitters} emitters"
            )
        object.__setattr__(self, "multipliers", mults)


def build_tc_hamiltonian(spec: HamiltonianSpec) -> OperatorMatrix:
    """Assemble H from ladder and lowering operators; result is Hermitian."""
    space = spec.space
    a, a_dag = ladder_operators(space)
    total = np.zeros((space.dim, space.dim), dtype=complex)
    for n in range(1, space.n_emitters + 1):
        sigma_minus = emitter_lowering(space, n).matrix
        sigma_plus = sigma_minus.conj().T
        total += spec.multipliers[n - 1] * (a.matrix @ sigma_plus + a_dag.matrix @ sigma_minus)
    return OperatorMatrix(space, spec.coupling * total)


@dataclass(frozen=True)
class Propagator:
    """U = exp(-iHt) with its provenance."""

    operator: OperatorMatrix
    time: float
    source: HamiltonianSpec | None = None

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    def apply(self, state: StateVector) -> StateVector:
        return self.operator.apply(state)


def propagator(
    hamiltonian: OperatorMatrix, t: float, source: HamiltonianSpec | None = None
) -> Propagator:
    """Exact unitary evolution operator for a Hermitian generator."""
    if not hamiltonian.hermitian:
        raise ValueError("propagator requires a Hermitian generator")
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(hamiltonian.matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - not expected here
        raise np.linalg.LinAlgError(f"eigendecomposition failed: {exc}") from exc
    phases = np.exp(-1j * eigenvalues * t)
    unitary = (eigenvectors * phases) @ eigenvectors.conj().T
    return Propagator(OperatorMatrix(hamiltonian.space, unitary), t, source)


def evolve(state: StateVector, hamiltonian: OperatorMatrix, t: float) -> StateVector:
    """Apply U(t) to a state; norm and total excitation are preserved."""
    if state.space != hamiltonian.space:
        raise ValueError("state and Hamiltonian live on different spaces")
    return propagator(hamiltonian, t).apply(state)
