"""Named emitter states: the entangled targets and their companions.

All constructors work in the physical g/e basis (g = no excitation).  Labels:

    singlet        (|eg⟩ - |ge⟩)/√2, two emitters
    w              (|egg⟩ + |geg⟩ + |gge⟩)/√3
    ghz            (|ggg⟩ - |eee⟩)/√2
    t1 .. t4       the zero-sum one- and two-excitation combinations that
                   span the degenerate channel subspaces for three emitters
    product:BITS   a bare configuration, e.g. product:100 or product:egg
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import CompositeSpace, DensityMatrix, StateVector, basis_state, build_space

PRODUCT_PREFIX = "product:"

_THREE_EMITTER_PATTERNS = {
    # label -> list of (configuration, unnormalized amplitude)
    "w": [("egg", 1.0), ("geg", 1.0), ("gge", 1.0)],
    "ghz": [("ggg", 1.0), ("eee", -1.0)],
    "t1": [("egg", 1.0), ("gge", -1.0)],
    "t2": [("egg", 1.0), ("geg", -2.0), ("gge", 1.0)],
    "t3": [("gee", 1.0), ("eeg", -1.0)],
    "t4": [("gee", 1.0), ("ege", -2.0), ("eeg", 1.0)],
}


@dataclass(frozen=True)
class NamedState:
    label: str
    n_emitters: int
    state: StateVector


def _from_pattern(space: CompositeSpace, pattern) -> StateVector:
    amps = np.zeros(space.dim, dtype=complex)
    for config, weight in pattern:
        amps += weight * basis_state(space, config, 0).amplitudes
    return StateVector(space, amps / np.linalg.norm(amps))


def make_named_state(label: str, n_emitters: int) -> NamedState:
    """Build a labelled emitter state on the emitter-only space."""
    space = build_space(n_emitters, 0)
    if label.startswith(PRODUCT_PREFIX):
        config = label[len(PRODUCT_PREFIX) :]
        return NamedState(label, n_emitters, basis_state(space, config, 0))
    if label == "singlet":
        if n_emitters != 2:
            raise ValueError("singlet needs exactly 2 emitters")
        return NamedState(label, 2, _from_pattern(space, [("eg", 1.0), ("ge", -1.0)]))
    if label in _THREE_EMITTER_PATTERNS:
        if n_emitters != 3:
            raise ValueError(f"{label} needs exactly 3 emitters")
        return NamedState(label, 3, _from_pattern(space, _THREE_EMITTER_PATTERNS[label]))
    raise ValueError(f"unknown state label {label!r}")


def fidelity(rho: DensityMatrix, target: NamedState) -> float:
    """⟨target|ρ|target⟩ in [0, 1]."""
    return rho.expectation_of_projector(target.state)
