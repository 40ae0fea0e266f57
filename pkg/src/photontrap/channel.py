"""Conditional measurement channel: evolve for τ, then find the cavity in |k⟩.

The channel is the emitter-space contraction K = ⟨k|U(τ)|k⟩.  It is a
contraction (every eigenvalue magnitude ≤ 1); eigenvectors whose eigenvalue
sits on the unit circle are photon-trapping states, invariant under repeated
conditioning.  Repeated successful measurements drive any state with support
on the dominant eigenvector toward it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import HamiltonianSpec, build_tc_hamiltonian, propagator
from .errors import ConfigurationError, ProtocolFailure
from .spaces import CompositeSpace, DensityMatrix, StateVector, build_space
from .states import make_named_state

DEGENERACY_TOL = 1e-8
TRAPPING_TOL = 1e-9
STEP_PROBABILITY_THRESHOLD = 1e-14

# True degeneracies (symmetry-protected pairs) agree to machine precision;
# only those subspaces are safe to re-orthonormalize without breaking the
# eigenvector reconstruction guarantee.
_EXACT_DEGENERACY_SPREAD = 1e-12

_RECONSTRUCTION_TOL = 1e-9

_channel_cache: dict[tuple, "ConditionalChannel"] = {}


@dataclass(frozen=True)
class ConditionalChannel:
    """K = ⟨k|U(τ)|k⟩ acting on the emitter factor."""

    matrix: np.ndarray
    kept_photons: int
    interval: float
    source: HamiltonianSpec

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def n_emitters(self) -> int:
        return self.source.space.n_emitters

    @property
    def emitter_space(self) -> CompositeSpace:
        return self.source.space.emitter_only()

    @property
    def gamma_tau(self) -> float:
        return self.source.coupling * self.interval

    def apply(self, state: StateVector) -> StateVector:
        """⟨k|U(τ)(v ⊗ |k⟩)⟩, generally sub-normalized."""
        if state.space != self.emitter_space:
            raise ValueError("state does not live on the channel's emitter space")
        return StateVector(self.emitter_space, self.matrix @ state.amplitudes)


def channel_spec(
    n_emitters: int,
    kept_photons: int,
    coupling: float = 1.0,
    multipliers: tuple[float, ...] = (),
    photon_cutoff: int | None = None,
) -> HamiltonianSpec:
    """Hamiltonian spec whose cutoff closes the channel's reachable sector."""
    required = n_emitters + kept_photons
    cutoff = required if photon_cutoff is None else photon_cutoff
    return HamiltonianSpec(build_space(n_emitters, cutoff), coupling, multipliers)


def build_channel(
    n_emitters: int,
    kept_photons: int,
    gamma_tau: float,
    multipliers: tuple[float, ...] = (),
    photon_cutoff: int | None = None,
) -> ConditionalChannel:
    """Channel for a dimensionless run: γ = 1, interval = γτ."""
    spec = channel_spec(n_emitters, kept_photons, 1.0, multipliers, photon_cutoff)
    return conditional_channel(spec, gamma_tau, kept_photons)


def measurement_blocks(
    spec: HamiltonianSpec, tau: float, injected_photons: int
) -> list[np.ndarray]:
    """All outcome blocks ⟨k|U(τ)|j⟩ for k = 0..cutoff and fixed injected j.

    Together these form a complete set of Kraus operators on the emitter
    space (Σ_k K_k† K_k = 1), which the verification suite checks.
    """
    space = spec.space
    if not 0 <= injected_photons <= space.photon_cutoff:
        raise ConfigurationError(
            f"injected photon number {injected_photons} exceeds cutoff"
        )
    if space.photon_cutoff < space.n_emitters + injected_photons:
        raise ConfigurationError(
            "photon cutoff cannot contain the reachable sector; increase it to "
            f"at least {space.n_emitters + injected_photons}"
        )
    unitary = propagator(build_tc_hamiltonian(spec), tau, spec).matrix
    nc = space.n_configs
    col = space.index(0, injected_photons)
    return [
        unitary[space.index(0, k) : space.index(0, k) + nc, col : col + nc]
        for k in range(space.photon_cutoff + 1)
    ]


def conditional_channel(
    spec: HamiltonianSpec, tau: float, kept_photons: int
) -> ConditionalChannel:
    """Build (and cache) the conditional channel for one (τ, k) pair.

    The spec's cutoff must close the reachable sector: starting from any
    emitter configuration with k photons, up to n_emitters + k photons can
    appear, so cutoff ≥ n_emitters + kept_photons is required for K to be
    exact on the whole emitter space.
    """
    space = spec.space
    if kept_photons < 0 or kept_photons > space.photon_cutoff:
        raise ConfigurationError(
            f"kept photon number {kept_photons} exceeds cutoff {space.photon_cutoff}"
        )
    required = space.n_emitters + kept_photons
    if space.photon_cutoff < required:
        raise ConfigurationError(
            f"photon cutoff {space.photon_cutoff} cannot contain the reachable "
            f"sector: emitters may deposit up to {space.n_emitters} extra quanta "
            f"on top of the {kept_photons} kept photons, so cutoff ≥ {required} "
            "is needed for an exact channel"
        )
    key = (spec, float(tau), kept_photons)
    cached = _channel_cache.get(key)
    if cached is not None:
        return cached
    unitary = propagator(build_tc_hamiltonian(spec), tau, spec).matrix
    start = space.index(0, kept_photons)
    block = unitary[start : start + space.n_configs, start : start + space.n_configs]
    channel = ConditionalChannel(block, kept_photons, float(tau), spec)
    _channel_cache[key] = channel
    return channel


@dataclass(frozen=True)
class ChannelSpectrum:
    """Full eigensystem of a channel, sorted by descending eigenvalue magnitude.

    ``groups`` lists index tuples of eigenvalues that coincide within the
    grouping tolerance.  If the matrix is defective the Schur fallback is
    used: ``eigenvectors`` then hold an orthonormal Schur basis rather than
    true eigenvectors and ``defective`` is set.
    """

    channel: ConditionalChannel
    eigenvalues: np.ndarray
    eigenvectors: tuple[StateVector, ...]
    groups: tuple[tuple[int, ...], ...]
    defective: bool
    max_residual: float

    def trapping_indices(self, tol: float = TRAPPING_TOL) -> list[int]:
        return [i for i, lam in enumerate(self.eigenvalues) if abs(lam) >= 1.0 - tol]

    def group_of(self, index: int) -> int:
        for group_id, members in enumerate(self.groups):
            if index in members:
                return group_id
        raise ValueError(f"eigenvalue index {index} not grouped")


def _group_indices(eigenvalues: np.ndarray, tol: float) -> tuple[tuple[int, ...], ...]:
    n = len(eigenvalues)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigenvalues[i] - eigenvalues[j]) <= tol:
                parent[find(i)] = find(j)
    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)
    ordered = sorted(clusters.values(), key=min)
    return tuple(tuple(members) for members in ordered)


def channel_spectrum(
    channel: ConditionalChannel, degeneracy_tol: float = DEGENERACY_TOL
) -> ChannelSpectrum:
    """Eigendecompose K, group degeneracies, and verify reconstruction."""
    matrix = channel.matrix
    eigenvalues, vectors = np.linalg.eig(matrix)

    order = np.lexsort((-eigenvalues.imag, -eigenvalues.real, -np.abs(eigenvalues)))
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]

    residuals = np.array(
        [
            np.linalg.norm(matrix @ vectors[:, i] - eigenvalues[i] * vectors[:, i])
            for i in range(len(eigenvalues))
        ]
    )
    defective = bool(np.max(residuals) > _RECONSTRUCTION_TOL)
    if defective:
        # Schur diagonal still gives backward-stable eigenvalues; the Schur
        # basis replaces the unreliable eigenvectors.
        triangular, schur_basis = scipy.linalg.schur(matrix, output="complex")
        eigenvalues = np.diag(triangular).copy()
        order = np.lexsort((-eigenvalues.imag, -eigenvalues.real, -np.abs(eigenvalues)))
        eigenvalues = eigenvalues[order]
        vectors = schur_basis[:, order]
        residuals = np.array(
            [
                np.linalg.norm(matrix @ vectors[:, i] - eigenvalues[i] * vectors[:, i])
                for i in range(len(eigenvalues))
            ]
        )

    groups = _group_indices(eigenvalues, degeneracy_tol)

    if not defective:
        for members in groups:
            if len(members) < 2:
                continue
            spread = max(
                abs(eigenvalues[i] - eigenvalues[j]) for i in members for j in members
            )
            if spread > _EXACT_DEGENERACY_SPREAD:
                continue
            idx = list(members)
            q, _ = np.linalg.qr(vectors[:, idx])
            vectors[:, idx] = q

    space = channel.emitter_space
    states = tuple(
        StateVector(space, vectors[:, i] / np.linalg.norm(vectors[:, i]))
        for i in range(len(eigenvalues))
    )
    return ChannelSpectrum(
        channel=channel,
        eigenvalues=eigenvalues,
        eigenvectors=states,
        groups=groups,
        defective=defective,
        max_residual=float(np.max(residuals)),
    )


def find_trapping_states(
    channel: ConditionalChannel, tol: float = TRAPPING_TOL
) -> list[StateVector]:
    """Eigenvectors whose eigenvalue magnitude is within tol of 1."""
    if not 0.0 < tol <= 1e-3:
        raise ValueError("trapping tolerance must lie in (0, 1e-3]")
    spectrum = channel_spectrum(channel)
    return [spectrum.eigenvectors[i] for i in spectrum.trapping_indices(tol)]


def conditional_step(
    rho: DensityMatrix,
    channel: ConditionalChannel,
    threshold: float = STEP_PROBABILITY_THRESHOLD,
) -> tuple[DensityMatrix, float]:
    """One conditioned evolution-and-measurement round.

    Returns the renormalized post-measurement state and the probability of
    the kept outcome, p = Tr(KρK†).  Raises :class:`ProtocolFailure` when p
    falls below the threshold (the branch is empty; restart the procedure).
    """
    if rho.space != channel.emitter_space:
        raise ValueError("density matrix does not live on the channel's emitter space")
    kmat = channel.matrix
    sigma = kmat @ rho.matrix @ kmat.conj().T
    probability = float(np.trace(sigma).real)
    if probability <= threshold:
        raise ProtocolFailure(probability)
    probability = min(probability, 1.0)
    sigma = (sigma + sigma.conj().T) / (2.0 * probability)
    return DensityMatrix(rho.space, sigma), probability


@dataclass(frozen=True)
class GhzPreservationReport:
    """How the GHZ vector sits in the channel's eigenbasis."""

    gamma_tau: float
    kept_photons: int
    conclusive: bool
    note: str
    eigenvalues: np.ndarray
    overlaps: np.ndarray
    dominant_eigenvalue: complex
    dominant_overlap: float
    max_trapping_overlap: float
    min_distance_to_trapping: float
    preserved: bool


def ghz_preservation_check(
    channel: ConditionalChannel, trapping_tol: float = TRAPPING_TOL
) -> GhzPreservationReport:
    """Test whether conditional measurement can preserve/generate GHZ.

    The check expands GHZ in the channel eigenvectors and reports the
    overlap with every trapping (|λ| on the unit circle) eigenvector.  At
    τ = 0 the channel is the identity and the eigenbasis is arbitrary, so the
    check is flagged inconclusive.
    """
    if channel.n_emitters != 3:
        raise ValueError("GHZ preservation check needs a three-emitter channel")
    spectrum = channel_spectrum(channel)
    ghz = make_named_state("ghz", 3).state
    overlaps = np.array(
        [abs(vec.inner(ghz)) for vec in spectrum.eigenvectors]
    )

    identity_like = bool(
        np.max(np.abs(channel.matrix - np.eye(channel.matrix.shape[0]))) <= 1e-12
    )
    conclusive = not identity_like
    note = "inconclusive at τ=0: identity channel" if identity_like else "ok"

    supported = [i for i, ov in enumerate(overlaps) if ov > 1e-12]
    dominant = max(supported, key=lambda i: abs(spectrum.eigenvalues[i]))
    trapping = spectrum.trapping_indices(trapping_tol)
    max_trap_overlap = max((overlaps[i] for i in trapping), default=0.0)
    if trapping:
        min_distance = min(
            float(np.sqrt(max(0.0, 2.0 - 2.0 * overlaps[i]))) for i in trapping
        )
    else:
        min_distance = float("inf")
    preserved = conclusive and min_distance <= 1e-6

    return GhzPreservationReport(
        gamma_tau=channel.gamma_tau,
        kept_photons=channel.kept_photons,
        conclusive=conclusive,
        note=note,
        eigenvalues=spectrum.eigenvalues,
        overlaps=overlaps,
        dominant_eigenvalue=complex(spectrum.eigenvalues[dominant]),
        dominant_overlap=float(overlaps[dominant]),
        max_trapping_overlap=float(max_trap_overlap),
        min_distance_to_trapping=min_distance,
        preserved=preserved,
    )
