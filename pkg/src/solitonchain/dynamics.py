"""State preparation, exact propagation and the injection channel.

Propagation is by full eigendecomposition: chain blocks are at most 67
dimensional, so exp(-iHt) applied through the spectral form is exact to
round-off at arbitrary times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import Basis, HamiltonianMatrix
from .errors import BasisMismatchError, CapacityError, NumericalError, ParameterError

__all__ = [
    "EigenDecomposition",
    "PureState",
    "BranchEnsemble",
    "InitialStateSpec",
    "diagonalize",
    "prepare_initial",
    "evolve",
    "evolve_amplitudes",
    "inject_plus",
    "requench",
]

_NORM_TOL = 1e-10
# branches (or overflow amplitude mass) below this weight are numerical dust
_WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and orthonormal eigenvector columns of a Hamiltonian."""

    basis: Basis
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues.flags.writeable = False
        self.eigenvectors.flags.writeable = False


@dataclass(frozen=True)
class PureState:
    """Normalized complex amplitude vector over an occupation basis."""

    basis: Basis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.size,):
            raise ParameterError(
                f"amplitude vector of length {amps.shape} does not match basis "
                f"size {self.basis.size}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ParameterError(f"state norm {norm!r} deviates from 1 beyond tolerance")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class BranchEnsemble:
    """Weighted pure states representing a low-rank mixed state."""

    branches: tuple[tuple[float, PureState], ...]

    def __post_init__(self):
        if not self.branches:
            raise ParameterError("ensemble needs at least one branch")
        weights = [w for w, _ in self.branches]
        if any(w <= 0 for w in weights):
            raise ParameterError(f"branch weights must be positive, got {weights}")
        if abs(sum(weights) - 1.0) > _NORM_TOL:
            raise ParameterError(f"branch weights sum to {sum(weights)!r}, not 1")
        basis = self.branches[0][1].basis
        if any(s.basis is not basis for _, s in self.branches):
            raise BasisMismatchError("ensemble branches live on different bases")

    @property
    def basis(self) -> Basis:
        return self.branches[0][1].basis


@dataclass(frozen=True)
class InitialStateSpec:
    """Product injection of qubit states at one or two sites.

    For two sites the four ``amplitudes`` weight (both empty, first excited,
    second excited, both excited); for a single site the two weight (empty,
    excited).  The default all-ones tuple is the plus-state injection.
    """

    sites: tuple[int, ...]
    amplitudes: tuple[complex, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        if len(set(self.sites)) != len(self.sites):
            raise ParameterError(f"injection sites must be distinct, got {self.sites}")
        if not 1 <= len(self.sites) <= 2:
            raise ParameterError("injection supports one or two sites")
        amps = self.amplitudes
        if amps is None:
            amps = (1.0,) * (2 ** len(self.sites))
        amps = tuple(complex(a) for a in amps)
        if len(amps) != 2 ** len(self.sites):
            raise ParameterError(
                f"{len(self.sites)}-site injection needs {2 ** len(self.sites)} "
                f"amplitudes, got {len(amps)}"
            )
        if not any(a != 0 for a in amps):
            raise ParameterError("injection amplitudes are all zero")
        object.__setattr__(self, "amplitudes", amps)


def diagonalize(h: HamiltonianMatrix) -> EigenDecomposition:
    """Eigendecompose block by block, then merge to globally ascending order.

    Working per excitation block keeps eigenvectors exactly confined to their
    block even where eigenvalues are degenerate across blocks.
    """
    dim = h.basis.size
    eigenvalues = np.empty(dim)
    eigenvectors = np.zeros((dim, dim))
    for sl in h.basis.block_slices:
        try:
            w, v = np.linalg.eigh(h.matrix[sl, sl])
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"eigensolver failed on excitation block {sl} of a "
                f"{dim}x{dim} chain Hamiltonian"
            ) from exc
        eigenvalues[sl] = w
        eigenvectors[sl, sl] = v
    order = np.argsort(eigenvalues, kind="stable")
    return EigenDecomposition(
        basis=h.basis,
        eigenvalues=eigenvalues[order],
        eigenvectors=eigenvectors[:, order],
    )


def prepare_initial(spec: InitialStateSpec, basis: Basis) -> PureState:
    """Place the product injection on an otherwise empty chain."""
    for site in spec.sites:
        if not 0 <= site < basis.n_sites:
            raise ParameterError(f"site {site} out of range for N={basis.n_sites}")
    if len(spec.sites) > basis.max_excitations:
        raise CapacityError(
            f"injecting {len(spec.sites)} qubits exceeds the "
            f"{basis.max_excitations}-excitation basis cap"
        )
    amps = np.zeros(basis.size, dtype=complex)
    for config, value in enumerate(spec.amplitudes):
        # config bit k set <=> k-th injection site excited, so the amplitude
        # order is (vacuum, first site, second site, both) as documented
        excited = tuple(sorted(s for k, s in enumerate(spec.sites) if config & (1 << k)))
        amps[basis.index[excited]] = value
    amps /= np.linalg.norm(amps)
    return PureState(basis=basis, amplitudes=amps)


def evolve_amplitudes(amplitudes: np.ndarray, eig: EigenDecomposition, times: np.ndarray) -> np.ndarray:
    """Propagate raw amplitudes to every time in ``times``; returns (dim, n_times)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    coeffs = eig.eigenvectors.T @ np.asarray(amplitudes, dtype=complex)
    phases = np.exp(-1j * np.outer(eig.eigenvalues, times))
    return eig.eigenvectors @ (phases * coeffs[:, None])


def evolve(state: PureState, eig: EigenDecomposition, t: float) -> PureState:
    """Return exp(-iHt) applied to ``state`` in the spectral form of ``eig``."""
    if state.basis is not eig.basis and state.basis != eig.basis:
        raise BasisMismatchError("state and eigendecomposition use different bases")
    amps = evolve_amplitudes(state.amplitudes, eig, np.array([t]))[:, 0]
    return PureState(basis=state.basis, amplitudes=amps)


def inject_plus(state: PureState, site: int) -> BranchEnsemble:
    """Reset channel: measure ``site`` in the occupation basis, re-set it to a plus state.

    For each outcome s the branch keeps the projected chain state with the
    site qubit replaced by (|0> + |1>)/sqrt(2); its weight is the outcome
    population.  Branches below the weight floor are dropped.
    """
    basis = state.basis
    if not 0 <= site < basis.n_sites:
        raise ParameterError(f"site {site} out of range for N={basis.n_sites}")
    index = basis.index
    branch_amps = {0: np.zeros(basis.size, dtype=complex),
                   1: np.zeros(basis.size, dtype=complex)}
    weights = {0: 0.0, 1: 0.0}
    overflow = 0.0
    inv_sqrt2 = 2.0**-0.5
    for i, config in enumerate(basis.states):
        a = state.amplitudes[i]
        if a == 0:
            continue
        occupied = site in config
        outcome = int(occupied)
        weights[outcome] += abs(a) ** 2
        without = tuple(s for s in config if s != site)
        if occupied:
            branch_amps[1][index[without]] += a * inv_sqrt2
            branch_amps[1][i] += a * inv_sqrt2
        else:
            if len(config) + 1 > basis.max_excitations:
                # component that cannot host the re-set qubit
                overflow += abs(a) ** 2
                continue
            with_site = tuple(sorted(config + (site,)))
            branch_amps[0][i] += a * inv_sqrt2
            branch_amps[0][index[with_site]] += a * inv_sqrt2
    if overflow > _WEIGHT_FLOOR:
        raise CapacityError(
            f"injection at site {site} would push weight {overflow:.3e} above the "
            f"{basis.max_excitations}-excitation cap"
        )
    branches = []
    for outcome in (0, 1):
        w = weights[outcome]
        if w < _WEIGHT_FLOOR:
            continue
        amps = branch_amps[outcome] / np.linalg.norm(branch_amps[outcome])
        branches.append((w, PureState(basis=basis, amplitudes=amps)))
    total = sum(w for w, _ in branches)
    branches = tuple((w / total, s) for w, s in branches)
    return BranchEnsemble(branches=branches)


def requench(obj: PureState | BranchEnsemble, new_eig: EigenDecomposition):
    """Carry a state across a sudden Hamiltonian change.

    Under the sudden approximation the amplitudes are unchanged at the quench
    instant; the caller simply evolves with ``new_eig`` afterwards.  This
    checks basis compatibility and returns the object unchanged.
    """
    if obj.basis is not new_eig.basis and obj.basis != new_eig.basis:
        raise BasisMismatchError("quench must preserve the basis")
    return obj
