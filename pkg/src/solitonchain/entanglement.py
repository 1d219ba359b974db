"""Two-site reductions, Wootters concurrence, entanglement of formation, fidelity.

The two-qubit basis of a site pair is ordered (|00>, |01>, |10>, |11>) with the
lower site index first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import Basis
from .dynamics import BranchEnsemble, PureState
from .errors import BasisMismatchError, DomainError, ParameterError

__all__ = [
    "TwoQubitDensity",
    "ReductionPlan",
    "reduce_to_two_sites",
    "concurrence",
    "concurrence_many",
    "eof",
    "eof_from_concurrence",
    "fidelity",
]

_HERMITICITY_TOL = 1e-10
_TRACE_TOL = 1e-10
_PSD_TOL = 1e-10
# spin-flip matrix sigma_y (x) sigma_y in the pair basis; real and involutive
_SIGMA_YY = np.array(
    [[0.0, 0.0, 0.0, -1.0],
     [0.0, 0.0, 1.0, 0.0],
     [0.0, 1.0, 0.0, 0.0],
     [-1.0, 0.0, 0.0, 0.0]]
)


@dataclass(frozen=True)
class TwoQubitDensity:
    """Validated 4x4 density matrix of a site pair."""

    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.shape != (4, 4):
            raise ParameterError(f"two-qubit density must be 4x4, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > _HERMITICITY_TOL:
            raise DomainError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(rho).real - 1.0) > _TRACE_TOL or abs(np.trace(rho).imag) > _TRACE_TOL:
            raise DomainError(f"density matrix trace {np.trace(rho)!r} is not 1")
        if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < -_PSD_TOL:
            raise DomainError("density matrix has a negative eigenvalue beyond tolerance")
        rho.flags.writeable = False
        object.__setattr__(self, "matrix", rho)


class ReductionPlan:
    """Precomputed index map for tracing a basis down to one site pair.

    Basis states sharing the same configuration on the traced-out sites
    contribute coherently; the plan stores, for every such pair of states, the
    flat position in the 4x4 output it accumulates into.
    """

    def __init__(self, basis: Basis, site1: int, site2: int):
        if site1 == site2:
            raise ParameterError("the two reduced sites must be distinct")
        for site in (site1, site2):
            if not 0 <= site < basis.n_sites:
                raise ParameterError(f"site {site} out of range for N={basis.n_sites}")
        lo, hi = min(site1, site2), max(site1, site2)
        self.basis = basis
        self.sites = (lo, hi)
        groups: dict[tuple[int, ...], list[tuple[int, int]]] = {}
        for i, state in enumerate(basis.states):
            occupied = set(state)
            pair = 2 * int(lo in occupied) + int(hi in occupied)
            rest = tuple(s for s in state if s != lo and s != hi)
            groups.setdefault(rest, []).append((pair, i))
        rows, cols, slots = [], [], []
        for members in groups.values():
            for p, i in members:
                for q, j in members:
                    rows.append(i)
                    cols.append(j)
                    slots.append(4 * p + q)
        self._rows = np.array(rows)
        self._cols = np.array(cols)
        # scatter matrix: one column per contributing (ket, bra) pair
        scatter = np.zeros((16, len(rows)))
        scatter[slots, np.arange(len(rows))] = 1.0
        self._scatter = scatter

    def reduce(self, amplitudes: np.ndarray) -> np.ndarray:
        """Partial trace of |psi><psi| for one amplitude vector or a (dim, T) stack.

        Returns a (4, 4) matrix, or a (T, 4, 4) stack for batched input.
        """
        amps = np.asarray(amplitudes, dtype=complex)
        batched = amps.ndim == 2
        if not batched:
            amps = amps[:, None]
        contrib = amps[self._rows, :] * np.conj(amps[self._cols, :])
        rhos = (self._scatter @ contrib).T.reshape(-1, 4, 4)
        return rhos if batched else rhos[0]


def reduce_to_two_sites(
    state: PureState | BranchEnsemble, site1: int, site2: int
) -> TwoQubitDensity:
    """Trace out every site except ``site1`` and ``site2``.

    Ensembles reduce to the weight-averaged sum of their branch reductions.
    """
    if isinstance(state, BranchEnsemble):
        plan = ReductionPlan(state.basis, site1, site2)
        rho = np.zeros((4, 4), dtype=complex)
        for weight, branch in state.branches:
            rho += weight * plan.reduce(branch.amplitudes)
    else:
        plan = ReductionPlan(state.basis, site1, site2)
        rho = plan.reduce(state.amplitudes)
    return TwoQubitDensity(matrix=rho)


def concurrence_many(rhos: np.ndarray, validate: bool = True) -> np.ndarray:
    """Wootters concurrence of a (..., 4, 4) stack of density matrices.

    The lambda_i are the eigenvalue square roots of the Hermitian product
    sqrt(rho) rho~ sqrt(rho); they are evaluated here as the singular values of
    the congruent matrix sqrt(W) V^H (sy x sy) V* sqrt(W) built from the
    spectral decomposition rho = V W V^H, which keeps the small lambdas
    accurate to round-off instead of sqrt(round-off).
    """
    rhos = np.asarray(rhos, dtype=complex)
    w, v = np.linalg.eigh(rhos)
    if validate:
        if np.min(w) < -_PSD_TOL:
            raise DomainError(
                f"density matrix eigenvalue {np.min(w):.3e} below -{_PSD_TOL}"
            )
        traces = np.trace(rhos, axis1=-2, axis2=-1)
        if np.max(np.abs(traces - 1.0)) > _TRACE_TOL:
            raise DomainError("density matrix trace deviates from 1 beyond tolerance")
    root = np.sqrt(np.clip(w, 0.0, None))
    vh = np.conj(np.swapaxes(v, -1, -2))
    core = vh @ _SIGMA_YY @ np.conj(v)
    d = root[..., :, None] * core * root[..., None, :]
    lam = np.linalg.svd(d, compute_uv=False)  # sorted descending
    return np.maximum(lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3], 0.0)


def concurrence(rho: TwoQubitDensity) -> float:
    """Concurrence C = max(lambda_1 - lambda_2 - lambda_3 - lambda_4, 0)."""
    return float(concurrence_many(rho.matrix[None, :, :])[0])


def eof_from_concurrence(c: np.ndarray | float) -> np.ndarray | float:
    """Binary-entropy map from concurrence to entanglement of formation."""
    c_arr = np.asarray(c, dtype=float)
    x = (1.0 + np.sqrt(np.clip(1.0 - c_arr * c_arr, 0.0, None))) / 2.0
    out = np.zeros_like(x)
    interior = (x > 0.0) & (x < 1.0)
    xi = x[interior]
    out[interior] = -xi * np.log2(xi) - (1.0 - xi) * np.log2(1.0 - xi)
    return out if np.ndim(c) else float(out)


def eof(rho: TwoQubitDensity) -> float:
    """Entanglement of formation h((1 + sqrt(1 - C^2)) / 2), h the binary entropy."""
    return eof_from_concurrence(concurrence(rho))


def fidelity(reference: PureState, state: PureState) -> float:
    """Squared overlap |<reference|state>|^2."""
    if reference.basis is not state.basis and reference.basis != state.basis:
        raise BasisMismatchError("fidelity needs both states on the same basis")
    return float(np.abs(np.vdot(reference.amplitudes, state.amplitudes)) ** 2)
