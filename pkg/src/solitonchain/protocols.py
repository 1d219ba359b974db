"""The three experiments: entangling run, asynchronous injection, generation plus storage."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .chain import ChainSpec, build_basis, build_hamiltonian, decouple_site
from .dynamics import (
    InitialStateSpec,
    PureState,
    diagonalize,
    evolve_amplitudes,
    inject_plus,
    prepare_initial,
    requench,
)
from .entanglement import ReductionPlan, concurrence_many, eof_from_concurrence
from .errors import ParameterError

__all__ = [
    "ProtocolTrace",
    "LocalizedModeReport",
    "chain_mirroring_time",
    "run_entangling",
    "run_async_sweep",
    "run_storage",
    "localized_mode_report",
]

MAX_EXCITATIONS = 2


@dataclass(frozen=True)
class ProtocolTrace:
    """Time series recorded by a protocol run; every value lies in [0, 1]."""

    times: np.ndarray
    fidelity_initial: np.ndarray
    eof: np.ndarray
    fidelity_reference: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("trace time grid must be strictly increasing")
        for arr in (self.times, self.fidelity_initial, self.eof, self.fidelity_reference):
            if arr is not None:
                arr.flags.writeable = False

    def to_csv(self) -> str:
        """Delimited text with 12-significant-digit values, newline terminated."""
        columns = ["t", "fidelity_initial"]
        series = [self.times, self.fidelity_initial]
        if self.fidelity_reference is not None:
            columns.append("fidelity_reference")
            series.append(self.fidelity_reference)
        columns.append("eof")
        series.append(self.eof)
        lines = [",".join(columns)]
        for row in zip(*series):
            lines.append(",".join(format(v, ".12g") for v in row))
        return "\n".join(lines) + "\n"


def chain_mirroring_time(spec: ChainSpec) -> float:
    """Mirroring time of a clean chain from its coupling values.

    Two-value chains (weak/strong) use the closed-form effective coupling; a
    uniformly coupled chain is its own trimer, whose effective coupling is the
    coupling itself.
    """
    values = sorted(set(spec.couplings))
    if not values or values[0] <= 0:
        raise ParameterError("mirroring time needs strictly positive couplings")
    if len(values) == 1:
        eta = values[0]
    elif len(values) == 2:
        eta = analytic.effective_eta(values[1], values[0])
    else:
        raise ParameterError(
            "mirroring time is defined for clean chains with at most two coupling values"
        )
    return analytic.mirroring_time(eta)


def _time_grid(t_max: float, dt: float) -> np.ndarray:
    if dt <= 0 or t_max < 0:
        raise ParameterError(f"need dt > 0 and t_max >= 0, got dt={dt}, t_max={t_max}")
    steps = int(math.floor(t_max / dt + 1e-9))
    return dt * np.arange(steps + 1)


def run_entangling(spec: ChainSpec, t_max: float, dt: float) -> ProtocolTrace:
    """Inject plus states at the A and C defects and record fidelity and EoF."""
    site_a, site_c = spec.defect_pair
    basis = build_basis(spec.n_sites, MAX_EXCITATIONS)
    eig = diagonalize(build_hamiltonian(spec, basis))
    psi0 = prepare_initial(InitialStateSpec(sites=(site_a, site_c)), basis)
    times = _time_grid(t_max, dt)
    amps = evolve_amplitudes(psi0.amplitudes, eig, times)
    fid = np.abs(psi0.amplitudes.conj() @ amps) ** 2
    plan = ReductionPlan(basis, site_a, site_c)
    eofs = eof_from_concurrence(concurrence_many(plan.reduce(amps)))
    try:
        t_m = chain_mirroring_time(spec)
    except ParameterError:
        t_m = None  # disordered input; the nominal time is not defined
    return ProtocolTrace(
        times=times,
        fidelity_initial=fid,
        eof=eofs,
        metadata={"spec": spec.to_dict(), "t_m": t_m, "dt": dt},
    )


def run_async_sweep(
    spec: ChainSpec, delays: list[float] | tuple[float, ...]
) -> tuple[tuple[float, float], ...]:
    """EoF at the nominal mirroring time against the delay of the second injection.

    The A-side plus state goes in at t = 0; the C-side injection is applied as
    a reset channel after a delay of f * t_M, and the resulting branch
    ensemble is evolved to t_M counted from the first injection.
    """
    delays = tuple(float(f) for f in delays)
    if any(not 0.0 <= f <= 0.5 for f in delays):
        raise ParameterError(f"delays must lie in [0, 0.5], got {delays}")
    site_a, site_c = spec.defect_pair
    t_m = chain_mirroring_time(spec)
    basis = build_basis(spec.n_sites, MAX_EXCITATIONS)
    eig = diagonalize(build_hamiltonian(spec, basis))
    psi_a = prepare_initial(InitialStateSpec(sites=(site_a,)), basis)
    plan = ReductionPlan(basis, site_a, site_c)
    rows = []
    for f in delays:
        first_leg = evolve_amplitudes(psi_a.amplitudes, eig, np.array([f * t_m]))[:, 0]
        ensemble = inject_plus(PureState(basis=basis, amplitudes=first_leg), site_c)
        rho = np.zeros((4, 4), dtype=complex)
        for weight, branch in ensemble.branches:
            final = evolve_amplitudes(
                branch.amplitudes, eig, np.array([(1.0 - f) * t_m])
            )[:, 0]
            rho += weight * plan.reduce(final)
        value = eof_from_concurrence(concurrence_many(rho[None, :, :])[0])
        rows.append((f, float(value)))
    return tuple(rows)


def run_storage(spec11: ChainSpec, t_max_after: float, dt: float) -> ProtocolTrace:
    """Entangle, decouple the central defect at t_M, then watch the stored pair.

    Records, over the whole run, fidelity against the initial state, fidelity
    against the state right after the quench, and the EoF of the two midpoint
    sites of the separated half chains (the injection sites A and C).
    """
    site_a, site_c = spec11.defect_pair
    if spec11.site_b is None:
        raise ParameterError("storage protocol needs the central defect site")
    t_m = chain_mirroring_time(spec11)
    basis = build_basis(spec11.n_sites, MAX_EXCITATIONS)
    eig = diagonalize(build_hamiltonian(spec11, basis))
    psi0 = prepare_initial(InitialStateSpec(sites=(site_a, site_c)), basis)

    pre_times = _time_grid(t_m, dt)
    pre_times = pre_times[pre_times < t_m]
    pre_amps = evolve_amplitudes(psi0.amplitudes, eig, pre_times)
    amps_tm = evolve_amplitudes(psi0.amplitudes, eig, np.array([t_m]))[:, 0]

    decoupled = decouple_site(spec11, spec11.site_b)
    new_eig = diagonalize(build_hamiltonian(decoupled, basis))
    requench(PureState(basis=basis, amplitudes=amps_tm), new_eig)
    post_offsets = _time_grid(t_max_after, dt)
    post_amps = evolve_amplitudes(amps_tm, new_eig, post_offsets)

    times = np.concatenate([pre_times, t_m + post_offsets])
    amps = np.concatenate([pre_amps, post_amps], axis=1)
    fid_initial = np.abs(psi0.amplitudes.conj() @ amps) ** 2
    fid_reference = np.abs(amps_tm.conj() @ amps) ** 2
    plan = ReductionPlan(basis, site_a, site_c)
    eofs = eof_from_concurrence(concurrence_many(plan.reduce(amps)))
    return ProtocolTrace(
        times=times,
        fidelity_initial=fid_initial,
        eof=eofs,
        fidelity_reference=fid_reference,
        metadata={
            "spec": spec11.to_dict(),
            "t_m": t_m,
            "dt": dt,
            "quench_time": t_m,
            "t_max_after": t_max_after,
        },
    )


@dataclass(frozen=True)
class LocalizedModeReport:
    """Single-excitation eigenstates of a chain and their site occupations."""

    energies: np.ndarray
    occupations: np.ndarray  # row k: |amplitude|^2 profile of eigenstate k
    zero_index: int

    @property
    def zero_mode_occupations(self) -> np.ndarray:
        return self.occupations[self.zero_index]


def localized_mode_report(half_spec: ChainSpec) -> LocalizedModeReport:
    """Occupation table of the single-excitation eigenstates of a (half) chain.

    Intended for the five-site chains produced by decoupling the storage
    chain's central defect; the zero-energy eigenstate is the storage mode.
    """
    n = half_spec.n_sites
    h1 = np.zeros((n, n))
    h1[np.arange(n), np.arange(n)] = half_spec.onsite
    off = np.array(half_spec.couplings)
    h1[np.arange(n - 1), np.arange(1, n)] = off
    h1[np.arange(1, n), np.arange(n - 1)] = off
    energies, vectors = np.linalg.eigh(h1)
    occupations = (vectors**2).T
    zero_index = int(np.argmin(np.abs(energies)))
    return LocalizedModeReport(
        energies=energies, occupations=occupations, zero_index=zero_index
    )
