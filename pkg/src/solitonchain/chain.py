"""Chain specifications, occupation bases and Hamiltonian matrices.

A chain is a line of two-level sites with nearest-neighbour exchange
couplings.  Excitation number is conserved, so matrices are built over an
occupation basis truncated at a maximum excitation count (two is enough for
every protocol in this package) and are block diagonal by excitation count.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from functools import cached_property
from math import comb

import numpy as np

from .errors import ParameterError
from .rng import SplitMix64

__all__ = [
    "ChainSpec",
    "Basis",
    "HamiltonianMatrix",
    "build_abc_chain",
    "build_storage_chain",
    "build_basis",
    "build_hamiltonian",
    "apply_diagonal_disorder",
    "apply_offdiagonal_disorder",
    "decouple_site",
]


@dataclass(frozen=True)
class ChainSpec:
    """Couplings, on-site energies and defect-site bookkeeping of one chain.

    Energies are in units of the strong coupling, time in its inverse.
    Instances are immutable; the disorder operations return modified copies.
    """

    n_sites: int
    couplings: tuple[float, ...]
    onsite: tuple[float, ...]
    site_a: int | None = None
    site_b: int | None = None
    site_c: int | None = None

    def __post_init__(self):
        if self.n_sites < 1:
            raise ParameterError(f"n_sites must be >= 1, got {self.n_sites}")
        object.__setattr__(self, "couplings", tuple(float(j) for j in self.couplings))
        object.__setattr__(self, "onsite", tuple(float(e) for e in self.onsite))
        if len(self.couplings) != self.n_sites - 1:
            raise ParameterError(
                f"need {self.n_sites - 1} couplings for {self.n_sites} sites, "
                f"got {len(self.couplings)}"
            )
        if len(self.onsite) != self.n_sites:
            raise ParameterError(
                f"need {self.n_sites} on-site energies, got {len(self.onsite)}"
            )
        for name in ("site_a", "site_b", "site_c"):
            site = getattr(self, name)
            if site is not None and not 0 <= site < self.n_sites:
                raise ParameterError(f"{name}={site} out of range for N={self.n_sites}")
        present = [s for s in (self.site_a, self.site_b, self.site_c) if s is not None]
        if any(a >= b for a, b in zip(present, present[1:])):
            raise ParameterError(f"defect sites must be strictly ordered, got {present}")

    @property
    def defect_pair(self) -> tuple[int, int]:
        """The (A, C) injection sites; raises if the chain does not define them."""
        if self.site_a is None or self.site_c is None:
            raise ParameterError("chain has no A/C defect sites")
        return self.site_a, self.site_c

    def mirrored(self) -> "ChainSpec":
        """Relabel sites i -> N-1-i (used to assert mirror-symmetry properties)."""
        flip = lambda s: None if s is None else self.n_sites - 1 - s
        a, b, c = flip(self.site_c), flip(self.site_b), flip(self.site_a)
        return ChainSpec(
            n_sites=self.n_sites,
            couplings=self.couplings[::-1],
            onsite=self.onsite[::-1],
            site_a=a,
            site_b=b,
            site_c=c,
        )

    def to_dict(self) -> dict:
        doc = {
            "n_sites": self.n_sites,
            "couplings": list(self.couplings),
            "onsite": list(self.onsite),
        }
        for name in ("site_a", "site_b", "site_c"):
            site = getattr(self, name)
            if site is not None:
                doc[name] = site
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ChainSpec":
        known = {"n_sites", "couplings", "onsite", "site_a", "site_b", "site_c"}
        unknown = set(doc) - known
        if unknown:
            raise ParameterError(f"unknown ChainSpec fields: {sorted(unknown)}")
        return cls(
            n_sites=doc["n_sites"],
            couplings=tuple(doc["couplings"]),
            onsite=tuple(doc["onsite"]),
            site_a=doc.get("site_a"),
            site_b=doc.get("site_b"),
            site_c=doc.get("site_c"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        return cls.from_dict(json.loads(text))


def _check_coupling_pair(delta: float, big_delta: float) -> None:
    if not 0 < delta < big_delta:
        raise ParameterError(
            f"need 0 < delta < big_delta, got delta={delta}, big_delta={big_delta}"
        )


def build_abc_chain(extension_m: int, delta: float, big_delta: float) -> ChainSpec:
    """Chain with three defects A, B, C: ends plus centre, N = 7 + 4m sites.

    Every defect touches only weak (delta) bonds; strong (big_delta) bonds form
    dimers between them.  Each extension step inserts one dimer on each side of
    the central defect, keeping the chain mirror symmetric.
    """
    _check_coupling_pair(delta, big_delta)
    if extension_m < 0:
        raise ParameterError(f"extension_m must be >= 0, got {extension_m}")
    m = int(extension_m)
    half = [delta] + [big_delta, delta] * (m + 1)
    couplings = half + half[::-1]
    n = 7 + 4 * m
    return ChainSpec(
        n_sites=n,
        couplings=tuple(couplings),
        onsite=(0.0,) * n,
        site_a=0,
        site_b=(n - 1) // 2,
        site_c=n - 1,
    )


def build_storage_chain(delta: float, big_delta: float) -> ChainSpec:
    """Eleven-site chain whose three defects are fully embedded between dimers.

    Decoupling the central defect leaves two identical five-site chains, each
    hosting one strongly localized zero-energy mode at its midpoint.
    """
    _check_coupling_pair(delta, big_delta)
    d, dd = delta, big_delta
    return ChainSpec(
        n_sites=11,
        couplings=(dd, d, d, dd, d, d, dd, d, d, dd),
        onsite=(0.0,) * 11,
        site_a=2,
        site_b=5,
        site_c=8,
    )


@dataclass(frozen=True)
class Basis:
    """Occupation basis with at most ``max_excitations`` excited sites.

    States are ordered by ascending excitation count, then lexicographically by
    the tuple of excited site indices; the vacuum is index 0.
    """

    n_sites: int
    max_excitations: int
    states: tuple[tuple[int, ...], ...]

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {state: i for i, state in enumerate(self.states)}

    @cached_property
    def block_slices(self) -> tuple[slice, ...]:
        """Contiguous index ranges of the fixed-excitation-count blocks."""
        slices = []
        start = 0
        for k in range(self.max_excitations + 1):
            size = comb(self.n_sites, k)
            slices.append(slice(start, start + size))
            start += size
        return tuple(slices)

    @property
    def size(self) -> int:
        return len(self.states)


def build_basis(n_sites: int, max_excitations: int) -> Basis:
    if n_sites < 1:
        raise ParameterError(f"n_sites must be >= 1, got {n_sites}")
    if not 0 <= max_excitations <= n_sites:
        raise ParameterError(
            f"max_excitations must be in [0, {n_sites}], got {max_excitations}"
        )
    states = []
    for k in range(max_excitations + 1):
        states.extend(itertools.combinations(range(n_sites), k))
    return Basis(n_sites=n_sites, max_excitations=max_excitations, states=tuple(states))


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense real symmetric matrix over a Basis, block diagonal by excitation count."""

    basis: Basis
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (self.basis.size, self.basis.size):
            raise ParameterError(
                f"matrix shape {m.shape} does not match basis size {self.basis.size}"
            )
        if not (m == m.T).all():
            raise ParameterError("Hamiltonian matrix must be exactly symmetric")
        for sl_i in self.basis.block_slices:
            if np.any(m[sl_i, sl_i.stop :]):
                raise ParameterError("nonzero element between excitation blocks")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


def build_hamiltonian(spec: ChainSpec, basis: Basis) -> HamiltonianMatrix:
    """Assemble the excitation-conserving matrix of a chain over ``basis``.

    Diagonal entries sum the on-site energies of the excited sites; hopping
    entries connect states that differ by moving one excitation across a bond
    onto an empty neighbour.
    """
    if basis.n_sites != spec.n_sites:
        raise ParameterError(
            f"basis is for {basis.n_sites} sites, spec for {spec.n_sites}"
        )
    dim = basis.size
    h = np.zeros((dim, dim))
    index = basis.index
    for i, state in enumerate(basis.states):
        h[i, i] = sum(spec.onsite[s] for s in state)
        occupied = set(state)
        for bond, j_bond in enumerate(spec.couplings):
            left_in, right_in = bond in occupied, (bond + 1) in occupied
            if left_in == right_in:
                continue
            source, target = (bond, bond + 1) if left_in else (bond + 1, bond)
            moved = tuple(sorted(occupied - {source} | {target}))
            k = index[moved]
            if k > i:  # fill upper triangle once, mirror exactly below
                h[i, k] = h[k, i] = j_bond
    return HamiltonianMatrix(basis=basis, matrix=h)


def apply_diagonal_disorder(spec: ChainSpec, scale_e: float, rng: SplitMix64) -> ChainSpec:
    """Add static on-site energies E * d_i * delta, d_i uniform on [-1/2, 1/2].

    Consumes exactly N draws in ascending site order; the weak coupling delta
    is taken as the smallest clean coupling magnitude of the spec.
    """
    if scale_e < 0:
        raise ParameterError(f"scale_e must be >= 0, got {scale_e}")
    delta = _weak_coupling(spec)
    draws = [rng.uniform_pm_half() for _ in range(spec.n_sites)]
    if scale_e == 0:
        return spec
    onsite = tuple(e + scale_e * d * delta for e, d in zip(spec.onsite, draws))
    return replace(spec, onsite=onsite)


def apply_offdiagonal_disorder(spec: ChainSpec, scale_e: float, rng: SplitMix64) -> ChainSpec:
    """Perturb every bond additively by E * d_i * delta, d_i uniform on [-1/2, 1/2].

    Consumes exactly N-1 draws in ascending bond order.  Couplings that come
    out negative are kept as sampled (no clamping).
    """
    if scale_e < 0:
        raise ParameterError(f"scale_e must be >= 0, got {scale_e}")
    delta = _weak_coupling(spec)
    draws = [rng.uniform_pm_half() for _ in range(spec.n_sites - 1)]
    if scale_e == 0:
        return spec
    couplings = tuple(j + scale_e * d * delta for j, d in zip(spec.couplings, draws))
    return replace(spec, couplings=couplings)


def _weak_coupling(spec: ChainSpec) -> float:
    nonzero = [abs(j) for j in spec.couplings if j != 0.0]
    if not nonzero:
        raise ParameterError("chain has no nonzero coupling to scale disorder against")
    return min(nonzero)


def decouple_site(spec: ChainSpec, site: int) -> ChainSpec:
    """Zero every bond attached to ``site`` (one bond if it is a chain end)."""
    if not 0 <= site < spec.n_sites:
        raise ParameterError(f"site {site} out of range for N={spec.n_sites}")
    couplings = list(spec.couplings)
    if site > 0:
        couplings[site - 1] = 0.0
    if site < spec.n_sites - 1:
        couplings[site] = 0.0
    return replace(spec, couplings=tuple(couplings))
