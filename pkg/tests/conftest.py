import numpy as np
import pytest

import solitonchain as sc

# closed-form constants for the default working point (strong=1, weak=0.1)
ETA_CLOSED = 0.009854221855532936
T_MIRROR = 225.43042988542933


@pytest.fixture(scope="session")
def n7_spec():
    return sc.build_abc_chain(0, 0.1, 1.0)


@pytest.fixture(scope="session")
def basis7():
    return sc.build_basis(7, 2)


@pytest.fixture(scope="session")
def eig7(n7_spec, basis7):
    return sc.diagonalize(sc.build_hamiltonian(n7_spec, basis7))


@pytest.fixture(scope="session")
def psi0_7(n7_spec, basis7):
    return sc.prepare_initial(sc.InitialStateSpec(sites=n7_spec.defect_pair), basis7)


@pytest.fixture(scope="session")
def trimer_spec():
    return sc.ChainSpec(
        n_sites=3,
        couplings=(ETA_CLOSED, ETA_CLOSED),
        onsite=(0.0, 0.0, 0.0),
        site_a=0,
        site_b=1,
        site_c=2,
    )


def bell_phi_plus() -> np.ndarray:
    v = np.zeros(4)
    v[0] = v[3] = 2.0**-0.5
    return np.outer(v, v)
