import numpy as np
import pytest

from ris_outage.model import RisBlockConfig, validate

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line[1])


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion, then assert."""

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        assert ok, line

    return record


BASELINE = dict(
    n_ris=4,
    blocks_per_ris=2,
    elements_per_ris=32,
    tx_power_db=30.0,
    noise_power_db=10.0,
    rho1=0.1,
    rho2=0.1,
    lambda_u=1.0,
    lambda_b=1.0,
    fail_prob=0.0,
    target_rate=1.0,
    dist_user_m=4.0,
    dist_bs_m=4.0,
    pathloss_exp=2.0,
    seed=11,
)


@pytest.fixture
def baseline():
    return dict(BASELINE)


def make_scenario(**changes):
    params = dict(BASELINE)
    params.update(changes)
    return validate(params)


def make_block(m, corr=None, psi=None, theta=None, phi=None, d_u=1.0, d_b=1.0, delta=2.0):
    z = np.zeros(m)
    return RisBlockConfig(
        ris_index=1,
        block_index=1,
        m_prime=m,
        correlation=np.eye(m) if corr is None else corr,
        phases_psi=z if psi is None else psi,
        phases_theta=z if theta is None else theta,
        phases_phi=z if phi is None else phi,
        dist_user_m=d_u,
        dist_bs_m=d_b,
        pathloss_exp=delta,
    )


def random_block(rng, m, kind="uniform", param=None):
    from ris_outage.model import make_correlation

    if param is None:
        param = rng.uniform(0, 1) if kind == "uniform" else rng.uniform(0, 2)
    c = make_correlation(kind, m, param)
    ph = rng.uniform(0, 2 * np.pi, size=(3, m))
    return make_block(m, c, *ph, d_u=rng.uniform(1, 8), d_b=rng.uniform(1, 8), delta=rng.uniform(1.5, 4.5))
