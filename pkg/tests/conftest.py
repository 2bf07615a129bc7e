import pytest

from pqchainlab import pki
from pqchainlab.scenario import enumerate_matrix, find_scenario

SEED = bytes.fromhex("a5" * 32)

acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def matrix():
    return enumerate_matrix()


@pytest.fixture(scope="session")
def ml_d3_hierarchy(matrix):
    """Fast all-ML depth-3 hierarchy shared across tests."""
    s = find_scenario(matrix, "x25519mlkem768__ml_root__ml_int__ml_leaf")
    return s, pki.build_hierarchy(s, SEED)


@pytest.fixture(scope="session")
def ml_d2_hierarchy(matrix):
    s = find_scenario(matrix, "x25519mlkem768__ml_root__ml_leaf")
    return s, pki.build_hierarchy(s, SEED)


@pytest.fixture(scope="session")
def slh_root_d2_hierarchy(matrix):
    """SLH root / ML leaf depth-2 hierarchy (two slow signatures to build)."""
    s = find_scenario(matrix, "x25519mlkem768__slh_root__ml_leaf")
    return s, pki.build_hierarchy(s, SEED)


@pytest.fixture(scope="session")
def slh_root_d3_hierarchy(matrix):
    s = find_scenario(matrix, "x25519mlkem768__slh_root__ml_int__ml_leaf")
    return s, pki.build_hierarchy(s, SEED)
