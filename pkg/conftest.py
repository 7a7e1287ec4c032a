"""Root conftest: keeps the repository root importable and registers markers"""


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: large-instance acceptance checks (n in the thousands)")
