import pytest

from microstrip_sls.design import FR4, DesignMode, DesignRequest, design_patch


@pytest.fixture(scope="session")
def paper_patch():
    return design_patch(DesignRequest(2.45, FR4, 50.0, DesignMode.PAPER))


@pytest.fixture(scope="session")
def resonant_patch():
    return design_patch(DesignRequest(2.45, FR4, 50.0, DesignMode.RESONANT))


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance as acceptance

    if not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(acceptance.RESULTS):
        ok, detail = acceptance.RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
