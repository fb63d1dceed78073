import pytest

# (number, title, passed, seconds, limit, detail) filled in by test_acceptance
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num, title, ok, secs, limit, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        tr.write_line(f"{status} criterion {num:>2}: {title} ({secs:.2f} s, limit {limit:g} s) {detail}")


@pytest.fixture(scope="session")
def warm_jit():
    # compile the numba kernels once so that runtime limits measure the work
    import numpy as np
    from clockham.linalg import SymTridiagonal, eig_dense, eig_tridiagonal
    eig_dense(np.eye(3) + np.diag([1.0, 2.0], 1) + np.diag([1.0, 2.0], -1), want_vectors=True)
    eig_tridiagonal(SymTridiagonal([1.0, 2.0, 3.0], [1.0, 1.0]))
