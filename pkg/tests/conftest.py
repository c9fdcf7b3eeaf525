import numpy as np
import pytest

from lesionfusion.dataset_io import GroundTruthRecord, Label


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def population(n_mm, n_sk, n_ncn, prefix="ISIC_"):
    """Ground-truth records with zero-padded ids, classes interleaved."""
    labels = [Label.MM] * n_mm + [Label.SK] * n_sk + [Label.NCN] * n_ncn
    order = np.random.default_rng(12345).permutation(len(labels))
    return [GroundTruthRecord(f"{prefix}{i:07d}", labels[j]) for i, j in enumerate(order)]


@pytest.fixture
def challenge_population():
    # class counts of the ISIC 2017 training set
    return population(374, 254, 1372)


ACCEPTANCE_RESULTS = []


def record_criterion(name, ok, detail=""):
    ACCEPTANCE_RESULTS.append((name, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
