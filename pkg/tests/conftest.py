import pytest
from hypothesis import settings

from pdcnet.chem import parse_smiles
from pdcnet.synthetic import LINKERS, PAYLOADS

settings.register_profile("repo", deadline=None)
settings.load_profile("repo")

EXTRA_SMILES = [
    "CCO",
    "c1ccccc1",
    "c1ccc2ccccc2c1",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    "C1CC1C",
    "C1CCC2(CC1)CCCC2",
    "OC(=O)[C@@H](N)Cc1ccc(O)cc1",
    "[NH4+].[Cl-]",
    "c1ccsc1",
    "C#N",
]


@pytest.fixture(scope="session")
def molecules():
    """(smiles, MolGraph) pairs: real payloads, linkers and assorted ring systems."""
    smiles = list(PAYLOADS.values()) + list(LINKERS.values()) + EXTRA_SMILES
    return [(s, parse_smiles(s)) for s in smiles]


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion: ``with criterion(n, "title"): ...``."""
    log = request.config.stash.setdefault(_ACCEPTANCE, {})

    class _Ctx:
        def __init__(self, number, title):
            self.number, self.title, self.note = number, title, ""

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            line = f"criterion {self.number:>2}: {status}  {self.title}"
            if self.note:
                line += f"  [{self.note}]"
            log[self.number] = line
            print(line)
            return False

    return _Ctx


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_ACCEPTANCE, {})
    if log:
        terminalreporter.section("acceptance criteria")
        for n in sorted(log):
            terminalreporter.write_line(log[n])
