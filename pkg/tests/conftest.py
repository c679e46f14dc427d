import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


@pytest.fixture(scope="session")
def synthetic_games():
    from daxt.events import generate_synthetic_corpus

    return generate_synthetic_corpus(20, seed=7)


@pytest.fixture(scope="session")
def synthetic_grid(synthetic_games):
    from daxt.xt import fit_grid

    return fit_grid(synthetic_games)


@pytest.fixture(scope="session")
def synthetic_surface(synthetic_grid):
    from daxt.xt import solve_xt

    return solve_xt(synthetic_grid)
