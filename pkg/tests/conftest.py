import numpy as np
import pytest

import vmfkit as vk

TABLE1_DIMS = (5, 20, 100)
TABLE1_KAPPAS = (50.0, 500.0)
TABLE1_SEEDS = (0, 1, 2, 3, 4)
TABLE1_N = 10_000


def basis_vector(d: int, i: int = 0) -> np.ndarray:
    v = np.zeros(d)
    v[i] = 1.0
    return v


@pytest.fixture(scope="session")
def table1_grid():
    """Both estimators on every (dim, kappa, seed) benchmark cell.

    Session-scoped: the sweep backs both the acceptance medians and the
    estimator-agreement checks.
    """
    grid = {}
    for d in TABLE1_DIMS:
        for kappa in TABLE1_KAPPAS:
            truth = vk.VmfParams(mu=basis_vector(d), kappa=kappa)
            runs = []
            for seed in TABLE1_SEEDS:
                data = vk.sample_vmf(truth, TABLE1_N, vk.SamplerConfig(seed=seed))
                batch = vk.fit_batch(data, truth=truth)
                sgd = vk.fit_sgd(data, vk.SgdConfig(seed=seed), truth=truth)
                runs.append({"batch": batch, "sgd": sgd})
            grid[(d, kappa)] = runs
    return grid
