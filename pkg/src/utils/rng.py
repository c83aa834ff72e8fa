# src/utils/rng.py
import numpy as np

MAX_SEED = 2**64 - 1


def make_rng(seed: int) -> np.random.Generator:
    """Random source for a single protocol run or campaign."""
    return np.random.default_rng(np.random.SeedSequence(int(seed) & MAX_SEED))


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for Monte Carlo trial `trial_index` of `master_seed`."""
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed) & MAX_SEED, int(trial_index)])
    )
