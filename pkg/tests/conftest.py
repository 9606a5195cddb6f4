import hypothesis
import numpy as np
import pytest

from turnprint.config import RunConfig
from turnprint.evalsuite import benchmark_profiles, build_corpus, extract_corpus

hypothesis.settings.register_profile(
    "default", max_examples=50, deadline=None
)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile(
    "thorough", max_examples=300, deadline=None
)
hypothesis.settings.load_profile("default")

# One corpus shared by the experiment-level tests and several acceptance
# criteria; building it costs a few seconds, so it is session-scoped.
CORPUS_SEED = 123


@pytest.fixture(scope="session")
def run_config():
    return RunConfig()


@pytest.fixture(scope="session")
def corpus12(run_config):
    profiles = benchmark_profiles(12)
    corpus = build_corpus(
        profiles, trips_per_driver=4, turns_per_trip=12, seed=CORPUS_SEED
    )
    return extract_corpus(corpus, run_config)


def straight_then_settle(n=600, sample_period=0.01):
    """A quiet aligned-style trace: tiny yaw, gravity-only accel."""
    t = np.arange(n) * sample_period
    gyro = np.zeros((n, 3))
    accel = np.zeros((n, 3))
    accel[:, 2] = 9.80665
    return t, gyro, accel
