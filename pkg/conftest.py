import os

import pytest
from hypothesis import settings

from utils.data_models import ApertureConfig, FrequencyGrid, LorentzianParams, SiwParams

settings.register_profile('default',
                          derandomize=True,
                          max_examples=100,
                          deadline=None)
settings.register_profile('quick', derandomize=True, max_examples=10, deadline=None)
settings.load_profile(os.getenv('HYPOTHESIS_PROFILE', 'default'))


@pytest.fixture
def meta():
    return LorentzianParams()


@pytest.fixture
def grid():
    return FrequencyGrid()


@pytest.fixture
def siw():
    return SiwParams()


@pytest.fixture
def aperture():
    return ApertureConfig()


@pytest.fixture
def lossless_aperture():
    return ApertureConfig(feed=SiwParams(tan_delta=0.0))
