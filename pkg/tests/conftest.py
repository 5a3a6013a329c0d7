import pytest
from hypothesis import settings

settings.register_profile("suite", max_examples=25, deadline=None)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def golden_path():
    from ietkit.instances import golden_rotation
    from ietkit.rauzy_veech import iterate
    return iterate(golden_rotation(depth_hint=2200), 2000)


@pytest.fixture(scope="session")
def golden_analysis(golden_path):
    from ietkit.cocycle_analysis import dc_test, lyapunov_spectrum, stable_space
    rep = lyapunov_spectrum(golden_path)
    gs = stable_space(golden_path, report=rep)
    return rep, gs, dc_test(golden_path, gs)


@pytest.fixture(scope="session")
def h2_path():
    from ietkit.instances import h2_self_similar
    from ietkit.rauzy_veech import iterate
    return iterate(h2_self_similar(depth_hint=2500), 2500)


@pytest.fixture(scope="session")
def h2_analysis(h2_path):
    from ietkit.cocycle_analysis import (LyapunovOptions, dc_test,
                                         lyapunov_spectrum, stable_space)
    rep = lyapunov_spectrum(h2_path, LyapunovOptions(discard_fraction=0.3))
    gs = stable_space(h2_path, report=rep)
    return rep, gs, dc_test(h2_path, gs)


@pytest.fixture(scope="session")
def ew_path():
    from ietkit.self_similar import build_self_similar, ew_loop
    from ietkit.rauzy_veech import iterate
    return iterate(build_self_similar(ew_loop(prec=320), depth_hint=2400), 2400)
