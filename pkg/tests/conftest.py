import pytest

import perwave as pw


@pytest.fixture(scope="session")
def kdv_nl():
    return pw.make_kdv()


@pytest.fixture(scope="session")
def kdv_params():
    return pw.WaveParams(0.0, -0.01, 1.0)


@pytest.fixture(scope="session")
def kdv_well(kdv_nl, kdv_params):
    return pw.find_turning_points(kdv_nl, kdv_params)


@pytest.fixture(scope="session")
def kdv_profile(kdv_well):
    return pw.solve_profile(kdv_well)


@pytest.fixture(scope="session")
def kdv_gradients(kdv_nl, kdv_params):
    return pw.gradients(kdv_nl, kdv_params)


@pytest.fixture(scope="session")
def bbm_nl():
    return pw.make_bbm_quadratic()


@pytest.fixture(scope="session")
def bbm_params():
    return pw.WaveParams(0.0, -0.01, 2.0, family=pw.EquationFamily.GBBM_ZK)


@pytest.fixture(scope="session")
def bbm_profile(bbm_nl, bbm_params):
    return pw.solve_profile(pw.find_turning_points(bbm_nl, bbm_params))


@pytest.fixture(scope="session")
def bbm_gradients(bbm_nl, bbm_params):
    return pw.gradients(bbm_nl, bbm_params)
