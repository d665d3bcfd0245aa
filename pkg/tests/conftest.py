import numpy as np
import pytest

import nfpf
from nfpf import systems


@pytest.fixture(scope="session")
def cascade():
    """Cascade model with its modal basis and normal form."""
    model = systems.cascade_model()
    basis = nfpf.decompose(model.A)
    nf = nfpf.h2_coefficients(nfpf.second_order_coeffs(model, basis), basis.lambdas)
    return model, basis, nf


@pytest.fixture(scope="session")
def two_area():
    """Bundled two-area swing system: params, model, basis, normal form."""
    params = systems.two_area()
    model = nfpf.build_swing_model(params)
    basis = nfpf.decompose(model.A)
    nf = nfpf.h2_coefficients(nfpf.second_order_coeffs(model, basis), basis.lambdas)
    return params, model, basis, nf


def cascade_closed_form(x0, times):
    """Exact solution of dx1/dt = -x1 + x2^2, dx2/dt = -3 x2.

    x2 = x20 e^{-3t} forces the linear x1 equation; matching the particular
    solution c e^{-6t} gives -6c = -c + x20^2, i.e. c = -x20^2 / 5.
    """
    x10, x20 = x0
    c = x20**2 / 5.0
    x1 = (x10 + c) * np.exp(-times) - c * np.exp(-6.0 * times)
    x2 = x20 * np.exp(-3.0 * times)
    return np.vstack([x1, x2])


def random_stable_quadratic(rng, n=4, hessian_scale=0.3):
    """Random stable diagonalizable quadratic model (deviation form)."""
    while True:
        A = rng.normal(size=(n, n))
        eigs = np.linalg.eigvals(A)
        A = A - (eigs.real.max() + 0.5) * np.eye(n)
        eigs = np.linalg.eigvals(A)
        gaps = [
            abs(eigs[i] - eigs[j])
            for i in range(n)
            for j in range(i + 1, n)
        ]
        if min(gaps) > 1e-3:
            break
    H = rng.normal(scale=hessian_scale, size=(n, n, n))
    H = 0.5 * (H + H.transpose(0, 2, 1))
    return nfpf.QuadraticModel(A=A, H=H, x_eq=np.zeros(n), labels=[f"x{i+1}" for i in range(n)])
