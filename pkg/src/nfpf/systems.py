"""Bundled example systems.

* :func:`cascade_model` -- the exactly solvable quadratic cascade
  dx1/dt = -x1 + x2^2, dx2/dt = -3 x2, whose 2nd-order normal form is
  exact (closed form: x1 = (x10 + 0.2 x20^2) e^-t - 0.2 x20^2 e^-6t).
* :func:`two_machine` -- a two-machine toy over a lossless tie.
* :func:`two_area` -- a synthetic four-machine, two-area classical
  layout: two strongly coupled pairs joined by a weak, heavily loaded
  tie.  It produces one inter-area mode below 0.8 Hz and two local
  modes between 0.9 and 1.8 Hz, with enough quadratic coupling that the
  inter-area harmonic is visible in spectra.  Parameters are synthetic;
  they are chosen for those modal properties, not taken from any
  published network.

JSON copies of all three ship under ``nfpf/data`` for the CLI.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .sysmodel import QuadraticModel, SwingParams

__all__ = ["cascade_model", "two_machine", "two_area", "data_path", "BUNDLED"]

OMEGA_S = 2.0 * np.pi * 60.0


def cascade_model() -> QuadraticModel:
    """Quadratic cascade with an exactly linearizable normal form."""
    A = np.diag([-1.0, -3.0])
    H = np.zeros((2, 2, 2))
    H[0, 1, 1] = 2.0
    return QuadraticModel(A=A, H=H, x_eq=np.zeros(2), labels=("x1", "x2"))


def _susceptance_network(m, lines, shunt=0.0):
    """Lossless reduced admittance from a line list [(i, j, b), ...]."""
    Y = np.zeros((m, m), dtype=complex)
    for i, j, b in lines:
        Y[i, j] += 1j * b
        Y[j, i] += 1j * b
        Y[i, i] -= 1j * b
        Y[j, j] -= 1j * b
    Y += 1j * shunt * np.eye(m)
    return Y


def two_machine(p_transfer=0.4, b_tie=0.8, damping=1.0) -> SwingParams:
    """Two identical machines exchanging ``p_transfer`` over a lossless tie."""
    return SwingParams(
        inertia=np.array([5.0, 5.0]),
        damping=np.array([damping, damping]),
        p_mech=np.array([p_transfer, -p_transfer]),
        emf=np.array([1.0, 1.0]),
        Y=_susceptance_network(2, [(0, 1, b_tie)]),
        omega_s=OMEGA_S,
    )


def two_area() -> SwingParams:
    """Synthetic four-machine two-area classical system.

    Machines 1-2 form the exporting area, machines 3-4 the importing
    one.  Intra-area links are stiff and asymmetric (to split the two
    local-mode frequencies); every machine sees the remote area through
    a weak equivalent tie, as a reduced network does.  The tie carries
    a large transfer so the equilibrium angles, and with them the
    quadratic terms, are substantial.
    """
    lines = [
        (0, 1, 1.00),  # area 1 internal
        (2, 3, 1.60),  # area 2 internal
        (0, 2, 0.13),  # weak inter-area equivalents
        (0, 3, 0.13),
        (1, 2, 0.13),
        (1, 3, 0.13),
    ]
    return SwingParams(
        inertia=np.array([6.5, 6.5, 6.175, 6.175]),
        damping=np.array([2.0, 2.0, 2.0, 2.0]),
        p_mech=np.array([0.30, 0.10, -0.12, -0.28]),
        emf=np.array([1.05, 1.03, 1.03, 1.05]),
        Y=_susceptance_network(4, lines),
        omega_s=OMEGA_S,
    )


BUNDLED = {
    "cascade": cascade_model,
    "two_machine": two_machine,
    "two_area": two_area,
}


def data_path(name: str):
    """Filesystem path of a bundled model file ("cascade", "two_machine", "two_area")."""
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled system {name!r}; available: {sorted(BUNDLED)}")
    return resources.files("nfpf").joinpath("data", f"{name}.json")
