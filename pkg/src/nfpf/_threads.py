"""Optional NFPF_THREADS cap on BLAS/OpenMP parallelism.

Must run before numpy first loads to have any effect; applied from the
package __init__.
"""

import os
import sys

_BLAS_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def apply():
    cap = os.environ.get("NFPF_THREADS")
    if not cap or "numpy" in sys.modules:
        return
    for var in _BLAS_VARS:
        os.environ.setdefault(var, cap)
