import json
import os
import subprocess
import sys

import numpy as np
import pytest

SNIPPET = """
import json, numpy as np
from gkpforge import BACKEND, kernels
d = kernels.displacement_matrix(1.3 - 0.2j, 40)
print(json.dumps({"backend": BACKEND, "re": d.real.ravel().tolist(), "im": d.imag.ravel().tolist()}))
"""


def run_with(backend):
    env = dict(os.environ, GKPFORGE_BACKEND=backend)
    out = subprocess.run([sys.executable, "-W", "ignore", "-c", SNIPPET], env=env, capture_output=True,
                         text=True, check=True)
    rec = json.loads(out.stdout)
    return rec["backend"], np.array(rec["re"]) + 1j * np.array(rec["im"])


def test_numpy_backend_forced_by_environment():
    name, mat = run_with("numpy")
    assert name == "numpy"
    assert np.max(np.abs(mat.reshape(40, 40).conj().T @ mat.reshape(40, 40) - np.eye(40))[:8, :8]) < 1e-12


def test_backends_give_same_kernel_values():
    pytest.importorskip("numba")
    name_nb, a = run_with("numba")
    _, b = run_with("numpy")
    assert name_nb == "numba"
    assert np.max(np.abs(a - b)) < 1e-13


def test_unknown_backend_falls_back_to_numpy():
    name, _ = run_with("fortran")
    assert name == "numpy"
