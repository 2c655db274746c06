"""Smoke test for the bspai_py extension module.

Build the module first:

    cargo build -p bspai-python --release --features extension-module

then run `python3 python/smoke_test.py`. The script copies the shared
library next to a temporary import path, so no install step is needed.
"""

import importlib
import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load_module():
    for profile in ("release", "debug"):
        lib = os.path.join(ROOT, "target", profile, "libbspai_py.so")
        if os.path.exists(lib):
            break
    else:
        sys.exit("libbspai_py.so not found; build it with --features extension-module")
    tmp = tempfile.mkdtemp()
    shutil.copy(lib, os.path.join(tmp, "bspai_py.so"))
    sys.path.insert(0, tmp)
    return importlib.import_module("bspai_py")


def tridiagonal(bp, n):
    rows, cols, vals = [], [], []
    for i in range(n):
        rows.append(i); cols.append(i); vals.append(4.0)
        if i + 1 < n:
            rows += [i, i + 1]; cols += [i + 1, i]; vals += [-1.0, -2.0]
    return bp.SparseMatrix.from_triplets(n, n, rows, cols, vals)


def main():
    bp = load_module()

    assert bp.round_to(70000.0, "half") == math.inf
    assert bp.op_in(1.0, 2.0 ** -12, "add", "half") == 1.0
    assert bp.unit_roundoff("single") == 2.0 ** -24

    a = tridiagonal(bp, 30)
    assert a.shape == (30, 30) and a.nnz == 88

    m, report = bp.spai_preconditioner(a, 0.3)
    assert report["unconverged_columns"] == 0

    bm = bp.BucketedMatrix(m, ["double", "single", "half", "drop"], 2.0 ** -37)
    assert sum(bm.occupancy) == m.nnz
    x = [1.0 / math.sqrt(30)] * 30
    y = bm.apply(x)
    err = bp.normwise_backward_error(m, x, y)
    assert err <= bm.error_bound(), (err, bm.error_bound())

    with tempfile.TemporaryDirectory() as d:
        bm.save(os.path.join(d, "m.json"), os.path.join(d, "m.bin"))
        back = bp.BucketedMatrix.load(os.path.join(d, "m.json"), os.path.join(d, "m.bin"))
        assert back.apply(x) == y

    rep = bp.solve(a, "ddq", 0.3, 2.0 ** -53, diagnostics=True)
    assert rep["converged"], rep
    print(
        "ok: steps", len(rep["gmres_iterations"]),
        "gmres", rep["gmres_iterations"],
        "forward error %.2e" % rep["forward_errors"][-1],
        "kappa(MA) %.3g" % rep["kappa_ma"],
    )


if __name__ == "__main__":
    main()
