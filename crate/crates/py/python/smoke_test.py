"""Smoke test for the walsh_lprf extension module.

Run after `maturin develop` (or `pip install .`) in crates/py:

    python python/smoke_test.py
"""

import json
import math
import os
import tempfile

import walsh_lprf as wl


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    # Characters and the 1D transform.
    assert wl.walsh_on_cell(0, 5, 3) == 1
    assert wl.rademacher_on_cell(1, 4, 3) == -1
    coeffs = wl.fwht_forward([1.0, 2.0, 3.0, 4.0])
    assert all(close(a, b) for a, b in zip(wl.fwht_inverse(coeffs), [1.0, 2.0, 3.0, 4.0]))

    # Grid functions, transform round trip, martingale structure.
    f = wl.GridFunction([[1.0, -2.0], [0.0, 3.0]])
    assert f.m == 1 and f.side == 2
    assert close(f.transform()[0][0], 0.5)
    assert wl.GridFunction.from_coefficients(f.transform()).max_abs_diff(f) < 1e-12
    assert close(f.lp_norm(2.0), math.sqrt(3.5))
    assert close(f.hardy_norm(2.0), f.lp_norm(2.0))
    total = wl.GridFunction.zeros(1)
    for k1 in range(2):
        for k2 in range(2):
            total = total + f.mart_diff(k1, k2)
    assert total.max_abs_diff(f) < 1e-12

    # Decompositions.
    dec = wl.decompose_interval(3, 12)
    assert dec["singleton"] == 3 and dec["rising"][0]["block"] == [4, 7]
    rect = wl.decompose_rectangle(3, 12, 1, 3)
    assert len(rect["blocks"]) == 6

    # Reconstruction through G and the p = 2 ratio.
    m = 4
    rects = wl.gen_guillotine_partition(m, seed=7)
    fs = [wl.sample_spectral_function(m, r, seed=i) for i, r in enumerate(rects)]
    total = wl.GridFunction.zeros(m)
    for g in fs:
        total = total + g
    assert wl.reconstruct(m, rects, fs).max_abs_diff(total) < 1e-10
    assert close(wl.lprf_ratio(fs, 2.0), 1.0, 1e-9)

    # Atoms.
    atom = wl.make_rectangle_atom(5, 1, 2, 1, 3, p=1.0, seed=4)
    assert not atom["degenerate"]
    assert close(atom["values"].lp_norm(2.0), atom["measure"] ** -0.5, 1e-9)

    # Experiment driver and identity suite.
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "report.json")
        report = wl.run_experiment(m=3, trials=5, p_list=[1.5, 2.0], out=out)
        with open(out) as fh:
            assert json.load(fh)["schema_version"] == wl.REPORT_SCHEMA_VERSION
    assert report["records"][1]["passed"]
    suite = wl.verify_identities(m=3, trials=2, interval_bound=16)
    assert suite["passed"], suite
    faulty = wl.verify_identities(m=3, trials=2, interval_bound=16, inject_fault=True)
    assert [c["id"] for c in faulty["checks"] if not c["passed"]] == ["c"]

    # Errors surface as ValueError.
    try:
        wl.decompose_interval(5, 5)
    except ValueError:
        pass
    else:
        raise AssertionError("empty interval accepted")

    print("walsh_lprf smoke test: ok")


if __name__ == "__main__":
    main()
