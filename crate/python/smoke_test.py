"""Quick end-to-end check of the calibr_py extension.

Build and install first:

    pip install maturin
    maturin develop -m crates/py/Cargo.toml --release
    python python/smoke_test.py
"""

import math

import calibr_py as cp


def main():
    names = {e["selector"] for e in cp.catalogue()}
    assert "cayley" in names and "kaehler:2,1" in names

    omega = cp.kaehler_power(2, 1)
    assert (omega.n, omega.p) == (4, 2)
    assert omega.coeff([0, 1]) == 1.0

    # omega∧omega/2 is the volume form of R^4
    vol = omega.wedge(omega) * 0.5
    assert len(vol) == 1 and abs(vol.coeff([0, 1, 2, 3]) - 1.0) < 1e-15

    again = cp.ExteriorElement.from_json(omega.to_json())
    assert again == omega

    value, frame, _ = cp.comass(omega, multistarts=16)
    assert abs(value - 1.0) < 1e-8
    assert abs(omega.evaluate(frame) - value) < 1e-8

    cal = cp.Calibration("omega4")
    planes = cp.sample_planes(cal, count=8)
    assert len(planes) >= 4
    assert cp.lambda_dim(cal) == 4

    status = cp.psh(cal, "normsq", [[0.1, 0.2, 0.3, 0.4]], count=8)
    assert status[0]["status"] == "strictly_psh"
    assert cp.mod_d_residual(cal, "z1sq", [1.0, 0.0, 0.0, 0.0]) < 1e-10

    report = cp.run(["comass", "--cal", "special_lagrangian:3", "--multistarts", "8"])
    assert report["command"] == "comass" and report["passed"]
    assert math.isclose(report["result"]["value"], 1.0, abs_tol=1e-6)

    try:
        cp.Calibration("nonsense:1")
    except ValueError:
        pass
    else:
        raise AssertionError("bad selector accepted")

    print("calibr_py", cp.__version__, "ok")


if __name__ == "__main__":
    main()
