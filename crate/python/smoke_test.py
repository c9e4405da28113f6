"""Smoke test for the pygeoball extension.

Uses an installed `pygeoball` if there is one; otherwise builds the extension
with cargo and loads it from a temporary directory.
"""

import importlib
import math
import pathlib
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        return importlib.import_module("pygeoball")
    except ImportError:
        pass
    subprocess.run(
        ["cargo", "build", "--release", "-p", "geoball-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libpygeoball.so"
    if not lib.exists():
        lib = ROOT / "target" / "release" / "libpygeoball.dylib"
    dest = pathlib.Path(tempfile.mkdtemp()) / ("pygeoball" + sysconfig.get_config_var("EXT_SUFFIX"))
    shutil.copy(lib, dest)
    sys.path.insert(0, str(dest.parent))
    return importlib.import_module("pygeoball")


def main():
    g = load()

    disk = g.BallGeometry(2, 1.0, g.WarpingFunction.euclidean())
    pairs = g.radial_spectrum(disk, 3)
    print("disk radial eigenvalues:", [round(p.eigenvalue, 5) for p in pairs])
    for got, want in zip(pairs, [5.783186, 30.471263, 74.887007]):
        assert abs(got.eigenvalue - want) < 1e-5, got

    hist = pairs[0].ratio_history
    print("ratio history:", [round(x, 5) for x in hist[1:4]])
    assert abs(hist[1] - 5.80381) < 1e-3 * 5.8

    for fam in (g.WarpingFunction.hyperbolic(), g.WarpingFunction.spherical(), g.WarpingFunction.cubic_exp()):
        ball = g.BallGeometry(3, 1.0, fam)
        rep = g.radial_harmonic_identity(ball, 10)
        print(f"{fam.name:>10}: sum 1/lambda = {rep['partial_sum']:.6f} < {rep['closed_form']:.6f}")
        assert rep["partial_sum"] < rep["closed_form"]

    whole = g.whole_spectrum_sum_sq(3, 1.0, "paper", 200)
    assert whole["partial_sum"] <= (12 - math.pi**2) / 64 <= whole["partial_sum"] + whole["tail_bound"]

    b = g.sum_sq_bounds(2, 1.0, volume=math.pi)
    exact = math.pi**2 / 48 - 5 / 32
    print(f"bounds: {b['lower']:.5f} < {exact:.5f} < {b['upper']:.5f}")
    assert b["lower"] < exact < b["upper"]

    mom = g.moment_limits(disk)
    print(f"moments: lambda1 = {mom['lambda1']:.6f}, lambda2 <= {mom['lambda2']:.4f}")
    assert abs(mom["lambda1"] - pairs[0].eigenvalue) < 1e-6

    print("verdict:", g.stochastic_diagnostic(g.WarpingFunction.cubic_exp(), 2)["verdict"])
    try:
        g.BallGeometry(2, -1.0, g.WarpingFunction.euclidean())
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("negative radius accepted")
    print("ok")


if __name__ == "__main__":
    main()
