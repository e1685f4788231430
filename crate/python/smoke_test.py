#!/usr/bin/env python3
"""Smoke test for the twogamma_py extension module.

Builds nothing itself: expects the cdylib at target/release/libtwogamma_py.so
(run `cargo build --release -p twogamma-py` first). The shared object is
linked into a temporary directory under the importable name twogamma_py.so.
"""

import math
import os
import sys
import tempfile


def import_extension():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    so = os.path.join(root, "target", "release", "libtwogamma_py.so")
    if not os.path.exists(so):
        sys.exit(f"extension not built: {so}\n"
                 "run: cargo build --release -p twogamma-py")
    tmp = tempfile.mkdtemp(prefix="twogamma_py_")
    os.symlink(so, os.path.join(tmp, "twogamma_py.so"))
    sys.path.insert(0, tmp)
    import twogamma_py
    return twogamma_py


def main():
    tg = import_extension()
    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
        if not ok:
            failures += 1

    # basis diagnostics for the lowest symmetries at Z = 92
    for kappa in (-1, 1, -2):
        rep = tg.spectrum_check(92.0, kappa)
        check(f"spectrum_check kappa={kappa}", rep["passes"],
              f"orthonormality={rep['orthonormality_residual']:.2e}")

    # dipole 1s2s^1S0 correlation must follow 1 + cos^2(theta)
    eng = tg.Engine(54.0, "1s2s-1S0", l_max=1, dipole_only=True,
                    n_splines=30, r_max=150.0)
    thetas = [i * math.pi / 8 for i in range(9)]
    res = eng.correlation_function(0.5, thetas)
    w90 = eng.w(math.pi / 2, 0.5)
    worst = max(abs(w / w90 - (1 + math.cos(t) ** 2))
                for t, w in zip(res["theta"], res["w"]))
    check("dipole angular shape 1+cos^2", worst < 1e-8, f"max dev={worst:.2e}")
    check("transition energy positive", eng.transition_energy > 0,
          f"dE={eng.transition_energy:.6f} mc^2")

    # hydrogen 2s -> 1s two-photon rate, 8.229 1/s
    h = tg.Engine(1.0, "2s", l_max=1, dipole_only=True,
                  n_splines=30, r_max=8200.0)
    rate = h.total_rate(n_y=24, n_theta=8)
    check("hydrogen 2s rate 8.229 1/s",
          abs(rate["total"] - 8.229) < 0.09, f"got {rate['total']:.4f}")

    # amplitude symmetry: helicity flip conjugates the 1S0 amplitude
    a = eng.amplitude(0, 0, 1, 1, 0.7, 0.4)
    b = eng.amplitude(0, 0, -1, -1, 0.7, 0.4)
    dev = math.hypot(a[0] - b[0], a[1] + b[1])
    scale = math.hypot(*a)
    check("helicity-flip symmetry", dev < 1e-10 * scale, f"dev={dev:.2e}")

    # error mapping
    try:
        tg.Engine(54.0, "bogus")
        check("invalid transition rejected", False)
    except ValueError:
        check("invalid transition rejected", True)

    print("smoke test:", "FAILED" if failures else "OK")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
