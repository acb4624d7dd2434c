"""Smoke test for the rhs_py extension.

Build and run from the repository root:

    cargo build --release -p rhs-py --features extension-module
    cp target/release/librhs_py.so python/rhs_py.so
    python3 python/smoke_test.py
"""

import math

import rhs_py


def main():
    g = rhs_py.Geometry(1, 16)
    assert g.element_count == 16
    assert abs(g.spacing[1] - g.wavelength / 5) < 1e-12
    assert abs(g.wavenumber - 251.501403) < 1e-6

    amps = rhs_py.multibeam_pattern(g, [-3.0, 23.0])
    assert len(amps) == 16 and all(0.0 <= a <= 1.0 for a in amps)
    weights = rhs_py.quantize_pin(amps, 0.5, "ideal")
    assert set(weights) <= {0.0, 1.0}
    angles, gains, lobes = rhs_py.radiation_pattern(g, weights)
    assert len(angles) == len(gains) and max(gains) == 0.0
    print("pin lobes:", [(round(a, 1), round(db, 2)) for a, db in lobes[:2]])

    surface = rhs_py.Geometry(4, 4, feeds=4)
    h = rhs_py.Channel.generate(surface, num_users=3, seed=42)
    assert (h.num_users, h.num_elements) == (3, 16)
    assert max(h.pathloss) == 1.0

    base = rhs_py.baseline(h, surface)
    rep = rhs_py.optimize(h, surface)
    assert rep.final_rate >= base.final_rate
    assert all(b >= a - 1e-9 for a, b in zip(rep.rate_trajectory, rep.rate_trajectory[1:]))
    rate, sinr = rhs_py.zf_rate(h, surface, rep.amplitudes)
    assert math.isclose(rate, rep.final_rate, rel_tol=1e-9)
    assert math.isclose(rhs_py.sum_rate(sinr), rate, rel_tol=1e-12)

    copy = rhs_py.Channel(h.entries)
    again = rhs_py.zf_rate(copy, surface, rep.amplitudes)[0]
    assert again == rate

    try:
        rhs_py.Geometry(0, 4)
    except ValueError:
        pass
    else:
        raise AssertionError("zero rows accepted")

    print(f"baseline {base.final_rate:.4f}  optimized {rep.final_rate:.4f}  "
          f"iterations {rep.iterations}  termination {rep.termination}")
    print("ok")


if __name__ == "__main__":
    main()
