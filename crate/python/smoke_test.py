"""Quick end-to-end check of the slsync_py extension.

Build and install first:  cd crates/py && maturin develop --release
"""

import math

import slsync_py as sl


def main():
    k = sl.CouplingSet.gaussian(200, mean=0.02, sd=0.005, seed=3)
    assert len(k) == 200 and k.k_min > 0
    print(k)

    p = sl.ModelParams(alpha=0.5 * math.pi, beta=0.1 * math.pi, d0=0.6)
    th = sl.predict(p, k)
    assert th["converged"], th["residual"]
    print("theory     R~ = %.4f  Delta = %+.5f  %s" % (th["R_tilde"], th["Delta"], th["state"]))

    sim = sl.simulate(p, k, t_transient=1000.0, t_measure=50.0, seed=1)
    print("simulation R~ = %.4f  Delta = %+.5f  %s" % (sim["R_tilde"], sim["Delta"], sim["state"]))
    assert abs(sim["R_tilde"] - th["R_tilde"]) < 0.02
    assert math.copysign(1, sim["Delta"]) == math.copysign(1, th["Delta"])
    assert sum(sim["locked"]) > 0.95 * len(k)

    label = sl.classify(th["R_tilde"], th["Delta"], p, k)
    assert label == th["state"].rstrip("?"), (label, th["state"])

    kind, r = sl.solve_amplitude(0.02, th["R_tilde"], th["Delta"], p)
    assert kind == "locked" and 0.9 < r < 1.1

    grid = sl.sweep(k, 0.5 * math.pi, beta=(0.05, 0.2, 2), d0=(-0.5, 0.5, 2), mode="both",
                    t_transient=300.0, t_measure=20.0)
    assert len(grid["simulate"]) == 4 and len(grid["theory"]) == 4
    for row in grid["theory"]:
        print("  beta %.3f d0 %+.1f  %-8s %s" % (row["beta"], row["d0"], row["state"], row["status"]))

    try:
        sl.ModelParams(beta=2.0)
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("beta outside [0, pi/2) accepted")

    print("ok")


if __name__ == "__main__":
    main()
