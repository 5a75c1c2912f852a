"""Quick end-to-end check of the Python bindings.

    maturin develop -m crates/python/Cargo.toml --release
    python python/smoke_test.py
"""
import math

import treesearch as ts


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    sys = ts.ReducedSystem(3, 1, 1.0)
    assert sys.size == 3 and sys.multiplicities == [1, 2, 4]
    assert sys.verify()["passed"]

    big = ts.ReducedSystem(64, 32, 2 / 3)
    assert big.size == ts.comb_size(64, 32) == 1552

    amp = ts.evolve(15, 1, 1.0, [0.0, 402.0])
    assert abs(abs(amp[0]) ** 2 - 1 / (2**15 - 1)) < 1e-15
    assert close(abs(amp[1]), 1 / math.sqrt(2), 0.02)

    peak = ts.ReducedSystem(20, 1, 1.0).first_peak()
    assert close(peak.efficiency, ts.asymptotic_runtime(20), 0.05), peak
    assert ts.ReducedSystem(12, 12, 2.0).first_peak() is None

    fit = ts.scaling(list(range(12, 29, 2)), l=1)
    assert abs(fit["beta"] - 0.5) < 0.02, fit["beta"]

    sw = ts.sweep(12, 1, gamma_max=2.0)
    assert abs(sw["gamma_prime_star"] - 1.0) < 0.05

    assert ts.hitting_times_exact(3) == [0, 5, 6]
    assert ts.hitting_times_exact(30)[1] == 2**30 - 3
    mean, se = ts.monte_carlo(5, 2, 20000, seed=1)
    assert abs(mean - 29) < 4 * se

    assert ts.betweenness(4, 2)[0] == 114
    raw, norm = ts.betweenness(64, 1)
    assert isinstance(raw, int) and abs(norm - 0.5) < 1e-9
    kappas = [row[3] for row in ts.centrality_table(24)]
    assert all(close(k, w, 0.02) for k, w in zip(kappas, [1.0, 1.25, 1.5, 1.75, 2.0]))

    s = complex(0.3, 0.2)
    assert ts.laplace_psi1(s, 10, 1.0) != 0
    poles = ts.critical_poles(24)
    assert all(close(abs(r), 1 / (2 * math.sqrt(2)), 0.01) for _, r in poles)

    try:
        ts.ReducedSystem(5, 9)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid level accepted")

    print("treesearch", ts.__version__, "python smoke test ok")


if __name__ == "__main__":
    main()
