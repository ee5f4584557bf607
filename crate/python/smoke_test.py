"""Smoke test for the dseu Python extension.

Build and install first:  pip install --no-build-isolation ./crates/py
"""

import math

import dseu


def main():
    seed = dseu.SeedStream(7)
    u = dseu.UnitaryMatrix.haar(4, seed.child(0))
    v = dseu.UnitaryMatrix.haar(4, seed.child(1))
    assert u.dim == 4
    assert abs(u.trace_inner(u) - 4) < 1e-12

    exact = dseu.exact_similarity(u, v)
    assert 0.0 <= exact <= 1.0
    assert abs(dseu.omega(dseu.expected_g(u, v), 4) - exact) < 1e-12
    assert abs(dseu.expected_gamma(u, v) - exact) < 1e-12

    # Reference values of the estimators at d = 2.
    assert abs(dseu.omega(2 / 3, 2) - 1.0) < 1e-12
    assert abs(dseu.chi(5 / 8, 2, 2) - 1.0) < 1e-12
    assert dseu.kappa(2, 2) == 3
    assert dseu.collision_overlap([0, 1], [1, 1]) == 0.5

    for name, k in [("incoherent", 2), ("coherent", 2), ("shadow", 2)]:
        report = dseu.estimate(u, u, name, 4000, k, seed.child(2))
        assert abs(report.mean - 1.0) <= 5 * report.std_error, report
        print(f"{name:>10}: same unitary -> {report.mean:.4f} +/- {report.std_error:.4f}")

    report = dseu.estimate(u, v, "incoherent", 4000, 2, seed.child(3))
    print(f"incoherent: exact {exact:.4f}, estimate {report.mean:.4f} +/- {report.std_error:.4f}")
    assert abs(report.mean - exact) <= 5 * report.std_error

    again = dseu.estimate(u, v, "incoherent", 4000, 2, seed.child(3))
    assert again.mean == report.mean

    psi = dseu.PureState([1, 1j], normalize=True)
    phi, overlap = dseu.sample_symmetric_povm(psi, 2, seed.child(4))
    assert math.isclose(phi.overlap_sq(psi), overlap, abs_tol=1e-12)

    trials = dseu.distinguishing_trials(16, "incoherent", 4, 64, 0.5, 50, seed.child(5))
    rate = sum(same == declared for same, declared, _ in trials) / len(trials)
    print(f"distinguishing success rate: {rate:.2f}")
    assert rate >= 0.9

    assert dseu.UnitaryMatrix.from_json(u.to_json()).rows() == u.rows()
    try:
        dseu.UnitaryMatrix([[1, 0], [0, 2]])
    except ValueError:
        pass
    else:
        raise AssertionError("non-unitary input accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
