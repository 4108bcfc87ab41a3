"""Smoke test for the pblab extension module."""

import json
import math

import pblab


def main():
    p = pblab.Profile.constant(3.0, 2.0)
    n = (4.0 * math.pi) ** -0.25
    assert abs(p.n_phi - n) < 1e-15
    assert abs(p.phi(0, 0.0) - n) < 1e-15
    # even tower at m = 1 is -N/2 at the origin
    assert abs(p.tower("phi", 1, 0.0) + n / 2) < 1e-15

    for q in (p, pblab.Profile.quartic(0.5, 0.5), pblab.Profile.cosine(0.5, 0.5)):
        assert pblab.biorthonormality(q, 11) <= 1e-10, q
        assert abs(q.pairing(3, 3) - 1) <= 1e-10
        assert pblab.ladder_residual(q, "commutator_ab", 0) <= 1e-9

    try:
        pblab.Profile.cosine(1.5, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("|gamma| >= 1 must be rejected")

    report = json.loads(pblab.verify(p))
    assert report["passed"], [r["id"] for r in report["records"] if not r["passed"]]

    errors = pblab.quasi_basis_errors(pblab.Profile.constant(1.0, 0.5), 0.0, 4.0, 0.3, 3.5)
    assert errors[30] <= 1e-5 and errors[30] < errors[20] < errors[10]

    x, phi, psi, product = pblab.plot_data("fig3c")
    assert len(x) == 1001 and x[0] == -20.0 and x[-1] == 20.0
    assert all(a * b == c for a, b, c in zip(phi, psi, product))

    assert pblab.squeeze_cancellation(1.2, 2.0) <= 1e-12
    tau, kappa = pblab.squeeze_functionals(pblab.Profile.quartic(0.5, 1.0), 0.0, 0.0)
    assert isinstance(tau, complex) and isinstance(kappa, complex)
    print("pblab smoke test passed")


if __name__ == "__main__":
    main()
