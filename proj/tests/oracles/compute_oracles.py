"""Independent high-precision oracles for the frozen expected values in the C++ tests.

Run with: python3 tests/oracles/compute_oracles.py
Uses mpmath adaptive quadrature and root finding only; nothing here touches
the C++ discretization.
"""
import mpmath as mp

mp.mp.dps = 40


def integral_x_pow_2_plus_x():
    return mp.quad(lambda x: x ** (2 + x), [0, 1])


def modular_two_exponent_2_plus_x():
    return mp.quad(lambda x: mp.mpf(2) ** (2 + x), [0, 1]), 4 / mp.log(2)


def luxemburg_x_exponent_2_plus_x():
    f = lambda mu: mp.quad(lambda x: (x / mu) ** (2 + x), [0, 1]) - 1
    lo, hi = mp.mpf("0.1"), mp.mpf("2")
    for _ in range(200):
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def energy_fixture_a_hat(lam):
    # hat with peak 1 at 0.5: |u'| = 2 everywhere.
    p = lambda x: 3 - x / 2
    q = lambda x: mp.mpf("1.5") + 2 * x
    hat = lambda x: 2 * x if x <= mp.mpf("0.5") else 2 * (1 - x)
    grad = mp.quad(lambda x: mp.mpf(2) ** p(x) / p(x), [0, 1])
    pot = mp.quad(lambda x: hat(x) ** q(x) / q(x), [0, mp.mpf("0.5"), 1])
    return grad - lam * pot


def bump_integrals(plateau, ramp, p, q):
    """Integrals for a 1D piecewise-linear plateau bump on (0,1)."""
    a, b = plateau
    slope = 1 / ramp
    grad = mp.quad(lambda x: slope ** p(x), [a - ramp, a]) + mp.quad(
        lambda x: slope ** p(x), [b, b + ramp]
    )
    plateau_q = b - a  # phi == 1 on the plateau
    return grad, plateau_q


if __name__ == "__main__":
    print("int_0^1 x^(2+x) dx           =", mp.nstr(integral_x_pow_2_plus_x(), 20))
    m, closed = modular_two_exponent_2_plus_x()
    print("modular(2; 2+x) quad/closed   =", mp.nstr(m, 20), mp.nstr(closed, 20))
    print("luxemburg(x; 2+x)             =", mp.nstr(luxemburg_x_exponent_2_plus_x(), 20))
    print("J fixture A hat, lambda=0.01  =", mp.nstr(energy_fixture_a_hat(mp.mpf("0.01")), 20))
    p = lambda x: 3 - x / 2
    q = lambda x: mp.mpf("1.5") + 2 * x
    grad, plat = bump_integrals((mp.mpf("0.0625"), mp.mpf("0.1875")), mp.mpf("0.0625"), p, q)
    print("fixture A bump: int|grad phi|^p =", mp.nstr(grad, 20), " int_Omega0 phi^q =", mp.nstr(plat, 20))
    for lam in ["0.01"]:
        lam = mp.mpf(lam)
        ratio = lam * mp.mpf("2.5") / mp.mpf("3.5") * plat / grad
        print("  delta(lambda=%s) = 0.99*min(1, ratio) =" % lam, mp.nstr(mp.mpf("0.99") * min(1, ratio), 20))
    # Discrete first Dirichlet eigenvalue of P1 on a uniform mesh of (0,1).
    n = 256
    h = mp.mpf(1) / n
    lam_h = 6 / h**2 * (1 - mp.cos(mp.pi * h)) / (2 + mp.cos(mp.pi * h))
    print("P1 first eigenvalue, 256 cells =", mp.nstr(lam_h, 20), " pi^2 =", mp.nstr(mp.pi**2, 20))
