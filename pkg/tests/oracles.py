"""Independent scalar oracles and the values frozen from them."""

import math


def bisect(g, lo, hi, iters=200):
    glo = g(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pd_fixed_point(beta):
    """Symmetric fixed point of p = 1/(1 + exp(beta (1 + p)))."""
    return bisect(lambda p: p - 1 / (1 + math.exp(beta * (1 + p))), 0.0, 1.0)


def hawk_response(beta, p_other):
    return 1 / (1 + math.exp(beta * (2 * p_other - 1)))


def hawk_dove_branch(beta):
    """(high, low) hawk probabilities of the asymmetric fixed point."""
    hi = bisect(lambda p: hawk_response(beta, hawk_response(beta, p)) - p, 0.5 + 1e-6, 1.0)
    return hi, hawk_response(beta, hi)


# frozen from the oracles above
PD_FIXED = {
    0: 0.5,
    1: 0.2267506448343481,
    2: 0.09978848397044712,
    4: 0.016834641511559265,
    8: 0.0003344543549896364,
}
PD_RADIUS_BETA1 = 0.1753347899015554
HAWK_DOVE_BRANCH = {
    2.5: (0.8552058917439351, 0.14479410825606484),
    4: (0.9787520120386344, 0.02124798796136563),
    8: (0.9996628365075542, 0.00033716349244587794),
}
