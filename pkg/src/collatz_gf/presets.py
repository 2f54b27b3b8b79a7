"""Named maps that are always available to the library and the CLI."""

from __future__ import annotations

from fractions import Fraction as Q

from .dynamics import CollatzMap, scalar_map, validate_map


def shortened_3n_plus_1() -> CollatzMap:
    # n even -> n/2, n odd -> (3n+1)/2
    return scalar_map(2, [Q(1, 2), Q(3, 2)], [0, Q(1, 2)])


def shortened_3n_minus_1() -> CollatzMap:
    # n odd -> (3n-1)/2; conjugate to 3n+1 on the nonpositive integers
    return scalar_map(2, [Q(1, 2), Q(3, 2)], [0, Q(-1, 2)])


def classical() -> CollatzMap:
    # n even -> n/2, n odd -> 3n+1
    return scalar_map(2, [Q(1, 2), 3], [0, 1])


def shift_2() -> CollatzMap:
    # n -> n + 2; lambda = 1, mu = 2, so the kernel has a pole of order 2 at zero
    return scalar_map(1, [1], [2])


def double_3n_plus_1() -> CollatzMap:
    """Two independent copies of the shortened 3n+1 map, one per coordinate."""
    a = (Q(1, 2), Q(3, 2))
    b = (Q(0), Q(1, 2))
    branches = {}
    for r1 in range(2):
        for r2 in range(2):
            A = [[a[r1], 0], [0, a[r2]]]
            branches[(r1, r2)] = (A, [b[r1], b[r2]])
    return validate_map(2, (2, 2), branches)


def coupled_2d() -> CollatzMap:
    """A 2-D map whose branch in each coordinate depends on both parities.

    Coordinate 1: n1/2 if n1 even, else (3n1+1)/2 when n2 is even and
    (n1+1)/2 when n2 is odd.  Coordinate 2: n2/2 if n2 even, else n2 when
    n1 is even and (3n2+1)/2 when n1 is odd.  The (1, 1) class has
    mu_1 = lambda_1 = 1, which yields a pole-at-zero term in that dimension.
    """
    h = Q(1, 2)
    branches = {
        (0, 0): ([[h, 0], [0, h]], [0, 0]),
        (0, 1): ([[h, 0], [0, 1]], [0, 0]),
        (1, 0): ([[Q(3, 2), 0], [0, h]], [h, 0]),
        (1, 1): ([[h, 0], [0, Q(3, 2)]], [h, h]),
    }
    return validate_map(2, (2, 2), branches)


PRESETS = {
    "3n+1": shortened_3n_plus_1,
    "3n-1": shortened_3n_minus_1,
    "classical": classical,
    "double-3n+1": double_3n_plus_1,
    "coupled-2d": coupled_2d,
    "shift-2": shift_2,
}


def get_preset(name: str) -> CollatzMap:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
