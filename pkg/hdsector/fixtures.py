"""
Published results for the example potential V = q qddot^2.

Terms are (coeff, qPow, qdotPow, omegaPow); in the Darboux tables q
and qdot stand for x and xdot.
"""

from sympy.polys.domains import QQ

from .algebra import PHASE, GSeries, phase_monomial, rational

EXAMPLE_MONOMIAL = (1, 0, 2)

F_TERMS = [
    [(-1, 1, 0, 2)],
    [(-5, 2, 0, 4), (4, 0, 2, 2)],
    [(-76, 3, 0, 6), (140, 1, 2, 4)],
    [(-1959, 4, 0, 8), (6800, 2, 2, 6), (-736, 0, 4, 4)],
]

INVERSE_MAP_TERMS = [
    [(1, 1, 0, 0)],
    [(1, 2, 0, 2), (-2, 0, 2, 0)],
    [(rational(50, 3), 3, 0, 4), (-18, 1, 2, 2)],
    [
        (rational(760, 3), 4, 0, 6),
        (-716, 2, 2, 4),
        (-84, 0, 4, 2),
    ],
    [
        (rational(111422, 15), 5, 0, 8),
        (-25928, 3, 2, 6),
        (3030, 1, 4, 4),
    ],
]

NORMAL_FORM_TERMS = [
    [],
    [],
    [(rational(25, 6), 4, 0, 6)],
    [],
    [(rational(30136, 45), 6, 0, 10)],
]

FIRST_ORDER_HAMILTONIAN_TERMS = [
    [(rational(1, 2), 0, 2, 0), (rational(1, 2), 2, 0, 2)],
    [(-1, 3, 0, 4), (-4, 1, 2, 2)],
]


def poly(terms):
    result = PHASE.zero
    for c, i, j, k in terms:
        result += phase_monomial(QQ.convert(c), i, j, k)
    return result


def series(table):
    return GSeries.of([poly(t) for t in table], len(table) - 1)


def beta_forward_map(beta):
    """
    (x(q, qdot), xdot(q, qdot)) of the beta family through g^2.
    """
    b = QQ.convert(beta)
    x = [
        [(1, 1, 0, 0)],
        [(b, 2, 0, 2), (2 * b + 4, 0, 2, 0)],
        [
            (-2 * b - rational(50, 3), 3, 0, 4),
            (-32 - 2 * b**2 - 24 * b, 1, 2, 2),
        ],
    ]
    xdot = [
        [(1, 0, 1, 0)],
        [(-2 * (b + 4), 1, 1, 2)],
        [
            (4 * b**2 + 22 * b - 26, 2, 1, 4),
            (-2 * (b**2 + 4 * b), 0, 3, 2),
        ],
    ]
    return series(x), series(xdot)


def beta_normal_form(beta):
    """
    Vt(x) of the beta family through g^2.
    """
    b = QQ.convert(beta)
    return series(
        [
            [],
            [(-(b + 1), 3, 0, 4)],
            [(5 * (b**2 / 2 + b + rational(4, 3)), 4, 0, 6)],
        ]
    )
