"""
Quantum spectrum of H = p^2/2 + omega^2 x^2/2 + g c3 x^3 + g^2 c4 x^4.

Energies are computed to order g^2 in Rayleigh-Schroedinger
perturbation theory with exact ladder-operator matrix elements, and
cross-checked by diagonalizing H in a truncated Fock basis.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from sympy.polys.domains import QQ

logger = logging.getLogger(__name__)


def _ladder_power(p, n):
    """
    (a + a^dagger)^p applied to |n) in the unnormalized basis
    |j) = sqrt(j!) |j>, where a^dagger |j) = |j+1) and
    a |j) = j |j-1).
    Returns {j: integer coefficient}.
    """
    state = {n: 1}
    for _ in range(p):
        nxt = {}
        for j, c in state.items():
            nxt[j + 1] = nxt.get(j + 1, 0) + c
            if j:
                nxt[j - 1] = nxt.get(j - 1, 0) + c * j
        state = nxt
    return state


def ladder_element_squared(p, k, n):
    """
    |<k| (a + a^dagger)^p |n>|^2 as an exact rational.
    """
    c = _ladder_power(p, n).get(k, 0)
    num, den = 1, 1
    for j in range(min(k, n) + 1, max(k, n) + 1):
        if k > n:
            num *= j
        else:
            den *= j
    return QQ(c * c * num, den)


def ladder_diagonal(p, n):
    """
    <n| (a + a^dagger)^p |n>.
    """
    return QQ(_ladder_power(p, n).get(n, 0))


@dataclass(frozen=True)
class CubicQuarticModel:
    """
    Coefficients of g x^3 and g^2 x^4, each a rational times a power
    of omega.
    """

    c3: object
    c3_omega: int
    c4: object
    c4_omega: int

    @classmethod
    def from_beta(cls, beta):
        """
        The beta family of the q qddot^2 example.
        """
        beta = QQ.convert(beta)
        return cls(
            -(beta + 1),
            4,
            5 * (beta**2 / 2 + beta + QQ(4, 3)),
            6,
        )

    @classmethod
    def from_normal_form(cls, normal_form):
        """
        Read c3 and c4 off Vt; anything else at orders 1 and 2 is
        rejected.
        """
        if normal_form.order < 2:
            raise ValueError(
                "The normal form must be computed through g^2"
            )
        coeffs = []
        for order, power in ((1, 3), (2, 4)):
            term = normal_form.potential[order]
            keys = set(term.keys())
            if not keys:
                coeffs += [QQ(0), 0]
                continue
            if len(keys) > 1 or next(iter(keys))[:2] != (power, 0):
                raise ValueError(
                    f"Vt at g^{order} is {term.as_expr()}, not a "
                    f"multiple of x^{power}"
                )
            ((_, _, k), c), = term.items()
            coeffs += [c, k]
        return cls(*coeffs)


@dataclass(frozen=True)
class EnergyLevel:
    """
    E_n = hbar omega (n + 1/2) + g^2 hbar^2 sum c omega^k over the
    (k, c) pairs of correction.
    """

    n: int
    correction: tuple

    @property
    def harmonic(self):
        return QQ(2 * self.n + 1, 2)

    def evaluate(self, g, omega=1.0, hbar=1.0):
        shift = sum(
            float(c) * omega**k for k, c in self.correction
        )
        return (
            hbar * omega * float(self.harmonic)
            + g**2 * hbar**2 * shift
        )


@dataclass(frozen=True)
class EnergyTable:
    levels: tuple

    def __getitem__(self, n):
        return self.levels[n]

    def __len__(self):
        return len(self.levels)

    def evaluate(self, g, omega=1.0, hbar=1.0):
        return np.array(
            [lvl.evaluate(g, omega, hbar) for lvl in self.levels]
        )


def quartic_shift(n):
    """
    First order shift of x^4 in units of (hbar/omega)^2.
    """
    return ladder_diagonal(4, n) / 4


def cubic_shift(n):
    """
    Second order shift of x^3 in units of hbar^2 / omega^4, for unit
    coefficient.
    """
    total = QQ(0)
    for k in _ladder_power(3, n):
        if k != n:
            total += ladder_element_squared(3, k, n) / (k - n)
    return -total / 8


def rs_energies(model, n_max):
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    levels = []
    for n in range(n_max + 1):
        terms = {}
        for k, c in (
            (model.c4_omega - 2, model.c4 * quartic_shift(n)),
            (2 * model.c3_omega - 4, model.c3**2 * cubic_shift(n)),
        ):
            if c:
                terms[k] = terms.get(k, QQ(0)) + c
        levels.append(
            EnergyLevel(n, tuple(sorted(terms.items())))
        )
    return EnergyTable(tuple(levels))


def beta_family_energy(n, beta):
    """
    Closed form of the second order energy of the beta family, in
    units of g^2 hbar^2 omega^4.
    """
    beta = QQ.convert(beta)
    return QQ(25, 8) * (n**2 + (n + 1) ** 2) + (beta + 1) ** 2 / 2


@dataclass(frozen=True)
class Diagonalization:
    energies: np.ndarray
    change: float
    converged: bool
    basis_size: int


def _hamiltonian_matrix(model, g, size, omega, hbar):
    # Powers of x are built in an enlarged basis so the kept block is
    # exact.
    big = size + 4
    n = np.arange(big, dtype=float)
    a = np.diag(np.sqrt(n[1:]), 1)
    x = np.sqrt(hbar / (2 * omega)) * (a + a.T)
    x3 = np.linalg.matrix_power(x, 3)[:size, :size]
    x4 = np.linalg.matrix_power(x, 4)[:size, :size]
    h = np.diag(hbar * omega * (n[:size] + 0.5))
    h += g * float(model.c3) * omega**model.c3_omega * x3
    h += g**2 * float(model.c4) * omega**model.c4_omega * x4
    return h


def _lowest(model, g, size, levels, omega, hbar):
    h = _hamiltonian_matrix(model, g, size, omega, hbar)
    return eigh(h, eigvals_only=True, subset_by_index=[0, levels - 1])


def fock_diagonalize(
    model,
    g,
    basis_size=200,
    levels=5,
    omega=1.0,
    hbar=1.0,
    tol=1e-9,
):
    """
    Lowest eigenvalues of H in the first basis_size Fock states.

    Convergence is judged by repeating with 50 more states; a change
    above tol is reported, not raised.
    """
    if levels < 1 or basis_size < levels:
        raise ValueError("Need 1 <= levels <= basis_size")
    energies = _lowest(model, g, basis_size, levels, omega, hbar)
    wider = _lowest(model, g, basis_size + 50, levels, omega, hbar)
    change = float(np.max(np.abs(wider - energies)))
    converged = change <= tol
    if not converged:
        logger.warning(
            "Fock diagonalization not converged: levels move by %.3g "
            "from %d to %d states",
            change,
            basis_size,
            basis_size + 50,
        )
    return Diagonalization(energies, change, converged, basis_size)

