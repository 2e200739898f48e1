"""Lumped-mass 1D elastic chain: mass, stiffness and the reduced matrix H = M^-1 K.

Nodes are indexed 0..N-1.  A node is a flag row when it lies in a Dirichlet
interval; its row and column of H reduce to F on the diagonal.  Every index
of the N = 2^n grid belongs to the domain, so there are no padding rows in
this model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..fixedpoint import to_fraction


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and n & (n - 1) == 0


@dataclass(frozen=True)
class FemProblem1D:
    N: int
    Y: Fraction = Fraction(1)
    rho: Fraction = Fraction(1)
    domain: tuple = (Fraction(0), Fraction(1))
    dirichlet: tuple = ()
    F: Fraction | None = None

    def __post_init__(self):
        if not isinstance(self.N, int) or not _is_power_of_two(self.N):
            raise ValueError(f"N={self.N} must be a power of two >= 2")
        Y, rho = to_fraction(self.Y), to_fraction(self.rho)
        a, b = (to_fraction(v) for v in self.domain)
        if Y <= 0 or rho <= 0:
            raise ValueError("Y and rho must be positive")
        if b <= a:
            raise ValueError("domain must have positive length")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "domain", (a, b))
        ivs = []
        for lo, hi in self.dirichlet:
            lo, hi = int(lo), int(hi)
            if not 0 <= lo <= hi < self.N:
                raise ValueError(f"Dirichlet interval [{lo}, {hi}] outside 0..{self.N - 1}")
            ivs.append((lo, hi))
        object.__setattr__(self, "dirichlet", tuple(ivs))
        F = 4 * self.unit if self.F is None else to_fraction(self.F)
        if F <= 3 * self.unit:
            raise ValueError(f"flag F={F} must exceed 3Y/(rho delta^2) = {3 * self.unit}")
        object.__setattr__(self, "F", F)

    @property
    def delta(self) -> Fraction:
        a, b = self.domain
        return (b - a) / self.N

    @property
    def unit(self) -> Fraction:
        """Y / (rho delta^2), the scale of every stiffness-derived entry of H."""
        return self.Y / (self.rho * self.delta ** 2)

    @property
    def nbits(self) -> int:
        return self.N.bit_length() - 1

    @property
    def max_norm(self) -> Fraction:
        return max(2 * self.unit, self.F)

    def in_domain(self, i: int) -> bool:
        return 0 <= i < self.N

    def is_dirichlet(self, i: int) -> bool:
        return any(lo <= i <= hi for lo, hi in self.dirichlet)

    def is_flagged(self, i: int) -> bool:
        return self.is_dirichlet(i) or not self.in_domain(i)

    def is_edge(self, i: int) -> bool:
        return i in (0, self.N - 1)

    def flagged_rows(self) -> list[int]:
        return [i for i in range(self.N) if self.is_flagged(i)]


def mass_entry(i: int, j: int, problem: FemProblem1D) -> Fraction:
    """Lumped mass: rho * delta on the diagonal of domain nodes."""
    if i != j or not problem.in_domain(i):
        return Fraction(0)
    return problem.rho * problem.delta


def stiffness_entry(i: int, j: int, problem: FemProblem1D) -> Fraction:
    if not (problem.in_domain(i) and problem.in_domain(j)):
        return Fraction(0)
    k = problem.Y / problem.delta
    if abs(i - j) == 1:
        return -k
    if i == j:
        return k if problem.is_edge(i) else 2 * k
    return Fraction(0)


def h_entry(i: int, j: int, problem: FemProblem1D) -> Fraction:
    """Entry of M^-1 K with flag rows replaced by F on the diagonal."""
    if problem.is_flagged(i) or problem.is_flagged(j):
        return problem.F if i == j else Fraction(0)
    return stiffness_entry(i, j, problem) / (problem.rho * problem.delta)


def h_prime_entry(i: int, j: int, problem: FemProblem1D) -> Fraction:
    return h_entry(i, j, problem) / problem.max_norm


def assemble(problem: FemProblem1D, reduced: bool = False) -> np.ndarray:
    entry = h_prime_entry if reduced else h_entry
    N = problem.N
    H = np.zeros((N, N))
    for i in range(N):
        for j in range(max(0, i - 1), min(N, i + 2)):
            H[i, j] = float(entry(i, j, problem))
    return H


def assemble_mass_stiffness(problem: FemProblem1D) -> tuple[np.ndarray, np.ndarray]:
    N = problem.N
    M = np.diag([float(mass_entry(i, i, problem)) for i in range(N)])
    K = np.array([[float(stiffness_entry(i, j, problem)) for j in range(N)] for i in range(N)])
    return M, K


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    flagged: int
    flag_multiplicity: int
    max_physical: float | None
    symmetric: bool
    F: float

    @property
    def separated(self) -> bool:
        return self.max_physical is None or self.max_physical < self.F * (1 - 1e-12)

    @property
    def ok(self) -> bool:
        return self.symmetric and self.flag_multiplicity == self.flagged and self.separated

    def lines(self) -> list[str]:
        mp = "none" if self.max_physical is None else f"{self.max_physical:.12g}"
        return [
            f"flagged_rows={self.flagged}",
            f"flag_multiplicity={self.flag_multiplicity}",
            f"max_physical_eigenvalue={mp}",
            f"flag_value={self.F:.12g}",
            f"symmetric={'yes' if self.symmetric else 'no'}",
            f"separated={'yes' if self.separated else 'no'}",
            f"ok={'yes' if self.ok else 'no'}",
        ]


def spectrum_check(problem: FemProblem1D, rtol: float = 1e-9) -> SpectrumReport:
    """Dense eigendecomposition of H and the flag-separation checks."""
    H = assemble(problem)
    symmetric = bool(np.array_equal(H, H.T))
    eig = np.linalg.eigvalsh(H)
    F = float(problem.F)
    flagged = len(problem.flagged_rows())
    # flag rows decouple exactly, so their eigenvalues are F; take the other
    # N - flagged values as the physical spectrum and count any F among them
    # separately, which catches a physical mode that collides with F
    physical = np.linalg.eigvalsh(_free_block(problem, H))
    close = np.isclose(eig, F, rtol=rtol, atol=0.0)
    max_phys = float(physical.max()) if physical.size else None
    return SpectrumReport(eig, flagged, int(close.sum()), max_phys, symmetric, F)


def _free_block(problem: FemProblem1D, H: np.ndarray) -> np.ndarray:
    free = [i for i in range(problem.N) if not problem.is_flagged(i)]
    return H[np.ix_(free, free)]


def random_problem(rng, max_log_n: int = 6, F_scale: Sequence = (4, 6)) -> FemProblem1D:
    """A random chain with a few Dirichlet intervals (used by sweeps and tests)."""
    n = int(rng.integers(1, max_log_n + 1))
    N = 1 << n
    ivs = []
    for _ in range(int(rng.integers(0, 4))):
        lo = int(rng.integers(0, N))
        hi = int(rng.integers(lo, min(N, lo + 1 + N // 4)))
        ivs.append((lo, hi))
    Y = Fraction(int(rng.integers(1, 9)))
    rho = Fraction(int(rng.integers(1, 9)))
    p = FemProblem1D(N, Y, rho, (0, 1), tuple(ivs))
    lo, hi = F_scale
    scale = Fraction(int(rng.integers(lo * 8, hi * 8 + 1)), 8)
    return FemProblem1D(N, Y, rho, (0, 1), tuple(ivs), scale * p.unit)
