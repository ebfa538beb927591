"""Finitely presented modules over Z[x]/(x^2).

A module is Z^rank modulo the column lattice of its presentation, with x
acting through an integer matrix that preserves the relations. Homology of
complexes of such modules is a subquotient of lattices, so everything here
reduces to the normal forms in exactnum.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

from sympy import factorint

from injres.errors import ModuleAxiomError
from injres.exactnum import (
    IntMatrix,
    column_basis,
    lattice_contains,
    preimage,
    rank,
    smith_normal_form,
    solve_integer,
)
from injres.ring import X_MATRIX, Ideal, PrimeIdeal, RingElt

log = logging.getLogger(__name__)


def block_diagonal(*blocks: IntMatrix) -> IntMatrix:
    nrows = sum(b.nrows for b in blocks)
    ncols = sum(b.ncols for b in blocks)
    rows = [[0] * ncols for _ in range(nrows)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.nrows):
            for j in range(b.ncols):
                rows[r0 + i][c0 + j] = b[i, j]
        r0 += b.nrows
        c0 += b.ncols
    return IntMatrix.from_rows(rows, ncols)


@dataclass(frozen=True)
class FgModule:
    rank: int
    presentation: IntMatrix
    x_action: IntMatrix

    def __post_init__(self):
        if self.presentation.nrows != self.rank or self.x_action.shape != (self.rank, self.rank):
            raise ModuleAxiomError(f'presentation or x-action does not fit rank {self.rank}')
        if not lattice_contains(self.relations, self.x_action @ self.presentation):
            raise ModuleAxiomError('x-action does not preserve the relations')
        if not lattice_contains(self.relations, self.x_action @ self.x_action):
            raise ModuleAxiomError('x-action squared does not vanish modulo relations')

    @classmethod
    def zero(cls) -> FgModule:
        return cls(0, IntMatrix.zeros(0, 0), IntMatrix.zeros(0, 0))

    @classmethod
    def free(cls, r: int) -> FgModule:
        """R^r in interleaved coordinates (a_1, b_1, a_2, b_2, ...)."""
        x = block_diagonal(*[X_MATRIX] * r) if r else IntMatrix.zeros(0, 0)
        return cls(2 * r, IntMatrix.zeros(2 * r, 0), x)

    @classmethod
    def cyclic(cls, ideal: Ideal) -> FgModule:
        """R/I."""
        return cls(2, ideal.lattice, X_MATRIX)

    @classmethod
    def residue(cls, q: int) -> FgModule:
        return cls.cyclic(PrimeIdeal.maximal_at(q).ideal)

    @classmethod
    def abelian(cls, moduli: Sequence[int]) -> FgModule:
        """Z/m_1 + ... with x acting as zero; modulus 0 gives a copy of Z."""
        n = len(moduli)
        return cls(n, IntMatrix.diagonal(list(moduli), n, n), IntMatrix.zeros(n, n))

    @cached_property
    def relations(self) -> IntMatrix:
        return column_basis(self.presentation)

    @cached_property
    def smith_diagonal(self) -> tuple[int, ...]:
        s, _, _ = smith_normal_form(self.presentation)
        return tuple(d for d in s.diagonal_entries() if d != 0)

    @property
    def torsion_orders(self) -> tuple[int, ...]:
        return tuple(d for d in self.smith_diagonal if d > 1)

    @property
    def free_rank(self) -> int:
        return self.rank - len(self.smith_diagonal)

    @property
    def torsion_primes(self) -> list[int]:
        primes = set()
        for d in self.torsion_orders:
            primes.update(factorint(d))
        return sorted(primes)

    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion_orders

    def contains(self, v: Sequence[int]) -> bool:
        """True when v is zero in the module."""
        return solve_integer(self.relations, v) is not None if self.rank else True

    def x_act(self, v: Sequence[int]) -> tuple[int, ...]:
        return self.x_action.apply(v)

    def scalar_act(self, r: RingElt, v: Sequence[int]) -> tuple[int, ...]:
        a, b = r.coords
        xv = self.x_act(v)
        return tuple(a * s + b * t for s, t in zip(v, xv, strict=True))

    def annihilator(self, v: Sequence[int]) -> Ideal:
        """{(c, d) : c v + d x v lies in the relations}."""
        v = tuple(v)
        f = IntMatrix.from_columns([v, self.x_act(v)], self.rank)
        return Ideal.from_lattice(preimage(f, self.relations))

    @cached_property
    def x_kernel(self) -> IntMatrix:
        return preimage(self.x_action, self.relations)

    def killed_by(self, q: int) -> IntMatrix:
        """Lattice of vectors killed by q and by x."""
        n = self.rank
        stacked = IntMatrix.identity(n).scale(q).vstack(self.x_action)
        return preimage(stacked, block_diagonal(self.relations, self.relations))

    def associated_primes(self) -> dict[PrimeIdeal, tuple[int, ...]]:
        """Each associated prime with an element whose annihilator is exactly that prime."""
        found: dict[PrimeIdeal, tuple[int, ...]] = {}
        base_rank = rank(self.relations)
        for col in self.x_kernel.columns():
            if rank(self.relations.hstack(IntMatrix.from_columns([col], self.rank))) > base_rank:
                found[PrimeIdeal.minimal_x()] = col
                break
        for q in self.torsion_primes:
            for col in self.killed_by(q).columns():
                if not self.contains(col):
                    found[PrimeIdeal.maximal_at(q)] = col
                    break
        log.debug('ass of %s: %s', self, ', '.join(map(str, found)))
        return found

    def vanishes_at(self, prime: PrimeIdeal) -> bool:
        if self.free_rank > 0:
            return False
        if not prime.is_maximal:
            return True
        return all(d % prime.q for d in self.torsion_orders)

    def socle_dimension(self, prime: PrimeIdeal) -> int:
        """Dimension of Hom(k(P), M_P) over the residue field."""
        if not prime.is_maximal:
            return rank(self.x_kernel) - rank(self.relations)
        sub = subquotient(self.killed_by(prime.q), self.relations, self.x_action)
        return len(sub.torsion_orders)

    def describe(self) -> str:
        parts = [f'Z^{self.free_rank}'] if self.free_rank else []
        parts += [f'Z/{d}' for d in self.torsion_orders]
        return 'fg[' + (' + '.join(parts) or '0') + ']'

    def __str__(self) -> str:
        return self.describe()


@dataclass(frozen=True)
class FgElt:
    module: FgModule
    coords: tuple[int, ...]

    def x_act(self) -> FgElt:
        return FgElt(self.module, self.module.x_act(self.coords))

    def is_zero(self) -> bool:
        return self.module.contains(self.coords)

    def annihilator(self) -> Ideal:
        return self.module.annihilator(self.coords)


def ass_fg(m: FgModule) -> set[PrimeIdeal]:
    return set(m.associated_primes())


def subquotient(numerator: IntMatrix, denominator: IntMatrix, x_action: IntMatrix) -> FgModule:
    """The module span(numerator) / span(denominator), re-coordinatised on a basis of the numerator."""
    basis = column_basis(numerator)
    k = basis.ncols
    relations = []
    for col in denominator.columns():
        coords = solve_integer(basis, col)
        if coords is None:
            raise ModuleAxiomError('denominator is not inside the numerator')
        relations.append(coords)
    x_cols = []
    for col in basis.columns():
        coords = solve_integer(basis, x_action.apply(col))
        if coords is None:
            raise ModuleAxiomError('numerator is not stable under x')
        x_cols.append(coords)
    return FgModule(
        k,
        IntMatrix.from_columns(relations, k),
        IntMatrix.from_columns(x_cols, k),
    )


def fp_homology(
    incoming: IntMatrix | None,
    outgoing: IntMatrix | None,
    relations: IntMatrix,
    relations_out: IntMatrix | None,
    x_action: IntMatrix,
) -> FgModule:
    """Homology at a term Z^n/L of a complex of finitely presented modules.

    `incoming` maps into this term, `outgoing` leaves it towards a term with
    relations `relations_out`. Either map may be None at the ends.
    """
    n = relations.nrows
    if outgoing is None:
        cycles = IntMatrix.identity(n)
    else:
        cycles = preimage(outgoing, relations_out)
    boundaries = relations if incoming is None else relations.hstack(incoming)
    return subquotient(cycles, boundaries, x_action)


def direct_sum(*modules: FgModule) -> FgModule:
    if not modules:
        return FgModule.zero()
    return FgModule(
        sum(m.rank for m in modules),
        block_diagonal(*[m.presentation for m in modules]),
        block_diagonal(*[m.x_action for m in modules]),
    )
