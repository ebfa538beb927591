"""Brute-force ground truth over the finite rings Z/p^k[x]/(x^2).

A FiniteModule is a subgroup of (Z/m_1 + ... + Z/m_n), closed under an
integer x-matrix, modulo a smaller such subgroup. Everything is decided by
enumerating elements, so sizes are capped by the oracle limits in config.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property
from math import gcd, lcm, prod

from funlog import log_calls
from sympy import primefactors

from injres.config import (
    HOMOTOPY_CANDIDATE_LIMIT,
    ORACLE_AMBIENT_LIMIT,
    ORACLE_ELEMENT_LIMIT,
)
from injres.errors import ModuleAxiomError, OracleSizeError

log = logging.getLogger(__name__)

Vector = tuple[int, ...]
Matrix = tuple[tuple[int, ...], ...]
Scalar = tuple[int, int]


def _apply(matrix: Matrix, v: Vector, moduli: Sequence[int]) -> Vector:
    return tuple(
        sum(row[j] * v[j] for j in range(len(v))) % m for row, m in zip(matrix, moduli, strict=True)
    )


def _block_diagonal(blocks: Sequence[Matrix]) -> Matrix:
    size = sum(len(b) for b in blocks)
    rows = [[0] * size for _ in range(size)]
    offset = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, value in enumerate(row):
                rows[offset + i][offset + j] = value
        offset += len(b)
    return tuple(tuple(r) for r in rows)


@dataclass(frozen=True)
class FiniteModule:
    moduli: tuple[int, ...]
    x_action: Matrix
    elements: frozenset[Vector] | None = None
    relations: frozenset[Vector] = frozenset()

    def __post_init__(self):
        if prod(self.moduli) > ORACLE_ELEMENT_LIMIT:
            raise OracleSizeError(f'ambient group of size {prod(self.moduli)} is too large')
        zero = tuple(0 for _ in self.moduli)
        object.__setattr__(self, 'relations', frozenset(self.relations) | {zero})
        members = set(self.members)
        for u in members:
            if self.x_act(u) not in members:
                raise ModuleAxiomError(f'x.{u} leaves the module')
            if self.x_act(self.x_act(u)) not in self.relations:
                raise ModuleAxiomError(f'x^2 does not kill {u}')
        if not self.relations <= members:
            raise ModuleAxiomError('relations are not inside the module')
        if self.elements is not None:
            for u in self.elements:
                for v in self.elements:
                    if self.add(u, v) not in members:
                        raise ModuleAxiomError('elements are not closed under addition')

    @classmethod
    def ring(cls, p: int, k: int = 1) -> FiniteModule:
        """Z/p^k[x]/(x^2) over itself, coordinates (a, b) for a + bx."""
        return cls((p**k, p**k), ((0, 0), (1, 0)))

    @classmethod
    def residue(cls, p: int) -> FiniteModule:
        return cls((p,), ((0,),))

    @classmethod
    def injective_truncation(cls, p: int, k: int) -> FiniteModule:
        """Elements of EMax(p) of order dividing p^k, numerators over p^k; x.(f0, f1) = (f1, 0)."""
        return cls((p**k, p**k), ((0, 1), (0, 0)))

    @classmethod
    def zero(cls) -> FiniteModule:
        return cls((), ())

    @property
    def exponent(self) -> int:
        return lcm(*self.moduli) if self.moduli else 1

    @property
    def p(self) -> int:
        primes = primefactors(self.exponent)
        if len(primes) != 1:
            raise ModuleAxiomError(f'exponent {self.exponent} is not a prime power')
        return primes[0]

    def ambient(self) -> Iterator[Vector]:
        return itertools.product(*(range(m) for m in self.moduli))

    @cached_property
    def members(self) -> tuple[Vector, ...]:
        if self.elements is None:
            return tuple(self.ambient())
        return tuple(sorted(self.elements))

    def reduce(self, v: Sequence[int]) -> Vector:
        return tuple(c % m for c, m in zip(v, self.moduli, strict=True))

    def add(self, u: Vector, v: Vector) -> Vector:
        return self.reduce(a + b for a, b in zip(u, v, strict=True))

    def neg(self, u: Vector) -> Vector:
        return self.reduce(-a for a in u)

    def scale(self, a: int, u: Vector) -> Vector:
        return self.reduce(a * c for c in u)

    def x_act(self, u: Vector) -> Vector:
        return _apply(self.x_action, u, self.moduli)

    def act(self, r: Scalar, u: Vector) -> Vector:
        a, b = r
        return self.add(self.scale(a, u), self.scale(b, self.x_act(u)))

    def is_zero(self, u: Vector) -> bool:
        return u in self.relations

    def equal(self, u: Vector, v: Vector) -> bool:
        return self.is_zero(self.add(u, self.neg(v)))

    @cached_property
    def cosets(self) -> tuple[Vector, ...]:
        """One representative per element of the quotient, zero first."""
        seen: set[Vector] = set()
        reps = []
        for u in self.members:
            if u in seen:
                continue
            reps.append(u)
            seen.update(self.add(u, r) for r in self.relations)
        return tuple(reps)

    @property
    def size(self) -> int:
        return len(self.members) // len(self.relations)

    def ring_elements(self) -> Iterator[Scalar]:
        n = self.exponent
        return itertools.product(range(n), range(n))

    def annihilator(self, u: Vector) -> frozenset[Scalar]:
        return frozenset(r for r in self.ring_elements() if self.is_zero(self.act(r, u)))


# ----------------------------- Finite rings ----------------------------- #


def ring_mul(r: Scalar, s: Scalar, n: int) -> Scalar:
    return (r[0] * s[0]) % n, (r[0] * s[1] + r[1] * s[0]) % n


def is_prime_ideal(ideal: frozenset[Scalar], n: int) -> bool:
    """Literal test in Z/n[x]/(x^2): proper, and r s in I forces r or s in I."""
    ring = list(itertools.product(range(n), range(n)))
    if len(ideal) == len(ring):
        return False
    outside = [r for r in ring if r not in ideal]
    return all(ring_mul(r, s, n) not in ideal for r in outside for s in outside)


def maximal_ideal(p: int, n: int) -> frozenset[Scalar]:
    """(p, x) in Z/n[x]/(x^2); for n = p this is (x)."""
    return frozenset((a, b) for a in range(n) for b in range(n) if a % p == 0)


def ideal_from_lattice(contains, n: int) -> frozenset[Scalar]:
    """The finite ideal cut out by a membership test on integer pairs."""
    return frozenset((a, b) for a in range(n) for b in range(n) if contains(a, b))


# --------------------------- Brute operations --------------------------- #


@log_calls(level='debug', show_timing_only=True)
def brute_ass(m: FiniteModule) -> set[frozenset[Scalar]]:
    if m.size > ORACLE_ELEMENT_LIMIT:
        raise OracleSizeError(f'{m.size} elements exceed the oracle limit')
    n = m.exponent
    found = set()
    for u in m.cosets[1:]:
        ann = m.annihilator(u)
        if is_prime_ideal(ann, n):
            found.add(ann)
    return found


def brute_socle(m: FiniteModule) -> FiniteModule:
    """Elements killed by the maximal ideal, as a submodule."""
    n = m.exponent
    maximal = maximal_ideal(m.p, n) if m.moduli else frozenset()
    killed = frozenset(u for u in m.members if all(m.is_zero(m.act(r, u)) for r in maximal))
    return FiniteModule(m.moduli, m.x_action, killed, m.relations)


def kernel_submodule(m: FiniteModule) -> FiniteModule:
    """Elements killed by x."""
    killed = frozenset(u for u in m.members if m.is_zero(m.x_act(u)))
    return FiniteModule(m.moduli, m.x_action, killed, m.relations)


@log_calls(level='debug', show_timing_only=True)
def brute_essential(sub: FiniteModule, amb: FiniteModule) -> bool:
    """Every nonzero cyclic submodule of amb meets sub nontrivially."""
    if len(amb.members) > ORACLE_AMBIENT_LIMIT:
        raise OracleSizeError(f'ambient module of size {len(amb.members)} is too large')
    inside = set(sub.members)
    if not inside <= set(amb.members):
        raise ModuleAxiomError('sub is not contained in amb')
    for u in amb.cosets[1:]:
        multiples = (amb.act(r, u) for r in amb.ring_elements())
        if not any(not amb.is_zero(v) and v in inside for v in multiples):
            log.debug('R.%s misses the submodule', u)
            return False
    return True


def _require_free_coordinates(m: FiniteModule) -> None:
    if m.elements is not None or len(m.relations) > 1:
        raise ModuleAxiomError('this operation needs a module on all of its coordinates')


@log_calls(level='debug', show_timing_only=True)
def brute_hom(a: FiniteModule, b: FiniteModule) -> FiniteModule:
    """Hom(a, b) as tuples of images of a's coordinate generators."""
    _require_free_coordinates(a)
    count = len(a.moduli)
    candidates = []
    for order in a.moduli:
        candidates.append([y for y in b.members if b.is_zero(b.scale(order, y))])
    if prod(len(c) for c in candidates) > ORACLE_ELEMENT_LIMIT:
        raise OracleSizeError('too many candidate homomorphisms')
    homs = set()
    for images in itertools.product(*candidates):
        ok = True
        for i in range(count):
            x_image = tuple(0 for _ in b.moduli)
            for j in range(count):
                x_image = b.add(x_image, b.scale(a.x_action[j][i], images[j]))
            if not b.equal(x_image, b.x_act(images[i])):
                ok = False
                break
        if ok:
            homs.add(tuple(itertools.chain.from_iterable(images)))
    return FiniteModule(
        b.moduli * count,
        _block_diagonal([b.x_action] * count),
        frozenset(homs),
        frozenset(
            tuple(itertools.chain.from_iterable(rs))
            for rs in itertools.product(b.relations, repeat=count)
        ),
    )


def evaluate_hom(f: Vector, a: FiniteModule, b: FiniteModule, u: Vector) -> Vector:
    width = len(b.moduli)
    total = tuple(0 for _ in b.moduli)
    for i, coeff in enumerate(u):
        total = b.add(total, b.scale(coeff, f[i * width : (i + 1) * width]))
    return total


def _subgroup(gens: Sequence[Vector], moduli: Sequence[int]) -> frozenset[Vector]:
    zero = tuple(0 for _ in moduli)
    group = {zero}
    for g in gens:
        multiples = set()
        step = zero
        while True:
            multiples.add(step)
            step = tuple((s + c) % m for s, c, m in zip(step, g, moduli, strict=True))
            if step == zero:
                break
        group = {
            tuple((s + t) % m for s, t, m in zip(u, v, moduli, strict=True))
            for u in group
            for v in multiples
        }
        if len(group) > ORACLE_ELEMENT_LIMIT:
            raise OracleSizeError('generated subgroup is too large')
    return frozenset(group)


@log_calls(level='debug', show_timing_only=True)
def brute_tensor(a: FiniteModule, b: FiniteModule) -> FiniteModule:
    """a tensor_R b: the Z-tensor on coordinate pairs modulo x u (x) v - u (x) x v."""
    _require_free_coordinates(a)
    _require_free_coordinates(b)
    na, nb = len(a.moduli), len(b.moduli)
    moduli = tuple(gcd(m, n) for m in a.moduli for n in b.moduli)

    def index(i: int, j: int) -> int:
        return i * nb + j

    gens = []
    for i in range(na):
        for j in range(nb):
            rel = [0] * (na * nb)
            for k in range(na):
                rel[index(k, j)] += a.x_action[k][i]
            for t in range(nb):
                rel[index(i, t)] -= b.x_action[t][j]
            gens.append(tuple(c % m for c, m in zip(rel, moduli, strict=True)))
    x_rows = [[0] * (na * nb) for _ in range(na * nb)]
    for i in range(na):
        for j in range(nb):
            for k in range(na):
                x_rows[index(k, j)][index(i, j)] = a.x_action[k][i]
    return FiniteModule(
        moduli, tuple(tuple(r) for r in x_rows), None, _subgroup(gens, moduli)
    )


@dataclass(frozen=True)
class FiniteComplex:
    """Terms in degrees lo .. lo+len(terms)-1; maps[k] goes from terms[k] to terms[k+1]."""

    lo: int
    terms: tuple[FiniteModule, ...]
    maps: tuple[Matrix, ...] = ()

    def __post_init__(self):
        if len(self.maps) != max(len(self.terms) - 1, 0):
            raise ModuleAxiomError('one map between each pair of terms')
        for k in range(len(self.maps) - 1):
            for u in self.terms[k].members:
                if not self.terms[k + 2].is_zero(self.apply(self.lo + k + 1, self.apply(self.lo + k, u))):
                    raise ModuleAxiomError(f'd^2 does not vanish on {u}')

    @property
    def hi(self) -> int:
        return self.lo + len(self.terms) - 1

    def term(self, n: int) -> FiniteModule:
        return self.terms[n - self.lo] if self.lo <= n <= self.hi else FiniteModule.zero()

    def apply(self, n: int, u: Vector) -> Vector:
        if not self.lo <= n < self.hi:
            return ()
        return _apply(self.maps[n - self.lo], u, self.term(n + 1).moduli)


@log_calls(level='debug', show_timing_only=True)
def brute_homology(c: FiniteComplex, degree: int) -> FiniteModule:
    term = c.term(degree)
    if not term.moduli:
        return FiniteModule.zero()
    if degree < c.hi:
        target = c.term(degree + 1)
        cycles = frozenset(u for u in term.members if target.is_zero(c.apply(degree, u)))
    else:
        cycles = frozenset(term.members)
    if degree > c.lo:
        source = c.term(degree - 1)
        boundaries = frozenset(c.apply(degree - 1, u) for u in source.members)
    else:
        boundaries = frozenset()
    return FiniteModule(term.moduli, term.x_action, cycles, boundaries)


@dataclass(frozen=True)
class Found:
    homotopy: dict


@dataclass(frozen=True)
class NoHomotopy:
    searched: int
    exempt: tuple[int, ...] = ()


def _basis(m: FiniteModule) -> list[Vector]:
    n = len(m.moduli)
    return [tuple(int(i == j) for j in range(n)) for i in range(n)]


@log_calls(level='debug', show_timing_only=True)
def brute_homotopy(c: FiniteComplex, exempt: Sequence[int] = ()) -> Found | NoHomotopy:
    """Search h with d h + h d = id on every degree outside `exempt`."""
    degrees = list(range(c.lo + 1, c.hi + 1))
    spaces = [brute_hom(c.term(n), c.term(n - 1)).members for n in degrees]
    total = prod(len(s) for s in spaces)
    if total > HOMOTOPY_CANDIDATE_LIMIT:
        raise OracleSizeError(f'{total} candidate homotopies exceed the search limit')
    checked = [n for n in range(c.lo, c.hi + 1) if n not in exempt and c.term(n).moduli]
    searched = 0
    for choice in itertools.product(*spaces):
        searched += 1
        h = dict(zip(degrees, choice, strict=True))
        if all(_homotopy_holds(c, h, n) for n in checked):
            return Found(h)
    log.debug('No homotopy among %d candidates', searched)
    return NoHomotopy(searched, tuple(exempt))


def _homotopy_holds(c: FiniteComplex, h: dict, n: int) -> bool:
    term = c.term(n)
    for e in _basis(term):
        total = tuple(0 for _ in term.moduli)
        if n in h:
            down = evaluate_hom(h[n], term, c.term(n - 1), e)
            total = term.add(total, c.apply(n - 1, down))
        if n + 1 in h and n < c.hi:
            up = c.apply(n, e)
            total = term.add(total, evaluate_hom(h[n + 1], c.term(n + 1), term, up))
        if not term.equal(total, e):
            return False
    return True
