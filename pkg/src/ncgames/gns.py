"""Finite-dimensional strategies from a completed rewriting system.

The module spanned by normal-form words ending in the auxiliary letter
is closed under left multiplication by generators; when that closure is
finite every generator acts as a matrix, the class of the auxiliary
letter is the designated state, and the pair is a candidate perfect
strategy.  Basis words are declared orthonormal, which reproduces the
known explicit strategies for the worked examples; when a generator's
matrix fails to be compatible with the involution under that inner
product the verifier reports it (a warning for diagnostics, a failure
for certification).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cyclo import CycloScalar
from .freealg import AlgebraError, Context, NCPoly, Word, render_word
from .gbase import RewriteSystem

Matrix = list  # list of rows of CycloScalar


class GnsError(ValueError):
    pass


@dataclass
class QuotientModule:
    system: RewriteSystem
    basis_words: list          # words ending in the auxiliary letter; first is (aux,)
    index: dict                # word -> position

    @property
    def dimension(self) -> int:
        return len(self.basis_words)


@dataclass
class InfiniteOrTooLarge:
    explored: int
    max_dim: int


@dataclass
class Strategy:
    ctx: Context               # context with the auxiliary letter
    basis_words: list
    matrices: dict             # generator index -> Matrix
    state_index: int = 0
    warnings: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.basis_words)


def build(system: RewriteSystem, max_dim: int = 4096):
    """Breadth-first closure of the auxiliary class under left
    multiplication by the non-auxiliary generators."""
    if not system.complete:
        raise GnsError("closure over a truncated system is unsound")
    ctx = system.ctx
    aux = ctx.alphabet.aux_index
    if aux is None:
        raise GnsError("the rewriting system has no auxiliary letter")
    seed: Word = (aux,)
    if system.normal_form(ctx.monomial(1, seed)).is_zero():
        # the auxiliary letter itself lies in the ideal: zero module
        return QuotientModule(system, [], {})
    generators = [i for i in range(len(ctx.alphabet)) if i != aux]
    basis = {seed: 0}
    frontier = [seed]
    while frontier:
        new_frontier = []
        for w in frontier:
            for g in generators:
                nf = system.normal_form(ctx.monomial(1, (g,) + w))
                for word in nf.terms:
                    if not word or word[-1] != aux:
                        raise GnsError(
                            "module closure produced a word not ending in the "
                            "auxiliary letter; the input system is not an "
                            "augmented ideal")
                    if word not in basis:
                        if len(basis) >= max_dim:
                            return InfiniteOrTooLarge(len(basis), max_dim)
                        basis[word] = len(basis)
                        new_frontier.append(word)
        frontier = new_frontier
    words = sorted(basis, key=ctx.order.key)
    return QuotientModule(system, words, {w: i for i, w in enumerate(words)})


def matrices(module: QuotientModule) -> Strategy:
    """Left-multiplication matrices on the module basis.  Entry (r, c) of
    generator g is the coefficient of basis word r in NF(g * word_c)."""
    system = module.system
    ctx = system.ctx
    aux = ctx.alphabet.aux_index
    dim = module.dimension
    if dim == 0:
        return Strategy(ctx, [], {}, 0)
    zero = ctx.field.zero
    mats = {}
    for g in range(len(ctx.alphabet)):
        if g == aux:
            continue
        mat = [[zero] * dim for _ in range(dim)]
        for c, w in enumerate(module.basis_words):
            nf = system.normal_form(ctx.monomial(1, (g,) + w))
            for word, coeff in nf.terms.items():
                r = module.index.get(word)
                if r is None:
                    raise GnsError("module is not closed; rebuild with build()")
                mat[r][c] = coeff
        mats[g] = mat
    return Strategy(ctx, list(module.basis_words), mats, 0)


# -- exact matrix helpers -----------------------------------------------------

def _mat_mul(ctx: Context, a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    zero = ctx.field.zero
    out = [[zero] * n for _ in range(n)]
    for i in range(n):
        ai = a[i]
        row = out[i]
        for k in range(n):
            c = ai[k]
            if c.is_zero():
                continue
            bk = b[k]
            for j in range(n):
                if not bk[j].is_zero():
                    row[j] = row[j] + c * bk[j]
    return out

def _mat_identity(ctx: Context, n: int) -> Matrix:
    zero, one = ctx.field.zero, ctx.field.one
    return [[one if i == j else zero for j in range(n)] for i in range(n)]

def _mat_scale(ctx: Context, a: Matrix, c: CycloScalar) -> Matrix:
    return [[x * c for x in row] for row in a]

def _mat_add(ctx: Context, a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]

def _mat_is_zero(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)

def _mat_eq(a: Matrix, b: Matrix) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))

def _mat_conj_transpose(a: Matrix) -> Matrix:
    n = len(a)
    return [[a[j][i].conj() for j in range(n)] for i in range(n)]


def evaluate(strategy: Strategy, p: NCPoly) -> Matrix:
    """Exact evaluation of a polynomial at the strategy's matrices.  The
    polynomial may come from the context without the auxiliary letter;
    variable indices agree because the auxiliary letter is appended."""
    ctx = strategy.ctx
    n = strategy.dimension
    acc = [[ctx.field.zero] * n for _ in range(n)]
    for word, coeff in p.terms.items():
        cur = _mat_identity(ctx, n)
        for g in word:
            if g not in strategy.matrices:
                raise GnsError("polynomial mentions the auxiliary letter")
            cur = _mat_mul(ctx, cur, strategy.matrices[g])
        acc = _mat_add(ctx, acc, _mat_scale(ctx, cur, coeff))
    return acc


@dataclass
class VerifyReport:
    ok: bool
    failures: list
    warnings: list

    def __bool__(self):
        return self.ok


def verify(strategy: Strategy, relations: Sequence[NCPoly],
           determining: Sequence[NCPoly],
           hermitian_required: bool = True) -> VerifyReport:
    """Exact checks: every algebra relation evaluates to the zero matrix,
    every generator matrix is compatible with the involution under the
    orthonormal basis form, and every determining element annihilates
    the state vector.  Failures are reported, never raised."""
    failures, warnings = [], []
    ctx = strategy.ctx
    n = strategy.dimension
    if n == 0:
        failures.append("zero-dimensional module carries no strategy")
        return VerifyReport(False, failures, warnings)

    for rel in relations:
        if not _mat_is_zero(evaluate(strategy, rel)):
            failures.append(f"relation not satisfied: {rel}")

    for g, mat in sorted(strategy.matrices.items()):
        var = ctx.alphabet.variables[g]
        star = _mat_conj_transpose(mat)
        if var.adjoint_order is None:
            if not _mat_eq(star, mat):
                message = f"generator {var.name} is not hermitian in the basis form"
                (failures if hermitian_required else warnings).append(message)
        else:
            power = _mat_identity(ctx, n)
            for _ in range(var.adjoint_order - 1):
                power = _mat_mul(ctx, power, mat)
            if not _mat_eq(star, power):
                message = (f"generator {var.name} is not unitary of order "
                           f"{var.adjoint_order} in the basis form")
                (failures if hermitian_required else warnings).append(message)

    state = strategy.state_index
    for elem in determining:
        mat = evaluate(strategy, elem)
        column = [mat[r][state] for r in range(n)]
        if any(not x.is_zero() for x in column):
            failures.append(f"determining element does not annihilate the state: {elem}")

    return VerifyReport(not failures, failures, warnings)


# -- witness serialization ----------------------------------------------------

def render_witness(strategy: Strategy, header_lines: Sequence[str]) -> str:
    from .cyclo import render_scalar
    ctx = strategy.ctx
    out = list(header_lines)
    out.append(f"dimension: {strategy.dimension}")
    out.append(f"state-index: {strategy.state_index}")
    out.append("basis:")
    for w in strategy.basis_words:
        out.append("  " + render_word(ctx, w))
    for g in sorted(strategy.matrices):
        out.append(f"matrix {ctx.alphabet.name(g)}:")
        for row in strategy.matrices[g]:
            out.append("  " + " , ".join(render_scalar(x) for x in row))
    return "\n".join(out) + "\n"
