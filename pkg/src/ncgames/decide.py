"""Top-level decision engine for perfect commuting-operator strategies.

Membership of 1 in (universal ideal + left ideal of the determining
set) is always a sound certificate of non-perfection.  For binomial
(clause-style) determining sets with unit-modulus scalars the converse
holds with no sum-of-squares term, so a complete basis without that
membership certifies perfection outright; the engine then tries to
attach an explicit finite-dimensional witness.  For general determining
sets perfection is only claimed with a verified witness: the quotient
at a finite cap need not be universal, so a missing kernel vector there
proves nothing, and the honest answer is Unknown.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cyclo import CycloScalar
from .freealg import AlgebraError, NCPoly, Word, render_word
from .gbase import (AugmentedInput, RewriteSystem, complete, complete_augmented,
                    member_mixed_in)
from .gamealg import DeterminingSet, detect_toric
from . import gns

DEFAULT_CAP = 6
DEFAULT_MAX_DIM = 4096
DEFAULT_SUBGROUP_LEN = 8


@dataclass
class Verdict:
    outcome: str                      # "perfect" | "no_perfect" | "unknown"
    cap: int
    system: Optional[RewriteSystem] = None
    strategy: Optional[gns.Strategy] = None
    witness_kind: Optional[str] = None  # "finite" | "abstract"
    notes: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return {"perfect": 0, "no_perfect": 1, "unknown": 2}[self.outcome]


def default_cap(dset: DeterminingSet) -> int:
    """Two degrees of headroom over the largest clause, at least the
    engine default."""
    top = max([e.degree() for e in dset.elements]
              + [r.degree() for r in dset.algebra.relations] + [0])
    return max(DEFAULT_CAP, top + 2)


def decide(dset: DeterminingSet, cap: Optional[int] = None,
           max_dim: int = DEFAULT_MAX_DIM) -> Verdict:
    dset = detect_toric(dset)
    cap = cap or default_cap(dset)
    notes = []

    if dset.toric_clauses is not None:
        bad = [(beta, w) for beta, w in dset.toric_clauses
               if not beta.norm_squared().is_one()]
        if bad:
            beta, w = bad[0]
            notes.append(
                f"clause scalar {beta} on word '{render_word(dset.algebra.ctx, w)}' "
                f"has |beta|^2 = {beta.norm_squared()} != 1; the clause group "
                "meets the scalars nontrivially")
            return Verdict("no_perfect", cap, notes=notes)

    inp = AugmentedInput(dset.algebra.ctx, tuple(dset.algebra.relations),
                         tuple(dset.elements))
    system = complete_augmented(inp, cap)
    one = dset.algebra.ctx.one()
    membership = member_mixed_in(one, inp, system)

    if membership == "yes":
        notes.append("1 lies in the universal ideal plus the left ideal "
                     "of the determining set")
        return Verdict("no_perfect", cap, system=system, notes=notes)

    if dset.toric_clauses is not None:
        # Complete basis without the membership: perfection is certified;
        # a finite witness is attached when the module closes.
        if membership == "no":
            verdict = Verdict("perfect", cap, system=system, notes=notes)
            _attach_witness(verdict, dset, system, max_dim)
            return verdict
        notes.append(f"basis truncated at degree {cap}; membership undecided")
        return Verdict("unknown", cap, system=system, notes=notes)

    # General path: only a verified witness may claim perfection.
    if membership == "no":
        verdict = Verdict("unknown", cap, system=system, notes=notes)
        _attach_witness(verdict, dset, system, max_dim, promote=True)
        if verdict.outcome == "unknown":
            verdict.notes.append(
                "1 is not in the ideal sum at this cap, but without a "
                "verified witness the sum-of-squares obstruction remains "
                "unchecked")
        return verdict
    notes.append(f"basis truncated at degree {cap}; membership undecided")
    return Verdict("unknown", cap, system=system, notes=notes)


def _attach_witness(verdict: Verdict, dset: DeterminingSet,
                    system: RewriteSystem, max_dim: int,
                    promote: bool = False):
    """Try to build and verify a finite-dimensional strategy; on success
    attach it (and optionally promote Unknown to Perfect)."""
    module = gns.build(system, max_dim=max_dim)
    if isinstance(module, gns.InfiniteOrTooLarge):
        verdict.witness_kind = "abstract"
        verdict.notes.append(
            f"module closure exceeded {module.max_dim} dimensions; "
            "the perfection certificate stays abstract")
        return
    if module.dimension == 0:
        verdict.notes.append("module is zero-dimensional")
        return
    strategy = gns.matrices(module)
    ctx2 = system.ctx
    relations = [_relift(p, ctx2) for p in dset.algebra.relations]
    determining = [_relift(p, ctx2) for p in dset.elements]
    report = gns.verify(strategy, relations, determining,
                        hermitian_required=True)
    if report.ok:
        verdict.strategy = strategy
        verdict.witness_kind = "finite"
        if promote:
            verdict.outcome = "perfect"
    else:
        verdict.notes.extend(
            f"witness rejected: {msg}" for msg in report.failures[:3])
        if verdict.outcome == "perfect":
            # toric certificate stands on its own
            verdict.witness_kind = "abstract"


def _relift(p: NCPoly, ctx2) -> NCPoly:
    return NCPoly(ctx2, dict(p.terms))


# -- subgroup membership view -------------------------------------------------

@dataclass
class SubgroupQuery:
    """Clause monomials beta*g and their adjoints generate a group H;
    perfection of the clause game says H meets the scalars only in 1."""
    dset: DeterminingSet

    def __post_init__(self):
        if self.dset.toric_clauses is None:
            raise AlgebraError("subgroup queries need a clause-style determining set")
        for beta, _w in self.dset.toric_clauses:
            if not beta.norm_squared().is_one():
                raise AlgebraError(
                    "clause scalars must be unit modulus; run decide() for "
                    "the short-circuit answer")


@dataclass
class PhaseFound:
    scalar: CycloScalar
    length: int

    def __bool__(self):
        return True


@dataclass
class NoneFound:
    length: int

    def __bool__(self):
        return False


def subgroup_check(query: SubgroupQuery, max_len: int = DEFAULT_SUBGROUP_LEN,
                   universal_cap: int = 4, max_states: int = 200000):
    """Breadth-first enumeration of products of clauses and their
    adjoints, reduced to canonical monomial form by a completed system
    for the universal relations.  Returns the first nontrivial scalar
    equal to such a product, or NoneFound at the horizon."""
    dset = query.dset
    ctx = dset.algebra.ctx
    cap = max(universal_cap,
              max((r.degree() for r in dset.algebra.relations), default=2))
    system = complete(dset.algebra.relations, cap, ctx=ctx)
    if not system.complete:
        raise AlgebraError("universal relations did not complete; "
                           "the canonical form is unavailable")

    def canonical(scalar, word):
        nf = system.normal_form(ctx.monomial(scalar, word))
        if nf.is_zero() or len(nf.terms) != 1:
            raise AlgebraError("clause products must stay monomial under "
                               "the universal relations")
        (w, c), = nf.terms.items()
        return c, w

    generators = []
    for beta, w in dset.toric_clauses:
        generators.append(canonical(beta, w))
        generators.append(canonical(beta.conj(), ctx.adjoint_word(w)))

    one = ctx.field.one
    frontier = [(one, ())]
    seen = {(one.coords, ())}
    for step in range(1, max_len + 1):
        next_frontier = []
        for scalar, word in frontier:
            for gscalar, gword in generators:
                c, w = canonical(scalar * gscalar, word + gword)
                if w == () and not c.is_one():
                    return PhaseFound(c, step)
                key = (c.coords, w)
                if key not in seen:
                    seen.add(key)
                    next_frontier.append((c, w))
                    if len(seen) > max_states:
                        return NoneFound(step)
        frontier = next_frontier
    return NoneFound(max_len)


# -- synchronous / coloring path ----------------------------------------------

@dataclass
class SyncVerdict:
    outcome: str          # "no_perfect" | "inconclusive"
    degree: int
    certificate: Optional[object] = None   # soscert.RationalCertificate
    notes: list = field(default_factory=list)


def decide_synchronous_nocolor(algebra, ideal_gens: Sequence[NCPoly],
                               degree: int, cap: Optional[int] = None,
                               tol: float = 1e-9,
                               max_sweeps: int = 50000) -> SyncVerdict:
    """Search for an exact certificate that the one-player synchronous
    algebra admits no representation (hence the game no perfect
    strategy).  Delegates to the Gram/SDP/rationalization pipeline; only
    an exactly re-verified certificate yields a claim, everything else
    is inconclusive."""
    from . import soscert
    cap = cap or max(2 * degree + 2, DEFAULT_CAP)
    gens = list(algebra.relations) + list(ideal_gens)
    system = complete(gens, cap, ctx=algebra.ctx)
    notes = []
    if not system.complete:
        notes.append(f"rewriting system truncated at degree {cap}; "
                     "the certificate search is still sound")
    problem = soscert.setup(system, degree)
    solved = soscert.solve_feasibility(problem, tol=tol, max_sweeps=max_sweeps)
    if solved.kind == "infeasible":
        notes.append("gram constraint system admits no PSD solution: " + solved.detail)
        return SyncVerdict("inconclusive", degree, notes=notes)
    if solved.kind != "feasible":
        notes.append("float stage undetermined: " + solved.detail)
        return SyncVerdict("inconclusive", degree, notes=notes)
    notes.append(f"float solution minimum eigenvalue {solved.min_eig:.3e}")
    cert = soscert.rationalize_and_verify(solved.matrix, problem)
    if cert is None:
        notes.append("rationalization failed at every denominator bound")
        return SyncVerdict("inconclusive", degree, notes=notes)
    check = soscert.check_certificate(cert, problem.system)
    if not check.ok:
        notes.extend("independent check failed: " + m for m in check.failures)
        return SyncVerdict("inconclusive", degree, notes=notes)
    return SyncVerdict("no_perfect", degree, certificate=cert, notes=notes)
