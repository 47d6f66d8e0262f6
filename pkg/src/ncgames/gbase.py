"""Noncommutative polynomial rewriting and completion.

The completion loop processes S-polynomials from two-sided overlaps in
FIFO order keyed by (degree of the common multiple, creation index) and
interreduces the final system.  Completion over a free algebra need not
terminate, so a degree cap is mandatory: S-polynomials whose common
multiple exceeds the cap are skipped and the result is marked truncated,
which downgrades ideal-membership answers from No to Unknown.

Mixed two-sided + left ideals are handled by adjoining an auxiliary
greatest letter and replacing each left generator b by b*aux; then
f lies in the mixed ideal iff f*aux lies in the two-sided augmented
ideal, and a left-ideal normal form never loses the trailing aux.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Sequence

from .freealg import AlgebraError, Context, NCPoly, Word

Membership = Literal["yes", "no", "unknown"]


@dataclass(frozen=True)
class AugmentedInput:
    """Generators of a two-sided ideal plus generators of a left ideal,
    both over an alphabet without the auxiliary letter."""
    ctx: Context
    two_sided: tuple
    left: tuple

    def __post_init__(self):
        if self.ctx.alphabet.aux_index is not None:
            raise AlgebraError("augmented input must not mention the auxiliary letter")


class RewriteSystem:
    """A list of monic rules over one context, plus a completion status.

    In a reduced system no rule's leading word is a subword of another
    rule's leading word and every rule tail is in normal form w.r.t.
    the other rules.
    """

    def __init__(self, ctx: Context, rules: Sequence[NCPoly],
                 status: str = "complete", cap: Optional[int] = None):
        self.ctx = ctx
        self.rules = list(rules)
        self.status = status          # "complete" | "truncated"
        self.cap = cap
        self._index: dict[int, list[tuple[int, Word]]] = {}
        self._reindex()

    def _reindex(self):
        self._index.clear()
        self._leading = []
        self._unit_index = None
        for i, r in enumerate(self.rules):
            lw = r.leading_word()
            self._leading.append(lw)
            if not lw:
                # the rule is a nonzero constant: the ideal is everything
                self._unit_index = i
            else:
                self._index.setdefault(lw[0], []).append((i, lw))

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    def leading_words(self) -> list[Word]:
        return list(self._leading)

    def find_redex(self, word: Word):
        """Leftmost position where some rule's leading word occurs; ties
        broken by lowest rule index.  Returns (pos, rule_idx) or None."""
        if self._unit_index is not None:
            return 0, self._unit_index
        n = len(word)
        for pos in range(n):
            bucket = self._index.get(word[pos])
            if not bucket:
                continue
            best = None
            for idx, lw in bucket:
                if len(lw) <= n - pos and word[pos:pos + len(lw)] == lw:
                    if best is None or idx < best:
                        best = idx
            if best is not None:
                return pos, best
        return None

    def normal_form(self, p: NCPoly) -> NCPoly:
        """Fully reduce p: no term of the result contains any rule's
        leading word.  p - NF(p) lies in the two-sided ideal of the rules."""
        if p.ctx != self.ctx:
            raise AlgebraError("polynomial and rewrite system contexts differ")
        terms = dict(p.terms)
        key = self.ctx.order.key
        # Scan terms from the greatest down; rewriting a term only
        # introduces strictly smaller ones.
        pending = sorted(terms, key=key, reverse=True)
        while pending:
            w = pending.pop(0)
            c = terms.get(w)
            if c is None or c.is_zero():
                continue
            hit = self.find_redex(w)
            if hit is None:
                continue
            pos, ridx = hit
            rule = self.rules[ridx]
            lw = self._leading[ridx]
            left, right = w[:pos], w[pos + len(lw):]
            del terms[w]
            new_words = []
            for rw, rc in rule.terms.items():
                if rw == lw:
                    continue
                nw = left + rw + right
                delta = -(c * rc)
                acc = terms.get(nw)
                s = delta if acc is None else acc + delta
                if s.is_zero():
                    terms.pop(nw, None)
                else:
                    if acc is None:
                        new_words.append(nw)
                    terms[nw] = s
            if new_words:
                pending.extend(new_words)
                pending.sort(key=key, reverse=True)
        return NCPoly(self.ctx, terms)

    def export_lines(self) -> list[str]:
        from .freealg import render_poly
        return [render_poly(r) for r in self.rules]


# -- S-polynomials -----------------------------------------------------------

def _spoly_from_common(a: NCPoly, b: NCPoly, la: Word, ra: Word,
                       lb: Word, rb: Word) -> NCPoly:
    """(1/LC(a)) la*a*ra - (1/LC(b)) lb*b*rb, where both products share
    the leading word la*LT(a)*ra = lb*LT(b)*rb."""
    ca = a.leading_coeff().inv()
    cb = b.leading_coeff().inv()
    return (a * ca).shift_word(la, ra) - (b * cb).shift_word(lb, rb)


def overlaps(a: NCPoly, b: NCPoly) -> list[NCPoly]:
    """All S-polynomials from proper overlaps between LT(a) and LT(b)
    (in both directions) and from containment of LT(a) in LT(b).
    Self-overlaps are included when a is b."""
    if a.is_zero() or b.is_zero():
        raise AlgebraError("S-polynomials need nonzero inputs")
    u, v = a.leading_word(), b.leading_word()
    out = []
    # suffix of u == prefix of v, proper on both sides
    for ell in range(1, min(len(u), len(v))):
        if u[len(u) - ell:] == v[:ell]:
            out.append(_spoly_from_common(a, b, (), v[ell:], u[:len(u) - ell], ()))
    if a is not b:
        # suffix of v == prefix of u
        for ell in range(1, min(len(u), len(v))):
            if v[len(v) - ell:] == u[:ell]:
                out.append(_spoly_from_common(a, b, v[:len(v) - ell], (), (), u[ell:]))
        # LT(a) contained in LT(b)
        if len(u) <= len(v):
            for pos in range(len(v) - len(u) + 1):
                if v[pos:pos + len(u)] == u:
                    out.append(_spoly_from_common(a, b, v[:pos], v[pos + len(u):], (), ()))
    return out


def left_matches(a: NCPoly, b: NCPoly) -> list[NCPoly]:
    """S-polynomials from common left multiples w_a*LT(a) = w_b*LT(b),
    i.e. one leading word is a suffix of the other."""
    if a.is_zero() or b.is_zero():
        raise AlgebraError("S-polynomials need nonzero inputs")
    u, v = a.leading_word(), b.leading_word()
    out = []
    if len(u) <= len(v) and v[len(v) - len(u):] == u:
        out.append(_spoly_from_common(a, b, v[:len(v) - len(u)], (), (), ()))
    elif len(v) < len(u) and u[len(u) - len(v):] == v:
        out.append(_spoly_from_common(a, b, (), (), u[:len(u) - len(v)], ()))
    return out


# -- completion --------------------------------------------------------------

def _critical_pair_specs(a: NCPoly, b: NCPoly):
    """Yield (la, ra, lb, rb) with la+LT(a)+ra == lb+LT(b)+rb covering all
    proper overlaps and containments of the pair, each exactly once."""
    u, v = a.leading_word(), b.leading_word()
    if a is b:
        for ell in range(1, len(u)):
            if u[len(u) - ell:] == u[:ell]:
                yield ((), u[ell:], u[:len(u) - ell], ())
        return
    for ell in range(1, min(len(u), len(v))):
        if u[len(u) - ell:] == v[:ell]:
            yield ((), v[ell:], u[:len(u) - ell], ())
    for ell in range(1, min(len(u), len(v))):
        if v[len(v) - ell:] == u[:ell]:
            yield (v[:len(v) - ell], (), (), u[ell:])
    if len(u) < len(v):
        for pos in range(len(v) - len(u) + 1):
            if v[pos:pos + len(u)] == u:
                yield (v[:pos], v[pos + len(u):], (), ())
    elif len(v) < len(u):
        for pos in range(len(u) - len(v) + 1):
            if u[pos:pos + len(v)] == v:
                yield ((), (), u[:pos], u[pos + len(v):])
    elif u == v:
        yield ((), (), (), ())


def complete(gens: Iterable[NCPoly], cap: int, ctx: Optional[Context] = None,
             max_rules: Optional[int] = None) -> RewriteSystem:
    """Buchberger-style completion with degree truncation.

    Returns an interreduced system.  Status is complete iff the queue
    emptied with every S-polynomial reducing to zero; skipping any
    S-polynomial whose common multiple exceeds the cap marks the result
    truncated at the cap.
    """
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        if ctx is None:
            raise AlgebraError("complete() with no generators needs an explicit context")
        return RewriteSystem(ctx, [], status="complete", cap=cap)
    ctx = gens[0].ctx
    for g in gens:
        if g.ctx != ctx:
            raise AlgebraError("generators from different contexts")
        if g.degree() > cap:
            raise AlgebraError("cap must be at least the degree of every generator")

    system = RewriteSystem(ctx, [], status="complete", cap=cap)
    counter = 0
    queue: list[tuple[int, int, NCPoly]] = []
    for g in gens:
        heapq.heappush(queue, (g.degree(), counter, g))
        counter += 1
    truncated = False

    while queue:
        _, _, cand = heapq.heappop(queue)
        nf = system.normal_form(cand)
        if nf.is_zero():
            continue
        nf = nf.monic()
        new_lw = nf.leading_word()
        if not new_lw:
            # 1 joined the basis: the ideal is the whole algebra
            system.rules = [nf]
            system._reindex()
            system.status = "complete"
            return system

        # Retire rules whose leading word contains the new leading word;
        # their content is requeued so nothing is lost.
        retired = []
        kept = []
        for r in system.rules:
            lw = r.leading_word()
            if len(new_lw) <= len(lw) and any(
                    lw[p:p + len(new_lw)] == new_lw
                    for p in range(len(lw) - len(new_lw) + 1)):
                retired.append(r)
            else:
                kept.append(r)
        if retired:
            system.rules = kept
            system._reindex()
            for r in retired:
                heapq.heappush(queue, (r.degree(), counter, r))
                counter += 1

        system.rules.append(nf)
        system._reindex()
        if max_rules is not None and len(system.rules) > max_rules:
            truncated = True
            break

        for other in system.rules:
            for la, ra, lb, rb in _critical_pair_specs(nf, other):
                deg = len(la) + len(new_lw) + len(ra)
                if deg > cap:
                    truncated = True
                    continue
                s = _spoly_from_common(nf, other, la, ra, lb, rb)
                if s.is_zero():
                    continue
                heapq.heappush(queue, (deg, counter, s))
                counter += 1

    system.rules = _interreduce(ctx, system.rules)
    system.rules.sort(key=lambda r: ctx.order.key(r.leading_word()))
    system._reindex()
    system.status = "truncated" if truncated else "complete"
    return system


def _interreduce(ctx: Context, rules: Sequence[NCPoly]) -> list[NCPoly]:
    """Reduce every rule against the others until stable; drop zeros."""
    current = [r.monic() for r in rules if not r.is_zero()]
    changed = True
    while changed:
        changed = False
        for i in range(len(current)):
            r = current[i]
            if r is None:
                continue
            others = [x for j, x in enumerate(current) if j != i and x is not None]
            sub = RewriteSystem(ctx, others, status="complete")
            nf = sub.normal_form(r)
            if nf.is_zero():
                current[i] = None
                changed = True
            elif nf != r:
                current[i] = nf.monic()
                changed = True
        current = [r for r in current if r is not None] if changed else current
    return [r for r in current if r is not None]


# -- mixed two-sided + left ideals ------------------------------------------

def augment(inp: AugmentedInput):
    """Move to the alphabet with the auxiliary letter and return
    (extended context, two_sided + [b*aux for b in left])."""
    ctx2 = inp.ctx.with_auxiliary()
    aux = ctx2.alphabet.aux_index
    gens = [_relift(g, ctx2) for g in inp.two_sided]
    for b in inp.left:
        gens.append(_relift(b, ctx2).shift_word((), (aux,)))
    return ctx2, gens


def _relift(p: NCPoly, ctx2: Context) -> NCPoly:
    # Appending the auxiliary letter keeps existing variable indices valid.
    return NCPoly(ctx2, dict(p.terms))


def member_two_sided(p: NCPoly, system: RewriteSystem) -> Membership:
    nf = system.normal_form(p)
    if nf.is_zero():
        return "yes"
    return "no" if system.complete else "unknown"


def member_mixed(p: NCPoly, inp: AugmentedInput, cap: int) -> Membership:
    """Decide p in (two-sided ideal + left ideal) by testing p*aux
    against the completed augmented system."""
    system = complete_augmented(inp, cap)
    return member_mixed_in(p, inp, system)


def complete_augmented(inp: AugmentedInput, cap: int,
                       max_rules: Optional[int] = None) -> RewriteSystem:
    ctx2, gens = augment(inp)
    return complete(gens, cap, ctx=ctx2, max_rules=max_rules)


def member_mixed_in(p: NCPoly, inp: AugmentedInput,
                    system: RewriteSystem) -> Membership:
    if p.ctx != inp.ctx:
        raise AlgebraError("candidate polynomial over the wrong context")
    if p.ctx.alphabet.aux_index is not None:
        raise AlgebraError("candidate must not mention the auxiliary letter")
    ctx2 = system.ctx
    aux = ctx2.alphabet.aux_index
    p_aux = _relift(p, ctx2).shift_word((), (aux,))
    return member_two_sided(p_aux, system)
