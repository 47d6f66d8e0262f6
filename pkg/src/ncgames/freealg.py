"""Words over a typed variable alphabet and noncommutative polynomials.

A variable carries game metadata (player/question/answer) plus its
adjoint behaviour: self-adjoint, or unitary of finite order m (in which
case the involution rewrites the letter g to g^(m-1)).  The auxiliary
letter used to fold left ideals into two-sided ones is tagged as such
and must be the greatest symbol of every order built on the alphabet.

Polynomials are immutable maps word -> nonzero scalar over a fixed
(alphabet, coefficient field, monomial order) context.  The order is
graded lexicographic, which is admissible: it is multiplicative and the
empty word is least.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .cyclo import CycloField, CycloScalar, parse_scalar

Word = tuple  # tuple of variable indices; () is the identity


class AlgebraError(ValueError):
    """Usage errors: mismatched contexts, bad variables, parse failures."""


@dataclass(frozen=True)
class Variable:
    """One alphabet symbol.  adjoint_order None means self-adjoint;
    m >= 2 means the letter is unitary with g^m = 1 and g* = g^(m-1)."""
    name: str
    player: Optional[int] = None
    question: Optional[int] = None
    answer: Optional[int] = None
    adjoint_order: Optional[int] = None
    auxiliary: bool = False


class Alphabet:
    def __init__(self, variables: Sequence[Variable]):
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise AlgebraError("variable names must be unique")
        aux = [i for i, v in enumerate(variables) if v.auxiliary]
        if len(aux) > 1:
            raise AlgebraError("at most one auxiliary variable")
        if aux and aux[0] != len(variables) - 1:
            raise AlgebraError("the auxiliary variable must come last")
        self.variables = tuple(variables)
        self.index = {v.name: i for i, v in enumerate(variables)}
        self.aux_index = aux[0] if aux else None

    def __len__(self):
        return len(self.variables)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.variables == other.variables

    def __hash__(self):
        return hash(self.variables)

    def with_auxiliary(self, name: str = "xi") -> "Alphabet":
        if self.aux_index is not None:
            return self
        return Alphabet(self.variables + (Variable(name, auxiliary=True),))

    def name(self, idx: int) -> str:
        return self.variables[idx].name


class MonomialOrder:
    """Graded lexicographic order on words: shorter is smaller; equal
    lengths compare letter-wise by precedence rank."""

    def __init__(self, alphabet: Alphabet, precedence: Optional[Sequence[int]] = None):
        self.alphabet = alphabet
        if precedence is None:
            precedence = tuple(range(len(alphabet)))
        if sorted(precedence) != list(range(len(alphabet))):
            raise AlgebraError("precedence must be a permutation of the alphabet")
        self.precedence = tuple(precedence)
        self.rank = [0] * len(alphabet)
        for pos, var_idx in enumerate(self.precedence):
            self.rank[var_idx] = pos
        if alphabet.aux_index is not None:
            if self.rank[alphabet.aux_index] != len(alphabet) - 1:
                raise AlgebraError("the auxiliary variable must be greatest")

    def key(self, word: Word):
        return (len(word), tuple(self.rank[i] for i in word))

    def compare(self, u: Word, v: Word) -> int:
        ku, kv = self.key(u), self.key(v)
        return (ku > kv) - (ku < kv)


class Context:
    """Shared environment for polynomials: alphabet + field + order."""

    def __init__(self, alphabet: Alphabet, field: CycloField,
                 order: Optional[MonomialOrder] = None):
        self.alphabet = alphabet
        self.field = field
        self.order = order or MonomialOrder(alphabet)
        if self.order.alphabet != alphabet:
            raise AlgebraError("order built on a different alphabet")

    def __eq__(self, other):
        return (isinstance(other, Context)
                and self.alphabet == other.alphabet
                and self.field == other.field
                and self.order.precedence == other.order.precedence)

    def __hash__(self):
        return hash((self.alphabet, self.field, self.order.precedence))

    def with_auxiliary(self, name: str = "xi") -> "Context":
        if self.alphabet.aux_index is not None:
            return self
        alphabet = self.alphabet.with_auxiliary(name)
        precedence = tuple(self.order.precedence) + (len(alphabet) - 1,)
        return Context(alphabet, self.field, MonomialOrder(alphabet, precedence))

    # -- constructors ----------------------------------------------------
    def zero(self) -> "NCPoly":
        return NCPoly(self, {})

    def one(self) -> "NCPoly":
        return NCPoly(self, {(): self.field.one})

    def scalar(self, value) -> "NCPoly":
        c = value if isinstance(value, CycloScalar) else self.field.scalar(value)
        return NCPoly(self, {(): c} if not c.is_zero() else {})

    def letter(self, name_or_index: Union[str, int]) -> "NCPoly":
        idx = (name_or_index if isinstance(name_or_index, int)
               else self.alphabet.index[name_or_index])
        return NCPoly(self, {(idx,): self.field.one})

    def monomial(self, coeff, word: Iterable[int]) -> "NCPoly":
        c = coeff if isinstance(coeff, CycloScalar) else self.field.scalar(coeff)
        if c.is_zero():
            return self.zero()
        return NCPoly(self, {tuple(word): c})

    def word_from_names(self, names: Sequence[str]) -> Word:
        try:
            return tuple(self.alphabet.index[n] for n in names)
        except KeyError as exc:
            raise AlgebraError(f"unknown variable {exc.args[0]!r}") from exc

    def adjoint_word(self, word: Word) -> Word:
        """Reverse the word and apply per-letter adjoint rules."""
        out = []
        for idx in reversed(word):
            m = self.alphabet.variables[idx].adjoint_order
            if m is None:
                out.append(idx)
            else:
                out.extend([idx] * (m - 1))
        return tuple(out)


class NCPoly:
    """Noncommutative polynomial: finite map word -> nonzero scalar."""

    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: Context, terms: Mapping[Word, CycloScalar]):
        self.ctx = ctx
        self.terms = {w: c for w, c in terms.items() if not c.is_zero()}
        self._hash = None

    # -- basic structure -------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(len(w) for w in self.terms)

    def sorted_terms(self, reverse: bool = True):
        key = self.ctx.order.key
        return sorted(self.terms.items(), key=lambda kv: key(kv[0]), reverse=reverse)

    def leading_word(self) -> Word:
        if not self.terms:
            raise AlgebraError("zero polynomial has no leading term")
        key = self.ctx.order.key
        return max(self.terms, key=key)

    def leading_coeff(self) -> CycloScalar:
        return self.terms[self.leading_word()]

    def monic(self) -> "NCPoly":
        lc = self.leading_coeff()
        if lc.is_one():
            return self
        inv = lc.inv()
        return NCPoly(self.ctx, {w: c * inv for w, c in self.terms.items()})

    def coefficient(self, word: Word) -> CycloScalar:
        return self.terms.get(tuple(word), self.ctx.field.zero)

    def _check(self, other: "NCPoly"):
        if other.ctx != self.ctx:
            raise AlgebraError("polynomials from different algebra contexts")

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction, CycloScalar)):
            other = self.ctx.scalar(other)
        if not isinstance(other, NCPoly):
            return NotImplemented
        self._check(other)
        terms = dict(self.terms)
        for w, c in other.terms.items():
            acc = terms.get(w)
            s = c if acc is None else acc + c
            if s.is_zero():
                terms.pop(w, None)
            else:
                terms[w] = s
        return NCPoly(self.ctx, terms)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, CycloScalar)):
            other = self.ctx.scalar(other)
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return NCPoly(self.ctx, {w: -c for w, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycloScalar)):
            c = other if isinstance(other, CycloScalar) else self.ctx.field.scalar(other)
            if c.is_zero():
                return self.ctx.zero()
            return NCPoly(self.ctx, {w: a * c for w, a in self.terms.items()})
        if not isinstance(other, NCPoly):
            return NotImplemented
        self._check(other)
        terms: dict[Word, CycloScalar] = {}
        for u, a in self.terms.items():
            for v, b in other.terms.items():
                w = u + v
                ab = a * b
                acc = terms.get(w)
                s = ab if acc is None else acc + ab
                if s.is_zero():
                    terms.pop(w, None)
                else:
                    terms[w] = s
        return NCPoly(self.ctx, terms)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, CycloScalar)):
            return self * other
        return NotImplemented

    def adjoint(self) -> "NCPoly":
        """The involution: reverse words, apply per-letter adjoint rules,
        conjugate coefficients."""
        ctx = self.ctx
        terms: dict[Word, CycloScalar] = {}
        for w, c in self.terms.items():
            w2 = ctx.adjoint_word(w)
            c2 = c.conj()
            acc = terms.get(w2)
            s = c2 if acc is None else acc + c2
            if s.is_zero():
                terms.pop(w2, None)
            else:
                terms[w2] = s
        return NCPoly(ctx, terms)

    def shift_word(self, left: Word, right: Word) -> "NCPoly":
        """left * self * right for plain words (no coefficient)."""
        return NCPoly(self.ctx, {left + w + right: c for w, c in self.terms.items()})

    def substitute(self, images: Mapping[int, "NCPoly"], target: Context) -> "NCPoly":
        """Algebra homomorphism sending letter i to images[i]."""
        out = target.zero()
        for w, c in self.terms.items():
            acc = target.scalar(_coerce_scalar(c, target.field))
            for idx in w:
                acc = acc * images[idx]
            out = out + acc
        return out

    # -- comparisons -------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"NCPoly({self})"

    def __str__(self):
        return render_poly(self)


def _coerce_scalar(c: CycloScalar, field: CycloField) -> CycloScalar:
    if c.field == field:
        return c
    if c.is_rational():
        return field.scalar(c.rational_value())
    raise AlgebraError("cannot move an irrational scalar between fields")


# -- textual grammar -------------------------------------------------------
#
# poly   := term (('+'|'-') term)*
# term   := [coeff] word | coeff
# coeff  := rational | '(' cyclo ')'
# word   := name (sep name)*   with sep = whitespace or the middle dot
#
# Round-trips exactly with render_poly.

def render_word(ctx: Context, word: Word) -> str:
    if not word:
        return "1"
    return " ".join(ctx.alphabet.name(i) for i in word)


def render_poly(p: NCPoly) -> str:
    if p.is_zero():
        return "0"
    chunks = []
    for idx, (w, c) in enumerate(p.sorted_terms()):
        body, negative = _render_term(p.ctx, w, c)
        if idx == 0:
            chunks.append(("-" if negative else "") + body)
        else:
            chunks.append(("- " if negative else "+ ") + body)
    return " ".join(chunks)


def _render_term(ctx: Context, w: Word, c: CycloScalar) -> tuple[str, bool]:
    word_text = render_word(ctx, w)
    if c.is_rational():
        value = c.rational_value()
        negative = value < 0
        mag = abs(value)
        if not w:
            return str(mag), negative
        if mag == 1:
            return word_text, negative
        return f"{mag} {word_text}", negative
    text = f"({c})"
    if w:
        text += f" {word_text}"
    return text, False


def parse_poly(ctx: Context, text: str) -> NCPoly:
    text = text.replace("·", " ").strip()
    if not text:
        raise AlgebraError("empty polynomial text")
    if text == "0":
        return ctx.zero()
    tokens = _tokenize(text)
    total = ctx.zero()
    sign = 1
    term_tokens: list[str] = []

    def flush():
        nonlocal total, sign, term_tokens
        if term_tokens:
            total = total + _parse_term_tokens(ctx, term_tokens) * sign
            term_tokens = []
        sign = 1

    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in ("+", "-"):
            if term_tokens:
                flush()
            if tok == "-":
                sign = -sign
        else:
            term_tokens.append(tok)
        i += 1
    if not term_tokens:
        raise AlgebraError(f"dangling sign in {text!r}")
    flush()
    return total


def _tokenize(text: str) -> list[str]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "+-":
            tokens.append(ch)
            i += 1
        elif ch == "(":
            depth = 1
            j = i + 1
            while j < len(text) and depth:
                if text[j] == "(":
                    depth += 1
                elif text[j] == ")":
                    depth -= 1
                j += 1
            if depth:
                raise AlgebraError("unbalanced parenthesis in polynomial")
            tokens.append(text[i:j])
            i = j
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def _parse_term_tokens(ctx: Context, tokens: list[str]) -> NCPoly:
    coeff = ctx.field.one
    names = []
    for pos, tok in enumerate(tokens):
        if tok.startswith("("):
            if pos != 0:
                raise AlgebraError("coefficient must lead its term")
            coeff = parse_scalar(ctx.field, tok[1:-1])
        elif _is_rational(tok):
            if pos != 0:
                raise AlgebraError("coefficient must lead its term")
            coeff = ctx.field.scalar(Fraction(tok))
        else:
            names.append(tok)
    word = ctx.word_from_names(names)
    return ctx.monomial(coeff, word)


def _is_rational(tok: str) -> bool:
    try:
        Fraction(tok)
        return True
    except (ValueError, ZeroDivisionError):
        return False
