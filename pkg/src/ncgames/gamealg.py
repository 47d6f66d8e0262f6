"""Universal game algebras and game-to-determining-set encoders.

A game on k players, n questions and m answers lives in one universal
algebra presented by generators and relations.  Three generator dialects
are supported:

* projector:  k*n*m idempotent self-adjoint generators with same-question
  orthogonality and per-question completeness;
* signature:  self-adjoint involutions.  For m = 2 the two answers per
  question collapse to a single letter per (player, question) because
  the second signature is the negative of the first; for m > 2 all
  k*n*m letters are kept with the orthogonality and sum relations;
* cyclic:     one unitary letter of order m per (player, question).

For m = 2 the signature and cyclic dialects coincide letter-for-letter.

Encoders turn XOR clauses, linear equations mod r, two-player linear
system games, synchronous tables and graph colorings into determining
sets: elements whose annihilation of the state characterises a perfect
strategy.  Binomial determining sets additionally record their clauses
(scalar, group word) for the subgroup-membership fast path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from .cyclo import CycloField
from .freealg import Alphabet, Context, NCPoly, Variable


class GameError(ValueError):
    """Malformed game descriptions."""


@dataclass(frozen=True)
class GameShape:
    players: int
    questions: int
    answers: int

    def __post_init__(self):
        if min(self.players, self.questions, self.answers) < 1:
            raise GameError("players, questions and answers must be >= 1")


_PLAYER_LETTERS = "xyz"


def _field_for(answers: int, extra_order: int = 1) -> CycloField:
    # 4 keeps Gaussian phases expressible regardless of the answer arity.
    return CycloField(lcm(answers, extra_order, 4))


@dataclass
class UniversalAlgebra:
    shape: GameShape
    dialect: str                      # "projector" | "signature" | "cyclic"
    ctx: Context
    relations: list

    def letter(self, name: str) -> NCPoly:
        return self.ctx.letter(name)


def _letter_name(dialect: str, player: int, question: int,
                 answer: Optional[int], players: int,
                 answers: int = 2) -> str:
    if dialect == "projector":
        return f"e{player + 1}_q{question}_a{answer}"
    if dialect == "signature" and answer is not None:
        return f"x{player + 1}_q{question}_a{answer}"
    if dialect == "cyclic" and answers > 2:
        return f"c{player + 1}_q{question}"
    # two-answer involutions: one letter per (player, question)
    if players <= len(_PLAYER_LETTERS):
        return f"{_PLAYER_LETTERS[player]}{question}"
    return f"g{player + 1}_q{question}"


def universal_relations(shape: GameShape, dialect: str,
                        field: Optional[CycloField] = None) -> UniversalAlgebra:
    """The universal game algebra in the requested dialect."""
    k, n, m = shape.players, shape.questions, shape.answers
    field = field or _field_for(m)
    if dialect not in ("projector", "signature", "cyclic"):
        raise GameError(f"unknown dialect {dialect!r}")
    collapsed = dialect == "cyclic" or (dialect == "signature" and m == 2)

    variables = []
    if dialect == "projector":
        for alpha in range(k):
            for i in range(n):
                for a in range(m):
                    variables.append(Variable(
                        _letter_name(dialect, alpha, i, a, k),
                        player=alpha, question=i, answer=a))
    elif collapsed:
        order = None if m == 2 else m
        for alpha in range(k):
            for j in range(n):
                variables.append(Variable(
                    _letter_name(dialect, alpha, j, None, k, m),
                    player=alpha, question=j, adjoint_order=order))
    else:  # signature with m > 2
        for alpha in range(k):
            for i in range(n):
                for a in range(m):
                    variables.append(Variable(
                        _letter_name(dialect, alpha, i, a, k),
                        player=alpha, question=i, answer=a))

    ctx = Context(Alphabet(variables), field)
    one = ctx.one()
    rels: list[NCPoly] = []

    def gen(alpha, i, a=None):
        return ctx.letter(_letter_name(dialect, alpha, i, a, k, m))

    if dialect == "projector":
        for alpha in range(k):
            for i in range(n):
                for a in range(m):
                    e = gen(alpha, i, a)
                    rels.append(e * e - e)
                    for b in range(m):
                        if a != b:
                            rels.append(e * gen(alpha, i, b))
                rels.append(sum((gen(alpha, i, a) for a in range(m)),
                                ctx.zero()) - one)
        _cross_player_commutators(rels, ctx, shape, lambda a, i, r: gen(a, i, r),
                                  per_question=m)
    elif collapsed:
        power = 2 if m == 2 else m
        for alpha in range(k):
            for j in range(n):
                c = gen(alpha, j)
                acc = one
                for _ in range(power):
                    acc = acc * c
                rels.append(acc - one)
        _cross_player_commutators(rels, ctx, shape, lambda a, i, r: gen(a, i),
                                  per_question=1)
    else:
        for alpha in range(k):
            for i in range(n):
                for a in range(m):
                    x = gen(alpha, i, a)
                    rels.append(x * x - one)
                    for b in range(m):
                        if a != b:
                            rels.append((x + one) * (gen(alpha, i, b) + one))
                rels.append(sum((gen(alpha, i, a) for a in range(m)),
                                ctx.zero()) + (m - 2) * one)
        _cross_player_commutators(rels, ctx, shape, lambda a, i, r: gen(a, i, r),
                                  per_question=m)

    return UniversalAlgebra(shape, dialect, ctx, rels)


def _cross_player_commutators(rels, ctx, shape, gen, per_question):
    k, n = shape.players, shape.questions
    answers = range(per_question)
    for alpha in range(k):
        for beta in range(alpha + 1, k):
            for i in range(n):
                for j in range(n):
                    for a in answers:
                        for b in answers:
                            u = gen(alpha, i, a)
                            v = gen(beta, j, b)
                            rels.append(u * v - v * u)


@dataclass
class DeterminingSet:
    """Elements of the algebra whose directional annihilation of the
    state characterises perfection.  toric_clauses, when present, lists
    (scalar, word) with element = scalar*word - 1."""
    algebra: UniversalAlgebra
    elements: list
    toric_clauses: Optional[list] = None

    def __post_init__(self):
        if self.toric_clauses is not None:
            ctx = self.algebra.ctx
            for elem, (beta, word) in zip(self.elements, self.toric_clauses):
                expected = ctx.monomial(beta, word) - ctx.one()
                if elem != expected:
                    raise GameError("toric clause does not match its element")

    def max_degree(self) -> int:
        return max((e.degree() for e in self.elements), default=0)


def detect_toric(dset: DeterminingSet) -> DeterminingSet:
    """Re-derive toric clauses when every element is a scaled binomial
    c*(beta*g - 1) or c*(beta*g - beta'*g'); returns an equivalent set
    with normalized elements, or the input unchanged."""
    ctx = dset.algebra.ctx
    if dset.algebra.dialect == "projector":
        return dset
    one = ctx.one()
    clauses = []
    elements = []
    for e in dset.elements:
        terms = list(e.terms.items())
        if len(terms) != 2:
            return dset
        (w1, c1), (w2, c2) = terms
        # orient so w2 is the "denominator" word
        if ctx.order.compare(w1, w2) < 0:
            (w1, c1), (w2, c2) = (w2, c2), (w1, c1)
        beta = -(c1 * c2.inv())
        word = w1 + ctx.adjoint_word(w2)
        clauses.append((beta, word))
        elements.append(ctx.monomial(beta, word) - one)
    return DeterminingSet(dset.algebra, elements, clauses)


# -- tables -------------------------------------------------------------------

@dataclass
class GameTable:
    """{0,1}-scored game: per asked question vector, the set of valid
    response vectors.  Invalid responses are the complement."""
    shape: GameShape
    valid: dict  # question vector (tuple) -> set of response vectors

    def __post_init__(self):
        k, n, m = self.shape.players, self.shape.questions, self.shape.answers
        for q, responses in self.valid.items():
            if len(q) != k or any(not 0 <= i < n for i in q):
                raise GameError(f"bad question vector {q}")
            for r in responses:
                if len(r) != k or any(not 0 <= a < m for a in r):
                    raise GameError(f"bad response vector {r} for question {q}")

    def invalid(self, question) -> list:
        from itertools import product
        m, k = self.shape.answers, self.shape.players
        good = self.valid[question]
        return [r for r in product(range(m), repeat=k) if r not in good]


def detset_from_table(table: GameTable, which: str,
                      algebra: Optional[UniversalAlgebra] = None) -> DeterminingSet:
    """which = "invalid": monomials over losing responses;
    which = "valid": per-question sums over winning responses minus 1."""
    if which not in ("valid", "invalid"):
        raise GameError("which must be 'valid' or 'invalid'")
    algebra = algebra or universal_relations(table.shape, "projector")
    if algebra.dialect != "projector":
        raise GameError("table encodings use the projector dialect")
    ctx = algebra.ctx
    k = table.shape.players
    one = ctx.one()

    def response_monomial(question, response) -> NCPoly:
        word = []
        for alpha in range(k):
            name = _letter_name("projector", alpha, question[alpha],
                                response[alpha], k)
            word.append(ctx.alphabet.index[name])
        return ctx.monomial(1, tuple(word))

    elements = []
    for question in sorted(table.valid):
        if which == "invalid":
            for response in table.invalid(question):
                elements.append(response_monomial(question, response))
        else:
            acc = ctx.zero()
            for response in sorted(table.valid[question]):
                acc = acc + response_monomial(question, response)
            elements.append(acc - one)
    return DeterminingSet(algebra, elements)


# -- XOR and mod-r clause systems ---------------------------------------------

def encode_xor(shape: GameShape, clauses: Sequence[tuple]) -> DeterminingSet:
    """clauses: (question vector, sign) with sign in {0, 1}; the clause
    element is (-1)^sign * prod_alpha x_{i(alpha)}(alpha) - 1."""
    if shape.answers != 2:
        raise GameError("XOR games need exactly two answers")
    algebra = universal_relations(shape, "signature")
    ctx = algebra.ctx
    one = ctx.one()
    elements, toric = [], []
    for questions, sign in clauses:
        if len(questions) != shape.players:
            raise GameError(f"clause {questions} must list one question per player")
        if sign not in (0, 1):
            raise GameError("XOR clause signs are 0 or 1")
        word = tuple(ctx.alphabet.index[
            _letter_name("signature", alpha, q, None, shape.players)]
            for alpha, q in enumerate(questions))
        beta = ctx.field.scalar((-1) ** sign)
        toric.append((beta, word))
        elements.append(ctx.monomial(beta, word) - one)
    return DeterminingSet(algebra, elements, toric)


def encode_modr(shape: GameShape, equations: Sequence[tuple],
                r: Optional[int] = None) -> DeterminingSet:
    """equations: (question vector, coefficient vector, rhs) representing
    sum_alpha d(alpha) * y_{j(alpha)}(alpha) = s  (mod r).  Clause scalar
    convention: zeta = exp(-2*pi*i/r), clause = zeta^s * prod c^d - 1."""
    r = r or shape.answers
    if r != shape.answers:
        raise GameError("mod-r games use r = number of answers")
    algebra = universal_relations(shape, "cyclic")
    ctx = algebra.ctx
    field = ctx.field
    one = ctx.one()
    # zeta = exp(-2*pi*i/r) embeds as z^(N - N/r) for z = exp(2*pi*i/N)
    zeta = field.zeta(field.order - field.order // r)
    elements, toric = [], []
    for questions, coeffs, rhs in equations:
        if len(questions) != shape.players or len(coeffs) != shape.players:
            raise GameError("equation must list a question and coefficient per player")
        if not 0 <= rhs < r or any(not 0 <= d < r for d in coeffs):
            raise GameError("coefficients and right-hand side live in [0, r)")
        word = []
        for alpha, (q, d) in enumerate(zip(questions, coeffs)):
            if not 0 <= q < shape.questions:
                raise GameError(f"question index {q} out of range")
            idx = ctx.alphabet.index[
                _letter_name("cyclic", alpha, q, None, shape.players, r)]
            word.extend([idx] * d)
        beta = field.one
        for _ in range(rhs):
            beta = beta * zeta
        toric.append((beta, tuple(word)))
        elements.append(ctx.monomial(beta, tuple(word)) - one)
    return DeterminingSet(algebra, elements, toric)


# -- two-player linear system games -------------------------------------------

@dataclass(frozen=True)
class LinearSystem:
    """Equations sum_{t in T(j)} d_t^(j) * y_t = s_j (mod r) over
    variables y_0 .. y_{nvars-1}."""
    r: int
    nvars: int
    equations: tuple  # of (tuple of (var, coeff), rhs)

    def __post_init__(self):
        for terms, rhs in self.equations:
            if not 0 <= rhs < self.r:
                raise GameError("equation right-hand side out of range")
            seen = set()
            for t, d in terms:
                if not 0 <= t < self.nvars:
                    raise GameError(f"variable index {t} out of range")
                if t in seen:
                    raise GameError(f"variable {t} repeated within an equation")
                seen.add(t)
                if not 0 <= d < self.r:
                    raise GameError("coefficient out of range")

    def solutions(self):
        """Exhaustive classical solutions (oracle-grade, small systems)."""
        from itertools import product
        for assignment in product(range(self.r), repeat=self.nvars):
            if all(sum(d * assignment[t] for t, d in terms) % self.r == rhs
                   for terms, rhs in self.equations):
                yield assignment


def encode_linsys(system: LinearSystem) -> DeterminingSet:
    """Alice answers whole equations, Bob single variables.  Alice gets a
    distinct unitary letter per (equation, variable) incidence; letters
    within one equation commute, and every Alice letter commutes with
    every Bob letter.  The determining set has one clause per equation
    plus one consistency clause per incidence."""
    r = system.r
    field = _field_for(r)
    order = None if r == 2 else r
    variables = []
    for j, (terms, _) in enumerate(system.equations):
        for t, _d in terms:
            variables.append(Variable(f"c1_e{j}_v{t}", player=0, question=j,
                                      answer=t, adjoint_order=order))
    for t in range(system.nvars):
        variables.append(Variable(f"c2_v{t}", player=1, question=t,
                                  adjoint_order=order))
    ctx = Context(Alphabet(variables), field)
    one = ctx.one()

    rels: list[NCPoly] = []
    power = 2 if r == 2 else r
    for v in variables:
        c = ctx.letter(v.name)
        acc = one
        for _ in range(power):
            acc = acc * c
        rels.append(acc - one)
    alice = [v.name for v in variables if v.player == 0]
    bob = [v.name for v in variables if v.player == 1]
    for a in alice:
        pa = ctx.letter(a)
        for b in bob:
            pb = ctx.letter(b)
            rels.append(pb * pa - pa * pb)
    for j, (terms, _) in enumerate(system.equations):
        names = [f"c1_e{j}_v{t}" for t, _d in terms]
        for i in range(len(names)):
            for k in range(i + 1, len(names)):
                u, v = ctx.letter(names[i]), ctx.letter(names[k])
                rels.append(v * u - u * v)

    shape = GameShape(2, max(len(system.equations), system.nvars), r)
    algebra = UniversalAlgebra(shape, "cyclic", ctx, rels)

    zeta = field.zeta(field.order - field.order // r)
    elements, toric = [], []
    for j, (terms, rhs) in enumerate(system.equations):
        word = []
        for t, d in terms:
            idx = ctx.alphabet.index[f"c1_e{j}_v{t}"]
            word.extend([idx] * d)
        beta = field.one
        for _ in range(rhs):
            beta = beta * zeta
        toric.append((beta, tuple(word)))
        elements.append(ctx.monomial(beta, tuple(word)) - one)
    for j, (terms, _) in enumerate(system.equations):
        for t, _d in terms:
            a_idx = ctx.alphabet.index[f"c1_e{j}_v{t}"]
            b_idx = ctx.alphabet.index[f"c2_v{t}"]
            word = (a_idx,) + ctx.adjoint_word((b_idx,))
            toric.append((field.one, word))
            elements.append(ctx.monomial(1, word) - one)
    return DeterminingSet(algebra, elements, toric)


# -- synchronous games and graph coloring -------------------------------------

def check_synchronous(table: GameTable):
    """A synchronous table asks every repeated question (i, i) and scores
    it by answer agreement.  Raises naming the violated (i, a, b)."""
    if table.shape.players != 2:
        raise GameError("synchronous games have exactly two players")
    n, m = table.shape.questions, table.shape.answers
    for i in range(n):
        q = (i, i)
        if q not in table.valid:
            raise GameError(f"synchronous table must ask question ({i}, {i})")
        good = table.valid[q]
        for a in range(m):
            for b in range(m):
                expected = a == b
                if ((a, b) in good) != expected:
                    raise GameError(
                        f"synchronicity violated at question {i}: "
                        f"V({a},{b}|{i},{i}) must be {int(expected)}")


def encode_synchronous(table: GameTable):
    """Returns (two-player determining set, one-player two-sided ideal
    generators).  The two-player set symmetrises the invalid monomials
    over both players and adds the per-(question, answer) differences;
    the one-player generators present the synchronous quotient algebra."""
    check_synchronous(table)
    algebra = universal_relations(table.shape, "projector")
    ctx = algebra.ctx
    k = table.shape.players

    def letter(alpha, i, a):
        return ctx.letter(_letter_name("projector", alpha, i, a, k))

    elements = []
    for question in sorted(table.valid):
        for response in table.invalid(question):
            for alpha in (0, 1):
                word = tuple(
                    ctx.alphabet.index[_letter_name("projector", alpha,
                                                    question[p], response[p], k)]
                    for p in range(k))
                elements.append(ctx.monomial(1, word))
    for i in range(table.shape.questions):
        for a in range(table.shape.answers):
            elements.append(letter(0, i, a) - letter(1, i, a))
    two_player = DeterminingSet(algebra, elements)

    one_player = one_player_algebra(table.shape.questions, table.shape.answers)
    gens = []
    for question in sorted(table.valid):
        for response in table.invalid(question):
            word = tuple(one_player.ctx.alphabet.index[
                _one_player_name(question[p], response[p])] for p in range(k))
            gens.append(one_player.ctx.monomial(1, word))
    return two_player, (one_player, gens)


def _one_player_name(question: int, answer: int) -> str:
    return f"e{question + 1}_a{answer}"


def one_player_algebra(questions: int, answers: int,
                       field: Optional[CycloField] = None) -> UniversalAlgebra:
    """Projector relations for a single player (no commutation)."""
    field = field or _field_for(answers)
    variables = [Variable(_one_player_name(i, a), player=0, question=i, answer=a)
                 for i in range(questions) for a in range(answers)]
    ctx = Context(Alphabet(variables), field)
    one = ctx.one()
    rels = []
    for i in range(questions):
        for a in range(answers):
            e = ctx.letter(_one_player_name(i, a))
            rels.append(e * e - e)
            for b in range(answers):
                if a != b:
                    rels.append(e * ctx.letter(_one_player_name(i, b)))
        rels.append(sum((ctx.letter(_one_player_name(i, a))
                         for a in range(answers)), ctx.zero()) - one)
    shape = GameShape(1, questions, answers)
    return UniversalAlgebra(shape, "projector", ctx, rels)


@dataclass(frozen=True)
class Graph:
    vertices: tuple
    edges: tuple  # of (u, v) pairs, u != v

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise GameError(f"self-loop at vertex {u}")
            if u not in self.vertices or v not in self.vertices:
                raise GameError(f"edge ({u}, {v}) uses an unknown vertex")
            key = frozenset((u, v))
            if key in seen:
                raise GameError(f"duplicate edge ({u}, {v})")
            seen.add(key)


def encode_coloring(graph: Graph, colors: int):
    """One-player quantum-coloring ideal: per-vertex projector relations
    plus e^u_a e^v_a for every edge and color (both orientations).
    Returns (algebra, two-sided ideal generators)."""
    algebra = one_player_algebra(len(graph.vertices), colors)
    ctx = algebra.ctx
    position = {v: i for i, v in enumerate(graph.vertices)}
    gens = []
    for u, v in graph.edges:
        for a in range(colors):
            eu = ctx.letter(_one_player_name(position[u], a))
            ev = ctx.letter(_one_player_name(position[v], a))
            gens.append(eu * ev)
            gens.append(ev * eu)
    return algebra, gens


def coloring_table(graph: Graph, colors: int) -> GameTable:
    """The synchronous game table of the coloring game: questions are
    vertices; distinct answers required on edges, equal on repeats."""
    shape = GameShape(2, len(graph.vertices), colors)
    position = {v: i for i, v in enumerate(graph.vertices)}
    valid = {}
    for i, _ in enumerate(graph.vertices):
        valid[(i, i)] = {(a, a) for a in range(colors)}
    for u, v in graph.edges:
        iu, iv = position[u], position[v]
        difference = {(a, b) for a in range(colors) for b in range(colors) if a != b}
        valid[(iu, iv)] = set(difference)
        valid[(iv, iu)] = set(difference)
    return GameTable(shape, valid)


# -- game polynomial (documentation only) -------------------------------------

def game_polynomial(table: GameTable,
                    algebra: Optional[UniversalAlgebra] = None) -> NCPoly:
    """The averaged winning-projector polynomial of a table game.  The
    decision pipeline never evaluates it; it exists for reports."""
    algebra = algebra or universal_relations(table.shape, "projector")
    ctx = algebra.ctx
    k = table.shape.players
    acc = ctx.zero()
    weight = Fraction(1, len(table.valid))
    for question in sorted(table.valid):
        for response in sorted(table.valid[question]):
            word = tuple(ctx.alphabet.index[
                _letter_name("projector", alpha, question[alpha],
                             response[alpha], k)] for alpha in range(k))
            acc = acc + ctx.monomial(weight, word)
    return acc


# -- dialect conversions ------------------------------------------------------

def projector_to_signature(algebra_p: UniversalAlgebra,
                           algebra_s: UniversalAlgebra, p: NCPoly) -> NCPoly:
    """Substitute e = (1 + x)/2 (answer 0) and (1 - x)/2 (answer 1).
    Two-answer games only."""
    _require_two_answers(algebra_p, algebra_s)
    ctx_s = algebra_s.ctx
    images = {}
    k = algebra_p.shape.players
    for idx, var in enumerate(algebra_p.ctx.alphabet.variables):
        x = ctx_s.letter(_letter_name("signature", var.player, var.question,
                                      None, k))
        half = ctx_s.scalar(Fraction(1, 2))
        images[idx] = half * (ctx_s.one() + x) if var.answer == 0 \
            else half * (ctx_s.one() - x)
    return p.substitute(images, ctx_s)


def signature_to_projector(algebra_s: UniversalAlgebra,
                           algebra_p: UniversalAlgebra, p: NCPoly) -> NCPoly:
    """Substitute x = 2*e_0 - 1.  Two-answer games only."""
    _require_two_answers(algebra_p, algebra_s)
    ctx_p = algebra_p.ctx
    images = {}
    k = algebra_s.shape.players
    for idx, var in enumerate(algebra_s.ctx.alphabet.variables):
        e0 = ctx_p.letter(_letter_name("projector", var.player, var.question,
                                       0, k))
        images[idx] = 2 * e0 - ctx_p.one()
    return p.substitute(images, ctx_p)


def _require_two_answers(*algebras):
    for alg in algebras:
        if alg.shape.answers != 2:
            raise GameError("dialect conversion is implemented for two answers")


# -- game file format ---------------------------------------------------------
#
#   shape K N M
#   xor | modr R | linsys R | table | graph C
#   clause i1 i2 ... ik : s          (xor)
#   clause i1^d1 ... ik^dk : s       (modr; ^d optional, default 1)
#   eq t1^d1 t2^d2 ... : s           (linsys; t are variable indices)
#   Q i1 .. ik : a1 a2, b1 b2, ...   (table: valid tuples per question)
#   edge u v                         (graph)
#
# '#' starts a comment; blank lines are skipped.

class GameFileError(GameError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


@dataclass
class GameFile:
    kind: str
    shape: Optional[GameShape]
    detset: Optional[DeterminingSet]
    # coloring games carry the graph + color count instead of a detset
    graph: Optional[Graph] = None
    colors: Optional[int] = None
    table: Optional[GameTable] = None
    source_lines: Optional[list] = None


def parse_game_source(text: str, table_detset: str = "invalid") -> GameFile:
    lines = text.splitlines()
    shape = None
    kind = None
    param = None
    body = []  # (lineno, tokens)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0].lower()
        if head == "shape":
            if shape is not None:
                raise GameFileError(lineno, "duplicate shape line")
            if len(tokens) != 4:
                raise GameFileError(lineno, "shape needs three integers: k n m")
            try:
                shape = GameShape(*(int(t) for t in tokens[1:]))
            except (ValueError, GameError) as exc:
                raise GameFileError(lineno, str(exc)) from exc
        elif head in ("xor", "modr", "linsys", "table", "graph"):
            if kind is not None:
                raise GameFileError(lineno, "duplicate game kind line")
            kind = head
            if head in ("modr", "linsys", "graph"):
                if len(tokens) != 2:
                    raise GameFileError(lineno, f"{head} needs one integer argument")
                try:
                    param = int(tokens[1])
                except ValueError as exc:
                    raise GameFileError(lineno, str(exc)) from exc
            elif len(tokens) != 1:
                raise GameFileError(lineno, f"{head} takes no arguments")
        else:
            if kind is None:
                raise GameFileError(lineno, f"unexpected line before game kind: {raw!r}")
            body.append((lineno, tokens))

    if kind is None:
        raise GameFileError(len(lines) or 1, "missing game kind line")
    if kind != "graph" and shape is None:
        raise GameFileError(len(lines) or 1, "missing shape line")

    builder = {
        "xor": _build_xor, "modr": _build_modr, "linsys": _build_linsys,
        "table": _build_table, "graph": _build_graph,
    }[kind]
    game = builder(shape, param, body, table_detset)
    game.source_lines = lines
    return game


def _parse_int(lineno, token):
    try:
        return int(token)
    except ValueError:
        raise GameFileError(lineno, f"expected an integer, got {token!r}") from None


def _split_colon(lineno, tokens):
    if ":" in tokens:
        k = tokens.index(":")
        return tokens[:k], tokens[k + 1:]
    raise GameFileError(lineno, "missing ':' separator")


def _build_xor(shape, param, body, table_detset):
    clauses = []
    for lineno, tokens in body:
        if tokens[0] != "clause":
            raise GameFileError(lineno, f"expected clause lines, got {tokens[0]!r}")
        left, right = _split_colon(lineno, tokens[1:])
        if len(right) != 1:
            raise GameFileError(lineno, "clause needs a single right-hand side")
        questions = tuple(_parse_int(lineno, t) for t in left)
        if len(questions) != shape.players:
            raise GameFileError(lineno, "clause must list one question per player")
        if any(not 0 <= q < shape.questions for q in questions):
            raise GameFileError(lineno, "question index out of range")
        clauses.append((questions, _parse_int(lineno, right[0])))
    try:
        detset = encode_xor(shape, clauses)
    except GameError as exc:
        raise GameFileError(body[0][0] if body else 1, str(exc)) from exc
    return GameFile("xor", shape, detset)


def _parse_powered(lineno, token):
    if "^" in token:
        base, exp = token.split("^", 1)
        return _parse_int(lineno, base), _parse_int(lineno, exp)
    return _parse_int(lineno, token), 1


def _build_modr(shape, r, body, table_detset):
    equations = []
    for lineno, tokens in body:
        if tokens[0] != "clause":
            raise GameFileError(lineno, f"expected clause lines, got {tokens[0]!r}")
        left, right = _split_colon(lineno, tokens[1:])
        if len(right) != 1:
            raise GameFileError(lineno, "clause needs a single right-hand side")
        pairs = [_parse_powered(lineno, t) for t in left]
        if len(pairs) != shape.players:
            raise GameFileError(lineno, "clause must list one question per player")
        questions = tuple(q for q, _ in pairs)
        coeffs = tuple(d for _, d in pairs)
        equations.append((questions, coeffs, _parse_int(lineno, right[0])))
    try:
        detset = encode_modr(shape, equations, r)
    except GameError as exc:
        raise GameFileError(body[0][0] if body else 1, str(exc)) from exc
    return GameFile("modr", shape, detset)


def _build_linsys(shape, r, body, table_detset):
    equations = []
    for lineno, tokens in body:
        if tokens[0] != "eq":
            raise GameFileError(lineno, f"expected eq lines, got {tokens[0]!r}")
        left, right = _split_colon(lineno, tokens[1:])
        if len(right) != 1:
            raise GameFileError(lineno, "eq needs a single right-hand side")
        terms = tuple(_parse_powered(lineno, t) for t in left)
        equations.append((terms, _parse_int(lineno, right[0])))
    nvars = shape.questions
    try:
        system = LinearSystem(r, nvars, tuple(equations))
        detset = encode_linsys(system)
    except GameError as exc:
        raise GameFileError(body[0][0] if body else 1, str(exc)) from exc
    game = GameFile("linsys", shape, detset)
    game.colors = None
    return game


def _build_table(shape, param, body, table_detset):
    valid = {}
    for lineno, tokens in body:
        if tokens[0] != "Q":
            raise GameFileError(lineno, f"expected Q lines, got {tokens[0]!r}")
        left, right = _split_colon(lineno, tokens[1:])
        question = tuple(_parse_int(lineno, t) for t in left)
        if len(question) != shape.players:
            raise GameFileError(lineno, "question must list one index per player")
        responses = set()
        current = []
        for tok in right:
            parts = tok.split(",")
            for piece in parts[:-1]:
                if piece:
                    current.append(_parse_int(lineno, piece))
                responses.add(tuple(current))
                current = []
            if parts[-1]:
                current.append(_parse_int(lineno, parts[-1]))
        if current:
            responses.add(tuple(current))
        for resp in responses:
            if len(resp) != shape.players:
                raise GameFileError(lineno, f"response {resp} has wrong arity")
        if question in valid:
            raise GameFileError(lineno, f"question {question} repeated")
        valid[question] = responses
    try:
        table = GameTable(shape, valid)
        detset = detset_from_table(table, table_detset)
    except GameError as exc:
        raise GameFileError(body[0][0] if body else 1, str(exc)) from exc
    game = GameFile("table", shape, detset)
    game.table = table
    return game


def _build_graph(shape, colors, body, table_detset):
    vertices = []
    edges = []
    seen = set()
    for lineno, tokens in body:
        if tokens[0] != "edge" or len(tokens) != 3:
            raise GameFileError(lineno, "graph lines look like: edge u v")
        u, v = tokens[1], tokens[2]
        if u == v:
            raise GameFileError(lineno, f"self-loop at vertex {u}")
        for w in (u, v):
            if w not in seen:
                seen.add(w)
                vertices.append(w)
        edges.append((u, v))
    try:
        graph = Graph(tuple(vertices), tuple(edges))
    except GameError as exc:
        raise GameFileError(body[0][0] if body else 1, str(exc)) from exc
    game = GameFile("graph", shape, None)
    game.graph = graph
    game.colors = colors
    return game
