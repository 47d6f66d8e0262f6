"""Exact sum-of-squares non-existence certificates via a Gram-matrix SDP.

Pipeline: list the normal-form words W of degree <= d, impose that
1 + W* M W reduces to zero (one linear equation on the symmetric matrix
M per normal-form word reached by the products, split coordinate-wise
over the field basis so every equation is rational), find a strictly
feasible float M by Dykstra alternating projections between the affine
constraint subspace and a shifted PSD cone, then round to rationals,
restore feasibility exactly, and prove positive semidefiniteness by an
exact LDL^T factorization.  The float stage is never trusted: a claim
is only emitted after the exact certificate re-verifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

try:
    from gmpy2 import mpq
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    mpq = Fraction

from .freealg import Word
from .gbase import RewriteSystem

DENOMINATOR_SCHEDULE = (10 ** 3, 10 ** 5, 10 ** 7, 10 ** 9, 10 ** 12)


class SosError(ValueError):
    pass


def _pair_id(i: int, j: int) -> int:
    """Index of the unordered pair {i, j} with i <= j."""
    if i > j:
        i, j = j, i
    return j * (j + 1) // 2 + i


def enumerate_basis(system: RewriteSystem, degree: int) -> list:
    """Normal-form words of degree <= d, ascending in the monomial order.
    A word is normal iff no rule's leading word occurs in it, and since
    prefixes of normal words are normal the enumeration extends normal
    words letter by letter."""
    ctx = system.ctx
    if system.find_redex(()) is not None:
        return []          # unit ideal: no normal-form words at all
    letters = [i for i in range(len(ctx.alphabet))
               if i != ctx.alphabet.aux_index]
    words: list[Word] = [()]
    layer: list[Word] = [()]
    for _ in range(degree):
        nxt = []
        for w in layer:
            for g in letters:
                cand = w + (g,)
                if system.find_redex(cand) is None:
                    nxt.append(cand)
        words.extend(nxt)
        layer = nxt
    return sorted(words, key=ctx.order.key)


@dataclass
class GramProblem:
    system: RewriteSystem
    degree: int
    words: list
    # rows: ((word, coord), {pair_id: Fraction}, rhs Fraction)
    rows: list
    nf_products: dict     # (i, j) -> NCPoly, the reduced word products
    product_words: set    # words with nonzero coefficient in some product

    @property
    def dimension(self) -> int:
        return len(self.words)

    @property
    def constraint_count(self) -> int:
        """Distinct constrained words: the nonconstant normal-form words
        reached by the reduced products, plus one for the offset."""
        return len(self.product_words - {()}) + 1


def setup(system: RewriteSystem, degree: int) -> GramProblem:
    """Assemble the linear constraints on a symmetric Gram matrix M for
    1 + W* M W to lie in the ideal of the rewriting system."""
    ctx = system.ctx
    words = enumerate_basis(system, degree)
    n = len(words)
    adjoints = [ctx.adjoint_word(w) for w in words]

    nf_products: dict = {}
    for i in range(n):
        for j in range(n):
            p = ctx.monomial(1, adjoints[i] + words[j])
            nf_products[(i, j)] = system.normal_form(p)

    fdeg = ctx.field.degree
    coeff_rows: dict = {}
    product_words: set = set()
    for i in range(n):
        for j in range(n):
            product_words.update(nf_products[(i, j)].terms)
    for i in range(n):
        for j in range(i, n):
            poly = nf_products[(i, j)]
            if i != j:
                poly = poly + nf_products[(j, i)]
            pid = _pair_id(i, j)
            for word, coeff in poly.terms.items():
                for coord in range(fdeg):
                    a = coeff.coords[coord]
                    if a:
                        row = coeff_rows.setdefault((word, coord), {})
                        row[pid] = row.get(pid, Fraction(0)) + a

    rows = []
    for key in sorted(coeff_rows, key=lambda k: (ctx.order.key(k[0]), k[1])):
        entries = {p: c for p, c in coeff_rows[key].items() if c}
        rhs = Fraction(-1) if key == ((), 0) else Fraction(0)
        if not entries:
            if rhs:
                raise SosError("constant constraint with no unknowns")
            continue
        rows.append((key, entries, rhs))
    if words and ((), 0) not in coeff_rows:
        # W always contains the empty word, so M[0,0] appears here.
        raise SosError("the offset constraint is missing")
    return GramProblem(system, degree, words, rows, nf_products, product_words)


# -- exact presolve -----------------------------------------------------------

@dataclass
class Presolve:
    pinned: dict            # pair_id -> Fraction
    pivots: dict            # pair_id -> ({free pair_id: Fraction}, Fraction const)
    free: list              # pair ids, sorted
    contradiction: Optional[str] = None
    forced_negative_diagonal: Optional[int] = None


def _diag_pairs(n: int) -> set:
    return {_pair_id(i, i) for i in range(n)}


def presolve(problem: GramProblem) -> Presolve:
    """Pin variables fixed by single-unknown rows (cascading), then bring
    the remaining rows to reduced row echelon form over the rationals.

    The result expresses the affine constraint set as: pinned variables
    take fixed values, pivot variables are affine in the free variables,
    free variables are unconstrained."""
    n = problem.dimension
    rows = [dict(entries) for _, entries, _ in problem.rows]
    rhs = [r for _, _, r in problem.rows]
    pinned: dict = {}
    active = list(range(len(rows)))
    while True:
        changed = False
        still = []
        for ridx in active:
            row = rows[ridx]
            for p in [p for p in row if p in pinned]:
                rhs[ridx] -= row.pop(p) * pinned[p]
            if not row:
                if rhs[ridx]:
                    return Presolve({}, {}, [],
                                    contradiction="inconsistent constraint row")
                continue
            if len(row) == 1:
                (p, c), = row.items()
                pinned[p] = rhs[ridx] / c
                changed = True
                continue
            still.append(ridx)
        active = still
        if not changed:
            break

    diag = _diag_pairs(n)
    for p, v in pinned.items():
        if p in diag and v < 0:
            return Presolve(pinned, {}, [], forced_negative_diagonal=p)

    remaining = []
    for ridx in active:
        row = {p: c for p, c in rows[ridx].items() if c}
        if row:
            remaining.append((row, rhs[ridx]))
        elif rhs[ridx]:
            return Presolve({}, {}, [], contradiction="inconsistent constraint row")

    # sparsest-first elimination keeps fill-in manageable
    remaining.sort(key=lambda rw: len(rw[0]))
    occurrence: dict = {}
    for row, _ in remaining:
        for p in row:
            occurrence[p] = occurrence.get(p, 0) + 1

    pivots: dict = {}
    order: list = []
    for row, r in remaining:
        row = dict(row)
        while True:
            hit = [p for p in row if p in pivots]
            if not hit:
                break
            for pv in hit:
                c = row.pop(pv, None)
                if c is None:
                    continue
                expr, const = pivots[pv]
                for q, cq in expr.items():
                    v = row.get(q, Fraction(0)) + c * cq
                    if v:
                        row[q] = v
                    else:
                        row.pop(q, None)
                r -= c * const
        if not row:
            if r:
                return Presolve({}, {}, [], contradiction="rank-deficient clash")
            continue
        pv = min(row, key=lambda p: (occurrence.get(p, 0), p))
        c = row.pop(pv)
        expr = {q: -cq / c for q, cq in row.items()}
        const = r / c
        pivots[pv] = (expr, const)
        order.append(pv)

    # back-substitute so pivot expressions mention free variables only
    for pv in reversed(order):
        expr, const = pivots[pv]
        while True:
            inner = [q for q in expr if q in pivots]
            if not inner:
                break
            for q in inner:
                cq = expr.pop(q)
                sub_expr, sub_const = pivots[q]
                for t, ct in sub_expr.items():
                    v = expr.get(t, Fraction(0)) + cq * ct
                    if v:
                        expr[t] = v
                    else:
                        expr.pop(t, None)
                const += cq * sub_const
        pivots[pv] = (expr, const)

    all_pairs = n * (n + 1) // 2
    free = sorted(set(range(all_pairs)) - set(pinned) - set(pivots))
    return Presolve(pinned, pivots, free)


# -- float feasibility stage --------------------------------------------------

@dataclass
class SolveResult:
    kind: str                  # "feasible" | "infeasible" | "undetermined"
    detail: str = ""
    matrix: Optional[np.ndarray] = None
    min_eig: float = float("nan")
    sweeps: int = 0


def _svec_maps(n: int):
    """svec coordinates: diagonal entries, then off-diagonals scaled by
    sqrt(2); Frobenius inner product becomes Euclidean."""
    pairs = [(i, j) for j in range(n) for i in range(j + 1)]
    return pairs


def solve_feasibility(problem: GramProblem, tol: float = 1e-9,
                      max_sweeps: int = 50000, margin: float = 0.01,
                      debug: bool = False,
                      presolved: Optional[Presolve] = None) -> SolveResult:
    """Dykstra alternating projections between the affine constraint
    subspace and the cone {X : X >= margin*I}."""
    n = problem.dimension
    if n == 0:
        # unit ideal: the empty Gram matrix is vacuously feasible
        return SolveResult("feasible", matrix=np.zeros((0, 0)),
                           min_eig=float("inf"),
                           detail="unit ideal, empty problem")
    pre = presolved or presolve(problem)
    if pre.contradiction:
        return SolveResult("infeasible", detail=pre.contradiction)
    if pre.forced_negative_diagonal is not None:
        return SolveResult(
            "infeasible",
            detail="a diagonal entry is pinned to a negative value")

    sqrt2 = float(np.sqrt(2.0))
    pairs = _svec_maps(n)
    # pairs[p] == (i, j) for pair id p by construction of _pair_id
    scale = np.array([1.0 if i == j else sqrt2 for (i, j) in pairs])

    # Affine data in svec coordinates x_p = M_ij * scale_p, so a
    # functional sum(c_p * M_p) becomes sum((c_p / scale_p) * x_p).
    pin_vec = np.zeros(len(pairs))
    pin_mask = np.zeros(len(pairs), dtype=bool)
    for p, v in pre.pinned.items():
        pin_mask[p] = True
        pin_vec[p] = float(v) * scale[p]

    rref_rows = []
    rref_rhs = []
    for pv, (expr, const) in pre.pivots.items():
        # pivot - sum(expr_q * q) = const, as entry functionals
        cols = [pv] + list(expr)
        vals = [1.0 / scale[pv]] + [-float(cq) / scale[q]
                                    for q, cq in expr.items()]
        rref_rows.append((cols, vals))
        rref_rhs.append(float(const))
    rref_rhs = np.array(rref_rhs) if rref_rhs else np.zeros(0)

    import scipy.sparse as sp
    if rref_rows:
        data, rows_idx, cols_idx = [], [], []
        for r, (cols, vals) in enumerate(rref_rows):
            for c, v in zip(cols, vals):
                rows_idx.append(r)
                cols_idx.append(c)
                data.append(v)
        A = sp.csr_matrix((data, (rows_idx, cols_idx)),
                          shape=(len(rref_rows), len(pairs)))
        gram = (A @ A.T).toarray()
        try:
            from scipy.linalg import cho_factor, cho_solve
            gram_cho = cho_factor(gram)

            def solve_gram(v):
                return cho_solve(gram_cho, v)
        except Exception:
            def solve_gram(v):
                return np.linalg.lstsq(gram, v, rcond=None)[0]
    else:
        A = None

    def project_affine(x):
        y = x.copy()
        y[pin_mask] = pin_vec[pin_mask]
        if A is not None:
            res = A @ y - rref_rhs
            y = y - A.T @ solve_gram(res)
            y[pin_mask] = pin_vec[pin_mask]
            # one refinement pass keeps pinned coords and rows compatible
            res = A @ y - rref_rhs
            y = y - A.T @ solve_gram(res)
        return y

    def to_matrix(x):
        m = np.zeros((n, n))
        for c, (i, j) in enumerate(pairs):
            v = x[c] / (1.0 if i == j else sqrt2)
            m[i, j] = v
            m[j, i] = v
        return m

    def to_svec(m):
        x = np.zeros(len(pairs))
        for c, (i, j) in enumerate(pairs):
            x[c] = m[i, i] if i == j else m[i, j] * sqrt2
        return x

    def project_psd(x):
        m = to_matrix(x)
        vals, vecs = np.linalg.eigh(m)
        clipped = np.maximum(vals, margin)
        m2 = (vecs * clipped) @ vecs.T
        return to_svec(m2), float(vals.min())

    x = project_affine(to_svec(np.eye(n)))
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    if debug:
        xa = project_affine(x)
        assert np.allclose(project_affine(xa), xa, atol=1e-9), \
            "affine projection must be idempotent"

    last_gap = np.inf
    stall = 0
    for sweep in range(1, max_sweeps + 1):
        y, _ = project_psd(x + p)
        p = x + p - y
        x_new = project_affine(y + q)
        q = y + q - x_new
        gap = float(np.linalg.norm(x_new - y))
        x = x_new
        aff_res_of_y = float(np.abs(A @ y - rref_rhs).max()) if A is not None else 0.0
        pin_res_of_y = float(np.abs(y[pin_mask] - pin_vec[pin_mask]).max()) if pin_mask.any() else 0.0
        res = max(aff_res_of_y, pin_res_of_y)
        if res < tol and gap < max(tol * np.sqrt(len(pairs)), 1e-7):
            m = to_matrix(y)
            eigs = np.linalg.eigvalsh(m)
            return SolveResult("feasible", matrix=m, min_eig=float(eigs.min()),
                               sweeps=sweep,
                               detail=f"converged after {sweep} sweeps")
        if gap > last_gap - 1e-14:
            stall += 1
        else:
            stall = 0
        last_gap = min(last_gap, gap)
        if stall > 2000:
            return SolveResult(
                "undetermined", sweeps=sweep,
                detail=f"stalled with constraint residual {res:.2e} and "
                       f"cone gap {gap:.2e}")
    return SolveResult("undetermined", sweeps=max_sweeps,
                       detail="sweep budget exhausted")


# -- rationalization and exact verification -----------------------------------

@dataclass
class RationalCertificate:
    words: list                 # basis words (index order of M)
    matrix: dict                # (i, j) i<=j -> Fraction, symmetric rational M
    permutation: list           # pivot order used by the exact factorization
    diagonal: list              # nonnegative rational pivots (as Fraction)
    squares: list               # (weight Fraction, {word_index: Fraction})
    degree: int

    def entry(self, i: int, j: int) -> Fraction:
        if i > j:
            i, j = j, i
        return self.matrix.get((i, j), Fraction(0))


def _exact_ldlt(n: int, entry):
    """LDL^T with symmetric pivoting on the largest remaining diagonal.
    Returns (perm, diag, lower) with M = P L D L^T P^T, or None when a
    negative pivot or an inconsistent zero pivot shows M is not PSD."""
    a = [[mpq(entry(i, j).numerator, entry(i, j).denominator)
          for j in range(n)] for i in range(n)]
    perm = list(range(n))
    diag = []
    lower = [[mpq(0)] * n for _ in range(n)]
    zero = mpq(0)
    for k in range(n):
        pivot_row = max(range(k, n), key=lambda r: a[r][r])
        if a[pivot_row][pivot_row] > 0:
            if pivot_row != k:
                _swap_sym(a, lower, perm, k, pivot_row)
        else:
            # all remaining diagonals <= 0: PSD requires the whole block zero
            for r in range(k, n):
                if a[r][r] < 0:
                    return None
                for c in range(k, n):
                    if a[r][c] != 0:
                        return None
            for r in range(k, n):
                diag.append(Fraction(0))
                lower[r][r] = mpq(1)
            break
        d = a[k][k]
        diag.append(Fraction(d.numerator, d.denominator))
        lower[k][k] = mpq(1)
        inv = 1 / d
        col = [a[r][k] * inv for r in range(n)]
        for r in range(k + 1, n):
            lower[r][k] = col[r]
            ark = a[r][k]
            if ark == zero:
                continue
            for c in range(k + 1, r + 1):
                a[r][c] -= col[c] * ark
                a[c][r] = a[r][c]
        for r in range(k + 1, n):
            a[r][k] = zero
            a[k][r] = zero
    return perm, diag, lower


def _swap_sym(a, lower, perm, i, j):
    perm[i], perm[j] = perm[j], perm[i]
    a[i], a[j] = a[j], a[i]
    for row in a:
        row[i], row[j] = row[j], row[i]
    lower[i], lower[j] = lower[j], lower[i]


def rationalize_and_verify(m_float: np.ndarray, problem: GramProblem,
                           schedule: Sequence[int] = DENOMINATOR_SCHEDULE,
                           presolved: Optional[Presolve] = None
                           ) -> Optional[RationalCertificate]:
    """Round to rationals with bounded denominators, restore the affine
    constraints exactly via the presolved pivot expressions, and prove
    positive semidefiniteness by exact LDL^T.  Escalates the denominator
    bound; returns None when the schedule is exhausted."""
    n = problem.dimension
    pre = presolved or presolve(problem)
    if pre.contradiction or pre.forced_negative_diagonal is not None:
        return None
    pairs = _svec_maps(n)

    for bound in schedule:
        values: dict = dict(pre.pinned)
        for p in pre.free:
            i, j = pairs[p]
            values[p] = Fraction(float(m_float[i, j])).limit_denominator(bound)
        for pv, (expr, const) in pre.pivots.items():
            acc = const
            for q, cq in expr.items():
                acc += cq * values[q]
            values[pv] = acc
        matrix = {}
        for j in range(n):
            for i in range(j + 1):
                v = values.get(_pair_id(i, j), Fraction(0))
                if v:
                    matrix[(i, j)] = v

        def entry(i, j, matrix=matrix):
            if i > j:
                i, j = j, i
            return matrix.get((i, j), Fraction(0))

        factor = _exact_ldlt(n, entry)
        if factor is None:
            continue
        perm, diag, lower = factor
        squares = []
        for k, d in enumerate(diag):
            if d == 0:
                continue
            combo = {}
            for r in range(k, n):
                c = lower[r][k]
                if c != 0:
                    combo[perm[r]] = Fraction(c.numerator, c.denominator)
            squares.append((d, combo))
        cert = RationalCertificate(list(problem.words), matrix, perm,
                                   diag, squares, problem.degree)
        report = check_certificate(cert, problem.system,
                                   nf_products=problem.nf_products)
        if report.ok:
            return cert
    return None


@dataclass
class CheckReport:
    ok: bool
    failures: list
    min_pivot: Optional[Fraction] = None


def check_certificate(cert: RationalCertificate, system: RewriteSystem,
                      nf_products: Optional[dict] = None,
                      sample_factor_entries: int = 2000) -> CheckReport:
    """Independent re-verification of a rational certificate:

    * re-factor M exactly (fresh LDL^T) and require nonnegative pivots;
    * re-reduce 1 + W* M W and require the exact normal form zero;
    * cross-check the recorded squares against M on sampled entries.
    Reductions reuse precomputed word products when provided; they are
    recomputed from the rewriting system otherwise.
    """
    failures = []
    ctx = system.ctx
    n = len(cert.words)

    factor = _exact_ldlt(n, cert.entry)
    if factor is None:
        failures.append("matrix is not positive semidefinite")
        min_pivot = None
    else:
        _, diag, _ = factor
        min_pivot = min(diag) if diag else Fraction(0)
        if min_pivot < 0:
            failures.append("negative pivot in exact factorization")

    if nf_products is None:
        adjoints = [ctx.adjoint_word(w) for w in cert.words]
        nf_products = {}
        needed = set()
        for (i, j) in cert.matrix:
            needed.add((i, j))
            needed.add((j, i))
        for (i, j) in needed:
            p = ctx.monomial(1, adjoints[i] + cert.words[j])
            nf_products[(i, j)] = system.normal_form(p)

    total = ctx.one()
    for (i, j), v in sorted(cert.matrix.items()):
        total = total + nf_products[(i, j)] * v
        if i != j:
            total = total + nf_products[(j, i)] * v
    residual = system.normal_form(total)
    if not residual.is_zero():
        failures.append("1 + W*MW does not reduce to zero")

    # spot-check the recorded factorization against M
    import random
    rng = random.Random(0)
    samples = min(sample_factor_entries, n * n)
    for _ in range(samples):
        i = rng.randrange(n)
        j = rng.randrange(n)
        acc = Fraction(0)
        for weight, combo in cert.squares:
            acc += weight * combo.get(i, Fraction(0)) * combo.get(j, Fraction(0))
        if acc != cert.entry(i, j):
            failures.append("recorded squares do not reproduce the matrix")
            break

    return CheckReport(not failures, failures, min_pivot)


def square_polynomials(cert: RationalCertificate, system: RewriteSystem):
    """The SOS summands as polynomials: weight w_k and s_k built from the
    basis words, so that 1 + sum_k w_k s_k* s_k lies in the ideal."""
    ctx = system.ctx
    out = []
    for weight, combo in cert.squares:
        poly = ctx.zero()
        for widx, coeff in sorted(combo.items()):
            poly = poly + ctx.monomial(coeff, cert.words[widx])
        out.append((weight, poly))
    return out
