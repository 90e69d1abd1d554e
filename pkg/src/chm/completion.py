"""Linear constraints on the fourth first row and their exact ±1 solutions.

The off-diagonal p x p blocks of H H^T each contain the unknown block Z
exactly twice, once in each factor's row, so every one of them is linear
in z0.  ``build_system`` derives those equations by expanding the assembled
matrix symbolically; nothing about their shape is hard coded.  The closed
form used by the batch checker, and a literal transcription of the
published equation lines, are both tested against the generated system.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import IOTA, TAU, Action, apply_action, row_to_text
from .hadamard import StructureParams

MAX_FREE = 20


class SolverLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class IndexMap:
    """l -> l (plain) or l -> (p - l) mod p (reversed)."""

    kind: str

    def __call__(self, l: int, p: int) -> int:
        return l % p if self.kind == "plain" else (-l) % p

    @classmethod
    def of(cls, action: Action, hat: bool = False) -> "IndexMap":
        # l^tau = l^(iota hat) = l, l^iota = l^(tau hat) = p - l
        plain = (action is TAU) != hat
        return cls("plain" if plain else "reversed")


@dataclass(frozen=True)
class Equation:
    coeffs: tuple
    rhs: int
    tag: tuple  # (i, j, lag) for block-pair equations, ("rowsum",) for the sum equation

    def residual(self, z0) -> int:
        return int(np.dot(np.asarray(self.coeffs, dtype=np.int64), np.asarray(z0, dtype=np.int64))) - self.rhs

    def is_zero(self) -> bool:
        return not any(self.coeffs)


@dataclass
class LinearSystem:
    p: int
    equations: list = field(default_factory=list)

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        A = np.array([e.coeffs for e in self.equations], dtype=np.int64).reshape(-1, self.p)
        b = np.array([e.rhs for e in self.equations], dtype=np.int64)
        return A, b

    def satisfied_by(self, z0) -> bool:
        return all(e.residual(z0) == 0 for e in self.equations)

    def nonzero(self) -> "LinearSystem":
        """Drop 0 = 0 rows; rows 0 = c with c != 0 are kept (they make the system infeasible)."""
        return LinearSystem(self.p, [e for e in self.equations if not e.is_zero() or e.rhs != 0])


# ---------------------------------------------------------------------------
# generation by symbolic expansion


def _symbolic_assembly(rows3, params: StructureParams):
    """Assembly of H with Z left symbolic.

    Returns (const, var, sign): const holds the known entries (0 where Z
    sits), var holds the index m of z0[m] at Z positions (-1 elsewhere) and
    sign the block sign at Z positions.
    """
    p = len(rows3[0])
    sg = params.signs()
    acts = params.column_actions
    idx_row = np.arange(p)
    const = np.zeros((4 * p, 4 * p), dtype=np.int64)
    var = np.full((4 * p, 4 * p), -1, dtype=np.int64)
    sign = np.zeros((4 * p, 4 * p), dtype=np.int64)
    for i in range(4):
        for k in range(4):
            sym = i ^ k
            rs, cs = slice(i * p, (i + 1) * p), slice(k * p, (k + 1) * p)
            if sym == 3:
                var[rs, cs] = apply_action(idx_row, acts[k])
                sign[rs, cs] = sg[i, k]
            else:
                const[rs, cs] = sg[i, k] * apply_action(np.asarray(rows3[sym], dtype=np.int64), acts[k])
    return const, var, sign


def _expand_row_product(const, var, sign, r1, r2, p):
    """<H[r1], H[r2]> as (coeffs on z0, constant, has_quadratic)."""
    coeffs = np.zeros(p, dtype=np.int64)
    c1, c2 = const[r1], const[r2]
    v1, v2 = var[r1], var[r2]
    s1, s2 = sign[r1], sign[r2]
    known = (v1 < 0) & (v2 < 0)
    constant = int((c1[known] * c2[known]).sum())
    m1 = (v1 >= 0) & (v2 < 0)
    np.add.at(coeffs, v1[m1], s1[m1] * c2[m1])
    m2 = (v2 >= 0) & (v1 < 0)
    np.add.at(coeffs, v2[m2], s2[m2] * c1[m2])
    quadratic = bool(((v1 >= 0) & (v2 >= 0)).any())
    return coeffs, constant, quadratic


def build_system(w0, x0, y0, z: int, a: Action, b: Action, r: int, s: int, t: int) -> LinearSystem:
    params = StructureParams(a, b, r, s, t)
    return build_system_for(np.stack([w0, x0, y0]), z, params)


def build_system_for(rows3, z: int, params: StructureParams) -> LinearSystem:
    rows3 = [np.asarray(u, dtype=np.int64) for u in rows3]
    p = len(rows3[0])
    const, var, sign = _symbolic_assembly(rows3, params)
    eqs = []
    for i in range(4):
        for j in range(i + 1, 4):
            for c in range(p):
                coeffs, constant, quad = _expand_row_product(const, var, sign, i * p, j * p + c, p)
                if quad:  # never happens for i != j; guarded so a wrong grid fails loudly
                    raise AssertionError(f"block ({i},{j}) is not linear in Z")
                eqs.append(Equation(tuple(int(v) for v in coeffs), -constant, (i, j, c)))
    eqs.append(Equation(tuple([1] * p), int(z), ("rowsum",)))
    return LinearSystem(p, eqs)


# ---------------------------------------------------------------------------
# closed form of the same equations


def block_equation_rows(rows3, params: StructureParams, i: int, j: int):
    """Closed-form coefficients and right-hand sides of block (i, j), i < j.

    With k1 = i^3, k2 = j^3 and V = u_{i^j^3}:
    coef_c[m] = s1 V[m + e1 c] + s2 V[m - e2 c] where s_k is the product of the
    two block signs in column k and e_k = +1 for TAU, -1 for IOTA.
    The right-hand side collects the correlations of the two other columns.
    """
    rows = [np.asarray(u, dtype=np.int64) for u in rows3]
    p = len(rows[0])
    sg = params.signs()
    eps = [act.sign for act in params.column_actions]
    k1, k2 = i ^ 3, j ^ 3
    V = rows[i ^ j ^ 3]
    s1 = sg[i, k1] * sg[j, k1]
    s2 = sg[i, k2] * sg[j, k2]
    m = np.arange(p)
    coef = np.empty((p, p), dtype=np.int64)
    rhs = np.empty(p, dtype=np.int64)
    for c in range(p):
        coef[c] = s1 * V[(m + eps[k1] * c) % p] + s2 * V[(m - eps[k2] * c) % p]
        total = 0
        for k in range(4):
            if k in (k1, k2):
                continue
            u, v = rows[i ^ k], rows[j ^ k]
            total += sg[i, k] * sg[j, k] * int(u @ v[(m + eps[k] * c) % p])
        rhs[c] = -total
    return coef, rhs


def closed_form_system(rows3, z: int, params: StructureParams) -> LinearSystem:
    p = len(rows3[0])
    eqs = []
    for i in range(4):
        for j in range(i + 1, 4):
            coef, rhs = block_equation_rows(rows3, params, i, j)
            for c in range(p):
                eqs.append(Equation(tuple(int(v) for v in coef[c]), int(rhs[c]), (i, j, c)))
    eqs.append(Equation(tuple([1] * p), int(z), ("rowsum",)))
    return LinearSystem(p, eqs)


def pure_blocks(params: StructureParams) -> list[tuple[int, int]]:
    """Block pairs whose coefficient on z0 vanishes identically for this cell."""
    sg = params.signs()
    eps = [act.sign for act in params.column_actions]
    out = []
    for i in range(4):
        for j in range(i + 1, 4):
            k1, k2 = i ^ 3, j ^ 3
            s1 = sg[i, k1] * sg[j, k1]
            s2 = sg[i, k2] * sg[j, k2]
            if s1 == -s2 and eps[k1] == -eps[k2]:
                out.append((i, j))
    return out


# ---------------------------------------------------------------------------
# literal transcription of the published equation lines


def _shifted(u, l):
    """Row l of the back-circulant block with first row u."""
    u = np.asarray(u, dtype=np.int64)
    p = len(u)
    return u[(np.arange(p) + l) % p]


TRANSCRIBED_LINES = ("eq4", "eq5.1", "eq5.2", "eq5.3", "eq5.4", "eq5.5", "eq5.6")


def transcribed_equations(rows3, params: StructureParams, line: str, l: int):
    """Coefficient vector and right-hand side of one published line at index l."""
    w0, x0, y0 = (np.asarray(u, dtype=np.int64) for u in rows3)
    p = len(w0)
    a, b, ab = params.a, params.b, params.ab
    r, s, t = params.rst

    def sg(e):
        return -1 if e % 2 else 1

    def at(act, hat=False):
        return IndexMap.of(act, hat)(l, p)

    y, x, w = (lambda k: _shifted(y0, k)), (lambda k: _shifted(x0, k)), (lambda k: _shifted(w0, k))
    rev = (-l) % p
    if line == "eq4":
        return y(at(b, True)) + sg(r) * y(at(ab)), -int(w0 @ (x(l) - sg(r) * x(at(a, True))))
    if line == "eq5.1":
        return y(at(b, True)) + sg(r) * y(at(ab)), -int(w0 @ (x(l) + sg(r) * x(at(a, True))))
    if line == "eq5.2":
        return sg(t) * x(at(a, True)) + sg(s + t) * x(at(ab)), -int(w0 @ (y(l) + sg(s) * y(at(b, True))))
    if line == "eq5.3":
        return w(rev) + sg(r + s + t) * w(at(ab)), -int(x0 @ (sg(r + t) * y(at(a)) + sg(s) * y(at(b, True))))
    if line == "eq5.4":
        return sg(r + t) * w(at(a, True)) + sg(s) * w(at(b)), -int(x0 @ (y(l) + sg(r + s + t) * y(at(ab, True))))
    if line == "eq5.5":
        return x(rev) + sg(s) * x(at(b)), -int(w0 @ (sg(t) * y(at(a)) + sg(s + t) * y(at(ab, True))))
    if line == "eq5.6":
        return y(rev) + sg(r) * y(at(a)), -int(w0 @ (x(at(b)) + sg(r) * x(at(ab, True))))
    raise ValueError(line)


def match_transcription(rows3, params: StructureParams) -> dict:
    """For every published line, the generated block pairs it coincides with.

    A line matches a block pair when, for every l, its (coefficients, rhs)
    equals some lag equation of that pair up to an overall sign.
    """
    p = len(rows3[0])
    system = build_system_for(rows3, 0, params)
    fam = {}
    for e in system.equations:
        if e.tag[0] == "rowsum":
            continue
        fam.setdefault(e.tag[:2], set()).add((e.coeffs, e.rhs))
    out = {}
    for line in TRANSCRIBED_LINES:
        hits = []
        for pair, eqset in fam.items():
            ok = True
            for l in range(p):
                coef, rhs = transcribed_equations(rows3, params, line, l)
                c = tuple(int(v) for v in coef)
                neg = tuple(-v for v in c)
                if (c, int(rhs)) not in eqset and (neg, -int(rhs)) not in eqset:
                    ok = False
                    break
            if ok:
                hits.append(pair)
        out[line] = hits
    return out


# ---------------------------------------------------------------------------
# exact solving


def bareiss_echelon(A, b):
    """Fraction-free row echelon form of [A | b] over the integers.

    Returns (rows, pivots, consistent) with rows as lists of Python ints.
    """
    M = [list(map(int, row)) + [int(rhs)] for row, rhs in zip(A, b)]
    n_rows = len(M)
    n_cols = len(M[0]) - 1 if M else 0
    pivots = []
    prev = 1
    r = 0
    for c in range(n_cols):
        piv = None
        for k in range(r, n_rows):
            if M[k][c] != 0:
                piv = k
                break
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pr = M[r]
        for k in range(r + 1, n_rows):
            rk = M[k]
            f = rk[c]
            pc = pr[c]
            for j in range(c, n_cols + 1):
                rk[j] = (pc * rk[j] - f * pr[j]) // prev
        prev = pr[c]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    consistent = all(M[k][n_cols] == 0 for k in range(r, n_rows))
    return M[:r], pivots, consistent


def solve_pm1(system: LinearSystem, p: int | None = None, max_free: int = MAX_FREE) -> list[np.ndarray]:
    """All z0 in {+1,-1}^p satisfying every equation, by exact elimination.

    Free coordinates of the echelon form are enumerated over ±1 and the pivot
    coordinates recovered by back substitution with an exactness and ±1 test.
    """
    p = system.p if p is None else p
    if not system.equations:
        A = np.zeros((0, p), dtype=np.int64)
        b = np.zeros(0, dtype=np.int64)
    else:
        A, b = system.matrix()
    if len(A) == 0:
        rows, pivots, consistent = [], [], True
    else:
        rows, pivots, consistent = bareiss_echelon(A, b)
    if not consistent:
        return []
    free = [c for c in range(p) if c not in set(pivots)]
    if len(free) > max_free:
        raise SolverLimitError(f"{len(free)} free coordinates exceed the cap of {max_free}")
    n = 1 << len(free)
    Z = np.zeros((n, p), dtype=object)
    for k, c in enumerate(free):
        Z[:, c] = [1 if (m >> k) & 1 == 0 else -1 for m in range(n)]
    alive = np.ones(n, dtype=bool)
    for row, c in reversed(list(zip(rows, pivots))):
        acc = np.full(n, row[p], dtype=object)
        for j in range(c + 1, p):
            if row[j]:
                acc = acc - row[j] * Z[:, j]
        piv = row[c]
        vals = np.empty(n, dtype=object)
        for m in np.nonzero(alive)[0]:
            v = acc[m]
            if v == piv:
                vals[m] = 1
            elif v == -piv:
                vals[m] = -1
            else:
                alive[m] = False
                vals[m] = 0
        vals[~alive] = 0
        Z[:, c] = vals
        if not alive.any():
            return []
    out = [np.array(Z[m], dtype=np.int8) for m in np.nonzero(alive)[0]]
    out.sort(key=lambda v: tuple(-v))
    return out


def brute_force_completions(rows3, z: int, params: StructureParams) -> list[np.ndarray]:
    """Reference: every z0 with row sum z satisfying the generated system."""
    system = build_system_for(rows3, z, params)
    A, b = system.matrix()
    p = len(rows3[0])
    cand = np.array(list(itertools.product((1, -1), repeat=p)), dtype=np.int64)
    ok = np.all(cand @ A.T == b[None, :], axis=1)
    out = [c.astype(np.int8) for c in cand[ok]]
    out.sort(key=lambda v: tuple(-v))
    return out


# ---------------------------------------------------------------------------
# human readable dump


def dump_system(rows3, z: int, params: StructureParams) -> str:
    system = build_system_for(rows3, z, params)
    closed = closed_form_system(rows3, z, params)
    matches = match_transcription(rows3, params)
    p = system.p
    lines = [
        f"# cell {params.name}  p={p}  z={z}",
        f"# w0 {row_to_text(rows3[0])}  x0 {row_to_text(rows3[1])}  y0 {row_to_text(rows3[2])}",
        f"# generated equations: {len(system.equations)}; closed form agrees: "
        f"{[e.coeffs for e in system.equations] == [e.coeffs for e in closed.equations] and [e.rhs for e in system.equations] == [e.rhs for e in closed.equations]}",
        f"# blocks with vanishing z0 coefficients: {pure_blocks(params)}",
    ]
    for line, hits in matches.items():
        lines.append(f"# published line {line}: {'matches block ' + ', '.join(map(str, hits)) if hits else 'no generated block'}")
    for e in system.equations:
        tag = "rowsum" if e.tag[0] == "rowsum" else f"block({e.tag[0]},{e.tag[1]}) lag {e.tag[2]}"
        coeffs = " ".join(f"{v:+d}" for v in e.coeffs)
        lines.append(f"{tag:<22} [{coeffs}] . z0 = {e.rhs}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# batch checks used by the indexed search


@lru_cache(maxsize=None)
def _shift_index(p: int) -> np.ndarray:
    return (np.arange(p)[:, None] + np.arange(p)[None, :]) % p


def correlation_table(A, B) -> np.ndarray:
    """T[a, b, l] = sum_m A[a, m] B[b, (m + l) mod p] for all row pairs."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    p = A.shape[1]
    out = np.empty((A.shape[0], B.shape[0], p), dtype=np.int8)
    for l in range(p):
        out[:, :, l] = np.rint(A @ np.roll(B, -l, axis=1).T).astype(np.int8)
    return out


class BatchChecker:
    """Evaluates the generated equations for many (W, X, Y, Z) index tuples at once.

    ``sets`` are the four row arrays; ``tables[(A, B)]`` for A < B are the
    correlation tables between the row sets of blocks A and B.  Equations are
    tested one block pair at a time so most candidates are rejected after the
    first pair.
    """

    def __init__(self, p: int, tables: dict):
        self.p = p
        self.tables = tables
        self.neg = (-np.arange(p)) % p

    def _corr(self, A, B, idx, eps):
        # corr(u_A, u_B, eps * c) for c = 0..p-1
        if A < B:
            T = self.tables[(A, B)][idx[A], idx[B]]
            return T if eps == 1 else T[:, self.neg]
        T = self.tables[(B, A)][idx[B], idx[A]]
        return T[:, self.neg] if eps == 1 else T

    def check(self, idx, params: StructureParams, order=None) -> np.ndarray:
        """Boolean mask of tuples satisfying every off-diagonal block equation."""
        n = len(idx[1])
        sg = params.signs()
        eps = [act.sign for act in params.column_actions]
        alive = np.arange(n)
        pairs = order or [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)]
        for i, j in pairs:
            if len(alive) == 0:
                break
            sub = [ix[alive] if np.ndim(ix) else ix for ix in idx]
            sub = [np.broadcast_to(s, (len(alive),)) for s in sub]
            E = np.zeros((len(alive), self.p), dtype=np.int16)
            for k in range(4):
                E += int(sg[i, k] * sg[j, k]) * self._corr(i ^ k, j ^ k, sub, eps[k]).astype(np.int16)
            alive = alive[~E.any(axis=1)]
        mask = np.zeros(n, dtype=bool)
        mask[alive] = True
        return mask
