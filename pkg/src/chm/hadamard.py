"""Block-structured Hadamard candidates: assembly, checks, normal forms and moves.

Blocks are indexed W=0, X=1, Y=2, Z=3.  In the 4 x 4 block grid the symbol at
(i, k) is i XOR k, column k carries the action (TAU, a, b, ab) and the sign
comes from the (r, s, t) table below.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Action, IOTA, TAU, apply_action, row_from_text, row_sum, row_to_text, sign_row
from .decompositions import Decomposition

ADMISSIBLE_RST = ((1, 1, 1), (1, 1, 0), (1, 0, 0), (0, 1, 0))
BLOCK_NAMES = "WXYZ"


def _pm(e: int) -> int:
    return -1 if e % 2 else 1


def sign_grid(r: int, s: int, t: int) -> np.ndarray:
    return np.array(
        [
            [1, 1, 1, 1],
            [1, _pm(r), 1, _pm(r)],
            [1, _pm(t), _pm(s), _pm(s + t)],
            [1, _pm(r + t), _pm(s), _pm(r + s + t)],
        ],
        dtype=np.int64,
    )


# Williamson array, form (i); the same signs are used by form (ii)
FORM_I_SIGNS = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, -1, -1, 1], [1, 1, -1, -1]], dtype=np.int64)
SYMBOL_GRID = np.array([[i ^ k for k in range(4)] for i in range(4)])


@dataclass(frozen=True)
class StructureParams:
    a: Action
    b: Action
    r: int
    s: int
    t: int

    def __post_init__(self):
        if (self.r, self.s, self.t) not in ADMISSIBLE_RST:
            raise ValueError(f"(r,s,t)=({self.r},{self.s},{self.t}) is not admissible")

    @property
    def ab(self) -> Action:
        return self.a * self.b

    @property
    def column_actions(self) -> tuple:
        return (TAU, self.a, self.b, self.ab)

    @property
    def rst(self) -> tuple:
        return (self.r, self.s, self.t)

    @property
    def group_label(self) -> str:
        return f"L{self.r}{self.s}{self.t}"

    @property
    def name(self) -> str:
        return f"{self.group_label}-{self.a.value}{self.b.value}"

    def signs(self) -> np.ndarray:
        return sign_grid(self.r, self.s, self.t)

    def __str__(self) -> str:
        return f"{self.group_label}({self.a},{self.b})"

    @classmethod
    def parse(cls, name: str) -> "StructureParams":
        """Parse names like 'L111-ti'."""
        try:
            label, acts = name.strip().split("-")
            r, s, t = (int(c) for c in label[1:])
            return cls(Action.parse(acts[0]), Action.parse(acts[1]), r, s, t)
        except (ValueError, IndexError) as exc:
            raise ValueError(f"bad cell name {name!r}") from exc


ALL_CELLS = tuple(
    StructureParams(a, b, *rst) for rst in ((1, 1, 1), (1, 0, 0), (0, 1, 0), (1, 1, 0)) for a in (TAU, IOTA) for b in (TAU, IOTA)
)


@dataclass(eq=False)
class CandidateQuad:
    rows: np.ndarray  # (4, p) int8
    params: StructureParams
    p: int = field(init=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int8)
        if rows.ndim != 2 or rows.shape[0] != 4:
            raise ValueError("a candidate needs four first rows")
        for r in rows:
            sign_row(r)
        self.rows = rows
        self.p = rows.shape[1]

    @classmethod
    def from_rows(cls, w0, x0, y0, z0, params: StructureParams) -> "CandidateQuad":
        return cls(np.stack([sign_row(w0), sign_row(x0), sign_row(y0), sign_row(z0)]), params)

    @property
    def decomposition(self) -> Decomposition:
        return Decomposition(*(row_sum(r) for r in self.rows))

    def row_texts(self) -> list[str]:
        return [row_to_text(r) for r in self.rows]

    @classmethod
    def from_texts(cls, texts, params: StructureParams) -> "CandidateQuad":
        return cls(np.stack([row_from_text(t) for t in texts]), params)

    def same_as(self, other: "CandidateQuad") -> bool:
        return self.params == other.params and np.array_equal(self.rows, other.rows)

    def __repr__(self) -> str:
        return f"CandidateQuad({self.params.name}, {' '.join(self.row_texts())})"


def assemble(q: CandidateQuad) -> np.ndarray:
    sg = q.params.signs()
    acts = q.params.column_actions
    blocks = [[sg[i, k] * apply_action(q.rows[i ^ k], acts[k]) for k in range(4)] for i in range(4)]
    return np.block(blocks).astype(np.int8)


def is_hadamard(H) -> bool:
    H = np.asarray(H, dtype=np.int64)
    n = H.shape[0]
    if H.shape != (n, n) or not np.all(np.abs(H) == 1):
        return False
    return bool(np.array_equal(H @ H.T, n * np.eye(n, dtype=np.int64)))


# ---------------------------------------------------------------------------
# permutation helpers


def back_diagonal(p: int) -> np.ndarray:
    return np.eye(p, dtype=np.int64)[::-1]


def cycle_matrix(p: int) -> np.ndarray:
    """Row-acting permutation matrix of the p-cycle: (Q M)[i] = M[i+1]."""
    Q = np.zeros((p, p), dtype=np.int64)
    Q[np.arange(p), (np.arange(p) + 1) % p] = 1
    return Q


def block_diag(*mats) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=np.int64)
    o = 0
    for m in mats:
        k = m.shape[0]
        out[o : o + k, o : o + k] = m
        o += k
    return out


def block_permutation(perm, p: int) -> np.ndarray:
    """S' (x) I_p where the 4 x 4 permutation matrix S' has S'[perm[i], i] = 1."""
    S = np.zeros((4, 4), dtype=np.int64)
    for i, j in enumerate(perm):
        S[j, i] = 1
    return np.kron(S, np.eye(p, dtype=np.int64))


def to_williamson_form(q: CandidateQuad) -> np.ndarray:
    if q.params != StructureParams(TAU, TAU, 1, 1, 1):
        raise ValueError("to_williamson_form needs the L111 (tau,tau) cell")
    p = q.p
    P, Q = back_diagonal(p), cycle_matrix(p)
    L = block_diag(P, P, P, P)
    R = block_diag(Q, Q, Q, Q)
    H = assemble(q).astype(np.int64)
    return (L @ H @ R.T).astype(np.int8)


# (a, b) -> (blocks of L as 'P'/'Q', block transposition S')
# checked exhaustively over all 16 L patterns and 24 block permutations:
# each action pair has exactly one working choice
_ITO_SETUP = {
    (IOTA, IOTA): ("PQQP", (0, 3, 2, 1)),
    (TAU, IOTA): ("PPQQ", (0, 1, 3, 2)),
    (IOTA, TAU): ("PQPQ", (0, 2, 1, 3)),
}


def to_ito_form(q: CandidateQuad) -> np.ndarray:
    """S L H^T R^T S^T with R = I_4 (x) Q and S = S' (x) I_p."""
    key = (q.params.a, q.params.b)
    if q.params.rst != (1, 1, 1) or key not in _ITO_SETUP:
        raise ValueError("to_ito_form needs an L111 cell other than (tau,tau)")
    p = q.p
    P, Q = back_diagonal(p), cycle_matrix(p)
    pattern, perm = _ITO_SETUP[key]
    L = block_diag(*[P if c == "P" else Q for c in pattern])
    R = np.kron(np.eye(4, dtype=np.int64), Q)
    S = block_permutation(perm, p)
    H = assemble(q).astype(np.int64)
    return (S @ L @ H.T @ R.T @ S.T).astype(np.int8)


def _blocks(H) -> list[list[np.ndarray]]:
    H = np.asarray(H)
    n = H.shape[0]
    if n % 4:
        raise ValueError("order must be divisible by 4")
    m = n // 4
    return [[H[i * m : (i + 1) * m, k * m : (k + 1) * m] for k in range(4)] for i in range(4)]


def _is_circulant(M) -> bool:
    first = M[0]
    m = len(first)
    idx = (np.arange(m)[None, :] - np.arange(m)[:, None]) % m
    return bool(np.array_equal(M, first[idx]))


def _match_form(H, transposed_rows, circulant: bool) -> bool:
    B = _blocks(H)
    base = [B[0][k] for k in range(4)]  # W, X, Y, Z read off the first block row
    for i in range(4):
        for k in range(4):
            want = FORM_I_SIGNS[i, k] * base[i ^ k]
            if i in transposed_rows:
                want = want.T
            if not np.array_equal(B[i][k], want):
                return False
    if circulant and not all(_is_circulant(U) for U in base):
        return False
    return True


def match_form_i(H, circulant: bool = False) -> bool:
    """Williamson array: blocks follow the symbol grid and sign table of form (i)."""
    return _match_form(H, (), circulant)


def match_form_ii(H, circulant: bool = False) -> bool:
    """Ito array: as form (i) but the blocks of the last two block rows are transposed."""
    return _match_form(H, (2, 3), circulant)


# ---------------------------------------------------------------------------
# equivalence moves on candidates


def _quad(rows, params) -> CandidateQuad:
    return CandidateQuad(np.stack(rows), params)


def _with(params: StructureParams, a=None, b=None, rst=None) -> StructureParams:
    r, s, t = rst if rst is not None else params.rst
    return StructureParams(a if a is not None else params.a, b if b is not None else params.b, r, s, t)


def move_ids(params: StructureParams) -> list[str]:
    """Names of the moves applicable to a cell."""
    ids = ["a:yzwx", "a:xwzy", "a:zyxw"]
    ids += [f"a:sign{''.join('+' if v > 0 else '-' for v in sg)}" for sg in _EVEN_SIGNS[1:]]
    if params.rst == (1, 1, 1):
        ids += ["b:wyzx", "b:wzxy", "b:-wyxz", "b:-wzyx", "b:wyx-z", "b:wzy-x"]
    if params.rst == (0, 1, 0):
        ids += ["c:010-100", "c:010-110"]
    if params.rst == (1, 0, 0):
        ids += ["c:100-010"]
    if params.rst == (1, 1, 0):
        ids += ["c:110-100"]
        if (params.a, params.b) in ((TAU, IOTA), (IOTA, TAU)):
            ids += ["d:swap"]
    return ids


_EVEN_SIGNS = [
    (a, b, c, a * b * c) for a in (1, -1) for b in (1, -1) for c in (1, -1)
]


def apply_equivalence_moves(q: CandidateQuad, move_id: str) -> CandidateQuad:
    """Apply one named move; the result assembles to an equivalent matrix."""
    Wr, Xr, Yr, Zr = q.rows
    pa = q.params
    a, b, ab = pa.a, pa.b, pa.ab
    if move_id not in move_ids(pa):
        raise ValueError(f"move {move_id!r} does not apply to {pa}")
    if move_id == "a:yzwx":
        return _quad((Yr, Zr, Wr, Xr), pa)
    if move_id == "a:xwzy":
        return _quad((Xr, Wr, Zr, Yr), pa)
    if move_id == "a:zyxw":
        return _quad((Zr, Yr, Xr, Wr), pa)
    if move_id.startswith("a:sign"):
        sg = [1 if c == "+" else -1 for c in move_id[6:]]
        return _quad(tuple(s * r for s, r in zip(sg, q.rows)), pa)
    if move_id == "b:wyzx":
        return _quad((Wr, Yr, Zr, Xr), _with(pa, b, ab))
    if move_id == "b:wzxy":
        return _quad((Wr, Zr, Xr, Yr), _with(pa, ab, a))
    if move_id == "b:-wyxz":
        return _quad((-Wr, Yr, Xr, Zr), _with(pa, b, a))
    if move_id == "b:-wzyx":
        return _quad((-Wr, Zr, Yr, Xr), _with(pa, ab, b))
    if move_id == "b:wyx-z":
        return _quad((Wr, Yr, Xr, -Zr), _with(pa, b, a))
    if move_id == "b:wzy-x":
        return _quad((Wr, Zr, Yr, -Xr), _with(pa, ab, b))
    if move_id == "c:010-100":
        return _quad((Wr, Yr, Xr, Zr), _with(pa, b, a, (1, 0, 0)))
    if move_id == "c:100-010":
        return _quad((Wr, Yr, Xr, Zr), _with(pa, b, a, (0, 1, 0)))
    if move_id == "c:010-110":
        return _quad((Wr, -Yr, -Zr, -Xr), _with(pa, b, ab, (1, 1, 0)))
    if move_id == "c:110-100":
        return _quad((Wr, -Xr, -Zr, -Yr), _with(pa, a, ab, (1, 0, 0)))
    if move_id == "d:swap":
        return _quad((Wr, Yr, Xr, Zr), _with(pa, b, a))
    raise ValueError(move_id)


def index_map_move(q: CandidateQuad, mult: int, shift: int) -> CandidateQuad:
    """Replace every first row u by u[mult*m + shift]; a row/column permutation of the assembly."""
    p = q.p
    if mult % p == 0:
        raise ValueError("multiplier must be a unit mod p")
    idx = (mult * np.arange(p) + shift) % p
    return CandidateQuad(q.rows[:, idx], q.params)


# ---------------------------------------------------------------------------
# matrix files


def write_matrix(H, path) -> None:
    H = np.asarray(H)
    with open(path, "w") as fh:
        fh.write(f"order {H.shape[0]}\n")
        for row in H:
            fh.write(row_to_text(row) + "\n")


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("order"):
        raise ValueError(f"{path}: missing 'order n' header")
    try:
        n = int(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: bad header {lines[0]!r}") from exc
    rows = lines[1:]
    if len(rows) != n:
        raise ValueError(f"{path}: expected {n} rows, found {len(rows)}")
    H = np.stack([row_from_text(r) for r in rows])
    if H.shape != (n, n):
        raise ValueError(f"{path}: matrix is not {n} x {n}")
    return H
