"""Hadamard equivalence via canonical labeling of a signed bipartite graph.

A ±1 matrix H of order n becomes a graph on 4n vertices: r_i^+, r_i^- for
rows and c_j^+, c_j^- for columns, with r_i^e -- c_j^d whenever e*d*H[i,j] = 1,
plus the pairing r_i^+ -- r_i^- and c_j^+ -- c_j^-.  Two matrices are
equivalent under signed row and column permutations iff their graphs are
isomorphic by a map respecting rows, columns and pairs.

The labeling is computed by individualization-refinement.  Colors are
refined by counting colored neighbours until stable; the search branches
on the first non-singleton cell and prunes with the refinement
trace, with automorphisms found at equal leaves, and by jumping back once
a subtree is known to be a copy of one already explored.

Hadamard matrices are regular up to triples of rows, so plain neighbour
counting never splits anything at the root.  Row pairs and column pairs
are therefore colored by their 4-row profile: for the pair (i, j) the
histogram over all pairs (k, l) of |sum_c H_ic H_jc H_kc H_lc|.  These
edge colors enter the refinement as extra weighted adjacency.
"""
from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

MAX_ORDER = 128
_SEED = 0x5EED


def _as_sign_matrix(H) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.abs(H) == 1):
        raise ValueError("entries must be +1 or -1")
    if H.shape[0] > MAX_ORDER:
        raise ValueError(f"order {H.shape[0]} exceeds the supported bound {MAX_ORDER}")
    return H.astype(np.int8)


def pair_profile_histograms(H) -> np.ndarray:
    """(n*n, n+1) histogram of 4-row profiles for every ordered row pair.

    Entry [i*n + j, v] counts ordered pairs (k, l) with |<H_i*H_j, H_k*H_l>| = v.
    Products are symmetric in the pair and constant on the diagonal, so only
    unordered pairs k < l are correlated and the rest is filled in.
    """
    H = np.asarray(H, dtype=np.float32)
    n = H.shape[0]
    iu, ju = np.triu_indices(n, 1)
    prods = H[iu] * H[ju]
    m = len(iu)
    sums = np.abs(prods.sum(axis=1)).astype(np.int64)
    half = np.zeros((m, n + 1), dtype=np.int64)
    step = max(1, 4_000_000 // max(m, 1))
    for s in range(0, m, step):
        G = np.abs(prods[s : s + step] @ prods.T).astype(np.int64)
        G += (n + 1) * np.arange(G.shape[0])[:, None]
        half[s : s + step] = np.bincount(G.ravel(), minlength=G.shape[0] * (n + 1)).reshape(G.shape[0], n + 1)
    half *= 2
    half[np.arange(m), sums] += n
    out = np.zeros((n * n, n + 1), dtype=np.int32)
    out[iu * n + ju] = half
    out[ju * n + iu] = half
    diag = 2 * np.bincount(sums, minlength=n + 1)
    diag[n] += n
    out[np.arange(n) * (n + 1)] = diag
    return out


def _pair_profile_histograms_direct(H) -> np.ndarray:
    H = np.asarray(H, dtype=np.float32)
    n = H.shape[0]
    prods = (H[:, None, :] * H[None, :, :]).reshape(n * n, n)
    G = np.abs(prods @ prods.T).astype(np.int64)
    G += (n + 1) * np.arange(n * n)[:, None]
    return np.bincount(G.ravel(), minlength=n * n * (n + 1)).reshape(n * n, n + 1).astype(np.int32)


def _pair_colors(H):
    hist = np.ascontiguousarray(pair_profile_histograms(H))
    # dedupe on raw bytes first, then order the few distinct rows lexicographically
    flat = hist.view(np.dtype((np.void, hist.dtype.itemsize * hist.shape[1]))).ravel()
    _, first, inv1 = np.unique(flat, return_index=True, return_inverse=True)
    uniq, inv2 = np.unique(hist[first], axis=0, return_inverse=True)
    inv = inv2.ravel()[inv1.ravel()]
    return inv.reshape(H.shape[0], H.shape[0]), uniq


@dataclass
class Leaf:
    trace: tuple
    cert: bytes
    rows: np.ndarray
    row_signs: np.ndarray
    cols: np.ndarray
    col_signs: np.ndarray
    path: list


class Labeler:
    """One canonical-labeling run on a fixed matrix."""

    def __init__(self, H, use_pair_profiles: bool = True):
        H = _as_sign_matrix(H)
        self.H = H
        n = H.shape[0]
        self.n = n
        N = 4 * n
        self.N = N
        rng = np.random.default_rng(_SEED)
        P = H > 0
        A = np.zeros((N, N), dtype=np.float64)
        bip = float(rng.integers(1, 1 << 20))
        A[:n, 2 * n : 3 * n] = P
        A[:n, 3 * n :] = ~P
        A[n : 2 * n, 2 * n : 3 * n] = ~P
        A[n : 2 * n, 3 * n :] = P
        A *= bip
        A = A + A.T
        if use_pair_profiles:
            rc, ru = _pair_colors(H)
            cc, cu = _pair_colors(H.T)
            table = np.unique(np.concatenate([ru, cu]), axis=0)
            lookup = {row.tobytes(): k for k, row in enumerate(table)}
            rmap = np.array([lookup[row.tobytes()] for row in ru])
            cmap = np.array([lookup[row.tobytes()] for row in cu])
            w_row = rng.integers(1, 1 << 20, size=len(table)).astype(np.float64)
            w_col = rng.integers(1, 1 << 20, size=len(table)).astype(np.float64)
            Rw = w_row[rmap[rc]]
            Cw = w_col[cmap[cc]]
            np.fill_diagonal(Rw, 0.0)
            np.fill_diagonal(Cw, 0.0)
            A[: 2 * n, : 2 * n] += np.block([[Rw, Rw], [Rw, Rw]])
            A[2 * n :, 2 * n :] += np.block([[Cw, Cw], [Cw, Cw]])
        self.A = A
        self.hash_vectors = rng.integers(1, 1 << 20, size=(N, 2)).astype(np.float64)
        self.partner = np.concatenate(
            [np.arange(n, 2 * n), np.arange(n), np.arange(3 * n, 4 * n), np.arange(2 * n, 3 * n)]
        )
        self.nodes = 0
        self.leaves = 0
        self.autos: list[np.ndarray] = []
        self.best: Leaf | None = None
        self.first: Leaf | None = None
        self.seen: set = set()  # (trace, cert) of every leaf reached

    # -- refinement ---------------------------------------------------------

    def refine(self, colors: np.ndarray, k: int):
        """Refine to an equitable partition; colors are ranks, split cells stay in place."""
        N = self.N
        trace = []
        while True:
            h = self.A @ self.hash_vectors[colors]
            pc = colors[self.partner]
            order = np.lexsort((h[:, 1], h[:, 0], pc, colors))
            cs, ps, hs = colors[order], pc[order], h[order]
            new = np.empty(N, dtype=bool)
            new[0] = True
            new[1:] = (cs[1:] != cs[:-1]) | (ps[1:] != ps[:-1]) | (hs[1:, 0] != hs[:-1, 0]) | (hs[1:, 1] != hs[:-1, 1])
            ids = np.cumsum(new) - 1
            out = np.empty(N, dtype=np.int64)
            out[order] = ids
            k2 = int(ids[-1]) + 1
            trace.append(hs[new].tobytes())
            trace.append(ps[new].tobytes())
            if k2 == k:
                return out, k, hashlib.blake2b(b"".join(trace), digest_size=16).digest()
            colors, k = out, k2

    @staticmethod
    def individualize(colors: np.ndarray, v: int):
        c = colors.copy()
        cv = colors[v]
        c[colors > cv] += 1
        c[colors == cv] += 1
        c[v] = cv
        return c, int(c.max()) + 1

    def root(self):
        n = self.n
        colors = np.where(np.arange(self.N) < 2 * n, 0, 1)
        return self.refine(colors, 2)

    # -- leaves -------------------------------------------------------------

    def leaf(self, colors: np.ndarray, trace: tuple, path: list) -> Leaf:
        n = self.n
        order = np.argsort(colors)
        rv = order[order < 2 * n]
        cv = order[order >= 2 * n] - 2 * n

        def pick(vs):
            idx = vs % n
            _, first = np.unique(idx, return_index=True)
            first = np.sort(first)
            return idx[first], np.where(vs[first] < n, 1, -1)

        ro, sr = pick(rv)
        co, sc = pick(cv)
        M = sr[:, None] * self.H[np.ix_(ro, co)].astype(np.int64) * sc[None, :]
        return Leaf(trace, np.packbits(M > 0).tobytes(), ro, sr, co, sc, list(path))

    def automorphism(self, l1: Leaf, l2: Leaf) -> np.ndarray:
        n = self.n
        g = np.empty(4 * n, dtype=np.int64)
        s = l1.row_signs * l2.row_signs
        g[l1.rows] = np.where(s > 0, l2.rows, l2.rows + n)
        g[l1.rows + n] = np.where(s > 0, l2.rows + n, l2.rows)
        t = l1.col_signs * l2.col_signs
        g[2 * n + l1.cols] = 2 * n + np.where(t > 0, l2.cols, l2.cols + n)
        g[3 * n + l1.cols] = 2 * n + np.where(t > 0, l2.cols + n, l2.cols)
        return g

    def canonical_matrix(self) -> np.ndarray:
        b = self.best
        return (b.row_signs[:, None] * self.H[np.ix_(b.rows, b.cols)].astype(np.int64) * b.col_signs[None, :]).astype(np.int8)

    # -- search -------------------------------------------------------------

    def _orbit_ids(self, path):
        N = self.N
        if not self.autos:
            return np.arange(N)
        G = np.array(self.autos)
        if path:
            G = G[(G[:, path] == np.array(path)).all(axis=1)]
        if len(G) == 0:
            return np.arange(N)
        src = np.tile(np.arange(N), len(G))
        graph = coo_matrix((np.ones(len(src)), (src, G.ravel())), shape=(N, N))
        _, lab = connected_components(graph, directed=True, connection="weak")
        return lab

    def _consider_leaf(self, lf: Leaf) -> int:
        self.leaves += 1
        self.seen.add((lf.trace, lf.cert))
        depth = len(lf.path)
        if self.first is None:
            self.first = lf
        if self.best is None or (lf.trace, lf.cert) < (self.best.trace, self.best.cert):
            self.best = lf
            return depth
        for ref in (self.first, self.best):
            if lf.cert == ref.cert:
                self.autos.append(self.automorphism(ref, lf))
                d = 0
                while d < depth and lf.path[d] == ref.path[d]:
                    d += 1
                return d
        return depth

    @staticmethod
    def target_cell(colors, k) -> int:
        # first non-singleton cell; on order 20 this explores 2-3x fewer
        # nodes than the first smallest one and is no slower elsewhere
        sizes = np.bincount(colors, minlength=k)
        return int(np.nonzero(sizes > 1)[0][0])

    def search(self, colors, k, path, trace) -> int:
        """Depth-first search; returns the level to resume at (backjump target)."""
        self.nodes += 1
        depth = len(path)
        if k == self.N:
            return self._consider_leaf(self.leaf(colors, trace, path))
        members = np.nonzero(colors == self.target_cell(colors, k))[0]
        explored: list[int] = []
        n_autos = 0
        orbit = np.arange(self.N)
        for v in members.tolist():
            if explored:
                if len(self.autos) != n_autos:
                    orbit = self._orbit_ids(path)
                    n_autos = len(self.autos)
                if orbit[v] in set(orbit[explored].tolist()):
                    continue
            explored.append(v)
            c2, k2 = self.individualize(colors, v)
            c2, k2, t = self.refine(c2, k2)
            tr2 = trace + (t,)
            if self.best is not None and tr2 > self.best.trace[: len(tr2)]:
                continue
            back = self.search(c2, k2, path + [v], tr2)
            if back < depth:
                return back
        return depth

    def run(self, force_search: bool = False, root=None):
        colors, k, t = root if root is not None else self.root()
        if k == self.N and not force_search:
            # refinement alone is discrete: read the labeling off directly
            self.nodes = 1
            self.best = self.leaf(colors, (t,), [])
            self.leaves = 1
            return self
        self.search(colors, k, [], (t,))
        return self


    def first_leaf(self, root) -> tuple:
        """(trace, cert) of the leftmost leaf, without any pruning."""
        colors, k, t = root
        tr = (t,)
        path = []
        while k < self.N:
            v = int(np.nonzero(colors == self.target_cell(colors, k))[0][0])
            colors, k = self.individualize(colors, v)
            colors, k, t = self.refine(colors, k)
            tr += (t,)
            path.append(v)
        lf = self.leaf(colors, tr, path)
        return lf.trace, lf.cert


def matrix_text(M) -> str:
    return "\n".join("".join("+" if v > 0 else "-" for v in row) for row in np.asarray(M))


@dataclass(frozen=True)
class CanonicalKey:
    digest: bytes
    matrix: np.ndarray = field(compare=False, repr=False)

    @property
    def hex(self) -> str:
        return self.digest.hex()

    def __eq__(self, other) -> bool:
        if not isinstance(other, CanonicalKey):
            return NotImplemented
        # digest first, then the full matrix to rule out a collision
        return self.digest == other.digest and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash(self.digest)

    def __lt__(self, other: "CanonicalKey") -> bool:
        return self.digest < other.digest

    def matrix_hex(self) -> str:
        return np.packbits(self.matrix > 0).tobytes().hex()

    @staticmethod
    def matrix_from_hex(text: str, n: int) -> np.ndarray:
        bits = np.unpackbits(np.frombuffer(bytes.fromhex(text), dtype=np.uint8))[: n * n]
        return np.where(bits.reshape(n, n) > 0, 1, -1).astype(np.int8)


def canonical_form(H, force_search: bool = False, use_pair_profiles: bool = True) -> np.ndarray:
    return Labeler(H, use_pair_profiles).run(force_search).canonical_matrix()


def canonical_key(H, force_search: bool = False) -> CanonicalKey:
    M = canonical_form(H, force_search)
    digest = hashlib.sha256(matrix_text(M).encode()).digest()
    return CanonicalKey(digest, M)


class KeyCache:
    """Canonical keys with reuse across equivalent inputs.

    Every leaf (trace, certificate) reached by a full search is remembered
    with the resulting key.  A new matrix first descends to its leftmost
    leaf; if that leaf is already known, the matrix relabels onto a matrix
    of a known class and the key is reused.  Otherwise the full search runs
    and its leaves are added.  Hits are exact, so keys never depend on the
    order of inputs.
    """

    def __init__(self):
        self.leaves: dict = {}  # (trace, cert) -> CanonicalKey
        self.hits = 0
        self.misses = 0

    def key(self, H) -> CanonicalKey:
        lab = Labeler(H)
        root = lab.root()
        probe = lab.first_leaf(root)
        key = self.leaves.get(probe)
        if key is not None:
            self.hits += 1
            return key
        self.misses += 1
        lab.run(root=root)
        M = lab.canonical_matrix()
        key = CanonicalKey(hashlib.sha256(matrix_text(M).encode()).digest(), M)
        lab.seen.add(probe)
        for leaf in lab.seen:
            self.leaves[leaf] = key
        return key


def are_equivalent(H1, H2) -> bool:
    H1, H2 = np.asarray(H1), np.asarray(H2)
    if H1.shape != H2.shape:
        raise ValueError(f"order mismatch: {H1.shape} vs {H2.shape}")
    return canonical_key(H1) == canonical_key(H2)


def random_equivalent(H, rng) -> np.ndarray:
    """A random signed row/column permutation of H."""
    H = np.asarray(H)
    n = H.shape[0]
    P = rng.permutation(n)
    Q = rng.permutation(n)
    s = rng.choice(np.array([-1, 1], dtype=np.int8), n)
    t = rng.choice(np.array([-1, 1], dtype=np.int8), n)
    return (s[:, None] * H[P][:, Q] * t[None, :]).astype(H.dtype)


# ---------------------------------------------------------------------------
# class store


@dataclass
class Occurrence:
    """Where an equivalence class was met: one cell and one signed decomposition."""

    cell: str
    decomposition: tuple
    rows: tuple  # four sign-row strings
    hits: int = 1

    def order_key(self) -> tuple:
        return (self.cell, self.decomposition, self.rows)


@dataclass
class ClassEntry:
    key: CanonicalKey
    occurrences: dict = field(default_factory=dict)  # (cell, decomposition) -> Occurrence

    @property
    def representative(self) -> Occurrence:
        return min(self.occurrences.values(), key=Occurrence.order_key)

    @property
    def hits(self) -> int:
        return sum(o.hits for o in self.occurrences.values())


def _merge_meta(a: dict, b: dict) -> dict:
    """Symmetric merge: cell lists are united, any other key must agree."""
    out = {}
    for k in set(a) | set(b):
        if k == "cells":
            cells = set(filter(None, a.get(k, "").split(","))) | set(filter(None, b.get(k, "").split(",")))
            out[k] = ",".join(sorted(cells))
        elif k in a and k in b and a[k] != b[k]:
            raise ValueError(f"cannot merge stores with {k}={a[k]} and {k}={b[k]}")
        else:
            out[k] = a.get(k, b.get(k))
    return out


class ClassStore:
    """Canonical key -> representative and discovery metadata.

    Inserts are serialized by a lock.  Representatives are the smallest
    occurrence under a fixed order, so merging stores is associative and
    independent of insertion order.
    """

    def __init__(self, order: int | None = None):
        self.order = order
        self.meta: dict = {}  # free-form run information, saved as comment lines
        self.entries: dict[bytes, ClassEntry] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: CanonicalKey) -> bool:
        e = self.entries.get(key.digest)
        return e is not None and e.key == key

    def keys(self):
        return sorted(e.key for e in self.entries.values())

    def add(self, key: CanonicalKey, cell: str, decomposition, rows, hits: int = 1) -> bool:
        """Record one occurrence; True iff the key was new."""
        decomposition = tuple(int(v) for v in decomposition)
        rows = tuple(rows)
        with self._lock:
            entry = self.entries.get(key.digest)
            is_new = entry is None
            if is_new:
                entry = ClassEntry(key)
                self.entries[key.digest] = entry
            elif not np.array_equal(entry.key.matrix, key.matrix):
                raise RuntimeError(f"digest collision on {key.hex}")
            occ_key = (cell, decomposition)
            occ = entry.occurrences.get(occ_key)
            if occ is None:
                entry.occurrences[occ_key] = Occurrence(cell, decomposition, rows, hits)
            else:
                occ.hits += hits
                if rows < occ.rows:
                    occ.rows = rows
            return is_new

    def merge(self, other: "ClassStore") -> "ClassStore":
        out = ClassStore(self.order or other.order)
        out.meta = _merge_meta(self.meta, other.meta)
        for store in (self, other):
            for entry in store.entries.values():
                for occ in entry.occurrences.values():
                    out.add(entry.key, occ.cell, occ.decomposition, occ.rows, occ.hits)
        return out

    # -- persistence --------------------------------------------------------

    def lines(self) -> list[str]:
        out = [f"# {k}={v}" for k, v in sorted(self.meta.items())]
        entries = sorted(self.entries.values(), key=lambda e: e.representative.order_key())
        for entry in entries:
            occs = sorted(entry.occurrences.values(), key=Occurrence.order_key)
            for k, occ in enumerate(occs):
                dec = " ".join(str(v) for v in occ.decomposition)
                line = f"{entry.key.hex}  {occ.cell}  {dec}  {' '.join(occ.rows)}  hits={occ.hits}"
                if k == 0:
                    line += f"  canon={entry.key.matrix_hex()}"
                out.append(line)
        return out

    def save(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.lines():
                fh.write(line + "\n")

    @classmethod
    def load(cls, path) -> "ClassStore":
        store = cls()
        pending = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if line.startswith("#"):
                    k, sep, v = line[1:].strip().partition("=")
                    if sep and " " not in k:
                        store.meta[k] = v
                    continue
                if not line:
                    continue
                parts = line.split()
                if len(parts) < 10:
                    raise ValueError(f"{path}:{lineno}: expected 'key cell w x y z w0 x0 y0 z0'")
                key_hex, cell = parts[0], parts[1]
                dec = tuple(int(v) for v in parts[2:6])
                rows = tuple(parts[6:10])
                hits, canon = 1, None
                for extra in parts[10:]:
                    if extra.startswith("hits="):
                        hits = int(extra[5:])
                    elif extra.startswith("canon="):
                        canon = extra[6:]
                pending.setdefault(key_hex, []).append((cell, dec, rows, hits, canon))
        for key_hex, occs in pending.items():
            n = 4 * len(occs[0][2][0])
            canon = next((o[4] for o in occs if o[4]), None)
            if canon is None:
                raise ValueError(f"{path}: no canonical matrix stored for {key_hex}")
            M = CanonicalKey.matrix_from_hex(canon, n)
            digest = hashlib.sha256(matrix_text(M).encode()).digest()
            if digest.hex() != key_hex:
                raise ValueError(f"{path}: stored matrix does not hash to {key_hex}")
            key = CanonicalKey(digest, M)
            for cell, dec, rows, hits, _ in occs:
                store.add(key, cell, dec, rows, hits)
            store.order = n
        return store


def insert_if_new(store: ClassStore, q, key: CanonicalKey | None = None) -> bool:
    """Insert a candidate whose assembly is Hadamard; True iff its class is new."""
    from .hadamard import assemble

    if key is None:
        key = canonical_key(assemble(q))
    return store.add(key, q.params.name, q.decomposition.as_tuple(), tuple(q.row_texts()))
