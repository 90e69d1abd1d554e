"""Four-square decompositions of 4p and their reduction under block symmetries."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_prime(p: int) -> None:
    if not isinstance(p, int) or p <= 3 or not is_prime(p):
        raise ValueError(f"p must be a prime greater than 3, got {p!r}")


@dataclass(frozen=True, order=True)
class Decomposition:
    w: int
    x: int
    y: int
    z: int

    def __iter__(self):
        return iter((self.w, self.x, self.y, self.z))

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.w, self.x, self.y, self.z)

    def norm(self) -> int:
        return sum(v * v for v in self)

    def __str__(self) -> str:
        return " ".join(str(v) for v in self)


# block permutations (Y,Z,W,X), (X,W,Z,Y), (Z,Y,X,W) as index maps
KLEIN = ((0, 1, 2, 3), (2, 3, 0, 1), (1, 0, 3, 2), (3, 2, 1, 0))


def klein_images(d) -> list[tuple[int, int, int, int]]:
    t = tuple(d)
    return [tuple(t[i] for i in perm) for perm in KLEIN]


def sign_images(d) -> list[tuple[int, int, int, int]]:
    t = tuple(d)
    out = []
    for signs in itertools.product((1, -1), repeat=4):
        if signs[0] * signs[1] * signs[2] * signs[3] == 1:
            out.append(tuple(s * v for s, v in zip(signs, t)))
    return out


def enumerate_decompositions(p: int) -> list[Decomposition]:
    """All integer (w, x, y, z) with w^2+x^2+y^2+z^2 = 4p, every entry odd and 0 < |.| < p."""
    check_prime(p)
    odd = [v for v in range(-(p - 1), p) if v % 2 != 0]
    out = []
    for q in itertools.product(odd, repeat=4):
        if sum(v * v for v in q) == 4 * p:
            out.append(Decomposition(*q))
    return out


@dataclass(frozen=True)
class DecompositionClass:
    representative: Decomposition
    orbit: frozenset = field(compare=False)

    @property
    def signed_representatives(self) -> tuple[Decomposition, Decomposition]:
        """The two sign classes searched for this arrangement: (w,x,y,z) and (-w,x,y,z)."""
        w, x, y, z = self.representative
        return (Decomposition(w, x, y, z), Decomposition(-w, x, y, z))

    def __str__(self) -> str:
        w, x, y, z = self.representative
        return f"[±{w},{x},{y},{z}]"


def symmetry_orbit(d) -> frozenset:
    """Closure of d under the Klein-four block permutations and even sign patterns."""
    seen = set()
    frontier = [tuple(d)]
    while frontier:
        cur = frontier.pop()
        if cur in seen:
            continue
        seen.add(cur)
        for img in klein_images(cur) + sign_images(cur):
            if img not in seen:
                frontier.append(img)
    return frozenset(seen)


def _positive_arrangement(t) -> tuple:
    return tuple(abs(v) for v in t)


def reduce_decompositions(D) -> list[DecompositionClass]:
    """Group decompositions into classes.

    A class collects every sign pattern of the Klein-four orbit of one positive
    arrangement.  Sign patterns with an odd number of minus signs are not
    reachable by the sign moves alone, so each class carries the two signed
    representatives (w,x,y,z) and (-w,x,y,z); the searcher runs both.
    """
    remaining = {tuple(d) for d in D}
    classes = []
    while remaining:
        start = min(remaining, key=lambda t: (_positive_arrangement(t), [-v for v in t]))
        pos = _positive_arrangement(start)
        arrangements = set(klein_images(pos))
        members = set()
        for arr in arrangements:
            for signs in itertools.product((1, -1), repeat=4):
                cand = tuple(s * v for s, v in zip(signs, arr))
                if cand in remaining:
                    members.add(cand)
        rep = min(arrangements)
        classes.append(DecompositionClass(Decomposition(*rep), frozenset(Decomposition(*m) for m in members)))
        remaining -= members
    classes.sort(key=lambda c: c.representative.as_tuple())
    return classes


def decomposition_classes(p: int) -> list[DecompositionClass]:
    return reduce_decompositions(enumerate_decompositions(p))


def l110_admissible(d, p: int) -> bool:
    """Row sums allowed for the (1,1,0) cells.

    True iff p = 1 mod 4 and (w,x,y,z) is (w, a*w, z, a*z) or (w, a*z, w, a*z)
    for a sign a, with w^2 + z^2 = 2p.
    """
    if p % 4 != 1:
        return False
    w, x, y, z = tuple(d)
    # (w, a*w, c, a*c)
    if abs(x) == abs(w) and x * z == w * y and w * w + y * y == 2 * p:
        return True
    # (w, a*c, w, a*c)
    return y == w and x == z and w * w + z * z == 2 * p
