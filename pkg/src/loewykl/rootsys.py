"""Root systems, finite Weyl groups, and parabolic subdata.

Supported Cartan types: A1, A1xA1, A2, B2, G2, A3.

Coordinate conventions, used by the whole package:

* Weights are integer vectors in fundamental-weight coordinates, so
  ``<lam, alpha_i^vee> = lam[i]``.
* The simple root ``alpha_j`` is the j-th column of the Cartan matrix
  ``cartan[i][j] = <alpha_j, alpha_i^vee>``.
* A coroot ``beta^vee`` is stored as the integer vector of its pairings
  with the fundamental weights, so ``<lam, beta^vee>`` is a plain dot
  product.  For a simple coroot this is a standard basis vector.
* Root-lattice ("rc") coordinates express a vector in the basis of simple
  roots; translations of the affine Weyl group live in this lattice.

Simple-root indices are 1-based in every public interface (``I = {1, 2}``),
matching the usual labelling s1..sr; internal lists are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

from .errors import InternalInconsistency, UnsupportedType

__all__ = ["PosRoot", "RootDatum", "ParabolicDatum", "build_root_datum", "parabolic_datum"]

Vec = Tuple[int, ...]
Mat = Tuple[Vec, ...]

CARTAN = {
    "A1": ((2,),),
    "A1xA1": ((2, 0), (0, 2)),
    "A2": ((2, -1), (-1, 2)),
    "B2": ((2, -1), (-2, 2)),
    "G2": ((2, -1), (-3, 2)),
    "A3": ((2, -1, 0), (-1, 2, -1), (0, -1, 2)),
}

# (|W|, |R+|, Coxeter number) forced by the Cartan matrix; checked at build time.
CLASSICAL = {
    "A1": (2, 1, 2),
    "A1xA1": (4, 2, 2),
    "A2": (6, 3, 3),
    "B2": (8, 4, 4),
    "G2": (12, 6, 6),
    "A3": (24, 6, 4),
}


def _vadd(a: Sequence, b: Sequence):
    return tuple(x + y for x, y in zip(a, b))


def _vsub(a: Sequence, b: Sequence):
    return tuple(x - y for x, y in zip(a, b))


def _vscale(c, a: Sequence):
    return tuple(c * x for x in a)


def _matvec(m: Mat, v: Sequence):
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in m)


def _matmul(a: Mat, b: Mat):
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n)
    )


@dataclass(frozen=True)
class PosRoot:
    """A positive root with all three stored representations."""

    fw: Vec       # fundamental-weight coordinates
    rc: Vec       # simple-root coordinates (integers)
    coroot: Vec   # pairing vector against fundamental weights
    norm2: int    # squared length, normalized so short roots have 2


class RootDatum:
    """Immutable Cartan datum with the finite Weyl group fully enumerated.

    Weyl group elements are integers 0..|W|-1; index 0 is the identity.
    Each element carries its action matrix on fundamental-weight coordinates,
    its action matrix on root coordinates, its lexicographically smallest
    reduced word, and its length.
    """

    def __init__(self, label: str):
        if label not in CARTAN:
            raise UnsupportedType(f"unsupported type label: {label!r}")
        self.label = label
        cart = CARTAN[label]
        r = len(cart)
        self.rank = r
        self.cartan = cart

        # Simple roots as columns of the Cartan matrix; simple coroots are
        # standard basis vectors in pairing coordinates.
        alpha_fw = [tuple(cart[i][j] for i in range(r)) for j in range(r)]
        ident = tuple(tuple(int(i == j) for j in range(r)) for i in range(r))

        # Symmetrizer d_i with d_i * a_ij = d_j * a_ji; smallest positive integers.
        d = [Fraction(1)] * r
        changed = True
        while changed:
            changed = False
            for i in range(r):
                for j in range(r):
                    if cart[i][j] != 0 and d[j] * cart[j][i] != d[i] * cart[i][j]:
                        d[j] = d[i] * Fraction(cart[i][j], cart[j][i])
                        changed = True
        scale = 1
        for x in d:
            scale = scale * x.denominator // _gcd(scale, x.denominator)
        d = [int(x * scale) for x in d]
        g = 0
        for x in d:
            g = _gcd(g, x)
        self.symmetrizer = tuple(x // g for x in d)

        # Positive roots by reflection closure from the simples.
        def norm2(rc: Vec, fw: Vec) -> int:
            val = sum(rc[i] * self.symmetrizer[i] * fw[i] for i in range(r))
            assert val > 0
            return val

        roots: dict[Vec, PosRoot] = {}
        queue = []
        for j in range(r):
            pr = PosRoot(
                fw=tuple(alpha_fw[j]),
                rc=tuple(int(i == j) for i in range(r)),
                coroot=ident[j],
                norm2=norm2(tuple(int(i == j) for i in range(r)), tuple(alpha_fw[j])),
            )
            roots[pr.fw] = pr
            queue.append(pr)
        while queue:
            pr = queue.pop()
            for i in range(r):
                # s_i(beta) in all three coordinate systems
                pairing = pr.fw[i]
                fw = _vsub(pr.fw, _vscale(pairing, alpha_fw[i]))
                rc = tuple(pr.rc[k] - (pairing if k == i else 0) for k in range(r))
                co_pair = sum(pr.coroot[k] * alpha_fw[i][k] for k in range(r))
                co = tuple(pr.coroot[k] - (co_pair if k == i else 0) for k in range(r))
                if all(x >= 0 for x in rc) and any(x > 0 for x in rc) and fw not in roots:
                    npr = PosRoot(fw=fw, rc=rc, coroot=co, norm2=norm2(rc, fw))
                    roots[fw] = npr
                    queue.append(npr)
        pos = sorted(roots.values(), key=lambda pr: (sum(pr.rc), pr.rc))
        self.pos_roots: Tuple[PosRoot, ...] = tuple(pos)
        self.simple_indices = tuple(
            next(k for k, pr in enumerate(pos) if pr.rc == tuple(int(i == j) for i in range(r)))
            for j in range(r)
        )

        # rho and friends.
        self.rho: Vec = (1,) * r
        self.two_rho_fw: Vec = tuple(sum(pr.fw[i] for pr in pos) for i in range(r))
        self.two_rho_rc: Vec = tuple(sum(pr.rc[i] for pr in pos) for i in range(r))

        # Irreducible components of the Dynkin diagram.
        comp_of = list(range(r))
        for i in range(r):
            for j in range(r):
                if i != j and cart[i][j] != 0:
                    a, b = comp_of[i], comp_of[j]
                    if a != b:
                        lo, hi = min(a, b), max(a, b)
                        comp_of = [lo if c == hi else c for c in comp_of]
        comps: dict[int, list[int]] = {}
        for i, c in enumerate(comp_of):
            comps.setdefault(c, []).append(i)
        self.components: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(v) for _, v in sorted(comps.items())
        )

        # Highest short root per component: the unique dominant short root.
        short2 = {
            comp: min(pr.norm2 for pr in pos if any(pr.rc[i] for i in comp))
            for comp in self.components
        }
        self.highest_short: Tuple[int, ...] = tuple(
            next(
                k
                for k, pr in enumerate(pos)
                if any(pr.rc[i] for i in comp)
                and pr.norm2 == short2[comp]
                and all(x >= 0 for x in pr.fw)
            )
            for comp in self.components
        )
        self.coxeter = max(
            sum(self.pos_roots[k].coroot) + 1 for k in self.highest_short
        )

        # Enumerate W by BFS; first discovery yields the lex-smallest reduced word.
        s_fw = [
            tuple(
                tuple(int(k == j) - (alpha_fw[i][k] if j == i else 0) for j in range(r))
                for k in range(r)
            )
            for i in range(r)
        ]
        mats = [ident]
        words: list[Tuple[int, ...]] = [()]
        lookup = {ident: 0}
        frontier = [0]
        while frontier:
            new_frontier = []
            for w in frontier:
                for i in range(r):
                    m = _matmul(mats[w], s_fw[i])
                    if m not in lookup:
                        lookup[m] = len(mats)
                        mats.append(m)
                        words.append(words[w] + (i + 1,))
                        new_frontier.append(lookup[m])
            frontier = new_frontier
        self.mats_fw: Tuple[Mat, ...] = tuple(mats)
        self.words: Tuple[Tuple[int, ...], ...] = tuple(words)
        self.lengths: Tuple[int, ...] = tuple(len(w) for w in words)
        self._lookup = lookup
        n = len(mats)
        self.order = n
        self.w0 = max(range(n), key=lambda w: self.lengths[w])

        # Root-coordinate action matrices: column j is (w alpha_j) in rc coords.
        rc_of_fw = {pr.fw: pr.rc for pr in pos}
        for pr in pos:
            rc_of_fw[_vscale(-1, pr.fw)] = _vscale(-1, pr.rc)
        self.mats_rc: Tuple[Mat, ...] = tuple(
            tuple(
                tuple(rc_of_fw[_matvec(m, alpha_fw[j])][i] for j in range(r))
                for i in range(r)
            )
            for m in mats
        )

        self._mult = tuple(
            tuple(lookup[_matmul(mats[a], mats[b])] for b in range(n)) for a in range(n)
        )
        self._inv = tuple(
            next(b for b in range(n) if self._mult[a][b] == 0) for a in range(n)
        )
        self.s_of_simple = tuple(lookup[s_fw[i]] for i in range(r))
        # Index of the reflection s_beta for each positive root.
        self.refl_of_root = tuple(
            lookup[
                tuple(
                    tuple(
                        int(k == j) - pr.fw[k] * pr.coroot[j] for j in range(r)
                    )
                    for k in range(r)
                )
            ]
            for pr in pos
        )

        self._check()

    # -- group operations ---------------------------------------------------

    def mult(self, a: int, b: int) -> int:
        return self._mult[a][b]

    def inv(self, a: int) -> int:
        return self._inv[a]

    def length(self, a: int) -> int:
        return self.lengths[a]

    def word(self, a: int) -> Tuple[int, ...]:
        """Lexicographically smallest reduced word, as 1-based simple indices."""
        return self.words[a]

    def apply_fw(self, w: int, v: Sequence) -> tuple:
        return _matvec(self.mats_fw[w], v)

    def apply_rc(self, w: int, v: Sequence) -> tuple:
        return _matvec(self.mats_rc[w], v)

    def rc_to_fw(self, rc: Sequence) -> tuple:
        cols = [self.pos_roots[self.simple_indices[j]].fw for j in range(self.rank)]
        return tuple(
            sum(cols[j][i] * rc[j] for j in range(self.rank)) for i in range(self.rank)
        )

    def fw_to_rc(self, fw: Sequence) -> tuple:
        """Invert the Cartan matrix exactly; raises if the vector is not in Z-span Q."""
        r = self.rank
        rows = [[Fraction(self.cartan[i][j]) for j in range(r)] + [Fraction(fw[i])] for i in range(r)]
        for col in range(r):
            piv = next(k for k in range(col, r) if rows[k][col] != 0)
            rows[col], rows[piv] = rows[piv], rows[col]
            pv = rows[col][col]
            rows[col] = [x / pv for x in rows[col]]
            for k in range(r):
                if k != col and rows[k][col] != 0:
                    f = rows[k][col]
                    rows[k] = [a - f * b for a, b in zip(rows[k], rows[col])]
        return tuple(rows[i][r] for i in range(r))

    def pairing(self, fw: Sequence, root_index: int):
        co = self.pos_roots[root_index].coroot
        return sum(fw[i] * co[i] for i in range(self.rank))

    def dot_finite(self, w: int, lam: Sequence) -> tuple:
        """w . lam = w(lam + rho) - rho for a finite Weyl group element."""
        return _vsub(self.apply_fw(w, _vadd(lam, self.rho)), self.rho)

    # -- construction-time checks -------------------------------------------

    def _check(self) -> None:
        n_w, n_pos, h = CLASSICAL[self.label]
        if self.order != n_w or len(self.pos_roots) != n_pos or self.coxeter != h:
            raise InternalInconsistency(
                f"{self.label}: got |W|={self.order}, |R+|={len(self.pos_roots)}, h={self.coxeter}"
            )
        for i in range(self.rank):
            if sum(self.rho[k] * self.pos_roots[self.simple_indices[i]].coroot[k] for k in range(self.rank)) != 1:
                raise InternalInconsistency("rho pairing is not 1 on a simple coroot")
        if self.rc_to_fw(self.two_rho_rc) != self.two_rho_fw or self.two_rho_fw != _vscale(2, self.rho):
            raise InternalInconsistency("sum of positive roots is not 2*rho")
        for w in range(self.order):
            neg = sum(
                1
                for pr in self.pos_roots
                if any(x < 0 for x in self.apply_rc(w, pr.rc))
            )
            if neg != self.lengths[w]:
                raise InternalInconsistency("length != number of inverted positive roots")


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a) if a else abs(b)


_DATUM_CACHE: dict[str, RootDatum] = {}


def build_root_datum(label: str) -> RootDatum:
    """Return the (cached, immutable) root datum for a supported type label."""
    if label not in _DATUM_CACHE:
        _DATUM_CACHE[label] = RootDatum(label)
    return _DATUM_CACHE[label]


@dataclass(frozen=True)
class ParabolicDatum:
    """Levi/parabolic data attached to a subset I of the simple roots.

    ``I`` uses 1-based simple indices.  All identities from the construction
    (longest-element factorization, the value of 2*rho_P, and its pairing
    range) are verified eagerly; failure raises InternalInconsistency.
    """

    datum: RootDatum
    I: Tuple[int, ...]                  # sorted, 1-based
    pos_I: Tuple[int, ...]              # indices into datum.pos_roots
    W_I: Tuple[int, ...]                # subgroup elements
    w_I: int                            # longest element of W_I
    w_upper_I: int                      # w^I = w0 * w_I
    min_reps: Tuple[int, ...]           # W^I, sorted by (length, word)
    two_rho_I: Vec
    two_rho_P: Vec

    @property
    def length_w_upper_I(self) -> int:
        return self.datum.length(self.w_upper_I)


def parabolic_datum(datum: RootDatum, I: Iterable[int]) -> ParabolicDatum:
    """Construct the parabolic datum for I, verifying all invariants."""
    r = datum.rank
    I_sorted = tuple(sorted(set(int(i) for i in I)))
    if any(i < 1 or i > r for i in I_sorted):
        raise IndexError(f"I must be a subset of 1..{r}, got {I_sorted}")
    sub0 = [i - 1 for i in I_sorted]

    pos_I = tuple(
        k
        for k, pr in enumerate(datum.pos_roots)
        if all(pr.rc[j] == 0 for j in range(r) if j not in sub0)
    )

    # Subgroup generated by the chosen simple reflections.
    gens = [datum.s_of_simple[j] for j in sub0]
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for w in frontier:
            for g in gens:
                u = datum.mult(w, g)
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
    W_I = tuple(sorted(seen, key=lambda w: (datum.lengths[w], datum.words[w])))
    w_I = max(W_I, key=lambda w: datum.lengths[w])
    w_upper_I = datum.mult(datum.w0, w_I)

    min_reps = tuple(
        sorted(
            (
                w
                for w in range(datum.order)
                if all(
                    datum.lengths[datum.mult(w, datum.s_of_simple[j])] > datum.lengths[w]
                    for j in sub0
                )
            ),
            key=lambda w: (datum.lengths[w], datum.words[w]),
        )
    )

    two_rho_I = tuple(
        sum(datum.pos_roots[k].fw[i] for k in pos_I) for i in range(r)
    )
    two_rho_P = _vsub(datum.two_rho_fw, two_rho_I)

    pd = ParabolicDatum(
        datum=datum,
        I=I_sorted,
        pos_I=pos_I,
        W_I=W_I,
        w_I=w_I,
        w_upper_I=w_upper_I,
        min_reps=min_reps,
        two_rho_I=two_rho_I,
        two_rho_P=two_rho_P,
    )

    # Mandatory checks.
    if datum.length(w_upper_I) != datum.length(datum.w0) - datum.length(w_I):
        raise InternalInconsistency("length(w^I) != length(w0) - length(w_I)")
    if len(min_reps) * len(W_I) != datum.order:
        raise InternalInconsistency("|W^I| * |W_I| != |W|")
    # 2*rho_P = w_I(rho) + rho, orthogonal to I, pairings in [2, h] off I.
    if _vadd(datum.apply_fw(w_I, datum.rho), datum.rho) != two_rho_P:
        raise InternalInconsistency("2*rho_P != w_I(rho) + rho")
    for j in range(r):
        val = two_rho_P[j]
        if j in sub0:
            if val != 0:
                raise InternalInconsistency("2*rho_P not orthogonal to I")
        elif not (2 <= val <= datum.coxeter):
            raise InternalInconsistency("pairing of 2*rho_P outside [2, h]")
    for w in min_reps:
        for wp in W_I:
            if datum.lengths[datum.mult(w, wp)] != datum.lengths[w] + datum.lengths[wp]:
                raise InternalInconsistency("W^I length additivity failed")
    return pd
