"""Affine Weyl groups, alcoves, signed distances, and weight bookkeeping.

All alcove geometry is done on *normalized* points ``v = (lam + rho)/p``,
which turns the p-dilated dot action of ``W_p = W x pZR`` into the standard
action of ``W x ZR``: an affine element ``(w, nu)`` sends ``v`` to
``w(v) + nu``.  The combinatorics is therefore independent of p; the prime
enters only when converting weights to points and back.

The same machinery runs on a Levi root subsystem ``R_I``: hyperplanes are
restricted to the coroots of ``R_I``, translations to ``ZR_I``, and alcoves
become slabs.  ``AffineSystem(datum, I)`` packages one such arrangement.

Reflection hyperplanes are ``H_{beta,n} = {v : <v, beta^vee> = n}``.  The
affine generators are the finite simple reflections together with, per
irreducible component, the reflection in ``<v, theta^vee> = 1`` for the
highest short root ``theta`` of the component (so ``theta^vee`` is the
highest coroot).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple

from .errors import InternalInconsistency, NotRegular
from .rootsys import ParabolicDatum, RootDatum, _vadd, _vscale, _vsub

__all__ = [
    "AffElt",
    "AffineSystem",
    "Alcove",
    "WeightDecomp",
    "get_affine_system",
    "dot_act",
    "decompose",
    "is_regular",
    "alcove_of",
    "normalized_point",
    "signed_distance",
    "rd",
    "rd_levi",
    "up_reflect",
    "box_window",
    "lambda_bracket",
]


class AffElt(NamedTuple):
    """Element of W_S x ZR_S: finite part (Weyl group index) and translation
    in simple-root coordinates of the ambient datum."""

    w: int
    nu: Tuple[int, ...]


def _count_strict(lo: Fraction, hi: Fraction) -> int:
    """Number of integers n with lo < n < hi (0 if lo >= hi)."""
    if lo >= hi:
        return 0
    import math

    start = math.floor(lo) + 1
    end = math.ceil(hi) - 1
    return max(0, end - start + 1)


class AffineSystem:
    """The affine arrangement of a root (sub)system, with group operations.

    ``I`` is a 1-based subset of simple indices; ``None`` or the full set
    gives the ambient system.  Generator ids: 0..(c-1) are the affine
    reflections of the c components, then the finite simple reflections in
    increasing simple index.  The token of affine generator k is ``s0`` for
    k = 0 and ``s0b``, ``s0c``, ... beyond (only reducible systems have
    several); finite generators are ``s1``..``sr``.
    """

    def __init__(self, datum: RootDatum, I: Optional[Iterable[int]] = None):
        self.datum = datum
        r = datum.rank
        if I is None:
            sub0 = tuple(range(r))
        else:
            sub0 = tuple(sorted(set(int(i) - 1 for i in I)))
            if any(i < 0 or i >= r for i in sub0):
                raise IndexError(f"I out of range for rank {r}")
        self.sub0 = sub0
        self.I = tuple(i + 1 for i in sub0)
        self.is_full = sub0 == tuple(range(r))

        self.pos = tuple(
            k
            for k, pr in enumerate(datum.pos_roots)
            if all(pr.rc[j] == 0 for j in range(r) if j not in sub0)
        )

        # Components of the subsystem's Dynkin diagram.
        comp_of = {i: i for i in sub0}
        for i in sub0:
            for j in sub0:
                if i != j and datum.cartan[i][j] != 0:
                    a, b = comp_of[i], comp_of[j]
                    if a != b:
                        lo, hi = min(a, b), max(a, b)
                        for k in comp_of:
                            if comp_of[k] == hi:
                                comp_of[k] = lo
        comps: dict[int, list[int]] = {}
        for i in sub0:
            comps.setdefault(comp_of[i], []).append(i)
        self.components: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(sorted(v)) for _, v in sorted(comps.items())
        )

        # Highest short root of each component, dominant within the subsystem.
        self.comp_theta: Tuple[int, ...] = tuple(
            self._highest_short(comp) for comp in self.components
        )

        # Finite subgroup generated by the chosen simple reflections.
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
        self.finite_group: Tuple[int, ...] = tuple(
            sorted(seen, key=lambda w: (datum.lengths[w], datum.words[w]))
        )

        # 2*rho of the subsystem in root coordinates (integral, dominant for it).
        self.two_rho_sub_rc: Tuple[int, ...] = tuple(
            sum(datum.pos_roots[k].rc[i] for k in self.pos) for i in range(r)
        )

        # Generators: affine per component first, then finite.
        self.gen_tokens: list[str] = []
        self.gen_elts: list[AffElt] = []
        self._gen_kind: list[tuple] = []
        for ci, theta in enumerate(self.comp_theta):
            tok = "s0" if ci == 0 else "s0" + chr(ord("b") + ci - 1)
            self.gen_tokens.append(tok)
            self.gen_elts.append(AffElt(datum.refl_of_root[theta], datum.pos_roots[theta].rc))
            self._gen_kind.append(("affine", theta))
        for j in sub0:
            self.gen_tokens.append(f"s{j + 1}")
            self.gen_elts.append(AffElt(datum.s_of_simple[j], (0,) * r))
            self._gen_kind.append(("finite", j))
        self.ngens = len(self.gen_elts)

        # Interior point of the base region.
        raw = tuple(1 if i in sub0 else 0 for i in range(r))
        big = max(
            (sum(raw[k] * datum.pos_roots[t].coroot[k] for k in range(r)) for t in self.comp_theta),
            default=1,
        )
        t = Fraction(1, big + 1)
        self.u0: Tuple[Fraction, ...] = tuple(Fraction(raw[i]) * t for i in range(r))

        self.identity = AffElt(0, (0,) * r)
        self._len_cache: dict[AffElt, int] = {}
        self._rep_cache: dict[AffElt, Tuple[Fraction, ...]] = {}

    def _highest_short(self, comp: Tuple[int, ...]) -> int:
        datum = self.datum
        in_comp = [
            k
            for k, pr in enumerate(datum.pos_roots)
            if k in self.pos and any(pr.rc[i] for i in comp)
        ]
        short = min(datum.pos_roots[k].norm2 for k in in_comp)
        for k in in_comp:
            pr = datum.pos_roots[k]
            if pr.norm2 == short and all(
                sum(pr.fw[a] * datum.pos_roots[datum.simple_indices[i]].coroot[a] for a in range(datum.rank)) >= 0
                for i in comp
            ):
                return k
        raise InternalInconsistency("no dominant short root in component")

    # -- group operations ----------------------------------------------------

    def mult(self, x: AffElt, y: AffElt) -> AffElt:
        d = self.datum
        return AffElt(d.mult(x.w, y.w), _vadd(d.apply_rc(x.w, y.nu), x.nu))

    def inv(self, x: AffElt) -> AffElt:
        d = self.datum
        wi = d.inv(x.w)
        return AffElt(wi, _vscale(-1, d.apply_rc(wi, x.nu)))

    def act_point(self, x: AffElt, v: Sequence) -> Tuple[Fraction, ...]:
        d = self.datum
        shift = d.rc_to_fw(x.nu)
        return tuple(a + b for a, b in zip(d.apply_fw(x.w, v), shift))

    def rep_point(self, x: AffElt) -> Tuple[Fraction, ...]:
        """Interior representative of the region x . (base region)."""
        pt = self._rep_cache.get(x)
        if pt is None:
            pt = self.act_point(x, self.u0)
            self._rep_cache[x] = pt
        return pt

    def length(self, x: AffElt) -> int:
        n = self._len_cache.get(x)
        if n is None:
            a = self.u0
            b = self.rep_point(x)
            d = self.datum
            n = 0
            for k in self.pos:
                co = d.pos_roots[k].coroot
                pa = sum(a[i] * co[i] for i in range(d.rank))
                pb = sum(b[i] * co[i] for i in range(d.rank))
                n += _count_strict(min(pa, pb), max(pa, pb))
            self._len_cache[x] = n
        return n

    def signed_wall_count(self, va: Sequence, vb: Sequence) -> int:
        """Signed separating-wall count between the regions of two interior
        points: +1 per wall with vb on the upper side, -1 per wall with va."""
        d = self.datum
        total = 0
        for k in self.pos:
            co = d.pos_roots[k].coroot
            pa = sum(Fraction(va[i]) * co[i] for i in range(d.rank))
            pb = sum(Fraction(vb[i]) * co[i] for i in range(d.rank))
            if pb > pa:
                total += _count_strict(pa, pb)
            else:
                total -= _count_strict(pb, pa)
        return total

    def gen_mult(self, g: int, x: AffElt) -> AffElt:
        return self.mult(self.gen_elts[g], x)

    def left_descends(self, g: int, x: AffElt) -> bool:
        """True iff the wall of generator g separates the base region from
        x . (base region), i.e. length(g x) < length(x)."""
        v = self.rep_point(x)
        d = self.datum
        kind, data = self._gen_kind[g]
        if kind == "finite":
            co = d.pos_roots[d.simple_indices[data]].coroot
            return sum(v[i] * co[i] for i in range(d.rank)) < 0
        co = d.pos_roots[data].coroot
        return sum(v[i] * co[i] for i in range(d.rank)) > 1

    def in_base(self, v: Sequence) -> bool:
        d = self.datum
        for j in self.sub0:
            co = d.pos_roots[d.simple_indices[j]].coroot
            if sum(v[i] * co[i] for i in range(d.rank)) <= 0:
                return False
        for theta in self.comp_theta:
            co = d.pos_roots[theta].coroot
            if sum(v[i] * co[i] for i in range(d.rank)) >= 1:
                return False
        return True

    def reduce_point(self, v: Sequence) -> tuple[AffElt, Tuple[Fraction, ...]]:
        """Return (x, v0) with v = x . v0 and v0 in the base region.

        The point must be off every wall of the arrangement; walls are never
        hit when the corresponding weight is p-regular.
        """
        v = tuple(Fraction(c) for c in v)
        elt = self.identity
        guard = 0
        while not self.in_base(v):
            guard += 1
            if guard > 100000:
                raise InternalInconsistency("alcove reduction did not terminate")
            for g in range(self.ngens):
                d = self.datum
                kind, data = self._gen_kind[g]
                if kind == "finite":
                    co = d.pos_roots[d.simple_indices[data]].coroot
                    val = sum(v[i] * co[i] for i in range(d.rank))
                    if val < 0:
                        v = self.act_point(self.gen_elts[g], v)
                        elt = self.mult(elt, self.gen_elts[g])
                        break
                    if val == 0:
                        raise NotRegular("point lies on a reflection wall")
                else:
                    co = d.pos_roots[data].coroot
                    val = sum(v[i] * co[i] for i in range(d.rank))
                    if val > 1:
                        v = self.act_point(self.gen_elts[g], v)
                        elt = self.mult(elt, self.gen_elts[g])
                        break
                    if val == 1:
                        raise NotRegular("point lies on a reflection wall")
            else:
                raise NotRegular("point lies on a reflection wall")
        return elt, v

    def word(self, x: AffElt) -> Tuple[int, ...]:
        """Canonical word (greedy smallest left descent), as generator ids."""
        out = []
        while x != self.identity:
            for g in range(self.ngens):
                if self.left_descends(g, x):
                    out.append(g)
                    x = self.gen_mult(g, x)
                    break
            else:
                raise InternalInconsistency("no descent for a non-identity element")
        return tuple(out)

    def word_str(self, x: AffElt) -> str:
        w = self.word(x)
        return " ".join(self.gen_tokens[g] for g in w) if w else "e"

    def parse_word(self, text: str) -> AffElt:
        text = text.strip()
        if text in ("", "e"):
            return self.identity
        tok2g = {t: g for g, t in enumerate(self.gen_tokens)}
        x = self.identity
        for tok in text.split():
            if tok not in tok2g:
                raise ValueError(f"unknown generator token {tok!r}")
            x = self.mult(x, self.gen_elts[tok2g[tok]])
        return x


_SYSTEM_CACHE: dict = {}


def get_affine_system(datum: RootDatum, I: Optional[Iterable[int]] = None) -> AffineSystem:
    key = (datum.label, None if I is None else tuple(sorted(set(I))))
    if key not in _SYSTEM_CACHE:
        _SYSTEM_CACHE[key] = AffineSystem(datum, I)
    return _SYSTEM_CACHE[key]


@dataclass(frozen=True)
class Alcove:
    """An alcove (or Levi slab) identified by the affine element mapping the
    base region onto it."""

    system: AffineSystem
    elt: AffElt

    def __eq__(self, other):
        return (
            isinstance(other, Alcove)
            and self.system is other.system
            and self.elt == other.elt
        )

    def __hash__(self):
        return hash((id(self.system), self.elt))

    @property
    def rep(self) -> Tuple[Fraction, ...]:
        return self.system.rep_point(self.elt)

    @property
    def barycenter(self) -> Tuple[Fraction, ...]:
        """True barycenter (full systems only; Levi slabs are unbounded)."""
        verts = base_alcove_vertices(self.system)
        imgs = [self.system.act_point(self.elt, v) for v in verts]
        n = len(imgs)
        return tuple(sum(col) / n for col in zip(*imgs))

    @property
    def word(self) -> str:
        return self.system.word_str(self.elt)

    def translate(self, nu_rc: Sequence[int]) -> "Alcove":
        x = self.elt
        return Alcove(self.system, AffElt(x.w, _vadd(x.nu, tuple(nu_rc))))


def base_alcove_vertices(system: AffineSystem) -> list:
    """Vertices of the closure of the base alcove (full system)."""
    d = system.datum
    r = d.rank
    choices = []
    for comp, theta in zip(system.components, system.comp_theta):
        co = d.pos_roots[theta].coroot
        opts = [(0,) * r]
        for i in comp:
            m = co[i]
            opts.append(tuple(Fraction(int(k == i), m) for k in range(r)))
        choices.append(opts)
    verts = []
    for pick in itertools.product(*choices):
        verts.append(tuple(sum(col) for col in zip(*pick)) if len(pick) > 1 else pick[0])
    return verts


# -- weight-level operations -------------------------------------------------


@dataclass(frozen=True)
class WeightDecomp:
    """lam = lam0 + p*lam1 with lam0 in the restricted box [0,p)^r."""

    lam0: Tuple[int, ...]
    lam1: Tuple[int, ...]


def decompose(lam: Sequence[int], p: int) -> WeightDecomp:
    lam0 = tuple(c % p for c in lam)
    lam1 = tuple((c - c % p) // p for c in lam)
    return WeightDecomp(lam0, lam1)


def dot_act(datum: RootDatum, x: AffElt, lam: Sequence[int], p: int) -> Tuple[int, ...]:
    """x . lam = w(lam + rho) - rho + p*nu for x = (w, nu)."""
    body = _vsub(datum.apply_fw(x.w, _vadd(lam, datum.rho)), datum.rho)
    return _vadd(body, _vscale(p, datum.rc_to_fw(x.nu)))


def normalized_point(datum: RootDatum, lam: Sequence[int], p: int) -> Tuple[Fraction, ...]:
    return tuple(Fraction(lam[i] + datum.rho[i], p) for i in range(datum.rank))


def is_regular(datum: RootDatum, lam: Sequence[int], p: int) -> bool:
    lr = _vadd(lam, datum.rho)
    return all(
        sum(lr[i] * pr.coroot[i] for i in range(datum.rank)) % p != 0
        for pr in datum.pos_roots
    )


def alcove_of(datum: RootDatum, lam: Sequence[int], p: int) -> Alcove:
    """The alcove containing (lam+rho)/p; NotRegular on p-singular input."""
    if not is_regular(datum, lam, p):
        raise NotRegular(f"{lam} is p-singular for p={p}")
    system = get_affine_system(datum)
    x, _ = system.reduce_point(normalized_point(datum, lam, p))
    return Alcove(system, x)


def signed_distance(a: Alcove, b: Alcove) -> int:
    if a.system is not b.system:
        raise ValueError("alcoves from different systems")
    return a.system.signed_wall_count(a.rep, b.rep)


def rd(datum: RootDatum, mu: Sequence[int], lam: Sequence[int], p: int) -> int:
    """Signed wall count from the alcove of mu to the alcove of lam."""
    system = get_affine_system(datum)
    return system.signed_wall_count(
        normalized_point(datum, mu, p), normalized_point(datum, lam, p)
    )


def rd_levi(
    datum: RootDatum, I: Iterable[int], mu: Sequence[int], lam: Sequence[int], p: int
) -> int:
    """Same count restricted to the walls of the Levi subsystem."""
    system = get_affine_system(datum, I)
    return system.signed_wall_count(
        normalized_point(datum, mu, p), normalized_point(datum, lam, p)
    )


def up_reflect(datum: RootDatum, beta, alcove: Alcove) -> Alcove:
    """Minimal up-reflection of an alcove through a wall of direction beta.

    ``beta`` is an index into datum.pos_roots or a fundamental-weight tuple.
    """
    if not isinstance(beta, int):
        beta = next(k for k, pr in enumerate(datum.pos_roots) if pr.fw == tuple(beta))
    system = alcove.system
    pr = datum.pos_roots[beta]
    verts = base_alcove_vertices(system)
    top = max(
        sum(system.act_point(alcove.elt, v)[i] * pr.coroot[i] for i in range(datum.rank))
        for v in verts
    )
    m = top if top.denominator == 1 else (top.numerator // top.denominator) + 1
    refl = AffElt(datum.refl_of_root[beta], _vscale(int(m), pr.rc))
    return Alcove(system, system.mult(refl, alcove.elt))


def lambda_bracket(datum: RootDatum, lam: Sequence[int], w: int, p: int) -> Tuple[int, ...]:
    """lam + (p-1)(w . 0) = lam + (p-1)(w(rho) - rho)."""
    shift = _vsub(datum.apply_fw(w, datum.rho), datum.rho)
    return _vadd(lam, _vscale(p - 1, shift))


def box_window(
    datum: RootDatum, lam: Sequence[int], p: int, I: Optional[Iterable[int]] = None
) -> Tuple[Tuple[int, ...], ...]:
    """Orbit points mu of W_p . lam (or W_{I,p} . lam) with lam - mu in the
    coordinate box 0 <= a_i <= (2(p-1) rho)_i of simple-root coordinates.

    This box contains the weight support of the induced modules, so it is a
    sound superset for composition-factor candidates.
    """
    if not is_regular(datum, lam, p):
        raise NotRegular(f"{lam} is p-singular for p={p}")
    system = get_affine_system(datum, I)
    r = datum.rank
    bound = tuple((p - 1) * datum.two_rho_rc[i] for i in range(r))
    sub = set(system.sub0)
    out = set()
    lam = tuple(lam)
    for w in system.finite_group:
        base_fw = _vsub(lam, datum.dot_finite(w, lam))
        base_rc_frac = datum.fw_to_rc(base_fw)
        if any(c.denominator != 1 for c in base_rc_frac):
            raise InternalInconsistency("orbit difference not in the root lattice")
        base = tuple(int(c) for c in base_rc_frac)
        ranges = []
        ok = True
        for i in range(r):
            if i in sub:
                lo = -((bound[i] - base[i]) // p)
                hi = base[i] // p
                if lo > hi:
                    ok = False
                    break
                ranges.append(range(lo, hi + 1))
            else:
                if not 0 <= base[i] <= bound[i]:
                    ok = False
                    break
                ranges.append(range(0, 1))
        if not ok:
            continue
        for tau in itertools.product(*ranges):
            mu = _vsub(_vadd(lam, _vscale(p, datum.rc_to_fw(tau))), base_fw)
            # mu = w.lam + p*tau; recheck the box inclusively.
            diff = tuple(base[i] - p * tau[i] for i in range(r))
            if all(0 <= diff[i] <= bound[i] for i in range(r)):
                out.add(mu)
    return tuple(sorted(out))
