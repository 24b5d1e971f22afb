"""Exact polynomial arithmetic in q^(1/2) and the ordinary Kazhdan-Lusztig
engine for affine Weyl groups.

Polynomials are sparse maps from *doubled* exponents to integer coefficients,
so ordinary polynomials (integral powers of q) and the half powers appearing
in layer bookkeeping share one exact type.

The engine computes whole columns P_{., y} at once: with s the smallest left
descent of y, the column at y is assembled from the column at sy plus the
columns of the correction terms

    P_{x,y} = q^(1-c) P_{sx,sy} + q^c P_{x,sy}
              - sum_{x <= z < sy, sz < z} mu(z, sy) q^((l(y)-l(z))/2) P_{x,z},

with c = 1 if sx < x else 0.  The support of a column is exactly the Bruhat
lower interval, which makes column membership double as the Bruhat test.
Entries with sx > x are filled by the standard identity P_{x,y} = P_{sx,y}.

A pair-level memo fronts the columns; it is the part persisted to disk.
"""

from __future__ import annotations

import os
import threading
from typing import Callable, Dict, Optional, Tuple

from .alcove import AffElt, AffineSystem
from .errors import InternalInconsistency

__all__ = ["HalfLaurent", "KLCache", "KLEngine", "get_kl_engine"]

Poly = Dict[int, int]  # doubled exponent -> coefficient; no zero values stored


def _padd_into(acc: Poly, other: Poly, scale: int = 1, shift2: int = 0) -> None:
    """acc += scale * q^(shift2/2) * other, in place."""
    for e, c in other.items():
        k = e + shift2
        v = acc.get(k, 0) + scale * c
        if v:
            acc[k] = v
        else:
            acc.pop(k, None)


def _pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            k = ea + eb
            v = out.get(k, 0) + ca * cb
            if v:
                out[k] = v
            else:
                out.pop(k, None)
    return out


_ONE: Poly = {0: 1}
_EMPTY: Poly = {}


class HalfLaurent:
    """Integer-coefficient Laurent polynomial in q^(1/2).

    Exponents are stored doubled: the key k holds the coefficient of
    q^(k/2).  Values are exact Python integers.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Optional[Dict[int, int]] = None):
        self._c = {k: v for k, v in (coeffs or {}).items() if v}

    @classmethod
    def zero(cls) -> "HalfLaurent":
        return cls()

    @classmethod
    def one(cls) -> "HalfLaurent":
        return cls({0: 1})

    @classmethod
    def q(cls, half_power: int = 2) -> "HalfLaurent":
        """q^(half_power/2); default is plain q."""
        return cls({half_power: 1})

    @classmethod
    def monomial(cls, doubled_exp: int, coeff: int = 1) -> "HalfLaurent":
        return cls({doubled_exp: coeff})

    def coeff(self, doubled_exp: int) -> int:
        return self._c.get(doubled_exp, 0)

    def items(self):
        return sorted(self._c.items())

    def is_zero(self) -> bool:
        return not self._c

    def degree2(self) -> Optional[int]:
        """Largest doubled exponent, or None for the zero polynomial."""
        return max(self._c) if self._c else None

    def eval_one(self) -> int:
        return sum(self._c.values())

    def has_half_powers(self) -> bool:
        return any(k % 2 for k in self._c)

    def shifted(self, doubled_exp: int) -> "HalfLaurent":
        return HalfLaurent({k + doubled_exp: v for k, v in self._c.items()})

    def __add__(self, other: "HalfLaurent") -> "HalfLaurent":
        out = dict(self._c)
        _padd_into(out, other._c)
        return HalfLaurent(out)

    def __sub__(self, other: "HalfLaurent") -> "HalfLaurent":
        out = dict(self._c)
        _padd_into(out, other._c, -1)
        return HalfLaurent(out)

    def __mul__(self, other):
        if isinstance(other, HalfLaurent):
            return HalfLaurent(_pmul(self._c, other._c))
        return HalfLaurent({k: other * v for k, v in self._c.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "HalfLaurent":
        return HalfLaurent({k: -v for k, v in self._c.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, HalfLaurent):
            return self._c == other._c
        if isinstance(other, int):
            return self._c == ({0: other} if other else {})
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self._c.items())))

    def __bool__(self):
        return bool(self._c)

    def __repr__(self):
        return f"HalfLaurent({self.format()})"

    def format(self) -> str:
        """Canonical human/machine form: ascending exponents, q^(k/2) for odd k."""
        if not self._c:
            return "0"
        parts = []
        for k, v in sorted(self._c.items()):
            if k == 0:
                term = str(v)
            else:
                power = str(k // 2) if k % 2 == 0 else f"({k}/2)"
                base = "q" if power == "1" else f"q^{power}"
                if v == 1:
                    term = base
                elif v == -1:
                    term = f"-{base}"
                else:
                    term = f"{v}*{base}"
            parts.append(term)
        out = parts[0]
        for t in parts[1:]:
            out += " - " + t[1:] if t.startswith("-") else " + " + t
        return out

    @classmethod
    def parse_pairs(cls, text: str) -> "HalfLaurent":
        """Inverse of pairs_str: 'k1:c1,k2:c2' over doubled exponents."""
        if text == "-":
            return cls()
        out = {}
        for item in text.split(","):
            k, v = item.split(":")
            out[int(k)] = int(v)
        return cls(out)

    def pairs_str(self) -> str:
        if not self._c:
            return "-"
        return ",".join(f"{k}:{v}" for k, v in sorted(self._c.items()))


class KLCache:
    """Disk-persisted memo of ordinary KL polynomials.

    One record per canonical pair: reduced words of x and y over the affine
    generators, then the doubled-exponent/coefficient list.  The header is
    versioned and carries the root-datum label (and Levi subset) so a cache
    can never be replayed against the wrong system.  Insertion is serialized;
    hits are bit-identical to recomputation because only exact values enter.
    """

    FORMAT = "loewykl-klcache v1"

    def __init__(self, path: str, system_tag: str):
        self.path = path
        self.system_tag = system_tag
        self._records: Dict[Tuple[str, str], str] = {}
        self._dirty = False
        self._lock = threading.Lock()
        if path and os.path.exists(path):
            self._load()

    def _load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            tag = fh.readline().strip()
            if header != self.FORMAT or tag != self.system_tag:
                raise InternalInconsistency(
                    f"cache {self.path} has header {header!r}/{tag!r}, "
                    f"expected {self.FORMAT!r}/{self.system_tag!r}"
                )
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                xw, yw, poly = line.split("|")
                self._records[(xw, yw)] = poly

    def get(self, xw: str, yw: str) -> Optional[str]:
        return self._records.get((xw, yw))

    def put(self, xw: str, yw: str, poly: str) -> None:
        with self._lock:
            key = (xw, yw)
            old = self._records.get(key)
            if old is not None:
                if old != poly:
                    raise InternalInconsistency("cache value changed between runs")
                return
            self._records[key] = poly
            self._dirty = True

    def save(self) -> None:
        if not self.path or not self._dirty:
            return
        with self._lock:
            tmp = self.path + ".tmp"
            os.makedirs(os.path.dirname(self.path) or ".", exist_ok=True)
            with open(tmp, "w", encoding="utf-8") as fh:
                fh.write(self.FORMAT + "\n")
                fh.write(self.system_tag + "\n")
                for (xw, yw) in sorted(self._records):
                    fh.write(f"{xw}|{yw}|{self._records[(xw, yw)]}\n")
            os.replace(tmp, self.path)
            self._dirty = False

    def __len__(self):
        return len(self._records)


class KLEngine:
    """Ordinary Kazhdan-Lusztig polynomials for one affine arrangement.

    Elements are interned to integer ids; lengths and descents are computed
    on integer-scaled interior points, so the inner loops never touch
    Fractions.  Columns are memoized for the engine's lifetime.
    """

    def __init__(self, system: AffineSystem, cache: Optional[KLCache] = None):
        self.system = system
        self.cache = cache
        datum = system.datum
        r = datum.rank

        # Scaled integer base point: u0 * D is integral.
        den = 1
        for f in system.u0:
            den = den * f.denominator // _gcd(den, f.denominator)
        self.D = den
        self._u0s = tuple(int(f * den) for f in system.u0)

        self._elts: list[AffElt] = [system.identity]
        self._ids: Dict[AffElt, int] = {system.identity: 0}
        self._pts: list[Tuple[int, ...]] = [self._u0s]
        self._lens: list[int] = [0]
        ng = system.ngens
        self._lmul: list[list] = [[None] * ng]
        self._rmul: list[list] = [[None] * ng]
        self._desc: list = [0]  # bitmask of left descents

        # Per-generator wall data for integer descent tests.
        self._gen_walls = []
        for kind, data in system._gen_kind:
            if kind == "finite":
                co = datum.pos_roots[datum.simple_indices[data]].coroot
                self._gen_walls.append((co, 0, -1))   # descends iff <pt,co> < 0
            else:
                co = datum.pos_roots[data].coroot
                self._gen_walls.append((co, self.D, +1))  # descends iff <pt,co> > D

        self._sub_coroots = [datum.pos_roots[k].coroot for k in system.pos]

        self._cols: Dict[int, Dict[int, Poly]] = {}
        self._mus: Dict[int, list] = {}
        self._pairs: Dict[Tuple[int, int], Poly] = {}
        self._bruhat_memo: Dict[Tuple[int, int], bool] = {}
        self._words: Dict[int, str] = {}

    # -- interning ------------------------------------------------------------

    def intern(self, x: AffElt) -> int:
        i = self._ids.get(x)
        if i is not None:
            return i
        system = self.system
        datum = system.datum
        r = datum.rank
        pt_fw = datum.apply_fw(x.w, self._u0s)
        shift = datum.rc_to_fw(x.nu)
        pt = tuple(pt_fw[k] + self.D * shift[k] for k in range(r))
        ln = 0
        u0 = self._u0s
        D = self.D
        for co in self._sub_coroots:
            a = sum(u0[k] * co[k] for k in range(r))
            b = sum(pt[k] * co[k] for k in range(r))
            if a > b:
                a, b = b, a
            if a < b:
                ln += b // D - a // D
        mask = 0
        for g, (co, lvl, sgn) in enumerate(self._gen_walls):
            val = sum(pt[k] * co[k] for k in range(r))
            if (sgn < 0 and val < lvl) or (sgn > 0 and val > lvl):
                mask |= 1 << g
        i = len(self._elts)
        self._ids[x] = i
        self._elts.append(x)
        self._pts.append(pt)
        self._lens.append(ln)
        self._lmul.append([None] * system.ngens)
        self._rmul.append([None] * system.ngens)
        self._desc.append(mask)
        return i

    def lmul(self, g: int, i: int) -> int:
        j = self._lmul[i][g]
        if j is None:
            j = self.intern(self.system.mult(self.system.gen_elts[g], self._elts[i]))
            self._lmul[i][g] = j
        return j

    def rmul(self, i: int, g: int) -> int:
        j = self._rmul[i][g]
        if j is None:
            j = self.intern(self.system.mult(self._elts[i], self.system.gen_elts[g]))
            self._rmul[i][g] = j
        return j

    def length_id(self, i: int) -> int:
        return self._lens[i]

    def word_of(self, i: int) -> str:
        w = self._words.get(i)
        if w is None:
            w = self.system.word_str(self._elts[i])
            self._words[i] = w
        return w

    # -- columns ----------------------------------------------------------------

    def first_descent(self, i: int) -> int:
        mask = self._desc[i]
        if not mask:
            raise InternalInconsistency("identity has no descent")
        return (mask & -mask).bit_length() - 1

    def column(self, y: int) -> Dict[int, Poly]:
        col = self._cols.get(y)
        if col is not None:
            return col
        if y == 0:
            col = {0: dict(_ONE)}
            self._cols[0] = col
            return col
        g = self.first_descent(y)
        sy = self.lmul(g, y)
        csy = self.column(sy)
        lens = self._lens
        ly = lens[y]
        # Correction terms, longest first so the per-entry scan can stop early.
        corr = []
        for u, mu_u in self.mu_list(sy):
            su = self.lmul(g, u)
            if lens[su] < lens[u]:
                corr.append((lens[u], mu_u, ly - lens[u], self.column(u).get))
        corr.sort(key=lambda t: -t[0])
        csy_get = csy.get
        lmul_local: Dict[int, int] = {}

        def smul(z: int) -> int:
            j = lmul_local.get(z)
            if j is None:
                j = self.lmul(g, z)
                lmul_local[z] = j
            return j

        supp = set(csy)
        for z in list(csy):
            supp.add(smul(z))
        out: Dict[int, Poly] = {}
        second = []
        for z in supp:
            sz = smul(z)
            lz = lens[z]
            if lens[sz] >= lz:
                second.append((z, sz))
                continue
            acc: Poly = dict(csy_get(sz, _EMPTY))
            pz = csy_get(z)
            if pz:
                for e, c in pz.items():
                    k = e + 2
                    v = acc.get(k, 0) + c
                    if v:
                        acc[k] = v
                    else:
                        del acc[k]
            for lu, mu_u, shift2, colu_get in corr:
                if lu < lz:
                    break
                pzu = colu_get(z)
                if pzu:
                    _padd_into(acc, pzu, -mu_u, shift2)
            if not acc:
                raise InternalInconsistency("vanishing KL polynomial inside the interval")
            if z != y and max(acc) > ly - lz - 1:
                raise InternalInconsistency("KL degree bound violated")
            out[z] = acc
        for z, sz in second:
            out[z] = out[sz]
        if out.get(y) != _ONE:
            raise InternalInconsistency("P_{y,y} != 1")
        self._cols[y] = out
        return out

    def mu_list(self, y: int) -> list:
        ml = self._mus.get(y)
        if ml is None:
            col = self.column(y)
            ly = self._lens[y]
            ml = []
            for z, poly in col.items():
                gap = ly - self._lens[z]
                if gap >= 1:
                    c = poly.get(gap - 1, 0)
                    if c:
                        ml.append((z, c))
            self._mus[y] = ml
        return ml

    # -- public pair interface ----------------------------------------------------

    def _lift(self, x: int, y: int) -> int:
        """Push x up while P_{x,y} is unchanged: toward the descents of y."""
        lens = self._lens
        changed = True
        while changed:
            changed = False
            mask = self._desc[y]
            g = 0
            m = mask
            while m:
                if m & 1:
                    sx = self.lmul(g, x)
                    if lens[sx] > lens[x]:
                        x = sx
                        changed = True
                m >>= 1
                g += 1
            for g in range(self.system.ngens):
                ys = self.rmul(y, g)
                if lens[ys] < lens[y]:
                    xs = self.rmul(x, g)
                    if lens[xs] > lens[x]:
                        x = xs
                        changed = True
        return x

    def bruhat_id(self, x: int, y: int) -> bool:
        if x == 0:
            return True
        lens = self._lens
        if lens[x] > lens[y] or (lens[x] == lens[y] and x != y):
            return False
        if x == y:
            return True
        key = (x, y)
        memo = self._bruhat_memo
        val = memo.get(key)
        if val is None:
            g = self.first_descent(y)
            sy = self.lmul(g, y)
            sx = self.lmul(g, x)
            if lens[sx] < lens[x]:
                val = self.bruhat_id(sx, sy)
            else:
                val = self.bruhat_id(x, sy)
            memo[key] = val
        return val

    def kl_id(self, x: int, y: int) -> Poly:
        lens = self._lens
        if lens[x] > lens[y]:
            return {}
        x = self._lift(x, y)
        if x == y:
            return dict(_ONE)
        if lens[x] >= lens[y]:
            return {}
        key = (x, y)
        hit = self._pairs.get(key)
        if hit is not None:
            return hit
        if self.cache is not None:
            raw = self.cache.get(self.word_of(x), self.word_of(y))
            if raw is not None:
                val = HalfLaurent.parse_pairs(raw)._c
                self._pairs[key] = val
                return val
        if lens[y] - lens[x] <= 2:
            val = dict(_ONE) if self.bruhat_id(x, y) else {}
        else:
            val = self.column(y).get(x, {})
        self._pairs[key] = val
        if self.cache is not None:
            self.cache.put(self.word_of(x), self.word_of(y), HalfLaurent(val).pairs_str())
        return val

    # -- AffElt wrappers ------------------------------------------------------------

    def bruhat_leq(self, x: AffElt, y: AffElt) -> bool:
        return self.bruhat_id(self.intern(x), self.intern(y))

    def kl(self, x: AffElt, y: AffElt) -> HalfLaurent:
        return HalfLaurent(self.kl_id(self.intern(x), self.intern(y)))

    def mu(self, x: AffElt, y: AffElt) -> int:
        xi, yi = self.intern(x), self.intern(y)
        gap = self._lens[yi] - self._lens[xi]
        if gap < 1:
            return 0
        return self.kl_id(xi, yi).get(gap - 1, 0)

    def save_cache(self) -> None:
        if self.cache is not None:
            self.cache.save()

    # -- independent reference implementation (tests) ---------------------------------

    def kl_reference(self, x: AffElt, y: AffElt, choose: Callable[[list], int] = min) -> HalfLaurent:
        """Textbook pair recursion with a configurable descent choice.

        Exponentially slower than the column engine; used to cross-check it
        and to verify descent-choice independence on small pairs.
        """
        memo: Dict[Tuple[int, int], Poly] = {}
        interval_memo: Dict[int, set] = {}
        lens = self._lens

        def lower_interval(y: int) -> set:
            got = interval_memo.get(y)
            if got is not None:
                return got
            if y == 0:
                got = {0}
            else:
                g = self.first_descent(y)
                sy = self.lmul(g, y)
                base = lower_interval(sy)
                got = base | {self.lmul(g, z) for z in base}
            interval_memo[y] = got
            return got

        def rec(xi: int, yi: int) -> Poly:
            if xi == yi:
                return dict(_ONE)
            if lens[xi] >= lens[yi] or not self.bruhat_id(xi, yi):
                return {}
            key = (xi, yi)
            if key in memo:
                return memo[key]
            descents = [g for g in range(self.system.ngens) if self._desc[yi] >> g & 1]
            g = choose(descents)
            sy = self.lmul(g, yi)
            sx = self.lmul(g, xi)
            c = 1 if lens[sx] < lens[xi] else 0
            acc: Poly = {}
            _padd_into(acc, rec(sx, sy), 1, 2 * (1 - c))
            _padd_into(acc, rec(xi, sy), 1, 2 * c)
            for z in lower_interval(sy):
                if lens[self.lmul(g, z)] < lens[z] and self.bruhat_id(xi, z):
                    gap = lens[sy] - lens[z]
                    if gap >= 1:
                        mz = rec(z, sy).get(gap - 1, 0)
                        if mz:
                            _padd_into(acc, rec(xi, z), -mz, lens[yi] - lens[z])
            memo[key] = acc
            return acc

        return HalfLaurent(rec(self.intern(x), self.intern(y)))


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


_ENGINES: Dict = {}


def get_kl_engine(system: AffineSystem, cache_dir: Optional[str] = None) -> KLEngine:
    """One engine per (system, cache location); cache_dir=None keeps it in memory."""
    I_key = system.I if not system.is_full else None
    key = (system.datum.label, I_key, os.path.abspath(cache_dir) if cache_dir else None)
    eng = _ENGINES.get(key)
    if eng is None:
        cache = None
        if cache_dir:
            tag = f"system: {system.datum.label} I={','.join(map(str, system.I)) or '-'}" if not system.is_full else f"system: {system.datum.label} I=full"
            fname = f"kl_{system.datum.label}_{'full' if system.is_full else 'I' + ''.join(map(str, system.I))}.cache"
            cache = KLCache(os.path.join(cache_dir, fname), tag)
        eng = KLEngine(system, cache)
        _ENGINES[key] = eng
    return eng
