"""Loewy layer tables of parabolically induced modules over Frobenius kernels.

For a p-regular weight lam and a standard parabolic given by a subset I of
the simple roots, the socle-layer multiplicities of the induced module with
simple Levi input of highest weight lam are read off from

    sum_j q^((rd(mu,lam)-j)/2) [layer_j : mu]
        = sum_{nu in Levi orbit of lam} Q^{mu,nu} (-1)^{rd_I(nu,lam)} PhatI_{nu,lam},

where Q and PhatI are the inverse-side and Levi character-side periodic
polynomials.  Layers are indexed from 0 at the socle; rigidity makes the
radical series the same table read upside down, so the table exposes both
views.  The module's head, its Loewy length l(w^I)+1, the placement of the
W^I factors, and a dimension identity are all predicted independently and
verified against the table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .alcove import box_window, decompose, is_regular, normalized_point, rd, rd_levi
from .errors import (
    DimensionMismatch,
    InternalInconsistency,
    NotRegular,
    PredictionMismatch,
)
from .klpoly import HalfLaurent, Poly, _pmul
from .periodic import PeriodicEngine, get_periodic_engine
from .rootsys import RootDatum, parabolic_datum, _vadd, _vscale, _vsub

__all__ = [
    "LoewyTable",
    "layer_table",
    "loewy_length",
    "head_weight",
    "head_weight_twisted_form",
    "wI_factor_placements",
    "dimension_check",
]

Weight = Tuple[int, ...]


@dataclass
class LoewyTable:
    """Socle-layer table: (layer index j from 0 at the socle, weight) -> mult.

    Invariants enforced at construction: layer 0 is exactly {lam: 1}, the top
    layer is exactly {head: 1}, entries vanish unless j == rd(mu,lam) mod 2,
    and 0 <= j <= l(w^I).
    """

    label: str
    I: Tuple[int, ...]
    lam: Weight
    p: int
    window_bound: Tuple[int, ...]
    entries: Dict[Tuple[int, Weight], int]
    alcove_words: Dict[Weight, str]
    rd_of: Dict[Weight, int]
    predicted_length: int

    @property
    def loewy_length(self) -> int:
        return 1 + max(j for j, _ in self.entries)

    def socle_layers(self) -> List[Dict[Weight, int]]:
        layers: List[Dict[Weight, int]] = [dict() for _ in range(self.loewy_length)]
        for (j, mu), m in self.entries.items():
            layers[j][mu] = m
        return layers

    def radical_layers(self) -> List[Dict[Weight, int]]:
        """Radical series view; by rigidity it is the socle view reversed."""
        return list(reversed(self.socle_layers()))

    def factor_multiset(self) -> Dict[Weight, int]:
        out: Dict[Weight, int] = {}
        for (_, mu), m in self.entries.items():
            out[mu] = out.get(mu, 0) + m
        return out

    def to_json_dict(self) -> dict:
        layers = []
        for j, layer in enumerate(self.socle_layers()):
            layers.append(
                {
                    "j": j,
                    "factors": [
                        {
                            "weight": list(mu),
                            "alcove_word": self.alcove_words[mu],
                            "mult": layer[mu],
                        }
                        for mu in sorted(layer)
                    ],
                }
            )
        return {
            "type": self.label,
            "I": list(self.I),
            "p": self.p,
            "lambda": list(self.lam),
            "loewy_length": self.loewy_length,
            "layers": layers,
        }

    def to_csv_rows(self) -> List[Tuple[int, str, int]]:
        rows = []
        for j, layer in enumerate(self.socle_layers()):
            for mu in sorted(layer):
                rows.append((j, ",".join(map(str, mu)), layer[mu]))
        return rows


def head_weight(datum: RootDatum, lam: Sequence[int], p: int,
                I: Iterable[int] = ()) -> Weight:
    """Highest weight of the head: the dual of the simple with highest weight
    -w_I lam0 - p lam1 + 2(p-1) rho_P, resolved via L(nu)^* = L(-w0 nu0 - p nu1)."""
    pd = parabolic_datum(datum, I)
    dec = decompose(lam, p)
    nu = _vadd(
        _vsub(_vscale(-1, datum.apply_fw(pd.w_I, dec.lam0)), _vscale(p, dec.lam1)),
        _vscale(p - 1, pd.two_rho_P),
    )
    nd = decompose(nu, p)
    return _vsub(_vscale(-1, datum.apply_fw(datum.w0, nd.lam0)), _vscale(p, nd.lam1))


def head_weight_twisted_form(datum: RootDatum, lam: Sequence[int], p: int,
                             I: Iterable[int] = ()) -> Weight:
    """The second displayed form of the head weight:
    (w^I . lam) + p(lam1 - 2 rho_P - w_I lam1 + w0 nu1' - nu1') where
    nu' = (-w_I) . lam; used as a numerical cross-check of head_weight."""
    pd = parabolic_datum(datum, I)
    dec = decompose(lam, p)
    wI_dot = datum.dot_finite(pd.w_upper_I, lam)
    neg_wI_dot = _vsub(
        _vscale(-1, datum.apply_fw(pd.w_I, _vadd(lam, datum.rho))), datum.rho
    )
    nu1 = decompose(neg_wI_dot, p).lam1
    shift = _vsub(
        _vadd(
            _vsub(dec.lam1, pd.two_rho_P),
            _vsub(datum.apply_fw(datum.w0, nu1), nu1),
        ),
        datum.apply_fw(pd.w_I, dec.lam1),
    )
    return _vadd(wI_dot, _vscale(p, shift))


def layer_table(datum: RootDatum, I: Iterable[int], lam: Sequence[int], p: int,
                cache_dir: Optional[str] = None) -> LoewyTable:
    """Compute the full socle-layer table of the induced module.

    Candidates run over the sound superset box window; weights outside the
    true support simply receive the zero polynomial.
    """
    lam = tuple(int(c) for c in lam)
    if p < datum.coxeter:
        raise NotRegular(f"p={p} < h={datum.coxeter}: no p-regular weights exist")
    if not is_regular(datum, lam, p):
        raise NotRegular(f"{lam} is p-singular for p={p}")
    I = tuple(sorted(set(I)))
    pd = parabolic_datum(datum, I)
    full = get_periodic_engine(datum, cache_dir=cache_dir)
    levi = get_periodic_engine(datum, I, cache_dir=cache_dir)

    cands = box_window(datum, lam, p)
    levi_orbit = box_window(datum, lam, p, I)

    # Levi side: character-expansion coefficients of the simple Levi input.
    levi_terms = []
    for nu in levi_orbit:
        ph = levi.phat_poly(levi.alcove_elt(nu, p), levi.alcove_elt(lam, p))
        if ph:
            sgn = -1 if rd_levi(datum, I, nu, lam, p) % 2 else 1
            levi_terms.append((nu, sgn, ph))

    elt_of = {mu: full.alcove_elt(mu, p) for mu in cands}
    cand_elts = sorted(elt_of.values())

    # One inverse-side column per Levi orbit point.
    rhs: Dict[Weight, Poly] = {mu: {} for mu in cands}
    for nu, sgn, ph in levi_terms:
        col = full.q_column(elt_of[nu], cand_elts)
        for mu in cands:
            q_mu_nu = col.get(elt_of[mu])
            if not q_mu_nu:
                continue
            prod = _pmul(q_mu_nu, ph)
            acc = rhs[mu]
            for k, c in prod.items():
                v = acc.get(k, 0) + sgn * c
                if v:
                    acc[k] = v
                else:
                    acc.pop(k, None)

    lwI = pd.length_w_upper_I
    entries: Dict[Tuple[int, Weight], int] = {}
    words: Dict[Weight, str] = {}
    rd_of: Dict[Weight, int] = {}
    for mu in cands:
        poly = rhs[mu]
        if not poly:
            continue
        r = rd(datum, mu, lam, p)
        rd_of[mu] = r
        words[mu] = full.system.word_str(elt_of[mu])
        for k, c in poly.items():
            if k % 2:
                raise InternalInconsistency(f"half power q^({k}/2) in the layer polynomial of {mu}")
            j = r - k
            if c < 0 or j < 0 or j > lwI:
                raise InternalInconsistency(
                    f"entry mult={c} at layer {j} for mu={mu} (rd={r}, l(w^I)={lwI})"
                )
            entries[(j, mu)] = c

    table = LoewyTable(
        label=datum.label,
        I=I,
        lam=lam,
        p=p,
        window_bound=tuple((p - 1) * c for c in datum.two_rho_rc),
        entries=entries,
        alcove_words=words,
        rd_of=rd_of,
        predicted_length=lwI + 1,
    )
    _validate_table(datum, table)
    return table


def _validate_table(datum: RootDatum, table: LoewyTable) -> None:
    layers = table.socle_layers()
    if layers[0] != {table.lam: 1}:
        raise InternalInconsistency(f"socle layer is {layers[0]}, expected {{{table.lam}: 1}}")
    head = head_weight(datum, table.lam, table.p, table.I)
    if layers[-1] != {head: 1}:
        raise InternalInconsistency(f"top layer is {layers[-1]}, expected {{{head}: 1}}")
    for (j, mu) in table.entries:
        if (j - table.rd_of[mu]) % 2:
            raise InternalInconsistency(f"parity violation at layer {j}, mu={mu}")


def loewy_length(table_or_datum, *args, **kwargs) -> Tuple[int, int]:
    """Return (computed, predicted) Loewy length of a table; raise on mismatch.

    Accepts a LoewyTable, or (datum, I, lam, p) to compute one first.
    """
    if isinstance(table_or_datum, LoewyTable):
        table = table_or_datum
    else:
        table = layer_table(table_or_datum, *args, **kwargs)
    got = table.loewy_length
    if got != table.predicted_length:
        raise PredictionMismatch(
            f"Loewy length {got} != predicted l(w^I)+1 = {table.predicted_length}"
        )
    return got, table.predicted_length


def wI_factor_placements(datum: RootDatum, lam: Sequence[int], p: int,
                         I: Iterable[int] = (),
                         table: Optional[LoewyTable] = None,
                         cache_dir: Optional[str] = None) -> List[dict]:
    """Predicted factor of each minimal coset representative w: highest weight
    (w.lam)0 + p (w^{-1} . (w.lam)1) in socle layer l(w); verified against the
    table (PredictionMismatch if any predicted factor is absent)."""
    pd = parabolic_datum(datum, I)
    if table is None:
        table = layer_table(datum, I, lam, p, cache_dir=cache_dir)
    out = []
    for w in pd.min_reps:
        wlam = datum.dot_finite(w, lam)
        dec = decompose(wlam, p)
        inner = datum.dot_finite(datum.inv(w), dec.lam1)
        weight = _vadd(dec.lam0, _vscale(p, inner))
        layer = datum.length(w)
        mult = table.entries.get((layer, tuple(weight)), 0)
        if mult < 1:
            raise PredictionMismatch(
                f"factor {weight} predicted in layer {layer} for w={datum.word(w)} is absent"
            )
        out.append(
            {
                "w": datum.word(w),
                "weight": tuple(weight),
                "layer": layer,
                "mult": mult,
            }
        )
    return out


# -- dimension identity --------------------------------------------------------


def _bounded_sum_counts(datum: RootDatum, root_indices: Sequence[int], p: int) -> Dict[Weight, int]:
    """Number of ways to write each lattice vector as sum_beta c_beta * beta
    with 0 <= c_beta <= p-1, in simple-root coordinates."""
    counts: Dict[Weight, int] = {(0,) * datum.rank: 1}
    for k in root_indices:
        rc = datum.pos_roots[k].rc
        new: Dict[Weight, int] = {}
        for tau, n in counts.items():
            for c in range(p):
                key = _vadd(tau, _vscale(c, rc))
                new[key] = new.get(key, 0) + n
        counts = new
    return counts


def _formal_dim(datum: RootDatum, eng: PeriodicEngine, I: Optional[Tuple[int, ...]],
                mu: Weight, p: int) -> int:
    """Dimension of the simple module of highest weight mu from the character
    expansion: per weight eta, sum over orbit points nu of
    (-1)^rd P-hat(1) * (multiplicity of eta in the induced character of nu)."""
    root_indices = eng.system.pos
    counts = _bounded_sum_counts(datum, root_indices, p)
    orbit = box_window(datum, mu, p, I)
    terms = []
    for nu in orbit:
        ph = eng.phat_poly(eng.alcove_elt(nu, p), eng.alcove_elt(mu, p))
        if ph:
            val = sum(ph.values())
            sgn = -1 if eng.dist(eng.alcove_elt(nu, p), eng.alcove_elt(mu, p)) % 2 else 1
            nu_rc = datum.fw_to_rc(_vsub(mu, nu))
            terms.append((tuple(int(c) for c in nu_rc), sgn * val))
    total = 0
    bound = tuple((p - 1) * c for c in datum.two_rho_rc)
    sub = set(eng.system.sub0)
    ranges = [range(0, bound[i] + 1) if i in sub else range(0, 1) for i in range(datum.rank)]
    for a in itertools.product(*ranges):
        m_eta = 0
        for nu_rc, coeff in terms:
            diff = _vsub(a, nu_rc)
            if all(x >= 0 for x in diff):
                n = counts.get(diff)
                if n:
                    m_eta += coeff * n
        if m_eta < 0:
            raise InternalInconsistency(f"negative weight multiplicity at offset {a} below {mu}")
        total += m_eta
    return total


def dimension_check(table: LoewyTable, cache_dir: Optional[str] = None) -> dict:
    """Verify sum of mult * dim over the table against p^(#radical roots)
    times the Levi simple dimension; raises DimensionMismatch on failure."""
    from .rootsys import build_root_datum

    datum = build_root_datum(table.label)
    p = table.p
    full = get_periodic_engine(datum, cache_dir=cache_dir)
    levi = get_periodic_engine(datum, table.I, cache_dir=cache_dir)
    pd = parabolic_datum(datum, table.I)

    dims: Dict[Weight, int] = {}
    lhs = 0
    for (j, mu), m in sorted(table.entries.items()):
        if mu not in dims:
            dims[mu] = _formal_dim(datum, full, None, mu, p)
        lhs += m * dims[mu]
    dim_levi = _formal_dim(datum, levi, table.I, table.lam, p)
    n_rad = len(datum.pos_roots) - len(pd.pos_I)
    rhs = (p ** n_rad) * dim_levi
    report = {
        "ok": lhs == rhs,
        "sum_of_factor_dims": lhs,
        "p_power_times_levi_dim": rhs,
        "levi_simple_dim": dim_levi,
        "radical_root_count": n_rad,
        "factor_dims": {",".join(map(str, mu)): d for mu, d in sorted(dims.items())},
    }
    if lhs != rhs:
        raise DimensionMismatch(f"dimension identity fails: {lhs} != {rhs}")
    return report
