"""Multivariate polynomial gcd.

Content extraction plus a recursive subresultant remainder sequence in the
most frequent shared variable.  Cheap exits come first: constants, monomial
content, trial division, and a modular test that certifies coprimality by
specializing all but one variable at random points mod a large prime.
"""

from __future__ import annotations

import random
from typing import Dict, List, Optional

from .chart import Chart
from .poly import IntTerms, divmod_terms, mul_terms, pow_terms, primitive, add_terms

_PRIME = (1 << 61) - 1
_rng = random.Random(0x5EED)


def _exact(a: IntTerms, b: IntTerms, chart: Chart) -> Optional[IntTerms]:
    if len(b) == 1 and 0 in b:
        cb = b[0]
        out = {}
        for k, c in a.items():
            q, r = divmod(c, cb)
            if r:
                return None
            out[k] = q
        return out
    res = divmod_terms(a, b, chart, exact=True)
    return None if res is None else res[0]


def _exact_strict(a: IntTerms, b: IntTerms, chart: Chart) -> IntTerms:
    q = _exact(a, b, chart)
    if q is None:
        raise ArithmeticError("internal error: expected exact polynomial division")
    return q


def _used(terms: IntTerms, chart: Chart) -> List[int]:
    acc = 0
    for k in terms:
        acc |= k
    return [i for i, sh in enumerate(chart.shifts) if (acc >> sh) & chart.field_mask]


def _mono_content(terms: IntTerms, chart: Chart, positions) -> int:
    key = 0
    for i in positions:
        m = min(chart.exponent(k, i) for k in terms)
        if m:
            key += chart.unit(i, m)
    return key


def _is_const(t: IntTerms) -> bool:
    return len(t) == 1 and 0 in t


# -- univariate views -------------------------------------------------------


def _split(terms: IntTerms, chart: Chart, i: int) -> Dict[int, IntTerms]:
    """Coefficients of ``terms`` as a polynomial in symbol ``i``."""
    out: Dict[int, IntTerms] = {}
    for k, c in terms.items():
        e = chart.exponent(k, i)
        out.setdefault(e, {})[k - chart.unit(i, e) if e else k] = c
    return out


def _join(upoly: Dict[int, IntTerms], chart: Chart, i: int) -> IntTerms:
    out: IntTerms = {}
    for e, coeff in upoly.items():
        shift = chart.unit(i, e) if e else 0
        for k, c in coeff.items():
            out[k + shift] = c
    return out


def _prem(F: Dict[int, IntTerms], G: Dict[int, IntTerms], chart: Chart) -> Dict[int, IntTerms]:
    dF, dG = max(F), max(G)
    lcG = G[dG]
    R = dict(F)
    e = dF - dG + 1
    while R and max(R) >= dG:
        dR = max(R)
        lcR = R[dR]
        shift = dR - dG
        newR: Dict[int, IntTerms] = {}
        for d, c in R.items():
            if d == dR:
                continue
            newR[d] = mul_terms(c, lcG)
        for d, c in G.items():
            if d == dG:
                continue
            dd = d + shift
            prod = mul_terms(c, lcR)
            cur = newR.get(dd)
            merged = add_terms(cur, prod, 1, -1) if cur else {k: -v for k, v in prod.items()}
            if merged:
                newR[dd] = merged
            else:
                newR.pop(dd, None)
        R = {d: c for d, c in newR.items() if c}
        e -= 1
    if e > 0 and R:
        f = pow_terms(lcG, e)
        R = {d: mul_terms(c, f) for d, c in R.items()}
    return R


# -- content and gcd --------------------------------------------------------


def _content_in(upoly: Dict[int, IntTerms], chart: Chart) -> IntTerms:
    coeffs = sorted(upoly.values(), key=len)
    g = primitive(coeffs[0])[1]
    for c in coeffs[1:]:
        if _is_const(g):
            break
        g = gcd_terms(g, c, chart)
    return g


def _coprime_certificate(a: IntTerms, b: IntTerms, chart: Chart, shared: List[int]) -> bool:
    """True if a modular specialization proves gcd(a, b) is constant."""
    p = _PRIME
    for v in shared:
        point = {i: _rng.randrange(2, p - 1) for i in range(chart.nsym) if i != v}
        ua = _specialize(a, chart, v, point)
        ub = _specialize(b, chart, v, point)
        if ua is None or ub is None:
            return False
        if _univariate_gcd_degree(ua, ub) > 0:
            return False
    return True


def _specialize(terms: IntTerms, chart: Chart, v: int, point) -> Optional[Dict[int, int]]:
    p = _PRIME
    out: Dict[int, int] = {}
    cache = {}
    for k, c in terms.items():
        val = c % p
        for i, x in point.items():
            e = chart.exponent(k, i)
            if e:
                key = (i, e)
                pw = cache.get(key)
                if pw is None:
                    pw = cache[key] = pow(x, e, p)
                val = val * pw % p
        d = chart.exponent(k, v)
        out[d] = (out.get(d, 0) + val) % p
    deg = max(chart.exponent(k, v) for k in terms)
    if out.get(deg, 0) == 0:
        return None  # leading coefficient vanished; specialization unlucky
    return {d: c for d, c in out.items() if c}


def _univariate_gcd_degree(a: Dict[int, int], b: Dict[int, int]) -> int:
    p = _PRIME
    A = [a.get(i, 0) for i in range(max(a) + 1)]
    B = [b.get(i, 0) for i in range(max(b) + 1)]
    while B:
        if len(A) < len(B):
            A, B = B, A
            continue
        inv = pow(B[-1], p - 2, p)
        while len(A) >= len(B) and A:
            f = A[-1] * inv % p
            off = len(A) - len(B)
            for j, c in enumerate(B):
                A[off + j] = (A[off + j] - f * c) % p
            while A and A[-1] == 0:
                A.pop()
        A, B = B, A
    return len(A) - 1


def gcd_terms(a: IntTerms, b: IntTerms, chart: Chart) -> IntTerms:
    """gcd of two integer polynomials, primitive with positive leading coefficient."""
    if not a:
        return primitive(b)[1] if b else {}
    if not b:
        return primitive(a)[1]
    a = primitive(a)[1]
    b = primitive(b)[1]
    if a == b:
        return a
    if _is_const(a) or _is_const(b):
        return {0: 1}
    pa, pb = _used(a, chart), _used(b, chart)
    all_pos = sorted(set(pa) | set(pb))
    ma = _mono_content(a, chart, pa)
    mb = _mono_content(b, chart, pb)
    mono = 0
    for i in all_pos:
        e = min(chart.exponent(ma, i), chart.exponent(mb, i))
        if e:
            mono += chart.unit(i, e)
    if ma:
        a = {k - ma: c for k, c in a.items()}
    if mb:
        b = {k - mb: c for k, c in b.items()}
    core = _gcd_core(a, b, chart)
    return {k + mono: c for k, c in core.items()} if mono else core


def _gcd_core(a: IntTerms, b: IntTerms, chart: Chart) -> IntTerms:
    # a, b primitive, free of monomial content
    if _is_const(a) or _is_const(b):
        return {0: 1}
    if a == b:
        return a
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    if _exact(big, small, chart) is not None:
        return small
    pa, pb = set(_used(a, chart)), set(_used(b, chart))
    shared = sorted(pa & pb)
    if not shared or _coprime_certificate(a, b, chart, shared):
        return {0: 1}
    # a symbol present in only one argument can only enter through content
    for i in sorted(pa - pb):
        a = _content_in(_split(a, chart, i), chart)
        return gcd_terms(a, b, chart)
    for i in sorted(pb - pa):
        b = _content_in(_split(b, chart, i), chart)
        return gcd_terms(a, b, chart)
    counts = {i: 0 for i in shared}
    for t in (a, b):
        for k in t:
            for i in shared:
                if chart.exponent(k, i):
                    counts[i] += 1
    v = max(shared, key=lambda i: (counts[i], -i))
    return _gcd_in(a, b, chart, v)


def _gcd_in(a: IntTerms, b: IntTerms, chart: Chart, v: int) -> IntTerms:
    A = _split(a, chart, v)
    B = _split(b, chart, v)
    ca = _content_in(A, chart)
    cb = _content_in(B, chart)
    c = gcd_terms(ca, cb, chart)
    if not _is_const(ca):
        A = {d: _exact_strict(t, ca, chart) for d, t in A.items()}
    if not _is_const(cb):
        B = {d: _exact_strict(t, cb, chart) for d, t in B.items()}
    if max(A) < max(B):
        A, B = B, A
    if max(B) == 0:
        g: IntTerms = {0: 1}
    else:
        g = _subresultant(A, B, chart, v)
    out = mul_terms(c, g)
    return primitive(out)[1]


def _subresultant(A, B, chart: Chart, v: int) -> IntTerms:
    g: IntTerms = {0: 1}
    h: IntTerms = {0: 1}
    while True:
        d = max(A) - max(B)
        R = _prem(A, B, chart)
        if not R:
            break
        if max(R) == 0:
            return {0: 1}
        A = B
        div = mul_terms(g, pow_terms(h, d)) if d else g
        B = {e: _exact_strict(t, div, chart) for e, t in R.items()} if not _is_const(div) or div[0] != 1 else R
        g = A[max(A)]
        if d == 0:
            pass
        elif d == 1:
            h = g
        else:
            h = _exact_strict(pow_terms(g, d), pow_terms(h, d - 1), chart)
    cont = _content_in(B, chart)
    if not _is_const(cont):
        B = {e: _exact_strict(t, cont, chart) for e, t in B.items()}
    return primitive(_join(B, chart, v))[1]
