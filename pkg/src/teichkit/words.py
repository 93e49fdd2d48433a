"""Reduced words in a free group.

A word is a tuple of nonzero ints; ``k`` is the k-th generator and ``-k`` its
inverse.  All functions return freely reduced words.
"""
from __future__ import annotations

Word = tuple


def reduce(w):
    out = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inv(w):
    return tuple(-x for x in reversed(w))


def mul(*ws):
    out = []
    for w in ws:
        for x in w:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return tuple(out)


def conj(g, w):
    """g w g^-1."""
    return mul(g, w, inv(g))


def cyclic_split(w):
    """Return (u, c) with w = u c u^-1 and c cyclically reduced."""
    w = reduce(w)
    k = 0
    while k < len(w) // 2 and w[k] == -w[-1 - k]:
        k += 1
    return w[:k], w[k:len(w) - k]


def primitive_root(c):
    n = len(c)
    for d in range(1, n + 1):
        if n % d == 0 and c[:d] * (n // d) == c:
            return c[:d]
    return c


def canonical_cyclic(w, unoriented=False):
    """Minimal rotation of the cyclic reduction (optionally also of the inverse)."""
    _, c = cyclic_split(w)
    cands = [c[k:] + c[:k] for k in range(len(c))] or [()]
    if unoriented:
        ci = inv(c)
        cands += [ci[k:] + ci[:k] for k in range(len(ci))]
    return min(cands, key=lambda x: (len(x), x))


def are_conjugate(a, b):
    return canonical_cyclic(a) == canonical_cyclic(b)


def conjugators(u, v):
    """Solutions of g u g^-1 = v for nontrivial u.

    Returns (g0, z, p) such that the solutions are exactly g0 z^m p^-1,
    or None when u and v are not conjugate.
    """
    p, c = cyclic_split(u)
    pp, cc = cyclic_split(v)
    if len(c) != len(cc):
        return None
    if not c:
        return None
    z = primitive_root(c)
    for k in range(len(z)):
        if c[k:] + c[:k] == cc:
            s = c[:k]
            # cc = s^-1 c s, so g = pp s^-1 z^m p^-1
            g0 = mul(pp, inv(s))
            return g0, z, p
    return None


def simultaneous_conjugator(pairs, search=None):
    """Find g with g a g^-1 = b for all (a, b) in pairs, or None.

    The first nontrivial pair fixes g up to powers of its primitive root;
    the power is found by scanning, the window is bounded by word lengths.
    """
    pairs = [(reduce(a), reduce(b)) for a, b in pairs]
    base = next(((a, b) for a, b in pairs if a), None)
    if base is None:
        return () if all(not b for _, b in pairs) else None
    sol = conjugators(*base)
    if sol is None:
        return None
    g0, z, p = sol
    total = sum(len(a) + len(b) for a, b in pairs)
    m_max = search if search is not None else total // max(len(z), 1) + 2
    for m in sorted(range(-m_max, m_max + 1), key=abs):
        zm = z * m if m >= 0 else inv(z) * (-m)
        g = mul(g0, zm, inv(p))
        if all(conj(g, a) == b for a, b in pairs):
            return g
    return None
