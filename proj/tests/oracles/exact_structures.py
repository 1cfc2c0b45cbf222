"""Brute-force oracles on the exact monomial class.

Hyponormality commutator for conj(z1) z2, Halmos-Wallen chains of partial
permutations, doubly-commuting test via explicit projectors, and the
closed-form shift decay for b_1/2.
"""
import itertools
from fractions import Fraction

import numpy as np


def box(d):
    return list(itertools.product(*(range(x + 1) for x in d)))


def toeplitz_monomial(g, d):
    """Compression of T_{z^g}: z^k -> z^{k+g} when k+g >= 0 and inside the box."""
    basis = box(d)
    M = np.zeros((len(basis), len(basis)))
    for c, k in enumerate(basis):
        t = tuple(a + b for a, b in zip(k, g))
        if t in basis:
            M[basis.index(t), c] = 1
    return M


def true_commutator_monomial(g, d):
    """Compression of T*T - TT* for T = T_{z^g}, using infinite-dimensional actions."""
    basis = box(d)
    n = len(basis)
    C = np.zeros((n, n))
    for i, k in enumerate(basis):
        # T z^k = z^{k+g} or 0; T* z^k = z^{k-g} or 0; both diagonal in the monomial basis
        tk = all(a + b >= 0 for a, b in zip(k, g))
        tsk = all(a - b >= 0 for a, b in zip(k, g))
        C[i, i] = (1 if tk else 0) - (1 if tsk else 0)
    return C


def chains(M):
    """Chain lengths of a partial permutation matrix: heads are columns with no preimage."""
    n = M.shape[0]
    image = {int(np.argmax(M[:, c])): c for c in range(n) if M[:, c].any()}
    lengths = []
    heads = []
    for v in range(n):
        if v in image:
            continue
        heads.append(v)
        p, cur = 1, v
        while M[:, cur].any():
            cur = int(np.argmax(M[:, cur]))
            p += 1
        lengths.append(p)
    return heads, lengths


def doubly_commuting_bruteforce(gens, d, guard):
    basis = box(d)
    idx = {k: i for i, k in enumerate(basis)}
    n = len(basis)
    inS = [any(all(a >= b for a, b in zip(k, g)) for g in gens) for k in basis]
    P = np.diag([1.0 if s else 0.0 for s in inS])
    nv = len(d)
    Mz = []
    for i in range(nv):
        # shift on a box one larger so interior images are exact
        M = np.zeros((n, n))
        for c, k in enumerate(basis):
            t = list(k)
            t[i] += 1
            if tuple(t) in idx:
                M[idx[tuple(t)], c] = 1
        Mz.append(M)
    bad = []
    for c, h in enumerate(basis):
        if not inS[c] or any(h[i] > d[i] - guard for i in range(nv)):
            continue
        e = np.zeros(n)
        e[c] = 1
        for i in range(nv):
            for j in range(nv):
                if i == j:
                    continue
                lhs = P @ Mz[i].T @ Mz[j] @ e
                rhs = Mz[j] @ P @ Mz[i].T @ e
                if np.abs(lhs - rhs).max() > 0:
                    bad.append((h, i + 1, j + 1))
    return bad


def poly_mul(a, b):
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            out[ka + kb] = out.get(ka + kb, 0) + ca * cb
    return out


def main():
    print("hyponormal, conj(z1) z2 on (2,2):")
    C = true_commutator_monomial((-1, 1), (2, 2))
    w = np.linalg.eigvalsh(C)
    print(f"  eigenvalues {sorted(set(np.round(w, 12)))}, min {w.min()}")
    C1 = true_commutator_monomial((-1,), (3,))
    print(f"  conj(z1) on d=3: min eig {np.linalg.eigvalsh(C1).min()}, diag {np.diag(C1)}")

    print("chains:")
    for g, d in (((1,), (3,)), ((-1, 1), (2, 2))):
        heads, lengths = chains(toeplitz_monomial(g, d))
        basis = box(d)
        blocks = {}
        for p in lengths:
            blocks[p] = blocks.get(p, 0) + 1
        print(f"  g={g} d={d}: heads {[basis[h] for h in heads]} lengths {lengths} blocks {sorted(blocks.items())}")

    print("doubly commuting on box (4,4), guard 1:")
    for gens in ([(1, 1)], [(1, 0), (0, 1)], [(0, 0)]):
        bad = doubly_commuting_bruteforce(gens, (4, 4), 1)
        print(f"  generators {gens}: {len(bad)} mismatches, first {bad[:1]}")

    print("shift decay, b_1/2 with f = 1 (exact power series in Fractions):")
    # conj(b)(z) on the circle = (1/z - 1/2)/(1 - z^{-1}/2) has only nonpositive powers;
    # P(conj(b)^m * 1) is its constant coefficient (-1/2)^m.
    K = 60
    half = Fraction(1, 2)
    cb = {0: -half}
    for k in range(1, K):
        cb[-k] = half ** (k - 1) * (1 - half * half)
    g = {0: Fraction(1)}
    for m in range(1, 21):
        g = poly_mul(cb, g)
        g = {k: c for k, c in g.items() if k >= -K}
        const = g.get(0, 0)
        if m in (1, 2, 3, 20):
            print(f"  m={m}: constant coefficient {const} |.| = {float(abs(const))!r}")


if __name__ == "__main__":
    main()
