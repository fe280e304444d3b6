"""Slow, loop-based reference implementations used only by the tests.

Each one is written from the defining formula with no shared code from the
package, so agreement is evidence rather than tautology.
"""
import itertools
import math

import numpy as np


def to_matrix(a, n):
    A = np.zeros((n, n))
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            A[i, j] = A[j, i] = a[k]
            k += 1
    return A


def normalize(A):
    n = len(A)
    out = np.zeros((n, n))
    deg = [sum(A[i][j] for j in range(n)) + 1.0 for i in range(n)]
    for i in range(n):
        for j in range(n):
            a_hat = A[i][j] + (1.0 if i == j else 0.0)
            out[i, j] = a_hat / math.sqrt(deg[i] * deg[j])
    return out


def smoothness_pairwise(A, X):
    n = len(A)
    d = [sum(A[i][j] for j in range(n)) for i in range(n)]
    total = 0.0
    for i in range(n):
        for j in range(n):
            if A[i][j] == 0:
                continue
            diff = np.asarray(X[i]) / math.sqrt(d[i]) - np.asarray(X[j]) / math.sqrt(d[j])
            total += A[i][j] * float(diff @ diff)
    return total / 2


def smoothness_trace(A, X):
    """tr(X^T D^-1/2 (D - A) D^-1/2 X) with isolated nodes dropped."""
    A = np.asarray(A, dtype=float)
    X = np.asarray(X, dtype=float)
    d = A.sum(axis=1)
    keep = d > 0
    A, X, d = A[np.ix_(keep, keep)], X[keep], d[keep]
    Dm = np.diag(1 / np.sqrt(d))
    L = Dm @ (np.diag(d) - A) @ Dm
    return float(np.trace(X.T @ L @ X))


def gcn_logits(w0, w1, A, X):
    N = normalize(A)
    H = np.maximum(N @ (np.asarray(X) @ w0), 0)
    return H, N @ (H @ w1)


def auc_pairs(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    credit = 0.0
    for p, q in itertools.product(pos, neg):
        credit += 1.0 if p > q else 0.5 if p == q else 0.0
    return credit / (len(pos) * len(neg))


def ap_steps(scores, labels):
    order = sorted(range(len(scores)), key=lambda k: (-scores[k], k))
    hits, precisions = 0, []
    for rank, k in enumerate(order, start=1):
        if labels[k]:
            hits += 1
            precisions.append(hits / rank)
    return sum(precisions) / len(precisions)


def cross_entropy(logits, labels, nodes):
    total = 0.0
    for i in nodes:
        row = logits[i]
        m = max(row)
        lse = m + math.log(sum(math.exp(v - m) for v in row))
        total += lse - row[labels[i]]
    return total / len(nodes)


def cosine(x, y):
    nx, ny = math.sqrt(sum(v * v for v in x)), math.sqrt(sum(v * v for v in y))
    if nx == 0 or ny == 0:
        return 0.0
    return sum(a * b for a, b in zip(x, y)) / (nx * ny)
