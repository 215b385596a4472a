"""Independent reference computations used by the tests."""

import math

import numpy as np


def normal_equations(x, y):
    X = np.column_stack([np.ones(len(x)), x])
    a, b = np.linalg.solve(X.T @ X, X.T @ np.asarray(y, dtype=float))
    return a, b


def bartlett_slope_se(resid, x, lag):
    """Newey-West slope standard error by explicit double summation."""
    n = len(resid)
    rows = [(1.0, float(xi)) for xi in x]
    S = [[0.0, 0.0], [0.0, 0.0]]
    for j in range(lag + 1):
        w = 1.0 if j == 0 else 1.0 - j / (lag + 1.0)
        for t in range(j, n):
            for p in range(2):
                for q in range(2):
                    term = resid[t] * resid[t - j] * rows[t][p] * rows[t - j][q]
                    if j == 0:
                        S[p][q] += term
                    else:
                        term2 = resid[t] * resid[t - j] * rows[t - j][p] * rows[t][q]
                        S[p][q] += w * (term + term2)
    sxx = [[n, sum(x)], [sum(x), sum(xi * xi for xi in x)]]
    det = sxx[0][0] * sxx[1][1] - sxx[0][1] * sxx[1][0]
    inv = [[sxx[1][1] / det, -sxx[0][1] / det], [-sxx[1][0] / det, sxx[0][0] / det]]
    # second row of inv @ S @ inv, second column
    v = 0.0
    for p in range(2):
        for q in range(2):
            v += inv[1][p] * S[p][q] * inv[q][1]
    return math.sqrt(v)


def transition_paths(y):
    """h_it and H_t by plain loops."""
    y = [list(map(float, row)) for row in y]
    n, T = len(y), len(y[0])
    h = [[0.0] * T for _ in range(n)]
    H = [0.0] * T
    for t in range(T):
        mean = sum(y[i][t] for i in range(n)) / n
        for i in range(n):
            h[i][t] = y[i][t] / mean
        H[t] = sum((h[i][t] - 1.0) ** 2 for i in range(n)) / n
    return np.array(h), np.array(H)
