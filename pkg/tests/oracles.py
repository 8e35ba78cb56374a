"""Floating-point reference implementations, independent of the exact engine.

Fields are written straight from the shape formulas, derivatives are central
differences and integrals use tensor Gauss-Legendre quadrature.
"""

from __future__ import annotations

import numpy as np

SHAPES = {
    "Y": (("S", "C", "C"), ("C", "S", "C"), ("C", "C", "S")),
    "Z": (("S", "C", "S"), ("C", "S", "S"), ("C", "C", "C")),
}
THIRD_SIGN = {"Y": 1.0, "Z": -1.0}


def np_field(family, k, w, L):
    """Callable x -> (3, ...) array for the raw eigenfunction shape."""
    k = np.asarray(k, float)
    w = np.asarray(w, float)
    L = np.asarray(L, float)

    def f(x):
        x = np.asarray(x, float)
        out = []
        for c in range(3):
            val = w[c] * (THIRD_SIGN[family] if c == 2 else 1.0)
            for i in range(3):
                arg = k[i] * np.pi * x[..., i] / L[i]
                val = val * (np.sin(arg) if SHAPES[family][c][i] == "S" else np.cos(arg))
            out.append(val)
        return np.stack(out)

    return f


def grad_fd(f, x, h=1e-5):
    """d f_c / d x_i at points x, shape (3, 3, ...): [component, axis]."""
    x = np.asarray(x, float)
    cols = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.stack(cols, axis=1)


def advect_fd(a, b, x):
    """(a . grad) b at x by central differences."""
    av = a(x)
    gb = grad_fd(b, x)
    return np.einsum("i...,ci...->c...", av, gb)


def quad_grid(L, n=28):
    """Gauss-Legendre nodes/weights over (0,L1)x(0,L2)x(0,2 L3)."""
    t, wt = np.polynomial.legendre.leggauss(n)
    spans = [float(L[0]), float(L[1]), 2.0 * float(L[2])]
    axes, ws = [], []
    for s in spans:
        axes.append(0.5 * s * (t + 1))
        ws.append(0.5 * s * wt)
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    W = ws[0][:, None, None] * ws[1][None, :, None] * ws[2][None, None, :]
    return X, W


def inner_quad(u_vals, v_vals, W):
    return float(np.sum(np.sum(u_vals * v_vals, axis=0) * W))
