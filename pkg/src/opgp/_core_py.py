"""Pure numpy implementation of the kernel loops in ``_core.pyx``.

Same call signatures; used when the compiled extension is unavailable or
``OPGP_PURE_PYTHON`` is set.
"""
import numpy as np

SQRT5 = np.sqrt(5.0)


def _kval(d, family, ls, var, ds, dt):
    if family == 0:
        a = SQRT5 / ls
        r = np.abs(d)
        e = var * np.exp(-a * r)
        if ds == 0 and dt == 0:
            return (1.0 + a * r + a * a * r * r / 3.0) * e
        if ds == 1 and dt == 1:
            return a * a / 3.0 * (1.0 + a * r - a * a * r * r) * e
        sgn = -1.0 if ds == 1 else 1.0
        return sgn * a * a / 3.0 * d * (1.0 + a * r) * e
    q = 1.0 / (ls * ls)
    e = var * np.exp(-0.5 * d * d * q)
    if ds == 0 and dt == 0:
        return e
    if ds == 1 and dt == 1:
        return (q - d * d * q * q) * e
    sgn = -1.0 if ds == 1 else 1.0
    return sgn * d * q * e


def kernel_matrix(x, y, family, ls, var, ds=0, dt=0):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return _kval(x[:, None] - y[None, :], family, ls, var, ds, dt)


def weighted_kernel_sum(xs, ws, owner, ds, ys, dt, p, family, ls, var):
    xs = np.asarray(xs, dtype=np.float64)
    ws = np.asarray(ws, dtype=np.float64)
    owner = np.asarray(owner, dtype=np.int64)
    ds = np.asarray(ds, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.float64)
    out = np.zeros((p, ys.shape[0]))
    for order in (0, 1):
        sel = ds == order
        if not sel.any():
            continue
        block = ws[sel, None] * kernel_matrix(xs[sel], ys, family, ls, var, order, dt)
        np.add.at(out, owner[sel], block)
    return out
