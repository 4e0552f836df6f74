import numpy as np


def central_diff(f, x, h=1e-5):
    """Central finite-difference gradient of a scalar function of an array."""
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    flat, gflat = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return grad


def max_rel_err(got, want, floor=None):
    """Worst relative error with a scale-aware floor so that components far
    below the gradient's own magnitude are judged absolutely."""
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    if floor is None:
        floor = 1e-2 * max(float(np.max(np.abs(want))), 1e-8)
    denom = np.maximum(np.maximum(np.abs(got), np.abs(want)), floor)
    return float(np.max(np.abs(got - want) / denom))
