import numpy as np


def central_difference_grad(f, z, step=1e-5):
    """Finite-difference gradient oracle: (f(z+h e_j) - f(z-h e_j)) / 2h."""
    z = np.asarray(z, dtype=np.float64)
    grad = np.zeros_like(z)
    for j in range(z.size):
        zp = z.copy()
        zm = z.copy()
        zp[j] += step
        zm[j] -= step
        grad[j] = (f(zp) - f(zm)) / (2.0 * step)
    return grad


def relative_error(approx, exact):
    approx = np.asarray(approx, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    denom = np.linalg.norm(exact)
    if denom == 0.0:
        return np.linalg.norm(approx)
    return np.linalg.norm(approx - exact) / denom
