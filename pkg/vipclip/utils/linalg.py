import numpy as np


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """QR of a Gaussian matrix with the sign of diag(R) folded into Q"""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def sample_ball(center: np.ndarray, radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points uniform in B_radius(center): Gaussian direction times radius * u^(1/d)"""
    d = center.shape[0]
    directions = rng.standard_normal((n, d))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = radius * rng.random((n, 1)) ** (1.0 / d)
    return center + directions / norms * radii


def sample_sphere(center: np.ndarray, radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points uniform on the sphere of the given radius"""
    d = center.shape[0]
    directions = rng.standard_normal((n, d))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return center + radius * directions / norms


def project_ball(u: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    offset = u - center
    norm = np.linalg.norm(offset)
    if norm <= radius:
        return u
    return center + offset * (radius / norm)


def sym_part(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)
