"""Independent reference computations used by the tests.

Everything here is deliberately written without the package's kernels:
collapsed Gauss-Jacobi (Duffy) quadrature on the triangle, basis
gradients from the inverse Jacobian, strain tensors formed explicitly.
"""
import numpy as np


def duffy_rule(order=8):
    """Points (barycentric) and weights on the reference triangle (area 1/2)."""
    x, w = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    S, T = np.meshgrid(s, s, indexing="ij")
    W = np.outer(ws, ws)
    # (s, t) in unit square -> (xi, eta) = (s, t (1 - s)), Jacobian 1 - s
    xi = S.ravel()
    eta = (T * (1.0 - S)).ravel()
    wt = (W * (1.0 - S)).ravel()
    return np.column_stack([1.0 - xi - eta, xi, eta]), wt


def _basis(tri, bary):
    """Values (q, 4) and physical gradients (q, 4, 2) of lambda_1..3 and the bubble."""
    tri = np.asarray(tri, dtype=float)
    J = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
    Jinv = np.linalg.inv(J)
    # d lambda / d x for lambda_1 = 1 - xi - eta, lambda_2 = xi, lambda_3 = eta
    dref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    dlam = dref @ Jinv
    l1, l2, l3 = bary.T
    vals = np.column_stack([l1, l2, l3, 27.0 * l1 * l2 * l3])
    grads = np.empty((len(bary), 4, 2))
    grads[:, :3] = dlam[None]
    grads[:, 3] = 27.0 * (np.outer(l2 * l3, dlam[0]) + np.outer(l1 * l3, dlam[1])
                          + np.outer(l1 * l2, dlam[2]))
    return vals, grads, abs(np.linalg.det(J))


def _vector_basis_grad(grads):
    """Gradients (q, 8, 2, 2) of the 8 vector shape functions (x1 x2 x3 xb y1 y2 y3 yb)."""
    q = grads.shape[0]
    G = np.zeros((q, 8, 2, 2))
    for c in range(2):
        G[:, 4 * c:4 * c + 4, c, :] = grads
    return G


def stiffness(tri, nu, strain_factor=2.0, order=8):
    bary, w = duffy_rule(order)
    _, grads, detJ = _basis(tri, bary)
    G = _vector_basis_grad(grads)
    eps = 0.5 * (G + np.swapaxes(G, 2, 3))
    return strain_factor * nu * detJ * np.einsum("q,qaij,qbij->ab", w, eps, eps)


def divergence(tri, order=8):
    bary, w = duffy_rule(order)
    vals, grads, detJ = _basis(tri, bary)
    G = _vector_basis_grad(grads)
    div = G[:, :, 0, 0] + G[:, :, 1, 1]
    return -detJ * np.einsum("q,qi,qb->ib", w, vals[:, :3], div)


def edge_mass(p0, p1, order=5):
    x, w = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (x + 1.0)
    L = float(np.linalg.norm(np.asarray(p1, float) - np.asarray(p0, float)))
    phi = np.column_stack([1.0 - s, s])
    return 0.5 * L * np.einsum("q,qa,qb->ab", w, phi, phi)


def random_triangles(rng, count):
    """Counter-clockwise triangles with area bounded away from zero."""
    out = []
    while len(out) < count:
        p = rng.uniform(-1.0, 1.0, size=(3, 2)) * rng.uniform(0.01, 10.0)
        d1, d2 = p[1] - p[0], p[2] - p[0]
        det = d1[0] * d2[1] - d1[1] * d2[0]
        scale = max(np.linalg.norm(d1), np.linalg.norm(d2)) ** 2
        if abs(det) < 1e-2 * scale:
            continue
        if det < 0:
            p = p[[0, 2, 1]]
        out.append(p)
    return out


def fd_divergence(velocity, x, y, h=1e-6):
    """Central-difference divergence of a callable velocity field."""
    du = (velocity(x + h, y)[0] - velocity(x - h, y)[0]) / (2 * h)
    dv = (velocity(x, y + h)[1] - velocity(x, y - h)[1]) / (2 * h)
    return du + dv


def fd_forcing(velocity, pressure, nu, strain_factor, x, y, h=1e-4):
    """-div(s nu eps(u)) + grad p by nested central differences."""
    def grad_u(X, Y):
        gx = (velocity(X + h, Y) - velocity(X - h, Y)) / (2 * h)
        gy = (velocity(X, Y + h) - velocity(X, Y - h)) / (2 * h)
        return gx, gy  # d u / dx, d u / dy (each a 2-vector field)

    def sigma(X, Y):
        gx, gy = grad_u(X, Y)
        s11 = gx[0]
        s22 = gy[1]
        s12 = 0.5 * (gy[0] + gx[1])
        k = strain_factor * nu
        return k * s11, k * s12, k * s22

    s11p, s12p, _ = sigma(x + h, y)
    s11m, s12m, _ = sigma(x - h, y)
    _, s21p, s22p = sigma(x, y + h)
    _, s21m, s22m = sigma(x, y - h)
    div1 = (s11p - s11m) / (2 * h) + (s21p - s21m) / (2 * h)
    div2 = (s12p - s12m) / (2 * h) + (s22p - s22m) / (2 * h)
    dpx = (pressure(x + h, y) - pressure(x - h, y)) / (2 * h)
    dpy = (pressure(x, y + h) - pressure(x, y - h)) / (2 * h)
    return np.array([-div1 + dpx, -div2 + dpy])
