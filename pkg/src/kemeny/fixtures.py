"""Small named models used by the tests, the demos and the Monte Carlo suite."""
import numpy as np

TWO_STATE = np.array([[0.7, 0.3], [0.2, 0.8]])
SYMMETRIC_TWO = np.array([[0.5, 0.5], [0.5, 0.5]])
FLIP = np.array([[0.0, 1.0], [1.0, 0.0]])
UNIFORM3 = np.full((3, 3), 1.0 / 3.0)
CYCLE3 = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])

TWO_STATE_Q = np.array([[-1.0, 1.0], [2.0, -2.0]])
CYCLE3_Q = np.array([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]])

BESSEL3 = {
    "kind": "diffusion",
    "drift": "1/x",
    "sigma": "1",
    "interval": {"left": 0, "right": 1},
    "left_boundary": "entrance",
    "right_boundary": "reflecting",
}
ORNSTEIN_UHLENBECK = {
    "kind": "diffusion",
    "drift": "-x/2",
    "sigma": "1",
    "interval": {"left": "-inf", "right": "inf"},
    "left_boundary": "entrance",
    "right_boundary": "entrance",
    "anchor": 0.0,
}


def random_chain(n, rng, sparse=False):
    """Random irreducible transition matrix.

    A random Hamiltonian cycle guarantees irreducibility.  In the dense regime
    every entry is positive; in the sparse regime each row gets about two extra
    random edges on top of its cycle edge.
    """
    order = rng.permutation(n)
    w = np.zeros((n, n))
    w[order, np.roll(order, -1)] = rng.uniform(0.1, 1.0, size=n)
    if sparse:
        extra = rng.random((n, n)) < min(1.0, 2.0 / n)
        w += extra * rng.uniform(0.0, 1.0, size=(n, n))
    else:
        w += rng.uniform(0.0, 1.0, size=(n, n))
    return w / w.sum(axis=1, keepdims=True)


def random_generator(n, rng, sparse=False):
    """Random conservative rate matrix of an irreducible chain."""
    w = random_chain(n, rng, sparse=sparse) * rng.uniform(0.5, 3.0, size=(n, 1))
    np.fill_diagonal(w, 0.0)
    np.fill_diagonal(w, -w.sum(axis=1))
    return w
