"""Coin dictionary of the nine-step walk."""

import numpy as np

S2 = np.sqrt(2.0)
S3 = np.sqrt(3.0)

COINS = {
    "IDENTITY": np.eye(2, dtype=complex),
    "H1": np.array([[1, 0], [0, -1]], dtype=complex),
    "H2": np.array([[0, 1], [1, 0]], dtype=complex),
    "H3": np.array([[S2, 1], [1, -S2]], dtype=complex) / S3,
    "H4": np.array([[-S3, 1], [1, S3]], dtype=complex) / 2,
    "H5": np.array([[-S3, -1], [-1, S3]], dtype=complex) / 2,
    "H6": np.array([[1, 1], [1, -1]], dtype=complex) / S2,
    "H7": np.array([[-1, 1], [1, 1]], dtype=complex) / S2,
    "H8": np.array([[-S2, 1], [1, S2]], dtype=complex) / S3,
    "H9": -1j * np.array([[1, 1], [1, -1]], dtype=complex) / S2,
}

COIN_LABELS = tuple(COINS)
SITE_PHASES = (1.0 + 0j, -1.0 + 0j, 1j, -1j)

# Coin usage reported for the experiment: 30 coins in total.
COIN_MULTIPLICITY = {
    "H1": 4, "H2": 14, "H3": 3, "H4": 1, "H5": 1,
    "H6": 1, "H7": 4, "H8": 1, "H9": 1,
}
