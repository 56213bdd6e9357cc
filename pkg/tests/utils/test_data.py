"""Test data factories and sample systems."""

from typing import Any

import numpy as np

from phcbi.services.ph_core import LtiPhSystem, QuadraticHamiltonian, validate_structure


class TestDataFactory:
    """Seeded factories for random port-Hamiltonian data."""

    __test__ = False

    @staticmethod
    def skew(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
        """Skew matrix from rotated 2x2 blocks, so J+R stays well conditioned."""
        J = np.zeros((n, n))
        for i in range(0, n - 1, 2):
            w = scale * rng.uniform(0.5, 2.0)
            J[i, i + 1], J[i + 1, i] = -w, w
        basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
        J = basis @ J @ basis.T
        return 0.5 * (J - J.T)

    @staticmethod
    def psd(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
        B = rng.standard_normal((n, n if rank is None else rank))
        R = B @ B.T / max(n, 1)
        return 0.5 * (R + R.T)

    @staticmethod
    def pd(rng: np.random.Generator, n: int, shift: float = 0.5) -> np.ndarray:
        return TestDataFactory.psd(rng, n) + shift * np.eye(n)

    @staticmethod
    def plant(rng: np.random.Generator, n: int = 3, m: int = 1) -> LtiPhSystem:
        """Random plant with R positive definite and positive-definite Q."""
        ham = QuadraticHamiltonian(TestDataFactory.pd(rng, n), rng.standard_normal(n))
        return validate_structure(
            TestDataFactory.skew(rng, n),
            TestDataFactory.pd(rng, n, shift=0.2),
            rng.standard_normal((n, m)),
            ham,
        )

    @staticmethod
    def controller(rng: np.random.Generator, n_c: int = 2, m: int = 1) -> LtiPhSystem:
        ham = QuadraticHamiltonian(TestDataFactory.pd(rng, n_c), rng.standard_normal(n_c))
        return validate_structure(
            TestDataFactory.skew(rng, n_c),
            TestDataFactory.psd(rng, n_c),
            rng.standard_normal((n_c, m)),
            ham,
        )

    @staticmethod
    def rlc_draw(rng: np.random.Generator) -> dict[str, float]:
        """L, C, r in [0.1, 10] and a nonzero Gc in [-5, 5]."""
        gc = 0.0
        while abs(gc) < 1e-3:
            gc = float(rng.uniform(-5.0, 5.0))
        return {
            "L": float(rng.uniform(0.1, 10.0)),
            "C": float(rng.uniform(0.1, 10.0)),
            "r": float(rng.uniform(0.1, 10.0)),
            "Gc": gc,
        }

    @staticmethod
    def model_data(
        J: Any, R: Any, G: Any, Q: Any, b: Any | None = None, c0: float = 0.0
    ) -> dict[str, Any]:
        """Model-file payload from nested lists or arrays."""
        J_arr = np.asarray(J, dtype=float)
        n = J_arr.shape[0]
        G_arr = np.asarray(G, dtype=float).reshape(n, -1)
        return {
            "n": n,
            "m": G_arr.shape[1],
            "J": J_arr.tolist(),
            "R": np.asarray(R, dtype=float).tolist(),
            "G": G_arr.tolist(),
            "Q": np.asarray(Q, dtype=float).tolist(),
            "b": [0.0] * n if b is None else list(map(float, b)),
            "c0": c0,
        }


class SampleData:
    """Fixed systems used across the suite."""

    RLC_J = [[0.0, -1.0], [1.0, 0.0]]
    RLC_R = [[0.0, 0.0], [0.0, 1.0]]
    RLC_G = [[1.0], [0.0]]
    RLC_Q = [[1.0, 0.0], [0.0, 1.0]]

    RLC_MODEL = {
        "n": 2,
        "m": 1,
        "J": RLC_J,
        "R": RLC_R,
        "G": RLC_G,
        "Q": RLC_Q,
        "b": [0.0, 0.0],
        "c0": 0.0,
    }

    LOSSLESS_MODEL = {**RLC_MODEL, "R": [[0.0, 0.0], [0.0, 0.0]]}

    # J - R and J + R are both singular: no energy-shaping path, least-squares Casimir
    SINGULAR_JR_MODEL = {
        "n": 2,
        "m": 1,
        "J": [[0.0, 0.0], [0.0, 0.0]],
        "R": [[1.0, 0.0], [0.0, 0.0]],
        "G": [[1.0], [1.0]],
        "Q": [[1.0, 0.0], [0.0, 1.0]],
        "b": [0.0, 0.0],
        "c0": 0.0,
    }

    UNSTABLE_MODEL = {
        "n": 1,
        "m": 0,
        "J": [[0.0]],
        "R": [[-1.0]],
        "G": [[]],
        "Q": [[1.0]],
        "b": [0.0],
        "c0": 0.0,
    }


class TestScenarios:
    """Invalid inputs and edge cases."""

    __test__ = False

    NOT_SKEW_J = [[0.0, -1.0], [0.5, 0.0]]
    NOT_SYMMETRIC_R = [[0.0, 0.3], [0.0, 1.0]]
    BAD_RLC_PARAMS = [
        {"L": 0.0},
        {"C": -1.0},
        {"r": 0.0},
        {"L": float("inf")},
    ]
    MALFORMED_MODELS = [
        "not json",
        '{"n": 2}',
        '{"n": 2, "m": 1, "J": [[0, 1]], "R": [[0, 0], [0, 0]], "G": [[1], [0]], "Q": [[1, 0], [0, 1]], "b": [0, 0]}',
        '{"n": 1, "m": 1, "J": [[0]], "R": [[0]], "G": [[1]], "Q": [[1]], "b": [0, 0]}',
    ]
