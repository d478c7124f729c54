"""The four cost-function families and their exact classical machinery.

Spin convention: bit 0 of a candidate string maps to Z eigenvalue +1, bit 1
to -1.  Bitstrings are little-endian integers (site k, 1-based, is bit k-1).
LABS drops the constant k = 0 autocorrelation term and sums k = 1..N-1.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ProblemError(ValueError):
    pass


@dataclass(frozen=True)
class SpinTerm:
    """One tensor-product-of-Z term: weight and distinct 1-based sites."""

    weight: float
    sites: tuple[int, ...]

    def __post_init__(self):
        if not self.sites:
            raise ProblemError("term support must be non-empty")
        if len(set(self.sites)) != len(self.sites):
            raise ProblemError("term sites must be distinct")


@dataclass(frozen=True)
class Problem:
    """One of the four families; coefficient layout depends on the family.

    family 'lterm': ``terms`` is a tuple of SpinTerm.
    family 'qubo':  ``j`` maps (i, j) with i < j to reals, ``h`` has N reals.
    family 'sk':    ``j`` maps (i, j) with i < j to +-1.
    family 'labs':  structure only; ``mode`` is 'squared' or 'absolute'.
    """

    family: str
    n: int
    terms: tuple[SpinTerm, ...] = ()
    j: tuple[tuple[int, int, float], ...] = ()
    h: tuple[float, ...] = ()
    mode: str = "squared"

    def __post_init__(self):
        if self.family not in ("lterm", "qubo", "sk", "labs"):
            raise ProblemError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise ProblemError("n >= 1 required")
        for i, jj, w in self.j:
            if not 1 <= i < jj <= self.n:
                raise ProblemError(f"bad coupling sites ({i},{jj})")
            if self.family == "sk" and abs(w) != 1:
                raise ProblemError("SK couplings must be +-1")
        for t in self.terms:
            if max(t.sites) > self.n:
                raise ProblemError("term site exceeds N")
        if self.family == "labs" and self.mode not in ("squared", "absolute"):
            raise ProblemError(f"unknown LABS mode {self.mode!r}")

    # -- couplings as arrays -------------------------------------------------
    def coupling_matrix(self) -> np.ndarray:
        w = np.zeros((self.n + 1, self.n + 1))
        for i, jj, val in self.j:
            w[i, jj] = val
            w[jj, i] = val
        return w

    def field_vector(self) -> np.ndarray:
        h = np.zeros(self.n + 1)
        for i, val in enumerate(self.h, start=1):
            h[i] = val
        return h


# ---------------------------------------------------------------------------
# constructors


def sk_problem(n: int, couplings: Sequence[float]) -> Problem:
    pairs = [(i, jj) for i in range(1, n + 1) for jj in range(i + 1, n + 1)]
    if len(couplings) != len(pairs):
        raise ProblemError(f"SK needs {len(pairs)} couplings for N={n}")
    return Problem("sk", n, j=tuple((i, jj, float(w))
                                    for (i, jj), w in zip(pairs, couplings)))


def random_sk(n: int, seed: int) -> Problem:
    rng = np.random.default_rng(np.uint64(seed))
    m = n * (n - 1) // 2
    return sk_problem(n, (2 * rng.integers(0, 2, size=m) - 1).astype(float))


def qubo_problem(n: int, j_upper: Sequence[float], h: Sequence[float]) -> Problem:
    pairs = [(i, jj) for i in range(1, n + 1) for jj in range(i + 1, n + 1)]
    if len(j_upper) != len(pairs) or len(h) != n:
        raise ProblemError("QUBO coefficient lengths inconsistent with N")
    return Problem("qubo", n,
                   j=tuple((i, jj, float(w)) for (i, jj), w in zip(pairs, j_upper)),
                   h=tuple(float(v) for v in h))


def random_qubo(n: int, seed: int) -> Problem:
    rng = np.random.default_rng(np.uint64(seed))
    m = n * (n - 1) // 2
    return qubo_problem(n, rng.uniform(-1, 1, size=m), rng.uniform(-1, 1, size=n))


def lterm_problem(n: int, terms: Sequence[tuple[float, Sequence[int]]]) -> Problem:
    return Problem("lterm", n,
                   terms=tuple(SpinTerm(float(w), tuple(int(s) for s in q))
                               for w, q in terms))


def labs_problem(n: int, mode: str = "squared") -> Problem:
    return Problem("labs", n, mode=mode)


# ---------------------------------------------------------------------------
# exact energies


def _z_values(x: int, n: int) -> np.ndarray:
    bits = (x >> np.arange(n)) & 1
    return 1.0 - 2.0 * bits  # bit 0 -> +1


def labs_correlations(x: int, n: int) -> np.ndarray:
    """E_k = sum_i z_i z_{i+k} for k = 1..n-1."""
    z = _z_values(x, n)
    return np.array([float(np.dot(z[: n - k], z[k:])) for k in range(1, n)])


def energy(problem: Problem, x: int) -> float:
    """Exact eigenvalue of the cost Hamiltonian on basis state |x>."""
    n = problem.n
    if not 0 <= x < (1 << n):
        raise ProblemError("bitstring out of range")
    z = _z_values(x, n)
    if problem.family == "lterm":
        return float(sum(t.weight * np.prod(z[[s - 1 for s in t.sites]])
                         for t in problem.terms))
    if problem.family in ("sk", "qubo"):
        e = sum(w * z[i - 1] * z[jj - 1] for i, jj, w in problem.j)
        e += sum(hv * z[i] for i, hv in enumerate(problem.h))
        return float(e)
    corr = labs_correlations(x, n)
    if problem.mode == "squared":
        return float(np.sum(corr**2))
    return float(np.sum(np.abs(corr)))


def energy_table(problem: Problem) -> np.ndarray:
    """Energies of all 2^N basis states (N <= 24)."""
    n = problem.n
    if n > 24:
        raise ProblemError("energy table capped at N=24")
    xs = np.arange(1 << n, dtype=np.int64)
    z = 1.0 - 2.0 * ((xs[:, None] >> np.arange(n)[None, :]) & 1)
    if problem.family == "lterm":
        e = np.zeros(1 << n)
        for t in problem.terms:
            e += t.weight * np.prod(z[:, [s - 1 for s in t.sites]], axis=1)
        return e
    if problem.family in ("sk", "qubo"):
        e = np.zeros(1 << n)
        for i, jj, w in problem.j:
            e += w * z[:, i - 1] * z[:, jj - 1]
        for i, hv in enumerate(problem.h):
            e += hv * z[:, i]
        return e
    e = np.zeros(1 << n)
    for k in range(1, n):
        ck = np.einsum("xi,xi->x", z[:, : n - k], z[:, k:])
        e += ck**2 if problem.mode == "squared" else np.abs(ck)
    return e


def energy_diff(problem: Problem, x: int, k: int) -> float:
    """E_x - E_y with y = x with (1-based) bit k flipped."""
    if not 1 <= k <= problem.n:
        raise ProblemError("site out of range")
    if problem.family in ("sk", "qubo"):
        z = _z_values(x, problem.n)
        zk = z[k - 1]
        d = 0.0
        for i, jj, w in problem.j:
            if i == k:
                d += 2 * w * zk * z[jj - 1]
            elif jj == k:
                d += 2 * w * zk * z[i - 1]
        if problem.h:
            d += 2 * problem.h[k - 1] * zk
        return float(d)
    y = x ^ (1 << (k - 1))
    return energy(problem, x) - energy(problem, y)


def lambda_of(problem: Problem) -> float:
    """Coefficient 1-norm of the LCU decomposition (sum over |w_l|)."""
    if problem.family == "lterm":
        return float(sum(abs(t.weight) for t in problem.terms))
    if problem.family in ("sk", "qubo"):
        return float(sum(abs(w) for _, _, w in problem.j)
                     + sum(abs(v) for v in problem.h))
    n = problem.n
    return float(sum((n - k) ** 2 for k in range(1, n)))


def term_count(problem: Problem) -> int:
    if problem.family == "lterm":
        return len(problem.terms)
    if problem.family in ("sk", "qubo"):
        return len(problem.j) + sum(1 for v in problem.h if v != 0)
    n = problem.n
    return sum((n - k) ** 2 for k in range(1, n))


def argmin_set(problem: Problem) -> np.ndarray:
    e = energy_table(problem)
    return np.flatnonzero(np.abs(e - e.min()) < 1e-9)


# ---------------------------------------------------------------------------
# Markov-chain machinery for annealing


def transition_matrix(problem: Problem, beta: float, cap: int = 16) -> np.ndarray:
    """Row-stochastic single-bit-flip Metropolis matrix P[x, y] = Pr(y|x)."""
    n = problem.n
    if n > cap:
        raise ProblemError(f"transition matrix capped at N={cap}")
    e = energy_table(problem)
    dim = 1 << n
    p = np.zeros((dim, dim))
    for k in range(n):
        ys = np.arange(dim) ^ (1 << k)
        p[np.arange(dim), ys] = np.minimum(1.0, np.exp(beta * (e - e[ys]))) / n
    p[np.arange(dim), np.arange(dim)] = 1.0 - p.sum(axis=1)
    return p


def flip_probabilities(problem: Problem, beta: float, cap: int = 16) -> np.ndarray:
    """p[x, k] = N * Pr(x_k | x) = min(1, exp(beta (E_x - E_{x_k})))."""
    n = problem.n
    if n > cap:
        raise ProblemError(f"flip table capped at N={cap}")
    e = energy_table(problem)
    dim = 1 << n
    p = np.empty((dim, n))
    for k in range(n):
        ys = np.arange(dim) ^ (1 << k)
        p[:, k] = np.minimum(1.0, np.exp(beta * (e - e[ys])))
    return p


def gibbs_state(problem: Problem, beta: float, cap: int = 16) -> np.ndarray:
    """Amplitudes sqrt(pi_beta(x)) of the coherent Gibbs state."""
    if problem.n > cap:
        raise ProblemError(f"Gibbs state capped at N={cap}")
    e = energy_table(problem)
    w = np.exp(-beta * (e - e.min()))
    return np.sqrt(w / w.sum())


# ---------------------------------------------------------------------------
# JSON problem format (CLI contract)


def to_json_dict(problem: Problem) -> dict:
    d: dict = {"family": problem.family, "n": problem.n}
    if problem.family == "lterm":
        d["terms"] = [{"w": t.weight, "q": list(t.sites)} for t in problem.terms]
    elif problem.family == "qubo":
        d["J"] = [w for _, _, w in problem.j]
        d["h"] = list(problem.h)
    elif problem.family == "sk":
        d["couplings"] = [w for _, _, w in problem.j]
    else:
        d["mode"] = problem.mode
    return d


def from_json_dict(d: dict) -> Problem:
    family = d.get("family")
    n = int(d.get("n", 0))
    seed = d.get("seed")
    if family == "sk":
        if "couplings" in d:
            return sk_problem(n, d["couplings"])
        if seed is None:
            raise ProblemError("sk needs 'couplings' or 'seed'")
        return random_sk(n, int(seed))
    if family == "qubo":
        if "J" in d and "h" in d:
            return qubo_problem(n, d["J"], d["h"])
        if seed is None:
            raise ProblemError("qubo needs 'J'/'h' or 'seed'")
        return random_qubo(n, int(seed))
    if family == "lterm":
        return lterm_problem(n, [(t["w"], t["q"]) for t in d["terms"]])
    if family == "labs":
        return labs_problem(n, d.get("mode", "squared"))
    raise ProblemError(f"unknown family {family!r}")


def load_problem(path: str) -> Problem:
    with open(path) as f:
        return from_json_dict(json.load(f))


def save_problem(problem: Problem, path: str) -> None:
    with open(path, "w") as f:
        json.dump(to_json_dict(problem), f, indent=1, sort_keys=True)
        f.write("\n")
