"""Quadratic integer programs: data model, random generator and file format.

An instance describes

    min  x^T Qhat x + lhat^T x + chat
    s.t. x_i in {l_i, ..., u_i},  i = 1..n

with ``Qhat`` symmetric and possibly indefinite.
"""

from __future__ import annotations

import dataclasses
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainViolation, GeneratorError, InstanceError

__all__ = [
    "QipInstance",
    "GeneratorConfig",
    "generate_instance",
    "generate_with_basis",
    "objective_value",
    "translate",
    "read_instance",
    "write_instance",
    "load_instance",
    "save_instance",
]

HEADER = "qisdp-instance v1"
SYMMETRY_RTOL = 1e-12


def _check_domains(domains: Iterable[Sequence[int]], n: int) -> tuple[tuple[int, int], ...]:
    out = []
    for k, d in enumerate(domains):
        if len(d) != 2:
            raise InstanceError(f"domain {k + 1} must be a (lower, upper) pair, got {d!r}")
        lo, hi = d
        if int(lo) != lo or int(hi) != hi:
            raise InstanceError(f"domain {k + 1} has non-integer bounds {d!r}")
        lo, hi = int(lo), int(hi)
        if hi < lo + 1:
            raise InstanceError(f"domain {k + 1} = [{lo}, {hi}] must contain at least two integers")
        out.append((lo, hi))
    if len(out) != n:
        raise InstanceError(f"expected {n} domains, got {len(out)}")
    return tuple(out)


@dataclasses.dataclass(frozen=True, eq=False)
class QipInstance:
    """Problem data. Immutable once constructed.

    Attributes:
      qhat: Symmetric (n, n) quadratic term.
      lhat: Linear term of length n.
      chat: Constant offset.
      domains: Tuple of ``(l_i, u_i)`` integer pairs with ``u_i >= l_i + 1``.
    """

    qhat: np.ndarray
    lhat: np.ndarray
    chat: float
    domains: tuple[tuple[int, int], ...]

    def __post_init__(self):
        q = np.array(self.qhat, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 1:
            raise InstanceError(f"qhat must be a non-empty square matrix, got shape {q.shape}")
        n = q.shape[0]
        asym = np.max(np.abs(q - q.T))
        if asym > SYMMETRY_RTOL * max(1.0, np.max(np.abs(q))):
            raise InstanceError(f"qhat is not symmetric (max asymmetry {asym:.3e})")
        q = 0.5 * (q + q.T)
        lvec = np.array(self.lhat, dtype=np.float64).reshape(-1)
        if lvec.shape != (n,):
            raise InstanceError(f"lhat must have length {n}, got {lvec.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(lvec)) and np.isfinite(self.chat)):
            raise InstanceError("instance data must be finite")
        q.setflags(write=False)
        lvec.setflags(write=False)
        object.__setattr__(self, "qhat", q)
        object.__setattr__(self, "lhat", lvec)
        object.__setattr__(self, "chat", float(self.chat))
        object.__setattr__(self, "domains", _check_domains(self.domains, n))

    @property
    def n(self) -> int:
        return self.qhat.shape[0]

    @property
    def lower(self) -> np.ndarray:
        return np.array([d[0] for d in self.domains], dtype=np.int64)

    @property
    def upper(self) -> np.ndarray:
        return np.array([d[1] for d in self.domains], dtype=np.int64)

    @property
    def num_points(self) -> int:
        """Number of integer points in the domain box."""
        total = 1
        for lo, hi in self.domains:
            total *= hi - lo + 1
        return total


@dataclasses.dataclass(frozen=True)
class GeneratorConfig:
    n: int
    p: int = 0
    seed: int = 0
    domain: tuple[int, int] = (-1, 1)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0 <= self.p <= 100:
            raise ValueError(f"p must lie in [0, 100], got {self.p}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        lo, hi = self.domain
        if hi < lo + 1:
            raise ValueError(f"domain {self.domain} must contain at least two integers")


def _orthonormal_basis(rng: np.random.Generator, n: int, max_retries: int = 100) -> np.ndarray:
    # Modified Gram-Schmidt with one re-orthogonalization pass; columns are the basis.
    basis = np.empty((n, n))
    retries = 0
    k = 0
    while k < n:
        v = rng.uniform(-1.0, 1.0, size=n)
        norm0 = np.linalg.norm(v)
        for _ in range(2):
            for j in range(k):
                v -= (basis[:, j] @ v) * basis[:, j]
        norm = np.linalg.norm(v)
        if norm0 == 0.0 or norm < 1e-8 * norm0:
            retries += 1
            if retries > max_retries:
                raise GeneratorError(f"could not orthonormalize vector {k + 1} after {max_retries} retries")
            continue
        basis[:, k] = v / norm
        k += 1
    return basis


def generate_with_basis(config: GeneratorConfig) -> tuple[QipInstance, np.ndarray, np.ndarray]:
    """Like :func:`generate_instance` but also returns ``(mu, V)``.

    ``Qhat = V @ diag(mu) @ V.T`` with orthonormal columns in ``V``.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n
    n_neg = (config.p * n) // 100
    mu = np.concatenate([rng.uniform(-1.0, 0.0, size=n_neg), rng.uniform(0.0, 1.0, size=n - n_neg)])
    basis = _orthonormal_basis(rng, n)
    lhat = rng.uniform(-1.0, 1.0, size=n)
    qhat = (basis * mu) @ basis.T
    qhat = 0.5 * (qhat + qhat.T)
    inst = QipInstance(qhat=qhat, lhat=lhat, chat=0.0, domains=[config.domain] * n)
    return inst, mu, basis


def generate_instance(config: GeneratorConfig) -> QipInstance:
    """Random instance with a controlled share of negative eigenvalues.

    The first ``floor(p * n / 100)`` eigenvalues are drawn from U[-1, 0], the
    rest from U[0, 1]; eigenvectors come from orthonormalizing U[-1, 1]
    samples. ``lhat`` is U[-1, 1] and ``chat = 0``. NumPy's PCG64 generator
    seeded with ``config.seed`` makes the output reproducible.
    """
    return generate_with_basis(config)[0]


def objective_value(inst: QipInstance, x) -> float:
    x = np.asarray(x)
    if x.shape != (inst.n,):
        raise DomainViolation(f"x must have length {inst.n}, got shape {x.shape}")
    if not np.all(np.equal(np.mod(x, 1), 0)):
        raise DomainViolation("x must be integral")
    if np.any(x < inst.lower) or np.any(x > inst.upper):
        raise DomainViolation(f"x = {x.tolist()} lies outside the domain box")
    xf = x.astype(np.float64)
    return float(xf @ inst.qhat @ xf + inst.lhat @ xf + inst.chat)


def translate(inst: QipInstance, shift) -> QipInstance:
    """Same problem in the variables ``x' = x - shift`` (integer ``shift``)."""
    shift = np.asarray(shift, dtype=np.int64)
    c = shift.astype(np.float64)
    return QipInstance(
        qhat=inst.qhat,
        lhat=inst.lhat + 2.0 * inst.qhat @ c,
        chat=float(inst.chat + c @ inst.qhat @ c + inst.lhat @ c),
        domains=[(lo - int(t), hi - int(t)) for (lo, hi), t in zip(inst.domains, shift)],
    )


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_instance(inst: QipInstance) -> str:
    lines = [HEADER, f"n {inst.n}", f"c {_fmt(inst.chat)}", "l " + " ".join(_fmt(v) for v in inst.lhat)]
    lines += [" ".join(_fmt(v) for v in row) for row in inst.qhat]
    lines += [f"{lo} {hi}" for lo, hi in inst.domains]
    return "\n".join(lines) + "\n"


def _floats(tokens, what, count):
    if len(tokens) != count:
        raise InstanceError(f"{what}: expected {count} values, got {len(tokens)}")
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise InstanceError(f"{what}: {exc}") from None


def read_instance(text: str) -> QipInstance:
    lines = [ln.strip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines or lines[0] != HEADER:
        raise InstanceError(f"missing header line {HEADER!r}")
    if len(lines) < 4:
        raise InstanceError("truncated instance file")

    tok = lines[1].split()
    if len(tok) != 2 or tok[0] != "n":
        raise InstanceError("line 2 must read 'n <int>'")
    try:
        n = int(tok[1])
    except ValueError:
        raise InstanceError(f"bad variable count {tok[1]!r}") from None
    if n < 1:
        raise InstanceError(f"variable count must be positive, got {n}")
    if len(lines) != 4 + 2 * n:
        raise InstanceError(f"expected {4 + 2 * n} lines for n={n}, got {len(lines)}")

    tok = lines[2].split()
    if len(tok) != 2 or tok[0] != "c":
        raise InstanceError("line 3 must read 'c <float>'")
    chat = _floats(tok[1:], "c", 1)[0]

    tok = lines[3].split()
    if not tok or tok[0] != "l":
        raise InstanceError("line 4 must start with 'l'")
    lhat = _floats(tok[1:], "l", n)

    qhat = [_floats(lines[4 + r].split(), f"Q row {r + 1}", n) for r in range(n)]

    domains = []
    for r in range(n):
        tok = lines[4 + n + r].split()
        if len(tok) != 2:
            raise InstanceError(f"domain line {r + 1}: expected '<l> <u>'")
        try:
            domains.append((int(tok[0]), int(tok[1])))
        except ValueError:
            raise InstanceError(f"domain line {r + 1}: bounds must be integers") from None

    return QipInstance(qhat=np.array(qhat), lhat=np.array(lhat), chat=chat, domains=domains)


def load_instance(path) -> QipInstance:
    with open(path, encoding="utf-8") as fh:
        return read_instance(fh.read())


def save_instance(inst: QipInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_instance(inst))
