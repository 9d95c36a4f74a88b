"""Logical-level simulation of the code-register circuit.

The state after ``t`` gates is a superposition over all length-``t`` code
prefixes. Because the reachable key set is always exactly the ``t!``
prefixes, amplitudes are stored densely in a vector indexed by prefix rank
(``sum (a_i - 1) * (i - 1)!``); this is the same associative map keyed by
prefix, just without hashing. The child with ``a_{t+1} = j`` of the prefix
at rank ``r`` sits at rank ``r + (j - 1) * t!``.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DepthError, DimensionError, OutOfRangeError
from .geometry import EuclideanInstance
from .permcode import Code, check_code, check_limit, extend_perm_table, rank, unrank, format_seq

NORM_TOL = 1e-12


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 1.0 or not math.isfinite(alpha):
        raise OutOfRangeError(f"tilt base alpha must be a finite real > 1, got {alpha}")
    return alpha


def alpha_from_k(k: float) -> float:
    """Tilt base for Gaussian shift ``k`` (``alpha = e^{2k}``)."""
    if k <= 0:
        raise OutOfRangeError(f"shift k must be positive, got {k}")
    return math.exp(2.0 * k)


def k_from_alpha(alpha: float) -> float:
    return 0.5 * math.log(check_alpha(alpha))


@dataclass(frozen=True, eq=False)
class WaveState:
    """Superposition over depth-``t`` code prefixes.

    ``vector[r]`` is the amplitude of the prefix ``unrank(r, depth)``.
    ``n`` is the target size (number of gates that may still be applied is
    ``n - depth``). ``perms`` caches the decoded prefix permutations (0-based
    point labels, rank order) for the weighted gate.
    """

    depth: int
    n: int
    vector: np.ndarray
    perms: np.ndarray | None = None

    def __post_init__(self):
        if self.vector.shape != (math.factorial(self.depth),):
            raise DimensionError(
                f"depth {self.depth} needs {math.factorial(self.depth)} amplitudes, "
                f"got {self.vector.shape}"
            )
        self.vector.setflags(write=False)

    @classmethod
    def from_mapping(cls, amplitudes: Mapping[Sequence[int], complex], n: int | None = None):
        """Build a state from an explicit ``{prefix: amplitude}`` map (missing keys are 0)."""
        depths = {len(k) for k in amplitudes}
        if len(depths) != 1:
            raise DimensionError("all prefixes must share one depth")
        depth = depths.pop()
        vec = np.zeros(math.factorial(depth), dtype=np.complex128)
        for key, amp in amplitudes.items():
            vec[rank(check_code(key))] = amp
        return cls(depth=depth, n=depth if n is None else n, vector=vec)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.vector) ** 2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities.sum()))

    def amplitude(self, prefix: Sequence[int]) -> complex:
        prefix = check_code(prefix)
        if len(prefix) != self.depth:
            return 0j
        return complex(self.vector[rank(prefix)])

    def items(self) -> Iterator[tuple[Code, complex]]:
        for r, amp in enumerate(self.vector):
            yield unrank(r, self.depth), complex(amp)

    def as_dict(self) -> dict[Code, complex]:
        return dict(self.items())

    def __len__(self):
        return self.vector.shape[0]


def initial_state(n: int = 1) -> WaveState:
    return WaveState(depth=1, n=max(n, 1), vector=np.ones(1, dtype=np.complex128),
                     perms=np.zeros((1, 1), dtype=np.int8))


def _check_room(state: WaveState) -> None:
    if state.depth >= state.n:
        raise DepthError(f"state already at full depth {state.n}")


def apply_uniform_gate(state: WaveState) -> WaveState:
    _check_room(state)
    t = state.depth
    vec = np.tile(state.vector / math.sqrt(t + 1), t + 1)
    return WaveState(depth=t + 1, n=state.n, vector=vec)


def branch_probabilities(state: WaveState, inst: EuclideanInstance, alpha: float) -> np.ndarray:
    """``(t!, t+1)`` table of per-branch probabilities for the next weighted gate."""
    _check_room(state)
    if inst.n != state.n:
        raise DimensionError(f"instance has {inst.n} points, wave targets n={state.n}")
    perms = _prefix_perms(state)
    inc = kernels.branch_increments(_dist(inst), perms, state.depth)
    logits = -math.log(check_alpha(alpha)) * inc
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    return w / w.sum(axis=1, keepdims=True)


def apply_weighted_gate(state: WaveState, inst: EuclideanInstance, alpha: float) -> WaveState:
    """Split each prefix into ``t+1`` children with probabilities proportional to alpha**-increment."""
    probs = branch_probabilities(state, inst, alpha)
    t = state.depth
    vec = (state.vector[:, None] * np.sqrt(probs)).T.ravel()
    perms = extend_perm_table(_prefix_perms(state) + 1) - 1 if t + 1 < state.n else None
    return WaveState(depth=t + 1, n=state.n, vector=vec, perms=perms)


def _prefix_perms(state: WaveState) -> np.ndarray:
    if state.perms is not None:
        return state.perms
    perms = np.zeros((1, 1), dtype=np.int8)
    for _ in range(1, state.depth):
        perms = extend_perm_table(perms + 1) - 1
    return perms


def _dist(inst: EuclideanInstance) -> np.ndarray:
    return np.ascontiguousarray(inst.distance_matrix())


def prepare_uniform(n: int, limit: int | None = None) -> WaveState:
    if n < 2:
        raise OutOfRangeError(f"prepare_uniform needs n >= 2, got {n}")
    check_limit(n, limit)
    state = initial_state(n)
    for _ in range(n - 1):
        state = apply_uniform_gate(state)
    return state


def prepare_weighted(inst: EuclideanInstance, alpha: float, limit: int | None = None) -> WaveState:
    check_limit(inst.n, limit)
    check_alpha(alpha)
    state = initial_state(inst.n)
    for _ in range(inst.n - 1):
        state = apply_weighted_gate(state, inst, alpha)
    return state


def _check_full(state: WaveState) -> None:
    if state.depth != state.n:
        raise DepthError(f"state at depth {state.depth}, expected full depth {state.n}")


def measure(state: WaveState, rng: np.random.Generator) -> Code:
    _check_full(state)
    return unrank(int(sample_ranks(state.probabilities, 1, rng)[0]), state.depth)


def measure_many(state: WaveState, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Ranks of ``shots`` independent readouts."""
    _check_full(state)
    return sample_ranks(state.probabilities, shots, rng)


def sample_ranks(probs: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs)
    u = rng.random(size) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


def probability_of(state: WaveState, code: Sequence[int]) -> float:
    _check_full(state)
    return abs(state.amplitude(code)) ** 2


def render_registers(code: Sequence[int]) -> list[list[int]]:
    """One-hot register layout: register ``i`` has ``i+1`` slots, slot ``a_i + 1`` set.

    Slot 1 of each register is the "not yet decided" marker.
    """
    code = check_code(code)
    regs = []
    for i, a in enumerate(code, start=1):
        reg = [0] * (i + 1)
        reg[a] = 1
        regs.append(reg)
    return regs


def dump_csv(probs: np.ndarray, n: int) -> str:
    """Rows ``rank, code, probability`` in rank order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "code", "probability"])
    for r, p in enumerate(probs):
        writer.writerow([r, format_seq(unrank(r, n)), repr(float(p))])
    return buf.getvalue()
