from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations


def default_slack_bits(num_targets: int, steps: int) -> int:
    """Bits needed for a slack covering overlap counts 0..(m-1)(S+1)."""
    return max(1, math.ceil(math.log2((num_targets - 1) * (steps + 1) + 1))) if num_targets > 1 else 0


@dataclass(frozen=True)
class VarIndex:
    """Flat layout of the time-expanded variables.

    Block order: path bits ``X[k, s, i]`` (target position k, step s in 0..S,
    vertex i), then slack bits for every target after the first, then one
    overlap indicator per unordered target pair and cell ``(s, i)``.
    """

    n: int
    steps: int
    targets: tuple[int, ...]
    slack_bits_per_target: int

    @classmethod
    def create(cls, n: int, targets, steps: int | None = None, slack_bits: int | None = None) -> VarIndex:
        targets = tuple(int(t) for t in targets)
        steps = n if steps is None else int(steps)
        if steps < 1:
            raise ValueError("horizon must be at least one step")
        if slack_bits is None:
            slack_bits = default_slack_bits(len(targets), steps)
        return cls(n, steps, targets, int(slack_bits))

    @property
    def m(self) -> int:
        return len(self.targets)

    @property
    def layers(self) -> int:
        return self.steps + 1

    @property
    def num_path_vars(self) -> int:
        return self.m * self.layers * self.n

    @property
    def num_slack_vars(self) -> int:
        return max(self.m - 1, 0) * self.slack_bits_per_target

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(combinations(range(self.m), 2))

    @property
    def num_aux_vars(self) -> int:
        return len(self.pairs) * self.layers * self.n

    @property
    def num_vars(self) -> int:
        return self.num_path_vars + self.num_slack_vars + self.num_aux_vars

    def x(self, k: int, s: int, i: int) -> int:
        """Path bit: target position k occupies vertex i at step s."""
        if not (0 <= k < self.m and 0 <= s <= self.steps and 0 <= i < self.n):
            raise IndexError(f"path variable ({k}, {s}, {i}) out of range")
        return (k * self.layers + s) * self.n + i

    def slack(self, k: int, b: int) -> int:
        if not (1 <= k < self.m and 0 <= b < self.slack_bits_per_target):
            raise IndexError(f"slack variable ({k}, {b}) out of range")
        return self.num_path_vars + (k - 1) * self.slack_bits_per_target + b

    def pair_index(self, k: int, kp: int) -> int:
        a, b = (k, kp) if k < kp else (kp, k)
        if a == b or not 0 <= a < b < self.m:
            raise IndexError(f"target pair ({k}, {kp}) out of range")
        # position of (a, b) in lexicographic combinations order
        return a * self.m - a * (a + 1) // 2 + (b - a - 1)

    def aux(self, k: int, kp: int, s: int, i: int) -> int:
        """Overlap indicator standing for ``X[k, s, i] * X[kp, s, i]``."""
        p = self.pair_index(k, kp)
        if not (0 <= s <= self.steps and 0 <= i < self.n):
            raise IndexError(f"overlap variable ({s}, {i}) out of range")
        return self.num_path_vars + self.num_slack_vars + (p * self.layers + s) * self.n + i

    def describe(self, var: int) -> tuple:
        """Inverse of the flat layout: ("x", k, s, i), ("slack", k, b) or ("aux", k, kp, s, i)."""
        if not 0 <= var < self.num_vars:
            raise IndexError(f"variable {var} out of range")
        if var < self.num_path_vars:
            ks, i = divmod(var, self.n)
            k, s = divmod(ks, self.layers)
            return ("x", k, s, i)
        var -= self.num_path_vars
        if var < self.num_slack_vars:
            k, b = divmod(var, self.slack_bits_per_target)
            return ("slack", k + 1, b)
        var -= self.num_slack_vars
        ps, i = divmod(var, self.n)
        p, s = divmod(ps, self.layers)
        k, kp = self.pairs[p]
        return ("aux", k, kp, s, i)

    def max_slack(self) -> int:
        return (1 << self.slack_bits_per_target) - 1
