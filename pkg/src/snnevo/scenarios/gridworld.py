"""Gridworld foraging on a G x G board with 4-neighbour moves.

Observation (8 values): food present above / below / left / right of the
agent, then wall adjacent above / below / left / right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from snnevo.errors import ScenarioError
from snnevo.rng import scenario_stream
from snnevo.scenarios.base import NONE, Environment, n_touched

UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
MOVES = {UP: (-1, 0), DOWN: (1, 0), LEFT: (0, -1), RIGHT: (0, 1)}


@dataclass(frozen=True)
class GridParams:
    size: int = 5
    n_food: int = 3
    max_steps: int = 64
    present_ticks: int = 0
    decision_ticks: int = 8

    def __post_init__(self):
        if self.size < 2:
            raise ScenarioError("gridworld needs size >= 2")
        if not 1 <= self.n_food < self.size * self.size:
            raise ScenarioError("gridworld needs 1 <= n_food < size*size")
        if self.max_steps < 1:
            raise ScenarioError("gridworld needs max_steps >= 1")
        if self.present_ticks < 0 or self.decision_ticks < 1:
            raise ScenarioError("gridworld needs present_ticks >= 0 and decision_ticks >= 1")


def base_layout(seed: int, params: GridParams) -> tuple[int, list[int]]:
    """Agent cell and food cells (row-major cell indices), before perturbation."""
    cells = scenario_stream(seed, "gridworld.layout").permutation(params.size * params.size)
    return int(cells[0]), [int(c) for c in cells[1 : 1 + params.n_food]]


def shift_layout(agent: int, food: list[int], seed: int, level: float, n_cells: int) -> list[int]:
    """Move ceil(level*F) food items to cells that held neither the agent nor any food."""
    rng = scenario_stream(seed, "layout_shift")
    original = set(food)
    food = list(food)
    for k in rng.permutation(len(food))[: n_touched(level, len(food))]:
        taken = {agent, *food, *original}
        free = [c for c in range(n_cells) if c not in taken]
        if not free:
            raise ScenarioError("grid too crowded for layout_shift (needs 2*n_food + 1 <= size*size)")
        food[k] = free[int(rng.integers(len(free)))]
    return food


class GridForageEnv(Environment):
    name = "gridworld_forage"
    params_cls = GridParams
    n_actions = 4
    perturbations = ("layout_shift",)

    def __init__(self, spec):
        super().__init__(spec)
        p = self.params
        agent, food = base_layout(spec.seed, p)
        pert = spec.perturbation
        if pert.kind == "layout_shift" and pert.active:
            food = shift_layout(agent, food, spec.seed, pert.level, p.size * p.size)
        self.agent = divmod(agent, p.size)
        self.food = {divmod(c, p.size) for c in food}

    @classmethod
    def obs_dim_for(cls, params) -> int:
        return 8

    @classmethod
    def max_score_for(cls, params) -> float:
        return float(params.n_food)

    def _clean_observation(self) -> np.ndarray:
        r, c = self.agent
        g = self.params.size
        obs = np.zeros(8)
        for fr, fc in self.food:
            obs[UP] = max(obs[UP], float(fr < r))
            obs[DOWN] = max(obs[DOWN], float(fr > r))
            obs[LEFT] = max(obs[LEFT], float(fc < c))
            obs[RIGHT] = max(obs[RIGHT], float(fc > c))
        obs[4] = float(r == 0)
        obs[5] = float(r == g - 1)
        obs[6] = float(c == 0)
        obs[7] = float(c == g - 1)
        return obs

    def _apply(self, action: int) -> float:
        delta = 0.0
        if action != NONE:
            dr, dc = MOVES[action]
            r, c = self.agent[0] + dr, self.agent[1] + dc
            g = self.params.size
            if 0 <= r < g and 0 <= c < g:
                self.agent = (r, c)
            if self.agent in self.food:
                self.food.remove(self.agent)
                delta = 1.0
        self.done = not self.food or self.steps + 1 >= self.params.max_steps
        return delta
