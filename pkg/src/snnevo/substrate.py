"""Discrete-time spiking network with ping-pong input buffers and trace STDP.

Each neuron owns two input accumulators. During a tick one of them is the
send role: its contents are integrated into the membrane potential and then
cleared. The other is the receive role: spikes emitted this tick are
deposited there. Roles swap at the end of every tick, which gives every
synapse a delay of exactly one tick.

Weights are indexed ``weights[pre, post]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from snnevo.errors import DimensionError, NumericError

if TYPE_CHECKING:
    from snnevo.genome import Genome

BUFFER_A = 0
BUFFER_B = 1
NEVER = -1


@dataclass(frozen=True)
class FeatureFlags:
    stdp_enabled: bool = True
    refractory_enabled: bool = True
    symmetric_stdp: bool = False

    def bits(self) -> tuple[int, int, int]:
        return (int(self.stdp_enabled), int(self.refractory_enabled), int(self.symmetric_stdp))

    @classmethod
    def from_bits(cls, bits) -> FeatureFlags:
        a, b, c = (bool(int(x)) for x in bits)
        return cls(a, b, c)


@dataclass(frozen=True)
class MicroParams:
    """Per-network neuron and synapse constants."""

    threshold: float = 1.0
    decay: float = 0.9
    v_reset: float = 0.0
    refractory_period: int = 1
    stdp_a_plus: float = 0.1
    stdp_a_minus: float = 0.1
    stdp_tau: float = 5.0
    learning_rate: float = 0.1
    w_max: float = 2.0
    flags: FeatureFlags = field(default_factory=FeatureFlags)

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if not 0.0 <= self.decay < 1.0:
            raise ValueError("decay must lie in [0, 1)")
        if not self.threshold > self.v_reset:
            raise ValueError("threshold must exceed v_reset")
        if self.refractory_period < 0:
            raise ValueError("refractory_period must be >= 0")
        if self.stdp_a_plus < 0 or self.stdp_a_minus < 0 or self.learning_rate < 0:
            raise ValueError("STDP amplitudes and learning rate must be >= 0")
        if not self.stdp_tau > 0:
            raise ValueError("stdp_tau must be positive")
        if not self.w_max > 0:
            raise ValueError("w_max must be positive")


@dataclass(frozen=True)
class Topology:
    n_neurons: int
    n_in: int
    n_out: int

    def __post_init__(self):
        if self.n_neurons <= 0:
            raise DimensionError("n_neurons must be positive")
        if self.n_in < 0 or self.n_out < 0 or self.n_in + self.n_out > self.n_neurons:
            raise DimensionError(
                f"n_in + n_out must not exceed n_neurons (got {self.n_in} + {self.n_out} > {self.n_neurons})"
            )


@dataclass(frozen=True)
class NeuronState:
    """Snapshot of one neuron. Pre and post traces coincide because every
    neuron is both a presynaptic and a postsynaptic partner with the same kernel."""

    potential: float
    buffer_a: float
    buffer_b: float
    active_buffer: int
    refractory_remaining: int
    last_spike_tick: int
    pre_trace: float
    post_trace: float


class Network:
    """Mutable runtime state of one agent."""

    def __init__(self, weights: np.ndarray, micro: MicroParams, n_in: int, n_out: int):
        weights = np.array(weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise DimensionError(f"weights must be square, got shape {weights.shape}")
        self.topology = Topology(weights.shape[0], n_in, n_out)
        self.micro = micro
        np.fill_diagonal(weights, 0.0)
        np.clip(weights, -micro.w_max, micro.w_max, out=weights)
        self.weights = weights
        self.trace_decay = math.exp(-1.0 / micro.stdp_tau)
        self.reset_state()

    @property
    def n_neurons(self) -> int:
        return self.topology.n_neurons

    @property
    def n_in(self) -> int:
        return self.topology.n_in

    @property
    def n_out(self) -> int:
        return self.topology.n_out

    def reset_state(self) -> None:
        """Return every neuron to rest. Weights are left alone."""
        n = self.n_neurons
        self.potential = np.full(n, self.micro.v_reset, dtype=np.float64)
        self.buffers = np.zeros((2, n), dtype=np.float64)
        self.active = BUFFER_A
        self.refractory = np.zeros(n, dtype=np.int64)
        self.last_spike = np.full(n, NEVER, dtype=np.int64)
        self.trace = np.zeros(n, dtype=np.float64)
        self.tick = 0

    def neuron(self, i: int) -> NeuronState:
        return NeuronState(
            potential=float(self.potential[i]),
            buffer_a=float(self.buffers[BUFFER_A, i]),
            buffer_b=float(self.buffers[BUFFER_B, i]),
            active_buffer=self.active,
            refractory_remaining=int(self.refractory[i]),
            last_spike_tick=int(self.last_spike[i]),
            pre_trace=float(self.trace[i]),
            post_trace=float(self.trace[i]),
        )

    @property
    def neurons(self) -> list[NeuronState]:
        return [self.neuron(i) for i in range(self.n_neurons)]

    def copy(self) -> Network:
        other = Network.__new__(Network)
        other.topology = self.topology
        other.micro = self.micro
        other.trace_decay = self.trace_decay
        for name in ("weights", "potential", "buffers", "refractory", "last_spike", "trace"):
            setattr(other, name, getattr(self, name).copy())
        other.active = self.active
        other.tick = self.tick
        return other


def build_network(genome: Genome, topology: Topology) -> Network:
    n = topology.n_neurons
    if genome.n_neurons != n:
        raise DimensionError(f"genome encodes N={genome.n_neurons}, topology asks for N={n}")
    return Network(genome.weight_genes.reshape(n, n), genome.micro_params(), topology.n_in, topology.n_out)


def _integrate(net: Network, injected) -> np.ndarray:
    """Consume send-role buffers and decide who fires. Returns the spike vector."""
    inj = np.asarray(injected, dtype=np.float64)
    if inj.shape != (net.topology.n_in,):
        raise DimensionError(f"injection must have length {net.topology.n_in}, got shape {inj.shape}")
    if not np.isfinite(inj).all():
        raise NumericError("injected current must be finite")
    micro = net.micro
    send = net.buffers[net.active]
    v = micro.decay * net.potential + send
    v[: inj.shape[0]] += inj
    send[:] = 0.0
    fired = v >= micro.threshold
    if micro.flags.refractory_enabled:
        refr = net.refractory
        fired &= refr == 0
        np.subtract(refr, 1, out=refr, where=refr > 0)
        refr[fired] = micro.refractory_period
    v[fired] = micro.v_reset
    net.potential = v
    net.last_spike[fired] = net.tick
    return fired


def _advance(net: Network) -> None:
    net.active ^= 1
    net.tick += 1


def step(net: Network, injected) -> np.ndarray:
    """Advance one tick. ``injected`` drives the first ``n_in`` neurons."""
    fired = _integrate(net, injected)
    recv = net.buffers[net.active ^ 1]
    w = net.weights
    for i in np.flatnonzero(fired):
        recv += w[i]
    _advance(net)
    return fired


def apply_plasticity(net: Network, fired: np.ndarray) -> float:
    """Pair-based trace STDP for one tick; returns the pre-clamp sum of |dw|.

    Traces decay first, so a partner that spiked ``d`` ticks ago contributes
    ``exp(-d / tau)``. Spikes from the current tick are added to the traces
    after the update, so coincident spikes do not pair with each other.
    """
    micro = net.micro
    if not micro.flags.stdp_enabled:
        return 0.0
    trace = net.trace
    trace *= net.trace_decay
    idx = np.flatnonzero(fired)
    if idx.size == 0:
        return 0.0
    eta = micro.learning_rate
    a_minus = micro.stdp_a_plus if micro.flags.symmetric_stdp else micro.stdp_a_minus
    dw = np.zeros_like(net.weights)
    # potentiation: post i fired, pre j earlier -> dw[j, i] += eta*a_plus*trace[j]
    dw[:, idx] = ((eta * micro.stdp_a_plus) * trace)[:, None]
    # depression: pre j fired, post i earlier -> dw[j, i] -= eta*a_minus*trace[i]
    dw[idx, :] -= ((eta * a_minus) * trace)[None, :]
    dw[idx, idx] = 0.0
    magnitude = float(np.abs(dw).sum())
    w = net.weights
    w += dw
    np.clip(w, -micro.w_max, micro.w_max, out=w)
    trace[idx] += 1.0
    return magnitude


def weight_change_norm(before: np.ndarray, after: np.ndarray) -> float:
    """Mean absolute elementwise change, sum |after - before| / N^2."""
    before = np.asarray(before, dtype=np.float64)
    after = np.asarray(after, dtype=np.float64)
    if before.shape != after.shape:
        raise DimensionError(f"shape mismatch: {before.shape} vs {after.shape}")
    if before.size == 0:
        return 0.0
    return float(np.abs(after - before).sum() / before.size)


class PhysicalNeuron:
    """Handle on one real neuron of a network."""

    __slots__ = ("net", "index")

    def __init__(self, net: Network, index: int):
        self.net = net
        self.index = index

    @property
    def state(self) -> NeuronState:
        return self.net.neuron(self.index)


class AgentNeuron:
    """Agent-layer unit. Holds no state of its own, only a pointer to a physical neuron."""

    __slots__ = ("target",)

    def __init__(self, target: PhysicalNeuron):
        self.target = target

    @property
    def index(self) -> int:
        return self.target.index

    @property
    def state(self) -> NeuronState:
        return self.target.state


class LayeredView:
    """Two-tier view of a fully connected network.

    The agent layer mirrors the physical layer one-to-one, and the recurrent
    matrix becomes the inter-layer matrix between them. Spikes leave through the
    agent layer and arrive in the physical layer's receive buffers.
    """

    def __init__(self, net: Network):
        self.net = net
        self.physical_layer = [PhysicalNeuron(net, i) for i in range(net.n_neurons)]
        self.agent_layer = [AgentNeuron(p) for p in self.physical_layer]

    @property
    def inter_layer_weights(self) -> np.ndarray:
        return self.net.weights

    def step(self, injected) -> np.ndarray:
        net = self.net
        fired = _integrate(net, injected)
        recv = net.buffers[net.active ^ 1]
        w = self.inter_layer_weights
        for unit in self.agent_layer:
            if fired[unit.index]:
                recv += w[unit.index]
        _advance(net)
        return fired


def layered_view(net: Network) -> LayeredView:
    return LayeredView(net)
