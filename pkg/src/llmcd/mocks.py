"""Deterministic mock providers for offline pipeline testing.

Every mock honors the Provider interface, replies instantly (latency
0.0), and is a pure function of (its construction params, the request
message), so full pipeline runs are reproducible byte-for-byte.

The echo-style mocks read which nodes a prompt asks about straight
from its connectivity lines, so chunked prompts get chunked replies.
"""

from __future__ import annotations

import hashlib
import itertools
import random
import re
import threading
from typing import Iterable, Sequence

from .baseline import LPConfig, label_propagation
from .errors import ConfigError
from .gateway import ChatRequest, ChatResponse, Provider, TOKENS_ESTIMATED
from .graph import Graph, Partition, symmetrize
from .parsing import parse_assignments, render_assignments
from .serialize import estimate_tokens

__all__ = ["EchoOracle", "BaselineBrain", "Canned", "Noisy", "make_mock"]

_CONNECTIVITY_RE = re.compile(r"^Node (\d+) is connected to:", re.MULTILINE)


def _requested_nodes(message: str) -> set[int]:
    return {int(m.group(1)) for m in _CONNECTIVITY_RE.finditer(message)}


def _respond(text: str, request: ChatRequest, provider_id: str) -> ChatResponse:
    return ChatResponse(
        text=text,
        input_tokens=estimate_tokens(request.message),
        output_tokens=estimate_tokens(text),
        latency_seconds=0.0,
        provider_id=provider_id,
        token_source=TOKENS_ESTIMATED,
    )


class EchoOracle(Provider):
    """Replies with a preloaded partition, restricted to the nodes the
    prompt asks about. With ground truth loaded, downstream metrics
    must come out perfect; anything less is a pipeline bug."""

    def __init__(self, partition: Partition):
        if len(partition) == 0:
            raise ConfigError("echo_oracle needs a nonempty partition")
        self._partition = partition
        self.provider_id = "mock:echo_oracle"

    def complete(self, request: ChatRequest) -> ChatResponse:
        nodes = _requested_nodes(request.message)
        part = self._partition.restrict(nodes) if nodes else self._partition
        return _respond(render_assignments(part), request, self.provider_id)


class BaselineBrain(Provider):
    """Replies with whatever deterministic label propagation found."""

    def __init__(self, graph: Graph, seed: int = 0):
        self._partition = label_propagation(symmetrize(graph), LPConfig(seed=seed))
        self.provider_id = "mock:baseline_brain"

    def complete(self, request: ChatRequest) -> ChatResponse:
        nodes = _requested_nodes(request.message)
        part = self._partition.restrict(nodes) if nodes else self._partition
        return _respond(render_assignments(part), request, self.provider_id)


class Canned(Provider):
    """Cycles through scripted replies, one per request."""

    def __init__(self, replies: Sequence[str]):
        if not replies:
            raise ConfigError("canned mock needs at least one reply")
        self._replies = itertools.cycle(list(replies))
        self._lock = threading.Lock()
        self.provider_id = "mock:canned"

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            text = next(self._replies)
        return _respond(text, request, self.provider_id)


class Noisy(Provider):
    """Wraps another provider and corrupts its assignments.

    Each node's label is reassigned, with probability flip_rate, to a
    uniformly random label among those present in the base reply. The
    RNG is seeded from (seed, request message), so identical requests
    are corrupted identically and reruns replay exactly. flip_rate 0
    passes the base response through untouched.
    """

    def __init__(self, base: Provider, flip_rate: float, seed: int = 0):
        if not 0.0 <= flip_rate <= 1.0:
            raise ConfigError("flip_rate must be within [0, 1]")
        self._base = base
        self._flip_rate = flip_rate
        self._seed = seed
        self.provider_id = f"mock:noisy({base.provider_id})"

    def _rng_for(self, message: str) -> random.Random:
        digest = hashlib.sha256(
            f"{self._seed}:".encode("utf-8") + message.encode("utf-8")
        ).digest()
        return random.Random(int.from_bytes(digest, "big"))

    def complete(self, request: ChatRequest) -> ChatResponse:
        base = self._base.complete(request)
        if self._flip_rate == 0.0:
            return base
        part, _ = parse_assignments(base.text, _requested_nodes(request.message))
        if len(part) == 0:
            return base
        labels = sorted(part.labels)
        rng = self._rng_for(request.message)
        flipped = {}
        for node in sorted(part.covered):
            label = part.label_of(node)
            if rng.random() < self._flip_rate:
                label = labels[rng.randrange(len(labels))]
            flipped[node] = label
        text = render_assignments(Partition(flipped))
        return _respond(text, request, self.provider_id)


def make_mock(kind: str, **params) -> Provider:
    """Build a mock provider by name.

    Kinds: echo_oracle(partition), baseline_brain(graph, seed),
    canned(replies), noisy(base, flip_rate, seed).
    """
    try:
        if kind == "echo_oracle":
            provider: Provider = EchoOracle(params.pop("partition"))
        elif kind == "baseline_brain":
            provider = BaselineBrain(params.pop("graph"), params.pop("seed", 0))
        elif kind == "canned":
            provider = Canned(params.pop("replies"))
        elif kind == "noisy":
            provider = Noisy(
                params.pop("base"),
                params.pop("flip_rate"),
                params.pop("seed", 0),
            )
        else:
            raise ConfigError(
                f"unknown mock kind {kind!r}; choose echo_oracle, "
                "baseline_brain, canned, or noisy"
            )
    except KeyError as exc:
        raise ConfigError(f"mock kind {kind!r} is missing parameter {exc}") from exc
    if params:
        raise ConfigError(
            f"mock kind {kind!r} got unexpected parameters {sorted(params)}"
        )
    return provider
