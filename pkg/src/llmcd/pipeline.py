"""One detection pass: graph in, model-assigned partition out.

Symmetrize, serialize, split into token-budgeted chunks, prompt the
provider once per chunk, parse each reply, and merge the chunk
partitions via anchor alignment. Works identically for real providers
and mocks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gateway import ChatRequest, Provider, TOKENS_ESTIMATED, TOKENS_FROM_PROVIDER
from .graph import Graph, Partition, symmetrize
from .parsing import ParseDiagnostics, merge_chunks, parse_assignments
from .prompts import DEFAULT_VARIANT_ID, render_prompt
from .serialize import NodeChunk, estimate_tokens, plan_chunks, serialize

__all__ = ["DetectionResult", "detect_communities"]


@dataclass(frozen=True)
class DetectionResult:
    """Merged partition plus accounting for one full pass."""

    partition: Partition
    coverage: float
    chunk_count: int
    diagnostics: tuple[ParseDiagnostics, ...]
    input_tokens: int
    output_tokens: int
    latency_seconds: float
    token_source: str

    @property
    def total_conflicts(self) -> int:
        return sum(len(d.conflicts) for d in self.diagnostics)


def detect_communities(
    graph: Graph,
    provider: Provider,
    *,
    prompt_variant: int = DEFAULT_VARIANT_ID,
    chunk_budget_tokens: int | None = None,
    anchor_count: int = 0,
    max_output_tokens: int = 4096,
    temperature: float = 0.0,
    model_name: str = "",
    request_id_prefix: str = "detect",
    strict_parse: bool = False,
    few_shot_prefix: str = "",
) -> DetectionResult:
    """Run the detection pipeline once.

    With chunk_budget_tokens unset the whole graph goes in one prompt;
    otherwise the serialization is split greedily under the budget and
    each later chunk repeats anchor_count earlier nodes for label
    alignment. Request ids are deterministic functions of the prefix
    and chunk index.
    """
    g = symmetrize(graph)
    if chunk_budget_tokens is None:
        full = serialize(g)
        chunks = [
            NodeChunk(
                index=0,
                member_nodes=g.node_ids,
                anchor_nodes=(),
                chunk_text=full,
            )
        ]
    else:
        # reserve room for the instruction that render_prompt appends
        probe = render_prompt(serialize(g), prompt_variant, few_shot_prefix=few_shot_prefix)
        overhead = estimate_tokens(probe.variant.instruction_text) + 1
        if few_shot_prefix:
            overhead += estimate_tokens(few_shot_prefix) + 1
        chunks = plan_chunks(
            g, chunk_budget_tokens, anchor_count, overhead_tokens=overhead
        )

    partials: list[tuple[Partition, frozenset[int]]] = []
    diagnostics: list[ParseDiagnostics] = []
    input_tokens = 0
    output_tokens = 0
    latency = 0.0
    sources = set()
    for chunk in chunks:
        bundle = render_prompt(
            chunk.chunk_text, prompt_variant, few_shot_prefix=few_shot_prefix
        )
        request = ChatRequest(
            message=bundle.full_message,
            model_name=model_name,
            request_id=f"{request_id_prefix}:chunk{chunk.index}",
            temperature=temperature,
            max_output_tokens=max_output_tokens,
        )
        response = provider.complete(request)
        part, diag = parse_assignments(
            response.text, chunk.requested_nodes, strict=strict_parse
        )
        partials.append((part, frozenset(chunk.anchor_nodes)))
        diagnostics.append(diag)
        input_tokens += response.input_tokens
        output_tokens += response.output_tokens
        latency += response.latency_seconds
        sources.add(response.token_source)

    merged = merge_chunks(partials)
    if sources == {TOKENS_FROM_PROVIDER}:
        token_source = TOKENS_FROM_PROVIDER
    elif sources == {TOKENS_ESTIMATED} or not sources:
        token_source = TOKENS_ESTIMATED
    else:
        token_source = "mixed"
    return DetectionResult(
        partition=merged,
        coverage=len(merged) / g.node_count,
        chunk_count=len(chunks),
        diagnostics=tuple(diagnostics),
        input_tokens=input_tokens,
        output_tokens=output_tokens,
        latency_seconds=latency,
        token_source=token_source,
    )
