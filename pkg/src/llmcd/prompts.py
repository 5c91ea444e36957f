"""Instruction variants for the community-detection prompt.

The four instruction texts are byte-frozen constants: model behavior is
sensitive to phrasing, so experiments must be able to cite a variant id
and get the same bytes every time. Variant 4 is the method default; it
is the only wording that both names the task and forbids extra prose.
Variant 3 additionally requests a justification per node, which the
reply parser strips.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, DataError
from .serialize import GraphText, TokenEstimator, estimate_tokens

__all__ = ["PromptVariant", "PromptBundle", "render_prompt", "list_variants"]


@dataclass(frozen=True)
class PromptVariant:
    id: int
    instruction_text: str
    expects_reason_field: bool
    is_default: bool


_VARIANTS: dict[int, PromptVariant] = {
    1: PromptVariant(
        id=1,
        instruction_text=(
            "A community is a group of nodes that are more densely connected "
            "to each other internally than to the rest of the network. Based "
            "on these node connections, output in the format Node:<node id>; "
            "Community:<Community id>."
        ),
        expects_reason_field=False,
        is_default=False,
    ),
    2: PromptVariant(
        id=2,
        instruction_text=(
            "You are doing community detection. Assign each node to a "
            "community. Give outcome as Node:<node id>; Community:"
            "<Community id> format. Do not give any other text."
        ),
        expects_reason_field=False,
        is_default=False,
    ),
    3: PromptVariant(
        id=3,
        instruction_text=(
            "A community is a group of nodes that are more densely connected "
            "to each other internally than to the rest of the network. You "
            "are doing community detection. Along with assigning communities, "
            "provide a brief justification for each decision. Format as "
            "Node:<node id>; Community:<Community id>; Reason:<reason>."
        ),
        expects_reason_field=True,
        is_default=False,
    ),
    4: PromptVariant(
        id=4,
        instruction_text=(
            "A community is a group of nodes that are more densely connected "
            "to each other internally than to the rest of the network. You "
            "are doing community detection. Based on these node connections, "
            "which community each node belongs? Give outcome as "
            "Node:<node id>; Community:<Community id> format. Do not give "
            "any other text."
        ),
        expects_reason_field=False,
        is_default=True,
    ),
}

DEFAULT_VARIANT_ID = 4


@dataclass(frozen=True)
class PromptBundle:
    """A ready-to-send message: connectivity text, newline, instruction."""

    graph_text: GraphText
    variant: PromptVariant
    full_message: str
    estimated_tokens: int


def render_prompt(
    graph_text: GraphText,
    variant_id: int = DEFAULT_VARIANT_ID,
    *,
    few_shot_prefix: str = "",
    token_estimator: TokenEstimator | None = None,
) -> PromptBundle:
    """Assemble the prompt for one request.

    ``few_shot_prefix``, when nonempty, is prepended before the graph
    text (worked examples, extra context); the default is zero-shot.
    """
    variant = _VARIANTS.get(variant_id)
    if variant is None:
        raise ConfigError(
            f"unknown prompt variant {variant_id!r}; valid ids are 1-4"
        )
    if not graph_text.full_text.strip():
        raise DataError("graph text is empty; nothing to ask about")
    parts = []
    if few_shot_prefix:
        parts.append(few_shot_prefix)
    parts.append(graph_text.full_text)
    parts.append(variant.instruction_text)
    message = "\n".join(parts)
    est = token_estimator or estimate_tokens
    return PromptBundle(
        graph_text=graph_text,
        variant=variant,
        full_message=message,
        estimated_tokens=est(message),
    )


def list_variants() -> list[PromptVariant]:
    """All four instruction variants, ascending by id."""
    return [_VARIANTS[i] for i in sorted(_VARIANTS)]
