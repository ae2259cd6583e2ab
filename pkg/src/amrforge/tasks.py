"""Training-sample construction for the unified text+graph format.

Every sample's input is a text segment followed by a graph segment
(``<s> ... </s> <g> ... </g>``); each segment is the original sequence, a
masked version of it, or the single ``[mask]`` placeholder for an absent
side.  The eight task layouts cover six pre-training tasks (denoising one
or both sides) and the two fine-tuning tasks (generation and parsing).

Two tasks, masked-text-with-full-graph and full-text-with-masked-graph,
use a masking rate that grows linearly over training so that late
pre-training approaches the fine-tuning format.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from . import tokens as tk
from .amr import AmrGraph, validate
from .corrupt import (
    CorruptionConfig,
    CorruptionRecord,
    compose,
    derive_rng,
    mask_text,
    node_edge_step,
    subgraph_step,
)
from .linearize import linearize


class TaskTag(Enum):
    """The eight input/output layouts; m = masked, e = empty segment."""

    MT_EG2T = "mt_eg2t"  # masked text + empty graph -> text
    ET_MG2G = "et_mg2g"  # empty text + masked graph -> graph
    MT_G2T = "mt_g2t"  # masked text + full graph -> text (dynamic rate)
    T_MG2G = "t_mg2g"  # full text + masked graph -> graph (dynamic rate)
    MT_MG2T = "mt_mg2t"  # masked text + masked graph -> text
    MT_MG2G = "mt_mg2g"  # masked text + masked graph -> graph
    ET_G2T = "et_g2t"  # empty text + full graph -> text (fine-tuning)
    T_EG2G = "t_eg2g"  # full text + empty graph -> graph (fine-tuning)


# (text segment, graph segment, target side)
_LAYOUT: dict[TaskTag, tuple[str, str, str]] = {
    TaskTag.MT_EG2T: ("masked", "empty", "text"),
    TaskTag.ET_MG2G: ("empty", "masked", "graph"),
    TaskTag.MT_G2T: ("masked", "plain", "text"),
    TaskTag.T_MG2G: ("plain", "masked", "graph"),
    TaskTag.MT_MG2T: ("masked", "masked", "text"),
    TaskTag.MT_MG2G: ("masked", "masked", "graph"),
    TaskTag.ET_G2T: ("empty", "plain", "text"),
    TaskTag.T_EG2G: ("plain", "empty", "graph"),
}

PRETRAINING_TAGS = (
    TaskTag.MT_EG2T,
    TaskTag.ET_MG2G,
    TaskTag.MT_G2T,
    TaskTag.T_MG2G,
    TaskTag.MT_MG2T,
    TaskTag.MT_MG2G,
)
FINETUNING_TAGS = (TaskTag.ET_G2T, TaskTag.T_EG2G)
ALL_TAGS = PRETRAINING_TAGS + FINETUNING_TAGS

# Only these two tasks follow the dynamic schedule; the doubly-masked
# tasks keep the static rates.
DYNAMIC_TAGS = frozenset((TaskTag.MT_G2T, TaskTag.T_MG2G))

_TAG_ORDER = {tag: i for i, tag in enumerate(ALL_TAGS)}


def layout(tag: TaskTag) -> tuple[str, str, str]:
    return _LAYOUT[tag]


class TaskError(ValueError):
    """A tag applied to inputs it cannot use."""


@dataclass(frozen=True)
class MaskSchedule:
    """Linearly growing masking rate: initial_rate + slope * step / total_steps."""

    total_steps: int
    initial_rate: float = 0.1
    slope: float = 0.75

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError("total_steps must be at least 1")
        if self.initial_rate != 0.1 or self.slope != 0.75:
            raise ValueError("the schedule is fixed at 0.1 + 0.75 * t/T")


def schedule_rate(step: int, schedule: MaskSchedule) -> float:
    if step < 0 or step > schedule.total_steps:
        raise ValueError(
            f"step {step} outside [0, {schedule.total_steps}]"
        )
    return schedule.initial_rate + schedule.slope * step / schedule.total_steps


@dataclass(frozen=True)
class SampleRecord:
    """Per-segment corruption records for one sample."""

    text: CorruptionRecord | None = None
    graph: CorruptionRecord | None = None


@dataclass(frozen=True)
class TaskSample:
    tag: TaskTag
    input: tuple[str, ...]
    output: tuple[str, ...]
    step: int
    record: SampleRecord


def build_sample(
    tag: TaskTag,
    text: list[str] | None,
    graph: AmrGraph | None,
    step: int,
    schedule: MaskSchedule,
    config: CorruptionConfig,
    rng: random.Random,
) -> TaskSample:
    """Construct one sample for ``tag``.

    The text segment is corrupted before the graph segment, so random
    draws are reproducible for a fixed generator.  Targets are never
    corrupted.  An empty segment is rendered as the single ``[mask]``
    token between its markers.
    """
    text_mode, graph_mode, target = _LAYOUT[tag]
    needs_text = text_mode != "empty" or target == "text"
    needs_graph = graph_mode != "empty" or target == "graph"
    if needs_text and not text:
        raise TaskError(f"task {tag.value} requires a non-empty text")
    if needs_graph and graph is None:
        raise TaskError(f"task {tag.value} requires a graph")

    dynamic_rate = schedule_rate(step, schedule) if tag in DYNAMIC_TAGS else None

    text_record: CorruptionRecord | None = None
    if text_mode == "plain":
        text_part = list(text)
    elif text_mode == "empty":
        text_part = [tk.MASK]
    else:
        rate = dynamic_rate if tag is TaskTag.MT_G2T else config.text_rate
        text_part, text_record = mask_text(list(text), rate, rng)

    graph_record: CorruptionRecord | None = None
    if graph_mode == "plain":
        graph_part = linearize(graph)
    elif graph_mode == "empty":
        graph_part = [tk.MASK]
    else:
        if tag is TaskTag.T_MG2G:
            node_rate = edge_rate = dynamic_rate
        else:
            node_rate, edge_rate = config.node_rate, config.edge_rate
        graph_part, graph_record = compose(
            graph,
            [
                subgraph_step(config.subgraph_rate),
                node_edge_step(node_rate, edge_rate),
            ],
            rng,
        )

    sample_input = (
        [tk.TEXT_START]
        + text_part
        + [tk.TEXT_END, tk.GRAPH_START]
        + graph_part
        + [tk.GRAPH_END]
    )
    if target == "text":
        sample_output = [tk.TEXT_START] + list(text) + [tk.TEXT_END]
    else:
        sample_output = [tk.GRAPH_START] + linearize(graph) + [tk.GRAPH_END]

    return TaskSample(
        tag=tag,
        input=tuple(sample_input),
        output=tuple(sample_output),
        step=step,
        record=SampleRecord(text=text_record, graph=graph_record),
    )


def build_corpus(
    pairs: Iterable[tuple[list[str], AmrGraph]],
    schedule: MaskSchedule,
    config: CorruptionConfig,
    tasks: Iterable[TaskTag],
) -> Iterator[TaskSample]:
    """One sample per selected task per pair, deterministic under the seed.

    The step counter advances once per pair and saturates at the
    schedule's final step.  Each pair draws from its own generator
    (corpus seed XOR pair index), so distinct pairs could be built in
    parallel without changing the output.
    """
    selected = sorted(set(tasks), key=_TAG_ORDER.__getitem__)
    if not selected:
        raise ValueError("no tasks selected")
    for index, (text, graph) in enumerate(pairs):
        if graph is not None:
            diagnostics = validate(graph)
            if diagnostics:
                raise ValueError(
                    f"pair {index}: invalid graph: "
                    + "; ".join(d.message for d in diagnostics)
                )
        rng = derive_rng(config.seed, index)
        step = min(index, schedule.total_steps)
        for tag in selected:
            yield build_sample(tag, text, graph, step, schedule, config, rng)


def sample_to_json(sample: TaskSample) -> str:
    """One JSON Lines record: task, step, input and output token arrays."""
    return json.dumps(
        {
            "task": sample.tag.value,
            "step": sample.step,
            "input": list(sample.input),
            "output": list(sample.output),
        },
        ensure_ascii=False,
    )


def parse_tag(name: str) -> TaskTag:
    try:
        return TaskTag(name)
    except ValueError:
        raise ValueError(
            f"unknown task {name!r}; expected one of "
            + ", ".join(t.value for t in ALL_TAGS)
        ) from None
