"""Attention records collected during a forward pass, their JSON-lines
dump and a per-relation summary."""

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Tuple, Union

import numpy as np


@dataclass
class AttentionRecord:
    layer: int
    stage: str
    head: int
    relation: str
    src_type: str
    src: int
    dst_type: str
    dst: int
    alpha: float

    def to_dict(self) -> dict:
        return {
            "layer": self.layer,
            "stage": self.stage,
            "head": self.head,
            "relation": self.relation,
            "src_type": self.src_type,
            "src": self.src,
            "dst_type": self.dst_type,
            "dst": self.dst,
            "alpha": self.alpha,
        }


@dataclass
class AttentionBlock:
    """α of one relation in one layer: [E, H] with the edge endpoints."""

    layer: int
    stage: str
    relation: str
    src_type: str
    dst_type: str
    src: np.ndarray
    dst: np.ndarray
    alpha: np.ndarray

    def records(self) -> Iterator[AttentionRecord]:
        for e in range(len(self.src)):
            for h in range(self.alpha.shape[1]):
                yield AttentionRecord(
                    layer=self.layer,
                    stage=self.stage,
                    head=h,
                    relation=self.relation,
                    src_type=self.src_type,
                    src=int(self.src[e]),
                    dst_type=self.dst_type,
                    dst=int(self.dst[e]),
                    alpha=float(self.alpha[e, h]),
                )


@dataclass
class AttentionTrace:
    blocks: List[AttentionBlock] = field(default_factory=list)

    def add(self, block: AttentionBlock):
        self.blocks.append(block)

    def records(self) -> List[AttentionRecord]:
        return [record for block in self.blocks for record in block.records()]

    def __len__(self) -> int:
        return sum(b.alpha.size for b in self.blocks)


def write_attention_jsonl(trace: AttentionTrace, path: Union[str, Path]) -> Path:
    """One JSON object per line, the fields of ``AttentionRecord``. ``stage``
    ("map" or "scene") tells the two encoder stages apart, since ``layer``
    restarts at 0 in each."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for block in trace.blocks:
            for record in block.records():
                f.write(json.dumps(record.to_dict()) + "\n")
    return path


def read_attention_jsonl(path: Union[str, Path]) -> List[AttentionRecord]:
    with Path(path).open(encoding="utf-8") as f:
        return [AttentionRecord(**json.loads(line)) for line in f if line.strip()]


def summarize_attention(trace: AttentionTrace) -> Dict[Tuple[str, str], float]:
    """Share of the attention mass that targets receive through each
    relation, per (stage, relation), averaged over layers and heads."""
    mass: Dict[Tuple[str, str], float] = defaultdict(float)
    totals: Dict[Tuple[str, str], float] = defaultdict(float)
    target_type: Dict[Tuple[str, str], str] = {}
    for block in trace.blocks:
        key = (block.stage, block.relation)
        mass[key] += float(block.alpha.sum())
        totals[(block.stage, block.dst_type)] += float(block.alpha.sum())
        target_type[key] = block.dst_type
    return {
        key: value / totals[(key[0], target_type[key])]
        for key, value in mass.items()
        if totals[(key[0], target_type[key])] > 0
    }


def attention_between(
    trace: AttentionTrace,
    stage: str,
    relation: str,
    src_nodes: np.ndarray,
    dst_nodes: np.ndarray,
) -> float:
    """Total α flowing from any of ``src_nodes`` into any of ``dst_nodes``
    over all layers and heads of ``stage``."""
    total = 0.0
    for block in trace.blocks:
        if block.stage != stage or block.relation != relation:
            continue
        mask = np.isin(block.src, src_nodes) & np.isin(block.dst, dst_nodes)
        total += float(block.alpha[mask].sum())
    return total
