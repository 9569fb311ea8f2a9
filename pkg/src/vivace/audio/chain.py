"""Per-voice processing chain model.

Every voice owns the same fixed six-node chain. The eq3 and reverb
stages are tracked and traced but not audibly rendered; their parameters
travel with the chain so a DSP drop-in stays local to the render stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

CHAIN_ORDER = ("source", "eq3", "reverb", "panner", "gain", "analyzer")


@dataclass(frozen=True)
class ChainNode:
    kind: str
    params: Mapping  # name -> float


def _first(voice, param, default):
    seq = voice.params.get(param)
    return float(seq[0]) if seq else default


def build_chain(voice) -> tuple[list[ChainNode], list[str]]:
    """Default chain for a voice, parameters seeded from its sequences.

    Chain node parameters are scalar, so each is initialized from the
    first element of the matching sequence. Returns (chain, warnings);
    voices without a renderable source stay in the chain but are silent.
    """
    warnings = []
    if voice.source is None:
        warnings.append(f"voice '{voice.name}' has no source and renders silent")
    elif voice.source.kind == "youtube":
        warnings.append(
            f"voice '{voice.name}' uses a youtube source; "
            "video playback is not rendered, voice is silent"
        )
    nodes = [
        ChainNode("source", {}),
        ChainNode(
            "eq3",
            {
                "low": _first(voice, "eq.low", 0.0),
                "mid": _first(voice, "eq.mid", 0.0),
                "high": _first(voice, "eq.high", 0.0),
            },
        ),
        ChainNode("reverb", {"time": _first(voice, "reverb.time", 0.0)}),
        ChainNode("panner", {"pan": _first(voice, "pan", 0.0)}),
        ChainNode("gain", {"gain": _first(voice, "gain", 1.0)}),
        ChainNode("analyzer", {}),
    ]
    return nodes, warnings
