"""Operational transformation over the shared code buffer.

The server owns a single total order of operations; clients rebase. An
operation is a run of components over the whole document: retain n
(positive int), delete n (negative int), or insert (str). Concurrent
inserts at one position are ordered by client id, lexicographically
smaller first, so every replica picks the same winner.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

from .errors import VivaceError
from .parser import parse

Component = object  # int (retain > 0, delete < 0) | str (insert)


class SpanMismatch(VivaceError):
    pass


class StaleVersion(VivaceError):
    pass


def normalize(components) -> tuple:
    """Canonical component run: no zeros, no empty inserts, no adjacent twins."""
    out = []
    for comp in components:
        if isinstance(comp, str):
            if not comp:
                continue
            if out and isinstance(out[-1], str):
                out[-1] += comp
                continue
        elif isinstance(comp, int):
            if comp == 0:
                continue
            if out and isinstance(out[-1], int) and (out[-1] > 0) == (comp > 0):
                out[-1] += comp
                continue
        else:
            raise TypeError(f"bad component: {comp!r}")
        out.append(comp)
    return tuple(out)


def consumed_length(components) -> int:
    """Characters of the base document covered by retains and deletes."""
    return sum(abs(c) for c in components if isinstance(c, int))


def produced_length(components) -> int:
    return sum(len(c) if isinstance(c, str) else max(c, 0) for c in components)


@dataclass(frozen=True)
class DocOp:
    components: tuple
    base_version: int
    client_id: str

    def __post_init__(self):
        object.__setattr__(self, "components", normalize(self.components))


def apply_components(doc: str, components) -> str:
    if consumed_length(components) != len(doc):
        raise SpanMismatch(
            f"op covers {consumed_length(components)} chars, document has {len(doc)}"
        )
    out = []
    pos = 0
    for comp in components:
        if isinstance(comp, str):
            out.append(comp)
        elif comp > 0:
            out.append(doc[pos : pos + comp])
            pos += comp
        else:
            pos += -comp
    return "".join(out)


def apply_op(doc: str, op: DocOp) -> str:
    """Apply an operation to the document it was built against."""
    return apply_components(doc, op.components)


def _push(out: list, comp) -> None:
    # append keeping the run canonical (used only with nonzero components)
    if out:
        last = out[-1]
        if isinstance(comp, str):
            if isinstance(last, str):
                out[-1] = last + comp
                return
        elif isinstance(last, int) and (last > 0) == (comp > 0):
            out[-1] = last + comp
            return
    out.append(comp)


def transform_components(comps_a, comps_b, a_first: bool) -> tuple[tuple, tuple]:
    """Component-level transform core; inputs must cover equal spans."""
    out_a = []  # a rebased to apply after b
    out_b = []  # b rebased to apply after a
    ia = ib = 0
    na, nb = len(comps_a), len(comps_b)
    ca = comps_a[ia] if na else None
    cb = comps_b[ib] if nb else None

    while ca is not None or cb is not None:
        if isinstance(ca, str) and (a_first or not isinstance(cb, str)):
            _push(out_a, ca)
            _push(out_b, len(ca))
            ia += 1
            ca = comps_a[ia] if ia < na else None
            continue
        if isinstance(cb, str):
            _push(out_a, len(cb))
            _push(out_b, cb)
            ib += 1
            cb = comps_b[ib] if ib < nb else None
            continue
        if ca is None or cb is None:
            raise SpanMismatch("ops cover different document lengths")
        n = min(abs(ca), abs(cb))
        if ca > 0 and cb > 0:
            _push(out_a, n)
            _push(out_b, n)
        elif ca < 0 and cb > 0:
            _push(out_a, -n)  # b kept them, a still deletes
        elif ca > 0 and cb < 0:
            _push(out_b, -n)  # a kept them, b still deletes
        # both deleting the same range: nothing left for either
        ca = ca - n if ca > 0 else ca + n
        cb = cb - n if cb > 0 else cb + n
        if ca == 0:
            ia += 1
            ca = comps_a[ia] if ia < na else None
        if cb == 0:
            ib += 1
            cb = comps_b[ib] if ib < nb else None

    return tuple(out_a), tuple(out_b)


def transform(a: DocOp, b: DocOp) -> tuple[DocOp, DocOp]:
    """Rewrite two concurrent ops so either application order converges.

    Returns (a', b') with a' applying after b and b' after a:
    apply(apply(doc, a), b') == apply(apply(doc, b), a').
    """
    if a.base_version != b.base_version:
        raise SpanMismatch(
            f"ops have different base versions ({a.base_version} vs {b.base_version})"
        )
    if consumed_length(a.components) != consumed_length(b.components):
        raise SpanMismatch("ops cover different document lengths")
    out_a, out_b = transform_components(
        a.components, b.components, a.client_id <= b.client_id
    )
    return (
        DocOp(out_a, a.base_version + 1, a.client_id),
        DocOp(out_b, b.base_version + 1, b.client_id),
    )


# --- server state --------------------------------------------------------------

@dataclass(frozen=True)
class SessionState:
    doc: str = ""
    version: int = 0
    history: tuple = ()  # tuple[DocOp, ...], one per version
    clients: Mapping = field(default_factory=dict)  # client_id -> display name


def server_apply(state: SessionState, op: DocOp) -> tuple[SessionState, DocOp]:
    """Serialize one client op into the session's total order.

    The op is rebased over everything that landed after its base
    version, applied, and returned in the form every client (including
    its author, as the acknowledgment) must apply.
    """
    if op.base_version > state.version:
        raise StaleVersion(
            f"op base version {op.base_version} is ahead of server version {state.version}"
        )
    oldest = state.version - len(state.history)
    if op.base_version < oldest:
        raise StaleVersion(
            f"op base version {op.base_version} predates history (oldest {oldest})"
        )
    # history entry i has base version i, so the rebased op's base always
    # matches the next entry it is transformed against
    rebased = op
    for past in state.history[len(state.history) - (state.version - op.base_version):]:
        rebased, _ = transform(rebased, past)
    new_doc = apply_op(state.doc, rebased)
    new_state = replace(
        state,
        doc=new_doc,
        version=state.version + 1,
        history=state.history + (rebased,),
    )
    return new_state, rebased


def replay(history) -> str:
    """Document produced by applying a history prefix to the empty document."""
    doc = ""
    for op in history:
        doc = apply_op(doc, op)
    return doc


def doc_at(state: SessionState, version: int) -> str:
    if version < 0 or version > state.version:
        raise StaleVersion(f"no version {version} (server at {state.version})")
    oldest = state.version - len(state.history)
    if oldest != 0:
        raise StaleVersion("history was truncated; cannot replay")
    return replay(state.history[:version])


@dataclass(frozen=True)
class EvalNotice:
    version: int
    errors: tuple  # tuple[dict(line, col, message), ...]

    @property
    def ok(self):
        return not self.errors


def eval_notice(state: SessionState, at_version: int) -> EvalNotice:
    """Parse the document as of a version; errors make the eval a no-op."""
    result = parse(doc_at(state, at_version))
    errors = tuple(
        {"line": e.span.line, "col": e.span.col, "message": e.message}
        for e in sorted(result.errors, key=lambda e: (e.span.line, e.span.col))
    )
    return EvalNotice(at_version, errors)


# --- client replica -------------------------------------------------------------

class ClientReplica:
    """Client-side document mirror with a pending-op queue.

    Local edits apply immediately and queue for the server one at a
    time. Remote broadcasts rebase the whole queue; the echo of our own
    op is an acknowledgment and never touches the document.
    """

    def __init__(self, client_id: str, doc: str = "", version: int = 0):
        self.client_id = client_id
        self.doc = doc
        self.version = version
        self.pending = []  # list[tuple components]
        self.in_flight = False

    def local_edit(self, components) -> None:
        op = DocOp(tuple(components), 0, self.client_id)
        if consumed_length(op.components) != len(self.doc):
            raise SpanMismatch(
                f"edit covers {consumed_length(op.components)} chars, "
                f"local document has {len(self.doc)}"
            )
        self.doc = apply_op(self.doc, op)
        self.pending.append(op.components)

    def has_outbound(self) -> bool:
        return bool(self.pending) and not self.in_flight

    def take_outbound(self) -> DocOp:
        if not self.has_outbound():
            raise RuntimeError("nothing to send")
        self.in_flight = True
        return DocOp(self.pending[0], self.version, self.client_id)

    def receive(self, version: int, components, client_id: str) -> None:
        if version != self.version + 1:
            raise StaleVersion(
                f"received version {version}, expected {self.version + 1}"
            )
        self.version = version
        if client_id == self.client_id:
            # acknowledgment of our own op: already reflected locally
            if not self.in_flight or not self.pending:
                raise StaleVersion("unexpected echo: no op in flight")
            self.pending.pop(0)
            self.in_flight = False
            return
        remote = normalize(components)
        ours_first = self.client_id <= client_id
        for i, mine in enumerate(self.pending):
            self.pending[i], remote = transform_components(mine, remote, ours_first)
        self.doc = apply_components(self.doc, remote)

    @property
    def idle(self) -> bool:
        return not self.pending


# --- wire format ----------------------------------------------------------------

def components_to_wire(components) -> list:
    wire = []
    for comp in components:
        if isinstance(comp, str):
            wire.append(["i", comp])
        elif comp > 0:
            wire.append(["r", comp])
        else:
            wire.append(["d", -comp])
    return wire


def components_from_wire(items) -> tuple:
    components = []
    for item in items:
        if (
            not isinstance(item, list)
            or len(item) != 2
            or item[0] not in ("r", "i", "d")
        ):
            raise ValueError(f"bad op component: {item!r}")
        tag, arg = item
        if tag == "i":
            if not isinstance(arg, str) or not arg:
                raise ValueError(f"bad insert component: {item!r}")
            components.append(arg)
        else:
            if not isinstance(arg, int) or isinstance(arg, bool) or arg <= 0:
                raise ValueError(f"bad {tag!r} component: {item!r}")
            components.append(arg if tag == "r" else -arg)
    return normalize(components)
