"""Dependency-parsed sentences and complete-subtree category extraction.

Syntactic diversity counts *complete subtrees*: for every token, the token
together with all of its descendants, abstracted to POS tags and dependency
relations only.  Each token therefore contributes exactly one element, and a
sentence of n tokens contributes n elements.  Word forms never enter the
category key, and neither does the subtree root's own incoming relation, so
e.g. every determiner leaf collapses to one category regardless of what it
attaches to.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .entropy import CategoryCounts, merge
from .errors import InputDataError

__all__ = [
    "DependencySentence",
    "DependencyToken",
    "extract_subtrees",
    "form_counts",
    "parse_conllu",
    "parse_conllu_text",
    "subtree_key",
    "syntactic_counts",
]

logger = logging.getLogger(__name__)


@dataclass
class DependencyToken:
    """One token: 1-based position, surface form, POS tag, governor, relation."""

    index: int
    form: str
    pos: str
    head: int  # 0 = sentence root
    deprel: str


@dataclass
class DependencySentence:
    """A parsed sentence whose head links form a tree."""

    tokens: list[DependencyToken]

    def validate(self) -> None:
        n = len(self.tokens)
        if n == 0:
            raise InputDataError("empty sentence")
        roots = 0
        for i, tok in enumerate(self.tokens, start=1):
            if tok.index != i:
                raise InputDataError(f"token indices must be 1..n; saw {tok.index} at {i}")
            if tok.head == tok.index:
                raise InputDataError(f"token {i} is its own head")
            if not 0 <= tok.head <= n:
                raise InputDataError(f"token {i} has head {tok.head} outside 0..{n}")
            if not tok.pos or not tok.deprel:
                raise InputDataError(f"token {i} has empty POS or deprel")
            if tok.head == 0:
                roots += 1
        if roots != 1:
            raise InputDataError(f"expected exactly one root, found {roots}")
        # With one root and one head per non-root, full reachability <=> tree.
        children = self.children()
        seen = 0
        stack = [next(t.index for t in self.tokens if t.head == 0)]
        visited = [False] * (n + 1)
        while stack:
            i = stack.pop()
            if visited[i]:
                raise InputDataError("head links contain a cycle")
            visited[i] = True
            seen += 1
            stack.extend(children[i])
        if seen != n:
            raise InputDataError("head links contain a cycle (unreachable tokens)")

    def children(self) -> list[list[int]]:
        """Adjacency list indexed 0..n; entry 0 holds the root."""
        out: list[list[int]] = [[] for _ in range(len(self.tokens) + 1)]
        for tok in self.tokens:
            out[tok.head].append(tok.index)
        return out


def _key_for(sentence: DependencySentence, nodes: list[int], root: int) -> str:
    """Encode the subtree over ``nodes`` (sorted, surface order) rooted at ``root``.

    In a complete subtree every non-root member's head is itself a member, so
    the internal edge set is exactly the incoming edges of the non-root nodes.
    """
    rank = {index: pos for pos, index in enumerate(nodes, start=1)}
    pos_seq = " ".join(sentence.tokens[j - 1].pos for j in nodes)
    if len(nodes) == 1:
        return pos_seq
    edges = sorted(
        (rank[sentence.tokens[j - 1].head], rank[j], sentence.tokens[j - 1].deprel)
        for j in nodes
        if j != root
    )
    return f"{pos_seq} | " + ",".join(f"{g}:{d}:{rel}" for g, d, rel in edges)


def subtree_key(sentence: DependencySentence, root: int) -> str:
    """Canonical category of the complete subtree rooted at token ``root``.

    Nodes appear in surface order with their POS tags; internal edges are
    ``governor:dependent:relation`` with positions renumbered 1..k within the
    subtree, sorted.  Non-projective subtrees are fine: renumbering by rank
    makes gaps in the surface string irrelevant.  A leaf's key is its bare
    POS tag (no edges, and its own incoming relation is excluded).
    """
    children = sentence.children()
    members: list[int] = []
    stack = [root]
    while stack:
        i = stack.pop()
        members.append(i)
        stack.extend(children[i])
    return _key_for(sentence, sorted(members), root)


def extract_subtrees(sentence: DependencySentence) -> CategoryCounts:
    """One complete-subtree element per token; total equals the token count."""
    children = sentence.children()
    roots = children[0]
    if len(roots) != 1:
        raise InputDataError(f"expected exactly one root, found {len(roots)}")
    # Collect each node's member list bottom-up to avoid re-walking subtrees.
    order: list[int] = []
    stack = [roots[0]]
    while stack:
        i = stack.pop()
        order.append(i)
        stack.extend(children[i])
    members: dict[int, list[int]] = {}
    for i in reversed(order):
        acc = [i]
        for child in children[i]:
            acc.extend(members[child])
        members[i] = acc
    counts = CategoryCounts()
    for i in range(1, len(sentence.tokens) + 1):
        counts.add(_key_for(sentence, sorted(members[i]), i))
    return counts


def syntactic_counts(sentences: Iterable[DependencySentence]) -> CategoryCounts:
    """Merge complete-subtree counts over a corpus of sentences."""
    out = CategoryCounts()
    for sentence in sentences:
        out.update(extract_subtrees(sentence))
    return out


def form_counts(sentences: Iterable[DependencySentence]) -> CategoryCounts:
    """Surface-form counts of parsed sentences (the lexical side of a block)."""
    out = CategoryCounts()
    for sentence in sentences:
        for tok in sentence.tokens:
            out.add(tok.form)
    return out


# --- CoNLL-U ------------------------------------------------------------------


def parse_conllu(
    source: str | Path | Iterable[str],
    pos_column: str = "xpos",
    strict: bool = False,
) -> list[DependencySentence]:
    """Read CoNLL-U: tab-separated columns, blank-line sentence boundaries.

    Comment lines, multiword-token ranges (``1-2``) and empty nodes (``1.1``)
    are skipped.  ``pos_column`` selects ``xpos`` or ``upos``; when the chosen
    column is ``_`` the other one is used instead.  Sentences whose head links
    are not a tree are rejected: ``strict=True`` aborts, otherwise they are
    skipped with a warning.
    """
    if pos_column not in ("upos", "xpos"):
        raise InputDataError(f"pos_column must be 'upos' or 'xpos', got {pos_column!r}")
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return _parse_lines(fh, pos_column, strict, str(source))
    return _parse_lines(source, pos_column, strict, "<stream>")


def parse_conllu_text(text: str, pos_column: str = "xpos", strict: bool = False):
    """Parse CoNLL-U from an in-memory string."""
    return _parse_lines(text.splitlines(), pos_column, strict, "<text>")


def _parse_lines(
    lines: Iterable[str], pos_column: str, strict: bool, origin: str
) -> list[DependencySentence]:
    sentences: list[DependencySentence] = []
    current: list[DependencyToken] = []
    sentence_no = 0

    def flush() -> None:
        nonlocal current, sentence_no
        if not current:
            return
        sentence_no += 1
        sentence = DependencySentence(tokens=current)
        current = []
        try:
            sentence.validate()
        except InputDataError as exc:
            if strict:
                raise InputDataError(f"{origin}: sentence {sentence_no}: {exc}") from exc
            logger.warning("%s: skipping sentence %d: %s", origin, sentence_no, exc)
            return
        sentences.append(sentence)

    for raw in lines:
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) < 8:
            if strict:
                raise InputDataError(f"{origin}: expected >= 8 columns, got {len(cols)}")
            logger.warning("%s: skipping short line %r", origin, line[:60])
            continue
        token_id = cols[0]
        if "-" in token_id or "." in token_id:
            continue  # multiword range or empty node
        try:
            index = int(token_id)
            head = int(cols[6])
        except ValueError as exc:
            if strict:
                raise InputDataError(f"{origin}: bad ID/HEAD in line {line[:60]!r}") from exc
            logger.warning("%s: skipping line with bad ID/HEAD: %r", origin, line[:60])
            continue
        upos, xpos = cols[3], cols[4]
        pos = xpos if pos_column == "xpos" else upos
        if pos == "_":
            pos = upos if pos_column == "xpos" else xpos
        current.append(
            DependencyToken(index=index, form=cols[1], pos=pos, head=head, deprel=cols[7])
        )
    flush()
    return sentences
