"""Read, write, and traverse Penn-Treebank-style bracketed constituency trees.

A tree node is either an internal node (label + ordered children) or a leaf.
Leaves model preterminals: ``(DT the)`` becomes a single node with label
``DT`` and token ``the``.  Nodes are immutable; every transformation in this
package builds new trees and shares unchanged subtrees.

Dash-suffixed functional tags and numeric coindices on nonterminal labels
(``NP-SBJ``, ``NP-1``, ``NP=2``) are stripped on load, since parsers differ
on whether they emit them.  Labels that themselves start with a dash
(``-LRB-``, ``-NONE-``) are kept verbatim; the bracket escapes ``-LRB-`` and
``-RRB-`` render back to literal parentheses in surface strings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

__all__ = [
    "ParseTree",
    "TreeAddress",
    "PTBError",
    "UnbalancedBrackets",
    "EmptyLabel",
    "TrailingContent",
    "parse_ptb",
    "to_ptb",
    "leaves",
    "node_at",
    "addresses",
    "surface",
]


class PTBError(ValueError):
    """Base error for malformed bracketed trees."""


class UnbalancedBrackets(PTBError):
    """Opening and closing parentheses do not balance."""


class EmptyLabel(PTBError):
    """A node is missing its label, or has a label but no content."""


class TrailingContent(PTBError):
    """Input continues after the first complete bracketed expression."""


# Child-index path from the root; () addresses the root itself.
TreeAddress = tuple[int, ...]

# PTB escape tokens and their surface renderings.
BRACKET_ESCAPES = {
    "-LRB-": "(",
    "-RRB-": ")",
    "-LSB-": "[",
    "-RSB-": "]",
    "-LCB-": "{",
    "-RCB-": "}",
}

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")
_LABEL_RE = re.compile(r"^[^\s()]+$")


@dataclass(frozen=True)
class ParseTree:
    """One node of a constituency tree.

    Invariant: a node carries a token if and only if it has no children.
    """

    label: str
    children: tuple["ParseTree", ...] = ()
    token: str | None = None

    def __post_init__(self):
        if not self.label or not _LABEL_RE.match(self.label):
            raise EmptyLabel(f"invalid node label: {self.label!r}")
        if self.children and self.token is not None:
            raise PTBError(f"node {self.label!r} has both children and a token")
        if not self.children and self.token is None:
            raise EmptyLabel(f"node {self.label!r} has neither children nor a token")
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    def leaves(self) -> list[tuple[str, str]]:
        return leaves(self)

    def tokens(self) -> list[str]:
        return [tok for tok, _ in leaves(self)]

    def to_ptb(self) -> str:
        return to_ptb(self)

    def __str__(self):
        return to_ptb(self)


def _strip_label(raw: str) -> str:
    """Drop functional tags / coindices: NP-SBJ-1 -> NP, NP=2 -> NP."""
    if raw.startswith("-"):
        return raw
    stripped = raw.split("-")[0].split("=")[0]
    return stripped if stripped else raw


def parse_ptb(text: str) -> ParseTree:
    """Parse a single bracketed expression into a ParseTree.

    Whitespace between tokens is ignored.  An outer ``(ROOT ...)`` wrapper,
    if present, is preserved as an ordinary node.
    """
    toks = _TOKEN_RE.findall(text)
    if not toks:
        raise EmptyLabel("empty input")
    if toks[0] != "(":
        raise UnbalancedBrackets("input does not start with '('")
    tree, pos = _parse_node(toks, 0)
    if pos != len(toks):
        raise TrailingContent(f"unexpected content after tree: {' '.join(toks[pos:pos + 5])!r}")
    return tree


def _parse_node(toks: list[str], pos: int) -> tuple[ParseTree, int]:
    assert toks[pos] == "("
    pos += 1
    if pos >= len(toks):
        raise UnbalancedBrackets("unexpected end of input after '('")
    if toks[pos] in ("(", ")"):
        raise EmptyLabel("expected a node label after '('")
    label = _strip_label(toks[pos])
    pos += 1
    children: list[ParseTree] = []
    token: str | None = None
    while pos < len(toks) and toks[pos] != ")":
        if toks[pos] == "(":
            if token is not None:
                raise PTBError(f"node {label!r} mixes tokens and subtrees")
            child, pos = _parse_node(toks, pos)
            children.append(child)
        else:
            if children or token is not None:
                raise PTBError(f"node {label!r} mixes tokens and subtrees")
            token = toks[pos]
            pos += 1
    if pos >= len(toks):
        raise UnbalancedBrackets(f"missing ')' for node {label!r}")
    pos += 1  # consume ')'
    if not children and token is None:
        raise EmptyLabel(f"node {label!r} has no children and no token")
    return ParseTree(label, tuple(children), token), pos


def to_ptb(tree: ParseTree) -> str:
    """Serialize to the canonical single-space bracketed form."""
    if tree.is_leaf:
        return f"({tree.label} {tree.token})"
    inner = " ".join(to_ptb(c) for c in tree.children)
    return f"({tree.label} {inner})"


def leaves(tree: ParseTree) -> list[tuple[str, str]]:
    """All (token, pos-label) pairs in left-to-right order."""
    out: list[tuple[str, str]] = []
    _collect_leaves(tree, out)
    return out


def _collect_leaves(tree: ParseTree, out: list[tuple[str, str]]):
    if tree.is_leaf:
        out.append((tree.token, tree.label))
    else:
        for child in tree.children:
            _collect_leaves(child, out)


def node_at(tree: ParseTree, address: TreeAddress) -> ParseTree:
    node = tree
    for i in address:
        if i >= len(node.children):
            raise IndexError(f"address {address} not in tree")
        node = node.children[i]
    return node


def addresses(tree: ParseTree) -> list[TreeAddress]:
    """All node addresses in depth-first preorder (root first)."""
    out: list[TreeAddress] = []
    stack: list[tuple[TreeAddress, ParseTree]] = [((), tree)]
    while stack:
        addr, node = stack.pop()
        out.append(addr)
        for i in range(len(node.children) - 1, -1, -1):
            stack.append((addr + (i,), node.children[i]))
    return out


def surface(tokens) -> str:
    """Join tokens into a surface string, rendering bracket escapes."""
    return " ".join(BRACKET_ESCAPES.get(t, t) for t in tokens)
