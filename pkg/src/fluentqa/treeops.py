"""Tree pattern matching and tree surgery over constituency parses.

The pattern language is a small, whitespace-separated subset of the usual
tree-query idiom:

    NP                  node with exact label NP
    /^VB/               node whose label matches the regex
    __                  any node
    NP=x                capture the node under the name x
    A < B               B is a child of A
    A << B              B is a proper descendant of A
    A $+ B              B is the immediate right sister of A
    A . B               A's last leaf immediately precedes B's first leaf
    A !< B              no child of A matches B
    A < (B << C) < D    parentheses group an argument with its own relations

Matches are reported in depth-first, left-to-right order and are
deterministic.  Surgery scripts are ordered edit lists applied to the nodes
bound by a pattern match; trees are never mutated in place, every edit
produces a new tree sharing unchanged structure with the input.

Script syntax (ops separated by ";"):

    delete x
    relabel x NEWLABEL
    excise x                          splice x out, promoting its children
    insert (PP (IN in)) last x        positions: before, after, first, last
    move x after y
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .treebank import EmptyLabel, ParseTree, TreeAddress, node_at, parse_ptb

__all__ = [
    "TreePattern",
    "MatchResult",
    "SurgeryScript",
    "PatternSyntaxError",
    "ScriptSyntaxError",
    "NoMatch",
    "InvalidEditTarget",
    "compile_pattern",
    "match",
    "parse_script",
    "apply_surgery",
    "apply_surgery_traced",
    "delete_at",
    "replace_at",
    "insert_child_at",
]


class PatternSyntaxError(ValueError):
    """The pattern expression does not compile."""


class ScriptSyntaxError(ValueError):
    """The surgery script does not parse."""


class NoMatch(ValueError):
    """Surgery was requested but the pattern matches nowhere."""


class InvalidEditTarget(ValueError):
    """An edit refers to a missing, detached, or structurally invalid node."""


_RELOPS = ("<<", "<", "$+", ".")


# ---------------------------------------------------------------------------
# pattern compilation


@dataclass(frozen=True)
class _Relation:
    negated: bool
    op: str
    target: "_PNode"


@dataclass(frozen=True)
class _PNode:
    exact: str | None          # exact label, None when regex or wildcard
    regex: str | None          # regex source, None when exact or wildcard
    name: str | None           # capture name
    relations: tuple[_Relation, ...] = ()

    def test(self, label: str) -> bool:
        if self.exact is not None:
            return label == self.exact
        if self.regex is not None:
            return re.search(self.regex, label) is not None
        return True  # wildcard __


@dataclass(frozen=True)
class TreePattern:
    expression: str
    captures: frozenset[str]
    root: _PNode = field(repr=False)


@dataclass(frozen=True)
class MatchResult:
    root: TreeAddress
    captures: dict[str, TreeAddress]

    def __getitem__(self, name: str) -> TreeAddress:
        return self.captures[name]


_ATOM_RE = re.compile(r"^(?:/((?:[^/\\]|\\.)+)/|([^\s()=]+))(?:=([A-Za-z_][A-Za-z0-9_]*))?$")


def _lex(expr: str) -> list[str]:
    toks: list[str] = []
    i, n = 0, len(expr)
    while i < n:
        ch = expr[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "()":
            toks.append(ch)
            i += 1
            continue
        j = i
        if ch == "/":  # regex atom: scan to the unescaped closing slash
            j += 1
            closed = False
            while j < n:
                if expr[j] == "\\":
                    j += 2
                    continue
                if expr[j] == "/":
                    j += 1
                    closed = True
                    break
                j += 1
            if not closed:
                raise PatternSyntaxError(f"unterminated regex: {expr[i:]!r}")
        while j < n and not expr[j].isspace() and expr[j] not in "()":
            j += 1
        toks.append(expr[i:j])
        i = j
    if not toks:
        raise PatternSyntaxError("empty pattern")
    return toks


class _Parser:
    def __init__(self, toks: list[str]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> str | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise PatternSyntaxError("unexpected end of pattern")
        self.pos += 1
        return tok

    def parse_term(self) -> _PNode:
        node = self.parse_arg()
        rels = list(node.relations)
        while True:
            tok = self.peek()
            if tok is None or tok == ")":
                break
            negated, op = self._relation_tok(tok)
            self.next()
            target = self.parse_arg()
            rels.append(_Relation(negated, op, target))
        return _PNode(node.exact, node.regex, node.name, tuple(rels))

    def parse_arg(self) -> _PNode:
        tok = self.next()
        if tok == "(":
            inner = self.parse_term()
            if self.next() != ")":
                raise PatternSyntaxError("expected ')'")
            return inner
        if tok == ")":
            raise PatternSyntaxError("unexpected ')'")
        return self._atom(tok)

    def _relation_tok(self, tok: str) -> tuple[bool, str]:
        negated = tok.startswith("!")
        op = tok[1:] if negated else tok
        if op not in _RELOPS:
            raise PatternSyntaxError(f"expected a relation, got {tok!r}")
        return negated, op

    def _atom(self, tok: str) -> _PNode:
        m = _ATOM_RE.match(tok)
        if not m:
            raise PatternSyntaxError(f"bad node expression: {tok!r}")
        regex, exact, name = m.group(1), m.group(2), m.group(3)
        if exact == "__":
            exact = None
        if regex is not None:
            try:
                re.compile(regex)
            except re.error as exc:
                raise PatternSyntaxError(f"bad regex in {tok!r}: {exc}") from exc
        return _PNode(exact, regex, name)


def _collect_captures(node: _PNode, names: list[str], under_negation: bool):
    if node.name is not None:
        if under_negation:
            raise PatternSyntaxError(f"capture {node.name!r} inside a negated relation")
        if node.name in names:
            raise PatternSyntaxError(f"duplicate capture name {node.name!r}")
        names.append(node.name)
    for rel in node.relations:
        _collect_captures(rel.target, names, under_negation or rel.negated)


def compile_pattern(expression: str) -> TreePattern:
    parser = _Parser(_lex(expression))
    root = parser.parse_term()
    if parser.peek() is not None:
        raise PatternSyntaxError(f"trailing pattern content: {parser.peek()!r}")
    names: list[str] = []
    _collect_captures(root, names, False)
    return TreePattern(expression, frozenset(names), root)


# ---------------------------------------------------------------------------
# matching


class _TreeIndex:
    """Precomputed addresses and leaf spans for one tree."""

    def __init__(self, tree: ParseTree):
        self.tree = tree
        self.order: list[TreeAddress] = []
        self.nodes: dict[TreeAddress, ParseTree] = {}
        self.spans: dict[TreeAddress, tuple[int, int]] = {}
        self._walk(tree, (), 0)

    def _walk(self, node: ParseTree, addr: TreeAddress, start: int) -> int:
        self.order.append(addr)
        self.nodes[addr] = node
        if node.is_leaf:
            self.spans[addr] = (start, start + 1)
            return start + 1
        pos = start
        for i, child in enumerate(node.children):
            pos = self._walk(child, addr + (i,), pos)
        self.spans[addr] = (start, pos)
        return pos

    def descendants(self, addr: TreeAddress) -> list[TreeAddress]:
        out = []
        for a in self.order:
            if len(a) > len(addr) and a[: len(addr)] == addr:
                out.append(a)
        return out

    def candidates(self, addr: TreeAddress, op: str) -> list[TreeAddress]:
        if op == "<":
            node = self.nodes[addr]
            return [addr + (i,) for i in range(len(node.children))]
        if op == "<<":
            return self.descendants(addr)
        if op == "$+":
            if not addr:
                return []
            sib = addr[:-1] + (addr[-1] + 1,)
            return [sib] if sib in self.nodes else []
        if op == ".":
            end = self.spans[addr][1]
            return [a for a in self.order if self.spans[a][0] == end and a != addr]
        raise AssertionError(op)


def _match_node(pnode: _PNode, addr: TreeAddress, index: _TreeIndex):
    """Yield capture dicts for every way pnode can match at addr."""
    if not pnode.test(index.nodes[addr].label):
        return
    base = {pnode.name: addr} if pnode.name else {}
    yield from _match_relations(pnode.relations, 0, addr, index, base)


def _match_relations(rels, i, addr, index, bound):
    if i == len(rels):
        yield dict(bound)
        return
    rel = rels[i]
    targets = index.candidates(addr, rel.op)
    if rel.negated:
        for taddr in targets:
            for _ in _match_node(rel.target, taddr, index):
                return  # some target matches: negation fails
        yield from _match_relations(rels, i + 1, addr, index, bound)
        return
    for taddr in targets:
        for sub in _match_node(rel.target, taddr, index):
            merged = dict(bound)
            merged.update(sub)
            yield from _match_relations(rels, i + 1, addr, index, merged)


def match(pattern: TreePattern, tree: ParseTree) -> list[MatchResult]:
    """All matches of pattern in tree, depth-first, deduplicated by bindings."""
    index = _TreeIndex(tree)
    results: list[MatchResult] = []
    seen: set[tuple] = set()
    for addr in index.order:
        for captures in _match_node(pattern.root, addr, index):
            key = (addr, tuple(sorted(captures.items())))
            if key not in seen:
                seen.add(key)
                results.append(MatchResult(addr, captures))
    return results


# ---------------------------------------------------------------------------
# surgery


_POSITIONS = ("before", "after", "first", "last")


@dataclass(frozen=True)
class Delete:
    capture: str


@dataclass(frozen=True)
class Relabel:
    capture: str
    label: str


@dataclass(frozen=True)
class Excise:
    capture: str


@dataclass(frozen=True)
class Insert:
    subtree: ParseTree
    position: str
    anchor: str


@dataclass(frozen=True)
class Move:
    capture: str
    position: str
    anchor: str


Edit = Delete | Relabel | Excise | Insert | Move


@dataclass(frozen=True)
class SurgeryScript:
    edits: tuple[Edit, ...]

    def captures_referenced(self) -> set[str]:
        refs: set[str] = set()
        for e in self.edits:
            if isinstance(e, Insert):
                refs.add(e.anchor)
            elif isinstance(e, Move):
                refs.update((e.capture, e.anchor))
            else:
                refs.add(e.capture)
        return refs


def parse_script(text: str) -> SurgeryScript:
    edits: list[Edit] = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        op, _, rest = chunk.partition(" ")
        rest = rest.strip()
        if op == "delete":
            edits.append(Delete(_one_word(rest, chunk)))
        elif op == "excise":
            edits.append(Excise(_one_word(rest, chunk)))
        elif op == "relabel":
            parts = rest.split()
            if len(parts) != 2:
                raise ScriptSyntaxError(f"relabel takes a capture and a label: {chunk!r}")
            edits.append(Relabel(parts[0], parts[1]))
        elif op == "insert":
            subtree_text, tail = _split_bracketed(rest, chunk)
            parts = tail.split()
            if len(parts) != 2 or parts[0] not in _POSITIONS:
                raise ScriptSyntaxError(f"insert takes a subtree, position, capture: {chunk!r}")
            edits.append(Insert(parse_ptb(subtree_text), parts[0], parts[1]))
        elif op == "move":
            parts = rest.split()
            if len(parts) != 3 or parts[1] not in _POSITIONS:
                raise ScriptSyntaxError(f"move takes capture, position, capture: {chunk!r}")
            edits.append(Move(parts[0], parts[1], parts[2]))
        else:
            raise ScriptSyntaxError(f"unknown edit op {op!r}")
    if not edits:
        raise ScriptSyntaxError("empty script")
    return SurgeryScript(tuple(edits))


def _one_word(rest: str, chunk: str) -> str:
    if not rest or " " in rest:
        raise ScriptSyntaxError(f"expected a single capture name: {chunk!r}")
    return rest


def _split_bracketed(text: str, chunk: str) -> tuple[str, str]:
    if not text.startswith("("):
        raise ScriptSyntaxError(f"expected a bracketed subtree: {chunk!r}")
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return text[: i + 1], text[i + 1 :].strip()
    raise ScriptSyntaxError(f"unbalanced subtree in {chunk!r}")


class _MNode:
    """Mutable working node; only used inside one surgery application."""

    __slots__ = ("label", "children", "token", "parent")

    def __init__(self, label, children, token, parent):
        self.label = label
        self.children = children
        self.token = token
        self.parent = parent

    @classmethod
    def from_tree(cls, tree: ParseTree, parent=None) -> "_MNode":
        node = cls(tree.label, [], tree.token, parent)
        node.children = [cls.from_tree(c, node) for c in tree.children]
        return node

    def to_tree(self) -> ParseTree:
        if self.token is not None:
            return ParseTree(self.label, (), self.token)
        return ParseTree(self.label, tuple(c.to_tree() for c in self.children))

    def attached_to(self, root: "_MNode") -> bool:
        node = self
        while node.parent is not None:
            node = node.parent
        return node is root

    def contains(self, other: "_MNode") -> bool:
        node = other
        while node is not None:
            if node is self:
                return True
            node = node.parent
        return False

    def address(self) -> TreeAddress:
        path = []
        node = self
        while node.parent is not None:
            path.append(node.parent.children.index(node))
            node = node.parent
        return tuple(reversed(path))


def _detach(node: _MNode, prune: bool):
    parent = node.parent
    if parent is None:
        raise InvalidEditTarget("cannot remove the root node")
    parent.children.remove(node)
    node.parent = None
    if prune:
        _prune_empty(parent)


def _prune_empty(node: _MNode):
    while node.parent is not None and not node.children and node.token is None:
        parent = node.parent
        parent.children.remove(node)
        node.parent = None
        node = parent


def _require(node: _MNode | None, root: _MNode, capture: str) -> _MNode:
    if node is None or not node.attached_to(root):
        raise InvalidEditTarget(f"capture {capture!r} is no longer in the tree")
    return node


def _apply_edit(edit: Edit, bound: dict[str, _MNode], root: _MNode):
    if isinstance(edit, Delete):
        _detach(_require(bound.get(edit.capture), root, edit.capture), prune=True)
    elif isinstance(edit, Relabel):
        node = _require(bound.get(edit.capture), root, edit.capture)
        try:
            ParseTree(edit.label, (), "probe")
        except EmptyLabel as exc:
            raise InvalidEditTarget(f"bad label {edit.label!r}") from exc
        node.label = edit.label
    elif isinstance(edit, Excise):
        node = _require(bound.get(edit.capture), root, edit.capture)
        parent = node.parent
        if parent is None:
            if len(node.children) != 1:
                raise InvalidEditTarget("cannot excise a root without exactly one child")
            child = node.children[0]
            root.label = child.label
            root.token = child.token
            root.children = child.children
            for c in root.children:
                c.parent = root
            return
        idx = parent.children.index(node)
        parent.children[idx : idx + 1] = node.children
        for c in node.children:
            c.parent = parent
        node.parent = None
        node.children = []
        _prune_empty(parent)
    elif isinstance(edit, Insert):
        anchor = _require(bound.get(edit.anchor), root, edit.anchor)
        _place(_MNode.from_tree(edit.subtree), edit.position, anchor)
    elif isinstance(edit, Move):
        node = _require(bound.get(edit.capture), root, edit.capture)
        anchor = _require(bound.get(edit.anchor), root, edit.anchor)
        if node.contains(anchor):
            raise InvalidEditTarget(f"cannot move {edit.capture!r} into its own subtree")
        old_parent = node.parent
        _detach(node, prune=False)
        _place(node, edit.position, anchor)
        if old_parent is not None:
            _prune_empty(old_parent)
    else:  # pragma: no cover
        raise AssertionError(edit)


def _place(node: _MNode, position: str, anchor: _MNode):
    if position in ("before", "after"):
        parent = anchor.parent
        if parent is None:
            raise InvalidEditTarget("cannot insert beside the root")
        idx = parent.children.index(anchor) + (1 if position == "after" else 0)
        parent.children.insert(idx, node)
        node.parent = parent
    else:  # first / last
        if anchor.token is not None:
            raise InvalidEditTarget("cannot insert children into a leaf")
        idx = 0 if position == "first" else len(anchor.children)
        anchor.children.insert(idx, node)
        node.parent = anchor


def _run_script(tree: ParseTree, result: MatchResult, script: SurgeryScript):
    root = _MNode.from_tree(tree)
    bound: dict[str, _MNode] = {}
    for name, addr in result.captures.items():
        node = root
        for i in addr:
            node = node.children[i]
        bound[name] = node
    for edit in script.edits:
        _apply_edit(edit, bound, root)
    if not root.children and root.token is None:
        raise InvalidEditTarget("surgery removed the entire tree")
    return root, bound


def apply_surgery(
    tree: ParseTree,
    pattern: TreePattern,
    script: SurgeryScript,
    repeat: bool = False,
    max_passes: int = 1000,
) -> ParseTree:
    """Apply script at the first match of pattern; optionally until no match.

    The input tree is never modified.  Raises NoMatch when the pattern does
    not match at all, InvalidEditTarget for edits that cannot be applied.
    """
    missing = script.captures_referenced() - pattern.captures
    if missing:
        raise InvalidEditTarget(f"script references unknown captures: {sorted(missing)}")
    current = tree
    passes = 0
    while True:
        results = match(pattern, current)
        if not results:
            if passes == 0:
                raise NoMatch(f"pattern {pattern.expression!r} does not match")
            return current
        root, _ = _run_script(current, results[0], script)
        current = root.to_tree()
        passes += 1
        if not repeat:
            return current
        if passes >= max_passes:
            raise InvalidEditTarget(f"script still matching after {max_passes} passes")


def apply_surgery_traced(
    tree: ParseTree, pattern: TreePattern, script: SurgeryScript
) -> tuple[ParseTree, dict[str, TreeAddress | None]]:
    """Single-pass surgery returning the new addresses of surviving captures."""
    missing = script.captures_referenced() - pattern.captures
    if missing:
        raise InvalidEditTarget(f"script references unknown captures: {sorted(missing)}")
    results = match(pattern, tree)
    if not results:
        raise NoMatch(f"pattern {pattern.expression!r} does not match")
    root, bound = _run_script(tree, results[0], script)
    survivors = {
        name: (node.address() if node.attached_to(root) else None)
        for name, node in bound.items()
    }
    return root.to_tree(), survivors


# ---------------------------------------------------------------------------
# persistent address-based editing helpers


def replace_at(tree: ParseTree, address: TreeAddress, new: ParseTree) -> ParseTree:
    if not address:
        return new
    i = address[0]
    children = list(tree.children)
    children[i] = replace_at(children[i], address[1:], new)
    return ParseTree(tree.label, tuple(children), None)


def delete_at(tree: ParseTree, address: TreeAddress) -> ParseTree:
    """Remove the node at address, pruning ancestors emptied by the removal."""
    if not address:
        raise InvalidEditTarget("cannot delete the root node")
    parent_addr, i = address[:-1], address[-1]
    parent = node_at(tree, parent_addr)
    children = parent.children[:i] + parent.children[i + 1 :]
    if not children:
        return delete_at(tree, parent_addr)
    return replace_at(tree, parent_addr, ParseTree(parent.label, children, None))


def insert_child_at(
    tree: ParseTree, parent_address: TreeAddress, index: int, sub: ParseTree
) -> ParseTree:
    parent = node_at(tree, parent_address)
    if parent.is_leaf:
        raise InvalidEditTarget("cannot insert children into a leaf")
    children = parent.children[:index] + (sub,) + parent.children[index:]
    return replace_at(tree, parent_address, ParseTree(parent.label, children, None))
