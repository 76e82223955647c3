"""Line-oriented BN description format.

    # comment
    NODE C1
    PARENTS F1 M1
    P ++ 0.9999
    P -+ 0.5
    P +- 0.5
    P -- 0.0001

``P`` gives P(node = +1) for one parent combination, one ``+``/``-`` per
parent in ``PARENTS`` order, or a single ``-`` for a node without parents.
"""

from __future__ import annotations

import math
from pathlib import Path

from .compiler import BayesNet, CptNode, combinations
from .errors import (
    BadProbabilityError,
    BnFormatError,
    DuplicateNodeError,
    IncompleteCptError,
    UnknownParentError,
    UnsupportedArityError,
)


def _combo(token, n_parents, line, node):
    if n_parents == 0:
        if token != "-":
            raise BnFormatError(f"combination {token!r} must be '-' for a node without parents", line=line, node=node)
        return ()
    if len(token) != n_parents or set(token) - {"+", "-"}:
        raise BnFormatError(f"combination {token!r} needs one +/- per parent", line=line, node=node)
    return tuple(1 if c == "+" else -1 for c in token)


def parse_bn_file(document: str) -> BayesNet:
    """Parse and validate a BN description (text, not a path)."""
    blocks = []  # [name, line, parents, parents_line, table]
    names = {}
    for lineno, raw in enumerate(document.splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        key, *args = text.split()
        key = key.upper()
        if key == "NODE":
            if len(args) != 1:
                raise BnFormatError("NODE takes exactly one name", line=lineno)
            name = args[0]
            if name in names:
                raise DuplicateNodeError(f"node already defined on line {names[name]}", line=lineno, node=name)
            names[name] = lineno
            blocks.append([name, lineno, (), None, {}])
            continue
        if not blocks:
            raise BnFormatError(f"{key} before any NODE", line=lineno)
        block = blocks[-1]
        name = block[0]
        if key == "PARENTS":
            if block[3] is not None or block[4]:
                raise BnFormatError("PARENTS must appear once, before any P line", line=lineno, node=name)
            if len(args) > 2:
                raise UnsupportedArityError(f"{len(args)} parents is not supported (at most 2)",
                                            line=lineno, node=name)
            if len(set(args)) != len(args):
                raise BnFormatError("repeated parent", line=lineno, node=name)
            block[2], block[3] = tuple(args), lineno
        elif key == "P":
            if len(args) != 2:
                raise BnFormatError("P takes a combination and a probability", line=lineno, node=name)
            combo = _combo(args[0], len(block[2]), lineno, name)
            try:
                p = float(args[1])
            except ValueError:
                raise BadProbabilityError(f"{args[1]!r} is not a number", line=lineno, node=name) from None
            if not (math.isfinite(p) and 0.0 <= p <= 1.0):
                raise BadProbabilityError(f"probability {args[1]} outside [0, 1]", line=lineno, node=name)
            if combo in block[4]:
                raise BnFormatError(f"duplicate entry for {args[0]}", line=lineno, node=name)
            block[4][combo] = p
        else:
            raise BnFormatError(f"unknown keyword {key!r}", line=lineno)

    nodes = []
    for name, lineno, parents, plineno, table in blocks:
        for p in parents:
            if p not in names:
                raise UnknownParentError(f"unknown parent {p!r}", line=plineno, node=name)
        missing = [c for c in combinations(len(parents)) if c not in table]
        if missing:
            shown = ", ".join(_format_combo(c) for c in missing)
            raise IncompleteCptError(f"missing P entries for {shown}", line=lineno, node=name)
        nodes.append(CptNode(name, parents, table))
    return BayesNet(tuple(nodes))


def _format_combo(combo) -> str:
    return "".join("+" if v > 0 else "-" for v in combo) or "-"


def format_bn(bn: BayesNet) -> str:
    lines = []
    for node in bn.nodes:
        lines.append(f"NODE {node.name}")
        if node.parents:
            lines.append("PARENTS " + " ".join(node.parents))
        for combo in combinations(len(node.parents)):
            lines.append(f"P {_format_combo(combo)} {node.table[combo]!r}")
    return "\n".join(lines) + "\n"


def load_bn(path) -> BayesNet:
    return parse_bn_file(Path(path).read_text())
