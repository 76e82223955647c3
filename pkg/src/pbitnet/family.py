"""Three-generation family tree used as the relatedness benchmark.

Each child is a two-parent node with ``s = 1 - eps2, t = u = 0.5, v = eps2``,
i.e. it copies one of its parents at random.  The second set of
grandparents copies the first set (``q = 1 - eps1, r = eps1``) for every
link the scenario enables and is an independent fair coin otherwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .compiler import BayesNet, CptNode
from .errors import InputDomainError

GRANDPARENTS = ("FF", "MF", "FM", "MM")
FAMILY_NAMES = (
    "FF1", "MF1", "FM1", "MM1",
    "FF2", "MF2", "FM2", "MM2",
    "F1", "M1", "F2", "M2",
    "C1", "C2",
)
# Default epsilons compile to the uniform weight J0 = 2.3026 at I0 = 1.
EPS_ONE_PARENT = 0.0099
EPS_TWO_PARENT = 1e-4


class Kind(str, enum.Enum):
    UNRELATED = "unrelated"
    FIRST_COUSINS = "cousins"
    DOUBLE_COUSINS = "double-cousins"
    CUSTOM = "custom"


SCENARIO_LINKS = {
    Kind.UNRELATED: frozenset(),
    Kind.FIRST_COUSINS: frozenset({"FF", "MF"}),
    Kind.DOUBLE_COUSINS: frozenset(GRANDPARENTS),
}


@dataclass(frozen=True)
class Scenario:
    kind: Kind = Kind.DOUBLE_COUSINS
    epsilon_one_parent: float = EPS_ONE_PARENT
    epsilon_two_parent: float = EPS_TWO_PARENT
    links: frozenset | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        for eps in (self.epsilon_one_parent, self.epsilon_two_parent):
            if not (0.0 < eps < 0.5):
                raise InputDomainError(f"epsilon {eps} outside (0, 0.5)")
        if self.kind is Kind.CUSTOM:
            links = frozenset(self.links or ())
            if links - set(GRANDPARENTS):
                raise InputDomainError(f"unknown grandparent links {sorted(links - set(GRANDPARENTS))}")
        else:
            if self.links is not None and frozenset(self.links) != SCENARIO_LINKS[self.kind]:
                raise InputDomainError("explicit links are only allowed for custom scenarios")
            links = SCENARIO_LINKS[self.kind]
        object.__setattr__(self, "links", links)


def _child(name, a, b, eps):
    return CptNode(name, (a, b), {(1, 1): 1.0 - eps, (-1, 1): 0.5, (1, -1): 0.5, (-1, -1): eps})


def build_family_tree(scenario: Scenario = Scenario()) -> BayesNet:
    e1, e2 = scenario.epsilon_one_parent, scenario.epsilon_two_parent
    nodes = [CptNode(g + "1", (), {(): 0.5}) for g in GRANDPARENTS]
    for g in GRANDPARENTS:
        if g in scenario.links:
            table = {(1,): 1.0 - e1, (-1,): e1}
        else:
            table = {(1,): 0.5, (-1,): 0.5}
        nodes.append(CptNode(g + "2", (g + "1",), table))
    nodes += [
        _child("F1", "FF1", "MF1", e2),
        _child("M1", "FM1", "MM1", e2),
        _child("F2", "FF2", "MF2", e2),
        _child("M2", "FM2", "MM2", e2),
        _child("C1", "F1", "M1", e2),
        _child("C2", "F2", "M2", e2),
    ]
    return BayesNet(tuple(nodes))
