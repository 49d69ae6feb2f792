import pytest

from admgkit import parse_graph

# four-vertex running example: confounded fork, nontrivial districts and
# fixable sets, every pair collider-connected
MIXED4 = """\
vertices: A B C D
A -> B
B -> C
B -> D
A <-> C
C <-> D
"""

# the classic four-chain whose observed margin carries a constraint that is
# not a conditional independence
VERMA = """\
vertices: V1 V2 V3 V4
V1 -> V2
V2 -> V3
V3 -> V4
V2 <-> V4
"""

# six vertices whose projection away from V4 multiplies the bidirected
# cliques (10 before, 15 after)
CLIQUES6 = """\
vertices: V1 V2 V3 V4 V5 V6
V4 -> V3
V4 -> V6
V1 <-> V2
V1 <-> V3
V2 <-> V4
V4 <-> V5
"""


@pytest.fixture
def mixed4():
    return parse_graph(MIXED4)


@pytest.fixture
def verma():
    return parse_graph(VERMA)


@pytest.fixture
def cliques6():
    return parse_graph(CLIQUES6)
