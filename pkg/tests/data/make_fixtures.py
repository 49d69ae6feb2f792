"""Regenerate the committed CLI fixtures and golden outputs.

Run from the repository root:  python3 tests/data/make_fixtures.py
"""

import contextlib
import io
import json
import random
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from admgkit import (
    expand_noise,
    generate_system,
    induced_joint,
    parse_graph,
    serialize_graph,
    system_to_json,
    table_to_json,
)
from admgkit.cli import main
from helpers import ef_table, factorized_table
from test_markov_checks import verma_gm_only_table

MIXED4 = """\
vertices: A B C D
A -> B
B -> C
B -> D
A <-> C
C <-> D
"""

CLIQUES6 = """\
vertices: V1 V2 V3 V4 V5 V6
V4 -> V3
V4 -> V6
V1 <-> V2
V1 <-> V3
V2 <-> V4
V4 <-> V5
"""

VERMA = """\
vertices: V1 V2 V3 V4
V1 -> V2
V2 -> V3
V3 -> V4
V2 <-> V4
"""

CHAIN = """\
vertices: A B C
A -> B
B -> C
"""

# (golden file stem, argv)
COMMANDS = [
    ("msep", ["msep", "-g", "mixed4.g", "--from", "A", "--to", "D", "--given", "B"]),
    ("msep_open", ["msep", "-g", "mixed4.g", "--from", "A", "--to", "D",
                   "--given", "B,C", "--oracle"]),
    ("msep_json", ["--json", "msep", "-g", "mixed4.g", "--from", "A", "--to", "D",
                   "--given", "B"]),
    ("district", ["district", "-g", "mixed4.g", "-v", "A"]),
    ("mb", ["mb", "-g", "mixed4.g", "-v", "B"]),
    ("mbg", ["mbg", "-g", "mixed4.g", "-v", "C"]),
    ("ancestral", ["ancestral", "-g", "mixed4.g", "--set", "D"]),
    ("classify", ["classify", "-g", "mixed4.g"]),
    ("marginalize", ["marginalize", "-g", "mixed4.g", "--keep", "A,C,D"]),
    ("marginalize_cliques6", ["marginalize", "-g", "cliques6.g",
                          "--keep", "V1,V2,V3,V5,V6"]),
    ("expand_pairwise", ["expand", "-g", "mixed4.g", "--kind", "pairwise"]),
    ("expand_clique", ["expand", "-g", "mixed4.g", "--kind", "clique"]),
    ("expand_noise", ["expand", "-g", "mixed4.g", "--kind", "noise"]),
    ("swig", ["swig", "-g", "mixed4.g", "--on", "B"]),
    ("augment", ["augment", "-g", "mixed4.g"]),
    ("fixable", ["fixable", "-g", "mixed4.g"]),
    ("fix", ["fix", "-g", "mixed4.g", "--seq", "B"]),
    ("check_gm_pass", ["check", "gm", "-g", "chain.g", "-d", "chain_member.dist"]),
    ("check_nm_verma", ["check", "nm", "-g", "verma.g", "-d", "verma_gm_only.dist"]),
    ("check_lm", ["check", "lm", "-g", "chain.g", "-d", "chain_member.dist"]),
    ("check_um_mixed4", ["check", "um", "-g", "mixed4.g", "-d", "mixed4_member.dist"]),
    ("check_a_mixed4", ["check", "a", "-g", "mixed4.g", "-d", "mixed4_member.dist"]),
    ("check_nm_mixed4", ["check", "nm", "-g", "mixed4.g", "-d", "mixed4_member.dist"]),
    ("check_ef_mixed4_noise", ["check", "ef", "-g", "mixed4_noise.g", "-d", "mixed4_noise_member.dist"]),
    ("check_f_chain", ["check", "f", "-g", "chain.g", "-d", "chain_member.dist"]),
    ("gen_system", ["gen-system", "-g", "mixed4.g", "--seed", "1"]),
    ("po", ["po", "-s", "verma_system.json", "--do", "V3=1"]),
    ("verify_fixing", ["verify", "fixing", "-s", "verma_system.json",
                       "--set", "V3"]),
    ("verify_consistency", ["verify", "consistency", "-s", "verma_system.json"]),
    ("verify_swig", ["verify", "swig-markov", "-s", "verma_system.json",
                     "--do", "V3=0"]),
    ("relations", ["relations", "--corpus-dir", "corpus"]),
]


def write_data():
    (HERE / "mixed4.g").write_text(MIXED4)
    (HERE / "cliques6.g").write_text(CLIQUES6)
    (HERE / "verma.g").write_text(VERMA)
    (HERE / "chain.g").write_text(CHAIN)
    rng = random.Random(0)
    chain = parse_graph(CHAIN)
    (HERE / "chain_member.dist").write_text(table_to_json(factorized_table(rng, chain)))
    mixed4 = parse_graph(MIXED4)
    (HERE / "mixed4_member.dist").write_text(
        table_to_json(induced_joint(generate_system(mixed4, seed=2))))
    mixed4_noise = expand_noise(mixed4)
    (HERE / "mixed4_noise.g").write_text(serialize_graph(mixed4_noise))
    rng_ef = random.Random(1)
    (HERE / "mixed4_noise_member.dist").write_text(table_to_json(ef_table(rng_ef, mixed4_noise)))
    seed = 0
    t = None
    while t is None:
        t = verma_gm_only_table(seed)
        seed += 1
    (HERE / "verma_gm_only.dist").write_text(table_to_json(t))
    verma = parse_graph(VERMA)
    (HERE / "verma_system.json").write_text(system_to_json(generate_system(verma, seed=1)))
    corpus = HERE / "corpus"
    corpus.mkdir(exist_ok=True)
    (corpus / "chain.g").write_text(CHAIN)
    (corpus / "chain.dist").write_text((HERE / "chain_member.dist").read_text())
    (corpus / "verma.g").write_text(VERMA)
    (corpus / "verma.dist").write_text((HERE / "verma_gm_only.dist").read_text())


def write_golden():
    golden = ROOT / "tests" / "golden"
    golden.mkdir(exist_ok=True)
    import os

    os.chdir(HERE)
    for stem, argv in COMMANDS:
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = main(argv)
        (golden / f"{stem}.txt").write_text(
            f"# exit: {code}\n" + buf.getvalue())
        print(f"{stem}: exit {code}")


if __name__ == "__main__":
    write_data()
    write_golden()
