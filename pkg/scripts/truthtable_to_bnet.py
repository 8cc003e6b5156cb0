"""Convert a Cell Collective truth-table model (the ``.txt`` files shipped in
the ``cana`` package under ``cana/datasets/cell_collective``) to ``.bnet``.

Each local function is minimised to a sum of products with sympy, then the
result is checked against every row of the original table.

    python scripts/truthtable_to_bnet.py "Tumour Cell Invasion and Migration.txt" > tumor_invasion.bnet

Nodes without a table (model inputs) keep their value: ``X, X``.
"""

import sys

from sympy import symbols
from sympy.logic import SOPform

from mpsim.bnet import parse_bnet
from mpsim.model import evaluate


def read_tables(text):
    names = {}
    tables = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith(".l "):
            _, idx, name = line.split()
            names[int(idx)] = name
        elif line.startswith(".n "):
            parts = [int(p) for p in line.split()[1:]]
            current = parts[0]
            tables[current] = (parts[2:], {})
        elif line.startswith(".v") or line.startswith(".e"):
            continue
        else:
            bits, value = line.split()
            tables[current][1][bits] = int(value)
    return names, tables


def to_expr(inputs, rows, names):
    if not inputs:
        return None
    syms = symbols([names[i] for i in inputs])
    minterms = [[int(b) for b in bits] for bits, v in rows.items() if v == 1]
    if len(minterms) == 0:
        return "0"
    if len(minterms) == 2 ** len(inputs):
        return "1"
    expr = str(SOPform(syms, minterms))
    return expr.replace("~", "!")


def main(path):
    with open(path, encoding="utf-8") as fh:
        names, tables = read_tables(fh.read())
    order = sorted(names)
    lines = ["targets, factors"]
    for idx in order:
        inputs, rows = tables.get(idx, ([], {}))
        expr = to_expr(inputs, rows, names)
        lines.append(f"{names[idx]}, {expr if expr is not None else names[idx]}")
    text = "\n".join(lines) + "\n"

    f = parse_bnet(text)
    for idx in order:
        inputs, rows = tables.get(idx, ([], {}))
        target = f.index(names[idx])
        for bits, value in rows.items():
            x = 0
            for b, src in zip(bits, inputs):
                if b == "1":
                    x |= 1 << f.index(names[src])
            assert evaluate(f.functions[target], x) == value, (names[idx], bits)
    sys.stdout.write(text)


if __name__ == "__main__":
    main(sys.argv[1])
