"""Text formats: tree S-expressions and headered CSV tables.

Trees are written on one line as ``(var i L R)`` / ``(leaf +1)`` with ``L``
the branch taken when x_i = 0. Truth tables and spectra use ``index,value``,
channels use ``x,p1`` and query ledgers use ``tag,count``. Floats are written
with ``repr`` so every table round-trips exactly.
"""
from __future__ import annotations

import csv
import io
import re
from typing import Iterable, Sequence

import numpy as np

from .boolean import BooleanFunction, FourierSpectrum, Leaf, Node, Tree
from .channels import LabelChannel
from .emulation import QueryLedger

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def tree_to_sexpr(tree: Tree) -> str:
    if isinstance(tree, Leaf):
        return f"(leaf {tree.label:+d})"
    return f"(var {tree.var} {tree_to_sexpr(tree.low)} {tree_to_sexpr(tree.high)})"


def parse_tree(text: str) -> Tree:
    tokens = _TOKEN.findall(text)
    tree, end = _parse_node(tokens, 0)
    if end != len(tokens):
        raise ValueError(f"trailing input after tree: {' '.join(tokens[end:])!r}")
    return tree


def _expect(tokens: list[str], pos: int, token: str) -> int:
    if pos >= len(tokens) or tokens[pos] != token:
        found = tokens[pos] if pos < len(tokens) else "end of input"
        raise ValueError(f"expected {token!r}, found {found!r}")
    return pos + 1


def _parse_node(tokens: list[str], pos: int) -> tuple[Tree, int]:
    pos = _expect(tokens, pos, "(")
    if pos >= len(tokens):
        raise ValueError("unexpected end of input")
    head = tokens[pos]
    if head == "leaf":
        node: Tree = Leaf(int(tokens[pos + 1]))
        pos += 2
    elif head == "var":
        var = int(tokens[pos + 1])
        low, pos = _parse_node(tokens, pos + 2)
        high, pos = _parse_node(tokens, pos)
        node = Node(var, low, high)
    else:
        raise ValueError(f"unknown node kind {head!r}")
    return node, _expect(tokens, pos, ")")


def _write_rows(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _read_rows(text: str, header: Sequence[str]) -> list[list[str]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != list(header):
        raise ValueError(f"expected header {','.join(header)!r}")
    return rows[1:]


def _table_to_csv(values, header: Sequence[str], fmt=repr) -> str:
    return _write_rows(header, ((i, fmt(v)) for i, v in enumerate(values)))


def _table_from_csv(text: str, header: Sequence[str], dtype) -> np.ndarray:
    rows = _read_rows(text, header)
    if [int(r[0]) for r in rows] != list(range(len(rows))):
        raise ValueError("indices must run 0, 1, 2, ... in order")
    return np.array([dtype(r[1]) for r in rows])


def _bits_for(length: int) -> int:
    n = length.bit_length() - 1
    if length < 2 or 1 << n != length:
        raise ValueError(f"table length {length} is not a power of two")
    return n


def function_to_csv(f: BooleanFunction) -> str:
    return _table_to_csv(f.values, ("index", "value"), fmt=int)


def function_from_csv(text: str) -> BooleanFunction:
    values = _table_from_csv(text, ("index", "value"), int)
    return BooleanFunction(_bits_for(len(values)), values)


def spectrum_to_csv(spectrum: FourierSpectrum) -> str:
    return _table_to_csv(spectrum.coeffs.tolist(), ("index", "value"))


def spectrum_from_csv(text: str) -> FourierSpectrum:
    coeffs = _table_from_csv(text, ("index", "value"), float)
    return FourierSpectrum(_bits_for(len(coeffs)), coeffs)


def channel_to_csv(channel: LabelChannel) -> str:
    return _table_to_csv(channel.p1.tolist(), ("x", "p1"))


def channel_from_csv(text: str) -> LabelChannel:
    p1 = _table_from_csv(text, ("x", "p1"), float)
    return LabelChannel(_bits_for(len(p1)), p1)


def ledger_to_csv(ledger: QueryLedger) -> str:
    return _write_rows(("tag", "count"), ledger.rows())


def ledger_from_csv(text: str) -> QueryLedger:
    ledger = QueryLedger()
    for tag, count in _read_rows(text, ("tag", "count")):
        ledger.charge(tag, int(count))
    return ledger


def records_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    return _write_rows(header, rows)


def records_from_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))
