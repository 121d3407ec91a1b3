"""
Text formats for multicommodity flow and two-stage stochastic instances.

Multicommodity flow (whitespace separated, 1-based node ids, '#' comments):

    mcnf <n> <m> <K>
    arc <tail> <head> <cost> <capacity>          (m lines)
    commodity <source> <sink> <demand>           (K lines)

Two-stage stochastic (free-form layout, '#' comments):

    first_stage { c = [...]; A = rows [[...], ...]; b = [...]; }
    scenario { p = <real>; q = [...]; T = rows [[...], ...]; W = rows [[...], ...]; h = [...]; }
    ...

Numbers are written with repr precision so parse(format(x)) == x.
"""
import logging
import re
from pathlib import Path
from typing import Dict, Iterator, List, Tuple, Union

import numpy as np

from pdcgm.apps.mcnf import Arc, Commodity, Network
from pdcgm.apps.tssp import Scenario, StochasticInstance
from pdcgm.exceptions import InstanceParseError, InvalidInstance

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _num(value: float) -> str:
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


# -- multicommodity flow ---------------------------------------------------

def format_mcnf(net: Network) -> str:
    lines = [f"mcnf {net.num_nodes} {net.num_arcs} {net.num_commodities}"]
    for arc in net.arcs:
        lines.append(f"arc {arc.tail} {arc.head} {_num(arc.cost)} {_num(arc.capacity)}")
    for com in net.commodities:
        lines.append(f"commodity {com.source} {com.sink} {_num(com.demand)}")
    return "\n".join(lines) + "\n"


def _fields(tokens: List[str], types: Tuple[type, ...], lineno: int) -> list:
    if len(tokens) != len(types) + 1:
        raise InstanceParseError(f"'{tokens[0]}' expects {len(types)} values, got {len(tokens) - 1}", lineno)
    values = []
    for token, kind in zip(tokens[1:], types):
        try:
            values.append(kind(token))
        except ValueError:
            raise InstanceParseError(f"cannot read {token!r} as {kind.__name__}", lineno)
    return values


def parse_mcnf(text: str, name: str = "") -> Network:
    """
    Parse a multicommodity flow instance

    Raises:
        InstanceParseError: malformed text, with the offending line number
    """
    header = None
    arcs: List[Arc] = []
    commodities: List[Commodity] = []
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]
        if header is None:
            if keyword != "mcnf":
                raise InstanceParseError(f"expected 'mcnf <n> <m> <K>' header, got {keyword!r}", lineno)
            header = _fields(tokens, (int, int, int), lineno)
            continue
        n = header[0]
        if keyword == "arc":
            tail, head, cost, capacity = _fields(tokens, (int, int, float, float), lineno)
            if not (1 <= tail <= n and 1 <= head <= n):
                raise InstanceParseError(f"arc {tail}->{head} leaves the node range 1..{n}", lineno)
            if tail == head:
                raise InstanceParseError(f"self-loop at node {tail}", lineno)
            if not (np.isfinite(cost) and cost >= 0):
                raise InstanceParseError(f"arc cost {cost} must be nonnegative", lineno)
            if not (np.isfinite(capacity) and capacity > 0):
                raise InstanceParseError(f"arc capacity {capacity} must be positive", lineno)
            arcs.append(Arc(tail, head, cost, capacity))
        elif keyword == "commodity":
            source, sink, demand = _fields(tokens, (int, int, float), lineno)
            if not (1 <= source <= n and 1 <= sink <= n) or source == sink:
                raise InstanceParseError(f"commodity {source}->{sink} is not a pair of distinct nodes in 1..{n}", lineno)
            if not (np.isfinite(demand) and demand > 0):
                raise InstanceParseError(f"demand {demand} must be positive", lineno)
            commodities.append(Commodity(source, sink, demand))
        else:
            raise InstanceParseError(f"unknown record {keyword!r}", lineno)

    if header is None:
        raise InstanceParseError("empty instance", lineno or None)
    n, m, K = header
    if len(arcs) != m or len(commodities) != K:
        raise InstanceParseError(
            f"header announces {m} arcs and {K} commodities, found {len(arcs)} and {len(commodities)}", lineno
        )
    try:
        return Network(n, arcs, commodities, name=name)
    except InvalidInstance as e:
        raise InstanceParseError(e.message, lineno)


# -- two-stage stochastic --------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<sym>[{}\[\];=,]))")


def _tokens(text: str) -> Iterator[Tuple[str, str, int]]:
    """(kind, text, line) triples; kind is 'num', 'name' or 'sym'"""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        pos = 0
        while pos < len(line):
            if line[pos:].strip() == "":
                break
            match = _TOKEN.match(line, pos)
            if match is None or match.end() == pos:
                raise InstanceParseError(f"unexpected character {line[pos:].lstrip()[:1]!r}", lineno)
            kind = match.lastgroup
            yield kind, match.group(kind), lineno
            pos = match.end()


class _TSSPReader:
    def __init__(self, text: str):
        self.tokens = list(_tokens(text))
        self.pos = 0

    @property
    def line(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][2]
        return self.tokens[-1][2] if self.tokens else 1

    def peek(self) -> Tuple[str, str, int]:
        if self.pos >= len(self.tokens):
            return "eof", "", self.line
        return self.tokens[self.pos]

    def take(self) -> Tuple[str, str, int]:
        token = self.peek()
        if token[0] == "eof":
            raise InstanceParseError("unexpected end of file", self.line)
        self.pos += 1
        return token

    def expect(self, text: str):
        kind, value, lineno = self.take()
        if value != text:
            raise InstanceParseError(f"expected {text!r}, got {value!r}", lineno)

    def number(self) -> float:
        kind, value, lineno = self.take()
        if kind != "num":
            raise InstanceParseError(f"expected a number, got {value!r}", lineno)
        return float(value)

    def vector(self) -> List[float]:
        self.expect("[")
        values = []
        while self.peek()[1] != "]":
            values.append(self.number())
            if self.peek()[1] == ",":
                self.take()
        self.expect("]")
        return values

    def matrix(self) -> List[List[float]]:
        kind, value, lineno = self.take()
        if value != "rows":
            raise InstanceParseError(f"matrices are written 'rows [[...], ...]', got {value!r}", lineno)
        self.expect("[")
        rows = []
        while self.peek()[1] != "]":
            rows.append(self.vector())
            if self.peek()[1] == ",":
                self.take()
        self.expect("]")
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise InstanceParseError(f"matrix rows have different lengths {sorted(widths)}", lineno)
        return rows

    def block(self, fields: Dict[str, str]) -> Dict[str, object]:
        """Read '{ key = value; ... }' where fields maps key -> 'num' | 'vec' | 'mat'"""
        self.expect("{")
        values: Dict[str, object] = {}
        while self.peek()[1] != "}":
            kind, key, lineno = self.take()
            if key not in fields:
                raise InstanceParseError(f"unknown field {key!r}", lineno)
            if key in values:
                raise InstanceParseError(f"field {key!r} given twice", lineno)
            self.expect("=")
            reader = {"num": self.number, "vec": self.vector, "mat": self.matrix}[fields[key]]
            values[key] = reader()
            self.expect(";")
        lineno = self.line
        self.expect("}")
        missing = [key for key in fields if key not in values]
        if missing:
            raise InstanceParseError(f"block is missing {', '.join(missing)}", lineno)
        return values


FIRST_STAGE_FIELDS = {"c": "vec", "A": "mat", "b": "vec"}
SCENARIO_FIELDS = {"p": "num", "q": "vec", "T": "mat", "W": "mat", "h": "vec"}


def _shaped(rows: List[List[float]], num_rows: int, num_cols: int, what: str, lineno: int) -> np.ndarray:
    matrix = np.asarray(rows, dtype=float).reshape(len(rows), -1) if rows else np.zeros((0, num_cols))
    if matrix.shape != (num_rows, num_cols):
        raise InstanceParseError(f"{what} is {matrix.shape[0]}x{matrix.shape[1]}, expected {num_rows}x{num_cols}", lineno)
    return matrix


def parse_tssp(text: str, name: str = "") -> StochasticInstance:
    """
    Parse a two-stage stochastic instance

    Raises:
        InstanceParseError: malformed text, with the offending line number
    """
    reader = _TSSPReader(text)
    first = None
    scenarios: List[Scenario] = []
    while reader.peek()[0] != "eof":
        kind, keyword, lineno = reader.take()
        if keyword == "first_stage":
            if first is not None:
                raise InstanceParseError("second first_stage block", lineno)
            values = reader.block(FIRST_STAGE_FIELDS)
            c, b = values["c"], values["b"]
            first = (c, _shaped(values["A"], len(b), len(c), "A", lineno), b)
        elif keyword == "scenario":
            if first is None:
                raise InstanceParseError("scenario before first_stage", lineno)
            values = reader.block(SCENARIO_FIELDS)
            q, h = values["q"], values["h"]
            scenarios.append(Scenario(
                p=values["p"],
                q=q,
                T=_shaped(values["T"], len(h), len(first[0]), "T", lineno),
                W=_shaped(values["W"], len(h), len(q), "W", lineno),
                h=h,
            ))
        else:
            raise InstanceParseError(f"expected 'first_stage' or 'scenario', got {keyword!r}", lineno)

    if first is None:
        raise InstanceParseError("missing first_stage block", reader.line)
    try:
        return StochasticInstance(first[0], first[1], first[2], scenarios, name=name)
    except InvalidInstance as e:
        raise InstanceParseError(e.message, reader.line)


def _vector(values: np.ndarray) -> str:
    return "[" + ", ".join(_num(v) for v in values) + "]"


def _matrix(matrix: np.ndarray, indent: str) -> str:
    if matrix.shape[0] == 0:
        return "rows []"
    inner = f",\n{indent}  ".join(_vector(row) for row in matrix)
    return f"rows [\n{indent}  {inner}\n{indent}]"


def format_tssp(inst: StochasticInstance) -> str:
    lines = []
    if inst.name:
        lines.append(f"# {inst.name}")
    lines += [
        "first_stage {",
        f"  c = {_vector(inst.c)};",
        f"  A = {_matrix(inst.A, '  ')};",
        f"  b = {_vector(inst.b)};",
        "}",
    ]
    for s in inst.scenarios:
        lines += [
            "scenario {",
            f"  p = {_num(s.p)};",
            f"  q = {_vector(s.q)};",
            f"  T = {_matrix(s.T, '  ')};",
            f"  W = {_matrix(s.W, '  ')};",
            f"  h = {_vector(s.h)};",
            "}",
        ]
    return "\n".join(lines) + "\n"


def load_mcnf(path: PathLike) -> Network:
    path = Path(path)
    net = parse_mcnf(path.read_text(), name=path.stem)
    logger.info(f"Loaded {path}: {net.num_nodes} nodes, {net.num_arcs} arcs, {net.num_commodities} commodities")
    return net


def load_tssp(path: PathLike) -> StochasticInstance:
    path = Path(path)
    inst = parse_tssp(path.read_text(), name=path.stem)
    logger.info(f"Loaded {path}: {inst.num_first} first-stage variables, {inst.num_scenarios} scenarios")
    return inst
