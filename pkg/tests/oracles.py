"""Deliberately naive reimplementations used as test oracles."""

from fractions import Fraction

from pmadetect.txparse import Transfer


def _nodes(transfers: list[Transfer]) -> list[str]:
    seen = []
    for t in transfers:
        for a in (t.sender, t.receiver):
            if a not in seen:
                seen.append(a)
    return seen


def node_type(transfers, db):
    rows = []
    for a in _nodes(transfers):
        if a not in db:
            rows.append([0, 0, 1])
        elif db[a]:
            rows.append([0, 1, 0])
        else:
            rows.append([1, 0, 0])
    return rows


def _ratio(values):
    top = max(values)
    return [v / top if top else 0.0 for v in values]


def frequency(transfers):
    nodes = _nodes(transfers)
    ins = [sum(1 for t in transfers if t.receiver == a) for a in nodes]
    outs = [sum(1 for t in transfers if t.sender == a) for a in nodes]
    return list(zip(_ratio(ins), _ratio(outs)))


def diversity(transfers):
    nodes = _nodes(transfers)
    ins = [len({t.asset for t in transfers if t.receiver == a}) for a in nodes]
    outs = [len({t.asset for t in transfers if t.sender == a}) for a in nodes]
    return list(zip(_ratio(ins), _ratio(outs)))


def raw_profit_exact(transfers):
    """Exact rational profit per node: per asset, (in - out) / largest transfer."""
    nodes = _nodes(transfers)
    total = []
    for a in nodes:
        acc = Fraction(0)
        for asset in {t.asset for t in transfers}:
            top = max(t.amount for t in transfers if t.asset == asset)
            flow = sum(t.amount for t in transfers if t.asset == asset and t.receiver == a)
            flow -= sum(t.amount for t in transfers if t.asset == asset and t.sender == a)
            acc += Fraction(flow, top)
        total.append(acc)
    return total
