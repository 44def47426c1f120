from typing import Any, Callable, Protocol
import json

import pandas as pd
from metis_fn import monad


class SerialiserProtocol(Protocol):
    def __init__(self, serialisable: Any, serialisation: Callable = None):
        ...

    def serialise(self) -> str:
        ...

    @property
    def content_type(self):
        ...


class DictToJsonSerialiser(SerialiserProtocol):
    CONTENT_TYPE = "application/json"

    def __init__(self, serialisable, serialisation=None):
        self.serialisable = serialisable
        self.serialisation = serialisation

    def serialise(self):
        return json.dumps(self.serialisable, indent=2, ensure_ascii=False) + "\n"

    @property
    def content_type(self):
        return self.__class__.CONTENT_TYPE


class RowsToCsvSerialiser(SerialiserProtocol):
    """
    Serialises a list of row dicts with a fixed column order.  The header is always written, so an empty row list
    produces a header-only document.  The optional serialisation fn is applied to each row first.
    """
    CONTENT_TYPE = "text/csv"

    def __init__(self, serialisable: list[dict], serialisation: Callable = None, columns: list[str] = None):
        self.serialisable = serialisable
        self.serialisation = serialisation
        self.columns = columns

    def serialise(self):
        rows = [self.serialisation(row) for row in self.serialisable] if self.serialisation else self.serialisable
        return pd.DataFrame(rows, columns=self.columns).to_csv(index=False, lineterminator="\n")

    @property
    def content_type(self):
        return self.__class__.CONTENT_TYPE


class DotSerialiser(SerialiserProtocol):
    """
    Renders an undirected graph in Graphviz DOT.  Takes a dict of 'name', 'vertices' [(id, attrs)] and
    'edges' [(u, v, attrs)].
    """
    CONTENT_TYPE = "text/vnd.graphviz"

    def __init__(self, serialisable: dict, serialisation=None):
        self.serialisable = serialisable
        self.serialisation = serialisation

    def serialise(self):
        lines = [f"graph {_quote(self.serialisable.get('name', 'G'))} {{"]
        lines.extend(f"  {_quote(v_id)} [{_attrs(attrs)}];" for v_id, attrs in self.serialisable['vertices'])
        lines.extend(f"  {_quote(u)} -- {_quote(v)} [{_attrs(attrs)}];" for u, v, attrs in self.serialisable['edges'])
        lines.append("}")
        return "\n".join(lines) + "\n"

    @property
    def content_type(self):
        return self.__class__.CONTENT_TYPE


def _quote(value) -> str:
    return '"{}"'.format(str(value).replace("\\", "\\\\").replace('"', '\\"'))


def _attrs(attrs: dict) -> str:
    return ", ".join(f"{key}={_quote(value)}" for key, value in attrs.items())


def json_parser(body: str) -> monad.EitherMonad[Any]:
    return try_parser(json.loads, body)


@monad.monadic_try(name="json_parser")
def try_parser(parser_fn, content):
    return parser_fn(content)
