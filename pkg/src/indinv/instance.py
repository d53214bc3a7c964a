"""Finite sort domains, concrete values, states, and fingerprints.

Runtime values are plain Python data: bool for booleans, str for sort
elements and enum labels, frozenset[str] for sets, and MapV for maps. The
declared ValueType schema carries the tags, so values stay small and fast to
compare. Enumeration order is fixed: variables in declaration order, domains
in declared element order, sets by bitmask ascending, map entries with the
last key varying fastest.
"""
from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import EnumerationLimitError, InstanceError
from .syntax import (
    BoolType,
    ElemType,
    EnumType,
    MapType,
    Protocol,
    SetType,
    ValueType,
)

SIZE_SENTINEL = 2**63


@dataclass(frozen=True)
class Instance:
    """Binding of every sort to an ordered finite domain of element names."""

    domains: dict[str, tuple[str, ...]]

    def domain(self, sort: str) -> tuple[str, ...]:
        return self.domains[sort]

    def text(self) -> str:
        return " ".join(f"{s}={','.join(elems)}" for s, elems in self.domains.items())


def parse_instance(text: str, protocol: Protocol) -> Instance:
    """Parse a binding like ``Server=s1,s2 Client=c1,c2`` for a protocol."""
    given: dict[str, tuple[str, ...]] = {}
    for part in text.split():
        if "=" not in part:
            raise InstanceError(f"malformed binding {part!r}, expected Sort=e1,e2,...")
        sort, _, elems_text = part.partition("=")
        if sort in given:
            raise InstanceError(f"sort {sort} bound twice")
        elems = tuple(e for e in elems_text.split(",") if e)
        if not elems:
            raise InstanceError(f"sort {sort} bound to an empty domain")
        if len(set(elems)) != len(elems):
            raise InstanceError(f"sort {sort} has duplicate element names")
        for e in elems:
            if not (e[0].isalpha() or e[0] == "_") or not all(c.isalnum() or c == "_" for c in e):
                raise InstanceError(f"invalid element name {e!r}")
        given[sort] = elems
    declared = protocol.sort_names()
    for sort in given:
        if sort not in declared:
            raise InstanceError(f"binding for undeclared sort {sort}")
    for sort in declared:
        if sort not in given:
            raise InstanceError(f"sort {sort} is not bound")
    # normalize to declaration order
    return Instance({sort: given[sort] for sort in declared})


# ---------------------------------------------------------------------------
# Values


@dataclass(frozen=True)
class MapV:
    """Total map over an instance domain; entries stay in domain order."""

    entries: tuple[tuple[str, "Value"], ...]

    def get(self, key: str) -> "Value":
        for k, v in self.entries:
            if k == key:
                return v
        raise KeyError(key)

    def with_entry(self, key: str, value: "Value") -> "MapV":
        return MapV(tuple((k, value if k == key else v) for k, v in self.entries))


Value = Union[bool, str, frozenset, MapV]


@dataclass(frozen=True)
class StateSchema:
    names: tuple[str, ...]
    types: tuple[ValueType, ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    def index(self, name: str) -> int:
        return self._index[name]


@dataclass(frozen=True)
class State:
    """Total assignment of values to state variables, in declaration order."""

    schema: StateSchema
    values: tuple[Value, ...]

    def value(self, name: str) -> Value:
        return self.values[self.schema.index(name)]

    def replaced(self, updates: dict[str, Value]) -> "State":
        vals = list(self.values)
        for name, v in updates.items():
            vals[self.schema.index(name)] = v
        return State(self.schema, tuple(vals))

    def assignment(self) -> dict[str, Value]:
        return dict(zip(self.schema.names, self.values))


def state_schema(protocol: Protocol) -> StateSchema:
    return StateSchema(
        tuple(v.name for v in protocol.vars),
        tuple(v.type for v in protocol.vars),
    )


# ---------------------------------------------------------------------------
# Domain sizes, enumeration, sampling


def type_domain_size(t: ValueType, instance: Instance) -> int:
    if isinstance(t, BoolType):
        return 2
    if isinstance(t, ElemType):
        return len(instance.domain(t.sort))
    if isinstance(t, EnumType):
        return len(t.labels)
    if isinstance(t, SetType):
        return 2 ** len(instance.domain(t.sort))
    if isinstance(t, MapType):
        return type_domain_size(t.elem, instance) ** len(instance.domain(t.index_sort))
    raise AssertionError(f"no domain for type {t!r}")


def state_space_size(protocol: Protocol, instance: Instance) -> int:
    """Exact number of type-correct states (may exceed the 2^63 sentinel)."""
    size = 1
    for v in protocol.vars:
        size *= type_domain_size(v.type, instance)
    return size


def describe_size(n: int) -> str:
    return "exceeds 2^63" if n >= SIZE_SENTINEL else str(n)


def enumerate_values(t: ValueType, instance: Instance) -> Iterator[Value]:
    if isinstance(t, BoolType):
        yield False
        yield True
        return
    if isinstance(t, ElemType):
        yield from instance.domain(t.sort)
        return
    if isinstance(t, EnumType):
        yield from t.labels
        return
    if isinstance(t, SetType):
        dom = instance.domain(t.sort)
        for mask in range(2 ** len(dom)):
            yield frozenset(dom[i] for i in range(len(dom)) if mask >> i & 1)
        return
    if isinstance(t, MapType):
        dom = instance.domain(t.index_sort)
        pools = [tuple(enumerate_values(t.elem, instance)) for _ in dom]
        for combo in itertools.product(*pools):
            yield MapV(tuple(zip(dom, combo)))
        return
    raise AssertionError(f"no domain for type {t!r}")


def enumerate_states(
    protocol: Protocol, instance: Instance, limit: int | None = None
) -> Iterator[State]:
    """Yield every type-correct state exactly once, in a deterministic order."""
    size = state_space_size(protocol, instance)
    if limit is not None and size > limit:
        raise EnumerationLimitError(
            f"state space has {describe_size(size)} states, exceeds limit {limit}"
        )
    schema = state_schema(protocol)
    pools = [tuple(enumerate_values(t, instance)) for t in schema.types]

    def gen() -> Iterator[State]:
        for combo in itertools.product(*pools):
            yield State(schema, combo)

    return gen()


def random_value(t: ValueType, instance: Instance, rng: random.Random) -> Value:
    if isinstance(t, BoolType):
        return bool(rng.getrandbits(1))
    if isinstance(t, ElemType):
        dom = instance.domain(t.sort)
        return dom[rng.randrange(len(dom))]
    if isinstance(t, EnumType):
        return t.labels[rng.randrange(len(t.labels))]
    if isinstance(t, SetType):
        dom = instance.domain(t.sort)
        mask = rng.getrandbits(len(dom))
        return frozenset(dom[i] for i in range(len(dom)) if mask >> i & 1)
    if isinstance(t, MapType):
        dom = instance.domain(t.index_sort)
        return MapV(tuple((k, random_value(t.elem, instance, rng)) for k in dom))
    raise AssertionError(f"no domain for type {t!r}")


def random_state(protocol: Protocol, instance: Instance, rng: random.Random) -> State:
    """Independently uniform value per variable; deterministic given the rng."""
    schema = state_schema(protocol)
    return State(schema, tuple(random_value(t, instance, rng) for t in schema.types))


# ---------------------------------------------------------------------------
# Canonical serialization and fingerprints

Fingerprint = int


def _value_bytes(t: ValueType, v: Value, out: bytearray) -> None:
    if isinstance(t, BoolType):
        out.append(1 if v else 0)
        return
    if isinstance(t, (ElemType, EnumType)):
        b = v.encode("utf-8")
        out += len(b).to_bytes(2, "big")
        out += b
        return
    if isinstance(t, SetType):
        members = sorted(v)
        out += len(members).to_bytes(4, "big")
        for m in members:
            b = m.encode("utf-8")
            out += len(b).to_bytes(2, "big")
            out += b
        return
    if isinstance(t, MapType):
        out += len(v.entries).to_bytes(4, "big")
        for k, ev in v.entries:
            b = k.encode("utf-8")
            out += len(b).to_bytes(2, "big")
            out += b
            _value_bytes(t.elem, ev, out)
        return
    raise AssertionError(f"cannot serialize type {t!r}")


def state_to_bytes(state: State) -> bytes:
    out = bytearray()
    for t, v in zip(state.schema.types, state.values):
        _value_bytes(t, v, out)
    return bytes(out)


def _value_from_bytes(t: ValueType, buf: bytes, pos: int) -> tuple[Value, int]:
    if isinstance(t, BoolType):
        return buf[pos] == 1, pos + 1
    if isinstance(t, (ElemType, EnumType)):
        n = int.from_bytes(buf[pos : pos + 2], "big")
        pos += 2
        return buf[pos : pos + n].decode("utf-8"), pos + n
    if isinstance(t, SetType):
        count = int.from_bytes(buf[pos : pos + 4], "big")
        pos += 4
        members = []
        for _ in range(count):
            n = int.from_bytes(buf[pos : pos + 2], "big")
            pos += 2
            members.append(buf[pos : pos + n].decode("utf-8"))
            pos += n
        return frozenset(members), pos
    if isinstance(t, MapType):
        count = int.from_bytes(buf[pos : pos + 4], "big")
        pos += 4
        entries = []
        for _ in range(count):
            n = int.from_bytes(buf[pos : pos + 2], "big")
            pos += 2
            key = buf[pos : pos + n].decode("utf-8")
            pos += n
            val, pos = _value_from_bytes(t.elem, buf, pos)
            entries.append((key, val))
        return MapV(tuple(entries)), pos
    raise AssertionError(f"cannot deserialize type {t!r}")


def state_from_bytes(schema: StateSchema, buf: bytes) -> State:
    values = []
    pos = 0
    for t in schema.types:
        v, pos = _value_from_bytes(t, buf, pos)
        values.append(v)
    if pos != len(buf):
        raise ValueError("trailing bytes in state serialization")
    return State(schema, tuple(values))


def fingerprint(state: State) -> Fingerprint:
    """64-bit digest of the canonical serialization; stable across runs."""
    h = hashlib.blake2b(state_to_bytes(state), digest_size=8)
    return int.from_bytes(h.digest(), "big")


# ---------------------------------------------------------------------------
# Conformance and display


def value_conforms(v: Value, t: ValueType, instance: Instance) -> bool:
    if isinstance(t, BoolType):
        return isinstance(v, bool)
    if isinstance(t, ElemType):
        return isinstance(v, str) and v in instance.domain(t.sort)
    if isinstance(t, EnumType):
        return isinstance(v, str) and v in t.labels
    if isinstance(t, SetType):
        return isinstance(v, frozenset) and v <= set(instance.domain(t.sort))
    if isinstance(t, MapType):
        if not isinstance(v, MapV):
            return False
        if tuple(k for k, _ in v.entries) != instance.domain(t.index_sort):
            return False
        return all(value_conforms(ev, t.elem, instance) for _, ev in v.entries)
    return False


def state_conforms(state: State, instance: Instance) -> bool:
    return all(
        value_conforms(v, t, instance)
        for t, v in zip(state.schema.types, state.values)
    )


def format_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if isinstance(v, frozenset):
        return "{%s}" % ", ".join(sorted(v))
    if isinstance(v, MapV):
        return "[%s]" % ", ".join(f"{k}: {format_value(ev)}" for k, ev in v.entries)
    raise AssertionError(f"cannot format {v!r}")


def format_state(state: State) -> str:
    return ", ".join(
        f"{n}={format_value(v)}" for n, v in zip(state.schema.names, state.values)
    )
