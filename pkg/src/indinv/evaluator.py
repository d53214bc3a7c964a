"""Expression evaluation and successor computation on finite instances.

All functions here are pure over immutable inputs. Updates within an action
are applied simultaneously: every right-hand side is evaluated in the
pre-state, so update order never matters.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

from .instance import (
    Instance,
    MapV,
    State,
    Value,
    fingerprint,
    state_schema,
)
from .syntax import (
    ActionDecl,
    And,
    BoolLit,
    BoundRef,
    Card,
    EnumLit,
    Eq,
    Expr,
    Ident,
    Implies,
    InSet,
    MapIndex,
    MapLit,
    Maj,
    Ne,
    Not,
    Or,
    Protocol,
    Quant,
    SetLit,
    SetOp,
    StateRef,
)

Env = dict[str, str]


@dataclass(frozen=True)
class Transition:
    action: str
    binding: tuple[tuple[str, str], ...]  # (parameter, element)
    pre_fingerprint: int
    post: State


def _ev_bool(e, state, env, inst):
    return e.value


def _ev_bound(e, state, env, inst):
    return env[e.name]


def _ev_state(e, state, env, inst):
    return state.value(e.name)


def _ev_enum(e, state, env, inst):
    return e.label


def _ev_index(e, state, env, inst):
    return evaluate(e.mapping, state, env, inst).get(evaluate(e.key, state, env, inst))


def _ev_setlit(e, state, env, inst):
    return frozenset(evaluate(m, state, env, inst) for m in e.members)


def _ev_setop(e, state, env, inst):
    lhs = evaluate(e.lhs, state, env, inst)
    rhs = evaluate(e.rhs, state, env, inst)
    if e.op == "+":
        return lhs | rhs
    if e.op == "-":
        return lhs - rhs
    return lhs & rhs


def _ev_in(e, state, env, inst):
    return evaluate(e.elem, state, env, inst) in evaluate(e.container, state, env, inst)


def _ev_eq(e, state, env, inst):
    return evaluate(e.lhs, state, env, inst) == evaluate(e.rhs, state, env, inst)


def _ev_ne(e, state, env, inst):
    return evaluate(e.lhs, state, env, inst) != evaluate(e.rhs, state, env, inst)


def _ev_card(e, state, env, inst):
    return len(evaluate(e.arg, state, env, inst))


def _ev_maj(e, state, env, inst):
    return 2 * len(evaluate(e.arg, state, env, inst)) > len(inst.domain(e.sort))


def _ev_not(e, state, env, inst):
    return not evaluate(e.arg, state, env, inst)


def _ev_and(e, state, env, inst):
    return all(evaluate(a, state, env, inst) for a in e.args)


def _ev_or(e, state, env, inst):
    return any(evaluate(a, state, env, inst) for a in e.args)


def _ev_implies(e, state, env, inst):
    return not evaluate(e.lhs, state, env, inst) or evaluate(e.rhs, state, env, inst)


def _ev_quant(e, state, env, inst):
    dom = inst.domain(e.sort)
    body = e.body
    if e.kind == "forall":
        for elem in dom:
            env[e.var] = elem
            if not evaluate(body, state, env, inst):
                del env[e.var]
                return False
        env.pop(e.var, None)
        return True
    for elem in dom:
        env[e.var] = elem
        if evaluate(body, state, env, inst):
            del env[e.var]
            return True
    env.pop(e.var, None)
    return False


def _ev_maplit(e, state, env, inst):
    entries = []
    for elem in inst.domain(e.sort):
        env[e.var] = elem
        entries.append((elem, evaluate(e.body, state, env, inst)))
    env.pop(e.var, None)
    return MapV(tuple(entries))


def _ev_ident(e, state, env, inst):
    raise AssertionError(f"unresolved identifier {e.name!r} reached evaluation")


_HANDLERS: dict[type, Callable] = {
    BoolLit: _ev_bool,
    BoundRef: _ev_bound,
    StateRef: _ev_state,
    EnumLit: _ev_enum,
    MapIndex: _ev_index,
    SetLit: _ev_setlit,
    SetOp: _ev_setop,
    InSet: _ev_in,
    Eq: _ev_eq,
    Ne: _ev_ne,
    Card: _ev_card,
    Maj: _ev_maj,
    Not: _ev_not,
    And: _ev_and,
    Or: _ev_or,
    Implies: _ev_implies,
    Quant: _ev_quant,
    MapLit: _ev_maplit,
    Ident: _ev_ident,
}


def evaluate(expr: Expr, state: State | None, env: Env, instance: Instance) -> Value:
    """Value of a type-checked expression; quantifiers expand over domains."""
    return _HANDLERS[type(expr)](expr, state, env, instance)


def holds(expr: Expr, state: State, instance: Instance) -> bool:
    """Whether a closed boolean expression is satisfied in a state."""
    return evaluate(expr, state, {}, instance) is True


def initial_state(protocol: Protocol, instance: Instance) -> State:
    """The unique initial state (init is a deterministic assignment)."""
    schema = state_schema(protocol)
    by_var = {init.var: init.expr for init in protocol.inits}
    values = tuple(evaluate(by_var[name], None, {}, instance) for name in schema.names)
    return State(schema, values)


def apply_action(
    state: State,
    action: ActionDecl,
    env: Env,
    protocol: Protocol,
    instance: Instance,
) -> State:
    """Post-state of one action firing; every rhs reads the pre-state."""
    updates: dict[str, Value] = {}
    for u in action.updates:
        rhs = evaluate(u.rhs, state, env, instance)
        if u.index is None:
            updates[u.target] = rhs
        else:
            key = evaluate(u.index, state, env, instance)
            updates[u.target] = state.value(u.target).with_entry(key, rhs)
    return state.replaced(updates)


def successors(state: State, protocol: Protocol, instance: Instance) -> list[Transition]:
    """All enabled transitions, in action declaration then binding order."""
    pre_fp = fingerprint(state)
    out: list[Transition] = []
    for action in protocol.actions:
        domains = [instance.domain(sort) for _, sort in action.params]
        names = [name for name, _ in action.params]
        for combo in itertools.product(*domains):
            env = dict(zip(names, combo))
            if evaluate(action.guard, state, env, instance) is True:
                post = apply_action(state, action, env, protocol, instance)
                out.append(Transition(action.name, tuple(zip(names, combo)), pre_fp, post))
    return out
