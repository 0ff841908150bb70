"""Shared abstract syntax produced by both language parsers.

The two front ends differ in tokens and grammar, but their programs reduce
to one statement/expression vocabulary, which keeps the compiler and any
tree-walking tooling single-sourced. Nodes carry the 1-based source line of
their introducing token.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Node:
    line: int = field(default=0, kw_only=True)


# --- statements ---


@dataclass
class Module(Node):
    body: list = field(default_factory=list)


@dataclass
class FuncDef(Node):
    name: str = ""
    params: list = field(default_factory=list)
    body: list = field(default_factory=list)
    # methods of minirb classes take their receiver implicitly; minipy
    # methods receive it as their first parameter
    implicit_self: bool = False
    source: str = ""


@dataclass
class ClassDef(Node):
    name: str = ""
    methods: list = field(default_factory=list)  # FuncDef nodes
    assigns: list = field(default_factory=list)  # (name, Const) literal pairs


@dataclass
class If(Node):
    cond: object = None
    then: list = field(default_factory=list)
    orelse: list = field(default_factory=list)


@dataclass
class While(Node):
    cond: object = None
    body: list = field(default_factory=list)


@dataclass
class For(Node):
    target: str = ""
    iterable: object = None
    body: list = field(default_factory=list)


@dataclass
class TryClause(Node):
    class_name: object = None  # None = catch-all
    bind_name: object = None
    body: list = field(default_factory=list)


@dataclass
class Try(Node):
    body: list = field(default_factory=list)
    clauses: list = field(default_factory=list)  # TryClause
    finally_body: object = None  # list of statements or None


@dataclass
class Raise(Node):
    # raise E / raise E(msg) / raise E, msg  ->  class_name + message expr;
    # raise <expr>  ->  value expr that must evaluate to an exception
    class_name: object = None
    message: object = None
    value: object = None


@dataclass
class Return(Node):
    value: object = None


@dataclass
class Assign(Node):
    target: object = None  # Name | Attribute | Index
    value: object = None


@dataclass
class ExprStmt(Node):
    value: object = None


@dataclass
class Break(Node):
    pass


@dataclass
class Continue(Node):
    pass


@dataclass
class Pass(Node):
    pass


# --- expressions ---


@dataclass
class Const(Node):
    value: object = None


@dataclass
class Name(Node):
    id: str = ""


@dataclass
class Attribute(Node):
    obj: object = None
    name: str = ""
    # minirb reads of unset @ivars yield nil; minipy raises AttributeError
    missing_nil: bool = False


@dataclass
class Index(Node):
    obj: object = None
    index: object = None


@dataclass
class Call(Node):
    func: object = None
    args: list = field(default_factory=list)


@dataclass
class MethodCall(Node):
    obj: object = None
    name: str = ""
    args: list = field(default_factory=list)


@dataclass
class New(Node):
    cls: object = None
    args: list = field(default_factory=list)


@dataclass
class BinOp(Node):
    op: str = ""  # add sub mul div idiv mod
    left: object = None
    right: object = None


@dataclass
class UnaryOp(Node):
    op: str = ""  # neg | not
    operand: object = None


@dataclass
class Compare(Node):
    op: str = ""  # == != < <= > >=
    left: object = None
    right: object = None


@dataclass
class BoolOp(Node):
    op: str = ""  # and | or
    left: object = None
    right: object = None


@dataclass
class ListLit(Node):
    elements: list = field(default_factory=list)
