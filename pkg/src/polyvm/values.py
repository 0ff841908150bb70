"""The neutral value model shared by every language plugin.

Scalars and text travel across language boundaries as plain Python values
(None, bool, int, float, str); lists are Python lists of neutral values.
Objects stay in their owner language's heap and cross boundaries as
ObjectRef (seen from the owner) or ForeignRef (seen from anywhere else).
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ObjectRef:
    """Handle to an object in `language`'s heap, seen from its own language."""

    language: str
    handle: int


@dataclass(frozen=True)
class ForeignRef:
    """Handle to an object in `language`'s heap, seen from another language."""

    language: str
    handle: int


@dataclass
class ExceptionValue:
    """A guest-level exception: class name, message, optional payload."""

    class_name: str
    message: str = ""
    payload: object = None

    def __post_init__(self):
        if not self.class_name:
            raise ValueError("exception class_name must be non-empty")


@dataclass
class ConversionPolicy:
    """How values are adapted when they cross a language boundary."""

    auto_convert: bool = True
    deep_lists: bool = True


@dataclass
class MopView:
    """Uniform reflection result: class name, display text, ordered slots."""

    class_name: str
    display: str
    slots: list = field(default_factory=list)  # ordered (name, value) pairs


SCALAR_TYPES = (type(None), bool, int, float, str)


def is_scalar(value):
    return isinstance(value, SCALAR_TYPES)


def is_neutral(value):
    """True if `value` belongs to the neutral model (crossable as-is)."""
    if is_scalar(value) or isinstance(value, (ObjectRef, ForeignRef)):
        return True
    if isinstance(value, list):
        return all(is_neutral(v) for v in value)
    return False


def snapshot_value(value):
    """Copy of a value with mutable containers deeply duplicated."""
    if isinstance(value, list):
        return [snapshot_value(v) for v in value]
    return value


_TYPE_NAMES = {
    type(None): "Nil",
    bool: "Bool",
    int: "Int",
    float: "Float",
    str: "Text",
    list: "List",
}


def neutral_type_name(value):
    """Language-independent class name of a neutral value."""
    name = _TYPE_NAMES.get(type(value))
    if name is not None:
        return name
    if isinstance(value, ExceptionValue):
        return value.class_name
    return type(value).__name__
