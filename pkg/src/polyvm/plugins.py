"""Language plugin contract, registry, and the neutral meta-object protocol.

Every language ships one plugin exposing the same six capabilities. Tools
never talk to a language directly; they reflect, read slots, invoke methods,
and render displays through the functions here, which dispatch per object
owner.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import kernel
from .errors import (
    DuplicatePlugin,
    EvaluationError,
    MissingCapability,
    NoSuchMethod,
    NoSuchSlot,
)
from .values import MopView, ObjectRef, neutral_type_name, snapshot_value

CAPABILITIES = ("compile", "step", "display", "tokenize", "reflect", "invoke")


@dataclass
class PluginDescriptor:
    id: str
    display_name: str
    file_extension: str
    capabilities: tuple = field(default=CAPABILITIES)


class LanguagePlugin:
    """Base class for language plugins; subclasses fill in the surface.

    The kernel consults plugins for everything language-specific: builtins,
    truthiness, scalar method tables, display rules, and the wording of
    runtime errors.
    """

    id = ""
    display_name = ""
    file_extension = ""
    implicit_self_lookup = False

    @property
    def descriptor(self):
        return PluginDescriptor(self.id, self.display_name, self.file_extension)

    # compilation surface, provided per language
    def tokenize(self, source):
        raise NotImplementedError

    def compile_module(self, source, name=None):
        raise NotImplementedError

    def compile_eval(self, source, in_method=False):
        raise NotImplementedError

    def recompile(self, code, new_source):
        raise NotImplementedError

    # semantics hooks
    def truthy(self, value):
        raise NotImplementedError

    def display(self, value, ctx):
        raise NotImplementedError

    def to_text(self, value, ctx):
        raise NotImplementedError

    def builtin_method(self, ctx, recv, selector, args):
        raise NotImplementedError

    builtins = {}


class Registry:
    """Registered plugins keyed by id; shared by one VM instance."""

    def __init__(self):
        self._plugins = {}

    def register(self, plugin):
        descriptor = plugin.descriptor
        if descriptor.id in self._plugins:
            raise DuplicatePlugin(descriptor.id)
        for capability in CAPABILITIES:
            if capability not in descriptor.capabilities:
                raise MissingCapability(capability)
        self._plugins[descriptor.id] = plugin
        return descriptor.id

    def languages(self):
        return list(self._plugins)

    def get(self, language):
        return self._plugins.get(language)

    @property
    def plugins(self):
        return self._plugins


def standard_registry():
    """Registry with both bundled languages installed."""
    from .minipy import MiniPyPlugin
    from .minirb import MiniRbPlugin

    registry = Registry()
    registry.register(MiniPyPlugin())
    registry.register(MiniRbPlugin())
    return registry


# --- the neutral MOP ----------------------------------------------------------


def mop_reflect(ctx, ref):
    """Class name, display string, and ordered slots of a referenced object."""
    entry = ctx.deref(ref)
    owner = ref.language
    own_ref = ObjectRef(owner, ref.handle)
    if isinstance(entry, kernel.GuestObject):
        return MopView(class_name=entry.cls.name,
                       display=ctx.display(own_ref, owner),
                       slots=[(k, snapshot_value(v))
                              for k, v in entry.slots.items()])
    value = entry.value
    slots = []
    if type(value) is list:
        slots = [(str(i), snapshot_value(v)) for i, v in enumerate(value)]
    return MopView(class_name=neutral_type_name(value),
                   display=ctx.display(value, owner), slots=slots)


def mop_slot_get(ctx, ref, name, caller=None, policy=None):
    """Read one slot, converted toward the caller's language."""
    entry = ctx.deref(ref)
    if not isinstance(entry, kernel.GuestObject) or name not in entry.slots:
        raise NoSuchSlot(name)
    value = entry.slots[name]
    target = caller or ref.language
    return ctx.convert(value, target, source=ref.language, policy=policy)


def mop_invoke(ctx, ref, selector, args, caller=None, policy=None):
    """Invoke a method on a referenced object from tool context.

    Runs the owner-language method to completion on a scratch stack;
    arguments and the result are converted per policy.
    """
    caller = caller or ref.language
    entry = ctx.deref(ref)
    if isinstance(entry, kernel.GuestObject) and selector not in entry.cls.methods:
        raise NoSuchMethod(selector)
    try:
        result = kernel.invoke_method(ctx, caller, ref, selector, args, policy=policy)
    except kernel.GuestError as g:
        if g.exception.class_name in ("AttributeError", "NoMethodError"):
            raise NoSuchMethod(selector) from None
        raise EvaluationError(g.exception) from None
    if isinstance(result, kernel.FramePush):
        scratch = kernel.Task(ctx, scratch=True)
        scratch.frames.append(result.frame)
        result.frame.return_mode = "call"  # conversion applied below instead
        value = kernel.run_to_completion(scratch)
        return ctx.convert(value, caller, source=ref.language, policy=policy)
    if isinstance(result, kernel.SleepRequest):
        return None
    return result


def mop_display(ctx, value, language):
    """The language's canonical display text for a value."""
    return ctx.display(value, language)
