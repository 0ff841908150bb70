"""The shared bytecode machine both guest languages compile to.

Frames live on explicit Python lists, never on the host call stack, so a
computation can be suspended after any instruction and resumed later with
identical semantics. Exception handling searches for a handler *before*
anything is unwound; an unhandled raise therefore leaves the whole frame
stack intact for the debugger.

Language-specific semantics (truthiness, builtins, display, error naming)
are delegated to the plugin of the executing frame's language; the
instruction set itself is identical for every language.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import (
    ArityChanged,
    BadIndex,
    EvaluationError,
    InternalFault,
    StaleHandle,
    UnknownLanguage,
)
from .values import ConversionPolicy, ExceptionValue, ForeignRef, ObjectRef, is_scalar

EVAL_CAP = 5_000_000  # instruction ceiling for tool-level (scratch) evaluations

_code_uid = 0


def _next_code_uid():
    global _code_uid
    _code_uid += 1
    return _code_uid


@dataclass
class Ins:
    """One instruction: opcode plus up to three operands."""

    op: str
    a: object = None
    b: object = None
    c: object = None

    def __repr__(self):
        parts = [self.op] + [repr(x) for x in (self.a, self.b, self.c) if x is not None]
        return " ".join(parts)


class CodeUnit:
    """Compiled guest code: instructions, pools, line table, source text."""

    def __init__(self, name, params, instructions, constants, line_table, source,
                 language, kind="module", implicit_self=False):
        self.name = name
        self.params = list(params)
        self.instructions = instructions
        self.constants = constants
        self.line_table = line_table
        self.source = source
        self.language = language
        self.kind = kind  # module | function | method
        self.implicit_self = implicit_self
        self.uid = _next_code_uid()
        self.names = sorted(
            {i.a for i in instructions if i.op in ("LOAD", "STORE", "LOAD_SLOT", "STORE_SLOT", "INVOKE")}
        )
        self.validate()

    def validate(self):
        n = len(self.instructions)
        if len(self.line_table) != n:
            raise InternalFault(f"{self.name}: line table covers {len(self.line_table)}/{n} instructions")
        for ins in self.instructions:
            if ins.op in ("JUMP", "JUMP_IF_FALSE", "ITER_NEXT") and not 0 <= ins.a <= n:
                raise InternalFault(f"{self.name}: jump target {ins.a} out of range")
            if ins.op == "SETUP_HANDLER" and not 0 <= ins.a <= n:
                raise InternalFault(f"{self.name}: handler entry {ins.a} out of range")

    def __repr__(self):
        return f"<CodeUnit {self.language}:{self.name}>"


@dataclass
class HandlerBlock:
    handler_ip: int
    matcher: object  # None = catch-all, str = exact class name
    kind: str  # rescue | ensure
    stack_depth: int = 0


class Frame:
    """One activation: code, next instruction, locals, operand stack, handlers."""

    __slots__ = ("code", "ip", "locals", "stack", "handlers", "self_object",
                 "language", "globals", "initial_locals", "return_mode",
                 "return_policy", "line")

    def __init__(self, code, locals_=None, globals_=None, self_object=None,
                 return_mode="call", return_policy=None):
        self.code = code
        self.ip = 0
        self.locals = {} if locals_ is None else locals_
        self.globals = self.locals if globals_ is None else globals_
        self.stack = []
        self.handlers = []
        self.self_object = self_object
        self.language = code.language
        self.return_mode = return_mode  # call | init | xeval
        self.return_policy = return_policy  # only read in xeval mode
        self.initial_locals = dict(self.locals)
        self.line = code.line_table[0] if code.line_table else 1


# --- runtime-only values ---------------------------------------------------


@dataclass
class FunctionValue:
    code: CodeUnit
    globals: dict

    def __repr__(self):
        return f"<function {self.code.name}>"


@dataclass
class ClassValue:
    name: str
    methods: dict  # selector -> CodeUnit
    assigns: dict  # seed slots, definition order
    language: str
    globals: dict

    def __repr__(self):
        return f"<class {self.name}>"


@dataclass
class BoundMethod:
    ref: object  # ObjectRef | ForeignRef
    cls: ClassValue
    code: CodeUnit

    def __repr__(self):
        return f"<bound method {self.cls.name}.{self.code.name}>"


class IteratorValue:
    __slots__ = ("items", "index")

    def __init__(self, items):
        self.items = items
        self.index = 0


@dataclass
class ClassTemplate:
    """Compile-time class descriptor stored in a constant pool."""

    name: str
    methods: dict
    assigns: list  # ordered (name, literal) pairs


class BuiltinFunction:
    __slots__ = ("name", "fn")

    def __init__(self, name, fn):
        self.name = name
        self.fn = fn

    def __repr__(self):
        return f"<builtin {self.name}>"


# --- heap -------------------------------------------------------------------


class GuestObject:
    __slots__ = ("cls", "slots")

    def __init__(self, cls, slots=None):
        self.cls = cls
        self.slots = {} if slots is None else slots


@dataclass
class BoxedValue:
    """A neutral value wrapped into a heap so it can travel as a reference."""

    value: object


class Heap:
    """Handle table for one language. Handles are never reused or collected."""

    def __init__(self, language):
        self.language = language
        self._entries = {}
        self._next = 1
        self._interned = {}

    def alloc(self, entry):
        handle = self._next
        self._next += 1
        self._entries[handle] = entry
        return handle

    def get(self, handle):
        try:
            return self._entries[handle]
        except KeyError:
            raise StaleHandle(self.language, handle) from None

    def intern_box(self, value):
        if is_scalar(value):
            key = (type(value).__name__, value)
        else:
            key = ("id", id(value))
        handle = self._interned.get(key)
        if handle is None:
            handle = self.alloc(BoxedValue(value))
            self._interned[key] = handle
        return handle


# --- execution context and tasks ---------------------------------------------


class ExecContext:
    """Everything a stepping frame stack needs from the outside world."""

    def __init__(self, plugins=None, policy=None, clock=None):
        import time

        self.plugins = plugins or {}
        self.heaps = {lang: Heap(lang) for lang in self.plugins}
        self.policy = policy or ConversionPolicy()
        self.clock = clock or time.monotonic

    def add_plugin(self, plugin):
        self.plugins[plugin.id] = plugin
        self.heaps.setdefault(plugin.id, Heap(plugin.id))

    def plugin(self, language):
        try:
            return self.plugins[language]
        except KeyError:
            raise UnknownLanguage(language) from None

    def heap(self, language):
        if language not in self.heaps:
            raise UnknownLanguage(language)
        return self.heaps[language]

    def deref(self, ref):
        return self.heap(ref.language).get(ref.handle)

    def display(self, value, language):
        return self.plugin(language).display(value, self)

    def to_text(self, value, language):
        return self.plugin(language).to_text(value, self)

    # conversion of values crossing a language boundary

    def convert(self, value, target, source=None, policy=None):
        policy = policy if policy is not None else self.policy
        if target not in self.plugins:
            raise UnknownLanguage(target)
        if isinstance(value, ForeignRef):
            if value.language == target:
                return ObjectRef(value.language, value.handle)
            return value
        if isinstance(value, ObjectRef):
            if value.language == target:
                return value
            return ForeignRef(value.language, value.handle)
        if isinstance(value, list):
            if policy.auto_convert and policy.deep_lists:
                return [self.convert(v, target, source, policy) for v in value]
            return self._wrap(value, target, source)
        if is_scalar(value):
            if policy.auto_convert:
                return value
            return self._wrap(value, target, source)
        return value  # runtime-only values pass through untouched

    def _wrap(self, value, target, source):
        owner = source if source is not None else target
        handle = self.heap(owner).intern_box(value)
        return ForeignRef(owner, handle)


class Task:
    """A steppable frame stack plus its output buffer and mode flags."""

    __slots__ = ("ctx", "frames", "transcript", "scratch", "unwinding", "final_locals")

    def __init__(self, ctx, frames=None, scratch=False):
        self.ctx = ctx
        self.frames = frames if frames is not None else []
        self.transcript = []
        self.scratch = scratch
        self.unwinding = False
        self.final_locals = None


@dataclass
class StepOutcome:
    kind: str  # yielded | completed | failed | trapped | blocked
    value: object = None
    exc: object = None
    snapshot: bytes = None
    wake: float = None
    executed: int = 0


class GuestError(Exception):
    """Internal carrier for a guest-level raise; never escapes the kernel API."""

    def __init__(self, exception):
        super().__init__(exception.class_name)
        self.exception = exception


def guest_raise(class_name, message=""):
    raise GuestError(ExceptionValue(class_name, message))


class SleepRequest:
    __slots__ = ("seconds",)

    def __init__(self, seconds):
        self.seconds = seconds


class FramePush:
    __slots__ = ("frame",)

    def __init__(self, frame):
        self.frame = frame


# --- handler search -----------------------------------------------------------


def _matches(block, exc):
    return block.matcher is None or block.matcher == exc.class_name


def find_handler(frames, class_name):
    """Innermost rescue block matching `class_name`, or None. Pure.

    Ensure blocks are not handlers and are skipped. Returns
    (frame_index, handler_ip) with frame 0 the root.
    """
    probe = ExceptionValue(class_name)
    for fi in range(len(frames) - 1, -1, -1):
        for block in reversed(frames[fi].handlers):
            if block.kind == "rescue" and _matches(block, probe):
                return fi, block.handler_ip
    return None


def _dispatch_raise(task, exc):
    """Route a raised exception: jump to a handler, or report trap/failure.

    Returns None when execution continues (a rescue or ensure block was
    entered), otherwise a terminal StepOutcome. When no rescue exists
    anywhere, nothing is unwound: the intact stack is snapshotted into a
    trapped outcome. Tool-level scratch tasks and proceed-driven unwinds
    run ensure blocks on their way out instead of trapping.
    """
    frames = task.frames
    if find_handler(frames, exc.class_name) is None:
        if not (task.scratch or task.unwinding):
            return StepOutcome("trapped", exc=exc, snapshot=snapshot_frames(frames))
        task.unwinding = True
    while frames:
        frame = frames[-1]
        while frame.handlers:
            block = frame.handlers.pop()
            if block.kind == "ensure" or _matches(block, exc):
                del frame.stack[block.stack_depth:]
                frame.stack.append(exc)
                frame.ip = block.handler_ip
                if block.kind == "rescue":
                    task.unwinding = False
                return None
        frames.pop()
    task.unwinding = False
    return StepOutcome("failed", exc=exc)


def start_unwind(task, exc):
    """Begin termination-style unwinding (the debugger's proceed on a trap)."""
    task.unwinding = True
    return _dispatch_raise(task, exc)


# --- call machinery ------------------------------------------------------------


def _check_arity(plugin, name, expected, got):
    if expected != got:
        raise GuestError(plugin.exc_arity(name, expected, got))


def call_frame(ctx, code, args, self_ref=None, return_mode="call", globals_=None,
               caller_language=None, return_policy=None):
    """Build an activation for a guest function or method."""
    plugin = ctx.plugin(caller_language or code.language)
    params = code.params
    if code.kind == "method" and not code.implicit_self:
        bound = [self_ref] + list(args)
    else:
        bound = list(args)
    _check_arity(plugin, code.name, len(params), len(bound))
    frame = Frame(code, locals_=dict(zip(params, bound)), globals_=globals_,
                  self_object=self_ref, return_mode=return_mode,
                  return_policy=return_policy)
    return frame


def instantiate(ctx, caller_language, cls, args):
    """Allocate an instance; returns FramePush for its init, or the bare ref."""
    heap = ctx.heap(cls.language)
    obj = GuestObject(cls, dict(cls.assigns))
    ref = ObjectRef(cls.language, heap.alloc(obj))
    init = cls.methods.get("__init__") or cls.methods.get("initialize")
    if init is None:
        plugin = ctx.plugin(caller_language)
        _check_arity(plugin, cls.name, 0, len(args))
        return ctx.convert(ref, caller_language, source=cls.language)
    cross = cls.language != caller_language
    if cross:
        args = [ctx.convert(a, cls.language, source=caller_language) for a in args]
    new = call_frame(ctx, init, args, self_ref=ref, return_mode="init",
                     globals_=cls.globals, caller_language=caller_language)
    return FramePush(new)


def invoke_method(ctx, caller_language, recv, selector, args, policy=None):
    """Dispatch INVOKE: guest-object methods, boxed values, or scalar methods.

    Returns a plain value, a FramePush, or a SleepRequest.
    """
    plugin = ctx.plugin(caller_language)
    if isinstance(recv, (ObjectRef, ForeignRef)):
        entry = ctx.deref(recv)
        owner = recv.language
        cross = owner != caller_language
        if isinstance(entry, GuestObject):
            code = entry.cls.methods.get(selector)
            if code is None:
                raise GuestError(plugin.exc_no_method(selector, entry.cls.name))
            if cross:
                args = [ctx.convert(a, owner, source=caller_language, policy=policy)
                        for a in args]
            self_ref = ObjectRef(owner, recv.handle)
            return FramePush(call_frame(ctx, code, args, self_ref=self_ref,
                                        return_mode="xeval" if cross else "call",
                                        globals_=entry.cls.globals,
                                        caller_language=caller_language,
                                        return_policy=policy))
        # boxed neutral value: run the owner language's scalar method on it
        owner_plugin = ctx.plugin(owner)
        if cross:
            args = [ctx.convert(a, owner, source=caller_language, policy=policy)
                    for a in args]
        result = owner_plugin.builtin_method(ctx, entry.value, selector, args)
        if cross:
            result = ctx.convert(result, caller_language, source=owner, policy=policy)
        return result
    return plugin.builtin_method(ctx, recv, selector, args)


def _call_value(task, frame, callee, args):
    """Dispatch CALL. Returns value, FramePush, or SleepRequest."""
    ctx = task.ctx
    if isinstance(callee, FunctionValue):
        return FramePush(call_frame(ctx, callee.code, args, globals_=callee.globals,
                                    caller_language=frame.language))
    if isinstance(callee, ClassValue):
        return instantiate(ctx, frame.language, callee, args)
    if isinstance(callee, BoundMethod):
        cross = callee.ref.language != frame.language
        if cross:
            args = [ctx.convert(a, callee.ref.language, source=frame.language) for a in args]
        self_ref = ObjectRef(callee.ref.language, callee.ref.handle)
        return FramePush(call_frame(ctx, callee.code, args, self_ref=self_ref,
                                    return_mode="xeval" if cross else "call",
                                    globals_=callee.cls.globals,
                                    caller_language=frame.language))
    if isinstance(callee, BuiltinFunction):
        return callee.fn(task, frame, args)
    plugin = ctx.plugin(frame.language)
    raise GuestError(plugin.exc_not_callable(callee, ctx))


def _load_name(task, frame, name):
    if name in frame.locals:
        return frame.locals[name]
    if name == "self" and frame.self_object is not None:
        return frame.self_object
    if frame.globals is not frame.locals and name in frame.globals:
        return frame.globals[name]
    plugin = task.ctx.plugin(frame.language)
    builtin = plugin.builtins.get(name)
    if builtin is not None:
        return BuiltinFunction(name, builtin)
    # bare method names resolve against self in minirb-style lookup
    if plugin.implicit_self_lookup and frame.self_object is not None:
        entry = task.ctx.deref(frame.self_object)
        if isinstance(entry, GuestObject):
            code = entry.cls.methods.get(name)
            if code is not None:
                return BoundMethod(frame.self_object, entry.cls, code)
    raise GuestError(plugin.exc_name_error(name))


# --- operators ------------------------------------------------------------------


def _is_num(v):
    return type(v) in (int, float)


def _binary(plugin, op, left, right):
    if op == "add":
        if _is_num(left) and _is_num(right):
            return left + right
        if type(left) is str and type(right) is str:
            return left + right
        if type(left) is list and type(right) is list:
            return left + right
    elif op == "sub":
        if _is_num(left) and _is_num(right):
            return left - right
    elif op == "mul":
        if _is_num(left) and _is_num(right):
            return left * right
    elif op == "div":
        if _is_num(left) and _is_num(right):
            if right == 0:
                guest_raise("ZeroDivisionError", "integer division by zero")
            return left / right
    elif op == "idiv":
        if _is_num(left) and _is_num(right):
            if right == 0:
                guest_raise("ZeroDivisionError", "integer division by zero")
            if type(left) is int and type(right) is int:
                return left // right
            return left / right
    elif op == "mod":
        if _is_num(left) and _is_num(right):
            if right == 0:
                guest_raise("ZeroDivisionError", "integer division by zero")
            return left % right
    raise GuestError(plugin.exc_bad_operand(op, left, right))


def values_equal(left, right):
    """Structural equality; booleans never equal numbers."""
    if (type(left) is bool) != (type(right) is bool):
        return False
    if type(left) is list and type(right) is list:
        return len(left) == len(right) and all(
            values_equal(a, b) for a, b in zip(left, right))
    if type(left) is list or type(right) is list:
        return False
    if _is_num(left) and _is_num(right):
        return left == right
    return type(left) == type(right) and left == right


def _compare(plugin, op, left, right):
    if op == "==":
        return values_equal(left, right)
    if op == "!=":
        return not values_equal(left, right)
    ordered = (_is_num(left) and _is_num(right)) or (
        type(left) is str and type(right) is str)
    if not ordered:
        raise GuestError(plugin.exc_bad_operand(op, left, right))
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise InternalFault(f"unknown comparison {op}")


def _index_read(plugin, obj, idx):
    if type(obj) in (list, str):
        if type(idx) is not int or isinstance(idx, bool):
            raise GuestError(plugin.exc_bad_index_type(obj, idx))
        if -len(obj) <= idx < len(obj):
            return obj[idx]
        guest_raise("IndexError", "list index out of range" if type(obj) is list
                    else "string index out of range")
    raise GuestError(plugin.exc_bad_operand("[]", obj, idx))


# --- the interpreter loop ---------------------------------------------------------


def step(task, budget):
    """Execute up to `budget` instructions; resumable at any boundary."""
    if budget < 1:
        raise InternalFault("budget must be >= 1")
    frames = task.frames
    if not frames:
        raise InternalFault("step on an empty frame stack")
    ctx = task.ctx
    executed = 0
    while executed < budget:
        frame = frames[-1]
        code = frame.code
        ip = frame.ip
        if ip >= len(code.instructions):
            raise InternalFault(f"{code.name}: ip {ip} ran off the end")
        ins = code.instructions[ip]
        frame.line = code.line_table[ip]
        frame.ip = ip + 1
        executed += 1
        op = ins.op
        stack = frame.stack
        try:
            if op == "PUSH_CONST":
                stack.append(code.constants[ins.a])
            elif op == "LOAD":
                stack.append(_load_name(task, frame, ins.a))
            elif op == "STORE":
                frame.locals[ins.a] = stack.pop()
            elif op == "JUMP":
                frame.ip = ins.a
            elif op == "JUMP_IF_FALSE":
                if not ctx.plugin(frame.language).truthy(stack.pop()):
                    frame.ip = ins.a
            elif op == "BINARY":
                right = stack.pop()
                left = stack.pop()
                stack.append(_binary(ctx.plugin(frame.language), ins.a, left, right))
            elif op == "COMPARE":
                right = stack.pop()
                left = stack.pop()
                stack.append(_compare(ctx.plugin(frame.language), ins.a, left, right))
            elif op == "UNARY":
                v = stack.pop()
                if ins.a == "neg":
                    if not _is_num(v):
                        raise GuestError(ctx.plugin(frame.language).exc_bad_operand("-", v, None))
                    stack.append(-v)
                else:  # not
                    stack.append(not ctx.plugin(frame.language).truthy(v))
            elif op == "CALL":
                args = _pop_args(stack, ins.a)
                callee = stack.pop()
                result = _call_value(task, frame, callee, args)
                out = _apply_call_result(task, frame, result, executed)
                if out is not None:
                    return out
            elif op == "INVOKE":
                args = _pop_args(stack, ins.b)
                recv = stack.pop()
                result = invoke_method(ctx, frame.language, recv, ins.a, args)
                out = _apply_call_result(task, frame, result, executed)
                if out is not None:
                    return out
            elif op == "RETURN":
                value = stack.pop() if stack else None
                done = frames.pop()
                if done.return_mode == "init":
                    value = done.self_object
                if not frames:
                    task.final_locals = done.locals
                    return StepOutcome("completed", value=value, executed=executed)
                if done.return_mode == "xeval" or (
                        done.return_mode == "init"
                        and done.language != frames[-1].language):
                    value = ctx.convert(value, frames[-1].language,
                                        source=done.language,
                                        policy=done.return_policy)
                frames[-1].stack.append(value)
            elif op == "POP":
                stack.pop()
            elif op == "DUP":
                stack.append(stack[-1])
            elif op == "BUILD_LIST":
                items = _pop_args(stack, ins.a)
                stack.append(items)
            elif op == "INDEX":
                idx = stack.pop()
                obj = stack.pop()
                obj, idx = _resolve_boxed_pair(ctx, frame, obj, idx)
                stack.append(_index_read(ctx.plugin(frame.language), obj, idx))
            elif op == "SET_INDEX":
                value = stack.pop()
                idx = stack.pop()
                obj = stack.pop()
                obj, idx = _resolve_boxed_pair(ctx, frame, obj, idx)
                plugin = ctx.plugin(frame.language)
                if type(obj) is not list:
                    raise GuestError(plugin.exc_bad_operand("[]=", obj, idx))
                if type(idx) is not int or isinstance(idx, bool):
                    raise GuestError(plugin.exc_bad_index_type(obj, idx))
                if not -len(obj) <= idx < len(obj):
                    guest_raise("IndexError", "list assignment index out of range")
                obj[idx] = value
            elif op == "LOAD_SLOT":
                recv = stack.pop()
                stack.append(_slot_read(task, frame, recv, ins.a, ins.b))
            elif op == "STORE_SLOT":
                value = stack.pop()
                recv = stack.pop()
                _slot_write(task, frame, recv, ins.a, value)
            elif op == "MAKE_FUNCTION":
                stack.append(FunctionValue(code.constants[ins.a], frame.globals))
            elif op == "MAKE_CLASS":
                tpl = code.constants[ins.a]
                stack.append(ClassValue(tpl.name, tpl.methods, dict(tpl.assigns),
                                        frame.language, frame.globals))
            elif op == "NEW_INSTANCE":
                args = _pop_args(stack, ins.a)
                cls = stack.pop()
                if not isinstance(cls, ClassValue):
                    raise GuestError(ctx.plugin(frame.language).exc_not_callable(cls, ctx))
                result = instantiate(ctx, frame.language, cls, args)
                out = _apply_call_result(task, frame, result, executed)
                if out is not None:
                    return out
            elif op == "SETUP_HANDLER":
                frame.handlers.append(HandlerBlock(ins.a, ins.b, ins.c, len(stack)))
            elif op == "POP_HANDLER":
                frame.handlers.pop()
            elif op == "RAISE":
                if ins.a is not None:
                    message = ctx.to_text(stack.pop(), frame.language)
                    err = ExceptionValue(ins.a, message)
                else:
                    v = stack.pop()
                    if not isinstance(v, ExceptionValue):
                        raise GuestError(ctx.plugin(frame.language).exc_bad_raise(v, ctx))
                    err = v
                raise GuestError(err)
            elif op == "ITER_NEW":
                v = stack.pop()
                if type(v) is not list:
                    raise GuestError(ctx.plugin(frame.language).exc_bad_operand("iter", v, None))
                stack.append(IteratorValue(v))
            elif op == "ITER_NEXT":
                it = stack[-1]
                if it.index < len(it.items):
                    stack.append(it.items[it.index])
                    it.index += 1
                else:
                    stack.pop()
                    frame.ip = ins.a
            else:
                raise InternalFault(f"unknown opcode {op}")
        except GuestError as g:
            out = _dispatch_raise(task, g.exception)
            if out is not None:
                out.executed = executed
                return out
    return StepOutcome("yielded", executed=executed)


def _pop_args(stack, n):
    if n == 0:
        return []
    args = stack[-n:]
    del stack[-n:]
    return args


def _apply_call_result(task, frame, result, executed):
    """Handle the three shapes a call dispatch can produce."""
    if isinstance(result, FramePush):
        task.frames.append(result.frame)
        return None
    if isinstance(result, SleepRequest):
        frame.stack.append(None)
        return StepOutcome("blocked", wake=task.ctx.clock() + result.seconds,
                           executed=executed)
    frame.stack.append(result)
    return None


def _resolve_boxed_pair(ctx, frame, obj, idx):
    """Allow indexing through references to boxed lists/strings."""
    if isinstance(obj, (ObjectRef, ForeignRef)):
        entry = ctx.deref(obj)
        if isinstance(entry, BoxedValue):
            obj = entry.value
    return obj, idx


def _slot_read(task, frame, recv, name, missing_nil):
    ctx = task.ctx
    plugin = ctx.plugin(frame.language)
    if isinstance(recv, (ObjectRef, ForeignRef)):
        entry = ctx.deref(recv)
        cross = recv.language != frame.language
        if isinstance(entry, GuestObject):
            if name in entry.slots:
                value = entry.slots[name]
                if cross:
                    value = ctx.convert(value, frame.language, source=recv.language)
                return value
            if not missing_nil:
                code = entry.cls.methods.get(name)
                if code is not None:
                    return BoundMethod(recv, entry.cls, code)
            if missing_nil:
                return None
            raise GuestError(plugin.exc_no_attribute(name, entry.cls.name))
        if missing_nil:
            return None
        raise GuestError(plugin.exc_no_attribute(name, type(entry.value).__name__))
    if missing_nil:
        return None
    raise GuestError(plugin.exc_no_attribute(name, plugin.type_name(recv)))


def _slot_write(task, frame, recv, name, value):
    ctx = task.ctx
    plugin = ctx.plugin(frame.language)
    if isinstance(recv, (ObjectRef, ForeignRef)):
        entry = ctx.deref(recv)
        if isinstance(entry, GuestObject):
            if recv.language != frame.language:
                value = ctx.convert(value, recv.language, source=frame.language)
            entry.slots[name] = value
            return
    raise GuestError(plugin.exc_no_attribute(name, plugin.type_name(recv)))


# --- whole-task helpers --------------------------------------------------------


def run_to_completion(task, cap=EVAL_CAP):
    """Drive a scratch task to its end; sleep requests do not wait.

    Raises EvaluationError when the task fails with a guest exception or
    exceeds the instruction cap.
    """
    total = 0
    while True:
        out = step(task, min(65536, max(1, cap - total)))
        total += out.executed
        if out.kind == "yielded":
            if total >= cap:
                raise EvaluationError(ExceptionValue(
                    "TimeoutError", f"evaluation exceeded {cap} instructions"))
            continue
        if out.kind == "blocked":
            continue
        if out.kind in ("failed", "trapped"):
            raise EvaluationError(out.exc)
        return out.value


def evaluate_in_frame(ctx, frames, index, source, cap=EVAL_CAP):
    """Evaluate `source` with a suspended frame's locals visible and writable.

    Runs on a scratch stack; a raise inside becomes EvaluationError and the
    suspended stack is untouched. Assignments persist in the frame.
    """
    if not 0 <= index < len(frames):
        raise BadIndex(index)
    frame = frames[index]
    plugin = ctx.plugin(frame.language)
    unit = plugin.compile_eval(source, in_method=frame.self_object is not None)
    scratch = Task(ctx, scratch=True)
    eval_frame = Frame(unit, locals_=frame.locals, globals_=frame.globals,
                       self_object=frame.self_object)
    scratch.frames.append(eval_frame)
    return run_to_completion(scratch, cap)


def restart_frame(ctx, frames, index, new_source=None):
    """Discard frames above `index` and replace it with a fresh activation.

    The original argument bindings and receiver are reused; with
    `new_source` the code is recompiled first (same parameter list
    required). Ensure blocks of discarded frames deliberately do not run.
    """
    if not 0 <= index < len(frames):
        raise BadIndex(index)
    frame = frames[index]
    code = frame.code
    if new_source is not None:
        plugin = ctx.plugin(frame.language)
        new_code = plugin.recompile(code, new_source)
        if new_code.params != code.params:
            raise ArityChanged(code.params, new_code.params)
    else:
        new_code = code
    del frames[index + 1:]
    if frame.globals is frame.locals:
        # a root activation: its locals double as the module globals that
        # previously created functions captured, so refresh in place
        frame.locals.clear()
        frame.locals.update(frame.initial_locals)
        fresh = Frame(new_code, locals_=frame.locals,
                      self_object=frame.self_object,
                      return_mode=frame.return_mode)
    else:
        fresh = Frame(new_code, locals_=dict(frame.initial_locals),
                      globals_=frame.globals, self_object=frame.self_object,
                      return_mode=frame.return_mode)
    fresh.initial_locals = dict(frame.initial_locals)
    frames[index] = fresh
    return frames


# --- introspection ----------------------------------------------------------------


@dataclass
class FrameView:
    """One debugger-facing row of a stack view; index 0 is the top frame."""

    index: int
    language: str
    name: str
    line: int
    source: str
    locals: dict
    pseudo: list


def stack_view(frames):
    """Top-first views of every frame; hidden compiler temporaries filtered."""
    views = []
    depth = len(frames)
    for vi, frame in enumerate(reversed(frames)):
        code = frame.code
        shown = {k: v for k, v in frame.locals.items() if not k.startswith("$")}
        pseudo = [
            ("(thisContext)", f"<frame {code.name} @ line {frame.line}>"),
            ("(source)", code.source),
        ]
        views.append(FrameView(index=vi, language=frame.language, name=code.name,
                               line=frame.line, source=code.source, locals=shown,
                               pseudo=pseudo))
    assert len(views) == depth
    return views


# --- snapshots ---------------------------------------------------------------------


def _ser_value(v):
    if v is None:
        return "nil"
    t = type(v)
    if t is bool:
        return ["b", v]
    if t is int:
        return ["i", str(v)]
    if t is float:
        return ["f", repr(v)]
    if t is str:
        return ["s", v]
    if t is list:
        return ["l", [_ser_value(x) for x in v]]
    if t is ObjectRef:
        return ["obj", v.language, v.handle]
    if t is ForeignRef:
        return ["for", v.language, v.handle]
    if t is ExceptionValue:
        return ["exc", v.class_name, v.message, _ser_value(v.payload)]
    if t is FunctionValue:
        return ["fn", v.code.uid]
    if t is ClassValue:
        return ["cls", v.name, sorted(v.methods)]
    if t is BoundMethod:
        return ["bm", _ser_value(v.ref), v.code.uid]
    if t is IteratorValue:
        return ["it", _ser_value(v.items), v.index]
    if t is BuiltinFunction:
        return ["bi", v.name]
    return ["?", repr(v)]


def snapshot_frames(frames):
    """Canonical bytes for a frame stack; equal bytes mean equal state."""
    doc = []
    for frame in frames:
        doc.append({
            "code": frame.code.uid,
            "name": frame.code.name,
            "ip": frame.ip,
            "line": frame.line,
            "language": frame.language,
            "locals": [[k, _ser_value(v)] for k, v in sorted(frame.locals.items())],
            "stack": [_ser_value(v) for v in frame.stack],
            "handlers": [[b.handler_ip, b.matcher, b.kind, b.stack_depth]
                         for b in frame.handlers],
            "self": _ser_value(frame.self_object),
            "mode": frame.return_mode,
        })
    return json.dumps(doc, sort_keys=True, ensure_ascii=False).encode("utf-8")
