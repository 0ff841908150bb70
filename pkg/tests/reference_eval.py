"""Independent tree-walking evaluator used as the oracle for the bytecode path.

Shares only the parsers and AST with the package under test; every piece of
runtime semantics (operators, truthiness, builtins, exception handling,
error wording) is implemented again here, so a kernel or compiler bug cannot
hide behind shared code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from polyvm import minipy, minirb
from polyvm import syntax as ast
from polyvm.values import ExceptionValue

_TYPE_NAMES = {type(None): "Nil", bool: "Bool", int: "Int", float: "Float",
               str: "Text", list: "List"}


def type_name(v):
    return _TYPE_NAMES.get(type(v), type(v).__name__)


class RefRaise(Exception):
    def __init__(self, exc):
        super().__init__(exc.class_name)
        self.exc = exc


def _raise(cls, msg=""):
    raise RefRaise(ExceptionValue(cls, msg))


class RefReturn(Exception):
    def __init__(self, value):
        self.value = value


class RefBreak(Exception):
    pass


class RefContinue(Exception):
    pass


@dataclass
class RefClass:
    name: str
    methods: dict
    assigns: list
    globals: dict = field(repr=False, default=None)


@dataclass
class RefObject:
    cls: RefClass
    slots: dict


@dataclass
class RefFunction:
    node: object
    globals: dict = field(repr=False, default=None)


@dataclass
class RefBoundMethod:
    obj: RefObject
    node: object
    cls: RefClass


@dataclass
class RefResult:
    value: object = None
    exception: object = None
    transcript: str = ""


def _is_num(v):
    return type(v) in (int, float)


class RefEvaluator:
    """One evaluator instance per (language, program run)."""

    def __init__(self, language):
        self.language = language
        self.py = language == "minipy"
        self.transcript = []
        self.result_slot = None

    # --- language knobs ---

    def truthy(self, v):
        if self.py:
            if v is None or v is False:
                return False
            if type(v) is bool:
                return v
            if type(v) in (int, float):
                return v != 0
            if type(v) in (str, list):
                return len(v) > 0
            return True
        return v is not None and v is not False

    def display(self, v):
        if v is None:
            return "None" if self.py else "nil"
        t = type(v)
        if t is bool:
            if self.py:
                return "True" if v else "False"
            return "true" if v else "false"
        if t is int:
            return str(v)
        if t is float:
            return repr(v)
        if t is str:
            return self._quote(v)
        if t is list:
            return "[" + ", ".join(self.display(e) for e in v) + "]"
        if t is RefObject:
            return f"<{v.cls.name} object>" if self.py else f"#<{v.cls.name}>"
        if t is ExceptionValue:
            return f"{v.class_name}: {v.message}"
        if t is RefClass:
            return f"<class {v.name}>" if self.py else v.name
        if t is RefFunction:
            return (f"<function {v.node.name}>" if self.py
                    else f"#<method {v.node.name}>")
        return repr(v)

    def _quote(self, s):
        q = "'" if self.py else '"'
        out = [q]
        for ch in s:
            if ch == "\\":
                out.append("\\\\")
            elif ch == q:
                out.append("\\" + q)
            elif ch == "\n":
                out.append("\\n")
            elif ch == "\t":
                out.append("\\t")
            elif ch == "\r":
                out.append("\\r")
            else:
                out.append(ch)
        out.append(q)
        return "".join(out)

    def to_text(self, v):
        if type(v) is str:
            return v
        if not self.py and v is None:
            return ""
        if type(v) is ExceptionValue:
            return v.message
        return self.display(v)

    def bad_operand(self, op, left, right=None):
        names = type_name(left)
        if right is not None:
            names += f" and {type_name(right)}"
        _raise("TypeError", f"unsupported operand type(s) for {op}: {names}")

    def arity_error(self, name, expected, got):
        if self.py:
            _raise("TypeError", f"{name}() takes {expected} arguments ({got} given)")
        _raise("ArgumentError",
               f"wrong number of arguments (given {got}, expected {expected})")

    def name_error(self, name):
        if self.py:
            _raise("NameError", f"name '{name}' is not defined")
        _raise("NameError", f"undefined local variable or method '{name}'")

    def no_method(self, selector, cls_name):
        if self.py:
            _raise("AttributeError",
                   f"'{cls_name}' object has no attribute '{selector}'")
        _raise("NoMethodError", f"undefined method '{selector}' for {cls_name}")

    # --- entry point ---

    def run(self, source, bindings=None):
        parse = minipy.parse if self.py else minirb.parse
        module = parse(source)
        env = dict(bindings or {})
        self.globals = env
        try:
            self.exec_block(module.body, env, None, module_level=True)
        except RefRaise as r:
            return RefResult(exception=r.exc, transcript="".join(self.transcript))
        return RefResult(value=self.result_slot,
                         transcript="".join(self.transcript))

    # --- statements ---

    def exec_block(self, stmts, env, selfobj, module_level=False):
        for stmt in stmts:
            self.exec_stmt(stmt, env, selfobj, module_level)

    def exec_stmt(self, node, env, selfobj, module_level):
        t = type(node)
        if t is ast.ExprStmt:
            v = self.eval(node.value, env, selfobj)
            if module_level or (not self.py):
                self.result_slot = v
        elif t is ast.Assign:
            self.assign(node.target, self.eval(node.value, env, selfobj), env, selfobj)
        elif t is ast.If:
            if self.truthy(self.eval(node.cond, env, selfobj)):
                self.exec_block(node.then, env, selfobj, module_level)
            else:
                self.exec_block(node.orelse, env, selfobj, module_level)
        elif t is ast.While:
            while self.truthy(self.eval(node.cond, env, selfobj)):
                try:
                    self.exec_block(node.body, env, selfobj, module_level)
                except RefBreak:
                    break
                except RefContinue:
                    continue
        elif t is ast.For:
            items = self.eval(node.iterable, env, selfobj)
            if type(items) is not list:
                self.bad_operand("iter", items)
            i = 0
            while i < len(items):
                env[node.target] = items[i]
                i += 1
                try:
                    self.exec_block(node.body, env, selfobj, module_level)
                except RefBreak:
                    break
                except RefContinue:
                    continue
        elif t is ast.Try:
            self.exec_try(node, env, selfobj, module_level)
        elif t is ast.Raise:
            self.exec_raise(node, env, selfobj)
        elif t is ast.Return:
            value = None if node.value is None else self.eval(node.value, env, selfobj)
            raise RefReturn(value)
        elif t is ast.Break:
            raise RefBreak()
        elif t is ast.Continue:
            raise RefContinue()
        elif t is ast.Pass:
            pass
        elif t is ast.FuncDef:
            env[node.name] = RefFunction(node, self.globals)
        elif t is ast.ClassDef:
            methods = {m.name: m for m in node.methods}
            assigns = [(n, c.value) for n, c in node.assigns]
            env[node.name] = RefClass(node.name, methods, assigns, self.globals)
        else:
            raise AssertionError(f"unhandled statement {t.__name__}")

    def exec_try(self, node, env, selfobj, module_level):
        finally_body = node.finally_body

        def run_finally():
            if finally_body is not None:
                self.exec_block(finally_body, env, selfobj, module_level)

        try:
            self.exec_block(node.body, env, selfobj, module_level)
        except RefRaise as r:
            exc = r.exc
            chosen = None
            for clause in node.clauses:
                if clause.class_name is None or clause.class_name == exc.class_name:
                    chosen = clause
                    break
            if chosen is None:
                run_finally()
                raise
            if chosen.bind_name:
                env[chosen.bind_name] = exc
            try:
                self.exec_block(chosen.body, env, selfobj, module_level)
            except RefRaise:
                run_finally()
                raise
            except (RefReturn, RefBreak, RefContinue):
                raise  # control-flow exits skip ensure bodies
            run_finally()
            return
        except (RefReturn, RefBreak, RefContinue):
            raise  # control-flow exits skip ensure bodies
        run_finally()

    def exec_raise(self, node, env, selfobj):
        if node.value is not None:
            v = self.eval(node.value, env, selfobj)
            if type(v) is not ExceptionValue:
                _raise("TypeError", "exceptions must be exception values")
            raise RefRaise(v)
        message = ""
        if node.message is not None:
            message = self.to_text(self.eval(node.message, env, selfobj))
        raise RefRaise(ExceptionValue(node.class_name, message))

    def assign(self, target, value, env, selfobj):
        t = type(target)
        if t is ast.Name:
            env[target.id] = value
        elif t is ast.Attribute:
            obj = self.eval(target.obj, env, selfobj)
            if type(obj) is not RefObject:
                self.no_method(target.name, type_name(obj))
            obj.slots[target.name] = value
        elif t is ast.Index:
            obj = self.eval(target.obj, env, selfobj)
            idx = self.eval(target.index, env, selfobj)
            if type(obj) is not list:
                self.bad_operand("[]=", obj, idx)
            if type(idx) is not int or isinstance(idx, bool):
                _raise("TypeError", "indices must be integers")
            if not -len(obj) <= idx < len(obj):
                _raise("IndexError", "list assignment index out of range")
            obj[idx] = value
        else:
            raise AssertionError("bad assignment target")

    # --- expressions ---

    def eval(self, node, env, selfobj):
        t = type(node)
        if t is ast.Const:
            return node.value
        if t is ast.Name:
            return self.lookup(node.id, env, selfobj)
        if t is ast.BinOp:
            left = self.eval(node.left, env, selfobj)
            right = self.eval(node.right, env, selfobj)
            return self.binary(node.op, left, right)
        if t is ast.Compare:
            left = self.eval(node.left, env, selfobj)
            right = self.eval(node.right, env, selfobj)
            return self.compare(node.op, left, right)
        if t is ast.BoolOp:
            left = self.eval(node.left, env, selfobj)
            if node.op == "and":
                if not self.truthy(left):
                    return left
                return self.eval(node.right, env, selfobj)
            if self.truthy(left):
                return left
            return self.eval(node.right, env, selfobj)
        if t is ast.UnaryOp:
            v = self.eval(node.operand, env, selfobj)
            if node.op == "neg":
                if not _is_num(v):
                    self.bad_operand("-", v)
                return -v
            return not self.truthy(v)
        if t is ast.ListLit:
            return [self.eval(e, env, selfobj) for e in node.elements]
        if t is ast.Index:
            obj = self.eval(node.obj, env, selfobj)
            idx = self.eval(node.index, env, selfobj)
            return self.index_read(obj, idx)
        if t is ast.Attribute:
            obj = self.eval(node.obj, env, selfobj)
            return self.attr_read(obj, node.name, node.missing_nil)
        if t is ast.Call:
            func = self.eval(node.func, env, selfobj)
            args = [self.eval(a, env, selfobj) for a in node.args]
            return self.call(func, args)
        if t is ast.MethodCall:
            obj = self.eval(node.obj, env, selfobj)
            args = [self.eval(a, env, selfobj) for a in node.args]
            return self.invoke(obj, node.name, args)
        if t is ast.New:
            cls = self.eval(node.cls, env, selfobj)
            args = [self.eval(a, env, selfobj) for a in node.args]
            if type(cls) is not RefClass:
                _raise("TypeError",
                       f"'{type_name(cls)}' object is not callable")
            return self.instantiate(cls, args)
        raise AssertionError(f"unhandled expression {t.__name__}")

    def lookup(self, name, env, selfobj):
        if name in env:
            return env[name]
        if name == "self" and selfobj is not None:
            return selfobj
        if env is not self.globals and name in self.globals:
            return self.globals[name]
        if name in self.builtin_names():
            return ("builtin", name)
        if not self.py and selfobj is not None:
            node = selfobj.cls.methods.get(name)
            if node is not None:
                return RefBoundMethod(selfobj, node, selfobj.cls)
        self.name_error(name)

    def builtin_names(self):
        if self.py:
            return ("print", "len", "range", "str", "int", "float", "sleep", "xeval")
        return ("puts", "sleep", "xeval")

    # --- operators ---

    def binary(self, op, left, right):
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
                    _raise("ZeroDivisionError", "integer division by zero")
                return left / right
        elif op == "idiv":
            if _is_num(left) and _is_num(right):
                if right == 0:
                    _raise("ZeroDivisionError", "integer division by zero")
                if type(left) is int and type(right) is int:
                    return left // right
                return left / right
        elif op == "mod":
            if _is_num(left) and _is_num(right):
                if right == 0:
                    _raise("ZeroDivisionError", "integer division by zero")
                return left % right
        self.bad_operand(op, left, right)

    def equal(self, left, right):
        if (type(left) is bool) != (type(right) is bool):
            return False
        if type(left) is list and type(right) is list:
            return len(left) == len(right) and all(
                self.equal(a, b) for a, b in zip(left, right))
        if type(left) is list or type(right) is list:
            return False
        if _is_num(left) and _is_num(right):
            return left == right
        return type(left) == type(right) and left == right

    def compare(self, op, left, right):
        if op == "==":
            return self.equal(left, right)
        if op == "!=":
            return not self.equal(left, right)
        ordered = (_is_num(left) and _is_num(right)) or (
            type(left) is str and type(right) is str)
        if not ordered:
            self.bad_operand(op, left, right)
        return {"<": left < right, "<=": left <= right,
                ">": left > right, ">=": left >= right}[op]

    def index_read(self, obj, idx):
        if type(obj) in (list, str):
            if type(idx) is not int or isinstance(idx, bool):
                _raise("TypeError", "indices must be integers")
            if -len(obj) <= idx < len(obj):
                return obj[idx]
            _raise("IndexError", "list index out of range" if type(obj) is list
                   else "string index out of range")
        self.bad_operand("[]", obj, idx)

    def attr_read(self, obj, name, missing_nil):
        if type(obj) is RefObject:
            if name in obj.slots:
                return obj.slots[name]
            if not missing_nil:
                node = obj.cls.methods.get(name)
                if node is not None:
                    return RefBoundMethod(obj, node, obj.cls)
                self.no_method(name, obj.cls.name)
            return None
        if missing_nil:
            return None
        self.no_method(name, type_name(obj))

    # --- calls ---

    def call(self, func, args):
        if type(func) is tuple and func[0] == "builtin":
            return self.call_builtin(func[1], args)
        if type(func) is RefFunction:
            return self.call_function(func.node, args, None)
        if type(func) is RefClass:
            return self.instantiate(func, args)
        if type(func) is RefBoundMethod:
            return self.call_method(func.obj, func.node, args)
        _raise("TypeError", f"'{type_name(func)}' object is not callable")

    def call_function(self, node, args, receiver):
        params = node.params
        if node.implicit_self or receiver is None:
            bound = args
        else:
            bound = [receiver] + args
        if len(bound) != len(params):
            self.arity_error(node.name, len(params), len(bound))
        env = dict(zip(params, bound))
        return self.run_body(node, env, receiver)

    def call_method(self, obj, node, args):
        if node.implicit_self:
            return self.call_function(node, args, obj)
        return self.call_function(node, args, obj)

    def run_body(self, node, env, selfobj):
        saved = self.result_slot
        self.result_slot = None
        try:
            self.exec_block(node.body, env, selfobj)
        except RefReturn as r:
            return r.value
        finally:
            implicit, self.result_slot = self.result_slot, saved
        if not self.py:
            return implicit
        return None

    def instantiate(self, cls, args):
        obj = RefObject(cls, dict(cls.assigns))
        init = cls.methods.get("__init__") or cls.methods.get("initialize")
        if init is None:
            if args:
                self.arity_error(cls.name, 0, len(args))
            return obj
        if init.implicit_self:
            bound = args
        else:
            bound = [obj] + args
        if len(bound) != len(init.params):
            self.arity_error(init.name, len(init.params), len(bound))
        env = dict(zip(init.params, bound))
        try:
            self.exec_block(init.body, env, obj)
        except RefReturn:
            pass
        return obj

    def invoke(self, obj, selector, args):
        if type(obj) is RefObject:
            node = obj.cls.methods.get(selector)
            if node is None:
                self.no_method(selector, obj.cls.name)
            return self.call_method(obj, node, args)
        return self.scalar_method(obj, selector, args)

    def scalar_method(self, recv, selector, args):
        t = type(recv)
        if self.py:
            if t is str:
                if selector == "split":
                    if len(args) != 1 or type(args[0]) is not str:
                        _raise("TypeError", "split() takes one text separator")
                    return recv.split(args[0])
                if selector == "lower":
                    if args:
                        _raise("TypeError", "lower() takes no arguments")
                    return recv.lower()
                if selector == "strip":
                    if args:
                        _raise("TypeError", "strip() takes no arguments")
                    return recv.strip()
            elif t is list:
                if selector == "append":
                    if len(args) != 1:
                        _raise("TypeError", "append() takes exactly one argument")
                    recv.append(args[0])
                    return None
                if selector == "pop":
                    if args:
                        _raise("TypeError", "pop() takes no arguments")
                    if not recv:
                        _raise("IndexError", "pop from empty list")
                    return recv.pop()
            _raise("AttributeError",
                   f"'{type_name(recv)}' object has no attribute '{selector}'")
        if t is str:
            if selector == "split":
                if len(args) != 1 or type(args[0]) is not str:
                    _raise("ArgumentError", "split takes one text separator")
                return recv.split(args[0])
            if selector == "downcase":
                if args:
                    _raise("ArgumentError", "downcase takes no arguments")
                return recv.lower()
            if selector == "length":
                if args:
                    _raise("ArgumentError", "length takes no arguments")
                return len(recv)
        elif t is list:
            if selector == "push":
                if len(args) != 1:
                    _raise("ArgumentError", "push takes exactly one argument")
                recv.append(args[0])
                return recv
            if selector == "size":
                if args:
                    _raise("ArgumentError", "size takes no arguments")
                return len(recv)
        _raise("NoMethodError",
               f"undefined method '{selector}' for {type_name(recv)}")

    # --- builtins ---

    def call_builtin(self, name, args):
        if name == "print" and self.py:
            self.transcript.append(
                " ".join(self.to_text(a) for a in args) + "\n")
            return None
        if name == "puts" and not self.py:
            if not args:
                self.transcript.append("\n")
            for a in args:
                self.transcript.append(self.to_text(a) + "\n")
            return None
        if name == "len":
            if len(args) != 1:
                _raise("TypeError", f"len() takes 1 arguments ({len(args)} given)")
            if type(args[0]) in (str, list):
                return len(args[0])
            _raise("TypeError",
                   f"object of type '{type_name(args[0])}' has no len()")
        if name == "range":
            if len(args) != 1:
                _raise("TypeError", f"range() takes 1 arguments ({len(args)} given)")
            if type(args[0]) is not int or isinstance(args[0], bool):
                _raise("TypeError", "range() requires an integer")
            return list(range(args[0]))
        if name == "str":
            if len(args) != 1:
                _raise("TypeError", f"str() takes 1 arguments ({len(args)} given)")
            return self.to_text(args[0])
        if name == "int":
            if len(args) != 1:
                _raise("TypeError", f"int() takes 1 arguments ({len(args)} given)")
            v = args[0]
            if type(v) is bool:
                return 1 if v else 0
            if type(v) is int:
                return v
            if type(v) is float:
                return int(v)
            if type(v) is str:
                try:
                    return int(v.strip())
                except ValueError:
                    _raise("ValueError", f"invalid literal for int(): {v!r}")
            _raise("TypeError", "int() requires a number or text")
        if name == "float":
            if len(args) != 1:
                _raise("TypeError", f"float() takes 1 arguments ({len(args)} given)")
            v = args[0]
            if type(v) is bool:
                return 1.0 if v else 0.0
            if type(v) in (int, float):
                return float(v)
            if type(v) is str:
                try:
                    return float(v.strip())
                except ValueError:
                    _raise("ValueError", f"could not convert text to float: {v!r}")
            _raise("TypeError", "float() requires a number or text")
        if name == "sleep":
            return None  # no scheduler here; result is what matters
        if name == "xeval":
            if len(args) not in (2, 3):
                self.arity_error("xeval", 2, len(args))
            sub = RefEvaluator(args[0])
            result = sub.run(args[1], {"it": args[2] if len(args) == 3 else None})
            self.transcript.extend(sub.transcript)
            if result.exception is not None:
                raise RefRaise(result.exception)
            return result.value
        raise AssertionError(f"unknown builtin {name}")
