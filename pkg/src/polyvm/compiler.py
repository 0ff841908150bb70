"""Shared compiler from the common AST to the kernel instruction set.

Both languages emit the exact same opcodes; surface differences (float vs
integer division, implicit method results, module naming) arrive here as
parser output or as the few knobs on LanguageCompiler.
"""

from __future__ import annotations

from .errors import CompileError
from .kernel import ClassTemplate, CodeUnit, Ins
from . import syntax as ast


class _Loop:
    __slots__ = ("head", "breaks", "handler_depth", "is_for")

    def __init__(self, head, handler_depth, is_for):
        self.head = head
        self.breaks = []
        self.handler_depth = handler_depth
        self.is_for = is_for


class _Builder:
    def __init__(self, language, scope, method_context, implicit_result):
        self.language = language
        self.scope = scope  # module | function | method
        self.method_context = method_context
        self.implicit_result = implicit_result
        self.ins = []
        self.lines = []
        self.consts = []
        self.loops = []
        self.handler_depth = 0
        self.in_finally = False
        self.cur_line = 1
        self._temps = 0

    def emit(self, op, a=None, b=None, c=None):
        self.ins.append(Ins(op, a, b, c))
        self.lines.append(self.cur_line)
        return len(self.ins) - 1

    def here(self):
        return len(self.ins)

    def const(self, value):
        self.consts.append(value)
        return len(self.consts) - 1

    def temp(self):
        self._temps += 1
        return f"$t{self._temps}"

    def err(self, node, message):
        raise CompileError(node.line or self.cur_line, 1, message)


class LanguageCompiler:
    """AST-to-bytecode compiler configured for one surface language."""

    def __init__(self, language, module_name, defs_implicit_result):
        self.language = language
        self.module_name = module_name
        self.defs_implicit_result = defs_implicit_result

    # --- entry points ---

    def compile_module(self, module, source, name=None):
        b = _Builder(self.language, "module", method_context=False,
                     implicit_result=True)
        self._emit_body_with_result(b, module.body)
        return self._finish(b, name or self.module_name, [], source, "module",
                            implicit_self=False)

    def compile_eval(self, module, source, in_method):
        b = _Builder(self.language, "module", method_context=in_method,
                     implicit_result=True)
        self._emit_body_with_result(b, module.body)
        return self._finish(b, "<eval>", [], source, "module", implicit_self=False)

    def compile_def(self, node, kind):
        implicit_result = self.defs_implicit_result
        b = _Builder(self.language, kind, method_context=(kind == "method"),
                     implicit_result=implicit_result)
        if implicit_result:
            self._emit_body_with_result(b, node.body)
        else:
            for stmt in node.body:
                self.stmt(b, stmt)
            b.emit("PUSH_CONST", b.const(None))
            b.emit("RETURN")
        return self._finish(b, node.name, node.params, node.source, kind,
                            implicit_self=node.implicit_self)

    def _emit_body_with_result(self, b, body):
        b.emit("PUSH_CONST", b.const(None))
        b.emit("STORE", "$result")
        for stmt in body:
            self.stmt(b, stmt)
        b.emit("LOAD", "$result")
        b.emit("RETURN")

    def _finish(self, b, name, params, source, kind, implicit_self):
        return CodeUnit(name=name, params=params, instructions=b.ins,
                        constants=b.consts, line_table=b.lines, source=source,
                        language=self.language, kind=kind,
                        implicit_self=implicit_self)

    # --- statements ---

    def stmt(self, b, node):
        if node.line:
            b.cur_line = node.line
        method = getattr(self, "_stmt_" + type(node).__name__, None)
        if method is None:
            b.err(node, f"cannot compile {type(node).__name__}")
        method(b, node)

    def _stmt_ExprStmt(self, b, node):
        self.expr(b, node.value)
        if b.implicit_result:
            b.emit("STORE", "$result")
        else:
            b.emit("POP")

    def _stmt_Assign(self, b, node):
        target = node.target
        if isinstance(target, ast.Name):
            self.expr(b, node.value)
            b.emit("STORE", target.id)
        elif isinstance(target, ast.Attribute):
            self._check_ivar(b, target)
            self.expr(b, target.obj)
            self.expr(b, node.value)
            b.emit("STORE_SLOT", target.name)
        elif isinstance(target, ast.Index):
            self.expr(b, target.obj)
            self.expr(b, target.index)
            self.expr(b, node.value)
            b.emit("SET_INDEX")
        else:
            b.err(node, "invalid assignment target")

    def _stmt_If(self, b, node):
        self.expr(b, node.cond)
        jfalse = b.emit("JUMP_IF_FALSE", 0)
        for stmt in node.then:
            self.stmt(b, stmt)
        if node.orelse:
            jend = b.emit("JUMP", 0)
            b.ins[jfalse].a = b.here()
            for stmt in node.orelse:
                self.stmt(b, stmt)
            b.ins[jend].a = b.here()
        else:
            b.ins[jfalse].a = b.here()

    def _stmt_While(self, b, node):
        head = b.here()
        self.expr(b, node.cond)
        jend = b.emit("JUMP_IF_FALSE", 0)
        loop = _Loop(head, b.handler_depth, is_for=False)
        b.loops.append(loop)
        for stmt in node.body:
            self.stmt(b, stmt)
        b.loops.pop()
        b.emit("JUMP", head)
        end = b.here()
        b.ins[jend].a = end
        for j in loop.breaks:
            b.ins[j].a = end

    def _stmt_For(self, b, node):
        self.expr(b, node.iterable)
        b.emit("ITER_NEW")
        head = b.here()
        jexh = b.emit("ITER_NEXT", 0)
        b.emit("STORE", node.target)
        loop = _Loop(head, b.handler_depth, is_for=True)
        b.loops.append(loop)
        for stmt in node.body:
            self.stmt(b, stmt)
        b.loops.pop()
        b.emit("JUMP", head)
        end = b.here()
        b.ins[jexh].a = end
        for j in loop.breaks:
            b.ins[j].a = end

    def _stmt_Break(self, b, node):
        loop = self._loop_for_jump(b, node, "break")
        for _ in range(b.handler_depth - loop.handler_depth):
            b.emit("POP_HANDLER")
        if loop.is_for:
            b.emit("POP")  # the live iterator
        loop.breaks.append(b.emit("JUMP", 0))

    def _stmt_Continue(self, b, node):
        loop = self._loop_for_jump(b, node, "continue")
        for _ in range(b.handler_depth - loop.handler_depth):
            b.emit("POP_HANDLER")
        b.emit("JUMP", loop.head)

    def _loop_for_jump(self, b, node, word):
        if b.in_finally:
            b.err(node, f"{word} out of a finally/ensure body is not supported")
        if not b.loops:
            b.err(node, f"{word} outside loop")
        return b.loops[-1]

    def _stmt_Return(self, b, node):
        if b.scope == "module":
            b.err(node, "return outside function")
        if b.in_finally:
            b.err(node, "return out of a finally/ensure body is not supported")
        if node.value is None:
            b.emit("PUSH_CONST", b.const(None))
        else:
            self.expr(b, node.value)
        b.emit("RETURN")

    def _stmt_Pass(self, b, node):
        pass

    def _stmt_Raise(self, b, node):
        if node.value is not None:
            self.expr(b, node.value)
            b.emit("RAISE")
            return
        if node.message is None:
            b.emit("PUSH_CONST", b.const(""))
        else:
            self.expr(b, node.message)
        b.emit("RAISE", node.class_name)

    def _stmt_FuncDef(self, b, node):
        code = self.compile_def(node, "function")
        b.emit("MAKE_FUNCTION", b.const(code))
        b.emit("STORE", node.name)

    def _stmt_ClassDef(self, b, node):
        methods = {}
        for m in node.methods:
            methods[m.name] = self.compile_def(m, "method")
        assigns = []
        for name, value_node in node.assigns:
            if not isinstance(value_node, ast.Const):
                b.err(node, "class-level assignments must be literals")
            assigns.append((name, value_node.value))
        tpl = ClassTemplate(node.name, methods, assigns)
        b.emit("MAKE_CLASS", b.const(tpl))
        b.emit("STORE", node.name)

    def _stmt_Try(self, b, node):
        have_fin = node.finally_body is not None
        fin_setup = None
        if have_fin:
            fin_setup = b.emit("SETUP_HANDLER", 0, None, "ensure")
            b.handler_depth += 1
        clause_setups = []
        for clause in reversed(node.clauses):
            idx = b.emit("SETUP_HANDLER", 0, clause.class_name, "rescue")
            clause_setups.append(idx)
            b.handler_depth += 1
        clause_setups.reverse()  # align with node.clauses order
        for stmt in node.body:
            self.stmt(b, stmt)
        for _ in node.clauses:
            b.emit("POP_HANDLER")
            b.handler_depth -= 1
        done_jumps = [b.emit("JUMP", 0)]
        n = len(node.clauses)
        for i, clause in enumerate(node.clauses):
            if clause.line:
                b.cur_line = clause.line
            b.ins[clause_setups[i]].a = b.here()
            # the dispatcher popped this block and every sibling above it;
            # drop the ones still below
            for _ in range(n - 1 - i):
                b.emit("POP_HANDLER")
            if clause.bind_name:
                b.emit("STORE", clause.bind_name)
            else:
                b.emit("POP")
            for stmt in clause.body:
                self.stmt(b, stmt)
            done_jumps.append(b.emit("JUMP", 0))
        done = b.here()
        for j in done_jumps:
            b.ins[j].a = done
        if have_fin:
            b.emit("POP_HANDLER")
            b.handler_depth -= 1
            was = b.in_finally
            b.in_finally = True
            for stmt in node.finally_body:
                self.stmt(b, stmt)
            jend = b.emit("JUMP", 0)
            if node.finally_body and node.finally_body[0].line:
                b.cur_line = node.finally_body[0].line
            b.ins[fin_setup].a = b.here()
            exc_slot = b.temp()
            b.emit("STORE", exc_slot)
            for stmt in node.finally_body:
                self.stmt(b, stmt)
            b.in_finally = was
            b.emit("LOAD", exc_slot)
            b.emit("RAISE")
            b.ins[jend].a = b.here()

    # --- expressions ---

    def expr(self, b, node):
        if node.line:
            b.cur_line = node.line
        method = getattr(self, "_expr_" + type(node).__name__, None)
        if method is None:
            b.err(node, f"cannot compile {type(node).__name__}")
        method(b, node)

    def _expr_Const(self, b, node):
        b.emit("PUSH_CONST", b.const(node.value))

    def _expr_Name(self, b, node):
        b.emit("LOAD", node.id)

    def _expr_Attribute(self, b, node):
        self._check_ivar(b, node)
        self.expr(b, node.obj)
        b.emit("LOAD_SLOT", node.name, node.missing_nil)

    def _check_ivar(self, b, node):
        if node.missing_nil and not b.method_context:
            b.err(node, f"instance variable {node.name} outside of a method")

    def _expr_Index(self, b, node):
        self.expr(b, node.obj)
        self.expr(b, node.index)
        b.emit("INDEX")

    def _expr_Call(self, b, node):
        self.expr(b, node.func)
        for a in node.args:
            self.expr(b, a)
        b.emit("CALL", len(node.args))

    def _expr_MethodCall(self, b, node):
        self.expr(b, node.obj)
        for a in node.args:
            self.expr(b, a)
        b.emit("INVOKE", node.name, len(node.args))

    def _expr_New(self, b, node):
        self.expr(b, node.cls)
        for a in node.args:
            self.expr(b, a)
        b.emit("NEW_INSTANCE", len(node.args))

    def _expr_BinOp(self, b, node):
        self.expr(b, node.left)
        self.expr(b, node.right)
        b.emit("BINARY", node.op)

    def _expr_UnaryOp(self, b, node):
        self.expr(b, node.operand)
        b.emit("UNARY", node.op)

    def _expr_Compare(self, b, node):
        self.expr(b, node.left)
        self.expr(b, node.right)
        b.emit("COMPARE", node.op)

    def _expr_BoolOp(self, b, node):
        self.expr(b, node.left)
        b.emit("DUP")
        if node.op == "and":
            jshort = b.emit("JUMP_IF_FALSE", 0)
            b.emit("POP")
            self.expr(b, node.right)
            b.ins[jshort].a = b.here()
        else:
            jeval = b.emit("JUMP_IF_FALSE", 0)
            jend = b.emit("JUMP", 0)
            b.ins[jeval].a = b.here()
            b.emit("POP")
            self.expr(b, node.right)
            b.ins[jend].a = b.here()

    def _expr_ListLit(self, b, node):
        for e in node.elements:
            self.expr(b, e)
        b.emit("BUILD_LIST", len(node.elements))
