"""Python-flavored front end: lexer, parser, compiler glue, and builtins.

The tokenizer doubles as the syntax-highlighting lexer, so it is total:
bad input becomes Error tokens (at most one per line) that the parser
reports as syntax errors.
"""

from __future__ import annotations

import textwrap

from . import syntax as ast
from .compiler import LanguageCompiler
from .errors import CompileError, GuestSyntaxError
from .kernel import (
    BoundMethod,
    BuiltinFunction,
    ClassValue,
    FunctionValue,
    GuestObject,
    IteratorValue,
    SleepRequest,
    guest_raise,
)
from .plugins import LanguagePlugin
from .tokens import Token
from .values import ExceptionValue, ForeignRef, ObjectRef, neutral_type_name

KEYWORDS = frozenset(
    "def class if elif else while for in try except finally raise return "
    "break continue pass and or not True False None as".split()
)

_TWO_CHAR_OPS = ("==", "!=", "<=", ">=")
_ONE_CHAR_OPS = "=<>+-*/%"
_PUNCT = "()[],:."


def tokenize(source):
    """Tokenize; INDENT/DEDENT synthesized from leading whitespace."""
    tokens = []
    indents = [0]
    lines = source.split("\n")
    for lineno, raw in enumerate(lines, 1):
        i = 0
        level = 0
        spaces = 0
        while i < len(raw) and raw[i] in " \t":
            if raw[i] == "\t":
                level += 1
                spaces = 0
            else:
                spaces += 1
                if spaces == 4:
                    level += 1
                    spaces = 0
            i += 1
        rest = raw[i:]
        if not rest:
            continue
        if rest.startswith("#"):
            tokens.append(Token("Comment", rest, lineno, i, len(raw)))
            tokens.append(Token("Newline", "", lineno, len(raw), len(raw)))
            continue
        if spaces:
            tokens.append(Token("Error", raw[:i], lineno, 0, i))
            continue
        if level > indents[-1]:
            while level > indents[-1]:
                indents.append(indents[-1] + 1)
                tokens.append(Token("Indent", "", lineno, i, i))
        elif level < indents[-1]:
            while indents and level < indents[-1]:
                indents.pop()
                tokens.append(Token("Dedent", "", lineno, i, i))
            if level != indents[-1]:
                tokens.append(Token("Error", raw[:i], lineno, 0, i))
                continue
        _lex_line(tokens, raw, lineno, i)
        tokens.append(Token("Newline", "", lineno, len(raw), len(raw)))
    while indents[-1] > 0:
        indents.pop()
        tokens.append(Token("Dedent", "", len(lines), 0, 0))
    return tokens


def _lex_line(tokens, raw, lineno, start):
    i = start
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            tokens.append(Token("Comment", raw[i:], lineno, i, n))
            return
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (raw[j].isalnum() or raw[j] == "_"):
                j += 1
            word = raw[i:j]
            kind = "Keyword" if word in KEYWORDS else "Identifier"
            tokens.append(Token(kind, word, lineno, i, j))
            i = j
            continue
        if ch.isdigit():
            j = i + 1
            while j < n and raw[j].isdigit():
                j += 1
            if j < n - 1 and raw[j] == "." and raw[j + 1].isdigit():
                j += 1
                while j < n and raw[j].isdigit():
                    j += 1
            tokens.append(Token("Number", raw[i:j], lineno, i, j))
            i = j
            continue
        if ch in "'\"":
            j = i + 1
            closed = False
            while j < n:
                if raw[j] == "\\" and j + 1 < n:
                    j += 2
                    continue
                if raw[j] == ch:
                    j += 1
                    closed = True
                    break
                j += 1
            if not closed:
                tokens.append(Token("Error", raw[i:], lineno, i, n))
                return
            tokens.append(Token("Text", raw[i:j], lineno, i, j))
            i = j
            continue
        two = raw[i:i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token("Operator", two, lineno, i, i + 2))
            i += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(Token("Operator", ch, lineno, i, i + 1))
            i += 1
            continue
        if ch in _PUNCT:
            tokens.append(Token("Punctuation", ch, lineno, i, i + 1))
            i += 1
            continue
        tokens.append(Token("Error", raw[i:], lineno, i, n))
        return


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", "'": "'", '"': '"', "0": "\0"}


def unquote(lexeme):
    body = lexeme[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


_BINOPS = {"+": "add", "-": "sub", "*": "mul", "/": "div", "%": "mod"}
_COMPOPS = ("==", "!=", "<", "<=", ">", ">=")


class Parser:
    """Recursive-descent parser over the token stream; first error wins."""

    def __init__(self, tokens, source):
        self.tokens = [t for t in tokens if t.kind != "Comment"]
        last_line = self.tokens[-1].line if self.tokens else 1
        self.tokens.append(Token("EOF", "", last_line, 0, 0))
        self.pos = 0
        self.src_lines = source.split("\n")
        self.last_content_line = 1

    def peek(self, ahead=0):
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self):
        tok = self.tokens[self.pos]
        if self.pos < len(self.tokens) - 1:
            self.pos += 1
        if tok.kind not in ("Indent", "Dedent", "EOF"):
            self.last_content_line = tok.line
        return tok

    def at(self, kind, lexeme=None):
        tok = self.peek()
        return tok.kind == kind and (lexeme is None or tok.lexeme == lexeme)

    def accept(self, kind, lexeme=None):
        if self.at(kind, lexeme):
            return self.advance()
        return None

    def expect(self, kind, lexeme=None, what=None):
        tok = self.peek()
        if tok.kind == "Error":
            self.error(tok, "invalid syntax")
        if not self.at(kind, lexeme):
            self.error(tok, f"expected {what or lexeme or kind}")
        return self.advance()

    def error(self, tok, message):
        raise GuestSyntaxError(tok.line, tok.start + 1, message)

    def skip_newlines(self):
        while self.accept("Newline"):
            pass

    # --- entry ---

    def parse_module(self):
        body = []
        self.skip_newlines()
        while not self.at("EOF"):
            if self.peek().kind == "Error":
                self.error(self.peek(), "invalid syntax")
            body.append(self.statement())
            self.skip_newlines()
        return ast.Module(body=body, line=1)

    # --- statements ---

    def statement(self):
        tok = self.peek()
        if tok.kind == "Error":
            self.error(tok, "invalid syntax")
        if tok.kind == "Keyword":
            word = tok.lexeme
            if word == "if":
                return self.if_stmt()
            if word == "while":
                return self.while_stmt()
            if word == "for":
                return self.for_stmt()
            if word == "def":
                return self.def_stmt()
            if word == "class":
                return self.class_stmt()
            if word == "try":
                return self.try_stmt()
            if word == "return":
                self.advance()
                value = None
                if not self.at("Newline"):
                    value = self.expression()
                self.end_simple()
                return ast.Return(value=value, line=tok.line)
            if word == "raise":
                return self.raise_stmt()
            if word == "break":
                self.advance()
                self.end_simple()
                return ast.Break(line=tok.line)
            if word == "continue":
                self.advance()
                self.end_simple()
                return ast.Continue(line=tok.line)
            if word == "pass":
                self.advance()
                self.end_simple()
                return ast.Pass(line=tok.line)
        expr = self.expression()
        if self.accept("Operator", "="):
            if not isinstance(expr, (ast.Name, ast.Attribute, ast.Index)):
                self.error(tok, "cannot assign to this expression")
            value = self.expression()
            self.end_simple()
            return ast.Assign(target=expr, value=value, line=tok.line)
        self.end_simple()
        return ast.ExprStmt(value=expr, line=tok.line)

    def end_simple(self):
        if self.at("EOF") or self.at("Dedent"):
            return
        self.expect("Newline", what="end of statement")

    def suite(self):
        self.expect("Punctuation", ":")
        self.expect("Newline", what="a newline after ':'")
        self.expect("Indent", what="an indented block")
        body = []
        self.skip_newlines()
        while not self.at("Dedent") and not self.at("EOF"):
            body.append(self.statement())
            self.skip_newlines()
        self.expect("Dedent", what="end of block")
        return body

    def if_stmt(self):
        tok = self.expect("Keyword", "if")
        cond = self.expression()
        then = self.suite()
        orelse = []
        if self.at("Keyword", "elif"):
            orelse = [self.elif_chain()]
        elif self.accept("Keyword", "else"):
            orelse = self.suite()
        return ast.If(cond=cond, then=then, orelse=orelse, line=tok.line)

    def elif_chain(self):
        tok = self.expect("Keyword", "elif")
        cond = self.expression()
        then = self.suite()
        orelse = []
        if self.at("Keyword", "elif"):
            orelse = [self.elif_chain()]
        elif self.accept("Keyword", "else"):
            orelse = self.suite()
        return ast.If(cond=cond, then=then, orelse=orelse, line=tok.line)

    def while_stmt(self):
        tok = self.expect("Keyword", "while")
        cond = self.expression()
        body = self.suite()
        return ast.While(cond=cond, body=body, line=tok.line)

    def for_stmt(self):
        tok = self.expect("Keyword", "for")
        target = self.expect("Identifier", what="a loop variable").lexeme
        self.expect("Keyword", "in")
        iterable = self.expression()
        body = self.suite()
        return ast.For(target=target, iterable=iterable, body=body, line=tok.line)

    def def_stmt(self):
        tok = self.expect("Keyword", "def")
        name = self.expect("Identifier", what="a function name").lexeme
        self.expect("Punctuation", "(")
        params = []
        if not self.at("Punctuation", ")"):
            params.append(self.expect("Identifier", what="a parameter name").lexeme)
            while self.accept("Punctuation", ","):
                params.append(self.expect("Identifier", what="a parameter name").lexeme)
        self.expect("Punctuation", ")")
        body = self.suite()
        end = self.last_content_line
        source = textwrap.dedent("\n".join(self.src_lines[tok.line - 1:end]))
        return ast.FuncDef(name=name, params=params, body=body,
                           implicit_self=False, source=source, line=tok.line)

    def class_stmt(self):
        tok = self.expect("Keyword", "class")
        name = self.expect("Identifier", what="a class name").lexeme
        self.expect("Punctuation", ":")
        self.expect("Newline")
        self.expect("Indent", what="an indented class body")
        methods = []
        assigns = []
        self.skip_newlines()
        while not self.at("Dedent") and not self.at("EOF"):
            if self.at("Keyword", "def"):
                methods.append(self.def_stmt())
            elif self.accept("Keyword", "pass"):
                self.end_simple()
            elif self.at("Identifier"):
                aname = self.advance().lexeme
                self.expect("Operator", "=", what="'=' in class-level assignment")
                value = self.atom()
                if not isinstance(value, ast.Const):
                    self.error(self.peek(), "class-level assignments must be literals")
                self.end_simple()
                assigns.append((aname, value))
            else:
                self.error(self.peek(), "expected a method or class-level assignment")
            self.skip_newlines()
        self.expect("Dedent")
        for m in methods:
            m.implicit_self = False
        return ast.ClassDef(name=name, methods=methods, assigns=assigns, line=tok.line)

    def try_stmt(self):
        tok = self.expect("Keyword", "try")
        body = self.suite()
        clauses = []
        while self.at("Keyword", "except"):
            etok = self.advance()
            class_name = None
            bind_name = None
            if self.at("Identifier"):
                class_name = self.advance().lexeme
                if self.accept("Keyword", "as"):
                    bind_name = self.expect("Identifier", what="a binding name").lexeme
            clauses.append(ast.TryClause(class_name=class_name, bind_name=bind_name,
                                         body=self.suite(), line=etok.line))
        finally_body = None
        if self.accept("Keyword", "finally"):
            finally_body = self.suite()
        if not clauses and finally_body is None:
            self.error(tok, "try needs an except or finally block")
        bare = [i for i, c in enumerate(clauses) if c.class_name is None]
        if len(bare) > 1 or (bare and bare[0] != len(clauses) - 1):
            self.error(tok, "bare except must be the single last clause")
        return ast.Try(body=body, clauses=clauses, finally_body=finally_body,
                       line=tok.line)

    def raise_stmt(self):
        tok = self.expect("Keyword", "raise")
        expr = self.expression()
        self.end_simple()
        if isinstance(expr, ast.Call) and isinstance(expr.func, ast.Name) \
                and expr.func.id[:1].isupper():
            if len(expr.args) > 1:
                self.error(tok, "raise takes at most one message argument")
            message = expr.args[0] if expr.args else None
            return ast.Raise(class_name=expr.func.id, message=message, line=tok.line)
        if isinstance(expr, ast.Name) and expr.id[:1].isupper():
            return ast.Raise(class_name=expr.id, line=tok.line)
        return ast.Raise(value=expr, line=tok.line)

    # --- expressions ---

    def expression(self):
        return self.or_expr()

    def or_expr(self):
        left = self.and_expr()
        while self.at("Keyword", "or"):
            tok = self.advance()
            left = ast.BoolOp(op="or", left=left, right=self.and_expr(), line=tok.line)
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.at("Keyword", "and"):
            tok = self.advance()
            left = ast.BoolOp(op="and", left=left, right=self.not_expr(), line=tok.line)
        return left

    def not_expr(self):
        if self.at("Keyword", "not"):
            tok = self.advance()
            return ast.UnaryOp(op="not", operand=self.not_expr(), line=tok.line)
        return self.comparison()

    def comparison(self):
        left = self.arith()
        if self.peek().kind == "Operator" and self.peek().lexeme in _COMPOPS:
            tok = self.advance()
            return ast.Compare(op=tok.lexeme, left=left, right=self.arith(),
                               line=tok.line)
        return left

    def arith(self):
        left = self.term()
        while self.peek().kind == "Operator" and self.peek().lexeme in "+-":
            tok = self.advance()
            left = ast.BinOp(op=_BINOPS[tok.lexeme], left=left, right=self.term(),
                             line=tok.line)
        return left

    def term(self):
        left = self.factor()
        while self.peek().kind == "Operator" and self.peek().lexeme in ("*", "/", "%"):
            tok = self.advance()
            left = ast.BinOp(op=_BINOPS[tok.lexeme], left=left, right=self.factor(),
                             line=tok.line)
        return left

    def factor(self):
        if self.at("Operator", "-"):
            tok = self.advance()
            return ast.UnaryOp(op="neg", operand=self.factor(), line=tok.line)
        return self.postfix()

    def postfix(self):
        node = self.atom()
        while True:
            if self.at("Punctuation", "("):
                tok = self.advance()
                args = self.arg_list()
                node = ast.Call(func=node, args=args, line=tok.line)
            elif self.at("Punctuation", "."):
                tok = self.advance()
                name = self.expect("Identifier", what="an attribute name").lexeme
                if self.at("Punctuation", "("):
                    self.advance()
                    args = self.arg_list()
                    node = ast.MethodCall(obj=node, name=name, args=args,
                                          line=tok.line)
                else:
                    node = ast.Attribute(obj=node, name=name, missing_nil=False,
                                         line=tok.line)
            elif self.at("Punctuation", "["):
                tok = self.advance()
                index = self.expression()
                self.expect("Punctuation", "]")
                node = ast.Index(obj=node, index=index, line=tok.line)
            else:
                return node

    def arg_list(self):
        args = []
        if not self.at("Punctuation", ")"):
            args.append(self.expression())
            while self.accept("Punctuation", ","):
                args.append(self.expression())
        self.expect("Punctuation", ")")
        return args

    def atom(self):
        tok = self.peek()
        if tok.kind == "Error":
            self.error(tok, "invalid syntax")
        if tok.kind == "Number":
            self.advance()
            value = float(tok.lexeme) if "." in tok.lexeme else int(tok.lexeme)
            return ast.Const(value=value, line=tok.line)
        if tok.kind == "Text":
            self.advance()
            return ast.Const(value=unquote(tok.lexeme), line=tok.line)
        if tok.kind == "Keyword" and tok.lexeme in ("True", "False", "None"):
            self.advance()
            value = {"True": True, "False": False, "None": None}[tok.lexeme]
            return ast.Const(value=value, line=tok.line)
        if tok.kind == "Identifier":
            self.advance()
            return ast.Name(id=tok.lexeme, line=tok.line)
        if tok.kind == "Punctuation" and tok.lexeme == "(":
            self.advance()
            node = self.expression()
            self.expect("Punctuation", ")")
            return node
        if tok.kind == "Punctuation" and tok.lexeme == "[":
            self.advance()
            elements = []
            if not self.at("Punctuation", "]"):
                elements.append(self.expression())
                while self.accept("Punctuation", ","):
                    elements.append(self.expression())
            self.expect("Punctuation", "]")
            return ast.ListLit(elements=elements, line=tok.line)
        self.error(tok, "expected an expression")


def parse(source):
    return Parser(tokenize(source), source).parse_module()


# --- display and coercion rules ---


def display(value, ctx):
    if value is None:
        return "None"
    t = type(value)
    if t is bool:
        return "True" if value else "False"
    if t is int:
        return str(value)
    if t is float:
        return repr(value)
    if t is str:
        return _quote(value)
    if t is list:
        return "[" + ", ".join(display(v, ctx) for v in value) + "]"
    if t is ObjectRef:
        entry = ctx.deref(value)
        if isinstance(entry, GuestObject):
            return f"<{entry.cls.name} object>"
        return display(entry.value, ctx)
    if t is ForeignRef:
        return f"<foreign {value.language} {_ref_class_name(ctx, value)}>"
    if t is ExceptionValue:
        return f"{value.class_name}: {value.message}"
    if t is FunctionValue:
        return f"<function {value.code.name}>"
    if t is ClassValue:
        return f"<class {value.name}>"
    if t is BoundMethod:
        return f"<bound method {value.cls.name}.{value.code.name}>"
    if t is BuiltinFunction:
        return f"<builtin {value.name}>"
    if t is IteratorValue:
        return "<iterator>"
    return repr(value)


def _ref_class_name(ctx, ref):
    entry = ctx.deref(ref)
    if isinstance(entry, GuestObject):
        return entry.cls.name
    return neutral_type_name(entry.value)


def _quote(text):
    out = ["'"]
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == "'":
            out.append("\\'")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        else:
            out.append(ch)
    out.append("'")
    return "".join(out)


def to_text(value, ctx):
    if type(value) is str:
        return value
    if type(value) is ExceptionValue:
        return value.message
    return display(value, ctx)


def truthy(value):
    if value is None or value is False:
        return False
    t = type(value)
    if t is bool:
        return value
    if t in (int, float):
        return value != 0
    if t in (str, list):
        return len(value) > 0
    return True


# --- builtins ---


def _need(args, n, name):
    if len(args) != n:
        guest_raise("TypeError", f"{name}() takes {n} arguments ({len(args)} given)")


def _bi_print(task, frame, args):
    text = " ".join(to_text(a, task.ctx) for a in args)
    task.transcript.append(text + "\n")
    return None


def _bi_len(task, frame, args):
    _need(args, 1, "len")
    v = args[0]
    if type(v) in (str, list):
        return len(v)
    guest_raise("TypeError", f"object of type '{neutral_type_name(v)}' has no len()")


def _bi_range(task, frame, args):
    _need(args, 1, "range")
    n = args[0]
    if type(n) is not int or isinstance(n, bool):
        guest_raise("TypeError", "range() requires an integer")
    return list(range(n))


def _bi_str(task, frame, args):
    _need(args, 1, "str")
    return to_text(args[0], task.ctx)


def _bi_int(task, frame, args):
    _need(args, 1, "int")
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
            guest_raise("ValueError", f"invalid literal for int(): {v!r}")
    guest_raise("TypeError", "int() requires a number or text")


def _bi_float(task, frame, args):
    _need(args, 1, "float")
    v = args[0]
    if type(v) is bool:
        return 1.0 if v else 0.0
    if type(v) in (int, float):
        return float(v)
    if type(v) is str:
        try:
            return float(v.strip())
        except ValueError:
            guest_raise("ValueError", f"could not convert text to float: {v!r}")
    guest_raise("TypeError", "float() requires a number or text")


def _bi_sleep(task, frame, args):
    _need(args, 1, "sleep")
    v = args[0]
    if type(v) not in (int, float) or isinstance(v, bool):
        guest_raise("TypeError", "sleep() requires a number of seconds")
    return SleepRequest(max(0.0, float(v)))


def builtin_method(ctx, recv, selector, args):
    t = type(recv)
    if t is str:
        if selector == "split":
            if len(args) != 1 or type(args[0]) is not str:
                guest_raise("TypeError", "split() takes one text separator")
            return recv.split(args[0])
        if selector == "lower":
            if args:
                guest_raise("TypeError", "lower() takes no arguments")
            return recv.lower()
        if selector == "strip":
            if args:
                guest_raise("TypeError", "strip() takes no arguments")
            return recv.strip()
    elif t is list:
        if selector == "append":
            if len(args) != 1:
                guest_raise("TypeError", "append() takes exactly one argument")
            recv.append(args[0])
            return None
        if selector == "pop":
            if args:
                guest_raise("TypeError", "pop() takes no arguments")
            if not recv:
                guest_raise("IndexError", "pop from empty list")
            return recv.pop()
    guest_raise("AttributeError",
                f"'{neutral_type_name(recv)}' object has no attribute '{selector}'")


class MiniPyPlugin(LanguagePlugin):
    id = "minipy"
    display_name = "MiniPy"
    file_extension = ".mpy"
    implicit_self_lookup = False

    def __init__(self):
        from .bridge import xeval_builtin

        self._compiler = LanguageCompiler("minipy", "<string>", False)
        self.builtins = {
            "print": _bi_print,
            "len": _bi_len,
            "range": _bi_range,
            "str": _bi_str,
            "int": _bi_int,
            "float": _bi_float,
            "sleep": _bi_sleep,
            "xeval": xeval_builtin,
        }

    # compilation

    def tokenize(self, source):
        return tokenize(source)

    def compile_module(self, source, name=None):
        return self._compiler.compile_module(parse(source), source, name=name)

    def compile_eval(self, source, in_method=False):
        return self._compiler.compile_eval(parse(source), source, in_method)

    def compile_def_node(self, node, kind):
        return self._compiler.compile_def(node, kind)

    def recompile(self, code, new_source):
        if code.kind == "module":
            return self.compile_module(new_source, name=code.name)
        module = parse(new_source)
        defs = [s for s in module.body if isinstance(s, ast.FuncDef)]
        if len(defs) != 1 or len(module.body) != 1:
            raise CompileError(1, 1, "expected a single function definition")
        return self._compiler.compile_def(defs[0], code.kind)

    # semantics hooks

    def truthy(self, value):
        return truthy(value)

    def display(self, value, ctx):
        return display(value, ctx)

    def to_text(self, value, ctx):
        return to_text(value, ctx)

    def builtin_method(self, ctx, recv, selector, args):
        return builtin_method(ctx, recv, selector, args)

    def type_name(self, value):
        return neutral_type_name(value)

    # error wording

    def exc_name_error(self, name):
        return ExceptionValue("NameError", f"name '{name}' is not defined")

    def exc_no_method(self, selector, class_name):
        return ExceptionValue(
            "AttributeError", f"'{class_name}' object has no attribute '{selector}'")

    def exc_no_attribute(self, name, class_name):
        return ExceptionValue(
            "AttributeError", f"'{class_name}' object has no attribute '{name}'")

    def exc_arity(self, name, expected, got):
        return ExceptionValue(
            "TypeError", f"{name}() takes {expected} arguments ({got} given)")

    def exc_bad_operand(self, op, left, right):
        names = neutral_type_name(left)
        if right is not None:
            names += f" and {neutral_type_name(right)}"
        return ExceptionValue("TypeError", f"unsupported operand type(s) for {op}: {names}")

    def exc_bad_index_type(self, obj, idx):
        return ExceptionValue("TypeError", "indices must be integers")

    def exc_not_callable(self, value, ctx):
        return ExceptionValue(
            "TypeError", f"'{neutral_type_name(value)}' object is not callable")

    def exc_bad_raise(self, value, ctx):
        return ExceptionValue("TypeError", "exceptions must be exception values")
