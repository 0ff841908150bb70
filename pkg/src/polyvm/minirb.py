"""Ruby-flavored front end: lexer, parser, compiler glue, and builtins.

Blocks are 'end'-delimited; @ivars live on the receiver; integer division
stays integral (a deliberate, visible difference from the Python-flavored
guest). Everything compiles to the same shared instruction set.
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
    "def end class if elsif else while begin rescue ensure raise return "
    "break next nil true false then do".split()
)

_TWO_CHAR_OPS = ("==", "!=", "<=", ">=", "&&", "||", "=>")
_ONE_CHAR_OPS = "=<>+-*/%!"
_PUNCT = "()[],."


def tokenize(source):
    tokens = []
    for lineno, raw in enumerate(source.split("\n"), 1):
        had_content = _lex_line(tokens, raw, lineno)
        if had_content:
            tokens.append(Token("Newline", "", lineno, len(raw), len(raw)))
    return tokens


def _lex_line(tokens, raw, lineno):
    i = 0
    n = len(raw)
    had_content = False
    while i < n:
        ch = raw[i]
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            tokens.append(Token("Comment", raw[i:], lineno, i, n))
            had_content = True
            break
        had_content = True
        if ch == "@":
            j = i + 1
            while j < n and (raw[j].isalnum() or raw[j] == "_"):
                j += 1
            if j == i + 1:
                tokens.append(Token("Error", raw[i:], lineno, i, n))
                break
            tokens.append(Token("IVar", raw[i:j], lineno, i, j))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (raw[j].isalnum() or raw[j] == "_"):
                j += 1
            word = raw[i:j]
            if word in KEYWORDS:
                kind = "Keyword"
            elif word[0].isupper():
                kind = "Constant"
            else:
                kind = "Identifier"
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
                break
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
        break
    return had_content


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


_BINOPS = {"+": "add", "-": "sub", "*": "mul", "/": "idiv", "%": "mod"}
_COMPOPS = ("==", "!=", "<", "<=", ">", ">=")

# tokens that may begin an argument of a parenthesis-free command call
_COMMAND_STARTS = ("Number", "Text", "IVar", "Constant", "Identifier")

_BLOCK_ENDERS = ("end", "rescue", "ensure", "elsif", "else")


class Parser:
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
        if tok.kind != "EOF":
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

    def at_block_end(self):
        tok = self.peek()
        return tok.kind == "EOF" or (
            tok.kind == "Keyword" and tok.lexeme in _BLOCK_ENDERS)

    # --- entry ---

    def parse_program(self):
        body = self.statements(top=True)
        if not self.at("EOF"):
            self.error(self.peek(), "unexpected " + (self.peek().lexeme or "token"))
        return ast.Module(body=body, line=1)

    def statements(self, top=False):
        body = []
        self.skip_newlines()
        while not self.at_block_end():
            if self.peek().kind == "Error":
                self.error(self.peek(), "invalid syntax")
            body.append(self.statement())
            self.skip_newlines()
        if top and self.at("Keyword"):
            self.error(self.peek(), f"unexpected '{self.peek().lexeme}'")
        return body

    # --- statements ---

    def statement(self):
        tok = self.peek()
        if tok.kind == "Keyword":
            word = tok.lexeme
            if word == "if":
                return self.if_stmt()
            if word == "while":
                return self.while_stmt()
            if word == "begin":
                return self.begin_stmt()
            if word == "def":
                return self.def_stmt()
            if word == "class":
                return self.class_stmt()
            if word == "raise":
                return self.raise_stmt()
            if word == "return":
                self.advance()
                value = None
                if not self.at("Newline") and not self.at_block_end():
                    value = self.expression()
                self.end_simple()
                return ast.Return(value=value, line=tok.line)
            if word == "break":
                self.advance()
                self.end_simple()
                return ast.Break(line=tok.line)
            if word == "next":
                self.advance()
                self.end_simple()
                return ast.Continue(line=tok.line)
        if tok.kind == "Identifier" and self.peek(1).kind in _COMMAND_STARTS:
            return self.command_call(tok)
        expr = self.expression()
        if self.accept("Operator", "="):
            if not isinstance(expr, (ast.Name, ast.Attribute, ast.Index)):
                self.error(tok, "cannot assign to this expression")
            value = self.expression()
            self.end_simple()
            return ast.Assign(target=expr, value=value, line=tok.line)
        self.end_simple()
        return ast.ExprStmt(value=expr, line=tok.line)

    def command_call(self, tok):
        name = self.advance().lexeme
        args = [self.expression()]
        while self.accept("Punctuation", ","):
            args.append(self.expression())
        self.end_simple()
        call = ast.Call(func=ast.Name(id=name, line=tok.line), args=args,
                        line=tok.line)
        return ast.ExprStmt(value=call, line=tok.line)

    def end_simple(self):
        if self.at("EOF") or self.at_block_end():
            return
        self.expect("Newline", what="end of statement")

    def if_stmt(self, inner=False):
        tok = self.advance()  # if | elsif
        cond = self.expression()
        self.accept("Keyword", "then")
        self.expect("Newline", what="a newline after the condition")
        then = self.statements()
        orelse = []
        if self.at("Keyword", "elsif"):
            orelse = [self.if_stmt(inner=True)]
        elif self.accept("Keyword", "else"):
            orelse = self.statements()
        if not inner:
            self.expect("Keyword", "end")
        return ast.If(cond=cond, then=then, orelse=orelse, line=tok.line)

    def while_stmt(self):
        tok = self.expect("Keyword", "while")
        cond = self.expression()
        self.accept("Keyword", "do")
        self.expect("Newline", what="a newline after the condition")
        body = self.statements()
        self.expect("Keyword", "end")
        return ast.While(cond=cond, body=body, line=tok.line)

    def begin_stmt(self):
        tok = self.expect("Keyword", "begin")
        self.expect("Newline", what="a newline after begin")
        body = self.statements()
        clauses = []
        while self.at("Keyword", "rescue"):
            rtok = self.advance()
            class_name = None
            bind_name = None
            if self.at("Constant"):
                class_name = self.advance().lexeme
            if self.accept("Operator", "=>"):
                bind_name = self.expect("Identifier", what="a binding name").lexeme
            self.expect("Newline", what="a newline after the rescue clause")
            clauses.append(ast.TryClause(class_name=class_name, bind_name=bind_name,
                                         body=self.statements(), line=rtok.line))
        finally_body = None
        if self.accept("Keyword", "ensure"):
            self.expect("Newline", what="a newline after ensure")
            finally_body = self.statements()
        self.expect("Keyword", "end")
        if not clauses and finally_body is None:
            self.error(tok, "begin needs a rescue or ensure block")
        bare = [i for i, c in enumerate(clauses) if c.class_name is None]
        if len(bare) > 1 or (bare and bare[0] != len(clauses) - 1):
            self.error(tok, "bare rescue must be the single last clause")
        return ast.Try(body=body, clauses=clauses, finally_body=finally_body,
                       line=tok.line)

    def def_stmt(self):
        tok = self.expect("Keyword", "def")
        name = self.expect("Identifier", what="a method name").lexeme
        params = []
        if self.accept("Punctuation", "("):
            if not self.at("Punctuation", ")"):
                params.append(self.expect("Identifier", what="a parameter").lexeme)
                while self.accept("Punctuation", ","):
                    params.append(self.expect("Identifier", what="a parameter").lexeme)
            self.expect("Punctuation", ")")
        self.expect("Newline", what="a newline after the signature")
        body = self.statements()
        end_tok = self.expect("Keyword", "end")
        source = textwrap.dedent(
            "\n".join(self.src_lines[tok.line - 1:end_tok.line]))
        return ast.FuncDef(name=name, params=params, body=body,
                           implicit_self=True, source=source, line=tok.line)

    def class_stmt(self):
        tok = self.expect("Keyword", "class")
        name = self.expect("Constant", what="a class name").lexeme
        self.expect("Newline", what="a newline after the class name")
        methods = []
        self.skip_newlines()
        while not self.at("Keyword", "end") and not self.at("EOF"):
            if self.at("Keyword", "def"):
                methods.append(self.def_stmt())
            else:
                self.error(self.peek(), "expected a method definition")
            self.skip_newlines()
        self.expect("Keyword", "end")
        return ast.ClassDef(name=name, methods=methods, assigns=[], line=tok.line)

    def raise_stmt(self):
        tok = self.expect("Keyword", "raise")
        if self.at("Newline") or self.at_block_end():
            self.error(tok, "raise requires an argument")
        if self.at("Constant"):
            class_name = self.advance().lexeme
            message = None
            if self.accept("Punctuation", ","):
                message = self.expression()
            self.end_simple()
            return ast.Raise(class_name=class_name, message=message, line=tok.line)
        expr = self.expression()
        self.end_simple()
        if isinstance(expr, ast.Const) and type(expr.value) is str:
            return ast.Raise(class_name="RuntimeError", message=expr, line=tok.line)
        return ast.Raise(value=expr, line=tok.line)

    # --- expressions ---

    def expression(self):
        return self.or_expr()

    def or_expr(self):
        left = self.and_expr()
        while self.at("Operator", "||"):
            tok = self.advance()
            left = ast.BoolOp(op="or", left=left, right=self.and_expr(), line=tok.line)
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.at("Operator", "&&"):
            tok = self.advance()
            left = ast.BoolOp(op="and", left=left, right=self.not_expr(),
                              line=tok.line)
        return left

    def not_expr(self):
        if self.at("Operator", "!"):
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
                if not isinstance(node, ast.Name):
                    self.error(self.peek(), "only simple names are callable")
                tok = self.advance()
                args = self.arg_list()
                node = ast.Call(func=node, args=args, line=tok.line)
            elif self.at("Punctuation", "."):
                tok = self.advance()
                name = self.expect("Identifier", what="a method name").lexeme
                args = []
                if self.at("Punctuation", "("):
                    self.advance()
                    args = self.arg_list()
                if name == "new":
                    node = ast.New(cls=node, args=args, line=tok.line)
                else:
                    node = ast.MethodCall(obj=node, name=name, args=args,
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
        if tok.kind == "Keyword" and tok.lexeme in ("nil", "true", "false"):
            self.advance()
            value = {"nil": None, "true": True, "false": False}[tok.lexeme]
            return ast.Const(value=value, line=tok.line)
        if tok.kind == "IVar":
            self.advance()
            return ast.Attribute(obj=ast.Name(id="self", line=tok.line),
                                 name=tok.lexeme, missing_nil=True,
                                 line=tok.line)
        if tok.kind in ("Identifier", "Constant"):
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
    return Parser(tokenize(source), source).parse_program()


# --- display and coercion rules ---


def display(value, ctx):
    if value is None:
        return "nil"
    t = type(value)
    if t is bool:
        return "true" if value else "false"
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
            return f"#<{entry.cls.name}>"
        return display(entry.value, ctx)
    if t is ForeignRef:
        return f"#<foreign {value.language} {_ref_class_name(ctx, value)}>"
    if t is ExceptionValue:
        return f"{value.class_name}: {value.message}"
    if t is FunctionValue:
        return f"#<method {value.code.name}>"
    if t is ClassValue:
        return value.name
    if t is BoundMethod:
        return f"#<method {value.cls.name}##{value.code.name}>"
    if t is BuiltinFunction:
        return f"#<builtin {value.name}>"
    if t is IteratorValue:
        return "#<iterator>"
    return repr(value)


def _ref_class_name(ctx, ref):
    entry = ctx.deref(ref)
    if isinstance(entry, GuestObject):
        return entry.cls.name
    return neutral_type_name(entry.value)


def _quote(text):
    out = ['"']
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def to_text(value, ctx):
    if type(value) is str:
        return value
    if value is None:
        return ""
    if type(value) is ExceptionValue:
        return value.message
    return display(value, ctx)


def truthy(value):
    return value is not None and value is not False


# --- builtins ---


def _bi_puts(task, frame, args):
    if not args:
        task.transcript.append("\n")
        return None
    for a in args:
        task.transcript.append(to_text(a, task.ctx) + "\n")
    return None


def _bi_sleep(task, frame, args):
    if len(args) != 1 or type(args[0]) not in (int, float) \
            or isinstance(args[0], bool):
        guest_raise("ArgumentError", "sleep requires a number of seconds")
    return SleepRequest(max(0.0, float(args[0])))


def builtin_method(ctx, recv, selector, args):
    t = type(recv)
    if t is str:
        if selector == "split":
            if len(args) != 1 or type(args[0]) is not str:
                guest_raise("ArgumentError", "split takes one text separator")
            return recv.split(args[0])
        if selector == "downcase":
            if args:
                guest_raise("ArgumentError", "downcase takes no arguments")
            return recv.lower()
        if selector == "length":
            if args:
                guest_raise("ArgumentError", "length takes no arguments")
            return len(recv)
    elif t is list:
        if selector == "push":
            if len(args) != 1:
                guest_raise("ArgumentError", "push takes exactly one argument")
            recv.append(args[0])
            return recv
        if selector == "size":
            if args:
                guest_raise("ArgumentError", "size takes no arguments")
            return len(recv)
    guest_raise("NoMethodError",
                f"undefined method '{selector}' for {neutral_type_name(recv)}")


class MiniRbPlugin(LanguagePlugin):
    id = "minirb"
    display_name = "MiniRb"
    file_extension = ".mrb"
    implicit_self_lookup = True

    def __init__(self):
        from .bridge import xeval_builtin

        self._compiler = LanguageCompiler("minirb", "<main>", True)
        self.builtins = {
            "puts": _bi_puts,
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
            raise CompileError(1, 1, "expected a single method definition")
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
        return ExceptionValue(
            "NameError", f"undefined local variable or method '{name}'")

    def exc_no_method(self, selector, class_name):
        return ExceptionValue(
            "NoMethodError", f"undefined method '{selector}' for {class_name}")

    def exc_no_attribute(self, name, class_name):
        return ExceptionValue(
            "NoMethodError", f"undefined method '{name}' for {class_name}")

    def exc_arity(self, name, expected, got):
        return ExceptionValue(
            "ArgumentError",
            f"wrong number of arguments (given {got}, expected {expected})")

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
