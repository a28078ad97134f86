"""Lightweight C code model: functions, statements, tokens and variable occurrences.

Parses a pragmatic subset of C (top-level function definitions with
declarations, expressions, if/else, loops, switch, goto/labels and return)
into a statement-level representation.  Macros are never expanded; a macro
invocation statement keeps its literal tokens.  Member-access chains written
with ``->`` (and, by default, ``.``) are treated as single variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError

C_KEYWORDS = {
    "auto", "break", "case", "char", "const", "continue", "default", "do",
    "double", "else", "enum", "extern", "float", "for", "goto", "if",
    "inline", "int", "long", "register", "restrict", "return", "short",
    "signed", "sizeof", "static", "struct", "switch", "typedef", "union",
    "unsigned", "void", "volatile", "while", "_Bool", "bool", "true",
    "false", "NULL",
}

TYPE_KEYWORDS = {
    "void", "char", "short", "int", "long", "float", "double", "signed",
    "unsigned", "struct", "union", "enum", "const", "volatile", "static",
    "register", "extern", "inline", "_Bool", "bool", "auto", "restrict",
}

ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}

# longest-first so the lexer is greedy
MULTI_CHAR_OPS = [
    "<<=", ">>=", "...",
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
]


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    col: int
    kind: str  # "id", "num", "str", "char", "punct"

    @property
    def is_identifier(self) -> bool:
        return self.kind == "id" and self.text not in C_KEYWORDS


def strip_comments(source: str) -> str:
    """Replace comments with spaces, preserving line structure."""
    out = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                i += 1
        elif c == "/" and i + 1 < n and source[i + 1] == "*":
            i += 2
            while i + 1 < n and not (source[i] == "*" and source[i + 1] == "/"):
                if source[i] == "\n":
                    out.append("\n")
                i += 1
            i += 2
        elif c in "\"'":
            quote = c
            out.append(c)
            i += 1
            while i < n and source[i] != quote:
                if source[i] == "\\" and i + 1 < n:
                    out.append(source[i : i + 2])
                    i += 2
                    continue
                out.append(source[i])
                i += 1
            if i < n:
                out.append(quote)
                i += 1
        else:
            out.append(c)
            i += 1
    return "".join(out)


def tokenize(source: str, first_line: int = 1) -> list[Token]:
    """Tokenize C source. Preprocessor lines are skipped as plain text."""
    tokens: list[Token] = []
    clean = strip_comments(source)
    lines = clean.split("\n")
    continued_directive = False
    for lineno, line in enumerate(lines, start=first_line):
        stripped = line.lstrip()
        if continued_directive or stripped.startswith("#"):
            continued_directive = line.rstrip().endswith("\\")
            continue
        i = 0
        n = len(line)
        while i < n:
            c = line[i]
            if c.isspace():
                i += 1
                continue
            if c.isalpha() or c == "_":
                j = i
                while j < n and (line[j].isalnum() or line[j] == "_"):
                    j += 1
                tokens.append(Token(line[i:j], lineno, i, "id"))
                i = j
            elif c.isdigit() or (c == "." and i + 1 < n and line[i + 1].isdigit()):
                j = i
                while j < n and (line[j].isalnum() or line[j] in "._" or
                                 (line[j] in "+-" and line[j - 1] in "eEpP")):
                    j += 1
                tokens.append(Token(line[i:j], lineno, i, "num"))
                i = j
            elif c in "\"'":
                j = i + 1
                while j < n and line[j] != c:
                    if line[j] == "\\":
                        j += 1
                    j += 1
                j = min(j + 1, n)
                tokens.append(Token(line[i:j], lineno, i, "str" if c == '"' else "char"))
                i = j
            else:
                for op in MULTI_CHAR_OPS:
                    if line.startswith(op, i):
                        tokens.append(Token(op, lineno, i, "punct"))
                        i += len(op)
                        break
                else:
                    tokens.append(Token(c, lineno, i, "punct"))
                    i += 1
    return tokens


@dataclass(frozen=True)
class StatementId:
    function_id: str
    line: int
    ordinal: int

    def __str__(self) -> str:
        return f"{self.function_id}@{self.line}.{self.ordinal}"


@dataclass
class Statement:
    id: StatementId
    kind: str  # declaration | assignment | call | condition | return | jump | other
    tokens: list[str]
    line: int
    text: str
    token_objs: list[Token] = field(repr=False, default_factory=list)
    label_name: str | None = None   # set for `label:` markers
    goto_target: str | None = None  # set for goto statements
    function: "Function | None" = field(default=None, repr=False)

    @property
    def is_label(self) -> bool:
        return self.label_name is not None


@dataclass
class VariableOccurrence:
    variable_key: str
    statement_id: StatementId
    token_span: tuple[int, int]  # inclusive indices into Statement.tokens
    is_declaration: bool = False
    role: str = "use"  # definition | use | unknown


# ---------------------------------------------------------------------------
# Statement-tree nodes used to build the CFG


@dataclass
class Simple:
    stmt: Statement


@dataclass
class LabelNode:
    stmt: Statement


@dataclass
class If:
    cond: Statement
    then: list
    orelse: list


@dataclass
class Loop:
    header: Statement
    body: list
    post_test: bool = False  # True for do-while


@dataclass
class Switch:
    header: Statement
    cases: list  # list of (is_default, list-of-nodes)


@dataclass
class Function:
    id: str
    name: str
    file_origin: str
    start_line: int
    end_line: int
    statements: list[Statement]
    source_text: str
    parameters: list[str]
    body: list = field(default_factory=list, repr=False)

    def statement_by_id(self, sid: StatementId) -> Statement:
        for s in self.statements:
            if s.id == sid:
                return s
        raise KeyError(sid)


# ---------------------------------------------------------------------------
# Parsing


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, k: int = 0) -> Token | None:
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def next(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)


class _FunctionParser:
    """Parses one function body into a statement tree."""

    def __init__(self, func_id: str, tokens: list[Token], source_lines: dict[int, str]):
        self.cur = _Cursor(tokens)
        self.func_id = func_id
        self.source_lines = source_lines
        self.statements: list[Statement] = []
        self._ordinals: dict[int, int] = {}

    def _make_statement(self, kind: str, toks: list[Token], **extra) -> Statement:
        line = toks[0].line
        ordinal = self._ordinals.get(line, 0)
        self._ordinals[line] = ordinal + 1
        stmt = Statement(
            id=StatementId(self.func_id, line, ordinal),
            kind=kind,
            tokens=[t.text for t in toks],
            line=line,
            text=self._render(toks),
            token_objs=list(toks),
            **extra,
        )
        self.statements.append(stmt)
        return stmt

    def _render(self, toks: list[Token]) -> str:
        """Original source spelling of the token range, whitespace-collapsed."""
        first, last = toks[0], toks[-1]
        if first.line == last.line:
            raw = self.source_lines[first.line][first.col : last.col + len(last.text)]
            return " ".join(raw.split())
        parts = [self.source_lines[first.line][first.col :]]
        for ln in range(first.line + 1, last.line):
            parts.append(self.source_lines.get(ln, ""))
        parts.append(self.source_lines[last.line][: last.col + len(last.text)])
        return " ".join(" ".join(parts).split())

    # -- statement-tree parsing --------------------------------------------

    def parse_block(self) -> list:
        """Parse statements until a closing '}' (consumed) or end of input."""
        nodes: list = []
        while not self.cur.at_end():
            t = self.cur.peek()
            if t.text == "}":
                self.cur.next()
                return nodes
            nodes.append(self.parse_statement())
        return nodes

    def parse_statement(self):
        t = self.cur.peek()
        if t.text == "{":
            self.cur.next()
            return self.parse_block()
        if t.text == ";":
            self.cur.next()
            return []
        if t.text == "if":
            return self._parse_if()
        if t.text == "while":
            return self._parse_while()
        if t.text == "do":
            return self._parse_do()
        if t.text == "for":
            return self._parse_for()
        if t.text == "switch":
            return self._parse_switch()
        nxt = self.cur.peek(1)
        if (t.is_identifier and nxt is not None and nxt.text == ":"
                and (self.cur.peek(2) is None or self.cur.peek(2).text != ":")):
            toks = [self.cur.next(), self.cur.next()]
            stmt = self._make_statement("other", toks, label_name=t.text)
            return LabelNode(stmt)
        return Simple(self._parse_simple())

    def _parse_paren_group(self, keyword: Token) -> list[Token]:
        """Consume '( ... )' after a control keyword, returning keyword+group."""
        toks = [keyword]
        t = self.cur.peek()
        if t is None or t.text != "(":
            raise ParseError("", keyword.line, f"expected '(' after {keyword.text!r}")
        depth = 0
        while not self.cur.at_end():
            tok = self.cur.next()
            toks.append(tok)
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                depth -= 1
                if depth == 0:
                    break
        return toks

    def _parse_if(self) -> If:
        kw = self.cur.next()
        cond_toks = self._parse_paren_group(kw)
        cond = self._make_statement("condition", cond_toks)
        then = self._as_list(self.parse_statement())
        orelse: list = []
        nxt = self.cur.peek()
        if nxt is not None and nxt.text == "else":
            self.cur.next()
            orelse = self._as_list(self.parse_statement())
        return If(cond, then, orelse)

    def _parse_while(self) -> Loop:
        kw = self.cur.next()
        cond_toks = self._parse_paren_group(kw)
        header = self._make_statement("condition", cond_toks)
        body = self._as_list(self.parse_statement())
        return Loop(header, body)

    def _parse_do(self) -> Loop:
        self.cur.next()  # 'do'
        body = self._as_list(self.parse_statement())
        kw = self.cur.peek()
        if kw is None or kw.text != "while":
            raise ParseError("", self.statements[-1].line if self.statements else 0,
                             "expected 'while' after do-body")
        self.cur.next()
        cond_toks = self._parse_paren_group(kw)
        header = self._make_statement("condition", cond_toks)
        nxt = self.cur.peek()
        if nxt is not None and nxt.text == ";":
            self.cur.next()
        return Loop(header, body, post_test=True)

    def _parse_for(self) -> Loop:
        kw = self.cur.next()
        header_toks = self._parse_paren_group(kw)
        header = self._make_statement("condition", header_toks)
        body = self._as_list(self.parse_statement())
        return Loop(header, body)

    def _parse_switch(self) -> Switch:
        kw = self.cur.next()
        header_toks = self._parse_paren_group(kw)
        header = self._make_statement("condition", header_toks)
        nxt = self.cur.peek()
        cases: list = []
        if nxt is None or nxt.text != "{":
            body = self._as_list(self.parse_statement())
            cases.append((False, body))
            return Switch(header, cases)
        self.cur.next()  # '{'
        current: list | None = None
        current_default = False
        while not self.cur.at_end():
            t = self.cur.peek()
            if t.text == "}":
                self.cur.next()
                break
            if t.text in ("case", "default"):
                if current is not None:
                    cases.append((current_default, current))
                current_default = t.text == "default"
                while not self.cur.at_end() and self.cur.next().text != ":":
                    pass
                current = []
                continue
            node = self.parse_statement()
            if current is None:
                current = []
            current.append(node)
        if current is not None:
            cases.append((current_default, current))
        return Switch(header, cases)

    @staticmethod
    def _as_list(node) -> list:
        if isinstance(node, list):
            return node
        return [node]

    def _parse_simple(self) -> Statement:
        toks: list[Token] = []
        depth = 0
        while not self.cur.at_end():
            t = self.cur.peek()
            if depth == 0 and t.text in ("{", "}"):
                break
            t = self.cur.next()
            if t.text in ("(", "["):
                depth += 1
            elif t.text in (")", "]"):
                depth = max(0, depth - 1)
            if t.text == ";" and depth == 0:
                toks.append(t)
                break
            toks.append(t)
        if not toks:
            raise ParseError("", self.cur.peek().line if self.cur.peek() else 0,
                             "empty statement")
        kind = classify_simple(toks)
        extra = {}
        if toks[0].text == "goto" and len(toks) > 1:
            extra["goto_target"] = toks[1].text
        return self._make_statement(kind, toks, **extra)


def classify_simple(toks: list[Token]) -> str:
    texts = [t.text for t in toks]
    if texts[0] == "return":
        return "return"
    if texts[0] in ("goto", "break", "continue"):
        return "jump"
    if _is_declaration(toks):
        return "declaration"
    depth = 0
    for t in texts:
        if t in ("(", "["):
            depth += 1
        elif t in (")", "]"):
            depth -= 1
        elif depth == 0 and t in ASSIGN_OPS:
            return "assignment"
        elif depth == 0 and t in ("++", "--"):
            return "assignment"
    if toks[0].is_identifier and len(toks) > 1 and texts[1] == "(":
        return "call"
    return "other"


def _is_declaration(toks: list[Token]) -> bool:
    texts = [t.text for t in toks]
    if texts[0] in TYPE_KEYWORDS:
        return True
    # typedef'd type: `ident *... ident` followed by ; = , or [
    if toks[0].is_identifier:
        i = 1
        while i < len(texts) and texts[i] == "*":
            i += 1
        if (i > 0 and i < len(texts) and toks[i].kind == "id"
                and toks[i].is_identifier
                and i + 1 < len(texts) and texts[i + 1] in (";", "=", ",", "[")):
            # require at least a pointer star or a plain two-identifier form
            return True
    return False


# ---------------------------------------------------------------------------
# Function extraction


def extract_functions(
    source: str,
    file_origin: str,
    first_line: int = 1,
    diagnostics: list | None = None,
) -> list[Function]:
    """Extract all top-level function definitions in source order.

    Unparseable bodies are skipped and reported through ``diagnostics``
    (a list of dicts {file, line, severity, message}).
    """
    if diagnostics is None:
        diagnostics = []
    tokens = tokenize(source, first_line=first_line)
    source_lines = {
        i: line
        for i, line in enumerate(strip_comments(source).split("\n"), start=first_line)
    }
    functions: list[Function] = []
    i = 0
    n = len(tokens)
    decl_start = 0  # token index where the current top-level declaration begins
    while i < n:
        t = tokens[i]
        if t.text in (";", "}"):
            decl_start = i + 1
            i += 1
            continue
        if t.text == "=":
            # global initializer: skip to ';' at depth 0
            depth = 0
            while i < n:
                if tokens[i].text in ("(", "[", "{"):
                    depth += 1
                elif tokens[i].text in (")", "]", "}"):
                    depth -= 1
                elif tokens[i].text == ";" and depth == 0:
                    break
                i += 1
            continue
        if t.text == "(" and i > decl_start and tokens[i - 1].is_identifier:
            # candidate function signature: find matching ')'
            depth = 0
            j = i
            while j < n:
                if tokens[j].text == "(":
                    depth += 1
                elif tokens[j].text == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            if j + 1 < n and tokens[j + 1].text == "{":
                name_tok = tokens[i - 1]
                # find the matching closing brace of the body
                depth = 0
                k = j + 1
                while k < n:
                    if tokens[k].text == "{":
                        depth += 1
                    elif tokens[k].text == "}":
                        depth -= 1
                        if depth == 0:
                            break
                    k += 1
                if k >= n:
                    diagnostics.append({
                        "file": file_origin, "line": name_tok.line,
                        "severity": "error",
                        "message": f"unbalanced braces in function {name_tok.text!r}",
                    })
                    break
                start_line = tokens[decl_start].line
                end_line = tokens[k].line
                body_tokens = tokens[j + 2 : k]
                params = _parameter_names(tokens[i + 1 : j])
                func_id = f"{file_origin}:{name_tok.text}:{start_line}"
                parser = _FunctionParser(func_id, body_tokens, source_lines)
                try:
                    body = parser.parse_block()
                except ParseError as exc:
                    diagnostics.append({
                        "file": file_origin, "line": exc.line or name_tok.line,
                        "severity": "error",
                        "message": f"skipped function {name_tok.text!r}: {exc.reason}",
                    })
                    i = k + 1
                    decl_start = k + 1
                    continue
                stmts = sorted(parser.statements, key=lambda s: (s.line, s.id.ordinal))
                raw_lines = source.split("\n")
                src_text = "\n".join(
                    raw_lines[start_line - first_line : end_line - first_line + 1]
                )
                func = Function(
                    id=func_id,
                    name=name_tok.text,
                    file_origin=file_origin,
                    start_line=start_line,
                    end_line=end_line,
                    statements=stmts,
                    source_text=src_text,
                    parameters=params,
                    body=body,
                )
                for s in stmts:
                    s.function = func
                functions.append(func)
                i = k + 1
                decl_start = k + 1
                continue
            # not a definition (prototype or call) - skip the parens
            i = j + 1
            continue
        i += 1
    return functions


def _parameter_names(param_tokens: list[Token]) -> list[str]:
    names: list[str] = []
    group: list[Token] = []
    depth = 0

    def flush():
        ids = [t for t in group if t.is_identifier]
        if ids:
            names.append(ids[-1].text)

    for t in param_tokens:
        if t.text in ("(", "["):
            depth += 1
        elif t.text in (")", "]"):
            depth -= 1
        if t.text == "," and depth == 0:
            flush()
            group = []
        else:
            group.append(t)
    flush()
    return names


# ---------------------------------------------------------------------------
# Variable occurrences


def collect_variable_occurrences(
    func: Function, fuse_dot_access: bool = True
) -> list[VariableOccurrence]:
    """All variable occurrences of a function, ordered by (line, span start).

    Member-access chains (``a->b->c``) yield one occurrence for the whole
    chain; function names in call position, keywords and literals are
    excluded.
    """
    occurrences: list[VariableOccurrence] = []
    for stmt in func.statements:
        occurrences.extend(_statement_occurrences(stmt, fuse_dot_access))
    occurrences.sort(key=lambda o: (o.statement_id.line, o.statement_id.ordinal,
                                    o.token_span[0]))
    return occurrences


def first_occurrence_of(stmt: Statement, variable_key: str,
                        fuse_dot_access: bool = True) -> VariableOccurrence | None:
    """Earliest occurrence of a key in a statement, or None."""
    for occ in _statement_occurrences(stmt, fuse_dot_access):
        if occ.variable_key == variable_key:
            return occ
    return None


def _statement_occurrences(stmt: Statement, fuse_dot: bool) -> list[VariableOccurrence]:
    toks = stmt.token_objs
    if stmt.is_label:
        return []
    chain_seps = {"->", "."} if fuse_dot else {"->"}
    declared_spans = _declared_spans(stmt) if stmt.kind == "declaration" else {}
    first_decl = min(declared_spans) if declared_spans else None
    occs: list[VariableOccurrence] = []
    i = 0
    n = len(toks)
    while i < n:
        t = toks[i]
        if not t.is_identifier:
            i += 1
            continue
        if stmt.kind == "jump" and stmt.tokens[0] == "goto":
            break  # goto label is not a variable
        if i > 0 and toks[i - 1].text in ("struct", "union", "enum"):
            i += 1  # type tag, not a variable
            continue
        if first_decl is not None and i < first_decl:
            i += 1  # part of the declared type
            continue
        if _looks_like_constant(t.text):
            i += 1
            continue
        j = i
        while (j + 2 < n and toks[j + 1].text in chain_seps
               and toks[j + 2].is_identifier):
            j += 2
        nxt = toks[j + 1].text if j + 1 < n else None
        if nxt == "(":
            # call position: the (chain) names the callee, not a variable
            i = j + 1
            continue
        key = "".join(tok.text for tok in toks[i : j + 1])
        is_decl = i in declared_spans
        role = _occurrence_role(stmt, toks, i, j, is_decl)
        occs.append(VariableOccurrence(
            variable_key=key,
            statement_id=stmt.id,
            token_span=(i, j),
            is_declaration=is_decl,
            role=role,
        ))
        i = j + 1
    return occs


def _looks_like_constant(text: str) -> bool:
    """ALL_CAPS identifiers follow the macro-constant convention in C."""
    return len(text) >= 2 and text.upper() == text and any(c.isalpha() for c in text)


def _declared_spans(stmt: Statement) -> dict[int, bool]:
    """Token indices of declared names in a declaration statement.

    Maps start index -> True if the declarator has an initializer.
    """
    toks = stmt.token_objs
    texts = stmt.tokens
    spans: dict[int, bool] = {}
    # skip the type prefix: keywords, type-ish identifiers and '*'
    i = 0
    n = len(toks)
    while i < n and (texts[i] in TYPE_KEYWORDS or texts[i] == "*"):
        i += 1
    if i < n and toks[i].is_identifier and i + 1 < n:
        nxt = texts[i + 1]
        if nxt == "*" or (toks[i + 1].kind == "id"):
            # `u32 x` / `mytype * x`: current token was the type name
            i += 1
            while i < n and texts[i] == "*":
                i += 1
    # now at the first declarator; walk top-level comma-separated declarators
    depth = 0
    expect_name = True
    while i < n:
        t = toks[i]
        if t.text in ("(", "["):
            depth += 1
        elif t.text in (")", "]"):
            depth -= 1
        elif depth == 0:
            if expect_name and t.is_identifier:
                has_init = i + 1 < n and texts[i + 1] == "="
                spans[i] = has_init
                expect_name = False
            elif t.text == ",":
                expect_name = True
        i += 1
    return spans


def _occurrence_role(stmt, toks, i, j, is_decl) -> str:
    texts = [t.text for t in toks]
    if is_decl:
        has_init = j + 1 < len(toks) and texts[j + 1] == "="
        return "definition" if has_init else "unknown"
    nxt = texts[j + 1] if j + 1 < len(toks) else None
    prev = texts[i - 1] if i > 0 else None
    if nxt in ASSIGN_OPS and _at_top_level(texts, i):
        return "definition"
    if nxt in ("++", "--") or prev in ("++", "--"):
        return "definition"
    return "use"


def _at_top_level(texts: list[str], idx: int) -> bool:
    depth = 0
    for t in texts[:idx]:
        if t in ("(", "["):
            depth += 1
        elif t in (")", "]"):
            depth -= 1
    return depth == 0


def occurrence_count(func: Function, variable_key: str,
                     fuse_dot_access: bool = True) -> int:
    """Number of non-declaration occurrences of a variable in a function."""
    return sum(
        1
        for occ in collect_variable_occurrences(func, fuse_dot_access)
        if occ.variable_key == variable_key and not occ.is_declaration
    )
