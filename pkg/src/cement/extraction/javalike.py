"""Heuristic method boundary extraction for Java-like, brace-delimited sources.

This is deliberately not a parser. Comments and string/char literals are
blanked out (line structure preserved), braces are matched, and the text
preceding each ``{`` at class level is tested against a method-signature
pattern. Only outermost methods are reported; lambdas, local and anonymous
classes stay inside their enclosing method. Constructors are skipped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_KEYWORDS = frozenset(
    """if for while switch catch synchronized return new else try do throw
    assert super this case default finally yield""".split()
)
_MODIFIERS = re.compile(
    r"\b(?:public|private|protected|static|final|abstract|synchronized|native|"
    r"strictfp|default|transient|volatile|sealed|non-sealed)\b"
)
_ANNOTATION = re.compile(r"@(?!interface\b)[\w$.]+(?:\s*\((?:[^()]|\([^()]*\))*\))?")
_CLASS_DECL = re.compile(r"(?:^|\s)(?:class|interface|enum|record|@interface)\s+([A-Za-z_$][\w$]*)")
_METHOD_DECL = re.compile(
    r"^(?P<prefix>.*?)(?P<name>[A-Za-z_$][\w$]*)\s*\((?P<params>.*)\)"
    r"\s*(?:\[\s*\]\s*)*(?:throws\s+[\w$.<>,\s?]+)?$",
    re.DOTALL,
)
_TYPE_TEXT = re.compile(r"^[\w$.<>\[\]?,&\s]+$")


@dataclass(frozen=True)
class EntityLocator:
    qualified_name: str
    start_line: int
    end_line: int
    file_path: str = ""


@dataclass
class ExtractionResult:
    locators: list[EntityLocator] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.warnings


def mask_source(text: str) -> str:
    """Replace comment and literal contents by spaces, keeping newlines."""
    out = list(text)
    i, n = 0, len(text)

    def blank(a: int, b: int) -> None:
        for j in range(a, min(b, n)):
            if out[j] != "\n":
                out[j] = " "

    while i < n:
        c = text[i]
        if text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j < 0 else j
            blank(i, j)
            i = j
        elif text.startswith("/*", i):
            j = text.find("*/", i + 2)
            j = n if j < 0 else j + 2
            blank(i, j)
            i = j
        elif text.startswith('"""', i):
            j = i + 3
            while j < n and not text.startswith('"""', j):
                j += 2 if text[j] == "\\" else 1
            j = min(j + 3, n)
            blank(i, j)
            i = j
        elif c in "\"'":
            j = i + 1
            while j < n and text[j] != c and text[j] != "\n":
                j += 2 if text[j] == "\\" else 1
            j = min(j + 1, n)
            blank(i, j)
            i = j
        else:
            i += 1
    return "".join(out)


def _split_params(params: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in params:
        if ch in "<([":
            depth += 1
        elif ch in ">)]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def _param_type(param: str) -> str:
    param = re.sub(r"\bfinal\b", "", param).strip()
    m = re.match(r"^(.*?)\s*([A-Za-z_$][\w$]*)\s*((?:\[\s*\])*)$", param, re.DOTALL)
    if not m or not m.group(1):
        return re.sub(r"\s+", "", param)
    return re.sub(r"\s+", "", m.group(1)) + m.group(3).replace(" ", "")


def _strip_type_params(s: str) -> str:
    s = s.strip()
    if not s.startswith("<"):
        return s
    depth = 0
    for i, ch in enumerate(s):
        depth += ch == "<"
        depth -= ch == ">"
        if depth == 0:
            return s[i + 1 :].strip()
    return s


def _classify_header(header: str) -> tuple[str, object]:
    """Return ("class", name), ("method", (name, param_types)) or ("other", None)."""
    text = _ANNOTATION.sub(" ", header)
    text = " ".join(text.split())
    if not text or "=" in text or "->" in text:
        return "other", None
    m = _CLASS_DECL.search(text)
    if m:
        return "class", m.group(1)
    m = _METHOD_DECL.match(text)
    if not m:
        return "other", None
    name = m.group("name")
    if name in _KEYWORDS:
        return "other", None
    prefix = _strip_type_params(_MODIFIERS.sub(" ", m.group("prefix")).lstrip(" ,"))
    if not prefix:
        return "constructor", None
    if not _TYPE_TEXT.match(prefix) or prefix.rstrip().endswith(".") or re.search(
        r"\b(?:new|return|throw|else|case)\b", prefix
    ):
        return "other", None
    types = tuple(_param_type(p) for p in _split_params(m.group("params")))
    return "method", (name, types)


def _line_of(offsets: list[int], pos: int) -> int:
    # 1-based line number for a character offset
    lo, hi = 0, len(offsets)
    while lo < hi:
        mid = (lo + hi) // 2
        if offsets[mid] <= pos:
            lo = mid + 1
        else:
            hi = mid
    return lo


def extract_entities(text: str, file_path: str = "", language_hint: str = "java") -> ExtractionResult:
    """Locate method bodies in ``text``.

    Qualified names are ``Outer.Inner.name/arity``. When two methods in one
    file share that name, both fall back to ``Outer.name(T1,T2)``.
    """
    if language_hint.lower() not in ("java", "javalike"):
        raise ValueError(f"unsupported language hint {language_hint!r}")
    masked = mask_source(text)
    offsets = [0] + [m.end() for m in re.finditer("\n", masked)]
    result = ExtractionResult()
    found: list[tuple[tuple[str, ...], str, tuple[str, ...], int, int]] = []

    # frame: (kind, class_name or method info, start_line)
    frames: list[tuple[str, object, int]] = []
    stmt_start = 0
    paren_depth = 0
    in_body = 0  # depth of braces opened inside a method/opaque frame
    paren_braces = 0  # array initializers inside class-level parentheses

    for pos, ch in enumerate(masked):
        if ch == "(":
            paren_depth += 1
        elif ch == ")":
            paren_depth = max(0, paren_depth - 1)
        elif ch == ";" and not in_body and paren_depth == 0:
            stmt_start = pos + 1
        elif ch == "{":
            if in_body:
                in_body += 1
                continue
            if paren_depth:
                paren_braces += 1
                continue
            header = masked[stmt_start:pos]
            kind, info = _classify_header(header)
            lead = len(header) - len(header.lstrip())
            start_line = _line_of(offsets, stmt_start + lead)
            if kind == "class":
                frames.append(("class", info, start_line))
                stmt_start = pos + 1
            else:
                frames.append((kind, info, start_line))
                in_body = 1
        elif ch == "}":
            if in_body > 1:
                in_body -= 1
                continue
            if not in_body and paren_braces:
                paren_braces -= 1
                continue
            if not frames:
                result.warnings.append(f"unbalanced '}}' at line {_line_of(offsets, pos)}")
                break
            kind, info, start_line = frames.pop()
            in_body = 0
            stmt_start = pos + 1
            if kind == "method":
                owners = tuple(f[1] for f in frames if f[0] == "class")
                name, types = info
                found.append((owners, name, types, start_line, _line_of(offsets, pos)))
    else:
        if frames:
            result.warnings.append(f"{len(frames)} unclosed block(s) at end of file")

    short = [".".join(owners + (name,)) + f"/{len(types)}" for owners, name, types, _, _ in found]
    counts: dict[str, int] = {}
    for s in short:
        counts[s] = counts.get(s, 0) + 1
    seen: dict[str, int] = {}
    for (owners, name, types, start, end), s in zip(found, short):
        qname = s
        if counts[s] > 1:
            qname = ".".join(owners + (name,)) + "(" + ",".join(types) + ")"
            seen[qname] = seen.get(qname, 0) + 1
            if seen[qname] > 1:
                qname += f"#{seen[qname]}"
        result.locators.append(EntityLocator(qname, start, end, file_path))
    result.locators.sort(key=lambda loc: loc.start_line)
    return result
