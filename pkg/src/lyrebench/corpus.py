"""Corpus ingestion, cleaning, tokenization, and statistics.

Cleaning turns raw lyric pages (often HTML) into plain text: tags are
stripped with a tolerant parser, markup symbols removed, site boilerplate
lines dropped, and whitespace normalized so that no more than a fixed number
of consecutive newlines survive.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from html.parser import HTMLParser
from importlib import resources
from pathlib import Path

from ._util import parallel_map
from .errors import ValidationError

SCHEMES = ("unicode-scalar", "whitespace")

DEFAULT_RULES_RESOURCE = "default_rules.txt"


@dataclass(frozen=True)
class Document:
    id: str
    raw_text: str
    clean_text: str | None = None
    source: str = ""
    meta: dict[str, str] = field(default_factory=dict)

    def effective_text(self) -> str:
        """Cleaned text when available, raw text otherwise."""
        return self.raw_text if self.clean_text is None else self.clean_text


@dataclass
class Corpus:
    documents: list[Document]
    name: str = ""

    def __post_init__(self):
        seen: dict[str, int] = {}
        for i, doc in enumerate(self.documents):
            if not doc.id:
                raise ValidationError(f"document at index {i} has an empty id")
            if doc.id in seen:
                raise ValidationError(
                    f"duplicate document id {doc.id!r} at indices {seen[doc.id]} and {i}"
                )
            seen[doc.id] = i

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    scheme: str

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


@dataclass(frozen=True)
class CorpusStats:
    song_count: int
    token_count: int
    byte_size: int
    artist_count: int | None = None


class CleaningRuleSet:
    """Symbols to strip, boilerplate line patterns to drop, newline cap.

    Line patterns apply to whole trimmed lines only: a literal pattern must
    equal the line, a regex (``re:`` prefix in the rules file) must fullmatch
    it.  This keeps mid-line hyphens and symbols inside lyrics safe.
    """

    def __init__(self, strip_symbols=(), drop_line_patterns=(), max_consecutive_newlines=2):
        if max_consecutive_newlines < 1:
            raise ValidationError(
                f"max_consecutive_newlines must be >= 1, got {max_consecutive_newlines}"
            )
        self.strip_symbols = tuple(strip_symbols)
        self.drop_line_patterns = tuple(drop_line_patterns)
        self.max_consecutive_newlines = max_consecutive_newlines
        self._literals = frozenset(
            p for p in self.drop_line_patterns if not p.startswith("re:")
        )
        self._regexes = []
        for p in self.drop_line_patterns:
            if p.startswith("re:"):
                try:
                    self._regexes.append(re.compile(p[3:]))
                except re.error as exc:
                    raise ValidationError(f"invalid drop pattern {p!r}: {exc}") from exc

    def drops_line(self, line: str) -> bool:
        if line in self._literals:
            return True
        return any(rx.fullmatch(line) for rx in self._regexes)

    @classmethod
    def from_file(cls, path, max_consecutive_newlines=2):
        """Parse a rules file: symbols under [symbols], patterns under [patterns]."""
        symbols: list[str] = []
        patterns: list[str] = []
        section = None
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("[") and stripped.endswith("]"):
                name = stripped[1:-1]
                if name not in ("symbols", "patterns"):
                    raise ValidationError(f"unknown section {name!r} on line {lineno}")
                section = name
            elif section == "symbols":
                symbols.append(stripped)
            elif section == "patterns":
                patterns.append(stripped)
            else:
                raise ValidationError(
                    f"line {lineno} appears before any [symbols]/[patterns] header"
                )
        return cls(symbols, patterns, max_consecutive_newlines)

    @classmethod
    def default(cls):
        """The versioned default rules shipped with the package."""
        ref = resources.files("lyrebench").joinpath("data", DEFAULT_RULES_RESOURCE)
        with resources.as_file(ref) as path:
            return cls.from_file(path)


class _TextExtractor(HTMLParser):
    """Tolerant tag-stripping pass; block-level and break tags become newlines."""

    NEWLINE_TAGS = {
        "br", "p", "div", "li", "ul", "ol", "tr", "table",
        "h1", "h2", "h3", "h4", "h5", "h6", "section", "article",
    }
    SKIP_TAGS = {"script", "style"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self.SKIP_TAGS:
            self._skip_depth += 1
        elif tag in self.NEWLINE_TAGS:
            self.parts.append("\n")

    def handle_endtag(self, tag):
        if tag in self.SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag in self.NEWLINE_TAGS:
            self.parts.append("\n")

    def handle_startendtag(self, tag, attrs):
        if tag in self.NEWLINE_TAGS:
            self.parts.append("\n")

    def handle_data(self, data):
        if not self._skip_depth:
            self.parts.append(data)


def strip_html(text: str) -> str:
    """Extract text content from (possibly broken) HTML markup."""
    extractor = _TextExtractor()
    extractor.feed(text)
    extractor.close()
    return "".join(extractor.parts)


def compress_newlines(text: str, max_newlines: int = 2) -> str:
    """Cap every run of consecutive newlines at max_newlines."""
    if max_newlines < 1:
        raise ValidationError(f"max_newlines must be >= 1, got {max_newlines}")
    return re.sub(r"\n{%d,}" % (max_newlines + 1), "\n" * max_newlines, text)


def clean_document(doc: Document, rules: CleaningRuleSet | None = None) -> Document:
    """Produce a copy of `doc` with clean_text set.

    Steps: normalize CR/CRLF to LF, strip HTML tags (entities decoded,
    script/style dropped, block tags to newlines), remove strip symbols,
    trim each line and drop boilerplate lines, compress newline runs, and
    trim outer whitespace.  Total: pathological markup degrades to
    text-only output rather than erroring.
    """
    if rules is None:
        rules = CleaningRuleSet.default()
    text = doc.raw_text.replace("\r\n", "\n").replace("\r", "\n")
    text = strip_html(text)
    for symbol in rules.strip_symbols:
        text = text.replace(symbol, "")
    lines = [line.strip() for line in text.split("\n")]
    lines = [line for line in lines if not rules.drops_line(line)]
    text = compress_newlines("\n".join(lines), rules.max_consecutive_newlines)
    return replace(doc, clean_text=text.strip())


def clean_corpus(corpus: Corpus, rules: CleaningRuleSet | None = None, threads: int = 1) -> Corpus:
    """Clean every document; order preserved."""
    if rules is None:
        rules = CleaningRuleSet.default()
    docs = parallel_map(lambda d: clean_document(d, rules), corpus.documents, threads)
    return Corpus(docs, name=corpus.name)


def tokenize(text: str, scheme: str = "unicode-scalar") -> TokenSequence:
    """Tokenize under the given scheme.

    unicode-scalar: one token per Unicode scalar value.
    whitespace: split on runs of Unicode whitespace.
    """
    if scheme == "unicode-scalar":
        return TokenSequence(tuple(text), scheme)
    if scheme == "whitespace":
        return TokenSequence(tuple(text.split()), scheme)
    raise ValidationError(f"unsupported tokenization scheme {scheme!r}")


def corpus_stats(corpus: Corpus, scheme: str = "unicode-scalar", use_raw: bool = False) -> CorpusStats:
    """Song/token/byte counts; token counts under the declared scheme."""
    token_count = 0
    byte_size = 0
    for doc in corpus:
        if not use_raw and doc.clean_text is None:
            raise ValidationError(
                f"document {doc.id!r} has no clean_text; clean first or pass use_raw=True"
            )
        text = doc.raw_text if use_raw else doc.clean_text
        token_count += len(tokenize(text, scheme))
        byte_size += len(text.encode("utf-8"))
    artists = {doc.meta["artist"] for doc in corpus if "artist" in doc.meta}
    return CorpusStats(
        song_count=len(corpus),
        token_count=token_count,
        byte_size=byte_size,
        artist_count=len(artists) if artists else None,
    )


def load_corpus(path, format: str = "jsonl") -> Corpus:
    """Load a corpus from JSONL ({id, text, source?, meta?}) or a directory."""
    path = Path(path)
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "plain-dir":
        return _load_plain_dir(path)
    raise ValidationError(f"unsupported corpus format {format!r}")


def _load_jsonl(path: Path) -> Corpus:
    docs: list[Document] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"malformed JSON on line {lineno}: {exc}") from exc
            if not isinstance(record, dict):
                raise ValidationError(f"record on line {lineno} is not an object")
            if "id" not in record:
                raise ValidationError(f"record missing 'id' on line {lineno}")
            if "text" not in record:
                raise ValidationError(f"record missing 'text' on line {lineno}")
            doc_id = record["id"]
            if not isinstance(doc_id, str) or not doc_id:
                raise ValidationError(f"record on line {lineno} has a non-string or empty id")
            if doc_id in seen:
                raise ValidationError(
                    f"duplicate id {doc_id!r} on lines {seen[doc_id]} and {lineno}"
                )
            seen[doc_id] = lineno
            meta = record.get("meta") or {}
            if not isinstance(meta, dict):
                raise ValidationError(f"record on line {lineno} has a non-object meta")
            docs.append(
                Document(
                    id=doc_id,
                    raw_text=record["text"],
                    source=record.get("source", ""),
                    meta={str(k): str(v) for k, v in meta.items()},
                )
            )
    return Corpus(docs, name=path.stem)


def _load_plain_dir(path: Path) -> Corpus:
    if not path.is_dir():
        raise ValidationError(f"{path} is not a directory")
    docs = []
    for file in sorted(p for p in path.iterdir() if p.is_file()):
        docs.append(Document(id=file.name, raw_text=file.read_text(encoding="utf-8")))
    return Corpus(docs, name=path.name)


def save_corpus(corpus: Corpus, path) -> None:
    """Write JSONL; the text column holds clean_text when set, else raw_text."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus:
            record: dict = {"id": doc.id, "text": doc.effective_text()}
            if doc.source:
                record["source"] = doc.source
            if doc.meta:
                record["meta"] = doc.meta
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
