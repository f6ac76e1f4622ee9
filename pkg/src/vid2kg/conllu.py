"""Reader for dependency parses in CoNLL-U form.

Only the columns the extraction rules consume are modeled: id, form,
lemma (lowercased), upos, head, deprel.  Multiword-token ranges and
empty nodes are skipped.  Tokens are kept 1-indexed to match the head
column; head 0 marks the root.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from vid2kg.errors import DataError


@dataclass(frozen=True)
class DependencyToken:
    index: int
    form: str
    lemma: str
    upos: str
    head: int
    deprel: str


@dataclass(frozen=True)
class DependencySentence:
    tokens: tuple[DependencyToken, ...]
    text: str = ""

    def token(self, index: int) -> DependencyToken:
        return self.tokens[index - 1]

    def root(self) -> DependencyToken:
        for tok in self.tokens:
            if tok.head == 0:
                return tok
        raise DataError("sentence has no root token")

    def dependents(self, head: int, deprel: str | None = None):
        out = [t for t in self.tokens if t.head == head]
        if deprel is not None:
            out = [t for t in out if t.deprel == deprel]
        return out

    def first_dependent(self, head: int, deprel: str) -> DependencyToken | None:
        for tok in self.tokens:
            if tok.head == head and tok.deprel == deprel:
                return tok
        return None


@dataclass
class _Block:
    rows: list = field(default_factory=list)
    text: str = ""
    start_line: int = 0


def _finish(block: _Block) -> DependencySentence:
    tokens = []
    expected = 1
    for lineno, cols in block.rows:
        idx = int(cols[0])
        if idx != expected:
            raise DataError(f"line {lineno}: token id {idx} out of sequence")
        expected += 1
        lemma = cols[2].lower()
        if lemma == "_":
            lemma = cols[1].lower()
        tokens.append(
            DependencyToken(idx, cols[1], lemma, cols[3], int(cols[6]), cols[7])
        )
    n = len(tokens)
    roots = [t for t in tokens if t.head == 0]
    for t in tokens:
        if not 0 <= t.head <= n:
            raise DataError(
                f"line {block.start_line}: head {t.head} of token {t.index} out of range"
            )
    if len(roots) != 1:
        raise DataError(
            f"line {block.start_line}: sentence must have exactly one root, found {len(roots)}"
        )
    text = block.text or " ".join(t.form for t in tokens)
    return DependencySentence(tuple(tokens), text)


def parse_conllu(text: str) -> list[DependencySentence]:
    """Parse CoNLL-U text into sentences; errors name the offending line."""
    sentences = []
    block = _Block()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            if block.rows:
                sentences.append(_finish(block))
                block = _Block()
            continue
        if line.startswith("#"):
            comment = line[1:].strip()
            if comment.startswith("text") and "=" in comment:
                key, _, value = comment.partition("=")
                if key.strip() == "text":
                    block.text = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise DataError(f"line {lineno}: expected 10 tab-separated columns, got {len(cols)}")
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue
        try:
            int(tok_id)
        except ValueError:
            raise DataError(f"line {lineno}: token id {tok_id!r} is not an integer") from None
        try:
            int(cols[6])
        except ValueError:
            raise DataError(f"line {lineno}: head {cols[6]!r} is not an integer") from None
        if not block.rows:
            block.start_line = lineno
        block.rows.append((lineno, cols))
    if block.rows:
        sentences.append(_finish(block))
    return sentences


def read_conllu(path) -> list[DependencySentence]:
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh.read())
