"""Token shape shared by both lexers; kinds differ per language."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Token:
    kind: str
    lexeme: str
    line: int  # 1-based
    start: int  # 0-based column, inclusive
    end: int  # 0-based column, exclusive

    def span(self):
        return (self.line, self.start, self.end)
