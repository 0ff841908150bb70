// Token spans -> renderable line segments. Pure, so the views (and tests)
// share one implementation of span math.

import { TokenSpan } from "./state.js";

export interface Segment {
  text: string;
  kind: string | null; // null = plain text between tokens
}

export function segmentLines(source: string, tokens: TokenSpan[]): Segment[][] {
  const lines = source.split("\n");
  const byLine = new Map<number, TokenSpan[]>();
  for (const token of tokens) {
    if (token.end <= token.start) continue;
    const bucket = byLine.get(token.line);
    if (bucket) {
      bucket.push(token);
    } else {
      byLine.set(token.line, [token]);
    }
  }
  return lines.map((text, i) => {
    const spans = (byLine.get(i + 1) ?? []).slice().sort((a, b) => a.start - b.start);
    const segments: Segment[] = [];
    let col = 0;
    for (const span of spans) {
      if (span.start > col) {
        segments.push({ text: text.slice(col, span.start), kind: null });
      }
      segments.push({ text: text.slice(span.start, span.end), kind: span.kind });
      col = span.end;
    }
    if (col < text.length) {
      segments.push({ text: text.slice(col), kind: null });
    }
    return segments;
  });
}
