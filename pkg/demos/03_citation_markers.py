# Reading citation markers
#
# Answers cite sources with bracketed numbers. The parser accepts [n],
# [n, m], ranges [n-m], and runs like [1][2]. Anything else in brackets is
# prose. Indices outside 1..K are kept but flagged as dangling.

from __future__ import annotations

from deeptrace.transcript import attach_marks, parse_citation_marks, strip_citation_marks

answer = (
    "Solar capacity doubled last year [1][4]. "
    "Prices fell [2-3], though critics disagree [sic]. "
    "One claim cites a source that was never listed [9]."
)

marks = parse_citation_marks(answer, 5)
for m in marks:
    print(repr(answer[m.span[0] : m.span[1]]), "->", sorted(m.source_indices), "dangling" if m.dangling else "")

# Marks attach to the sentence whose span contains them. A marker that trails
# just after a sentence's full stop belongs to that sentence.
spans = [(0, 40), (41, 91), (92, len(answer))]
for m in attach_marks(marks, spans):
    print("sentence", m.sentence, "cites", sorted(m.valid_indices))

# For display, or for judging a sentence without its markers:
print(strip_citation_marks(answer))
