"""CoNLL data handling and entity-level scoring.

Corpora are blank-line-separated sentences, one token per line, with the
tag in the last column and an optional morphological analysis between.
Scoring is strict span matching: a predicted entity counts only when both
its type and its exact boundaries agree with the gold annotation.
"""

from seqtag.data import parse_conll, serialize_conll, validate_bio2
from seqtag.evaluation import extract_spans, report_table, score

SNIPPET = """\
Orhan\torhan+Noun+Prop+A3sg+Nom\tB-PERSON
Pamuk\tpamuk+Noun+Prop+A3sg+Nom\tI-PERSON
dün\tdün+Adv\tO
İstanbul'a\tistanbul+Noun+Prop+A3sg+Dat\tB-LOCATION
geldi\tgel+Verb+Pos+Past+A3sg\tO
.\t.+Punc\tO
"""

sentences = parse_conll(SNIPPET.splitlines())
sent = sentences[0]
print("surfaces:", sent.surfaces)
print("morphs:  ", sent.morphs)
print("tags:    ", sent.tags)
validate_bio2(sent, mode="strict")

spans = extract_spans(sent.tags)
for span in spans:
    print(f"entity {span.type:10s} tokens[{span.start}:{span.end}]"
          f" = {' '.join(sent.surfaces[span.start:span.end])}")

# a prediction that clips the person to one token: right type, wrong span
pred = ["B-PERSON", "O", "O", "B-LOCATION", "O", "O"]
report = score([sent.tags], [pred])
print()
print(report_table(report))

# round-trip: serialize back out and reparse
again = parse_conll(serialize_conll(sentences).splitlines())
assert [s.tags for s in again] == [s.tags for s in sentences]
print("\nserialize -> parse round-trip holds")
