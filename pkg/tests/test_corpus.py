import json

import pytest
from hypothesis import given, strategies as st

from deeptrace.corpus import Category, Corpus, Query, dump_corpus, filter_by_category, load_corpus
from deeptrace.errors import DuplicateId, EmptyCorpus, MalformedRecord


def _write(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


@pytest.fixture
def split_corpus(tmp_path):
    rows = [{"id": f"d{i}", "text": f"debate question {i}?", "category": "debate"} for i in range(168)]
    rows += [{"id": f"e{i}", "text": f"expertise question {i}?", "category": "Expertise"} for i in range(135)]
    return load_corpus(_write(tmp_path / "deeptrace.jsonl", rows))


def test_load_303_question_split(split_corpus):
    assert len(split_corpus) == 303
    assert split_corpus.name == "deeptrace"


def test_filter_debate_subset(split_corpus):
    debate = filter_by_category(split_corpus, Category.DEBATE)
    assert len(debate) == 168
    assert all(q.is_debate for q in debate)
    assert len(filter_by_category(split_corpus, "expertise")) == 135


def test_empty_file(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("\n\n", encoding="utf-8")
    with pytest.raises(EmptyCorpus):
        load_corpus(p)


def test_duplicate_id(tmp_path):
    p = _write(tmp_path / "dup.jsonl", [
        {"id": "q1", "text": "a?", "category": "debate"},
        {"id": "q1", "text": "b?", "category": "expertise"},
    ])
    with pytest.raises(DuplicateId) as exc:
        load_corpus(p)
    assert exc.value.query_id == "q1"


@pytest.mark.parametrize(
    "line, lineno",
    [
        ('{"id": "q1", "text": "a?", "category": "debate"}\n{bad json\n', 2),
        ('{"id": "q1", "text": "a?"}\n', 1),
        ('{"id": "q1", "text": "   ", "category": "debate"}\n', 1),
        ('{"id": "q1", "text": "a?", "category": "opinion"}\n', 1),
        ('["q1", "a?", "debate"]\n', 1),
    ],
)
def test_malformed_records_report_line(tmp_path, line, lineno):
    p = tmp_path / "bad.jsonl"
    p.write_text(line, encoding="utf-8")
    with pytest.raises(MalformedRecord) as exc:
        load_corpus(p)
    assert exc.value.line == lineno


def test_only_expertise_filtered_to_debate_is_empty():
    c = Corpus((Query("e1", "x?", Category.EXPERTISE),))
    assert len(filter_by_category(c, Category.DEBATE)) == 0


def test_mixed_filter_preserves_order():
    c = Corpus((
        Query("a", "first?", Category.DEBATE),
        Query("b", "second?", Category.EXPERTISE),
        Query("c", "third?", Category.DEBATE),
    ))
    assert [q.id for q in filter_by_category(c, Category.DEBATE)] == ["a", "c"]


queries = st.lists(
    st.tuples(
        st.text(min_size=1, max_size=8),
        st.text(min_size=1, max_size=30).filter(lambda s: s.strip()),
        st.sampled_from(list(Category)),
    ),
    min_size=1,
    max_size=20,
    unique_by=lambda t: t[0],
)


@given(queries)
def test_roundtrip_and_partition(tmp_path_factory, rows):
    corpus = Corpus(tuple(Query(i, t, c) for i, t, c in rows))
    path = tmp_path_factory.mktemp("rt") / "c.jsonl"
    dump_corpus(corpus, path)
    assert load_corpus(path).queries == corpus.queries
    n_d = len(filter_by_category(corpus, Category.DEBATE))
    n_e = len(filter_by_category(corpus, Category.EXPERTISE))
    assert n_d + n_e == len(corpus)
