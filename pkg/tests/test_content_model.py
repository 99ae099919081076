"""
Tests for content items, serialization, masks, caps and corpus I/O.
"""
import json
import random

import pytest

from mixplan.content_model import (
    MAX_ELEMENTS,
    MAX_ITEMS,
    SEGMENTER,
    ContentItem,
    ItemMask,
    Sample,
    cap_concepts,
    corpus_statistics,
    load_corpus,
    mask_item,
    save_corpus,
    serialize_item,
    to_record,
)
from mixplan.error_handler import CorpusFormatError, CorpusValidationError, DataError, SerializationError

def _record(sample_id="r0", num_items=2, **overrides):
    items = [
        {"entities": [f"E{i}"], "core_concepts": [f"c{i}"], "expanded_concepts": []}
        for i in range(num_items)
    ]
    record = {
        "id": sample_id,
        "title": "Some Title",
        "items": items,
        "target": " ".join(f"w{i}" for i in range(num_items)),
        "plan_labels": list(range(num_items)),
    }
    record.update(overrides)
    return record

def _write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")

class TestSerializeItem:
    def test_title_entities_and_sorted_concepts(self):
        item = ContentItem(
            entities=frozenset(["United_States"]),
            core_concepts=frozenset(["refuse"]),
            expanded_concepts=frozenset(["guarantee"]),
        )
        serialized = serialize_item("Arafat Visa Refusal".split(), item)
        assert " ".join(serialized.tokens) == "Arafat Visa Refusal <s> United_States <s> guarantee refuse"

    def test_empty_entity_segment(self):
        item = ContentItem(core_concepts=frozenset(["x"]))
        assert " ".join(serialize_item(["T"], item).tokens) == "T <s> <s> x"

    def test_claim_adds_third_segmenter(self):
        item = ContentItem(entities=frozenset(["Coal"]), claim="Coal is not reliable")
        serialized = serialize_item(["Energy"], item)
        assert serialized.segmenter_count == 3
        assert list(serialized.tokens[-4:]) == ["Coal", "is", "not", "reliable"]

    def test_deterministic_for_equal_items(self):
        a = ContentItem(entities=frozenset(["B", "A"]), core_concepts=frozenset(["z", "y"]))
        b = ContentItem(entities=frozenset(["A", "B"]), core_concepts=frozenset(["y", "z"]))
        assert serialize_item(["t"], a) == serialize_item(["t"], b)

    def test_rejects_segmenter_inside_element(self):
        item = ContentItem(entities=frozenset([f"A{SEGMENTER}B"]))
        with pytest.raises(SerializationError):
            serialize_item(["T"], item)

    def test_rejects_empty_title(self):
        with pytest.raises(SerializationError):
            serialize_item([], ContentItem())

    def test_composite_item_emits_title_once(self):
        parts = (
            ContentItem(entities=frozenset(["A"]), core_concepts=frozenset(["x"])),
            ContentItem(entities=frozenset(["B"]), core_concepts=frozenset(["y"])),
        )
        serialized = serialize_item(["T"], ContentItem(parts=parts))
        assert " ".join(serialized.tokens) == "T <s> A <s> x <s> B <s> y"

class TestContentItemValidation:
    def test_core_and_expanded_must_be_disjoint(self):
        with pytest.raises(ValueError):
            ContentItem(core_concepts=frozenset(["a"]), expanded_concepts=frozenset(["a"]))

    def test_concepts_must_be_lowercase(self):
        with pytest.raises(ValueError):
            ContentItem(core_concepts=frozenset(["Attack"]))

    def test_empty_claim_rejected(self):
        with pytest.raises(ValueError):
            ContentItem(claim="  ")

    def test_labels_must_index_items(self):
        with pytest.raises(ValueError):
            Sample(id="x", title="T", items=(ContentItem(),), target="a b", plan_labels=(0, 1))

    def test_label_count_must_match_target(self):
        with pytest.raises(ValueError):
            Sample(id="x", title="T", items=(ContentItem(),), target="a b", plan_labels=(0,))

class TestMasksAndCaps:
    def test_mask_claims_and_expanded(self):
        item = ContentItem(
            entities=frozenset(["A"]),
            core_concepts=frozenset(["x"]),
            expanded_concepts=frozenset(["y"]),
            claim="A should x .",
        )
        masked = mask_item(item, [ItemMask.CLAIMS, ItemMask.EXPANDED_CONCEPTS])
        assert masked.claim is None
        assert masked.expanded_concepts == frozenset()
        assert masked.core_concepts == frozenset(["x"])
        assert masked.entities == frozenset(["A"])

    def test_mask_concepts_removes_both_kinds(self):
        item = ContentItem(core_concepts=frozenset(["x"]), expanded_concepts=frozenset(["y"]))
        masked = mask_item(item, ["concepts"])
        assert masked.concepts == frozenset()

    def test_no_mask_returns_same_item(self):
        item = ContentItem(entities=frozenset(["A"]))
        assert mask_item(item, []) is item

    def test_concept_cap_keeps_core_first(self):
        core = [f"core{i:02d}" for i in range(15)]
        expanded = [f"exp{i:02d}" for i in range(10)]
        kept_core, kept_expanded = cap_concepts(core, expanded)
        assert kept_core == sorted(core)
        assert kept_expanded == sorted(expanded)[:MAX_ELEMENTS - 15]

class TestCorpusIO:
    def test_loads_two_lines(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        _write_lines(path, [_record("a"), _record("b")])
        samples = load_corpus(path)
        assert [s.id for s in samples] == ["a", "b"]

    def test_item_cap_keeps_first_ten(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        _write_lines(path, [_record(num_items=11)])
        sample = load_corpus(path)[0]
        assert len(sample.items) == MAX_ITEMS
        assert sample.items[0].entities == frozenset(["E0"])
        assert sample.plan_labels[-1] is None
        assert sample.plan_labels[:MAX_ITEMS] == tuple(range(MAX_ITEMS))

    def test_element_cap_is_lexicographic(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        record = _record(num_items=1)
        record["items"][0]["entities"] = [f"E{i:02d}" for i in range(25, 0, -1)]
        _write_lines(path, [record])
        entities = load_corpus(path)[0].items[0].entities
        assert sorted(entities) == [f"E{i:02d}" for i in range(1, MAX_ELEMENTS + 1)]

    def test_missing_target_names_field(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        record = _record()
        del record["target"]
        _write_lines(path, [_record("ok"), record])
        with pytest.raises(CorpusValidationError) as excinfo:
            load_corpus(path)
        assert excinfo.value.field == "target"
        assert excinfo.value.line_number == 2

    def test_malformed_line_carries_line_number(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(json.dumps(_record()) + "\n{not json\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError) as excinfo:
            load_corpus(path)
        assert excinfo.value.line_number == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_corpus(tmp_path / "absent.jsonl")

    def test_empty_list_writes_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        save_corpus([], path)
        assert path.read_text(encoding="utf-8") == ""
        assert load_corpus(path) == []

    def test_round_trip_random_samples(self, tmp_path):
        rng = random.Random(7)
        samples = []
        for index in range(100):
            num_items = rng.randint(1, 4)
            items = tuple(
                ContentItem(
                    entities=frozenset(rng.sample(["A", "B_c", "D"], rng.randint(0, 2))),
                    core_concepts=frozenset(rng.sample(["run", "make"], rng.randint(0, 2))),
                    expanded_concepts=frozenset(rng.sample(["tree", "car"], rng.randint(0, 2))),
                    claim=rng.choice([None, "this is a claim ."]),
                )
                for _ in range(num_items)
            )
            length = rng.randint(1, 8)
            labels = tuple(rng.choice([None] + list(range(num_items))) for _ in range(length))
            samples.append(Sample(
                id=f"s{index}",
                title="Title Words",
                items=items,
                target=" ".join(f"tok{i}" for i in range(length)),
                plan_labels=labels,
            ))
        path = tmp_path / "random.jsonl"
        save_corpus(samples, path)
        assert load_corpus(path) == samples

    def test_composite_items_round_trip(self, tmp_path, make_sample):
        sample = make_sample()
        composite = sample.model_copy(update={"items": (ContentItem(parts=sample.items),),
                                              "plan_labels": tuple(0 for _ in sample.plan_labels)})
        path = tmp_path / "composite.jsonl"
        save_corpus([composite], path)
        assert load_corpus(path) == [composite]
        assert "parts" in to_record(composite)["items"][0]

def test_corpus_statistics(make_sample):
    samples = [make_sample("a", claims=[True, False]), make_sample("b", sentences=["one two three ."], claims=[True])]
    stats = corpus_statistics(samples)
    assert stats.num_samples == 2
    assert stats.avg_items == pytest.approx(1.5)
    assert stats.claim_item_share == pytest.approx(200 / 3)
    assert stats.avg_entities == pytest.approx(1.0)
