import io
import json
import os
import subprocess
import sys

import pytest

from extractor.extract import extract
from extractor.pyextract import extract_python
from extractor.stats import compute_stats

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def _run_extract(input_path, language):
    out = io.StringIO()
    log = io.StringIO()
    emitted, skipped = extract(input_path, language, out=out, log=log)
    records = [json.loads(line) for line in out.getvalue().splitlines()]
    return records, emitted, skipped, log.getvalue()


def test_python_fixture_extraction():
    records, emitted, skipped, _ = _run_extract(os.path.join(FIXTURES, "python"), "python")
    assert emitted >= 50
    assert skipped == 0
    assert all(set(r) == {"id", "code", "summary", "ast"} for r in records)
    assert all(r["summary"].strip() for r in records)
    assert all("def " in r["code"] for r in records)
    # docstrings are stripped from the emitted code
    assert all('"""' not in r["code"] for r in records)


def test_java_fixture_extraction():
    records, emitted, skipped, _ = _run_extract(os.path.join(FIXTURES, "java"), "java")
    assert emitted >= 50
    assert skipped == 0
    assert all(r["code"].rstrip().endswith("}") for r in records)


def test_extraction_is_deterministic():
    a = _run_extract(os.path.join(FIXTURES, "java"), "java")[0]
    b = _run_extract(os.path.join(FIXTURES, "java"), "java")[0]
    assert a == b


def test_python_skips_undocumented_functions(tmp_path):
    src = tmp_path / "mod.py"
    src.write_text(
        'def documented(x):\n    """Add one to x."""\n    return x + 1\n\n'
        "def bare(y):\n    return y\n"
    )
    records, emitted, skipped, log = _run_extract(str(tmp_path), "python")
    assert emitted == 1
    assert skipped == 1
    assert "empty docstring" in log


def test_python_unparseable_file_skipped(tmp_path):
    (tmp_path / "broken.py").write_text("def broken(:\n    pass\n")
    records, emitted, skipped, log = _run_extract(str(tmp_path), "python")
    assert emitted == 0
    assert skipped == 1
    assert "unparseable" in log


def test_java_unparseable_method_skipped(tmp_path):
    (tmp_path / "Weird.java").write_text(
        "/** Uses a lambda. */\n"
        "public void each(List<String> xs) { xs.forEach(x -> print(x)); }\n"
    )
    records, emitted, skipped, log = _run_extract(str(tmp_path), "java")
    assert emitted == 0
    assert skipped == 1
    assert "unparseable" in log


def test_raw_pair_jsonl_input(tmp_path):
    pairs = tmp_path / "pairs.jsonl"
    with open(pairs, "w") as fh:
        fh.write(json.dumps({
            "code": 'def get_image_file_path(instance):\n    return join(instance, "disk")',
            "comment": "Generate the full path for an instances disk.",
        }) + "\n")
        fh.write(json.dumps({"code": "def x():\n    return 1", "comment": "  "}) + "\n")
    records, emitted, skipped, _ = _run_extract(str(pairs), "python")
    assert emitted == 1
    assert skipped == 1
    assert records[0]["summary"].startswith("Generate")
    labels = [n["label"] for n in records[0]["ast"]["nodes"]]
    assert "ter_get_image_file_path" in labels


def test_table_style_python_sample_has_marked_leaves():
    source = (
        "def get_image_file_path(instance):\n"
        '    """Generate the full path for an instances disk."""\n'
        "    return os.path.join(CONF.instances_path, instance['name'], 'disk')\n"
    )
    pairs = list(extract_python(source, "sample"))
    assert len(pairs) == 1
    _name, code, summary, tree = pairs[0]
    from extractor.tree import to_record

    labels = [n["label"] for n in to_record(tree)["nodes"]]
    assert "ter_get_image_file_path" in labels
    assert summary == "Generate the full path for an instances disk."


def test_emitted_records_validate_and_preprocess(tmp_path):
    """Acceptance: every emitted record passes the primary pipeline."""
    total = 0
    dataset = tmp_path / "ds.jsonl"
    with open(dataset, "w") as out:
        for lang in ("java", "python"):
            records, emitted, _, _ = _run_extract(os.path.join(FIXTURES, lang), lang)
            total += emitted
            for r in records:
                out.write(json.dumps(r, sort_keys=True) + "\n")
    assert total >= 100
    prep = tmp_path / "prep"
    proc = subprocess.run(
        [sys.executable, "-m", "codesum.cli", "preprocess",
         "--data", str(dataset), "--out", str(prep)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "skipped" in proc.stdout
    meta = json.loads((prep / "meta.json").read_text())
    assert meta["skipped"] == 0
    assert sum(meta["counts"].values()) == total


def test_stats_on_extracted_corpus(tmp_path):
    dataset = tmp_path / "ds.jsonl"
    records, _, _, _ = _run_extract(os.path.join(FIXTURES, "python"), "python")
    with open(dataset, "w") as out:
        for r in records:
            out.write(json.dumps(r) + "\n")
    stats = compute_stats(str(dataset))
    assert stats["ast_max_nodes"] >= stats["ast_avg_nodes"] > 0
    assert stats["code_avg_len"] > 0
    assert stats["nl_unique_tokens"] > 0


def test_stats_empty_and_malformed(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    stats = compute_stats(str(empty))
    assert stats["samples"] == 0
    assert "warning" in stats

    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "x"}\n')
    from extractor.stats import StatsError

    with pytest.raises(StatsError) as err:
        compute_stats(str(bad))
    assert ":1:" in str(err.value)


def test_two_sample_hand_stats(tmp_path):
    dataset = tmp_path / "two.jsonl"
    recs = [
        {"id": "a", "code": "x = 1", "summary": "set x",
         "ast": {"nodes": [{"id": 0, "label": "ter_x", "children": []}]}},
        {"id": "b", "code": "y = x + 1", "summary": "bump y now",
         "ast": {"nodes": [
             {"id": 0, "label": "n", "children": [1]},
             {"id": 1, "label": "ter_y", "children": []}]}},
    ]
    with open(dataset, "w") as fh:
        for r in recs:
            fh.write(json.dumps(r) + "\n")
    stats = compute_stats(str(dataset))
    assert stats["samples"] == 2
    assert stats["code_avg_len"] == (3 + 5) / 2
    assert stats["nl_avg_len"] == (2 + 3) / 2
    assert stats["ast_max_nodes"] == 2
    assert stats["ast_avg_nodes"] == 1.5
