"""Dataset emission: sources in, validated interchange records out."""

from __future__ import annotations

import json
import os
import sys

from . import javaextract, javaparse, pyextract
from .tree import to_record

LANGUAGES = ("java", "python")


class ExtractionError(Exception):
    pass


def _iter_source_files(path, suffix):
    for dirpath, _dirnames, filenames in os.walk(path):
        for name in sorted(filenames):
            if name.endswith(suffix):
                yield os.path.join(dirpath, name)


def _records_from_python(code, summary, origin, skips):
    try:
        pairs = list(pyextract.extract_python(code, origin))
    except (SyntaxError, ValueError) as exc:
        skips.append((origin, "unparseable: %s" % exc))
        return
    if summary is not None:
        # raw pair: the comment belongs to the whole snippet
        usable = [p for p in pairs if p[3] is not None]
        if not usable:
            skips.append((origin, "no extractable function"))
            return
        name, func_code, _doc, tree = usable[0]
        yield name, func_code, summary, tree
        return
    for name, func_code, doc, tree in pairs:
        if tree is None:
            skips.append((name, "docstring-only body"))
        elif not doc:
            skips.append((name, "empty docstring"))
        else:
            yield name, func_code, doc, tree


def _records_from_java_source(source, origin, skips):
    found = False
    for i, (summary, method_text) in enumerate(javaextract.documented_methods(source)):
        found = True
        name = "%s:m%d" % (origin, i)
        if not summary:
            skips.append((name, "empty comment"))
            continue
        yield from _java_pair(method_text, summary, name, skips)
    if not found:
        skips.append((origin, "no documented method"))


def _java_pair(code, summary, origin, skips):
    try:
        tree = javaparse.parse_method(code)
    except javaparse.JavaParseError as exc:
        skips.append((origin, "unparseable: %s" % exc))
        return
    yield origin, code, summary, tree


def iter_raw_pairs(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExtractionError("%s:%d: invalid JSON (%s)" % (path, lineno, exc))
            code = rec.get("code")
            comment = rec.get("comment", rec.get("summary"))
            if not isinstance(code, str):
                raise ExtractionError("%s:%d: missing 'code'" % (path, lineno))
            yield lineno, code, comment


def extract(input_path, language, out=sys.stdout, log=sys.stderr):
    """Emit dataset JSONL for a source directory or raw-pair JSONL file.

    Unusable records are skipped with a reason; returns (emitted,
    skipped) counts.
    """
    if language not in LANGUAGES:
        raise ExtractionError("unsupported language %r" % (language,))
    skips = []
    produced = []
    if os.path.isdir(input_path):
        suffix = ".java" if language == "java" else ".py"
        for path in _iter_source_files(input_path, suffix):
            with open(path, encoding="utf-8") as fh:
                source = fh.read()
            origin = os.path.relpath(path, input_path)
            if language == "java":
                produced.extend(_records_from_java_source(source, origin, skips))
            else:
                produced.extend(_records_from_python(source, None, origin, skips))
    elif os.path.isfile(input_path):
        for lineno, code, comment in iter_raw_pairs(input_path):
            origin = "line%d" % lineno
            if not comment or not str(comment).strip():
                skips.append((origin, "empty comment"))
                continue
            if language == "java":
                produced.extend(_java_pair(code, str(comment), origin, skips))
            else:
                produced.extend(_records_from_python(code, str(comment), origin, skips))
    else:
        raise ExtractionError("input not found: %s" % input_path)

    emitted = 0
    for name, code, summary, tree in sorted(produced, key=lambda r: r[0]):
        record = {
            "id": name,
            "code": code,
            "summary": summary,
            "ast": to_record(tree),
        }
        out.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
        emitted += 1
    for origin, reason in skips:
        print("skip %s: %s" % (origin, reason), file=log)
    print("emitted %d records, skipped %d" % (emitted, len(skips)), file=log)
    return emitted, len(skips)
