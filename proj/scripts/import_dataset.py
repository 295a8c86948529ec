#!/usr/bin/env python3
"""Convert public benchmark distributions into the problems.jsonl schema.

Output schema (one JSON object per line):
    id              unique problem id (string)
    statement       problem text
    expected_answer canonical answer (string; numeric where applicable)
    domain          optional: Algebra|Combinatorics|Geometry|Number Theory|Other
    difficulty      optional: Easy|Medium|Hard
    source          dataset name

Field mappings:
  aime (CSV, e.g. the Kaggle "AIME problems 1983-2024" export)
      ID/Year+Problem Number -> id, Question -> statement, Answer -> expected_answer
  mathodyssey (JSONL, Hugging Face MathOdyssey)
      question/problem -> statement, answer/final_answer -> expected_answer,
      label/category -> domain (best effort), id/index -> id

Usage:
    import_dataset.py aime input.csv out.jsonl
    import_dataset.py mathodyssey input.jsonl out.jsonl
"""

import csv
import json
import sys

DOMAINS = {"algebra", "combinatorics", "geometry", "number theory", "other"}


def pick(row, *names):
    for name in names:
        for key in row:
            if key.strip().lower() == name:
                value = row[key]
                if value is not None and str(value).strip():
                    return str(value).strip()
    return None


def normalize_domain(value):
    if not value:
        return None
    label = " ".join(value.strip().lower().split())
    if label in DOMAINS:
        return label.title() if label != "number theory" else "Number Theory"
    return None


def convert_aime(in_path, out_path):
    count = 0
    with open(in_path, newline="", encoding="utf-8") as fin, \
         open(out_path, "w", encoding="utf-8") as fout:
        for row in csv.DictReader(fin):
            statement = pick(row, "question", "problem", "statement")
            answer = pick(row, "answer", "expected_answer", "solution")
            if not statement or answer is None:
                continue
            problem_id = pick(row, "id")
            if not problem_id:
                year = pick(row, "year") or "unknown"
                number = pick(row, "problem number", "number") or str(count + 1)
                problem_id = f"aime-{year}-{number}"
            record = {
                "id": problem_id,
                "statement": statement,
                "expected_answer": answer,
                "source": "AIME",
            }
            fout.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count


def convert_mathodyssey(in_path, out_path):
    count = 0
    with open(in_path, encoding="utf-8") as fin, \
         open(out_path, "w", encoding="utf-8") as fout:
        for line_number, line in enumerate(fin, 1):
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            statement = pick(row, "question", "problem", "statement")
            answer = pick(row, "answer", "final_answer", "expected_answer")
            if not statement or answer is None:
                print(f"skipping line {line_number}: no question/answer", file=sys.stderr)
                continue
            record = {
                "id": pick(row, "id", "index") or f"odyssey-{line_number}",
                "statement": statement,
                "expected_answer": answer,
                "source": "MathOdyssey",
            }
            domain = normalize_domain(pick(row, "label", "category", "domain", "field"))
            if domain:
                record["domain"] = domain
            fout.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count


def main(argv):
    if len(argv) != 4 or argv[1] not in {"aime", "mathodyssey"}:
        print(__doc__, file=sys.stderr)
        return 2
    converter = convert_aime if argv[1] == "aime" else convert_mathodyssey
    count = converter(argv[2], argv[3])
    print(f"wrote {count} problems to {argv[3]}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
