#!/usr/bin/env python3
"""Run the oracle corpus through Scryer Prolog and freeze the results.

Reads crates/core/tests/oracle/cases.json and writes expected.json next to it.
Each case records the text the query writes between solutions, the bindings of every solution
(or only the first when max_solutions is 1) and whether the run succeeded,
failed, or raised an error.

Usage: tools/freeze_oracle.py [path/to/scryer-prolog]
"""

import json
import re
import subprocess
import sys
import tempfile
from pathlib import Path

ORACLE = Path(__file__).resolve().parent.parent / "crates/core/tests/oracle"
TOKEN = re.compile(r"'(?:[^'\\]|\\.)*'|\b[A-Z_][A-Za-z0-9_]*")
MARK = re.compile(r"<<B ([A-Za-z0-9_]+)=(.*?)>>|<<S>>|<<END>>|<<ERR (.*?)>>", re.S)


def query_vars(query):
    seen = []
    for tok in TOKEN.findall(query):
        if tok.startswith("'") or tok.startswith("_") or tok in seen:
            continue
        seen.append(tok)
    return seen


def driver(case):
    names = query_vars(case["query"])
    report = "".join(
        f"write('<<B {n}='), writeq({n}), write('>>'), " for n in names
    ) + "write('<<S>>')"
    goal = case["query"].rstrip().rstrip(".")
    if case["max_solutions"] == 1:
        body = f"( ({goal}) -> {report} ; true ), write('<<END>>')"
    else:
        body = f"( ({goal}), {report}, fail ; write('<<END>>') )"
    return f"'$run' :- catch(({body}), E, (write('<<ERR '), writeq(E), write('>>'))), nl.\n"


def run(scryer, case):
    src = "".join(f":- dynamic({p}).\n" for p in case["dynamic"])
    src += case["program"] + "\n" + driver(case)
    with tempfile.NamedTemporaryFile("w", suffix=".pl", delete=False) as f:
        f.write(src)
        path = f.name
    proc = subprocess.run(
        [scryer, "-g", "'$run'", "-g", "halt", path],
        capture_output=True, text=True, timeout=60, stdin=subprocess.DEVNULL,
    )
    Path(path).unlink()
    text = proc.stdout
    if text.endswith("\n"):
        text = text[:-1]
    # output[i] is the text written before solution i+1; the last entry is
    # what follows the last solution
    output, solutions, current, outcome = [""], [], [], None
    pos = 0
    for m in MARK.finditer(text):
        output[-1] += text[pos:m.start()]
        pos = m.end()
        if m.group(1):
            current.append([m.group(1), m.group(2)])
        elif m.group(0) == "<<S>>":
            solutions.append(current)
            current = []
            output.append("")
        elif m.group(0) == "<<END>>":
            outcome = "success" if solutions else "failure"
        else:
            outcome = "error"
    output[-1] += text[pos:]
    if outcome is None:
        raise RuntimeError(f"{case['name']}: no outcome in {proc.stdout!r} {proc.stderr!r}")
    return {
        "name": case["name"],
        "output": output,
        "solutions": solutions,
        "outcome": outcome,
    }


def main():
    scryer = sys.argv[1] if len(sys.argv) > 1 else "scryer-prolog"
    cases = json.loads((ORACLE / "cases.json").read_text())
    version = subprocess.run([scryer, "--version"], capture_output=True, text=True).stdout.strip()
    results = []
    for c in cases:
        print(c["name"], file=sys.stderr, flush=True)
        results.append(run(scryer, c))
    frozen = {"reference": f"scryer-prolog {version}", "cases": results}
    (ORACLE / "expected.json").write_text(json.dumps(frozen, indent=2) + "\n")
    for r in results:
        print(f"{r['name']:28} {r['outcome']:8} {len(r['solutions'])} solution(s)")


if __name__ == "__main__":
    main()
