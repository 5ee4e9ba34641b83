"""Collects the one-line acceptance verdicts for the terminal summary."""

LINES = []


def verdict(number, ok: bool, detail: str) -> str:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    LINES.append(line)
    return line


def note(number, detail: str) -> str:
    line = f"criterion {number:>2}: INFO  {detail}"
    print(line)
    LINES.append(line)
    return line
