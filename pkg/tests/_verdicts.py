"""One pass/fail line per acceptance criterion, printed at the end of the run."""

VERDICTS = {}


def verdict(tag, ok, detail):
    VERDICTS[tag] = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    assert ok, VERDICTS[tag]
