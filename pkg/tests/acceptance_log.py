import time
from contextlib import contextmanager

LINES: list[str] = []


@contextmanager
def criterion(number: int, title: str):
    """Record one PASS/FAIL line for an acceptance criterion; failures still propagate."""
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        LINES.append(f"FAIL  criterion {number}: {title} ({time.perf_counter() - start:.1f}s) {type(exc).__name__}: {exc}")
        print(LINES[-1])
        raise
    LINES.append(f"PASS  criterion {number}: {title} ({time.perf_counter() - start:.1f}s)")
    print(LINES[-1])
