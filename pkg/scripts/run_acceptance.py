"""Run the twelve acceptance criteria and print one PASS/FAIL line for each."""
import sys
from pathlib import Path

import pytest

if __name__ == "__main__":
    target = Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    sys.exit(pytest.main(["-q", "-p", "no:cacheprovider", str(target), *sys.argv[1:]]))
