"""Run the acceptance suite and print only its PASS/FAIL lines."""

import subprocess
import sys
from pathlib import Path

root = Path(__file__).resolve().parents[1]
proc = subprocess.run([sys.executable, "-m", "pytest", "-q", str(root / "tests" / "test_acceptance.py")],
                      capture_output=True, text=True, cwd=root)
for line in proc.stdout.splitlines():
    if line.startswith("[PASS]") or line.startswith("[FAIL]"):
        print(line)
sys.exit(proc.returncode)
