import sys
from pathlib import Path

# allow running pytest from a fresh checkout without installing
src = Path(__file__).resolve().parents[1] / "src"
if str(src) not in sys.path:
    sys.path.insert(0, str(src))
