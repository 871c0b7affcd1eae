import sys
from pathlib import Path

# make the shared corpus builder importable from every test module
sys.path.insert(0, str(Path(__file__).parent))
